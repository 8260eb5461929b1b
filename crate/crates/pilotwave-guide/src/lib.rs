//! mdBook cannot run a book's code blocks against workspace crates, so each
//! chapter is included here as a doc comment and `cargo test --doc` runs
//! every Rust snippet. A failing snippet fails the build; the book cannot
//! drift from the library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/geometry.md")]
pub mod geometry {}

#[doc = include_str!("../../../book/src/fields.md")]
pub mod fields {}

#[doc = include_str!("../../../book/src/currents.md")]
pub mod currents {}

#[doc = include_str!("../../../book/src/guidance.md")]
pub mod guidance {}

#[doc = include_str!("../../../book/src/stress_energy.md")]
pub mod stress_energy {}

#[doc = include_str!("../../../book/src/ensemble.md")]
pub mod ensemble {}

#[doc = include_str!("../../../book/src/classical.md")]
pub mod classical {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
