//! Classic fourth-order one-step integration over small fixed-size states.

use crate::error::Result;

/// One RK4 step of y' = f(t, y). The derivative may fail (undefined flow,
/// history edge); the failure aborts the step.
pub fn rk4_step<const N: usize>(
    y: [f64; N],
    t: f64,
    h: f64,
    f: &mut impl FnMut(f64, [f64; N]) -> Result<[f64; N]>,
) -> Result<[f64; N]> {
    let add = |a: [f64; N], b: [f64; N], s: f64| {
        let mut out = a;
        for i in 0..N {
            out[i] += s * b[i];
        }
        out
    };
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, add(y, k1, 0.5 * h))?;
    let k3 = f(t + 0.5 * h, add(y, k2, 0.5 * h))?;
    let k4 = f(t + h, add(y, k3, h))?;
    let mut out = y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fourth_order_on_exponential() {
        // y' = y, y(0) = 1; error at t = 1 shrinks ~16x per halving.
        let run = |h: f64| {
            let mut y = [1.0];
            let mut t = 0.0;
            while t < 1.0 - 1e-12 {
                y = rk4_step(y, t, h, &mut |_, v| Ok([v[0]])).unwrap();
                t += h;
            }
            (y[0] - 1.0f64.exp()).abs()
        };
        let ratio = run(0.01) / run(0.005);
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }
}
