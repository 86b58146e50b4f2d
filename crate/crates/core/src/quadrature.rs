//! Adaptive composite Simpson quadrature for smooth integrands.

const MAX_DEPTH: u32 = 40;

/// Integrates `f` over `[a, b]` to relative tolerance `rel_tol`.
///
/// `fa` and `fb` are the integrand values at the end points, which callers
/// usually already have.
pub fn adaptive_simpson<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    rel_tol: f64,
) -> f64 {
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let tol = rel_tol * whole.abs().max(f64::MIN_POSITIVE);
    recurse(&mut f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_up_to_cubic_are_exact() {
        let f = |x: f64| 1.0 + x - 2.0 * x * x + x * x * x;
        let got = adaptive_simpson(f, 0.0, 2.0, f(0.0), f(2.0), 1e-12);
        let exact = 2.0 + 2.0 - 16.0 / 3.0 + 4.0;
        assert!((got - exact).abs() < 1e-13);
    }

    #[test]
    fn smooth_integrand_to_tolerance() {
        let got = adaptive_simpson(f64::exp, 0.0, 3.0, 1.0, 3f64.exp(), 1e-10);
        let exact = 3f64.exp() - 1.0;
        assert!(((got - exact) / exact).abs() < 1e-10);
    }

    #[test]
    fn empty_interval() {
        assert_eq!(adaptive_simpson(|x| x, 1.0, 1.0, 1.0, 1.0, 1e-9), 0.0);
    }
}
