use crate::error::{FlowError, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-10,
            max_depth: 40,
        }
    }
}

/// Adaptive Simpson integration of a complex integrand over `[t0, t1]`.
pub fn integrate<F>(f: F, t0: f64, t1: f64, cfg: &QuadratureConfig) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    if t0 == t1 {
        return Ok(Complex64::default());
    }
    let eval = |t: f64| -> Result<Complex64> {
        let v = f(t);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(FlowError::non_finite(format!(
                "quadrature integrand at t = {t}"
            )))
        }
    };
    let (fa, fm, fb) = (eval(t0)?, eval(0.5 * (t0 + t1))?, eval(t1)?);
    let whole = (t1 - t0) / 6.0 * (fa + 4.0 * fm + fb);
    step(
        &eval,
        t0,
        t1,
        fa,
        fm,
        fb,
        whole,
        cfg.abs_tol,
        cfg.max_depth,
        cfg.max_depth,
    )
}

#[allow(clippy::too_many_arguments)]
fn step<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
    depth: u32,
    max_depth: u32,
) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let m = 0.5 * (a + b);
    let (lm, rm) = (f(0.5 * (a + m))?, f(0.5 * (m + b))?);
    let left = (m - a) / 6.0 * (fa + 4.0 * lm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * rm + fb);
    let delta = left + right - whole;
    if delta.norm() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(FlowError::DepthExceeded {
            depth: max_depth,
            t0: a,
            t1: b,
        });
    }
    let l = step(f, a, m, fa, lm, fm, left, 0.5 * tol, depth - 1, max_depth)?;
    let r = step(f, m, b, fm, rm, fb, right, 0.5 * tol, depth - 1, max_depth)?;
    Ok(l + r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_cubics() {
        let cfg = QuadratureConfig::default();
        let v = integrate(|t| Complex64::new(t * t * t, 2.0 * t), 0.0, 2.0, &cfg).unwrap();
        assert!((v - Complex64::new(4.0, 4.0)).norm() < 1e-14);
    }

    #[test]
    fn oscillatory_integrand() {
        let cfg = QuadratureConfig::default();
        let v = integrate(|t| Complex64::new(0.0, 5.0 * t).exp(), 0.0, 3.0, &cfg).unwrap();
        let want = (Complex64::new(0.0, 15.0).exp() - 1.0) / Complex64::new(0.0, 5.0);
        assert!((v - want).norm() < 1e-9);
    }

    #[test]
    fn reversed_interval_changes_sign() {
        let cfg = QuadratureConfig::default();
        let f = |t: f64| Complex64::new(t.cos(), 0.0);
        let a = integrate(f, 0.0, 1.0, &cfg).unwrap();
        let b = integrate(f, 1.0, 0.0, &cfg).unwrap();
        assert!((a + b).norm() < 1e-12);
    }

    #[test]
    fn depth_exceeded_on_singularity() {
        let cfg = QuadratureConfig {
            abs_tol: 1e-14,
            max_depth: 6,
        };
        let r = integrate(|t| Complex64::new(1.0 / t.sqrt(), 0.0), 1e-12, 1.0, &cfg);
        assert!(matches!(r, Err(FlowError::DepthExceeded { .. })));
    }

    #[test]
    fn non_finite_integrand() {
        let r = integrate(
            |_| Complex64::new(f64::NAN, 0.0),
            0.0,
            1.0,
            &QuadratureConfig::default(),
        );
        assert!(matches!(r, Err(FlowError::NonFinite { .. })));
    }
}
