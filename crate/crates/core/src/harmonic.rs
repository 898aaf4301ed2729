//! Planar harmonic maps `H = F + conj(G)` and their Schwarzian operators.

use crate::error::{FlowError, Result};
use crate::expr::Expr;
use num_complex::Complex64;

const DENOM_EPS: f64 = 1e-14;
const DILATATION_EPS: f64 = 1e-12;

/// Harmonic map stored through its derivatives `f = F'`, `g = G'`.
#[derive(Debug, Clone)]
pub struct HarmonicMap {
    f: [Expr; 3],
    g: [Expr; 3],
}

/// Values of `f, f', f''` and `g, g', g''` at one point.
#[derive(Debug, Clone, Copy)]
struct Jet {
    f: [Complex64; 3],
    g: [Complex64; 3],
}

impl HarmonicMap {
    pub fn from_derivatives(f: Expr, g: Expr) -> Self {
        let f1 = f.derivative();
        let g1 = g.derivative();
        HarmonicMap {
            f: [f, f1.clone(), f1.derivative()],
            g: [g, g1.clone(), g1.derivative()],
        }
    }

    pub fn from_potentials(big_f: &Expr, big_g: &Expr) -> Self {
        Self::from_derivatives(big_f.derivative(), big_g.derivative())
    }

    pub fn f(&self) -> &Expr {
        &self.f[0]
    }

    pub fn g(&self) -> &Expr {
        &self.g[0]
    }

    fn jet(&self, z: Complex64) -> Result<Jet> {
        let mut j = Jet {
            f: [Complex64::default(); 3],
            g: [Complex64::default(); 3],
        };
        for k in 0..3 {
            j.f[k] = self.f[k].eval(z)?;
            j.g[k] = self.g[k].eval(z)?;
        }
        Ok(j)
    }

    pub fn jacobian(&self, z: Complex64) -> Result<f64> {
        Ok(self.f[0].eval(z)?.norm_sqr() - self.g[0].eval(z)?.norm_sqr())
    }

    pub fn dilatation(&self, z: Complex64) -> Result<Complex64> {
        let f = self.f[0].eval(z)?;
        if f.norm() < DENOM_EPS {
            return Err(FlowError::ZeroDenominator);
        }
        Ok(self.g[0].eval(z)? / f)
    }

    pub fn sense_preserving(&self, z: Complex64) -> Result<bool> {
        Ok(self.jacobian(z)? > 0.0)
    }

    pub fn pre_schwarzian(&self, z: Complex64) -> Result<Complex64> {
        let d = DilatationJet::new(&self.jet(z)?)?;
        Ok(d.log_f1 - d.q1 * d.q.conj() / d.gap)
    }

    pub fn schwarzian(&self, z: Complex64) -> Result<Complex64> {
        let j = self.jet(z)?;
        let d = DilatationJet::new(&j)?;
        let sf = d.log_f1_prime - 0.5 * d.log_f1 * d.log_f1;
        let w = d.q.conj() / d.gap;
        let mixed = d.q1 * w;
        Ok(sf + w * (d.log_f1 * d.q1 - d.q2) - 1.5 * mixed * mixed)
    }
}

/// `q, q', q''` together with `F''/F'` and its derivative.
struct DilatationJet {
    q: Complex64,
    q1: Complex64,
    q2: Complex64,
    gap: f64,
    log_f1: Complex64,
    log_f1_prime: Complex64,
}

impl DilatationJet {
    fn new(j: &Jet) -> Result<Self> {
        let [f, f1, f2] = j.f;
        let [g, g1, g2] = j.g;
        if f.norm() < DENOM_EPS {
            return Err(FlowError::ZeroDenominator);
        }
        let q = g / f;
        let gap = 1.0 - q.norm_sqr();
        if gap < DILATATION_EPS {
            return Err(FlowError::DegenerateDilatation { gap });
        }
        let num = g1 * f - g * f1;
        let q1 = num / (f * f);
        let q2 = (g2 * f - g * f2) / (f * f) - 2.0 * num * f1 / (f * f * f);
        let log_f1 = f1 / f;
        let log_f1_prime = (f2 * f - f1 * f1) / (f * f);
        Ok(DilatationJet {
            q,
            q1,
            q2,
            gap,
            log_f1,
            log_f1_prime,
        })
    }
}

/// Classical Schwarzian `(F''/F')' - (F''/F')^2 / 2` of an analytic map.
pub fn classical_schwarzian(big_f: &Expr, z: Complex64) -> Result<Complex64> {
    let f1 = big_f.derivative();
    let f2 = f1.derivative();
    let f3 = f2.derivative();
    let (a, b, c) = (f1.eval(z)?, f2.eval(z)?, f3.eval(z)?);
    if a.norm() < DENOM_EPS {
        return Err(FlowError::ZeroDenominator);
    }
    let l = b / a;
    Ok((c * a - b * b) / (a * a) - 0.5 * l * l)
}

/// Affine transfer of a harmonic map that keeps both Schwarzian operators.
///
/// With `|alpha|^2 - |beta|^2 = 1` and `c > 0` the new map has Jacobian
/// `J / c` and the same dilatation up to a Möbius self-map of the disc.
pub fn transfer(
    map: &HarmonicMap,
    alpha: Complex64,
    beta: Complex64,
    gamma: f64,
    c: f64,
) -> Result<HarmonicMap> {
    if ((alpha.norm_sqr() - beta.norm_sqr()) - 1.0).abs() > 1e-12 {
        return Err(FlowError::invalid(
            "alpha, beta",
            "|alpha|^2 - |beta|^2 must equal 1",
        ));
    }
    if !(c > 0.0) {
        return Err(FlowError::invalid("c", "must be positive"));
    }
    let rot = Complex64::from_polar(1.0, gamma);
    let s = 1.0 / c.sqrt();
    let f = Expr::sum(vec![
        Expr::scale(s * alpha, map.f().clone()),
        Expr::scale(s * rot * beta, map.g().clone()),
    ]);
    let g = Expr::sum(vec![
        Expr::scale(s * beta.conj(), map.f().clone()),
        Expr::scale(s * rot * alpha.conj(), map.g().clone()),
    ]);
    Ok(HarmonicMap::from_derivatives(f, g))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn sample_map() -> HarmonicMap {
        let f = Expr::exp_linear(c(1.0), Complex64::new(0.0, 1.0));
        let g = Expr::exp_linear(c(0.4), Complex64::new(0.0, 2.0));
        HarmonicMap::from_derivatives(f, g)
    }

    #[test]
    fn jacobian_of_exponential_pair() {
        let m = sample_map();
        let z = Complex64::new(0.3, 0.5);
        let want = (-2.0 * 0.5f64).exp() - 0.16 * (-4.0 * 0.5f64).exp();
        assert!((m.jacobian(z).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn dilatation_zero_denominator() {
        let m = HarmonicMap::from_derivatives(Expr::identity(), Expr::real(1.0));
        assert_eq!(m.dilatation(c(0.0)), Err(FlowError::ZeroDenominator));
    }

    #[test]
    fn analytic_map_reduces_to_classical() {
        let big_f = Expr::exp_linear(c(1.0), Complex64::new(0.0, 1.0));
        let m = HarmonicMap::from_potentials(&big_f, &Expr::real(0.0));
        let z = Complex64::new(0.2, 0.1);
        let s = m.schwarzian(z).unwrap();
        // S(e^{iz}) = 1/2
        assert!((s - c(0.5)).norm() < 1e-13);
        assert!((classical_schwarzian(&big_f, z).unwrap() - c(0.5)).norm() < 1e-13);
        assert!((m.pre_schwarzian(z).unwrap() - Complex64::i()).norm() < 1e-13);
    }

    #[test]
    fn transfer_halves_jacobian() {
        let m = sample_map();
        let t = transfer(&m, c(2f64.sqrt()), c(1.0), 0.3, 2.0).unwrap();
        let z = Complex64::new(0.1, 0.4);
        assert!((m.jacobian(z).unwrap() - 2.0 * t.jacobian(z).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn transfer_rejects_bad_coefficients() {
        assert!(transfer(&sample_map(), c(1.0), c(1.0), 0.0, 1.0).is_err());
        assert!(transfer(&sample_map(), c(1.0), c(0.0), 0.0, -1.0).is_err());
    }
}
