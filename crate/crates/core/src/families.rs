//! The closed-form solution families and their coefficient paths.
//!
//! Every coupled family has the shape
//! `f = alpha f0 + e^{i gamma} beta g0`, `g = conj(beta) f0 + e^{i gamma} conj(alpha) g0`,
//! with `|alpha|^2 - |beta|^2 = 1`. The proportional families (`g0 = lambda f0`)
//! use `f = alpha f0`, `g = beta f0`. In both cases the phase of `alpha` is
//! produced by integrating the master relation, never copied from a table.

use crate::cjson;
use crate::engine::{integrate, ComplexPath, Mat2C, QuadratureConfig, ScalarPath};
use crate::error::{FlowError, Result};
use crate::expr::Expr;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum FamilySpec {
    /// `alpha = cosh r`, `beta = e^{-i k0} sinh r`.
    LinDepCommuting { r: ScalarPath, k0: f64 },
    LinDepScaled {
        #[serde(with = "cjson")]
        lambda: Complex64,
        r: ScalarPath,
        phi: ScalarPath,
        c: f64,
        d: f64,
    },
    LinDepGeneral {
        #[serde(with = "cjson")]
        lambda: Complex64,
        r: ScalarPath,
        phi: ScalarPath,
        xi: ComplexPath,
    },
    #[serde(rename = "lin_indep_case1")]
    LinIndepCase1 {
        r: ScalarPath,
        psi: ScalarPath,
        h: f64,
        d0: f64,
    },
    #[serde(rename = "lin_indep_case2")]
    LinIndepCase2 {
        c2: f64,
        w: f64,
        p: f64,
        psi: ScalarPath,
        h: f64,
        d0: f64,
    },
    #[serde(rename = "lin_indep_case3")]
    LinIndepCase3 {
        c1: f64,
        w: f64,
        psi: ScalarPath,
        h: f64,
        d0: f64,
    },
    #[serde(rename = "lin_indep_case4")]
    LinIndepCase4 {
        c1: f64,
        c2: f64,
        w: f64,
        p: f64,
        psi: ScalarPath,
        h: f64,
        d0: f64,
    },
    GeneralFlat {
        r: ScalarPath,
        phi: ScalarPath,
        d1: ScalarPath,
    },
    General {
        d1: ScalarPath,
        d2: ScalarPath,
        c4mod: ScalarPath,
        phi: ScalarPath,
    },
}

/// How the coefficients act on the initial pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Structure {
    Coupled,
    Proportional { lambda: Complex64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientPath {
    pub t: f64,
    pub structure: Structure,
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: f64,
    pub alpha_t: Complex64,
    pub beta_t: Complex64,
    pub gamma_t: f64,
    /// Right-hand side the master relation has to reproduce.
    pub prescribed: Complex64,
}

/// One point of a coefficient path before the phase integral.
#[derive(Debug, Clone, Copy)]
struct Moduli {
    big_r2: f64,
    big_r2_t: f64,
    /// squared modulus of beta as given by the closed form; may be negative
    /// outside the validity set
    r2: f64,
    r: f64,
    r_t: f64,
    phase: f64,
    phase_t: f64,
    gamma_t: f64,
    rhs: Complex64,
}

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn signed_sqrt_pair(r2: f64, r2_t: f64) -> (f64, f64) {
    let r = r2.sqrt();
    (r, r2_t / (2.0 * r))
}

impl FamilySpec {
    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::LinDepCommuting { .. } => "lin_dep_commuting",
            FamilySpec::LinDepScaled { .. } => "lin_dep_scaled",
            FamilySpec::LinDepGeneral { .. } => "lin_dep_general",
            FamilySpec::LinIndepCase1 { .. } => "lin_indep_case1",
            FamilySpec::LinIndepCase2 { .. } => "lin_indep_case2",
            FamilySpec::LinIndepCase3 { .. } => "lin_indep_case3",
            FamilySpec::LinIndepCase4 { .. } => "lin_indep_case4",
            FamilySpec::GeneralFlat { .. } => "general_flat",
            FamilySpec::General { .. } => "general",
        }
    }

    pub fn structure(&self) -> Structure {
        match self {
            FamilySpec::LinDepScaled { lambda, .. } | FamilySpec::LinDepGeneral { lambda, .. } => {
                Structure::Proportional { lambda: *lambda }
            }
            _ => Structure::Coupled,
        }
    }

    /// Parameter checks that do not depend on time.
    pub fn validate(&self) -> Result<()> {
        let lambda_checks = |lambda: &Complex64, r: &ScalarPath| -> Result<()> {
            let m = lambda.norm();
            if !(m > 0.0 && m < 1.0) {
                return Err(FlowError::invalid(
                    "params.lambda",
                    "|lambda| must lie in (0, 1)",
                ));
            }
            if (r.value(0.0) - m).abs() > 1e-10 {
                return Err(FlowError::invalid("params.r", "r(0) must equal |lambda|"));
            }
            Ok(())
        };
        match self {
            FamilySpec::LinDepScaled { lambda, r, .. }
            | FamilySpec::LinDepGeneral { lambda, r, .. } => lambda_checks(lambda, r),
            FamilySpec::LinIndepCase2 { c2, .. } if *c2 == 0.0 => {
                Err(FlowError::invalid("params.c2", "must be non-zero"))
            }
            FamilySpec::LinIndepCase3 { c1, .. } if *c1 == 0.0 => {
                Err(FlowError::invalid("params.c1", "must be non-zero"))
            }
            FamilySpec::LinIndepCase4 { c1, c2, .. } if *c1 == 0.0 || *c2 == 0.0 => Err(
                FlowError::invalid("params.c1, params.c2", "must both be non-zero"),
            ),
            _ => Ok(()),
        }
    }

    /// Dense checks of every parameter path on `[t0, t1]`.
    pub fn validate_paths(&self, t0: f64, t1: f64) -> Result<()> {
        let paths: Vec<(&str, &ScalarPath)> = match self {
            FamilySpec::LinDepCommuting { r, .. } => vec![("params.r", r)],
            FamilySpec::LinDepScaled { r, phi, .. } => vec![("params.r", r), ("params.phi", phi)],
            FamilySpec::LinDepGeneral { r, phi, xi, .. } => {
                xi.check_on("params.xi", t0, t1)?;
                vec![("params.r", r), ("params.phi", phi)]
            }
            FamilySpec::LinIndepCase1 { r, psi, .. } => vec![("params.r", r), ("params.psi", psi)],
            FamilySpec::LinIndepCase2 { psi, .. }
            | FamilySpec::LinIndepCase3 { psi, .. }
            | FamilySpec::LinIndepCase4 { psi, .. } => vec![("params.psi", psi)],
            FamilySpec::GeneralFlat { r, phi, d1 } => {
                vec![("params.r", r), ("params.phi", phi), ("params.d1", d1)]
            }
            FamilySpec::General { d1, d2, c4mod, phi } => vec![
                ("params.d1", d1),
                ("params.d2", d2),
                ("params.c4mod", c4mod),
                ("params.phi", phi),
            ],
        };
        for (field, p) in paths {
            p.check_on(field, t0, t1)?;
        }
        Ok(())
    }

    /// Text of the time predicate this family needs.
    pub fn predicate(&self) -> &'static str {
        match self {
            FamilySpec::LinIndepCase2 { .. } => "t >= 0 and (w t + p) / c2 > 1",
            FamilySpec::LinIndepCase3 { .. } => "t >= 0 and w / c1 > 1",
            FamilySpec::LinIndepCase4 { .. } => {
                "t >= 0 and ((w - c1) t + p - c2) / (c1 t + c2) > 0"
            }
            FamilySpec::General { .. } => "t >= 0 and D1(t) + D2(t) > 2 |C4(t)|",
            _ => "t >= 0",
        }
    }

    fn outside(&self, t: f64) -> FlowError {
        FlowError::OutsideValidity {
            predicate: self.predicate().to_string(),
            t,
        }
    }

    /// Checks the family's time predicate at `t`.
    pub fn check_time(&self, t: f64) -> Result<()> {
        let ok = t >= 0.0
            && match self {
                FamilySpec::LinIndepCase2 { c2, w, p, .. } => (w * t + p) / c2 > 1.0,
                FamilySpec::LinIndepCase3 { c1, w, .. } => w / c1 > 1.0,
                FamilySpec::LinIndepCase4 { c1, c2, w, p, .. } => {
                    ((w - c1) * t + p - c2) / (c1 * t + c2) > 0.0
                }
                FamilySpec::General { d1, d2, c4mod, .. } => {
                    d1.value(t) + d2.value(t) > 2.0 * c4mod.value(t).abs()
                }
                _ => true,
            };
        if ok {
            Ok(())
        } else {
            Err(self.outside(t))
        }
    }

    /// Whether the flow invariant `K` is constant in time for this spec.
    pub fn is_k_constant(&self) -> bool {
        match self {
            FamilySpec::LinDepCommuting { .. } => true,
            FamilySpec::LinDepScaled { c, .. } => *c == 0.0,
            FamilySpec::LinDepGeneral { xi, .. } => xi.is_constant(),
            FamilySpec::LinIndepCase1 { h, .. } => *h == 0.0,
            FamilySpec::LinIndepCase2 { .. }
            | FamilySpec::LinIndepCase3 { .. }
            | FamilySpec::LinIndepCase4 { .. } => false,
            FamilySpec::GeneralFlat { d1, .. } => d1.is_constant(),
            FamilySpec::General { d1, d2, c4mod, .. } => {
                d1.is_constant()
                    && d2.is_constant()
                    && c4mod.is_constant()
                    && c4mod.value(0.0) == 0.0
            }
        }
    }

    fn moduli(&self, s: f64) -> Moduli {
        match self {
            FamilySpec::LinDepCommuting { .. } => {
                unreachable!("commuting family has closed-form coefficients")
            }
            FamilySpec::LinDepScaled {
                lambda,
                r,
                phi,
                c,
                d,
            } => {
                let (rv, rt) = (r.value(s), r.derivative(s));
                Moduli {
                    big_r2: 1.0 - lambda.norm_sqr() + rv * rv,
                    big_r2_t: 2.0 * rv * rt,
                    r2: rv * rv,
                    r: rv,
                    r_t: rt,
                    phase: phi.value(s),
                    phase_t: phi.derivative(s),
                    gamma_t: 0.0,
                    rhs: re(c * s + d),
                }
            }
            FamilySpec::LinDepGeneral { lambda, r, phi, xi } => {
                let (rv, rt) = (r.value(s), r.derivative(s));
                Moduli {
                    big_r2: 1.0 - lambda.norm_sqr() + rv * rv,
                    big_r2_t: 2.0 * rv * rt,
                    r2: rv * rv,
                    r: rv,
                    r_t: rt,
                    phase: phi.value(s),
                    phase_t: phi.derivative(s),
                    gamma_t: 0.0,
                    rhs: -Complex64::i() * xi.value(s),
                }
            }
            FamilySpec::LinIndepCase1 { r, psi, h, d0 } => {
                let (rv, rt) = (r.value(s), r.derivative(s));
                Moduli {
                    big_r2: 1.0 + rv * rv,
                    big_r2_t: 2.0 * rv * rt,
                    r2: rv * rv,
                    r: rv,
                    r_t: rt,
                    phase: psi.value(s),
                    phase_t: psi.derivative(s),
                    gamma_t: 0.0,
                    rhs: re(h * s + d0),
                }
            }
            FamilySpec::LinIndepCase2 {
                c2,
                w,
                p,
                psi,
                h,
                d0,
            } => {
                let r2 = (w * s + p - c2) / (2.0 * c2);
                let r2_t = w / (2.0 * c2);
                let (r, r_t) = signed_sqrt_pair(r2, r2_t);
                Moduli {
                    big_r2: r2 + 1.0,
                    big_r2_t: r2_t,
                    r2,
                    r,
                    r_t,
                    phase: psi.value(s),
                    phase_t: psi.derivative(s),
                    gamma_t: *c2,
                    rhs: re(h * s + d0),
                }
            }
            FamilySpec::LinIndepCase3 { c1, w, psi, h, d0 } => {
                let r2 = (w - c1) / (2.0 * c1);
                Moduli {
                    big_r2: r2 + 1.0,
                    big_r2_t: 0.0,
                    r2,
                    r: r2.sqrt(),
                    r_t: 0.0,
                    phase: psi.value(s),
                    phase_t: psi.derivative(s),
                    gamma_t: 2.0 * c1 * s,
                    rhs: re(h * s + d0),
                }
            }
            FamilySpec::LinIndepCase4 {
                c1,
                c2,
                w,
                p,
                psi,
                h,
                d0,
            } => {
                let num = (w - c1) * s + p - c2;
                let den = 2.0 * (c1 * s + c2);
                let r2 = num / den;
                let r2_t = ((w - c1) * den - num * 2.0 * c1) / (den * den);
                let (r, r_t) = signed_sqrt_pair(r2, r2_t);
                Moduli {
                    big_r2: r2 + 1.0,
                    big_r2_t: r2_t,
                    r2,
                    r,
                    r_t,
                    phase: psi.value(s),
                    phase_t: psi.derivative(s),
                    gamma_t: 2.0 * c1 * s + c2,
                    rhs: re(h * s + d0),
                }
            }
            FamilySpec::GeneralFlat { r, phi, d1 } => {
                let (rv, rt) = (r.value(s), r.derivative(s));
                Moduli {
                    big_r2: 1.0 + rv * rv,
                    big_r2_t: 2.0 * rv * rt,
                    r2: rv * rv,
                    r: rv,
                    r_t: rt,
                    phase: phi.value(s),
                    phase_t: phi.derivative(s),
                    gamma_t: 0.0,
                    rhs: re(d1.value(s)),
                }
            }
            FamilySpec::General { d1, d2, c4mod, phi } => {
                let sum = d1.value(s) + d2.value(s);
                let sum_t = d1.derivative(s) + d2.derivative(s);
                let (m, m_t) = (c4mod.value(s), c4mod.derivative(s));
                let l = (sum * sum - 4.0 * m * m).sqrt();
                let l_t = (sum * sum_t - 4.0 * m * m_t) / l;
                // |beta| written as m * k(t) so that it stays smooth through m = 0
                let u = l * (sum + l);
                let u_t = l_t * (sum + l) + l * (sum_t + l_t);
                let k = (2.0 / u).sqrt();
                let k_t = -k * u_t / (2.0 * u);
                let r = m * k;
                Moduli {
                    big_r2: (sum + l) / (2.0 * l),
                    big_r2_t: (sum_t * l - sum * l_t) / (2.0 * l * l),
                    r2: r * r,
                    r,
                    r_t: m_t * k + m * k_t,
                    phase: phi.value(s),
                    phase_t: phi.derivative(s),
                    gamma_t: l,
                    rhs: re(d1.value(s)),
                }
            }
        }
    }

    fn phase_rate(&self, m: &Moduli) -> Complex64 {
        let sign = match self.structure() {
            Structure::Coupled => 1.0,
            Structure::Proportional { .. } => -1.0,
        };
        (m.rhs + sign * m.r2 * m.phase_t) / m.big_r2
    }

    fn gamma(&self, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
        Ok(match self {
            FamilySpec::LinIndepCase2 { c2, .. } => c2 * t,
            FamilySpec::LinIndepCase3 { c1, .. } => c1 * t * t,
            FamilySpec::LinIndepCase4 { c1, c2, .. } => c1 * t * t + c2 * t,
            FamilySpec::General { .. } => {
                let v = integrate(|s| re(self.moduli(s).gamma_t), 0.0, t, cfg)
                    .map_err(|e| self.on_interval(e, t))?;
                v.re
            }
            _ => 0.0,
        })
    }

    fn on_interval(&self, e: FlowError, t: f64) -> FlowError {
        match e {
            FlowError::NonFinite { .. } => FlowError::OutsideValidity {
                predicate: format!("{} on all of [0, t]", self.predicate()),
                t,
            },
            other => other,
        }
    }

    /// Coefficients and their time derivatives at `t`.
    pub fn coefficients(&self, t: f64, cfg: &QuadratureConfig) -> Result<CoefficientPath> {
        self.check_time(t)?;
        if let FamilySpec::LinDepCommuting { r, k0 } = self {
            let (rv, rt) = (r.value(t), r.derivative(t));
            let rot = Complex64::from_polar(1.0, -k0);
            return Ok(CoefficientPath {
                t,
                structure: Structure::Coupled,
                alpha: re(rv.cosh()),
                beta: rot * rv.sinh(),
                gamma: 0.0,
                alpha_t: re(rt * rv.sinh()),
                beta_t: rot * (rt * rv.cosh()),
                gamma_t: 0.0,
                prescribed: re(0.0),
            });
        }
        let m = self.moduli(t);
        let big_phase = integrate(|s| self.phase_rate(&self.moduli(s)), 0.0, t, cfg)
            .map_err(|e| self.on_interval(e, t))?;
        let big_phase_t = self.phase_rate(&m);
        let big_r = m.big_r2.sqrt();
        let big_r_t = m.big_r2_t / (2.0 * big_r);
        let i = Complex64::i();
        let a_rot = (i * big_phase).exp();
        let b_rot = Complex64::from_polar(1.0, m.phase);
        let out = CoefficientPath {
            t,
            structure: self.structure(),
            alpha: big_r * a_rot,
            beta: m.r * b_rot,
            gamma: self.gamma(t, cfg)?,
            alpha_t: (big_r_t + i * big_r * big_phase_t) * a_rot,
            beta_t: Complex64::new(m.r_t, m.r * m.phase_t) * b_rot,
            gamma_t: m.gamma_t,
            prescribed: m.rhs,
        };
        for v in [out.alpha, out.beta, out.alpha_t, out.beta_t] {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(self.outside(t));
            }
        }
        Ok(out)
    }
}

impl CoefficientPath {
    /// `|alpha|^2 - |beta|^2`
    pub fn modulus_gap(&self) -> f64 {
        self.alpha.norm_sqr() - self.beta.norm_sqr()
    }

    /// Left side of the master relation; equals `i * prescribed` on a
    /// genuine solution.
    pub fn master_lhs(&self) -> Complex64 {
        match self.structure {
            Structure::Coupled => self.alpha_t * self.alpha.conj() - self.beta_t * self.beta.conj(),
            Structure::Proportional { .. } => {
                self.alpha_t * self.alpha.conj() - self.beta_t.conj() * self.beta
            }
        }
    }

    pub fn master_residual(&self) -> f64 {
        (self.master_lhs() - Complex64::i() * self.prescribed).norm()
    }

    /// Mixing matrix and its time derivative: `(f, g) = M (f0, g0)`.
    pub fn mixing(&self) -> (Mat2C, Mat2C) {
        let z = Complex64::default();
        match self.structure {
            Structure::Coupled => {
                let i = Complex64::i();
                let rot = Complex64::from_polar(1.0, self.gamma);
                let m = Mat2C::new(
                    self.alpha,
                    rot * self.beta,
                    self.beta.conj(),
                    rot * self.alpha.conj(),
                );
                let m_t = Mat2C::new(
                    self.alpha_t,
                    rot * (self.beta_t + i * self.gamma_t * self.beta),
                    self.beta_t.conj(),
                    rot * (self.alpha_t.conj() + i * self.gamma_t * self.alpha.conj()),
                );
                (m, m_t)
            }
            Structure::Proportional { .. } => (
                Mat2C::new(self.alpha, z, self.beta, z),
                Mat2C::new(self.alpha_t, z, self.beta_t, z),
            ),
        }
    }

    /// Value of `K` the family predicts at a point with initial values
    /// `f0`, `g0`.
    pub fn expected_k(&self, f0: Complex64, g0: Complex64) -> Complex64 {
        match self.structure {
            Structure::Coupled => {
                let rot = Complex64::from_polar(1.0, self.gamma);
                let cross = (rot * self.beta * self.alpha.conj() * f0.conj() * g0).re;
                self.prescribed * (f0.norm_sqr() - g0.norm_sqr())
                    + self.gamma_t
                        * ((self.alpha.norm_sqr() + self.beta.norm_sqr()) * g0.norm_sqr()
                            + 2.0 * cross)
            }
            Structure::Proportional { .. } => self.prescribed * f0.norm_sqr(),
        }
    }
}

/// Derivative values `(f, g, f_t, g_t)` at one label.
pub fn fg_at(
    spec: &FamilySpec,
    f0: &Expr,
    g0: &Expr,
    t: f64,
    z: Complex64,
) -> Result<[Complex64; 4]> {
    let cp = spec.coefficients(t, &QuadratureConfig::default())?;
    let (a, b) = (f0.eval(z)?, g0.eval(z)?);
    if let Structure::Proportional { lambda } = cp.structure {
        check_proportional(a, b, lambda, z)?;
    }
    let (m, m_t) = cp.mixing();
    let [f, g] = m.apply([a, b]);
    let [f_t, g_t] = m_t.apply([a, b]);
    Ok([f, g, f_t, g_t])
}

pub(crate) fn check_proportional(
    f0: Complex64,
    g0: Complex64,
    lambda: Complex64,
    z: Complex64,
) -> Result<()> {
    let residual = (g0 - lambda * f0).norm();
    if residual > 1e-10 * f0.norm().max(1.0) {
        return Err(FlowError::MismatchedInitialPair {
            residual,
            z_re: z.re,
            z_im: z.im,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn case3_moduli_are_constant() {
        let spec = FamilySpec::LinIndepCase3 {
            c1: 0.5,
            w: 1.0,
            psi: ScalarPath::linear(1.0, 0.0),
            h: 0.0,
            d0: 0.0,
        };
        let cp = spec.coefficients(0.7, &cfg()).unwrap();
        assert!((cp.alpha.norm_sqr() - 1.5).abs() < 1e-14);
        assert!((cp.beta.norm_sqr() - 0.5).abs() < 1e-14);
        assert!((cp.gamma - 0.5 * 0.49).abs() < 1e-15);
    }

    #[test]
    fn case2_outside_validity() {
        let spec = FamilySpec::LinIndepCase2 {
            c2: 1.0,
            w: 1.0,
            p: 0.0,
            psi: ScalarPath::linear(1.0, 0.0),
            h: 0.0,
            d0: 0.0,
        };
        match spec.coefficients(0.5, &cfg()) {
            Err(FlowError::OutsideValidity { predicate, .. }) => assert!(predicate.contains("c2")),
            other => panic!("{other:?}"),
        }
        assert!(spec.coefficients(1.5, &cfg()).is_ok());
    }

    #[test]
    fn general_outside_interval() {
        let spec = FamilySpec::General {
            d1: ScalarPath::constant(1.0),
            d2: ScalarPath::constant(1.0),
            c4mod: ScalarPath::linear(1.0, 0.0),
            phi: ScalarPath::constant(0.0),
        };
        assert!(spec.coefficients(0.5, &cfg()).is_ok());
        assert!(matches!(
            spec.coefficients(1.5, &cfg()),
            Err(FlowError::OutsideValidity { .. })
        ));
    }

    #[test]
    fn commuting_master_relation() {
        let spec = FamilySpec::LinDepCommuting {
            r: ScalarPath::linear(0.3, 0.0),
            k0: 0.8,
        };
        let cp = spec.coefficients(1.2, &cfg()).unwrap();
        assert!((cp.modulus_gap() - 1.0).abs() < 1e-14);
        assert!(cp.master_residual() < 1e-14);
    }

    #[test]
    fn proportional_phase_sign() {
        let spec = FamilySpec::LinDepScaled {
            lambda: re(0.4),
            r: ScalarPath::linear(0.2, 0.4),
            phi: ScalarPath::linear(1.5, 0.0),
            c: 0.7,
            d: 0.1,
        };
        for t in [0.0, 0.3, 1.7] {
            let cp = spec.coefficients(t, &cfg()).unwrap();
            assert!(
                cp.master_residual() < 1e-9,
                "t = {t}: {}",
                cp.master_residual()
            );
            assert!((cp.modulus_gap() - 0.84).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_start_for_scaled_family() {
        let spec = FamilySpec::LinDepScaled {
            lambda: Complex64::new(0.3, 0.0),
            r: ScalarPath::constant(0.3),
            phi: ScalarPath::constant(0.0),
            c: 1.0,
            d: 0.0,
        };
        let f0 = Expr::exp_linear(re(1.0), Complex64::i());
        let g0 = Expr::scale(re(0.3), f0.clone());
        let z = Complex64::new(0.4, -0.2);
        let [f, g, ..] = fg_at(&spec, &f0, &g0, 0.0, z).unwrap();
        assert!((f - f0.eval(z).unwrap()).norm() < 1e-14);
        assert!((g - g0.eval(z).unwrap()).norm() < 1e-14);
        let bad = Expr::scale(re(0.5), f0.clone());
        assert!(matches!(
            fg_at(&spec, &f0, &bad, 0.0, z),
            Err(FlowError::MismatchedInitialPair { .. })
        ));
    }

    #[test]
    fn spec_json() {
        let src = r#"{"family":"lin_indep_case3","params":{"c1":0.5,"w":1.0,"psi":{"kind":"linear","a":1,"b":0},"h":0,"d0":0}}"#;
        let spec: FamilySpec = serde_json::from_str(src).unwrap();
        assert_eq!(spec.name(), "lin_indep_case3");
        let back: FamilySpec =
            serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn validation_rejects_bad_lambda() {
        let spec = FamilySpec::LinDepScaled {
            lambda: re(1.2),
            r: ScalarPath::constant(1.2),
            phi: ScalarPath::constant(0.0),
            c: 0.0,
            d: 0.0,
        };
        assert!(spec.validate().is_err());
    }
}
