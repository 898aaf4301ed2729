//! Time-dependent scalar and complex parameter paths with analytic derivatives.

use crate::error::{FlowError, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "ScalarRepr")]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarPath {
    Constant {
        v: f64,
    },
    /// `a t + b`
    Linear {
        a: f64,
        b: f64,
    },
    /// ascending coefficients
    Poly {
        coeffs: Vec<f64>,
    },
    /// `amp sin(freq t + phase)`
    Sinusoid {
        amp: f64,
        freq: f64,
        phase: f64,
    },
    /// `sqrt(a t^2 + b t + c)`
    SqrtQuad {
        a: f64,
        b: f64,
        c: f64,
    },
    Quotient {
        num: Box<ScalarPath>,
        den: Box<ScalarPath>,
    },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Tagged {
    Constant {
        v: f64,
    },
    Linear {
        a: f64,
        b: f64,
    },
    Poly {
        coeffs: Vec<f64>,
    },
    Sinusoid {
        amp: f64,
        freq: f64,
        phase: f64,
    },
    SqrtQuad {
        a: f64,
        b: f64,
        c: f64,
    },
    Quotient {
        num: Box<ScalarPath>,
        den: Box<ScalarPath>,
    },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScalarRepr {
    Number(f64),
    Tagged(Tagged),
}

impl From<ScalarRepr> for ScalarPath {
    fn from(r: ScalarRepr) -> Self {
        match r {
            ScalarRepr::Number(v) => ScalarPath::Constant { v },
            ScalarRepr::Tagged(t) => match t {
                Tagged::Constant { v } => ScalarPath::Constant { v },
                Tagged::Linear { a, b } => ScalarPath::Linear { a, b },
                Tagged::Poly { coeffs } => ScalarPath::Poly { coeffs },
                Tagged::Sinusoid { amp, freq, phase } => ScalarPath::Sinusoid { amp, freq, phase },
                Tagged::SqrtQuad { a, b, c } => ScalarPath::SqrtQuad { a, b, c },
                Tagged::Quotient { num, den } => ScalarPath::Quotient { num, den },
            },
        }
    }
}

impl ScalarPath {
    pub fn constant(v: f64) -> Self {
        ScalarPath::Constant { v }
    }

    pub fn linear(a: f64, b: f64) -> Self {
        ScalarPath::Linear { a, b }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            ScalarPath::Constant { v } => *v,
            ScalarPath::Linear { a, b } => a * t + b,
            ScalarPath::Poly { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c),
            ScalarPath::Sinusoid { amp, freq, phase } => amp * (freq * t + phase).sin(),
            ScalarPath::SqrtQuad { a, b, c } => (a * t * t + b * t + c).sqrt(),
            ScalarPath::Quotient { num, den } => num.value(t) / den.value(t),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            ScalarPath::Constant { .. } => 0.0,
            ScalarPath::Linear { a, .. } => *a,
            ScalarPath::Poly { coeffs } => coeffs
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (i, c)| acc * t + i as f64 * c),
            ScalarPath::Sinusoid { amp, freq, phase } => amp * freq * (freq * t + phase).cos(),
            ScalarPath::SqrtQuad { a, b, c } => {
                (2.0 * a * t + b) / (2.0 * (a * t * t + b * t + c).sqrt())
            }
            ScalarPath::Quotient { num, den } => {
                let d = den.value(t);
                (num.derivative(t) * d - num.value(t) * den.derivative(t)) / (d * d)
            }
        }
    }

    /// Time derivative as a path of its own, when one exists in this grammar.
    pub fn derivative_path(&self) -> Option<ScalarPath> {
        Some(match self {
            ScalarPath::Constant { .. } => ScalarPath::constant(0.0),
            ScalarPath::Linear { a, .. } => ScalarPath::constant(*a),
            ScalarPath::Poly { coeffs } => ScalarPath::Poly {
                coeffs: coeffs
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(i, c)| i as f64 * c)
                    .collect(),
            },
            ScalarPath::Sinusoid { amp, freq, phase } => ScalarPath::Sinusoid {
                amp: amp * freq,
                freq: *freq,
                phase: phase + std::f64::consts::FRAC_PI_2,
            },
            ScalarPath::SqrtQuad { a, b, c } => ScalarPath::Quotient {
                num: Box::new(ScalarPath::linear(*a, 0.5 * b)),
                den: Box::new(ScalarPath::SqrtQuad {
                    a: *a,
                    b: *b,
                    c: *c,
                }),
            },
            ScalarPath::Quotient { .. } => return None,
        })
    }

    /// Structurally constant in time.
    pub fn is_constant(&self) -> bool {
        match self {
            ScalarPath::Constant { .. } => true,
            ScalarPath::Linear { a, .. } => *a == 0.0,
            ScalarPath::Poly { coeffs } => coeffs.iter().skip(1).all(|c| *c == 0.0),
            ScalarPath::Sinusoid { amp, freq, .. } => *amp == 0.0 || *freq == 0.0,
            ScalarPath::SqrtQuad { a, b, .. } => *a == 0.0 && *b == 0.0,
            ScalarPath::Quotient { num, den } => num.is_constant() && den.is_constant(),
        }
    }

    /// Samples `[t0, t1]` densely and rejects vanishing denominators or
    /// negative radicands.
    pub fn check_on(&self, field: &str, t0: f64, t1: f64) -> Result<()> {
        const N: usize = 1024;
        for i in 0..=N {
            let t = t0 + (t1 - t0) * i as f64 / N as f64;
            self.check_at(field, t)?;
        }
        Ok(())
    }

    fn check_at(&self, field: &str, t: f64) -> Result<()> {
        match self {
            ScalarPath::SqrtQuad { a, b, c } if a * t * t + b * t + c <= 0.0 => {
                Err(FlowError::invalid(
                    field,
                    format!("square-root radicand is not positive at t = {t}"),
                ))
            }
            ScalarPath::Quotient { num, den } => {
                num.check_at(field, t)?;
                den.check_at(field, t)?;
                if den.value(t).abs() < 1e-12 {
                    return Err(FlowError::invalid(
                        field,
                        format!("denominator vanishes at t = {t}"),
                    ));
                }
                Ok(())
            }
            _ if !self.value(t).is_finite() => Err(FlowError::invalid(
                field,
                format!("non-finite value at t = {t}"),
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexPath {
    Polar {
        modulus: ScalarPath,
        phase: ScalarPath,
    },
    Cartesian {
        re: ScalarPath,
        im: ScalarPath,
    },
}

impl ComplexPath {
    pub fn value(&self, t: f64) -> Complex64 {
        match self {
            ComplexPath::Polar { modulus, phase } => {
                Complex64::from_polar(modulus.value(t), phase.value(t))
            }
            ComplexPath::Cartesian { re, im } => Complex64::new(re.value(t), im.value(t)),
        }
    }

    pub fn derivative(&self, t: f64) -> Complex64 {
        match self {
            ComplexPath::Polar { modulus, phase } => {
                let rot = Complex64::from_polar(1.0, phase.value(t));
                rot * Complex64::new(
                    modulus.derivative(t),
                    modulus.value(t) * phase.derivative(t),
                )
            }
            ComplexPath::Cartesian { re, im } => Complex64::new(re.derivative(t), im.derivative(t)),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            ComplexPath::Polar { modulus, phase } => modulus.is_constant() && phase.is_constant(),
            ComplexPath::Cartesian { re, im } => re.is_constant() && im.is_constant(),
        }
    }

    pub fn check_on(&self, field: &str, t0: f64, t1: f64) -> Result<()> {
        match self {
            ComplexPath::Polar { modulus, phase } => {
                modulus.check_on(field, t0, t1)?;
                phase.check_on(field, t0, t1)
            }
            ComplexPath::Cartesian { re, im } => {
                re.check_on(field, t0, t1)?;
                im.check_on(field, t0, t1)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(p: &ScalarPath, t: f64) -> f64 {
        let h = 1e-6;
        (p.value(t + h) - p.value(t - h)) / (2.0 * h)
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let paths = [
            ScalarPath::linear(2.0, 1.0),
            ScalarPath::Poly {
                coeffs: vec![1.0, -2.0, 0.5, 0.25],
            },
            ScalarPath::Sinusoid {
                amp: 1.5,
                freq: 2.0,
                phase: 0.3,
            },
            ScalarPath::SqrtQuad {
                a: 1.0,
                b: 0.5,
                c: 1.0,
            },
            ScalarPath::Quotient {
                num: Box::new(ScalarPath::linear(1.0, 2.0)),
                den: Box::new(ScalarPath::linear(0.5, 3.0)),
            },
        ];
        for p in &paths {
            for t in [0.0, 0.7, 1.9] {
                assert!((p.derivative(t) - fd(p, t)).abs() < 1e-8, "{p:?} at {t}");
            }
        }
    }

    #[test]
    fn derivative_paths() {
        let paths = [
            ScalarPath::Poly {
                coeffs: vec![1.0, -2.0, 0.5],
            },
            ScalarPath::Sinusoid {
                amp: 1.5,
                freq: 2.0,
                phase: 0.3,
            },
            ScalarPath::SqrtQuad {
                a: 1.0,
                b: 0.5,
                c: 1.0,
            },
        ];
        for p in &paths {
            let d = p.derivative_path().unwrap();
            assert!((d.value(0.8) - p.derivative(0.8)).abs() < 1e-14);
        }
    }

    #[test]
    fn constancy_is_structural() {
        assert!(ScalarPath::constant(2.0).is_constant());
        assert!(ScalarPath::Poly {
            coeffs: vec![3.0, 0.0]
        }
        .is_constant());
        assert!(!ScalarPath::linear(1.0, 0.0).is_constant());
    }

    #[test]
    fn quotient_with_vanishing_denominator_rejected() {
        let p = ScalarPath::Quotient {
            num: Box::new(ScalarPath::constant(1.0)),
            den: Box::new(ScalarPath::linear(1.0, -1.0)),
        };
        assert!(p.check_on("h", 0.0, 2.0).is_err());
        assert!(p.check_on("h", 1.5, 2.0).is_ok());
    }

    #[test]
    fn json_forms() {
        let p: ScalarPath = serde_json::from_str("2.5").unwrap();
        assert_eq!(p, ScalarPath::constant(2.5));
        let p: ScalarPath =
            serde_json::from_str(r#"{"kind":"sinusoid","amp":1,"freq":2,"phase":0}"#).unwrap();
        assert!((p.value(0.25) - 0.5f64.sin()).abs() < 1e-15);
        let c: ComplexPath =
            serde_json::from_str(r#"{"modulus":1,"phase":{"kind":"linear","a":1,"b":0}}"#).unwrap();
        assert!((c.value(0.5) - Complex64::from_polar(1.0, 0.5)).norm() < 1e-15);
        let c: ComplexPath =
            serde_json::from_str(r#"{"re":0,"im":{"kind":"linear","a":2,"b":0}}"#).unwrap();
        assert_eq!(c.derivative(1.0), Complex64::new(0.0, 2.0));
    }

    #[test]
    fn polar_derivative() {
        let c = ComplexPath::Polar {
            modulus: ScalarPath::linear(1.0, 1.0),
            phase: ScalarPath::linear(2.0, 0.0),
        };
        let t = 0.4;
        let h = 1e-6;
        let fd = (c.value(t + h) - c.value(t - h)) / (2.0 * h);
        assert!((c.derivative(t) - fd).norm() < 1e-8);
    }
}
