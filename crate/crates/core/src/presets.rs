//! Named, fully parameterised flows.

use crate::engine::{ComplexPath, ScalarPath};
use crate::error::{FlowError, Result};
use crate::expr::Expr;
use crate::families::FamilySpec;
use crate::kinematics::{LabelGrid, LabeledFlow};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const PRESET_NAMES: [&str; 10] = [
    "kirchhoff",
    "gerstner",
    "example-4-1",
    "example-4-2",
    "example-4-3",
    "example-4-4",
    "example-4-5",
    "example-5-1",
    "example-5-2",
    "example-5-3",
];

/// Optional overrides accepted by the presets that expose them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    /// gravitational acceleration
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, rename = "A", skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    /// `|lambda|`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// rotation rate
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub spec: FamilySpec,
    pub f0: Expr,
    pub g0: Expr,
    pub domain: LabelGrid,
    /// a time window inside the validity set
    pub times: (f64, f64),
    /// one-line description of the flow
    pub summary: &'static str,
}

impl Preset {
    pub fn flow(&self) -> Result<LabeledFlow> {
        LabeledFlow::new(
            self.spec.clone(),
            self.f0.clone(),
            self.g0.clone(),
            self.domain,
        )
    }
}

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn exp_i(a: f64, k: f64) -> Expr {
    Expr::exp_linear(cx(a, 0.0), cx(0.0, k))
}

fn grid(a: (f64, f64), b: (f64, f64)) -> LabelGrid {
    LabelGrid {
        a_min: a.0,
        a_max: a.1,
        b_min: b.0,
        b_max: b.1,
        na: 16,
        nb: 16,
    }
}

fn positive(v: f64, field: &str) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(FlowError::invalid(field, "must be positive"))
    }
}

pub fn preset(name: &str, opts: &PresetOptions) -> Result<Preset> {
    let pi = std::f64::consts::PI;
    let lin = |a: f64| ScalarPath::linear(a, 0.0);
    let cst = ScalarPath::constant;
    // shared pair for the coupled examples
    let pair = |a1: f64, k1: f64, a2: f64, k2: f64| (exp_i(a1, k1), exp_i(a2, k2));
    Ok(match name {
        "kirchhoff" => {
            let k = positive(opts.k.unwrap_or(1.0), "flow.k")?;
            let amp = positive(opts.amplitude.unwrap_or(1.0), "flow.A")?;
            let lam = opts.lambda.unwrap_or(0.5);
            if !(lam > 0.0 && lam < 1.0) {
                return Err(FlowError::invalid(
                    "flow.lambda",
                    "|lambda| must lie in (0, 1)",
                ));
            }
            let c = opts.c.unwrap_or(1.0);
            let f0 = exp_i(k * amp, k);
            Preset {
                name: "kirchhoff",
                // uniform rotation e^{ict} needs a constant right-hand side
                spec: FamilySpec::LinDepScaled {
                    lambda: cx(lam, 0.0),
                    r: cst(lam),
                    phi: cst(0.0),
                    c: 0.0,
                    d: c,
                },
                g0: Expr::scale(cx(lam, 0.0), f0.clone()),
                f0,
                domain: grid((0.0, 1.8 * pi / k), (-0.5 / k, 0.5 / k)),
                times: (0.0, 2.0 * pi / c.abs().max(1e-3)),
                summary: "elliptical vortex, f = kA e^{i(ct+kz)}, g = kA|lambda| e^{ikz}",
            }
        }
        "gerstner" => {
            let k = positive(opts.k.unwrap_or(1.0), "flow.k")?;
            let g = positive(opts.g.unwrap_or(9.81), "flow.g")?;
            let w = (k * g).sqrt();
            Preset {
                name: "gerstner",
                spec: FamilySpec::General {
                    d1: cst(w),
                    d2: cst(w),
                    c4mod: cst(0.0),
                    phi: cst(0.0),
                },
                f0: Expr::real(1.0),
                g0: Expr::exp_linear(cx(-1.0, 0.0), cx(0.0, -k)),
                domain: grid((-3.0 / k, 3.0 / k), (-2.0 / k, -0.1 / k)),
                times: (0.0, 2.0),
                summary: "gravity wave, D1 = D2 = sqrt(k g), f0 = 1, g0 = -e^{-ikz}",
            }
        }
        "example-4-1" => {
            let (lam, k, amp) = (0.3, 2.0, 0.5);
            let f0 = exp_i(k * amp, k);
            Preset {
                name: "example-4-1",
                spec: FamilySpec::LinDepScaled {
                    lambda: cx(lam, 0.0),
                    r: cst(lam),
                    phi: cst(0.0),
                    c: 0.8,
                    d: 0.0,
                },
                g0: Expr::scale(cx(lam, 0.0), f0.clone()),
                f0,
                domain: grid((0.0, 0.9 * pi), (-0.4, 0.4)),
                times: (0.0, 2.0),
                summary: "elliptical vortex with a linear right-hand side c t",
            }
        }
        "example-4-2" => {
            let r0: f64 = 1.0;
            let (f0, g0) = pair(r0 * r0 / (1.0 + r0 * r0).sqrt(), 1.0, 1.0 / r0, 2.0);
            Preset {
                name: "example-4-2",
                spec: FamilySpec::LinIndepCase1 {
                    r: cst(r0),
                    psi: lin((1.0 + r0 * r0) / (r0 * r0)),
                    h: 1.0 + r0 * r0,
                    d0: 0.0,
                },
                f0,
                g0,
                domain: grid((0.0, 5.5), (0.6, 1.6)),
                times: (0.0, 2.0),
                summary: "gamma = 0, r = r0, h = 1 + r0^2",
            }
        }
        "example-4-3" => {
            let (f0, g0) = pair(1.0, 1.0, 0.5, 2.0);
            Preset {
                name: "example-4-3",
                spec: FamilySpec::LinIndepCase2 {
                    c2: 1.0,
                    w: 1.0,
                    p: 0.0,
                    psi: lin(1.0),
                    h: 0.0,
                    d0: 0.0,
                },
                f0,
                g0,
                domain: grid((0.0, 5.5), (0.2, 1.5)),
                times: (1.1, 3.0),
                summary: "gamma = c2 t, w = c2, valid for t > 1",
            }
        }
        "example-4-4" => {
            let (f0, g0) = pair(1.0, 1.0, 0.5, 2.0);
            Preset {
                name: "example-4-4",
                spec: FamilySpec::LinIndepCase3 {
                    c1: 0.5,
                    w: 1.0,
                    psi: lin(1.0),
                    h: 0.3,
                    d0: 0.0,
                },
                f0,
                g0,
                domain: grid((0.0, 5.5), (0.2, 1.5)),
                times: (0.0, 2.0),
                summary: "gamma = c1 t^2, w = 2 c1",
            }
        }
        "example-4-5" => {
            let (f0, g0) = pair(1.0, 1.0, 0.5, 2.0);
            Preset {
                name: "example-4-5",
                spec: FamilySpec::LinIndepCase4 {
                    c1: 0.5,
                    c2: 0.25,
                    w: 1.0,
                    p: 0.5,
                    psi: lin(1.0),
                    h: 0.3,
                    d0: 0.0,
                },
                f0,
                g0,
                domain: grid((0.0, 5.5), (0.2, 1.5)),
                times: (0.0, 2.0),
                summary: "gamma = c1 t^2 + c2 t, w = 2 c1, p = 2 c2",
            }
        }
        "example-5-1" => {
            let lam = 0.5;
            let nu0 = 1.0;
            let f0 = exp_i(1.0, 1.0);
            Preset {
                name: "example-5-1",
                spec: FamilySpec::LinDepGeneral {
                    lambda: cx(lam, 0.0),
                    r: cst(lam),
                    phi: lin(1.0),
                    xi: ComplexPath::Polar {
                        modulus: cst(nu0),
                        phase: lin(nu0),
                    },
                },
                g0: Expr::scale(cx(lam, 0.0), f0.clone()),
                f0,
                domain: grid((0.0, 5.5), (-0.5, 0.5)),
                times: (0.0, 2.0),
                summary: "Xi = nu0 e^{i nu0 t}, phi = t, r = |lambda|",
            }
        }
        "example-5-2" => {
            let r1: f64 = 1.0;
            let (f0, g0) = pair(1.0, 1.0, 0.5, 2.0);
            Preset {
                name: "example-5-2",
                spec: FamilySpec::GeneralFlat {
                    r: cst(r1),
                    phi: lin((1.0 + r1 * r1) / (r1 * r1)),
                    d1: ScalarPath::Poly {
                        coeffs: vec![0.0, 0.0, 3.0 * (1.0 + r1 * r1)],
                    },
                },
                f0,
                g0,
                domain: grid((0.0, 5.5), (0.2, 1.5)),
                times: (0.0, 2.0),
                summary: "|C4| = D2 = 0 limit, D1 = 3(1 + r1^2) t^2",
            }
        }
        "example-5-3" => {
            let (f0, g0) = pair(1.0, 1.0, 0.5, 2.0);
            let root = ScalarPath::SqrtQuad {
                a: 1.0,
                b: 0.0,
                c: 1.0,
            };
            Preset {
                name: "example-5-3",
                spec: FamilySpec::General {
                    d1: root.clone(),
                    d2: root,
                    c4mod: ScalarPath::Sinusoid {
                        amp: 1.0,
                        freq: 1.0,
                        phase: 0.0,
                    },
                    phi: cst(0.7),
                },
                f0,
                g0,
                domain: grid((0.0, 5.5), (0.2, 1.5)),
                times: (0.0, 3.0),
                summary: "|C4| = |sin t|, D1 = D2 = sqrt(1 + t^2)",
            }
        }
        other => return Err(FlowError::UnknownPreset(other.to_string())),
    })
}
