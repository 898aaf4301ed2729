//! Closed-form Lagrangian flows built from time-dependent harmonic labelling maps.
//!
//! A flow is `x + iy = F(t, z) + conj(G(t, z))` over labels `z = a + ib`.
//! The families in [`families`] keep the map incompressible and the
//! vorticity closed-form; [`verify`] checks those claims numerically.

// `!(x > 0.0)` guards are meant to reject NaN too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cjson;
pub mod engine;
pub mod error;
pub mod expr;
pub mod families;
pub mod harmonic;
pub mod kinematics;
pub mod presets;
pub mod verify;

pub use engine::{ComplexPath, Mat2C, QuadratureConfig, ScalarPath};
pub use error::{FlowError, Result};
pub use expr::Expr;
pub use families::{CoefficientPath, FamilySpec, Structure};
pub use harmonic::HarmonicMap;
pub use kinematics::{Corruption, FlowSample, LabelGrid, LabeledFlow, Snapshot};
pub use num_complex::Complex64;
pub use presets::{preset, Preset, PresetOptions, PRESET_NAMES};
pub use verify::{run_suite, CheckReport, SuiteReport, ToleranceConfig};
