//! Numerical certification of a labelled flow.
//!
//! Each check samples the flow on a label grid over a time window and
//! reports its worst residual. Residuals are relative to `max(1, |reference|)`
//! so that the tolerances mean the same thing for large and small values.

use crate::engine::{
    commute_residual, exp_of_integral, fundamental_solution, ode_oracle, ComplexPath, Fundamental,
};
use crate::engine::{QuadratureConfig, ScalarPath};
use crate::error::{FlowError, Result};
use crate::families::FamilySpec;
use crate::harmonic::HarmonicMap;
use crate::kinematics::{Corruption, LabelGrid, LabeledFlow};
use crate::presets::{preset, PresetOptions};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    pub analytic_tol: f64,
    pub fd_tol: f64,
    pub fd_step_t: f64,
    pub fd_step_z: f64,
    pub samples_t: usize,
    pub grid: [usize; 2],
    /// allowed drift of the vorticity of a `K`-constant family
    pub conservation_tol: f64,
    /// time window the checks sample
    pub window: [f64; 2],
    /// seeds the label jitter of the span fit
    pub seed: u64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            analytic_tol: 1e-9,
            fd_tol: 1e-5,
            fd_step_t: 1e-4,
            fd_step_z: 1e-4,
            samples_t: 16,
            grid: [16, 16],
            conservation_tol: 1e-6,
            window: [0.0, 1.0],
            seed: 0,
        }
    }
}

/// Agreement required between the closed-form fundamental solution and RK4.
pub const MATRIX_LEMMA_TOL: f64 = 1e-8;
const RK4_STEPS: usize = 10_000;

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tolerances.analytic_tol", self.analytic_tol),
            ("tolerances.fd_tol", self.fd_tol),
            ("tolerances.fd_step_t", self.fd_step_t),
            ("tolerances.fd_step_z", self.fd_step_z),
            ("tolerances.conservation_tol", self.conservation_tol),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(FlowError::invalid(field, "must be positive and finite"));
            }
        }
        if self.samples_t < 2 {
            return Err(FlowError::invalid(
                "tolerances.samples_t",
                "need at least 2 time samples",
            ));
        }
        if self.grid[0] < 2 || self.grid[1] < 2 {
            return Err(FlowError::invalid(
                "tolerances.grid",
                "need at least 2 points per axis",
            ));
        }
        if !(self.window[0] < self.window[1]) {
            return Err(FlowError::invalid(
                "tolerances.window",
                "need window[0] < window[1]",
            ));
        }
        Ok(())
    }

    fn times(&self) -> Vec<f64> {
        linspace(self.window[0], self.window[1], self.samples_t)
    }

    /// Sample times that leave room for a centred time difference.
    fn interior_times(&self) -> Vec<f64> {
        let pad = 2.0 * self.fd_step_t;
        linspace(self.window[0] + pad, self.window[1] - pad, self.samples_t)
    }

    fn labels(&self, flow: &LabeledFlow) -> Vec<Complex64> {
        flow.domain().with_size(self.grid[0], self.grid[1]).points()
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// `[t, a, b]` of the worst residual
    pub worst_sample: [f64; 3],
    pub notes: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub checks: Vec<CheckReport>,
    pub pass: bool,
}

/// Running maximum of a residual together with where it occurred.
#[derive(Debug, Clone, Copy)]
struct Worst {
    residual: f64,
    at: [f64; 3],
}

impl Worst {
    fn new() -> Self {
        Worst {
            residual: 0.0,
            at: [f64::NAN; 3],
        }
    }

    fn push(&mut self, r: f64, t: f64, z: Complex64) {
        // a NaN residual is a failure, never silently ignored
        let r = if r.is_nan() { f64::INFINITY } else { r };
        if r > self.residual || self.at[0].is_nan() {
            self.residual = r;
            self.at = [t, z.re, z.im];
        }
    }

    fn merge(mut self, o: Worst) -> Worst {
        if o.residual > self.residual || self.at[0].is_nan() {
            self = o;
        }
        self
    }

    fn report(self, name: &str, tolerance: f64, notes: String) -> CheckReport {
        CheckReport {
            name: name.to_string(),
            max_residual: self.residual,
            tolerance,
            pass: self.residual <= tolerance,
            worst_sample: self.at,
            notes,
        }
    }
}

fn rel(diff: f64, reference: f64) -> f64 {
    diff / reference.abs().max(1.0)
}

/// Runs `per_time` for every time in parallel and folds the results in order.
fn over_times<F>(times: &[f64], per_time: F) -> Result<Worst>
where
    F: Fn(f64) -> Result<Worst> + Sync,
{
    let parts = times
        .par_iter()
        .map(|&t| per_time(t))
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.into_iter().fold(Worst::new(), Worst::merge))
}

/// `J(t, z)` against the Jacobian of the initial map.
pub fn check_jacobian_invariance(flow: &LabeledFlow, cfg: &ToleranceConfig) -> Result<CheckReport> {
    let labels = cfg.labels(flow);
    let worst = over_times(&cfg.times(), |t| {
        let snap = flow.at(t)?;
        let mut w = Worst::new();
        for &z in &labels {
            let j0 = flow.reference_jacobian(z)?;
            w.push(rel((snap.jacobian(z)? - j0).abs(), j0), t, z);
        }
        Ok(w)
    })?;
    Ok(worst.report(
        "jacobian_invariance",
        cfg.analytic_tol,
        "|J(t,z) - J(0,z)| / max(1, |J(0,z)|)".into(),
    ))
}

/// `f_t conj f - conj(g_t) g` against `i K` predicted by the family.
pub fn check_key_equation(flow: &LabeledFlow, cfg: &ToleranceConfig) -> Result<CheckReport> {
    let labels = cfg.labels(flow);
    let worst = over_times(&cfg.times(), |t| {
        let snap = flow.at(t)?;
        let mut w = Worst::new();
        for &z in &labels {
            let k = snap.expected_k(z)?;
            let r = (snap.key_lhs(z)? - Complex64::i() * k).norm();
            w.push(rel(r, k.norm()), t, z);
        }
        Ok(w)
    })?;
    // K = -i lhs must be real on an incompressible flow
    let imag = over_times(&cfg.times(), |t| {
        let snap = flow.at(t)?;
        let mut w = Worst::new();
        for &z in &labels {
            let k = -Complex64::i() * snap.key_lhs(z)?;
            w.push(rel(k.im.abs(), k.re), t, z);
        }
        Ok(w)
    })?;
    let note = if flow.spec().is_k_constant() {
        "K constant in time"
    } else {
        "K varies in time"
    };
    let mut notes = format!("|lhs - iK| / max(1, |K|); {note}");
    if imag.residual > cfg.analytic_tol {
        notes.push_str(&format!(
            "; non-real K: |Im K| / max(1, |Re K|) up to {:.3e} at t = {}",
            imag.residual, imag.at[0]
        ));
    }
    Ok(worst.report("key_equation", cfg.analytic_tol, notes))
}

/// Least-squares fit of `K` on the span of `|f0|^2, |g0|^2, f0 conj(g0), conj(f0) g0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanFit {
    /// one coefficient per basis function kept
    pub coefficients: Vec<Complex64>,
    /// 4 for the full basis, 1 when only `|f0|^2` is kept
    pub basis_size: usize,
    pub gram_condition: f64,
    pub max_residual: f64,
    pub worst: [f64; 3],
}

const GRAM_LIMIT: f64 = 1e12;

pub fn span_decomposition(flow: &LabeledFlow, t: f64, cfg: &ToleranceConfig) -> Result<SpanFit> {
    let snap = flow.at(t)?;
    let grid = flow.domain().with_size(cfg.grid[0], cfg.grid[1]);
    let labels = jittered(&grid, cfg.seed);
    let mut rows = Vec::with_capacity(labels.len());
    let mut ks = Vec::with_capacity(labels.len());
    for &z in &labels {
        let (f0, g0) = (flow.f0().eval(z)?, flow.g0().eval(z)?);
        rows.push([
            re(f0.norm_sqr()),
            re(g0.norm_sqr()),
            f0 * g0.conj(),
            f0.conj() * g0,
        ]);
        ks.push(-Complex64::i() * snap.key_lhs(z)?);
    }
    let y = DVector::from_vec(ks.clone());
    let full = DMatrix::from_fn(rows.len(), 4, |i, j| rows[i][j]);
    let (coef, cond, size) = match least_squares(&full, &y) {
        Some((c, cond)) if cond <= GRAM_LIMIT => (c, cond, 4),
        _ => {
            let one = DMatrix::from_fn(rows.len(), 1, |i, _| rows[i][0]);
            match least_squares(&one, &y) {
                Some((c, cond)) => (c, cond, 1),
                None => return Err(FlowError::DegenerateBasis),
            }
        }
    };
    let mut w = Worst::new();
    for (i, &z) in labels.iter().enumerate() {
        let fit: Complex64 = (0..size).map(|j| rows[i][j] * coef[j]).sum();
        w.push(rel((ks[i] - fit).norm(), ks[i].norm()), t, z);
    }
    Ok(SpanFit {
        coefficients: coef.iter().copied().collect(),
        basis_size: size,
        gram_condition: cond,
        max_residual: w.residual,
        worst: w.at,
    })
}

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn jittered(grid: &LabelGrid, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let da = (grid.a_max - grid.a_min) / (grid.na - 1) as f64;
    let db = (grid.b_max - grid.b_min) / (grid.nb - 1) as f64;
    grid.points()
        .into_iter()
        .map(|z| {
            let a = (z.re + rng.gen_range(-0.25..0.25) * da).clamp(grid.a_min, grid.a_max);
            let b = (z.im + rng.gen_range(-0.25..0.25) * db).clamp(grid.b_min, grid.b_max);
            Complex64::new(a, b)
        })
        .collect()
}

/// Normal-equation solve on unit-normalised columns with one refinement
/// step. Returns `None` when the Gram matrix is singular.
fn least_squares(
    a: &DMatrix<Complex64>,
    y: &DVector<Complex64>,
) -> Option<(DVector<Complex64>, f64)> {
    let norms: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
    if norms.iter().any(|n| !(*n > 0.0)) {
        return None;
    }
    let scaled = DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] / norms[j]);
    let gram = scaled.adjoint() * &scaled;
    let eig = gram.clone().symmetric_eigen();
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    let cond = if min > 0.0 { max / min } else { f64::INFINITY };
    let lu = gram.lu();
    let mut x = lu.solve(&(scaled.adjoint() * y))?;
    let r = y - &scaled * &x;
    x += lu.solve(&(scaled.adjoint() * r))?;
    let x = DVector::from_fn(x.len(), |j, _| x[j] / norms[j]);
    Some((x, cond))
}

pub fn check_span_decomposition(
    flow: &LabeledFlow,
    t: f64,
    cfg: &ToleranceConfig,
) -> Result<CheckReport> {
    let fit = span_decomposition(flow, t, cfg)?;
    let names = ["|f0|^2", "|g0|^2", "f0 conj(g0)", "conj(f0) g0"];
    let coeffs = fit
        .coefficients
        .iter()
        .zip(names)
        .map(|(c, n)| format!("{n}: {}{:+}i", c.re, c.im))
        .collect::<Vec<_>>()
        .join(", ");
    let notes = format!(
        "basis size {}, gram condition {:.3e}; {coeffs}",
        fit.basis_size, fit.gram_condition
    );
    let mut w = Worst::new();
    w.residual = fit.max_residual;
    w.at = fit.worst;
    Ok(w.report("span_decomposition", cfg.analytic_tol, notes))
}

/// `J dω/dt = 2 dK/dt` with centred time differences.
pub fn check_vorticity_identity(flow: &LabeledFlow, cfg: &ToleranceConfig) -> Result<CheckReport> {
    let labels = cfg.labels(flow);
    let dt = cfg.fd_step_t;
    let worst = over_times(&cfg.interior_times(), |t| {
        let (lo, mid, hi) = (flow.at(t - dt)?, flow.at(t)?, flow.at(t + dt)?);
        let mut w = Worst::new();
        for &z in &labels {
            let (a, b) = (lo.sample(z)?, hi.sample(z)?);
            let j = mid.jacobian(z)?;
            let dw = (b.omega - a.omega) / (2.0 * dt);
            let dk = (b.k - a.k) / (2.0 * dt);
            w.push(rel((j * dw - 2.0 * dk).abs(), 2.0 * dk), t, z);
        }
        Ok(w)
    })?;
    Ok(worst.report(
        "vorticity_identity",
        cfg.fd_tol,
        format!("|J dw/dt - 2 dK/dt|, centred step {dt:e}"),
    ))
}

/// `ω(t) = ω(t0)` for families whose `K` is constant in time.
pub fn check_vorticity_conservation(
    flow: &LabeledFlow,
    cfg: &ToleranceConfig,
) -> Result<CheckReport> {
    let labels = cfg.labels(flow);
    let times = cfg.times();
    let first = flow.at(times[0])?;
    let w0 = labels
        .iter()
        .map(|&z| first.vorticity(z))
        .collect::<Result<Vec<_>>>()?;
    let worst = over_times(&times, |t| {
        let snap = flow.at(t)?;
        let mut w = Worst::new();
        for (&z, &o) in labels.iter().zip(&w0) {
            w.push(rel((snap.vorticity(z)? - o).abs(), o), t, z);
        }
        Ok(w)
    })?;
    Ok(worst.report(
        "vorticity_conservation",
        cfg.conservation_tol,
        "|w(t,z) - w(t0,z)| / max(1, |w(t0,z)|)".into(),
    ))
}

/// Pre-Schwarzian and Schwarzian of the frozen map against the first time.
pub fn check_schwarzian_time_invariance(
    flow: &LabeledFlow,
    cfg: &ToleranceConfig,
) -> Result<CheckReport> {
    let labels = cfg.labels(flow);
    let times = cfg.times();
    let first = flow.at(times[0])?.harmonic_map();
    let refs = labels
        .iter()
        .map(|&z| Ok((first.pre_schwarzian(z)?, first.schwarzian(z)?)))
        .collect::<Result<Vec<_>>>()?;
    let worst = over_times(&times, |t| {
        let map = flow.at(t)?.harmonic_map();
        let mut w = Worst::new();
        for (&z, &(p0, s0)) in labels.iter().zip(&refs) {
            let dp = rel((map.pre_schwarzian(z)? - p0).norm(), p0.norm());
            let ds = rel((map.schwarzian(z)? - s0).norm(), s0.norm());
            w.push(dp.max(ds), t, z);
        }
        Ok(w)
    })?;
    Ok(worst.report(
        "schwarzian_time_invariance",
        cfg.analytic_tol,
        "max of P_H and S_H drift from t0".into(),
    ))
}

const MIN_SEPARATION: f64 = 1e-10;

/// `J > 0`, `|q| < 1` and distinct images of distinct labels at time `t`.
pub fn check_sense_preserving_and_injectivity(
    flow: &LabeledFlow,
    t: f64,
    cfg: &ToleranceConfig,
) -> Result<CheckReport> {
    check_sense_at_times(flow, &[t], cfg)
}

fn check_sense_at_times(
    flow: &LabeledFlow,
    times: &[f64],
    cfg: &ToleranceConfig,
) -> Result<CheckReport> {
    let labels = cfg.labels(flow);
    let stats = times
        .par_iter()
        .map(|&t| {
            let snap = flow.at(t)?;
            let mut min_j = f64::INFINITY;
            let mut w = Worst::new();
            let mut pts = Vec::with_capacity(labels.len());
            for &z in &labels {
                let [f, g, ..] = snap.fg(z)?;
                min_j = min_j.min(f.norm_sqr() - g.norm_sqr());
                let q = if f.norm() < 1e-14 {
                    f64::INFINITY
                } else {
                    (g / f).norm()
                };
                w.push(q, t, z);
                pts.push((snap.position(z)?, z));
            }
            let mut min_d = f64::INFINITY;
            let mut close = labels[0];
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    let d = (pts[i].0 - pts[j].0).norm();
                    if d < min_d {
                        min_d = d;
                        close = pts[i].1;
                    }
                }
            }
            w.push(MIN_SEPARATION / min_d, t, close);
            Ok((w, min_j, min_d))
        })
        .collect::<Result<Vec<_>>>()?;
    let min_j = stats.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let min_d = stats.iter().map(|s| s.2).fold(f64::INFINITY, f64::min);
    let mut worst = stats
        .into_iter()
        .map(|s| s.0)
        .fold(Worst::new(), Worst::merge);
    if !(min_j > 0.0) {
        worst.residual = worst.residual.max(1.0);
    }
    let notes = format!(
        "residual = max(|q|, {MIN_SEPARATION:e} / min distance); min J = {min_j:e}, min distance = {min_d:e}"
    );
    // strictly below one: |q| = 1 is already degenerate
    Ok(worst.report("sense_preserving_injectivity", 1.0 - f64::EPSILON, notes))
}

/// Closed-form `exp(int_0^t D)` against RK4 at `t_max / 4`, `t_max / 2`, `t_max`.
pub fn check_matrix_lemma(
    b: &ComplexPath,
    t_max: f64,
    cfg: &QuadratureConfig,
) -> Result<CheckReport> {
    let mut w = Worst::new();
    let mut commute = 0.0f64;
    let mut closed_form = true;
    for t in [0.25 * t_max, 0.5 * t_max, t_max] {
        let x = exp_of_integral(b, t, cfg)?;
        let ode = ode_oracle(b, t, RK4_STEPS)?;
        w.push((x - ode).max_abs(), t, Complex64::default());
        match fundamental_solution(b, t, cfg)? {
            Fundamental::NonCommuting { residual } => {
                closed_form = false;
                commute = commute.max(residual);
            }
            Fundamental::Matrix(_) => {
                let d = crate::engine::Mat2C::antidiagonal(b.value(t));
                let i = crate::engine::Mat2C::antidiagonal(crate::engine::integrate(
                    |s| b.value(s),
                    0.0,
                    t,
                    cfg,
                )?);
                commute = commute.max(commute_residual(&d, &i));
            }
        }
    }
    let notes = format!(
        "{}; max commutator {commute:.3e}; RK4 with {RK4_STEPS} steps",
        if closed_form {
            "generator commutes with its integral"
        } else {
            "generator does not commute"
        }
    );
    Ok(w.report("matrix_lemma", MATRIX_LEMMA_TOL, notes))
}

/// Generator of the commuting family, `B = r'(t) e^{i k0}`.
pub fn commuting_generator(spec: &FamilySpec) -> Option<ComplexPath> {
    match spec {
        FamilySpec::LinDepCommuting { r, k0 } => Some(ComplexPath::Polar {
            modulus: r.derivative_path()?,
            phase: ScalarPath::constant(*k0),
        }),
        _ => None,
    }
}

/// Every applicable check, in a fixed order.
pub fn run_suite(flow: &LabeledFlow, cfg: &ToleranceConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let mid = 0.5 * (cfg.window[0] + cfg.window[1]);
    let mut checks = vec![
        check_jacobian_invariance(flow, cfg)?,
        check_key_equation(flow, cfg)?,
        check_span_decomposition(flow, mid, cfg)?,
        check_vorticity_identity(flow, cfg)?,
    ];
    if flow.spec().is_k_constant() {
        checks.push(check_vorticity_conservation(flow, cfg)?);
    }
    checks.push(check_schwarzian_time_invariance(flow, cfg)?);
    checks.push(check_sense_at_times(flow, &cfg.times(), cfg)?);
    if let Some(b) = commuting_generator(flow.spec()) {
        let mut lemma = check_matrix_lemma(&b, cfg.window[1], &QuadratureConfig::default())?;
        // the family's own coefficients must coincide with the fundamental solution
        let cp = flow
            .spec()
            .coefficients(cfg.window[1], &QuadratureConfig::default())?;
        let x = exp_of_integral(&b, cfg.window[1], &QuadratureConfig::default())?;
        let gap = (cp.mixing().0 - x).max_abs();
        lemma
            .notes
            .push_str(&format!("; coefficient matrix vs exp(int D): {gap:.3e}"));
        if gap > lemma.max_residual {
            lemma.max_residual = gap;
            lemma.worst_sample = [cfg.window[1], 0.0, 0.0];
        }
        lemma.pass = lemma.max_residual <= lemma.tolerance;
        checks.push(lemma);
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(SuiteReport { checks, pass })
}

/// `|d/d conj(z)|` of the harmonic Schwarzian by centred differences.
pub fn schwarzian_dbar_residual(map: &HarmonicMap, z: Complex64, h: f64) -> Result<f64> {
    let ih = Complex64::new(0.0, h);
    let da = (map.schwarzian(z + h)? - map.schwarzian(z - h)?) / (2.0 * h);
    let db = (map.schwarzian(z + ih)? - map.schwarzian(z - ih)?) / (2.0 * h);
    Ok((0.5 * (da + Complex64::i() * db)).norm())
}

/// A deliberately broken flow paired with the check it must fail.
pub struct NegativeControl {
    pub check: &'static str,
    pub description: &'static str,
    pub report: CheckReport,
}

fn corrupted(name: &str, c: Corruption) -> Result<(LabeledFlow, ToleranceConfig)> {
    let p = preset(name, &PresetOptions::default())?;
    let cfg = ToleranceConfig {
        window: [p.times.0, p.times.0 + 1.0],
        ..Default::default()
    };
    Ok((p.flow()?.with_corruption(c), cfg))
}

/// Kirchhoff on a strip two periods wide with an odd label count, so that
/// two labels a full period apart land on the same point.
pub fn two_period_kirchhoff() -> Result<(LabeledFlow, ToleranceConfig)> {
    let p = preset("kirchhoff", &PresetOptions::default())?;
    let period = 2.0 * std::f64::consts::PI;
    let domain = LabelGrid {
        a_min: 0.0,
        a_max: 2.0 * period,
        na: 17,
        ..p.domain
    };
    let cfg = ToleranceConfig {
        grid: [17, 4],
        window: [0.0, 1.0],
        ..Default::default()
    };
    Ok((p.flow()?.with_domain(domain), cfg))
}

/// Generator `B(t) = e^{it}`, whose direction rotates.
pub fn rotating_generator() -> ComplexPath {
    ComplexPath::Polar {
        modulus: ScalarPath::constant(1.0),
        phase: ScalarPath::linear(1.0, 0.0),
    }
}

pub fn negative_controls() -> Result<Vec<NegativeControl>> {
    let mut out = Vec::new();
    let (flow, cfg) = corrupted("kirchhoff", Corruption::ScaleBeta { factor: 1.01 })?;
    out.push(NegativeControl {
        check: "jacobian_invariance",
        description: "kirchhoff with beta scaled by 1.01",
        report: check_jacobian_invariance(&flow, &cfg)?,
    });
    let (flow, cfg) = corrupted("gerstner", Corruption::OffsetGamma { rate: 0.01 })?;
    out.push(NegativeControl {
        check: "key_equation",
        description: "gerstner with gamma advanced by 0.01 t",
        report: check_key_equation(&flow, &cfg)?,
    });
    let (flow, cfg) = corrupted("gerstner", Corruption::Drift { eps: 1e-3 })?;
    out.push(NegativeControl {
        check: "span_decomposition",
        description: "gerstner with a drift term 1e-3 t z f0 in f",
        report: check_span_decomposition(&flow, 0.5, &cfg)?,
    });
    let (flow, cfg) = corrupted("kirchhoff", Corruption::RampBeta { rate: 0.1 })?;
    out.push(NegativeControl {
        check: "vorticity_identity",
        description: "kirchhoff with beta ramped by (1 + 0.1 t)",
        report: check_vorticity_identity(&flow, &cfg)?,
    });
    let (flow, cfg) = corrupted("gerstner", Corruption::Drift { eps: 1e-3 })?;
    out.push(NegativeControl {
        check: "vorticity_conservation",
        description: "gerstner with a drift term 1e-3 t z f0 in f",
        report: check_vorticity_conservation(&flow, &cfg)?,
    });
    out.push(NegativeControl {
        check: "schwarzian_time_invariance",
        description: "gerstner with a drift term 1e-3 t z f0 in f",
        report: check_schwarzian_time_invariance(&flow, &cfg)?,
    });
    let (flow, cfg) = two_period_kirchhoff()?;
    out.push(NegativeControl {
        check: "sense_preserving_injectivity",
        description: "kirchhoff on a strip two periods wide",
        report: check_sense_preserving_and_injectivity(&flow, 0.5, &cfg)?,
    });
    out.push(NegativeControl {
        check: "matrix_lemma",
        description: "generator e^{it} with rotating direction",
        report: check_matrix_lemma(&rotating_generator(), 2.0, &QuadratureConfig::default())?,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn suite(name: &str) -> SuiteReport {
        let p = preset(name, &PresetOptions::default()).unwrap();
        let cfg = ToleranceConfig {
            window: [p.times.0, p.times.1],
            ..Default::default()
        };
        run_suite(&p.flow().unwrap(), &cfg).unwrap()
    }

    #[test]
    fn kirchhoff_passes_everything() {
        let r = suite("kirchhoff");
        for c in &r.checks {
            assert!(c.pass, "{c:?}");
        }
    }

    #[test]
    fn gerstner_span_recovers_frequencies() {
        let p = preset("gerstner", &PresetOptions::default()).unwrap();
        let cfg = ToleranceConfig {
            window: [0.0, 2.0],
            ..Default::default()
        };
        let fit = span_decomposition(&p.flow().unwrap(), 0.7, &cfg).unwrap();
        assert_eq!(fit.basis_size, 4);
        let w = 9.81f64.sqrt();
        assert!((fit.coefficients[0] - w).norm() < 1e-6);
        assert!((fit.coefficients[1] - w).norm() < 1e-6);
        assert!(fit.max_residual < 1e-9);
    }

    #[test]
    fn proportional_pair_falls_back_to_one_term() {
        let p = preset("kirchhoff", &PresetOptions::default()).unwrap();
        let fit = span_decomposition(&p.flow().unwrap(), 0.3, &ToleranceConfig::default()).unwrap();
        assert_eq!(fit.basis_size, 1);
        assert!((fit.coefficients[0] - 1.0).norm() < 1e-9);
    }

    #[test]
    fn nan_residual_fails() {
        let mut w = Worst::new();
        w.push(f64::NAN, 0.0, Complex64::default());
        assert!(!w.report("x", 1.0, String::new()).pass);
    }

    #[test]
    fn commuting_family_matches_fundamental_solution() {
        let spec = FamilySpec::LinDepCommuting {
            r: ScalarPath::linear(0.4, 0.0),
            k0: 0.9,
        };
        let b = commuting_generator(&spec).unwrap();
        let r = check_matrix_lemma(&b, 2.0, &QuadratureConfig::default()).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn each_negative_control_fails() {
        for nc in negative_controls().unwrap() {
            assert_eq!(nc.report.name, nc.check);
            assert!(!nc.report.pass, "{}: {:?}", nc.description, nc.report);
        }
    }
}
