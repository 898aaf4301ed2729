//! Lagrangian kinematics of a labelled flow `x + iy = F(t, z) + conj(G(t, z))`.

use crate::engine::{integrate, Mat2C, QuadratureConfig};
use crate::error::{FlowError, Result};
use crate::expr::Expr;
use crate::families::{check_proportional, CoefficientPath, FamilySpec, Structure};
use crate::harmonic::HarmonicMap;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelGrid {
    pub a_min: f64,
    pub a_max: f64,
    pub b_min: f64,
    pub b_max: f64,
    pub na: usize,
    pub nb: usize,
}

impl LabelGrid {
    pub fn validate(&self) -> Result<()> {
        if self.na < 2 || self.nb < 2 {
            return Err(FlowError::invalid(
                "grid.na, grid.nb",
                "need at least 2 points per axis",
            ));
        }
        let finite = [self.a_min, self.a_max, self.b_min, self.b_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.a_min >= self.a_max {
            return Err(FlowError::invalid(
                "grid.a_min, grid.a_max",
                "need finite a_min < a_max",
            ));
        }
        if self.b_min >= self.b_max {
            return Err(FlowError::invalid(
                "grid.b_min, grid.b_max",
                "need finite b_min < b_max",
            ));
        }
        Ok(())
    }

    pub fn with_size(&self, na: usize, nb: usize) -> LabelGrid {
        LabelGrid { na, nb, ..*self }
    }

    /// Labels in row-major order: `b` outer, `a` inner.
    pub fn points(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.na * self.nb);
        for j in 0..self.nb {
            let b = self.b_min + (self.b_max - self.b_min) * j as f64 / (self.nb - 1) as f64;
            for i in 0..self.na {
                let a = self.a_min + (self.a_max - self.a_min) * i as f64 / (self.na - 1) as f64;
                out.push(Complex64::new(a, b));
            }
        }
        out
    }
}

/// Deliberate defects used as negative controls for the verification suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Corruption {
    /// `beta -> factor * beta`
    ScaleBeta { factor: f64 },
    /// `beta -> (1 + rate t) beta`
    RampBeta { rate: f64 },
    /// `gamma -> gamma + rate t`
    OffsetGamma { rate: f64 },
    /// adds `eps t z f0(z)` to `f`
    Drift { eps: f64 },
}

impl Corruption {
    fn apply(&self, cp: &CoefficientPath) -> CoefficientPath {
        let mut out = *cp;
        match *self {
            Corruption::ScaleBeta { factor } => {
                out.beta *= factor;
                out.beta_t *= factor;
            }
            Corruption::RampBeta { rate } => {
                out.beta = cp.beta * (1.0 + rate * cp.t);
                out.beta_t = cp.beta_t * (1.0 + rate * cp.t) + cp.beta * rate;
            }
            Corruption::OffsetGamma { rate } => {
                out.gamma += rate * cp.t;
                out.gamma_t += rate;
            }
            Corruption::Drift { .. } => {}
        }
        out
    }
}

/// Antiderivative of an initial derivative, closed-form when available.
#[derive(Debug, Clone)]
enum Potential {
    Closed(Expr),
    Path(Expr),
}

impl Potential {
    fn new(derivative: &Expr) -> Potential {
        match derivative.antiderivative() {
            Ok(e) => Potential::Closed(e),
            Err(_) => Potential::Path(derivative.clone()),
        }
    }

    fn eval(&self, z: Complex64, cfg: &QuadratureConfig) -> Result<Complex64> {
        match self {
            Potential::Closed(e) => e.eval(z),
            Potential::Path(f) => path_integral(f, z, cfg),
        }
    }
}

/// `int_0^z f` along the straight segment from the origin.
pub fn path_integral(f: &Expr, z: Complex64, cfg: &QuadratureConfig) -> Result<Complex64> {
    let err = std::cell::RefCell::new(None);
    let v = integrate(
        |s| match f.eval(s * z) {
            Ok(w) => w * z,
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                Complex64::new(f64::NAN, 0.0)
            }
        },
        0.0,
        1.0,
        cfg,
    );
    match (v, err.into_inner()) {
        (_, Some(e)) => Err(e),
        (v, None) => v,
    }
}

/// A flow fixed by a family, an initial pair and a label domain.
#[derive(Debug, Clone)]
pub struct LabeledFlow {
    spec: FamilySpec,
    f0: Expr,
    g0: Expr,
    big_f0: Potential,
    big_g0: Potential,
    domain: LabelGrid,
    quadrature: QuadratureConfig,
    corruption: Option<Corruption>,
    drift: Option<(Expr, Potential)>,
}

impl LabeledFlow {
    pub fn new(spec: FamilySpec, f0: Expr, g0: Expr, domain: LabelGrid) -> Result<Self> {
        spec.validate()?;
        domain.validate()?;
        for z in domain.points() {
            let (a, b) = (f0.eval(z)?, g0.eval(z)?);
            if let Structure::Proportional { lambda } = spec.structure() {
                check_proportional(a, b, lambda, z)?;
            }
            if a.norm_sqr() - b.norm_sqr() <= 0.0 {
                return Err(FlowError::SensePreservationViolated { a: z.re, b: z.im });
            }
        }
        Ok(LabeledFlow {
            big_f0: Potential::new(&f0),
            big_g0: Potential::new(&g0),
            spec,
            f0,
            g0,
            domain,
            quadrature: QuadratureConfig::default(),
            corruption: None,
            drift: None,
        })
    }

    pub fn with_corruption(mut self, c: Corruption) -> Self {
        self.drift = match c {
            Corruption::Drift { .. } => {
                let zf0 = Expr::product(vec![Expr::identity(), self.f0.clone()]);
                let pot = Potential::new(&zf0);
                Some((zf0, pot))
            }
            _ => None,
        };
        self.corruption = Some(c);
        self
    }

    pub fn with_quadrature(mut self, q: QuadratureConfig) -> Self {
        self.quadrature = q;
        self
    }

    pub fn with_domain(mut self, domain: LabelGrid) -> Self {
        self.domain = domain;
        self
    }

    pub fn spec(&self) -> &FamilySpec {
        &self.spec
    }

    pub fn f0(&self) -> &Expr {
        &self.f0
    }

    pub fn g0(&self) -> &Expr {
        &self.g0
    }

    pub fn domain(&self) -> &LabelGrid {
        &self.domain
    }

    pub fn corruption(&self) -> Option<Corruption> {
        self.corruption
    }

    /// Jacobian of the initial map, `|f0|^2 - |g0|^2`.
    pub fn reference_jacobian(&self, z: Complex64) -> Result<f64> {
        Ok(self.f0.eval(z)?.norm_sqr() - self.g0.eval(z)?.norm_sqr())
    }

    /// Evaluates the time-dependent coefficients once for time `t`.
    pub fn at(&self, t: f64) -> Result<Snapshot<'_>> {
        let clean = self.spec.coefficients(t, &self.quadrature)?;
        let used = match &self.corruption {
            Some(c) => c.apply(&clean),
            None => clean,
        };
        let (m, m_t) = used.mixing();
        Ok(Snapshot {
            flow: self,
            t,
            clean,
            used,
            m,
            m_t,
        })
    }
}

/// Everything needed to evaluate the flow at one time.
#[derive(Debug, Clone)]
pub struct Snapshot<'a> {
    flow: &'a LabeledFlow,
    pub t: f64,
    /// coefficients as the family defines them
    pub clean: CoefficientPath,
    /// coefficients actually driving the flow (differs under corruption)
    pub used: CoefficientPath,
    m: Mat2C,
    m_t: Mat2C,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSample {
    pub t: f64,
    pub a: f64,
    pub b: f64,
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub v: f64,
    pub jacobian: f64,
    pub omega: f64,
    pub k: f64,
    /// imaginary part of `-i (f_t conj f - conj(g_t) g)`; zero on a genuine flow
    pub k_imag: f64,
}

impl Snapshot<'_> {
    fn drift_eps(&self) -> Option<f64> {
        match self.flow.corruption {
            Some(Corruption::Drift { eps }) => Some(eps),
            _ => None,
        }
    }

    /// `[f, g, f_t, g_t]` at label `z`.
    pub fn fg(&self, z: Complex64) -> Result<[Complex64; 4]> {
        let v = [self.flow.f0.eval(z)?, self.flow.g0.eval(z)?];
        let [mut f, g] = self.m.apply(v);
        let [mut f_t, g_t] = self.m_t.apply(v);
        if let Some(eps) = self.drift_eps() {
            let w = z * v[0] * eps;
            f += w * self.t;
            f_t += w;
        }
        Ok([f, g, f_t, g_t])
    }

    fn potentials(&self, z: Complex64) -> Result<[Complex64; 2]> {
        let q = &self.flow.quadrature;
        Ok([self.flow.big_f0.eval(z, q)?, self.flow.big_g0.eval(z, q)?])
    }

    fn drift_potential(&self, z: Complex64) -> Result<Complex64> {
        match &self.flow.drift {
            Some((_, p)) => p.eval(z, &self.flow.quadrature),
            None => Ok(Complex64::default()),
        }
    }

    /// `x + iy`
    pub fn position(&self, z: Complex64) -> Result<Complex64> {
        let [big_f, big_g] = self.m.apply(self.potentials(z)?);
        let mut p = big_f + big_g.conj();
        if let Some(eps) = self.drift_eps() {
            p += eps * self.t * self.drift_potential(z)?;
        }
        Ok(p)
    }

    /// `u + iv`
    pub fn velocity(&self, z: Complex64) -> Result<Complex64> {
        let [big_f, big_g] = self.m_t.apply(self.potentials(z)?);
        let mut v = big_f + big_g.conj();
        if let Some(eps) = self.drift_eps() {
            v += eps * self.drift_potential(z)?;
        }
        Ok(v)
    }

    pub fn jacobian(&self, z: Complex64) -> Result<f64> {
        let [f, g, ..] = self.fg(z)?;
        Ok(f.norm_sqr() - g.norm_sqr())
    }

    /// `f_t conj(f) - conj(g_t) g`, which equals `iK` on a genuine flow.
    pub fn key_lhs(&self, z: Complex64) -> Result<Complex64> {
        let [f, g, f_t, g_t] = self.fg(z)?;
        Ok(f_t * f.conj() - g_t.conj() * g)
    }

    /// `K` as the family predicts it, from the uncorrupted coefficients.
    pub fn expected_k(&self, z: Complex64) -> Result<Complex64> {
        Ok(self
            .clean
            .expected_k(self.flow.f0.eval(z)?, self.flow.g0.eval(z)?))
    }

    pub fn vorticity(&self, z: Complex64) -> Result<f64> {
        let [f, g, f_t, g_t] = self.fg(z)?;
        Ok(vorticity_from(f, g, f_t, g_t))
    }

    pub fn sample(&self, z: Complex64) -> Result<FlowSample> {
        let [f, g, f_t, g_t] = self.fg(z)?;
        let p = self.position(z)?;
        let v = self.velocity(z)?;
        let k = -Complex64::i() * (f_t * f.conj() - g_t.conj() * g);
        Ok(FlowSample {
            t: self.t,
            a: z.re,
            b: z.im,
            x: p.re,
            y: p.im,
            u: v.re,
            v: v.im,
            jacobian: f.norm_sqr() - g.norm_sqr(),
            omega: vorticity_from(f, g, f_t, g_t),
            k: k.re,
            k_imag: k.im,
        })
    }

    /// Harmonic map `z -> x + iy` frozen at this time.
    pub fn harmonic_map(&self) -> HarmonicMap {
        let (f0, g0) = (&self.flow.f0, &self.flow.g0);
        let m = self.m.m;
        let mut f = Expr::sum(vec![
            Expr::scale(m[0][0], f0.clone()),
            Expr::scale(m[0][1], g0.clone()),
        ]);
        let g = Expr::sum(vec![
            Expr::scale(m[1][0], f0.clone()),
            Expr::scale(m[1][1], g0.clone()),
        ]);
        if let (Some(eps), Some((zf0, _))) = (self.drift_eps(), &self.flow.drift) {
            f = Expr::sum(vec![
                f,
                Expr::scale(Complex64::new(eps * self.t, 0.0), zf0.clone()),
            ]);
        }
        HarmonicMap::from_derivatives(f, g)
    }
}

/// Vorticity from the Lagrangian partials `x_a + i y_a = f + conj g`,
/// `x_b + i y_b = i (f - conj g)` and their time derivatives.
fn vorticity_from(f: Complex64, g: Complex64, f_t: Complex64, g_t: Complex64) -> f64 {
    let i = Complex64::i();
    let xa = f + g.conj();
    let xb = i * (f - g.conj());
    let xat = f_t + g_t.conj();
    let xbt = i * (f_t - g_t.conj());
    let num = xat.im * xb.im - xbt.im * xa.im + xat.re * xb.re - xbt.re * xa.re;
    num / (f.norm_sqr() - g.norm_sqr())
}

pub fn position(flow: &LabeledFlow, t: f64, z: Complex64) -> Result<Complex64> {
    flow.at(t)?.position(z)
}

pub fn velocity(flow: &LabeledFlow, t: f64, z: Complex64) -> Result<Complex64> {
    flow.at(t)?.velocity(z)
}

pub fn jacobian(flow: &LabeledFlow, t: f64, z: Complex64) -> Result<f64> {
    flow.at(t)?.jacobian(z)
}

pub fn vorticity(flow: &LabeledFlow, t: f64, z: Complex64) -> Result<f64> {
    flow.at(t)?.vorticity(z)
}

/// `(2 / J) dK/dt` by central differences in time.
pub fn theta_x(flow: &LabeledFlow, t: f64, z: Complex64, dt: f64) -> Result<f64> {
    let k_at = |s: f64| -> Result<f64> { Ok(flow.at(s)?.sample(z)?.k) };
    let dk = (k_at(t + dt)? - k_at(t - dt)?) / (2.0 * dt);
    Ok(2.0 * dk / flow.at(t)?.jacobian(z)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub label: Complex64,
    pub samples: Vec<FlowSample>,
    /// max distance between RK4-integrated velocity and closed-form positions
    pub replay_residual: f64,
}

/// Closed-form positions of one particle plus an RK4 replay of its velocity.
pub fn trajectory(
    flow: &LabeledFlow,
    z0: Complex64,
    times: &[f64],
    replay_steps: usize,
) -> Result<Trajectory> {
    let samples = times
        .iter()
        .map(|&t| flow.at(t)?.sample(z0))
        .collect::<Result<Vec<_>>>()?;
    let mut residual = 0.0f64;
    if times.len() >= 2 && replay_steps > 0 {
        let span = times[times.len() - 1] - times[0];
        let vel = |t: f64| -> Result<Complex64> { flow.at(t)?.velocity(z0) };
        let mut x = Complex64::new(samples[0].x, samples[0].y);
        for (w, s) in times.windows(2).zip(&samples[1..]) {
            let n = ((replay_steps as f64 * (w[1] - w[0]) / span).round() as usize).max(1);
            let h = (w[1] - w[0]) / n as f64;
            for k in 0..n {
                let t = w[0] + k as f64 * h;
                let (k1, k2, k4) = (vel(t)?, vel(t + 0.5 * h)?, vel(t + h)?);
                x += h / 6.0 * (k1 + 4.0 * k2 + k4);
            }
            residual = residual.max((x - Complex64::new(s.x, s.y)).norm());
        }
    }
    Ok(Trajectory {
        label: z0,
        samples,
        replay_residual: residual,
    })
}

/// Samples every label of `grid` at time `t`, row-major.
pub fn grid_sample(flow: &LabeledFlow, grid: &LabelGrid, t: f64) -> Result<Vec<FlowSample>> {
    let snap = flow.at(t)?;
    let out = grid
        .points()
        .par_iter()
        .map(|&z| snap.sample(z))
        .collect::<Result<Vec<_>>>()?;
    if let Some(s) = out.iter().find(|s| s.jacobian <= 0.0) {
        return Err(FlowError::SensePreservationViolated { a: s.a, b: s.b });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::ScalarPath;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn gerstner(k: f64) -> LabeledFlow {
        let w = (k * 9.81f64).sqrt();
        let spec = FamilySpec::General {
            d1: ScalarPath::constant(w),
            d2: ScalarPath::constant(w),
            c4mod: ScalarPath::constant(0.0),
            phi: ScalarPath::constant(0.0),
        };
        let grid = LabelGrid {
            a_min: -3.0,
            a_max: 3.0,
            b_min: -2.0,
            b_max: -0.1,
            na: 4,
            nb: 4,
        };
        LabeledFlow::new(
            spec,
            Expr::real(1.0),
            Expr::exp_linear(c(-1.0), Complex64::new(0.0, -k)),
            grid,
        )
        .unwrap()
    }

    #[test]
    fn gerstner_positions_match_closed_form() {
        let flow = gerstner(1.0);
        let w = 9.81f64.sqrt();
        let z = Complex64::new(0.4, -0.7);
        let t = 0.9;
        let p = position(&flow, t, z).unwrap();
        let want = Complex64::from_polar(1.0, w * t) * z
            + Complex64::from_polar(1.0, -w * t)
                * Complex64::i()
                * ((Complex64::i() * z.conj()).exp() - 1.0);
        assert!((p - want).norm() < 1e-12, "{p} vs {want}");
    }

    #[test]
    fn vorticity_equals_twice_k_over_j() {
        let flow = gerstner(1.0);
        let snap = flow.at(0.6).unwrap();
        let z = Complex64::new(1.1, -0.4);
        let s = snap.sample(z).unwrap();
        assert!((s.omega - 2.0 * s.k / s.jacobian).abs() < 1e-10);
        let w = 9.81f64.sqrt();
        let e = (2.0 * z.im).exp();
        assert!((s.k - w * (1.0 + e)).abs() < 1e-12);
        assert!((s.jacobian - (1.0 - e)).abs() < 1e-12);
    }

    #[test]
    fn velocity_matches_position_difference() {
        let flow = gerstner(1.0);
        let z = Complex64::new(-0.3, -1.0);
        let h = 1e-5;
        let fd = (position(&flow, 0.5 + h, z).unwrap() - position(&flow, 0.5 - h, z).unwrap())
            / (2.0 * h);
        assert!((velocity(&flow, 0.5, z).unwrap() - fd).norm() < 1e-8);
    }

    #[test]
    fn rejects_sense_reversing_domain() {
        let spec = FamilySpec::LinIndepCase1 {
            r: ScalarPath::constant(0.0),
            psi: ScalarPath::constant(0.0),
            h: 0.0,
            d0: 0.0,
        };
        let grid = LabelGrid {
            a_min: 0.0,
            a_max: 1.0,
            b_min: 0.0,
            b_max: 1.0,
            na: 2,
            nb: 2,
        };
        let r = LabeledFlow::new(spec, Expr::real(1.0), Expr::real(2.0), grid);
        assert!(matches!(
            r,
            Err(FlowError::SensePreservationViolated { .. })
        ));
    }

    #[test]
    fn grid_is_row_major() {
        let g = LabelGrid {
            a_min: 0.0,
            a_max: 1.0,
            b_min: 0.0,
            b_max: 2.0,
            na: 2,
            nb: 3,
        };
        let p = g.points();
        assert_eq!(p.len(), 6);
        assert_eq!(p[1], Complex64::new(1.0, 0.0));
        assert_eq!(p[2], Complex64::new(0.0, 1.0));
    }

    #[test]
    fn replay_matches_closed_form() {
        let flow = gerstner(1.0);
        let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.1).collect();
        let tr = trajectory(&flow, Complex64::new(0.2, -0.5), &times, 10_000).unwrap();
        assert_eq!(tr.samples.len(), 11);
        assert!(tr.replay_residual < 1e-6, "{}", tr.replay_residual);
    }

    #[test]
    fn path_quadrature_agrees_with_closed_form() {
        let f = Expr::exp_linear(Complex64::new(0.5, 0.2), Complex64::new(0.3, 1.0));
        let z = Complex64::new(1.2, -0.4);
        let want = f.antiderivative().unwrap().eval(z).unwrap();
        let got = path_integral(&f, z, &QuadratureConfig::default()).unwrap();
        assert!((want - got).norm() < 1e-9);
    }
}
