//! 2x2 complex matrices and the fundamental solution of `X' = D X`.

use super::path::ComplexPath;
use super::quadrature::{integrate, QuadratureConfig};
use crate::error::{FlowError, Result};
use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat2C {
    pub m: [[Complex64; 2]; 2],
}

impl Mat2C {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2C {
            m: [[a, b], [c, d]],
        }
    }

    pub fn identity() -> Self {
        let (o, z) = (Complex64::new(1.0, 0.0), Complex64::default());
        Self::new(o, z, z, o)
    }

    /// `[[0, conj(b)], [b, 0]]`
    pub fn antidiagonal(b: Complex64) -> Self {
        let z = Complex64::default();
        Self::new(z, b.conj(), b, z)
    }

    pub fn scale(&self, k: Complex64) -> Self {
        let m = self.m;
        Self::new(k * m[0][0], k * m[0][1], k * m[1][0], k * m[1][1])
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn max_abs(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    fn as_antidiagonal(&self) -> Option<Complex64> {
        let z = Complex64::default();
        let m = self.m;
        let tol = 1e-15 * (1.0 + self.max_abs());
        if m[0][0] == z && m[1][1] == z && (m[0][1] - m[1][0].conj()).norm() <= tol {
            Some(m[1][0])
        } else {
            None
        }
    }
}

impl Add for Mat2C {
    type Output = Mat2C;
    fn add(self, o: Mat2C) -> Mat2C {
        let (a, b) = (self.m, o.m);
        Mat2C::new(
            a[0][0] + b[0][0],
            a[0][1] + b[0][1],
            a[1][0] + b[1][0],
            a[1][1] + b[1][1],
        )
    }
}

impl Sub for Mat2C {
    type Output = Mat2C;
    fn sub(self, o: Mat2C) -> Mat2C {
        self + o.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for Mat2C {
    type Output = Mat2C;
    fn mul(self, o: Mat2C) -> Mat2C {
        let (a, b) = (self.m, o.m);
        Mat2C::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

/// Matrix exponential. Antidiagonal Hermitian-pattern matrices use the
/// closed form `cosh|b| I + sinh|b|/|b| M`; everything else goes through
/// scaling and squaring around a Taylor core.
pub fn mat2_exp(a: &Mat2C) -> Mat2C {
    if let Some(b) = a.as_antidiagonal() {
        let r = b.norm();
        if r == 0.0 {
            return Mat2C::identity();
        }
        let ch = Complex64::new(r.cosh(), 0.0);
        let k = Complex64::new(r.sinh() / r, 0.0);
        return Mat2C::identity().scale(ch) + a.scale(k);
    }
    let norm = a.max_abs() * 2.0;
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let s = a.scale(Complex64::new(0.5f64.powi(squarings as i32), 0.0));
    let mut term = Mat2C::identity();
    let mut sum = Mat2C::identity();
    for k in 1..=18 {
        term = (term * s).scale(Complex64::new(1.0 / k as f64, 0.0));
        sum = sum + term;
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

pub fn commute_residual(a: &Mat2C, b: &Mat2C) -> f64 {
    (*a * *b - *b * *a).max_abs()
}

/// Outcome of the closed-form fundamental solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fundamental {
    Matrix(Mat2C),
    /// The generator fails to commute with its integral; `residual` is the
    /// largest commutator entry seen.
    NonCommuting {
        residual: f64,
    },
}

const COMMUTE_TOL: f64 = 1e-9;
const COMMUTE_SAMPLES: usize = 16;

/// `exp(int_0^t D)` for `D = [[0, conj B], [B, 0]]`, only when `D(s)`
/// commutes with its integral at every sampled `s` in `(0, t]`.
pub fn fundamental_solution(
    b: &ComplexPath,
    t: f64,
    cfg: &QuadratureConfig,
) -> Result<Fundamental> {
    let mut worst = 0.0f64;
    for j in 1..=COMMUTE_SAMPLES {
        let s = t * j as f64 / COMMUTE_SAMPLES as f64;
        let integral = Mat2C::antidiagonal(integrate(|u| b.value(u), 0.0, s, cfg)?);
        let r = commute_residual(&Mat2C::antidiagonal(b.value(s)), &integral);
        worst = worst.max(r);
    }
    if worst >= COMMUTE_TOL {
        return Ok(Fundamental::NonCommuting { residual: worst });
    }
    Ok(Fundamental::Matrix(exp_of_integral(b, t, cfg)?))
}

/// `exp(int_0^t D)` regardless of commutation.
pub fn exp_of_integral(b: &ComplexPath, t: f64, cfg: &QuadratureConfig) -> Result<Mat2C> {
    let integral = integrate(|u| b.value(u), 0.0, t, cfg)?;
    Ok(mat2_exp(&Mat2C::antidiagonal(integral)))
}

/// Classical RK4 integration of `X' = D X`, `X(0) = I`.
pub fn ode_oracle(b: &ComplexPath, t: f64, steps: usize) -> Result<Mat2C> {
    if steps < 100 {
        return Err(FlowError::invalid(
            "steps",
            "at least 100 steps are required",
        ));
    }
    let d = |s: f64| Mat2C::antidiagonal(b.value(s));
    let h = t / steps as f64;
    let hc = |k: f64| Complex64::new(k, 0.0);
    let mut x = Mat2C::identity();
    for i in 0..steps {
        let s = i as f64 * h;
        let k1 = d(s) * x;
        let k2 = d(s + 0.5 * h) * (x + k1.scale(hc(0.5 * h)));
        let k3 = d(s + 0.5 * h) * (x + k2.scale(hc(0.5 * h)));
        let k4 = d(s + h) * (x + k3.scale(hc(h)));
        x = x + (k1 + k2.scale(hc(2.0)) + k3.scale(hc(2.0)) + k4).scale(hc(h / 6.0));
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::path::ScalarPath;

    fn series_exp(a: &Mat2C) -> Mat2C {
        let mut term = Mat2C::identity();
        let mut sum = Mat2C::identity();
        for k in 1..=30 {
            term = (term * *a).scale(Complex64::new(1.0 / k as f64, 0.0));
            sum = sum + term;
        }
        sum
    }

    #[test]
    fn exp_of_zero_is_identity() {
        assert_eq!(mat2_exp(&Mat2C::default()), Mat2C::identity());
    }

    #[test]
    fn closed_form_matches_series() {
        let a = Mat2C::antidiagonal(Complex64::new(0.6, -0.8));
        assert!((mat2_exp(&a) - series_exp(&a)).max_abs() < 1e-13);
    }

    #[test]
    fn general_exp_matches_series() {
        let a = Mat2C::new(
            Complex64::new(0.3, 0.1),
            Complex64::new(-1.0, 0.4),
            Complex64::new(0.2, 0.0),
            Complex64::new(0.0, -0.7),
        );
        assert!((mat2_exp(&a) - series_exp(&a)).max_abs() < 1e-12);
    }

    #[test]
    fn determinant_is_one_for_traceless() {
        let a = Mat2C::antidiagonal(Complex64::new(1.3, 0.2));
        assert!((mat2_exp(&a).det() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn rk4_requires_steps() {
        let b = ComplexPath::Cartesian {
            re: ScalarPath::constant(0.0),
            im: ScalarPath::constant(0.0),
        };
        assert!(ode_oracle(&b, 1.0, 10).is_err());
    }

    #[test]
    fn constant_direction_commutes() {
        let b = ComplexPath::Polar {
            modulus: ScalarPath::linear(0.8, 0.0),
            phase: ScalarPath::constant(0.4),
        };
        let cfg = QuadratureConfig::default();
        match fundamental_solution(&b, 1.5, &cfg).unwrap() {
            Fundamental::Matrix(x) => {
                assert!((x - ode_oracle(&b, 1.5, 4000).unwrap()).max_abs() < 1e-10);
            }
            other => panic!("expected closed form, got {other:?}"),
        }
    }

    #[test]
    fn rotating_direction_does_not_commute() {
        let b = ComplexPath::Polar {
            modulus: ScalarPath::linear(1.0, 0.0),
            phase: ScalarPath::linear(1.0, 0.0),
        };
        let r = fundamental_solution(&b, 2.0, &QuadratureConfig::default()).unwrap();
        assert!(matches!(r, Fundamental::NonCommuting { residual } if residual > 1e-3));
    }
}
