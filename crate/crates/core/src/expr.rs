//! Closed-form analytic expressions in one complex variable.
//!
//! Expressions are immutable trees shared through `Arc`, so derivatives can
//! reuse subtrees freely. Constructors fold constants and nothing more.

use crate::error::{FlowError, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

const POLE_EPS: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(Complex64),
    Identity,
    /// `a * exp(k z)`
    ExpLinear {
        a: Complex64,
        k: Complex64,
    },
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Scale(Complex64, Expr),
    Power(Expr, i32),
    /// `(m w + n) / (s w + d)` with `w` the inner value
    Mobius {
        m: Complex64,
        n: Complex64,
        s: Complex64,
        d: Complex64,
        inner: Expr,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExprJson", into = "ExprJson")]
pub struct Expr(Arc<Node>);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl Expr {
    fn wrap(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(v: Complex64) -> Self {
        Self::wrap(Node::Const(v))
    }

    pub fn real(v: f64) -> Self {
        Self::constant(c(v))
    }

    pub fn identity() -> Self {
        Self::wrap(Node::Identity)
    }

    pub fn exp_linear(a: Complex64, k: Complex64) -> Self {
        if a == Complex64::new(0.0, 0.0) || k == Complex64::new(0.0, 0.0) {
            return Self::constant(a);
        }
        Self::wrap(Node::ExpLinear { a, k })
    }

    pub fn as_const(&self) -> Option<Complex64> {
        match self.node() {
            Node::Const(v) => Some(*v),
            _ => None,
        }
    }

    pub fn sum(terms: Vec<Expr>) -> Self {
        let mut acc = c(0.0);
        let mut rest = Vec::new();
        for t in terms {
            match t.node() {
                Node::Const(v) => acc += v,
                Node::Sum(inner) => {
                    for u in inner {
                        match u.node() {
                            Node::Const(v) => acc += v,
                            _ => rest.push(u.clone()),
                        }
                    }
                }
                _ => rest.push(t),
            }
        }
        if acc != c(0.0) {
            rest.push(Self::constant(acc));
        }
        match rest.len() {
            0 => Self::constant(c(0.0)),
            1 => rest.pop().unwrap(),
            _ => Self::wrap(Node::Sum(rest)),
        }
    }

    pub fn product(factors: Vec<Expr>) -> Self {
        let mut scalar = c(1.0);
        let mut rest = Vec::new();
        for f in factors {
            match f.node() {
                Node::Const(v) => scalar *= v,
                Node::Scale(k, inner) => {
                    scalar *= k;
                    rest.push(inner.clone());
                }
                Node::Product(inner) => rest.extend(inner.iter().cloned()),
                _ => rest.push(f),
            }
        }
        if scalar == c(0.0) {
            return Self::constant(scalar);
        }
        let core = match rest.len() {
            0 => return Self::constant(scalar),
            1 => rest.pop().unwrap(),
            _ => Self::wrap(Node::Product(rest)),
        };
        Self::scale(scalar, core)
    }

    pub fn scale(k: Complex64, inner: Expr) -> Self {
        if k == c(1.0) {
            return inner;
        }
        if k == c(0.0) {
            return Self::constant(k);
        }
        match inner.node() {
            Node::Const(v) => Self::constant(k * v),
            Node::Scale(k2, e) => Self::scale(k * k2, e.clone()),
            Node::ExpLinear { a, k: kk } => Self::exp_linear(k * a, *kk),
            _ => Self::wrap(Node::Scale(k, inner)),
        }
    }

    pub fn power(inner: Expr, n: i32) -> Self {
        match n {
            0 => Self::real(1.0),
            1 => inner,
            _ => match inner.node() {
                Node::Const(v) if n > 0 || *v != c(0.0) => Self::constant(v.powi(n)),
                _ => Self::wrap(Node::Power(inner, n)),
            },
        }
    }

    /// Möbius image of `inner`; rejects a singular coefficient matrix.
    pub fn mobius(
        m: Complex64,
        n: Complex64,
        s: Complex64,
        d: Complex64,
        inner: Expr,
    ) -> Result<Self> {
        let det = m * d - n * s;
        if det.norm() < POLE_EPS {
            return Err(FlowError::invalid("mobius", "m*d - n*s must be non-zero"));
        }
        Ok(Self::wrap(Node::Mobius { m, n, s, d, inner }))
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let v = self.eval_raw(z)?;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(FlowError::non_finite("expression value"));
        }
        Ok(v)
    }

    fn eval_raw(&self, z: Complex64) -> Result<Complex64> {
        Ok(match self.node() {
            Node::Const(v) => *v,
            Node::Identity => z,
            Node::ExpLinear { a, k } => a * (k * z).exp(),
            Node::Sum(ts) => {
                let mut acc = c(0.0);
                for t in ts {
                    acc += t.eval_raw(z)?;
                }
                acc
            }
            Node::Product(fs) => {
                let mut acc = c(1.0);
                for f in fs {
                    acc *= f.eval_raw(z)?;
                }
                acc
            }
            Node::Scale(k, e) => k * e.eval_raw(z)?,
            Node::Power(e, n) => {
                let w = e.eval_raw(z)?;
                if *n < 0 && w.norm() < POLE_EPS {
                    return Err(FlowError::PoleHit { modulus: w.norm() });
                }
                w.powi(*n)
            }
            Node::Mobius { m, n, s, d, inner } => {
                let w = inner.eval_raw(z)?;
                let den = s * w + d;
                if den.norm() < POLE_EPS {
                    return Err(FlowError::PoleHit {
                        modulus: den.norm(),
                    });
                }
                (m * w + n) / den
            }
        })
    }

    pub fn derivative(&self) -> Expr {
        match self.node() {
            Node::Const(_) => Self::real(0.0),
            Node::Identity => Self::real(1.0),
            Node::ExpLinear { a, k } => Self::exp_linear(a * k, *k),
            Node::Sum(ts) => Self::sum(ts.iter().map(Expr::derivative).collect()),
            Node::Product(fs) => {
                let terms = (0..fs.len())
                    .map(|i| {
                        let mut factors: Vec<Expr> = fs.clone();
                        factors[i] = fs[i].derivative();
                        Self::product(factors)
                    })
                    .collect();
                Self::sum(terms)
            }
            Node::Scale(k, e) => Self::scale(*k, e.derivative()),
            Node::Power(e, n) => Self::scale(
                c(*n as f64),
                Self::product(vec![Self::power(e.clone(), n - 1), e.derivative()]),
            ),
            Node::Mobius { m, n, s, d, inner } => {
                let det = m * d - n * s;
                if *s == c(0.0) {
                    return Self::scale(det / (d * d), inner.derivative());
                }
                // (sw + d)^-2 as the Möbius map w -> 1 / (sw + d), squared
                let recip = Self::wrap(Node::Mobius {
                    m: c(0.0),
                    n: c(1.0),
                    s: *s,
                    d: *d,
                    inner: inner.clone(),
                });
                Self::scale(
                    det,
                    Self::product(vec![inner.derivative(), Self::power(recip, 2)]),
                )
            }
        }
    }

    pub fn nth_derivative(&self, order: usize) -> Expr {
        (0..order).fold(self.clone(), |e, _| e.derivative())
    }

    /// Antiderivative normalised to vanish at the origin.
    ///
    /// Defined on the exponential-polynomial class (sums and products of
    /// constants, powers of the identity and linear exponentials).
    pub fn antiderivative(&self) -> Result<Expr> {
        let terms = ExpPoly::from_expr(self)?;
        let mut out = Vec::new();
        let mut at_zero = c(0.0);
        for t in terms.integrate().0 {
            if t.n == 0 {
                at_zero += t.c;
            }
            out.push(t.to_expr());
        }
        out.push(Self::constant(-at_zero));
        Ok(Self::sum(out))
    }
}

/// Finite-difference check of the Cauchy-Riemann equations at `z`.
pub fn cauchy_riemann_residual(expr: &Expr, z: Complex64, h: f64) -> Result<f64> {
    let ih = Complex64::new(0.0, h);
    let dx = (expr.eval(z + h)? - expr.eval(z - h)?) / (2.0 * h);
    let dy = (expr.eval(z + ih)? - expr.eval(z - ih)?) / (2.0 * h);
    // analytic means d/dy = i d/dx
    Ok((dy - Complex64::i() * dx).norm())
}

#[derive(Debug, Clone, Copy)]
struct Term {
    c: Complex64,
    k: Complex64,
    n: u32,
}

impl Term {
    fn to_expr(self) -> Expr {
        let z_n = Expr::power(Expr::identity(), self.n as i32);
        if self.k == c(0.0) {
            Expr::scale(self.c, z_n)
        } else if self.n == 0 {
            Expr::exp_linear(self.c, self.k)
        } else {
            Expr::product(vec![z_n, Expr::exp_linear(self.c, self.k)])
        }
    }
}

/// Sum of `c z^n exp(k z)` terms.
struct ExpPoly(Vec<Term>);

impl ExpPoly {
    fn single(c_: Complex64, k: Complex64, n: u32) -> Self {
        ExpPoly(vec![Term { c: c_, k, n }])
    }

    fn push(&mut self, t: Term) {
        if let Some(e) = self.0.iter_mut().find(|e| e.k == t.k && e.n == t.n) {
            e.c += t.c;
        } else {
            self.0.push(t);
        }
    }

    fn mul(&self, other: &ExpPoly) -> ExpPoly {
        let mut out = ExpPoly(Vec::new());
        for a in &self.0 {
            for b in &other.0 {
                out.push(Term {
                    c: a.c * b.c,
                    k: a.k + b.k,
                    n: a.n + b.n,
                });
            }
        }
        out
    }

    fn from_expr(e: &Expr) -> Result<ExpPoly> {
        Ok(match e.node() {
            Node::Const(v) => Self::single(*v, c(0.0), 0),
            Node::Identity => Self::single(c(1.0), c(0.0), 1),
            Node::ExpLinear { a, k } => Self::single(*a, *k, 0),
            Node::Sum(ts) => {
                let mut out = ExpPoly(Vec::new());
                for t in ts {
                    for term in Self::from_expr(t)?.0 {
                        out.push(term);
                    }
                }
                out
            }
            Node::Product(fs) => {
                let mut out = Self::single(c(1.0), c(0.0), 0);
                for f in fs {
                    let p = Self::from_expr(f)
                        .map_err(|_| FlowError::NotClosedForm { node: "product" })?;
                    out = out.mul(&p);
                }
                out
            }
            Node::Scale(k, inner) => {
                let mut p = Self::from_expr(inner)?;
                p.0.iter_mut().for_each(|t| t.c *= k);
                p
            }
            Node::Power(inner, n) => {
                if *n < 0 {
                    return Err(FlowError::NotClosedForm { node: "power" });
                }
                let base = Self::from_expr(inner)?;
                let mut out = Self::single(c(1.0), c(0.0), 0);
                for _ in 0..*n {
                    out = out.mul(&base);
                }
                out
            }
            Node::Mobius { .. } => return Err(FlowError::NotClosedForm { node: "mobius" }),
        })
    }

    fn integrate(&self) -> ExpPoly {
        let mut out = ExpPoly(Vec::new());
        for t in &self.0 {
            if t.k == c(0.0) {
                out.push(Term {
                    c: t.c / (t.n as f64 + 1.0),
                    k: t.k,
                    n: t.n + 1,
                });
                continue;
            }
            // repeated integration by parts
            let mut coef = t.c / t.k;
            for j in 0..=t.n {
                out.push(Term {
                    c: coef,
                    k: t.k,
                    n: t.n - j,
                });
                coef *= -((t.n - j) as f64) / t.k;
            }
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ExprJson {
    ExpLinear {
        #[serde(rename = "A", with = "crate::cjson")]
        a: Complex64,
        #[serde(with = "crate::cjson")]
        k: Complex64,
    },
    Const {
        #[serde(with = "crate::cjson")]
        c: Complex64,
    },
    Sum {
        terms: Vec<Expr>,
    },
    Scale {
        #[serde(with = "crate::cjson")]
        c: Complex64,
        inner: Expr,
    },
    Product {
        factors: Vec<Expr>,
    },
    Power {
        n: i32,
        inner: Expr,
    },
    Mobius {
        #[serde(with = "crate::cjson")]
        m: Complex64,
        #[serde(with = "crate::cjson")]
        n: Complex64,
        #[serde(with = "crate::cjson")]
        s: Complex64,
        #[serde(with = "crate::cjson")]
        d: Complex64,
        inner: Expr,
    },
    Identity,
}

impl TryFrom<ExprJson> for Expr {
    type Error = FlowError;

    fn try_from(j: ExprJson) -> Result<Expr> {
        // JSON input keeps the tree as written; only validation happens here
        Ok(match j {
            ExprJson::ExpLinear { a, k } => Expr::wrap(Node::ExpLinear { a, k }),
            ExprJson::Const { c } => Expr::constant(c),
            ExprJson::Sum { terms } => Expr::wrap(Node::Sum(terms)),
            ExprJson::Scale { c, inner } => Expr::wrap(Node::Scale(c, inner)),
            ExprJson::Product { factors } => Expr::wrap(Node::Product(factors)),
            ExprJson::Power { n, inner } => Expr::wrap(Node::Power(inner, n)),
            ExprJson::Mobius { m, n, s, d, inner } => Expr::mobius(m, n, s, d, inner)?,
            ExprJson::Identity => Expr::identity(),
        })
    }
}

impl From<Expr> for ExprJson {
    fn from(e: Expr) -> ExprJson {
        match e.node().clone() {
            Node::Const(c) => ExprJson::Const { c },
            Node::Identity => ExprJson::Identity,
            Node::ExpLinear { a, k } => ExprJson::ExpLinear { a, k },
            Node::Sum(terms) => ExprJson::Sum { terms },
            Node::Product(factors) => ExprJson::Product { factors },
            Node::Scale(c, inner) => ExprJson::Scale { c, inner },
            Node::Power(inner, n) => ExprJson::Power { n, inner },
            Node::Mobius { m, n, s, d, inner } => ExprJson::Mobius { m, n, s, d, inner },
        }
    }
}
