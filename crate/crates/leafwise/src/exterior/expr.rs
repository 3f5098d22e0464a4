//! Scalar expressions over chart coordinates.
//!
//! A [`ScalarField`](super::chart::ScalarField) is backed by an immutable expression tree that can be
//! evaluated at any [`Real`] scalar type. Evaluating a `Partial` node lifts
//! the point into dual numbers over the current scalar, which is how the
//! exterior derivative obtains exact partials and why towers of derivatives
//! work without any symbolic differentiation.

use std::fmt;
use std::sync::Arc;

use smallvec::SmallVec;

use super::dual::{smooth_step, Dual, Real};

pub const MAX_DIM: usize = 8;

type PointBuf<S> = SmallVec<[S; MAX_DIM]>;

#[derive(Debug)]
pub enum Expr {
    Const(f64),
    Coord(usize),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    Neg(Arc<Expr>),
    Exp(Arc<Expr>),
    Ln(Arc<Expr>),
    Sin(Arc<Expr>),
    Cos(Arc<Expr>),
    Sqrt(Arc<Expr>),
    Powi(Arc<Expr>, i32),
    Atan2(Arc<Expr>, Arc<Expr>),
    /// The smooth bump primitive of [`smooth_step`].
    Step(Arc<Expr>),
    /// Exact partial ∂/∂coord of the inner expression, by one dual pass.
    Partial(Arc<Expr>, usize),
    /// Evaluate the first expression at the point given by the component
    /// expressions. Keeps pullbacks lazy, so `Partial` keeps its meaning
    /// and the chain rule is handled by the dual pass of the outer node.
    Compose(Arc<Expr>, Arc<Vec<Arc<Expr>>>),
}

pub fn eval<S: Real>(e: &Expr, p: &[S]) -> S {
    match e {
        Expr::Const(c) => S::from_f64(*c),
        Expr::Coord(i) => p[*i],
        Expr::Add(a, b) => eval(a, p) + eval(b, p),
        Expr::Sub(a, b) => eval(a, p) - eval(b, p),
        Expr::Mul(a, b) => eval(a, p) * eval(b, p),
        Expr::Div(a, b) => eval(a, p) / eval(b, p),
        Expr::Neg(a) => -eval(a, p),
        Expr::Exp(a) => eval(a, p).exp(),
        Expr::Ln(a) => eval(a, p).ln(),
        Expr::Sin(a) => eval(a, p).sin(),
        Expr::Cos(a) => eval(a, p).cos(),
        Expr::Sqrt(a) => eval(a, p).sqrt(),
        Expr::Powi(a, n) => eval(a, p).powi(*n),
        Expr::Atan2(y, x) => eval(y, p).atan2(eval(x, p)),
        Expr::Step(a) => smooth_step(eval(a, p)),
        Expr::Partial(f, i) => {
            let lifted: PointBuf<S::Lifted> = p
                .iter()
                .enumerate()
                .map(|(j, &x)| if j == *i { x.lift_var() } else { x.lift_const() })
                .collect();
            S::lower_eps(eval(f, &lifted))
        }
        Expr::Compose(f, comps) => {
            let q: PointBuf<S> = comps.iter().map(|c| eval(c, p)).collect();
            eval(f, &q)
        }
    }
}

fn as_const(e: &Expr) -> Option<f64> {
    match e {
        Expr::Const(c) => Some(*c),
        _ => None,
    }
}

/// Reference-counted expression with light peephole simplification in the
/// constructors. Simplification only drops exact algebraic identities
/// (x+0, x·1, x·0), so it never changes evaluated values.
#[derive(Clone)]
pub struct Field(pub Arc<Expr>);

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field({:?})", self.0)
    }
}

impl Field {
    pub fn constant(c: f64) -> Field {
        Field(Arc::new(Expr::Const(c)))
    }

    pub fn zero() -> Field {
        Field::constant(0.0)
    }

    pub fn one() -> Field {
        Field::constant(1.0)
    }

    pub fn coord(i: usize) -> Field {
        Field(Arc::new(Expr::Coord(i)))
    }

    pub fn is_zero_const(&self) -> bool {
        matches!(&*self.0, Expr::Const(c) if *c == 0.0)
    }

    pub fn add(&self, o: &Field) -> Field {
        match (as_const(&self.0), as_const(&o.0)) {
            (Some(a), Some(b)) => Field::constant(a + b),
            (Some(0.0), _) => o.clone(),
            (_, Some(0.0)) => self.clone(),
            _ => Field(Arc::new(Expr::Add(self.0.clone(), o.0.clone()))),
        }
    }

    pub fn sub(&self, o: &Field) -> Field {
        match (as_const(&self.0), as_const(&o.0)) {
            (Some(a), Some(b)) => Field::constant(a - b),
            (_, Some(0.0)) => self.clone(),
            _ => Field(Arc::new(Expr::Sub(self.0.clone(), o.0.clone()))),
        }
    }

    pub fn mul(&self, o: &Field) -> Field {
        match (as_const(&self.0), as_const(&o.0)) {
            (Some(a), Some(b)) => Field::constant(a * b),
            (Some(0.0), _) | (_, Some(0.0)) => Field::zero(),
            (Some(1.0), _) => o.clone(),
            (_, Some(1.0)) => self.clone(),
            _ => Field(Arc::new(Expr::Mul(self.0.clone(), o.0.clone()))),
        }
    }

    pub fn div(&self, o: &Field) -> Field {
        match (as_const(&self.0), as_const(&o.0)) {
            (Some(a), Some(b)) if b != 0.0 => Field::constant(a / b),
            (Some(0.0), _) => Field::zero(),
            (_, Some(1.0)) => self.clone(),
            _ => Field(Arc::new(Expr::Div(self.0.clone(), o.0.clone()))),
        }
    }

    pub fn neg(&self) -> Field {
        match as_const(&self.0) {
            Some(c) => Field::constant(-c),
            None => Field(Arc::new(Expr::Neg(self.0.clone()))),
        }
    }

    pub fn scale(&self, c: f64) -> Field {
        self.mul(&Field::constant(c))
    }

    pub fn exp(&self) -> Field {
        Field(Arc::new(Expr::Exp(self.0.clone())))
    }

    pub fn ln(&self) -> Field {
        Field(Arc::new(Expr::Ln(self.0.clone())))
    }

    pub fn sin(&self) -> Field {
        Field(Arc::new(Expr::Sin(self.0.clone())))
    }

    pub fn cos(&self) -> Field {
        Field(Arc::new(Expr::Cos(self.0.clone())))
    }

    pub fn sqrt(&self) -> Field {
        Field(Arc::new(Expr::Sqrt(self.0.clone())))
    }

    pub fn powi(&self, n: i32) -> Field {
        Field(Arc::new(Expr::Powi(self.0.clone(), n)))
    }

    pub fn atan2(&self, x: &Field) -> Field {
        Field(Arc::new(Expr::Atan2(self.0.clone(), x.0.clone())))
    }

    pub fn step(&self) -> Field {
        Field(Arc::new(Expr::Step(self.0.clone())))
    }

    pub fn partial(&self, i: usize) -> Field {
        match &*self.0 {
            Expr::Const(_) => Field::zero(),
            Expr::Coord(c) => Field::constant(if *c == i { 1.0 } else { 0.0 }),
            _ => Field(Arc::new(Expr::Partial(self.0.clone(), i))),
        }
    }

    /// Precompose with the component expressions of a chart map.
    pub fn compose(&self, comps: &Arc<Vec<Arc<Expr>>>) -> Field {
        if as_const(&self.0).is_some() {
            return self.clone();
        }
        Field(Arc::new(Expr::Compose(self.0.clone(), comps.clone())))
    }

    pub fn eval<S: Real>(&self, p: &[S]) -> S {
        eval(&self.0, p)
    }

    pub fn eval_f64(&self, p: &[f64]) -> f64 {
        eval(&self.0, p)
    }

    /// Value and exact partial in direction `i`, one dual pass.
    pub fn eval_with_partial(&self, p: &[f64], i: usize) -> (f64, f64) {
        let lifted: PointBuf<Dual<f64>> = p
            .iter()
            .enumerate()
            .map(|(j, &x)| {
                if j == i {
                    Dual::variable(x)
                } else {
                    Dual::constant(x)
                }
            })
            .collect();
        let r = eval(&self.0, &lifted);
        (r.re, r.eps)
    }
}
