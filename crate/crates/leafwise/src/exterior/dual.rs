//! Forward-mode dual numbers.
//!
//! All first derivatives in this crate come from a single directional dual
//! pass; finite differences appear only in tests as a cross-check. The
//! scalar abstraction [`Real`] is implemented for `f64` and for a finite
//! tower of `Dual<…>` levels, so duals nest: `Dual<Dual<f64>>` yields
//! exact mixed second partials, which is what the d∘d residual checks
//! evaluate. The tower is capped (five dual layers) to keep the generic
//! recursion finite; `lift_var` panics past the cap.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar arithmetic shared by `f64` and the dual tower.
///
/// `primal()` strips every infinitesimal layer; branch decisions (domain
/// membership, the cut points of the smooth step) are made on the primal
/// value so that a dual evaluation follows exactly the same code path as
/// the plain one. `Lifted` is the scalar with one more infinitesimal
/// layer; it is what a `Partial` node evaluates in.
pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    type Lifted: Real;

    fn from_f64(v: f64) -> Self;
    fn primal(self) -> f64;
    fn lift_const(self) -> Self::Lifted;
    fn lift_var(self) -> Self::Lifted;
    fn lower_eps(l: Self::Lifted) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sqrt(self) -> Self;
    fn atan2(self, other: Self) -> Self;
    fn powi(self, n: i32) -> Self;
}

/// Value plus one infinitesimal part: `re + eps·ε` with `ε² = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<S> {
    pub re: S,
    pub eps: S,
}

impl<S: Real> Dual<S> {
    pub fn new(re: S, eps: S) -> Self {
        Dual { re, eps }
    }

    pub fn constant(re: S) -> Self {
        Dual {
            re,
            eps: S::zero(),
        }
    }

    /// Seed for a coordinate direction: `re + 1·ε`.
    pub fn variable(re: S) -> Self {
        Dual { re, eps: S::one() }
    }
}

impl<S: Real> Add for Dual<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual::new(self.re + o.re, self.eps + o.eps)
    }
}

impl<S: Real> Sub for Dual<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual::new(self.re - o.re, self.eps - o.eps)
    }
}

impl<S: Real> Mul for Dual<S> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Dual::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

impl<S: Real> Div for Dual<S> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = S::one() / o.re;
        Dual::new(self.re * inv, (self.eps - self.re * inv * o.eps) * inv)
    }
}

impl<S: Real> Neg for Dual<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.eps)
    }
}

// Chain rules shared by every tower level.
impl<S: Real> Dual<S> {
    fn m_exp(self) -> Self {
        let e = self.re.exp();
        Dual::new(e, e * self.eps)
    }
    fn m_ln(self) -> Self {
        Dual::new(self.re.ln(), self.eps / self.re)
    }
    fn m_sin(self) -> Self {
        Dual::new(self.re.sin(), self.re.cos() * self.eps)
    }
    fn m_cos(self) -> Self {
        Dual::new(self.re.cos(), -(self.re.sin()) * self.eps)
    }
    fn m_sqrt(self) -> Self {
        let r = self.re.sqrt();
        Dual::new(r, self.eps / (S::from_f64(2.0) * r))
    }
    fn m_atan2(self, other: Self) -> Self {
        // d atan2(y, x) = (x dy − y dx) / (x² + y²)
        let (y, x) = (self, other);
        let denom = x.re * x.re + y.re * y.re;
        Dual::new(y.re.atan2(x.re), (x.re * y.eps - y.re * x.eps) / denom)
    }
    fn m_powi(self, n: i32) -> Self {
        match n {
            0 => Dual::constant(S::one()),
            1 => self,
            _ if n > 1 => {
                let p = self.re.powi(n - 1);
                Dual::new(p * self.re, S::from_f64(n as f64) * p * self.eps)
            }
            _ => Dual::constant(S::one()) / self.m_powi(-n),
        }
    }
}

impl Real for f64 {
    type Lifted = Dual<f64>;

    fn from_f64(v: f64) -> Self {
        v
    }
    fn primal(self) -> f64 {
        self
    }
    fn lift_const(self) -> Dual<f64> {
        Dual::constant(self)
    }
    fn lift_var(self) -> Dual<f64> {
        Dual::variable(self)
    }
    fn lower_eps(l: Dual<f64>) -> f64 {
        l.eps
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn atan2(self, other: Self) -> Self {
        f64::atan2(self, other)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
}

macro_rules! impl_real_for_dual {
    ($inner:ty, lifted: $lifted:ty) => {
        impl Real for Dual<$inner> {
            type Lifted = $lifted;

            fn from_f64(v: f64) -> Self {
                Dual::constant(<$inner>::from_f64(v))
            }
            fn primal(self) -> f64 {
                self.re.primal()
            }
            fn lift_const(self) -> Self::Lifted {
                Dual::constant(self)
            }
            fn lift_var(self) -> Self::Lifted {
                Dual::variable(self)
            }
            fn lower_eps(l: Self::Lifted) -> Self {
                l.eps
            }
            fn exp(self) -> Self {
                self.m_exp()
            }
            fn ln(self) -> Self {
                self.m_ln()
            }
            fn sin(self) -> Self {
                self.m_sin()
            }
            fn cos(self) -> Self {
                self.m_cos()
            }
            fn sqrt(self) -> Self {
                self.m_sqrt()
            }
            fn atan2(self, other: Self) -> Self {
                self.m_atan2(other)
            }
            fn powi(self, n: i32) -> Self {
                self.m_powi(n)
            }
        }
    };
}

pub type D1 = Dual<f64>;
pub type D2 = Dual<D1>;
pub type D3 = Dual<D2>;
pub type D4 = Dual<D3>;
pub type D5 = Dual<D4>;

impl_real_for_dual!(f64, lifted: D2);
impl_real_for_dual!(D1, lifted: D3);
impl_real_for_dual!(D2, lifted: D4);
impl_real_for_dual!(D3, lifted: D5);

// Tower cap: a sixth derivative layer is past anything the engine needs
// (the deepest use is d∘d of a pulled-back form, three layers).
impl Real for D5 {
    type Lifted = D5;

    fn from_f64(v: f64) -> Self {
        Dual::constant(D4::from_f64(v))
    }
    fn primal(self) -> f64 {
        self.re.primal()
    }
    fn lift_const(self) -> Self {
        self
    }
    fn lift_var(self) -> Self {
        panic!("derivative tower exceeds the supported depth of 5");
    }
    fn lower_eps(_: Self) -> Self {
        panic!("derivative tower exceeds the supported depth of 5");
    }
    fn exp(self) -> Self {
        self.m_exp()
    }
    fn ln(self) -> Self {
        self.m_ln()
    }
    fn sin(self) -> Self {
        self.m_sin()
    }
    fn cos(self) -> Self {
        self.m_cos()
    }
    fn sqrt(self) -> Self {
        self.m_sqrt()
    }
    fn atan2(self, other: Self) -> Self {
        self.m_atan2(other)
    }
    fn powi(self, n: i32) -> Self {
        self.m_powi(n)
    }
}

/// The audited C^∞ step: `e^{-1/t} / (e^{-1/t} + e^{-1/(1-t)})` on (0, 1),
/// extended by 0 and 1. All cutoffs in the crate are built from this one
/// primitive.
///
/// The branch is taken on the primal value; outside the open interval the
/// result is an exact constant, so every derivative vanishes there. The
/// guard band 1e-6 is exact in f64: `e^{-1/t}` underflows to 0.0 long
/// before t reaches it, and it keeps the interior arithmetic away from the
/// 0·∞ dual corner at denormal t.
pub fn smooth_step<S: Real>(t: S) -> S {
    let tv = t.primal();
    if tv <= 1e-6 {
        S::zero()
    } else if tv >= 1.0 - 1e-6 {
        S::one()
    } else {
        let u = (-(S::one() / t)).exp();
        let v = (-(S::one() / (S::one() - t))).exp();
        u / (u + v)
    }
}
