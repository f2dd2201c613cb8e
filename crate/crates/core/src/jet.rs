//! Bivariate truncated jets.
//!
//! A [`Jet`] carries a value together with every partial derivative
//! `∂^{a+b} f / ∂x^a ∂y^b` with `a + b <= order`, stored as raw derivatives
//! (not Taylor-scaled). Slots are ordered
//! `(f, f_x, f_y, f_xx, f_xy, f_yy, f_xxx, f_xxy, f_xyy, f_yyy)`.
//!
//! Products follow the bivariate Leibniz rule, and univariate functions are
//! composed through their derivatives up to third order, so every retained
//! slot is exact. Coefficients may be real or complex; complex jets are what
//! the statevector simulator stores in its amplitudes.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest supported derivative order.
pub const MAX_ORDER: usize = 3;
/// Number of slots at [`MAX_ORDER`].
pub const MAX_LEN: usize = 10;

/// Independent spatial variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

/// Slot index of `∂^{a+b}/∂x^a∂y^b`.
pub const fn slot(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + b
}

/// Number of slots for a jet of the given order.
pub const fn slot_count(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

/// One Leibniz term: `out += weight * lhs[lhs_slot] * rhs[rhs_slot]`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Term {
    pub out: usize,
    pub lhs: usize,
    pub rhs: usize,
    pub weight: f64,
}

const fn binomial(n: usize, k: usize) -> f64 {
    let mut num = 1.0;
    let mut i = 0;
    while i < k {
        num = num * (n - i) as f64 / (i + 1) as f64;
        i += 1;
    }
    num
}

const fn build_terms() -> [Term; 35] {
    let mut terms = [Term {
        out: 0,
        lhs: 0,
        rhs: 0,
        weight: 0.0,
    }; 35];
    let mut n = 0;
    let mut d = 0;
    // Terms are grouped by total degree of the output slot so that the
    // product at order k uses a prefix of the table.
    while d <= MAX_ORDER {
        let mut q = 0;
        while q <= d {
            let p = d - q;
            let mut i = 0;
            while i <= p {
                let mut j = 0;
                while j <= q {
                    terms[n] = Term {
                        out: slot(p, q),
                        lhs: slot(i, j),
                        rhs: slot(p - i, q - j),
                        weight: binomial(p, i) * binomial(q, j),
                    };
                    n += 1;
                    j += 1;
                }
                i += 1;
            }
            q += 1;
        }
        d += 1;
    }
    terms
}

static TERMS: [Term; 35] = build_terms();
const TERMS_UPTO: [usize; MAX_ORDER + 1] = [1, 5, 15, 35];

/// Leibniz terms needed for a product truncated at `order`.
pub(crate) fn terms(order: usize) -> &'static [Term] {
    &TERMS[..TERMS_UPTO[order]]
}

/// Scalar coefficient type of a jet.
pub trait Coeff:
    Copy
    + Send
    + Sync
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Neg<Output = Self>
    + Mul<Output = Self>
    + Mul<f64, Output = Self>
    + AddAssign
{
    const ZERO: Self;
    const ONE: Self;
}

impl Coeff for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
}

impl Coeff for Complex64 {
    const ZERO: Self = Complex64::new(0.0, 0.0);
    const ONE: Self = Complex64::new(1.0, 0.0);
}

/// Truncated bivariate Taylor object with raw partial-derivative slots.
#[derive(Clone, Copy, PartialEq)]
pub struct Jet<T = f64> {
    order: u8,
    c: [T; MAX_LEN],
}

impl<T: Coeff> Debug for Jet<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Jet")
            .field("order", &self.order)
            .field("coeffs", &self.coeffs())
            .finish()
    }
}

fn check_order(order: usize) -> Result<()> {
    if (1..=MAX_ORDER).contains(&order) {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "jet order must be in 1..={MAX_ORDER}, got {order}"
        )))
    }
}

impl<T: Coeff> Jet<T> {
    /// Constant jet: all derivative slots zero.
    ///
    /// Panics if `order` is outside `1..=3`; use [`Jet::from_coeffs`] for a
    /// checked constructor.
    pub fn constant(value: T, order: usize) -> Self {
        assert!((1..=MAX_ORDER).contains(&order), "jet order {order} out of range");
        let mut c = [T::ZERO; MAX_LEN];
        c[0] = value;
        Self {
            order: order as u8,
            c,
        }
    }

    pub fn zero(order: usize) -> Self {
        Self::constant(T::ZERO, order)
    }

    /// Build from explicit slots; `coeffs.len()` fixes the order.
    pub fn from_coeffs(coeffs: &[T]) -> Result<Self> {
        let order = match coeffs.len() {
            3 => 1,
            6 => 2,
            10 => 3,
            n => {
                return Err(Error::Config(format!(
                    "{n} coefficients do not form a complete jet"
                )))
            }
        };
        let mut c = [T::ZERO; MAX_LEN];
        c[..coeffs.len()].copy_from_slice(coeffs);
        Ok(Self {
            order: order as u8,
            c,
        })
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order as usize
    }

    #[inline]
    pub fn len(&self) -> usize {
        slot_count(self.order())
    }

    /// Always false; jets hold at least the value and two first derivatives.
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn coeffs(&self) -> &[T] {
        &self.c[..self.len()]
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [T] {
        let n = self.len();
        &mut self.c[..n]
    }

    #[inline]
    pub fn value(&self) -> T {
        self.c[0]
    }

    /// `∂^{a+b}f/∂x^a∂y^b`; `None` beyond the jet's order.
    pub fn partial(&self, a: usize, b: usize) -> Option<T> {
        (a + b <= self.order()).then(|| self.c[slot(a, b)])
    }

    /// Drop every slot above `order`. Orders above the current one are clamped.
    pub fn truncate(&self, order: usize) -> Self {
        let order = order.clamp(1, self.order());
        let mut c = [T::ZERO; MAX_LEN];
        let n = slot_count(order);
        c[..n].copy_from_slice(&self.c[..n]);
        Self {
            order: order as u8,
            c,
        }
    }

    /// Same order, value replaced, derivatives zeroed.
    #[inline]
    pub fn constant_like(&self, value: T) -> Self {
        Self::constant(value, self.order())
    }

    #[inline]
    pub fn scale(&self, k: f64) -> Self {
        let mut out = *self;
        for v in out.coeffs_mut() {
            *v = *v * k;
        }
        out
    }

    #[inline]
    pub fn scale_by(&self, k: T) -> Self {
        let mut out = *self;
        for v in out.coeffs_mut() {
            *v = *v * k;
        }
        out
    }

    /// Leibniz product with a jet of another coefficient type, truncated at
    /// the lower of the two orders.
    #[inline]
    pub fn mul_by<U: Coeff>(&self, rhs: &Jet<U>) -> Self
    where
        T: Mul<U, Output = T>,
    {
        let order = self.order().min(rhs.order());
        let mut c = [T::ZERO; MAX_LEN];
        for t in terms(order) {
            c[t.out] += self.c[t.lhs] * rhs.c[t.rhs] * t.weight;
        }
        Jet {
            order: order as u8,
            c,
        }
    }

    /// Checked product: orders must match.
    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.order != rhs.order {
            return Err(Error::Usage(format!(
                "jet order mismatch: {} vs {}",
                self.order, rhs.order
            )));
        }
        Ok(self.mul_by(rhs))
    }

    fn zip(&self, rhs: &Self, f: impl Fn(T, T) -> T) -> Self {
        let order = self.order().min(rhs.order());
        let mut c = [T::ZERO; MAX_LEN];
        for (i, v) in c.iter_mut().enumerate().take(slot_count(order)) {
            *v = f(self.c[i], rhs.c[i]);
        }
        Jet {
            order: order as u8,
            c,
        }
    }
}

impl<T: Coeff> Default for Jet<T> {
    /// The zero jet at the maximum order.
    fn default() -> Self {
        Self::zero(MAX_ORDER)
    }
}

impl<T: Coeff> Add for Jet<T> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        self.zip(&rhs, |a, b| a + b)
    }
}

impl<T: Coeff> Sub for Jet<T> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        self.zip(&rhs, |a, b| a - b)
    }
}

impl<T: Coeff> Neg for Jet<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl<T: Coeff> Mul for Jet<T> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        self.mul_by(&rhs)
    }
}

impl<T: Coeff> Mul<f64> for Jet<T> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs)
    }
}

impl<T: Coeff> Add<f64> for Jet<T>
where
    T: Add<f64, Output = T>,
{
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: f64) -> Self {
        self.c[0] = self.c[0] + rhs;
        self
    }
}

impl<T: Coeff> Sub<f64> for Jet<T>
where
    T: Sub<f64, Output = T>,
{
    type Output = Self;
    #[inline]
    fn sub(mut self, rhs: f64) -> Self {
        self.c[0] = self.c[0] - rhs;
        self
    }
}

/// Elementary functions supported by [`jet_elem`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Elem {
    Sin,
    Cos,
    Tanh,
    Arccos,
    Exp,
}

impl Jet<f64> {
    /// Compose a univariate function given its value and first three
    /// derivatives at `self.value()`.
    ///
    /// Uses `f(a0 + δ) = Σ f^(k)(a0) δ^k / k!` where `δ` is the jet with its
    /// value slot removed; `δ^4` vanishes at order 3 so this is exact.
    pub fn compose(&self, derivs: [f64; 4]) -> Self {
        let order = self.order();
        let mut delta = *self;
        delta.c[0] = 0.0;
        let mut out = delta.scale(derivs[1]);
        out.c[0] = derivs[0];
        if order >= 2 {
            let d2 = delta * delta;
            for (o, v) in out.coeffs_mut().iter_mut().zip(d2.coeffs()) {
                *o += 0.5 * derivs[2] * v;
            }
            if order >= 3 {
                let d3 = d2 * delta;
                for (o, v) in out.coeffs_mut().iter_mut().zip(d3.coeffs()) {
                    *o += derivs[3] / 6.0 * v;
                }
            }
        }
        out
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.compose([c, -s, -c, s])
    }

    /// `(sin, cos)` sharing the delta powers.
    pub fn sin_cos(&self) -> (Self, Self) {
        (self.sin(), self.cos())
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose([e; 4])
    }

    pub fn tanh(&self) -> Self {
        let t = self.value().tanh();
        let s = 1.0 - t * t;
        self.compose([t, s, -2.0 * t * s, s * (6.0 * t * t - 2.0)])
    }

    /// `arccos`; fails unless `|value| < 1`.
    pub fn acos(&self) -> Result<Self> {
        let x = self.value();
        if !(x.abs() < 1.0) {
            return Err(Error::Domain(format!("arccos argument {x} not in (-1, 1)")));
        }
        let q = 1.0 - x * x;
        let r = q.sqrt();
        Ok(self.compose([
            x.acos(),
            -1.0 / r,
            -x / (q * r),
            -(1.0 + 2.0 * x * x) / (q * q * r),
        ]))
    }

    /// Slot-wise dot product with a cotangent (co-jet).
    pub fn dot(&self, w: &[f64]) -> f64 {
        self.coeffs().iter().zip(w).map(|(a, b)| a * b).sum()
    }
}

/// Seed a coordinate variable: value `value`, unit derivative along `axis`.
pub fn jet_var(value: f64, axis: Axis, order: usize) -> Result<Jet<f64>> {
    check_order(order)?;
    let mut j = Jet::constant(value, order);
    match axis {
        Axis::X => j.c[slot(1, 0)] = 1.0,
        Axis::Y => j.c[slot(0, 1)] = 1.0,
    }
    Ok(j)
}

/// Checked Leibniz product.
pub fn jet_mul<T: Coeff>(a: &Jet<T>, b: &Jet<T>) -> Result<Jet<T>> {
    a.try_mul(b)
}

/// Apply an elementary function.
pub fn jet_elem(a: &Jet<f64>, f: Elem) -> Result<Jet<f64>> {
    Ok(match f {
        Elem::Sin => a.sin(),
        Elem::Cos => a.cos(),
        Elem::Tanh => a.tanh(),
        Elem::Exp => a.exp(),
        Elem::Arccos => a.acos()?,
    })
}

/// Reverse of a product with a fixed jet.
///
/// For `c = a * b`, returns the cotangent on `b`'s slots given the cotangent
/// `w` on `c`'s slots: `∂(w·c)/∂b_j`. The result has `a.len()` meaningful
/// entries when `w` is at least that long.
pub fn mul_adjoint(a: &Jet<f64>, w: &[f64]) -> [f64; MAX_LEN] {
    let order = a.order().min(order_of_len(w.len()));
    let mut out = [0.0; MAX_LEN];
    for t in terms(order) {
        out[t.rhs] += w[t.out] * t.weight * a.c[t.lhs];
    }
    out
}

fn order_of_len(n: usize) -> usize {
    match n {
        0..=2 => 0,
        3..=5 => 1,
        6..=9 => 2,
        _ => 3,
    }
}
