//! Scalar types for forward-mode evaluation.
//!
//! A [`Jet`] is an element of the algebra generated by nilpotent units
//! `ε_0, ε_1, ...` with `ε_i² = 0`. Coefficients are indexed by bitmask over
//! the units, so a jet with `m` units stores `2^m` reals. Seeding coordinate
//! `x_i` with `x_i + ε_k` and reading the coefficient of `ε_k` gives the exact
//! partial derivative; nesting units gives exact mixed partials of any order.

use smallvec::SmallVec;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Arithmetic needed by the expression evaluator and the pointwise solvers.
pub trait Scalar:
    Clone
    + fmt::Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    /// Real (non-infinitesimal) part.
    fn re(&self) -> f64;
    /// True when the value carries no infinitesimal part.
    fn is_real(&self) -> bool;
    fn recip(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn exp(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn powi(&self, n: i32) -> Self;
    fn powf(&self, p: f64) -> Self;
    fn to_jet(&self) -> Jet;
    fn from_jet(j: Jet) -> Self;

    fn div(&self, other: &Self) -> Self {
        self.clone() * other.recip()
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn re(&self) -> f64 {
        *self
    }
    fn is_real(&self) -> bool {
        true
    }
    fn recip(&self) -> Self {
        1.0 / self
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn powi(&self, n: i32) -> Self {
        f64::powi(*self, n)
    }
    fn powf(&self, p: f64) -> Self {
        f64::powf(*self, p)
    }
    fn to_jet(&self) -> Jet {
        Jet::constant(*self)
    }
    fn from_jet(j: Jet) -> Self {
        j.re()
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
}

type Coeffs = SmallVec<[f64; 8]>;

/// Truncated multivariate dual number with a runtime number of units.
#[derive(Clone, PartialEq)]
pub struct Jet {
    c: Coeffs,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet{:?}", self.c.as_slice())
    }
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        let mut c = Coeffs::new();
        c.push(v);
        Jet { c }
    }

    /// `v + ε_unit`.
    pub fn variable(v: f64, unit: usize) -> Self {
        Jet::constant(v).seeded(unit)
    }

    /// Adds `ε_unit` to this value.
    pub fn seeded(mut self, unit: usize) -> Self {
        self.pad(unit + 1);
        self.c[1 << unit] += 1.0;
        self
    }

    /// Number of infinitesimal units this jet can carry.
    pub fn units(&self) -> usize {
        self.c.len().trailing_zeros() as usize
    }

    pub fn coeff(&self, mask: usize) -> f64 {
        self.c.get(mask).copied().unwrap_or(0.0)
    }

    /// Coefficient of `ε_unit` as a jet over the remaining units.
    pub fn extract(&self, unit: usize) -> Jet {
        let units = self.units().max(unit + 1);
        let bit = 1usize << unit;
        let mut out = Coeffs::from_elem(0.0, 1 << (units - 1));
        for mask in 0..(1usize << units) {
            if mask & bit == 0 {
                continue;
            }
            let rest = mask & !bit;
            // squeeze the removed bit out of the index
            let low = rest & (bit - 1);
            let high = (rest >> (unit + 1)) << unit;
            out[low | high] = self.coeff(mask);
        }
        let mut j = Jet { c: out };
        j.trim();
        j
    }

    fn pad(&mut self, units: usize) {
        let len = 1usize << units;
        if self.c.len() < len {
            self.c.resize(len, 0.0);
        }
    }

    fn trim(&mut self) {
        while self.c.len() > 1 {
            let half = self.c.len() / 2;
            if self.c[half..].iter().all(|v| *v == 0.0) {
                self.c.truncate(half);
            } else {
                break;
            }
        }
    }

    fn nilpotent(&self) -> Jet {
        let mut n = self.clone();
        n.c[0] = 0.0;
        n
    }

    fn is_zero(&self) -> bool {
        self.c.iter().all(|v| *v == 0.0)
    }

    /// Applies a function given its derivatives at the real part:
    /// `f(x0 + n) = Σ_k f^(k)(x0) n^k / k!`.
    fn apply(&self, derivs: impl Fn(usize) -> f64) -> Jet {
        let n = self.nilpotent();
        let mut out = Jet::constant(derivs(0));
        if n.is_zero() {
            return out;
        }
        let mut power = n.clone();
        let mut factorial = 1.0;
        for k in 1..=self.units() {
            factorial *= k as f64;
            out = out + power.clone().scale(derivs(k) / factorial);
            power = power * n.clone();
            if power.is_zero() {
                break;
            }
        }
        out
    }

    fn scale(mut self, s: f64) -> Jet {
        for v in self.c.iter_mut() {
            *v *= s;
        }
        self
    }

    fn zip(mut self, mut other: Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        let len = self.c.len().max(other.c.len());
        self.c.resize(len, 0.0);
        other.c.resize(len, 0.0);
        for (a, b) in self.c.iter_mut().zip(other.c.iter()) {
            *a = f(*a, *b);
        }
        self
    }
}

/// Falling factorial `p (p-1) ... (p-k+1)`.
fn falling(p: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (p - i as f64))
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self.zip(rhs, |a, b| a - b)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        if self.c.len() == 1 {
            return rhs.scale(self.c[0]);
        }
        if rhs.c.len() == 1 {
            return self.scale(rhs.c[0]);
        }
        let len = self.c.len().max(rhs.c.len());
        let mut out = Coeffs::from_elem(0.0, len);
        for (mask, slot) in out.iter_mut().enumerate() {
            // all splittings of `mask` into disjoint submasks
            let mut sub = mask;
            loop {
                *slot += self.coeff(sub) * rhs.coeff(mask ^ sub);
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & mask;
            }
        }
        Jet { c: out }
    }
}

impl Scalar for Jet {
    fn from_f64(v: f64) -> Self {
        Jet::constant(v)
    }
    fn re(&self) -> f64 {
        self.c[0]
    }
    fn is_real(&self) -> bool {
        self.c[1..].iter().all(|v| *v == 0.0)
    }
    fn recip(&self) -> Self {
        self.powi(-1)
    }
    fn sin(&self) -> Self {
        let x = self.re();
        let (s, c) = x.sin_cos();
        self.apply(|k| match k % 4 {
            0 => s,
            1 => c,
            2 => -s,
            _ => -c,
        })
    }
    fn cos(&self) -> Self {
        let x = self.re();
        let (s, c) = x.sin_cos();
        self.apply(|k| match k % 4 {
            0 => c,
            1 => -s,
            2 => -c,
            _ => s,
        })
    }
    fn exp(&self) -> Self {
        let e = self.re().exp();
        self.apply(|_| e)
    }
    fn sqrt(&self) -> Self {
        self.powf(0.5)
    }
    fn powi(&self, n: i32) -> Self {
        if n >= 0 {
            let mut out = Jet::constant(1.0);
            let mut base = self.clone();
            let mut e = n as u32;
            while e > 0 {
                if e & 1 == 1 {
                    out = out * base.clone();
                }
                base = base.clone() * base;
                e >>= 1;
            }
            out
        } else {
            let x = self.re();
            let p = n as f64;
            self.apply(|k| falling(p, k) * x.powi(n - k as i32))
        }
    }
    fn powf(&self, p: f64) -> Self {
        let x = self.re();
        self.apply(|k| falling(p, k) * x.powf(p - k as f64))
    }
    fn to_jet(&self) -> Jet {
        self.clone()
    }
    fn from_jet(j: Jet) -> Self {
        j
    }
}
