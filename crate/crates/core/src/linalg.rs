//! Small dense least-squares solves, generic over [`Scalar`] so that the
//! solution of a pointwise system can itself be differentiated in forward mode.

use crate::error::{Error, Result};
use crate::expr::{Node, Scalar};
use std::fmt;
use std::sync::Arc;

/// Residual above which a pointwise solve is reported as degenerate.
pub const SOLVE_RESIDUAL_TOL: f64 = 1e-8;

/// Householder QR least squares for an `m x n` system with `m >= n`.
///
/// Returns `None` when the matrix is rank deficient in its real part.
pub fn least_squares<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    if m < n || b.len() != m {
        return None;
    }
    let scale = a
        .iter()
        .flatten()
        .map(|v| v.re().abs())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    for k in 0..n {
        let mut norm2 = T::from_f64(0.0);
        for row in a.iter().skip(k) {
            norm2 = norm2 + row[k].clone() * row[k].clone();
        }
        if norm2.re().sqrt() <= 1e-13 * scale {
            return None;
        }
        let norm = norm2.sqrt();
        let alpha = if a[k][k].re() >= 0.0 { -norm } else { norm };
        let mut v: Vec<T> = a.iter().skip(k).map(|row| row[k].clone()).collect();
        v[0] = v[0].clone() - alpha.clone();
        let mut vnorm2 = T::from_f64(0.0);
        for vi in &v {
            vnorm2 = vnorm2 + vi.clone() * vi.clone();
        }
        if vnorm2.re() == 0.0 {
            continue;
        }
        let inv = vnorm2.recip();
        for j in k..n {
            let mut s = T::from_f64(0.0);
            for (i, vi) in v.iter().enumerate() {
                s = s + vi.clone() * a[k + i][j].clone();
            }
            let f = T::from_f64(2.0) * s * inv.clone();
            for (i, vi) in v.iter().enumerate() {
                a[k + i][j] = a[k + i][j].clone() - f.clone() * vi.clone();
            }
        }
        let mut s = T::from_f64(0.0);
        for (i, vi) in v.iter().enumerate() {
            s = s + vi.clone() * b[k + i].clone();
        }
        let f = T::from_f64(2.0) * s * inv;
        for (i, vi) in v.iter().enumerate() {
            b[k + i] = b[k + i].clone() - f.clone() * vi.clone();
        }
    }
    let mut x = vec![T::from_f64(0.0); n];
    for k in (0..n).rev() {
        let mut s = b[k].clone();
        for j in k + 1..n {
            s = s - a[k][j].clone() * x[j].clone();
        }
        x[k] = s.div(&a[k][k]);
    }
    Some(x)
}

/// Max-norm residual `|A x - b|` of the real parts.
pub fn residual<T: Scalar>(a: &[Vec<T>], b: &[T], x: &[T]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(row, bi)| {
            let ax: f64 = row.iter().zip(x).map(|(aij, xj)| aij.re() * xj.re()).sum();
            (ax - bi.re()).abs()
        })
        .fold(0.0, f64::max)
}

/// A pointwise linear system whose entries are expression nodes on one chart.
pub struct LinearSystem {
    label: String,
    rows: Vec<Vec<Arc<Node>>>,
    rhs: Vec<Arc<Node>>,
}

impl fmt::Debug for LinearSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LinearSystem({}, {}x{})", self.label, self.rows.len(), self.unknowns())
    }
}

impl LinearSystem {
    pub(crate) fn new(label: &str, rows: Vec<Vec<Arc<Node>>>, rhs: Vec<Arc<Node>>) -> Self {
        LinearSystem {
            label: label.to_string(),
            rows,
            rhs,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn unknowns(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub(crate) fn assemble<T: Scalar>(&self, x: &[T]) -> Result<(Vec<Vec<T>>, Vec<T>)> {
        let a = self
            .rows
            .iter()
            .map(|row| row.iter().map(|e| e.eval(x)).collect::<Result<Vec<T>>>())
            .collect::<Result<Vec<_>>>()?;
        let b = self.rhs.iter().map(|e| e.eval(x)).collect::<Result<Vec<T>>>()?;
        Ok((a, b))
    }

    pub(crate) fn solve<T: Scalar>(&self, x: &[T]) -> Result<Vec<T>> {
        let (a, b) = self.assemble(x)?;
        let sol = least_squares(a.clone(), b.clone()).ok_or_else(|| Error::Solver {
            label: self.label.clone(),
            residual: f64::INFINITY,
        })?;
        let r = residual(&a, &b, &sol);
        if !(r <= SOLVE_RESIDUAL_TOL) {
            return Err(Error::Solver {
                label: self.label.clone(),
                residual: r,
            });
        }
        Ok(sol)
    }
}
