//! Surface integrals of 2-forms and the integrality test.

use super::mesh::SurfaceMesh;
use crate::error::Result;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Smallest deviation from an integer that always passes.
pub const INTEGRALITY_FLOOR: f64 = 1e-2;

/// Nodes `(u, v)` of the degree-2 rule on the reference triangle; each has
/// weight `1/6`.
const NODES: [(f64, f64); 3] = [(1.0 / 6.0, 1.0 / 6.0), (2.0 / 3.0, 1.0 / 6.0), (1.0 / 6.0, 2.0 / 3.0)];

/// Sum in a fixed binary tree, independent of thread count.
fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// `∫_Σ ω` over the mesh, with `ω(x, u, v)` evaluated at surface points and
/// the parametric tangents of each triangle.
pub fn integrate_surface<W>(omega: W, mesh: &SurfaceMesh) -> Result<f64>
where
    W: Fn(&[f64], &[f64], &[f64]) -> Result<f64> + Sync,
{
    let per_triangle = (0..mesh.triangles.len())
        .into_par_iter()
        .map(|k| {
            let mut acc = 0.0;
            for (u, v) in NODES {
                let (x, du, dv) = mesh.chart_point(k, u, v);
                acc += omega(&x, &du, &dv)? / 6.0;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&per_triangle))
}

/// Integral at one refinement level with a convergence estimate from the
/// two levels below.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinedIntegral {
    pub level: u32,
    pub value: f64,
    pub coarse: f64,
    /// Observed ratio of successive differences, clamped to `[4, 16]`
    /// (second to fourth order in the mesh size).
    pub rate: f64,
    /// `|I_L - I_{L-1}| / (rate - 1)`.
    pub error: f64,
    pub extrapolated: f64,
    /// `C` in `|I_L - I_{L-1}| = C · 4^{-(L-1)}`.
    pub fitted_constant: f64,
}

/// Integrates on icospheres at levels `L-2`, `L-1` and `L` (`L ≥ 2`).
pub fn integrate_refined<W>(omega: W, level: u32, reversed: bool) -> Result<RefinedIntegral>
where
    W: Fn(&[f64], &[f64], &[f64]) -> Result<f64> + Sync,
{
    if level < 2 {
        return Err(crate::Error::Parameter(format!("refinement needs mesh level at least 2, got {level}")));
    }
    let at = |l: u32| {
        let m = SurfaceMesh::icosphere(l);
        integrate_surface(&omega, &if reversed { m.reversed() } else { m })
    };
    let value = at(level)?;
    let coarse = at(level - 1)?;
    let coarsest = at(level - 2)?;
    let gap = value - coarse;
    let rate = if gap == 0.0 {
        16.0
    } else {
        ((coarse - coarsest) / gap).abs().clamp(4.0, 16.0)
    };
    Ok(RefinedIntegral {
        level,
        value,
        coarse,
        rate,
        error: gap.abs() / (rate - 1.0),
        extrapolated: value + gap / (rate - 1.0),
        fitted_constant: gap.abs() * 4f64.powi(level as i32 - 1),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralityReport {
    pub integral: f64,
    pub hbar: f64,
    pub quotient: f64,
    pub nearest: i64,
    pub deviation: f64,
    pub quad_error: f64,
    /// `max(1e-2, 3 · quad_error / (2πħ))`.
    pub threshold: f64,
    pub pass: bool,
}

impl IntegralityReport {
    pub fn verdict(&self) -> &'static str {
        if self.pass {
            "PASS"
        } else {
            "FAIL"
        }
    }
}

/// Distance of `∫ ω / (2πħ)` from the integers.
pub fn integrality_report(integral: f64, hbar: f64, quad_error: f64) -> Result<IntegralityReport> {
    if !(hbar > 0.0) {
        return Err(crate::Error::Parameter(format!("hbar must be positive, got {hbar}")));
    }
    let unit = 2.0 * PI * hbar;
    let quotient = integral / unit;
    let nearest = quotient.round();
    let deviation = (quotient - nearest).abs();
    let threshold = INTEGRALITY_FLOOR.max(3.0 * quad_error / unit);
    Ok(IntegralityReport {
        integral,
        hbar,
        quotient,
        nearest: nearest as i64,
        deviation,
        quad_error,
        threshold,
        pass: deviation <= threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn area(x: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
        // outward normal · (u × v)
        Ok(x[0] * (u[1] * v[2] - u[2] * v[1]) + x[1] * (u[2] * v[0] - u[0] * v[2]) + x[2] * (u[0] * v[1] - u[1] * v[0]))
    }

    #[test]
    fn sphere_area_converges() {
        let r = integrate_refined(area, 4, false).unwrap();
        assert!((r.value - 4.0 * PI).abs() < 1e-4, "{r:?}");
        assert!((r.extrapolated - 4.0 * PI).abs() <= (r.value - 4.0 * PI).abs());
        let rev = integrate_refined(area, 4, true).unwrap();
        assert!((rev.value + r.value).abs() < 1e-12);
    }

    #[test]
    fn exact_form_integrates_to_zero() {
        // d(x dy) = dx∧dy evaluated on tangents
        let exact = |_: &[f64], u: &[f64], v: &[f64]| Ok(u[0] * v[1] - u[1] * v[0]);
        let m = SurfaceMesh::icosphere(3);
        assert!(integrate_surface(exact, &m).unwrap().abs() < 1e-12);
    }

    #[test]
    fn report_arithmetic() {
        let r = integrality_report(PI, 0.5, 0.0).unwrap();
        assert_eq!(r.nearest, 1);
        assert!(r.deviation < 1e-15 && r.pass);
        let r = integrality_report(0.0, 3.0, 0.0).unwrap();
        assert!(r.nearest == 0 && r.pass);
        let r = integrality_report(1.0, 0.5, 0.0).unwrap();
        assert!((r.quotient - 1.0 / PI).abs() < 1e-15);
        assert!(!r.pass);
        assert!(integrality_report(1.0, 0.0, 0.0).is_err());
    }
}
