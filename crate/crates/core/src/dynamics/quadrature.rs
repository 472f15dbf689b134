//! Adaptive Gauss–Kronrod quadrature and fiber period integrals.

use crate::error::{Error, Result};
use crate::expr::ScalarField;

/// Absolute tolerance of [`period_via_integral`].
pub const PERIOD_INTEGRAL_TOL: f64 = 1e-9;
/// Largest allowed `|g(x, 0) - g(x, 1)|`.
pub const PERIODICITY_TOL: f64 = 1e-9;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
/// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &mut impl FnMut(f64) -> Result<f64>, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx)? + f(c + dx)?;
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    Ok((kronrod * h, ((kronrod - gauss) * h).abs()))
}

/// `∫_a^b f` by bisection until the summed Kronrod–Gauss differences fall
/// below `tol`. Returns the value and the error estimate.
pub fn integrate_adaptive(mut f: impl FnMut(f64) -> Result<f64>, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    let mut pending = vec![(a, b, gk15(&mut f, a, b)?)];
    for _ in 0..2000 {
        let total_err: f64 = pending.iter().map(|(_, _, (_, e))| e).sum();
        if total_err <= tol {
            break;
        }
        // split the worst interval
        let worst = pending
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .map(|(i, _)| i)
            .expect("nonempty");
        let (lo, hi, _) = pending.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        pending.push((lo, mid, gk15(&mut f, lo, mid)?));
        pending.push((mid, hi, gk15(&mut f, mid, hi)?));
    }
    pending.sort_by(|x, y| x.0.total_cmp(&y.0));
    let value = pending.iter().map(|(_, _, (v, _))| v).sum();
    let err: f64 = pending.iter().map(|(_, _, (_, e))| e).sum();
    if err > tol {
        return Err(Error::Solver {
            label: "adaptive quadrature".into(),
            residual: err,
        });
    }
    Ok((value, err))
}

/// `∫_0^1 g(x, τ) dτ` for `g` on a chart whose last coordinate is `τ`.
pub fn period_via_integral(g: &ScalarField, x: &[f64]) -> Result<f64> {
    let dim = g.chart().dim();
    if x.len() + 1 != dim {
        return Err(Error::Dimension {
            expected: dim - 1,
            found: x.len(),
        });
    }
    let mut point = x.to_vec();
    point.push(0.0);
    let mut at = |tau: f64| -> Result<f64> {
        point[dim - 1] = tau;
        let v = g.eval(&point)?;
        if !(v > 0.0) {
            return Err(Error::NonPositive {
                point: point.clone(),
                value: v,
            });
        }
        Ok(v)
    };
    let gap = (at(0.0)? - at(1.0)?).abs();
    if !(gap <= PERIODICITY_TOL) {
        return Err(Error::NotPeriodic(gap));
    }
    Ok(integrate_adaptive(at, 0.0, 1.0, PERIOD_INTEGRAL_TOL)?.0)
}
