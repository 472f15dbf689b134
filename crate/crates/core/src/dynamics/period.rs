//! First-return detection and minimal periods.
//!
//! A return is accepted only after three gates: the dense-output distance to
//! the start passes a coarse gate of `10 × return_tol`, the minimum refined by
//! re-integration passes `return_tol`, and the flow speed there is at least
//! `min_speed` (slow near-returns of irrational windings are not returns).

use super::ode::{Advance, Field, FlowOptions, IntegratorStats, Stepper, Trajectory};
use crate::error::{Error, Result};
use rayon::prelude::*;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodOptions {
    pub flow: FlowOptions,
    pub return_tol: f64,
    pub horizon: f64,
    /// Divisors `2..=max_divisor` of a detected period are tested for returns.
    pub max_divisor: u32,
    pub min_speed: f64,
}

impl Default for PeriodOptions {
    fn default() -> Self {
        PeriodOptions {
            flow: FlowOptions::default(),
            return_tol: 1e-6,
            horizon: 200.0,
            max_divisor: 8,
            min_speed: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Periodic,
    NonClosedWithinHorizon,
    Undetermined,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Periodic => "periodic",
            Classification::NonClosedWithinHorizon => "non-closed-within-horizon",
            Classification::Undetermined => "undetermined",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodEstimate {
    pub classification: Classification,
    /// Minimal period, present iff periodic.
    pub period: Option<f64>,
    /// Earliest accepted return before the divisor test.
    pub first_return: Option<f64>,
    /// Distance to the start at the accepted return, or the closest approach
    /// seen when no return was accepted.
    pub residual: f64,
    /// `(k, |x(T/k) - x0|)` for each tested divisor.
    pub divisor_residuals: Vec<(u32, f64)>,
    /// Local minima of the distance examined.
    pub candidates: usize,
    pub horizon: f64,
    pub return_tol: f64,
    /// Set when integration stopped at the edge of the chart.
    pub truncated: bool,
    pub stats: IntegratorStats,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Integrates from `(t0, x0)` to exactly `t1`.
fn integrate_to<F: Field + ?Sized>(field: &F, t0: f64, x0: &[f64], t1: f64, opts: &FlowOptions) -> Result<Vec<f64>> {
    if t1 <= t0 {
        return Ok(x0.to_vec());
    }
    let mut stepper = Stepper::new(field, t0, x0, opts)?;
    let mut end = x0.to_vec();
    while stepper.time() < t1 {
        match stepper.advance(t1)? {
            Advance::Step(step) => end = step.x1,
            Advance::Exited => {
                return Err(Error::Input(format!("trajectory left the chart before t = {t1}")));
            }
        }
    }
    Ok(end)
}

/// Brent's bracketed minimizer on `[a, b]`; returns `(t, f(t))`.
pub(crate) fn brent_min(mut f: impl FnMut(f64) -> Result<f64>, a: f64, b: f64, xtol: f64) -> Result<(f64, f64)> {
    const GOLD: f64 = 0.381_966_011_250_105_1;
    let (mut a, mut b) = (a, b);
    let mut x = a + GOLD * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x)?;
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let tol1 = xtol + 1e-15 * x.abs();
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_old = e;
            e = d;
            if p.abs() < (0.5 * q * e_old).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if x < m { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= m { a - x } else { b - x };
            d = GOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u)?;
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            (v, fv) = (w, fw);
            (w, fw) = (x, fx);
            (x, fx) = (u, fu);
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                (v, fv) = (w, fw);
                (w, fw) = (u, fu);
            } else if fu <= fv || v == x || v == w {
                (v, fv) = (u, fu);
            }
        }
    }
    Ok((x, fx))
}

/// Scans the flow of `field` from `x0` for the earliest return, then tests
/// divisors of it for minimality.
pub fn detect_period<F: Field + ?Sized>(field: &F, x0: &[f64], opts: &PeriodOptions) -> Result<PeriodEstimate> {
    if !(opts.horizon > 0.0) || !(opts.return_tol > 0.0) {
        return Err(Error::Input("horizon and return tolerance must be positive".into()));
    }
    let rt = opts.return_tol;
    let gate = 10.0 * rt;
    let xtol = 1e-12 * opts.horizon.max(1.0);
    let mut stepper = Stepper::new(field, 0.0, x0, &opts.flow)?;
    let f0 = field.eval(x0)?;
    let mut traj = Trajectory::start(field.label(), 0.0, x0.to_vec(), f0);
    let mut d: Vec<f64> = vec![0.0];
    let mut candidates = 0;
    let mut closest = f64::INFINITY;
    let mut bracket_failed = false;
    let mut truncated = false;
    let mut accepted: Option<(f64, f64)> = None;

    while stepper.time() < opts.horizon {
        match stepper.advance(opts.horizon)? {
            Advance::Step(step) => {
                d.push(dist2(&step.x1, x0));
                traj.push(step);
            }
            Advance::Exited => {
                truncated = true;
                break;
            }
        }
        let m = d.len();
        if m < 3 {
            continue;
        }
        let k = m - 2;
        if !(d[k] <= d[k - 1] && d[k] < d[k + 1]) {
            continue;
        }
        candidates += 1;
        let times = traj.times();
        let (ta, tb) = (times[k - 1], times[k + 1]);
        let (_, dense) = brent_min(|t| Ok(dist2(&traj.at(t)?, x0)), ta, tb, xtol)?;
        closest = closest.min(dense.sqrt());
        if dense.sqrt() > gate {
            continue;
        }
        let start = traj.points()[k - 1].clone();
        let (tr, fr) = brent_min(|t| Ok(dist2(&integrate_to(field, ta, &start, t, &opts.flow)?, x0)), ta, tb, xtol)?;
        let residual = fr.sqrt();
        closest = closest.min(residual);
        if residual > rt {
            if tr - ta < 1e-9 || tb - tr < 1e-9 {
                bracket_failed = true;
            }
            continue;
        }
        let at_return = integrate_to(field, ta, &start, tr, &opts.flow)?;
        if norm(&field.eval(&at_return)?) < opts.min_speed {
            continue;
        }
        accepted = Some((tr, residual));
        break;
    }

    let mut estimate = PeriodEstimate {
        classification: Classification::NonClosedWithinHorizon,
        period: None,
        first_return: None,
        residual: closest,
        divisor_residuals: Vec::new(),
        candidates,
        horizon: opts.horizon,
        return_tol: rt,
        truncated,
        stats: stepper.stats,
    };
    let Some((first, residual)) = accepted else {
        if truncated || bracket_failed {
            estimate.classification = Classification::Undetermined;
        }
        return Ok(estimate);
    };
    estimate.classification = Classification::Periodic;
    estimate.first_return = Some(first);
    estimate.residual = residual;
    let mut period = first;
    for k in 2..=opts.max_divisor {
        let tk = first / k as f64;
        let times = traj.times();
        let j = times.partition_point(|s| *s <= tk).saturating_sub(1);
        let x = integrate_to(field, times[j], &traj.points()[j], tk, &opts.flow)?;
        let r = dist2(&x, x0).sqrt();
        estimate.divisor_residuals.push((k, r));
        if r <= rt && norm(&field.eval(&x)?) >= opts.min_speed {
            period = period.min(tk);
        }
    }
    estimate.period = Some(period);
    Ok(estimate)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstancyReport {
    pub estimates: Vec<PeriodEstimate>,
    pub min: f64,
    pub max: f64,
    pub spread: f64,
    /// Largest spread that passes: `2 × return_tol`.
    pub allowed_spread: f64,
    pub pass: bool,
}

/// Minimal periods from several starts, compared. Starts are integrated
/// concurrently and reported in input order.
pub fn period_constancy<F: Field + ?Sized>(field: &F, starts: &[Vec<f64>], opts: &PeriodOptions) -> Result<ConstancyReport> {
    if starts.is_empty() {
        return Err(Error::Input("no start points".into()));
    }
    let estimates = starts
        .par_iter()
        .map(|x| detect_period(field, x, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut periods = Vec::with_capacity(estimates.len());
    for (index, e) in estimates.iter().enumerate() {
        match e.period {
            Some(p) if e.classification == Classification::Periodic => periods.push(p),
            _ => {
                return Err(Error::NonPeriodicStart {
                    index,
                    detail: format!("{} (closest approach {:e})", e.classification, e.residual),
                })
            }
        }
    }
    let min = periods.iter().copied().fold(f64::INFINITY, f64::min);
    let max = periods.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let allowed_spread = 2.0 * opts.return_tol;
    Ok(ConstancyReport {
        estimates,
        min,
        max,
        spread: max - min,
        allowed_spread,
        pass: max - min <= allowed_spread,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ode::FnField;
    use std::f64::consts::PI;

    fn rotation(speed: f64) -> FnField<impl Fn(&[f64]) -> Vec<f64> + Sync> {
        FnField::new("rotation", 2, move |x: &[f64]| vec![-speed * x[1], speed * x[0]])
    }

    #[test]
    fn brent_finds_parabola_minimum() {
        let (t, f) = brent_min(|t| Ok((t - 0.3) * (t - 0.3) + 1.0), 0.0, 1.0, 1e-12).unwrap();
        assert!((t - 0.3).abs() < 1e-7);
        assert!((f - 1.0).abs() < 1e-14);
    }

    #[test]
    fn circle_period() {
        let est = detect_period(&rotation(2.0), &[1.0, 0.0], &PeriodOptions::default()).unwrap();
        assert_eq!(est.classification, Classification::Periodic);
        assert!((est.period.unwrap() - PI).abs() < 1e-8, "{est:?}");
        // half period lands on the antipode
        assert_eq!(est.divisor_residuals[0].0, 2);
        assert!((est.divisor_residuals[0].1 - 2.0).abs() < 1e-8);
    }

    #[test]
    fn equilibrium_is_not_periodic() {
        let opts = PeriodOptions {
            horizon: 5.0,
            ..Default::default()
        };
        let est = detect_period(&rotation(1.0), &[0.0, 0.0], &opts).unwrap();
        assert_ne!(est.classification, Classification::Periodic);
    }

    #[test]
    fn constancy_flags_different_periods() {
        // two decoupled rotations with speeds 1 and 2
        let f = FnField::new("pair", 4, |x: &[f64]| vec![-x[1], x[0], -2.0 * x[3], 2.0 * x[2]]);
        let opts = PeriodOptions {
            horizon: 20.0,
            ..Default::default()
        };
        let report = period_constancy(&f, &[vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0]], &opts).unwrap();
        assert!(!report.pass);
        assert!((report.spread - PI).abs() < 1e-7);
    }
}
