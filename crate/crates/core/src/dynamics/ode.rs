//! Dormand–Prince 5(4) integration with cubic Hermite dense output.
//!
//! Step control bounds the local error per unit step: an accepted step of
//! length `h` satisfies `|err| / h ≤ tol`, where `err` is the embedded
//! error estimate measured componentwise against `max(1, |x_i|)`.

use crate::error::{Error, Result};
use crate::expr::jet::{Jet, Scalar};
use crate::forms::perm::combinations;
use crate::forms::{KForm, VectorField};
use std::fmt::Write as _;

pub const DEFAULT_TOL: f64 = 1e-10;
const MAX_STEPS: usize = 50_000_000;
const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

/// A vector field that can be integrated.
pub trait Field: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>>;
    fn contains(&self, _x: &[f64]) -> bool {
        true
    }
    fn label(&self) -> String {
        String::from("field")
    }
}

impl Field for VectorField {
    fn dim(&self) -> usize {
        self.chart().dim()
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        VectorField::eval(self, x)
    }
    fn contains(&self, x: &[f64]) -> bool {
        self.chart().contains(x)
    }
    fn label(&self) -> String {
        format!("field on {}", self.chart().name())
    }
}

/// A field given by a closure, for closed-form dynamics.
pub struct FnField<F> {
    dim: usize,
    label: String,
    f: F,
}

impl<F> FnField<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    pub fn new(label: &str, dim: usize, f: F) -> Self {
        FnField {
            dim,
            label: label.to_string(),
            f,
        }
    }
}

impl<F> Field for FnField<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok((self.f)(x))
    }
    fn label(&self) -> String {
        self.label.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    pub tol: f64,
    /// First trial step; chosen from the field speed when absent.
    pub initial_step: Option<f64>,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            tol: DEFAULT_TOL,
            initial_step: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IntegratorStats {
    pub steps: usize,
    pub rejected: usize,
    pub evaluations: usize,
    pub tol: f64,
}

/// One accepted step with the data needed for Hermite interpolation.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Step {
    pub t0: f64,
    pub x0: Vec<f64>,
    pub f0: Vec<f64>,
    pub t1: f64,
    pub x1: Vec<f64>,
    pub f1: Vec<f64>,
}

pub(crate) fn hermite(t0: f64, x0: &[f64], f0: &[f64], t1: f64, x1: &[f64], f1: &[f64], t: f64) -> Vec<f64> {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    (0..x0.len())
        .map(|i| h00 * x0[i] + h10 * h * f0[i] + h01 * x1[i] + h11 * h * f1[i])
        .collect()
}

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Outcome of one call to [`Stepper::advance`].
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Advance {
    Step(Step),
    /// The next step would leave the field's domain.
    Exited,
}

/// Incremental DP45 integrator.
pub(crate) struct Stepper<'a, F: Field + ?Sized> {
    field: &'a F,
    tol: f64,
    t: f64,
    x: Vec<f64>,
    f: Vec<f64>,
    h: f64,
    pub stats: IntegratorStats,
}

impl<'a, F: Field + ?Sized> Stepper<'a, F> {
    pub fn new(field: &'a F, t0: f64, x0: &[f64], opts: &FlowOptions) -> Result<Self> {
        if x0.len() != field.dim() {
            return Err(Error::Dimension {
                expected: field.dim(),
                found: x0.len(),
            });
        }
        if !(opts.tol > 0.0) {
            return Err(Error::Input(format!("integrator tolerance must be positive, got {}", opts.tol)));
        }
        if !field.contains(x0) {
            return Err(Error::Input(format!("start point {x0:?} is outside the chart")));
        }
        let f = field.eval(x0)?;
        let speed = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let h = opts
            .initial_step
            .unwrap_or_else(|| opts.tol.powf(0.25) / speed.max(1.0));
        Ok(Stepper {
            field,
            tol: opts.tol,
            t: t0,
            x: x0.to_vec(),
            f,
            h,
            stats: IntegratorStats {
                tol: opts.tol,
                evaluations: 1,
                ..Default::default()
            },
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    fn stages(&mut self, h: f64) -> Result<Option<(Vec<f64>, Vec<f64>, f64)>> {
        let n = self.x.len();
        let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
        k.push(self.f.clone());
        let mut y = vec![0.0; n];
        for s in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    acc += A[s][j] * kj[i];
                }
                y[i] = self.x[i] + h * acc;
            }
            if !self.field.contains(&y) {
                return Ok(None);
            }
            self.stats.evaluations += 1;
            match self.field.eval(&y) {
                Ok(v) => k.push(v),
                Err(Error::Domain { .. }) => return Ok(None),
                Err(e) => return Err(e),
            }
        }
        // stage 7 is evaluated at the fifth-order solution (FSAL)
        let mut err: f64 = 0.0;
        for i in 0..n {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[i];
            }
            let scale = self.x[i].abs().max(y[i].abs()).max(1.0);
            err = err.max((h * e).abs() / scale);
        }
        Ok(Some((y, k.pop().expect("seven stages"), err / h)))
    }

    /// Takes one accepted step without passing `t_end`.
    pub fn advance(&mut self, t_end: f64) -> Result<Advance> {
        let mut exits = 0;
        loop {
            let remaining = t_end - self.t;
            let clipped = self.h >= remaining;
            let h = if clipped { remaining } else { self.h };
            if !(h > 1e-14 * self.t.abs().max(1.0)) {
                return Err(Error::StepUnderflow(self.t));
            }
            match self.stages(h)? {
                None => {
                    exits += 1;
                    self.stats.rejected += 1;
                    self.h = h * 0.5;
                    if exits > 60 || self.h < 1e-12 {
                        return Ok(Advance::Exited);
                    }
                }
                Some((y, fy, err)) => {
                    let factor = if err == 0.0 {
                        MAX_FACTOR
                    } else {
                        (SAFETY * (self.tol / err).powf(0.25)).clamp(MIN_FACTOR, MAX_FACTOR)
                    };
                    if err <= self.tol {
                        let step = Step {
                            t0: self.t,
                            x0: std::mem::replace(&mut self.x, y.clone()),
                            f0: std::mem::replace(&mut self.f, fy.clone()),
                            t1: if clipped { t_end } else { self.t + h },
                            x1: y,
                            f1: fy,
                        };
                        self.t = step.t1;
                        if !clipped {
                            self.h = h * factor;
                        }
                        self.stats.steps += 1;
                        if self.stats.steps > MAX_STEPS {
                            return Err(Error::StepUnderflow(self.t));
                        }
                        return Ok(Advance::Step(step));
                    }
                    self.stats.rejected += 1;
                    self.h = h * factor.min(1.0);
                }
            }
        }
    }
}

/// Accepted steps of an integration, with dense output.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    label: String,
    times: Vec<f64>,
    points: Vec<Vec<f64>>,
    derivatives: Vec<Vec<f64>>,
    truncated: bool,
    stats: IntegratorStats,
}

impl Trajectory {
    pub(crate) fn start(label: String, t0: f64, x0: Vec<f64>, f0: Vec<f64>) -> Self {
        Trajectory {
            label,
            times: vec![t0],
            points: vec![x0],
            derivatives: vec![f0],
            truncated: false,
            stats: IntegratorStats::default(),
        }
    }

    pub(crate) fn push(&mut self, step: Step) {
        self.times.push(step.t1);
        self.points.push(step.x1);
        self.derivatives.push(step.f1);
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// True when integration stopped early at the edge of the chart.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn stats(&self) -> &IntegratorStats {
        &self.stats
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().expect("nonempty")
    }

    pub fn end(&self) -> &[f64] {
        self.points.last().expect("nonempty")
    }

    /// Dense output at `t` within the integrated span.
    pub fn at(&self, t: f64) -> Result<Vec<f64>> {
        let (t0, t1) = (self.times[0], self.end_time());
        if !(t >= t0 && t <= t1) {
            return Err(Error::Input(format!("time {t} outside integrated span [{t0}, {t1}]")));
        }
        let k = match self.times.partition_point(|s| *s <= t) {
            0 => 0,
            i if i >= self.times.len() => self.times.len() - 1,
            i => i - 1,
        };
        if k + 1 >= self.times.len() {
            return Ok(self.points[k].clone());
        }
        Ok(hermite(
            self.times[k],
            &self.points[k],
            &self.derivatives[k],
            self.times[k + 1],
            &self.points[k + 1],
            &self.derivatives[k + 1],
            t,
        ))
    }

    /// `max |g(x_k) - g(x_0)|` over accepted steps.
    pub fn drift(&self, g: impl Fn(&[f64]) -> Result<f64>) -> Result<f64> {
        let g0 = g(&self.points[0])?;
        let mut worst: f64 = 0.0;
        for p in &self.points {
            worst = worst.max((g(p)? - g0).abs());
        }
        Ok(worst)
    }

    /// One row per accepted step, header `t,<coords>`.
    pub fn to_csv(&self, coords: &[String]) -> String {
        let mut out = String::from("t");
        for c in coords {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (t, p) in self.times.iter().zip(&self.points) {
            let _ = write!(out, "{t:.17e}");
            for v in p {
                let _ = write!(out, ",{v:.17e}");
            }
            out.push('\n');
        }
        out
    }

    /// Polyline plot of coordinates `i` (horizontal) and `j` (vertical).
    pub fn to_svg(&self, i: usize, j: usize, coords: &[String]) -> Result<String> {
        let dim = self.points[0].len();
        if i >= dim || j >= dim {
            return Err(Error::Input(format!("projection {i},{j} out of range for dimension {dim}")));
        }
        let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in &self.points {
            xmin = xmin.min(p[i]);
            xmax = xmax.max(p[i]);
            ymin = ymin.min(p[j]);
            ymax = ymax.max(p[j]);
        }
        let span = (xmax - xmin).max(ymax - ymin).max(1e-12);
        let size = 480.0;
        let margin = 20.0;
        let sx = |v: f64| margin + (v - xmin) / span * size;
        let sy = |v: f64| margin + size - (v - ymin) / span * size;
        let mut path = String::new();
        for (k, p) in self.points.iter().enumerate() {
            let _ = write!(path, "{}{:.3},{:.3}", if k == 0 { "" } else { " " }, sx(p[i]), sy(p[j]));
        }
        let name = |k: usize| coords.get(k).cloned().unwrap_or_else(|| format!("x{k}"));
        let total = size + 2.0 * margin;
        Ok(format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{total}\" height=\"{total}\" viewBox=\"0 0 {total} {total}\">\n\
             <title>{} : {} vs {}</title>\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
             <polyline fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\"{path}\"/>\n\
             </svg>\n",
            self.label,
            name(j),
            name(i),
        ))
    }
}

/// Integrates `field` from `x0` over `[0, t_end]`.
pub fn flow<F: Field + ?Sized>(field: &F, x0: &[f64], t_end: f64, opts: &FlowOptions) -> Result<Trajectory> {
    if !(t_end > 0.0) {
        return Err(Error::Input(format!("flow time must be positive, got {t_end}")));
    }
    let mut stepper = Stepper::new(field, 0.0, x0, opts)?;
    let mut traj = Trajectory::start(field.label(), 0.0, x0.to_vec(), stepper.f.clone());
    while stepper.time() < t_end {
        match stepper.advance(t_end)? {
            Advance::Step(step) => traj.push(step),
            Advance::Exited => {
                traj.truncated = true;
                break;
            }
        }
    }
    traj.stats = stepper.stats;
    Ok(traj)
}

/// Flow endpoint and its Jacobian `∂φ_t/∂x` by fixed-step RK4 on jets.
pub fn flow_linearization(field: &VectorField, x0: &[f64], t: f64, steps: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = field.chart().dim();
    if x0.len() != n {
        return Err(Error::Dimension { expected: n, found: x0.len() });
    }
    let eval = |y: &[Jet]| -> Result<Vec<Jet>> {
        field.components().iter().map(|c| c.eval_generic(y)).collect()
    };
    let axpy = |y: &[Jet], k: &[Jet], a: f64| -> Vec<Jet> {
        y.iter()
            .zip(k)
            .map(|(yi, ki)| yi.clone() + ki.clone() * Jet::constant(a))
            .collect()
    };
    let h = t / steps as f64;
    let mut y: Vec<Jet> = x0.iter().enumerate().map(|(i, v)| Jet::variable(*v, i)).collect();
    for _ in 0..steps {
        let k1 = eval(&y)?;
        let k2 = eval(&axpy(&y, &k1, h / 2.0))?;
        let k3 = eval(&axpy(&y, &k2, h / 2.0))?;
        let k4 = eval(&axpy(&y, &k3, h))?;
        y = (0..n)
            .map(|i| {
                y[i].clone()
                    + (k1[i].clone() + (k2[i].clone() + k3[i].clone()) * Jet::constant(2.0) + k4[i].clone())
                        * Jet::constant(h / 6.0)
            })
            .collect();
    }
    let end = y.iter().map(|v| v.re()).collect();
    let jac = y.iter().map(|v| (0..n).map(|j| v.coeff(1 << j)).collect()).collect();
    Ok((end, jac))
}

/// `max |(φ_t^* β)(e_I) - β(e_I)|` over points, coordinate frames `e_I` and
/// times, with `φ_t` the flow of `field`.
pub fn form_drift(field: &VectorField, beta: &KForm, points: &[Vec<f64>], times: &[f64], steps_per_unit: usize) -> Result<f64> {
    let n = field.chart().dim();
    let k = beta.degree();
    let frames = combinations(n, k);
    let basis = |i: usize| -> Vec<f64> { (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect() };
    let mut worst: f64 = 0.0;
    for x in points {
        for &t in times {
            let steps = ((t.abs() * steps_per_unit as f64).ceil() as usize).max(1);
            let (y, jac) = flow_linearization(field, x, t, steps)?;
            for idx in &frames {
                let before: Vec<Vec<f64>> = idx.iter().map(|i| basis(*i)).collect();
                let after: Vec<Vec<f64>> = idx
                    .iter()
                    .map(|i| (0..n).map(|r| jac[r][*i]).collect())
                    .collect();
                let b: Vec<&[f64]> = before.iter().map(Vec::as_slice).collect();
                let a: Vec<&[f64]> = after.iter().map(Vec::as_slice).collect();
                let d = beta.evaluate(&y, &a)? - beta.evaluate(x, &b)?;
                worst = worst.max(d.abs());
            }
        }
    }
    Ok(worst)
}
