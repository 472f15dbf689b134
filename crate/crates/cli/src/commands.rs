//! Subcommand implementations. Each one fills a [`Report`] and returns an
//! exit code; errors are mapped to codes by [`exit_code`].

use crate::manifest::{self, RunBlock};
use crate::report::{fmt_f64, Report};
use crate::{CatalogAction, Command, Outputs, Source, Tolerances};
use anyhow::{anyhow, bail, Context, Result};
use reebkit::catalog::{self, CatalogEntry};
use reebkit::contact::{contact_hamiltonian_field, reeb, rescaling_defect, rescaling_residual, verify_contact, IDENTITY_TOL};
use reebkit::dynamics::{detect_period, flow, period_constancy, Classification, FlowOptions, PeriodOptions, Trajectory};
use reebkit::reduction::{fibration::project_tangent, integrality_report, integrate_refined, Fibration, SurfaceMesh};
use reebkit::sampling::{SampleSet, DEFAULT_SAMPLES};
use reebkit::symplectization::symplectize;
use reebkit::{parse_expr, Chart, Error, ScalarField};
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

pub const DEFAULT_SEED: u64 = 7;
const DEFAULT_MESH_LEVEL: u32 = 5;
const DEFAULT_FLOW_TIME: f64 = 1.0;
const RESCALE_POINTS: usize = 20;
const REEB_PRESERVED_TOL: f64 = 1e-9;
const LAW_TOL: f64 = 1e-8;
const PULLBACK_TOL: f64 = 1e-8;

pub struct Outcome {
    pub report: Report,
    pub code: u8,
    pub error: Option<anyhow::Error>,
}

pub fn run(command: Command) -> Outcome {
    let mut report = Report::new(command_name(&command));
    match execute(command, &mut report) {
        Ok(code) => Outcome { report, code, error: None },
        Err(err) => {
            let code = exit_code(&err);
            report.put("status", "error");
            report.put("exit_code", code);
            Outcome {
                report,
                code,
                error: Some(err),
            }
        }
    }
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Verify { .. } => "verify",
        Command::Reeb { .. } => "reeb",
        Command::Hamfield { .. } => "hamfield",
        Command::RescaleFalsify { .. } => "rescale-falsify",
        Command::Symplectize { .. } => "symplectize",
        Command::Flow { .. } => "flow",
        Command::Period { .. } => "period",
        Command::PeriodConstancy { .. } => "period-constancy",
        Command::Reduce { .. } => "reduce",
        Command::Integrality { .. } => "integrality",
        Command::Exactness { .. } => "exactness",
        Command::Catalog { .. } => "catalog",
    }
}

/// 1 for bad input, 2 for a quantitative failure, 3 for a numerical one.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    let Some(e) = err.chain().find_map(|c| c.downcast_ref::<Error>()) else {
        return 1;
    };
    match e {
        Error::Parse(_)
        | Error::Chart(_)
        | Error::ChartMismatch(..)
        | Error::Dimension { .. }
        | Error::EvenDimension(_)
        | Error::Parameter(_)
        | Error::Input(_)
        | Error::NoGlobalSection
        | Error::OutsideSections(_) => 1,
        Error::Degenerate { .. }
        | Error::Homogeneity(_)
        | Error::Transversality { .. }
        | Error::NotInvariant(_)
        | Error::NotPeriodic(_)
        | Error::NonPositive { .. }
        | Error::NonPeriodicStart { .. }
        | Error::SectionOverlap { .. }
        | Error::Invariant(_) => 2,
        Error::Solver { .. } | Error::StepUnderflow(_) | Error::Domain { .. } => 3,
    }
}

fn verdict(report: &mut Report, pass: bool) -> u8 {
    report.put("verdict", if pass { "PASS" } else { "FAIL" });
    if pass {
        0
    } else {
        2
    }
}

struct Problem {
    entry: CatalogEntry,
    run: RunBlock,
    seed: u64,
}

fn load(source: &Source, report: &mut Report) -> Result<Problem> {
    let (mut entry, run) = match (&source.example, &source.manifest) {
        (Some(name), None) => {
            report.put("example", name);
            (catalog::build(name)?, RunBlock::default())
        }
        (None, Some(path)) => {
            report.put("manifest", path.display());
            let m = manifest::load(path)?;
            let n = source.samples.or(m.run.samples).unwrap_or(DEFAULT_SAMPLES);
            let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            (m.entry(&label, n)?, m.run)
        }
        _ => bail!(Error::Input("exactly one of --example and --manifest is required".into())),
    };
    if let (Some(n), Some(_)) = (source.samples, &source.example) {
        entry.samples = SampleSet::halton(entry.contact.chart(), n);
    }
    let seed = source.seed.or(run.seed).unwrap_or(DEFAULT_SEED);
    report.put("chart", entry.contact.chart().name());
    report.put("samples", entry.samples.len());
    report.put("seed", seed);
    Ok(Problem { entry, run, seed })
}

fn period_options(t: &Tolerances, run: &RunBlock, report: &mut Report) -> PeriodOptions {
    let d = PeriodOptions::default();
    let opts = PeriodOptions {
        flow: FlowOptions {
            tol: t.tol.or(run.tol).unwrap_or(d.flow.tol),
            ..d.flow
        },
        return_tol: t.return_tol.or(run.return_tol).unwrap_or(d.return_tol),
        horizon: t.horizon.or(run.horizon).unwrap_or(d.horizon),
        ..d
    };
    report.num("tol", opts.flow.tol);
    report.num("return_tol", opts.return_tol);
    report.num("horizon", opts.horizon);
    report.put("max_divisor", opts.max_divisor);
    report.num("min_speed", opts.min_speed);
    opts
}

/// A constant expression such as `0.5` or `sqrt(2)/2`.
fn constant(src: &str) -> Result<f64> {
    let chart = Arc::new(Chart::new("constants", &["unused"])?);
    let f = parse_expr(src.trim(), &chart)?;
    if f.depends_on_point() {
        bail!(Error::Input(format!("{src:?} is not a constant")));
    }
    Ok(f.eval(&[0.0])?)
}

fn parse_point(src: &str, dim: usize) -> Result<Vec<f64>> {
    let x = src.split(',').map(constant).collect::<Result<Vec<f64>>>()?;
    if x.len() != dim {
        bail!(Error::Dimension {
            expected: dim,
            found: x.len()
        });
    }
    Ok(x)
}

/// `random:seed=N` or `random:seed=N,count=M`; missing keys keep defaults.
fn parse_random(spec: &str, seed: u64, count: usize) -> Result<Option<(u64, usize)>> {
    let Some(rest) = spec.strip_prefix("random") else {
        return Ok(None);
    };
    let (mut seed, mut count) = (seed, count);
    for kv in rest.trim_start_matches(':').split(',').filter(|s| !s.is_empty()) {
        let (k, v) = kv.split_once('=').ok_or_else(|| Error::Input(format!("expected key=value, got {kv:?}")))?;
        let bad = || Error::Input(format!("bad value {v:?} for {k}"));
        match k.trim() {
            "seed" => seed = v.trim().parse().map_err(|_| bad())?,
            "count" => count = v.trim().parse().map_err(|_| bad())?,
            _ => bail!(Error::Input(format!("unknown key {k:?} in {spec:?}"))),
        }
    }
    Ok(Some((seed, count)))
}

fn resolve_start(spec: Option<&str>, p: &Problem, report: &mut Report) -> Result<Vec<f64>> {
    let dyn_ = &p.entry.dynamics;
    let dim = dyn_.chart.dim();
    let x = match spec {
        Some(s) => match parse_random(s, p.seed, 1)? {
            Some((seed, _)) => {
                report.put("start_source", format!("random seed {seed}"));
                dyn_.random_starts(1, seed).remove(0)
            }
            None => {
                report.put("start_source", "given");
                parse_point(s, dim)?
            }
        },
        None => match p.run.start.clone().or_else(|| p.entry.start.clone()) {
            Some(x) => {
                report.put("start_source", "entry");
                x
            }
            None => {
                report.put("start_source", format!("random seed {}", p.seed));
                dyn_.random_starts(1, p.seed).remove(0)
            }
        },
    };
    if x.len() != dim {
        bail!(Error::Dimension { expected: dim, found: x.len() });
    }
    if !dyn_.chart.contains(&x) {
        bail!(Error::Input(format!("start {x:?} lies outside chart {}", dyn_.chart.name())));
    }
    report.put("dynamics_chart", dyn_.chart.name());
    report.point("start", &x);
    Ok(x)
}

fn write_outputs(traj: &Trajectory, coords: &[String], out: &Outputs, report: &mut Report) -> Result<()> {
    if let Some(path) = &out.csv {
        write_file(path, &traj.to_csv(coords))?;
        report.put("csv", path.display());
    }
    if let Some(path) = &out.svg {
        let (i, j) = out
            .proj
            .split_once(',')
            .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
            .ok_or_else(|| Error::Input(format!("--proj expects i,j, got {:?}", out.proj)))?;
        write_file(path, &traj.to_svg(i, j, coords)?)?;
        report.put("svg", path.display());
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn factor_or(src: Option<&str>, p: &Problem) -> Result<Option<ScalarField>> {
    match src {
        Some(s) => Ok(Some(ScalarField::parse(s, p.entry.contact.chart())?)),
        None => Ok(p.entry.conformal_factor.clone()),
    }
}

fn require_fibration(p: &Problem) -> Result<&Fibration> {
    p.entry
        .fibration
        .as_ref()
        .ok_or_else(|| anyhow!(Error::Input(format!("{} has no fibration", p.entry.name))))
}

fn execute(command: Command, report: &mut Report) -> Result<u8> {
    match command {
        Command::Verify { source } => {
            let p = load(&source, report)?;
            let c = &p.entry.contact;
            report.put("eta", c.eta());
            report.put("n", c.n());
            let v = c.verification();
            report.num("volume_tol", reebkit::contact::VOLUME_TOL);
            report.num("min_volume", v.min_volume);
            report.point("worst_point", &v.worst_point);
            Ok(verdict(report, true))
        }
        Command::Reeb { source, at } => {
            let p = load(&source, report)?;
            let r = reeb(&p.entry.contact);
            let mut worst: f64 = 0.0;
            for x in &p.entry.samples {
                worst = worst.max(r.residual(x)?);
            }
            let x = match at {
                Some(s) => parse_point(&s, p.entry.contact.chart().dim())?,
                None => p.entry.samples.points()[0].clone(),
            };
            report.point("at", &x);
            report.point("reeb", &r.eval(&x)?);
            report.num("identity_tol", IDENTITY_TOL);
            report.num("max_residual", worst);
            Ok(verdict(report, worst <= IDENTITY_TOL))
        }
        Command::Hamfield { source, hamiltonian, at } => {
            let p = load(&source, report)?;
            let c = &p.entry.contact;
            let g = match hamiltonian {
                Some(s) => ScalarField::parse(&s, c.chart())?,
                None => p
                    .entry
                    .hamiltonian
                    .clone()
                    .filter(|h| h.chart() == c.chart())
                    .ok_or_else(|| Error::Input("hamfield needs --hamiltonian".into()))?,
            };
            report.put("hamiltonian", &g);
            let xg = contact_hamiltonian_field(c, &g)?;
            let x = match at {
                Some(s) => parse_point(&s, c.chart().dim())?,
                None => p.entry.samples.points()[0].clone(),
            };
            report.point("at", &x);
            report.point("field", &xg.eval(&x)?);
            let lie = c.eta().lie_derivative(&xg)?;
            let want = c.eta().mul_field(&reeb(c).field().apply(&g)?)?;
            let defect = lie.sup_distance(&want, &p.entry.samples)?;
            report.num("law_tol", LAW_TOL);
            report.num("law_defect", defect);
            Ok(verdict(report, defect <= LAW_TOL))
        }
        Command::RescaleFalsify { source, factor, radius } => {
            let p = load(&source, report)?;
            let c = &p.entry.contact;
            let f = factor_or(factor.as_deref(), &p)?
                .ok_or_else(|| Error::Input("rescale-falsify needs --factor".into()))?;
            report.put("factor", &f);
            let dim = c.chart().dim();
            let origin = vec![0.0; dim];
            let near_chart = Chart::new("near-origin", c.chart().coords())?.with_sample_box(vec![(-radius, radius); dim])?;
            let mut points = vec![origin.clone()];
            points.extend(SampleSet::uniform(&near_chart, source.samples.unwrap_or(RESCALE_POINTS), p.seed).points().iter().cloned());
            let points = SampleSet::new(points);
            report.num("radius", radius);
            report.put("points", points.len());
            let at_origin = rescaling_defect(c, &f)?.sup_norm(&SampleSet::new(vec![origin]))?;
            let residual = rescaling_residual(c, &f, &points)?;
            report.num("residual_at_origin", at_origin);
            report.num("residual", residual);
            report.num("threshold", REEB_PRESERVED_TOL);
            let preserved = residual <= REEB_PRESERVED_TOL;
            report.put("verdict", if preserved { "REEB-PRESERVED" } else { "NOT-A-REEB" });
            Ok(0)
        }
        Command::Symplectize { source, factor } => {
            let p = load(&source, report)?;
            let sy = symplectize(&p.entry.contact)?;
            report.put("extended_chart", sy.chart().name());
            let pts = SampleSet::halton(sy.chart(), p.entry.samples.len());
            let ids = sy.identities(&pts)?;
            report.num("d_theta_defect", ids.d_theta);
            report.num("contraction_defect", ids.contraction);
            report.num("homogeneity_defect", ids.homogeneity);
            let mut pass = ids.max() <= IDENTITY_TOL;
            if let Some(f) = factor_or(factor.as_deref(), &p)? {
                report.put("factor", &f);
                let samples = p.entry.samples.take(50);
                let h = sy.homogeneous_hamiltonian(&f)?;
                let projected = sy.project_to_contact(&sy.hamiltonian_field(&h)?, &samples)?;
                let rescaled = verify_contact(&p.entry.contact.eta().mul_field(&f)?, &samples)?;
                let gap = projected.sup_distance(reeb(&rescaled).field(), &samples)?;
                report.num("projection_gap", gap);
                pass &= gap <= LAW_TOL;
            }
            report.num("identity_tol", IDENTITY_TOL);
            Ok(verdict(report, pass))
        }
        Command::Flow {
            source,
            tolerances,
            outputs,
            start,
            time,
        } => {
            let p = load(&source, report)?;
            let opts = period_options(&tolerances, &p.run, report).flow;
            let x0 = resolve_start(start.as_deref(), &p, report)?;
            let t = time.or(p.run.time).unwrap_or(DEFAULT_FLOW_TIME);
            report.num("time", t);
            let d = &p.entry.dynamics;
            let traj = flow(&d.field, &x0, t, &opts)?;
            report.num("end_time", traj.end_time());
            report.point("end", traj.end());
            let s = traj.stats();
            report.put("steps", s.steps);
            report.put("rejected", s.rejected);
            report.put("evaluations", s.evaluations);
            report.put("truncated", traj.truncated());
            if let Some(g) = &d.constraint {
                report.num("constraint_drift", traj.drift(|x| g.eval(x))?);
            }
            write_outputs(&traj, d.chart.coords(), &outputs, report)?;
            if traj.truncated() {
                report.put("status", "left the chart");
                return Ok(3);
            }
            report.put("status", "ok");
            Ok(0)
        }
        Command::Period {
            source,
            tolerances,
            outputs,
            start,
        } => {
            let p = load(&source, report)?;
            let opts = period_options(&tolerances, &p.run, report);
            let x0 = resolve_start(start.as_deref(), &p, report)?;
            let d = &p.entry.dynamics;
            let est = detect_period(&d.field, &x0, &opts)?;
            report.put("classification", est.classification);
            report.put("period", est.period.map_or("none".into(), fmt_f64));
            report.put("first_return", est.first_return.map_or("none".into(), fmt_f64));
            report.num("residual", est.residual);
            for (k, r) in &est.divisor_residuals {
                report.num(format!("divisor_residual[{k}]"), *r);
            }
            report.put("candidates", est.candidates);
            report.put("truncated", est.truncated);
            report.put("steps", est.stats.steps);
            report.put("rejected", est.stats.rejected);
            if outputs.csv.is_some() || outputs.svg.is_some() {
                let traj = flow(&d.field, &x0, est.period.unwrap_or(opts.horizon), &opts.flow)?;
                write_outputs(&traj, d.chart.coords(), &outputs, report)?;
            }
            Ok(match est.classification {
                Classification::Undetermined => 3,
                _ => 0,
            })
        }
        Command::PeriodConstancy {
            source,
            tolerances,
            starts,
            count,
        } => {
            let p = load(&source, report)?;
            let opts = period_options(&tolerances, &p.run, report);
            let d = &p.entry.dynamics;
            let spec = starts.unwrap_or_else(|| "random".into());
            let points = match parse_random(&spec, p.seed, count)? {
                Some((seed, count)) => {
                    report.put("starts", format!("random seed {seed} count {count}"));
                    d.random_starts(count, seed)
                }
                None => {
                    let pts = spec
                        .split(';')
                        .map(|s| parse_point(s, d.chart.dim()))
                        .collect::<Result<Vec<_>>>()?;
                    report.put("starts", format!("given count {}", pts.len()));
                    pts
                }
            };
            let c = period_constancy(&d.field, &points, &opts)?;
            for (i, e) in c.estimates.iter().enumerate() {
                report.put(format!("period[{i}]"), e.period.map_or("none".into(), fmt_f64));
            }
            report.num("min", c.min);
            report.num("max", c.max);
            report.num("spread", c.spread);
            report.num("allowed_spread", c.allowed_spread);
            Ok(verdict(report, c.pass))
        }
        Command::Reduce { source, at } => {
            let p = load(&source, report)?;
            let fib = require_fibration(&p)?;
            report.put("base_chart", fib.base_chart.name());
            report.put("sections", fib.sections.len());
            let check = fib.check()?;
            let pullback = fib.pullback_defect(1, p.seed)?;
            let overlap = fib.overlap_defect(p.seed)?;
            report.num("section_identity", check.section_identity);
            report.num("reeb_vertical", check.reeb_vertical);
            report.num("pullback_defect", pullback);
            report.num("overlap_defect", overlap);
            let x = match at {
                Some(s) => parse_point(&s, fib.base_chart.dim())?,
                None => fib.base_samples.points()[0].clone(),
            };
            let (u, v) = orthonormal_pair(fib, &x)?;
            let omega = fib.reduce();
            report.point("at", &x);
            report.put("section", &omega.section_for(&x)?.label);
            report.point("u", &u);
            report.point("v", &v);
            report.num("omega_uv", omega.eval(&x, &u, &v)?);
            report.num("identity_tol", IDENTITY_TOL);
            report.num("pullback_tol", PULLBACK_TOL);
            let pass = check.section_identity <= IDENTITY_TOL
                && check.reeb_vertical <= IDENTITY_TOL
                && pullback <= PULLBACK_TOL
                && overlap <= PULLBACK_TOL;
            Ok(verdict(report, pass))
        }
        Command::Integrality {
            source,
            tolerances,
            mesh_level,
            hbar,
            reverse,
            off,
        } => {
            let p = load(&source, report)?;
            let fib = require_fibration(&p)?;
            if fib.base_chart.dim() != 3 || fib.base_constraints.len() != 1 {
                bail!(Error::Input(format!("integrality needs a fibration over the unit sphere in R^3, base is {}", fib.base_chart.name())));
            }
            let level = mesh_level.or(p.run.mesh_level).unwrap_or(DEFAULT_MESH_LEVEL);
            report.put("mesh_level", level);
            report.put("orientation", if reverse { "inward" } else { "outward" });
            let hbar = match hbar.or(p.run.hbar).or(fib.hbar) {
                Some(h) => {
                    report.put("hbar_source", "given");
                    h
                }
                None => {
                    let opts = period_options(&tolerances, &p.run, report);
                    let x0 = resolve_start(None, &p, report)?;
                    let est = detect_period(&p.entry.dynamics.field, &x0, &opts)?;
                    let t = est.period.ok_or_else(|| {
                        Error::NonPeriodicStart {
                            index: 0,
                            detail: format!("{} (closest approach {:e})", est.classification, est.residual),
                        }
                    })?;
                    report.put("hbar_source", "measured period / 2pi");
                    report.num("period", t);
                    t / (2.0 * PI)
                }
            };
            let omega = fib.reduce();
            let integral = integrate_refined(|x, u, v| omega.eval(x, u, v), level, reverse)?;
            report.num("integral", integral.value);
            report.num("coarse", integral.coarse);
            report.num("rate", integral.rate);
            report.num("quad_error", integral.error);
            report.num("extrapolated", integral.extrapolated);
            let r = integrality_report(integral.value, hbar, integral.error)?;
            report.num("hbar", r.hbar);
            report.num("quotient", r.quotient);
            report.put("nearest", r.nearest);
            report.num("deviation", r.deviation);
            report.num("threshold", r.threshold);
            if let Some(path) = off {
                let mesh = SurfaceMesh::icosphere(level);
                let mesh = if reverse { mesh.reversed() } else { mesh };
                write_file(&path, &mesh.to_off())?;
                report.put("off", path.display());
            }
            Ok(verdict(report, r.pass))
        }
        Command::Exactness { source } => {
            let p = load(&source, report)?;
            let fib = require_fibration(&p)?;
            let w = fib.exactness_witness()?;
            report.put("section", &w.section);
            report.put("primitive", &w.form);
            report.num("defect", w.defect);
            report.num("identity_tol", IDENTITY_TOL);
            Ok(verdict(report, w.defect <= IDENTITY_TOL))
        }
        Command::Catalog { action } => match action {
            CatalogAction::List => {
                for (i, (template, summary)) in catalog::list().into_iter().enumerate() {
                    report.put(format!("entry[{i}]"), format!("{template}  {summary}"));
                }
                Ok(0)
            }
            CatalogAction::Show { name } => {
                let e = catalog::build(&name)?;
                report.put("name", &e.name);
                report.put("description", &e.description);
                let c = e.contact.chart();
                report.put("chart", c.name());
                report.put("coords", c.coords().join(", "));
                if let Some(b) = c.bounds() {
                    let b: Vec<String> = b.iter().map(|(lo, hi)| format!("[{}, {}]", fmt_f64(*lo), fmt_f64(*hi))).collect();
                    report.put("bounds", b.join(", "));
                }
                report.put("eta", e.contact.eta());
                report.num("min_volume", e.contact.verification().min_volume);
                report.put("dynamics_chart", e.dynamics.chart.name());
                if let Some(h) = &e.hamiltonian {
                    report.put("hamiltonian", h);
                }
                if let Some(f) = &e.conformal_factor {
                    report.put("conformal_factor", f);
                }
                report.put("symplectic_cone", e.cone.is_some());
                report.put("fibration", e.fibration.is_some());
                report.put("period_integrand", e.trivialization.is_some());
                if let Some(x) = &e.start {
                    report.point("start", x);
                }
                Ok(0)
            }
        },
    }
}

/// Orthonormal pair tangent to the base constraints at `x`.
fn orthonormal_pair(fib: &Fibration, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let gradients = fib.base_constraints.iter().map(|g| g.gradient(x)).collect::<reebkit::Result<Vec<_>>>()?;
    let dim = x.len();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        let mut w = project_tangent(&e, &gradients);
        for b in &basis {
            let d: f64 = w.iter().zip(b).map(|(a, c)| a * c).sum();
            w.iter_mut().zip(b).for_each(|(a, c)| *a -= d * c);
        }
        let norm = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-6 {
            basis.push(w.iter().map(|a| a / norm).collect());
        }
        if basis.len() == 2 {
            let v = basis.pop().unwrap();
            return Ok((basis.pop().unwrap(), v));
        }
    }
    bail!(Error::Input(format!("tangent space at {x:?} has dimension below 2")))
}
