//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p reebkit --test acceptance` (add `--release` for
//! representative timings).

use reebkit::catalog::{self, CatalogEntry};
use reebkit::contact::{contact_hamiltonian_field, reeb, rescaling_residual, verify_contact};
use reebkit::dynamics::{detect_period, period_constancy, period_via_integral, Classification, PeriodOptions};
use reebkit::reduction::{integrality_report, integrate_refined};
use reebkit::sampling::SampleSet;
use reebkit::symplectization::symplectize;
use reebkit::{Chart, KForm, Result, ScalarField, VectorField};
use std::f64::consts::PI;
use std::time::{Duration, Instant};

const START_SEED: u64 = 7;
const PROPERTY_SEED: u64 = 2024;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Result<Verdict> {
    Ok(Verdict { pass, detail })
}

fn criterion_1() -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    for n in 1..=3 {
        let e = catalog::build(&format!("darboux:{n}"))?;
        let r = reeb(&e.contact);
        let dim = e.contact.chart().dim();
        let mut dz = vec!["0"; dim];
        dz[0] = "1";
        let want = VectorField::parse(e.contact.chart(), &dz)?;
        worst = worst.max(r.field().sup_distance(&want, &e.samples)?);
        for x in &e.samples {
            worst = worst.max(r.residual(x)?);
        }
    }
    verdict(worst < 1e-12, format!("max residual {worst:.3e} over n = 1, 2, 3"))
}

fn hopf_periods() -> Result<(Vec<f64>, f64)> {
    let e = catalog::build("hopf:2")?;
    let starts = e.dynamics.random_starts(20, START_SEED);
    let report = period_constancy(&e.dynamics.field, &starts, &PeriodOptions::default())?;
    let periods = report.estimates.iter().filter_map(|p| p.period).collect();
    Ok((periods, report.spread))
}

fn criterion_2() -> Result<Verdict> {
    let (periods, spread) = hopf_periods()?;
    let worst = periods.iter().map(|p| (p - PI).abs()).fold(0.0, f64::max);
    verdict(
        periods.len() == 20 && worst <= 1e-6 && spread <= 2e-6,
        format!("20 starts periodic, max |T - pi| {worst:.2e}, spread {spread:.2e}"),
    )
}

fn criterion_3() -> Result<Verdict> {
    let opts = PeriodOptions::default();
    let axis1 = [1.0, 0.0, 0.0, 0.0];
    let axis2 = [0.0, 0.0, 1.0, 0.0];
    let rational = catalog::build("deformed-hopf:1,2")?;
    let t2 = detect_period(&rational.dynamics.field, &axis2, &opts)?;
    let t1 = detect_period(&rational.dynamics.field, &axis1, &opts)?;
    let ok_rational = t2.period.is_some_and(|t| (t - PI / 2.0).abs() <= 1e-6)
        && t1.period.is_some_and(|t| (t - PI).abs() <= 1e-6);

    let irrational = catalog::build("deformed-hopf:1,sqrt(2)")?;
    let torus = catalog::build("torus-point:0.5,0")?.start.expect("torus start");
    let winding = detect_period(&irrational.dynamics.field, &torus, &opts)?;
    let i1 = detect_period(&irrational.dynamics.field, &axis1, &opts)?;
    let i2 = detect_period(&irrational.dynamics.field, &axis2, &opts)?;
    let ok_irrational = winding.classification == Classification::NonClosedWithinHorizon
        && i1.period.is_some_and(|t| (t - PI).abs() <= 1e-6)
        && i2.period.is_some_and(|t| (t - PI / 2f64.sqrt()).abs() <= 1e-6);
    verdict(
        ok_rational && ok_irrational,
        format!(
            "(1,2): T = {:?}, {:?}; (1,sqrt2): torus {} (closest {:.2e}), axes {:?}, {:?}",
            t2.period, t1.period, winding.classification, winding.residual, i1.period, i2.period
        ),
    )
}

fn criterion_4() -> Result<Verdict> {
    let darboux = catalog::build("darboux:1")?;
    let hopf = catalog::build("hopf:2")?;
    let deformed = catalog::build("deformed-hopf:1,2")?;
    let factor_12 = deformed.conformal_factor.clone().expect("factor");
    let cases: Vec<(&CatalogEntry, ScalarField)> = vec![
        (&darboux, ScalarField::constant(darboux.contact.chart(), 1.0)),
        (&hopf, ScalarField::constant(hopf.contact.chart(), 1.0)),
        (&hopf, factor_12),
        (&darboux, ScalarField::parse("1 + q^2/4", darboux.contact.chart())?),
    ];
    let mut worst: f64 = 0.0;
    for (entry, f) in cases {
        let samples = entry.samples.take(50);
        let sy = symplectize(&entry.contact)?;
        let h = sy.homogeneous_hamiltonian(&f)?;
        let projected = sy.project_to_contact(&sy.hamiltonian_field(&h)?, &samples)?;
        let rescaled = verify_contact(&entry.contact.eta().mul_field(&f)?, &samples)?;
        worst = worst.max(projected.sup_distance(reeb(&rescaled).field(), &samples)?);
    }
    verdict(worst <= 1e-8, format!("max pointwise gap {worst:.3e} over 4 factors"))
}

fn criterion_5() -> Result<Verdict> {
    let e = catalog::build("darboux:1")?;
    let chart = e.contact.chart();
    let mut near = vec![vec![0.0; 3]];
    near.extend(SampleSet::uniform(&Chart::new("box", &["z", "q", "p"])?.with_sample_box(vec![(-0.1, 0.1); 3])?, 20, PROPERTY_SEED).points().iter().cloned());
    let near = SampleSet::new(near);
    let constant = rescaling_residual(&e.contact, &ScalarField::constant(chart, 3.0), &near)?;
    let affine = rescaling_residual(&e.contact, &ScalarField::parse("1 + q/2", chart)?, &near)?;
    verdict(
        constant <= 1e-9 && affine >= 0.1,
        format!("constant f: {constant:.2e}; f = 1 + q/2: {affine:.4}"),
    )
}

fn criterion_6() -> Result<Verdict> {
    let e = catalog::build("hopf:2")?;
    let fib = e.fibration.as_ref().expect("fibration");
    let pullback = fib.pullback_defect(1, PROPERTY_SEED)?;
    let omega = fib.reduce();
    let integral = integrate_refined(|x, u, v| omega.eval(x, u, v), 5, false)?;
    let report = integrality_report(integral.value, 0.5, integral.error)?;
    let measured = detect_period(&e.dynamics.field, &e.dynamics.random_starts(1, START_SEED)[0], &PeriodOptions::default())?
        .period
        .unwrap_or(f64::NAN);
    let loop_gap = (measured - integral.value).abs();
    verdict(
        pullback <= 1e-8
            && (integral.value - PI).abs() <= 1e-3
            && (report.quotient - 1.0).abs() <= 1e-2
            && report.pass
            && loop_gap <= 2e-3,
        format!(
            "pullback {pullback:.2e}; integral {:.9} (err {:.1e}); quotient {:.6} {}; |2 pi hbar - integral| {loop_gap:.1e}",
            integral.value,
            integral.error,
            report.quotient,
            report.verdict()
        ),
    )
}

/// `(L_X α)_j = X^i ∂_i α_j + α_i ∂_j X^i`, computed directly.
fn lie_of_one_form(alpha: &KForm, x: &VectorField, p: &[f64]) -> Result<Vec<f64>> {
    let n = p.len();
    let xs = x.eval(p)?;
    let mut out = vec![0.0; n];
    for (j, slot) in out.iter_mut().enumerate() {
        let grad = alpha.coefficient(&[j]).gradient(p)?;
        for i in 0..n {
            *slot += xs[i] * grad[i];
            *slot += alpha.coefficient(&[i]).eval(p)? * x.components()[i].partial(p, j)?;
        }
    }
    Ok(out)
}

fn criterion_7() -> Result<Verdict> {
    let names = [
        "darboux:1",
        "darboux:2",
        "darboux:3",
        "hopf:2",
        "hopf:3",
        "deformed-hopf:1,2",
        "std-contactification:canonical",
        "std-contactification:symmetric",
    ];
    let mut worst = [0.0f64; 6];
    for name in names {
        let e = catalog::build(name)?;
        let chart = e.contact.chart();
        let samples = SampleSet::uniform(chart, 100, PROPERTY_SEED);
        let eta = e.contact.eta();
        let d_eta = e.contact.d_eta();
        let r = reeb(&e.contact);
        // d∘d on the contact form and on a coefficient function
        let f = KForm::scalar(&eta.coefficient(&[0]).try_add(&ScalarField::coordinate(chart, chart.dim() - 1))?);
        worst[0] = worst[0]
            .max(d_eta.exterior_derivative().sup_norm(&samples)?)
            .max(f.exterior_derivative().exterior_derivative().sup_norm(&samples)?);
        // Cartan formula against the coordinate formula
        let lie = eta.lie_derivative(r.field())?;
        for p in samples.take(30).points() {
            let direct = lie_of_one_form(eta, r.field(), p)?;
            for (j, v) in direct.iter().enumerate() {
                worst[1] = worst[1].max((lie.coefficient(&[j]).eval(p)? - v).abs());
            }
        }
        // graded commutativity
        let g1 = eta.wedge(d_eta)?.sup_distance(&d_eta.wedge(eta)?, &samples)?;
        let g2 = eta.wedge(eta)?.sup_norm(&samples)?;
        worst[2] = worst[2].max(g1).max(g2);
        // symplectization identities
        let sy = symplectize(&e.contact)?;
        let ids = sy.identities(&SampleSet::uniform(sy.chart(), 100, PROPERTY_SEED))?;
        worst[3] = worst[3].max(ids.homogeneity);
        worst[4] = worst[4].max(ids.contraction).max(ids.d_theta);
        // H = i_{X_H} θ on the linear cone
        if let (Some(cone), Some(h)) = (&e.cone, &e.hamiltonian) {
            let pts = SampleSet::uniform(cone.chart(), 100, PROPERTY_SEED);
            let xh = cone.hamiltonian_field(h)?;
            let ih = KForm::scalar(h).sub(&cone.theta().interior_product(&xh)?)?;
            worst[5] = worst[5].max(ih.sup_norm(&pts)?);
            let ids = cone.identities(&pts)?;
            worst[3] = worst[3].max(ids.homogeneity);
            worst[4] = worst[4].max(ids.contraction);
        }
    }
    let pass = worst.iter().all(|w| *w <= 1e-9);
    verdict(
        pass,
        format!(
            "d∘d {:.1e}, Cartan {:.1e}, graded {:.1e}, L_nu {:.1e}, i_nu {:.1e}, H - i_X theta {:.1e}",
            worst[0], worst[1], worst[2], worst[3], worst[4], worst[5]
        ),
    )
}

fn criterion_8() -> Result<Verdict> {
    let darboux = catalog::build("darboux:1")?;
    let hopf = catalog::build("hopf:2")?;
    let deformed = catalog::build("deformed-hopf:1,2")?;
    let h12 = deformed.conformal_factor.clone().expect("factor");
    let cases = vec![
        (&darboux, ScalarField::constant(darboux.contact.chart(), 1.0)),
        (&darboux, ScalarField::parse("q", darboux.contact.chart())?),
        (&hopf, h12),
    ];
    let mut worst: f64 = 0.0;
    for (entry, g) in cases {
        let samples = entry.samples.take(50);
        let xg = contact_hamiltonian_field(&entry.contact, &g)?;
        let lie = entry.contact.eta().lie_derivative(&xg)?;
        let rg = reeb(&entry.contact).field().apply(&g)?;
        let want = entry.contact.eta().mul_field(&rg)?;
        worst = worst.max(lie.sup_distance(&want, &samples)?);
    }
    verdict(worst <= 1e-8, format!("max |L_X eta - R(G) eta| {worst:.3e}"))
}

fn criterion_9() -> Result<Verdict> {
    let e = catalog::build("hopf:2")?;
    let g = e.trivialization.as_ref().expect("trivialization");
    let base = [[0.3, 0.0], [0.9, 1.0], [1.5708, -2.0], [2.2, 3.0], [2.9, 0.5]];
    let values = base
        .iter()
        .map(|x| period_via_integral(g, x))
        .collect::<Result<Vec<f64>>>()?;
    let worst = values.iter().map(|v| (v - PI).abs()).fold(0.0, f64::max);
    let measured = detect_period(&e.dynamics.field, &e.dynamics.random_starts(1, START_SEED)[0], &PeriodOptions::default())?
        .period
        .unwrap_or(f64::NAN);
    let gap = values.iter().map(|v| (v - measured).abs()).fold(0.0, f64::max);
    verdict(
        worst <= 1e-7 && gap <= 1e-6,
        format!("max |integral - pi| {worst:.2e} at 5 base points; gap to detected period {gap:.2e}"),
    )
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Result<Verdict>); 9] = [
        ("Reeb field of Darboux forms", Duration::from_secs(1), criterion_1),
        ("round sphere period and constancy", Duration::from_secs(30), criterion_2),
        ("deformed sphere periods and closure", Duration::from_secs(60), criterion_3),
        ("symplectization projection equals rescaled Reeb field", Duration::from_secs(5), criterion_4),
        ("rescaling falsification", Duration::from_secs(1), criterion_5),
        ("reduction and integrality", Duration::from_secs(60), criterion_6),
        ("exterior calculus properties", Duration::from_secs(10), criterion_7),
        ("contact Hamiltonian law", Duration::from_secs(5), criterion_8),
        ("period integral consistency", Duration::from_secs(5), criterion_9),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let index = i + 1;
        if !only.is_empty() && !only.contains(&index) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (pass, detail) = match outcome {
            Ok(v) => (v.pass && elapsed <= *limit, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {index} [{}] {name}: {detail} ({:.2} s, limit {} s)",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
