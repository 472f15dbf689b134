//! Named example constructions: Darboux space, odd spheres with the standard
//! and deformed contact forms, standard contactifications, and start points
//! on invariant tori.

use crate::contact::{reeb, standard_contactification, verify_contact, ContactForm};
use crate::error::{Error, Result};
use crate::expr::{parse_expr, Chart, ScalarField};
use crate::forms::{parse_form, KForm, SmoothMap, VectorField};
use crate::reduction::{Fibration, Section};
use crate::sampling::{sphere_points, SampleSet};
use crate::symplectization::{ScalingAction, Symplectization};
use std::sync::Arc;

/// Seeds of the fixed sample sets carried by fibrations.
pub const TOTAL_SAMPLE_SEED: u64 = 11;
pub const BASE_SAMPLE_SEED: u64 = 12;

/// Where and how an entry's flow is integrated.
#[derive(Debug, Clone)]
pub struct Dynamics {
    pub chart: Arc<Chart>,
    pub field: VectorField,
    /// A 1-form on `chart` whose restriction is the entry's contact form.
    pub form: KForm,
    /// Map from the contact chart into `chart`, when they differ.
    pub embedding: Option<SmoothMap>,
    /// Level-set function of the invariant hypersurface, when there is one.
    pub constraint: Option<ScalarField>,
}

impl Dynamics {
    /// `count` start points from a named seed: uniform on the sphere for
    /// sphere entries, uniform in the sample box otherwise.
    pub fn random_starts(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        match self.constraint {
            Some(_) => sphere_points(self.chart.dim(), count, seed),
            None => SampleSet::uniform(&self.chart, count, seed).points().to_vec(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub description: String,
    pub contact: ContactForm,
    pub samples: SampleSet,
    pub dynamics: Dynamics,
    /// Homogeneous Hamiltonian on the dynamics chart generating its field.
    pub hamiltonian: Option<ScalarField>,
    /// Conformal factor `F` with contact form `η/F` on the contact chart.
    pub conformal_factor: Option<ScalarField>,
    /// Linear symplectic cone containing the dynamics chart.
    pub cone: Option<Symplectization>,
    pub fibration: Option<Fibration>,
    /// Fiber period integrand on `(θ, φ, τ)`.
    pub trivialization: Option<ScalarField>,
    pub start: Option<Vec<f64>>,
}

/// Templates accepted by [`build`], with one-line summaries.
pub fn list() -> Vec<(&'static str, &'static str)> {
    vec![
        ("darboux:n", "R^(2n+1) with dz - sum p_i dq^i, n >= 1"),
        ("hopf:n", "unit sphere S^(2n-1) in C^n with the restricted Liouville form, n >= 2"),
        ("deformed-hopf:a,b", "S^3 with the Liouville form divided by a|z1|^2 + b|z2|^2, a, b > 0"),
        ("std-contactification:canonical", "R^2 x R with dt - p dq"),
        ("std-contactification:symmetric", "R^2 x R with dt + (q dp - p dq)/2"),
        ("torus-point:r,phase", "start point on the torus |z1|^2 = r in S^3, 0 < r < 1"),
    ]
}

fn parameter(src: &str) -> Result<f64> {
    let chart = Arc::new(Chart::new("parameters", &["parameter"])?);
    let f = parse_expr(src.trim(), &chart)?;
    if f.depends_on_point() {
        return Err(Error::Parameter(format!("parameter {src:?} is not a constant")));
    }
    f.eval(&[0.0])
}

fn integer(src: &str) -> Result<usize> {
    src.trim()
        .parse()
        .map_err(|_| Error::Parameter(format!("expected a positive integer, got {src:?}")))
}

/// Builds a catalog entry from `template:parameters`.
pub fn build(name: &str) -> Result<CatalogEntry> {
    let (kind, params) = name.split_once(':').unwrap_or((name, ""));
    let args: Vec<&str> = if params.is_empty() { vec![] } else { params.split(',').collect() };
    let want = |n: usize| -> Result<()> {
        if args.len() == n {
            Ok(())
        } else {
            Err(Error::Parameter(format!("{kind} takes {n} parameter(s), got {}", args.len())))
        }
    };
    match kind {
        "darboux" => {
            want(1)?;
            darboux(integer(args[0])?)
        }
        "hopf" => {
            want(1)?;
            hopf(integer(args[0])?)
        }
        "deformed-hopf" => {
            want(2)?;
            deformed_hopf(parameter(args[0])?, parameter(args[1])?)
        }
        "std-contactification" => {
            want(1)?;
            std_contactification(args[0].trim())
        }
        "torus-point" => {
            want(2)?;
            torus_point(parameter(args[0])?, parameter(args[1])?)
        }
        _ => Err(Error::Parameter(format!("unknown catalog entry {name:?}"))),
    }
}

fn check_volume(entry: &CatalogEntry) -> Result<()> {
    let v = entry.contact.verification().min_volume;
    if !(v > 1e-3) {
        return Err(Error::Invariant(format!(
            "{}: minimum volume coefficient {v:e} below 1e-3",
            entry.name
        )));
    }
    Ok(())
}

pub fn darboux(n: usize) -> Result<CatalogEntry> {
    if n < 1 {
        return Err(Error::Parameter("darboux:n needs n >= 1".into()));
    }
    // darboux:1 uses plain q, p
    let index = |i: usize| if n == 1 { String::new() } else { i.to_string() };
    let mut coords = vec!["z".to_string()];
    coords.extend((1..=n).map(|i| format!("q{}", index(i))));
    coords.extend((1..=n).map(|i| format!("p{}", index(i))));
    let chart = Arc::new(Chart::new(&format!("darboux{n}"), &coords)?);
    let src = std::iter::once("dz".to_string())
        .chain((1..=n).map(|i| format!("p{0}*dq{0}", index(i))))
        .collect::<Vec<_>>()
        .join(" - ");
    let eta = parse_form(&src, &chart)?;
    let samples = SampleSet::default_for(&chart);
    let contact = verify_contact(&eta, &samples)?;
    let field = reeb(&contact).field().clone();
    let entry = CatalogEntry {
        name: format!("darboux:{n}"),
        description: format!("Darboux space R^{} with contact form {src}", 2 * n + 1),
        dynamics: Dynamics {
            chart: chart.clone(),
            field,
            form: eta,
            embedding: None,
            constraint: None,
        },
        contact,
        samples,
        hamiltonian: None,
        conformal_factor: None,
        cone: None,
        fibration: None,
        trivialization: None,
        start: None,
    };
    check_volume(&entry)?;
    Ok(entry)
}

/// `C^n = R^{2n}` with coordinates `(q1, p1, ..., qn, pn)`.
fn ambient(n: usize) -> Result<Arc<Chart>> {
    let coords: Vec<String> = (1..=n).flat_map(|k| [format!("q{k}"), format!("p{k}")]).collect();
    Ok(Arc::new(Chart::new(&format!("C{n}"), &coords)?))
}

fn sum_of_squares(n: usize, weights: &[f64]) -> String {
    (1..=n)
        .map(|k| format!("{}*(q{k}^2 + p{k}^2)", weights[k - 1]))
        .collect::<Vec<_>>()
        .join(" + ")
}

/// Sphere pieces shared by the round and deformed entries.
struct Sphere {
    n: usize,
    chart: Arc<Chart>,
    ambient: Arc<Chart>,
    embedding: SmoothMap,
    liouville: KForm,
    cone: Symplectization,
}

fn sphere(n: usize) -> Result<Sphere> {
    // graph over the hemisphere q1 > 0, coordinates (p1, q2, p2, ...)
    let mut coords = vec!["p1".to_string()];
    coords.extend((2..=n).flat_map(|k| [format!("q{k}"), format!("p{k}")]));
    let c = 0.95 / ((2 * n - 1) as f64).sqrt();
    let chart = Arc::new(Chart::new(&format!("S{}", 2 * n - 1), &coords)?.with_bounds(vec![(-c, c); 2 * n - 1])?);
    let ambient = ambient(n)?;
    let radicand = coords.iter().map(|x| format!(" - {x}^2")).collect::<String>();
    let mut comps = vec![format!("sqrt(1{radicand})")];
    comps.extend(coords.iter().cloned());
    let comp_refs: Vec<&str> = comps.iter().map(String::as_str).collect();
    let embedding = SmoothMap::parse(&chart, &ambient, &comp_refs)?;
    let liouville_src = (1..=n)
        .map(|k| format!("q{k}*dp{k} - p{k}*dq{k}"))
        .collect::<Vec<_>>()
        .join(" + ");
    let liouville = parse_form(&format!("0.5*({liouville_src})"), &ambient)?;
    let omega = liouville.exterior_derivative();
    let euler_src: Vec<String> = ambient.coords().iter().map(|x| format!("0.5*{x}")).collect();
    let euler_refs: Vec<&str> = euler_src.iter().map(String::as_str).collect();
    let euler = VectorField::parse(&ambient, &euler_refs)?;
    let cone = Symplectization::from_cone(&omega, &euler, ScalingAction::Dilation { power: 0.5 })?;
    Ok(Sphere {
        n,
        chart,
        ambient,
        embedding,
        liouville,
        cone,
    })
}

impl Sphere {
    /// `Σ 2 w_k (q_k ∂_{p_k} - p_k ∂_{q_k})`.
    fn rotation(&self, weights: &[f64]) -> Result<VectorField> {
        let comps: Vec<String> = (1..=self.n)
            .flat_map(|k| {
                let w = 2.0 * weights[k - 1];
                [format!("-{w}*p{k}"), format!("{w}*q{k}")]
            })
            .collect();
        let refs: Vec<&str> = comps.iter().map(String::as_str).collect();
        VectorField::parse(&self.ambient, &refs)
    }

    fn radius(&self) -> Result<ScalarField> {
        ScalarField::parse(&format!("{} - 1", sum_of_squares(self.n, &vec![1.0; self.n])), &self.ambient)
    }
}

pub fn hopf(n: usize) -> Result<CatalogEntry> {
    if n < 2 {
        return Err(Error::Parameter(
            "hopf:n needs n >= 2 (the unit sphere in C^1 is a circle)".into(),
        ));
    }
    let s = sphere(n)?;
    let eta = s.liouville.pullback(&s.embedding)?;
    let samples = SampleSet::default_for(&s.chart);
    let contact = verify_contact(&eta, &samples)?;
    let ones = vec![1.0; n];
    let field = s.rotation(&ones)?;
    let hamiltonian = ScalarField::parse(&sum_of_squares(n, &ones), &s.ambient)?;
    let (fibration, trivialization) = if n == 2 {
        (Some(hopf_fibration(&s, &field)?), Some(hopf_trivialization()?))
    } else {
        (None, None)
    };
    let entry = CatalogEntry {
        name: format!("hopf:{n}"),
        description: format!(
            "unit sphere S^{} in C^{n}, charted as a graph over the hemisphere q1 > 0; contact form is \
             the restriction of (1/2) sum (q dp - p dq); flow integrated in C^{n} where the Reeb field is \
             2 sum (q d/dp - p d/dq), whose orbits are the circles t -> e^(2it) z{}",
            2 * n - 1,
            if n == 2 { "; Hopf map to S^2 with sections over x3 > -1 and x3 < 1" } else { "" }
        ),
        dynamics: Dynamics {
            chart: s.ambient.clone(),
            field,
            form: s.liouville.clone(),
            embedding: Some(s.embedding.clone()),
            constraint: Some(s.radius()?),
        },
        contact,
        samples,
        hamiltonian: Some(hamiltonian),
        conformal_factor: None,
        cone: Some(s.cone),
        fibration,
        trivialization,
        start: None,
    };
    check_volume(&entry)?;
    Ok(entry)
}

fn hopf_fibration(s: &Sphere, field: &VectorField) -> Result<Fibration> {
    let total = s.ambient.clone();
    let base = Arc::new(Chart::new("R3", &["x1", "x2", "x3"])?);
    let projection = SmoothMap::parse(
        &total,
        &base,
        &["2*(q1*q2 + p1*p2)", "2*(q1*p2 - p1*q2)", "q1^2 + p1^2 - q2^2 - p2^2"],
    )?;
    let north = Section::new(
        "north",
        SmoothMap::parse(
            &base,
            &total,
            &[
                "sqrt((1 + x3)/2)",
                "0",
                "x1/sqrt(2*(1 + x3))",
                "x2/sqrt(2*(1 + x3))",
            ],
        )?,
        ScalarField::parse("1 + x3", &base)?,
    )?;
    let south = Section::new(
        "south",
        SmoothMap::parse(
            &base,
            &total,
            &[
                "x1/sqrt(2*(1 - x3))",
                "-x2/sqrt(2*(1 - x3))",
                "sqrt((1 - x3)/2)",
                "0",
            ],
        )?,
        ScalarField::parse("1 - x3", &base)?,
    )?;
    Ok(Fibration {
        total_chart: total.clone(),
        base_chart: base.clone(),
        eta: Some(s.liouville.clone()),
        d_eta: s.liouville.exterior_derivative(),
        reeb: field.clone(),
        projection,
        sections: vec![north, south],
        hbar: None,
        total_constraints: vec![s.radius()?],
        base_constraints: vec![ScalarField::parse("x1^2 + x2^2 + x3^2 - 1", &base)?],
        total_samples: SampleSet::new(sphere_points(4, 50, TOTAL_SAMPLE_SEED)),
        base_samples: SampleSet::new(sphere_points(3, 100, BASE_SAMPLE_SEED)),
    })
}

/// `g(θ, φ, τ) = λ(∂_τ Ψ)` for `Ψ(θ, φ, τ) = e^{2πiτ} σ(θ, φ)`, with `σ` the
/// north section in polar coordinates and `λ` the Liouville form of `C^2`.
pub fn hopf_trivialization() -> Result<ScalarField> {
    let chart = Arc::new(
        Chart::new("S2xS1", &["theta", "phi", "tau"])?.with_bounds(vec![
            (0.0, std::f64::consts::PI),
            (f64::NEG_INFINITY, f64::INFINITY),
            (f64::NEG_INFINITY, f64::INFINITY),
        ])?,
    );
    let c2 = ambient(2)?;
    let a = "sqrt((1 + cos(theta))/2)";
    let b = "sin(theta)*cos(phi)/sqrt(2*(1 + cos(theta)))";
    let c = "sin(theta)*sin(phi)/sqrt(2*(1 + cos(theta)))";
    let (ct, st) = ("cos(2*pi*tau)", "sin(2*pi*tau)");
    let psi = SmoothMap::parse(
        &chart,
        &c2,
        &[
            &format!("{ct}*{a}"),
            &format!("{st}*{a}"),
            &format!("{ct}*{b} - {st}*{c}"),
            &format!("{st}*{b} + {ct}*{c}"),
        ],
    )?;
    let liouville = parse_form("0.5*(q1*dp1 - p1*dq1 + q2*dp2 - p2*dq2)", &c2)?;
    Ok(liouville.pullback(&psi)?.coefficient(&[2]))
}

pub fn deformed_hopf(a: f64, b: f64) -> Result<CatalogEntry> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Parameter(format!("deformed-hopf needs a, b > 0, got {a}, {b}")));
    }
    let s = sphere(2)?;
    let weights = [a, b];
    let h_ambient = ScalarField::parse(&sum_of_squares(2, &weights), &s.ambient)?;
    let factor = h_ambient.compose(s.embedding.components())?;
    let eta = s.liouville.pullback(&s.embedding)?.mul_field(&factor.recip())?;
    let samples = SampleSet::default_for(&s.chart);
    let contact = verify_contact(&eta, &samples)?;
    let field = s.rotation(&weights)?;
    let form = s.liouville.mul_field(&h_ambient.recip())?;
    let entry = CatalogEntry {
        name: format!("deformed-hopf:{a},{b}"),
        description: format!(
            "S^3 with the restricted Liouville form divided by F = {a}|z1|^2 + {b}|z2|^2; Reeb field in C^2 \
             is {}(q1 d/dp1 - p1 d/dq1) + {}(q2 d/dp2 - p2 d/dq2); the axis circles z2 = 0 and z1 = 0 have \
             periods pi/a and pi/b, and the tori |z1|^2 = r carry linear flows closed iff a/b is rational",
            2.0 * a,
            2.0 * b
        ),
        dynamics: Dynamics {
            chart: s.ambient.clone(),
            field,
            form,
            embedding: Some(s.embedding.clone()),
            constraint: Some(s.radius()?),
        },
        contact,
        samples,
        hamiltonian: Some(h_ambient),
        conformal_factor: Some(factor),
        cone: Some(s.cone),
        fibration: None,
        trivialization: None,
        start: None,
    };
    check_volume(&entry)?;
    Ok(entry)
}

pub fn std_contactification(id: &str) -> Result<CatalogEntry> {
    let base = Arc::new(Chart::new("R2", &["q", "p"])?);
    let src = match id {
        "canonical" => "-p*dq",
        "symmetric" => "0.5*(q*dp - p*dq)",
        _ => {
            return Err(Error::Parameter(format!(
                "unknown contactification {id:?}; expected canonical or symmetric"
            )))
        }
    };
    let vartheta = parse_form(src, &base)?;
    let base_samples = SampleSet::default_for(&base);
    let contact = standard_contactification(&vartheta, &base_samples)?;
    let total = contact.chart().clone();
    let samples = base_samples.product(&[-0.5, 0.5]);
    let field = reeb(&contact).field().clone();
    let fibration = Fibration {
        total_chart: total.clone(),
        base_chart: base.clone(),
        eta: Some(contact.eta().clone()),
        d_eta: contact.d_eta().clone(),
        reeb: field.clone(),
        projection: SmoothMap::parse(&total, &base, &["q", "p"])?,
        sections: vec![Section::new(
            "t = 0",
            SmoothMap::parse(&base, &total, &["q", "p", "0"])?,
            ScalarField::constant(&base, 1.0),
        )?],
        hbar: None,
        total_constraints: vec![],
        base_constraints: vec![],
        total_samples: samples.take(50),
        base_samples: base_samples.clone(),
    };
    let entry = CatalogEntry {
        name: format!("std-contactification:{id}"),
        description: format!(
            "R^2 x R with contact form dt + {src} over (R^2, d({src})); the Reeb field is d/dt, its \
             orbits are the lines over each point and t = 0 is a global section"
        ),
        dynamics: Dynamics {
            chart: total.clone(),
            field,
            form: contact.eta().clone(),
            embedding: None,
            constraint: None,
        },
        contact,
        samples,
        hamiltonian: None,
        conformal_factor: None,
        cone: None,
        fibration: Some(fibration),
        trivialization: None,
        start: None,
    };
    check_volume(&entry)?;
    Ok(entry)
}

/// `(√r cos φ, √r sin φ, √(1-r), 0)` on the torus `|z1|^2 = r` of `S^3`,
/// carried with the round sphere structure.
pub fn torus_point(r: f64, phase: f64) -> Result<CatalogEntry> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Parameter(format!("torus-point needs 0 < r < 1, got {r}")));
    }
    let mut entry = hopf(2)?;
    entry.name = format!("torus-point:{r},{phase}");
    entry.description = format!(
        "start point on the torus |z1|^2 = {r} of S^3 at phase {phase}, with the round sphere structure"
    );
    entry.start = Some(vec![r.sqrt() * phase.cos(), r.sqrt() * phase.sin(), (1.0 - r).sqrt(), 0.0]);
    Ok(entry)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn darboux_reeb_is_vertical() {
        let e = build("darboux:2").unwrap();
        let want = VectorField::parse(e.contact.chart(), &["1", "0", "0", "0", "0"]).unwrap();
        assert!(e.dynamics.field.sup_distance(&want, &e.samples).unwrap() < 1e-12);
    }

    #[test]
    fn parameter_domains_enforced() {
        for bad in ["darboux:0", "hopf:1", "deformed-hopf:0,1", "torus-point:1,0", "std-contactification:x", "nope:1", "hopf"] {
            assert!(build(bad).is_err(), "{bad}");
        }
        assert!(build("deformed-hopf:1,sqrt(2)").is_ok());
    }

    #[test]
    fn sphere_field_is_reeb_of_chart_form() {
        for name in ["hopf:2", "deformed-hopf:1,2"] {
            let e = build(name).unwrap();
            let r = reeb(&e.contact);
            let emb = e.dynamics.embedding.as_ref().unwrap();
            for x in e.samples.take(20).points() {
                let pushed = emb.push_forward(x, &r.eval(x).unwrap()).unwrap();
                let direct = e.dynamics.field.eval(&emb.eval(x).unwrap()).unwrap();
                for (a, b) in pushed.iter().zip(&direct) {
                    assert!((a - b).abs() < 1e-9, "{name}: {pushed:?} vs {direct:?}");
                }
            }
        }
    }

    #[test]
    fn hopf_sections_invert_projection() {
        let e = build("hopf:2").unwrap();
        let check = e.fibration.as_ref().unwrap().check().unwrap();
        assert!(check.section_identity <= 1e-9, "{check:?}");
        assert!(check.reeb_vertical <= 1e-12, "{check:?}");
    }

    #[test]
    fn trivialization_is_constant_pi() {
        let g = hopf_trivialization().unwrap();
        for x in [[0.4, 0.1, 0.0], [1.5, 2.0, 0.3], [2.7, -1.0, 0.9]] {
            assert!((g.eval(&x).unwrap() - std::f64::consts::PI).abs() < 1e-12);
        }
    }
}
