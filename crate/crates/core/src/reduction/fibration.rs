//! Fibrations by Reeb orbits and the reduced 2-form on the orbit space.

use crate::dynamics::Field;
use crate::error::{Error, Result};
use crate::expr::{Chart, ScalarField};
use crate::forms::perm::combinations;
use crate::forms::{KForm, SmoothMap, VectorField};
use crate::sampling::{random_vector, seeded_rng, SampleSet};
use rand::Rng;
use std::sync::Arc;

/// Agreement required between two sections where both are defined.
pub const OVERLAP_TOL: f64 = 1e-8;
/// Tolerance of the pullback identity `p^* ω = dη`.
pub const PULLBACK_TOL: f64 = 1e-8;
/// Domains are compared only where both exceed this margin.
const OVERLAP_MARGIN: f64 = 0.1;

/// A local section of the projection, defined where `domain > 0`.
#[derive(Debug, Clone)]
pub struct Section {
    pub label: String,
    pub map: SmoothMap,
    pub domain: ScalarField,
}

impl Section {
    pub fn new(label: &str, map: SmoothMap, domain: ScalarField) -> Result<Section> {
        if domain.chart() != map.source() {
            return Err(Error::ChartMismatch(map.source().name().into(), domain.chart().name().into()));
        }
        Ok(Section {
            label: label.to_string(),
            map,
            domain,
        })
    }

    /// True when the domain function is a positive constant.
    pub fn is_global(&self) -> bool {
        self.domain.as_constant().is_some_and(|c| c > 0.0)
    }
}

/// A contact manifold fibered by its Reeb orbits over a base.
///
/// The total space may be a level set inside `total_chart` (cut out by
/// `total_constraints`); likewise for the base.
#[derive(Debug, Clone)]
pub struct Fibration {
    pub total_chart: Arc<Chart>,
    pub base_chart: Arc<Chart>,
    /// The contact form, when a primitive of `d_eta` is known on the total chart.
    pub eta: Option<KForm>,
    pub d_eta: KForm,
    pub reeb: VectorField,
    pub projection: SmoothMap,
    pub sections: Vec<Section>,
    pub hbar: Option<f64>,
    pub total_constraints: Vec<ScalarField>,
    pub base_constraints: Vec<ScalarField>,
    pub total_samples: SampleSet,
    pub base_samples: SampleSet,
}

/// Sup-norm defects of the fibration invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FibrationCheck {
    /// `|p ∘ σ_i - id|` on each section's domain.
    pub section_identity: f64,
    /// `|dp(R)|` at total samples.
    pub reeb_vertical: f64,
}

/// Projects `v` onto the common kernel of the given gradients.
pub fn project_tangent(v: &[f64], gradients: &[Vec<f64>]) -> Vec<f64> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for g in gradients {
        let mut w = g.clone();
        for b in &basis {
            let c: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
            w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            basis.push(w.into_iter().map(|x| x / n).collect());
        }
    }
    let mut out = v.to_vec();
    for b in &basis {
        let c: f64 = out.iter().zip(b).map(|(x, y)| x * y).sum();
        out.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
    }
    out
}

fn gradients(constraints: &[ScalarField], x: &[f64]) -> Result<Vec<Vec<f64>>> {
    constraints.iter().map(|c| c.gradient(x)).collect()
}

impl Fibration {
    pub fn check(&self) -> Result<FibrationCheck> {
        let mut section_identity: f64 = 0.0;
        for x in &self.base_samples {
            for s in &self.sections {
                if s.domain.eval(x)? <= 0.0 {
                    continue;
                }
                let back = self.projection.eval(&s.map.eval(x)?)?;
                for (a, b) in back.iter().zip(x) {
                    section_identity = section_identity.max((a - b).abs());
                }
            }
        }
        let mut reeb_vertical: f64 = 0.0;
        for y in &self.total_samples {
            let r = Field::eval(&self.reeb, y)?;
            let dp = self.projection.push_forward(y, &r)?;
            reeb_vertical = dp.iter().fold(reeb_vertical, |m, v| m.max(v.abs()));
        }
        Ok(FibrationCheck {
            section_identity,
            reeb_vertical,
        })
    }

    /// Evaluator of the reduced form `ω`.
    pub fn reduce(&self) -> ReducedForm<'_> {
        ReducedForm { fib: self }
    }

    /// A random tangent vector to the total space at `y`.
    pub fn random_total_tangent<R: Rng>(&self, rng: &mut R, y: &[f64]) -> Result<Vec<f64>> {
        let v = random_vector(rng, y.len());
        Ok(project_tangent(&v, &gradients(&self.total_constraints, y)?))
    }

    /// A random tangent vector to the base at `x`.
    pub fn random_base_tangent<R: Rng>(&self, rng: &mut R, x: &[f64]) -> Result<Vec<f64>> {
        let v = random_vector(rng, x.len());
        Ok(project_tangent(&v, &gradients(&self.base_constraints, x)?))
    }

    /// `max |(p^* ω)(u, v) - dη(u, v)|` over total samples and random tangent
    /// pairs drawn from `seed`.
    pub fn pullback_defect(&self, pairs_per_point: usize, seed: u64) -> Result<f64> {
        let omega = self.reduce();
        let mut rng = seeded_rng(seed);
        let mut worst: f64 = 0.0;
        for y in &self.total_samples {
            let x = self.projection.eval(y)?;
            for _ in 0..pairs_per_point {
                let u = self.random_total_tangent(&mut rng, y)?;
                let v = self.random_total_tangent(&mut rng, y)?;
                let pu = self.projection.push_forward(y, &u)?;
                let pv = self.projection.push_forward(y, &v)?;
                let reduced = omega.eval(&x, &pu, &pv)?;
                let direct = self.d_eta.evaluate(y, &[&u, &v])?;
                worst = worst.max((reduced - direct).abs());
            }
        }
        Ok(worst)
    }

    /// `max |ω_σ(u, v) - ω_σ'(u, v)|` over base samples where two sections
    /// overlap, with random tangent pairs drawn from `seed`.
    pub fn overlap_defect(&self, seed: u64) -> Result<f64> {
        let mut rng = seeded_rng(seed);
        let mut worst: f64 = 0.0;
        for x in &self.base_samples {
            let inside: Vec<&Section> = self
                .sections
                .iter()
                .filter(|s| s.domain.eval(x).is_ok_and(|d| d > OVERLAP_MARGIN))
                .collect();
            if inside.len() < 2 {
                continue;
            }
            let u = self.random_base_tangent(&mut rng, x)?;
            let v = self.random_base_tangent(&mut rng, x)?;
            let values = inside
                .iter()
                .map(|s| lifted_value(&self.d_eta, s, x, &u, &v))
                .collect::<Result<Vec<f64>>>()?;
            for w in &values[1..] {
                let d = (w - values[0]).abs();
                if d > OVERLAP_TOL {
                    return Err(Error::SectionOverlap {
                        point: x.clone(),
                        value: d,
                    });
                }
                worst = worst.max(d);
            }
        }
        Ok(worst)
    }

    /// A primitive of `ω` from a global section: `σ^* η`. When the total
    /// space is a product with a line and `σ` is `t = 0`, this is `η` with
    /// its `dt` part removed.
    pub fn exactness_witness(&self) -> Result<ExactnessWitness> {
        let section = self.sections.iter().find(|s| s.is_global()).ok_or(Error::NoGlobalSection)?;
        let eta = self
            .eta
            .as_ref()
            .ok_or_else(|| Error::Input("fibration carries no contact form primitive".into()))?;
        let form = eta.pullback(&section.map)?;
        let d_form = form.exterior_derivative();
        let omega = self.reduce();
        let n = self.base_chart.dim();
        let basis = |i: usize| -> Vec<f64> { (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect() };
        let mut defect: f64 = 0.0;
        for x in &self.base_samples {
            for idx in combinations(n, 2) {
                let (u, v) = (basis(idx[0]), basis(idx[1]));
                let d = d_form.evaluate(x, &[&u, &v])? - omega.eval(x, &u, &v)?;
                defect = defect.max(d.abs());
            }
        }
        Ok(ExactnessWitness {
            form,
            section: section.label.clone(),
            defect,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ExactnessWitness {
    pub form: KForm,
    pub section: String,
    /// `max |dϑ - ω|` at base samples on coordinate pairs.
    pub defect: f64,
}

fn lifted_value(d_eta: &KForm, s: &Section, x: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
    let y = s.map.eval(x)?;
    let lu = s.map.push_forward(x, u)?;
    let lv = s.map.push_forward(x, v)?;
    d_eta.evaluate(&y, &[&lu, &lv])
}

/// `ω_x(u, v) = dη_{σ(x)}(dσ u, dσ v)` through the section whose domain
/// function is largest at `x`.
#[derive(Clone, Copy)]
pub struct ReducedForm<'a> {
    fib: &'a Fibration,
}

impl ReducedForm<'_> {
    pub fn section_for(&self, x: &[f64]) -> Result<&Section> {
        let mut best: Option<(&Section, f64)> = None;
        for s in &self.fib.sections {
            let d = match s.domain.eval(x) {
                Ok(d) => d,
                Err(Error::Domain { .. }) => continue,
                Err(e) => return Err(e),
            };
            if d > 0.0 && best.is_none_or(|(_, b)| d > b) {
                best = Some((s, d));
            }
        }
        best.map(|(s, _)| s).ok_or_else(|| Error::OutsideSections(x.to_vec()))
    }

    pub fn eval(&self, x: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
        lifted_value(&self.fib.d_eta, self.section_for(x)?, x, u, v)
    }

    pub fn fibration(&self) -> &Fibration {
        self.fib
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::parse_form;

    /// `R^2 × R` with `η = dt + ½(q dp - p dq)` over `(R^2, dq∧dp)`.
    fn product() -> Fibration {
        let total = Arc::new(Chart::new("total", &["q", "p", "t"]).unwrap());
        let base = Arc::new(Chart::new("base", &["q", "p"]).unwrap());
        let eta = parse_form("dt + 0.5*(q*dp - p*dq)", &total).unwrap();
        Fibration {
            d_eta: eta.exterior_derivative(),
            eta: Some(eta),
            reeb: VectorField::parse(&total, &["0", "0", "1"]).unwrap(),
            projection: SmoothMap::parse(&total, &base, &["q", "p"]).unwrap(),
            sections: vec![Section::new(
                "t=0",
                SmoothMap::parse(&base, &total, &["q", "p", "0"]).unwrap(),
                ScalarField::constant(&base, 1.0),
            )
            .unwrap()],
            hbar: None,
            total_constraints: vec![],
            base_constraints: vec![],
            total_samples: SampleSet::halton(&total, 20),
            base_samples: SampleSet::halton(&base, 20),
            total_chart: total,
            base_chart: base,
        }
    }

    #[test]
    fn product_fibration_invariants() {
        let fib = product();
        let check = fib.check().unwrap();
        assert!(check.section_identity < 1e-15 && check.reeb_vertical < 1e-15);
        assert!(fib.pullback_defect(3, 1).unwrap() < 1e-12);
        let omega = fib.reduce();
        assert!((omega.eval(&[0.2, 0.4], &[1.0, 0.0], &[0.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(omega.eval(&[0.2, 0.4], &[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
    }

    #[test]
    fn witness_drops_vertical_part() {
        let fib = product();
        let w = fib.exactness_witness().unwrap();
        let want = parse_form("0.5*(q*dp - p*dq)", &fib.base_chart).unwrap();
        assert!(w.form.sup_distance(&want, &fib.base_samples).unwrap() < 1e-15);
        assert!(w.defect < 1e-12);
    }

    #[test]
    fn tangent_projection_removes_normal() {
        let v = project_tangent(&[1.0, 2.0, 3.0], &[vec![0.0, 0.0, 2.0]]);
        assert_eq!(v, vec![1.0, 2.0, 0.0]);
    }
}
