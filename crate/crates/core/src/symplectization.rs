//! Symplectization `M × R₊` with `ω̃ = d(s·η)`, its Euler field and Liouville
//! form, and Hamiltonian fields of homogeneous Hamiltonians.
//!
//! Sign convention: `i_{X_H} ω̃ = -dH`. With this choice the Hamiltonian
//! `Σ (q^k)² + (p_k)²` on `(R^{2n}, Σ dq^k ∧ dp_k)` generates
//! `2 Σ (q^k ∂_{p_k} - p_k ∂_{q^k})`.

use crate::contact::{verify_contact, ContactForm, IDENTITY_TOL};
use crate::error::{Error, Result};
use crate::expr::{Chart, ScalarField};
use crate::forms::{KForm, SmoothMap, VectorField};
use crate::sampling::SampleSet;
use std::sync::Arc;

/// Values of the scaling parameter used by [`Symplectization::homogeneity_degree`].
pub const HOMOGENEITY_SCALES: [f64; 3] = [0.5, 2.0, 3.0];

/// How `R₊` acts on the symplectic cone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalingAction {
    /// `(x, s₀) ↦ (x, s·s₀)` on `M × R₊`, with `s` the coordinate at `index`.
    Fiber { index: usize },
    /// `z ↦ s^power · z` on a linear space.
    Dilation { power: f64 },
}

#[derive(Debug, Clone)]
pub struct Symplectization {
    base: Option<ContactForm>,
    chart: Arc<Chart>,
    omega: KForm,
    theta: KForm,
    euler: VectorField,
    action: ScalingAction,
}

/// Sup-norm defects of the structural identities, at a sample set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeIdentities {
    /// `|dθ - ω̃|`
    pub d_theta: f64,
    /// `|i_ν ω̃ - θ|`
    pub contraction: f64,
    /// `|L_ν ω̃ - ω̃|`
    pub homogeneity: f64,
}

impl ConeIdentities {
    pub fn max(&self) -> f64 {
        self.d_theta.max(self.contraction).max(self.homogeneity)
    }
}

/// Builds `(M × R₊, d(s·η))`.
pub fn symplectize(eta: &ContactForm) -> Result<Symplectization> {
    let base = eta.chart();
    if base.coord_index("s").is_some() {
        return Err(Error::Chart(format!("chart {} already has a coordinate s", base.name())));
    }
    let chart = Arc::new(base.extended(
        &format!("{}xR+", base.name()),
        "s",
        (0.0, f64::INFINITY),
        (0.25, 4.0),
    )?);
    let s_index = base.dim();
    let s = ScalarField::coordinate(&chart, s_index);
    let theta = eta.eta().lift_to(&chart)?.mul_field(&s)?;
    let omega = theta.exterior_derivative();
    let euler = VectorField::coordinate(&chart, s_index).mul_field(&s)?;
    let sympl = Symplectization {
        base: Some(eta.clone()),
        chart,
        omega,
        theta,
        euler,
        action: ScalingAction::Fiber { index: s_index },
    };
    sympl.check_rank(&SampleSet::halton(&sympl.chart, 50))?;
    Ok(sympl)
}

impl Symplectization {
    /// A symplectic cone given directly by `ω` and its Euler field; the
    /// Liouville form is `i_ν ω`.
    pub fn from_cone(omega: &KForm, euler: &VectorField, action: ScalingAction) -> Result<Symplectization> {
        if omega.degree() != 2 {
            return Err(Error::Input("symplectic form must have degree 2".into()));
        }
        let theta = omega.interior_product(euler)?;
        Ok(Symplectization {
            base: None,
            chart: omega.chart().clone(),
            omega: omega.clone(),
            theta,
            euler: euler.clone(),
            action,
        })
    }

    pub fn base(&self) -> Option<&ContactForm> {
        self.base.as_ref()
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn omega(&self) -> &KForm {
        &self.omega
    }

    pub fn theta(&self) -> &KForm {
        &self.theta
    }

    pub fn euler(&self) -> &VectorField {
        &self.euler
    }

    pub fn action(&self) -> ScalingAction {
        self.action
    }

    fn check_rank(&self, samples: &SampleSet) -> Result<()> {
        let dim = self.chart.dim();
        if dim % 2 == 1 {
            return Err(Error::Invariant(format!("symplectic chart has odd dimension {dim}")));
        }
        let top = self
            .omega
            .wedge_power(dim / 2)?
            .top_coefficient()
            .expect("top degree");
        for x in samples {
            let v = top.eval(x)?;
            if !(v.abs() > crate::contact::VOLUME_TOL) {
                return Err(Error::Invariant(format!(
                    "symplectic form is degenerate at {x:?} (top coefficient {v:e})"
                )));
            }
        }
        Ok(())
    }

    /// Defects of `dθ = ω̃`, `i_ν ω̃ = θ`, `L_ν ω̃ = ω̃`.
    pub fn identities(&self, samples: &SampleSet) -> Result<ConeIdentities> {
        Ok(ConeIdentities {
            d_theta: self.theta.exterior_derivative().sup_distance(&self.omega, samples)?,
            contraction: self.omega.interior_product(&self.euler)?.sup_distance(&self.theta, samples)?,
            homogeneity: self.omega.lie_derivative(&self.euler)?.sup_distance(&self.omega, samples)?,
        })
    }

    /// Pointwise solve of `i_X ω̃ = -dH`.
    pub fn hamiltonian_field(&self, h: &ScalarField) -> Result<VectorField> {
        hamiltonian_vector_field(&self.omega, h)
    }

    /// The action map `h_s`.
    pub fn scaling_map(&self, s: f64) -> Result<SmoothMap> {
        let comps = (0..self.chart.dim())
            .map(|i| {
                let x = ScalarField::coordinate(&self.chart, i);
                match self.action {
                    ScalingAction::Fiber { index } if index == i => x.scale(s),
                    ScalingAction::Fiber { .. } => x,
                    ScalingAction::Dilation { power } => x.scale(s.powf(power)),
                }
            })
            .collect();
        SmoothMap::new(&self.chart, &self.chart, comps)
    }

    /// `sup |h_s^* β - s^a β|` over samples and `s ∈ {0.5, 2, 3}`.
    pub fn homogeneity_degree(&self, beta: &KForm, a: f64, samples: &SampleSet) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for s in HOMOGENEITY_SCALES {
            let pulled = beta.pullback(&self.scaling_map(s)?)?;
            worst = worst.max(pulled.sup_distance(&beta.scale(s.powf(a)), samples)?);
        }
        Ok(worst)
    }

    /// Projects an `R₊`-invariant field on `M × R₊` to `M` by dropping the
    /// `s` component. Invariance is checked at `samples` (points of `M`).
    pub fn project_to_contact(&self, x: &VectorField, samples: &SampleSet) -> Result<VectorField> {
        let (ScalingAction::Fiber { index }, Some(base)) = (self.action, &self.base) else {
            return Err(Error::Input("projection needs a symplectization of a contact form".into()));
        };
        if x.chart() != &self.chart {
            return Err(Error::ChartMismatch(self.chart.name().into(), x.chart().name().into()));
        }
        let base_chart = base.chart();
        let mut worst: f64 = 0.0;
        for p in samples {
            let at = |s: f64| -> Result<Vec<f64>> {
                let mut y = p.clone();
                y.push(s);
                x.eval(&y)
            };
            let reference = at(1.0)?;
            for s in [0.5, 2.0] {
                let v = at(s)?;
                for i in 0..index {
                    worst = worst.max((v[i] - reference[i]).abs());
                }
            }
        }
        if worst > IDENTITY_TOL {
            return Err(Error::NotInvariant(worst));
        }
        let mut section: Vec<ScalarField> =
            (0..base_chart.dim()).map(|i| ScalarField::coordinate(base_chart, i)).collect();
        section.push(ScalarField::constant(base_chart, 1.0));
        let comps = x.components()[..index]
            .iter()
            .map(|c| c.compose(&section))
            .collect::<Result<Vec<_>>>()?;
        VectorField::new(base_chart, comps)
    }

    /// The 1-homogeneous Hamiltonian `H(x, s) = s / F(x)` for `F` on the base.
    pub fn homogeneous_hamiltonian(&self, f: &ScalarField) -> Result<ScalarField> {
        let ScalingAction::Fiber { index } = self.action else {
            return Err(Error::Input("needs a symplectization of a contact form".into()));
        };
        let s = ScalarField::coordinate(&self.chart, index);
        s.try_div(&f.lift_to(&self.chart)?)
    }
}

/// `X_H` with `i_{X_H} ω = -dH`, solved pointwise.
pub fn hamiltonian_vector_field(omega: &KForm, h: &ScalarField) -> Result<VectorField> {
    let chart = omega.chart();
    if h.chart() != chart {
        return Err(Error::ChartMismatch(chart.name().into(), h.chart().name().into()));
    }
    let dim = chart.dim();
    let rows = (0..dim)
        .map(|j| (0..dim).map(|i| omega.coefficient(&[i, j])).collect())
        .collect();
    let rhs = (0..dim).map(|j| h.derivative(j).neg()).collect();
    Ok(VectorField::solve_pointwise(chart, "hamiltonian", rows, rhs))
}

/// The Reeb field of `F·η`, computed directly (used as an oracle for the
/// projection route).
pub fn rescaled_contact_form(eta: &ContactForm, f: &ScalarField, samples: &SampleSet) -> Result<ContactForm> {
    verify_contact(&eta.eta().mul_field(f)?, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::reeb;
    use crate::forms::parse_form;

    fn darboux() -> ContactForm {
        let ch = Arc::new(Chart::new("darboux1", &["z", "q", "p"]).unwrap());
        verify_contact(&parse_form("dz - p*dq", &ch).unwrap(), &SampleSet::default_for(&ch)).unwrap()
    }

    #[test]
    fn omega_tilde_matches_hand_expansion() {
        let sy = symplectize(&darboux()).unwrap();
        let want = parse_form("ds^dz - s*dp^dq - p*ds^dq", sy.chart()).unwrap();
        let samples = SampleSet::halton(sy.chart(), 50);
        assert!(sy.omega().sup_distance(&want, &samples).unwrap() < 1e-15);
        let ids = sy.identities(&samples).unwrap();
        assert!(ids.max() <= 1e-9, "{ids:?}");
    }

    #[test]
    fn s_projects_to_reeb() {
        let c = darboux();
        let sy = symplectize(&c).unwrap();
        let h = ScalarField::coordinate(sy.chart(), 3);
        let x = sy.hamiltonian_field(&h).unwrap();
        let base_samples = SampleSet::halton(c.chart(), 20);
        let proj = sy.project_to_contact(&x, &base_samples).unwrap();
        let r = reeb(&c);
        assert!(proj.sup_distance(r.field(), &base_samples).unwrap() < 1e-12);
    }

    #[test]
    fn homogeneity_of_liouville_and_base_forms() {
        let c = darboux();
        let sy = symplectize(&c).unwrap();
        let samples = SampleSet::halton(sy.chart(), 20);
        assert!(sy.homogeneity_degree(sy.theta(), 1.0, &samples).unwrap() <= 1e-9);
        assert!(sy.homogeneity_degree(sy.omega(), 1.0, &samples).unwrap() <= 1e-9);
        let dz = KForm::differential(sy.chart(), 0);
        assert!(sy.homogeneity_degree(&dz, 0.0, &samples).unwrap() <= 1e-9);
        // and the wrong degree is visibly wrong
        assert!(sy.homogeneity_degree(sy.theta(), 0.0, &samples).unwrap() > 0.1);
    }

    #[test]
    fn non_invariant_field_rejected() {
        let c = darboux();
        let sy = symplectize(&c).unwrap();
        let x = VectorField::parse(sy.chart(), &["s", "0", "0", "0"]).unwrap();
        assert!(matches!(
            sy.project_to_contact(&x, &SampleSet::halton(c.chart(), 5)),
            Err(Error::NotInvariant(_))
        ));
    }
}
