//! Contact forms: verification, Reeb fields, contact Hamiltonian fields,
//! conformal rescaling, and the two reductions that produce contact forms.

use crate::error::{Error, Result};
use crate::expr::{Chart, ScalarField};
use crate::forms::{KForm, SmoothMap, VectorField};
use crate::sampling::SampleSet;
use std::sync::Arc;

/// Threshold on `|η ∧ (dη)^n|` below which a form is declared degenerate.
pub const VOLUME_TOL: f64 = 1e-8;
/// Pointwise tolerance for identities checked at sample points.
pub const IDENTITY_TOL: f64 = 1e-9;

/// Record of how a contact form was verified.
#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub samples: usize,
    pub min_volume: f64,
    pub worst_point: Vec<f64>,
}

/// A 1-form verified to satisfy the contact condition on a sample set.
#[derive(Debug, Clone)]
pub struct ContactForm {
    eta: KForm,
    d_eta: KForm,
    n: usize,
    verification: Verification,
}

impl ContactForm {
    pub fn eta(&self) -> &KForm {
        &self.eta
    }

    pub fn d_eta(&self) -> &KForm {
        &self.d_eta
    }

    pub fn chart(&self) -> &Arc<Chart> {
        self.eta.chart()
    }

    /// Half of `dim - 1`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn verification(&self) -> &Verification {
        &self.verification
    }

    /// The top form `η ∧ (dη)^n`.
    pub fn volume_form(&self) -> Result<KForm> {
        self.eta.wedge(&self.d_eta.wedge_power(self.n)?)
    }
}

/// Checks `η ∧ (dη)^n ≠ 0` at every sample and records the smallest value.
pub fn verify_contact(eta: &KForm, samples: &SampleSet) -> Result<ContactForm> {
    if eta.degree() != 1 {
        return Err(Error::Input(format!("expected a 1-form, got degree {}", eta.degree())));
    }
    let dim = eta.chart().dim();
    if dim < 3 || dim % 2 == 0 {
        return Err(Error::EvenDimension(dim));
    }
    if samples.is_empty() {
        return Err(Error::Input("empty sample set".into()));
    }
    let n = (dim - 1) / 2;
    let d_eta = eta.exterior_derivative();
    let top = eta
        .wedge(&d_eta.wedge_power(n)?)?
        .top_coefficient()
        .expect("top degree");
    let mut min_volume = f64::INFINITY;
    let mut worst_point = Vec::new();
    for x in samples {
        let v = top.eval(x)?.abs();
        if !(v >= min_volume) {
            min_volume = v;
            worst_point = x.clone();
        }
    }
    if !(min_volume > VOLUME_TOL) {
        return Err(Error::Degenerate {
            point: worst_point,
            value: min_volume,
        });
    }
    Ok(ContactForm {
        eta: eta.clone(),
        d_eta,
        n,
        verification: Verification {
            samples: samples.len(),
            min_volume,
            worst_point,
        },
    })
}

/// The Reeb field of a contact form, solved pointwise.
#[derive(Debug, Clone)]
pub struct ReebField {
    field: VectorField,
    eta: KForm,
    d_eta: KForm,
}

impl ReebField {
    pub fn field(&self) -> &VectorField {
        &self.field
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.field.eval(x)
    }

    /// `max(|i_R η - 1|, max_j |(i_R dη)(e_j)|)` at `x`.
    pub fn residual(&self, x: &[f64]) -> Result<f64> {
        let r = self.field.eval(x)?;
        let dim = r.len();
        let mut worst = (self.eta.evaluate(x, &[&r])? - 1.0).abs();
        for j in 0..dim {
            let mut e = vec![0.0; dim];
            e[j] = 1.0;
            worst = worst.max(self.d_eta.evaluate(x, &[&r, &e])?.abs());
        }
        Ok(worst)
    }
}

fn stacked_rows(c: &ContactForm) -> Vec<Vec<ScalarField>> {
    let dim = c.chart().dim();
    let mut rows = vec![(0..dim).map(|j| c.eta.coefficient(&[j])).collect::<Vec<_>>()];
    for j in 0..dim {
        rows.push((0..dim).map(|i| c.d_eta.coefficient(&[i, j])).collect());
    }
    rows
}

/// Solves `i_R η = 1`, `i_R dη = 0` pointwise as a `(2n+2) × (2n+1)` least
/// squares problem.
pub fn reeb(c: &ContactForm) -> ReebField {
    let chart = c.chart();
    let mut rhs = vec![ScalarField::constant(chart, 1.0)];
    rhs.extend((0..chart.dim()).map(|_| ScalarField::constant(chart, 0.0)));
    ReebField {
        field: VectorField::solve_pointwise(chart, "reeb", stacked_rows(c), rhs),
        eta: c.eta.clone(),
        d_eta: c.d_eta.clone(),
    }
}

/// The contact Hamiltonian field `X_G`: `i_X η = G`, `i_X dη = R(G) η - dG`.
pub fn contact_hamiltonian_field(c: &ContactForm, g: &ScalarField) -> Result<VectorField> {
    let chart = c.chart();
    if g.chart() != chart {
        return Err(Error::ChartMismatch(chart.name().into(), g.chart().name().into()));
    }
    let r = reeb(c);
    let rg = r.field.apply(g)?;
    let mut rhs = vec![g.clone()];
    for j in 0..chart.dim() {
        rhs.push(rg.try_mul(&c.eta.coefficient(&[j]))?.try_sub(&g.derivative(j))?);
    }
    Ok(VectorField::solve_pointwise(chart, "contact-hamiltonian", stacked_rows(c), rhs))
}

/// The 1-form `i_{fR} d(η/f)`, which vanishes identically iff `fR` is the
/// Reeb field of `η/f`.
pub fn rescaling_defect(c: &ContactForm, f: &ScalarField) -> Result<KForm> {
    let eta_f = c.eta.mul_field(&f.recip())?;
    let field = reeb(c).field.mul_field(f)?;
    eta_f.exterior_derivative().interior_product(&field)
}

/// Sup over samples of the coordinate-basis sup-norm of [`rescaling_defect`].
pub fn rescaling_residual(c: &ContactForm, f: &ScalarField, samples: &SampleSet) -> Result<f64> {
    for x in samples {
        let v = f.eval(x)?;
        if !(v > 0.0) {
            return Err(Error::NonPositive {
                point: x.clone(),
                value: v,
            });
        }
    }
    rescaling_defect(c, f)?.sup_norm(samples)
}

/// Restriction of `i_ν Ω` to a hypersurface `ι(M)` of a symplectic manifold.
///
/// `defining` vanishes on the hypersurface; transversality of `ν` is read off
/// the pairing `dh(ν)` at each sampled point.
pub fn hypersurface_contact(
    omega: &KForm,
    nu: &VectorField,
    iota: &SmoothMap,
    defining: &ScalarField,
    samples: &SampleSet,
) -> Result<ContactForm> {
    let ambient = iota.target();
    if omega.chart() != ambient || nu.chart() != ambient || defining.chart() != ambient {
        return Err(Error::ChartMismatch(
            ambient.name().into(),
            omega.chart().name().into(),
        ));
    }
    let images = SampleSet::new(
        samples
            .points()
            .iter()
            .map(|x| iota.eval(x))
            .collect::<Result<Vec<_>>>()?,
    );
    let homogeneity = omega.lie_derivative(nu)?.sub(omega)?.sup_norm(&images)?;
    if homogeneity > IDENTITY_TOL {
        return Err(Error::Homogeneity(homogeneity));
    }
    let pairing = nu.apply(defining)?;
    for y in &images {
        let v = pairing.eval(y)?;
        if v.abs() <= VOLUME_TOL {
            return Err(Error::Transversality {
                point: y.clone(),
                value: v,
            });
        }
    }
    let eta = omega.interior_product(nu)?.pullback(iota)?;
    let contact = verify_contact(&eta, samples)?;
    let restricted = omega.pullback(iota)?;
    let gap = contact.d_eta.sup_distance(&restricted, samples)?;
    if gap > IDENTITY_TOL {
        return Err(Error::Invariant(format!(
            "d(eta) differs from the restricted symplectic form by {gap:e}"
        )));
    }
    Ok(contact)
}

/// `dt + ϑ` on `N × R` for a 1-form `ϑ` on `N` with `dϑ` nondegenerate.
pub fn standard_contactification(vartheta: &KForm, samples: &SampleSet) -> Result<ContactForm> {
    let base = vartheta.chart();
    let dim = base.dim();
    if vartheta.degree() != 1 {
        return Err(Error::Input("expected a 1-form".into()));
    }
    if dim % 2 == 1 {
        return Err(Error::Input(format!(
            "base of a contactification must be even dimensional, got {dim}"
        )));
    }
    let omega = vartheta.exterior_derivative();
    let top = omega
        .wedge_power(dim / 2)?
        .top_coefficient()
        .expect("top degree");
    for x in samples {
        let v = top.eval(x)?;
        if !(v.abs() > VOLUME_TOL) {
            return Err(Error::Degenerate {
                point: x.clone(),
                value: v.abs(),
            });
        }
    }
    let total = Arc::new(product_with_line(base)?);
    let dt = KForm::differential(&total, dim);
    let eta = dt.add(&vartheta.lift_to(&total)?)?;
    verify_contact(&eta, &samples.product(&[-0.5, 0.5]))
}

/// `N × R` with fiber coordinate `t`.
pub fn product_with_line(base: &Chart) -> Result<Chart> {
    if base.coord_index("t").is_some() {
        return Err(Error::Chart(format!("chart {} already has a coordinate t", base.name())));
    }
    base.extended(
        &format!("{}xR", base.name()),
        "t",
        (f64::NEG_INFINITY, f64::INFINITY),
        (-1.0, 1.0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::parse_form;

    fn darboux1() -> Arc<Chart> {
        Arc::new(Chart::new("darboux1", &["z", "q", "p"]).unwrap())
    }

    #[test]
    fn darboux_form_is_contact_with_unit_volume() {
        let ch = darboux1();
        let eta = parse_form("dz - p*dq", &ch).unwrap();
        let c = verify_contact(&eta, &SampleSet::default_for(&ch)).unwrap();
        assert_eq!(c.verification().min_volume, 1.0);
    }

    #[test]
    fn dz_alone_is_rejected() {
        let ch = darboux1();
        let eta = parse_form("dz", &ch).unwrap();
        assert!(matches!(
            verify_contact(&eta, &SampleSet::default_for(&ch)),
            Err(Error::Degenerate { .. })
        ));
    }

    #[test]
    fn even_dimension_rejected() {
        let ch = Arc::new(Chart::new("plane", &["q", "p"]).unwrap());
        let eta = parse_form("q*dp", &ch).unwrap();
        assert!(matches!(
            verify_contact(&eta, &SampleSet::default_for(&ch)),
            Err(Error::EvenDimension(2))
        ));
    }

    #[test]
    fn reeb_of_darboux_is_dz() {
        let ch = darboux1();
        let eta = parse_form("dz - p*dq", &ch).unwrap();
        let c = verify_contact(&eta, &SampleSet::default_for(&ch)).unwrap();
        let r = reeb(&c);
        for x in SampleSet::default_for(&ch).points() {
            let v = r.eval(x).unwrap();
            assert!((v[0] - 1.0).abs() < 1e-12 && v[1].abs() < 1e-12 && v[2].abs() < 1e-12);
            assert!(r.residual(x).unwrap() < 1e-12);
        }
    }

    #[test]
    fn doubled_form_has_half_reeb() {
        let ch = darboux1();
        let eta = parse_form("2*dz - 2*p*dq", &ch).unwrap();
        let c = verify_contact(&eta, &SampleSet::default_for(&ch)).unwrap();
        let v = reeb(&c).eval(&[0.2, 0.3, -0.4]).unwrap();
        assert!((v[0] - 0.5).abs() < 1e-14 && v[1].abs() < 1e-14 && v[2].abs() < 1e-14);
    }

    #[test]
    fn contact_hamiltonian_of_q() {
        // X_q = q ∂_z + ∂_p on the Darboux form
        let ch = darboux1();
        let eta = parse_form("dz - p*dq", &ch).unwrap();
        let c = verify_contact(&eta, &SampleSet::default_for(&ch)).unwrap();
        let g = ScalarField::parse("q", &ch).unwrap();
        let x = contact_hamiltonian_field(&c, &g).unwrap();
        for pt in SampleSet::default_for(&ch).take(20).points() {
            let v = x.eval(pt).unwrap();
            assert!((v[0] - pt[1]).abs() < 1e-12);
            assert!(v[1].abs() < 1e-12);
            assert!((v[2] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rescaling_defect_matches_hand_value() {
        let ch = darboux1();
        let eta = parse_form("dz - p*dq", &ch).unwrap();
        let c = verify_contact(&eta, &SampleSet::default_for(&ch)).unwrap();
        let origin = SampleSet::new(vec![vec![0.0; 3]]);
        let f = ScalarField::parse("1 + q/2", &ch).unwrap();
        let defect = rescaling_defect(&c, &f).unwrap();
        let coeffs = defect.coefficients_at(&[0.0; 3]).unwrap();
        let q_part: f64 = coeffs.iter().filter(|(i, _)| i == &vec![1]).map(|(_, v)| *v).sum();
        assert!((q_part.abs() - 0.5).abs() < 1e-15);
        assert!((rescaling_residual(&c, &f, &origin).unwrap() - 0.5).abs() < 1e-15);
        for k in [1.0, 2.0] {
            let f = ScalarField::constant(&ch, k);
            assert!(rescaling_residual(&c, &f, &SampleSet::default_for(&ch)).unwrap() <= 1e-9);
        }
        let neg = ScalarField::parse("q", &ch).unwrap();
        assert!(matches!(
            rescaling_residual(&c, &neg, &origin),
            Err(Error::NonPositive { .. })
        ));
    }

    #[test]
    fn contactification_of_canonical_form_is_darboux() {
        let plane = Arc::new(Chart::new("plane", &["q", "p"]).unwrap());
        let theta = parse_form("-p*dq", &plane).unwrap();
        let c = standard_contactification(&theta, &SampleSet::default_for(&plane)).unwrap();
        assert_eq!(c.chart().coords(), &["q", "p", "t"]);
        let r = reeb(&c).eval(&[0.3, 0.1, 0.0]).unwrap();
        assert!((r[2] - 1.0).abs() < 1e-12 && r[0].abs() < 1e-12 && r[1].abs() < 1e-12);

        let zero = KForm::zero(&plane, 1);
        assert!(matches!(
            standard_contactification(&zero, &SampleSet::default_for(&plane)),
            Err(Error::Degenerate { .. })
        ));
    }
}
