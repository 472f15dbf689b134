//! Differential forms, vector fields and smooth maps over a single chart.
//!
//! Forms are stored in the basis of strictly increasing index tuples; a
//! missing tuple is a zero coefficient. All coefficients are [`ScalarField`]s,
//! so every operation here is structural and evaluation stays exact up to
//! float roundoff.

mod literal;
pub mod perm;

pub use literal::{parse_form, parse_form_with};

use crate::error::{Error, Result};
use crate::expr::{n_add, n_const, n_mul, n_partial, Chart, Node, ScalarField};
use crate::sampling::SampleSet;
use perm::{combinations, permutations, sort_with_sign};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

fn check_chart(a: &Arc<Chart>, b: &Arc<Chart>) -> Result<()> {
    if a != b {
        return Err(Error::ChartMismatch(a.name().to_string(), b.name().to_string()));
    }
    Ok(())
}

/// A differential k-form on a chart.
#[derive(Clone)]
pub struct KForm {
    chart: Arc<Chart>,
    degree: usize,
    coeffs: BTreeMap<Vec<usize>, ScalarField>,
}

impl fmt::Debug for KForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KForm[{}; {}]({})", self.chart.name(), self.degree, self)
    }
}

impl fmt::Display for KForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        for (n, (idx, c)) in self.coeffs.iter().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            let basis: Vec<String> = idx
                .iter()
                .map(|i| format!("d{}", self.chart.coords()[*i]))
                .collect();
            if idx.is_empty() {
                write!(f, "{c}")?;
            } else if c.as_constant() == Some(1.0) {
                f.write_str(&basis.join("^"))?;
            } else {
                write!(f, "({c})*{}", basis.join("^"))?;
            }
        }
        Ok(())
    }
}

impl KForm {
    pub fn zero(chart: &Arc<Chart>, degree: usize) -> KForm {
        KForm {
            chart: chart.clone(),
            degree,
            coeffs: BTreeMap::new(),
        }
    }

    /// A function viewed as a 0-form.
    pub fn scalar(f: &ScalarField) -> KForm {
        let mut out = KForm::zero(f.chart(), 0);
        out.insert(vec![], f.clone());
        out
    }

    /// The coordinate differential `dx^i`.
    pub fn differential(chart: &Arc<Chart>, i: usize) -> KForm {
        let mut out = KForm::zero(chart, 1);
        out.insert(vec![i], ScalarField::constant(chart, 1.0));
        out
    }

    /// Builds a form from arbitrary (possibly unsorted) index tuples.
    pub fn from_terms(
        chart: &Arc<Chart>,
        degree: usize,
        terms: impl IntoIterator<Item = (Vec<usize>, ScalarField)>,
    ) -> Result<KForm> {
        let mut out = KForm::zero(chart, degree);
        for (idx, c) in terms {
            if idx.len() != degree {
                return Err(Error::Dimension {
                    expected: degree,
                    found: idx.len(),
                });
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= chart.dim()) {
                return Err(Error::Dimension {
                    expected: chart.dim(),
                    found: bad + 1,
                });
            }
            check_chart(chart, c.chart())?;
            if let Some((sorted, sign)) = sort_with_sign(&idx) {
                out.accumulate(sorted, if sign < 0.0 { c.neg() } else { c });
            }
        }
        Ok(out)
    }

    fn insert(&mut self, idx: Vec<usize>, c: ScalarField) {
        if c.is_zero() {
            self.coeffs.remove(&idx);
        } else {
            self.coeffs.insert(idx, c);
        }
    }

    fn accumulate(&mut self, idx: Vec<usize>, c: ScalarField) {
        let merged = match self.coeffs.get(&idx) {
            Some(prev) => ScalarField::from_node(&self.chart, n_add(prev.node().clone(), c.node().clone())),
            None => c,
        };
        self.insert(idx, merged);
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Coefficient of the basis element `dx^{i1}^...^dx^{ik}` (indices in any order).
    pub fn coefficient(&self, idx: &[usize]) -> ScalarField {
        match sort_with_sign(idx) {
            Some((sorted, sign)) => match self.coeffs.get(&sorted) {
                Some(c) if sign < 0.0 => c.neg(),
                Some(c) => c.clone(),
                None => ScalarField::constant(&self.chart, 0.0),
            },
            None => ScalarField::constant(&self.chart, 0.0),
        }
    }

    /// Nonzero terms in increasing index order.
    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &ScalarField)> {
        self.coeffs.iter()
    }

    /// True when no coefficient is stored (structurally zero).
    pub fn is_structurally_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn check_same(&self, other: &KForm) -> Result<()> {
        check_chart(&self.chart, &other.chart)?;
        if self.degree != other.degree {
            return Err(Error::Dimension {
                expected: self.degree,
                found: other.degree,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &KForm) -> Result<KForm> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (idx, c) in &other.coeffs {
            out.accumulate(idx.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &KForm) -> Result<KForm> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> KForm {
        self.map_coeffs(|c| c.neg())
    }

    pub fn scale(&self, s: f64) -> KForm {
        self.map_coeffs(|c| c.scale(s))
    }

    /// Pointwise product with a function.
    pub fn mul_field(&self, f: &ScalarField) -> Result<KForm> {
        check_chart(&self.chart, f.chart())?;
        Ok(self.map_coeffs(|c| ScalarField::from_node(&self.chart, n_mul(f.node().clone(), c.node().clone()))))
    }

    fn map_coeffs(&self, f: impl Fn(&ScalarField) -> ScalarField) -> KForm {
        let mut out = KForm::zero(&self.chart, self.degree);
        for (idx, c) in &self.coeffs {
            out.insert(idx.clone(), f(c));
        }
        out
    }

    /// The same form on a chart that extends this one by trailing coordinates.
    pub fn lift_to(&self, chart: &Arc<Chart>) -> Result<KForm> {
        let mut out = KForm::zero(chart, self.degree);
        for (idx, c) in &self.coeffs {
            out.insert(idx.clone(), c.lift_to(chart)?);
        }
        Ok(out)
    }

    pub fn wedge(&self, other: &KForm) -> Result<KForm> {
        check_chart(&self.chart, &other.chart)?;
        let degree = self.degree + other.degree;
        let mut out = KForm::zero(&self.chart, degree);
        if degree > self.chart.dim() {
            return Ok(out);
        }
        for (i, a) in &self.coeffs {
            for (j, b) in &other.coeffs {
                let joined: Vec<usize> = i.iter().chain(j.iter()).copied().collect();
                if let Some((sorted, sign)) = sort_with_sign(&joined) {
                    let prod = n_mul(a.node().clone(), b.node().clone());
                    let prod = if sign < 0.0 { crate::expr::n_neg(prod) } else { prod };
                    out.accumulate(sorted, ScalarField::from_node(&self.chart, prod));
                }
            }
        }
        Ok(out)
    }

    /// `α ∧ α ∧ ... ∧ α` (`n` factors); `n = 0` gives the constant 1.
    pub fn wedge_power(&self, n: usize) -> Result<KForm> {
        let mut out = KForm::scalar(&ScalarField::constant(&self.chart, 1.0));
        for _ in 0..n {
            out = out.wedge(self)?;
        }
        Ok(out)
    }

    pub fn exterior_derivative(&self) -> KForm {
        let mut out = KForm::zero(&self.chart, self.degree + 1);
        if self.degree + 1 > self.chart.dim() {
            return out;
        }
        for (idx, c) in &self.coeffs {
            for i in 0..self.chart.dim() {
                if idx.contains(&i) {
                    continue;
                }
                let mut joined = vec![i];
                joined.extend_from_slice(idx);
                let (sorted, sign) = sort_with_sign(&joined).expect("distinct indices");
                let dc = c.derivative(i);
                out.accumulate(sorted, if sign < 0.0 { dc.neg() } else { dc });
            }
        }
        out
    }

    /// Contraction `i_X α` in the first slot.
    pub fn interior_product(&self, x: &VectorField) -> Result<KForm> {
        check_chart(&self.chart, &x.chart)?;
        if self.degree == 0 {
            return Err(Error::Input("interior product of a 0-form".into()));
        }
        let mut out = KForm::zero(&self.chart, self.degree - 1);
        for (idx, c) in &self.coeffs {
            for (pos, &i) in idx.iter().enumerate() {
                let comp = &x.components[i];
                if comp.is_zero() {
                    continue;
                }
                let mut rest = idx.clone();
                rest.remove(pos);
                let mut prod = n_mul(comp.node().clone(), c.node().clone());
                if pos % 2 == 1 {
                    prod = crate::expr::n_neg(prod);
                }
                out.accumulate(rest, ScalarField::from_node(&self.chart, prod));
            }
        }
        Ok(out)
    }

    /// `φ^* α` for `α` on the target chart of `φ`.
    pub fn pullback(&self, map: &SmoothMap) -> Result<KForm> {
        check_chart(&self.chart, &map.target)?;
        let src = &map.source;
        let k = self.degree;
        let mut out = KForm::zero(src, k);
        if k > src.dim() {
            return Ok(out);
        }
        let args: Vec<Arc<Node>> = map.components.iter().map(|c| c.node().clone()).collect();
        let jac: Vec<Vec<Arc<Node>>> = map
            .components
            .iter()
            .map(|c| (0..src.dim()).map(|i| n_partial(c.node(), i)).collect())
            .collect();
        let perms = permutations(k);
        let source_tuples = combinations(src.dim(), k);
        for (target_idx, c) in &self.coeffs {
            let composed = crate::expr::n_compose(c.node(), &args);
            for src_idx in &source_tuples {
                // det of ∂φ^{J_a}/∂x^{I_b}
                let mut det = n_const(0.0);
                for (p, sign) in &perms {
                    let mut term = n_const(*sign);
                    for (a, &b) in p.iter().enumerate() {
                        term = n_mul(term, jac[target_idx[a]][src_idx[b]].clone());
                    }
                    det = n_add(det, term);
                }
                let coeff = n_mul(composed.clone(), det);
                out.accumulate(src_idx.clone(), ScalarField::from_node(src, coeff));
            }
        }
        Ok(out)
    }

    /// Lie derivative by the Cartan formula `L_X = i_X d + d i_X`.
    pub fn lie_derivative(&self, x: &VectorField) -> Result<KForm> {
        check_chart(&self.chart, &x.chart)?;
        let d_then_i = self.exterior_derivative().interior_product(x)?;
        if self.degree == 0 {
            return Ok(d_then_i);
        }
        let i_then_d = self.interior_product(x)?.exterior_derivative();
        d_then_i.add(&i_then_d)
    }

    /// `α_x(v_1, ..., v_k)`.
    pub fn evaluate(&self, x: &[f64], vectors: &[&[f64]]) -> Result<f64> {
        if vectors.len() != self.degree {
            return Err(Error::Dimension {
                expected: self.degree,
                found: vectors.len(),
            });
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != self.chart.dim()) {
            return Err(Error::Dimension {
                expected: self.chart.dim(),
                found: v.len(),
            });
        }
        let mut total = 0.0;
        for (idx, c) in &self.coeffs {
            let m: Vec<Vec<f64>> = idx
                .iter()
                .map(|&i| vectors.iter().map(|v| v[i]).collect())
                .collect();
            let d = perm::det(&m);
            if d != 0.0 {
                total += c.eval(x)? * d;
            }
        }
        Ok(total)
    }

    /// Coefficient values at `x` for every stored tuple.
    pub fn coefficients_at(&self, x: &[f64]) -> Result<Vec<(Vec<usize>, f64)>> {
        self.coeffs
            .iter()
            .map(|(idx, c)| Ok((idx.clone(), c.eval(x)?)))
            .collect()
    }

    /// Coefficient of the top-degree basis element, when degree equals dim.
    pub fn top_coefficient(&self) -> Option<ScalarField> {
        (self.degree == self.chart.dim())
            .then(|| self.coefficient(&(0..self.degree).collect::<Vec<_>>()))
    }

    /// `sup_x max_I |α_I(x)|` over a sample set.
    pub fn sup_norm(&self, samples: &SampleSet) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for x in samples {
            for (_, v) in self.coefficients_at(x)? {
                worst = worst.max(v.abs());
            }
        }
        Ok(worst)
    }

    /// Numerical distance between two forms: sup over samples and basis tuples.
    pub fn sup_distance(&self, other: &KForm, samples: &SampleSet) -> Result<f64> {
        self.check_same(other)?;
        let mut worst: f64 = 0.0;
        let keys: std::collections::BTreeSet<&Vec<usize>> =
            self.coeffs.keys().chain(other.coeffs.keys()).collect();
        for x in samples {
            for idx in &keys {
                let a = self.coeffs.get(*idx).map(|c| c.eval(x)).transpose()?.unwrap_or(0.0);
                let b = other.coeffs.get(*idx).map(|c| c.eval(x)).transpose()?.unwrap_or(0.0);
                worst = worst.max((a - b).abs());
            }
        }
        Ok(worst)
    }
}

/// A vector field given by one component function per coordinate.
#[derive(Clone)]
pub struct VectorField {
    chart: Arc<Chart>,
    components: Vec<ScalarField>,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VectorField[{}](", self.chart.name())?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

impl VectorField {
    pub fn new(chart: &Arc<Chart>, components: Vec<ScalarField>) -> Result<VectorField> {
        if components.len() != chart.dim() {
            return Err(Error::Dimension {
                expected: chart.dim(),
                found: components.len(),
            });
        }
        for c in &components {
            check_chart(chart, c.chart())?;
        }
        Ok(VectorField {
            chart: chart.clone(),
            components,
        })
    }

    pub fn parse(chart: &Arc<Chart>, srcs: &[&str]) -> Result<VectorField> {
        let comps = srcs
            .iter()
            .map(|s| ScalarField::parse(s, chart))
            .collect::<Result<Vec<_>>>()?;
        VectorField::new(chart, comps)
    }

    /// The coordinate field `∂/∂x^i`.
    pub fn coordinate(chart: &Arc<Chart>, i: usize) -> VectorField {
        let components = (0..chart.dim())
            .map(|k| ScalarField::constant(chart, if k == i { 1.0 } else { 0.0 }))
            .collect();
        VectorField {
            chart: chart.clone(),
            components,
        }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if let Some(system) = self.shared_system() {
            if x.len() != self.chart.dim() {
                return Err(Error::Dimension { expected: self.chart.dim(), found: x.len() });
            }
            return system.solve(x);
        }
        self.components.iter().map(|c| c.eval(x)).collect()
    }

    /// The system all components read from, when the field is a plain
    /// pointwise solve.
    fn shared_system(&self) -> Option<&Arc<crate::linalg::LinearSystem>> {
        let mut shared: Option<&Arc<crate::linalg::LinearSystem>> = None;
        for (i, c) in self.components.iter().enumerate() {
            match c.node().as_ref() {
                Node::Solve(system, k) if *k == i => match shared {
                    Some(s) if !Arc::ptr_eq(s, system) => return None,
                    _ => shared = Some(system),
                },
                _ => return None,
            }
        }
        shared.filter(|s| s.unknowns() == self.components.len())
    }

    /// Directional derivative `X(f) = Σ X^i ∂_i f`.
    pub fn apply(&self, f: &ScalarField) -> Result<ScalarField> {
        check_chart(&self.chart, f.chart())?;
        let mut acc = n_const(0.0);
        for (i, c) in self.components.iter().enumerate() {
            acc = n_add(acc, n_mul(c.node().clone(), n_partial(f.node(), i)));
        }
        Ok(ScalarField::from_node(&self.chart, acc))
    }

    pub fn scale(&self, s: f64) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            components: self.components.iter().map(|c| c.scale(s)).collect(),
        }
    }

    pub fn mul_field(&self, f: &ScalarField) -> Result<VectorField> {
        let components = self
            .components
            .iter()
            .map(|c| f.try_mul(c))
            .collect::<Result<Vec<_>>>()?;
        VectorField::new(&self.chart, components)
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField> {
        check_chart(&self.chart, &other.chart)?;
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.try_add(b))
            .collect::<Result<Vec<_>>>()?;
        VectorField::new(&self.chart, components)
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField> {
        self.add(&other.scale(-1.0))
    }

    /// Field whose components solve, pointwise and in the least-squares sense,
    /// the stacked system `rows · X = rhs`.
    pub(crate) fn solve_pointwise(
        chart: &Arc<Chart>,
        label: &str,
        rows: Vec<Vec<ScalarField>>,
        rhs: Vec<ScalarField>,
    ) -> VectorField {
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(|f| f.node().clone()).collect())
            .collect();
        let rhs = rhs.into_iter().map(|f| f.node().clone()).collect();
        let system = Arc::new(crate::linalg::LinearSystem::new(label, rows, rhs));
        let components = (0..chart.dim())
            .map(|k| ScalarField::from_node(chart, Arc::new(Node::Solve(system.clone(), k))))
            .collect();
        VectorField {
            chart: chart.clone(),
            components,
        }
    }

    /// `max_i |X^i(x) - Y^i(x)|` over a sample set.
    pub fn sup_distance(&self, other: &VectorField, samples: &SampleSet) -> Result<f64> {
        check_chart(&self.chart, &other.chart)?;
        let mut worst: f64 = 0.0;
        for x in samples {
            let (a, b) = (self.eval(x)?, other.eval(x)?);
            for (u, v) in a.iter().zip(&b) {
                worst = worst.max((u - v).abs());
            }
        }
        Ok(worst)
    }
}

/// A smooth map between charts, one component function per target coordinate.
#[derive(Clone)]
pub struct SmoothMap {
    source: Arc<Chart>,
    target: Arc<Chart>,
    components: Vec<ScalarField>,
}

impl fmt::Debug for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SmoothMap[{} -> {}](", self.source.name(), self.target.name())?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

impl SmoothMap {
    pub fn new(source: &Arc<Chart>, target: &Arc<Chart>, components: Vec<ScalarField>) -> Result<SmoothMap> {
        if components.len() != target.dim() {
            return Err(Error::Dimension {
                expected: target.dim(),
                found: components.len(),
            });
        }
        for c in &components {
            check_chart(source, c.chart())?;
        }
        Ok(SmoothMap {
            source: source.clone(),
            target: target.clone(),
            components,
        })
    }

    pub fn parse(source: &Arc<Chart>, target: &Arc<Chart>, srcs: &[&str]) -> Result<SmoothMap> {
        let comps = srcs
            .iter()
            .map(|s| ScalarField::parse(s, source))
            .collect::<Result<Vec<_>>>()?;
        SmoothMap::new(source, target, comps)
    }

    pub fn identity(chart: &Arc<Chart>) -> SmoothMap {
        SmoothMap {
            source: chart.clone(),
            target: chart.clone(),
            components: (0..chart.dim()).map(|i| ScalarField::coordinate(chart, i)).collect(),
        }
    }

    pub fn source(&self) -> &Arc<Chart> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Chart> {
        &self.target
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.components.iter().map(|c| c.eval(x)).collect()
    }

    /// Rows are target components, columns source coordinates.
    pub fn jacobian(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.components.iter().map(|c| c.gradient(x)).collect()
    }

    /// `dφ_x(v)`.
    pub fn push_forward(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.source.dim() {
            return Err(Error::Dimension {
                expected: self.source.dim(),
                found: v.len(),
            });
        }
        let j = self.jacobian(x)?;
        Ok(j.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect())
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &SmoothMap) -> Result<SmoothMap> {
        check_chart(&self.source, &inner.target)?;
        let components = self
            .components
            .iter()
            .map(|c| c.compose(&inner.components))
            .collect::<Result<Vec<_>>>()?;
        SmoothMap::new(&inner.source, &self.target, components)
    }

    /// Push a field on the source through the differential, as functions on the source.
    pub fn push_field(&self, x: &VectorField) -> Result<Vec<ScalarField>> {
        check_chart(&self.source, &x.chart)?;
        self.components.iter().map(|c| x.apply(c)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn darboux1() -> Arc<Chart> {
        Arc::new(Chart::new("darboux", &["z", "q", "p"]).unwrap())
    }

    #[test]
    fn wedge_basics() {
        let ch = darboux1();
        let dq = KForm::differential(&ch, 1);
        let dp = KForm::differential(&ch, 2);
        assert!(dq.wedge(&dq).unwrap().is_structurally_zero());
        let a = dq.wedge(&dp).unwrap();
        let b = dp.wedge(&dq).unwrap();
        let x = [0.1, 0.2, 0.3];
        assert_eq!(a.evaluate(&x, &[&[0., 1., 0.], &[0., 0., 1.]]).unwrap(), 1.0);
        assert_eq!(a.evaluate(&x, &[&[0., 0., 1.], &[0., 1., 0.]]).unwrap(), -1.0);
        assert_eq!(a.add(&b).unwrap().sup_norm(&SampleSet::new(vec![x.to_vec()])).unwrap(), 0.0);
    }

    #[test]
    fn darboux_volume_form() {
        let ch = darboux1();
        let eta = parse_form("dz - p*dq", &ch).unwrap();
        let deta = eta.exterior_derivative();
        // d(dz - p dq) = dq ^ dp
        assert_eq!(deta.coefficient(&[1, 2]).eval(&[0.3, -1.0, 2.0]).unwrap(), 1.0);
        let vol = eta.wedge(&deta).unwrap();
        assert_eq!(vol.top_coefficient().unwrap().eval(&[0.0, 0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(
            vol.evaluate(&[0.0; 3], &[&[1., 0., 0.], &[0., 1., 0.], &[0., 0., 1.]]).unwrap(),
            1.0
        );
    }

    #[test]
    fn interior_products() {
        let ch = darboux1();
        let eta = parse_form("dz - p*dq", &ch).unwrap();
        let dz_field = VectorField::coordinate(&ch, 0);
        let one = eta.interior_product(&dz_field).unwrap();
        assert_eq!(one.coefficient(&[]).eval(&[1.0, 2.0, 3.0]).unwrap(), 1.0);
        let dqdp = parse_form("dq^dp", &ch).unwrap();
        assert!(dqdp.interior_product(&dz_field).unwrap().is_structurally_zero());
        assert!(matches!(KForm::scalar(&ScalarField::constant(&ch, 1.0)).interior_product(&dz_field), Err(Error::Input(_))));
    }

    #[test]
    fn lie_derivative_of_function_is_directional_derivative() {
        let ch = darboux1();
        let f = ScalarField::parse("z*q + p^2", &ch).unwrap();
        let x = VectorField::parse(&ch, &["1", "q", "-p"]).unwrap();
        let lf = KForm::scalar(&f).lie_derivative(&x).unwrap();
        let direct = x.apply(&f).unwrap();
        let pt = [0.4, -0.7, 1.3];
        assert!((lf.coefficient(&[]).eval(&pt).unwrap() - direct.eval(&pt).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn chart_mismatch_is_an_error() {
        let a = darboux1();
        let b = Arc::new(Chart::new("other", &["x", "y", "w"]).unwrap());
        let fa = KForm::differential(&a, 0);
        let fb = KForm::differential(&b, 0);
        assert!(matches!(fa.wedge(&fb), Err(Error::ChartMismatch(..))));
    }

    #[test]
    fn evaluate_checks_dimensions() {
        let ch = darboux1();
        let dq = KForm::differential(&ch, 1);
        assert!(dq.evaluate(&[0.0; 3], &[&[1.0, 0.0]]).is_err());
        assert!(dq.evaluate(&[0.0; 3], &[]).is_err());
    }
}
