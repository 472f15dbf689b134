//! Randomized checks of the expression engine and the exterior calculus.

use approx::assert_relative_eq;
use proptest::prelude::*;
use reebkit::{parse_form, Chart, KForm, SampleSet, ScalarField, SmoothMap, VectorField};
use std::sync::Arc;

const COORDS: [&str; 4] = ["x", "y", "z", "w"];

fn chart() -> Arc<Chart> {
    Arc::new(Chart::new("R4", &COORDS).unwrap())
}

/// Smooth, everywhere-defined expressions in the chart coordinates.
fn expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        prop::sample::select(COORDS.to_vec()).prop_map(str::to_string),
        (-3i32..=3).prop_map(|k| format!("{}", f64::from(k) / 2.0)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.clone().prop_map(|a| format!("exp(({a})/4)")),
            inner.clone().prop_map(|a| format!("({a})^2")),
            inner.prop_map(|a| format!("-({a})")),
        ]
    })
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 4)
}

fn one_form(c: &Arc<Chart>, coeffs: &[String]) -> KForm {
    let src: Vec<String> = coeffs.iter().zip(COORDS).map(|(e, x)| format!("({e})*d{x}")).collect();
    parse_form(&src.join(" + "), c).unwrap()
}

fn two_form(c: &Arc<Chart>, coeffs: &[String]) -> KForm {
    let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let src: Vec<String> = coeffs
        .iter()
        .zip(pairs)
        .map(|(e, (i, j))| format!("({e})*d{}^d{}", COORDS[i], COORDS[j]))
        .collect();
    parse_form(&src.join(" + "), c).unwrap()
}

fn field(c: &Arc<Chart>, comps: &[String]) -> VectorField {
    let refs: Vec<&str> = comps.iter().map(String::as_str).collect();
    VectorField::parse(c, &refs).unwrap()
}

fn at(x: Vec<f64>) -> SampleSet {
    SampleSet::new(vec![x])
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, rng_algorithm: proptest::test_runner::RngAlgorithm::ChaCha, ..ProptestConfig::default() })]

    #[test]
    fn printing_then_parsing_is_a_fixed_point(src in expr(), x in point()) {
        let c = chart();
        let f = ScalarField::parse(&src, &c).unwrap();
        let printed = f.to_source();
        let g = ScalarField::parse(&printed, &c).unwrap();
        prop_assert_eq!(g.to_source(), printed);
        assert_relative_eq!(f.eval(&x).unwrap(), g.eval(&x).unwrap(), epsilon = 1e-12, max_relative = 1e-12);
    }

    #[test]
    fn partials_match_central_differences(src in expr(), x in point(), i in 0usize..4) {
        let f = ScalarField::parse(&src, &chart()).unwrap();
        let h = 1e-5;
        let (mut lo, mut hi) = (x.clone(), x.clone());
        lo[i] -= h;
        hi[i] += h;
        let fd = (f.eval(&hi).unwrap() - f.eval(&lo).unwrap()) / (2.0 * h);
        let exact = f.partial(&x, i).unwrap();
        let scale = 1.0 + f.eval(&x).unwrap().abs() + exact.abs();
        prop_assert!((fd - exact).abs() <= 1e-5 * scale, "{} vs {}", fd, exact);
    }

    #[test]
    fn mixed_second_partials_commute(src in expr(), x in point(), i in 0usize..4, j in 0usize..4) {
        let f = ScalarField::parse(&src, &chart()).unwrap();
        let a = f.second_partial(&x, i, j).unwrap();
        let b = f.second_partial(&x, j, i).unwrap();
        assert_relative_eq!(a, b, epsilon = 1e-10, max_relative = 1e-10);
    }

    #[test]
    fn wedge_is_graded_commutative(a in prop::collection::vec(expr(), 4), b in prop::collection::vec(expr(), 4), x in point()) {
        let c = chart();
        let alpha = one_form(&c, &a);
        let beta = one_form(&c, &b);
        let s = at(x);
        prop_assert!(alpha.wedge(&beta).unwrap().add(&beta.wedge(&alpha).unwrap()).unwrap().sup_norm(&s).unwrap() <= 1e-10);
        prop_assert!(alpha.wedge(&alpha).unwrap().sup_norm(&s).unwrap() <= 1e-12);
        let gamma = alpha.wedge(&beta).unwrap();
        prop_assert!(alpha.wedge(&gamma).unwrap().sup_distance(&gamma.wedge(&alpha).unwrap(), &s).unwrap() <= 1e-10);
    }

    #[test]
    fn double_contraction_vanishes(b in prop::collection::vec(expr(), 6), v in prop::collection::vec(expr(), 4), x in point()) {
        let c = chart();
        let beta = two_form(&c, &b);
        let xf = field(&c, &v);
        let twice = beta.interior_product(&xf).unwrap().interior_product(&xf).unwrap();
        prop_assert!(twice.sup_norm(&at(x)).unwrap() <= 1e-10);
    }

    #[test]
    fn exterior_derivative_squares_to_zero(a in prop::collection::vec(expr(), 4), f in expr(), x in point()) {
        let c = chart();
        let s = at(x);
        let alpha = one_form(&c, &a);
        prop_assert!(alpha.exterior_derivative().exterior_derivative().sup_norm(&s).unwrap() <= 1e-9);
        let g = KForm::scalar(&ScalarField::parse(&f, &c).unwrap());
        prop_assert!(g.exterior_derivative().exterior_derivative().sup_norm(&s).unwrap() <= 1e-9);
    }

    #[test]
    fn pullback_is_functorial_and_commutes_with_d(
        a in prop::collection::vec(expr(), 4),
        m1 in prop::collection::vec(expr(), 4),
        m2 in prop::collection::vec(expr(), 4),
        x in point(),
    ) {
        let c = chart();
        let s = at(x);
        let alpha = one_form(&c, &a);
        let refs = |m: &[String]| m.iter().map(|e| format!("sin({e})")).collect::<Vec<_>>();
        let (r1, r2) = (refs(&m1), refs(&m2));
        let phi = SmoothMap::parse(&c, &c, &r1.iter().map(String::as_str).collect::<Vec<_>>()).unwrap();
        let psi = SmoothMap::parse(&c, &c, &r2.iter().map(String::as_str).collect::<Vec<_>>()).unwrap();
        let composite = alpha.pullback(&phi.after(&psi).unwrap()).unwrap();
        let stepwise = alpha.pullback(&phi).unwrap().pullback(&psi).unwrap();
        let scale = 1.0 + composite.sup_norm(&s).unwrap();
        prop_assert!(composite.sup_distance(&stepwise, &s).unwrap() <= 1e-9 * scale);
        let d_then_pull = alpha.exterior_derivative().pullback(&phi).unwrap();
        let pull_then_d = alpha.pullback(&phi).unwrap().exterior_derivative();
        let scale = 1.0 + d_then_pull.sup_norm(&s).unwrap();
        prop_assert!(d_then_pull.sup_distance(&pull_then_d, &s).unwrap() <= 1e-9 * scale);
    }

    #[test]
    fn cartan_formula_on_two_forms(b in prop::collection::vec(expr(), 6), v in prop::collection::vec(expr(), 4), x in point()) {
        let c = chart();
        let s = at(x);
        let beta = two_form(&c, &b);
        let xf = field(&c, &v);
        let lie = beta.lie_derivative(&xf).unwrap();
        let cartan = beta.exterior_derivative().interior_product(&xf).unwrap()
            .add(&beta.interior_product(&xf).unwrap().exterior_derivative()).unwrap();
        let scale = 1.0 + lie.sup_norm(&s).unwrap();
        prop_assert!(lie.sup_distance(&cartan, &s).unwrap() <= 1e-10 * scale);
    }
}
