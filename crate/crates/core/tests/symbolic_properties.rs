use std::sync::Arc;

use jetrao_core::symbolic::{
    differential, evaluate_form, exterior_derivative, interior_product, rational, wedge,
    CoeffExpr, Coord, JetContext, OneForm, VectorField,
};
use proptest::prelude::*;

const ORDER: usize = 2;

fn ctx() -> Arc<JetContext> {
    JetContext::with_atoms(ORDER, [("g", vec![Coord::Theta, Coord::S(0)])]).unwrap()
}

fn coord() -> impl Strategy<Value = Coord> {
    prop_oneof![Just(Coord::Theta), (0..=ORDER).prop_map(Coord::S)]
}

/// Small polynomials in θ, s_k and the atom g.
fn expr() -> impl Strategy<Value = CoeffExpr> {
    let factor = prop_oneof![
        3 => coord().prop_map(CoeffExpr::coord),
        1 => Just(CoeffExpr::atom("g")),
    ];
    let term = (-4i64..=4, 1i64..=3, prop::collection::vec(factor, 0..3)).prop_map(
        |(n, d, fs)| {
            fs.iter()
                .fold(CoeffExpr::constant(rational(n, d)), |acc, f| acc.mul(f))
        },
    );
    prop::collection::vec(term, 0..4)
        .prop_map(|ts| ts.iter().fold(CoeffExpr::zero(), |acc, t| acc.add(t)))
}

fn one_form() -> impl Strategy<Value = OneForm> {
    prop::collection::vec((coord(), expr()), 0..4)
        .prop_map(|entries| OneForm::new(&ctx(), entries).unwrap())
}

fn field() -> impl Strategy<Value = VectorField> {
    prop::collection::vec((coord(), expr()), 0..4)
        .prop_map(|entries| VectorField::new(&ctx(), entries).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wedge_is_antisymmetric(a in one_form(), b in one_form()) {
        let ab = wedge(&a, &b).unwrap();
        let ba = wedge(&b, &a).unwrap();
        prop_assert!(ab.add(&ba).unwrap().is_zero());
        prop_assert!(wedge(&a, &a).unwrap().is_zero());
    }

    #[test]
    fn wedge_is_bilinear(a in one_form(), b in one_form(), c in one_form(), f in expr()) {
        let lhs = wedge(&a.add(&c).unwrap(), &b).unwrap();
        let rhs = wedge(&a, &b).unwrap().add(&wedge(&c, &b).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(wedge(&a.scale(&f), &b).unwrap(), wedge(&a, &b).unwrap().scale(&f));
    }

    #[test]
    fn d_of_d_vanishes(f in expr()) {
        let df = differential(&ctx(), &f).unwrap();
        prop_assert!(exterior_derivative(&df).is_zero());
    }

    #[test]
    fn d_obeys_leibniz(f in expr(), a in one_form()) {
        let c = ctx();
        let lhs = exterior_derivative(&a.scale(&f));
        let rhs = wedge(&differential(&c, &f).unwrap(), &a)
            .unwrap()
            .add(&exterior_derivative(&a).scale(&f))
            .unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn contraction_of_decomposable_forms(a in one_form(), b in one_form(), y in field()) {
        let lhs = interior_product(&y, &wedge(&a, &b).unwrap()).unwrap();
        let ay = evaluate_form(&a, &y).unwrap();
        let by = evaluate_form(&b, &y).unwrap();
        let rhs = b.scale(&ay).sub(&a.scale(&by)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}
