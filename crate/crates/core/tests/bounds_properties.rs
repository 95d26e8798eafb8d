use std::collections::BTreeMap;
use std::sync::Arc;

use jetrao_core::bounds::{bound_ladder, gram, residual, LadderOptions, DEFAULT_TOL};
use jetrao_core::families::{builtin, sqrt_jet, EstimatorSpec, FamilyRef, Psi, RationalPoly};
use nalgebra::SymmetricEigen;
use proptest::prelude::*;

#[derive(Clone, Debug)]
struct Case {
    family: &'static str,
    sigma: Option<f64>,
    theta: f64,
    statistic: String,
    psi: String,
    max_order: usize,
}

impl Case {
    fn family(&self) -> FamilyRef {
        let params: BTreeMap<String, f64> =
            self.sigma.map(|s| ("sigma".to_string(), s)).into_iter().collect();
        builtin(self.family, &params).unwrap()
    }

    fn estimator(&self) -> EstimatorSpec {
        EstimatorSpec::new(
            self.statistic.clone(),
            RationalPoly::parse(&self.statistic).unwrap(),
            Psi::parse(&self.psi).unwrap(),
        )
    }
}

/// Built-in families paired with estimators unbiased for the stated ψ.
fn case() -> impl Strategy<Value = Case> {
    let gaussian = (prop::sample::select(vec![0.5, 1.0, 2.0]), -3.0..3.0f64, any::<bool>(), 1usize..=3)
        .prop_map(|(sigma, theta, quad, max_order)| {
            let s2 = match sigma {
                0.5 => "1/4",
                1.0 => "1",
                _ => "4",
            };
            Case {
                family: "gaussian-mean",
                sigma: Some(sigma),
                theta,
                statistic: if quad { format!("x^2 - {s2}") } else { "x".into() },
                psi: if quad { "theta^2".into() } else { "theta".into() },
                max_order,
            }
        });
    let poisson = (0.3..12.0f64, any::<bool>(), 1usize..=3).prop_map(|(theta, quad, max_order)| Case {
        family: "poisson-rate",
        sigma: None,
        theta,
        statistic: if quad { "x^2 - x".into() } else { "x".into() },
        psi: if quad { "theta^2".into() } else { "theta".into() },
        max_order,
    });
    let bernoulli = (0.05..0.95f64, 1usize..=2).prop_map(|(theta, max_order)| Case {
        family: "bernoulli",
        sigma: None,
        theta,
        statistic: "x".into(),
        psi: "theta".into(),
        max_order,
    });
    let exponential = (0.3..6.0f64, 1usize..=3).prop_map(|(theta, max_order)| Case {
        family: "exponential-rate",
        sigma: None,
        theta,
        statistic: "x".into(),
        psi: "reciprocal".into(),
        max_order,
    });
    prop_oneof![gaussian, poisson, bernoulli, exponential]
}

fn opts(max_order: usize) -> LadderOptions {
    LadderOptions {
        max_order,
        tol: DEFAULT_TOL,
        allow_degenerate: false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gram_is_symmetric_psd_and_solved(c in case()) {
        let fam = c.family();
        let rule = Arc::new(fam.recommended_rule(c.theta).unwrap());
        let jet = sqrt_jet(fam.as_ref(), c.theta, rule, c.max_order).unwrap();
        let e = residual(&c.estimator(), &jet).unwrap();
        let sys = gram(&jet, c.max_order, &e).unwrap();
        prop_assert_eq!(&sys.g, &sys.g.transpose());
        let eig = SymmetricEigen::new(sys.g.clone());
        prop_assert!(eig.eigenvalues.min() >= -1e-10 * sys.g.norm());
        prop_assert!(sys.solve_residual() <= 1e-10 * sys.b.norm().max(f64::MIN_POSITIVE));
    }

    #[test]
    fn ladder_is_monotone_and_pythagorean(c in case()) {
        let fam = c.family();
        let rule = Arc::new(fam.recommended_rule(c.theta).unwrap());
        let jet = sqrt_jet(fam.as_ref(), c.theta, rule, c.max_order).unwrap();
        let e = residual(&c.estimator(), &jet).unwrap();
        let rep = bound_ladder(&jet, &e, &c.statistic, &opts(c.max_order)).unwrap();
        let var = rep.variance;
        for w in rep.ladder.windows(2) {
            prop_assert!(w[0].beta <= w[1].beta + 1e-10 * var, "{:?}", rep.ladder);
        }
        let last = rep.ladder.last().unwrap();
        prop_assert!(last.beta <= var + 1e-8 * var);
        for en in &rep.ladder {
            prop_assert!(en.beta >= -1e-12 * var);
            prop_assert!((en.rho - en.rho_pythagoras).abs() <= 1e-8 * var, "{:?}", en);
            // the L² and pointwise criteria agree
            prop_assert_eq!(en.certified, en.beta / var >= 1.0 - DEFAULT_TOL);
        }
    }

    #[test]
    fn refinement_moves_bounds_negligibly(c in case()) {
        // node doubling only applies to the continuous families
        prop_assume!(matches!(c.family, "gaussian-mean" | "exponential-rate"));
        let fam = c.family();
        let ladder = |factor| {
            let rule = Arc::new(fam.refined_rule(c.theta, factor).unwrap());
            let jet = sqrt_jet(fam.as_ref(), c.theta, rule, c.max_order).unwrap();
            let e = residual(&c.estimator(), &jet).unwrap();
            bound_ladder(&jet, &e, &c.statistic, &opts(c.max_order)).unwrap()
        };
        let (a, b) = (ladder(1), ladder(2));
        for (x, y) in a.ladder.iter().zip(&b.ladder) {
            prop_assert!((x.beta - y.beta).abs() < 1e-8, "{} vs {}", x.beta, y.beta);
        }
    }
}
