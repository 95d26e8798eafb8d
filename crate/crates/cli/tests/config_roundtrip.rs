use std::collections::BTreeMap;
use std::path::PathBuf;

use jetrao::config::{
    AnalysisBlock, EstimatorBlock, FamilyBlock, OutputBlock, RuleBlock, ThetaRange,
};
use jetrao::{Format, RunConfig};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6..1e6f64, Just(0.0), Just(1e-300), Just(-2.5e-17)]
}

fn opt<T: std::fmt::Debug + Clone>(s: impl Strategy<Value = T>) -> impl Strategy<Value = Option<T>> {
    prop::option::of(s)
}

fn family() -> impl Strategy<Value = FamilyBlock> {
    let name = prop::sample::select(vec!["gaussian-mean", "poisson-rate", "bernoulli"]);
    prop_oneof![
        (name, prop::collection::btree_map("[a-z]{1,6}", finite(), 0..3)).prop_map(|(n, p)| FamilyBlock {
            name: Some(n.to_string()),
            tabulated: None,
            parameters: p,
        }),
        "[a-z/]{1,12}\\.tab".prop_map(|p| FamilyBlock {
            name: None,
            tabulated: Some(PathBuf::from(p)),
            parameters: BTreeMap::new(),
        }),
    ]
}

fn estimator() -> impl Strategy<Value = EstimatorBlock> {
    (opt("[a-z-]{1,10}"), opt("[a-z-]{1,8}"), opt("[x0-9 ^+*/-]{1,12}"), opt("[a-z0-9 ^+-]{1,12}"))
        .prop_map(|(builtin, name, statistic, psi)| EstimatorBlock {
            builtin,
            name,
            statistic,
            psi,
        })
}

fn rule() -> impl Strategy<Value = RuleBlock> {
    prop_oneof![
        (1usize..5).prop_map(|refine| RuleBlock::Recommended { refine }),
        (1usize..200, opt(finite()), finite())
            .prop_map(|(n, center, scale)| RuleBlock::GaussHermite { n, center, scale }),
        (1usize..200, finite(), finite()).prop_map(|(n, a, b)| RuleBlock::GaussLegendre { n, a, b }),
        (-50i64..50, -50i64..50).prop_map(|(from, to)| RuleBlock::Counting { from, to }),
        (2usize..200, finite(), finite()).prop_map(|(n, a, b)| RuleBlock::Trapezoid { n, a, b }),
    ]
}

fn analysis() -> impl Strategy<Value = AnalysisBlock> {
    (
        prop::collection::vec(finite(), 0..5),
        opt((finite(), finite(), 0usize..20).prop_map(|(from, to, steps)| ThetaRange { from, to, steps })),
        0usize..9,
        opt(1e-14..0.5f64),
    )
        .prop_map(|(theta, theta_range, max_order, tol)| AnalysisBlock {
            theta,
            theta_range,
            max_order,
            tol,
        })
}

fn output() -> impl Strategy<Value = OutputBlock> {
    (prop::bool::ANY, opt("[a-z]{1,8}\\.(json|csv)")).prop_map(|(csv, path)| OutputBlock {
        format: if csv { Format::Csv } else { Format::Json },
        path: path.map(PathBuf::from),
    })
}

proptest! {
    #[test]
    fn parse_inverts_serialize(
        family in family(),
        estimator in estimator(),
        rule in rule(),
        analysis in analysis(),
        output in output(),
    ) {
        let cfg = RunConfig { family, estimator, rule, analysis, output };
        let text = cfg.to_json();
        prop_assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
    }
}

#[test]
fn defaults_fill_optional_blocks() {
    let cfg = RunConfig::from_json(
        r#"{"family":{"name":"bernoulli"},"estimator":{"builtin":"canonical"},
            "analysis":{"theta":[0.5],"max_order":1}}"#,
    )
    .unwrap();
    assert_eq!(cfg.rule, RuleBlock::Recommended { refine: 1 });
    assert_eq!(cfg.output.format, Format::Json);
}

#[test]
fn unknown_fields_are_rejected() {
    let err = RunConfig::from_json(
        r#"{"family":{"name":"bernoulli","sigma":1},"estimator":{"builtin":"canonical"},
            "analysis":{"theta":[0.5],"max_order":1}}"#,
    )
    .unwrap_err();
    assert!(err.to_string().contains("sigma"), "{err}");
}
