use super::report::*;
use super::*;
use matmono::criteria::{MatrixKind, Witness};
use matmono::gensets::GensetWitness;
use matmono::polynomial::Poly;

#[test]
fn command_definition_is_valid() {
    Cli::command().debug_assert();
}

#[test]
fn hyphenated_function_text_parses() {
    let cli = Cli::try_parse_from(["matmono", "certify", "-f", "-1/x", "-n", "3", "--interval", "-4,-0.5"]).unwrap();
    let Command::Certify(a) = cli.command else { panic!() };
    assert_eq!(a.function.function.as_deref(), Some("-1/x"));
    assert_eq!(a.run.order, 3);
    assert_eq!(a.run.interval.as_deref(), Some("-4,-0.5"));
}

#[test]
fn exit_codes_by_error_kind() {
    assert_eq!(exit_code(&Failure::Usage("x".into())), EXIT_USAGE);
    assert_eq!(exit_code(&Failure::Lib(Error::InvalidInput("x".into()))), EXIT_USAGE);
    assert_eq!(
        exit_code(&Failure::Lib(Error::Syntax {
            offset: 3,
            message: "x".into()
        })),
        EXIT_USAGE
    );
    assert_eq!(exit_code(&Failure::Lib(Error::NonConvergence("x".into()))), EXIT_NUMERICAL);
    assert_eq!(exit_code(&Failure::Lib(Error::Numerical("x".into()))), EXIT_NUMERICAL);
}

fn matrix_witness(value: f64) -> ReportWitness {
    ReportWitness::Criterion(Witness::Matrix {
        matrix: MatrixKind::Loewner,
        nodes: vec![1.0, 2.0],
        base: None,
        t: None,
        entries: vec![vec![1.0, 2.0], vec![2.0, 1.0]],
        value,
        norm: 3.0,
    })
}

#[test]
fn witnesses_round_trip_untagged() {
    let g = ReportWitness::Genset(GensetWitness {
        k: 1,
        nodes: vec![0.0, 1.0],
        values: vec![1.0, 0.0],
        q: Poly::one(),
        value: -1.0,
        scale: 1.0,
    });
    for w in [matrix_witness(-1.0), g] {
        let s = serde_json::to_string(&w).unwrap();
        let back: ReportWitness = serde_json::from_str(&s).unwrap();
        assert_eq!(back, w, "{s}");
    }
}

#[test]
fn witness_validity() {
    let w = matrix_witness(-1.0);
    assert!(witness_valid(&w, -1.0));
    assert!(witness_valid(&w, -1.0 + 1e-12));
    assert!(!witness_valid(&w, -0.5));
    assert!(!witness_valid(&matrix_witness(1e-3), 1e-3));
}

#[test]
fn fault_injection_produces_a_conflict() {
    let mut r = Report {
        function: "x".into(),
        catalog: None,
        domain: None,
        order: 2,
        mode: Mode::Monotone,
        interval: None,
        points: None,
        seed: 1,
        tol: 1e-9,
        precision: Precision::Auto,
        criteria: ["a", "b"]
            .iter()
            .map(|id| CriterionEntry {
                id: id.to_string(),
                condition: String::new(),
                configs: 1,
                verdict: Verdict::Pass,
                worst_score: 0.0,
                witness: None,
                note: None,
            })
            .collect(),
        agreement: AgreementEntry {
            consistent: true,
            conflicts: vec![],
        },
        verdict: Verdict::Pass,
        timestamp: None,
    };
    assert_eq!(verdict_code(&r), EXIT_OK);
    r.criteria[1].verdict = Verdict::Fail;
    r.recompute_agreement();
    assert!(!r.agreement.consistent);
    assert_eq!(r.agreement.conflicts, [("a".to_string(), "b".to_string())]);
    assert_eq!(r.verdict, Verdict::Fail);
    assert_eq!(verdict_code(&r), EXIT_NUMERICAL);
    r.criteria[0].verdict = Verdict::Fail;
    r.recompute_agreement();
    assert_eq!(verdict_code(&r), EXIT_REFUTED);
}

mod props {
    use super::*;
    use proptest::prelude::*;

    fn endpoint() -> impl Strategy<Value = f64> {
        prop_oneof![Just(f64::INFINITY), Just(f64::NEG_INFINITY), -1e6f64..1e6]
    }

    proptest! {
        #[test]
        fn reports_round_trip(lo in endpoint(), hi in endpoint(), seed: u64, tol in 1e-14f64..1e-3, v in -10.0f64..-1e-6) {
            prop_assume!(lo < hi);
            let interval = Interval::new(lo, hi).unwrap();
            let r = Report {
                function: "x".into(),
                catalog: None,
                domain: Some(interval),
                order: 3,
                mode: Mode::Convex,
                interval: Some(interval),
                points: None,
                seed,
                tol,
                precision: Precision::Extended,
                criteria: vec![CriterionEntry {
                    id: "loewner".into(),
                    condition: "c".into(),
                    configs: 7,
                    verdict: Verdict::Fail,
                    worst_score: v,
                    witness: Some(matrix_witness(v)),
                    note: None,
                }],
                agreement: AgreementEntry { consistent: true, conflicts: vec![] },
                verdict: Verdict::Fail,
                timestamp: None,
            };
            let s = serde_json::to_string(&r).unwrap();
            let back: Report = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(&back, &r);
            prop_assert_eq!(serde_json::to_string(&back).unwrap(), s);
        }
    }
}
