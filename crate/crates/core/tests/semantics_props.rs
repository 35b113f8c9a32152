mod common;

use common::arb_runnable_source;
use cqpd_core::harness::{enumerate, run, RunStatus, Schedule};
use cqpd_core::semantics::{Configuration, Environment};
use cqpd_core::syntax::{parse, typecheck};
use proptest::prelude::*;

fn check_invariants(config: &Configuration) -> Result<(), TestCaseError> {
    match config {
        Configuration::Pure(p) => {
            prop_assert!((p.sigma.norm_sqr() - 1.0).abs() < 1e-9);
            for q in &p.omega {
                prop_assert!(p.sigma.contains(q), "owned {} missing", q);
            }
        }
        Configuration::Mixed(m) => {
            prop_assert!((m.total_weight() - 1.0).abs() < 1e-9);
            for c in &m.components {
                prop_assert!(c.weight > 0.0);
                prop_assert_eq!(c.values.len(), m.vars.len());
                prop_assert!((c.state.norm_sqr() - 1.0).abs() < 1e-9);
                for q in &m.omega {
                    prop_assert!(c.state.contains(q), "owned {} missing", q);
                }
            }
        }
        Configuration::Distribution(d) => {
            let total: f64 = d.branches.iter().map(|(p, _)| p).sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
            for (_, b) in &d.branches {
                check_invariants(b)?;
            }
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn well_typed_programs_run_to_completion(src in arb_runnable_source(), d in 2usize..4, seed in any::<u64>()) {
        let program = parse(&src).unwrap();
        prop_assert!(typecheck(&program).is_empty(), "{:?}\n{}", typecheck(&program), src);
        let trace = run(&program, d, &Environment::new(), &Schedule::seeded(seed)).unwrap();
        prop_assert_eq!(&trace.status, &RunStatus::Terminated, "{}", src);
        prop_assert!(trace.steps.len() >= 3, "{}", src);
        prop_assert!(trace.steps.iter().any(|s| s.label.to_string().starts_with("out!")));
        check_invariants(&trace.initial)?;
        for step in &trace.steps {
            check_invariants(&step.config)?;
            let total: f64 = step.weights.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn every_interleaving_terminates(src in arb_runnable_source()) {
        let program = parse(&src).unwrap();
        let traces = enumerate(&program, 2, &Environment::new(), 200).unwrap();
        prop_assert!(!traces.is_empty());
        for t in &traces {
            prop_assert_eq!(&t.status, &RunStatus::Terminated);
            check_invariants(t.final_config())?;
        }
    }

    #[test]
    fn seeded_runs_are_reproducible(src in arb_runnable_source(), seed in any::<u64>()) {
        let program = parse(&src).unwrap();
        let a = run(&program, 3, &Environment::new(), &Schedule::seeded(seed)).unwrap();
        let b = run(&program, 3, &Environment::new(), &Schedule::seeded(seed)).unwrap();
        prop_assert_eq!(a.to_json(), b.to_json());
    }
}
