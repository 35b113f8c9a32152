#[macro_use]
mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use cqpd_core::harness::{builtin_program, enumerate, run, Schedule};
use cqpd_core::qudit::{apply_gate, bell_state, measure, GateSpec, QuantumState};
use cqpd_core::semantics::Environment;
use cqpd_core::syntax::{parse, pretty, typecheck, DiagnosticKind};
use num_complex::Complex64;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn gate(spec: GateSpec, d: usize) -> Dense {
    to_dense(&spec.matrix(d).unwrap(), d.pow(spec.arity() as u32))
}

fn ac1_gate_algebra() -> Check {
    for d in [2usize, 3, 4, 5, 7] {
        let di = d as i64;
        for j in 0..di {
            ensure!(
                max_diff(&gate(GateSpec::ShiftX(j), d), &x_dense(d, j)) < 1e-12,
                "X^{j} d={d}"
            );
            for k in 0..di {
                let lhs = matmul(&gate(GateSpec::PhaseZ(k), d), &gate(GateSpec::ShiftX(j), d));
                let xz = matmul(&gate(GateSpec::ShiftX(j), d), &gate(GateSpec::PhaseZ(k), d));
                let w = root(d, j * k);
                let rhs: Dense = xz
                    .iter()
                    .map(|r| r.iter().map(|x| w * x).collect())
                    .collect();
                ensure!(
                    max_diff(&lhs, &rhs) <= 1e-12,
                    "Z^{k} X^{j} commutation d={d}"
                );
            }
        }
        ensure!(gate(GateSpec::ShiftX(di), d) == eye(d), "X^d != I at d={d}");
        ensure!(gate(GateSpec::PhaseZ(di), d) == eye(d), "Z^d != I at d={d}");
        for m in 0..d {
            let ket = QuantumState::basis(d, ["q"], &[m]).unwrap();
            let xd = apply_gate(&ket, &["q".into()], &GateSpec::ShiftX(di)).unwrap();
            ensure!(xd == ket, "X^d moved |{m}> at d={d}");
        }
        let lr = matmul(&gate(GateSpec::CnotLeft, d), &gate(GateSpec::CnotRight, d));
        ensure!(lr == eye(d * d), "Lc Rc != I at d={d}");
        let h = gate(GateSpec::Hadamard, d);
        ensure!(max_diff(&h, &h_dense(d)) < 1e-12, "H definition d={d}");
        ensure!(
            max_diff(&matmul(&dagger(&h), &h), &eye(d)) <= 1e-12,
            "H not unitary d={d}"
        );
        let transpose: Dense = (0..d).map(|i| (0..d).map(|j| h[j][i]).collect()).collect();
        ensure!(max_diff(&h, &transpose) <= 1e-12, "H not symmetric d={d}");
        if d >= 3 {
            ensure!(max_diff(&h, &dagger(&h)) > 1e-3, "H self-adjoint at d={d}");
        }
    }
    Ok(())
}

fn ac2_bell() -> Check {
    for d in [2usize, 3, 5] {
        let states: Vec<QuantumState> = (0..d * d)
            .map(|i| bell_state(d, i / d, i % d, ["a", "b"]).unwrap())
            .collect();
        for (i, s) in states.iter().enumerate() {
            for (j, t) in states.iter().enumerate() {
                let ip: Complex64 = s
                    .amplitudes()
                    .iter()
                    .zip(t.amplitudes())
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                let want = if i == j { 1.0 } else { 0.0 };
                ensure!((ip - want).norm() <= 1e-9, "<{i}|{j}> = {ip} at d={d}");
            }
            let amp = |x: usize, y: usize| s.amplitudes()[x * d + y];
            for r in 0..d {
                for c in 0..d {
                    let rho_a: Complex64 = (0..d).map(|y| amp(r, y) * amp(c, y).conj()).sum();
                    let rho_b: Complex64 = (0..d).map(|x| amp(x, r) * amp(x, c).conj()).sum();
                    let want = if r == c { 1.0 / d as f64 } else { 0.0 };
                    ensure!((rho_a - want).norm() <= 1e-9, "rho_a of state {i} at d={d}");
                    ensure!((rho_b - want).norm() <= 1e-9, "rho_b of state {i} at d={d}");
                }
            }
        }
        let names = ["a".to_string(), "b".to_string()];
        for n in 0..d {
            for m in 0..d {
                let ket = QuantumState::basis(d, ["a", "b"], &[n, m]).unwrap();
                let h = apply_gate(&ket, &names[..1], &GateSpec::Hadamard).unwrap();
                let built = apply_gate(&h, &names, &GateSpec::CnotRight).unwrap();
                let bell = &states[n * d + m];
                for (x, y) in built.amplitudes().iter().zip(bell.amplitudes()) {
                    ensure!((x - y).norm() <= 1e-12, "circuit for ({n},{m}) at d={d}");
                }
            }
        }
    }
    Ok(())
}

fn ac3_measurement() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for d in [2usize, 3] {
        for n in 1..=3 {
            for r in 1..=n {
                for _ in 0..100 {
                    let state = random_state(d, n, &mut rng);
                    let mut positions: Vec<usize> = (0..n).collect();
                    positions.shuffle(&mut rng);
                    let targets = &positions[..r];
                    let names: Vec<String> =
                        targets.iter().map(|&t| state.names()[t].clone()).collect();
                    let got = measure(&state, &names).map_err(|e| e.to_string())?;
                    let want = projector_measure(state.amplitudes(), d, n, targets);
                    ensure!(got.len() == want.len(), "outcome count at ({d},{n},{r})");
                    for (o, (m, w, post)) in got.iter().zip(&want) {
                        ensure!(o.outcome == *m, "outcome order at ({d},{n},{r})");
                        ensure!((o.weight - w).abs() <= 1e-12, "weight {} vs {w}", o.weight);
                        let f = overlap(o.post_state.amplitudes(), post);
                        ensure!(
                            (f - 1.0).abs() <= 1e-12,
                            "post-state fidelity {f} at ({d},{n},{r})"
                        );
                    }
                }
            }
        }
    }
    Ok(())
}

fn ac4_teleport() -> Check {
    let program = builtin_program("teleport").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for d in [2usize, 3, 4, 5] {
        for i in 0..50 {
            let amps = random_amplitudes(d, &mut rng);
            let psi = QuantumState::from_amplitudes(d, ["x"], amps.clone()).unwrap();
            let env = Environment::new().with_state("x", psi);
            let trace =
                run(&program, d, &env, &Schedule::exhaustive(1000)).map_err(|e| e.to_string())?;
            check_teleport(&trace, &amps, 1e-9).map_err(|e| format!("d={d} input {i}: {e}"))?;
            if d <= 3 && i < 5 {
                let traces = enumerate(&program, d, &env, 1000).map_err(|e| e.to_string())?;
                ensure!(!traces.is_empty(), "no interleavings at d={d}");
                for (k, t) in traces.iter().enumerate() {
                    check_teleport(t, &amps, 1e-9)
                        .map_err(|e| format!("d={d} input {i} interleaving {k}: {e}"))?;
                }
            }
        }
    }
    Ok(())
}

fn ac5_sdc() -> Check {
    let program = builtin_program("sdc").unwrap();
    for d in [2usize, 3, 5] {
        for a in 0..d as i64 {
            for b in 0..d as i64 {
                let env = Environment::new().with_int("a", a).with_int("b", b);
                let trace = run(&program, d, &env, &Schedule::exhaustive(1000))
                    .map_err(|e| e.to_string())?;
                check_sdc(&trace, a, b, 1e-9).map_err(|e| format!("d={d} ({a},{b}): {e}"))?;
            }
        }
    }
    Ok(())
}

fn ac6_language() -> Check {
    for name in CORPUS {
        let src = read_corpus(&format!("{name}.cqp"));
        let program = parse(&src).map_err(|e| format!("{name}: {e}"))?;
        let diags = typecheck(&program);
        ensure!(diags.is_empty(), "{name}: {diags:?}");
        let printed = pretty(&program);
        ensure!(
            parse(&printed).as_ref() == Ok(&program),
            "{name} does not roundtrip"
        );
    }
    let config = Config {
        cases: 200,
        failure_persistence: None,
        ..Config::default()
    };
    let rng = TestRng::deterministic_rng(RngAlgorithm::ChaCha);
    let mut runner = TestRunner::new_with_rng(config, rng);
    runner
        .run(&arb_program(), |program| {
            let printed = pretty(&program);
            let back = parse(&printed).map_err(|e| {
                proptest::test_runner::TestCaseError::fail(format!("{e}: {printed}"))
            })?;
            proptest::prop_assert_eq!(back, program);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    for (file, kind) in [
        ("invalid/cloning.cqp", DiagnosticKind::CloningViolation),
        ("invalid/arity.cqp", DiagnosticKind::ArityMismatch),
    ] {
        let program = parse(&read_corpus(file)).map_err(|e| e.to_string())?;
        let kinds: Vec<DiagnosticKind> = typecheck(&program).into_iter().map(|d| d.kind).collect();
        ensure!(kinds == vec![kind], "{file}: {kinds:?}");
    }
    Ok(())
}

fn ac7_examples() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for d in [2usize, 3, 5] {
        for _ in 0..10 {
            let amps = random_amplitudes(d, &mut rng);
            let state = QuantumState::from_amplitudes(d, ["q"], amps).unwrap();
            check_example_measurement(&state, 1e-12).map_err(|e| format!("measurement mixture: {e}"))?;
            check_example_output(&state, 1e-12).map_err(|e| format!("observed output: {e}"))?;
            check_example_communication(&state, 1e-12).map_err(|e| format!("internal communication: {e}"))?;
        }
    }
    Ok(())
}

/// Id, title, time budget in seconds and the check itself.
type Criterion = (&'static str, &'static str, u64, fn() -> Check);

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("AC1", "gate algebra", 5, ac1_gate_algebra),
        ("AC2", "Bell states", 5, ac2_bell),
        ("AC3", "measurement oracle", 30, ac3_measurement),
        ("AC4", "teleportation", 60, ac4_teleport),
        ("AC5", "superdense coding", 30, ac5_sdc),
        ("AC6", "language suite", 10, ac6_language),
        ("AC7", "semantics examples", 5, ac7_examples),
    ];
    let mut failed = 0;
    for (id, title, budget, check) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let verdict = match result {
            Ok(()) if elapsed <= Duration::from_secs(budget) => Ok(()),
            Ok(()) => Err(format!("took longer than {budget} s")),
            Err(e) => Err(e),
        };
        match verdict {
            Ok(()) => println!("{id} PASS {title} ({:.2} s)", elapsed.as_secs_f64()),
            Err(e) => {
                failed += 1;
                println!("{id} FAIL {title} ({:.2} s): {e}", elapsed.as_secs_f64());
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
