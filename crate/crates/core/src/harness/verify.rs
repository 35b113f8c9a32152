use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::Serialize;

use crate::qudit::{discard, fidelity, omega, QuantumState};
use crate::semantics::{
    base_name, output_resolve, Configuration, Environment, StepDetail, TransitionLabel, Value,
};

use super::oracle::{overlap, sdc_states, teleport_branches};
use super::{builtin_program, run, HarnessError, RunStatus, Schedule, Trace, DEFAULT_DEPTH};

/// Tolerance on fidelities and weights in every verifier.
pub const VERIFY_TOLERANCE: f64 = 1e-9;

/// Expected pure state right after step `after_step` of a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub after_step: usize,
    pub label: String,
    pub expected: QuantumState,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckpointResult {
    pub after_step: usize,
    pub label: String,
    pub fidelity: f64,
    pub deviation: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchResult {
    pub branch: String,
    pub expected: String,
    pub observed: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_fidelity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values_match: Option<bool>,
    pub weight: f64,
    pub expected_weight: f64,
    pub pass: bool,
}

/// Decoded superdense-coding result. `raw` is what Bob measures, `decoded`
/// undoes the negation of the second digit and `encoded` is the pair Alice
/// was given.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SdcOutcome {
    pub raw: [i64; 2],
    pub decoded: [i64; 2],
    pub encoded: [i64; 2],
    pub probability: f64,
    pub deterministic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub protocol: String,
    pub dimension: usize,
    pub branches: Vec<BranchResult>,
    pub checkpoints: Vec<CheckpointResult>,
    pub max_deviation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<SdcOutcome>,
    pub pass: bool,
}

impl VerificationReport {
    fn new(protocol: &str, dimension: usize) -> Self {
        VerificationReport {
            protocol: protocol.to_string(),
            dimension,
            branches: Vec::new(),
            checkpoints: Vec::new(),
            max_deviation: 0.0,
            outcome: None,
            pass: true,
        }
    }

    fn settle(mut self) -> Self {
        self.pass = self.branches.iter().all(|b| b.pass) && self.checkpoints.iter().all(|c| c.pass);
        self
    }
}

fn amplitudes_text(amps: &[Complex64]) -> String {
    let parts: Vec<String> = amps
        .iter()
        .map(|a| format!("{:.6}{:+.6}i", a.re, a.im))
        .collect();
    format!("[{}]", parts.join(", "))
}

/// Reorders `observed` so that its qudits line up with `expected`'s,
/// matching runtime names to source names.
fn align(observed: &QuantumState, expected: &QuantumState) -> Result<QuantumState, HarnessError> {
    if observed.num_qudits() != expected.num_qudits() {
        return Err(HarnessError::Protocol(format!(
            "state over {:?} cannot be compared with one over {:?}",
            observed.names(),
            expected.names()
        )));
    }
    let mut order = Vec::new();
    for want in expected.names() {
        let found = observed
            .names()
            .iter()
            .find(|n| *n == want || base_name(n) == base_name(want))
            .filter(|n| !order.contains(*n))
            .ok_or_else(|| HarnessError::Protocol(format!("no qudit matches `{want}`")))?;
        order.push(found.clone());
    }
    Ok(observed.permuted(&order)?)
}

/// Overlap of a configuration with a pure state: `sum_i g_i |<e|psi_i>|^2`.
fn configuration_fidelity(
    config: &Configuration,
    expected: &QuantumState,
) -> Result<f64, HarnessError> {
    match config {
        Configuration::Pure(p) => Ok(fidelity(&align(&p.sigma, expected)?, expected)?),
        Configuration::Mixed(m) => {
            let mut total = 0.0;
            for c in &m.components {
                total += c.weight * fidelity(&align(&c.state, expected)?, expected)?;
            }
            Ok(total)
        }
        Configuration::Distribution(_) => Err(HarnessError::Protocol(
            "checkpoint falls on a probability distribution".into(),
        )),
    }
}

fn checkpoint_result(after_step: usize, label: String, fid: f64) -> CheckpointResult {
    let deviation = (1.0 - fid).max(0.0);
    CheckpointResult {
        after_step,
        label,
        fidelity: fid,
        deviation,
        pass: deviation <= VERIFY_TOLERANCE,
    }
}

/// Compares the state after each checkpointed step with its expected
/// state, up to global phase.
pub fn trace_to_report(
    trace: &Trace,
    checkpoints: &[Checkpoint],
    protocol: &str,
) -> Result<VerificationReport, HarnessError> {
    let mut report = VerificationReport::new(protocol, trace.dimension);
    for cp in checkpoints {
        let step = trace
            .steps
            .get(cp.after_step)
            .ok_or(HarnessError::MisalignedCheckpoint {
                index: cp.after_step,
                len: trace.steps.len(),
            })?;
        let fid = configuration_fidelity(&step.config, &cp.expected)?;
        let result = checkpoint_result(cp.after_step, cp.label.clone(), fid);
        report.max_deviation = report.max_deviation.max(result.deviation);
        report.checkpoints.push(result);
    }
    Ok(report.settle())
}

fn two_qudit_state(d: usize, amps: Vec<Complex64>) -> Result<QuantumState, HarnessError> {
    Ok(QuantumState::from_amplitudes(d, ["q1", "q2"], amps)?)
}

/// Closed-form superdense-coding states for `(q1, q2)`.
fn sdc_expected(d: usize, a: i64, b: i64) -> Result<[QuantumState; 5], HarnessError> {
    let zero = Complex64::new(0.0, 0.0);
    let s = 1.0 / (d as f64).sqrt();
    let di = d as i64;
    let idx = |q1: i64, q2: i64| (q1.rem_euclid(di) * di + q2.rem_euclid(di)) as usize;
    let mut psi = [
        vec![zero; d * d],
        vec![zero; d * d],
        vec![zero; d * d],
        vec![zero; d * d],
        vec![zero; d * d],
    ];
    for j in 0..di {
        psi[0][idx(j, j)] = Complex64::new(s, 0.0);
        psi[1][idx(j + b, j)] = Complex64::new(s, 0.0);
        psi[2][idx(j + b, j)] = omega(d, a * (j + b).rem_euclid(di))? * s;
        psi[3][idx(j, -b)] = omega(d, a * j)? * s;
    }
    psi[4][idx(a, -b)] = Complex64::new(1.0, 0.0);
    let [p1, p2, p3, p4, p5] = psi;
    Ok([
        two_qudit_state(d, p1)?,
        two_qudit_state(d, p2)?,
        two_qudit_state(d, p3)?,
        two_qudit_state(d, p4)?,
        two_qudit_state(d, p5)?,
    ])
}

fn gate_steps(trace: &Trace) -> Vec<(usize, &str)> {
    trace
        .steps
        .iter()
        .enumerate()
        .filter_map(|(i, s)| match &s.detail {
            StepDetail::Gate { gate, .. } => Some((i, gate.as_str())),
            _ => None,
        })
        .collect()
}

/// Checkpoints for a superdense-coding trace: the prepared pair, the pair
/// after Alice's input, and the states after `X^b`, `Z^a`, the subtracting
/// CNOT and Bob's Hadamard. Steps are located by kind, so any interleaving
/// works.
pub fn sdc_checkpoints(trace: &Trace, a: i64, b: i64) -> Result<Vec<Checkpoint>, HarnessError> {
    let d = trace.dimension;
    let [psi1, psi2, psi3, psi4, psi5] = sdc_expected(d, a, b)?;
    let gates = gate_steps(trace);
    let missing = |what: &str| HarnessError::Protocol(format!("trace has no {what} step"));
    let find_gate = |pred: &dyn Fn(&str) -> bool, after: usize| {
        gates
            .iter()
            .find(|(i, g)| *i >= after && pred(g))
            .map(|(i, _)| *i)
    };
    let rc = find_gate(&|g| g == "Rc", 0).ok_or_else(|| missing("pair preparation"))?;
    let input = trace
        .steps
        .iter()
        .position(|s| matches!(s.detail, StepDetail::Input { .. }))
        .ok_or_else(|| missing("input"))?;
    let x = find_gate(&|g| g.starts_with('X'), 0).ok_or_else(|| missing("X"))?;
    let z = find_gate(&|g| g.starts_with('Z'), 0).ok_or_else(|| missing("Z"))?;
    let lc = find_gate(&|g| g == "Lc", 0).ok_or_else(|| missing("Lc"))?;
    let h = find_gate(&|g| g == "H", lc).ok_or_else(|| missing("final H"))?;
    let cp = |after_step, label: &str, expected: &QuantumState| Checkpoint {
        after_step,
        label: label.to_string(),
        expected: expected.clone(),
    };
    Ok(vec![
        cp(rc, "psi1 after pair preparation", &psi1),
        cp(input, "psi1 after input", &psi1),
        cp(x, "psi2 after X^b", &psi2),
        cp(z, "psi3 after Z^a", &psi3),
        cp(lc, "psi4 after Lc", &psi4),
        cp(h, "psi5 after H", &psi5),
    ])
}

fn output_step(trace: &Trace, channel: &str) -> Option<usize> {
    trace.steps.iter().rposition(
        |s| matches!(&s.label, TransitionLabel::Output { channel: c, .. } if c == channel),
    )
}

/// Checks a finished superdense-coding trace for inputs `(a, b)`.
pub fn check_sdc_trace(trace: &Trace, a: i64, b: i64) -> Result<VerificationReport, HarnessError> {
    let d = trace.dimension;
    let di = d as i64;
    if trace.status != RunStatus::Terminated {
        return Err(HarnessError::Incomplete(format!("{:?}", trace.status)));
    }
    let checkpoints = sdc_checkpoints(trace, a, b)?;
    let mut report = trace_to_report(trace, &checkpoints, "sdc")?;

    let oracle = sdc_states(d, a, b);
    for (cp, k) in checkpoints.iter().zip([0, 0, 1, 2, 3, 4]) {
        let expected = two_qudit_state(d, oracle[k].clone())?;
        let fid = configuration_fidelity(&trace.steps[cp.after_step].config, &expected)?;
        let result = checkpoint_result(cp.after_step, format!("psi{} oracle", k + 1), fid);
        report.max_deviation = report.max_deviation.max(result.deviation);
        report.checkpoints.push(result);
    }

    let out =
        output_step(trace, "d").ok_or_else(|| HarnessError::Protocol("no output on d".into()))?;
    let before = trace
        .before(out)
        .as_mixture()
        .ok_or_else(|| HarnessError::Protocol("output from a distribution".into()))?;
    let (label, dist) = output_resolve(&before, "d")?;
    let TransitionLabel::Output { values, .. } = &label else {
        unreachable!("output_resolve yields an output label")
    };
    let deterministic =
        dist.branches.len() == 1 && (dist.branches[0].0 - 1.0).abs() <= VERIFY_TOLERANCE;
    let ints = |tuple: &[Value]| -> Option<[i64; 2]> {
        match tuple {
            [Value::Int(m1), Value::Int(m2)] => Some([*m1, *m2]),
            _ => None,
        }
    };
    let raw = ints(&values[0])
        .ok_or_else(|| HarnessError::Protocol(format!("unexpected output {label}")))?;
    let expected_raw = [a, (di - b).rem_euclid(di)];
    let decoded = [raw[0], (di - raw[1]).rem_euclid(di)];
    let values_match = deterministic && raw == expected_raw && decoded == [a, b];
    report.branches.push(BranchResult {
        branch: format!("a={a},b={b}"),
        expected: format!("{expected_raw:?}"),
        observed: label.to_string(),
        fidelity: None,
        oracle_fidelity: None,
        values_match: Some(values_match),
        weight: dist.branches[0].0,
        expected_weight: 1.0,
        pass: values_match,
    });
    report.outcome = Some(SdcOutcome {
        raw,
        decoded,
        encoded: [a, b],
        probability: dist.branches[0].0,
        deterministic,
    });
    Ok(report.settle())
}

/// Runs superdense coding of `(a, b)` at dimension `d` and checks every
/// intermediate state and the final measurement.
pub fn verify_sdc(d: usize, a: i64, b: i64) -> Result<VerificationReport, HarnessError> {
    let di = d as i64;
    if !(0..di).contains(&a) || !(0..di).contains(&b) {
        return Err(HarnessError::Protocol(format!(
            "inputs ({a}, {b}) must lie in [0, {d})"
        )));
    }
    let program = builtin_program("sdc").expect("builtin");
    let env = Environment::new().with_int("a", a).with_int("b", b);
    let trace = run(&program, d, &env, &Schedule::exhaustive(DEFAULT_DEPTH))?;
    check_sdc_trace(&trace, a, b)
}

/// Checks a finished teleportation trace for input `psi`.
pub fn check_teleport_trace(
    trace: &Trace,
    psi: &QuantumState,
) -> Result<VerificationReport, HarnessError> {
    let d = trace.dimension;
    if trace.status != RunStatus::Terminated {
        return Err(HarnessError::Incomplete(format!("{:?}", trace.status)));
    }
    let out =
        output_step(trace, "d").ok_or_else(|| HarnessError::Protocol("no output on d".into()))?;
    let bob = match &trace.steps[out].label {
        TransitionLabel::Output { values, .. } => match values.first().and_then(|t| t.first()) {
            Some(Value::Name(n)) => n.clone(),
            _ => return Err(HarnessError::Protocol("Bob did not send a qudit".into())),
        },
        _ => unreachable!("located an output step"),
    };
    let mixture = trace
        .final_config()
        .as_mixture()
        .ok_or_else(|| HarnessError::Protocol("final configuration is a distribution".into()))?;
    if mixture.vars.len() < 2 {
        return Err(HarnessError::Protocol(
            "measurement results were not abstracted".into(),
        ));
    }
    let oracle = teleport_branches(d, psi.amplitudes());
    let uniform = 1.0 / (d * d) as f64;
    let mut report = VerificationReport::new("teleport", d);
    let mut seen = BTreeSet::new();
    for c in &mixture.components {
        let (m1, m2) = (c.values[0], c.values[1]);
        seen.insert((m1, m2));
        let others: Vec<String> = c
            .state
            .names()
            .iter()
            .filter(|n| **n != bob)
            .cloned()
            .collect();
        let observed = discard(&c.state, &others)?;
        let fid = fidelity(&observed, psi)?;
        let reference = oracle
            .iter()
            .find(|o| o.m1 as i64 == m1 && o.m2 as i64 == m2)
            .ok_or_else(|| HarnessError::Protocol(format!("no oracle branch ({m1}, {m2})")))?;
        let oracle_fid = overlap(observed.amplitudes(), &reference.bob);
        let pass = (c.weight - uniform).abs() <= VERIFY_TOLERANCE
            && (c.weight - reference.weight).abs() <= VERIFY_TOLERANCE
            && fid >= 1.0 - VERIFY_TOLERANCE
            && oracle_fid >= 1.0 - VERIFY_TOLERANCE;
        report.max_deviation = report.max_deviation.max((1.0 - fid).max(0.0));
        report.branches.push(BranchResult {
            branch: format!("M1={m1},M2={m2}"),
            expected: amplitudes_text(psi.amplitudes()),
            observed: amplitudes_text(observed.amplitudes()),
            fidelity: Some(fid),
            oracle_fidelity: Some(oracle_fid),
            values_match: None,
            weight: c.weight,
            expected_weight: uniform,
            pass,
        });
    }
    if seen.len() != d * d || mixture.components.len() != d * d {
        report.branches.push(BranchResult {
            branch: "coverage".into(),
            expected: format!("{} distinct branches", d * d),
            observed: format!("{} distinct branches", seen.len()),
            fidelity: None,
            oracle_fidelity: None,
            values_match: Some(false),
            weight: mixture.total_weight(),
            expected_weight: 1.0,
            pass: false,
        });
    }
    Ok(report.settle())
}

/// Teleports `psi` at dimension `d` and checks every measurement branch
/// against the input and the dense-matrix oracle.
pub fn verify_teleport(d: usize, psi: &QuantumState) -> Result<VerificationReport, HarnessError> {
    if psi.num_qudits() != 1 || psi.dimension() != d {
        return Err(HarnessError::Protocol(format!(
            "input must be a single qudit of dimension {d}"
        )));
    }
    let program = builtin_program("teleport").expect("builtin");
    let env = Environment::new().with_state("x", psi.clone());
    let trace = run(&program, d, &env, &Schedule::exhaustive(DEFAULT_DEPTH))?;
    check_teleport_trace(&trace, psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::parse_state_literal;

    #[test]
    fn teleport_plus_state_qubit() {
        let psi = parse_state_literal("0.7071:0,0.7071:1", 2, "x").unwrap();
        let report = verify_teleport(2, &psi).unwrap();
        assert!(report.pass, "{report:#?}");
        assert_eq!(report.branches.len(), 4);
        for b in &report.branches {
            assert!((b.weight - 0.25).abs() < 1e-9);
        }
    }

    #[test]
    fn teleport_basis_qutrit() {
        let psi = parse_state_literal("|2>", 3, "x").unwrap();
        let report = verify_teleport(3, &psi).unwrap();
        assert!(report.pass, "{report:#?}");
        assert_eq!(report.branches.len(), 9);
    }

    #[test]
    fn sdc_qutrit_example() {
        let report = verify_sdc(3, 1, 2).unwrap();
        assert!(report.pass, "{report:#?}");
        let outcome = report.outcome.unwrap();
        assert_eq!(outcome.raw, [1, 1]);
        assert_eq!(outcome.decoded, [1, 2]);
        assert!(outcome.deterministic);
    }

    #[test]
    fn sdc_qubit_and_identity() {
        let report = verify_sdc(2, 1, 1).unwrap();
        assert_eq!(report.outcome.unwrap().raw, [1, 1]);
        for d in [2, 3, 5] {
            let report = verify_sdc(d, 0, 0).unwrap();
            assert!(report.pass);
            assert_eq!(report.outcome.unwrap().decoded, [0, 0]);
        }
    }

    #[test]
    fn sdc_trace_shape() {
        let program = builtin_program("sdc").unwrap();
        let env = Environment::new().with_int("a", 1).with_int("b", 2);
        let trace = run(&program, 3, &env, &Schedule::exhaustive(100)).unwrap();
        let kinds: Vec<String> = trace
            .steps
            .iter()
            .map(|s| match (&s.label, &s.detail) {
                (TransitionLabel::Tau, StepDetail::Gate { gate, .. }) => gate.clone(),
                (TransitionLabel::Tau, StepDetail::Communicate { .. }) => "comm".into(),
                (TransitionLabel::Tau, StepDetail::Measure { .. }) => "measure".into(),
                (TransitionLabel::Tau, _) => "tau".into(),
                (label, _) => label.to_string(),
            })
            .collect();
        assert_eq!(
            kinds,
            [
                "tau", "H", "Rc", "tau", "c?[1,2]", "X^2", "Z^1", "comm", "Lc", "H", "measure",
                "measure", "d![1,1]"
            ]
        );
    }

    #[test]
    fn wrong_checkpoint_fails_with_deviation() {
        let program = builtin_program("sdc").unwrap();
        let env = Environment::new().with_int("a", 1).with_int("b", 2);
        let trace = run(&program, 3, &env, &Schedule::exhaustive(100)).unwrap();
        let mut cps = sdc_checkpoints(&trace, 1, 2).unwrap();
        assert!(trace_to_report(&trace, &cps, "sdc").unwrap().pass);
        cps[5].expected = QuantumState::basis(3, ["q1", "q2"], &[0, 0]).unwrap();
        let report = trace_to_report(&trace, &cps, "sdc").unwrap();
        assert!(!report.pass);
        assert!((report.max_deviation - 1.0).abs() < 1e-12);
        assert!(trace_to_report(&trace, &[], "sdc").unwrap().pass);
        cps[0].after_step = 99;
        assert!(matches!(
            trace_to_report(&trace, &cps, "sdc"),
            Err(HarnessError::MisalignedCheckpoint { .. })
        ));
    }
}
