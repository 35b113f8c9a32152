#![allow(dead_code)]

use std::f64::consts::PI;

use cqpd_core::qudit::QuantumState;
use cqpd_core::syntax::{
    Binder, Definition, Entry, Expr, GateExpr, ProcessTerm, Program, Span, TypeExpr,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

pub const CORPUS: [&str; 2] = ["teleport", "sdc"];

pub fn corpus_path(rel: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join("corpus")
        .join(rel)
}

pub fn read_corpus(rel: &str) -> String {
    std::fs::read_to_string(corpus_path(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

// ---------------------------------------------------------------- states

pub fn root(d: usize, k: i64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * k.rem_euclid(d as i64) as f64 / d as f64)
}

pub fn random_amplitudes<R: Rng>(len: usize, rng: &mut R) -> Vec<Complex64> {
    let raw: Vec<Complex64> = (0..len)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    raw.into_iter().map(|a| a / norm).collect()
}

pub fn qudit_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("q{i}")).collect()
}

pub fn random_state<R: Rng>(d: usize, n: usize, rng: &mut R) -> QuantumState {
    let amps = random_amplitudes(d.pow(n as u32), rng);
    QuantumState::from_amplitudes(d, qudit_names(n), amps).unwrap()
}

/// `|<a|b>|^2` of raw vectors.
pub fn overlap(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.conj() * y)
        .sum::<Complex64>()
        .norm_sqr()
}

/// Base-`d` digits of `index` over `n` positions, most significant first.
pub fn digits(mut index: usize, d: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for slot in out.iter_mut().rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

/// Projector oracle for measuring `targets` (positions into the register):
/// for every outcome, zero all amplitudes whose target digits differ and
/// renormalize. Returns `(outcome, weight, post-state amplitudes)`.
pub fn projector_measure(
    amps: &[Complex64],
    d: usize,
    n: usize,
    targets: &[usize],
) -> Vec<(usize, f64, Vec<Complex64>)> {
    let r = targets.len();
    let mut out = Vec::new();
    for m in 0..d.pow(r as u32) {
        let want = digits(m, d, r);
        let kept: Vec<Complex64> = amps
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let ds = digits(i, d, n);
                if targets.iter().zip(&want).all(|(&t, &w)| ds[t] == w) {
                    *a
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        let weight: f64 = kept.iter().map(|a| a.norm_sqr()).sum();
        if weight > 0.0 {
            let post = kept.iter().map(|a| a / weight.sqrt()).collect();
            out.push((m, weight, post));
        }
    }
    out
}

// ---------------------------------------------------------- dense matrices

pub type Dense = Vec<Vec<Complex64>>;

pub fn zeros(n: usize) -> Dense {
    vec![vec![Complex64::new(0.0, 0.0); n]; n]
}

pub fn eye(n: usize) -> Dense {
    let mut m = zeros(n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    m
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let mut out = zeros(n);
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn dagger(a: &Dense) -> Dense {
    let n = a.len();
    let mut out = zeros(n);
    for i in 0..n {
        for j in 0..n {
            out[j][i] = a[i][j].conj();
        }
    }
    out
}

pub fn max_diff(a: &Dense, b: &Dense) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn to_dense(flat: &[Complex64], n: usize) -> Dense {
    flat.chunks(n).map(|r| r.to_vec()).collect()
}

pub fn apply_dense(m: &Dense, v: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// Reference matrices written straight from the gate definitions.
pub fn x_dense(d: usize, j: i64) -> Dense {
    let mut m = zeros(d);
    for col in 0..d {
        m[(col as i64 + j).rem_euclid(d as i64) as usize][col] = Complex64::new(1.0, 0.0);
    }
    m
}

pub fn z_dense(d: usize, k: i64) -> Dense {
    let mut m = zeros(d);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = root(d, k * i as i64);
    }
    m
}

pub fn h_dense(d: usize) -> Dense {
    (0..d)
        .map(|row| {
            (0..d)
                .map(|col| root(d, -((row * col) as i64)) / (d as f64).sqrt())
                .collect()
        })
        .collect()
}

pub fn cnot_dense(d: usize, sign: i64) -> Dense {
    let mut m = zeros(d * d);
    for c in 0..d {
        for t in 0..d {
            let out = (t as i64 + sign * c as i64).rem_euclid(d as i64) as usize;
            m[c * d + out][c * d + t] = Complex64::new(1.0, 0.0);
        }
    }
    m
}

pub fn kron(a: &Dense, b: &Dense) -> Dense {
    let (n, k) = (a.len(), b.len());
    let mut out = zeros(n * k);
    for i in 0..n {
        for j in 0..n {
            for p in 0..k {
                for q in 0..k {
                    out[i * k + p][j * k + q] = a[i][j] * b[p][q];
                }
            }
        }
    }
    out
}

// ------------------------------------------------------------- random ASTs

const NAMES: [&str; 8] = ["a", "b", "c", "x", "y", "z", "q1", "m'"];
const PROCS: [&str; 4] = ["P", "Q", "Alice", "Bob_2"];

fn name() -> impl Strategy<Value = String> {
    prop::sample::select(NAMES.to_vec()).prop_map(str::to_string)
}

fn names(max: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(name(), 1..=max)
}

pub fn arb_type() -> impl Strategy<Value = TypeExpr> {
    let leaf = prop_oneof![Just(TypeExpr::Qdit), Just(TypeExpr::Val)];
    leaf.prop_recursive(2, 8, 3, |inner| {
        prop::collection::vec(inner, 1..=3).prop_map(TypeExpr::Chan)
    })
}

pub fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0i64..50).prop_map(Expr::Literal),
        name().prop_map(Expr::Var),
        names(3).prop_map(Expr::Measure),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Plus(Box::new(a), Box::new(b))),
            inner.prop_map(|a| Expr::Neg(Box::new(a))),
        ]
    })
}

pub fn arb_gate() -> impl Strategy<Value = GateExpr> {
    prop_oneof![
        Just(GateExpr::Hadamard),
        Just(GateExpr::HadamardInv),
        Just(GateExpr::CnotRight),
        Just(GateExpr::CnotLeft),
        arb_expr().prop_map(GateExpr::ShiftX),
        arb_expr().prop_map(GateExpr::PhaseZ),
        (arb_expr(), arb_expr()).prop_map(|(j, k)| GateExpr::PauliU(j, k)),
    ]
}

fn binders() -> impl Strategy<Value = Vec<Binder>> {
    prop::collection::vec(
        (name(), arb_type()).prop_map(|(n, t)| Binder::new(n, t)),
        1..=3,
    )
}

pub fn arb_term() -> impl Strategy<Value = ProcessTerm> {
    let span = Span::default();
    let leaf = prop_oneof![
        3 => Just(ProcessTerm::Nil),
        1 => (prop::sample::select(PROCS.to_vec()), prop::collection::vec(arb_expr(), 0..3))
            .prop_map(move |(n, args)| ProcessTerm::Call { name: n.to_string(), args, span }),
    ];
    leaf.prop_recursive(5, 40, 2, move |inner| {
        let cont = inner.clone().prop_map(Box::new);
        prop_oneof![
            (name(), binders(), cont.clone()).prop_map(move |(chan, binders, cont)| {
                ProcessTerm::Input {
                    chan,
                    binders,
                    cont,
                    span,
                }
            }),
            (
                name(),
                prop::collection::vec(arb_expr(), 1..=3),
                cont.clone()
            )
                .prop_map(move |(chan, payload, cont)| ProcessTerm::Output {
                    chan,
                    payload,
                    cont,
                    span
                }),
            (names(2), arb_gate(), cont.clone()).prop_map(move |(targets, gate, cont)| {
                ProcessTerm::Action {
                    targets,
                    gate,
                    cont,
                    span,
                }
            }),
            (names(3), cont.clone()).prop_map(move |(names, cont)| ProcessTerm::QditAlloc {
                names,
                cont,
                span
            }),
            (name(), arb_type(), cont).prop_map(move |(name, ty, cont)| ProcessTerm::NewChan {
                name,
                ty,
                cont,
                span
            }),
            (inner.clone(), inner).prop_map(|(a, b)| ProcessTerm::parallel(a, b)),
        ]
    })
}

pub fn arb_program() -> impl Strategy<Value = Program> {
    let def = (
        prop::collection::vec(
            (name(), arb_type()).prop_map(|(n, t)| Binder::new(n, t)),
            0..3,
        ),
        arb_term(),
    );
    (
        prop::collection::vec(def, 1..=3),
        prop::collection::vec(arb_expr(), 0..3),
        0usize..3,
    )
        .prop_map(|(defs, args, pick)| {
            let definitions: Vec<Definition> = defs
                .into_iter()
                .enumerate()
                .map(|(i, (params, body))| Definition {
                    name: PROCS[i].to_string(),
                    params,
                    body,
                    span: Span::default(),
                })
                .collect();
            let entry = Entry {
                name: definitions[pick % definitions.len()].name.clone(),
                args,
                span: Span::default(),
            };
            Program { definitions, entry }
        })
}

// ------------------------------------------------- well-formed programs

/// A closed, well-typed program built from a random recipe: allocate `n`
/// qudits, apply gates, then either measure on a free channel or hand
/// measurement results to a parallel receiver over a private channel.
pub fn arb_runnable_source() -> impl Strategy<Value = String> {
    let gate = prop_oneof![
        Just("H".to_string()),
        Just("Hinv".to_string()),
        (0i64..5).prop_map(|k| format!("X^{k}")),
        (0i64..5).prop_map(|k| format!("Z^{k}")),
        (0i64..5, 0i64..5).prop_map(|(j, k)| format!("U^({j}, {k})")),
    ];
    let op = (gate, 0usize..3, 0usize..3, any::<bool>());
    (
        2usize..=3,
        prop::collection::vec(op, 0..6),
        any::<bool>(),
        1usize..=2,
    )
        .prop_map(|(n, ops, private, measured)| {
            let qs: Vec<String> = (0..n).map(|i| format!("r{i}")).collect();
            let mut prefix = String::new();
            for (g, i, j, two) in ops {
                let (i, j) = (i % n, j % n);
                if two && i != j {
                    let g = if g.len() % 2 == 0 { "Rc" } else { "Lc" };
                    prefix.push_str(&format!("{{{},{} *= {g}}}.", qs[i], qs[j]));
                } else {
                    prefix.push_str(&format!("{{{} *= {g}}}.", qs[i]));
                }
            }
            let measured: Vec<String> = qs[..measured]
                .iter()
                .map(|q| format!("measure {q}"))
                .collect();
            let body = if private {
                let tys = vec!["Val"; measured.len()].join(",");
                let binders: Vec<String> =
                    (0..measured.len()).map(|i| format!("v{i}:Val")).collect();
                let vars: Vec<String> = (0..measured.len()).map(|i| format!("v{i}")).collect();
                format!(
                    "(new e:^[{tys}])({prefix}e![{}].0 | e?[{}].out![{}].0)",
                    measured.join(", "),
                    binders.join(", "),
                    vars.join(", ")
                )
            } else {
                format!("{prefix}out![{}].0", measured.join(", "))
            };
            let tys = vec!["Val"; measured.len()].join(",");
            format!(
                "Run(out:^[{tys}]) = (qdit {})({body})\nmain = Run(out)\n",
                qs.join(",")
            )
        })
}

// --------------------------------------------------------- protocol checks

use cqpd_core::harness::{RunStatus, Trace};
use cqpd_core::semantics::{
    base_name, transitions, Configuration, Environment, StepDetail, TransitionLabel, Value,
};

pub type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

/// `<psi| rho_keep |psi>` where `rho_keep` is the reduced state of the
/// qudits whose base names are `keep`, in that order.
pub fn reduced_fidelity(
    state: &QuantumState,
    keep: &[&str],
    psi: &[Complex64],
) -> Result<f64, String> {
    let d = state.dimension();
    let n = state.num_qudits();
    let pos: Vec<usize> = keep
        .iter()
        .map(|k| {
            state
                .names()
                .iter()
                .position(|q| base_name(q) == *k)
                .ok_or_else(|| format!("no qudit {k} in {:?}", state.names()))
        })
        .collect::<Result<_, _>>()?;
    let rest: Vec<usize> = (0..n).filter(|i| !pos.contains(i)).collect();
    let mut total = 0.0;
    for r in 0..d.pow(rest.len() as u32) {
        let rd = digits(r, d, rest.len());
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, p) in psi.iter().enumerate() {
            let kd = digits(k, d, keep.len());
            let mut full = vec![0; n];
            for (i, &q) in pos.iter().enumerate() {
                full[q] = kd[i];
            }
            for (i, &q) in rest.iter().enumerate() {
                full[q] = rd[i];
            }
            acc += p.conj() * state.amplitude(&full);
        }
        total += acc.norm_sqr();
    }
    Ok(total)
}

/// Weighted fidelity of a pure or mixed configuration with `psi` on `keep`.
pub fn config_fidelity(
    config: &Configuration,
    keep: &[&str],
    psi: &[Complex64],
) -> Result<f64, String> {
    match config {
        Configuration::Pure(p) => reduced_fidelity(&p.sigma, keep, psi),
        Configuration::Mixed(m) => m.components.iter().try_fold(0.0, |acc, c| {
            Ok(acc + c.weight * reduced_fidelity(&c.state, keep, psi)?)
        }),
        Configuration::Distribution(_) => Err("fidelity of a distribution".into()),
    }
}

fn last_output(trace: &Trace, channel: &str) -> Option<usize> {
    trace.steps.iter().rposition(
        |s| matches!(&s.label, TransitionLabel::Output { channel: c, .. } if c == channel),
    )
}

/// Every measurement branch of a teleport run carries weight `1/d^2` and
/// leaves Bob's qudit in `psi`; all `d^2` value pairs occur.
pub fn check_teleport(trace: &Trace, psi: &[Complex64], tol: f64) -> Check {
    let d = trace.dimension;
    ensure!(
        trace.status == RunStatus::Terminated,
        "status {:?}",
        trace.status
    );
    let out = last_output(trace, "d").ok_or("no output on d")?;
    let bob = match &trace.steps[out].label {
        TransitionLabel::Output { values, .. } => match values.as_slice() {
            [tuple] => match tuple.as_slice() {
                [Value::Name(n)] => n.clone(),
                other => return Err(format!("Bob sent {other:?}")),
            },
            other => return Err(format!("Bob output split into {} tuples", other.len())),
        },
        _ => unreachable!(),
    };
    let Configuration::Mixed(m) = trace.final_config() else {
        return Err("final configuration is not a mixture".into());
    };
    ensure!(
        m.components.len() == d * d,
        "{} components",
        m.components.len()
    );
    let mut seen = std::collections::BTreeSet::new();
    for c in &m.components {
        ensure!(
            (c.weight - 1.0 / (d * d) as f64).abs() <= tol,
            "branch {:?} weight {}",
            c.values,
            c.weight
        );
        let f = reduced_fidelity(&c.state, &[base_name(&bob)], psi)?;
        ensure!(f >= 1.0 - tol, "branch {:?} fidelity {f}", c.values);
        seen.insert(c.values.clone());
    }
    ensure!(seen.len() == d * d, "only {} distinct branches", seen.len());
    Ok(())
}

/// Closed-form superdense-coding states over `(q1, q2)`.
pub fn sdc_closed_forms(d: usize, a: i64, b: i64) -> [Vec<Complex64>; 5] {
    let di = d as i64;
    let s = 1.0 / (d as f64).sqrt();
    let idx = |x: i64, y: i64| (x.rem_euclid(di) * di + y.rem_euclid(di)) as usize;
    let mut psi = vec![vec![Complex64::new(0.0, 0.0); d * d]; 5];
    for j in 0..di {
        psi[0][idx(j, j)] += s;
        psi[1][idx(j + b, j)] += s;
        psi[2][idx(j + b, j)] += root(d, a * (j + b)) * s;
        psi[3][idx(j, -b)] += root(d, a * j) * s;
    }
    psi[4][idx(a, -b)] = Complex64::new(1.0, 0.0);
    psi.try_into().unwrap()
}

fn gate_step(trace: &Trace, pred: impl Fn(&str) -> bool, from: usize) -> Option<usize> {
    trace
        .steps
        .iter()
        .enumerate()
        .skip(from)
        .find_map(|(i, s)| match &s.detail {
            StepDetail::Gate { gate, .. } if pred(gate) => Some(i),
            _ => None,
        })
}

/// States after the pair preparation, `X^b`, `Z^a`, `Lc` and the final `H`
/// match the closed forms, and Bob's deterministic output is `(a, -b)`.
pub fn check_sdc(trace: &Trace, a: i64, b: i64, tol: f64) -> Check {
    let d = trace.dimension;
    let di = d as i64;
    ensure!(
        trace.status == RunStatus::Terminated,
        "status {:?}",
        trace.status
    );
    let psi = sdc_closed_forms(d, a, b);
    let rc = gate_step(trace, |g| g == "Rc", 0).ok_or("no Rc")?;
    let x = gate_step(trace, |g| g.starts_with('X'), 0).ok_or("no X")?;
    let z = gate_step(trace, |g| g.starts_with('Z'), 0).ok_or("no Z")?;
    let lc = gate_step(trace, |g| g == "Lc", 0).ok_or("no Lc")?;
    let h = gate_step(trace, |g| g == "H", lc).ok_or("no final H")?;
    for (k, step) in [rc, x, z, lc, h].into_iter().enumerate() {
        let f = config_fidelity(&trace.steps[step].config, &["q1", "q2"], &psi[k])?;
        ensure!(
            f >= 1.0 - tol,
            "psi{} fidelity {f} after step {step}",
            k + 1
        );
    }
    let out = last_output(trace, "d").ok_or("no output on d")?;
    let want = vec![vec![Value::Int(a), Value::Int((di - b).rem_euclid(di))]];
    match &trace.steps[out].label {
        TransitionLabel::Output { values, .. } => {
            ensure!(*values == want, "output {values:?}, expected {want:?}");
            let Value::Int(raw) = values[0][1] else {
                unreachable!()
            };
            ensure!((di - raw).rem_euclid(di) == b, "decoded second digit wrong");
        }
        _ => unreachable!(),
    }
    Ok(())
}

// -------------------------------------------------------------- examples

pub fn term_of(src: &str) -> cqpd_core::syntax::ProcessTerm {
    cqpd_core::syntax::parse(&format!("T() = {src}"))
        .unwrap()
        .definitions[0]
        .body
        .clone()
}

pub fn only_step(config: &Configuration) -> Result<cqpd_core::semantics::Transition, String> {
    let mut ts = transitions(config, &Environment::new()).map_err(|e| e.to_string())?;
    ensure!(ts.len() == 1, "{} transitions enabled", ts.len());
    Ok(ts.remove(0))
}

/// Measuring `q` in `sum a_i |i>` yields a mixture with weights `|a_i|^2`.
pub fn check_example_measurement(state: &QuantumState, tol: f64) -> Check {
    let start = Configuration::pure(state.clone(), vec!["q".into()], term_of("c![measure q].0"));
    let Configuration::Mixed(m) = only_step(&start)?.target else {
        return Err("measurement did not give a mixture".into());
    };
    ensure!(
        m.components.len() == state.dimension(),
        "{} components",
        m.components.len()
    );
    for c in &m.components {
        let i = c.values[0] as usize;
        let want = state.amplitudes()[i].norm_sqr();
        ensure!(
            (c.weight - want).abs() <= tol,
            "weight {} vs {want}",
            c.weight
        );
    }
    Ok(())
}

/// Sending the measured value emits the whole outcome set and turns into a
/// distribution with probabilities `|a_i|^2`.
pub fn check_example_output(state: &QuantumState, tol: f64) -> Check {
    let d = state.dimension();
    let start = Configuration::pure(state.clone(), vec!["q".into()], term_of("c![measure q].0"));
    let mixed = only_step(&start)?.target;
    let t = only_step(&mixed)?;
    let all: std::collections::BTreeSet<Value> = (0..d as i64).map(Value::Int).collect();
    ensure!(t.label.slot_values(0) == all, "label {}", t.label);
    let Configuration::Distribution(dist) = &t.target else {
        return Err("output did not give a distribution".into());
    };
    ensure!(dist.branches.len() == d, "{} branches", dist.branches.len());
    for (p, branch) in &dist.branches {
        let Configuration::Pure(b) = branch else {
            return Err("branch is not pure".into());
        };
        let i = (0..d)
            .find(|&i| (b.sigma.amplitude(&[i]).norm() - 1.0).abs() < 1e-9)
            .ok_or("branch state is not a basis state")?;
        let want = state.amplitudes()[i].norm_sqr();
        ensure!((p - want).abs() <= tol, "probability {p} vs {want}");
    }
    Ok(())
}

/// An internal communication inside a mixture is a tau step that keeps
/// the weights and passes the abstracted value to the receiver.
pub fn check_example_communication(state: &QuantumState, tol: f64) -> Check {
    let start = Configuration::pure(
        state.clone(),
        vec!["q".into()],
        term_of("(new c:^[Val])(c![measure q].0 | c?[y:Val].e![y].0)"),
    );
    let scoped = only_step(&start)?.target;
    let Configuration::Mixed(before) = only_step(&scoped)?.target else {
        return Err("measurement did not give a mixture".into());
    };
    let comm = only_step(&Configuration::Mixed(before.clone()))?;
    ensure!(comm.label == TransitionLabel::Tau, "label {}", comm.label);
    let Configuration::Mixed(after) = &comm.target else {
        return Err("communication left the mixture".into());
    };
    ensure!(
        after.components.len() == before.components.len(),
        "component count changed"
    );
    for (x, y) in after.components.iter().zip(&before.components) {
        ensure!((x.weight - y.weight).abs() <= tol, "weight changed");
    }
    for i in 0..after.components.len() {
        let want = after.components[i].values[0];
        match after.component_term(i) {
            cqpd_core::syntax::ProcessTerm::Output { chan, payload, .. } => {
                ensure!(chan == "e", "receiver continuation on {chan}");
                ensure!(
                    payload == vec![cqpd_core::syntax::Expr::Literal(want)],
                    "component {i} payload {payload:?}"
                );
            }
            other => return Err(format!("receiver continuation {other:?}")),
        }
    }
    Ok(())
}
