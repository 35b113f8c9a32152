use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::qudit::{join, make_state, QuantumState};
use crate::syntax::{pretty_gate, Binder, Expr, ProcessTerm, TypeExpr};

use super::config::{
    Component, Configuration, MixedConfiguration, ProbDistribution, StepDetail, TransitionLabel,
    Value,
};
use super::eval::{expr_step, find_redex, plug_redex, Redex};
use super::subst::{base_name, free_names, fresh_name, subst_term, Substitution};
use super::SemanticsError;

/// Something the environment can send on a free channel.
#[derive(Debug, Clone, PartialEq)]
pub enum EnvValue {
    Int(i64),
    State(QuantumState),
}

/// Values offered by the environment to external inputs, keyed by the
/// source name of the receiving binder.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Environment {
    bindings: BTreeMap<String, EnvValue>,
}

impl Environment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: EnvValue) {
        self.bindings.insert(name.into(), value);
    }

    pub fn with_int(mut self, name: impl Into<String>, value: i64) -> Self {
        self.insert(name, EnvValue::Int(value));
        self
    }

    pub fn with_state(mut self, name: impl Into<String>, state: QuantumState) -> Self {
        self.insert(name, EnvValue::State(state));
        self
    }

    pub fn get(&self, name: &str) -> Option<&EnvValue> {
        self.bindings.get(base_name(name))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &EnvValue)> {
        self.bindings.iter()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub label: TransitionLabel,
    pub detail: StepDetail,
    pub target: Configuration,
}

type Path = Vec<bool>;

fn collect_leaves<'a>(
    term: &'a ProcessTerm,
    path: &mut Path,
    out: &mut Vec<(Path, &'a ProcessTerm)>,
) {
    match term {
        ProcessTerm::Parallel(a, b) => {
            path.push(false);
            collect_leaves(a, path, out);
            path.pop();
            path.push(true);
            collect_leaves(b, path, out);
            path.pop();
        }
        ProcessTerm::Nil => {}
        leaf => out.push((path.clone(), leaf)),
    }
}

fn replace_at(term: &ProcessTerm, path: &[bool], new: ProcessTerm) -> ProcessTerm {
    match (path.split_first(), term) {
        (None, _) => new,
        (Some((false, rest)), ProcessTerm::Parallel(a, b)) => {
            ProcessTerm::Parallel(Box::new(replace_at(a, rest, new)), b.clone())
        }
        (Some((true, rest)), ProcessTerm::Parallel(a, b)) => {
            ProcessTerm::Parallel(a.clone(), Box::new(replace_at(b, rest, new)))
        }
        _ => unreachable!("leaf paths follow parallel nodes"),
    }
}

/// Drops `0` from parallel compositions.
pub fn prune(term: ProcessTerm) -> ProcessTerm {
    match term {
        ProcessTerm::Parallel(a, b) => match (prune(*a), prune(*b)) {
            (ProcessTerm::Nil, r) => r,
            (l, ProcessTerm::Nil) => l,
            (l, r) => ProcessTerm::parallel(l, r),
        },
        other => other,
    }
}

fn finish(mut m: MixedConfiguration) -> Configuration {
    m.term = prune(m.term);
    m.normalize()
}

fn with_term(m: &MixedConfiguration, path: &[bool], new: ProcessTerm) -> MixedConfiguration {
    MixedConfiguration {
        term: replace_at(&m.term, path, new),
        ..m.clone()
    }
}

/// Every enabled one-step transition, in leaf order. A terminated or stuck
/// configuration has none.
pub fn transitions(
    config: &Configuration,
    env: &Environment,
) -> Result<Vec<Transition>, SemanticsError> {
    let m = match config {
        Configuration::Distribution(d) => {
            return Ok(d
                .branches
                .iter()
                .enumerate()
                .map(|(index, (p, branch))| Transition {
                    label: TransitionLabel::ProbBranch { probability: *p },
                    detail: StepDetail::Branch { index },
                    target: branch.clone(),
                })
                .collect())
        }
        other => other.as_mixture().expect("pure or mixed"),
    };
    let mut leaves = Vec::new();
    collect_leaves(&m.term, &mut Vec::new(), &mut leaves);

    let mut out = Vec::new();
    for (path, leaf) in &leaves {
        match leaf {
            ProcessTerm::Nil | ProcessTerm::Parallel(..) => {}
            ProcessTerm::Call { name, .. } => {
                return Err(SemanticsError::Uninstantiated(name.clone()))
            }
            ProcessTerm::QditAlloc { names, cont, .. } => out.push(alloc(&m, path, names, cont)?),
            ProcessTerm::NewChan { name, cont, .. } => {
                let mut next = m.clone();
                let fresh = fresh_name(name, &mut next.next_fresh);
                let map = Substitution::from([(name.clone(), Expr::Var(fresh.clone()))]);
                let cont = subst_term(cont, &map, &mut next.next_fresh);
                next.restricted.insert(fresh.clone());
                out.push(Transition {
                    label: TransitionLabel::Tau,
                    detail: StepDetail::NewChannel { channel: fresh },
                    target: finish(with_term(&next, path, cont)),
                });
            }
            ProcessTerm::Action {
                targets,
                gate,
                cont,
                ..
            } => {
                let redex = Redex::Transform {
                    targets: targets.clone(),
                    gate: gate.clone(),
                };
                let next = expr_step(&m, &redex, "")?;
                out.push(Transition {
                    label: TransitionLabel::Tau,
                    detail: StepDetail::Gate {
                        gate: pretty_gate(gate),
                        targets: targets.clone(),
                    },
                    target: finish(with_term(&next, path, (**cont).clone())),
                });
            }
            ProcessTerm::Output {
                chan,
                payload,
                cont,
                span,
            } => {
                if let Some(i) = payload.iter().position(|e| !e.is_value()) {
                    out.push(eval_payload(&m, path, chan, payload, i, cont, *span)?);
                    continue;
                }
                for (other, receiver) in &leaves {
                    if let ProcessTerm::Input {
                        chan: c,
                        binders,
                        cont: rcont,
                        ..
                    } = receiver
                    {
                        if c == chan {
                            out.push(communicate(
                                &m,
                                chan,
                                (path, payload, cont),
                                (other, binders, rcont),
                            )?);
                        }
                    }
                }
                if !m.restricted.contains(chan) {
                    let (label, branches) = resolve(&m, path, chan, payload, cont)?;
                    let target = if branches.len() == 1 {
                        finish(branches.into_iter().next().expect("one branch").1)
                    } else {
                        Configuration::Distribution(ProbDistribution {
                            branches: branches.into_iter().map(|(p, b)| (p, finish(b))).collect(),
                        })
                    };
                    out.push(Transition {
                        label,
                        detail: StepDetail::Output {
                            channel: chan.clone(),
                        },
                        target,
                    });
                }
            }
            ProcessTerm::Input {
                chan,
                binders,
                cont,
                ..
            } => {
                if !m.restricted.contains(chan) {
                    out.extend(external_input(&m, path, chan, binders, cont, env)?);
                }
            }
        }
    }
    Ok(out)
}

fn alloc(
    m: &MixedConfiguration,
    path: &[bool],
    names: &[String],
    cont: &ProcessTerm,
) -> Result<Transition, SemanticsError> {
    let mut next = m.clone();
    let fresh: Vec<String> = names
        .iter()
        .map(|n| fresh_name(n, &mut next.next_fresh))
        .collect();
    let map: Substitution = names
        .iter()
        .cloned()
        .zip(fresh.iter().map(|f| Expr::Var(f.clone())))
        .collect();
    let cont = subst_term(cont, &map, &mut next.next_fresh);
    let zeros = make_state(m.dimension(), fresh.clone())?;
    for c in &mut next.components {
        c.state = join(&c.state, &zeros)?;
    }
    next.omega.extend(fresh.iter().cloned());
    Ok(Transition {
        label: TransitionLabel::Tau,
        detail: StepDetail::Alloc { qudits: fresh },
        target: finish(with_term(&next, path, cont)),
    })
}

fn eval_payload(
    m: &MixedConfiguration,
    path: &[bool],
    chan: &str,
    payload: &[Expr],
    slot: usize,
    cont: &ProcessTerm,
    span: crate::syntax::Span,
) -> Result<Transition, SemanticsError> {
    let redex = find_redex(&payload[slot]).expect("non-value expression has a redex");
    let mut counter = m.next_fresh;
    let var = fresh_name(
        if matches!(redex, Redex::Measure(_)) {
            "m"
        } else {
            "v"
        },
        &mut counter,
    );
    let mut next = expr_step(m, &redex, &var)?;
    next.next_fresh = counter;
    let mut payload = payload.to_vec();
    payload[slot] = plug_redex(&payload[slot], &Expr::Var(var.clone()));
    let detail = match redex {
        Redex::Measure(qudits) => StepDetail::Measure { qudits, var },
        _ => StepDetail::Arithmetic { var },
    };
    let term = ProcessTerm::Output {
        chan: chan.to_string(),
        payload,
        cont: Box::new(cont.clone()),
        span,
    };
    Ok(Transition {
        label: TransitionLabel::Tau,
        detail,
        target: finish(with_term(&next, path, term)),
    })
}

type Sender<'a> = (&'a Path, &'a [Expr], &'a ProcessTerm);
type Receiver<'a> = (&'a Path, &'a [Binder], &'a ProcessTerm);

/// `c![v].P | c?[x].Q --tau--> P | Q{v/x}`; abstracted variables flow into
/// the receiver unchanged, so a mixture stays mixed.
fn communicate(
    m: &MixedConfiguration,
    channel: &str,
    (spath, payload, scont): Sender,
    (rpath, binders, rcont): Receiver,
) -> Result<Transition, SemanticsError> {
    if payload.len() != binders.len() {
        return Err(SemanticsError::ArityMismatch {
            what: "communication".into(),
            expected: binders.len(),
            found: payload.len(),
        });
    }
    let mut next = m.clone();
    let map: Substitution = binders
        .iter()
        .map(|b| b.name.clone())
        .zip(payload.iter().cloned())
        .collect();
    let received = subst_term(rcont, &map, &mut next.next_fresh);
    let term = replace_at(&m.term, spath, scont.clone());
    next.term = replace_at(&term, rpath, received);
    Ok(Transition {
        label: TransitionLabel::Tau,
        detail: StepDetail::Communicate {
            channel: channel.to_string(),
        },
        target: finish(next),
    })
}

fn emitted(m: &MixedConfiguration, component: &Component, payload: &[Expr]) -> Vec<Value> {
    payload
        .iter()
        .map(|e| match e {
            Expr::Literal(i) => Value::Int(*i),
            Expr::Var(n) => match m.vars.iter().position(|v| v == n) {
                Some(i) => Value::Int(component.values[i]),
                None => Value::Name(n.clone()),
            },
            other => unreachable!("payload {other:?} is not a value"),
        })
        .collect()
}

/// Splits an external output into branches keyed by the emitted tuple.
fn resolve(
    m: &MixedConfiguration,
    path: &[bool],
    chan: &str,
    payload: &[Expr],
    cont: &ProcessTerm,
) -> Result<(TransitionLabel, Vec<(f64, MixedConfiguration)>), SemanticsError> {
    let mut skeleton = with_term(m, path, cont.clone());
    for e in payload {
        if let Expr::Var(n) = e {
            if m.qudit_names().contains(n) {
                let owned = skeleton.omega.iter().position(|q| q == n);
                let at = owned.ok_or_else(|| SemanticsError::OwnershipViolation(n.clone()))?;
                skeleton.omega.remove(at);
            }
            skeleton.restricted.remove(n);
        }
    }
    let mut groups: BTreeMap<Vec<Value>, Vec<Component>> = BTreeMap::new();
    for c in &m.components {
        groups
            .entry(emitted(m, c, payload))
            .or_default()
            .push(c.clone());
    }
    let values: Vec<Vec<Value>> = groups.keys().cloned().collect();
    let branches = groups
        .into_values()
        .map(|mut comps| {
            let p: f64 = comps.iter().map(|c| c.weight).sum();
            for c in &mut comps {
                c.weight /= p;
            }
            (
                p,
                MixedConfiguration {
                    components: comps,
                    ..skeleton.clone()
                },
            )
        })
        .collect();
    Ok((
        TransitionLabel::Output {
            channel: chan.to_string(),
            values,
        },
        branches,
    ))
}

fn external_input(
    m: &MixedConfiguration,
    path: &[bool],
    chan: &str,
    binders: &[Binder],
    cont: &ProcessTerm,
    env: &Environment,
) -> Result<Option<Transition>, SemanticsError> {
    let mut next = m.clone();
    let mut map = Substitution::new();
    let mut values = Vec::new();
    for b in binders {
        let Some(offered) = env.get(&b.name) else {
            return Ok(None);
        };
        match (&b.ty, offered) {
            (TypeExpr::Val, EnvValue::Int(v)) => {
                map.insert(b.name.clone(), Expr::Literal(*v));
                values.push(Value::Int(*v));
            }
            (TypeExpr::Qdit, EnvValue::State(s))
                if s.num_qudits() == 1 && s.dimension() == m.dimension() =>
            {
                let fresh = fresh_name(&b.name, &mut next.next_fresh);
                let incoming = s.renamed(&s.names()[0], &fresh)?;
                for c in &mut next.components {
                    c.state = join(&c.state, &incoming)?;
                }
                next.omega.push(fresh.clone());
                map.insert(b.name.clone(), Expr::Var(fresh.clone()));
                values.push(Value::Name(fresh));
            }
            (TypeExpr::Chan(_), _) => return Ok(None),
            _ => return Err(SemanticsError::InputMismatch(b.name.clone())),
        }
    }
    let cont = subst_term(cont, &map, &mut next.next_fresh);
    Ok(Some(Transition {
        label: TransitionLabel::Input {
            channel: chan.to_string(),
            values,
        },
        detail: StepDetail::Input {
            channel: chan.to_string(),
        },
        target: finish(with_term(&next, path, cont)),
    }))
}

/// Resolves the first ready external output on `channel` into its label and
/// the distribution over observed values. Branches that emit the same
/// tuple merge.
pub fn output_resolve(
    config: &MixedConfiguration,
    channel: &str,
) -> Result<(TransitionLabel, ProbDistribution), SemanticsError> {
    let mut leaves = Vec::new();
    collect_leaves(&config.term, &mut Vec::new(), &mut leaves);
    for (path, leaf) in leaves {
        if let ProcessTerm::Output {
            chan,
            payload,
            cont,
            ..
        } = leaf
        {
            if chan == channel && payload.iter().all(Expr::is_value) {
                let (label, branches) = resolve(config, &path, chan, payload, cont)?;
                let branches = branches.into_iter().map(|(p, b)| (p, finish(b))).collect();
                return Ok((label, ProbDistribution { branches }));
            }
        }
    }
    Err(SemanticsError::NoOutput(channel.to_string()))
}

/// Picks branch `i` with probability `p_i`.
pub fn sample_branch<R: Rng + ?Sized>(dist: &ProbDistribution, rng: &mut R) -> Configuration {
    let total: f64 = dist.branches.iter().map(|(p, _)| p).sum();
    let mut u = rng.random::<f64>() * total;
    for (p, branch) in &dist.branches {
        if u < *p {
            return branch.clone();
        }
        u -= p;
    }
    dist.branches
        .last()
        .expect("non-empty distribution")
        .1
        .clone()
}

/// True when no two parallel siblings mention the same qudit of `qudits`.
pub fn ownership_disjoint(term: &ProcessTerm, qudits: &[String]) -> bool {
    match term {
        ProcessTerm::Parallel(a, b) => {
            let owned = |t: &ProcessTerm| -> BTreeSet<String> {
                free_names(t)
                    .into_iter()
                    .filter(|n| qudits.contains(n))
                    .collect()
            };
            owned(a).is_disjoint(&owned(b))
                && ownership_disjoint(a, qudits)
                && ownership_disjoint(b, qudits)
        }
        _ => true,
    }
}
