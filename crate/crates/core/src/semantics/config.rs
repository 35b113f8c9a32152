use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::qudit::QuantumState;
use crate::syntax::{pretty_term, Expr, ProcessTerm};

use super::subst::subst_term;

/// A value observed on a channel: a classical integer or the name of a qudit
/// or channel.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Name(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Name(n) => write!(f, "{n}"),
        }
    }
}

/// One weighted component of a mixture: its quantum state and the values of
/// the abstracted variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub weight: f64,
    pub state: QuantumState,
    pub values: Vec<i64>,
}

/// `(sigma; omega; P)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureConfiguration {
    pub sigma: QuantumState,
    pub omega: Vec<String>,
    pub term: ProcessTerm,
    /// Channels created by `new` that are not visible to the environment.
    pub restricted: BTreeSet<String>,
    /// Next suffix for fresh names.
    pub next_fresh: u64,
}

/// Weighted distribution over components that share the skeleton
/// `lambda vars . term` and the owned-qudit list.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedConfiguration {
    pub components: Vec<Component>,
    pub vars: Vec<String>,
    pub term: ProcessTerm,
    pub omega: Vec<String>,
    pub restricted: BTreeSet<String>,
    pub next_fresh: u64,
}

/// Probabilistic branching created when measurement results are observed.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbDistribution {
    pub branches: Vec<(f64, Configuration)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Configuration {
    Pure(PureConfiguration),
    Mixed(MixedConfiguration),
    Distribution(ProbDistribution),
}

impl PureConfiguration {
    pub fn new(sigma: QuantumState, omega: Vec<String>, term: ProcessTerm) -> Self {
        PureConfiguration {
            sigma,
            omega,
            term,
            restricted: BTreeSet::new(),
            next_fresh: 0,
        }
    }
}

impl From<PureConfiguration> for MixedConfiguration {
    fn from(p: PureConfiguration) -> Self {
        MixedConfiguration {
            components: vec![Component {
                weight: 1.0,
                state: p.sigma,
                values: Vec::new(),
            }],
            vars: Vec::new(),
            term: p.term,
            omega: p.omega,
            restricted: p.restricted,
            next_fresh: p.next_fresh,
        }
    }
}

impl MixedConfiguration {
    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    pub fn dimension(&self) -> usize {
        self.components[0].state.dimension()
    }

    /// Names in the shared quantum store.
    pub fn qudit_names(&self) -> &[String] {
        self.components[0].state.names()
    }

    /// Term of component `i` with the abstracted variables instantiated.
    pub fn component_term(&self, i: usize) -> ProcessTerm {
        let map = self
            .vars
            .iter()
            .cloned()
            .zip(self.components[i].values.iter().map(|v| Expr::Literal(*v)))
            .collect();
        let mut fresh = self.next_fresh;
        subst_term(&self.term, &map, &mut fresh)
    }

    /// A single-component mixture is the pure configuration it abbreviates.
    pub fn normalize(self) -> Configuration {
        if self.components.len() == 1 {
            let term = self.component_term(0);
            let component = self.components.into_iter().next().expect("one component");
            Configuration::Pure(PureConfiguration {
                sigma: component.state,
                omega: self.omega,
                term,
                restricted: self.restricted,
                next_fresh: self.next_fresh,
            })
        } else {
            Configuration::Mixed(self)
        }
    }
}

impl Configuration {
    pub fn pure(sigma: QuantumState, omega: Vec<String>, term: ProcessTerm) -> Self {
        Configuration::Pure(PureConfiguration::new(sigma, omega, term))
    }

    /// Weights of the components (or branch probabilities).
    pub fn weights(&self) -> Vec<f64> {
        match self {
            Configuration::Pure(_) => vec![1.0],
            Configuration::Mixed(m) => m.components.iter().map(|c| c.weight).collect(),
            Configuration::Distribution(d) => d.branches.iter().map(|(p, _)| *p).collect(),
        }
    }

    /// Views a pure or mixed configuration as a mixture.
    pub fn as_mixture(&self) -> Option<MixedConfiguration> {
        match self {
            Configuration::Pure(p) => Some(p.clone().into()),
            Configuration::Mixed(m) => Some(m.clone()),
            Configuration::Distribution(_) => None,
        }
    }

    pub fn is_terminated(&self) -> bool {
        match self {
            Configuration::Pure(p) => p.term.is_terminated(),
            Configuration::Mixed(m) => m.term.is_terminated(),
            Configuration::Distribution(_) => false,
        }
    }

    /// The process term (skeleton for mixtures); `None` for distributions.
    pub fn term(&self) -> Option<&ProcessTerm> {
        match self {
            Configuration::Pure(p) => Some(&p.term),
            Configuration::Mixed(m) => Some(&m.term),
            Configuration::Distribution(_) => None,
        }
    }

    /// Stable content hash (hex SHA-256) over a canonical rendering.
    pub fn digest(&self) -> String {
        let mut text = String::new();
        canonical_text(self, &mut text);
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

fn number(x: f64) -> String {
    if x.abs() < 1e-13 {
        "0".into()
    } else {
        format!("{x:.12e}")
    }
}

fn state_text(state: &QuantumState, out: &mut String) {
    out.push_str(&format!("[{}]", state.names().join(",")));
    for a in state.amplitudes() {
        out.push_str(&format!("({},{})", number(a.re), number(a.im)));
    }
}

fn canonical_text(config: &Configuration, out: &mut String) {
    match config {
        Configuration::Pure(p) => {
            out.push_str("pure;");
            out.push_str(&pretty_term(&p.term));
            out.push_str(&format!(";{};{:?};", p.omega.join(","), p.restricted));
            state_text(&p.sigma, out);
        }
        Configuration::Mixed(m) => {
            out.push_str("mixed;");
            out.push_str(&pretty_term(&m.term));
            out.push_str(&format!(
                ";{};{:?};{};",
                m.omega.join(","),
                m.restricted,
                m.vars.join(",")
            ));
            for c in &m.components {
                out.push_str(&format!("{{{};{:?};", number(c.weight), c.values));
                state_text(&c.state, out);
                out.push('}');
            }
        }
        Configuration::Distribution(d) => {
            out.push_str("dist;");
            for (p, branch) in &d.branches {
                out.push_str(&format!("<{};", number(*p)));
                canonical_text(branch, out);
                out.push('>');
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransitionLabel {
    Input {
        channel: String,
        values: Vec<Value>,
    },
    /// Every possible tuple of emitted values; a single tuple from a pure
    /// source.
    Output {
        channel: String,
        values: Vec<Vec<Value>>,
    },
    Tau,
    ProbBranch {
        probability: f64,
    },
}

impl TransitionLabel {
    /// Possible values of slot `i` of an output label.
    pub fn slot_values(&self, i: usize) -> BTreeSet<Value> {
        match self {
            TransitionLabel::Output { values, .. } => {
                values.iter().filter_map(|t| t.get(i).cloned()).collect()
            }
            TransitionLabel::Input { values, .. } => values.get(i).cloned().into_iter().collect(),
            _ => BTreeSet::new(),
        }
    }
}

impl fmt::Display for TransitionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tuple = |vs: &[Value]| {
            vs.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        match self {
            TransitionLabel::Input { channel, values } => {
                write!(f, "{channel}?[{}]", tuple(values))
            }
            TransitionLabel::Output { channel, values } if values.len() == 1 => {
                write!(f, "{channel}![{}]", tuple(&values[0]))
            }
            TransitionLabel::Output { channel, values } => {
                let set: Vec<String> = values.iter().map(|t| format!("({})", tuple(t))).collect();
                write!(f, "{channel}![{{{}}}]", set.join(","))
            }
            TransitionLabel::Tau => write!(f, "tau"),
            TransitionLabel::ProbBranch { probability } => write!(f, "p={probability:.12}"),
        }
    }
}

/// What a step did, for trace listings and checkpoint alignment.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepDetail {
    Alloc { qudits: Vec<String> },
    NewChannel { channel: String },
    Gate { gate: String, targets: Vec<String> },
    Measure { qudits: Vec<String>, var: String },
    Arithmetic { var: String },
    Communicate { channel: String },
    Input { channel: String },
    Output { channel: String },
    Branch { index: usize },
}
