//! Scheduled execution of programs, interleaving enumeration and the
//! protocol verifiers.

mod inputs;
mod json;
pub mod oracle;
mod verify;

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::qudit::QuditError;
use crate::semantics::{
    initial_configuration, transitions, Configuration, Environment, SemanticsError, StepDetail,
    TransitionLabel,
};
use crate::syntax::{pretty_term, Program};

pub use inputs::{
    builtin_program, builtin_source, haar_state, parse_binding, parse_state_literal, LiteralError,
    LITERAL_TOLERANCE, SDC_SOURCE, TELEPORT_SOURCE,
};
pub use json::{canonical_json, configuration_json, round_float, state_json};
pub use verify::{
    check_sdc_trace, check_teleport_trace, sdc_checkpoints, trace_to_report, verify_sdc,
    verify_teleport, BranchResult, Checkpoint, CheckpointResult, SdcOutcome, VerificationReport,
    VERIFY_TOLERANCE,
};

/// Step limit used when none is given.
pub const DEFAULT_DEPTH: usize = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Qudit(#[from] QuditError),
    #[error(transparent)]
    Literal(#[from] LiteralError),
    #[error("depth limit must be at least 1")]
    InvalidDepth,
    #[error("scripted index {index} at step {step}, but only {available} transitions are enabled")]
    ScriptIndex {
        step: usize,
        index: usize,
        available: usize,
    },
    #[error("checkpoint after step {index} lies outside a trace of {len} steps")]
    MisalignedCheckpoint { index: usize, len: usize },
    #[error("protocol run ended without terminating: {0}")]
    Incomplete(String),
    #[error("{0}")]
    Protocol(String),
}

/// How `run` picks among enabled transitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Policy {
    /// Always the first enabled transition (and the first branch).
    Exhaustive,
    /// Uniform choice among transitions, branches drawn by probability.
    Seeded(u64),
    /// The given indices in order, then the first transition.
    Scripted(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub policy: Policy,
    /// Maximum number of steps.
    pub depth: usize,
}

impl Schedule {
    pub fn exhaustive(depth: usize) -> Self {
        Schedule {
            policy: Policy::Exhaustive,
            depth,
        }
    }

    pub fn seeded(seed: u64) -> Self {
        Schedule {
            policy: Policy::Seeded(seed),
            depth: DEFAULT_DEPTH,
        }
    }

    pub fn scripted(indices: Vec<usize>) -> Self {
        Schedule {
            policy: Policy::Scripted(indices),
            depth: DEFAULT_DEPTH,
        }
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.depth = depth;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunStatus {
    Terminated,
    Deadlock { residual: String },
    DepthExceeded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub label: TransitionLabel,
    pub detail: StepDetail,
    /// Component weights (or branch probabilities) after the step.
    pub weights: Vec<f64>,
    pub digest: String,
    /// Configuration reached by the step.
    pub config: Configuration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub dimension: usize,
    pub initial: Configuration,
    pub steps: Vec<TraceStep>,
    pub status: RunStatus,
}

impl Trace {
    pub fn final_config(&self) -> &Configuration {
        self.steps.last().map_or(&self.initial, |s| &s.config)
    }

    /// Configuration before step `i` is taken.
    pub fn before(&self, i: usize) -> &Configuration {
        if i == 0 {
            &self.initial
        } else {
            &self.steps[i - 1].config
        }
    }

    /// Labels and step kinds joined into one comparable key.
    pub fn signature(&self) -> String {
        self.steps
            .iter()
            .map(|s| {
                format!(
                    "{} {}",
                    s.label,
                    serde_json::to_string(&s.detail).expect("detail json")
                )
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn to_json(&self) -> Json {
        json!({
            "dimension": self.dimension,
            "steps": self.steps.iter().enumerate().map(|(i, s)| json!({
                "index": i,
                "label": s.label,
                "detail": s.detail,
                "weights": s.weights,
                "digest": s.digest,
            })).collect::<Vec<_>>(),
            "final": configuration_json(self.final_config()),
            "status": self.status,
        })
    }
}

fn record(label: TransitionLabel, detail: StepDetail, config: Configuration) -> TraceStep {
    TraceStep {
        weights: config.weights(),
        digest: config.digest(),
        label,
        detail,
        config,
    }
}

fn stop_status(config: &Configuration) -> RunStatus {
    if config.is_terminated() {
        RunStatus::Terminated
    } else {
        RunStatus::Deadlock {
            residual: config.term().map(pretty_term).unwrap_or_default(),
        }
    }
}

fn pick_weighted<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

/// Runs `program` at dimension `d` until it terminates, deadlocks or hits
/// the schedule's depth.
pub fn run(
    program: &Program,
    d: usize,
    env: &Environment,
    schedule: &Schedule,
) -> Result<Trace, HarnessError> {
    if schedule.depth == 0 {
        return Err(HarnessError::InvalidDepth);
    }
    let initial = initial_configuration(program, d, env)?;
    let mut rng = match schedule.policy {
        Policy::Seeded(seed) => ChaCha8Rng::seed_from_u64(seed),
        _ => ChaCha8Rng::seed_from_u64(0),
    };
    let mut config = initial.clone();
    let mut steps = Vec::new();
    let status = loop {
        let mut enabled = transitions(&config, env)?;
        if enabled.is_empty() {
            break stop_status(&config);
        }
        if steps.len() >= schedule.depth {
            break RunStatus::DepthExceeded;
        }
        let index = match &schedule.policy {
            Policy::Exhaustive => 0,
            Policy::Seeded(_) => match &config {
                Configuration::Distribution(dist) => {
                    let ps: Vec<f64> = dist.branches.iter().map(|(p, _)| *p).collect();
                    pick_weighted(&ps, &mut rng)
                }
                _ => rng.random_range(0..enabled.len()),
            },
            Policy::Scripted(indices) => match indices.get(steps.len()) {
                Some(&i) if i < enabled.len() => i,
                Some(&i) => {
                    return Err(HarnessError::ScriptIndex {
                        step: steps.len(),
                        index: i,
                        available: enabled.len(),
                    })
                }
                None => 0,
            },
        };
        let t = enabled.swap_remove(index);
        steps.push(record(t.label, t.detail, t.target.clone()));
        config = t.target;
    };
    Ok(Trace {
        dimension: d,
        initial,
        steps,
        status,
    })
}

/// Every maximal trace up to `depth` steps, one per distinct sequence of
/// labels and step kinds.
pub fn enumerate(
    program: &Program,
    d: usize,
    env: &Environment,
    depth: usize,
) -> Result<Vec<Trace>, HarnessError> {
    if depth == 0 {
        return Err(HarnessError::InvalidDepth);
    }
    let initial = initial_configuration(program, d, env)?;
    let mut search = Search {
        env,
        depth,
        d,
        initial: initial.clone(),
        seen: BTreeSet::new(),
        out: Vec::new(),
    };
    search.explore(&initial, &mut Vec::new())?;
    Ok(search.out)
}

struct Search<'a> {
    env: &'a Environment,
    depth: usize,
    d: usize,
    initial: Configuration,
    seen: BTreeSet<String>,
    out: Vec<Trace>,
}

impl Search<'_> {
    fn explore(
        &mut self,
        config: &Configuration,
        path: &mut Vec<TraceStep>,
    ) -> Result<(), HarnessError> {
        let enabled = transitions(config, self.env)?;
        let status = if enabled.is_empty() {
            Some(stop_status(config))
        } else if path.len() >= self.depth {
            Some(RunStatus::DepthExceeded)
        } else {
            None
        };
        if let Some(status) = status {
            let trace = Trace {
                dimension: self.d,
                initial: self.initial.clone(),
                steps: path.clone(),
                status,
            };
            if self.seen.insert(trace.signature()) {
                self.out.push(trace);
            }
            return Ok(());
        }
        for t in enabled {
            path.push(record(t.label, t.detail, t.target));
            let next = path.last().expect("just pushed").config.clone();
            self.explore(&next, path)?;
            path.pop();
        }
        Ok(())
    }
}
