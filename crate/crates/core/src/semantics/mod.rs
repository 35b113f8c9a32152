//! Labelled transition system over configurations `(sigma; omega; P)`.
//!
//! Measurements inside a process are unobserved until their results leave
//! on a free channel, so a configuration may be a weighted mixture of
//! components sharing one term skeleton. An external output of abstracted
//! values turns the mixture into a probability distribution over branches.

mod config;
mod eval;
mod lts;
mod subst;

use thiserror::Error;

use crate::qudit::{join, make_state, QuditError};
use crate::syntax::Program;

pub use config::{
    Component, Configuration, MixedConfiguration, ProbDistribution, PureConfiguration, StepDetail,
    TransitionLabel, Value,
};
pub use eval::{
    eval_int, expr_step, find_redex, gate_spec, plug_redex, value_step, Redex, ValueOutcome,
};
pub use lts::{
    output_resolve, ownership_disjoint, prune, sample_branch, transitions, EnvValue, Environment,
    Transition,
};
pub use subst::{base_name, free_names, fresh_name, instantiate, subst_term, Substitution};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemanticsError {
    #[error(transparent)]
    Qudit(#[from] QuditError),
    #[error("qudit `{0}` is not owned by the acting process")]
    OwnershipViolation(String),
    #[error("expression `{0}` is not a value yet")]
    NotReady(String),
    #[error("component {component} is stuck: {source}")]
    Stuck {
        component: usize,
        source: Box<SemanticsError>,
    },
    #[error("unknown process `{0}`")]
    UnknownProcess(String),
    #[error("{what} expects {expected} values, found {found}")]
    ArityMismatch {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("process `{0}` is recursive and cannot be unfolded")]
    Recursion(String),
    #[error("call to `{0}` was never unfolded")]
    Uninstantiated(String),
    #[error("environment value for `{0}` does not fit its binder")]
    InputMismatch(String),
    #[error("no ready output on channel `{0}`")]
    NoOutput(String),
    #[error("integer overflow")]
    Overflow,
}

/// Unfolds `program` and builds its starting configuration at dimension
/// `d`. Qudits the entry process uses without allocating or receiving are
/// taken from `env`, in name order.
pub fn initial_configuration(
    program: &Program,
    d: usize,
    env: &Environment,
) -> Result<Configuration, SemanticsError> {
    let mut fresh = 0;
    let term = instantiate(program, &mut fresh)?;
    let mut sigma = make_state(d, Vec::<String>::new())?;
    let mut omega = Vec::new();
    for name in free_names(&term) {
        if let Some(EnvValue::State(s)) = env.get(&name) {
            if s.num_qudits() != 1 {
                return Err(SemanticsError::InputMismatch(name));
            }
            sigma = join(&sigma, &s.renamed(&s.names()[0], &name)?)?;
            omega.push(name);
        }
    }
    Ok(Configuration::Pure(PureConfiguration {
        sigma,
        omega,
        term: prune(term),
        restricted: Default::default(),
        next_fresh: fresh,
    }))
}
