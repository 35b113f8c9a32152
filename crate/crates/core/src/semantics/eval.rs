use crate::qudit::{apply_gate, measure, GateSpec, QuantumState};
use crate::syntax::{Expr, GateExpr};

use super::config::{Component, MixedConfiguration};
use super::subst::{subst_expr, Substitution};
use super::SemanticsError;

/// The focus of an expression step. Operands must already be values.
#[derive(Debug, Clone, PartialEq)]
pub enum Redex {
    Plus(Expr, Expr),
    Neg(Expr),
    Measure(Vec<String>),
    Transform {
        targets: Vec<String>,
        gate: GateExpr,
    },
}

impl Redex {
    /// Arithmetic and measurement bind their result to a new abstracted
    /// variable; a gate action only yields `unit`.
    pub fn introduces_var(&self) -> bool {
        !matches!(self, Redex::Transform { .. })
    }

    fn subst(&self, map: &Substitution) -> Redex {
        match self {
            Redex::Plus(a, b) => Redex::Plus(subst_expr(a, map), subst_expr(b, map)),
            Redex::Neg(a) => Redex::Neg(subst_expr(a, map)),
            Redex::Measure(_) => self.clone(),
            Redex::Transform { targets, gate } => Redex::Transform {
                targets: targets.clone(),
                gate: gate.map_exponents(|e| subst_expr(e, map)),
            },
        }
    }
}

/// One possible result of a value step: `weight`, the new state and the
/// produced integer (`None` for `unit`).
#[derive(Debug, Clone, PartialEq)]
pub struct ValueOutcome {
    pub weight: f64,
    pub state: QuantumState,
    pub value: Option<i64>,
}

fn literal(e: &Expr) -> Result<i64, SemanticsError> {
    match e {
        Expr::Literal(i) => Ok(*i),
        other => Err(SemanticsError::NotReady(crate::syntax::pretty_expr(other))),
    }
}

/// Evaluates a closed arithmetic expression.
pub fn eval_int(e: &Expr) -> Result<i64, SemanticsError> {
    match e {
        Expr::Literal(i) => Ok(*i),
        Expr::Plus(a, b) => eval_int(a)?
            .checked_add(eval_int(b)?)
            .ok_or(SemanticsError::Overflow),
        Expr::Neg(a) => eval_int(a)?.checked_neg().ok_or(SemanticsError::Overflow),
        Expr::Var(_) | Expr::Measure(_) => {
            Err(SemanticsError::NotReady(crate::syntax::pretty_expr(e)))
        }
    }
}

pub fn gate_spec(gate: &GateExpr) -> Result<GateSpec, SemanticsError> {
    Ok(match gate {
        GateExpr::Hadamard => GateSpec::Hadamard,
        GateExpr::HadamardInv => GateSpec::HadamardInv,
        GateExpr::CnotRight => GateSpec::CnotRight,
        GateExpr::CnotLeft => GateSpec::CnotLeft,
        GateExpr::ShiftX(j) => GateSpec::ShiftX(eval_int(j)?),
        GateExpr::PhaseZ(k) => GateSpec::PhaseZ(eval_int(k)?),
        GateExpr::PauliU(j, k) => GateSpec::PauliU(eval_int(j)?, eval_int(k)?),
    })
}

fn check_owned(names: &[String], omega: &[String]) -> Result<(), SemanticsError> {
    match names.iter().find(|q| !omega.contains(q)) {
        Some(q) => Err(SemanticsError::OwnershipViolation(q.clone())),
        None => Ok(()),
    }
}

/// One `->_v` step of the pure expression configuration `(sigma; omega; e)`.
///
/// A single outcome is again pure; several outcomes (from a measurement)
/// form the components of a mixture. Outcomes of `measure` carry the
/// measured value `m` in `[0, d^r)` and weight `g_m`.
pub fn value_step(
    sigma: &QuantumState,
    omega: &[String],
    redex: &Redex,
) -> Result<Vec<ValueOutcome>, SemanticsError> {
    let single = |value| {
        Ok(vec![ValueOutcome {
            weight: 1.0,
            state: sigma.clone(),
            value,
        }])
    };
    match redex {
        Redex::Plus(a, b) => {
            let w = literal(a)?
                .checked_add(literal(b)?)
                .ok_or(SemanticsError::Overflow)?;
            single(Some(w))
        }
        Redex::Neg(a) => single(Some(
            literal(a)?.checked_neg().ok_or(SemanticsError::Overflow)?,
        )),
        Redex::Measure(qs) => {
            check_owned(qs, omega)?;
            Ok(measure(sigma, qs)?
                .into_iter()
                .map(|o| ValueOutcome {
                    weight: o.weight,
                    state: o.post_state,
                    value: Some(o.outcome as i64),
                })
                .collect())
        }
        Redex::Transform { targets, gate } => {
            check_owned(targets, omega)?;
            let spec = gate_spec(gate)?;
            Ok(vec![ValueOutcome {
                weight: 1.0,
                state: apply_gate(sigma, targets, &spec)?,
                value: None,
            }])
        }
    }
}

/// Lifts [`value_step`] over every component of a mixture. Component `i`
/// with weight `h_i` and outcome weights `g_ij` yields components of weight
/// `h_i * g_ij`; a produced value is appended as variable `var`.
///
/// The returned mixture keeps the old term; plugging the result into the
/// surrounding context is the caller's job.
pub fn expr_step(
    config: &MixedConfiguration,
    redex: &Redex,
    var: &str,
) -> Result<MixedConfiguration, SemanticsError> {
    let mut components = Vec::new();
    for (i, c) in config.components.iter().enumerate() {
        let map: Substitution = config
            .vars
            .iter()
            .cloned()
            .zip(c.values.iter().map(|v| Expr::Literal(*v)))
            .collect();
        let outcomes = value_step(&c.state, &config.omega, &redex.subst(&map)).map_err(|e| {
            SemanticsError::Stuck {
                component: i,
                source: Box::new(e),
            }
        })?;
        for o in outcomes {
            let mut values = c.values.clone();
            values.extend(o.value);
            components.push(Component {
                weight: c.weight * o.weight,
                state: o.state,
                values,
            });
        }
    }
    let mut vars = config.vars.clone();
    if redex.introduces_var() {
        vars.push(var.to_string());
    }
    Ok(MixedConfiguration {
        components,
        vars,
        ..config.clone()
    })
}

/// The leftmost innermost redex of a non-value expression.
pub fn find_redex(e: &Expr) -> Option<Redex> {
    match e {
        Expr::Literal(_) | Expr::Var(_) => None,
        Expr::Measure(qs) => Some(Redex::Measure(qs.clone())),
        Expr::Plus(a, b) => find_redex(a)
            .or_else(|| find_redex(b))
            .or_else(|| Some(Redex::Plus((**a).clone(), (**b).clone()))),
        Expr::Neg(a) => find_redex(a).or_else(|| Some(Redex::Neg((**a).clone()))),
    }
}

/// Replaces the redex found by [`find_redex`] with `result`.
pub fn plug_redex(e: &Expr, result: &Expr) -> Expr {
    match e {
        Expr::Literal(_) | Expr::Var(_) => e.clone(),
        Expr::Measure(_) => result.clone(),
        Expr::Plus(a, b) if !a.is_value() => Expr::Plus(Box::new(plug_redex(a, result)), b.clone()),
        Expr::Plus(a, b) if !b.is_value() => Expr::Plus(a.clone(), Box::new(plug_redex(b, result))),
        Expr::Neg(a) if !a.is_value() => Expr::Neg(Box::new(plug_redex(a, result))),
        Expr::Plus(..) | Expr::Neg(_) => result.clone(),
    }
}
