use std::collections::{BTreeSet, HashMap};

use crate::syntax::{Binder, Expr, ProcessTerm, Program};

use super::SemanticsError;

pub type Substitution = HashMap<String, Expr>;

/// Source part of a runtime name: `e#3` comes from `e`.
pub fn base_name(name: &str) -> &str {
    name.split('#').next().unwrap_or(name)
}

/// A name that cannot clash with source identifiers or earlier fresh names.
pub fn fresh_name(base: &str, counter: &mut u64) -> String {
    *counter += 1;
    format!("{}#{}", base_name(base), counter)
}

fn rename(name: &str, map: &Substitution) -> String {
    match map.get(name) {
        Some(Expr::Var(n)) => n.clone(),
        _ => name.to_string(),
    }
}

pub fn subst_expr(expr: &Expr, map: &Substitution) -> Expr {
    match expr {
        Expr::Literal(_) => expr.clone(),
        Expr::Var(n) => map.get(n).cloned().unwrap_or_else(|| expr.clone()),
        Expr::Plus(a, b) => Expr::Plus(Box::new(subst_expr(a, map)), Box::new(subst_expr(b, map))),
        Expr::Neg(a) => Expr::Neg(Box::new(subst_expr(a, map))),
        Expr::Measure(qs) => Expr::Measure(qs.iter().map(|q| rename(q, map)).collect()),
    }
}

fn introduced_names(map: &Substitution) -> BTreeSet<String> {
    let mut names = Vec::new();
    for e in map.values() {
        e.names(&mut names);
    }
    names.into_iter().collect()
}

/// Drops the bound names from `map`, alpha-renaming any binder that would
/// capture a name introduced by the substitution.
fn enter_binders(
    names: &[String],
    map: &Substitution,
    fresh: &mut u64,
) -> (Vec<String>, Substitution) {
    let mut inner = map.clone();
    for n in names {
        inner.remove(n);
    }
    let introduced = introduced_names(&inner);
    let mut renamed = Vec::with_capacity(names.len());
    for n in names {
        if introduced.contains(n) {
            let f = fresh_name(n, fresh);
            inner.insert(n.clone(), Expr::Var(f.clone()));
            renamed.push(f);
        } else {
            renamed.push(n.clone());
        }
    }
    (renamed, inner)
}

/// Capture-avoiding simultaneous substitution of names.
pub fn subst_term(term: &ProcessTerm, map: &Substitution, fresh: &mut u64) -> ProcessTerm {
    if map.is_empty() {
        return term.clone();
    }
    match term {
        ProcessTerm::Nil => ProcessTerm::Nil,
        ProcessTerm::Parallel(a, b) => {
            ProcessTerm::parallel(subst_term(a, map, fresh), subst_term(b, map, fresh))
        }
        ProcessTerm::Input {
            chan,
            binders,
            cont,
            span,
        } => {
            let names: Vec<String> = binders.iter().map(|b| b.name.clone()).collect();
            let (renamed, inner) = enter_binders(&names, map, fresh);
            ProcessTerm::Input {
                chan: rename(chan, map),
                binders: binders
                    .iter()
                    .zip(renamed)
                    .map(|(b, name)| Binder::new(name, b.ty.clone()))
                    .collect(),
                cont: Box::new(subst_term(cont, &inner, fresh)),
                span: *span,
            }
        }
        ProcessTerm::Output {
            chan,
            payload,
            cont,
            span,
        } => ProcessTerm::Output {
            chan: rename(chan, map),
            payload: payload.iter().map(|e| subst_expr(e, map)).collect(),
            cont: Box::new(subst_term(cont, map, fresh)),
            span: *span,
        },
        ProcessTerm::Action {
            targets,
            gate,
            cont,
            span,
        } => ProcessTerm::Action {
            targets: targets.iter().map(|t| rename(t, map)).collect(),
            gate: gate.map_exponents(|e| subst_expr(e, map)),
            cont: Box::new(subst_term(cont, map, fresh)),
            span: *span,
        },
        ProcessTerm::QditAlloc { names, cont, span } => {
            let (renamed, inner) = enter_binders(names, map, fresh);
            ProcessTerm::QditAlloc {
                names: renamed,
                cont: Box::new(subst_term(cont, &inner, fresh)),
                span: *span,
            }
        }
        ProcessTerm::NewChan {
            name,
            ty,
            cont,
            span,
        } => {
            let (renamed, inner) = enter_binders(std::slice::from_ref(name), map, fresh);
            ProcessTerm::NewChan {
                name: renamed.into_iter().next().expect("one binder"),
                ty: ty.clone(),
                cont: Box::new(subst_term(cont, &inner, fresh)),
                span: *span,
            }
        }
        ProcessTerm::Call { name, args, span } => ProcessTerm::Call {
            name: name.clone(),
            args: args.iter().map(|e| subst_expr(e, map)).collect(),
            span: *span,
        },
    }
}

/// Names occurring free in `term`.
pub fn free_names(term: &ProcessTerm) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_free(term, &mut Vec::new(), &mut out);
    out
}

fn collect_free(term: &ProcessTerm, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    let note = |n: &str, bound: &Vec<String>, out: &mut BTreeSet<String>| {
        if !bound.iter().any(|b| b == n) {
            out.insert(n.to_string());
        }
    };
    let exprs = |es: &[&Expr], bound: &Vec<String>, out: &mut BTreeSet<String>| {
        let mut names = Vec::new();
        for e in es {
            e.names(&mut names);
        }
        for n in names {
            if !bound.contains(&n) {
                out.insert(n);
            }
        }
    };
    match term {
        ProcessTerm::Nil => {}
        ProcessTerm::Parallel(a, b) => {
            collect_free(a, bound, out);
            collect_free(b, bound, out);
        }
        ProcessTerm::Input {
            chan,
            binders,
            cont,
            ..
        } => {
            note(chan, bound, out);
            let depth = bound.len();
            bound.extend(binders.iter().map(|b| b.name.clone()));
            collect_free(cont, bound, out);
            bound.truncate(depth);
        }
        ProcessTerm::Output {
            chan,
            payload,
            cont,
            ..
        } => {
            note(chan, bound, out);
            exprs(&payload.iter().collect::<Vec<_>>(), bound, out);
            collect_free(cont, bound, out);
        }
        ProcessTerm::Action {
            targets,
            gate,
            cont,
            ..
        } => {
            for t in targets {
                note(t, bound, out);
            }
            exprs(&gate.exponents(), bound, out);
            collect_free(cont, bound, out);
        }
        ProcessTerm::QditAlloc { names, cont, .. } => {
            let depth = bound.len();
            bound.extend(names.iter().cloned());
            collect_free(cont, bound, out);
            bound.truncate(depth);
        }
        ProcessTerm::NewChan { name, cont, .. } => {
            bound.push(name.clone());
            collect_free(cont, bound, out);
            bound.pop();
        }
        ProcessTerm::Call { args, .. } => exprs(&args.iter().collect::<Vec<_>>(), bound, out),
    }
}

/// Unfolds the entry call and every nested call into a single closed-form
/// term. Names a definition uses without declaring are resolved in the
/// scope of the call site, so a helper may act on a qudit allocated by its
/// caller.
pub fn instantiate(program: &Program, fresh: &mut u64) -> Result<ProcessTerm, SemanticsError> {
    let entry = ProcessTerm::Call {
        name: program.entry.name.clone(),
        args: program.entry.args.clone(),
        span: program.entry.span,
    };
    inline(&entry, program, &mut Vec::new(), fresh)
}

fn inline(
    term: &ProcessTerm,
    program: &Program,
    stack: &mut Vec<String>,
    fresh: &mut u64,
) -> Result<ProcessTerm, SemanticsError> {
    Ok(match term {
        ProcessTerm::Call { name, args, .. } => {
            let def = program
                .definition(name)
                .ok_or_else(|| SemanticsError::UnknownProcess(name.clone()))?;
            if def.params.len() != args.len() {
                return Err(SemanticsError::ArityMismatch {
                    what: name.clone(),
                    expected: def.params.len(),
                    found: args.len(),
                });
            }
            if stack.contains(name) {
                return Err(SemanticsError::Recursion(name.clone()));
            }
            let map: Substitution = def
                .params
                .iter()
                .map(|b| b.name.clone())
                .zip(args.iter().cloned())
                .collect();
            let body = subst_term(&def.body, &map, fresh);
            stack.push(name.clone());
            let out = inline(&body, program, stack, fresh)?;
            stack.pop();
            out
        }
        ProcessTerm::Nil => ProcessTerm::Nil,
        ProcessTerm::Parallel(a, b) => ProcessTerm::parallel(
            inline(a, program, stack, fresh)?,
            inline(b, program, stack, fresh)?,
        ),
        ProcessTerm::Input {
            chan,
            binders,
            cont,
            span,
        } => ProcessTerm::Input {
            chan: chan.clone(),
            binders: binders.clone(),
            cont: Box::new(inline(cont, program, stack, fresh)?),
            span: *span,
        },
        ProcessTerm::Output {
            chan,
            payload,
            cont,
            span,
        } => ProcessTerm::Output {
            chan: chan.clone(),
            payload: payload.clone(),
            cont: Box::new(inline(cont, program, stack, fresh)?),
            span: *span,
        },
        ProcessTerm::Action {
            targets,
            gate,
            cont,
            span,
        } => ProcessTerm::Action {
            targets: targets.clone(),
            gate: gate.clone(),
            cont: Box::new(inline(cont, program, stack, fresh)?),
            span: *span,
        },
        ProcessTerm::QditAlloc { names, cont, span } => ProcessTerm::QditAlloc {
            names: names.clone(),
            cont: Box::new(inline(cont, program, stack, fresh)?),
            span: *span,
        },
        ProcessTerm::NewChan {
            name,
            ty,
            cont,
            span,
        } => ProcessTerm::NewChan {
            name: name.clone(),
            ty: ty.clone(),
            cont: Box::new(inline(cont, program, stack, fresh)?),
            span: *span,
        },
    })
}
