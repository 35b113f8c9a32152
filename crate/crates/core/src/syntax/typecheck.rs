//! A practical checker for channel payload types, gate arities and qudit
//! linearity.
//!
//! Names used as qudits inside a definition without being bound there are
//! implicit qudit parameters: they resolve in the scope of each call site,
//! which is how the protocol corpus shares an entangled pair allocated by the
//! enclosing process. Implicit qudits left over at the entry point must be
//! supplied by the environment.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use super::ast::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum DiagnosticKind {
    ArityMismatch,
    TypeMismatch,
    CloningViolation,
    UnknownName,
    DuplicateName,
    Recursion,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
    pub line: usize,
    pub col: usize,
    /// Definition the diagnostic was raised in; `None` for the entry point.
    pub definition: Option<String>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {:?}: {}",
            self.line, self.col, self.kind, self.message
        )?;
        if let Some(def) = &self.definition {
            write!(f, " (in {def})")?;
        }
        Ok(())
    }
}

/// Checks a program; an empty result means it is accepted.
pub fn typecheck(program: &Program) -> Vec<Diagnostic> {
    let mut checker = Checker {
        program,
        implicit: HashMap::new(),
        in_progress: HashSet::new(),
        diagnostics: Vec::new(),
    };
    for def in &program.definitions {
        checker.definition_implicits(&def.name);
    }
    checker.entry();
    checker.diagnostics
}

/// Implicit qudit parameters of every definition, in name order.
pub fn implicit_qudits(program: &Program) -> HashMap<String, BTreeSet<String>> {
    let mut checker = Checker {
        program,
        implicit: HashMap::new(),
        in_progress: HashSet::new(),
        diagnostics: Vec::new(),
    };
    for def in &program.definitions {
        checker.definition_implicits(&def.name);
    }
    checker.implicit
}

type Env = HashMap<String, TypeExpr>;

struct Checker<'a> {
    program: &'a Program,
    implicit: HashMap<String, BTreeSet<String>>,
    in_progress: HashSet<String>,
    diagnostics: Vec<Diagnostic>,
}

/// Per-definition walk state.
struct Scope {
    definition: Option<String>,
    implicit: BTreeSet<String>,
}

impl<'a> Checker<'a> {
    fn report(&mut self, scope: &Scope, kind: DiagnosticKind, span: Span, message: String) {
        self.diagnostics.push(Diagnostic {
            kind,
            message,
            line: span.line,
            col: span.col,
            definition: scope.definition.clone(),
        });
    }

    fn definition_implicits(&mut self, name: &str) -> Option<BTreeSet<String>> {
        if let Some(done) = self.implicit.get(name) {
            return Some(done.clone());
        }
        let def = self.program.definition(name)?;
        if !self.in_progress.insert(name.to_string()) {
            return None;
        }
        let mut scope = Scope {
            definition: Some(def.name.clone()),
            implicit: BTreeSet::new(),
        };
        let mut env = Env::new();
        for p in &def.params {
            if env.insert(p.name.clone(), p.ty.clone()).is_some() {
                self.report(
                    &scope,
                    DiagnosticKind::DuplicateName,
                    def.span,
                    format!("parameter `{}` declared twice", p.name),
                );
            }
        }
        self.check(&def.body, &env, &HashSet::new(), &mut scope);
        self.in_progress.remove(name);
        self.implicit
            .insert(name.to_string(), scope.implicit.clone());
        Some(scope.implicit)
    }

    fn entry(&mut self) {
        let entry = &self.program.entry;
        let mut scope = Scope {
            definition: None,
            implicit: BTreeSet::new(),
        };
        let Some(def) = self.program.definition(&entry.name) else {
            self.report(
                &scope,
                DiagnosticKind::UnknownName,
                entry.span,
                format!("entry point calls undefined process `{}`", entry.name),
            );
            return;
        };
        if def.params.len() != entry.args.len() {
            self.report(
                &scope,
                DiagnosticKind::ArityMismatch,
                entry.span,
                format!(
                    "`{}` takes {} argument(s), entry point passes {}",
                    def.name,
                    def.params.len(),
                    entry.args.len()
                ),
            );
            return;
        }
        // Unbound entry arguments are the interface seen by the environment.
        let mut env = Env::new();
        for (arg, param) in entry.args.iter().zip(&def.params) {
            if let Expr::Var(n) = arg {
                if param.ty != TypeExpr::Val {
                    env.insert(n.clone(), param.ty.clone());
                }
            }
        }
        let call = ProcessTerm::Call {
            name: entry.name.clone(),
            args: entry.args.clone(),
            span: entry.span,
        };
        self.check(&call, &env, &HashSet::new(), &mut scope);
    }

    /// Resolves a name used as a qudit and records the use.
    fn qudit_ref(
        &mut self,
        name: &str,
        span: Span,
        env: &Env,
        sent: &HashSet<String>,
        scope: &mut Scope,
        uses: &mut BTreeSet<String>,
    ) {
        if sent.contains(name) {
            self.report(
                scope,
                DiagnosticKind::CloningViolation,
                span,
                format!("qudit `{name}` is used after being sent"),
            );
        }
        match env.get(name) {
            Some(TypeExpr::Qdit) => {}
            Some(other) => self.report(
                scope,
                DiagnosticKind::TypeMismatch,
                span,
                format!("`{name}` has type {other}, expected Qdit"),
            ),
            None => {
                scope.implicit.insert(name.to_string());
            }
        }
        uses.insert(name.to_string());
    }

    fn channel(
        &mut self,
        name: &str,
        span: Span,
        env: &Env,
        scope: &Scope,
    ) -> Option<Vec<TypeExpr>> {
        match env.get(name) {
            Some(TypeExpr::Chan(payload)) => Some(payload.clone()),
            Some(other) => {
                self.report(
                    scope,
                    DiagnosticKind::TypeMismatch,
                    span,
                    format!("`{name}` has type {other}, expected a channel"),
                );
                None
            }
            None => {
                self.report(
                    scope,
                    DiagnosticKind::UnknownName,
                    span,
                    format!("unknown channel `{name}`"),
                );
                None
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn expr_type(
        &mut self,
        expr: &Expr,
        span: Span,
        env: &Env,
        sent: &HashSet<String>,
        scope: &mut Scope,
        uses: &mut BTreeSet<String>,
    ) -> Option<TypeExpr> {
        match expr {
            Expr::Literal(_) => Some(TypeExpr::Val),
            Expr::Var(n) => match env.get(n) {
                Some(t) => {
                    if *t == TypeExpr::Qdit && sent.contains(n) {
                        self.report(
                            scope,
                            DiagnosticKind::CloningViolation,
                            span,
                            format!("qudit `{n}` is used after being sent"),
                        );
                    }
                    Some(t.clone())
                }
                None => {
                    self.report(
                        scope,
                        DiagnosticKind::UnknownName,
                        span,
                        format!("unknown name `{n}`"),
                    );
                    None
                }
            },
            Expr::Plus(a, b) => {
                let ta = self.expr_type(a, span, env, sent, scope, uses);
                let tb = self.expr_type(b, span, env, sent, scope, uses);
                for t in [ta, tb].into_iter().flatten() {
                    if t != TypeExpr::Val {
                        self.report(
                            scope,
                            DiagnosticKind::TypeMismatch,
                            span,
                            format!("cannot add a value of type {t}"),
                        );
                    }
                }
                Some(TypeExpr::Val)
            }
            Expr::Neg(a) => {
                if let Some(t) = self.expr_type(a, span, env, sent, scope, uses) {
                    if t != TypeExpr::Val {
                        self.report(
                            scope,
                            DiagnosticKind::TypeMismatch,
                            span,
                            format!("cannot negate a value of type {t}"),
                        );
                    }
                }
                Some(TypeExpr::Val)
            }
            Expr::Measure(qs) => {
                let mut seen = HashSet::new();
                for q in qs {
                    if !seen.insert(q) {
                        self.report(
                            scope,
                            DiagnosticKind::CloningViolation,
                            span,
                            format!("qudit `{q}` measured twice in one expression"),
                        );
                    }
                    self.qudit_ref(q, span, env, sent, scope, uses);
                }
                Some(TypeExpr::Val)
            }
        }
    }

    /// Walks a term and returns the outer qudit names it uses.
    fn check(
        &mut self,
        term: &ProcessTerm,
        env: &Env,
        sent: &HashSet<String>,
        scope: &mut Scope,
    ) -> BTreeSet<String> {
        let mut uses = BTreeSet::new();
        match term {
            ProcessTerm::Nil => {}
            ProcessTerm::Parallel(l, r) => {
                let left = self.check(l, env, sent, scope);
                let right = self.check(r, env, sent, scope);
                for shared in left.intersection(&right) {
                    self.report(
                        scope,
                        DiagnosticKind::CloningViolation,
                        r.span(),
                        format!("qudit `{shared}` is used by both sides of a parallel composition"),
                    );
                }
                uses.extend(left);
                uses.extend(right);
            }
            ProcessTerm::Input {
                chan,
                binders,
                cont,
                span,
            } => {
                if let Some(payload) = self.channel(chan, *span, env, scope) {
                    if payload.len() != binders.len() {
                        self.report(
                            scope,
                            DiagnosticKind::ArityMismatch,
                            *span,
                            format!(
                                "channel `{chan}` carries {} value(s), input binds {}",
                                payload.len(),
                                binders.len()
                            ),
                        );
                    } else {
                        for (b, t) in binders.iter().zip(&payload) {
                            if b.ty != *t {
                                self.report(
                                    scope,
                                    DiagnosticKind::TypeMismatch,
                                    *span,
                                    format!(
                                        "`{}` declared {} but `{chan}` carries {t}",
                                        b.name, b.ty
                                    ),
                                );
                            }
                        }
                    }
                }
                let mut inner = env.clone();
                let mut inner_sent = sent.clone();
                let mut seen = HashSet::new();
                for b in binders {
                    if !seen.insert(&b.name) {
                        self.report(
                            scope,
                            DiagnosticKind::DuplicateName,
                            *span,
                            format!("`{}` bound twice in one input", b.name),
                        );
                    }
                    inner.insert(b.name.clone(), b.ty.clone());
                    inner_sent.remove(&b.name);
                }
                let mut cont_uses = self.check(cont, &inner, &inner_sent, scope);
                for b in binders {
                    cont_uses.remove(&b.name);
                }
                uses.extend(cont_uses);
            }
            ProcessTerm::Output {
                chan,
                payload,
                cont,
                span,
            } => {
                let expected = self.channel(chan, *span, env, scope);
                let mut now_sent = sent.clone();
                match &expected {
                    Some(types) if types.len() != payload.len() => {
                        self.report(
                            scope,
                            DiagnosticKind::ArityMismatch,
                            *span,
                            format!(
                                "channel `{chan}` carries {} value(s), output sends {}",
                                types.len(),
                                payload.len()
                            ),
                        );
                    }
                    _ => {}
                }
                for (i, e) in payload.iter().enumerate() {
                    let want = expected
                        .as_ref()
                        .filter(|t| t.len() == payload.len())
                        .map(|t| t[i].clone());
                    match (want, e) {
                        (Some(TypeExpr::Qdit), Expr::Var(q)) => {
                            if now_sent.contains(q) && !sent.contains(q) {
                                self.report(
                                    scope,
                                    DiagnosticKind::CloningViolation,
                                    *span,
                                    format!("qudit `{q}` sent twice in one output"),
                                );
                            }
                            self.qudit_ref(q, *span, env, sent, scope, &mut uses);
                            now_sent.insert(q.clone());
                        }
                        (Some(TypeExpr::Qdit), _) => self.report(
                            scope,
                            DiagnosticKind::TypeMismatch,
                            *span,
                            "a qudit slot needs a qudit name".into(),
                        ),
                        (Some(want), e) => {
                            if let Some(got) = self.expr_type(e, *span, env, sent, scope, &mut uses)
                            {
                                if got != want {
                                    self.report(
                                        scope,
                                        DiagnosticKind::TypeMismatch,
                                        *span,
                                        format!(
                                            "slot {} of `{chan}` expects {want}, got {got}",
                                            i + 1
                                        ),
                                    );
                                }
                            }
                        }
                        // Slots cannot be typed against a mismatched or unknown
                        // channel; only the measured qudits are recorded.
                        (None, e) => {
                            let mut names = Vec::new();
                            if let Expr::Measure(qs) = e {
                                names.extend(qs.iter().cloned());
                            }
                            uses.extend(names);
                        }
                    }
                }
                uses.extend(self.check(cont, env, &now_sent, scope));
            }
            ProcessTerm::Action {
                targets,
                gate,
                cont,
                span,
            } => {
                if targets.len() != gate.arity() {
                    self.report(
                        scope,
                        DiagnosticKind::ArityMismatch,
                        *span,
                        format!(
                            "gate {} acts on {} qudit(s), {} given",
                            super::pretty::pretty_gate(gate),
                            gate.arity(),
                            targets.len()
                        ),
                    );
                }
                let mut seen = HashSet::new();
                for t in targets {
                    if !seen.insert(t) {
                        self.report(
                            scope,
                            DiagnosticKind::CloningViolation,
                            *span,
                            format!("qudit `{t}` appears twice among the gate targets"),
                        );
                    }
                    self.qudit_ref(t, *span, env, sent, scope, &mut uses);
                }
                for e in gate.exponents() {
                    if e.contains_measure() {
                        self.report(
                            scope,
                            DiagnosticKind::TypeMismatch,
                            *span,
                            "gate exponents cannot contain measurements".into(),
                        );
                        continue;
                    }
                    if let Some(t) = self.expr_type(e, *span, env, sent, scope, &mut uses) {
                        if t != TypeExpr::Val {
                            self.report(
                                scope,
                                DiagnosticKind::TypeMismatch,
                                *span,
                                format!("gate exponent has type {t}, expected Val"),
                            );
                        }
                    }
                }
                uses.extend(self.check(cont, env, sent, scope));
            }
            ProcessTerm::QditAlloc { names, cont, span } => {
                let mut inner = env.clone();
                let mut inner_sent = sent.clone();
                let mut seen = HashSet::new();
                for n in names {
                    if !seen.insert(n) {
                        self.report(
                            scope,
                            DiagnosticKind::DuplicateName,
                            *span,
                            format!("qudit `{n}` allocated twice"),
                        );
                    }
                    inner.insert(n.clone(), TypeExpr::Qdit);
                    inner_sent.remove(n);
                }
                let mut cont_uses = self.check(cont, &inner, &inner_sent, scope);
                for n in names {
                    cont_uses.remove(n);
                }
                uses.extend(cont_uses);
            }
            ProcessTerm::NewChan {
                name,
                ty,
                cont,
                span,
            } => {
                if !ty.is_chan() {
                    self.report(
                        scope,
                        DiagnosticKind::TypeMismatch,
                        *span,
                        format!("`new {name}` needs a channel type, got {ty}"),
                    );
                }
                let mut inner = env.clone();
                inner.insert(name.clone(), ty.clone());
                let mut inner_sent = sent.clone();
                inner_sent.remove(name);
                uses.extend(self.check(cont, &inner, &inner_sent, scope));
            }
            ProcessTerm::Call { name, args, span } => {
                let Some(def) = self.program.definition(name) else {
                    self.report(
                        scope,
                        DiagnosticKind::UnknownName,
                        *span,
                        format!("call to undefined process `{name}`"),
                    );
                    return uses;
                };
                let params = def.params.clone();
                let callee_implicit = match self.definition_implicits(name) {
                    Some(set) => set,
                    None => {
                        self.report(
                            scope,
                            DiagnosticKind::Recursion,
                            *span,
                            format!("recursive call to `{name}` is not supported"),
                        );
                        BTreeSet::new()
                    }
                };
                if params.len() != args.len() {
                    self.report(
                        scope,
                        DiagnosticKind::ArityMismatch,
                        *span,
                        format!(
                            "`{name}` takes {} argument(s), {} given",
                            params.len(),
                            args.len()
                        ),
                    );
                } else {
                    let mut qudit_args = HashSet::new();
                    for (arg, param) in args.iter().zip(&params) {
                        match (&param.ty, arg) {
                            (TypeExpr::Qdit, Expr::Var(q)) => {
                                if !qudit_args.insert(q.clone()) {
                                    self.report(
                                        scope,
                                        DiagnosticKind::CloningViolation,
                                        *span,
                                        format!("qudit `{q}` passed twice to `{name}`"),
                                    );
                                }
                                self.qudit_ref(q, *span, env, sent, scope, &mut uses);
                            }
                            (TypeExpr::Qdit, _) => self.report(
                                scope,
                                DiagnosticKind::TypeMismatch,
                                *span,
                                format!(
                                    "parameter `{}` of `{name}` needs a qudit name",
                                    param.name
                                ),
                            ),
                            (want, e) => {
                                if let Some(got) =
                                    self.expr_type(e, *span, env, sent, scope, &mut uses)
                                {
                                    if got != *want {
                                        self.report(
                                            scope,
                                            DiagnosticKind::TypeMismatch,
                                            *span,
                                            format!(
                                                "parameter `{}` of `{name}` expects {want}, got {got}",
                                                param.name
                                            ),
                                        );
                                    }
                                }
                            }
                        }
                    }
                }
                for q in &callee_implicit {
                    self.qudit_ref(q, *span, env, sent, scope, &mut uses);
                }
            }
        }
        uses
    }
}
