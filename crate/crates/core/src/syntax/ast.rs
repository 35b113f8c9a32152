use std::fmt;

/// Source location (1-based). Equality ignores positions so that ASTs
/// compare structurally across pretty-print round trips.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl Span {
    pub fn new(line: usize, col: usize) -> Self {
        Span { line, col }
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Span {}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TypeExpr {
    Qdit,
    Val,
    Chan(Vec<TypeExpr>),
}

impl TypeExpr {
    pub fn is_chan(&self) -> bool {
        matches!(self, TypeExpr::Chan(_))
    }
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeExpr::Qdit => write!(f, "Qdit"),
            TypeExpr::Val => write!(f, "Val"),
            TypeExpr::Chan(payload) => {
                write!(f, "^[")?;
                for (i, t) in payload.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, "]")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    /// Non-negative when produced by the parser.
    Literal(i64),
    Var(String),
    Plus(Box<Expr>, Box<Expr>),
    /// Arithmetic negation, used by exponents such as `X^-m1`.
    Neg(Box<Expr>),
    Measure(Vec<String>),
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Self {
        Expr::Var(name.into())
    }

    /// Literals and names are values; everything else still has to step.
    pub fn is_value(&self) -> bool {
        matches!(self, Expr::Literal(_) | Expr::Var(_))
    }

    pub fn contains_measure(&self) -> bool {
        match self {
            Expr::Measure(_) => true,
            Expr::Plus(a, b) => a.contains_measure() || b.contains_measure(),
            Expr::Neg(a) => a.contains_measure(),
            Expr::Literal(_) | Expr::Var(_) => false,
        }
    }

    /// Every name mentioned, including measured qudits.
    pub fn names(&self, out: &mut Vec<String>) {
        match self {
            Expr::Literal(_) => {}
            Expr::Var(n) => out.push(n.clone()),
            Expr::Plus(a, b) => {
                a.names(out);
                b.names(out);
            }
            Expr::Neg(a) => a.names(out),
            Expr::Measure(qs) => out.extend(qs.iter().cloned()),
        }
    }
}

/// A gate as written in source; exponents are evaluated at execution time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GateExpr {
    Hadamard,
    HadamardInv,
    ShiftX(Expr),
    PhaseZ(Expr),
    CnotRight,
    CnotLeft,
    PauliU(Expr, Expr),
}

impl GateExpr {
    pub fn arity(&self) -> usize {
        match self {
            GateExpr::CnotRight | GateExpr::CnotLeft => 2,
            _ => 1,
        }
    }

    pub fn exponents(&self) -> Vec<&Expr> {
        match self {
            GateExpr::ShiftX(e) | GateExpr::PhaseZ(e) => vec![e],
            GateExpr::PauliU(j, k) => vec![j, k],
            _ => Vec::new(),
        }
    }

    pub fn map_exponents(&self, mut f: impl FnMut(&Expr) -> Expr) -> GateExpr {
        match self {
            GateExpr::ShiftX(e) => GateExpr::ShiftX(f(e)),
            GateExpr::PhaseZ(e) => GateExpr::PhaseZ(f(e)),
            GateExpr::PauliU(j, k) => GateExpr::PauliU(f(j), f(k)),
            other => other.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binder {
    pub name: String,
    pub ty: TypeExpr,
}

impl Binder {
    pub fn new(name: impl Into<String>, ty: TypeExpr) -> Self {
        Binder {
            name: name.into(),
            ty,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProcessTerm {
    Nil,
    Input {
        chan: String,
        binders: Vec<Binder>,
        cont: Box<ProcessTerm>,
        span: Span,
    },
    Output {
        chan: String,
        payload: Vec<Expr>,
        cont: Box<ProcessTerm>,
        span: Span,
    },
    Action {
        targets: Vec<String>,
        gate: GateExpr,
        cont: Box<ProcessTerm>,
        span: Span,
    },
    QditAlloc {
        names: Vec<String>,
        cont: Box<ProcessTerm>,
        span: Span,
    },
    NewChan {
        name: String,
        ty: TypeExpr,
        cont: Box<ProcessTerm>,
        span: Span,
    },
    Parallel(Box<ProcessTerm>, Box<ProcessTerm>),
    Call {
        name: String,
        args: Vec<Expr>,
        span: Span,
    },
}

impl ProcessTerm {
    pub fn span(&self) -> Span {
        match self {
            ProcessTerm::Nil | ProcessTerm::Parallel(..) => Span::default(),
            ProcessTerm::Input { span, .. }
            | ProcessTerm::Output { span, .. }
            | ProcessTerm::Action { span, .. }
            | ProcessTerm::QditAlloc { span, .. }
            | ProcessTerm::NewChan { span, .. }
            | ProcessTerm::Call { span, .. } => *span,
        }
    }

    pub fn parallel(left: ProcessTerm, right: ProcessTerm) -> Self {
        ProcessTerm::Parallel(Box::new(left), Box::new(right))
    }

    /// True when the term is `0` up to `P | 0 = P`.
    pub fn is_terminated(&self) -> bool {
        match self {
            ProcessTerm::Nil => true,
            ProcessTerm::Parallel(a, b) => a.is_terminated() && b.is_terminated(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Definition {
    pub name: String,
    pub params: Vec<Binder>,
    pub body: ProcessTerm,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub name: String,
    pub args: Vec<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub definitions: Vec<Definition>,
    pub entry: Entry,
}

impl Program {
    pub fn definition(&self, name: &str) -> Option<&Definition> {
        self.definitions.iter().find(|d| d.name == name)
    }
}
