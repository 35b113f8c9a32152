use super::ast::*;

/// Renders a program in concrete syntax; `parse(pretty(p)) == p`.
pub fn pretty(program: &Program) -> String {
    let mut out = String::new();
    for def in &program.definitions {
        let params: Vec<String> = def
            .params
            .iter()
            .map(|b| format!("{}:{}", b.name, b.ty))
            .collect();
        out.push_str(&format!(
            "{}({}) = {}\n",
            def.name,
            params.join(", "),
            pretty_term(&def.body)
        ));
    }
    let args: Vec<String> = program.entry.args.iter().map(pretty_expr).collect();
    out.push_str(&format!(
        "main = {}({})\n",
        program.entry.name,
        args.join(", ")
    ));
    out
}

/// Renders a process term.
pub fn pretty_term(term: &ProcessTerm) -> String {
    let mut out = String::new();
    write_term(term, false, &mut out);
    out
}

pub fn pretty_expr(expr: &Expr) -> String {
    let mut out = String::new();
    write_expr(expr, false, &mut out);
    out
}

pub fn pretty_gate(gate: &GateExpr) -> String {
    match gate {
        GateExpr::Hadamard => "H".into(),
        GateExpr::HadamardInv => "Hinv".into(),
        GateExpr::CnotRight => "Rc".into(),
        GateExpr::CnotLeft => "Lc".into(),
        GateExpr::ShiftX(e) => format!("X^{}", exponent(e)),
        GateExpr::PhaseZ(e) => format!("Z^{}", exponent(e)),
        GateExpr::PauliU(j, k) => format!("U^({}, {})", pretty_expr(j), pretty_expr(k)),
    }
}

fn exponent(e: &Expr) -> String {
    match e {
        Expr::Literal(i) if *i >= 0 => i.to_string(),
        Expr::Var(n) => n.clone(),
        Expr::Neg(inner) => format!("-{}", exponent(inner)),
        other => format!("({})", pretty_expr(other)),
    }
}

/// `tight` asks for parentheses around a parallel composition.
fn write_term(term: &ProcessTerm, tight: bool, out: &mut String) {
    match term {
        ProcessTerm::Nil => out.push('0'),
        ProcessTerm::Parallel(l, r) => {
            if tight {
                out.push('(');
            }
            write_term(l, false, out);
            out.push_str(" | ");
            write_term(r, true, out);
            if tight {
                out.push(')');
            }
        }
        ProcessTerm::Input {
            chan,
            binders,
            cont,
            ..
        } => {
            let bs: Vec<String> = binders
                .iter()
                .map(|b| format!("{}:{}", b.name, b.ty))
                .collect();
            out.push_str(&format!("{chan}?[{}].", bs.join(", ")));
            write_term(cont, true, out);
        }
        ProcessTerm::Output {
            chan,
            payload,
            cont,
            ..
        } => {
            let es: Vec<String> = payload.iter().map(pretty_expr).collect();
            out.push_str(&format!("{chan}![{}].", es.join(", ")));
            write_term(cont, true, out);
        }
        ProcessTerm::Action {
            targets,
            gate,
            cont,
            ..
        } => {
            out.push_str(&format!(
                "{{{} *= {}}}.",
                targets.join(","),
                pretty_gate(gate)
            ));
            write_term(cont, true, out);
        }
        ProcessTerm::QditAlloc { names, cont, .. } => {
            out.push_str(&format!("(qdit {})", names.join(",")));
            write_term(cont, true, out);
        }
        ProcessTerm::NewChan { name, ty, cont, .. } => {
            out.push_str(&format!("(new {name}:{ty})"));
            write_term(cont, true, out);
        }
        ProcessTerm::Call { name, args, .. } => {
            let es: Vec<String> = args.iter().map(pretty_expr).collect();
            out.push_str(&format!("{name}({})", es.join(", ")));
        }
    }
}

/// `tight` asks for parentheses around a sum.
fn write_expr(expr: &Expr, tight: bool, out: &mut String) {
    match expr {
        Expr::Literal(i) if *i < 0 => out.push_str(&format!("({i})")),
        Expr::Literal(i) => out.push_str(&i.to_string()),
        Expr::Var(n) => out.push_str(n),
        Expr::Neg(inner) => {
            out.push('-');
            write_expr(inner, true, out);
        }
        Expr::Plus(a, b) => {
            if tight {
                out.push('(');
            }
            write_expr(a, false, out);
            out.push_str(" + ");
            write_expr(b, true, out);
            if tight {
                out.push(')');
            }
        }
        Expr::Measure(qs) if qs.len() == 1 => out.push_str(&format!("measure {}", qs[0])),
        Expr::Measure(qs) => out.push_str(&format!("measure({})", qs.join(", "))),
    }
}
