use std::collections::HashSet;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;

const KEYWORDS: [&str; 4] = ["qdit", "new", "measure", "main"];
const MAX_DEPTH: usize = 200;

/// Parses a `.cqp` program.
///
/// Without a `main = Name(args)` line the last definition is the entry point
/// and is called with its own parameter names.
pub fn parse(source: &str) -> Result<Program, ParseError> {
    let tokens = tokenize(source)?;
    Parser {
        tokens,
        pos: 0,
        depth: 0,
    }
    .program()
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    depth: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    fn error_here(&self, expected: &str) -> ParseError {
        let span = self.span();
        ParseError {
            line: span.line,
            col: span.col,
            message: format!("expected {expected}, found {}", self.peek().describe()),
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<Span> {
        if self.peek() == &tok {
            Ok(self.advance().span)
        } else {
            Err(self.error_here(&tok.describe()))
        }
    }

    /// Expects the closing delimiter for an opener at `open`. Running out of
    /// input is reported at the opener itself.
    fn close(&mut self, closer: Tok, opener: &str, open: Span) -> PResult<()> {
        if self.peek() == &closer {
            self.advance();
            return Ok(());
        }
        let at = if self.peek() == &Tok::Eof {
            open
        } else {
            self.span()
        };
        Err(ParseError {
            line: at.line,
            col: at.col,
            message: format!(
                "unclosed `{opener}` opened at {open}: expected {}, found {}",
                closer.describe(),
                self.peek().describe()
            ),
        })
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.error_here("shallower nesting"));
        }
        Ok(())
    }

    fn name(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.advance();
                Ok(s)
            }
            _ => Err(self.error_here("a name")),
        }
    }

    fn is_keyword(&self, offset: usize, kw: &str) -> bool {
        matches!(self.peek_at(offset), Tok::Ident(s) if s == kw)
    }

    fn program(mut self) -> PResult<Program> {
        let mut definitions: Vec<Definition> = Vec::new();
        let mut entry: Option<Entry> = None;
        let mut seen = HashSet::new();
        while self.peek() != &Tok::Eof {
            if self.is_keyword(0, "main") {
                let span = self.span();
                self.advance();
                if entry.is_some() {
                    return Err(ParseError {
                        line: span.line,
                        col: span.col,
                        message: "duplicate `main` entry point".into(),
                    });
                }
                self.expect(Tok::Equals)?;
                let name = self.name()?;
                let args = self.call_args()?;
                entry = Some(Entry { name, args, span });
                continue;
            }
            let span = self.span();
            let name = self.name()?;
            if !seen.insert(name.clone()) {
                return Err(ParseError {
                    line: span.line,
                    col: span.col,
                    message: format!("duplicate definition of `{name}`"),
                });
            }
            let open = self.expect(Tok::LParen)?;
            let params = if self.peek() == &Tok::RParen {
                Vec::new()
            } else {
                self.binders()?
            };
            self.close(Tok::RParen, "(", open)?;
            self.expect(Tok::Equals)?;
            let body = self.process()?;
            definitions.push(Definition {
                name,
                params,
                body,
                span,
            });
        }
        let entry = match entry {
            Some(e) => e,
            None => {
                let last = definitions.last().ok_or_else(|| ParseError {
                    line: 1,
                    col: 1,
                    message: "empty program: expected at least one definition".into(),
                })?;
                Entry {
                    name: last.name.clone(),
                    args: last.params.iter().map(|p| Expr::var(&p.name)).collect(),
                    span: last.span,
                }
            }
        };
        Ok(Program { definitions, entry })
    }

    fn call_args(&mut self) -> PResult<Vec<Expr>> {
        let open = self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if self.peek() != &Tok::RParen {
            args.push(self.expr()?);
            while self.eat(&Tok::Comma) {
                args.push(self.expr()?);
            }
        }
        self.close(Tok::RParen, "(", open)?;
        Ok(args)
    }

    fn binders(&mut self) -> PResult<Vec<Binder>> {
        let mut out = vec![self.binder()?];
        while self.eat(&Tok::Comma) {
            out.push(self.binder()?);
        }
        Ok(out)
    }

    fn binder(&mut self) -> PResult<Binder> {
        let name = self.name()?;
        self.expect(Tok::Colon)?;
        let ty = self.ty()?;
        Ok(Binder { name, ty })
    }

    fn ty(&mut self) -> PResult<TypeExpr> {
        self.enter()?;
        let t = match self.peek().clone() {
            Tok::Ident(s) if s == "Qdit" => {
                self.advance();
                TypeExpr::Qdit
            }
            // `bit` annotates classical channels in the superdense-coding model.
            Tok::Ident(s) if s == "Val" || s == "bit" => {
                self.advance();
                TypeExpr::Val
            }
            Tok::Caret => {
                self.advance();
                let open = self.expect(Tok::LBracket)?;
                let mut payload = vec![self.ty()?];
                while self.eat(&Tok::Comma) {
                    payload.push(self.ty()?);
                }
                self.close(Tok::RBracket, "[", open)?;
                TypeExpr::Chan(payload)
            }
            _ => return Err(self.error_here("a type (`Qdit`, `Val` or `^[...]`)")),
        };
        self.depth -= 1;
        Ok(t)
    }

    fn names(&mut self) -> PResult<Vec<String>> {
        let mut out = vec![self.name()?];
        while self.eat(&Tok::Comma) {
            out.push(self.name()?);
        }
        Ok(out)
    }

    fn process(&mut self) -> PResult<ProcessTerm> {
        let mut left = self.prefixed()?;
        while self.eat(&Tok::Bar) {
            let right = self.prefixed()?;
            left = ProcessTerm::parallel(left, right);
        }
        Ok(left)
    }

    fn continuation(&mut self) -> PResult<Box<ProcessTerm>> {
        self.expect(Tok::Dot)?;
        Ok(Box::new(self.prefixed()?))
    }

    fn prefixed(&mut self) -> PResult<ProcessTerm> {
        self.enter()?;
        let span = self.span();
        let term = match self.peek().clone() {
            Tok::Int(0) => {
                self.advance();
                ProcessTerm::Nil
            }
            Tok::LParen if self.is_keyword(1, "qdit") => {
                self.advance();
                self.advance();
                let names = self.names()?;
                self.close(Tok::RParen, "(", span)?;
                let cont = Box::new(self.prefixed()?);
                ProcessTerm::QditAlloc { names, cont, span }
            }
            Tok::LParen if self.is_keyword(1, "new") => {
                self.advance();
                self.advance();
                let name = self.name()?;
                self.expect(Tok::Colon)?;
                let ty = self.ty()?;
                self.close(Tok::RParen, "(", span)?;
                let cont = Box::new(self.prefixed()?);
                ProcessTerm::NewChan {
                    name,
                    ty,
                    cont,
                    span,
                }
            }
            Tok::LParen => {
                self.advance();
                let inner = self.process()?;
                self.close(Tok::RParen, "(", span)?;
                inner
            }
            Tok::LBrace => {
                self.advance();
                let targets = self.names()?;
                self.expect(Tok::StarEq)?;
                let gate = self.gate()?;
                self.close(Tok::RBrace, "{", span)?;
                let cont = self.continuation()?;
                ProcessTerm::Action {
                    targets,
                    gate,
                    cont,
                    span,
                }
            }
            Tok::Ident(_) => {
                let name = self.name()?;
                match self.peek() {
                    Tok::Question => {
                        self.advance();
                        let open = self.expect(Tok::LBracket)?;
                        let binders = self.binders()?;
                        self.close(Tok::RBracket, "[", open)?;
                        let cont = self.continuation()?;
                        ProcessTerm::Input {
                            chan: name,
                            binders,
                            cont,
                            span,
                        }
                    }
                    Tok::Bang => {
                        self.advance();
                        let open = self.expect(Tok::LBracket)?;
                        let mut payload = vec![self.expr()?];
                        while self.eat(&Tok::Comma) {
                            payload.push(self.expr()?);
                        }
                        self.close(Tok::RBracket, "[", open)?;
                        let cont = self.continuation()?;
                        ProcessTerm::Output {
                            chan: name,
                            payload,
                            cont,
                            span,
                        }
                    }
                    Tok::LParen => {
                        let args = self.call_args()?;
                        ProcessTerm::Call { name, args, span }
                    }
                    _ => return Err(self.error_here("`?`, `!` or `(` after a name")),
                }
            }
            _ => return Err(self.error_here("a process")),
        };
        self.depth -= 1;
        Ok(term)
    }

    fn gate(&mut self) -> PResult<GateExpr> {
        let span = self.span();
        let name = match self.peek().clone() {
            Tok::Ident(s) => {
                self.advance();
                s
            }
            _ => return Err(self.error_here("a gate name")),
        };
        let gate = match name.as_str() {
            "H" => GateExpr::Hadamard,
            "Hinv" => GateExpr::HadamardInv,
            "Rc" => GateExpr::CnotRight,
            "Lc" => GateExpr::CnotLeft,
            "X" | "Z" => {
                let exp = if self.eat(&Tok::Caret) {
                    self.exponent()?
                } else {
                    Expr::Literal(1)
                };
                if name == "X" {
                    GateExpr::ShiftX(exp)
                } else {
                    GateExpr::PhaseZ(exp)
                }
            }
            "U" => {
                self.expect(Tok::Caret)?;
                let open = self.expect(Tok::LParen)?;
                let j = self.expr()?;
                self.expect(Tok::Comma)?;
                let k = self.expr()?;
                self.close(Tok::RParen, "(", open)?;
                GateExpr::PauliU(j, k)
            }
            other => {
                return Err(ParseError {
                    line: span.line,
                    col: span.col,
                    message: format!(
                        "unknown gate `{other}` (expected H, Hinv, X^k, Z^k, U^(j,k), Rc or Lc)"
                    ),
                })
            }
        };
        Ok(gate)
    }

    fn exponent(&mut self) -> PResult<Expr> {
        self.enter()?;
        let span = self.span();
        let e = match self.peek().clone() {
            Tok::Minus => {
                self.advance();
                Expr::Neg(Box::new(self.exponent()?))
            }
            Tok::Int(i) => {
                self.advance();
                Expr::Literal(i)
            }
            Tok::Ident(_) => Expr::Var(self.name()?),
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.close(Tok::RParen, "(", span)?;
                e
            }
            _ => return Err(self.error_here("an exponent")),
        };
        self.depth -= 1;
        Ok(e)
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut left = self.unary()?;
        while self.eat(&Tok::Plus) {
            let right = self.unary()?;
            left = Expr::Plus(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn unary(&mut self) -> PResult<Expr> {
        self.enter()?;
        let span = self.span();
        let e = match self.peek().clone() {
            Tok::Minus => {
                self.advance();
                Expr::Neg(Box::new(self.unary()?))
            }
            Tok::Int(i) => {
                self.advance();
                Expr::Literal(i)
            }
            Tok::Ident(s) if s == "measure" => {
                self.advance();
                if self.peek() == &Tok::LParen {
                    let open = self.advance().span;
                    let names = self.names()?;
                    self.close(Tok::RParen, "(", open)?;
                    Expr::Measure(names)
                } else {
                    Expr::Measure(vec![self.name()?])
                }
            }
            Tok::Ident(_) => Expr::Var(self.name()?),
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.close(Tok::RParen, "(", span)?;
                e
            }
            _ => return Err(self.error_here("an expression")),
        };
        self.depth -= 1;
        Ok(e)
    }
}
