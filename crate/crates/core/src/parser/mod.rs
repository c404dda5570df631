//! Specification front-end: tokenizer, recursive-descent parser and
//! model validation.
//!
//! Grammar, lowest to highest precedence inside formulas:
//!
//! ```text
//! spec    := (decl | annot | import | assign)*
//! decl    := ("input" | "output") TYPE? PATH
//! annot   := "@" IDENT "(" raw ")"
//! import  := "from" PATH "import" IDENT ("," IDENT)*
//! assign  := PATH "=" formula
//! formula := implies
//! implies := until (("implies" | "->") implies)?
//! until   := or (("until" | "since") interval? until)?
//! or      := and ("or" and)*
//! and     := not ("and" not)*
//! not     := "not" not | temporal
//! temporal:= KW interval? not | atom         KW in always, eventually, once,
//!                                             historically, next, prev, rise, fall
//! atom    := arith CMP arith | "(" formula ")"
//! arith   := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | NUMBER | PATH | "abs" "(" arith ")" | "(" arith ")"
//! interval:= "[" bound (":" | ",") (bound | "inf") "]"
//! ```
//!
//! Keywords are case-insensitive. Bounds are decimals with an optional
//! `s`, `ms`, `us` or `ns` suffix.

mod lexer;

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::formula::{Annotation, CmpOp, Expr, Formula, IoKind, NamedFormula, Pos, Predicate, SpecModel, VarRef};
use crate::time::{Decimal, Interval, TimeBound, TimeUnit};
use lexer::{Tok, Token};

/// A syntax error at a 1-based line and column.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}{}", fmt_expected(.expected))]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub expected: Vec<String>,
}

fn fmt_expected(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected {})", expected.join(", "))
    }
}

impl ParseError {
    pub(crate) fn new(pos: Pos, message: impl Into<String>, expected: Vec<String>) -> Self {
        ParseError { line: pos.line, column: pos.column, message: message.into(), expected }
    }

    fn pos(&self) -> Pos {
        Pos { line: self.line, column: self.column }
    }
}

/// A model-level problem found after parsing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub pos: Pos,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pos, self.message)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("syntax error at {0}")]
    Parse(#[from] ParseError),
    #[error("invalid specification: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Validation(Vec<Diagnostic>),
}

/// Parses and validates a specification.
pub fn parse_spec(text: &str) -> Result<SpecModel, SpecError> {
    let model = Parser::new(text)?.spec()?;
    let diags = validate(&model);
    if diags.is_empty() {
        Ok(model)
    } else {
        Err(SpecError::Validation(diags))
    }
}

/// Parses a single formula (no declarations, no validation).
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser::new(text)?;
    let f = p.formula()?;
    p.expect_eof()?;
    Ok(f)
}

/// Checks the model invariants; an empty list means the model is valid.
pub fn validate(model: &SpecModel) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut seen = HashSet::new();
    for nf in &model.formulas {
        if !seen.insert(nf.name.as_str()) {
            diags.push(Diagnostic { pos: nf.pos, message: format!("duplicate formula name `{}`", nf.name) });
        }
        if !model.declarations.is_empty() {
            let sites: Vec<(VarRef, Pos)> = if nf.var_sites.is_empty() {
                nf.formula.vars().into_iter().map(|v| (v.clone(), nf.pos)).collect()
            } else {
                nf.var_sites.clone()
            };
            for (v, pos) in sites {
                if !model.declarations.is_declared(&v) {
                    diags.push(Diagnostic { pos, message: format!("variable `{v}` is not declared") });
                }
            }
        }
        nf.formula.walk(&mut |f| {
            let here = |m: String| Diagnostic { pos: nf.pos, message: format!("formula `{}`: {m}", nf.name) };
            match f {
                Formula::Until(i, ..) if !i.is_bounded() => {
                    diags.push(here("unbounded until is not supported".into()));
                }
                Formula::Delay(..) | Formula::DelayedUntil(..) => {
                    diags.push(here("internal operator in source formula".into()));
                }
                _ => {}
            }
        });
        for i in nf.formula.intervals() {
            if let Some(hi) = i.hi {
                if i.lo.unit == hi.unit && i.lo.value > hi.value {
                    diags.push(Diagnostic { pos: nf.pos, message: format!("empty interval {i}") });
                }
            }
        }
    }
    diags
}

const KEYWORDS: &[&str] = &[
    "input",
    "output",
    "from",
    "import",
    "always",
    "eventually",
    "once",
    "historically",
    "next",
    "prev",
    "rise",
    "fall",
    "until",
    "since",
    "not",
    "and",
    "or",
    "implies",
    "abs",
];

fn is_keyword(s: &str) -> bool {
    KEYWORDS.iter().any(|k| k.eq_ignore_ascii_case(s))
}

struct Parser {
    toks: Vec<Token>,
    i: usize,
    sites: Vec<(VarRef, Pos)>,
}

#[derive(Clone, Copy)]
enum Unary {
    Always,
    Eventually,
    Once,
    Historically,
    Next,
    Prev,
    Rise,
    Fall,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: lexer::tokenize(text)?, i: 0, sites: Vec::new() })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.i + k).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError::new(
            self.pos(),
            format!("unexpected {}", self.peek().describe()),
            expected.iter().map(|s| s.to_string()).collect(),
        )
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.error(&[t.symbol()]))
        }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.error(&["end of input"]))
        }
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s.eq_ignore_ascii_case(kw))
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn path(&mut self, what: &str) -> Result<(VarRef, Pos), ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok((VarRef::new(s).expect("lexer produces valid paths"), pos))
            }
            _ => Err(self.error(&[what])),
        }
    }

    fn spec(&mut self) -> Result<SpecModel, ParseError> {
        let mut model = SpecModel::new();
        loop {
            let pos = self.pos();
            match self.peek().clone() {
                Tok::Eof => return Ok(model),
                Tok::Annotation { key, raw } => {
                    self.bump();
                    model.annotations.push(Annotation { key, raw, pos });
                }
                Tok::Ident(s) if s.eq_ignore_ascii_case("input") || s.eq_ignore_ascii_case("output") => {
                    self.bump();
                    let kind = if s.eq_ignore_ascii_case("input") { IoKind::Input } else { IoKind::Output };
                    let (first, first_pos) = self.path("variable name")?;
                    // `input Twist cmd`: a second path not followed by `=` names the variable
                    let var = match (self.peek(), self.peek_at(1)) {
                        (Tok::Ident(s), next) if !is_keyword(s) && *next != Tok::Assign => {
                            self.path("variable name")?
                        }
                        _ => (first, first_pos),
                    };
                    if !model.declarations.declare(var.0.clone(), kind) {
                        return Err(ParseError::new(var.1, format!("variable `{}` declared twice", var.0), vec![]));
                    }
                }
                Tok::Ident(s) if s.eq_ignore_ascii_case("from") => {
                    self.bump();
                    let (module, _) = self.path("module path")?;
                    if !self.eat_kw("import") {
                        return Err(self.error(&["import"]));
                    }
                    let mut names = vec![self.path("type name")?.0.to_string()];
                    while self.eat(&Tok::Comma) {
                        names.push(self.path("type name")?.0.to_string());
                    }
                    model.imports.push(format!("from {module} import {}", names.join(", ")));
                }
                Tok::Ident(s) if !is_keyword(&s) => {
                    let (target, pos) = self.path("assignment target")?;
                    self.expect(Tok::Assign)?;
                    self.sites.clear();
                    let formula = self.formula()?;
                    model.formulas.push(NamedFormula {
                        name: target.to_string(),
                        formula,
                        pos,
                        var_sites: std::mem::take(&mut self.sites),
                    });
                }
                _ => return Err(self.error(&["declaration", "annotation", "assignment"])),
            }
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        self.implies()
    }

    fn implies(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.until()?;
        if self.eat_kw("implies") || self.eat(&Tok::Arrow) {
            let rhs = self.implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        let is_until = self.at_kw("until");
        if is_until || self.at_kw("since") {
            self.bump();
            let i = self.opt_interval()?;
            let rhs = self.until()?;
            return Ok(if is_until { Formula::until(i, lhs, rhs) } else { Formula::since(i, lhs, rhs) });
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while self.eat_kw("or") {
            lhs = Formula::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.not()?;
        while self.eat_kw("and") {
            lhs = Formula::and(lhs, self.not()?);
        }
        Ok(lhs)
    }

    fn not(&mut self) -> Result<Formula, ParseError> {
        if self.eat_kw("not") {
            return Ok(Formula::not(self.not()?));
        }
        self.temporal()
    }

    fn unary_kw(&self) -> Option<Unary> {
        let Tok::Ident(s) = self.peek() else { return None };
        let s = s.to_ascii_lowercase();
        Some(match s.as_str() {
            "always" => Unary::Always,
            "eventually" => Unary::Eventually,
            "once" => Unary::Once,
            "historically" => Unary::Historically,
            "next" => Unary::Next,
            "prev" => Unary::Prev,
            "rise" => Unary::Rise,
            "fall" => Unary::Fall,
            _ => return None,
        })
    }

    fn temporal(&mut self) -> Result<Formula, ParseError> {
        let Some(op) = self.unary_kw() else { return self.atom() };
        self.bump();
        use Unary::*;
        let interval = match op {
            Always | Eventually | Once | Historically => Some(self.opt_interval()?),
            _ => None,
        };
        let arg = Box::new(self.not()?);
        let i = interval.unwrap_or_else(Interval::unbounded);
        Ok(match op {
            Always => Formula::Always(i, arg),
            Eventually => Formula::Eventually(i, arg),
            Once => Formula::Once(i, arg),
            Historically => Formula::Historically(i, arg),
            Next => Formula::Next(arg),
            Prev => Formula::Prev(arg),
            Rise => Formula::Rise(arg),
            Fall => Formula::Fall(arg),
        })
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let start = self.i;
        let sites = self.sites.len();
        let cmp_err = match self.comparison() {
            Ok(f) => return Ok(f),
            Err(e) => e,
        };
        self.i = start;
        self.sites.truncate(sites);
        if *self.peek() != Tok::LParen {
            return Err(cmp_err);
        }
        self.bump();
        let grouped = self.formula().and_then(|f| self.expect(Tok::RParen).map(|_| f));
        match grouped {
            Ok(f) => Ok(f),
            // report whichever reading got further
            Err(e) if e.pos() >= cmp_err.pos() => Err(e),
            Err(_) => Err(cmp_err),
        }
    }

    fn comparison(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.arith()?;
        let op = match self.peek() {
            Tok::Ge => CmpOp::Ge,
            Tok::Gt => CmpOp::Gt,
            Tok::Le => CmpOp::Le,
            Tok::Lt => CmpOp::Lt,
            Tok::EqEq => CmpOp::Eq,
            Tok::NotEq => CmpOp::Ne,
            _ => return Err(self.error(&[">=", ">", "<=", "<", "==", "!="])),
        };
        self.bump();
        let rhs = self.arith()?;
        Ok(Formula::Pred(Predicate::new(lhs, op, rhs)))
    }

    fn arith(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(&Tok::Plus) {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(&Tok::Minus) {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(&Tok::Star) {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(&Tok::Slash) {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let pos = self.pos();
        match self.bump().tok {
            Tok::Number { text, suffix: None } => Ok(text.parse().expect("lexer produces valid numbers")),
            Tok::Number { suffix: Some(s), .. } => {
                Err(ParseError::new(pos, format!("unit suffix `{s}` is only allowed in interval bounds"), vec![]))
            }
            _ => unreachable!("caller checked for a number"),
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&Tok::Minus) {
            if matches!(self.peek(), Tok::Number { .. }) {
                return Ok(Expr::Const(-self.number()?));
            }
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        match self.peek().clone() {
            Tok::Number { .. } => Ok(Expr::Const(self.number()?)),
            Tok::LParen => {
                self.bump();
                let e = self.arith()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(s) if s.eq_ignore_ascii_case("abs") => {
                self.bump();
                self.expect(Tok::LParen)?;
                let e = self.arith()?;
                self.expect(Tok::RParen)?;
                Ok(Expr::Abs(Box::new(e)))
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                let (v, pos) = self.path("variable")?;
                self.sites.push((v.clone(), pos));
                Ok(Expr::Var(v))
            }
            _ => Err(self.error(&["number", "variable", "abs", "("])),
        }
    }

    fn opt_interval(&mut self) -> Result<Interval, ParseError> {
        if !self.eat(&Tok::LBracket) {
            return Ok(Interval::unbounded());
        }
        let lo = self.bound()?;
        if !(self.eat(&Tok::Colon) || self.eat(&Tok::Comma)) {
            return Err(self.error(&[":", ","]));
        }
        let hi = if matches!(self.peek(), Tok::Ident(s) if s.eq_ignore_ascii_case("inf")) {
            self.bump();
            None
        } else {
            Some(self.bound()?)
        };
        self.expect(Tok::RBracket)?;
        Ok(Interval { lo, hi })
    }

    fn bound(&mut self) -> Result<TimeBound, ParseError> {
        let pos = self.pos();
        let Tok::Number { text, suffix } = self.peek().clone() else {
            return Err(self.error(&["interval bound"]));
        };
        self.bump();
        let value: Decimal = text.parse().map_err(|_| ParseError::new(pos, format!("bad bound `{text}`"), vec![]))?;
        let unit = match suffix {
            None => None,
            Some(s) => Some(TimeUnit::parse(&s).ok_or_else(|| {
                ParseError::new(
                    pos,
                    format!("unknown time unit `{s}`"),
                    vec!["s".into(), "ms".into(), "us".into(), "ns".into()],
                )
            })?),
        };
        Ok(TimeBound { value, unit })
    }
}
