//! Text rendering of formulas in the input syntax.
//!
//! Binary operands are parenthesized whenever they are themselves binary
//! formulas or negations; unary temporal operators always parenthesize
//! their operand, and negation does unless the operand starts with a
//! keyword. Internal nodes print as `delay[d] (x)` and
//! `(x) until@[a:b] (y)`.

use crate::formula::{Expr, Formula, Predicate};
use crate::time::Interval;

pub fn format_formula(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(f, &mut out);
    out
}

pub fn format_predicate(p: &Predicate) -> String {
    format!("{} {} {}", format_expr(&p.lhs), p.op.symbol(), format_expr(&p.rhs))
}

pub fn format_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(e, &mut out);
    out
}

fn interval_suffix(i: &Interval) -> String {
    // `[0s:inf]` keeps its spelling so that printing round-trips exactly
    if i.is_full() && i.lo.unit.is_none() {
        String::new()
    } else {
        i.to_string()
    }
}

fn write_unary(kw: &str, i: Option<&Interval>, f: &Formula, out: &mut String) {
    out.push_str(kw);
    match i.map(interval_suffix) {
        Some(s) if !s.is_empty() => {
            out.push_str(&s);
            out.push(' ');
        }
        _ => {}
    }
    out.push('(');
    write_formula(f, out);
    out.push(')');
}

fn needs_parens(f: &Formula) -> bool {
    matches!(
        f,
        Formula::Not(_)
            | Formula::And(..)
            | Formula::Or(..)
            | Formula::Implies(..)
            | Formula::Since(..)
            | Formula::Until(..)
            | Formula::DelayedUntil(..)
    )
}

fn write_operand(f: &Formula, out: &mut String) {
    if needs_parens(f) {
        out.push('(');
        write_formula(f, out);
        out.push(')');
    } else {
        write_formula(f, out);
    }
}

fn write_binary(a: &Formula, op: &str, b: &Formula, out: &mut String) {
    write_operand(a, out);
    out.push(' ');
    out.push_str(op);
    out.push(' ');
    write_operand(b, out);
}

fn write_formula(f: &Formula, out: &mut String) {
    use Formula::*;
    match f {
        Pred(p) => out.push_str(&format_predicate(p)),
        // a keyword-led operand needs no parentheses of its own
        Not(x) if !needs_parens(x) && !matches!(**x, Pred(_)) => {
            out.push_str("not ");
            write_formula(x, out);
        }
        Not(x) => {
            out.push_str("not (");
            write_formula(x, out);
            out.push(')');
        }
        And(a, b) => write_binary(a, "and", b, out),
        Or(a, b) => write_binary(a, "or", b, out),
        Implies(a, b) => write_binary(a, "implies", b, out),
        Next(x) => write_unary("next", None, x, out),
        Prev(x) => write_unary("prev", None, x, out),
        Rise(x) => write_unary("rise", None, x, out),
        Fall(x) => write_unary("fall", None, x, out),
        Once(i, x) => write_unary("once", Some(i), x, out),
        Historically(i, x) => write_unary("historically", Some(i), x, out),
        Eventually(i, x) => write_unary("eventually", Some(i), x, out),
        Always(i, x) => write_unary("always", Some(i), x, out),
        Since(i, a, b) => write_binary(a, &format!("since{}", interval_suffix(i)), b, out),
        Until(i, a, b) => write_binary(a, &format!("until{}", interval_suffix(i)), b, out),
        Delay(d, x) => {
            out.push_str(&format!("delay[{d}] ("));
            write_formula(x, out);
            out.push(')');
        }
        DelayedUntil(i, a, b) => {
            out.push('(');
            write_formula(a, out);
            out.push_str(&format!(") until@{i} ("));
            write_formula(b, out);
            out.push(')');
        }
    }
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(_) => 3,
        Expr::Const(c) if *c < 0.0 => 3,
        _ => 4,
    }
}

fn write_expr_at(e: &Expr, min_prec: u8, out: &mut String) {
    if prec(e) < min_prec {
        out.push('(');
        write_expr(e, out);
        out.push(')');
    } else {
        write_expr(e, out);
    }
}

fn write_expr(e: &Expr, out: &mut String) {
    match e {
        Expr::Const(c) => out.push_str(&format!("{c}")),
        Expr::Var(v) => out.push_str(v.as_str()),
        Expr::Neg(x) => {
            out.push('-');
            match **x {
                Expr::Var(_) | Expr::Abs(_) | Expr::Neg(_) => write_expr(x, out),
                Expr::Const(c) if c < 0.0 => write_expr(x, out),
                _ => {
                    out.push('(');
                    write_expr(x, out);
                    out.push(')');
                }
            }
        }
        Expr::Abs(x) => {
            out.push_str("abs(");
            write_expr(x, out);
            out.push(')');
        }
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
            let (sym, p) = match e {
                Expr::Add(..) => ("+", 1),
                Expr::Sub(..) => ("-", 1),
                Expr::Mul(..) => ("*", 2),
                _ => ("/", 2),
            };
            write_expr_at(a, p, out);
            out.push(' ');
            out.push_str(sym);
            out.push(' ');
            write_expr_at(b, p + 1, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::CmpOp;
    use crate::time::{Interval, TimeBound};

    fn ge(v: &str, c: f64) -> Formula {
        Formula::pred(Expr::var(v), CmpOp::Ge, Expr::Const(c))
    }

    #[test]
    fn leaf() {
        assert_eq!(format_formula(&ge("a", 3.0)), "a >= 3");
    }

    #[test]
    fn bounded_once() {
        assert_eq!(format_formula(&Formula::once(Interval::ints(0, 5), ge("gnt", 3.0))), "once[0:5] (gnt >= 3)");
    }

    #[test]
    fn negated_eventually() {
        let f = Formula::not(Formula::eventually(Interval::ints(0, 5), ge("p", 0.0)));
        assert_eq!(format_formula(&f), "not eventually[0:5] (p >= 0)");
        assert_eq!(crate::parse_formula(&format_formula(&f)).unwrap(), f);
        let g = Formula::not(ge("p", 0.0));
        assert_eq!(format_formula(&g), "not (p >= 0)");
    }

    #[test]
    fn internal_nodes() {
        let f = Formula::delay(TimeBound::int(5), ge("req", 3.0));
        assert_eq!(format_formula(&f), "delay[5] (req >= 3)");
        let f = Formula::DelayedUntil(Interval::ints(1, 2), Box::new(ge("a", 0.0)), Box::new(ge("b", 0.0)));
        assert_eq!(format_formula(&f), "(a >= 0) until@[1:2] (b >= 0)");
    }

    #[test]
    fn unbounded_operators_drop_the_interval() {
        assert_eq!(format_formula(&Formula::historically(Interval::unbounded(), ge("a", 0.0))), "historically(a >= 0)");
        let i = Interval { lo: TimeBound::int(2), hi: None };
        assert_eq!(format_formula(&Formula::once(i, ge("a", 0.0))), "once[2:inf] (a >= 0)");
    }

    #[test]
    fn arithmetic_parenthesization() {
        let a = || Box::new(Expr::var("a"));
        let b = || Box::new(Expr::var("b"));
        assert_eq!(format_expr(&Expr::Sub(a(), Box::new(Expr::Sub(b(), a())))), "a - (b - a)");
        assert_eq!(format_expr(&Expr::Mul(Box::new(Expr::Add(a(), b())), a())), "(a + b) * a");
        assert_eq!(format_expr(&Expr::Neg(Box::new(Expr::Const(2.0)))), "-(2)");
        assert_eq!(format_expr(&Expr::Sub(a(), Box::new(Expr::Const(-2.0)))), "a - -2");
    }
}
