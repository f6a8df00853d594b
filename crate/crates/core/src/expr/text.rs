//! Text renderings of expressions and their parsers.
//!
//! Infix: binary operations are parenthesized when they appear as operands,
//! `|a|` for absolute value, `(a)/2` for halving, `min(a, b)` / `max(a, b)`,
//! variables `x1..xN`. The outermost operation, and the contents of `|..|`,
//! `(..)/2` and function arguments, are left bare.
//!
//! S-expression: `(var 3)`, `(const 0.5)`, `(add a b)`, `(sub a b)`,
//! `(abs a)`, `(halve a)`, `(min a b)`, `(max a b)`.
//!
//! Both parse back to a structurally equal expression.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{Expr, ExprRef};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Syntax {
    Infix,
    Sexpr,
}

pub fn emit_text(expr: &ExprRef, syntax: Syntax) -> String {
    match syntax {
        Syntax::Infix => render_infix(expr),
        Syntax::Sexpr => render_sexpr(expr),
    }
}

pub(crate) fn render_infix(expr: &Expr) -> String {
    let mut out = String::new();
    infix(expr, true, &mut out);
    out
}

fn infix(e: &Expr, bare: bool, out: &mut String) {
    match e {
        Expr::Var(i) => write!(out, "x{i}").unwrap(),
        Expr::Const(c) => write!(out, "{c}").unwrap(),
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            let op = if matches!(e, Expr::Add(..)) {
                " + "
            } else {
                " - "
            };
            if !bare {
                out.push('(');
            }
            infix(a, false, out);
            out.push_str(op);
            infix(b, false, out);
            if !bare {
                out.push(')');
            }
        }
        Expr::Abs(a) => {
            out.push('|');
            infix(a, true, out);
            out.push('|');
        }
        Expr::Halve(a) => {
            out.push('(');
            infix(a, true, out);
            out.push_str(")/2");
        }
        Expr::Min(a, b) | Expr::Max(a, b) => {
            out.push_str(e.name());
            out.push('(');
            infix(a, true, out);
            out.push_str(", ");
            infix(b, true, out);
            out.push(')');
        }
    }
}

fn render_sexpr(expr: &Expr) -> String {
    let mut out = String::new();
    sexpr(expr, &mut out);
    out
}

fn sexpr(e: &Expr, out: &mut String) {
    out.push('(');
    out.push_str(e.name());
    match e {
        Expr::Var(i) => write!(out, " {i}").unwrap(),
        Expr::Const(c) => write!(out, " {c}").unwrap(),
        _ => {
            for c in e.children() {
                out.push(' ');
                sexpr(c, out);
            }
        }
    }
    out.push(')');
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor { src, pos: 0 }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        if self.eat(token) {
            Ok(())
        } else {
            self.err(format!("expected {token:?}"))
        }
    }

    fn finish(&mut self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(c) => self.err(format!("unexpected trailing {c:?}")),
        }
    }

    fn word(&mut self) -> &'a str {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest
            .find(|c: char| !c.is_ascii_alphanumeric())
            .unwrap_or(rest.len());
        self.pos += len;
        &rest[..len]
    }

    /// Optional sign, digits, optional fraction, optional exponent.
    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let bytes = self.src.as_bytes();
        let start = self.pos;
        let mut i = start;
        let digits = |i: &mut usize| {
            let s = *i;
            while *i < bytes.len() && bytes[*i].is_ascii_digit() {
                *i += 1;
            }
            *i > s
        };
        if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
            i += 1;
        }
        let mut any = digits(&mut i);
        if i < bytes.len() && bytes[i] == b'.' {
            i += 1;
            any |= digits(&mut i);
        }
        if !any {
            return self.err("expected a number");
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            if digits(&mut j) {
                i = j;
            }
        }
        let v: f64 = self.src[start..i]
            .parse()
            .or_else(|_| self.err("malformed number"))?;
        if !v.is_finite() {
            return self.err("number out of range");
        }
        self.pos = i;
        Ok(v)
    }

    fn var_index(&mut self, digits: &str) -> Result<usize> {
        match digits.parse::<usize>() {
            Ok(i) if i >= 1 => Ok(i),
            _ => self.err(format!("bad variable index {digits:?}")),
        }
    }
}

/// Parses the infix rendering.
pub fn parse_infix(src: &str) -> Result<ExprRef> {
    let mut c = Cursor::new(src);
    let e = infix_sum(&mut c)?;
    c.finish()?;
    Ok(e)
}

fn infix_sum(c: &mut Cursor) -> Result<ExprRef> {
    let mut acc = infix_term(c)?;
    loop {
        if c.eat("+") {
            acc = Expr::add(acc, infix_term(c)?);
        } else if c.eat("-") {
            acc = Expr::sub(acc, infix_term(c)?);
        } else {
            return Ok(acc);
        }
    }
}

fn infix_term(c: &mut Cursor) -> Result<ExprRef> {
    let mut e = infix_primary(c)?;
    while c.eat("/") {
        c.expect("2")?;
        e = Expr::halve(e);
    }
    Ok(e)
}

fn infix_primary(c: &mut Cursor) -> Result<ExprRef> {
    match c.peek() {
        Some('(') => {
            c.pos += 1;
            let e = infix_sum(c)?;
            c.expect(")")?;
            Ok(e)
        }
        Some('|') => {
            c.pos += 1;
            let e = infix_sum(c)?;
            c.expect("|")?;
            Ok(Expr::abs(e))
        }
        Some('x') => {
            let w = c.word();
            let i = c.var_index(&w[1..])?;
            Ok(Expr::var(i))
        }
        Some('m') => {
            let at = c.pos;
            let w = c.word();
            let f = match w {
                "min" => Expr::min,
                "max" => Expr::max,
                _ => {
                    c.pos = at;
                    return c.err(format!("unknown function {w:?}"));
                }
            };
            c.expect("(")?;
            let a = infix_sum(c)?;
            c.expect(",")?;
            let b = infix_sum(c)?;
            c.expect(")")?;
            Ok(f(a, b))
        }
        Some(ch) if ch.is_ascii_digit() || ch == '-' || ch == '+' || ch == '.' => {
            Ok(Expr::constant(c.number()?))
        }
        Some(ch) => c.err(format!("unexpected {ch:?}")),
        None => c.err("unexpected end of input"),
    }
}

/// Parses the s-expression rendering.
pub fn parse_sexpr(src: &str) -> Result<ExprRef> {
    let mut c = Cursor::new(src);
    let e = sexpr_node(&mut c)?;
    c.finish()?;
    Ok(e)
}

fn sexpr_node(c: &mut Cursor) -> Result<ExprRef> {
    c.expect("(")?;
    let at = c.pos;
    let head = c.word();
    let e = match head {
        "var" => {
            let digits = c.word();
            Expr::var(c.var_index(digits)?)
        }
        "const" => Expr::constant(c.number()?),
        "abs" => Expr::abs(sexpr_node(c)?),
        "halve" => Expr::halve(sexpr_node(c)?),
        "add" | "sub" | "min" | "max" => {
            let a = sexpr_node(c)?;
            let b = sexpr_node(c)?;
            match head {
                "add" => Expr::add(a, b),
                "sub" => Expr::sub(a, b),
                "min" => Expr::min(a, b),
                _ => Expr::max(a, b),
            }
        }
        _ => {
            c.pos = at;
            return c.err(format!("unknown operator {head:?}"));
        }
    };
    c.expect(")")?;
    Ok(e)
}

/// Parses either syntax; `(` then an operator name then whitespace selects
/// s-expressions (infix calls are written `min(`).
pub fn parse_text(src: &str) -> Result<ExprRef> {
    const HEADS: [&str; 8] = ["var", "const", "add", "sub", "abs", "halve", "min", "max"];
    let is_sexpr = src
        .trim_start()
        .strip_prefix('(')
        .map(|r| {
            let r = r.trim_start();
            let head_len = r
                .find(|ch: char| !ch.is_ascii_lowercase())
                .unwrap_or(r.len());
            HEADS.contains(&&r[..head_len])
                && r[head_len..].starts_with(|ch: char| ch.is_whitespace())
        })
        .unwrap_or(false);
    if is_sexpr {
        parse_sexpr(src)
    } else {
        parse_infix(src)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{build_selection_expr, ExprForm};
    use crate::sequence::Rank;

    fn x(i: usize) -> ExprRef {
        Expr::var(i)
    }

    fn build(len: usize, n: usize, form: ExprForm) -> ExprRef {
        build_selection_expr(len, Rank::new(n, len).unwrap(), form).unwrap()
    }

    #[test]
    fn min_of_two_infix() {
        assert_eq!(
            emit_text(&build(2, 1, ExprForm::Arithmetic), Syntax::Infix),
            "((x1 + x2) - |x1 - x2|)/2"
        );
    }

    #[test]
    fn var_sexpr() {
        assert_eq!(emit_text(&x(3), Syntax::Sexpr), "(var 3)");
        assert_eq!(emit_text(&x(3), Syntax::Infix), "x3");
    }

    #[test]
    fn min_of_two_sexpr() {
        assert_eq!(
            emit_text(&build(2, 1, ExprForm::Arithmetic), Syntax::Sexpr),
            "(halve (sub (add (var 1) (var 2)) (abs (sub (var 1) (var 2)))))"
        );
    }

    #[test]
    fn minmax_infix() {
        assert_eq!(
            emit_text(&build(3, 2, ExprForm::MinMax), Syntax::Infix),
            "max(max(min(x2, x3), min(x1, x3)), min(x1, x2))"
        );
    }

    #[test]
    fn min_of_three_infix() {
        assert_eq!(
            emit_text(&build(3, 1, ExprForm::Arithmetic), Syntax::Infix),
            "((((x1 + x2) - |x1 - x2|)/2 + x3) - |((x1 + x2) - |x1 - x2|)/2 - x3|)/2"
        );
    }

    #[test]
    fn round_trips_tricky_shapes() {
        let cases = [
            Expr::abs(Expr::abs(x(1))),
            Expr::abs(Expr::sub(Expr::abs(x(1)), x(2))),
            Expr::sub(Expr::abs(x(1)), Expr::abs(x(2))),
            Expr::halve(Expr::halve(x(4))),
            Expr::halve(x(1)),
            Expr::sub(x(1), Expr::constant(-2.5)),
            Expr::add(Expr::constant(1e-7), Expr::constant(12345678.0)),
            Expr::sub(Expr::sub(x(1), x(2)), x(3)),
            Expr::sub(x(1), Expr::sub(x(2), x(3))),
            Expr::min(Expr::add(x(1), x(2)), Expr::halve(Expr::abs(x(3)))),
            Expr::halve(Expr::min(x(1), x(2))),
        ];
        for e in cases {
            for syntax in [Syntax::Infix, Syntax::Sexpr] {
                let s = emit_text(&e, syntax);
                let back = parse_text(&s).unwrap_or_else(|err| panic!("{s}: {err}"));
                assert_eq!(back, e, "{s}");
            }
        }
    }

    #[test]
    fn parses_loose_whitespace() {
        let e = parse_infix("  ( (x1+x2) -|x1-x2| ) /2 ").unwrap();
        assert_eq!(e, build(2, 1, ExprForm::Arithmetic));
        let e = parse_sexpr("( max\n(var 1)( var 2 ) )").unwrap();
        assert_eq!(e, Expr::max(x(1), x(2)));
    }

    #[test]
    fn parse_errors() {
        for bad in [
            "",
            "x0",
            "x1 +",
            "(x1",
            "|x1",
            "foo(x1, x2)",
            "x1 x2",
            "x1/3",
            "1e999",
        ] {
            assert!(
                matches!(parse_infix(bad), Err(Error::Parse { .. })),
                "{bad:?} should fail"
            );
        }
        for bad in [
            "(var)",
            "(var 0)",
            "(neg (var 1))",
            "(add (var 1))",
            "(var 1) extra",
        ] {
            assert!(parse_sexpr(bad).is_err(), "{bad:?} should fail");
        }
    }
}
