//! A small expression language for user-supplied psi functions and
//! quasi-arithmetic generators.
//!
//! Grammar (precedence from loosest to tightest):
//!
//! ```text
//! expr   := term { ("+" | "-") term }
//! term   := factor { ("*" | "/") factor }
//! factor := "-" factor | power
//! power  := atom [ "^" factor ]            // right-associative
//! atom   := number | ident | ident "(" expr {"," expr} ")" | "(" expr ")"
//! ```
//!
//! Known functions: `ln`, `exp`, `sqrt`, `abs`, `sign` (unary) and `min`,
//! `max` (binary). Numeric literals are nonnegative; a leading minus parses
//! as negation, so `parse` never produces a negative constant node.

use std::collections::BTreeSet;
use std::fmt;

/// Errors from parsing or evaluating an expression.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}`")]
    UnknownIdentifier { name: String },

    #[error("`{name}` expects {expected} argument(s), got {got}")]
    Arity {
        name: String,
        expected: usize,
        got: usize,
    },

    #[error("domain error in `{node}`: argument {arg} is outside its domain")]
    EvalDomain { node: String, arg: f64 },

    #[error("`{node}` produced a non-finite value")]
    NonFinite { node: String },

    #[error("missing binding for variable `{name}`")]
    MissingBinding { name: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Ln,
    Exp,
    Sqrt,
    Abs,
    Sign,
    Min,
    Max,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Ln => "ln",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Sign => "sign",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "ln" => Func::Ln,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "sign" => Func::Sign,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }
}

/// Parsed expression tree. Structural equality is used by the round-trip
/// guarantee `parse(to_string(e)) == e`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self, ExprError> {
        Parser::new(src).parse()
    }

    /// Free variable names in first-appearance-independent sorted order.
    pub fn free_variables(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(name) => {
                out.insert(name.as_str());
            }
            Expr::Neg(inner) => inner.collect_vars(out),
            Expr::Bin(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Call(_, args) => {
                for a in args {
                    a.collect_vars(out);
                }
            }
        }
    }

    /// Errors unless every free variable is in `allowed`.
    pub fn check_variables(&self, allowed: &[&str]) -> Result<(), ExprError> {
        for name in self.free_variables() {
            if !allowed.contains(&name) {
                return Err(ExprError::UnknownIdentifier { name: name.into() });
            }
        }
        Ok(())
    }

    /// True if any `sign` call has `var` among the free variables of its
    /// argument; such expressions may be discontinuous in `var`.
    pub fn sign_depends_on(&self, var: &str) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => false,
            Expr::Neg(inner) => inner.sign_depends_on(var),
            Expr::Bin(_, a, b) => a.sign_depends_on(var) || b.sign_depends_on(var),
            Expr::Call(f, args) => {
                if *f == Func::Sign && args.iter().any(|a| a.free_variables().contains(var)) {
                    return true;
                }
                args.iter().any(|a| a.sign_depends_on(var))
            }
        }
    }

    /// Evaluates with the given variable bindings. Every intermediate value
    /// must be finite; partial functions error outside their domains.
    pub fn eval(&self, bindings: &[(&str, f64)]) -> Result<f64, ExprError> {
        match self {
            Expr::Const(v) => Ok(*v),
            Expr::Var(name) => bindings
                .iter()
                .find(|(n, _)| n == name)
                .map(|&(_, v)| v)
                .ok_or_else(|| ExprError::MissingBinding { name: name.clone() }),
            Expr::Neg(inner) => Ok(-inner.eval(bindings)?),
            Expr::Bin(op, a, b) => {
                let x = a.eval(bindings)?;
                let y = b.eval(bindings)?;
                let v = match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0.0 {
                            return Err(ExprError::EvalDomain {
                                node: "/".into(),
                                arg: y,
                            });
                        }
                        x / y
                    }
                    BinOp::Pow => {
                        if x < 0.0 && y.fract() != 0.0 {
                            return Err(ExprError::EvalDomain {
                                node: "^".into(),
                                arg: x,
                            });
                        }
                        if x == 0.0 && y < 0.0 {
                            return Err(ExprError::EvalDomain {
                                node: "^".into(),
                                arg: y,
                            });
                        }
                        x.powf(y)
                    }
                };
                finite(v, op.symbol())
            }
            Expr::Call(f, args) => {
                let a = args[0].eval(bindings)?;
                let v = match f {
                    Func::Ln => {
                        if a <= 0.0 {
                            return Err(ExprError::EvalDomain {
                                node: "ln".into(),
                                arg: a,
                            });
                        }
                        a.ln()
                    }
                    Func::Exp => a.exp(),
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(ExprError::EvalDomain {
                                node: "sqrt".into(),
                                arg: a,
                            });
                        }
                        a.sqrt()
                    }
                    Func::Abs => a.abs(),
                    Func::Sign => {
                        if a > 0.0 {
                            1.0
                        } else if a < 0.0 {
                            -1.0
                        } else {
                            0.0
                        }
                    }
                    Func::Min => a.min(args[1].eval(bindings)?),
                    Func::Max => a.max(args[1].eval(bindings)?),
                };
                finite(v, f.name())
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Bin(BinOp::Pow, ..) => 4,
            Expr::Const(_) | Expr::Var(_) | Expr::Call(..) => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        let prec = self.precedence();
        if prec < min_prec {
            write!(f, "(")?;
            self.fmt_prec(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Expr::Const(v) => write!(f, "{v:?}"),
            Expr::Var(name) => write!(f, "{name}"),
            Expr::Neg(inner) => {
                write!(f, "-")?;
                inner.fmt_prec(f, 3)
            }
            Expr::Bin(op, a, b) => {
                // Left-associative ops tighten the right side; `^` is
                // right-associative and keeps its left side atom-tight.
                let (lp, rp) = match op {
                    BinOp::Pow => (5, 3),
                    _ => (prec, prec + 1),
                };
                a.fmt_prec(f, lp)?;
                write!(f, "{}", op.symbol())?;
                b.fmt_prec(f, rp)
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    a.fmt_prec(f, 0)?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

fn finite(v: f64, node: &str) -> Result<f64, ExprError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ExprError::NonFinite { node: node.into() })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Eof,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    tok: Tok,
    tok_at: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src: src.as_bytes(),
            pos: 0,
            tok: Tok::Eof,
            tok_at: 0,
        }
    }

    fn parse(mut self) -> Result<Expr, ExprError> {
        self.advance()?;
        let e = self.expr()?;
        if self.tok != Tok::Eof {
            return Err(self.unexpected("end of input"));
        }
        Ok(e)
    }

    fn err(&self, offset: usize, message: impl Into<String>) -> ExprError {
        ExprError::Syntax {
            offset,
            message: message.into(),
        }
    }

    fn unexpected(&self, wanted: &str) -> ExprError {
        let got = match &self.tok {
            Tok::Eof => "end of input".to_string(),
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("`{s}`"),
            t => format!(
                "`{}`",
                match t {
                    Tok::Plus => "+",
                    Tok::Minus => "-",
                    Tok::Star => "*",
                    Tok::Slash => "/",
                    Tok::Caret => "^",
                    Tok::LParen => "(",
                    Tok::RParen => ")",
                    Tok::Comma => ",",
                    _ => unreachable!(),
                }
            ),
        };
        self.err(self.tok_at, format!("expected {wanted}, found {got}"))
    }

    fn advance(&mut self) -> Result<(), ExprError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.tok_at = self.pos;
        if self.pos >= self.src.len() {
            self.tok = Tok::Eof;
            return Ok(());
        }
        let c = self.src[self.pos];
        self.tok = match c {
            b'+' => {
                self.pos += 1;
                Tok::Plus
            }
            b'-' => {
                self.pos += 1;
                Tok::Minus
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'/' => {
                self.pos += 1;
                Tok::Slash
            }
            b'^' => {
                self.pos += 1;
                Tok::Caret
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b',' => {
                self.pos += 1;
                Tok::Comma
            }
            b'0'..=b'9' | b'.' => self.lex_number()?,
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos])
                    .expect("identifier bytes are ASCII")
                    .to_string();
                Tok::Ident(name)
            }
            other => {
                return Err(self.err(
                    self.pos,
                    format!("unexpected character `{}`", other as char),
                ))
            }
        };
        Ok(())
    }

    fn lex_number(&mut self) -> Result<Tok, ExprError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
        {
            self.pos += 1;
        }
        // Exponent part: e/E with optional sign, then at least one digit.
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
            let mut probe = self.pos + 1;
            if probe < self.src.len() && matches!(self.src[probe], b'+' | b'-') {
                probe += 1;
            }
            if probe < self.src.len() && self.src[probe].is_ascii_digit() {
                self.pos = probe;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos])
            .expect("numeric literal bytes are ASCII");
        let value: f64 = text
            .parse()
            .map_err(|_| self.err(start, format!("invalid numeric literal `{text}`")))?;
        if !value.is_finite() {
            return Err(self.err(start, format!("numeric literal `{text}` overflows")));
        }
        Ok(Tok::Num(value))
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.factor()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        if self.tok == Tok::Minus {
            self.advance()?;
            let inner = self.factor()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.tok == Tok::Caret {
            self.advance()?;
            let exponent = self.factor()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match std::mem::replace(&mut self.tok, Tok::Eof) {
            Tok::Num(v) => {
                self.advance()?;
                Ok(Expr::Const(v))
            }
            Tok::LParen => {
                self.advance()?;
                let e = self.expr()?;
                if self.tok != Tok::RParen {
                    return Err(self.unexpected("`)`"));
                }
                self.advance()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.advance()?;
                if self.tok != Tok::LParen {
                    return Ok(Expr::Var(name));
                }
                let func = Func::from_name(&name)
                    .ok_or(ExprError::UnknownIdentifier { name: name.clone() })?;
                self.advance()?;
                let mut args = vec![self.expr()?];
                while self.tok == Tok::Comma {
                    self.advance()?;
                    args.push(self.expr()?);
                }
                if self.tok != Tok::RParen {
                    return Err(self.unexpected("`)` or `,`"));
                }
                self.advance()?;
                if args.len() != func.arity() {
                    return Err(ExprError::Arity {
                        name: name.clone(),
                        expected: func.arity(),
                        got: args.len(),
                    });
                }
                Ok(Expr::Call(func, args))
            }
            tok => {
                self.tok = tok;
                Err(self.unexpected("a number, variable, function call, or `(`"))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(src: &str) -> Expr {
        Expr::parse(src).unwrap()
    }

    fn eval1(src: &str, x: f64, t: f64) -> f64 {
        parse(src).eval(&[("x", x), ("t", t)]).unwrap()
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval1("1+2*3", 0.0, 0.0), 7.0);
        assert_eq!(eval1("2^3^2", 0.0, 0.0), 512.0);
        assert_eq!(eval1("(2^3)^2", 0.0, 0.0), 64.0);
        assert_eq!(eval1("-2^2", 0.0, 0.0), -4.0);
        assert_eq!(eval1("2^-1", 0.0, 0.0), 0.5);
        assert_eq!(eval1("10-4-3", 0.0, 0.0), 3.0);
        assert_eq!(eval1("24/4/2", 0.0, 0.0), 3.0);
        assert_eq!(eval1("sqrt(x)-sqrt(t)", 9.0, 4.0), 1.0);
        assert_eq!(eval1("min(x, t) + max(x, t)", 3.0, 5.0), 8.0);
    }

    #[test]
    fn sign_is_zero_at_zero() {
        assert_eq!(eval1("sign(x-t)", 2.0, 1.0), 1.0);
        assert_eq!(eval1("sign(x-t)", 1.0, 2.0), -1.0);
        assert_eq!(eval1("sign(x-t)", 2.0, 2.0), 0.0);
    }

    #[test]
    fn partial_functions_error_outside_their_domains() {
        assert!(matches!(
            parse("ln(x)").eval(&[("x", 0.0)]),
            Err(ExprError::EvalDomain { .. })
        ));
        assert!(matches!(
            parse("sqrt(x)").eval(&[("x", -1.0)]),
            Err(ExprError::EvalDomain { .. })
        ));
        assert!(matches!(
            parse("1/x").eval(&[("x", 0.0)]),
            Err(ExprError::EvalDomain { .. })
        ));
        assert!(matches!(
            parse("x^0.5").eval(&[("x", -2.0)]),
            Err(ExprError::EvalDomain { .. })
        ));
        assert!(matches!(
            parse("x^x").eval(&[("x", 0.0)]),
            Ok(v) if v == 1.0
        ));
        assert!(matches!(
            parse("exp(x)").eval(&[("x", 1e6)]),
            Err(ExprError::NonFinite { .. })
        ));
    }

    #[test]
    fn negative_integer_powers_of_negative_bases_work() {
        assert_eq!(parse("x^3").eval(&[("x", -2.0)]).unwrap(), -8.0);
        assert_eq!(parse("x^-2").eval(&[("x", -2.0)]).unwrap(), 0.25);
    }

    #[test]
    fn missing_binding_is_reported_by_name() {
        assert_eq!(
            parse("x+y").eval(&[("x", 1.0)]),
            Err(ExprError::MissingBinding { name: "y".into() })
        );
    }

    #[test]
    fn syntax_error_carries_byte_offset() {
        assert_eq!(
            Expr::parse("ln("),
            Err(ExprError::Syntax {
                offset: 3,
                message: "expected a number, variable, function call, or `(`, found end of input"
                    .into()
            })
        );
        assert!(matches!(
            Expr::parse("1 + * 2"),
            Err(ExprError::Syntax { offset: 4, .. })
        ));
        assert!(matches!(
            Expr::parse("x $ y"),
            Err(ExprError::Syntax { offset: 2, .. })
        ));
    }

    #[test]
    fn unknown_function_and_arity_errors() {
        assert_eq!(
            Expr::parse("foo(x)"),
            Err(ExprError::UnknownIdentifier { name: "foo".into() })
        );
        assert_eq!(
            Expr::parse("min(x)"),
            Err(ExprError::Arity {
                name: "min".into(),
                expected: 2,
                got: 1
            })
        );
        assert_eq!(
            Expr::parse("ln(x, t)"),
            Err(ExprError::Arity {
                name: "ln".into(),
                expected: 1,
                got: 2
            })
        );
    }

    #[test]
    fn free_variables_are_sorted_and_deduplicated() {
        let e = parse("t*x + x - sign(u)");
        let vars: Vec<&str> = e.free_variables().into_iter().collect();
        assert_eq!(vars, vec!["t", "u", "x"]);
        assert!(e.check_variables(&["x", "t", "u"]).is_ok());
        assert_eq!(
            e.check_variables(&["x", "t"]),
            Err(ExprError::UnknownIdentifier { name: "u".into() })
        );
    }

    #[test]
    fn sign_dependency_detection() {
        assert!(parse("sign(x-t)").sign_depends_on("t"));
        assert!(!parse("sign(x)-t").sign_depends_on("t"));
        assert!(!parse("x - t").sign_depends_on("t"));
        assert!(parse("1 + 2*sign(t^2)").sign_depends_on("t"));
    }

    #[test]
    fn display_round_trips_structurally() {
        for src in [
            "x-t",
            "sqrt(x)-sqrt(t)",
            "1.0/(t*t) - abs(x)",
            "-(x*t)",
            "-x*t",
            "x^-2",
            "(-2.0+x)^2",
            "x-(t-1.0)",
            "min(x,max(t,2.5))",
            "2.0^3.0^x",
            "sign(x-t)*0.5",
            "1e-9*x",
        ] {
            let e = parse(src);
            let printed = e.to_string();
            let reparsed = Expr::parse(&printed)
                .unwrap_or_else(|err| panic!("reparse of `{printed}` failed: {err}"));
            assert_eq!(reparsed, e, "round trip failed for `{src}` -> `{printed}`");
        }
    }

    #[test]
    fn display_parenthesizes_only_when_needed() {
        assert_eq!(parse("x - (t - 1)").to_string(), "x-(t-1.0)");
        assert_eq!(parse("(x - t) - 1").to_string(), "x-t-1.0");
        assert_eq!(parse("(x+t)*2").to_string(), "(x+t)*2.0");
        assert_eq!(parse("(-x)^2").to_string(), "(-x)^2.0");
        assert_eq!(parse("-(x^2)").to_string(), "-x^2.0");
    }

    #[test]
    fn whitespace_is_insignificant() {
        assert_eq!(parse("  sqrt( x ) -\tsqrt(t)  "), parse("sqrt(x)-sqrt(t)"));
    }
}
