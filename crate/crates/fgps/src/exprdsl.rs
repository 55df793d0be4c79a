//! A small arithmetic expression language for declaring objective
//! integrands, dynamics right-hand sides and path constraints in text
//! form.
//!
//! Grammar: real literals, the variables `t`, `y1..y{n_x}`,
//! `u1..u{n_u}`, binary `+ - * / ^`, unary minus, the functions
//! `sin cos exp abs tanh sqrt`, and parentheses. `^` is
//! right-associative and binds tighter than unary minus, which binds
//! tighter than `*` and `/`.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Abs,
    Tanh,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Abs => "abs",
            Func::Tanh => "tanh",
            Func::Sqrt => "sqrt",
        }
    }
}

/// Parsed expression tree. Immutable and freely shareable; evaluation
/// never mutates.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Time,
    /// Zero-based state index (`y1` parses to `State(0)`).
    State(usize),
    /// Zero-based control index.
    Control(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Variable bindings for one evaluation.
#[derive(Debug, Clone, Copy)]
pub struct EvalEnv<'a> {
    pub t: f64,
    pub states: &'a [f64],
    pub controls: &'a [f64],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    /// Byte offset into the source text.
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedEnd,
    InvalidNumber(String),
    UnknownIdentifier(String),
    /// Variable index outside the declared arity.
    ArityViolation {
        name: String,
        limit: usize,
    },
    /// Input continued after a complete expression.
    TrailingInput,
    MissingClosingParen,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::UnexpectedChar(c) => {
                write!(f, "unexpected character {c:?} at byte {}", self.offset)
            }
            ParseErrorKind::UnexpectedEnd => write!(f, "unexpected end of input"),
            ParseErrorKind::InvalidNumber(s) => {
                write!(f, "invalid number {s:?} at byte {}", self.offset)
            }
            ParseErrorKind::UnknownIdentifier(s) => {
                write!(f, "unknown identifier {s:?} at byte {}", self.offset)
            }
            ParseErrorKind::ArityViolation { name, limit } => write!(
                f,
                "variable {name:?} at byte {} exceeds declared arity {limit}",
                self.offset
            ),
            ParseErrorKind::TrailingInput => {
                write!(f, "trailing input at byte {}", self.offset)
            }
            ParseErrorKind::MissingClosingParen => {
                write!(f, "missing ')' at byte {}", self.offset)
            }
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    DivisionByZero,
    SqrtOfNegative(f64),
    /// Overflow or an undefined operation produced a non-finite value.
    NonFinite,
    /// Environment does not carry the variable the tree references.
    EnvMismatch { name: String },
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DivisionByZero => write!(f, "division by zero"),
            Self::SqrtOfNegative(x) => write!(f, "square root of negative value {x}"),
            Self::NonFinite => write!(f, "expression produced a non-finite value"),
            Self::EnvMismatch { name } => write!(f, "environment lacks variable {name}"),
        }
    }
}

impl std::error::Error for EvalError {}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    n_states: usize,
    n_controls: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, offset: usize, kind: ParseErrorKind) -> Result<T, ParseError> {
        Err(ParseError { offset, kind })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    /// Precedence climbing over binary operators.
    fn expr(&mut self, min_prec: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.atom()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => (BinOp::Add, 1, false),
                Some(b'-') => (BinOp::Sub, 1, false),
                Some(b'*') => (BinOp::Mul, 2, false),
                Some(b'/') => (BinOp::Div, 2, false),
                Some(b'^') => (BinOp::Pow, 4, true),
                _ => break,
            };
            let (op, prec, right_assoc) = op;
            if prec < min_prec {
                break;
            }
            self.pos += 1;
            let next_min = if right_assoc { prec } else { prec + 1 };
            let rhs = self.expr(next_min)?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => self.err(self.src.len(), ParseErrorKind::UnexpectedEnd),
            Some(b'-') => {
                self.pos += 1;
                // unary minus sits between mul/div and pow
                let inner = self.expr(3)?;
                Ok(Expr::Neg(Box::new(inner)))
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr(1)?;
                if self.peek() == Some(b')') {
                    self.pos += 1;
                    Ok(inner)
                } else {
                    self.err(self.pos, ParseErrorKind::MissingClosingParen)
                }
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            Some(c) => self.err(self.pos, ParseErrorKind::UnexpectedChar(c as char)),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_digit() || self.bytes[self.pos] == b'.')
        {
            self.pos += 1;
        }
        // optional exponent part
        if self.pos < self.bytes.len() && matches!(self.bytes[self.pos], b'e' | b'E') {
            let mut probe = self.pos + 1;
            if probe < self.bytes.len() && matches!(self.bytes[probe], b'+' | b'-') {
                probe += 1;
            }
            if probe < self.bytes.len() && self.bytes[probe].is_ascii_digit() {
                self.pos = probe;
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            }
        }
        let text = &self.src[start..self.pos];
        match text.parse::<f64>() {
            Ok(v) => Ok(Expr::Num(v)),
            Err(_) => self.err(start, ParseErrorKind::InvalidNumber(text.to_string())),
        }
    }

    fn identifier(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = &self.src[start..self.pos];
        let func = match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "abs" => Some(Func::Abs),
            "tanh" => Some(Func::Tanh),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        };
        if let Some(func) = func {
            if self.peek() != Some(b'(') {
                return self.err(self.pos, ParseErrorKind::UnexpectedEnd);
            }
            self.pos += 1;
            let arg = self.expr(1)?;
            if self.peek() != Some(b')') {
                return self.err(self.pos, ParseErrorKind::MissingClosingParen);
            }
            self.pos += 1;
            return Ok(Expr::Call(func, Box::new(arg)));
        }
        if name == "t" {
            return Ok(Expr::Time);
        }
        if let Some(rest) = name.strip_prefix('y') {
            if let Ok(i) = rest.parse::<usize>() {
                if i >= 1 && i <= self.n_states {
                    return Ok(Expr::State(i - 1));
                }
                return self.err(
                    start,
                    ParseErrorKind::ArityViolation {
                        name: name.to_string(),
                        limit: self.n_states,
                    },
                );
            }
        }
        if let Some(rest) = name.strip_prefix('u') {
            if let Ok(i) = rest.parse::<usize>() {
                if i >= 1 && i <= self.n_controls {
                    return Ok(Expr::Control(i - 1));
                }
                return self.err(
                    start,
                    ParseErrorKind::ArityViolation {
                        name: name.to_string(),
                        limit: self.n_controls,
                    },
                );
            }
        }
        self.err(start, ParseErrorKind::UnknownIdentifier(name.to_string()))
    }
}

/// Parses `text` against the declared arities. Every token must be
/// consumed.
pub fn parse(text: &str, n_states: usize, n_controls: usize) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: text,
        bytes: text.as_bytes(),
        pos: 0,
        n_states,
        n_controls,
    };
    let expr = p.expr(1)?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(ParseError {
            offset: p.pos,
            kind: ParseErrorKind::TrailingInput,
        });
    }
    Ok(expr)
}

impl Expr {
    pub fn eval(&self, env: &EvalEnv) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Time => env.t,
            Expr::State(i) => *env.states.get(*i).ok_or_else(|| EvalError::EnvMismatch {
                name: format!("y{}", i + 1),
            })?,
            Expr::Control(i) => *env.controls.get(*i).ok_or_else(|| EvalError::EnvMismatch {
                name: format!("u{}", i + 1),
            })?,
            Expr::Neg(e) => -e.eval(env)?,
            Expr::Bin(op, a, b) => {
                let a = a.eval(env)?;
                let b = b.eval(env)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        a / b
                    }
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call(func, arg) => {
                let x = arg.eval(env)?;
                match func {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Abs => x.abs(),
                    Func::Tanh => x.tanh(),
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(EvalError::SqrtOfNegative(x));
                        }
                        x.sqrt()
                    }
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// Source form with explicit parentheses; parsing it back gives a
    /// structurally equal tree.
    pub fn to_text(&self) -> String {
        match self {
            Expr::Num(v) => {
                if *v < 0.0 {
                    // keep literals non-negative so the printer never
                    // fabricates unary minus tokens
                    format!("(0 - {:e})", -v)
                } else {
                    format!("{v:e}")
                }
            }
            Expr::Time => "t".to_string(),
            Expr::State(i) => format!("y{}", i + 1),
            Expr::Control(i) => format!("u{}", i + 1),
            Expr::Neg(e) => format!("(-({}))", e.to_text()),
            Expr::Bin(op, a, b) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                format!("({} {} {})", a.to_text(), sym, b.to_text())
            }
            Expr::Call(f, arg) => format!("{}({})", f.name(), arg.to_text()),
        }
    }

    /// Largest state/control indexes referenced, as (states, controls)
    /// counts.
    pub fn arity(&self) -> (usize, usize) {
        match self {
            Expr::Num(_) | Expr::Time => (0, 0),
            Expr::State(i) => (i + 1, 0),
            Expr::Control(i) => (0, i + 1),
            Expr::Neg(e) => e.arity(),
            Expr::Bin(_, a, b) => {
                let (s1, c1) = a.arity();
                let (s2, c2) = b.arity();
                (s1.max(s2), c1.max(c2))
            }
            Expr::Call(_, e) => e.arity(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn eval_free(src: &str) -> f64 {
        parse(src, 0, 0)
            .unwrap()
            .eval(&EvalEnv {
                t: 0.0,
                states: &[],
                controls: &[],
            })
            .unwrap()
    }

    fn eval_at(src: &str, t: f64, y: &[f64], u: &[f64]) -> f64 {
        parse(src, y.len(), u.len())
            .unwrap()
            .eval(&EvalEnv {
                t,
                states: y,
                controls: u,
            })
            .unwrap()
    }

    #[test]
    fn benchmark_expressions_parse() {
        assert!(parse("u1^2 - y1^2", 2, 1).is_ok());
        assert!(parse("-4*y1 - 0.3*y2 + u1", 2, 1).is_ok());
        assert_eq!(eval_at("u1^2 - y1^2", 0.0, &[2.0, 0.0], &[1.0]), -3.0);
    }

    #[test]
    fn undeclared_variable_is_an_arity_error() {
        let err = parse("y3 + 1", 2, 0).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::ArityViolation { .. }));
        assert_eq!(err.offset, 0);
        let err = parse("1 + u2", 0, 1).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::ArityViolation { .. }));
        assert_eq!(err.offset, 4);
    }

    #[test]
    fn unknown_identifier_reports_offset() {
        let err = parse("2 * foo", 0, 0).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::UnknownIdentifier(_)));
        assert_eq!(err.offset, 4);
    }

    #[test]
    fn power_is_right_associative() {
        assert_eq!(eval_free("2^3^2"), 512.0);
    }

    #[test]
    fn precedence_corpus() {
        let pi = std::f64::consts::PI;
        // 30 fixed expressions with hand-computed values
        let cases: [(&str, f64); 30] = [
            ("1 + 2 * 3", 7.0),
            ("(1 + 2) * 3", 9.0),
            ("2 * 3 + 1", 7.0),
            ("10 - 4 - 3", 3.0),
            ("10 - (4 - 3)", 9.0),
            ("12 / 2 / 3", 2.0),
            ("12 / (2 / 3)", 18.0),
            ("2 + 12 / 4", 5.0),
            ("-2^2", -4.0),
            ("(-2)^2", 4.0),
            ("2^-2", 0.25),
            ("-2 * 3", -6.0),
            ("- 2 - 3", -5.0),
            ("2 - -3", 5.0),
            ("2^3 * 2", 16.0),
            ("2 * 2^3", 16.0),
            ("2^2^3", 256.0),
            ("4^0.5", 2.0),
            ("abs(-3.5)", 3.5),
            ("sqrt(16)", 4.0),
            ("sqrt(2)^2", 2.0000000000000004),
            ("exp(0)", 1.0),
            ("sin(0)", 0.0),
            ("cos(0)", 1.0),
            ("tanh(0)", 0.0),
            ("1 - 2 + 3", 2.0),
            ("6 / 3 * 2", 4.0),
            ("2 * -3", -6.0),
            ("1 + -2^2", -3.0),
            ("3 * (2 + 1)^2", 27.0),
        ];
        for (src, expect) in cases {
            assert_eq!(eval_free(src), expect, "{src}");
        }
        assert_eq!(eval_at("sin(t)", pi / 2.0, &[], &[]), 1.0);
    }

    #[test]
    fn eval_errors_are_distinct() {
        assert_eq!(
            eval_free_err("1 / (2 - 2)"),
            EvalError::DivisionByZero
        );
        assert!(matches!(
            eval_free_err("sqrt(0 - 4)"),
            EvalError::SqrtOfNegative(_)
        ));
        assert_eq!(eval_free_err("exp(10000)"), EvalError::NonFinite);
    }

    fn eval_free_err(src: &str) -> EvalError {
        parse(src, 0, 0)
            .unwrap()
            .eval(&EvalEnv {
                t: 0.0,
                states: &[],
                controls: &[],
            })
            .unwrap_err()
    }

    #[test]
    fn env_mismatch_is_reported() {
        let e = parse("y2", 2, 0).unwrap();
        let err = e
            .eval(&EvalEnv {
                t: 0.0,
                states: &[1.0],
                controls: &[],
            })
            .unwrap_err();
        assert!(matches!(err, EvalError::EnvMismatch { .. }));
    }

    #[test]
    fn syntax_errors_report_offsets() {
        let err = parse("1 + ", 0, 0).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::UnexpectedEnd));
        let err = parse("(1 + 2", 0, 0).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::MissingClosingParen));
        let err = parse("1 2", 0, 0).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::TrailingInput);
        assert_eq!(err.offset, 2);
        let err = parse("1 + #", 0, 0).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedChar('#'));
    }

    #[test]
    fn arity_introspection() {
        let e = parse("u1^2 - y2 * sin(t)", 2, 1).unwrap();
        assert_eq!(e.arity(), (2, 1));
    }

    // random well-formed trees for the round-trip law
    fn arb_expr(depth: u32) -> BoxedStrategy<Expr> {
        let leaf = prop_oneof![
            (0.0f64..100.0).prop_map(Expr::Num),
            Just(Expr::Time),
            (0usize..3).prop_map(Expr::State),
            (0usize..2).prop_map(Expr::Control),
        ];
        if depth == 0 {
            return leaf.boxed();
        }
        let sub = arb_expr(depth - 1);
        let sub2 = arb_expr(depth - 1);
        prop_oneof![
            leaf,
            sub.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (sub.clone(), sub2).prop_map(|(a, b)| {
                Expr::Bin(BinOp::Add, Box::new(a), Box::new(b))
            }),
            (any::<u8>(), sub.clone(), arb_expr(depth - 1)).prop_map(|(k, a, b)| {
                let op = match k % 5 {
                    0 => BinOp::Add,
                    1 => BinOp::Sub,
                    2 => BinOp::Mul,
                    3 => BinOp::Div,
                    _ => BinOp::Pow,
                };
                Expr::Bin(op, Box::new(a), Box::new(b))
            }),
            (any::<u8>(), sub).prop_map(|(k, a)| {
                let f = match k % 6 {
                    0 => Func::Sin,
                    1 => Func::Cos,
                    2 => Func::Exp,
                    3 => Func::Abs,
                    4 => Func::Tanh,
                    _ => Func::Sqrt,
                };
                Expr::Call(f, Box::new(a))
            }),
        ]
        .boxed()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn print_parse_round_trip(e in arb_expr(4)) {
            let printed = e.to_text();
            let reparsed = parse(&printed, 3, 2).unwrap();
            prop_assert_eq!(&reparsed, &e);
            // idempotent: a second round trip changes nothing
            let reprinted = reparsed.to_text();
            prop_assert_eq!(parse(&reprinted, 3, 2).unwrap(), e);
        }

        #[test]
        fn eval_is_deterministic(e in arb_expr(3), t in -5.0f64..5.0) {
            let env = EvalEnv { t, states: &[1.0, -2.0, 0.5], controls: &[0.3, -0.9] };
            let a = e.eval(&env);
            let b = e.eval(&env);
            match (a, b) {
                (Ok(x), Ok(y)) => prop_assert_eq!(x.to_bits(), y.to_bits()),
                (Err(x), Err(y)) => prop_assert_eq!(x, y),
                _ => prop_assert!(false, "nondeterministic result"),
            }
        }
    }
}
