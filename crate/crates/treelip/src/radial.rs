//! Radial symbols as closed-form expressions in the level variable `n`.
//!
//! Grammar: `n`, decimal literals, `+ - * / ^`, unary minus, `log` (natural),
//! `sqrt`, `floor`, `min`, `max`, and parentheses. Every expression evaluates
//! at natural levels to a finite real or fails with a declared domain error;
//! there is no silent NaN. Piecewise symbols are written with indicator
//! algebra, which is exact at integer arguments: `min(1, max(0, n - (c-1)))`
//! is 1 for `n >= c` and 0 below.

use crate::dd::Dd;

/// Expression tree for a real-valued radial function of the level.
#[derive(Clone, Debug, PartialEq)]
pub enum RadialExpr {
    /// The level variable `n`.
    Level,
    Const(f64),
    Neg(Box<RadialExpr>),
    Add(Box<RadialExpr>, Box<RadialExpr>),
    Sub(Box<RadialExpr>, Box<RadialExpr>),
    Mul(Box<RadialExpr>, Box<RadialExpr>),
    Div(Box<RadialExpr>, Box<RadialExpr>),
    Pow(Box<RadialExpr>, Box<RadialExpr>),
    Log(Box<RadialExpr>),
    Sqrt(Box<RadialExpr>),
    Floor(Box<RadialExpr>),
    Min(Box<RadialExpr>, Box<RadialExpr>),
    Max(Box<RadialExpr>, Box<RadialExpr>),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("parse error at column {col}: {message}")]
    Parse { col: usize, message: String },
    #[error("domain error: {op} at level {level}")]
    Domain { op: &'static str, level: u64 },
    #[error("overflow evaluating at level {level}")]
    Overflow { level: u64 },
}

impl RadialExpr {
    pub fn level() -> RadialExpr {
        RadialExpr::Level
    }

    pub fn lit(c: f64) -> RadialExpr {
        RadialExpr::Const(c)
    }

    pub fn log(e: RadialExpr) -> RadialExpr {
        RadialExpr::Log(Box::new(e))
    }

    pub fn sqrt(e: RadialExpr) -> RadialExpr {
        RadialExpr::Sqrt(Box::new(e))
    }

    pub fn floor(e: RadialExpr) -> RadialExpr {
        RadialExpr::Floor(Box::new(e))
    }

    pub fn min2(a: RadialExpr, b: RadialExpr) -> RadialExpr {
        RadialExpr::Min(Box::new(a), Box::new(b))
    }

    pub fn max2(a: RadialExpr, b: RadialExpr) -> RadialExpr {
        RadialExpr::Max(Box::new(a), Box::new(b))
    }

    pub fn pow(base: RadialExpr, exp: RadialExpr) -> RadialExpr {
        RadialExpr::Pow(Box::new(base), Box::new(exp))
    }

    /// `min(n, cut)` as an expression.
    pub fn capped_level(cut: u64) -> RadialExpr {
        Self::min2(RadialExpr::Level, RadialExpr::lit(cut as f64))
    }

    /// Indicator of `n >= cut`, exact at integer levels (1 for cut = 0).
    pub fn indicator_level_ge(cut: u64) -> RadialExpr {
        if cut == 0 {
            return RadialExpr::lit(1.0);
        }
        Self::min2(
            RadialExpr::lit(1.0),
            Self::max2(
                RadialExpr::lit(0.0),
                RadialExpr::Level - RadialExpr::lit((cut - 1) as f64),
            ),
        )
    }

    /// `on_tail` where `n >= cut`, `below` elsewhere.
    pub fn select_level_ge(cut: u64, on_tail: RadialExpr, below: RadialExpr) -> RadialExpr {
        let ind = Self::indicator_level_ge(cut);
        ind.clone() * on_tail + (RadialExpr::lit(1.0) - ind) * below
    }

    /// Substitutes `min(n, cut)` for the level variable (level truncation).
    pub fn compose_min_level(&self, cut: u64) -> RadialExpr {
        use RadialExpr::*;
        let rec = |e: &RadialExpr| Box::new(e.compose_min_level(cut));
        match self {
            Level => Self::capped_level(cut),
            Const(c) => Const(*c),
            Neg(a) => Neg(rec(a)),
            Add(a, b) => Add(rec(a), rec(b)),
            Sub(a, b) => Sub(rec(a), rec(b)),
            Mul(a, b) => Mul(rec(a), rec(b)),
            Div(a, b) => Div(rec(a), rec(b)),
            Pow(a, b) => Pow(rec(a), rec(b)),
            Log(a) => Log(rec(a)),
            Sqrt(a) => Sqrt(rec(a)),
            Floor(a) => Floor(rec(a)),
            Min(a, b) => Min(rec(a), rec(b)),
            Max(a, b) => Max(rec(a), rec(b)),
        }
    }

    pub fn parse(src: &str) -> Result<RadialExpr, ExprError> {
        Parser::new(src)?.parse_all()
    }

    /// Evaluates at level `n` in plain f64. This is the code path shared with
    /// tabulated data, so materializing a radial symbol onto a tree and
    /// recomputing per vertex reproduces these values bit for bit.
    pub fn eval(&self, n: u64) -> Result<f64, ExprError> {
        use RadialExpr::*;
        let v = match self {
            Level => n as f64,
            Const(c) => *c,
            Neg(a) => -a.eval(n)?,
            Add(a, b) => a.eval(n)? + b.eval(n)?,
            Sub(a, b) => a.eval(n)? - b.eval(n)?,
            Mul(a, b) => a.eval(n)? * b.eval(n)?,
            Div(a, b) => {
                let d = b.eval(n)?;
                if d == 0.0 {
                    return Err(ExprError::Domain {
                        op: "division by zero",
                        level: n,
                    });
                }
                a.eval(n)? / d
            }
            Pow(a, b) => {
                let base = a.eval(n)?;
                let e = b.eval(n)?;
                pow_checked_f64(base, e, n)?
            }
            Log(a) => {
                let x = a.eval(n)?;
                if x <= 0.0 {
                    return Err(ExprError::Domain {
                        op: "log of a non-positive value",
                        level: n,
                    });
                }
                x.ln()
            }
            Sqrt(a) => {
                let x = a.eval(n)?;
                if x < 0.0 {
                    return Err(ExprError::Domain {
                        op: "sqrt of a negative value",
                        level: n,
                    });
                }
                x.sqrt()
            }
            Floor(a) => a.eval(n)?.floor(),
            Min(a, b) => a.eval(n)?.min(b.eval(n)?),
            Max(a, b) => a.eval(n)?.max(b.eval(n)?),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ExprError::Overflow { level: n })
        }
    }

    /// Evaluates at level `n` in double-double precision; used by the ladder
    /// sampler, where f64 differences of nearly equal values would cancel.
    pub fn eval_dd(&self, n: u64) -> Result<Dd, ExprError> {
        use RadialExpr::*;
        let v = match self {
            Level => Dd::from_f64(n as f64),
            Const(c) => Dd::from_f64(*c),
            Neg(a) => -a.eval_dd(n)?,
            Add(a, b) => a.eval_dd(n)? + b.eval_dd(n)?,
            Sub(a, b) => a.eval_dd(n)? - b.eval_dd(n)?,
            Mul(a, b) => a.eval_dd(n)? * b.eval_dd(n)?,
            Div(a, b) => {
                let d = b.eval_dd(n)?;
                if d.hi == 0.0 && d.lo == 0.0 {
                    return Err(ExprError::Domain {
                        op: "division by zero",
                        level: n,
                    });
                }
                a.eval_dd(n)? / d
            }
            Pow(a, b) => {
                let base = a.eval_dd(n)?;
                let e = b.eval_dd(n)?;
                pow_checked_dd(base, e, n)?
            }
            Log(a) => {
                let x = a.eval_dd(n)?;
                x.ln().ok_or(ExprError::Domain {
                    op: "log of a non-positive value",
                    level: n,
                })?
            }
            Sqrt(a) => {
                let x = a.eval_dd(n)?;
                if x.hi < 0.0 {
                    return Err(ExprError::Domain {
                        op: "sqrt of a negative value",
                        level: n,
                    });
                }
                x.sqrt()
            }
            Floor(a) => a.eval_dd(n)?.floor(),
            Min(a, b) => a.eval_dd(n)?.min(b.eval_dd(n)?),
            Max(a, b) => a.eval_dd(n)?.max(b.eval_dd(n)?),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ExprError::Overflow { level: n })
        }
    }
}

fn pow_checked_f64(base: f64, e: f64, n: u64) -> Result<f64, ExprError> {
    if base > 0.0 {
        return Ok(base.powf(e));
    }
    if base == 0.0 {
        return if e > 0.0 {
            Ok(0.0)
        } else if e == 0.0 {
            Ok(1.0)
        } else {
            Err(ExprError::Domain {
                op: "zero to a negative power",
                level: n,
            })
        };
    }
    if e.fract() == 0.0 && e.abs() <= 9.007_199_254_740_992e15 {
        Ok(base.powf(e))
    } else {
        Err(ExprError::Domain {
            op: "negative base to a non-integer power",
            level: n,
        })
    }
}

fn pow_checked_dd(base: Dd, e: Dd, n: u64) -> Result<Dd, ExprError> {
    let int_exp = e.lo == 0.0 && e.hi.fract() == 0.0 && e.hi.abs() <= 1e15;
    if int_exp {
        let k = e.hi as i64;
        if base.hi == 0.0 && base.lo == 0.0 {
            return if k > 0 {
                Ok(Dd::ZERO)
            } else if k == 0 {
                Ok(Dd::ONE)
            } else {
                Err(ExprError::Domain {
                    op: "zero to a negative power",
                    level: n,
                })
            };
        }
        return Ok(base.powi(k));
    }
    if base.hi > 0.0 {
        let ln = base.ln().expect("positive base");
        return Ok((e * ln).exp());
    }
    if base.hi == 0.0 && base.lo == 0.0 {
        return if e.hi > 0.0 {
            Ok(Dd::ZERO)
        } else {
            Err(ExprError::Domain {
                op: "zero to a negative power",
                level: n,
            })
        };
    }
    Err(ExprError::Domain {
        op: "negative base to a non-integer power",
        level: n,
    })
}

impl std::ops::Add for RadialExpr {
    type Output = RadialExpr;
    fn add(self, rhs: RadialExpr) -> RadialExpr {
        RadialExpr::Add(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Sub for RadialExpr {
    type Output = RadialExpr;
    fn sub(self, rhs: RadialExpr) -> RadialExpr {
        RadialExpr::Sub(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Mul for RadialExpr {
    type Output = RadialExpr;
    fn mul(self, rhs: RadialExpr) -> RadialExpr {
        RadialExpr::Mul(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Div for RadialExpr {
    type Output = RadialExpr;
    fn div(self, rhs: RadialExpr) -> RadialExpr {
        RadialExpr::Div(Box::new(self), Box::new(rhs))
    }
}

impl std::fmt::Display for RadialExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fmt_prec(self, 0, f)
    }
}

/// Precedence levels: 1 additive, 2 multiplicative, 3 unary minus, 4 power.
fn fmt_prec(e: &RadialExpr, parent: u8, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
    use RadialExpr::*;
    let prec = match e {
        Add(..) | Sub(..) => 1,
        Mul(..) | Div(..) => 2,
        Neg(..) => 3,
        Pow(..) => 4,
        _ => 5,
    };
    let need_parens = prec < parent;
    if need_parens {
        write!(f, "(")?;
    }
    match e {
        Level => write!(f, "n")?,
        Const(c) => {
            if *c < 0.0 {
                write!(f, "({c})")?;
            } else {
                write!(f, "{c}")?;
            }
        }
        Neg(a) => {
            write!(f, "-")?;
            fmt_prec(a, 4, f)?;
        }
        Add(a, b) => {
            fmt_prec(a, 1, f)?;
            write!(f, " + ")?;
            fmt_prec(b, 2, f)?;
        }
        Sub(a, b) => {
            fmt_prec(a, 1, f)?;
            write!(f, " - ")?;
            fmt_prec(b, 2, f)?;
        }
        Mul(a, b) => {
            fmt_prec(a, 2, f)?;
            write!(f, " * ")?;
            fmt_prec(b, 3, f)?;
        }
        Div(a, b) => {
            fmt_prec(a, 2, f)?;
            write!(f, " / ")?;
            fmt_prec(b, 3, f)?;
        }
        Pow(a, b) => {
            fmt_prec(a, 5, f)?;
            write!(f, "^")?;
            fmt_prec(b, 4, f)?;
        }
        Log(a) => {
            write!(f, "log(")?;
            fmt_prec(a, 0, f)?;
            write!(f, ")")?;
        }
        Sqrt(a) => {
            write!(f, "sqrt(")?;
            fmt_prec(a, 0, f)?;
            write!(f, ")")?;
        }
        Floor(a) => {
            write!(f, "floor(")?;
            fmt_prec(a, 0, f)?;
            write!(f, ")")?;
        }
        Min(a, b) => {
            write!(f, "min(")?;
            fmt_prec(a, 0, f)?;
            write!(f, ", ")?;
            fmt_prec(b, 0, f)?;
            write!(f, ")")?;
        }
        Max(a, b) => {
            write!(f, "max(")?;
            fmt_prec(a, 0, f)?;
            write!(f, ", ")?;
            fmt_prec(b, 0, f)?;
            write!(f, ")")?;
        }
    }
    if need_parens {
        write!(f, ")")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    LParen,
    RParen,
    Comma,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Parser, ExprError> {
        let mut toks = Vec::new();
        let bytes = src.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let col = i + 1;
            let c = bytes[i];
            match c {
                b' ' | b'\t' | b'\n' | b'\r' => i += 1,
                b'(' => {
                    toks.push((Tok::LParen, col));
                    i += 1;
                }
                b')' => {
                    toks.push((Tok::RParen, col));
                    i += 1;
                }
                b',' => {
                    toks.push((Tok::Comma, col));
                    i += 1;
                }
                b'+' => {
                    toks.push((Tok::Plus, col));
                    i += 1;
                }
                b'-' => {
                    toks.push((Tok::Minus, col));
                    i += 1;
                }
                b'*' => {
                    toks.push((Tok::Star, col));
                    i += 1;
                }
                b'/' => {
                    toks.push((Tok::Slash, col));
                    i += 1;
                }
                b'^' => {
                    toks.push((Tok::Caret, col));
                    i += 1;
                }
                b'0'..=b'9' | b'.' => {
                    let start = i;
                    while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                        i += 1;
                    }
                    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                        let mut j = i + 1;
                        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                            j += 1;
                        }
                        if j < bytes.len() && bytes[j].is_ascii_digit() {
                            i = j;
                            while i < bytes.len() && bytes[i].is_ascii_digit() {
                                i += 1;
                            }
                        }
                    }
                    let text = &src[start..i];
                    let value: f64 = text.parse().map_err(|_| ExprError::Parse {
                        col,
                        message: format!("invalid number literal '{text}'"),
                    })?;
                    toks.push((Tok::Num(value), col));
                }
                b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                    let start = i;
                    while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                    {
                        i += 1;
                    }
                    toks.push((Tok::Ident(src[start..i].to_string()), col));
                }
                _ => {
                    return Err(ExprError::Parse {
                        col,
                        message: format!(
                            "unexpected character '{}'",
                            src[i..].chars().next().unwrap()
                        ),
                    });
                }
            }
        }
        if toks.is_empty() {
            return Err(ExprError::Parse {
                col: 1,
                message: "empty expression".to_string(),
            });
        }
        Ok(Parser { toks, pos: 0 })
    }

    /// Column to blame when input ends unexpectedly: the last token seen.
    fn eof_col(&self) -> usize {
        self.toks.last().map(|(_, c)| *c).unwrap_or(1)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn next_tok(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ExprError> {
        match self.next_tok() {
            Some((t, _)) if t == want => Ok(()),
            Some((t, col)) => Err(ExprError::Parse {
                col,
                message: format!("expected {what}, found {}", describe(&t)),
            }),
            None => Err(ExprError::Parse {
                col: self.eof_col(),
                message: format!("expected {what}, found end of input"),
            }),
        }
    }

    fn parse_all(mut self) -> Result<RadialExpr, ExprError> {
        let e = self.parse_expr()?;
        if let Some((t, col)) = self.next_tok() {
            return Err(ExprError::Parse {
                col,
                message: format!("unexpected trailing {}", describe(&t)),
            });
        }
        Ok(e)
    }

    fn parse_expr(&mut self) -> Result<RadialExpr, ExprError> {
        let mut lhs = self.parse_term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.next_tok();
                    lhs = lhs + self.parse_term()?;
                }
                Some(Tok::Minus) => {
                    self.next_tok();
                    lhs = lhs - self.parse_term()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_term(&mut self) -> Result<RadialExpr, ExprError> {
        let mut lhs = self.parse_unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.next_tok();
                    lhs = lhs * self.parse_unary()?;
                }
                Some(Tok::Slash) => {
                    self.next_tok();
                    lhs = lhs / self.parse_unary()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_unary(&mut self) -> Result<RadialExpr, ExprError> {
        if let Some(Tok::Minus) = self.peek() {
            self.next_tok();
            return Ok(RadialExpr::Neg(Box::new(self.parse_unary()?)));
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<RadialExpr, ExprError> {
        let base = self.parse_atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.next_tok();
            let exp = self.parse_unary()?;
            return Ok(RadialExpr::pow(base, exp));
        }
        Ok(base)
    }

    fn parse_atom(&mut self) -> Result<RadialExpr, ExprError> {
        match self.next_tok() {
            Some((Tok::Num(v), _)) => Ok(RadialExpr::Const(v)),
            Some((Tok::LParen, _)) => {
                let e = self.parse_expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Some((Tok::Ident(name), col)) => match name.as_str() {
                "n" => Ok(RadialExpr::Level),
                "log" | "sqrt" | "floor" => {
                    self.expect(Tok::LParen, "'('")?;
                    let arg = self.parse_expr()?;
                    self.expect(Tok::RParen, "')'")?;
                    Ok(match name.as_str() {
                        "log" => RadialExpr::log(arg),
                        "sqrt" => RadialExpr::sqrt(arg),
                        _ => RadialExpr::floor(arg),
                    })
                }
                "min" | "max" => {
                    self.expect(Tok::LParen, "'('")?;
                    let a = self.parse_expr()?;
                    self.expect(Tok::Comma, "','")?;
                    let b = self.parse_expr()?;
                    self.expect(Tok::RParen, "')'")?;
                    Ok(if name == "min" {
                        RadialExpr::min2(a, b)
                    } else {
                        RadialExpr::max2(a, b)
                    })
                }
                _ => Err(ExprError::Parse {
                    col,
                    message: format!("unknown identifier '{name}'"),
                }),
            },
            Some((t, col)) => Err(ExprError::Parse {
                col,
                message: format!("expected a value, found {}", describe(&t)),
            }),
            None => Err(ExprError::Parse {
                col: self.eof_col(),
                message: "expected a value, found end of input".to_string(),
            }),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number '{v}'"),
        Tok::Ident(s) => format!("identifier '{s}'"),
        Tok::LParen => "'('".to_string(),
        Tok::RParen => "')'".to_string(),
        Tok::Comma => "','".to_string(),
        Tok::Plus => "'+'".to_string(),
        Tok::Minus => "'-'".to_string(),
        Tok::Star => "'*'".to_string(),
        Tok::Slash => "'/'".to_string(),
        Tok::Caret => "'^'".to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, n: u64) -> f64 {
        RadialExpr::parse(src)
            .expect("parse")
            .eval(n)
            .expect("eval")
    }

    #[test]
    fn parses_and_evaluates_basic_forms() {
        assert_eq!(ev("1/(n+1)", 3), 0.25);
        assert_eq!(ev("(log(1+n))^2", 0), 0.0);
        assert!((ev("(log(1+n))^2", 1) - (2f64).ln().powi(2)).abs() < 1e-15);
        assert_eq!(ev("min(1, max(0, n-2))", 2), 0.0);
        assert_eq!(ev("min(1, max(0, n-2))", 3), 1.0);
        assert_eq!(ev("min(1, max(0, n-2))", 9), 1.0);
        // Fractional part of n/2: 0 for even levels, 1/2 for odd.
        assert_eq!(ev("0.5*n - floor(0.5*n)", 6), 0.0);
        assert_eq!(ev("0.5*n - floor(0.5*n)", 7), 0.5);
    }

    #[test]
    fn power_is_right_associative_and_unary_minus_binds_below_it() {
        assert_eq!(ev("2^3^2", 0), 512.0);
        assert_eq!(ev("-2^2", 0), -4.0);
        assert_eq!(ev("2*-3", 0), -6.0);
        assert_eq!(ev("2^-1", 0), 0.5);
    }

    #[test]
    fn unclosed_call_reports_the_opening_column() {
        let err = RadialExpr::parse("log(").unwrap_err();
        match err {
            ExprError::Parse { col, .. } => assert_eq!(col, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
        let err = RadialExpr::parse("1 + foo").unwrap_err();
        match err {
            ExprError::Parse { col, .. } => assert_eq!(col, 5),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn domain_errors_name_the_operation_and_level() {
        let e = RadialExpr::parse("log(n)").expect("parse");
        match e.eval(0) {
            Err(ExprError::Domain { op, level }) => {
                assert_eq!(level, 0);
                assert!(op.contains("log"));
            }
            other => panic!("expected domain error, got {other:?}"),
        }
        let e = RadialExpr::parse("1/n").expect("parse");
        assert!(matches!(e.eval(0), Err(ExprError::Domain { level: 0, .. })));
        assert_eq!(e.eval(4).expect("eval"), 0.25);
    }

    #[test]
    fn pow_edge_cases_follow_declared_semantics() {
        assert_eq!(ev("0^0", 0), 1.0);
        assert_eq!(ev("n^3", 0), 0.0);
        let e = RadialExpr::parse("(0-2)^0.5").expect("parse");
        assert!(matches!(e.eval(1), Err(ExprError::Domain { .. })));
        assert_eq!(ev("(0-2)^3", 1), -8.0);
    }

    #[test]
    fn display_round_trips_through_the_parser() {
        for src in [
            "1/(n+1)",
            "(log(1+n))^2 / log(max(n, 2))",
            "min(1, max(0, n - 1)) / log(max(n, 2))",
            "-n^2 + 3*n - 0.5",
            "sqrt(n) * floor(n/3)",
            "2^-1 + n",
        ] {
            let e = RadialExpr::parse(src).expect("parse");
            let printed = e.to_string();
            let back = RadialExpr::parse(&printed)
                .unwrap_or_else(|err| panic!("reparse of '{printed}' failed: {err}"));
            for n in [0u64, 1, 2, 3, 5, 17, 100] {
                match (e.eval(n), back.eval(n)) {
                    (Ok(a), Ok(b)) => assert_eq!(a.to_bits(), b.to_bits(), "at level {n}: {src}"),
                    (Err(_), Err(_)) => {}
                    other => panic!("eval mismatch for '{src}' at {n}: {other:?}"),
                }
            }
        }
    }

    #[test]
    fn dd_evaluation_agrees_with_f64_at_moderate_levels() {
        for src in [
            "1/(n+1)",
            "log(1+n)",
            "sqrt(n)",
            "n^2/(n^2+1)",
            "(log(max(n,1)))^1.5",
        ] {
            let e = RadialExpr::parse(src).expect("parse");
            for n in [0u64, 1, 7, 100, 4096] {
                let a = e.eval(n).expect("f64 eval");
                let b = e.eval_dd(n).expect("dd eval").to_f64();
                assert!(
                    (a - b).abs() <= 1e-13 * a.abs().max(1.0),
                    "{src} at {n}: f64 {a} vs dd {b}"
                );
            }
        }
    }

    #[test]
    fn dd_evaluation_keeps_differences_accurate_at_ladder_depth() {
        let e = RadialExpr::parse("log(1+n)").expect("parse");
        let n = 1u64 << 50;
        let hi = e.eval_dd(n).expect("dd eval");
        let lo = e.eval_dd(n - 1).expect("dd eval");
        let weighted = (Dd::from_f64(n as f64) * (hi - lo)).to_f64();
        let expected = 1.0 - 0.5 / (n as f64);
        assert!(
            (weighted - expected).abs() < 1e-13,
            "n*D(log(1+n)) at 2^50: {weighted} vs {expected}"
        );
    }

    #[test]
    fn indicator_selects_exactly_at_integer_levels() {
        let ind = RadialExpr::indicator_level_ge(5);
        for n in 0..12u64 {
            let v = ind.eval(n).expect("eval");
            assert_eq!(v, if n >= 5 { 1.0 } else { 0.0 });
        }
        let sel = RadialExpr::select_level_ge(3, RadialExpr::lit(7.0), RadialExpr::Level);
        assert_eq!(sel.eval(2).expect("eval"), 2.0);
        assert_eq!(sel.eval(3).expect("eval"), 7.0);
    }

    #[test]
    fn level_truncation_composes_through_the_expression() {
        let e = RadialExpr::parse("log(1+n) + n^2").expect("parse");
        let t = e.compose_min_level(4);
        for n in 0..10u64 {
            let expect = e.eval(n.min(4)).expect("eval");
            assert_eq!(t.eval(n).expect("eval").to_bits(), expect.to_bits());
        }
    }
}
