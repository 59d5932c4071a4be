//! Recursive-descent parser for the expression grammar.
//!
//! Grammar (standard precedence, `^` right-associative and binding tighter
//! than unary minus):
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := unary (('*'|'/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' exponent)?
//! atom   := number | ident | fn '(' expr ')' | '(' expr ')'
//! ```
//!
//! Numbers are integer or decimal literals, stored as exact rationals.
//! Exponents must constant-fold to a rational.

use super::{Expr, Rational};
use crate::{Error, Result};

const FUNCTIONS: [&str; 5] = ["sin", "cos", "exp", "log", "sqrt"];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn next(&mut self) -> Result<(Tok, usize)> {
        self.skip_ws();
        let at = self.pos;
        if self.pos >= self.src.len() {
            return Ok((Tok::End, at));
        }
        let c = self.src[self.pos];
        let tok = match c {
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
            b'0'..=b'9' | b'.' => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let int_end = self.pos;
                let mut frac_digits = 0usize;
                if self.pos < self.src.len() && self.src[self.pos] == b'.' {
                    self.pos += 1;
                    let frac_start = self.pos;
                    while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                    frac_digits = self.pos - frac_start;
                    if int_end == start && frac_digits == 0 {
                        return Err(Error::Syntax {
                            offset: start,
                            msg: "bare `.` is not a number".into(),
                        });
                    }
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let digits: String = text.chars().filter(|c| *c != '.').collect();
                if digits.len() > 18 || frac_digits > 18 {
                    return Err(Error::Syntax {
                        offset: start,
                        msg: format!("numeric literal `{text}` has too many digits"),
                    });
                }
                let numer: i64 = digits.parse().map_err(|_| Error::Syntax {
                    offset: start,
                    msg: format!("bad numeric literal `{text}`"),
                })?;
                let denom = 10i64.pow(frac_digits as u32);
                Tok::Num(Rational::new(numer, denom))
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                Tok::Ident(
                    std::str::from_utf8(&self.src[start..self.pos])
                        .unwrap()
                        .to_string(),
                )
            }
            other => {
                return Err(Error::Syntax {
                    offset: at,
                    msg: format!("unexpected character `{}`", other as char),
                })
            }
        };
        Ok((tok, at))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    cur: Tok,
    cur_at: usize,
    declared: &'a [&'a str],
}

impl<'a> Parser<'a> {
    fn bump(&mut self) -> Result<()> {
        let (tok, at) = self.lexer.next()?;
        self.cur = tok;
        self.cur_at = at;
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            match self.cur {
                Tok::Plus => {
                    self.bump()?;
                    acc = Expr::add(acc, self.term()?);
                }
                Tok::Minus => {
                    self.bump()?;
                    acc = Expr::sub(acc, self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        loop {
            match self.cur {
                Tok::Star => {
                    self.bump()?;
                    acc = Expr::mul(acc, self.unary()?);
                }
                Tok::Slash => {
                    self.bump()?;
                    acc = Expr::div(acc, self.unary()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.cur == Tok::Minus {
            self.bump()?;
            return Ok(Expr::neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.cur == Tok::Caret {
            let caret_at = self.cur_at;
            self.bump()?;
            let exp = self.unary()?; // right-assoc: x^y^z = x^(y^z) via recursion in unary->power
            let r = exp.as_const().ok_or(Error::Syntax {
                offset: caret_at,
                msg: "exponent must be a rational constant".into(),
            })?;
            return Ok(Expr::pow(base, r));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match std::mem::replace(&mut self.cur, Tok::End) {
            Tok::Num(r) => {
                self.bump()?;
                Ok(Expr::Const(r))
            }
            Tok::Ident(name) => {
                self.bump()?;
                if FUNCTIONS.contains(&name.as_str()) {
                    if self.cur != Tok::LParen {
                        return Err(Error::Syntax {
                            offset: self.cur_at,
                            msg: format!("expected `(` after function `{name}`"),
                        });
                    }
                    self.bump()?;
                    let arg = self.expr()?;
                    if self.cur != Tok::RParen {
                        return Err(Error::Syntax {
                            offset: self.cur_at,
                            msg: "expected `)`".into(),
                        });
                    }
                    self.bump()?;
                    return Ok(match name.as_str() {
                        "sin" => Expr::sin(arg),
                        "cos" => Expr::cos(arg),
                        "exp" => Expr::exp(arg),
                        "log" => Expr::log(arg),
                        "sqrt" => Expr::sqrt(arg),
                        _ => unreachable!(),
                    });
                }
                if !self.declared.contains(&name.as_str()) {
                    return Err(Error::UnknownSymbol(name));
                }
                Ok(Expr::sym(&name))
            }
            Tok::LParen => {
                self.bump()?;
                let inner = self.expr()?;
                if self.cur != Tok::RParen {
                    return Err(Error::Syntax {
                        offset: self.cur_at,
                        msg: "expected `)`".into(),
                    });
                }
                self.bump()?;
                Ok(inner)
            }
            Tok::End => Err(Error::Syntax {
                offset: self.cur_at,
                msg: "unexpected end of input".into(),
            }),
            other => Err(Error::Syntax {
                offset: self.cur_at,
                msg: format!("unexpected token {other:?}"),
            }),
        }
    }
}

/// Parse `text` against the set of declared symbols.
pub fn parse_expr(text: &str, declared_symbols: &[&str]) -> Result<Expr> {
    let mut p = Parser {
        lexer: Lexer::new(text),
        cur: Tok::End,
        cur_at: 0,
        declared: declared_symbols,
    };
    p.bump()?;
    let e = p.expr()?;
    if p.cur != Tok::End {
        return Err(Error::Syntax {
            offset: p.cur_at,
            msg: format!("trailing input starting with {:?}", p.cur),
        });
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar_cases() {
        let e = parse_expr("sin(x1)^2 + 3", &["x1"]).unwrap();
        assert_eq!(
            e,
            Expr::add(
                Expr::pow(Expr::sin(Expr::sym("x1")), Rational::from_integer(2)),
                Expr::int(3)
            )
        );
        assert!(parse_expr("1/(1 + r^2)", &["r"]).is_ok());
    }

    #[test]
    fn incomplete_input_reports_offset() {
        match parse_expr("x1 +", &["x1"]) {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_symbol_is_named() {
        match parse_expr("x1 + bogus", &["x1"]) {
            Err(Error::UnknownSymbol(s)) => assert_eq!(s, "bogus"),
            other => panic!("expected unknown symbol, got {other:?}"),
        }
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let e = parse_expr("-x1^2", &["x1"]).unwrap();
        assert_eq!(
            e,
            Expr::neg(Expr::pow(Expr::sym("x1"), Rational::from_integer(2)))
        );
    }

    #[test]
    fn negative_and_fractional_exponents() {
        let e = parse_expr("x1^-2", &["x1"]).unwrap();
        assert_eq!(e, Expr::pow(Expr::sym("x1"), Rational::from_integer(-2)));
        let e = parse_expr("x1^(3/2)", &["x1"]).unwrap();
        assert_eq!(e, Expr::pow(Expr::sym("x1"), Rational::new(3, 2)));
    }

    #[test]
    fn decimal_literals_are_exact_rationals() {
        let e = parse_expr("0.25", &[]).unwrap();
        assert_eq!(e, Expr::Const(Rational::new(1, 4)));
    }
}
