//! Infix parser: `+ - * / ^`, integer and decimal literals, identifiers,
//! and the functions `exp tanh erf E1 sqrt log pow`.

use num_bigint::BigInt;
use thiserror::Error;

use super::{Expr, ExprError, Rat};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown function `{name}` at {pos}")]
    UnknownFunction { pos: usize, name: String },
    #[error("at {pos}: {source}")]
    Expr { pos: usize, source: ExprError },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rat),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Result<(usize, Tok), ParseError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = self.src.get(self.pos) else {
            return Ok((start, Tok::End));
        };
        let tok = match c {
            b'0'..=b'9' | b'.' => {
                let mut end = self.pos;
                while end < self.src.len() && self.src[end].is_ascii_digit() {
                    end += 1;
                }
                let int_part = &self.src[self.pos..end];
                let mut frac_part: &[u8] = &[];
                if end < self.src.len() && self.src[end] == b'.' {
                    let fs = end + 1;
                    end = fs;
                    while end < self.src.len() && self.src[end].is_ascii_digit() {
                        end += 1;
                    }
                    frac_part = &self.src[fs..end];
                }
                if int_part.is_empty() && frac_part.is_empty() {
                    return Err(ParseError::Syntax {
                        pos: start,
                        message: "malformed number".into(),
                    });
                }
                self.pos = end;
                let digits: String = int_part
                    .iter()
                    .chain(frac_part.iter())
                    .map(|&b| b as char)
                    .collect();
                let n: BigInt = digits.parse().unwrap_or_default();
                let d = BigInt::from(10u32).pow(frac_part.len() as u32);
                Tok::Num(Rat::new(n, d))
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let mut end = self.pos;
                while end < self.src.len()
                    && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
                {
                    end += 1;
                }
                while end < self.src.len() && self.src[end] == b'\'' {
                    end += 1;
                }
                let s = std::str::from_utf8(&self.src[self.pos..end])
                    .unwrap()
                    .to_string();
                self.pos = end;
                Tok::Ident(s)
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                self.pos += 1;
                Tok::Op(c as char)
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
            _ => {
                return Err(ParseError::Syntax {
                    pos: start,
                    message: format!("unexpected character `{}`", c as char),
                })
            }
        };
        Ok((start, tok))
    }
}

struct Parser<'a> {
    lex: Lexer<'a>,
    peek: (usize, Tok),
}

const PREFIX_NEG_BP: u8 = 25;

fn infix_bp(op: char) -> Option<(u8, u8)> {
    match op {
        '+' | '-' => Some((10, 11)),
        '*' | '/' => Some((20, 21)),
        '^' => Some((31, 30)),
        _ => None,
    }
}

impl<'a> Parser<'a> {
    fn bump(&mut self) -> Result<(usize, Tok), ParseError> {
        let next = self.lex.next()?;
        Ok(std::mem::replace(&mut self.peek, next))
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        let (pos, t) = self.bump()?;
        if t == want {
            Ok(())
        } else {
            Err(ParseError::Syntax {
                pos,
                message: format!("expected {what}"),
            })
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Expr, ParseError> {
        let (pos, tok) = self.bump()?;
        let mut lhs = match tok {
            Tok::Num(r) => Expr::constant(r),
            Tok::Op('-') => {
                let e = self.expr(PREFIX_NEG_BP)?;
                -e
            }
            Tok::Op('+') => self.expr(PREFIX_NEG_BP)?,
            Tok::LParen => {
                let e = self.expr(0)?;
                self.expect(Tok::RParen, "`)`")?;
                e
            }
            Tok::Ident(name) => {
                if self.peek.1 == Tok::LParen {
                    self.bump()?;
                    let mut args = vec![self.expr(0)?];
                    while self.peek.1 == Tok::Comma {
                        self.bump()?;
                        args.push(self.expr(0)?);
                    }
                    self.expect(Tok::RParen, "`)` after arguments")?;
                    apply(&name, args, pos)?
                } else {
                    Expr::sym(&name)
                }
            }
            _ => {
                return Err(ParseError::Syntax {
                    pos,
                    message: "expected an expression".into(),
                })
            }
        };
        loop {
            let (pos, op) = match &self.peek {
                (p, Tok::Op(c)) => (*p, *c),
                _ => break,
            };
            let (l_bp, r_bp) = infix_bp(op).unwrap();
            if l_bp < min_bp {
                break;
            }
            self.bump()?;
            let rhs = self.expr(r_bp)?;
            let wrap = |e: ExprError| ParseError::Expr { pos, source: e };
            lhs = match op {
                '+' => lhs + rhs,
                '-' => lhs - rhs,
                '*' => lhs * rhs,
                '/' => lhs.checked_div(&rhs).map_err(wrap)?,
                '^' => Expr::pow(lhs, rhs).map_err(wrap)?,
                _ => unreachable!(),
            };
        }
        Ok(lhs)
    }
}

fn apply(name: &str, mut args: Vec<Expr>, pos: usize) -> Result<Expr, ParseError> {
    let arity = match name {
        "pow" => 2,
        "exp" | "tanh" | "erf" | "E1" | "sqrt" | "log" => 1,
        _ => {
            return Err(ParseError::UnknownFunction {
                pos,
                name: name.to_string(),
            })
        }
    };
    if args.len() != arity {
        return Err(ParseError::Syntax {
            pos,
            message: format!("`{name}` takes {arity} argument(s), got {}", args.len()),
        });
    }
    let wrap = |e: ExprError| ParseError::Expr { pos, source: e };
    let a = args.remove(0);
    Ok(match name {
        "exp" => Expr::exp(a),
        "tanh" => Expr::tanh(a),
        "erf" => Expr::erf(a),
        "E1" => Expr::e1(a),
        "sqrt" => Expr::sqrt(a).map_err(wrap)?,
        "log" => Expr::log(a).map_err(wrap)?,
        "pow" => Expr::pow(a, args.remove(0)).map_err(wrap)?,
        _ => unreachable!(),
    })
}

/// Parses infix text into a canonical expression.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut lex = Lexer {
        src: text.as_bytes(),
        pos: 0,
    };
    let first = lex.next()?;
    let mut p = Parser { lex, peek: first };
    let e = p.expr(0)?;
    match &p.peek {
        (_, Tok::End) => Ok(e),
        (pos, _) => Err(ParseError::Syntax {
            pos: *pos,
            message: "trailing input".into(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_term_canonical_form() {
        let e = parse("9*u2*u1/u - 12*u1^3/u^2").unwrap();
        assert_eq!(e.numer().len(), 2);
        assert_eq!(e, parse("(9*u*u1*u2 - 12*u1^3)/u^2").unwrap());
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(parse("-x^2").unwrap(), parse("-(x^2)").unwrap());
        assert_eq!(parse("2^3^2").unwrap(), parse("512").unwrap());
        assert_eq!(parse("8/4/2").unwrap(), parse("1").unwrap());
        assert_eq!(parse("1.25").unwrap(), parse("5/4").unwrap());
        assert_eq!(parse("x^-2").unwrap(), parse("1/x^2").unwrap());
    }

    #[test]
    fn primed_identifiers_and_u0_alias() {
        let e = parse("phi2' + u0").unwrap();
        assert!(e.free_symbols().contains("phi2'"));
        assert!(e.free_symbols().contains("u"));
    }

    #[test]
    fn errors_carry_positions() {
        match parse("x + * y") {
            Err(ParseError::Syntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        match parse("sinh(x)") {
            Err(ParseError::UnknownFunction { pos, name }) => {
                assert_eq!(pos, 0);
                assert_eq!(name, "sinh");
            }
            other => panic!("{other:?}"),
        }
        assert!(parse("(x").is_err());
        assert!(parse("x y").is_err());
    }

    #[test]
    fn half_integer_powers_become_radicals() {
        let e = parse("(x+g)^(3/2)").unwrap();
        assert_eq!(e, parse("(x+g)*sqrt(x+g)").unwrap());
    }
}
