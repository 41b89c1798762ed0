use num_complex::Complex64 as C;

use super::expr::{Expr, Func};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(C),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == '.' && b.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                let mut j = i + 1;
                if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                    j += 1;
                }
                if j < b.len() && b[j].is_ascii_digit() {
                    while j < b.len() && b[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let v: f64 = text
                .parse()
                .map_err(|_| Error::Syntax { pos: start, msg: format!("bad number `{text}`") })?;
            if !v.is_finite() {
                return Err(Error::Syntax { pos: start, msg: format!("number `{text}` out of range") });
            }
            let imag = i < b.len() && b[i] == b'i' && !b.get(i + 1).is_some_and(|d| d.is_ascii_alphanumeric() || *d == b'_');
            if imag {
                i += 1;
                out.push((Tok::Num(C::new(0.0, v)), start));
            } else {
                out.push((Tok::Num(C::new(v, 0.0)), start));
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
            continue;
        }
        let t = match c {
            '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            _ => return Err(Error::Syntax { pos: i, msg: format!("unexpected character `{c}`") }),
        };
        out.push((t, i));
        i += c.len_utf8();
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(Error::Syntax { pos: self.pos(), msg: format!("expected {what}") })
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Tok::Op(op @ ('+' | '-')) = *self.peek() {
            self.bump();
            let rhs = self.term()?;
            lhs = if op == '+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            }
            .folded();
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Tok::Op(op @ ('*' | '/')) = *self.peek() {
            self.bump();
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            }
            .folded();
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match *self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)).folded())
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let pos = self.pos();
        let e = self.unary()?;
        let n = match e {
            Expr::Const(c) if c.im == 0.0 && c.re.fract() == 0.0 && c.re.abs() <= i32::MAX as f64 => c.re as i32,
            _ => return Err(Error::NonIntegerExponent { pos }),
        };
        Ok(Expr::Pow(Box::new(base), n).folded())
    }

    fn primary(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(c) => Ok(Expr::Const(c)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "x" => Ok(Expr::X),
                "pi" => Ok(Expr::Const(C::new(std::f64::consts::PI, 0.0))),
                "i" => Ok(Expr::Const(C::new(0.0, 1.0))),
                "piecewise" => self.piecewise(pos),
                _ => match Func::from_name(&name) {
                    Some(f) => {
                        self.expect(Tok::LParen, "`(` after function name")?;
                        let a = self.expr()?;
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(Expr::Call(f, Box::new(a)).folded())
                    }
                    None => Err(Error::UnknownIdentifier { name, pos }),
                },
            },
            Tok::End => Err(Error::Syntax { pos, msg: "unexpected end of input".into() }),
            t => Err(Error::Syntax { pos, msg: format!("unexpected token {t:?}") }),
        }
    }

    fn piecewise(&mut self, pos: usize) -> Result<Expr> {
        self.expect(Tok::LParen, "`(` after piecewise")?;
        let mut args = vec![(self.expr()?, pos)];
        while *self.peek() == Tok::Comma {
            self.bump();
            let p = self.pos();
            args.push((self.expr()?, p));
        }
        self.expect(Tok::RParen, "`)`")?;
        if args.len() < 3 || args.len() % 2 == 0 {
            return Err(Error::Syntax { pos, msg: "piecewise needs e0, b1, e1, ... with an odd argument count >= 3".into() });
        }
        let mut pieces = Vec::new();
        let mut breaks: Vec<f64> = Vec::new();
        for (k, (e, p)) in args.into_iter().enumerate() {
            if k % 2 == 0 {
                pieces.push(e);
                continue;
            }
            let b = match e {
                Expr::Const(c) if c.im == 0.0 => c.re,
                _ => return Err(Error::Syntax { pos: p, msg: "breakpoint must be a real constant".into() }),
            };
            if breaks.last().is_some_and(|l| *l >= b) {
                return Err(Error::Syntax { pos: p, msg: "breakpoints must increase strictly".into() });
            }
            breaks.push(b);
        }
        Ok(Expr::Piecewise { pieces, breaks })
    }
}

pub fn parse_expr(src: &str) -> Result<Expr> {
    let mut p = Parser { toks: lex(src)?, at: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(Error::Syntax { pos: p.pos(), msg: "trailing input".into() });
    }
    Ok(e)
}
