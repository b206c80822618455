//! Tiny expression grammar for command-line polynomial input:
//! variables by name, rational literals `p/q`, `+ - * ^` and parentheses.

use num::rational::BigRational;
use num::BigInt;

use crate::error::{Error, Result};
use crate::poly::{Coeff, Poly};

/// Variable table: name -> index; `nvars` fixes the exponent length.
pub struct VarTable {
    pub names: Vec<String>,
}

impl VarTable {
    /// (t, x1..xn) for the real tier.
    pub fn real(n: usize) -> Self {
        let mut names = vec!["t".to_string()];
        for i in 1..=n {
            names.push(format!("x{i}"));
        }
        VarTable { names }
    }

    /// (x1..xn), spatial only.
    pub fn spatial(n: usize) -> Self {
        VarTable {
            names: (1..=n).map(|i| format!("x{i}")).collect(),
        }
    }

    /// (z, zbar, w, wbar) for the complex tier.
    pub fn complex() -> Self {
        VarTable {
            names: ["z", "zbar", "w", "wbar"].iter().map(|s| s.to_string()).collect(),
        }
    }

    fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(BigRational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    End,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0 }
    }

    fn next_token(&mut self) -> Result<Token> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= self.src.len() {
            return Ok(Token::End);
        }
        let c = self.src[self.pos];
        self.pos += 1;
        match c {
            b'+' => Ok(Token::Plus),
            b'-' => Ok(Token::Minus),
            b'*' => Ok(Token::Star),
            b'^' => Ok(Token::Caret),
            b'(' => Ok(Token::LParen),
            b')' => Ok(Token::RParen),
            b'0'..=b'9' => {
                let start = self.pos - 1;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let num: BigInt = std::str::from_utf8(&self.src[start..self.pos])
                    .unwrap()
                    .parse()
                    .map_err(|e| Error::Parse(format!("bad integer: {e}")))?;
                // optional /q
                let mut den = BigInt::from(1);
                let save = self.pos;
                if self.pos < self.src.len() && self.src[self.pos] == b'/' {
                    self.pos += 1;
                    let dstart = self.pos;
                    while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                    if dstart == self.pos {
                        self.pos = save; // not a fraction
                    } else {
                        den = std::str::from_utf8(&self.src[dstart..self.pos])
                            .unwrap()
                            .parse()
                            .map_err(|e| Error::Parse(format!("bad denominator: {e}")))?;
                        if den == BigInt::from(0) {
                            return Err(Error::Parse("zero denominator".into()));
                        }
                    }
                }
                Ok(Token::Num(BigRational::new(num, den)))
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos - 1;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                Ok(Token::Ident(
                    std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string(),
                ))
            }
            c => Err(Error::Parse(format!("unexpected character '{}'", c as char))),
        }
    }
}

struct Parser<'a, C: Coeff> {
    tokens: Vec<Token>,
    pos: usize,
    vars: &'a VarTable,
    _marker: std::marker::PhantomData<C>,
}

impl<'a, C: Coeff> Parser<'a, C> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        self.pos += 1;
        t
    }

    fn nvars(&self) -> usize {
        self.vars.names.len()
    }

    fn expr(&mut self) -> Result<Poly<C>> {
        let mut acc = if *self.peek() == Token::Minus {
            self.bump();
            self.term()?.neg()
        } else {
            if *self.peek() == Token::Plus {
                self.bump();
            }
            self.term()?
        };
        loop {
            match self.peek() {
                Token::Plus => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Token::Minus => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly<C>> {
        let mut acc = self.factor()?;
        while *self.peek() == Token::Star {
            self.bump();
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Poly<C>> {
        let base = self.atom()?;
        if *self.peek() == Token::Caret {
            self.bump();
            match self.bump() {
                Token::Num(r) if r.is_integer() && r >= BigRational::from_integer(0.into()) => {
                    use num_traits::ToPrimitive;
                    let e = r.to_integer().to_u32().ok_or_else(|| {
                        Error::Parse("exponent too large".into())
                    })?;
                    Ok(base.pow(e))
                }
                t => Err(Error::Parse(format!("expected nonnegative integer exponent, got {t:?}"))),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Poly<C>> {
        match self.bump() {
            Token::Num(r) => Ok(Poly::constant(self.nvars(), C::from_rational(&r))),
            Token::Ident(name) => {
                let idx = self.vars.index(&name).ok_or_else(|| {
                    Error::Parse(format!(
                        "unknown variable '{name}' (expected one of {:?})",
                        self.vars.names
                    ))
                })?;
                Ok(Poly::var(self.nvars(), idx))
            }
            Token::LParen => {
                let inner = self.expr()?;
                match self.bump() {
                    Token::RParen => Ok(inner),
                    t => Err(Error::Parse(format!("expected ')', got {t:?}"))),
                }
            }
            Token::Minus => Ok(self.atom()?.neg()),
            t => Err(Error::Parse(format!("unexpected token {t:?}"))),
        }
    }
}

/// Parse an expression into a polynomial over the given variable table.
pub fn parse_poly<C: Coeff>(src: &str, vars: &VarTable) -> Result<Poly<C>> {
    let mut lexer = Lexer::new(src);
    let mut tokens = Vec::new();
    loop {
        let t = lexer.next_token()?;
        let end = t == Token::End;
        tokens.push(t);
        if end {
            break;
        }
    }
    let mut parser = Parser::<C> {
        tokens,
        pos: 0,
        vars,
        _marker: std::marker::PhantomData,
    };
    let p = parser.expr()?;
    if *parser.peek() != Token::End {
        return Err(Error::Parse(format!("trailing input at token {:?}", parser.peek())));
    }
    Ok(p)
}
