//! Time-dependent parameter schedules M(t), w²(t) and the small expression
//! grammar they are written in: numeric constants, `t`, `+ - * /`, `cos`,
//! `sin`, `pow(a,b)` (or `a^b`), parentheses and unary minus.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Time,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Cos(Box<Expr>),
    Sin(Box<Expr>),
}

impl Expr {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Time => t,
            Expr::Neg(e) => -e.eval(t),
            Expr::Add(a, b) => a.eval(t) + b.eval(t),
            Expr::Sub(a, b) => a.eval(t) - b.eval(t),
            Expr::Mul(a, b) => a.eval(t) * b.eval(t),
            Expr::Div(a, b) => a.eval(t) / b.eval(t),
            Expr::Pow(a, b) => a.eval(t).powf(b.eval(t)),
            Expr::Cos(e) => e.eval(t).cos(),
            Expr::Sin(e) => e.eval(t).sin(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
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
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let bytes: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '/' => {
                out.push(Token::Slash);
                i += 1;
            }
            '^' => {
                out.push(Token::Caret);
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            ',' => {
                out.push(Token::Comma);
                i += 1;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_digit()
                        || bytes[i] == '.'
                        || bytes[i] == 'e'
                        || bytes[i] == 'E'
                        || ((bytes[i] == '+' || bytes[i] == '-')
                            && i > start
                            && (bytes[i - 1] == 'e' || bytes[i - 1] == 'E')))
                {
                    i += 1;
                }
                let s: String = bytes[start..i].iter().collect();
                let v: f64 = s
                    .parse()
                    .map_err(|_| Error::ExprParse(format!("bad number `{s}`")))?;
                out.push(Token::Num(v));
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                out.push(Token::Ident(bytes[start..i].iter().collect()));
            }
            other => return Err(Error::ExprParse(format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Token) -> Result<()> {
        match self.next() {
            Some(t) if t == tok => Ok(()),
            other => Err(Error::ExprParse(format!("expected {tok:?}, got {other:?}"))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.next();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Token::Minus) => {
                    self.next();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.next();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(Token::Slash) => {
                    self.next();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    // `^` is right-associative and binds tighter than unary minus, so
    // -a^b parses as -(a^b).
    fn factor(&mut self) -> Result<Expr> {
        if let Some(Token::Minus) = self.peek() {
            self.next();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.primary()?;
        if let Some(Token::Caret) = self.peek() {
            self.next();
            let exp = self.factor()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Token::Num(v)) => Ok(Expr::Const(v)),
            Some(Token::LParen) => {
                let e = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(e)
            }
            Some(Token::Ident(name)) => match name.as_str() {
                "t" => Ok(Expr::Time),
                "cos" | "sin" => {
                    self.expect(Token::LParen)?;
                    let arg = self.expr()?;
                    self.expect(Token::RParen)?;
                    if name == "cos" {
                        Ok(Expr::Cos(Box::new(arg)))
                    } else {
                        Ok(Expr::Sin(Box::new(arg)))
                    }
                }
                "pow" => {
                    self.expect(Token::LParen)?;
                    let a = self.expr()?;
                    self.expect(Token::Comma)?;
                    let b = self.expr()?;
                    self.expect(Token::RParen)?;
                    Ok(Expr::Pow(Box::new(a), Box::new(b)))
                }
                other => Err(Error::ExprParse(format!("unknown identifier `{other}`"))),
            },
            other => Err(Error::ExprParse(format!("unexpected token {other:?}"))),
        }
    }
}

pub fn parse_expr(src: &str) -> Result<Expr> {
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let e = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(Error::ExprParse(format!(
            "trailing input at token {}",
            p.pos
        )));
    }
    Ok(e)
}

/// Periodic schedule of mass M(t) > 0 and squared frequency w²(t), both with
/// period `tau`.
#[derive(Debug, Clone)]
pub struct Schedule {
    mass: Expr,
    freq_sq: Expr,
    pub tau: f64,
}

impl Schedule {
    pub fn new(mass: Expr, freq_sq: Expr, tau: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::Config(format!("tau must be positive, got {tau}")));
        }
        let s = Schedule { mass, freq_sq, tau };
        s.validate()?;
        Ok(s)
    }

    pub fn parse(mass_src: &str, freq_sq_src: &str, tau: f64) -> Result<Self> {
        Self::new(parse_expr(mass_src)?, parse_expr(freq_sq_src)?, tau)
    }

    /// Constant schedule M = 1, w² = w2.
    pub fn constant(w2: f64, tau: f64) -> Result<Self> {
        Self::new(Expr::Const(1.0), Expr::Const(w2), tau)
    }

    pub fn mass(&self, t: f64) -> Result<f64> {
        let m = self.mass.eval(t);
        if !m.is_finite() {
            return Err(Error::ScheduleEval(format!("M({t}) is not finite")));
        }
        if m <= 0.0 {
            return Err(Error::ScheduleEval(format!("M({t}) = {m} is not positive")));
        }
        Ok(m)
    }

    pub fn freq_sq(&self, t: f64) -> Result<f64> {
        let w2 = self.freq_sq.eval(t);
        if !w2.is_finite() {
            return Err(Error::ScheduleEval(format!("w2({t}) is not finite")));
        }
        Ok(w2)
    }

    /// Samples M and w² over [0, 2tau]; checks positivity, finiteness and
    /// tau-periodicity of both to evaluation tolerance.
    fn validate(&self) -> Result<()> {
        let n = 512;
        for i in 0..=n {
            let t = 2.0 * self.tau * i as f64 / n as f64;
            let m = self.mass(t)?;
            let w2 = self.freq_sq(t)?;
            if i <= n / 2 {
                let mp = self.mass(t + self.tau)?;
                let w2p = self.freq_sq(t + self.tau)?;
                let tol = 1e-9;
                if (m - mp).abs() > tol * (1.0 + m.abs()) {
                    return Err(Error::ScheduleEval(format!(
                        "M is not tau-periodic: M({t}) = {m}, M(t+tau) = {mp}"
                    )));
                }
                if (w2 - w2p).abs() > tol * (1.0 + w2.abs()) {
                    return Err(Error::ScheduleEval(format!(
                        "w2 is not tau-periodic: w2({t}) = {w2}, w2(t+tau) = {w2p}"
                    )));
                }
            }
        }
        Ok(())
    }
}
