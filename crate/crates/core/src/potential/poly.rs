//! Polynomials in (r, tail coordinates) with exact rational coefficients.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, BigRational>,
    float_terms: Vec<(Vec<u32>, f64)>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
            float_terms: Vec::new(),
        }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p.refresh()
    }

    pub fn variable(nvars: usize, index: usize) -> Self {
        let mut e = vec![0; nvars];
        e[index] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, BigRational::one());
        p.refresh()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigRational)> {
        self.terms.iter()
    }

    pub fn is_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                e.iter().all(|&k| k == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    fn add_term(&mut self, e: Vec<u32>, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(BigRational::zero);
        *entry += c;
    }

    fn refresh(mut self) -> Self {
        self.terms.retain(|_, c| !c.is_zero());
        self.float_terms = self
            .terms
            .iter()
            .map(|(e, c)| (e.clone(), c.to_f64().unwrap_or(f64::NAN)))
            .collect();
        self
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out.refresh()
    }

    pub fn scale(&self, k: &BigRational) -> Polynomial {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * k);
        }
        out.refresh()
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out.refresh()
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut out = Self::constant(self.nvars, BigRational::one());
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_derivative(x, &vec![0; self.nvars])
    }

    /// `∂^α p (x)`, exact differentiation followed by floating evaluation.
    pub fn eval_derivative(&self, x: &[f64], alpha: &[u32]) -> f64 {
        let mut acc = 0.0;
        'terms: for (e, c) in &self.float_terms {
            let mut v = *c;
            for i in 0..self.nvars {
                let (ei, ai) = (e[i], alpha[i]);
                if ei < ai {
                    continue 'terms;
                }
                for k in 0..ai {
                    v *= (ei - k) as f64;
                }
                v *= x[i].powi((ei - ai) as i32);
            }
            acc += v;
        }
        acc
    }
}

/// Parse `[V =] expr` over variables `r` and `y<k>`/`y_<k>` with
/// `k ∈ first_tail..first_tail + tail_len`. Decimal literals are read as exact
/// rationals; `/` is allowed only by constants.
pub fn parse_polynomial(text: &str, first_tail: usize, tail_len: usize, line: usize) -> Result<Polynomial> {
    let body = match text.split_once('=') {
        Some((lhs, rhs)) if lhs.trim() == "V" => rhs,
        Some(_) => return Err(perr(line, "expected `V = <expression>`")),
        None => text,
    };
    let tokens = tokenize(body, line)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        nvars: 1 + tail_len,
        first_tail,
        line,
    };
    let poly = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(perr(line, &format!("unexpected token {:?}", p.tokens[p.pos])));
    }
    Ok(poly)
}

fn perr(line: usize, message: &str) -> Error {
    Error::Parse {
        line,
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Op(char),
}

fn tokenize(s: &str, line: usize) -> Result<Vec<Tok>> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let lit: String = chars[start..i].iter().collect();
            out.push(Tok::Num(decimal(&lit).ok_or_else(|| perr(line, &format!("bad number {lit}")))?));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if c == '*' && chars.get(i + 1) == Some(&'*') {
            out.push(Tok::Op('^'));
            i += 2;
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(perr(line, &format!("unexpected character '{c}'")));
        }
    }
    Ok(out)
}

fn decimal(lit: &str) -> Option<BigRational> {
    let (int, frac) = match lit.split_once('.') {
        Some((a, b)) => (a, b),
        None => (lit, ""),
    };
    if frac.contains('.') || (int.is_empty() && frac.is_empty()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let numer: BigInt = digits.parse().ok()?;
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    Some(BigRational::new(numer, denom))
}

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
    nvars: usize,
    first_tail: usize,
    line: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == '+' {
                acc.add(&rhs)
            } else {
                acc.add(&rhs.scale(&-BigRational::one()))
            };
        }
        Ok(acc)
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek(), Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::Op('(')))
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Op('*')) => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                Some(Tok::Op('/')) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    let c = rhs
                        .is_constant()
                        .ok_or_else(|| perr(self.line, "division by a non-constant"))?;
                    if c.is_zero() {
                        return Err(perr(self.line, "division by zero"));
                    }
                    acc = acc.scale(&c.recip());
                }
                // Implicit multiplication, e.g. `4r` or `2(r + 1)`.
                _ if self.starts_atom() => acc = acc.mul(&self.power()?),
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Polynomial> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(self.unary()?.scale(&-BigRational::one()))
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            match self.tokens.get(self.pos).cloned() {
                Some(Tok::Num(k)) if k.is_integer() && !k.is_negative() => {
                    self.pos += 1;
                    let k = k.to_integer().to_u32().ok_or_else(|| perr(self.line, "exponent too large"))?;
                    return Ok(base.pow(k));
                }
                _ => return Err(perr(self.line, "exponent must be a non-negative integer")),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial> {
        let tok = self.peek().cloned().ok_or_else(|| perr(self.line, "unexpected end of expression"))?;
        self.pos += 1;
        match tok {
            Tok::Num(c) => Ok(Polynomial::constant(self.nvars, c)),
            Tok::Ident(name) => self.variable(&name),
            Tok::Op('(') => {
                let inner = self.expr()?;
                if self.peek() != Some(&Tok::Op(')')) {
                    return Err(perr(self.line, "missing ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Tok::Op(c) => Err(perr(self.line, &format!("unexpected '{c}'"))),
        }
    }

    fn variable(&self, name: &str) -> Result<Polynomial> {
        if name == "r" {
            return Ok(Polynomial::variable(self.nvars, 0));
        }
        let index = name
            .strip_prefix('y')
            .map(|s| s.trim_start_matches('_'))
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| perr(self.line, &format!("unknown variable '{name}'")))?;
        let last = self.first_tail + self.nvars - 2;
        if index < self.first_tail || index > last {
            return Err(perr(
                self.line,
                &format!("variable y{index} outside y{}..y{last}", self.first_tail),
            ));
        }
        Ok(Polynomial::variable(self.nvars, 1 + index - self.first_tail))
    }
}
