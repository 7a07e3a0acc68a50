//! Text grammar for ladder polynomials.
//!
//! ```text
//! poly   := [sign] term (sign term)*
//! term   := coeff factor* | factor+
//! coeff  := real | "(" real "," real ")"
//! factor := ("a" | "c") ["*"] "(" mode ")"      mode is 1-based
//! ```
//!
//! Whitespace is ignored. A bare coefficient is a multiple of the identity.

use std::fmt;

use num_complex::Complex64;

use crate::error::{QfError, Result};
use crate::fock::{Ladder, Statistics};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Factor {
    pub op: Ladder,
    pub statistics: Statistics,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: Complex64,
    pub factors: Vec<Factor>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct LadderPolynomial {
    pub terms: Vec<Term>,
}

impl Term {
    pub fn ladders(&self) -> Vec<Ladder> {
        self.factors.iter().map(|f| f.op).collect()
    }
}

impl LadderPolynomial {
    pub fn monomial(ops: &[Ladder], statistics: Statistics) -> Self {
        LadderPolynomial {
            terms: vec![Term {
                coeff: Complex64::new(1.0, 0.0),
                factors: ops.iter().map(|&op| Factor { op, statistics }).collect(),
            }],
        }
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|t| t.factors.len()).max().unwrap_or(0)
    }

    /// Highest mode index used (0-based), if any.
    pub fn max_mode(&self) -> Option<usize> {
        self.terms.iter().flat_map(|t| t.factors.iter().map(|f| f.op.mode)).max()
    }

    /// `P*`: conjugated coefficients, reversed and adjoined factors.
    pub fn adjoint(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                coeff: t.coeff.conj(),
                factors: t.factors.iter().rev().map(|f| Factor { op: f.op.adjoint(), statistics: f.statistics }).collect(),
            })
            .collect();
        LadderPolynomial { terms }
    }

    /// Statistics of the letters used, or an error if `a` and `c` are mixed.
    pub fn statistics(&self) -> Result<Option<Statistics>> {
        let mut found = None;
        for f in self.terms.iter().flat_map(|t| &t.factors) {
            match found {
                None => found = Some(f.statistics),
                Some(s) if s != f.statistics => {
                    return Err(QfError::SpeciesMismatch("polynomial mixes a and c operators".into()))
                }
                _ => {}
            }
        }
        Ok(found)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(QfError::Parse { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, ch: u8) -> Result<()> {
        if self.peek() == Some(ch) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected '{}'", ch as char))
        }
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
            self.pos += 1;
        }
        while let Some(&ch) = self.src.get(self.pos) {
            let exp_sign = matches!(ch, b'+' | b'-')
                && self.pos > start + 1
                && matches!(self.src[self.pos - 1], b'e' | b'E');
            if ch.is_ascii_digit() || ch == b'.' || ch == b'e' || ch == b'E' || exp_sign {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        match text.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => {
                self.pos = start;
                self.err(format!("invalid number '{text}'"))
            }
        }
    }

    fn coeff(&mut self) -> Result<Option<Complex64>> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let re = self.number()?;
                self.expect(b',')?;
                let im = self.number()?;
                self.expect(b')')?;
                Ok(Some(Complex64::new(re, im)))
            }
            Some(ch) if ch.is_ascii_digit() || ch == b'.' => Ok(Some(Complex64::new(self.number()?, 0.0))),
            _ => Ok(None),
        }
    }

    fn factor(&mut self) -> Result<Option<Factor>> {
        let statistics = match self.peek() {
            Some(b'a') => Statistics::Boson,
            Some(b'c') => Statistics::Fermion,
            _ => return Ok(None),
        };
        self.pos += 1;
        let dagger = if self.peek() == Some(b'*') {
            self.pos += 1;
            true
        } else {
            false
        };
        self.expect(b'(')?;
        self.skip_ws();
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let mode: usize = match std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("").parse() {
            Ok(k) if k >= 1 => k,
            _ => {
                self.pos = start;
                return self.err("mode index must be a positive integer");
            }
        };
        self.expect(b')')?;
        Ok(Some(Factor { op: Ladder { mode: mode - 1, dagger }, statistics }))
    }

    fn term(&mut self, sign: f64) -> Result<Term> {
        let coeff = self.coeff()?;
        let mut factors = Vec::new();
        while let Some(f) = self.factor()? {
            factors.push(f);
        }
        if coeff.is_none() && factors.is_empty() {
            return self.err("expected a coefficient or a ladder operator");
        }
        Ok(Term { coeff: coeff.unwrap_or(Complex64::new(1.0, 0.0)) * sign, factors })
    }
}

pub fn parse(text: &str) -> Result<LadderPolynomial> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let mut terms = Vec::new();
    let mut sign = match p.peek() {
        Some(b'-') => {
            p.pos += 1;
            -1.0
        }
        Some(b'+') => {
            p.pos += 1;
            1.0
        }
        _ => 1.0,
    };
    loop {
        terms.push(p.term(sign)?);
        match p.peek() {
            None => break,
            Some(b'+') => sign = 1.0,
            Some(b'-') => sign = -1.0,
            Some(_) => return p.err("expected '+', '-' or end of input"),
        }
        p.pos += 1;
    }
    Ok(LadderPolynomial { terms })
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letter = match self.statistics {
            Statistics::Boson => 'a',
            Statistics::Fermion => 'c',
        };
        let star = if self.op.dagger { "*" } else { "" };
        write!(f, "{letter}{star}({})", self.op.mode + 1)
    }
}

fn write_coeff(f: &mut fmt::Formatter<'_>, z: Complex64, bare: bool) -> fmt::Result {
    if z.im != 0.0 {
        write!(f, "({},{})", z.re, z.im)
    } else if z.re == 1.0 && !bare {
        Ok(())
    } else {
        write!(f, "{}", z.re)
    }
}

impl fmt::Display for LadderPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            let mut z = t.coeff;
            let negative = z.im == 0.0 && z.re.is_sign_negative();
            if negative {
                z = -z;
            }
            match (i, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            write_coeff(f, z, t.factors.is_empty())?;
            let mut first = z.im == 0.0 && z.re == 1.0;
            for fac in &t.factors {
                if !first {
                    write!(f, " ")?;
                }
                write!(f, "{fac}")?;
                first = false;
            }
        }
        Ok(())
    }
}
