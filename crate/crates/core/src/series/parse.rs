//! Compact polynomial strings such as `x^2+3x`, `1/2 - i x^3` or `(1+2i)x`.

use num_traits::{One, Zero};

use super::TruncatedSeries;
use crate::coeff::{parse_rat, Coeff, Mode, Rat};
use crate::error::{Error, Result};

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    var: &'a str,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Invalid(format!(
            "polynomial `{}` at column {}: {msg}",
            String::from_utf8_lossy(self.s),
            self.pos + 1
        ))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Option<Rat> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_digit() || self.s[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos == start {
            return None;
        }
        let mut text = String::from_utf8_lossy(&self.s[start..self.pos]).into_owned();
        // Optional `/q` denominator.
        let save = self.pos;
        if self.eat(b'/') {
            self.skip_ws();
            let ds = self.pos;
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == ds {
                self.pos = save;
            } else {
                let num = parse_rat(&text)?;
                let den = parse_rat(&String::from_utf8_lossy(&self.s[ds..self.pos]))?;
                if den.is_zero() {
                    return None;
                }
                text.clear();
                return Some(num / den);
            }
        }
        parse_rat(&text)
    }

    /// Real or imaginary rational, e.g. `3`, `1/2`, `2i`, `i`.
    fn scalar(&mut self) -> Result<Option<Coeff>> {
        let n = self.number();
        let imag = self.eat(b'i');
        Ok(match (n, imag) {
            (Some(r), false) => Some(Coeff::exact(r, Rat::zero())),
            (Some(r), true) => Some(Coeff::exact(Rat::zero(), r)),
            (None, true) => Some(Coeff::exact(Rat::zero(), Rat::one())),
            (None, false) => None,
        })
    }

    fn complex_group(&mut self) -> Result<Coeff> {
        // After `(`: signed sum of scalars, then `)`.
        let mut acc = Coeff::zero(Mode::Exact);
        let mut first = true;
        loop {
            let neg = if self.eat(b'-') {
                true
            } else {
                if !self.eat(b'+') && !first {
                    break;
                }
                false
            };
            first = false;
            let c = self.scalar()?.ok_or_else(|| self.err("expected a number"))?;
            acc = if neg { &acc - &c } else { &acc + &c };
        }
        if !self.eat(b')') {
            return Err(self.err("expected `)`"));
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<(usize, Coeff)> {
        let mut coef = Coeff::one(Mode::Exact);
        let mut had_coef = false;
        if self.eat(b'(') {
            coef = self.complex_group()?;
            had_coef = true;
        } else if let Some(c) = self.scalar()? {
            coef = c;
            had_coef = true;
        }
        self.eat(b'*');
        self.skip_ws();
        let mut exp = 0;
        if self.s[self.pos..].starts_with(self.var.as_bytes()) {
            self.pos += self.var.len();
            exp = 1;
            if self.eat(b'^') {
                self.skip_ws();
                let start = self.pos;
                while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                exp = std::str::from_utf8(&self.s[start..self.pos])
                    .ok()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| self.err("expected an integer exponent"))?;
            }
        } else if !had_coef {
            return Err(self.err("expected a coefficient or the variable"));
        }
        Ok((exp, coef))
    }
}

/// Parses a polynomial in `var` with exact complex-rational coefficients.
///
/// The result is truncated at `max(trunc, degree)`.
pub fn parse_polynomial(text: &str, var: &str, trunc: usize) -> Result<TruncatedSeries> {
    let mut p = Parser { s: text.as_bytes(), pos: 0, var };
    let mut terms: Vec<(usize, Coeff)> = Vec::new();
    let mut first = true;
    loop {
        if p.peek().is_none() {
            if first {
                return Err(p.err("empty polynomial"));
            }
            break;
        }
        let neg = if p.eat(b'-') {
            true
        } else {
            if !p.eat(b'+') && !first {
                return Err(p.err("expected `+` or `-`"));
            }
            false
        };
        first = false;
        let (e, c) = p.term()?;
        terms.push((e, if neg { -c } else { c }));
    }
    let deg = terms.iter().map(|(e, _)| *e).max().unwrap_or(0);
    let mut s = TruncatedSeries::zeros(&[var], &[trunc.max(deg)], Mode::Exact);
    for (e, c) in terms {
        let cur = s.at(&[e]);
        s.set(&[e], &cur + &c);
    }
    Ok(s)
}
