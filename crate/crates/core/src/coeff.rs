//! Scalar coefficients: exact complex rationals or complex doubles.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Exact rational number.
pub type Rat = BigRational;

/// Arithmetic mode of a coefficient or series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

impl Mode {
    /// Mode of a binary result: exact only if both operands are.
    pub fn join(self, other: Mode) -> Mode {
        if self == Mode::Exact && other == Mode::Exact {
            Mode::Exact
        } else {
            Mode::Float
        }
    }
}

/// A complex coefficient, exact (`re + i im` over Q) or floating.
///
/// Binary operations between an exact and a float operand promote to float.
#[derive(Clone, Debug, PartialEq)]
pub enum Coeff {
    Exact { re: Rat, im: Rat },
    Float(Complex64),
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

fn rat_to_f64(r: &Rat) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Scale so the integer quotient carries about 64 significant bits.
    let e = r.numer().bits() as i64 - r.denom().bits() as i64;
    let s = 64 - e;
    let n = r.numer().abs();
    let q = if s >= 0 {
        (n << s as usize) / r.denom()
    } else {
        n / (r.denom() << (-s) as usize)
    };
    let v = q.to_f64().unwrap_or(f64::INFINITY) * 2f64.powi(-s as i32);
    if r.is_negative() {
        -v
    } else {
        v
    }
}

impl Coeff {
    pub fn zero(mode: Mode) -> Coeff {
        match mode {
            Mode::Exact => Coeff::Exact { re: Rat::zero(), im: Rat::zero() },
            Mode::Float => Coeff::Float(Complex64::new(0.0, 0.0)),
        }
    }

    pub fn one(mode: Mode) -> Coeff {
        Coeff::from_int(1, mode)
    }

    pub fn from_int(n: i64, mode: Mode) -> Coeff {
        match mode {
            Mode::Exact => Coeff::Exact { re: rat_int(n), im: Rat::zero() },
            Mode::Float => Coeff::Float(Complex64::new(n as f64, 0.0)),
        }
    }

    pub fn from_rat(r: Rat, mode: Mode) -> Coeff {
        Coeff::Exact { re: r, im: Rat::zero() }.to_mode(mode)
    }

    pub fn exact(re: Rat, im: Rat) -> Coeff {
        Coeff::Exact { re, im }
    }

    pub fn ratio(n: i64, d: i64) -> Coeff {
        Coeff::Exact { re: rat(n, d), im: Rat::zero() }
    }

    pub fn float(re: f64, im: f64) -> Coeff {
        Coeff::Float(Complex64::new(re, im))
    }

    pub fn from_c64(z: Complex64) -> Coeff {
        Coeff::Float(z)
    }

    pub fn mode(&self) -> Mode {
        match self {
            Coeff::Exact { .. } => Mode::Exact,
            Coeff::Float(_) => Mode::Float,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coeff::Exact { re, im } => re.is_zero() && im.is_zero(),
            Coeff::Float(z) => z.re == 0.0 && z.im == 0.0,
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        match self {
            Coeff::Exact { re, im } => Complex64::new(rat_to_f64(re), rat_to_f64(im)),
            Coeff::Float(z) => *z,
        }
    }

    /// Converts to `mode`. Float to exact is not representable and keeps the float.
    pub fn to_mode(self, mode: Mode) -> Coeff {
        match (mode, &self) {
            (Mode::Float, Coeff::Exact { .. }) => Coeff::Float(self.to_c64()),
            _ => self,
        }
    }

    pub fn abs(&self) -> f64 {
        self.to_c64().norm()
    }

    /// Real part when the coefficient is exactly real.
    pub fn as_real_rat(&self) -> Option<&Rat> {
        match self {
            Coeff::Exact { re, im } if im.is_zero() => Some(re),
            _ => None,
        }
    }

    /// Positive integer value, if exactly one (used for resonance tests).
    pub fn as_positive_integer(&self) -> Option<u64> {
        match self {
            Coeff::Exact { re, im } if im.is_zero() && re.is_integer() && re.is_positive() => {
                re.to_integer().to_u64()
            }
            Coeff::Float(z) => {
                let r = z.re.round();
                if z.im.abs() < 1e-12 && (z.re - r).abs() < 1e-12 && r >= 1.0 {
                    Some(r as u64)
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn scale_int(&self, n: i64) -> Coeff {
        self * &Coeff::from_int(n, self.mode())
    }

    pub fn powi(&self, n: u32) -> Coeff {
        let mut acc = Coeff::one(self.mode());
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Division that reports an exact zero divisor instead of panicking.
    pub fn checked_div(&self, rhs: &Coeff) -> Option<Coeff> {
        if rhs.is_zero() && rhs.mode() == Mode::Exact {
            return None;
        }
        Some(div_impl(self, rhs))
    }

    /// Reciprocal; `None` for an exact zero.
    pub fn recip(&self) -> Option<Coeff> {
        Coeff::one(self.mode()).checked_div(self)
    }
}

fn div_impl(a: &Coeff, b: &Coeff) -> Coeff {
    match (a, b) {
        (Coeff::Exact { re: ar, im: ai }, Coeff::Exact { re: br, im: bi }) => {
            let den = br * br + bi * bi;
            let re = (ar * br + ai * bi) / &den;
            let im = (ai * br - ar * bi) / &den;
            Coeff::Exact { re, im }
        }
        _ => Coeff::Float(a.to_c64() / b.to_c64()),
    }
}

impl<'a> Add<&'a Coeff> for &'a Coeff {
    type Output = Coeff;
    fn add(self, rhs: &Coeff) -> Coeff {
        match (self, rhs) {
            (Coeff::Exact { re: a, im: b }, Coeff::Exact { re: c, im: d }) => {
                Coeff::Exact { re: a + c, im: b + d }
            }
            _ => Coeff::Float(self.to_c64() + rhs.to_c64()),
        }
    }
}

impl<'a> Sub<&'a Coeff> for &'a Coeff {
    type Output = Coeff;
    fn sub(self, rhs: &Coeff) -> Coeff {
        match (self, rhs) {
            (Coeff::Exact { re: a, im: b }, Coeff::Exact { re: c, im: d }) => {
                Coeff::Exact { re: a - c, im: b - d }
            }
            _ => Coeff::Float(self.to_c64() - rhs.to_c64()),
        }
    }
}

impl<'a> Mul<&'a Coeff> for &'a Coeff {
    type Output = Coeff;
    fn mul(self, rhs: &Coeff) -> Coeff {
        match (self, rhs) {
            (Coeff::Exact { re: a, im: b }, Coeff::Exact { re: c, im: d }) => {
                if b.is_zero() && d.is_zero() {
                    Coeff::Exact { re: a * c, im: Rat::zero() }
                } else {
                    Coeff::Exact { re: a * c - b * d, im: a * d + b * c }
                }
            }
            _ => Coeff::Float(self.to_c64() * rhs.to_c64()),
        }
    }
}

/// Panics on an exact zero divisor; use [`Coeff::checked_div`] when that can happen.
impl<'a> Div<&'a Coeff> for &'a Coeff {
    type Output = Coeff;
    fn div(self, rhs: &Coeff) -> Coeff {
        self.checked_div(rhs).expect("exact division by zero")
    }
}

impl Neg for &Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        match self {
            Coeff::Exact { re, im } => Coeff::Exact { re: -re, im: -im },
            Coeff::Float(z) => Coeff::Float(-z),
        }
    }
}

impl Neg for Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        -&self
    }
}

macro_rules! owned_binop {
    ($tr:ident, $f:ident) => {
        impl $tr<Coeff> for Coeff {
            type Output = Coeff;
            fn $f(self, rhs: Coeff) -> Coeff {
                (&self).$f(&rhs)
            }
        }
        impl<'a> $tr<&'a Coeff> for Coeff {
            type Output = Coeff;
            fn $f(self, rhs: &Coeff) -> Coeff {
                (&self).$f(rhs)
            }
        }
    };
}
owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);
owned_binop!(Div, div);

impl AddAssign<&Coeff> for Coeff {
    fn add_assign(&mut self, rhs: &Coeff) {
        match (&mut *self, rhs) {
            (Coeff::Exact { re: a, im: b }, Coeff::Exact { re: c, im: d }) => {
                *a += c;
                if !d.is_zero() {
                    *b += d;
                }
            }
            (Coeff::Float(z), _) => *z += rhs.to_c64(),
            _ => *self = Coeff::Float(self.to_c64() + rhs.to_c64()),
        }
    }
}

impl SubAssign<&Coeff> for Coeff {
    fn sub_assign(&mut self, rhs: &Coeff) {
        *self += &(-rhs);
    }
}

impl MulAssign<&Coeff> for Coeff {
    fn mul_assign(&mut self, rhs: &Coeff) {
        *self = &*self * rhs;
    }
}

/// Formats a rational as `p/q`, always with a denominator.
pub fn fmt_rat(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p`, `p/q` or a decimal literal such as `-1.25` exactly.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(Rat::new(p, q));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        if fp.chars().all(|c| c.is_ascii_digit()) {
            let neg = ip.starts_with('-');
            let digits = format!("{}{}", ip.trim_start_matches(['-', '+']), fp);
            let n: BigInt = if digits.is_empty() { return None } else { digits.parse().ok()? };
            let d = num_traits::pow(BigInt::from(10), fp.len());
            let r = Rat::new(n, d);
            return Some(if neg { -r } else { r });
        }
        return None;
    }
    let n: BigInt = s.parse().ok()?;
    Some(Rat::from_integer(n))
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coeff::Exact { re, im } if im.is_zero() => write!(f, "{}", fmt_rat(re)),
            Coeff::Exact { re, im } if im.is_negative() => write!(f, "{}-{}i", fmt_rat(re), fmt_rat(&-im)),
            Coeff::Exact { re, im } => write!(f, "{}+{}i", fmt_rat(re), fmt_rat(im)),
            Coeff::Float(z) if z.im.is_sign_negative() => write!(f, "{}-{}i", z.re, -z.im),
            Coeff::Float(z) => write!(f, "{}+{}i", z.re, z.im),
        }
    }
}

impl Serialize for Coeff {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeTuple;
        let mut t = s.serialize_tuple(2)?;
        match self {
            Coeff::Exact { re, im } => {
                t.serialize_element(&fmt_rat(re))?;
                t.serialize_element(&fmt_rat(im))?;
            }
            Coeff::Float(z) => {
                t.serialize_element(&z.re)?;
                t.serialize_element(&z.im)?;
            }
        }
        t.end()
    }
}

fn part_from_json(v: &serde_json::Value) -> Result<Coeff, String> {
    match v {
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Coeff::from_int(i, Mode::Exact))
            } else {
                Ok(Coeff::float(n.as_f64().ok_or("bad number")?, 0.0))
            }
        }
        serde_json::Value::String(s) => parse_rat(s)
            .map(|r| Coeff::from_rat(r, Mode::Exact))
            .ok_or_else(|| format!("invalid rational literal `{s}`")),
        _ => Err("coefficient must be a number, a rational string or [re, im]".into()),
    }
}

impl Coeff {
    /// Reads a number, a `"p/q"` string or a `[re, im]` pair.
    pub fn from_json(v: &serde_json::Value) -> Result<Coeff, String> {
        match v {
            serde_json::Value::Array(a) if a.len() == 2 => {
                let re = part_from_json(&a[0])?;
                let im = part_from_json(&a[1])?;
                let i = Coeff::exact(Rat::zero(), Rat::one());
                Ok(&re + &(&im * &i))
            }
            _ => part_from_json(v),
        }
    }
}

impl<'de> Deserialize<'de> for Coeff {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        Coeff::from_json(&v).map_err(D::Error::custom)
    }
}
