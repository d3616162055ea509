//! Truncated multivariate power series with dense coefficient storage.
//!
//! A series carries one truncation order per variable (inclusive maximum
//! exponent). Binary operations act on the intersection of the two boxes, so
//! every stored coefficient is exactly known.

mod borel;
mod json;
mod logseries;
mod parse;

pub use borel::{gamma_ratio_kernel, BorelKernel, RamifyDirection};
pub use logseries::{LogSeries, LogTerm};
pub use parse::parse_polynomial;

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coeff::{Coeff, Mode};
use crate::error::{Error, Result};

/// Variable tag such as `t`, `x`, `xi`, `s`, `tau`, `u`, `v` or `z0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Var(String);

impl Var {
    pub fn new(name: impl Into<String>) -> Var {
        Var(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Var {
        Var::new(s)
    }
}

/// Bookkeeping carried alongside the coefficients.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    /// Level k when the series lives in the ramified Borel variable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Dense truncated power series in one or more variables.
#[derive(Clone, Debug)]
pub struct TruncatedSeries {
    vars: Vec<Var>,
    trunc: Vec<usize>,
    mode: Mode,
    coeffs: Vec<Coeff>,
    pub meta: SeriesMeta,
}

impl PartialEq for TruncatedSeries {
    fn eq(&self, other: &Self) -> bool {
        self.vars == other.vars && self.trunc == other.trunc && self.coeffs == other.coeffs
    }
}

fn box_len(trunc: &[usize]) -> usize {
    trunc.iter().map(|n| n + 1).product()
}

fn strides(trunc: &[usize]) -> Vec<usize> {
    let mut s = vec![1; trunc.len()];
    for d in (0..trunc.len().saturating_sub(1)).rev() {
        s[d] = s[d + 1] * (trunc[d + 1] + 1);
    }
    s
}

fn factorial_ratio_weight(l: usize, m: usize, mode: Mode) -> Coeff {
    // l! m! / (l+m+1)!
    let mut num = Coeff::one(Mode::Exact);
    for i in 1..=m {
        num = num.scale_int(i as i64);
    }
    let mut den = Coeff::one(Mode::Exact);
    for i in (l + 1)..=(l + m + 1) {
        den = den.scale_int(i as i64);
    }
    (&num / &den).to_mode(mode)
}

impl TruncatedSeries {
    /// Zero series on the given box.
    pub fn zeros(vars: &[&str], trunc: &[usize], mode: Mode) -> TruncatedSeries {
        assert_eq!(vars.len(), trunc.len(), "one truncation order per variable");
        TruncatedSeries {
            vars: vars.iter().map(|v| Var::new(*v)).collect(),
            trunc: trunc.to_vec(),
            mode,
            coeffs: vec![Coeff::zero(mode); box_len(trunc)],
            meta: SeriesMeta::default(),
        }
    }

    pub fn zeros_like_vars(vars: &[Var], trunc: &[usize], mode: Mode) -> TruncatedSeries {
        assert_eq!(vars.len(), trunc.len(), "one truncation order per variable");
        TruncatedSeries {
            vars: vars.to_vec(),
            trunc: trunc.to_vec(),
            mode,
            coeffs: vec![Coeff::zero(mode); box_len(trunc)],
            meta: SeriesMeta::default(),
        }
    }

    /// Series whose coefficients are given by `f(exponents)`.
    pub fn from_fn(
        vars: &[&str],
        trunc: &[usize],
        mode: Mode,
        mut f: impl FnMut(&[usize]) -> Coeff,
    ) -> TruncatedSeries {
        let mut s = TruncatedSeries::zeros(vars, trunc, mode);
        for idx in 0..s.coeffs.len() {
            let e = s.exps_of(idx);
            s.coeffs[idx] = f(&e).to_mode(mode);
        }
        s
    }

    /// One-variable series from its coefficient list; missing entries are zero.
    pub fn univariate(var: &str, coeffs: Vec<Coeff>, trunc: usize) -> TruncatedSeries {
        let mode = coeffs
            .iter()
            .fold(Mode::Exact, |m, c| m.join(c.mode()));
        let mut s = TruncatedSeries::zeros(&[var], &[trunc], mode);
        for (i, c) in coeffs.into_iter().enumerate() {
            if i <= trunc {
                s.coeffs[i] = c.to_mode(mode);
            } else {
                assert!(c.is_zero(), "coefficient beyond truncation");
            }
        }
        s
    }

    /// Single monomial `c * prod vars^exps`.
    pub fn monomial(vars: &[&str], trunc: &[usize], exps: &[usize], c: Coeff) -> TruncatedSeries {
        let mode = c.mode();
        let mut s = TruncatedSeries::zeros(vars, trunc, mode);
        if exps.iter().zip(trunc).all(|(e, n)| e <= n) {
            s.set(exps, c);
        }
        s
    }

    /// Constant series.
    pub fn constant(vars: &[&str], trunc: &[usize], c: Coeff) -> TruncatedSeries {
        let zero = vec![0; vars.len()];
        TruncatedSeries::monomial(vars, trunc, &zero, c)
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn trunc(&self) -> &[usize] {
        &self.trunc
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, v: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|w| w.as_str() == v)
            .ok_or_else(|| Error::UnknownVar(v.to_string()))
    }

    pub fn has_var(&self, v: &str) -> bool {
        self.vars.iter().any(|w| w.as_str() == v)
    }

    /// Truncation order of variable `v`.
    pub fn trunc_of(&self, v: &str) -> Result<usize> {
        Ok(self.trunc[self.var_index(v)?])
    }

    fn index_of(&self, exps: &[usize]) -> Option<usize> {
        let mut idx = 0;
        let mut stride = 1;
        for d in (0..self.trunc.len()).rev() {
            if exps[d] > self.trunc[d] {
                return None;
            }
            idx += exps[d] * stride;
            stride *= self.trunc[d] + 1;
        }
        Some(idx)
    }

    fn exps_of(&self, mut idx: usize) -> Vec<usize> {
        let mut e = vec![0; self.trunc.len()];
        for d in (0..self.trunc.len()).rev() {
            let n = self.trunc[d] + 1;
            e[d] = idx % n;
            idx /= n;
        }
        e
    }

    /// Coefficient at `exps`, or `None` outside the truncation box.
    pub fn coeff(&self, exps: &[usize]) -> Option<&Coeff> {
        assert_eq!(exps.len(), self.nvars());
        self.index_of(exps).map(|i| &self.coeffs[i])
    }

    /// Coefficient at `exps`; panics outside the box.
    pub fn at(&self, exps: &[usize]) -> Coeff {
        self.coeff(exps)
            .cloned()
            .unwrap_or_else(|| panic!("exponent {exps:?} outside truncation {:?}", self.trunc))
    }

    pub fn set(&mut self, exps: &[usize], c: Coeff) {
        let i = self
            .index_of(exps)
            .unwrap_or_else(|| panic!("exponent {exps:?} outside truncation {:?}", self.trunc));
        if self.mode.join(c.mode()) != self.mode {
            self.demote();
        }
        self.coeffs[i] = c.to_mode(self.mode);
    }

    fn demote(&mut self) {
        for c in self.coeffs.iter_mut() {
            if c.mode() == Mode::Exact {
                *c = c.clone().to_mode(Mode::Float);
            }
        }
        self.mode = Mode::Float;
    }

    /// Converts every coefficient to `mode` (float to exact is not possible and is ignored).
    pub fn to_mode(&self, mode: Mode) -> TruncatedSeries {
        let mut s = self.clone();
        if mode == Mode::Float {
            s.demote();
        }
        s
    }

    /// Nonzero terms with their exponents, in storage order.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<usize>, &Coeff)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (self.exps_of(i), c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max)
    }

    fn check_same_vars(&self, other: &TruncatedSeries) -> Result<()> {
        if self.vars != other.vars {
            return Err(Error::VarMismatch(format!(
                "{:?} vs {:?}",
                self.vars.iter().map(Var::as_str).collect::<Vec<_>>(),
                other.vars.iter().map(Var::as_str).collect::<Vec<_>>()
            )));
        }
        Ok(())
    }

    fn common_box(&self, other: &TruncatedSeries) -> Vec<usize> {
        self.trunc
            .iter()
            .zip(&other.trunc)
            .map(|(a, b)| *a.min(b))
            .collect()
    }

    /// Restriction to a smaller box; orders larger than the current ones are clamped.
    pub fn restrict(&self, trunc: &[usize]) -> TruncatedSeries {
        let t: Vec<usize> = self.trunc.iter().zip(trunc).map(|(a, b)| *a.min(b)).collect();
        if t == self.trunc {
            return self.clone();
        }
        let mut out = TruncatedSeries::zeros_like_vars(&self.vars, &t, self.mode);
        out.meta = self.meta.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            let e = out_exps(&t, i);
            *c = self.coeffs[self.index_of(&e).unwrap()].clone();
        }
        out
    }

    /// Enlarges the box, filling new entries with zero.
    ///
    /// Only valid when the series is known to be a polynomial inside the
    /// new box (for example a coefficient given in closed polynomial form).
    pub fn extend_polynomial(&self, trunc: &[usize]) -> TruncatedSeries {
        let t: Vec<usize> = self.trunc.iter().zip(trunc).map(|(a, b)| *a.max(b)).collect();
        let mut out = TruncatedSeries::zeros_like_vars(&self.vars, &t, self.mode);
        out.meta = self.meta.clone();
        for (e, c) in self.terms() {
            out.set(&e, c.clone());
        }
        out
    }

    /// True when both series agree on the intersection of their boxes.
    pub fn agrees_with(&self, other: &TruncatedSeries) -> bool {
        if self.vars != other.vars {
            return false;
        }
        let b = self.common_box(other);
        self.restrict(&b).coeffs == other.restrict(&b).coeffs
    }

    fn zip_with(
        &self,
        other: &TruncatedSeries,
        f: impl Fn(&Coeff, &Coeff) -> Coeff,
    ) -> Result<TruncatedSeries> {
        self.check_same_vars(other)?;
        let b = self.common_box(other);
        let a = self.restrict(&b);
        let o = other.restrict(&b);
        let mode = self.mode.join(other.mode);
        let coeffs = a.coeffs.iter().zip(&o.coeffs).map(|(x, y)| f(x, y)).collect();
        Ok(TruncatedSeries { vars: self.vars.clone(), trunc: b, mode, coeffs, meta: merge_meta(&self.meta, &other.meta) })
    }

    pub fn add(&self, other: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn neg(&self) -> TruncatedSeries {
        self.map(|c| -c)
    }

    pub fn scale(&self, c: &Coeff) -> TruncatedSeries {
        let mut s = self.map(|a| a * c);
        s.mode = self.mode.join(c.mode());
        s
    }

    fn map(&self, f: impl Fn(&Coeff) -> Coeff) -> TruncatedSeries {
        let coeffs: Vec<Coeff> = self.coeffs.iter().map(f).collect();
        let mode = coeffs.iter().fold(self.mode, |m, c| m.join(c.mode()));
        let mut s = TruncatedSeries { vars: self.vars.clone(), trunc: self.trunc.clone(), mode, coeffs, meta: self.meta.clone() };
        if mode == Mode::Float {
            s.demote();
        }
        s
    }

    /// Generic bilinear product: each pair of nonzero terms contributes
    /// `weight(ea, eb) * a * b` at exponent `ea + eb + shift`.
    fn bilinear(
        &self,
        other: &TruncatedSeries,
        out_trunc: &[usize],
        shift: &[usize],
        weight: impl Fn(&[usize], &[usize]) -> Option<Coeff>,
    ) -> TruncatedSeries {
        let mode = self.mode.join(other.mode);
        let mut out = TruncatedSeries::zeros_like_vars(&self.vars, out_trunc, mode);
        out.meta = merge_meta(&self.meta, &other.meta);
        let st = strides(out_trunc);
        let a_terms: Vec<(Vec<usize>, &Coeff)> = self.terms().collect();
        let b_terms: Vec<(Vec<usize>, &Coeff)> = other.terms().collect();
        for (ea, ca) in &a_terms {
            if ea.iter().zip(shift).zip(out_trunc).any(|((e, s), n)| e + s > *n) {
                continue;
            }
            'inner: for (eb, cb) in &b_terms {
                let mut idx = 0;
                for d in 0..out_trunc.len() {
                    let e = ea[d] + eb[d] + shift[d];
                    if e > out_trunc[d] {
                        continue 'inner;
                    }
                    idx += e * st[d];
                }
                let prod = *ca * *cb;
                match weight(ea, eb) {
                    Some(w) => out.coeffs[idx] += &(&prod * &w),
                    None => out.coeffs[idx] += &prod,
                }
            }
        }
        if mode == Mode::Float {
            out.demote();
        }
        out
    }

    /// Cauchy product on the common box.
    pub fn mul(&self, other: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.check_same_vars(other)?;
        let b = self.common_box(other);
        let shift = vec![0; b.len()];
        Ok(self.bilinear(other, &b, &shift, |_, _| None))
    }

    /// Integer power by repeated multiplication.
    pub fn pow(&self, n: u32) -> TruncatedSeries {
        let mut acc = TruncatedSeries::constant_like(self, Coeff::one(self.mode));
        for _ in 0..n {
            acc = acc.mul(self).expect("same variables");
        }
        acc
    }

    /// Constant with the same variables and box as `like`.
    pub fn constant_like(like: &TruncatedSeries, c: Coeff) -> TruncatedSeries {
        let mut s = TruncatedSeries::zeros_like_vars(&like.vars, &like.trunc, like.mode.join(c.mode()));
        let zero = vec![0; like.nvars()];
        s.set(&zero, c);
        s
    }

    /// Partial derivative; the box shrinks by one in `v` since the top
    /// coefficient of the derivative depends on an unknown term.
    pub fn derive(&self, v: &str) -> Result<TruncatedSeries> {
        let d = self.var_index(v)?;
        if self.trunc[d] == 0 {
            return Err(Error::TruncationOverflow { what: format!("derivative in `{v}`"), required: 1 });
        }
        let mut t = self.trunc.clone();
        t[d] -= 1;
        let mut out = TruncatedSeries::zeros_like_vars(&self.vars, &t, self.mode);
        out.meta = self.meta.clone();
        for (mut e, c) in self.terms() {
            if e[d] == 0 {
                continue;
            }
            let m = e[d];
            e[d] -= 1;
            let i = out.index_of(&e).unwrap();
            out.coeffs[i] = c.scale_int(m as i64);
        }
        Ok(out)
    }

    /// Euler operator `v ∂_v`; the box is preserved.
    pub fn euler(&self, v: &str) -> Result<TruncatedSeries> {
        let d = self.var_index(v)?;
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            let m = out_exps(&self.trunc, i)[d];
            if m != 1 {
                *c = c.scale_int(m as i64);
            }
        }
        Ok(out)
    }

    /// Antiderivative in `v` with zero constant term; the box grows by one.
    pub fn integrate(&self, v: &str) -> Result<TruncatedSeries> {
        let d = self.var_index(v)?;
        let mut t = self.trunc.clone();
        t[d] += 1;
        let mut out = TruncatedSeries::zeros_like_vars(&self.vars, &t, self.mode);
        out.meta = self.meta.clone();
        for (mut e, c) in self.terms() {
            e[d] += 1;
            let m = e[d] as i64;
            let i = out.index_of(&e).unwrap();
            out.coeffs[i] = c / &Coeff::from_int(m, self.mode);
        }
        Ok(out)
    }

    /// Multiplication by `v^p`; the box grows by `p`.
    pub fn shift(&self, v: &str, p: usize) -> Result<TruncatedSeries> {
        let d = self.var_index(v)?;
        let mut t = self.trunc.clone();
        t[d] += p;
        let mut out = TruncatedSeries::zeros_like_vars(&self.vars, &t, self.mode);
        out.meta = self.meta.clone();
        for (mut e, c) in self.terms() {
            e[d] += p;
            let i = out.index_of(&e).unwrap();
            out.coeffs[i] = c.clone();
        }
        Ok(out)
    }

    /// Division by `v^p`; fails unless every term has `v`-exponent at least `p`.
    pub fn unshift(&self, v: &str, p: usize) -> Result<TruncatedSeries> {
        let d = self.var_index(v)?;
        if self.trunc[d] < p {
            return Err(Error::TruncationOverflow { what: format!("division by {v}^{p}"), required: p });
        }
        let mut t = self.trunc.clone();
        t[d] -= p;
        let mut out = TruncatedSeries::zeros_like_vars(&self.vars, &t, self.mode);
        out.meta = self.meta.clone();
        for (mut e, c) in self.terms() {
            if e[d] < p {
                return Err(Error::Precondition(format!("series not divisible by {v}^{p}")));
            }
            e[d] -= p;
            let i = out.index_of(&e).unwrap();
            out.coeffs[i] = c.clone();
        }
        Ok(out)
    }

    /// Borel-plane convolution in `v`: `v^l * v^m = l! m!/(l+m+1)! v^(l+m+1)`.
    ///
    /// Remaining variables multiply as in the Cauchy product. The result keeps
    /// the common box, so terms of degree above it are dropped.
    pub fn convolve(&self, other: &TruncatedSeries, v: &str) -> Result<TruncatedSeries> {
        self.check_same_vars(other)?;
        let d = self.var_index(v)?;
        let b = self.common_box(other);
        let mut shift = vec![0; b.len()];
        shift[d] = 1;
        let n = b[d] + 1;
        let mode = self.mode.join(other.mode);
        let table: Vec<Vec<Coeff>> = (0..n)
            .map(|l| (0..n).map(|m| factorial_ratio_weight(l, m, mode)).collect())
            .collect();
        Ok(self.bilinear(other, &b, &shift, |ea, eb| Some(table[ea[d]][eb[d]].clone())))
    }

    /// Level-k convolution in the stored ramified variable:
    /// `v^p *_k v^q = Γ(p/k+1)Γ(q/k+1)/Γ((p+q)/k+2) v^(p+q+k)`.
    ///
    /// Exact for k = 1; float with a warning otherwise.
    pub fn convolve_level(&self, other: &TruncatedSeries, v: &str, k: u32) -> Result<TruncatedSeries> {
        if k == 1 {
            return self.convolve(other, v);
        }
        self.check_same_vars(other)?;
        let d = self.var_index(v)?;
        let b = self.common_box(other);
        let mut shift = vec![0; b.len()];
        shift[d] = k as usize;
        let a = self.to_mode(Mode::Float);
        let o = other.to_mode(Mode::Float);
        let mut out = a.bilinear(&o, &b, &shift, |ea, eb| {
            Some(Coeff::float(gamma_ratio_kernel(ea[d], eb[d], k), 0.0))
        });
        out.meta.level = Some(k);
        out.push_warning(format!("level-{k} convolution evaluated in float mode"));
        Ok(out)
    }

    pub(crate) fn push_warning(&mut self, w: String) {
        if !self.meta.warnings.contains(&w) {
            self.meta.warnings.push(w);
        }
    }

    /// Smallest exponent of `v` carrying a nonzero coefficient; `None` is +∞.
    pub fn valuation(&self, v: &str) -> Result<Option<usize>> {
        let d = self.var_index(v)?;
        Ok(self.terms().map(|(e, _)| e[d]).min())
    }

    /// Total-degree valuation over all variables; `None` is +∞.
    pub fn total_valuation(&self) -> Option<usize> {
        self.terms().map(|(e, _)| e.iter().sum()).min()
    }

    /// Coefficient of `v^m`, as a series in the remaining variables.
    pub fn slice(&self, v: &str, m: usize) -> Result<TruncatedSeries> {
        let d = self.var_index(v)?;
        if m > self.trunc[d] {
            return Err(Error::TruncationOverflow { what: format!("slice {v}^{m}"), required: m });
        }
        let vars: Vec<Var> = self.vars.iter().enumerate().filter(|(i, _)| *i != d).map(|(_, v)| v.clone()).collect();
        let trunc: Vec<usize> = self.trunc.iter().enumerate().filter(|(i, _)| *i != d).map(|(_, n)| *n).collect();
        let mut out = TruncatedSeries::zeros_like_vars(&vars, &trunc, self.mode);
        out.meta = self.meta.clone();
        for (e, c) in self.terms() {
            if e[d] == m {
                let mut r = e.clone();
                r.remove(d);
                let i = out.index_of(&r).unwrap();
                out.coeffs[i] = c.clone();
            }
        }
        Ok(out)
    }

    /// Inserts a new variable `v` at position `pos`, with the series constant in `v`.
    pub fn lift(&self, v: &str, pos: usize, trunc_v: usize) -> TruncatedSeries {
        let mut vars = self.vars.clone();
        vars.insert(pos, Var::new(v));
        let mut trunc = self.trunc.clone();
        trunc.insert(pos, trunc_v);
        let mut out = TruncatedSeries::zeros_like_vars(&vars, &trunc, self.mode);
        out.meta = self.meta.clone();
        for (mut e, c) in self.terms() {
            e.insert(pos, 0);
            out.set(&e, c.clone());
        }
        out
    }

    /// Renames a variable in place.
    pub fn rename(&self, from: &str, to: &str) -> Result<TruncatedSeries> {
        let d = self.var_index(from)?;
        let mut s = self.clone();
        s.vars[d] = Var::new(to);
        Ok(s)
    }

    /// Numerical evaluation at a point (one value per variable).
    pub fn eval(&self, point: &[Complex64]) -> Complex64 {
        assert_eq!(point.len(), self.nvars());
        let pows: Vec<Vec<Complex64>> = point
            .iter()
            .zip(&self.trunc)
            .map(|(z, n)| {
                let mut p = Vec::with_capacity(n + 1);
                let mut acc = Complex64::new(1.0, 0.0);
                for _ in 0..=*n {
                    p.push(acc);
                    acc *= z;
                }
                p
            })
            .collect();
        let mut sum = Complex64::new(0.0, 0.0);
        for (e, c) in self.terms() {
            let mut m = c.to_c64();
            for (d, k) in e.iter().enumerate() {
                m *= pows[d][*k];
            }
            sum += m;
        }
        sum
    }

    /// Coefficients of a one-variable series as complex doubles.
    pub fn to_c64_vec(&self) -> Vec<Complex64> {
        assert_eq!(self.nvars(), 1, "to_c64_vec needs a one-variable series");
        self.coeffs.iter().map(Coeff::to_c64).collect()
    }

    /// Raw coefficients of a one-variable series.
    pub fn coeff_vec(&self) -> &[Coeff] {
        assert_eq!(self.nvars(), 1, "coeff_vec needs a one-variable series");
        &self.coeffs
    }

    /// Substitutes series for some variables.
    ///
    /// `keep` lists the variables of the result; each entry of `subs` replaces
    /// a variable of `self` by a series in `keep` with zero constant term. The
    /// substituted variables of `self` are read as polynomial degrees, so only
    /// the kept variables limit the result box.
    pub fn substitute(&self, keep: &[&str], subs: &[(&str, &TruncatedSeries)]) -> Result<TruncatedSeries> {
        let keep_idx: Vec<usize> = keep.iter().map(|v| self.var_index(v)).collect::<Result<_>>()?;
        let sub_idx: Vec<usize> = subs.iter().map(|(v, _)| self.var_index(v)).collect::<Result<_>>()?;
        if keep_idx.len() + sub_idx.len() != self.nvars() {
            return Err(Error::VarMismatch("every variable must be kept or substituted".into()));
        }
        let mut out_trunc: Vec<usize> = keep_idx.iter().map(|&i| self.trunc[i]).collect();
        for (v, s) in subs {
            if s.vars.iter().map(Var::as_str).collect::<Vec<_>>() != keep {
                return Err(Error::VarMismatch(format!("substituted series for `{v}` must be in {keep:?}")));
            }
            let zero = vec![0; keep.len()];
            if !s.at(&zero).is_zero() {
                return Err(Error::Precondition(format!("substituted series for `{v}` has a nonzero constant term")));
            }
            for (o, n) in out_trunc.iter_mut().zip(&s.trunc) {
                *o = (*o).min(*n);
            }
        }
        let total: usize = out_trunc.iter().sum();
        let keep_vars: Vec<Var> = keep.iter().map(|v| Var::new(*v)).collect();
        let mode = subs.iter().fold(self.mode, |m, (_, s)| m.join(s.mode));

        // Group the terms of self by their exponents in the substituted variables.
        let mut groups: BTreeMap<Vec<usize>, TruncatedSeries> = BTreeMap::new();
        for (e, c) in self.terms() {
            let se: Vec<usize> = sub_idx.iter().map(|&i| e[i]).collect();
            let ke: Vec<usize> = keep_idx.iter().map(|&i| e[i]).collect();
            if ke.iter().zip(&out_trunc).any(|(a, b)| a > b) {
                continue;
            }
            let g = groups
                .entry(se)
                .or_insert_with(|| TruncatedSeries::zeros_like_vars(&keep_vars, &out_trunc, mode));
            let i = g.index_of(&ke).unwrap();
            g.coeffs[i] += c;
        }

        let restricted: Vec<TruncatedSeries> = subs.iter().map(|(_, s)| s.restrict(&out_trunc).to_mode(mode)).collect();
        let mut power_cache: Vec<Vec<TruncatedSeries>> = restricted
            .iter()
            .map(|s| vec![TruncatedSeries::constant_like(s, Coeff::one(mode))])
            .collect();
        let mut out = TruncatedSeries::zeros_like_vars(&keep_vars, &out_trunc, mode);
        for (se, g) in groups {
            if g.is_zero() {
                continue;
            }
            // Powers beyond the total degree of the box vanish.
            if se.iter().sum::<usize>() > total {
                continue;
            }
            let mut term = g;
            for (j, &p) in se.iter().enumerate() {
                while power_cache[j].len() <= p {
                    let next = power_cache[j].last().unwrap().mul(&restricted[j])?;
                    power_cache[j].push(next);
                }
                if p > 0 {
                    term = term.mul(&power_cache[j][p])?;
                }
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }
}

fn out_exps(trunc: &[usize], mut idx: usize) -> Vec<usize> {
    let mut e = vec![0; trunc.len()];
    for d in (0..trunc.len()).rev() {
        let n = trunc[d] + 1;
        e[d] = idx % n;
        idx /= n;
    }
    e
}

fn merge_meta(a: &SeriesMeta, b: &SeriesMeta) -> SeriesMeta {
    let mut m = a.clone();
    if m.level.is_none() {
        m.level = b.level;
    }
    for w in &b.warnings {
        if !m.warnings.contains(w) {
            m.warnings.push(w.clone());
        }
    }
    m
}

/// Evaluates `F(t, x, u, v)` at `u = u_series`, `v = v_series`.
///
/// `F` must have variables `t, x, u, v` in that order.
pub fn compose(
    f: &TruncatedSeries,
    u_series: &TruncatedSeries,
    v_series: &TruncatedSeries,
) -> Result<TruncatedSeries> {
    let names: Vec<&str> = f.vars().iter().map(Var::as_str).collect();
    if names != ["t", "x", "u", "v"] {
        return Err(Error::VarMismatch(format!("compose expects F(t,x,u,v), got {names:?}")));
    }
    f.substitute(&["t", "x"], &[("u", u_series), ("v", v_series)])
}
