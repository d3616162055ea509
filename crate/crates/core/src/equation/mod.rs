//! Problem instances `t∂ₜu = a(x)t + b(x)u + x^(k+1)c(x)∂ₓu + Σ a_{ijα}(x) tⁱ uʲ Dᵅ`.
//!
//! `D` is `∂ₓu` in plain form and `x∂ₓu` in Euler form (the normal form
//! produced by [`prepare_normal_form`]).

mod conditions;
mod newton;
mod prepare;

pub use conditions::{check_conditions, ConditionReport};
pub use newton::{newton_polygon, NewtonPolygon};
pub use prepare::prepare_normal_form;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::coeff::{Coeff, Mode};
use crate::error::{Error, Result};
use crate::series::{parse_polynomial, TruncatedSeries};

/// Which derivative the nonlinear terms are raised to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DerivativeForm {
    /// `(∂ₓu)^α`
    #[default]
    Plain,
    /// `(x∂ₓu)^α`
    Euler,
}

/// Nonlinear term `a_{ijα}(x) tⁱ uʲ Dᵅ`.
#[derive(Clone, Debug, PartialEq)]
pub struct NonlinearTerm {
    pub i: usize,
    pub j: usize,
    pub alpha: usize,
    pub coeff: TruncatedSeries,
}

/// Validated equation data.
#[derive(Clone, Debug, PartialEq)]
pub struct EquationSpec {
    pub a: TruncatedSeries,
    pub b: TruncatedSeries,
    pub c: TruncatedSeries,
    pub k: u32,
    /// Sorted by `(i, j, alpha)`, one entry per index triple.
    pub nonlinear: Vec<NonlinearTerm>,
    pub form: DerivativeForm,
    /// Output box `(N_t, N_x)`.
    pub trunc: (usize, usize),
    pub mode: Mode,
    /// Coefficient functions are exact polynomials and may be zero-extended.
    pub polynomial_coeffs: bool,
    pub allow_resonance: bool,
}

/// Slack added to polynomial coefficients at parse time.
const COEFF_MARGIN: usize = 8;

impl EquationSpec {
    /// Builds and validates a spec from coefficient series in `x`.
    pub fn new(
        a: TruncatedSeries,
        b: TruncatedSeries,
        c: TruncatedSeries,
        k: u32,
        nonlinear: Vec<NonlinearTerm>,
        trunc: (usize, usize),
    ) -> Result<EquationSpec> {
        let mode = [&a, &b, &c]
            .into_iter()
            .chain(nonlinear.iter().map(|t| &t.coeff))
            .fold(Mode::Exact, |m, s| m.join(s.mode()));
        let eq = EquationSpec {
            a,
            b,
            c,
            k,
            nonlinear,
            form: DerivativeForm::Plain,
            trunc,
            mode,
            polynomial_coeffs: true,
            allow_resonance: false,
        };
        eq.normalized()
    }

    fn normalized(mut self) -> Result<EquationSpec> {
        if self.k == 0 {
            return Err(Error::Invalid("level k must be a positive integer".into()));
        }
        if self.trunc.0 == 0 {
            return Err(Error::Invalid("N_t must be at least 1".into()));
        }
        for s in [&self.a, &self.b, &self.c].into_iter().chain(self.nonlinear.iter().map(|t| &t.coeff)) {
            if s.nvars() != 1 || s.vars()[0].as_str() != "x" {
                return Err(Error::Invalid("coefficient functions must be series in x".into()));
            }
        }
        for t in &self.nonlinear {
            if t.i + t.j + t.alpha < 2 {
                return Err(Error::Invalid(format!(
                    "nonlinear term ({},{},{}) needs i+j+alpha ≥ 2",
                    t.i, t.j, t.alpha
                )));
            }
        }
        // Merge duplicate index triples and drop zero terms.
        self.nonlinear.sort_by_key(|t| (t.i, t.j, t.alpha));
        let mut merged: Vec<NonlinearTerm> = Vec::new();
        for t in self.nonlinear.drain(..) {
            match merged.last_mut() {
                Some(m) if (m.i, m.j, m.alpha) == (t.i, t.j, t.alpha) => m.coeff = m.coeff.add(&t.coeff)?,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| !t.coeff.is_zero());
        self.nonlinear = merged;
        if self.c0().is_zero() {
            return Err(Error::Degenerate);
        }
        if self.mode == Mode::Float {
            for s in [&mut self.a, &mut self.b, &mut self.c] {
                *s = s.to_mode(Mode::Float);
            }
            for t in self.nonlinear.iter_mut() {
                t.coeff = t.coeff.to_mode(Mode::Float);
            }
        }
        Ok(self)
    }

    pub fn b0(&self) -> Coeff {
        self.b.at(&[0])
    }

    pub fn c0(&self) -> Coeff {
        self.c.at(&[0])
    }

    /// First positive integer equal to b(0), if any.
    pub fn resonant_order(&self) -> Option<u64> {
        self.b0().as_positive_integer()
    }

    /// Largest power of the derivative among nonlinear terms.
    pub fn max_alpha(&self) -> usize {
        self.nonlinear.iter().map(|t| t.alpha).max().unwrap_or(0)
    }

    /// Largest power of u among nonlinear terms.
    pub fn max_j(&self) -> usize {
        self.nonlinear.iter().map(|t| t.j).max().unwrap_or(0)
    }

    /// True when derivative nonlinearities consume one x-order per t-order.
    pub fn has_plain_derivative_terms(&self) -> bool {
        self.form == DerivativeForm::Plain && self.max_alpha() > 0
    }

    /// Smallest truncation order among coefficient functions.
    pub fn coeff_trunc(&self) -> usize {
        [&self.a, &self.b, &self.c]
            .into_iter()
            .chain(self.nonlinear.iter().map(|t| &t.coeff))
            .map(|s| s.trunc()[0])
            .min()
            .unwrap()
    }

    /// Copy with every coefficient known through x-order `nx`.
    ///
    /// Polynomial coefficients are zero-extended; truncated ones must
    /// already reach `nx`.
    pub fn with_coeff_order(&self, nx: usize) -> Result<EquationSpec> {
        let have = self.coeff_trunc();
        if have >= nx {
            return Ok(self.clone());
        }
        if !self.polynomial_coeffs {
            return Err(Error::TruncationOverflow { what: "coefficient functions".into(), required: nx });
        }
        let mut eq = self.clone();
        for s in [&mut eq.a, &mut eq.b, &mut eq.c] {
            *s = s.extend_polynomial(&[nx]);
        }
        for t in eq.nonlinear.iter_mut() {
            t.coeff = t.coeff.extend_polynomial(&[nx]);
        }
        Ok(eq)
    }

    /// Nonlinear part `Σ a_{ijα}(x) tⁱ uʲ vᵅ` as a series in `(t, x, u, v)`.
    pub fn nonlinear_series(&self, nt: usize, nx: usize) -> Result<TruncatedSeries> {
        let eq = self.with_coeff_order(nx)?;
        let ju = eq.max_j().max(1);
        let jv = eq.max_alpha().max(1);
        let mut f = TruncatedSeries::zeros(&["t", "x", "u", "v"], &[nt, nx, ju, jv], self.mode);
        for t in &eq.nonlinear {
            if t.i > nt {
                continue;
            }
            for (e, c) in t.coeff.terms() {
                if e[0] <= nx {
                    let idx = [t.i, e[0], t.j, t.alpha];
                    let cur = f.at(&idx);
                    f.set(&idx, &cur + c);
                }
            }
        }
        Ok(f)
    }

    /// The derivative argument `D` of the nonlinear terms for a candidate `u(t,x)`.
    pub fn derivative_argument(&self, u: &TruncatedSeries) -> Result<TruncatedSeries> {
        match self.form {
            DerivativeForm::Plain => u.derive("x"),
            DerivativeForm::Euler => u.euler("x"),
        }
    }

    /// `t∂ₜu − F(t,x,u,∂ₓu)` for a candidate series `u(t,x)`.
    ///
    /// The result box is where every term is exactly known.
    pub fn residual(&self, u: &TruncatedSeries) -> Result<TruncatedSeries> {
        let nt = u.trunc_of("t")?;
        let nx = u.trunc_of("x")?;
        let k = self.k as usize;
        let eq = self.with_coeff_order(nx)?;
        let lhs = u.euler("t")?;
        let lift = |s: &TruncatedSeries| s.restrict(&[nx]).lift("t", 0, nt);
        let a_t = lift(&eq.a).shift("t", 1)?.restrict(&[nt, nx]);
        let bu = lift(&eq.b).mul(u)?;
        // x^(k+1) c ∂ₓu, computed with the shift so the box is not lost.
        let du = u.derive("x")?.shift("x", k + 1)?;
        let cdu = lift(&eq.c).mul(&du)?;
        let mut rhs = a_t.add(&bu)?.add(&cdu)?;
        if !self.nonlinear.is_empty() {
            let d = if self.max_alpha() > 0 {
                self.derivative_argument(u)?
            } else {
                TruncatedSeries::zeros(&["t", "x"], &[nt, nx], u.mode())
            };
            let bx = d.trunc()[1].min(nx);
            let n = compose(&eq.nonlinear_series(nt, bx)?, &u.restrict(&[nt, bx]), &d.restrict(&[nt, bx]))?;
            rhs = rhs.add(&n)?;
        }
        lhs.sub(&rhs)
    }
}

use crate::series::compose;

/// Reads a coefficient given as a polynomial string, a number or a list.
fn series_from_json(v: &Value, trunc: usize) -> Result<TruncatedSeries> {
    match v {
        Value::String(s) => parse_polynomial(s, "x", trunc),
        Value::Number(_) => {
            let c = Coeff::from_json(v).map_err(Error::Invalid)?;
            Ok(TruncatedSeries::univariate("x", vec![c], trunc))
        }
        Value::Array(items) => {
            let cs: Vec<Coeff> = items
                .iter()
                .map(|c| Coeff::from_json(c).map_err(Error::Invalid))
                .collect::<Result<_>>()?;
            let n = trunc.max(cs.len().saturating_sub(1));
            Ok(TruncatedSeries::univariate("x", cs, n))
        }
        Value::Object(_) => {
            let s: TruncatedSeries = serde_json::from_value(v.clone())?;
            if s.nvars() != 1 || s.vars()[0].as_str() != "x" {
                return Err(Error::Invalid("series coefficient must be in x".into()));
            }
            Ok(s)
        }
        _ => Err(Error::Invalid("coefficient must be a polynomial string, number, list or series".into())),
    }
}

fn get_usize(obj: &serde_json::Map<String, Value>, key: &str) -> Result<Option<usize>> {
    match obj.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_u64()
            .map(|n| Some(n as usize))
            .ok_or_else(|| Error::Invalid(format!("`{key}` must be a nonnegative integer"))),
    }
}

/// Parses an equation-spec JSON document.
///
/// Resonance (`b(0)` a positive integer) is rejected unless `allow_resonance`.
pub fn parse_spec(text: &str, allow_resonance: bool) -> Result<EquationSpec> {
    let doc: Value = serde_json::from_str(text)?;
    let obj = doc.as_object().ok_or_else(|| Error::Invalid("spec must be a JSON object".into()))?;
    const KNOWN: [&str; 10] = ["k", "a", "b", "c", "nonlinear", "trunc", "mode", "form", "name", "allow_resonance"];
    if let Some(key) = obj.keys().find(|k| !KNOWN.contains(&k.as_str())) {
        return Err(Error::Invalid(format!("unknown field `{key}`")));
    }
    let k = get_usize(obj, "k")?.ok_or_else(|| Error::Invalid("missing `k`".into()))? as u32;
    let trunc = match obj.get("trunc") {
        None => (8, 8),
        Some(Value::Array(a)) if a.len() == 2 => {
            let f = |v: &Value| v.as_u64().map(|n| n as usize).ok_or_else(|| Error::Invalid("`trunc` entries must be integers".into()));
            (f(&a[0])?, f(&a[1])?)
        }
        Some(_) => return Err(Error::Invalid("`trunc` must be [N_t, N_x]".into())),
    };
    let ctrunc = trunc.0 + trunc.1 + k as usize + COEFF_MARGIN;
    let field = |key: &str| -> Result<TruncatedSeries> {
        let v = obj.get(key).ok_or_else(|| Error::Invalid(format!("missing `{key}`")))?;
        series_from_json(v, ctrunc)
    };
    let (a, b, c) = (field("a")?, field("b")?, field("c")?);

    let mut nonlinear = Vec::new();
    match obj.get("nonlinear") {
        None | Some(Value::Null) => {}
        Some(Value::Array(items)) => {
            for it in items {
                let o = it.as_object().ok_or_else(|| Error::Invalid("nonlinear entries must be objects".into()))?;
                let idx = |key: &str| -> Result<usize> {
                    get_usize(o, key)?.ok_or_else(|| Error::Invalid(format!("nonlinear entry missing `{key}`")))
                };
                let coeff = o.get("coeff").ok_or_else(|| Error::Invalid("nonlinear entry missing `coeff`".into()))?;
                nonlinear.push(NonlinearTerm {
                    i: idx("i")?,
                    j: idx("j")?,
                    alpha: idx("alpha")?,
                    coeff: series_from_json(coeff, ctrunc)?,
                });
            }
        }
        // Object form: {"i,j,alpha": coeff}.
        Some(Value::Object(map)) => {
            for (key, coeff) in map {
                let parts: Vec<usize> = key
                    .split(',')
                    .map(|p| p.trim().parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::Invalid(format!("nonlinear key `{key}` must be `i,j,alpha`")))?;
                if parts.len() != 3 {
                    return Err(Error::Invalid(format!("nonlinear key `{key}` must be `i,j,alpha`")));
                }
                nonlinear.push(NonlinearTerm {
                    i: parts[0],
                    j: parts[1],
                    alpha: parts[2],
                    coeff: series_from_json(coeff, ctrunc)?,
                });
            }
        }
        Some(_) => return Err(Error::Invalid("`nonlinear` must be a list".into())),
    }

    let mode = match obj.get("mode") {
        None => Mode::Exact,
        Some(v) => serde_json::from_value(v.clone()).map_err(|_| Error::Invalid("`mode` must be \"exact\" or \"float\"".into()))?,
    };
    let form = match obj.get("form") {
        None => DerivativeForm::Plain,
        Some(v) => serde_json::from_value(v.clone()).map_err(|_| Error::Invalid("`form` must be \"plain\" or \"euler\"".into()))?,
    };
    let allow = allow_resonance || obj.get("allow_resonance").and_then(Value::as_bool).unwrap_or(false);

    let mut eq = EquationSpec::new(a, b, c, k, nonlinear, trunc)?;
    eq.form = form;
    eq.allow_resonance = allow;
    if mode == Mode::Float {
        eq.mode = Mode::Float;
        eq = eq.normalized()?;
    }
    if !allow {
        if let Some(n) = eq.resonant_order() {
            return Err(Error::Resonance { order: n, value: eq.b0().to_string() });
        }
    }
    Ok(eq)
}

impl EquationSpec {
    /// Whether the coefficient `b` is the constant `b(0)`.
    pub fn b_is_constant(&self) -> bool {
        self.b.terms().all(|(e, _)| e[0] == 0)
    }

    /// Whether the coefficient `c` is the constant `c(0)`.
    pub fn c_is_constant(&self) -> bool {
        self.c.terms().all(|(e, _)| e[0] == 0)
    }

    /// Number of nonzero x-coefficients of `a` (useful for quick sanity checks).
    pub fn a_is_zero(&self) -> bool {
        self.a.is_zero() && self.nonlinear.iter().all(|t| t.j + t.alpha > 0 || t.coeff.is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const EULER: &str = r#"{"k":1,"a":"x","b":"0","c":"1","nonlinear":{}}"#;

    #[test]
    fn parses_euler() {
        let eq = parse_spec(EULER, false).unwrap();
        assert_eq!(eq.k, 1);
        assert!(eq.nonlinear.is_empty());
        assert_eq!(eq.c0(), Coeff::one(Mode::Exact));
    }

    #[test]
    fn rejects_resonance_and_degeneracy() {
        let r = parse_spec(r#"{"k":1,"a":"x","b":"1","c":"1"}"#, false);
        assert!(matches!(r, Err(Error::Resonance { order: 1, .. })));
        assert!(parse_spec(r#"{"k":1,"a":"x","b":"1","c":"1"}"#, true).is_ok());
        let r = parse_spec(r#"{"k":1,"a":"x","b":"0","c":"0"}"#, false);
        assert!(matches!(r, Err(Error::Degenerate)));
    }

    #[test]
    fn rejects_bad_schema() {
        assert!(parse_spec(r#"{"k":1,"a":"x","b":"0"}"#, false).is_err());
        assert!(parse_spec(r#"{"k":1,"a":"x","b":"0","c":"1","bogus":1}"#, false).is_err());
        let low = r#"{"k":1,"a":"x","b":"0","c":"1","nonlinear":[{"i":1,"j":0,"alpha":0,"coeff":"1"}]}"#;
        assert!(parse_spec(low, false).is_err());
    }

    #[test]
    fn accepts_list_coefficients_and_nonlinear_list() {
        let s = r#"{"k":1,"a":[0,1,"1/2"],"b":[[0,1]],"c":"1+x","trunc":[4,5],
                   "nonlinear":[{"i":1,"j":0,"alpha":2,"coeff":"1"}]}"#;
        let eq = parse_spec(s, false).unwrap();
        assert_eq!(eq.a.at(&[2]), Coeff::ratio(1, 2));
        assert_eq!(eq.nonlinear.len(), 1);
        assert_eq!(eq.trunc, (4, 5));
    }
}
