use serde::Serialize;

use super::EquationSpec;

/// Result of the valuation tests behind conditions (F) and (F′).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionReport {
    pub condition_f: bool,
    pub condition_f_prime: bool,
    /// `b(0)` is a positive integer.
    pub resonance: bool,
    /// `min val a_{i,0,0}` over `i ≥ 2`; `None` is +∞.
    pub q: Option<usize>,
    /// Derivative terms with `a_{ijα}(0) ≠ 0`.
    pub offending_terms: Vec<(usize, usize, usize)>,
    /// Derivative terms violating `val a_{ijα} + j q > 0`.
    pub offending_terms_prime: Vec<(usize, usize, usize)>,
}

/// Checks (F): no resonance and `a_{ijα}(0) = 0` for `α > 0`, and the weaker
/// (F′): no resonance and `val a_{ijα} + j q > 0` for `α > 0`.
pub fn check_conditions(eq: &EquationSpec) -> ConditionReport {
    let resonance = eq.resonant_order().is_some();
    let val = |s: &crate::series::TruncatedSeries| s.valuation("x").expect("series in x");
    let q = eq
        .nonlinear
        .iter()
        .filter(|t| t.i >= 2 && t.j == 0 && t.alpha == 0)
        .filter_map(|t| val(&t.coeff))
        .min();
    let mut offending_terms = Vec::new();
    let mut offending_terms_prime = Vec::new();
    for t in eq.nonlinear.iter().filter(|t| t.alpha > 0) {
        let v = val(&t.coeff);
        if v == Some(0) {
            offending_terms.push((t.i, t.j, t.alpha));
        }
        let ok = match (v, q) {
            (None, _) => true,
            (Some(_), None) => t.j > 0 || v > Some(0),
            (Some(v), Some(q)) => v + t.j * q > 0,
        };
        if !ok {
            offending_terms_prime.push((t.i, t.j, t.alpha));
        }
    }
    ConditionReport {
        condition_f: !resonance && offending_terms.is_empty(),
        condition_f_prime: !resonance && offending_terms_prime.is_empty(),
        resonance,
        q,
        offending_terms,
        offending_terms_prime,
    }
}
