//! Rewriting `u = v + x w` so that `w` solves an Euler-form equation with
//! `val ã ≥ k` and `val ã_{i,0,0} ≥ k`.

use super::{check_conditions, DerivativeForm, EquationSpec, NonlinearTerm};
use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::series::TruncatedSeries;
use crate::solver::solve_formal;

/// Returns the transformed equation for `w` and the polynomial `v = u₀ + u₁x + … + u_ℓ x^ℓ`.
///
/// With `D = a t + b v + x^(k+1) c ∂ₓv − t∂ₜv + R(t, x, v + x w, ∂ₓ(v + x w))`
/// the new equation reads `t∂ₜw = D/x + (b + x^k c) w + x^(k+1) c ∂ₓw`, and the
/// parts of `D/x` of degree ≥ 1 in `(w, x∂ₓw)` become Euler-form nonlinear terms.
pub fn prepare_normal_form(eq: &EquationSpec, ell: usize) -> Result<(EquationSpec, TruncatedSeries)> {
    let k = eq.k as usize;
    if ell < k {
        return Err(Error::Invalid(format!("ℓ = {ell} must be at least k = {k}")));
    }
    let report = check_conditions(eq);
    if report.resonance {
        return Err(Error::Resonance { order: eq.resonant_order().unwrap(), value: eq.b0().to_string() });
    }
    if !report.condition_f_prime {
        return Err(Error::Precondition(format!(
            "condition (F′) fails for terms {:?}",
            report.offending_terms_prime
        )));
    }
    let (nt, nx) = eq.trunc;
    let mode = eq.mode;

    // Coefficient order carried by the output equation.
    let xd = if eq.polynomial_coeffs { nx + nt + k + 2 } else { eq.coeff_trunc() };
    if xd < nx + 1 {
        return Err(Error::TruncationOverflow { what: "normal-form coefficients".into(), required: nx + 1 });
    }
    let eqx = eq.with_coeff_order(xd)?;

    let mut low = eq.clone();
    low.trunc = (nt, ell);
    let u = solve_formal(&low)?;
    if u.valid_orders.0 < nt {
        return Err(Error::TruncationOverflow { what: "solution slices u₀..u_ℓ".into(), required: nt });
    }
    let v = u.series.restrict(&[nt, ell]);
    // v is a polynomial in x, so its box may be widened freely.
    let vx = v.extend_polynomial(&[nt, xd + 1]);
    let dv = vx.derive("x")?;
    let vx = vx.restrict(&[nt, xd]);

    let lift = |s: &TruncatedSeries| s.restrict(&[xd]).lift("t", 0, nt);
    let mut d0 = lift(&eqx.a).shift("t", 1)?.restrict(&[nt, xd]);
    d0 = d0.add(&lift(&eqx.b).mul(&vx)?)?;
    d0 = d0.add(&lift(&eqx.c).mul(&dv.shift("x", k + 1)?.restrict(&[nt, xd]))?)?;
    d0 = d0.sub(&vx.euler("t")?)?;

    let jw = eq.max_j() + eq.max_alpha();
    let jd = eq.max_alpha();
    let to4 = |s: &TruncatedSeries| s.lift("w", 2, jw).lift("W", 3, jd);
    let mut d = to4(&d0);
    if !eq.nonlinear.is_empty() {
        let f = eqx.nonlinear_series(nt, xd)?.lift("w", 2, jw).lift("W", 3, jd);
        let mut x_w = TruncatedSeries::zeros(&["t", "x", "w", "W"], &[nt, xd, jw, jd], mode);
        if jw > 0 {
            x_w.set(&[0, 1, 1, 0], Coeff::one(mode));
        }
        let u_sub = to4(&vx).add(&x_w)?;
        let mut w_plus_dw = TruncatedSeries::zeros(&["t", "x", "w", "W"], &[nt, xd, jw, jd], mode);
        if jw > 0 {
            w_plus_dw.set(&[0, 0, 1, 0], Coeff::one(mode));
        }
        if jd > 0 {
            w_plus_dw.set(&[0, 0, 0, 1], Coeff::one(mode));
        }
        let p_sub = match eq.form {
            // ∂ₓ(v + x w) = ∂ₓv + w + x∂ₓw
            DerivativeForm::Plain => to4(&dv).add(&w_plus_dw)?,
            // x∂ₓ(v + x w) = x∂ₓv + x (w + x∂ₓw)
            DerivativeForm::Euler => to4(&vx.euler("x")?).add(&w_plus_dw.shift("x", 1)?.restrict(&[nt, xd, jw, jd]))?,
        };
        let r = f.substitute(&["t", "x", "w", "W"], &[("u", &u_sub), ("v", &p_sub)])?;
        d = d.add(&r)?;
    }
    let d = d.unshift("x", 1).map_err(|_| {
        Error::Precondition("the prepared equation is not divisible by x; condition (F′) fails".into())
    })?;
    let xo = xd - 1;

    let mut a_new = TruncatedSeries::zeros(&["x"], &[xo], mode);
    let mut terms: std::collections::BTreeMap<(usize, usize, usize), TruncatedSeries> = Default::default();
    for (e, c) in d.terms() {
        let (i, m, j, al) = (e[0], e[1], e[2], e[3]);
        if j + al == 0 && i == 1 {
            a_new.set(&[m], c.clone());
            continue;
        }
        if i + j + al < 2 {
            return Err(Error::Numerical(format!(
                "normal form left a term of order < 2: t^{i} x^{m} w^{j} (x∂ₓw)^{al}"
            )));
        }
        let s = terms.entry((i, j, al)).or_insert_with(|| TruncatedSeries::zeros(&["x"], &[xo], mode));
        s.set(&[m], c.clone());
    }
    let too_low = |s: &TruncatedSeries| s.valuation("x").unwrap().is_some_and(|v| v < k);
    if too_low(&a_new) || terms.iter().any(|((_, j, al), s)| j + al == 0 && too_low(s)) {
        return Err(Error::Numerical("normal form valuation check val(ã) ≥ k failed".into()));
    }

    let b_new = eqx.b.add(&eqx.c.shift("x", k)?.restrict(&[xd]))?.restrict(&[xo]);
    let out = EquationSpec {
        a: a_new,
        b: b_new,
        c: eqx.c.restrict(&[xo]),
        k: eq.k,
        nonlinear: terms
            .into_iter()
            .map(|((i, j, alpha), coeff)| NonlinearTerm { i, j, alpha, coeff })
            .collect(),
        form: DerivativeForm::Euler,
        trunc: (nt, nx),
        mode,
        polynomial_coeffs: false,
        allow_resonance: eq.allow_resonance,
    };
    Ok((out.normalized()?, v))
}
