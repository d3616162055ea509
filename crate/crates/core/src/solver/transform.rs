//! Changes of variables and their inverses on truncated series.
//!
//! Boxes shrink where the substitution mixes orders, so a round trip is the
//! identity on the final box rather than on the original one.

use serde::Serialize;

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::series::TruncatedSeries;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransformRecord {
    /// `w(t, z) = u(t, z − f(t))` with `f(0) = 0`.
    ShiftX { f: TruncatedSeries },
    /// `τ = t/x`, `w(τ, x) = u(xτ, x)`.
    SingularTau,
    /// `s = t²`, `w(s, x) = t u(t, x)`.
    SquareS,
    /// `u = v + x w`.
    Prepare { v: TruncatedSeries },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformDirection {
    Forward,
    Inverse,
}

fn check_vars(s: &TruncatedSeries, want: [&str; 2]) -> Result<()> {
    let v: Vec<&str> = s.vars().iter().map(|v| v.as_str()).collect();
    if v != want {
        return Err(Error::VarMismatch(format!("expected a series in {want:?}, got {v:?}")));
    }
    Ok(())
}

/// Applies `record` (or its inverse) to a series.
///
/// Variable names: `(t, x)` ↔ `(t, z)` for the shift, `(t, x)` ↔ `(tau, x)`,
/// `(t, x)` ↔ `(s, x)`, and `(t, x)` ↔ `(t, x)` for the preparation.
pub fn apply_transform(s: &TruncatedSeries, record: &TransformRecord, dir: TransformDirection) -> Result<TruncatedSeries> {
    use TransformDirection::*;
    match (record, dir) {
        (TransformRecord::ShiftX { f }, Forward) => shift_x(s, f, ["t", "x"], "z", false),
        (TransformRecord::ShiftX { f }, Inverse) => shift_x(s, f, ["t", "z"], "x", true),
        (TransformRecord::SingularTau, Forward) => tau_forward(s),
        (TransformRecord::SingularTau, Inverse) => tau_inverse(s),
        (TransformRecord::SquareS, Forward) => square_forward(s),
        (TransformRecord::SquareS, Inverse) => square_inverse(s),
        (TransformRecord::Prepare { v }, Forward) => {
            check_vars(s, ["t", "x"])?;
            s.sub(v)?.unshift("x", 1)
        }
        (TransformRecord::Prepare { v }, Inverse) => {
            check_vars(s, ["t", "x"])?;
            s.shift("x", 1)?.add(v)
        }
    }
}

/// `u(t, y ∓ f(t))` renamed to `(t, to)`.
///
/// Coefficient `tⁿ zᵐ` draws on x-orders up to `m + n`, so the x-box shrinks by `N_t`.
fn shift_x(u: &TruncatedSeries, f: &TruncatedSeries, vars: [&str; 2], to: &str, plus: bool) -> Result<TruncatedSeries> {
    check_vars(u, vars)?;
    if f.nvars() != 1 || f.vars()[0].as_str() != "t" {
        return Err(Error::VarMismatch("shift f must be a series in t".into()));
    }
    if !f.at(&[0]).is_zero() {
        return Err(Error::Precondition("shift needs f(0) = 0".into()));
    }
    let (nt, nx) = (u.trunc()[0], u.trunc()[1]);
    if nx < nt {
        return Err(Error::TruncationOverflow { what: "x-shift".into(), required: nt });
    }
    let out_nx = nx - nt;
    let y = vars[1];
    let lifted = u.lift(to, 2, out_nx);
    let mode = u.mode().join(f.mode());
    let mut sub = TruncatedSeries::zeros(&["t", to], &[nt, out_nx], mode);
    if out_nx > 0 {
        sub.set(&[0, 1], Coeff::one(mode));
    }
    for n in 1..=nt.min(f.trunc()[0]) {
        let c = f.at(&[n]);
        sub.set(&[n, 0], if plus { c } else { -c });
    }
    let r = lifted.substitute(&["t", to], &[(y, &sub)])?;
    Ok(r.restrict(&[nt, out_nx]))
}

/// `u_{n,m} tⁿ xᵐ → τⁿ x^(n+m)`. Rows `n ≥ 1` are known through `x^(N_x+1)`.
fn tau_forward(u: &TruncatedSeries) -> Result<TruncatedSeries> {
    check_vars(u, ["t", "x"])?;
    let (nt, nx) = (u.trunc()[0], u.trunc()[1]);
    let row0_zero = u.slice("t", 0)?.is_zero();
    let px = if row0_zero { nx + 1 } else { nx };
    let mut w = TruncatedSeries::zeros(&["tau", "x"], &[nt, px], u.mode());
    for (e, c) in u.terms() {
        if e[0] + e[1] <= px {
            w.set(&[e[0], e[0] + e[1]], c.clone());
        }
    }
    Ok(w)
}

fn tau_inverse(w: &TruncatedSeries) -> Result<TruncatedSeries> {
    check_vars(w, ["tau", "x"])?;
    let (nt, px) = (w.trunc()[0], w.trunc()[1]);
    if px < nt {
        return Err(Error::TruncationOverflow { what: "inverse τ-rewrite".into(), required: nt });
    }
    let mut u = TruncatedSeries::zeros(&["t", "x"], &[nt, px - nt], w.mode());
    for (e, c) in w.terms() {
        if e[1] < e[0] {
            return Err(Error::Precondition(format!(
                "τ^{} x^{} has no preimage (x-degree below τ-degree)",
                e[0], e[1]
            )));
        }
        if e[1] - e[0] <= px - nt {
            u.set(&[e[0], e[1] - e[0]], c.clone());
        }
    }
    Ok(u)
}

fn square_forward(u: &TruncatedSeries) -> Result<TruncatedSeries> {
    check_vars(u, ["t", "x"])?;
    let (nt, nx) = (u.trunc()[0], u.trunc()[1]);
    let mut w = TruncatedSeries::zeros(&["s", "x"], &[nt.div_ceil(2), nx], u.mode());
    for (e, c) in u.terms() {
        if e[0] % 2 == 0 {
            return Err(Error::Precondition(format!("s = t² needs odd t-powers only, found t^{}", e[0])));
        }
        w.set(&[(e[0] + 1) / 2, e[1]], c.clone());
    }
    Ok(w)
}

fn square_inverse(w: &TruncatedSeries) -> Result<TruncatedSeries> {
    check_vars(w, ["s", "x"])?;
    let (ns, nx) = (w.trunc()[0], w.trunc()[1]);
    let mut u = TruncatedSeries::zeros(&["t", "x"], &[2 * ns, nx], w.mode());
    for (e, c) in w.terms() {
        if e[0] == 0 {
            return Err(Error::Precondition("w must vanish at s = 0".into()));
        }
        u.set(&[2 * e[0] - 1, e[1]], c.clone());
    }
    Ok(u)
}
