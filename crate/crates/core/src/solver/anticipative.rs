//! Formal solution of `t∂ₜu = a(x)t + x²∂ₓu + t(∂ₓu)²` through `s = t²`, `w = tu`.
//!
//! `w = Σ w_{m,n} s^(m+1) xⁿ` solves `2s∂ₛw = a s + w + x²∂ₓw + (∂ₓw)²`, so
//! `(2m+1) w_{m,n} = a_n [m=0] + (n−1) w_{m,n−1} + Σ_{j+l=m−1} Σ_{p+q=n} (p+1)(q+1) w_{j,p+1} w_{l,q+1}`.
//! Each s-order reaches one x-order further into the previous ones.

use serde::Serialize;

use super::{FormalSolution, Provenance};
use crate::coeff::{Coeff, Mode};
use crate::equation::{DerivativeForm, EquationSpec};
use crate::error::{Error, Result};
use crate::series::TruncatedSeries;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnticipativeSolution {
    /// `w(s, x)` on the box `(N_s, N_x)`.
    pub w: TruncatedSeries,
    /// `u(t, x) = w/t` on the box `(2N_s, N_x)`; only odd t-powers occur.
    pub u: FormalSolution,
    /// x-order of `a` the computation consumed.
    pub needed_nx: usize,
}

/// x-order of `a(x)` required for `w` on the box `(N_s, N_x)`.
pub fn anticipative_needed_nx(ns: usize, nx: usize) -> usize {
    nx + ns.saturating_sub(1)
}

/// Computes `w_{m,n}` for `m < N_s`, `n ≤ N_x`.
///
/// `a` must be known through x-order `N_x + N_s − 1`; otherwise the error
/// reports that order.
pub fn solve_anticipative(a: &TruncatedSeries, ns: usize, nx: usize) -> Result<AnticipativeSolution> {
    if a.nvars() != 1 || a.vars()[0].as_str() != "x" {
        return Err(Error::VarMismatch("a must be a series in x".into()));
    }
    if ns == 0 {
        return Err(Error::Invalid("N_s must be at least 1".into()));
    }
    let needed = anticipative_needed_nx(ns, nx);
    if a.trunc()[0] < needed {
        return Err(Error::TruncationOverflow { what: format!("anticipative recursion to s-order {ns}"), required: needed });
    }
    let mode = a.mode();
    // rows[m][n] = w_{m,n} for n ≤ needed − m.
    let mut rows: Vec<Vec<Coeff>> = Vec::with_capacity(ns);
    for m in 0..ns {
        let top = needed - m;
        let inv = Coeff::one(mode) / Coeff::from_int(2 * m as i64 + 1, mode);
        let mut row: Vec<Coeff> = Vec::with_capacity(top + 1);
        for n in 0..=top {
            let mut rhs = if m == 0 { a.at(&[n]) } else { Coeff::zero(mode) };
            if n >= 1 {
                rhs += &row[n - 1].scale_int(n as i64 - 1);
            }
            for j in 0..m {
                let l = m - 1 - j;
                for p in 0..=n {
                    let q = n - p;
                    let wj = &rows[j][p + 1];
                    let wl = &rows[l][q + 1];
                    if wj.is_zero() || wl.is_zero() {
                        continue;
                    }
                    rhs += &(wj * wl).scale_int(((p + 1) * (q + 1)) as i64);
                }
            }
            row.push(&rhs * &inv);
        }
        rows.push(row);
    }
    let mut w = TruncatedSeries::zeros(&["s", "x"], &[ns, nx], mode);
    // Even t-powers vanish, so t^(2N_s) is known as well.
    let nt = 2 * ns;
    let mut u = TruncatedSeries::zeros(&["t", "x"], &[nt, nx], mode);
    for (m, row) in rows.iter().enumerate() {
        for n in 0..=nx {
            w.set(&[m + 1, n], row[n].clone());
            u.set(&[2 * m + 1, n], row[n].clone());
        }
    }
    Ok(AnticipativeSolution {
        w,
        u: FormalSolution {
            series: u,
            valid_orders: (nt, nx),
            provenance: Provenance::Anticipative,
            residual_order: (nt, nx.saturating_sub(1)),
            warnings: Vec::new(),
        },
        needed_nx: needed,
    })
}

/// Runs [`solve_anticipative`] on a spec of the form `a, b = 0, c = 1, k = 1, a_{1,0,2} = 1`.
///
/// The spec truncation `(N_t, N_x)` maps to `N_s = ⌈N_t/2⌉`.
pub fn solve_anticipative_spec(eq: &EquationSpec) -> Result<AnticipativeSolution> {
    let one = Coeff::one(Mode::Exact).to_mode(eq.mode);
    let shape_ok = eq.k == 1
        && eq.form == DerivativeForm::Plain
        && eq.b.is_zero()
        && eq.c_is_constant()
        && eq.c0() == one
        && eq.nonlinear.len() == 1
        && (eq.nonlinear[0].i, eq.nonlinear[0].j, eq.nonlinear[0].alpha) == (1, 0, 2)
        && eq.nonlinear[0].coeff.terms().all(|(e, c)| e[0] == 0 && *c == one);
    if !shape_ok {
        return Err(Error::Invalid(
            "anticipative solver needs t∂ₜu = a(x)t + x²∂ₓu + t(∂ₓu)²".into(),
        ));
    }
    let ns = eq.trunc.0.div_ceil(2);
    let needed = anticipative_needed_nx(ns, eq.trunc.1);
    let eqx = eq.with_coeff_order(needed)?;
    let mut sol = solve_anticipative(&eqx.a, ns, eq.trunc.1)?;
    sol.u.series = sol.u.series.restrict(&[eq.trunc.0, eq.trunc.1]);
    sol.u.valid_orders.0 = eq.trunc.0;
    sol.u.residual_order.0 = eq.trunc.0;
    Ok(sol)
}
