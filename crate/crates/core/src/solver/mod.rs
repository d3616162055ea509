//! Truncated formal solutions and auxiliary series equations.

mod anticipative;
mod fuchsian;
mod majorant;
mod transform;

pub use anticipative::{anticipative_needed_nx, solve_anticipative, solve_anticipative_spec, AnticipativeSolution};
pub use fuchsian::{fuchsian_ode_solve, geometric_growth, transf_rhs, FuchsianForm};
pub use majorant::{majorant_series, MajorantTerm};
pub use transform::{apply_transform, TransformDirection, TransformRecord};

use serde::Serialize;

use crate::coeff::{Coeff, Mode};
use crate::equation::{DerivativeForm, EquationSpec};
use crate::error::{Error, Result};
use crate::series::{compose, TruncatedSeries};

/// Which procedure produced a [`FormalSolution`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    StandardRecursion,
    Anticipative,
    Fuchsian,
    Majorant,
    Transformed,
}

/// Truncated formal solution `û(t, x)` with `û(0, x) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FormalSolution {
    pub series: TruncatedSeries,
    pub valid_orders: (usize, usize),
    pub provenance: Provenance,
    /// Box on which the PDE residual is certified to vanish (exact mode).
    pub residual_order: (usize, usize),
    pub warnings: Vec<String>,
}

/// Solves the equation order by order in `t`.
///
/// For each t-order `n` the x-coefficients follow from
/// `(n − b(0)) u_{n,m} = [n=1] a_m + Σ_{p≥1} b_p u_{n,m−p} + Σ_p c_p (m−k−p) u_{n,m−k−p} + N_{n,m}`
/// where `N_n` is the t-order n part of the nonlinear terms evaluated on `u_1..u_{n−1}`.
pub fn solve_formal(eq: &EquationSpec) -> Result<FormalSolution> {
    let (nt, nx) = eq.trunc;
    let plain = eq.has_plain_derivative_terms();
    // Each t-order consumes one x-order through ∂ₓu in plain form.
    let xbox = if plain { nx + nt - 1 } else { nx };
    let eqx = eq.with_coeff_order(xbox)?;
    let mode = eq.mode;
    let k = eq.k as usize;
    let b0 = eq.b0();
    let a = eqx.a.to_mode(mode);
    let b = eqx.b.to_mode(mode);
    let c = eqx.c.to_mode(mode);

    let mut u = TruncatedSeries::zeros(&["t", "x"], &[nt, xbox], mode);
    let mut warnings = Vec::new();
    let mut reached = nt;
    for n in 1..=nt {
        let denom = Coeff::from_int(n as i64, mode) - &b0;
        let xn = if plain { xbox - (n - 1) } else { xbox };
        if denom.abs() < 1e-12 || denom.is_zero() {
            if !eq.allow_resonance {
                return Err(Error::Resonance { order: n as u64, value: b0.to_string() });
            }
            warnings.push(format!("resonance at t-order {n}: solution stopped at order {}", n - 1));
            reached = n - 1;
            break;
        }
        let nonlin = if n >= 2 && !eq.nonlinear.is_empty() {
            Some(nonlinear_order(&eqx, &u, n, xn)?)
        } else {
            None
        };
        for m in 0..=xn {
            let mut rhs = if n == 1 { a.at(&[m]) } else { Coeff::zero(mode) };
            for p in 1..=m {
                let bp = b.at(&[p]);
                if !bp.is_zero() {
                    rhs += &(&bp * &u.at(&[n, m - p]));
                }
            }
            if m > k {
                for p in 0..=(m - k - 1) {
                    let r = m - k - p;
                    let cp = c.at(&[p]);
                    if !cp.is_zero() {
                        rhs += &(&cp.scale_int(r as i64) * &u.at(&[n, r]));
                    }
                }
            }
            if let Some(nl) = &nonlin {
                rhs += &nl.at(&[m]);
            }
            u.set(&[n, m], &rhs / &denom);
        }
    }

    let out_nx = nx;
    let series = u.restrict(&[reached, out_nx]);
    let residual_x = if plain { nx.saturating_sub(1) } else { nx };
    Ok(FormalSolution {
        series,
        valid_orders: (reached, out_nx),
        provenance: Provenance::StandardRecursion,
        residual_order: (reached, residual_x),
        warnings,
    })
}

/// t-order `n` coefficient of the nonlinear terms on the partial solution `u_1..u_{n−1}`.
fn nonlinear_order(eq: &EquationSpec, u: &TruncatedSeries, n: usize, xn: usize) -> Result<TruncatedSeries> {
    let plain = eq.form == DerivativeForm::Plain;
    // Lower orders are known one x-order further than order n needs in plain form.
    let ubox = if plain && eq.max_alpha() > 0 { xn + 1 } else { xn };
    let part = u.restrict(&[n - 1, ubox]).extend_polynomial(&[n, ubox]);
    let d = if eq.max_alpha() == 0 {
        TruncatedSeries::zeros(&["t", "x"], &[n, xn], u.mode())
    } else {
        eq.derivative_argument(&part)?.restrict(&[n, xn])
    };
    let f = eq.nonlinear_series(n, xn)?;
    let r = compose(&f, &part.restrict(&[n, xn]), &d)?;
    r.slice("t", n)
}

impl FormalSolution {
    /// Coefficient of `tⁿ` as a series in `x`.
    pub fn slice(&self, n: usize) -> Result<TruncatedSeries> {
        self.series.slice("t", n)
    }

    /// PDE residual of this solution, restricted to `residual_order`.
    pub fn residual(&self, eq: &EquationSpec) -> Result<TruncatedSeries> {
        let r = eq.residual(&self.series)?;
        Ok(r.restrict(&[self.residual_order.0, self.residual_order.1]))
    }
}

/// True when every coefficient of `s` is zero (exact) or below `tol` (float).
pub fn is_negligible(s: &TruncatedSeries, tol: f64) -> bool {
    match s.mode() {
        Mode::Exact => s.is_zero(),
        Mode::Float => s.max_abs() <= tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equation::parse_spec;

    fn euler(nt: usize, nx: usize) -> EquationSpec {
        parse_spec(&format!(r#"{{"k":1,"a":"x","b":"0","c":"1","trunc":[{nt},{nx}]}}"#), false).unwrap()
    }

    #[test]
    fn euler_solution_is_factorials() {
        let eq = euler(6, 8);
        let sol = solve_formal(&eq).unwrap();
        let mut fact = 1i64;
        for n in 0..8 {
            if n > 0 {
                fact *= n as i64;
            }
            assert_eq!(sol.series.at(&[1, n + 1]), Coeff::from_int(fact, Mode::Exact), "n = {n}");
        }
        for t in 2..=6 {
            assert!(sol.slice(t).unwrap().is_zero());
        }
        assert!(sol.residual(&eq).unwrap().is_zero());
    }

    #[test]
    fn zero_forcing_gives_zero() {
        let eq = parse_spec(r#"{"k":1,"a":"0","b":"0","c":"1","nonlinear":{"0,2,0":"1"}}"#, false).unwrap();
        assert!(solve_formal(&eq).unwrap().series.is_zero());
    }

    #[test]
    fn linear_constant_b() {
        // (1-β)u₁ - x²u₁' = x with β = -1.
        let eq = parse_spec(r#"{"k":1,"a":"x","b":"-1","c":"1","trunc":[2,6]}"#, false).unwrap();
        let sol = solve_formal(&eq).unwrap();
        assert_eq!(sol.series.at(&[1, 1]), Coeff::ratio(1, 2));
        assert_eq!(sol.series.at(&[1, 2]), Coeff::ratio(1, 4));
        // Independent oracle: (1-β)c_m - (m-1)c_{m-1} = a_m.
        let mut prev = Coeff::zero(Mode::Exact);
        for m in 1..=6 {
            let am = if m == 1 { 1 } else { 0 };
            let cm = (Coeff::from_int(am, Mode::Exact) + prev.scale_int(m - 1)) / Coeff::from_int(2, Mode::Exact);
            assert_eq!(sol.series.at(&[1, m as usize]), cm);
            prev = cm;
        }
        assert!(sol.slice(2).unwrap().is_zero());
    }

    #[test]
    fn nonlinear_residual_vanishes() {
        let spec = r#"{"k":2,"a":"x^2+x^3","b":"1/2+x","c":"1-x","trunc":[5,7],
            "nonlinear":{"0,2,0":"1","1,1,1":"x","0,0,2":"x^2","2,0,0":"x^3"}}"#;
        let eq = parse_spec(spec, false).unwrap();
        let sol = solve_formal(&eq).unwrap();
        assert_eq!(sol.residual_order, (5, 6));
        assert!(sol.residual(&eq).unwrap().is_zero());
    }

    #[test]
    fn resonance_is_reported_or_stops() {
        let eq = parse_spec(r#"{"k":1,"a":"x","b":"2","c":"1","trunc":[4,4]}"#, true).unwrap();
        let sol = solve_formal(&eq).unwrap();
        assert_eq!(sol.valid_orders.0, 1);
        assert!(!sol.warnings.is_empty());
    }
}
