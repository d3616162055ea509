//! Triangular series ODEs `t y′ = G(t, y)` and `y = H(t, y, t y′)` with `y(0) = 0`.

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::series::TruncatedSeries;

/// Shape of the auxiliary equation.
#[derive(Clone, Debug)]
pub enum FuchsianForm {
    /// `t y′ = G(t, y)` with `G` in variables `(t, y)`.
    Derivative(TruncatedSeries),
    /// `y = H(t, y, z)` at `z = t y′`, with `H` in variables `(t, y, z)`.
    Implicit(TruncatedSeries),
}

/// Solves the equation through t-order `n`.
///
/// Order `n` is linear in `y_n`: `(n − G_y) y_n = …` in derivative form and
/// `(1 − H_y − n H_z) y_n = …` in implicit form, with the right side built
/// from lower orders only.
pub fn fuchsian_ode_solve(form: &FuchsianForm, n: usize) -> Result<TruncatedSeries> {
    let (g, names): (&TruncatedSeries, &[&str]) = match form {
        FuchsianForm::Derivative(g) => (g, &["t", "y"]),
        FuchsianForm::Implicit(h) => (h, &["t", "y", "z"]),
    };
    let vars: Vec<&str> = g.vars().iter().map(|v| v.as_str()).collect();
    if vars != names {
        return Err(Error::VarMismatch(format!("expected a series in {names:?}, got {vars:?}")));
    }
    if g.trunc()[0] < n {
        return Err(Error::TruncationOverflow { what: "Fuchsian right-hand side".into(), required: n });
    }
    let mode = g.mode();
    let zero_e = vec![0; g.nvars()];
    if !g.at(&zero_e).is_zero() {
        return Err(Error::Precondition("right-hand side must vanish at the origin".into()));
    }
    let mut lin = vec![0; g.nvars()];
    lin[1] = 1;
    let lin_z = [0, 0, 1];
    let g_y = g.coeff(&lin).cloned().unwrap_or_else(|| Coeff::zero(mode));
    let g_z = if g.nvars() == 3 { g.coeff(&lin_z).cloned() } else { None }.unwrap_or_else(|| Coeff::zero(mode));
    // Remainder without the linear terms in the unknown.
    let mut rest = g.clone();
    if !g_y.is_zero() {
        rest.set(&lin, Coeff::zero(mode));
    }
    if !g_z.is_zero() {
        rest.set(&lin_z, Coeff::zero(mode));
    }

    let mut y = TruncatedSeries::zeros(&["t"], &[n], mode);
    for order in 1..=n {
        let denom = match form {
            FuchsianForm::Derivative(_) => Coeff::from_int(order as i64, mode) - &g_y,
            FuchsianForm::Implicit(_) => Coeff::one(mode) - &g_y - g_z.scale_int(order as i64),
        };
        if denom.is_zero() || denom.abs() < 1e-14 {
            return Err(Error::Precondition(format!("resonant order {order} in the auxiliary ODE")));
        }
        let part = y.restrict(&[order]);
        let rhs = eval_rest(&rest, &part, order)?;
        y.set(&[order], &rhs.at(&[order]) / &denom);
    }
    Ok(y)
}

/// `rest(t, y, t y′)` on the t-box `order`, for `y` known below `order`.
fn eval_rest(rest: &TruncatedSeries, y: &TruncatedSeries, order: usize) -> Result<TruncatedSeries> {
    let mut tr = rest.trunc().to_vec();
    tr[0] = order;
    let r = rest.restrict(&tr);
    if r.nvars() == 2 {
        r.substitute(&["t"], &[("y", y)])
    } else {
        let z = y.euler("t")?;
        r.substitute(&["t"], &[("y", y), ("z", &z)])
    }
}

/// Right side `a₂(t, −y) y^(k+1) + a₃(t, −y) t` as a series in `(t, y)`.
///
/// `a2`, `a3` are series in `(t, x)`; the result is truncated at `y`-degree `ydeg`.
pub fn transf_rhs(a2: &TruncatedSeries, a3: &TruncatedSeries, k: u32, ydeg: usize) -> Result<TruncatedSeries> {
    for s in [a2, a3] {
        let v: Vec<&str> = s.vars().iter().map(|v| v.as_str()).collect();
        if v != ["t", "x"] {
            return Err(Error::VarMismatch("a₂, a₃ must be series in (t, x)".into()));
        }
    }
    let nt = a2.trunc()[0].min(a3.trunc()[0] + 1);
    let mode = a2.mode().join(a3.mode());
    let mut g = TruncatedSeries::zeros(&["t", "y"], &[nt, ydeg], mode);
    let k = k as usize;
    // Coefficient of (−y)^m contributes with sign (−1)^m.
    let mut add = |i: usize, deg: usize, m: usize, c: &Coeff| {
        if i <= nt && deg <= ydeg {
            let signed = if m % 2 == 0 { c.clone() } else { -c.clone() };
            let cur = g.at(&[i, deg]);
            g.set(&[i, deg], &cur + &signed);
        }
    };
    for (e, c) in a2.terms() {
        add(e[0], e[1] + k + 1, e[1], c);
    }
    for (e, c) in a3.terms() {
        add(e[0] + 1, e[1], e[1], c);
    }
    Ok(g)
}

/// Root-test growth estimate `ρ ≈ |y_n|^(1/n)` fitted over the upper half of the coefficients.
///
/// Advisory: a bounded value is consistent with a convergent series.
pub fn geometric_growth(y: &TruncatedSeries) -> Option<f64> {
    let c = y.to_c64_vec();
    let n = c.len() - 1;
    let pts: Vec<(f64, f64)> = (n / 2..=n)
        .filter(|&i| i > 0 && c[i].norm() > 0.0)
        .map(|i| (i as f64, c[i].norm().ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx).powi(2)));
    Some((num / den).exp())
}

#[cfg(test)]
/// Convenience: a series in `names` from `(exponents, value)` pairs.
pub(crate) fn from_terms(names: &[&str], trunc: &[usize], mode: crate::coeff::Mode, terms: &[(&[usize], Coeff)]) -> TruncatedSeries {
    let mut s = TruncatedSeries::zeros(names, trunc, mode);
    for (e, c) in terms {
        let cur = s.at(e);
        s.set(e, &cur + c);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Mode;

    fn one() -> Coeff {
        Coeff::one(Mode::Exact)
    }

    #[test]
    fn riccati_example() {
        // t y' = y² + t
        let g = from_terms(&["t", "y"], &[6, 2], Mode::Exact, &[(&[0, 2], one()), (&[1, 0], one())]);
        let y = fuchsian_ode_solve(&FuchsianForm::Derivative(g.clone()), 6).unwrap();
        assert_eq!(y.at(&[1]), one());
        assert_eq!(y.at(&[2]), Coeff::ratio(1, 2));
        assert_eq!(y.at(&[3]), Coeff::ratio(1, 3));
        // Independent oracle: fixed-point iteration y ← ∫ (y² + t)/t.
        let mut z = TruncatedSeries::zeros(&["t"], &[6], Mode::Exact);
        for _ in 0..7 {
            let mut rhs = z.mul(&z).unwrap();
            rhs.set(&[1], &rhs.at(&[1]) + &one());
            let mut next = TruncatedSeries::zeros(&["t"], &[6], Mode::Exact);
            for n in 1..=6 {
                next.set(&[n], &rhs.at(&[n]) / &Coeff::from_int(n as i64, Mode::Exact));
            }
            z = next;
        }
        assert_eq!(y, z);
    }

    #[test]
    fn zero_forcing() {
        let g = from_terms(&["t", "y"], &[5, 2], Mode::Exact, &[(&[0, 2], one())]);
        assert!(fuchsian_ode_solve(&FuchsianForm::Derivative(g), 5).unwrap().is_zero());
        let g = transf_rhs(
            &from_terms(&["t", "x"], &[5, 3], Mode::Exact, &[(&[0, 0], one())]),
            &TruncatedSeries::zeros(&["t", "x"], &[5, 3], Mode::Exact),
            1,
            4,
        )
        .unwrap();
        assert!(fuchsian_ode_solve(&FuchsianForm::Derivative(g), 5).unwrap().is_zero());
    }

    #[test]
    fn transf_rhs_matches_riccati() {
        let a = from_terms(&["t", "x"], &[6, 3], Mode::Exact, &[(&[0, 0], one())]);
        let g = transf_rhs(&a, &a, 1, 4).unwrap();
        assert_eq!(g.at(&[0, 2]), one());
        assert_eq!(g.at(&[1, 0]), one());
        let y = fuchsian_ode_solve(&FuchsianForm::Derivative(g), 5).unwrap();
        assert_eq!(y.at(&[3]), Coeff::ratio(1, 3));
    }

    #[test]
    fn implicit_majorant_example() {
        // y = t + (t y')²
        let h = from_terms(&["t", "y", "z"], &[5, 1, 2], Mode::Exact, &[(&[1, 0, 0], one()), (&[0, 0, 2], one())]);
        let y = fuchsian_ode_solve(&FuchsianForm::Implicit(h), 5).unwrap();
        assert_eq!(y.at(&[1]), one());
        assert_eq!(y.at(&[2]), one());
        assert_eq!(y.at(&[3]), Coeff::from_int(4, Mode::Exact));
    }

    #[test]
    fn growth_of_geometric_series() {
        let y = TruncatedSeries::univariate("t", (0..20).map(|n| Coeff::float(2f64.powi(n), 0.0)).collect(), 19);
        assert!((geometric_growth(&y).unwrap() - 2.0).abs() < 1e-9);
    }
}
