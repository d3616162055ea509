//! Borel-plane form of the equation: the family `ũₙ(ξ)`, its convolution
//! equations, singular points, the σ lower bound and two continuation oracles.
//!
//! With the classical level-k transform `xⁿ ↦ ξ^{n−k}/Γ(n/k)` products become
//! level-k convolutions, `x^{k+1}∂ₓ` becomes multiplication by `kξᵏ` and `x∂ₓ`
//! becomes `ξ∂ξ + k`. Order `n` in `t` then reads
//! `(n − b₀ − kc₀ξᵏ) ũₙ = [n=1]A + B ∗ ũₙ + C ∗ (kξᵏũₙ) + Fₙ`.

mod perturbation;
mod singular;
mod volterra;

pub use perturbation::perturbation_log_expansion;
pub use singular::{sigma_bound, singular_scan, SingularData};
pub use volterra::{volterra_from_order, volterra_solve, Ray, VolterraSolution};

use serde::Serialize;

use crate::coeff::{Coeff, Mode};
use crate::equation::{DerivativeForm, EquationSpec};
use crate::error::{Error, Result};
use crate::series::{BorelKernel, TruncatedSeries};
use crate::solver::FormalSolution;

/// Borel image of one nonlinear term `a_{ijα}(x) tⁱ uʲ (x∂ₓu)^α`,
/// split as `a_{ijα}(0) δ + Ã_{ijα}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BorelTerm {
    pub i: usize,
    pub j: usize,
    pub alpha: usize,
    pub a0: Coeff,
    pub coeff: TruncatedSeries,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BorelFamily {
    pub k: u32,
    /// `members[n−1] = ũₙ(ξ)`.
    pub members: Vec<TruncatedSeries>,
    pub b0: Coeff,
    pub c0: Coeff,
    /// Borel images of `a`, `b − b₀`, `c − c₀`.
    pub a: TruncatedSeries,
    pub b: TruncatedSeries,
    pub c: TruncatedSeries,
    pub nonlinear: Vec<BorelTerm>,
    /// ξ-degree through which the convolution equations are certified.
    pub certified: usize,
}

/// Classical level-k Borel transform `x → ξ` with a message naming the offending series.
fn borel_x(s: &TruncatedSeries, k: u32, what: &str) -> Result<TruncatedSeries> {
    s.formal_borel_k("x", "xi", k, BorelKernel::Classical).map_err(|e| match e {
        Error::Precondition(_) => {
            Error::Precondition(format!("{what} has nonzero x-coefficients below order {k}"))
        }
        other => other,
    })
}

/// Splits `f(x)` into `f(0)` and the Borel image of `f − f(0)`.
fn split_coeff(f: &TruncatedSeries, k: u32, what: &str) -> Result<(Coeff, TruncatedSeries)> {
    let f0 = f.at(&[0]);
    let mut rest = f.clone();
    rest.set(&[0], Coeff::zero(f.mode()));
    Ok((f0, borel_x(&rest, k, what)?))
}

/// Builds `ũₙ = B̂_k uₙ` and the Borel images of the coefficients.
///
/// The equation must be in Euler form or free of derivative nonlinearities;
/// plain-form `∂ₓu` terms have no Borel-plane counterpart and must be prepared first.
pub fn borel_coefficients(sol: &FormalSolution, eq: &EquationSpec) -> Result<BorelFamily> {
    if eq.form == DerivativeForm::Plain && eq.max_alpha() > 0 {
        return Err(Error::Precondition(
            "the Borel-plane equation needs the x∂ₓu (Euler) form; prepare the equation first".into(),
        ));
    }
    let k = eq.k;
    let (nt, nx) = (sol.valid_orders.0, sol.valid_orders.1);
    if nx < k as usize {
        return Err(Error::TruncationOverflow { what: "Borel family".into(), required: k as usize });
    }
    let eqx = eq.with_coeff_order(nx)?;
    let u = sol.series.restrict(&[nt, nx]);
    let ut = borel_x(&u, k, "the formal solution")?;
    let members = (1..=nt).map(|n| ut.slice("t", n)).collect::<Result<Vec<_>>>()?;
    let a = borel_x(&eqx.a, k, "a(x)")?;
    let (b0, b) = split_coeff(&eqx.b, k, "b(x) − b(0)")?;
    let (c0, c) = split_coeff(&eqx.c, k, "c(x) − c(0)")?;
    let mut nonlinear = Vec::with_capacity(eqx.nonlinear.len());
    for t in &eqx.nonlinear {
        let (a0, coeff) = split_coeff(&t.coeff, k, &format!("a_{{{},{},{}}} − a_{{{},{},{}}}(0)", t.i, t.j, t.alpha, t.i, t.j, t.alpha))?;
        if t.j + t.alpha == 0 && !a0.is_zero() {
            return Err(Error::Precondition(format!(
                "a_{{{},0,0}}(0) ≠ 0 has no Borel image; prepare the equation first",
                t.i
            )));
        }
        nonlinear.push(BorelTerm { i: t.i, j: t.j, alpha: t.alpha, a0, coeff });
    }
    Ok(BorelFamily { k, members, b0, c0, a, b, c, nonlinear, certified: nx - k as usize })
}

impl BorelFamily {
    pub fn mode(&self) -> Mode {
        self.members.first().map_or(Mode::Exact, |m| m.mode())
    }

    pub fn nt(&self) -> usize {
        self.members.len()
    }

    /// `ũₙ`, `n ≥ 1`.
    pub fn member(&self, n: usize) -> Result<&TruncatedSeries> {
        self.members
            .get(n.wrapping_sub(1))
            .ok_or_else(|| Error::Invalid(format!("order n = {n} outside 1..={}", self.members.len())))
    }

    fn conv(&self, f: &TruncatedSeries, g: &TruncatedSeries) -> Result<TruncatedSeries> {
        f.convolve_level(g, "xi", self.k)
    }

    /// `ũ(t, ξ) = Σ ũₙ tⁿ`.
    fn joint(&self) -> TruncatedSeries {
        let nxi = self.certified;
        let mut u = TruncatedSeries::zeros(&["t", "xi"], &[self.nt(), nxi], self.mode());
        for (idx, m) in self.members.iter().enumerate() {
            for (e, c) in m.terms() {
                if e[0] <= nxi {
                    u.set(&[idx + 1, e[0]], c.clone());
                }
            }
        }
        u
    }

    /// `Σ tⁱ (a₀ X + Ã ∗ X)` with `X = ũ^{∗j} ∗ ((ξ∂ξ + k)ũ)^{∗α}`.
    fn nonlinear_part(&self) -> Result<TruncatedSeries> {
        let u = self.joint();
        let bx = u.trunc().to_vec();
        let mode = u.mode();
        let dk = u.euler("xi")?.add(&u.scale(&Coeff::from_int(self.k as i64, mode)))?;
        let mut total = TruncatedSeries::zeros(&["t", "xi"], &bx, mode);
        for term in &self.nonlinear {
            let ct = term.coeff.restrict(&[bx[1]]).to_mode(mode).lift("t", 0, bx[0]);
            let piece = if term.j + term.alpha == 0 {
                ct
            } else {
                let mut x: Option<TruncatedSeries> = None;
                for f in std::iter::repeat(&u).take(term.j).chain(std::iter::repeat(&dk).take(term.alpha)) {
                    x = Some(match x {
                        None => f.clone(),
                        Some(acc) => self.conv(&acc, f)?,
                    });
                }
                let x = x.unwrap();
                x.scale(&term.a0.clone().to_mode(mode)).add(&self.conv(&ct, &x)?)?
            };
            let shifted = piece.shift("t", term.i)?.restrict(&bx);
            total = total.add(&shifted.to_mode(total.mode().join(shifted.mode())))?;
        }
        Ok(total)
    }

    /// `Fₙ`, the t-order `n` part of the nonlinear terms; depends on `ũ₁..ũ_{n−1}` only.
    pub fn forcing(&self, n: usize) -> Result<TruncatedSeries> {
        self.member(n)?;
        self.nonlinear_part()?.slice("t", n)
    }

    /// `kξᵏ f`.
    fn times_kxi_k(&self, f: &TruncatedSeries) -> Result<TruncatedSeries> {
        let k = self.k as usize;
        Ok(f.shift("xi", k)?.restrict(f.trunc()).scale(&Coeff::from_int(k as i64, f.mode())))
    }
}

/// `(n − b₀ − kc₀ξᵏ)ũₙ − ([n=1]A + B∗ũₙ + C∗(kξᵏũₙ) + Fₙ)` through the certified degree.
pub fn convolution_residual(fam: &BorelFamily, n: usize) -> Result<TruncatedSeries> {
    let un = fam.member(n)?.clone();
    let box_ = [fam.certified];
    let mode = un.mode();
    let un = un.restrict(&box_);
    let kxu = fam.times_kxi_k(&un)?;
    let lhs = un
        .scale(&(Coeff::from_int(n as i64, mode) - fam.b0.clone().to_mode(mode)))
        .sub(&kxu.scale(&fam.c0.clone().to_mode(mode)))?;
    let mut rhs = fam.forcing(n)?.restrict(&box_);
    if n == 1 {
        rhs = rhs.add(&fam.a.restrict(&box_).to_mode(rhs.mode()))?;
    }
    let bu = fam.conv(&fam.b.restrict(&box_).to_mode(mode), &un)?;
    let cu = fam.conv(&fam.c.restrict(&box_).to_mode(mode), &kxu)?;
    let rhs = rhs.to_mode(rhs.mode().join(bu.mode())).add(&bu)?.add(&cu)?;
    let lhs = lhs.to_mode(lhs.mode().join(rhs.mode()));
    lhs.sub(&rhs)
}

/// `P f = ∂ξ²(ξ f)`.
pub fn p_operator(f: &TruncatedSeries) -> Result<TruncatedSeries> {
    f.shift("xi", 1)?.derive("xi")?.derive("xi")
}

/// Residual of the Borel-plane equations for `w = Σ v_m(x) s^{m+1}` solving
/// `2s∂ₛw = a s + w + x²∂ₓw + (∂ₓw)²`.
///
/// With `ṽ_m = B̂(v_m − w_{m,0} − w_{m,1}x)` and `A = B̂(a − a(0))`:
/// `(2m+1−ξ)ṽ_m = α̃_m + 2Σ_{ℓ=0}^{m−1} w_{ℓ,1} Pṽ_{m−ℓ−1} + Σ_{ℓ=0}^{m−1} Pṽ_ℓ ∗ Pṽ_{m−ℓ−1}`
/// where `α̃_m = [m=0]A − w_{m,1}(2m+1−ξ)`. Returned through ξ-degree `N_x − 2`.
pub fn w_family_residual(w: &TruncatedSeries, a: &TruncatedSeries, m: usize) -> Result<TruncatedSeries> {
    let (ns, nx) = (w.trunc_of("s")?, w.trunc_of("x")?);
    if m >= ns {
        return Err(Error::Invalid(format!("s-order m = {m} needs N_s > {m}")));
    }
    if nx < 3 {
        return Err(Error::TruncationOverflow { what: "w-family residual".into(), required: 3 });
    }
    let mode = w.mode();
    let cert = nx - 2;
    let v_tilde = |l: usize| -> Result<TruncatedSeries> {
        let mut v = w.slice("s", l + 1)?;
        v.set(&[0], Coeff::zero(mode));
        v.set(&[1], Coeff::zero(mode));
        borel_x(&v, 1, "v_m")
    };
    let w1 = |l: usize| w.at(&[l + 1, 1]);
    let vs: Vec<TruncatedSeries> = (0..=m).map(v_tilde).collect::<Result<_>>()?;
    let pv: Vec<TruncatedSeries> = vs.iter().map(p_operator).collect::<Result<_>>()?;
    let two_m1 = Coeff::from_int(2 * m as i64 + 1, mode);
    let factor = |f: &TruncatedSeries| -> Result<TruncatedSeries> {
        let f = f.restrict(&[cert]);
        f.scale(&two_m1).sub(&f.shift("xi", 1)?.restrict(&[cert]))
    };
    let lhs = factor(&vs[m])?;
    let mut one = TruncatedSeries::zeros(&["xi"], &[cert], mode);
    one.set(&[0], Coeff::one(mode));
    let mut rhs = factor(&one)?.scale(&(-w1(m)));
    if m == 0 {
        let mut a_rest = a.restrict(&[nx]).to_mode(mode);
        a_rest.set(&[0], Coeff::zero(mode));
        rhs = rhs.add(&borel_x(&a_rest, 1, "a − a(0)")?.restrict(&[cert]))?;
    }
    for l in 0..m {
        let p = &pv[m - l - 1];
        rhs = rhs.add(&p.restrict(&[cert]).scale(&w1(l).scale_int(2)))?;
        rhs = rhs.add(&pv[l].restrict(&[cert]).convolve(&p.restrict(&[cert]), "xi")?)?;
    }
    lhs.sub(&rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equation::{parse_spec, prepare_normal_form};
    use crate::solver::{solve_anticipative, solve_formal};

    fn family(spec: &str) -> (EquationSpec, BorelFamily) {
        let eq = parse_spec(spec, false).unwrap();
        let sol = solve_formal(&eq).unwrap();
        let fam = borel_coefficients(&sol, &eq).unwrap();
        (eq, fam)
    }

    #[test]
    fn euler_family_is_geometric() {
        let (_, fam) = family(r#"{"k":1,"a":"x","b":"0","c":"1","trunc":[3,10]}"#);
        let u1 = fam.member(1).unwrap();
        for n in 0..=9 {
            assert_eq!(u1.at(&[n]), Coeff::from_int(1, Mode::Exact));
        }
        assert!(fam.b.is_zero());
        assert!(convolution_residual(&fam, 1).unwrap().is_zero());
        // Telescoping oracle: (1 − ξ) Σ_{n≤N} ξⁿ = 1 − ξ^{N+1}.
        let lhs = u1.sub(&u1.shift("xi", 1).unwrap().restrict(&[9])).unwrap();
        let mut one = TruncatedSeries::zeros(&["xi"], &[9], Mode::Exact);
        one.set(&[0], Coeff::one(Mode::Exact));
        assert_eq!(lhs, one);
    }

    #[test]
    fn single_monomial() {
        let (_, fam) = family(r#"{"k":1,"a":"x","b":"0","c":"1","trunc":[1,1]}"#);
        assert_eq!(fam.member(1).unwrap().at(&[0]), Coeff::one(Mode::Exact));
    }

    #[test]
    fn zero_forcing_linear() {
        let (_, fam) = family(r#"{"k":1,"a":"0","b":"1/3+x","c":"1","trunc":[3,6]}"#);
        assert!(fam.member(1).unwrap().is_zero());
        assert!(convolution_residual(&fam, 1).unwrap().is_zero());
    }

    #[test]
    fn nonlinear_residuals_vanish() {
        let spec = r#"{"k":1,"a":"x+x^2","b":"1/2+x","c":"1-1/3x","trunc":[5,8],"form":"euler",
            "nonlinear":{"0,2,0":"1+x","1,1,1":"x","0,0,2":"2","2,0,0":"x^2"}}"#;
        let (_, fam) = family(spec);
        for n in 1..=5 {
            assert!(convolution_residual(&fam, n).unwrap().is_zero(), "n = {n}");
        }
    }

    #[test]
    fn prepared_equation_residuals_vanish() {
        let eq = parse_spec(r#"{"k":1,"a":"x","b":"1/2","c":"1","nonlinear":{"0,2,0":"1","1,0,1":"x"},"trunc":[4,7]}"#, false)
            .unwrap();
        let (ne, _) = prepare_normal_form(&eq, 1).unwrap();
        let sol = solve_formal(&ne).unwrap();
        let fam = borel_coefficients(&sol, &ne).unwrap();
        for n in 1..=4 {
            assert!(convolution_residual(&fam, n).unwrap().is_zero(), "n = {n}");
        }
    }

    #[test]
    fn level_two_residual_is_small() {
        let spec = r#"{"k":2,"a":"x^2+x^3","b":"1/3+x^2","c":"1+x^2","trunc":[4,9],"form":"euler",
            "nonlinear":{"0,2,0":"1","1,1,1":"x^2"}}"#;
        let (_, fam) = family(spec);
        for n in 1..=4 {
            let r = convolution_residual(&fam, n).unwrap();
            let scale = fam.member(n).unwrap().max_abs().max(1.0);
            assert!(r.max_abs() < 1e-12 * scale, "n = {n}: {}", r.max_abs());
        }
    }

    #[test]
    fn plain_derivative_terms_rejected() {
        let eq = parse_spec(r#"{"k":1,"a":"x","b":"0","c":"1","nonlinear":{"1,0,2":"1"}}"#, false).unwrap();
        let sol = crate::solver::solve_anticipative_spec(&eq).unwrap().u;
        assert!(matches!(borel_coefficients(&sol, &eq), Err(Error::Precondition(_))));
    }

    #[test]
    fn w_family_residual_vanishes() {
        let a = TruncatedSeries::univariate("x", vec![Coeff::zero(Mode::Exact), Coeff::one(Mode::Exact)], 20);
        let sol = solve_anticipative(&a, 5, 10).unwrap();
        for m in 0..5 {
            assert!(w_family_residual(&sol.w, &a, m).unwrap().is_zero(), "m = {m}");
        }
    }
}
