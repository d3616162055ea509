//! First terms `ψ₀, ψ₁` of the ε-expansion of `(ξ − ξₙ)ψ = ε(B∗ψ + C∗(ξψ)) + F`.

use crate::coeff::{Coeff, Mode};
use crate::error::{Error, Result};
use crate::series::{LogSeries, LogTerm, TruncatedSeries};

type Poly = Vec<Coeff>;

fn poly_of(s: &TruncatedSeries, mode: Mode) -> Result<Poly> {
    if s.nvars() != 1 {
        return Err(Error::Invalid("perturbation inputs must be univariate in ξ".into()));
    }
    let mut p: Poly = s.coeff_vec().iter().map(|c| c.clone().to_mode(mode)).collect();
    while p.len() > 1 && p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    Ok(p)
}

fn binom(n: usize, r: usize) -> i64 {
    (0..r).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

/// `p(η + a)` as a polynomial in `η`.
fn taylor_shift(p: &Poly, a: &Coeff, mode: Mode) -> Poly {
    let mut out = vec![Coeff::zero(mode); p.len()];
    for (n, c) in p.iter().enumerate() {
        let mut apow = Coeff::one(mode);
        for r in (0..=n).rev() {
            // c·C(n, r)·a^{n−r} η^r, walking r downward so a's power grows.
            out[r] += &(&c.scale_int(binom(n, r)) * &apow);
            apow = &apow * a;
        }
    }
    out
}

fn to_series(p: &Poly, mode: Mode) -> TruncatedSeries {
    let deg = p.len().saturating_sub(1);
    let mut s = TruncatedSeries::zeros(&["eta"], &[deg], mode);
    for (i, c) in p.iter().enumerate() {
        s.set(&[i], c.clone());
    }
    s
}

/// `∫₀^ξ K(ξ − τ) G(τ)/(τ − ξₙ) dτ = R(ξ) + S(ξ)·log(1 − ξ/ξₙ)`.
fn convolve_with_pole(k: &Poly, g: &Poly, xi_n: &Coeff, mode: Mode) -> (Poly, Poly) {
    // P(ξ, τ) = Σ_a ξ^a p_a(τ) with K(ξ − τ) = Σ_p k_p Σ_r C(p, r) ξ^{p−r} (−τ)^r.
    let deg_x = k.len();
    let deg_t = k.len() + g.len();
    let mut p = vec![vec![Coeff::zero(mode); deg_t]; deg_x];
    for (pp, kp) in k.iter().enumerate() {
        for r in 0..=pp {
            let sign = if r % 2 == 0 { 1 } else { -1 };
            let w = kp.scale_int(sign * binom(pp, r));
            for (q, gq) in g.iter().enumerate() {
                p[pp - r][r + q] += &(&w * gq);
            }
        }
    }
    let mut rpoly = vec![Coeff::zero(mode); deg_x + deg_t + 1];
    let mut spoly = vec![Coeff::zero(mode); deg_x];
    for (a, pa) in p.iter().enumerate() {
        // Synthetic division p_a(τ) = (τ − ξₙ) q_a(τ) + p_a(ξₙ).
        let mut q = vec![Coeff::zero(mode); pa.len().saturating_sub(1)];
        let mut carry = Coeff::zero(mode);
        for m in (0..pa.len()).rev() {
            let v = &pa[m] + &(&carry * xi_n);
            if m > 0 {
                q[m - 1] = v.clone();
            }
            carry = v;
        }
        spoly[a] = carry;
        for (m, qm) in q.iter().enumerate() {
            let c = qm / &Coeff::from_int(m as i64 + 1, mode);
            rpoly[a + m + 1] += &c;
        }
    }
    (rpoly, spoly)
}

fn add_poly(a: &mut Poly, b: &Poly) {
    if a.len() < b.len() {
        let mode = b[0].mode();
        a.resize(b.len(), Coeff::zero(mode));
    }
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

/// `ψ₀ = F/(ξ − ξₙ)` and, for `order = 1`, `ψ₁ = (B∗ψ₀ + C∗(ξψ₀))/(ξ − ξₙ)`.
///
/// `B`, `C`, `F` are polynomials in `ξ`; every `ψ` has pole order 1 at `ξₙ`,
/// with `ψ₁` carrying log power at most 1 in `L = log(1 − ξ/ξₙ)`.
pub fn perturbation_log_expansion(
    b: &TruncatedSeries,
    c: &TruncatedSeries,
    f: &TruncatedSeries,
    xi_n: &Coeff,
    order: u32,
) -> Result<Vec<LogSeries>> {
    if order > 1 {
        return Err(Error::Invalid(format!("perturbation order {order} is not supported (0 or 1 only)")));
    }
    if xi_n.is_zero() {
        return Err(Error::Precondition("ξₙ = 0 leaves no analytic neighbourhood of the origin".into()));
    }
    let mode = b.mode().join(c.mode()).join(f.mode()).join(xi_n.mode());
    let xn = xi_n.clone().to_mode(mode);
    let (bp, cp, fp) = (poly_of(b, mode)?, poly_of(c, mode)?, poly_of(f, mode)?);
    let psi0_terms = vec![LogTerm { log_power: 0, pole_order: 1, series: to_series(&taylor_shift(&fp, &xn, mode), mode) }];
    let mut out = vec![LogSeries { base_point: xn.clone(), terms: psi0_terms }];
    if order == 1 {
        let mut xf = vec![Coeff::zero(mode)];
        xf.extend(fp.iter().cloned());
        let (mut r, mut s) = convolve_with_pole(&bp, &fp, &xn, mode);
        let (r2, s2) = convolve_with_pole(&cp, &xf, &xn, mode);
        add_poly(&mut r, &r2);
        add_poly(&mut s, &s2);
        for p in [&mut r, &mut s] {
            while p.len() > 1 && p.last().is_some_and(|c| c.is_zero()) {
                p.pop();
            }
        }
        let terms = vec![
            LogTerm { log_power: 0, pole_order: 1, series: to_series(&taylor_shift(&r, &xn, mode), mode) },
            LogTerm { log_power: 1, pole_order: 1, series: to_series(&taylor_shift(&s, &xn, mode), mode) },
        ];
        out.push(LogSeries { base_point: xn, terms });
    }
    Ok(out)
}
