//! Product-trapezoid solver for `(ξ − ξₙ)ψ = B∗ψ + C∗(ξψ) + F` along a ray.

use num_complex::Complex64;
use serde::Serialize;

use super::BorelFamily;
use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::series::TruncatedSeries;

type C64 = Complex64;

/// Nodes `ξⱼ = j·h·e^{id}` for `0 ≤ j·h ≤ length`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Ray {
    pub d: f64,
    pub h: f64,
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VolterraSolution {
    /// Ray parameter `s` of each node.
    pub s: Vec<f64>,
    /// `ψ(s·e^{id})` from the step `h/2` solve.
    pub psi: Vec<C64>,
    /// `max |ψ_h − ψ_{h/2}| / 3`, the Richardson estimate of the error in `psi`.
    pub err_est: f64,
}

/// Largest node count accepted for one solve.
const MAX_NODES: usize = 1 << 16;

impl Ray {
    fn validate(&self) -> Result<usize> {
        if !(self.h > 0.0 && self.length > 0.0 && self.d.is_finite()) {
            return Err(Error::Invalid("a ray needs h > 0, length > 0 and a finite direction".into()));
        }
        let n = (self.length / self.h).round();
        if !(n >= 1.0 && n <= MAX_NODES as f64) {
            return Err(Error::Invalid(format!("length/h = {n} must lie in 1..={MAX_NODES}")));
        }
        Ok(n as usize)
    }

    fn distance_to(&self, z: C64) -> f64 {
        let e = C64::from_polar(1.0, self.d);
        let s = (z * e.conj()).re.clamp(0.0, self.length);
        (z - e * s).norm()
    }
}

fn march(b: &dyn Fn(C64) -> C64, c: &dyn Fn(C64) -> C64, f: &dyn Fn(C64) -> C64, xi_n: C64, d: f64, h: f64, n: usize) -> Vec<C64> {
    let e = C64::from_polar(1.0, d);
    let xs: Vec<C64> = (0..=n).map(|j| e * (j as f64 * h)).collect();
    let bv: Vec<C64> = xs.iter().map(|&x| b(x)).collect();
    let cv: Vec<C64> = xs.iter().map(|&x| c(x)).collect();
    let eh = e * h;
    let mut psi: Vec<C64> = Vec::with_capacity(n + 1);
    let mut xpsi: Vec<C64> = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let xj = xs[j];
        let mut acc = C64::new(0.0, 0.0);
        if j > 0 {
            for m in 0..j {
                let w = if m == 0 { 0.5 } else { 1.0 };
                acc += (bv[j - m] * psi[m] + cv[j - m] * xpsi[m]) * w;
            }
        }
        let diag = if j > 0 { eh * 0.5 * (bv[0] + cv[0] * xj) } else { C64::new(0.0, 0.0) };
        let v = (f(xj) + eh * acc) / (xj - xi_n - diag);
        psi.push(v);
        xpsi.push(xj * v);
    }
    psi
}

/// Solves `(ξ − ξₙ)ψ(ξ) = (B∗ψ)(ξ) + (C∗(ξψ))(ξ) + F(ξ)`, `(f∗g)(ξ) = ∫₀^ξ f(ξ−τ)g(τ)dτ`,
/// by marching outward along the ray with steps `h` and `h/2`.
pub fn volterra_solve(
    b: &dyn Fn(C64) -> C64,
    c: &dyn Fn(C64) -> C64,
    f: &dyn Fn(C64) -> C64,
    xi_n: &Coeff,
    ray: &Ray,
) -> Result<VolterraSolution> {
    let n = ray.validate()?;
    let xn = xi_n.to_c64();
    let dist = ray.distance_to(xn);
    if dist < 10.0 * ray.h {
        return Err(Error::Precondition(format!(
            "the ray passes within {dist:e} of ξₙ = {xn}; at least 10h = {:e} is required",
            10.0 * ray.h
        )));
    }
    let coarse = march(b, c, f, xn, ray.d, ray.h, n);
    let fine = march(b, c, f, xn, ray.d, ray.h / 2.0, 2 * n);
    let psi: Vec<C64> = (0..=n).map(|j| fine[2 * j]).collect();
    let err_est = coarse.iter().zip(&psi).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / 3.0;
    if !err_est.is_finite() || psi.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("Volterra step refinement did not converge".into()));
    }
    Ok(VolterraSolution { s: (0..=n).map(|j| j as f64 * ray.h).collect(), psi, err_est })
}

fn poly_eval(s: &TruncatedSeries) -> impl Fn(C64) -> C64 {
    let c = s.to_c64_vec();
    move |x| c.iter().rev().fold(C64::new(0.0, 0.0), |acc, a| acc * x + a)
}

/// Continues `ũₙ` of a level-one family along `ray`.
///
/// Order `n` reads `(n − b₀ − c₀ξ)ũₙ = [n=1]A + B∗ũₙ + C∗(ξũₙ) + Fₙ`; dividing by `−c₀`
/// gives the solver's form with `ξₙ = (n − b₀)/c₀`. Coefficients and `Fₙ` are
/// evaluated as the truncated polynomials stored in the family.
pub fn volterra_from_order(fam: &BorelFamily, n: usize, ray: &Ray) -> Result<VolterraSolution> {
    if fam.k != 1 {
        return Err(Error::Precondition("the Volterra oracle handles level k = 1 only".into()));
    }
    fam.member(n)?;
    let mode = fam.mode().join(fam.b0.mode()).join(fam.c0.mode());
    let c0 = fam.c0.clone().to_mode(mode);
    if c0.is_zero() {
        return Err(Error::Degenerate);
    }
    let xi_n = &(Coeff::from_int(n as i64, mode) - &fam.b0.clone().to_mode(mode)) / &c0;
    let mut forcing = fam.forcing(n)?;
    if n == 1 {
        forcing = forcing.to_mode(forcing.mode().join(fam.a.mode())).add(&fam.a.restrict(forcing.trunc()).to_mode(forcing.mode().join(fam.a.mode())))?;
    }
    let scale = -C64::new(1.0, 0.0) / c0.to_c64();
    let (bp, cp, fp) = (poly_eval(&fam.b), poly_eval(&fam.c), poly_eval(&forcing));
    volterra_solve(&|x| scale * bp(x), &|x| scale * cp(x), &|x| scale * fp(x), &xi_n, ray)
}
