//! Directional level-k Laplace integrals by panelled Gauss–Legendre quadrature.

use std::sync::OnceLock;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::par::{map_slice, Execution};
use crate::series::BorelKernel;

type C64 = Complex64;

/// Poles closer than this to the ray make the direction singular.
pub const POLE_CLEARANCE: f64 = 1e-3;
const GL_POINTS: usize = 32;
const MAX_PANELS: usize = 4000;
/// Panels whose contribution stays below this fraction of the running total end the integral.
const TAIL_REL: f64 = 1e-16;

fn rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        GaussLegendre::new(GL_POINTS).expect("32-point rule").into_iter().collect()
    })
}

fn distance_to_ray(p: C64, d: f64) -> f64 {
    let e = C64::from_polar(1.0, d);
    let s = (p * e.conj()).re.max(0.0);
    (p - e * s).norm()
}

/// `Re((e^{id}/x)ᵏ)·|x|ᵏ`, positive exactly when `x` is admissible for direction `d`.
pub fn laplace_decay(d: f64, k: u32, x: C64) -> f64 {
    (k as f64 * (d - x.arg())).cos()
}

/// Level-k Laplace integral of `φ` along `arg ξ = d` at each point of `x_points`.
///
/// `Classical`: `∫₀^{∞e^{id}} φ(ξ) e^{−(ξ/x)ᵏ} kξ^{k−1} dξ`, inverse of `xⁿ ↦ ξ^{n−k}/Γ(n/k)`.
/// `GammaOnePlus`: the same integrand times `(ξ/x)ᵏ`, inverse of `xⁿ ↦ ξ^{n−k}/Γ(1+n/k)`;
/// at level one this is `x⁻¹∫ ξφ(ξ)e^{−ξ/x}dξ`.
///
/// `poles` lists known singularities of `φ`; one within [`POLE_CLEARANCE`] of the ray
/// is a singular direction. Panels have unit length in `|ξ|/|x|` and are added until
/// their contribution is negligible.
pub fn laplace_sum(
    phi: &(dyn Fn(C64) -> C64 + Sync),
    poles: &[C64],
    d: f64,
    k: u32,
    kernel: BorelKernel,
    x_points: &[C64],
) -> Result<Vec<C64>> {
    if k == 0 {
        return Err(Error::Invalid("level k must be ≥ 1".into()));
    }
    if let Some(p) = poles.iter().find(|p| distance_to_ray(**p, d) < POLE_CLEARANCE) {
        return Err(Error::SingularDirection(format!("pole {p} lies within {POLE_CLEARANCE} of the ray arg ξ = {d}")));
    }
    map_slice(x_points, Execution::Parallel, |x| laplace_one(phi, d, k, kernel, *x)).into_iter().collect()
}

fn laplace_one(phi: &(dyn Fn(C64) -> C64 + Sync), d: f64, k: u32, kernel: BorelKernel, x: C64) -> Result<C64> {
    let gamma = laplace_decay(d, k, x);
    if !(x.norm() > 0.0) || !(gamma > 1e-12) {
        return Err(Error::Precondition(format!("x = {x} is outside the admissible half-plane of direction {d} at level {k}")));
    }
    let kf = k as f64;
    let r = x.norm();
    let rot = C64::from_polar(1.0, kf * (d - x.arg()));
    let e = C64::from_polar(1.0, d);
    // ξ = |x|σe^{id}: kξ^{k−1}dξ = k|x|ᵏσ^{k−1}e^{ikd}dσ and (ξ/x)ᵏ = σᵏ·rot.
    let jac = C64::from_polar(kf * r.powf(kf), kf * d);
    let integrand = |sigma: f64| -> C64 {
        let w = rot * sigma.powf(kf);
        let mut v = phi(e * (r * sigma)) * (-w).exp() * sigma.powf(kf - 1.0);
        if kernel == BorelKernel::GammaOnePlus {
            v *= w;
        }
        v
    };
    let mut total = C64::new(0.0, 0.0);
    let mut abs_total = 0.0f64;
    let mut quiet = 0;
    // Beyond this point e^{−γσᵏ} is below 10⁻²⁰.
    let sigma_min_end = (46.0 / gamma).powf(1.0 / kf);
    for panel in 0..MAX_PANELS {
        let a = panel as f64;
        let mut part = C64::new(0.0, 0.0);
        let mut part_abs = 0.0;
        for &(t, w) in rule() {
            let v = integrand(a + 0.5 * (t + 1.0)) * (0.5 * w);
            part += v;
            part_abs += v.norm();
        }
        if !part.is_finite() {
            return Err(Error::Numerical(format!("non-finite Laplace integrand near |ξ| = {}", r * a)));
        }
        total += part;
        abs_total += part_abs;
        if part_abs <= TAIL_REL * abs_total && a + 1.0 >= sigma_min_end {
            quiet += 1;
            if quiet >= 3 {
                return Ok(total * jac);
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::Numerical(format!(
        "Laplace integral at x = {x} did not settle within {MAX_PANELS} panels; φ grows faster than the kernel decays"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Coeff;
    use crate::series::TruncatedSeries;
    use std::f64::consts::PI;

    fn one(_: C64) -> C64 {
        C64::new(1.0, 0.0)
    }

    #[test]
    fn constant_and_linear() {
        let v = laplace_sum(&one, &[], 0.0, 1, BorelKernel::GammaOnePlus, &[C64::new(0.3, 0.0)]).unwrap();
        assert!((v[0] - 0.3).norm() < 1e-14);
        let v = laplace_sum(&|x| x, &[], 0.0, 1, BorelKernel::GammaOnePlus, &[C64::new(0.5, 0.0)]).unwrap();
        assert!((v[0] - 0.5).norm() < 1e-14);
        let v = laplace_sum(&one, &[], 0.0, 1, BorelKernel::Classical, &[C64::new(0.3, 0.0)]).unwrap();
        assert!((v[0] - 0.3).norm() < 1e-14);
    }

    #[test]
    fn euler_exponential_integral() {
        let phi = |x: C64| 1.0 / (1.0 - x);
        let v = laplace_sum(&phi, &[C64::new(1.0, 0.0)], PI, 1, BorelKernel::Classical, &[C64::new(-0.1, 0.0)]).unwrap();
        let want = -(10f64.exp()) * statrs::function::exponential::integral(10.0, 1).unwrap();
        assert!((v[0].re - want).abs() < 1e-12 && v[0].im.abs() < 1e-12, "{} vs {want}", v[0]);
    }

    #[test]
    fn round_trip_monomials() {
        for k in 1..=3u32 {
            for n in k as usize..=12 {
                for kernel in [BorelKernel::Classical, BorelKernel::GammaOnePlus] {
                    let s = TruncatedSeries::monomial(&["x"], &[12], &[n], Coeff::ratio(1, 1));
                    let b = s.formal_borel_k("x", "xi", k, kernel).unwrap();
                    let c = b.to_c64_vec();
                    let phi = move |z: C64| c.iter().rev().fold(C64::new(0.0, 0.0), |a, q| a * z + q);
                    let x = C64::from_polar(0.4, 0.2 / k as f64);
                    let v = laplace_sum(&phi, &[], 0.1 / k as f64, k, kernel, &[x]).unwrap();
                    let want = x.powu(n as u32);
                    assert!((v[0] - want).norm() <= 1e-8 * want.norm(), "k={k} n={n} {kernel:?}");
                }
            }
        }
    }

    #[test]
    fn rejects_poles_and_bad_points() {
        let phi = |x: C64| 1.0 / (1.0 - x);
        let r = laplace_sum(&phi, &[C64::new(1.0, 0.0)], 0.0, 1, BorelKernel::Classical, &[C64::new(0.1, 0.0)]);
        assert!(matches!(r, Err(Error::SingularDirection(_))));
        let r = laplace_sum(&one, &[], 0.0, 1, BorelKernel::Classical, &[C64::new(-0.1, 0.0)]);
        assert!(matches!(r, Err(Error::Precondition(_))));
        let grow = |x: C64| (x * x).exp();
        let r = laplace_sum(&grow, &[], PI, 1, BorelKernel::Classical, &[C64::new(-0.1, 0.0)]);
        assert!(r.is_err());
    }
}
