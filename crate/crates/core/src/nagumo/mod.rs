//! Sector geometry, the constant M₀ and exponential Nagumo norms
//! `‖f‖_{S,μ,n} = M₀ sup_S |f(ξ) e^{−μξ} (1+|ξ|²) δ(ξ)ⁿ|`.
//!
//! Norms are estimated by a grid supremum in polar coordinates of the level-one
//! plane, polished by golden-section search around the best cells. A ramified
//! sector is handled by pulling the level-one grid back through `ζ ↦ ζ^{1/k}`.

mod sup;
mod verify;

pub use verify::{verify_inequalities, Suite, SuiteReport, TrialFailure};

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TruncatedSeries;
use sup::{grid_sup, Region};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectorKind {
    Pure,
    DiscJoined,
    Ramified,
}

/// `S(R; d, θ) = {|arg ξ − d| < θ} ∪ {0 < |ξ| < R}`, or its ramification
/// `S^{(k)}` for `kind = Ramified`, in which case `(d, θ, R)` describe the
/// level-one sector and the described set is `S(R^{1/k}; d/k, θ/k)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorSpec {
    pub kind: SectorKind,
    pub d: f64,
    pub theta: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub k: u32,
}

/// Weight parameters of a Nagumo norm: `μ ∈ (0, ∞e^{−id})` and the δ-power `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NagumoParams {
    pub mu: Complex64,
    pub n: f64,
}

/// Result of a grid supremum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormEstimate {
    pub value: f64,
    /// Level-one point `ζ` where the supremum was found.
    pub argmax: Complex64,
    /// Weighted value on the outermost arc; the weight decays beyond it.
    pub tail_bound: f64,
}

/// `φ` reduced to `(−π, π]`.
pub(crate) fn wrap_angle(phi: f64) -> f64 {
    let mut a = phi.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

impl SectorSpec {
    pub fn pure(d: f64, theta: f64) -> Result<SectorSpec> {
        let s = SectorSpec { kind: SectorKind::Pure, d, theta, r: 0.0, k: 1 };
        s.validate()?;
        Ok(s)
    }

    pub fn disc_joined(r: f64, d: f64, theta: f64) -> Result<SectorSpec> {
        let s = SectorSpec { kind: SectorKind::DiscJoined, d, theta, r, k: 1 };
        s.validate()?;
        Ok(s)
    }

    /// `S^{(k)}(R; d, θ)`; `r = 0` gives `S^{(k)}(d, θ) = S(d/k, θ/k)`.
    pub fn ramified(r: f64, d: f64, theta: f64, k: u32) -> Result<SectorSpec> {
        let s = SectorSpec { kind: SectorKind::Ramified, d, theta, r, k };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta < PI) {
            return Err(Error::Invalid(format!("half-opening θ = {} must lie in (0, π)", self.theta)));
        }
        if !self.d.is_finite() {
            return Err(Error::Invalid("sector direction must be finite".into()));
        }
        if !(self.r >= 0.0 && self.r.is_finite()) {
            return Err(Error::Invalid(format!("disc radius R = {} must be finite and ≥ 0", self.r)));
        }
        if self.k == 0 {
            return Err(Error::Invalid("level k must be ≥ 1".into()));
        }
        match self.kind {
            SectorKind::Pure if self.r != 0.0 => Err(Error::Invalid("a pure sector has R = 0".into())),
            SectorKind::DiscJoined if self.r == 0.0 => Err(Error::Invalid("a disc-joined sector needs R > 0".into())),
            SectorKind::Pure | SectorKind::DiscJoined if self.k != 1 => {
                Err(Error::Invalid("only ramified sectors carry a level k > 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// The level-one sector `S` behind this one.
    pub fn base(&self) -> SectorSpec {
        let kind = if self.r > 0.0 { SectorKind::DiscJoined } else { SectorKind::Pure };
        SectorSpec { kind, k: 1, ..*self }
    }

    /// `(d, θ, R)` of the set this spec describes.
    pub fn geometry(&self) -> (f64, f64, f64) {
        match self.kind {
            SectorKind::Ramified => {
                let k = self.k as f64;
                (self.d / k, self.theta / k, self.r.powf(1.0 / k))
            }
            _ => (self.d, self.theta, self.r),
        }
    }

    /// Level-one polar coordinates `(|ζ|, arg ζ − d)` of a point of this set.
    fn level_one_polar(&self, xi: Complex64) -> (f64, f64) {
        let (d, _, _) = self.geometry();
        let k = self.k as f64;
        let phi = wrap_angle(xi.arg() - d);
        match self.kind {
            SectorKind::Ramified => (xi.norm().powf(k), wrap_angle(k * phi)),
            _ => (xi.norm(), phi),
        }
    }

    /// Point of this set with level-one polar coordinates `(r, φ)`.
    pub(crate) fn point(&self, r: f64, phi: f64) -> Complex64 {
        match self.kind {
            SectorKind::Ramified => {
                let k = self.k as f64;
                Complex64::from_polar(r.powf(1.0 / k), (self.d + phi) / k)
            }
            _ => Complex64::from_polar(r, self.d + phi),
        }
    }

    pub fn contains(&self, xi: Complex64) -> bool {
        if xi.norm() == 0.0 {
            return false;
        }
        let (r, phi) = self.level_one_polar(xi);
        phi.abs() < self.theta || r < self.r
    }

    /// True when direction `a` points into the angular part of the set.
    pub fn contains_direction(&self, a: f64) -> bool {
        let (d, theta, _) = self.geometry();
        wrap_angle(a - d).abs() < theta
    }
}

/// δ at level-one polar coordinates, `φ` measured from the bisector.
///
/// Disc-joined sectors use the distance from `(ln r, φ)` to the boundary of the
/// strip `|Im η| < θ` joined with the half-plane `Re η < ln R`, with `φ` on the
/// branch nearest the strip.
pub(crate) fn delta_polar(theta: f64, big_r: f64, r: f64, phi: f64) -> f64 {
    let a = phi.abs();
    if big_r == 0.0 {
        return (theta - a).max(0.0).min(1.0);
    }
    if r == 0.0 {
        return 1.0;
    }
    let x = r.ln();
    let l = big_r.ln();
    let dist = if a < theta {
        if x >= l {
            theta - a
        } else {
            (l - x).hypot(theta - a)
        }
    } else {
        (l - x).max(0.0)
    };
    dist.min(1.0)
}

/// `δ(ξ, S)`.
pub fn delta(xi: Complex64, s: &SectorSpec) -> Result<f64> {
    s.validate()?;
    if !s.contains(xi) {
        return Err(Error::Invalid(format!("ξ = {xi} lies outside the sector")));
    }
    let (r, phi) = s.level_one_polar(xi);
    Ok(delta_polar(s.theta, s.r, r, phi))
}

fn m0_integrand(s: f64) -> f64 {
    2.0 * (1.0 + s * s) / (s * (4.0 + s * s)) * ((1.0 + s * s).ln() + s * s.atan())
}

/// Golden-section maximization of a unimodal function on `[a, b]`.
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// `M₀ = sup_{s>0} 2(1+s²)/(s(4+s²)) (ln(1+s²) + s arctan s)`.
pub fn m0_constant() -> f64 {
    static M0: OnceLock<f64> = OnceLock::new();
    *M0.get_or_init(|| golden_max(m0_integrand, 1.0, 50.0, 1e-10).1)
}

/// Argument where [`m0_constant`] is attained.
pub fn m0_argmax() -> f64 {
    golden_max(m0_integrand, 1.0, 50.0, 1e-10).0
}

impl NagumoParams {
    /// `μ = |μ| e^{−id}` for the level-one direction `d`.
    pub fn new(mu_abs: f64, d: f64, n: f64) -> NagumoParams {
        NagumoParams { mu: Complex64::from_polar(mu_abs, -d), n }
    }

    pub fn validate(&self, s: &SectorSpec) -> Result<()> {
        if !(self.mu.norm() > 0.0) {
            return Err(Error::Invalid("μ must be nonzero".into()));
        }
        if !(self.n >= 0.0) {
            return Err(Error::Invalid(format!("δ-power n = {} must be ≥ 0", self.n)));
        }
        let off = wrap_angle(self.mu.arg() + s.d).abs();
        if off > 1e-12 {
            return Err(Error::Invalid(format!("arg μ must equal −d (off by {off:e})")));
        }
        Ok(())
    }
}

/// Grid regions of the level-one plane covering `S`, and the outer radius.
fn regions(s: &SectorSpec, decay: f64, tail_degree: usize) -> (Vec<Region>, f64) {
    let r_max = (3.0 * (tail_degree as f64 + 2.0) + 30.0) / decay + 5.0;
    let mut out = vec![Region { phi_lo: -s.theta, phi_hi: s.theta, r_hi: r_max, n_phi: 65 }];
    if s.r > 0.0 {
        out.push(Region { phi_lo: s.theta, phi_hi: 2.0 * PI - s.theta, r_hi: s.r, n_phi: 64 });
    }
    (out, r_max)
}

/// Estimates `‖f‖_{S,μ,n}` (or `‖ρ_k f‖_{S,μ,n}` on a ramified sector).
///
/// `tail_degree` bounds the polynomial growth of `f` and sets the outer radius.
/// Returns `+∞` when `Re(μζ)` does not grow on the sector (θ ≥ π/2) and `f ≠ 0`.
pub fn nagumo_norm_estimate(
    f: &(dyn Fn(Complex64) -> Complex64 + Sync),
    s: &SectorSpec,
    p: &NagumoParams,
    tail_degree: usize,
) -> Result<NormEstimate> {
    s.validate()?;
    p.validate(s)?;
    let m0 = m0_constant();
    let decay = p.mu.norm() * s.theta.cos();
    let weight = |r: f64, phi: f64| -> f64 {
        let zeta = Complex64::from_polar(r, s.d + phi);
        let v = f(s.point(r, phi)).norm() * (-(p.mu * zeta).re).exp() * (1.0 + r * r);
        if p.n == 0.0 {
            v
        } else {
            v * delta_polar(s.theta, s.r, r, phi).powf(p.n)
        }
    };
    if decay <= 1e-12 {
        let (regs, _) = regions(s, 1.0, 1000);
        let probe = grid_sup(&|r, phi| f(s.point(r, phi)).norm(), &regs);
        let value = if probe.value == 0.0 { 0.0 } else { f64::INFINITY };
        return Ok(NormEstimate { value, argmax: Complex64::new(0.0, 0.0), tail_bound: value });
    }
    let (regs, _) = regions(s, decay, tail_degree);
    let best = grid_sup(&weight, &regs);
    Ok(NormEstimate {
        value: m0 * best.value.max(best.tail),
        argmax: Complex64::from_polar(best.r, s.d + best.phi),
        tail_bound: m0 * best.tail,
    })
}

pub fn nagumo_norm(
    f: &(dyn Fn(Complex64) -> Complex64 + Sync),
    s: &SectorSpec,
    p: &NagumoParams,
    tail_degree: usize,
) -> Result<f64> {
    Ok(nagumo_norm_estimate(f, s, p, tail_degree)?.value)
}

/// Norm of the polynomial truncation of a one-variable series.
pub fn nagumo_norm_series(f: &TruncatedSeries, s: &SectorSpec, p: &NagumoParams) -> Result<f64> {
    if f.nvars() != 1 {
        return Err(Error::Invalid("Nagumo norms need a one-variable series".into()));
    }
    let c = f.to_c64_vec();
    let eval = move |z: Complex64| c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a);
    nagumo_norm(&eval, s, p, f.trunc()[0])
}

/// `‖f‖_{S,μ} = M₀ sup_S |f(ξ)| (1+|ξ|²) e^{−μ|ξ|}` for real `μ > 0` on a pure sector.
pub fn modulus_norm(
    f: &(dyn Fn(Complex64) -> Complex64 + Sync),
    s: &SectorSpec,
    mu: f64,
    tail_degree: usize,
) -> Result<f64> {
    s.validate()?;
    if s.kind != SectorKind::Pure {
        return Err(Error::Invalid("the modulus-weight norm is defined on pure sectors".into()));
    }
    if !(mu > 0.0) {
        return Err(Error::Invalid("μ must be positive".into()));
    }
    let weight = |r: f64, phi: f64| f(s.point(r, phi)).norm() * (1.0 + r * r) * (-mu * r).exp();
    let (regs, _) = regions(s, mu, tail_degree);
    let best = grid_sup(&weight, &regs);
    Ok(m0_constant() * best.value.max(best.tail))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn delta_examples() {
        let s = SectorSpec::pure(0.0, PI / 4.0).unwrap();
        let xi = Complex64::from_polar(1.0, PI / 8.0);
        assert!((delta(xi, &s).unwrap() - PI / 8.0).abs() < 1e-15);
        assert!((delta(c(1.0, 0.0), &s).unwrap() - PI / 4.0).abs() < 1e-15);
        assert!(delta(c(-1.0, 0.0), &s).is_err());
        let disc = SectorSpec::disc_joined(2f64.exp(), 0.3, 0.5).unwrap();
        let xi = Complex64::from_polar(1.5f64.exp(), 0.3 + 2.0);
        assert!((delta(xi, &disc).unwrap() - 0.5).abs() < 1e-14);
        let deep = Complex64::from_polar(0.1, 0.3 + 3.0);
        assert_eq!(delta(deep, &disc).unwrap(), 1.0);
    }

    #[test]
    fn disc_delta_depends_on_modulus_and_is_continuous() {
        let s = SectorSpec::disc_joined(3.0, 1.0, 0.4).unwrap();
        let r = 2.0;
        let a = delta(Complex64::from_polar(r, 1.0 + 1.0), &s).unwrap();
        let b = delta(Complex64::from_polar(r, 1.0 - 2.5), &s).unwrap();
        assert_eq!(a, b);
        let mut prev = delta(Complex64::from_polar(1e-3, 1.2), &s).unwrap();
        for i in 1..4000 {
            let cur = delta(Complex64::from_polar(1e-3 + i as f64 * 1e-3, 1.2), &s).unwrap();
            assert!((cur - prev).abs() < 2e-3);
            prev = cur;
        }
    }

    #[test]
    fn ramified_geometry() {
        let s = SectorSpec::ramified(0.0, PI, PI / 4.0, 2).unwrap();
        assert_eq!(s.geometry(), (PI / 2.0, PI / 8.0, 0.0));
        assert!(s.contains(c(0.0, 1.0)));
        assert!(!s.contains(c(1.0, 0.0)));
        let xi = Complex64::from_polar(1.0, PI / 2.0 + 0.05);
        let z = xi * xi;
        let base = SectorSpec::pure(PI, PI / 4.0).unwrap();
        assert!((delta(xi, &s).unwrap() - delta(z, &base).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn m0_value() {
        let m0 = m0_constant();
        assert!((m0 - 3.7636).abs() < 1e-3);
        // Independent dense scan.
        let scan = (1..200_000).map(|i| m0_integrand(i as f64 * 1e-4)).fold(0.0, f64::max);
        assert!((m0 - scan).abs() < 1e-8);
        assert!((m0_argmax() - 8.5).abs() < 0.5);
        assert!(m0_integrand(1e-8) < 1e-6);
        assert!((m0_integrand(1e7) - PI).abs() < 1e-5);
    }

    #[test]
    fn norm_of_one() {
        let s = SectorSpec::pure(0.0, PI / 4.0).unwrap();
        let p = NagumoParams::new(1.0, 0.0, 0.0);
        let v = nagumo_norm(&|_| c(1.0, 0.0), &s, &p, 0).unwrap();
        // Oracle: dense scan of (1+r²) e^{−r cos φ} on the closed sector.
        let mut best = 0.0f64;
        for i in 0..=400 {
            let phi = -PI / 4.0 + PI / 2.0 * i as f64 / 400.0;
            for j in 0..=4000 {
                let r = j as f64 * 5e-3;
                best = best.max((1.0 + r * r) * (-r * phi.cos()).exp());
            }
        }
        assert!((v / m0_constant() - best).abs() < 1e-6 * best);
        assert!(v >= m0_constant());
        assert_eq!(nagumo_norm(&|_| c(0.0, 0.0), &s, &p, 0).unwrap(), 0.0);
    }

    #[test]
    fn wide_sector_gives_infinity() {
        let s = SectorSpec::pure(0.0, 2.0).unwrap();
        let p = NagumoParams::new(1.0, 0.0, 0.0);
        assert_eq!(nagumo_norm(&|_| c(1.0, 0.0), &s, &p, 0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn level_k_norm_is_level_one_norm_of_ramification() {
        let f = |z: Complex64| c(1.0, 0.5) + z * c(0.3, -0.2) + z * z * z;
        let s = SectorSpec::ramified(0.0, 0.4, 0.6, 3).unwrap();
        let base = s.base();
        let p = NagumoParams::new(1.5, 0.4, 1.0);
        let direct = nagumo_norm(&f, &s, &p, 3).unwrap();
        let pulled = nagumo_norm(
            &|zeta: Complex64| {
                let (r, phi) = (zeta.norm(), wrap_angle(zeta.arg() - 0.4));
                f(Complex64::from_polar(r.powf(1.0 / 3.0), (0.4 + phi) / 3.0))
            },
            &base,
            &p,
            3,
        )
        .unwrap();
        assert!((direct - pulled).abs() <= 1e-12 * direct);
    }

    #[test]
    fn params_checked_against_direction() {
        let s = SectorSpec::pure(1.0, 0.5).unwrap();
        assert!(NagumoParams::new(1.0, 1.0, 0.0).validate(&s).is_ok());
        assert!(NagumoParams::new(1.0, 0.0, 0.0).validate(&s).is_err());
        assert!(SectorSpec::pure(0.0, PI).is_err());
        assert!(SectorSpec::disc_joined(0.0, 0.0, 1.0).is_err());
    }
}
