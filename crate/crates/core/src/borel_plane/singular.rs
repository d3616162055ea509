//! Singular points `ξₙ = (n − b)/c`, singular directions and the σ bound
//! `|n − b − cξᵏ| ≥ σ(n + |ξ|ᵏ)`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::nagumo::{golden_max, SectorSpec};
use crate::par::{map_range, Execution};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingularData {
    pub xi: Vec<Coeff>,
    /// Singular directions in `[0, 2π)`, sorted and deduplicated.
    #[serde(rename = "directions_rad")]
    pub directions: Vec<f64>,
    /// Directions of `1/c`, the limit of `arg ξₙ`, divided by `k`.
    pub accumulation: Vec<f64>,
    #[serde(skip)]
    pub b0: Coeff,
    #[serde(skip)]
    pub c0: Coeff,
    #[serde(skip)]
    pub k: u32,
}

/// `arg z` in `[0, 2π)`, exact for exact real or imaginary `z`.
fn arg_of(z: &Coeff) -> f64 {
    if let Coeff::Exact { re, im } = z {
        let axis = match (re.is_zero(), im.is_zero()) {
            (false, true) => Some(if re.is_positive() { 0.0 } else { PI }),
            (true, false) => Some(if im.is_positive() { FRAC_PI_2 } else { 3.0 * FRAC_PI_2 }),
            _ => None,
        };
        if let Some(a) = axis {
            return a;
        }
    }
    z.to_c64().arg().rem_euclid(2.0 * PI)
}

fn ramified_directions(a: f64, k: u32) -> impl Iterator<Item = f64> {
    (0..k).map(move |nu| ((a + 2.0 * PI * nu as f64) / k as f64).rem_euclid(2.0 * PI))
}

fn dedup_angles(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(v.len());
    for a in v {
        if out.last().map_or(true, |l| a - l > 1e-12) {
            out.push(a);
        }
    }
    if out.len() > 1 && 2.0 * PI - out.last().unwrap() + out[0] <= 1e-12 {
        out.pop();
    }
    out
}

/// `ξₙ = (n − b₀)/c₀` for `n = 1..=N` and the directions
/// `{(arg z + 2νπ)/k : z ∈ {1/c₀} ∪ {ξₙ}, ν < k}` mod 2π.
///
/// A point `ξₙ = 0` (resonance) has no direction and is skipped.
pub fn singular_scan(b0: &Coeff, c0: &Coeff, k: u32, n: usize) -> Result<SingularData> {
    if c0.is_zero() || c0.abs() < 1e-300 {
        return Err(Error::Degenerate);
    }
    if k == 0 || n == 0 {
        return Err(Error::Invalid("singular_scan needs k ≥ 1 and N ≥ 1".into()));
    }
    let mode = b0.mode().join(c0.mode());
    let c = c0.clone().to_mode(mode);
    let b = b0.clone().to_mode(mode);
    let xi: Vec<Coeff> = (1..=n).map(|m| &(Coeff::from_int(m as i64, mode) - &b) / &c).collect();
    let inv_c = &Coeff::one(mode) / &c;
    let accumulation = dedup_angles(ramified_directions(arg_of(&inv_c), k).collect());
    let mut all: Vec<f64> = accumulation.clone();
    for z in &xi {
        if !z.is_zero() && z.abs() > 0.0 {
            all.extend(ramified_directions(arg_of(z), k));
        }
    }
    Ok(SingularData { xi, directions: dedup_angles(all), accumulation, b0: b, c0: c, k })
}

impl SingularData {
    /// σ bound on `s` for the stored `(b₀, c₀, k)`.
    pub fn sigma(&self, s: &SectorSpec, n_max: usize, grid: usize) -> Result<f64> {
        sigma_bound(&self.b0, &self.c0, self.k, s, n_max, grid)
    }
}

/// `inf_{s≥0} |s − c e^{iψ}|/(s + 1)`: the ratio when `n` and `|ξ|ᵏ` grow together.
pub(crate) fn homogeneous_limit(c: Complex64, psi: f64) -> f64 {
    let w = c * Complex64::from_polar(1.0, psi);
    let f = |t: f64| {
        let s = t.exp();
        -((s - w).norm() / (s + 1.0))
    };
    let mut best = w.norm().min(1.0);
    let mut arg = 0.0;
    for j in -200..=200 {
        let t = j as f64 * 0.05;
        let v = -f(t);
        if v < best {
            best = v;
            arg = t;
        }
    }
    let (_, v) = golden_max(f, arg - 0.05, arg + 0.05, 1e-12);
    best.min(-v)
}

/// Lower bound `σ̂ ≤ inf |n − b − cξᵏ|/(n + |ξ|ᵏ)` over `1 ≤ n ≤ n_max`, `ξ ∈ S`.
///
/// Each `(n, angle)` pair is minimized over `|ξ|ᵏ` on a log grid with golden
/// refinement; the joint limit `n, |ξ| → ∞` is added in closed form. `grid` is
/// the number of angles. The minimum is shrunk by a relative `10⁻⁶` so that it
/// stays below the true infimum.
pub fn sigma_bound(b0: &Coeff, c0: &Coeff, k: u32, s: &SectorSpec, n_max: usize, grid: usize) -> Result<f64> {
    s.validate()?;
    if n_max == 0 || grid < 2 {
        return Err(Error::Invalid("sigma_bound needs n_max ≥ 1 and at least two angles".into()));
    }
    let scan = singular_scan(b0, c0, k, n_max)?;
    if let Some(dir) = scan.directions.iter().find(|a| s.contains_direction(**a)) {
        return Err(Error::SingularDirection(format!("direction {dir:.6} rad lies in the sector")));
    }
    let b = b0.to_c64();
    let c = c0.to_c64();
    let kf = k as f64;
    let (d, theta, big_r) = s.geometry();
    // ξ-plane angles; the disc part contributes the full circle below R.
    let mut rays: Vec<(f64, f64)> = (0..grid)
        .map(|i| (d - theta + 2.0 * theta * i as f64 / (grid - 1) as f64, f64::INFINITY))
        .collect();
    if big_r > 0.0 {
        rays.extend((0..grid).map(|i| (d + theta + (2.0 * PI - 2.0 * theta) * i as f64 / (grid - 1) as f64, big_r)));
    }
    let per_ray = map_range(rays.len(), Execution::Parallel, |i| {
        let (ang, r_hi) = rays[i];
        let psi = kf * ang;
        let rho_hi = r_hi.powf(kf);
        let mut best = if r_hi.is_infinite() { homogeneous_limit(c, psi) } else { f64::INFINITY };
        for n in 1..=n_max {
            let nf = n as f64;
            let ratio = |t: f64| {
                let rho = t.exp();
                (nf - b - c * Complex64::from_polar(rho, psi)).norm() / (nf + rho)
            };
            let mut at = f64::NEG_INFINITY;
            let mut m = (nf - b).norm() / nf;
            let mut j = -110;
            loop {
                let t = j as f64 / 16.0;
                if t.exp() >= rho_hi || j > 160 {
                    break;
                }
                let v = ratio(t);
                if v < m {
                    m = v;
                    at = t;
                }
                j += 1;
            }
            if at.is_finite() {
                let (_, v) = golden_max(|t| -ratio(t), at - 1.0 / 16.0, (at + 1.0 / 16.0).min(rho_hi.ln()), 1e-12);
                m = m.min(-v);
            }
            best = best.min(m);
        }
        best
    });
    let min = per_ray.into_iter().fold(f64::INFINITY, f64::min);
    if !(min > 1e-9) {
        return Err(Error::SingularDirection(format!("the σ-ratio infimum is {min:e} on the sector")));
    }
    Ok(min * (1.0 - 1e-6))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Coeff;

    fn q(n: i64, d: i64) -> Coeff {
        Coeff::ratio(n, d)
    }

    #[test]
    fn euler_directions() {
        let s = singular_scan(&q(0, 1), &q(1, 1), 1, 5).unwrap();
        assert_eq!(s.directions, vec![0.0]);
        assert_eq!(s.xi, (1..=5).map(|n| q(n, 1)).collect::<Vec<_>>());
        let s2 = singular_scan(&q(0, 1), &q(1, 1), 2, 5).unwrap();
        assert_eq!(s2.directions, vec![0.0, PI]);
    }

    #[test]
    fn imaginary_c() {
        let c = Coeff::exact(crate::coeff::rat(0, 1), crate::coeff::rat(1, 1));
        let s = singular_scan(&q(1, 2), &c, 1, 6).unwrap();
        assert_eq!(s.directions, vec![3.0 * FRAC_PI_2]);
        assert_eq!(s.xi[0], Coeff::exact(crate::coeff::rat(0, 1), crate::coeff::rat(-1, 2)));
        assert!(singular_scan(&q(1, 2), &q(0, 1), 1, 3).is_err());
    }

    #[test]
    fn sigma_for_left_sector() {
        let s = SectorSpec::pure(PI, PI / 4.0).unwrap();
        let sig = sigma_bound(&q(0, 1), &q(1, 1), 1, &s, 50, 129).unwrap();
        assert!(sig >= 0.92 && sig <= 0.9239, "{sig}");
        // Grid oracle over n ≤ 50, |ξ| ≤ 50 on the boundary rays.
        let mut best = f64::INFINITY;
        for n in 1..=50 {
            for i in 0..=5000 {
                let r = i as f64 * 0.01;
                let xi = Complex64::from_polar(r, 3.0 * PI / 4.0);
                best = best.min((n as f64 - xi).norm() / (n as f64 + r));
            }
        }
        assert!(sig <= best && best - sig < 1e-4);
    }

    #[test]
    fn sigma_rejects_singular_sector() {
        let s = SectorSpec::pure(0.1, 0.5).unwrap();
        assert!(matches!(
            sigma_bound(&q(0, 1), &q(1, 1), 1, &s, 20, 33),
            Err(Error::SingularDirection(_))
        ));
    }

    #[test]
    fn homogeneous_limit_endpoints() {
        // c e^{iψ} = −1: |s + 1|/(s + 1) = 1.
        assert!((homogeneous_limit(Complex64::new(1.0, 0.0), PI) - 1.0).abs() < 1e-12);
        assert!(homogeneous_limit(Complex64::new(0.5, 0.0), PI) <= 0.5 + 1e-12);
    }

    #[test]
    fn sigma_decreases_with_opening() {
        let mut prev = f64::INFINITY;
        for th in [0.2, 0.4, 0.6, 0.8, 1.0] {
            let s = SectorSpec::pure(PI, th).unwrap();
            let v = sigma_bound(&q(1, 3), &q(1, 1), 1, &s, 30, 65).unwrap();
            assert!(v <= prev + 1e-12);
            prev = v;
        }
    }
}
