//! Randomized checks of the convolution and derivative inequalities for
//! Nagumo norms, on pure, disc-joined and ramified sectors.

use std::f64::consts::{E, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sup::{grid_sup, Region};
use super::{m0_constant, nagumo_norm, NagumoParams, SectorSpec};
use crate::borel_plane::sigma_bound;
use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::par::{map_range, Execution};
use crate::series::gamma_ratio_kernel;

type C = Complex64;

/// One inequality family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    /// `‖f∗g‖_{μ,n+n′} ≤ ‖f‖_{μ,n} ‖g‖_{μ,n′}`.
    Convolution,
    /// `‖f∗g‖_{μ′,n} ≤ C_{μ′−μ} ‖f‖_{μ,0} ‖g‖_{μ′,n}`.
    MixedMu,
    /// `‖ξ∂f‖_{μ,n} ≤ σ⁻¹(e³+|μ|) ‖(n−b−cξ)f‖_{μ,n−1}`.
    KeyLemma,
    /// `‖ξ∂f‖_{μ,n} ≤ e³n ‖f‖_{μ,n−1} + |μ| ‖ξf‖_{μ,n}`.
    CauchyCorollary,
    /// Convolution inequality on `S(R; d, θ)`.
    DiscConvolution,
    /// `‖f/ξ‖_{μ,n} ≤ (e/R) ‖f‖_{μ,n}` for `f(0) = 0`.
    DiscDivision,
    /// `‖∂f‖_{μ,n} ≤ (ne⁴/R + |μ|) ‖f‖_{μ,n−1}`.
    DiscDerivative,
    /// `‖∂f‖_{μ,n} ≤ (eE₀/R)‖Pf‖_{μ,n−1}` and `‖∂ξ∂f‖_{μ,n+1} ≤ (neE₀²/R)‖Pf‖_{μ,n−1}`.
    DiscCorollary,
    /// Level-k convolution inequality.
    LevelKConvolution,
    /// Level-k mixed-μ convolution inequality.
    LevelKMixedMu,
    /// `‖ξ∂f‖^{(k)}_{μ,n} ≤ k(e³+|μ|)/σ ‖(n−b−cξᵏ)f‖^{(k)}_{μ,n−1}`.
    LevelKKeyLemma,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Convolution,
        Suite::MixedMu,
        Suite::KeyLemma,
        Suite::CauchyCorollary,
        Suite::DiscConvolution,
        Suite::DiscDivision,
        Suite::DiscDerivative,
        Suite::DiscCorollary,
        Suite::LevelKConvolution,
        Suite::LevelKMixedMu,
        Suite::LevelKKeyLemma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Convolution => "convolution",
            Suite::MixedMu => "mixed_mu",
            Suite::KeyLemma => "key_lemma",
            Suite::CauchyCorollary => "cauchy_corollary",
            Suite::DiscConvolution => "disc_convolution",
            Suite::DiscDivision => "disc_division",
            Suite::DiscDerivative => "disc_derivative",
            Suite::DiscCorollary => "disc_corollary",
            Suite::LevelKConvolution => "level_k_convolution",
            Suite::LevelKMixedMu => "level_k_mixed_mu",
            Suite::LevelKKeyLemma => "level_k_key_lemma",
        }
    }

    pub fn from_name(s: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|x| x.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialFailure {
    pub trial: usize,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub trials: usize,
    /// Smallest `(rhs − lhs)/max(lhs, rhs)` over all checks.
    pub min_margin: f64,
    pub failures: Vec<TrialFailure>,
    /// Checks with a negative margin inside the quadrature tolerance; they do not fail the suite.
    pub inconclusive: Vec<TrialFailure>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

const REL_TOL: f64 = 1e-6;

/// `p(ξ) e^{−λ ξ^k}`.
#[derive(Clone, Debug)]
struct TestFn {
    p: Vec<C>,
    lambda: C,
    k: u32,
}

impl TestFn {
    fn eval(&self, z: C) -> C {
        let v = self.p.iter().rev().fold(C::new(0.0, 0.0), |acc, a| acc * z + a);
        if self.lambda == C::new(0.0, 0.0) {
            v
        } else {
            v * (-self.lambda * z.powu(self.k)).exp()
        }
    }

    fn degree(&self) -> usize {
        self.p.len().saturating_sub(1)
    }

    fn with_poly(&self, p: Vec<C>) -> TestFn {
        TestFn { p, ..self.clone() }
    }

    fn mul_poly(&self, q: &[C]) -> TestFn {
        let mut out = vec![C::new(0.0, 0.0); self.p.len() + q.len() - 1];
        for (i, a) in self.p.iter().enumerate() {
            for (j, b) in q.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        self.with_poly(out)
    }

    /// `∂f`, level one only.
    fn deriv(&self) -> TestFn {
        assert_eq!(self.k, 1);
        let mut out = vec![C::new(0.0, 0.0); self.p.len().max(1)];
        for (i, a) in self.p.iter().enumerate() {
            if i > 0 {
                out[i - 1] += a * i as f64;
            }
            out[i] -= self.lambda * a;
        }
        self.with_poly(out)
    }

    /// `ξ∂f = (ξp′ − kλξᵏ p) e^{−λξᵏ}`.
    fn xi_deriv(&self) -> TestFn {
        let k = self.k as usize;
        let mut out = vec![C::new(0.0, 0.0); self.p.len() + k];
        for (i, a) in self.p.iter().enumerate() {
            out[i] += a * i as f64;
            out[i + k] -= self.lambda * self.k as f64 * a;
        }
        self.with_poly(out)
    }

    /// `f ∗_k g` for a shared exponential factor.
    fn convolve(&self, other: &TestFn) -> TestFn {
        let k = self.k as usize;
        let mut out = vec![C::new(0.0, 0.0); self.p.len() + other.p.len() - 1 + k];
        for (i, a) in self.p.iter().enumerate() {
            for (j, b) in other.p.iter().enumerate() {
                out[i + j + k] += a * b * gamma_ratio_kernel(i, j, self.k);
            }
        }
        self.with_poly(out)
    }

    fn norm(&self, s: &SectorSpec, p: &NagumoParams) -> Result<f64> {
        nagumo_norm(&|z| self.eval(z), s, p, self.degree())
    }
}

fn unit_disc(rng: &mut ChaCha8Rng) -> C {
    C::from_polar(rng.gen::<f64>().sqrt(), rng.gen_range(-PI..PI))
}

fn random_poly(rng: &mut ChaCha8Rng, vanish_at_zero: bool) -> Vec<C> {
    let deg = rng.gen_range(0..=8usize).max(vanish_at_zero as usize);
    let mut p: Vec<C> = (0..=deg).map(|_| unit_disc(rng)).collect();
    if vanish_at_zero {
        p[0] = C::new(0.0, 0.0);
    }
    p
}

/// Exponential factor decaying along the sector: `λ = ρ e^{−id}`, sometimes zero.
fn random_lambda(rng: &mut ChaCha8Rng, d: f64) -> C {
    if rng.gen_bool(0.5) {
        C::new(0.0, 0.0)
    } else {
        C::from_polar(rng.gen_range(0.0..1.0), -d)
    }
}

fn random_fn(rng: &mut ChaCha8Rng, lambda: C, k: u32, vanish_at_zero: bool) -> TestFn {
    TestFn { p: random_poly(rng, vanish_at_zero), lambda, k }
}

/// `b`, `c` and a direction `d` pointing away from every `(n−b)/c` and `1/c`.
fn random_bc(rng: &mut ChaCha8Rng) -> (C, C, f64, f64) {
    let b = unit_disc(rng) * 0.5;
    let c = C::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(-PI..PI));
    let d = (1.0 / c).arg() + PI + rng.gen_range(-0.6..0.6);
    let theta = rng.gen_range(0.15..0.9);
    (b, c, d, theta)
}

/// `sup max(n, |ξ|)/|n − b − cξ|` over `n ≥ 1` and `ξ ∈ S`, with its limits.
fn corollary_constant(b: C, c: C, s: &SectorSpec) -> f64 {
    let mut regs = vec![Region { phi_lo: -s.theta, phi_hi: s.theta, r_hi: 1e3, n_phi: 65 }];
    if s.r > 0.0 {
        regs.push(Region { phi_lo: s.theta, phi_hi: 2.0 * PI - s.theta, r_hi: s.r, n_phi: 64 });
    }
    let per_n = map_range(60, Execution::Parallel, |i| {
        let n = (i + 1) as f64;
        let w = |r: f64, phi: f64| {
            let xi = s.point(r, phi);
            n.max(r) / (n - b - c * xi).norm()
        };
        grid_sup(&w, &regs).value
    });
    per_n.into_iter().fold(1.0f64.max(1.0 / c.norm()), f64::max)
}

/// One trial: a list of `(lhs, rhs)` pairs.
fn trial(suite: Suite, rng: &mut ChaCha8Rng) -> Result<Vec<(f64, f64)>> {
    let d = rng.gen_range(-PI..PI);
    let theta = rng.gen_range(0.15..1.35);
    let mu_abs = rng.gen_range(0.3..3.0);
    let m0 = m0_constant();
    let e3 = E.powi(3);
    match suite {
        Suite::Convolution | Suite::DiscConvolution | Suite::LevelKConvolution => {
            let s = match suite {
                Suite::Convolution => SectorSpec::pure(d, theta)?,
                Suite::DiscConvolution => SectorSpec::disc_joined(rng.gen_range(0.3..3.0), d, theta)?,
                _ => SectorSpec::ramified(0.0, d, theta, rng.gen_range(2..=3))?,
            };
            let lambda = random_lambda(rng, d);
            let f = random_fn(rng, lambda, s.k, false);
            let g = random_fn(rng, lambda, s.k, false);
            let (n1, n2) = (rng.gen_range(0..=3) as f64, rng.gen_range(0..=3) as f64);
            let fg = f.convolve(&g);
            let lhs = fg.norm(&s, &NagumoParams::new(mu_abs, d, n1 + n2))?;
            let rhs = f.norm(&s, &NagumoParams::new(mu_abs, d, n1))? * g.norm(&s, &NagumoParams::new(mu_abs, d, n2))?;
            Ok(vec![(lhs, rhs)])
        }
        Suite::MixedMu | Suite::LevelKMixedMu => {
            let s = if suite == Suite::MixedMu {
                SectorSpec::pure(d, theta)?
            } else {
                SectorSpec::ramified(0.0, d, theta, rng.gen_range(2..=3))?
            };
            let mu2 = mu_abs * rng.gen_range(1.2..3.0);
            let lambda = random_lambda(rng, d);
            let f = random_fn(rng, lambda, s.k, false);
            let g = random_fn(rng, lambda, s.k, false);
            let n = rng.gen_range(0..=3) as f64;
            let cst = 4.0 / (m0 * (theta / 2.0).cos() * (mu2 - mu_abs));
            let lhs = f.convolve(&g).norm(&s, &NagumoParams::new(mu2, d, n))?;
            let rhs = cst * f.norm(&s, &NagumoParams::new(mu_abs, d, 0.0))? * g.norm(&s, &NagumoParams::new(mu2, d, n))?;
            Ok(vec![(lhs, rhs)])
        }
        Suite::KeyLemma | Suite::LevelKKeyLemma => {
            let (b, c, d, theta) = random_bc(rng);
            let k = if suite == Suite::KeyLemma { 1 } else { rng.gen_range(2..=3) };
            let s = if k == 1 { SectorSpec::pure(d, theta)? } else { SectorSpec::ramified(0.0, d, theta, k)? };
            let sigma = sigma_bound(&Coeff::from_c64(b), &Coeff::from_c64(c), k, &s, 60, 129)?;
            let n = rng.gen_range(1..=4usize);
            let lambda = random_lambda(rng, d);
            let f = random_fn(rng, lambda, k, false);
            let mut pq = vec![C::new(0.0, 0.0); k as usize + 1];
            pq[0] = n as f64 - b;
            pq[k as usize] = -c;
            let lhs = f.xi_deriv().norm(&s, &NagumoParams::new(mu_abs, d, n as f64))?;
            let rhs = k as f64 * (e3 + mu_abs) / sigma
                * f.mul_poly(&pq).norm(&s, &NagumoParams::new(mu_abs, d, n as f64 - 1.0))?;
            Ok(vec![(lhs, rhs)])
        }
        Suite::CauchyCorollary => {
            let s = SectorSpec::pure(d, theta)?;
            let n = rng.gen_range(1..=4usize) as f64;
            let lambda = random_lambda(rng, d);
            let f = random_fn(rng, lambda, 1, false);
            let pn = NagumoParams::new(mu_abs, d, n);
            let lhs = f.xi_deriv().norm(&s, &pn)?;
            let xf = f.mul_poly(&[C::new(0.0, 0.0), C::new(1.0, 0.0)]);
            let rhs = e3 * n * f.norm(&s, &NagumoParams::new(mu_abs, d, n - 1.0))? + mu_abs * xf.norm(&s, &pn)?;
            Ok(vec![(lhs, rhs)])
        }
        Suite::DiscDivision => {
            let big_r = rng.gen_range(0.3..3.0);
            let s = SectorSpec::disc_joined(big_r, d, theta)?;
            let lambda = random_lambda(rng, d);
            let f = random_fn(rng, lambda, 1, true);
            let p = NagumoParams::new(mu_abs, d, rng.gen_range(0..=3) as f64);
            let fx = f.with_poly(f.p[1..].to_vec());
            Ok(vec![(fx.norm(&s, &p)?, E / big_r * f.norm(&s, &p)?)])
        }
        Suite::DiscDerivative => {
            let big_r = rng.gen_range(0.3..3.0);
            let s = SectorSpec::disc_joined(big_r, d, theta)?;
            let lambda = random_lambda(rng, d);
            let f = random_fn(rng, lambda, 1, false);
            let n = rng.gen_range(1..=4usize) as f64;
            let lhs = f.deriv().norm(&s, &NagumoParams::new(mu_abs, d, n))?;
            let rhs = (n * E.powi(4) / big_r + mu_abs) * f.norm(&s, &NagumoParams::new(mu_abs, d, n - 1.0))?;
            Ok(vec![(lhs, rhs)])
        }
        Suite::DiscCorollary => {
            let (b, c, d, theta) = random_bc(rng);
            let nearest = (1..=4).map(|n| (n as f64 - b).norm() / c.norm()).fold(f64::INFINITY, f64::min);
            let big_r = nearest * rng.gen_range(0.2..0.7);
            let s = SectorSpec::disc_joined(big_r, d, theta)?;
            let cst = corollary_constant(b, c, &s);
            let n = rng.gen_range(1..=4usize);
            let e0 = (2.0 * e3 + mu_abs) * cst;
            let lambda = random_lambda(rng, d);
            let f = random_fn(rng, lambda, 1, false);
            let pf = f.mul_poly(&[n as f64 - b, -c]);
            let pf_norm = pf.norm(&s, &NagumoParams::new(mu_abs, d, n as f64 - 1.0))?;
            let lhs1 = f.deriv().norm(&s, &NagumoParams::new(mu_abs, d, n as f64))?;
            let lhs2 = f.xi_deriv().deriv().norm(&s, &NagumoParams::new(mu_abs, d, n as f64 + 1.0))?;
            Ok(vec![(lhs1, E * e0 / big_r * pf_norm), (lhs2, n as f64 * E * e0 * e0 / big_r * pf_norm)])
        }
    }
}

fn suite_seed(suite: Suite, seed: u64, trial: usize) -> u64 {
    let tag = Suite::ALL.iter().position(|s| *s == suite).unwrap() as u64;
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (tag << 48) ^ trial as u64
}

/// Runs `trials` random instances of `suite`; trials are independent and seeded from `seed`.
pub fn verify_inequalities(suite: Suite, trials: usize, seed: u64) -> Result<SuiteReport> {
    let results = map_range(trials, Execution::Parallel, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(suite_seed(suite, seed, t));
        trial(suite, &mut rng)
    });
    let mut report = SuiteReport {
        suite,
        trials,
        min_margin: f64::INFINITY,
        failures: Vec::new(),
        inconclusive: Vec::new(),
    };
    for (t, r) in results.into_iter().enumerate() {
        for (lhs, rhs) in r? {
            if !(lhs.is_finite() && rhs.is_finite()) {
                return Err(Error::Numerical(format!("{} trial {t}: non-finite norm", suite.name())));
            }
            let scale = lhs.max(rhs);
            let margin = rhs - lhs;
            let rel = if scale > 0.0 { margin / scale } else { 0.0 };
            report.min_margin = report.min_margin.min(rel);
            if margin < -REL_TOL * scale {
                report.failures.push(TrialFailure { trial: t, lhs, rhs });
            } else if margin < 0.0 {
                report.inconclusive.push(TrialFailure { trial: t, lhs, rhs });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convolution_of_ones() {
        let s = SectorSpec::pure(0.0, PI / 4.0).unwrap();
        let p = NagumoParams::new(1.0, 0.0, 0.0);
        let one = TestFn { p: vec![C::new(1.0, 0.0)], lambda: C::new(0.0, 0.0), k: 1 };
        let conv = one.convolve(&one);
        assert!(conv.p[0].norm() < 1e-15 && (conv.p[1] - 1.0).norm() < 1e-14);
        let lhs = conv.norm(&s, &p).unwrap();
        let rhs = one.norm(&s, &p).unwrap().powi(2);
        assert!(rhs - lhs > 0.0);
    }

    #[test]
    fn zero_function_gives_zero_margin() {
        let s = SectorSpec::pure(0.5, 0.7).unwrap();
        let zero = TestFn { p: vec![C::new(0.0, 0.0)], lambda: C::new(0.0, 0.0), k: 1 };
        assert_eq!(zero.xi_deriv().norm(&s, &NagumoParams::new(1.0, 0.5, 1.0)).unwrap(), 0.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let f = TestFn { p: vec![C::new(0.3, 0.1), C::new(-1.0, 0.5), C::new(0.2, 0.0)], lambda: C::new(0.4, -0.2), k: 2 };
        let z = C::new(0.7, 0.3);
        let h = 1e-6;
        let fd = (f.eval(z + h) - f.eval(z - h)) / (2.0 * h) * z;
        assert!((f.xi_deriv().eval(z) - fd).norm() < 1e-8);
        let g = TestFn { k: 1, ..f };
        let fd = (g.eval(z + h) - g.eval(z - h)) / (2.0 * h);
        assert!((g.deriv().eval(z) - fd).norm() < 1e-8);
    }

    #[test]
    fn every_suite_passes_a_few_trials() {
        for suite in Suite::ALL {
            let r = verify_inequalities(suite, 12, 7).unwrap();
            assert!(r.passed(), "{suite:?}: {r:?}");
        }
    }
}
