//! Formal k-Borel transform and ramification.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use super::TruncatedSeries;
use crate::coeff::{Coeff, Mode};
use crate::error::{Error, Result};

/// Normalization of the formal k-Borel transform `a_n x^n -> a_n / g(n) ξ^(n-k)`.
///
/// Each kernel has its own Laplace transform in [`crate::resum::laplace_sum`];
/// the pair is inverse on monomials in either case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BorelKernel {
    /// `g(n) = Γ(1 + n/k)`, Laplace kernel `x^-k ∫ ζ φ e^(-ζ/x^k) dζ`.
    #[default]
    GammaOnePlus,
    /// `g(n) = Γ(n/k)`, Laplace kernel `∫ φ e^(-ζ/x^k) dζ`. Turns products into
    /// convolutions; used by the Borel-plane equations and the summation pipeline.
    Classical,
}

impl BorelKernel {
    /// `g(n)` for this kernel at level `k`, as a float.
    pub fn gamma_factor(self, n: usize, k: u32) -> f64 {
        let a = n as f64 / k as f64;
        match self {
            BorelKernel::GammaOnePlus => gamma(1.0 + a),
            BorelKernel::Classical => gamma(a),
        }
    }

    /// `g(n)` exactly, for level 1.
    fn factorial_factor(self, n: usize) -> Coeff {
        let top = match self {
            BorelKernel::GammaOnePlus => n,
            BorelKernel::Classical => n - 1,
        };
        let mut f = Coeff::one(Mode::Exact);
        for i in 2..=top {
            f = f.scale_int(i as i64);
        }
        f
    }
}

/// Ramification direction: forward divides exponents by k, inverse multiplies them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RamifyDirection {
    Forward,
    Inverse,
}

/// Weight of the level-k convolution `ξ^p *_k ξ^q` in the stored variable.
pub fn gamma_ratio_kernel(p: usize, q: usize, k: u32) -> f64 {
    let k = k as f64;
    let (p, q) = (p as f64, q as f64);
    (ln_gamma(p / k + 1.0) + ln_gamma(q / k + 1.0) - ln_gamma((p + q) / k + 2.0)).exp()
}

impl TruncatedSeries {
    /// Formal k-Borel transform in variable `from`, renamed to `to`.
    ///
    /// Requires zero coefficients below `from^k`. Level 1 stays exact; higher
    /// levels are computed in float mode and flagged with a warning.
    pub fn formal_borel_k(&self, from: &str, to: &str, k: u32, kernel: BorelKernel) -> Result<TruncatedSeries> {
        if k == 0 {
            return Err(Error::Invalid("Borel level k must be positive".into()));
        }
        let d = self.var_index(from)?;
        let k_us = k as usize;
        if let Some(v) = self.valuation(from)? {
            if v < k_us {
                return Err(Error::Precondition(format!(
                    "formal Borel transform needs {from}-valuation ≥ {k}, found {v}"
                )));
            }
        }
        if self.trunc[d] < k_us {
            return Err(Error::TruncationOverflow { what: "formal Borel transform".into(), required: k_us });
        }
        let mut trunc = self.trunc.clone();
        trunc[d] -= k_us;
        let mode = if k == 1 { self.mode } else { Mode::Float };
        let mut out = TruncatedSeries::zeros_like_vars(&self.vars, &trunc, mode);
        out.vars[d] = super::Var::new(to);
        out.meta = self.meta.clone();
        out.meta.level = Some(k);
        for (mut e, c) in self.terms() {
            let n = e[d];
            let g = if k == 1 {
                kernel.factorial_factor(n).to_mode(mode)
            } else {
                Coeff::float(kernel.gamma_factor(n, k), 0.0)
            };
            e[d] = n - k_us;
            out.set(&e, c / &g);
        }
        if k > 1 {
            out.push_warning(format!("level-{k} Borel transform evaluated in float mode"));
        }
        Ok(out)
    }

    /// Termwise inverse of [`TruncatedSeries::formal_borel_k`].
    pub fn formal_borel_inverse_k(&self, from: &str, to: &str, k: u32, kernel: BorelKernel) -> Result<TruncatedSeries> {
        if k == 0 {
            return Err(Error::Invalid("Borel level k must be positive".into()));
        }
        let d = self.var_index(from)?;
        let k_us = k as usize;
        let mut trunc = self.trunc.clone();
        trunc[d] += k_us;
        let mode = if k == 1 { self.mode } else { Mode::Float };
        let mut out = TruncatedSeries::zeros_like_vars(&self.vars, &trunc, mode);
        out.vars[d] = super::Var::new(to);
        for (mut e, c) in self.terms() {
            let n = e[d] + k_us;
            let g = if k == 1 {
                kernel.factorial_factor(n).to_mode(mode)
            } else {
                Coeff::float(kernel.gamma_factor(n, k), 0.0)
            };
            e[d] = n;
            out.set(&e, c * &g);
        }
        Ok(out)
    }

    /// Ramification `ρ_k`: exponent relabelling in `v`.
    ///
    /// Forward requires every exponent in `kZ` and maps `v^(km)` to `v^m`.
    /// Inverse maps `v^m` to `v^(km)`; its box is `kN + k - 1` since all
    /// exponents not divisible by k are known to vanish.
    pub fn ramify(&self, v: &str, k: u32, dir: RamifyDirection) -> Result<TruncatedSeries> {
        if k == 0 {
            return Err(Error::Invalid("ramification level must be positive".into()));
        }
        if k == 1 {
            return Ok(self.clone());
        }
        let d = self.var_index(v)?;
        let k = k as usize;
        let mut trunc = self.trunc.clone();
        trunc[d] = match dir {
            RamifyDirection::Forward => self.trunc[d] / k,
            RamifyDirection::Inverse => self.trunc[d] * k + k - 1,
        };
        let mut out = TruncatedSeries::zeros_like_vars(&self.vars, &trunc, self.mode);
        out.meta = self.meta.clone();
        for (mut e, c) in self.terms() {
            match dir {
                RamifyDirection::Forward => {
                    if e[d] % k != 0 {
                        return Err(Error::Precondition(format!(
                            "forward ramification needs exponents in {k}Z, found {v}^{}",
                            e[d]
                        )));
                    }
                    e[d] /= k;
                }
                RamifyDirection::Inverse => e[d] *= k,
            }
            out.set(&e, c.clone());
        }
        Ok(out)
    }
}
