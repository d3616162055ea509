//! `[L/M]` Padé approximants with poles and residues.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::TruncatedSeries;

type C64 = Complex64;

/// Relative singular-value floor below which the denominator system is treated as defective.
const SVD_FLOOR: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Pole {
    pub position: C64,
    pub residue: C64,
}

/// `P(ξ)/Q(ξ)` with `deg P ≤ L`, `deg Q ≤ M` and `Q(0) = 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PadeApproximant {
    #[serde(rename = "L")]
    pub l: usize,
    /// Denominator degree after any reduction.
    #[serde(rename = "M")]
    pub m: usize,
    pub num: Vec<C64>,
    pub den: Vec<C64>,
    pub poles: Vec<Pole>,
    pub warnings: Vec<String>,
}

fn horner(p: &[C64], z: C64) -> C64 {
    p.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * z + c)
}

fn horner_deriv(p: &[C64], z: C64) -> C64 {
    p.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(C64::new(0.0, 0.0), |acc, (i, c)| acc * z + c * i as f64)
}

/// Roots of `p` from the eigenvalues of its companion matrix.
pub(crate) fn poly_roots(p: &[C64]) -> Result<Vec<C64>> {
    let scale = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut deg = p.len().saturating_sub(1);
    while deg > 0 && p[deg].norm() <= 1e-14 * scale {
        deg -= 1;
    }
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = p[deg];
    let mut comp = DMatrix::<C64>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -p[i] / lead;
    }
    comp.schur()
        .eigenvalues()
        .map(|v| v.iter().copied().collect())
        .ok_or_else(|| Error::Numerical("companion eigenvalues did not converge".into()))
}

impl PadeApproximant {
    pub fn eval(&self, z: C64) -> C64 {
        horner(&self.num, z) / horner(&self.den, z)
    }

    /// Pole closest to the origin.
    pub fn nearest_pole(&self) -> Option<Pole> {
        self.poles.iter().copied().min_by(|a, b| a.position.norm().total_cmp(&b.position.norm()))
    }
}

/// Solves for `Q` with `Q(0) = 1` so that `Q·f − P = O(ξ^{L+M+1})`.
fn denominator(c: &[C64], l: usize, m: usize) -> Option<Vec<C64>> {
    if m == 0 {
        return Some(vec![C64::new(1.0, 0.0)]);
    }
    let at = |i: isize| if i < 0 { C64::new(0.0, 0.0) } else { c[i as usize] };
    let a = DMatrix::from_fn(m, m, |i, j| at(l as isize + i as isize - j as isize));
    let rhs = DVector::from_fn(m, |i, _| -at(l as isize + i as isize + 1));
    let svd = a.svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    if !(smax > 0.0) || smin < SVD_FLOOR * smax {
        return None;
    }
    let q = svd.solve(&rhs, 0.0).ok()?;
    let mut den = vec![C64::new(1.0, 0.0)];
    den.extend(q.iter().copied());
    Some(den)
}

/// `[L/M]` approximant of a univariate series.
///
/// A defective denominator system lowers `M` until it is well conditioned;
/// each reduction is recorded as a warning.
pub fn pade_approximant(f: &TruncatedSeries, l: usize, m: usize) -> Result<PadeApproximant> {
    if f.nvars() != 1 {
        return Err(Error::Invalid("Padé input must be a univariate series".into()));
    }
    let c = f.to_c64_vec();
    if l + m + 1 > c.len() {
        return Err(Error::TruncationOverflow { what: format!("[{l}/{m}] Padé approximant"), required: l + m });
    }
    let mut warnings = Vec::new();
    if c.iter().all(|v| v.norm() == 0.0) {
        if m > 0 {
            warnings.push(format!("zero input: denominator degree reduced from {m} to 0"));
        }
        return Ok(PadeApproximant {
            l,
            m: 0,
            num: vec![C64::new(0.0, 0.0)],
            den: vec![C64::new(1.0, 0.0)],
            poles: Vec::new(),
            warnings,
        });
    }
    let mut mm = m;
    let den = loop {
        if let Some(q) = denominator(&c, l, mm) {
            break q;
        }
        mm -= 1;
    };
    if mm < m {
        warnings.push(format!("defective [{l}/{m}] system: denominator degree reduced to {mm}"));
    }
    let num: Vec<C64> = (0..=l)
        .map(|i| (0..=i.min(mm)).map(|j| den[j] * c[i - j]).sum())
        .collect();
    let roots = poly_roots(&den)?;
    let poles = roots
        .into_iter()
        .map(|p| Pole { position: p, residue: horner(&num, p) / horner_deriv(&den, p) })
        .collect();
    Ok(PadeApproximant { l, m: mm, num, den, poles, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Coeff;

    fn series(c: &[f64]) -> TruncatedSeries {
        TruncatedSeries::univariate("xi", c.iter().map(|&v| Coeff::float(v, 0.0)).collect(), c.len() - 1)
    }

    #[test]
    fn geometric_series() {
        let f = series(&[1.0; 11]);
        let p = pade_approximant(&f, 0, 1).unwrap();
        assert!((p.poles[0].position - 1.0).norm() < 1e-14);
        assert!((p.poles[0].residue + 1.0).norm() < 1e-14);
        let p = pade_approximant(&f, 9, 1).unwrap();
        assert!((p.nearest_pole().unwrap().position - 1.0).norm() < 1e-12);
        assert!((p.eval(C64::new(-3.0, 0.0)) - 0.25).norm() < 1e-12);
    }

    #[test]
    fn half_ratio() {
        let c: Vec<f64> = (0..8).map(|n| 0.5f64.powi(n)).collect();
        let p = pade_approximant(&series(&c), 1, 1).unwrap();
        assert!((p.poles[0].position - 2.0).norm() < 1e-13);
    }

    #[test]
    fn polynomial_is_itself() {
        let f = series(&[1.0, -2.0, 3.0]);
        let p = pade_approximant(&f, 2, 0).unwrap();
        assert_eq!(p.num, vec![C64::new(1.0, 0.0), C64::new(-2.0, 0.0), C64::new(3.0, 0.0)]);
        assert!(p.poles.is_empty());
    }

    #[test]
    fn defective_system_reduces_degree() {
        let f = series(&[1.0; 13]);
        let p = pade_approximant(&f, 6, 6).unwrap();
        assert_eq!(p.m, 1);
        assert!(!p.warnings.is_empty());
        assert!((p.eval(C64::new(-1.0, 0.5)) - 1.0 / C64::new(2.0, -0.5)).norm() < 1e-12);
        let z = pade_approximant(&series(&[0.0; 5]), 2, 2).unwrap();
        assert_eq!(z.m, 0);
        assert!(pade_approximant(&f, 10, 3).is_err());
    }

    #[test]
    fn exponential_matches_taylor() {
        let mut c = vec![1.0];
        for n in 1..12 {
            c.push(c[n - 1] / n as f64);
        }
        let p = pade_approximant(&series(&c), 5, 5).unwrap();
        for x in [-1.0, 0.5, 2.0] {
            assert!((p.eval(C64::new(x, 0.0)).re - f64::exp(x)).abs() < 1e-6 * f64::exp(x));
        }
    }
}
