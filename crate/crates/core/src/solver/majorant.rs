use serde::{Deserialize, Serialize};

use super::fuchsian::{fuchsian_ode_solve, FuchsianForm};
use crate::coeff::{Coeff, Mode};
use crate::error::{Error, Result};
use crate::series::TruncatedSeries;

/// Weight `W_{i,j,α} ≥ 0` of one nonlinear term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MajorantTerm {
    pub i: usize,
    pub j: usize,
    pub alpha: usize,
    pub w: f64,
}

/// Solves `Y = Y₁t + (2/σ) Σ W_{ijα} tⁱ (2Y/σ)ʲ (2(E + 1/σ)Y)^α` through t-order `n`.
pub fn majorant_series(y1: f64, terms: &[MajorantTerm], sigma: f64, e: f64, n: usize) -> Result<TruncatedSeries> {
    if !(sigma > 0.0) {
        return Err(Error::Invalid(format!("σ must be positive, got {sigma}")));
    }
    if y1 < 0.0 || terms.iter().any(|t| t.w < 0.0) {
        return Err(Error::Invalid("majorant weights must be nonnegative".into()));
    }
    if let Some(t) = terms.iter().find(|t| t.i >= 2 && t.j == 0 && t.alpha == 0 && t.w != 0.0) {
        return Err(Error::Precondition(format!("W_{{{},0,0}} must vanish", t.i)));
    }
    if let Some(t) = terms.iter().find(|t| t.i + t.j + t.alpha < 2) {
        return Err(Error::Invalid(format!("term ({},{},{}) needs i+j+α ≥ 2", t.i, t.j, t.alpha)));
    }
    let ydeg = terms.iter().map(|t| t.j + t.alpha).max().unwrap_or(1).max(1);
    let mut h = TruncatedSeries::zeros(&["t", "y", "z"], &[n, ydeg, 0], Mode::Float);
    h.set(&[1, 0, 0], Coeff::float(y1, 0.0));
    let du = 2.0 * (e + 1.0 / sigma);
    for t in terms {
        if t.i > n {
            continue;
        }
        let c = 2.0 / sigma * t.w * (2.0 / sigma).powi(t.j as i32) * du.powi(t.alpha as i32);
        let idx = [t.i, t.j + t.alpha, 0];
        let cur = h.at(&idx);
        h.set(&idx, &cur + &Coeff::float(c, 0.0));
    }
    fuchsian_ode_solve(&FuchsianForm::Implicit(h), n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_case() {
        let y = majorant_series(0.7, &[], 2.0, 1.0, 5).unwrap();
        assert_eq!(y.at(&[1]).to_c64().re, 0.7);
        assert!(y.restrict(&[5]).terms().all(|(e, _)| e[0] == 1));
    }

    #[test]
    fn quadratic_term() {
        let (y1, w, s) = (0.5, 3.0, 1.5);
        let y = majorant_series(y1, &[MajorantTerm { i: 0, j: 2, alpha: 0, w }], s, 0.0, 4).unwrap();
        let expect = 8.0 * w / s.powi(3) * y1 * y1;
        assert!((y.at(&[2]).to_c64().re - expect).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(majorant_series(1.0, &[], 0.0, 1.0, 3).is_err());
        assert!(majorant_series(1.0, &[MajorantTerm { i: 2, j: 0, alpha: 0, w: 1.0 }], 1.0, 1.0, 3).is_err());
    }
}
