//! Local expansions with a simple pole and logarithmic terms at a point ξₙ.

use num_complex::Complex64;

use super::TruncatedSeries;
use crate::coeff::Coeff;

/// One term `(ξ-ξₙ)^(-pole_order) · A(ξ-ξₙ) · L(ξ)^log_power`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogTerm {
    pub log_power: u32,
    pub pole_order: u32,
    /// `A` as a series in `eta = ξ - ξₙ`.
    pub series: TruncatedSeries,
}

/// Sum of [`LogTerm`]s centred at `base_point`.
///
/// The logarithm is `L(ξ) = log(1 - ξ/ξₙ)` on the principal branch, which
/// vanishes at the origin. It differs from `log(ξ - ξₙ)` by a constant that
/// is absorbed into the log-free term.
#[derive(Clone, Debug, PartialEq)]
pub struct LogSeries {
    pub base_point: Coeff,
    pub terms: Vec<LogTerm>,
}

impl LogSeries {
    pub fn zero(base_point: Coeff) -> LogSeries {
        LogSeries { base_point, terms: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.series.is_zero())
    }

    /// Highest log power carrying a nonzero coefficient.
    pub fn max_log_power(&self) -> Option<u32> {
        self.terms.iter().filter(|t| !t.series.is_zero()).map(|t| t.log_power).max()
    }

    pub fn eval(&self, xi: Complex64) -> Complex64 {
        let xn = self.base_point.to_c64();
        let eta = xi - xn;
        let log = (Complex64::new(1.0, 0.0) - xi / xn).ln();
        let mut sum = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            let a = t.series.eval(&[eta]);
            sum += a * log.powu(t.log_power) / eta.powu(t.pole_order);
        }
        sum
    }
}
