//! Borel summation of formal solutions in a direction `d`.
//!
//! Each t-slice is Borel transformed in `x`, continued by a Padé approximant and
//! Laplace integrated along `d`; the slices are then summed with their t-powers.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::gevrey::{gevrey_fit_series, GevreyFit, MIN_COEFFS};
use super::laplace::{laplace_decay, laplace_sum};
use super::pade::{pade_approximant, PadeApproximant, Pole};
use super::residual::pde_residual;
use crate::borel_plane::{borel_coefficients, singular_scan, volterra_from_order, Ray};
use crate::equation::{check_conditions, prepare_normal_form, EquationSpec};
use crate::error::{Error, Result};
use crate::nagumo::wrap_angle;
use crate::par::{map_slice, Execution};
use crate::series::{BorelKernel, TruncatedSeries};
use crate::solver::solve_formal;

type C64 = Complex64;

/// Cross-check disagreement above which the report is flagged.
pub const CROSS_CHECK_TOL: f64 = 1e-4;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Prepared normal form under (F) or (F′): `u = v + x·Σ tⁿ ℒ[w̃ₙ]`.
    #[default]
    Standard,
    /// Slice-wise summation on the cone `|t| < R|x|`, for equations outside (F′).
    Conical,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SumOptions {
    pub route: Route,
    /// `[L/M]` for every slice; by default `M = ⌊N/2⌋`, `L = N − M` with `N` the certified degree.
    pub pade: Option<(usize, usize)>,
    /// `R` of the cone `|t| < R|x|` (conical route only).
    pub cone_radius: f64,
    /// Finite-difference step relative to `|x|`.
    pub fd_step: f64,
    /// Compare ũ₁ with the Volterra oracle on `[0, 1]·e^{id}`.
    pub cross_check: bool,
    /// Largest acceptable estimate of the truncated t-tail.
    pub tolerance: Option<f64>,
    pub exec: Execution,
}

impl Default for SumOptions {
    fn default() -> Self {
        SumOptions {
            route: Route::Standard,
            pade: None,
            cone_radius: 0.25,
            fd_step: 1e-2,
            cross_check: false,
            tolerance: None,
            exec: Execution::Parallel,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SectorInfo {
    pub k: u32,
    pub d: f64,
    /// Half-opening left before the nearest singular direction, at most `π/(2k)`.
    pub epsilon: f64,
    /// Cone radius on the conical route, otherwise zero.
    #[serde(rename = "R")]
    pub r: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSample {
    pub t: C64,
    pub x: C64,
    pub u: C64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlicePoles {
    pub n: usize,
    pub poles: Vec<Pole>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummationReport {
    pub route: Route,
    pub direction: f64,
    pub sector: SectorInfo,
    pub samples: Vec<GridSample>,
    /// Largest residual over `samples`.
    pub pde_residual: f64,
    pub gevrey: Option<GevreyFit>,
    pub pole_map: Vec<SlicePoles>,
    /// Largest estimate of the omitted t-orders over the grid.
    pub tail_estimate: f64,
    /// Max |Volterra − Padé| for ũ₁ on the cross-check segment.
    pub cross_check: Option<f64>,
    pub warnings: Vec<String>,
}

/// One t-slice: polynomial head of degree `< k` plus the Padé continuation of the Borel tail.
#[derive(Clone, Debug, PartialEq)]
struct SliceSum {
    n: usize,
    head: Vec<C64>,
    pade: PadeApproximant,
}

/// A summed solution that can be evaluated on its domain.
#[derive(Clone, Debug, PartialEq)]
pub struct SummedSolution {
    pub route: Route,
    pub d: f64,
    pub k: u32,
    pub cone_radius: f64,
    slices: Vec<SliceSum>,
    /// `v(t, x)` of the prepared form; `u = v + x·Σ`.
    prefix: Option<TruncatedSeries>,
    pub warnings: Vec<String>,
}

fn slice_sum(n: usize, s: &TruncatedSeries, k: u32, d: f64, pade: Option<(usize, usize)>) -> Result<SliceSum> {
    let ku = k as usize;
    let mut head = Vec::with_capacity(ku);
    let mut rest = s.clone();
    for m in 0..ku.min(s.trunc()[0] + 1) {
        head.push(s.at(&[m]).to_c64());
        rest.set(&[m], crate::coeff::Coeff::zero(s.mode()));
    }
    if s.trunc()[0] < ku {
        return Err(Error::TruncationOverflow { what: format!("x-slice of t-order {n}"), required: ku });
    }
    let b = rest.formal_borel_k("x", "xi", k, BorelKernel::Classical)?;
    slice_from_borel(n, head, &b, d, pade)
}

/// Distance from `p` to the ray `arg ξ = d`.
fn ray_distance(p: C64, d: f64) -> f64 {
    let e = C64::from_polar(1.0, d);
    (p - e * (p * e.conj()).re.max(0.0)).norm()
}

/// Poles that count as singularities of the continuation.
fn live_poles(p: &PadeApproximant) -> Vec<C64> {
    p.poles.iter().filter(|q| q.residue.norm() > 1e-10).map(|q| q.position).collect()
}

/// Clearance demanded of Padé poles when choosing the denominator degree.
const RAY_CLEARANCE: f64 = 1e-2;

/// Padé continuation of one Borel slice.
///
/// Off the singular directions the Borel transform has no singularity on the
/// ray, so a pole there is spurious: the denominator degree is lowered until the
/// ray is clear, with a warning.
fn slice_from_borel(n: usize, head: Vec<C64>, b: &TruncatedSeries, d: f64, pade: Option<(usize, usize)>) -> Result<SliceSum> {
    let nb = b.trunc()[0];
    let (l, m) = pade.unwrap_or((nb - nb / 2, nb / 2));
    let first = pade_approximant(b, l, m)?;
    let blocked = |p: &PadeApproximant| live_poles(p).iter().any(|q| ray_distance(*q, d) < RAY_CLEARANCE);
    if pade.is_some() || !blocked(&first) {
        return Ok(SliceSum { n, head, pade: first });
    }
    for mm in (0..m).rev() {
        let mut cand = pade_approximant(b, l + (m - mm), mm)?;
        if !blocked(&cand) {
            cand.warnings.push(format!("[{l}/{m}] had a spurious pole on the ray; using [{}/{mm}]", l + m - mm));
            return Ok(SliceSum { n, head, pade: cand });
        }
    }
    Ok(SliceSum { n, head, pade: first })
}

impl SummedSolution {
    /// Largest t-order carried.
    pub fn orders(&self) -> usize {
        self.slices.iter().map(|s| s.n).max().unwrap_or(0)
    }

    /// `Lₙ(x)` for every slice, in slice order.
    fn slice_values(&self, x: C64) -> Result<Vec<C64>> {
        self.slices
            .iter()
            .map(|s| {
                let poles = live_poles(&s.pade);
                let pade = &s.pade;
                let lap = laplace_sum(&|z| pade.eval(z), &poles, self.d, self.k, BorelKernel::Classical, &[x])?[0];
                let head = s.head.iter().rev().fold(C64::new(0.0, 0.0), |a, c| a * x + c);
                Ok(head + lap)
            })
            .collect()
    }

    fn check_point(&self, t: C64, x: C64) -> Result<()> {
        if !(laplace_decay(self.d, self.k, x) > 1e-12) {
            return Err(Error::Precondition(format!("x = {x} is outside the summation sector of direction {}", self.d)));
        }
        if self.route == Route::Conical && !(t.norm() < self.cone_radius * x.norm()) {
            return Err(Error::Precondition(format!(
                "(t, x) = ({t}, {x}) lies outside the cone |t| < {}|x|",
                self.cone_radius
            )));
        }
        Ok(())
    }

    /// `u(t, x)` with the estimated size of the omitted t-orders.
    pub fn eval_with_tail(&self, t: C64, x: C64) -> Result<(C64, f64)> {
        self.check_point(t, x)?;
        let vals = self.slice_values(x)?;
        let mut sum = C64::new(0.0, 0.0);
        let mut mags = Vec::with_capacity(vals.len());
        for (s, v) in self.slices.iter().zip(&vals) {
            let term = t.powu(s.n as u32) * v;
            mags.push(term.norm());
            sum += term;
        }
        let scale = if self.prefix.is_some() { x } else { C64::new(1.0, 0.0) };
        // Orders beyond the certified x-box vanish identically; skip them.
        let nonzero: Vec<f64> = mags.into_iter().filter(|&m| m > 0.0).collect();
        let tail = match nonzero.as_slice() {
            [.., a, b] => {
                let rho = b / a;
                if rho < 1.0 { b * rho / (1.0 - rho) } else { f64::INFINITY }
            }
            _ => 0.0,
        } * scale.norm();
        let mut u = scale * sum;
        if let Some(v) = &self.prefix {
            u += v.eval(&[t, x]);
        }
        Ok((u, tail))
    }

    pub fn eval(&self, t: C64, x: C64) -> Result<C64> {
        Ok(self.eval_with_tail(t, x)?.0)
    }

    pub fn pole_map(&self) -> Vec<SlicePoles> {
        self.slices.iter().map(|s| SlicePoles { n: s.n, poles: s.pade.poles.clone() }).collect()
    }
}

/// Builds the summed solution without evaluating it on a grid.
pub fn summed_solution(eq: &EquationSpec, d: f64, options: &SumOptions) -> Result<SummedSolution> {
    let k = eq.k;
    check_direction(eq, d)?;
    let mut warnings = Vec::new();
    match options.route {
        Route::Standard => {
            let report = check_conditions(eq);
            if !report.condition_f_prime && !report.resonance {
                return Err(Error::Precondition(
                    "condition (F′) fails; use the conical route for this equation".into(),
                ));
            }
            let (eqn, v) = prepare_normal_form(eq, k as usize)?;
            let sol = solve_formal(&eqn)?;
            warnings.extend(sol.warnings.iter().cloned());
            let fam = borel_coefficients(&sol, &eqn)?;
            let slices = (1..=fam.nt())
                .map(|n| {
                    let m = fam.member(n)?.restrict(&[fam.certified]);
                    slice_from_borel(n, Vec::new(), &m, d, options.pade)
                })
                .collect::<Result<Vec<_>>>()?;
            for s in &slices {
                warnings.extend(s.pade.warnings.iter().map(|w| format!("t-order {}: {w}", s.n)));
            }
            Ok(SummedSolution { route: Route::Standard, d, k, cone_radius: 0.0, slices, prefix: Some(v), warnings })
        }
        Route::Conical => {
            if !(options.cone_radius > 0.0) {
                return Err(Error::Invalid("the conical route needs a cone radius R > 0".into()));
            }
            let sol = solve_formal(eq)?;
            warnings.extend(sol.warnings.iter().cloned());
            // Under τ = t/x row n of w(τ, x) is xⁿuₙ(x); summing uₙ and multiplying by
            // xⁿ gives the same k-sum with a longer certified tail.
            let (nt, nx) = sol.residual_order;
            let slices = (1..=nt)
                .map(|n| slice_sum(n, &sol.slice(n)?.restrict(&[nx]), k, d, options.pade))
                .collect::<Result<Vec<_>>>()?;
            for s in &slices {
                warnings.extend(s.pade.warnings.iter().map(|w| format!("t-order {}: {w}", s.n)));
            }
            Ok(SummedSolution {
                route: Route::Conical,
                d,
                k,
                cone_radius: options.cone_radius,
                slices,
                prefix: None,
                warnings,
            })
        }
    }
}

/// Distance from `d` to the nearest singular direction, capped at `π/(2k)`.
fn check_direction(eq: &EquationSpec, d: f64) -> Result<f64> {
    if !d.is_finite() {
        return Err(Error::Invalid("direction must be finite".into()));
    }
    let scan = singular_scan(&eq.b0(), &eq.c0(), eq.k, eq.trunc.0.max(1))?;
    let gap = scan
        .directions
        .iter()
        .map(|a| wrap_angle(a - d).abs())
        .fold(PI / (2.0 * eq.k as f64), f64::min);
    if gap < 1e-9 {
        return Err(Error::SingularDirection(format!(
            "d = {d} is a singular direction (ξₙ = (n − b(0))/c(0) lies on the ray)"
        )));
    }
    Ok(gap)
}

/// Sums the formal solution of `eq` along `d` and checks the PDE on `grid`.
pub fn borel_sum_solution(eq: &EquationSpec, d: f64, grid: &[(C64, C64)], options: &SumOptions) -> Result<SummationReport> {
    let epsilon = check_direction(eq, d)?;
    let sum = summed_solution(eq, d, options)?;
    let mut warnings = sum.warnings.clone();
    // Every stencil point must stay in the domain.
    for &(t, x) in grid {
        let h = options.fd_step * x.norm();
        for (dt, dx) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
            sum.check_point(t + dt, x + dx).map_err(|e| match e {
                Error::Precondition(m) => Error::Precondition(format!("finite-difference stencil of grid point leaves the domain: {m}")),
                other => other,
            })?;
        }
    }
    let evaluated: Vec<(C64, f64, f64)> = map_slice(grid, options.exec, |&(t, x)| -> Result<(C64, f64, f64)> {
        let (u, tail) = sum.eval_with_tail(t, x)?;
        let h = options.fd_step * x.norm();
        let r = pde_residual(eq, &|tt, xx| sum.eval(tt, xx), &[(t, x)], h, Execution::Sequential)?;
        Ok((u, tail, r.max))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let samples: Vec<GridSample> = grid
        .iter()
        .zip(&evaluated)
        .map(|(&(t, x), &(u, _, residual))| GridSample { t, x, u, residual })
        .collect();
    let pde_max = samples.iter().map(|s| s.residual).fold(0.0, f64::max);
    let tail_estimate = evaluated.iter().map(|e| e.1).fold(0.0, f64::max);
    if let Some(tol) = options.tolerance {
        if tail_estimate > tol {
            return Err(Error::Numerical(format!(
                "t-tail estimate {tail_estimate:e} exceeds the tolerance {tol:e}; raise N_t"
            )));
        }
    }
    if sum.orders() >= 2 {
        warnings.push("t-tail estimated from the ratio of the last two orders".into());
    }
    let formal = solve_formal(eq)?;
    let gevrey = match gevrey_fit_series(&formal.series, "x") {
        Ok(g) => Some(g),
        Err(_) => {
            warnings.push(format!("Gevrey fit skipped: fewer than {MIN_COEFFS} nonzero x-orders"));
            None
        }
    };
    let cross_check = if options.cross_check { cross_check(eq, d, &sum, &mut warnings) } else { None };
    Ok(SummationReport {
        route: options.route,
        direction: d,
        sector: SectorInfo { k: eq.k, d, epsilon, r: sum.cone_radius },
        samples,
        pde_residual: pde_max,
        gevrey,
        pole_map: sum.pole_map(),
        tail_estimate,
        cross_check,
        warnings,
    })
}

/// Volterra continuation of ũ₁ against the Padé slice on `s ∈ [0, 1]`.
fn cross_check(eq: &EquationSpec, d: f64, sum: &SummedSolution, warnings: &mut Vec<String>) -> Option<f64> {
    if sum.route != Route::Standard || eq.k != 1 {
        warnings.push("Volterra cross-check needs the standard route at level 1".into());
        return None;
    }
    let run = || -> Result<f64> {
        let (eqn, _) = prepare_normal_form(eq, 1)?;
        let fam = borel_coefficients(&solve_formal(&eqn)?, &eqn)?;
        let sol = volterra_from_order(&fam, 1, &Ray { d, h: 1.0 / 256.0, length: 1.0 })?;
        let pade = &sum.slices[0].pade;
        Ok(sol
            .s
            .iter()
            .zip(&sol.psi)
            .map(|(s, p)| (pade.eval(C64::from_polar(*s, d)) - p).norm())
            .fold(0.0, f64::max))
    };
    match run() {
        Ok(diff) => {
            if diff > CROSS_CHECK_TOL {
                warnings.push(format!("Padé and Volterra continuations of ũ₁ differ by {diff:e}"));
            }
            Some(diff)
        }
        Err(e) => {
            warnings.push(format!("Volterra cross-check failed: {e}"));
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equation::parse_spec;

    const EULER: &str = r#"{"k":1,"a":"x","b":"0","c":"1","trunc":[3,14]}"#;

    fn euler_closed_form(x: f64) -> f64 {
        // ∫₀^∞ e^{s/x}/(1+s) ds·(−1) for x < 0.
        let z = -1.0 / x;
        -z.exp() * statrs::function::exponential::integral(z, 1).unwrap()
    }

    #[test]
    fn euler_sum_matches_closed_form() {
        let eq = parse_spec(EULER, false).unwrap();
        let sum = summed_solution(&eq, PI, &SumOptions::default()).unwrap();
        for x in [-0.1, -0.2, -0.5] {
            let u = sum.eval(C64::new(1.0, 0.0), C64::new(x, 0.0)).unwrap();
            assert!((u.re - euler_closed_form(x)).abs() < 1e-10, "{x}: {u}");
        }
    }

    #[test]
    fn euler_report() {
        let eq = parse_spec(EULER, false).unwrap();
        let grid: Vec<(C64, C64)> = (0..4).map(|i| (C64::new(1.0, 0.0), C64::new(-0.1 - 0.05 * i as f64, 0.02))).collect();
        let opts = SumOptions { cross_check: true, ..SumOptions::default() };
        let r = borel_sum_solution(&eq, PI, &grid, &opts).unwrap();
        assert!(r.pde_residual < 1e-6, "{}", r.pde_residual);
        assert!(r.cross_check.unwrap() < 1e-4);
        assert!((r.gevrey.unwrap().k_inverse - 1.0).abs() < 0.1);
        assert!(r.pole_map[0].poles.iter().any(|p| (p.position - 1.0).norm() < 1e-6));
    }

    #[test]
    fn singular_direction_and_zero_forcing() {
        let eq = parse_spec(EULER, false).unwrap();
        assert!(matches!(summed_solution(&eq, 0.0, &SumOptions::default()), Err(Error::SingularDirection(_))));
        let z = parse_spec(r#"{"k":1,"a":"0","b":"0","c":"1","trunc":[3,12]}"#, false).unwrap();
        let grid = [(C64::new(0.5, 0.0), C64::new(-0.2, 0.0))];
        let r = borel_sum_solution(&z, PI, &grid, &SumOptions::default()).unwrap();
        assert_eq!(r.samples[0].u, C64::new(0.0, 0.0));
        assert_eq!(r.pde_residual, 0.0);
    }

    #[test]
    fn nearby_directions_agree() {
        let eq = parse_spec(r#"{"k":1,"a":"x","b":"1/3","c":"1","nonlinear":[{"i":0,"j":2,"alpha":0,"coeff":"x"}],"trunc":[4,14]}"#, false).unwrap();
        let p = (C64::new(0.2, 0.0), C64::new(-0.15, 0.01));
        let u1 = summed_solution(&eq, PI, &SumOptions::default()).unwrap().eval(p.0, p.1).unwrap();
        let u2 = summed_solution(&eq, PI - 0.2, &SumOptions::default()).unwrap().eval(p.0, p.1).unwrap();
        assert!((u1 - u2).norm() < 1e-6, "{u1} vs {u2}");
    }

    #[test]
    fn conical_domain_enforced() {
        let eq = parse_spec(r#"{"k":1,"a":"x","b":"0","c":"1","nonlinear":[{"i":1,"j":0,"alpha":1,"coeff":"1"}],"trunc":[6,16]}"#, false).unwrap();
        assert!(matches!(summed_solution(&eq, PI, &SumOptions::default()), Err(Error::Precondition(_))));
        let opts = SumOptions { route: Route::Conical, cone_radius: 0.2, ..SumOptions::default() };
        let sum = summed_solution(&eq, PI, &opts).unwrap();
        assert!(sum.eval(C64::new(0.1, 0.0), C64::new(-0.2, 0.0)).is_err());
        assert!(sum.eval(C64::new(0.02, 0.0), C64::new(-0.2, 0.0)).is_ok());
    }

    #[test]
    fn conical_route_residual() {
        let eq = parse_spec(r#"{"k":1,"a":"x","b":"0","c":"1","nonlinear":[{"i":1,"j":0,"alpha":1,"coeff":"1"}],"trunc":[6,16]}"#, false).unwrap();
        let opts = SumOptions { route: Route::Conical, cone_radius: 0.2, ..SumOptions::default() };
        let grid: Vec<(C64, C64)> = (0..6)
            .map(|i| {
                let x = C64::new(-0.1 - 0.04 * i as f64, 0.0);
                (C64::from_polar(0.1 * x.norm(), 0.5 * i as f64), x)
            })
            .collect();
        let r = borel_sum_solution(&eq, PI, &grid, &opts).unwrap();
        assert!(r.pde_residual < 1e-5, "{}", r.pde_residual);
        assert_eq!(r.sector.r, 0.2);
    }
}
