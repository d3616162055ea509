//! Grid supremum of a nonnegative weight over polar regions.

use super::golden_max;
use crate::par::{map_range, Execution};

/// `φ ∈ [phi_lo, phi_hi]`, `0 ≤ r < r_hi`, sampled at `n_phi` angles.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Region {
    pub phi_lo: f64,
    pub phi_hi: f64,
    pub r_hi: f64,
    pub n_phi: usize,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Best {
    pub value: f64,
    pub r: f64,
    pub phi: f64,
    /// Largest value on the outer arc of unbounded regions.
    pub tail: f64,
}

const POLISH_CELLS: usize = 5;

fn radii(r_hi: f64) -> Vec<f64> {
    let mut rs = vec![0.0];
    let mut j = -40i32;
    loop {
        let r = (j as f64 / 8.0).exp();
        if r >= r_hi {
            break;
        }
        rs.push(r);
        j += 1;
    }
    rs.push(r_hi * (1.0 - 1e-9));
    rs
}

fn angles(reg: &Region) -> Vec<f64> {
    let n = reg.n_phi.max(2);
    (0..n).map(|i| reg.phi_lo + (reg.phi_hi - reg.phi_lo) * i as f64 / (n - 1) as f64).collect()
}

/// Supremum of `w(r, φ)` over the union of `regions`.
///
/// The first region is treated as unbounded: its outer arc value is reported
/// as the tail estimate.
pub(crate) fn grid_sup(w: &(dyn Fn(f64, f64) -> f64 + Sync), regions: &[Region]) -> Best {
    let mut cells: Vec<(f64, usize, usize, usize)> = Vec::new();
    let mut tail = 0.0f64;
    let grids: Vec<(Vec<f64>, Vec<f64>)> = regions.iter().map(|g| (radii(g.r_hi), angles(g))).collect();
    for (ri, (rs, phis)) in grids.iter().enumerate() {
        let rows = map_range(phis.len(), Execution::Parallel, |i| {
            rs.iter().map(|&r| w(r, phis[i])).collect::<Vec<f64>>()
        });
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let v = if v.is_nan() { f64::INFINITY } else { *v };
                cells.push((v, ri, i, j));
            }
            if ri == 0 {
                tail = tail.max(*row.last().unwrap());
            }
        }
    }
    cells.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = Best { value: 0.0, r: 0.0, phi: 0.0, tail };
    if let Some(&(v, ri, i, j)) = cells.first() {
        let (rs, phis) = &grids[ri];
        best = Best { value: v, r: rs[j], phi: phis[i], tail };
    }
    if !best.value.is_finite() || best.value == 0.0 {
        return best;
    }
    let polished = map_range(cells.len().min(POLISH_CELLS), Execution::Parallel, |c| {
        let (_, ri, i, j) = cells[c];
        let (rs, phis) = &grids[ri];
        polish(w, &regions[ri], rs, phis, i, j)
    });
    for (v, r, phi) in polished {
        if v > best.value {
            best.value = v;
            best.r = r;
            best.phi = phi;
        }
    }
    best
}

/// Alternating golden-section refinement inside the neighbouring cells.
fn polish(w: &(dyn Fn(f64, f64) -> f64 + Sync), reg: &Region, rs: &[f64], phis: &[f64], i: usize, j: usize) -> (f64, f64, f64) {
    let (mut r, mut phi) = (rs[j], phis[i]);
    let mut v = w(r, phi);
    let r_lo = if j > 0 { rs[j - 1] } else { 0.0 };
    let r_hi = rs[(j + 1).min(rs.len() - 1)];
    let p_lo = phis[i.saturating_sub(1)];
    let p_hi = phis[(i + 1).min(phis.len() - 1)];
    for _ in 0..3 {
        if r_hi > r_lo {
            let (nr, nv) = golden_max(|x| w(x, phi), r_lo, r_hi.min(reg.r_hi), 1e-10 * r_hi.max(1.0));
            if nv > v {
                r = nr;
                v = nv;
            }
        }
        if p_hi > p_lo {
            let (np, nv) = golden_max(|a| w(r, a), p_lo, p_hi, 1e-11);
            if nv > v {
                phi = np;
                v = nv;
            }
        }
    }
    (v, r, phi)
}
