use num_traits::{Signed, Zero};
use serde::{Serialize, Serializer};

use crate::coeff::{fmt_rat, Rat};
use crate::error::{Error, Result};
use crate::series::TruncatedSeries;

/// Newton polygon of the linearized operator `Σ ∂_{z_i}F(x,Φ) δⁱ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NewtonPolygon {
    /// `(i, v_i)` for every derivative with a finite valuation at the truncation order.
    pub points: Vec<(usize, usize)>,
    /// Indices whose valuation exceeds the truncation order.
    pub order_limited: Vec<usize>,
    /// Nonzero slopes of the lower boundary, increasing.
    #[serde(serialize_with = "ser_rats")]
    pub slopes: Vec<Rat>,
    pub fuchsian: bool,
}

fn ser_rats<S: Serializer>(v: &[Rat], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(fmt_rat))
}

impl NewtonPolygon {
    /// No slope lies in the open interval `(0, k)`.
    pub fn gevrey_admissible(&self, k: &Rat) -> bool {
        !self.slopes.iter().any(|s| s.is_positive() && s < k)
    }

    /// True when some valuation could not be resolved at this truncation.
    pub fn is_order_limited(&self) -> bool {
        !self.order_limited.is_empty()
    }
}

/// Builds the Newton polygon of `F(x, z₀..z_m)` along `φ`, with `Φ_i = δⁱφ`.
///
/// `F` has variables `x, z0, .., zm` (any names after the first) and is read
/// as a polynomial in the `z`. `φ` must vanish at `x = 0`.
pub fn newton_polygon(f: &TruncatedSeries, phi: &TruncatedSeries) -> Result<NewtonPolygon> {
    let names: Vec<String> = f.vars().iter().map(|v| v.as_str().to_string()).collect();
    if names.len() < 2 || names[0] != "x" {
        return Err(Error::VarMismatch("F must be a series in (x, z0, .., zm)".into()));
    }
    if phi.nvars() != 1 || phi.vars()[0].as_str() != "x" {
        return Err(Error::VarMismatch("φ must be a series in x".into()));
    }
    let m = names.len() - 2;
    let mut big_phi = vec![phi.clone()];
    for i in 1..=m {
        let next = big_phi[i - 1].euler("x")?;
        big_phi.push(next);
    }
    let mut values = Vec::with_capacity(m + 1);
    for (i, zi) in names[1..].iter().enumerate() {
        if f.trunc_of(zi)? == 0 {
            values.push((i, None));
            continue;
        }
        let d = f.derive(zi)?;
        let subs: Vec<(&str, &TruncatedSeries)> =
            names[1..].iter().map(|z| z.as_str()).zip(big_phi.iter()).collect();
        let g = d.substitute(&["x"], &subs)?;
        values.push((i, g.valuation("x")?));
    }
    let points: Vec<(usize, usize)> = values.iter().filter_map(|(i, v)| v.map(|v| (*i, v))).collect();
    let order_limited: Vec<usize> = values.iter().filter(|(_, v)| v.is_none()).map(|(i, _)| *i).collect();
    if points.is_empty() {
        return Err(Error::TruncationOverflow {
            what: "Newton polygon (every valuation exceeds the truncation)".into(),
            required: f.trunc()[0].min(phi.trunc()[0]) + 1,
        });
    }
    let fuchsian = match values[m].1 {
        Some(vm) => values.iter().all(|(_, v)| v.map_or(true, |v| vm <= v)),
        None => false,
    };
    Ok(NewtonPolygon { slopes: lower_hull_slopes(&points), points, order_limited, fuchsian })
}

/// Slopes of the lower convex boundary of the vertical half-lines above `points`.
fn lower_hull_slopes(points: &[(usize, usize)]) -> Vec<Rat> {
    let cross = |o: (usize, usize), a: (usize, usize), b: (usize, usize)| -> i128 {
        let (ox, oy) = (o.0 as i128, o.1 as i128);
        (a.0 as i128 - ox) * (b.1 as i128 - oy) - (a.1 as i128 - oy) * (b.0 as i128 - ox)
    };
    let mut hull: Vec<(usize, usize)> = Vec::new();
    for &p in points {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.windows(2)
        .map(|w| Rat::new((w[1].1 as i64 - w[0].1 as i64).into(), ((w[1].0 - w[0].0) as i64).into()))
        .filter(|s| !s.is_zero())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{rat, Coeff, Mode};

    fn f_from(terms: &[(&[usize], i64)], nx: usize) -> TruncatedSeries {
        let mut f = TruncatedSeries::zeros(&["x", "z0", "z1"], &[nx, 2, 2], Mode::Exact);
        for (e, c) in terms {
            f.set(e, Coeff::from_int(*c, Mode::Exact));
        }
        f
    }

    fn x_series(c: &[i64]) -> TruncatedSeries {
        TruncatedSeries::univariate("x", c.iter().map(|v| Coeff::from_int(*v, Mode::Exact)).collect(), 6)
    }

    #[test]
    fn flat_polygon() {
        let f = f_from(&[(&[0, 0, 1], 1), (&[0, 1, 0], -1)], 6);
        let p = newton_polygon(&f, &x_series(&[0, 1])).unwrap();
        assert_eq!(p.points, vec![(0, 0), (1, 0)]);
        assert!(p.slopes.is_empty());
        assert!(p.fuchsian);
    }

    #[test]
    fn fuchsian_reading() {
        let f = f_from(&[(&[0, 0, 1], 1), (&[1, 1, 0], -1)], 6);
        let p = newton_polygon(&f, &x_series(&[0, 1])).unwrap();
        assert_eq!(p.points, vec![(0, 1), (1, 0)]);
        assert!(p.fuchsian);
    }

    #[test]
    fn majorant_polygon_has_slope_one() {
        // z0 - x - z1^2 - 2x z1 along φ = x + x^2 + 4x^3.
        let f = f_from(&[(&[0, 1, 0], 1), (&[1, 0, 0], -1), (&[0, 0, 2], -1), (&[1, 0, 1], -2)], 6);
        let p = newton_polygon(&f, &x_series(&[0, 1, 1, 4])).unwrap();
        assert_eq!(p.points, vec![(0, 0), (1, 1)]);
        assert_eq!(p.slopes, vec![rat(1, 1)]);
        assert!(p.gevrey_admissible(&rat(1, 1)));
        assert!(!p.gevrey_admissible(&rat(2, 1)));
        assert!(!p.fuchsian);
    }
}
