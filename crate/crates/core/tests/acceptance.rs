//! One PASS/FAIL line per acceptance criterion; run with `--nocapture` to see them.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;

use summa::borel_plane::{
    borel_coefficients, perturbation_log_expansion, sigma_bound, singular_scan, volterra_from_order, volterra_solve, Ray,
};
use summa::coeff::{rat, rat_int};
use summa::equation::{check_conditions, newton_polygon, parse_spec, prepare_normal_form};
use summa::nagumo::{m0_constant, verify_inequalities, SectorSpec, Suite};
use summa::resum::{borel_sum_solution, gevrey_fit, pade_approximant, Route, SumOptions};
use summa::solver::{fuchsian_ode_solve, solve_anticipative, solve_formal, FuchsianForm};
use summa::{Coeff, Mode, TruncatedSeries};

type C64 = Complex64;
type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e<T: std::fmt::Display>(x: T) -> String {
    x.to_string()
}

fn poly_c64(s: &TruncatedSeries) -> impl Fn(C64) -> C64 {
    let c = s.to_c64_vec();
    move |z| c.iter().rev().fold(C64::new(0.0, 0.0), |a, q| a * z + q)
}

const EXACT_SPECS: [&str; 12] = [
    r#"{"k":1,"a":"x","b":"0","c":"1"}"#,
    r#"{"k":1,"a":"x+2x^2","b":"1/2","c":"1"}"#,
    r#"{"k":1,"a":"x^2","b":"-1/3+x","c":"2-x"}"#,
    r#"{"k":2,"a":"x^2+x^3","b":"1/2","c":"1"}"#,
    r#"{"k":3,"a":"x^3","b":"1/4","c":"1"}"#,
    r#"{"k":1,"a":"(1+i)x","b":"1/2","c":"i"}"#,
    r#"{"k":1,"a":"x","b":"1/3","c":"1","nonlinear":[{"i":0,"j":2,"alpha":0,"coeff":"1"}]}"#,
    r#"{"k":1,"a":"x","b":"-1/2","c":"1+x","nonlinear":[{"i":1,"j":1,"alpha":0,"coeff":"x"},{"i":2,"j":0,"alpha":0,"coeff":"x^3"}]}"#,
    r#"{"k":1,"a":"x","b":"1/3","c":"1","form":"euler","nonlinear":[{"i":0,"j":0,"alpha":2,"coeff":"x"}]}"#,
    r#"{"k":1,"a":"x-x^2","b":"2/3","c":"-1","nonlinear":[{"i":0,"j":1,"alpha":1,"coeff":"x^2"},{"i":0,"j":3,"alpha":0,"coeff":"1"}]}"#,
    r#"{"k":2,"a":"x^2+x^3","b":"1/2+x","c":"1-x","nonlinear":[{"i":0,"j":2,"alpha":0,"coeff":"1"},{"i":1,"j":0,"alpha":1,"coeff":"x"}]}"#,
    r#"{"k":1,"a":"x","b":"-2","c":"-1","form":"euler","nonlinear":[{"i":0,"j":1,"alpha":1,"coeff":"x"},{"i":2,"j":0,"alpha":0,"coeff":"x^2"}]}"#,
];

fn with_trunc(spec: &str, nt: usize, nx: usize) -> String {
    format!("{},\"trunc\":[{nt},{nx}]}}", spec.trim_end_matches('}'))
}

fn exact_residual() -> Outcome {
    let start = Instant::now();
    let mut nonlinear = 0;
    for spec in EXACT_SPECS {
        let eq = parse_spec(&with_trunc(spec, 12, 12), false).map_err(e)?;
        ensure(eq.mode == Mode::Exact, "exact mode expected")?;
        ensure(check_conditions(&eq).condition_f, format!("condition (F) fails for {spec}"))?;
        let sol = solve_formal(&eq).map_err(e)?;
        ensure(sol.residual_order.0 == 12, format!("t-orders certified only through {:?}", sol.residual_order))?;
        ensure(sol.residual(&eq).map_err(e)?.is_zero(), format!("nonzero residual for {spec}"))?;
        nonlinear += usize::from(!eq.nonlinear.is_empty());
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs <= 60.0, format!("took {secs:.1} s"))?;
    Ok(format!("{} specs ({nonlinear} nonlinear), zero residual, {secs:.2} s", EXACT_SPECS.len()))
}

fn euler_chain() -> Outcome {
    let eq = parse_spec(&with_trunc(EXACT_SPECS[0], 2, 12), false).map_err(e)?;
    let sol = solve_formal(&eq).map_err(e)?;
    let mut fact = Coeff::one(Mode::Exact);
    for n in 0..=10usize {
        if n > 0 {
            fact = fact.scale_int(n as i64);
        }
        ensure(sol.series.at(&[1, n + 1]) == fact, format!("u_(1,{}) ≠ {n}!", n + 1))?;
    }
    let fam = borel_coefficients(&sol, &eq).map_err(e)?;
    let u1 = fam.member(1).map_err(e)?;
    let geometric = (0..=10).all(|m| u1.at(&[m]) == Coeff::one(Mode::Exact));
    ensure(geometric, "ũ₁ is not the geometric series")?;
    let pade = pade_approximant(&u1.restrict(&[11]), 10, 1).map_err(e)?;
    let pole = pade.nearest_pole().ok_or("no Padé pole")?;
    let pole_err = (pole.position - 1.0).norm();
    ensure(pole_err <= 1e-6, format!("[10/1] pole at {}", pole.position))?;
    let grid: Vec<(C64, C64)> = (0..20)
        .map(|i| {
            let x = C64::from_polar(0.08 + 0.02 * (i % 10) as f64, PI + 0.3 * (i / 10) as f64 - 0.15);
            (C64::new(0.5 + 0.5 * (i / 10) as f64, 0.0), x)
        })
        .collect();
    let r = borel_sum_solution(&eq, PI, &grid, &SumOptions::default()).map_err(e)?;
    ensure(r.pde_residual <= 1e-6, format!("residual {:e}", r.pde_residual))?;
    Ok(format!("u_(1,n+1) = n! for n ≤ 10; pole error {pole_err:.1e}; residual {:.1e} on 20 points", r.pde_residual))
}

fn singular_directions() -> Outcome {
    let q = |p: i64, d: i64| Coeff::ratio(p, d);
    let s = singular_scan(&q(0, 1), &q(1, 1), 1, 20).map_err(e)?;
    ensure(s.directions == vec![0.0], format!("(0,1,1): {:?}", s.directions))?;
    ensure(s.xi.iter().enumerate().all(|(n, z)| *z == q(n as i64 + 1, 1)), "(0,1,1): ξₙ ≠ n")?;
    let s = singular_scan(&q(0, 1), &q(1, 1), 2, 20).map_err(e)?;
    ensure(s.directions.len() == 2 && s.directions[0] == 0.0 && (s.directions[1] - PI).abs() <= 1e-12, format!("(0,1,2): {:?}", s.directions))?;
    let i = Coeff::exact(rat_int(0), rat_int(1));
    let s = singular_scan(&q(1, 2), &i, 1, 20).map_err(e)?;
    ensure(s.directions.len() == 1 && (s.directions[0] - 1.5 * PI).abs() <= 1e-12, format!("(1/2,i,1): {:?}", s.directions))?;
    let ok = s.xi.iter().enumerate().all(|(n, z)| *z == Coeff::exact(rat_int(0), rat(-(2 * n as i64 + 1), 2)));
    ensure(ok, "(1/2,i,1): ξₙ ≠ −i(n − 1/2)")?;
    Ok("{0}, {0, π}, {3π/2} with exact ξₙ".into())
}

fn sigma() -> Outcome {
    let s = SectorSpec::pure(PI, PI / 4.0).map_err(e)?;
    let v = sigma_bound(&Coeff::ratio(0, 1), &Coeff::ratio(1, 1), 1, &s, 50, 129).map_err(e)?;
    ensure((0.92..=0.9239).contains(&v), format!("σ̂ = {v}"))?;
    Ok(format!("σ̂ = {v:.6} (cos(π/8) = {:.6})", (PI / 8.0).cos()))
}

fn nagumo_harness() -> Outcome {
    let m0 = m0_constant();
    ensure((m0 - 3.7636).abs() <= 1e-3, format!("M₀ = {m0}"))?;
    let mut worst = f64::INFINITY;
    let mut inconclusive = 0;
    for suite in Suite::ALL {
        let r = verify_inequalities(suite, 1000, 2024).map_err(e)?;
        ensure(r.passed(), format!("{}: {} failures, margin {:e}", suite.name(), r.failures.len(), r.min_margin))?;
        worst = worst.min(r.min_margin);
        inconclusive += r.inconclusive.len();
    }
    Ok(format!(
        "{} suites × 1000 trials, min relative margin {worst:.2e}, {inconclusive} checks inside tolerance; M₀ = {m0:.5}",
        Suite::ALL.len()
    ))
}

fn anticipative() -> Outcome {
    let a = TruncatedSeries::univariate("x", vec![Coeff::ratio(0, 1), Coeff::ratio(1, 1)], 24);
    let sol = solve_anticipative(&a, 6, 16).map_err(e)?;
    let mut fact = Coeff::one(Mode::Exact);
    for n in 1..=12usize {
        if n > 1 {
            fact = fact.scale_int(n as i64 - 1);
        }
        ensure(sol.w.at(&[1, n]) == fact, format!("∂ₛw_{n}(0) ≠ ({n}−1)!"))?;
    }
    for m in 1..=5 {
        for n in 0..=10 {
            ensure(sol.u.series.at(&[2 * m, n]).is_zero(), format!("∂ₜ^{}u_{n}(0) ≠ 0", 2 * m))?;
        }
    }
    let row = sol.w.slice("s", 1).map_err(e)?;
    let mags: Vec<f64> = (0..=16).map(|n| row.at(&[n]).abs()).collect();
    let fit = gevrey_fit(&mags).map_err(e)?;
    ensure((fit.k_inverse - 1.0).abs() <= 0.1, format!("Gevrey order {}", fit.k_inverse))?;
    // x-Borel transform of the same row, continued by Padé.
    let mut head_free = row.restrict(&[16]);
    head_free.set(&[0], Coeff::zero(Mode::Exact));
    let b = head_free.formal_borel_k("x", "xi", 1, summa::BorelKernel::Classical).map_err(e)?;
    let nb = b.trunc()[0];
    let p = pade_approximant(&b, nb - nb / 2, nb / 2).map_err(e)?;
    let live: Vec<C64> = p.poles.iter().filter(|q| q.residue.norm() > 1e-10).map(|q| q.position).collect();
    let count = live.len();
    let worst = live.iter().map(|z| z.arg().abs()).fold(0.0, f64::max);
    ensure(count > 0, "no Padé poles found")?;
    ensure(worst <= 0.1, format!("a pole lies {worst:.3} rad off ℝ⁺"))?;
    Ok(format!("(n−1)! seed row, parity, Gevrey order {:.3}, {count} pole(s) within {worst:.1e} rad of ℝ⁺", fit.k_inverse))
}

const VOLTERRA_SPECS: [(&str, f64); 5] = [
    (r#"{"k":1,"a":"x","b":"0","c":"1","trunc":[2,24]}"#, PI),
    (r#"{"k":1,"a":"x+x^2","b":"1/2","c":"1","trunc":[2,24]}"#, PI),
    (r#"{"k":1,"a":"x","b":"1/3","c":"1+x","trunc":[2,24]}"#, 0.8 * PI),
    (r#"{"k":1,"a":"x","b":"-1/2","c":"i","trunc":[2,24]}"#, 0.5 * PI),
    (r#"{"k":1,"a":"x","b":"1/4","c":"1","nonlinear":[{"i":0,"j":2,"alpha":0,"coeff":"x"}],"trunc":[2,24]}"#, 1.2 * PI),
];

fn volterra_vs_pade() -> Outcome {
    let mut worst: f64 = 0.0;
    for (spec, d) in VOLTERRA_SPECS {
        let eq = parse_spec(spec, false).map_err(e)?;
        let (eqn, _) = prepare_normal_form(&eq, 1).map_err(e)?;
        let fam = borel_coefficients(&solve_formal(&eqn).map_err(e)?, &eqn).map_err(e)?;
        let u1 = fam.member(1).map_err(e)?.restrict(&[fam.certified]);
        let n = fam.certified;
        let pade = pade_approximant(&u1, n - n / 2, n / 2).map_err(e)?;
        let sol = volterra_from_order(&fam, 1, &Ray { d, h: 1.0 / 256.0, length: 1.0 }).map_err(e)?;
        let diff = sol
            .s
            .iter()
            .zip(&sol.psi)
            .map(|(s, p)| (pade.eval(C64::from_polar(*s, d)) - p).norm())
            .fold(0.0, f64::max);
        ensure(diff <= 1e-4, format!("{spec}: difference {diff:e}"))?;
        worst = worst.max(diff);
    }
    Ok(format!("5 specs on |ξ| ≤ 1, max difference {worst:.1e}"))
}

fn perturbation() -> Outcome {
    let p = |c: &[i64]| TruncatedSeries::univariate("xi", c.iter().map(|&v| Coeff::from_int(v, Mode::Exact)).collect(), c.len() - 1);
    let ps = perturbation_log_expansion(&p(&[1]), &p(&[0]), &p(&[1]), &Coeff::ratio(1, 1), 1).map_err(e)?;
    let mut worst: f64 = 0.0;
    for i in 0..=250 {
        let xi = C64::new(-2.0 + 2.5 * i as f64 / 250.0, 0.0);
        let want = -(1.0 - xi).ln() / (1.0 - xi);
        worst = worst.max((ps[1].eval(xi) - want).norm());
    }
    ensure(worst <= 1e-8, format!("ψ₁ error {worst:e}"))?;
    let (b, c, f) = (p(&[1, -1]), p(&[0, 1]), p(&[1, 2]));
    let xn = Coeff::ratio(3, 2);
    let ps = perturbation_log_expansion(&b, &c, &f, &xn, 1).map_err(e)?;
    let (be, ce, fe) = (poly_c64(&b), poly_c64(&c), poly_c64(&f));
    let ray = Ray { d: 0.9 * PI, h: 1.0 / 256.0, length: 1.5 };
    let mut errs = Vec::new();
    for eps in [0.1, 0.05, 0.025] {
        let sol = volterra_solve(&|x| be(x) * eps, &|x| ce(x) * eps, &fe, &xn, &ray).map_err(e)?;
        let err = sol
            .s
            .iter()
            .zip(&sol.psi)
            .map(|(s, v)| {
                let x = C64::from_polar(*s, ray.d);
                (v - ps[0].eval(x) - ps[1].eval(x) * eps).norm()
            })
            .fold(0.0, f64::max);
        errs.push(err);
    }
    let slope = (errs[0] / errs[2]).ln() / 4f64.ln();
    ensure(slope >= 1.9, format!("ε-slope {slope:.3}"))?;
    Ok(format!("ψ₁ max error {worst:.1e} on [−2, 0.5]; ε-slope {slope:.3}"))
}

fn newton_majorant() -> Outcome {
    // y = A + K²(t y′)² + 2K B t y′ with A = B = t and K = 1.
    let n = 30;
    let mut h = TruncatedSeries::zeros(&["t", "y", "z"], &[n, 1, 2], Mode::Exact);
    h.set(&[1, 0, 0], Coeff::ratio(1, 1));
    h.set(&[0, 0, 2], Coeff::ratio(1, 1));
    h.set(&[1, 0, 1], Coeff::ratio(2, 1));
    let y = fuchsian_ode_solve(&FuchsianForm::Implicit(h), n).map_err(e)?;
    // F(x, z₀, z₁) = z₀ − A − z₁² − 2B z₁ along φ = y.
    let mut f = TruncatedSeries::zeros(&["x", "z0", "z1"], &[n, 2, 2], Mode::Exact);
    f.set(&[0, 1, 0], Coeff::ratio(1, 1));
    f.set(&[1, 0, 0], Coeff::ratio(-1, 1));
    f.set(&[0, 0, 2], Coeff::ratio(-1, 1));
    f.set(&[1, 0, 1], Coeff::ratio(-2, 1));
    let phi = y.rename("t", "x").map_err(e)?;
    let poly = newton_polygon(&f, &phi).map_err(e)?;
    ensure(poly.slopes == vec![rat(1, 1)], format!("slopes {:?}", poly.slopes))?;
    ensure(poly.gevrey_admissible(&rat(1, 1)), "not Gevrey-1 admissible")?;
    let mags: Vec<f64> = (0..=n).map(|m| y.at(&[m]).abs()).collect();
    let fit = gevrey_fit(&mags).map_err(e)?;
    ensure((fit.k_inverse - 1.0).abs() <= 0.1, format!("majorant Gevrey order {}", fit.k_inverse))?;
    Ok(format!("slope 1, admissible at k = 1; majorant Gevrey order {:.3}", fit.k_inverse))
}

fn conical() -> Outcome {
    let spec = r#"{"k":1,"a":"x","b":"1/3","c":"1","nonlinear":[{"i":1,"j":0,"alpha":1,"coeff":"1"}],"trunc":[6,16]}"#;
    let eq = parse_spec(spec, false).map_err(e)?;
    let cond = check_conditions(&eq);
    ensure(!cond.condition_f && !cond.resonance, "spec must violate (F) without resonance")?;
    let r_cone = 0.2;
    let opts = SumOptions { route: Route::Conical, cone_radius: r_cone, ..SumOptions::default() };
    let grid: Vec<(C64, C64)> = (0..12)
        .map(|i| {
            let x = C64::from_polar(0.1 + 0.025 * (i % 6) as f64, PI + 0.2 * (i / 6) as f64 - 0.1);
            (C64::from_polar(0.5 * r_cone * x.norm(), 0.7 * i as f64), x)
        })
        .collect();
    ensure(grid.iter().all(|(t, x)| t.norm() < r_cone * x.norm()), "grid leaves the cone")?;
    let r = borel_sum_solution(&eq, PI, &grid, &opts).map_err(e)?;
    ensure(r.pde_residual <= 1e-5, format!("residual {:e}", r.pde_residual))?;
    Ok(format!("residual {:.1e} on 12 points with |t| = {}|x|", r.pde_residual, 0.5 * r_cone))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("exact residual", exact_residual),
        ("Euler chain", euler_chain),
        ("singular directions", singular_directions),
        ("sigma bound", sigma),
        ("Nagumo harness", nagumo_harness),
        ("anticipative system", anticipative),
        ("Volterra vs Padé", volterra_vs_pade),
        ("perturbation expansion", perturbation),
        ("Newton polygon and majorant", newton_majorant),
        ("conical route", conical),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(msg) => {
                println!("FAIL {:>2} {name}: {msg}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
