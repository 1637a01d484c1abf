//! The acceptance suite: eleven numerical checks, each at a fixed tolerance.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI};
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{GeoError, Result};
use crate::geodesics::{
    half_period_length, integrate_t, period_table, quarter_period, EventKind, GeodesicState,
    Termination,
};
use crate::metrics::{ricci_diagonal, LambdaProfile};
use crate::morse::{
    conjugate_gap_check, index_growth_table, jacobi_fd_oracle, jacobi_zeros, window_geodesic,
};
use crate::shooting::{
    continue_shot, crossing_angle_curve, find_double_contacts, leaf_deviation, shoot_from_boundary,
    PHI_START,
};

const ODE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    #[serde(skip)]
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {} ({:.2} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

pub const NAMES: [&str; 11] = [
    "period bound",
    "conservation",
    "closed-form leaf oracle",
    "index lower bound",
    "index growth",
    "boundary contact data",
    "shooting certificates",
    "small crossing angles",
    "double contacts",
    "ricci non-negativity",
    "jacobi finite-difference oracle",
];

/// Runs criterion `id` (1..=11). Errors count as failures.
pub fn run(id: u32) -> CriterionResult {
    let start = Instant::now();
    let (limit, out) = match id {
        1 => (Some(5.0), period_bound_check()),
        2 => (None, conservation()),
        3 => (None, leaf_oracle()),
        4 => (None, index_lower_bound()),
        5 => (Some(60.0), index_growth()),
        6 => (None, boundary_data()),
        7 => (None, certificates()),
        8 => (None, small_angles()),
        9 => (Some(120.0), double_contacts()),
        10 => (None, ricci()),
        11 => (None, jacobi_oracle()),
        _ => (
            None,
            Err(GeoError::InvalidArgument(format!("no criterion {id}"))),
        ),
    };
    let seconds = start.elapsed().as_secs_f64();
    let (mut passed, mut detail) = match out {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    if let Some(l) = limit {
        if Duration::from_secs_f64(seconds) > Duration::from_secs_f64(l) {
            passed = false;
            detail.push_str(&format!("; runtime {seconds:.1} s over {l} s"));
        }
    }
    CriterionResult {
        id,
        name: NAMES
            .get(id.wrapping_sub(1) as usize)
            .copied()
            .unwrap_or("unknown"),
        passed,
        detail,
        seconds,
    }
}

pub fn run_all() -> Vec<CriterionResult> {
    (1..=11).map(run).collect()
}

type Check = Result<(bool, String)>;

fn period_bound_check() -> Check {
    let rows = period_table(&[0.5, 0.2, 0.1, 0.05, 0.01], ODE_TOL)?;
    let mut worst = 0.0f64;
    let mut ok = true;
    for r in &rows {
        let d = (r.period_measured - r.period_quadrature).abs();
        worst = worst.max(d);
        ok &= d <= 1e-6 && r.below_bound;
    }
    Ok((
        ok,
        format!(
            "max |measured - 4Q| = {worst:.2e}; all below bound: {}",
            rows.iter().all(|r| r.below_bound)
        ),
    ))
}

fn conservation() -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    for &c in &[0.5, 0.1] {
        let s0 = GeodesicState::at_equator(c, 0.0, true)?;
        let t_end = 10.0 * 2.0 * half_period_length(c)? + 0.1;
        let tr = integrate_t(&LambdaProfile::Product, s0, t_end, ODE_TOL)?;
        let rep = tr.conservation()?;
        let drift = rep.max_clairaut_drift.unwrap_or(f64::INFINITY);
        let conf = rep.min_confinement.unwrap_or(f64::NEG_INFINITY);
        let periods = tr.equator_crossings() / 2;
        ok &= rep.max_speed_error <= 1e-8 && drift <= 1e-8 && conf >= -1e-8 && periods >= 10;
        parts.push(format!(
            "c={c}: speed {:.1e}, clairaut {drift:.1e}, sin(phi)-|c| >= {conf:.1e}, {periods} periods",
            rep.max_speed_error
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn leaf_oracle() -> Check {
    let mut worst = 0.0f64;
    for &k in &[FRAC_PI_6, FRAC_PI_4, FRAC_PI_3] {
        worst = worst.max(leaf_deviation(k, 400, ODE_TOL)?.sup_error);
    }
    Ok((worst <= 1e-5, format!("sup |r - r_leaf| = {worst:.2e}")))
}

fn index_lower_bound() -> Check {
    let mut ok = true;
    let mut worst_gap = 0.0f64;
    let mut min_half = f64::INFINITY;
    let mut cases = 0;
    for &c in &[0.5, 0.2, 0.05] {
        let period = 4.0 * quarter_period(c)?;
        let half = half_period_length(c)?;
        min_half = min_half.min(half);
        ok &= half >= 2.0 - 1e-9 && 2.0 * half > 4.0;
        for &n in &[2usize, 4, 8, 16] {
            let window = (n as f64 + 0.5) * 0.5 * period;
            let tr = window_geodesic(c, window, ODE_TOL)?;
            let rep = jacobi_zeros(&tr, ODE_TOL)?;
            let gap = conjugate_gap_check(&rep, 1e-6);
            worst_gap = worst_gap.max(gap.max_gap);
            ok &=
                rep.equator_crossings == n && rep.index >= n / 2 && gap.rauch_ok && gap.lengths_ok;
            cases += 1;
        }
    }
    Ok((
        ok,
        format!("{cases} cases; max conjugate gap {worst_gap:.6} (pi = {PI:.6}); min half-period length {min_half:.6}"),
    ))
}

fn index_growth() -> Check {
    let rows = index_growth_table(&[0.5, 0.1, 0.02, 0.005], 5.0, ODE_TOL)?;
    let idx: Vec<usize> = rows.iter().map(|r| r.index).collect();
    let ok = idx.windows(2).all(|w| w[1] > w[0]) && idx.last().is_some_and(|&i| i >= 20);
    Ok((ok, format!("index column {idx:?}")))
}

fn boundary_data() -> Check {
    let p = LambdaProfile::smooth_default();
    let mut ok = true;
    let mut parts = Vec::new();
    for &r0 in &[0.1, 0.3] {
        let a = shoot_from_boundary(&p, r0, PHI_START, ODE_TOL)?;
        let b = shoot_from_boundary(&p, r0, 0.5 * PHI_START, ODE_TOL)?;
        let want = 0.5 * p.eval(r0)?.dlambda;
        let da = (a.contact_second_derivative - want).abs();
        let db = (b.contact_second_derivative - want).abs();
        let shift = (a.crossing.phi0 - b.crossing.phi0).hypot(a.crossing.alpha - b.crossing.alpha);
        ok &= da <= 1e-6 && db <= 1e-6 && shift <= 1e-7;
        parts.push(format!(
            "r0={r0}: |r''(0) - lambda'/2| = {:.1e}, crossing shift under halving {shift:.1e}",
            da.max(db)
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn certificates() -> Check {
    let p = LambdaProfile::smooth_default();
    let mut ok = true;
    for &r0 in &[0.05, 0.1, 0.2, 0.3] {
        let c = shoot_from_boundary(&p, r0, PHI_START, ODE_TOL)?.certificates;
        ok &= c.barrier_ok && c.monotone_ok && c.second_deriv_ok && c.convex_near_boundary_ok;
    }
    let bad = LambdaProfile::smooth(-0.2, 1.0)?;
    let mut failures = Vec::new();
    for &r0 in &[0.1, 0.2, 0.3, 0.5, 0.7] {
        match shoot_from_boundary(&bad, r0, PHI_START, ODE_TOL) {
            Ok(s) if !s.certificates.barrier_ok => {
                failures.push(format!("r0={r0} margin {:.1e}", s.barrier_margin))
            }
            Ok(_) => {}
            Err(GeoError::NoCrossing { .. }) => failures.push(format!("r0={r0} no crossing")),
            Err(e) => return Err(e),
        }
    }
    let caught = !failures.is_empty();
    Ok((
        ok && caught,
        format!(
            "compliant certificates all true: {ok}; non-compliant barrier failures: [{}]",
            failures.join(", ")
        ),
    ))
}

fn small_angles() -> Check {
    let p = LambdaProfile::smooth_default();
    let rows = crossing_angle_curve(&p, &[0.2, 0.1, 0.05, 0.025, 0.0125], PHI_START, ODE_TOL)?;
    let dec = rows.windows(2).all(|w| w[1].alpha.abs() < w[0].alpha.abs());
    let bounded = rows.iter().all(|r| r.bound_ok);
    let alphas: Vec<String> = rows.iter().map(|r| format!("{:.3e}", r.alpha)).collect();
    Ok((
        dec && bounded,
        format!("alpha = [{}]; within bound: {bounded}", alphas.join(", ")),
    ))
}

fn double_contacts() -> Check {
    let eps = 0.3;
    let p = LambdaProfile::reflected(eps, LambdaProfile::smooth_default())?;
    let roots = find_double_contacts(&p, eps, (1e-3, 0.3), 3, ODE_TOL)?;
    let mut ok = roots.len() >= 3;
    let mut worst_res = 0.0f64;
    let mut worst_end = 0.0f64;
    for d in &roots {
        worst_res = worst_res.max(d.residual);
        let shot = shoot_from_boundary(&p, d.r0, PHI_START, ODE_TOL)?;
        let full = continue_shot(&p, &shot, None, ODE_TOL)?;
        let hit = full.termination == Termination::BoundaryContact
            && full.count(EventKind::BoundaryContact) == 1;
        let miss = (full.last_state().r + eps + d.r0).abs();
        worst_end = worst_end.max(miss);
        ok &= hit && d.residual <= 1e-6 && miss <= 1e-5;
    }
    let idx: Vec<usize> = roots.iter().map(|d| d.index_estimate).collect();
    ok &= idx.windows(2).all(|w| w[1] > w[0]);
    let r0s: Vec<String> = roots.iter().map(|d| format!("{:.6e}", d.r0)).collect();
    Ok((
        ok,
        format!(
            "r0 = [{}]; max residual {worst_res:.1e}; max boundary miss {worst_end:.1e}; index {idx:?}",
            r0s.join(", ")
        ),
    ))
}

fn ricci() -> Check {
    let mut ok = true;
    let mut min_pos = f64::INFINITY;
    let mut flat_dev = 0.0f64;
    for p in [LambdaProfile::smooth_default(), LambdaProfile::C1Cosine] {
        let hi = p.working_limit();
        for i in 0..1000 {
            let r = -1.0 + (hi + 1.0) * (i as f64 + 0.5) / 1000.0;
            let (a, b, c) = ricci_diagonal(&p, r)?;
            min_pos = min_pos.min(a.min(b).min(c));
            if r < 0.0 {
                flat_dev = flat_dev.max(a.abs().max((b - 1.0).abs()).max((c - 1.0).abs()));
            }
        }
    }
    for i in 0..1000 {
        let r = -2.0 + 4.0 * i as f64 / 999.0;
        let (a, b, c) = ricci_diagonal(&LambdaProfile::Product, r)?;
        flat_dev = flat_dev.max(a.abs().max((b - 1.0).abs()).max((c - 1.0).abs()));
    }
    ok &= min_pos >= 0.0 && flat_dev <= 1e-12;
    Ok((
        ok,
        format!("min component {min_pos:.3e}; max deviation from (0,1,1) on flat regions {flat_dev:.1e}"),
    ))
}

fn jacobi_oracle() -> Check {
    let o = jacobi_fd_oracle(0.3, 1e-5, 60, 1e-11)?;
    Ok((
        o.rel_error <= 1e-3,
        format!(
            "relative error {:.2e} over t in [0, {:.4}]",
            o.rel_error, o.t_end
        ),
    ))
}
