//! Conjugate points and Morse index along geodesics.
//!
//! On a surface the normal Jacobi field J along a unit-speed geodesic solves
//! J″ + K(γ(t)) J = 0, and the index of the segment [t₀, t] equals the
//! number of zeros of the solution with J(t₀) = 0, J′(t₀) = 1 in (t₀, t).

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GeoError, Result};
use crate::geodesics::{
    half_period_length, integrate_t, integrate_t_with, quarter_period, EventKind, GeodesicState,
    IntegrateOptions, Trajectory,
};
use crate::metrics::{LambdaProfile, SurfaceMetric};
use crate::ode::{segment_roots, Dop853, StepOptions};

/// Distance from the end of the segment within which a conjugate point makes
/// the endpoint degenerate.
pub const NULLITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugateReport {
    pub t_start: f64,
    pub t_end: f64,
    /// Zeros of J in (t_start, t_end), strictly increasing.
    pub jacobi_zeros: Vec<f64>,
    pub index: usize,
    pub equator_crossings: usize,
    /// Times of the transversal equator crossings.
    pub crossing_times: Vec<f64>,
    /// A zero lies within [`NULLITY_TOL`] of t_end; it is not counted.
    pub nullity_flag: bool,
    /// Smallest Gaussian curvature met while integrating.
    pub min_curvature: f64,
    /// J(t_end), J′(t_end).
    pub jacobi_end: (f64, f64),
}

/// Solve J″ + K J = 0 with J(t₀) = 0, J′(t₀) = 1 along `traj` and count its
/// zeros. Each trajectory piece is integrated separately so that K is smooth
/// inside every Jacobi step.
pub fn jacobi_zeros(traj: &Trajectory, tol: f64) -> Result<ConjugateReport> {
    jacobi_on(traj, traj.t_start(), traj.t_end(), tol)
}

/// As [`jacobi_zeros`] on the sub-arc [t0, t1] of `traj`.
pub fn jacobi_on(traj: &Trajectory, t0: f64, t1: f64, tol: f64) -> Result<ConjugateReport> {
    if !(tol > 0.0) {
        return Err(GeoError::InvalidArgument(format!(
            "tol = {tol} must be positive"
        )));
    }
    if !(t0 >= traj.t_start() && t1 <= traj.t_end() && t1 > t0) {
        return Err(GeoError::InvalidArgument(format!(
            "sub-arc [{t0}, {t1}] outside [{}, {}]",
            traj.t_start(),
            traj.t_end()
        )));
    }
    let metric = SurfaceMetric::new(traj.profile.clone());
    let mut min_k = f64::INFINITY;
    let mut zeros = Vec::new();
    let mut y = [0.0, 1.0];
    let step = StepOptions::with_tol(tol);

    let mut bounds: Vec<f64> = vec![t0];
    for piece in traj.pieces() {
        let (_, hi) = piece.t_range();
        if hi > t0 && hi < t1 {
            bounds.push(hi);
        }
    }
    bounds.push(t1);
    bounds.dedup();

    for w in bounds.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let f = |t: f64, y: &[f64; 2]| -> Result<[f64; 2]> {
            let s = traj.state_at(t)?;
            let k = metric.gaussian_curvature(s.r, s.phi).map_err(|e| {
                GeoError::CurvatureEvaluation {
                    t,
                    source: Box::new(e),
                }
            })?;
            min_k = min_k.min(k);
            Ok([y[1], -k * y[0]])
        };
        let mut solver = Dop853::new(f, a, y, b, step)?;
        while let Some(seg) = solver.step()? {
            zeros.extend(
                segment_roots(&seg, 1e-12, |_, y| y[0])
                    .into_iter()
                    .map(|r| r.x),
            );
        }
        y = *solver.y();
    }

    let mut nullity = false;
    zeros.retain(|&z| {
        if t1 - z <= NULLITY_TOL {
            nullity = true;
            false
        } else {
            z > t0
        }
    });
    if y[1] != 0.0 && (y[0] / y[1]).abs() <= NULLITY_TOL {
        nullity = true;
    }
    let crossing_times: Vec<f64> = traj
        .events_of(EventKind::EquatorCrossing)
        .map(|e| e.t)
        .filter(|&t| t > t0 && t < t1)
        .collect();
    Ok(ConjugateReport {
        t_start: t0,
        t_end: t1,
        index: zeros.len(),
        jacobi_zeros: zeros,
        equator_crossings: crossing_times.len(),
        crossing_times,
        nullity_flag: nullity,
        min_curvature: min_k,
        jacobi_end: (y[0], y[1]),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IndexComparison {
    pub index: usize,
    pub crossings: usize,
    /// index ≥ ⌊crossings / 2⌋.
    pub half_bound_ok: bool,
    /// index ≥ crossings; reported only.
    pub full_bound_ok: bool,
}

pub fn index_vs_crossings(traj: &Trajectory, tol: f64) -> Result<IndexComparison> {
    if !traj.profile.is_product() {
        return Err(GeoError::InvalidArgument(
            "index bounds are stated for the product metric".into(),
        ));
    }
    let rep = jacobi_zeros(traj, tol)?;
    Ok(IndexComparison {
        index: rep.index,
        crossings: rep.equator_crossings,
        half_bound_ok: rep.index >= rep.equator_crossings / 2,
        full_bound_ok: rep.index >= rep.equator_crossings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapCheck {
    /// Largest of t₁ − t_start and the gaps between consecutive zeros.
    pub max_gap: f64,
    pub rauch_ok: bool,
    /// ds-lengths between every other equator crossing.
    pub full_period_lengths: Vec<f64>,
    pub lengths_ok: bool,
}

pub fn conjugate_gap_check(report: &ConjugateReport, tol: f64) -> GapCheck {
    let mut prev = report.t_start;
    let mut max_gap = 0.0f64;
    for &z in &report.jacobi_zeros {
        max_gap = max_gap.max(z - prev);
        prev = z;
    }
    let lengths: Vec<f64> = report
        .crossing_times
        .windows(3)
        .map(|w| w[2] - w[0])
        .collect();
    GapCheck {
        max_gap,
        rauch_ok: max_gap <= PI + tol,
        lengths_ok: lengths.iter().all(|&l| l > 4.0),
        full_period_lengths: lengths,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndexRow {
    pub c: f64,
    pub period_r: f64,
    pub crossings: usize,
    pub index: usize,
}

/// Product-metric geodesic through (0, π/2) with Clairaut constant −c, heading
/// to negative r, stopped at r = −r_window.
pub fn window_geodesic(c: f64, r_window: f64, tol: f64) -> Result<Trajectory> {
    if !(c > 0.0 && c < 1.0) {
        return Err(GeoError::domain("clairaut constant", c, "0 < c < 1"));
    }
    if !(r_window > 0.0) {
        return Err(GeoError::domain("r_window", r_window, "r_window > 0"));
    }
    let s0 = GeodesicState {
        t: 0.0,
        r: 0.0,
        phi: FRAC_PI_2,
        rdot: -c,
        phidot: -(1.0 - c * c).sqrt(),
    };
    let p = LambdaProfile::Product;
    // Average |ṙ| over a period is at least P(c)/(2π); leave ample room.
    let periods = r_window / (4.0 * quarter_period(c)?) + 2.0;
    let t_end = periods * 2.0 * PI + 10.0;
    let opts = IntegrateOptions::with_tol(tol).stop_at(-r_window);
    integrate_t_with(&p, s0, t_end, &opts)
}

/// One row per c, in input order; rows are computed in parallel.
pub fn index_growth_table(c_list: &[f64], r_window: f64, tol: f64) -> Result<Vec<IndexRow>> {
    c_list
        .par_iter()
        .map(|&c| {
            let traj = window_geodesic(c, r_window, tol)?;
            let rep = jacobi_zeros(&traj, tol)?;
            Ok(IndexRow {
                c,
                period_r: 4.0 * quarter_period(c)?,
                crossings: rep.equator_crossings,
                index: rep.index,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JacobiOracle {
    pub c: f64,
    pub delta: f64,
    pub t_end: f64,
    /// max |J_fd − J| / max |J| over the sample times.
    pub rel_error: f64,
    pub samples: usize,
}

/// Compare the scalar Jacobi solution with the normal displacement between
/// the product geodesic through the equator with Clairaut constant `c` and
/// its neighbour rotated by `delta` at the start, over one full oscillation.
pub fn jacobi_fd_oracle(c: f64, delta: f64, samples: usize, tol: f64) -> Result<JacobiOracle> {
    if !(delta > 0.0 && delta < 0.1) || samples < 2 {
        return Err(GeoError::InvalidArgument(format!(
            "delta = {delta}, samples = {samples}"
        )));
    }
    let p = LambdaProfile::Product;
    let metric = SurfaceMetric::new(p.clone());
    let t_end = 2.0 * half_period_length(c)?;
    let s0 = GeodesicState::at_equator(c, 0.0, true)?;
    let (e0, g0) = metric.coefficients(s0.r, s0.phi)?;
    let (nr, np) = (-(g0 / e0).sqrt() * s0.phidot, (e0 / g0).sqrt() * s0.rdot);
    let (cd, sd) = (delta.cos(), delta.sin());
    let s1 = GeodesicState {
        rdot: cd * s0.rdot + sd * nr,
        phidot: cd * s0.phidot + sd * np,
        ..s0
    };
    let base = integrate_t(&p, s0, t_end, tol)?;
    let near = integrate_t(&p, s1, t_end, tol)?;

    let mut worst = 0.0f64;
    let mut j_max = 0.0f64;
    for i in 1..=samples {
        let t = t_end * i as f64 / samples as f64;
        let a = base.state_at(t)?;
        let b = near.state_at(t)?;
        let (e, g) = metric.coefficients(a.r, a.phi)?;
        let (nr, np) = (-(g / e).sqrt() * a.phidot, (e / g).sqrt() * a.rdot);
        let fd = (e * (b.r - a.r) * nr + g * (b.phi - a.phi) * np) / delta;
        let j = jacobi_on(&base, 0.0, t, tol)?.jacobi_end.0;
        worst = worst.max((fd - j).abs());
        j_max = j_max.max(j.abs());
    }
    Ok(JacobiOracle {
        c,
        delta,
        t_end,
        rel_error: worst / j_max,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn equator(t_end: f64) -> Trajectory {
        let s0 = GeodesicState::at_equator(1.0, 0.0, false).unwrap();
        integrate_t(&LambdaProfile::Product, s0, t_end, 1e-11).unwrap()
    }

    #[test]
    fn equator_single_conjugate_point() {
        let rep = jacobi_zeros(&equator(3.5), 1e-11).unwrap();
        assert_eq!(rep.index, 1);
        assert!((rep.jacobi_zeros[0] - PI).abs() < 1e-8);
        assert_eq!(rep.equator_crossings, 0);
        assert!(!rep.nullity_flag);
    }

    #[test]
    fn equator_three_conjugate_points() {
        let rep = jacobi_zeros(&equator(3.0 * PI + 0.1), 1e-11).unwrap();
        assert_eq!(rep.index, 3);
        for (k, z) in rep.jacobi_zeros.iter().enumerate() {
            assert!((z - PI * (k + 1) as f64).abs() < 1e-8, "{z}");
        }
        let gap = conjugate_gap_check(&rep, 1e-6);
        assert!((gap.max_gap - PI).abs() < 1e-8 && gap.rauch_ok);
    }

    #[test]
    fn endpoint_at_conjugate_point_sets_nullity() {
        let rep = jacobi_zeros(&equator(2.0 * PI), 1e-11).unwrap();
        assert!(rep.nullity_flag);
        assert_eq!(rep.index, 1);
    }

    #[test]
    fn index_increases_by_one_at_each_conjugate_point() {
        let tr = equator(10.0);
        let mut last = 0;
        for k in 1..=40 {
            let t = 0.25 * k as f64;
            let rep = jacobi_on(&tr, 0.0, t, 1e-11).unwrap();
            assert!(rep.index == last || rep.index == last + 1);
            last = rep.index;
            assert_eq!(rep.index, (t / PI).floor() as usize);
        }
    }

    #[test]
    fn oscillating_geodesic_beats_half_bound() {
        let c = 0.3;
        let s0 = GeodesicState::at_equator(c, 0.0, true).unwrap();
        let l = 2.0 * crate::geodesics::half_period_length(c).unwrap();
        let tr = integrate_t(&LambdaProfile::Product, s0, 4.0 * l + 0.05, 1e-10).unwrap();
        let cmp = index_vs_crossings(&tr, 1e-10).unwrap();
        assert_eq!(cmp.crossings, 8);
        assert!(cmp.index >= 4 && cmp.half_bound_ok);
        let rep = jacobi_zeros(&tr, 1e-10).unwrap();
        assert!(rep.min_curvature >= 1.0 - 1e-12);
        let gap = conjugate_gap_check(&rep, 1e-6);
        assert!(gap.rauch_ok && gap.lengths_ok);
    }

    #[test]
    fn non_product_rejected_by_index_bound() {
        let p = LambdaProfile::C1Cosine;
        let s0 = GeodesicState::normalized(&p, 0.0, -0.5, 1.0, 1.0, 0.2).unwrap();
        let tr = integrate_t(&p, s0, 1.0, 1e-10).unwrap();
        assert!(index_vs_crossings(&tr, 1e-10).is_err());
    }

    #[test]
    fn growth_table_rows_in_input_order() {
        let rows = index_growth_table(&[0.5, 0.1, 0.02], 5.0, 1e-10).unwrap();
        assert_eq!(
            rows.iter().map(|r| r.c).collect::<Vec<_>>(),
            vec![0.5, 0.1, 0.02]
        );
        assert!(rows.windows(2).all(|w| w[1].index > w[0].index));
        assert!(rows.windows(2).all(|w| w[1].period_r < w[0].period_r));
        for r in &rows {
            assert!(r.index >= r.crossings / 2);
        }
    }

    #[test]
    fn jacobi_matches_neighbouring_geodesic() {
        let o = jacobi_fd_oracle(0.3, 1e-5, 40, 1e-11).unwrap();
        assert!(o.rel_error < 1e-3, "{o:?}");
    }
}
