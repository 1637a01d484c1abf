//! Boundary geodesics of perturbed profiles, shot from φ = 0.
//!
//! A geodesic meeting the boundary at (r₀, 0) does so orthogonally with
//! d²r/dφ² = λ′(r₀)/2 there, and it is even in φ. It is started at a small
//! φ_start from the series r = r₀ + (λ′(r₀)/4) φ², integrated as a graph
//! r(φ) up to its first crossing of r = 0, and then checked against the
//! leaf cos φ = tan r / tan r₀ of the cosine foliation.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GeoError, Result};
use crate::geodesics::{
    integrate_dual, integrate_phi_with, phi_rhs, quarter_period, IntegrateOptions, PhiState, Start,
    Termination, Trajectory,
};
use crate::metrics::LambdaProfile;
use crate::morse::jacobi_zeros;
use crate::ode::bisect_scalar;

pub const PHI_START: f64 = 1e-3;
/// φ beyond π/2 at which a shot that has not reached r = 0 is abandoned.
const CROSSING_MARGIN: f64 = 0.5;
/// Band in φ used for the convexity certificate of a shot.
pub const CONVEX_BAND: f64 = 0.2;
/// States per shot checked in addition to the step ends.
const CERT_RESAMPLE: usize = 400;
/// A double contact is accepted when its residual is at most this.
pub const RESIDUAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub phi0: f64,
    /// dr/dφ at r = 0.
    pub alpha: f64,
    /// Angle with the line r = 0 in the quotient metric, atan(|α|/√λ(0)).
    pub angle: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Certificates {
    pub barrier_ok: bool,
    pub monotone_ok: bool,
    pub second_deriv_ok: bool,
    pub convex_near_boundary_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShootResult {
    pub r0: f64,
    pub phi_start: f64,
    /// Estimated error in r of the series start.
    pub series_remainder: f64,
    /// d²r/dφ² at φ → 0, extrapolated from the integrated solution.
    pub contact_second_derivative: f64,
    pub crossing: Crossing,
    pub certificates: Certificates,
    /// max over checked states with 0 ≤ r < r₀ of r − r_leaf(φ).
    pub barrier_margin: f64,
    #[serde(skip)]
    pub trajectory: Trajectory,
}

fn reject_product(p: &LambdaProfile) -> Result<()> {
    let inner_product = match p {
        LambdaProfile::Product => true,
        LambdaProfile::Reflected { inner, .. } => inner.is_product(),
        _ => false,
    };
    if inner_product {
        return Err(GeoError::InvalidArgument(
            "the product metric has no boundary geodesics with r0 > 0 besides vertical lines"
                .into(),
        ));
    }
    Ok(())
}

/// Series start r = r₀ + (λ′(r₀)/4) φ², dr/dφ = (λ′(r₀)/2) φ.
pub fn boundary_series(p: &LambdaProfile, r0: f64, phi: f64) -> Result<PhiState> {
    let dl = p.eval(r0)?.dlambda;
    Ok(PhiState {
        phi,
        r: r0 + 0.25 * dl * phi * phi,
        drdphi: 0.5 * dl * phi,
    })
}

pub fn shoot_from_boundary(
    p: &LambdaProfile,
    r0: f64,
    phi_start: f64,
    tol: f64,
) -> Result<ShootResult> {
    reject_product(p)?;
    if !(r0 > 0.0) {
        return Err(GeoError::domain("shoot r0", r0, "r0 > 0"));
    }
    if !(phi_start > 0.0 && phi_start < 0.5) {
        return Err(GeoError::domain(
            "phi_start",
            phi_start,
            "0 < phi_start < 0.5",
        ));
    }
    let v = p.eval(r0)?;
    if v.lambda <= 0.0 {
        return Err(GeoError::Pole { r: r0 });
    }
    let s0 = boundary_series(p, r0, phi_start)?;
    // The solution is even in φ, so r = r₀ + aφ² + bφ⁴ + …; the mismatch of
    // d²r/dφ² at the start is 12bφ² and the dropped term is bφ⁴.
    let rdd = phi_rhs(p, phi_start, s0.r, s0.drdphi)?;
    let remainder = (rdd - 0.5 * v.dlambda).abs() * phi_start * phi_start / 12.0;
    if remainder > tol {
        return Err(GeoError::SeriesInvalid {
            phi_start,
            remainder,
            tol,
        });
    }

    let opts = IntegrateOptions::with_tol(tol).stop_at(0.0);
    let span = (phi_start, FRAC_PI_2 + CROSSING_MARGIN);
    let traj = match integrate_phi_with(p, s0, span, &opts) {
        Ok(t) => t,
        Err(GeoError::SlopeBlowup { phi, slope }) => {
            return Err(GeoError::NoCrossing {
                r0,
                reason: format!("|dr/dphi| = {slope:.3e} at phi = {phi:.6}"),
            })
        }
        Err(e) => return Err(e),
    };
    if traj.termination != Termination::StopRadius {
        return Err(GeoError::NoCrossing {
            r0,
            reason: format!(
                "phi reached {:.6} with r = {:.6e}",
                traj.last_state().phi,
                traj.last_state().r
            ),
        });
    }
    let end = traj.last_state();
    let alpha = end.drdphi();
    let l0 = p.eval(0.0)?.lambda;
    let crossing = Crossing {
        phi0: end.phi,
        alpha,
        angle: (alpha.abs() / l0.sqrt()).atan(),
        t: end.t,
    };

    let contact_second_derivative = extrapolate_contact_rdd(p, &traj, phi_start)?;
    let (barrier_margin, certificates) = certify(p, r0, &traj, tol)?;
    let mut res = ShootResult {
        r0,
        phi_start,
        series_remainder: remainder,
        contact_second_derivative,
        crossing,
        certificates,
        barrier_margin,
        trajectory: traj,
    };
    res.certificates.convex_near_boundary_ok = convexity_check(p, &res, CONVEX_BAND)?;
    Ok(res)
}

/// Fit A + Bφ² + Cφ⁴ to d²r/dφ² at φ = 2, 3, 4 × φ_start and return A.
fn extrapolate_contact_rdd(p: &LambdaProfile, traj: &Trajectory, phi_start: f64) -> Result<f64> {
    let mut xs = [0.0; 3];
    let mut ys = [0.0; 3];
    for (i, k) in [2.0, 3.0, 4.0].iter().enumerate() {
        let phi = k * phi_start;
        let s = angle_state_at(traj, phi)
            .ok_or_else(|| GeoError::InvalidArgument(format!("shot does not cover phi = {phi}")))?;
        xs[i] = phi * phi;
        ys[i] = phi_rhs(p, phi, s.r, s.drdphi)?;
    }
    // Quadratic in x = φ² through three points, evaluated at x = 0.
    let l0 = xs[1] * xs[2] / ((xs[0] - xs[1]) * (xs[0] - xs[2]));
    let l1 = xs[0] * xs[2] / ((xs[1] - xs[0]) * (xs[1] - xs[2]));
    let l2 = xs[0] * xs[1] / ((xs[2] - xs[0]) * (xs[2] - xs[1]));
    Ok(l0 * ys[0] + l1 * ys[1] + l2 * ys[2])
}

/// (r, dr/dφ) at `phi` from the first angle-chart piece covering it.
pub fn angle_state_at(traj: &Trajectory, phi: f64) -> Option<PhiState> {
    use crate::geodesics::Piece;
    traj.pieces().iter().find_map(|piece| match piece {
        Piece::Angle { seg, phi_end, .. } => {
            let (a, b) = (seg.t0.min(*phi_end), seg.t0.max(*phi_end));
            (phi >= a && phi <= b).then(|| {
                let y = seg.eval(phi);
                PhiState {
                    phi,
                    r: y[0],
                    drdphi: y[1],
                }
            })
        }
        Piece::Time { .. } => None,
    })
}

/// r of the leaf cos φ = tan r / tan κ at `phi`.
fn leaf_r(kappa: f64, phi: f64) -> f64 {
    (kappa.tan() * phi.cos()).atan()
}

fn certify(p: &LambdaProfile, r0: f64, traj: &Trajectory, tol: f64) -> Result<(f64, Certificates)> {
    let slack = 10.0 * tol;
    let mut states = traj.samples.clone();
    states.extend(traj.resample(CERT_RESAMPLE)?);
    let mut margin = f64::NEG_INFINITY;
    let mut monotone = true;
    let mut second = true;
    for s in &states {
        if s.r < 0.0 {
            continue;
        }
        let q = s.drdphi();
        let rdd = phi_rhs(p, s.phi, s.r, q)?;
        let dl = p.eval(s.r)?.dlambda;
        monotone &= q <= slack;
        second &= rdd > dl - slack;
        if s.r < r0 && r0 < FRAC_PI_2 {
            margin = margin.max(s.r - leaf_r(r0, s.phi));
        }
    }
    Ok((
        margin,
        Certificates {
            barrier_ok: margin <= slack,
            monotone_ok: monotone,
            second_deriv_ok: second,
            convex_near_boundary_ok: false,
        },
    ))
}

/// d²r/dφ² ≤ 0 and Δ = (3/λ)(3λ′²/(4λ) − cot²φ) < 0 at every checked state
/// with φ ≤ `phi_band`.
pub fn convexity_check(p: &LambdaProfile, result: &ShootResult, phi_band: f64) -> Result<bool> {
    reject_product(p)?;
    let mut states = result.trajectory.samples.clone();
    states.extend(result.trajectory.resample(CERT_RESAMPLE)?);
    let mut ok = true;
    for s in states.iter().filter(|s| s.phi <= phi_band && s.r >= 0.0) {
        let v = p.eval(s.r)?;
        let rdd = phi_rhs(p, s.phi, s.r, s.drdphi())?;
        let cot = s.phi.cos() / s.phi.sin();
        let disc = 3.0 / v.lambda * (0.75 * v.dlambda * v.dlambda / v.lambda - cot * cot);
        ok &= rdd <= 0.0 && disc < 0.0;
    }
    Ok(ok)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeafSample {
    pub phi: f64,
    pub r: f64,
    pub r_leaf: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeafDeviation {
    pub kappa: f64,
    pub phi_lo: f64,
    pub phi_hi: f64,
    pub sup_error: f64,
    pub crossing: Crossing,
    pub samples: Vec<LeafSample>,
}

/// Shoot the C¹ cosine profile from (κ, 0) and compare with the leaf
/// cos φ = tan r / tan κ at `n + 1` points of [0.2, min(φ₀, π/2)].
pub fn leaf_deviation(kappa: f64, n: usize, tol: f64) -> Result<LeafDeviation> {
    if !(kappa > 0.0 && kappa < FRAC_PI_2) {
        return Err(GeoError::domain("leaf kappa", kappa, "0 < kappa < pi/2"));
    }
    let shot = shoot_from_boundary(&LambdaProfile::C1Cosine, kappa, PHI_START, tol)?;
    let (lo, hi) = (0.2, shot.crossing.phi0.min(FRAC_PI_2));
    let mut samples = Vec::with_capacity(n + 1);
    for i in 0..=n.max(1) {
        let phi = lo + (hi - lo) * i as f64 / n.max(1) as f64;
        let st = angle_state_at(&shot.trajectory, phi).ok_or_else(|| {
            GeoError::InvalidArgument(format!("shot from {kappa} does not cover phi = {phi}"))
        })?;
        let r_leaf = leaf_r(kappa, phi);
        samples.push(LeafSample {
            phi,
            r: st.r,
            r_leaf,
            error: (st.r - r_leaf).abs(),
        });
    }
    Ok(LeafDeviation {
        kappa,
        phi_lo: lo,
        phi_hi: hi,
        sup_error: samples.iter().map(|s| s.error).fold(0.0, f64::max),
        crossing: shot.crossing,
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleRow {
    pub r0: f64,
    pub phi0: f64,
    pub alpha: f64,
    pub angle: f64,
    /// max |λ′| on [0, r₀] times π/2.
    pub bound: f64,
    /// −bound < α < 0.
    pub bound_ok: bool,
}

pub fn crossing_angle_curve(
    p: &LambdaProfile,
    r0_list: &[f64],
    phi_start: f64,
    tol: f64,
) -> Result<Vec<AngleRow>> {
    r0_list
        .par_iter()
        .map(|&r0| {
            let s = shoot_from_boundary(p, r0, phi_start, tol)?;
            let mut dl_max = 0.0f64;
            for i in 0..=400 {
                let r = r0 * i as f64 / 400.0;
                dl_max = dl_max.max(p.eval(r)?.dlambda.abs());
            }
            let bound = dl_max * FRAC_PI_2;
            let a = s.crossing.alpha;
            Ok(AngleRow {
                r0,
                phi0: s.crossing.phi0,
                alpha: a,
                angle: s.crossing.angle,
                bound,
                bound_ok: a < 0.0 && -bound < a,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MiddleStripPhase {
    /// (φ, dr/dφ) where the continuation first reaches r = −ε.
    pub arrival: PhiState,
    /// Radii r₁ > r₂ > … where the continuation passes φ₀ with slope −α.
    pub returns: Vec<f64>,
    /// Number of returns in [−ε, 0].
    pub periods_in_strip: usize,
    /// r₁ − r₂.
    pub period: f64,
    /// (r₁ + ε)/(r₁ − r₂); its fractional part is the phase q.
    pub g: f64,
    pub clairaut_c: f64,
}

impl MiddleStripPhase {
    pub fn phase(&self) -> f64 {
        self.g - self.g.floor()
    }
}

/// Continue a geodesic leaving r = 0 at (φ₀, dr/dφ = α), with φ increasing,
/// through the product metric to r = −ε and one period beyond.
pub fn middle_strip_phase(
    phi0: f64,
    alpha: f64,
    epsilon: f64,
    tol: f64,
) -> Result<MiddleStripPhase> {
    if !(alpha < 0.0) {
        return Err(GeoError::domain("middle strip alpha", alpha, "alpha < 0"));
    }
    if !(epsilon > 0.0) {
        return Err(GeoError::domain(
            "middle strip epsilon",
            epsilon,
            "epsilon > 0",
        ));
    }
    if !(phi0 > 0.0 && phi0 < PI) {
        return Err(GeoError::domain("middle strip phi0", phi0, "0 < phi0 < pi"));
    }
    let p = LambdaProfile::Product;
    let start = PhiState {
        phi: phi0,
        r: 0.0,
        drdphi: alpha,
    };
    let g0 = start.to_geodesic(&p, 0.0, 1.0)?;
    let c = g0.clairaut().abs();
    // Sized from the known period so that two returns past −ε are covered.
    let period = 4.0 * quarter_period(c.min(1.0 - 1e-15))?;
    let reach = epsilon + 2.5 * period;
    let opts = IntegrateOptions::with_tol(tol).stop_at(-reach);
    let t_end = 2.0 * PI * (reach / period + 2.0) + 10.0;
    let traj = integrate_dual(&p, Start::Time(g0), t_end, &opts)?;

    let returns: Vec<f64> = traj
        .crossings(|s| s.phi - phi0, 1e-13)?
        .into_iter()
        .filter(|s| s.phidot < 0.0 && s.r < 0.0)
        .map(|s| s.r)
        .collect();
    if returns.len() < 2 {
        return Err(GeoError::StepFailure {
            t: traj.t_end(),
            h: 0.0,
        });
    }
    let arrival = traj
        .crossings(|s| s.r + epsilon, 1e-13)?
        .first()
        .map(|s| s.to_phi_state())
        .ok_or_else(|| GeoError::StepFailure {
            t: traj.t_end(),
            h: 0.0,
        })?;
    let (r1, r2) = (returns[0], returns[1]);
    Ok(MiddleStripPhase {
        arrival,
        periods_in_strip: returns.iter().filter(|&&r| r >= -epsilon).count(),
        returns,
        period: r1 - r2,
        g: (r1 + epsilon) / (r1 - r2),
        clairaut_c: c,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoubleContact {
    pub r0: f64,
    pub epsilon: f64,
    pub phi0: f64,
    pub alpha: f64,
    /// |(φ, dr/dφ) at r = −ε − (φ₀, −α)| along the reflected metric.
    pub residual: f64,
    /// k: number of returns r₁ > … > r_k = −ε.
    pub periods_in_strip: usize,
    /// Morse index of the sub-arc between r = 0 and r = −ε.
    pub index_estimate: usize,
}

fn phase_at(p: &LambdaProfile, eps: f64, r0: f64, phi_start: f64, tol: f64) -> Result<f64> {
    let s = shoot_from_boundary(p, r0, phi_start, tol)?;
    Ok(middle_strip_phase(s.crossing.phi0, s.crossing.alpha, eps, tol)?.g)
}

/// Shot from (r₀, 0) continued through the reflected metric; stops at
/// r = `stop` when given, else at the boundary.
pub fn continue_shot(
    p: &LambdaProfile,
    shot: &ShootResult,
    stop: Option<f64>,
    tol: f64,
) -> Result<Trajectory> {
    let start = Start::Angle {
        state: PhiState {
            phi: shot.crossing.phi0,
            r: 0.0,
            drdphi: shot.crossing.alpha,
        },
        t: shot.crossing.t,
        dir: 1.0,
    };
    let mut opts = IntegrateOptions::with_tol(tol);
    opts.stop_at_r = stop;
    integrate_dual(p, start, shot.crossing.t + 1e4, &opts)
}

/// Roots of G(r₀) − m, G = (r₁ + ε)/(r₁ − r₂), for m = 0, 1, 2, …, in order
/// of decreasing r₀. Each branch of the phase q = G − ⌊G⌋ is handled
/// separately, so the jumps of q never enter a bracket.
pub fn find_double_contacts(
    p: &LambdaProfile,
    epsilon: f64,
    r0_bracket: (f64, f64),
    n_targets: usize,
    tol: f64,
) -> Result<Vec<DoubleContact>> {
    match p.reflection_epsilon() {
        Some(e) if (e - epsilon).abs() <= 1e-15 * e.max(1.0) => {}
        _ => {
            return Err(GeoError::InvalidArgument(format!(
                "find_double_contacts needs a profile reflected with epsilon = {epsilon}"
            )))
        }
    }
    reject_product(p)?;
    let (lo, hi) = r0_bracket;
    if !(lo > 0.0 && hi > lo) || n_targets == 0 {
        return Err(GeoError::InvalidArgument(format!(
            "bad bracket ({lo}, {hi}) or n_targets = {n_targets}"
        )));
    }
    let phi_start = PHI_START;
    const GRID: usize = 48;
    let grid: Vec<f64> = (0..=GRID)
        .map(|i| hi * (lo / hi).powf(i as f64 / GRID as f64))
        .collect();
    let g: Vec<f64> = grid
        .par_iter()
        .map(|&r0| phase_at(p, epsilon, r0, phi_start, tol))
        .collect::<Result<_>>()?;

    // (m, a, b): G − m changes sign on [b, a] with a > b in r₀.
    let mut brackets = Vec::new();
    for i in 0..GRID {
        let (ga, gb) = (g[i], g[i + 1]);
        let (lo_g, hi_g) = (ga.min(gb), ga.max(gb));
        let mut m = lo_g.floor() + 1.0;
        if lo_g < 0.0 && m > 0.0 {
            m = 0.0f64.max(m);
        }
        while m <= hi_g {
            if m >= 0.0 && lo_g < m {
                brackets.push((m as usize, grid[i], grid[i + 1]));
            }
            m += 1.0;
        }
    }
    brackets.sort_by(|x, y| x.0.cmp(&y.0).then(y.1.total_cmp(&x.1)));
    brackets.dedup_by_key(|b| b.0);

    let found: Vec<DoubleContact> = brackets
        .par_iter()
        .take(n_targets)
        .map(|&(m, a, b)| {
            let f = |r0: f64| {
                phase_at(p, epsilon, r0, phi_start, tol).map_or(f64::NAN, |g| g - m as f64)
            };
            let r0 = bisect_scalar(f, b, a, 1e-15 * a).ok_or(GeoError::BracketExhausted {
                found: 0,
                wanted: 1,
            })?;
            let shot = shoot_from_boundary(p, r0, phi_start, tol)?;
            let arc = continue_shot(p, &shot, Some(-epsilon), tol)?;
            let end = arc.last_state();
            let (phi0, alpha) = (shot.crossing.phi0, shot.crossing.alpha);
            let residual = (end.phi - phi0).hypot(end.drdphi() + alpha);
            let rep = jacobi_zeros(&arc, tol)?;
            Ok(DoubleContact {
                r0,
                epsilon,
                phi0,
                alpha,
                residual,
                periods_in_strip: m + 1,
                index_estimate: rep.index,
            })
        })
        .collect::<Result<_>>()?;
    if found.len() < n_targets {
        return Err(GeoError::BracketExhausted {
            found: found.len(),
            wanted: n_targets,
        });
    }
    Ok(found)
}
