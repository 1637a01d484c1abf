use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::Serialize;

use super::{integrate_t, EventKind, GeodesicState};
use crate::error::{GeoError, Result};
use crate::metrics::LambdaProfile;
use crate::quadrature::integrate;

const QUAD_TOL: f64 = 1e-14;

fn check_c(what: &'static str, c: f64) -> Result<()> {
    if c > 0.0 && c < 1.0 {
        Ok(())
    } else {
        Err(GeoError::domain(what, c, "0 < c < 1"))
    }
}

/// r-advance of a product-metric geodesic from the equator to its turning
/// point sin φ = c, i.e. ∫ c/√(sin²φ − c²) dφ over [arcsin c, π/2].
///
/// Writing sin φ = √(c² + (1 − c²) sin²β) removes the endpoint singularity:
/// the integral becomes c ∫₀^{π/2} dβ / √(sin²β + c² cos²β).
pub fn quarter_period(c: f64) -> Result<f64> {
    check_c("quarter_period", c)?;
    let f = |b: f64| {
        let (s, co) = b.sin_cos();
        1.0 / (s * s + c * c * co * co).sqrt()
    };
    Ok(c * integrate(f, 0.0, FRAC_PI_2, QUAD_TOL / c)?)
}

/// ds-length of the arc from the equator down to the turning point and
/// back: 2 ∫₀^{π/2} √(cos²α + c² sin²α) dα.
pub fn half_period_length(c: f64) -> Result<f64> {
    check_c("half_period_length", c)?;
    let f = |a: f64| {
        let (s, co) = a.sin_cos();
        (co * co + c * c * s * s).sqrt()
    };
    Ok(2.0 * integrate(f, 0.0, FRAC_PI_2, QUAD_TOL)?)
}

/// Upper bound 2π√(2c/(1 + c)) on the full r-period.
pub fn period_bound(c: f64) -> f64 {
    2.0 * PI * (2.0 * c / (1.0 + c)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodRow {
    pub c: f64,
    /// 4 × [`quarter_period`].
    pub period_quadrature: f64,
    /// r-advance between descending equator crossings of the integrated geodesic.
    pub period_measured: f64,
    pub bound: f64,
    pub below_bound: bool,
}

/// r-advance over one full oscillation, measured on a product geodesic
/// started on the equator.
pub fn measured_period(c: f64, tol: f64) -> Result<f64> {
    let s0 = GeodesicState::at_equator(c, 0.0, true)?;
    let t_end = 2.0 * half_period_length(c)? + 1.0;
    let tr = integrate_t(&LambdaProfile::Product, s0, t_end, tol)?;
    let r = tr
        .events_of(EventKind::EquatorCrossing)
        .find(|e| e.state.phidot < 0.0)
        .map(|e| e.state.r - s0.r);
    r.ok_or(GeoError::StepFailure { t: t_end, h: 0.0 })
}

/// One row per c, in input order.
pub fn period_table(c_list: &[f64], tol: f64) -> Result<Vec<PeriodRow>> {
    c_list
        .par_iter()
        .map(|&c| {
            let q = 4.0 * quarter_period(c)?;
            let m = measured_period(c, tol)?;
            let bound = period_bound(c);
            Ok(PeriodRow {
                c,
                period_quadrature: q,
                period_measured: m,
                bound,
                below_bound: q < bound && m < bound,
            })
        })
        .collect()
}

/// Leaf cos φ = tan r / tan κ of the foliation by geodesics of the C¹
/// cosine profile: returns φ(r) and dr/dφ = −sin φ cos²r tan κ.
pub fn closed_form_leaf(kappa: f64, r: f64) -> Result<(f64, f64)> {
    if !(kappa > 0.0 && kappa < FRAC_PI_2) {
        return Err(GeoError::domain(
            "closed_form_leaf kappa",
            kappa,
            "0 < kappa < pi/2",
        ));
    }
    if !(r.abs() < FRAC_PI_2) {
        return Err(GeoError::domain("closed_form_leaf r", r, "|r| < pi/2"));
    }
    let tk = kappa.tan();
    let x = r.tan() / tk;
    if !(-1.0..=1.0).contains(&x) {
        return Err(GeoError::domain(
            "closed_form_leaf",
            r,
            "|tan r / tan kappa| <= 1",
        ));
    }
    let phi = x.acos();
    let c = r.cos();
    Ok((phi, -phi.sin() * c * c * tk))
}
