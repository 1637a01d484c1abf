//! Geodesics of the quotient metric λ sin²φ (dr² + λ dφ²).
//!
//! Two charts are used. In the time chart the state is (r, φ, ṙ, φ̇) with t
//! the ds-arc-length; it is regular at turning points φ̇ = 0 but degenerates
//! near φ ∈ {0, π}. In the angle chart r is a function of φ with slope
//! p = dr/dφ; it is regular at the boundary but breaks down where φ̇ = 0.

mod integrate;
mod periods;
mod trajectory;

pub use integrate::{
    integrate_dual, integrate_phi, integrate_phi_with, integrate_t, integrate_t_with,
    IntegrateOptions, Start, SLOPE_RETURN, SLOPE_SWITCH,
};
pub use periods::{
    closed_form_leaf, half_period_length, measured_period, period_bound, period_table,
    quarter_period, PeriodRow,
};
pub use trajectory::{ConservationReport, Event, EventKind, Piece, Termination, Trajectory};

use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::metrics::LambdaProfile;

/// A point of the unit tangent bundle, parametrised by ds-arc-length `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicState {
    pub t: f64,
    pub r: f64,
    pub phi: f64,
    pub rdot: f64,
    pub phidot: f64,
}

impl GeodesicState {
    /// Rescale the direction (dr, dφ) at (r, φ) to unit speed.
    pub fn normalized(
        p: &LambdaProfile,
        t: f64,
        r: f64,
        phi: f64,
        dr: f64,
        dphi: f64,
    ) -> Result<Self> {
        let l = positive_lambda(p, r)?;
        let s2 = sin_sq(phi)?;
        let q = (dr * dr + l * dphi * dphi) * l * s2;
        if !(q > 0.0) || !q.is_finite() {
            return Err(GeoError::InvalidArgument(format!(
                "cannot normalise direction ({dr}, {dphi})"
            )));
        }
        let k = 1.0 / q.sqrt();
        Ok(GeodesicState {
            t,
            r,
            phi,
            rdot: k * dr,
            phidot: k * dphi,
        })
    }

    /// Product-metric geodesic crossing the equator at `r` with Clairaut
    /// constant `c`, heading towards φ = 0 when `descending`.
    pub fn at_equator(c: f64, r: f64, descending: bool) -> Result<Self> {
        if !(c.abs() <= 1.0) {
            return Err(GeoError::domain("clairaut constant", c, "|c| <= 1"));
        }
        let pd = (1.0 - c * c).sqrt();
        Ok(GeodesicState {
            t: 0.0,
            r,
            phi: std::f64::consts::FRAC_PI_2,
            rdot: c,
            phidot: if descending { -pd } else { pd },
        })
    }

    /// (ṙ² + λφ̇²) λ sin²φ, which is 1 for unit speed.
    pub fn speed_sq(&self, p: &LambdaProfile) -> Result<f64> {
        let l = p.eval(self.r)?.lambda;
        let s = self.phi.sin();
        Ok((self.rdot * self.rdot + l * self.phidot * self.phidot) * l * s * s)
    }

    /// ṙ sin²φ; conserved wherever λ ≡ 1.
    pub fn clairaut(&self) -> f64 {
        let s = self.phi.sin();
        self.rdot * s * s
    }

    pub fn drdphi(&self) -> f64 {
        self.rdot / self.phidot
    }

    pub fn to_phi_state(&self) -> PhiState {
        PhiState {
            phi: self.phi,
            r: self.r,
            drdphi: self.drdphi(),
        }
    }
}

/// A point of a geodesic written as a graph r(φ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiState {
    pub phi: f64,
    pub r: f64,
    pub drdphi: f64,
}

impl PhiState {
    /// Unit-speed state; `dir` is the sign of φ̇.
    pub fn to_geodesic(&self, p: &LambdaProfile, t: f64, dir: f64) -> Result<GeodesicState> {
        let l = positive_lambda(p, self.r)?;
        let s = self.phi.sin();
        if s <= 0.0 {
            return Err(GeoError::Degenerate {
                phi: self.phi,
                phi_min: 0.0,
            });
        }
        let phidot = dir.signum() / (s * ((self.drdphi * self.drdphi + l) * l).sqrt());
        Ok(GeodesicState {
            t,
            r: self.r,
            phi: self.phi,
            rdot: self.drdphi * phidot,
            phidot,
        })
    }
}

fn positive_lambda(p: &LambdaProfile, r: f64) -> Result<f64> {
    let l = p.eval(r)?.lambda;
    if l <= 0.0 {
        return Err(GeoError::Pole { r });
    }
    Ok(l)
}

fn sin_sq(phi: f64) -> Result<f64> {
    let s = phi.sin();
    if !(phi > 0.0 && phi < std::f64::consts::PI) || s <= 0.0 {
        return Err(GeoError::Degenerate { phi, phi_min: 0.0 });
    }
    Ok(s * s)
}

/// (r̈, φ̈) of the geodesic equations in the time chart:
/// r̈ = −2 cot φ ṙφ̇ − (λ′/2λ) ṙ² + λ′ φ̇²,
/// φ̈ = cot φ (ṙ²/λ − φ̇²) − 2 (λ′/λ) ṙφ̇.
pub fn geodesic_rhs(p: &LambdaProfile, s: &GeodesicState) -> Result<(f64, f64)> {
    let v = p.eval(s.r)?;
    if v.lambda <= 0.0 {
        return Err(GeoError::Pole { r: s.r });
    }
    sin_sq(s.phi)?;
    let (sn, cs) = s.phi.sin_cos();
    let cot = cs / sn;
    let (l, dl) = (v.lambda, v.dlambda);
    let (rd, pd) = (s.rdot, s.phidot);
    let rdd = -2.0 * cot * rd * pd - dl / (2.0 * l) * rd * rd + dl * pd * pd;
    let pdd = cot * (rd * rd / l - pd * pd) - 2.0 * (dl / l) * rd * pd;
    Ok((rdd, pdd))
}

/// d²r/dφ² of a geodesic written as r(φ):
/// −(1/λ) cot φ p³ + (3/2)(λ′/λ) p² − cot φ p + λ′.
pub fn phi_rhs(p: &LambdaProfile, phi: f64, r: f64, drdphi: f64) -> Result<f64> {
    let v = p.eval(r)?;
    if v.lambda <= 0.0 {
        return Err(GeoError::Pole { r });
    }
    sin_sq(phi)?;
    let (sn, cs) = phi.sin_cos();
    let cot = cs / sn;
    let (l, dl) = (v.lambda, v.dlambda);
    let q = drdphi;
    Ok(-cot * q * q * q / l + 1.5 * dl / l * q * q - cot * q + dl)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

    fn st(r: f64, phi: f64, rdot: f64, phidot: f64) -> GeodesicState {
        GeodesicState {
            t: 0.0,
            r,
            phi,
            rdot,
            phidot,
        }
    }

    #[test]
    fn rhs_equator_is_geodesic() {
        let (a, b) = geodesic_rhs(&LambdaProfile::Product, &st(0.0, FRAC_PI_2, 1.0, 0.0)).unwrap();
        assert!(a.abs() < 1e-15 && b.abs() < 1e-15);
    }

    #[test]
    fn rhs_product_vertical() {
        let (a, b) =
            geodesic_rhs(&LambdaProfile::Product, &st(0.0, FRAC_PI_4, 0.0, SQRT_2)).unwrap();
        assert!(a.abs() < 1e-15);
        assert!((b + 2.0).abs() < 1e-14);
    }

    #[test]
    fn rhs_c1cosine_on_equator() {
        let (a, b) = geodesic_rhs(
            &LambdaProfile::C1Cosine,
            &st(FRAC_PI_4, FRAC_PI_2, SQRT_2, 0.0),
        )
        .unwrap();
        assert!((a - 2.0).abs() < 1e-14, "{a}");
        assert!(b.abs() < 1e-15);
    }

    #[test]
    fn rhs_rejects_boundary_and_pole() {
        assert!(geodesic_rhs(&LambdaProfile::Product, &st(0.0, 0.0, 1.0, 0.0)).is_err());
        let p = LambdaProfile::smooth_default();
        let z = p.first_zero().unwrap();
        assert!(matches!(
            geodesic_rhs(&p, &st(z, 1.0, 1.0, 0.0)),
            Err(GeoError::Pole { .. })
        ));
    }

    /// The angle-chart equation is the time-chart system rewritten with
    /// p = ṙ/φ̇: p′ = (r̈ φ̇ − ṙ φ̈)/φ̇³.
    #[test]
    fn phi_rhs_agrees_with_time_chart() {
        let p = LambdaProfile::smooth_default();
        for &(r, phi, q) in &[(0.3, 0.7, -0.4), (0.9, 2.0, 1.3), (-0.5, 1.1, 0.2)] {
            let s = PhiState { phi, r, drdphi: q }
                .to_geodesic(&p, 0.0, 1.0)
                .unwrap();
            let (rdd, pdd) = geodesic_rhs(&p, &s).unwrap();
            let want = (rdd * s.phidot - s.rdot * pdd) / s.phidot.powi(3);
            let got = phi_rhs(&p, phi, r, q).unwrap();
            assert!(
                (got - want).abs() < 1e-12 * want.abs().max(1.0),
                "{got} vs {want}"
            );
        }
    }

    #[test]
    fn normalization_gives_unit_speed() {
        let p = LambdaProfile::C1Cosine;
        let s = GeodesicState::normalized(&p, 0.0, 0.4, 0.9, 0.3, -2.0).unwrap();
        assert!((s.speed_sq(&p).unwrap() - 1.0).abs() < 1e-14);
        let b = PhiState {
            phi: 0.9,
            r: 0.4,
            drdphi: -0.15,
        }
        .to_geodesic(&p, 0.0, -1.0)
        .unwrap();
        assert!((b.speed_sq(&p).unwrap() - 1.0).abs() < 1e-14);
        assert!(b.phidot < 0.0 && (b.drdphi() + 0.15).abs() < 1e-15);
    }

    #[test]
    fn equator_start_has_clairaut_c() {
        let s = GeodesicState::at_equator(0.3, 0.0, true).unwrap();
        assert!((s.clairaut() - 0.3).abs() < 1e-15);
        assert!((s.speed_sq(&LambdaProfile::Product).unwrap() - 1.0).abs() < 1e-15);
    }
}
