//! The degenerate quotient metric λ(r) sin²φ (dr² + λ(r) dφ²) on the strip
//! ℝ × [0, π], its Gaussian curvature, and the Ricci diagonal of the
//! rotationally symmetric 3-metric dr² + λ(r) g_{S²}.

mod profile;
mod validate;

pub use profile::{
    LambdaProfile, ProfileSpec, ProfileValue, Side, BUMP_RATE, DEFAULT_ETA, DEFAULT_R_FLAT,
};
pub use validate::{validate_profile, ConstraintReport, ConstraintStatus, ValidationReport};

use std::f64::consts::PI;

use crate::error::{GeoError, Result};

/// Default half-width of the boundary guard band in φ.
pub const PHI_MIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMetric {
    pub profile: LambdaProfile,
    /// Pointwise operations reject φ outside [phi_min, π − phi_min].
    /// Zero opts into boundary-limit evaluation.
    pub phi_min: f64,
}

impl SurfaceMetric {
    pub fn new(profile: LambdaProfile) -> Self {
        SurfaceMetric {
            profile,
            phi_min: PHI_MIN,
        }
    }

    pub fn with_phi_min(mut self, phi_min: f64) -> Self {
        self.phi_min = phi_min;
        self
    }

    pub fn guard(&self, phi: f64) -> Result<()> {
        let ok = if self.phi_min > 0.0 {
            phi >= self.phi_min && phi <= PI - self.phi_min
        } else {
            phi > 0.0 && phi < PI
        };
        if ok {
            Ok(())
        } else {
            Err(GeoError::Degenerate {
                phi,
                phi_min: self.phi_min,
            })
        }
    }

    /// E(r, φ) = λ sin²φ and G(r, φ) = λ² sin²φ.
    pub fn coefficients(&self, r: f64, phi: f64) -> Result<(f64, f64)> {
        let l = self.profile.eval(r)?.lambda;
        let s2 = phi.sin().powi(2);
        Ok((l * s2, l * l * s2))
    }

    pub fn gaussian_curvature(&self, r: f64, phi: f64) -> Result<f64> {
        self.guard(phi)?;
        gaussian_curvature_unguarded(&self.profile, r, phi)
    }
}

/// Gaussian curvature of the quotient metric without the boundary guard.
///
/// For E = λ sin²φ, G = λ² sin²φ the orthogonal-coordinate formula
/// K = −(∂_r(G_r/√EG) + ∂_φ(E_φ/√EG)) / (2√EG) reduces to
/// K = (1/sin²φ − λ″ + λ′²/(2λ)) / (λ² sin²φ).
pub fn gaussian_curvature_unguarded(profile: &LambdaProfile, r: f64, phi: f64) -> Result<f64> {
    let v = profile.eval(r)?;
    if v.lambda <= 0.0 {
        return Err(GeoError::Pole { r });
    }
    let s2 = phi.sin().powi(2);
    if s2 == 0.0 {
        return Err(GeoError::Degenerate { phi, phi_min: 0.0 });
    }
    let l = v.lambda;
    Ok((1.0 / s2 - v.ddlambda + v.dlambda * v.dlambda / (2.0 * l)) / (l * l * s2))
}

pub fn gaussian_curvature(metric: &SurfaceMetric, r: f64, phi: f64) -> Result<f64> {
    metric.gaussian_curvature(r, phi)
}

/// Diagonal of the Ricci tensor of dr² + λ(r)(dφ² + sin²φ dθ²):
/// (½λ′²/λ² − λ″/λ, (1 − ½λ″)/λ, (1 − ½λ″)/λ).
pub fn ricci_diagonal(profile: &LambdaProfile, r: f64) -> Result<(f64, f64, f64)> {
    let v = profile.eval(r)?;
    if v.lambda <= 0.0 {
        return Err(GeoError::Pole { r });
    }
    let l = v.lambda;
    let rr = 0.5 * v.dlambda * v.dlambda / (l * l) - v.ddlambda / l;
    let t = (1.0 - 0.5 * v.ddlambda) / l;
    Ok((rr, t, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    /// Brioschi formula for a diagonal metric, with all partial derivatives
    /// of E and G taken by central differences, Richardson-extrapolated.
    fn curvature_by_finite_differences(m: &SurfaceMetric, r: f64, phi: f64) -> f64 {
        let k1 = brioschi(m, r, phi, 2e-4);
        let k2 = brioschi(m, r, phi, 1e-4);
        (4.0 * k2 - k1) / 3.0
    }

    fn brioschi(m: &SurfaceMetric, r: f64, phi: f64, h: f64) -> f64 {
        let e = |r: f64, p: f64| m.coefficients(r, p).unwrap().0;
        let g = |r: f64, p: f64| m.coefficients(r, p).unwrap().1;
        let sqrt_eg = |r: f64, p: f64| (e(r, p) * g(r, p)).sqrt();
        let gr_over = |r: f64, p: f64| (g(r + h, p) - g(r - h, p)) / (2.0 * h) / sqrt_eg(r, p);
        let ep_over = |r: f64, p: f64| (e(r, p + h) - e(r, p - h)) / (2.0 * h) / sqrt_eg(r, p);
        let d_r = (gr_over(r + h, phi) - gr_over(r - h, phi)) / (2.0 * h);
        let d_p = (ep_over(r, phi + h) - ep_over(r, phi - h)) / (2.0 * h);
        -(d_r + d_p) / (2.0 * sqrt_eg(r, phi))
    }

    #[test]
    fn product_curvature_at_equator_and_quarter() {
        let m = SurfaceMetric::new(LambdaProfile::Product);
        assert!((m.gaussian_curvature(0.3, FRAC_PI_2).unwrap() - 1.0).abs() < 1e-14);
        assert!((m.gaussian_curvature(-2.0, FRAC_PI_4).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn product_curvature_matches_inverse_sin_fourth_on_grid() {
        let m = SurfaceMetric::new(LambdaProfile::Product);
        for i in 0..=200 {
            let phi = 0.05 + (PI - 0.1) * i as f64 / 200.0;
            let k = m.gaussian_curvature(1.0, phi).unwrap();
            let want = 1.0 / phi.sin().powi(4);
            assert!((k - want).abs() <= 1e-8 * want.max(1.0));
            assert!(k >= 1.0);
        }
    }

    #[test]
    fn c1cosine_curvature_matches_finite_difference_oracle() {
        let m = SurfaceMetric::new(LambdaProfile::C1Cosine);
        let k = m.gaussian_curvature(0.3, 1.0).unwrap();
        let fd = curvature_by_finite_differences(&m, 0.3, 1.0);
        assert!((k - fd).abs() < 1e-5 * k.abs(), "{k} vs {fd}");
    }

    #[test]
    fn smooth_curvature_matches_finite_difference_oracle() {
        let m = SurfaceMetric::new(LambdaProfile::smooth_default());
        for &(r, phi) in &[(0.2, 0.7), (0.8, 1.9), (1.3, 1.2)] {
            let k = m.gaussian_curvature(r, phi).unwrap();
            let fd = curvature_by_finite_differences(&m, r, phi);
            assert!((k - fd).abs() < 1e-5 * k.abs(), "({r},{phi}): {k} vs {fd}");
        }
    }

    #[test]
    fn curvature_guard_band() {
        let m = SurfaceMetric::new(LambdaProfile::Product);
        assert!(matches!(
            m.gaussian_curvature(0.0, 0.0),
            Err(GeoError::Degenerate { .. })
        ));
        assert!(m.gaussian_curvature(0.0, PI - 1e-7).is_err());
        let open = SurfaceMetric::new(LambdaProfile::Product).with_phi_min(0.0);
        assert!(open.gaussian_curvature(0.0, 1e-7).is_ok());
    }

    #[test]
    fn ricci_product_and_cosine() {
        let (a, b, c) = ricci_diagonal(&LambdaProfile::Product, -1.0).unwrap();
        assert_eq!((a, b, c), (0.0, 1.0, 1.0));
        let (a, b, c) = ricci_diagonal(&LambdaProfile::C1Cosine, FRAC_PI_4).unwrap();
        assert!((a - 2.0).abs() < 1e-14 && (b - 2.0).abs() < 1e-14 && b == c);
    }

    #[test]
    fn ricci_pole_at_zero_of_lambda() {
        let p = LambdaProfile::smooth_default();
        let z = p.first_zero().unwrap();
        assert!(matches!(ricci_diagonal(&p, z), Err(GeoError::Pole { .. })));
    }

    #[test]
    fn lambda_prime_squared_over_lambda_tends_to_twice_second_derivative() {
        let p = LambdaProfile::smooth_default();
        let z = p.first_zero().unwrap();
        let mut last = f64::INFINITY;
        for k in 2..7 {
            let r = z - 10f64.powi(-k);
            let v = p.eval(r).unwrap();
            let gap = (v.dlambda * v.dlambda / v.lambda - 2.0 * v.ddlambda).abs();
            assert!(gap < last);
            last = gap;
        }
        assert!(last < 1e-3, "{last}");
    }
}
