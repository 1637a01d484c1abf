use serde::Serialize;

use super::LambdaProfile;
use crate::error::{GeoError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintStatus {
    /// Strict inequality at every grid point.
    Holds,
    /// Equality somewhere, never violated.
    Saturated,
    Fails,
}

impl ConstraintStatus {
    pub fn is_satisfied(self) -> bool {
        self != ConstraintStatus::Fails
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub status: ConstraintStatus,
    /// Margin in the direction where positive is a violation.
    pub worst_margin: f64,
    pub worst_at: f64,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub r_max: f64,
    pub grid_n: usize,
    /// λ′(r) < −sin 2r; margin λ′ + sin 2r.
    pub barrier: ConstraintReport,
    /// λ″(r) ≤ 2 sin²r; margin λ″ − 2 sin²r.
    pub second_derivative: ConstraintReport,
    /// λ′ = 0 wherever λ = 0; margin |λ′| − 1e-9 at zeros of λ in (0, r_max].
    pub flat_at_zero: ConstraintReport,
}

impl ValidationReport {
    pub fn all_hold(&self) -> bool {
        self.barrier.status.is_satisfied()
            && self.second_derivative.status.is_satisfied()
            && self.flat_at_zero.status.is_satisfied()
    }
}

/// Check the barrier, Ricci and smoothness hypotheses on the grid
/// r_i = i·r_max/grid_n, i = 1..grid_n. A strict constraint (barrier) is
/// `Saturated` when its worst margin is exactly zero; a non-strict one
/// (second derivative, flatness) holds whenever the margin is ≤ 0.
pub fn validate_profile(p: &LambdaProfile, r_max: f64, grid_n: usize) -> Result<ValidationReport> {
    if grid_n < 2 {
        return Err(GeoError::InvalidArgument(format!(
            "grid_n = {grid_n} must be at least 2"
        )));
    }
    if !(r_max > 0.0) {
        return Err(GeoError::InvalidArgument(format!(
            "r_max = {r_max} must be positive"
        )));
    }
    // Points past the first zero of λ are outside the profile's domain.
    let limit = p.first_zero().unwrap_or(f64::INFINITY);
    let grid: Vec<f64> = (1..=grid_n)
        .map(|i| r_max * i as f64 / grid_n as f64)
        .filter(|&r| r <= limit)
        .collect();

    let mut barrier = Tally::default();
    let mut second = Tally::default();
    for &r in &grid {
        barrier.push(r, p.barrier_margin(r)?);
        second.push(r, -p.second_derivative_margin(r)?);
    }

    let mut flat = Tally::default();
    match p.first_zero() {
        Some(z) if z <= r_max => flat.push(z, p.eval(z)?.dlambda.abs() - FLAT_TOL),
        _ => flat.push(r_max, -FLAT_TOL),
    }

    Ok(ValidationReport {
        r_max,
        grid_n,
        barrier: barrier.finish(true),
        second_derivative: second.finish(false),
        flat_at_zero: flat.finish(false),
    })
}

/// |λ′| below this at a zero of λ counts as zero.
const FLAT_TOL: f64 = 1e-9;

#[derive(Default)]
struct Tally {
    worst: Option<(f64, f64)>,
    violations: usize,
}

impl Tally {
    fn push(&mut self, r: f64, margin: f64) {
        if margin > 0.0 {
            self.violations += 1;
        }
        match self.worst {
            Some((m, _)) if m >= margin => {}
            _ => self.worst = Some((margin, r)),
        }
    }

    fn finish(self, strict: bool) -> ConstraintReport {
        let (worst_margin, worst_at) = self.worst.unwrap_or((f64::NEG_INFINITY, 0.0));
        let status = if self.violations > 0 {
            ConstraintStatus::Fails
        } else if strict && worst_margin == 0.0 {
            ConstraintStatus::Saturated
        } else {
            ConstraintStatus::Holds
        };
        ConstraintReport {
            status,
            worst_margin,
            worst_at,
            violations: self.violations,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c1cosine_saturates_barrier() {
        let rep = validate_profile(&LambdaProfile::C1Cosine, 1.0, 1000).unwrap();
        assert_eq!(rep.barrier.status, ConstraintStatus::Saturated);
        assert_eq!(rep.barrier.worst_margin, 0.0);
        assert_eq!(rep.second_derivative.status, ConstraintStatus::Holds);
        assert!(rep.all_hold());
    }

    #[test]
    fn product_fails_barrier_everywhere() {
        let rep = validate_profile(&LambdaProfile::Product, 1.0, 1000).unwrap();
        assert_eq!(rep.barrier.status, ConstraintStatus::Fails);
        assert_eq!(rep.barrier.violations, 1000);
    }

    #[test]
    fn default_smooth_profile_is_strictly_compliant() {
        let rep = validate_profile(&LambdaProfile::smooth_default(), 1.0, 1000).unwrap();
        assert_eq!(rep.barrier.status, ConstraintStatus::Holds);
        assert!(rep.barrier.worst_margin < 0.0);
        assert_eq!(rep.second_derivative.status, ConstraintStatus::Holds);
        assert_eq!(rep.flat_at_zero.status, ConstraintStatus::Holds);
    }

    #[test]
    fn flatness_checked_at_the_zero() {
        let p = LambdaProfile::smooth_default();
        let rep = validate_profile(&p, 1.5, 100).unwrap();
        assert_eq!(rep.flat_at_zero.status, ConstraintStatus::Holds);
        assert!((rep.flat_at_zero.worst_at - p.first_zero().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn slow_squeeze_profile_fails_barrier() {
        let p = LambdaProfile::smooth(-0.2, 1.0).unwrap();
        let rep = validate_profile(&p, 1.0, 500).unwrap();
        assert_eq!(rep.barrier.status, ConstraintStatus::Fails);
    }

    #[test]
    fn rejects_tiny_grid() {
        assert!(validate_profile(&LambdaProfile::Product, 1.0, 1).is_err());
    }
}
