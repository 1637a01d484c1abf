//! Warping profiles λ(r) for the metric dr² + λ(r)(dφ² + sin²φ dθ²).
//!
//! A profile is 1 on r ≤ 0 and non-increasing on r ≥ 0 until its first zero.
//! Kinks where λ″ jumps (r = 0 for the cosine-based profiles) are evaluated
//! from the r ≥ 0 side by [`LambdaProfile::eval`]; use
//! [`LambdaProfile::eval_one_sided`] to pick a side explicitly.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};

/// Default perturbation size of the compliant profile.
pub const DEFAULT_ETA: f64 = 0.05;
/// Default end of the working interval of the compliant profile.
pub const DEFAULT_R_FLAT: f64 = 1.2;
/// Rate constant `a` of the flat bump `s(r) = exp(-a/r)`.
pub const BUMP_RATE: f64 = 0.25;

/// Value and first two derivatives of a profile at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileValue {
    pub lambda: f64,
    pub dlambda: f64,
    pub ddlambda: f64,
}

impl ProfileValue {
    const ONE: ProfileValue = ProfileValue {
        lambda: 1.0,
        dlambda: 0.0,
        ddlambda: 0.0,
    };

    pub fn as_tuple(&self) -> (f64, f64, f64) {
        (self.lambda, self.dlambda, self.ddlambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileWire", into = "ProfileSpec")]
pub enum LambdaProfile {
    /// λ ≡ 1.
    #[default]
    Product,
    /// λ = cos²r on [0, π/2], 1 for r < 0.
    C1Cosine,
    /// λ = cos²r − η·exp(−a/r) on [0, r_flat], flattened beyond so that λ′ = 0
    /// where λ = 0. A negative η gives a profile that squeezes more slowly than
    /// cos²r; it is defined on [0, r_flat] only and exists to exercise the
    /// barrier hypothesis.
    SmoothCompliant { eta: f64, r_flat: f64 },
    /// Inner profile reflected in r = −ε/2, with λ ≡ 1 on (−ε, 0).
    Reflected {
        epsilon: f64,
        inner: Box<LambdaProfile>,
    },
}

impl LambdaProfile {
    pub fn smooth(eta: f64, r_flat: f64) -> Result<Self> {
        let p = LambdaProfile::SmoothCompliant { eta, r_flat };
        p.check()?;
        Ok(p)
    }

    pub fn smooth_default() -> Self {
        LambdaProfile::SmoothCompliant {
            eta: DEFAULT_ETA,
            r_flat: DEFAULT_R_FLAT,
        }
    }

    pub fn reflected(epsilon: f64, inner: LambdaProfile) -> Result<Self> {
        let p = LambdaProfile::Reflected {
            epsilon,
            inner: Box::new(inner),
        };
        p.check()?;
        Ok(p)
    }

    /// Structural validation of the parameters.
    pub fn check(&self) -> Result<()> {
        match self {
            LambdaProfile::Product | LambdaProfile::C1Cosine => Ok(()),
            LambdaProfile::SmoothCompliant { eta, r_flat } => {
                if !eta.is_finite() || !r_flat.is_finite() {
                    return Err(GeoError::InvalidProfile("non-finite parameter".into()));
                }
                if *r_flat <= 0.0 || *r_flat >= FRAC_PI_2 {
                    return Err(GeoError::InvalidProfile(format!(
                        "r_flat = {r_flat} must lie in (0, pi/2)"
                    )));
                }
                if bump_profile(*eta, *r_flat).lambda <= 0.0 {
                    return Err(GeoError::InvalidProfile(format!(
                        "lambda already vanishes before r_flat = {r_flat} (eta = {eta})"
                    )));
                }
                Ok(())
            }
            LambdaProfile::Reflected { epsilon, inner } => {
                if !(*epsilon > 0.0 && epsilon.is_finite()) {
                    return Err(GeoError::InvalidProfile(format!(
                        "epsilon = {epsilon} must be positive"
                    )));
                }
                if matches!(**inner, LambdaProfile::Reflected { .. }) {
                    return Err(GeoError::InvalidProfile(
                        "nested reflections are not supported".into(),
                    ));
                }
                inner.check()
            }
        }
    }

    pub fn is_product(&self) -> bool {
        matches!(self, LambdaProfile::Product)
    }

    pub fn reflection_epsilon(&self) -> Option<f64> {
        match self {
            LambdaProfile::Reflected { epsilon, .. } => Some(*epsilon),
            _ => None,
        }
    }

    /// Whether λ ≡ 1 at `r` (the product region of the profile).
    pub fn is_flat_at(&self, r: f64) -> bool {
        match self {
            LambdaProfile::Product => true,
            LambdaProfile::Reflected { epsilon, inner } => {
                (r > -epsilon && r < 0.0) || inner.is_flat_at(r.max(-epsilon - r))
            }
            _ => r < 0.0,
        }
    }

    /// λ, λ′, λ″ at `r`. At a kink λ″ is the right-hand limit.
    pub fn eval(&self, r: f64) -> Result<ProfileValue> {
        self.eval_one_sided(r, Side::Right)
    }

    pub fn eval_one_sided(&self, r: f64, side: Side) -> Result<ProfileValue> {
        if r.is_nan() {
            return Err(GeoError::domain("lambda profile", r, "finite r"));
        }
        match self {
            LambdaProfile::Product => Ok(ProfileValue::ONE),
            LambdaProfile::C1Cosine => {
                if r < 0.0 || (r == 0.0 && side == Side::Left) {
                    return Ok(ProfileValue::ONE);
                }
                if r > FRAC_PI_2 {
                    return Err(GeoError::domain("c1cosine profile", r, "r <= pi/2"));
                }
                let c = r.cos();
                Ok(ProfileValue {
                    lambda: c * c,
                    dlambda: -(2.0 * r).sin(),
                    ddlambda: -2.0 * (2.0 * r).cos(),
                })
            }
            LambdaProfile::SmoothCompliant { eta, r_flat } => {
                if r < 0.0 || (r == 0.0 && side == Side::Left) {
                    return Ok(ProfileValue::ONE);
                }
                if r <= *r_flat {
                    return Ok(bump_profile(*eta, r));
                }
                if *eta < 0.0 {
                    return Err(GeoError::domain(
                        "slow-squeeze profile",
                        r,
                        format!("r <= r_flat = {r_flat}"),
                    ));
                }
                if r > FRAC_PI_2 {
                    return Err(GeoError::domain("smooth profile", r, "r <= pi/2"));
                }
                let mut u = bump_profile(*eta, r);
                if u.lambda < -ZERO_SLACK {
                    return Err(GeoError::domain(
                        "smooth profile",
                        r,
                        "r before the first zero of lambda",
                    ));
                }
                // Within rounding of the zero λ vanishes to second order.
                u.lambda = u.lambda.max(0.0);
                let delta = bump_profile(*eta, *r_flat).lambda;
                let (h, dh, ddh) = flattening(u.lambda / delta);
                Ok(ProfileValue {
                    lambda: delta * h,
                    dlambda: dh * u.dlambda,
                    ddlambda: ddh * u.dlambda * u.dlambda / delta + dh * u.ddlambda,
                })
            }
            LambdaProfile::Reflected { epsilon, inner } => {
                let mirror = -epsilon - r;
                let on_left = r < -epsilon / 2.0 || (r == -epsilon / 2.0 && side == Side::Left);
                if on_left {
                    // λ(r) = λ_inner(−ε − r): odd first derivative, even second.
                    let flipped = match side {
                        Side::Left => Side::Right,
                        Side::Right => Side::Left,
                    };
                    let v = inner.eval_one_sided(mirror, flipped)?;
                    Ok(ProfileValue {
                        lambda: v.lambda,
                        dlambda: -v.dlambda,
                        ddlambda: v.ddlambda,
                    })
                } else {
                    inner.eval_one_sided(r, side)
                }
            }
        }
    }

    /// λ′(r) + sin 2r evaluated without cancellation where a closed form exists.
    /// Negative means the barrier inequality λ′ < −sin 2r holds strictly.
    pub fn barrier_margin(&self, r: f64) -> Result<f64> {
        match self {
            LambdaProfile::SmoothCompliant { eta, r_flat } if r > 0.0 && r <= *r_flat => {
                Ok(-eta * bump(r).1)
            }
            LambdaProfile::C1Cosine if (0.0..=FRAC_PI_2).contains(&r) => Ok(0.0),
            LambdaProfile::Reflected { inner, .. } if r >= 0.0 => inner.barrier_margin(r),
            _ => Ok(self.eval(r)?.dlambda + (2.0 * r).sin()),
        }
    }

    /// 2 sin²r − λ″(r), in closed form where available. Non-negative means the
    /// Ricci hypothesis λ″ ≤ 2 sin²r holds.
    pub fn second_derivative_margin(&self, r: f64) -> Result<f64> {
        match self {
            LambdaProfile::SmoothCompliant { eta, r_flat } if r > 0.0 && r <= *r_flat => {
                let c = r.cos();
                Ok(2.0 * c * c + eta * bump(r).2)
            }
            LambdaProfile::C1Cosine if r > 0.0 && r <= FRAC_PI_2 => {
                let c = r.cos();
                Ok(2.0 * c * c)
            }
            LambdaProfile::Reflected { inner, .. } if r >= 0.0 => inner.second_derivative_margin(r),
            _ => {
                let s = r.sin();
                Ok(2.0 * s * s - self.eval(r)?.ddlambda)
            }
        }
    }

    /// First zero of λ on r > 0, if the profile has one.
    pub fn first_zero(&self) -> Option<f64> {
        match self {
            LambdaProfile::Product => None,
            LambdaProfile::C1Cosine => Some(FRAC_PI_2),
            LambdaProfile::SmoothCompliant { eta, r_flat } => {
                if *eta < 0.0 {
                    return None;
                }
                // u = cos²r − η s(r) is strictly decreasing on (0, π/2].
                let u = |r: f64| bump_profile(*eta, r).lambda;
                let (mut lo, mut hi) = (*r_flat, FRAC_PI_2);
                if u(hi) > 0.0 {
                    return None;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if u(mid) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Some(hi)
            }
            LambdaProfile::Reflected { inner, .. } => inner.first_zero(),
        }
    }

    /// Upper end of the interval on which the profile's derivative
    /// constraints are meant to hold.
    pub fn working_limit(&self) -> f64 {
        match self {
            LambdaProfile::Product => f64::INFINITY,
            LambdaProfile::C1Cosine => FRAC_PI_2,
            LambdaProfile::SmoothCompliant { r_flat, .. } => *r_flat,
            LambdaProfile::Reflected { inner, .. } => inner.working_limit(),
        }
    }
}

/// s(r) = exp(−a/r) and its first two derivatives; identically zero for r ≤ 0.
fn bump(r: f64) -> (f64, f64, f64) {
    if r <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let a = BUMP_RATE;
    let s = (-a / r).exp();
    if s == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let ir = 1.0 / r;
    let ds = a * ir * ir * s;
    let dds = s * (a * a * ir.powi(4) - 2.0 * a * ir.powi(3));
    (s, ds, dds)
}

/// u(r) = cos²r − η s(r), the unflattened compliant profile on r ≥ 0.
fn bump_profile(eta: f64, r: f64) -> ProfileValue {
    let (s, ds, dds) = bump(r);
    let c = r.cos();
    ProfileValue {
        lambda: c * c - eta * s,
        dlambda: -(2.0 * r).sin() - eta * ds,
        ddlambda: -2.0 * (2.0 * r).cos() - eta * dds,
    }
}

/// Tolerated rounding below zero of u at the first zero of λ.
const ZERO_SLACK: f64 = 1e-14;

/// f(y) = exp(−1/y) and derivatives, zero for y ≤ 0.
fn flat_exp(y: f64) -> (f64, f64, f64) {
    if y <= 1e-3 {
        // exp(-1000) underflows; the derivatives vanish with it.
        return (0.0, 0.0, 0.0);
    }
    let f = (-1.0 / y).exp();
    let iy = 1.0 / y;
    (f, f * iy * iy, f * (iy.powi(4) - 2.0 * iy.powi(3)))
}

/// Smooth step ψ: 0 for x ≤ 0, 1 for x ≥ 1, with derivatives.
fn smooth_step(x: f64) -> (f64, f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if x >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let (a, da, dda) = flat_exp(x);
    let (b, fb, ffb) = flat_exp(1.0 - x);
    let db = -fb;
    let ddb = ffb;
    let s = a + b;
    let num = da * b - a * db;
    let psi = a / s;
    let dpsi = num / (s * s);
    let ddpsi = (dda * b - a * ddb) / (s * s) - 2.0 * num * (da + db) / (s * s * s);
    (psi, dpsi, ddpsi)
}

/// H(x) = x² + (x − x²)ψ(x): equals x for x ≥ 1 and x² near 0, strictly
/// increasing on (0, 1].
fn flattening(x: f64) -> (f64, f64, f64) {
    let (p, dp, ddp) = smooth_step(x);
    let h = x * x + (x - x * x) * p;
    let dh = 2.0 * x + (1.0 - 2.0 * x) * p + (x - x * x) * dp;
    let ddh = 2.0 - 2.0 * p + 2.0 * (1.0 - 2.0 * x) * dp + (x - x * x) * ddp;
    (h, dh, ddh)
}

/// Wire form of a profile.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_flat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<Box<ProfileSpec>>,
}

/// A profile given either as a bare kind name or as a full spec.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ProfileWire {
    Name(String),
    Spec(ProfileSpec),
}

impl TryFrom<ProfileWire> for LambdaProfile {
    type Error = GeoError;

    fn try_from(w: ProfileWire) -> Result<Self> {
        match w {
            ProfileWire::Name(kind) => ProfileSpec {
                kind,
                ..Default::default()
            }
            .try_into(),
            ProfileWire::Spec(spec) => spec.try_into(),
        }
    }
}

impl TryFrom<ProfileSpec> for LambdaProfile {
    type Error = GeoError;

    fn try_from(spec: ProfileSpec) -> Result<Self> {
        let p = match spec.kind.as_str() {
            "product" => LambdaProfile::Product,
            "c1cosine" => LambdaProfile::C1Cosine,
            "smooth" => LambdaProfile::SmoothCompliant {
                eta: spec.eta.unwrap_or(DEFAULT_ETA),
                r_flat: spec.r_flat.unwrap_or(DEFAULT_R_FLAT),
            },
            "reflected" => {
                let epsilon = spec.epsilon.ok_or_else(|| {
                    GeoError::InvalidProfile("reflected profile needs \"epsilon\"".into())
                })?;
                let inner = match spec.inner {
                    Some(inner) => LambdaProfile::try_from(*inner)?,
                    None => LambdaProfile::smooth_default(),
                };
                LambdaProfile::Reflected {
                    epsilon,
                    inner: Box::new(inner),
                }
            }
            other => {
                return Err(GeoError::InvalidProfile(format!(
                    "unknown kind {other:?} (expected product, c1cosine, smooth or reflected)"
                )))
            }
        };
        p.check()?;
        Ok(p)
    }
}

impl From<LambdaProfile> for ProfileSpec {
    fn from(p: LambdaProfile) -> Self {
        match p {
            LambdaProfile::Product => ProfileSpec {
                kind: "product".into(),
                ..Default::default()
            },
            LambdaProfile::C1Cosine => ProfileSpec {
                kind: "c1cosine".into(),
                ..Default::default()
            },
            LambdaProfile::SmoothCompliant { eta, r_flat } => ProfileSpec {
                kind: "smooth".into(),
                eta: Some(eta),
                r_flat: Some(r_flat),
                ..Default::default()
            },
            LambdaProfile::Reflected { epsilon, inner } => ProfileSpec {
                kind: "reflected".into(),
                epsilon: Some(epsilon),
                inner: Some(Box::new((*inner).into())),
                ..Default::default()
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn product_is_constant() {
        let v = LambdaProfile::Product.eval(3.7).unwrap();
        assert_eq!(v.as_tuple(), (1.0, 0.0, 0.0));
    }

    #[test]
    fn c1cosine_at_quarter_pi() {
        let v = LambdaProfile::C1Cosine.eval(FRAC_PI_4).unwrap();
        assert!(close(v.lambda, 0.5, 1e-15));
        assert!(close(v.dlambda, -1.0, 1e-15));
        assert!(close(v.ddlambda, 0.0, 1e-15));
    }

    #[test]
    fn c1cosine_one_sided_second_derivative_at_kink() {
        let p = LambdaProfile::C1Cosine;
        assert_eq!(p.eval_one_sided(0.0, Side::Left).unwrap().ddlambda, 0.0);
        assert_eq!(p.eval_one_sided(0.0, Side::Right).unwrap().ddlambda, -2.0);
        assert_eq!(p.eval(0.0).unwrap().dlambda, 0.0);
    }

    #[test]
    fn c1cosine_rejects_past_first_zero() {
        assert!(matches!(
            LambdaProfile::C1Cosine.eval(2.0),
            Err(GeoError::Domain { .. })
        ));
    }

    #[test]
    fn reflected_mirrors_inner_profile() {
        let eps = 0.1;
        let p = LambdaProfile::reflected(eps, LambdaProfile::C1Cosine).unwrap();
        let r = -eps - FRAC_PI_4;
        let v = p.eval(r).unwrap();
        assert!(close(v.lambda, 0.5, 1e-15));
        assert!(close(v.dlambda, 1.0, 1e-15));
        assert!(close(v.ddlambda, 0.0, 1e-15));

        // Finite-difference check of the mirrored derivative.
        let h = 1e-6;
        let fd = (p.eval(r + h).unwrap().lambda - p.eval(r - h).unwrap().lambda) / (2.0 * h);
        assert!(close(fd, v.dlambda, 1e-8), "fd {fd}");
        // The middle strip is flat.
        assert_eq!(p.eval(-0.05).unwrap().as_tuple(), (1.0, 0.0, 0.0));
    }

    #[test]
    fn smooth_profile_matches_cosine_near_zero_and_stays_below() {
        let p = LambdaProfile::smooth_default();
        let v = p.eval(0.01).unwrap();
        assert!(close(v.lambda, 0.01f64.cos().powi(2), 1e-12));
        for i in 1..=100 {
            let r = 1.2 * i as f64 / 100.0;
            let v = p.eval(r).unwrap();
            assert!(v.lambda < r.cos().powi(2));
            assert!(v.dlambda < 0.0);
        }
    }

    #[test]
    fn smooth_profile_derivatives_match_finite_differences() {
        let p = LambdaProfile::smooth_default();
        let zero = p.first_zero().unwrap();
        for &r in &[0.1, 0.4, 0.9, 1.19, 1.25, 1.3, zero - 0.02] {
            let h = 1e-5;
            let v = p.eval(r).unwrap();
            let lp = p.eval(r + h).unwrap();
            let lm = p.eval(r - h).unwrap();
            let d1 = (lp.lambda - lm.lambda) / (2.0 * h);
            let d2 = (lp.dlambda - lm.dlambda) / (2.0 * h);
            assert!(close(d1, v.dlambda, 1e-7), "r={r}: {d1} vs {}", v.dlambda);
            assert!(close(d2, v.ddlambda, 1e-5), "r={r}: {d2} vs {}", v.ddlambda);
        }
    }

    #[test]
    fn smooth_profile_first_zero_is_flat() {
        let p = LambdaProfile::smooth_default();
        let z = p.first_zero().unwrap();
        assert!(z > DEFAULT_R_FLAT && z < FRAC_PI_2);
        let v = p.eval(z).unwrap();
        assert!(v.lambda.abs() < 1e-14);
        assert!(v.dlambda.abs() < 1e-6);
        assert!(p.eval(z + 1e-3).is_err());
    }

    #[test]
    fn smooth_profile_rejects_bad_parameters() {
        assert!(LambdaProfile::smooth(0.05, 2.0).is_err());
        assert!(LambdaProfile::smooth(100.0, 1.2).is_err());
        assert!(LambdaProfile::reflected(-1.0, LambdaProfile::C1Cosine).is_err());
    }

    #[test]
    fn json_round_trip_and_defaults() {
        let p: LambdaProfile =
            serde_json::from_str(r#"{"kind":"reflected","epsilon":0.3,"inner":{"kind":"smooth"}}"#)
                .unwrap();
        assert_eq!(
            p,
            LambdaProfile::Reflected {
                epsilon: 0.3,
                inner: Box::new(LambdaProfile::smooth_default())
            }
        );
        let s = serde_json::to_string(&p).unwrap();
        let back: LambdaProfile = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<LambdaProfile>(r#"{"kind":"torus"}"#).is_err());
        let bare: LambdaProfile = serde_json::from_str(r#""c1cosine""#).unwrap();
        assert_eq!(bare, LambdaProfile::C1Cosine);
        assert!(serde_json::from_str::<LambdaProfile>(r#"{"kind":"reflected"}"#).is_err());
    }

    #[test]
    fn flat_region_detection() {
        let p = LambdaProfile::reflected(0.3, LambdaProfile::C1Cosine).unwrap();
        assert!(p.is_flat_at(-0.1));
        assert!(!p.is_flat_at(0.1));
        assert!(!p.is_flat_at(-0.4));
        assert!(LambdaProfile::Product.is_flat_at(PI));
    }
}
