use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI};

use geolab_core::geodesics::{
    closed_form_leaf, half_period_length, integrate_dual, integrate_phi, integrate_t,
    integrate_t_with, quarter_period, EventKind, IntegrateOptions, Start, Termination,
};
use geolab_core::{GeodesicState, LambdaProfile, PhiState};

const TOL: f64 = 1e-10;

/// r at the second descending equator crossing after an equator start.
fn measured_period(c: f64) -> (f64, f64) {
    let s0 = GeodesicState::at_equator(c, 0.0, true).unwrap();
    let tr = integrate_t(&LambdaProfile::Product, s0, 20.0, TOL).unwrap();
    let desc: Vec<_> = tr
        .events_of(EventKind::EquatorCrossing)
        .filter(|e| e.state.phidot < 0.0)
        .collect();
    (desc[0].state.r, desc[0].t)
}

#[test]
fn equator_geodesic_is_a_straight_line() {
    let s0 = GeodesicState::at_equator(1.0, 0.0, false).unwrap();
    let tr = integrate_t(&LambdaProfile::Product, s0, 5.0, TOL).unwrap();
    let end = tr.last_state();
    assert!((end.r - 5.0).abs() < 1e-10);
    assert!((end.phi - FRAC_PI_2).abs() < 1e-12);
    assert_eq!(tr.count(EventKind::TurningPoint), 0);
    assert_eq!(tr.equator_crossings(), 0);
    assert_eq!(tr.clairaut_c, Some(1.0));
}

#[test]
fn turning_point_start_conserves_clairaut() {
    let s0 = GeodesicState {
        t: 0.0,
        r: 0.0,
        phi: FRAC_PI_6,
        rdot: 2.0,
        phidot: 0.0,
    };
    let tr = integrate_t(&LambdaProfile::Product, s0, 12.0, TOL).unwrap();
    let rep = tr.conservation().unwrap();
    assert!(rep.max_clairaut_drift.unwrap() < 1e-9);
    assert!(rep.min_confinement.unwrap() > -1e-9);
    let min_sin = tr
        .samples
        .iter()
        .map(|s| s.phi.sin())
        .fold(f64::INFINITY, f64::min);
    assert!((min_sin - 0.5).abs() < 1e-6);
    // Turning points alternate between sin φ = 1/2 on either side of the equator.
    for e in tr.events_of(EventKind::TurningPoint) {
        assert!((e.state.phi.sin() - 0.5).abs() < 1e-9);
    }
}

#[test]
fn full_period_matches_quadrature() {
    for &c in &[0.5, 0.2, 0.1, 0.05, 0.01] {
        let (r, _) = measured_period(c);
        let q = quarter_period(c).unwrap();
        assert!((r - 4.0 * q).abs() < 1e-6, "c={c}: {r} vs {}", 4.0 * q);
    }
}

#[test]
fn half_period_length_matches_arc_length() {
    let c = 0.5;
    let s0 = GeodesicState::at_equator(c, 0.0, true).unwrap();
    let tr = integrate_t(&LambdaProfile::Product, s0, 10.0, TOL).unwrap();
    let first = tr.events_of(EventKind::EquatorCrossing).next().unwrap();
    assert!((first.t - half_period_length(c).unwrap()).abs() < 1e-6);
}

#[test]
fn quarter_period_matches_ode_at_small_c() {
    let c = 0.01;
    let s0 = GeodesicState::at_equator(c, 0.0, true).unwrap();
    let tr = integrate_t(&LambdaProfile::Product, s0, 3.0, TOL).unwrap();
    let tp = tr.events_of(EventKind::TurningPoint).next().unwrap();
    assert!((tp.state.r - quarter_period(c).unwrap()).abs() < 1e-6);
}

#[test]
fn periodicity_after_one_period() {
    let c = 0.3;
    let s0 = GeodesicState::at_equator(c, 0.0, true).unwrap();
    let tr = integrate_t(&LambdaProfile::Product, s0, 20.0, TOL).unwrap();
    let (_, t_period) = {
        let d: Vec<_> = tr
            .events_of(EventKind::EquatorCrossing)
            .filter(|e| e.state.phidot < 0.0)
            .collect();
        (d[0].state.r, d[0].t)
    };
    for k in 0..20 {
        let t = 0.3 * k as f64;
        let a = tr.state_at(t).unwrap();
        let b = tr.state_at(t + t_period).unwrap();
        assert!((a.phi - b.phi).abs() < 1e-9);
        assert!((a.rdot - b.rdot).abs() < 1e-9);
        assert!((a.phidot - b.phidot).abs() < 1e-9);
    }
}

#[test]
fn leaf_oracle_from_focal_point() {
    for &k in &[FRAC_PI_6, FRAC_PI_4, FRAC_PI_3] {
        let (phi, slope) = closed_form_leaf(k, 0.0).unwrap();
        let s0 = PhiState {
            phi,
            r: 0.0,
            drdphi: slope,
        };
        let tr = integrate_phi(&LambdaProfile::C1Cosine, s0, (FRAC_PI_2, 0.2), TOL).unwrap();
        let mut worst = 0.0f64;
        for s in tr.resample(400).unwrap() {
            let want = (k.tan() * s.phi.cos()).atan();
            worst = worst.max((s.r - want).abs());
        }
        assert!(worst < 1e-8, "kappa={k}: {worst}");
    }
}

#[test]
fn leaf_reaches_boundary_at_kappa() {
    let k = FRAC_PI_6;
    let (phi, slope) = closed_form_leaf(k, 0.0).unwrap();
    let s0 = PhiState {
        phi,
        r: 0.0,
        drdphi: slope,
    };
    let tr = integrate_phi(&LambdaProfile::C1Cosine, s0, (FRAC_PI_2, 0.0), TOL).unwrap();
    assert_eq!(tr.termination, Termination::BoundaryContact);
    assert!((tr.last_state().r - k).abs() < 1e-9);
}

#[test]
fn vertical_product_geodesic() {
    let s0 = PhiState {
        phi: FRAC_PI_2,
        r: 0.0,
        drdphi: 0.0,
    };
    let tr = integrate_phi(&LambdaProfile::Product, s0, (FRAC_PI_2, 0.1), TOL).unwrap();
    assert!(tr.samples.iter().all(|s| s.r == 0.0));
}

#[test]
fn slope_blowup_is_reported() {
    // A product geodesic with c = 0.5 turns at φ = π/6, where dr/dφ → ∞.
    let s0 = GeodesicState::at_equator(0.5, 0.0, true).unwrap();
    let err = integrate_phi(
        &LambdaProfile::Product,
        s0.to_phi_state(),
        (FRAC_PI_2, 0.1),
        TOL,
    );
    assert!(matches!(
        err,
        Err(geolab_core::GeoError::SlopeBlowup { .. })
    ));
}

#[test]
fn time_and_angle_charts_agree() {
    // A smooth-profile segment without turning points, started at the same point.
    let p = LambdaProfile::smooth_default();
    let s0 = PhiState {
        phi: 1.3,
        r: 0.4,
        drdphi: -0.3,
    };
    let a = integrate_phi(&p, s0, (1.3, 0.3), TOL).unwrap();
    let g0 = s0.to_geodesic(&p, 0.0, -1.0).unwrap();
    let b = integrate_t(&p, g0, a.t_end(), TOL).unwrap();
    let mut worst = 0.0f64;
    for s in a.resample(300).unwrap() {
        let q = b.state_at(s.t).unwrap();
        worst = worst.max((s.r - q.r).hypot(s.phi - q.phi));
    }
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn dual_chart_passes_turning_points_near_boundary() {
    let c = 0.02;
    let p = LambdaProfile::Product;
    let s0 = GeodesicState::at_equator(c, 0.0, true).unwrap();
    let dual = integrate_dual(&p, Start::Time(s0), 6.0, &IntegrateOptions::with_tol(TOL)).unwrap();
    let plain = integrate_t(&p, s0, 6.0, TOL).unwrap();
    assert!(dual.pieces().iter().any(|x| x.is_angle()));
    assert_eq!(
        dual.count(EventKind::TurningPoint),
        plain.count(EventKind::TurningPoint)
    );
    for k in 0..=60 {
        let t = 0.1 * k as f64;
        let (x, y) = (dual.state_at(t).unwrap(), plain.state_at(t).unwrap());
        assert!(
            (x.r - y.r).abs() < 1e-7 && (x.phi - y.phi).abs() < 1e-7,
            "t={t}"
        );
    }
    let rep = dual.conservation().unwrap();
    assert!(rep.max_speed_error < 1e-9);
}

#[test]
fn ten_periods_conservation() {
    for &c in &[0.5, 0.1] {
        let s0 = GeodesicState::at_equator(c, 0.0, true).unwrap();
        let t_end = 10.0 * 2.0 * half_period_length(c).unwrap() + 0.1;
        let tr = integrate_t(&LambdaProfile::Product, s0, t_end, TOL).unwrap();
        assert!(tr.equator_crossings() >= 20);
        let rep = tr.conservation().unwrap();
        assert!(rep.max_speed_error < 1e-8, "c={c}: {}", rep.max_speed_error);
        assert!(rep.max_clairaut_drift.unwrap() < 1e-8);
        assert!(rep.min_confinement.unwrap() > -1e-8);
    }
}

#[test]
fn stop_radius_and_midline_events() {
    let p = LambdaProfile::reflected(0.3, LambdaProfile::C1Cosine).unwrap();
    let s0 = GeodesicState::normalized(&p, 0.0, 0.2, 1.2, -1.0, 0.1).unwrap();
    let opts = IntegrateOptions::with_tol(TOL).stop_at(-0.3);
    let tr = integrate_t_with(&p, s0, 50.0, &opts).unwrap();
    assert_eq!(tr.termination, Termination::StopRadius);
    assert!((tr.last_state().r + 0.3).abs() < 1e-11);
    assert_eq!(tr.count(EventKind::MidlineZero), 1);
    assert_eq!(tr.count(EventKind::MidlineEpsilon), 1);
    assert!(tr.events.windows(2).all(|w| w[0].t <= w[1].t));
}

#[test]
fn guard_band_stops_vertical_geodesic() {
    let s0 = GeodesicState::normalized(&LambdaProfile::Product, 0.0, 0.0, 1.0, 0.0, -1.0).unwrap();
    let tr = integrate_t(&LambdaProfile::Product, s0, 5.0, TOL).unwrap();
    assert_eq!(tr.termination, Termination::BoundaryContact);
    assert_eq!(tr.count(EventKind::BoundaryContact), 1);
    assert!((tr.last_state().phi - 1e-6).abs() < 1e-9);
    let _ = PI;
}
