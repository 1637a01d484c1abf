use std::f64::consts::{FRAC_PI_2, PI};

use super::trajectory::{Event, EventKind, Piece, Termination, Trajectory};
use super::{geodesic_rhs, phi_rhs, GeodesicState, PhiState};
use crate::error::{GeoError, Result};
use crate::metrics::{LambdaProfile, PHI_MIN};
use crate::ode::{segment_roots, DenseSegment, Dop853, StepOptions};

/// |dr/dφ| above which the angle chart hands over to the time chart.
pub const SLOPE_SWITCH: f64 = 50.0;
/// |dr/dφ| below which the time chart hands back, near the boundary only.
pub const SLOPE_RETURN: f64 = 25.0;
/// sin φ below which the time chart may hand over to the angle chart.
const BOUNDARY_BAND: f64 = 0.3;
/// |φ̇| below which an equator sign change is treated as tangential, and
/// |φ − π/2| below which a sign change of φ̇ is rounding noise.
const TRANSVERSAL_MIN: f64 = 1e-8;
const MAX_LEGS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    /// Absolute and relative local error tolerance.
    pub tol: f64,
    /// Bracket width for event bisection.
    pub event_tol: f64,
    /// Guard band half-width at φ ∈ {0, π}.
    pub phi_min: f64,
    /// Terminate at the first crossing of this radius.
    pub stop_at_r: Option<f64>,
    /// Accepted plus rejected steps per chart leg.
    pub max_steps: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            tol: 1e-10,
            event_tol: 1e-12,
            phi_min: PHI_MIN,
            stop_at_r: None,
            max_steps: 2_000_000,
        }
    }
}

impl IntegrateOptions {
    pub fn with_tol(tol: f64) -> Self {
        IntegrateOptions {
            tol,
            ..Default::default()
        }
    }

    pub fn stop_at(mut self, r: f64) -> Self {
        self.stop_at_r = Some(r);
        self
    }

    fn step_options(&self) -> StepOptions {
        StepOptions {
            rtol: self.tol,
            atol: self.tol,
            max_steps: self.max_steps,
            ..Default::default()
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.event_tol > 0.0 && self.phi_min >= 0.0) {
            return Err(GeoError::InvalidArgument(format!(
                "tolerances must be positive (tol {}, event_tol {}, phi_min {})",
                self.tol, self.event_tol, self.phi_min
            )));
        }
        Ok(())
    }
}

/// Initial condition in either chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Start {
    Time(GeodesicState),
    /// `dir` is the sign of φ̇, i.e. the direction in which φ advances.
    Angle {
        state: PhiState,
        t: f64,
        dir: f64,
    },
}

/// Integrate in the time chart from `s0` to `t_end`.
pub fn integrate_t(
    p: &LambdaProfile,
    s0: GeodesicState,
    t_end: f64,
    tol: f64,
) -> Result<Trajectory> {
    integrate_t_with(p, s0, t_end, &IntegrateOptions::with_tol(tol))
}

pub fn integrate_t_with(
    p: &LambdaProfile,
    s0: GeodesicState,
    t_end: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    if !(t_end > s0.t) {
        return Err(GeoError::InvalidArgument(format!(
            "t_end = {t_end} must exceed the start time {}",
            s0.t
        )));
    }
    run(p, Start::Time(s0), t_end, None, false, opts)
}

/// Integrate r(φ) over `phi_span` (which may run in either direction); t
/// is the accumulated ds-arc-length from `s0`. Fails with `SlopeBlowup`
/// when |dr/dφ| exceeds [`SLOPE_SWITCH`].
pub fn integrate_phi(
    p: &LambdaProfile,
    s0: PhiState,
    phi_span: (f64, f64),
    tol: f64,
) -> Result<Trajectory> {
    integrate_phi_with(p, s0, phi_span, &IntegrateOptions::with_tol(tol))
}

pub fn integrate_phi_with(
    p: &LambdaProfile,
    s0: PhiState,
    phi_span: (f64, f64),
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    let (a, b) = phi_span;
    if a != s0.phi {
        return Err(GeoError::InvalidArgument(format!(
            "phi span starts at {a} but the state is at {}",
            s0.phi
        )));
    }
    if a == b {
        return Err(GeoError::InvalidArgument("empty phi span".into()));
    }
    let dir = (b - a).signum();
    let end = b.clamp(opts.phi_min, PI - opts.phi_min);
    let start = Start::Angle {
        state: s0,
        t: 0.0,
        dir,
    };
    run(p, start, f64::INFINITY, Some(end), false, opts)
}

/// Integrate with automatic chart switching until `t_end`, a stop radius,
/// or the boundary guard band.
pub fn integrate_dual(
    p: &LambdaProfile,
    start: Start,
    t_end: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    run(p, start, t_end, None, true, opts)
}

enum Outcome {
    Finished,
    Terminated(Termination),
    Switch(Start),
}

#[derive(Clone, Copy)]
enum Cand {
    Event(EventKind),
    Stop,
    Boundary,
    Switch,
    End,
    Blowup,
}

struct Builder<'a> {
    p: &'a LambdaProfile,
    opts: IntegrateOptions,
    eps: Option<f64>,
    dual: bool,
    samples: Vec<GeodesicState>,
    events: Vec<Event>,
    pieces: Vec<Piece>,
}

fn run(
    p: &LambdaProfile,
    start: Start,
    t_end: f64,
    phi_end: Option<f64>,
    dual: bool,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    opts.check()?;
    p.check()?;
    let mut b = Builder {
        p,
        opts: *opts,
        eps: p.reflection_epsilon(),
        dual,
        samples: Vec::new(),
        events: Vec::new(),
        pieces: Vec::new(),
    };
    let mut cur = start;
    let first = match cur {
        Start::Time(s) => s,
        Start::Angle { state, t, dir } => state.to_geodesic(p, t, dir)?,
    };
    if dual {
        if let Start::Time(s) = cur {
            if s.phi.sin() < BOUNDARY_BAND && s.rdot.abs() < SLOPE_RETURN * s.phidot.abs() {
                cur = Start::Angle {
                    state: s.to_phi_state(),
                    t: s.t,
                    dir: s.phidot.signum(),
                };
            }
        }
    }
    b.samples.push(first);
    let clairaut_c = p.is_product().then(|| first.clairaut());

    let mut termination = Termination::EndReached;
    let mut legs = 0;
    loop {
        legs += 1;
        if legs > MAX_LEGS {
            return Err(GeoError::StepFailure {
                t: b.samples.last().map_or(0.0, |s| s.t),
                h: 0.0,
            });
        }
        let out = match cur {
            Start::Time(s) => b.time_leg(s, t_end)?,
            Start::Angle { state, t, dir } => {
                let lim = if dir > 0.0 {
                    PI - b.opts.phi_min
                } else {
                    b.opts.phi_min
                };
                b.angle_leg(state, t, dir, phi_end.unwrap_or(lim), t_end)?
            }
        };
        match out {
            Outcome::Finished => break,
            Outcome::Terminated(k) => {
                termination = k;
                break;
            }
            Outcome::Switch(next) => cur = next,
        }
    }
    b.events.sort_by(|x, y| x.t.total_cmp(&y.t));
    Ok(Trajectory {
        profile: p.clone(),
        samples: b.samples,
        events: b.events,
        clairaut_c,
        termination,
        pieces: b.pieces,
    })
}

impl Builder<'_> {
    fn push_sample(&mut self, s: GeodesicState) {
        if self.samples.last().is_none_or(|l| s.t > l.t) {
            self.samples.push(s);
        }
    }

    fn time_leg(&mut self, s0: GeodesicState, t_end: f64) -> Result<Outcome> {
        let p = self.p;
        let f = |_t: f64, y: &[f64; 4]| -> Result<[f64; 4]> {
            let s = GeodesicState {
                t: 0.0,
                r: y[0],
                phi: y[1],
                rdot: y[2],
                phidot: y[3],
            };
            let (a, b) = geodesic_rhs(p, &s)?;
            Ok([y[2], y[3], a, b])
        };
        let y0 = [s0.r, s0.phi, s0.rdot, s0.phidot];
        let mut solver = Dop853::new(f, s0.t, y0, t_end, self.opts.step_options())?;
        let etol = self.opts.event_tol;
        let phi_min = self.opts.phi_min;
        while let Some(seg) = solver.step()? {
            let mut cands: Vec<(f64, Cand)> = Vec::new();
            let at = |x: f64| state_t(&seg, x);
            for r in segment_roots(&seg, etol, |_, y| y[1] - FRAC_PI_2) {
                if at(r.x).phidot.abs() > TRANSVERSAL_MIN {
                    cands.push((r.x, Cand::Event(EventKind::EquatorCrossing)));
                }
            }
            for r in segment_roots(&seg, etol, |_, y| y[3]) {
                if (at(r.x).phi - FRAC_PI_2).abs() > TRANSVERSAL_MIN {
                    cands.push((r.x, Cand::Event(EventKind::TurningPoint)));
                }
            }
            for r in segment_roots(&seg, etol, |_, y| y[0]) {
                cands.push((r.x, Cand::Event(EventKind::MidlineZero)));
            }
            if let Some(e) = self.eps {
                for r in segment_roots(&seg, etol, |_, y| y[0] + e) {
                    cands.push((r.x, Cand::Event(EventKind::MidlineEpsilon)));
                }
            }
            if let Some(rs) = self.opts.stop_at_r {
                for r in segment_roots(&seg, etol, |_, y| y[0] - rs) {
                    cands.push((r.x, Cand::Stop));
                }
            }
            for r in segment_roots(&seg, etol, |_, y| y[1] - phi_min) {
                if !r.rising {
                    cands.push((r.x, Cand::Boundary));
                }
            }
            for r in segment_roots(&seg, etol, |_, y| (PI - phi_min) - y[1]) {
                if !r.rising {
                    cands.push((r.x, Cand::Boundary));
                }
            }
            if self.dual {
                let g = |_: f64, y: &[f64; 4]| {
                    (y[2].abs() - SLOPE_RETURN * y[3].abs()).max(y[1].sin() - BOUNDARY_BAND)
                };
                for r in segment_roots(&seg, etol, g) {
                    if !r.rising {
                        cands.push((r.x, Cand::Switch));
                    }
                }
            }

            let term = cands
                .iter()
                .filter(|c| !matches!(c.1, Cand::Event(_)))
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .copied();
            let x_end = term.map_or(seg.t1(), |c| c.0);
            for &(x, c) in &cands {
                if let Cand::Event(kind) = c {
                    if x <= x_end {
                        self.events.push(Event {
                            kind,
                            t: x,
                            state: at(x),
                        });
                    }
                }
            }
            let end_state = at(x_end);
            self.pieces.push(Piece::Time {
                t_lo: seg.t0,
                t_hi: x_end,
                seg,
            });
            self.push_sample(end_state);
            match term.map(|c| c.1) {
                None => {}
                Some(Cand::Stop) => return Ok(Outcome::Terminated(Termination::StopRadius)),
                Some(Cand::Boundary) => {
                    self.events.push(Event {
                        kind: EventKind::BoundaryContact,
                        t: x_end,
                        state: end_state,
                    });
                    return Ok(Outcome::Terminated(Termination::BoundaryContact));
                }
                Some(Cand::Switch) => {
                    return Ok(Outcome::Switch(Start::Angle {
                        state: end_state.to_phi_state(),
                        t: x_end,
                        dir: end_state.phidot.signum(),
                    }))
                }
                Some(_) => unreachable!("time chart has no other terminal events"),
            }
        }
        Ok(Outcome::Finished)
    }

    fn angle_leg(
        &mut self,
        s0: PhiState,
        t0: f64,
        dir: f64,
        phi_end: f64,
        t_end: f64,
    ) -> Result<Outcome> {
        if (phi_end - s0.phi) * dir <= 0.0 {
            return Err(GeoError::InvalidArgument(format!(
                "angle chart cannot advance from phi = {} towards {phi_end} with direction {dir}",
                s0.phi
            )));
        }
        let p = self.p;
        let f = |phi: f64, y: &[f64; 3]| -> Result<[f64; 3]> {
            let q = phi_rhs(p, phi, y[0], y[1])?;
            let l = p.eval(y[0])?.lambda;
            let sd = dir * phi.sin() * ((y[1] * y[1] + l) * l).sqrt();
            Ok([y[1], q, sd])
        };
        let y0 = [s0.r, s0.drdphi, t0];
        let mut solver = Dop853::new(f, s0.phi, y0, phi_end, self.opts.step_options())?;
        let etol = self.opts.event_tol;
        let to_state = |seg: &DenseSegment<3>, x: f64| -> Result<GeodesicState> {
            let y = seg.eval(x);
            PhiState {
                phi: x,
                r: y[0],
                drdphi: y[1],
            }
            .to_geodesic(p, y[2], dir)
        };
        while let Some(seg) = solver.step()? {
            let mut cands: Vec<(f64, Cand)> = Vec::new();
            for r in segment_roots(&seg, etol, |x, _| x - FRAC_PI_2) {
                cands.push((r.x, Cand::Event(EventKind::EquatorCrossing)));
            }
            for r in segment_roots(&seg, etol, |_, y| y[0]) {
                cands.push((r.x, Cand::Event(EventKind::MidlineZero)));
            }
            if let Some(e) = self.eps {
                for r in segment_roots(&seg, etol, |_, y| y[0] + e) {
                    cands.push((r.x, Cand::Event(EventKind::MidlineEpsilon)));
                }
            }
            if let Some(rs) = self.opts.stop_at_r {
                for r in segment_roots(&seg, etol, |_, y| y[0] - rs) {
                    cands.push((r.x, Cand::Stop));
                }
            }
            if t_end.is_finite() {
                for r in segment_roots(&seg, etol, |_, y| y[2] - t_end) {
                    cands.push((r.x, Cand::End));
                }
            }
            for r in segment_roots(&seg, etol, |_, y| y[1].abs() - SLOPE_SWITCH) {
                if r.rising {
                    cands.push((
                        r.x,
                        if self.dual {
                            Cand::Switch
                        } else {
                            Cand::Blowup
                        },
                    ));
                }
            }
            // Order along the direction of integration.
            let key = |x: f64| (x - seg.t0) * dir;
            let term = cands
                .iter()
                .filter(|c| !matches!(c.1, Cand::Event(_)))
                .min_by(|a, b| key(a.0).total_cmp(&key(b.0)))
                .copied();
            if let Some((x, Cand::Blowup)) = term {
                return Err(GeoError::SlopeBlowup {
                    phi: x,
                    slope: seg.eval(x)[1].abs(),
                });
            }
            let x_end = term.map_or(seg.t1(), |c| c.0);
            for &(x, c) in &cands {
                if let Cand::Event(kind) = c {
                    if key(x) <= key(x_end) {
                        let s = to_state(&seg, x)?;
                        self.events.push(Event {
                            kind,
                            t: s.t,
                            state: s,
                        });
                    }
                }
            }
            let mut end_state = to_state(&seg, x_end)?;
            if matches!(term, Some((_, Cand::End))) {
                end_state.t = t_end;
            }
            self.pieces.push(Piece::Angle {
                t_lo: seg.y0[2],
                t_hi: end_state.t,
                phi_end: x_end,
                dir,
                seg,
            });
            self.push_sample(end_state);
            match term.map(|c| c.1) {
                None => {}
                Some(Cand::Stop) => return Ok(Outcome::Terminated(Termination::StopRadius)),
                Some(Cand::End) => return Ok(Outcome::Finished),
                Some(Cand::Switch) => return Ok(Outcome::Switch(Start::Time(end_state))),
                Some(_) => unreachable!("angle chart has no other terminal events"),
            }
        }
        let last = *self.samples.last().expect("at least the start sample");
        let lo = self.opts.phi_min;
        let at_guard = phi_end <= lo || phi_end >= PI - lo;
        if at_guard {
            self.events.push(Event {
                kind: EventKind::BoundaryContact,
                t: last.t,
                state: last,
            });
            return Ok(Outcome::Terminated(Termination::BoundaryContact));
        }
        Ok(Outcome::Finished)
    }
}

fn state_t(seg: &DenseSegment<4>, t: f64) -> GeodesicState {
    let y = seg.eval(t);
    GeodesicState {
        t,
        r: y[0],
        phi: y[1],
        rdot: y[2],
        phidot: y[3],
    }
}
