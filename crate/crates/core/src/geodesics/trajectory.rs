use serde::{Deserialize, Serialize};

use super::{GeodesicState, PhiState};
use crate::error::{GeoError, Result};
use crate::metrics::LambdaProfile;
use crate::ode::{DenseSegment, EVENT_SUBSTEPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// Transversal crossing of φ = π/2.
    EquatorCrossing,
    /// φ̇ = 0.
    TurningPoint,
    /// r = 0.
    MidlineZero,
    /// r = −ε of a reflected profile.
    MidlineEpsilon,
    /// Entry into the boundary guard band.
    BoundaryContact,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::EquatorCrossing => "equator_crossing",
            EventKind::TurningPoint => "turning_point",
            EventKind::MidlineZero => "midline_zero",
            EventKind::MidlineEpsilon => "midline_epsilon",
            EventKind::BoundaryContact => "boundary_contact",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    pub t: f64,
    pub state: GeodesicState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Ran to the requested end of the parameter range.
    EndReached,
    /// Stopped at the requested radius.
    StopRadius,
    /// Entered the boundary guard band.
    BoundaryContact,
}

/// One accepted integrator step with its continuous extension.
#[derive(Debug, Clone, PartialEq)]
pub enum Piece {
    /// Time chart, state (r, φ, ṙ, φ̇) over t.
    Time {
        seg: DenseSegment<4>,
        t_lo: f64,
        t_hi: f64,
    },
    /// Angle chart, state (r, dr/dφ, t) over φ; `dir` is the sign of φ̇.
    Angle {
        seg: DenseSegment<3>,
        dir: f64,
        phi_end: f64,
        t_lo: f64,
        t_hi: f64,
    },
}

impl Piece {
    pub fn t_range(&self) -> (f64, f64) {
        match self {
            Piece::Time { t_lo, t_hi, .. } | Piece::Angle { t_lo, t_hi, .. } => (*t_lo, *t_hi),
        }
    }

    pub fn is_angle(&self) -> bool {
        matches!(self, Piece::Angle { .. })
    }

    fn state_at(&self, p: &LambdaProfile, t: f64) -> Result<GeodesicState> {
        match self {
            Piece::Time { seg, .. } => {
                let y = seg.eval(t);
                Ok(GeodesicState {
                    t,
                    r: y[0],
                    phi: y[1],
                    rdot: y[2],
                    phidot: y[3],
                })
            }
            Piece::Angle {
                seg,
                dir,
                phi_end,
                t_lo,
                t_hi,
            } => {
                let phi = solve_angle(p, seg, *dir, *phi_end, *t_lo, *t_hi, t);
                let y = seg.eval(phi);
                PhiState {
                    phi,
                    r: y[0],
                    drdphi: y[1],
                }
                .to_geodesic(p, t, *dir)
            }
        }
    }
}

/// φ with t(φ) = `t` on an angle piece, by safeguarded Newton iteration.
fn solve_angle(
    p: &LambdaProfile,
    seg: &DenseSegment<3>,
    dir: f64,
    phi_end: f64,
    t_lo: f64,
    t_hi: f64,
    t: f64,
) -> f64 {
    if t <= t_lo {
        return seg.t0;
    }
    if t >= t_hi {
        return phi_end;
    }
    let (mut a, mut b) = (seg.t0, phi_end);
    let mut x = a + (b - a) * (t - t_lo) / (t_hi - t_lo);
    for _ in 0..100 {
        let y = seg.eval(x);
        let f = y[2] - t;
        if f == 0.0 {
            return x;
        }
        if f < 0.0 {
            a = x;
        } else {
            b = x;
        }
        let slope = p
            .eval(y[0])
            .map(|v| dir * x.sin() * ((y[1] * y[1] + v.lambda) * v.lambda).sqrt())
            .unwrap_or(f64::NAN);
        let (lo, hi) = (a.min(b), a.max(b));
        let mut xn = x - f / slope;
        if !(xn > lo && xn < hi) {
            xn = 0.5 * (a + b);
        }
        if (xn - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) || hi - lo <= f64::EPSILON {
            return xn;
        }
        x = xn;
    }
    x
}

/// Conservation diagnostics over the stored samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConservationReport {
    /// max |(ṙ² + λφ̇²) λ sin²φ − 1|.
    pub max_speed_error: f64,
    /// max |ṙ sin²φ − c| within each maximal run of samples in the product
    /// region, c being the run's first value.
    pub max_clairaut_drift: Option<f64>,
    /// min (sin φ − |c|) over the same runs.
    pub min_confinement: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub profile: LambdaProfile,
    /// States at accepted step ends, strictly increasing in t.
    pub samples: Vec<GeodesicState>,
    /// Sorted by t.
    pub events: Vec<Event>,
    /// Clairaut constant when the whole profile is a product.
    pub clairaut_c: Option<f64>,
    pub termination: Termination,
    pub(crate) pieces: Vec<Piece>,
}

impl Trajectory {
    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn t_start(&self) -> f64 {
        self.samples[0].t
    }

    pub fn t_end(&self) -> f64 {
        self.samples[self.samples.len() - 1].t
    }

    pub fn first_state(&self) -> GeodesicState {
        self.samples[0]
    }

    pub fn last_state(&self) -> GeodesicState {
        self.samples[self.samples.len() - 1]
    }

    /// Continuous state at `t` from the dense output.
    pub fn state_at(&self, t: f64) -> Result<GeodesicState> {
        let (a, b) = (self.t_start(), self.t_end());
        if !(t >= a && t <= b) {
            return Err(GeoError::domain(
                "trajectory time",
                t,
                format!("[{a}, {b}]"),
            ));
        }
        if self.pieces.is_empty() {
            return Ok(self.samples[0]);
        }
        let i = self
            .pieces
            .partition_point(|p| p.t_range().1 < t)
            .min(self.pieces.len() - 1);
        self.pieces[i].state_at(&self.profile, t)
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    pub fn equator_crossings(&self) -> usize {
        self.count(EventKind::EquatorCrossing)
    }

    /// Zeros of g along the whole trajectory, located by sign change on
    /// [`EVENT_SUBSTEPS`] substeps per piece and bisection in t.
    pub fn crossings(
        &self,
        mut g: impl FnMut(&GeodesicState) -> f64,
        tol: f64,
    ) -> Result<Vec<GeodesicState>> {
        let mut out = Vec::new();
        for piece in &self.pieces {
            let (lo, hi) = piece.t_range();
            if hi <= lo {
                continue;
            }
            let mut ta = lo;
            let mut ga = g(&piece.state_at(&self.profile, lo)?);
            for j in 1..=EVENT_SUBSTEPS {
                let tb = if j == EVENT_SUBSTEPS {
                    hi
                } else {
                    lo + (hi - lo) * j as f64 / EVENT_SUBSTEPS as f64
                };
                let gb = g(&piece.state_at(&self.profile, tb)?);
                if ga != 0.0 && gb != 0.0 && ga.signum() != gb.signum() {
                    let (mut a, mut b, mut fa) = (ta, tb, ga);
                    while b - a > tol {
                        let m = 0.5 * (a + b);
                        if m <= a || m >= b {
                            break;
                        }
                        let fm = g(&piece.state_at(&self.profile, m)?);
                        if fm == 0.0 {
                            a = m;
                            b = m;
                            break;
                        }
                        if fm.signum() == fa.signum() {
                            a = m;
                            fa = fm;
                        } else {
                            b = m;
                        }
                    }
                    out.push(piece.state_at(&self.profile, 0.5 * (a + b))?);
                }
                ta = tb;
                ga = gb;
            }
        }
        Ok(out)
    }

    /// `n` + 1 states evenly spaced in t.
    pub fn resample(&self, n: usize) -> Result<Vec<GeodesicState>> {
        let (a, b) = (self.t_start(), self.t_end());
        let n = n.max(1);
        (0..=n)
            .map(|i| {
                let t = if i == n {
                    b
                } else {
                    a + (b - a) * i as f64 / n as f64
                };
                self.state_at(t)
            })
            .collect()
    }

    pub fn phi_states(&self) -> Vec<PhiState> {
        self.samples.iter().map(|s| s.to_phi_state()).collect()
    }

    pub fn conservation(&self) -> Result<ConservationReport> {
        let mut max_speed = 0.0f64;
        let mut drift: Option<f64> = None;
        let mut conf: Option<f64> = None;
        let mut run_c: Option<f64> = None;
        for s in &self.samples {
            max_speed = max_speed.max((s.speed_sq(&self.profile)? - 1.0).abs());
            if self.profile.is_flat_at(s.r) {
                let c = *run_c.get_or_insert(s.clairaut());
                let d = (s.clairaut() - c).abs();
                drift = Some(drift.map_or(d, |m| m.max(d)));
                let m = s.phi.sin() - c.abs();
                conf = Some(conf.map_or(m, |x| x.min(m)));
            } else {
                run_c = None;
            }
        }
        Ok(ConservationReport {
            max_speed_error: max_speed,
            max_clairaut_drift: drift,
            min_confinement: conf,
        })
    }
}
