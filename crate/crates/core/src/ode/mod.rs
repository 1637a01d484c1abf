//! Explicit ODE integration with dense output and event location.

mod dop853;

pub use dop853::{DenseSegment, Dop853, StepOptions};

/// Substeps per accepted step used when scanning for sign changes.
pub const EVENT_SUBSTEPS: usize = 8;

/// A located sign change of an event function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    /// The function goes from negative to positive (in the direction of
    /// integration).
    pub rising: bool,
}

/// Locate the zeros of `g` along one dense segment.
///
/// The segment is split into [`EVENT_SUBSTEPS`] pieces; a root is reported in
/// every piece with a strict sign change of nonzero values, refined by
/// bisection until the bracket is shorter than `tol`. Roots are returned in
/// the order of integration.
pub fn segment_roots<const N: usize>(
    seg: &DenseSegment<N>,
    tol: f64,
    mut g: impl FnMut(f64, &[f64; N]) -> f64,
) -> Vec<Root> {
    let mut out = Vec::new();
    let mut ta = seg.t0;
    let mut ga = g(ta, &seg.y0);
    for j in 1..=EVENT_SUBSTEPS {
        let tb = if j == EVENT_SUBSTEPS {
            seg.t1()
        } else {
            seg.t0 + seg.h * j as f64 / EVENT_SUBSTEPS as f64
        };
        let yb = if j == EVENT_SUBSTEPS {
            seg.y1
        } else {
            seg.eval(tb)
        };
        let gb = g(tb, &yb);
        if ga != 0.0 && gb != 0.0 && ga.signum() != gb.signum() {
            out.push(Root {
                x: bisect(seg, ta, tb, ga, tol, &mut g),
                rising: gb > 0.0,
            });
        }
        ta = tb;
        ga = gb;
    }
    out
}

fn bisect<const N: usize>(
    seg: &DenseSegment<N>,
    mut a: f64,
    mut b: f64,
    mut ga: f64,
    tol: f64,
    g: &mut impl FnMut(f64, &[f64; N]) -> f64,
) -> f64 {
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let gm = g(m, &seg.eval(m));
        if gm == 0.0 {
            return m;
        }
        if gm.signum() == ga.signum() {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Scalar bisection for a continuous `f` with f(a)·f(b) < 0.
pub fn bisect_scalar(
    mut f: impl FnMut(f64) -> f64,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Option<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return None;
    }
    for _ in 0..300 {
        if (b - a).abs() <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Some(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}
