//! Minimal SVG rendering of curves in the strip, with a fixed view box
//! r ∈ [−2, 2], φ ∈ [0, π] and φ increasing upwards.

use std::f64::consts::PI;
use std::fmt::Write;

use crate::geodesics::{closed_form_leaf, GeodesicState};

const SCALE: f64 = 200.0;
const R_MIN: f64 = -2.0;
const R_MAX: f64 = 2.0;
const LEAF_POINTS: usize = 120;

fn x(r: f64) -> f64 {
    (r - R_MIN) * SCALE
}

fn y(phi: f64) -> f64 {
    (PI - phi) * SCALE
}

#[derive(Debug, Clone, Default)]
pub struct Plot {
    leaves: Vec<Vec<(f64, f64)>>,
    curves: Vec<(String, Vec<(f64, f64)>)>,
    markers: Vec<(f64, f64)>,
    guides: Vec<f64>,
}

impl Plot {
    pub fn new() -> Self {
        Self::default()
    }

    /// Leaves cos φ = tan r / tan κ on r ∈ [0, κ].
    pub fn leaves(mut self, kappas: &[f64]) -> Self {
        for &k in kappas {
            let pts: Vec<_> = (0..=LEAF_POINTS)
                .filter_map(|i| {
                    let r = k * i as f64 / LEAF_POINTS as f64;
                    closed_form_leaf(k, r).ok().map(|(phi, _)| (r, phi))
                })
                .collect();
            self.leaves.push(pts);
        }
        self
    }

    pub fn curve(mut self, class: &str, points: Vec<(f64, f64)>) -> Self {
        self.curves.push((class.to_string(), points));
        self
    }

    pub fn states(self, class: &str, states: &[GeodesicState]) -> Self {
        let pts = states.iter().map(|s| (s.r, s.phi)).collect();
        self.curve(class, pts)
    }

    pub fn marker(mut self, r: f64, phi: f64) -> Self {
        self.markers.push((r, phi));
        self
    }

    /// Vertical guide line at constant r.
    pub fn guide(mut self, r: f64) -> Self {
        self.guides.push(r);
        self
    }

    pub fn render(&self) -> String {
        let (w, h) = (x(R_MAX), y(0.0));
        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(s, "<!-- geolab {} -->", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w:.3} {h:.3}" width="{w:.0}" height="{h:.0}">"#
        );
        let _ = writeln!(
            s,
            r#"<rect x="0" y="0" width="{w:.3}" height="{h:.3}" fill="white" stroke="black"/>"#
        );
        for &r in std::iter::once(&0.0).chain(&self.guides) {
            let _ = writeln!(
                s,
                r##"<line class="guide" x1="{0:.3}" y1="0" x2="{0:.3}" y2="{h:.3}" stroke="#999" stroke-dasharray="4 4"/>"##,
                x(r)
            );
        }
        for leaf in &self.leaves {
            polyline(&mut s, "leaf", "#9bb", leaf);
        }
        for (class, pts) in &self.curves {
            polyline(&mut s, class, "#c22", pts);
        }
        for &(r, phi) in &self.markers {
            let _ = writeln!(
                s,
                r#"<circle class="contact" cx="{:.3}" cy="{:.3}" r="4" fill="black"/>"#,
                x(r),
                y(phi)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn polyline(s: &mut String, class: &str, stroke: &str, pts: &[(f64, f64)]) {
    if pts.len() < 2 {
        return;
    }
    let _ = write!(
        s,
        r#"<polyline class="{class}" fill="none" stroke="{stroke}" points=""#
    );
    for (i, &(r, phi)) in pts.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{:.3},{:.3}", x(r), y(phi));
    }
    s.push_str("\"/>\n");
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_view_box_and_mapping() {
        let svg = Plot::new().render();
        assert!(svg.contains(r#"viewBox="0 0 800.000 628.319""#));
        assert_eq!(x(0.0), 400.0);
        assert_eq!(y(PI), 0.0);
    }

    #[test]
    fn deterministic_apart_from_version_line() {
        let build = || {
            Plot::new()
                .leaves(&[0.5, 1.0])
                .curve("geodesic", vec![(0.0, 1.0), (0.5, 0.5)])
                .marker(0.5, 0.0)
                .render()
        };
        assert_eq!(build(), build());
        let svg = build();
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert_eq!(svg.matches("<circle").count(), 1);
    }
}
