//! CSV output. Every float is written with 17 significant digits so that
//! files round-trip exactly and identical runs give identical bytes.

use std::io::Write;

use crate::error::Result;
use crate::geodesics::{PeriodRow, Trajectory};
use crate::morse::IndexRow;
use crate::shooting::{AngleRow, DoubleContact, LeafSample};

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A row type with a fixed CSV header.
pub trait CsvRow {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

pub fn write_table<W: Write, R: CsvRow>(w: W, rows: &[R]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(R::HEADER)?;
    for row in rows {
        out.write_record(row.fields())?;
    }
    out.flush()?;
    Ok(())
}

/// Columns t, r, phi, rdot, phidot, clairaut_c; the last is empty unless
/// the profile is a product.
pub fn write_trajectory<W: Write>(w: W, traj: &Trajectory) -> Result<()> {
    let flat = traj.profile.is_product();
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t", "r", "phi", "rdot", "phidot", "clairaut_c"])?;
    for s in &traj.samples {
        let c = if flat {
            fmt_f64(s.clairaut())
        } else {
            String::new()
        };
        out.write_record([
            fmt_f64(s.t),
            fmt_f64(s.r),
            fmt_f64(s.phi),
            fmt_f64(s.rdot),
            fmt_f64(s.phidot),
            c,
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_events<W: Write>(w: W, traj: &Trajectory) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["kind", "t", "r", "phi"])?;
    for e in &traj.events {
        out.write_record([
            e.kind.name().to_string(),
            fmt_f64(e.t),
            fmt_f64(e.state.r),
            fmt_f64(e.state.phi),
        ])?;
    }
    out.flush()?;
    Ok(())
}

impl CsvRow for IndexRow {
    const HEADER: &'static [&'static str] = &["c", "period_r", "crossings", "index"];
    fn fields(&self) -> Vec<String> {
        vec![
            fmt_f64(self.c),
            fmt_f64(self.period_r),
            self.crossings.to_string(),
            self.index.to_string(),
        ]
    }
}

impl CsvRow for PeriodRow {
    const HEADER: &'static [&'static str] = &[
        "c",
        "period_quadrature",
        "period_measured",
        "bound",
        "below_bound",
    ];
    fn fields(&self) -> Vec<String> {
        vec![
            fmt_f64(self.c),
            fmt_f64(self.period_quadrature),
            fmt_f64(self.period_measured),
            fmt_f64(self.bound),
            self.below_bound.to_string(),
        ]
    }
}

impl CsvRow for AngleRow {
    const HEADER: &'static [&'static str] = &["r0", "phi0", "alpha", "angle", "bound", "bound_ok"];
    fn fields(&self) -> Vec<String> {
        vec![
            fmt_f64(self.r0),
            fmt_f64(self.phi0),
            fmt_f64(self.alpha),
            fmt_f64(self.angle),
            fmt_f64(self.bound),
            self.bound_ok.to_string(),
        ]
    }
}

impl CsvRow for DoubleContact {
    const HEADER: &'static [&'static str] = &[
        "r0",
        "epsilon",
        "phi0",
        "alpha",
        "residual",
        "periods_in_strip",
        "index_estimate",
    ];
    fn fields(&self) -> Vec<String> {
        vec![
            fmt_f64(self.r0),
            fmt_f64(self.epsilon),
            fmt_f64(self.phi0),
            fmt_f64(self.alpha),
            fmt_f64(self.residual),
            self.periods_in_strip.to_string(),
            self.index_estimate.to_string(),
        ]
    }
}

impl CsvRow for LeafSample {
    const HEADER: &'static [&'static str] = &["phi", "r", "r_leaf", "error"];
    fn fields(&self) -> Vec<String> {
        vec![
            fmt_f64(self.phi),
            fmt_f64(self.r),
            fmt_f64(self.r_leaf),
            fmt_f64(self.error),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesics::{integrate_t, GeodesicState};
    use crate::metrics::LambdaProfile;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, std::f64::consts::PI, -1e-300, 123456.789] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn trajectory_columns() {
        let s0 = GeodesicState::at_equator(0.5, 0.0, true).unwrap();
        let tr = integrate_t(&LambdaProfile::Product, s0, 1.0, 1e-10).unwrap();
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &tr).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,r,phi,rdot,phidot,clairaut_c");
        assert_eq!(lines.count(), tr.samples.len());

        let tr = integrate_t(&LambdaProfile::C1Cosine, s0, 0.5, 1e-10).unwrap();
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &tr).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(1).unwrap().ends_with(','));
    }

    #[test]
    fn index_table_header() {
        let rows = [IndexRow {
            c: 0.5,
            period_r: 1.0,
            crossings: 2,
            index: 1,
        }];
        let mut buf = Vec::new();
        write_table(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "c,period_r,crossings,index\n5.0000000000000000e-1,1.0000000000000000e0,2,1\n"
        );
    }
}
