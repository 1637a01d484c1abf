use std::f64::consts::FRAC_PI_2;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use anyhow::{anyhow, Context};
use serde::Serialize;
use serde_json::json;

use geolab_core::acceptance;
use geolab_core::export::{fmt_f64, write_table, write_trajectory, CsvRow};
use geolab_core::geodesics::{integrate_dual, period_table, IntegrateOptions, Start, Termination};
use geolab_core::morse::index_growth_table;
use geolab_core::plot::Plot;
use geolab_core::shooting::{
    continue_shot, crossing_angle_curve, find_double_contacts, leaf_deviation, shoot_from_boundary,
    PHI_START,
};
use geolab_core::{ricci_diagonal, validate_profile, GeodesicState, LambdaProfile};

use crate::config::{Command, RunConfig};

/// What a command found; `ok` is false when an output violates an invariant.
pub struct Outcome {
    pub ok: bool,
    pub lines: Vec<String>,
}

impl Outcome {
    fn new(ok: bool, lines: Vec<String>) -> Self {
        Outcome { ok, lines }
    }
}

const CONSERVATION_TOL: f64 = 1e-8;
const LEAF_TOL: f64 = 1e-5;
const SVG_SAMPLES: usize = 2000;
const LEAF_GRID: [f64; 6] = [0.2, 0.4, 0.6, 0.8, 1.0, 1.2];

pub fn run(cfg: &RunConfig, cmd: Command) -> anyhow::Result<Outcome> {
    match cmd {
        Command::Trace => trace(cfg),
        Command::PeriodTable => periods(cfg),
        Command::IndexTable => index(cfg),
        Command::Shoot => shoot(cfg),
        Command::FindDouble => find_double(cfg),
        Command::RicciCheck => ricci(cfg),
        Command::ValidateProfile => validate(cfg),
        Command::OracleC1 => oracle_c1(cfg),
        Command::Accept => accept(cfg),
    }
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn emit_json<T: Serialize>(cfg: &RunConfig, value: &T) -> anyhow::Result<()> {
    if let Some(p) = &cfg.outputs.json_path {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn emit_table<R: CsvRow>(cfg: &RunConfig, rows: &[R]) -> anyhow::Result<()> {
    if let Some(p) = &cfg.outputs.csv_path {
        write_table(create(p)?, rows).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn emit_svg(cfg: &RunConfig, plot: &Plot) -> anyhow::Result<()> {
    if let Some(p) = &cfg.outputs.svg_path {
        std::fs::write(p, plot.render()).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn profile_or(cfg: &RunConfig, default: LambdaProfile) -> LambdaProfile {
    cfg.profile.clone().unwrap_or(default)
}

fn trace(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let p = profile_or(cfg, LambdaProfile::Product);
    let s0 = match cfg.start {
        Some(s) => GeodesicState::normalized(&p, 0.0, s.r, s.phi, s.dr, s.dphi)?,
        None => {
            let c = cfg
                .c_list
                .as_ref()
                .and_then(|l| l.first().copied())
                .unwrap_or(0.5);
            GeodesicState::at_equator(c, 0.0, true)?
        }
    };
    let t_end = cfg.t_end.unwrap_or(20.0);
    let mut opts = IntegrateOptions::with_tol(cfg.tolerances.ode_tol);
    opts.event_tol = cfg.tolerances.event_tol;
    let tr = integrate_dual(&p, Start::Time(s0), t_end, &opts)?;
    let rep = tr.conservation()?;

    if let Some(path) = &cfg.outputs.csv_path {
        write_trajectory(create(path)?, &tr)?;
    }
    let states = tr.resample(SVG_SAMPLES)?;
    emit_svg(cfg, &Plot::new().states("geodesic", &states))?;
    let events: Vec<_> = tr
        .events
        .iter()
        .map(|e| json!({"kind": e.kind.name(), "t": e.t, "r": e.state.r, "phi": e.state.phi}))
        .collect();
    emit_json(
        cfg,
        &json!({
            "profile": p,
            "start": s0,
            "t_end": tr.t_end(),
            "termination": format!("{:?}", tr.termination),
            "clairaut_c": tr.clairaut_c,
            "samples": tr.samples.len(),
            "conservation": rep,
            "events": events,
        }),
    )?;

    let mut ok = rep.max_speed_error <= CONSERVATION_TOL;
    if let Some(d) = rep.max_clairaut_drift {
        ok &= d <= CONSERVATION_TOL;
    }
    if let Some(m) = rep.min_confinement {
        ok &= m >= -CONSERVATION_TOL;
    }
    let end = tr.last_state();
    Ok(Outcome::new(
        ok,
        vec![
            format!(
                "trace: t = {} r = {} phi = {} ({:?})",
                fmt_f64(end.t),
                fmt_f64(end.r),
                fmt_f64(end.phi),
                tr.termination
            ),
            format!(
                "events: {}; max speed error {:.2e}",
                tr.events.len(),
                rep.max_speed_error
            ),
        ],
    ))
}

fn periods(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    if !cfg.profile.as_ref().is_none_or(LambdaProfile::is_product) {
        return Err(anyhow!("period-table is defined for the product profile"));
    }
    let c_list = cfg
        .c_list
        .clone()
        .unwrap_or_else(|| vec![0.5, 0.2, 0.1, 0.05, 0.01]);
    let rows = period_table(&c_list, cfg.tolerances.ode_tol)?;
    emit_table(cfg, &rows)?;
    emit_json(cfg, &rows)?;
    let ok = rows.iter().all(|r| r.below_bound);
    let lines = rows
        .iter()
        .map(|r| {
            format!(
                "c = {}: period {} (quadrature {}), bound {}",
                r.c,
                fmt_f64(r.period_measured),
                fmt_f64(r.period_quadrature),
                fmt_f64(r.bound)
            )
        })
        .collect();
    Ok(Outcome::new(ok, lines))
}

fn index(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let c_list = cfg
        .c_list
        .clone()
        .unwrap_or_else(|| vec![0.5, 0.1, 0.02, 0.005]);
    let rows = index_growth_table(&c_list, cfg.r_window.unwrap_or(5.0), cfg.tolerances.ode_tol)?;
    emit_table(cfg, &rows)?;
    emit_json(cfg, &rows)?;
    let ok = rows.iter().all(|r| r.index >= r.crossings / 2);
    let lines = rows
        .iter()
        .map(|r| format!("c = {}: crossings {}, index {}", r.c, r.crossings, r.index))
        .collect();
    Ok(Outcome::new(ok, lines))
}

fn shoot(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let p = profile_or(cfg, LambdaProfile::smooth_default());
    let tol = cfg.tolerances.ode_tol;
    let r0s: Vec<f64> = match (&cfg.r0_list, cfg.r0) {
        (Some(l), _) => l.clone(),
        (None, Some(r)) => vec![r],
        (None, None) => return Err(anyhow!("shoot requires r0")),
    };
    if r0s.len() > 1 {
        let rows = crossing_angle_curve(&p, &r0s, PHI_START, tol)?;
        emit_table(cfg, &rows)?;
        emit_json(cfg, &rows)?;
        let ok = rows.iter().all(|r| r.bound_ok);
        let lines = rows
            .iter()
            .map(|r| {
                format!(
                    "r0 = {}: phi0 = {}, alpha = {}",
                    r.r0,
                    fmt_f64(r.phi0),
                    fmt_f64(r.alpha)
                )
            })
            .collect();
        return Ok(Outcome::new(ok, lines));
    }
    let s = shoot_from_boundary(&p, r0s[0], PHI_START, tol)?;
    if let Some(path) = &cfg.outputs.csv_path {
        write_trajectory(create(path)?, &s.trajectory)?;
    }
    let plot = Plot::new()
        .leaves(&LEAF_GRID)
        .states("geodesic", &s.trajectory.resample(SVG_SAMPLES)?)
        .marker(s.r0, 0.0);
    emit_svg(cfg, &plot)?;
    emit_json(cfg, &s)?;
    let c = s.certificates;
    let ok = c.barrier_ok
        && c.monotone_ok
        && c.second_deriv_ok
        && c.convex_near_boundary_ok
        && s.crossing.alpha < 0.0;
    Ok(Outcome::new(
        ok,
        vec![
            format!(
                "shoot r0 = {}: phi0 = {}, alpha = {}",
                s.r0,
                fmt_f64(s.crossing.phi0),
                fmt_f64(s.crossing.alpha)
            ),
            format!("certificates: {c:?}"),
        ],
    ))
}

fn find_double(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let eps = cfg.epsilon.unwrap_or(0.3);
    let p = match &cfg.profile {
        Some(p) => p.clone(),
        None => LambdaProfile::reflected(eps, LambdaProfile::smooth_default())?,
    };
    let tol = cfg.tolerances.ode_tol;
    let bracket = cfg.r0_bracket.unwrap_or((1e-3, 0.3));
    let roots = find_double_contacts(&p, eps, bracket, cfg.n_targets.unwrap_or(3), tol)?;
    emit_table(cfg, &roots)?;
    emit_json(cfg, &roots)?;
    if cfg.outputs.svg_path.is_some() {
        let mut plot = Plot::new().guide(-eps);
        for d in &roots {
            let shot = shoot_from_boundary(&p, d.r0, PHI_START, tol)?;
            let full = continue_shot(&p, &shot, None, tol)?;
            plot = plot
                .states("shot", &shot.trajectory.resample(SVG_SAMPLES)?)
                .states("continuation", &full.resample(SVG_SAMPLES)?)
                .marker(d.r0, 0.0);
            if full.termination == Termination::BoundaryContact {
                let e = full.last_state();
                plot = plot.marker(e.r, e.phi);
            }
        }
        emit_svg(cfg, &plot)?;
    }
    let ok = roots.iter().all(|d| d.residual <= cfg.tolerances.root_tol);
    let lines = roots
        .iter()
        .map(|d| {
            format!(
                "r0 = {}: k = {}, index {}, residual {:.2e}",
                fmt_f64(d.r0),
                d.periods_in_strip,
                d.index_estimate,
                d.residual
            )
        })
        .collect();
    Ok(Outcome::new(ok, lines))
}

struct RicciRow {
    r: f64,
    ric: (f64, f64, f64),
}

impl CsvRow for RicciRow {
    const HEADER: &'static [&'static str] = &["r", "ric_rr", "ric_phi", "ric_theta"];
    fn fields(&self) -> Vec<String> {
        vec![
            fmt_f64(self.r),
            fmt_f64(self.ric.0),
            fmt_f64(self.ric.1),
            fmt_f64(self.ric.2),
        ]
    }
}

fn ricci(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let p = profile_or(cfg, LambdaProfile::Product);
    let n = cfg.grid_n.unwrap_or(1000).max(1);
    let lo = cfg.r_min.unwrap_or(-1.0);
    let hi = cfg.r_max.unwrap_or(1.5).min(p.working_limit());
    if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
        return Err(anyhow!("empty grid [{lo}, {hi}]"));
    }
    let rows = (0..n)
        .map(|i| {
            let r = lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
            Ok(RicciRow {
                r,
                ric: ricci_diagonal(&p, r)?,
            })
        })
        .collect::<geolab_core::Result<Vec<_>>>()?;
    emit_table(cfg, &rows)?;
    let min = rows
        .iter()
        .map(|x| x.ric.0.min(x.ric.1).min(x.ric.2))
        .fold(f64::INFINITY, f64::min);
    let flat_dev = rows
        .iter()
        .filter(|x| p.is_flat_at(x.r))
        .map(|x| {
            x.ric
                .0
                .abs()
                .max((x.ric.1 - 1.0).abs())
                .max((x.ric.2 - 1.0).abs())
        })
        .fold(0.0, f64::max);
    emit_json(
        cfg,
        &json!({"profile": p, "grid_n": n, "r_min": lo, "r_max": hi,
                "min_component": min, "flat_deviation": flat_dev}),
    )?;
    Ok(Outcome::new(
        min >= 0.0 && flat_dev <= 1e-12,
        vec![format!(
            "ricci: min component {min:.3e}, deviation from (0,1,1) where flat {flat_dev:.1e}"
        )],
    ))
}

fn validate(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let p = profile_or(cfg, LambdaProfile::smooth_default());
    let r_max = cfg.r_max.unwrap_or_else(|| p.working_limit().min(1.5));
    let rep = validate_profile(&p, r_max, cfg.grid_n.unwrap_or(1000))?;
    emit_json(cfg, &json!({"profile": p, "report": rep}))?;
    if let Some(path) = &cfg.outputs.csv_path {
        let mut w = create(path)?;
        use std::io::Write;
        writeln!(w, "constraint,status,worst_margin,worst_at,violations")?;
        for (name, c) in [
            ("barrier", &rep.barrier),
            ("second_derivative", &rep.second_derivative),
            ("flat_at_zero", &rep.flat_at_zero),
        ] {
            writeln!(
                w,
                "{name},{},{},{},{}",
                serde_json::to_value(c.status)?.as_str().unwrap_or("?"),
                fmt_f64(c.worst_margin),
                fmt_f64(c.worst_at),
                c.violations
            )?;
        }
    }
    Ok(Outcome::new(
        rep.all_hold(),
        vec![
            format!("barrier: {:?}", rep.barrier.status),
            format!("second derivative: {:?}", rep.second_derivative.status),
            format!("flat at zero: {:?}", rep.flat_at_zero.status),
        ],
    ))
}

fn oracle_c1(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let kappa = cfg
        .kappa
        .ok_or_else(|| anyhow!("oracle-c1 requires kappa"))?;
    let dev = leaf_deviation(kappa, cfg.grid_n.unwrap_or(400), cfg.tolerances.ode_tol)?;
    emit_table(cfg, &dev.samples)?;
    let plot = Plot::new()
        .leaves(&[kappa])
        .curve(
            "geodesic",
            dev.samples.iter().map(|s| (s.r, s.phi)).collect(),
        )
        .marker(kappa, 0.0)
        .marker(0.0, FRAC_PI_2.min(dev.crossing.phi0));
    emit_svg(cfg, &plot)?;
    emit_json(
        cfg,
        &json!({"kappa": kappa, "phi_lo": dev.phi_lo, "phi_hi": dev.phi_hi,
                "sup_error": dev.sup_error, "crossing": dev.crossing}),
    )?;
    Ok(Outcome::new(
        dev.sup_error <= LEAF_TOL,
        vec![format!(
            "oracle-c1 kappa = {kappa}: sup |r - r_leaf| = {:.3e} over phi in [{:.3}, {:.6}]",
            dev.sup_error, dev.phi_lo, dev.phi_hi
        )],
    ))
}

fn accept(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let results = acceptance::run_all();
    emit_json(cfg, &results)?;
    let ok = results.iter().all(|r| r.passed);
    let mut lines: Vec<String> = results.iter().map(|r| r.line()).collect();
    lines.push(format!(
        "{} of {} criteria passed",
        results.iter().filter(|r| r.passed).count(),
        results.len()
    ));
    Ok(Outcome::new(ok, lines))
}
