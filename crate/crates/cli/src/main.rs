//! `geolab`: command-line front end for the geodesic lab.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{Command, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "geolab",
    version,
    about = "Geodesics and boundary shooting on degenerate quotient metrics",
    allow_negative_numbers = true
)]
struct Cli {
    /// Command to run; overrides the config's `command`.
    command: Option<Command>,
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Clairaut constants, comma separated.
    #[arg(long, value_delimiter = ',')]
    c: Option<Vec<f64>>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Boundary contact point(s), comma separated.
    #[arg(long, value_delimiter = ',')]
    r0: Option<Vec<f64>>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    out_csv: Option<PathBuf>,
    #[arg(long)]
    out_svg: Option<PathBuf>,
    #[arg(long)]
    out_json: Option<PathBuf>,
    /// ODE tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

impl Cli {
    fn into_config(self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if self.command.is_some() {
            cfg.command = self.command;
        }
        if let Some(c) = self.c {
            cfg.c_list = Some(c);
        }
        if let Some(k) = self.kappa {
            cfg.kappa = Some(k);
        }
        match self.r0.as_deref() {
            Some([r]) => {
                cfg.r0 = Some(*r);
                cfg.r0_list = None;
            }
            Some(list) if !list.is_empty() => cfg.r0_list = Some(list.to_vec()),
            _ => {}
        }
        if let Some(e) = self.epsilon {
            cfg.epsilon = Some(e);
        }
        if let Some(t) = self.tol {
            cfg.tolerances.ode_tol = t;
        }
        let out = &mut cfg.outputs;
        out.csv_path = self.out_csv.or(out.csv_path.take());
        out.svg_path = self.out_svg.or(out.svg_path.take());
        out.json_path = self.out_json.or(out.json_path.take());
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = cli.into_config().and_then(|cfg| {
        let cmd = cfg.validate()?;
        commands::run(&cfg, cmd)
    });
    match result {
        Ok(out) => {
            for line in &out.lines {
                println!("{line}");
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("invariant violated in outputs");
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
