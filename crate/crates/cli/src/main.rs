use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cgphase::ising::{mode_spectrum, IsingParams};
use cgphase::scan::{env_layer, execute, parse_config_text, write_mode_table, OutputFormat, ScanConfig};
use cgphase::Error;
use clap::{Args, Parser, Subcommand};

/// Complex geometric phases and the dissipative Ising chain.
#[derive(Parser)]
#[command(name = "cgphase", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Phase-diagram and two-level scans.
    Scan {
        /// two-level-map, ising-map or derivative-map
        #[arg(long)]
        mode: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Exceptional circle, transition order and jump for a range of delta.
    EpTrace {
        #[command(flatten)]
        common: Common,
    },
    /// Adiabatic error against total time.
    AdiabaticBench {
        /// Comma-separated total times.
        #[arg(long)]
        times: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Per-momentum spectrum of the Ising chain.
    ModeTable {
        /// Chain parameters: h, delta, phi, j, a, n.
        #[arg(long = "fix", value_name = "NAME=VALUE")]
        fix: Vec<String>,
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Axis as NAME=MIN:MAX:STEPS; repeatable.
    #[arg(long, value_name = "NAME=MIN:MAX:STEPS")]
    grid: Vec<String>,
    /// Fixed parameter as NAME=VALUE; repeatable.
    #[arg(long, value_name = "NAME=VALUE")]
    fix: Vec<String>,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 3 when any cell is singular.
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    fd_step: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
}

fn split_pair(s: &str) -> Result<(String, String), Error> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| Error::Config(format!("expected NAME=VALUE, got '{s}'")))
}

impl Common {
    fn layer(&self) -> Result<Vec<(String, String)>, Error> {
        let mut kv = Vec::new();
        for g in &self.grid {
            let (k, v) = split_pair(g)?;
            kv.push((format!("grid.{k}"), v));
        }
        for f in &self.fix {
            let (k, v) = split_pair(f)?;
            kv.push((format!("fix.{k}"), v));
        }
        if let Some(f) = &self.format {
            kv.push(("format".into(), f.clone()));
        }
        if let Some(o) = &self.out {
            kv.push(("out".into(), o.display().to_string()));
        }
        if self.strict {
            kv.push(("strict".into(), "true".into()));
        }
        if let Some(s) = self.fd_step {
            kv.push(("fd_step".into(), s.to_string()));
        }
        if let Some(t) = self.threads {
            kv.push(("threads".into(), t.to_string()));
        }
        Ok(kv)
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_config(common: &Common, extra: Vec<(String, String)>) -> Result<ScanConfig, Error> {
    let file = match &common.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
            parse_config_text(&text)?
        }
        None => Vec::new(),
    };
    let env = env_layer(std::env::vars());
    let mut cli = extra;
    cli.extend(common.layer()?);
    ScanConfig::from_layers(&[file, env, cli])
}

/// Run a configured scan; returns whether strict mode found singular cells.
fn run_config(config: &ScanConfig) -> Result<bool, Error> {
    let report = execute(config)?;
    let mut out = open_output(config.output_path.as_deref())?;
    report.write(config.format, &mut out)?;
    out.flush()?;
    let singular = report.singular_cells();
    if singular > 0 {
        eprintln!("cgphase: {singular} singular cells");
    }
    Ok(config.strict && singular > 0)
}

fn mode_table(fix: &[String], format: Option<&str>, out: Option<&Path>) -> Result<(), Error> {
    let mut p = IsingParams::default();
    for f in fix {
        let (k, v) = split_pair(f)?;
        let x: f64 = v
            .parse()
            .map_err(|_| Error::Config(format!("{k}: '{v}' is not a number")))?;
        match k.as_str() {
            "h" => p.h_field = x,
            "delta" => p.delta = x,
            "phi" => p.phi = x,
            "j" => p.j_coupling = x,
            "a" => p.lattice_a = x,
            "n" if x >= 0.0 && x.fract() == 0.0 => p.n_sites = x as usize,
            _ => return Err(Error::Config(format!("mode-table has no parameter '{k}={v}'"))),
        }
    }
    p.validate().map_err(|e| Error::Config(e.to_string()))?;
    let format: OutputFormat = format.unwrap_or("csv").parse()?;
    let spectrum = mode_spectrum(&p)?;
    let mut w = open_output(out)?;
    write_mode_table(&spectrum, format, &mut w)?;
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Scan { mode, common } => {
            let extra = mode.map(|m| vec![("mode".to_string(), m)]).unwrap_or_default();
            let config = load_config(&common, extra)?;
            run_config(&config)
        }
        Command::EpTrace { common } => {
            let config = load_config(&common, vec![("mode".into(), "ep-trace".into())])?;
            run_config(&config)
        }
        Command::AdiabaticBench { times, common } => {
            let mut extra = vec![("mode".to_string(), "adiabatic-bench".to_string())];
            if let Some(t) = times {
                extra.push(("times".into(), t));
            }
            let config = load_config(&common, extra)?;
            run_config(&config)
        }
        Command::ModeTable { fix, format, out } => {
            mode_table(&fix, format.as_deref(), out.as_deref())?;
            Ok(false)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(3),
        Err(e) => {
            eprintln!("cgphase: error: {e}");
            match e {
                Error::Config(_) | Error::Io(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}
