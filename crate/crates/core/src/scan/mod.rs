//! Rectangular parameter scans and their reports.
//!
//! Cells are evaluated in parallel on a dedicated pool and gathered in grid
//! order (row-major in the first axis), so the output does not depend on the
//! number of workers.

mod config;
mod output;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{
    env_layer, parse_config_text, Axis, OutputFormat, ScanConfig, ScanMode, DEFAULT_FD_STEP, DEFAULT_NEAR_BAND,
    ENV_PREFIX,
};
pub use output::{read_json_grid, write_mode_table, SCHEMA_VERSION};

use crate::adiabatic::{cone_benchmark, BenchmarkRow};
use crate::error::{Error, Result};
use crate::ising::{
    exceptional_point, overall_phase_closed, phase_derivative, phase_second_derivative, QptDiagnosis, CIRCLE_TOL,
};
use crate::phase::monopole_phase;
use crate::twolevel::{classify_degeneracy, ComplexVec3, DegeneracyKind, DEFAULT_TOL_DEGENERACY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellFlag {
    Ok,
    NearEp,
    Singular,
}

impl CellFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            CellFlag::Ok => "ok",
            CellFlag::NearEp => "near_ep",
            CellFlag::Singular => "singular",
        }
    }
}

/// One grid point. The derivative is taken along `h` for the Ising maps and
/// along `r` for the two-level map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub coords: Vec<f64>,
    pub re_gamma: Option<f64>,
    pub im_gamma: Option<f64>,
    pub re_dgamma_dh: Option<f64>,
    pub im_dgamma_dh: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub re_d2gamma_dh2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im_d2gamma_dh2: Option<f64>,
    pub flag: CellFlag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseScanGrid {
    pub schema_version: u32,
    pub mode: ScanMode,
    pub axes: Vec<Axis>,
    pub fixed: Vec<(String, f64)>,
    pub cells: Vec<Cell>,
}

impl PhaseScanGrid {
    pub fn count(&self, flag: CellFlag) -> usize {
        self.cells.iter().filter(|c| c.flag == flag).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReportRow {
    pub loop_name: String,
    #[serde(flatten)]
    pub row: BenchmarkRow,
    /// `error(previous T) / error(T)`; absent for the first rung.
    pub ratio: Option<f64>,
}

/// Everything a configuration can produce.
#[derive(Debug, Clone, PartialEq)]
pub enum ScanReport {
    Grid(PhaseScanGrid),
    EpTrace(Vec<QptDiagnosis>),
    Bench(Vec<BenchReportRow>),
}

fn split(z: Option<Complex64>) -> (Option<f64>, Option<f64>) {
    match z {
        Some(z) if z.is_finite() => (Some(z.re), Some(z.im)),
        _ => (None, None),
    }
}

struct Evaluated {
    gamma: Option<Complex64>,
    d1: Option<Complex64>,
    d2: Option<Complex64>,
    flag: CellFlag,
}

fn two_level_cell(r: f64, z: f64, eps: f64, step: f64, band: f64) -> Evaluated {
    let v = ComplexVec3::from_rho_eps([r, 0.0, z], eps);
    if classify_degeneracy(&v, DEFAULT_TOL_DEGENERACY).kind != DegeneracyKind::NonDegenerate {
        return Evaluated {
            gamma: None,
            d1: None,
            d2: None,
            flag: CellFlag::Singular,
        };
    }
    let gamma_at = |r: f64| monopole_phase(&ComplexVec3::from_rho_eps([r, 0.0, z], eps)).map(|p| p.gamma);
    let gamma = gamma_at(r).ok();
    let d1 = match (gamma_at(r + step), gamma_at(r - step)) {
        (Ok(a), Ok(b)) => Some((a - b) / (2.0 * step)),
        _ => None,
    };
    let r2 = v.x * v.x + v.y * v.y + v.z * v.z;
    let near = r2.norm() < band.max(2.0 * step);
    let flag = match (gamma, d1) {
        (None, _) => CellFlag::Singular,
        (_, None) => CellFlag::NearEp,
        _ if near => CellFlag::NearEp,
        _ => CellFlag::Ok,
    };
    Evaluated {
        gamma,
        d1,
        d2: None,
        flag,
    }
}

fn ising_cell(h: f64, delta: f64, step: f64, band: f64, second: bool) -> Evaluated {
    let g = Complex64::new(h, -delta);
    let dist = (g.norm_sqr() - 1.0).abs();
    if delta > 0.0 && dist <= CIRCLE_TOL {
        return Evaluated {
            gamma: None,
            d1: None,
            d2: None,
            flag: CellFlag::Singular,
        };
    }
    let gamma = overall_phase_closed(g).ok();
    let d1 = phase_derivative(g, step).ok();
    let d2 = if second {
        phase_second_derivative(g, step).ok()
    } else {
        None
    };
    let near = dist < band.max(2.0 * step);
    let flag = match (gamma, d1) {
        (None, _) => CellFlag::Singular,
        (_, None) => CellFlag::NearEp,
        _ if near || (second && d2.is_none()) => CellFlag::NearEp,
        _ => CellFlag::Ok,
    };
    Evaluated { gamma, d1, d2, flag }
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// Evaluate a map-type scan (`two-level-map`, `ising-map`, `derivative-map`).
pub fn run_scan(config: &ScanConfig) -> Result<PhaseScanGrid> {
    config.validate()?;
    let mode = config.mode;
    if !matches!(
        mode,
        ScanMode::TwoLevelMap | ScanMode::IsingMap | ScanMode::DerivativeMap
    ) {
        return Err(Error::Config(format!("mode {mode} does not produce a grid")));
    }
    let values: Vec<Vec<f64>> = config.axes.iter().map(Axis::values).collect();
    let total: usize = values.iter().map(Vec::len).product();
    let names: Vec<&str> = mode.parameters().iter().map(|(n, _)| *n).collect();

    let coords_of = |mut idx: usize| -> Vec<f64> {
        let mut c = vec![0.0; values.len()];
        for a in (0..values.len()).rev() {
            c[a] = values[a][idx % values[a].len()];
            idx /= values[a].len();
        }
        c
    };
    let param = |coords: &[f64], name: &str| -> f64 {
        config
            .axes
            .iter()
            .position(|a| a.name == name)
            .map(|i| coords[i])
            .unwrap_or_else(|| config.parameter(name))
    };

    let (step, band) = (config.fd_step, config.near_band);
    let cells = with_pool(config.threads, || {
        (0..total)
            .into_par_iter()
            .map(|idx| {
                let coords = coords_of(idx);
                let e = match mode {
                    ScanMode::TwoLevelMap => two_level_cell(
                        param(&coords, "r"),
                        param(&coords, "z"),
                        param(&coords, "eps"),
                        step,
                        band,
                    ),
                    _ => ising_cell(
                        param(&coords, "h"),
                        param(&coords, "delta"),
                        step,
                        band,
                        mode == ScanMode::DerivativeMap,
                    ),
                };
                let (re_gamma, im_gamma) = split(e.gamma);
                let (re_d, im_d) = split(e.d1);
                let (re_d2, im_d2) = split(e.d2);
                Cell {
                    coords,
                    re_gamma,
                    im_gamma,
                    re_dgamma_dh: re_d,
                    im_dgamma_dh: im_d,
                    re_d2gamma_dh2: re_d2,
                    im_d2gamma_dh2: im_d2,
                    flag: e.flag,
                }
            })
            .collect::<Vec<_>>()
    })?;

    let fixed = names
        .iter()
        .filter(|n| !config.axes.iter().any(|a| a.name == **n))
        .map(|n| (n.to_string(), config.parameter(n)))
        .collect();
    Ok(PhaseScanGrid {
        schema_version: SCHEMA_VERSION,
        mode,
        axes: config.axes.clone(),
        fixed,
        cells,
    })
}

/// Exceptional-point rows for every `δ` of the axis.
pub fn ep_trace(delta_range: &Axis, a: f64, threads: Option<usize>) -> Result<Vec<QptDiagnosis>> {
    delta_range.validate()?;
    let deltas = delta_range.values();
    if deltas.iter().any(|d| !(0.0..=1.0).contains(d)) {
        return Err(Error::Domain(format!(
            "delta range [{}, {}] outside [0, 1]",
            delta_range.min, delta_range.max
        )));
    }
    with_pool(threads, || {
        deltas
            .par_iter()
            .map(|&d| exceptional_point(d, a))
            .collect::<Result<Vec<_>>>()
    })?
}

/// Equator and complex-cone loops over a ladder of total times.
pub fn adiabatic_bench(config: &ScanConfig) -> Result<Vec<BenchReportRow>> {
    let field = config.parameter("field");
    let eps = config.parameter("eps");
    let theta = config.parameter("theta");
    let tol = config.parameter("tol");
    let loops = [("equator", std::f64::consts::FRAC_PI_2, 0.0), ("cone", theta, eps)];
    let jobs: Vec<(usize, f64)> = (0..loops.len())
        .flat_map(|l| config.times.iter().map(move |&t| (l, t)))
        .collect();
    let rows = with_pool(config.threads, || {
        jobs.par_iter()
            .map(|&(l, t)| cone_benchmark(field, loops[l].1, loops[l].2, t, tol).map(|r| (l, r)))
            .collect::<Result<Vec<_>>>()
    })??;
    let mut out: Vec<BenchReportRow> = Vec::with_capacity(rows.len());
    for (l, row) in rows {
        let ratio = match out.last() {
            Some(prev) if prev.loop_name == loops[l].0 => Some(prev.row.error / row.error),
            _ => None,
        };
        out.push(BenchReportRow {
            loop_name: loops[l].0.to_string(),
            row,
            ratio,
        });
    }
    Ok(out)
}

/// Run whatever the configuration's mode asks for.
pub fn execute(config: &ScanConfig) -> Result<ScanReport> {
    match config.mode {
        ScanMode::EpTrace => Ok(ScanReport::EpTrace(ep_trace(
            &config.axes[0],
            config.parameter("a"),
            config.threads,
        )?)),
        ScanMode::AdiabaticBench => Ok(ScanReport::Bench(adiabatic_bench(config)?)),
        _ => Ok(ScanReport::Grid(run_scan(config)?)),
    }
}

impl ScanReport {
    pub fn write<W: std::io::Write>(&self, format: OutputFormat, out: W) -> Result<()> {
        match format {
            OutputFormat::Csv => output::write_csv(self, out),
            OutputFormat::Json => output::write_json(self, out),
        }
    }

    /// Cells flagged singular (grids only).
    pub fn singular_cells(&self) -> usize {
        match self {
            ScanReport::Grid(g) => g.count(CellFlag::Singular),
            _ => 0,
        }
    }
}
