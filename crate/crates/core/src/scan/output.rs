//! CSV and JSON writers. Both carry `schema_version`; CSV as a leading
//! comment line, JSON as a top-level field.

use std::io::Write;

use serde::Serialize;

use super::{BenchReportRow, OutputFormat, PhaseScanGrid, ScanMode, ScanReport};
use crate::error::{Error, Result};
use crate::ising::{ModeSpectrum, QptDiagnosis, QptOrder};

pub const SCHEMA_VERSION: u32 = 1;

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn order_name(o: QptOrder) -> &'static str {
    match o {
        QptOrder::First => "first",
        QptOrder::Second => "second",
    }
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Io(e.to_string())
}

pub(super) fn write_csv<W: Write>(report: &ScanReport, mut out: W) -> Result<()> {
    match report {
        ScanReport::Grid(g) => {
            let fixed: Vec<String> = g.fixed.iter().map(|(k, v)| format!(" {k}={}", num(*v))).collect();
            writeln!(
                out,
                "# cgphase schema_version={SCHEMA_VERSION} mode={}{}",
                g.mode,
                fixed.concat()
            )?;
            let mut header: Vec<&str> = g.axes.iter().map(|a| a.name.as_str()).collect();
            header.extend(["re_gamma", "im_gamma", "re_dgamma_dh", "im_dgamma_dh"]);
            let second = g.mode == ScanMode::DerivativeMap;
            if second {
                header.extend(["re_d2gamma_dh2", "im_d2gamma_dh2"]);
            }
            header.push("flag");
            writeln!(out, "{}", header.join(","))?;
            for c in &g.cells {
                let mut row: Vec<String> = c.coords.iter().map(|&x| num(x)).collect();
                row.extend([c.re_gamma, c.im_gamma, c.re_dgamma_dh, c.im_dgamma_dh].map(opt));
                if second {
                    row.extend([c.re_d2gamma_dh2, c.im_d2gamma_dh2].map(opt));
                }
                row.push(c.flag.as_str().to_string());
                writeln!(out, "{}", row.join(","))?;
            }
        }
        ScanReport::EpTrace(rows) => {
            writeln!(out, "# cgphase schema_version={SCHEMA_VERSION} mode=ep-trace")?;
            writeln!(out, "delta,h_c,k_c,order,re_jump,im_jump")?;
            for r in rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    num(r.delta),
                    num(r.h_c),
                    num(r.k_c),
                    order_name(r.order),
                    num(r.jump.re),
                    num(r.jump.im)
                )?;
            }
        }
        ScanReport::Bench(rows) => {
            writeln!(out, "# cgphase schema_version={SCHEMA_VERSION} mode=adiabatic-bench")?;
            writeln!(
                out,
                "loop,total_time,re_gamma,im_gamma,re_reference,im_reference,error,ratio,steps"
            )?;
            for r in rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    r.loop_name,
                    num(r.row.total_time),
                    num(r.row.gamma.re),
                    num(r.row.gamma.im),
                    num(r.row.reference.re),
                    num(r.row.reference.im),
                    num(r.row.error),
                    opt(r.ratio),
                    r.row.steps
                )?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct Rows<'a, T> {
    schema_version: u32,
    mode: ScanMode,
    rows: &'a [T],
}

pub(super) fn write_json<W: Write>(report: &ScanReport, mut out: W) -> Result<()> {
    match report {
        ScanReport::Grid(g) => serde_json::to_writer_pretty(&mut out, g),
        ScanReport::EpTrace(rows) => serde_json::to_writer_pretty(
            &mut out,
            &Rows::<QptDiagnosis> {
                schema_version: SCHEMA_VERSION,
                mode: ScanMode::EpTrace,
                rows,
            },
        ),
        ScanReport::Bench(rows) => serde_json::to_writer_pretty(
            &mut out,
            &Rows::<BenchReportRow> {
                schema_version: SCHEMA_VERSION,
                mode: ScanMode::AdiabaticBench,
                rows,
            },
        ),
    }
    .map_err(json_err)?;
    writeln!(out)?;
    Ok(())
}

/// Parse a grid written by the JSON writer.
pub fn read_json_grid(text: &str) -> Result<PhaseScanGrid> {
    let g: PhaseScanGrid = serde_json::from_str(text).map_err(json_err)?;
    if g.schema_version != SCHEMA_VERSION {
        return Err(Error::Config(format!(
            "unsupported schema_version {}",
            g.schema_version
        )));
    }
    Ok(g)
}

/// Per-mode Ising spectrum.
pub fn write_mode_table<W: Write>(spectrum: &ModeSpectrum, format: OutputFormat, mut out: W) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            writeln!(out, "# cgphase schema_version={SCHEMA_VERSION} mode=mode-table")?;
            writeln!(out, "k,re_energy,im_energy,re_cos_theta,im_cos_theta,branch_flipped")?;
            for i in 0..spectrum.momenta.len() {
                let (e, c) = (spectrum.energies[i], spectrum.cos_theta[i]);
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    num(spectrum.momenta[i]),
                    num(e.re),
                    num(e.im),
                    num(c.re),
                    num(c.im),
                    spectrum.branch_flipped[i]
                )?;
            }
        }
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Table<'a> {
                schema_version: u32,
                mode: &'static str,
                #[serde(flatten)]
                spectrum: &'a ModeSpectrum,
            }
            serde_json::to_writer_pretty(
                &mut out,
                &Table {
                    schema_version: SCHEMA_VERSION,
                    mode: "mode-table",
                    spectrum,
                },
            )
            .map_err(json_err)?;
            writeln!(out)?;
        }
    }
    Ok(())
}
