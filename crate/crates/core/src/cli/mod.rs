//! Command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 domain error,
//! 4 numerical non-convergence. Failures print one JSON object
//! `{"error": kind, "message": text}` to stderr.

pub mod config;
pub mod output;
pub mod physical;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::modes::{enumerate_modes, CouplingConfig, OrderingPolicy, WaveguideGeometry};
use crate::scattering::decomposition;
use crate::self_energy::{resonance_energies, self_energy, LambTruncation, SystemContext, TlsParams};
use crate::spectra::{figure_curves, scan, LabeledSpec};

use config::{parse_incident, OutputFormat, RunConfig};
use output::{fmt_real, gnuplot_script, result_json, spectrum_csv, spectrum_json, table_csv};
use physical::{physical_sizing, FrequencyConvention, Placement};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_NONCONVERGENCE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "wgqed", version, about = "Single-photon scattering in a multi-mode rectangular waveguide")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Table of TM mode cutoffs.
    Modes {
        #[arg(long, default_value = "physical")]
        policy: OrderingPolicy,
        #[arg(long, default_value_t = 8.0)]
        emax: f64,
        #[arg(long, default_value_t = 2.0)]
        aspect: f64,
    },
    /// Lamb shift and decay rate over an energy grid.
    Selfenergy {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value = "open")]
        lamb: LambTruncation,
        #[arg(long, default_value = "csv")]
        format: OutputFormat,
    },
    /// Reflectance scan from a JSON config, with flag overrides.
    Reflectance(ReflectanceArgs),
    /// Controllable channel and scattering-free basis at one energy.
    Channels {
        #[arg(long)]
        energy: f64,
        #[command(flatten)]
        system: SystemArgs,
    },
    /// Roots of `E − ω_a − Δ(E)` on an interval.
    Resonances {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        omega_a: f64,
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value = "open")]
        lamb: LambTruncation,
        #[arg(long, default_value = "csv")]
        format: OutputFormat,
    },
    /// Runs a named figure preset, one CSV per curve.
    Figure {
        name: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        plot: bool,
    },
    /// Physical cross-section for a target frequency.
    Physical {
        #[arg(long)]
        frequency: f64,
        #[arg(long, default_value = "ordinary")]
        convention: FrequencyConvention,
        /// `mid_gap12` or an energy in units of π/a.
        #[arg(long, default_value = "mid_gap12")]
        placement: String,
        #[arg(long, default_value_t = 2.0)]
        aspect: f64,
    },
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long)]
    e_min: f64,
    #[arg(long)]
    e_max: f64,
    #[arg(long, default_value_t = 200)]
    points: usize,
}

#[derive(Debug, Args)]
struct SystemArgs {
    #[arg(long, default_value_t = 0.01)]
    g2: f64,
    #[arg(long, default_value_t = 2.0)]
    aspect: f64,
    #[arg(long, default_value = "paper_figure")]
    ordering: OrderingPolicy,
}

#[derive(Debug, Serialize)]
struct SystemConfig {
    g_squared: f64,
    aspect_ratio: f64,
    ordering: OrderingPolicy,
}

impl SystemArgs {
    fn context(&self) -> Result<SystemContext> {
        Ok(SystemContext::new(
            WaveguideGeometry::new(self.aspect)?,
            CouplingConfig::new(self.g2)?,
            self.ordering,
        ))
    }

    fn record(&self) -> SystemConfig {
        SystemConfig {
            g_squared: self.g2,
            aspect_ratio: self.aspect,
            ordering: self.ordering,
        }
    }
}

#[derive(Debug, Args)]
struct ReflectanceArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    e_min: Option<f64>,
    #[arg(long)]
    e_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// `cc`, `mode:M,N` or `vector:re,im;re,im;...`.
    #[arg(long)]
    incident: Option<String>,
    #[arg(long)]
    omega_a: Option<f64>,
    #[arg(long)]
    g2: Option<f64>,
    #[arg(long)]
    aspect: Option<f64>,
    #[arg(long)]
    ordering: Option<OrderingPolicy>,
    #[arg(long)]
    lamb: Option<LambTruncation>,
    #[arg(long)]
    format: Option<OutputFormat>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    plot: bool,
}

impl ReflectanceArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.e_min {
            cfg.e_min = v;
        }
        if let Some(v) = self.e_max {
            cfg.e_max = v;
        }
        if let Some(v) = self.points {
            cfg.points = v;
        }
        if let Some(text) = &self.incident {
            cfg.incident = parse_incident(text)?;
        }
        if let Some(v) = self.omega_a {
            cfg.omega_a = v;
        }
        if let Some(v) = self.g2 {
            cfg.g_squared = v;
        }
        if let Some(v) = self.aspect {
            cfg.aspect_ratio = v;
        }
        if let Some(v) = self.ordering {
            cfg.ordering = v;
        }
        if let Some(v) = self.lamb {
            cfg.lamb = v;
        }
        if let Some(v) = self.format {
            cfg.output.format = v;
        }
        if let Some(v) = &self.out {
            cfg.output.path = Some(v.clone());
        }
        cfg.emit_plot_script |= self.plot;
        Ok(cfg)
    }
}

#[derive(Debug, Serialize)]
struct ErrorRecord<'a> {
    error: &'a str,
    message: String,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidInput(_) | Error::UnknownPreset(_) => EXIT_CONFIG,
        Error::NonConvergence { .. } => EXIT_NONCONVERGENCE,
        _ => EXIT_DOMAIN,
    }
}

/// Parses `argv` (program name first), executes it and returns the exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) if !err.use_stderr() => {
            let _ = write!(stdout, "{err}");
            return EXIT_OK;
        }
        Err(err) => {
            let record = ErrorRecord {
                error: "InvalidInput",
                message: err.to_string().trim_end().to_string(),
            };
            let _ = writeln!(stderr, "{}", serde_json::to_string(&record).expect("record serializes"));
            return EXIT_CONFIG;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(err) => {
            let record = ErrorRecord {
                error: err.kind(),
                message: err.to_string(),
            };
            let _ = writeln!(stderr, "{}", serde_json::to_string(&record).expect("record serializes"));
            exit_code(&err)
        }
    }
}

fn io_error(path: &Path, err: std::io::Error) -> Error {
    Error::InvalidInput(format!("writing {}: {err}", path.display()))
}

fn emit(stdout: &mut dyn Write, text: &str) -> Result<()> {
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| Error::InvalidInput(format!("writing output: {e}")))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}

fn grid(e_min: f64, e_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(e_min.is_finite() && e_max.is_finite() && e_min < e_max) || points < 2 {
        return Err(Error::InvalidInput(format!(
            "grid needs e_min < e_max and at least 2 points, got ({e_min}, {e_max}, {points})"
        )));
    }
    let step = (e_max - e_min) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| if i + 1 == points { e_max } else { e_min + step * i as f64 })
        .collect())
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<()> {
    match command {
        Command::Modes { policy, emax, aspect } => {
            let geom = WaveguideGeometry::new(aspect)?;
            let ordering = enumerate_modes(&geom, emax, policy)?;
            let rows: Vec<Vec<String>> = ordering
                .modes
                .iter()
                .map(|m| vec![m.m.to_string(), m.n.to_string(), fmt_real(m.cutoff), m.sign.to_string()])
                .collect();
            let record = serde_json::json!({ "policy": policy, "emax": emax, "aspect_ratio": aspect });
            emit(stdout, &table_csv(&record, &["m", "n", "cutoff", "sign"], &rows))
        }
        Command::Selfenergy {
            grid: g,
            system,
            lamb,
            format,
        } => {
            let ctx = system.context()?;
            let energies = grid(g.e_min, g.e_max, g.points)?;
            let values: Vec<(f64, Result<_>)> = energies
                .iter()
                .map(|&e| (e, self_energy(e, &ctx, lamb)))
                .collect();
            let record = serde_json::json!({
                "e_min": g.e_min, "e_max": g.e_max, "points": g.points,
                "system": system.record(), "lamb": lamb,
            });
            match format {
                OutputFormat::Csv => {
                    let rows: Vec<Vec<String>> = values
                        .iter()
                        .map(|(e, v)| match v {
                            Ok(v) => vec![
                                fmt_real(*e),
                                fmt_real(v.delta),
                                fmt_real(v.gamma),
                                v.open_count.to_string(),
                            ],
                            Err(_) => vec![fmt_real(*e), String::new(), String::new(), String::new()],
                        })
                        .collect();
                    emit(stdout, &table_csv(&record, &["E", "delta", "gamma", "open_count"], &rows))
                }
                OutputFormat::Json => {
                    let rows: Vec<serde_json::Value> = values
                        .iter()
                        .map(|(e, v)| match v {
                            Ok(v) => serde_json::to_value(v).expect("value serializes"),
                            Err(err) => serde_json::json!({
                                "energy": e, "error": err.kind(), "message": err.to_string(),
                            }),
                        })
                        .collect();
                    emit(stdout, &result_json(&record, &rows))
                }
            }
        }
        Command::Reflectance(args) => {
            let cfg = args.resolve()?;
            let spec = cfg.scan_spec()?;
            let out = scan(&spec)?;
            let label = format!("reflectance_{}", spec.incident.label());
            let text = match cfg.output.format {
                OutputFormat::Csv => spectrum_csv(&label, &cfg, &out),
                OutputFormat::Json => spectrum_json(&label, &cfg, &out),
            };
            match &cfg.output.path {
                Some(path) => {
                    write_file(path, &text)?;
                    if cfg.emit_plot_script && cfg.output.format == OutputFormat::Csv {
                        let file = path.file_name().map_or_else(String::new, |f| f.to_string_lossy().into_owned());
                        let script = gnuplot_script(&label, &[(file, spec.incident.label())]);
                        write_file(&path.with_extension("gp"), &script)?;
                    }
                    emit(stdout, &format!("{}\n", path.display()))
                }
                None => emit(stdout, &text),
            }
        }
        Command::Channels { energy, system } => {
            let ctx = system.context()?;
            let dec = decomposition(energy, &ctx)?;
            let channels = ctx.channel_set(energy)?;
            let modes: Vec<String> = channels.channels.iter().map(|c| c.mode.label()).collect();
            let record = serde_json::json!({ "energy": energy, "system": system.record() });
            let result = serde_json::json!({
                "energy": energy,
                "open_count": channels.len(),
                "modes": modes,
                "cc": dec.cc.amplitudes,
                "sfc_basis": dec.sfc_basis.iter().map(|v| &v.amplitudes).collect::<Vec<_>>(),
            });
            emit(stdout, &format!("{}\n", result_json(&record, &result)))
        }
        Command::Resonances {
            grid: g,
            omega_a,
            system,
            lamb,
            format,
        } => {
            let ctx = system.context()?;
            let tls = TlsParams::new(omega_a)?;
            let res = resonance_energies(g.e_min, g.e_max, &tls, &ctx, lamb)?;
            let record = serde_json::json!({
                "e_min": g.e_min, "e_max": g.e_max, "omega_a": omega_a,
                "system": system.record(), "lamb": lamb,
            });
            match format {
                OutputFormat::Csv => {
                    let rows: Vec<Vec<String>> = res
                        .roots
                        .iter()
                        .map(|&r| vec![fmt_real(r), fmt_real(r - omega_a)])
                        .collect();
                    emit(stdout, &table_csv(&record, &["E_R", "shift"], &rows))
                }
                OutputFormat::Json => emit(stdout, &format!("{}\n", result_json(&record, &res))),
            }
        }
        Command::Figure {
            name,
            out_dir,
            points,
            threads,
            plot,
        } => {
            let mut curves = figure_curves(&name)?;
            if let Some(p) = points {
                for curve in &mut curves {
                    curve.spec.points = p;
                }
            }
            let files = match threads {
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?
                    .install(|| write_figure(&curves, &out_dir))?,
                None => write_figure(&curves, &out_dir)?,
            };
            if plot {
                let entries: Vec<(String, String)> = files
                    .iter()
                    .zip(&curves)
                    .map(|(f, c)| {
                        (f.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned()), c.label.clone())
                    })
                    .collect();
                write_file(&out_dir.join(format!("{name}.gp")), &gnuplot_script(&name, &entries))?;
            }
            let listing: String = files.iter().map(|f| format!("{}\n", f.display())).collect();
            emit(stdout, &listing)
        }
        Command::Physical {
            frequency,
            convention,
            placement,
            aspect,
        } => {
            let placement = match placement.as_str() {
                "mid_gap12" => Placement::MidGap12,
                other => Placement::Explicit(
                    other
                        .parse()
                        .map_err(|_| Error::InvalidInput(format!("bad placement `{other}`")))?,
                ),
            };
            let geom = WaveguideGeometry::new(aspect)?;
            let sizing = physical_sizing(frequency, convention, placement, &geom)?;
            let record = serde_json::json!({
                "frequency": frequency, "convention": convention,
                "placement": placement, "aspect_ratio": aspect,
            });
            emit(stdout, &format!("{}\n", result_json(&record, &sizing)))
        }
    }
}

fn write_figure(curves: &[LabeledSpec], out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| io_error(out_dir, e))?;
    let mut files = Vec::new();
    for curve in curves {
        let out = scan(&curve.spec)?;
        let cfg = RunConfig::from_scan_spec(&curve.spec);
        let path = out_dir.join(format!("{}.csv", curve.label));
        write_file(&path, &spectrum_csv(&curve.label, &cfg, &out))?;
        files.push(path);
    }
    Ok(files)
}
