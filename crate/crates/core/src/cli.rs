//! Command-line front end. Body specs in, delimited tables or JSON out.
//!
//! Exit status: 0 on success, 1 when the mathematical verdict is negative
//! (`istest` says no, `bp` finds a violation, `concavity` fails), 2 on input
//! or contract errors.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bodies::{volume, StarBody};
use crate::bodyspec::BodySpec;
use crate::bpharness::{
    bm_concavity_check, bp_check, default_minmax_section_level, default_volume_level, gbp_check, minmax_ratio,
    slicing_table, BpOptions, BpVerdict, SlicingFamily,
};
use crate::error::{contract, Result};
use crate::export::{fmt_f64, fmt_vec, write_delimited, write_structured, Delimited};
use crate::intersect::{is_intersection_body_r4, is_intersection_body_zonal, R4Options, Smoothing, Verdict, ZonalOptions};
use crate::linalg::{norm, normalized};
use crate::radon::{
    funk_multipliers, funk_transform, helgason_inverse_zonal, zonal_inverse, ZonalFunction, ZonalInverseOptions,
    DEFAULT_GRID, DEFAULT_KMAX, DEFAULT_TAIL_THRESHOLD,
};
use crate::sections::{central_section_volume, lemma1_inverse_with, section_profile, Lemma1Options, DEFAULT_LEVEL};
use crate::spherequad::{cached_rule, direction_grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Delimited,
    Structured,
}

#[derive(Debug, Parser)]
#[command(name = "funktomo", version, about = "Funk transform, intersection bodies and Busemann-Petty experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Sphere quadrature level (subcommand-specific default when omitted).
    #[arg(long, global = true)]
    pub level: Option<usize>,
    /// Minimum number of grid directions, or zonal grid size for zonal methods.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Delimited)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InverseMethod {
    Helgason,
    Lemma1,
    Zonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TestMethod {
    Auto,
    Lemma1,
    Zonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFamily {
    Cube,
    Ball,
    Cylinder,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Volume of a body.
    Volume { body: PathBuf },
    /// Central section, or the parallel-section profile with --parallel.
    Section {
        body: PathBuf,
        /// Comma-separated direction; normalized before use.
        #[arg(long, allow_hyphen_values = true)]
        direction: String,
        #[arg(long)]
        parallel: bool,
        /// Profile half-points (the profile has 2 * points + 1 samples).
        #[arg(long, default_value_t = 32)]
        points: usize,
    },
    /// Forward Funk transform of rho_K^power at one direction or over a grid.
    Radon {
        body: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        direction: Option<String>,
        #[arg(long, default_value_t = 1)]
        power: i32,
    },
    /// Inverse Funk transform of the radial function.
    Inverse {
        body: PathBuf,
        #[arg(long, value_enum)]
        method: InverseMethod,
        #[arg(long, allow_hyphen_values = true)]
        direction: Option<String>,
        #[arg(long, default_value_t = DEFAULT_KMAX)]
        kmax: usize,
        /// Poisson radius for the zonal method (1 = none).
        #[arg(long, default_value_t = 1.0)]
        smoothing: f64,
    },
    /// Is the body an intersection body?
    Istest {
        body: PathBuf,
        #[arg(long, value_enum, default_value_t = TestMethod::Auto)]
        method: TestMethod,
    },
    /// Busemann-Petty check on hyperplane sections.
    Bp {
        k: PathBuf,
        l: PathBuf,
        #[arg(long, default_value_t = 500)]
        samples: usize,
    },
    /// Generalized check on i-dimensional sections.
    Gbp {
        k: PathBuf,
        l: PathBuf,
        #[arg(long)]
        i: usize,
        #[arg(long, default_value_t = 500)]
        samples: usize,
    },
    /// Ratio vol^{(n-1)/n} / max central section.
    Minmax { body: PathBuf },
    /// Minmax ratios across dimensions, with the ball column.
    SlicingTable {
        #[arg(long, value_enum)]
        family: TableFamily,
        #[arg(long, default_value_t = 1.0)]
        half_height: f64,
        #[arg(long, default_value_t = 4)]
        from: usize,
        #[arg(long, default_value_t = 12)]
        to: usize,
    },
    /// Midpoint concavity of A_u^{1/(n-1)}.
    Concavity {
        body: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        direction: String,
        #[arg(long, default_value_t = 41)]
        points: usize,
    },
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

fn load(path: &PathBuf) -> Result<StarBody> {
    BodySpec::from_path(path)?.build()
}

fn parse_direction(text: &str, n: usize) -> Result<Vec<f64>> {
    let v = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| contract(format!("direction entry `{s}`: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    if v.len() != n {
        return Err(crate::error::Error::DimensionMismatch { expected: n, got: v.len() });
    }
    if v.iter().any(|x| !x.is_finite()) || norm(&v) == 0.0 {
        return Err(contract("direction must be finite and nonzero"));
    }
    Ok(normalized(&v))
}

#[derive(Debug, Serialize)]
struct VolumeRecord {
    body_id: String,
    n: usize,
    level: usize,
    volume: f64,
}

impl Delimited for VolumeRecord {
    fn header() -> &'static str {
        "body_id,n,level,volume"
    }
    fn row(&self) -> String {
        format!("{},{},{},{}", self.body_id.replace(',', ";"), self.n, self.level, fmt_f64(self.volume))
    }
}

#[derive(Debug, Serialize)]
struct DirectionalValue {
    direction: Vec<f64>,
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    error_estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    low_confidence: Option<bool>,
}

impl Delimited for DirectionalValue {
    fn header() -> &'static str {
        "direction,value,error_estimate,low_confidence"
    }
    fn row(&self) -> String {
        format!(
            "{},{},{},{}",
            fmt_vec(&self.direction),
            fmt_f64(self.value),
            self.error_estimate.map(fmt_f64).unwrap_or_default(),
            self.low_confidence.map(|b| b.to_string()).unwrap_or_default()
        )
    }
}

#[derive(Debug, Serialize)]
struct ZonalValue {
    phi: f64,
    value: f64,
}

impl Delimited for ZonalValue {
    fn header() -> &'static str {
        "phi,value"
    }
    fn row(&self) -> String {
        format!("{},{}", fmt_f64(self.phi), fmt_f64(self.value))
    }
}

fn emit<T: Delimited + Serialize>(items: &[T], single: bool, format: Format, out: &mut dyn Write) -> Result<()> {
    let io = |e: std::io::Error| contract(format!("write failed: {e}"));
    match format {
        Format::Delimited => write_delimited(items, &mut *out).map_err(io),
        Format::Structured if single && items.len() == 1 => write_structured(&items[0], &mut *out).map_err(io),
        Format::Structured => write_structured(items, &mut *out).map_err(io),
    }
}

fn zonal_rows(f: &ZonalFunction) -> Vec<ZonalValue> {
    f.angles()
        .into_iter()
        .zip(f.samples())
        .map(|(phi, &value)| ZonalValue { phi, value })
        .collect()
}

fn directions(n: usize, direction: &Option<String>, grid: Option<usize>) -> Result<Vec<Vec<f64>>> {
    match direction {
        Some(d) => Ok(vec![parse_direction(d, n)?]),
        None => direction_grid(n, grid.unwrap_or(64)),
    }
}

/// Runs one command, writing its artifact to `out`. Returns the exit status
/// for a completed run; errors map to [`EXIT_INPUT`].
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let c = &cli.common;
    let mut status = EXIT_OK;
    match &cli.command {
        Command::Volume { body } => {
            let body = load(body)?;
            let level = c.level.unwrap_or_else(|| default_volume_level(&body));
            let v = volume(&body, &cached_rule(body.dim(), level))?;
            let rec = VolumeRecord {
                body_id: body.id(),
                n: body.dim(),
                level,
                volume: v,
            };
            emit(&[rec], true, c.format, out)?;
        }
        Command::Section {
            body,
            direction,
            parallel,
            points,
        } => {
            let body = load(body)?;
            let u = parse_direction(direction, body.dim())?;
            let level = c.level.unwrap_or(DEFAULT_LEVEL);
            if *parallel {
                let profile = section_profile(&body, &u, *points, level)?;
                let io = |e: std::io::Error| contract(format!("write failed: {e}"));
                match c.format {
                    Format::Delimited => profile.write_delimited(&mut *out).map_err(io)?,
                    Format::Structured => write_structured(&profile, &mut *out).map_err(io)?,
                }
            } else {
                let value = central_section_volume(&body, &u, level)?;
                let rec = DirectionalValue {
                    direction: u,
                    value,
                    error_estimate: None,
                    low_confidence: None,
                };
                emit(&[rec], true, c.format, out)?;
            }
        }
        Command::Radon { body, direction, power } => {
            let body = load(body)?;
            let level = c.level.unwrap_or(DEFAULT_LEVEL);
            let rows = directions(body.dim(), direction, c.grid)?
                .into_iter()
                .map(|u| {
                    let value = funk_transform(|v| body.radial_unchecked(v).powi(*power), &u, level)?;
                    Ok(DirectionalValue {
                        direction: u,
                        value,
                        error_estimate: None,
                        low_confidence: None,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            emit(&rows, direction.is_some(), c.format, out)?;
        }
        Command::Inverse {
            body,
            method,
            direction,
            kmax,
            smoothing,
        } => {
            let body = load(body)?;
            let grid = c.grid.unwrap_or(DEFAULT_GRID);
            match method {
                InverseMethod::Helgason => {
                    let g = ZonalFunction::from_body(&body, grid, *kmax)?;
                    let inv = helgason_inverse_zonal(&g)?;
                    if let Some(w) = &inv.warning {
                        eprintln!("warning: {w}");
                    }
                    emit(&zonal_rows(&inv.function), false, c.format, out)?;
                }
                InverseMethod::Zonal => {
                    let g = ZonalFunction::from_body(&body, grid, *kmax)?;
                    let m = funk_multipliers(body.dim(), *kmax, 8)?;
                    let inv = zonal_inverse(
                        &g,
                        &m,
                        ZonalInverseOptions {
                            smoothing: *smoothing,
                            tail_threshold: DEFAULT_TAIL_THRESHOLD,
                        },
                    )?;
                    emit(&zonal_rows(&inv.function), false, c.format, out)?;
                }
                InverseMethod::Lemma1 => {
                    let mut opts = Lemma1Options::for_body(&body);
                    if let Some(level) = c.level {
                        opts.level = level;
                    }
                    let rows = directions(body.dim(), direction, c.grid)?
                        .into_iter()
                        .map(|u| {
                            let d = lemma1_inverse_with(&body, &u, opts)?;
                            Ok(DirectionalValue {
                                direction: u,
                                value: d.value,
                                error_estimate: Some(d.error_estimate),
                                low_confidence: Some(d.low_confidence),
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    emit(&rows, direction.is_some(), c.format, out)?;
                }
            }
        }
        Command::Istest { body, method } => {
            let body = load(body)?;
            let use_lemma1 = match method {
                TestMethod::Lemma1 => true,
                TestMethod::Zonal => false,
                TestMethod::Auto => body.dim() == 4,
            };
            let verdict = if use_lemma1 {
                let mut opts = R4Options::default();
                if let Some(g) = c.grid {
                    opts.grid_size = g;
                }
                if let Some(level) = c.level {
                    opts.lemma1 = Some(Lemma1Options {
                        level,
                        ..Lemma1Options::for_body(&body)
                    });
                }
                is_intersection_body_r4(&body, opts)?
            } else {
                let mut opts = ZonalOptions {
                    smoothing: Smoothing::Auto,
                    ..Default::default()
                };
                if let Some(g) = c.grid {
                    opts.grid = g;
                }
                is_intersection_body_zonal(&body, opts)?
            };
            if verdict.verdict == Verdict::No {
                status = EXIT_NEGATIVE;
            }
            emit(&[verdict], true, c.format, out)?;
        }
        Command::Bp { k, l, samples } | Command::Gbp { k, l, samples, .. } => {
            let (k, l) = (load(k)?, load(l)?);
            let opts = BpOptions {
                samples: *samples,
                seed: c.seed,
                slice_level: c.level,
                ..Default::default()
            };
            let report = match &cli.command {
                Command::Gbp { i, .. } => gbp_check(&k, &l, *i, &opts)?,
                _ => bp_check(&k, &l, &opts)?,
            };
            if report.verdict == BpVerdict::Violation {
                status = EXIT_NEGATIVE;
            }
            emit(&[report], true, c.format, out)?;
        }
        Command::Minmax { body } => {
            let body = load(body)?;
            let level = c.level.unwrap_or_else(|| default_minmax_section_level(&body));
            let rec = minmax_ratio(&body, c.grid.unwrap_or(256), Some(level), None)?;
            emit(&[rec], true, c.format, out)?;
        }
        Command::SlicingTable {
            family,
            half_height,
            from,
            to,
        } => {
            let fam = match family {
                TableFamily::Cube => SlicingFamily::Cube,
                TableFamily::Ball => SlicingFamily::Ball,
                TableFamily::Cylinder => SlicingFamily::Cylinder {
                    half_height: *half_height,
                },
            };
            if from > to {
                return Err(contract(format!("empty dimension range {from}..={to}")));
            }
            let rows = slicing_table(fam, *from..=*to)?;
            emit(&rows, false, c.format, out)?;
        }
        Command::Concavity {
            body,
            direction,
            points,
        } => {
            let body = load(body)?;
            let u = parse_direction(direction, body.dim())?;
            let level = c.level.unwrap_or(DEFAULT_LEVEL);
            let rep = bm_concavity_check(&body, &u, *points, level)?;
            if !rep.concave {
                status = EXIT_NEGATIVE;
            }
            emit(&[rep], true, c.format, out)?;
        }
    }
    Ok(status)
}

/// Parses arguments, configures the worker pool, runs, and reports errors on
/// standard error. Returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Some(w) = cli.common.workers {
        if w == 0 {
            eprintln!("error: --workers must be at least 1");
            return EXIT_INPUT;
        }
        // The global pool can only be set once per process; later calls keep the first.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
    let result = match &cli.common.out {
        Some(path) => match std::fs::File::create(path) {
            Ok(file) => {
                let mut w = std::io::BufWriter::new(file);
                let r = run(&cli, &mut w);
                w.flush().map(|_| r).unwrap_or_else(|e| Err(contract(format!("write failed: {e}"))))
            }
            Err(e) => Err(contract(format!("{}: {e}", path.display()))),
        },
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            run(&cli, &mut lock)
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}
