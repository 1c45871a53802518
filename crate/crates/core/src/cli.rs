//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or invalid arguments, 2 solver failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::barrier::{self, BarrierModel};
use crate::geometry::{self, BlackHoleParams};
use crate::output::{write_document, Document, Format, Record, Value};
use crate::recovery::{self, classify_resonance, ProbeMode, DEFAULT_AXIS_TOL};
use crate::spectrum::{self, Method, QnmWindow, Shooter, ShootingConfig, Sign};
use crate::zscan::{ComplexRect, ScanConfig};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "qnm",
    version,
    about = "Scattering resonances and single-mode parameter recovery"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format (defaults to csv for tables, json for single records).
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rectangular barrier V = 1 on [-L, L].
    #[command(subcommand)]
    Barrier(BarrierCmd),
    /// De Sitter-Schwarzschild black holes.
    #[command(subcommand)]
    Sds(SdsCmd),
    /// Resonance map: pseudo-poles and shooting zeros as CSV rows (re, im, source, l, k, confidence).
    Map(MapArgs),
}

#[derive(Debug, Subcommand)]
enum BarrierCmd {
    /// Resonances σ of the barrier: zeros of the denominator K(σ) of r and t.
    Resonances {
        /// Half-width L of the barrier.
        #[arg(long = "L")]
        length: f64,
        /// Search window re_min,re_max,im_min,im_max.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_window, default_value = "0.01,5,-2,-0.01")]
        window: ComplexRect,
        /// Refinement tolerance for the zeros.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Half-width L recovered from one resonance σ.
    Recover {
        /// Resonance as re,im.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
        sigma: Complex64,
    },
}

#[derive(Debug, Args, Clone, Copy)]
struct ModelArgs {
    /// Black hole mass m.
    #[arg(long)]
    m: f64,
    /// Cosmological constant Λ.
    #[arg(long = "Lambda")]
    cosmological: f64,
}

#[derive(Debug, Args, Clone, Copy)]
struct ShootingArgs {
    /// Start integration where |V| < xmax_tol · |λ|².
    #[arg(long, default_value_t = 1e-10)]
    xmax_tol: f64,
    /// Relative tolerance of the ODE integrator.
    #[arg(long, default_value_t = 1e-10)]
    rtol: f64,
    /// Tortoise coordinate of the matching point.
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    match_point: f64,
    /// k_cap in the damping cap |Im λ| ≤ 0.9 min(β_bH, |β_sI|)(k_cap + 1).
    #[arg(long, default_value_t = 2.0)]
    damping_cap: f64,
    /// Contour rotation angle in radians (chosen automatically if absent).
    #[arg(long)]
    rotation: Option<f64>,
}

impl ShootingArgs {
    fn config(&self) -> Result<ShootingConfig, CliError> {
        positive("--xmax-tol", self.xmax_tol)?;
        positive("--rtol", self.rtol)?;
        finite("--match-point", self.match_point)?;
        if !(self.damping_cap.is_finite() && self.damping_cap >= 0.0) {
            return Err(CliError::usage("--damping-cap must be a nonnegative number"));
        }
        if let Some(t) = self.rotation {
            if !(t > 0.0 && t < std::f64::consts::FRAC_PI_2) {
                return Err(CliError::usage("--rotation must lie in (0, π/2)"));
            }
        }
        Ok(ShootingConfig {
            xmax_tol: self.xmax_tol,
            rtol: self.rtol,
            match_point: self.match_point,
            damping_cap: self.damping_cap,
            rotation: self.rotation,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Lattice,
    Shooting,
}

/// Which rows a resonance map contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MapSource {
    Lattice,
    Shooting,
    Both,
}

#[derive(Debug, Subcommand)]
enum SdsCmd {
    /// Horizon radii r_bH, r_sI, r_0 and surface gravities β_bH, β_sI.
    Horizons(ModelArgs),
    /// Pseudo-pole lattice μ = (±(l+1/2) - i(k+1/2)/2) c(m).
    Lattice {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 5)]
        l_max: u32,
        #[arg(long, default_value_t = 2)]
        k_max: u32,
    },
    /// Quasinormal modes λ of angular momentum l inside a window.
    Qnm {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        l: u32,
        /// Search window re_min,re_max,im_min,im_max (lower half-plane).
        #[arg(long, allow_hyphen_values = true, value_parser = parse_window)]
        window: ComplexRect,
        #[arg(long, value_enum, default_value = "shooting")]
        method: MethodArg,
        #[command(flatten)]
        shooting: ShootingArgs,
    },
    /// Mass m̂ from one mode by inverting the pseudo-pole lattice.
    /// Without --l and --k every index hypothesis is scanned.
    RecoverLattice {
        /// Mode as re,im.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
        lambda: Complex64,
        #[arg(long = "Lambda")]
        cosmological: f64,
        #[arg(long, requires = "k")]
        l: Option<u32>,
        #[arg(long, requires = "l")]
        k: Option<u32>,
        /// Sign of Re μ (+ or -); taken from λ if absent.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_sign)]
        sign: Option<Sign>,
        /// Phase-defect gate in radians.
        #[arg(long, default_value_t = recovery::DEFAULT_PHASE_GATE)]
        gate: f64,
        #[arg(long, default_value_t = 10)]
        l_max: u32,
        #[arg(long, default_value_t = 5)]
        k_max: u32,
    },
    /// Mass m̂ from one mode by tracking the shooting zero in m.
    RecoverNumeric {
        /// Mode as re,im.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
        lambda: Complex64,
        #[arg(long = "Lambda")]
        cosmological: f64,
        #[arg(long)]
        l: u32,
        /// Starting mass.
        #[arg(long)]
        m_init: f64,
        /// Target |λ(m̂) - λ*|.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        shooting: ShootingArgs,
    },
    /// Condition |dλ/dm|⁻¹ and Hölder exponent N of the mass-to-mode map at m.
    Stability {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        l: u32,
        #[arg(long, default_value_t = 0)]
        k: u32,
        #[arg(long, value_enum, default_value = "lattice")]
        mode: MethodArg,
        #[command(flatten)]
        shooting: ShootingArgs,
    },
}

#[derive(Debug, Args)]
struct MapArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 5)]
    l_max: u32,
    #[arg(long, default_value_t = 2)]
    k_max: u32,
    /// Restrict rows to this window re_min,re_max,im_min,im_max.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_window)]
    window: Option<ComplexRect>,
    #[arg(long, value_enum, default_value = "lattice")]
    source: MapSource,
    #[command(flatten)]
    shooting: ShootingArgs,
}

fn parse_numbers(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != n {
        return Err(format!("expected {n} comma-separated numbers, got {:?}", s));
    }
    parts
        .iter()
        .map(|p| {
            p.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("{p:?} is not a finite number"))
        })
        .collect()
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let v = parse_numbers(s, 2)?;
    Ok(Complex64::new(v[0], v[1]))
}

fn parse_window(s: &str) -> Result<ComplexRect, String> {
    let v = parse_numbers(s, 4)?;
    ComplexRect::new(v[0], v[1], v[2], v[3]).map_err(|e| e.to_string())
}

fn parse_sign(s: &str) -> Result<Sign, String> {
    match s {
        "+" | "plus" | "1" | "+1" => Ok(Sign::Plus),
        "-" | "minus" | "-1" => Ok(Sign::Minus),
        _ => Err(format!("sign must be + or -, got {s:?}")),
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Solver(Error),
    Io(io::Error),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

impl<E: Into<Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Solver(e.into())
    }
}

fn positive(flag: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(CliError::usage(format!("{flag} must be positive, got {x}")))
    }
}

fn finite(flag: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::usage(format!("{flag} must be finite, got {x}")))
    }
}

fn params(m: f64, cosmological: f64) -> Result<BlackHoleParams, CliError> {
    BlackHoleParams::new(m, cosmological).map_err(|e| {
        CliError::usage(format!(
            "{e} [GeometryError::InadmissibleParams]; remedy: {}",
            remedy("GeometryError::InadmissibleParams")
        ))
    })
}

/// Qualified name of the innermost error variant, e.g.
/// `SpectrumError::DampingCapExceeded`.
pub fn error_name(e: &Error) -> String {
    fn variant<T: std::fmt::Debug>(x: &T) -> String {
        format!("{x:?}").chars().take_while(|c| c.is_alphanumeric()).collect()
    }
    fn zscan(e: &crate::zscan::ZscanError) -> String {
        if let crate::zscan::ZscanError::Evaluation(inner) = e {
            if let Some(s) = inner.downcast_ref::<spectrum::SpectrumError>() {
                return spectrum_name(s);
            }
        }
        format!("ZscanError::{}", variant(e))
    }
    fn spectrum_name(e: &spectrum::SpectrumError) -> String {
        match e {
            spectrum::SpectrumError::Zscan(z) => zscan(z),
            spectrum::SpectrumError::Geometry(g) => format!("GeometryError::{}", variant(g)),
            _ => format!("SpectrumError::{}", variant(e)),
        }
    }
    match e {
        Error::Zscan(z) => zscan(z),
        Error::Barrier(barrier::BarrierError::Zscan(z)) => zscan(z),
        Error::Barrier(b) => format!("BarrierError::{}", variant(b)),
        Error::Geometry(g) => format!("GeometryError::{}", variant(g)),
        Error::Spectrum(s) => spectrum_name(s),
        Error::Recovery(recovery::RecoveryError::Spectrum(s)) => spectrum_name(s),
        Error::Recovery(recovery::RecoveryError::Geometry(g)) => format!("GeometryError::{}", variant(g)),
        Error::Recovery(r) => format!("RecoveryError::{}", variant(r)),
    }
}

/// One-line remedy for a qualified error name.
pub fn remedy(name: &str) -> &'static str {
    match name.split("::").last().unwrap_or("") {
        "DegenerateRect" => "give a window with re_min < re_max and im_min < im_max",
        "BoundaryZero" => "shift or resize the window so that no zero lies on its edge",
        "NonIntegerWinding" => "shrink the window; the function varies too fast along its edge",
        "NegativeWinding" => "choose a window free of poles",
        "MaxDepthExceeded" => "zeros are clustered; shrink the window or loosen --tol",
        "NoConvergence" => "loosen --tol or move the window",
        "Evaluation" => "check that the function can be evaluated on the whole window",
        "InvalidWidth" => "pass --L > 0",
        "BranchPointInput" => "avoid σ = 0 and σ = ±1",
        "WindowOnBranchCut" => "keep the window off the real segment [-1, 1], e.g. with im_max < 0",
        "DegenerateResonance" => "σ must have a nonzero imaginary part",
        "NonPositiveLength" => "σ is not a barrier resonance; check the sign of Im σ",
        "InadmissibleParams" => "choose m > 0 and Λ > 0 with 9 m² Λ < 1",
        "OutOfDomain" => "r must lie strictly between the horizons",
        "DampingCapExceeded" => "keep |Im λ| below the cap or raise --damping-cap",
        "AxisFrequency" => "use a frequency with Re λ ≠ 0",
        "InvalidRotation" => "omit --rotation or choose a larger angle",
        "InvalidWindow" => "use a window in Im λ < 0 that does not straddle Re λ = 0",
        "StiffIntegration" => "loosen --rtol or raise --xmax-tol",
        "ExcludedResonance" => "modes on the imaginary axis (or 0) carry no mass information; use an off-axis mode",
        "InconsistentIndices" => "check --l, --k and --sign, or omit them for a blind scan",
        "NoLocalResonance" => "start closer to the mode (adjust --m-init, --l or the window)",
        "NonConvergence" => "adjust --m-init or loosen --tol",
        "DegenerateSlope" => "the mode does not move with m here; pick another mode",
        _ => "check the arguments",
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("QNM_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::usage(format!("QNM_THREADS must be a positive integer, got {v:?}")))?;
    // the global pool can be set once per process; later calls keep it
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `argv` (including the program name), runs the command and writes
/// its output to `out` (or `--output`). Diagnostics go to `err`.
pub fn dispatch<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = configure_threads().and_then(|_| run(&cli));
    let written = result.and_then(|(doc, columns, default)| {
        let format = match cli.format {
            Some(FormatArg::Json) => Format::Json,
            Some(FormatArg::Csv) => Format::Csv,
            None => default,
        };
        match &cli.output {
            Some(path) => {
                let mut f = BufWriter::new(File::create(path).map_err(CliError::Io)?);
                write_document(&doc, columns, format, &mut f).map_err(CliError::Io)?;
                f.flush().map_err(CliError::Io)
            }
            None => write_document(&doc, columns, format, out).map_err(CliError::Io),
        }
    });
    match written {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Solver(e)) => {
            let name = error_name(&e);
            let _ = writeln!(err, "error[{name}]: {e}");
            let _ = writeln!(err, "remedy: {}", remedy(&name));
            EXIT_SOLVER
        }
        Err(CliError::Io(e)) => {
            let _ = writeln!(err, "error: cannot write output: {e}");
            EXIT_SOLVER
        }
    }
}

type Output = (Document, &'static [&'static str], Format);

const RESONANCE_COLUMNS: &[&str] = &["re", "im", "multiplicity", "residual"];
const LATTICE_COLUMNS: &[&str] = &["l", "k", "sign", "re", "im", "scale"];
const QNM_COLUMNS: &[&str] = &["re", "im", "l", "k", "residual", "source", "confidence"];
pub const MAP_COLUMNS: &[&str] = &["re", "im", "source", "l", "k", "confidence"];
const BLIND_COLUMNS: &[&str] = &["l", "k", "sign", "m_hat", "residual", "condition", "holder_N"];

fn run(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Barrier(BarrierCmd::Resonances { length, window, tol }) => {
            let model = BarrierModel::new(*length).map_err(|e| {
                CliError::usage(format!(
                    "{e} [BarrierError::InvalidWidth]; remedy: {}",
                    remedy("InvalidWidth")
                ))
            })?;
            positive("--tol", *tol)?;
            let cfg = ScanConfig {
                tol: *tol,
                ..ScanConfig::default()
            };
            let zeros = barrier::barrier_resonances_with(&model, window, &cfg)?;
            let rows = zeros
                .iter()
                .map(|z| {
                    Record::new()
                        .with("re", z.location.re)
                        .with("im", z.location.im)
                        .with("multiplicity", z.multiplicity)
                        .with("residual", z.residual)
                })
                .collect();
            Ok((Document::Table(rows), RESONANCE_COLUMNS, Format::Csv))
        }
        Command::Barrier(BarrierCmd::Recover { sigma }) => {
            let length = barrier::recover_length(*sigma)?;
            let rec = Record::new().with("sigma", *sigma).with("L", length);
            Ok((Document::Record(rec), &[], Format::Json))
        }
        Command::Sds(cmd) => run_sds(cmd),
        Command::Map(args) => {
            let p = params(args.model.m, args.model.cosmological)?;
            let cfg = args.shooting.config()?;
            let rows = resonance_map(&p, args.l_max, args.k_max, args.window.as_ref(), args.source, &cfg)?;
            Ok((Document::Table(rows), MAP_COLUMNS, Format::Csv))
        }
    }
}

fn run_sds(cmd: &SdsCmd) -> Result<Output, CliError> {
    match cmd {
        SdsCmd::Horizons(model) => {
            let p = params(model.m, model.cosmological)?;
            let h = geometry::horizons(&p);
            let rec = Record::new()
                .with("m", p.mass())
                .with("Lambda", p.lambda())
                .with("r_bH", h.r_bh)
                .with("r_sI", h.r_si)
                .with("r_0", h.r_0)
                .with("beta_bH", h.beta_bh)
                .with("beta_sI", h.beta_si);
            Ok((Document::Record(rec), &[], Format::Json))
        }
        SdsCmd::Lattice { model, l_max, k_max } => {
            let p = params(model.m, model.cosmological)?;
            let rows = spectrum::pseudo_poles(&p, *l_max, *k_max)
                .iter()
                .map(|pt| {
                    Record::new()
                        .with("l", pt.l)
                        .with("k", pt.k)
                        .with("sign", pt.re_sign.symbol())
                        .with("re", pt.mu.re)
                        .with("im", pt.mu.im)
                        .with("scale", pt.scale)
                })
                .collect();
            Ok((Document::Table(rows), LATTICE_COLUMNS, Format::Csv))
        }
        SdsCmd::Qnm {
            model,
            l,
            window,
            method,
            shooting,
        } => {
            let p = params(model.m, model.cosmological)?;
            let cfg = shooting.config()?;
            let rows = match method {
                MethodArg::Lattice => {
                    let w = QnmWindow::new(*window, *l, Method::Lattice)?;
                    spectrum::qnm_lattice(&p, &w)
                        .iter()
                        .map(|pt| {
                            Record::new()
                                .with("re", pt.mu.re)
                                .with("im", pt.mu.im)
                                .with("l", pt.l)
                                .with("k", pt.k)
                                .with("residual", 0.0)
                                .with("source", "lattice")
                                .with("confidence", "exact")
                        })
                        .collect()
                }
                MethodArg::Shooting => {
                    let w = QnmWindow::new(*window, *l, Method::Shooting)?;
                    spectrum::qnm_shooting(&p, &w, &cfg)?
                        .iter()
                        .map(|z| {
                            Record::new()
                                .with("re", z.location.re)
                                .with("im", z.location.im)
                                .with("l", *l)
                                .with("k", Value::Null)
                                .with("residual", z.residual)
                                .with("source", "shooting")
                                .with("confidence", confidence(*l))
                        })
                        .collect()
                }
            };
            Ok((Document::Table(rows), QNM_COLUMNS, Format::Csv))
        }
        SdsCmd::RecoverLattice {
            lambda,
            cosmological,
            l,
            k,
            sign,
            gate,
            l_max,
            k_max,
        } => {
            positive("--Lambda", *cosmological)?;
            positive("--gate", *gate)?;
            let class = classify_resonance(*lambda, DEFAULT_AXIS_TOL);
            match (l, k) {
                (Some(l), Some(k)) => {
                    let sign = sign.unwrap_or(Sign::of(lambda.re));
                    let r = recovery::recover_mass_lattice_gated(*lambda, *cosmological, *l, *k, sign, *gate)?;
                    let rec = recovery_record(*lambda, *cosmological, Some(*l), Some(*k), sign, &r, class);
                    Ok((Document::Record(rec), &[], Format::Json))
                }
                _ => {
                    if class != recovery::ResonanceClass::Usable {
                        return Err(recovery::RecoveryError::ExcludedResonance { lambda: *lambda, class }.into());
                    }
                    let rows = recovery::recover_mass_lattice_blind(*lambda, *cosmological, *l_max, *k_max)
                        .iter()
                        .filter(|h| sign.is_none_or(|s| s == h.sign) && h.result.residual <= *gate)
                        .map(|h| {
                            Record::new()
                                .with("l", h.l)
                                .with("k", h.k)
                                .with("sign", h.sign.symbol())
                                .with("m_hat", h.result.m_hat)
                                .with("residual", h.result.residual)
                                .with("condition", h.result.condition)
                                .with("holder_N", h.result.holder_n)
                        })
                        .collect();
                    Ok((Document::Table(rows), BLIND_COLUMNS, Format::Json))
                }
            }
        }
        SdsCmd::RecoverNumeric {
            lambda,
            cosmological,
            l,
            m_init,
            tol,
            shooting,
        } => {
            positive("--Lambda", *cosmological)?;
            positive("--tol", *tol)?;
            params(*m_init, *cosmological)?;
            let cfg = recovery::NumericConfig {
                shooting: shooting.config()?,
                ..recovery::NumericConfig::default()
            };
            let r = recovery::recover_mass_numeric_with(*lambda, *cosmological, *l, *m_init, *tol, &cfg)?;
            let class = classify_resonance(*lambda, DEFAULT_AXIS_TOL);
            let rec = recovery_record(*lambda, *cosmological, Some(*l), None, Sign::of(lambda.re), &r, class)
                .with("iterations", r.iterations)
                .with("delta_neighborhood", r.delta_neighborhood);
            Ok((Document::Record(rec), &[], Format::Json))
        }
        SdsCmd::Stability {
            model,
            l,
            k,
            mode,
            shooting,
        } => {
            let p = params(model.m, model.cosmological)?;
            let probe = match mode {
                MethodArg::Lattice => ProbeMode::Lattice,
                MethodArg::Shooting => ProbeMode::Shooting,
            };
            let est = recovery::stability_probe(p.mass(), p.lambda(), *l, *k, probe, &shooting.config()?)?;
            let rec = Record::new()
                .with("m", p.mass())
                .with("Lambda", p.lambda())
                .with("l", *l)
                .with("k", *k)
                .with(
                    "mode",
                    match mode {
                        MethodArg::Lattice => "lattice",
                        MethodArg::Shooting => "shooting",
                    },
                )
                .with("lambda", est.lambda)
                .with("condition", est.condition)
                .with("holder_N", est.holder_n);
            Ok((Document::Record(rec), &[], Format::Json))
        }
    }
}

fn recovery_record(
    lambda: Complex64,
    cosmological: f64,
    l: Option<u32>,
    k: Option<u32>,
    sign: Sign,
    r: &recovery::RecoveryResult,
    class: recovery::ResonanceClass,
) -> Record {
    Record::new()
        .with("lambda", lambda)
        .with("Lambda", cosmological)
        .with("l", l)
        .with("k", k)
        .with("sign", sign.symbol())
        .with("m_hat", r.m_hat)
        .with("residual", r.residual)
        .with("condition", r.condition)
        .with("holder_N", r.holder_n)
        .with("class", class.name())
}

fn confidence(l: u32) -> &'static str {
    if spectrum::shooting_confident(l) {
        "high"
    } else {
        "low"
    }
}

/// Rows for the resonance map, ordered by source, `l`, `k`, then real part.
///
/// Without a window, shooting zeros are sought in each lattice column up to
/// the damping cap and numbered by increasing damping.
pub fn resonance_map(
    params: &BlackHoleParams,
    l_max: u32,
    k_max: u32,
    window: Option<&ComplexRect>,
    source: MapSource,
    cfg: &ShootingConfig,
) -> Result<Vec<Record>, Error> {
    let mut rows = Vec::new();
    if matches!(source, MapSource::Lattice | MapSource::Both) {
        for pt in spectrum::pseudo_poles(params, l_max, k_max) {
            if window.is_none_or(|w| w.contains(pt.mu, 0.0)) {
                rows.push(map_row(pt.mu, "lattice", pt.l, Some(pt.k), "exact"));
            }
        }
    }
    if matches!(source, MapSource::Shooting | MapSource::Both) {
        for l in 0..=l_max {
            let sh = Shooter::new(params, l, cfg);
            let mut zeros: Vec<(Option<u32>, Complex64)> = Vec::new();
            match window {
                Some(w) => {
                    let lower =
                        ComplexRect::new(w.re_min(), w.re_max(), w.im_min(), w.im_max().min(-1e-9)).map_err(|_| {
                            spectrum::SpectrumError::InvalidWindow("window has no part below the real axis".into())
                        })?;
                    for half in split_at_axis(&lower) {
                        zeros.extend(sh.zeros_in(&half)?.iter().map(|z| (None, z.location)));
                    }
                }
                None => {
                    for sign in [Sign::Plus, Sign::Minus] {
                        let mut col = sh.zeros_in(&sh.overtone_window(sign)?)?;
                        col.sort_by(|a, b| a.location.im.abs().total_cmp(&b.location.im.abs()));
                        zeros.extend(
                            col.iter()
                                .enumerate()
                                .filter(|(k, _)| *k as u32 <= k_max)
                                .map(|(k, z)| (Some(k as u32), z.location)),
                        );
                    }
                }
            }
            zeros.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.re.total_cmp(&b.1.re)));
            for (k, z) in zeros {
                rows.push(map_row(z, "shooting", l, k, confidence(l)));
            }
        }
    }
    Ok(rows)
}

fn split_at_axis(w: &ComplexRect) -> Vec<ComplexRect> {
    if w.re_min() > 0.0 || w.re_max() < 0.0 {
        return vec![*w];
    }
    let eps = 1e-6 * w.width();
    [(w.re_min(), -eps), (eps, w.re_max())]
        .into_iter()
        .filter_map(|(a, b)| ComplexRect::new(a, b, w.im_min(), w.im_max()).ok())
        .collect()
}

fn map_row(z: Complex64, source: &str, l: u32, k: Option<u32>, confidence: &str) -> Record {
    Record::new()
        .with("re", z.re)
        .with("im", z.im)
        .with("source", source)
        .with("l", l)
        .with("k", k)
        .with("confidence", confidence)
}
