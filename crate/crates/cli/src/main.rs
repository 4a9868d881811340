//! `simrad`: phantoms, forward transforms, filtering, inversion and the
//! residual checks from the command line.
//!
//! Results go to files; a block of `key=value` metrics goes to stdout.
//! Exit codes: 0 success, 1 runtime error (error name on stderr), 2 bad
//! arguments.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use simrad::filter::{apply_multiplier, MultiplierSpec};
use simrad::format::{load_sinogram, load_volume, save_sinogram, save_volume};
use simrad::grid::log_wavelet;
use simrad::invert::{invert_direct_fourier, invert_fbp, invert_wavelet, wavelet_energy, GroupLattice, LatticeConfig};
use simrad::verify::{run_on, Check, VerifyConfig};
use simrad::xform::{radon_plane, xray, LineGeometry, PlaneGeometry, Sinogram};
use simrad::{Error, Phantom, Volume};

/// Fraction of each axis used for interior error metrics.
const INTERIOR: f64 = 0.8;

#[derive(Parser, Debug)]
#[command(name = "simrad", version, about = "Radon and X-ray transforms on R^3 with SIM(3) tools")]
struct Cli {
    /// worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// seed for the randomized checks
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a Gaussian phantom on a centered grid.
    Gen {
        #[arg(long, default_value = "gaussian")]
        phantom: String,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Plane Radon transform of a volume.
    Radon {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        angles: AngleArgs,
        #[arg(long, default_value_t = 129)]
        nt: usize,
        #[arg(long, default_value_t = 6.0)]
        tmax: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// X-ray (line) transform of a volume.
    Xray {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        angles: AngleArgs,
        #[arg(long, default_value_t = 81)]
        nu: usize,
        #[arg(long, default_value_t = 6.0)]
        uvmax: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Radial Fourier multiplier |freq|^p in the offset variable(s).
    Filter {
        #[arg(long = "in")]
        input: PathBuf,
        /// exponent p; default is the unitarizing multiplier of the geometry
        #[arg(long)]
        exponent: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Filtered back-projection.
    InvertFbp(InvertArgs),
    /// Direct Fourier inversion through the slice theorem.
    InvertFourier(InvertArgs),
    /// Wavelet-frame inversion over a SIM(3) lattice.
    InvertWavelet {
        #[arg(long = "in")]
        input: PathBuf,
        /// lattice refinement level, 0 to 2
        #[arg(long, default_value_t = 0)]
        level: usize,
        /// width of the Laplacian-of-Gaussian wavelet
        #[arg(long, default_value_t = 1.25)]
        sigma: f64,
        /// radius of the ball holding the object
        #[arg(long, default_value_t = 2.0)]
        radius: f64,
        /// grid of the wavelet and of the reconstruction
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long, default_value_t = 0.3)]
        h: f64,
        /// report the coefficient energy only, skip synthesis
        #[arg(long)]
        energy_only: bool,
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Residual checks of the operator identities.
    Verify {
        /// check to run (repeatable); default all
        #[arg(long = "check")]
        checks: Vec<String>,
        /// volume to check instead of the built-in phantom
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// invert the character in the intertwining sweep (negative control)
        #[arg(long)]
        ablate_chi: bool,
        /// print the report as JSON instead of key=value lines
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Debug)]
struct GridArgs {
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 0.15)]
    h: f64,
}

#[derive(Args, Debug)]
struct AngleArgs {
    #[arg(long, default_value_t = 32)]
    ntheta: usize,
    #[arg(long, default_value_t = 32)]
    nphi: usize,
}

#[derive(Args, Debug)]
struct InvertArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    /// ground truth for the error metric
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Usage(String),
    Runtime(Error),
    ChecksFailed(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

fn metric(key: &str, value: impl std::fmt::Display) {
    println!("{key}={value}");
}

fn distinct(input: &Path, out: &Path) -> Outcome {
    if input == out {
        return Err(Failure::Usage(format!("input and output are the same path: {}", input.display())));
    }
    Ok(())
}

fn positive(name: &str, x: f64) -> Outcome {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Failure::Usage(format!("--{name} must be positive, got {x}")));
    }
    Ok(())
}

fn report_error(reconstruction: &Volume, reference: Option<&PathBuf>) -> Outcome {
    let Some(path) = reference else { return Ok(()) };
    let truth = load_volume(path)?;
    if !truth.same_grid(reconstruction) {
        return Err(Error::GeometryMismatch("reference volume is on a different grid".into()).into());
    }
    metric("rel_error", format!("{:.6e}", reconstruction.relative_error(&truth, INTERIOR)));
    Ok(())
}

fn sinogram_metrics(s: &Sinogram) {
    metric("kind", s.geometry().name());
    metric("samples", s.data().len());
    metric("norm", format!("{:.6e}", s.norm()));
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Gen { phantom, grid, out } => {
            positive("h", grid.h)?;
            let v = Phantom::named(&phantom)?.sample(grid.n, grid.h)?;
            save_volume(&out, &v)?;
            metric("n", v.n());
            metric("h", v.h());
            metric("norm", format!("{:.6e}", v.norm()));
        }
        Command::Radon { input, angles, nt, tmax, out } => {
            distinct(&input, &out)?;
            positive("tmax", tmax)?;
            let v = load_volume(&input)?;
            let geom = PlaneGeometry::new(angles.ntheta, angles.nphi, nt, tmax)?;
            let s = Sinogram::Plane(radon_plane(&v, &geom)?);
            save_sinogram(&out, &s)?;
            sinogram_metrics(&s);
        }
        Command::Xray { input, angles, nu, uvmax, out } => {
            distinct(&input, &out)?;
            positive("uvmax", uvmax)?;
            let v = load_volume(&input)?;
            let geom = LineGeometry::new(angles.ntheta, angles.nphi, nu, uvmax)?;
            let s = Sinogram::Line(xray(&v, &geom)?);
            save_sinogram(&out, &s)?;
            sinogram_metrics(&s);
        }
        Command::Filter { input, exponent, out } => {
            distinct(&input, &out)?;
            let s = load_sinogram(&input)?;
            let spec = match exponent {
                Some(p) => MultiplierSpec::new(p)?,
                None => MultiplierSpec::unitarization(s.geometry()),
            };
            let f = apply_multiplier(&s, &spec);
            save_sinogram(&out, &f)?;
            metric("exponent", spec.exponent);
            sinogram_metrics(&f);
        }
        Command::InvertFbp(args) => {
            distinct(&args.input, &args.out)?;
            positive("h", args.grid.h)?;
            let s = load_sinogram(&args.input)?;
            let v = invert_fbp(&s, args.grid.n, args.grid.h)?;
            save_volume(&args.out, &v)?;
            metric("norm", format!("{:.6e}", v.norm()));
            report_error(&v, args.reference.as_ref())?;
        }
        Command::InvertFourier(args) => {
            distinct(&args.input, &args.out)?;
            positive("h", args.grid.h)?;
            let s = load_sinogram(&args.input)?;
            let r = invert_direct_fourier(&s, args.grid.n, args.grid.h)?;
            save_volume(&args.out, &r.volume)?;
            metric("coverage", format!("{:.6}", r.coverage()));
            metric("norm", format!("{:.6e}", r.volume.norm()));
            report_error(&r.volume, args.reference.as_ref())?;
        }
        Command::InvertWavelet { input, level, sigma, radius, n, h, energy_only, reference, out } => {
            if let Some(out) = &out {
                distinct(&input, out)?;
            }
            if out.is_none() && !energy_only {
                return Err(Failure::Usage("--out is required unless --energy-only is given".into()));
            }
            positive("sigma", sigma)?;
            positive("radius", radius)?;
            positive("h", h)?;
            let s = load_sinogram(&input)?;
            let psi = log_wavelet(sigma, n, h)?;
            let lattice = GroupLattice::new(&LatticeConfig::level(level, sigma, radius)?, h)?;
            let r = if energy_only { wavelet_energy(&s, &psi, &lattice)? } else { invert_wavelet(&s, &psi, &lattice)? };
            metric("nodes", r.nodes);
            metric("calderon", format!("{:.6e}", r.calderon));
            metric("energy_ratio", format!("{:.6}", r.energy_ratio()));
            for (i, e) in r.scale_energy.iter().enumerate() {
                metric(&format!("scale_energy_{i}"), format!("{:.6e}", e));
            }
            if let Some(v) = &r.volume {
                if let Some(out) = &out {
                    save_volume(out, v)?;
                }
                report_error(v, reference.as_ref())?;
            }
        }
        Command::Verify { checks, input, ablate_chi, json } => {
            let mut config = VerifyConfig { ablate_chi, ..VerifyConfig::default() };
            if !checks.is_empty() {
                config.checks = checks
                    .iter()
                    .map(|c| c.parse::<Check>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| Failure::Usage(format!("unknown check; expected one of: {}", check_names())))?;
            }
            let volume = input.map(load_volume).transpose()?;
            let report = run_on(&config, cli.seed, volume.as_ref());
            if json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.to_text());
            }
            let failed = report.entries.iter().filter(|e| !e.pass).count();
            metric("checks", report.entries.len());
            metric("failed", failed);
            if failed > 0 {
                return Err(Failure::ChecksFailed(failed));
            }
        }
    }
    Ok(())
}

fn check_names() -> String {
    Check::ALL.iter().map(|c| c.name()).collect::<Vec<_>>().join(", ")
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(k) = cli.threads {
        if k == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new().num_threads(k).build_global().expect("thread pool configured once");
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("Run `simrad --help` for usage.");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
        Err(Failure::ChecksFailed(k)) => {
            eprintln!("VerificationFailed: {k} check(s) above tolerance");
            ExitCode::from(1)
        }
    }
}
