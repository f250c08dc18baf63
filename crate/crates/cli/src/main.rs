use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use swhomog::coefficients::HomogenizedCoefficients;
use swhomog::dispersion::{self, Form};
use swhomog::harness::{self, ScenarioConfig};
use swhomog::homogenized_solver::HomogenizedSolver;
use swhomog::traveling_wave::{self, solitary_wave_o3, solitary_wave_o5};
use swhomog::unit_cell::identities::{verify_identities, Status};
use swhomog::unit_cell::PeriodicProfile;
use swhomog::{Error, Result};

const OUT_ENV: &str = "SWHOMOG_OUT_DIR";

#[derive(Parser)]
#[command(name = "swhomog", version, about = "Homogenized shallow-water waves over periodic bathymetry")]
struct Cli {
    /// Output directory (defaults to $SWHOMOG_OUT_DIR, then the working directory).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args, Clone)]
struct Source {
    /// Scenario file.
    #[arg(long, conflicts_with = "profile")]
    config: Option<PathBuf>,
    /// Built-in profile: scenario_a, scenario_b or flat.
    #[arg(long)]
    profile: Option<String>,
    #[arg(long, default_value_t = 9.81)]
    g: f64,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
}

#[derive(Subcommand)]
enum Verb {
    /// Print every homogenized coefficient as `name,value`.
    DumpCoefficients(Source),
    /// Normalized dispersion relation as CSV.
    Dispersion {
        #[arg(long, default_value = "xxt")]
        form: String,
        #[arg(long, default_value_t = 5.0)]
        kmax: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Quartic parameter for `xxt5`; taken from the source when omitted.
        #[arg(long)]
        r: Option<f64>,
        #[command(flatten)]
        source: Source,
    },
    /// Solitary wave profile as CSV.
    TravelingWave {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 3)]
        order: u8,
        /// Speed as a multiple of the averaged long-wave speed.
        #[arg(long, conflicts_with = "amplitude")]
        speed_ratio: Option<f64>,
        /// Target crest height; the speed is searched.
        #[arg(long)]
        amplitude: Option<f64>,
    },
    /// Homogenized run; snapshots as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        order: Option<u8>,
        /// Add the fast-scale reconstruction column.
        #[arg(long)]
        reconstruct: bool,
    },
    /// Finite-volume reference run; snapshots as CSV.
    Reference {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run both solvers and write the comparison report.
    Compare {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the cell-average identity suite.
    VerifyIdentities {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 4096)]
        n: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
}

fn builtin(name: &str) -> Result<PeriodicProfile> {
    match name {
        "scenario_a" => Ok(PeriodicProfile::two_layer(1.0, 0.3)),
        "scenario_b" => Ok(PeriodicProfile::Sinusoidal {
            mean: 0.6,
            amplitude: -0.4,
            phase: 0.0,
        }),
        "flat" => Ok(PeriodicProfile::flat(1.0)),
        _ => Err(Error::InvalidArgument(format!(
            "unknown profile '{name}' (expected scenario_a, scenario_b or flat)"
        ))),
    }
}

impl Source {
    /// `(profile, g, delta)`
    fn resolve(&self) -> Result<(PeriodicProfile, f64, f64)> {
        match (&self.config, &self.profile) {
            (Some(p), _) => {
                let c = ScenarioConfig::load(p)?;
                Ok((c.bathymetry, c.g, c.delta))
            }
            (None, Some(name)) => Ok((builtin(name)?, self.g, self.delta)),
            (None, None) => Err(Error::InvalidArgument("pass --config or --profile".into())),
        }
    }

    fn coefficients(&self) -> Result<(HomogenizedCoefficients, f64)> {
        let (p, g, delta) = self.resolve()?;
        Ok((HomogenizedCoefficients::compute(&p, g)?, delta))
    }
}

fn out_dir(flag: &Option<PathBuf>) -> PathBuf {
    flag.clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn create(dir: &PathBuf, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let f = File::create(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok((path, BufWriter::new(f)))
}

/// Largest real root, or NaN when none is real.
fn principal(p: &dispersion::DispersionPoint) -> f64 {
    p.roots
        .iter()
        .filter(|z| z.im.abs() <= 1e-14 * z.norm().max(1.0))
        .map(|z| z.re)
        .fold(f64::NAN, f64::max)
}

fn run(cli: Cli) -> Result<()> {
    let dir = out_dir(&cli.out_dir);
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.verb {
        Verb::DumpCoefficients(src) => {
            let (c, _) = src.coefficients()?;
            writeln!(out, "name,value")?;
            for (k, v) in c.key_values() {
                writeln!(out, "{k},{v:.16e}")?;
            }
        }
        Verb::Dispersion { form, kmax, points, r, source } => {
            let form = Form::parse(&form)?;
            if !(kmax > 0.0) || points < 2 {
                return Err(Error::InvalidArgument("kmax must be positive and points >= 2".into()));
            }
            let r = match (form, r) {
                (Form::Xxt5, None) => Some(dispersion::quartic_ratio(&source.coefficients()?.0)?),
                (_, r) => r,
            };
            writeln!(out, "K,omega,unstable")?;
            for i in 0..points {
                let k = kmax * (i + 1) as f64 / points as f64;
                let p = dispersion::omega(form, k, r);
                writeln!(out, "{k:.16e},{:.16e},{}", principal(&p), p.unstable())?;
            }
        }
        Verb::TravelingWave { source, order, speed_ratio, amplitude } => {
            let (c, delta) = source.coefficients()?;
            let v = match (speed_ratio, amplitude) {
                (Some(s), _) => s * c.c,
                (None, Some(a)) => traveling_wave::speed_for_amplitude(&c, delta, a, order)?,
                (None, None) => return Err(Error::InvalidArgument("pass --speed-ratio or --amplitude".into())),
            };
            let w3 = solitary_wave_o3(&c, v, delta, None)?;
            let w = match order {
                3 => w3,
                5 => solitary_wave_o5(&c, v, delta, &w3)?,
                _ => return Err(Error::InvalidArgument(format!("order must be 3 or 5, got {order}"))),
            };
            let (path, mut f) = create(&dir, &format!("traveling_wave_o{order}.csv"))?;
            writeln!(f, "xi,eta,deta")?;
            for i in 0..w.xi.len() {
                writeln!(f, "{:.16e},{:.16e},{:.16e}", w.xi[i], w.eta[i], w.deta[i])?;
            }
            f.flush()?;
            writeln!(out, "speed={:.16e} speed_ratio={:.16e} amplitude={:.16e} file={}", v, v / c.c, w.amplitude(), path.display())?;
        }
        Verb::Simulate { config, order, reconstruct } => {
            let cfg = ScenarioConfig::load(&config)?;
            let order = order.unwrap_or(cfg.order);
            let coeffs = cfg.coefficients()?;
            let sim = cfg.run_homogenized(&coeffs, order)?;
            let recon = if reconstruct {
                let mut s = HomogenizedSolver::new(&coeffs, cfg.solver_config(order), cfg.domain.half_length, cfg.domain.m)?;
                Some(
                    sim.snapshots
                        .iter()
                        .map(|st| s.fast_scale_reconstruction(st, &cfg.bathymetry, 1).map(|r| r.1))
                        .collect::<Result<Vec<_>>>()?,
                )
            } else {
                None
            };
            let (path, mut f) = create(&dir, &format!("{}_homogenized_o{order}.csv", cfg.name))?;
            harness::write_homogenized_csv(&mut f, &sim.snapshots, recon.as_deref(), None)?;
            f.flush()?;
            writeln!(
                out,
                "order={order} snapshots={} wall_seconds={:.3} mass_drift={:.3e} file={}",
                sim.snapshots.len(),
                sim.wall_seconds,
                sim.max_mass_drift,
                path.display()
            )?;
        }
        Verb::Reference { config } => {
            let cfg = ScenarioConfig::load(&config)?;
            let run = cfg.run_fv(&cfg.coefficients()?)?;
            let (path, mut f) = create(&dir, &format!("{}_reference.csv", cfg.name))?;
            harness::write_reference_csv(&mut f, &run.snapshots, cfg.domain.cells_per_period, cfg.eta0)?;
            f.flush()?;
            writeln!(
                out,
                "snapshots={} steps={} wall_seconds={:.3} mass_defect={:.3e} file={}",
                run.snapshots.len(),
                run.steps,
                run.wall_seconds,
                run.mass_defect,
                path.display()
            )?;
        }
        Verb::Compare { config } => {
            let cfg = ScenarioConfig::load(&config)?;
            let report = harness::run_comparison(&cfg)?;
            let (path, mut f) = create(&dir, &format!("{}_compare.toml", cfg.name))?;
            f.write_all(report.to_toml_string()?.as_bytes())?;
            f.flush()?;
            for o in &report.orders {
                for s in &o.snapshots {
                    writeln!(out, "order={} t={} linf={:.6e} l2={:.6e} linf_rel={:.4e}", o.order, s.t, s.linf, s.l2, s.linf_rel)?;
                }
                let ratio = report.reference_wall_seconds / o.wall_seconds.max(f64::MIN_POSITIVE);
                writeln!(out, "order={} wall_seconds={:.3} reference_over_homogenized={ratio:.1}", o.order, o.wall_seconds)?;
            }
            writeln!(out, "reference_wall_seconds={:.3} file={}", report.reference_wall_seconds, path.display())?;
        }
        Verb::VerifyIdentities { source, n, tol } => {
            let (p, _, _) = source.resolve()?;
            let checks = verify_identities(&p, n, tol)?;
            let mut failed = 0;
            for c in &checks {
                let tag = match c.status {
                    Status::Pass => "PASS".to_string(),
                    Status::Fail => {
                        failed += 1;
                        "FAIL".to_string()
                    }
                    Status::Skipped(why) => format!("SKIP ({why})"),
                };
                writeln!(out, "{tag} {} residual={:.3e}", c.name, c.residual())?;
            }
            if failed > 0 {
                return Err(Error::InvalidArgument(format!("{failed} identities failed")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error kind=usage message={first:?}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        // downstream closed the pipe (e.g. `| head`)
        Err(Error::Io(m)) if m.contains("os error 32") => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error kind={} message={:?}", e.kind(), e.to_string());
            ExitCode::from(1)
        }
    }
}
