// SPDX-License-Identifier: Apache-2.0

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use dqd_thermo::reservoir::Lead;
use dqd_thermo::sweep::{
    self, emit, evaluate_point, find_critical_points, write_critical, ConfigError, Format, SweepConfig, SweepError,
    DEFAULT_REFINE_TOL,
};
use dqd_thermo::PointReport;

#[derive(Parser)]
#[command(name = "dqd-thermo", version, about = "Double-quantum-dot heat engine / refrigerator sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Voltage sweep for each configured level.
    Sweep(Common),
    /// Row-major (eps, V) map.
    Map(Common),
    /// Voltage sweep plus refinement of band edges and maxima.
    Critical {
        #[command(flatten)]
        common: Common,
        /// Refinement tolerance in mV.
        #[arg(long, default_value_t = DEFAULT_REFINE_TOL)]
        tol: f64,
    },
    /// Evaluates a single point and prints every performance figure.
    Point {
        #[command(flatten)]
        common: Common,
        /// Bias in mV.
        #[arg(long)]
        voltage: f64,
    },
}

#[derive(Args)]
struct Common {
    /// Flat key = value config file; flags override it.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Mean level in meV (replaces the 1-D level list).
    #[arg(long, value_name = "MEV")]
    eps: Option<f64>,
    #[arg(long, value_name = "MEV")]
    delta: Option<f64>,
    #[arg(long, value_name = "MEV")]
    tunnel: Option<f64>,
    #[arg(long, value_name = "MEV")]
    coulomb: Option<f64>,
    #[arg(long = "beta-h", value_name = "PER_MEV")]
    beta_h: Option<f64>,
    #[arg(long = "beta-c", value_name = "PER_MEV")]
    beta_c: Option<f64>,
    #[arg(long = "mu-h", value_name = "MEV")]
    mu_h: Option<f64>,
    #[arg(long = "gamma-h", value_name = "G")]
    gamma_h: Option<f64>,
    #[arg(long = "gamma-c", value_name = "G")]
    gamma_c: Option<f64>,
    #[arg(long = "v-min", value_name = "MV")]
    v_min: Option<f64>,
    #[arg(long = "v-max", value_name = "MV")]
    v_max: Option<f64>,
    #[arg(long = "v-points", value_name = "N")]
    v_points: Option<usize>,
    #[arg(long = "eps-min", value_name = "MEV")]
    eps_min: Option<f64>,
    #[arg(long = "eps-max", value_name = "MEV")]
    eps_max: Option<f64>,
    #[arg(long = "eps-points", value_name = "N")]
    eps_points: Option<usize>,
    #[arg(long, value_name = "csv|json")]
    format: Option<Format>,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads (output does not depend on it).
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<SweepConfig, ConfigError> {
        let mut cfg = match &self.config {
            Some(path) => SweepConfig::from_file(path)?,
            None => SweepConfig::default(),
        };
        let floats = [
            ("eps", self.eps),
            ("delta", self.delta),
            ("tunnel", self.tunnel),
            ("coulomb", self.coulomb),
            ("beta_h", self.beta_h),
            ("beta_c", self.beta_c),
            ("mu_h", self.mu_h),
            ("gamma_h", self.gamma_h),
            ("gamma_c", self.gamma_c),
            ("v_min", self.v_min),
            ("v_max", self.v_max),
            ("eps_min", self.eps_min),
            ("eps_max", self.eps_max),
        ];
        for (key, value) in floats {
            if let Some(v) = value {
                cfg.set(key, &v.to_string())?;
            }
        }
        if let Some(n) = self.v_points {
            cfg.voltage.points = n;
        }
        if let Some(n) = self.eps_points {
            cfg.eps_grid.points = n;
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn print_point(report: &PointReport, cfg: &SweepConfig, eps: f64, voltage: f64) -> io::Result<()> {
    let perf = &report.performance;
    let cur = &report.currents;
    let mut out = io::stdout().lock();
    match cfg.format {
        Format::Json => {
            let doc = json!({
                "eps": eps,
                "V": voltage,
                "energies": report.eigen.energies,
                "populations": report.populations.as_slice(),
                "currents": cur,
                "performance": perf,
                "eta_norm": perf.eta_normalized(),
                "phi_norm": perf.phi_normalized(),
            });
            serde_json::to_writer_pretty(&mut out, &doc)?;
            writeln!(out)
        }
        Format::Csv => {
            let show = |x: Option<f64>| x.map(|v| format!("{v:.12e}")).unwrap_or_else(|| "-".into());
            writeln!(out, "eps          = {eps} meV")?;
            writeln!(out, "V            = {voltage} mV")?;
            writeln!(out, "energies     = {:?}", report.eigen.energies)?;
            writeln!(out, "populations  = {:?}", report.populations.as_slice())?;
            for lead in Lead::BOTH {
                writeln!(
                    out,
                    "I_E_{lead} = {:.12e}  I_M_{lead} = {:.12e}  J_{lead} = {:.12e}",
                    cur.i_energy(lead),
                    cur.i_matter(lead),
                    cur.j_heat(lead)
                )?;
            }
            writeln!(out, "regime       = {}", perf.regime.tag())?;
            writeln!(out, "sigma        = {:.12e}", perf.sigma)?;
            writeln!(out, "eta          = {}", show(perf.eta))?;
            writeln!(out, "phi          = {}", show(perf.phi))?;
            writeln!(out, "eta_norm     = {}", show(perf.eta_normalized()))?;
            writeln!(out, "phi_norm     = {}", show(perf.phi_normalized()))?;
            writeln!(out, "theta        = {}", show(perf.theta))?;
            writeln!(out, "zeta         = {}", show(perf.zeta))?;
            writeln!(out, "carnot_eta   = {:.12e}", perf.carnot_eta)?;
            writeln!(out, "carnot_phi   = {}", show(perf.carnot_phi))?;
            for e in &perf.sigma_by_transition.entries {
                writeln!(out, "sigma[{}->{}, {}] = {:.12e}", e.from, e.to, e.lead, e.value)?;
            }
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), SweepError> {
    let common = match &cli.command {
        Command::Sweep(c) | Command::Map(c) => c,
        Command::Critical { common, .. } | Command::Point { common, .. } => common,
    };
    let cfg = common.load()?;
    if let Some(n) = common.threads {
        // ignore a pool that is already initialized
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let out = cfg.out.as_deref();
    match &cli.command {
        Command::Sweep(_) => {
            let rows = sweep::sweep_levels(&cfg)?;
            emit(&rows, &cfg, cfg.format, out, "sweep")
        }
        Command::Map(_) => {
            let rows = sweep::sweep_2d(&cfg)?;
            emit(&rows, &cfg, cfg.format, out, "map")
        }
        Command::Critical { tol, .. } => {
            let mut points = Vec::new();
            for &eps in &cfg.eps_values {
                let rows = sweep::sweep_voltage(&cfg, eps)?;
                points.push(find_critical_points(&cfg, eps, &rows, *tol)?);
            }
            let display = out.map(|p| p.to_path_buf()).unwrap_or_else(|| "<stdout>".into());
            let io_err = |source| SweepError::Io {
                path: display.clone(),
                source,
            };
            match out {
                Some(p) => {
                    let mut w = io::BufWriter::new(std::fs::File::create(p).map_err(io_err)?);
                    write_critical(&mut w, &points, &cfg, cfg.format).map_err(io_err)?;
                    w.flush().map_err(io_err)
                }
                None => write_critical(&mut io::stdout().lock(), &points, &cfg, cfg.format).map_err(io_err),
            }
        }
        Command::Point { voltage, .. } => {
            let eps = cfg.eps_values[0];
            let report = evaluate_point(&cfg, eps, *voltage)?;
            print_point(&report, &cfg, eps, *voltage).map_err(|source| SweepError::Io {
                path: "<stdout>".into(),
                source,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
