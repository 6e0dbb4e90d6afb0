use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use lensmimo_core::harness::{emit_results, run_experiment, ExperimentConfig, OutputFormat};
use lensmimo_core::{power_response_map, Direction, LensArrayGeometry, PowerModel, PowerTable};

#[derive(Parser)]
#[command(name = "lensmimo", version, about = "Wideband mmWave MIMO link-level simulator with lens antenna arrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo spectral-efficiency comparison from a scenario file.
    SimulateRate(SimulateArgs),
    /// BS power consumption of the three architectures.
    PowerTable(PowerArgs),
    /// Per-element power response of a lens array for given directions.
    LensResponse(LensArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the number of trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides the scenario's).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PowerArgs {
    /// Watts per RF chain.
    #[arg(long, default_value_t = 0.25)]
    p_rf: f64,
    /// Watts per phase shifter.
    #[arg(long, default_value_t = 0.015)]
    p_ps: f64,
    /// Watts per analog switch.
    #[arg(long, default_value_t = 0.005)]
    p_sw: f64,
    #[arg(long, default_value_t = 400)]
    m_upa: usize,
    #[arg(long, default_value_t = 149)]
    m_lens: usize,
    /// RF-chain counts, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = vec![3, 16])]
    m_rf: Vec<usize>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct LensArgs {
    /// Aperture width, wavelengths.
    #[arg(long, default_value_t = 10.0)]
    dy: f64,
    /// Aperture height, wavelengths.
    #[arg(long, default_value_t = 10.0)]
    dz: f64,
    /// Elevation coverage, degrees.
    #[arg(long, default_value_t = 60.0)]
    theta_cov: f64,
    /// Azimuth coverage, degrees.
    #[arg(long, default_value_t = 120.0)]
    phi_cov: f64,
    /// Direction as `elevation,azimuth` in degrees; repeatable.
    #[arg(long = "dir", value_parser = parse_dir, required = true, allow_hyphen_values = true)]
    dirs: Vec<(f64, f64)>,
    /// Write lens_response.csv and lens_response.json here; otherwise CSV
    /// goes to stdout and the JSON summary to stderr.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_dir(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `theta,phi`, got `{s}`"))?;
    let parse = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
    let (theta, phi) = (parse(a)?, parse(b)?);
    if theta.abs() > 90.0 || phi.abs() > 90.0 {
        return Err(format!("angles must lie in [-90, 90] degrees, got ({theta}, {phi})"));
    }
    Ok((theta, phi))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::SimulateRate(args) => simulate(args),
        Command::PowerTable(args) => power_table(args),
        Command::LensResponse(args) => lens_response(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::from_file(&args.config)?;
    if let Some(n) = args.trials {
        cfg.num_trials = n;
    }
    if let Some(s) = args.seed {
        cfg.master_seed = s;
    }
    if let Some(dir) = args.out {
        cfg.output.dir = dir;
    }
    cfg.validate()?;

    let res = run_experiment(&cfg)?;
    let csv = emit_results(&res, OutputFormat::Csv, &cfg.output.dir, &cfg.output.stem)?;
    let json = emit_results(&res, OutputFormat::Json, &cfg.output.dir, &cfg.output.stem)?;

    let mut out = std::io::stdout().lock();
    writeln!(out, "{} ({} trials, seed {})", cfg.name, cfg.num_trials, cfg.master_seed)?;
    write!(out, "{:<18}{:>6}", "scheme", "m_rf")?;
    for snr in &cfg.snr_sweep_db {
        write!(out, "{:>10}", format!("{snr} dB"))?;
    }
    writeln!(out, "{:>10}{:>12}", "power W", "SE/W")?;
    for s in &res.schemes {
        write!(out, "{:<18}{:>6}", s.scheme.as_str(), s.m_rf)?;
        for r in res.rows.iter().filter(|r| r.scheme == s.scheme && r.m_rf == s.m_rf) {
            write!(out, "{:>10.3}", r.mean_se)?;
        }
        writeln!(out, "{:>10.3}{:>12.4}", s.power_w, s.se_per_watt)?;
    }
    writeln!(out, "wrote {} and {}", csv.display(), json.display())?;
    Ok(())
}

fn power_table(args: PowerArgs) -> Result<()> {
    let model = PowerModel::new(args.p_rf, args.p_ps, args.p_sw)?;
    let table = PowerTable::new(model, args.m_upa, args.m_lens, &args.m_rf)?;
    print!("{}", table.to_text());
    match args.csv {
        Some(path) => write_file(&path, table.to_csv().as_bytes())?,
        None => print!("\n{}", table.to_csv()),
    }
    Ok(())
}

#[derive(Serialize)]
struct DirectionSummary {
    dir_index: usize,
    theta_deg: f64,
    phi_deg: f64,
    out_of_coverage: bool,
    argmax_m_e: i32,
    argmax_m_a: i32,
    argmax_fraction: f64,
    total_fraction: f64,
}

#[derive(Serialize)]
struct LensSummary {
    d_y: f64,
    d_z: f64,
    theta_cov_deg: f64,
    phi_cov_deg: f64,
    element_count: usize,
    directions: Vec<DirectionSummary>,
}

fn lens_response(args: LensArgs) -> Result<()> {
    let geom = LensArrayGeometry::from_degrees(args.dy, args.dz, args.theta_cov, args.phi_cov)?;
    let dirs: Vec<Direction> = args.dirs.iter().map(|&(t, p)| Direction::from_degrees(t, p)).collect();
    let maps = power_response_map(&geom, &dirs)?;

    let mut csv = String::from("dir_index,m_e,m_a,power\n");
    for (i, map) in maps.iter().enumerate() {
        for (m_e, m_a, p) in &map.entries {
            csv += &format!("{i},{m_e},{m_a},{p}\n");
        }
    }
    let summary = LensSummary {
        d_y: args.dy,
        d_z: args.dz,
        theta_cov_deg: args.theta_cov,
        phi_cov_deg: args.phi_cov,
        element_count: geom.len(),
        directions: maps
            .iter()
            .zip(&args.dirs)
            .enumerate()
            .map(|(i, (m, &(t, p)))| DirectionSummary {
                dir_index: i,
                theta_deg: t,
                phi_deg: p,
                out_of_coverage: m.out_of_coverage,
                argmax_m_e: m.argmax.0,
                argmax_m_a: m.argmax.1,
                argmax_fraction: m.argmax_fraction,
                total_fraction: m.total_fraction,
            })
            .collect(),
    };
    let json = serde_json::to_string_pretty(&summary)? + "\n";
    for d in summary.directions.iter().filter(|d| d.out_of_coverage) {
        log::warn!("direction {} ({}, {}) is outside the lens coverage", d.dir_index, d.theta_deg, d.phi_deg);
    }

    match args.out {
        Some(dir) => {
            fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            write_file(&dir.join("lens_response.csv"), csv.as_bytes())?;
            write_file(&dir.join("lens_response.json"), json.as_bytes())?;
        }
        None => {
            print!("{csv}");
            eprint!("{json}");
        }
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if path.is_dir() {
        bail!("{} is a directory", path.display());
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}
