use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{info, warn};

use zeno_map::runner::{
    emit_chart, parse_config, run_experiment, run_presets, write_csv, ExperimentConfig, ExperimentKind, Preset,
    RunRecord,
};
use zeno_map::two_level::{monte_carlo_measured_evolve, zeno_phi, zeno_survival};
use zeno_map::{classical, ClassicalEnsemble, Error, ProbabilityPair};

const THREADS_VAR: &str = "ZENO_MAP_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "zeno-map",
    version,
    about = "Measurement-induced (anti-)Zeno dynamics in kicked quantum maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment described by a `key = value` config file.
    Run {
        config: PathBuf,
        /// Measurement scenario a, b, c or d; `all` runs the four side by side.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// CSV output path (overrides `output_path`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write an SVG chart next to the CSV.
        #[arg(long)]
        svg: bool,
    },
    /// Survival of the ground state of a π-pulse split into N measured intervals.
    Zeno {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Action diffusion of the classical standard map.
    Classical {
        #[arg(long, default_value_t = 10_000)]
        particles: usize,
        #[arg(long, default_value_t = 200)]
        steps: u64,
        #[arg(long, default_value_t = 10.0)]
        k: f64,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        #[arg(long, default_value_t = 500.0)]
        action: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::InvalidArgument(_) => 2,
        Error::TruncationOverflow { .. } | Error::InvalidState { .. } | Error::NoLocalization { .. } => 3,
        Error::Io { .. } => 4,
    }
}

fn configure_threads() {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return;
    };
    match raw.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                warn!("could not size the thread pool: {e}");
            }
        }
        _ => warn!("ignoring {THREADS_VAR}={raw:?}: expected a positive integer"),
    }
}

fn with_suffix(path: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}{suffix}.{ext}"))
}

fn summarize(rec: &RunRecord) {
    if let Some(last) = rec.aggregate.entries().last() {
        println!(
            "{:<14} j={:<6} dispersion={:<14.6} norm={:.12} p_m0={:.6}  ({:.2} s)",
            rec.label,
            last.j,
            last.dispersion,
            last.norm,
            last.p_m0,
            rec.wall_time.as_secs_f64()
        );
    }
}

fn cmd_run(
    config: &Path,
    preset: Option<&str>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    svg: bool,
) -> Result<(), Error> {
    let text = fs::read_to_string(config).map_err(|e| Error::Io {
        path: config.to_path_buf(),
        source: e,
    })?;
    let mut cfg: ExperimentConfig = parse_config(&text)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(o) = out {
        cfg.output_path = o;
    }
    let svg = svg || cfg.emit_svg;

    let presets: Vec<Preset> = match preset {
        None => Vec::new(),
        Some("all") => Preset::ALL.to_vec(),
        Some(p) => vec![p.parse()?],
    };
    if !presets.is_empty() && cfg.experiment != ExperimentKind::Kicked {
        return Err(Error::InvalidArgument(
            "presets only apply to kicked experiments".into(),
        ));
    }

    let records = match presets.as_slice() {
        [] => vec![run_experiment(&cfg)?],
        [p] => {
            p.apply(&mut cfg);
            let mut rec = run_experiment(&cfg)?;
            rec.label = format!("{p}: {}", rec.label);
            vec![rec]
        }
        many => run_presets(&cfg, many)?,
    };

    if records.len() == 1 {
        write_csv(&records[0], &cfg.output_path)?;
        info!("wrote {}", cfg.output_path.display());
    } else {
        for (p, rec) in presets.iter().zip(&records) {
            let path = with_suffix(&cfg.output_path, &format!("_{p}"), "csv");
            write_csv(rec, &path)?;
            info!("wrote {}", path.display());
        }
    }
    if svg {
        let path = cfg.output_path.with_extension("svg");
        emit_chart(&records, &path)?;
        info!("wrote {}", path.display());
    }
    for rec in &records {
        summarize(rec);
    }
    Ok(())
}

fn cmd_zeno(n: u64, trials: u64, seed: u64) -> Result<(), Error> {
    let closed = zeno_survival::<f64>(n)?;
    let mc = monte_carlo_measured_evolve(ProbabilityPair::ground(), zeno_phi::<f64>(n), n, trials, seed)?;
    let nf = n as f64;
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    println!("n = {n}, phi = pi/{}", 2 * n);
    println!("closed form       p1 = {:.12}  p2 = {:.6e}", closed.p1, closed.p2);
    println!(
        "(1 - e^(-pi^2/2n))/2    p2 = {:.6e}",
        0.5 * (1.0 - (-pi2 / (2.0 * nf)).exp())
    );
    println!("pi^2/4n                 p2 = {:.6e}", pi2 / (4.0 * nf));
    println!(
        "monte carlo ({trials} trials) p2 = {:.6e} +/- {:.1e}",
        mc.mean.p2, mc.std_error
    );
    Ok(())
}

fn cmd_classical(particles: usize, steps: u64, k: f64, tau: f64, action: f64, seed: u64) -> Result<(), Error> {
    let ens = ClassicalEnsemble::uniform_angles(particles, action, k, tau, seed)?;
    let b = classical::ensemble_diffusion(&ens, steps)?;
    println!("K = {}, {} particles, {} steps", ens.stochasticity(), particles, steps);
    println!(
        "B = {:.4} +/- {:.4}   (quasilinear k^2/4tau = {:.4})",
        b.coefficient,
        b.std_error,
        k * k / (4.0 * tau)
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    configure_threads();
    let result = match cli.command {
        Command::Run {
            config,
            preset,
            seed,
            out,
            svg,
        } => cmd_run(&config, preset.as_deref(), seed, out, svg),
        Command::Zeno { n, trials, seed } => cmd_zeno(n, trials, seed),
        Command::Classical {
            particles,
            steps,
            k,
            tau,
            action,
            seed,
        } => cmd_classical(particles, steps, k, tau, action, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
