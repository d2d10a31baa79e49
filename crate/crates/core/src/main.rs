use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nestshift::bench::config::{parse_quadrature, read_config, ModelChoice, RunConfig};
use nestshift::bench::data::{format_data, format_truth, simulate};
use nestshift::bench::kscan::{kscan, FitExclusions};
use nestshift::bench::run::{analyze, prepare, Status};

#[derive(Parser)]
#[command(name = "nestshift", version, about = "Nested sampling with mean-shift clustering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Base seed; run i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of independent runs.
    #[arg(long)]
    runs: Option<usize>,
    /// Disable cluster recognition.
    #[arg(long)]
    no_cluster: bool,
    #[arg(long, value_parser = parse_quadrature)]
    quadrature: Option<nestshift::Quadrature>,
    /// Output directory (default: `output` key, relative to the config file).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the analysis described by a configuration file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Draw a synthetic dataset from the configuration's `truth` and `grid`.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Data seed (overrides `data_seed`).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Repeat the analysis for several numbers of live points.
    Kscan {
        config: PathBuf,
        /// Comma-separated live-point counts, at least three.
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<usize>,
        /// Smallest K used in the ln E scatter fit.
        #[arg(long, default_value_t = 500)]
        delta_min_k: usize,
        /// Largest K used in the CPU-time fit.
        #[arg(long, default_value_t = 5000)]
        cpu_max_k: usize,
        #[command(flatten)]
        overrides: Overrides,
    },
}

const INVALID: u8 = 2;
const PARTIAL: u8 = 1;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, overrides } => cmd_run(&config, &overrides),
        Command::Simulate { config, out, seed } => cmd_simulate(&config, &out, seed),
        Command::Kscan {
            config,
            k,
            delta_min_k,
            cpu_max_k,
            overrides,
        } => cmd_kscan(&config, &k, FitExclusions { delta_min_k, cpu_max_k }, &overrides),
    };
    ExitCode::from(code)
}

fn load(path: &Path, o: Option<&Overrides>) -> Result<(RunConfig, PathBuf), u8> {
    let mut cfg = read_config(path).map_err(|e| {
        eprintln!("error: {e}");
        INVALID
    })?;
    if let Some(o) = o {
        if let Some(s) = o.seed {
            cfg.sampler.seed = s;
        }
        if let Some(r) = o.runs {
            cfg.sampler.n_runs = r;
        }
        if o.no_cluster {
            cfg.clustering = false;
        }
        if let Some(q) = o.quadrature {
            cfg.sampler.quadrature = q;
        }
    }
    if let Err(errors) = cfg.validate() {
        eprintln!("error: invalid configuration:\n{}", errors.join("\n"));
        return Err(INVALID);
    }
    for w in cfg.warnings() {
        eprintln!("warning: {w}");
    }
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((cfg, base))
}

fn out_dir(cfg: &RunConfig, base: &Path, o: &Overrides) -> PathBuf {
    o.out.clone().unwrap_or_else(|| base.join(&cfg.output))
}

fn cmd_run(path: &Path, o: &Overrides) -> u8 {
    let (cfg, base) = match load(path, Some(o)) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let problem = match prepare(&cfg, &base) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return INVALID;
        }
    };
    let analysis = analyze(&cfg, &problem);
    let dir = out_dir(&cfg, &base, o);
    if let Err(e) = analysis.write_outputs(&dir, &problem.space, cfg.histogram_bins) {
        eprintln!("error: writing {}: {e}", dir.display());
        return PARTIAL;
    }
    for f in analysis.outcomes.iter().filter_map(|o| o.as_ref().err()) {
        eprintln!("warning: {f}");
    }
    match analysis.evidence() {
        Some(e) => println!(
            "ln E = {} ± {} ({} of {} runs)",
            e.mean,
            e.delta.map_or("n/a".into(), |d| d.to_string()),
            e.per_run.len(),
            analysis.outcomes.len()
        ),
        None => println!("all runs failed"),
    }
    println!("results in {}", dir.display());
    match analysis.status() {
        Status::Complete => 0,
        Status::Partial | Status::Failed => PARTIAL,
    }
}

fn cmd_simulate(path: &Path, out: &Path, seed: Option<u64>) -> u8 {
    let (mut cfg, _) = match load(path, None) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let ModelChoice::Spectrum(spec) = cfg.model else {
        eprintln!("error: simulate needs a spectral model");
        return INVALID;
    };
    let Some(mut sim) = cfg.simulation.take() else {
        eprintln!("error: simulate needs `truth` and `grid`");
        return INVALID;
    };
    if let Some(s) = seed {
        sim.seed = s;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sim.seed);
    let data = match simulate(&spec, &sim.truth, &sim.grid, cfg.data_kind, sim.yerr, &mut rng) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return INVALID;
        }
    };
    let names: Vec<String> = cfg.params.iter().map(|p| p.name.clone()).collect();
    cfg.data = Some(PathBuf::from("data.dat"));
    let written = std::fs::create_dir_all(out)
        .and_then(|_| std::fs::write(out.join("data.dat"), format_data(&data)))
        .and_then(|_| std::fs::write(out.join("truth.txt"), format_truth(&spec, &names, &sim.truth, sim.seed)))
        .and_then(|_| std::fs::write(out.join("run.conf"), cfg.to_canonical()));
    if let Err(e) = written {
        eprintln!("error: writing {}: {e}", out.display());
        return PARTIAL;
    }
    println!("wrote {} points to {}", data.len(), out.join("data.dat").display());
    0
}

fn cmd_kscan(path: &Path, ks: &[usize], exclusions: FitExclusions, o: &Overrides) -> u8 {
    if ks.len() < 3 {
        eprintln!("error: kscan needs at least three K values");
        return INVALID;
    }
    let (cfg, base) = match load(path, Some(o)) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let problem = match prepare(&cfg, &base) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return INVALID;
        }
    };
    let scan = kscan(&cfg, &problem, ks, exclusions);
    let dir = out_dir(&cfg, &base, o);
    let written = std::fs::create_dir_all(&dir)
        .and_then(|_| std::fs::write(dir.join("kscan.csv"), scan.table_csv()))
        .and_then(|_| std::fs::write(dir.join("kscan_fit.txt"), scan.fit_text()));
    if let Err(e) = written {
        eprintln!("error: writing {}: {e}", dir.display());
        return PARTIAL;
    }
    print!("{}", scan.table_csv());
    print!("{}", scan.fit_text());
    let complete = scan.rows.iter().all(|r| r.runs_completed == cfg.sampler.n_runs);
    if complete && scan.delta_fit.is_some() && scan.cpu_fit.is_some() {
        0
    } else {
        PARTIAL
    }
}
