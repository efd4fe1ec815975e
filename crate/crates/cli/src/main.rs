mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use versekit::incremental::{verify_inc, CacheHeader, Caches};
use versekit::reach::{simulate, verify, Tree};
use versekit::scenario::{load_scenario, EngineKind, HybridAutomaton, RunSettings};

use error::CliError;
use output::{default_dims, parse_axis, render_svg, write_csv, CacheReport, Report};

/// Seed for sampling simulation initial states from non-degenerate sets.
const SEED_VAR: &str = "VERSEKIT_SEED";

#[derive(Parser)]
#[command(name = "versekit", version, about = "Simulate and verify multi-agent hybrid scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Branching simulation from one initial state.
    Simulate {
        config: PathBuf,
        #[arg(short, long, default_value = "versekit-out")]
        output: PathBuf,
    },
    /// Reachability analysis and assertion checking.
    Verify {
        config: PathBuf,
        #[arg(short, long, default_value = "versekit-out")]
        output: PathBuf,
        /// Overrides the engine named in the config.
        #[arg(long)]
        engine: Option<EngineKind>,
        /// Reuse cached guard and flow results.
        #[arg(long)]
        incremental: bool,
        /// Cache file; defaults to cache.json in the output directory.
        #[arg(long)]
        cache_path: Option<PathBuf>,
        /// Delete the cache file before running.
        #[arg(long)]
        cache_clear: bool,
    },
    /// Render a projection of a saved tree.
    Plot {
        tree: PathBuf,
        /// Two comma-separated field names; `t` is time.
        #[arg(long, value_delimiter = ',', num_args = 1)]
        dims: Vec<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

struct Outcome {
    violated: bool,
    failed: bool,
}

fn load(config: &Path) -> Result<(HybridAutomaton, RunSettings), CliError> {
    let (sc, settings, _) = load_scenario(config)?;
    let aut = sc.build_automaton()?;
    Ok((aut, settings))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn write_outputs(tree: &Tree, out: &Path, report: &Report) -> Result<(), CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    write(&out.join("tree.json"), &tree.to_json())?;
    write_csv(tree, &out.join("reachtube.csv"))?;
    let dims = default_dims(tree);
    let (ax, ay) = (parse_axis(tree, &dims[0])?, parse_axis(tree, &dims[1])?);
    write(
        &out.join(format!("plot_{}_{}.svg", dims[0], dims[1])),
        &render_svg(tree, &ax, &ay, (&dims[0], &dims[1])),
    )?;
    let text = serde_json::to_string_pretty(report).expect("reports serialize");
    write(&out.join("report.json"), &(text + "\n"))
}

fn seed() -> Result<u64, CliError> {
    match std::env::var(SEED_VAR) {
        Err(_) => Ok(0),
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| CliError::new("E_USAGE", format!("{SEED_VAR}: expected an unsigned integer, got `{s}`"))),
    }
}

fn run_simulate(config: &Path, out: &Path) -> Result<Outcome, CliError> {
    let (aut, settings) = load(config)?;
    let seed = seed()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init: Vec<Vec<f64>> = aut
        .initial
        .iter()
        .map(|r| {
            r.dims()
                .iter()
                .map(|iv| if iv.is_point() { iv.lo } else { rng.random_range(iv.lo..=iv.hi) })
                .collect()
        })
        .collect();
    let tree = simulate(&aut, &settings, &init)?;
    let mut report = Report::new("simulate", config.display().to_string(), &tree);
    report.seed = Some(seed);
    write_outputs(&tree, out, &report)?;
    Ok(Outcome {
        violated: !report.violations.is_empty(),
        failed: !report.errors.is_empty(),
    })
}

struct VerifyArgs<'a> {
    config: &'a Path,
    out: &'a Path,
    engine: Option<EngineKind>,
    incremental: bool,
    cache_path: Option<PathBuf>,
    cache_clear: bool,
}

fn run_verify(a: VerifyArgs) -> Result<Outcome, CliError> {
    let (aut, mut settings) = load(a.config)?;
    if let Some(e) = a.engine {
        settings.engine = e;
    }
    std::fs::create_dir_all(a.out).map_err(|e| CliError::io(a.out, e))?;
    let cache_path = a
        .cache_path
        .clone()
        .or_else(|| a.incremental.then(|| a.out.join("cache.json")));
    if a.cache_clear {
        if let Some(p) = &cache_path {
            match std::fs::remove_file(p) {
                Ok(()) => {}
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
                Err(e) => return Err(CliError::io(p, e)),
            }
        }
    }
    let (tree, cache) = match &cache_path {
        None => (verify(&aut, &settings), None),
        Some(p) => {
            let (mut caches, warning) = Caches::load(p, CacheHeader::new(&aut, &settings))?;
            if let Some(w) = warning {
                eprintln!("W_CACHE: {w}");
            }
            caches.read = a.incremental;
            let tree = verify_inc(&aut, &settings, &mut caches);
            caches.save(p)?;
            let report = CacheReport {
                mode: if a.incremental { "incremental" } else { "record" },
                stats: caches.stats,
                guard_hit_rate: caches.stats.guard_hit_rate(),
                flow_hit_rate: caches.stats.flow_hit_rate(),
                guard_entries: caches.guard_entries(),
                flow_entries: caches.flow_entries(),
            };
            (tree, Some(report))
        }
    };
    let mut report = Report::new("verify", a.config.display().to_string(), &tree);
    report.cache = cache;
    write_outputs(&tree, a.out, &report)?;
    for (node, m) in tree.errors() {
        eprintln!("E_ENGINE: node {node}: {m}");
    }
    if !tree.complete {
        eprintln!("W_INCOMPLETE: node budget of {} reached; tree is partial", settings.max_nodes);
    }
    Ok(Outcome {
        violated: !report.violations.is_empty() || !tree.complete,
        failed: !report.errors.is_empty(),
    })
}

fn run_plot(tree_path: &Path, dims: &[String], out: Option<PathBuf>) -> Result<Outcome, CliError> {
    let text = std::fs::read_to_string(tree_path).map_err(|e| CliError::io(tree_path, e))?;
    let tree = Tree::from_json(&text).map_err(|e| CliError::new("E_CONFIG", format!("{}: {e}", tree_path.display())))?;
    if dims.len() != 2 {
        return Err(CliError::new("E_USAGE", format!("--dims takes two names, got {}", dims.len())));
    }
    let (ax, ay) = (parse_axis(&tree, &dims[0])?, parse_axis(&tree, &dims[1])?);
    let out = out.unwrap_or_else(|| {
        tree_path
            .parent()
            .unwrap_or(Path::new("."))
            .join(format!("plot_{}_{}.svg", dims[0], dims[1]))
    });
    write(&out, &render_svg(&tree, &ax, &ay, (&dims[0], &dims[1])))?;
    Ok(Outcome {
        violated: false,
        failed: false,
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("E_USAGE: {}", first.trim_start_matches("error: "));
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Simulate { config, output } => run_simulate(&config, &output),
        Command::Verify {
            config,
            output,
            engine,
            incremental,
            cache_path,
            cache_clear,
        } => run_verify(VerifyArgs {
            config: &config,
            out: &output,
            engine,
            incremental,
            cache_path,
            cache_clear,
        }),
        Command::Plot { tree, dims, output } => run_plot(&tree, &dims, output),
    };
    match result {
        Ok(o) if o.failed => ExitCode::from(1),
        Ok(o) if o.violated => ExitCode::from(2),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            for l in e.lines() {
                eprintln!("{l}");
            }
            ExitCode::from(1)
        }
    }
}
