use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context as _};
use clap::{Parser, ValueEnum};

use manyagent::belief::Coupling;
use manyagent::bench::{plot_data, run, write_csv, DomainSource, Engine, ExperimentSpec, Mode};
use manyagent::io::save_domain;
use manyagent::protest::{build_domain, Controllers, ProtestParams};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Structured,
    Naive,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CouplingArg {
    Exact,
    Factorized,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ControllerArg {
    Blind,
    Reactive,
}

/// Plan for agent 0 among a population of controller-driven agents and
/// report timing as CSV.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    /// Domain file (JSON). Without it the protest domain is generated.
    #[arg(long, conflicts_with_all = ["protest_n", "sweep"])]
    domain: Option<PathBuf>,
    /// Number of protestors.
    #[arg(long)]
    protest_n: Option<usize>,
    #[arg(long, default_value_t = 2)]
    horizon: usize,
    #[arg(long, default_value_t = manyagent::planner::DEFAULT_GAMMA)]
    gamma: f64,
    /// Observations sampled per action node (0 expands all).
    #[arg(long, default_value_t = 0)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "structured")]
    mode: ModeArg,
    /// Comma-separated protestor counts, e.g. 125,250,500,1000.
    #[arg(long, value_delimiter = ',')]
    sweep: Vec<usize>,
    /// CSV output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Writes `N seconds` lines per engine next to the CSV.
    #[arg(long, requires = "out")]
    plot: bool,
    #[arg(long, value_enum, default_value = "exact")]
    coupling: CouplingArg,
    #[arg(long, value_enum, default_value = "blind")]
    controllers: ControllerArg,
    /// Runs sweep points on separate threads.
    #[arg(long)]
    parallel: bool,
    /// Writes the generated protest domain to this file and exits.
    #[arg(long)]
    emit_domain: Option<PathBuf>,
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();

    let params = ProtestParams {
        controllers: match args.controllers {
            ControllerArg::Blind => Controllers::Blind,
            ControllerArg::Reactive => Controllers::Reactive,
        },
        ..ProtestParams::default()
    };
    let sweep = match (args.protest_n, args.sweep.is_empty()) {
        (Some(_), false) => bail!("--protest-n and --sweep are exclusive"),
        (Some(n), true) => vec![n],
        (None, false) => args.sweep.clone(),
        (None, true) => vec![params.n],
    };

    if let Some(path) = &args.emit_domain {
        let domain = build_domain(&ProtestParams { n: sweep[0], ..params })?;
        save_domain(&domain, path).with_context(|| format!("writing {}", path.display()))?;
        return Ok(());
    }

    let spec = ExperimentSpec {
        source: match &args.domain {
            Some(p) => DomainSource::File(p.clone()),
            None => DomainSource::Protest(params),
        },
        mode: match args.mode {
            ModeArg::Structured => Mode::Structured,
            ModeArg::Naive => Mode::Naive,
            ModeArg::Both => Mode::Both,
        },
        horizon: args.horizon,
        gamma: args.gamma,
        samples: args.samples,
        seed: args.seed,
        sweep,
        coupling: match args.coupling {
            CouplingArg::Exact => Coupling::Exact,
            CouplingArg::Factorized => Coupling::Factorized,
        },
        parallel: args.parallel,
        ..ExperimentSpec::default()
    };
    let rows = run(&spec)?;

    match &args.out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_csv(&rows, BufWriter::new(file))?;
            if args.plot {
                for engine in [Engine::Structured, Engine::Naive] {
                    let data = plot_data(&rows, engine);
                    if !data.is_empty() {
                        let plot = path.with_extension(format!("{engine}.dat"));
                        std::fs::write(&plot, data).with_context(|| format!("writing {}", plot.display()))?;
                    }
                }
            }
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_csv(&rows, &mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}
