use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use tidiss::config::{ExperimentConfig, ExperimentKind};
use tidiss::experiment;
use tidiss::plot;
use tidiss::table::ResultTable;

#[derive(Parser)]
#[command(
    name = "tidiss",
    version,
    about = "Steady-state experiments for translation-invariant oscillator dissipators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FigureKind {
    Fig1a,
    Fig1b,
    Fig2a,
}

#[derive(Subcommand)]
enum Command {
    /// Run one of the figure sweeps.
    Figures {
        #[arg(value_enum)]
        which: FigureKind,
        #[arg(long)]
        config: PathBuf,
        /// Output path prefix (overrides the config).
        #[arg(long)]
        out: Option<String>,
        /// Also emit an SVG line chart next to the CSV.
        #[arg(long)]
        plots: bool,
        /// Worker threads (0 = all cores).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Solve a single steady state and report its observables.
    Steady {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<String>,
    },
    /// Run closed-form consistency diagnostics.
    Diagnose {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<String>,
    },
    /// Sweep kappa x Gamma for the configured profile variant.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<String>,
        #[arg(long)]
        plots: bool,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Parse, validate and echo a normalized config.
    ValidateConfig { path: PathBuf },
}

fn main() {
    std::process::exit(run(Cli::parse()));
}

fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Figures {
            which,
            config,
            out,
            plots,
            workers,
        } => {
            let experiment = match which {
                FigureKind::Fig1a => ExperimentKind::Fig1a,
                FigureKind::Fig1b => ExperimentKind::Fig1b,
                FigureKind::Fig2a => ExperimentKind::Fig2a,
            };
            execute(&config, Some(experiment), out, plots, workers)
        }
        Command::Steady { config, out } => execute(&config, Some(ExperimentKind::Steady), out, false, None),
        Command::Diagnose { config, out } => {
            execute(&config, Some(ExperimentKind::Diagnose), out, false, None)
        }
        Command::Sweep {
            config,
            out,
            plots,
            workers,
        } => execute(&config, Some(ExperimentKind::Sweep), out, plots, workers),
        Command::ValidateConfig { path } => validate(&path),
    }
}

fn validate(path: &Path) -> i32 {
    match ExperimentConfig::from_path(path).and_then(|c| c.to_normalized_toml()) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(
    config_path: &Path,
    experiment: Option<ExperimentKind>,
    out: Option<String>,
    plots: bool,
    workers: Option<usize>,
) -> i32 {
    let mut cfg = match ExperimentConfig::from_path(config_path) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    if let Some(kind) = experiment {
        cfg.experiment = kind;
    }
    if let Some(o) = out {
        cfg.output = Some(o);
    }
    if plots {
        cfg.emit_plots = true;
    }
    if let Some(w) = workers {
        cfg.workers = w;
    }

    let table = match experiment::run(&cfg) {
        Ok(table) => table,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };

    let prefix = cfg.output_prefix();
    let csv_path = PathBuf::from(format!("{prefix}.csv"));
    if let Some(parent) = csv_path.parent() {
        if !parent.as_os_str().is_empty() {
            if let Err(e) = std::fs::create_dir_all(parent) {
                eprintln!("error: {e}");
                return 1;
            }
        }
    }
    if let Err(e) = table.write_csv(&csv_path) {
        eprintln!("error: {e}");
        return 1;
    }
    println!(
        "wrote {} ({} rows, {} failed)",
        csv_path.display(),
        table.rows().len(),
        table.failures()
    );
    print_group_summary(&table);

    if cfg.emit_plots {
        let series = experiment::plot_series(&cfg, &table);
        if !series.is_empty() {
            let svg_path = PathBuf::from(format!("{prefix}.svg"));
            if let Err(e) = plot::write_svg(
                &svg_path,
                cfg.experiment.name(),
                "parameter",
                "Bures distance",
                &series,
            ) {
                eprintln!("error: {e}");
                return 1;
            }
            println!("wrote {}", svg_path.display());
        }
    }

    if table.failures() > 0 {
        2
    } else {
        0
    }
}

/// One summary line per distinct value of the leading column.
fn print_group_summary(table: &ResultTable) {
    use tidiss::table::Value;
    if table.columns().is_empty() || table.rows().len() <= 1 {
        return;
    }
    let mut groups: Vec<(String, usize)> = Vec::new();
    for row in table.rows() {
        let key = match &row[0] {
            Value::Text(s) => s.clone(),
            Value::Num(v) => format!("{v}"),
            Value::Int(v) => format!("{v}"),
            Value::Bool(v) => format!("{v}"),
        };
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, n)) => *n += 1,
            None => groups.push((key, 1)),
        }
    }
    if groups.len() == table.rows().len() {
        return; // every row unique: a per-row summary adds nothing
    }
    for (key, n) in groups {
        println!("  {}={key}: {n} rows", table.columns()[0]);
    }
}
