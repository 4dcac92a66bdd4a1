use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use nlt_cli::config::PlotKind;
use nlt_cli::output::{write_csv, write_json};
use nlt_cli::plot::emit_plot;
use nlt_cli::presets::{preset, PRESETS};
use nlt_cli::{run_sweep, CliError, ExperimentConfig, Result};
use nlt_core::verify::{run_suite_entry, suite_names, SuiteRecord, SUITE};

#[derive(Parser)]
#[command(name = "nlt", version, about = "Regression gains, SNR and capacity bounds of memoryless nonlinearities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Gains,
    Capacity,
}

#[derive(Subcommand)]
enum Command {
    /// Run a parameter sweep from a config file or a shipped preset.
    Sweep {
        #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the Monte Carlo sample count (and the MI sample count).
        #[arg(long)]
        samples: Option<usize>,
        /// Output file, `-` for stdout. Defaults to `<NLT_OUT_DIR>/<name>.<ext>`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Directory for default output paths.
        #[arg(long, env = "NLT_OUT_DIR", default_value = "out")]
        out_dir: PathBuf,
    },
    /// Run verification checks; exits nonzero when any verdict is unexpected.
    Verify {
        /// Checks to run; see `nlt verify --list`.
        names: Vec<String>,
        /// Run the whole suite.
        #[arg(long)]
        all: bool,
        /// Print the check names and exit.
        #[arg(long)]
        list: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Render a sweep CSV as an SVG plot.
    Plot {
        csv: PathBuf,
        #[arg(long, value_enum, default_value_t = Kind::Gains)]
        kind: Kind,
        /// Defaults to the CSV path with an `.svg` extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Inspect the shipped presets.
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    /// Name and description of every preset.
    List,
    /// Print a preset's config file.
    Show { name: String },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("nlt: {e}");
            match e {
                CliError::Usage(_) | CliError::Config(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Sweep {
            config,
            preset: preset_name,
            seed,
            samples,
            out,
            format,
            out_dir,
        } => {
            let text = match (&config, &preset_name) {
                (Some(path), _) => fs::read_to_string(path)?,
                (None, Some(name)) => preset(name)
                    .ok_or_else(|| CliError::Usage(format!("unknown preset `{name}`; try `nlt preset list`")))?
                    .to_string(),
                (None, None) => unreachable!("clap enforces one source"),
            };
            sweep(&text, seed, samples, out, format, &out_dir)
        }
        Command::Verify {
            names,
            all,
            list,
            seed,
            samples,
            out,
            format,
        } => {
            if list {
                for (name, what) in SUITE {
                    println!("{name:36} {what}");
                }
                return Ok(ExitCode::SUCCESS);
            }
            verify(names, all, seed, samples, out, format)
        }
        Command::Plot { csv, kind, out } => {
            let text = fs::read_to_string(&csv)?;
            let out = out.unwrap_or_else(|| csv.with_extension("svg"));
            let kind = match kind {
                Kind::Gains => PlotKind::Gains,
                Kind::Capacity => PlotKind::Capacity,
            };
            emit_plot(&text, kind, &out)?;
            eprintln!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Preset { action } => {
            match action {
                PresetAction::List => {
                    for (name, text) in PRESETS {
                        let cfg = ExperimentConfig::from_toml(text)?;
                        println!("{name:8} {}", cfg.description);
                    }
                }
                PresetAction::Show { name } => {
                    let text = preset(&name).ok_or_else(|| CliError::Usage(format!("unknown preset `{name}`")))?;
                    print!("{text}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn open_out(path: &Path) -> Result<Box<dyn Write>> {
    if path == Path::new("-") {
        return Ok(Box::new(io::stdout().lock()));
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(Box::new(io::BufWriter::new(fs::File::create(path)?)))
}

fn sweep(
    text: &str,
    seed: Option<u64>,
    samples: Option<usize>,
    out: Option<PathBuf>,
    format: Format,
    out_dir: &Path,
) -> Result<ExitCode> {
    let mut cfg = ExperimentConfig::from_toml(text)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(n) = samples {
        cfg.engine.samples = n;
        if let Some(mi) = cfg.mi.as_mut() {
            mi.samples = n;
        }
    }
    cfg.validate()?;
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let path = out.unwrap_or_else(|| out_dir.join(format!("{}.{ext}", cfg.name)));
    let rows = run_sweep(&cfg);
    let mut w = open_out(&path)?;
    match format {
        Format::Csv => write_csv(&mut w, &cfg, text, &rows)?,
        Format::Json => write_json(&mut w, &cfg, &rows)?,
    }
    w.flush()?;
    drop(w);
    let failed = rows.iter().filter(|r| r.flags.iter().any(|f| f.starts_with("error"))).count();
    if failed > 0 {
        eprintln!("nlt: {failed} of {} rows failed; see the flags column", rows.len());
    }
    if path != Path::new("-") {
        eprintln!("wrote {}", path.display());
        if format == Format::Csv && cfg.output.plot != PlotKind::None {
            let svg = path.with_extension("svg");
            emit_plot(&fs::read_to_string(&path)?, cfg.output.plot, &svg)?;
            eprintln!("wrote {}", svg.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn record_json(r: &SuiteRecord) -> Value {
    let diagnostics: Map<String, Value> = r.diagnostics.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
    json!({
        "check": r.check,
        "expected_failure": !r.expected_pass,
        "passed": r.passed,
        "as_expected": r.as_expected,
        "statistic": r.statistic,
        "tolerance": r.tolerance,
        "diagnostics": diagnostics,
    })
}

fn verify(
    names: Vec<String>,
    all: bool,
    seed: u64,
    samples: usize,
    out: Option<PathBuf>,
    format: Format,
) -> Result<ExitCode> {
    let selected: Vec<String> = if all || names.is_empty() {
        suite_names().map(String::from).collect()
    } else {
        names
    };
    if let Some(bad) = selected.iter().find(|n| !suite_names().any(|k| k == n.as_str())) {
        return Err(CliError::Usage(format!("unknown check `{bad}`; try `nlt verify --list`")));
    }
    let mut w = open_out(out.as_deref().unwrap_or(Path::new("-")))?;
    let mut csv_w = (format == Format::Csv).then(|| csv::Writer::from_writer(Vec::new()));
    if let Some(c) = csv_w.as_mut() {
        c.write_record(["check", "expected_failure", "passed", "as_expected", "statistic", "tolerance"])?;
    }
    let mut unexpected = 0;
    for name in &selected {
        for r in run_suite_entry(name, seed, samples)? {
            unexpected += usize::from(!r.as_expected);
            match csv_w.as_mut() {
                Some(c) => c.write_record([
                    r.check.clone(),
                    (!r.expected_pass).to_string(),
                    r.passed.to_string(),
                    r.as_expected.to_string(),
                    r.statistic.to_string(),
                    r.tolerance.to_string(),
                ])?,
                None => writeln!(w, "{}", record_json(&r))?,
            }
        }
    }
    if let Some(c) = csv_w {
        let bytes = c.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
        w.write_all(&bytes)?;
    }
    w.flush()?;
    if unexpected > 0 {
        eprintln!("nlt: {unexpected} unexpected verdict(s)");
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}
