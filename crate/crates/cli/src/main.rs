//! `hc` — scenario front end for the horizon-cylinder verification suite.
//!
//! Exit codes: 0 when every executed gate passes, 1 when any check fails
//! or errors, 2 for configuration or usage problems.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hc_core::scenario::{
    render_dump, run_convergence, run_scenario, DumpKind, Report, ReportFormat, ScenarioConfig,
};

#[derive(Parser)]
#[command(name = "hc", version, about = "Thermal-state and boundary-projector verification scenarios")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the configured checks and print the report.
    Check(CommonArgs),
    /// Write the requested CSV dumps and nothing else.
    Dump {
        #[command(flatten)]
        args: CommonArgs,
        /// Dump to write (repeatable); unioned with the config's
        /// `output.dumps` list.
        #[arg(long = "dump", value_name = "KIND")]
        dumps: Vec<String>,
    },
    /// Run the checks at successive refinement levels and report observed
    /// convergence orders.
    Converge {
        #[command(flatten)]
        args: CommonArgs,
        /// Number of refinement levels (each halves the grid spacings).
        #[arg(long, default_value_t = 3, value_name = "N")]
        refine_levels: usize,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario TOML file; omitted means the built-in default scenario.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Directory for written files (reports, dumps). Created if missing.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Report format override: "json" (JSON lines) or "human".
    #[arg(long, value_name = "FORMAT")]
    format: Option<String>,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("hc: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, String> {
    match cli.cmd {
        Cmd::Check(args) => {
            let (cfg, format) = load(&args)?;
            let report = run_scenario(&cfg);
            print!("{}", report.render(format));
            if let Some(dir) = &args.out {
                write_report(dir, &report, format)?;
            }
            Ok(exit_for(&report))
        }
        Cmd::Dump { args, dumps } => {
            let (cfg, _) = load(&args)?;
            let mut kinds: Vec<DumpKind> = Vec::new();
            let mut push = |kind: DumpKind| {
                if !kinds.contains(&kind) {
                    kinds.push(kind);
                }
            };
            for &kind in &cfg.output.dumps {
                push(kind);
            }
            for name in &dumps {
                let kind = DumpKind::parse(name).ok_or_else(|| {
                    format!(
                        "unknown dump \"{name}\" (expected one of: {})",
                        DumpKind::NAMES.join(", ")
                    )
                })?;
                push(kind);
            }
            if kinds.is_empty() {
                return Err(
                    "no dumps requested; pass --dump KIND or list them under [output] dumps"
                        .into(),
                );
            }
            let dir = args.out.clone().unwrap_or_else(|| PathBuf::from("."));
            for kind in kinds {
                let (name, csv) =
                    render_dump(&cfg, kind).map_err(|e| format!("dump {kind}: {e}"))?;
                let path = write_file(&dir, &name, &csv)?;
                println!("wrote {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Converge {
            args,
            refine_levels,
        } => {
            if !(1..=8).contains(&refine_levels) {
                return Err(format!(
                    "--refine-levels must be in 1..=8 (got {refine_levels})"
                ));
            }
            let (cfg, format) = load(&args)?;
            let reports = run_convergence(&cfg, refine_levels);
            let mut all = true;
            let mut rendered = String::new();
            for report in &reports {
                rendered.push_str(&report.render(format));
                if format == ReportFormat::Human {
                    rendered.push('\n');
                }
                all &= report.all_pass();
            }
            print!("{rendered}");
            if let Some(dir) = &args.out {
                let name = report_file_name(format);
                let path = write_file(dir, name, &rendered)?;
                eprintln!("hc: wrote {}", path.display());
            }
            Ok(if all {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn load(args: &CommonArgs) -> Result<(ScenarioConfig, ReportFormat), String> {
    let cfg = match &args.config {
        None => ScenarioConfig::default(),
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            ScenarioConfig::from_toml_str(&text).map_err(|e| e.to_string())?
        }
    };
    let format = match args.format.as_deref() {
        None => cfg.output.format,
        Some("json") | Some("json-lines") => ReportFormat::JsonLines,
        Some("human") => ReportFormat::Human,
        Some(other) => {
            return Err(format!(
                "unknown format \"{other}\" (expected \"json\" or \"human\")"
            ))
        }
    };
    Ok((cfg, format))
}

fn exit_for(report: &Report) -> ExitCode {
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn report_file_name(format: ReportFormat) -> &'static str {
    match format {
        ReportFormat::JsonLines => "report.jsonl",
        ReportFormat::Human => "report.txt",
    }
}

fn write_report(dir: &Path, report: &Report, format: ReportFormat) -> Result<(), String> {
    let path = write_file(dir, report_file_name(format), &report.render(format))?;
    eprintln!("hc: wrote {}", path.display());
    Ok(())
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<PathBuf, String> {
    fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, content).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    Ok(path)
}
