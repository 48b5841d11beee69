use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use resonance_cli::config::{Preset, ScanConfig};
use resonance_cli::output::{self, Format};
use resonance_cli::{run_report, run_scan, CliError, ResolvedScan};
use resonance_core::PhysicalConstants;

#[derive(Debug, Parser)]
#[command(
    name = "resonance",
    version,
    about = "Resonance and Casimir-Polder separation scans"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML file with [scan], [atom], [dielectric] and [tolerances] sections.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Write to PATH instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,

    /// Worker threads for scan points (0 = one per core).
    #[arg(long, global = true, default_value_t = 0, value_name = "N")]
    workers: usize,

    /// Override the geometry preset of the config file.
    #[arg(long, global = true, value_enum)]
    preset: Option<PresetArg>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate the configured quantities over the separation grid.
    Scan,
    /// Fit exponents, locate sign crossovers and check convergence.
    Report,
    /// Print the physical constants in use.
    Constants,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Object,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PresetArg {
    Fig3,
    Fig4,
    Free,
}

fn load(cli: &Cli) -> Result<ResolvedScan, CliError> {
    let (mut config, text, name, base) = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
            let name = path.display().to_string();
            let config = ScanConfig::parse(&text, &name)?;
            let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
            (config, text, name, base)
        }
        None => (
            ScanConfig::default(),
            String::new(),
            "<defaults>".into(),
            PathBuf::from("."),
        ),
    };
    if let Some(p) = cli.preset {
        config.scan.preset = match p {
            PresetArg::Fig3 => Preset::Fig3,
            PresetArg::Fig4 => Preset::Fig4,
            PresetArg::Free => Preset::FreeSpace,
        };
    }
    config.resolve(&base, &name, &text)
}

fn run(cli: &Cli) -> Result<String, CliError> {
    let format = match cli.format {
        FormatArg::Table => Format::Table,
        FormatArg::Object => Format::Object,
    };
    let json = |v: serde_json::Value| {
        serde_json::to_string_pretty(&v).expect("values are finite or null") + "\n"
    };
    Ok(match cli.command {
        Command::Constants => match format {
            Format::Table => output::constants_table(&PhysicalConstants::CODATA),
            Format::Object => json(output::constants_json(&PhysicalConstants::CODATA)),
        },
        Command::Scan => {
            let scan = load(cli)?;
            let table = run_scan(&scan, cli.workers)?;
            match format {
                Format::Table => output::scan_table(&scan, &table),
                Format::Object => json(output::scan_object(&scan, &table)),
            }
        }
        Command::Report => {
            let scan = load(cli)?;
            let report = run_report(&scan, cli.workers)?;
            match format {
                Format::Table => report.to_text(&scan),
                Format::Object => json(report.to_json(&scan)),
            }
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|text| {
        match &cli.output {
            Some(path) => std::fs::write(path, text)?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
