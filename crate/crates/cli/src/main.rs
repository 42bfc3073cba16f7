use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use geoquant_cli::{load, report, run, Diagnostic, EXIT_VALIDATION};

#[derive(Parser)]
#[command(name = "geoquant", version, about = "Run geoquant manifests and emit JSON reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute every task of a manifest.
    Run {
        manifest: PathBuf,
        /// Overrides the sampling seed of the manifest.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the numeric value of ħ.
        #[arg(long)]
        hbar: Option<f64>,
        /// Writes the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report every problem in a manifest without running it.
    Validate { manifest: PathBuf },
}

fn read(path: &PathBuf) -> Result<String, Vec<Diagnostic>> {
    std::fs::read_to_string(path).map_err(|e| {
        vec![Diagnostic {
            path: "$".into(),
            message: format!("cannot read {}: {e}", path.display()),
        }]
    })
}

fn print_diagnostics(diags: &[Diagnostic]) -> ExitCode {
    for d in diags {
        eprintln!("{d}");
    }
    ExitCode::from(EXIT_VALIDATION as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { manifest } => match read(&manifest).and_then(|t| load(&t)) {
            Ok(_) => {
                println!("ok");
                ExitCode::SUCCESS
            }
            Err(d) => print_diagnostics(&d),
        },
        Command::Run { manifest, seed, hbar, out } => {
            let mut m = match read(&manifest).and_then(|t| load(&t)) {
                Ok(m) => m,
                Err(d) => return print_diagnostics(&d),
            };
            if let Some(s) = seed {
                m.config.seed = s;
            }
            if let Some(h) = hbar {
                if !(h.is_finite() && h > 0.0) {
                    return print_diagnostics(&[Diagnostic {
                        path: "--hbar".into(),
                        message: "must be positive".into(),
                    }]);
                }
                m.config.hbar = h;
            }
            let result = run(&m);
            let text = report::to_string(&result.report);
            match out {
                Some(p) => {
                    if let Err(e) = std::fs::write(&p, text) {
                        eprintln!("cannot write {}: {e}", p.display());
                        return ExitCode::from(3);
                    }
                }
                None => print!("{text}"),
            }
            if let Some(msg) = result.report["error"]["message"].as_str() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(result.status.exit_code() as u8)
        }
    }
}
