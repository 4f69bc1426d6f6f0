use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use pedtrack::config::parse_config;
use pedtrack::pipeline::run;

/// Detect and track pedestrians, writing an N,T,Y,X table.
#[derive(Debug, Parser)]
#[command(name = "pedtrack", version)]
struct Cli {
    /// Run configuration file.
    #[arg(long, short)]
    config: PathBuf,
    /// Override the output table path.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Write raw detection masks into this directory.
    #[arg(long)]
    dump_masks: Option<PathBuf>,
    /// Override the scene seed (synth mode).
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = parse_config(&cli.config)
        .map_err(pedtrack::Error::from)
        .and_then(|mut cfg| {
            if let Some(out) = cli.out {
                cfg.output = out;
            }
            if let Some(dir) = cli.dump_masks {
                cfg.dump_masks = Some(dir);
            }
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            let base = cli.config.parent().map(PathBuf::from).unwrap_or_default();
            run(&cfg, &base)
        });
    match result {
        Ok(summary) => {
            println!(
                "frames: {}  tracks: {}  records: {}  -> {}",
                summary.frames,
                summary.tracks,
                summary.records,
                summary.output.display()
            );
            if let Some(truth) = &summary.truth_output {
                println!("truth: {}", truth.display());
            }
            if let Some(s) = summary.score {
                println!(
                    "accuracy: {:.4} ({}/{} visible matched)  id switches: {}",
                    s.accuracy, s.matched, s.visible, s.id_switches
                );
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
