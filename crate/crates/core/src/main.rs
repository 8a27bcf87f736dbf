use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sketchmatch::pipeline::{
    cmd_evaluate, cmd_query, cmd_train, report_paths, Classifier, PipelineConfig, KNN_ROW, SVM_ROW,
};
use sketchmatch::Error;

#[derive(Parser)]
#[command(
    name = "sketchmatch",
    version,
    about = "Match face sketches against a photo gallery"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model from <DATASET>/photos (and sketches, for the offset).
    Train {
        dataset: PathBuf,
        model: PathBuf,
        #[command(flatten)]
        opts: ConfigArgs,
    },
    /// Rank gallery identities for one sketch.
    Query {
        model: PathBuf,
        sketch: PathBuf,
        #[arg(long)]
        top_n: Option<usize>,
        #[arg(long)]
        classifier: Option<String>,
    },
    /// Write RMSE and cumulative-match reports for every paired sketch.
    Evaluate {
        model: PathBuf,
        dataset: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// File of `key = value` lines; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    resize_w: Option<usize>,
    #[arg(long)]
    resize_h: Option<usize>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    classifier: Option<String>,
    #[arg(long)]
    top_n: Option<usize>,
    #[arg(long)]
    centering: Option<String>,
    #[arg(long)]
    svm_c: Option<f64>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<PipelineConfig, Error> {
        let mut cfg = PipelineConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            cfg.apply_text(&text)?;
        }
        let overrides = [
            ("resize_w", self.resize_w.map(|v| v.to_string())),
            ("resize_h", self.resize_h.map(|v| v.to_string())),
            ("wavelet_levels", self.levels.map(|v| v.to_string())),
            ("classifier", self.classifier.clone()),
            ("top_n", self.top_n.map(|v| v.to_string())),
            ("centering_mode", self.centering.clone()),
            ("svm_c", self.svm_c.map(|v| v.to_string())),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Train {
            dataset,
            model,
            opts,
        } => {
            let cfg = opts.resolve()?;
            let s = cmd_train(&cfg, &dataset, &model)?;
            if let Some(w) = &s.warning {
                eprintln!("warning: {w}");
            }
            println!(
                "trained on {} photos ({} sketches): D = {}, K = {}, offset = {}",
                s.photos,
                s.sketches,
                s.dim,
                s.components,
                s.offset.value()
            );
            println!("model written to {}", model.display());
        }
        Command::Query {
            model,
            sketch,
            top_n,
            classifier,
        } => {
            let classifier = classifier.map(|c| c.parse::<Classifier>()).transpose()?;
            let ranked = cmd_query(&model, &sketch, top_n, classifier)?;
            for (i, (label, score)) in ranked.entries.iter().enumerate() {
                println!("{}\t{}\t{:.6}", i + 1, label, score);
            }
        }
        Command::Evaluate {
            model,
            dataset,
            report,
        } => {
            let r = cmd_evaluate(&model, &dataset, &report)?;
            print!("{}", r.text());
            println!(
                "rank-1: {} {:.1}%, {} {:.1}%",
                KNN_ROW,
                r.knn.rank1() * 100.0,
                SVM_ROW,
                r.svm.rank1() * 100.0
            );
            let (text, csv) = report_paths(&report);
            println!(
                "reports written to {} and {}",
                text.display(),
                csv.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() {
                1
            } else if e.is_numeric() {
                3
            } else {
                2
            })
        }
    }
}
