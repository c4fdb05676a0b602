//! Command-line front end. `run_with` does all the work so that tests can
//! drive the commands in-process; `main` only wires up logging and the
//! process exit code.

pub mod http;
#[cfg(test)]
mod testutil;

use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use spatialqa::cot::{annotate_reward, run_cot, TextClient, DEFAULT_MAX_TURNS};
use spatialqa::eval::{eval_qualitative, eval_quantitative, load_benchmark, load_predictions, render_table, ItemKind, Matcher};
use spatialqa::interchange::{list_scenes, load_scene, load_scene_dir, read_qa_dataset, write_qa_dataset, SCENE_FILE};
use spatialqa::oracle::{random_observable_spec, write_oracle_scene, GeneratorParams};
use spatialqa::pipeline::{dataset_stats, run_synth_to_file, PipelineConfig};
use spatialqa::qa::add_answer_noise;
use spatialqa::rng::keyed_rng;

use crate::http::{HttpClient, LLM_URL_VAR, VLM_URL_VAR};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

const ORACLE_STREAM: &str = "oracle-gen";

#[derive(Parser, Debug)]
#[command(name = "spatialqa", version, about = "Spatial QA synthesis from depth, masks and captions")]
pub struct Cli {
    /// Pipeline configuration (TOML); built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configured global seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores); overrides the config.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output file or directory, depending on the command.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check scene directories against the interchange format.
    Validate {
        /// A scene root, or a single scene directory.
        path: PathBuf,
    },
    /// Run the pipeline over every scene and write QA records (JSON lines) to --out.
    Synth { scene_root: PathBuf },
    /// Category, value and word statistics of a QA dataset.
    Stats {
        dataset: PathBuf,
        /// Print JSON instead of the text report.
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = 20)]
        top_words: usize,
    },
    /// Score predictions against a benchmark.
    Eval {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        benchmark: PathBuf,
        #[arg(long, value_enum, default_value_t = MatcherArg::ExactLabel)]
        matcher: MatcherArg,
    },
    /// Render random oracle scenes with known geometry into --out.
    OracleGen {
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Generator parameters (TOML); defaults when omitted.
        #[arg(long)]
        generator: Option<PathBuf>,
        #[arg(long, default_value = "oracle")]
        prefix: String,
    },
    /// Add Gaussian noise (metres) to quantitative answers; writes to --out.
    Noise {
        dataset: PathBuf,
        #[arg(long)]
        std: f64,
    },
    /// Answer a question by letting a language model interrogate a VLM.
    Cot {
        #[arg(long)]
        question: String,
        /// Image id forwarded to the VLM.
        #[arg(long)]
        image: String,
        #[arg(long, default_value_t = DEFAULT_MAX_TURNS)]
        max_turns: usize,
        /// Coordinator endpoint; defaults to $SPATIALQA_LLM_URL.
        #[arg(long)]
        llm_url: Option<String>,
        /// VLM endpoint; defaults to $SPATIALQA_VLM_URL.
        #[arg(long)]
        vlm_url: Option<String>,
    },
    /// Per-frame distance rewards from repeated VLM estimates.
    Reward {
        /// Distance question asked about every frame.
        #[arg(long)]
        query: String,
        #[arg(long, default_value_t = 4)]
        samples: usize,
        #[arg(long)]
        vlm_url: Option<String>,
        #[arg(required = true)]
        frames: Vec<String>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MatcherArg {
    ExactLabel,
    OracleTruth,
}

impl From<MatcherArg> for Matcher {
    fn from(m: MatcherArg) -> Self {
        match m {
            MatcherArg::ExactLabel => Matcher::ExactLabel,
            MatcherArg::OracleTruth => Matcher::OracleTruth,
        }
    }
}

/// A failed command and the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments or configuration.
    Usage(String),
    /// Unreadable or invalid input data, or a failing endpoint.
    Data(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Data(_) => EXIT_DATA,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) => m,
        }
    }
}

fn data(e: impl std::fmt::Display) -> Failure {
    Failure::Data(e.to_string())
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

type Outcome = Result<(), Failure>;

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Normal output goes to `out`, diagnostics to `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn load_config(cli: &Cli) -> Result<PipelineConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p).map_err(usage)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        cfg.jobs = jobs;
    }
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn need_out<'a>(cli: &'a Cli, what: &str) -> Result<&'a Path, Failure> {
    cli.out
        .as_deref()
        .ok_or_else(|| Failure::Usage(format!("{what} needs --out")))
}

fn write_json(path: &Path, value: &impl Serialize) -> Outcome {
    let text = serde_json::to_string_pretty(value).map_err(data)?;
    fs::write(path, text + "\n").map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn print(out: &mut dyn Write, text: &str) -> Outcome {
    out.write_all(text.as_bytes()).map_err(data)
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Outcome {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Validate { path } => validate(path, out),
        Command::Synth { scene_root } => {
            let dest = need_out(cli, "synth")?;
            let summary = run_synth_to_file(&cfg, scene_root, dest).map_err(data)?;
            print(out, &(serde_json::to_string_pretty(&summary).map_err(data)? + "\n"))
        }
        Command::Stats {
            dataset,
            json,
            top_words,
        } => {
            let records = read_qa_dataset(dataset).map_err(data)?;
            let report = dataset_stats(&records, *top_words);
            if let Some(dest) = &cli.out {
                write_json(dest, &report)?;
            }
            if *json {
                print(out, &(serde_json::to_string_pretty(&report).map_err(data)? + "\n"))
            } else {
                print(out, &report.to_text())
            }
        }
        Command::Eval {
            predictions,
            benchmark,
            matcher,
        } => {
            let bench = load_benchmark(benchmark).map_err(data)?;
            let preds = load_predictions(predictions).map_err(data)?;
            let quant = eval_quantitative(&preds, &bench);
            let qual = if bench.iter().any(|i| i.kind == ItemKind::Qualitative) {
                Some(eval_qualitative(&preds, &bench, (*matcher).into()).map_err(data)?)
            } else {
                None
            };
            if let Some(dest) = &cli.out {
                write_json(dest, &serde_json::json!({ "quantitative": quant, "qualitative": qual }))?;
            }
            print(out, &render_table(&quant, qual.as_ref()))
        }
        Command::OracleGen {
            count,
            generator,
            prefix,
        } => {
            let dest = need_out(cli, "oracle-gen")?;
            let params: GeneratorParams = match generator {
                Some(p) => {
                    let text = fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
                    toml::from_str(&text).map_err(usage)?
                }
                None => GeneratorParams::default(),
            };
            for i in 0..*count {
                let id = format!("{prefix}{i:05}");
                let mut rng = keyed_rng(ORACLE_STREAM, cfg.seed, prefix, i as u64);
                let (spec, _) = random_observable_spec(&mut rng, &id, &params)
                    .map_err(|r| Failure::Data(format!("{id}: no acceptable scene after {} draws: {:?}", r.attempts, r.rejected)))?;
                write_oracle_scene(&spec, dest).map_err(data)?;
            }
            print(out, &format!("wrote {count} scenes to {}\n", dest.display()))
        }
        Command::Noise { dataset, std } => {
            if !(*std >= 0.0 && std.is_finite()) {
                return Err(Failure::Usage(format!("--std must be a non-negative number, got {std}")));
            }
            let dest = need_out(cli, "noise")?;
            let records = read_qa_dataset(dataset).map_err(data)?;
            let noisy = add_answer_noise(records, *std, &cfg.rounding, cfg.seed).map_err(data)?;
            let n = write_qa_dataset(noisy, dest).map_err(data)?;
            print(out, &format!("wrote {n} records to {}\n", dest.display()))
        }
        Command::Cot {
            question,
            image,
            max_turns,
            llm_url,
            vlm_url,
        } => {
            let llm = client(llm_url, LLM_URL_VAR)?;
            let vlm = client(vlm_url, VLM_URL_VAR)?;
            let transcript = run_cot(question, image, &llm, &vlm, *max_turns).map_err(|e| match e {
                spatialqa::cot::CotError::InvalidArgument(_) => usage(e),
                _ => data(e),
            })?;
            if let Some(dest) = &cli.out {
                write_json(dest, &transcript)?;
            }
            print(out, &transcript.render())
        }
        Command::Reward {
            query,
            samples,
            vlm_url,
            frames,
        } => {
            if *samples == 0 {
                return Err(Failure::Usage("--samples must be at least 1".into()));
            }
            let vlm = client(vlm_url, VLM_URL_VAR)?;
            let rewards = annotate_reward(frames, query, &vlm as &dyn TextClient, *samples).map_err(data)?;
            let rows: Vec<_> = frames
                .iter()
                .zip(&rewards)
                .map(|(f, r)| serde_json::json!({ "frame": f, "distance_m": r }))
                .collect();
            if let Some(dest) = &cli.out {
                write_json(dest, &rows)?;
            }
            print(out, &(serde_json::to_string_pretty(&rows).map_err(data)? + "\n"))
        }
    }
}

fn client(url: &Option<String>, var: &str) -> Result<HttpClient, Failure> {
    match url {
        Some(u) => Ok(HttpClient::new(
            u.clone(),
            std::env::var(http::API_KEY_VAR).ok().filter(|k| !k.is_empty()),
            std::time::Duration::from_secs(120),
        )),
        None => HttpClient::from_env(var).map_err(Failure::Usage),
    }
}

fn validate(path: &Path, out: &mut dyn Write) -> Outcome {
    let results: Vec<(String, Result<(), String>)> = if path.join(SCENE_FILE).is_file() {
        let id = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
        vec![(id, load_scene_dir(path).map(|_| ()).map_err(|e| e.to_string()))]
    } else {
        let ids = list_scenes(path).map_err(data)?;
        ids.into_iter()
            .map(|id| {
                let r = load_scene(path, &id).map(|_| ()).map_err(|e| e.to_string());
                (id, r)
            })
            .collect()
    };
    let mut w = BufWriter::new(out);
    let mut bad = 0;
    for (id, r) in &results {
        let line = match r {
            Ok(()) => format!("ok    {id}\n"),
            Err(e) => {
                bad += 1;
                format!("FAIL  {id}: {e}\n")
            }
        };
        w.write_all(line.as_bytes()).map_err(data)?;
    }
    writeln!(w, "{} scenes, {} invalid", results.len(), bad).map_err(data)?;
    w.flush().map_err(data)?;
    if bad > 0 {
        return Err(Failure::Data(format!("{bad} of {} scenes failed validation", results.len())));
    }
    Ok(())
}
