use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use evobserve::bench;
use evobserve::config::{ObserverConfig, RecognizerKind};
use evobserve::observer::{
    check_recognition_axioms, ExhaustiveRecognizer, GridRecognizer, Recognizer, TokenRecognizer,
};
use evobserve::probe::Probe;
use evobserve::relations::observe;
use evobserve::report::{evaluate, render_text};
use evobserve::substrates::{
    langton_run, random_script, render_string_world, FamilyLimits, GenealogyScript, LangtonParams,
};
use evobserve::trace::{Run, TraceError};

#[derive(Parser)]
#[command(
    name = "evobserve",
    version,
    about = "Observe entities, descendance and evolution in simulation traces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Substrate {
    Langton,
    StringWorld,
}

#[derive(Subcommand)]
enum Command {
    /// Write a JSONL trace from a built-in substrate.
    Simulate {
        #[arg(long, value_enum)]
        substrate: Substrate,
        /// Langton: number of steps after the seed state.
        #[arg(long, default_value_t = 160)]
        steps: usize,
        #[arg(long, default_value_t = 200)]
        width: usize,
        #[arg(long, default_value_t = 200)]
        height: usize,
        /// String world: a JSON genealogy script. A random one is drawn from --seed otherwise.
        #[arg(long)]
        script: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Trace file. String-world ground truth goes next to it as `<out>.truth.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recognize entities and build the relations of a trace.
    Observe {
        trace: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Include all relations as tag pairs.
        #[arg(long)]
        dump_relations: bool,
    },
    /// Evaluate the reproduction, fecundity, heredity, preservation and selection axioms.
    Verdict {
        trace: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Print the JSON report on stdout instead of the text table.
        #[arg(long)]
        json: bool,
    },
    /// Fit counter growth over Langton lattice sizes and string-world run lengths.
    Bench {
        /// Lattice side lengths; pass the flag with no value for none.
        #[arg(long, num_args = 0.., value_delimiter = ',', default_values_t = [32usize, 64, 128])]
        sides: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        /// String-world run lengths; pass the flag with no value for none.
        #[arg(long, num_args = 0.., value_delimiter = ',', default_values_t = [10usize, 20, 40])]
        lengths: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct Common {
    /// TOML observer configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// JSON output file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Count elementary operations and report them on stderr.
    #[arg(long)]
    probe: bool,
    /// Merge every k consecutive states into one.
    #[arg(long)]
    window: Option<usize>,
}

enum CliError {
    Input(String),
    Recognition(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Recognition(_) => 3,
        }
    }
}

fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| input(format!("{}: {e}", path.display())))
}

fn write_json(out: Option<&Path>, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(input)?;
    match out {
        Some(p) => {
            let mut w = create(p)?;
            writeln!(w, "{text}").map_err(input)
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn simulate(
    substrate: Substrate,
    steps: usize,
    width: usize,
    height: usize,
    script: Option<PathBuf>,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    // Observed tags carry the run id, which `observe` takes from the file stem.
    let id = out
        .as_deref()
        .and_then(Path::file_stem)
        .map_or_else(|| "trace".to_string(), |s| s.to_string_lossy().into_owned());
    let (run, truth) = match substrate {
        Substrate::Langton => {
            let params = LangtonParams {
                width,
                height,
                steps,
                origin: (width as i64 / 2 - 10, height as i64 / 2 - 10),
            };
            (langton_run(&id, &params).map_err(input)?, None)
        }
        Substrate::StringWorld => {
            let script: GenealogyScript = match &script {
                Some(p) => {
                    let f = File::open(p).map_err(|e| input(format!("{}: {e}", p.display())))?;
                    serde_json::from_reader(BufReader::new(f))
                        .map_err(|e| input(format!("{}: {e}", p.display())))?
                }
                None => random_script(seed, &FamilyLimits::default()),
            };
            let (run, truth) = render_string_world(&id, &script).map_err(input)?;
            (run, Some(truth))
        }
    };
    match &out {
        Some(p) => {
            let mut w = create(p)?;
            run.write_jsonl(&mut w).map_err(input)?;
            w.flush().map_err(input)?;
            if let Some(truth) = truth {
                let mut side = p.clone().into_os_string();
                side.push(".truth.json");
                write_json(Some(Path::new(&side)), &truth)?;
            }
        }
        None => run.write_jsonl(std::io::stdout().lock()).map_err(input)?,
    }
    Ok(())
}

fn load(trace: &Path, common: &Common) -> Result<(Run, ObserverConfig), CliError> {
    let config = match &common.config {
        Some(p) => ObserverConfig::load(p).map_err(input)?,
        None => ObserverConfig::default(),
    };
    let f = File::open(trace).map_err(|e| input(format!("{}: {e}", trace.display())))?;
    let id = trace
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let run = Run::read_jsonl(id, BufReader::new(f)).map_err(|e| match e {
        TraceError::EmptyTrace => input(format!("{}: empty trace", trace.display())),
        e => input(e),
    })?;
    let window = common.window.unwrap_or(config.window);
    if window == 0 {
        return Err(input("window must be positive"));
    }
    let run = if window > 1 {
        run.merge_meta_states(window)
    } else {
        run
    };
    Ok((run, config))
}

enum Action {
    Observe { dump_relations: bool },
    Verdict { json: bool },
}

fn execute<R: Recognizer>(
    rec: &R,
    run: &Run,
    config: &ObserverConfig,
    common: &Common,
    action: &Action,
) -> Result<(), CliError> {
    let bounds = config.bounds(rec).map_err(input)?;
    let probe = if common.probe {
        Probe::enabled()
    } else {
        Probe::disabled()
    };
    let obs = observe(run, rec, bounds, &probe).map_err(input)?;
    let checks = check_recognition_axioms(run, &obs.entity_sets(), &probe);
    if let Some(v) = checks.iter().find(|v| !v.passed) {
        let witness = serde_json::to_string(v).map_err(input)?;
        return Err(CliError::Recognition(format!(
            "recognition axiom {} violated: {witness}",
            v.axiom
        )));
    }
    match action {
        Action::Observe { dump_relations } => {
            let r = &obs.relations;
            let mut doc = json!({
                "run": run.id,
                "recognizer": rec.name(),
                "states": obs.states.len(),
                "entities": obs.entity_table(),
                "counts": {
                    "recognition": r.recognition.len(),
                    "causal": r.causal.len(),
                    "delta": r.delta.len(),
                    "ancestorOf": r.ancestor_of.len(),
                    "parentDelta": r.parent_delta.len(),
                    "parentDeltaMin": r.parent_delta_min.len(),
                },
            });
            if *dump_relations {
                doc["relations"] = obs.dump();
            }
            write_json(common.out.as_deref(), &doc)?;
        }
        Action::Verdict { json } => {
            let report = evaluate(&run.id, &obs, config);
            if *json {
                write_json(None, &report)?;
            } else {
                print!("{}", render_text(&report));
            }
            if let Some(p) = &common.out {
                write_json(Some(p), &report)?;
            }
        }
    }
    if common.probe {
        let text = serde_json::to_string(&probe.report()).map_err(input)?;
        eprintln!("probe {text}");
    }
    Ok(())
}

fn observe_command(trace: &Path, common: &Common, action: Action) -> Result<(), CliError> {
    let (run, config) = load(trace, common)?;
    match config.recognizer {
        RecognizerKind::Grid => execute(
            &GridRecognizer::new(config.eight_connected, config.geometry),
            &run,
            &config,
            common,
            &action,
        ),
        RecognizerKind::Token => execute(
            &TokenRecognizer::new(config.genes),
            &run,
            &config,
            common,
            &action,
        ),
        RecognizerKind::Exhaustive => execute(
            &ExhaustiveRecognizer::new(config.cap),
            &run,
            &config,
            common,
            &action,
        ),
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate {
            substrate,
            steps,
            width,
            height,
            script,
            seed,
            out,
        } => simulate(substrate, steps, width, height, script, seed, out),
        Command::Observe {
            trace,
            common,
            dump_relations,
        } => observe_command(&trace, &common, Action::Observe { dump_relations }),
        Command::Verdict {
            trace,
            common,
            json,
        } => observe_command(&trace, &common, Action::Verdict { json }),
        Command::Bench {
            sides,
            steps,
            lengths,
            out,
        } => {
            let report = bench::run_bench(&sides, steps, &lengths);
            print!("{}", bench::render_text(&report));
            if let Some(p) = out {
                write_json(Some(&p), &report)?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Input(m) | CliError::Recognition(m) => eprintln!("error: {m}"),
            }
            ExitCode::from(e.code())
        }
    }
}
