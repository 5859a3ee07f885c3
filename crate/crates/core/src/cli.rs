//! The `midib` command line: `gen-corpus`, `deid`, `score` and `report`.
//!
//! Exit codes: 0 success, 1 i/o failure, 2 usage error, 3 data error
//! (parse or schema), 4 scoring configuration error (key and corpus disagree).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::answer_key::{load_answer_key, load_mapping, AnswerKeyError, MappingKind};
use crate::corpus::{self, CorpusError, CorpusSpec};
use crate::deid::{
    deidentify_corpus, load_regions, DeidError, DeidPolicy, DeidRun, IdentityVault, ScrubberConfig,
};
use crate::reports::{
    read_run_summary, write_discrepancy_report, write_run_summary, write_scoring_report,
    ReportError, RunSummary,
};
use crate::scorer::{parse_weights, score_submission, weighted_accuracy, AggregationMode, ScoreError, ScoreOptions};

#[derive(Debug, Parser)]
#[command(name = "midib", version, about = "DICOM de-identification and answer-key scoring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic corpus with its answer key.
    GenCorpus {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        patients: usize,
        /// Fraction of US and CR instances with burned-in text.
        #[arg(long, default_value_t = 0.5)]
        burnin_fraction: f64,
    },
    /// De-identify every *.dcm file under a directory.
    Deid {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Policy file; `default` selects the built-in policy.
        #[arg(long, default_value = "default")]
        policy: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Region sidecar; defaults to `<in>/regions.csv` when present.
        #[arg(long)]
        regions: Option<PathBuf>,
        #[arg(long)]
        uid_root: Option<String>,
        /// Accept files without the Part-10 preamble.
        #[arg(long)]
        lenient: bool,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Score a de-identified corpus against an answer key.
    Score {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        orig: PathBuf,
        #[arg(long)]
        sub: PathBuf,
        #[arg(long)]
        patid_map: PathBuf,
        #[arg(long)]
        uid_map: PathBuf,
        #[arg(long, default_value = "series", value_parser = ["series", "instance"])]
        mode: String,
        /// Directory for the report files.
        #[arg(long)]
        out: PathBuf,
        /// CSV of `action,weight` rows.
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Also require one date shift per patient.
        #[arg(long)]
        strict_dates: bool,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Print the summary of a finished scoring run.
    Report {
        #[arg(long)]
        run: PathBuf,
    },
}

#[derive(Debug)]
enum Failure {
    Io(String),
    Usage(String),
    Data(String),
    Config(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Io(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Data(_) => 3,
            Failure::Config(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Io(m) | Failure::Usage(m) | Failure::Data(m) | Failure::Config(m) => m,
        }
    }
}

impl From<DeidError> for Failure {
    fn from(e: DeidError) -> Self {
        match e {
            DeidError::Io { .. } | DeidError::ThreadPool(_) => Failure::Io(e.to_string()),
            DeidError::File { ref source, .. } if matches!(source, crate::dicom::DicomError::Io { .. }) => {
                Failure::Io(e.to_string())
            }
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<AnswerKeyError> for Failure {
    fn from(e: AnswerKeyError) -> Self {
        match e {
            AnswerKeyError::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<ScoreError> for Failure {
    fn from(e: ScoreError) -> Self {
        match e {
            ScoreError::KeyCorpusMismatch { .. } => Failure::Config(e.to_string()),
            ScoreError::Listing { .. } | ScoreError::ThreadPool(_) => Failure::Io(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<ReportError> for Failure {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Io { .. } => Failure::Io(e.to_string()),
            ReportError::Json { .. } => Failure::Data(e.to_string()),
        }
    }
}

impl From<CorpusError> for Failure {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::SpecError(_) => Failure::Usage(e.to_string()),
            CorpusError::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

/// Runs the command line with `args` (program name first) and returns the
/// exit code. Output goes to the process's stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout(), &mut std::io::stderr())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "midib: {}", f.message());
            f.code()
        }
    }
}

fn require_dir(flag: &str, p: &Path) -> Result<(), Failure> {
    if p.is_dir() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("{flag} {} is not a directory", p.display())))
    }
}

fn require_file(flag: &str, p: &Path) -> Result<(), Failure> {
    if p.is_file() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("{flag} {} is not a file", p.display())))
    }
}

fn jobs(j: Option<usize>) -> Result<usize, Failure> {
    match j {
        Some(0) => Err(Failure::Usage("--jobs must be at least 1".into())),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn load_policy(arg: &str) -> Result<DeidPolicy, Failure> {
    let p = Path::new(arg);
    if p.is_file() {
        return Ok(DeidPolicy::from_file(p)?);
    }
    if matches!(arg, "default" | "default.policy" | "builtin") {
        return Ok(DeidPolicy::builtin());
    }
    Err(Failure::Usage(format!("--policy {arg} is not a file")))
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    let say = |out: &mut dyn Write, s: String| {
        writeln!(out, "{s}").map_err(|e| Failure::Io(e.to_string()))
    };
    match command {
        Command::GenCorpus {
            out: dir,
            seed,
            patients,
            burnin_fraction,
        } => {
            let spec = CorpusSpec {
                n_patients: patients,
                burnin_fraction,
                seed,
                ..CorpusSpec::default()
            };
            let g = corpus::generate(&spec, &dir)?;
            say(
                out,
                format!(
                    "generated {} files and {} key entries in {}",
                    g.files,
                    g.key.len(),
                    dir.display()
                ),
            )
        }
        Command::Deid {
            input,
            out: dir,
            policy,
            seed,
            regions,
            uid_root,
            lenient,
            jobs: j,
        } => {
            require_dir("--in", &input)?;
            let threads = jobs(j)?;
            let policy = load_policy(&policy)?;
            let regions = match regions {
                Some(r) => {
                    require_file("--regions", &r)?;
                    load_regions(&r)?
                }
                None => {
                    let r = input.join(corpus::REGIONS_FILE);
                    if r.is_file() {
                        load_regions(&r)?
                    } else {
                        Vec::new()
                    }
                }
            };
            let vault = match uid_root {
                Some(root) => IdentityVault::with_root(seed, &root)
                    .map_err(|e| Failure::Usage(e.to_string()))?,
                None => IdentityVault::new(seed),
            };
            let scrub = ScrubberConfig::default();
            let run = DeidRun {
                policy: &policy,
                scrub: &scrub,
                regions: &regions,
                lenient,
            };
            let o = deidentify_corpus(&input, &dir, &run, &vault, threads)?;
            say(
                out,
                format!(
                    "de-identified {} files ({} element actions, {} unparseable dates emptied) into {}",
                    o.files,
                    o.actions,
                    o.emptied_dates,
                    dir.display()
                ),
            )
        }
        Command::Score {
            key,
            orig,
            sub,
            patid_map,
            uid_map,
            mode,
            out: dir,
            weights,
            strict_dates,
            jobs: j,
        } => {
            require_file("--key", &key)?;
            require_dir("--orig", &orig)?;
            require_dir("--sub", &sub)?;
            require_file("--patid-map", &patid_map)?;
            require_file("--uid-map", &uid_map)?;
            let weights = match weights {
                Some(w) => {
                    require_file("--weights", &w)?;
                    let text = std::fs::read_to_string(&w)
                        .map_err(|e| Failure::Io(format!("{}: {e}", w.display())))?;
                    Some(parse_weights(&text)?)
                }
                None => None,
            };
            let options = ScoreOptions {
                mode: mode.parse::<AggregationMode>().map_err(Failure::Usage)?,
                strict_dates,
                jobs: jobs(j)?,
            };
            let key = load_answer_key(&key)?;
            let patid = load_mapping(&patid_map, MappingKind::PatientId)?;
            let uids = load_mapping(&uid_map, MappingKind::Uid)?;
            let outcome = score_submission(&key, &orig, &sub, &patid, &uids, &options)?;
            let weighted = weights
                .map(|w| weighted_accuracy(&outcome.summary, &w))
                .transpose()?;
            write_scoring_report(&outcome.summary, &dir)?;
            write_discrepancy_report(&outcome.failed, &dir)?;
            let summary = RunSummary::new(&outcome.summary, weighted, &outcome.missing);
            write_run_summary(&summary, &dir)?;
            say(out, summary.headline())
        }
        Command::Report { run } => {
            require_dir("--run", &run)?;
            let s = read_run_summary(&run)?;
            say(out, format!("mode={} errors={} pass={} total={}", s.mode, s.errors, s.pass, s.total))?;
            for a in &s.actions {
                say(
                    out,
                    format!("{:<16} errors={} pass={} total={}", a.action.as_str(), a.errors, a.pass, a.total),
                )?;
            }
            if !s.missing_instances.is_empty() {
                say(out, format!("missing instances: {}", s.missing_instances.len()))?;
            }
            say(out, s.headline())
        }
    }
}
