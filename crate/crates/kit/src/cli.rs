//! The `vfrkit` command line.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use vfr_core::augment::{build_plan, AugmentConfig, SetLabel, StyleLabel};
use vfr_core::eval::{compute_eer, decisions_at_threshold, embed_utterance, mcnemar_test, score_trials};
use vfr_core::frontend::{extract_fixed, FrontendConfig, FIXED_SHIFT_MS, OVERSAMPLED_SHIFT_MS};
use vfr_core::toybench::StyleSpec;
use vfr_core::vfr::{vfr_analyze, EntropyDomain, VfrAnalysis};

use crate::bench::{run_bench, synth_corpus, BenchSpec, SynthSpec};
use crate::corpus::read_manifest;
use crate::error::{stem, write_file, KitError, Result};
use crate::runner::{load_audio, run_plan};
use crate::scoring::{
    format_det, format_eer, format_embedding, format_mcnemar, format_scores, load_embeddings, read_scores, read_trials,
};
use crate::vfrf::{read_features, to_csv, write_features};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (VFRF v1)");

const AFTER_HELP: &str = "\
File formats:
  audio       RIFF/WAVE, 16-bit PCM or 32-bit float, any channel count (averaged to mono)
  features    VFRF v1 binary; --csv adds a text copy (timestamp_ms then coefficients)
  manifest    CSV utterance_id,speaker_id,style,audio_path (paths relative to the manifest)
  index       CSV feature_path,utterance_id,speaker_id,style,variant (paths relative to the index)
  trials      TSV enroll_id, test_id, target|nontarget
  scores      trials columns plus a score with 6 decimals
  embeddings  text, one `utterance_id v1 v2 ...` line per utterance

Exit status: 0 success, 1 invalid input or failure, 2 some files of a batch failed.";

#[derive(Debug, Parser)]
#[command(name = "vfrkit", version = VERSION, about = "Entropy-based variable frame rate features and speaker-verification tooling", after_help = AFTER_HELP)]
pub struct Cli {
    /// Working sample rate; input audio is resampled to it.
    #[arg(long, global = true, default_value_t = 8000)]
    pub sample_rate: u32,
    /// Base seed for synthesis and benchmarks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for corpus-level work (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory for outputs that are not named explicitly.
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Domain {
    Linear,
    Log,
}

impl From<Domain> for EntropyDomain {
    fn from(d: Domain) -> Self {
        match d {
            Domain::Linear => EntropyDomain::Linear,
            Domain::Log => EntropyDomain::Log,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fixed-rate MFCCs (10 ms or 2.5 ms shift) with sliding CMN.
    Extract(ExtractArgs),
    /// Entropy-based variable frame rate MFCCs.
    Vfr(VfrArgs),
    /// Materialize the feature sets of an adaptation configuration.
    Augment(AugmentArgs),
    /// Mean and standard-deviation embedding of a feature file.
    Embed(EmbedArgs),
    /// Cosine-score a trial list.
    Score(ScoreArgs),
    /// Equal error rate of a score file.
    Eer(EerArgs),
    /// McNemar test between two systems scored on the same trials.
    Mcnemar(McnemarArgs),
    /// Run the synthetic speaker-verification benchmark.
    Bench(BenchArgs),
    /// Write a synthetic multi-style corpus and its manifest.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    pub input: PathBuf,
    /// Output VFRF file (default: <output-dir>/<stem>.vfrf).
    pub output: Option<PathBuf>,
    /// Frame shift in milliseconds: 10 or 2.5.
    #[arg(long, default_value_t = FIXED_SHIFT_MS)]
    pub shift_ms: f64,
    #[arg(long)]
    pub no_cmn: bool,
    /// Also write a CSV copy.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VfrArgs {
    pub input: PathBuf,
    /// Output VFRF file (default: <output-dir>/<stem>.vfrf).
    pub output: Option<PathBuf>,
    /// Write the entropy curve and thresholds as CSV.
    #[arg(long)]
    pub dump_entropy: Option<PathBuf>,
    /// What the entropy buffers hold: linear or log mel energies.
    #[arg(long, value_enum, default_value_t = Domain::Linear)]
    pub entropy_domain: Domain,
    /// Also write a CSV copy.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// baseline, vfr-norm, vfr-norm-aug or multi-style.
    #[arg(long)]
    pub config: String,
    /// Style of the development data (required except for multi-style).
    #[arg(long)]
    pub style: Option<String>,
    /// Role of the manifest's utterances: development, enrollment or test.
    #[arg(long, default_value = "development")]
    pub set: String,
    /// Permit VFR variants of enrollment or test utterances.
    #[arg(long)]
    pub allow_vfr_on_eval: bool,
    #[arg(long, value_enum, default_value_t = Domain::Linear)]
    pub entropy_domain: Domain,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    pub input: PathBuf,
    /// Output file (default: standard output).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub trials: PathBuf,
    /// Directory of *.emb embedding files and/or *.vfrf feature files.
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Output file (default: standard output).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EerArgs {
    pub scores: PathBuf,
    /// Write the FAR/FRR operating points as CSV.
    #[arg(long)]
    pub det: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct McnemarArgs {
    #[arg(long)]
    pub scores_a: PathBuf,
    #[arg(long)]
    pub scores_b: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 20)]
    pub speakers: usize,
    #[arg(long, default_value = "synthetic-1")]
    pub enroll_style: String,
    #[arg(long, default_value = "synthetic-1.5")]
    pub test_style: String,
    #[arg(long, default_value = "baseline")]
    pub config: String,
    /// Number of seeds, starting at --seed.
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    /// Neutral length of each utterance in seconds.
    #[arg(long, default_value_t = 3.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 2)]
    pub tests_per_speaker: usize,
    #[arg(long, value_enum, default_value_t = Domain::Linear)]
    pub entropy_domain: Domain,
    /// Write the JSON report here instead of standard output.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 10)]
    pub speakers: usize,
    /// Comma-separated style names.
    #[arg(long, value_delimiter = ',', default_value = "read,narrative,conversation,pet-directed")]
    pub styles: Vec<String>,
    /// Utterances per speaker and style.
    #[arg(long, default_value_t = 2)]
    pub per_style: usize,
    #[arg(long, default_value_t = 3.0)]
    pub duration: f64,
}

fn usage(msg: impl Into<String>) -> KitError {
    KitError::Usage(msg.into())
}

impl Cli {
    fn frontend(&self) -> Result<FrontendConfig> {
        let cfg = FrontendConfig::new(self.sample_rate);
        cfg.validate()?;
        Ok(cfg)
    }

    fn output_dir(&self) -> Result<&Path> {
        self.output_dir.as_deref().ok_or_else(|| usage("this subcommand needs --output-dir"))
    }

    /// A named output, or `<output-dir>/<stem of input>.<ext>`.
    fn output_for(&self, named: Option<&PathBuf>, input: &Path, ext: &str) -> Result<PathBuf> {
        match named {
            Some(p) => Ok(p.clone()),
            None => Ok(self.output_dir()?.join(format!("{}.{ext}", stem(input)))),
        }
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_file(p, text.as_bytes()),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|()| out.flush()).map_err(|e| KitError::io(Path::new("<stdout>"), e))
        }
    }
}

fn parse_style(s: &str) -> Result<StyleLabel> {
    Ok(s.parse::<StyleLabel>()?)
}

fn parse_config(s: &str) -> Result<AugmentConfig> {
    Ok(s.parse::<AugmentConfig>()?)
}

fn entropy_csv(a: &VfrAnalysis) -> String {
    use std::fmt::Write as _;
    let th = &a.thresholds;
    let mut out = format!("# T1={:.6} T2={:.6} T3={:.6}\nsegment_index,start_ms,entropy_nats\n", th.t1, th.t2, th.t3);
    for (i, (h, start)) in a.curve.values.iter().zip(&a.curve.segment_start_indices).enumerate() {
        let _ = writeln!(out, "{i},{:.1},{h:.6}", *start as f64 * OVERSAMPLED_SHIFT_MS);
    }
    out
}

fn cmd_extract(cli: &Cli, a: &ExtractArgs) -> Result<i32> {
    if a.shift_ms != FIXED_SHIFT_MS && a.shift_ms != OVERSAMPLED_SHIFT_MS {
        return Err(usage(format!("--shift-ms must be {FIXED_SHIFT_MS} or {OVERSAMPLED_SHIFT_MS}, got {}", a.shift_ms)));
    }
    let cfg = cli.frontend()?.with_shift(a.shift_ms);
    let out = cli.output_for(a.output.as_ref(), &a.input, "vfrf")?;
    let audio = load_audio(&a.input, cfg.sample_rate)?;
    let feats = extract_fixed(&audio, &cfg, !a.no_cmn)?;
    write_features(&out, &feats)?;
    if let Some(csv) = &a.csv {
        write_file(csv, to_csv(&feats).as_bytes())?;
    }
    eprintln!("{}: {} frames -> {}", a.input.display(), feats.num_rows(), out.display());
    Ok(EXIT_OK)
}

fn cmd_vfr(cli: &Cli, a: &VfrArgs) -> Result<i32> {
    let mut cfg = cli.frontend()?;
    cfg.entropy_domain = a.entropy_domain.into();
    let out = cli.output_for(a.output.as_ref(), &a.input, "vfrf")?;
    let audio = load_audio(&a.input, cfg.sample_rate)?;
    let analysis = vfr_analyze(&audio, &cfg)?;
    write_features(&out, &analysis.features)?;
    if let Some(p) = &a.dump_entropy {
        write_file(p, entropy_csv(&analysis).as_bytes())?;
    }
    if let Some(csv) = &a.csv {
        write_file(csv, to_csv(&analysis.features).as_bytes())?;
    }
    eprintln!("{}: {} frames -> {}", a.input.display(), analysis.features.num_rows(), out.display());
    Ok(EXIT_OK)
}

fn cmd_augment(cli: &Cli, a: &AugmentArgs) -> Result<i32> {
    let config = parse_config(&a.config)?;
    let style = a.style.as_deref().map(parse_style).transpose()?;
    let set: SetLabel = a.set.parse()?;
    if config.uses_vfr() && set != SetLabel::Development && !a.allow_vfr_on_eval {
        return Err(usage(format!(
            "{config} would create VFR variants of {} utterances; VFR is meant for development data (pass --allow-vfr-on-eval to override)",
            a.set
        )));
    }
    let mut cfg = cli.frontend()?;
    cfg.entropy_domain = a.entropy_domain.into();
    let out_dir = cli.output_dir()?.to_path_buf();
    let manifest = read_manifest(&a.manifest, set)?;
    let plan = build_plan(&manifest, config, style.as_ref())?;
    let outcome = run_plan(&plan, &cfg, &out_dir)?;
    for f in &outcome.failures {
        eprintln!("failed: {}: {}", f.utterance_id, f.error);
    }
    eprintln!(
        "{} of {} feature files written; index {}",
        outcome.written.len(),
        plan.outputs.len(),
        outcome.index_path.display()
    );
    Ok(if outcome.failures.is_empty() { EXIT_OK } else { EXIT_PARTIAL })
}

fn cmd_embed(a: &EmbedArgs) -> Result<i32> {
    let feats = read_features(&a.input)?;
    let mut e = embed_utterance(&feats)?;
    e.utterance_id = stem(&a.input);
    emit(a.output.as_deref(), &format_embedding(&e))?;
    Ok(EXIT_OK)
}

fn cmd_score(a: &ScoreArgs) -> Result<i32> {
    let trials = read_trials(&a.trials)?;
    let embeddings = load_embeddings(&a.embeddings)?;
    let scores = score_trials(&trials, &embeddings)?;
    emit(a.output.as_deref(), &format_scores(&scores))?;
    Ok(EXIT_OK)
}

fn cmd_eer(a: &EerArgs) -> Result<i32> {
    let report = compute_eer(&read_scores(&a.scores)?)?;
    if let Some(det) = &a.det {
        write_file(det, format_det(&report).as_bytes())?;
    }
    emit(None, &format!("{}\n", format_eer(&report)))?;
    Ok(EXIT_OK)
}

fn cmd_mcnemar(a: &McnemarArgs) -> Result<i32> {
    let sa = read_scores(&a.scores_a)?;
    let sb = read_scores(&a.scores_b)?;
    if sa.records.len() != sb.records.len() {
        return Err(usage(format!("score files list {} and {} trials", sa.records.len(), sb.records.len())));
    }
    if let Some(i) = sa
        .records
        .iter()
        .zip(&sb.records)
        .position(|(x, y)| (&x.enroll_id, &x.test_id, x.label) != (&y.enroll_id, &y.test_id, y.label))
    {
        return Err(usage(format!("trial {} differs between the two score files; both must list the same trials in the same order", i + 1)));
    }
    let (ta, tb) = (compute_eer(&sa)?.threshold, compute_eer(&sb)?.threshold);
    let report = mcnemar_test(&decisions_at_threshold(&sa, ta), &decisions_at_threshold(&sb, tb))?;
    emit(None, &format_mcnemar(&report, (ta, tb)))?;
    Ok(EXIT_OK)
}

fn cmd_bench(cli: &Cli, a: &BenchArgs) -> Result<i32> {
    let spec = BenchSpec {
        n_speakers: a.speakers,
        enroll_style: StyleSpec::preset(&parse_style(&a.enroll_style)?)?,
        test_style: StyleSpec::preset(&parse_style(&a.test_style)?)?,
        config: parse_config(&a.config)?,
        seeds: (0..a.seeds).map(|i| cli.seed.wrapping_add(i)).collect(),
        duration_s: a.duration,
        tests_per_speaker: a.tests_per_speaker,
        sample_rate: cli.sample_rate,
        entropy_domain: a.entropy_domain.into(),
    };
    let report = run_bench(&spec)?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    emit(a.output.as_deref(), &json)?;
    Ok(EXIT_OK)
}

fn cmd_synth(cli: &Cli, a: &SynthArgs) -> Result<i32> {
    let styles = a.styles.iter().map(|s| parse_style(s)).collect::<Result<Vec<_>>>()?;
    for s in &styles {
        StyleSpec::preset(s)?;
    }
    let spec = SynthSpec {
        n_speakers: a.speakers,
        styles,
        per_style: a.per_style,
        duration_s: a.duration,
        seed: cli.seed,
        sample_rate: cli.sample_rate,
    };
    let manifest = synth_corpus(&spec, cli.output_dir()?)?;
    eprintln!("wrote {}", manifest.display());
    Ok(EXIT_OK)
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Extract(a) => cmd_extract(cli, a),
        Command::Vfr(a) => cmd_vfr(cli, a),
        Command::Augment(a) => cmd_augment(cli, a),
        Command::Embed(a) => cmd_embed(a),
        Command::Score(a) => cmd_score(a),
        Command::Eer(a) => cmd_eer(a),
        Command::Mcnemar(a) => cmd_mcnemar(a),
        Command::Bench(a) => cmd_bench(cli, a),
        Command::Synth(a) => cmd_synth(cli, a),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status. Diagnostics go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    if cli.sample_rate == 0 {
        eprintln!("error: --sample-rate must be positive");
        return EXIT_ERROR;
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
