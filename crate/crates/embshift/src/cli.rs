//! Command-line interface.
//!
//! Exit status: 0 success, 1 analysis or validation findings, 2 usage or IO errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use embshift_core::audit::{compare, CompareOptions, GroupBy, KdeOptions};
use embshift_core::embstore::{validate_store, EmbeddingStore};
use embshift_core::seqgen::{
    default_templates, generate_encoder_pairs_with, generate_winodec_with, ArticleMode, PairConfig, ProbeKind,
    ProbeSequence, ScoreConfig, WinodecOptions, DEFAULT_PAIR_GENDERS,
};
use embshift_core::simengine::pair_scores;
use embshift_core::stats::{Bandwidth, DEFAULT_GRID_SIZE};
use embshift_core::TermBank;

use crate::error::{Error, Result};
use crate::files::{load_templates, load_term_bank, read_corpus, read_store, save_store, write_atomic, write_corpus};
use crate::manifest::{sidecar_path, ManifestBuilder};
use crate::render::{render_report, render_samples_csv, Format};
use crate::synth::{planted_store, PlantedBias};

#[derive(Debug, Parser)]
#[command(
    name = "embshift",
    version,
    about = "Gender-occupation embedding audits for baseline vs bias-mitigated models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a probe corpus.
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Check an embedding store against a probe corpus.
    Validate {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Compare a baseline and a mitigated store and render the audit report.
    Analyze(AnalyzeArgs),
    /// Dump per-sequence cosine scores for one store.
    Scores {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_enum)]
        config: Option<ConfigArg>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a synthetic store with a planted gender-occupation association.
    Synth {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        label: String,
        #[arg(long, default_value_t = 0.3)]
        female_mix: f64,
        #[arg(long, default_value_t = 0.0)]
        male_mix: f64,
        #[arg(long, default_value_t = 0.1)]
        noise: f64,
        #[arg(long, default_value_t = 64)]
        dim: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum GenerateKind {
    /// Two-sentence decoder probes, one per (occupation, gender term).
    Winodec {
        /// Term-bank file; the shipped bank when omitted.
        #[arg(long)]
        term_bank: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ArticleArg::Fixed)]
        article: ArticleArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Counterfactual sentence pairs differing only in the gender term.
    EncoderPairs {
        #[arg(long)]
        term_bank: Option<PathBuf>,
        /// Template file; the shipped 20 templates when omitted.
        #[arg(long)]
        templates: Option<PathBuf>,
        /// Gender terms instantiated per template.
        #[arg(long, value_delimiter = ',')]
        genders: Option<Vec<String>>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ArticleArg {
    Fixed,
    Agree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConfigArg {
    G1o1,
    G1o2,
    G2o1,
    G2o2,
    Encoder,
}

impl From<ConfigArg> for ScoreConfig {
    fn from(c: ConfigArg) -> Self {
        match c {
            ConfigArg::G1o1 => ScoreConfig::Winodec(PairConfig::G1O1),
            ConfigArg::G1o2 => ScoreConfig::Winodec(PairConfig::G1O2),
            ConfigArg::G2o1 => ScoreConfig::Winodec(PairConfig::G2O1),
            ConfigArg::G2o2 => ScoreConfig::Winodec(PairConfig::G2O2),
            ConfigArg::Encoder => ScoreConfig::EncoderPair,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GroupByArg {
    Stereotype,
    Occupation,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum FormatArg {
    Md,
    Csv,
    Svg,
    Machine,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Md => Format::Markdown,
            FormatArg::Csv => Format::Csv,
            FormatArg::Svg => Format::Svg,
            FormatArg::Machine => Format::Machine,
        }
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub baseline: PathBuf,
    #[arg(long)]
    pub mitigated: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Pair configuration; g2o2 for WinoDec corpora and encoder for encoder-pair corpora when omitted.
    #[arg(long, value_enum)]
    pub config: Option<ConfigArg>,
    #[arg(long, value_enum, default_value_t = GroupByArg::Stereotype)]
    pub group_by: GroupByArg,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    pub kde: Switch,
    #[arg(long, default_value = "silverman", value_parser = parse_bandwidth)]
    pub bandwidth: Bandwidth,
    #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
    pub grid_size: usize,
    /// Output formats; repeatable. Markdown when omitted.
    #[arg(long = "format", value_enum)]
    pub formats: Vec<FormatArg>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_bandwidth(s: &str) -> std::result::Result<Bandwidth, String> {
    s.parse()
}

/// Parses `args` (including the program name) and runs the command; returns the exit status.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code() as u8;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<u8> {
    match command {
        Command::Generate { kind } => cmd_generate(kind),
        Command::Validate { store, corpus } => cmd_validate(&store, &corpus),
        Command::Analyze(args) => cmd_analyze(&args),
        Command::Scores { store, corpus, config, out } => cmd_scores(&store, &corpus, config, &out),
        Command::Synth { corpus, out, label, female_mix, male_mix, noise, dim, seed } => {
            let params = PlantedBias { dim, female_mix, male_mix, noise, seed };
            cmd_synth(&corpus, &out, &label, params)
        }
    }
}

fn bank_from(path: Option<&Path>, m: &mut ManifestBuilder) -> Result<TermBank> {
    match path {
        Some(p) => {
            m.input("term_bank", p);
            load_term_bank(p)
        }
        None => {
            m.input("term_bank", "<default>");
            Ok(TermBank::default_bank())
        }
    }
}

fn cmd_generate(kind: GenerateKind) -> Result<u8> {
    let (corpus, out, mut manifest) = match kind {
        GenerateKind::Winodec { term_bank, article, out } => {
            let mut m = ManifestBuilder::new("generate winodec");
            let bank = bank_from(term_bank.as_deref(), &mut m)?;
            let article = match article {
                ArticleArg::Fixed => ArticleMode::Fixed,
                ArticleArg::Agree => ArticleMode::Agree,
            };
            m.param("article", format!("{article:?}").to_lowercase());
            (generate_winodec_with(&bank, WinodecOptions { article })?, out, m)
        }
        GenerateKind::EncoderPairs { term_bank, templates, genders, out } => {
            let mut m = ManifestBuilder::new("generate encoder-pairs");
            let bank = bank_from(term_bank.as_deref(), &mut m)?;
            let templates = match &templates {
                Some(p) => {
                    m.input("templates", p);
                    load_templates(p)?
                }
                None => {
                    m.input("templates", "<default>");
                    default_templates()
                }
            };
            let genders: Vec<String> =
                genders.unwrap_or_else(|| DEFAULT_PAIR_GENDERS.iter().map(|s| s.to_string()).collect());
            m.param("genders", genders.clone());
            let refs: Vec<&str> = genders.iter().map(String::as_str).collect();
            (generate_encoder_pairs_with(&templates, &bank, &refs)?, out, m)
        }
    };
    write_corpus(&corpus, &out)?;
    manifest.param("sequences", corpus.len()).output(&out);
    manifest.write(&sidecar_path(&out))?;
    println!("{}", corpus.len());
    Ok(0)
}

fn cmd_validate(store_path: &Path, corpus_path: &Path) -> Result<u8> {
    let store = read_store(store_path)?;
    let corpus = read_corpus(corpus_path)?;
    let issues = validate_store(&store, &corpus);
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    for issue in &issues {
        let _ = writeln!(lock, "{issue}");
    }
    if issues.is_empty() {
        let _ = writeln!(lock, "ok: {} vectors, dim {}, model {}", store.count(), store.dim(), store.model_label());
        Ok(0)
    } else {
        Ok(1)
    }
}

fn resolve_config(config: Option<ConfigArg>, corpus: &[ProbeSequence]) -> ScoreConfig {
    match config {
        Some(c) => c.into(),
        None if corpus.first().is_some_and(|s| s.kind == ProbeKind::EncoderPair) => ScoreConfig::EncoderPair,
        None => ScoreConfig::Winodec(PairConfig::G2O2),
    }
}

/// Prints validation issues for `store`; true when it is clean.
fn check_store(store: &EmbeddingStore, corpus: &[ProbeSequence], path: &Path) -> bool {
    let issues = validate_store(store, corpus);
    for issue in &issues {
        eprintln!("{}: {issue}", path.display());
    }
    issues.is_empty()
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<u8> {
    let mut m = ManifestBuilder::new("analyze");
    m.input("baseline", &args.baseline).input("mitigated", &args.mitigated).input("corpus", &args.corpus);

    let mut formats: Vec<FormatArg> = if args.formats.is_empty() { vec![FormatArg::Md] } else { args.formats.clone() };
    formats.sort();
    formats.dedup();
    if args.kde == Switch::Off && formats.contains(&FormatArg::Svg) {
        return Err(Error::Usage("--format svg needs --kde on".into()));
    }

    let corpus = read_corpus(&args.corpus)?;
    let baseline = read_store(&args.baseline)?;
    let mitigated = read_store(&args.mitigated)?;
    let clean_b = check_store(&baseline, &corpus, &args.baseline);
    let clean_m = check_store(&mitigated, &corpus, &args.mitigated);
    if !(clean_b && clean_m) {
        return Ok(1);
    }

    let config = resolve_config(args.config, &corpus);
    let group_by = match args.group_by {
        GroupByArg::Stereotype => GroupBy::Stereotype,
        GroupByArg::Occupation => GroupBy::Occupation,
        GroupByArg::None => GroupBy::None,
    };
    let kde = (args.kde == Switch::On).then_some(KdeOptions { grid_size: args.grid_size, bandwidth: args.bandwidth });
    m.param("config", config.as_str())
        .param("group_by", format!("{:?}", args.group_by).to_lowercase())
        .param("kde", args.kde == Switch::On)
        .param("bandwidth", args.bandwidth.to_string())
        .param("grid_size", args.grid_size)
        .param("formats", formats.iter().map(|f| Format::from(*f).extension()).collect::<Vec<_>>());

    let base_samples = pair_scores(&baseline, &corpus, config)?;
    let mit_samples = pair_scores(&mitigated, &corpus, config)?;
    let mut report = compare(&base_samples, &mit_samples, CompareOptions { group_by, kde })?;
    report.corpus = format!("{} [{}]", report.corpus, args.corpus.display());

    fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    for f in formats {
        let format = Format::from(f);
        let bytes = render_report(&report, format)?;
        let path = args.out.join(format!("report.{}", format.extension()));
        write_atomic(&path, &bytes)?;
        m.output(&path);
        println!("wrote {}", path.display());
    }
    m.write(&args.out.join("manifest.json"))?;
    Ok(0)
}

fn cmd_scores(store_path: &Path, corpus_path: &Path, config: Option<ConfigArg>, out: &Path) -> Result<u8> {
    let mut m = ManifestBuilder::new("scores");
    m.input("store", store_path).input("corpus", corpus_path);
    let corpus = read_corpus(corpus_path)?;
    let store = read_store(store_path)?;
    if !check_store(&store, &corpus, store_path) {
        return Ok(1);
    }
    let config = resolve_config(config, &corpus);
    let samples = pair_scores(&store, &corpus, config)?;
    write_atomic(out, &render_samples_csv(&samples)?)?;
    m.param("config", config.as_str()).param("samples", samples.len()).output(out);
    m.write(&sidecar_path(out))?;
    println!("{}", samples.len());
    Ok(0)
}

fn cmd_synth(corpus_path: &Path, out: &Path, label: &str, params: PlantedBias) -> Result<u8> {
    let mut m = ManifestBuilder::new("synth");
    m.input("corpus", corpus_path);
    let corpus = read_corpus(corpus_path)?;
    let store = planted_store(&corpus, &params, label).map_err(|source| Error::Store { path: out.into(), source })?;
    save_store(&store, out)?;
    m.param("label", label)
        .param("dim", params.dim)
        .param("female_mix", params.female_mix)
        .param("male_mix", params.male_mix)
        .param("noise", params.noise)
        .param("seed", params.seed)
        .output(out);
    m.write(&sidecar_path(out))?;
    println!("{}", store.count());
    Ok(0)
}
