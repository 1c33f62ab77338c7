//! `debias-embed` command line.
//!
//! Exit status: 0 on success, 1 for usage and validation errors, 2 for I/O
//! failures. A JSON config (`--config FILE`) holds per-subcommand defaults,
//! e.g. `{"debias": {"variant": "eqr", "k": 4, "center": true}}`; flags given
//! on the command line take precedence over it.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use debias_embed_core::align::{apply_map, merge_spaces, procrustes_fit, tag_languages};
use debias_embed_core::debias::{plan_variant, DebiasConfig, DebiasOptions, Scope, Variant};
use debias_embed_core::extrinsic::{synthesize_corpus, CorpusSpec, TrainConfig, DEFAULT_MIN_COUNT};
use debias_embed_core::lexicon::{split_pairs, GenderLexicon, PairSplit, DEFAULT_TRAIN_PAIRS};
use debias_embed_core::metrics::{cross_score_matrix, DEFAULT_EPSILON};
use debias_embed_core::subspace::Method;
use debias_embed_core::{EmbeddingSpace, Warning};
use log::info;
use serde::Serialize;
use serde_json::Value;

use crate::artifact::{manifest_name, read_json, write_json, RunManifest, SubspaceFile};
use crate::corpus::{load_corpus, save_corpus};
use crate::dictionary::load_dictionary;
use crate::error::{Error, Result};
use crate::lexicon_json::{bundled_lexicon, load_lexicon, BUNDLED_LEXICON, BUNDLED_LEXICON_NAME};
use crate::parallel::{debias_space_par, init_thread_pool};
use crate::report::{
    compare_rows, compute_exbias, compute_inbias, exbias_table, inbias_table, xscore_table,
    ExbiasReport, InbiasReport, SeedMode, Table, XscoreReport,
};
use crate::vec_format::{load_embedding, normalize_lenient, save_vec, ROUND_TRIP_PRECISION};

#[derive(Debug, Parser)]
#[command(name = "debias-embed", version, about = "Linear-projection debiasing of word embeddings")]
pub struct Cli {
    /// JSON file with per-subcommand defaults; command-line flags win
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Map a source embedding into a target embedding's space
    Align(AlignArgs),
    /// Concatenate embeddings into one space with `lang:word` entries
    Merge(MergeArgs),
    /// Remove a gender subspace from an embedding
    Debias(DebiasArgs),
    /// Print and save InBias, cross-language or extrinsic bias tables
    Report(ReportArgs),
    /// Generate a synthetic bios corpus with planted gender words
    SynthCorpus(SynthArgs),
}

const SUBCOMMANDS: [&str; 5] = ["align", "merge", "debias", "report", "synth-corpus"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantArg {
    Mono,
    Multi,
    Eqr,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Mono => Variant::Mono,
            VariantArg::Multi => Variant::Multi,
            VariantArg::Eqr => Variant::Eqr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Pca,
    Ppa,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Pca => Method::Pca,
            MethodArg::Ppa => Method::Ppa,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScopeArg {
    AllWords,
    NeutralOnly,
}

impl From<ScopeArg> for Scope {
    fn from(s: ScopeArg) -> Self {
        match s {
            ScopeArg::AllWords => Scope::AllWords,
            ScopeArg::NeutralOnly => Scope::NeutralOnly,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedsArg {
    /// Male and female sides of the held-out test pairs
    Test,
    /// The lexicon's static seed lists
    Lexicon,
}

impl From<SeedsArg> for SeedMode {
    fn from(s: SeedsArg) -> Self {
        match s {
            SeedsArg::Test => SeedMode::Test,
            SeedsArg::Lexicon => SeedMode::Lexicon,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct AlignArgs {
    /// Source embedding (.vec)
    #[arg(long)]
    pub src: PathBuf,
    #[arg(long)]
    pub src_lang: String,
    /// Target embedding (.vec)
    #[arg(long)]
    pub tgt: PathBuf,
    #[arg(long)]
    pub tgt_lang: String,
    /// Bilingual dictionary, `source<TAB>target` per line
    #[arg(long)]
    pub dict: PathBuf,
    /// Output .vec
    #[arg(long)]
    pub out: PathBuf,
    /// Write the merged source+target space instead of the mapped source alone
    #[arg(long)]
    pub merge: bool,
    /// Fit on the vectors as stored instead of unit-normalizing them first
    #[arg(long)]
    pub no_normalize: bool,
    /// Keep the mapped vectors as computed instead of re-normalizing them
    #[arg(long)]
    pub no_renormalize: bool,
    /// Decimal places in the output; 17 or more writes round-trip values
    #[arg(long, default_value_t = ROUND_TRIP_PRECISION)]
    pub precision: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct MergeArgs {
    /// `LANG=PATH`, or `PATH` for a file whose words carry `lang:` prefixes
    #[arg(long = "input", required = true, value_name = "[LANG=]PATH")]
    pub inputs: Vec<String>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = ROUND_TRIP_PRECISION)]
    pub precision: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct DebiasArgs {
    /// Embedding to debias (.vec)
    #[arg(long)]
    pub embedding: PathBuf,
    /// Language tag of the embedding; inferred from `lang:` prefixes if omitted
    #[arg(long)]
    pub lang: Option<String>,
    /// Gender lexicon (JSON); the bundled en/hi/be/te lexicon if omitted
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Debiased output (.vec)
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = VariantArg::Mono)]
    pub variant: VariantArg,
    /// Subspace dimension
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Pca)]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value_t = ScopeArg::AllWords)]
    pub scope: ScopeArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Training pairs per language; the rest are held out
    #[arg(long, default_value_t = DEFAULT_TRAIN_PAIRS)]
    pub train_pairs: usize,
    /// Mean-center the difference matrix before PCA
    #[arg(long)]
    pub center: bool,
    /// Rescale debiased vectors to unit length
    #[arg(long)]
    pub renormalize_after: bool,
    /// Language whose pairs build the subspace (mono variant)
    #[arg(long)]
    pub language: Option<String>,
    /// Languages taking part; defaults to those of the embedding
    #[arg(long, value_delimiter = ',')]
    pub languages: Vec<String>,
    #[arg(long, default_value_t = ROUND_TRIP_PRECISION)]
    pub precision: usize,
    /// Subspace JSON; defaults to `<out>.subspace.json`
    #[arg(long)]
    pub subspace_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[command(group(ArgGroup::new("kind").required(true).args(["inbias", "xscore", "exbias"])))]
pub struct ReportArgs {
    /// InBias per language (one column per embedding)
    #[arg(long)]
    pub inbias: bool,
    /// Cross-language score matrix
    #[arg(long)]
    pub xscore: bool,
    /// Extrinsic bias: accuracy gap of an occupation classifier
    #[arg(long)]
    pub exbias: bool,
    /// Embedding(s); the first is the baseline
    #[arg(long = "embedding")]
    pub embeddings: Vec<PathBuf>,
    /// Column or row label per embedding; defaults to the file stem
    #[arg(long = "label")]
    pub labels: Vec<String>,
    /// Language tag of the embeddings; inferred from `lang:` prefixes if omitted
    #[arg(long)]
    pub lang: Option<String>,
    /// Gender lexicon (JSON); the bundled en/hi/be/te lexicon if omitted
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Languages to report; defaults to those of the first embedding
    #[arg(long, value_delimiter = ',')]
    pub languages: Vec<String>,
    /// Bios corpus (TSV) for --exbias
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Previous --exbias JSON reports to combine and compare
    #[arg(long = "result")]
    pub results: Vec<PathBuf>,
    /// First-column label of the extrinsic table
    #[arg(long)]
    pub group: Option<String>,
    /// Language used to look up corpus tokens in a merged space
    #[arg(long)]
    pub language: Option<String>,
    /// JSON report
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// The table as CSV
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Training pairs per language (must match the debias run)
    #[arg(long, default_value_t = DEFAULT_TRAIN_PAIRS)]
    pub train_pairs: usize,
    #[arg(long, value_enum, default_value_t = SeedsArg::Test)]
    pub seeds: SeedsArg,
    /// Projection guard of the cross-language score
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Occupations with fewer records are dropped
    #[arg(long, default_value_t = DEFAULT_MIN_COUNT)]
    pub min_count: usize,
    #[arg(long, default_value_t = 300)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1.0)]
    pub learning_rate: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    /// Embedding whose vocabulary supplies the bio words
    #[arg(long)]
    pub embedding: PathBuf,
    #[arg(long)]
    pub lang: Option<String>,
    /// Lexicon supplying the gender words (its seed lists); the bundled one if omitted
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Lexicon language of the gender words
    #[arg(long)]
    pub language: Option<String>,
    /// Explicit male words (vocabulary entries); overrides the lexicon
    #[arg(long, value_delimiter = ',')]
    pub male: Vec<String>,
    /// Explicit female words (vocabulary entries); overrides the lexicon
    #[arg(long, value_delimiter = ',')]
    pub female: Vec<String>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub occupations: usize,
    #[arg(long, default_value_t = 2000)]
    pub records: usize,
    /// Gender-word rate in [0, 1]
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 12)]
    pub tokens_per_record: usize,
    #[arg(long, default_value_t = 4)]
    pub words_per_occupation: usize,
    #[arg(long, default_value_t = 0.5)]
    pub occupation_noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Runs the command line `args` (including the program name) and returns the
/// process exit status.
pub fn run(args: Vec<String>) -> i32 {
    let expanded = match apply_config(&args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(&expanded) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    init_thread_pool();
    match execute(cli.command, &args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command, args: &[String]) -> Result<()> {
    match command {
        Command::Align(a) => cmd_align(&a, args),
        Command::Merge(a) => cmd_merge(&a, args),
        Command::Debias(a) => cmd_debias(&a, args),
        Command::Report(a) => cmd_report(&a, args),
        Command::SynthCorpus(a) => cmd_synth(&a, args),
    }
}

/// Inserts the config file's options for the chosen subcommand right after
/// it, skipping options already present on the command line.
pub fn apply_config(args: &[String]) -> Result<Vec<String>> {
    let mut config = None;
    let mut skip_next = false;
    let mut sub_at = None;
    for (i, a) in args.iter().enumerate().skip(1) {
        if skip_next {
            skip_next = false;
            continue;
        }
        if a == "--config" {
            config = args.get(i + 1).cloned();
            skip_next = true;
        } else if let Some(p) = a.strip_prefix("--config=") {
            config = Some(p.to_string());
        } else if sub_at.is_none() && SUBCOMMANDS.contains(&a.as_str()) {
            sub_at = Some(i);
        }
    }
    let (Some(config), Some(sub_at)) = (config, sub_at) else {
        return Ok(args.to_vec());
    };
    let path = Path::new(&config);
    let root: Value = read_json(path)?;
    let root = root
        .as_object()
        .ok_or_else(|| Error::format(path, "expected a JSON object keyed by subcommand"))?;
    if let Some(unknown) = root.keys().find(|k| !SUBCOMMANDS.contains(&k.as_str())) {
        return Err(Error::format(path, format!("unknown subcommand section `{unknown}`")));
    }
    let Some(section) = root.get(&args[sub_at]) else {
        return Ok(args.to_vec());
    };
    let section = section
        .as_object()
        .ok_or_else(|| Error::format(path, format!("section `{}` must be an object", args[sub_at])))?;
    let given = &args[sub_at + 1..];
    let mut injected = Vec::new();
    for (key, value) in section {
        let flag = format!("--{}", key.replace('_', "-"));
        let prefix = format!("{flag}=");
        if given.iter().any(|a| *a == flag || a.starts_with(&prefix)) {
            continue;
        }
        let scalar = |v: &Value| -> Result<String> {
            match v {
                Value::String(s) => Ok(s.clone()),
                Value::Number(n) => Ok(n.to_string()),
                _ => Err(Error::format(path, format!("option `{key}` must be a string or number"))),
            }
        };
        match value {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => injected.push(flag),
            Value::Array(items) => {
                for item in items {
                    injected.push(flag.clone());
                    injected.push(scalar(item)?);
                }
            }
            v => {
                injected.push(flag);
                injected.push(scalar(v)?);
            }
        }
    }
    let mut out = args[..=sub_at].to_vec();
    out.extend(injected);
    out.extend_from_slice(given);
    Ok(out)
}

/// The lexicon at `path`, or the bundled one; recorded as a manifest input.
fn lexicon_input(path: Option<&Path>, manifest: &mut RunManifest) -> Result<GenderLexicon> {
    match path {
        Some(p) => {
            let lex = load_lexicon(p)?;
            manifest.input("lexicon", p)?;
            Ok(lex)
        }
        None => {
            manifest.input_bytes("lexicon", BUNDLED_LEXICON_NAME, BUNDLED_LEXICON.as_bytes());
            Ok(bundled_lexicon())
        }
    }
}

fn snapshot(args: &impl Serialize) -> Value {
    serde_json::to_value(args).expect("plain option structs serialize")
}

fn finish(manifest: &mut RunManifest, warnings: Vec<Warning>, primary: &Path) -> Result<()> {
    manifest.warnings.extend(warnings);
    let path = manifest.write_for(primary)?;
    info!("manifest written to {}", path.display());
    Ok(())
}

fn cmd_align(a: &AlignArgs, args: &[String]) -> Result<()> {
    let mut src = load_embedding(&a.src, Some(&a.src_lang))?;
    let mut tgt = load_embedding(&a.tgt, Some(&a.tgt_lang))?;
    if src.dim() != tgt.dim() {
        return Err(Error::Usage(format!(
            "dimension mismatch: {} has dimension {}, {} has dimension {}",
            a.src.display(),
            src.dim(),
            a.tgt.display(),
            tgt.dim()
        )));
    }
    if !a.no_normalize {
        src = src.normalize()?;
        tgt = tgt.normalize()?;
    }
    let (dict, dropped) = load_dictionary(&a.dict, &a.src_lang, &a.tgt_lang)?;
    let fit = procrustes_fit(&src, &tgt, &dict)?;
    let mut warnings: Vec<Warning> = dropped
        .iter()
        .map(|(s, t)| Warning::Other {
            message: format!("duplicate dictionary pair `{s}` -> `{t}` dropped"),
        })
        .collect();
    warnings.extend(fit.warnings);
    info!(
        "fitted {}x{} map from {} pairs ({} unresolvable)",
        fit.map.dim(),
        fit.map.dim(),
        fit.map.fit_pair_count,
        fit.dropped.len()
    );
    let mut mapped = apply_map(&fit.map, &src)?;
    if !a.no_renormalize {
        mapped = mapped.normalize()?;
    }
    let output = if a.merge {
        merge_spaces(&[&mapped, &tgt])?
    } else {
        mapped
    };
    save_vec(&output, &a.out, a.precision)?;

    let mut manifest = RunManifest::new("align", args, snapshot(a), None);
    manifest.input("source", &a.src)?;
    manifest.input("target", &a.tgt)?;
    manifest.input("dictionary", &a.dict)?;
    manifest.output("embedding", &a.out)?;
    finish(&mut manifest, warnings, &a.out)
}

fn cmd_merge(a: &MergeArgs, args: &[String]) -> Result<()> {
    let mut spaces = Vec::with_capacity(a.inputs.len());
    let mut paths = Vec::with_capacity(a.inputs.len());
    for spec in &a.inputs {
        let (lang, path) = match spec.split_once('=') {
            Some((l, p)) if !l.is_empty() && !l.contains(['/', '\\']) => (Some(l), PathBuf::from(p)),
            _ => (None, PathBuf::from(spec)),
        };
        spaces.push(load_embedding(&path, lang)?);
        paths.push(path);
    }
    let refs: Vec<&EmbeddingSpace> = spaces.iter().collect();
    let merged = merge_spaces(&refs)?;
    save_vec(&merged, &a.out, a.precision)?;
    let mut manifest = RunManifest::new("merge", args, snapshot(a), None);
    for p in &paths {
        manifest.input("embedding", p)?;
    }
    manifest.output("embedding", &a.out)?;
    finish(&mut manifest, Vec::new(), &a.out)
}

/// The requested languages, or those of `space` in tag order.
fn resolve_languages(requested: &[String], space: &EmbeddingSpace) -> Vec<String> {
    if requested.is_empty() {
        tag_languages(space.language_tag()).into_iter().map(String::from).collect()
    } else {
        requested.to_vec()
    }
}

fn make_splits(
    lexicon: &GenderLexicon,
    languages: &[String],
    train_pairs: usize,
    seed: u64,
    warnings: &mut Vec<Warning>,
) -> Result<Vec<PairSplit>> {
    let mut splits = Vec::with_capacity(languages.len());
    for lang in languages {
        let (split, w) = split_pairs(lexicon, lang, train_pairs, seed)?;
        warnings.extend(w);
        splits.push(split);
    }
    Ok(splits)
}

fn cmd_debias(a: &DebiasArgs, args: &[String]) -> Result<()> {
    let space = load_embedding(&a.embedding, a.lang.as_deref())?.normalize()?;
    let mut manifest = RunManifest::new("debias", args, snapshot(a), Some(a.seed));
    manifest.input("embedding", &a.embedding)?;
    let lexicon = lexicon_input(a.lexicon.as_deref(), &mut manifest)?;
    let languages = resolve_languages(&a.languages, &space);
    let variant: Variant = a.variant.into();
    let language = match (&a.language, variant) {
        (Some(l), _) => Some(l.clone()),
        (None, Variant::Mono) if languages.len() == 1 => Some(languages[0].clone()),
        (None, Variant::Mono) => {
            return Err(Error::Usage(format!(
                "--variant mono over several languages ({}) needs --language",
                languages.join(", ")
            )))
        }
        (None, _) => None,
    };
    let config = DebiasConfig {
        variant,
        k: a.k,
        method: a.method.into(),
        scope: a.scope.into(),
        renormalize_after: a.renormalize_after,
        center: a.center,
        seed: a.seed,
        language,
    };
    let mut warnings = Vec::new();
    let splits = make_splits(&lexicon, &languages, a.train_pairs, a.seed, &mut warnings)?;
    let plan = plan_variant(&space, &lexicon, &config, &splits)?;
    warnings.extend(plan.warnings.iter().cloned());
    let debiased = debias_space_par(
        &space,
        &plan.subspace,
        &DebiasOptions {
            renormalize_after: config.renormalize_after,
            only: plan.only.clone(),
        },
    )?;
    warnings.extend(debiased.warnings);
    info!(
        "{} debiasing with k = {}: max residual projection {:.3e}",
        config.variant, config.k, debiased.max_residual_projection
    );
    save_vec(&debiased.space, &a.out, a.precision)?;
    let subspace_path = a.subspace_out.clone().unwrap_or_else(|| {
        let mut name = a.out.file_name().unwrap_or_default().to_os_string();
        name.push(".subspace.json");
        a.out.with_file_name(name)
    });
    let file = SubspaceFile::new(&plan.subspace, &config, &space, &plan.pairs_used, manifest_name(&a.out));
    write_json(&subspace_path, &file)?;

    manifest.output("embedding", &a.out)?;
    manifest.output("subspace", &subspace_path)?;
    finish(&mut manifest, warnings, &a.out)
}

fn label_for(labels: &[String], i: usize, path: &Path) -> String {
    labels.get(i).cloned().unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| format!("emb{i}"))
    })
}

fn emit_table(table: &Table, csv: Option<&Path>) -> Result<()> {
    print!("{}", table.render());
    if let Some(path) = csv {
        std::fs::write(path, table.to_csv()).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

fn cmd_report(a: &ReportArgs, args: &[String]) -> Result<()> {
    if !a.labels.is_empty() && a.labels.len() != a.embeddings.len() {
        return Err(Error::Usage(format!(
            "{} labels given for {} embeddings",
            a.labels.len(),
            a.embeddings.len()
        )));
    }
    let mut spaces = Vec::with_capacity(a.embeddings.len());
    for p in &a.embeddings {
        spaces.push(normalize_lenient(&load_embedding(p, a.lang.as_deref())?));
    }
    let entries: Vec<(String, &EmbeddingSpace)> = spaces
        .iter()
        .enumerate()
        .map(|(i, s)| (label_for(&a.labels, i, &a.embeddings[i]), s))
        .collect();
    let manifest_ref = a.out.as_deref().map(manifest_name).unwrap_or_default();
    let mut warnings = Vec::new();
    let mut manifest = RunManifest::new("report", args, snapshot(a), Some(a.seed));
    for p in &a.embeddings {
        manifest.input("embedding", p)?;
    }

    let need_embeddings = |min: usize, max: usize| -> Result<()> {
        if entries.len() < min || entries.len() > max {
            let what = if min == max { format!("exactly {min}") } else { format!("at least {min}") };
            return Err(Error::Usage(format!("this report needs {what} --embedding")));
        }
        Ok(())
    };

    let json: Value = if a.xscore {
        need_embeddings(1, 1)?;
        let lexicon = lexicon_input(a.lexicon.as_deref(), &mut manifest)?;
        let (label, space) = &entries[0];
        let languages = resolve_languages(&a.languages, space);
        let (matrix, w) = cross_score_matrix(space, &lexicon, &languages, a.epsilon)?;
        warnings.extend(w);
        emit_table(&xscore_table(&matrix), a.csv.as_deref())?;
        snapshot(&XscoreReport {
            label: label.clone(),
            embedding_sha256: crate::artifact::space_fingerprint(space),
            matrix,
            manifest: manifest_ref,
        })
    } else if a.inbias {
        need_embeddings(1, usize::MAX)?;
        let lexicon = lexicon_input(a.lexicon.as_deref(), &mut manifest)?;
        let languages = resolve_languages(&a.languages, entries[0].1);
        let splits = make_splits(&lexicon, &languages, a.train_pairs, a.seed, &mut warnings)?;
        let (columns, w) = compute_inbias(&entries, &lexicon, &languages, a.seeds.into(), &splits)?;
        warnings.extend(w);
        emit_table(&inbias_table(&columns), a.csv.as_deref())?;
        snapshot(&InbiasReport {
            languages,
            seeds: a.seeds.into(),
            train_pairs: a.train_pairs,
            seed: a.seed,
            columns,
            manifest: manifest_ref,
        })
    } else {
        let mut rows = Vec::new();
        for p in &a.results {
            let previous: ExbiasReport = read_json(p)?;
            rows.extend(previous.rows);
            manifest.input("result", p)?;
        }
        if !entries.is_empty() {
            let corpus = a
                .corpus
                .as_ref()
                .ok_or_else(|| Error::Usage("--exbias with --embedding needs --corpus".into()))?;
            let (records, dropped) = load_corpus(corpus, a.min_count)?;
            manifest.input("corpus", corpus)?;
            warnings.extend(dropped.iter().map(|(occ, n)| Warning::Other {
                message: format!("occupation `{occ}` has {n} records (< {}); dropped", a.min_count),
            }));
            let config = TrainConfig {
                learning_rate: a.learning_rate,
                epochs: a.epochs,
                seed: a.seed,
                language: a.language.clone(),
                ..TrainConfig::default()
            };
            let (computed, w) = compute_exbias(&entries, &records, &config)?;
            warnings.extend(w);
            rows.extend(computed);
        }
        if rows.is_empty() {
            return Err(Error::Usage("--exbias needs --embedding with --corpus, or --result".into()));
        }
        compare_rows(&mut rows)?;
        let group = a
            .group
            .clone()
            .or_else(|| a.language.clone())
            .or_else(|| entries.first().map(|(_, s)| s.language_tag().to_string()))
            .unwrap_or_default();
        emit_table(&exbias_table(&group, &rows), a.csv.as_deref())?;
        snapshot(&ExbiasReport {
            group,
            seed: a.seed,
            rows,
            manifest: manifest_ref,
        })
    };

    if let Some(out) = &a.out {
        write_json(out, &json)?;
        manifest.output("report", out)?;
        if let Some(csv) = &a.csv {
            manifest.output("table", csv)?;
        }
        finish(&mut manifest, warnings, out)?;
    }
    Ok(())
}

fn cmd_synth(a: &SynthArgs, args: &[String]) -> Result<()> {
    let space = load_embedding(&a.embedding, a.lang.as_deref())?;
    let mut manifest = RunManifest::new("synth-corpus", args, snapshot(a), Some(a.seed));
    manifest.input("embedding", &a.embedding)?;
    let (male_words, female_words) = if !a.male.is_empty() || !a.female.is_empty() {
        (a.male.clone(), a.female.clone())
    } else {
        let lexicon = lexicon_input(a.lexicon.as_deref(), &mut manifest)?;
        let language = match &a.language {
            Some(l) => l.clone(),
            None => {
                let langs = tag_languages(space.language_tag());
                match langs[..] {
                    [one] => one.to_string(),
                    _ => return Err(Error::Usage("--language is required for a merged space".into())),
                }
            }
        };
        let lex = lexicon.language(&language)?;
        // stored vocabulary entries of the seed words that exist in the space
        let stored = |words: &[String]| -> Vec<String> {
            words
                .iter()
                .filter_map(|w| space.resolve(&language, w))
                .map(|i| space.word(i).to_string())
                .collect()
        };
        (stored(&lex.seeds.male), stored(&lex.seeds.female))
    };
    let spec = CorpusSpec {
        occupations: a.occupations,
        records: a.records,
        rho: a.rho,
        tokens_per_record: a.tokens_per_record,
        words_per_occupation: a.words_per_occupation,
        occupation_noise: a.occupation_noise,
        male_words,
        female_words,
        occupation_words: None,
    };
    let records = synthesize_corpus(&space, &spec, a.seed)?;
    save_corpus(&records, &a.out)?;
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &records {
        *counts.entry(r.occupation.as_str()).or_default() += 1;
    }
    info!("{} records over {} occupations", records.len(), counts.len());

    manifest.output("corpus", &a.out)?;
    finish(&mut manifest, Vec::new(), &a.out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn config_fills_only_missing_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        std::fs::write(
            &cfg,
            r#"{"debias": {"k": 2, "variant": "eqr", "center": true, "renormalize_after": false,
                           "languages": ["en", "hi"]}}"#,
        )
        .unwrap();
        let args = argv(&format!("prog --config {} debias --k 6 --out o.vec", cfg.display()));
        let out = apply_config(&args).unwrap();
        let tail: Vec<&str> = out[4..].iter().map(String::as_str).collect();
        assert_eq!(
            tail,
            ["--variant", "eqr", "--center", "--languages", "en", "--languages", "hi", "--k", "6", "--out", "o.vec"]
        );
    }

    #[test]
    fn config_rejects_unknown_sections() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        std::fs::write(&cfg, r#"{"debiass": {}}"#).unwrap();
        let args = argv(&format!("prog --config={} debias", cfg.display()));
        assert!(matches!(apply_config(&args).unwrap_err(), Error::Format { .. }));
        let missing = argv("prog --config /nonexistent/c.json debias");
        assert_eq!(apply_config(&missing).unwrap_err().exit_code(), 2);
    }
}
