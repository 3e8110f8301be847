//! Config-driven composition of the preprocessing stages.
//!
//! A run reads a parallel corpus, applies the configured stages in order
//! and writes each stage's output as `NN-stage.src` / `NN-stage.tgt` under
//! the output directory, followed by `manifest.json`. Validation happens
//! before anything is read or written.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{
    filter_pairs, normalize_text, read_lines, read_parallel, tokenize, write_lines, write_sentences, FilterPolicy,
    ParallelCorpus, ScriptClass, Sentence, SentencePair,
};
use crate::lm::read_arpa;
use crate::morph::{rejoin, split_sentence, stem_sentence, StemRuleTable, SuffixTable, DEFAULT_MARKER};
use crate::reorder::{apply_rules, linearize, parse_bracketed, RuleSet};
use crate::translit::{detect_oovs, render_replacements, replace_oovs, CharTransModel, RescoreWeights, DEFAULT_K};
use crate::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Normalize,
    Tokenize,
    Filter,
    SplitSuffix,
    Stem,
    Reorder,
    Rejoin,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Normalize,
        Stage::Tokenize,
        Stage::Filter,
        Stage::SplitSuffix,
        Stage::Stem,
        Stage::Reorder,
        Stage::Rejoin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Normalize => "normalize",
            Stage::Tokenize => "tokenize",
            Stage::Filter => "filter",
            Stage::SplitSuffix => "split-suffix",
            Stage::Stem => "stem",
            Stage::Reorder => "reorder",
            Stage::Rejoin => "rejoin",
        }
    }

    /// Bumped whenever a stage's output for the same input changes.
    pub fn version(self) -> &'static str {
        "1"
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown stage {s:?}")))
    }
}

/// System variants: BL baseline, RO reordering, FACT stem factors, SPLIT
/// suffix separation, TR transliteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    S1,
    S2,
    S3,
    S3Prime,
    S4,
    S4Prime,
}

impl Variant {
    pub fn stages(self) -> Vec<Stage> {
        use Stage::*;
        match self {
            Variant::S1 => vec![Tokenize, Filter],
            Variant::S2 => vec![Tokenize, Filter, Reorder],
            Variant::S3 | Variant::S4 => vec![Tokenize, Filter, Reorder, Stem],
            Variant::S3Prime | Variant::S4Prime => vec![Tokenize, Filter, Reorder, SplitSuffix, Stem],
        }
    }

    /// Whether decoder output gets the OOV transliteration post-step.
    pub fn transliterates(self) -> bool {
        matches!(self, Variant::S4 | Variant::S4Prime)
    }

    pub fn tag(self) -> &'static str {
        match self {
            Variant::S1 => "S1",
            Variant::S2 => "S2",
            Variant::S3 => "S3",
            Variant::S3Prime => "S3'",
            Variant::S4 => "S4",
            Variant::S4Prime => "S4'",
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().replace('′', "'").as_str() {
            "S1" => Variant::S1,
            "S2" => Variant::S2,
            "S3" => Variant::S3,
            "S3'" => Variant::S3Prime,
            "S4" => Variant::S4,
            "S4'" => Variant::S4Prime,
            other => return Err(Error::Config(format!("unknown variant {other:?}"))),
        })
    }
}

const KNOWN_KEYS: &[&str] = &[
    "variant",
    "stages",
    "source",
    "target",
    "output_dir",
    "source_script",
    "target_script",
    "max_words",
    "max_ratio",
    "suffix_table",
    "marker",
    "stem_rules_source",
    "stem_rules_target",
    "reorder_rules",
    "source_trees",
    "decoder_output",
    "translit_model",
    "lm",
    "target_vocab",
    "k",
    "lambda_tm",
    "lambda_lm",
];

const PATH_KEYS: &[&str] = &[
    "source",
    "target",
    "output_dir",
    "suffix_table",
    "stem_rules_source",
    "stem_rules_target",
    "reorder_rules",
    "source_trees",
    "decoder_output",
    "translit_model",
    "lm",
    "target_vocab",
];

/// Flat `key = value` pipeline configuration. Relative paths resolve
/// against the config file's directory.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub variant: Option<Variant>,
    pub stages: Vec<Stage>,
    pub transliterate: bool,
    pub source: PathBuf,
    pub target: PathBuf,
    pub output_dir: PathBuf,
    pub source_script: ScriptClass,
    pub target_script: ScriptClass,
    pub filter: FilterPolicy,
    pub marker: String,
    pub suffix_table: Option<PathBuf>,
    pub stem_rules_source: Option<PathBuf>,
    pub stem_rules_target: Option<PathBuf>,
    pub reorder_rules: Option<PathBuf>,
    pub source_trees: Option<PathBuf>,
    pub decoder_output: Option<PathBuf>,
    pub translit_model: Option<PathBuf>,
    pub lm: Option<PathBuf>,
    pub target_vocab: Option<PathBuf>,
    pub k: usize,
    pub weights: RescoreWeights,
    /// Parsed entries, used for the config hash.
    entries: BTreeMap<String, String>,
}

fn parse_value<T: FromStr>(entries: &BTreeMap<String, String>, key: &str, default: T) -> Result<T> {
    match entries.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}"))),
    }
}

impl PipelineConfig {
    /// Parses config text. `overrides` take precedence over file entries.
    pub fn parse(text: &str, base_dir: &Path, overrides: &[(&str, String)]) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(Error::Config(format!("line {}: unknown key {key:?}", i + 1)));
            }
            entries.insert(key.to_owned(), value.trim().to_owned());
        }
        for (key, value) in overrides {
            entries.insert((*key).to_owned(), value.clone());
        }
        for key in PATH_KEYS {
            if let Some(v) = entries.get_mut(*key) {
                let p = Path::new(v.as_str());
                if p.is_relative() {
                    *v = base_dir.join(p).to_string_lossy().into_owned();
                }
            }
        }

        let variant = entries.get("variant").map(|v| v.parse::<Variant>()).transpose()?;
        let stages = match (entries.get("stages"), variant) {
            (Some(list), _) => list
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::parse)
                .collect::<Result<Vec<Stage>>>()?,
            (None, Some(v)) => v.stages(),
            (None, None) => return Err(Error::Config("either `variant` or `stages` is required".into())),
        };
        let required = |key: &str| {
            entries
                .get(key)
                .map(PathBuf::from)
                .ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
        };
        let optional = |key: &str| entries.get(key).map(PathBuf::from);
        let filter = FilterPolicy::new(
            parse_value(&entries, "max_words", FilterPolicy::DEFAULT_MAX_WORDS)?,
            parse_value(&entries, "max_ratio", FilterPolicy::DEFAULT_MAX_RATIO)?,
        )
        .map_err(|e| Error::Config(e.to_string()))?;

        Ok(PipelineConfig {
            variant,
            transliterate: variant.is_some_and(Variant::transliterates),
            source: required("source")?,
            target: required("target")?,
            output_dir: required("output_dir")?,
            source_script: parse_value(&entries, "source_script", ScriptClass::Latin)?,
            target_script: parse_value(&entries, "target_script", ScriptClass::Indic)?,
            filter,
            marker: entries
                .get("marker")
                .cloned()
                .unwrap_or_else(|| DEFAULT_MARKER.to_owned()),
            suffix_table: optional("suffix_table"),
            stem_rules_source: optional("stem_rules_source"),
            stem_rules_target: optional("stem_rules_target"),
            reorder_rules: optional("reorder_rules"),
            source_trees: optional("source_trees"),
            decoder_output: optional("decoder_output"),
            translit_model: optional("translit_model"),
            lm: optional("lm"),
            target_vocab: optional("target_vocab"),
            k: parse_value(&entries, "k", DEFAULT_K)?,
            weights: RescoreWeights {
                translit: parse_value(&entries, "lambda_tm", 1.0)?,
                lm: parse_value(&entries, "lambda_lm", 1.0)?,
            },
            stages,
            entries,
        })
    }

    pub fn load(path: &Path, overrides: &[(&str, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        PipelineConfig::parse(&text, base, overrides)
    }

    /// SHA-256 over the sorted `key=value` entries.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in &self.entries {
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(v.as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }

    /// Checks stage order and resource paths. Touches the filesystem only
    /// through existence checks.
    pub fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::Config("no stages configured".into()));
        }
        let mut seen = HashSet::new();
        for &stage in &self.stages {
            if !seen.insert(stage) {
                return Err(Error::Config(format!("stage {stage} listed twice")));
            }
            if stage == Stage::Rejoin && !seen.contains(&Stage::SplitSuffix) {
                return Err(Error::Config("rejoin requires an earlier split-suffix stage".into()));
            }
        }
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        let need = |key: &str, path: &Option<PathBuf>, why: &str| -> Result<()> {
            match path {
                None => Err(Error::Config(format!("{why} requires `{key}`"))),
                Some(p) if !p.exists() => Err(Error::Config(format!("{key}: {} does not exist", p.display()))),
                Some(_) => Ok(()),
            }
        };
        need("source", &Some(self.source.clone()), "every run")?;
        need("target", &Some(self.target.clone()), "every run")?;
        if seen.contains(&Stage::SplitSuffix) {
            need("suffix_table", &self.suffix_table, "split-suffix")?;
        }
        if seen.contains(&Stage::Reorder) {
            need("reorder_rules", &self.reorder_rules, "reorder")?;
            need("source_trees", &self.source_trees, "reorder")?;
        }
        for (key, path) in [
            ("stem_rules_source", &self.stem_rules_source),
            ("stem_rules_target", &self.stem_rules_target),
        ] {
            if path.is_some() {
                need(key, path, "stem")?;
            }
        }
        if self.transliterate {
            need("decoder_output", &self.decoder_output, "transliteration")?;
            need("translit_model", &self.translit_model, "transliteration")?;
            need("lm", &self.lm, "transliteration")?;
            if self.target_vocab.is_some() {
                need("target_vocab", &self.target_vocab, "transliteration")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub version: String,
    pub pairs_in: usize,
    pub pairs_out: usize,
    pub outputs: Vec<PathBuf>,
    pub started_at: u64,
    pub finished_at: u64,
    /// Post-decoding steps count decoder output lines, not corpus pairs.
    #[serde(default)]
    pub post_step: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub variant: Option<String>,
    pub config_hash: String,
    pub source: PathBuf,
    pub target: PathBuf,
    pub output_dir: PathBuf,
    pub stages: Vec<StageRecord>,
    pub started_at: u64,
    pub finished_at: u64,
    /// `None` on success, else the error that aborted the run.
    pub error: Option<String>,
}

impl RunManifest {
    /// Every stage consumes what the previous produced, and only `filter`
    /// changes the pair count.
    pub fn reconcile(&self) -> std::result::Result<(), String> {
        let mut prev: Option<&StageRecord> = None;
        for rec in self.stages.iter().filter(|r| !r.post_step) {
            if let Some(p) = prev {
                if p.pairs_out != rec.pairs_in {
                    return Err(format!(
                        "{} produced {} pairs but {} consumed {}",
                        p.stage, p.pairs_out, rec.stage, rec.pairs_in
                    ));
                }
            }
            if rec.stage != Stage::Filter.name() && rec.pairs_in != rec.pairs_out {
                return Err(format!(
                    "{} changed the pair count from {} to {}",
                    rec.stage, rec.pairs_in, rec.pairs_out
                ));
            }
            prev = Some(rec);
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// A run that stopped at a stage error, with the manifest up to that point.
#[derive(Debug)]
pub struct PipelineFailure {
    pub error: Error,
    pub manifest: RunManifest,
}

impl fmt::Display for PipelineFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.error.fmt(f)
    }
}

impl std::error::Error for PipelineFailure {}

/// Resources loaded once per run.
struct Resources {
    suffixes: Option<SuffixTable>,
    rules: Option<RuleSet>,
    trees: Option<Vec<String>>,
    stem_source: StemRuleTable,
    stem_target: StemRuleTable,
}

impl Resources {
    fn load(config: &PipelineConfig) -> Result<Self> {
        Ok(Resources {
            suffixes: config
                .suffix_table
                .as_deref()
                .map(|p| SuffixTable::load(p, &config.marker))
                .transpose()?,
            rules: config.reorder_rules.as_deref().map(RuleSet::load).transpose()?,
            trees: config.source_trees.as_deref().map(read_lines).transpose()?,
            stem_source: match &config.stem_rules_source {
                Some(p) => StemRuleTable::load(p)?,
                None => StemRuleTable::english(),
            },
            stem_target: match &config.stem_rules_target {
                Some(p) => StemRuleTable::load(p)?,
                None => StemRuleTable::identity(),
            },
        })
    }
}

fn map_sides(
    corpus: &ParallelCorpus,
    mut f: impl FnMut(&SentencePair) -> Result<(Sentence, Sentence)>,
) -> Result<ParallelCorpus> {
    let pairs = corpus
        .pairs
        .iter()
        .map(|p| {
            let (source, target) = f(p)?;
            Ok(SentencePair {
                id: p.id,
                source,
                target,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(corpus.with_pairs(pairs))
}

fn stage_paths(config: &PipelineConfig, index: usize, stage: &str) -> (PathBuf, PathBuf) {
    let base = config.output_dir.join(format!("{:02}-{stage}", index + 1));
    (base.with_extension("src"), base.with_extension("tgt"))
}

/// Applies one stage to `corpus`, writes its outputs and returns the new
/// corpus with the stage's manifest entry.
fn run_stage(
    stage: Stage,
    index: usize,
    corpus: ParallelCorpus,
    config: &PipelineConfig,
    res: &Resources,
) -> Result<(ParallelCorpus, StageRecord)> {
    let started_at = now();
    let pairs_in = corpus.len();
    let (src_path, tgt_path) = stage_paths(config, index, stage.name());
    let out = match stage {
        Stage::Normalize => map_sides(&corpus, |p| {
            Ok((
                Sentence::from_whitespace(&normalize_text(&p.source.to_line(), config.source_script)),
                Sentence::from_whitespace(&normalize_text(&p.target.to_line(), config.target_script)),
            ))
        })?,
        Stage::Tokenize => map_sides(&corpus, |p| {
            Ok((
                tokenize(&p.source.to_line(), config.source_script),
                tokenize(&p.target.to_line(), config.target_script),
            ))
        })?,
        Stage::Filter => filter_pairs(&corpus, &config.filter).0,
        Stage::SplitSuffix => {
            let table = res.suffixes.as_ref().expect("validated");
            map_sides(&corpus, |p| {
                let target = split_sentence(&p.target, table, None)
                    .map_err(|e| Error::data(&config.target, p.id + 1, e.to_string()))?;
                Ok((p.source.clone(), target))
            })?
        }
        Stage::Rejoin => map_sides(&corpus, |p| Ok((p.source.clone(), rejoin(&p.target, &config.marker))))?,
        Stage::Stem => {
            // factor files only; the main stream passes through
            let src: Vec<Sentence> = corpus.sources().map(|s| stem_sentence(s, &res.stem_source)).collect();
            let tgt: Vec<Sentence> = corpus.targets().map(|s| stem_sentence(s, &res.stem_target)).collect();
            write_sentences(&src_path, &src)?;
            write_sentences(&tgt_path, &tgt)?;
            corpus.clone()
        }
        Stage::Reorder => {
            let rules = res.rules.as_ref().expect("validated");
            let trees = res.trees.as_ref().expect("validated");
            let tree_path = config.source_trees.as_ref().expect("validated");
            map_sides(&corpus, |p| {
                let line = p.id + 1;
                let text = trees
                    .get(p.id)
                    .ok_or_else(|| Error::data(tree_path, line, "no tree for this sentence"))?;
                let tree = parse_bracketed(text).map_err(|e| Error::data(tree_path, line, e.to_string()))?;
                let fringe = linearize(&tree);
                if fringe != p.source {
                    return Err(Error::data(
                        tree_path,
                        line,
                        format!(
                            "tree fringe {:?} does not match source {:?}",
                            fringe.to_line(),
                            p.source.to_line()
                        ),
                    ));
                }
                Ok((linearize(&apply_rules(&tree, rules)), p.target.clone()))
            })?
        }
    };
    if stage != Stage::Stem {
        write_sentences(&src_path, out.sources())?;
        write_sentences(&tgt_path, out.targets())?;
    }
    let record = StageRecord {
        stage: stage.name().to_owned(),
        version: stage.version().to_owned(),
        pairs_in,
        pairs_out: out.len(),
        outputs: vec![src_path, tgt_path],
        started_at,
        finished_at: now(),
        post_step: false,
    };
    Ok((out, record))
}

/// OOV transliteration of decoder output. Marker-split output is rejoined
/// first when the run splits suffixes.
fn run_translit(index: usize, corpus: &ParallelCorpus, config: &PipelineConfig) -> Result<StageRecord> {
    let started_at = now();
    let decoder_output = config.decoder_output.as_ref().expect("validated");
    let model = CharTransModel::load(config.translit_model.as_ref().expect("validated"))?;
    let lm_path = config.lm.as_ref().expect("validated");
    let lm_text = std::fs::read_to_string(lm_path).map_err(|e| Error::io(lm_path, e))?;
    let lm = read_arpa(&lm_text)?;
    let splits = config.stages.contains(&Stage::SplitSuffix) && !config.stages.contains(&Stage::Rejoin);
    let vocab: HashSet<String> = match &config.target_vocab {
        Some(p) => read_lines(p)?
            .into_iter()
            .map(|l| l.trim().to_owned())
            .filter(|l| !l.is_empty())
            .collect(),
        None if splits => corpus
            .targets()
            .flat_map(|s| rejoin(s, &config.marker).into_tokens())
            .collect(),
        None => corpus.targets().flat_map(|s| s.iter().cloned()).collect(),
    };
    let lines = read_lines(decoder_output)?;
    let mut out = Vec::with_capacity(lines.len());
    let mut log = String::new();
    for (i, line) in lines.iter().enumerate() {
        let mut sent = Sentence::from_whitespace(line);
        if splits {
            sent = rejoin(&sent, &config.marker);
        }
        let oovs = detect_oovs(&sent, &vocab);
        let outcome = replace_oovs(&sent, &oovs, &model, &lm, config.weights, config.k)
            .map_err(|e| Error::data(decoder_output, i + 1, e.to_string()))?;
        for l in render_replacements(&outcome.replacements).lines() {
            log.push_str(&format!("{}\t{l}\n", i + 1));
        }
        out.push(outcome.sentence.to_line());
    }
    let base = config.output_dir.join(format!("{:02}-translit", index + 1));
    let (out_path, log_path) = (base.with_extension("out"), base.with_extension("log"));
    write_lines(&out_path, &out)?;
    std::fs::write(&log_path, log).map_err(|e| Error::io(&log_path, e))?;
    Ok(StageRecord {
        stage: "translit".into(),
        version: "1".into(),
        pairs_in: lines.len(),
        pairs_out: out.len(),
        outputs: vec![out_path, log_path],
        started_at,
        finished_at: now(),
        post_step: true,
    })
}

fn write_manifest(manifest: &RunManifest) -> Result<()> {
    let path = manifest.output_dir.join(MANIFEST_FILE);
    std::fs::create_dir_all(&manifest.output_dir).map_err(|e| Error::io(&manifest.output_dir, e))?;
    std::fs::write(&path, manifest.to_json()).map_err(|e| Error::io(&path, e))
}

/// Validates, runs every stage and writes `manifest.json`. On a stage error
/// the partial manifest is still written and returned with the error.
pub fn run_pipeline(config: &PipelineConfig) -> std::result::Result<RunManifest, PipelineFailure> {
    let mut manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_owned(),
        variant: config.variant.map(|v| v.tag().to_owned()),
        config_hash: config.hash(),
        source: config.source.clone(),
        target: config.target.clone(),
        output_dir: config.output_dir.clone(),
        stages: Vec::new(),
        started_at: now(),
        finished_at: 0,
        error: None,
    };
    if let Err(error) = config.validate() {
        manifest.error = Some(error.to_string());
        return Err(PipelineFailure { error, manifest });
    }
    let result = (|| -> Result<()> {
        let res = Resources::load(config)?;
        let mut corpus = read_parallel(&config.source, &config.target)?;
        for (i, &stage) in config.stages.iter().enumerate() {
            log::info!("stage {} ({stage}): {} pairs in", i + 1, corpus.len());
            let (next, record) = run_stage(stage, i, corpus, config, &res)?;
            corpus = next;
            manifest.stages.push(record);
        }
        if config.transliterate {
            manifest
                .stages
                .push(run_translit(config.stages.len(), &corpus, config)?);
        }
        Ok(())
    })();
    manifest.finished_at = now();
    if let Err(error) = result {
        manifest.error = Some(error.to_string());
        let _ = write_manifest(&manifest);
        return Err(PipelineFailure { error, manifest });
    }
    if let Err(error) = write_manifest(&manifest) {
        return Err(PipelineFailure { error, manifest });
    }
    Ok(manifest)
}
