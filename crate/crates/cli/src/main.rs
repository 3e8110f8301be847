//! `smtkit` command-line driver.

use std::collections::{BTreeSet, HashSet};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use smtkit::align::{compare_factored, read_ttable, train_model1, viterbi_align, write_ttable};
use smtkit::corpus::{
    compute_stats, filter_pairs, normalize_text, read_lines, read_parallel, read_sentences, render_stats_table,
    split_corpus, tokenize, write_lines, write_sentences, FilterPolicy, ParallelCorpus, ScriptClass, Sentence,
};
use smtkit::lm::{self, read_arpa, write_arpa, MknOptions, DEFAULT_ORDER};
use smtkit::metrics::{report, BleuSmoothing, EvalOptions, TerMode};
use smtkit::morph::{
    rejoin, split_sentence, stem_sentence, suffix_split, SplitDiagnostics, StemRuleTable, SuffixTable, DEFAULT_MARKER,
};
use smtkit::pipeline::{run_pipeline, PipelineConfig};
use smtkit::reorder::{reorder_sentence, RuleSet};
use smtkit::translit::{
    detect_oovs, render_replacements, replace_oovs, train_char_model, CharTransModel, RescoreWeights,
    TranslitPairCorpus, DEFAULT_K,
};
use smtkit::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "smtkit",
    version,
    about = "SMT preprocessing, alignment, language modeling and evaluation"
)]
struct Cli {
    /// Pipeline config file (key = value per line).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for randomized steps.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Continuation marker placed on split stems.
    #[arg(long, global = true)]
    marker: Option<String>,

    /// Language model order.
    #[arg(long, global = true)]
    order: Option<usize>,

    /// Transliteration candidates per OOV.
    #[arg(long, global = true)]
    k: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Script {
    Latin,
    Indic,
}

impl From<Script> for ScriptClass {
    fn from(s: Script) -> Self {
        match s {
            Script::Latin => ScriptClass::Latin,
            Script::Indic => ScriptClass::Indic,
        }
    }
}

#[derive(Args, Debug)]
struct TextIo {
    /// Input file, one sentence per line.
    input: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ParallelIn {
    #[arg(long)]
    src: PathBuf,
    #[arg(long)]
    tgt: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Unicode NFC plus digit, quote, dash and space canonicalization.
    Normalize {
        #[command(flatten)]
        io: TextIo,
        #[arg(long, value_enum, default_value = "latin")]
        script: Script,
    },
    /// Detach punctuation and split on whitespace.
    Tokenize {
        #[command(flatten)]
        io: TextIo,
        #[arg(long, value_enum, default_value = "latin")]
        script: Script,
    },
    /// Drop pairs with an empty or overlong side or an extreme length ratio.
    Filter {
        #[command(flatten)]
        input: ParallelIn,
        #[arg(long)]
        out_src: PathBuf,
        #[arg(long)]
        out_tgt: PathBuf,
        #[arg(long, default_value_t = FilterPolicy::DEFAULT_MAX_WORDS)]
        max_words: usize,
        #[arg(long, default_value_t = FilterPolicy::DEFAULT_MAX_RATIO)]
        max_ratio: f64,
    },
    /// Sentence, word and length statistics, one column per file.
    Stats {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Seeded train/dev/test split.
    Split {
        #[command(flatten)]
        input: ParallelIn,
        #[arg(long)]
        dev: usize,
        #[arg(long)]
        test: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Separate the longest matching suffix from each word.
    SplitSuffix {
        #[command(flatten)]
        io: TextIo,
        /// Suffix table, one suffix per line.
        #[arg(long)]
        table: PathBuf,
        /// Print per-suffix split counts to stderr.
        #[arg(long)]
        diagnostics: bool,
    },
    /// Glue marker-ended stems back onto the following token.
    Rejoin {
        #[command(flatten)]
        io: TextIo,
    },
    /// Strip one rule suffix per word.
    Stem {
        #[command(flatten)]
        io: TextIo,
        /// Rule file; the built-in English rules when omitted.
        #[arg(long)]
        rules: Option<PathBuf>,
    },
    /// Apply child-permutation rules to bracketed trees and print the fringe.
    Reorder {
        #[command(flatten)]
        io: TextIo,
        /// Rule file; the built-in demo rules when omitted.
        #[arg(long)]
        rules: Option<PathBuf>,
    },
    /// Train a modified Kneser-Ney model and write it as ARPA.
    LmTrain {
        #[command(flatten)]
        io: TextIo,
        /// Give `<unk>` no probability mass.
        #[arg(long)]
        closed_vocab: bool,
    },
    /// Per-sentence log10 probability and corpus perplexity.
    LmScore {
        #[command(flatten)]
        io: TextIo,
        #[arg(long)]
        lm: PathBuf,
    },
    /// Train a character transliteration model from a word-pair lexicon.
    TranslitTrain {
        /// Tab-separated source/target word pairs.
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long, default_value_t = 10)]
        iterations: usize,
        /// Output directory for the model files.
        #[arg(long)]
        model_dir: PathBuf,
    },
    /// Replace OOV tokens in decoder output with rescored transliterations.
    TranslitApply {
        #[command(flatten)]
        io: TextIo,
        #[arg(long)]
        model: PathBuf,
        /// Target-side ARPA language model.
        #[arg(long)]
        lm: PathBuf,
        /// Known target words, one per line; other tokens are OOV.
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        lambda_tm: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda_lm: f64,
        /// Write per-replacement diagnostics here.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Train IBM Model 1 and write the translation table.
    AlignTrain {
        #[command(flatten)]
        input: ParallelIn,
        #[arg(long, default_value_t = 5)]
        iterations: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Viterbi links in Pharaoh format.
    AlignViterbi {
        #[command(flatten)]
        input: ParallelIn,
        #[arg(long)]
        ttable: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compare surface-form and stem-factor alignment training.
    AlignCompare {
        #[command(flatten)]
        input: ParallelIn,
        /// Source stem rules; built-in English when omitted.
        #[arg(long)]
        stem_src: Option<PathBuf>,
        /// Target stem rules; identity when omitted.
        #[arg(long)]
        stem_tgt: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        iterations: usize,
    },
    /// BLEU, TER, PER and CDER of a hypothesis file against references.
    Evaluate {
        #[arg(long)]
        hyp: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        lowercase: bool,
        #[arg(long, value_enum, default_value = "greedy")]
        ter: TerArg,
        /// Floor zero n-gram matches instead of scoring 0.
        #[arg(long)]
        smooth: bool,
    },
    /// Run the stages listed in the --config file.
    Pipeline,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TerArg {
    Greedy,
    Exact,
}

fn emit(output: Option<&Path>, lines: &[String]) -> Result<()> {
    match output {
        Some(p) => write_lines(p, lines),
        None => {
            let mut out = std::io::stdout().lock();
            for l in lines {
                writeln!(out, "{l}").map_err(|e| Error::io("<stdout>", e))?;
            }
            Ok(())
        }
    }
}

fn map_lines(io: &TextIo, f: impl Fn(&str) -> Result<String>) -> Result<()> {
    let lines = read_lines(&io.input)?;
    let out = lines.iter().map(|l| f(l)).collect::<Result<Vec<_>>>()?;
    emit(io.output.as_deref(), &out)
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_corpus(corpus: &ParallelCorpus, src: &Path, tgt: &Path) -> Result<()> {
    write_sentences(src, corpus.sources())?;
    write_sentences(tgt, corpus.targets())
}

fn run(cli: Cli) -> Result<()> {
    let marker = cli.marker.clone().unwrap_or_else(|| DEFAULT_MARKER.to_owned());
    let order = cli.order.unwrap_or(DEFAULT_ORDER);
    let k = cli.k.unwrap_or(DEFAULT_K);
    match cli.command {
        Command::Normalize { io, script } => map_lines(&io, |l| Ok(normalize_text(l, script.into()))),
        Command::Tokenize { io, script } => map_lines(&io, |l| Ok(tokenize(l, script.into()).to_line())),
        Command::Filter {
            input,
            out_src,
            out_tgt,
            max_words,
            max_ratio,
        } => {
            let policy = FilterPolicy::new(max_words, max_ratio)?;
            let corpus = read_parallel(&input.src, &input.tgt)?;
            let (kept, removed) = filter_pairs(&corpus, &policy);
            write_corpus(&kept, &out_src, &out_tgt)?;
            eprintln!(
                "pairs_in={} pairs_out={} removed={}",
                corpus.len(),
                kept.len(),
                removed.len()
            );
            Ok(())
        }
        Command::Stats { files } => {
            let sides = files.iter().map(|f| read_sentences(f)).collect::<Result<Vec<_>>>()?;
            let names: Vec<String> = files
                .iter()
                .map(|f| {
                    f.file_name()
                        .map_or_else(|| f.display().to_string(), |n| n.to_string_lossy().into_owned())
                })
                .collect();
            let stats: Vec<_> = sides.iter().map(|s| compute_stats(s)).collect();
            let cols: Vec<(&str, _)> = names.iter().map(String::as_str).zip(stats.iter()).collect();
            print!("{}", render_stats_table(&cols));
            Ok(())
        }
        Command::Split {
            input,
            dev,
            test,
            out_dir,
        } => {
            let corpus = read_parallel(&input.src, &input.tgt)?;
            let parts = split_corpus(&corpus, dev, test, cli.seed)?;
            for (name, part) in [("train", &parts.train), ("dev", &parts.dev), ("test", &parts.test)] {
                write_corpus(
                    part,
                    &out_dir.join(format!("{name}.src")),
                    &out_dir.join(format!("{name}.tgt")),
                )?;
            }
            eprintln!(
                "train={} dev={} test={}",
                parts.train.len(),
                parts.dev.len(),
                parts.test.len()
            );
            Ok(())
        }
        Command::SplitSuffix { io, table, diagnostics } => {
            let table = SuffixTable::load(&table, &marker)?;
            let mut diag = SplitDiagnostics::new(&table);
            let out = read_sentences(&io.input)?
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    for w in s {
                        if let Ok(r) = suffix_split(w, &table) {
                            diag.record(&r);
                        }
                    }
                    split_sentence(s, &table, None)
                        .map(|s| s.to_line())
                        .map_err(|e| Error::data(&io.input, i + 1, e.to_string()))
                })
                .collect::<Result<Vec<_>>>()?;
            if diagnostics {
                eprintln!("tokens={} split={}", diag.tokens, diag.split);
                for (suffix, n) in &diag.by_suffix {
                    eprintln!("{suffix}\t{n}");
                }
            }
            emit(io.output.as_deref(), &out)
        }
        Command::Rejoin { io } => map_lines(&io, |l| Ok(rejoin(&Sentence::from_whitespace(l), &marker).to_line())),
        Command::Stem { io, rules } => {
            let rules = match rules {
                Some(p) => StemRuleTable::load(&p)?,
                None => StemRuleTable::english(),
            };
            map_lines(&io, |l| {
                Ok(stem_sentence(&Sentence::from_whitespace(l), &rules).to_line())
            })
        }
        Command::Reorder { io, rules } => {
            let rules = match rules {
                Some(p) => RuleSet::load(&p)?,
                None => RuleSet::demo(),
            };
            let lines = read_lines(&io.input)?;
            let out = lines
                .iter()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty())
                .map(|(i, l)| {
                    reorder_sentence(l, &rules)
                        .map(|s| s.to_line())
                        .map_err(|e| Error::data(&io.input, i + 1, e.to_string()))
                })
                .collect::<Result<Vec<_>>>()?;
            emit(io.output.as_deref(), &out)
        }
        Command::LmTrain { io, closed_vocab } => {
            let corpus = read_sentences(&io.input)?;
            let model = lm::train(
                &corpus,
                order,
                &MknOptions {
                    closed_vocabulary: closed_vocab,
                },
            )?;
            let arpa = write_arpa(&model);
            match &io.output {
                Some(p) => std::fs::write(p, arpa).map_err(|e| Error::io(p, e)),
                None => {
                    print!("{arpa}");
                    Ok(())
                }
            }
        }
        Command::LmScore { io, lm } => {
            let model = read_arpa(&read_file(&lm)?)?;
            let corpus = read_sentences(&io.input)?;
            let mut out: Vec<String> = corpus
                .iter()
                .map(|s| format!("{:.6}", model.score_sentence(s)))
                .collect();
            out.push(format!("perplexity={:.6}", model.perplexity(&corpus)));
            emit(io.output.as_deref(), &out)
        }
        Command::TranslitTrain {
            lexicon,
            iterations,
            model_dir,
        } => {
            let corpus = TranslitPairCorpus::load(&lexicon)?;
            let (model, log) = train_char_model(&corpus, iterations)?;
            model.save(&model_dir)?;
            for (i, ll) in log.log_likelihoods.iter().enumerate() {
                eprintln!("iteration {i}: log-likelihood {ll:.6}");
            }
            Ok(())
        }
        Command::TranslitApply {
            io,
            model,
            lm,
            vocab,
            lambda_tm,
            lambda_lm,
            log,
        } => {
            let model = CharTransModel::load(&model)?;
            let lm = read_arpa(&read_file(&lm)?)?;
            let vocab: HashSet<String> = read_lines(&vocab)?.into_iter().map(|l| l.trim().to_owned()).collect();
            let weights = RescoreWeights {
                translit: lambda_tm,
                lm: lambda_lm,
            };
            let mut diag = Vec::new();
            let out = read_sentences(&io.input)?
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let oovs: BTreeSet<usize> = detect_oovs(s, &vocab);
                    let r = replace_oovs(s, &oovs, &model, &lm, weights, k)
                        .map_err(|e| Error::data(&io.input, i + 1, e.to_string()))?;
                    for l in render_replacements(&r.replacements).lines() {
                        diag.push(format!("{}\t{l}", i + 1));
                    }
                    Ok(r.sentence.to_line())
                })
                .collect::<Result<Vec<_>>>()?;
            if let Some(p) = log {
                write_lines(&p, &diag)?;
            }
            emit(io.output.as_deref(), &out)
        }
        Command::AlignTrain {
            input,
            iterations,
            output,
        } => {
            let corpus = read_parallel(&input.src, &input.tgt)?;
            let (table, log) = train_model1(&corpus, iterations)?;
            std::fs::write(&output, write_ttable(&table)).map_err(|e| Error::io(&output, e))?;
            for (i, ll) in log.log_likelihoods.iter().enumerate() {
                eprintln!("iteration {i}: log-likelihood {ll:.6}");
            }
            Ok(())
        }
        Command::AlignViterbi { input, ttable, output } => {
            let corpus = read_parallel(&input.src, &input.tgt)?;
            let table = read_ttable(&read_file(&ttable)?)?;
            let out: Vec<String> = corpus
                .pairs
                .iter()
                .map(|p| viterbi_align(p, &table).to_pharaoh())
                .collect();
            emit(output.as_deref(), &out)
        }
        Command::AlignCompare {
            input,
            stem_src,
            stem_tgt,
            iterations,
        } => {
            let corpus = read_parallel(&input.src, &input.tgt)?;
            let src_rules = match stem_src {
                Some(p) => StemRuleTable::load(&p)?,
                None => StemRuleTable::english(),
            };
            let tgt_rules = match stem_tgt {
                Some(p) => StemRuleTable::load(&p)?,
                None => StemRuleTable::identity(),
            };
            print!(
                "{}",
                compare_factored(&corpus, &src_rules, &tgt_rules, iterations)?.render()
            );
            Ok(())
        }
        Command::Evaluate {
            hyp,
            reference,
            lowercase,
            ter,
            smooth,
        } => {
            let hyps = read_sentences(&hyp)?;
            let refs = read_sentences(&reference)?;
            let options = EvalOptions {
                lowercase,
                ter_mode: match ter {
                    TerArg::Greedy => TerMode::Greedy,
                    TerArg::Exact => TerMode::Exact,
                },
                smoothing: if smooth {
                    BleuSmoothing::Floor
                } else {
                    BleuSmoothing::Strict
                },
                ..Default::default()
            };
            print!("{}", report(&hyps, &refs, &options)?.render());
            Ok(())
        }
        Command::Pipeline => {
            let path = cli
                .config
                .ok_or_else(|| Error::Config("pipeline requires --config".into()))?;
            let mut overrides = Vec::new();
            if let Some(m) = cli.marker {
                overrides.push(("marker", m));
            }
            if let Some(k) = cli.k {
                overrides.push(("k", k.to_string()));
            }
            let config = PipelineConfig::load(&path, &overrides)?;
            match run_pipeline(&config) {
                Ok(manifest) => {
                    for s in &manifest.stages {
                        eprintln!("{}: {} -> {}", s.stage, s.pairs_in, s.pairs_out);
                    }
                    eprintln!("config_hash={}", manifest.config_hash);
                    Ok(())
                }
                Err(failure) => Err(failure.error),
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
