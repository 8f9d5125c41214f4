use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lenient_cer::eval::{corpus_evaluate_numbered, parse_corpus, prepare_records, sha256_hex};
use lenient_cer::restore::{DEFAULT_MARGIN, DEFAULT_MAX_CANDIDATES, DEFAULT_ORDER};
use lenient_cer::text::Normalization;
use lenient_cer::{
    build_reference, CommandRestorer, EvalError, EvalOptions, Metric, NgramModel, NgramRestorer,
    ReadingDictionary, Resources, StageConfig, VariantLexicon,
};

const USAGE: u8 = 1;
const RESOURCE: u8 = 2;
const NO_RECORDS: u8 = 3;

#[derive(Parser)]
#[command(
    name = "lenient-cer",
    version,
    about = "Lenient character error rate for Japanese ASR",
    args_override_self = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score a corpus of id<TAB>reference<TAB>hypothesis lines.
    Eval(Box<EvalArgs>),
    /// Count character n-grams of a plain-text corpus, one sentence per line.
    TrainNgram(TrainArgs),
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Comma-separated subset of wer,cer,lenient.
    #[arg(long, default_value = "wer,cer,lenient")]
    metrics: String,
    /// Comma-separated subset of kana,kanji,lexicon; empty or "raw" for none.
    #[arg(long, default_value = "kana,kanji,lexicon")]
    stages: String,
    #[arg(long)]
    readings: PathBuf,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Write lexicon load diagnostics here as JSON.
    #[arg(long)]
    lexicon_report: Option<PathBuf>,
    #[arg(long)]
    ngram: Option<PathBuf>,
    /// External restorer, run through `sh -c`; replaces the n-gram model.
    #[arg(long)]
    restorer_cmd: Option<String>,
    #[arg(long, default_value_t = DEFAULT_MAX_CANDIDATES)]
    max_candidates: usize,
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    margin: f64,
    #[arg(long, default_value_t = lenient_cer::eval::DEFAULT_BOOTSTRAP)]
    bootstrap: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    strip_punct: bool,
    #[arg(long)]
    nfkc: bool,
    /// Score utterances on all cores. The report is identical either way.
    #[arg(long)]
    parallel: bool,
    /// Include lenient alignments in the JSON report.
    #[arg(long)]
    alignments: bool,
    #[arg(long)]
    dump_lattice: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    tsv: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    order: usize,
    #[arg(long)]
    out: PathBuf,
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Eval(args) => run_eval(*args),
        Command::TrainNgram(args) => run_train(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("lenient-cer: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read(
    path: &Path,
    checksums: &mut BTreeMap<String, String>,
    name: &str,
) -> Result<String, Failure> {
    let bytes = fs::read(path).map_err(|e| fail(RESOURCE, format!("{}: {e}", path.display())))?;
    checksums.insert(name.to_string(), sha256_hex(&bytes));
    String::from_utf8(bytes).map_err(|_| fail(RESOURCE, format!("{}: not UTF-8", path.display())))
}

fn parse_stages(list: &str, max_candidates: usize, margin: f64) -> Result<StageConfig, Failure> {
    let mut config = StageConfig {
        max_candidates,
        margin,
        ..StageConfig::raw()
    };
    for stage in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match stage {
            "raw" | "none" => {}
            "kana" => config.kana = true,
            "kanji" => config.kanji = true,
            "lexicon" => config.lexicon = true,
            other => return Err(fail(USAGE, format!("unknown stage {other:?}"))),
        }
    }
    config.validate().map_err(|e| fail(USAGE, e.to_string()))?;
    Ok(config)
}

fn run_eval(args: EvalArgs) -> Result<(), Failure> {
    let metrics = args
        .metrics
        .split(',')
        .map(|m| m.parse::<Metric>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| fail(USAGE, e.to_string()))?;
    let config = parse_stages(&args.stages, args.max_candidates, args.margin)?;
    if args.max_candidates == 0 || args.margin.is_nan() || args.margin < 0.0 {
        return Err(fail(
            USAGE,
            "--max-candidates must be positive and --margin non-negative",
        ));
    }
    if args.bootstrap < lenient_cer::eval::MIN_BOOTSTRAP {
        return Err(fail(
            USAGE,
            EvalError::TooFewResamples(args.bootstrap).to_string(),
        ));
    }
    let lenient = metrics.contains(&Metric::Lenient);
    if lenient && config.kanji && args.ngram.is_none() && args.restorer_cmd.is_none() {
        return Err(fail(
            USAGE,
            "the kanji stage needs --ngram or --restorer-cmd",
        ));
    }
    if lenient && config.lexicon && args.lexicon.is_none() {
        return Err(fail(USAGE, "the lexicon stage needs --lexicon"));
    }

    let mut checksums = BTreeMap::new();
    let readings = ReadingDictionary::from_tsv(&read(&args.readings, &mut checksums, "readings")?)
        .map_err(|e| fail(RESOURCE, e.to_string()))?;
    let mut resources = Resources::new(readings);
    resources.normalization = Normalization {
        nfkc: args.nfkc,
        strip_punct: args.strip_punct,
    };
    if let Some(path) = &args.lexicon {
        let text = read(path, &mut checksums, "lexicon")?;
        let report = VariantLexicon::load_lenient(text.as_bytes())
            .map_err(|e| fail(RESOURCE, e.to_string()))?;
        if let Some(report_path) = &args.lexicon_report {
            let json =
                serde_json::to_string_pretty(&report.rejected).expect("diagnostics serialize");
            fs::write(report_path, json + "\n")
                .map_err(|e| fail(RESOURCE, format!("{}: {e}", report_path.display())))?;
        }
        if let Some(first) = report.rejected.first() {
            return Err(fail(
                RESOURCE,
                format!(
                    "{}: {first} ({} bad lines)",
                    path.display(),
                    report.rejected.len()
                ),
            ));
        }
        resources.lexicon = Some(report.lexicon);
    }
    if let Some(cmd) = &args.restorer_cmd {
        let restorer = CommandRestorer::spawn(cmd).map_err(|e| fail(RESOURCE, e.to_string()))?;
        checksums.insert("restorer_cmd".into(), sha256_hex(cmd.as_bytes()));
        resources.restorer = Some(Box::new(restorer));
    } else if let Some(path) = &args.ngram {
        let model = NgramModel::from_tsv(&read(path, &mut checksums, "ngram")?)
            .map_err(|e| fail(RESOURCE, e.to_string()))?;
        resources.restorer = Some(Box::new(NgramRestorer::new(model)));
    }

    let corpus = read(&args.corpus, &mut checksums, "corpus")?;
    let (records, rejected) =
        parse_corpus(corpus.as_bytes()).map_err(|e| fail(RESOURCE, e.to_string()))?;

    let options = EvalOptions {
        metrics,
        config,
        seed: args.seed,
        bootstrap: args.bootstrap,
        parallel: args.parallel,
        alignments: args.alignments,
        resource_checksums: checksums,
    };
    let report = corpus_evaluate_numbered(&records, rejected, &resources, &options).map_err(
        |e| match e {
            EvalError::NoValidRecords => fail(NO_RECORDS, e.to_string()),
            other => fail(USAGE, other.to_string()),
        },
    )?;

    if let Some(dir) = &args.dump_lattice {
        dump_lattices(dir, &records, &resources, &config)?;
    }
    write(&args.out, &report.to_json())?;
    if let Some(path) = &args.tsv {
        write(path, &report.to_tsv())?;
    }
    Ok(())
}

fn dump_lattices(
    dir: &Path,
    records: &[(usize, lenient_cer::UtteranceRecord)],
    resources: &Resources,
    config: &StageConfig,
) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| fail(RESOURCE, format!("{}: {e}", dir.display())))?;
    let (valid, _) = prepare_records(records, &resources.normalization);
    for (_, record) in valid {
        let Ok(built) = build_reference(&record.reference, config, resources) else {
            continue;
        };
        let name: String = record
            .id
            .chars()
            .map(|c| {
                if c == '/' || c == '\\' || c.is_control() {
                    '_'
                } else {
                    c
                }
            })
            .collect();
        write(&dir.join(format!("{name}.lat")), &built.lattice.to_text())?;
    }
    Ok(())
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| fail(RESOURCE, format!("{}: {e}", path.display())))
}

fn run_train(args: TrainArgs) -> Result<(), Failure> {
    if args.order == 0 {
        return Err(fail(USAGE, "--order must be at least 1"));
    }
    let file = fs::File::open(&args.corpus)
        .map_err(|e| fail(RESOURCE, format!("{}: {e}", args.corpus.display())))?;
    let lines = std::io::BufRead::lines(BufReader::new(file))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| fail(RESOURCE, format!("{}: {e}", args.corpus.display())))?;
    let model = NgramModel::train(&lines, args.order).map_err(|e| fail(RESOURCE, e.to_string()))?;
    write(&args.out, &model.to_tsv())
}
