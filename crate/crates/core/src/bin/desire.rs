use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use desire_core::aggregator::{
    agreement_report, aggregate, read_annotations, AnnotationMatrix, DEFAULT_SNAP_COVERAGE,
};
use desire_core::classifier::{load_model, save_model, LrHyper, ModelKind, TrainConfig};
use desire_core::corpus::{
    read_gold, read_instances, read_narratives, write_corpus, Corpus, FulfillmentLabel, GoldInstance,
};
use desire_core::evaluation::{ablate, evaluate, format_table, info_gain, split_corpus, DEFAULT_SEED};
use desire_core::extractor::PatternConfig;
use desire_core::features::{featurize_all, write_vectors, FeatureConfig, Scope};
use desire_core::lexicons::LexiconSet;
use desire_core::pipeline::{extract, fit, predict_instances, run_manifest, Manifest};
use desire_core::Error;

#[derive(Parser)]
#[command(name = "desire", version, about = "Desire expression extraction and fulfillment classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct FeatureArgs {
    /// ALL, a family (Desire, Discourse, Connotation, SentimentFlow, BOW),
    /// a feature name, or a comma list; `-Name` removes a feature.
    #[arg(long, default_value = "ALL")]
    features: String,
    #[arg(long, default_value = "desire+context")]
    scope: String,
    /// Directory with lexicon files; missing files fall back to the bundled ones.
    #[arg(long)]
    lexicons: Option<PathBuf>,
}

impl FeatureArgs {
    fn config(&self) -> Result<FeatureConfig, Error> {
        let scope: Scope = self.scope.parse()?;
        FeatureConfig::parse_selection(&self.features, scope)
    }

    fn lexicons(&self) -> Result<LexiconSet, Error> {
        load_lexicons(self.lexicons.as_deref())
    }
}

#[derive(Args, Clone)]
struct TrainArgs {
    #[arg(long, default_value = "lr")]
    model: String,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long = "learning-rate", default_value_t = 0.1)]
    learning_rate: f64,
    #[arg(long, default_value_t = 500)]
    epochs: usize,
    /// Scale each feature by its largest training value.
    #[arg(long)]
    scale: bool,
    /// Additive smoothing for Naive Bayes.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
}

impl TrainArgs {
    fn config(&self) -> Result<TrainConfig, Error> {
        let kind: ModelKind = self.model.parse()?;
        Ok(TrainConfig {
            kind,
            lr: LrHyper {
                l2_lambda: self.lambda,
                learning_rate: self.learning_rate,
                epochs: self.epochs,
                seed: self.seed,
                scale: self.scale,
                ..LrHyper::default()
            },
            nb_alpha: self.alpha,
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Find desire expressions in raw narratives.
    Extract {
        #[arg(long)]
        patterns: Option<PathBuf>,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build gold instances from extracted instances and annotations.
    Aggregate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Share of a sentence an evidence span must cover to snap to it.
        #[arg(long, default_value_t = DEFAULT_SNAP_COVERAGE)]
        snap: f64,
    },
    /// Write sparse feature vectors for instances.
    Featurize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        features: FeatureArgs,
    },
    /// Train a model on gold instances.
    Train {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        features: FeatureArgs,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Predict fulfillment for instances with a trained model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        lexicons: Option<PathBuf>,
    },
    /// Score predictions (or a model) against gold instances.
    Evaluate {
        /// Gold instances.
        #[arg(long = "in")]
        input: PathBuf,
        /// Predictions file written by `predict`.
        #[arg(long, conflicts_with = "model", required_unless_present = "model")]
        predictions: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        lexicons: Option<PathBuf>,
    },
    /// Compare feature sets by training on one split and scoring on another.
    Ablate {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        dev: PathBuf,
        /// Feature selection; repeat for several rows.
        #[arg(long = "set")]
        sets: Vec<String>,
        #[arg(long, default_value = "desire+context")]
        scope: String,
        #[arg(long)]
        lexicons: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        model: TrainArgs,
    },
    /// Rank features by information gain on gold instances.
    RankFeatures {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        top: usize,
        #[command(flatten)]
        features: FeatureArgs,
    },
    /// Agreement statistics for an annotation file.
    ReportAgreement {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split gold instances into narrative-disjoint train/dev/test files.
    Split {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        out_dir: PathBuf,
        #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0.714, 0.141, 0.145])]
        ratios: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Run the whole pipeline from a TOML manifest.
    Run {
        manifest: PathBuf,
    },
}

fn load_lexicons(dir: Option<&Path>) -> Result<LexiconSet, Error> {
    match dir {
        Some(d) => LexiconSet::load_dir(d),
        None => Ok(LexiconSet::bundled()),
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn labelled(gold: &[GoldInstance]) -> Vec<&GoldInstance> {
    gold.iter().filter(|g| g.label.is_binary()).collect()
}

fn read_predictions(path: &Path) -> Result<HashMap<String, FulfillmentLabel>, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut out = HashMap::new();
    for (n, line) in text.lines().enumerate() {
        if n == 0 && line.starts_with("instance_id") || line.trim().is_empty() {
            continue;
        }
        let mut f = line.split('\t');
        let (Some(id), Some(label)) = (f.next(), f.next()) else {
            return Err(Error::Record {
                file: path.display().to_string(),
                record: n + 1,
                field: "line".into(),
                message: "expected instance_id<TAB>label<TAB>probability".into(),
            });
        };
        let label: FulfillmentLabel = label.parse().map_err(|m| Error::Record {
            file: path.display().to_string(),
            record: n + 1,
            field: "label".into(),
            message: m,
        })?;
        out.insert(id.to_string(), label);
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Extract { patterns, input, out } => {
            let config = match patterns {
                Some(p) => PatternConfig::load(&p)?,
                None => PatternConfig::default(),
            };
            let narratives = read_narratives(&input)?;
            let instances = extract(&narratives, &config)?;
            eprintln!("{} desire expressions in {} narratives", instances.len(), narratives.len());
            write_corpus(&Corpus::Instances(instances), &out)
        }
        Command::Aggregate {
            input,
            annotations,
            out,
            snap,
        } => {
            let instances = read_instances(&input)?;
            let gold = aggregate(&instances, &read_annotations(&annotations)?, snap)?;
            eprintln!("{} gold instances", gold.len());
            write_corpus(&Corpus::Gold(gold), &out)
        }
        Command::Featurize { input, out, features } => {
            let config = features.config()?;
            let lex = features.lexicons()?;
            let instances = read_instances(&input)?;
            let vectors = featurize_all(&instances, &lex, &config)?;
            let rows: Vec<_> = instances.into_iter().map(|i| i.id).zip(vectors).collect();
            write_vectors(&out, &rows)
        }
        Command::Train {
            input,
            out,
            features,
            train,
        } => {
            let lex = features.lexicons()?;
            let model = fit(&read_gold(&input)?, &features.config()?, &train.config()?, &lex)?;
            save_model(&out, &model)
        }
        Command::Predict {
            model,
            input,
            out,
            lexicons,
        } => {
            let model = load_model(&model)?;
            let lex = load_lexicons(lexicons.as_deref())?;
            let instances = read_instances(&input)?;
            let preds = predict_instances(&model, &instances, &lex)?;
            let mut text = String::from("instance_id\tlabel\tprobability\n");
            for (inst, p) in instances.iter().zip(&preds) {
                let _ = writeln!(text, "{}\t{}\t{:.6}", inst.id, p.label, p.probability);
            }
            write_text(&out, &text)
        }
        Command::Evaluate {
            input,
            predictions,
            model,
            out,
            lexicons,
        } => {
            let gold = read_gold(&input)?;
            let gold = labelled(&gold);
            let predicted: Vec<FulfillmentLabel> = if let Some(path) = predictions {
                let by_id = read_predictions(&path)?;
                gold.iter()
                    .map(|g| {
                        by_id.get(&g.instance.id).copied().ok_or_else(|| {
                            Error::Evaluation(format!("no prediction for instance {}", g.instance.id))
                        })
                    })
                    .collect::<Result<_, _>>()?
            } else {
                let model = load_model(model.as_deref().expect("clap requires one"))?;
                let lex = load_lexicons(lexicons.as_deref())?;
                let instances: Vec<_> = gold.iter().map(|g| g.instance.clone()).collect();
                predict_instances(&model, &instances, &lex)?
                    .into_iter()
                    .map(|p| p.label)
                    .collect()
            };
            let labels: Vec<FulfillmentLabel> = gold.iter().map(|g| g.label).collect();
            let result = evaluate(&predicted, &labels)?;
            eprint!("{}", result.summary());
            emit(out.as_deref(), &format_table(None, &[(String::new(), result)]))
        }
        Command::Ablate {
            train,
            dev,
            sets,
            scope,
            lexicons,
            out,
            model,
        } => {
            let scope: Scope = scope.parse()?;
            let sets = if sets.is_empty() {
                ["ALL", "Discourse", "But-Present", "ALL,-But-Present"]
                    .map(String::from)
                    .to_vec()
            } else {
                sets
            };
            let configs = sets
                .iter()
                .map(|s| FeatureConfig::parse_selection(s, scope).map(|c| (c.label(), c)))
                .collect::<Result<Vec<_>, _>>()?;
            let lex = load_lexicons(lexicons.as_deref())?;
            let rows = ablate(&read_gold(&train)?, &read_gold(&dev)?, &configs, &model.config()?, &lex)?;
            emit(out.as_deref(), &format_table(Some("Features"), &rows))
        }
        Command::RankFeatures {
            input,
            out,
            top,
            features,
        } => {
            let gold = read_gold(&input)?;
            let gold = labelled(&gold);
            let lex = features.lexicons()?;
            let instances: Vec<_> = gold.iter().map(|g| g.instance.clone()).collect();
            let vectors = featurize_all(&instances, &lex, &features.config()?)?;
            let data: Vec<_> = vectors.into_iter().zip(gold.iter().map(|g| g.label)).collect();
            let mut ranking = info_gain(&data);
            if top > 0 {
                ranking.entries.truncate(top);
            }
            emit(out.as_deref(), &ranking.to_tsv())
        }
        Command::ReportAgreement { input, out } => {
            let matrix = AnnotationMatrix::from_records(&read_annotations(&input)?);
            let report = agreement_report(&matrix)?;
            eprint!("{}", report.summary());
            let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
            emit(out.as_deref(), &json)
        }
        Command::Split {
            input,
            out_dir,
            ratios,
            seed,
        } => {
            let ratios: [f64; 3] = ratios
                .try_into()
                .map_err(|_| Error::Config("--ratios takes three values".into()))?;
            let split = split_corpus(&read_gold(&input)?, ratios, seed)?;
            std::fs::create_dir_all(&out_dir).map_err(|e| Error::Io {
                path: out_dir.clone(),
                source: e,
            })?;
            for (name, part) in [("train", split.train), ("dev", split.dev), ("test", split.test)] {
                eprintln!("{name}: {}", part.len());
                write_corpus(&Corpus::Gold(part), &out_dir.join(format!("{name}.jsonl")))?;
            }
            Ok(())
        }
        Command::Run { manifest } => {
            let outputs = run_manifest(&Manifest::load(&manifest)?)?;
            print!("{}", outputs.summary);
            Ok(())
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) => 1,
        Error::Training(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
