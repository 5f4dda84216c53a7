//! Model fitting over gold instances and the manifest-driven end-to-end run.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;

use crate::aggregator::{aggregate, read_annotations, DEFAULT_SNAP_COVERAGE};
use crate::classifier::{
    save_model, train, LrHyper, ModelFile, ModelKind, Prediction, TrainConfig,
};
use crate::corpus::{
    read_gold, read_instances, read_narratives, write_corpus, Corpus, DesireInstance, FulfillmentLabel,
    GoldInstance,
};
use crate::evaluation::{ablate, evaluate, format_table, info_gain, split_corpus, DEFAULT_SEED};
use crate::extractor::{generate_patterns, match_desires, PatternConfig};
use crate::features::{build_bow_vocab, featurize_all, FeatureConfig, Family, Scope};
use crate::lexicons::LexiconSet;
use crate::{Error, Result};

/// Trains on the Fulfilled/Unfulfilled part of `train`. A BOW family gets
/// its vocabulary frozen from the training instances.
pub fn fit(
    train_set: &[GoldInstance],
    features: &FeatureConfig,
    config: &TrainConfig,
    lex: &LexiconSet,
) -> Result<ModelFile> {
    let binary: Vec<&GoldInstance> = train_set.iter().filter(|g| g.label.is_binary()).collect();
    let instances: Vec<DesireInstance> = binary.iter().map(|g| g.instance.clone()).collect();
    let mut features = features.clone();
    if features.is_enabled(Family::Bow) && features.bow_vocab.is_none() {
        features.bow_vocab = Some(build_bow_vocab(&instances, features.scope));
    }
    let vectors = featurize_all(&instances, lex, &features)?;
    let data: Vec<_> = vectors.into_iter().zip(binary.iter().map(|g| g.label)).collect();
    let model = train(&data, config)?;
    Ok(ModelFile::new(features, model))
}

pub fn predict_instances(
    model: &ModelFile,
    instances: &[DesireInstance],
    lex: &LexiconSet,
) -> Result<Vec<Prediction>> {
    let vectors = featurize_all(instances, lex, &model.features)?;
    Ok(vectors.par_iter().map(|fv| model.model.predict(fv)).collect())
}

/// Runs every pattern over every narrative.
pub fn extract(narratives: &[crate::corpus::Narrative], patterns: &PatternConfig) -> Result<Vec<DesireInstance>> {
    let patterns = generate_patterns(patterns)?;
    Ok(narratives
        .par_iter()
        .flat_map_iter(|n| match_desires(n, &patterns))
        .collect())
}

fn default_ratios() -> [f64; 3] {
    [0.714, 0.141, 0.145]
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_features() -> String {
    "ALL".into()
}

fn default_nb_alpha() -> f64 {
    1.0
}

/// TOML run manifest. Relative paths resolve against the manifest's
/// directory. Input is one of: `gold`; `instances` plus `annotations`; or
/// `narratives` plus `annotations` (extraction runs first).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub output_dir: PathBuf,
    pub gold: Option<PathBuf>,
    pub instances: Option<PathBuf>,
    pub narratives: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub patterns: Option<PathBuf>,
    pub lexicons: Option<PathBuf>,
    #[serde(default = "default_ratios")]
    pub split: [f64; 3],
    #[serde(default)]
    pub model: ModelKind,
    #[serde(default = "default_features")]
    pub features: String,
    #[serde(default)]
    pub scope: Scope,
    /// Split used for the final evaluation table: `test` or `dev`.
    pub evaluate_on: Option<String>,
    #[serde(default)]
    pub ablation: Vec<String>,
    #[serde(default)]
    pub lr: Option<LrHyper>,
    #[serde(default = "default_nb_alpha")]
    pub nb_alpha: f64,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut m: Manifest =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut m.output_dir);
        for p in [
            &mut m.gold,
            &mut m.instances,
            &mut m.narratives,
            &mut m.annotations,
            &mut m.patterns,
            &mut m.lexicons,
        ]
        .into_iter()
        .flatten()
        {
            resolve(p);
        }
        Ok(m)
    }

    fn train_config(&self) -> TrainConfig {
        let mut lr = self.lr.clone().unwrap_or_default();
        lr.seed = self.seed;
        TrainConfig {
            kind: self.model,
            lr,
            nb_alpha: self.nb_alpha,
        }
    }

    fn load_gold(&self) -> Result<Vec<GoldInstance>> {
        if let Some(gold) = &self.gold {
            return read_gold(gold);
        }
        let annotations = self.annotations.as_ref().ok_or_else(|| {
            Error::Config("manifest needs `gold`, or `annotations` with `instances` or `narratives`".into())
        })?;
        let instances = match (&self.instances, &self.narratives) {
            (Some(path), _) => read_instances(path)?,
            (None, Some(path)) => {
                let patterns = match &self.patterns {
                    Some(p) => PatternConfig::load(p)?,
                    None => PatternConfig::default(),
                };
                extract(&read_narratives(path)?, &patterns)?
            }
            (None, None) => {
                return Err(Error::Config("manifest needs `instances` or `narratives`".into()))
            }
        };
        aggregate(&instances, &read_annotations(annotations)?, DEFAULT_SNAP_COVERAGE)
    }
}

/// Paths of everything a run writes.
#[derive(Debug, Clone)]
pub struct RunOutputs {
    pub model: PathBuf,
    pub evaluation: PathBuf,
    pub ablation: Option<PathBuf>,
    pub ranking: PathBuf,
    pub summary: String,
}

/// Split, train, evaluate, rank features and (optionally) ablate. Every
/// output is a deterministic function of the inputs and the seed.
pub fn run_manifest(manifest: &Manifest) -> Result<RunOutputs> {
    let lex = match &manifest.lexicons {
        Some(dir) => LexiconSet::load_dir(dir)?,
        None => LexiconSet::bundled(),
    };
    let gold = manifest.load_gold()?;
    let split = split_corpus(&gold, manifest.split, manifest.seed)?;
    let features = FeatureConfig::parse_selection(&manifest.features, manifest.scope)?;
    let train_config = manifest.train_config();

    let out = &manifest.output_dir;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    for (name, part) in [("train", &split.train), ("dev", &split.dev), ("test", &split.test)] {
        write_corpus(&Corpus::Gold(part.clone()), &out.join(format!("{name}.jsonl")))?;
    }

    let model = fit(&split.train, &features, &train_config, &lex)?;
    let model_path = out.join("model.json");
    save_model(&model_path, &model)?;

    let eval_split = match manifest.evaluate_on.as_deref().unwrap_or("test") {
        "test" => &split.test,
        "dev" => &split.dev,
        other => return Err(Error::Config(format!("evaluate_on must be test or dev, got {other:?}"))),
    };
    let instances: Vec<DesireInstance> = eval_split.iter().map(|g| g.instance.clone()).collect();
    let preds = predict_instances(&model, &instances, &lex)?;
    let labels: Vec<FulfillmentLabel> = preds.iter().map(|p| p.label).collect();
    let gold_labels: Vec<FulfillmentLabel> = eval_split.iter().map(|g| g.label).collect();
    let result = evaluate(&labels, &gold_labels)?;
    let eval_path = out.join("evaluation.tsv");
    std::fs::write(&eval_path, format_table(None, &[(features.label(), result.clone())]))
        .map_err(|e| Error::io(&eval_path, e))?;

    let train_instances: Vec<DesireInstance> = split.train.iter().map(|g| g.instance.clone()).collect();
    let vectors = featurize_all(&train_instances, &lex, &model.features)?;
    let ranked = info_gain(&vectors.into_iter().zip(split.train.iter().map(|g| g.label)).collect::<Vec<_>>());
    let ranking_path = out.join("ranking.tsv");
    std::fs::write(&ranking_path, ranked.to_tsv()).map_err(|e| Error::io(&ranking_path, e))?;

    let ablation = if manifest.ablation.is_empty() {
        None
    } else {
        let sets = manifest
            .ablation
            .iter()
            .map(|sel| {
                let cfg = FeatureConfig::parse_selection(sel, manifest.scope)?;
                Ok((cfg.label(), cfg))
            })
            .collect::<Result<Vec<_>>>()?;
        let rows = ablate(&split.train, &split.dev, &sets, &train_config, &lex)?;
        let path = out.join("ablation.tsv");
        std::fs::write(&path, format_table(Some("Features"), &rows)).map_err(|e| Error::io(&path, e))?;
        Some(path)
    };

    let summary = format!(
        "train {} / dev {} / test {} instances\n{}",
        split.train.len(),
        split.dev.len(),
        split.test.len(),
        result.summary()
    );
    Ok(RunOutputs {
        model: model_path,
        evaluation: eval_path,
        ablation,
        ranking: ranking_path,
        summary,
    })
}
