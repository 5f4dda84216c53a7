//! Metrics, InfoGain ranking, feature-set ablation and corpus splitting.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifier::TrainConfig;
use crate::corpus::{FulfillmentLabel, GoldInstance};
use crate::features::{FeatureConfig, FeatureVector};
use crate::lexicons::LexiconSet;
use crate::pipeline::{fit, predict_instances};
use crate::{Error, Result};

pub const DEFAULT_SEED: u64 = 13;

/// Column header of every metrics table.
pub const METRIC_COLUMNS: [&str; 9] = [
    "Ful-P", "Ful-R", "Ful-F1", "Unf-P", "Unf-R", "Unf-F1", "Precision", "Recall", "F1",
];

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf {
            precision,
            recall,
            f1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub fulfilled: Prf,
    pub unfulfilled: Prf,
    /// Unweighted mean of the two classes.
    pub overall: Prf,
    pub support_fulfilled: usize,
    pub support_unfulfilled: usize,
}

impl EvalResult {
    pub fn per_class(&self, label: FulfillmentLabel) -> Option<Prf> {
        match label {
            FulfillmentLabel::Fulfilled => Some(self.fulfilled),
            FulfillmentLabel::Unfulfilled => Some(self.unfulfilled),
            _ => None,
        }
    }

    /// Values in [`METRIC_COLUMNS`] order.
    pub fn columns(&self) -> [f64; 9] {
        let (f, u, o) = (self.fulfilled, self.unfulfilled, self.overall);
        [
            f.precision, f.recall, f.f1, u.precision, u.recall, u.f1, o.precision, o.recall, o.f1,
        ]
    }

    pub fn summary(&self) -> String {
        format!(
            "Fulfilled   (n={}): P {:.4}  R {:.4}  F1 {:.4}\n\
             Unfulfilled (n={}): P {:.4}  R {:.4}  F1 {:.4}\n\
             Overall (macro):   P {:.4}  R {:.4}  F1 {:.4}\n",
            self.support_fulfilled,
            self.fulfilled.precision,
            self.fulfilled.recall,
            self.fulfilled.f1,
            self.support_unfulfilled,
            self.unfulfilled.precision,
            self.unfulfilled.recall,
            self.unfulfilled.f1,
            self.overall.precision,
            self.overall.recall,
            self.overall.f1
        )
    }
}

pub fn evaluate(predictions: &[FulfillmentLabel], gold: &[FulfillmentLabel]) -> Result<EvalResult> {
    if predictions.len() != gold.len() {
        return Err(Error::Evaluation(format!(
            "{} predictions for {} gold labels",
            predictions.len(),
            gold.len()
        )));
    }
    if gold.is_empty() {
        return Err(Error::Evaluation("nothing to evaluate".into()));
    }
    if let Some(l) = predictions.iter().chain(gold).find(|l| !l.is_binary()) {
        return Err(Error::Evaluation(format!("label {l} is not Fulfilled or Unfulfilled")));
    }
    let class = |c: FulfillmentLabel| {
        let tp = predictions.iter().zip(gold).filter(|(p, g)| **p == c && **g == c).count();
        let fp = predictions.iter().zip(gold).filter(|(p, g)| **p == c && **g != c).count();
        let fn_ = predictions.iter().zip(gold).filter(|(p, g)| **p != c && **g == c).count();
        Prf::from_counts(tp, fp, fn_)
    };
    let f = class(FulfillmentLabel::Fulfilled);
    let u = class(FulfillmentLabel::Unfulfilled);
    let support_fulfilled = gold.iter().filter(|g| **g == FulfillmentLabel::Fulfilled).count();
    Ok(EvalResult {
        fulfilled: f,
        unfulfilled: u,
        overall: Prf {
            precision: (f.precision + u.precision) / 2.0,
            recall: (f.recall + u.recall) / 2.0,
            f1: (f.f1 + u.f1) / 2.0,
        },
        support_fulfilled,
        support_unfulfilled: gold.len() - support_fulfilled,
    })
}

/// Tab-separated metrics table. With `row_label` set, rows get a leading
/// column of that name.
pub fn format_table(row_label: Option<&str>, rows: &[(String, EvalResult)]) -> String {
    let mut out = String::new();
    if let Some(name) = row_label {
        out.push_str(name);
        out.push('\t');
    }
    out.push_str(&METRIC_COLUMNS.join("\t"));
    out.push('\n');
    for (name, r) in rows {
        if row_label.is_some() {
            out.push_str(name);
            out.push('\t');
        }
        let cells: Vec<String> = r.columns().iter().map(|v| format!("{v:.4}")).collect();
        out.push_str(&cells.join("\t"));
        out.push('\n');
    }
    out
}

/// Shannon entropy in bits of a count distribution.
pub fn entropy(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.log2()
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanking {
    /// Descending by gain, ties by name.
    pub entries: Vec<(String, f64)>,
}

impl FeatureRanking {
    pub fn top(&self, k: usize) -> impl Iterator<Item = &str> {
        self.entries.iter().take(k).map(|(n, _)| n.as_str())
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("rank\tfeature\tinfo_gain\n");
        for (i, (name, ig)) in self.entries.iter().enumerate() {
            let _ = writeln!(out, "{}\t{name}\t{ig:.6}", i + 1);
        }
        out
    }
}

/// Information gain of every feature's presence (value > 0) about the label.
pub fn info_gain(dataset: &[(FeatureVector, FulfillmentLabel)]) -> FeatureRanking {
    let labels: BTreeSet<FulfillmentLabel> = dataset.iter().map(|(_, l)| *l).collect();
    let labels: Vec<FulfillmentLabel> = labels.into_iter().collect();
    let slot = |l: FulfillmentLabel| labels.iter().position(|x| *x == l).expect("collected");
    let mut totals = vec![0usize; labels.len()];
    for (_, l) in dataset {
        totals[slot(*l)] += 1;
    }
    let h = entropy(&totals);
    let n = dataset.len() as f64;

    // Per feature: label counts among rows where the feature is present.
    let mut present: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (fv, l) in dataset {
        for (name, _) in fv.iter() {
            present.entry(name).or_insert_with(|| vec![0; labels.len()]);
        }
        for (name, v) in fv.iter() {
            if v > 0.0 {
                present.get_mut(name).expect("inserted")[slot(*l)] += 1;
            }
        }
    }
    let mut entries: Vec<(String, f64)> = present
        .into_iter()
        .map(|(name, on)| {
            let off: Vec<usize> = totals.iter().zip(&on).map(|(t, o)| t - o).collect();
            let n_on: usize = on.iter().sum();
            let n_off = dataset.len() - n_on;
            let cond = n_on as f64 / n * entropy(&on) + n_off as f64 / n * entropy(&off);
            (name.to_string(), (h - cond).max(0.0))
        })
        .collect();
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    FeatureRanking { entries }
}

/// Trains one model per named feature set on `train` and scores it on `dev`.
pub fn ablate(
    train: &[GoldInstance],
    dev: &[GoldInstance],
    feature_sets: &[(String, FeatureConfig)],
    train_config: &TrainConfig,
    lex: &LexiconSet,
) -> Result<Vec<(String, EvalResult)>> {
    let mut seen = HashSet::new();
    if let Some((name, _)) = feature_sets.iter().find(|(n, _)| !seen.insert(n.as_str())) {
        return Err(Error::Config(format!("duplicate feature set name {name:?}")));
    }
    let dev: Vec<&GoldInstance> = dev.iter().filter(|g| g.label.is_binary()).collect();
    let dev_instances: Vec<_> = dev.iter().map(|g| g.instance.clone()).collect();
    let gold: Vec<FulfillmentLabel> = dev.iter().map(|g| g.label).collect();
    feature_sets
        .iter()
        .map(|(name, features)| {
            let model = fit(train, features, train_config, lex)?;
            let preds = predict_instances(&model, &dev_instances, lex)?;
            let labels: Vec<FulfillmentLabel> = preds.iter().map(|p| p.label).collect();
            Ok((name.clone(), evaluate(&labels, &gold)?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Split {
    pub train: Vec<GoldInstance>,
    pub dev: Vec<GoldInstance>,
    pub test: Vec<GoldInstance>,
}

/// Shuffles narratives with a seeded RNG and deals them into train, dev and
/// test until each split reaches its share of instances. Only Fulfilled and
/// Unfulfilled instances are kept. All instances of a narrative end up in
/// the same split.
pub fn split_corpus(gold: &[GoldInstance], ratios: [f64; 3], seed: u64) -> Result<Split> {
    if ratios.iter().any(|r| !(0.0..=1.0).contains(r)) || (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-6 {
        return Err(Error::Config(format!("split ratios {ratios:?} must be >= 0 and sum to 1")));
    }
    let mut groups: BTreeMap<&str, Vec<&GoldInstance>> = BTreeMap::new();
    for g in gold.iter().filter(|g| g.label.is_binary()) {
        groups.entry(g.instance.narrative_id.as_str()).or_default().push(g);
    }
    let mut groups: Vec<Vec<&GoldInstance>> = groups.into_values().collect();
    groups.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let n: usize = groups.iter().map(Vec::len).sum();
    let cut_train = (ratios[0] * n as f64).round() as usize;
    let cut_dev = ((ratios[0] + ratios[1]) * n as f64).round() as usize;
    let mut split = Split::default();
    let mut seen = 0usize;
    for group in groups {
        let target = if seen < cut_train {
            &mut split.train
        } else if seen < cut_dev {
            &mut split.dev
        } else {
            &mut split.test
        };
        seen += group.len();
        target.extend(group.into_iter().cloned());
    }
    let parts = [&split.train, &split.dev, &split.test];
    if let Some(i) = (0..3).find(|&i| ratios[i] > 0.0 && parts[i].is_empty()) {
        let name = ["train", "dev", "test"][i];
        return Err(Error::Evaluation(format!(
            "{n} binary instances are too few: the {name} split came out empty"
        )));
    }
    Ok(split)
}
