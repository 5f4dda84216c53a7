//! Shared fixtures and the acceptance checks.

#![allow(dead_code)]

pub mod oracle;
pub mod synth;

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use desire_core::aggregator::{
    agreement_report, cohen_kappa, krippendorff_alpha, majority_vote, merge_evidence, AnnotationMatrix,
    DEFAULT_SNAP_COVERAGE,
};
use desire_core::classifier::{gradient_descent, LogisticLoss, ModelKind, TrainConfig};
use desire_core::corpus::{
    read_gold, write_corpus, AnnotationRecord, Corpus, DesireInstance, EvidenceSpan, FulfillmentLabel,
    GoldInstance, Narrative, Tokenizer,
};
use desire_core::evaluation::{evaluate, info_gain, split_corpus, DEFAULT_SEED};
use desire_core::extractor::PatternConfig;
use desire_core::features::{featurize, featurize_all, Family, FeatureConfig, FeatureVector, Scope};
use desire_core::lexicons::LexiconSet;
use desire_core::pipeline::{extract, fit, predict_instances, run_manifest, Manifest};

use FulfillmentLabel::{Fulfilled as F, None as N, Unfulfilled as U, UnknownFromContext as K};

pub const CORPUS_ENV: &str = "DESIREDB_CORPUS";

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Pass(String),
    Fail(String),
    Skipped(String),
}

impl Outcome {
    fn check(ok: bool, detail: String) -> Self {
        if ok {
            Outcome::Pass(detail)
        } else {
            Outcome::Fail(detail)
        }
    }

    pub fn failed(&self) -> bool {
        matches!(self, Outcome::Fail(_))
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Pass(d) => write!(f, "PASS     {d}"),
            Outcome::Fail(d) => write!(f, "FAIL     {d}"),
            Outcome::Skipped(d) => write!(f, "SKIPPED  {d}"),
        }
    }
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Outcome::Fail(format!($($msg)+));
        }
    };
}

pub fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

// ---------------------------------------------------------------- planted fixture

/// One bracketed plant: narrative, sentence index and char span in the
/// sentence with the brackets removed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Plant {
    pub narrative: String,
    pub sentence: usize,
    pub start: usize,
    pub end: usize,
}

pub struct PlantedCorpus {
    pub narratives: Vec<(String, Vec<String>)>,
    pub plants: Vec<Plant>,
}

pub fn planted_corpus() -> PlantedCorpus {
    let text = std::fs::read_to_string(fixture_path("planted_narratives.txt")).unwrap();
    let mut narratives: Vec<(String, Vec<String>)> = Vec::new();
    let mut plants = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if let Some(id) = line.strip_prefix("## ") {
            narratives.push((id.to_string(), Vec::new()));
            continue;
        }
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, sentences) = narratives.last_mut().expect("sentence before first narrative");
        let mut clean = String::new();
        let mut open = None;
        for c in line.chars() {
            match c {
                '[' => open = Some(clean.chars().count()),
                ']' => plants.push(Plant {
                    narrative: id.clone(),
                    sentence: sentences.len(),
                    start: open.take().expect("unbalanced bracket"),
                    end: clean.chars().count(),
                }),
                _ => clean.push(c),
            }
        }
        sentences.push(clean);
    }
    PlantedCorpus { narratives, plants }
}

impl PlantedCorpus {
    pub fn narratives(&self) -> Vec<Narrative> {
        let tok = Tokenizer::default();
        self.narratives
            .iter()
            .map(|(id, s)| Narrative::from_text(id.as_str(), &s.join(" "), &tok))
            .collect()
    }
}

fn window_ok(inst: &DesireInstance, total: usize) -> bool {
    let d = inst.desire_sentence_index;
    let prior: Vec<usize> = inst.prior_context.iter().map(|s| s.index).collect();
    let post: Vec<usize> = inst.post_context.iter().map(|s| s.index).collect();
    prior == (d.saturating_sub(5)..d).collect::<Vec<_>>() && post == (d + 1..total.min(d + 6)).collect::<Vec<_>>()
}

pub fn c1_extraction() -> Outcome {
    let corpus = planted_corpus();
    let narratives = corpus.narratives();
    for ((id, lines), n) in corpus.narratives.iter().zip(&narratives) {
        let texts: Vec<&str> = n.sentences.iter().map(|s| s.text.as_str()).collect();
        ensure!(texts == *lines, "narrative {id}: sentences split as {texts:?}");
    }
    let started = Instant::now();
    let found = match extract(&narratives, &PatternConfig::default()) {
        Ok(f) => f,
        Err(e) => return Outcome::Fail(e.to_string()),
    };
    let elapsed = started.elapsed();
    let mut got = Vec::new();
    for inst in &found {
        let total = narratives.iter().find(|n| n.id == inst.narrative_id).unwrap().sentences.len();
        ensure!(window_ok(inst, total), "{}: wrong context window", inst.id);
        let toks = &inst.desire_sentence.tokens;
        got.push(Plant {
            narrative: inst.narrative_id.clone(),
            sentence: inst.desire_sentence_index,
            start: toks[inst.match_span.start].char_start,
            end: toks[inst.match_span.end - 1].char_end,
        });
    }
    got.sort();
    let mut want = corpus.plants.clone();
    want.sort();
    let missing: Vec<_> = want.iter().filter(|p| !got.contains(p)).collect();
    let extra: Vec<_> = got.iter().filter(|p| !want.contains(p)).collect();
    ensure!(missing.is_empty() && extra.is_empty(), "missing {missing:?}, extra {extra:?}");
    Outcome::check(
        elapsed < Duration::from_secs(1),
        format!(
            "{} of {} plants in {} narratives, {:.1} ms",
            got.len(),
            want.len(),
            narratives.len(),
            elapsed.as_secs_f64() * 1e3
        ),
    )
}

// ---------------------------------------------------------------- features

pub fn non_bow_config() -> FeatureConfig {
    FeatureConfig::with_families(Family::ALL, Scope::DesireContext)
}

pub fn c2_feature_oracle() -> Outcome {
    let lex = synth::fixture_lexicon();
    let mut gen = synth::Synth::new(2);
    let config = non_bow_config();
    for k in 0..20 {
        let inst = gen.instance(&format!("o{k}"));
        let fv = featurize(&inst, &lex, &config).unwrap();
        let got: std::collections::BTreeMap<String, f64> =
            fv.iter().map(|(n, v)| (n.to_string(), v)).collect();
        let want = oracle::features(&inst);
        if got != want {
            let keys: BTreeSet<&String> = got.keys().chain(want.keys()).collect();
            let diff: Vec<String> = keys
                .into_iter()
                .filter(|k| got.get(*k) != want.get(*k))
                .map(|k| format!("{k}: got {:?} want {:?}", got.get(k), want.get(k)))
                .collect();
            return Outcome::Fail(format!("instance {k} {:?}: {diff:?}", inst.desire_sentence.text));
        }
    }
    Outcome::Pass("20 instances, all count and boolean features equal".into())
}

// ---------------------------------------------------------------- LR

/// Random sparse rows over `dim` features with integer values in 0..=3.
pub fn random_rows(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<(usize, f64)>> {
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let mut row = Vec::new();
        for j in 0..dim {
            if rng.gen_bool(0.4) {
                row.push((j, rng.gen_range(1..=3) as f64));
            }
        }
        rows.push(row);
    }
    rows
}

pub fn random_problem(rng: &mut ChaCha8Rng, n: usize, dim: usize, lambda: f64) -> (LogisticLoss, Vec<Vec<(usize, f64)>>) {
    let rows = random_rows(rng, n, dim);
    let ys = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    (LogisticLoss::new(rows.clone(), ys, dim, lambda), rows)
}

/// Upper bound on the gradient's Lipschitz constant for the data term.
fn lipschitz(rows: &[Vec<(usize, f64)>]) -> f64 {
    let n = rows.len() as f64;
    let frob: f64 = rows
        .iter()
        .map(|r| 1.0 + r.iter().map(|(_, v)| v * v).sum::<f64>())
        .sum();
    frob / (4.0 * n)
}

pub fn c3_gradient() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let dim = 12;
    let (problem, _) = random_problem(&mut rng, 40, dim, 0.7);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let point: Vec<f64> = (0..problem.n_params()).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let g = problem.gradient(&point);
        for j in 0..point.len() {
            let mut up = point.clone();
            let mut down = point.clone();
            up[j] += h;
            down[j] -= h;
            let numeric = (problem.loss(&up) - problem.loss(&down)) / (2.0 * h);
            let denom = g[j].abs().max(numeric.abs()).max(1e-6);
            worst = worst.max((g[j] - numeric).abs() / denom);
        }
    }
    ensure!(worst < 1e-4, "max relative gradient error {worst:e}");

    let (problem, rows) = random_problem(&mut ChaCha8Rng::seed_from_u64(31), 60, dim, 1.0);
    let step = 1.0 / lipschitz(&rows);
    let mut params = vec![0.0; problem.n_params()];
    let history = match gradient_descent(&problem, &mut params, step, 500, false) {
        Ok(h) => h,
        Err(e) => return Outcome::Fail(e.to_string()),
    };
    let rises = history.windows(2).filter(|w| w[1] > w[0]).count();
    Outcome::check(
        rises == 0 && history.len() == 501,
        format!(
            "max rel err {worst:.2e} over 100 points; loss {:.4} -> {:.4} over 500 steps, {rises} increases",
            history[0],
            history[500]
        ),
    )
}

pub fn separable_set(seed: u64, n: usize) -> Vec<(DesireInstance, FulfillmentLabel)> {
    let mut gen = synth::Synth::new(seed);
    (0..n)
        .map(|i| {
            let with_but = gen.rng().gen_bool(0.5);
            let inst = gen.instance_with(&format!("b{seed}-{i}"), with_but.then_some("but"));
            let has_but = inst.desire_sentence.tokens.iter().any(|t| t.lower() == "but");
            (inst, if has_but { U } else { F })
        })
        .collect()
}

pub fn c4_separable() -> Outcome {
    let lex = synth::fixture_lexicon();
    let gold = |rows: Vec<(DesireInstance, FulfillmentLabel)>| -> Vec<GoldInstance> {
        rows.into_iter()
            .map(|(instance, label)| GoldInstance {
                instance,
                label,
                agreement_score: 3,
                evidence: Vec::new(),
                overlap_score: 0,
            })
            .collect()
    };
    let train_set = gold(separable_set(4, 400));
    let test_set = gold(separable_set(44, 100));
    let config = TrainConfig::default();
    let model = match fit(&train_set, &non_bow_config(), &config, &lex) {
        Ok(m) => m,
        Err(e) => return Outcome::Fail(e.to_string()),
    };
    let mut detail = String::new();
    for (name, set) in [("train", &train_set), ("held-out", &test_set)] {
        let instances: Vec<DesireInstance> = set.iter().map(|g| g.instance.clone()).collect();
        let preds: Vec<FulfillmentLabel> =
            predict_instances(&model, &instances, &lex).unwrap().iter().map(|p| p.label).collect();
        let gold: Vec<FulfillmentLabel> = set.iter().map(|g| g.label).collect();
        let r = evaluate(&preds, &gold).unwrap();
        ensure!(r.overall.f1 == 1.0, "{name} F1 {:.4}", r.overall.f1);
        detail += &format!("{name} F1 {:.1} ", r.overall.f1);
    }
    Outcome::Pass(format!("{detail}(ALL features, label = But-Present)"))
}

// ---------------------------------------------------------------- aggregation

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

pub fn worksheet_instance() -> DesireInstance {
    let n = Narrative::from_text(
        "w5",
        "The show was great. I wanted to see the band. It rained all night.",
        &Tokenizer::default(),
    );
    let patterns = desire_core::extractor::generate_patterns(&PatternConfig::default()).unwrap();
    desire_core::extractor::match_desires(&n, &patterns).remove(0)
}

fn record(annotator: &str, label: FulfillmentLabel, spans: &[&str]) -> AnnotationRecord {
    AnnotationRecord {
        instance_id: "w5".into(),
        annotator_id: annotator.into(),
        label,
        evidence_spans: spans.iter().map(|s| s.parse::<EvidenceSpan>().unwrap()).collect(),
        subject_marked: None,
        hypothetical: false,
    }
}

fn labels(s: &str) -> Vec<Option<FulfillmentLabel>> {
    s.chars()
        .map(|c| match c {
            'F' => Some(F),
            'U' => Some(U),
            'K' => Some(K),
            '-' => None,
            _ => panic!("bad label {c}"),
        })
        .collect()
}

pub fn c5_aggregation() -> Outcome {
    let tol = 1e-6;
    // W1
    let w1: Vec<_> = ["FFF", "FUF", "UUK", "KF-"].iter().map(|s| labels(s)).collect();
    let a = krippendorff_alpha(&w1).unwrap();
    ensure!(close(a, 1.0 / 6.0, tol), "W1 alpha {a}");
    // W2
    let k = cohen_kappa(&[F, F, F, F], &[F, F, U, U]).unwrap();
    ensure!(close(k, 0.0, tol), "W2a kappa {k}");
    let k = cohen_kappa(&[F, F, U, U, K, F], &[F, U, U, U, K, F]).unwrap();
    ensure!(close(k, 17.0 / 23.0, tol), "W2b kappa {k}");
    // W3
    let m = AnnotationMatrix::from_rows(["FFF", "UFU", "FUK"].iter().map(|s| labels(s)).collect());
    let r = agreement_report(&m).unwrap();
    ensure!(close(r.total_agreement_rate, 1.0 / 3.0, tol), "W3 total agreement {}", r.total_agreement_rate);
    ensure!(close(r.two_one_rate, 1.0 / 3.0, tol), "W3 2-1 rate {}", r.two_one_rate);
    ensure!(close(r.per_label_total_agreement["Fulfilled"], 1.0, tol), "W3 per-label F");
    ensure!(close(r.per_label_total_agreement["Unfulfilled"], 0.0, tol), "W3 per-label U");
    ensure!(close(r.krippendorff_alpha_pairwise, 3.0 / 23.0, tol), "W3 alpha {}", r.krippendorff_alpha_pairwise);
    ensure!(close(r.mean_kappa_vs_majority, 2.0 / 3.0, tol), "W3 kappa {}", r.mean_kappa_vs_majority);
    // W5
    ensure!(majority_vote(&[F, F, U]).unwrap() == (F, 2), "W5a majority");
    ensure!(majority_vote(&[F, U, K]).unwrap() == (N, 0), "W5b majority");
    let inst = worksheet_instance();
    let merge = |recs: &[AnnotationRecord]| merge_evidence(&inst, recs, DEFAULT_SNAP_COVERAGE).unwrap();
    let a = merge(&[
        record("a1", F, &["-1:4-8"]),
        record("a2", F, &["-1:6-12"]),
        record("a3", U, &["+1:0-2"]),
    ]);
    ensure!(a.overlap_score == 1 && a.texts == ["show was", "It"], "W5a merge {a:?}");
    let c = merge(&[
        record("a1", F, &["+1:0-5"]),
        record("a2", F, &["+1:4-10"]),
        record("a3", F, &["+1:9-13"]),
    ]);
    ensure!(c.overlap_score == 2 && c.texts == ["It rained all"], "W5c merge {c:?}");
    let d = merge(&[
        record("a1", F, &["+1:3-9"]),
        record("a2", F, &["+1:3-9"]),
        record("a3", F, &["+1:3-9"]),
    ]);
    ensure!(d.overlap_score == 3 && d.texts == ["rained"], "W5d merge {d:?}");
    let e = merge(&[record("a1", F, &["+1:0-15"]), record("a2", F, &["+1:16-19"])]);
    ensure!(e.overlap_score == 1 && e.texts == ["It rained all night."], "W5e merge {e:?}");

    // Uniform random labels carry no agreement.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let choices = [F, U, K];
    let units: Vec<Vec<Option<FulfillmentLabel>>> = (0..1000)
        .map(|_| (0..3).map(|_| Some(choices[rng.gen_range(0..3)])).collect())
        .collect();
    let random_alpha = krippendorff_alpha(&units).unwrap();
    Outcome::check(
        random_alpha > -0.1 && random_alpha < 0.1,
        format!("worksheets W1, W2, W3, W5 match; alpha on 1000 random units {random_alpha:.4}"),
    )
}

// ---------------------------------------------------------------- InfoGain

pub fn worksheet_w4() -> Vec<(FeatureVector, FulfillmentLabel)> {
    let labels = [F, F, F, U, F, U, U, U];
    let f1 = [2.0, 1.0, 3.0, 1.0, 0.0, 0.0, 0.0, 0.0];
    let f2 = [1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0];
    let f3 = [1.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0];
    (0..8)
        .map(|i| {
            let text = format!("f1:{} f2:{} f3:{} f4:5", f1[i], f2[i], f3[i]);
            (FeatureVector::parse_sparse(&text).unwrap(), labels[i])
        })
        .collect()
}

pub fn c6_info_gain() -> Outcome {
    let ranking = info_gain(&worksheet_w4());
    let names: Vec<&str> = ranking.top(4).collect();
    ensure!(names == ["f3", "f2", "f1", "f4"], "ranking {names:?}");
    let want = [
        ("f3", 1.0),
        ("f2", 2.0 - 0.625 * 5f64.log2()),
        ("f1", 0.75 * 3f64.log2() - 1.0),
        ("f4", 0.0),
    ];
    for ((name, ig), (wname, wig)) in ranking.entries.iter().zip(want) {
        ensure!(name == wname && close(*ig, wig, 1e-9), "{name}: {ig} vs {wig}");
    }
    Outcome::Pass("constant 0, label-identical = H(label) = 1, 8-row worksheet to 1e-9".into())
}

// ---------------------------------------------------------------- determinism

pub fn write_synthetic_gold(dir: &Path, n: usize) -> PathBuf {
    let gold = synth::Synth::new(7).gold_corpus(n);
    let path = dir.join("gold.jsonl");
    write_corpus(&Corpus::Gold(gold), &path).unwrap();
    path
}

pub fn c7_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    write_synthetic_gold(dir.path(), 300);
    let manifest_text = |out: &str| {
        format!(
            "seed = 13\noutput_dir = \"{out}\"\ngold = \"gold.jsonl\"\nfeatures = \"ALL\"\n\
             ablation = [\"ALL\", \"Discourse\", \"ALL,-But-Present\"]\n"
        )
    };
    let mut outputs = Vec::new();
    for run in ["run1", "run2"] {
        let path = dir.path().join(format!("{run}.toml"));
        std::fs::write(&path, manifest_text(run)).unwrap();
        let manifest = Manifest::load(&path).unwrap();
        if let Err(e) = run_manifest(&manifest) {
            return Outcome::Fail(format!("{run}: {e}"));
        }
        outputs.push(dir.path().join(run));
    }
    for file in ["model.json", "evaluation.tsv", "ablation.tsv", "ranking.tsv", "test.jsonl"] {
        let a = std::fs::read(outputs[0].join(file)).unwrap();
        let b = std::fs::read(outputs[1].join(file)).unwrap();
        ensure!(a == b, "{file} differs between runs");
    }
    Outcome::Pass("model.json, evaluation.tsv, ablation.tsv, ranking.tsv byte-identical".into())
}

// ---------------------------------------------------------------- DesireDB

pub struct DesireDb {
    pub gold: Vec<GoldInstance>,
    pub annotations: Option<Vec<AnnotationRecord>>,
}

/// `DESIREDB_CORPUS` names a gold JSONL file, or a directory holding
/// `gold.jsonl` and optionally `annotations.tsv`.
pub fn load_desiredb() -> Option<Result<DesireDb, String>> {
    let root = PathBuf::from(std::env::var_os(CORPUS_ENV)?);
    let (gold_path, ann_path) = if root.is_dir() {
        (root.join("gold.jsonl"), Some(root.join("annotations.tsv")))
    } else {
        (root, None)
    };
    Some((|| {
        let gold = read_gold(&gold_path).map_err(|e| e.to_string())?;
        let annotations = match ann_path.filter(|p| p.exists()) {
            Some(p) => Some(desire_core::aggregator::read_annotations(&p).map_err(|e| e.to_string())?),
            None => None,
        };
        Ok(DesireDb { gold, annotations })
    })())
}

fn skipped() -> Outcome {
    Outcome::Skipped(format!("{CORPUS_ENV} not set"))
}

pub fn c8_distribution(db: Option<&Result<DesireDb, String>>) -> Outcome {
    let db = match db {
        None => return skipped(),
        Some(Err(e)) => return Outcome::Fail(e.clone()),
        Some(Ok(db)) => db,
    };
    let n = db.gold.len();
    let share = |l: FulfillmentLabel| {
        let c = db.gold.iter().filter(|g| g.label == l).count();
        (100.0 * c as f64 / n as f64).round() as i64
    };
    let got = [share(F), share(U), share(K), share(N)];
    Outcome::check(
        n == 3680 && got == [53, 31, 14, 2],
        format!("{n} instances; Ful/Unf/Unk/None % = {got:?} (expected 3680, [53, 31, 14, 2])"),
    )
}

pub fn c9_agreement(db: Option<&Result<DesireDb, String>>) -> Outcome {
    let db = match db {
        None => return skipped(),
        Some(Err(e)) => return Outcome::Fail(e.clone()),
        Some(Ok(db)) => db,
    };
    let Some(records) = &db.annotations else {
        return Outcome::Skipped("corpus has no annotations.tsv".into());
    };
    let r = match agreement_report(&AnnotationMatrix::from_records(records)) {
        Ok(r) => r,
        Err(e) => return Outcome::Fail(e.to_string()),
    };
    let per = |k: &str| r.per_label_total_agreement.get(k).copied().unwrap_or(f64::NAN);
    let ok = close(r.total_agreement_rate, 0.66, 0.02)
        && close(per("Fulfilled"), 0.75, 0.03)
        && close(per("Unfulfilled"), 0.67, 0.03)
        && close(per("Unknown"), 0.41, 0.03);
    Outcome::check(
        ok,
        format!(
            "total {:.3}; Ful {:.3} Unf {:.3} Unk {:.3}",
            r.total_agreement_rate,
            per("Fulfilled"),
            per("Unfulfilled"),
            per("Unknown")
        ),
    )
}

/// Instances whose expression is one of the five classic phrasings:
/// wanted/hoped/wished/decided to, and couldn't wait to.
pub fn simple_subset(gold: &[GoldInstance]) -> Vec<GoldInstance> {
    const KEEP: [&str; 5] = [
        "want:simple-past",
        "hope:simple-past",
        "wish:simple-past",
        "decide:simple-past",
        "wait:modal-negative",
    ];
    gold.iter()
        .filter(|g| KEEP.contains(&g.instance.pattern_id.as_str()))
        .cloned()
        .collect()
}

pub fn c10_classification(db: Option<&Result<DesireDb, String>>) -> Outcome {
    let db = match db {
        None => return skipped(),
        Some(Err(e)) => return Outcome::Fail(e.clone()),
        Some(Ok(db)) => db,
    };
    let started = Instant::now();
    let lex = LexiconSet::bundled();
    let subset = simple_subset(&db.gold);
    let split = match split_corpus(&subset, [0.714, 0.141, 0.145], DEFAULT_SEED) {
        Ok(s) => s,
        Err(e) => return Outcome::Fail(e.to_string()),
    };
    let config = TrainConfig {
        kind: ModelKind::Lr,
        ..TrainConfig::default()
    };
    let score = |sel: &str| -> Result<desire_core::evaluation::EvalResult, String> {
        let features = FeatureConfig::parse_selection(sel, Scope::DesireContext).map_err(|e| e.to_string())?;
        let model = fit(&split.train, &features, &config, &lex).map_err(|e| e.to_string())?;
        let instances: Vec<DesireInstance> = split.test.iter().map(|g| g.instance.clone()).collect();
        let preds: Vec<FulfillmentLabel> = predict_instances(&model, &instances, &lex)
            .map_err(|e| e.to_string())?
            .iter()
            .map(|p| p.label)
            .collect();
        let gold: Vec<FulfillmentLabel> = split.test.iter().map(|g| g.label).collect();
        evaluate(&preds, &gold).map_err(|e| e.to_string())
    };
    let (disc, all) = match (score("Discourse"), score("ALL")) {
        (Ok(d), Ok(a)) => (d, a),
        (Err(e), _) | (_, Err(e)) => return Outcome::Fail(e),
    };
    let elapsed = started.elapsed();
    let ok = close(disc.overall.f1, 0.66, 0.05)
        && close(disc.fulfilled.f1, 0.80, 0.05)
        && close(all.overall.f1, 0.66, 0.05)
        && elapsed < Duration::from_secs(600);
    Outcome::check(
        ok,
        format!(
            "split {}/{}/{}; Discourse F1 {:.3} (Ful {:.3}); ALL F1 {:.3}; {:.1}s",
            split.train.len(),
            split.dev.len(),
            split.test.len(),
            disc.overall.f1,
            disc.fulfilled.f1,
            all.overall.f1,
            elapsed.as_secs_f64()
        ),
    )
}

pub fn c11_ranking(db: Option<&Result<DesireDb, String>>) -> Outcome {
    let db = match db {
        None => return skipped(),
        Some(Err(e)) => return Outcome::Fail(e.clone()),
        Some(Ok(db)) => db,
    };
    let lex = LexiconSet::bundled();
    let binary: Vec<&GoldInstance> = db.gold.iter().filter(|g| g.label.is_binary()).collect();
    let instances: Vec<DesireInstance> = binary.iter().map(|g| g.instance.clone()).collect();
    let vectors = match featurize_all(&instances, &lex, &non_bow_config()) {
        Ok(v) => v,
        Err(e) => return Outcome::Fail(e.to_string()),
    };
    let data: Vec<_> = vectors.into_iter().zip(binary.iter().map(|g| g.label)).collect();
    let ranking = info_gain(&data);
    let top: Vec<&str> = ranking.top(5).collect();
    Outcome::check(top.contains(&"discourse:But-Present"), format!("top 5: {top:?}"))
}
