//! Sparse feature vectors over desire instances.
//!
//! Names have the shape `family:Base` for sentence-independent features and
//! `family:Base:±i` for features computed on the context sentence at signed
//! offset `i` from the desire sentence. Desire-Verb is one-hot:
//! `desire:Desire-Verb:<lemma>`. BOW features are `bow:<lemma>`.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{DesireInstance, Sentence, Token};
use crate::extractor::default_verbs;
use crate::lexicons::{LexiconSet, Polarity, SentimentScorer};
use crate::{Error, Result};

/// Bucket for desire verbs outside the configured inventory.
pub const OTHER_VERB: &str = "OTHER";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    Desire,
    Discourse,
    Connotation,
    SentimentFlow,
    #[serde(rename = "BOW")]
    Bow,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::Desire,
        Family::Discourse,
        Family::Connotation,
        Family::SentimentFlow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Desire => "Desire",
            Family::Discourse => "Discourse",
            Family::Connotation => "Connotation",
            Family::SentimentFlow => "SentimentFlow",
            Family::Bow => "BOW",
        }
    }

    /// Prefix used in feature names.
    pub fn prefix(self) -> &'static str {
        match self {
            Family::Desire => "desire",
            Family::Discourse => "discourse",
            Family::Connotation => "connotation",
            Family::SentimentFlow => "sentiment",
            Family::Bow => "bow",
        }
    }

    /// Base names the family emits (BOW emits vocabulary words instead).
    pub fn base_names(self) -> &'static [&'static str] {
        match self {
            Family::Desire => &[
                "Desire-Verb",
                "First-Person-Subject",
                "Focal-Word-Mention",
                "Focal-Synonym-Mention",
                "Focal-Antonym-Mention",
                "Desire-Subject-Mention",
            ],
            Family::Discourse => &[
                "Violated-Expectation",
                "Meeting-Expectation",
                "So-Present",
                "But-Present",
            ],
            Family::Connotation => &["Connotation-Agree", "Connotation-Disagree"],
            Family::SentimentFlow => &["Sentiment-Agree", "Sentiment-Disagree"],
            Family::Bow => &[],
        }
    }

    pub fn of_base_name(base: &str) -> Option<Family> {
        Family::ALL
            .into_iter()
            .find(|f| f.base_names().iter().any(|b| b.eq_ignore_ascii_case(base)))
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "desire" => Ok(Family::Desire),
            "discourse" => Ok(Family::Discourse),
            "connotation" => Ok(Family::Connotation),
            "sentimentflow" | "sentiment-flow" | "sentiment" => Ok(Family::SentimentFlow),
            "bow" => Ok(Family::Bow),
            other => Err(Error::Config(format!("unknown feature family {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Scope {
    #[serde(rename = "desire")]
    Desire,
    #[serde(rename = "desire+prior")]
    DesirePrior,
    #[serde(rename = "desire+post")]
    DesirePost,
    #[default]
    #[serde(rename = "desire+context")]
    DesireContext,
}

impl Scope {
    pub const ALL: [Scope; 4] = [
        Scope::Desire,
        Scope::DesirePrior,
        Scope::DesirePost,
        Scope::DesireContext,
    ];

    pub fn includes(self, offset: i32) -> bool {
        match self {
            Scope::Desire => offset == 0,
            Scope::DesirePrior => offset <= 0,
            Scope::DesirePost => offset >= 0,
            Scope::DesireContext => true,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scope::Desire => "desire",
            Scope::DesirePrior => "desire+prior",
            Scope::DesirePost => "desire+post",
            Scope::DesireContext => "desire+context",
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Scope::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scope {s:?}")))
    }
}

/// Which features to compute.
///
/// A selection string is a comma list of family names (`ALL` meaning the
/// four non-BOW families), base feature names such as `But-Present`
/// (the feature alone), and `-Base` entries removing a base feature.
/// `ALL,-But-Present` is everything except But-Present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub families: BTreeSet<Family>,
    pub scope: Scope,
    /// When set, only these base names are kept for families that are not
    /// fully enabled (see `selection`).
    #[serde(default)]
    pub only: BTreeSet<String>,
    #[serde(default)]
    pub exclude: BTreeSet<String>,
    /// Families enabled in full; the rest contribute only `only` names.
    #[serde(default)]
    pub full: BTreeSet<Family>,
    pub desire_verbs: BTreeSet<String>,
    #[serde(default)]
    pub bow_vocab: Option<BTreeSet<String>>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self::with_families(Family::ALL, Scope::DesireContext)
    }
}

impl FeatureConfig {
    pub fn with_families<I: IntoIterator<Item = Family>>(families: I, scope: Scope) -> Self {
        let families: BTreeSet<Family> = families.into_iter().collect();
        Self {
            full: families.clone(),
            families,
            scope,
            only: BTreeSet::new(),
            exclude: BTreeSet::new(),
            desire_verbs: default_verbs().into_iter().map(|v| v.lemma).collect(),
            bow_vocab: None,
        }
    }

    pub fn parse_selection(selection: &str, scope: Scope) -> Result<Self> {
        let mut cfg = Self::with_families([], scope);
        for item in selection.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            if let Some(base) = item.strip_prefix('-') {
                let canon = canonical_base(base)?;
                cfg.exclude.insert(canon);
            } else if item.eq_ignore_ascii_case("all") {
                cfg.families.extend(Family::ALL);
                cfg.full.extend(Family::ALL);
            } else if let Ok(f) = item.parse::<Family>() {
                cfg.families.insert(f);
                cfg.full.insert(f);
            } else {
                let canon = canonical_base(item)?;
                let family = Family::of_base_name(&canon).expect("canonical base has a family");
                cfg.families.insert(family);
                cfg.only.insert(canon);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.families.is_empty() {
            return Err(Error::Config("no feature family enabled".into()));
        }
        Ok(())
    }

    pub fn is_enabled(&self, family: Family) -> bool {
        self.families.contains(&family)
    }

    /// Whether a feature with this base name should be emitted.
    pub fn keeps(&self, family: Family, base: &str) -> bool {
        if !self.families.contains(&family) || self.exclude.contains(base) {
            return false;
        }
        self.full.contains(&family) || self.only.contains(base)
    }

    /// Human-readable label for the selection, e.g. `ALL w/o But-Present`.
    pub fn label(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        let all: BTreeSet<Family> = Family::ALL.into_iter().collect();
        let mut full = self.full.clone();
        if all.is_subset(&full) {
            parts.push("ALL".into());
            full.retain(|f| !all.contains(f));
        }
        parts.extend(full.iter().map(|f| f.name().to_string()));
        parts.extend(self.only.iter().cloned());
        let mut label = parts.join("+");
        if !self.exclude.is_empty() {
            let ex: Vec<&str> = self.exclude.iter().map(String::as_str).collect();
            label.push_str(" w/o ");
            label.push_str(&ex.join(","));
        }
        label
    }
}

fn canonical_base(name: &str) -> Result<String> {
    Family::ALL
        .iter()
        .flat_map(|f| f.base_names().iter())
        .find(|b| b.eq_ignore_ascii_case(name))
        .map(|b| b.to_string())
        .ok_or_else(|| Error::Config(format!("unknown feature or family {name:?}")))
}

/// Sparse feature map. Missing entries read as 0.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub entries: BTreeMap<String, f64>,
}

impl FeatureVector {
    pub fn get(&self, name: &str) -> f64 {
        self.entries.get(name).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    fn insert(&mut self, name: String, value: f64) -> Result<()> {
        if self.entries.insert(name.clone(), value).is_some() {
            return Err(Error::Invariant(format!("feature name collision: {name}")));
        }
        Ok(())
    }

    /// `name:value` pairs separated by spaces.
    pub fn to_sparse_string(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k}:{v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn parse_sparse(text: &str) -> std::result::Result<Self, String> {
        let mut fv = FeatureVector::default();
        for pair in text.split_whitespace() {
            let (name, value) = pair
                .rsplit_once(':')
                .ok_or_else(|| format!("expected name:value, got {pair:?}"))?;
            let value: f64 = value
                .parse()
                .map_err(|_| format!("bad value in {pair:?}"))?;
            if !value.is_finite() {
                return Err(format!("non-finite value in {pair:?}"));
            }
            fv.entries.insert(name.to_string(), value);
        }
        Ok(fv)
    }
}

pub fn feature_name(family: Family, base: &str) -> String {
    format!("{}:{base}", family.prefix())
}

pub fn context_feature_name(family: Family, base: &str, offset: i32) -> String {
    format!("{}:{base}:{offset:+}", family.prefix())
}

/// Lowercase forms that count as a mention of the desire subject.
fn subject_forms(subject: &Token) -> HashSet<String> {
    const GROUPS: &[&[&str]] = &[
        &["i", "me", "my", "mine", "myself"],
        &["we", "us", "our", "ours", "ourselves"],
        &["he", "him", "his", "himself"],
        &["she", "her", "hers", "herself"],
        &["they", "them", "their", "theirs", "themselves"],
        &["you", "your", "yours", "yourself", "yourselves"],
        &["it", "its", "itself"],
    ];
    let lower = subject.lower();
    GROUPS
        .iter()
        .find(|g| g.contains(&lower.as_str()))
        .map(|g| g.iter().map(|s| s.to_string()).collect())
        .unwrap_or_else(|| HashSet::from([lower]))
}

struct Emitter<'a> {
    fv: FeatureVector,
    config: &'a FeatureConfig,
}

impl Emitter<'_> {
    fn put(&mut self, family: Family, base: &str, value: f64) -> Result<()> {
        if self.config.keeps(family, base) {
            self.fv.insert(feature_name(family, base), value)?;
        }
        Ok(())
    }

    fn put_at(&mut self, family: Family, base: &str, offset: i32, value: f64) -> Result<()> {
        if self.config.keeps(family, base) {
            self.fv.insert(context_feature_name(family, base, offset), value)?;
        }
        Ok(())
    }
}

fn scoped_context<'a>(
    inst: &'a DesireInstance,
    config: &'a FeatureConfig,
) -> impl Iterator<Item = (i32, &'a Sentence)> {
    inst.context().filter(|(i, _)| config.scope.includes(*i))
}

fn count_where(sentence: &Sentence, pred: impl Fn(&Token) -> bool) -> usize {
    sentence.tokens.iter().filter(|t| pred(t)).count()
}

fn desire_features(inst: &DesireInstance, lex: &LexiconSet, out: &mut Emitter) -> Result<()> {
    let fam = Family::Desire;
    let verb = if out.config.desire_verbs.contains(&inst.verb_lemma) {
        inst.verb_lemma.as_str()
    } else {
        OTHER_VERB
    };
    if out.config.keeps(fam, "Desire-Verb") {
        out.fv.insert(format!("desire:Desire-Verb:{verb}"), 1.0)?;
    }
    out.put(fam, "First-Person-Subject", inst.is_first_person() as u8 as f64)?;

    let focal: Vec<&str> = inst.focal_tokens().map(|t| t.lemma.as_str()).collect();
    let subject = inst.subject().map(subject_forms);
    for (i, sent) in scoped_context(inst, out.config) {
        let mut words = 0;
        let mut syns = 0;
        let mut ants = 0;
        for w in &focal {
            words += count_where(sent, |t| t.lemma == *w);
            if let Some(set) = lex.synonyms_of(w) {
                syns += count_where(sent, |t| set.contains(&t.lemma));
            }
            if let Some(set) = lex.antonyms_of(w) {
                ants += count_where(sent, |t| set.contains(&t.lemma));
            }
        }
        let mentioned = subject
            .as_ref()
            .is_some_and(|forms| sent.tokens.iter().any(|t| forms.contains(&t.lower())));
        out.put_at(fam, "Focal-Word-Mention", i, words as f64)?;
        out.put_at(fam, "Focal-Synonym-Mention", i, syns as f64)?;
        out.put_at(fam, "Focal-Antonym-Mention", i, ants as f64)?;
        out.put_at(fam, "Desire-Subject-Mention", i, mentioned as u8 as f64)?;
    }
    Ok(())
}

fn has_token(sentence: &Sentence, word: &str) -> bool {
    sentence.tokens.iter().any(|t| t.lower() == word)
}

fn discourse_features(inst: &DesireInstance, lex: &LexiconSet, out: &mut Emitter) -> Result<()> {
    let fam = Family::Discourse;
    for (i, sent) in scoped_context(inst, out.config) {
        let counts = lex.count_markers(sent);
        out.put_at(fam, "Violated-Expectation", i, counts.violating as f64)?;
        out.put_at(fam, "Meeting-Expectation", i, counts.meeting as f64)?;
    }
    out.put(fam, "So-Present", has_token(&inst.desire_sentence, "so") as u8 as f64)?;
    out.put(fam, "But-Present", has_token(&inst.desire_sentence, "but") as u8 as f64)?;
    Ok(())
}

fn connotation_features(inst: &DesireInstance, lex: &LexiconSet, out: &mut Emitter) -> Result<()> {
    let fam = Family::Connotation;
    let focal: Vec<Polarity> = inst
        .focal_tokens()
        .map(|t| lex.token_connotation(t))
        .filter(|p| !p.is_neutral())
        .collect();
    for (i, sent) in scoped_context(inst, out.config) {
        let pols: Vec<Polarity> = sent.tokens.iter().map(|t| lex.token_connotation(t)).collect();
        let (mut agree, mut disagree) = (0usize, 0usize);
        for p in &focal {
            agree += pols.iter().filter(|q| *q == p).count();
            disagree += pols.iter().filter(|q| **q == p.flipped()).count();
        }
        out.put_at(fam, "Connotation-Agree", i, agree as f64)?;
        out.put_at(fam, "Connotation-Disagree", i, disagree as f64)?;
    }
    Ok(())
}

fn sentiment_features(
    inst: &DesireInstance,
    scorer: &dyn SentimentScorer,
    out: &mut Emitter,
) -> Result<()> {
    let fam = Family::SentimentFlow;
    let desire = scorer.score(&inst.narrative_id, &inst.desire_sentence);
    for (i, sent) in scoped_context(inst, out.config) {
        let pol = scorer.score(&inst.narrative_id, sent);
        let polar = !desire.is_neutral() && !pol.is_neutral();
        out.put_at(fam, "Sentiment-Agree", i, (polar && pol == desire) as u8 as f64)?;
        out.put_at(fam, "Sentiment-Disagree", i, (polar && pol != desire) as u8 as f64)?;
    }
    Ok(())
}

fn bow_tokens<'a>(inst: &'a DesireInstance, scope: Scope) -> impl Iterator<Item = &'a Token> {
    std::iter::once(&inst.desire_sentence)
        .chain(inst.context().filter(move |(i, _)| scope.includes(*i)).map(|(_, s)| s))
        .flat_map(|s| s.tokens.iter())
        .filter(|t| t.surface.chars().any(char::is_alphanumeric))
}

fn bow_features(inst: &DesireInstance, out: &mut Emitter) -> Result<()> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for tok in bow_tokens(inst, out.config.scope) {
        if let Some(vocab) = &out.config.bow_vocab {
            if !vocab.contains(&tok.lemma) {
                continue;
            }
        }
        *counts.entry(tok.lemma.as_str()).or_default() += 1;
    }
    for (lemma, n) in counts {
        out.fv.insert(format!("bow:{lemma}"), n as f64)?;
    }
    Ok(())
}

/// Lemmas seen in the scoped text of the training instances.
pub fn build_bow_vocab(train: &[DesireInstance], scope: Scope) -> BTreeSet<String> {
    train
        .iter()
        .flat_map(|inst| bow_tokens(inst, scope))
        .map(|t| t.lemma.clone())
        .collect()
}

pub fn featurize(inst: &DesireInstance, lex: &LexiconSet, config: &FeatureConfig) -> Result<FeatureVector> {
    featurize_with(inst, lex, lex, config)
}

/// Like [`featurize`] with an explicit sentence sentiment scorer.
pub fn featurize_with(
    inst: &DesireInstance,
    lex: &LexiconSet,
    scorer: &dyn SentimentScorer,
    config: &FeatureConfig,
) -> Result<FeatureVector> {
    config.validate()?;
    let mut out = Emitter {
        fv: FeatureVector::default(),
        config,
    };
    if config.is_enabled(Family::Desire) {
        desire_features(inst, lex, &mut out)?;
    }
    if config.is_enabled(Family::Discourse) {
        discourse_features(inst, lex, &mut out)?;
    }
    if config.is_enabled(Family::Connotation) {
        connotation_features(inst, lex, &mut out)?;
    }
    if config.is_enabled(Family::SentimentFlow) {
        sentiment_features(inst, scorer, &mut out)?;
    }
    if config.is_enabled(Family::Bow) {
        bow_features(inst, &mut out)?;
    }
    Ok(out.fv)
}

/// Featurizes instances in parallel, preserving input order.
pub fn featurize_all(
    instances: &[DesireInstance],
    lex: &LexiconSet,
    config: &FeatureConfig,
) -> Result<Vec<FeatureVector>> {
    instances
        .par_iter()
        .map(|inst| featurize(inst, lex, config))
        .collect()
}

/// Writes one `instance_id<TAB>name:value ...` line per instance.
pub fn write_vectors(path: &Path, rows: &[(String, FeatureVector)]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for (id, fv) in rows {
        writeln!(w, "{id}\t{}", fv.to_sparse_string()).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_vectors(path: &Path) -> Result<Vec<(String, FeatureVector)>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path.display().to_string();
    let mut rows = Vec::new();
    for (n, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let (id, rest) = line.split_once('\t').unwrap_or((line.as_str(), ""));
        let fv = FeatureVector::parse_sparse(rest)
            .map_err(|m| Error::record(&name, n + 1, "features", m))?;
        rows.push((id.to_string(), fv));
    }
    Ok(rows)
}
