//! Narratives, desire instances, annotations and gold instances.

mod io;
pub mod lemma;
pub mod tokenize;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use io::{
    read_corpus, read_corpus_with, read_gold, read_instances, read_narratives, write_corpus, Corpus,
    CorpusFormat,
};
pub use tokenize::{tokenize, Tokenizer};

/// Maximum number of sentences kept on each side of a desire sentence.
pub const CONTEXT_WINDOW: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    /// Always lowercase.
    pub lemma: String,
    pub is_content_word: bool,
    /// Char (not byte) offsets into the sentence text.
    pub char_start: usize,
    pub char_end: usize,
}

impl Token {
    pub fn lower(&self) -> String {
        lemma::normalize_apostrophes(&self.surface.to_lowercase())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub index: usize,
    pub text: String,
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn char_len(&self) -> usize {
        self.text.chars().count()
    }

    /// Text between two char offsets.
    pub fn slice(&self, start: usize, end: usize) -> String {
        self.text.chars().skip(start).take(end.saturating_sub(start)).collect()
    }

    /// Text covered by a token range.
    pub fn span_text(&self, span: TokenSpan) -> String {
        if span.is_empty() || span.end > self.tokens.len() {
            return String::new();
        }
        self.slice(self.tokens[span.start].char_start, self.tokens[span.end - 1].char_end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Narrative {
    pub id: String,
    pub sentences: Vec<Sentence>,
    pub source: Option<String>,
}

impl Narrative {
    pub fn from_text(id: impl Into<String>, text: &str, tokenizer: &Tokenizer) -> Self {
        Self {
            id: id.into(),
            sentences: tokenizer.tokenize(text),
            source: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, s) in self.sentences.iter().enumerate() {
            if s.index != i {
                return Err(Error::Invariant(format!(
                    "narrative {}: sentence {} carries index {}",
                    self.id, i, s.index
                )));
            }
        }
        Ok(())
    }
}

/// Half-open token index range within one sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TokenSpan {
    pub start: usize,
    pub end: usize,
}

impl TokenSpan {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, i: usize) -> bool {
        self.start <= i && i < self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesireInstance {
    pub id: String,
    pub narrative_id: String,
    pub desire_sentence_index: usize,
    pub desire_sentence: Sentence,
    pub pattern_id: String,
    pub verb_lemma: String,
    pub match_span: TokenSpan,
    pub subject_span: Option<TokenSpan>,
    pub focal_word_indices: Vec<usize>,
    /// Last element is the sentence right before the desire sentence.
    pub prior_context: Vec<Sentence>,
    /// First element is the sentence right after the desire sentence.
    pub post_context: Vec<Sentence>,
    pub is_hypothetical: Option<bool>,
}

impl DesireInstance {
    pub fn subject<'a>(&'a self) -> Option<&'a Token> {
        let span = self.subject_span?;
        self.desire_sentence.tokens.get(span.end.checked_sub(1)?)
    }

    pub fn is_first_person(&self) -> bool {
        self.subject()
            .map(|t| is_first_person_pronoun(&t.lower()))
            .unwrap_or(false)
    }

    pub fn focal_tokens(&self) -> impl Iterator<Item = &Token> {
        self.focal_word_indices
            .iter()
            .filter_map(|&i| self.desire_sentence.tokens.get(i))
    }

    /// Context sentences paired with their signed offset from the desire
    /// sentence: prior sentences get -k..=-1, post sentences +1..=+k.
    pub fn context(&self) -> impl Iterator<Item = (i32, &Sentence)> {
        let n = self.prior_context.len() as i32;
        let prior = self
            .prior_context
            .iter()
            .enumerate()
            .map(move |(k, s)| (k as i32 - n, s));
        let post = self
            .post_context
            .iter()
            .enumerate()
            .map(|(k, s)| (k as i32 + 1, s));
        prior.chain(post)
    }

    /// Sentence at a signed offset (0 is the desire sentence).
    pub fn sentence_at(&self, offset: i32) -> Option<&Sentence> {
        match offset {
            0 => Some(&self.desire_sentence),
            o if o < 0 => {
                let back = (-o) as usize;
                self.prior_context
                    .len()
                    .checked_sub(back)
                    .and_then(|i| self.prior_context.get(i))
            }
            o => self.post_context.get(o as usize - 1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Invariant(format!("instance {}: {msg}", self.id)));
        if self.prior_context.len() > CONTEXT_WINDOW {
            return bad(format!("prior context has {} sentences", self.prior_context.len()));
        }
        if self.post_context.len() > CONTEXT_WINDOW {
            return bad(format!("post context has {} sentences", self.post_context.len()));
        }
        if self.desire_sentence.index != self.desire_sentence_index {
            return bad("desire sentence index mismatch".into());
        }
        let d = self.desire_sentence_index;
        let n = self.prior_context.len();
        if n > d {
            return bad("prior context reaches before the narrative start".into());
        }
        for (k, s) in self.prior_context.iter().enumerate() {
            if s.index != d - n + k {
                return bad(format!("prior sentence {k} has index {}", s.index));
            }
        }
        for (k, s) in self.post_context.iter().enumerate() {
            if s.index != d + 1 + k {
                return bad(format!("post sentence {k} has index {}", s.index));
            }
        }
        let len = self.desire_sentence.tokens.len();
        if self.match_span.is_empty() || self.match_span.end > len {
            return bad("match span outside the desire sentence".into());
        }
        if let Some(span) = self.subject_span {
            if span.is_empty() || span.end > self.match_span.start {
                return bad("subject span must precede the match".into());
            }
        }
        for &i in &self.focal_word_indices {
            if i < self.match_span.end || i >= len {
                return bad(format!("focal word index {i} not after the match"));
            }
        }
        Ok(())
    }
}

pub fn is_first_person_pronoun(lower: &str) -> bool {
    matches!(lower, "i" | "we")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FulfillmentLabel {
    Fulfilled,
    Unfulfilled,
    #[serde(rename = "Unknown")]
    UnknownFromContext,
    /// Produced only by aggregation when annotators fully disagree.
    None,
}

impl FulfillmentLabel {
    pub const ANNOTATOR_LABELS: [FulfillmentLabel; 3] = [
        FulfillmentLabel::Fulfilled,
        FulfillmentLabel::Unfulfilled,
        FulfillmentLabel::UnknownFromContext,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FulfillmentLabel::Fulfilled => "Fulfilled",
            FulfillmentLabel::Unfulfilled => "Unfulfilled",
            FulfillmentLabel::UnknownFromContext => "Unknown",
            FulfillmentLabel::None => "None",
        }
    }

    pub fn is_binary(self) -> bool {
        matches!(self, FulfillmentLabel::Fulfilled | FulfillmentLabel::Unfulfilled)
    }
}

impl fmt::Display for FulfillmentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FulfillmentLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "Fulfilled" => Ok(Self::Fulfilled),
            "Unfulfilled" => Ok(Self::Unfulfilled),
            "Unknown" | "Unknown from the context" => Ok(Self::UnknownFromContext),
            "None" => Ok(Self::None),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

/// Char range inside one sentence of an instance window, addressed by signed
/// offset from the desire sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EvidenceSpan {
    pub sentence: i32,
    pub start: usize,
    pub end: usize,
}

impl EvidenceSpan {
    pub fn overlaps(&self, other: &EvidenceSpan) -> bool {
        self.sentence == other.sentence && self.start < other.end && other.start < self.end
    }
}

impl fmt::Display for EvidenceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}:{}-{}", self.sentence, self.start, self.end)
    }
}

impl FromStr for EvidenceSpan {
    type Err = String;

    /// `<offset>:<start>-<end>`, e.g. `-2:0-41` or `+1:5-9`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (sentence, range) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| format!("evidence span {s:?} lacks `:`"))?;
        let (start, end) = range
            .split_once('-')
            .ok_or_else(|| format!("evidence span {s:?} lacks `-`"))?;
        let sentence: i32 = sentence
            .trim_start_matches('+')
            .parse()
            .map_err(|_| format!("bad sentence offset in {s:?}"))?;
        let start: usize = start.parse().map_err(|_| format!("bad start in {s:?}"))?;
        let end: usize = end.parse().map_err(|_| format!("bad end in {s:?}"))?;
        if start >= end {
            return Err(format!("empty evidence span {s:?}"));
        }
        Ok(Self { sentence, start, end })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub instance_id: String,
    pub annotator_id: String,
    /// Never `None`.
    pub label: FulfillmentLabel,
    pub evidence_spans: Vec<EvidenceSpan>,
    pub subject_marked: Option<TokenSpan>,
    pub hypothetical: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldInstance {
    pub instance: DesireInstance,
    pub label: FulfillmentLabel,
    pub agreement_score: u8,
    pub evidence: Vec<String>,
    pub overlap_score: u8,
}

impl GoldInstance {
    pub fn validate(&self) -> Result<()> {
        self.instance.validate()?;
        if self.agreement_score > 3 || self.overlap_score > 3 {
            return Err(Error::Invariant(format!(
                "instance {}: scores must lie in 0..=3",
                self.instance.id
            )));
        }
        if self.label == FulfillmentLabel::None && self.agreement_score != 0 {
            return Err(Error::Invariant(format!(
                "instance {}: None label with agreement score {}",
                self.instance.id, self.agreement_score
            )));
        }
        if self.label != FulfillmentLabel::None && self.agreement_score < 2 {
            return Err(Error::Invariant(format!(
                "instance {}: majority label with agreement score {}",
                self.instance.id, self.agreement_score
            )));
        }
        Ok(())
    }
}
