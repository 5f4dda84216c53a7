//! Lexical resources: connotation and sentiment polarities, WordNet-style
//! synonym/antonym relations, and the two discourse-marker classes.
//!
//! File formats (UTF-8, `#` starts a comment line):
//!
//! | file                    | line format                                   |
//! |-------------------------|-----------------------------------------------|
//! | `connotation.tsv`       | `lemma<TAB>polarity`                          |
//! | `sentiment.tsv`         | `lemma<TAB>polarity`                          |
//! | `relations.tsv`         | `lemma<TAB>syn\|ant<TAB>lemma`                |
//! | `meeting_markers.txt`   | one marker per line, may be multi-word        |
//! | `violating_markers.txt` | one marker per line, may be multi-word        |
//! | `sentiment_scores.tsv`  | `narrative_id<TAB>sentence_index<TAB>polarity` (optional) |

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Sentence, Token};
use crate::{Error, Result};

pub const CONNOTATION_FILE: &str = "connotation.tsv";
pub const SENTIMENT_FILE: &str = "sentiment.tsv";
pub const RELATIONS_FILE: &str = "relations.tsv";
pub const MEETING_FILE: &str = "meeting_markers.txt";
pub const VIOLATING_FILE: &str = "violating_markers.txt";
pub const PRESCORED_FILE: &str = "sentiment_scores.tsv";

const DEFAULT_CONNOTATION: &str = include_str!("../resources/lexicons/connotation.tsv");
const DEFAULT_SENTIMENT: &str = include_str!("../resources/lexicons/sentiment.tsv");
const DEFAULT_RELATIONS: &str = include_str!("../resources/lexicons/relations.tsv");
const DEFAULT_MEETING: &str = include_str!("../resources/lexicons/meeting_markers.txt");
const DEFAULT_VIOLATING: &str = include_str!("../resources/lexicons/violating_markers.txt");

/// Tokens that flip the polarity of a sentiment word up to three tokens later.
pub const NEGATIONS: &[&str] = &["not", "n't", "never", "no"];
pub const NEGATION_WINDOW: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Polarity {
    Positive,
    Negative,
    #[default]
    Neutral,
}

impl Polarity {
    pub fn flipped(self) -> Self {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
            Polarity::Neutral => Polarity::Neutral,
        }
    }

    pub fn is_neutral(self) -> bool {
        self == Polarity::Neutral
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
            Polarity::Neutral => "neutral",
        })
    }
}

impl FromStr for Polarity {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "positive" | "pos" | "+" | "+1" | "1" => Ok(Polarity::Positive),
            "negative" | "neg" | "-" | "-1" => Ok(Polarity::Negative),
            "neutral" | "neu" | "0" => Ok(Polarity::Neutral),
            other => Err(format!("unknown polarity {other:?}")),
        }
    }
}

/// Multi-word markers stored as lowercase token sequences.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MarkerSet {
    markers: BTreeSet<Vec<String>>,
}

impl MarkerSet {
    pub fn new<I, S>(markers: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            markers: markers
                .into_iter()
                .map(|m| split_marker(m.as_ref()))
                .filter(|m| !m.is_empty())
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.markers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.markers.is_empty()
    }

    pub fn contains(&self, marker: &str) -> bool {
        self.markers.contains(&split_marker(marker))
    }

    pub fn iter(&self) -> impl Iterator<Item = String> + '_ {
        self.markers.iter().map(|m| m.join(" "))
    }

    fn sequences(&self) -> impl Iterator<Item = &Vec<String>> {
        self.markers.iter()
    }
}

fn split_marker(m: &str) -> Vec<String> {
    m.split_whitespace().map(|w| w.to_lowercase()).collect()
}

/// Marker occurrences in one sentence.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MarkerCounts {
    pub meeting: usize,
    pub violating: usize,
}

/// Immutable bundle of every lexical resource the features use. Lookups are
/// case-insensitive and total: unknown words are `Neutral` or have no
/// relations.
#[derive(Debug, Clone, Default)]
pub struct LexiconSet {
    pub connotation: HashMap<String, Polarity>,
    pub synonyms: HashMap<String, BTreeSet<String>>,
    pub antonyms: HashMap<String, BTreeSet<String>>,
    pub meeting_markers: MarkerSet,
    pub violating_markers: MarkerSet,
    pub sentiment: HashMap<String, Polarity>,
    /// Sentence polarities from an external scorer, keyed by
    /// (narrative id, sentence index). Overrides the built-in scorer.
    pub prescored: HashMap<(String, usize), Polarity>,
}

/// Explicit file locations; `None` falls back to the bundled resource.
#[derive(Debug, Clone, Default)]
pub struct LexiconPaths {
    pub connotation: Option<PathBuf>,
    pub sentiment: Option<PathBuf>,
    pub relations: Option<PathBuf>,
    pub meeting_markers: Option<PathBuf>,
    pub violating_markers: Option<PathBuf>,
    pub prescored_sentiment: Option<PathBuf>,
}

impl LexiconPaths {
    /// Standard file names inside `dir`; files that do not exist are left
    /// to the bundled defaults.
    pub fn from_dir(dir: &Path) -> Self {
        let pick = |name: &str| {
            let p = dir.join(name);
            p.exists().then_some(p)
        };
        Self {
            connotation: pick(CONNOTATION_FILE),
            sentiment: pick(SENTIMENT_FILE),
            relations: pick(RELATIONS_FILE),
            meeting_markers: pick(MEETING_FILE),
            violating_markers: pick(VIOLATING_FILE),
            prescored_sentiment: pick(PRESCORED_FILE),
        }
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

fn lex_err(resource: &str, line: usize, message: impl fmt::Display) -> Error {
    Error::Lexicon {
        resource: resource.to_string(),
        message: format!("line {line}: {message}"),
    }
}

fn parse_polarities(resource: &str, text: &str) -> Result<HashMap<String, Polarity>> {
    let mut out = HashMap::new();
    for (n, line) in content_lines(text) {
        let (lemma, pol) = line
            .split_once('\t')
            .ok_or_else(|| lex_err(resource, n, "expected `lemma<TAB>polarity`"))?;
        let pol: Polarity = pol.parse().map_err(|e| lex_err(resource, n, e))?;
        out.insert(lemma.trim().to_lowercase(), pol);
    }
    Ok(out)
}

type Relations = (
    HashMap<String, BTreeSet<String>>,
    HashMap<String, BTreeSet<String>>,
);

fn parse_relations(resource: &str, text: &str) -> Result<Relations> {
    let mut syn: HashMap<String, BTreeSet<String>> = HashMap::new();
    let mut ant: HashMap<String, BTreeSet<String>> = HashMap::new();
    for (n, line) in content_lines(text) {
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(lex_err(resource, n, "expected `lemma<TAB>syn|ant<TAB>lemma`"));
        }
        let (a, b) = (fields[0].to_lowercase(), fields[2].to_lowercase());
        let map = match fields[1] {
            "syn" => &mut syn,
            "ant" => &mut ant,
            other => return Err(lex_err(resource, n, format!("unknown relation {other:?}"))),
        };
        if a == b {
            continue;
        }
        // WordNet relations are symmetric; the flat file may list one side.
        map.entry(a.clone()).or_default().insert(b.clone());
        map.entry(b).or_default().insert(a);
    }
    Ok((syn, ant))
}

fn parse_markers(text: &str) -> MarkerSet {
    MarkerSet::new(content_lines(text).map(|(_, l)| l.trim()))
}

fn parse_prescored(resource: &str, text: &str) -> Result<HashMap<(String, usize), Polarity>> {
    let mut out = HashMap::new();
    for (n, line) in content_lines(text) {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(lex_err(
                resource,
                n,
                "expected `narrative_id<TAB>sentence_index<TAB>polarity`",
            ));
        }
        let idx: usize = fields[1]
            .trim()
            .parse()
            .map_err(|_| lex_err(resource, n, "bad sentence index"))?;
        let pol: Polarity = fields[2].parse().map_err(|e| lex_err(resource, n, e))?;
        out.insert((fields[0].trim().to_string(), idx), pol);
    }
    Ok(out)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

impl LexiconSet {
    /// The bundled default resources.
    pub fn bundled() -> Self {
        Self::load(&LexiconPaths::default()).expect("bundled lexicons are valid")
    }

    pub fn load(paths: &LexiconPaths) -> Result<Self> {
        let text = |p: &Option<PathBuf>, fallback: &'static str| -> Result<(String, String)> {
            match p {
                Some(p) => Ok((p.display().to_string(), read(p)?)),
                None => Ok(("<bundled>".to_string(), fallback.to_string())),
            }
        };
        let (name, conn) = text(&paths.connotation, DEFAULT_CONNOTATION)?;
        let connotation = parse_polarities(&format!("{name} (connotation)"), &conn)?;
        let (name, sent) = text(&paths.sentiment, DEFAULT_SENTIMENT)?;
        let sentiment = parse_polarities(&format!("{name} (sentiment)"), &sent)?;
        let (name, rel) = text(&paths.relations, DEFAULT_RELATIONS)?;
        let (synonyms, antonyms) = parse_relations(&format!("{name} (relations)"), &rel)?;
        let (_, meet) = text(&paths.meeting_markers, DEFAULT_MEETING)?;
        let (_, viol) = text(&paths.violating_markers, DEFAULT_VIOLATING)?;
        let prescored = match &paths.prescored_sentiment {
            Some(p) => parse_prescored(&p.display().to_string(), &read(p)?)?,
            None => HashMap::new(),
        };
        let lex = LexiconSet {
            connotation,
            synonyms,
            antonyms,
            meeting_markers: parse_markers(&meet),
            violating_markers: parse_markers(&viol),
            sentiment,
            prescored,
        };
        lex.validate()?;
        Ok(lex)
    }

    pub fn load_dir(dir: &Path) -> Result<Self> {
        if !dir.is_dir() {
            return Err(Error::Lexicon {
                resource: dir.display().to_string(),
                message: "not a directory".into(),
            });
        }
        Self::load(&LexiconPaths::from_dir(dir))
    }

    pub fn validate(&self) -> Result<()> {
        let err = |resource: &str, message: String| {
            Err(Error::Lexicon {
                resource: resource.to_string(),
                message,
            })
        };
        let shared: Vec<String> = self
            .meeting_markers
            .sequences()
            .filter(|m| self.violating_markers.markers.contains(*m))
            .map(|m| m.join(" "))
            .collect();
        if !shared.is_empty() {
            return err("markers", format!("listed as both meeting and violating: {shared:?}"));
        }
        if !self.meeting_markers.contains("so") {
            return err("markers", "`so` must be a meeting marker".into());
        }
        if !self.violating_markers.contains("but") {
            return err("markers", "`but` must be a violating marker".into());
        }
        for (lemma, syns) in &self.synonyms {
            if let Some(ants) = self.antonyms.get(lemma) {
                if let Some(both) = syns.intersection(ants).next() {
                    return err(
                        "relations",
                        format!("{both:?} is both synonym and antonym of {lemma:?}"),
                    );
                }
            }
        }
        Ok(())
    }

    pub fn connotation_of(&self, word: &str) -> Polarity {
        self.connotation
            .get(&word.to_lowercase())
            .copied()
            .unwrap_or_default()
    }

    pub fn sentiment_of(&self, word: &str) -> Polarity {
        self.sentiment
            .get(&word.to_lowercase())
            .copied()
            .unwrap_or_default()
    }

    /// Connotation of a token: its lemma first, then its lowercased surface.
    pub fn token_connotation(&self, token: &Token) -> Polarity {
        lookup_token(&self.connotation, token)
    }

    pub fn token_sentiment(&self, token: &Token) -> Polarity {
        lookup_token(&self.sentiment, token)
    }

    pub fn synonyms_of(&self, lemma: &str) -> Option<&BTreeSet<String>> {
        self.synonyms.get(&lemma.to_lowercase())
    }

    pub fn antonyms_of(&self, lemma: &str) -> Option<&BTreeSet<String>> {
        self.antonyms.get(&lemma.to_lowercase())
    }

    /// Counts marker occurrences, scanning leftmost-longest over both
    /// classes together so `even though` is not also counted as `though`.
    pub fn count_markers(&self, sentence: &Sentence) -> MarkerCounts {
        let lower: Vec<String> = sentence.tokens.iter().map(Token::lower).collect();
        let mut counts = MarkerCounts::default();
        let mut i = 0;
        while i < lower.len() {
            let mut best: Option<(usize, bool)> = None;
            for (markers, meeting) in [(&self.meeting_markers, true), (&self.violating_markers, false)] {
                for m in markers.sequences() {
                    let fits = i + m.len() <= lower.len()
                        && m.iter().zip(&lower[i..]).all(|(a, b)| a == b);
                    if fits && best.map_or(true, |(len, _)| m.len() > len) {
                        best = Some((m.len(), meeting));
                    }
                }
            }
            match best {
                Some((len, meeting)) => {
                    if meeting {
                        counts.meeting += 1;
                    } else {
                        counts.violating += 1;
                    }
                    i += len;
                }
                None => i += 1,
            }
        }
        counts
    }
}

fn lookup_token(map: &HashMap<String, Polarity>, token: &Token) -> Polarity {
    map.get(&token.lemma)
        .or_else(|| map.get(&token.lower()))
        .copied()
        .unwrap_or_default()
}

/// Lexicon vote: more positive than negative hits gives `Positive`, and vice
/// versa; ties and no hits give `Neutral`. A negation among the three tokens
/// before a hit flips it.
pub fn sentence_sentiment(sentence: &Sentence, lex: &LexiconSet) -> Polarity {
    let lower: Vec<String> = sentence.tokens.iter().map(Token::lower).collect();
    let (mut pos, mut neg) = (0usize, 0usize);
    for (i, tok) in sentence.tokens.iter().enumerate() {
        let mut pol = lex.token_sentiment(tok);
        if pol.is_neutral() {
            continue;
        }
        let window = &lower[i.saturating_sub(NEGATION_WINDOW)..i];
        if window.iter().any(|w| NEGATIONS.contains(&w.as_str())) {
            pol = pol.flipped();
        }
        match pol {
            Polarity::Positive => pos += 1,
            Polarity::Negative => neg += 1,
            Polarity::Neutral => {}
        }
    }
    match pos.cmp(&neg) {
        std::cmp::Ordering::Greater => Polarity::Positive,
        std::cmp::Ordering::Less => Polarity::Negative,
        std::cmp::Ordering::Equal => Polarity::Neutral,
    }
}

/// Sentence-level sentiment used by the sentiment-flow features.
pub trait SentimentScorer: Send + Sync {
    fn score(&self, narrative_id: &str, sentence: &Sentence) -> Polarity;
}

impl SentimentScorer for LexiconSet {
    fn score(&self, narrative_id: &str, sentence: &Sentence) -> Polarity {
        self.prescored
            .get(&(narrative_id.to_string(), sentence.index))
            .copied()
            .unwrap_or_else(|| sentence_sentiment(sentence, self))
    }
}
