//! Desire verb inventory and its compilation into past-tense surface patterns.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::lemma::IRREGULAR_VERBS;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Template {
    /// `wanted to`
    SimplePast,
    /// `was wanting to`
    PastProgressive,
    /// `had wanted to`
    PastPerfect,
    /// `had been wanting to`
    PastPerfectProgressive,
    /// `didn't want to`
    NegatedPast,
    /// `couldn't wait to`
    ModalNegative,
}

impl Template {
    pub const ALL: [Template; 6] = [
        Template::SimplePast,
        Template::PastProgressive,
        Template::PastPerfect,
        Template::PastPerfectProgressive,
        Template::NegatedPast,
        Template::ModalNegative,
    ];

    /// Templates a verb gets unless its entry says otherwise.
    pub const REGULAR: [Template; 5] = [
        Template::SimplePast,
        Template::PastProgressive,
        Template::PastPerfect,
        Template::PastPerfectProgressive,
        Template::NegatedPast,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Template::SimplePast => "simple-past",
            Template::PastProgressive => "past-progressive",
            Template::PastPerfect => "past-perfect",
            Template::PastPerfectProgressive => "past-perfect-progressive",
            Template::NegatedPast => "negated-past",
            Template::ModalNegative => "modal-negative",
        }
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Template {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Template::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Pattern(format!("unknown template {s:?}")))
    }
}

/// One element of a pattern's token sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PatternToken {
    /// Any of the listed lowercase forms.
    Literal(Vec<String>),
    /// The inflected desire verb.
    Verb(String),
}

impl PatternToken {
    fn literal(forms: &[&str]) -> Self {
        PatternToken::Literal(forms.iter().map(|s| s.to_string()).collect())
    }

    pub fn matches(&self, lower: &str) -> bool {
        match self {
            PatternToken::Literal(forms) => forms.iter().any(|f| f == lower),
            PatternToken::Verb(form) => form == lower,
        }
    }

    fn display_form(&self) -> &str {
        match self {
            PatternToken::Literal(forms) => &forms[0],
            PatternToken::Verb(form) => form,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesirePattern {
    pub pattern_id: String,
    pub verb_lemma: String,
    pub template: Template,
    pub token_sequence: Vec<PatternToken>,
    pub requires_to: bool,
}

impl DesirePattern {
    pub fn len(&self) -> usize {
        self.token_sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.token_sequence.is_empty()
    }

    /// Whether the pattern matches `lowered` starting at `start`.
    pub fn matches_at(&self, lowered: &[String], start: usize) -> bool {
        start + self.len() <= lowered.len()
            && self
                .token_sequence
                .iter()
                .zip(&lowered[start..])
                .all(|(p, t)| p.matches(t))
    }

    /// Canonical surface form, e.g. `didn't want to`.
    pub fn surface(&self) -> String {
        let mut out = String::new();
        for tok in &self.token_sequence {
            let form = tok.display_form();
            if !out.is_empty() && !form.starts_with('\'') && !form.starts_with("n'") {
                out.push(' ');
            }
            out.push_str(form);
        }
        out
    }

    fn validate(&self) -> Result<()> {
        let slots = self
            .token_sequence
            .iter()
            .filter(|t| matches!(t, PatternToken::Verb(_)))
            .count();
        if self.token_sequence.is_empty() || slots > 1 {
            return Err(Error::Pattern(format!(
                "pattern {} must be non-empty with at most one verb slot",
                self.pattern_id
            )));
        }
        Ok(())
    }
}

/// What follows the verb: `wanted to`, `asked for`, bare `ordered`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Complement {
    #[default]
    To,
    For,
    None,
}

impl Complement {
    fn token(self) -> Option<&'static str> {
        match self {
            Complement::To => Some("to"),
            Complement::For => Some("for"),
            Complement::None => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerbEntry {
    pub lemma: String,
    #[serde(default)]
    pub complement: Complement,
    /// Overrides the regular/irregular past form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub past: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub participle: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gerund: Option<String>,
    /// Marks a verb whose forms cannot be derived by rule.
    #[serde(default)]
    pub irregular: bool,
    /// Templates this verb takes; defaults to the five regular ones.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub templates: Option<Vec<Template>>,
}

impl VerbEntry {
    pub fn new(lemma: &str, complement: Complement) -> Self {
        Self {
            lemma: lemma.to_string(),
            complement,
            past: None,
            participle: None,
            gerund: None,
            irregular: false,
            templates: None,
        }
    }

    fn with_templates(mut self, templates: &[Template]) -> Self {
        self.templates = Some(templates.to_vec());
        self
    }

    /// Built-in entry for a known desire verb, or a plain `<verb> to` entry.
    pub fn for_lemma(lemma: &str) -> Self {
        default_verbs()
            .into_iter()
            .find(|v| v.lemma == lemma)
            .unwrap_or_else(|| VerbEntry::new(lemma, Complement::To))
    }

    fn allowed_templates(&self) -> Vec<Template> {
        self.templates.clone().unwrap_or_else(|| Template::REGULAR.to_vec())
    }

    fn inflections(&self) -> Result<Inflections> {
        let lemma = self.lemma.as_str();
        if lemma.len() < 2 || !lemma.bytes().all(|b| b.is_ascii_lowercase()) {
            return Err(Error::Pattern(format!(
                "verb {lemma:?} must be a lowercase alphabetic lemma"
            )));
        }
        let table = IRREGULAR_VERBS.iter().find(|(l, _, _)| *l == lemma);
        let (past, participle) = match (&self.past, table) {
            (Some(past), _) => (
                past.clone(),
                self.participle.clone().unwrap_or_else(|| past.clone()),
            ),
            (None, Some((_, past, participle))) => (past.to_string(), participle.to_string()),
            (None, None) if self.irregular => {
                return Err(Error::Pattern(format!(
                    "irregular verb {lemma:?} has no inflection rule; give `past`"
                )))
            }
            (None, None) => {
                let past = regular_past(lemma);
                (past.clone(), self.participle.clone().unwrap_or(past))
            }
        };
        Ok(Inflections {
            past,
            participle,
            gerund: self.gerund.clone().unwrap_or_else(|| gerund(lemma)),
        })
    }
}

struct Inflections {
    past: String,
    participle: String,
    gerund: String,
}

fn is_vowel(b: u8) -> bool {
    matches!(b, b'a' | b'e' | b'i' | b'o' | b'u')
}

/// Short consonant-vowel-consonant verbs double their final consonant.
fn doubles_final(lemma: &str) -> bool {
    let s = lemma.as_bytes();
    let n = s.len();
    (3..=4).contains(&n)
        && !is_vowel(s[0])
        && !is_vowel(s[n - 1])
        && !matches!(s[n - 1], b'w' | b'x' | b'y')
        && is_vowel(s[n - 2])
        && !is_vowel(s[n - 3])
}

pub fn regular_past(lemma: &str) -> String {
    let s = lemma.as_bytes();
    let n = s.len();
    if lemma.ends_with('e') {
        format!("{lemma}d")
    } else if lemma.ends_with('y') && n >= 2 && !is_vowel(s[n - 2]) {
        format!("{}ied", &lemma[..n - 1])
    } else if doubles_final(lemma) {
        format!("{lemma}{}ed", s[n - 1] as char)
    } else {
        format!("{lemma}ed")
    }
}

pub fn gerund(lemma: &str) -> String {
    let s = lemma.as_bytes();
    let n = s.len();
    if lemma.ends_with("ie") {
        format!("{}ying", &lemma[..n - 2])
    } else if lemma.ends_with('e') && !lemma.ends_with("ee") && !lemma.ends_with("ye") && !lemma.ends_with("oe") && n > 2 {
        format!("{}ing", &lemma[..n - 1])
    } else if doubles_final(lemma) {
        format!("{lemma}{}ing", s[n - 1] as char)
    } else {
        format!("{lemma}ing")
    }
}

/// The sixteen head patterns of the published DesireDB inventory.
pub fn default_verbs() -> Vec<VerbEntry> {
    use Complement::*;
    vec![
        VerbEntry::new("want", To),
        VerbEntry::new("need", To),
        VerbEntry::new("order", None),
        VerbEntry::new("arrange", To),
        VerbEntry::new("decide", To),
        VerbEntry::new("hope", To),
        VerbEntry::new("wait", To).with_templates(&[Template::ModalNegative]),
        VerbEntry::new("wish", To),
        VerbEntry::new("schedule", None),
        VerbEntry::new("ask", For),
        VerbEntry::new("require", None),
        VerbEntry::new("request", None),
        VerbEntry::new("demand", None),
        VerbEntry::new("ache", To),
        VerbEntry::new("aim", To),
        VerbEntry::new("desire", To),
    ]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternConfig {
    #[serde(rename = "verb")]
    pub verbs: Vec<VerbEntry>,
    #[serde(default = "all_templates")]
    pub templates_enabled: BTreeSet<Template>,
    /// Lemmas with fewer corpus matches than this are dropped by
    /// [`super::retain_frequent`].
    #[serde(default = "default_min_count")]
    pub min_corpus_count: usize,
}

fn all_templates() -> BTreeSet<Template> {
    Template::ALL.into_iter().collect()
}

fn default_min_count() -> usize {
    1000
}

impl Default for PatternConfig {
    fn default() -> Self {
        Self {
            verbs: default_verbs(),
            templates_enabled: all_templates(),
            min_corpus_count: default_min_count(),
        }
    }
}

impl PatternConfig {
    /// Config for the given lemmas, using built-in entries where known.
    pub fn from_lemmas<S: AsRef<str>>(lemmas: &[S]) -> Self {
        Self {
            verbs: lemmas.iter().map(|l| VerbEntry::for_lemma(l.as_ref())).collect(),
            ..Self::default()
        }
    }

    pub fn with_templates(mut self, templates: &[Template]) -> Self {
        self.templates_enabled = templates.iter().copied().collect();
        self
    }

    pub fn verb_lemmas(&self) -> Vec<&str> {
        self.verbs.iter().map(|v| v.lemma.as_str()).collect()
    }

    /// Reads a TOML pattern config:
    ///
    /// ```toml
    /// templates_enabled = ["simple-past", "past-perfect"]
    /// min_corpus_count = 1000
    ///
    /// [[verb]]
    /// lemma = "ask"
    /// complement = "for"
    ///
    /// [[verb]]
    /// lemma = "seek"
    /// past = "sought"
    /// ```
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let config: PatternConfig =
            toml::from_str(text).map_err(|e| Error::Pattern(e.to_string()))?;
        for v in &config.verbs {
            if v.lemma != v.lemma.to_lowercase() || v.lemma.is_empty() {
                return Err(Error::Pattern(format!("verb lemma {:?} must be lowercase", v.lemma)));
            }
        }
        Ok(config)
    }
}

/// Expands every configured verb into one pattern per applicable enabled
/// template, ordered by (lemma, template).
pub fn generate_patterns(config: &PatternConfig) -> Result<Vec<DesirePattern>> {
    let mut verbs: Vec<&VerbEntry> = config.verbs.iter().collect();
    verbs.sort_by(|a, b| a.lemma.cmp(&b.lemma));
    verbs.dedup_by(|a, b| a.lemma == b.lemma);

    let mut out = Vec::new();
    for verb in verbs {
        let forms = verb.inflections()?;
        let mut templates = verb.allowed_templates();
        templates.sort();
        templates.dedup();
        for template in templates {
            if !config.templates_enabled.contains(&template) {
                continue;
            }
            let mut seq = match template {
                Template::SimplePast => vec![PatternToken::Verb(forms.past.clone())],
                Template::PastProgressive => vec![
                    PatternToken::literal(&["was", "were"]),
                    PatternToken::Verb(forms.gerund.clone()),
                ],
                Template::PastPerfect => vec![
                    PatternToken::literal(&["had", "'d"]),
                    PatternToken::Verb(forms.participle.clone()),
                ],
                Template::PastPerfectProgressive => vec![
                    PatternToken::literal(&["had", "'d"]),
                    PatternToken::literal(&["been"]),
                    PatternToken::Verb(forms.gerund.clone()),
                ],
                Template::NegatedPast => vec![
                    PatternToken::literal(&["did"]),
                    PatternToken::literal(&["n't", "not"]),
                    PatternToken::Verb(verb.lemma.clone()),
                ],
                Template::ModalNegative => vec![
                    PatternToken::literal(&["could"]),
                    PatternToken::literal(&["n't", "not"]),
                    PatternToken::Verb(verb.lemma.clone()),
                ],
            };
            if let Some(tok) = verb.complement.token() {
                seq.push(PatternToken::literal(&[tok]));
            }
            let pattern = DesirePattern {
                pattern_id: format!("{}:{}", verb.lemma, template),
                verb_lemma: verb.lemma.clone(),
                template,
                token_sequence: seq,
                requires_to: verb.complement == Complement::To,
            };
            pattern.validate()?;
            out.push(pattern);
        }
    }
    Ok(out)
}
