//! Seeded synthetic narratives and the small lexicon they are scored with.

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use desire_core::corpus::{DesireInstance, FulfillmentLabel, GoldInstance, Narrative, Tokenizer};
use desire_core::extractor::{generate_patterns, match_desires, PatternConfig};
use desire_core::lexicons::{LexiconSet, MarkerSet, Polarity};

pub const POS_CONN: &[&str] = &["happy", "gift", "friend", "win", "smile", "sunny"];
pub const NEG_CONN: &[&str] = &["sad", "pain", "fail", "storm", "broken", "lonely"];
pub const SENT_POS: &[&str] = &["fun", "great", "love", "wonderful"];
pub const SENT_NEG: &[&str] = &["awful", "hate", "terrible", "boring"];
pub const NEGATORS: &[&str] = &["not", "never", "no"];
pub const MEETING: &[&str] = &["so", "finally", "as a result", "thus", "in fact"];
pub const VIOLATING: &[&str] = &["but", "although", "yet", "even though", "though", "however", "still", "instead"];
pub const PRONOUNS: &[&str] = &["I", "me", "my", "he", "him", "she", "her", "we", "us", "they"];
pub const NEUTRAL: &[&str] = &[
    "the", "dog", "park", "walk", "tree", "car", "buy", "purchase", "sell", "go", "stay", "leave", "house",
    "road", "a", "day", "run", "Maria",
];
pub const ENDINGS: &[&str] = &["day", "park", "house", "road", "tree"];
pub const RELATIONS: &[(&str, &str, &str)] = &[
    ("buy", "syn", "purchase"),
    ("sell", "ant", "buy"),
    ("go", "ant", "stay"),
    ("leave", "syn", "go"),
    ("leave", "ant", "stay"),
    ("happy", "ant", "sad"),
    ("win", "ant", "fail"),
    ("friend", "syn", "buddy"),
];
pub const SUBJECTS: &[&str] = &["I", "He", "We", "She", "Maria", ""];
pub const DESIRE_HEADS: &[&str] = &[
    "wanted to",
    "had hoped to",
    "was hoping to",
    "decided to",
    "didn't want to",
    "needed to",
    "had been wishing to",
    "couldn't wait to",
];

/// The fixture lexicon as a `LexiconSet`.
pub fn fixture_lexicon() -> LexiconSet {
    let pol = |pos: &[&str], neg: &[&str]| -> HashMap<String, Polarity> {
        pos.iter()
            .map(|w| (w.to_string(), Polarity::Positive))
            .chain(neg.iter().map(|w| (w.to_string(), Polarity::Negative)))
            .collect()
    };
    let mut synonyms: HashMap<String, BTreeSet<String>> = HashMap::new();
    let mut antonyms: HashMap<String, BTreeSet<String>> = HashMap::new();
    for (a, rel, b) in RELATIONS {
        let map = if *rel == "syn" { &mut synonyms } else { &mut antonyms };
        map.entry(a.to_string()).or_default().insert(b.to_string());
        map.entry(b.to_string()).or_default().insert(a.to_string());
    }
    let mut sentiment_pos: Vec<&str> = SENT_POS.to_vec();
    sentiment_pos.push("happy");
    let mut sentiment_neg: Vec<&str> = SENT_NEG.to_vec();
    sentiment_neg.push("sad");
    let lex = LexiconSet {
        connotation: pol(POS_CONN, NEG_CONN),
        synonyms,
        antonyms,
        meeting_markers: MarkerSet::new(MEETING),
        violating_markers: MarkerSet::new(VIOLATING),
        sentiment: pol(&sentiment_pos, &sentiment_neg),
        prescored: HashMap::new(),
    };
    lex.validate().expect("fixture lexicon is consistent");
    lex
}

pub struct Synth {
    rng: ChaCha8Rng,
    tokenizer: Tokenizer,
    patterns: Vec<desire_core::extractor::DesirePattern>,
}

impl Synth {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            tokenizer: Tokenizer::default(),
            patterns: generate_patterns(&PatternConfig::default()).unwrap(),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn word(&mut self) -> &'static str {
        let pools: [&[&str]; 8] = [POS_CONN, NEG_CONN, SENT_POS, SENT_NEG, NEGATORS, MEETING, VIOLATING, PRONOUNS];
        if self.rng.gen_bool(0.4) {
            NEUTRAL.choose(&mut self.rng).unwrap()
        } else {
            pools.choose(&mut self.rng).unwrap().choose(&mut self.rng).unwrap()
        }
    }

    fn words(&mut self, lo: usize, hi: usize) -> Vec<&'static str> {
        let n = self.rng.gen_range(lo..=hi);
        (0..n).map(|_| self.word()).collect()
    }

    fn capitalize(s: &str) -> String {
        let mut c = s.chars();
        match c.next() {
            Some(f) => f.to_uppercase().chain(c).collect(),
            None => String::new(),
        }
    }

    pub fn context_sentence(&mut self) -> String {
        let mut w = self.words(2, 9);
        w.push(ENDINGS.choose(&mut self.rng).unwrap());
        Self::capitalize(&w.join(" ")) + "."
    }

    /// A desire sentence, optionally with a but/so clause after the goal.
    pub fn desire_sentence(&mut self, clause: Option<&str>) -> String {
        let subject = *SUBJECTS.choose(&mut self.rng).unwrap();
        let head = *DESIRE_HEADS.choose(&mut self.rng).unwrap();
        let mut parts: Vec<String> = Vec::new();
        if !subject.is_empty() {
            parts.push(subject.to_string());
        }
        parts.push(head.to_string());
        let goal = self.words(1, 5);
        parts.extend(goal.iter().map(|s| s.to_string()));
        if let Some(c) = clause {
            parts.push(format!(", {c}"));
            parts.extend(self.words(1, 4).iter().map(|s| s.to_string()));
        }
        parts.push(ENDINGS.choose(&mut self.rng).unwrap().to_string());
        let text = parts.join(" ").replace(" ,", ",");
        Self::capitalize(&text) + "."
    }

    /// A narrative with exactly one desire expression.
    pub fn instance_with(&mut self, id: &str, clause: Option<&str>) -> DesireInstance {
        let prior = self.rng.gen_range(0..=7);
        let post = self.rng.gen_range(0..=7);
        let mut sentences: Vec<String> = (0..prior).map(|_| self.context_sentence()).collect();
        sentences.push(self.desire_sentence(clause));
        sentences.extend((0..post).map(|_| self.context_sentence()));
        let narrative = Narrative::from_text(id, &sentences.join(" "), &self.tokenizer);
        assert_eq!(narrative.sentences.len(), sentences.len(), "{sentences:?}");
        let mut found = match_desires(&narrative, &self.patterns);
        assert_eq!(found.len(), 1, "{sentences:?}");
        found.remove(0)
    }

    pub fn instance(&mut self, id: &str) -> DesireInstance {
        let clause = match self.rng.gen_range(0..4) {
            0 => Some("but"),
            1 => Some("so"),
            _ => None,
        };
        self.instance_with(id, clause)
    }

    /// Gold instances whose label leans on But-Present and context polarity.
    pub fn gold_corpus(&mut self, n: usize) -> Vec<GoldInstance> {
        (0..n)
            .map(|i| {
                let has_but = self.rng.gen_bool(0.4);
                let inst = self.instance_with(&format!("s{i:04}"), has_but.then_some("but"));
                let noisy = self.rng.gen_bool(0.15);
                let label = if has_but != noisy {
                    FulfillmentLabel::Unfulfilled
                } else {
                    FulfillmentLabel::Fulfilled
                };
                GoldInstance {
                    instance: inst,
                    label,
                    agreement_score: 3,
                    evidence: Vec::new(),
                    overlap_score: 0,
                }
            })
            .collect()
    }
}
