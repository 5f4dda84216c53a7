//! Deterministic sentence splitting and word tokenization.
//!
//! Sentences end at a run of `.`, `?` or `!` (plus trailing closing quotes or
//! brackets) followed by whitespace, or at a blank line. Words keep internal
//! apostrophes, hyphens and decimal points; negation and pronoun clitics are
//! split off Penn-Treebank style (`didn't` -> `did` + `n't`).

use std::collections::HashSet;

use super::lemma::{lemmatize, normalize_apostrophes};
use super::{Sentence, Token};

/// Default stop list: determiners, prepositions, pronouns, auxiliaries,
/// conjunctions and negation. Punctuation is always a non-content token.
/// Main-verb `do` is deliberately absent.
pub const DEFAULT_STOP_WORDS: &[&str] = &[
    // determiners
    "a", "an", "the", "this", "that", "these", "those", "some", "any", "each", "every", "all",
    "both", "either", "neither", "such", "no", "another", "other",
    // prepositions and particles
    "about", "above", "across", "after", "against", "along", "among", "around", "as", "at",
    "before", "behind", "below", "beneath", "beside", "between", "beyond", "by", "down",
    "during", "for", "from", "in", "inside", "into", "near", "of", "off", "on", "onto", "out",
    "outside", "over", "past", "since", "through", "throughout", "till", "to", "toward",
    "towards", "under", "until", "up", "upon", "with", "within", "without", "via",
    // pronouns
    "i", "me", "my", "mine", "myself", "we", "us", "our", "ours", "ourselves", "you", "your",
    "yours", "yourself", "yourselves", "he", "him", "his", "himself", "she", "her", "hers",
    "herself", "it", "its", "itself", "they", "them", "their", "theirs", "themselves", "who",
    "whom", "whose", "which", "what", "whoever", "whatever", "someone", "somebody", "anyone",
    "anybody", "everyone", "everybody", "one", "'s",
    // auxiliaries and modals (by lemma)
    "be", "have", "will", "would", "shall", "should", "can", "could", "may", "might", "must",
    "ought",
    // conjunctions
    "and", "or", "nor", "but", "so", "yet", "if", "because", "although", "though", "while",
    "whereas", "unless", "whether", "than", "then", "when", "where", "how", "why",
    // negation
    "not", "n't", "never",
];

pub const DEFAULT_ABBREVIATIONS: &[&str] = &[
    "mr.", "mrs.", "ms.", "dr.", "prof.", "sr.", "jr.", "st.", "mt.", "ft.", "vs.", "etc.",
    "e.g.", "i.e.", "a.m.", "p.m.", "u.s.", "u.k.", "inc.", "ltd.", "co.", "corp.", "jan.",
    "feb.", "mar.", "apr.", "aug.", "sept.", "sep.", "oct.", "nov.", "dec.", "no.", "approx.",
    "dept.", "gen.", "gov.", "sgt.", "capt.", "lt.", "rev.", "ave.", "blvd.", "rd.",
];

/// Abbreviations that only count as such before a number ("No. 5"), so a
/// sentence may still end in "said no."
const NUMBER_ABBREVIATIONS: &[&str] = &["no"];

const CLOSERS: &[char] = &['"', '\'', '\u{201d}', '\u{2019}', ')', ']', '}'];
const CLITICS: &[&str] = &["'s", "'m", "'re", "'ve", "'ll", "'d"];

#[derive(Debug, Clone)]
pub struct Tokenizer {
    stop_words: HashSet<String>,
    abbreviations: HashSet<String>,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Self {
            stop_words: DEFAULT_STOP_WORDS.iter().map(|s| s.to_string()).collect(),
            abbreviations: DEFAULT_ABBREVIATIONS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// A raw token as a char range into the scanned text.
#[derive(Debug, Clone, Copy)]
struct RawToken {
    start: usize,
    end: usize,
}

impl Tokenizer {
    pub fn with_stop_words<I, S>(stop_words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            stop_words: stop_words
                .into_iter()
                .map(|s| s.as_ref().to_lowercase())
                .collect(),
            ..Self::default()
        }
    }

    /// Reads a stop list with one word per line; `#` starts a comment.
    pub fn with_stop_word_file(path: &std::path::Path) -> crate::Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| crate::Error::io(path, e))?;
        Ok(Self::with_stop_words(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        ))
    }

    pub fn is_stop_word(&self, word: &str) -> bool {
        self.stop_words.contains(word)
    }

    /// Splits `text` into sentences numbered from 0.
    pub fn tokenize(&self, text: &str) -> Vec<Sentence> {
        let chars: Vec<char> = text.chars().collect();
        let raw = self.scan(&chars);
        let mut sentences = Vec::new();
        let mut current: Vec<RawToken> = Vec::new();

        let mut i = 0;
        while i < raw.len() {
            let tok = raw[i];
            if let Some(prev) = current.last() {
                if paragraph_break(&chars[prev.end..tok.start]) {
                    sentences.push(self.build(&chars, &current, sentences.len()));
                    current.clear();
                }
            }
            current.push(tok);
            i += 1;

            if is_terminator(&chars[tok.start..tok.end]) {
                while i < raw.len()
                    && raw[i].start == current.last().unwrap().end
                    && raw[i].end - raw[i].start == 1
                    && CLOSERS.contains(&chars[raw[i].start])
                {
                    current.push(raw[i]);
                    i += 1;
                }
                let end = current.last().unwrap().end;
                let followed_by_space = end == chars.len() || chars[end].is_whitespace();
                let ellipsis_continues = chars[tok.start..tok.end].iter().all(|&c| c == '.')
                    && tok.end - tok.start >= 2
                    && i < raw.len()
                    && chars[raw[i].start].is_lowercase();
                if followed_by_space && !ellipsis_continues {
                    sentences.push(self.build(&chars, &current, sentences.len()));
                    current.clear();
                }
            }
        }
        if !current.is_empty() {
            sentences.push(self.build(&chars, &current, sentences.len()));
        }
        sentences
    }

    /// Tokenizes `text` as exactly one sentence, keeping `text` verbatim.
    pub fn tokenize_sentence(&self, text: &str, index: usize) -> Sentence {
        let chars: Vec<char> = text.chars().collect();
        let raw = self.scan(&chars);
        let tokens = raw.iter().map(|r| self.make_token(&chars, *r, 0)).collect();
        Sentence {
            index,
            text: text.to_string(),
            tokens,
        }
    }

    fn build(&self, chars: &[char], raw: &[RawToken], index: usize) -> Sentence {
        let base = raw[0].start;
        let end = raw.last().unwrap().end;
        Sentence {
            index,
            text: chars[base..end].iter().collect(),
            tokens: raw.iter().map(|r| self.make_token(chars, *r, base)).collect(),
        }
    }

    fn make_token(&self, chars: &[char], raw: RawToken, base: usize) -> Token {
        let surface: String = chars[raw.start..raw.end].iter().collect();
        let lower = normalize_apostrophes(&surface.to_lowercase());
        let lemma = lemmatize(&lower);
        let has_alnum = surface.chars().any(char::is_alphanumeric);
        let is_content_word =
            has_alnum && !self.stop_words.contains(&lower) && !self.stop_words.contains(&lemma);
        Token {
            surface,
            lemma,
            is_content_word,
            char_start: raw.start - base,
            char_end: raw.end - base,
        }
    }

    fn scan(&self, chars: &[char]) -> Vec<RawToken> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_alphanumeric() {
                let end = self.scan_word(chars, i);
                split_clitic(chars, i, end, &mut out);
                i = end;
                continue;
            }
            let end = if matches!(c, '.' | '?' | '!') {
                let mut j = i;
                while j < chars.len() && matches!(chars[j], '.' | '?' | '!') {
                    j += 1;
                }
                j
            } else if matches!(c, '-' | '*' | '=' | '_' | '~') {
                let mut j = i;
                while j < chars.len() && chars[j] == c {
                    j += 1;
                }
                j
            } else {
                i + 1
            };
            out.push(RawToken { start: i, end });
            i = end;
        }
        out
    }

    fn scan_word(&self, chars: &[char], start: usize) -> usize {
        let n = chars.len();
        let mut i = start;
        let mut dotted = false;
        let mut run_start = start;
        loop {
            while i < n && chars[i].is_alphanumeric() {
                i += 1;
            }
            if i + 1 < n {
                let next = chars[i];
                let after = chars[i + 1];
                let joins = match next {
                    '\'' | '\u{2019}' => after.is_alphabetic(),
                    '-' => after.is_alphanumeric(),
                    '.' | ',' => {
                        (chars[i - 1].is_ascii_digit() && after.is_ascii_digit())
                            || (next == '.' && i - run_start == 1 && after.is_alphabetic() && chars[i - 1].is_alphabetic())
                    }
                    _ => false,
                };
                if joins {
                    if next == '.' && !chars[i - 1].is_ascii_digit() {
                        dotted = true;
                    }
                    i += 1;
                    run_start = i;
                    continue;
                }
            }
            break;
        }
        if i < n && chars[i] == '.' {
            let word: String = chars[start..i].iter().collect::<String>().to_lowercase();
            let numbered = || chars[i + 1..].iter().find(|c| !c.is_whitespace()).is_some_and(char::is_ascii_digit);
            let abbreviation = self.abbreviations.contains(&format!("{word}."))
                && (!NUMBER_ABBREVIATIONS.contains(&word.as_str()) || numbered());
            if dotted || abbreviation {
                i += 1;
            }
        }
        i
    }
}

fn split_clitic(chars: &[char], start: usize, end: usize, out: &mut Vec<RawToken>) {
    let word: String = chars[start..end].iter().collect();
    let lower = normalize_apostrophes(&word.to_lowercase());
    let len = end - start;
    if lower.ends_with("n't") && len > 3 {
        out.push(RawToken { start, end: end - 3 });
        out.push(RawToken { start: end - 3, end });
        return;
    }
    for clitic in CLITICS {
        let clen = clitic.chars().count();
        if lower.ends_with(clitic) && len > clen {
            out.push(RawToken { start, end: end - clen });
            out.push(RawToken { start: end - clen, end });
            return;
        }
    }
    out.push(RawToken { start, end });
}

fn is_terminator(chars: &[char]) -> bool {
    chars.iter().all(|c| matches!(c, '.' | '?' | '!'))
}

fn paragraph_break(gap: &[char]) -> bool {
    gap.iter().filter(|&&c| c == '\n').count() >= 2
}

/// Splits and tokenizes `text` with the default tokenizer.
pub fn tokenize(text: &str) -> Vec<Sentence> {
    Tokenizer::default().tokenize(text)
}
