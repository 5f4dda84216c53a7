//! Desire-expression matching over tokenized narratives.

mod patterns;

use std::collections::BTreeMap;

use crate::corpus::{DesireInstance, Narrative, Sentence, TokenSpan, CONTEXT_WINDOW};

pub use patterns::{
    default_verbs, generate_patterns, gerund, regular_past, Complement, DesirePattern,
    PatternConfig, PatternToken, Template, VerbEntry,
};

/// Tokens that end the embedded clause when collecting focal words.
pub const CLAUSE_BOUNDARIES: &[&str] = &[
    "but", "so", "because", "although", "though", "however", "yet", "whereas", "unless", "while",
    ";",
];

const SUBJECT_PRONOUNS: &[&str] = &["i", "we", "you", "he", "she", "they", "it"];

const SKIPPED_ADVERBS: &[&str] = &[
    "really", "just", "also", "always", "never", "actually", "still", "even", "only", "finally",
    "originally", "initially", "truly", "so", "all", "both", "too", "again", "once", "already",
    "desperately", "badly", "kind", "sort", "of",
];

const AUXILIARY_LEMMAS: &[&str] = &[
    "be", "have", "would", "will", "could", "should", "might", "may", "must", "can", "not",
];

/// Result of analysing the clause around a desire match.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesireClause {
    pub subject_span: Option<TokenSpan>,
    pub focal_word_indices: Vec<usize>,
    pub is_first_person: bool,
}

/// Finds the subject and focal words of `X Ved S` around `match_span`.
///
/// The subject is the nearest pronoun or content word before the match,
/// skipping adverbs and auxiliaries. Focal words are the content words after
/// the match up to the sentence end or the first clause boundary.
pub fn parse_desire_clause(sentence: &Sentence, match_span: TokenSpan) -> DesireClause {
    let tokens = &sentence.tokens;
    let mut subject_span = None;
    for i in (0..match_span.start.min(tokens.len())).rev() {
        let tok = &tokens[i];
        let lower = tok.lower();
        if SUBJECT_PRONOUNS.contains(&lower.as_str()) {
            subject_span = Some(TokenSpan::new(i, i + 1));
            break;
        }
        let adverb = SKIPPED_ADVERBS.contains(&lower.as_str())
            || (lower.len() > 3 && lower.ends_with("ly") && lower.chars().all(char::is_alphabetic));
        if adverb || AUXILIARY_LEMMAS.contains(&tok.lemma.as_str()) {
            continue;
        }
        if tok.is_content_word && lower.chars().any(char::is_alphabetic) {
            subject_span = Some(TokenSpan::new(i, i + 1));
        }
        break;
    }

    let mut focal_word_indices = Vec::new();
    for (i, tok) in tokens.iter().enumerate().skip(match_span.end) {
        if CLAUSE_BOUNDARIES.contains(&tok.lower().as_str()) {
            break;
        }
        if tok.is_content_word {
            focal_word_indices.push(i);
        }
    }

    let is_first_person = subject_span
        .map(|s: TokenSpan| crate::corpus::is_first_person_pronoun(&tokens[s.start].lower()))
        .unwrap_or(false);
    DesireClause {
        subject_span,
        focal_word_indices,
        is_first_person,
    }
}

/// A single pattern occurrence in a sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternMatch {
    pub span: TokenSpan,
    pub pattern_id: String,
    pub verb_lemma: String,
}

fn lowered(sentence: &Sentence) -> Vec<String> {
    sentence.tokens.iter().map(|t| t.lower()).collect()
}

/// Leftmost-longest, non-overlapping matches in one sentence. Ties in length
/// go to the earlier pattern.
pub fn find_matches(sentence: &Sentence, patterns: &[DesirePattern]) -> Vec<PatternMatch> {
    let lower = lowered(sentence);
    let mut out = Vec::new();
    let mut i = 0;
    while i < lower.len() {
        let best = patterns
            .iter()
            .filter(|p| p.matches_at(&lower, i))
            .fold(None::<&DesirePattern>, |best, p| match best {
                Some(b) if b.len() >= p.len() => Some(b),
                _ => Some(p),
            });
        match best {
            Some(p) => {
                out.push(PatternMatch {
                    span: TokenSpan::new(i, i + p.len()),
                    pattern_id: p.pattern_id.clone(),
                    verb_lemma: p.verb_lemma.clone(),
                });
                i += p.len();
            }
            None => i += 1,
        }
    }
    out
}

/// Extracts one instance per desire match, each with up to five sentences of
/// context on either side.
pub fn match_desires(narrative: &Narrative, patterns: &[DesirePattern]) -> Vec<DesireInstance> {
    let sents = &narrative.sentences;
    let mut out = Vec::new();
    for (d, sentence) in sents.iter().enumerate() {
        for m in find_matches(sentence, patterns) {
            let clause = parse_desire_clause(sentence, m.span);
            let prior_start = d.saturating_sub(CONTEXT_WINDOW);
            let post_end = (d + 1 + CONTEXT_WINDOW).min(sents.len());
            out.push(DesireInstance {
                id: format!("{}:{}:{}", narrative.id, d, m.span.start),
                narrative_id: narrative.id.clone(),
                desire_sentence_index: d,
                desire_sentence: sentence.clone(),
                pattern_id: m.pattern_id,
                verb_lemma: m.verb_lemma,
                match_span: m.span,
                subject_span: clause.subject_span,
                focal_word_indices: clause.focal_word_indices,
                prior_context: sents[prior_start..d].to_vec(),
                post_context: sents[d + 1..post_end].to_vec(),
                is_hypothetical: None,
            });
        }
    }
    out
}

/// Drops verbs whose total match count over `narratives` is below
/// `config.min_corpus_count`.
pub fn retain_frequent(config: &PatternConfig, narratives: &[Narrative]) -> crate::Result<PatternConfig> {
    let patterns = generate_patterns(config)?;
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for n in narratives {
        for s in &n.sentences {
            for m in find_matches(s, &patterns) {
                *counts.entry(m.verb_lemma).or_default() += 1;
            }
        }
    }
    let mut kept = config.clone();
    kept.verbs
        .retain(|v| counts.get(&v.lemma).copied().unwrap_or(0) >= config.min_corpus_count);
    Ok(kept)
}

/// Removes the first `[ ... ]` pair used to mark the desire pattern in
/// published instances. Returns the clean text and the marked char range.
pub fn strip_bracket_markup(text: &str) -> (String, Option<(usize, usize)>) {
    let chars: Vec<char> = text.chars().collect();
    let Some(open) = chars.iter().position(|&c| c == '[') else {
        return (text.to_string(), None);
    };
    let Some(close) = chars[open..].iter().position(|&c| c == ']').map(|p| p + open) else {
        return (text.to_string(), None);
    };
    let mut clean: String = chars[..open].iter().collect();
    clean.extend(&chars[open + 1..close]);
    clean.extend(&chars[close + 1..]);
    (clean, Some((open, close - 1)))
}

/// Locates the desire pattern in a stand-alone sentence using the default
/// inventory, preferring a match that overlaps the `marked` char range.
pub fn locate_desire(sentence: &Sentence, marked: Option<(usize, usize)>) -> Option<PatternMatch> {
    let patterns = generate_patterns(&PatternConfig::default()).expect("default inventory compiles");
    let matches = find_matches(sentence, &patterns);
    if let Some((start, end)) = marked {
        let hit = matches.iter().find(|m| {
            let a = sentence.tokens[m.span.start].char_start;
            let b = sentence.tokens[m.span.end - 1].char_end;
            a < end && start < b
        });
        if let Some(hit) = hit {
            return Some(hit.clone());
        }
    }
    matches.into_iter().next()
}
