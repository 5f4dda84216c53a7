//! Brute-force reference computations, written without reusing the library
//! code paths they check.

use std::collections::{BTreeMap, HashMap};

use desire_core::corpus::{DesireInstance, Sentence, Token};

use super::synth::{
    MEETING, NEG_CONN, POS_CONN, RELATIONS, SENT_NEG, SENT_POS, VIOLATING,
};

const NEG_WORDS: [&str; 4] = ["not", "n't", "never", "no"];
const VERB_INVENTORY: [&str; 16] = [
    "want", "need", "order", "arrange", "decide", "hope", "wait", "wish", "schedule", "ask", "require",
    "request", "demand", "ache", "aim", "desire",
];

fn lower(t: &Token) -> String {
    t.surface.to_lowercase().replace('\u{2019}', "'")
}

/// +1, -1 or 0 from plain word lists, lemma first then surface.
fn lookup(t: &Token, pos: &[&str], neg: &[&str]) -> i32 {
    for key in [t.lemma.clone(), lower(t)] {
        if pos.contains(&key.as_str()) {
            return 1;
        }
        if neg.contains(&key.as_str()) {
            return -1;
        }
    }
    0
}

fn connotation(t: &Token) -> i32 {
    lookup(t, POS_CONN, NEG_CONN)
}

fn sentiment_word(t: &Token) -> i32 {
    let mut pos = SENT_POS.to_vec();
    pos.push("happy");
    let mut neg = SENT_NEG.to_vec();
    neg.push("sad");
    lookup(t, &pos, &neg)
}

pub fn sentence_polarity(s: &Sentence) -> i32 {
    let mut score_pos: i32 = 0;
    let mut score_neg = 0;
    for i in 0..s.tokens.len() {
        let mut p = sentiment_word(&s.tokens[i]);
        if p == 0 {
            continue;
        }
        let mut negated = false;
        for back in 1..=3 {
            if i >= back && NEG_WORDS.contains(&lower(&s.tokens[i - back]).as_str()) {
                negated = true;
            }
        }
        if negated {
            p = -p;
        }
        if p > 0 {
            score_pos += 1;
        } else {
            score_neg += 1;
        }
    }
    (score_pos - score_neg).signum()
}

fn related(word: &str, kind: &str) -> Vec<String> {
    let mut out = Vec::new();
    for (a, rel, b) in RELATIONS {
        if *rel != kind {
            continue;
        }
        if *a == word {
            out.push(b.to_string());
        }
        if *b == word {
            out.push(a.to_string());
        }
    }
    out
}

/// Leftmost-longest scan over both marker classes: (meeting, violating).
fn markers(s: &Sentence) -> (usize, usize) {
    let words: Vec<String> = s.tokens.iter().map(lower).collect();
    let mut all: Vec<(Vec<&str>, bool)> = Vec::new();
    for m in MEETING {
        all.push((m.split(' ').collect(), true));
    }
    for m in VIOLATING {
        all.push((m.split(' ').collect(), false));
    }
    let (mut meet, mut viol) = (0, 0);
    let mut i = 0;
    while i < words.len() {
        let mut best_len = 0;
        let mut best_meet = false;
        for (seq, is_meet) in &all {
            let mut ok = i + seq.len() <= words.len();
            let mut k = 0;
            while ok && k < seq.len() {
                ok = words[i + k] == seq[k];
                k += 1;
            }
            if ok && seq.len() > best_len {
                best_len = seq.len();
                best_meet = *is_meet;
            }
        }
        if best_len == 0 {
            i += 1;
        } else {
            if best_meet {
                meet += 1;
            } else {
                viol += 1;
            }
            i += best_len;
        }
    }
    (meet, viol)
}

fn pronoun_forms(subject: &str) -> Vec<String> {
    let groups: [&[&str]; 7] = [
        &["i", "me", "my", "mine", "myself"],
        &["we", "us", "our", "ours", "ourselves"],
        &["he", "him", "his", "himself"],
        &["she", "her", "hers", "herself"],
        &["they", "them", "their", "theirs", "themselves"],
        &["you", "your", "yours", "yourself", "yourselves"],
        &["it", "its", "itself"],
    ];
    for g in groups {
        if g.contains(&subject) {
            return g.iter().map(|s| s.to_string()).collect();
        }
    }
    vec![subject.to_string()]
}

/// Every non-BOW feature over the full context, by nested loops.
pub fn features(inst: &DesireInstance) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    let verb = if VERB_INVENTORY.contains(&inst.verb_lemma.as_str()) {
        inst.verb_lemma.clone()
    } else {
        "OTHER".to_string()
    };
    out.insert(format!("desire:Desire-Verb:{verb}"), 1.0);

    let tokens = &inst.desire_sentence.tokens;
    let subject: Option<String> = inst
        .subject_span
        .map(|span| lower(&tokens[span.end - 1]));
    let first_person = matches!(subject.as_deref(), Some("i") | Some("we"));
    out.insert("desire:First-Person-Subject".into(), if first_person { 1.0 } else { 0.0 });

    let focal: Vec<&Token> = inst.focal_word_indices.iter().map(|&i| &tokens[i]).collect();
    let desire_pol = sentence_polarity(&inst.desire_sentence);

    let n_prior = inst.prior_context.len() as i32;
    let mut context: Vec<(i32, &Sentence)> = Vec::new();
    for (k, s) in inst.prior_context.iter().enumerate() {
        context.push((k as i32 - n_prior, s));
    }
    for (k, s) in inst.post_context.iter().enumerate() {
        context.push((k as i32 + 1, s));
    }

    for (i, s) in context {
        let (mut words, mut syns, mut ants) = (0, 0, 0);
        let (mut agree, mut disagree) = (0, 0);
        for w in &focal {
            let syn = related(&w.lemma, "syn");
            let ant = related(&w.lemma, "ant");
            let wp = connotation(w);
            for t in &s.tokens {
                if t.lemma == w.lemma {
                    words += 1;
                }
                if syn.contains(&t.lemma) {
                    syns += 1;
                }
                if ant.contains(&t.lemma) {
                    ants += 1;
                }
                let tp = connotation(t);
                if wp != 0 && tp == wp {
                    agree += 1;
                }
                if wp != 0 && tp == -wp {
                    disagree += 1;
                }
            }
        }
        let mentioned = match &subject {
            Some(subj) => {
                let forms = pronoun_forms(subj);
                s.tokens.iter().any(|t| forms.contains(&lower(t)))
            }
            None => false,
        };
        let (meet, viol) = markers(s);
        let pol = sentence_polarity(s);
        let both = pol != 0 && desire_pol != 0;
        let put = |out: &mut BTreeMap<String, f64>, name: String, v: f64| {
            out.insert(name, v);
        };
        put(&mut out, format!("desire:Focal-Word-Mention:{i:+}"), words as f64);
        put(&mut out, format!("desire:Focal-Synonym-Mention:{i:+}"), syns as f64);
        put(&mut out, format!("desire:Focal-Antonym-Mention:{i:+}"), ants as f64);
        put(&mut out, format!("desire:Desire-Subject-Mention:{i:+}"), mentioned as u8 as f64);
        put(&mut out, format!("discourse:Violated-Expectation:{i:+}"), viol as f64);
        put(&mut out, format!("discourse:Meeting-Expectation:{i:+}"), meet as f64);
        put(&mut out, format!("connotation:Connotation-Agree:{i:+}"), agree as f64);
        put(&mut out, format!("connotation:Connotation-Disagree:{i:+}"), disagree as f64);
        put(&mut out, format!("sentiment:Sentiment-Agree:{i:+}"), (both && pol == desire_pol) as u8 as f64);
        put(&mut out, format!("sentiment:Sentiment-Disagree:{i:+}"), (both && pol != desire_pol) as u8 as f64);
    }
    let has = |w: &str| tokens.iter().any(|t| lower(t) == w);
    out.insert("discourse:So-Present".into(), has("so") as u8 as f64);
    out.insert("discourse:But-Present".into(), has("but") as u8 as f64);
    out
}

/// Nominal alpha as 1 - D_o / D_e with both disagreements counted over
/// explicit value pairs: within units for D_o, across all pairable values
/// for D_e.
pub fn alpha_pairwise<T: PartialEq + Clone>(units: &[Vec<Option<T>>]) -> Option<f64> {
    let units: Vec<Vec<T>> = units
        .iter()
        .map(|u| u.iter().flatten().cloned().collect::<Vec<T>>())
        .filter(|u: &Vec<T>| u.len() >= 2)
        .collect();
    let all: Vec<&T> = units.iter().flatten().collect();
    let n = all.len() as f64;
    if units.len() < 2 {
        return None;
    }
    let mut d_o = 0.0;
    for u in &units {
        let m = u.len() as f64;
        let mut diff = 0.0;
        for i in 0..u.len() {
            for j in 0..u.len() {
                if i != j && u[i] != u[j] {
                    diff += 1.0;
                }
            }
        }
        d_o += diff / (m - 1.0);
    }
    d_o /= n;
    let mut diff = 0.0;
    for i in 0..all.len() {
        for j in 0..all.len() {
            if i != j && all[i] != all[j] {
                diff += 1.0;
            }
        }
    }
    let d_e = diff / (n * (n - 1.0));
    if d_e == 0.0 {
        return Some(1.0);
    }
    Some(1.0 - d_o / d_e)
}

/// Counts of (present, label) over a dataset, then IG in bits.
pub fn info_gain_by_hand(present: &[bool], labels: &[bool]) -> f64 {
    let h = |a: f64, b: f64| {
        let n = a + b;
        let mut s = 0.0;
        for c in [a, b] {
            if c > 0.0 {
                s -= c / n * (c / n).log2();
            }
        }
        s
    };
    let mut table: HashMap<(bool, bool), f64> = HashMap::new();
    for (p, l) in present.iter().zip(labels) {
        *table.entry((*p, *l)).or_default() += 1.0;
    }
    let get = |p, l| table.get(&(p, l)).copied().unwrap_or(0.0);
    let n = labels.len() as f64;
    let total = h(get(true, true) + get(false, true), get(true, false) + get(false, false));
    let on = get(true, true) + get(true, false);
    let off = n - on;
    let mut cond = 0.0;
    if on > 0.0 {
        cond += on / n * h(get(true, true), get(true, false));
    }
    if off > 0.0 {
        cond += off / n * h(get(false, true), get(false, false));
    }
    total - cond
}
