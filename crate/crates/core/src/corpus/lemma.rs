//! Rule-based lemmatizer.
//!
//! Lemmas are only consulted for desire verbs, focal words and lexicon
//! lookups, so a suffix stripper with an exception table is enough. Desire
//! verbs and the common irregular verbs are listed explicitly; everything
//! else goes through the `-ies/-ied/-ing/-ed/-es/-s` rules below.

use std::collections::HashMap;
use std::sync::OnceLock;

/// Irregular verbs as `(lemma, simple past, past participle)`.
pub(crate) const IRREGULAR_VERBS: &[(&str, &str, &str)] = &[
    ("be", "was", "been"),
    ("begin", "began", "begun"),
    ("bend", "bent", "bent"),
    ("bite", "bit", "bitten"),
    ("break", "broke", "broken"),
    ("bring", "brought", "brought"),
    ("build", "built", "built"),
    ("buy", "bought", "bought"),
    ("catch", "caught", "caught"),
    ("choose", "chose", "chosen"),
    ("come", "came", "come"),
    ("cost", "cost", "cost"),
    ("cut", "cut", "cut"),
    ("dig", "dug", "dug"),
    ("do", "did", "done"),
    ("draw", "drew", "drawn"),
    ("dream", "dreamt", "dreamt"),
    ("drink", "drank", "drunk"),
    ("drive", "drove", "driven"),
    ("eat", "ate", "eaten"),
    ("fall", "fell", "fallen"),
    ("feed", "fed", "fed"),
    ("feel", "felt", "felt"),
    ("fight", "fought", "fought"),
    ("find", "found", "found"),
    ("fly", "flew", "flown"),
    ("forget", "forgot", "forgotten"),
    ("forgive", "forgave", "forgiven"),
    ("freeze", "froze", "frozen"),
    ("get", "got", "gotten"),
    ("give", "gave", "given"),
    ("go", "went", "gone"),
    ("grow", "grew", "grown"),
    ("hang", "hung", "hung"),
    ("have", "had", "had"),
    ("hear", "heard", "heard"),
    ("hide", "hid", "hidden"),
    ("hit", "hit", "hit"),
    ("hold", "held", "held"),
    ("hurt", "hurt", "hurt"),
    ("keep", "kept", "kept"),
    ("know", "knew", "known"),
    ("lead", "led", "led"),
    ("leave", "left", "left"),
    ("lend", "lent", "lent"),
    ("let", "let", "let"),
    ("lose", "lost", "lost"),
    ("make", "made", "made"),
    ("mean", "meant", "meant"),
    ("meet", "met", "met"),
    ("pay", "paid", "paid"),
    ("put", "put", "put"),
    ("quit", "quit", "quit"),
    ("read", "read", "read"),
    ("ride", "rode", "ridden"),
    ("ring", "rang", "rung"),
    ("run", "ran", "run"),
    ("say", "said", "said"),
    ("see", "saw", "seen"),
    ("seek", "sought", "sought"),
    ("sell", "sold", "sold"),
    ("send", "sent", "sent"),
    ("set", "set", "set"),
    ("shake", "shook", "shaken"),
    ("shoot", "shot", "shot"),
    ("shut", "shut", "shut"),
    ("sing", "sang", "sung"),
    ("sit", "sat", "sat"),
    ("sleep", "slept", "slept"),
    ("speak", "spoke", "spoken"),
    ("spend", "spent", "spent"),
    ("stand", "stood", "stood"),
    ("steal", "stole", "stolen"),
    ("stick", "stuck", "stuck"),
    ("swim", "swam", "swum"),
    ("take", "took", "taken"),
    ("teach", "taught", "taught"),
    ("tear", "tore", "torn"),
    ("tell", "told", "told"),
    ("think", "thought", "thought"),
    ("throw", "threw", "thrown"),
    ("understand", "understood", "understood"),
    ("wake", "woke", "woken"),
    ("wear", "wore", "worn"),
    ("win", "won", "won"),
    ("write", "wrote", "written"),
];

/// Surface forms whose lemma the suffix rules would get wrong.
const EXCEPTIONS: &[(&str, &str)] = &[
    // be / have / do
    ("am", "be"),
    ("is", "be"),
    ("are", "be"),
    ("were", "be"),
    ("being", "be"),
    ("'m", "be"),
    ("'re", "be"),
    ("has", "have"),
    ("having", "have"),
    ("'ve", "have"),
    ("does", "do"),
    ("doing", "do"),
    ("goes", "go"),
    ("going", "go"),
    // clitics and split negations
    ("n't", "not"),
    ("'ll", "will"),
    ("'d", "would"),
    ("wo", "will"),
    ("ca", "can"),
    ("sha", "shall"),
    // desire verbs whose forms the rules miss
    ("ached", "ache"),
    ("aching", "ache"),
    ("arranged", "arrange"),
    ("arranging", "arrange"),
    ("hoped", "hope"),
    ("hoping", "hope"),
    ("desired", "desire"),
    ("desiring", "desire"),
    ("required", "require"),
    ("requiring", "require"),
    ("scheduled", "schedule"),
    ("scheduling", "schedule"),
    ("decided", "decide"),
    ("deciding", "decide"),
    // e-final verbs the rules cannot restore
    ("created", "create"),
    ("creating", "create"),
    ("welcomed", "welcome"),
    ("amused", "amuse"),
    ("refused", "refuse"),
    ("excused", "excuse"),
    ("confused", "confuse"),
    ("abused", "abuse"),
    ("escaped", "escape"),
    ("promoted", "promote"),
    ("completed", "complete"),
    ("deleted", "delete"),
    ("agreed", "agree"),
    ("freed", "free"),
    ("guaranteed", "guarantee"),
    // plurals
    ("children", "child"),
    ("men", "man"),
    ("women", "woman"),
    ("people", "people"),
    ("feet", "foot"),
    ("teeth", "tooth"),
    ("mice", "mouse"),
    ("lives", "life"),
    ("wives", "wife"),
    ("knives", "knife"),
    // words that look inflected but are not
    ("always", "always"),
    ("perhaps", "perhaps"),
    ("news", "news"),
    ("sometimes", "sometimes"),
    ("besides", "besides"),
    ("towards", "towards"),
    ("afterwards", "afterwards"),
    ("ourselves", "ourselves"),
    ("themselves", "themselves"),
    ("yourselves", "yourselves"),
    ("series", "series"),
    ("species", "species"),
    ("morning", "morning"),
    ("evening", "evening"),
    ("nothing", "nothing"),
    ("something", "something"),
    ("anything", "anything"),
    ("everything", "everything"),
    ("wedding", "wedding"),
    ("ceiling", "ceiling"),
    ("during", "during"),
    ("sibling", "sibling"),
    ("pudding", "pudding"),
    ("hundred", "hundred"),
    ("sacred", "sacred"),
    ("naked", "naked"),
    ("wicked", "wicked"),
    ("this", "this"),
    ("his", "his"),
    ("its", "its"),
    ("was", "be"),
    ("yes", "yes"),
];

fn exception_table() -> &'static HashMap<&'static str, &'static str> {
    static TABLE: OnceLock<HashMap<&'static str, &'static str>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = HashMap::new();
        for &(lemma, past, participle) in IRREGULAR_VERBS {
            table.insert(past, lemma);
            table.insert(participle, lemma);
        }
        // "was"/"been" come from the verb table; explicit entries win.
        for &(form, lemma) in EXCEPTIONS {
            table.insert(form, lemma);
        }
        // Irregular lemmas map to themselves ("read", "cut", "put").
        for &(lemma, _, _) in IRREGULAR_VERBS {
            table.entry(lemma).or_insert(lemma);
        }
        table
    })
}

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

/// Whether position `i` holds a vowel that is not part of a vowel pair.
/// `qu` counts as a consonant cluster.
fn single_vowel_at(s: &[u8], i: usize) -> bool {
    if !is_vowel(s[i]) {
        return false;
    }
    if i == 0 {
        return true;
    }
    let prev = s[i - 1];
    if prev == b'u' && i >= 2 && s[i - 2] == b'q' {
        return true;
    }
    !is_vowel(prev)
}

fn needs_final_e(stem: &str) -> bool {
    let s = stem.as_bytes();
    let n = s.len();
    if n < 2 {
        return false;
    }
    let last = s[n - 1];
    if last == b'e' {
        return false;
    }
    if matches!(last, b'v' | b'c' | b'z') {
        return true;
    }
    if stem.ends_with("dg") || stem.ends_with("rg") {
        return true;
    }
    if last == b'l' && matches!(s[n - 2], b'b' | b'p' | b't' | b'd' | b'g' | b'k' | b'f' | b'z') {
        return true;
    }
    if last == b's' && s[n - 2] != b's' && is_vowel(s[n - 2]) {
        // focus, bonus
        let plain_us = s[n - 2] == b'u' && n > 3 && !is_vowel(s[n - 3]);
        return !plain_us;
    }
    if n >= 3 && last == b'r' && matches!(s[n - 2], b'a' | b'i' | b'u') && single_vowel_at(s, n - 2) {
        return true;
    }
    if n >= 5 && (stem.ends_with("ang") || (n >= 6 && stem.ends_with("eng"))) {
        return true;
    }
    if n >= 4 {
        for suffix in ["at", "id", "in", "ib", "ud", "ul"] {
            if stem.ends_with(suffix) && single_vowel_at(s, n - 2) {
                let long_enough = match suffix {
                    "id" | "ib" => n >= 4,
                    _ => n >= 5,
                };
                if long_enough {
                    return true;
                }
            }
        }
    }
    // Short consonant-initial CVC stems: hop, smil, nam.
    if (3..=4).contains(&n)
        && !is_vowel(s[0])
        && !is_vowel(last)
        && !matches!(last, b'w' | b'x' | b'y')
        && single_vowel_at(s, n - 2)
    {
        return true;
    }
    false
}

/// Undo consonant doubling or e-dropping after removing `-ed`/`-ing`.
fn restore_stem(stem: &str) -> String {
    let s = stem.as_bytes();
    let n = s.len();
    if n >= 3 && s[n - 1] == s[n - 2] && !is_vowel(s[n - 1]) && !matches!(s[n - 1], b'l' | b's' | b'z' | b'f') {
        return stem[..n - 1].to_string();
    }
    if needs_final_e(stem) {
        return format!("{stem}e");
    }
    stem.to_string()
}

/// Lemma of a single lowercase word.
///
/// Input is expected to be lowercase already; non-alphabetic words are
/// returned unchanged.
pub fn lemmatize(word: &str) -> String {
    let word = normalize_apostrophes(word);
    if let Some(lemma) = exception_table().get(word.as_str()) {
        return (*lemma).to_string();
    }
    if !word.bytes().all(|b| b.is_ascii_lowercase()) {
        return word;
    }
    let n = word.len();
    let has_vowel = |s: &str| s.bytes().any(|b| is_vowel(b) || b == b'y');

    if n > 4 && (word.ends_with("ies") || word.ends_with("ied")) {
        return format!("{}y", &word[..n - 3]);
    }
    if n > 4 && word.ends_with("ing") {
        let stem = &word[..n - 3];
        if has_vowel(stem) {
            return restore_stem(stem);
        }
        return word;
    }
    if word.ends_with("eed") {
        return word;
    }
    if n > 3 && word.ends_with("ed") {
        let stem = &word[..n - 2];
        if has_vowel(stem) {
            return restore_stem(stem);
        }
        return word;
    }
    if n > 3 && word.ends_with("es") {
        for suffix in ["sses", "shes", "ches", "xes", "zes", "oes"] {
            if word.ends_with(suffix) {
                return word[..n - 2].to_string();
            }
        }
    }
    if n > 3
        && word.ends_with('s')
        && !word.ends_with("ss")
        && !word.ends_with("us")
        && !word.ends_with("is")
    {
        return word[..n - 1].to_string();
    }
    word
}

pub(crate) fn normalize_apostrophes(s: &str) -> String {
    s.replace(['\u{2019}', '\u{2018}'], "'")
}
