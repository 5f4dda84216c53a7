//! Line-delimited JSON corpus files.
//!
//! Instance records use the DesireDB field names (`Prior-Context`,
//! `Desire-Expression-Sentence`, `Post-Context`, `Fulfillment-Label`, ...).
//! Sentences are stored as text and re-tokenized on read, so the tokenizer
//! used for reading must match the one used for writing.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    DesireInstance, FulfillmentLabel, GoldInstance, Narrative, Sentence, TokenSpan, Tokenizer,
    CONTEXT_WINDOW,
};
use crate::extractor;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    RawNarratives,
    /// Extracted instances without fulfillment annotations.
    Instances,
    GoldInstances,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Corpus {
    Narratives(Vec<Narrative>),
    Instances(Vec<DesireInstance>),
    Gold(Vec<GoldInstance>),
}

impl Corpus {
    pub fn len(&self) -> usize {
        match self {
            Corpus::Narratives(v) => v.len(),
            Corpus::Instances(v) => v.len(),
            Corpus::Gold(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct NarrativeRecord {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sentences: Option<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceRecord {
    #[serde(rename = "Instance-Id", default)]
    id: Option<String>,
    #[serde(rename = "Narrative-Id", default)]
    narrative_id: Option<String>,
    #[serde(rename = "Desire-Sentence-Index", default)]
    desire_sentence_index: Option<usize>,
    #[serde(rename = "Prior-Context")]
    prior_context: Vec<String>,
    #[serde(rename = "Desire-Expression-Sentence")]
    desire_sentence: String,
    #[serde(rename = "Post-Context")]
    post_context: Vec<String>,
    #[serde(rename = "Desire-Verb", default)]
    verb_lemma: Option<String>,
    #[serde(rename = "Pattern-Id", default)]
    pattern_id: Option<String>,
    #[serde(rename = "Match-Span", default)]
    match_span: Option<[usize; 2]>,
    #[serde(rename = "Subject-Span", default)]
    subject_span: Option<[usize; 2]>,
    #[serde(rename = "Focal-Word-Indices", default)]
    focal_word_indices: Option<Vec<usize>>,
    #[serde(rename = "Hypothetical", default, skip_serializing_if = "Option::is_none")]
    hypothetical: Option<bool>,
    #[serde(rename = "Fulfillment-Label", default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(
        rename = "Fulfillment-Agreement-Score",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    agreement_score: Option<u8>,
    #[serde(rename = "Evidence", default, skip_serializing_if = "Option::is_none")]
    evidence: Option<Vec<String>>,
    #[serde(
        rename = "Evidence-Overlap-Score",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    overlap_score: Option<u8>,
}

struct RecordCtx<'a> {
    file: &'a str,
    record: usize,
}

impl RecordCtx<'_> {
    fn err(&self, field: &str, msg: impl Into<String>) -> Error {
        Error::record(self.file, self.record, field, msg)
    }
}

fn open_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push((i + 1, line));
    }
    Ok(out)
}

pub fn read_corpus(path: &Path, format: CorpusFormat) -> Result<Corpus> {
    read_corpus_with(path, format, &Tokenizer::default())
}

pub fn read_corpus_with(path: &Path, format: CorpusFormat, tokenizer: &Tokenizer) -> Result<Corpus> {
    let name = path.display().to_string();
    let lines = open_lines(path)?;
    match format {
        CorpusFormat::RawNarratives => {
            let mut out = Vec::with_capacity(lines.len());
            for (record, line) in lines {
                let ctx = RecordCtx { file: &name, record };
                out.push(parse_narrative(&line, &ctx, tokenizer)?);
            }
            Ok(Corpus::Narratives(out))
        }
        CorpusFormat::Instances | CorpusFormat::GoldInstances => {
            let gold = format == CorpusFormat::GoldInstances;
            let mut instances = Vec::new();
            let mut golds = Vec::new();
            for (record, line) in lines {
                let ctx = RecordCtx { file: &name, record };
                let rec: InstanceRecord = serde_json::from_str(&line)
                    .map_err(|e| ctx.err(json_field(&e), e.to_string()))?;
                let inst = build_instance(&rec, &ctx, tokenizer)?;
                if gold {
                    golds.push(build_gold(inst, &rec, &ctx)?);
                } else {
                    instances.push(inst);
                }
            }
            Ok(if gold {
                Corpus::Gold(golds)
            } else {
                Corpus::Instances(instances)
            })
        }
    }
}

pub fn read_narratives(path: &Path) -> Result<Vec<Narrative>> {
    match read_corpus(path, CorpusFormat::RawNarratives)? {
        Corpus::Narratives(v) => Ok(v),
        _ => unreachable!(),
    }
}

pub fn read_instances(path: &Path) -> Result<Vec<DesireInstance>> {
    match read_corpus(path, CorpusFormat::Instances)? {
        Corpus::Instances(v) => Ok(v),
        _ => unreachable!(),
    }
}

pub fn read_gold(path: &Path) -> Result<Vec<GoldInstance>> {
    match read_corpus(path, CorpusFormat::GoldInstances)? {
        Corpus::Gold(v) => Ok(v),
        _ => unreachable!(),
    }
}

/// Best-effort field name from a serde_json error message.
fn json_field(e: &serde_json::Error) -> &'static str {
    let msg = e.to_string();
    for field in [
        "Prior-Context",
        "Desire-Expression-Sentence",
        "Post-Context",
        "Fulfillment-Label",
        "Fulfillment-Agreement-Score",
        "Evidence-Overlap-Score",
        "Evidence",
        "Match-Span",
        "Subject-Span",
        "Focal-Word-Indices",
        "Instance-Id",
        "Narrative-Id",
    ] {
        if msg.contains(field) {
            return field;
        }
    }
    "<record>"
}

fn parse_narrative(line: &str, ctx: &RecordCtx, tokenizer: &Tokenizer) -> Result<Narrative> {
    let rec: NarrativeRecord =
        serde_json::from_str(line).map_err(|e| ctx.err("<record>", e.to_string()))?;
    let sentences = match (&rec.sentences, &rec.text) {
        (Some(sents), _) => sents
            .iter()
            .enumerate()
            .map(|(i, s)| tokenizer.tokenize_sentence(s, i))
            .collect(),
        (None, Some(text)) => tokenizer.tokenize(text),
        (None, None) => return Err(ctx.err("text", "record needs `text` or `sentences`")),
    };
    let narrative = Narrative {
        id: rec.id,
        sentences,
        source: rec.source,
    };
    narrative.validate().map_err(|e| ctx.err("sentences", e.to_string()))?;
    Ok(narrative)
}

fn span_from(pair: [usize; 2]) -> TokenSpan {
    TokenSpan::new(pair[0], pair[1])
}

fn build_instance(rec: &InstanceRecord, ctx: &RecordCtx, tokenizer: &Tokenizer) -> Result<DesireInstance> {
    if rec.prior_context.len() > CONTEXT_WINDOW {
        return Err(ctx.err(
            "Prior-Context",
            format!("{} sentences, at most {CONTEXT_WINDOW} allowed", rec.prior_context.len()),
        ));
    }
    if rec.post_context.len() > CONTEXT_WINDOW {
        return Err(ctx.err(
            "Post-Context",
            format!("{} sentences, at most {CONTEXT_WINDOW} allowed", rec.post_context.len()),
        ));
    }
    let d = rec.desire_sentence_index.unwrap_or(rec.prior_context.len());
    if d < rec.prior_context.len() {
        return Err(ctx.err(
            "Desire-Sentence-Index",
            "index smaller than the prior context length",
        ));
    }
    let prior_start = d - rec.prior_context.len();
    let prior_context: Vec<Sentence> = rec
        .prior_context
        .iter()
        .enumerate()
        .map(|(k, s)| tokenizer.tokenize_sentence(s, prior_start + k))
        .collect();
    let post_context: Vec<Sentence> = rec
        .post_context
        .iter()
        .enumerate()
        .map(|(k, s)| tokenizer.tokenize_sentence(s, d + 1 + k))
        .collect();

    let (desire_text, marked) = extractor::strip_bracket_markup(&rec.desire_sentence);
    let desire_sentence = tokenizer.tokenize_sentence(&desire_text, d);

    let (match_span, pattern_id, verb_lemma) = match rec.match_span {
        Some(span) => (
            span_from(span),
            rec.pattern_id.clone().unwrap_or_default(),
            rec.verb_lemma.clone().unwrap_or_default(),
        ),
        None => {
            let found = extractor::locate_desire(&desire_sentence, marked).ok_or_else(|| {
                ctx.err("Desire-Expression-Sentence", "no desire pattern found in sentence")
            })?;
            (
                found.span,
                rec.pattern_id.clone().unwrap_or(found.pattern_id),
                rec.verb_lemma.clone().unwrap_or(found.verb_lemma),
            )
        }
    };
    if match_span.is_empty() || match_span.end > desire_sentence.tokens.len() {
        return Err(ctx.err("Match-Span", "span outside the desire sentence"));
    }

    let (subject_span, focal_word_indices) = match (rec.subject_span, &rec.focal_word_indices) {
        (subject, Some(focal)) if rec.match_span.is_some() => {
            (subject.map(span_from), focal.clone())
        }
        _ => {
            let clause = extractor::parse_desire_clause(&desire_sentence, match_span);
            (
                rec.subject_span.map(span_from).or(clause.subject_span),
                rec.focal_word_indices
                    .clone()
                    .unwrap_or(clause.focal_word_indices),
            )
        }
    };

    let id = rec
        .id
        .clone()
        .unwrap_or_else(|| format!("record-{}", ctx.record));
    let inst = DesireInstance {
        narrative_id: rec.narrative_id.clone().unwrap_or_else(|| id.clone()),
        id,
        desire_sentence_index: d,
        desire_sentence,
        pattern_id,
        verb_lemma,
        match_span,
        subject_span,
        focal_word_indices,
        prior_context,
        post_context,
        is_hypothetical: rec.hypothetical,
    };
    inst.validate()
        .map_err(|e| ctx.err("<instance>", e.to_string()))?;
    Ok(inst)
}

fn build_gold(instance: DesireInstance, rec: &InstanceRecord, ctx: &RecordCtx) -> Result<GoldInstance> {
    let label: FulfillmentLabel = rec
        .label
        .as_deref()
        .ok_or_else(|| ctx.err("Fulfillment-Label", "missing"))?
        .parse()
        .map_err(|e: String| ctx.err("Fulfillment-Label", e))?;
    let agreement_score = rec
        .agreement_score
        .ok_or_else(|| ctx.err("Fulfillment-Agreement-Score", "missing"))?;
    if agreement_score > 3 {
        return Err(ctx.err("Fulfillment-Agreement-Score", "must lie in 0..=3"));
    }
    let overlap_score = rec.overlap_score.unwrap_or(0);
    if overlap_score > 3 {
        return Err(ctx.err("Evidence-Overlap-Score", "must lie in 0..=3"));
    }
    let gold = GoldInstance {
        instance,
        label,
        agreement_score,
        evidence: rec.evidence.clone().unwrap_or_default(),
        overlap_score,
    };
    gold.validate()
        .map_err(|e| ctx.err("Fulfillment-Agreement-Score", e.to_string()))?;
    Ok(gold)
}

fn instance_record(inst: &DesireInstance) -> InstanceRecord {
    InstanceRecord {
        id: Some(inst.id.clone()),
        narrative_id: Some(inst.narrative_id.clone()),
        desire_sentence_index: Some(inst.desire_sentence_index),
        prior_context: inst.prior_context.iter().map(|s| s.text.clone()).collect(),
        desire_sentence: inst.desire_sentence.text.clone(),
        post_context: inst.post_context.iter().map(|s| s.text.clone()).collect(),
        verb_lemma: Some(inst.verb_lemma.clone()),
        pattern_id: Some(inst.pattern_id.clone()),
        match_span: Some([inst.match_span.start, inst.match_span.end]),
        subject_span: inst.subject_span.map(|s| [s.start, s.end]),
        focal_word_indices: Some(inst.focal_word_indices.clone()),
        hypothetical: inst.is_hypothetical,
        label: None,
        agreement_score: None,
        evidence: None,
        overlap_score: None,
    }
}

fn gold_record(gold: &GoldInstance) -> InstanceRecord {
    InstanceRecord {
        label: Some(gold.label.as_str().to_string()),
        agreement_score: Some(gold.agreement_score),
        evidence: Some(gold.evidence.clone()),
        overlap_score: Some(gold.overlap_score),
        ..instance_record(&gold.instance)
    }
}

pub fn write_corpus(records: &Corpus, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    let mut put = |line: String| -> Result<()> {
        w.write_all(line.as_bytes()).map_err(io)?;
        w.write_all(b"\n").map_err(io)
    };
    match records {
        Corpus::Narratives(ns) => {
            for n in ns {
                let rec = NarrativeRecord {
                    id: n.id.clone(),
                    source: n.source.clone(),
                    text: None,
                    sentences: Some(n.sentences.iter().map(|s| s.text.clone()).collect()),
                };
                put(serde_json::to_string(&rec).expect("narrative record serializes"))?;
            }
        }
        Corpus::Instances(is) => {
            for inst in is {
                inst.validate()?;
                put(serde_json::to_string(&instance_record(inst)).expect("record serializes"))?;
            }
        }
        Corpus::Gold(gs) => {
            for g in gs {
                g.validate()?;
                put(serde_json::to_string(&gold_record(g)).expect("record serializes"))?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}
