//! Gold labels from three crowd annotations per instance, and the
//! agreement statistics over the annotation matrix.
//!
//! Annotation files are tab separated:
//!
//! ```text
//! instance_id  annotator_id  label  evidence  hypothetical
//! ```
//!
//! `evidence` is a `;`-separated list of `<offset>:<start>-<end>` char ranges,
//! where `offset` is the sentence position relative to the desire sentence
//! (`-2`, `0`, `+1`, ...). An empty field or `-` means no evidence.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;
use std::io::BufRead;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{AnnotationRecord, DesireInstance, EvidenceSpan, FulfillmentLabel, GoldInstance};
use crate::{Error, Result};

pub const ANNOTATORS_PER_INSTANCE: usize = 3;

/// Spans covering at least this share of their sentence are widened to the
/// whole sentence.
pub const DEFAULT_SNAP_COVERAGE: f64 = 0.6;

/// Gold label and number of annotators agreeing with it. Three different
/// labels give `(None, 0)`.
pub fn majority_vote(labels: &[FulfillmentLabel]) -> Result<(FulfillmentLabel, u8)> {
    if labels.len() != ANNOTATORS_PER_INSTANCE {
        return Err(Error::Aggregation(format!(
            "majority vote needs {ANNOTATORS_PER_INSTANCE} labels, got {}",
            labels.len()
        )));
    }
    if labels.contains(&FulfillmentLabel::None) {
        return Err(Error::Aggregation("annotators cannot assign None".into()));
    }
    Ok(plurality(labels)
        .map(|(l, n)| (l, n as u8))
        .unwrap_or((FulfillmentLabel::None, 0)))
}

/// The label held by at least two annotators and by more annotators than any
/// other label.
fn plurality<T: Eq + Hash + Clone + Ord>(labels: &[T]) -> Option<(T, usize)> {
    let mut counts: BTreeMap<&T, usize> = BTreeMap::new();
    for l in labels {
        *counts.entry(l).or_default() += 1;
    }
    let max = *counts.values().max()?;
    let mut top = counts.iter().filter(|(_, &n)| n == max);
    let (label, _) = top.next()?;
    if max < 2 || top.next().is_some() {
        return None;
    }
    Some(((*label).clone(), max))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergedEvidence {
    /// Pairwise disjoint, sorted by sentence then start.
    pub spans: Vec<EvidenceSpan>,
    pub texts: Vec<String>,
    /// Number of annotator pairs whose (snapped) spans share a character.
    pub overlap_score: u8,
}

fn snap(span: EvidenceSpan, sentence_len: usize, coverage: f64) -> EvidenceSpan {
    if sentence_len > 0 && (span.end - span.start) as f64 >= coverage * sentence_len as f64 {
        EvidenceSpan {
            sentence: span.sentence,
            start: 0,
            end: sentence_len,
        }
    } else {
        span
    }
}

pub fn merge_evidence(
    inst: &DesireInstance,
    records: &[AnnotationRecord],
    snap_coverage: f64,
) -> Result<MergedEvidence> {
    if records.len() > ANNOTATORS_PER_INSTANCE {
        return Err(Error::Aggregation(format!(
            "instance {}: {} annotations, at most {ANNOTATORS_PER_INSTANCE} allowed",
            inst.id,
            records.len()
        )));
    }
    let mut per_annotator: Vec<Vec<EvidenceSpan>> = Vec::with_capacity(records.len());
    for rec in records {
        let mut spans = Vec::with_capacity(rec.evidence_spans.len());
        for &span in &rec.evidence_spans {
            let sentence = inst.sentence_at(span.sentence).ok_or_else(|| {
                Error::Aggregation(format!(
                    "instance {}: evidence {span} refers to a sentence outside the window",
                    inst.id
                ))
            })?;
            let len = sentence.char_len();
            if span.start >= span.end || span.end > len {
                return Err(Error::Aggregation(format!(
                    "instance {}: evidence {span} exceeds sentence length {len}",
                    inst.id
                )));
            }
            spans.push(snap(span, len, snap_coverage));
        }
        per_annotator.push(spans);
    }

    let mut overlap_score = 0u8;
    for a in 0..per_annotator.len() {
        for b in a + 1..per_annotator.len() {
            let hit = per_annotator[a]
                .iter()
                .any(|x| per_annotator[b].iter().any(|y| x.overlaps(y)));
            overlap_score += hit as u8;
        }
    }

    let mut all: Vec<EvidenceSpan> = per_annotator.into_iter().flatten().collect();
    all.sort();
    let mut spans: Vec<EvidenceSpan> = Vec::new();
    for s in all {
        match spans.last_mut() {
            Some(last) if last.sentence == s.sentence && s.start <= last.end => {
                last.end = last.end.max(s.end);
            }
            _ => spans.push(s),
        }
    }
    let texts = spans
        .iter()
        .map(|s| {
            inst.sentence_at(s.sentence)
                .expect("validated above")
                .slice(s.start, s.end)
        })
        .collect();
    Ok(MergedEvidence {
        spans,
        texts,
        overlap_score,
    })
}

/// Nominal Krippendorff's alpha. Each unit holds the values its coders
/// assigned; `None` marks a missing value. Units with fewer than two values
/// are not pairable and are ignored.
pub fn krippendorff_alpha<T: Eq + Hash + Clone>(units: &[Vec<Option<T>>]) -> Result<f64> {
    let mut categories: HashMap<T, usize> = HashMap::new();
    let mut coded: Vec<Vec<usize>> = Vec::new();
    for unit in units {
        let values: Vec<usize> = unit
            .iter()
            .flatten()
            .map(|v| {
                let next = categories.len();
                *categories.entry(v.clone()).or_insert(next)
            })
            .collect();
        if values.len() >= 2 {
            coded.push(values);
        }
    }
    if coded.len() < 2 {
        return Err(Error::Aggregation(
            "alpha needs at least two units with two or more values".into(),
        ));
    }
    let k = categories.len();
    let mut o = vec![vec![0.0f64; k]; k];
    for values in &coded {
        let w = 1.0 / (values.len() - 1) as f64;
        for (i, &c) in values.iter().enumerate() {
            for (j, &d) in values.iter().enumerate() {
                if i != j {
                    o[c][d] += w;
                }
            }
        }
    }
    let n_c: Vec<f64> = o.iter().map(|row| row.iter().sum()).collect();
    let n: f64 = n_c.iter().sum();
    let mut observed = 0.0;
    let mut expected = 0.0;
    for c in 0..k {
        for d in 0..k {
            if c != d {
                observed += o[c][d];
                expected += n_c[c] * n_c[d];
            }
        }
    }
    if expected == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 - (n - 1.0) * observed / expected)
}

/// Cohen's kappa between two aligned label sequences. When chance agreement
/// is total (both raters use one and the same label) the value is 1.
pub fn cohen_kappa<T: Eq + Hash>(a: &[T], b: &[T]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Aggregation(format!(
            "kappa needs two non-empty sequences of equal length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    let n = a.len() as f64;
    let po = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / n;
    let mut ca: HashMap<&T, f64> = HashMap::new();
    let mut cb: HashMap<&T, f64> = HashMap::new();
    for x in a {
        *ca.entry(x).or_default() += 1.0;
    }
    for y in b {
        *cb.entry(y).or_default() += 1.0;
    }
    let pe: f64 = ca
        .iter()
        .map(|(l, na)| na * cb.get(l).copied().unwrap_or(0.0))
        .sum::<f64>()
        / (n * n);
    if pe >= 1.0 {
        return Ok(1.0);
    }
    Ok((po - pe) / (1.0 - pe))
}

/// Instances × annotator slots. The slot is the position of an annotation
/// among those for its instance, in file order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnnotationMatrix {
    pub instance_ids: Vec<String>,
    pub rows: Vec<Vec<Option<FulfillmentLabel>>>,
}

impl AnnotationMatrix {
    pub fn from_records(records: &[AnnotationRecord]) -> Self {
        let mut order: Vec<String> = Vec::new();
        let mut by_id: HashMap<&str, Vec<Option<FulfillmentLabel>>> = HashMap::new();
        for r in records {
            let row = by_id.entry(r.instance_id.as_str()).or_insert_with(|| {
                order.push(r.instance_id.clone());
                Vec::new()
            });
            row.push(Some(r.label));
        }
        let width = by_id.values().map(Vec::len).max().unwrap_or(0);
        let rows = order
            .iter()
            .map(|id| {
                let mut row = by_id.remove(id.as_str()).expect("grouped above");
                row.resize(width, None);
                row
            })
            .collect();
        Self {
            instance_ids: order,
            rows,
        }
    }

    pub fn from_rows(rows: Vec<Vec<Option<FulfillmentLabel>>>) -> Self {
        Self {
            instance_ids: (0..rows.len()).map(|i| i.to_string()).collect(),
            rows,
        }
    }

    pub fn width(&self) -> usize {
        self.rows.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Majority label per row, `None` where no label has two votes.
    pub fn majority(&self) -> Vec<FulfillmentLabel> {
        self.rows
            .iter()
            .map(|row| {
                let labels: Vec<FulfillmentLabel> = row.iter().flatten().copied().collect();
                plurality(&labels).map_or(FulfillmentLabel::None, |(l, _)| l)
            })
            .collect()
    }
}

/// Mean over annotator slots of Cohen's kappa against the majority label.
/// Rows whose majority is None are left out.
pub fn kappa_vs_majority(matrix: &AnnotationMatrix) -> Result<f64> {
    let gold = matrix.majority();
    let mut kappas = Vec::new();
    for slot in 0..matrix.width() {
        let (a, g): (Vec<FulfillmentLabel>, Vec<FulfillmentLabel>) = matrix
            .rows
            .iter()
            .zip(&gold)
            .filter(|(_, g)| **g != FulfillmentLabel::None)
            .filter_map(|(row, g)| row.get(slot).copied().flatten().map(|l| (l, *g)))
            .unzip();
        if !a.is_empty() {
            kappas.push(cohen_kappa(&a, &g)?);
        }
    }
    if kappas.is_empty() {
        return Err(Error::Aggregation("no rows with a majority label".into()));
    }
    Ok(kappas.iter().sum::<f64>() / kappas.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub instances: usize,
    pub krippendorff_alpha_pairwise: f64,
    pub mean_kappa_vs_majority: f64,
    pub total_agreement_rate: f64,
    pub two_one_rate: f64,
    /// Among instances whose majority label is the key, the share with
    /// unanimous agreement.
    pub per_label_total_agreement: BTreeMap<String, f64>,
    pub gold_label_counts: BTreeMap<String, usize>,
}

pub fn agreement_report(matrix: &AnnotationMatrix) -> Result<AgreementReport> {
    if matrix.rows.is_empty() {
        return Err(Error::Aggregation("empty annotation matrix".into()));
    }
    let gold = matrix.majority();
    let n = matrix.rows.len() as f64;
    let mut unanimous = 0usize;
    let mut two_one = 0usize;
    let mut per_label: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for (row, g) in matrix.rows.iter().zip(&gold) {
        let labels: Vec<FulfillmentLabel> = row.iter().flatten().copied().collect();
        let all_same = labels.len() >= 2 && labels.iter().all(|l| *l == labels[0]);
        *counts.entry(g.to_string()).or_default() += 1;
        if all_same {
            unanimous += 1;
        } else if *g != FulfillmentLabel::None {
            two_one += 1;
        }
        if *g != FulfillmentLabel::None {
            let e = per_label.entry(g.to_string()).or_default();
            e.0 += all_same as usize;
            e.1 += 1;
        }
    }
    Ok(AgreementReport {
        instances: matrix.rows.len(),
        krippendorff_alpha_pairwise: krippendorff_alpha(&matrix.rows)?,
        mean_kappa_vs_majority: kappa_vs_majority(matrix)?,
        total_agreement_rate: unanimous as f64 / n,
        two_one_rate: two_one as f64 / n,
        per_label_total_agreement: per_label
            .into_iter()
            .map(|(l, (u, t))| (l, u as f64 / t as f64))
            .collect(),
        gold_label_counts: counts,
    })
}

impl AgreementReport {
    pub fn summary(&self) -> String {
        let mut s = format!(
            "instances: {}\nKrippendorff alpha: {:.4}\nmean kappa vs majority: {:.4}\n\
             total agreement: {:.4}\n2-1 agreement: {:.4}\n",
            self.instances,
            self.krippendorff_alpha_pairwise,
            self.mean_kappa_vs_majority,
            self.total_agreement_rate,
            self.two_one_rate
        );
        for (label, rate) in &self.per_label_total_agreement {
            s.push_str(&format!("total agreement within {label}: {rate:.4}\n"));
        }
        s
    }
}

/// Gold instances for every annotated instance, in input order. Instances
/// without annotations are skipped; annotations for unknown instances are
/// an error.
pub fn aggregate(
    instances: &[DesireInstance],
    records: &[AnnotationRecord],
    snap_coverage: f64,
) -> Result<Vec<GoldInstance>> {
    let mut grouped: HashMap<&str, Vec<AnnotationRecord>> = HashMap::new();
    for r in records {
        grouped.entry(r.instance_id.as_str()).or_default().push(r.clone());
    }
    let known: HashMap<&str, ()> = instances.iter().map(|i| (i.id.as_str(), ())).collect();
    if let Some(r) = records.iter().find(|r| !known.contains_key(r.instance_id.as_str())) {
        return Err(Error::Aggregation(format!(
            "annotation for unknown instance {}",
            r.instance_id
        )));
    }
    instances
        .par_iter()
        .filter_map(|inst| grouped.get(inst.id.as_str()).map(|recs| (inst, recs)))
        .map(|(inst, recs)| {
            let labels: Vec<FulfillmentLabel> = recs.iter().map(|r| r.label).collect();
            let (label, agreement_score) = majority_vote(&labels)
                .map_err(|e| Error::Aggregation(format!("instance {}: {e}", inst.id)))?;
            let merged = merge_evidence(inst, recs, snap_coverage)?;
            let hypothetical = recs.iter().filter(|r| r.hypothetical).count();
            let mut instance = inst.clone();
            instance.is_hypothetical = Some(hypothetical * 2 > recs.len());
            Ok(GoldInstance {
                instance,
                label,
                agreement_score,
                evidence: merged.texts,
                overlap_score: merged.overlap_score,
            })
        })
        .collect()
}

pub fn read_annotations(path: &Path) -> Result<Vec<AnnotationRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path.display().to_string();
    let mut out = Vec::new();
    for (n, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') || (n == 0 && line.starts_with("instance_id")) {
            continue;
        }
        out.push(parse_annotation_line(line).map_err(|(field, msg)| Error::record(&name, n + 1, field, msg))?);
    }
    Ok(out)
}

fn parse_annotation_line(line: &str) -> std::result::Result<AnnotationRecord, (&'static str, String)> {
    let f: Vec<&str> = line.split('\t').collect();
    if f.len() != 5 {
        return Err(("line", format!("expected 5 tab-separated fields, got {}", f.len())));
    }
    let label: FulfillmentLabel = f[2].parse().map_err(|e| ("label", e))?;
    if label == FulfillmentLabel::None {
        return Err(("label", "annotators cannot assign None".into()));
    }
    let evidence = f[3].trim();
    let evidence_spans = if evidence.is_empty() || evidence == "-" {
        Vec::new()
    } else {
        evidence
            .split(';')
            .map(|s| s.parse::<EvidenceSpan>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| ("evidence", e))?
    };
    let hypothetical = match f[4].trim() {
        "0" => false,
        "1" => true,
        other => return Err(("hypothetical", format!("expected 0 or 1, got {other:?}"))),
    };
    Ok(AnnotationRecord {
        instance_id: f[0].trim().to_string(),
        annotator_id: f[1].trim().to_string(),
        label,
        evidence_spans,
        subject_marked: None,
        hypothetical,
    })
}
