use std::collections::{BTreeMap, HashMap, HashSet};

use super::{Answer, FactRecord, FactSheet};
use crate::template::Template;
use crate::time::Timestamp;

/// Builds the FactSheet for one subject from raw log records.
///
/// Only records of the given subject whose template shares `template`'s base
/// name are considered, and only those recorded at or before `as_of`. A record
/// is current when no considered record supersedes it; per question the current
/// record with the greatest `(recorded_at, seq)` wins. Records whose question is
/// missing from `template`, or whose value no longer conforms to it, are
/// counted as orphaned.
///
/// Without `as_of` every record counts and the sheet is stamped with the latest
/// `recorded_at` seen (the Unix epoch when there are none).
pub fn assemble(
    records: &[FactRecord],
    subject_id: &str,
    subject_version: &str,
    template: &Template,
    as_of: Option<Timestamp>,
) -> FactSheet {
    let base = template.base_name();
    let relevant: Vec<&FactRecord> = records
        .iter()
        .filter(|r| r.subject_id == subject_id && r.subject_version == subject_version && r.template_ref.name == base)
        .collect();
    let stamp = as_of.unwrap_or_else(|| relevant.iter().map(|r| r.recorded_at).max().unwrap_or_else(Timestamp::epoch));
    let visible: Vec<&FactRecord> = relevant.into_iter().filter(|r| r.recorded_at <= stamp).collect();
    let superseded: HashSet<&str> = visible.iter().filter_map(|r| r.supersedes.as_deref()).collect();

    let specs: HashMap<&str, _> = template.questions().into_iter().map(|q| (q.id.as_str(), &q.answer)).collect();
    let mut best: BTreeMap<&str, &FactRecord> = BTreeMap::new();
    let mut orphaned = 0;
    for r in visible {
        let fits = specs.get(r.question_id.as_str()).is_some_and(|spec| r.value.conforms_to(spec).is_ok());
        if !fits {
            orphaned += 1;
            continue;
        }
        if superseded.contains(r.record_id.as_str()) {
            continue;
        }
        let slot = best.entry(r.question_id.as_str()).or_insert(r);
        if (r.recorded_at, r.seq) > (slot.recorded_at, slot.seq) {
            *slot = r;
        }
    }

    FactSheet {
        subject_id: subject_id.to_string(),
        subject_version: subject_version.to_string(),
        template_ref: template.template_ref(),
        as_of: stamp,
        answers: best
            .into_iter()
            .map(|(q, r)| (q.to_string(), Answer { value: r.value.clone(), provenance: r.provenance() }))
            .collect(),
        orphaned,
    }
}
