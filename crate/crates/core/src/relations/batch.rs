//! Whole-trace construction straight from the definitions. Slow; used to
//! check the incremental builder.

use std::collections::BTreeSet;

use super::{match_causal, match_recognition, transitive_closure, Edge, EntityId, RelationSet};
use crate::multiset::Multiset;
use crate::observer::{canonical_structures, MutationBounds, Recognizer};
use crate::probe::Probe;
use crate::trace::Atom;

pub fn build_batch<R: Recognizer>(
    rec: &R,
    bounds: &MutationBounds,
    states: &[Vec<Multiset<Atom>>],
) -> RelationSet {
    let probe = Probe::disabled();
    let mut features = Vec::new();
    let mut state_of = Vec::new();
    let mut ranges = Vec::new();
    for (k, structures) in states.iter().enumerate() {
        let start = features.len();
        for s in canonical_structures(structures.clone()) {
            features.push(rec.features(&s));
            state_of.push(k);
        }
        ranges.push(start..features.len());
    }

    let mut recognition = Vec::new();
    let mut causal = Vec::new();
    for k in 1..ranges.len() {
        let prev: Vec<(EntityId, &R::Features)> = ranges[k - 1]
            .clone()
            .map(|i| (i as EntityId, &features[i]))
            .collect();
        let cur: Vec<(EntityId, &R::Features)> = ranges[k]
            .clone()
            .map(|i| (i as EntityId, &features[i]))
            .collect();
        let r = match_recognition(rec, bounds, &probe, &prev, &cur);
        let targets: BTreeSet<EntityId> = r.iter().map(|e| e.1).collect();
        causal.extend(match_causal(rec, &probe, &prev, &cur, &targets));
        recognition.extend(r);
    }

    let recognition_plus: BTreeSet<Edge> = transitive_closure(&recognition).into_iter().collect();
    let mut c_or_r: Vec<Edge> = recognition.iter().chain(&causal).copied().collect();
    c_or_r.sort_unstable();
    let closure = transitive_closure(&c_or_r);

    let n = features.len();
    let mut delta = Vec::new();
    for p in 0..n {
        for c in 0..n {
            let edge = (p as EntityId, c as EntityId);
            if state_of[c] > state_of[p]
                && !recognition_plus.contains(&edge)
                && rec
                    .distance(&features[p], &features[c])
                    .within(&bounds.delta_rep_mut, rec.space())
            {
                delta.push(edge);
            }
        }
    }
    let delta_set: BTreeSet<Edge> = delta.iter().copied().collect();
    let ancestor_of: Vec<Edge> = closure
        .iter()
        .copied()
        .filter(|e| delta_set.contains(e))
        .collect();
    let anc_set: BTreeSet<Edge> = ancestor_of.iter().copied().collect();

    let parent_delta: Vec<Edge> = ancestor_of
        .iter()
        .copied()
        .filter(|&(p, c)| {
            !(0..n as EntityId).any(|e| anc_set.contains(&(p, e)) && anc_set.contains(&(e, c)))
        })
        .collect();
    let parent_delta_min: Vec<Edge> = parent_delta
        .iter()
        .copied()
        .filter(|&(p, c)| {
            !parent_delta.iter().any(|&(p2, c2)| {
                recognition_plus.contains(&(p2, p)) || recognition_plus.contains(&(c2, c))
            })
        })
        .collect();

    RelationSet {
        recognition,
        causal,
        delta,
        closure,
        ancestor_of,
        parent_delta,
        parent_delta_min,
    }
}
