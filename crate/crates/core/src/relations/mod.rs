//! Recognition, causal and descendance relations, built state by state.
//!
//! Entities are numbered in creation order (state by state, canonical order
//! inside a state), so every relation edge points from a smaller id to a
//! larger one and per-entity predecessor sets fit in bitsets of length `id`.

mod batch;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::ops::Range;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::multiset::Multiset;
use crate::observer::{
    canonical_structures, CharacterVector, DistanceVector, Entity, MutationBounds, ObserverError,
    Recognizer, Tag,
};
use crate::probe::{Counter, Probe};
use crate::trace::{Atom, Run};

pub use batch::build_batch;

pub type EntityId = u32;
pub type Edge = (EntityId, EntityId);

/// The six relations plus the closure they are derived from. Every list is
/// sorted and duplicate free.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RelationSet {
    pub recognition: Vec<Edge>,
    pub causal: Vec<Edge>,
    pub delta: Vec<Edge>,
    pub closure: Vec<Edge>,
    pub ancestor_of: Vec<Edge>,
    pub parent_delta: Vec<Edge>,
    pub parent_delta_min: Vec<Edge>,
}

/// Greedy injective matching between consecutive entity sets: candidates
/// within `delta_mut` are taken in order of (distance, source, target).
pub fn match_recognition<R: Recognizer>(
    rec: &R,
    bounds: &MutationBounds,
    probe: &Probe,
    sources: &[(EntityId, &R::Features)],
    targets: &[(EntityId, &R::Features)],
) -> Vec<Edge> {
    let mut candidates: Vec<(DistanceVector, EntityId, EntityId)> = Vec::new();
    for &(a, fa) in sources {
        for &(b, fb) in targets {
            probe.tick(Counter::RecognitionTests);
            probe.tick(Counter::DistanceEvaluations);
            let d = rec.distance(fa, fb);
            if d.within(&bounds.delta_mut, rec.space()) {
                candidates.push((d, a, b));
            }
        }
    }
    candidates.sort_by(|x, y| x.0.lex_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut used_src = BTreeSet::new();
    let mut used_dst = BTreeSet::new();
    let mut edges = Vec::new();
    for (_, a, b) in candidates {
        if !used_src.contains(&a) && !used_dst.contains(&b) {
            used_src.insert(a);
            used_dst.insert(b);
            edges.push((a, b));
        }
    }
    edges.sort_unstable();
    edges
}

/// Causal edges between consecutive entity sets, skipping targets that are
/// already recognized continuations of something.
pub fn match_causal<R: Recognizer>(
    rec: &R,
    probe: &Probe,
    sources: &[(EntityId, &R::Features)],
    targets: &[(EntityId, &R::Features)],
    recognized: &BTreeSet<EntityId>,
) -> Vec<Edge> {
    let mut edges = Vec::new();
    for &(b, fb) in targets {
        if recognized.contains(&b) {
            continue;
        }
        for &(a, fa) in sources {
            probe.tick(Counter::CausalTests);
            if rec.causal(fa, fb) {
                edges.push((a, b));
            }
        }
    }
    edges.sort_unstable();
    edges
}

/// Transitive closure by breadth-first search from every node. Pairs
/// `(a, a)` appear only when `a` lies on a cycle.
pub fn transitive_closure(edges: &[Edge]) -> Vec<Edge> {
    let mut adj: BTreeMap<EntityId, Vec<EntityId>> = BTreeMap::new();
    for &(a, b) in edges {
        adj.entry(a).or_default().push(b);
    }
    let mut out = Vec::new();
    for &start in adj.keys() {
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<EntityId> = adj[&start].iter().copied().collect();
        while let Some(v) = queue.pop_front() {
            if seen.insert(v) {
                if let Some(next) = adj.get(&v) {
                    queue.extend(next.iter().copied());
                }
            }
        }
        out.extend(seen.into_iter().map(|v| (start, v)));
    }
    out
}

fn bitset_with(len: usize) -> FixedBitSet {
    FixedBitSet::with_capacity(len)
}

fn column_edges(cols: &[FixedBitSet]) -> Vec<Edge> {
    cols.iter()
        .enumerate()
        .flat_map(|(c, col)| col.ones().map(move |p| (p as EntityId, c as EntityId)))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Incremental construction of all relations, one state at a time.
pub struct RelationBuilder<'r, R: Recognizer> {
    rec: &'r R,
    bounds: MutationBounds,
    probe: &'r Probe,
    run: Arc<str>,
    entities: Vec<Entity>,
    features: Vec<R::Features>,
    states: Vec<Range<usize>>,
    rec_pred: Vec<Option<EntityId>>,
    causal_pred: Vec<Vec<EntityId>>,
    lineage: Vec<EntityId>,
    recognition: Vec<Edge>,
    causal: Vec<Edge>,
    /// Column `c` holds every `p` with `p (C ∪ R)⁺ c`.
    closure: Vec<FixedBitSet>,
    delta: Vec<FixedBitSet>,
    ancestor: Vec<FixedBitSet>,
    parent: Vec<FixedBitSet>,
}

impl<'r, R: Recognizer> RelationBuilder<'r, R> {
    pub fn new(
        run: &str,
        rec: &'r R,
        bounds: MutationBounds,
        probe: &'r Probe,
    ) -> Result<Self, ObserverError> {
        bounds.check(rec.space())?;
        Ok(Self {
            rec,
            bounds,
            probe,
            run: run.into(),
            entities: Vec::new(),
            features: Vec::new(),
            states: Vec::new(),
            rec_pred: Vec::new(),
            causal_pred: Vec::new(),
            lineage: Vec::new(),
            recognition: Vec::new(),
            causal: Vec::new(),
            closure: Vec::new(),
            delta: Vec::new(),
            ancestor: Vec::new(),
            parent: Vec::new(),
        })
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    /// Adds the entities of the next state and extends every relation.
    pub fn push_structures(&mut self, structures: Vec<Multiset<Atom>>) {
        let state = self.states.len();
        let start = self.entities.len();
        for (ordinal, structure) in canonical_structures(structures).into_iter().enumerate() {
            let f = self.rec.features(&structure);
            let characters = self.rec.characterize(&f);
            self.entities.push(Entity {
                tag: Tag {
                    run: self.run.clone(),
                    state,
                    ordinal,
                },
                structure: Arc::new(structure),
                characters,
            });
            self.features.push(f);
        }
        let end = self.entities.len();
        self.states.push(start..end);

        let current: Vec<(EntityId, &R::Features)> = (start..end)
            .map(|i| (i as EntityId, &self.features[i]))
            .collect();
        let (rec_edges, causal_edges) = if state == 0 {
            (Vec::new(), Vec::new())
        } else {
            let prev_range = self.states[state - 1].clone();
            let previous: Vec<(EntityId, &R::Features)> = prev_range
                .map(|i| (i as EntityId, &self.features[i]))
                .collect();
            let r = match_recognition(self.rec, &self.bounds, self.probe, &previous, &current);
            let targets: BTreeSet<EntityId> = r.iter().map(|e| e.1).collect();
            let c = match_causal(self.rec, self.probe, &previous, &current, &targets);
            (r, c)
        };

        for i in start..end {
            self.rec_pred.push(None);
            self.causal_pred.push(Vec::new());
            self.lineage.push(i as EntityId);
        }
        for &(a, b) in &rec_edges {
            self.rec_pred[b as usize] = Some(a);
            self.lineage[b as usize] = self.lineage[a as usize];
        }
        for &(a, b) in &causal_edges {
            self.causal_pred[b as usize].push(a);
        }
        self.recognition.extend(rec_edges);
        self.causal.extend(causal_edges);

        for c in start..end {
            self.extend_closure(c);
        }
        let deltas: Vec<FixedBitSet> = (start..end)
            .into_par_iter()
            .map(|c| self.delta_column(c, start))
            .collect();
        for (c, col) in (start..end).zip(deltas) {
            let mut anc = col.clone();
            anc.intersect_with(&self.closure[c]);
            let mut covered = bitset_with(c);
            for e in anc.ones() {
                covered.union_with(&self.ancestor[e]);
            }
            let mut parent = anc.clone();
            parent.difference_with(&covered);
            self.delta.push(col);
            self.ancestor.push(anc);
            self.parent.push(parent);
        }
        self.probe.snapshot();
    }

    fn extend_closure(&mut self, c: usize) {
        let mut col = bitset_with(c);
        let preds = self.rec_pred[c]
            .into_iter()
            .chain(self.causal_pred[c].iter().copied());
        for u in preds {
            let u = u as usize;
            self.probe.add(
                Counter::ClosureRelaxations,
                1 + self.closure[u].count_ones(..) as u64,
            );
            col.insert(u);
            col.union_with(&self.closure[u]);
        }
        self.closure.push(col);
    }

    /// Δ predecessors of `c` among entities `0..earlier` (all in strictly
    /// earlier states): within the reproductive bound and not an earlier
    /// stage of `c`'s own recognition chain.
    fn delta_column(&self, c: usize, earlier: usize) -> FixedBitSet {
        let mut col = bitset_with(c);
        let fc = &self.features[c];
        for p in 0..earlier {
            if self.lineage[p] == self.lineage[c] {
                continue;
            }
            if self
                .rec
                .distance(&self.features[p], fc)
                .within(&self.bounds.delta_rep_mut, self.rec.space())
            {
                col.insert(p);
            }
        }
        self.probe.add(Counter::DeltaTests, earlier as u64);
        self.probe.add(Counter::DistanceEvaluations, earlier as u64);
        col
    }

    pub fn finish(self) -> Observation<'r, R> {
        let parent_delta = column_edges(&self.parent);
        let parent_delta_min = minimal_pairs(&parent_delta, &self.lineage);
        let relations = RelationSet {
            recognition: self.recognition,
            causal: self.causal,
            delta: column_edges(&self.delta),
            closure: column_edges(&self.closure),
            ancestor_of: column_edges(&self.ancestor),
            parent_delta,
            parent_delta_min,
        };
        Observation {
            rec: self.rec,
            bounds: self.bounds,
            entities: self.entities,
            features: self.features,
            states: self.states,
            lineage: self.lineage,
            rec_pred: self.rec_pred,
            relations,
        }
    }
}

/// Keeps `(p, c)` only when no parent-slot entity precedes `p` and no
/// child-slot entity precedes `c` in their recognition chains.
pub(crate) fn minimal_pairs(pairs: &[Edge], lineage: &[EntityId]) -> Vec<Edge> {
    let mut first_parent: BTreeMap<EntityId, EntityId> = BTreeMap::new();
    let mut first_child: BTreeMap<EntityId, EntityId> = BTreeMap::new();
    for &(p, c) in pairs {
        let fp = first_parent.entry(lineage[p as usize]).or_insert(p);
        *fp = (*fp).min(p);
        let fc = first_child.entry(lineage[c as usize]).or_insert(c);
        *fc = (*fc).min(c);
    }
    pairs
        .iter()
        .copied()
        .filter(|&(p, c)| {
            first_parent[&lineage[p as usize]] == p && first_child[&lineage[c as usize]] == c
        })
        .collect()
}

/// Recognizes entities in every state of a run and builds all relations.
pub fn observe<'r, R: Recognizer>(
    run: &Run,
    rec: &'r R,
    bounds: MutationBounds,
    probe: &'r Probe,
) -> Result<Observation<'r, R>, ObserverError> {
    if run.is_empty() {
        return Err(ObserverError::EmptyRun);
    }
    let extracted: Vec<Result<Vec<Multiset<Atom>>, ObserverError>> = run
        .states
        .par_iter()
        .enumerate()
        .map(|(k, s)| {
            rec.extract(s, probe)
                .map_err(|message| ObserverError::RecognizerFailure { state: k, message })
        })
        .collect();
    let mut builder = RelationBuilder::new(&run.id, rec, bounds, probe)?;
    for structures in extracted {
        builder.push_structures(structures?);
    }
    Ok(builder.finish())
}

/// Entities, their features and the finished relations of one run.
pub struct Observation<'r, R: Recognizer> {
    pub rec: &'r R,
    pub bounds: MutationBounds,
    pub entities: Vec<Entity>,
    pub features: Vec<R::Features>,
    pub states: Vec<Range<usize>>,
    /// Root of each entity's recognition chain.
    pub lineage: Vec<EntityId>,
    pub rec_pred: Vec<Option<EntityId>>,
    pub relations: RelationSet,
}

impl<R: Recognizer> Observation<'_, R> {
    pub fn distance(&self, a: EntityId, b: EntityId) -> DistanceVector {
        self.rec
            .distance(&self.features[a as usize], &self.features[b as usize])
    }

    pub fn state_of(&self, e: EntityId) -> usize {
        self.entities[e as usize].tag.state
    }

    pub fn tag(&self, e: EntityId) -> &Tag {
        &self.entities[e as usize].tag
    }

    pub fn characters(&self, e: EntityId) -> &CharacterVector {
        &self.entities[e as usize].characters
    }

    pub fn entity_sets(&self) -> Vec<Vec<Entity>> {
        self.states
            .iter()
            .map(|r| self.entities[r.clone()].to_vec())
            .collect()
    }

    /// `a R⁺ b`: `a` is a strictly earlier stage of `b`'s recognition chain.
    pub fn recognized_before(&self, a: EntityId, b: EntityId) -> bool {
        a < b && self.lineage[a as usize] == self.lineage[b as usize]
    }

    /// Pairs in Δ joined by a path of recognition steps around exactly one
    /// causal edge. An alternative reading of the immediate-parent relation,
    /// reported next to it for comparison.
    pub fn parent_delta_alternative(&self) -> Vec<Edge> {
        let mut chains: BTreeMap<EntityId, Vec<EntityId>> = BTreeMap::new();
        for (e, &root) in self.lineage.iter().enumerate() {
            chains.entry(root).or_default().push(e as EntityId);
        }
        let delta: BTreeSet<Edge> = self.relations.delta.iter().copied().collect();
        let mut out = BTreeSet::new();
        for &(a, b) in &self.relations.causal {
            let chain_a = &chains[&self.lineage[a as usize]];
            let chain_b = &chains[&self.lineage[b as usize]];
            for &p in chain_a.iter().filter(|&&p| p <= a) {
                for &c in chain_b.iter().filter(|&&c| c >= b) {
                    if delta.contains(&(p, c)) {
                        out.insert((p, c));
                    }
                }
            }
        }
        out.into_iter().collect()
    }

    pub fn tag_pairs(&self, edges: &[Edge]) -> Vec<(String, String)> {
        edges
            .iter()
            .map(|&(a, b)| (self.tag(a).to_string(), self.tag(b).to_string()))
            .collect()
    }

    /// All six relations as arrays of tag pairs.
    pub fn dump(&self) -> Value {
        let r = &self.relations;
        json!({
            "recognition": self.tag_pairs(&r.recognition),
            "causal": self.tag_pairs(&r.causal),
            "delta": self.tag_pairs(&r.delta),
            "ancestorOf": self.tag_pairs(&r.ancestor_of),
            "parentDelta": self.tag_pairs(&r.parent_delta),
            "parentDeltaMin": self.tag_pairs(&r.parent_delta_min),
        })
    }

    pub fn entity_table(&self) -> Vec<EntityRow> {
        self.entities
            .iter()
            .map(|e| EntityRow {
                tag: e.tag.to_string(),
                state: e.tag.state,
                size: e.structure.size(),
                characters: e.characters.clone(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EntityRow {
    pub tag: String,
    pub state: usize,
    pub size: u64,
    pub characters: CharacterVector,
}

#[cfg(test)]
mod tests;
