//! Entity recognition: the character space, distance vectors, mutation
//! bounds, the [`Recognizer`] strategy interface, and the consistency axioms
//! every recognizer output must satisfy.

pub mod recognizers;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::multiset::Multiset;
use crate::probe::{Counter, Probe};
use crate::trace::{Atom, Run, State};
use crate::verdict::Verdict;

pub use recognizers::{
    ExhaustiveRecognizer, GeometryMode, GridFeatures, GridRecognizer, TokenFeatures,
    TokenRecognizer,
};

#[derive(Debug, Error)]
pub enum ObserverError {
    #[error("recognizer failed on state {state}: {message}")]
    RecognizerFailure { state: usize, message: String },
    #[error("dimension mismatch: expected {expected} components, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cannot recognize entities in an empty run")]
    EmptyRun,
}

/// One axis of the character space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharacterDimension {
    pub name: String,
    /// Whether differences on this axis are compared against mutation bounds.
    pub ordered: bool,
    /// Whether character values are numbers usable in population statistics.
    pub numeric: bool,
    /// Identity axes (pivots, loci, developmental stage) describe where or
    /// when an entity is rather than what it inherited; they are left out of
    /// heredity, variation and correlation.
    pub heritable: bool,
}

impl CharacterDimension {
    pub fn numeric(name: &str) -> Self {
        Self {
            name: name.into(),
            ordered: true,
            numeric: true,
            heritable: true,
        }
    }

    pub fn symbolic(name: &str) -> Self {
        Self {
            name: name.into(),
            ordered: true,
            numeric: false,
            heritable: true,
        }
    }

    pub fn identity(mut self) -> Self {
        self.heritable = false;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharacterSpace {
    pub dims: Vec<CharacterDimension>,
}

impl CharacterSpace {
    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.dims.iter().position(|d| d.name == name)
    }

    pub fn heritable(&self) -> impl Iterator<Item = usize> + '_ {
        self.dims
            .iter()
            .enumerate()
            .filter(|(_, d)| d.heritable)
            .map(|(i, _)| i)
    }
}

/// A character value; `Absent` is the zero element of its axis.
#[derive(Debug, Clone, PartialEq)]
pub enum CharValue {
    Absent,
    Num(f64),
    Sym(String),
}

impl CharValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            CharValue::Num(v) => Some(*v),
            _ => None,
        }
    }
}

impl Serialize for CharValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            CharValue::Absent => s.serialize_none(),
            CharValue::Num(v) => s.serialize_f64(*v),
            CharValue::Sym(v) => s.serialize_str(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct CharacterVector(pub Vec<CharValue>);

/// Per-axis differences. Every axis uses nonnegative reals with the usual
/// order, zero being `0_diff`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DistanceVector(pub Vec<f64>);

impl DistanceVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&d| d == 0.0)
    }

    /// `0 ⪯ d[i] ⪯ bound[i]` on every ordered axis.
    pub fn within(&self, bound: &DistanceVector, space: &CharacterSpace) -> bool {
        self.0
            .iter()
            .zip(&bound.0)
            .zip(&space.dims)
            .all(|((&d, &b), dim)| !dim.ordered || (0.0..=b).contains(&d))
    }

    /// Lexicographic comparison in canonical axis order.
    pub fn lex_cmp(&self, other: &DistanceVector) -> std::cmp::Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.total_cmp(b) {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MutationBounds {
    pub delta_mut: DistanceVector,
    pub delta_rep_mut: DistanceVector,
}

impl MutationBounds {
    pub fn check(&self, space: &CharacterSpace) -> Result<(), ObserverError> {
        for v in [&self.delta_mut, &self.delta_rep_mut] {
            if v.0.len() != space.len() {
                return Err(ObserverError::DimensionMismatch {
                    expected: space.len(),
                    got: v.0.len(),
                });
            }
        }
        Ok(())
    }
}

/// A recognition strategy. Everything the observer knows about entities
/// comes through this interface; implementations must be deterministic.
pub trait Recognizer: Sync {
    /// Precomputed per-entity data the other operations work from.
    type Features: Send + Sync;

    fn name(&self) -> &'static str;

    fn space(&self) -> &CharacterSpace;

    fn default_bounds(&self) -> MutationBounds;

    /// Selects entity structures from a state. Order does not matter; the
    /// observer sorts them canonically.
    fn extract(&self, state: &State, probe: &Probe) -> Result<Vec<Multiset<Atom>>, String>;

    fn features(&self, structure: &Multiset<Atom>) -> Self::Features;

    fn characterize(&self, features: &Self::Features) -> CharacterVector;

    fn distance(&self, a: &Self::Features, b: &Self::Features) -> DistanceVector;

    /// Whether `child` (observed one state after `parent`) broke off from it.
    fn causal(&self, parent: &Self::Features, child: &Self::Features) -> bool;
}

/// `runId:stateIndex:ordinal`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tag {
    pub run: Arc<str>,
    pub state: usize,
    pub ordinal: usize,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.run, self.state, self.ordinal)
    }
}

impl Serialize for Tag {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone)]
pub struct Entity {
    pub tag: Tag,
    pub structure: Arc<Multiset<Atom>>,
    pub characters: CharacterVector,
}

impl Entity {
    pub fn state(&self) -> usize {
        self.tag.state
    }
}

pub type EntitySet = Vec<Entity>;

/// Canonically ordered structures for one state.
pub fn canonical_structures(mut structures: Vec<Multiset<Atom>>) -> Vec<Multiset<Atom>> {
    structures.sort();
    structures
}

/// Recognizes entities in every state of a run. Extraction runs in parallel;
/// tags are assigned afterwards in canonical structure order.
pub fn recognize<R: Recognizer>(
    run: &Run,
    rec: &R,
    probe: &Probe,
) -> Result<Vec<EntitySet>, ObserverError> {
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
    let run_id: Arc<str> = run.id.as_str().into();
    let mut sets = Vec::with_capacity(run.len());
    for (k, structures) in extracted.into_iter().enumerate() {
        sets.push(tag_state(&run_id, k, structures?, rec));
    }
    Ok(sets)
}

pub(crate) fn tag_state<R: Recognizer>(
    run: &Arc<str>,
    state: usize,
    structures: Vec<Multiset<Atom>>,
    rec: &R,
) -> EntitySet {
    canonical_structures(structures)
        .into_iter()
        .enumerate()
        .map(|(ordinal, structure)| {
            let characters = rec.characterize(&rec.features(&structure));
            Entity {
                tag: Tag {
                    run: run.clone(),
                    state,
                    ordinal,
                },
                structure: Arc::new(structure),
                characters,
            }
        })
        .collect()
}

/// `D(e, e')` computed from the entities' structures.
pub fn distance<R: Recognizer>(
    rec: &R,
    a: &Entity,
    b: &Entity,
) -> Result<DistanceVector, ObserverError> {
    let n = rec.space().len();
    for e in [a, b] {
        if e.characters.0.len() != n {
            return Err(ObserverError::DimensionMismatch {
                expected: n,
                got: e.characters.0.len(),
            });
        }
    }
    Ok(rec.distance(&rec.features(&a.structure), &rec.features(&b.structure)))
}

/// Axiom of unique identification of entities: within each state, equal tags
/// imply the same entity.
pub fn check_unique_tagging(sets: &[EntitySet]) -> Verdict {
    for set in sets {
        let mut seen: BTreeMap<&Tag, &Entity> = BTreeMap::new();
        for e in set {
            if let Some(prev) = seen.insert(&e.tag, e) {
                if prev.structure != e.structure {
                    return Verdict::new("unique_tagging", false)
                        .with("state", e.state())
                        .with("tag", &e.tag)
                        .with(
                            "witness",
                            [prev.structure.to_string(), e.structure.to_string()],
                        );
                }
            }
        }
    }
    Verdict::new("unique_tagging", true).with("states", sets.len())
}

fn structure_multiset(set: &EntitySet) -> Multiset<Arc<Multiset<Atom>>> {
    set.iter().map(|e| e.structure.clone()).collect()
}

/// Axiom of unique identification in states: equal states carry equal entity
/// sets (compared by structure, tags being state local).
pub fn check_state_consistency(run: &Run, sets: &[EntitySet], probe: &Probe) -> Verdict {
    let mut first_seen: HashMap<&Multiset<Atom>, usize> = HashMap::new();
    let mut repeats = 0usize;
    for (k, state) in run.states.iter().enumerate() {
        match first_seen.get(&state.contents) {
            Some(&j) => {
                repeats += 1;
                probe.tick(Counter::EntityComparisons);
                if structure_multiset(&sets[j]) != structure_multiset(&sets[k]) {
                    return Verdict::new("state_consistency", false).with("states", [j, k]);
                }
            }
            None => {
                first_seen.insert(&state.contents, k);
            }
        }
    }
    let v = Verdict::new("state_consistency", true).with("repeated_states", repeats);
    if repeats == 0 {
        v.note("no repeated states; vacuous")
    } else {
        v
    }
}

/// Axiom of non-ignorance for one pair of states. Applies only when `s` is
/// a proper sub-multiset of `s'`; entity identity is structure equality and
/// the final comparison is between multisets of structures.
pub fn check_non_ignorance(
    s: &State,
    s_prime: &State,
    e_s: &EntitySet,
    e_s_prime: &EntitySet,
) -> Verdict {
    if !s.contents.is_proper_subset(&s_prime.contents) {
        return Verdict::new("non_ignorance", true).note("antecedent false");
    }
    let mut e_in = Vec::new();
    let mut overlap = Vec::new();
    for e in e_s_prime {
        if e.structure.is_subset(&s.contents) {
            e_in.push(e.structure.clone());
        } else if e.structure.intersects(&s.contents) {
            overlap.push(e.structure.clone());
        }
    }
    let kept: Multiset<Arc<Multiset<Atom>>> = e_s
        .iter()
        .filter(|e| !overlap.iter().any(|o| o.intersects(&e.structure)))
        .map(|e| e.structure.clone())
        .collect();
    let e_in: Multiset<Arc<Multiset<Atom>>> = e_in.into_iter().collect();
    if kept == e_in {
        Verdict::new("non_ignorance", true)
    } else {
        let missing: Vec<String> = e_in
            .difference(&kept)
            .elements()
            .map(|m| m.to_string())
            .collect();
        let extra: Vec<String> = kept
            .difference(&e_in)
            .elements()
            .map(|m| m.to_string())
            .collect();
        Verdict::new("non_ignorance", false)
            .with("states", [s.id, s_prime.id])
            .with("omitted_in_smaller_state", missing)
            .with("unmatched_in_smaller_state", extra)
    }
}

/// Non-ignorance over every nested pair of states in a run.
pub fn check_non_ignorance_run(run: &Run, sets: &[EntitySet], probe: &Probe) -> Verdict {
    let sizes: Vec<u64> = run.states.iter().map(State::size).collect();
    let mut nested = 0usize;
    for (i, s) in run.states.iter().enumerate() {
        for (j, s2) in run.states.iter().enumerate() {
            if sizes[i] >= sizes[j] {
                continue;
            }
            probe.tick(Counter::EntityComparisons);
            if !s.contents.is_subset(&s2.contents) {
                continue;
            }
            nested += 1;
            let v = check_non_ignorance(s, s2, &sets[i], &sets[j]);
            if !v.passed {
                return v.with("state_indices", [i, j]);
            }
        }
    }
    Verdict::new("non_ignorance", true).with("nested_pairs", nested)
}

/// Runs all three recognition axioms, returning the first failure if any.
pub fn check_recognition_axioms(run: &Run, sets: &[EntitySet], probe: &Probe) -> Vec<Verdict> {
    vec![
        check_unique_tagging(sets),
        check_state_consistency(run, sets, probe),
        check_non_ignorance_run(run, sets, probe),
    ]
}
