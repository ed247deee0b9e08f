//! Axiom checks for reproduction, fecundity, heredity and natural selection
//! over a finished [`Observation`].
//!
//! Several checks reason about whole recognition chains ("lineages") rather
//! than single per-state entities: a loop observed in 150 states is one
//! reproducer, not 150.

pub mod clique;
pub mod stats;

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::observer::{CharValue, Recognizer, Tag};
use crate::relations::{Edge, EntityId, Observation};
use crate::verdict::Verdict;

use clique::{max_clique, CliqueMethod, Graph};
use stats::{mean_and_sigma_sq, pearson, Streaming};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolutionError {
    #[error("no reproducing entities were observed")]
    NoReproducers,
    #[error("no parent-child pairs inside the observed window")]
    EmptyParentSet,
    #[error("the reproducing population is empty")]
    EmptyPopulation,
    #[error("unknown entity {0}")]
    UnknownTag(String),
    #[error("correlation needs at least two varied children, found {0}")]
    TooFewVaried(usize),
    #[error("no numeric heritable dimension to correlate")]
    NoNumericDimension,
}

/// Thresholds for the statistical axioms.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct Thresholds {
    pub epsilon: f64,
    pub min_states: usize,
    pub min_population: usize,
    pub min_generations: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            min_states: 50,
            min_population: 2,
            min_generations: 5,
        }
    }
}

pub fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Least common multiple, saturating at `usize::MAX`.
pub fn lcm(values: &[usize]) -> usize {
    values.iter().fold(1usize, |acc, &v| {
        if v == 0 {
            return acc;
        }
        (acc / gcd(acc, v)).saturating_mul(v)
    })
}

/// Parent-child pairs, children and reproducers restricted to a window of
/// states, indexed by lineage.
struct Genealogy<'a, 'r, R: Recognizer> {
    obs: &'a Observation<'r, R>,
    /// `Parent_Δ` with both ends inside the window.
    parent: Vec<Edge>,
    /// Latest stage of each lineage that is a parent in `parent`.
    last_parent_stage: BTreeMap<EntityId, EntityId>,
}

impl<'a, 'r, R: Recognizer> Genealogy<'a, 'r, R> {
    fn new(obs: &'a Observation<'r, R>, omega: Range<usize>) -> Self {
        let inside = |e: EntityId| omega.contains(&obs.state_of(e));
        let parent: Vec<Edge> = obs
            .relations
            .parent_delta
            .iter()
            .copied()
            .filter(|&(p, c)| inside(p) && inside(c))
            .collect();
        let mut last_parent_stage = BTreeMap::new();
        for &(p, _) in &parent {
            let l = obs.lineage[p as usize];
            let e = last_parent_stage.entry(l).or_insert(p);
            *e = (*e).max(p);
        }
        Self {
            obs,
            parent,
            last_parent_stage,
        }
    }

    fn lineage(&self, e: EntityId) -> EntityId {
        self.obs.lineage[e as usize]
    }

    /// `Child_p`, one representative per child lineage (its earliest
    /// entity in a pair).
    fn children(&self, p: EntityId) -> BTreeSet<EntityId> {
        let l = self.lineage(p);
        let mut first: BTreeMap<EntityId, EntityId> = BTreeMap::new();
        for &(q, c) in &self.parent {
            if q >= p && self.lineage(q) == l {
                let e = first.entry(self.lineage(c)).or_insert(c);
                *e = (*e).min(c);
            }
        }
        first.into_values().collect()
    }

    fn ror(&self, p: EntityId) -> u64 {
        self.children(p).len() as u64
    }

    fn reproduces(&self, e: EntityId) -> bool {
        self.last_parent_stage
            .get(&self.lineage(e))
            .is_some_and(|&last| last >= e)
    }

    /// `Λ`: every entity that is a parent in the window.
    fn reproducers(&self) -> BTreeSet<EntityId> {
        self.parent.iter().map(|e| e.0).collect()
    }

    /// `Λ_min`: reproducers with no reproducing earlier stage.
    fn lambda_min(&self) -> Vec<EntityId> {
        let mut first: BTreeMap<EntityId, EntityId> = BTreeMap::new();
        for p in self.reproducers() {
            first.entry(self.lineage(p)).or_insert(p);
        }
        let mut v: Vec<EntityId> = first.into_values().collect();
        v.sort_unstable();
        v
    }
}

fn tags<R: Recognizer>(
    obs: &Observation<'_, R>,
    ids: impl IntoIterator<Item = EntityId>,
) -> Vec<String> {
    ids.into_iter().map(|e| obs.tag(e).to_string()).collect()
}

pub fn whole_run<R: Recognizer>(obs: &Observation<'_, R>) -> Range<usize> {
    0..obs.states.len()
}

/// Passes when at least one immediate parent-child pair exists.
pub fn check_reproduction<R: Recognizer>(obs: &Observation<'_, R>) -> Verdict {
    let pd = &obs.relations.parent_delta_min;
    let v = Verdict::new("reproduction", !pd.is_empty())
        .with("parentDeltaPairs", obs.relations.parent_delta.len())
        .with("parentDeltaMinPairs", pd.len());
    let v = match pd.iter().min_by_key(|&&(p, c)| (obs.state_of(c), c, p)) {
        Some(&(p, c)) => v.with(
            "witness",
            json!({
                "parent": obs.tag(p).to_string(),
                "child": obs.tag(c).to_string(),
                "parentState": obs.state_of(p),
                "childState": obs.state_of(c),
            }),
        ),
        None => v,
    };
    if obs.states.len() < 2 {
        v.note("fewer than two states observed")
    } else {
        v
    }
}

/// Candidate generation lengths, most frequent parent-child state gap
/// first (ties to the shorter gap), at most eight.
pub fn estimate_cycles<R: Recognizer>(obs: &Observation<'_, R>) -> Vec<usize> {
    let mut freq: BTreeMap<usize, usize> = BTreeMap::new();
    for &(p, c) in &obs.relations.parent_delta_min {
        let gap = obs.state_of(c) - obs.state_of(p);
        if gap > 0 {
            *freq.entry(gap).or_default() += 1;
        }
    }
    let mut gaps: Vec<(usize, usize)> = freq.into_iter().collect();
    gaps.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    gaps.into_iter().take(8).map(|(g, _)| g).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Generation {
    /// 1-based.
    pub index: usize,
    pub members: Vec<Tag>,
    /// Inclusive.
    pub state_range: [usize; 2],
    /// Whether a reproducer at the end of the window could still have its
    /// child observed before the trace ends.
    pub observable: bool,
    #[serde(skip)]
    pub ids: Vec<EntityId>,
}

/// Tiles the run into windows of `lcm(cycles)` states. A lineage belongs
/// to every window in which it splits off a child, the split being its
/// last stage still paired with that child in `Parent_Δ`; it is
/// represented by its earliest such stage in the window.
pub fn segment_generations<R: Recognizer>(
    obs: &Observation<'_, R>,
    cycles: &[usize],
) -> Result<Vec<Generation>, EvolutionError> {
    if obs.relations.parent_delta_min.is_empty() {
        return Err(EvolutionError::NoReproducers);
    }
    let lambda = lcm(cycles).max(1);
    let n = obs.states.len();
    let mut splits: BTreeMap<(EntityId, EntityId), EntityId> = BTreeMap::new();
    for &(p, c) in &obs.relations.parent_delta {
        let e = splits
            .entry((obs.lineage[p as usize], obs.lineage[c as usize]))
            .or_insert(p);
        *e = (*e).max(p);
    }
    let mut windows: Vec<BTreeMap<EntityId, EntityId>> = vec![BTreeMap::new(); n.div_ceil(lambda)];
    for (&(parent, _), &p) in &splits {
        let e = windows[obs.state_of(p) / lambda].entry(parent).or_insert(p);
        *e = (*e).min(p);
    }
    Ok(windows
        .into_iter()
        .enumerate()
        .map(|(k, members)| {
            let start = k * lambda;
            let end = ((k + 1) * lambda).min(n) - 1;
            let ids: Vec<EntityId> = members.into_values().collect();
            Generation {
                index: k + 1,
                members: ids.iter().map(|&e| obs.tag(e).clone()).collect(),
                state_range: [start, end],
                observable: end + lambda < n,
                ids,
            }
        })
        .collect())
}

/// First `i` (0-based) with no later `j` where `count(i, j) >= sizes[i]`.
pub fn fecundity_scan(sizes: &[usize], count: impl Fn(usize, usize) -> usize) -> Option<usize> {
    let l = sizes.len();
    (0..l.saturating_sub(1)).find(|&i| !(i + 1..l).any(|j| count(i, j) >= sizes[i]))
}

/// Every generation has a later one holding at least as many of its
/// descendants. Descent is `AncestorOf` between any stages of the two
/// lineages; generations at the end of the run whose reproduction cannot
/// complete inside it are left out.
pub fn check_fecundity<R: Recognizer>(
    obs: &Observation<'_, R>,
    generations: &[Generation],
    thresholds: &Thresholds,
) -> Verdict {
    let used: Vec<&Generation> = generations.iter().filter(|g| g.observable).collect();
    let dropped = generations.len() - used.len();
    let sizes: Vec<usize> = used.iter().map(|g| g.ids.len()).collect();
    let lineage_anc: BTreeSet<(EntityId, EntityId)> = obs
        .relations
        .ancestor_of
        .iter()
        .map(|&(a, c)| (obs.lineage[a as usize], obs.lineage[c as usize]))
        .collect();
    let lineages: Vec<BTreeSet<EntityId>> = used
        .iter()
        .map(|g| g.ids.iter().map(|&e| obs.lineage[e as usize]).collect())
        .collect();
    let count = |i: usize, j: usize| {
        lineages[j]
            .iter()
            .filter(|&&c| lineages[i].iter().any(|&a| lineage_anc.contains(&(a, c))))
            .count()
    };
    let descendants: Vec<Vec<usize>> = (0..used.len())
        .map(|i| {
            (0..used.len())
                .map(|j| if j > i { count(i, j) } else { 0 })
                .collect()
        })
        .collect();
    let failed = fecundity_scan(&sizes, |i, j| descendants[i][j]);
    let lambda = generations
        .first()
        .map_or(0, |g| g.state_range[1] - g.state_range[0] + 1);
    let mut v = Verdict::new("fecundity", failed.is_none())
        .with("generationLength", lambda)
        .with("sizes", &sizes)
        .with("descendants", &descendants)
        .with("generations", used.len())
        .with("droppedTrailing", dropped)
        .with("failedAt", failed.map(|i| used[i].index));
    if used.len() < 2 {
        v = v.note("insufficient data: fewer than two generations");
    } else if used.len() < thresholds.min_generations {
        v = v.note(format!(
            "only {} generations observed, fewer than the {} asked for",
            used.len(),
            thresholds.min_generations
        ));
    }
    v
}

/// Fecundity with estimated generation lengths: the most frequent gap
/// first, retried once with the two most frequent.
pub fn fecundity_auto<R: Recognizer>(
    obs: &Observation<'_, R>,
    cycles: Option<&[usize]>,
    thresholds: &Thresholds,
) -> Result<(Vec<Generation>, Verdict), EvolutionError> {
    let attempt = |cycles: &[usize]| -> Result<(Vec<Generation>, Verdict), EvolutionError> {
        let gens = segment_generations(obs, cycles)?;
        let v = check_fecundity(obs, &gens, thresholds).with("cycles", cycles);
        Ok((gens, v))
    };
    if let Some(c) = cycles {
        return attempt(c);
    }
    let est = estimate_cycles(obs);
    if est.is_empty() {
        return Err(EvolutionError::NoReproducers);
    }
    let first = attempt(&est[..1])?;
    if first.1.passed || est.len() < 2 {
        return Ok(first);
    }
    let (gens, v) = attempt(&est[..2])?;
    let judged = gens.iter().filter(|g| g.observable).count();
    if v.passed && judged >= 2 {
        Ok((gens, v.note(format!("retried with cycles {:?}", &est[..2]))))
    } else {
        Ok(first)
    }
}

fn heritable_dims<R: Recognizer>(obs: &Observation<'_, R>) -> Vec<usize> {
    obs.rec.space().heritable().collect()
}

/// Some heritable character passes to at least `1 − ε` of the parent-child
/// pairs inside `omega` unchanged.
pub fn check_heredity<R: Recognizer>(
    obs: &Observation<'_, R>,
    omega: Range<usize>,
    epsilon: f64,
) -> Result<Verdict, EvolutionError> {
    let pairs: Vec<Edge> = obs
        .relations
        .parent_delta_min
        .iter()
        .copied()
        .filter(|&(p, c)| omega.contains(&obs.state_of(p)) && omega.contains(&obs.state_of(c)))
        .collect();
    if pairs.is_empty() {
        return Err(EvolutionError::EmptyParentSet);
    }
    let space = obs.rec.space();
    let mut ratios = BTreeMap::new();
    let mut best: Option<(f64, String)> = None;
    for i in heritable_dims(obs) {
        let inherited = pairs
            .iter()
            .filter(|&&(p, c)| obs.distance(p, c).0[i] == 0.0)
            .count();
        let ratio = inherited as f64 / pairs.len() as f64;
        let name = space.dims[i].name.clone();
        ratios.insert(name.clone(), ratio);
        if best.as_ref().is_none_or(|b| ratio > b.0) {
            best = Some((ratio, name));
        }
    }
    let passed = best.as_ref().is_some_and(|b| b.0 >= 1.0 - epsilon);
    Ok(Verdict::new("heredity", passed)
        .with("pairs", pairs.len())
        .with("ratios", ratios)
        .with("best", best.map(|b| b.1))
        .with("epsilon", epsilon)
        .with("omega", [omega.start, omega.end.saturating_sub(1)]))
}

/// `Λ_min` inside `omega`.
pub fn lambda_min<R: Recognizer>(obs: &Observation<'_, R>, omega: Range<usize>) -> Vec<EntityId> {
    Genealogy::new(obs, omega).lambda_min()
}

/// Number of distinct child lineages produced by `p` or any of its later
/// recognized stages inside `omega`.
pub fn rate_of_reproduction<R: Recognizer>(
    obs: &Observation<'_, R>,
    omega: Range<usize>,
    p: EntityId,
) -> Result<u64, EvolutionError> {
    if p as usize >= obs.entities.len() {
        return Err(EvolutionError::UnknownTag(format!("#{p}")));
    }
    Ok(Genealogy::new(obs, omega).ror(p))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DimensionStats {
    pub mu: f64,
    /// `Σ x² − n·μ²`.
    pub sigma_sq: f64,
    /// `sigma_sq / n`.
    pub sigma_sq_normalized: f64,
    pub streaming_mean: f64,
    /// Streaming population variance times `n`, comparable to `sigma_sq`.
    pub streaming_sigma_sq: f64,
}

impl DimensionStats {
    fn of(values: &[f64]) -> Option<Self> {
        let (mu, sigma_sq) = mean_and_sigma_sq(values)?;
        let s = Streaming::of(values);
        let n = values.len() as f64;
        Some(Self {
            mu,
            sigma_sq,
            sigma_sq_normalized: sigma_sq / n,
            streaming_mean: s.mean,
            streaming_sigma_sq: s.variance * n,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SelectionStats {
    pub lambda_min: Vec<String>,
    pub ror: BTreeMap<String, u64>,
    pub char_stats: BTreeMap<String, DimensionStats>,
    /// Heritable dimensions that are not numeric, with their number of
    /// distinct values in `Λ_min`.
    pub symbolic_variety: BTreeMap<String, usize>,
    pub ror_stats: Option<DimensionStats>,
    pub ch_mut: Vec<String>,
    pub var_ch_mut: Vec<String>,
    pub clique_method: Option<CliqueMethod>,
    pub variation_ratio: f64,
    /// `None` where a dimension has zero spread.
    pub pearson: BTreeMap<String, Option<f64>>,
    #[serde(skip)]
    pub lambda_min_ids: Vec<EntityId>,
    #[serde(skip)]
    pub var_ch_mut_ids: Vec<EntityId>,
}

fn numeric(v: &CharValue) -> Option<f64> {
    match v {
        CharValue::Absent => Some(0.0),
        CharValue::Num(x) => Some(*x),
        CharValue::Sym(_) => None,
    }
}

/// Numeric dimension statistics, distinct counts of symbolic dimensions and
/// the rate-of-reproduction statistics.
pub type PopulationStats = (
    BTreeMap<String, DimensionStats>,
    BTreeMap<String, usize>,
    DimensionStats,
);

/// Means and variances of the heritable characters and of the rate of
/// reproduction over `population`.
pub fn population_stats<R: Recognizer>(
    obs: &Observation<'_, R>,
    population: &[EntityId],
    ror: &BTreeMap<EntityId, u64>,
) -> Result<PopulationStats, EvolutionError> {
    if population.is_empty() {
        return Err(EvolutionError::EmptyPopulation);
    }
    let space = obs.rec.space();
    let mut chars = BTreeMap::new();
    let mut symbolic = BTreeMap::new();
    for i in heritable_dims(obs) {
        let dim = &space.dims[i];
        let values: Option<Vec<f64>> = population
            .iter()
            .map(|&e| numeric(&obs.characters(e).0[i]))
            .collect();
        match values {
            Some(values) if dim.numeric => {
                let s = DimensionStats::of(&values).expect("population is nonempty");
                if (s.mu - s.streaming_mean).abs() > 1e-9 * (1.0 + s.mu.abs()) {
                    log::warn!(
                        "streaming mean disagrees on {}: {} vs {}",
                        dim.name,
                        s.streaming_mean,
                        s.mu
                    );
                }
                chars.insert(dim.name.clone(), s);
            }
            _ => {
                let distinct: BTreeSet<String> = population
                    .iter()
                    .map(|&e| serde_json::to_string(&obs.characters(e).0[i]).unwrap_or_default())
                    .collect();
                symbolic.insert(dim.name.clone(), distinct.len());
            }
        }
    }
    let rors: Vec<f64> = population
        .iter()
        .map(|e| ror.get(e).copied().unwrap_or(0) as f64)
        .collect();
    let ror_stats = DimensionStats::of(&rors).expect("population is nonempty");
    Ok((chars, symbolic, ror_stats))
}

/// Children in `Λ_min` carrying a reproductive mutation, and the largest
/// subset of them that differ pairwise on some heritable character.
pub fn heritable_variation<R: Recognizer>(
    obs: &Observation<'_, R>,
    omega: Range<usize>,
    population: &[EntityId],
) -> (Vec<EntityId>, Vec<EntityId>, Option<CliqueMethod>, f64) {
    let g = Genealogy::new(obs, omega);
    let dims = heritable_dims(obs);
    let differs = |a: EntityId, b: EntityId| {
        let d = obs.distance(a, b);
        dims.iter().any(|&i| d.0[i] > 0.0)
    };
    let rep: BTreeMap<EntityId, EntityId> = population.iter().map(|&e| (g.lineage(e), e)).collect();
    let mut ch_mut = BTreeSet::new();
    for &(p, c) in &g.parent {
        if let (Some(&rp), Some(&rc)) = (rep.get(&g.lineage(p)), rep.get(&g.lineage(c))) {
            if differs(rp, rc) {
                ch_mut.insert(rc);
            }
        }
    }
    let ch_mut: Vec<EntityId> = ch_mut.into_iter().collect();
    let mut graph = Graph::new(ch_mut.len());
    for a in 0..ch_mut.len() {
        for b in a + 1..ch_mut.len() {
            if differs(ch_mut[a], ch_mut[b]) {
                graph.add_edge(a, b);
            }
        }
    }
    let (var, method) = if ch_mut.is_empty() {
        (Vec::new(), None)
    } else {
        let (c, m) = max_clique(&graph);
        (c.into_iter().map(|k| ch_mut[k]).collect(), Some(m))
    };
    let ratio = if population.is_empty() {
        0.0
    } else {
        var.len() as f64 / population.len() as f64
    };
    (ch_mut, var, method, ratio)
}

/// Pearson's r between each numeric heritable character and the rate of
/// reproduction over `varied`.
pub fn correlation<R: Recognizer>(
    obs: &Observation<'_, R>,
    varied: &[EntityId],
    ror: &BTreeMap<EntityId, u64>,
) -> Result<BTreeMap<String, Option<f64>>, EvolutionError> {
    if varied.len() < 2 {
        return Err(EvolutionError::TooFewVaried(varied.len()));
    }
    let space = obs.rec.space();
    let ys: Vec<f64> = varied
        .iter()
        .map(|e| ror.get(e).copied().unwrap_or(0) as f64)
        .collect();
    let mut out = BTreeMap::new();
    for i in heritable_dims(obs) {
        if !space.dims[i].numeric {
            continue;
        }
        let xs: Option<Vec<f64>> = varied
            .iter()
            .map(|&e| numeric(&obs.characters(e).0[i]))
            .collect();
        if let Some(xs) = xs {
            out.insert(space.dims[i].name.clone(), pearson(&xs, &ys));
        }
    }
    if out.is_empty() {
        return Err(EvolutionError::NoNumericDimension);
    }
    Ok(out)
}

/// Everything the natural-selection axioms are computed from.
pub fn selection_stats<R: Recognizer>(
    obs: &Observation<'_, R>,
    omega: Range<usize>,
) -> SelectionStats {
    let g = Genealogy::new(obs, omega.clone());
    let lmin = g.lambda_min();
    let ror: BTreeMap<EntityId, u64> = lmin.iter().map(|&p| (p, g.ror(p))).collect();
    let (char_stats, symbolic_variety, ror_stats) = match population_stats(obs, &lmin, &ror) {
        Ok((c, s, r)) => (c, s, Some(r)),
        Err(_) => (BTreeMap::new(), BTreeMap::new(), None),
    };
    let (ch_mut, var, method, ratio) = heritable_variation(obs, omega, &lmin);
    let pearson = correlation(obs, &var, &ror).unwrap_or_default();
    SelectionStats {
        lambda_min: tags(obs, lmin.iter().copied()),
        ror: ror
            .iter()
            .map(|(&p, &n)| (obs.tag(p).to_string(), n))
            .collect(),
        char_stats,
        symbolic_variety,
        ror_stats,
        ch_mut: tags(obs, ch_mut),
        var_ch_mut: tags(obs, var.iter().copied()),
        clique_method: method,
        variation_ratio: ratio,
        pearson,
        lambda_min_ids: lmin,
        var_ch_mut_ids: var,
    }
}

/// If a state holds reproducers, some of their children or later stages
/// reproduce as well. States closer to the end of `omega` than the longest
/// observed parent-child gap are not judged.
pub fn check_preservation<R: Recognizer>(obs: &Observation<'_, R>, omega: Range<usize>) -> Verdict {
    let g = Genealogy::new(obs, omega.clone());
    let horizon = g
        .parent
        .iter()
        .map(|&(p, c)| obs.state_of(c) - obs.state_of(p))
        .max()
        .unwrap_or(0);
    let mut by_state: BTreeMap<usize, BTreeSet<EntityId>> = BTreeMap::new();
    for p in g.reproducers() {
        by_state.entry(obs.state_of(p)).or_default().insert(p);
    }
    let last = omega.end.saturating_sub(1);
    let mut judged = 0usize;
    let mut failing = Vec::new();
    for (&s, sr) in &by_state {
        if s + horizon > last {
            continue;
        }
        judged += 1;
        let ok = sr.iter().any(|&p| {
            let later = g
                .last_parent_stage
                .get(&g.lineage(p))
                .is_some_and(|&l| l > p);
            later || g.children(p).iter().any(|&c| g.reproduces(c))
        });
        if !ok {
            failing.push(s);
        }
    }
    let mut v = Verdict::new("preservation", failing.is_empty())
        .with("statesWithReproducers", by_state.len())
        .with("statesJudged", judged)
        .with("horizon", horizon)
        .with("failingStates", &failing[..failing.len().min(20)]);
    if by_state.is_empty() {
        v = v.note("no reproducers observed; holds vacuously");
    }
    v
}

/// The four natural-selection axioms and their conjunction.
pub fn natural_selection_verdict<R: Recognizer>(
    obs: &Observation<'_, R>,
    omega: Range<usize>,
    thresholds: &Thresholds,
) -> (SelectionStats, Vec<Verdict>, Verdict) {
    let stats = selection_stats(obs, omega.clone());
    let population = stats.lambda_min_ids.len();

    let time_scale = Verdict::new(
        "evolutionaryTimeScale",
        omega.len() >= thresholds.min_states && population >= thresholds.min_population,
    )
    .with("states", omega.len())
    .with("minStates", thresholds.min_states)
    .with("population", population)
    .with("minPopulation", thresholds.min_population);

    let ror_var = stats.ror_stats.as_ref().map_or(0.0, |s| s.sigma_sq);
    let char_var = stats.char_stats.values().any(|s| s.sigma_sq > 0.0)
        || stats.symbolic_variety.values().any(|&n| n > 1);
    let sorting = Verdict::new("sorting", ror_var > 0.0 && char_var)
        .with("sigmaSqRor", ror_var)
        .with("characterVariation", char_var);

    let variation = Verdict::new(
        "heritableVariation",
        stats.variation_ratio >= 1.0 - thresholds.epsilon,
    )
    .with("chMut", stats.ch_mut.len())
    .with("varChMut", stats.var_ch_mut.len())
    .with("ratio", stats.variation_ratio)
    .with("epsilon", thresholds.epsilon);

    let positive: Vec<&String> = stats
        .pearson
        .iter()
        .filter(|(_, r)| r.is_some_and(|r| r > 0.0))
        .map(|(k, _)| k)
        .collect();
    let mut corr = Verdict::new("correlation", !positive.is_empty())
        .with("positive", &positive)
        .with("r", &stats.pearson);
    if stats.var_ch_mut.len() < 2 {
        corr = corr.note(EvolutionError::TooFewVaried(stats.var_ch_mut.len()).to_string());
    } else if stats.pearson.values().all(Option::is_none) {
        corr = corr.note("degenerate variance on every dimension");
    }

    let parts = vec![time_scale, sorting, variation, corr];
    let failed: Vec<&str> = parts
        .iter()
        .filter(|v| !v.passed)
        .map(|v| v.axiom.as_str())
        .collect();
    let overall = Verdict::new("naturalSelection", failed.is_empty())
        .with("failedAt", &failed)
        .with("omega", [omega.start, omega.end.saturating_sub(1)]);
    (stats, parts, overall)
}
