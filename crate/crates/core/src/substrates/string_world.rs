//! A synthetic substrate whose genealogy is known exactly.
//!
//! Each individual is a string of gene tokens sitting at its own locus.
//! A newborn carries `epigeneticSteps` shell tokens and sheds one per state;
//! it is mature once the shell is gone. Reproduction is visible one state
//! early as bud tokens inside the parent which then move to the child's
//! locus under the same ids.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::multiset::Multiset;
use crate::trace::{Atom, Run, Scalar, State};

#[derive(Debug, Error, PartialEq)]
pub enum ScriptError {
    #[error("invalid script at state {t}: {message}")]
    InvalidScript { t: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "camelCase")]
pub enum Event {
    Spawn {
        t: usize,
        tag: String,
        genes: Vec<i64>,
    },
    #[serde(rename_all = "camelCase")]
    Mutate {
        t: usize,
        tag: String,
        dimension: usize,
        amount: i64,
    },
    #[serde(rename_all = "camelCase")]
    Reproduce {
        t: usize,
        parent: String,
        child: String,
        epigenetic_steps: usize,
        mutation_vector: Vec<i64>,
    },
    Die {
        t: usize,
        tag: String,
    },
}

impl Event {
    pub fn time(&self) -> usize {
        match self {
            Event::Spawn { t, .. }
            | Event::Mutate { t, .. }
            | Event::Reproduce { t, .. }
            | Event::Die { t, .. } => *t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenealogyScript {
    pub genes: usize,
    pub states: usize,
    pub events: Vec<Event>,
}

/// What the observer must recover, as tag pairs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GroundTruth {
    pub recognition: Vec<(String, String)>,
    pub causal: Vec<(String, String)>,
    pub ancestor_of: Vec<(String, String)>,
    pub parent_delta_min: Vec<(String, String)>,
    /// Script tag of every observed entity tag.
    pub individuals: BTreeMap<String, String>,
}

#[derive(Debug, Clone)]
struct Individual {
    name: String,
    locus: i64,
    genes: Vec<(String, i64)>,
    shell: Vec<String>,
    parent: Option<usize>,
}

/// One observed entity as the generator knows it.
#[derive(Debug, Clone)]
struct Sighting {
    individual: usize,
    state: usize,
    genes: Vec<i64>,
    stage: i64,
    structure: Multiset<Atom>,
}

fn atom(id: &str, locus: i64, kind: &str, extra: &[(&str, i64)]) -> Atom {
    let mut attrs: Vec<(std::sync::Arc<str>, Scalar)> = vec![
        ("locus".into(), Scalar::Int(locus)),
        ("kind".into(), Scalar::Str(kind.into())),
    ];
    attrs.extend(extra.iter().map(|&(k, v)| (k.into(), Scalar::Int(v))));
    Atom::new(id, attrs)
}

struct Renderer {
    individuals: Vec<Individual>,
    by_name: BTreeMap<String, usize>,
    alive: BTreeSet<usize>,
    next_atom: u64,
}

impl Renderer {
    fn fresh(&mut self, prefix: &str) -> String {
        self.next_atom += 1;
        format!("{prefix}{}", self.next_atom)
    }

    fn live(&self, name: &str, t: usize) -> Result<usize, ScriptError> {
        match self.by_name.get(name) {
            Some(&i) if self.alive.contains(&i) => Ok(i),
            _ => Err(ScriptError::InvalidScript {
                t,
                message: format!("{name} is not alive"),
            }),
        }
    }
}

/// Renders a script into a run and evaluates the relation definitions on
/// the generator's own knowledge of who is who.
pub fn render_string_world(
    run_id: &str,
    script: &GenealogyScript,
) -> Result<(Run, GroundTruth), ScriptError> {
    let invalid = |t: usize, message: String| ScriptError::InvalidScript { t, message };
    if script.states == 0 {
        return Err(invalid(0, "a script needs at least one state".into()));
    }
    let mut events: Vec<&Event> = script.events.iter().collect();
    events.sort_by_key(|e| e.time());
    if let Some(e) = events.iter().find(|e| e.time() >= script.states) {
        return Err(invalid(e.time(), "event after the last state".into()));
    }

    let mut r = Renderer {
        individuals: Vec::new(),
        by_name: BTreeMap::new(),
        alive: BTreeSet::new(),
        next_atom: 0,
    };
    let mut sightings: Vec<Vec<Sighting>> = Vec::new();
    let mut states = Vec::new();
    // buds announced in state t-1 for births at t: child index -> parent index
    let mut births: Vec<Vec<(usize, usize)>> = vec![Vec::new(); script.states + 1];

    // first pass creates individuals so buds can be drawn a state early
    for e in &events {
        let t = e.time();
        match e {
            Event::Spawn { tag, genes, .. }
            | Event::Reproduce {
                child: tag,
                mutation_vector: genes,
                ..
            } => {
                if r.by_name.contains_key(tag) {
                    return Err(invalid(t, format!("{tag} is defined twice")));
                }
                if genes.len() != script.genes {
                    return Err(invalid(
                        t,
                        format!("{tag}: expected {} genes", script.genes),
                    ));
                }
                let idx = r.individuals.len();
                r.by_name.insert(tag.clone(), idx);
                let shell_len = match e {
                    Event::Reproduce {
                        epigenetic_steps, ..
                    } => *epigenetic_steps,
                    _ => 0,
                };
                let shell = (0..shell_len).map(|_| r.fresh("s")).collect();
                let genes = genes.iter().map(|&v| (r.fresh("g"), v)).collect();
                r.individuals.push(Individual {
                    name: tag.clone(),
                    locus: idx as i64,
                    genes,
                    shell,
                    parent: None,
                });
                if let Event::Reproduce { parent, .. } = e {
                    if t == 0 {
                        return Err(invalid(t, "reproduction needs a previous state".into()));
                    }
                    let p = *r
                        .by_name
                        .get(parent)
                        .ok_or_else(|| invalid(t, format!("unknown parent {parent}")))?;
                    r.individuals[idx].parent = Some(p);
                    births[t].push((idx, p));
                }
            }
            _ => {}
        }
    }

    for t in 0..script.states {
        // births and spawns first
        for e in events.iter().filter(|e| e.time() == t) {
            match e {
                Event::Spawn { tag, .. } => {
                    r.alive.insert(r.by_name[tag]);
                }
                Event::Reproduce {
                    parent,
                    child,
                    mutation_vector,
                    ..
                } => {
                    let p = r.live(parent, t)?;
                    let ps = sightings[t - 1].iter().find(|s| s.individual == p);
                    if ps.is_none_or(|s| s.stage != 0) {
                        return Err(invalid(
                            t,
                            format!("{parent} was not a mature individual at {}", t - 1),
                        ));
                    }
                    let c = r.by_name[child];
                    let parent_genes: Vec<i64> =
                        r.individuals[p].genes.iter().map(|g| g.1).collect();
                    for ((slot, pv), dv) in r.individuals[c]
                        .genes
                        .iter_mut()
                        .zip(parent_genes)
                        .zip(mutation_vector)
                    {
                        slot.1 = pv + dv;
                    }
                    r.alive.insert(c);
                }
                _ => {}
            }
        }
        let newborn_now: BTreeSet<usize> = births[t].iter().map(|b| b.0).collect();
        for e in events.iter().filter(|e| e.time() == t) {
            match e {
                Event::Mutate {
                    tag,
                    dimension,
                    amount,
                    ..
                } => {
                    let i = r.live(tag, t)?;
                    if newborn_now.contains(&i) {
                        return Err(invalid(
                            t,
                            format!("{tag} cannot mutate in the state it is born"),
                        ));
                    }
                    if *dimension >= script.genes {
                        return Err(invalid(t, format!("{tag}: no gene {dimension}")));
                    }
                    let id = r.fresh("g");
                    let g = &mut r.individuals[i].genes[*dimension];
                    *g = (id, g.1 + amount);
                }
                Event::Die { tag, .. } => {
                    let i = r.live(tag, t)?;
                    r.alive.remove(&i);
                }
                _ => {}
            }
        }
        // development: newborns keep their full shell in their first state
        let newborn: BTreeSet<usize> = births[t].iter().map(|b| b.0).collect();
        for &i in &r.alive {
            if !newborn.contains(&i) && !r.individuals[i].shell.is_empty() && t > 0 {
                let seen_before = sightings[t - 1].iter().any(|s| s.individual == i);
                if seen_before {
                    r.individuals[i].shell.pop();
                }
            }
        }

        let mut seen = Vec::new();
        let mut contents = Multiset::new();
        for &i in &r.alive {
            let ind = &r.individuals[i];
            let mut structure = Multiset::new();
            for (pos, (id, v)) in ind.genes.iter().enumerate() {
                structure.insert(
                    atom(id, ind.locus, "gene", &[("pos", pos as i64), ("val", *v)]),
                    1,
                );
            }
            for id in &ind.shell {
                structure.insert(atom(id, ind.locus, "shell", &[]), 1);
            }
            if t + 1 < script.states {
                for &(c, p) in &births[t + 1] {
                    if p == i {
                        let child = &r.individuals[c];
                        for (id, _) in &child.genes {
                            structure.insert(atom(id, ind.locus, "bud", &[]), 1);
                        }
                        for id in &child.shell {
                            structure.insert(atom(id, ind.locus, "bud", &[]), 1);
                        }
                    }
                }
            }
            contents = contents.join(&structure);
            seen.push(Sighting {
                individual: i,
                state: t,
                genes: ind.genes.iter().map(|g| g.1).collect(),
                stage: ind.shell.len() as i64,
                structure,
            });
        }
        states.push(State::new(t as u64, contents));
        sightings.push(seen);
    }

    let truth = ground_truth(run_id, &r.individuals, &sightings);
    Ok((Run::new(run_id, states), truth))
}

/// Evaluates the relation definitions by brute force over the sightings,
/// using the generator's identities for recognition and birth for causality.
fn ground_truth(
    run_id: &str,
    individuals: &[Individual],
    sightings: &[Vec<Sighting>],
) -> GroundTruth {
    let mut all: Vec<&Sighting> = Vec::new();
    let mut tags: Vec<String> = Vec::new();
    for set in sightings {
        let mut order: Vec<&Sighting> = set.iter().collect();
        order.sort_by(|a, b| a.structure.cmp(&b.structure));
        for (ordinal, s) in order.into_iter().enumerate() {
            tags.push(format!("{run_id}:{}:{ordinal}", s.state));
            all.push(s);
        }
    }
    let n = all.len();
    let mut rec = vec![vec![false; n]; n];
    let mut step = vec![vec![false; n]; n];
    for a in 0..n {
        for b in 0..n {
            if all[b].state != all[a].state + 1 {
                continue;
            }
            if all[a].individual == all[b].individual {
                rec[a][b] = true;
                step[a][b] = true;
            } else if individuals[all[b].individual].parent == Some(all[a].individual)
                && !sightings[all[a].state]
                    .iter()
                    .any(|s| s.individual == all[b].individual)
            {
                step[a][b] = true;
            }
        }
    }
    let causal: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .filter(|&(a, b)| step[a][b] && !rec[a][b])
        .collect();
    // Warshall
    let mut reach = step.clone();
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                let via = reach[k].clone();
                for (r, v) in reach[i].iter_mut().zip(via) {
                    *r |= v;
                }
            }
        }
    }
    let same_earlier =
        |a: usize, b: usize| all[a].individual == all[b].individual && all[a].state < all[b].state;
    let within = |a: &Sighting, b: &Sighting| {
        a.stage == b.stage
            && a.genes
                .iter()
                .zip(&b.genes)
                .all(|(x, y)| (x - y).abs() <= 1)
    };
    let mut anc = vec![vec![false; n]; n];
    for p in 0..n {
        for c in 0..n {
            let in_delta =
                all[c].state > all[p].state && !same_earlier(p, c) && within(all[p], all[c]);
            anc[p][c] = in_delta && reach[p][c];
        }
    }
    let mut parent = Vec::new();
    for p in 0..n {
        for c in 0..n {
            if anc[p][c] && !(0..n).any(|e| anc[p][e] && anc[e][c]) {
                parent.push((p, c));
            }
        }
    }
    let min: Vec<(usize, usize)> = parent
        .iter()
        .copied()
        .filter(|&(p, c)| {
            !parent
                .iter()
                .any(|&(p2, c2)| same_earlier(p2, p) || same_earlier(c2, c))
        })
        .collect();

    let pairs = |v: &mut dyn Iterator<Item = (usize, usize)>| -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> =
            v.map(|(a, b)| (tags[a].clone(), tags[b].clone())).collect();
        out.sort();
        out
    };
    let recognition = pairs(
        &mut (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .filter(|&(a, b)| rec[a][b]),
    );
    let ancestor_of = pairs(
        &mut (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .filter(|&(a, b)| anc[a][b]),
    );
    GroundTruth {
        recognition,
        causal: pairs(&mut causal.into_iter()),
        ancestor_of,
        parent_delta_min: pairs(&mut min.into_iter()),
        individuals: all
            .iter()
            .enumerate()
            .map(|(k, s)| (tags[k].clone(), individuals[s.individual].name.clone()))
            .collect(),
    }
}

/// Bounds for the randomized oracle family.
#[derive(Debug, Clone)]
pub struct FamilyLimits {
    pub max_states: usize,
    pub max_population: usize,
    pub max_epigenetic_steps: usize,
    pub max_parental_mutations: usize,
    pub genes: usize,
}

impl Default for FamilyLimits {
    fn default() -> Self {
        Self {
            max_states: 8,
            max_population: 6,
            max_epigenetic_steps: 3,
            max_parental_mutations: 2,
            genes: 4,
        }
    }
}

/// A random valid script within `limits`.
pub fn random_script(seed: u64, limits: &FamilyLimits) -> GenealogyScript {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = rng.gen_range(2..=limits.max_states);
    let mut events = Vec::new();
    let mut next_name = 0usize;
    let mut name = || {
        next_name += 1;
        format!("i{next_name}")
    };
    // name -> (genes, remaining shell, born at)
    let mut live: BTreeMap<String, (Vec<i64>, usize)> = BTreeMap::new();
    for _ in 0..rng.gen_range(1..=2) {
        let tag = name();
        let genes: Vec<i64> = (0..limits.genes).map(|_| rng.gen_range(0..10)).collect();
        events.push(Event::Spawn {
            t: 0,
            tag: tag.clone(),
            genes: genes.clone(),
        });
        live.insert(tag, (genes, 0));
    }
    let mut mutations_left = rng.gen_range(0..=limits.max_parental_mutations);
    for t in 1..states {
        let mature: Vec<String> = live
            .iter()
            .filter(|(_, v)| v.1 == 0)
            .map(|(k, _)| k.clone())
            .collect();
        for v in live.values_mut() {
            v.1 = v.1.saturating_sub(1);
        }
        let mut born = Vec::new();
        for p in &mature {
            if live.len() + born.len() < limits.max_population && rng.gen_bool(0.4) {
                let mut mv = vec![0i64; limits.genes];
                if rng.gen_bool(0.5) {
                    let i = rng.gen_range(0..limits.genes);
                    mv[i] = *[-2i64, -1, 1, 2].choose(&mut rng).expect("nonempty");
                }
                let steps = rng.gen_range(0..=limits.max_epigenetic_steps);
                let child = name();
                let genes: Vec<i64> = live[p].0.iter().zip(&mv).map(|(a, b)| a + b).collect();
                events.push(Event::Reproduce {
                    t,
                    parent: p.clone(),
                    child: child.clone(),
                    epigenetic_steps: steps,
                    mutation_vector: mv,
                });
                born.push((child, genes, steps));
            }
        }
        // parental mutations and deaths hit individuals that existed before t
        let existing: Vec<String> = live.keys().cloned().collect();
        if mutations_left > 0 && rng.gen_bool(0.3) {
            let tag = existing.choose(&mut rng).expect("someone is alive").clone();
            let dimension = rng.gen_range(0..limits.genes);
            let amount = *[-2i64, -1, 1, 2].choose(&mut rng).expect("nonempty");
            live.get_mut(&tag).expect("alive").0[dimension] += amount;
            events.push(Event::Mutate {
                t,
                tag,
                dimension,
                amount,
            });
            mutations_left -= 1;
        }
        if existing.len() > 1 && rng.gen_bool(0.15) {
            let tag = existing.choose(&mut rng).expect("nonempty").clone();
            live.remove(&tag);
            events.push(Event::Die { t, tag });
        }
        for (child, genes, steps) in born {
            live.insert(child, (genes, steps));
        }
    }
    GenealogyScript {
        genes: limits.genes,
        states,
        events,
    }
}

/// Number of genes in the selection scenarios.
pub const SCENARIO_GENES: usize = 10;

/// A founder buds off one single-gene mutant per gene and direction; the
/// mutants then reproduce exact copies of themselves, `rate(mutant)` times.
fn scenario(states: usize, rate: impl Fn(usize, i64) -> usize) -> GenealogyScript {
    let mut events = vec![Event::Spawn {
        t: 0,
        tag: "founder".into(),
        genes: vec![5; SCENARIO_GENES],
    }];
    let mut t = 1;
    let mut mutants = Vec::new();
    for gene in 0..SCENARIO_GENES {
        for amount in [-1i64, 1] {
            let mut mv = vec![0; SCENARIO_GENES];
            mv[gene] = amount;
            let tag = format!("m{gene}{}", if amount > 0 { "up" } else { "down" });
            events.push(Event::Reproduce {
                t,
                parent: "founder".into(),
                child: tag.clone(),
                epigenetic_steps: 1,
                mutation_vector: mv,
            });
            mutants.push((tag, t, gene, amount));
            t += 1;
        }
    }
    for (tag, born, gene, amount) in &mutants {
        for k in 0..rate(*gene, *amount) {
            events.push(Event::Reproduce {
                t: born + 3 + 4 * k,
                parent: tag.clone(),
                child: format!("{tag}.{k}"),
                epigenetic_steps: 1,
                mutation_vector: vec![0; SCENARIO_GENES],
            });
        }
    }
    GenealogyScript {
        genes: SCENARIO_GENES,
        states,
        events,
    }
}

/// Mutants carrying an increased gene reproduce more often.
pub fn selection_script() -> GenealogyScript {
    scenario(60, |_, amount| if amount > 0 { 3 } else { 1 })
}

/// The same mutants, all reproducing at the same rate.
pub fn neutral_script() -> GenealogyScript {
    scenario(60, |_, _| 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spawn(tag: &str, genes: Vec<i64>) -> Event {
        Event::Spawn {
            t: 0,
            tag: tag.into(),
            genes,
        }
    }

    #[test]
    fn single_spawn_has_no_genealogy() {
        let s = GenealogyScript {
            genes: 2,
            states: 3,
            events: vec![spawn("a", vec![1, 2])],
        };
        let (run, truth) = render_string_world("w", &s).unwrap();
        assert_eq!(run.len(), 3);
        assert_eq!(truth.recognition.len(), 2);
        assert!(truth.parent_delta_min.is_empty());
        assert!(truth.causal.is_empty());
    }

    #[test]
    fn budding_child_develops() {
        let s = GenealogyScript {
            genes: 2,
            states: 6,
            events: vec![
                spawn("a", vec![1, 2]),
                Event::Reproduce {
                    t: 1,
                    parent: "a".into(),
                    child: "b".into(),
                    epigenetic_steps: 3,
                    mutation_vector: vec![0, 1],
                },
            ],
        };
        let (run, truth) = render_string_world("w", &s).unwrap();
        // state 0: a holds 2 gene atoms + 5 bud atoms
        assert_eq!(run.states[0].size(), 7);
        assert_eq!(run.states[1].size(), 2 + 5);
        assert_eq!(run.states[4].size(), 4);
        assert_eq!(truth.causal.len(), 1);
        // b is mature first at state 4
        let b4 = truth
            .individuals
            .iter()
            .find(|(tag, name)| tag.starts_with("w:4:") && name.as_str() == "b")
            .unwrap()
            .0
            .clone();
        assert_eq!(truth.parent_delta_min, vec![("w:0:0".to_string(), b4)]);
    }

    #[test]
    fn invalid_scripts_are_rejected() {
        let immature = GenealogyScript {
            genes: 1,
            states: 4,
            events: vec![
                spawn("a", vec![1]),
                Event::Reproduce {
                    t: 1,
                    parent: "a".into(),
                    child: "b".into(),
                    epigenetic_steps: 2,
                    mutation_vector: vec![0],
                },
                Event::Reproduce {
                    t: 2,
                    parent: "b".into(),
                    child: "c".into(),
                    epigenetic_steps: 0,
                    mutation_vector: vec![0],
                },
            ],
        };
        assert!(render_string_world("w", &immature).is_err());
        let dead = GenealogyScript {
            genes: 1,
            states: 3,
            events: vec![
                spawn("a", vec![1]),
                Event::Die {
                    t: 1,
                    tag: "a".into(),
                },
                Event::Mutate {
                    t: 2,
                    tag: "a".into(),
                    dimension: 0,
                    amount: 1,
                },
            ],
        };
        assert!(render_string_world("w", &dead).is_err());
    }

    #[test]
    fn random_scripts_render() {
        let limits = FamilyLimits::default();
        for seed in 0..200 {
            let s = random_script(seed, &limits);
            let (run, _) =
                render_string_world("w", &s).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
            assert!(run.len() <= limits.max_states);
        }
    }

    #[test]
    fn script_json_round_trip() {
        let s = selection_script();
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("\"op\":\"reproduce\""));
        assert!(text.contains("epigeneticSteps"));
        let back: GenealogyScript = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }
}
