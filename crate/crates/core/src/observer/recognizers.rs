//! The shipped recognition strategies.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    CharValue, CharacterDimension, CharacterSpace, CharacterVector, DistanceVector, MutationBounds,
    Recognizer,
};
use crate::multiset::{Multiset, DEFAULT_POWER_CAP};
use crate::probe::{Counter, Probe};
use crate::trace::{Atom, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryMode {
    /// Arrangements are equal when one is a translate of the other.
    #[default]
    Translation,
    /// Arrangements are also equal under quarter-turn rotations.
    Rotation,
}

pub(crate) fn cell_of(atom: &Atom) -> Option<(i64, i64, i64)> {
    let x = atom.attr("x")?.as_int()?;
    let y = atom.attr("y")?.as_int()?;
    let s = atom.attr("cellState")?.as_int()?;
    Some((x, y, s))
}

/// Connected components of non-quiescent cells on a grid.
#[derive(Debug, Clone)]
pub struct GridRecognizer {
    pub eight_connected: bool,
    pub geometry: GeometryMode,
    space: CharacterSpace,
}

impl Default for GridRecognizer {
    fn default() -> Self {
        Self::new(false, GeometryMode::Translation)
    }
}

#[derive(Debug, Clone)]
pub struct GridFeatures {
    pub pivot: (i64, i64),
    /// Cells relative to the pivot, sorted; rotation mode stores the least
    /// of the four rotated normal forms.
    pub shape: Vec<(i64, i64, i64)>,
    shape_hash: u64,
    pub xs: Vec<i64>,
    pub ys: Vec<i64>,
}

fn normalize(cells: impl Iterator<Item = (i64, i64, i64)>) -> Vec<(i64, i64, i64)> {
    let mut v: Vec<_> = cells.collect();
    v.sort_unstable();
    if let Some(&(px, py, _)) = v.first() {
        for c in &mut v {
            c.0 -= px;
            c.1 -= py;
        }
    }
    v
}

fn sorted_subset(small: &[i64], big: &[i64]) -> bool {
    let mut it = big.iter();
    small.iter().all(|x| it.any(|y| y == x))
}

impl GridRecognizer {
    pub fn new(eight_connected: bool, geometry: GeometryMode) -> Self {
        Self {
            eight_connected,
            geometry,
            space: CharacterSpace {
                dims: vec![
                    CharacterDimension::symbolic("geometry"),
                    CharacterDimension::symbolic("pivot").identity(),
                ],
            },
        }
    }

    fn neighbours(&self) -> &'static [(i64, i64)] {
        if self.eight_connected {
            &[
                (1, 0),
                (-1, 0),
                (0, 1),
                (0, -1),
                (1, 1),
                (1, -1),
                (-1, 1),
                (-1, -1),
            ]
        } else {
            &[(1, 0), (-1, 0), (0, 1), (0, -1)]
        }
    }

    /// Flood fill over the non-quiescent atoms of a state.
    pub fn components(&self, atoms: &[&Atom], probe: &Probe) -> Result<Vec<Vec<usize>>, String> {
        let mut at: HashMap<(i64, i64), usize> = HashMap::with_capacity(atoms.len());
        for (i, a) in atoms.iter().enumerate() {
            let (x, y, _) =
                cell_of(a).ok_or_else(|| format!("atom {} lacks integer x, y, cellState", a.id))?;
            if at.insert((x, y), i).is_some() {
                return Err(format!("two atoms occupy cell ({x},{y})"));
            }
        }
        let mut seen = vec![false; atoms.len()];
        let mut out = Vec::new();
        for start in 0..atoms.len() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut k = 0;
            while k < comp.len() {
                let (x, y, _) = cell_of(atoms[comp[k]]).expect("checked above");
                k += 1;
                for &(dx, dy) in self.neighbours() {
                    probe.tick(Counter::RecognitionSteps);
                    if let Some(&j) = at.get(&(x + dx, y + dy)) {
                        if !seen[j] {
                            seen[j] = true;
                            comp.push(j);
                        }
                    }
                }
            }
            out.push(comp);
        }
        Ok(out)
    }

    fn shape_of(&self, cells: &[(i64, i64, i64)]) -> Vec<(i64, i64, i64)> {
        let base = normalize(cells.iter().copied());
        if self.geometry == GeometryMode::Translation {
            return base;
        }
        let mut best = base.clone();
        let mut cur = base;
        for _ in 0..3 {
            cur = normalize(cur.iter().map(|&(x, y, s)| (-y, x, s)));
            if cur < best {
                best = cur.clone();
            }
        }
        best
    }
}

impl Recognizer for GridRecognizer {
    type Features = GridFeatures;

    fn name(&self) -> &'static str {
        "grid"
    }

    fn space(&self) -> &CharacterSpace {
        &self.space
    }

    fn default_bounds(&self) -> MutationBounds {
        MutationBounds {
            delta_mut: DistanceVector(vec![1.0, 0.0]),
            delta_rep_mut: DistanceVector(vec![0.0, 1.0]),
        }
    }

    fn extract(&self, state: &State, probe: &Probe) -> Result<Vec<Multiset<Atom>>, String> {
        let mut atoms: Vec<&Atom> = Vec::new();
        for (a, n) in state.contents.iter() {
            probe.tick(Counter::RecognitionSteps);
            let (_, _, s) =
                cell_of(a).ok_or_else(|| format!("atom {} lacks integer x, y, cellState", a.id))?;
            if s != 0 {
                if n > 1 {
                    return Err(format!("atom {} occurs {n} times", a.id));
                }
                atoms.push(a);
            }
        }
        Ok(self
            .components(&atoms, probe)?
            .into_iter()
            .map(|comp| comp.into_iter().map(|i| atoms[i].clone()).collect())
            .collect())
    }

    fn features(&self, structure: &Multiset<Atom>) -> GridFeatures {
        let cells: Vec<(i64, i64, i64)> = structure.elements().filter_map(cell_of).collect();
        let pivot = cells
            .iter()
            .map(|&(x, y, _)| (x, y))
            .min()
            .unwrap_or((0, 0));
        let shape = self.shape_of(&cells);
        let mut h = DefaultHasher::new();
        shape.hash(&mut h);
        let xs: BTreeSet<i64> = cells.iter().map(|c| c.0).collect();
        let ys: BTreeSet<i64> = cells.iter().map(|c| c.1).collect();
        GridFeatures {
            pivot,
            shape,
            shape_hash: h.finish(),
            xs: xs.into_iter().collect(),
            ys: ys.into_iter().collect(),
        }
    }

    fn characterize(&self, f: &GridFeatures) -> CharacterVector {
        let shape: Vec<String> = f
            .shape
            .iter()
            .map(|(x, y, s)| format!("{x},{y},{s}"))
            .collect();
        CharacterVector(vec![
            CharValue::Sym(shape.join(";")),
            CharValue::Sym(format!("{},{}", f.pivot.0, f.pivot.1)),
        ])
    }

    fn distance(&self, a: &GridFeatures, b: &GridFeatures) -> DistanceVector {
        let same_shape = a.shape_hash == b.shape_hash && a.shape == b.shape;
        DistanceVector(vec![
            if same_shape { 0.0 } else { 1.0 },
            if a.pivot == b.pivot { 0.0 } else { 1.0 },
        ])
    }

    /// The child's coordinate projections lie inside the parent's, strictly
    /// on at least one axis, and the pivots differ.
    fn causal(&self, parent: &GridFeatures, child: &GridFeatures) -> bool {
        parent.pivot != child.pivot
            && sorted_subset(&child.xs, &parent.xs)
            && sorted_subset(&child.ys, &parent.ys)
            && (child.xs.len() < parent.xs.len() || child.ys.len() < parent.ys.len())
    }
}

/// Groups atoms by their `locus` attribute. Atoms of kind `gene` carry a
/// position `pos` and value `val`; `shell` atoms count remaining
/// developmental steps; `bud` atoms are material held for an offspring.
#[derive(Debug, Clone)]
pub struct TokenRecognizer {
    pub genes: usize,
    space: CharacterSpace,
}

#[derive(Debug, Clone)]
pub struct TokenFeatures {
    pub locus: i64,
    pub genes: Vec<Option<i64>>,
    pub stage: i64,
    /// Every atom id, buds included.
    pub ids: Vec<Arc<str>>,
    /// Ids of gene and shell atoms.
    pub body: Vec<Arc<str>>,
}

impl TokenRecognizer {
    pub fn new(genes: usize) -> Self {
        let mut dims: Vec<CharacterDimension> = (0..genes)
            .map(|i| CharacterDimension::numeric(&format!("gene{i}")))
            .collect();
        dims.push(CharacterDimension::numeric("locus").identity());
        dims.push(CharacterDimension::numeric("stage").identity());
        Self {
            genes,
            space: CharacterSpace { dims },
        }
    }
}

impl Default for TokenRecognizer {
    fn default() -> Self {
        Self::new(4)
    }
}

fn kind(atom: &Atom) -> &str {
    atom.attr("kind").and_then(|k| k.as_str()).unwrap_or("")
}

impl Recognizer for TokenRecognizer {
    type Features = TokenFeatures;

    fn name(&self) -> &'static str {
        "token"
    }

    fn space(&self) -> &CharacterSpace {
        &self.space
    }

    fn default_bounds(&self) -> MutationBounds {
        let mut delta_mut = vec![f64::INFINITY; self.genes];
        delta_mut.extend([0.0, f64::INFINITY]);
        let mut delta_rep = vec![1.0; self.genes];
        delta_rep.extend([1.0, 0.0]);
        MutationBounds {
            delta_mut: DistanceVector(delta_mut),
            delta_rep_mut: DistanceVector(delta_rep),
        }
    }

    fn extract(&self, state: &State, probe: &Probe) -> Result<Vec<Multiset<Atom>>, String> {
        let mut groups: BTreeMap<i64, Multiset<Atom>> = BTreeMap::new();
        for (a, n) in state.contents.iter() {
            probe.tick(Counter::RecognitionSteps);
            let locus = a
                .attr("locus")
                .and_then(|l| l.as_int())
                .ok_or_else(|| format!("atom {} lacks an integer locus", a.id))?;
            groups.entry(locus).or_default().insert(a.clone(), n);
        }
        Ok(groups.into_values().collect())
    }

    fn features(&self, structure: &Multiset<Atom>) -> TokenFeatures {
        let mut genes = vec![None; self.genes];
        let mut stage = 0;
        let mut locus = 0;
        for (a, n) in structure.iter() {
            if let Some(l) = a.attr("locus").and_then(|l| l.as_int()) {
                locus = l;
            }
            match kind(a) {
                "gene" => {
                    let pos = a.attr("pos").and_then(|p| p.as_int());
                    let val = a.attr("val").and_then(|v| v.as_int());
                    if let (Some(p), Some(v)) = (pos, val) {
                        if let Some(slot) = genes.get_mut(p as usize) {
                            *slot = Some(v);
                        }
                    }
                }
                "shell" => stage += n as i64,
                _ => {}
            }
        }
        let mut ids: Vec<Arc<str>> = structure.elements().map(|a| a.id.clone()).collect();
        ids.sort();
        ids.dedup();
        let body: Vec<Arc<str>> = structure
            .elements()
            .filter(|a| kind(a) != "bud")
            .map(|a| a.id.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        TokenFeatures {
            locus,
            genes,
            stage,
            ids,
            body,
        }
    }

    fn characterize(&self, f: &TokenFeatures) -> CharacterVector {
        let mut v: Vec<CharValue> = f
            .genes
            .iter()
            .map(|g| g.map_or(CharValue::Absent, |g| CharValue::Num(g as f64)))
            .collect();
        v.push(CharValue::Num(f.locus as f64));
        v.push(CharValue::Num(f.stage as f64));
        CharacterVector(v)
    }

    fn distance(&self, a: &TokenFeatures, b: &TokenFeatures) -> DistanceVector {
        let mut d: Vec<f64> = a
            .genes
            .iter()
            .zip(&b.genes)
            .map(|(x, y)| match (x, y) {
                (Some(x), Some(y)) => (x - y).abs() as f64,
                (None, None) => 0.0,
                _ => f64::INFINITY,
            })
            .collect();
        d.push(if a.locus == b.locus { 0.0 } else { 1.0 });
        d.push((a.stage - b.stage).abs() as f64);
        DistanceVector(d)
    }

    /// The child's body was held by the parent one state earlier.
    fn causal(&self, parent: &TokenFeatures, child: &TokenFeatures) -> bool {
        parent.locus != child.locus
            && !child.body.is_empty()
            && child
                .body
                .iter()
                .all(|id| parent.ids.binary_search(id).is_ok())
    }
}

/// Every nonempty sub-multiset of a state is an entity. Exponential; meant
/// for worst-case experiments on tiny states.
#[derive(Debug, Clone)]
pub struct ExhaustiveRecognizer {
    pub cap: u64,
    space: CharacterSpace,
}

impl Default for ExhaustiveRecognizer {
    fn default() -> Self {
        Self::new(DEFAULT_POWER_CAP)
    }
}

impl ExhaustiveRecognizer {
    pub fn new(cap: u64) -> Self {
        Self {
            cap,
            space: CharacterSpace {
                dims: vec![
                    CharacterDimension::numeric("size"),
                    CharacterDimension::symbolic("content"),
                ],
            },
        }
    }
}

pub struct ExhaustiveFeatures {
    size: u64,
    content: Multiset<Atom>,
}

impl Recognizer for ExhaustiveRecognizer {
    type Features = ExhaustiveFeatures;

    fn name(&self) -> &'static str {
        "exhaustive"
    }

    fn space(&self) -> &CharacterSpace {
        &self.space
    }

    fn default_bounds(&self) -> MutationBounds {
        MutationBounds {
            delta_mut: DistanceVector(vec![0.0, 0.0]),
            delta_rep_mut: DistanceVector(vec![0.0, 0.0]),
        }
    }

    fn extract(&self, state: &State, probe: &Probe) -> Result<Vec<Multiset<Atom>>, String> {
        let subs = state
            .contents
            .power_multiset(self.cap)
            .map_err(|e| e.to_string())?;
        Ok(subs
            .inspect(|_| probe.tick(Counter::RecognitionSteps))
            .filter(|m| !m.is_empty())
            .collect())
    }

    fn features(&self, structure: &Multiset<Atom>) -> ExhaustiveFeatures {
        ExhaustiveFeatures {
            size: structure.size(),
            content: structure.clone(),
        }
    }

    fn characterize(&self, f: &ExhaustiveFeatures) -> CharacterVector {
        CharacterVector(vec![
            CharValue::Num(f.size as f64),
            CharValue::Sym(f.content.to_string()),
        ])
    }

    fn distance(&self, a: &ExhaustiveFeatures, b: &ExhaustiveFeatures) -> DistanceVector {
        DistanceVector(vec![
            a.size.abs_diff(b.size) as f64,
            if a.content == b.content { 0.0 } else { 1.0 },
        ])
    }

    fn causal(&self, parent: &ExhaustiveFeatures, child: &ExhaustiveFeatures) -> bool {
        child.content.is_proper_subset(&parent.content)
    }
}
