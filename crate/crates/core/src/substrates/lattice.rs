//! Bounded two-dimensional cellular automata with von Neumann neighbourhoods
//! and a quiescent boundary, plus the Langton loop observer abstractions.

use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::multiset::Multiset;
use crate::observer::{GridFeatures, GridRecognizer, Recognizer};
use crate::probe::{Counter, Probe};
use crate::trace::{Atom, Run, Scalar, State};

pub const LANGTON_RULES: &str = include_str!("../../data/langton.rules");
pub const LANGTON_SEED: &str = include_str!("../../data/langton_seed.txt");

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("no rule for neighbourhood {0}")]
    MissingRule(Neighbourhood),
    #[error("rule table line {line}: {message}")]
    BadRule { line: usize, message: String },
    #[error("seed line {line}: {message}")]
    BadSeed { line: usize, message: String },
    #[error("cell ({x},{y}) lies outside the {width}x{height} lattice")]
    OutOfBounds {
        x: i64,
        y: i64,
        width: usize,
        height: usize,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Center, north, east, south and west cell states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbourhood(pub [u8; 5]);

impl fmt::Display for Neighbourhood {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in self.0 {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

const NO_RULE: u8 = u8::MAX;

/// Dense table over all 8^5 neighbourhoods.
#[derive(Clone)]
pub struct RuleTable {
    next: Vec<u8>,
}

fn index(n: [u8; 5]) -> usize {
    n.iter().fold(0usize, |acc, &s| acc * 8 + s as usize)
}

impl RuleTable {
    pub fn empty() -> Self {
        Self {
            next: vec![NO_RULE; 8usize.pow(5)],
        }
    }

    pub fn get(&self, n: [u8; 5]) -> Option<u8> {
        match self.next[index(n)] {
            NO_RULE => None,
            s => Some(s),
        }
    }

    /// Inserts a rule; conflicting redefinitions are rejected.
    pub fn insert(&mut self, n: [u8; 5], next: u8) -> Result<(), String> {
        let slot = &mut self.next[index(n)];
        if *slot != NO_RULE && *slot != next {
            return Err(format!(
                "{} maps to both {} and {next}",
                Neighbourhood(n),
                *slot
            ));
        }
        *slot = next;
        Ok(())
    }

    /// Parses `CNESW->S` lines. With `rotations`, each line also defines its
    /// three quarter-turn rotations.
    pub fn parse(text: &str, rotations: bool) -> Result<Self, LatticeError> {
        let mut table = Self::empty();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |message: String| LatticeError::BadRule {
                line: i + 1,
                message,
            };
            let (lhs, rhs) = line
                .split_once("->")
                .ok_or_else(|| bad("missing '->'".into()))?;
            let digits: Vec<u8> = lhs
                .trim()
                .chars()
                .chain(rhs.trim().chars())
                .map(|c| c.to_digit(8).map(|d| d as u8))
                .collect::<Option<_>>()
                .ok_or_else(|| bad("cell states must be digits 0-7".into()))?;
            if digits.len() != 6 {
                return Err(bad(format!(
                    "expected 5 + 1 states, found {}",
                    digits.len()
                )));
            }
            let mut n = [digits[0], digits[1], digits[2], digits[3], digits[4]];
            let turns = if rotations { 4 } else { 1 };
            for _ in 0..turns {
                table.insert(n, digits[5]).map_err(bad)?;
                n = [n[0], n[4], n[1], n[2], n[3]];
            }
        }
        Ok(table)
    }

    pub fn load(path: &Path, rotations: bool) -> Result<Self, LatticeError> {
        Self::parse(&std::fs::read_to_string(path)?, rotations)
    }

    pub fn langton() -> Self {
        Self::parse(LANGTON_RULES, true).expect("shipped rule table is well formed")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    pub width: usize,
    pub height: usize,
    cells: Vec<u8>,
}

impl Lattice {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            cells: vec![0; width * height],
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn get(&self, x: i64, y: i64) -> u8 {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            0
        } else {
            self.cells[y as usize * self.width + x as usize]
        }
    }

    pub fn set(&mut self, x: i64, y: i64, s: u8) -> Result<(), LatticeError> {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            return Err(LatticeError::OutOfBounds {
                x,
                y,
                width: self.width,
                height: self.height,
            });
        }
        self.cells[y as usize * self.width + x as usize] = s;
        Ok(())
    }

    /// Non-quiescent cells as `(x, y, state)` in row-major order.
    pub fn live_cells(&self) -> impl Iterator<Item = (i64, i64, u8)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &s)| s != 0)
            .map(|(i, &s)| ((i % self.width) as i64, (i / self.width) as i64, s))
    }

    pub fn place(
        &mut self,
        pattern: &[(i64, i64, u8)],
        dx: i64,
        dy: i64,
    ) -> Result<(), LatticeError> {
        for &(x, y, s) in pattern {
            self.set(x + dx, y + dy, s)?;
        }
        Ok(())
    }

    /// The observed state: one atom per non-quiescent cell.
    pub fn to_state(&self, t: u64) -> State {
        State::new(
            t,
            self.live_cells()
                .map(|(x, y, s)| cell_atom(x, y, s))
                .collect(),
        )
    }
}

pub fn cell_atom(x: i64, y: i64, s: u8) -> Atom {
    Atom::new(
        format!("{x},{y}"),
        [
            ("x".into(), Scalar::Int(x)),
            ("y".into(), Scalar::Int(y)),
            ("cellState".into(), Scalar::Int(s as i64)),
        ],
    )
}

/// One synchronous update; rows are computed in parallel.
pub fn ca_step(lattice: &Lattice, rules: &RuleTable) -> Result<Lattice, LatticeError> {
    let w = lattice.width;
    let rows: Vec<Result<Vec<u8>, LatticeError>> = (0..lattice.height)
        .into_par_iter()
        .map(|y| {
            let y = y as i64;
            (0..w as i64)
                .map(|x| {
                    let n = [
                        lattice.get(x, y),
                        lattice.get(x, y - 1),
                        lattice.get(x + 1, y),
                        lattice.get(x, y + 1),
                        lattice.get(x - 1, y),
                    ];
                    rules
                        .get(n)
                        .ok_or(LatticeError::MissingRule(Neighbourhood(n)))
                })
                .collect()
        })
        .collect();
    let mut cells = Vec::with_capacity(lattice.len());
    for row in rows {
        cells.extend(row?);
    }
    Ok(Lattice {
        width: w,
        height: lattice.height,
        cells,
    })
}

/// Parses `x y state` lines.
pub fn parse_seed(text: &str) -> Result<Vec<(i64, i64, u8)>, LatticeError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: &str| LatticeError::BadSeed {
            line: i + 1,
            message: message.into(),
        };
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(bad("expected `x y state`"));
        }
        let x = parts[0].parse().map_err(|_| bad("bad x"))?;
        let y = parts[1].parse().map_err(|_| bad("bad y"))?;
        let s: u8 = parts[2].parse().map_err(|_| bad("bad state"))?;
        if s > 7 {
            return Err(bad("state out of range"));
        }
        out.push((x, y, s));
    }
    Ok(out)
}

pub fn langton_seed() -> Vec<(i64, i64, u8)> {
    parse_seed(LANGTON_SEED).expect("shipped seed is well formed")
}

/// A Langton loop entity: a 4-connected set of non-quiescent cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Loop {
    pub cells: Vec<(i64, i64, u8)>,
    pub pivot: (i64, i64),
}

impl Loop {
    pub fn structure(&self) -> Multiset<Atom> {
        self.cells
            .iter()
            .map(|&(x, y, s)| cell_atom(x, y, s))
            .collect()
    }
}

/// Connected components of a lattice, scanning every cell. The probe's
/// recognition counter records the scan and the flood fill.
pub fn find_loops(lattice: &Lattice, probe: &Probe) -> Vec<Loop> {
    let (w, h) = (lattice.width, lattice.height);
    let mut seen = vec![false; w * h];
    let mut loops = Vec::new();
    probe.add(Counter::RecognitionSteps, (w * h) as u64);
    for start in 0..w * h {
        if seen[start] || lattice.cells[start] == 0 {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut cells = Vec::new();
        while let Some(i) = stack.pop() {
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            cells.push((x, y, lattice.cells[i]));
            for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                probe.tick(Counter::RecognitionSteps);
                let (nx, ny) = (x + dx, y + dy);
                if lattice.get(nx, ny) != 0 {
                    let j = ny as usize * w + nx as usize;
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        cells.sort_unstable();
        let pivot = (cells[0].0, cells[0].1);
        loops.push(Loop { cells, pivot });
    }
    loops
}

fn loop_features(l: &Loop) -> GridFeatures {
    GridRecognizer::default().features(&l.structure())
}

/// `[d_g, d_p]`: arrangement difference (translation only) and pivot
/// difference, each 0 or 1.
pub fn langton_distance(a: &Loop, b: &Loop) -> [f64; 2] {
    let d = GridRecognizer::default().distance(&loop_features(a), &loop_features(b));
    [d.0[0], d.0[1]]
}

/// The break-off condition for consecutive states.
pub fn langton_causal(parent: &Loop, child: &Loop) -> bool {
    GridRecognizer::default().causal(&loop_features(parent), &loop_features(child))
}

/// Langton loop simulation parameters.
#[derive(Debug, Clone)]
pub struct LangtonParams {
    pub width: usize,
    pub height: usize,
    pub steps: usize,
    /// Offset of the seed pattern.
    pub origin: (i64, i64),
}

impl Default for LangtonParams {
    fn default() -> Self {
        Self {
            width: 200,
            height: 200,
            steps: 160,
            origin: (90, 90),
        }
    }
}

/// Runs the standard table from the standard seed, returning every lattice.
pub fn simulate_langton(params: &LangtonParams) -> Result<Vec<Lattice>, LatticeError> {
    let rules = RuleTable::langton();
    let mut lattice = Lattice::new(params.width, params.height);
    lattice.place(&langton_seed(), params.origin.0, params.origin.1)?;
    let mut out = Vec::with_capacity(params.steps + 1);
    out.push(lattice);
    for _ in 0..params.steps {
        let next = ca_step(out.last().expect("nonempty"), &rules)?;
        out.push(next);
    }
    Ok(out)
}

pub fn langton_run(id: &str, params: &LangtonParams) -> Result<Run, LatticeError> {
    let states = simulate_langton(params)?
        .iter()
        .enumerate()
        .map(|(t, l)| l.to_state(t as u64))
        .collect();
    Ok(Run::new(id, states))
}
