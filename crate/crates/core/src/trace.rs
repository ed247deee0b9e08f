//! Observed runs: states made of atomic elements, trace ingestion, and the
//! state machine induced by a set of runs.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use serde_json::{Map, Value};
use thiserror::Error;

use crate::multiset::Multiset;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("trace contains no states")]
    EmptyTrace,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A flat attribute value attached to an atom.
#[derive(Debug, Clone)]
pub enum Scalar {
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(Arc<str>),
}

impl Scalar {
    pub fn as_int(&self) -> Option<i64> {
        match *self {
            Scalar::Int(v) => Some(v),
            Scalar::Float(v) if v.fract() == 0.0 => Some(v as i64),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Scalar::Int(v) => Some(v as f64),
            Scalar::Float(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Scalar::Str(s) => Some(s),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Scalar::Bool(_) => 0,
            Scalar::Int(_) => 1,
            Scalar::Float(_) => 2,
            Scalar::Str(_) => 3,
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Scalar::Bool(b) => Value::Bool(*b),
            Scalar::Int(i) => Value::from(*i),
            Scalar::Float(f) => Value::from(*f),
            Scalar::Str(s) => Value::from(s.as_ref()),
        }
    }

    fn from_json(v: &Value) -> Option<Scalar> {
        Some(match v {
            Value::Bool(b) => Scalar::Bool(*b),
            Value::Number(n) => match n.as_i64() {
                Some(i) => Scalar::Int(i),
                None => Scalar::Float(n.as_f64()?),
            },
            Value::String(s) => Scalar::Str(s.as_str().into()),
            _ => return None,
        })
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scalar {}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Scalar::Bool(a), Scalar::Bool(b)) => a.cmp(b),
            (Scalar::Int(a), Scalar::Int(b)) => a.cmp(b),
            (Scalar::Float(a), Scalar::Float(b)) => a.total_cmp(b),
            (Scalar::Str(a), Scalar::Str(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl std::hash::Hash for Scalar {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            Scalar::Bool(b) => b.hash(state),
            Scalar::Int(i) => i.hash(state),
            Scalar::Float(f) => f.to_bits().hash(state),
            Scalar::Str(s) => s.hash(state),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Bool(b) => write!(f, "{b}"),
            Scalar::Int(i) => write!(f, "{i}"),
            Scalar::Float(x) => write!(f, "{x}"),
            Scalar::Str(s) => write!(f, "{s}"),
        }
    }
}

/// An opaque structural atom: an identifier plus a flat attribute map kept
/// sorted by key.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub id: Arc<str>,
    attrs: Box<[(Arc<str>, Scalar)]>,
}

impl Atom {
    pub fn new(
        id: impl Into<Arc<str>>,
        attrs: impl IntoIterator<Item = (Arc<str>, Scalar)>,
    ) -> Self {
        let mut attrs: Vec<_> = attrs.into_iter().collect();
        attrs.sort_by(|a, b| a.0.cmp(&b.0));
        attrs.dedup_by(|a, b| a.0 == b.0);
        Self {
            id: id.into(),
            attrs: attrs.into_boxed_slice(),
        }
    }

    pub fn attr(&self, key: &str) -> Option<&Scalar> {
        self.attrs
            .binary_search_by(|(k, _)| k.as_ref().cmp(key))
            .ok()
            .map(|i| &self.attrs[i].1)
    }

    pub fn attrs(&self) -> impl Iterator<Item = (&str, &Scalar)> + '_ {
        self.attrs.iter().map(|(k, v)| (k.as_ref(), v))
    }

    fn to_json(&self) -> Value {
        let attrs: Map<String, Value> = self
            .attrs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_json()))
            .collect();
        let mut obj = Map::new();
        obj.insert("id".into(), Value::from(self.id.as_ref()));
        obj.insert("attrs".into(), Value::Object(attrs));
        Value::Object(obj)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id)?;
        if !self.attrs.is_empty() {
            f.write_str("{")?;
            for (i, (k, v)) in self.attrs.iter().enumerate() {
                if i > 0 {
                    f.write_str(";")?;
                }
                write!(f, "{k}={v}")?;
            }
            f.write_str("}")?;
        }
        Ok(())
    }
}

/// One observed state. Equality is on contents only; `id` is bookkeeping.
#[derive(Debug, Clone)]
pub struct State {
    pub id: u64,
    pub contents: Multiset<Atom>,
}

impl State {
    pub fn new(id: u64, contents: Multiset<Atom>) -> Self {
        Self { id, contents }
    }

    pub fn size(&self) -> u64 {
        self.contents.size()
    }
}

impl PartialEq for State {
    fn eq(&self, other: &Self) -> bool {
        self.contents == other.contents
    }
}

impl Eq for State {}

/// A run is the ordered sequence of observed states; a state's index is its
/// position in the sequence.
#[derive(Debug, Clone, Default)]
pub struct Run {
    pub id: String,
    pub states: Vec<State>,
}

impl Run {
    pub fn new(id: impl Into<String>, states: Vec<State>) -> Self {
        Self {
            id: id.into(),
            states,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Reads a JSON Lines trace: one `{"t": .., "atoms": [..]}` object per line.
    /// Blank lines are skipped.
    pub fn read_jsonl(id: impl Into<String>, reader: impl BufRead) -> Result<Run, TraceError> {
        let mut states = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            states.push(
                parse_state(&line, states.len()).map_err(|message| TraceError::Parse {
                    line: i + 1,
                    message,
                })?,
            );
        }
        if states.is_empty() {
            return Err(TraceError::EmptyTrace);
        }
        Ok(Run::new(id, states))
    }

    pub fn write_jsonl(&self, mut out: impl Write) -> std::io::Result<()> {
        for state in &self.states {
            write_state(state, &mut out)?;
        }
        Ok(())
    }

    /// Collapses consecutive windows of `window` states into one meta state,
    /// sampling each window's final state. The last window may be partial.
    pub fn merge_meta_states(&self, window: usize) -> Run {
        assert!(window >= 1, "meta-state window must be positive");
        let states = self
            .states
            .chunks(window)
            .enumerate()
            .map(|(k, chunk)| {
                let last = chunk.last().expect("chunks are nonempty");
                State::new(k as u64, last.contents.clone())
            })
            .collect();
        Run::new(self.id.clone(), states)
    }
}

pub fn write_state(state: &State, out: &mut impl Write) -> std::io::Result<()> {
    let atoms: Vec<Value> = state
        .contents
        .iter()
        .flat_map(|(atom, n)| std::iter::repeat_n(atom, n as usize))
        .map(Atom::to_json)
        .collect();
    let mut obj = Map::new();
    obj.insert("t".into(), Value::from(state.id));
    obj.insert("atoms".into(), Value::Array(atoms));
    serde_json::to_writer(&mut *out, &Value::Object(obj))?;
    out.write_all(b"\n")
}

fn parse_state(line: &str, position: usize) -> Result<State, String> {
    let value: Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let obj = value.as_object().ok_or("state must be a JSON object")?;
    let id = match obj.get("t") {
        Some(t) => t.as_u64().ok_or("`t` must be a nonnegative integer")?,
        None => position as u64,
    };
    let atoms = obj
        .get("atoms")
        .and_then(Value::as_array)
        .ok_or("missing `atoms` array")?;
    let mut contents = Multiset::new();
    for atom in atoms {
        let atom = atom.as_object().ok_or("atom must be an object")?;
        let id = atom
            .get("id")
            .and_then(Value::as_str)
            .ok_or("atom needs a string `id`")?;
        let mut attrs = Vec::new();
        if let Some(raw) = atom.get("attrs") {
            let raw = raw.as_object().ok_or("`attrs` must be an object")?;
            for (k, v) in raw {
                let v = Scalar::from_json(v)
                    .ok_or_else(|| format!("attribute `{k}` is not a scalar"))?;
                attrs.push((Arc::<str>::from(k.as_str()), v));
            }
        }
        contents.insert(Atom::new(id, attrs), 1);
    }
    Ok(State::new(id, contents))
}

/// The transition system induced by a set of runs. States with equal
/// contents share one node.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StateMachine {
    pub all_states: Vec<Multiset<Atom>>,
    pub initial: BTreeSet<usize>,
    pub transitions: BTreeSet<(usize, usize)>,
}

impl StateMachine {
    pub fn build(runs: &[Run]) -> StateMachine {
        let mut index: HashMap<&Multiset<Atom>, usize> = HashMap::new();
        let mut machine = StateMachine::default();
        for run in runs {
            let mut prev = None;
            for (k, state) in run.states.iter().enumerate() {
                let node = *index.entry(&state.contents).or_insert_with(|| {
                    machine.all_states.push(state.contents.clone());
                    machine.all_states.len() - 1
                });
                if k == 0 {
                    machine.initial.insert(node);
                }
                if let Some(p) = prev {
                    machine.transitions.insert((p, node));
                }
                prev = Some(node);
            }
        }
        machine
    }

    pub fn node_of(&self, contents: &Multiset<Atom>) -> Option<usize> {
        self.all_states.iter().position(|s| s == contents)
    }

    /// Node sequence a run traces through the machine, provided every step
    /// is a known transition.
    pub fn replay(&self, run: &Run) -> Option<Vec<usize>> {
        let path: Option<Vec<usize>> = run
            .states
            .iter()
            .map(|s| self.node_of(&s.contents))
            .collect();
        let path = path?;
        if let Some(&first) = path.first() {
            if !self.initial.contains(&first) {
                return None;
            }
        }
        path.windows(2)
            .all(|w| self.transitions.contains(&(w[0], w[1])))
            .then_some(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(id: &str) -> Atom {
        Atom::new(id, [(Arc::<str>::from("k"), Scalar::Int(1))])
    }

    fn state(t: u64, ids: &[&str]) -> State {
        State::new(t, ids.iter().map(|id| atom(id)).collect())
    }

    #[test]
    fn reads_three_lines() {
        let text = r#"{"t":0,"atoms":[{"id":"a","attrs":{"x":1}}]}
{"t":1,"atoms":[{"id":"a","attrs":{"x":2}},{"id":"b","attrs":{"s":"q"}}]}
{"t":2,"atoms":[]}
"#;
        let run = Run::read_jsonl("r", text.as_bytes()).unwrap();
        assert_eq!(run.len(), 3);
        assert_eq!(run.states[1].size(), 2);
        let a = run.states[1].contents.elements().next().unwrap();
        assert_eq!(a.attr("x").and_then(Scalar::as_int), Some(2));
    }

    #[test]
    fn empty_trace_is_an_error() {
        assert!(matches!(
            Run::read_jsonl("r", "".as_bytes()),
            Err(TraceError::EmptyTrace)
        ));
    }

    #[test]
    fn malformed_line_reports_its_number() {
        let text = "{\"t\":0,\"atoms\":[]}\n{\"t\":1,\"atoms\":[{\"nope\":1}]}\n";
        match Run::read_jsonl("r", text.as_bytes()) {
            Err(TraceError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn write_then_read_preserves_states() {
        let run = Run::new("r", vec![state(0, &["a", "b", "b"]), state(1, &["c"])]);
        let mut buf = Vec::new();
        run.write_jsonl(&mut buf).unwrap();
        let back = Run::read_jsonl("r", buf.as_slice()).unwrap();
        assert_eq!(back.states, run.states);
        assert_eq!(back.states[0].contents.count(&atom("b")), 2);
    }

    #[test]
    fn state_machine_from_runs() {
        let single = Run::new("a", vec![state(0, &["s0"])]);
        let m = StateMachine::build(&[single]);
        assert_eq!(m.initial.len(), 1);
        assert!(m.transitions.is_empty());

        let cyc = Run::new(
            "b",
            vec![state(0, &["s0"]), state(1, &["s1"]), state(2, &["s0"])],
        );
        let m = StateMachine::build(std::slice::from_ref(&cyc));
        assert_eq!(m.all_states.len(), 2);
        assert_eq!(m.transitions, [(0, 1), (1, 0)].into_iter().collect());
        assert_eq!(m.replay(&cyc), Some(vec![0, 1, 0]));

        let other = Run::new("c", vec![state(0, &["s0"]), state(1, &["s2"])]);
        let m = StateMachine::build(&[cyc.clone(), other.clone()]);
        assert!(m.transitions.contains(&(0, 1)) && m.transitions.contains(&(0, 2)));
        assert_eq!(m, StateMachine::build(&[cyc, other]));
    }

    #[test]
    fn meta_state_windows() {
        let run = Run::new("r", (0..6).map(|t| state(t, &[&t.to_string()])).collect());
        assert_eq!(run.merge_meta_states(1).states, run.states);
        let merged = run.merge_meta_states(2);
        assert_eq!(merged.len(), 3);
        for (k, s) in merged.states.iter().enumerate() {
            assert_eq!(s, &run.states[2 * k + 1]);
        }
        let five = Run::new("r", run.states[..5].to_vec());
        let merged = five.merge_meta_states(2);
        assert_eq!(merged.len(), 3);
        assert_eq!(merged.states[2], run.states[4]);
    }
}
