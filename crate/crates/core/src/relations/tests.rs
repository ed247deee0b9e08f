use super::*;
use crate::observer::{GridRecognizer, TokenRecognizer};
use crate::trace::{Scalar, State};
use proptest::prelude::*;

fn floyd_warshall(n: usize, edges: &[Edge]) -> Vec<Edge> {
    let mut m = vec![vec![false; n]; n];
    for &(a, b) in edges {
        m[a as usize][b as usize] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if m[i][k] && m[k][j] {
                    m[i][j] = true;
                }
            }
        }
    }
    let mut out = Vec::new();
    for (i, row) in m.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v {
                out.push((i as EntityId, j as EntityId));
            }
        }
    }
    out
}

#[test]
fn closure_of_chain_and_empty() {
    let c = transitive_closure(&[(0, 1), (1, 2)]);
    assert!(c.contains(&(0, 2)));
    assert_eq!(c.len(), 3);
    assert!(transitive_closure(&[]).is_empty());
    let cyc = transitive_closure(&[(0, 1), (1, 0)]);
    assert!(cyc.contains(&(0, 0)) && cyc.contains(&(1, 1)));
}

proptest! {
    #[test]
    fn closure_matches_matrix_oracle(n in 1usize..=12, raw in prop::collection::vec((0u32..12, 0u32..12), 0..40)) {
        let mut edges: Vec<Edge> = raw.into_iter().filter(|&(a, b)| (a as usize) < n && (b as usize) < n).collect();
        edges.sort_unstable();
        edges.dedup();
        prop_assert_eq!(transitive_closure(&edges), floyd_warshall(n, &edges));
    }
}

pub(crate) fn cell(x: i64, y: i64, s: i64) -> Atom {
    Atom::new(
        format!("{x},{y}"),
        [
            ("x".into(), Scalar::Int(x)),
            ("y".into(), Scalar::Int(y)),
            ("cellState".into(), Scalar::Int(s)),
        ],
    )
}

fn grid(t: u64, cells: &[(i64, i64, i64)]) -> State {
    State::new(t, cells.iter().map(|&(x, y, s)| cell(x, y, s)).collect())
}

/// A bar that grows, splits off its right end, and the piece later takes
/// the bar's shape far away.
fn splitting_bar() -> Run {
    Run::new(
        "bar",
        vec![
            grid(0, &[(0, 0, 1), (1, 0, 1)]),
            grid(1, &[(0, 0, 1), (1, 0, 1), (2, 0, 2), (3, 0, 2)]),
            grid(2, &[(0, 0, 1), (1, 0, 1), (3, 0, 2)]),
            grid(3, &[(0, 0, 1), (1, 0, 1), (3, 0, 1), (4, 0, 1)]),
        ],
    )
}

#[test]
fn bar_split_yields_one_reproduction() {
    let rec = GridRecognizer::default();
    let probe = Probe::disabled();
    let obs = observe(&splitting_bar(), &rec, rec.default_bounds(), &probe).unwrap();
    let r = &obs.relations;
    let tags = |edges: &[Edge]| obs.tag_pairs(edges);
    // the bar keeps its pivot throughout
    assert_eq!(
        tags(&r.recognition),
        vec![
            ("bar:0:0".into(), "bar:1:0".into()),
            ("bar:1:0".into(), "bar:2:0".into()),
            ("bar:2:0".into(), "bar:3:0".into()),
            ("bar:2:1".into(), "bar:3:1".into())
        ]
    );
    assert_eq!(
        tags(&r.causal),
        vec![("bar:1:0".to_string(), "bar:2:1".to_string())]
    );
    assert!(tags(&r.parent_delta_min).contains(&("bar:0:0".into(), "bar:3:1".into())));
    assert_eq!(r.parent_delta_min.len(), 1);
    for &(a, b) in &r.ancestor_of {
        assert!(obs.state_of(a) < obs.state_of(b));
    }
}

#[test]
fn incremental_matches_batch_on_bar() {
    let rec = GridRecognizer::default();
    let probe = Probe::disabled();
    let run = splitting_bar();
    let obs = observe(&run, &rec, rec.default_bounds(), &probe).unwrap();
    let structures: Vec<Vec<Multiset<Atom>>> = obs
        .entity_sets()
        .into_iter()
        .map(|set| set.into_iter().map(|e| (*e.structure).clone()).collect())
        .collect();
    assert_eq!(
        build_batch(&rec, &rec.default_bounds(), &structures),
        obs.relations
    );
}

#[test]
fn injectivity_tie_break_prefers_smaller_source() {
    // two identical blobs collapse onto one: only one recognition edge survives
    let run = Run::new(
        "m",
        vec![grid(0, &[(0, 0, 1), (5, 0, 1)]), grid(1, &[(0, 0, 1)])],
    );
    let rec = GridRecognizer::default();
    let probe = Probe::disabled();
    let obs = observe(&run, &rec, rec.default_bounds(), &probe).unwrap();
    assert_eq!(
        obs.tag_pairs(&obs.relations.recognition),
        vec![("m:0:0".into(), "m:1:0".into())]
    );
}

#[test]
fn recognized_targets_are_never_causal_children() {
    let rec = GridRecognizer::default();
    // the small blob grows inside the L's bounding box but keeps its pivot
    let l_shape = [
        (0, 0, 1),
        (0, 1, 1),
        (0, 2, 1),
        (0, 3, 1),
        (1, 0, 1),
        (2, 0, 1),
        (3, 0, 1),
    ];
    let mut s0 = l_shape.to_vec();
    s0.push((2, 2, 1));
    let mut s1 = l_shape.to_vec();
    s1.extend([(2, 2, 1), (2, 3, 1)]);
    let run = Run::new("k", vec![grid(0, &s0), grid(1, &s1)]);
    let probe = Probe::disabled();
    let obs = observe(&run, &rec, rec.default_bounds(), &probe).unwrap();
    let (l0, l1) = (
        obs.states[0].start as EntityId,
        obs.states[1].start as EntityId,
    );
    let grown = obs
        .relations
        .recognition
        .iter()
        .find(|e| e.0 != l0)
        .unwrap()
        .1;
    assert!(rec.causal(&obs.features[l0 as usize], &obs.features[grown as usize]));
    assert_eq!(obs.relations.recognition.len(), 2);
    assert!(obs.relations.recognition.contains(&(l0, l1)));
    assert!(obs.relations.causal.is_empty());
}

#[test]
fn delta_skips_same_state_and_own_chain() {
    let rec = GridRecognizer::default();
    let run = Run::new(
        "s",
        vec![
            grid(0, &[(0, 0, 1), (4, 0, 1)]),
            grid(1, &[(0, 0, 1), (4, 0, 1)]),
        ],
    );
    let probe = Probe::disabled();
    let obs = observe(&run, &rec, rec.default_bounds(), &probe).unwrap();
    // both blobs persist: only the cross pairs between states qualify
    assert_eq!(
        obs.tag_pairs(&obs.relations.delta),
        vec![
            ("s:0:0".into(), "s:1:1".into()),
            ("s:0:1".into(), "s:1:0".into())
        ]
    );
    assert!(obs.relations.ancestor_of.is_empty());
}

#[test]
fn bounds_must_match_space() {
    let rec = TokenRecognizer::new(2);
    let probe = Probe::disabled();
    let bad = crate::observer::MutationBounds {
        delta_mut: DistanceVector(vec![0.0]),
        delta_rep_mut: DistanceVector(vec![0.0]),
    };
    assert!(RelationBuilder::new("x", &rec, bad, &probe).is_err());
}
