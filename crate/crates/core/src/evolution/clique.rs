//! Maximum clique on small undirected graphs given as adjacency bitsets.

use fixedbitset::FixedBitSet;

/// Graphs with at most this many vertices are solved exactly.
pub const EXACT_LIMIT: usize = 25;

#[derive(Debug, Clone)]
pub struct Graph {
    adj: Vec<FixedBitSet>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Self {
            adj: vec![FixedBitSet::with_capacity(n); n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Self::new(n);
        for &(a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        if a != b {
            self.adj[a].insert(b);
            self.adj[b].insert(a);
        }
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(b)
    }

    pub fn is_clique(&self, vs: &[usize]) -> bool {
        vs.iter()
            .enumerate()
            .all(|(i, &a)| vs[i + 1..].iter().all(|&b| self.has_edge(a, b)))
    }
}

/// How a clique was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "camelCase")]
pub enum CliqueMethod {
    Exact,
    Greedy,
}

/// Exact search up to [`EXACT_LIMIT`] vertices, greedy above.
pub fn max_clique(g: &Graph) -> (Vec<usize>, CliqueMethod) {
    if g.len() <= EXACT_LIMIT {
        (exact_max_clique(g), CliqueMethod::Exact)
    } else {
        (greedy_clique(g), CliqueMethod::Greedy)
    }
}

/// Branch and bound; the bound is the size of the candidate set.
pub fn exact_max_clique(g: &Graph) -> Vec<usize> {
    let mut best = Vec::new();
    let mut current = Vec::new();
    let mut cand = FixedBitSet::with_capacity(g.len());
    cand.insert_range(..);
    expand(g, &mut current, cand, &mut best);
    best
}

fn expand(g: &Graph, current: &mut Vec<usize>, mut cand: FixedBitSet, best: &mut Vec<usize>) {
    if cand.is_clear() {
        if current.len() > best.len() {
            *best = current.clone();
        }
        return;
    }
    while let Some(v) = cand.minimum() {
        if current.len() + cand.count_ones(..) <= best.len() {
            return;
        }
        let mut next = cand.clone();
        next.intersect_with(&g.adj[v]);
        current.push(v);
        expand(g, current, next, best);
        current.pop();
        cand.set(v, false);
    }
    if current.len() > best.len() {
        *best = current.clone();
    }
}

/// Degeneracy ordering, then grow a clique from each vertex along that
/// order and keep the largest.
pub fn greedy_clique(g: &Graph) -> Vec<usize> {
    let n = g.len();
    let mut degree: Vec<usize> = g.adj.iter().map(|a| a.count_ones(..)).collect();
    let mut removed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !removed[v])
            .min_by_key(|&v| (degree[v], v))
            .unwrap();
        removed[v] = true;
        order.push(v);
        for u in g.adj[v].ones() {
            if !removed[u] {
                degree[u] -= 1;
            }
        }
    }
    // later vertices in the order sit in denser cores
    let mut best: Vec<usize> = Vec::new();
    for (i, &v) in order.iter().enumerate() {
        let mut clique = vec![v];
        for &u in order[i + 1..].iter() {
            if clique.iter().all(|&w| g.has_edge(u, w)) {
                clique.push(u);
            }
        }
        if clique.len() > best.len() {
            best = clique;
        }
    }
    best.sort_unstable();
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(g: &Graph) -> usize {
        let n = g.len();
        (0u32..1 << n)
            .filter(|mask| {
                let vs: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
                g.is_clique(&vs)
            })
            .map(|mask| mask.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    #[test]
    fn path_of_three() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]);
        assert_eq!(exact_max_clique(&g).len(), 2);
    }

    #[test]
    fn complete_graph() {
        let n = 6;
        let edges: Vec<_> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .collect();
        let g = Graph::from_edges(n, &edges);
        assert_eq!(exact_max_clique(&g), (0..n).collect::<Vec<_>>());
        assert_eq!(greedy_clique(&g).len(), n);
    }

    #[test]
    fn empty_graph() {
        assert!(exact_max_clique(&Graph::new(0)).is_empty());
        assert_eq!(exact_max_clique(&Graph::new(3)).len(), 1);
    }

    #[test]
    fn large_graph_uses_greedy() {
        let n = 40;
        let edges: Vec<_> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .collect();
        let (c, m) = max_clique(&Graph::from_edges(n, &edges));
        assert_eq!(m, CliqueMethod::Greedy);
        assert_eq!(c.len(), n);
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        (0usize..=12).prop_flat_map(|n| {
            prop::collection::vec(any::<bool>(), n * n).prop_map(move |bits| {
                let mut g = Graph::new(n);
                for a in 0..n {
                    for b in a + 1..n {
                        if bits[a * n + b] {
                            g.add_edge(a, b);
                        }
                    }
                }
                g
            })
        })
    }

    proptest! {
        #[test]
        fn exact_matches_brute_force(g in arb_graph()) {
            let c = exact_max_clique(&g);
            prop_assert!(g.is_clique(&c));
            prop_assert_eq!(c.len(), brute_force(&g));
            let greedy = greedy_clique(&g);
            prop_assert!(g.is_clique(&greedy));
            prop_assert!(greedy.len() <= c.len());
        }
    }
}
