//! Residue interaction network, greedy min-fill elimination ordering, and
//! pseudo-tree construction.
//!
//! A pseudo-tree is a rooted spanning tree in which every graph edge connects
//! a node to one of its ancestors or descendants; it is what lets the search
//! decompose the problem into independent branches.

use std::collections::BTreeSet;

use crate::error::Error;
use crate::model::EnergyModel;

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionGraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    /// Sum of pair-table ranges of all dropped pairs; 0 without sparsification.
    pub dropped_error_bound: f64,
}

impl InteractionGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let edges: BTreeSet<(usize, usize)> = edges.into_iter().collect();
        for &(i, j) in &edges {
            assert!(i < j && j < n, "edge ({i},{j}) violates i < j < n");
        }
        InteractionGraph { n, edges, dropped_error_bound: 0.0 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        self.edges.contains(&(i, j))
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.n).filter(|&u| u != v && self.has_edge(u, v)).collect()
    }
}

/// Builds the interaction network of `model`, keeping an edge iff the pair
/// table's range (max − min) exceeds `lambda`. Each dropped pair folds its
/// minimum entry into `e0`, so the returned model lower-bounds the original
/// by at most `dropped_error_bound` for every assignment.
pub fn build_interaction_graph(
    model: &EnergyModel,
    lambda: f64,
) -> Result<(InteractionGraph, EnergyModel), Error> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::InvalidArgument(format!("lambda {lambda} must be nonnegative")));
    }
    let mut kept = BTreeSet::new();
    let mut sparsified = model.clone();
    let mut bound = 0.0;
    for (i, j) in model.pairs() {
        let (lo, hi) = model.pair_range(i, j)?;
        if hi - lo > lambda {
            kept.insert((i, j));
        } else {
            sparsified = sparsified.without_pair(i, j, lo);
            bound += hi - lo;
        }
    }
    let mut graph = InteractionGraph::new(model.n(), kept);
    graph.dropped_error_bound = bound;
    Ok((graph, sparsified))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EliminationOrdering {
    /// Elimination order; `order[0]` is eliminated first.
    pub order: Vec<usize>,
    pub induced_width: usize,
}

/// Greedy min-fill: repeatedly eliminate the node whose elimination adds the
/// fewest fill edges, ties toward the lowest index. The reported induced
/// width is the largest neighborhood encountered at elimination time.
pub fn min_fill_ordering(graph: &InteractionGraph) -> EliminationOrdering {
    let n = graph.n();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (i, j) in graph.edges() {
        adj[i].insert(j);
        adj[j].insert(i);
    }
    let mut remaining: BTreeSet<usize> = (0..n).collect();
    let mut order = Vec::with_capacity(n);
    let mut width = 0;
    while !remaining.is_empty() {
        let mut best = (usize::MAX, usize::MAX); // (fill, node)
        for &v in &remaining {
            let nbrs: Vec<usize> = adj[v].iter().copied().collect();
            let mut fill = 0;
            for (a, &x) in nbrs.iter().enumerate() {
                for &y in &nbrs[a + 1..] {
                    if !adj[x].contains(&y) {
                        fill += 1;
                    }
                }
            }
            if fill < best.0 {
                best = (fill, v);
            }
        }
        let v = best.1;
        let nbrs: Vec<usize> = adj[v].iter().copied().collect();
        width = width.max(nbrs.len());
        for (a, &x) in nbrs.iter().enumerate() {
            for &y in &nbrs[a + 1..] {
                adj[x].insert(y);
                adj[y].insert(x);
            }
        }
        for &x in &nbrs {
            adj[x].remove(&v);
        }
        remaining.remove(&v);
        order.push(v);
    }
    EliminationOrdering { order, induced_width: width }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoTree {
    /// Parent of each node; `None` marks a component root (child of the
    /// virtual root).
    pub parent: Vec<Option<usize>>,
    /// Component roots, ascending.
    pub roots: Vec<usize>,
    /// Children of each node, ascending.
    pub children: Vec<Vec<usize>>,
    /// Depth-first visit order (roots ascending, children ascending).
    pub order: Vec<usize>,
    /// Longest root-to-leaf path, counted in nodes.
    pub depth: usize,
}

impl PseudoTree {
    pub fn from_parents(parent: Vec<Option<usize>>) -> Self {
        let n = parent.len();
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut roots = Vec::new();
        for (v, p) in parent.iter().enumerate() {
            match p {
                Some(p) => children[*p].push(v),
                None => roots.push(v),
            }
        }
        for c in &mut children {
            c.sort_unstable();
        }
        let mut order = Vec::with_capacity(n);
        let mut depth = 0;
        // Iterative preorder; stack entries carry (node, depth).
        let mut stack: Vec<(usize, usize)> =
            roots.iter().rev().map(|&r| (r, 1)).collect();
        while let Some((v, d)) = stack.pop() {
            order.push(v);
            depth = depth.max(d);
            for &c in children[v].iter().rev() {
                stack.push((c, d + 1));
            }
        }
        assert_eq!(order.len(), n, "parent links must form a forest over all nodes");
        PseudoTree { parent, roots, children, order, depth }
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    /// Ancestors of `v` from its parent up to the component root.
    pub fn ancestors(&self, v: usize) -> Ancestors<'_> {
        Ancestors { tree: self, cur: self.parent[v] }
    }

    pub fn is_ancestor(&self, a: usize, v: usize) -> bool {
        self.ancestors(v).any(|x| x == a)
    }

    /// Nodes of the subtree rooted at `v`, preorder.
    pub fn subtree(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            out.push(x);
            stack.extend(self.children[x].iter().rev());
        }
        out
    }
}

pub struct Ancestors<'a> {
    tree: &'a PseudoTree,
    cur: Option<usize>,
}

impl Iterator for Ancestors<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        let v = self.cur?;
        self.cur = self.tree.parent[v];
        Some(v)
    }
}

/// Builds a pseudo-tree from an elimination ordering via the induced graph:
/// the parent of `v` is the induced-graph neighbor of `v` that is eliminated
/// earliest among those eliminated after `v`. Nodes without later neighbors
/// become component roots. Validity is asserted post-construction.
pub fn build_pseudo_tree(graph: &InteractionGraph, ordering: &EliminationOrdering) -> PseudoTree {
    let n = graph.n();
    assert_eq!(ordering.order.len(), n, "ordering must be a permutation of the nodes");
    let mut pos = vec![usize::MAX; n];
    for (p, &v) in ordering.order.iter().enumerate() {
        assert!(pos[v] == usize::MAX, "ordering must be a permutation of the nodes");
        pos[v] = p;
    }
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (i, j) in graph.edges() {
        adj[i].insert(j);
        adj[j].insert(i);
    }
    let mut parent = vec![None; n];
    for &v in &ordering.order {
        let later: Vec<usize> = adj[v].iter().copied().filter(|&u| pos[u] > pos[v]).collect();
        // Fill edges among the later neighbors.
        for (a, &x) in later.iter().enumerate() {
            for &y in &later[a + 1..] {
                adj[x].insert(y);
                adj[y].insert(x);
            }
        }
        parent[v] = later.iter().copied().min_by_key(|&u| pos[u]);
    }
    let tree = PseudoTree::from_parents(parent);
    assert!(validate_pseudo_tree(graph, &tree), "constructed pseudo-tree is invalid");
    tree
}

/// True iff `tree` is a spanning forest of the graph's nodes and every graph
/// edge connects a node to one of its ancestors or descendants.
pub fn validate_pseudo_tree(graph: &InteractionGraph, tree: &PseudoTree) -> bool {
    if tree.n() != graph.n() {
        return false;
    }
    // from_parents already guarantees forest structure; check edge validity.
    graph
        .edges()
        .all(|(i, j)| tree.is_ancestor(i, j) || tree.is_ancestor(j, i))
}
