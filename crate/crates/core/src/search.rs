//! Depth-first AND/OR branch-and-bound over a pseudo-tree.
//!
//! OR nodes are residue choice points; AND nodes commit a rotamer and
//! decompose the remainder into independent pseudo-tree branches. Node values
//! follow the standard recursion: a leaf is 0, an AND node sums its children,
//! an OR node minimizes `e(y) + v(y)` over its children, where `e(y)` is the
//! rotamer's self energy plus its pairwise terms to assigned ancestors.
//! Pruning compares `e(y) + h(y)` against the remaining budget of the best
//! known full conformation; the search runs in memory linear in `n` beyond
//! the heuristic tables.

use std::time::{Duration, Instant};

use crate::error::Error;
use crate::graph::PseudoTree;
use crate::heuristic::{MiniBucketHeuristic, UNASSIGNED};
use crate::model::{Conformation, EnergyModel};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SearchStats {
    pub expanded_or: u64,
    pub expanded_and: u64,
    pub pruned: u64,
    pub heuristic_evals: u64,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub conformation: Conformation,
    pub stats: SearchStats,
    /// Incumbent energies in the order they were established; non-increasing.
    pub incumbent_trace: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    /// Starting incumbent; when `None` and `use_greedy_initial` is set, a
    /// greedy descent provides one.
    pub initial_incumbent: Option<Conformation>,
    pub use_greedy_initial: bool,
    /// Disable pruning: infinite incumbent, heuristic ignored.
    pub no_prune: bool,
}

impl SolveOptions {
    pub fn new() -> Self {
        SolveOptions { initial_incumbent: None, use_greedy_initial: true, no_prune: false }
    }
}

struct Searcher<'a> {
    model: &'a EnergyModel,
    tree: &'a PseudoTree,
    heuristic: Option<&'a MiniBucketHeuristic>,
    no_prune: bool,
    ctx: Vec<usize>,
    stats: SearchStats,
}

impl<'a> Searcher<'a> {
    fn new(
        model: &'a EnergyModel,
        tree: &'a PseudoTree,
        heuristic: Option<&'a MiniBucketHeuristic>,
        no_prune: bool,
    ) -> Self {
        Searcher {
            model,
            tree,
            heuristic,
            no_prune,
            ctx: vec![UNASSIGNED; model.n()],
            stats: SearchStats::default(),
        }
    }

    /// Self energy of `(x, r)` plus pairwise terms to assigned ancestors,
    /// ascending ancestor index.
    fn edge_cost(&self, x: usize, r: usize) -> f64 {
        let mut anc: Vec<usize> = self.tree.ancestors(x).collect();
        anc.sort_unstable();
        let mut e = self.model.self_energy(x, r);
        for a in anc {
            let ra = self.ctx[a];
            debug_assert!(ra != UNASSIGNED);
            e += if a < x {
                self.model.pair_energy(a, x, ra, r)
            } else {
                self.model.pair_energy(x, a, r, ra)
            };
        }
        e
    }

    fn or_bound(&mut self, x: usize) -> f64 {
        if self.no_prune {
            return 0.0;
        }
        match self.heuristic {
            Some(h) => {
                self.stats.heuristic_evals += 1;
                h.or_bound(x, &self.ctx)
            }
            None => 0.0,
        }
    }

    /// Minimize the subtree rooted at OR node `x` under `budget`. Returns the
    /// value and the subtree assignment, or `None` when no completion beats
    /// the budget.
    fn solve_or(&mut self, x: usize, budget: f64) -> Option<(f64, Vec<(usize, usize)>)> {
        self.stats.expanded_or += 1;
        let mut children: Vec<(f64, f64, usize)> = (0..self.model.domain(x))
            .map(|r| {
                let e = self.edge_cost(x, r);
                self.ctx[x] = r;
                let h = match self.heuristic {
                    Some(h) if !self.no_prune => {
                        self.stats.heuristic_evals += 1;
                        h.and_bound(x, &self.ctx)
                    }
                    _ => 0.0,
                };
                self.ctx[x] = UNASSIGNED;
                (e, h, r)
            })
            .collect();
        children.sort_by(|a, b| {
            (a.0 + a.1).total_cmp(&(b.0 + b.1)).then_with(|| a.2.cmp(&b.2))
        });

        let mut best: Option<(f64, Vec<(usize, usize)>)> = None;
        for (e, h, r) in children {
            let ub = best.as_ref().map_or(budget, |(v, _)| v.min(budget));
            if !self.no_prune && e + h >= ub {
                self.stats.pruned += 1;
                continue;
            }
            if let Some((v, mut patch)) = self.solve_and(x, r, ub - e) {
                let total = e + v;
                if total < ub {
                    patch.push((x, r));
                    best = Some((total, patch));
                }
            }
        }
        if self.no_prune {
            return best;
        }
        best.filter(|(v, _)| *v < budget)
    }

    /// Solve the independent branches below AND node `(x, r)` under `budget`.
    fn solve_and(&mut self, x: usize, r: usize, budget: f64) -> Option<(f64, Vec<(usize, usize)>)> {
        self.stats.expanded_and += 1;
        self.ctx[x] = r;
        let kids = self.tree.children[x].clone();
        let bounds: Vec<f64> = kids.iter().map(|&c| self.or_bound(c)).collect();
        let mut total = 0.0;
        let mut patch: Vec<(usize, usize)> = Vec::new();
        let mut result = Some(());
        for (idx, &c) in kids.iter().enumerate() {
            let remaining_bounds: f64 = bounds[idx + 1..].iter().sum();
            let child_budget =
                if self.no_prune { f64::INFINITY } else { budget - total - remaining_bounds };
            match self.solve_or(c, child_budget) {
                Some((v, sub)) => {
                    total += v;
                    patch.extend(sub);
                }
                None => {
                    result = None;
                    break;
                }
            }
        }
        self.ctx[x] = UNASSIGNED;
        result.map(|_| (total, patch))
    }
}

/// Greedy root-to-leaves descent: at each OR node pick the rotamer minimizing
/// `e(y) + h(y)`. With exact tables this lands on the GMEC.
pub fn greedy_initial(
    model: &EnergyModel,
    tree: &PseudoTree,
    heuristic: Option<&MiniBucketHeuristic>,
) -> Conformation {
    let mut s = Searcher::new(model, tree, heuristic, false);
    let mut assignment = vec![0usize; model.n()];
    let mut stack: Vec<usize> = tree.roots.iter().rev().copied().collect();
    while let Some(x) = stack.pop() {
        let mut best = (f64::INFINITY, 0usize);
        for r in 0..model.domain(x) {
            let e = s.edge_cost(x, r);
            s.ctx[x] = r;
            let h = match heuristic {
                Some(h) => h.and_bound(x, &s.ctx),
                None => 0.0,
            };
            s.ctx[x] = UNASSIGNED;
            if e + h < best.0 {
                best = (e + h, r);
            }
        }
        s.ctx[x] = best.1;
        assignment[x] = best.1;
        stack.extend(tree.children[x].iter().rev());
    }
    model.conformation(assignment).expect("greedy descent yields a full assignment")
}

/// AND/OR branch-and-bound. Returns a global minimizer of the total energy;
/// the conformation's energy is recomputed in canonical summation order.
pub fn solve(
    model: &EnergyModel,
    tree: &PseudoTree,
    heuristic: Option<&MiniBucketHeuristic>,
    options: &SolveOptions,
) -> Result<Solution, Error> {
    let start = Instant::now();
    let incumbent = match (&options.initial_incumbent, options.no_prune) {
        (_, true) => None,
        (Some(c), _) => Some(c.clone()),
        (None, _) if options.use_greedy_initial => {
            Some(greedy_initial(model, tree, heuristic, ))
        }
        (None, _) => None,
    };
    let mut trace: Vec<f64> = incumbent.iter().map(|c| c.energy).collect();

    let mut s = Searcher::new(model, tree, heuristic, options.no_prune);
    let budget = match &incumbent {
        Some(c) if !options.no_prune => c.energy - model.e0(),
        _ => f64::INFINITY,
    };
    // The virtual root is an AND node over the component roots.
    let bounds: Vec<f64> = tree.roots.clone().iter().map(|&r| s.or_bound(r)).collect();
    let mut total = 0.0;
    let mut patch: Vec<(usize, usize)> = Vec::new();
    let mut complete = true;
    for (idx, &root) in tree.roots.iter().enumerate() {
        let remaining: f64 = bounds[idx + 1..].iter().sum();
        let child_budget = if s.no_prune { f64::INFINITY } else { budget - total - remaining };
        match s.solve_or(root, child_budget) {
            Some((v, sub)) => {
                total += v;
                patch.extend(sub);
            }
            None => {
                complete = false;
                break;
            }
        }
    }

    let conformation = if complete {
        let mut assignment = vec![0usize; model.n()];
        for (x, r) in patch {
            assignment[x] = r;
        }
        let c = model.conformation(assignment)?;
        if trace.last().is_none_or(|&last| c.energy <= last) {
            trace.push(c.energy);
        }
        c
    } else {
        incumbent.ok_or_else(|| {
            Error::InvalidArgument("search exhausted without incumbent or completion".into())
        })?
    };
    s.stats.elapsed = start.elapsed();
    Ok(Solution { conformation, stats: s.stats, incumbent_trace: trace })
}

/// Size of the full (unpruned) AND/OR search tree: `(or_nodes, and_nodes)`.
pub fn count_full_tree(tree: &PseudoTree, domains: &[usize]) -> (u64, u64) {
    let mut or_nodes = 0u64;
    let mut and_nodes = 0u64;
    for x in 0..tree.n() {
        let contexts: u64 = tree.ancestors(x).map(|a| domains[a] as u64).product();
        or_nodes += contexts;
        and_nodes += contexts * domains[x] as u64;
    }
    (or_nodes, and_nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{six_node_pseudo_tree, toy2, two_component};
    use crate::graph::{build_interaction_graph, build_pseudo_tree, min_fill_ordering};
    use crate::heuristic::{mini_bucket_elimination, DEFAULT_MEM_CAP};
    use crate::oracle::{brute_force_min, plain_bnb};

    // Sparsified model, tree and heuristic must come from the same graph.
    fn pipeline(
        model: &EnergyModel,
        i_bound: usize,
    ) -> (EnergyModel, PseudoTree, MiniBucketHeuristic) {
        let (g, ms) = build_interaction_graph(model, 0.0).unwrap();
        let tree = build_pseudo_tree(&g, &min_fill_ordering(&g));
        let h = mini_bucket_elimination(&ms, &tree, i_bound, DEFAULT_MEM_CAP).unwrap();
        (ms, tree, h)
    }

    #[test]
    fn toy2_solve() {
        let m = toy2();
        let (ms, tree, h) = pipeline(&m, 4);
        let sol = solve(&ms, &tree, Some(&h), &SolveOptions::new()).unwrap();
        assert_eq!(sol.conformation.assignment, vec![0, 1]);
        assert_eq!(sol.conformation.energy, 1.6);
    }

    #[test]
    fn single_residue_model() {
        let m = crate::model::random_instance(4, 1, 4, 0.0, 1.0).unwrap();
        let (ms, tree, h) = pipeline(&m, 2);
        let sol = solve(&ms, &tree, Some(&h), &SolveOptions::new()).unwrap();
        let oracle = brute_force_min(&m, None).unwrap();
        assert_eq!(sol.conformation.energy, oracle.energy);
    }

    #[test]
    fn matches_oracle_on_random_instances() {
        for seed in 0..40 {
            let n = 2 + (seed as usize % 7);
            let m = crate::model::random_instance(seed, n, 4, 0.6, 1.0).unwrap();
            let (ms, tree, h) = pipeline(&m, 3);
            let sol = solve(&ms, &tree, Some(&h), &SolveOptions::new()).unwrap();
            let oracle = brute_force_min(&m, None).unwrap();
            assert_eq!(sol.conformation.energy, oracle.energy, "seed {seed}");
        }
    }

    #[test]
    fn no_prune_agrees_and_expands_more() {
        for seed in 0..10 {
            let m = crate::model::random_instance(50 + seed, 6, 3, 0.7, 1.0).unwrap();
            let (ms, tree, h) = pipeline(&m, 6);
            let pruned = solve(&ms, &tree, Some(&h), &SolveOptions::new()).unwrap();
            let mut opts = SolveOptions::new();
            opts.no_prune = true;
            let full = solve(&ms, &tree, Some(&h), &opts).unwrap();
            assert_eq!(pruned.conformation.energy, full.conformation.energy);
            assert!(full.stats.expanded_and >= pruned.stats.expanded_and);
            assert_eq!(full.stats.pruned, 0);
        }
    }

    #[test]
    fn greedy_with_exact_tables_is_optimal() {
        let m = toy2();
        let (ms, tree, h) = pipeline(&m, 4);
        let greedy = greedy_initial(&ms, &tree, Some(&h));
        assert_eq!(greedy.assignment, vec![0, 1]);
        assert_eq!(greedy.energy, 1.6);
    }

    #[test]
    fn greedy_upper_bounds_the_optimum() {
        for seed in 0..20 {
            let m = crate::model::random_instance(70 + seed, 6, 4, 0.5, 1.0).unwrap();
            let (ms, tree, h) = pipeline(&m, 2);
            let greedy = greedy_initial(&ms, &tree, Some(&h));
            let oracle = brute_force_min(&m, None).unwrap();
            assert!(greedy.energy >= oracle.energy);
        }
    }

    #[test]
    fn greedy_on_edgeless_model_is_separable() {
        let m = crate::model::random_instance(8, 5, 4, 0.0, 1.0).unwrap();
        let (ms, tree, h) = pipeline(&m, 2);
        let greedy = greedy_initial(&ms, &tree, Some(&h));
        for i in 0..m.n() {
            let best = (0..m.domain(i))
                .min_by(|&a, &b| m.self_energy(i, a).total_cmp(&m.self_energy(i, b)))
                .unwrap();
            assert_eq!(m.self_energy(i, greedy.assignment[i]), m.self_energy(i, best));
        }
    }

    #[test]
    fn decomposition_beats_plain_bnb() {
        for seed in 0..20 {
            let m = two_component(seed, 3, 3);
            let (g, ms) = build_interaction_graph(&m, 0.0).unwrap();
            let tree = build_pseudo_tree(&g, &min_fill_ordering(&g));
            let mut opts = SolveOptions::new();
            opts.use_greedy_initial = false;
            let aobb = solve(&ms, &tree, None, &opts).unwrap();
            let plain = plain_bnb(&m, None::<fn(usize, &[usize]) -> f64>).unwrap();
            assert_eq!(aobb.conformation.energy, plain.conformation.energy);
            assert!(
                aobb.stats.expanded_and < plain.stats.expanded_and,
                "seed {seed}: {} vs {}",
                aobb.stats.expanded_and,
                plain.stats.expanded_and
            );
        }
    }

    #[test]
    fn incumbent_trace_is_non_increasing() {
        for seed in 0..10 {
            let m = crate::model::random_instance(90 + seed, 7, 3, 0.5, 1.0).unwrap();
            let (ms, tree, h) = pipeline(&m, 2);
            let sol = solve(&ms, &tree, Some(&h), &SolveOptions::new()).unwrap();
            for w in sol.incumbent_trace.windows(2) {
                assert!(w[1] <= w[0]);
            }
        }
    }

    #[test]
    fn solution_tree_value_recursion_consistent() {
        // Recompute v bottom-up over the traced solution tree.
        fn v_or(m: &EnergyModel, t: &PseudoTree, x: usize, a: &[usize]) -> f64 {
            let mut anc: Vec<usize> = t.ancestors(x).collect();
            anc.sort_unstable();
            let r = a[x];
            let mut e = m.self_energy(x, r);
            for p in anc {
                let (i, j) = if p < x { (p, x) } else { (x, p) };
                e += m.pair_energy(i, j, a[i], a[j]);
            }
            e + t.children[x].iter().map(|&c| v_or(m, t, c, a)).sum::<f64>()
        }
        for seed in 0..10 {
            let m = crate::model::random_instance(110 + seed, 6, 3, 0.7, 1.0).unwrap();
            let (ms, tree, h) = pipeline(&m, 6);
            let sol = solve(&ms, &tree, Some(&h), &SolveOptions::new()).unwrap();
            let v_root: f64 = tree
                .roots
                .iter()
                .map(|&r| v_or(&ms, &tree, r, &sol.conformation.assignment))
                .sum();
            assert_eq!(ms.e0() + v_root, sol.conformation.energy);
        }
    }

    #[test]
    fn exact_heuristic_usually_dominates_loose() {
        let mut wins = 0;
        let total = 100;
        for seed in 0..total {
            let m = crate::model::random_instance(500 + seed, 7, 3, 0.7, 1.0).unwrap();
            let (g, ms) = build_interaction_graph(&m, 0.0).unwrap();
            let ord = min_fill_ordering(&g);
            let tree = build_pseudo_tree(&g, &ord);
            let exact = mini_bucket_elimination(&ms, &tree, ord.induced_width + 1, DEFAULT_MEM_CAP)
                .unwrap();
            let loose = mini_bucket_elimination(&ms, &tree, 2, DEFAULT_MEM_CAP).unwrap();
            let a = solve(&ms, &tree, Some(&exact), &SolveOptions::new()).unwrap();
            let b = solve(&ms, &tree, Some(&loose), &SolveOptions::new()).unwrap();
            assert_eq!(a.conformation.energy, b.conformation.energy);
            if a.stats.expanded_and <= b.stats.expanded_and {
                wins += 1;
            }
        }
        assert!(wins * 10 >= total * 9, "exact heuristic won only {wins}/{total}");
    }

    #[test]
    fn count_full_tree_fixtures() {
        let tree = six_node_pseudo_tree();
        assert_eq!(count_full_tree(&tree, &[2; 6]), (27, 54));
        // Chain of 6 nodes: the AND/OR tree equals the plain OR tree.
        let chain = PseudoTree::from_parents(vec![None, Some(0), Some(1), Some(2), Some(3), Some(4)]);
        let (or_n, and_n) = count_full_tree(&chain, &[2; 6]);
        assert_eq!(or_n, 63);
        assert_eq!(and_n, 126);
        let single = PseudoTree::from_parents(vec![None]);
        assert_eq!(count_full_tree(&single, &[5]), (1, 5));
    }
}
