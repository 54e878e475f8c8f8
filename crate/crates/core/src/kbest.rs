//! Enumeration of the k best conformations within an energy cutoff.
//!
//! Each node of the AND/OR tree carries a vector of up to k sorted values
//! instead of a single one. OR nodes merge their children by sorting; AND
//! nodes merge by the priority-queue walk over index sequences: seed with
//! (1, ..., 1), pop the minimum-sum sequence, push all single-coordinate
//! successors, and suppress duplicate sequences.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::time::Instant;

use crate::error::Error;
use crate::graph::PseudoTree;
use crate::heuristic::{MiniBucketHeuristic, UNASSIGNED};
use crate::model::{Conformation, EnergyModel};
use crate::search::{greedy_initial, SearchStats};

/// Up to k conformations sorted by energy, each within the cutoff of the
/// first; assignments are pairwise distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct KBestList {
    pub conformations: Vec<Conformation>,
}

impl KBestList {
    pub fn energies(&self) -> Vec<f64> {
        self.conformations.iter().map(|c| c.energy).collect()
    }
}

/// Result of the AND-node merge, with queue instrumentation: at most k pops
/// and at most `k*t + 1` pushes.
#[derive(Debug, Clone, PartialEq)]
pub struct AndMerge {
    /// The k smallest sums, ascending.
    pub values: Vec<f64>,
    /// 0-based index sequences, one per value: `values[j]` is the sum of
    /// `children[i][sequences[j][i]]` over all children `i`.
    pub sequences: Vec<Vec<usize>>,
    pub pops: usize,
    pub pushes: usize,
}

// Heap element ordered by (value, tie key); BinaryHeap is a max-heap, so
// everything is wrapped in Reverse at the call sites.
#[derive(Debug, Clone, PartialEq)]
struct QueueItem<K> {
    value: f64,
    tie: K,
    seq: Vec<usize>,
}

impl<K: Ord> Eq for QueueItem<K> {}

impl<K: Ord> PartialOrd for QueueItem<K> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<K: Ord> Ord for QueueItem<K> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.value.total_cmp(&other.value).then_with(|| self.tie.cmp(&other.tie))
    }
}

fn and_merge_by<K: Ord + Clone>(
    children: &[&[f64]],
    k: usize,
    tie_key: impl Fn(&[usize]) -> K,
) -> AndMerge {
    let t = children.len();
    assert!(children.iter().all(|c| !c.is_empty()), "AND merge children must be nonempty");
    let mut heap: BinaryHeap<Reverse<QueueItem<K>>> = BinaryHeap::new();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut pushes = 0;
    let mut pops = 0;
    let seed: Vec<usize> = vec![0; t];
    let seed_value: f64 = children.iter().map(|c| c[0]).sum();
    seen.insert(seed.clone());
    heap.push(Reverse(QueueItem { value: seed_value, tie: tie_key(&seed), seq: seed }));
    pushes += 1;

    let mut values = Vec::with_capacity(k);
    let mut sequences = Vec::with_capacity(k);
    while values.len() < k {
        let Some(Reverse(item)) = heap.pop() else { break };
        pops += 1;
        for j in 0..t {
            let mut succ = item.seq.clone();
            succ[j] += 1;
            if succ[j] >= children[j].len() || seen.contains(&succ) {
                continue;
            }
            let value: f64 = succ.iter().zip(children).map(|(&i, c)| c[i]).sum();
            seen.insert(succ.clone());
            heap.push(Reverse(QueueItem { value, tie: tie_key(&succ), seq: succ }));
            pushes += 1;
        }
        values.push(item.value);
        sequences.push(item.seq);
    }
    AndMerge { values, sequences, pops, pushes }
}

/// Merge the value vectors of an AND node's children: the k smallest sums of
/// one value per child, with their index sequences. Ties break toward the
/// lexicographically smallest sequence.
pub fn merge_and(children: &[Vec<f64>], k: usize) -> AndMerge {
    let slices: Vec<&[f64]> = children.iter().map(|c| c.as_slice()).collect();
    and_merge_by(&slices, k, |seq| seq.to_vec())
}

/// Merge the value vectors of an OR node's children by sorting: the k
/// smallest of `edge_cost + v_i`, stable-tied by (child index, i).
pub fn merge_or(children: &[(f64, Vec<f64>)], k: usize) -> Vec<f64> {
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (child, (e, vec)) in children.iter().enumerate() {
        for (i, v) in vec.iter().enumerate() {
            candidates.push((e + v, child, i));
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| (a.1, a.2).cmp(&(b.1, b.2))));
    candidates.truncate(k);
    candidates.into_iter().map(|(v, _, _)| v).collect()
}

/// A node-value entry: subtree value plus the subtree assignment that
/// produces it, stored as (residue, rotamer) pairs sorted by residue.
#[derive(Debug, Clone)]
struct Entry {
    value: f64,
    patch: Vec<(usize, usize)>,
}

fn merge_patches(parts: &[&Vec<(usize, usize)>]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = parts.iter().flat_map(|p| p.iter().copied()).collect();
    out.sort_unstable();
    out
}

struct KBestSearcher<'a> {
    model: &'a EnergyModel,
    tree: &'a PseudoTree,
    heuristic: Option<&'a MiniBucketHeuristic>,
    k: usize,
    delta: f64,
    /// Best known full-conformation energy.
    u1: f64,
    /// Current k-th best full-conformation energy; infinity until k found.
    uk: f64,
    ctx: Vec<usize>,
    stats: SearchStats,
}

impl<'a> KBestSearcher<'a> {
    fn edge_cost(&self, x: usize, r: usize) -> f64 {
        let mut anc: Vec<usize> = self.tree.ancestors(x).collect();
        anc.sort_unstable();
        let mut e = self.model.self_energy(x, r);
        for a in anc {
            let ra = self.ctx[a];
            e += if a < x {
                self.model.pair_energy(a, x, ra, r)
            } else {
                self.model.pair_energy(x, a, r, ra)
            };
        }
        e
    }

    /// Value vector of OR node `x`. `path_g` is the energy of the root-to-`x`
    /// path (edge costs of all ancestor AND nodes, template energy excluded).
    /// When `x` is the root of a single-component tree, its candidate values
    /// are complete conformations, so the incumbent thresholds refresh as
    /// the rotamers finish.
    fn kb_or(&mut self, x: usize, path_g: f64, root_of_single: bool) -> Vec<Entry> {
        self.stats.expanded_or += 1;
        let mut candidates: Vec<Entry> = Vec::new();
        for r in 0..self.model.domain(x) {
            let e = self.edge_cost(x, r);
            self.ctx[x] = r;
            let h = match self.heuristic {
                Some(h) => {
                    self.stats.heuristic_evals += 1;
                    h.and_bound(x, &self.ctx)
                }
                None => 0.0,
            };
            // Bound on the cheapest full conformation through this AND node;
            // sibling-branch costs are conservatively ignored.
            let lb = self.model.e0() + path_g + e + h;
            if lb > self.u1 + self.delta && lb > self.uk {
                self.stats.pruned += 1;
                self.ctx[x] = UNASSIGNED;
                continue;
            }
            let child_entries = self.kb_and(x, r, path_g + e);
            self.ctx[x] = UNASSIGNED;
            for mut entry in child_entries {
                entry.value += e;
                entry.patch.push((x, r));
                entry.patch.sort_unstable();
                candidates.push(entry);
            }
            if root_of_single {
                let e0 = self.model.e0();
                let energies: Vec<f64> = candidates.iter().map(|c| e0 + c.value).collect();
                self.update_bounds(energies.into_iter());
            }
        }
        candidates
            .sort_by(|a, b| a.value.total_cmp(&b.value).then_with(|| a.patch.cmp(&b.patch)));
        candidates.truncate(self.k);
        candidates
    }

    /// Value vector of AND node `(x, r)`; `ctx[x]` is already set.
    fn kb_and(&mut self, x: usize, _r: usize, path_g: f64) -> Vec<Entry> {
        self.stats.expanded_and += 1;
        let kids = self.tree.children[x].clone();
        if kids.is_empty() {
            return vec![Entry { value: 0.0, patch: Vec::new() }];
        }
        let mut child_vectors: Vec<Vec<Entry>> = Vec::with_capacity(kids.len());
        for &c in &kids {
            let vec = self.kb_or(c, path_g, false);
            if vec.is_empty() {
                // A branch with no completion inside the bounds kills the
                // whole AND node.
                return Vec::new();
            }
            child_vectors.push(vec);
        }
        let value_slices: Vec<Vec<f64>> =
            child_vectors.iter().map(|v| v.iter().map(|e| e.value).collect()).collect();
        let slices: Vec<&[f64]> = value_slices.iter().map(|v| v.as_slice()).collect();
        let merged = and_merge_by(&slices, self.k, |seq| {
            let parts: Vec<&Vec<(usize, usize)>> =
                seq.iter().zip(&child_vectors).map(|(&i, v)| &v[i].patch).collect();
            merge_patches(&parts)
        });
        merged
            .values
            .iter()
            .zip(&merged.sequences)
            .map(|(&value, seq)| {
                let parts: Vec<&Vec<(usize, usize)>> =
                    seq.iter().zip(&child_vectors).map(|(&i, v)| &v[i].patch).collect();
                Entry { value, patch: merge_patches(&parts) }
            })
            .collect()
    }

    /// Refresh the incumbent thresholds from complete conformation energies.
    fn update_bounds(&mut self, energies: impl Iterator<Item = f64>) {
        let mut all: Vec<f64> = energies.collect();
        all.sort_by(f64::total_cmp);
        if let Some(&first) = all.first() {
            if first < self.u1 {
                self.u1 = first;
            }
        }
        if all.len() >= self.k {
            let kth = all[self.k - 1];
            if kth < self.uk {
                self.uk = kth;
            }
        }
    }
}

/// Depth-first AND/OR search for the k best conformations within `delta` of
/// the GMEC. Pruning is relaxed: a node survives unless its lower bound
/// exceeds both `U1 + delta` and the current k-th best energy.
pub fn kbest_solve(
    model: &EnergyModel,
    tree: &PseudoTree,
    heuristic: Option<&MiniBucketHeuristic>,
    k: usize,
    delta: f64,
) -> Result<(KBestList, SearchStats), Error> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    if delta < 0.0 {
        return Err(Error::InvalidArgument(format!("delta {delta} must be >= 0")));
    }
    let start = Instant::now();
    let initial = greedy_initial(model, tree, heuristic);
    let mut s = KBestSearcher {
        model,
        tree,
        heuristic,
        k,
        delta,
        u1: initial.energy,
        uk: f64::INFINITY,
        ctx: vec![UNASSIGNED; model.n()],
        stats: SearchStats::default(),
    };

    // The virtual root is an AND node over the component roots; their
    // vectors combine through the AND merge.
    let single_root = tree.roots.len() == 1;
    let mut root_vectors: Vec<Vec<Entry>> = Vec::new();
    for &root in &tree.roots {
        let vec = s.kb_or(root, 0.0, single_root);
        debug_assert!(!vec.is_empty(), "the best conformation is never pruned");
        root_vectors.push(vec);
    }

    let combined: Vec<Entry> = if root_vectors.len() == 1 {
        root_vectors.pop().unwrap()
    } else {
        let value_slices: Vec<Vec<f64>> =
            root_vectors.iter().map(|v| v.iter().map(|e| e.value).collect()).collect();
        let slices: Vec<&[f64]> = value_slices.iter().map(|v| v.as_slice()).collect();
        let merged = and_merge_by(&slices, k, |seq| {
            let parts: Vec<&Vec<(usize, usize)>> =
                seq.iter().zip(&root_vectors).map(|(&i, v)| &v[i].patch).collect();
            merge_patches(&parts)
        });
        merged
            .values
            .iter()
            .zip(&merged.sequences)
            .map(|(&value, seq)| {
                let parts: Vec<&Vec<(usize, usize)>> =
                    seq.iter().zip(&root_vectors).map(|(&i, v)| &v[i].patch).collect();
                Entry { value, patch: merge_patches(&parts) }
            })
            .collect()
    };

    let mut conformations: Vec<Conformation> = combined
        .into_iter()
        .map(|entry| {
            let mut assignment = vec![0usize; model.n()];
            for (x, r) in entry.patch {
                assignment[x] = r;
            }
            model.conformation(assignment)
        })
        .collect::<Result<_, _>>()?;
    conformations
        .sort_by(|a, b| a.energy.total_cmp(&b.energy).then_with(|| a.assignment.cmp(&b.assignment)));
    let gmec = conformations[0].energy;
    conformations.retain(|c| c.energy <= gmec + delta);
    conformations.truncate(k);
    s.stats.elapsed = start.elapsed();
    Ok((KBestList { conformations }, s.stats))
}
