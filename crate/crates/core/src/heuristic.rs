//! Bucket elimination and i-bounded mini-bucket elimination over a
//! pseudo-tree.
//!
//! Each node's bucket collects its self energy, its pairwise terms to
//! ancestors, and the messages of its pseudo-tree children; eliminating the
//! node by minimization produces messages over ancestor scopes. With a single
//! mini-bucket per node this is exact and the root value is the GMEC energy;
//! with an i-bound the bucket is partitioned and the per-node sum of
//! mini-bucket tables is an admissible lower bound.

use crate::error::Error;
use crate::graph::PseudoTree;
use crate::model::EnergyModel;

pub const DEFAULT_MEM_CAP: u64 = 512 * 1024 * 1024;

/// Sentinel for unassigned residues in a partial-assignment context.
pub const UNASSIGNED: usize = usize::MAX;

/// A table over a sorted scope of residues, row-major with the last scope
/// variable fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub scope: Vec<usize>,
    card: Vec<usize>,
    pub values: Vec<f64>,
}

impl Table {
    fn new(scope: Vec<usize>, model: &EnergyModel) -> Self {
        let card: Vec<usize> = scope.iter().map(|&v| model.domain(v)).collect();
        let len = card.iter().product();
        Table { scope, card, values: vec![0.0; len] }
    }

    fn from_values(scope: Vec<usize>, model: &EnergyModel, values: Vec<f64>) -> Self {
        let card: Vec<usize> = scope.iter().map(|&v| model.domain(v)).collect();
        debug_assert_eq!(card.iter().product::<usize>(), values.len());
        Table { scope, card, values }
    }

    /// Look up the entry selected by `ctx`; every scope variable must be
    /// assigned.
    pub fn eval(&self, ctx: &[usize]) -> f64 {
        let mut idx = 0;
        for (k, &v) in self.scope.iter().enumerate() {
            let r = ctx[v];
            assert!(r != UNASSIGNED, "scope variable {v} unassigned in heuristic lookup");
            debug_assert!(r < self.card[k]);
            idx = idx * self.card[k] + r;
        }
        self.values[idx]
    }
}

/// Exact elimination result: one message table per node plus the root value.
#[derive(Debug, Clone)]
pub struct BucketTables {
    /// `tables[x]` is the message produced by node `x`'s bucket, a function
    /// of `x`'s ancestors.
    pub tables: Vec<Table>,
    /// Exact GMEC energy of the model (template energy included).
    pub root_value: f64,
}

/// Mini-bucket heuristic: per-node message tables and the partition that
/// produced them.
#[derive(Debug, Clone)]
pub struct MiniBucketHeuristic {
    pub i_bound: usize,
    /// Messages produced by each node's bucket, one per mini-bucket.
    pub messages: Vec<Vec<Table>>,
    /// Joint scope (bucket variable included) of each mini-bucket.
    pub partitions: Vec<Vec<Vec<usize>>>,
    pub memory_bytes: u64,
    e0: f64,
    children: Vec<Vec<usize>>,
    roots: Vec<usize>,
}

impl MiniBucketHeuristic {
    /// Lower bound on the completion cost of the subtree rooted at OR node
    /// `x`, given an assignment of `x`'s scope ancestors.
    pub fn or_bound(&self, x: usize, ctx: &[usize]) -> f64 {
        self.messages[x].iter().map(|t| t.eval(ctx)).sum()
    }

    /// Lower bound below AND node `(x, ctx[x])`: sum of the bounds of `x`'s
    /// pseudo-tree children. `ctx[x]` must be assigned.
    pub fn and_bound(&self, x: usize, ctx: &[usize]) -> f64 {
        debug_assert!(ctx[x] != UNASSIGNED);
        self.children[x].iter().map(|&c| self.or_bound(c, ctx)).sum()
    }

    /// Lower bound on the GMEC energy (template energy included).
    pub fn root_bound(&self) -> f64 {
        let ctx: Vec<usize> = vec![UNASSIGNED; self.children.len()];
        self.e0 + self.roots.iter().map(|&r| self.or_bound(r, &ctx)).sum::<f64>()
    }
}

struct Elimination {
    messages: Vec<Vec<Table>>,
    partitions: Vec<Vec<Vec<usize>>>,
    memory_bytes: u64,
}

/// Functions feeding one bucket, before partitioning.
fn bucket_functions(
    model: &EnergyModel,
    tree: &PseudoTree,
    messages: &[Vec<Table>],
    x: usize,
) -> Vec<Table> {
    let mut funcs = Vec::new();
    funcs.push(Table::from_values(vec![x], model, model.self_energies(x).to_vec()));
    let mut anc: Vec<usize> = tree.ancestors(x).collect();
    anc.sort_unstable();
    for a in anc {
        let (i, j) = if a < x { (a, x) } else { (x, a) };
        if let Some(values) = model.pair_table(i, j) {
            funcs.push(Table::from_values(vec![i, j], model, values.to_vec()));
        }
    }
    for &c in &tree.children[x] {
        funcs.extend(messages[c].iter().cloned());
    }
    funcs
}

/// Greedy first-fit partition. Functions are sorted by decreasing scope size,
/// ties by descending lexicographic scope, which reproduces the worked
/// mini-bucket split (deepest ancestors grouped first). `None` means a single
/// unbounded mini-bucket.
fn partition_bucket(funcs: Vec<Table>, x: usize, i_bound: Option<usize>) -> Vec<Vec<Table>> {
    match i_bound {
        None => vec![funcs],
        Some(ib) => {
            let mut sorted = funcs;
            sorted.sort_by(|a, b| {
                b.scope.len().cmp(&a.scope.len()).then_with(|| b.scope.cmp(&a.scope))
            });
            let mut buckets: Vec<(Vec<usize>, Vec<Table>)> = Vec::new();
            'outer: for f in sorted {
                for (scope, members) in &mut buckets {
                    let mut joint = scope.clone();
                    for &v in &f.scope {
                        if !joint.contains(&v) {
                            joint.push(v);
                        }
                    }
                    if joint.len() <= ib {
                        joint.sort_unstable();
                        *scope = joint;
                        members.push(f);
                        continue 'outer;
                    }
                }
                let mut scope = f.scope.clone();
                if !scope.contains(&x) {
                    scope.push(x);
                    scope.sort_unstable();
                }
                buckets.push((scope, vec![f]));
            }
            buckets.into_iter().map(|(_, members)| members).collect()
        }
    }
}

fn joint_scope(members: &[Table], x: usize) -> Vec<usize> {
    let mut scope = vec![x];
    for f in members {
        for &v in &f.scope {
            if !scope.contains(&v) {
                scope.push(v);
            }
        }
    }
    scope.sort_unstable();
    scope
}

/// Eliminate one mini-bucket: minimize the sum of `members` over `x`,
/// producing a message over the remaining scope.
fn eliminate_mini_bucket(model: &EnergyModel, members: &[Table], x: usize) -> Table {
    let joint = joint_scope(members, x);
    let msg_scope: Vec<usize> = joint.iter().copied().filter(|&v| v != x).collect();
    let mut msg = Table::new(msg_scope.clone(), model);
    let mut ctx = vec![UNASSIGNED; model.n()];
    let cards: Vec<usize> = msg_scope.iter().map(|&v| model.domain(v)).collect();
    let dx = model.domain(x);
    for (out_idx, slot) in msg.values.iter_mut().enumerate() {
        // Decode the row-major output index into the context.
        let mut rem = out_idx;
        for k in (0..msg_scope.len()).rev() {
            ctx[msg_scope[k]] = rem % cards[k];
            rem /= cards[k];
        }
        let mut best = f64::INFINITY;
        for rx in 0..dx {
            ctx[x] = rx;
            let sum: f64 = members.iter().map(|f| f.eval(&ctx)).sum();
            if sum < best {
                best = sum;
            }
        }
        *slot = best;
        for &v in &msg_scope {
            ctx[v] = UNASSIGNED;
        }
        ctx[x] = UNASSIGNED;
    }
    msg
}

fn eliminate(
    model: &EnergyModel,
    tree: &PseudoTree,
    i_bound: Option<usize>,
    mem_cap: u64,
) -> Result<Elimination, Error> {
    let n = model.n();
    let mut messages: Vec<Vec<Table>> = vec![Vec::new(); n];
    let mut partitions: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n];
    let mut memory_bytes: u64 = 0;
    // Reverse preorder processes children before parents.
    for &x in tree.order.iter().rev() {
        let funcs = bucket_functions(model, tree, &messages, x);
        let parts = partition_bucket(funcs, x, i_bound);
        for members in parts {
            let joint = joint_scope(&members, x);
            let msg_entries: usize = joint
                .iter()
                .filter(|&&v| v != x)
                .map(|&v| model.domain(v))
                .product();
            memory_bytes += 8 * msg_entries as u64;
            if memory_bytes > mem_cap {
                return Err(Error::Resource {
                    detail: format!(
                        "elimination table memory exceeds cap of {mem_cap} bytes at bucket {x} with scope {joint:?}"
                    ),
                });
            }
            messages[x].push(eliminate_mini_bucket(model, &members, x));
            partitions[x].push(joint);
        }
    }
    Ok(Elimination { messages, partitions, memory_bytes })
}

/// Exact bucket elimination along the pseudo-tree. The root value equals the
/// GMEC energy.
pub fn bucket_elimination(
    model: &EnergyModel,
    tree: &PseudoTree,
    mem_cap: u64,
) -> Result<BucketTables, Error> {
    let elim = eliminate(model, tree, None, mem_cap)?;
    let mut root_value = model.e0();
    for &r in &tree.roots {
        debug_assert!(elim.messages[r][0].scope.is_empty());
        root_value += elim.messages[r][0].values[0];
    }
    let tables = elim
        .messages
        .into_iter()
        .map(|mut msgs| msgs.pop().expect("one message per bucket"))
        .collect();
    Ok(BucketTables { tables, root_value })
}

/// Mini-bucket elimination with at most `i_bound` variables per mini-bucket
/// (bucket variable included).
pub fn mini_bucket_elimination(
    model: &EnergyModel,
    tree: &PseudoTree,
    i_bound: usize,
    mem_cap: u64,
) -> Result<MiniBucketHeuristic, Error> {
    if i_bound < 2 {
        return Err(Error::InvalidArgument(format!("i_bound {i_bound} must be >= 2")));
    }
    let elim = eliminate(model, tree, Some(i_bound), mem_cap)?;
    Ok(MiniBucketHeuristic {
        i_bound,
        messages: elim.messages,
        partitions: elim.partitions,
        memory_bytes: elim.memory_bytes,
        e0: model.e0(),
        children: tree.children.clone(),
        roots: tree.roots.clone(),
    })
}

/// Predicted message-table memory for a given i-bound, without allocating
/// the tables.
pub fn predict_memory(model: &EnergyModel, tree: &PseudoTree, i_bound: usize) -> u64 {
    let n = model.n();
    let mut scopes: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n]; // message scopes per node
    let mut total: u64 = 0;
    for &x in tree.order.iter().rev() {
        let mut funcs: Vec<Vec<usize>> = vec![vec![x]];
        let mut anc: Vec<usize> = tree.ancestors(x).collect();
        anc.sort_unstable();
        for a in anc {
            let (i, j) = if a < x { (a, x) } else { (x, a) };
            if model.pair_table(i, j).is_some() {
                funcs.push(vec![i, j]);
            }
        }
        for &c in &tree.children[x] {
            funcs.extend(scopes[c].iter().cloned());
        }
        funcs.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| b.cmp(a)));
        let mut buckets: Vec<Vec<usize>> = Vec::new();
        let mut members: Vec<Vec<Vec<usize>>> = Vec::new();
        'outer: for f in funcs {
            for (scope, ms) in buckets.iter_mut().zip(&mut members) {
                let mut joint = scope.clone();
                for &v in &f {
                    if !joint.contains(&v) {
                        joint.push(v);
                    }
                }
                if joint.len() <= i_bound {
                    joint.sort_unstable();
                    *scope = joint;
                    ms.push(f);
                    continue 'outer;
                }
            }
            let mut scope = f.clone();
            if !scope.contains(&x) {
                scope.push(x);
                scope.sort_unstable();
            }
            buckets.push(scope);
            members.push(vec![f]);
        }
        for scope in buckets {
            let msg: Vec<usize> = scope.iter().copied().filter(|&v| v != x).collect();
            let entries: usize = msg.iter().map(|&v| model.domain(v)).product();
            total += 8 * entries as u64;
            scopes[x].push(msg);
        }
    }
    total
}

/// Largest i-bound (capped at `n`) whose predicted table memory fits
/// `mem_cap`; at least 2.
pub fn auto_i_bound(model: &EnergyModel, tree: &PseudoTree, mem_cap: u64) -> usize {
    let n = model.n();
    for ib in (2..=n.max(2)).rev() {
        if predict_memory(model, tree, ib) <= mem_cap {
            return ib;
        }
    }
    2
}
