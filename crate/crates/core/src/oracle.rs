//! Ground-truth engines: exhaustive enumeration, brute-force top-k, and a
//! plain OR branch-and-bound without AND decomposition.
//!
//! These are intentionally naive and share no traversal logic with the main
//! solver so they serve as genuine cross-checks.

use std::time::Instant;

use crate::error::Error;
use crate::kbest::KBestList;
use crate::model::{Conformation, EnergyModel};
use crate::search::{SearchStats, Solution};

pub const DEFAULT_ENUM_CAP: usize = 10_000_000;

fn check_cap(model: &EnergyModel, cap: Option<usize>) -> Result<(), Error> {
    let cap = cap.unwrap_or(DEFAULT_ENUM_CAP);
    if model.space_size() > cap {
        return Err(Error::Resource {
            detail: format!(
                "conformational space of {} exceeds enumeration cap {cap}",
                model.space_size()
            ),
        });
    }
    Ok(())
}

/// Advance `assignment` to the lexicographic successor; false at the end.
fn next_assignment(assignment: &mut [usize], domains: &[usize]) -> bool {
    for i in (0..assignment.len()).rev() {
        assignment[i] += 1;
        if assignment[i] < domains[i] {
            return true;
        }
        assignment[i] = 0;
    }
    false
}

/// Exhaustive minimization in lexicographic assignment order; ties go to the
/// lexicographically smallest assignment.
pub fn brute_force_min(model: &EnergyModel, cap: Option<usize>) -> Result<Conformation, Error> {
    check_cap(model, cap)?;
    let mut assignment = vec![0usize; model.n()];
    let mut best: Option<Conformation> = None;
    loop {
        let energy = model.total_energy(&assignment)?;
        if best.as_ref().is_none_or(|b| energy < b.energy) {
            best = Some(Conformation { assignment: assignment.clone(), energy });
        }
        if !next_assignment(&mut assignment, model.domains()) {
            break;
        }
    }
    Ok(best.expect("non-empty conformational space"))
}

/// All conformations within `delta` of the minimum, sorted by
/// `(energy, assignment)`, truncated to `k`.
pub fn brute_force_topk(
    model: &EnergyModel,
    k: usize,
    delta: f64,
    cap: Option<usize>,
) -> Result<KBestList, Error> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    check_cap(model, cap)?;
    let mut all: Vec<Conformation> = Vec::new();
    let mut assignment = vec![0usize; model.n()];
    loop {
        let energy = model.total_energy(&assignment)?;
        all.push(Conformation { assignment: assignment.clone(), energy });
        if !next_assignment(&mut assignment, model.domains()) {
            break;
        }
    }
    all.sort_by(|a, b| a.energy.total_cmp(&b.energy).then_with(|| a.assignment.cmp(&b.assignment)));
    let gmec = all[0].energy;
    all.retain(|c| c.energy <= gmec + delta);
    all.truncate(k);
    Ok(KBestList { conformations: all })
}

/// Depth-first branch-and-bound over the single ordering 0..n, with no AND
/// decomposition. `heuristic(next_var, prefix)` may supply a lower bound on
/// the energy of the unassigned suffix; `None` means zero.
pub fn plain_bnb<F>(model: &EnergyModel, heuristic: Option<F>) -> Result<Solution, Error>
where
    F: Fn(usize, &[usize]) -> f64,
{
    let start = Instant::now();
    let n = model.n();
    let mut stats = SearchStats::default();
    let mut trace: Vec<f64> = Vec::new();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut prefix: Vec<usize> = Vec::with_capacity(n);

    // g-cost increments: self energy plus pairs to already-assigned residues.
    fn extend_cost(model: &EnergyModel, prefix: &[usize], v: usize, r: usize) -> f64 {
        let mut e = model.self_energy(v, r);
        for (u, &ru) in prefix.iter().enumerate() {
            e += model.pair_energy(u, v, ru, r);
        }
        e
    }

    fn descend<F>(
        model: &EnergyModel,
        heuristic: &Option<F>,
        prefix: &mut Vec<usize>,
        g: f64,
        best: &mut Option<(f64, Vec<usize>)>,
        stats: &mut SearchStats,
        trace: &mut Vec<f64>,
    ) where
        F: Fn(usize, &[usize]) -> f64,
    {
        let v = prefix.len();
        if v == model.n() {
            if best.as_ref().is_none_or(|(b, _)| g < *b) {
                *best = Some((g, prefix.clone()));
                trace.push(g);
            }
            return;
        }
        for r in 0..model.domain(v) {
            let g_new = g + extend_cost(model, prefix, v, r);
            let h = match heuristic {
                Some(h) => {
                    stats.heuristic_evals += 1;
                    prefix.push(r);
                    let b = h(v + 1, prefix);
                    prefix.pop();
                    b
                }
                None => 0.0,
            };
            if let Some((incumbent, _)) = best {
                if g_new + h >= *incumbent {
                    stats.pruned += 1;
                    continue;
                }
            }
            stats.expanded_and += 1;
            prefix.push(r);
            descend(model, heuristic, prefix, g_new, best, stats, trace);
            prefix.pop();
        }
    }

    descend(model, &heuristic, &mut prefix, model.e0(), &mut best, &mut stats, &mut trace);
    let (_, assignment) = best.expect("finite domains always yield a conformation");
    let conformation = model.conformation(assignment)?;
    stats.elapsed = start.elapsed();
    Ok(Solution { conformation, stats, incumbent_trace: trace })
}
