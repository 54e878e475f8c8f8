//! Dead-end elimination preprocessing: Goldstein singles with strict
//! inequality, iterated to a fixpoint.
//!
//! A rotamer `r` at residue `i` is removed when some competitor `t` at `i`
//! satisfies
//! `E1(i,r) - E1(i,t) + sum_{j != i} min_{s in kept(j)} [E2(i_r, j_s) - E2(i_t, j_s)] > 0`,
//! which proves `r` cannot be part of any GMEC. The scan order is fixed
//! (ascending residue, ascending rotamer, competitors ascending) so the
//! result is reproducible; the last rotamer of a residue is never removed.

use std::collections::BTreeMap;

use crate::model::EnergyModel;

#[derive(Debug, Clone)]
pub struct PruneResult {
    /// Surviving original rotamer indices per residue, ascending.
    pub kept: Vec<Vec<usize>>,
    /// Model restricted to the kept rotamers; e0 unchanged.
    pub reduced: EnergyModel,
    /// Number of full fixpoint passes, including the final pass that removed
    /// nothing.
    pub rounds: usize,
}

impl PruneResult {
    /// Map a reduced-model assignment back to original rotamer indices.
    pub fn to_original(&self, reduced_assignment: &[usize]) -> Vec<usize> {
        reduced_assignment
            .iter()
            .enumerate()
            .map(|(i, &r)| self.kept[i][r])
            .collect()
    }
}

/// Goldstein singles margin of competitor `t` against rotamer `r` at residue
/// `i`, restricted to the kept rotamers of the other residues.
fn goldstein_margin(
    model: &EnergyModel,
    kept: &[Vec<usize>],
    i: usize,
    r: usize,
    t: usize,
) -> f64 {
    let mut margin = model.self_energy(i, r) - model.self_energy(i, t);
    for (j, kept_j) in kept.iter().enumerate() {
        if j == i {
            continue;
        }
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        if !model.has_pair(lo, hi) {
            continue; // zero interaction contributes zero to the min
        }
        let mut best = f64::INFINITY;
        for &s in kept_j {
            let diff = if i < j {
                model.pair_energy(i, j, r, s) - model.pair_energy(i, j, t, s)
            } else {
                model.pair_energy(j, i, s, r) - model.pair_energy(j, i, s, t)
            };
            if diff < best {
                best = diff;
            }
        }
        margin += best;
    }
    margin
}

/// Iterated Goldstein singles pruning. Sound for the minimum: the reduced
/// model has the same GMEC energy as the original.
pub fn goldstein_singles(model: &EnergyModel) -> PruneResult {
    let n = model.n();
    let mut kept: Vec<Vec<usize>> = model.domains().iter().map(|&d| (0..d).collect()).collect();
    let mut rounds = 0;
    loop {
        rounds += 1;
        let mut removed_any = false;
        for i in 0..n {
            let mut r_idx = 0;
            while r_idx < kept[i].len() {
                if kept[i].len() == 1 {
                    break;
                }
                let r = kept[i][r_idx];
                let mut doomed = false;
                for &t in &kept[i] {
                    if t == r {
                        continue;
                    }
                    if goldstein_margin(model, &kept, i, r, t) > 0.0 {
                        doomed = true;
                        break;
                    }
                }
                if doomed {
                    kept[i].remove(r_idx);
                    removed_any = true;
                } else {
                    r_idx += 1;
                }
            }
        }
        if !removed_any {
            break;
        }
    }

    let domains: Vec<usize> = kept.iter().map(|k| k.len()).collect();
    let self_energy: Vec<Vec<f64>> = kept
        .iter()
        .enumerate()
        .map(|(i, ks)| ks.iter().map(|&r| model.self_energy(i, r)).collect())
        .collect();
    let mut pair_energy = BTreeMap::new();
    for (i, j) in model.pairs() {
        let mut table = Vec::with_capacity(domains[i] * domains[j]);
        for &ri in &kept[i] {
            for &rj in &kept[j] {
                table.push(model.pair_energy(i, j, ri, rj));
            }
        }
        pair_energy.insert((i, j), table);
    }
    let reduced = EnergyModel::new(domains, model.e0(), self_energy, pair_energy)
        .expect("reduction preserves model validity");
    PruneResult { kept, reduced, rounds }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::toy2;
    use crate::oracle::brute_force_min;

    #[test]
    fn toy2_prunes_residue0_rotamer1() {
        let m = toy2();
        let result = goldstein_singles(&m);
        assert_eq!(result.kept[0], vec![0]);
        // Residue 1 rotamer 0 falls in the next round: 0.1 + 0.3 > 0.
        assert_eq!(result.kept[1], vec![1]);
        let reduced_best = brute_force_min(&result.reduced, None).unwrap();
        assert_eq!(reduced_best.energy, 1.6);
        assert_eq!(result.to_original(&reduced_best.assignment), vec![0, 1]);
    }

    #[test]
    fn symmetric_ties_are_kept() {
        let mut pairs = BTreeMap::new();
        pairs.insert((0, 1), vec![0.5, 0.25, 0.5, 0.25]);
        let m = EnergyModel::new(vec![2, 2], 0.0, vec![vec![0.5, 0.5], vec![0.0, 1.0]], pairs)
            .unwrap();
        let result = goldstein_singles(&m);
        // Residue 0's rotamers are exactly symmetric; strict inequality keeps
        // both.
        assert_eq!(result.kept[0], vec![0, 1]);
    }

    #[test]
    fn preserves_minimum_energy() {
        for seed in 0..40 {
            let n = 2 + (seed as usize % 7);
            let m = crate::model::random_instance(900 + seed, n, 4, 0.5, 1.0).unwrap();
            let result = goldstein_singles(&m);
            let original = brute_force_min(&m, None).unwrap();
            let reduced = brute_force_min(&result.reduced, None).unwrap();
            assert_eq!(original.energy, reduced.energy, "seed {seed}");
            // Composition reproduces the reduced energy exactly.
            let composed = result.to_original(&reduced.assignment);
            assert_eq!(m.total_energy(&composed).unwrap(), reduced.energy);
            for (i, ks) in result.kept.iter().enumerate() {
                assert!(!ks.is_empty());
                assert_eq!(result.reduced.domain(i), ks.len());
            }
        }
    }

    #[test]
    fn fixpoint_is_stable() {
        for seed in 0..10 {
            let m = crate::model::random_instance(950 + seed, 6, 4, 0.6, 1.0).unwrap();
            let once = goldstein_singles(&m);
            let twice = goldstein_singles(&once.reduced);
            assert_eq!(twice.rounds, 1);
            assert!(twice.kept.iter().enumerate().all(|(i, ks)| ks.len() == once.kept[i].len()));
        }
    }
}
