//! Small shared example instances used by tests and benchmarks.

use std::collections::BTreeMap;

use crate::graph::{InteractionGraph, PseudoTree};
use crate::model::{EnergyModel, SplitMix64};

/// Two residues, two rotamers each. Conformation energies are
/// (0,0)=2.0, (0,1)=1.6, (1,0)=2.6, (1,1)=2.3; the GMEC is (0,1).
pub fn toy2() -> EnergyModel {
    let mut pairs = BTreeMap::new();
    pairs.insert((0, 1), vec![0.3, 0.0, 0.4, 0.2]);
    EnergyModel::new(vec![2, 2], 1.0, vec![vec![0.5, 1.0], vec![0.2, 0.1]], pairs).unwrap()
}

/// The six-node interaction network with nodes A..F mapped to 0..5 and edges
/// AB, AE, AF, BE, BF, BC, BD, CE, DF.
pub fn six_node_graph() -> InteractionGraph {
    InteractionGraph::new(
        6,
        [(0, 1), (0, 4), (0, 5), (1, 4), (1, 5), (1, 2), (1, 3), (2, 4), (3, 5)],
    )
}

/// A valid pseudo-tree for [`six_node_graph`]: A->B, B->C, B->D, C->E, D->F.
pub fn six_node_pseudo_tree() -> PseudoTree {
    PseudoTree::from_parents(vec![None, Some(0), Some(1), Some(1), Some(2), Some(3)])
}

/// An invalid tree over the same nodes: A->{B, C}, C->E, B->D, D->F.
/// Edge B-C joins two different branches.
pub fn six_node_bad_tree() -> PseudoTree {
    PseudoTree::from_parents(vec![None, Some(0), Some(0), Some(1), Some(2), Some(3)])
}

/// Seven-node model whose graph matches the mini-bucket worked example:
/// chain A-B-C-D plus C-E, A-F, F-G and the non-tree edges A-D, B-D, B-E, A-G.
/// Nodes A..G map to 0..6.
pub fn seven_node_model(seed: u64) -> EnergyModel {
    let edges = [(0, 1), (1, 2), (2, 3), (2, 4), (0, 5), (5, 6), (0, 3), (1, 3), (1, 4), (0, 6)];
    let mut rng = SplitMix64::new(seed);
    let domains = vec![2usize; 7];
    let self_energy: Vec<Vec<f64>> =
        domains.iter().map(|&d| (0..d).map(|_| rng.next_unit()).collect()).collect();
    let mut pair_energy = BTreeMap::new();
    let mut sorted = edges;
    sorted.sort_unstable();
    for (i, j) in sorted {
        let table: Vec<f64> = (0..domains[i] * domains[j]).map(|_| rng.next_unit()).collect();
        pair_energy.insert((i, j), table);
    }
    EnergyModel::new(domains, 0.0, self_energy, pair_energy).unwrap()
}

/// Pseudo-tree for [`seven_node_model`]: A->B->C->{D, E}, A->F->G.
pub fn seven_node_pseudo_tree() -> PseudoTree {
    PseudoTree::from_parents(vec![None, Some(0), Some(1), Some(2), Some(2), Some(0), Some(5)])
}

/// Two independent components of `q` residues with `p` rotamers each,
/// each component internally complete, grid-valued random tables.
pub fn two_component(seed: u64, q: usize, p: usize) -> EnergyModel {
    let n = 2 * q;
    let mut rng = SplitMix64::new(seed);
    let domains = vec![p; n];
    let self_energy: Vec<Vec<f64>> =
        domains.iter().map(|&d| (0..d).map(|_| rng.next_unit()).collect()).collect();
    let mut pair_energy = BTreeMap::new();
    for comp in 0..2 {
        let base = comp * q;
        for i in base..base + q {
            for j in (i + 1)..base + q {
                let table: Vec<f64> = (0..p * p).map(|_| rng.next_unit()).collect();
                pair_energy.insert((i, j), table);
            }
        }
    }
    EnergyModel::new(domains, 0.0, self_energy, pair_energy).unwrap()
}
