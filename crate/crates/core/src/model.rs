//! Energy-minimization instances: domains, self and pairwise energy tables,
//! the canonical `GMEC 1` text format, and a deterministic instance generator.
//!
//! The objective is `E_0 + sum_i E1(i, r_i) + sum_{i<j} E2(i, j, r_i, r_j)`
//! summed in canonical order (ascending `i`, then ascending `j`). That order
//! is normative: every other module that reports an energy for a full
//! assignment goes through [`EnergyModel::total_energy`], so cross-module
//! equality checks can be exact instead of tolerance-based.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::Error;

/// A full rotamer assignment, one entry per residue.
pub type Assignment = Vec<usize>;

/// Pairwise-decomposable energy model over `n` residues.
///
/// Rotamer and residue indices are 0-based everywhere, including the file
/// format. An absent pair table is an identically-zero interaction; the
/// serializer never writes zero tables.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyModel {
    n: usize,
    domains: Vec<usize>,
    e0: f64,
    self_energy: Vec<Vec<f64>>,
    /// Keys satisfy `i < j < n`; tables are row-major over `(r_i, r_j)`.
    pair_energy: BTreeMap<(usize, usize), Vec<f64>>,
}

/// One rotamer per residue plus its total energy under canonical summation.
#[derive(Debug, Clone, PartialEq)]
pub struct Conformation {
    pub assignment: Assignment,
    pub energy: f64,
}

impl EnergyModel {
    pub fn new(
        domains: Vec<usize>,
        e0: f64,
        self_energy: Vec<Vec<f64>>,
        pair_energy: BTreeMap<(usize, usize), Vec<f64>>,
    ) -> Result<Self, Error> {
        let n = domains.len();
        if n == 0 {
            return Err(Error::InvalidModel("model needs at least one residue".into()));
        }
        if self_energy.len() != n {
            return Err(Error::InvalidModel(format!(
                "expected {n} self-energy vectors, got {}",
                self_energy.len()
            )));
        }
        for (i, d) in domains.iter().enumerate() {
            if *d == 0 {
                return Err(Error::InvalidModel(format!("residue {i} has empty domain")));
            }
            if self_energy[i].len() != *d {
                return Err(Error::InvalidModel(format!(
                    "self energy of residue {i} has length {}, domain is {d}",
                    self_energy[i].len()
                )));
            }
            if self_energy[i].iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidModel(format!(
                    "non-finite self energy at residue {i}"
                )));
            }
        }
        if !e0.is_finite() {
            return Err(Error::InvalidModel("non-finite e0".into()));
        }
        for (&(i, j), table) in &pair_energy {
            if i >= j || j >= n {
                return Err(Error::InvalidPair { i, j });
            }
            if table.len() != domains[i] * domains[j] {
                return Err(Error::InvalidModel(format!(
                    "pair ({i},{j}) table has {} entries, expected {}",
                    table.len(),
                    domains[i] * domains[j]
                )));
            }
            if table.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidModel(format!("non-finite entry in pair ({i},{j})")));
            }
        }
        Ok(EnergyModel { n, domains, e0, self_energy, pair_energy })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn domains(&self) -> &[usize] {
        &self.domains
    }

    pub fn domain(&self, i: usize) -> usize {
        self.domains[i]
    }

    pub fn e0(&self) -> f64 {
        self.e0
    }

    pub fn self_energy(&self, i: usize, r: usize) -> f64 {
        self.self_energy[i][r]
    }

    pub fn self_energies(&self, i: usize) -> &[f64] {
        &self.self_energy[i]
    }

    /// Pairwise energy between rotamer `ri` of residue `i` and `rj` of `j`
    /// (`i < j`). Zero when the pair table is absent.
    pub fn pair_energy(&self, i: usize, j: usize, ri: usize, rj: usize) -> f64 {
        debug_assert!(i < j);
        match self.pair_energy.get(&(i, j)) {
            Some(t) => t[ri * self.domains[j] + rj],
            None => 0.0,
        }
    }

    pub fn pair_table(&self, i: usize, j: usize) -> Option<&[f64]> {
        self.pair_energy.get(&(i, j)).map(|t| t.as_slice())
    }

    /// Stored pairs in ascending `(i, j)` order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pair_energy.keys().copied()
    }

    pub fn has_pair(&self, i: usize, j: usize) -> bool {
        self.pair_energy.contains_key(&(i, j))
    }

    /// Number of conformations, saturating at `usize::MAX`.
    pub fn space_size(&self) -> usize {
        self.domains.iter().fold(1usize, |acc, &d| acc.saturating_mul(d))
    }

    /// Total energy of a full assignment, summed in canonical order.
    pub fn total_energy(&self, assignment: &[usize]) -> Result<f64, Error> {
        if assignment.len() != self.n {
            return Err(Error::InvalidAssignment(format!(
                "assignment length {} does not match n = {}",
                assignment.len(),
                self.n
            )));
        }
        for (i, &r) in assignment.iter().enumerate() {
            if r >= self.domains[i] {
                return Err(Error::InvalidAssignment(format!(
                    "rotamer {r} out of domain [0, {}) at residue {i}",
                    self.domains[i]
                )));
            }
        }
        let mut total = self.e0;
        for (i, &r) in assignment.iter().enumerate() {
            total += self.self_energy[i][r];
        }
        // BTreeMap iterates keys ascending, which is the canonical pair order.
        for (&(i, j), table) in &self.pair_energy {
            total += table[assignment[i] * self.domains[j] + assignment[j]];
        }
        Ok(total)
    }

    pub fn conformation(&self, assignment: Assignment) -> Result<Conformation, Error> {
        let energy = self.total_energy(&assignment)?;
        Ok(Conformation { assignment, energy })
    }

    /// `(min, max)` over the pair table of `(i, j)`; `(0, 0)` when absent.
    pub fn pair_range(&self, i: usize, j: usize) -> Result<(f64, f64), Error> {
        if i >= j || j >= self.n {
            return Err(Error::InvalidPair { i, j });
        }
        match self.pair_energy.get(&(i, j)) {
            None => Ok((0.0, 0.0)),
            Some(table) => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for &v in table {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                Ok((lo, hi))
            }
        }
    }

    /// Copy of the model with one pair table removed and `delta_e0` folded
    /// into the template energy.
    pub(crate) fn without_pair(&self, i: usize, j: usize, delta_e0: f64) -> EnergyModel {
        let mut m = self.clone();
        m.pair_energy.remove(&(i, j));
        m.e0 += delta_e0;
        m
    }

    /// Serialize to the canonical `GMEC 1` text form.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str("GMEC 1\n");
        let _ = writeln!(out, "n {}", self.n);
        out.push('d');
        for d in &self.domains {
            let _ = write!(out, " {d}");
        }
        out.push('\n');
        let _ = writeln!(out, "e0 {}", self.e0);
        for i in 0..self.n {
            let _ = write!(out, "self {i}");
            for v in &self.self_energy[i] {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        for (&(i, j), table) in &self.pair_energy {
            let _ = write!(out, "pair {i} {j}");
            for v in table {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        out
    }
}

/// Parse an instance in the `GMEC 1` format.
///
/// `#` starts a comment line; tokens are whitespace-separated. Errors carry
/// the 1-based line number of the offending line.
pub fn parse_instance(text: &str) -> Result<EnergyModel, Error> {
    let err = |line: usize, msg: String| Error::Parse { line, msg };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(idx, l)| (idx + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (line_no, magic) = lines.next().ok_or_else(|| err(0, "empty input".into()))?;
    if magic.split_whitespace().collect::<Vec<_>>() != ["GMEC", "1"] {
        return Err(err(line_no, format!("expected header `GMEC 1`, got `{magic}`")));
    }

    let mut n: Option<usize> = None;
    let mut domains: Option<Vec<usize>> = None;
    let mut e0: Option<f64> = None;
    let mut self_energy: Vec<Option<Vec<f64>>> = Vec::new();
    let mut pair_energy: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();

    fn parse_floats(toks: &[&str], line: usize) -> Result<Vec<f64>, Error> {
        toks.iter()
            .map(|t| {
                let v: f64 = t
                    .parse()
                    .map_err(|_| Error::Parse { line, msg: format!("bad float `{t}`") })?;
                if !v.is_finite() {
                    return Err(Error::Parse { line, msg: format!("non-finite value `{t}`") });
                }
                Ok(v)
            })
            .collect()
    }

    for (line_no, line) in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "n" => {
                if n.is_some() {
                    return Err(err(line_no, "duplicate `n` line".into()));
                }
                if toks.len() != 2 {
                    return Err(err(line_no, "expected `n <N>`".into()));
                }
                let v: usize =
                    toks[1].parse().map_err(|_| err(line_no, format!("bad count `{}`", toks[1])))?;
                if v == 0 {
                    return Err(err(line_no, "n must be positive".into()));
                }
                n = Some(v);
                self_energy = vec![None; v];
            }
            "d" => {
                let nv = n.ok_or_else(|| err(line_no, "`d` before `n`".into()))?;
                if domains.is_some() {
                    return Err(err(line_no, "duplicate `d` line".into()));
                }
                if toks.len() != nv + 1 {
                    return Err(err(line_no, format!("expected {nv} domain sizes")));
                }
                let ds: Vec<usize> = toks[1..]
                    .iter()
                    .map(|t| t.parse().map_err(|_| err(line_no, format!("bad domain `{t}`"))))
                    .collect::<Result<_, _>>()?;
                if ds.contains(&0) {
                    return Err(err(line_no, "domain sizes must be >= 1".into()));
                }
                domains = Some(ds);
            }
            "e0" => {
                if e0.is_some() {
                    return Err(err(line_no, "duplicate `e0` line".into()));
                }
                if toks.len() != 2 {
                    return Err(err(line_no, "expected `e0 <float>`".into()));
                }
                e0 = Some(parse_floats(&toks[1..], line_no)?[0]);
            }
            "self" => {
                let ds = domains.as_ref().ok_or_else(|| err(line_no, "`self` before `d`".into()))?;
                if toks.len() < 2 {
                    return Err(err(line_no, "expected `self <i> <values...>`".into()));
                }
                let i: usize =
                    toks[1].parse().map_err(|_| err(line_no, format!("bad index `{}`", toks[1])))?;
                if i >= ds.len() {
                    return Err(err(line_no, format!("residue index {i} out of range")));
                }
                if self_energy[i].is_some() {
                    return Err(err(line_no, format!("duplicate `self {i}` line")));
                }
                if toks.len() != 2 + ds[i] {
                    return Err(err(line_no, format!("expected {} values for residue {i}", ds[i])));
                }
                self_energy[i] = Some(parse_floats(&toks[2..], line_no)?);
            }
            "pair" => {
                let ds = domains.as_ref().ok_or_else(|| err(line_no, "`pair` before `d`".into()))?;
                if toks.len() < 3 {
                    return Err(err(line_no, "expected `pair <i> <j> <values...>`".into()));
                }
                let i: usize =
                    toks[1].parse().map_err(|_| err(line_no, format!("bad index `{}`", toks[1])))?;
                let j: usize =
                    toks[2].parse().map_err(|_| err(line_no, format!("bad index `{}`", toks[2])))?;
                if i >= j || j >= ds.len() {
                    return Err(err(line_no, format!("pair key ({i},{j}) violates i < j < n")));
                }
                if pair_energy.contains_key(&(i, j)) {
                    return Err(err(line_no, format!("duplicate `pair {i} {j}` line")));
                }
                let expected = ds[i] * ds[j];
                if toks.len() != 3 + expected {
                    return Err(err(line_no, format!("expected {expected} values for pair ({i},{j})")));
                }
                pair_energy.insert((i, j), parse_floats(&toks[3..], line_no)?);
            }
            other => return Err(err(line_no, format!("unknown directive `{other}`"))),
        }
    }

    let n = n.ok_or_else(|| err(0, "missing `n` line".into()))?;
    let domains = domains.ok_or_else(|| err(0, "missing `d` line".into()))?;
    let e0 = e0.ok_or_else(|| err(0, "missing `e0` line".into()))?;
    let mut selfs = Vec::with_capacity(n);
    for (i, s) in self_energy.into_iter().enumerate() {
        selfs.push(s.ok_or_else(|| err(0, format!("missing `self {i}` line")))?);
    }
    EnergyModel::new(domains, e0, selfs, pair_energy)
}

/// SplitMix64. The exact algorithm is part of the generator contract so that
/// fixtures reproduce across languages: state advances by 0x9E3779B97F4A7C15
/// and the output mixing uses the constants from Steele et al.'s reference.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on the 2^20-point grid `{0, 2^-20, ..., 1 - 2^-20}`.
    ///
    /// Energies are grid-valued so that sums of many entries stay exactly
    /// representable in f64; the exact-equality checks between independent
    /// summation orders rely on this.
    pub fn next_unit(&mut self) -> f64 {
        ((self.next_u64() >> 44) as f64) * (1.0 / (1u64 << 20) as f64)
    }

    /// Uniform in `0..bound`.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        self.next_u64() % bound
    }
}

/// Deterministic random instance. Draw order: `e0`, then domains (ascending
/// residue), then self energies (ascending residue, ascending rotamer), then
/// for each pair in ascending `(i, j)` order one presence draw followed by
/// the table entries when present.
pub fn random_instance(
    seed: u64,
    n: usize,
    max_domain: usize,
    edge_density: f64,
    energy_scale: f64,
) -> Result<EnergyModel, Error> {
    if n == 0 || max_domain == 0 {
        return Err(Error::InvalidModel("random_instance needs n >= 1 and max_domain >= 1".into()));
    }
    if !(0.0..=1.0).contains(&edge_density) {
        return Err(Error::InvalidModel(format!("edge_density {edge_density} not in [0, 1]")));
    }
    if energy_scale.is_nan() || energy_scale <= 0.0 || !energy_scale.is_finite() {
        return Err(Error::InvalidModel(format!("energy_scale {energy_scale} must be positive")));
    }
    let mut rng = SplitMix64::new(seed);
    let e0 = rng.next_unit() * energy_scale;
    let domains: Vec<usize> =
        (0..n).map(|_| 1 + rng.next_below(max_domain as u64) as usize).collect();
    let self_energy: Vec<Vec<f64>> = domains
        .iter()
        .map(|&d| (0..d).map(|_| rng.next_unit() * energy_scale).collect())
        .collect();
    let mut pair_energy = BTreeMap::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let present = rng.next_unit() < edge_density;
            if present {
                let table: Vec<f64> = (0..domains[i] * domains[j])
                    .map(|_| rng.next_unit() * energy_scale)
                    .collect();
                pair_energy.insert((i, j), table);
            }
        }
    }
    EnergyModel::new(domains, e0, self_energy, pair_energy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::toy2;

    #[test]
    fn toy2_total_energy() {
        let m = toy2();
        assert_eq!(m.total_energy(&[0, 1]).unwrap(), 1.6);
        assert_eq!(m.total_energy(&[1, 0]).unwrap(), 2.6);
    }

    #[test]
    fn zero_model_zero_energy() {
        let m = EnergyModel::new(vec![2, 3], 0.0, vec![vec![0.0; 2], vec![0.0; 3]], BTreeMap::new())
            .unwrap();
        assert_eq!(m.total_energy(&[1, 2]).unwrap(), 0.0);
    }

    #[test]
    fn invalid_assignments_rejected() {
        let m = toy2();
        assert!(matches!(m.total_energy(&[0]), Err(Error::InvalidAssignment(_))));
        assert!(matches!(m.total_energy(&[0, 2]), Err(Error::InvalidAssignment(_))));
    }

    #[test]
    fn pair_range_cases() {
        let m = toy2();
        assert_eq!(m.pair_range(0, 1).unwrap(), (0.0, 0.4));
        let free = EnergyModel::new(vec![2, 2], 0.0, vec![vec![0.0; 2]; 2], BTreeMap::new()).unwrap();
        assert_eq!(free.pair_range(0, 1).unwrap(), (0.0, 0.0));
        let mut pairs = BTreeMap::new();
        pairs.insert((0, 1), vec![0.25; 4]);
        let constant = EnergyModel::new(vec![2, 2], 0.0, vec![vec![0.0; 2]; 2], pairs).unwrap();
        assert_eq!(constant.pair_range(0, 1).unwrap(), (0.25, 0.25));
        assert!(m.pair_range(1, 0).is_err());
        assert!(m.pair_range(0, 5).is_err());
    }

    #[test]
    fn parse_toy2_round_trip() {
        let text = "# comment\nGMEC 1\nn 2\nd 2 2\ne0 1\nself 0 0.5 1\nself 1 0.2 0.1\npair 0 1 0.3 0 0.4 0.2\n";
        let m = parse_instance(text).unwrap();
        assert_eq!(m.n(), 2);
        assert_eq!(m.e0(), 1.0);
        assert_eq!(m, toy2());
        let canonical = m.serialize();
        assert_eq!(parse_instance(&canonical).unwrap().serialize(), canonical);
    }

    #[test]
    fn parse_rejects_bad_pair_order() {
        let text = "GMEC 1\nn 2\nd 2 2\ne0 0\nself 0 0 0\nself 1 0 0\npair 1 0 0 0 0 0\n";
        match parse_instance(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_duplicates_and_nonfinite() {
        let dup = "GMEC 1\nn 2\nd 2 2\ne0 0\nself 0 0 0\nself 1 0 0\npair 0 1 0 0 0 0\npair 0 1 0 0 0 0\n";
        assert!(parse_instance(dup).is_err());
        let nan = "GMEC 1\nn 1\nd 1\ne0 nan\nself 0 0\n";
        assert!(parse_instance(nan).is_err());
        let mismatch = "GMEC 1\nn 2\nd 2 2\ne0 0\nself 0 0\nself 1 0 0\n";
        assert!(parse_instance(mismatch).is_err());
    }

    #[test]
    fn random_instance_is_deterministic() {
        let a = random_instance(42, 5, 3, 0.5, 1.0).unwrap();
        let b = random_instance(42, 5, 3, 0.5, 1.0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.serialize(), b.serialize());
    }

    #[test]
    fn edge_density_extremes() {
        let empty = random_instance(7, 4, 3, 0.0, 1.0).unwrap();
        assert_eq!(empty.pairs().count(), 0);
        let full = random_instance(7, 4, 3, 1.0, 1.0).unwrap();
        assert_eq!(full.pairs().count(), 6);
    }
}
