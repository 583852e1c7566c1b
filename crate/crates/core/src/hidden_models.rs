//! Local and hybrid local/two-particle-nonlocal hidden-variable models.
//!
//! Hidden-variable integrals are finite mixtures of deterministic
//! strategies. A nonlocal pair's response is kept as the product `ab`
//! for each joint setting; when a full outcome table is needed the
//! product `p` is realized by the outcome pairs `(+1, p)` and `(−1, −p)`
//! with equal weight.

use rand::Rng;

use crate::error::{Error, Result};
use crate::inequalities::{all_triples, eval_svetlichny, term_sign, CorrelatorTable, TERMS};
use crate::lp::{self, LpOutcome, SimplexOptions};
use crate::quantum::{outcome_index, outcome_signs, OutcomeDistribution};

const WEIGHT_TOLERANCE: f64 = 1e-12;

fn sign_from_bit(bits: usize, bit: usize) -> i8 {
    if (bits >> bit) & 1 == 0 {
        1
    } else {
        -1
    }
}

/// A ±1 assignment to the vertices of the (12)-3 frustrated network:
/// products for the pair measurements `AB, AB', A'B, A'B'` and outputs
/// for `C, C'`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NetworkAssignment {
    pub pair_outputs: [i8; 4],
    pub singleton_outputs: [i8; 2],
}

impl NetworkAssignment {
    pub fn new(pair_outputs: [i8; 4], singleton_outputs: [i8; 2]) -> Result<Self> {
        if pair_outputs
            .iter()
            .chain(&singleton_outputs)
            .any(|v| v.abs() != 1)
        {
            return Err(Error::InvalidInput(
                "network assignment entries must be ±1".into(),
            ));
        }
        Ok(Self {
            pair_outputs,
            singleton_outputs,
        })
    }

    /// All 64 assignments.
    pub fn all() -> impl Iterator<Item = Self> {
        (0..64usize).map(|bits| Self {
            pair_outputs: std::array::from_fn(|i| sign_from_bit(bits, i)),
            singleton_outputs: std::array::from_fn(|i| sign_from_bit(bits, 4 + i)),
        })
    }

    pub fn pair(&self, x: usize, y: usize) -> i8 {
        self.pair_outputs[2 * x + y]
    }

    /// Deterministic correlators `E(x,y,z) = (ab)_{xy} · c_z`.
    pub fn correlator_table(&self) -> CorrelatorTable {
        CorrelatorTable::from_fn(|x, y, z| f64::from(self.pair(x, y) * self.singleton_outputs[z]))
            .expect("±1 entries are valid correlators")
    }
}

/// Number of satisfied bonds: an anti-correlation bond (positive term)
/// holds when the product across it is −1, a correlation bond (negative
/// term) when it is +1.
pub fn bonds_satisfied(assignment: &NetworkAssignment) -> u8 {
    TERMS
        .iter()
        .filter(|([x, y, z], sign)| {
            let product = assignment.pair(*x, *y) * assignment.singleton_outputs[*z];
            if *sign > 0.0 {
                product == -1
            } else {
                product == 1
            }
        })
        .count() as u8
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkSummary {
    pub min_satisfied: u8,
    pub max_satisfied: u8,
    /// `histogram[k]` assignments satisfy exactly `k` bonds.
    pub histogram: [usize; 9],
}

impl NetworkSummary {
    pub fn total(&self) -> usize {
        self.histogram.iter().sum()
    }
}

pub fn enumerate_network_assignments() -> NetworkSummary {
    let mut histogram = [0usize; 9];
    for a in NetworkAssignment::all() {
        histogram[usize::from(bonds_satisfied(&a))] += 1;
    }
    let occupied = || {
        histogram
            .iter()
            .enumerate()
            .filter(|(_, n)| **n > 0)
            .map(|(k, _)| k as u8)
    };
    NetworkSummary {
        min_satisfied: occupied().min().unwrap_or(0),
        max_satisfied: occupied().max().unwrap_or(0),
        histogram,
    }
}

/// Joint outcome probabilities for all eight setting triples,
/// indexed by triple `4x + 2y + z` and then outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityTable {
    pub probabilities: [[f64; 8]; 8],
}

impl ProbabilityTable {
    fn zeros() -> Self {
        Self {
            probabilities: [[0.0; 8]; 8],
        }
    }

    pub fn get(&self, triple: [usize; 3], outcome: [i8; 3]) -> f64 {
        let [x, y, z] = triple;
        self.probabilities[4 * x + 2 * y + z][outcome_index(outcome)]
    }

    pub fn distribution(&self, triple: [usize; 3]) -> Result<OutcomeDistribution> {
        let [x, y, z] = triple;
        OutcomeDistribution::new(self.probabilities[4 * x + 2 * y + z])
    }

    pub fn correlators(&self) -> CorrelatorTable {
        CorrelatorTable::from_fn(|x, y, z| {
            self.probabilities[4 * x + 2 * y + z]
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let [a, b, c] = outcome_signs(i);
                    f64::from(a * b * c) * p
                })
                .sum::<f64>()
                .clamp(-1.0, 1.0)
        })
        .expect("clamped correlators are in range")
    }

    /// Marginal distribution of `party`'s output for one triple.
    pub fn marginal(&self, triple: [usize; 3], party: usize) -> [f64; 2] {
        let [x, y, z] = triple;
        let mut out = [0.0; 2];
        for (i, p) in self.probabilities[4 * x + 2 * y + z].iter().enumerate() {
            out[usize::from(outcome_signs(i)[party] < 0)] += p;
        }
        out
    }
}

/// Fully local deterministic strategy: each party's output per setting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LocalStrategy {
    pub outputs: [[i8; 2]; 3],
}

impl LocalStrategy {
    pub fn all() -> impl Iterator<Item = Self> {
        (0..64usize).map(|bits| Self {
            outputs: std::array::from_fn(|p| {
                std::array::from_fn(|k| sign_from_bit(bits, 2 * p + k))
            }),
        })
    }
}

fn check_mixture<T>(mixture: &[(f64, T)], what: &str) -> Result<()> {
    if mixture.is_empty() {
        return Err(Error::InvalidInput(format!("{what} mixture is empty")));
    }
    if mixture.iter().any(|(w, _)| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidInput(format!(
            "{what} mixture has a negative weight"
        )));
    }
    let total: f64 = mixture.iter().map(|(w, _)| w).sum();
    if (total - 1.0).abs() > WEIGHT_TOLERANCE {
        return Err(Error::InvalidInput(format!(
            "{what} mixture weights sum to {total}"
        )));
    }
    Ok(())
}

/// Mixture of product responses `P1(a|λ) P2(b|λ) P3(c|λ)` over local strategies.
pub fn simulate_local_model(mixture: &[(f64, LocalStrategy)]) -> Result<ProbabilityTable> {
    check_mixture(mixture, "local strategy")?;
    let mut table = ProbabilityTable::zeros();
    for (w, s) in mixture {
        for [x, y, z] in all_triples() {
            let outcome = [s.outputs[0][x], s.outputs[1][y], s.outputs[2][z]];
            table.probabilities[4 * x + 2 * y + z][outcome_index(outcome)] += w;
        }
    }
    Ok(table)
}

/// Which two parties share nonlocal correlations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Partition {
    /// (12)-3
    AbC,
    /// (23)-1
    BcA,
    /// (13)-2
    AcB,
}

impl Partition {
    pub const ALL: [Partition; 3] = [Partition::AbC, Partition::BcA, Partition::AcB];

    /// Parties of the nonlocal pair, in increasing order.
    pub fn pair(self) -> (usize, usize) {
        match self {
            Partition::AbC => (0, 1),
            Partition::BcA => (1, 2),
            Partition::AcB => (0, 2),
        }
    }

    pub fn singleton(self) -> usize {
        match self {
            Partition::AbC => 2,
            Partition::BcA => 0,
            Partition::AcB => 1,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Deterministic strategy for one bipartition term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BipartitionStrategy {
    pub partition: Partition,
    /// Product `ab` per joint setting, indexed `2·s_first + s_second`.
    pub pair_outputs: [i8; 4],
    pub singleton_outputs: [i8; 2],
}

impl BipartitionStrategy {
    /// All 64 deterministic strategies of a partition.
    pub fn all(partition: Partition) -> impl Iterator<Item = Self> {
        (0..64usize).map(move |bits| Self {
            partition,
            pair_outputs: std::array::from_fn(|i| sign_from_bit(bits, i)),
            singleton_outputs: std::array::from_fn(|i| sign_from_bit(bits, 4 + i)),
        })
    }

    fn check(&self) -> Result<()> {
        if self
            .pair_outputs
            .iter()
            .chain(&self.singleton_outputs)
            .any(|v| v.abs() != 1)
        {
            return Err(Error::InvalidInput("strategy outputs must be ±1".into()));
        }
        Ok(())
    }

    pub fn pair_product(&self, triple: [usize; 3]) -> i8 {
        let (i, j) = self.partition.pair();
        self.pair_outputs[2 * triple[i] + triple[j]]
    }

    pub fn singleton_output(&self, triple: [usize; 3]) -> i8 {
        self.singleton_outputs[triple[self.partition.singleton()]]
    }

    pub fn correlator(&self, triple: [usize; 3]) -> i8 {
        self.pair_product(triple) * self.singleton_output(triple)
    }

    pub fn correlator_table(&self) -> CorrelatorTable {
        CorrelatorTable::from_fn(|x, y, z| f64::from(self.correlator([x, y, z])))
            .expect("±1 entries are valid correlators")
    }
}

/// Weights `(q12, q23, q13)` and one strategy mixture per partition.
#[derive(Clone, Debug, PartialEq)]
pub struct HybridModel {
    weights: [f64; 3],
    mixtures: [Vec<(f64, BipartitionStrategy)>; 3],
}

impl HybridModel {
    /// `weights` and `mixtures` are ordered as [`Partition::ALL`].
    pub fn new(weights: [f64; 3], mixtures: [Vec<(f64, BipartitionStrategy)>; 3]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidInput(format!(
                "negative partition weight in {weights:?}"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "partition weights sum to {total}"
            )));
        }
        for (partition, mixture) in Partition::ALL.iter().zip(&mixtures) {
            check_mixture(mixture, "bipartition strategy")?;
            for (_, s) in mixture {
                s.check()?;
                if s.partition != *partition {
                    return Err(Error::InvalidInput(format!(
                        "strategy for {:?} placed in the {partition:?} mixture",
                        s.partition
                    )));
                }
            }
        }
        Ok(Self { weights, mixtures })
    }

    pub fn weights(&self) -> [f64; 3] {
        self.weights
    }

    pub fn mixture(&self, partition: Partition) -> &[(f64, BipartitionStrategy)] {
        &self.mixtures[partition.index()]
    }
}

pub fn simulate_hybrid_model(model: &HybridModel) -> Result<ProbabilityTable> {
    let mut table = ProbabilityTable::zeros();
    for partition in Partition::ALL {
        let q = model.weights[partition.index()];
        let (first, second) = partition.pair();
        for (w, s) in model.mixture(partition) {
            for triple @ [x, y, z] in all_triples() {
                let p = s.pair_product(triple);
                for first_out in [1i8, -1] {
                    let mut outcome = [0i8; 3];
                    outcome[first] = first_out;
                    outcome[second] = first_out * p;
                    outcome[partition.singleton()] = s.singleton_output(triple);
                    table.probabilities[4 * x + 2 * y + z][outcome_index(outcome)] += 0.5 * q * w;
                }
            }
        }
    }
    Ok(table)
}

/// Random hybrid model with `support` strategies per partition and
/// Dirichlet(1)-like weights.
pub fn random_hybrid_model<R: Rng + ?Sized>(rng: &mut R, support: usize) -> HybridModel {
    fn simplex<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / total).collect()
    }
    let support = support.max(1);
    let q = simplex(rng, 3);
    let mixtures = Partition::ALL.map(|partition| {
        let w = simplex(rng, support);
        w.into_iter()
            .map(|wi| {
                let bits: usize = rng.random_range(0..64);
                let s = BipartitionStrategy {
                    partition,
                    pair_outputs: std::array::from_fn(|i| sign_from_bit(bits, i)),
                    singleton_outputs: std::array::from_fn(|i| sign_from_bit(bits, 4 + i)),
                };
                (wi, s)
            })
            .collect()
    });
    HybridModel::new([q[0], q[1], q[2]], mixtures).expect("normalized random weights")
}

/// Correlator tables of all 192 deterministic bipartition strategies,
/// before deduplication.
pub fn bipartition_vertex_tables() -> Vec<CorrelatorTable> {
    Partition::ALL
        .into_iter()
        .flat_map(BipartitionStrategy::all)
        .map(|s| s.correlator_table())
        .collect()
}

/// Distinct vertices of the hybrid-model correlator polytope, in order of
/// first appearance.
pub fn svetlichny_polytope_vertices() -> Vec<CorrelatorTable> {
    let mut seen = std::collections::HashSet::new();
    bipartition_vertex_tables()
        .into_iter()
        .filter(|t| seen.insert(t.to_flat().map(|v| v as i8)))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct MembershipVerdict {
    pub inside: bool,
    /// Convex weights over the polytope vertices; empty when outside.
    pub weights: Vec<f64>,
    /// Max-norm distance from the target to the best reconstruction.
    pub violation_margin: f64,
}

/// Convex hull of the hybrid-model vertices, with an LP membership test.
#[derive(Clone, Debug)]
pub struct SvetlichnyPolytope {
    vertices: Vec<CorrelatorTable>,
    flat: Vec<[f64; 8]>,
}

impl Default for SvetlichnyPolytope {
    fn default() -> Self {
        Self::new()
    }
}

impl SvetlichnyPolytope {
    pub fn new() -> Self {
        let vertices = svetlichny_polytope_vertices();
        let flat = vertices.iter().map(CorrelatorTable::to_flat).collect();
        Self { vertices, flat }
    }

    pub fn vertices(&self) -> &[CorrelatorTable] {
        &self.vertices
    }

    fn reconstruction_error(&self, weights: &[f64], target: &[f64; 8]) -> f64 {
        (0..8)
            .map(|i| {
                let v: f64 = weights.iter().zip(&self.flat).map(|(w, f)| w * f[i]).sum();
                (v - target[i]).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn membership(
        &self,
        target: &CorrelatorTable,
        tolerance: f64,
    ) -> Result<MembershipVerdict> {
        if !(1e-12..=1e-6).contains(&tolerance) {
            return Err(Error::InvalidInput(format!(
                "tolerance {tolerance:e} outside [1e-12, 1e-6]"
            )));
        }
        let t = target.to_flat();
        let n = self.flat.len();

        // Feasibility: Σ w_v V_v = t, Σ w_v = 1, w ≥ 0.
        let mut a: Vec<Vec<f64>> = (0..8)
            .map(|i| self.flat.iter().map(|f| f[i]).collect())
            .collect();
        a.push(vec![1.0; n]);
        let mut b = t.to_vec();
        b.push(1.0);
        let opts = SimplexOptions {
            feasibility_tolerance: tolerance,
            ..SimplexOptions::default()
        };
        let p1 = lp::phase_one(&a, &b, opts)?;
        if p1.feasible {
            let err = self.reconstruction_error(&p1.x, &t);
            if err <= tolerance {
                return Ok(MembershipVerdict {
                    inside: true,
                    weights: p1.x,
                    violation_margin: err,
                });
            }
        }

        // Otherwise measure the max-norm miss: min δ with |t − V w|_∞ ≤ δ.
        // Columns: w (n), p (8), m (8), sp (8), sm (8), δ.
        let cols = n + 32 + 1;
        let delta = cols - 1;
        let mut a = Vec::with_capacity(25);
        let mut b = Vec::with_capacity(25);
        for i in 0..8 {
            let mut row = vec![0.0; cols];
            for (j, f) in self.flat.iter().enumerate() {
                row[j] = f[i];
            }
            row[n + i] = 1.0;
            row[n + 8 + i] = -1.0;
            a.push(row);
            b.push(t[i]);
        }
        let mut row = vec![0.0; cols];
        row[..n].fill(1.0);
        a.push(row);
        b.push(1.0);
        for (offset, slack) in [(0, 16), (8, 24)] {
            for i in 0..8 {
                let mut row = vec![0.0; cols];
                row[n + offset + i] = 1.0;
                row[n + slack + i] = 1.0;
                row[delta] = -1.0;
                a.push(row);
                b.push(0.0);
            }
        }
        let mut c = vec![0.0; cols];
        c[delta] = 1.0;
        match lp::minimize(&a, &b, &c, SimplexOptions::default())? {
            LpOutcome::Optimal { x, .. } => {
                let weights = x[..n].to_vec();
                let err = self.reconstruction_error(&weights, &t);
                if err <= tolerance {
                    Ok(MembershipVerdict {
                        inside: true,
                        weights,
                        violation_margin: err,
                    })
                } else {
                    Ok(MembershipVerdict {
                        inside: false,
                        weights: Vec::new(),
                        violation_margin: err,
                    })
                }
            }
            other => Err(Error::SolverNumerical(format!(
                "margin program ended as {other:?}"
            ))),
        }
    }
}

/// Membership of `target` in the hybrid-model polytope.
pub fn polytope_membership(target: &CorrelatorTable, tolerance: f64) -> Result<MembershipVerdict> {
    SvetlichnyPolytope::new().membership(target, tolerance)
}

/// `Sv` of a deterministic bipartition strategy, computed by sign counting.
pub fn strategy_svetlichny(strategy: &BipartitionStrategy) -> f64 {
    all_triples()
        .map(|t @ [x, y, z]| term_sign(x, y, z) * f64::from(strategy.correlator(t)))
        .sum()
}

/// Convenience: `|Sv|` of a probability table.
pub fn table_svetlichny(table: &ProbabilityTable) -> f64 {
    eval_svetlichny(&table.correlators()).absolute_value
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequalities::{
        correlator_table, eval_s_probability_form, stats_of, triple_distributions,
    };
    use crate::quantum::{ghz_state, Choice, Scenario};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    /// Independent oracle: Eq.-3 sum of indicator probabilities.
    fn s_by_probabilities(a: &NetworkAssignment) -> f64 {
        let mut s = 0.0;
        for ([x, y, z], sign) in TERMS {
            let correlated = a.pair(x, y) == a.singleton_outputs[z];
            let (pc, pa) = if correlated { (1.0, 0.0) } else { (0.0, 1.0) };
            s += if sign > 0.0 { pa } else { pc };
        }
        s
    }

    #[test]
    fn example_assignment_bond_count() {
        let a = NetworkAssignment::new([1, 1, 1, 1], [1, -1]).unwrap();
        assert_eq!(s_by_probabilities(&a), 2.0);
        assert_eq!(bonds_satisfied(&a), 2);
    }

    #[test]
    fn bonds_match_oracle_and_probability_form() {
        for a in NetworkAssignment::all() {
            let bonds = f64::from(bonds_satisfied(&a));
            assert_eq!(bonds, s_by_probabilities(&a));
            let report = eval_svetlichny(&a.correlator_table());
            assert_eq!(report.s_probability_form, bonds);
        }
    }

    #[test]
    fn network_extremes() {
        let summary = enumerate_network_assignments();
        assert_eq!(summary.min_satisfied, 2);
        assert_eq!(summary.max_satisfied, 6);
        assert_eq!(summary.total(), 64);
        assert_eq!(
            summary.histogram[0]
                + summary.histogram[1]
                + summary.histogram[7]
                + summary.histogram[8],
            0
        );
        assert!(NetworkAssignment::all().any(|a| bonds_satisfied(&a) == 6));
    }

    #[test]
    fn invalid_assignment_rejected() {
        assert!(NetworkAssignment::new([1, 0, 1, 1], [1, 1]).is_err());
    }

    #[test]
    fn local_model_examples() {
        let plus = LocalStrategy {
            outputs: [[1, 1]; 3],
        };
        let table = simulate_local_model(&[(1.0, plus)]).unwrap();
        for t in all_triples() {
            assert_eq!(table.get(t, [1, 1, 1]), 1.0);
        }
        let all: Vec<_> = LocalStrategy::all().map(|s| (1.0 / 64.0, s)).collect();
        let table = simulate_local_model(&all).unwrap();
        for v in table.correlators().to_flat() {
            assert!(v.abs() < 1e-15);
        }
        assert!(simulate_local_model(&[(0.5, plus)]).is_err());
    }

    #[test]
    fn local_mixtures_obey_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let strategies: Vec<_> = LocalStrategy::all().collect();
        for _ in 0..200 {
            let w: [f64; 3] = std::array::from_fn(|_| rng.random::<f64>() + 1e-3);
            let total: f64 = w.iter().sum();
            let mix: Vec<_> = w
                .iter()
                .map(|wi| (wi / total, strategies[rng.random_range(0..64)]))
                .collect();
            let mut norm: Vec<_> = mix.clone();
            let s: f64 = norm.iter().map(|m| m.0).sum();
            norm.iter_mut().for_each(|m| m.0 /= s);
            let table = simulate_local_model(&norm).unwrap();
            assert!(table_svetlichny(&table) <= 4.0 + 1e-12);
        }
    }

    #[test]
    fn single_term_hybrid_model() {
        let s = BipartitionStrategy {
            partition: Partition::AbC,
            pair_outputs: [1, -1, -1, 1],
            singleton_outputs: [1, -1],
        };
        let other = |p| BipartitionStrategy { partition: p, ..s };
        let model = HybridModel::new(
            [1.0, 0.0, 0.0],
            [
                vec![(1.0, s)],
                vec![(1.0, other(Partition::BcA))],
                vec![(1.0, other(Partition::AcB))],
            ],
        )
        .unwrap();
        let table = simulate_hybrid_model(&model).unwrap();
        for t @ [x, y, z] in all_triples() {
            let p = s.pair_outputs[2 * x + y];
            let c = s.singleton_outputs[z];
            assert_eq!(table.get(t, [1, p, c]), 0.5);
            assert_eq!(table.get(t, [-1, -p, c]), 0.5);
            assert_eq!(table.correlators().get(x, y, z), f64::from(p * c));
        }
    }

    #[test]
    fn symmetric_hybrid_model_is_permutation_symmetric() {
        let strat = |partition| BipartitionStrategy {
            partition,
            pair_outputs: [1, 1, 1, -1],
            singleton_outputs: [1, -1],
        };
        let model = HybridModel::new(
            [1.0 / 3.0, 1.0 / 3.0, 1.0 - 2.0 / 3.0],
            Partition::ALL.map(|p| vec![(1.0, strat(p))]),
        );
        // pair output p(s,t) is symmetric in (s,t) here, so swapping any two
        // parties maps the model onto itself.
        let table = simulate_hybrid_model(&model.unwrap()).unwrap();
        let perms = [[1, 0, 2], [0, 2, 1], [2, 1, 0]];
        for perm in perms {
            for t in all_triples() {
                for o in 0..8 {
                    let out = outcome_signs(o);
                    let pt = [t[perm[0]], t[perm[1]], t[perm[2]]];
                    let po = [out[perm[0]], out[perm[1]], out[perm[2]]];
                    assert!((table.get(t, out) - table.get(pt, po)).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn hybrid_models_respect_bound_and_no_signaling_to_singleton() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let model = random_hybrid_model(&mut rng, 4);
            let table = simulate_hybrid_model(&model).unwrap();
            assert!(table_svetlichny(&table) <= 4.0 + 1e-9);
        }
        // A pure (12)-3 model: C's marginal ignores the settings of A and B.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut m = random_hybrid_model(&mut rng, 5);
        m.weights = [1.0, 0.0, 0.0];
        let table = simulate_hybrid_model(&m).unwrap();
        for z in 0..2 {
            let reference = table.marginal([0, 0, z], 2);
            for x in 0..2 {
                for y in 0..2 {
                    let mm = table.marginal([x, y, z], 2);
                    assert!((mm[0] - reference[0]).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn hybrid_model_validation() {
        let s = BipartitionStrategy {
            partition: Partition::AbC,
            pair_outputs: [1; 4],
            singleton_outputs: [1; 2],
        };
        let mixtures =
            || Partition::ALL.map(|p| vec![(1.0, BipartitionStrategy { partition: p, ..s })]);
        assert!(HybridModel::new([0.5, 0.5, 0.5], mixtures()).is_err());
        assert!(HybridModel::new([1.0, -0.5, 0.5], mixtures()).is_err());
        let mut wrong = mixtures();
        wrong[1][0].1.partition = Partition::AbC;
        assert!(HybridModel::new([1.0, 0.0, 0.0], wrong).is_err());
    }

    #[test]
    fn vertex_counts_and_bound() {
        assert_eq!(bipartition_vertex_tables().len(), 192);
        let vertices = svetlichny_polytope_vertices();
        assert!(vertices.len() <= 192);
        let max = vertices
            .iter()
            .map(|v| eval_svetlichny(v).signed_value.abs())
            .fold(0.0, f64::max);
        assert_eq!(max, 4.0);
        for v in &vertices {
            assert!(v.to_flat().iter().all(|e| e.abs() == 1.0));
        }
    }

    #[test]
    fn strategy_sv_matches_report() {
        for p in Partition::ALL {
            for s in BipartitionStrategy::all(p) {
                assert_eq!(
                    strategy_svetlichny(&s),
                    eval_svetlichny(&s.correlator_table()).signed_value
                );
            }
        }
    }

    #[test]
    fn membership_examples() {
        let poly = SvetlichnyPolytope::new();
        let zero = CorrelatorTable::from_flat([0.0; 8]).unwrap();
        let v = poly.membership(&zero, 1e-9).unwrap();
        assert!(v.inside);
        assert!((v.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);

        let vertex = poly.vertices()[17].clone();
        let v = poly.membership(&vertex, 1e-9).unwrap();
        assert!(v.inside);
        let max_w = v.weights.iter().cloned().fold(0.0, f64::max);
        assert!((max_w - 1.0).abs() < 1e-9);
        assert!((v.weights[17] - 1.0).abs() < 1e-9);

        let optimal =
            Scenario::planar([[0.0, -FRAC_PI_2], [FRAC_PI_4, -FRAC_PI_4], [0.0, FRAC_PI_2]]);
        let ghz = correlator_table(&ghz_state(), &optimal).unwrap();
        let v = poly.membership(&ghz, 1e-9).unwrap();
        assert!(!v.inside);
        assert!(v.weights.is_empty());
        // Any convex point has |Sv| ≤ 4, and Sv is 1-Lipschitz per entry
        // with 8 entries, so the miss is at least (4√2 − 4)/8.
        assert!(v.violation_margin >= (4.0 * 2f64.sqrt() - 4.0) / 8.0 - 1e-12);
    }

    #[test]
    fn membership_rejects_bad_tolerance() {
        let zero = CorrelatorTable::from_flat([0.0; 8]).unwrap();
        assert!(polytope_membership(&zero, 1e-3).is_err());
        assert!(polytope_membership(&zero, 0.0).is_err());
    }

    #[test]
    fn probability_form_equals_bonds_for_hybrid_stats() {
        // S from Born-rule distributions equals the table form.
        let optimal =
            Scenario::planar([[0.0, -FRAC_PI_2], [FRAC_PI_4, -FRAC_PI_4], [0.0, FRAC_PI_2]]);
        let dists = triple_distributions(&ghz_state(), &optimal).unwrap();
        let s: f64 = eval_s_probability_form(&stats_of(&dists)).unwrap();
        let map: BTreeMap<_, _> = stats_of(&dists);
        assert_eq!(map.len(), 8);
        assert!(map.contains_key(&[Choice::Primed; 3]));
        assert!(s > 6.0);
    }
}
