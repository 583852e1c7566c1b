//! The Svetlichny expression in correlator form and in
//! correlation-probability (frustrated network) form.
//!
//! Sign pattern, in the order ABC, ABC', A'BC, A'BC', AB'C, AB'C', A'B'C, A'B'C':
//! `+ + + − + − − −`. The probability form takes the anti-correlation
//! probability of every `+` term and the correlation probability of every
//! `−` term, which makes `Sv = 8 − 2S` an identity.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quantum::{
    apply_local, mat_mul, outcome_distribution, outcome_signs, real_part_checked,
    tensor_expectation, Choice, Observable, OutcomeDistribution, Scenario, StateVector,
};

/// Bound obeyed by every hybrid local / two-particle nonlocal model.
pub const CLASSICAL_BOUND: f64 = 4.0;

/// Largest quantum value, `4√2`.
pub const QUANTUM_BOUND: f64 = 4.0 * SQRT_2;

const RANGE_SLACK: f64 = 1e-12;

/// A setting triple `(x, y, z)` for parties A, B, C.
pub type Triple = [Choice; 3];

/// The eight terms in canonical order with their signs.
pub const TERMS: [([usize; 3], f64); 8] = [
    ([0, 0, 0], 1.0),
    ([0, 0, 1], 1.0),
    ([1, 0, 0], 1.0),
    ([1, 0, 1], -1.0),
    ([0, 1, 0], 1.0),
    ([0, 1, 1], -1.0),
    ([1, 1, 0], -1.0),
    ([1, 1, 1], -1.0),
];

/// Sign carried by `E(x, y, z)` in the Svetlichny sum.
pub fn term_sign(x: usize, y: usize, z: usize) -> f64 {
    // −1 exactly when at least two of the three settings are primed.
    if x + y + z >= 2 {
        -1.0
    } else {
        1.0
    }
}

/// Human-readable name of a triple, e.g. `A'BC'`.
pub fn triple_name(x: usize, y: usize, z: usize) -> String {
    let p = |v: usize| if v == 1 { "'" } else { "" };
    format!("A{}B{}C{}", p(x), p(y), p(z))
}

pub fn all_triples() -> impl Iterator<Item = [usize; 3]> {
    (0..8).map(|i| [(i >> 2) & 1, (i >> 1) & 1, i & 1])
}

/// The eight full correlators `E(X_x Y_y Z_z)`, indexed `[x][y][z]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelatorTable {
    values: [[[f64; 2]; 2]; 2],
}

impl CorrelatorTable {
    pub fn new(values: [[[f64; 2]; 2]; 2]) -> Result<Self> {
        for v in values.iter().flatten().flatten() {
            if !v.is_finite() || v.abs() > 1.0 + RANGE_SLACK {
                return Err(Error::InvalidInput(format!(
                    "correlator {v} outside [-1, 1]"
                )));
            }
        }
        Ok(Self { values })
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize, usize) -> f64) -> Result<Self> {
        let mut values = [[[0.0; 2]; 2]; 2];
        for [x, y, z] in all_triples() {
            values[x][y][z] = f(x, y, z);
        }
        Self::new(values)
    }

    /// Entries listed in the canonical term order.
    pub fn from_term_order(entries: [f64; 8]) -> Result<Self> {
        let mut values = [[[0.0; 2]; 2]; 2];
        for (([x, y, z], _), v) in TERMS.iter().zip(entries) {
            values[*x][*y][*z] = v;
        }
        Self::new(values)
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> f64 {
        self.values[x][y][z]
    }

    pub fn values(&self) -> &[[[f64; 2]; 2]; 2] {
        &self.values
    }

    /// Entries flattened with index `4x + 2y + z`.
    pub fn to_flat(&self) -> [f64; 8] {
        let mut out = [0.0; 8];
        for (i, [x, y, z]) in all_triples().enumerate() {
            out[i] = self.values[x][y][z];
        }
        out
    }

    pub fn from_flat(flat: [f64; 8]) -> Result<Self> {
        Self::from_fn(|x, y, z| flat[4 * x + 2 * y + z])
    }

    /// `λ·self + (1−λ)·other`.
    pub fn mix(&self, other: &Self, lambda: f64) -> Result<Self> {
        Self::from_fn(|x, y, z| lambda * self.get(x, y, z) + (1.0 - lambda) * other.get(x, y, z))
    }
}

/// Correlation statistics of one setting triple.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationStats {
    /// Probability that `a = bc`.
    pub p_correlated: f64,
    /// Probability that `a = −bc`.
    pub p_anticorrelated: f64,
    pub correlator: f64,
}

impl CorrelationStats {
    /// Stats of a triple whose correlator is `e`.
    pub fn from_correlator(e: f64) -> Self {
        Self {
            p_correlated: (1.0 + e) / 2.0,
            p_anticorrelated: (1.0 - e) / 2.0,
            correlator: e,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SvetlichnyReport {
    pub signed_value: f64,
    pub absolute_value: f64,
    pub s_probability_form: f64,
    pub classical_bound: f64,
    pub quantum_bound: f64,
}

impl SvetlichnyReport {
    pub fn violates_classical(&self) -> bool {
        self.absolute_value > self.classical_bound
    }
}

pub fn correlator_table(state: &StateVector, scenario: &Scenario) -> Result<CorrelatorTable> {
    let obs = scenario.observables()?;
    let mut values = [[[0.0; 2]; 2]; 2];
    for [x, y, z] in all_triples() {
        values[x][y][z] = tensor_expectation(state, &obs[0][x], &obs[1][y], &obs[2][z])?;
    }
    CorrelatorTable::new(values)
}

pub fn correlation_stats(dist: &OutcomeDistribution) -> CorrelationStats {
    let mut p_correlated = 0.0;
    let mut p_anticorrelated = 0.0;
    for (i, p) in dist.probabilities.iter().enumerate() {
        let [a, b, c] = outcome_signs(i);
        if a == b * c {
            p_correlated += p;
        } else {
            p_anticorrelated += p;
        }
    }
    CorrelationStats {
        p_correlated,
        p_anticorrelated,
        correlator: p_correlated - p_anticorrelated,
    }
}

/// Signed and absolute Svetlichny value of a correlator table.
pub fn eval_svetlichny(table: &CorrelatorTable) -> SvetlichnyReport {
    let (mut positive, mut negative) = (0.0, 0.0);
    for ([x, y, z], sign) in TERMS {
        if sign > 0.0 {
            positive += table.get(x, y, z);
        } else {
            negative += table.get(x, y, z);
        }
    }
    let signed_value = positive - negative;
    let s_probability_form = TERMS
        .iter()
        .map(|([x, y, z], sign)| {
            let stats = CorrelationStats::from_correlator(table.get(*x, *y, *z));
            if *sign > 0.0 {
                stats.p_anticorrelated
            } else {
                stats.p_correlated
            }
        })
        .sum();
    SvetlichnyReport {
        signed_value,
        absolute_value: signed_value.abs(),
        s_probability_form,
        classical_bound: CLASSICAL_BOUND,
        quantum_bound: QUANTUM_BOUND,
    }
}

/// Frustrated-network form `S`: anti-correlation probabilities of the
/// positive terms plus correlation probabilities of the negative terms.
pub fn eval_s_probability_form(stats: &BTreeMap<Triple, CorrelationStats>) -> Result<f64> {
    let mut s = 0.0;
    for ([x, y, z], sign) in TERMS {
        let key = [
            Choice::from_index(x),
            Choice::from_index(y),
            Choice::from_index(z),
        ];
        let entry = stats.get(&key).ok_or_else(|| {
            Error::InvalidInput(format!("missing statistics for {}", triple_name(x, y, z)))
        })?;
        s += if sign > 0.0 {
            entry.p_anticorrelated
        } else {
            entry.p_correlated
        };
    }
    Ok(s)
}

/// Born-rule distributions of all eight setting triples.
pub fn triple_distributions(
    state: &StateVector,
    scenario: &Scenario,
) -> Result<BTreeMap<Triple, OutcomeDistribution>> {
    let obs = scenario.observables()?;
    let mut out = BTreeMap::new();
    for [x, y, z] in all_triples() {
        let dist = outcome_distribution(state, [&obs[0][x], &obs[1][y], &obs[2][z]])?;
        out.insert(
            [
                Choice::from_index(x),
                Choice::from_index(y),
                Choice::from_index(z),
            ],
            dist,
        );
    }
    Ok(out)
}

pub fn stats_of(
    distributions: &BTreeMap<Triple, OutcomeDistribution>,
) -> BTreeMap<Triple, CorrelationStats> {
    distributions
        .iter()
        .map(|(k, d)| (*k, correlation_stats(d)))
        .collect()
}

pub fn ghz_xy_correlator(alpha: f64, beta: f64, gamma: f64) -> f64 {
    -(alpha + beta - gamma).cos()
}

/// `x = ⟨ψ| I ⊗ I ⊗ (CC' + C'C) |ψ⟩`, clamped to `[−2, 2]`.
pub fn anticommutator_expectation(
    state: &StateVector,
    c: &Observable,
    c_prime: &Observable,
) -> Result<f64> {
    let cc = mat_mul(c.matrix(), c_prime.matrix());
    let cc2 = mat_mul(c_prime.matrix(), c.matrix());
    let mut anti = [[Complex64::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for k in 0..2 {
            anti[r][k] = cc[r][k] + cc2[r][k];
        }
    }
    let psi = state.amplitudes();
    let image = apply_local(&anti, 2, psi);
    let inner: Complex64 = psi.iter().zip(&image).map(|(a, b)| a.conj() * b).sum();
    Ok(real_part_checked(inner)?.clamp(-2.0, 2.0))
}

/// Schwarz-inequality bound `2√(2+x) + 2√(2−x)` on `|Sv|` for any choice
/// of the first two parties' settings.
pub fn anticommutator_bound(
    state: &StateVector,
    c: &Observable,
    c_prime: &Observable,
) -> Result<f64> {
    let x = anticommutator_expectation(state, c, c_prime)?;
    Ok(2.0 * (2.0 + x).sqrt() + 2.0 * (2.0 - x).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{ghz_state, MeasurementSetting, StateVector};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn optimal() -> Scenario {
        Scenario::planar([[0.0, -FRAC_PI_2], [FRAC_PI_4, -FRAC_PI_4], [0.0, FRAC_PI_2]])
    }

    fn obs(s: MeasurementSetting) -> Observable {
        Observable::from_setting(&s).unwrap()
    }

    #[test]
    fn sign_table_matches_term_list() {
        for ([x, y, z], sign) in TERMS {
            assert_eq!(term_sign(x, y, z), sign, "{}", triple_name(x, y, z));
        }
        assert_eq!(TERMS.iter().map(|t| t.1).sum::<f64>(), 0.0);
    }

    #[test]
    fn ghz_optimal_table() {
        let t = correlator_table(&ghz_state(), &optimal()).unwrap();
        assert!((t.get(0, 0, 0) + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        let r = eval_svetlichny(&t);
        assert!((r.absolute_value - 5.656854249492381).abs() < 1e-12);
        // Regression constant: with these conventions the optimal angles give the negative sign.
        assert!(r.signed_value < 0.0);
        assert!((r.s_probability_form - (4.0 + 2.0 * SQRT_2)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_all_x() {
        let t = correlator_table(&ghz_state(), &Scenario::planar([[0.0; 2]; 3])).unwrap();
        for v in t.to_flat() {
            assert!((v + 1.0).abs() < 1e-15);
        }
        assert_eq!(eval_svetlichny(&t).signed_value, 0.0);
    }

    #[test]
    fn eigenstate_all_z_table() {
        let z = MeasurementSetting::pauli_z();
        let sc = Scenario::new([
            [z.clone(), z.clone()],
            [z.clone(), z.clone()],
            [z.clone(), z],
        ])
        .unwrap();
        let t = correlator_table(&StateVector::basis(0), &sc).unwrap();
        assert_eq!(t.to_flat(), [1.0; 8]);
    }

    #[test]
    fn correlation_stats_examples() {
        let mut p = [0.0; 8];
        p[0] = 1.0;
        let s = correlation_stats(&OutcomeDistribution::new(p).unwrap());
        assert_eq!(
            (s.p_correlated, s.p_anticorrelated, s.correlator),
            (1.0, 0.0, 1.0)
        );

        let s = correlation_stats(&OutcomeDistribution::new([0.125; 8]).unwrap());
        assert_eq!(
            (s.p_correlated, s.p_anticorrelated, s.correlator),
            (0.5, 0.5, 0.0)
        );

        let x = obs(MeasurementSetting::pauli_x());
        let d = outcome_distribution(&ghz_state(), [&x, &x, &x]).unwrap();
        let s = correlation_stats(&d);
        assert!((s.p_anticorrelated - 1.0).abs() < 1e-15);
        assert!(s.p_correlated.abs() < 1e-15);
        assert!((s.correlator + 1.0).abs() < 1e-15);
    }

    #[test]
    fn sign_pattern_table_gives_eight() {
        let t =
            CorrelatorTable::from_term_order([1.0, 1.0, 1.0, -1.0, 1.0, -1.0, -1.0, -1.0]).unwrap();
        assert_eq!(eval_svetlichny(&t).signed_value, 8.0);
    }

    #[test]
    fn probability_form_examples() {
        let half: BTreeMap<Triple, CorrelationStats> = all_triples()
            .map(|[x, y, z]| {
                let k = [
                    Choice::from_index(x),
                    Choice::from_index(y),
                    Choice::from_index(z),
                ];
                (k, CorrelationStats::from_correlator(0.0))
            })
            .collect();
        assert_eq!(eval_s_probability_form(&half).unwrap(), 4.0);

        let mut missing = half.clone();
        missing.remove(&[Choice::Primed, Choice::Unprimed, Choice::Primed]);
        let err = eval_s_probability_form(&missing).unwrap_err();
        assert!(err.to_string().contains("A'BC'"), "{err}");

        let dists = triple_distributions(&ghz_state(), &optimal()).unwrap();
        let s = eval_s_probability_form(&stats_of(&dists)).unwrap();
        assert!((s - (4.0 + 2.0 * SQRT_2)).abs() < 1e-12);
    }

    #[test]
    fn xy_correlator_examples() {
        assert_eq!(ghz_xy_correlator(0.0, 0.0, 0.0), -1.0);
        assert!(
            (ghz_xy_correlator(0.0, FRAC_PI_4, 0.0) + std::f64::consts::FRAC_1_SQRT_2).abs()
                < 1e-16
        );
        assert!(ghz_xy_correlator(0.0, FRAC_PI_2, 0.0).abs() < 1e-16);
    }

    #[test]
    fn anticommutator_bound_examples() {
        let g = ghz_state();
        let (x, y, z) = (
            obs(MeasurementSetting::pauli_x()),
            obs(MeasurementSetting::pauli_y()),
            obs(MeasurementSetting::pauli_z()),
        );
        assert!((anticommutator_bound(&g, &x, &y).unwrap() - QUANTUM_BOUND).abs() < 1e-12);
        assert!(
            (anticommutator_bound(&StateVector::basis(3), &z, &z).unwrap() - 4.0).abs() < 1e-12
        );
        assert!((anticommutator_bound(&g, &z, &x).unwrap() - QUANTUM_BOUND).abs() < 1e-12);
    }

    #[test]
    fn table_range_checked() {
        assert!(CorrelatorTable::from_flat([1.5; 8]).is_err());
        assert!(CorrelatorTable::from_flat([1.0 + 1e-13; 8]).is_ok());
    }
}
