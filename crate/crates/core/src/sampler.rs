//! Finite-shot simulation of the measurement runs and estimation of `Sv`.
//!
//! Each setting triple draws from its own ChaCha20 stream: the generator is
//! seeded with the plan seed and the stream id is the triple index
//! `4x + 2y + z`, so triples can be sampled in any order (or in parallel)
//! with identical results. Outcomes are drawn by inverse CDF over the
//! outcome order `(+,+,+), (+,+,−), …, (−,−,−)`.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::inequalities::{
    all_triples, term_sign, triple_distributions, triple_name, CLASSICAL_BOUND,
};
use crate::quantum::{outcome_signs, Choice, Scenario, StateVector};

#[derive(Clone, Debug, PartialEq)]
pub struct ShotPlan {
    pub scenario: Scenario,
    pub shots_per_triple: u64,
    pub seed: u64,
}

impl ShotPlan {
    pub fn new(scenario: Scenario, shots_per_triple: u64, seed: u64) -> Result<Self> {
        if shots_per_triple == 0 {
            return Err(Error::InvalidInput(
                "shots_per_triple must be at least 1".into(),
            ));
        }
        Ok(Self {
            scenario,
            shots_per_triple,
            seed,
        })
    }
}

/// Outcome counts per setting triple, indexed `[4x + 2y + z][outcome]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleRecord {
    pub counts: [[u64; 8]; 8],
    pub shots_per_triple: u64,
    /// Setting labels `[party][choice]`, used for CSV output.
    pub labels: [[String; 2]; 3],
}

impl SampleRecord {
    pub fn triple_total(&self, triple: usize) -> u64 {
        self.counts[triple].iter().sum()
    }

    /// Writes one CSV row per (triple, outcome) with a nonzero count.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "triple",
            "a_setting",
            "b_setting",
            "c_setting",
            "outcome_a",
            "outcome_b",
            "outcome_c",
            "count",
        ])?;
        for (t, [x, y, z]) in all_triples().enumerate() {
            for (o, &n) in self.counts[t].iter().enumerate() {
                if n == 0 {
                    continue;
                }
                let [a, b, c] = outcome_signs(o);
                w.write_record([
                    triple_name(x, y, z),
                    self.labels[0][x].clone(),
                    self.labels[1][y].clone(),
                    self.labels[2][z].clone(),
                    a.to_string(),
                    b.to_string(),
                    c.to_string(),
                    n.to_string(),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(())
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(buf)
    }
}

fn draw_counts(probabilities: &[f64; 8], shots: u64, seed: u64, stream: u64) -> [u64; 8] {
    let mut cdf = [0.0; 8];
    let mut acc = 0.0;
    for (c, p) in cdf.iter_mut().zip(probabilities) {
        acc += p.max(0.0);
        *c = acc;
    }
    let total = acc;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut counts = [0u64; 8];
    for _ in 0..shots {
        let u = rng.random::<f64>() * total;
        let idx = cdf.iter().position(|&c| u < c).unwrap_or(7);
        counts[idx] += 1;
    }
    counts
}

/// Draws `shots_per_triple` Born-rule outcomes for each of the eight triples.
pub fn sample_outcomes(state: &StateVector, plan: &ShotPlan) -> Result<SampleRecord> {
    if plan.shots_per_triple == 0 {
        return Err(Error::InvalidInput(
            "shots_per_triple must be at least 1".into(),
        ));
    }
    let dists = triple_distributions(state, &plan.scenario)?;
    let probs: Vec<[f64; 8]> = all_triples()
        .map(|[x, y, z]| {
            dists[&[
                Choice::from_index(x),
                Choice::from_index(y),
                Choice::from_index(z),
            ]]
                .probabilities
        })
        .collect();
    let per_triple: Vec<[u64; 8]> = probs
        .par_iter()
        .enumerate()
        .map(|(t, p)| draw_counts(p, plan.shots_per_triple, plan.seed, t as u64))
        .collect();
    let mut counts = [[0u64; 8]; 8];
    counts.copy_from_slice(&per_triple);
    let labels = plan
        .scenario
        .settings()
        .clone()
        .map(|pair| pair.map(|s| s.label));
    Ok(SampleRecord {
        counts,
        shots_per_triple: plan.shots_per_triple,
        labels,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateReport {
    /// Indexed `4x + 2y + z`.
    pub correlator_estimates: [f64; 8],
    pub standard_errors: [f64; 8],
    pub sv_estimate: f64,
    pub sv_standard_error: f64,
    /// `(|Sv| − 4) / σ`. Infinite with the sign of the excess when σ = 0,
    /// and 0 when both vanish.
    pub sigma_above_4: f64,
}

/// Plug-in estimates: `Ê = (N_corr − N_anti)/N`, `σ = √((1 − Ê²)/N)`.
pub fn estimate(record: &SampleRecord) -> Result<EstimateReport> {
    let mut correlator_estimates = [0.0; 8];
    let mut standard_errors = [0.0; 8];
    for t in 0..8 {
        let n = record.triple_total(t);
        if n == 0 {
            return Err(Error::InvalidInput(format!("triple {t} has zero shots")));
        }
        let mut signed = 0i64;
        for (o, &count) in record.counts[t].iter().enumerate() {
            let [a, b, c] = outcome_signs(o);
            signed += i64::from(a * b * c) * count as i64;
        }
        let n = n as f64;
        let e = signed as f64 / n;
        correlator_estimates[t] = e;
        standard_errors[t] = ((1.0 - e * e).max(0.0) / n).sqrt();
    }
    let sv_estimate = all_triples()
        .enumerate()
        .map(|(t, [x, y, z])| term_sign(x, y, z) * correlator_estimates[t])
        .sum::<f64>();
    let sv_standard_error = standard_errors.iter().map(|s| s * s).sum::<f64>().sqrt();
    let excess = sv_estimate.abs() - CLASSICAL_BOUND;
    let sigma_above_4 = if sv_standard_error > 0.0 {
        excess / sv_standard_error
    } else if excess == 0.0 {
        0.0
    } else {
        excess.signum() * f64::INFINITY
    };
    Ok(EstimateReport {
        correlator_estimates,
        standard_errors,
        sv_estimate,
        sv_standard_error,
        sigma_above_4,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{ghz_state, MeasurementSetting};

    fn all_z() -> Scenario {
        let z = MeasurementSetting::pauli_z();
        Scenario::new([
            [z.clone(), z.clone()],
            [z.clone(), z.clone()],
            [z.clone(), z],
        ])
        .unwrap()
    }

    #[test]
    fn eigenstate_counts() {
        let plan = ShotPlan::new(all_z(), 1000, 3).unwrap();
        let r = sample_outcomes(&StateVector::basis(0), &plan).unwrap();
        for t in 0..8 {
            assert_eq!(r.counts[t][0], 1000);
            assert_eq!(r.triple_total(t), 1000);
        }
        let e = estimate(&r).unwrap();
        assert_eq!(e.correlator_estimates, [1.0; 8]);
        assert_eq!(e.standard_errors, [0.0; 8]);
    }

    #[test]
    fn ghz_z_counts_balanced() {
        let plan = ShotPlan::new(all_z(), 1_000_000, 42).unwrap();
        let r = sample_outcomes(&ghz_state(), &plan).unwrap();
        // Binomial(10⁶, ½) has σ = 500.
        for t in 0..8 {
            for (o, &n) in r.counts[t].iter().enumerate() {
                match outcome_signs(o) {
                    [1, 1, -1] | [-1, -1, 1] => {
                        assert!((n as f64 - 500_000.0).abs() <= 5.0 * 500.0, "{n}")
                    }
                    _ => assert_eq!(n, 0),
                }
            }
        }
    }

    #[test]
    fn seeded_determinism() {
        let plan = ShotPlan::new(crate::optimizer::optimal_planar_scenario(), 5000, 9).unwrap();
        let a = sample_outcomes(&ghz_state(), &plan).unwrap();
        let b = sample_outcomes(&ghz_state(), &plan).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_csv_bytes().unwrap(), b.to_csv_bytes().unwrap());
        let other = ShotPlan { seed: 10, ..plan };
        assert_ne!(a, sample_outcomes(&ghz_state(), &other).unwrap());
    }

    #[test]
    fn streams_are_independent_of_order() {
        let p = [0.1, 0.2, 0.05, 0.05, 0.3, 0.1, 0.1, 0.1];
        let forward: Vec<_> = (0..4).map(|t| draw_counts(&p, 100, 5, t)).collect();
        let backward: Vec<_> = (0..4).rev().map(|t| draw_counts(&p, 100, 5, t)).collect();
        assert!(forward.iter().eq(backward.iter().rev()));
    }

    #[test]
    fn zero_shots_rejected() {
        assert!(ShotPlan::new(all_z(), 0, 1).is_err());
        let record = SampleRecord {
            counts: [[0; 8]; 8],
            shots_per_triple: 0,
            labels: Default::default(),
        };
        assert!(estimate(&record).is_err());
    }

    #[test]
    fn csv_layout() {
        let plan = ShotPlan::new(all_z(), 10, 0).unwrap();
        let r = sample_outcomes(&StateVector::basis(0), &plan).unwrap();
        let text = String::from_utf8(r.to_csv_bytes().unwrap()).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("triple,a_setting,b_setting,c_setting,outcome_a,outcome_b,outcome_c,count")
        );
        assert_eq!(lines.next(), Some("ABC,z,z,z,1,1,1,10"));
        assert_eq!(text.lines().count(), 9);
    }

    #[test]
    fn sigma_handles_zero_error() {
        let mut record = SampleRecord {
            counts: [[0; 8]; 8],
            shots_per_triple: 4,
            labels: Default::default(),
        };
        for t in 0..8 {
            record.counts[t][0] = 4;
        }
        // All correlators +1: Sv = 0, excess −4, zero error.
        let e = estimate(&record).unwrap();
        assert_eq!(e.sv_estimate, 0.0);
        assert_eq!(e.sigma_above_4, f64::NEG_INFINITY);
    }
}
