//! Three-qubit states, spin observables and Born-rule statistics.
//!
//! Basis kets are indexed with qubit 1 as the most significant bit and
//! spin up encoded as `0`, so `|↑↑↓⟩` is index 1 and `|↓↓↑⟩` is index 6.
//! The photon polarization basis maps `|H⟩ = |↑⟩`, `|V⟩ = |↓⟩`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Hilbert-space dimension of three qubits.
pub const DIM: usize = 8;

/// Tolerance on unit norms of states and Bloch directions.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Largest imaginary part tolerated in an expectation that must be real.
pub const IMAG_TOLERANCE: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spin {
    Up,
    Down,
}

/// Index of the basis ket `|s1 s2 s3⟩`.
pub fn basis_index(spins: [Spin; 3]) -> usize {
    spins
        .iter()
        .fold(0, |acc, s| (acc << 1) | usize::from(*s == Spin::Down))
}

/// Normalized pure state of three qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: [Complex64; DIM],
}

impl StateVector {
    /// Normalizes `amplitudes` to unit norm.
    pub fn new(amplitudes: [Complex64; DIM]) -> Result<Self> {
        if amplitudes
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::NonFinite("state amplitudes"));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(Self {
            amplitudes: amplitudes.map(|a| a / norm),
        })
    }

    pub fn basis(index: usize) -> Self {
        assert!(index < DIM, "basis index {index} out of range");
        let mut amplitudes = [ZERO; DIM];
        amplitudes[index] = ONE;
        Self { amplitudes }
    }

    /// Tensor product of three single-qubit states (each normalized first).
    pub fn product(
        first: [Complex64; 2],
        second: [Complex64; 2],
        third: [Complex64; 2],
    ) -> Result<Self> {
        let mut amplitudes = [ZERO; DIM];
        for (idx, amp) in amplitudes.iter_mut().enumerate() {
            *amp = first[idx >> 2] * second[(idx >> 1) & 1] * third[idx & 1];
        }
        Self::new(amplitudes)
    }

    pub fn amplitudes(&self) -> &[Complex64; DIM] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// The same ray with every amplitude multiplied by `e^{i phase}`.
    pub fn with_global_phase(&self, phase: f64) -> Self {
        let factor = Complex64::from_polar(1.0, phase);
        Self {
            amplitudes: self.amplitudes.map(|a| a * factor),
        }
    }

    fn inner(&self, other: &[Complex64; DIM]) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(other)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    fn check_normalized(&self) -> Result<()> {
        let norm_sqr = self.norm_sqr();
        if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(())
    }
}

/// Builds a state from raw amplitudes, normalizing them.
pub fn make_state(amplitudes: [Complex64; DIM]) -> Result<StateVector> {
    StateVector::new(amplitudes)
}

/// `(|↑↑↓⟩ − |↓↓↑⟩)/√2`, equivalently `(|HHV⟩ − |VVH⟩)/√2`.
pub fn ghz_state() -> StateVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut amplitudes = [ZERO; DIM];
    amplitudes[basis_index([Spin::Up, Spin::Up, Spin::Down])] = Complex64::new(h, 0.0);
    amplitudes[basis_index([Spin::Down, Spin::Down, Spin::Up])] = Complex64::new(-h, 0.0);
    StateVector { amplitudes }
}

/// A ±1-valued spin measurement `n·σ` along a Bloch direction.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSetting {
    pub direction: [f64; 3],
    pub label: String,
}

impl MeasurementSetting {
    pub fn new(direction: [f64; 3], label: impl Into<String>) -> Result<Self> {
        let setting = Self {
            direction,
            label: label.into(),
        };
        setting.validate()?;
        Ok(setting)
    }

    /// Direction at `angle` from the x axis in the xy plane.
    pub fn planar(angle: f64) -> Self {
        Self {
            direction: [angle.cos(), angle.sin(), 0.0],
            label: format!("plane({angle})"),
        }
    }

    /// Direction with the given polar angle from +z and azimuth from +x.
    pub fn spherical(polar: f64, azimuth: f64) -> Self {
        let (sp, cp) = polar.sin_cos();
        let (sa, ca) = azimuth.sin_cos();
        Self {
            direction: [sp * ca, sp * sa, cp],
            label: format!("sphere({polar},{azimuth})"),
        }
    }

    pub fn pauli_x() -> Self {
        Self {
            direction: [1.0, 0.0, 0.0],
            label: "x".into(),
        }
    }

    pub fn pauli_y() -> Self {
        Self {
            direction: [0.0, 1.0, 0.0],
            label: "y".into(),
        }
    }

    pub fn pauli_z() -> Self {
        Self {
            direction: [0.0, 0.0, 1.0],
            label: "z".into(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn norm(&self) -> f64 {
        self.direction.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if self.direction.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("measurement direction"));
        }
        let norm = self.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NonUnitDirection { norm });
        }
        Ok(())
    }
}

pub fn planar_setting(angle: f64) -> MeasurementSetting {
    MeasurementSetting::planar(angle)
}

/// Hermitian 2×2 matrix `n·σ` with eigenvalues ±1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observable {
    matrix: [[Complex64; 2]; 2],
}

impl Observable {
    pub fn from_setting(setting: &MeasurementSetting) -> Result<Self> {
        setting.validate()?;
        let [nx, ny, nz] = setting.direction;
        Ok(Self {
            matrix: [
                [Complex64::new(nz, 0.0), Complex64::new(nx, -ny)],
                [Complex64::new(nx, ny), Complex64::new(-nz, 0.0)],
            ],
        })
    }

    pub fn matrix(&self) -> &[[Complex64; 2]; 2] {
        &self.matrix
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.matrix;
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((m[r][c] - m[c][r].conj()).norm());
            }
        }
        worst
    }

    /// Max-entry distance between `O²` and the identity.
    pub fn involution_defect(&self) -> f64 {
        let sq = mat_mul(&self.matrix, &self.matrix);
        let mut worst = 0.0f64;
        for (r, row) in sq.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                let id = if r == c { ONE } else { ZERO };
                worst = worst.max((v - id).norm());
            }
        }
        worst
    }

    /// `(I + sign·O)/2`, the projector onto the `sign` eigenspace.
    fn projector(&self, sign: i8) -> [[Complex64; 2]; 2] {
        let s = f64::from(sign);
        let m = &self.matrix;
        [
            [(ONE + m[0][0] * s) * 0.5, m[0][1] * s * 0.5],
            [m[1][0] * s * 0.5, (ONE + m[1][1] * s) * 0.5],
        ]
    }
}

pub fn observable_from_setting(setting: &MeasurementSetting) -> Result<Observable> {
    Observable::from_setting(setting)
}

pub(crate) fn mat_mul(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut out = [[ZERO; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

/// Applies a single-qubit operator to `qubit` (0 = first party).
pub(crate) fn apply_local(
    op: &[[Complex64; 2]; 2],
    qubit: usize,
    psi: &[Complex64; DIM],
) -> [Complex64; DIM] {
    let shift = 2 - qubit;
    let mut out = [ZERO; DIM];
    for (idx, slot) in out.iter_mut().enumerate() {
        let bit = (idx >> shift) & 1;
        let base = idx & !(1 << shift);
        *slot = op[bit][0] * psi[base] + op[bit][1] * psi[base | (1 << shift)];
    }
    out
}

fn apply_product(ops: [&[[Complex64; 2]; 2]; 3], psi: &[Complex64; DIM]) -> [Complex64; DIM] {
    let v = apply_local(ops[0], 0, psi);
    let v = apply_local(ops[1], 1, &v);
    apply_local(ops[2], 2, &v)
}

pub(crate) fn real_part_checked(value: Complex64) -> Result<f64> {
    if value.im.abs() > IMAG_TOLERANCE {
        return Err(Error::ImaginaryResidue { residue: value.im });
    }
    Ok(value.re)
}

/// `⟨ψ| a ⊗ b ⊗ c |ψ⟩`.
pub fn tensor_expectation(
    state: &StateVector,
    a: &Observable,
    b: &Observable,
    c: &Observable,
) -> Result<f64> {
    state.check_normalized()?;
    let image = apply_product([&a.matrix, &b.matrix, &c.matrix], &state.amplitudes);
    real_part_checked(state.inner(&image))
}

/// Index of the outcome triple; `+1` is encoded as bit 0, party 1 most significant.
pub fn outcome_index(outcome: [i8; 3]) -> usize {
    outcome
        .iter()
        .fold(0, |acc, &s| (acc << 1) | usize::from(s < 0))
}

pub fn outcome_signs(index: usize) -> [i8; 3] {
    let sign = |bit: usize| if bit == 0 { 1 } else { -1 };
    [
        sign((index >> 2) & 1),
        sign((index >> 1) & 1),
        sign(index & 1),
    ]
}

/// Joint outcome probabilities for one fixed triple of settings.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution {
    pub probabilities: [f64; 8],
}

impl OutcomeDistribution {
    pub fn new(probabilities: [f64; 8]) -> Result<Self> {
        if probabilities
            .iter()
            .any(|p| !p.is_finite() || *p < -NORM_TOLERANCE || *p > 1.0 + NORM_TOLERANCE)
        {
            return Err(Error::InvalidInput(format!(
                "probabilities out of [0,1]: {probabilities:?}"
            )));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidInput(format!("probabilities sum to {total}")));
        }
        Ok(Self { probabilities })
    }

    pub fn probability(&self, outcome: [i8; 3]) -> f64 {
        self.probabilities[outcome_index(outcome)]
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    /// `Σ abc·P(a,b,c)`.
    pub fn correlator(&self) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let [a, b, c] = outcome_signs(i);
                f64::from(a * b * c) * p
            })
            .sum()
    }
}

/// Born-rule distribution of the ±1 outcomes of `observables` measured on `state`.
pub fn outcome_distribution(
    state: &StateVector,
    observables: [&Observable; 3],
) -> Result<OutcomeDistribution> {
    state.check_normalized()?;
    let mut probabilities = [0.0; 8];
    for (idx, p) in probabilities.iter_mut().enumerate() {
        let [a, b, c] = outcome_signs(idx);
        let pa = observables[0].projector(a);
        let pb = observables[1].projector(b);
        let pc = observables[2].projector(c);
        let image = apply_product([&pa, &pb, &pc], &state.amplitudes);
        *p = real_part_checked(state.inner(&image))?;
    }
    Ok(OutcomeDistribution { probabilities })
}

/// Which of a party's two settings: `A` (unprimed) or `A'` (primed).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Choice {
    Unprimed = 0,
    Primed = 1,
}

impl Choice {
    pub const BOTH: [Choice; 2] = [Choice::Unprimed, Choice::Primed];

    pub fn from_index(i: usize) -> Self {
        match i {
            0 => Choice::Unprimed,
            1 => Choice::Primed,
            _ => panic!("setting choice index {i} out of range"),
        }
    }
}

/// Two settings for each of the three parties.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    settings: [[MeasurementSetting; 2]; 3],
}

impl Scenario {
    pub fn new(settings: [[MeasurementSetting; 2]; 3]) -> Result<Self> {
        for pair in &settings {
            for s in pair {
                s.validate()?;
            }
        }
        Ok(Self { settings })
    }

    /// Planar scenario from `[[α, α'], [β, β'], [γ, γ']]`.
    pub fn planar(angles: [[f64; 2]; 3]) -> Self {
        const NAMES: [[&str; 2]; 3] = [["A", "A'"], ["B", "B'"], ["C", "C'"]];
        let settings = std::array::from_fn(|p| {
            std::array::from_fn(|k| {
                let setting = MeasurementSetting::planar(angles[p][k]);
                let label = format!("{}@{}", NAMES[p][k], angles[p][k]);
                setting.with_label(label)
            })
        });
        Self { settings }
    }

    pub fn setting(&self, party: usize, choice: Choice) -> &MeasurementSetting {
        &self.settings[party][choice as usize]
    }

    pub fn settings(&self) -> &[[MeasurementSetting; 2]; 3] {
        &self.settings
    }

    pub fn observables(&self) -> Result<[[Observable; 2]; 3]> {
        let mut out = [[Observable {
            matrix: [[ZERO; 2]; 2],
        }; 2]; 3];
        for (p, pair) in self.settings.iter().enumerate() {
            for (k, s) in pair.iter().enumerate() {
                out[p][k] = Observable::from_setting(s)?;
            }
        }
        Ok(out)
    }
}

/// Full correlation tensor `T_ijk = ⟨σ_i ⊗ σ_j ⊗ σ_k⟩`, i,j,k ∈ {x,y,z}.
///
/// Since `E(a,b,c) = Σ a_i b_j c_k T_ijk`, this gives correlators without
/// touching the state again. Used as the fast objective in searches.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationTensor {
    entries: [[[f64; 3]; 3]; 3],
}

impl CorrelationTensor {
    pub fn of(state: &StateVector) -> Result<Self> {
        let paulis = [
            MeasurementSetting::pauli_x(),
            MeasurementSetting::pauli_y(),
            MeasurementSetting::pauli_z(),
        ]
        .map(|s| Observable::from_setting(&s).expect("Pauli axes are unit vectors"));
        let mut entries = [[[0.0; 3]; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    entries[i][j][k] =
                        tensor_expectation(state, &paulis[i], &paulis[j], &paulis[k])?;
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn entry(&self, i: usize, j: usize, k: usize) -> f64 {
        self.entries[i][j][k]
    }

    /// Contracts the first two slots, leaving the vector paired with party 3.
    pub fn contract_pair(&self, a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                let w = a[i] * b[j];
                for (k, o) in out.iter_mut().enumerate() {
                    *o += w * self.entries[i][j][k];
                }
            }
        }
        out
    }

    pub fn correlator(&self, a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
        let v = self.contract_pair(a, b);
        v[0] * c[0] + v[1] * c[1] + v[2] * c[2]
    }
}

impl fmt::Display for Choice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Choice::Unprimed => f.write_str(""),
            Choice::Primed => f.write_str("'"),
        }
    }
}
