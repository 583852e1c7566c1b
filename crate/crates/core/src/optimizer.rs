//! Search for measurement settings that maximize `|Sv|`.
//!
//! Continuous spaces use multi-start coordinate-wise golden-section ascent
//! over angle parameters; discrete menus are enumerated exhaustively.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::{ChaCha20Rng, ChaCha8Rng};
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::inequalities::{
    anticommutator_bound, correlator_table, eval_svetlichny, term_sign, CLASSICAL_BOUND,
    QUANTUM_BOUND, TERMS,
};
use crate::quantum::{
    ghz_state, make_state, tensor_expectation, CorrelationTensor, MeasurementSetting, Observable,
    Scenario, StateVector,
};

/// Slack on the classical bound when deciding whether a violation exists.
pub const CERTIFY_SLACK: f64 = 1e-9;

/// Farthest multiple of a sweep displacement tried by the pattern move.
const PATTERN_REACH: f64 = 8.0;

const PARTY_NAMES: [[&str; 2]; 3] = [["A", "A'"], ["B", "B'"], ["C", "C'"]];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchKind {
    /// Two angles (polar, azimuth) per setting.
    FullSphere,
    /// One angle from the x axis per setting.
    Planar,
    FixedMenu,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchSpace {
    pub kind: SearchKind,
    pub menu: Vec<MeasurementSetting>,
    /// Number of random restarts.
    pub seeds: usize,
    /// Cap on full coordinate sweeps per restart.
    pub max_iterations: usize,
    /// Radians; a restart converges once a full sweep moves no coordinate further.
    pub step_tolerance: f64,
    pub rng_seed: u64,
}

impl SearchSpace {
    fn continuous(kind: SearchKind, seeds: usize) -> Self {
        Self {
            kind,
            menu: Vec::new(),
            seeds,
            max_iterations: 2000,
            step_tolerance: 1e-8,
            rng_seed: 0,
        }
    }

    pub fn planar(seeds: usize) -> Self {
        Self::continuous(SearchKind::Planar, seeds)
    }

    pub fn full_sphere(seeds: usize) -> Self {
        Self::continuous(SearchKind::FullSphere, seeds)
    }

    pub fn fixed_menu(menu: Vec<MeasurementSetting>) -> Self {
        Self {
            kind: SearchKind::FixedMenu,
            menu,
            seeds: 0,
            max_iterations: 0,
            step_tolerance: 0.0,
            rng_seed: 0,
        }
    }

    pub fn with_rng_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            SearchKind::FixedMenu => {
                if self.menu.is_empty() {
                    return Err(Error::InvalidInput("fixed menu is empty".into()));
                }
                for s in &self.menu {
                    s.validate()?;
                }
            }
            SearchKind::Planar | SearchKind::FullSphere => {
                if self.seeds == 0 {
                    return Err(Error::InvalidInput(
                        "at least one restart seed is required".into(),
                    ));
                }
                if self.max_iterations == 0 {
                    return Err(Error::InvalidInput(
                        "max_iterations must be positive".into(),
                    ));
                }
                if !(self.step_tolerance > 0.0 && self.step_tolerance.is_finite()) {
                    return Err(Error::InvalidInput(format!(
                        "step tolerance {} must be positive",
                        self.step_tolerance
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchTrace {
    /// Sweeps used by the winning restart (continuous spaces).
    pub iterations: usize,
    pub restart: usize,
    pub converged: bool,
    pub scenarios_evaluated: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizationResult {
    pub best_scenario: Scenario,
    /// `|Sv|` of `best_scenario`, recomputed through [`eval_svetlichny`].
    pub best_value: f64,
    pub signed_value: f64,
    /// Planar: `[α, α', β, β', γ, γ']`. Full sphere: `(polar, azimuth)` per
    /// setting in the same order. Empty for menus.
    pub parameters: Vec<f64>,
    /// Menu indices `[[A, A'], [B, B'], [C, C']]` for menu searches.
    pub menu_choice: Option<[[usize; 2]; 3]>,
    pub trace: SearchTrace,
}

/// Wraps an angle into `(−π, π]`.
fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

fn params_per_setting(kind: SearchKind) -> usize {
    match kind {
        SearchKind::FullSphere => 2,
        _ => 1,
    }
}

fn direction(kind: SearchKind, p: &[f64]) -> [f64; 3] {
    match kind {
        SearchKind::FullSphere => {
            let (sp, cp) = p[0].sin_cos();
            let (sa, ca) = p[1].sin_cos();
            [sp * ca, sp * sa, cp]
        }
        _ => [p[0].cos(), p[0].sin(), 0.0],
    }
}

/// Signed `Sv` from Bloch directions `dirs[party][choice]` via the correlation tensor.
fn fast_signed(tensor: &CorrelationTensor, dirs: &[[[f64; 3]; 2]; 3]) -> f64 {
    let mut total = 0.0;
    for x in 0..2 {
        for y in 0..2 {
            let v = tensor.contract_pair(&dirs[0][x], &dirs[1][y]);
            for z in 0..2 {
                let c = &dirs[2][z];
                total += term_sign(x, y, z) * (v[0] * c[0] + v[1] * c[1] + v[2] * c[2]);
            }
        }
    }
    total
}

/// Coefficients `(w, c)` with `Sv = w·n + c` as a function of the
/// direction `n` of setting `(party, choice)`, the others held fixed.
fn linear_form(
    tensor: &CorrelationTensor,
    dirs: &[[[f64; 3]; 2]; 3],
    party: usize,
    choice: usize,
) -> ([f64; 3], f64) {
    let mut probe = *dirs;
    probe[party][choice] = [0.0; 3];
    let c = fast_signed(tensor, &probe);
    let w = std::array::from_fn(|i| {
        let mut e = [0.0; 3];
        e[i] = 1.0;
        probe[party][choice] = e;
        fast_signed(tensor, &probe) - c
    });
    (w, c)
}

struct Ascent {
    params: Vec<f64>,
    signed: f64,
    sweeps: usize,
    converged: bool,
}

fn golden_section_max(mut g: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (g(c), g(d));
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = g(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn local_ascent(
    tensor: &CorrelationTensor,
    kind: SearchKind,
    init: Vec<f64>,
    space: &SearchSpace,
) -> Ascent {
    let per = params_per_setting(kind);
    let mut params = init;
    let mut dirs = [[[0.0; 3]; 2]; 3];
    for s in 0..6 {
        dirs[s / 2][s % 2] = direction(kind, &params[s * per..(s + 1) * per]);
    }
    let mut value = fast_signed(tensor, &dirs);
    let mut sweeps = 0;
    let mut converged = false;
    let build_dirs = |p: &[f64]| {
        let mut d = [[[0.0; 3]; 2]; 3];
        for s in 0..6 {
            d[s / 2][s % 2] = direction(kind, &p[s * per..(s + 1) * per]);
        }
        d
    };
    while sweeps < space.max_iterations {
        sweeps += 1;
        let sigma = if value >= 0.0 { 1.0 } else { -1.0 };
        let mut max_step = 0.0f64;
        let sweep_start = params.clone();
        for k in 0..params.len() {
            let setting = k / per;
            let (party, choice) = (setting / 2, setting % 2);
            let x0 = params[k];
            let g0 = sigma * value;
            let mut trial = params[setting * per..(setting + 1) * per].to_vec();
            let offset = k - setting * per;
            // Sv is linear in the varied direction: Sv = w·n + c.
            let (w, c) = linear_form(tensor, &dirs, party, choice);
            let (xc, gc) = golden_section_max(
                |t| {
                    trial[offset] = t;
                    let n = direction(kind, &trial);
                    sigma * (w[0] * n[0] + w[1] * n[1] + w[2] * n[2] + c)
                },
                x0 - PI,
                x0 + PI,
                space.step_tolerance,
            );
            if gc > g0 + 4.0 * f64::EPSILON * g0.abs().max(1.0) {
                max_step = max_step.max((xc - x0).abs());
                params[k] = xc;
                dirs[party][choice] = direction(kind, &params[setting * per..(setting + 1) * per]);
                value = fast_signed(tensor, &dirs);
            }
        }
        if max_step < space.step_tolerance {
            converged = true;
            break;
        }
        // Pattern move: extrapolate along the sweep's net displacement.
        let delta: Vec<f64> = params
            .iter()
            .zip(&sweep_start)
            .map(|(p, s)| p - s)
            .collect();
        let span = delta.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let along = |t: f64| -> Vec<f64> {
            sweep_start
                .iter()
                .zip(&delta)
                .map(|(s, d)| s + t * d)
                .collect()
        };
        let g_now = sigma * value;
        let (t_best, g_best) = golden_section_max(
            |t| sigma * fast_signed(tensor, &build_dirs(&along(t))),
            1.0,
            PATTERN_REACH,
            space.step_tolerance / span,
        );
        if g_best > g_now + 4.0 * f64::EPSILON * g_now.abs().max(1.0) {
            params = along(t_best);
            dirs = build_dirs(&params);
            value = sigma * g_best;
        }
    }
    Ascent {
        params,
        signed: value,
        sweeps,
        converged,
    }
}

fn initial_params(kind: SearchKind, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match kind {
        SearchKind::FullSphere => (0..6)
            .flat_map(|_| {
                let polar = (1.0 - 2.0 * rng.random::<f64>()).acos();
                let azimuth = PI * (2.0 * rng.random::<f64>() - 1.0);
                [polar, azimuth]
            })
            .collect(),
        _ => (0..6)
            .map(|_| PI * (2.0 * rng.random::<f64>() - 1.0))
            .collect(),
    }
}

fn scenario_from_params(kind: SearchKind, params: &[f64]) -> Result<Scenario> {
    let per = params_per_setting(kind);
    let mut settings: Vec<MeasurementSetting> = Vec::with_capacity(6);
    for s in 0..6 {
        let p = &params[s * per..(s + 1) * per];
        let name = PARTY_NAMES[s / 2][s % 2];
        let setting = match kind {
            SearchKind::FullSphere => MeasurementSetting::spherical(p[0], p[1])
                .with_label(format!("{name}@({},{})", p[0], p[1])),
            _ => MeasurementSetting::planar(p[0]).with_label(format!("{name}@{}", p[0])),
        };
        settings.push(setting);
    }
    let mut it = settings.into_iter();
    let mut next_pair = || [it.next().unwrap(), it.next().unwrap()];
    Scenario::new([next_pair(), next_pair(), next_pair()])
}

fn optimize_continuous(state: &StateVector, space: &SearchSpace) -> Result<OptimizationResult> {
    let tensor = CorrelationTensor::of(state)?;
    let kind = space.kind;
    let runs: Vec<Ascent> = (0..space.seeds)
        .into_par_iter()
        .map(|restart| {
            let mut rng = ChaCha8Rng::seed_from_u64(space.rng_seed);
            rng.set_stream(restart as u64);
            local_ascent(&tensor, kind, initial_params(kind, &mut rng), space)
        })
        .collect();
    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.signed.abs() > runs[best].signed.abs() {
            best = i;
        }
    }
    let run = &runs[best];
    let per = params_per_setting(kind);
    let parameters: Vec<f64> = run
        .params
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            if per == 2 && k % 2 == 0 {
                p
            } else {
                wrap_angle(p)
            }
        })
        .collect();
    let best_scenario = scenario_from_params(kind, &parameters)?;
    let report = eval_svetlichny(&correlator_table(state, &best_scenario)?);
    debug_assert!(report.absolute_value <= QUANTUM_BOUND + 1e-9);
    Ok(OptimizationResult {
        best_scenario,
        best_value: report.absolute_value,
        signed_value: report.signed_value,
        parameters,
        menu_choice: None,
        trace: SearchTrace {
            iterations: run.sweeps,
            restart: best,
            converged: run.converged,
            scenarios_evaluated: 0,
        },
    })
}

/// Exhaustive search over ordered pairs of menu settings for each party.
fn optimize_menu(state: &StateVector, menu: &[MeasurementSetting]) -> Result<OptimizationResult> {
    let m = menu.len();
    let obs = menu
        .iter()
        .map(Observable::from_setting)
        .collect::<Result<Vec<_>>>()?;
    let mut corr = vec![0.0; m * m * m];
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                corr[(i * m + j) * m + k] = tensor_expectation(state, &obs[i], &obs[j], &obs[k])?;
            }
        }
    }
    let pairs: Vec<[usize; 2]> = (0..m).flat_map(|a| (0..m).map(move |b| [a, b])).collect();
    let mut best: Option<([[usize; 2]; 3], f64)> = None;
    let mut evaluated = 0u64;
    for pa in &pairs {
        for pb in &pairs {
            for pc in &pairs {
                evaluated += 1;
                let signed: f64 = TERMS
                    .iter()
                    .map(|([x, y, z], sign)| sign * corr[(pa[*x] * m + pb[*y]) * m + pc[*z]])
                    .sum();
                if best.is_none_or(|(_, v)| signed.abs() > v.abs()) {
                    best = Some(([*pa, *pb, *pc], signed));
                }
            }
        }
    }
    let (choice, _) = best.expect("menu is nonempty");
    let best_scenario = Scenario::new(choice.map(|pair| pair.map(|i| menu[i].clone())))?;
    let report = eval_svetlichny(&correlator_table(state, &best_scenario)?);
    Ok(OptimizationResult {
        best_scenario,
        best_value: report.absolute_value,
        signed_value: report.signed_value,
        parameters: Vec::new(),
        menu_choice: Some(choice),
        trace: SearchTrace {
            iterations: 0,
            restart: 0,
            converged: true,
            scenarios_evaluated: evaluated,
        },
    })
}

/// Maximizes `|Sv|` for `state` over `space`.
pub fn optimize_settings(state: &StateVector, space: &SearchSpace) -> Result<OptimizationResult> {
    space.validate()?;
    match space.kind {
        SearchKind::FixedMenu => optimize_menu(state, &space.menu),
        SearchKind::Planar | SearchKind::FullSphere => optimize_continuous(state, space),
    }
}

/// xy-plane angles `[[α, α'], [β, β'], [γ, γ']]` reaching `4√2` on the GHZ state.
pub const OPTIMAL_PLANAR_ANGLES: [[f64; 2]; 3] =
    [[0.0, -FRAC_PI_2], [FRAC_PI_4, -FRAC_PI_4], [0.0, FRAC_PI_2]];

pub fn optimal_planar_scenario() -> Scenario {
    Scenario::planar(OPTIMAL_PLANAR_ANGLES)
}

/// Evaluates the GHZ state at [`OPTIMAL_PLANAR_ANGLES`]; returns the scenario and `|Sv|`.
pub fn verify_optimal_angles() -> Result<(Scenario, f64)> {
    let scenario = optimal_planar_scenario();
    let report = eval_svetlichny(&correlator_table(&ghz_state(), &scenario)?);
    Ok((scenario, report.absolute_value))
}

/// The six planar settings of [`OPTIMAL_PLANAR_ANGLES`] as a menu.
pub fn optimal_planar_menu() -> Vec<MeasurementSetting> {
    let mut menu: Vec<MeasurementSetting> = Vec::new();
    for (p, pair) in OPTIMAL_PLANAR_ANGLES.iter().enumerate() {
        for (k, angle) in pair.iter().enumerate() {
            menu.push(
                MeasurementSetting::planar(*angle)
                    .with_label(format!("{}@{angle}", PARTY_NAMES[p][k])),
            );
        }
    }
    menu
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    CanCertify,
    CannotCertify,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::CanCertify => "can-certify",
            Verdict::CannotCertify => "cannot-certify",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport {
    pub best_scenario: Scenario,
    pub best_value: f64,
    pub signed_value: f64,
    pub menu_choice: [[usize; 2]; 3],
    pub scenarios_evaluated: u64,
    pub verdict: Verdict,
}

/// Whether any scenario built from `menu` lets `state` violate the
/// classical bound.
pub fn audit_fixed_menu(state: &StateVector, menu: &[MeasurementSetting]) -> Result<AuditReport> {
    let result = optimize_settings(state, &SearchSpace::fixed_menu(menu.to_vec()))?;
    let verdict = if result.best_value <= CLASSICAL_BOUND + CERTIFY_SLACK {
        Verdict::CannotCertify
    } else {
        Verdict::CanCertify
    };
    Ok(AuditReport {
        menu_choice: result.menu_choice.expect("menu search records its choice"),
        scenarios_evaluated: result.trace.scenarios_evaluated,
        best_scenario: result.best_scenario,
        best_value: result.best_value,
        signed_value: result.signed_value,
        verdict,
    })
}

/// Pure state from eight independent standard complex Gaussians.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R) -> StateVector {
    loop {
        let amps = std::array::from_fn(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            num_complex::Complex64::new(re, im)
        });
        if let Ok(s) = make_state(amps) {
            return s;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanTrial {
    pub value: f64,
    /// Schwarz bound from the optimized `C`, `C'` pair.
    pub anticommutator_bound: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanReport {
    pub max_observed: f64,
    pub trials: Vec<ScanTrial>,
}

/// Optimizes every state in `states` over `space`. Trial `t` uses restart
/// seed `space.rng_seed + t`.
pub fn scan_states(states: &[StateVector], space: &SearchSpace) -> Result<ScanReport> {
    let trials = states
        .par_iter()
        .enumerate()
        .map(|(t, state)| {
            let trial_space = space
                .clone()
                .with_rng_seed(space.rng_seed.wrapping_add(t as u64));
            let result = optimize_settings(state, &trial_space)?;
            let obs = result.best_scenario.observables()?;
            let bound = anticommutator_bound(state, &obs[2][0], &obs[2][1])?;
            Ok(ScanTrial {
                value: result.best_value,
                anticommutator_bound: bound,
                converged: result.trace.converged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_observed = trials.iter().map(|t| t.value).fold(0.0, f64::max);
    Ok(ScanReport {
        max_observed,
        trials,
    })
}

/// Search space used by [`random_state_scan`] per state.
pub fn default_scan_space(seed: u64) -> SearchSpace {
    SearchSpace {
        max_iterations: 1000,
        ..SearchSpace::full_sphere(4)
    }
    .with_rng_seed(seed)
}

/// `trials` random pure states (stream `t` of a ChaCha20 generator seeded
/// with `seed`), each optimized over the full sphere.
pub fn random_state_scan(trials: usize, seed: u64) -> Result<ScanReport> {
    if trials == 0 {
        return Err(Error::InvalidInput("at least one trial is required".into()));
    }
    let states: Vec<StateVector> = (0..trials)
        .map(|t| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            random_state(&mut rng)
        })
        .collect();
    scan_states(&states, &default_scan_space(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::StateVector;

    fn xz_menu() -> Vec<MeasurementSetting> {
        vec![MeasurementSetting::pauli_x(), MeasurementSetting::pauli_z()]
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn golden_section_finds_cosine_peak() {
        let (x, v) = golden_section_max(|t| (t - 0.3).cos(), 0.3 - 2.0, 0.3 + 2.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fast_objective_matches_canonical_route() {
        let g = ghz_state();
        let t = CorrelationTensor::of(&g).unwrap();
        let params = vec![0.3, -1.1, 0.7, 2.0, -0.4, 1.4];
        let mut dirs = [[[0.0; 3]; 2]; 3];
        for s in 0..6 {
            dirs[s / 2][s % 2] = direction(SearchKind::Planar, &params[s..s + 1]);
        }
        let sc = scenario_from_params(SearchKind::Planar, &params).unwrap();
        let canonical = eval_svetlichny(&correlator_table(&g, &sc).unwrap()).signed_value;
        assert!((fast_signed(&t, &dirs) - canonical).abs() < 1e-13);
    }

    #[test]
    fn optimal_angles_verified() {
        let (_, v) = verify_optimal_angles().unwrap();
        assert!((v - 5.656854249492381).abs() < 1e-12);
    }

    #[test]
    fn perturbing_an_optimal_angle_lowers_value() {
        let g = ghz_state();
        for p in 0..3 {
            for k in 0..2 {
                let mut angles = OPTIMAL_PLANAR_ANGLES;
                angles[p][k] += 0.1;
                let v = eval_svetlichny(&correlator_table(&g, &Scenario::planar(angles)).unwrap())
                    .absolute_value;
                assert!(v < QUANTUM_BOUND - 1e-4, "{p},{k}: {v}");
            }
        }
    }

    #[test]
    fn negated_angles_keep_value() {
        let angles = OPTIMAL_PLANAR_ANGLES.map(|pair| pair.map(|a| -a));
        let v =
            eval_svetlichny(&correlator_table(&ghz_state(), &Scenario::planar(angles)).unwrap())
                .absolute_value;
        assert!((v - QUANTUM_BOUND).abs() < 1e-12);
    }

    #[test]
    fn planar_search_recovers_maximum() {
        let r = optimize_settings(&ghz_state(), &SearchSpace::planar(8)).unwrap();
        assert!(r.best_value >= QUANTUM_BOUND - 1e-6, "{}", r.best_value);
        assert!(r.best_value <= QUANTUM_BOUND + 1e-9);
        assert_eq!(r.parameters.len(), 6);
    }

    #[test]
    fn full_sphere_search_recovers_maximum() {
        let r = optimize_settings(&ghz_state(), &SearchSpace::full_sphere(8)).unwrap();
        assert!(r.best_value >= QUANTUM_BOUND - 1e-6, "{}", r.best_value);
        assert_eq!(r.parameters.len(), 12);
    }

    #[test]
    fn search_is_deterministic() {
        let space = SearchSpace::planar(6).with_rng_seed(99);
        let a = optimize_settings(&ghz_state(), &space).unwrap();
        let b = optimize_settings(&ghz_state(), &space).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.best_value.to_bits(), b.best_value.to_bits());
    }

    #[test]
    fn iteration_cap_flags_non_convergence() {
        let space = SearchSpace {
            max_iterations: 1,
            ..SearchSpace::planar(2)
        };
        let r = optimize_settings(&ghz_state(), &space).unwrap();
        assert!(!r.trace.converged);
        assert_eq!(r.trace.iterations, 1);
    }

    #[test]
    fn invalid_spaces_rejected() {
        assert!(optimize_settings(&ghz_state(), &SearchSpace::planar(0)).is_err());
        assert!(optimize_settings(&ghz_state(), &SearchSpace::fixed_menu(vec![])).is_err());
        let bad = SearchSpace {
            step_tolerance: -1.0,
            ..SearchSpace::planar(1)
        };
        assert!(optimize_settings(&ghz_state(), &bad).is_err());
    }

    #[test]
    fn menu_counts_and_brute_force() {
        let menu = xz_menu();
        let r = optimize_settings(&ghz_state(), &SearchSpace::fixed_menu(menu.clone())).unwrap();
        assert_eq!(r.trace.scenarios_evaluated, 64);
        // Brute-force oracle through the canonical route.
        let mut best = 0.0f64;
        for bits in 0..64usize {
            let pick = |i: usize| menu[(bits >> i) & 1].clone();
            let sc = Scenario::new([[pick(0), pick(1)], [pick(2), pick(3)], [pick(4), pick(5)]])
                .unwrap();
            best = best
                .max(eval_svetlichny(&correlator_table(&ghz_state(), &sc).unwrap()).absolute_value);
        }
        assert!((r.best_value - best).abs() < 1e-12);
    }

    #[test]
    fn audits() {
        let g = ghz_state();
        let xz = audit_fixed_menu(&g, &xz_menu()).unwrap();
        assert_eq!(xz.verdict, Verdict::CannotCertify);
        let xyz = audit_fixed_menu(
            &g,
            &[
                MeasurementSetting::pauli_x(),
                MeasurementSetting::pauli_y(),
                MeasurementSetting::pauli_z(),
            ],
        )
        .unwrap();
        assert_eq!(xyz.verdict, Verdict::CannotCertify);
        assert_eq!(xyz.scenarios_evaluated, 729);
        let planar = audit_fixed_menu(&g, &optimal_planar_menu()).unwrap();
        assert_eq!(planar.verdict, Verdict::CanCertify);
        assert!((planar.best_value - QUANTUM_BOUND).abs() < 1e-12);
        assert_eq!(planar.scenarios_evaluated, 6u64.pow(6));
    }

    #[test]
    fn product_state_stays_classical() {
        let r = optimize_settings(&StateVector::basis(0), &SearchSpace::full_sphere(6)).unwrap();
        assert!(r.best_value <= 4.0 + 1e-6, "{}", r.best_value);
    }

    #[test]
    fn scan_of_ghz_reaches_maximum() {
        let report = scan_states(&[ghz_state()], &default_scan_space(3)).unwrap();
        assert!(report.max_observed >= QUANTUM_BOUND - 1e-6);
        assert!(report.trials[0].value <= report.trials[0].anticommutator_bound + 1e-9);
    }

    #[test]
    fn small_random_scan_respects_bounds() {
        let report = random_state_scan(16, 5).unwrap();
        assert_eq!(report.trials.len(), 16);
        assert!(report.max_observed <= QUANTUM_BOUND + 1e-9);
        for t in &report.trials {
            assert!(t.value <= t.anticommutator_bound + 1e-9);
        }
        assert_eq!(report, random_state_scan(16, 5).unwrap());
        assert!(random_state_scan(0, 5).is_err());
    }
}
