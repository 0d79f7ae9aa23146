//! Emulation of the two-photon experiment.
//!
//! Photon 1's polarization is the purifier `M`, photon 2's polarization is the
//! system `S` and its longitudinal spatial mode is the reservoir `R`. With
//! `H <-> g`, `V <-> e` and spatial modes `0 <-> phi0`, `1 <-> phi1`, the
//! displaced Sagnac interferometer with a half-wave plate at angle `theta/2`
//! is amplitude damping with `p = sin^2(theta)`.
//!
//! Every single-party reduction of the evolved state is diagonal, so the `W`
//! values are estimated from the eight product-basis populations alone.
//!
//! The source impurity model (dephasing plus white noise) is a stand-in: the
//! only constraint available is the purity of each prepared state.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::invariants::{combine_invariant, InvariantReport, LambdaParam, RegimeTag};
use crate::qstate::{tensor_density, DensityMatrix, PureState, SubsystemLabel, C64, POSITIVITY_TOL};
use crate::tripartite::{PURIFIER, RESERVOIR, SYSTEM};

pub const DEFAULT_THETA_POINTS: usize = 19;
pub const DEFAULT_SHOTS: u64 = 100_000;
const SPATIAL_GROUND_TOL: f64 = 1e-12;
const WEIGHT_TOL: f64 = 1e-12;

/// Imperfect source: `(1-d-w)|Phi><Phi| + d diag(|Phi><Phi|) + w I/4` with
/// `|Phi> = alpha|VV> + beta|HH>`, `|alpha|^2 = rho_ee_target`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SourceModel {
    rho_ee_target: f64,
    dephasing_weight: f64,
    white_noise_weight: f64,
}

impl SourceModel {
    pub fn new(rho_ee_target: f64, dephasing_weight: f64, white_noise_weight: f64) -> Result<Self> {
        let in_unit = |x: f64| (0.0..=1.0).contains(&x);
        if !in_unit(rho_ee_target) {
            return Err(Error::InvalidParameter(format!("target excitation {rho_ee_target} outside [0, 1]")));
        }
        if !in_unit(dephasing_weight) || !in_unit(white_noise_weight) {
            return Err(Error::InvalidParameter("noise weights must lie in [0, 1]".into()));
        }
        if dephasing_weight + white_noise_weight > 1.0 + WEIGHT_TOL {
            return Err(Error::InvalidParameter(format!(
                "dephasing {dephasing_weight} + white noise {white_noise_weight} exceeds 1"
            )));
        }
        Ok(Self { rho_ee_target, dephasing_weight, white_noise_weight })
    }

    pub fn pure(rho_ee_target: f64) -> Result<Self> {
        Self::new(rho_ee_target, 0.0, 0.0)
    }

    /// Solves for the dephasing weight that yields `target_purity` by bisection
    /// on [`SourceModel::purity`].
    pub fn with_purity(rho_ee_target: f64, white_noise_weight: f64, target_purity: f64) -> Result<Self> {
        let base = Self::new(rho_ee_target, 0.0, white_noise_weight)?;
        let d_max = 1.0 - white_noise_weight;
        let at = |d: f64| Self { dephasing_weight: d, ..base }.purity();
        let (hi_purity, lo_purity) = (at(0.0), at(d_max));
        if target_purity > hi_purity + 1e-12 || target_purity < lo_purity - 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "purity {target_purity} unreachable; range is [{lo_purity}, {hi_purity}]"
            )));
        }
        let (mut lo, mut hi) = (0.0, d_max);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if at(mid) > target_purity {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-16 {
                break;
            }
        }
        Self::new(rho_ee_target, 0.5 * (lo + hi), white_noise_weight)
    }

    pub fn rho_ee_target(&self) -> f64 {
        self.rho_ee_target
    }

    pub fn dephasing_weight(&self) -> f64 {
        self.dephasing_weight
    }

    pub fn white_noise_weight(&self) -> f64 {
        self.white_noise_weight
    }

    fn target_amplitudes(&self) -> [f64; 4] {
        // (HH, HV, VH, VV)
        [(1.0 - self.rho_ee_target).sqrt(), 0.0, 0.0, self.rho_ee_target.sqrt()]
    }

    /// Closed-form `Tr(rho^2)` of the prepared two-photon state.
    pub fn purity(&self) -> f64 {
        let (d, w) = (self.dephasing_weight, self.white_noise_weight);
        let a = self.target_amplitudes();
        let diag: f64 = a.iter().map(|x| ((1.0 - w) * x * x + 0.25 * w).powi(2)).sum();
        let coherence = (1.0 - d - w) * a[0] * a[3];
        diag + 2.0 * coherence * coherence
    }
}

fn polarization_labels() -> Vec<SubsystemLabel> {
    vec![SubsystemLabel::qubit(PURIFIER), SubsystemLabel::qubit(SYSTEM)]
}

/// Two-photon polarization state over `(M, S)`; index 0 is `H`, index 1 is `V`.
pub fn prepare_source(m: &SourceModel) -> DensityMatrix {
    let (d, w) = (m.dephasing_weight, m.white_noise_weight);
    let a = m.target_amplitudes();
    let matrix = DMatrix::from_fn(4, 4, |i, j| {
        let pure = a[i] * a[j];
        if i == j {
            C64::new((1.0 - w) * pure + 0.25 * w, 0.0)
        } else {
            C64::new((1.0 - d - w) * pure, 0.0)
        }
    });
    DensityMatrix::new(polarization_labels(), matrix).expect("convex mixture of states is physical")
}

/// Appends photon 2's spatial mode `R` in mode `0`.
pub fn with_spatial_mode(source: &DensityMatrix) -> Result<DensityMatrix> {
    let zero = DensityMatrix::new(
        vec![SubsystemLabel::qubit(RESERVOIR)],
        DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
        ),
    )?;
    tensor_density(source, &zero)
}

/// Interferometer unitary on `(S, R)`, joint index `2 * s + r`.
pub fn sagnac_unitary(theta: f64) -> DMatrix<C64> {
    let (s, c) = theta.sin_cos();
    let z = 0.0;
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
        // H0   H1   V0   V1
        1.0,  z,    z,    z,   // H0
        z,    c,    s,    z,   // H1
        z,    -s,   c,    z,   // V0
        z,    z,    z,    1.0, // V1
    ]);
    m.map(|x| C64::new(x, 0.0))
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(Error::InvalidParameter(format!("theta {theta} outside [0, pi/2]")));
    }
    Ok(())
}

/// States the interferometer can act on.
pub trait SagnacInput: Sized {
    fn spatial_excited_weight(&self) -> Result<f64>;
    fn apply_unitary(&self, gate: &DMatrix<C64>) -> Result<Self>;
}

impl SagnacInput for PureState {
    fn spatial_excited_weight(&self) -> Result<f64> {
        self.level_weight(RESERVOIR, 1)
    }

    fn apply_unitary(&self, gate: &DMatrix<C64>) -> Result<Self> {
        self.apply_two_site(SYSTEM, RESERVOIR, gate)
    }
}

impl SagnacInput for DensityMatrix {
    fn spatial_excited_weight(&self) -> Result<f64> {
        let st: usize = {
            let pos = self
                .labels()
                .iter()
                .position(|l| l.name() == RESERVOIR)
                .ok_or_else(|| Error::UnknownLabel(RESERVOIR.to_string()))?;
            self.labels()[pos + 1..].iter().map(|l| l.dim()).product()
        };
        Ok((0..self.dim()).filter(|i| (i / st) % 2 == 1).map(|i| self.matrix()[(i, i)].re).sum())
    }

    fn apply_unitary(&self, gate: &DMatrix<C64>) -> Result<Self> {
        self.conjugate_two_site(SYSTEM, RESERVOIR, gate)
    }
}

/// `|H0> -> |H0>`, `|V0> -> cos(theta)|V0> + sin(theta)|H1>` on photon 2.
pub fn sagnac_transform<T: SagnacInput>(state: &T, theta: f64) -> Result<T> {
    check_theta(theta)?;
    let weight = state.spatial_excited_weight()?;
    if weight > SPATIAL_GROUND_TOL {
        return Err(Error::ReservoirNotGround { label: RESERVOIR.to_string(), weight });
    }
    state.apply_unitary(&sagnac_unitary(theta))
}

/// Outcome index `4 m + 2 s + r` with `H = 0`, `V = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Outcome(pub usize);

impl Outcome {
    pub fn all() -> impl Iterator<Item = Outcome> {
        (0..8).map(Outcome)
    }

    pub fn m_vertical(self) -> bool {
        self.0 & 4 != 0
    }

    pub fn s_vertical(self) -> bool {
        self.0 & 2 != 0
    }

    pub fn spatial_one(self) -> bool {
        self.0 & 1 != 0
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pol = |v| if v { 'V' } else { 'H' };
        write!(f, "{}{}{}", pol(self.m_vertical()), pol(self.s_vertical()), u8::from(self.spatial_one()))
    }
}

/// Finite-shot population measurement at one interferometer setting.
#[derive(Clone, Debug, PartialEq)]
pub struct CountRecord {
    pub theta: f64,
    pub p: f64,
    pub shots: u64,
    pub counts: [u64; 8],
    pub populations: [f64; 8],
    /// Binomial standard error of each population.
    pub stderr: [f64; 8],
}

/// Probabilities of the eight product-basis outcomes.
pub fn outcome_probabilities(rho: &DensityMatrix) -> Result<[f64; 8]> {
    if rho.dim() != 8 {
        return Err(Error::LengthMismatch { expected: 8, got: rho.dim() });
    }
    let mut probs = [0.0; 8];
    for (i, q) in probs.iter_mut().enumerate() {
        let x = rho.matrix()[(i, i)].re;
        if x < -POSITIVITY_TOL {
            return Err(Error::NotPositive(x));
        }
        *q = x.max(0.0);
    }
    Ok(probs)
}

/// Multinomial draw via sequential conditional binomials.
fn multinomial<R: Rng + ?Sized>(probs: &[f64; 8], shots: u64, rng: &mut R) -> [u64; 8] {
    let mut counts = [0u64; 8];
    let mut remaining = shots;
    let mut mass: f64 = probs.iter().sum();
    for i in 0..7 {
        if remaining == 0 {
            break;
        }
        let q = if mass > 0.0 { (probs[i] / mass).clamp(0.0, 1.0) } else { 0.0 };
        let k = Binomial::new(remaining, q).expect("probability clamped to [0, 1]").sample(rng);
        counts[i] = k;
        remaining -= k;
        mass -= probs[i];
    }
    counts[7] += remaining;
    counts
}

/// Independent generator for setting `index` of a run seeded with `master`.
pub fn substream(master: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}

pub fn sample_counts_with<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    theta: f64,
    shots: u64,
    rng: &mut R,
) -> Result<CountRecord> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    let probs = outcome_probabilities(rho)?;
    let counts = multinomial(&probs, shots, rng);
    let n = shots as f64;
    let populations = counts.map(|c| c as f64 / n);
    let stderr = populations.map(|q| (q * (1.0 - q) / n).sqrt());
    Ok(CountRecord { theta, p: theta.sin().powi(2), shots, counts, populations, stderr })
}

pub fn sample_counts(rho: &DensityMatrix, theta: f64, shots: u64, seed: u64) -> Result<CountRecord> {
    sample_counts_with(rho, theta, shots, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Marginal excitations `(P(m=V), P(s=V), P(r=1))`.
pub fn marginals(populations: &[f64; 8]) -> (f64, f64, f64) {
    let mut n = (0.0, 0.0, 0.0);
    for o in Outcome::all() {
        let q = populations[o.0];
        if o.m_vertical() {
            n.0 += q;
        }
        if o.s_vertical() {
            n.1 += q;
        }
        if o.spatial_one() {
            n.2 += q;
        }
    }
    n
}

/// Invariant estimate with delta-method standard errors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimatedInvariant {
    pub report: InvariantReport,
    pub n_m: f64,
    pub n_s: f64,
    pub n_r: f64,
    pub stderr_w_s: f64,
    pub stderr_w_r: f64,
    pub stderr_w_m: f64,
    pub stderr_lhs: f64,
    pub stderr_rhs: f64,
    /// Standard error of the signed difference `lhs - rhs`.
    pub stderr_diff: f64,
}

/// `sgn(x - 1/2)`, taking `+1` at the kink so the raw binomial error is kept.
fn kink_sign(x: f64) -> f64 {
    if x < 0.5 {
        -1.0
    } else {
        1.0
    }
}

/// Multinomial delta method: `Var(g . P) = (sum g_i^2 P_i - (sum g_i P_i)^2) / N`.
fn delta_stderr(pops: &[f64; 8], shots: Option<u64>, grad: impl Fn(Outcome) -> f64) -> f64 {
    let Some(n) = shots else { return 0.0 };
    let (mut second, mut first) = (0.0, 0.0);
    for o in Outcome::all() {
        let g = grad(o);
        second += g * g * pops[o.0];
        first += g * pops[o.0];
    }
    ((second - first * first).max(0.0) / n as f64).sqrt()
}

/// `W_i = |n_i - 1/2|` from marginal populations, with the regime chosen from
/// `n_M` as the excitation estimate. `shots = None` means exact populations.
pub fn estimate_from_populations(p: f64, pops: &[f64; 8], shots: Option<u64>) -> EstimatedInvariant {
    let (n_m, n_s, n_r) = marginals(pops);
    let (w_m, w_s, w_r) = ((n_m - 0.5).abs(), (n_s - 0.5).abs(), (n_r - 0.5).abs());
    let lambda = LambdaParam::unit();
    let report = combine_invariant(n_m, lambda, p, w_m, w_s, w_r);
    let (sm, ss, sr) = (kink_sign(n_m), kink_sign(n_s), kink_sign(n_r));
    let lhs_sign = if report.lhs >= 0.5 { 1.0 } else { -1.0 };
    let (cs, cr) = match report.regime.tag {
        RegimeTag::SumAlways | RegimeTag::SumMid => (1.0, 1.0),
        RegimeTag::RMinusS => (-1.0, 1.0),
        RegimeTag::SMinusR => (1.0, -1.0),
    };
    let ind = |b: bool| if b { 1.0 } else { 0.0 };
    let g_w_m = |o: Outcome| sm * ind(o.m_vertical());
    let g_w_s = |o: Outcome| ss * ind(o.s_vertical());
    let g_w_r = |o: Outcome| sr * ind(o.spatial_one());
    let g_rhs = |o: Outcome| cs * g_w_s(o) + cr * g_w_r(o);
    EstimatedInvariant {
        report,
        n_m,
        n_s,
        n_r,
        stderr_w_s: delta_stderr(pops, shots, g_w_s),
        stderr_w_r: delta_stderr(pops, shots, g_w_r),
        stderr_w_m: delta_stderr(pops, shots, g_w_m),
        stderr_lhs: delta_stderr(pops, shots, |o| lhs_sign * g_w_m(o)),
        stderr_rhs: delta_stderr(pops, shots, g_rhs),
        stderr_diff: delta_stderr(pops, shots, |o| lhs_sign * g_w_m(o) - g_rhs(o)),
    }
}

pub fn estimate_invariant(rec: &CountRecord) -> EstimatedInvariant {
    estimate_from_populations(rec.p, &rec.populations, Some(rec.shots))
}

/// Infinite-shot estimate from the exact outcome probabilities of `rho`.
pub fn exact_estimate(rho: &DensityMatrix, theta: f64) -> Result<EstimatedInvariant> {
    Ok(estimate_from_populations(theta.sin().powi(2), &outcome_probabilities(rho)?, None))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BootstrapErrors {
    pub w_s: f64,
    pub w_r: f64,
    pub w_m: f64,
    pub lhs: f64,
    pub rhs: f64,
}

/// Parametric bootstrap: resample counts from the observed populations and
/// take the spread of the re-estimated quantities.
pub fn bootstrap_stderr(rec: &CountRecord, resamples: usize, seed: u64) -> Result<BootstrapErrors> {
    if resamples < 2 {
        return Err(Error::InvalidParameter("bootstrap needs at least two resamples".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = [(0.0f64, 0.0f64); 5];
    for _ in 0..resamples {
        let counts = multinomial(&rec.populations, rec.shots, &mut rng);
        let pops = counts.map(|c| c as f64 / rec.shots as f64);
        let r = estimate_from_populations(rec.p, &pops, None).report;
        for (slot, x) in acc.iter_mut().zip([r.w_s, r.w_r, r.w_m, r.lhs, r.rhs]) {
            slot.0 += x;
            slot.1 += x * x;
        }
    }
    let k = resamples as f64;
    let sd = |(s, s2): (f64, f64)| ((s2 - s * s / k).max(0.0) / (k - 1.0)).sqrt();
    Ok(BootstrapErrors { w_s: sd(acc[0]), w_r: sd(acc[1]), w_m: sd(acc[2]), lhs: sd(acc[3]), rhs: sd(acc[4]) })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub source: SourceModel,
    pub theta_grid: Vec<f64>,
    pub shots: u64,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(source: SourceModel, theta_grid: Vec<f64>, shots: u64, seed: u64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::InvalidParameter("shots must be at least 1".into()));
        }
        for &t in &theta_grid {
            check_theta(t)?;
        }
        Ok(Self { source, theta_grid, shots, seed })
    }
}

/// `n` equally spaced half-wave-plate settings covering `theta in [0, pi/2]`.
pub fn theta_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| FRAC_PI_2 * i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentPoint {
    pub theta: f64,
    pub record: CountRecord,
    pub estimate: EstimatedInvariant,
}

/// Density matrix over `(M, S, R)` after the interferometer at `theta`.
pub fn evolved_source(source: &SourceModel, theta: f64) -> Result<DensityMatrix> {
    sagnac_transform(&with_spatial_mode(&prepare_source(source))?, theta)
}

/// Setting `k` draws from substream `k` of `cfg.seed`, so results do not
/// depend on evaluation order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentPoint>> {
    cfg.theta_grid
        .iter()
        .enumerate()
        .map(|(k, &theta)| {
            let rho = evolved_source(&cfg.source, theta)?;
            let record = sample_counts_with(&rho, theta, cfg.shots, &mut substream(cfg.seed, k as u64))?;
            let estimate = estimate_invariant(&record);
            Ok(ExperimentPoint { theta, record, estimate })
        })
        .collect()
}
