//! `alpha|M1>|e...e> + beta|M0>|g...g>` with an independent two-level
//! reservoir damping each system qubit.
//!
//! The averaged law `W_M + 1/2 = (1/N) sum_j (W_Sj + W_Rj)` is the
//! many-qubit form of the always-sum case and needs `|alpha|^2 <= 1/2`.
//! Reports outside that range carry `applicable = false`; their residual is
//! still computed so callers can see the violation.

use crate::channel::{apply_damping, DampingParameter, QubitDensity};
use crate::error::{Error, Result};
use crate::invariants::{is_low_excitation, w_of_qubit, LambdaParam};
use crate::qstate::{PureState, SubsystemLabel, C64, NORM_TOL};

/// `2^(2*8+1)` amplitudes.
pub const DEFAULT_MAX_AMPLITUDES: usize = 1 << 17;

#[derive(Clone, Debug, PartialEq)]
pub struct GhzConfig {
    n: usize,
    alpha: C64,
    beta: C64,
    p_list: Vec<f64>,
    max_amplitudes: usize,
}

impl GhzConfig {
    pub fn new(alpha: C64, beta: C64, p_list: Vec<f64>) -> Result<Self> {
        let n = p_list.len();
        if n == 0 {
            return Err(Error::InvalidParameter("GHZ state needs at least one system qubit".into()));
        }
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        for &p in &p_list {
            DampingParameter::new(p)?;
        }
        Ok(Self { n, alpha: alpha / norm, beta: beta / norm, p_list, max_amplitudes: DEFAULT_MAX_AMPLITUDES })
    }

    /// Real amplitudes `alpha = sqrt(alpha2)`, `beta = sqrt(1 - alpha2)`.
    pub fn with_population(alpha2: f64, p_list: Vec<f64>) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha2) {
            return Err(Error::InvalidParameter(format!("|alpha|^2 = {alpha2} outside [0, 1]")));
        }
        Self::new(C64::new(alpha2.sqrt(), 0.0), C64::new((1.0 - alpha2).sqrt(), 0.0), p_list)
    }

    pub fn with_max_amplitudes(mut self, cap: usize) -> Self {
        self.max_amplitudes = cap;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    pub fn beta(&self) -> C64 {
        self.beta
    }

    pub fn p_list(&self) -> &[f64] {
        &self.p_list
    }

    /// `|alpha|^2`, the excitation of every system qubit at `p = 0`.
    pub fn excitation(&self) -> f64 {
        self.alpha.norm_sqr()
    }

    pub fn required_amplitudes(&self) -> Option<usize> {
        1usize.checked_shl(u32::try_from(2 * self.n + 1).ok()?)
    }
}

pub fn system_label(j: usize) -> String {
    format!("S{}", j + 1)
}

pub fn reservoir_label(j: usize) -> String {
    format!("R{}", j + 1)
}

fn labels(n: usize) -> Vec<SubsystemLabel> {
    let mut l = vec![SubsystemLabel::qubit("M")];
    l.extend((0..n).map(|j| SubsystemLabel::qubit(system_label(j))));
    l.extend((0..n).map(|j| SubsystemLabel::qubit(reservoir_label(j))));
    l
}

/// Labels `(M, S1..SN, R1..RN)`, every reservoir in its ground state.
pub fn build_ghz(cfg: &GhzConfig) -> Result<PureState> {
    let required = cfg.required_amplitudes().unwrap_or(usize::MAX);
    if required > cfg.max_amplitudes {
        return Err(Error::DimensionCap { required, cap: cfg.max_amplitudes });
    }
    let n = cfg.n;
    let mut excited = vec![0usize; 2 * n + 1];
    excited[..=n].fill(1);
    let ground = vec![0usize; 2 * n + 1];
    PureState::from_terms(labels(n), &[(&excited, cfg.alpha), (&ground, cfg.beta)])
}

/// Damps qubit `order[k]` at step `k`.
pub fn evolve_ghz_in_order(cfg: &GhzConfig, order: &[usize]) -> Result<PureState> {
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..cfg.n).collect::<Vec<_>>() {
        return Err(Error::InvalidParameter("order must be a permutation of the qubit indices".into()));
    }
    let mut state = build_ghz(cfg)?;
    for &j in order {
        let p = DampingParameter::new(cfg.p_list[j])?;
        state = apply_damping(&state, &system_label(j), &reservoir_label(j), p)?;
    }
    Ok(state)
}

pub fn evolve_ghz(cfg: &GhzConfig) -> Result<PureState> {
    let order: Vec<usize> = (0..cfg.n).collect();
    evolve_ghz_in_order(cfg, &order)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GhzReport {
    pub rho_ee: f64,
    pub w_m: f64,
    /// `(W_Sj, W_Rj)` per system qubit, in label order.
    pub pairs: Vec<(f64, f64)>,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// Whether `|alpha|^2 <= 1/2`, the range where the averaged law applies.
    pub applicable: bool,
}

fn w_of_party(state: &PureState, name: &str) -> Result<f64> {
    let rho = QubitDensity::from_density(&state.reduced_density(&[name])?)?;
    w_of_qubit(&rho, LambdaParam::unit())
}

pub fn evolve_and_check(cfg: &GhzConfig) -> Result<GhzReport> {
    let state = evolve_ghz(cfg)?;
    let w_m = w_of_party(&state, "M")?;
    let pairs = (0..cfg.n)
        .map(|j| Ok((w_of_party(&state, &system_label(j))?, w_of_party(&state, &reservoir_label(j))?)))
        .collect::<Result<Vec<_>>>()?;
    let lhs = w_m + 0.5;
    let rhs = pairs.iter().map(|(s, r)| s + r).sum::<f64>() / cfg.n as f64;
    let rho_ee = cfg.excitation();
    Ok(GhzReport {
        rho_ee,
        w_m,
        pairs,
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        applicable: is_low_excitation(rho_ee, LambdaParam::unit()),
    })
}
