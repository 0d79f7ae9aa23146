//! Purifier `M`, system qubit `S` and reservoir `R`: preparation, damping
//! and end-to-end conservation sweeps.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::{apply_damping, DampingParameter, QubitDensity};
use crate::error::{Error, Result};
use crate::invariants::{evaluate_invariant_reduced, InvariantReport};
use crate::qstate::{purity_and_schmidt, PureState, SubsystemLabel, C64, NORM_TOL};

pub const PURIFIER: &str = "M";
pub const SYSTEM: &str = "S";
pub const RESERVOIR: &str = "R";

/// Coefficients of `alpha|M1 e> + beta|M0 g> + gamma|M1 g> + delta|M0 e>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PurificationAmplitudes {
    pub alpha: C64,
    pub beta: C64,
    pub gamma: C64,
    pub delta: C64,
}

impl PurificationAmplitudes {
    pub fn new(alpha: C64, beta: C64, gamma: C64, delta: C64) -> Result<Self> {
        let norm = (alpha.norm_sqr() + beta.norm_sqr() + gamma.norm_sqr() + delta.norm_sqr()).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { alpha: alpha / norm, beta: beta / norm, gamma: gamma / norm, delta: delta / norm })
    }

    /// Diagonal case `(sqrt(rho_ee), sqrt(1 - rho_ee), 0, 0)`.
    pub fn diagonal(rho_ee: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho_ee) {
            return Err(Error::InvalidParameter(format!("rho_ee {rho_ee} outside [0, 1]")));
        }
        let zero = C64::new(0.0, 0.0);
        Self::new(C64::new(rho_ee.sqrt(), 0.0), C64::new((1.0 - rho_ee).sqrt(), 0.0), zero, zero)
    }

    /// Uniform draw from the unit sphere in C^4.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let mut z = [C64::new(0.0, 0.0); 4];
            for c in z.iter_mut() {
                *c = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            }
            let norm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                return Self { alpha: z[0] / norm, beta: z[1] / norm, gamma: z[2] / norm, delta: z[3] / norm };
            }
        }
    }

    /// Initial system matrix obtained by tracing out `M`.
    pub fn system_density(&self) -> QubitDensity {
        let rho_ee = self.alpha.norm_sqr() + self.delta.norm_sqr();
        let rho_gg = self.beta.norm_sqr() + self.gamma.norm_sqr();
        let rho_ge = self.beta * self.delta.conj() + self.alpha.conj() * self.gamma;
        QubitDensity::new(rho_gg, rho_ee, rho_ge).expect("reduction of a normalized state is physical")
    }
}

fn labels() -> Vec<SubsystemLabel> {
    vec![SubsystemLabel::qubit(PURIFIER), SubsystemLabel::qubit(SYSTEM), SubsystemLabel::qubit(RESERVOIR)]
}

/// `|psi(0)> |phi0>` over labels `(M, S, R)`.
pub fn build_initial(amp: &PurificationAmplitudes) -> Result<PureState> {
    PureState::from_terms(
        labels(),
        &[(&[1, 1, 0], amp.alpha), (&[0, 0, 0], amp.beta), (&[1, 0, 0], amp.gamma), (&[0, 1, 0], amp.delta)],
    )
}

pub fn evolve_tripartite(state: &PureState, p: f64) -> Result<PureState> {
    apply_damping(state, SYSTEM, RESERVOIR, DampingParameter::new(p)?)
}

/// Reduced state of the purifier; it never interacts, so this holds for every `p`.
pub fn rho_m_analytic(amp: &PurificationAmplitudes) -> QubitDensity {
    let PurificationAmplitudes { alpha, beta, gamma, delta } = *amp;
    let m00 = beta.norm_sqr() + delta.norm_sqr();
    let m11 = alpha.norm_sqr() + gamma.norm_sqr();
    let m01 = beta * gamma.conj() + alpha.conj() * delta;
    QubitDensity::new(m00, m11, m01).expect("reduction of a normalized state is physical")
}

/// `n` equally spaced points on `[0, 1]`.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

/// Purities of `M`, `S` and `R` at one sweep point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartyPurities {
    pub m: f64,
    pub s: f64,
    pub r: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub grid: Vec<f64>,
    pub reports: Vec<InvariantReport>,
    pub purities: Vec<PartyPurities>,
    pub max_residual: f64,
}

/// Reduced qubit matrices of `M`, `S`, `R` and their purities by partial trace.
pub fn reduced_parties(state: &PureState) -> Result<([QubitDensity; 3], PartyPurities)> {
    let mut out = [QubitDensity::diagonal(0.0)?; 3];
    let mut pur = [0.0; 3];
    for (i, name) in [PURIFIER, SYSTEM, RESERVOIR].into_iter().enumerate() {
        let rho = state.reduced_density(&[name])?;
        pur[i] = purity_and_schmidt(&rho)?.0;
        out[i] = QubitDensity::from_density(&rho)?;
    }
    Ok((out, PartyPurities { m: pur[0], s: pur[1], r: pur[2] }))
}

/// Evolves the purification across `grid` and checks the conservation law
/// at every point from numerically traced reduced states.
pub fn run_sweep(amp: &PurificationAmplitudes, grid: &[f64]) -> Result<SweepResult> {
    let rho0 = amp.system_density();
    let initial = build_initial(amp)?;
    let mut reports = Vec::with_capacity(grid.len());
    let mut purities = Vec::with_capacity(grid.len());
    for &p in grid {
        let state = evolve_tripartite(&initial, p)?;
        let ([m, s, r], pur) = reduced_parties(&state)?;
        reports.push(evaluate_invariant_reduced(&rho0, &m, p, &s, &r)?);
        purities.push(pur);
    }
    let max_residual = reports.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(SweepResult { grid: grid.to_vec(), reports, purities, max_residual })
}
