//! Amplitude damping of a system qubit into a two-level reservoir.
//!
//! The reservoir keeps only its `{phi0, phi1}` block: a single decay event
//! never populates anything above the first excited level.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::qstate::{DensityMatrix, PureState, C64};

/// Squared weight on the reservoir's excited level still accepted as "ground".
pub const RESERVOIR_GROUND_TOL: f64 = 1e-24;
const QUBIT_TOL: f64 = 1e-12;

/// One-qubit density matrix in the `{g, e}` basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitDensity {
    rho_gg: f64,
    rho_ee: f64,
    rho_ge: C64,
}

impl QubitDensity {
    pub fn new(rho_gg: f64, rho_ee: f64, rho_ge: C64) -> Result<Self> {
        let finite = rho_gg.is_finite() && rho_ee.is_finite() && rho_ge.re.is_finite() && rho_ge.im.is_finite();
        if !finite {
            return Err(Error::InvalidParameter("qubit density has non-finite entries".into()));
        }
        if (rho_gg + rho_ee - 1.0).abs() > QUBIT_TOL {
            return Err(Error::InvalidTrace(rho_gg + rho_ee));
        }
        if rho_gg < -QUBIT_TOL || rho_ee < -QUBIT_TOL {
            return Err(Error::NotPositive(rho_gg.min(rho_ee)));
        }
        if rho_ge.norm_sqr() > rho_gg * rho_ee + QUBIT_TOL {
            return Err(Error::NotPositive(rho_gg * rho_ee - rho_ge.norm_sqr()));
        }
        Ok(Self { rho_gg, rho_ee, rho_ge })
    }

    /// Fills `rho_gg = 1 - rho_ee`.
    pub fn from_excited(rho_ee: f64, rho_ge: C64) -> Result<Self> {
        Self::new(1.0 - rho_ee, rho_ee, rho_ge)
    }

    pub fn diagonal(rho_ee: f64) -> Result<Self> {
        Self::from_excited(rho_ee, C64::new(0.0, 0.0))
    }

    /// Reads a single-qubit [`DensityMatrix`]; index 0 is `g`, index 1 is `e`.
    pub fn from_density(rho: &DensityMatrix) -> Result<Self> {
        if rho.dim() != 2 {
            let l = &rho.labels()[0];
            return Err(Error::NotQubit { name: l.name().to_string(), dim: rho.dim() });
        }
        let m = rho.matrix();
        let herm = (m[(0, 1)] - m[(1, 0)].conj()).norm();
        if herm > QUBIT_TOL {
            return Err(Error::NotHermitian(herm));
        }
        Self::new(m[(0, 0)].re, m[(1, 1)].re, m[(0, 1)])
    }

    pub fn rho_gg(&self) -> f64 {
        self.rho_gg
    }

    pub fn rho_ee(&self) -> f64 {
        self.rho_ee
    }

    pub fn rho_ge(&self) -> C64 {
        self.rho_ge
    }

    pub fn rho_eg(&self) -> C64 {
        self.rho_ge.conj()
    }

    pub fn to_matrix(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(self.rho_gg, 0.0), self.rho_ge, self.rho_eg(), C64::new(self.rho_ee, 0.0)],
        )
    }

    pub fn purity(&self) -> f64 {
        self.rho_gg * self.rho_gg + self.rho_ee * self.rho_ee + 2.0 * self.rho_ge.norm_sqr()
    }

    /// `<n> = Tr[rho diag(0, 1)]`.
    pub fn excitation(&self) -> f64 {
        self.rho_ee
    }

    pub fn max_abs_diff(&self, other: &QubitDensity) -> f64 {
        (self.rho_gg - other.rho_gg)
            .abs()
            .max((self.rho_ee - other.rho_ee).abs())
            .max((self.rho_ge - other.rho_ge).norm())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct DampingParameter(f64);

impl DampingParameter {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("damping parameter {p} outside [0, 1]")));
        }
        Ok(Self(p))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Time dependence of the damping parameter.
#[derive(Clone, Debug, PartialEq)]
pub enum Schedule {
    /// Spontaneous emission: `p(t) = 1 - exp(-rate t)`.
    Exponential { rate: f64 },
    /// Resonant exchange with a cavity mode: `p(t) = sin^2(coupling t)`.
    Rabi { coupling: f64 },
    /// Tabulated values; `t` is an integer step index.
    Explicit(Vec<f64>),
}

impl Schedule {
    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidParameter(format!("decay rate must be positive, got {rate}")));
        }
        Ok(Self::Exponential { rate })
    }

    pub fn rabi(coupling: f64) -> Result<Self> {
        if !(coupling > 0.0 && coupling.is_finite()) {
            return Err(Error::InvalidParameter(format!("coupling must be positive, got {coupling}")));
        }
        Ok(Self::Rabi { coupling })
    }

    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        for &p in &values {
            DampingParameter::new(p)?;
        }
        Ok(Self::Explicit(values))
    }
}

pub fn schedule_to_p(schedule: &Schedule, t: f64) -> Result<DampingParameter> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::InvalidParameter(format!("time must be nonnegative, got {t}")));
    }
    let p = match schedule {
        Schedule::Exponential { rate } => -(-rate * t).exp_m1(),
        Schedule::Rabi { coupling } => (coupling * t).sin().powi(2),
        Schedule::Explicit(values) => {
            if t.fract() != 0.0 {
                return Err(Error::InvalidParameter(format!("explicit schedule needs an integer step, got {t}")));
            }
            *values.get(t as usize).ok_or_else(|| {
                Error::InvalidParameter(format!("step {t} beyond schedule of length {}", values.len()))
            })?
        }
    };
    DampingParameter::new(p.clamp(0.0, 1.0))
}

fn qubit_position(state: &PureState, name: &str) -> Result<(usize, usize)> {
    let pos =
        state.labels().iter().position(|l| l.name() == name).ok_or_else(|| Error::UnknownLabel(name.to_string()))?;
    let dim = state.labels()[pos].dim();
    if dim != 2 {
        return Err(Error::NotQubit { name: name.to_string(), dim });
    }
    let stride = state.labels()[pos + 1..].iter().map(|l| l.dim()).product();
    Ok((pos, stride))
}

/// Applies `|g,phi0> -> |g,phi0>`, `|e,phi0> -> sqrt(1-p)|e,phi0> + sqrt(p)|g,phi1>`
/// to the (system, reservoir) pair. The reservoir must already be a factor of
/// `state` and sit in `phi0`.
pub fn apply_damping(state: &PureState, system: &str, reservoir: &str, p: DampingParameter) -> Result<PureState> {
    let (ps, ss) = qubit_position(state, system)?;
    let (pr, sr) = qubit_position(state, reservoir)?;
    if ps == pr {
        return Err(Error::DuplicateLabel(system.to_string()));
    }
    let excited = state.level_weight(reservoir, 1)?;
    if excited > RESERVOIR_GROUND_TOL {
        return Err(Error::ReservoirNotGround { label: reservoir.to_string(), weight: excited });
    }
    let (keep, decay) = ((1.0 - p.0).sqrt(), p.0.sqrt());
    let mut out = vec![C64::new(0.0, 0.0); state.dim()];
    for (idx, &a) in state.amplitudes().iter().enumerate() {
        if (idx / sr) % 2 == 1 {
            continue;
        }
        if (idx / ss) % 2 == 1 {
            out[idx] = a * keep;
            out[idx - ss + sr] = a * decay;
        } else {
            out[idx] = a;
        }
    }
    Ok(PureState::from_parts_unchecked(state.labels().to_vec(), out))
}

/// Closed-form reduced matrices of system and (truncated) reservoir after damping.
pub fn evolved_reduced(rho0: &QubitDensity, p: DampingParameter) -> (QubitDensity, QubitDensity) {
    let p = p.0;
    let q = 1.0 - p;
    let system =
        QubitDensity { rho_gg: 1.0 - rho0.rho_ee * q, rho_ee: rho0.rho_ee * q, rho_ge: rho0.rho_ge * q.sqrt() };
    let reservoir =
        QubitDensity { rho_gg: 1.0 - rho0.rho_ee * p, rho_ee: rho0.rho_ee * p, rho_ge: rho0.rho_ge * p.sqrt() };
    (system, reservoir)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Excitations {
    pub system: f64,
    pub reservoir: f64,
    pub total: f64,
}

/// Mean excitation numbers `<n_S> = rho_ee (1-p)`, `<n_R> = rho_ee p` and their sum.
pub fn excitations(rho0: &QubitDensity, p: DampingParameter) -> Excitations {
    let system = rho0.rho_ee * (1.0 - p.0);
    let reservoir = rho0.rho_ee * p.0;
    Excitations { system, reservoir, total: system + reservoir }
}

/// `diag(0, 1)`: `(I - sigma_z)/2` on the system, `a^dag a` on the truncated reservoir.
pub fn number_operator() -> DMatrix<C64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]))
}

/// `Tr[rho op]` for a single-factor density matrix.
pub fn expectation(rho: &DensityMatrix, op: &DMatrix<C64>) -> Result<f64> {
    if op.nrows() != rho.dim() || op.ncols() != rho.dim() {
        return Err(Error::LengthMismatch { expected: rho.dim(), got: op.nrows() });
    }
    Ok((rho.matrix() * op).trace().re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{density_from_pure, partial_trace, tensor_product, SubsystemLabel};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn sr(s_digit: usize) -> PureState {
        PureState::basis(vec![SubsystemLabel::qubit("S"), SubsystemLabel::qubit("R")], &[s_digit, 0]).unwrap()
    }

    fn dp(p: f64) -> DampingParameter {
        DampingParameter::new(p).unwrap()
    }

    #[test]
    fn zero_damping_is_identity() {
        let s = PureState::from_terms(
            vec![SubsystemLabel::qubit("S"), SubsystemLabel::qubit("R")],
            &[(&[0, 0], c(0.6)), (&[1, 0], C64::new(0.0, 0.8))],
        )
        .unwrap();
        assert_eq!(apply_damping(&s, "S", "R", dp(0.0)).unwrap(), s);
    }

    #[test]
    fn full_damping_transfers_excitation() {
        let out = apply_damping(&sr(1), "S", "R", dp(1.0)).unwrap();
        assert_eq!(out.amplitude(&[0, 1]).unwrap(), c(1.0));
        assert_eq!(out.amplitude(&[1, 0]).unwrap(), c(0.0));
    }

    #[test]
    fn ground_is_fixed_point() {
        let out = apply_damping(&sr(0), "S", "R", dp(0.42)).unwrap();
        assert_eq!(out, sr(0));
    }

    #[test]
    fn rejects_excited_reservoir_and_missing_labels() {
        let s = PureState::basis(vec![SubsystemLabel::qubit("S"), SubsystemLabel::qubit("R")], &[1, 1]).unwrap();
        assert!(matches!(apply_damping(&s, "S", "R", dp(0.3)), Err(Error::ReservoirNotGround { .. })));
        assert_eq!(apply_damping(&sr(1), "S", "Q", dp(0.3)).unwrap_err(), Error::UnknownLabel("Q".into()));
        assert!(apply_damping(&sr(1), "S", "S", dp(0.3)).is_err());
    }

    #[test]
    fn rejects_non_qubit_factors() {
        let s =
            PureState::basis(vec![SubsystemLabel::qubit("S"), SubsystemLabel::new("R", 3).unwrap()], &[1, 0]).unwrap();
        assert!(matches!(apply_damping(&s, "S", "R", dp(0.3)), Err(Error::NotQubit { .. })));
    }

    #[test]
    fn photonic_form_coefficients() {
        let (alpha, beta) = (0.73f64.sqrt(), 0.27f64.sqrt());
        let labels = vec![SubsystemLabel::qubit("M"), SubsystemLabel::qubit("S"), SubsystemLabel::qubit("R")];
        let psi = PureState::from_terms(labels, &[(&[1, 1, 0], c(alpha)), (&[0, 0, 0], c(beta))]).unwrap();
        let p = 0.4;
        let out = apply_damping(&psi, "S", "R", dp(p)).unwrap();
        assert_eq!(out.amplitude(&[0, 0, 0]).unwrap(), c(beta));
        assert!((out.amplitude(&[1, 1, 0]).unwrap() - c(alpha * (1.0 - p).sqrt())).norm() < 1e-15);
        assert!((out.amplitude(&[1, 0, 1]).unwrap() - c(alpha * p.sqrt())).norm() < 1e-15);
        assert!((out.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn evolved_reduced_endpoints() {
        let rho0 = QubitDensity::from_excited(0.4, C64::new(0.2, -0.3)).unwrap();
        let (s, r) = evolved_reduced(&rho0, dp(0.0));
        assert_eq!(s, rho0);
        assert_eq!(r, QubitDensity::diagonal(0.0).unwrap());
        let (s, r) = evolved_reduced(&rho0, dp(1.0));
        assert_eq!(s, QubitDensity::diagonal(0.0).unwrap());
        assert!(r.max_abs_diff(&rho0) < 1e-16);
    }

    #[test]
    fn evolved_reduced_matches_brute_force_example() {
        // oracle: purify rho0 = diag(0.27, 0.73), damp, trace out
        let labels = vec![SubsystemLabel::qubit("M"), SubsystemLabel::qubit("S"), SubsystemLabel::qubit("R")];
        let psi =
            PureState::from_terms(labels, &[(&[1, 1, 0], c(0.73f64.sqrt())), (&[0, 0, 0], c(0.27f64.sqrt()))]).unwrap();
        let out = density_from_pure(&apply_damping(&psi, "S", "R", dp(0.4)).unwrap());
        let s = QubitDensity::from_density(&partial_trace(&out, &["S"]).unwrap()).unwrap();
        let r = QubitDensity::from_density(&partial_trace(&out, &["R"]).unwrap()).unwrap();
        let expect_s = QubitDensity::new(0.562, 0.438, c(0.0)).unwrap();
        let expect_r = QubitDensity::new(0.708, 0.292, c(0.0)).unwrap();
        assert!(s.max_abs_diff(&expect_s) < 1e-12);
        assert!(r.max_abs_diff(&expect_r) < 1e-12);
        let (as_, ar) = evolved_reduced(&QubitDensity::diagonal(0.73).unwrap(), dp(0.4));
        assert!(as_.max_abs_diff(&expect_s) < 1e-12);
        assert!(ar.max_abs_diff(&expect_r) < 1e-12);
    }

    #[test]
    fn excitation_examples() {
        // brute-force: Tr[n rho] on the damped purification
        let labels = vec![SubsystemLabel::qubit("M"), SubsystemLabel::qubit("S"), SubsystemLabel::qubit("R")];
        let psi =
            PureState::from_terms(labels, &[(&[1, 1, 0], c(0.73f64.sqrt())), (&[0, 0, 0], c(0.27f64.sqrt()))]).unwrap();
        let out = apply_damping(&psi, "S", "R", dp(0.5)).unwrap();
        let n = number_operator();
        let ns = expectation(&out.reduced_density(&["S"]).unwrap(), &n).unwrap();
        let nr = expectation(&out.reduced_density(&["R"]).unwrap(), &n).unwrap();
        assert!((ns - 0.365).abs() < 1e-12 && (nr - 0.365).abs() < 1e-12);

        let e = excitations(&QubitDensity::diagonal(0.73).unwrap(), dp(0.5));
        assert!((e.system - 0.365).abs() < 1e-15);
        assert!((e.reservoir - 0.365).abs() < 1e-15);
        assert!((e.total - 0.73).abs() < 1e-15);

        let e = excitations(&QubitDensity::diagonal(0.3).unwrap(), dp(0.0));
        assert_eq!((e.system, e.reservoir, e.total), (0.3, 0.0, 0.3));
        for p in [0.0, 0.3, 1.0] {
            let e = excitations(&QubitDensity::diagonal(0.0).unwrap(), dp(p));
            assert_eq!((e.system, e.reservoir, e.total), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn schedules() {
        let exp = Schedule::exponential(2.0).unwrap();
        assert_eq!(schedule_to_p(&exp, 0.0).unwrap().value(), 0.0);
        let t = std::f64::consts::LN_2 / 2.0;
        assert!((schedule_to_p(&exp, t).unwrap().value() - 0.5).abs() < 1e-15);
        let rabi = Schedule::rabi(1.0).unwrap();
        assert!((schedule_to_p(&rabi, std::f64::consts::FRAC_PI_2).unwrap().value() - 1.0).abs() < 1e-15);
        let tab = Schedule::explicit(vec![0.0, 0.25, 1.0]).unwrap();
        assert_eq!(schedule_to_p(&tab, 1.0).unwrap().value(), 0.25);
        assert!(schedule_to_p(&tab, 3.0).is_err());
        assert!(schedule_to_p(&tab, 0.5).is_err());
        assert!(schedule_to_p(&exp, -1.0).is_err());
        assert!(Schedule::explicit(vec![1.5]).is_err());
        assert!(Schedule::exponential(0.0).is_err());
        assert!(Schedule::rabi(-1.0).is_err());
    }

    #[test]
    fn sequential_damping_composes() {
        let rho_s_after = |p1: f64, p2: f64| {
            let labels = vec![SubsystemLabel::qubit("M"), SubsystemLabel::qubit("S"), SubsystemLabel::qubit("R1")];
            let psi = PureState::from_terms(
                labels,
                &[
                    (&[1, 1, 0], C64::new(0.5, 0.1)),
                    (&[0, 0, 0], c(0.6)),
                    (&[1, 0, 0], C64::new(0.0, 0.4)),
                    (&[0, 1, 0], c(0.22f64.sqrt())),
                ],
            )
            .unwrap();
            let once = apply_damping(&psi, "S", "R1", dp(p1)).unwrap();
            let fresh = PureState::basis(vec![SubsystemLabel::qubit("R2")], &[0]).unwrap();
            let twice = apply_damping(&tensor_product(&once, &fresh).unwrap(), "S", "R2", dp(p2)).unwrap();
            let single = apply_damping(&psi, "S", "R1", dp(1.0 - (1.0 - p1) * (1.0 - p2))).unwrap();
            (twice.reduced_density(&["S"]).unwrap(), single.reduced_density(&["S"]).unwrap())
        };
        for (p1, p2) in [(0.1, 0.2), (0.5, 0.5), (0.9, 0.3), (0.0, 1.0)] {
            let (a, b) = rho_s_after(p1, p2);
            assert!(a.max_abs_diff(&b) < 1e-12, "p1={p1} p2={p2}");
        }
    }

    #[test]
    fn qubit_density_validation() {
        assert!(QubitDensity::new(0.5, 0.6, c(0.0)).is_err());
        assert!(QubitDensity::new(0.5, 0.5, c(0.6)).is_err());
        assert!(QubitDensity::new(0.5, 0.5, c(0.5)).is_ok());
        assert!(DampingParameter::new(1.01).is_err());
        assert!(DampingParameter::new(f64::NAN).is_err());
    }
}
