//! Purity/excitation relations and the conserved combinations of the
//! bipartite `W` functions.
//!
//! For a qubit with initial excitation `rho_ee` and coherence parameter
//! `lambda = 1 - |rho_ge|^2 / rho_ee`, every party `i` of the damped
//! purification satisfies `purity_i = 2 n_i^2 - 2 n_i lambda + 1`, so
//! `W_i = sqrt(lambda^2 - 2(1 - purity_i)) / 2 = |n_i - lambda/2|`.
//! Which signed combination of `W_S`, `W_R` stays constant depends on where
//! `n_S`, `n_R` sit relative to `lambda/2`; see [`regime_select`].

use std::fmt;
use std::str::FromStr;

use crate::channel::QubitDensity;
use crate::error::{Error, Result};

/// Discriminants in `[-DISCRIMINANT_TOL, 0)` are treated as rounding and clamped.
pub const DISCRIMINANT_TOL: f64 = 1e-9;
/// Below this excited population lambda is set to 1.
pub const EXCITED_FLOOR: f64 = 1e-12;
/// `rho_ee <= lambda/2 + REGIME_TOL` selects the always-sum regime.
pub const REGIME_TOL: f64 = 1e-12;
const PURITY_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaParam {
    value: f64,
    /// `1 - value`, kept separately so `lambda^2 - 1` is formed without cancellation.
    deficit: f64,
}

impl LambdaParam {
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || value > 1.0 + PURITY_SLACK {
            return Err(Error::InvalidParameter(format!("lambda must be finite and at most 1, got {value}")));
        }
        Ok(Self { value, deficit: 1.0 - value })
    }

    pub fn unit() -> Self {
        Self { value: 1.0, deficit: 0.0 }
    }

    pub fn value(self) -> f64 {
        self.value
    }

    pub fn deficit(self) -> f64 {
        self.deficit
    }

    fn half(self) -> f64 {
        0.5 * self.value
    }

    /// `lambda^2 - 1`.
    fn square_minus_one(self) -> f64 {
        -self.deficit * (2.0 - self.deficit)
    }
}

pub fn lambda_of(rho0: &QubitDensity) -> LambdaParam {
    if rho0.rho_ee() < EXCITED_FLOOR {
        return LambdaParam::unit();
    }
    let deficit = rho0.rho_ge().norm_sqr() / rho0.rho_ee();
    LambdaParam { value: 1.0 - deficit, deficit }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Upper,
    Lower,
}

pub fn purity_from_excitation(n: f64, lambda: LambdaParam) -> f64 {
    1.0 - 2.0 * n * (lambda.value - n)
}

fn clamp_discriminant(d: f64) -> Result<f64> {
    if d.is_nan() || d < -DISCRIMINANT_TOL {
        return Err(Error::NegativeDiscriminant(d));
    }
    Ok(d.max(0.0))
}

/// `lambda^2 - 2(1 - purity)`, clamped at zero within tolerance.
pub fn discriminant(purity: f64, lambda: LambdaParam) -> Result<f64> {
    clamp_discriminant(lambda.square_minus_one() + (2.0 * purity - 1.0))
}

pub fn excitation_from_purity(purity: f64, lambda: LambdaParam, branch: Branch) -> Result<f64> {
    let half_root = 0.5 * discriminant(purity, lambda)?.sqrt();
    Ok(match branch {
        Branch::Upper => lambda.half() + half_root,
        // product of the two roots is (1 - purity)/2
        Branch::Lower => 0.5 * (1.0 - purity) / (lambda.half() + half_root),
    })
}

pub fn w_value(purity: f64, lambda: LambdaParam) -> Result<f64> {
    Ok(0.5 * discriminant(purity, lambda)?.sqrt())
}

/// `W` straight from a reduced qubit matrix.
///
/// Uses `1 - 2(1 - purity) = (rho_gg - rho_ee)^2 + 4|rho_ge|^2` for unit
/// trace, which stays accurate where `W` is close to zero; going through the
/// purity scalar loses about eight digits there.
pub fn w_of_qubit(rho: &QubitDensity, lambda: LambdaParam) -> Result<f64> {
    let split = rho.rho_gg() - rho.rho_ee();
    let d = split * split + 4.0 * rho.rho_ge().norm_sqr() + lambda.square_minus_one();
    Ok(0.5 * clamp_discriminant(d)?.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RegimeTag {
    /// `rho_ee <= lambda/2`: `W_S + W_R` for every `p`.
    SumAlways,
    /// `p < p_low`: `W_R - W_S`.
    RMinusS,
    /// `p_low <= p <= p_high`: `W_S + W_R`.
    SumMid,
    /// `p > p_high`: `W_S - W_R`.
    SMinusR,
}

impl RegimeTag {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::SumAlways => "SumAlways",
            Self::RMinusS => "RMinusS",
            Self::SumMid => "SumMid",
            Self::SMinusR => "SMinusR",
        }
    }

    /// The signed combination of `W_S`, `W_R` conserved in this regime.
    pub fn combine(self, w_s: f64, w_r: f64) -> f64 {
        match self {
            Self::SumAlways | Self::SumMid => w_s + w_r,
            Self::RMinusS => w_r - w_s,
            Self::SMinusR => w_s - w_r,
        }
    }
}

impl fmt::Display for RegimeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RegimeTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "SumAlways" => Ok(Self::SumAlways),
            "RMinusS" => Ok(Self::RMinusS),
            "SumMid" => Ok(Self::SumMid),
            "SMinusR" => Ok(Self::SMinusR),
            other => Err(Error::InvalidParameter(format!("unknown regime `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Regime {
    pub tag: RegimeTag,
    /// `(1 - lambda/(2 rho_ee), lambda/(2 rho_ee))` when `rho_ee > lambda/2`.
    pub boundaries: Option<(f64, f64)>,
}

/// `true` when the excitation sits at or below `lambda/2`.
pub fn is_low_excitation(rho_ee: f64, lambda: LambdaParam) -> bool {
    rho_ee <= lambda.half() + REGIME_TOL
}

pub fn regime_select(rho_ee: f64, lambda: LambdaParam, p: f64) -> Regime {
    if is_low_excitation(rho_ee, lambda) {
        return Regime { tag: RegimeTag::SumAlways, boundaries: None };
    }
    let p_high = lambda.value / (2.0 * rho_ee);
    let p_low = 1.0 - p_high;
    let tag = if p < p_low {
        RegimeTag::RMinusS
    } else if p > p_high {
        RegimeTag::SMinusR
    } else {
        RegimeTag::SumMid
    };
    Regime { tag, boundaries: Some((p_low, p_high)) }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedFormW {
    pub w_s: f64,
    pub w_r: f64,
    pub w_m: f64,
}

/// `W` functions for a diagonal initial system state (`lambda = 1`).
pub fn closed_form_w(rho_ee: f64, p: f64) -> ClosedFormW {
    ClosedFormW { w_s: (rho_ee * (1.0 - p) - 0.5).abs(), w_r: (rho_ee * p - 0.5).abs(), w_m: (rho_ee - 0.5).abs() }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantReport {
    pub lambda: LambdaParam,
    pub rho_ee: f64,
    pub p: f64,
    pub regime: Regime,
    pub w_m: f64,
    pub w_s: f64,
    pub w_r: f64,
    /// `lambda/2 + W_M` in the low-excitation case, `lambda/2 - W_M` otherwise.
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// Forms both sides of the conservation law from already computed `W` values.
pub fn combine_invariant(rho_ee: f64, lambda: LambdaParam, p: f64, w_m: f64, w_s: f64, w_r: f64) -> InvariantReport {
    let regime = regime_select(rho_ee, lambda, p);
    let lhs = if is_low_excitation(rho_ee, lambda) { lambda.half() + w_m } else { lambda.half() - w_m };
    let rhs = regime.tag.combine(w_s, w_r);
    InvariantReport { lambda, rho_ee, p, regime, w_m, w_s, w_r, lhs, rhs, residual: (lhs - rhs).abs() }
}

fn check_qubit_purity(purity: f64) -> Result<()> {
    if !(0.5 - PURITY_SLACK..=1.0 + PURITY_SLACK).contains(&purity) {
        return Err(Error::PurityOutOfRange { purity, min: 0.5 });
    }
    Ok(())
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("damping parameter {p} outside [0, 1]")));
    }
    Ok(())
}

/// Conservation check from the three single-party purities.
pub fn evaluate_invariant(
    rho0: &QubitDensity,
    purity_m: f64,
    p: f64,
    purity_s: f64,
    purity_r: f64,
) -> Result<InvariantReport> {
    check_p(p)?;
    for purity in [purity_m, purity_s, purity_r] {
        check_qubit_purity(purity)?;
    }
    let lambda = lambda_of(rho0);
    let w_m = w_value(purity_m, lambda)?;
    let w_s = w_value(purity_s, lambda)?;
    let w_r = w_value(purity_r, lambda)?;
    Ok(combine_invariant(rho0.rho_ee(), lambda, p, w_m, w_s, w_r))
}

/// Same check, taking the reduced matrices so `W` is formed by [`w_of_qubit`].
pub fn evaluate_invariant_reduced(
    rho0: &QubitDensity,
    rho_m: &QubitDensity,
    p: f64,
    rho_s: &QubitDensity,
    rho_r: &QubitDensity,
) -> Result<InvariantReport> {
    check_p(p)?;
    let lambda = lambda_of(rho0);
    let w_m = w_of_qubit(rho_m, lambda)?;
    let w_s = w_of_qubit(rho_s, lambda)?;
    let w_r = w_of_qubit(rho_r, lambda)?;
    Ok(combine_invariant(rho0.rho_ee(), lambda, p, w_m, w_s, w_r))
}
