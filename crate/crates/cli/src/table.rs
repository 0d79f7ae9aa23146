//! CSV rows. Floats use `{:.16e}`, i.e. 17 significant digits, which
//! re-parse to the identical `f64`.

use std::fmt::Write as _;

use entinv::experiment::ExperimentPoint;
use entinv::ghz::{GhzConfig, GhzReport};
use entinv::invariants::InvariantReport;

pub const INVARIANT_HEADER: &str =
    "p,theta,rho_ee,lambda,regime,W_S,W_R,W_M,I_lhs,I_rhs,residual,stderr_WS,stderr_WR,stderr_WM";

pub const GHZ_HEADER: &str = "n,alpha2,p,rho_ee,W_M,mean_W_pair,I_lhs,I_rhs,residual,applicable";

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn invariant_cells(theta: f64, r: &InvariantReport) -> String {
    [
        num(r.p),
        num(theta),
        num(r.rho_ee),
        num(r.lambda.value()),
        r.regime.tag.as_str().to_string(),
        num(r.w_s),
        num(r.w_r),
        num(r.w_m),
        num(r.lhs),
        num(r.rhs),
        num(r.residual),
    ]
    .join(",")
}

/// Analytic sweep row; `theta = asin(sqrt(p))` and empty error columns.
pub fn sweep_row(r: &InvariantReport) -> String {
    format!("{},,,", invariant_cells(r.p.sqrt().asin(), r))
}

pub fn experiment_row(pt: &ExperimentPoint) -> String {
    let e = &pt.estimate;
    format!(
        "{},{},{},{}",
        invariant_cells(pt.theta, &e.report),
        num(e.stderr_w_s),
        num(e.stderr_w_r),
        num(e.stderr_w_m)
    )
}

pub fn ghz_row(cfg: &GhzConfig, rep: &GhzReport) -> String {
    let ps = cfg.p_list().iter().map(|&p| num(p)).collect::<Vec<_>>().join(";");
    let mean_pair = rep.pairs.iter().map(|(s, r)| s + r).sum::<f64>() / rep.pairs.len() as f64;
    let mut out = String::new();
    write!(
        out,
        "{},{},{ps},{},{},{},{},{},{},{}",
        cfg.n(),
        num(cfg.excitation()),
        num(rep.rho_ee),
        num(rep.w_m),
        num(mean_pair),
        num(rep.lhs),
        num(rep.rhs),
        num(rep.residual),
        rep.applicable
    )
    .unwrap();
    out
}
