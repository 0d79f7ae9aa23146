//! Dense state vectors and density matrices over labeled subsystems.
//!
//! Amplitudes are stored row-major over the label list: the first label is
//! the most significant digit of the flat index. Every contraction is done by
//! label name so callers never have to reason about positions.

use std::collections::HashSet;
use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Deviation of the norm from 1 that is silently absorbed on construction.
pub const NORM_TOL: f64 = 1e-9;
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const POSITIVITY_TOL: f64 = 1e-9;
/// Slack on the purity range [1/D, 1].
pub const PURITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SubsystemLabel {
    name: String,
    dim: usize,
}

impl SubsystemLabel {
    pub fn new(name: impl Into<String>, dim: usize) -> Result<Self> {
        let name = name.into();
        if dim < 2 {
            return Err(Error::InvalidDimension { name, dim });
        }
        Ok(Self { name, dim })
    }

    pub fn qubit(name: impl Into<String>) -> Self {
        Self { name: name.into(), dim: 2 }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

impl fmt::Display for SubsystemLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.name, self.dim)
    }
}

fn check_labels(labels: &[SubsystemLabel]) -> Result<usize> {
    let mut seen = HashSet::new();
    let mut total = 1usize;
    for l in labels {
        if l.dim < 2 {
            return Err(Error::InvalidDimension { name: l.name.clone(), dim: l.dim });
        }
        if !seen.insert(l.name.as_str()) {
            return Err(Error::DuplicateLabel(l.name.clone()));
        }
        total =
            total.checked_mul(l.dim).ok_or_else(|| Error::InvalidParameter("composite dimension overflows".into()))?;
    }
    Ok(total)
}

fn position(labels: &[SubsystemLabel], name: &str) -> Result<usize> {
    labels.iter().position(|l| l.name == name).ok_or_else(|| Error::UnknownLabel(name.to_string()))
}

fn total_dim(labels: &[SubsystemLabel]) -> usize {
    labels.iter().map(|l| l.dim).product()
}

/// Stride of each label in the flat row-major index.
fn strides(labels: &[SubsystemLabel]) -> Vec<usize> {
    let mut s = vec![1usize; labels.len()];
    for i in (0..labels.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * labels[i + 1].dim;
    }
    s
}

/// Resolves `keep` to sorted positions and returns the kept and traced labels.
fn split_labels(
    labels: &[SubsystemLabel],
    keep: &[&str],
) -> Result<(Vec<usize>, Vec<SubsystemLabel>, Vec<SubsystemLabel>)> {
    let mut pos = Vec::with_capacity(keep.len());
    for name in keep {
        let p = position(labels, name)?;
        if pos.contains(&p) {
            return Err(Error::DuplicateLabel(name.to_string()));
        }
        pos.push(p);
    }
    if pos.is_empty() {
        return Err(Error::InvalidParameter("partial trace must keep at least one label".into()));
    }
    pos.sort_unstable();
    let kept = pos.iter().map(|&p| labels[p].clone()).collect();
    let traced = labels.iter().enumerate().filter(|(i, _)| !pos.contains(i)).map(|(_, l)| l.clone()).collect();
    Ok((pos, kept, traced))
}

/// For every flat index of the composite, its flat index in the kept factor
/// and in the traced factor.
fn kept_traced_indices(labels: &[SubsystemLabel], keep_pos: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let n = total_dim(labels);
    let mut kidx = vec![0usize; n];
    let mut tidx = vec![0usize; n];
    let mut digits = vec![0usize; labels.len()];
    for flat in 0..n {
        let (mut k, mut t) = (0usize, 0usize);
        for (i, l) in labels.iter().enumerate() {
            if keep_pos.contains(&i) {
                k = k * l.dim + digits[i];
            } else {
                t = t * l.dim + digits[i];
            }
        }
        kidx[flat] = k;
        tidx[flat] = t;
        for i in (0..labels.len()).rev() {
            digits[i] += 1;
            if digits[i] < labels[i].dim {
                break;
            }
            digits[i] = 0;
        }
    }
    (kidx, tidx)
}

/// A normalized pure state on an ordered list of subsystems.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    labels: Vec<SubsystemLabel>,
    amplitudes: Vec<C64>,
}

impl PureState {
    /// Builds a state, renormalizing if the norm is within [`NORM_TOL`] of 1.
    pub fn new(labels: Vec<SubsystemLabel>, amplitudes: Vec<C64>) -> Result<Self> {
        let expected = check_labels(&labels)?;
        if amplitudes.len() != expected {
            return Err(Error::LengthMismatch { expected, got: amplitudes.len() });
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        let amplitudes = if norm != 1.0 { amplitudes.into_iter().map(|a| a / norm).collect() } else { amplitudes };
        Ok(Self { labels, amplitudes })
    }

    /// Computational basis state with one digit per label.
    pub fn basis(labels: Vec<SubsystemLabel>, digits: &[usize]) -> Result<Self> {
        let n = check_labels(&labels)?;
        if digits.len() != labels.len() {
            return Err(Error::LengthMismatch { expected: labels.len(), got: digits.len() });
        }
        let mut amps = vec![C64::new(0.0, 0.0); n];
        amps[flat_index(&labels, digits)?] = C64::new(1.0, 0.0);
        Ok(Self { labels, amplitudes: amps })
    }

    /// Superposition of basis states given as (digits, amplitude) terms.
    pub fn from_terms(labels: Vec<SubsystemLabel>, terms: &[(&[usize], C64)]) -> Result<Self> {
        let n = check_labels(&labels)?;
        let mut amps = vec![C64::new(0.0, 0.0); n];
        for (digits, a) in terms {
            if digits.len() != labels.len() {
                return Err(Error::LengthMismatch { expected: labels.len(), got: digits.len() });
            }
            amps[flat_index(&labels, digits)?] += *a;
        }
        Self::new(labels, amps)
    }

    pub(crate) fn from_parts_unchecked(labels: Vec<SubsystemLabel>, amplitudes: Vec<C64>) -> Self {
        debug_assert_eq!(total_dim(&labels), amplitudes.len());
        Self { labels, amplitudes }
    }

    pub fn labels(&self) -> &[SubsystemLabel] {
        &self.labels
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn label(&self, name: &str) -> Result<&SubsystemLabel> {
        Ok(&self.labels[position(&self.labels, name)?])
    }

    pub fn amplitude(&self, digits: &[usize]) -> Result<C64> {
        Ok(self.amplitudes[flat_index(&self.labels, digits)?])
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Total probability weight on basis states where `name` has digit `level`.
    pub fn level_weight(&self, name: &str, level: usize) -> Result<f64> {
        let pos = position(&self.labels, name)?;
        let stride = strides(&self.labels)[pos];
        let dim = self.labels[pos].dim;
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| (i / stride) % dim == level)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Reduced density matrix on `keep`, contracted directly from the
    /// amplitudes without forming the full projector.
    pub fn reduced_density(&self, keep: &[&str]) -> Result<DensityMatrix> {
        let (pos, kept, _) = split_labels(&self.labels, keep)?;
        let dk = total_dim(&kept);
        let dt = self.dim() / dk;
        let (kidx, tidx) = kept_traced_indices(&self.labels, &pos);
        let mut psi = DMatrix::<C64>::zeros(dk, dt);
        for (flat, a) in self.amplitudes.iter().enumerate() {
            psi[(kidx[flat], tidx[flat])] = *a;
        }
        let matrix = &psi * psi.adjoint();
        Ok(DensityMatrix::from_parts_unchecked(kept, matrix))
    }

    /// Applies a unitary on two distinct subsystems. `gate` is indexed by the
    /// joint digit `da * dim_b + db` of the (a, b) pair.
    pub fn apply_two_site(&self, a: &str, b: &str, gate: &DMatrix<C64>) -> Result<PureState> {
        let (pa, pb) = (position(&self.labels, a)?, position(&self.labels, b)?);
        if pa == pb {
            return Err(Error::DuplicateLabel(a.to_string()));
        }
        let (da, db) = (self.labels[pa].dim, self.labels[pb].dim);
        if gate.nrows() != da * db || gate.ncols() != da * db {
            return Err(Error::LengthMismatch { expected: da * db, got: gate.nrows() });
        }
        let st = strides(&self.labels);
        let (sa, sb) = (st[pa], st[pb]);
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        for base in 0..self.dim() {
            if (base / sa) % da != 0 || (base / sb) % db != 0 {
                continue;
            }
            for row in 0..da * db {
                let target = base + (row / db) * sa + (row % db) * sb;
                let mut acc = C64::new(0.0, 0.0);
                for col in 0..da * db {
                    let src = base + (col / db) * sa + (col % db) * sb;
                    acc += gate[(row, col)] * self.amplitudes[src];
                }
                out[target] = acc;
            }
        }
        Ok(Self::from_parts_unchecked(self.labels.clone(), out))
    }

    /// Largest amplitude-wise distance to another state on the same labels.
    pub fn max_abs_diff(&self, other: &PureState) -> Result<f64> {
        if self.labels != other.labels {
            return Err(Error::InvalidParameter("states have different label layouts".into()));
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
    }
}

fn flat_index(labels: &[SubsystemLabel], digits: &[usize]) -> Result<usize> {
    let mut idx = 0usize;
    for (l, &d) in labels.iter().zip(digits) {
        if d >= l.dim {
            return Err(Error::InvalidParameter(format!("digit {d} out of range for subsystem {l}")));
        }
        idx = idx * l.dim + d;
    }
    Ok(idx)
}

/// Kronecker product with `a` as the more significant factor.
pub fn tensor_product(a: &PureState, b: &PureState) -> Result<PureState> {
    for l in &b.labels {
        if a.labels.iter().any(|m| m.name == l.name) {
            return Err(Error::DuplicateLabel(l.name.clone()));
        }
    }
    let labels: Vec<_> = a.labels.iter().chain(&b.labels).cloned().collect();
    let mut amps = Vec::with_capacity(a.dim() * b.dim());
    for x in &a.amplitudes {
        amps.extend(b.amplitudes.iter().map(|y| x * y));
    }
    Ok(PureState::from_parts_unchecked(labels, amps))
}

/// Kronecker product of two density matrices, `a` as the more significant factor.
pub fn tensor_density(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    for l in &b.labels {
        if a.labels.iter().any(|m| m.name == l.name) {
            return Err(Error::DuplicateLabel(l.name.clone()));
        }
    }
    let labels = a.labels.iter().chain(&b.labels).cloned().collect();
    Ok(DensityMatrix::from_parts_unchecked(labels, a.matrix.kronecker(&b.matrix)))
}

/// Hermitian, unit-trace, positive semidefinite matrix on labeled subsystems.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    labels: Vec<SubsystemLabel>,
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(labels: Vec<SubsystemLabel>, matrix: DMatrix<C64>) -> Result<Self> {
        let n = check_labels(&labels)?;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::LengthMismatch { expected: n, got: matrix.nrows() });
        }
        let rho = Self { labels, matrix };
        rho.check_physical()?;
        Ok(rho)
    }

    pub(crate) fn from_parts_unchecked(labels: Vec<SubsystemLabel>, matrix: DMatrix<C64>) -> Self {
        Self { labels, matrix }
    }

    pub fn labels(&self) -> &[SubsystemLabel] {
        &self.labels
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitized matrix `(rho + rho^dag) / 2`.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        SymmetricEigen::new(h).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn check_physical(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidTrace(tr.re));
        }
        let min = self.min_eigenvalue();
        if min < -POSITIVITY_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(())
    }

    /// Conjugates by a unitary acting on two subsystems, `U rho U^dag`.
    pub fn conjugate_two_site(&self, a: &str, b: &str, gate: &DMatrix<C64>) -> Result<DensityMatrix> {
        let full = embed_two_site(&self.labels, a, b, gate)?;
        let matrix = &full * &self.matrix * full.adjoint();
        Ok(Self::from_parts_unchecked(self.labels.clone(), matrix))
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        (&self.matrix - &other.matrix).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Lifts a two-site gate to the full composite space.
fn embed_two_site(labels: &[SubsystemLabel], a: &str, b: &str, gate: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let n = total_dim(labels);
    let (pa, pb) = (position(labels, a)?, position(labels, b)?);
    if pa == pb {
        return Err(Error::DuplicateLabel(a.to_string()));
    }
    let (da, db) = (labels[pa].dim, labels[pb].dim);
    if gate.nrows() != da * db || gate.ncols() != da * db {
        return Err(Error::LengthMismatch { expected: da * db, got: gate.nrows() });
    }
    let st = strides(labels);
    let (sa, sb) = (st[pa], st[pb]);
    let mut full = DMatrix::<C64>::zeros(n, n);
    for base in 0..n {
        if (base / sa) % da != 0 || (base / sb) % db != 0 {
            continue;
        }
        for row in 0..da * db {
            for col in 0..da * db {
                let r = base + (row / db) * sa + (row % db) * sb;
                let c = base + (col / db) * sa + (col % db) * sb;
                full[(r, c)] = gate[(row, col)];
            }
        }
    }
    Ok(full)
}

/// Projector `|psi><psi|`.
pub fn density_from_pure(psi: &PureState) -> DensityMatrix {
    let v = DMatrix::from_column_slice(psi.dim(), 1, psi.amplitudes());
    DensityMatrix::from_parts_unchecked(psi.labels.clone(), &v * v.adjoint())
}

/// Traces out every label not named in `keep`. Kept labels retain their
/// original relative order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[&str]) -> Result<DensityMatrix> {
    let (pos, kept, _) = split_labels(&rho.labels, keep)?;
    if pos.len() == rho.labels.len() {
        return Ok(rho.clone());
    }
    let dk = total_dim(&kept);
    let dt = rho.dim() / dk;
    let (kidx, tidx) = kept_traced_indices(&rho.labels, &pos);
    // flat index of (k, t) in the composite
    let mut flat_of = vec![0usize; dk * dt];
    for flat in 0..rho.dim() {
        flat_of[kidx[flat] * dt + tidx[flat]] = flat;
    }
    let mut out = DMatrix::<C64>::zeros(dk, dk);
    for i in 0..dk {
        for j in 0..dk {
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..dt {
                acc += rho.matrix[(flat_of[i * dt + t], flat_of[j * dt + t])];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(DensityMatrix::from_parts_unchecked(kept, out))
}

/// Purity `Tr(rho^2)` and Schmidt weight `K = 1 / purity`.
pub fn purity_and_schmidt(rho: &DensityMatrix) -> Result<(f64, f64)> {
    let m = &rho.matrix;
    let n = rho.dim();
    // Tr(rho^2) = sum_ij rho_ij rho_ji
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += m[(i, j)] * m[(j, i)];
        }
    }
    debug_assert!(acc.im.abs() < 1e-12, "purity has imaginary part {}", acc.im);
    let purity = acc.re;
    let min = 1.0 / n as f64;
    if !(min - PURITY_TOL..=1.0 + PURITY_TOL).contains(&purity) {
        return Err(Error::PurityOutOfRange { purity, min });
    }
    Ok((purity, 1.0 / purity))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn q(name: &str) -> SubsystemLabel {
        SubsystemLabel::qubit(name)
    }

    #[test]
    fn label_rejects_dim_one() {
        assert!(matches!(SubsystemLabel::new("x", 1), Err(Error::InvalidDimension { .. })));
    }

    #[test]
    fn tensor_of_basis_states() {
        let g = PureState::basis(vec![q("S")], &[0]).unwrap();
        let phi0 = PureState::basis(vec![SubsystemLabel::new("R", 3).unwrap()], &[0]).unwrap();
        let prod = tensor_product(&g, &phi0).unwrap();
        assert_eq!(prod.dim(), 6);
        assert_eq!(prod.amplitudes()[0], c(1.0));
        assert!(prod.amplitudes()[1..].iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn tensor_is_linear_in_first_factor() {
        let (a, b) = (C64::new(0.6, 0.0), C64::new(0.0, 0.8));
        // |e> first in the term list is digit 1
        let s = PureState::from_terms(vec![q("S")], &[(&[1], a), (&[0], b)]).unwrap();
        let r = PureState::basis(vec![q("R")], &[0]).unwrap();
        let prod = tensor_product(&s, &r).unwrap();
        assert_eq!(prod.amplitude(&[1, 0]).unwrap(), a);
        assert_eq!(prod.amplitude(&[0, 0]).unwrap(), b);
        assert_eq!(prod.level_weight("R", 1).unwrap(), 0.0);
    }

    #[test]
    fn experiment_initial_state_from_products() {
        let (alpha, beta) = (0.73f64.sqrt(), 0.27f64.sqrt());
        let ms = PureState::from_terms(vec![q("M"), q("S")], &[(&[1, 1], c(alpha)), (&[0, 0], c(beta))]).unwrap();
        let r = PureState::basis(vec![q("R")], &[0]).unwrap();
        let psi = tensor_product(&ms, &r).unwrap();
        let names: Vec<_> = psi.labels().iter().map(|l| l.name()).collect();
        assert_eq!(names, ["M", "S", "R"]);
        assert_eq!(psi.amplitude(&[1, 1, 0]).unwrap(), c(alpha));
        assert_eq!(psi.amplitude(&[0, 0, 0]).unwrap(), c(beta));
    }

    #[test]
    fn tensor_rejects_colliding_names() {
        let a = PureState::basis(vec![q("S")], &[0]).unwrap();
        let err = tensor_product(&a, &a).unwrap_err();
        assert_eq!(err, Error::DuplicateLabel("S".into()));
    }

    #[test]
    fn renormalizes_small_deviation_rejects_large() {
        let s = PureState::new(vec![q("S")], vec![c(1.0 + 5e-10), c(0.0)]).unwrap();
        assert_eq!(s.norm(), 1.0);
        assert!(matches!(PureState::new(vec![q("S")], vec![c(1.0 + 1e-6), c(0.0)]), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn bell_reduces_to_maximally_mixed() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = PureState::from_terms(vec![q("A"), q("B")], &[(&[0, 0], c(h)), (&[1, 1], c(h))]).unwrap();
        let rho = partial_trace(&density_from_pure(&bell), &["A"]).unwrap();
        assert!((rho.matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((rho.matrix()[(1, 1)].re - 0.5).abs() < 1e-15);
        assert!(rho.matrix()[(0, 1)].norm() < 1e-15);
        let (pur, k) = purity_and_schmidt(&rho).unwrap();
        assert!((pur - 0.5).abs() < 1e-15);
        assert!((k - 2.0).abs() < 1e-14);
    }

    #[test]
    fn keep_all_is_identity() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = PureState::from_terms(vec![q("A"), q("B")], &[(&[0, 1], c(h)), (&[1, 0], C64::new(0.0, h))]).unwrap();
        let rho = density_from_pure(&s);
        assert_eq!(partial_trace(&rho, &["B", "A"]).unwrap(), rho);
    }

    #[test]
    fn unknown_label_is_rejected() {
        let s = PureState::basis(vec![q("A")], &[0]).unwrap();
        let rho = density_from_pure(&s);
        assert_eq!(partial_trace(&rho, &["Z"]).unwrap_err(), Error::UnknownLabel("Z".into()));
        assert!(s.reduced_density(&["Z"]).is_err());
    }

    #[test]
    fn projector_examples() {
        let g = PureState::basis(vec![q("S")], &[0]).unwrap();
        let rho = density_from_pure(&g);
        assert_eq!(rho.diagonal(), vec![1.0, 0.0]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = PureState::new(vec![q("S")], vec![c(h), c(h)]).unwrap();
        let rho = density_from_pure(&plus);
        for z in rho.matrix().iter() {
            assert!((z.re - 0.5).abs() < 1e-15 && z.im == 0.0);
        }
        let (pur, k) = purity_and_schmidt(&rho).unwrap();
        assert!((pur - 1.0).abs() < 1e-15 && (k - 1.0).abs() < 1e-15);
        rho.check_physical().unwrap();
    }

    #[test]
    fn reduced_density_matches_full_partial_trace() {
        let amps: Vec<C64> = (0..12).map(|i| C64::new(i as f64 + 1.0, (i as f64 * 0.7).sin())).collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let labels = vec![q("A"), SubsystemLabel::new("B", 3).unwrap(), q("C")];
        let s = PureState::new(labels, amps.into_iter().map(|a| a / norm).collect()).unwrap();
        let full = density_from_pure(&s);
        for keep in [&["A"][..], &["B"], &["C"], &["A", "C"], &["B", "C"]] {
            let direct = s.reduced_density(keep).unwrap();
            let traced = partial_trace(&full, keep).unwrap();
            assert!(direct.max_abs_diff(&traced) < 1e-14, "keep {keep:?}");
            direct.check_physical().unwrap();
        }
    }

    #[test]
    fn purity_out_of_range_is_physicality_error() {
        let bad = DensityMatrix::from_parts_unchecked(
            vec![q("S")],
            DMatrix::from_row_slice(2, 2, &[c(1.2), c(0.0), c(0.0), c(-0.2)]),
        );
        assert!(matches!(purity_and_schmidt(&bad), Err(Error::PurityOutOfRange { .. })));
        assert!(matches!(bad.check_physical(), Err(Error::NotPositive(_))));
    }

    #[test]
    fn validation_catches_non_hermitian_and_bad_trace() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0.5), c(0.1), c(0.0), c(0.5)]);
        assert!(matches!(DensityMatrix::new(vec![q("S")], m), Err(Error::NotHermitian(_))));
        let m = DMatrix::from_row_slice(2, 2, &[c(0.5), c(0.0), c(0.0), c(0.6)]);
        assert!(matches!(DensityMatrix::new(vec![q("S")], m), Err(Error::InvalidTrace(_))));
    }

    #[test]
    fn two_site_gate_swap() {
        let swap = DMatrix::from_fn(4, 4, |r, col| {
            let (a, b) = (col / 2, col % 2);
            c(if r == b * 2 + a { 1.0 } else { 0.0 })
        });
        let s = PureState::basis(vec![q("A"), q("X"), q("B")], &[1, 0, 0]).unwrap();
        let out = s.apply_two_site("A", "B", &swap).unwrap();
        assert_eq!(out.amplitude(&[0, 0, 1]).unwrap(), c(1.0));
        let rho = density_from_pure(&s).conjugate_two_site("A", "B", &swap).unwrap();
        assert!(rho.max_abs_diff(&density_from_pure(&out)) < 1e-15);
    }
}
