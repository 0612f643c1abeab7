use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{FockSpace, StateVector};
use crate::error::{Error, Result};
use crate::tolerance::{EIG_FLOOR, HERM_TOL};

/// Dense complex square matrix acting on a truncated space.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexOperator {
    space: FockSpace,
    entries: DMatrix<C64>,
}

impl ComplexOperator {
    pub fn new(space: FockSpace, entries: DMatrix<C64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch { expected: entries.nrows(), found: entries.ncols() });
        }
        if entries.nrows() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: entries.nrows() });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { space, entries })
    }

    pub(crate) fn from_parts(space: FockSpace, entries: DMatrix<C64>) -> Self {
        debug_assert_eq!(entries.nrows(), space.dim());
        debug_assert_eq!(entries.ncols(), space.dim());
        Self { space, entries }
    }

    pub fn zeros(space: FockSpace) -> Self {
        Self::from_parts(space, DMatrix::zeros(space.dim(), space.dim()))
    }

    pub fn identity(space: FockSpace) -> Self {
        Self::from_parts(space, DMatrix::identity(space.dim(), space.dim()))
    }

    pub fn from_diagonal(space: FockSpace, diagonal: &[f64]) -> Result<Self> {
        if diagonal.len() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: diagonal.len() });
        }
        let d = DVector::from_iterator(diagonal.len(), diagonal.iter().map(|&x| C64::new(x, 0.0)));
        Self::new(space, DMatrix::from_diagonal(&d))
    }

    /// `|a⟩⟨b|`.
    pub fn outer(a: &StateVector, b: &StateVector) -> Result<Self> {
        check_same(&a.space(), &b.space())?;
        Ok(Self::from_parts(a.space(), a.amplitudes() * b.amplitudes().adjoint()))
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn projector(psi: &StateVector) -> Self {
        Self::from_parts(psi.space(), psi.amplitudes() * psi.amplitudes().adjoint())
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<C64> {
        self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_parts(self.space, self.entries.adjoint())
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_parts(self.space, self.entries.map(|z| z * factor))
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    /// `max |A − A†|` over entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.entries[(i, j)] - self.entries[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        check_same(&self.space, &psi.space())?;
        Ok(StateVector::unnormalized(self.space, &self.entries * psi.amplitudes()))
    }

    /// `⟨ψ|A|ψ⟩`.
    pub fn expectation(&self, psi: &StateVector) -> Result<C64> {
        check_same(&self.space, &psi.space())?;
        let a = psi.amplitudes();
        Ok(a.dotc(&(&self.entries * a)))
    }

    /// Top-left block on a smaller space: `P A P` with `P` the projector onto
    /// the retained levels.
    pub fn restrict(&self, space: FockSpace) -> Result<Self> {
        if space.dim() > self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: space.dim() });
        }
        let d = space.dim();
        Ok(Self::from_parts(space, self.entries.view((0, 0), (d, d)).into_owned()))
    }

    /// Zero-padded copy on a larger space.
    pub fn embed(&self, space: FockSpace) -> Result<Self> {
        if space.dim() < self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: space.dim() });
        }
        let mut m = DMatrix::zeros(space.dim(), space.dim());
        let d = self.dim();
        m.view_mut((0, 0), (d, d)).copy_from(&self.entries);
        Ok(Self::from_parts(space, m))
    }

    /// Eigen-decomposition of the Hermitian part, eigenvalues ascending.
    pub fn hermitian_eigen(&self) -> (Vec<f64>, DMatrix<C64>) {
        let h = (&self.entries + self.entries.adjoint()) * C64::new(0.5, 0.0);
        let eig = h.symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
        (values, vectors)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.entries + self.entries.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Applies `f` to the eigenvalues of a Hermitian operator.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> Self {
        let (values, vectors) = self.hermitian_eigen();
        let scaled = DMatrix::from_fn(self.dim(), self.dim(), |r, c| vectors[(r, c)] * f(values[c]));
        Self::from_parts(self.space, scaled * vectors.adjoint())
    }

    pub fn to_json(&self) -> OperatorJson {
        OperatorJson::from(self)
    }
}

pub(crate) fn check_same(a: &FockSpace, b: &FockSpace) -> Result<()> {
    if a.dim() != b.dim() {
        Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() })
    } else {
        Ok(())
    }
}

/// `Trace(A·B)` without forming the product.
pub fn trace_product(a: &ComplexOperator, b: &ComplexOperator) -> Result<C64> {
    check_same(&a.space, &b.space)?;
    let n = a.dim();
    let (ae, be) = (&a.entries, &b.entries);
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += ae[(i, j)] * be[(j, i)];
        }
    }
    Ok(acc)
}

/// Hermitian non-negative square root.
///
/// Eigenvalues in `[-EIG_FLOOR, 0)` are clamped to zero; anything lower is
/// rejected. Eigenvalues at the level of rounding noise relative to the
/// largest one are also zeroed, since their square roots would otherwise
/// leak `√ε`-sized garbage into the null space.
pub fn operator_sqrt(a: &ComplexOperator) -> Result<ComplexOperator> {
    let defect = a.hermiticity_defect();
    if defect > HERM_TOL * a.max_abs().max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    let (values, _) = a.hermitian_eigen();
    if let Some(&lowest) = values.first() {
        if lowest < -EIG_FLOOR {
            return Err(Error::NotPositive { min_eigenvalue: lowest });
        }
    }
    let top = values.last().copied().unwrap_or(0.0).max(0.0);
    let noise = top * f64::EPSILON * a.dim() as f64;
    Ok(a.map_eigenvalues(|x| if x <= noise { 0.0 } else { x.sqrt() }))
}

impl Add for &ComplexOperator {
    type Output = ComplexOperator;
    fn add(self, rhs: Self) -> ComplexOperator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimensions differ");
        ComplexOperator::from_parts(self.space, &self.entries + &rhs.entries)
    }
}

impl Sub for &ComplexOperator {
    type Output = ComplexOperator;
    fn sub(self, rhs: Self) -> ComplexOperator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimensions differ");
        ComplexOperator::from_parts(self.space, &self.entries - &rhs.entries)
    }
}

impl Mul for &ComplexOperator {
    type Output = ComplexOperator;
    fn mul(self, rhs: Self) -> ComplexOperator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimensions differ");
        ComplexOperator::from_parts(self.space, &self.entries * &rhs.entries)
    }
}

/// JSON matrix layout: `{ "dim": n, "re": [[..]], "im": [[..]] }`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct OperatorJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&ComplexOperator> for OperatorJson {
    fn from(op: &ComplexOperator) -> Self {
        let n = op.dim();
        let rows = |f: fn(C64) -> f64| -> Vec<Vec<f64>> {
            (0..n).map(|i| (0..n).map(|j| f(op.entries[(i, j)])).collect()).collect()
        };
        Self { dim: n, re: rows(|z| z.re), im: rows(|z| z.im) }
    }
}

impl OperatorJson {
    /// Rebuilds the operator; `space` supplies the tail tolerance and must
    /// agree with `dim`.
    pub fn into_operator(self, space: FockSpace) -> Result<ComplexOperator> {
        let n = self.dim;
        if n != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: n });
        }
        if self.re.len() != n || self.im.len() != n {
            return Err(Error::Format("row count does not match dim".into()));
        }
        if self.re.iter().chain(&self.im).any(|row| row.len() != n) {
            return Err(Error::Format("column count does not match dim".into()));
        }
        let m = DMatrix::from_fn(n, n, |i, j| C64::new(self.re[i][j], self.im[i][j]));
        ComplexOperator::new(space, m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, number_state};
    use proptest::prelude::*;

    fn random_psd(dim: usize, seed: &[f64]) -> ComplexOperator {
        let space = FockSpace::with_dim(dim).unwrap();
        let b = DMatrix::from_fn(dim, dim, |i, j| {
            let k = (i * dim + j) * 2;
            C64::new(seed[k % seed.len()], seed[(k + 1) % seed.len()])
        });
        ComplexOperator::new(space, &b * b.adjoint()).unwrap()
    }

    #[test]
    fn trace_against_identity_is_one() {
        let space = FockSpace::with_dim(12).unwrap();
        let psi = coherent_state(space, C64::new(0.8, -0.3)).unwrap();
        let rho = ComplexOperator::projector(&psi);
        let t = trace_product(&rho, &ComplexOperator::identity(space)).unwrap();
        assert!((t - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn trace_of_projectors_is_squared_overlap() {
        let space = FockSpace::with_dim(30).unwrap();
        let a = coherent_state(space, C64::new(0.5, 0.2)).unwrap();
        let psi = coherent_state(space, C64::new(-0.3, 0.9)).unwrap();
        let t = trace_product(&ComplexOperator::projector(&a), &ComplexOperator::projector(&psi)).unwrap();
        let overlap = a.inner(&psi).unwrap().norm_sqr();
        assert!((t.re - overlap).abs() < 1e-14);
        assert!(t.im.abs() < 1e-14);
    }

    #[test]
    fn binomial_number_overlap() {
        // B_1^3(1/2) = C(3,1)/8
        let space = FockSpace::with_dim(6).unwrap();
        let probs = [1.0 / 8.0, 3.0 / 8.0, 3.0 / 8.0, 1.0 / 8.0, 0.0, 0.0];
        let rho = ComplexOperator::from_diagonal(space, &probs).unwrap();
        let m = ComplexOperator::projector(&number_state(space, 1).unwrap());
        let t = trace_product(&m, &rho).unwrap();
        assert!((t.re - 0.375).abs() < 1e-15);
    }

    #[test]
    fn trace_product_rejects_mismatch() {
        let a = ComplexOperator::identity(FockSpace::with_dim(3).unwrap());
        let b = ComplexOperator::identity(FockSpace::with_dim(4).unwrap());
        assert!(matches!(trace_product(&a, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn sqrt_of_identity() {
        let id = ComplexOperator::identity(FockSpace::with_dim(5).unwrap());
        let r = operator_sqrt(&id).unwrap();
        assert!((&r - &id).max_abs() < 1e-14);
    }

    #[test]
    fn sqrt_of_scaled_coherent_projector() {
        let space = FockSpace::with_dim(30).unwrap();
        let beta = coherent_state(space, C64::new(0.7, 0.4)).unwrap();
        let p = ComplexOperator::projector(&beta);
        let a = p.scale(1.0 / std::f64::consts::PI);
        let r = operator_sqrt(&a).unwrap();
        let expected = p.scale(std::f64::consts::PI.powf(-0.5));
        assert!((&r - &expected).max_abs() < 1e-10);
    }

    #[test]
    fn sqrt_rejects_negative_operator() {
        let space = FockSpace::with_dim(3).unwrap();
        let a = ComplexOperator::from_diagonal(space, &[1.0, -1e-3, 0.5]).unwrap();
        assert!(matches!(operator_sqrt(&a), Err(Error::NotPositive { .. })));
        let tiny = ComplexOperator::from_diagonal(space, &[1.0, -1e-12, 0.5]).unwrap();
        let r = operator_sqrt(&tiny).unwrap();
        assert_eq!(r.get(1, 1), C64::new(0.0, 0.0));
    }

    #[test]
    fn json_layout_round_trips() {
        let space = FockSpace::with_dim(3).unwrap();
        let psi = coherent_state(space.enlarged(20), C64::new(0.2, 0.1)).unwrap();
        let op = ComplexOperator::projector(&psi).restrict(space).unwrap();
        let text = serde_json::to_string(&op.to_json()).unwrap();
        assert!(text.starts_with("{\"dim\":3,\"re\":[["));
        let back: OperatorJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.into_operator(space).unwrap(), op);
    }

    proptest! {
        #[test]
        fn sqrt_squares_back_and_commutes(seed in proptest::collection::vec(-1.0f64..1.0, 64)) {
            let a = random_psd(6, &seed);
            let r = operator_sqrt(&a).unwrap();
            let scale = a.max_abs().max(1.0);
            prop_assert!((&(&r * &r) - &a).max_abs() < 1e-10 * scale);
            prop_assert!((&(&r * &a) - &(&a * &r)).max_abs() < 1e-9 * scale);
            prop_assert!(r.hermiticity_defect() < 1e-12 * scale);
        }
    }
}
