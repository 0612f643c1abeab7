use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::{ComplexOperator, FockSpace};

/// Displacement operators `D(α) = exp(α a† − α* a)` on a truncated space.
///
/// The generator is rotated onto `−i r (a + a†)`, whose real symmetric
/// tridiagonal matrix is diagonalized once per working space.
///
/// [`Displacer::new`] works on a padded space and cuts the requested block
/// out of the padded exponential, so its entries agree with the
/// infinite-dimensional matrix elements; probability that leaves the block
/// is lost rather than reflected off the top level. [`Displacer::truncated`]
/// exponentiates the truncated generator itself, which is exactly unitary
/// but wrong near the top levels.
#[derive(Clone, Debug)]
pub struct Displacer {
    space: FockSpace,
    max_radius: f64,
    work: usize,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    top: DMatrix<C64>,
}

/// Working dimension that keeps `D(α)` accurate on the first `dim` levels
/// for `|α| ≤ radius`.
pub(crate) fn padded_dim(dim: usize, radius: f64) -> usize {
    let edge = (dim as f64).sqrt() + radius + 6.0;
    ((edge * edge).ceil() as usize).max(dim + 10)
}

impl Displacer {
    pub fn new(space: FockSpace, max_radius: f64) -> Self {
        Self::with_work_dim(space, max_radius, padded_dim(space.dim(), max_radius.abs()))
    }

    pub fn truncated(space: FockSpace) -> Self {
        Self::with_work_dim(space, f64::INFINITY, space.dim())
    }

    fn with_work_dim(space: FockSpace, max_radius: f64, work: usize) -> Self {
        let x = DMatrix::from_fn(work, work, |r, c| {
            if c == r + 1 {
                (c as f64).sqrt()
            } else if r == c + 1 {
                (r as f64).sqrt()
            } else {
                0.0
            }
        });
        let eig = x.symmetric_eigen();
        let top = eig.eigenvectors.rows(0, space.dim()).map(|v| C64::new(v, 0.0));
        Self {
            space,
            max_radius: max_radius.abs(),
            work,
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            eigenvectors: eig.eigenvectors,
            top,
        }
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn max_radius(&self) -> f64 {
        self.max_radius
    }

    pub fn work_dim(&self) -> usize {
        self.work
    }

    fn check_radius(&self, alpha: C64) {
        if alpha.norm() > self.max_radius + 1e-12 {
            log::warn!(
                "displacement |α| = {:.3} exceeds the prepared radius {:.3}; edge accuracy degrades",
                alpha.norm(),
                self.max_radius
            );
        }
    }

    /// `e^{iφ}` with `α = r e^{iθ}`, `φ = θ + π/2`.
    fn rotation(alpha: C64) -> (f64, C64) {
        let r = alpha.norm();
        let phase = if r == 0.0 { C64::new(0.0, 1.0) } else { C64::new(0.0, 1.0) * alpha / r };
        (r, phase)
    }

    pub fn operator(&self, alpha: C64) -> ComplexOperator {
        self.check_radius(alpha);
        let d = self.space.dim();
        let (r, phase) = Self::rotation(alpha);
        let mut scaled = self.top.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            let e = C64::from_polar(1.0, -r * self.eigenvalues[j]);
            col *= e;
        }
        let mut m = scaled * self.top.transpose();
        let powers: Vec<C64> = (0..d).map(|n| phase.powu(n as u32)).collect();
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] *= powers[i] * powers[j].conj();
            }
        }
        ComplexOperator::from_parts(self.space, m)
    }

    /// `D(α)|v⟩` for a vector on the working space; the result lives on the
    /// working space too.
    pub(crate) fn apply_work(&self, alpha: C64, v: &DVector<C64>) -> DVector<C64> {
        self.check_radius(alpha);
        assert_eq!(v.len(), self.work);
        let (r, phase) = Self::rotation(alpha);
        let powers: Vec<C64> = (0..self.work).map(|n| phase.powu(n as u32)).collect();
        let u = DVector::from_iterator(self.work, v.iter().zip(&powers).map(|(x, p)| x * p.conj()));
        let w = self.eigenvectors.map(|x| C64::new(x, 0.0));
        let mut coeff = w.transpose() * u;
        for (j, c) in coeff.iter_mut().enumerate() {
            *c *= C64::from_polar(1.0, -r * self.eigenvalues[j]);
        }
        let out = w * coeff;
        DVector::from_iterator(self.work, out.iter().zip(&powers).map(|(x, p)| x * p))
    }
}

/// `D(α)` as the exponential of the truncated generator: unitary on the
/// whole space, accurate on levels the displaced support does not reach
/// the top from.
pub fn displacement_operator(space: FockSpace, alpha: C64) -> ComplexOperator {
    let r = alpha.norm();
    if r * r + 3.0 * r + 3.0 > space.dim() as f64 {
        log::warn!("displacement |α| = {r:.3} is close to the truncation at dim {}", space.dim());
    }
    Displacer::truncated(space).operator(alpha)
}
