use nalgebra::DVector;
use num_complex::Complex64 as C64;

use super::operator::check_same;
use super::FockSpace;
use crate::error::{Error, Result};

/// Amplitudes of a ket in the number basis.
///
/// `normalized` is false for kets that are deliberately left with a norm
/// other than one, such as truncated projections of coherent states used as
/// measurement states or quadrature surrogates.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    space: FockSpace,
    amplitudes: DVector<C64>,
    normalized: bool,
    tail_mass: f64,
}

impl StateVector {
    /// Wraps amplitudes, renormalizing them to unit norm.
    pub fn normalized(space: FockSpace, amplitudes: DVector<C64>) -> Result<Self> {
        check_len(&space, amplitudes.len())?;
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Domain("cannot normalize a zero or non-finite vector".into()));
        }
        Ok(Self { space, amplitudes: amplitudes / C64::new(norm, 0.0), normalized: true, tail_mass: 0.0 })
    }

    pub(crate) fn unnormalized(space: FockSpace, amplitudes: DVector<C64>) -> Self {
        Self { space, amplitudes, normalized: false, tail_mass: 0.0 }
    }

    pub fn from_amplitudes(space: FockSpace, amplitudes: DVector<C64>) -> Result<Self> {
        check_len(&space, amplitudes.len())?;
        let normalized = (amplitudes.norm() - 1.0).abs() < 1e-10;
        Ok(Self { space, amplitudes, normalized, tail_mass: 0.0 })
    }

    pub(crate) fn with_tail(mut self, tail: f64) -> Self {
        self.tail_mass = tail;
        self
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, n: usize) -> C64 {
        self.amplitudes[n]
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Probability mass the ideal state carries above the truncation.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        check_same(&self.space, &other.space)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Mean of `a†a`.
    pub fn mean_number(&self) -> f64 {
        self.amplitudes.iter().enumerate().map(|(n, c)| n as f64 * c.norm_sqr()).sum::<f64>()
            / self.amplitudes.norm_squared()
    }
}

fn check_len(space: &FockSpace, len: usize) -> Result<()> {
    if len != space.dim() {
        Err(Error::DimensionMismatch { expected: space.dim(), found: len })
    } else {
        Ok(())
    }
}

/// `|n⟩`.
pub fn number_state(space: FockSpace, n: usize) -> Result<StateVector> {
    if n >= space.dim() {
        return Err(Error::OutOfRange { level: n, dim: space.dim() });
    }
    let mut v = DVector::zeros(space.dim());
    v[n] = C64::new(1.0, 0.0);
    Ok(StateVector { space, amplitudes: v, normalized: true, tail_mass: 0.0 })
}

/// Exact number-basis amplitudes `⟨n|α⟩` for `n < dim`, plus the Poisson
/// mass above the truncation and the level at which that mass would drop
/// below `tolerance`.
fn coherent_amplitudes(dim: usize, alpha: C64, tolerance: f64) -> (DVector<C64>, f64, usize) {
    let mut v = DVector::zeros(dim);
    let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    v[0] = c;
    for n in 1..dim {
        c = c * alpha / (n as f64).sqrt();
        v[n] = c;
    }
    // Continue the recurrence to measure the tail directly rather than as
    // 1 - ‖v‖², which loses everything below machine epsilon.
    let a2 = alpha.norm_sqr();
    let mut tail = 0.0;
    let mut mass_above = Vec::new();
    let mut term = c.norm_sqr();
    for n in dim..dim + 100_000 {
        term *= a2 / n as f64;
        tail += term;
        mass_above.push(term);
        if n as f64 > a2 && term <= tail * 1e-18 {
            break;
        }
    }
    let mut required = dim;
    let mut remaining = tail;
    for t in &mass_above {
        if remaining <= tolerance {
            break;
        }
        remaining -= t;
        required += 1;
    }
    (v, tail, required)
}

/// Coherent state `|α⟩`, renormalized after truncation.
///
/// Fails when the Poisson mass above the truncation exceeds the space's tail
/// tolerance.
pub fn coherent_state(space: FockSpace, alpha: C64) -> Result<StateVector> {
    let (v, tail, required) = coherent_amplitudes(space.dim(), alpha, space.tail_tolerance());
    space.check_tail(tail, required)?;
    Ok(StateVector::normalized(space, v)?.with_tail(tail))
}

/// Truncated projection of `|α⟩` with its norm left below one.
///
/// Measurement families use these so that `∑ w π⁻¹|β⟩⟨β|` converges to the
/// identity of the truncated space rather than to a distorted copy.
pub fn coherent_ket(space: FockSpace, alpha: C64) -> StateVector {
    let (v, tail, _) = coherent_amplitudes(space.dim(), alpha, 0.0);
    StateVector::unnormalized(space, v).with_tail(tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::ladder_operators;

    #[test]
    fn number_states_are_basis_kets() {
        let s = FockSpace::with_dim(4).unwrap();
        let v0 = number_state(s, 0).unwrap();
        let v2 = number_state(s, 2).unwrap();
        let as_re = |v: &StateVector| v.amplitudes().iter().map(|z| z.re).collect::<Vec<_>>();
        assert_eq!(as_re(&v0), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(as_re(&v2), vec![0.0, 0.0, 1.0, 0.0]);
        assert!(matches!(number_state(s, 4), Err(Error::OutOfRange { level: 4, dim: 4 })));
    }

    #[test]
    fn number_states_are_eigenstates_of_number_operator() {
        let s = FockSpace::with_dim(8).unwrap();
        let (a, ad) = ladder_operators(s);
        let n_op = &ad * &a;
        for n in 0..8 {
            let v = number_state(s, n).unwrap();
            let out = n_op.apply(&v).unwrap();
            for k in 0..8 {
                let expected = if k == n { n as f64 } else { 0.0 };
                assert!((out.amplitude(k) - C64::new(expected, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn vacuum_is_zero_amplitude_coherent_state() {
        let s = FockSpace::with_dim(10).unwrap();
        let c = coherent_state(s, C64::new(0.0, 0.0)).unwrap();
        assert_eq!(c, number_state(s, 0).unwrap());
    }

    #[test]
    fn coherent_overlap_matches_gaussian() {
        let s = FockSpace::with_dim(40).unwrap();
        let a = coherent_state(s, C64::new(1.0, 0.0)).unwrap();
        let b = coherent_state(s, C64::new(0.0, 0.0)).unwrap();
        let p = a.inner(&b).unwrap().norm_sqr();
        assert!((p - (-1.0f64).exp()).abs() < 1e-12);
        assert!((p - 0.367_879_441_171_442_3).abs() < 1e-12);
    }

    #[test]
    fn coherent_overlaps_match_analytic_family() {
        let s = FockSpace::with_dim(40).unwrap();
        let alphas = [C64::new(2.0, 0.0), C64::new(-1.2, 1.5), C64::new(0.3, -0.4), C64::new(0.0, 2.0)];
        for a in alphas {
            for b in alphas {
                let va = coherent_state(s, a).unwrap();
                let vb = coherent_state(s, b).unwrap();
                let p = vb.inner(&va).unwrap().norm_sqr();
                assert!((p - (-(a - b).norm_sqr()).exp()).abs() < 1e-8, "{a} {b}");
            }
        }
    }

    #[test]
    fn coherent_mean_number() {
        let s = FockSpace::with_dim(40).unwrap();
        let c = coherent_state(s, C64::new(1.5, 0.0)).unwrap();
        assert!((c.mean_number() - 2.25).abs() < 1e-10);
    }

    #[test]
    fn coherent_truncation_is_reported() {
        let s = FockSpace::with_dim(10).unwrap();
        match coherent_state(s, C64::new(3.0, 0.0)) {
            Err(Error::Truncation { tail, required_dim, .. }) => {
                assert!(tail > 1e-3);
                assert!(required_dim > 10);
                let ok = FockSpace::with_dim(required_dim).unwrap();
                assert!(coherent_state(ok, C64::new(3.0, 0.0)).is_ok());
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn coherent_ket_keeps_truncated_norm() {
        let s = FockSpace::with_dim(10).unwrap();
        let k = coherent_ket(s, C64::new(3.0, 0.0));
        assert!(!k.is_normalized());
        assert!((k.norm().powi(2) + k.tail_mass() - 1.0).abs() < 1e-12);
    }
}
