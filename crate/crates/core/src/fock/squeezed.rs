use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use super::displacement::Displacer;
use super::quadrature::project_wavefunction;
use super::{FockSpace, StateVector};
use crate::error::{Error, Result};

const MIN_NODES: usize = 200;

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Domain(format!("squeezing parameter must be positive, got {eta}")));
    }
    Ok(())
}

/// Fock amplitudes of `(η/π)^{1/4} exp(−η q²/2)` on `len` levels, plus the
/// norm the quadrature did not capture.
fn squeezed_amplitudes(len: usize, eta: f64) -> (DVector<C64>, f64) {
    let space = FockSpace::new(len, 0.0).expect("len >= 2");
    let nodes = MIN_NODES.max(len + 60);
    let norm = (eta / PI).powf(0.25);
    project_wavefunction(space, nodes, |q| C64::new(norm * (-0.5 * eta * q * q).exp(), 0.0))
}

/// Splits a long amplitude vector at `dim` and returns the head, the mass
/// above it and the level where the remaining mass drops below `tol`.
fn split_tail(v: &DVector<C64>, dim: usize, missing: f64, tol: f64) -> (DVector<C64>, f64, usize) {
    let above: Vec<f64> = v.iter().skip(dim).map(|c| c.norm_sqr()).collect();
    let tail = above.iter().sum::<f64>() + missing;
    let mut required = dim;
    let mut remaining = tail;
    for t in &above {
        if remaining <= tol {
            break;
        }
        remaining -= t;
        required += 1;
    }
    (v.rows(0, dim).into_owned(), tail, required)
}

/// Squeezed ground state with position wavefunction
/// `(η/π)^{1/4} exp(−η q²/2)`; `η = 1` is the vacuum.
pub fn squeezed_ground_state(space: FockSpace, eta: f64) -> Result<StateVector> {
    check_eta(eta)?;
    let len = 2 * space.dim() + 40;
    let (v, missing) = squeezed_amplitudes(len, eta);
    let (head, tail, required) = split_tail(&v, space.dim(), missing, space.tail_tolerance());
    space.check_tail(tail, required)?;
    Ok(StateVector::normalized(space, head)?.with_tail(tail))
}

/// `D(p_R, q_R)|0, η⟩`, the squeezed ground state displaced to
/// `α = (q_R + i p_R)/√2`.
pub fn displaced_squeezed_state(space: FockSpace, p_r: f64, q_r: f64, eta: f64) -> Result<StateVector> {
    let radius = C64::new(q_r, p_r).norm() * FRAC_1_SQRT_2;
    let kets = SqueezedKets::new(space, eta, radius)?;
    let (head, tail, required) = kets.split(p_r, q_r);
    space.check_tail(tail, required)?;
    Ok(StateVector::normalized(space, head)?.with_tail(tail))
}

/// Truncated projections of displaced squeezed states sharing one `η` and
/// one padded displacement engine.
#[derive(Clone, Debug)]
pub struct SqueezedKets {
    space: FockSpace,
    displacer: Displacer,
    base: DVector<C64>,
    missing: f64,
}

impl SqueezedKets {
    /// Prepares kets for displacements up to `max_radius` in `|α|`.
    pub fn new(space: FockSpace, eta: f64, max_radius: f64) -> Result<Self> {
        check_eta(eta)?;
        let displacer = Displacer::new(space, max_radius);
        let (base, missing) = squeezed_amplitudes(displacer.work_dim(), eta);
        Ok(Self { space, displacer, base, missing })
    }

    fn split(&self, p_r: f64, q_r: f64) -> (DVector<C64>, f64, usize) {
        let alpha = C64::new(q_r, p_r) * FRAC_1_SQRT_2;
        let moved = self.displacer.apply_work(alpha, &self.base);
        split_tail(&moved, self.space.dim(), self.missing, self.space.tail_tolerance())
    }

    /// `|p_R, q_R, η⟩` cut to the space without renormalization; the lost
    /// norm is recorded as tail mass.
    pub fn ket(&self, p_r: f64, q_r: f64) -> StateVector {
        let (head, tail, _) = self.split(p_r, q_r);
        StateVector::unnormalized(self.space, head).with_tail(tail)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, number_state, quadrature_operator, wavefunction, Quadrature};

    #[test]
    fn unsqueezed_is_vacuum() {
        let s = FockSpace::with_dim(20).unwrap();
        let v = squeezed_ground_state(s, 1.0).unwrap();
        let vac = number_state(s, 0).unwrap();
        assert!((v.amplitudes() - vac.amplitudes()).norm() < 1e-12);
    }

    #[test]
    fn only_even_levels_are_populated() {
        let s = FockSpace::with_dim(60).unwrap();
        let v = squeezed_ground_state(s, 2.0).unwrap();
        for n in (1..60).step_by(2) {
            assert!(v.amplitude(n).norm() < 1e-12);
        }
        assert!(v.amplitude(2).norm() > 0.1);
    }

    #[test]
    fn position_variance_is_half_inverse_eta() {
        let s = FockSpace::with_dim(60).unwrap();
        let v = squeezed_ground_state(s, 2.0).unwrap();
        let q = quadrature_operator(s, Quadrature::Position);
        let q2 = &q * &q;
        let var = q2.expectation(&v).unwrap().re - q.expectation(&v).unwrap().re.powi(2);
        assert!((var - 0.25).abs() < 1e-6, "{var}");
    }

    #[test]
    fn bad_eta_is_rejected() {
        let s = FockSpace::with_dim(10).unwrap();
        assert!(matches!(squeezed_ground_state(s, 0.0), Err(Error::Domain(_))));
        assert!(matches!(displaced_squeezed_state(s, 0.0, 0.0, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn zero_displacement_is_squeezed_ground() {
        let s = FockSpace::with_dim(40).unwrap();
        let a = displaced_squeezed_state(s, 0.0, 0.0, 0.7).unwrap();
        let b = squeezed_ground_state(s, 0.7).unwrap();
        assert!((a.amplitudes() - b.amplitudes()).norm() < 1e-10);
    }

    #[test]
    fn unit_eta_is_coherent() {
        let s = FockSpace::with_dim(40).unwrap();
        let (p_r, q_r) = (-0.6, 1.3);
        let a = displaced_squeezed_state(s, p_r, q_r, 1.0).unwrap();
        let c = coherent_state(s, C64::new(q_r, p_r) * FRAC_1_SQRT_2).unwrap();
        assert!((a.amplitudes() - c.amplitudes()).norm() < 1e-10);
    }

    #[test]
    fn mean_position_is_displacement() {
        let s = FockSpace::with_dim(60).unwrap();
        let v = displaced_squeezed_state(s, 1.0, 0.7, 2.0).unwrap();
        let q = quadrature_operator(s, Quadrature::Position);
        let p = quadrature_operator(s, Quadrature::Momentum);
        assert!((q.expectation(&v).unwrap().re - 0.7).abs() < 1e-9);
        assert!((p.expectation(&v).unwrap().re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn wavefunction_matches_displaced_gaussian_with_phase() {
        let s = FockSpace::with_dim(60).unwrap();
        let (p_r, q_r, eta) = (0.8, -0.5, 1.7);
        let v = displaced_squeezed_state(s, p_r, q_r, eta).unwrap();
        for q in [-2.0, -0.5, 0.0, 0.9, 1.6] {
            let expected = (eta / PI).powf(0.25)
                * C64::new(-0.5 * eta * (q_r - q).powi(2), p_r * q - 0.5 * p_r * q_r).exp();
            let got = wavefunction(&v, Quadrature::Position, q);
            assert!((got - expected).norm() < 1e-8, "{q}: {got} vs {expected}");
        }
    }
}
