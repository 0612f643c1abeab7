//! Path transformations and their duals on measurement operators.
//!
//! Every channel acts on density operators through [`Channel::map`] and on
//! measurement operators through [`Channel::adjoint_map`], so that
//! `Trace(σ Λ(ρ)) = Trace(Λ†(σ) ρ)`. Moving the cut surface along a path is
//! a matter of splitting the channel and sending one piece each way.

mod cut;
mod gain;
mod loss;
mod noise;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub use cut::{compare_cut, relocate_cut_gain, relocate_cut_loss, represent_at_cut, CutComparison};
pub use gain::GainChannel;
pub use loss::LossChannel;
pub use noise::NoiseChannel;

use crate::error::{Error, Result};
use crate::fock::{ComplexOperator, DensityOperator, FockSpace};
use crate::povm::{ElementForm, MeasurementElement, MeasurementFamily};

/// `ln k!` for `k = 0..=n`.
pub(crate) fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

pub trait Channel: Send + Sync {
    fn name(&self) -> String;

    /// Action on an operator of the truncated space; probability leaving the
    /// space is dropped.
    fn map(&self, op: &ComplexOperator) -> Result<ComplexOperator>;

    /// Adjoint action on a measurement operator.
    fn adjoint_map(&self, op: &ComplexOperator) -> Result<ComplexOperator>;

    /// `(before, after)` such that `after ∘ before` is this channel, with
    /// `before` holding the share `f` of the path next to the transmitter.
    fn split(&self, f: f64) -> (Self, Self)
    where
        Self: Sized;

    /// Output density operator. Mass pushed above the truncation is
    /// recorded as tail; beyond the space's tolerance this is an error with
    /// an estimate of the dimension that would suffice.
    fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        let out = symmetrized(&self.map(rho.op())?);
        let tail = (rho.tail_mass() + rho.op().trace().re - out.trace().re).max(0.0);
        let space = rho.space();
        if tail > space.tail_tolerance() {
            return Err(Error::Truncation {
                tail,
                tolerance: space.tail_tolerance(),
                required_dim: self.required_dim(rho),
            });
        }
        DensityOperator::with_tail_mass(out, rho.label(), tail)
    }

    /// Smallest of a few enlarged dimensions on which the output tail fits
    /// the tolerance.
    fn required_dim(&self, rho: &DensityOperator) -> usize {
        let space = rho.space();
        let dim = space.dim();
        for factor in [1.5, 2.0, 3.0, 4.0] {
            let big = (dim as f64 * factor).ceil() as usize;
            let Ok(bigger) = FockSpace::new(big, space.tail_tolerance()) else { continue };
            let Ok(embedded) = rho.embed(bigger) else { continue };
            if let Ok(out) = self.map(embedded.op()) {
                let tail = rho.tail_mass() + rho.op().trace().re - out.trace().re;
                if tail <= space.tail_tolerance() {
                    return big;
                }
            }
        }
        dim * 4 + 1
    }

    fn relocate_element(&self, e: &MeasurementElement) -> Result<MeasurementElement> {
        Ok(e.with_op(self.adjoint_map(e.op())?, ElementForm::General))
    }

    /// The measurement family seen from the near side of this channel.
    fn relocate(&self, fam: &MeasurementFamily) -> Result<MeasurementFamily> {
        fam.map_elements(format!("{}<{}", fam.name(), self.name()), |e| self.relocate_element(e))
    }
}

fn symmetrized(a: &ComplexOperator) -> ComplexOperator {
    (a + &a.adjoint()).scale(0.5)
}

/// Any of the supported path elements.
#[derive(Clone, Debug, PartialEq)]
pub enum PathChannel {
    Loss(LossChannel),
    Gain(GainChannel),
    Noise(NoiseChannel),
}

impl Channel for PathChannel {
    fn name(&self) -> String {
        match self {
            Self::Loss(c) => c.name(),
            Self::Gain(c) => c.name(),
            Self::Noise(c) => c.name(),
        }
    }

    fn map(&self, op: &ComplexOperator) -> Result<ComplexOperator> {
        match self {
            Self::Loss(c) => c.map(op),
            Self::Gain(c) => c.map(op),
            Self::Noise(c) => c.map(op),
        }
    }

    fn adjoint_map(&self, op: &ComplexOperator) -> Result<ComplexOperator> {
        match self {
            Self::Loss(c) => c.adjoint_map(op),
            Self::Gain(c) => c.adjoint_map(op),
            Self::Noise(c) => c.adjoint_map(op),
        }
    }

    fn split(&self, f: f64) -> (Self, Self) {
        match self {
            Self::Loss(c) => {
                let (a, b) = c.split(f);
                (Self::Loss(a), Self::Loss(b))
            }
            Self::Gain(c) => {
                let (a, b) = c.split(f);
                (Self::Gain(a), Self::Gain(b))
            }
            Self::Noise(c) => {
                let (a, b) = c.split(f);
                (Self::Noise(a), Self::Noise(b))
            }
        }
    }

    fn relocate_element(&self, e: &MeasurementElement) -> Result<MeasurementElement> {
        match self {
            Self::Loss(c) => c.relocate_element(e),
            Self::Gain(c) => c.relocate_element(e),
            Self::Noise(c) => c.relocate_element(e),
        }
    }

    fn relocate(&self, fam: &MeasurementFamily) -> Result<MeasurementFamily> {
        match self {
            Self::Loss(c) => c.relocate(fam),
            Self::Gain(c) => c.relocate(fam),
            Self::Noise(c) => c.relocate(fam),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Loss,
    Gain,
    Noise,
}

/// Serialized channel: `param` is the survival probability for loss, the
/// gain for gain, and the mean noise quanta for noise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub kind: ChannelKind,
    pub param: f64,
}

impl ChannelSpec {
    pub fn build(&self) -> Result<PathChannel> {
        Ok(match self.kind {
            ChannelKind::Loss => PathChannel::Loss(LossChannel::new(self.param)?),
            ChannelKind::Gain => PathChannel::Gain(GainChannel::new(self.param)?),
            ChannelKind::Noise => PathChannel::Noise(NoiseChannel::new(self.param)?),
        })
    }
}

/// Choi matrix `∑ |i⟩⟨j| ⊗ Λ(|i⟩⟨j|)` of the channel restricted to `space`.
pub fn choi_matrix<C: Channel + ?Sized>(channel: &C, space: FockSpace) -> Result<DMatrix<C64>> {
    let d = space.dim();
    let mut out = DMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let mut e = DMatrix::zeros(d, d);
            e[(i, j)] = C64::new(1.0, 0.0);
            let image = channel.map(&ComplexOperator::new(space, e)?)?;
            out.view_mut((i * d, j * d), (d, d)).copy_from(image.entries());
        }
    }
    Ok(out)
}

/// Smallest eigenvalue of the Choi matrix; non-negative for a completely
/// positive map.
pub fn complete_positivity_witness<C: Channel + ?Sized>(channel: &C, space: FockSpace) -> Result<f64> {
    let j = choi_matrix(channel, space)?;
    let j = (&j + j.adjoint()) * C64::new(0.5, 0.0);
    Ok(j.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min))
}
