use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{ln_factorials, Channel};
use crate::error::{Error, Result};
use crate::fock::ComplexOperator;
use crate::povm::{ElementForm, MeasurementElement};

/// Quantum-limited phase-insensitive amplifier with gain `G ≥ 1`.
///
/// Kraus operators `A_k` with `⟨n+k|A_k|n⟩ = √(C(n+k,k) G^{−(n+1)} (1−1/G)^k)`.
/// Weight pushed above the truncation is reported as tail mass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainChannel {
    g: f64,
}

impl GainChannel {
    pub fn new(g: f64) -> Result<Self> {
        if !(g >= 1.0 && g.is_finite()) {
            return Err(Error::Domain(format!("gain must be at least 1, got {g}")));
        }
        Ok(Self { g })
    }

    pub fn gain(&self) -> f64 {
        self.g
    }

    /// Amplifier followed by amplifier: gains multiply.
    pub fn then(&self, other: &GainChannel) -> GainChannel {
        GainChannel { g: self.g * other.g }
    }

    /// `B[n][k] = ⟨n+k|A_k|n⟩` for `n + k < dim`.
    fn amplitudes(&self, dim: usize) -> DMatrix<f64> {
        let lf = ln_factorials(dim);
        let lg = self.g.ln();
        let lr = (1.0 - 1.0 / self.g).ln();
        DMatrix::from_fn(dim, dim, |n, k| {
            if n + k >= dim {
                return 0.0;
            }
            if k > 0 && self.g == 1.0 {
                return 0.0;
            }
            let mut ln = lf[n + k] - lf[n] - lf[k] - (n + 1) as f64 * lg;
            if k > 0 {
                ln += k as f64 * lr;
            }
            (0.5 * ln).exp()
        })
    }
}

impl Channel for GainChannel {
    fn name(&self) -> String {
        format!("gain(G={})", self.g)
    }

    /// `∑_k A_k X A_k†`, keeping only the retained levels.
    fn map(&self, op: &ComplexOperator) -> Result<ComplexOperator> {
        let d = op.dim();
        let b = self.amplitudes(d);
        let src = op.entries();
        let out = DMatrix::from_fn(d, d, |m, mp| {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..=m.min(mp) {
                acc += src[(m - k, mp - k)] * (b[(m - k, k)] * b[(mp - k, k)]);
            }
            acc
        });
        ComplexOperator::new(op.space(), out)
    }

    /// `∑_k A_k† X A_k`; entries that would need `X` above the truncation
    /// are dropped, so this is exact for number-diagonal elements only.
    fn adjoint_map(&self, op: &ComplexOperator) -> Result<ComplexOperator> {
        let d = op.dim();
        let b = self.amplitudes(d);
        let src = op.entries();
        let out = DMatrix::from_fn(d, d, |n, np| {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..d - n.max(np) {
                acc += src[(n + k, np + k)] * (b[(n, k)] * b[(np, k)]);
            }
            acc
        });
        ComplexOperator::new(op.space(), out)
    }

    /// `s π⁻¹|β⟩⟨β|` relocates to `(s/G)|β/√G⟩⟨β/√G|`.
    fn relocate_element(&self, e: &MeasurementElement) -> Result<MeasurementElement> {
        match e.form() {
            ElementForm::Coherent { beta, scale } => {
                let b = beta / self.g.sqrt();
                let moved = MeasurementElement::coherent(e.space(), e.outcome().clone(), b, scale / self.g, e.weight());
                Ok(moved)
            }
            _ => Ok(e.with_op(self.adjoint_map(e.op())?, ElementForm::General)),
        }
    }

    /// `(G^f, G^{1−f})`.
    fn split(&self, f: f64) -> (Self, Self) {
        (Self { g: self.g.powf(f) }, Self { g: self.g.powf(1.0 - f) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, number_state, DensityOperator, FockSpace};
    use crate::povm::number_measurement;

    #[test]
    fn unit_gain_is_identity() {
        let s = FockSpace::with_dim(20).unwrap();
        let rho = DensityOperator::pure(&coherent_state(s, C64::new(0.5, 0.5)).unwrap(), "a").unwrap();
        let out = GainChannel::new(1.0).unwrap().apply(&rho).unwrap();
        assert!((out.op() - rho.op()).max_abs() < 1e-15);
    }

    #[test]
    fn number_state_mean_photons() {
        let s = FockSpace::with_dim(80).unwrap();
        let rho = DensityOperator::pure(&number_state(s, 2).unwrap(), "2").unwrap();
        let out = GainChannel::new(2.0).unwrap().apply(&rho).unwrap();
        assert!((out.mean_number() - 5.0).abs() < 1e-6);
    }

    #[test]
    fn vacuum_becomes_thermal() {
        let s = FockSpace::with_dim(80).unwrap();
        let rho = DensityOperator::pure(&number_state(s, 0).unwrap(), "0").unwrap();
        let out = GainChannel::new(3.0).unwrap().apply(&rho).unwrap();
        let nbar = 2.0f64;
        for (n, p) in out.populations().iter().enumerate() {
            let thermal = nbar.powi(n as i32) / (1.0 + nbar).powi(n as i32 + 1);
            assert!((p - thermal).abs() < 1e-12);
        }
        assert!(out.op().hermiticity_defect() == 0.0);
    }

    #[test]
    fn output_overflow_is_reported() {
        let s = FockSpace::with_dim(20).unwrap();
        let rho = DensityOperator::pure(&number_state(s, 5).unwrap(), "5").unwrap();
        match GainChannel::new(3.0).unwrap().apply(&rho) {
            Err(Error::Truncation { required_dim, .. }) => assert!(required_dim > 20),
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn number_relocation_is_exact_duality() {
        let s = FockSpace::with_dim(60).unwrap();
        let ch = GainChannel::new(2.0).unwrap();
        let fam = number_measurement(s);
        let moved = ch.relocate(&fam).unwrap();
        let rho = DensityOperator::pure(&number_state(s, 3).unwrap(), "3").unwrap();
        let amplified = ch.apply(&rho).unwrap();
        let a = moved.probabilities(&rho).unwrap();
        let b = fam.probabilities(&amplified).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-14);
        }
    }
}
