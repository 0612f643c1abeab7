use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{ln_factorials, Channel};
use crate::error::{Error, Result};
use crate::fock::ComplexOperator;

/// Pure loss with survival probability `p` (attenuation `L = 1/p`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossChannel {
    p: f64,
}

impl LossChannel {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Domain(format!("survival probability must lie in (0, 1], got {p}")));
        }
        Ok(Self { p })
    }

    pub fn from_attenuation(l: f64) -> Result<Self> {
        if !(l >= 1.0 && l.is_finite()) {
            return Err(Error::Domain(format!("attenuation must be at least 1, got {l}")));
        }
        Self::new(1.0 / l)
    }

    pub fn survival(&self) -> f64 {
        self.p
    }

    pub fn attenuation(&self) -> f64 {
        1.0 / self.p
    }

    /// Loss followed by loss: survival probabilities multiply.
    pub fn then(&self, other: &LossChannel) -> LossChannel {
        LossChannel { p: self.p * other.p }
    }

    /// `A[n][k] = ⟨n−k|E_k|n⟩ = √(C(n,k) p^{n−k} (1−p)^k)`.
    fn amplitudes(&self, dim: usize) -> DMatrix<f64> {
        let lf = ln_factorials(dim);
        let (lp, lq) = (self.p.ln(), (1.0 - self.p).ln());
        DMatrix::from_fn(dim, dim, |n, k| {
            if k > n {
                return 0.0;
            }
            if k > 0 && self.p == 1.0 {
                return 0.0;
            }
            let mut ln = lf[n] - lf[k] - lf[n - k];
            if n > k {
                ln += (n - k) as f64 * lp;
            }
            if k > 0 {
                ln += k as f64 * lq;
            }
            (0.5 * ln).exp()
        })
    }
}

impl Channel for LossChannel {
    fn name(&self) -> String {
        format!("loss(p={})", self.p)
    }

    /// `∑_k E_k A E_k†`; exact on the truncated space since loss only moves
    /// weight downwards.
    fn map(&self, op: &ComplexOperator) -> Result<ComplexOperator> {
        let d = op.dim();
        let a = self.amplitudes(d);
        let src = op.entries();
        let out = DMatrix::from_fn(d, d, |m, mp| {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..d - m.max(mp) {
                acc += src[(m + k, mp + k)] * (a[(m + k, k)] * a[(mp + k, k)]);
            }
            acc
        });
        ComplexOperator::new(op.space(), out)
    }

    /// `∑_k E_k† A E_k`.
    fn adjoint_map(&self, op: &ComplexOperator) -> Result<ComplexOperator> {
        let d = op.dim();
        let a = self.amplitudes(d);
        let src = op.entries();
        let out = DMatrix::from_fn(d, d, |n, np| {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..=n.min(np) {
                acc += src[(n - k, np - k)] * (a[(n, k)] * a[(np, k)]);
            }
            acc
        });
        ComplexOperator::new(op.space(), out)
    }

    /// `(p^f, p^{1−f})`: the transmitter-side share grows with `f`.
    fn split(&self, f: f64) -> (Self, Self) {
        (Self { p: self.p.powf(f) }, Self { p: self.p.powf(1.0 - f) })
    }
}
