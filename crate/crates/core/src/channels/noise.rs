use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Channel;
use crate::error::{Error, Result};
use crate::fock::{coherent_ket, gauss_hermite, ComplexOperator, Displacer};
use crate::povm::{ElementForm, MeasurementElement, MeasurementFamily};

/// Additive Gaussian noise with `n̄` mean quanta: the P distribution is
/// convolved with `(π n̄)⁻¹ exp(−|ξ|²/n̄)`.
///
/// Realized as the mixture `∑ wᵢ D(ξᵢ) ρ D(ξᵢ)†` over a Gauss–Hermite
/// product grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseChannel {
    nbar: f64,
    nodes: usize,
}

/// Node counts tried, in order, when none is given.
const NODE_LADDER: [usize; 6] = [21, 31, 41, 61, 81, 101];
const AUTO_DEFECT: f64 = 1e-9;
const MAX_DEFECT: f64 = 1e-6;
const WEIGHT_CUTOFF: f64 = 1e-15;
/// Thermal occupations checked by [`NoiseChannel::quadrature_defect`].
const CHECKED_LEVELS: usize = 40;

impl NoiseChannel {
    /// Noise channel with the smallest Gauss–Hermite grid (21 nodes per axis
    /// at least) that reproduces the thermal occupations of a noisy vacuum to
    /// 1e-9.
    pub fn new(nbar: f64) -> Result<Self> {
        let mut ch = Self::with_nodes(nbar, NODE_LADDER[0])?;
        for nodes in NODE_LADDER {
            ch.nodes = nodes;
            if ch.quadrature_defect() <= AUTO_DEFECT {
                break;
            }
        }
        Ok(ch)
    }

    pub fn with_nodes(nbar: f64, nodes: usize) -> Result<Self> {
        if !(nbar >= 0.0 && nbar.is_finite()) {
            return Err(Error::Domain(format!("mean noise quanta must be non-negative, got {nbar}")));
        }
        if nodes == 0 {
            return Err(Error::Domain("noise quadrature needs at least one node".into()));
        }
        Ok(Self { nbar, nodes })
    }

    pub fn mean_noise(&self) -> f64 {
        self.nbar
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn then(&self, other: &NoiseChannel) -> Result<NoiseChannel> {
        Self::new(self.nbar + other.nbar)
    }

    fn raw_mixture(&self) -> (Vec<(C64, f64)>, f64) {
        let (x, w) = gauss_hermite(self.nodes);
        let s = self.nbar.sqrt();
        let mut out = Vec::with_capacity(self.nodes * self.nodes);
        let mut total = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            for (xj, wj) in x.iter().zip(&w) {
                let weight = wi * wj / PI;
                total += weight;
                if weight >= WEIGHT_CUTOFF {
                    out.push((C64::new(s * xi, s * xj), weight));
                }
            }
        }
        let kept: f64 = out.iter().map(|(_, w)| w).sum();
        for (_, w) in &mut out {
            *w /= kept;
        }
        (out, total)
    }

    /// Largest error of the mixture on the vacuum: weight sum against one
    /// and the occupations `n̄ⁿ/(1+n̄)ⁿ⁺¹` of the first levels.
    pub fn quadrature_defect(&self) -> f64 {
        let (mixture, total) = self.raw_mixture();
        let mut defect = (total - 1.0).abs();
        if self.nbar == 0.0 {
            return defect;
        }
        let lf = super::ln_factorials(CHECKED_LEVELS);
        for n in 0..CHECKED_LEVELS {
            let got: f64 = mixture
                .iter()
                .map(|(xi, w)| {
                    let r2 = xi.norm_sqr();
                    let ln = if n == 0 { -r2 } else { -r2 + n as f64 * r2.ln() - lf[n] };
                    w * ln.exp()
                })
                .sum();
            let exact = (n as f64 * self.nbar.ln() - (n + 1) as f64 * (1.0 + self.nbar).ln()).exp();
            defect = defect.max((got - exact).abs());
        }
        defect
    }

    /// Displacements and weights of the mixture; a grid too coarse for the
    /// noise level is refused.
    pub fn mixture(&self) -> Result<Vec<(C64, f64)>> {
        let defect = self.quadrature_defect();
        if defect > MAX_DEFECT {
            return Err(Error::Discretization { defect });
        }
        Ok(self.raw_mixture().0)
    }

    fn relocate_with(&self, e: &MeasurementElement, mixture: &[(C64, f64)]) -> Result<MeasurementElement> {
        match e.form() {
            ElementForm::Coherent { beta, scale } if self.nbar > 0.0 => {
                let space = e.space();
                let mut kets = DMatrix::<C64>::zeros(space.dim(), mixture.len());
                for (j, (xi, w)) in mixture.iter().enumerate() {
                    let ket = coherent_ket(space, beta - xi);
                    kets.column_mut(j).copy_from(&(ket.amplitudes() * C64::from((w * scale).sqrt())));
                }
                let acc = ComplexOperator::new(space, &kets * kets.adjoint())?;
                Ok(e.with_op(super::symmetrized(&acc), ElementForm::General))
            }
            ElementForm::Coherent { .. } => Ok(e.clone()),
            _ => Ok(e.with_op(self.adjoint_map(e.op())?, ElementForm::General)),
        }
    }

    fn displacer(&self, op: &ComplexOperator, mixture: &[(C64, f64)]) -> Displacer {
        let reach = mixture.iter().fold(0.0f64, |m, (xi, _)| m.max(xi.norm()));
        Displacer::new(op.space(), reach)
    }

    fn mix(&self, op: &ComplexOperator, adjoint: bool) -> Result<ComplexOperator> {
        if self.nbar == 0.0 {
            return Ok(op.clone());
        }
        let mixture = self.mixture()?;
        let disp = self.displacer(op, &mixture);
        let parts: Vec<ComplexOperator> = mixture
            .par_iter()
            .map(|&(xi, w)| {
                let d = disp.operator(xi);
                let dd = d.adjoint();
                let out = if adjoint { &(&dd * op) * &d } else { &(&d * op) * &dd };
                out.scale(w)
            })
            .collect();
        let mut acc = ComplexOperator::zeros(op.space());
        for p in &parts {
            acc = &acc + p;
        }
        Ok(acc)
    }
}

impl Channel for NoiseChannel {
    fn name(&self) -> String {
        format!("noise(nbar={})", self.nbar)
    }

    fn map(&self, op: &ComplexOperator) -> Result<ComplexOperator> {
        self.mix(op, false)
    }

    fn adjoint_map(&self, op: &ComplexOperator) -> Result<ComplexOperator> {
        self.mix(op, true)
    }

    /// `s π⁻¹|β⟩⟨β|` relocates to `∑ wᵢ s |β−ξᵢ⟩⟨β−ξᵢ|`, built from
    /// coherent kets directly.
    fn relocate_element(&self, e: &MeasurementElement) -> Result<MeasurementElement> {
        let mixture = if self.nbar > 0.0 { self.mixture()? } else { Vec::new() };
        self.relocate_with(e, &mixture)
    }

    fn relocate(&self, fam: &MeasurementFamily) -> Result<MeasurementFamily> {
        let mixture = if self.nbar > 0.0 { self.mixture()? } else { Vec::new() };
        fam.map_elements(format!("{}<{}", fam.name(), self.name()), |e| self.relocate_with(e, &mixture))
    }

    /// Noise variances add along the path.
    fn split(&self, f: f64) -> (Self, Self) {
        let part = |nbar: f64| Self::new(nbar).unwrap_or(Self { nbar, nodes: self.nodes });
        (part(self.nbar * f), part(self.nbar * (1.0 - f)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{GainChannel, LossChannel};
    use crate::fock::{coherent_state, number_state, DensityOperator, FockSpace};
    use crate::povm::OutcomeLabel;

    #[test]
    fn zero_noise_is_identity() {
        let s = FockSpace::with_dim(20).unwrap();
        let rho = DensityOperator::pure(&coherent_state(s, C64::new(0.3, 0.9)).unwrap(), "a").unwrap();
        let out = NoiseChannel::new(0.0).unwrap().apply(&rho).unwrap();
        assert_eq!(out.op(), rho.op());
    }

    #[test]
    fn mixture_weights_sum_to_one() {
        let m = NoiseChannel::new(1.3).unwrap().mixture().unwrap();
        let total: f64 = m.iter().map(|(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-14);
        let second: f64 = m.iter().map(|(xi, w)| w * xi.norm_sqr()).sum();
        assert!((second - 1.3).abs() < 1e-12);
    }

    #[test]
    fn vacuum_becomes_thermal() {
        let s = FockSpace::with_dim(50).unwrap();
        let rho = DensityOperator::pure(&number_state(s, 0).unwrap(), "0").unwrap();
        let out = NoiseChannel::new(1.0).unwrap().apply(&rho).unwrap();
        for (n, p) in out.populations().iter().enumerate().take(20) {
            assert!((p - 0.5f64.powi(n as i32 + 1)).abs() < 1e-9, "{n} {p}");
        }
        assert!(out.op().get(0, 1).norm() < 1e-10);
    }

    #[test]
    fn noise_equals_amplified_loss() {
        // Λ_noise(n̄) = gain(1+n̄) ∘ loss(1/(1+n̄)) on every input
        let s = FockSpace::with_dim(40).unwrap();
        let nbar = 0.5;
        let psi = coherent_state(s, C64::new(0.8, -0.6)).unwrap();
        let rho = DensityOperator::pure(&psi, "a").unwrap();
        let direct = NoiseChannel::new(nbar).unwrap().apply(&rho).unwrap();
        let lossy = LossChannel::new(1.0 / (1.0 + nbar)).unwrap().apply(&rho).unwrap();
        let oracle = GainChannel::new(1.0 + nbar).unwrap().apply(&lossy).unwrap();
        assert!((direct.op() - oracle.op()).max_abs() < 1e-9);
    }

    #[test]
    fn heterodyne_density_of_noisy_coherent_state() {
        let s = FockSpace::with_dim(40).unwrap();
        let (alpha, nbar) = (C64::new(0.7, 0.2), 0.5);
        let rho = DensityOperator::pure(&coherent_state(s, alpha).unwrap(), "a").unwrap();
        let ch = NoiseChannel::new(nbar).unwrap();
        let out = ch.apply(&rho).unwrap();
        for beta in [C64::new(0.0, 0.0), C64::new(1.0, -0.5), C64::new(-1.2, 1.1)] {
            let elem = MeasurementElement::coherent(s, OutcomeLabel::Pair(beta.re, beta.im), beta, 1.0 / PI, 1.0);
            let expected = (-(beta - alpha).norm_sqr() / (nbar + 1.0)).exp() / (PI * (nbar + 1.0));
            let receiver = elem.probability_density(&out).unwrap();
            let transmitter = ch.relocate_element(&elem).unwrap().probability_density(&rho).unwrap();
            assert!((receiver - expected).abs() < 1e-9);
            assert!((transmitter - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn coarse_grid_is_refused() {
        let coarse = NoiseChannel::with_nodes(2.0, 21).unwrap();
        assert!(matches!(coarse.mixture(), Err(Error::Discretization { .. })));
        let auto = NoiseChannel::new(2.0).unwrap();
        assert!(auto.nodes() > 21 && auto.quadrature_defect() < 1e-9);
        assert_eq!(NoiseChannel::new(0.5).unwrap().nodes(), 21);
    }

    #[test]
    fn invalid_parameters_are_refused() {
        assert!(NoiseChannel::new(-0.1).is_err());
        assert!(NoiseChannel::with_nodes(1.0, 0).is_err());
    }
}
