use rayon::prelude::*;
use serde::Serialize;

use super::{Channel, GainChannel, LossChannel};
use crate::error::{Error, Result};
use crate::fock::DensityOperator;
use crate::povm::MeasurementFamily;

/// Cell probabilities `w(r) Trace(σ(r) ρ(t))` with the cut at fraction `f`
/// of the path: the transmitter-side share acts on the states, the rest is
/// folded into the measurement.
pub fn represent_at_cut<C: Channel>(
    states: &[DensityOperator],
    fam: &MeasurementFamily,
    channel: &C,
    f: f64,
) -> Result<Vec<Vec<f64>>> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::Domain(format!("cut fraction must lie in [0, 1], got {f}")));
    }
    let (before, after) = channel.split(f);
    let relocated = after.relocate(fam)?;
    states
        .par_iter()
        .map(|rho| relocated.probabilities(&before.apply(rho)?))
        .collect()
}

/// The same table computed with the cut at both ends of the path.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutComparison {
    pub at_transmitter: Vec<Vec<f64>>,
    pub at_receiver: Vec<Vec<f64>>,
    pub max_discrepancy: f64,
}

impl CutComparison {
    pub fn agrees(&self, tol: f64) -> bool {
        self.max_discrepancy < tol
    }
}

pub fn compare_cut<C: Channel>(states: &[DensityOperator], fam: &MeasurementFamily, channel: &C) -> Result<CutComparison> {
    let at_transmitter = represent_at_cut(states, fam, channel, 0.0)?;
    let at_receiver = represent_at_cut(states, fam, channel, 1.0)?;
    let max_discrepancy = at_transmitter
        .iter()
        .flatten()
        .zip(at_receiver.iter().flatten())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(CutComparison { at_transmitter, at_receiver, max_discrepancy })
}

/// Loss folded into the measurement.
pub fn relocate_cut_loss(fam: &MeasurementFamily, ch: &LossChannel) -> Result<MeasurementFamily> {
    ch.relocate(fam)
}

/// Amplifier placed on either side of the cut.
pub fn relocate_cut_gain(states: &[DensityOperator], fam: &MeasurementFamily, ch: &GainChannel) -> Result<CutComparison> {
    compare_cut(states, fam, ch)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use num_complex::Complex64 as C64;

    use super::*;
    use crate::fock::{coherent_state, number_state, FockSpace};
    use crate::povm::{number_measurement, ElementForm, MeasurementElement, OutcomeLabel};

    fn number_states(s: FockSpace, ns: &[usize]) -> Vec<DensityOperator> {
        ns.iter()
            .map(|&n| DensityOperator::pure(&number_state(s, n).unwrap(), n.to_string()).unwrap())
            .collect()
    }

    #[test]
    fn loss_cut_can_sit_anywhere() {
        let s = FockSpace::with_dim(30).unwrap();
        let states = number_states(s, &[0, 1, 4, 9]);
        let fam = number_measurement(s);
        let ch = LossChannel::new(0.35).unwrap();
        let reference = represent_at_cut(&states, &fam, &ch, 0.0).unwrap();
        for f in [0.3, 0.7, 1.0] {
            let t = represent_at_cut(&states, &fam, &ch, f).unwrap();
            for (a, b) in reference.iter().flatten().zip(t.iter().flatten()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn loss_composition() {
        let s = FockSpace::with_dim(25).unwrap();
        let rho = DensityOperator::pure(&coherent_state(s, C64::new(1.1, 0.4)).unwrap(), "a").unwrap();
        let (p1, p2) = (0.6, 0.45);
        let twice = LossChannel::new(p2).unwrap().apply(&LossChannel::new(p1).unwrap().apply(&rho).unwrap()).unwrap();
        let once = LossChannel::new(p1 * p2).unwrap().apply(&rho).unwrap();
        assert!((twice.op() - once.op()).max_abs() < 1e-9);
    }

    #[test]
    fn gain_duality_for_number_states() {
        let s = FockSpace::with_dim(80).unwrap();
        let states = number_states(s, &[0, 1, 2]);
        let fam = number_measurement(s).restrict(FockSpace::with_dim(80).unwrap()).unwrap();
        let cmp = relocate_cut_gain(&states, &fam, &GainChannel::new(2.0).unwrap()).unwrap();
        assert!(cmp.agrees(1e-8), "{}", cmp.max_discrepancy);
    }

    #[test]
    fn gain_on_coherent_elements() {
        // (πG)⁻¹ exp(−|α − β/√G|²) on both sides
        let s = FockSpace::with_dim(60).unwrap();
        let g = 2.0;
        let alpha = C64::new(0.5, -0.3);
        let rho = DensityOperator::pure(&coherent_state(s, alpha).unwrap(), "a").unwrap();
        let ch = GainChannel::new(g).unwrap();
        let amplified = ch.apply(&rho).unwrap();
        for beta in [C64::new(0.0, 0.0), C64::new(1.0, 0.5), C64::new(-0.7, -1.4)] {
            let e = MeasurementElement::coherent(s, OutcomeLabel::Pair(beta.re, beta.im), beta, 1.0 / PI, 1.0);
            let moved = ch.relocate_element(&e).unwrap();
            assert!(matches!(moved.form(), ElementForm::Coherent { .. }));
            let expected = (-(alpha - beta / g.sqrt()).norm_sqr()).exp() / (PI * g);
            assert!((moved.probability_density(&rho).unwrap() - expected).abs() < 1e-10);
            assert!((e.probability_density(&amplified).unwrap() - expected).abs() < 1e-8);
        }
    }

    #[test]
    fn cut_fraction_out_of_range() {
        let s = FockSpace::with_dim(5).unwrap();
        let fam = number_measurement(s);
        let err = represent_at_cut(&number_states(s, &[0]), &fam, &LossChannel::new(0.5).unwrap(), 1.5);
        assert!(err.is_err());
    }
}
