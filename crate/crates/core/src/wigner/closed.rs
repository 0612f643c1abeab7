//! Closed-form phase-space distributions for Gaussian states and paths,
//! in the coordinates `α = (q + ip)/√2`.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::{PhaseSpaceGrid, WignerGrid};
use crate::error::{Error, Result};

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive, got {x}")))
    }
}

/// Signal `(p′, q′)` plus `n̄` quanta of Gaussian noise:
/// `(π(2n̄+1))⁻¹ exp(−((q−q′)² + (p−p′)²)/(2n̄+1))`.
pub fn gaussian_wigner(p0: f64, q0: f64, nbar: f64, grid: &PhaseSpaceGrid) -> Result<WignerGrid> {
    if !(nbar >= 0.0 && nbar.is_finite()) {
        return Err(Error::Domain(format!("mean noise quanta must be non-negative, got {nbar}")));
    }
    grid.validate()?;
    let v = 2.0 * nbar + 1.0;
    Ok(grid.tabulate(|q, p| (-((q - q0).powi(2) + (p - p0).powi(2)) / v).exp() / (PI * v)))
}

/// Quadrature-squeezed vacuum `π⁻¹ exp(−ηq² − p²/η)`.
pub fn squeezed_vacuum_wigner(eta: f64, grid: &PhaseSpaceGrid) -> Result<WignerGrid> {
    positive("η", eta)?;
    grid.validate()?;
    Ok(grid.tabulate(|q, p| (-eta * q * q - p * p / eta).exp() / PI))
}

/// Squeezed vacuum after attenuation `L`: the squeezed part shrinks by
/// `1/√L` while vacuum noise refills the rest.
pub fn lossy_squeezed_wigner(eta: f64, attenuation: f64, grid: &PhaseSpaceGrid) -> Result<WignerGrid> {
    positive("η", eta)?;
    if !(attenuation >= 1.0 && attenuation.is_finite()) {
        return Err(Error::Domain(format!("attenuation must be at least 1, got {attenuation}")));
    }
    grid.validate()?;
    let l = attenuation;
    let (aq, ap) = (l - 1.0 + 1.0 / eta, l - 1.0 + eta);
    let norm = l / (PI * (aq * ap).sqrt());
    Ok(grid.tabulate(|q, p| norm * (-l * q * q / aq - l * p * p / ap).exp()))
}

/// Coherent receiver reading `(p_R, q_R)` looked at from the far end of a
/// path with attenuation `L`, as a function of `(q, p)` there.
pub fn noisy_receiver_wigner(p_r: f64, q_r: f64, attenuation: f64, grid: &PhaseSpaceGrid) -> Result<WignerGrid> {
    if !(attenuation >= 1.0 && attenuation.is_finite()) {
        return Err(Error::Domain(format!("attenuation must be at least 1, got {attenuation}")));
    }
    grid.validate()?;
    let l = attenuation;
    let v = 2.0 * l - 1.0;
    let s = l.sqrt();
    Ok(grid.tabulate(|q, p| l / (PI * v) * (-((q_r * s - q).powi(2) + (p_r * s - p).powi(2)) / v).exp()))
}

/// Density of the coherent reading `(p_R, q_R)` for a coherent state
/// `(p_T, q_T)` sent through attenuation `L`, per `dq dp`.
pub fn coherent_loss_probability(p_r: f64, q_r: f64, p_t: f64, q_t: f64, attenuation: f64) -> f64 {
    let s = attenuation.sqrt();
    (-((q_r - q_t / s).powi(2) + (p_r - p_t / s).powi(2)) / 2.0).exp() / (2.0 * PI)
}

/// Density of the coherent reading `(p_R, q_R)` for a squeezed vacuum sent
/// through attenuation `L`, per `dq dp`.
pub fn squeezed_loss_probability(p_r: f64, q_r: f64, eta: f64, attenuation: f64) -> f64 {
    let l = attenuation;
    let (aq, ap) = (2.0 * l - 1.0 + 1.0 / eta, 2.0 * l - 1.0 + eta);
    l / (PI * (aq * ap).sqrt()) * (-l * q_r * q_r / aq - l * p_r * p_r / ap).exp()
}

/// P distribution of signal plus `n̄ > 0` noise quanta, per `dq dp`.
pub fn thermal_p_distribution(p0: f64, q0: f64, nbar: f64, grid: &PhaseSpaceGrid) -> Result<WignerGrid> {
    positive("n̄", nbar)?;
    grid.validate()?;
    Ok(grid.tabulate(|q, p| (-((q - q0).powi(2) + (p - p0).powi(2)) / (2.0 * nbar)).exp() / (2.0 * PI * nbar)))
}

/// Wigner distribution from a P distribution sampled on the same grid:
/// convolution with `π⁻¹ exp(−Δq² − Δp²)`, done one axis at a time.
///
/// A P distribution with negative samples is outside the classical regime;
/// the transform is still returned but a warning is logged.
pub fn p_distribution_to_wigner(p_dist: &WignerGrid) -> WignerGrid {
    if !p_dist.is_classical() {
        log::warn!("P distribution has negative samples (min {:.3e})", p_dist.min());
    }
    let g = *p_dist.grid();
    let kernel = |axis: &[f64], step: f64| {
        DMatrix::from_fn(axis.len(), axis.len(), |a, b| (-(axis[a] - axis[b]).powi(2)).exp() * step / PI.sqrt())
    };
    let kq = kernel(&g.q_axis(), g.dq());
    let kp = kernel(&g.p_axis(), g.dp());
    let values = &kq * p_dist.values() * kp.transpose();
    WignerGrid { grid: g, values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wigner::overlap;

    #[test]
    fn closed_forms_integrate_to_one() {
        let g = PhaseSpaceGrid::default();
        for w in [
            gaussian_wigner(0.5, -1.0, 0.5, &g).unwrap(),
            squeezed_vacuum_wigner(0.5, &g).unwrap(),
            squeezed_vacuum_wigner(3.0, &g).unwrap(),
            lossy_squeezed_wigner(2.0, 10.0, &g).unwrap(),
            thermal_p_distribution(0.0, 0.3, 0.8, &g).unwrap(),
        ] {
            assert!((w.integral() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn unsqueezed_and_noiseless_limits_are_vacuum() {
        let g = PhaseSpaceGrid::square(4.0, 41).unwrap();
        let vac = gaussian_wigner(0.0, 0.0, 0.0, &g).unwrap();
        assert!(squeezed_vacuum_wigner(1.0, &g).unwrap().max_abs_difference(&vac).unwrap() < 1e-15);
        assert!(lossy_squeezed_wigner(0.4, 1.0, &g).unwrap().max_abs_difference(&squeezed_vacuum_wigner(0.4, &g).unwrap()).unwrap() < 1e-15);
    }

    #[test]
    fn heavy_loss_returns_squeezed_vacuum_to_vacuum() {
        let g = PhaseSpaceGrid::default();
        let vac = gaussian_wigner(0.0, 0.0, 0.0, &g).unwrap();
        for eta in [0.5, 2.0] {
            let w = lossy_squeezed_wigner(eta, 100.0, &g).unwrap();
            assert!(w.max_abs_difference(&vac).unwrap() < 1e-3);
        }
    }

    #[test]
    fn half_width_of_noisy_signal() {
        // exp(−q²/(2n̄+1)) is half its peak at q² = (2n̄+1) ln 2
        let g = PhaseSpaceGrid::new(-6.0, 6.0, -1.0, 1.0, 120_001, 3).unwrap();
        let w = gaussian_wigner(0.0, 0.0, 1.0, &g).unwrap();
        let peak = w.value(60_000, 1);
        let i = (60_000..g.nq).find(|&i| w.value(i, 1) < peak / 2.0).unwrap();
        let width = 2.0 * g.q(i);
        assert!((width - 2.884_053_773_201_766).abs() < 2.5e-4);
    }

    #[test]
    fn lossy_overlaps_reproduce_closed_probabilities() {
        let g = PhaseSpaceGrid::square(10.0, 251).unwrap();
        let l = 3.0;
        let (p_t, q_t) = (0.7, -1.1);
        let sent = gaussian_wigner(p_t, q_t, 0.0, &g).unwrap();
        for (p_r, q_r) in [(0.0, 0.0), (0.5, -0.4), (-1.0, 0.8)] {
            let meas = noisy_receiver_wigner(p_r, q_r, l, &g).unwrap();
            let expected = coherent_loss_probability(p_r, q_r, p_t, q_t, l);
            assert!((overlap(&meas, &sent).unwrap() - expected).abs() < 1e-10);
            let sq = squeezed_vacuum_wigner(2.0, &g).unwrap();
            assert!((overlap(&meas, &sq).unwrap() - squeezed_loss_probability(p_r, q_r, 2.0, l)).abs() < 1e-10);
        }
    }

    #[test]
    fn thermal_p_distribution_gives_noisy_wigner() {
        let g = PhaseSpaceGrid::default();
        let p = thermal_p_distribution(0.4, -0.6, 1.0, &g).unwrap();
        let w = p_distribution_to_wigner(&p);
        let oracle = gaussian_wigner(0.4, -0.6, 1.0, &g).unwrap();
        assert!(w.max_abs_difference(&oracle).unwrap() < 1e-10);
    }

    #[test]
    fn point_mass_gives_coherent_wigner() {
        let g = PhaseSpaceGrid::default();
        let (i, j) = (120, 90);
        let mut values = DMatrix::zeros(g.nq, g.np);
        values[(i, j)] = 1.0 / g.cell_area();
        let w = p_distribution_to_wigner(&WignerGrid::from_values(g, values).unwrap());
        let oracle = gaussian_wigner(g.p(j), g.q(i), 0.0, &g).unwrap();
        assert!(w.max_abs_difference(&oracle).unwrap() < 1e-12);
    }
}
