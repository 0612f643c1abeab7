use std::f64::consts::PI;

use rayon::prelude::*;

use super::{AmplitudeGrid, ElementForm, MeasurementElement, MeasurementFamily, OutcomeLabel, RealGrid};
use crate::error::Result;
use crate::fock::{number_state, ComplexOperator, FockSpace, Quadrature, QuadratureBasis, SqueezedKets};

/// `{ |M⟩⟨M| }` for every retained level. Complete on the whole space.
pub fn number_measurement(space: FockSpace) -> MeasurementFamily {
    let elements = (0..space.dim())
        .map(|m| {
            let ket = number_state(space, m).expect("level inside the space");
            MeasurementElement::from_parts(
                OutcomeLabel::Index(m),
                ComplexOperator::projector(&ket),
                1.0,
                ElementForm::Number(m),
            )
        })
        .collect();
    MeasurementFamily::new("number", space, elements, space.dim()).expect("non-empty family")
}

/// The trivial one-outcome family `{ I }`.
pub fn identity_measurement(space: FockSpace) -> MeasurementFamily {
    let e = MeasurementElement::from_parts(
        OutcomeLabel::Index(0),
        ComplexOperator::identity(space),
        1.0,
        ElementForm::General,
    );
    MeasurementFamily::new("identity", space, vec![e], space.dim()).expect("non-empty family")
}

/// Coherent-state measurement `π⁻¹|β⟩⟨β|` on an amplitude grid, each
/// element weighted by the cell area.
///
/// Completeness is certified on the lower half of the levels; a grid that
/// does not reach far enough out fails with a coverage error.
pub fn heterodyne_measurement(space: FockSpace, grid: &AmplitudeGrid) -> Result<MeasurementFamily> {
    grid.validate()?;
    let area = grid.cell_area();
    let elements = grid
        .nodes()
        .into_par_iter()
        .map(|beta| MeasurementElement::coherent(space, OutcomeLabel::Pair(beta.re, beta.im), beta, 1.0 / PI, area))
        .collect();
    MeasurementFamily::new("heterodyne", space, elements, (space.dim() / 2).max(1))?.require_complete()
}

/// Exact quadrature measurement realized on the discrete basis of the
/// truncated `q` (or `p`) operator. Complete on the whole space.
pub fn quadrature_measurement(space: FockSpace, quadrature: Quadrature) -> MeasurementFamily {
    let basis = QuadratureBasis::new(space, quadrature);
    let elements = basis
        .kets()
        .par_iter()
        .zip(basis.nodes().par_iter().zip(basis.weights()))
        .map(|(ket, (&x, &w))| {
            MeasurementElement::from_parts(OutcomeLabel::Real(x), ComplexOperator::projector(ket), w, ElementForm::General)
        })
        .collect();
    let name = match quadrature {
        Quadrature::Position => "position",
        Quadrature::Momentum => "momentum",
    };
    MeasurementFamily::new(name, space, elements, space.dim()).expect("non-empty family")
}

/// Inexact position measurement `√(η/π) exp(−η(q_R − q)²)` as a function
/// of the position operator, one element per grid point `q_R`, weighted by
/// the grid spacing.
pub fn gaussian_position_measurement(space: FockSpace, eta: f64, grid: &RealGrid) -> Result<MeasurementFamily> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(crate::Error::Domain(format!("η must be positive, got {eta}")));
    }
    grid.validate()?;
    let basis = QuadratureBasis::new(space, Quadrature::Position);
    let elements = grid
        .nodes()
        .into_par_iter()
        .map(|q_r| gaussian_position_element(&basis, eta, q_r, grid.spacing()))
        .collect();
    MeasurementFamily::new(format!("gaussian-position(eta={eta})"), space, elements, (space.dim() / 2).max(1))?
        .require_complete()
}

/// Single element of the inexact position measurement at `q_R`.
pub fn gaussian_position_element(basis: &QuadratureBasis, eta: f64, q_r: f64, weight: f64) -> MeasurementElement {
    let norm = (eta / PI).sqrt();
    let op = basis.function(|q| norm * (-eta * (q_r - q).powi(2)).exp());
    MeasurementElement::from_parts(OutcomeLabel::Real(q_r), op, weight, ElementForm::General)
}

/// Squeezed-state measurement `(2π)⁻¹|p_R, q_R, η⟩⟨p_R, q_R, η|` over the
/// product of a position and a momentum grid, weighted by `dq dp`.
pub fn displaced_squeezed_family(
    space: FockSpace,
    eta: f64,
    q_grid: &RealGrid,
    p_grid: &RealGrid,
) -> Result<MeasurementFamily> {
    q_grid.validate()?;
    p_grid.validate()?;
    let q_nodes = q_grid.nodes();
    let p_nodes = p_grid.nodes();
    let reach = q_nodes.iter().chain(&p_nodes).fold(0.0f64, |m, x| m.max(x.abs()));
    let kets = SqueezedKets::new(space, eta, reach)?;
    let weight = q_grid.spacing() * p_grid.spacing();
    let pairs: Vec<(f64, f64)> = q_nodes.iter().flat_map(|&q| p_nodes.iter().map(move |&p| (q, p))).collect();
    let elements = pairs
        .into_par_iter()
        .map(|(q, p)| {
            let op = ComplexOperator::projector(&kets.ket(p, q)).scale(1.0 / (2.0 * PI));
            MeasurementElement::from_parts(OutcomeLabel::Pair(q, p), op, weight, ElementForm::General)
        })
        .collect();
    MeasurementFamily::new(format!("squeezed(eta={eta})"), space, elements, (space.dim() / 2).max(1))
}
