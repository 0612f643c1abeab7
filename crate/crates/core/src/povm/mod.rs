//! Measurement families: weighted sets of Hermitian non-negative operators
//! that sum to the identity on a certified low-energy subspace.

mod families;
mod grids;
mod sequential;

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{check_same, coherent_ket, trace_product, ComplexOperator, DensityOperator, FockSpace, OperatorJson};
use crate::tolerance::{COMPLETENESS_TOL, EIG_FLOOR, HERM_TOL};

pub use families::{
    displaced_squeezed_family, gaussian_position_element, gaussian_position_measurement, heterodyne_measurement,
    identity_measurement, number_measurement, quadrature_measurement,
};
pub use grids::{AmplitudeGrid, RealGrid};
pub use sequential::{compose_sequential, minimally_invasive_update, SequentialComposition};

/// Label of a measurement result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutcomeLabel {
    Index(usize),
    Real(f64),
    Pair(f64, f64),
    Direction([f64; 3]),
    Joint(Box<OutcomeLabel>, Box<OutcomeLabel>),
}

impl fmt::Display for OutcomeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Index(n) => write!(f, "{n}"),
            Self::Real(x) => write!(f, "{x:.16e}"),
            Self::Pair(a, b) => write!(f, "({a:.16e} {b:.16e})"),
            Self::Direction([x, y, z]) => write!(f, "[{x:.16e} {y:.16e} {z:.16e}]"),
            Self::Joint(a, b) => write!(f, "{a}|{b}"),
        }
    }
}

/// Structure of an element that lets channels act on it in closed form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ElementForm {
    General,
    /// `|M⟩⟨M|`.
    Number(usize),
    /// `scale · |β⟩⟨β|` built from the truncated coherent ket.
    Coherent { beta: C64, scale: f64 },
}

/// One measurement operator `σ(r)` with its outcome and cell weight.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementElement {
    outcome: OutcomeLabel,
    op: ComplexOperator,
    weight: f64,
    form: ElementForm,
}

impl MeasurementElement {
    pub fn new(outcome: OutcomeLabel, op: ComplexOperator, weight: f64) -> Result<Self> {
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(Error::Domain(format!("element weight must be positive, got {weight}")));
        }
        let scale = op.max_abs().max(1.0);
        let defect = op.hermiticity_defect();
        if defect > HERM_TOL * scale {
            return Err(Error::NotHermitian { defect });
        }
        let min = op.min_eigenvalue();
        if min < -EIG_FLOOR * scale {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        Ok(Self { outcome, op, weight, form: ElementForm::General })
    }

    pub(crate) fn from_parts(outcome: OutcomeLabel, op: ComplexOperator, weight: f64, form: ElementForm) -> Self {
        Self { outcome, op, weight, form }
    }

    /// `scale · |β⟩⟨β|` on the space.
    pub fn coherent(space: FockSpace, outcome: OutcomeLabel, beta: C64, scale: f64, weight: f64) -> Self {
        let ket = coherent_ket(space, beta);
        let op = ComplexOperator::projector(&ket).scale(scale);
        Self { outcome, op, weight, form: ElementForm::Coherent { beta, scale } }
    }

    pub fn outcome(&self) -> &OutcomeLabel {
        &self.outcome
    }

    pub fn op(&self) -> &ComplexOperator {
        &self.op
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn form(&self) -> ElementForm {
        self.form
    }

    pub fn space(&self) -> FockSpace {
        self.op.space()
    }

    /// `Trace(σ ρ)`, the outcome density per unit weight.
    pub fn probability_density(&self, rho: &DensityOperator) -> Result<f64> {
        Ok(trace_product(&self.op, rho.op())?.re)
    }

    pub fn with_op(&self, op: ComplexOperator, form: ElementForm) -> Self {
        Self { outcome: self.outcome.clone(), op, weight: self.weight, form }
    }

    pub fn restrict(&self, space: FockSpace) -> Result<Self> {
        let form = match self.form {
            ElementForm::Number(m) if m >= space.dim() => ElementForm::General,
            other => other,
        };
        Ok(Self { outcome: self.outcome.clone(), op: self.op.restrict(space)?, weight: self.weight, form })
    }
}

/// Ordered measurement family with its completeness defect on the lowest
/// `certified_dim` levels.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementFamily {
    name: String,
    space: FockSpace,
    elements: Vec<MeasurementElement>,
    certified_dim: usize,
    completeness_defect: f64,
}

impl MeasurementFamily {
    /// Assembles a family and measures its completeness defect.
    pub fn new(
        name: impl Into<String>,
        space: FockSpace,
        elements: Vec<MeasurementElement>,
        certified_dim: usize,
    ) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::Domain("a measurement family needs at least one element".into()));
        }
        for e in &elements {
            check_same(&space, &e.space())?;
        }
        let certified_dim = certified_dim.clamp(1, space.dim());
        let mut fam = Self { name: name.into(), space, elements, certified_dim, completeness_defect: 0.0 };
        fam.completeness_defect = fam.measure_completeness();
        Ok(fam)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn elements(&self) -> &[MeasurementElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn certified_dim(&self) -> usize {
        self.certified_dim
    }

    pub fn completeness_defect(&self) -> f64 {
        self.completeness_defect
    }

    pub fn weights(&self) -> Vec<f64> {
        self.elements.iter().map(|e| e.weight).collect()
    }

    pub fn outcomes(&self) -> Vec<OutcomeLabel> {
        self.elements.iter().map(|e| e.outcome.clone()).collect()
    }

    /// `∑ w σ`.
    pub fn weighted_sum(&self) -> ComplexOperator {
        let n = self.space.dim();
        let mut acc = DMatrix::<C64>::zeros(n, n);
        for e in &self.elements {
            acc += e.op.entries() * C64::new(e.weight, 0.0);
        }
        ComplexOperator::new(self.space, acc).expect("sum of finite operators is finite")
    }

    fn measure_completeness(&self) -> f64 {
        let sum = self.weighted_sum();
        let d = self.certified_dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((sum.get(i, j) - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    /// Same elements with a different certified subspace.
    pub fn with_certified_dim(mut self, certified_dim: usize) -> Self {
        self.certified_dim = certified_dim.clamp(1, self.space.dim());
        self.completeness_defect = self.measure_completeness();
        self
    }

    /// Fails with a coverage error when the defect exceeds the shared
    /// completeness tolerance.
    pub fn require_complete(self) -> Result<Self> {
        if self.completeness_defect > COMPLETENESS_TOL {
            Err(Error::Coverage { defect: self.completeness_defect })
        } else {
            Ok(self)
        }
    }

    /// Cell probabilities `w(r) · Trace(σ(r) ρ)`, in outcome order.
    pub fn probabilities(&self, rho: &DensityOperator) -> Result<Vec<f64>> {
        check_same(&self.space, &rho.space())?;
        self.elements
            .par_iter()
            .map(|e| Ok(e.weight * e.probability_density(rho)?))
            .collect()
    }

    /// Family with every element replaced by `f(element)`; the completeness
    /// defect is re-measured.
    pub fn map_elements(
        &self,
        name: impl Into<String>,
        f: impl Fn(&MeasurementElement) -> Result<MeasurementElement> + Send + Sync,
    ) -> Result<Self> {
        let elements: Result<Vec<_>> = self.elements.par_iter().map(f).collect();
        Self::new(name, self.space, elements?, self.certified_dim)
    }

    /// Family on a smaller space, each operator cut to its top-left block.
    pub fn restrict(&self, space: FockSpace) -> Result<Self> {
        if space.dim() > self.space.dim() {
            return Err(Error::DimensionMismatch { expected: self.space.dim(), found: space.dim() });
        }
        let elements: Result<Vec<_>> = self.elements.iter().map(|e| e.restrict(space)).collect();
        Self::new(self.name.clone(), space, elements?, self.certified_dim.min(space.dim()))
    }

    /// Family without the element at `index`, used to exercise failure
    /// reporting.
    pub fn without(&self, index: usize) -> Result<Self> {
        let mut elements = self.elements.clone();
        if index >= elements.len() {
            return Err(Error::OutOfRange { level: index, dim: elements.len() });
        }
        elements.remove(index);
        Self::new(self.name.clone(), self.space, elements, self.certified_dim)
    }
}

/// Per-element and whole-family checks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyReport {
    pub name: String,
    pub elements: usize,
    pub max_hermiticity_defect: f64,
    pub worst_hermiticity_element: Option<usize>,
    pub min_eigenvalue: f64,
    pub worst_eigenvalue_element: Option<usize>,
    pub certified_dim: usize,
    pub completeness_defect: f64,
    pub passed: bool,
}

/// Reports Hermiticity and positivity defects per element and the
/// completeness defect. Ties go to the earliest element.
pub fn validate_family(fam: &MeasurementFamily) -> FamilyReport {
    let stats: Vec<(f64, f64, f64)> = fam
        .elements
        .par_iter()
        .map(|e| (e.op.hermiticity_defect(), e.op.min_eigenvalue(), e.op.max_abs().max(1.0)))
        .collect();
    let mut herm = (0.0f64, None);
    let mut eig = (f64::INFINITY, None);
    let mut ok = true;
    for (i, &(h, m, scale)) in stats.iter().enumerate() {
        if h > herm.0 {
            herm = (h, Some(i));
        }
        if m < eig.0 {
            eig = (m, Some(i));
        }
        ok &= h <= HERM_TOL * scale && m >= -EIG_FLOOR * scale;
    }
    FamilyReport {
        name: fam.name.clone(),
        elements: fam.len(),
        max_hermiticity_defect: herm.0,
        worst_hermiticity_element: herm.1,
        min_eigenvalue: eig.0,
        worst_eigenvalue_element: eig.1,
        certified_dim: fam.certified_dim,
        completeness_defect: fam.completeness_defect,
        passed: ok && fam.completeness_defect < COMPLETENESS_TOL,
    }
}

/// Serialized family: elements reference operators by position in
/// `operators`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FamilyJson {
    pub name: String,
    pub dim: usize,
    pub certified_dim: usize,
    pub completeness_defect: f64,
    pub elements: Vec<ElementJson>,
    pub operators: Vec<OperatorJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ElementJson {
    pub outcome: OutcomeLabel,
    pub weight: f64,
    pub operator_ref: usize,
}

impl From<&MeasurementFamily> for FamilyJson {
    fn from(fam: &MeasurementFamily) -> Self {
        Self {
            name: fam.name.clone(),
            dim: fam.space.dim(),
            certified_dim: fam.certified_dim,
            completeness_defect: fam.completeness_defect,
            elements: fam
                .elements
                .iter()
                .enumerate()
                .map(|(i, e)| ElementJson { outcome: e.outcome.clone(), weight: e.weight, operator_ref: i })
                .collect(),
            operators: fam.elements.iter().map(|e| e.op.to_json()).collect(),
        }
    }
}

impl FamilyJson {
    pub fn into_family(self, space: FockSpace) -> Result<MeasurementFamily> {
        if space.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: self.dim });
        }
        let ops: Result<Vec<ComplexOperator>> = self.operators.into_iter().map(|o| o.into_operator(space)).collect();
        let ops = ops?;
        let elements: Result<Vec<_>> = self
            .elements
            .into_iter()
            .map(|e| {
                let op = ops
                    .get(e.operator_ref)
                    .ok_or_else(|| Error::Format(format!("operator_ref {} out of range", e.operator_ref)))?;
                MeasurementElement::new(e.outcome, op.clone(), e.weight)
            })
            .collect();
        MeasurementFamily::new(self.name, space, elements?, self.certified_dim)
    }
}
