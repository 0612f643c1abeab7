use rayon::prelude::*;

use super::{ElementForm, MeasurementElement, MeasurementFamily, OutcomeLabel};
use crate::error::{Error, Result};
use crate::fock::{check_same, operator_sqrt, trace_product, ComplexOperator, DensityOperator};
use crate::tolerance::PROB_FLOOR;

/// `(√σ ρ √σ / P, P)` with `P = Trace(σ ρ)`.
pub fn minimally_invasive_update(rho: &DensityOperator, elem: &MeasurementElement) -> Result<(DensityOperator, f64)> {
    check_same(&rho.space(), &elem.space())?;
    let p = elem.probability_density(rho)?;
    if p <= PROB_FLOOR {
        return Err(Error::ZeroProbability { probability: p });
    }
    let root = operator_sqrt(elem.op())?;
    let post = (&(&root * rho.op()) * &root).scale(1.0 / p);
    let post = symmetrize(&post);
    Ok((DensityOperator::new(post, rho.label())?, p))
}

fn symmetrize(a: &ComplexOperator) -> ComplexOperator {
    (a + &a.adjoint()).scale(0.5)
}

/// Two measurements in sequence, `σ(r₁, r₂) = √σ₁(r₁) σ₂(r₂) √σ₁(r₁)`,
/// evaluated lazily so that large outcome products need not be stored.
#[derive(Clone, Debug)]
pub struct SequentialComposition {
    first: MeasurementFamily,
    second: MeasurementFamily,
    roots: Vec<ComplexOperator>,
}

impl SequentialComposition {
    pub fn new(first: MeasurementFamily, second: MeasurementFamily) -> Result<Self> {
        check_same(&first.space(), &second.space())?;
        let roots: Result<Vec<_>> = first
            .elements()
            .par_iter()
            .map(|e| match e.form() {
                ElementForm::Number(_) => Ok(e.op().clone()),
                _ => operator_sqrt(e.op()),
            })
            .collect();
        Ok(Self { first, second, roots: roots? })
    }

    pub fn first(&self) -> &MeasurementFamily {
        &self.first
    }

    pub fn second(&self) -> &MeasurementFamily {
        &self.second
    }

    /// `√σ₁(r₁)`.
    pub fn root(&self, i: usize) -> &ComplexOperator {
        &self.roots[i]
    }

    pub fn len(&self) -> usize {
        self.first.len() * self.second.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn certified_dim(&self) -> usize {
        self.first.certified_dim().min(self.second.certified_dim())
    }

    /// Element for outcome `(r₁ = i, r₂ = j)`.
    pub fn element(&self, i: usize, j: usize) -> MeasurementElement {
        let a = &self.first.elements()[i];
        let b = &self.second.elements()[j];
        let root = &self.roots[i];
        let op = symmetrize(&(&(root * b.op()) * root));
        MeasurementElement::from_parts(
            OutcomeLabel::Joint(Box::new(a.outcome().clone()), Box::new(b.outcome().clone())),
            op,
            a.weight() * b.weight(),
            ElementForm::General,
        )
    }

    /// `∑ w₁ √σ₁ (∑ w₂ σ₂) √σ₁` without materializing the product family.
    pub fn weighted_sum(&self) -> ComplexOperator {
        let inner = self.second.weighted_sum();
        let parts: Vec<ComplexOperator> = self
            .roots
            .par_iter()
            .zip(self.first.elements())
            .map(|(root, e)| (&(root * &inner) * root).scale(e.weight()))
            .collect();
        let mut acc = ComplexOperator::zeros(self.first.space());
        for p in &parts {
            acc = &acc + p;
        }
        acc
    }

    /// Completeness defect on the lowest `certified_dim` levels.
    pub fn completeness_defect(&self, certified_dim: usize) -> f64 {
        let sum = self.weighted_sum();
        let d = certified_dim.min(sum.dim());
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((sum.get(i, j) - num_complex::Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    /// `Trace(σ(r₁, r₂) ρ)`.
    pub fn probability_density(&self, i: usize, j: usize, rho: &DensityOperator) -> Result<f64> {
        let root = &self.roots[i];
        let inner = &(root * rho.op()) * root;
        Ok(trace_product(self.second.elements()[j].op(), &inner)?.re)
    }

    pub fn into_family(self, name: impl Into<String>) -> Result<MeasurementFamily> {
        let (n1, n2) = (self.first.len(), self.second.len());
        let elements: Vec<_> = (0..n1 * n2).into_par_iter().map(|k| self.element(k / n2, k % n2)).collect();
        MeasurementFamily::new(name, self.first.space(), elements, self.certified_dim())
    }
}

/// Materialized sequential composition over the full outcome product.
pub fn compose_sequential(first: &MeasurementFamily, second: &MeasurementFamily) -> Result<MeasurementFamily> {
    let name = format!("{}>{}", first.name(), second.name());
    SequentialComposition::new(first.clone(), second.clone())?.into_family(name)
}
