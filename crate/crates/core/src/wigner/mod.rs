//! Phase-space picture: Wigner distributions of density and measurement
//! operators on a rectangular `(q, p)` grid.
//!
//! Densities use `W = (2π)⁻¹ ∫dy ⟨q−y/2|ρ|q+y/2⟩ e^{iyp}`; measurement
//! operators drop the `(2π)⁻¹`, so that `∫∫ W_σ W_ρ = Trace(σ ρ)` and the
//! identity maps to `1`.

mod closed;
mod export;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use closed::{
    coherent_loss_probability, gaussian_wigner, lossy_squeezed_wigner, noisy_receiver_wigner, p_distribution_to_wigner,
    squeezed_loss_probability, squeezed_vacuum_wigner, thermal_p_distribution,
};

use crate::error::{Error, Result};
use crate::fock::{hermite_functions, quadrature_ket, ComplexOperator, DensityOperator, Quadrature};
use crate::povm::MeasurementElement;
use crate::tolerance::WIGNER_EDGE_TOL;

/// Finest position step used for the `y` integral.
const MAX_STEP: f64 = 0.1;

/// Rectangular sampling grid, endpoints included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceGrid {
    pub q_min: f64,
    pub q_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nq: usize,
    pub np: usize,
}

impl Default for PhaseSpaceGrid {
    fn default() -> Self {
        Self { q_min: -8.0, q_max: 8.0, p_min: -8.0, p_max: 8.0, nq: 201, np: 201 }
    }
}

impl PhaseSpaceGrid {
    pub fn new(q_min: f64, q_max: f64, p_min: f64, p_max: f64, nq: usize, np: usize) -> Result<Self> {
        let g = Self { q_min, q_max, p_min, p_max, nq, np };
        g.validate()?;
        Ok(g)
    }

    /// Square grid `[−r, r]²` with `n` points per axis.
    pub fn square(radius: f64, n: usize) -> Result<Self> {
        Self::new(-radius, radius, -radius, radius, n, n)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.q_min, self.q_max, self.p_min, self.p_max].iter().all(|x| x.is_finite());
        if !finite || self.q_max <= self.q_min || self.p_max <= self.p_min || self.nq < 2 || self.np < 2 {
            return Err(Error::Domain(format!("degenerate phase-space grid {self:?}")));
        }
        Ok(())
    }

    pub fn dq(&self) -> f64 {
        (self.q_max - self.q_min) / (self.nq - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.np - 1) as f64
    }

    pub fn q(&self, i: usize) -> f64 {
        self.q_min + i as f64 * self.dq()
    }

    pub fn p(&self, j: usize) -> f64 {
        self.p_min + j as f64 * self.dp()
    }

    pub fn q_axis(&self) -> Vec<f64> {
        (0..self.nq).map(|i| self.q(i)).collect()
    }

    pub fn p_axis(&self) -> Vec<f64> {
        (0..self.np).map(|j| self.p(j)).collect()
    }

    pub fn cell_area(&self) -> f64 {
        self.dq() * self.dp()
    }

    /// Evaluate `f(q, p)` at every node.
    pub fn tabulate(&self, f: impl Fn(f64, f64) -> f64 + Sync) -> WignerGrid {
        let rows: Vec<Vec<f64>> = (0..self.nq)
            .into_par_iter()
            .map(|i| (0..self.np).map(|j| f(self.q(i), self.p(j))).collect())
            .collect();
        WignerGrid { grid: *self, values: DMatrix::from_fn(self.nq, self.np, |i, j| rows[i][j]) }
    }
}

/// Real function sampled on a [`PhaseSpaceGrid`]; `values[(i, j)]` sits at
/// `(q_i, p_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerGrid {
    grid: PhaseSpaceGrid,
    values: DMatrix<f64>,
}

impl WignerGrid {
    pub fn from_values(grid: PhaseSpaceGrid, values: DMatrix<f64>) -> Result<Self> {
        grid.validate()?;
        if values.nrows() != grid.nq || values.ncols() != grid.np {
            return Err(Error::GridMismatch);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    /// Riemann sum `∑ W dq dp`.
    pub fn integral(&self) -> f64 {
        self.values.sum() * self.grid.cell_area()
    }

    pub fn min(&self) -> f64 {
        self.values.min()
    }

    pub fn max(&self) -> f64 {
        self.values.max()
    }

    /// Largest magnitude on the outer rows and columns.
    pub fn edge_magnitude(&self) -> f64 {
        let (nq, np) = (self.grid.nq, self.grid.np);
        let mut m = 0.0f64;
        for i in 0..nq {
            m = m.max(self.values[(i, 0)].abs()).max(self.values[(i, np - 1)].abs());
        }
        for j in 0..np {
            m = m.max(self.values[(0, j)].abs()).max(self.values[(nq - 1, j)].abs());
        }
        m
    }

    /// Non-negative within `1e-9` everywhere.
    pub fn is_classical(&self) -> bool {
        self.min() >= -1e-9
    }

    /// `∫ W dp` at each `q` node.
    pub fn marginal_q(&self) -> Vec<f64> {
        (0..self.grid.nq).map(|i| self.values.row(i).sum() * self.grid.dp()).collect()
    }

    /// `∫ W dq` at each `p` node.
    pub fn marginal_p(&self) -> Vec<f64> {
        (0..self.grid.np).map(|j| self.values.column(j).sum() * self.grid.dq()).collect()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self { grid: self.grid, values: &self.values * factor }
    }

    pub fn max_abs_difference(&self, other: &WignerGrid) -> Result<f64> {
        same_grid(self, other)?;
        Ok((&self.values - &other.values).amax())
    }
}

fn same_grid(a: &WignerGrid, b: &WignerGrid) -> Result<()> {
    if a.grid != b.grid {
        Err(Error::GridMismatch)
    } else {
        Ok(())
    }
}

/// `∫∫ W₁ W₂ dq dp` as a Riemann sum.
pub fn overlap(w1: &WignerGrid, w2: &WignerGrid) -> Result<f64> {
    same_grid(w1, w2)?;
    Ok(w1.values.component_mul(&w2.values).sum() * w1.grid.cell_area())
}

/// Position lattice shared by every row of the grid: a step that divides
/// the grid spacing, covering the support of the retained levels.
struct Lattice {
    step: f64,
    stride: usize,
    /// Lattice index of grid row `i` is `offset + i·stride`.
    offset: i64,
    len: usize,
    origin: f64,
}

impl Lattice {
    fn new(grid: &PhaseSpaceGrid, dim: usize) -> Self {
        let dq = grid.dq();
        let stride = (dq / MAX_STEP).ceil().max(1.0) as usize;
        let step = dq / stride as f64;
        let reach = (2.0 * dim as f64 + 1.0).sqrt() + 6.0;
        let lo = ((-reach - grid.q_min) / step).floor() as i64;
        let hi = ((reach - grid.q_min) / step).ceil() as i64;
        let hi = hi.max(lo + 1);
        Self { step, stride, offset: -lo, len: (hi - lo + 1) as usize, origin: grid.q_min + lo as f64 * step }
    }

    fn x(&self, k: usize) -> f64 {
        self.origin + k as f64 * self.step
    }
}

/// `(2π)⁻¹ ∫dy ⟨q−y/2|A|q+y/2⟩ e^{iyp}` for a Hermitian operator, on the grid.
pub fn wigner_transform(op: &ComplexOperator, grid: &PhaseSpaceGrid) -> Result<WignerGrid> {
    grid.validate()?;
    let dim = op.dim();
    let lat = Lattice::new(grid, dim);
    let mut psi = DMatrix::zeros(dim, lat.len);
    for k in 0..lat.len {
        let h = hermite_functions(lat.x(k), dim);
        for (n, v) in h.into_iter().enumerate() {
            psi[(n, k)] = v;
        }
    }
    let psi_c = psi.map(|v| C64::new(v, 0.0));
    // ⟨x_a|A|x_b⟩ on the lattice
    let kernel = psi_c.transpose() * (op.entries() * &psi_c);
    let span = lat.len as i64;
    let max_shift = lat.len;
    let phases: Vec<Vec<C64>> = (0..grid.np)
        .map(|j| {
            let p = grid.p(j);
            (0..max_shift).map(|k| C64::from_polar(1.0, 2.0 * k as f64 * lat.step * p)).collect()
        })
        .collect();
    let prefactor = lat.step / PI;
    let rows: Vec<Vec<f64>> = (0..grid.nq)
        .into_par_iter()
        .map(|i| {
            let centre = lat.offset + (i * lat.stride) as i64;
            let mut f = Vec::new();
            let mut k = 0i64;
            loop {
                let (a, b) = (centre - k, centre + k);
                if a < 0 || b >= span {
                    break;
                }
                f.push(kernel[(a as usize, b as usize)]);
                k += 1;
            }
            (0..grid.np)
                .map(|j| {
                    if f.is_empty() {
                        return 0.0;
                    }
                    let ph = &phases[j];
                    let mut acc = f[0].re;
                    for (k, fk) in f.iter().enumerate().skip(1) {
                        acc += 2.0 * (fk * ph[k]).re;
                    }
                    prefactor * acc
                })
                .collect()
        })
        .collect();
    Ok(WignerGrid { grid: *grid, values: DMatrix::from_fn(grid.nq, grid.np, |i, j| rows[i][j]) })
}

/// Wigner distribution of a density operator. Fails when the distribution
/// has not decayed to the grid edge.
pub fn wigner_of_density(rho: &DensityOperator, grid: &PhaseSpaceGrid) -> Result<WignerGrid> {
    let w = wigner_transform(rho.op(), grid)?;
    let edge = w.edge_magnitude();
    if edge > WIGNER_EDGE_TOL {
        return Err(Error::Coverage { defect: edge });
    }
    Ok(w)
}

/// Wigner distribution of a measurement element (per unit weight), scaled
/// so that its overlap with a density Wigner function is `Trace(σ ρ)`.
/// Infinite-trace elements are allowed; no edge check is made.
pub fn wigner_of_measurement(elem: &MeasurementElement, grid: &PhaseSpaceGrid) -> Result<WignerGrid> {
    Ok(wigner_transform(elem.op(), grid)?.scale(2.0 * PI))
}

/// `⟨q|ρ|q⟩` of the truncated operator.
pub fn position_density(rho: &DensityOperator, q: f64) -> f64 {
    let ket = quadrature_ket(rho.space(), Quadrature::Position, q);
    rho.op().expectation(&ket).map(|z| z.re).unwrap_or(0.0)
}

/// `⟨p|ρ|p⟩` of the truncated operator.
pub fn momentum_density(rho: &DensityOperator, p: f64) -> f64 {
    let ket = quadrature_ket(rho.space(), Quadrature::Momentum, p);
    rho.op().expectation(&ket).map(|z| z.re).unwrap_or(0.0)
}
