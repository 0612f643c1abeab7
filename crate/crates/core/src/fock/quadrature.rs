use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{ComplexOperator, FockSpace, StateVector};

/// Which quadrature of the oscillator, with `a = (q + ip)/√2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    Position,
    Momentum,
}

/// `(a, a†)` with `a[n−1, n] = √n`.
pub fn ladder_operators(space: FockSpace) -> (ComplexOperator, ComplexOperator) {
    let n = space.dim();
    let a = DMatrix::from_fn(n, n, |r, c| if c == r + 1 { C64::new((c as f64).sqrt(), 0.0) } else { C64::new(0.0, 0.0) });
    let ad = a.adjoint();
    (ComplexOperator::from_parts(space, a), ComplexOperator::from_parts(space, ad))
}

pub fn number_operator(space: FockSpace) -> ComplexOperator {
    let diag: Vec<f64> = (0..space.dim()).map(|n| n as f64).collect();
    ComplexOperator::from_diagonal(space, &diag).expect("diagonal has the space dimension")
}

/// `q = (a + a†)/√2` or `p = i(a† − a)/√2`, truncated.
pub fn quadrature_operator(space: FockSpace, quadrature: Quadrature) -> ComplexOperator {
    let (a, ad) = ladder_operators(space);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match quadrature {
        Quadrature::Position => (&a + &ad).scale(s),
        Quadrature::Momentum => {
            let d = (&ad - &a).scale(s);
            ComplexOperator::from_parts(space, d.into_entries() * C64::new(0.0, 1.0))
        }
    }
}

/// Normalized Hermite functions `ψ_0(x) … ψ_{count−1}(x)`.
///
/// The three-term recurrence runs on a rescaled sequence so that large `|x|`
/// does not underflow `ψ_0` before higher levels grow back.
pub fn hermite_functions(x: f64, count: usize) -> Vec<f64> {
    let mut out = vec![0.0; count];
    if count == 0 {
        return out;
    }
    let mut log_scale = -0.5 * x * x - 0.25 * PI.ln();
    let (mut prev2, mut prev) = (0.0f64, 1.0f64);
    out[0] = log_scale.exp();
    for n in 1..count {
        let nf = n as f64;
        let mut cur = (2.0 / nf).sqrt() * x * prev - ((nf - 1.0) / nf).sqrt() * prev2;
        if cur.abs() > 1e150 {
            cur *= 1e-150;
            prev *= 1e-150;
            log_scale += 150.0 * 10f64.ln();
        }
        prev2 = prev;
        prev = cur;
        out[n] = cur * log_scale.exp();
    }
    out
}

/// Gauss–Hermite nodes and weights for `∫ e^{−x²} f(x) dx`, ascending.
///
/// Golub–Welsch: the Jacobi matrix is the truncated position operator.
pub fn gauss_hermite(count: usize) -> (Vec<f64>, Vec<f64>) {
    let j = DMatrix::from_fn(count, count, |r, c| {
        if c == r + 1 {
            (c as f64 / 2.0).sqrt()
        } else if r == c + 1 {
            (r as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = j.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..count)
        .map(|k| (eig.eigenvalues[k], PI.sqrt() * eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Number-basis amplitudes `⟨n|x⟩` of the (non-normalizable) quadrature
/// eigenket, truncated to the space.
///
/// Position: `ψ_n(x)`. Momentum: `iⁿ ψ_n(p)`, which matches
/// `⟨q|p⟩ = e^{ipq}/√(2π)`.
pub fn quadrature_ket(space: FockSpace, quadrature: Quadrature, x: f64) -> StateVector {
    let h = hermite_functions(x, space.dim());
    let amps = DVector::from_iterator(
        space.dim(),
        h.iter().enumerate().map(|(n, &v)| match quadrature {
            Quadrature::Position => C64::new(v, 0.0),
            Quadrature::Momentum => i_pow(n) * v,
        }),
    );
    StateVector::unnormalized(space, amps)
}

pub(crate) fn i_pow(n: usize) -> C64 {
    match n % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// `⟨x|ψ⟩` for the given quadrature.
pub fn wavefunction(psi: &StateVector, quadrature: Quadrature, x: f64) -> C64 {
    let ket = quadrature_ket(psi.space(), quadrature, x);
    ket.amplitudes().dotc(psi.amplitudes())
}

/// Discrete quadrature basis obtained by diagonalizing the truncated `q`
/// (or `p`) operator.
///
/// The nodes are its eigenvalues, the surrogate kets `|x_k⟩` carry
/// `⟨x_k|ψ⟩ ≈ ψ(x_k)`, and `∑ λ_k |x_k⟩⟨x_k| = I` holds exactly on the
/// truncated space.
#[derive(Clone, Debug)]
pub struct QuadratureBasis {
    space: FockSpace,
    quadrature: Quadrature,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    kets: Vec<StateVector>,
}

impl QuadratureBasis {
    pub fn new(space: FockSpace, quadrature: Quadrature) -> Self {
        // Both quadratures share the spectrum of the real Jacobi matrix.
        let (nodes, _) = gauss_hermite(space.dim());
        let kets: Vec<StateVector> = nodes.iter().map(|&x| quadrature_ket(space, quadrature, x)).collect();
        let weights = kets.iter().map(|k| 1.0 / k.norm().powi(2)).collect();
        Self { space, quadrature, nodes, weights, kets }
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn quadrature(&self) -> Quadrature {
        self.quadrature
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Christoffel weights `λ_k`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kets(&self) -> &[StateVector] {
        &self.kets
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `f(q)` (or `f(p)`) as an operator: `∑ λ_k f(x_k) |x_k⟩⟨x_k|`.
    pub fn function(&self, f: impl Fn(f64) -> f64) -> ComplexOperator {
        let n = self.space.dim();
        let mut m = DMatrix::<C64>::zeros(n, n);
        for ((x, w), ket) in self.nodes.iter().zip(&self.weights).zip(&self.kets) {
            let c = w * f(*x);
            if c == 0.0 {
                continue;
            }
            let v = ket.amplitudes();
            m.gerc(C64::new(c, 0.0), v, v, C64::new(1.0, 0.0));
        }
        ComplexOperator::from_parts(self.space, m)
    }
}

/// Projects a position-space wavefunction onto the Fock basis with a
/// Gauss–Hermite rule of `nodes` points.
///
/// Returns the amplitudes and the norm the projection failed to capture.
pub(crate) fn project_wavefunction(space: FockSpace, nodes: usize, psi: impl Fn(f64) -> C64) -> (DVector<C64>, f64) {
    let basis = QuadratureBasis::new(FockSpace::with_dim(nodes).expect("nodes >= 2"), Quadrature::Position);
    let mut c = DVector::<C64>::zeros(space.dim());
    let mut total_norm = 0.0;
    for (k, (&x, &w)) in basis.nodes().iter().zip(basis.weights()).enumerate() {
        let value = psi(x);
        total_norm += w * value.norm_sqr();
        let h = basis.kets()[k].amplitudes();
        for n in 0..space.dim() {
            c[n] += h[n].re * w * value;
        }
    }
    let captured = c.norm_squared();
    (c, (total_norm - captured).max(0.0))
}
