//! Spin-½ carriers: Pauli algebra, direction states, the N-direction
//! scheme and two-particle correlations.
//!
//! Basis order is `{|↑⟩, |↓⟩}` for one spin and `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩`
//! (first arrow for particle A) for a pair.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, Matrix2, Matrix4, Vector2, Vector3, Vector4};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{ComplexOperator, DensityOperator, FockSpace};
use crate::povm::{MeasurementElement, MeasurementFamily, OutcomeLabel};

const POLE_EPS: f64 = 1e-12;
const ZERO_SUM_TOL: f64 = 1e-9;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Unit vector in polar coordinates, `θ ∈ [0, π]`, `φ ∈ [0, 2π)`; `φ = 0`
/// on the poles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Direction {
    theta: f64,
    phi: f64,
}

impl TryFrom<[f64; 2]> for Direction {
    type Error = Error;

    fn try_from([theta, phi]: [f64; 2]) -> Result<Self> {
        Direction::new(theta, phi)
    }
}

impl From<Direction> for [f64; 2] {
    fn from(d: Direction) -> Self {
        [d.theta, d.phi]
    }
}

impl Direction {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(theta.is_finite() && phi.is_finite()) || !(-1e-12..=PI + 1e-12).contains(&theta) {
            return Err(Error::Domain(format!("polar angle must lie in [0, π], got {theta}")));
        }
        let theta = theta.clamp(0.0, PI);
        let phi = if theta.sin() < POLE_EPS { 0.0 } else { phi.rem_euclid(2.0 * PI) };
        Ok(Self { theta, phi })
    }

    pub fn from_cartesian(v: [f64; 3]) -> Result<Self> {
        let n = Vector3::from(v).norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Domain("direction vector must be non-zero".into()));
        }
        let theta = (v[2] / n).clamp(-1.0, 1.0).acos();
        Self::new(theta, v[1].atan2(v[0]))
    }

    pub fn x() -> Self {
        Self { theta: PI / 2.0, phi: 0.0 }
    }

    pub fn y() -> Self {
        Self { theta: PI / 2.0, phi: PI / 2.0 }
    }

    pub fn z() -> Self {
        Self { theta: 0.0, phi: 0.0 }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn cartesian(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    /// `θ → π − θ`, `φ → π + φ`.
    pub fn antipode(&self) -> Self {
        Self::new(PI - self.theta, PI + self.phi).expect("antipode of a valid direction")
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        Vector3::from(self.cartesian()).dot(&Vector3::from(other.cartesian()))
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(θ={:.6}, φ={:.6})", self.theta, self.phi)
    }
}

pub fn identity2() -> Matrix2<C64> {
    Matrix2::identity()
}

/// `(σ_x, σ_y, σ_z)`.
pub fn pauli() -> [Matrix2<C64>; 3] {
    let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    [Matrix2::new(o, l, l, o), Matrix2::new(o, -i, i, o), Matrix2::new(l, o, o, -l)]
}

/// `r̂·σ⃗`.
pub fn pauli_along(dir: &Direction) -> Matrix2<C64> {
    let [x, y, z] = dir.cartesian();
    let [sx, sy, sz] = pauli();
    sx * c(x, 0.0) + sy * c(y, 0.0) + sz * c(z, 0.0)
}

/// Spin component `s⃗·r̂ = (r̂·σ⃗)/2`.
pub fn spin_component(dir: &Direction) -> Matrix2<C64> {
    pauli_along(dir) * c(0.5, 0.0)
}

/// Pure spin-½ state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinState {
    amps: Vector2<C64>,
}

impl SpinState {
    pub fn new(up: C64, down: C64) -> Result<Self> {
        let amps = Vector2::new(up, down);
        let n = amps.norm();
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!("spin state norm {n} is not one")));
        }
        Ok(Self { amps })
    }

    pub fn amplitudes(&self) -> &Vector2<C64> {
        &self.amps
    }

    pub fn inner(&self, other: &SpinState) -> C64 {
        self.amps.dotc(&other.amps)
    }

    pub fn projector(&self) -> Matrix2<C64> {
        self.amps * self.amps.adjoint()
    }

    /// `⟨ψ|s⃗|ψ⟩`.
    pub fn mean_spin(&self) -> [f64; 3] {
        pauli().map(|s| 0.5 * (self.amps.adjoint() * s * self.amps)[(0, 0)].re)
    }
}

/// `cos(θ/2)|↑⟩ + sin(θ/2) e^{iφ}|↓⟩`.
pub fn spin_state(dir: &Direction) -> SpinState {
    let (s, co) = (dir.theta / 2.0).sin_cos();
    SpinState { amps: Vector2::new(c(co, 0.0), C64::from_polar(s, dir.phi)) }
}

/// `|⟨r̂|r̂′⟩|²` by two routes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OverlapCheck {
    /// From the amplitudes.
    pub amplitude: f64,
    /// `(1 + r̂·r̂′)/2`.
    pub formula: f64,
}

impl OverlapCheck {
    pub fn discrepancy(&self) -> f64 {
        (self.amplitude - self.formula).abs()
    }
}

pub fn overlap_probability(r: &Direction, r2: &Direction) -> OverlapCheck {
    OverlapCheck {
        amplitude: spin_state(r).inner(&spin_state(r2)).norm_sqr(),
        formula: (1.0 + r.dot(r2)) / 2.0,
    }
}

fn to_operator(space: FockSpace, m: DMatrix<C64>) -> ComplexOperator {
    ComplexOperator::new(space, m).expect("finite entries of matching size")
}

fn dyn2(m: &Matrix2<C64>) -> DMatrix<C64> {
    DMatrix::from_fn(2, 2, |i, j| m[(i, j)])
}

/// `(I + r̂·σ⃗)/2` as a density operator on the two-level space.
pub fn direction_density(dir: &Direction) -> DensityOperator {
    let m = (identity2() + pauli_along(dir)) * c(0.5, 0.0);
    DensityOperator::new(to_operator(FockSpace::two_level(), dyn2(&m)), dir.to_string())
        .expect("pure spin state is a valid density operator")
}

/// Transmitter states and receiver family of the N-direction scheme.
#[derive(Clone, Debug)]
pub struct DirectionScheme {
    pub directions: Vec<Direction>,
    pub states: Vec<DensityOperator>,
    pub measurement: MeasurementFamily,
}

/// States `(I + r̂·σ⃗)/2` and measurement `(I + r̂′·σ⃗)/N` for a set of
/// directions summing to zero.
pub fn direction_scheme(dirs: &[Direction]) -> Result<DirectionScheme> {
    if dirs.len() < 2 {
        return Err(Error::Scheme(format!("need at least two directions, got {}", dirs.len())));
    }
    let sum = dirs.iter().fold(Vector3::zeros(), |acc, d| acc + Vector3::from(d.cartesian()));
    if sum.norm() > ZERO_SUM_TOL {
        return Err(Error::Scheme(format!("direction vectors sum to {:.3e}, not zero", sum.norm())));
    }
    let n = dirs.len() as f64;
    let space = FockSpace::two_level();
    let elements = dirs
        .iter()
        .map(|d| {
            let m = (identity2() + pauli_along(d)) * c(1.0 / n, 0.0);
            MeasurementElement::new(OutcomeLabel::Direction(d.cartesian()), to_operator(space, dyn2(&m)), 1.0)
        })
        .collect::<Result<Vec<_>>>()?;
    let measurement = MeasurementFamily::new(format!("directions({})", dirs.len()), space, elements, 2)?;
    Ok(DirectionScheme { directions: dirs.to_vec(), states: dirs.iter().map(direction_density).collect(), measurement })
}

/// `N` directions evenly spaced on the great circle through `x̂` and `ẑ`,
/// starting at `ẑ`.
pub fn polygon_directions(n: usize) -> Vec<Direction> {
    (0..n)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / n as f64;
            Direction::from_cartesian([a.sin(), 0.0, a.cos()]).expect("unit vector")
        })
        .collect()
}

/// Vertices of a regular tetrahedron, one at `ẑ`.
pub fn tetrahedron_directions() -> Vec<Direction> {
    let theta = (-1.0f64 / 3.0).acos();
    let mut out = vec![Direction::z()];
    for k in 0..3 {
        out.push(Direction::new(theta, 2.0 * PI * k as f64 / 3.0).expect("valid angles"));
    }
    out
}

/// State of two spins.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairState {
    amps: Vector4<C64>,
}

impl PairState {
    pub fn new(amps: [C64; 4]) -> Result<Self> {
        let amps = Vector4::from(amps);
        let n = amps.norm();
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!("pair state norm {n} is not one")));
        }
        Ok(Self { amps })
    }

    pub fn product(a: &SpinState, b: &SpinState) -> Self {
        Self { amps: a.amps.kronecker(&b.amps).fixed_rows::<4>(0).into() }
    }

    pub fn amplitudes(&self) -> &Vector4<C64> {
        &self.amps
    }

    pub fn inner(&self, other: &PairState) -> C64 {
        self.amps.dotc(&other.amps)
    }

    pub fn apply(&self, op: &Matrix4<C64>) -> Vector4<C64> {
        op * self.amps
    }

    /// `λ` with `op|ψ⟩ = λ|ψ⟩`, if the state is an eigenvector to within
    /// `tol`.
    pub fn eigenvalue(&self, op: &Matrix4<C64>, tol: f64) -> Option<f64> {
        let image = op * self.amps;
        let lambda = self.amps.dotc(&image);
        ((image - self.amps * lambda).norm() <= tol && lambda.im.abs() <= tol).then_some(lambda.re)
    }

    pub fn density(&self, label: impl Into<String>) -> Result<DensityOperator> {
        let m = DMatrix::from_fn(4, 4, |i, j| self.amps[i] * self.amps[j].conj());
        DensityOperator::new(ComplexOperator::new(FockSpace::finite_level(4)?, m)?, label)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BellState {
    /// `(|↑↓⟩ + |↓↑⟩)/√2`.
    PsiPlus,
    /// `(|↑↓⟩ − |↓↑⟩)/√2`, the singlet.
    PsiMinus,
    /// `(|↑↑⟩ + |↓↓⟩)/√2`.
    PsiS,
    /// `(|↑↑⟩ − |↓↓⟩)/√2`.
    PsiD,
}

impl BellState {
    pub const ALL: [BellState; 4] = [Self::PsiPlus, Self::PsiMinus, Self::PsiS, Self::PsiD];

    pub fn state(self) -> PairState {
        let h = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let o = c(0.0, 0.0);
        let amps = match self {
            Self::PsiPlus => [o, h, h, o],
            Self::PsiMinus => [o, h, -h, o],
            Self::PsiS => [h, o, o, h],
            Self::PsiD => [h, o, o, -h],
        };
        PairState { amps: Vector4::from(amps) }
    }

    /// Eigenvalues of `σ_xAσ_xB`, `σ_yAσ_yB`, `σ_zAσ_zB`.
    pub fn correlation_signs(self) -> [f64; 3] {
        match self {
            Self::PsiMinus => [-1.0, -1.0, -1.0],
            Self::PsiPlus => [1.0, 1.0, -1.0],
            Self::PsiS => [1.0, -1.0, 1.0],
            Self::PsiD => [-1.0, 1.0, 1.0],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::PsiPlus => "psi+",
            Self::PsiMinus => "psi-",
            Self::PsiS => "psiS",
            Self::PsiD => "psiD",
        }
    }
}

pub fn entangled_states() -> BTreeMap<BellState, PairState> {
    BellState::ALL.iter().map(|&b| (b, b.state())).collect()
}

/// `A ⊗ B` with A acting on the first particle.
pub fn pair_operator(a: &Matrix2<C64>, b: &Matrix2<C64>) -> Matrix4<C64> {
    a.kronecker(b).fixed_view::<4, 4>(0, 0).into()
}

/// `σ_iA σ_iB` for axis `i ∈ {0, 1, 2}`.
pub fn correlation_operator(axis: usize) -> Matrix4<C64> {
    let s = pauli()[axis];
    pair_operator(&s, &s)
}

/// `σ⃗_A·σ⃗_B`.
pub fn sigma_dot() -> Matrix4<C64> {
    (0..3).map(correlation_operator).fold(Matrix4::zeros(), |a, b| a + b)
}

/// `s⃗·s⃗ = (3I + σ⃗_A·σ⃗_B)/2` for the pair.
pub fn total_spin_squared() -> Matrix4<C64> {
    (Matrix4::identity() * c(3.0, 0.0) + sigma_dot()) * c(0.5, 0.0)
}

/// `|⟨r̂ r̂′|ψ₋⟩|²` from the explicit four-component overlap.
pub fn singlet_joint_probability(r: &Direction, r2: &Direction) -> f64 {
    PairState::product(&spin_state(r), &spin_state(r2)).inner(&BellState::PsiMinus.state()).norm_sqr()
}

/// Joint outcome table for two receivers measuring `±r̂` and `±r̂′` on the
/// singlet, rows `(+,+), (+,−), (−,+), (−,−)`.
pub fn singlet_outcomes(r: &Direction, r2: &Direction) -> [f64; 4] {
    let (a, b) = (r.antipode(), r2.antipode());
    [
        singlet_joint_probability(r, r2),
        singlet_joint_probability(r, &b),
        singlet_joint_probability(&a, r2),
        singlet_joint_probability(&a, &b),
    ]
}
