//! Truncated Fock space: kets, operators, density operators and the
//! standard oscillator states.

mod density;
mod displacement;
mod operator;
mod quadrature;
mod space;
mod squeezed;
mod state;

pub use density::{DensityOperator, DensityReport};
pub use displacement::{displacement_operator, Displacer};
pub use operator::{operator_sqrt, trace_product, ComplexOperator, OperatorJson};
pub(crate) use operator::check_same;
pub use quadrature::{
    gauss_hermite, hermite_functions, ladder_operators, number_operator, quadrature_ket, quadrature_operator,
    wavefunction, Quadrature, QuadratureBasis,
};
pub use space::FockSpace;
pub use squeezed::{displaced_squeezed_state, squeezed_ground_state, SqueezedKets};
pub use state::{coherent_ket, coherent_state, number_state, StateVector};
