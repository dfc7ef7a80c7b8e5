//! Parameters, radial discretization, truncated Fock basis and operator assembly.

mod basis;
mod form;
mod grid;
mod operator;
mod params;

pub use basis::{multiset_count, FockBasis, Level};
pub use form::{dilated_dispersion, dilated_form_factor, form_factor};
pub(crate) use form::form_factor_unchecked;
pub use grid::{build_grid, QuadratureRule, RadialGrid};
pub use operator::{
    annihilator, apply_annihilator, assemble_hamiltonian, effective_coupling, field_energy,
    free_diagonal, interior_mask, sigma1, Model, ModeFunction, OperatorMatrix, OperatorSnapshot,
};
pub use params::{ModelParams, Theta, DEFAULT_TAIL_TOL};
