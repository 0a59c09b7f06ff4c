//! Pseudodifferential symbols of the Virasoro operators, the section of
//! the symbol map into quadratic operators, and the checks relating them.

mod checks;
mod free_field;
mod quad;
mod symbol;

pub use checks::{
    modified_virasoro_check, operator_virasoro_check, section_consistency_check, symbol_lines, ModifiedReport,
};
pub use free_field::{free_field_symbol_check, FieldTerm, FreeField, Gen};
pub use quad::{build_lk_direct, quad_commutator, sigma_inverse, sigma_inverse_literal_signs, QMono, QuadOperator};
pub use symbol::{
    central_term_check, cocycle, eta_adjoint, parity_check, supertrace_cocycle_check, symbol_lk, symbol_virasoro_check, MatPoly, PsiSymbol,
};
