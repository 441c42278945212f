//! Trial space bases, mixed mass matrices, and the bubble and dual-basis
//! realizations used as test oracles.

mod assembly;
pub mod basis;
mod bubbles;
mod dual;
mod layout;
pub mod quadrature;

pub use assembly::{
    assemble_mass, assemble_mixed_mass, assemble_p1_mass, assemble_p1_stiffness, local_orthogonality_defect,
    mass_with_one, support_measure, weighted_norms_sq,
};
pub use basis::{local_orthonormal_basis, poly_dim, LocalPolyBasis};
pub use bubbles::{bubble_gram, bubble_trial_mass, realize_bubbles, BubbleKind, BubbleSet};
pub use dual::{dual_basis_coefficients, dual_gram, dual_sum_at_nodes, DualBasis};
pub(crate) use dual::{cont1_coefficients, disc0_coefficients};
pub use layout::{disc_layout_with_basis, dof_layout, DofLayout, SpaceKind};
