//! Temporal discretization: graded meshes, superconvergence-point selection,
//! L2-1σ coefficients and complementary discrete kernels.

mod coeffs;
mod exponent;
mod kernels;
mod mesh;
mod policy;

pub use coeffs::{ij_quantities, CoeffRow};
pub use exponent::{Monotonicity, VariableExponent};
pub use kernels::{all_kernel_rows, KernelRow};
pub use mesh::GradedMesh;
pub use policy::{select_step_params, PolicyKind, StepParams, SuperconvPolicy};

pub use crate::special::caputo_power_reference;

/// Builds every coefficient row `1..=N` of a mesh under one policy.
pub fn coefficient_rows(
    exponent: &VariableExponent,
    mesh: &GradedMesh,
    policy: &SuperconvPolicy,
) -> crate::Result<Vec<CoeffRow>> {
    (1..=mesh.steps())
        .map(|n| {
            let params = select_step_params(exponent, mesh, n, policy)?;
            Ok(CoeffRow::new(mesh, &params))
        })
        .collect()
}
