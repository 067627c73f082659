//! P1/P2 Lagrange finite elements on uniform triangulations of the unit square.

mod assembly;
mod mesh;
pub mod quadrature;
mod space;
mod tensor;

pub use assembly::{
    assemble_functional, assemble_gradient_functional, assemble_mass, assemble_stiffness,
    elliptic_projection, l2_error, l2_norm,
};
pub use mesh::TriMesh;
pub use quadrature::{gauss_legendre, integrate_interval, TriangleRule};
pub use space::{FeFunction, FeSpace};
pub use tensor::DiffusionTensor;
