//! Domains, meshes and the interior/boundary DOF split.

mod domain;
mod mesh;
mod mesher;

pub use domain::{builtin_domain, BoundarySegment, Corner, DomainSpec2D, Point2, BUILTIN_DOMAINS};
pub use mesh::{mesh_cube, partition_dofs, refine_uniform, DofPartition, Mesh};
pub use mesher::{mesh_domain, MIN_ANGLE_DEG};

pub(crate) use mesh::{dist3, simplex_signed_measure};
