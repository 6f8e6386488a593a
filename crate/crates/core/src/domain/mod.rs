//! Domain types shared by every evaluator: points, the dominance cone,
//! the hyperoctahedral group and the root families.

pub mod cone;
pub mod group;
pub mod point;
pub mod roots;

pub use cone::{cone_enumerate, cone_level, level_count, Cone, ConeVector, Link};
pub use group::{group_enumerate, SignedPermutation};
pub use point::{Lattice, PositionPoint, SpectralPoint, DEFAULT_ETA};
pub use roots::{Root, RootData};
