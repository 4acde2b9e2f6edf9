//! Exact arithmetic for the supersingular locus of the GU(1,s) Shimura
//! variety at an inert prime: truncated Witt rings, hermitian lattices, the
//! Bruhat-Tits tree of SU(3), finite hermitian geometry and the local rings
//! of the GU(1,2) case.

pub mod building;
pub mod error;
pub mod gf;
pub mod hermlattice;
pub mod isocrystal;
pub mod localring;
pub mod mat;
pub mod poly;
pub mod strata;
pub mod suite;
pub mod witt;

pub use error::{Error, Result};
pub use gf::{Fe, Gf};
pub use hermlattice::{FormClass, HermitianLattice, HermitianSpace, LatticeKey};
pub use mat::Mat;
pub use witt::{make_context, Ctx, PrimeContext, Witt};
