//! Combinatorics of graded blocks of category O: Coxeter groups,
//! Kazhdan-Lusztig polynomials, graded decomposition and Cartan matrices,
//! parabolic/singular and stratified blocks, linear complexes and Koszul
//! duality checks.

pub mod coxeter;
pub mod error;
pub mod grblock;
pub mod hecke_kl;
pub mod koszulver;
pub mod laurent;
pub mod linres;
pub mod matrix;
pub mod parablock;
pub mod profile;
pub mod stratblock;

pub use coxeter::{
    CoxeterDiagram, CoxeterGroup, Element, Extremity, Family, IndexKind, Involution,
    ParabolicSubset, Side,
};
pub use error::{OkitError, Result};
pub use laurent::LaurentPoly;
pub use hecke_kl::KlTable;
pub use matrix::MultMatrix;
pub use grblock::{Basis, CharVector, RegularBlock};
pub use profile::{ComplexProfile, Linearity};
pub use parablock::{Block, BlockSpec, Flavor};
pub use linres::{ConeSolver, LinearData};
pub use stratblock::{CBlock, ExtReport, StratBlockData};
pub use koszulver::VerifyReport;
