//! Core combinatorial types: chord diagrams and Jacobi diagrams, canonical
//! forms and enumeration.
//!
//! Diagrams live on an oriented circle, so the symmetry group acting on
//! codes is the rotation group only — no reflections. The paper leaves open
//! whether the diagram span carries a basepoint; we work with rotation
//! classes (both choices give identical quotient dimensions).

mod chord;
mod jacobi;

pub use chord::{canonical_code, enumerate_chord_diagrams, ChordDiagram};
pub use jacobi::{enumerate_jacobi_diagrams, JacobiDiagram, Port};
