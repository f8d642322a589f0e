//! Type-A Lie poset algebras with exact arithmetic: index, principal
//! elements, spectra, toral-pair catalog, gluing rules, order-complex
//! homology and exhaustive small-poset scans.

pub mod algebra;
pub mod error;
pub mod linalg;
pub mod poly;
pub mod poset;
pub mod scan;
pub mod spectral;
pub mod topology;
pub mod toral;

pub use algebra::{BasisVector, Element, Functional, KirillovMatrix, LiePosetAlgebra};
pub use error::{Error, Result};
pub use poset::{CanonicalForm, ExtremalData, Poset};
