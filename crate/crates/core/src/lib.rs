//! Families of finite-dimensional unitary representations of finitely
//! presented groups, their characteristic classes, and flat-detectability
//! certificates for rational homology classes.
//!
//! The crate is organised bottom-up:
//!
//! * [`presentation`] parses group presentations and evaluates words in
//!   matrix assignments.
//! * [`repvar`] measures and minimises the relator defect of a point of
//!   `Hom(Γ, U(n))` by Riemannian descent on a product of unitary groups.
//! * [`families`] builds parameterised families of representations from a
//!   small set of combinators, tracking exact Chern data structurally.
//! * [`charforms`] holds the rational exterior algebra used for Chern
//!   characters, lattice curvature on torus grids and determinant winding
//!   numbers.
//! * [`detect`] computes rational homology of the supported group classes,
//!   slant contractions, detection matrices and the associated checks.

pub mod charforms;
pub mod detect;
pub mod families;
pub mod linalg;
pub mod presentation;
pub mod rational;
pub mod repvar;
mod text;

pub use text::{Pos, SyntaxError};

pub use charforms::{GridConnection, Label, MultiForm, Universe};
pub use detect::{DetectionReport, GroupClassDescriptor, HomologyBasis};
pub use families::{Family, ParameterSpace};

pub use linalg::CMat;
pub use presentation::{GroupPresentation, Word};
pub use repvar::{RepPoint, SolveConfig};
