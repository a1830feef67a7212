//! Characteristic forms: the rational exterior algebra that carries Chern
//! characters, lattice curvature of sampled connections, and determinant
//! winding numbers.

mod grid;
mod multiform;
mod winding;

pub use grid::{
    det_line_connection, poincare_connection, ChernNumber, Curvature, GridConnection, GridError, PlaneCurvature,
    INTEGRALITY_TOL,
};
pub use multiform::{sort_with_sign, FormError, FormRecord, Label, MultiForm, TermRecord, Universe};
pub use winding::{sample_loop, winding_number, WindingError, CLOSURE_TOL, SINGULAR_TOL};
