//! Jet-based toolkit for Sasakian and Tanaka–Webster geometry on
//! Kaluza–Klein circle bundles over surfaces.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod connection;
pub mod corpus;
pub mod curvature;
pub mod deform;
pub mod error;
pub mod field;
pub mod jet;
pub mod oracle;
pub mod quadrature;
pub mod sasaki;
pub mod surface;
pub mod sweep;

pub use connection::{ConnectionKind, FrameConnection, LocalConnection};
pub use curvature::CurvatureReport;
pub use error::{Error, Result};
pub use field::{FieldRef, JetField, ScalarField};
pub use jet::{Jet, Point};
pub use sasaki::{ConnectionForm, SasakiChart};
pub use surface::{Domain, SurfaceChart};
