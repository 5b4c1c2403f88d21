//! Thick-part decomposition and bounded triangulation of hyperbolic tube quotients.

pub mod cone_graph;
pub mod error;
pub mod export;
pub mod hyperbolic;
pub mod net;
pub mod oracle;
pub mod pipeline;
pub mod quotient;
pub mod triangulator;
pub mod tube;
pub mod voronoi;

pub use error::{Error, Result};
