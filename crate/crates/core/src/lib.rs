//! Data envelopment analysis engine.
//!
//! Builds and solves the linear programs behind conventional, super-efficiency,
//! cross-efficiency, fuzzy (worst/best scenario), Malmquist and bootstrap DEA
//! models from crisp, fuzzy or panel datasets, and extracts scores, slacks,
//! targets, multipliers and reference graphs from the solutions.
//!
//! The usual workflow mirrors the three phases of a DEA study:
//!
//! 1. build a [`data::DeaData`] (from matrices or a CSV table),
//! 2. run a model from [`model`] (for instance [`model::radial::model_basic`]),
//! 3. extract results with the helpers in [`results`].
//!
//! ```
//! use dea_core::data::DeaData;
//! use dea_core::model::radial::{model_basic, BasicOptions};
//! use dea_core::model::Rts;
//!
//! # fn main() -> dea_core::Result<()> {
//! let data = DeaData::from_matrices(
//!     ndarray::array![[2.0, 4.0, 5.0, 8.0]], // inputs, DMUs in columns
//!     ndarray::array![[2.0, 2.0, 4.0, 2.0]], // outputs
//! )?;
//! let result = model_basic(
//!     &data,
//!     &BasicOptions {
//!         rts: Rts::Vrs,
//!         ..Default::default()
//!     },
//! )?;
//! assert_eq!(result.records[2].efficiency, Some(1.0));
//! # Ok(())
//! # }
//! ```

pub mod bootstrap;
pub mod data;
pub mod error;
pub mod frontier;
pub mod fuzzy;
pub mod lp;
pub mod malmquist;
pub mod metafrontier;
pub mod model;
pub mod results;

pub use data::{DeaData, FuzzyDeaData, MalmquistSeries};
pub use error::{DeaError, Result};
pub use model::result::{DeaResult, DmuRecord};
pub use model::{Orientation, Rts};
