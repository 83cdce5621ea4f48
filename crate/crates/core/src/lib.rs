//! Revenue-maximizing menus for a single unit-demand buyer.
//!
//! The crate covers exact optimal menus for finite distributions (via a
//! linear program), discretized lottery covers, rounding of arbitrary menus
//! onto small price/lottery grids, the sample-then-round pipeline, item
//! pricing baselines, and the hitting-set reduction for bounded-size menus.

pub mod cover;
pub mod distribution;
pub mod error;
pub mod lp;
pub mod maxrev;
pub mod model;
pub mod pipeline;
pub mod rounding;
pub mod simplex;

pub use distribution::{ExplicitDistribution, Sampler, ValuationLaw};
pub use error::{Error, Result};
pub use model::{Choice, Lottery, Menu, MenuEntry, TailForm, ValueClass, Valuation};
