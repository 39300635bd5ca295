//! Yule-process bins-and-balls occupancy model.
//!
//! Bin `i` is the interval `(t_{i-1}, t_i]` of the Yule split times, balls land at
//! i.i.d. exponential(ρ) locations. The crate samples the model exactly, evaluates
//! its limit laws, and provides the statistics used to compare the two.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimate;
pub mod geometry;
pub mod limits;
pub mod par;
pub mod ppstats;
pub mod quad;
pub mod rare;
pub mod rng;
pub mod special;
pub mod yule;

pub use error::{Error, Result};
pub use estimate::EstimateWithCI;
pub use geometry::{ExtendedReal, Interval, Rect};
pub use rng::RngStream;
