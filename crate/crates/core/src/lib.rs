//! Running-maximum asymptotics for regenerative processes.
//!
//! The normalised statistics
//!
//! ```text
//! s2(t) = r₀(A₀(t)) (X̄(t) − A₀(t)) / log log t        (limsup 1)
//! s3(t) = r₀(A₀(t)) (X̄(t) − A₀(t)) / log log log t    (liminf −1)
//! ```
//!
//! with `A₀(t) = R₀⁻¹(log(t/α_T))` are computed for i.i.d. maxima, for a
//! generic cycle engine, and for GI/G/1, M/M/m and linear birth–death models.

// `!(x > y)` is used on purpose so NaN inputs fall into the rejection branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod birth_death;
pub mod envelope;
pub mod error;
pub mod harness;
pub mod iid;
pub mod numeric;
pub mod queues;
pub mod regen;
pub mod rng;

pub use error::{Error, Result};
pub use envelope::{a0_of_t, generalized_inverse, normalized_stats, NormalizedStats, RateEnvelope};
pub use regen::{run_cycles, CycleModel, CycleSample, MaxPath, TimeGrid};
