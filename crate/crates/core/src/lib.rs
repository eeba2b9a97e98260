//! Coded caching for small-buffer users.
//!
//! A server holds `N` files and broadcasts to `K ≥ N` users over one
//! error-free shared link. Each user has a cache of `M ≤ 1/K` files. During
//! placement every cache stores XORs of same-index subfiles taken across all
//! files; during delivery the server answers a demand vector with a mix of
//! plain subfiles and chained XORs, reaching rate `N(1 - M)`.
//!
//! The crate is split into:
//!
//! * [`gf2`]: symbolic GF(2) combinations of subfiles, elimination, rank.
//! * [`schemes`]: placement plans and delivery schedules for `K = N` and `K > N`.
//! * [`bounds`]: exact cut-set bound, achievable rate, the baseline segment
//!   of uncoded-placement coded caching, and memory-sharing envelopes.
//! * [`verifier`]: decodability certificates and exhaustive peak-rate checks.
//! * [`simulate`]: byte-level broadcast simulation, an independent decoder.
//!
//! All rates are exact [`Rational`]s in file units.

pub mod bounds;
pub mod error;
pub mod gf2;
pub mod rational;
pub mod schemes;
pub mod simulate;
pub mod verifier;

pub use bounds::{
    achievable_rate, combined_envelope, cutset_bound, memory_share, mn_segment_rate, RatePoint,
};
pub use error::{Error, Result};
pub use gf2::{rank, span_contains, span_witness, xor_combine, Gf2Combo, SubfileId};
pub use rational::Rational;
pub use schemes::{
    deliver, deliver_equal_users, deliver_more_users, place, place_equal_users, place_more_users,
    schedule_rate, DeliverySchedule, DemandVector, PlacementPlan, ProblemInstance,
};
pub use simulate::{simulate_payload, ReconstructionReport, UserReconstruction};
pub use verifier::{
    peak_rate, peak_rate_with_budget, verify_decodability, DecodeCertificate, PeakRateReport,
    DEFAULT_ENUMERATION_BUDGET,
};
