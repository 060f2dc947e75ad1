//! Core library for simulating verification regimes over AI-chip accounts.
//!
//! The crate has two halves:
//!
//! * [`sampling`] — closed-form and exact detection-probability math for
//!   random-sampling inspection plans, plus the cost-envelope arithmetic used
//!   to compare an inspection regime against the IAEA's historical baseline.
//! * a discrete-event simulator ([`world`], [`adversary`], [`inspections`],
//!   [`engine`]) that plays enumerated violation strategies against a
//!   configurable inspection regime and measures detection probability,
//!   time to detection, and inspection cost by Monte Carlo.
//!
//! Everything here is deterministic given a seed: trials derive independent
//! RNG streams from `(base_seed, trial_index)`, so results are independent of
//! execution order and parallelism. The crate is `no_std` (with `alloc`);
//! IO, file formats, and the CLI live in the companion `chipwatch-cli` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod adversary;
pub mod engine;
pub mod inspections;
pub mod rng;
pub mod sampling;
pub mod world;

pub use rng::SimRng;
pub use sampling::SamplingPlan;
