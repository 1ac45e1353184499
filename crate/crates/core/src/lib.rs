//! Core of the community affiliation graph toolkit.
//!
//! The union graph `G[n, m]` overlays `m` independent layers on the vertex
//! set `[n]`. Layer `i` picks a uniformly random vertex subset of size `X_i`
//! and keeps each internal pair independently with probability `Q_i`.
//!
//! * [`law`]: distributions of `(X, Q)`, the mixed moment
//!   `kappa = E[X h(X, Q)]` and the threshold `lambda = ln n - (m/n) kappa`.
//! * [`schedule`]: IID or fixed per-layer attributes.
//! * [`exact`]: isolated-vertex moments, cut probabilities and the union
//!   bound on disconnection.
//! * [`sim`]: streaming union-find sampler with reproducible per-layer
//!   random streams.
//! * [`sweep`] and [`counterexample`]: threshold inversion and the
//!   heavy-tailed law where the dichotomy breaks.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod counterexample;
pub mod error;
pub mod exact;
pub mod law;
pub mod math;
pub mod schedule;
pub mod sim;
pub mod sweep;

pub use error::{Error, Result};
pub use law::{h_value, lambda_threshold, Atom, CommunityLaw, KappaChoice, LogAtom, ThresholdSummary};
pub use schedule::LayerSchedule;
