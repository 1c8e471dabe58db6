//! Outage probability analysis and optimization for wireless links assisted
//! by multiple intelligent reflecting surfaces (IRSs) under Rician fading.
//!
//! The link model is a single-antenna source talking to a single-antenna
//! destination over a Rician direct channel plus `K` reflected paths, one
//! per IRS element. Source-to-IRS segments are pure line of sight; IRS-to-
//! destination segments and the direct channel carry both a deterministic
//! LoS component and a circularly-symmetric Gaussian NLoS component. Each
//! IRS element applies a configurable phase shift in `[0, 2pi)` that is
//! tuned from the LoS geometry alone.
//!
//! Everything the outage probability depends on collapses into three
//! scalars: the LoS power `g_los` of the equivalent channel, its NLoS power
//! `g_nlos`, and the threshold `(2^R - 1)/SNR`. Module map:
//!
//! * [`model`] — domain types, validation, named preset scenarios
//! * [`analytic`] — the series kernel `f(a, b, c)` and closed-form outage
//! * [`optimizer`] — closed-form optimal phase shifts and a grid-search verifier
//! * [`asymptotic`] — high-SNR asymptote and Rician-factor sensitivity
//! * [`montecarlo`] — seeded channel simulator used as ground truth
//!
//! The crate is `no_std` (with `alloc`); all floating-point transcendentals
//! go through `libm` so results are identical across platforms.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analytic;
pub mod asymptotic;
pub mod model;
pub mod montecarlo;
pub mod optimizer;

pub use analytic::{f_series, g_los, g_nlos, outage_probability, ChannelMoments, SeriesControl};
pub use asymptotic::{asymptotic_outage, kappa_sensitivity, AsymptoteResult, KappaTarget};
pub use model::{preset, DirectLink, IrsSpec, OutageQuery, PhaseShifts, SystemModel};
pub use montecarlo::{estimate_outage, McEstimate, SampleStream};
pub use optimizer::{g_los_star, grid_search, optimal_outage, optimal_phases, OptimalSolution};
