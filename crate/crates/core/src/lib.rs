//! Probabilistic forecasting of electricity spot prices on a 5-minute grid,
//! together with the economic machinery needed to act on those forecasts.
//!
//! The crate is organised around the daily forecasting cycle used in spot
//! markets without a day-ahead/intraday split:
//!
//! * [`series`] / [`features`] / [`windows`] — gridded price and weather data,
//!   design matrices with lagged and calendar features, rolling-window plans
//!   for daily retraining.
//! * [`spike`] — dual rolling-quantile spike classification and neighbour
//!   imputation.
//! * [`qr`] — linear quantile regression solved exactly as a linear program
//!   on top of the [`simplex`] core.
//! * [`forest`] — quantile regression forests (bagged CART trees whose leaf
//!   weights define a conditional CDF).
//! * [`svr`] — RBF-kernel epsilon-insensitive support vector regression via
//!   sequential minimal optimisation, supplying a point forecast.
//! * [`postprocess`] — centred moving-average smoothing and autoregressive
//!   density shifting.
//! * [`ensemble`] — quantile-regression combination of constituent forecasts
//!   (point-input and per-quantile-input variants).
//! * [`metrics`] — pinball, CRPS, PICP, consistency bars, Diebold–Mariano,
//!   Kupiec, and distribution summary statistics.
//! * [`battery`] — prosumer battery-scheduling MILP driven by expected prices
//!   derived from predictive CDFs, solved by branch-and-bound over the same
//!   simplex core.
//! * [`backtest`] — the daily rolling backtest tying everything together.
//! * [`synth`] — a seeded synthetic price generator with known conditional
//!   quantiles, used for calibration testing.
//!
//! The crate is `no_std`-compatible (`alloc` required); file formats and the
//! command line live in the companion `nemcast` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod backtest;
pub mod battery;
pub mod cdf;
pub mod ensemble;
mod error;
pub mod features;
pub mod forest;
pub mod metrics;
pub mod postprocess;
pub mod qr;
pub mod quantile;
pub mod series;
pub mod simplex;
pub mod spike;
pub mod svr;
pub mod synth;
pub mod time;
pub mod windows;

pub use error::{Error, Result};
