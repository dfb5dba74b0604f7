//! Joint radar and communication with OFDM and OTFS frames.
//!
//! A single-path monostatic radar reflects the transmitted frame back to the
//! transmitter, which estimates the target delay and Doppler by maximum
//! likelihood. The same frame carries data to a receiver, so each waveform
//! is scored both by its ranging accuracy and by its achievable rate. FMCW
//! serves as a radar-only baseline.

pub mod error;
pub mod estimate;
pub mod fisher;
pub mod fmcw;
pub mod frame;
pub mod grid;
pub mod link;
pub mod ofdm;
pub mod otfs;
pub mod seed;
pub mod sfft;
pub mod sim;
mod spectrum;
pub mod symbols;

pub use error::{Error, Result};
pub use estimate::RadarEstimate;
pub use fisher::{CrlbReport, CrlbSource};
pub use frame::{FrameConfig, Target};
pub use grid::{EstimationGrid, SlowTime};
pub use symbols::{Constellation, Domain, SymbolGrid};
