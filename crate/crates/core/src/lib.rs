//! Terahertz channel modelling and link-level simulation.
//!
//! The crate covers the chain from spectroscopic line data to bit error
//! rates: line-by-line atmospheric refractivity, multipath and rough-surface
//! channels, phase/group-delay/GDD analysis, a single-carrier BPSK/QPSK
//! physical layer, electronic equalizers, phase-only dispersion compensation
//! and Monte-Carlo and semi-analytic BER engines.

pub mod analysis;
pub mod atmosphere;
pub mod catalog;
pub mod channel;
pub mod equalize;
pub mod error;
mod fft;
pub mod grid;
pub mod link;
pub mod multipath;
pub mod phy;
pub mod scenario;

pub use analysis::{integrated_gdd_metric, phase_profile, PhaseProfile};
pub use atmosphere::{complex_refractivity, los_transfer, RefractivitySpectrum};
pub use catalog::{parse_catalog, AtmosphereState, LineCatalog, LineRecord, Molecule};
pub use channel::ChannelResponse;
pub use error::{Error, Result};
pub use grid::FreqGrid;
pub use multipath::{cascade, multipath_transfer, rough_surface_paths, Path, PathSet, SurfaceStats};
pub use equalize::{EqualizerKind, EqualizerSpec, FirChannelEstimate};
pub use link::{run_ber_sweep, semi_analytic_ber, BerResult, StopRule, SweepOptions, SweepResult};
pub use phy::{LinkConfig, Scheme, Waveform};
