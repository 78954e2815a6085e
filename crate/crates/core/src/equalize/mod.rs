//! Electronic equalizers (zero-forcing, linear MMSE, DFE, MLSE), the
//! phase-only dispersion compensator and keyed GDD scrambling profiles.
//!
//! Symbol-spaced processing uses the end-to-end response
//! `r[t] = Σ_j taps[j]·a[t - delay_offset - j]` from [`estimate_fir`].

mod dfe;
mod fir;
mod linear;
mod mlse;
mod pdc;

pub use dfe::{dfe, DfeEqualizer};
pub use fir::{
    estimate_fir, estimate_fir_synced, estimate_from_filter, train_lms, EstimateSource, FirChannelEstimate,
    TAP_THRESHOLD,
};
pub use linear::{
    linear_mmse, zf_equalizer, zf_equalizer_with_floor, EqualizerKind, EqualizerSpec, LinearEqualizer,
    DIAGONAL_LOADING, ZF_FLOOR,
};
pub use mlse::{mlse, mlse_circular, mlse_with_budget, trellis_states, STATE_BUDGET};
pub use pdc::{pdc_filter, scramble_profile};
