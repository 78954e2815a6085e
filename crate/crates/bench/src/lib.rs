//! Fixtures shared by the criterion benchmarks under `benches/`.

use thz_core::phy::{demodulate_synced, modulate, prbs, Sync};
use thz_core::scenario::{fig4_link, fig5_channel, fig5_link};
use thz_core::{ChannelResponse, LinkConfig};

/// Matched-filter output of one noiseless 100 m, 200 Gbaud frame together
/// with the channel it went through.
pub struct Fig5Frame {
    pub config: LinkConfig,
    pub channel: ChannelResponse,
    pub sync: Sync,
    pub soft: Vec<num_complex::Complex64>,
}

pub fn fig5_frame() -> Fig5Frame {
    let config = fig5_link();
    let channel = fig5_channel().expect("preset channel");
    let sync = Sync::from_channel(&channel, &config).expect("sync");
    let bits = prbs(23, 1, config.frame_bits).expect("prbs");
    let wave = modulate(&bits, &config).expect("modulate");
    let rx = thz_core::phy::apply_channel(&wave, &channel).expect("channel");
    let soft = demodulate_synced(&rx, &config, &sync).expect("demodulate");
    Fig5Frame {
        config,
        channel,
        sync,
        soft,
    }
}

pub fn fig4_bits() -> (LinkConfig, Vec<u8>) {
    let config = fig4_link();
    let bits = prbs(23, 7, config.frame_bits).expect("prbs");
    (config, bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_have_frame_length() {
        let f = fig5_frame();
        assert_eq!(f.soft.len(), f.config.frame_symbols());
        let (c, bits) = fig4_bits();
        assert_eq!(bits.len(), c.frame_bits);
    }
}
