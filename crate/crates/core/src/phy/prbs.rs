use crate::error::{Error, Result};

/// Fibonacci LFSR over a primitive trinomial `x^order + x^tap + 1`.
#[derive(Debug, Clone)]
pub struct Prbs {
    state: u32,
    order: u32,
    tap: u32,
}

impl Prbs {
    pub fn new(order: u32, seed: u32) -> Result<Self> {
        let tap = match order {
            7 => 6,
            9 => 5,
            15 => 14,
            23 => 18,
            _ => {
                return Err(Error::invalid(
                    "prbs.order",
                    format!("{order} unsupported; choose 7, 9, 15 or 23"),
                ))
            }
        };
        let state = seed & ((1u32 << order) - 1);
        if state == 0 {
            return Err(Error::invalid("prbs.seed", "must have a nonzero low `order` bits"));
        }
        Ok(Self { state, order, tap })
    }

    pub fn period(&self) -> u64 {
        (1u64 << self.order) - 1
    }

    #[inline]
    pub fn next_bit(&mut self) -> u8 {
        let bit = ((self.state >> (self.order - 1)) ^ (self.state >> (self.tap - 1))) & 1;
        self.state = ((self.state << 1) | bit) & ((1u32 << self.order) - 1);
        bit as u8
    }
}

impl Iterator for Prbs {
    type Item = u8;

    fn next(&mut self) -> Option<u8> {
        Some(self.next_bit())
    }
}

/// `n_bits` of a maximal-length sequence.
pub fn prbs(order: u32, seed: u32, n_bits: usize) -> Result<Vec<u8>> {
    Ok(Prbs::new(order, seed)?.take(n_bits).collect())
}
