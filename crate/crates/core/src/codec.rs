//! One-hot encoding of B-bit messages.
//!
//! The common codebook is the identity matrix: message `w` with decimal value
//! `q` occupies channel use `q` out of `N = 2^B`. Codewords are kept sparse
//! (hot index only); the dense vector is only built on request.

use crate::error::{Error, Result};

/// Largest supported payload length.
pub const MAX_BITS: u32 = 24;

/// A B-bit message together with its decimal index.
///
/// Bits are stored most-significant first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MessagePayload {
    bits: Vec<bool>,
    index: u32,
}

impl MessagePayload {
    /// Builds a message from its bits (MSB first).
    pub fn from_bits(bits: Vec<bool>) -> Result<Self> {
        check_bits(bits.len() as u32)?;
        let index = bits
            .iter()
            .fold(0u32, |acc, &b| (acc << 1) | u32::from(b));
        Ok(Self { bits, index })
    }

    /// Parses a string of `0`/`1` characters, MSB first.
    pub fn parse(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::invalid("bits", format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_bits(bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn num_bits(&self) -> u32 {
        self.bits.len() as u32
    }
}

impl std::fmt::Display for MessagePayload {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Sparse one-hot codeword of length `2^B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OneHotCodeword {
    num_bits: u32,
    hot_index: u32,
}

impl OneHotCodeword {
    pub fn hot_index(&self) -> u32 {
        self.hot_index
    }

    pub fn num_bits(&self) -> u32 {
        self.num_bits
    }

    /// Codeword length `N = 2^B`.
    pub fn len(&self) -> u64 {
        1u64 << self.num_bits
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Materializes the dense 0/1 vector. Only sensible for small `B`.
    pub fn to_dense(&self) -> Vec<u8> {
        let mut x = vec![0u8; self.len() as usize];
        x[self.hot_index as usize] = 1;
        x
    }
}

fn check_bits(num_bits: u32) -> Result<()> {
    if (1..=MAX_BITS).contains(&num_bits) {
        Ok(())
    } else {
        Err(Error::invalid(
            "bits",
            format!("B={num_bits} outside supported range 1..={MAX_BITS}"),
        ))
    }
}

pub fn encode(message: &MessagePayload) -> OneHotCodeword {
    OneHotCodeword {
        num_bits: message.num_bits(),
        hot_index: message.index(),
    }
}

/// Maps channel-use index `n` back to the message `bin(n)`.
pub fn decode_index(n: u64, num_bits: u32) -> Result<MessagePayload> {
    check_bits(num_bits)?;
    if n >= 1u64 << num_bits {
        return Err(Error::invalid(
            "index",
            format!("{n} is not below 2^{num_bits}"),
        ));
    }
    let bits = (0..num_bits).rev().map(|k| (n >> k) & 1 == 1).collect();
    Ok(MessagePayload {
        bits,
        index: n as u32,
    })
}

/// Code rate per active device, `B / 2^B`.
pub fn code_rate(num_bits: u32) -> Result<f64> {
    if num_bits == 0 || num_bits > 63 {
        return Err(Error::invalid("bits", "code rate needs 1 <= B <= 63"));
    }
    Ok(f64::from(num_bits) / (1u64 << num_bits) as f64)
}

/// Number of channel uses per block, `2^B`.
pub fn block_length(num_bits: u32) -> u64 {
    1u64 << num_bits
}
