//! Fixed-point binary expansion of client values.
//!
//! A codec maps a real value to `b = integer_bits + fractional_bits` bits, least
//! significant bit first, so that bit `j` carries weight `2^(j - fractional_bits)`.
//! Conversion truncates toward zero, which biases each encoded magnitude down by
//! less than `2^-fractional_bits`; raise `fractional_bits` to make that negligible.
//!
//! Signed inputs are handled in one of two ways:
//!
//! * [`SignedMode::AdditiveShift`] adds a public constant `C` before encoding and
//!   subtracts it again after decoding.
//! * [`SignedMode::BitSplit`] exposes `2b` logical bits: indices `0..b` carry the
//!   magnitude of non-negative values and `b..2b` the magnitude of negative ones.
//!   At most one half is non-zero for any value.

use crate::error::{Error, Result};

/// Largest supported bit depth; `4^j` must stay exact in `f64` aggregation.
pub const MAX_BITS: u32 = 62;

/// How negative inputs are mapped onto non-negative bit patterns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SignedMode {
    Unsigned,
    AdditiveShift(f64),
    BitSplit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointCodec {
    integer_bits: u32,
    fractional_bits: u32,
    mode: SignedMode,
}

/// The bits of one encoded value, LSB first.
///
/// In bit-split mode the vector holds `2b` entries: the positive part followed by
/// the negative part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitVector {
    bits: Vec<u8>,
    split_at: Option<usize>,
}

impl BitVector {
    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Magnitude bits of the non-negative part (all bits when unsplit).
    pub fn positive_part(&self) -> &[u8] {
        match self.split_at {
            Some(b) => &self.bits[..b],
            None => &self.bits,
        }
    }

    /// Magnitude bits of the negative part; empty unless the codec splits signs.
    pub fn negative_part(&self) -> &[u8] {
        match self.split_at {
            Some(b) => &self.bits[b..],
            None => &[],
        }
    }
}

impl FixedPointCodec {
    pub fn new(integer_bits: u32, fractional_bits: u32, mode: SignedMode) -> Result<Self> {
        let total = integer_bits
            .checked_add(fractional_bits)
            .ok_or_else(|| Error::InvalidCodec("bit count overflow".into()))?;
        if total == 0 || total > MAX_BITS {
            return Err(Error::InvalidCodec(format!(
                "total bits must be in 1..={MAX_BITS}, got {total}"
            )));
        }
        if let SignedMode::AdditiveShift(shift) = mode {
            if !shift.is_finite() || shift < 0.0 {
                return Err(Error::InvalidCodec(format!(
                    "additive shift must be finite and non-negative, got {shift}"
                )));
            }
        }
        Ok(Self {
            integer_bits,
            fractional_bits,
            mode,
        })
    }

    /// Unsigned integer codec with `bits` integer bits.
    pub fn unsigned(bits: u32) -> Result<Self> {
        Self::new(bits, 0, SignedMode::Unsigned)
    }

    pub fn integer_bits(&self) -> u32 {
        self.integer_bits
    }

    pub fn fractional_bits(&self) -> u32 {
        self.fractional_bits
    }

    pub fn mode(&self) -> SignedMode {
        self.mode
    }

    /// Bit depth `b` of one magnitude.
    pub fn total_bits(&self) -> usize {
        (self.integer_bits + self.fractional_bits) as usize
    }

    /// Number of bit indices a client may be asked about (`2b` when splitting signs).
    pub fn logical_bits(&self) -> usize {
        match self.mode {
            SignedMode::BitSplit => 2 * self.total_bits(),
            _ => self.total_bits(),
        }
    }

    /// Same layout with a different signed mode.
    pub fn with_mode(&self, mode: SignedMode) -> Result<Self> {
        Self::new(self.integer_bits, self.fractional_bits, mode)
    }

    /// Grid spacing, `2^-fractional_bits`.
    pub fn resolution(&self) -> f64 {
        (-(self.fractional_bits as f64)).exp2()
    }

    fn scale(&self) -> f64 {
        (self.fractional_bits as f64).exp2()
    }

    fn max_raw(&self) -> u64 {
        (1u64 << self.total_bits()) - 1
    }

    /// Largest encodable magnitude.
    pub fn max_magnitude(&self) -> f64 {
        self.max_raw() as f64 / self.scale()
    }

    /// Inclusive range of inputs that encode exactly onto the grid limits.
    pub fn range(&self) -> (f64, f64) {
        let max = self.max_magnitude();
        match self.mode {
            SignedMode::Unsigned => (0.0, max),
            SignedMode::AdditiveShift(c) => (-c, max - c),
            SignedMode::BitSplit => (-max, max),
        }
    }

    /// Clip `x` into [`range`](Self::range). Returns the clipped value and whether
    /// clipping happened.
    pub fn clip(&self, x: f64) -> (f64, bool) {
        let (low, high) = self.range();
        if x < low {
            (low, true)
        } else if x > high {
            (high, true)
        } else {
            (x, false)
        }
    }

    fn truncate(&self, magnitude: f64, original: f64) -> Result<u64> {
        let scaled = (magnitude * self.scale()).trunc();
        // NaN fails both comparisons.
        if !(scaled >= 0.0 && scaled <= self.max_raw() as f64) {
            let (low, high) = self.range();
            return Err(Error::OutOfRange {
                value: original,
                low,
                high,
            });
        }
        Ok(scaled as u64)
    }

    /// Raw integer magnitudes `(positive, negative)`; the negative lane is always
    /// zero outside bit-split mode.
    pub fn raw_parts(&self, x: f64) -> Result<(u64, u64)> {
        match self.mode {
            SignedMode::Unsigned => Ok((self.truncate(x, x)?, 0)),
            SignedMode::AdditiveShift(c) => Ok((self.truncate(x + c, x)?, 0)),
            SignedMode::BitSplit => {
                let raw = self.truncate(x.abs(), x)?;
                if x < 0.0 {
                    Ok((0, raw))
                } else {
                    Ok((raw, 0))
                }
            }
        }
    }

    pub fn encode(&self, x: f64) -> Result<BitVector> {
        let (pos, neg) = self.raw_parts(x)?;
        let b = self.total_bits();
        let lane = |raw: u64| (0..b).map(move |j| ((raw >> j) & 1) as u8);
        let (bits, split_at) = match self.mode {
            SignedMode::BitSplit => (lane(pos).chain(lane(neg)).collect(), Some(b)),
            _ => (lane(pos).collect(), None),
        };
        Ok(BitVector { bits, split_at })
    }

    /// Bit `index` of the encoding of `x`.
    pub fn bit_at(&self, x: f64, index: usize) -> Result<u8> {
        let width = self.logical_bits();
        if index >= width {
            return Err(Error::BitIndex { index, width });
        }
        let (pos, neg) = self.raw_parts(x)?;
        let b = self.total_bits();
        let bit = if index < b {
            (pos >> index) & 1
        } else {
            (neg >> (index - b)) & 1
        };
        Ok(bit as u8)
    }

    /// Magnitude exponent of a logical bit (its position within its lane).
    pub fn magnitude_index(&self, index: usize) -> usize {
        index % self.total_bits()
    }

    /// Signed reconstruction weight of logical bit `index`.
    pub fn bit_weight(&self, index: usize) -> f64 {
        let b = self.total_bits();
        let exponent = (index % b) as f64 - self.fractional_bits as f64;
        let weight = exponent.exp2();
        if index >= b {
            -weight
        } else {
            weight
        }
    }

    /// Decode per-bit means (reported averages, possibly outside `[0, 1]` after
    /// randomized-response unbiasing) into an estimate of the mean value.
    pub fn decode_means(&self, bit_means: &[f64]) -> Result<f64> {
        let expected = self.logical_bits();
        if bit_means.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: bit_means.len(),
            });
        }
        let sum: f64 = bit_means
            .iter()
            .enumerate()
            .map(|(j, m)| self.bit_weight(j) * m)
            .sum();
        Ok(match self.mode {
            SignedMode::AdditiveShift(c) => sum - c,
            _ => sum,
        })
    }

    /// The value `x` becomes after a round trip through the codec.
    pub fn quantize(&self, x: f64) -> Result<f64> {
        let (pos, neg) = self.raw_parts(x)?;
        let scale = self.scale();
        let value = (pos as f64 - neg as f64) / scale;
        Ok(match self.mode {
            SignedMode::AdditiveShift(c) => value - c,
            _ => value,
        })
    }
}
