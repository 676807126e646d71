//! Two-stage PAM constellations.
//!
//! A `2^m`-PAM is split into a soft stage carrying the `m1` least significant
//! index bits and a hard stage carrying the remaining `m2 = m - m1`:
//! `B = B2 * M1 + B1`. Within each stage the index is Gray labelled, so the
//! points sharing a stage-1 index (a coset) are spaced `M1 * d` apart.
//! Square `2^(2m)`-QAM is handled as two independent uses of the PAM.

use thiserror::Error;

pub const MAX_BITS_PER_DIM: u32 = 14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstellationError {
    #[error("invalid bit split m = {m}, m1 = {m1} (need 1 <= m1 <= m <= {MAX_BITS_PER_DIM})")]
    InvalidSplit { m: u32, m1: u32 },
    #[error("point spacing must be positive and finite, got {0}")]
    InvalidSpacing(f64),
    #[error("stage index out of range: b1 = {b1} (< {m1_card}), b2 = {b2} (< {m2_card})")]
    IndexOutOfRange {
        b1: usize,
        b2: usize,
        m1_card: usize,
        m2_card: usize,
    },
    #[error("expected {expected} bits, got {got}")]
    BitLength { expected: usize, got: usize },
    #[error("value {k} does not fit in {nbits} bits")]
    GrayRange { k: usize, nbits: u32 },
}

/// Binary reflected Gray code of `k` on `nbits` bits.
pub fn gray_map(k: usize, nbits: u32) -> Result<usize, ConstellationError> {
    check_range(k, nbits)?;
    Ok(k ^ (k >> 1))
}

/// Inverse of [`gray_map`].
pub fn gray_unmap(g: usize, nbits: u32) -> Result<usize, ConstellationError> {
    check_range(g, nbits)?;
    Ok(gray_decode(g))
}

fn check_range(k: usize, nbits: u32) -> Result<(), ConstellationError> {
    if nbits >= usize::BITS || k >> nbits != 0 {
        return Err(ConstellationError::GrayRange { k, nbits });
    }
    Ok(())
}

#[inline]
fn gray_decode(mut g: usize) -> usize {
    let mut shift = 1;
    while shift < usize::BITS {
        g ^= g >> shift;
        shift <<= 1;
    }
    g
}

/// Two-stage labelled PAM constellation. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoStageConstellation {
    m: u32,
    m1: u32,
    d: f64,
    points: Vec<f64>,
    gray1: Vec<usize>,
    gray2: Vec<usize>,
}

impl TwoStageConstellation {
    /// Builds the PAM with spacing `d`.
    pub fn with_spacing(m: u32, m1: u32, d: f64) -> Result<Self, ConstellationError> {
        if m < 1 || m1 < 1 || m1 > m || m > MAX_BITS_PER_DIM {
            return Err(ConstellationError::InvalidSplit { m, m1 });
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(ConstellationError::InvalidSpacing(d));
        }
        let card = 1usize << m;
        let centre = (card as f64 - 1.0) / 2.0;
        let points = (0..card).map(|b| d * (b as f64 - centre)).collect();
        let gray = |bits: u32| (0..1usize << bits).map(|k| k ^ (k >> 1)).collect();
        Ok(TwoStageConstellation {
            m,
            m1,
            d,
            points,
            gray1: gray(m1),
            gray2: gray(m - m1),
        })
    }

    /// Builds the PAM with unit spacing, or with the spacing giving unit
    /// average energy per dimension when `unit_energy` is set.
    pub fn build_pam(m: u32, m1: u32, unit_energy: bool) -> Result<Self, ConstellationError> {
        if m < 1 || m1 < 1 || m1 > m || m > MAX_BITS_PER_DIM {
            return Err(ConstellationError::InvalidSplit { m, m1 });
        }
        let d = if unit_energy {
            let card = (1u64 << m) as f64;
            (12.0 / (card * card - 1.0)).sqrt()
        } else {
            1.0
        };
        Self::with_spacing(m, m1, d)
    }

    pub fn m(&self) -> u32 {
        self.m
    }
    pub fn m1(&self) -> u32 {
        self.m1
    }
    pub fn m2(&self) -> u32 {
        self.m - self.m1
    }
    /// `M = 2^m`.
    pub fn order(&self) -> usize {
        self.points.len()
    }
    /// `M1 = 2^m1`.
    pub fn m1_card(&self) -> usize {
        1 << self.m1
    }
    /// `M2 = 2^m2`.
    pub fn m2_card(&self) -> usize {
        1 << self.m2()
    }
    pub fn spacing(&self) -> f64 {
        self.d
    }
    pub fn points(&self) -> &[f64] {
        &self.points
    }
    pub fn gray1(&self) -> &[usize] {
        &self.gray1
    }
    pub fn gray2(&self) -> &[usize] {
        &self.gray2
    }
    /// Position of point 0, `-(M-1)/2 * d`.
    pub fn offset(&self) -> f64 {
        self.points[0]
    }
    /// Distance between consecutive points of one coset, `M1 * d`.
    pub fn coset_period(&self) -> f64 {
        self.m1_card() as f64 * self.d
    }
    /// Average energy `d² (M² - 1) / 12`.
    pub fn energy(&self) -> f64 {
        let card = self.order() as f64;
        self.d * self.d * (card * card - 1.0) / 12.0
    }

    /// Composite index `b2 * M1 + b1`.
    pub fn index(&self, b1: usize, b2: usize) -> Result<usize, ConstellationError> {
        if b1 >= self.m1_card() || b2 >= self.m2_card() {
            return Err(ConstellationError::IndexOutOfRange {
                b1,
                b2,
                m1_card: self.m1_card(),
                m2_card: self.m2_card(),
            });
        }
        Ok(b2 * self.m1_card() + b1)
    }

    /// Splits a composite index into `(b1, b2)`.
    pub fn split(&self, index: usize) -> (usize, usize) {
        (index & (self.m1_card() - 1), index >> self.m1)
    }

    pub fn map_symbol(&self, b1: usize, b2: usize) -> Result<f64, ConstellationError> {
        Ok(self.points[self.index(b1, b2)?])
    }

    /// Stage indices from the two Gray-labelled bit groups (MSB first).
    pub fn bits_to_stage_indices(
        &self,
        bits1: &[u8],
        bits2: &[u8],
    ) -> Result<(usize, usize), ConstellationError> {
        let g1 = pack_bits(bits1, self.m1 as usize)?;
        let g2 = pack_bits(bits2, self.m2() as usize)?;
        Ok((gray_decode(g1), gray_decode(g2)))
    }

    /// Gray-labelled bit groups (MSB first) for a pair of stage indices.
    pub fn stage_indices_to_bits(
        &self,
        b1: usize,
        b2: usize,
    ) -> Result<(Vec<u8>, Vec<u8>), ConstellationError> {
        self.index(b1, b2)?;
        Ok((
            unpack_bits(self.gray1[b1], self.m1 as usize),
            unpack_bits(self.gray2[b2], self.m2() as usize),
        ))
    }

    /// Bit `j` (MSB first) of the Gray label of stage-1 index `b1`.
    #[inline]
    pub fn stage1_bit(&self, b1: usize, j: usize) -> u8 {
        ((self.gray1[b1] >> (self.m1 as usize - 1 - j)) & 1) as u8
    }

    /// Bit `j` (MSB first) of the Gray label of stage-2 index `b2`.
    #[inline]
    pub fn stage2_bit(&self, b2: usize, j: usize) -> u8 {
        ((self.gray2[b2] >> (self.m2() as usize - 1 - j)) & 1) as u8
    }
}

fn pack_bits(bits: &[u8], expected: usize) -> Result<usize, ConstellationError> {
    if bits.len() != expected {
        return Err(ConstellationError::BitLength {
            expected,
            got: bits.len(),
        });
    }
    Ok(bits.iter().fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize))
}

fn unpack_bits(value: usize, n: usize) -> Vec<u8> {
    (0..n).map(|j| ((value >> (n - 1 - j)) & 1) as u8).collect()
}
