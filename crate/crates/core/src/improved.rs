//! Hardened IC-BSIF variant with plaintext-dependent rotations.
//!
//! Each round first runs a group of four `(block scramble, rotate)` steps
//! whose rotation angles come from a logistic-map index seeded by the
//! subkey and the pixel sum of the round input, then normalizes and
//! filters as in the original cipher.
//!
//! Decryption works because scrambling and rotation only permute pixels:
//! after unfiltering and denormalizing round `i`, the pixel sum of the
//! intermediate image equals `sum(C(i-1))`, so the decryptor derives the
//! same rotation index before inverting the group. The invariant is
//! re-checked on the recovered `C(i-1)` every round.

use crate::error::{Error, Result};
use crate::filter::{filter_image, unfilter_image};
use crate::icbsif::{
    block_scramble, block_unscramble, check_cipher_input, denormalize, normalize, RoundContext,
};
use crate::image::{rotate90, Image};
use crate::keystream::{
    logistic_rotation_index, DomainTags, LatinSquare, MasterKey, RotationIndex,
};
use crate::ImageCipher;

pub const MIN_ROUNDS: usize = 3;
pub const DEFAULT_ROUNDS: usize = 4;

/// Signed quarter turns of the four group rotations; positive is clockwise.
pub fn rotation_angles(index: &RotationIndex) -> [i32; 4] {
    index.quarter_turns()
}

pub fn scramble_rotate_group(
    img: &Image,
    latin: &LatinSquare,
    index: &RotationIndex,
) -> Result<Image> {
    rotation_angles(index)
        .into_iter()
        .try_fold(img.clone(), |state, turns| {
            Ok(rotate90(&block_scramble(&state, latin)?, turns))
        })
}

pub fn unscramble_rotate_group(
    img: &Image,
    latin: &LatinSquare,
    index: &RotationIndex,
) -> Result<Image> {
    rotation_angles(index)
        .into_iter()
        .rev()
        .try_fold(img.clone(), |state, turns| {
            block_unscramble(&rotate90(&state, -turns), latin)
        })
}

/// Where a round's rotation index comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexSource {
    /// Logistic map seeded by `k(i) ^ (2^beta * sum(C(i-1)))`.
    Logistic { beta: u32 },
    /// Same index every round, independent of the data. Exists to show
    /// that the data dependence, not the extra rotations, breaks linearity.
    Fixed(RotationIndex),
}

/// Per-round record of an encryption.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundTrace {
    pub round: usize,
    /// `sum(C(i-1))`, the value that seeded the index.
    pub input_sum: u64,
    pub index: RotationIndex,
    /// `C(i)`.
    pub output: Image,
}

#[derive(Debug, Clone)]
pub struct ImprovedCipher {
    key: MasterKey,
    rounds: usize,
    source: IndexSource,
    tags: DomainTags,
}

impl ImprovedCipher {
    /// `rounds` must be at least [`MIN_ROUNDS`].
    pub fn new(key: MasterKey, rounds: usize, beta: u32) -> Result<Self> {
        if rounds < MIN_ROUNDS {
            return Err(Error::Rounds {
                rounds,
                min: MIN_ROUNDS,
            });
        }
        Self::with_weak_rounds(key, rounds, beta)
    }

    /// Allows any `rounds >= 1`, for round-by-round experiments.
    pub fn with_weak_rounds(key: MasterKey, rounds: usize, beta: u32) -> Result<Self> {
        if rounds == 0 {
            return Err(Error::Rounds { rounds, min: 1 });
        }
        Ok(Self {
            key,
            rounds,
            source: IndexSource::Logistic { beta },
            tags: DomainTags::default(),
        })
    }

    pub fn with_index_source(mut self, source: IndexSource) -> Self {
        self.source = source;
        self
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    fn index_for(&self, ctx: &RoundContext, sum: u64) -> RotationIndex {
        match self.source {
            IndexSource::Logistic { beta } => {
                logistic_rotation_index(self.key.subkey(ctx.round), sum, beta)
            }
            IndexSource::Fixed(idx) => idx,
        }
    }

    fn contexts(&self, size: usize) -> Vec<RoundContext> {
        (1..=self.rounds)
            .map(|i| RoundContext::derive(&self.key, i, size, size, self.tags))
            .collect()
    }

    pub fn encrypt_traced(&self, plain: &Image) -> Result<Vec<RoundTrace>> {
        let size = check_cipher_input(plain)?;
        let mut state = plain.clone();
        let mut trace = Vec::with_capacity(self.rounds);
        for ctx in self.contexts(size) {
            let input_sum = state.pixel_sum();
            let index = self.index_for(&ctx, input_sum);
            let grouped = scramble_rotate_group(&state, &ctx.latin, &index)?;
            state = filter_image(&normalize(&grouped, &ctx.norm)?, &ctx.mask)?;
            trace.push(RoundTrace {
                round: ctx.round,
                input_sum,
                index,
                output: state.clone(),
            });
        }
        Ok(trace)
    }

    /// Returns the plaintext and the rotation index derived in each round
    /// (round 1 first).
    pub fn decrypt_traced(&self, cipher: &Image) -> Result<(Image, Vec<RotationIndex>)> {
        let size = check_cipher_input(cipher)?;
        let mut state = cipher.clone();
        let mut indices = Vec::with_capacity(self.rounds);
        for ctx in self.contexts(size).iter().rev() {
            let grouped = denormalize(&unfilter_image(&state, &ctx.mask)?, &ctx.norm)?;
            let sum = grouped.pixel_sum();
            let index = self.index_for(ctx, sum);
            state = unscramble_rotate_group(&grouped, &ctx.latin, &index)?;
            let found = state.pixel_sum();
            if found != sum {
                return Err(Error::SumInvariant {
                    round: ctx.round,
                    expected: sum,
                    found,
                });
            }
            indices.push(index);
        }
        indices.reverse();
        Ok((state, indices))
    }
}

impl ImageCipher for ImprovedCipher {
    fn encrypt(&self, plain: &Image) -> Result<Image> {
        let trace = self.encrypt_traced(plain)?;
        Ok(trace.into_iter().last().expect("at least one round").output)
    }

    fn decrypt(&self, cipher: &Image) -> Result<Image> {
        self.decrypt_traced(cipher).map(|(p, _)| p)
    }
}

pub fn encrypt_improved(plain: &Image, key: &MasterKey, rounds: usize, beta: u32) -> Result<Image> {
    ImprovedCipher::new(*key, rounds, beta)?.encrypt(plain)
}

pub fn decrypt_improved(
    cipher: &Image,
    key: &MasterKey,
    rounds: usize,
    beta: u32,
) -> Result<Image> {
    ImprovedCipher::new(*key, rounds, beta)?.decrypt(cipher)
}
