//! The four-round IC-BSIF cipher: block scrambling, a fixed clockwise
//! rotation, normalization and causal filtering per round.

use crate::error::{Error, Result};
use crate::filter::{filter_image, unfilter_image};
use crate::image::{mod_add, mod_sub, rotate90, Image};
use crate::keystream::{
    gen_latin_square, gen_mask, gen_norm_matrix, DomainTags, LatinSquare, Mask3x3, MasterKey,
    NormMatrix,
};
use crate::ImageCipher;

pub const ROUNDS: usize = 4;

/// Smallest side length accepted by the full ciphers. From 5x5 upward the
/// filter's border dependencies are acyclic, so every mask is invertible.
pub const MIN_CIPHER_DIM: usize = 5;

/// `min(floor(sqrt(M)), floor(sqrt(N)))`.
pub fn block_size(height: usize, width: usize) -> usize {
    height.isqrt().min(width.isqrt())
}

fn check_region(img: &Image, latin: &LatinSquare) -> Result<usize> {
    let l = latin.order();
    let region = l * l;
    if region > img.height() || region > img.width() {
        return Err(Error::RegionTooLarge {
            region,
            height: img.height(),
            width: img.width(),
        });
    }
    Ok(l)
}

/// Visits every `(source, destination)` pair of the scrambling permutation,
/// as flat row-major offsets.
///
/// Within the top-left `L^2 x L^2` region, the pixel at intra-block offset
/// `(u, v)` of block `(i, j)` moves to offset `(v, O((u + i) mod L, (v + j) mod L))`
/// of the same block. For fixed `v` the column `O(., (v + j) mod L)` is a
/// permutation, so the map is a bijection.
fn for_each_move(width: usize, latin: &LatinSquare, mut f: impl FnMut(usize, usize)) {
    let l = latin.order();
    for bi in 0..l {
        for bj in 0..l {
            let (ox, oy) = (bi * l, bj * l);
            for u in 0..l {
                for v in 0..l {
                    let target = latin.get((u + bi) % l, (v + bj) % l);
                    f((ox + u) * width + oy + v, (ox + v) * width + oy + target);
                }
            }
        }
    }
}

pub fn block_scramble(img: &Image, latin: &LatinSquare) -> Result<Image> {
    check_region(img, latin)?;
    let mut out = img.clone();
    let (src, dst) = (img.pixels(), out.pixels_mut());
    for_each_move(img.width(), latin, |s, d| dst[d] = src[s]);
    Ok(out)
}

pub fn block_unscramble(img: &Image, latin: &LatinSquare) -> Result<Image> {
    check_region(img, latin)?;
    let mut out = img.clone();
    let (src, dst) = (img.pixels(), out.pixels_mut());
    for_each_move(img.width(), latin, |s, d| dst[s] = src[d]);
    Ok(out)
}

pub fn normalize(img: &Image, q: &NormMatrix) -> Result<Image> {
    mod_add(img, q.as_image())
}

pub fn denormalize(img: &Image, q: &NormMatrix) -> Result<Image> {
    mod_sub(img, q.as_image())
}

/// Key material of one round for a given image size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundContext {
    pub round: usize,
    pub latin: LatinSquare,
    pub norm: NormMatrix,
    pub mask: Mask3x3,
    pub block_size: usize,
}

impl RoundContext {
    pub fn derive(
        key: &MasterKey,
        round: usize,
        height: usize,
        width: usize,
        tags: DomainTags,
    ) -> Self {
        let k = key.subkey(round);
        let l = block_size(height, width);
        Self {
            round,
            latin: gen_latin_square(k, l, tags.scramble),
            norm: gen_norm_matrix(k, height, width, tags.normalize),
            mask: gen_mask(k, tags.mask),
            block_size: l,
        }
    }
}

pub(crate) fn check_cipher_input(img: &Image) -> Result<usize> {
    let (h, w) = img.dims();
    if h != w {
        return Err(Error::NotSquare {
            height: h,
            width: w,
        });
    }
    if h < MIN_CIPHER_DIM {
        return Err(Error::TooSmall {
            height: h,
            width: w,
            min: MIN_CIPHER_DIM,
        });
    }
    Ok(h)
}

/// IC-BSIF under a master key.
#[derive(Debug, Clone)]
pub struct Icbsif {
    key: MasterKey,
    tags: DomainTags,
}

impl Icbsif {
    pub fn new(key: MasterKey) -> Self {
        Self::with_domain_tags(key, DomainTags::default())
    }

    /// Uses alternative generator tags, i.e. a different key schedule.
    pub fn with_domain_tags(key: MasterKey, tags: DomainTags) -> Self {
        Self { key, tags }
    }

    pub fn round_contexts(&self, size: usize) -> Vec<RoundContext> {
        (1..=ROUNDS)
            .map(|i| RoundContext::derive(&self.key, i, size, size, self.tags))
            .collect()
    }

    /// Intermediate ciphertexts `C(1)..C(4)`.
    pub fn encrypt_rounds(&self, plain: &Image) -> Result<Vec<Image>> {
        let size = check_cipher_input(plain)?;
        let mut state = plain.clone();
        let mut outputs = Vec::with_capacity(ROUNDS);
        for ctx in self.round_contexts(size) {
            state = encrypt_round(&state, &ctx)?;
            outputs.push(state.clone());
        }
        Ok(outputs)
    }
}

/// One forward round: scramble, rotate clockwise, normalize, filter.
pub fn encrypt_round(img: &Image, ctx: &RoundContext) -> Result<Image> {
    let s = block_scramble(img, &ctx.latin)?;
    let r = rotate90(&s, 1);
    let n = normalize(&r, &ctx.norm)?;
    filter_image(&n, &ctx.mask)
}

pub fn decrypt_round(img: &Image, ctx: &RoundContext) -> Result<Image> {
    let n = unfilter_image(img, &ctx.mask)?;
    let r = denormalize(&n, &ctx.norm)?;
    let s = rotate90(&r, -1);
    block_unscramble(&s, &ctx.latin)
}

impl ImageCipher for Icbsif {
    fn encrypt(&self, plain: &Image) -> Result<Image> {
        let size = check_cipher_input(plain)?;
        self.round_contexts(size)
            .iter()
            .try_fold(plain.clone(), |state, ctx| encrypt_round(&state, ctx))
    }

    fn decrypt(&self, cipher: &Image) -> Result<Image> {
        let size = check_cipher_input(cipher)?;
        self.round_contexts(size)
            .iter()
            .rev()
            .try_fold(cipher.clone(), |state, ctx| decrypt_round(&state, ctx))
    }
}

/// Encrypts with IC-BSIF under `key`.
pub fn encrypt(plain: &Image, key: &MasterKey) -> Result<Image> {
    Icbsif::new(*key).encrypt(plain)
}

pub fn decrypt(cipher: &Image, key: &MasterKey) -> Result<Image> {
    Icbsif::new(*key).decrypt(cipher)
}
