//! A cryptanalysis workbench for the IC-BSIF image cipher (block-based
//! scrambling and image filtering).
//!
//! * [`icbsif`] implements the four-round cipher.
//! * [`diffanalysis`] checks the differential identities that make the
//!   cipher affine over Z/256.
//! * [`codebook`] turns that into a total break with `M N + 1` chosen
//!   ciphertexts.
//! * [`improved`] is the hardened variant whose rotations depend on the
//!   data, which destroys the affine relation.

pub mod codebook;
pub mod diffanalysis;
pub mod error;
pub mod filter;
pub mod icbsif;
pub mod image;
pub mod improved;
pub mod keystream;
pub mod pgm;
pub mod samples;
pub mod stats;

/// Number of gray levels `F`; all pixel arithmetic is mod 256.
pub const GRAY_LEVELS: usize = 256;

pub use codebook::{build_codebook, recover, Codebook, DecryptionOracle};
pub use error::{Error, Result};
pub use icbsif::Icbsif;
pub use image::Image;
pub use improved::ImprovedCipher;
pub use keystream::MasterKey;

/// A square-image cipher with exact decryption.
pub trait ImageCipher: Send + Sync {
    fn encrypt(&self, plain: &Image) -> Result<Image>;
    fn decrypt(&self, cipher: &Image) -> Result<Image>;
}

impl<C: ImageCipher + ?Sized> ImageCipher for Box<C> {
    fn encrypt(&self, plain: &Image) -> Result<Image> {
        (**self).encrypt(plain)
    }

    fn decrypt(&self, cipher: &Image) -> Result<Image> {
        (**self).decrypt(cipher)
    }
}
