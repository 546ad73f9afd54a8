//! Grayscale images and the modular pixel algebra over Z/256.
//!
//! Coordinates are `(x, y)` with `x` the row and `y` the column, both
//! 0-based. Pixels are stored row-major.

use crate::error::{Error, Result};
use crate::GRAY_LEVELS;

/// An `height x width` grid of 8-bit gray levels.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Image {
    height: usize,
    width: usize,
    pixels: Vec<u8>,
}

impl std::fmt::Debug for Image {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Image")
            .field("height", &self.height)
            .field("width", &self.width)
            .field("pixel_sum", &self.pixel_sum())
            .finish()
    }
}

impl Image {
    pub fn new(height: usize, width: usize, pixels: Vec<u8>) -> Result<Self> {
        if height == 0 || width == 0 || height.checked_mul(width) != Some(pixels.len()) {
            return Err(Error::InvalidDimensions {
                height,
                width,
                pixels: pixels.len(),
            });
        }
        Ok(Self {
            height,
            width,
            pixels,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self::filled(height, width, 0)
    }

    pub fn filled(height: usize, width: usize, value: u8) -> Self {
        assert!(height > 0 && width > 0, "image dimensions must be non-zero");
        Self {
            height,
            width,
            pixels: vec![value; height * width],
        }
    }

    /// Builds an image by evaluating `f(x, y)` at every position.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        assert!(height > 0 && width > 0, "image dimensions must be non-zero");
        let mut pixels = Vec::with_capacity(height * width);
        for x in 0..height {
            for y in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self {
            height,
            width,
            pixels,
        }
    }

    /// A zero image with a single pixel set, used as a basis ciphertext.
    pub fn impulse(height: usize, width: usize, x: usize, y: usize, value: u8) -> Self {
        let mut img = Self::zeros(height, width);
        img.set(x, y, value);
        img
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn is_square(&self) -> bool {
        self.height == self.width
    }

    #[inline]
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[x * self.width + y]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.pixels[x * self.width + y] = value;
    }

    pub fn ensure_same_shape(&self, other: &Image) -> Result<()> {
        if self.dims() == other.dims() {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                expected_h: self.height,
                expected_w: self.width,
                found_h: other.height,
                found_w: other.width,
            })
        }
    }

    /// Exact sum of all pixel values, without modular reduction.
    pub fn pixel_sum(&self) -> u64 {
        self.pixels.iter().map(|&p| u64::from(p)).sum()
    }

    /// Pixel-value histogram.
    pub fn histogram(&self) -> [u64; GRAY_LEVELS] {
        let mut hist = [0u64; GRAY_LEVELS];
        for &p in &self.pixels {
            hist[usize::from(p)] += 1;
        }
        hist
    }

    /// Number of positions where `self` and `other` differ.
    pub fn count_differences(&self, other: &Image) -> Result<usize> {
        self.ensure_same_shape(other)?;
        Ok(self
            .pixels
            .iter()
            .zip(&other.pixels)
            .filter(|(a, b)| a != b)
            .count())
    }

    fn zip_with(&self, other: &Image, f: impl Fn(u8, u8) -> u8) -> Result<Image> {
        self.ensure_same_shape(other)?;
        Ok(Image {
            height: self.height,
            width: self.width,
            pixels: self
                .pixels
                .iter()
                .zip(&other.pixels)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }
}

/// Pixel-wise `(a + b) mod 256`.
pub fn mod_add(a: &Image, b: &Image) -> Result<Image> {
    a.zip_with(b, u8::wrapping_add)
}

/// Pixel-wise `(a - b) mod 256`.
pub fn mod_sub(a: &Image, b: &Image) -> Result<Image> {
    a.zip_with(b, u8::wrapping_sub)
}

/// Pixel-wise `(sum_i coeffs[i] * images[i]) mod 256` with the canonical
/// non-negative residue.
///
/// Accumulation runs in `i64` with wrapping arithmetic. Since 256 divides
/// 2^64, wrapping never changes the residue, so the single final
/// `rem_euclid` is exact for any coefficient magnitudes.
pub fn mod_lincomb(images: &[&Image], coeffs: &[i64]) -> Result<Image> {
    let first = images.first().ok_or(Error::EmptyCombination)?;
    if images.len() != coeffs.len() {
        return Err(Error::CoefficientCount {
            images: images.len(),
            coeffs: coeffs.len(),
        });
    }
    for img in &images[1..] {
        first.ensure_same_shape(img)?;
    }
    let mut acc = vec![0i64; first.pixels.len()];
    for (img, &k) in images.iter().zip(coeffs) {
        if k == 0 {
            continue;
        }
        for (a, &p) in acc.iter_mut().zip(&img.pixels) {
            *a = a.wrapping_add(k.wrapping_mul(i64::from(p)));
        }
    }
    let modulus = GRAY_LEVELS as i64;
    Ok(Image {
        height: first.height,
        width: first.width,
        pixels: acc
            .into_iter()
            .map(|a| a.rem_euclid(modulus) as u8)
            .collect(),
    })
}

/// Rotates by `quarter_turns * 90` degrees; positive is clockwise.
pub fn rotate90(img: &Image, quarter_turns: i32) -> Image {
    let (h, w) = img.dims();
    let src = &img.pixels;
    match quarter_turns.rem_euclid(4) {
        0 => img.clone(),
        1 => Image::from_fn(w, h, |x, y| src[(h - 1 - y) * w + x]),
        2 => {
            let mut pixels = src.clone();
            pixels.reverse();
            Image {
                height: h,
                width: w,
                pixels,
            }
        }
        _ => Image::from_fn(w, h, |x, y| src[y * w + (w - 1 - x)]),
    }
}
