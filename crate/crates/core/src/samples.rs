//! Deterministic synthetic test images.
//!
//! `portrait` is a smooth, strongly correlated scene standing in for the
//! usual portrait test photograph, `texture` a busy high-frequency one
//! standing in for the usual animal-fur photograph. Both scale to any size.

use std::f64::consts::PI;

use crate::image::Image;

fn to_level(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

fn hash2(x: usize, y: usize) -> u32 {
    let mut h = (x as u32).wrapping_mul(0x8DA6_B343) ^ (y as u32).wrapping_mul(0xD816_3841);
    h ^= h >> 15;
    h = h.wrapping_mul(0x2C1B_3C6D);
    h ^= h >> 12;
    h = h.wrapping_mul(0x297A_2D39);
    h ^ (h >> 15)
}

/// Smooth gradients, a lit ellipse and a few soft shapes, with +-3 grain.
pub fn portrait(size: usize) -> Image {
    let s = size as f64;
    Image::from_fn(size, size, |x, y| {
        let (u, v) = (x as f64 / s, y as f64 / s);
        let mut val = 70.0 + 90.0 * v + 25.0 * (3.0 * PI * u).sin();
        let (du, dv) = ((u - 0.48) / 0.30, (v - 0.52) / 0.21);
        let r2 = du * du + dv * dv;
        if r2 < 1.0 {
            val = 200.0 - 70.0 * r2;
            for ev in [0.44, 0.60] {
                let (eu, evv) = ((u - 0.40) / 0.04, (v - ev) / 0.05);
                if eu * eu + evv * evv < 1.0 {
                    val = 40.0;
                }
            }
            let (mu, mv) = ((u - 0.62) / 0.03, (v - 0.52) / 0.09);
            if mu * mu + mv * mv < 1.0 {
                val = 110.0;
            }
        }
        if (0.12..0.20).contains(&u) && v > 0.2 {
            val = 0.5 * val + 60.0;
        }
        let grain = (hash2(x, y) % 7) as f64 - 3.0;
        to_level(val + grain)
    })
}

/// Interfering stripes plus per-pixel noise.
pub fn texture(size: usize) -> Image {
    let s = size as f64;
    Image::from_fn(size, size, |x, y| {
        let (u, v) = (x as f64 / s, y as f64 / s);
        let stripes = 55.0 * (22.0 * PI * u + 6.0 * (9.0 * PI * v).sin()).sin();
        let fur = (hash2(x, y) % 101) as f64 - 50.0;
        to_level(128.0 + stripes + fur)
    })
}

pub fn blank(size: usize) -> Image {
    Image::zeros(size, size)
}

/// Swaps the last two pixels in raster order.
pub fn swap_last_two(img: &Image) -> Image {
    let mut out = img.clone();
    let px = out.pixels_mut();
    let n = px.len();
    px.swap(n - 1, n - 2);
    out
}
