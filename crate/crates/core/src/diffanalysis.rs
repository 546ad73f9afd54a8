//! Differential identities of modular addition and the plaintext/ciphertext
//! linear relation they induce on IC-BSIF.
//!
//! For any three plaintexts the cipher satisfies
//! `E((P1 + P2 - P0) mod 256) = (E(P1) + E(P2) - E(P0)) mod 256`, because
//! every stage is either a pixel permutation, a modular translation
//! (which cancels in the `+, +, -` pattern), or a linear map over Z/256.

use serde::Serialize;

use crate::error::Result;
use crate::filter::filter_image;
use crate::icbsif::{block_scramble, normalize, RoundContext};
use crate::image::{mod_add, mod_lincomb, mod_sub, rotate90, Image};

/// `E((a1 + a2 - a0) mod F) == (E(a1) + E(a2) - E(a0)) mod F` with
/// `E(a) = (a + q) mod F`.
pub fn check_prop1(a0: i64, a1: i64, a2: i64, q: i64, f: i64) -> bool {
    check_prop2(&[a1, a2], a0, q, f)
}

/// `E((sum a_i - (n - 1) a0) mod F) == (sum E(a_i) - (n - 1) E(a0)) mod F`.
pub fn check_prop2(a: &[i64], a0: i64, q: i64, f: i64) -> bool {
    assert!(f >= 2, "modulus must be at least 2");
    assert!(!a.is_empty(), "need at least one term");
    let e = |v: i64| (v + q).rem_euclid(f);
    let n = a.len() as i64;
    let lhs = e((a.iter().sum::<i64>() - (n - 1) * a0).rem_euclid(f));
    let rhs = (a.iter().map(|&v| e(v)).sum::<i64>() - (n - 1) * e(a0)).rem_euclid(f);
    lhs == rhs
}

/// `(P1 + P2 - P0) mod 256`.
pub fn differential_image(p1: &Image, p2: &Image, p0: &Image) -> Result<Image> {
    mod_lincomb(&[p1, p2, p0], &[1, 1, -1])
}

/// Outcome of comparing `E(dP)` with `dC'` pixel by pixel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearityReport {
    pub holds: bool,
    pub mismatched_pixels: usize,
    pub total_pixels: usize,
    pub mismatch_fraction: f64,
    pub height: usize,
    pub width: usize,
}

impl LinearityReport {
    pub fn compare(expected: &Image, actual: &Image) -> Result<Self> {
        let mismatched = expected.count_differences(actual)?;
        let total = expected.pixels().len();
        Ok(Self {
            holds: mismatched == 0,
            mismatched_pixels: mismatched,
            total_pixels: total,
            mismatch_fraction: mismatched as f64 / total as f64,
            height: expected.height(),
            width: expected.width(),
        })
    }

    pub fn agreements(&self) -> usize {
        self.total_pixels - self.mismatched_pixels
    }

    pub fn to_key_value(&self) -> String {
        format!(
            "holds={}\nmismatched_pixels={}\ntotal_pixels={}\nmismatch_fraction={:.6}\nheight={}\nwidth={}\n",
            self.holds,
            self.mismatched_pixels,
            self.total_pixels,
            self.mismatch_fraction,
            self.height,
            self.width
        )
    }
}

/// All images of one linearity experiment.
#[derive(Debug, Clone)]
pub struct LinearityExperiment {
    /// `(P1 + P2 - P0) mod 256`.
    pub delta_p: Image,
    /// `E(delta_p)`.
    pub cipher_of_delta: Image,
    /// `(C1 + C2 - C0) mod 256`.
    pub delta_of_ciphers: Image,
    pub report: LinearityReport,
}

pub fn linearity_experiment<F>(
    p0: &Image,
    p1: &Image,
    p2: &Image,
    encrypt: F,
) -> Result<LinearityExperiment>
where
    F: Fn(&Image) -> Result<Image>,
{
    let delta_p = differential_image(p1, p2, p0)?;
    let cipher_of_delta = encrypt(&delta_p)?;
    let (c0, c1, c2) = (encrypt(p0)?, encrypt(p1)?, encrypt(p2)?);
    let delta_of_ciphers = differential_image(&c1, &c2, &c0)?;
    let report = LinearityReport::compare(&cipher_of_delta, &delta_of_ciphers)?;
    Ok(LinearityExperiment {
        delta_p,
        cipher_of_delta,
        delta_of_ciphers,
        report,
    })
}

/// Checks `E((P1 + P2 - P0) mod F) = (C1 + C2 - C0) mod F` for an arbitrary
/// image map `encrypt`.
pub fn verify_linear_relation<F>(
    p0: &Image,
    p1: &Image,
    p2: &Image,
    encrypt: F,
) -> Result<LinearityReport>
where
    F: Fn(&Image) -> Result<Image>,
{
    linearity_experiment(p0, p1, p2, encrypt).map(|e| e.report)
}

/// Per-stage differential checks of one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StageReport {
    /// Scrambling commutes with pixel-wise `+` and `-`.
    pub scrambling: bool,
    /// Rotation commutes with pixel-wise `+` and `-`.
    pub rotation: bool,
    /// Normalization preserves `R1 + R2 - R0`.
    pub normalization: bool,
    /// Filtering maps `N1 - N2` to `C1 - C2`.
    pub filtering: bool,
    pub samples: usize,
}

impl StageReport {
    pub fn all_hold(&self) -> bool {
        self.scrambling && self.rotation && self.normalization && self.filtering
    }
}

fn commutes_with_add_sub(
    stage: impl Fn(&Image) -> Result<Image>,
    a: &Image,
    b: &Image,
) -> Result<bool> {
    let (sa, sb) = (stage(a)?, stage(b)?);
    Ok(stage(&mod_add(a, b)?)? == mod_add(&sa, &sb)?
        && stage(&mod_sub(a, b)?)? == mod_sub(&sa, &sb)?)
}

/// Runs the four stage checks of `ctx` on every `[P0, P1, P2]` sample.
pub fn verify_stage_differentials(
    ctx: &RoundContext,
    samples: &[[Image; 3]],
) -> Result<StageReport> {
    let mut report = StageReport {
        scrambling: true,
        rotation: true,
        normalization: true,
        filtering: true,
        samples: samples.len(),
    };
    let scramble = |img: &Image| block_scramble(img, &ctx.latin);
    let rotate = |img: &Image| Ok(rotate90(img, 1));
    let norm = |img: &Image| normalize(img, &ctx.norm);
    let filt = |img: &Image| filter_image(img, &ctx.mask);

    for [p0, p1, p2] in samples {
        report.scrambling &= commutes_with_add_sub(scramble, p1, p2)?;
        report.rotation &= commutes_with_add_sub(rotate, p1, p2)?;

        let lhs = norm(&differential_image(p1, p2, p0)?)?;
        let rhs = differential_image(&norm(p1)?, &norm(p2)?, &norm(p0)?)?;
        report.normalization &= lhs == rhs;

        let lhs = filt(&mod_sub(p1, p2)?)?;
        let rhs = mod_sub(&filt(p1)?, &filt(p2)?)?;
        report.filtering &= lhs == rhs;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keystream::{DomainTags, MasterKey, NormMatrix};

    fn pseudo(h: usize, w: usize, seed: u64) -> Image {
        let mut s = seed;
        Image::from_fn(h, w, |_, _| {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (s >> 56) as u8
        })
    }

    #[test]
    fn prop1_examples() {
        assert!(check_prop1(5, 10, 20, 100, 256));
        // both sides are (110 + 120 - 105) mod 256 = 125
        assert!(check_prop1(200, 3, 7, 0, 256));
    }

    #[test]
    fn prop1_exhaustive_f8() {
        for a0 in 0..8 {
            for a1 in 0..8 {
                for a2 in 0..8 {
                    for q in 0..8 {
                        assert!(check_prop1(a0, a1, a2, q, 8));
                    }
                }
            }
        }
    }

    #[test]
    fn prop2_specializations() {
        assert!(check_prop2(&[17], 99, 3, 256));
        assert_eq!(
            check_prop2(&[10, 20], 5, 100, 256),
            check_prop1(5, 10, 20, 100, 256)
        );
        assert!(check_prop2(&[-300, 1000, 7], -2, -9, 256));
    }

    #[test]
    fn differential_image_cases() {
        let (a, b, c) = (pseudo(4, 4, 1), pseudo(4, 4, 2), pseudo(4, 4, 3));
        assert_eq!(
            differential_image(&a, &b, &Image::zeros(4, 4)).unwrap(),
            mod_add(&a, &b).unwrap()
        );
        assert_eq!(differential_image(&c, &c, &c).unwrap(), c);
        let d = differential_image(&a, &b, &c).unwrap();
        for i in 0..16 {
            let v = (i32::from(a.pixels()[i]) + i32::from(b.pixels()[i])
                - i32::from(c.pixels()[i]))
            .rem_euclid(256);
            assert_eq!(i32::from(d.pixels()[i]), v);
        }
        assert!(differential_image(&a, &Image::zeros(4, 5), &c).is_err());
    }

    #[test]
    fn report_invariant() {
        let a = pseudo(5, 5, 1);
        let mut b = a.clone();
        assert!(LinearityReport::compare(&a, &b).unwrap().holds);
        b.set(0, 0, b.get(0, 0) ^ 1);
        let r = LinearityReport::compare(&a, &b).unwrap();
        assert!(!r.holds);
        assert_eq!(r.mismatched_pixels, 1);
        assert_eq!(r.agreements(), 24);
        assert!(r
            .to_key_value()
            .contains("holds=false\nmismatched_pixels=1\n"));
    }

    #[test]
    fn nonlinear_map_is_detected() {
        let (p0, p1, p2) = (pseudo(6, 6, 1), pseudo(6, 6, 2), pseudo(6, 6, 3));
        let square = |img: &Image| {
            Ok(Image::from_fn(img.height(), img.width(), |x, y| {
                img.get(x, y).wrapping_mul(img.get(x, y))
            }))
        };
        assert!(!verify_linear_relation(&p0, &p1, &p2, square).unwrap().holds);
        let identity = |img: &Image| Ok(img.clone());
        assert!(
            verify_linear_relation(&p0, &p1, &p2, identity)
                .unwrap()
                .holds
        );
    }

    #[test]
    fn stage_checks_hold() {
        let key = MasterKey::from_bytes([7; 32]);
        let ctx = RoundContext::derive(&key, 1, 25, 25, DomainTags::default());
        let samples: Vec<[Image; 3]> = (0..10)
            .map(|i| std::array::from_fn(|j| pseudo(25, 25, i * 3 + j as u64)))
            .collect();
        assert!(verify_stage_differentials(&ctx, &samples)
            .unwrap()
            .all_hold());
    }

    #[test]
    fn stage_special_cases() {
        let key = MasterKey::from_bytes([3; 32]);
        let mut ctx = RoundContext::derive(&key, 2, 9, 9, DomainTags::default());
        let x = pseudo(9, 9, 4);
        // equal inputs: zero differential filters to zero differential
        let zero = mod_sub(
            &filter_image(&x, &ctx.mask).unwrap(),
            &filter_image(&x, &ctx.mask).unwrap(),
        )
        .unwrap();
        assert_eq!(zero, Image::zeros(9, 9));
        assert_eq!(
            filter_image(&Image::zeros(9, 9), &ctx.mask).unwrap(),
            Image::zeros(9, 9)
        );
        // Q = 0 reduces the normalization relation to a plain combination
        ctx.norm = NormMatrix::new(Image::zeros(9, 9));
        let s = [pseudo(9, 9, 1), pseudo(9, 9, 2), pseudo(9, 9, 3)];
        let r = verify_stage_differentials(&ctx, std::slice::from_ref(&s)).unwrap();
        assert!(r.normalization);
        assert_eq!(normalize(&s[0], &ctx.norm).unwrap(), s[0]);
    }
}
