//! Causal 3x3 modular image filtering and its inverse.
//!
//! The forward pass scans row-major and computes
//!
//! ```text
//! c(x, y) = n(x, y) + sum over (a, b) != (2, 2) of w[a][b] * ref(x + a - 2, y + b - 2)   (mod 256)
//! ```
//!
//! where `ref` reads the already-produced output `c` when the position is
//! inside the image, and otherwise wraps around into the *input* `n`
//! (lowermost rows for negative `x`, rightmost columns for negative `y`).
//!
//! Inversion cannot simply run the scan backwards: a left-border pixel
//! `(x, 0)` pads from `n(x - 1, N - 1)`, which a reverse raster scan has not
//! recovered yet. Instead every pixel with `x >= 2 && y >= 2` is recovered
//! directly from `c`, and the border pixels are then resolved in dependency
//! order. On very small images the pad references can form cycles; those
//! pixels are solved as a linear system over Z/256, which fails only when
//! the forward map is genuinely not a bijection.

use crate::error::{Error, Result};
use crate::image::Image;
use crate::keystream::Mask3x3;

/// Smallest height and width accepted by the filter.
pub const MIN_FILTER_DIM: usize = 3;

fn check_dims(img: &Image) -> Result<()> {
    let (h, w) = img.dims();
    if h < MIN_FILTER_DIM || w < MIN_FILTER_DIM {
        return Err(Error::TooSmall {
            height: h,
            width: w,
            min: MIN_FILTER_DIM,
        });
    }
    Ok(())
}

/// Non-anchor taps with non-zero weight, as `(dx, dy, weight)` with
/// `dx, dy` in `-2..=0`.
fn taps(mask: &Mask3x3) -> Vec<(isize, isize, u8)> {
    let mut out = Vec::with_capacity(8);
    for a in 0..3 {
        for b in 0..3 {
            let w = mask.get(a, b);
            if (a, b) != (2, 2) && w != 0 {
                out.push((a as isize - 2, b as isize - 2, w));
            }
        }
    }
    out
}

#[inline]
fn wrap(v: isize, len: usize) -> usize {
    v.rem_euclid(len as isize) as usize
}

pub fn filter_image(input: &Image, mask: &Mask3x3) -> Result<Image> {
    check_dims(input)?;
    let (h, w) = input.dims();
    let n = input.pixels();
    let taps = taps(mask);
    let mut c = vec![0u8; h * w];

    for x in 0..h {
        for y in 0..w {
            let mut acc = n[x * w + y];
            if x >= 2 && y >= 2 {
                for &(dx, dy, wt) in &taps {
                    let r = (x as isize + dx) as usize * w + (y as isize + dy) as usize;
                    acc = acc.wrapping_add(wt.wrapping_mul(c[r]));
                }
            } else {
                for &(dx, dy, wt) in &taps {
                    let (xp, yp) = (x as isize + dx, y as isize + dy);
                    let v = if xp >= 0 && yp >= 0 {
                        c[xp as usize * w + yp as usize]
                    } else {
                        n[wrap(xp, h) * w + wrap(yp, w)]
                    };
                    acc = acc.wrapping_add(wt.wrapping_mul(v));
                }
            }
            c[x * w + y] = acc;
        }
    }
    Image::new(h, w, c)
}

/// A border pixel whose value depends on other not-yet-known pixels of `n`.
struct Pending {
    pos: usize,
    /// `c(pos)` minus all in-range contributions.
    base: u8,
    /// Pad references `(position in n, weight)`.
    pads: Vec<(usize, u8)>,
}

pub fn unfilter_image(output: &Image, mask: &Mask3x3) -> Result<Image> {
    check_dims(output)?;
    let (h, w) = output.dims();
    let c = output.pixels();
    let taps = taps(mask);
    let mut n = vec![0u8; h * w];

    for x in 2..h {
        for y in 2..w {
            let mut acc = c[x * w + y];
            for &(dx, dy, wt) in &taps {
                let r = (x as isize + dx) as usize * w + (y as isize + dy) as usize;
                acc = acc.wrapping_sub(wt.wrapping_mul(c[r]));
            }
            n[x * w + y] = acc;
        }
    }

    let is_border = |pos: usize| pos / w < 2 || pos % w < 2;
    let mut pending = Vec::new();
    for x in 0..h {
        for y in 0..w {
            if x >= 2 && y >= 2 {
                continue;
            }
            let mut base = c[x * w + y];
            let mut pads = Vec::new();
            for &(dx, dy, wt) in &taps {
                let (xp, yp) = (x as isize + dx, y as isize + dy);
                if xp >= 0 && yp >= 0 {
                    base = base.wrapping_sub(wt.wrapping_mul(c[xp as usize * w + yp as usize]));
                } else {
                    let q = wrap(xp, h) * w + wrap(yp, w);
                    if is_border(q) {
                        pads.push((q, wt));
                    } else {
                        base = base.wrapping_sub(wt.wrapping_mul(n[q]));
                    }
                }
            }
            pending.push(Pending {
                pos: x * w + y,
                base,
                pads,
            });
        }
    }

    // Kahn's algorithm over the border pad references.
    let mut slot = vec![usize::MAX; h * w];
    for (i, p) in pending.iter().enumerate() {
        slot[p.pos] = i;
    }
    let mut indegree: Vec<usize> = pending.iter().map(|p| p.pads.len()).collect();
    let mut dependents: Vec<Vec<usize>> = vec![Vec::new(); pending.len()];
    for (i, p) in pending.iter().enumerate() {
        for &(q, _) in &p.pads {
            dependents[slot[q]].push(i);
        }
    }
    let mut ready: Vec<usize> = (0..pending.len()).filter(|&i| indegree[i] == 0).collect();
    let mut resolved = vec![false; pending.len()];
    while let Some(i) = ready.pop() {
        let p = &pending[i];
        let mut v = p.base;
        for &(q, wt) in &p.pads {
            v = v.wrapping_sub(wt.wrapping_mul(n[q]));
        }
        n[p.pos] = v;
        resolved[i] = true;
        for &d in &dependents[i] {
            indegree[d] -= 1;
            if indegree[d] == 0 {
                ready.push(d);
            }
        }
    }

    let cyclic: Vec<usize> = (0..pending.len()).filter(|&i| !resolved[i]).collect();
    if !cyclic.is_empty() {
        solve_cyclic(&pending, &cyclic, &slot, &resolved, &mut n).ok_or(Error::SingularFilter {
            height: h,
            width: w,
        })?;
    }
    Image::new(h, w, n)
}

/// Solves `n(p) + sum w * n(q) = base(p)` over the unresolved pixels by
/// Gauss-Jordan elimination mod 256. Odd pivots are the units of Z/256; a
/// column with only even entries means the system is singular.
fn solve_cyclic(
    pending: &[Pending],
    cyclic: &[usize],
    slot: &[usize],
    resolved: &[bool],
    n: &mut [u8],
) -> Option<()> {
    let k = cyclic.len();
    let mut var = vec![usize::MAX; pending.len()];
    for (v, &i) in cyclic.iter().enumerate() {
        var[i] = v;
    }
    let mut rows = vec![vec![0u8; k + 1]; k];
    for (r, &i) in cyclic.iter().enumerate() {
        let p = &pending[i];
        let row = &mut rows[r];
        row[r] = 1;
        let mut rhs = p.base;
        for &(q, wt) in &p.pads {
            let j = slot[q];
            if resolved[j] {
                rhs = rhs.wrapping_sub(wt.wrapping_mul(n[q]));
            } else {
                row[var[j]] = row[var[j]].wrapping_add(wt);
            }
        }
        row[k] = rhs;
    }

    for col in 0..k {
        let pivot = (col..k).find(|&r| rows[r][col] & 1 == 1)?;
        rows.swap(col, pivot);
        let inv = inverse_mod256(rows[col][col]);
        for v in rows[col].iter_mut() {
            *v = v.wrapping_mul(inv);
        }
        let pivot_row = rows[col].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            let f = row[col];
            if r != col && f != 0 {
                for (v, &p) in row.iter_mut().zip(&pivot_row) {
                    *v = v.wrapping_sub(f.wrapping_mul(p));
                }
            }
        }
    }
    for (r, &i) in cyclic.iter().enumerate() {
        n[pending[i].pos] = rows[r][k];
    }
    Some(())
}

/// Inverse of an odd residue mod 256 by Newton iteration.
fn inverse_mod256(a: u8) -> u8 {
    debug_assert!(a & 1 == 1);
    let mut x = a; // correct to 3 bits
    for _ in 0..2 {
        x = x.wrapping_mul(2u8.wrapping_sub(a.wrapping_mul(x)));
    }
    x
}
