//! Key material: master key, per-round subkeys, and everything derived from
//! them (Latin scrambling box, normalization matrix, filter mask, and the
//! plaintext-dependent rotation index of the hardened cipher).
//!
//! All randomness comes from the logistic map `x <- 4x(1 - x)` evaluated in
//! binary64 with the fixed expression order `4.0 * x * (1.0 - x)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::image::Image;

/// 256-bit master key, written as 64 hex characters.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct MasterKey([u8; 32]);

impl MasterKey {
    pub const fn from_bytes(bytes: [u8; 32]) -> Self {
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    /// The `i`-th subkey (1-based), reusing the eight key words cyclically.
    pub fn subkey(&self, round: usize) -> SubKey {
        assert!(round >= 1, "rounds are numbered from 1");
        let off = 4 * ((round - 1) % 8);
        let word = [
            self.0[off],
            self.0[off + 1],
            self.0[off + 2],
            self.0[off + 3],
        ];
        SubKey(u32::from_be_bytes(word))
    }
}

impl FromStr for MasterKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.len() != 64 {
            return Err(Error::Key(format!(
                "expected 64 hex characters, got {}",
                s.len()
            )));
        }
        let mut bytes = [0u8; 32];
        hex::decode_to_slice(s, &mut bytes).map_err(|e| Error::Key(e.to_string()))?;
        Ok(Self(bytes))
    }
}

impl fmt::Debug for MasterKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("MasterKey(..)")
    }
}

/// 32-bit round subkey `k(i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SubKey(pub u32);

/// Subkeys `k(1)..k(rounds)`; word `i` sits at bit offset `32 * ((i - 1) mod 8)`
/// of the master key, big-endian.
pub fn derive_subkeys(key: &MasterKey, rounds: usize) -> Vec<SubKey> {
    (1..=rounds).map(|i| key.subkey(i)).collect()
}

/// Maps a 32-bit word into the open interval (0, 1).
#[inline]
pub fn logistic_seed(v: u32) -> f64 {
    (f64::from(v) + 1.0) / 4_294_967_298.0
}

/// Orbit of the fully chaotic logistic map, yielding `x1, x2, ...`.
#[derive(Debug, Clone)]
pub struct LogisticMap {
    x: f64,
}

impl LogisticMap {
    pub fn new(x0: f64) -> Self {
        Self { x: x0 }
    }
}

impl Iterator for LogisticMap {
    type Item = f64;

    #[inline]
    fn next(&mut self) -> Option<f64> {
        self.x = 4.0 * self.x * (1.0 - self.x);
        Some(self.x)
    }
}

const WARM_UP: usize = 100;

/// Generator selector mixed into a stream seed.
pub type DomainTag = u32;

/// Domain tags of the three per-round generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DomainTags {
    pub scramble: DomainTag,
    pub normalize: DomainTag,
    pub mask: DomainTag,
}

impl Default for DomainTags {
    fn default() -> Self {
        Self {
            scramble: 0,
            normalize: 1,
            mask: 2,
        }
    }
}

/// Unbounded byte stream keyed by `(subkey, tag)`.
///
/// Seed `x0 = ((k ^ tag * 2^27) + 1) / (2^32 + 2)`; the first 100 iterates
/// are discarded and every later iterate emits `min(floor(256 x), 255)`.
#[derive(Debug, Clone)]
pub struct KeyedByteStream {
    orbit: LogisticMap,
}

impl KeyedByteStream {
    pub fn new(subkey: SubKey, tag: DomainTag) -> Self {
        let v = subkey.0 ^ tag.wrapping_shl(27);
        let mut orbit = LogisticMap::new(logistic_seed(v));
        for _ in 0..WARM_UP {
            orbit.next();
        }
        Self { orbit }
    }

    /// Four bytes as one big-endian word.
    pub fn next_word(&mut self) -> u32 {
        let mut w = 0u32;
        for _ in 0..4 {
            w = (w << 8) | u32::from(self.next_byte());
        }
        w
    }

    #[inline]
    pub fn next_byte(&mut self) -> u8 {
        let x = self.orbit.next().expect("infinite orbit");
        (x * 256.0).floor().clamp(0.0, 255.0) as u8
    }
}

impl Iterator for KeyedByteStream {
    type Item = u8;

    #[inline]
    fn next(&mut self) -> Option<u8> {
        Some(self.next_byte())
    }
}

pub fn keyed_byte_stream(subkey: SubKey, tag: DomainTag) -> KeyedByteStream {
    KeyedByteStream::new(subkey, tag)
}

/// An `L x L` array in which every row and column is a permutation of `0..L`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatinSquare {
    order: usize,
    entries: Vec<usize>,
}

impl LatinSquare {
    /// Validates the Latin property; returns `None` if it does not hold.
    pub fn from_entries(order: usize, entries: Vec<usize>) -> Option<Self> {
        let sq = Self { order, entries };
        (order > 0 && sq.entries.len() == order * order && sq.is_latin()).then_some(sq)
    }

    /// The cyclic square `O(i, j) = (i + j) mod L`.
    pub fn cyclic(order: usize) -> Self {
        assert!(order > 0);
        let entries = (0..order * order)
            .map(|k| (k / order + k % order) % order)
            .collect();
        Self { order, entries }
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> usize {
        self.entries[row * self.order + col]
    }

    pub fn is_latin(&self) -> bool {
        let l = self.order;
        let is_perm = |line: Vec<usize>| {
            let mut seen = vec![false; l];
            line.into_iter()
                .all(|v| v < l && !std::mem::replace(&mut seen[v], true))
        };
        (0..l).all(|i| is_perm((0..l).map(|j| self.get(i, j)).collect()))
            && (0..l).all(|j| is_perm((0..l).map(|i| self.get(i, j)).collect()))
    }
}

/// `O(i, j) = rho((i + j + s) mod L)` where `rho` is a Fisher-Yates shuffle of
/// `0..L` and `s` a shift, both drawn as big-endian words from the
/// scrambling stream.
pub fn gen_latin_square(subkey: SubKey, order: usize, tag: DomainTag) -> LatinSquare {
    assert!(order >= 1, "Latin square order must be positive");
    let mut stream = keyed_byte_stream(subkey, tag);
    let mut rho: Vec<usize> = (0..order).collect();
    for i in (1..order).rev() {
        let j = stream.next_word() as usize % (i + 1);
        rho.swap(i, j);
    }
    let shift = stream.next_word() as usize % order;
    let entries = (0..order * order)
        .map(|k| rho[(k / order + k % order + shift) % order])
        .collect();
    LatinSquare { order, entries }
}

/// Key-derived `M x N` matrix added pixel-wise during normalization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormMatrix(Image);

impl NormMatrix {
    pub fn new(values: Image) -> Self {
        Self(values)
    }

    pub fn as_image(&self) -> &Image {
        &self.0
    }
}

pub fn gen_norm_matrix(subkey: SubKey, height: usize, width: usize, tag: DomainTag) -> NormMatrix {
    let pixels = keyed_byte_stream(subkey, tag)
        .take(height * width)
        .collect();
    NormMatrix(Image::new(height, width, pixels).expect("dimensions match the stream length"))
}

/// 3x3 filtering mask. `weights[a][b]` weighs the pixel at offset
/// `(a - 2, b - 2)`; the anchor `weights[2][2]` is always 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mask3x3 {
    weights: [[u8; 3]; 3],
}

impl Mask3x3 {
    /// Builds a mask from the eight non-anchor weights in row-major order.
    pub fn from_free_weights(free: [u8; 8]) -> Self {
        let mut weights = [[0u8; 3]; 3];
        for (k, &w) in free.iter().enumerate() {
            weights[k / 3][k % 3] = w;
        }
        weights[2][2] = 1;
        Self { weights }
    }

    pub fn identity() -> Self {
        Self::from_free_weights([0; 8])
    }

    pub fn weights(&self) -> &[[u8; 3]; 3] {
        &self.weights
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> u8 {
        self.weights[a][b]
    }
}

pub fn gen_mask(subkey: SubKey, tag: DomainTag) -> Mask3x3 {
    let mut free = [0u8; 8];
    for (slot, byte) in free.iter_mut().zip(keyed_byte_stream(subkey, tag)) {
        *slot = byte;
    }
    Mask3x3::from_free_weights(free)
}

/// A permutation `(a1, a2, a3, a4)` of `{1, 2, 3, 4}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RotationIndex([u8; 4]);

impl RotationIndex {
    pub const IDENTITY: Self = Self([1, 2, 3, 4]);

    pub fn new(alpha: [u8; 4]) -> Option<Self> {
        let mut sorted = alpha;
        sorted.sort_unstable();
        (sorted == [1, 2, 3, 4]).then_some(Self(alpha))
    }

    pub fn alpha(&self) -> [u8; 4] {
        self.0
    }

    /// Signed quarter turns `a_i - a_(i-1)` with `a_0 = 0`; positive is clockwise.
    pub fn quarter_turns(&self) -> [i32; 4] {
        let mut prev = 0i32;
        self.0.map(|a| {
            let turn = i32::from(a) - prev;
            prev = i32::from(a);
            turn
        })
    }
}

impl fmt::Display for RotationIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.0;
        write!(f, "({a},{b},{c},{d})")
    }
}

/// Rotation index for one round of the hardened cipher.
///
/// `v = k ^ ((2^beta * prev_sum) mod 2^32)` seeds the logistic map; the
/// iterates `x101..x104` are ranked ascending (ties keep their original
/// order) and `a_j` is the 1-based rank of `x(100 + j)`.
pub fn logistic_rotation_index(subkey: SubKey, prev_sum: u64, beta: u32) -> RotationIndex {
    let scaled = if beta >= 32 {
        0
    } else {
        ((prev_sum & 0xFFFF_FFFF) << beta) as u32
    };
    let mut orbit = LogisticMap::new(logistic_seed(subkey.0 ^ scaled)).skip(WARM_UP);
    let samples: [f64; 4] = std::array::from_fn(|_| orbit.next().expect("infinite orbit"));
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&a, &b| samples[a].total_cmp(&samples[b]));
    let mut alpha = [0u8; 4];
    for (rank, &j) in order.iter().enumerate() {
        alpha[j] = rank as u8 + 1;
    }
    RotationIndex(alpha)
}
