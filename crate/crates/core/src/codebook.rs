//! Chosen-ciphertext codebook attack.
//!
//! The decryption oracle is queried on the all-zero ciphertext `C0` and on
//! every unit impulse `Cn` (a single pixel of value 1). Because decryption
//! is affine over Z/256, any ciphertext `C = sum k_n C_n` with `k_n` its
//! pixel values decrypts to
//!
//! ```text
//! P = sum k_n P_n - (sum k_n - 1) P0   (mod 256)
//! ```
//!
//! Impulse `n` (1-based) sits at 1-based position `(i, j)` with
//! `n = (i - 1) M + j`; with 0-based `(x, y)` that is `n = x M + y + 1`.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Error;
use crate::image::{mod_lincomb, Image};
use crate::pgm::{load_pgm, save_pgm};
use crate::ImageCipher;

#[derive(Debug, Clone, Error)]
#[error("{0}")]
pub struct OracleError(pub String);

/// Black-box decryption under a fixed hidden key.
pub trait DecryptionOracle: Sync {
    fn decrypt(&self, cipher: &Image) -> Result<Image, OracleError>;
}

impl<F> DecryptionOracle for F
where
    F: Fn(&Image) -> Result<Image, OracleError> + Sync,
{
    fn decrypt(&self, cipher: &Image) -> Result<Image, OracleError> {
        self(cipher)
    }
}

/// In-process oracle around a cipher instance.
#[derive(Debug, Clone)]
pub struct CipherOracle<C>(pub C);

impl<C: ImageCipher> DecryptionOracle for CipherOracle<C> {
    fn decrypt(&self, cipher: &Image) -> Result<Image, OracleError> {
        self.0
            .decrypt(cipher)
            .map_err(|e| OracleError(e.to_string()))
    }
}

/// Wraps an oracle and counts the queries it answers.
pub struct CountingOracle<O> {
    inner: O,
    count: AtomicUsize,
}

impl<O> CountingOracle<O> {
    pub fn new(inner: O) -> Self {
        Self {
            inner,
            count: AtomicUsize::new(0),
        }
    }

    pub fn queries(&self) -> usize {
        self.count.load(Ordering::SeqCst)
    }
}

impl<O: DecryptionOracle> DecryptionOracle for CountingOracle<O> {
    fn decrypt(&self, cipher: &Image) -> Result<Image, OracleError> {
        self.count.fetch_add(1, Ordering::SeqCst);
        self.inner.decrypt(cipher)
    }
}

#[derive(Debug, Error)]
pub enum CodebookError {
    #[error("oracle failed after {completed} completed queries: {source}")]
    Oracle {
        completed: usize,
        #[source]
        source: OracleError,
    },
    #[error(
        "oracle answered query {entry} with a {found_h}x{found_w} image, expected {height}x{width}"
    )]
    OracleShape {
        entry: usize,
        height: usize,
        width: usize,
        found_h: usize,
        found_w: usize,
    },
    #[error(transparent)]
    Image(#[from] Error),
    #[error("codebook storage: {0}")]
    Io(#[from] io::Error),
    #[error("codebook manifest: {0}")]
    Manifest(String),
}

/// 1-based codebook slot of the impulse at 0-based `(x, y)`.
pub fn impulse_index(size: usize, x: usize, y: usize) -> usize {
    x * size + y + 1
}

/// Basis ciphertext of entry `n`: all zero for `n = 0`, else the unit impulse.
pub fn basis_ciphertext(size: usize, entry: usize) -> Image {
    if entry == 0 {
        Image::zeros(size, size)
    } else {
        let k = entry - 1;
        Image::impulse(size, size, k / size, k % size, 1)
    }
}

/// `M N + 1` plaintexts of the basis ciphertexts. Holds no key material.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codebook {
    size: usize,
    /// Entry 0 is the zero ciphertext's plaintext, entry `n` impulse `n`.
    entries: Vec<Image>,
}

impl Codebook {
    fn from_entries(size: usize, entries: Vec<Image>) -> Result<Self, CodebookError> {
        if entries.len() != size * size + 1 {
            return Err(CodebookError::Manifest(format!(
                "{} entries for a {size}x{size} codebook",
                entries.len()
            )));
        }
        for (n, e) in entries.iter().enumerate() {
            if e.dims() != (size, size) {
                return Err(CodebookError::OracleShape {
                    entry: n,
                    height: size,
                    width: size,
                    found_h: e.height(),
                    found_w: e.width(),
                });
            }
        }
        Ok(Self { size, entries })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// `M N + 1`.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn zero_plaintext(&self) -> &Image {
        &self.entries[0]
    }

    /// Plaintext of impulse `n`, `1 <= n <= M N`.
    pub fn impulse_plaintext(&self, n: usize) -> &Image {
        assert!(n >= 1, "impulse slots start at 1");
        &self.entries[n]
    }

    /// Recovers the plaintext of `cipher` by linear combination.
    pub fn recover(&self, cipher: &Image) -> Result<Image, Error> {
        recover(cipher, self)
    }
}

/// Queries all `M N + 1` basis ciphertexts, on up to `jobs` threads.
pub fn build_codebook<O>(oracle: &O, size: usize, jobs: usize) -> Result<Codebook, CodebookError>
where
    O: DecryptionOracle + ?Sized,
{
    let wanted: Vec<usize> = (0..=size * size).collect();
    let answers = query_entries(oracle, size, &wanted, jobs, |_, _| Ok(()))?;
    Codebook::from_entries(size, answers.into_iter().map(|(_, img)| img).collect())
}

fn query_entries<O, S>(
    oracle: &O,
    size: usize,
    wanted: &[usize],
    jobs: usize,
    sink: S,
) -> Result<Vec<(usize, Image)>, CodebookError>
where
    O: DecryptionOracle + ?Sized,
    S: Fn(usize, &Image) -> io::Result<()> + Sync,
{
    let completed = AtomicUsize::new(0);
    let query = |n: usize| -> Result<(usize, Image), CodebookError> {
        let plain = oracle
            .decrypt(&basis_ciphertext(size, n))
            .map_err(|source| CodebookError::Oracle {
                completed: completed.load(Ordering::SeqCst),
                source,
            })?;
        if plain.dims() != (size, size) {
            return Err(CodebookError::OracleShape {
                entry: n,
                height: size,
                width: size,
                found_h: plain.height(),
                found_w: plain.width(),
            });
        }
        sink(n, &plain)?;
        completed.fetch_add(1, Ordering::SeqCst);
        Ok((n, plain))
    };
    if jobs <= 1 {
        return wanted.iter().map(|&n| query(n)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| io::Error::other(e.to_string()))?;
    pool.install(|| wanted.par_iter().map(|&n| query(n)).collect())
}

/// `P = sum_{k_n != 0} k_n P_n - (sum k_n - 1) P0 (mod 256)` with `k_n` the
/// pixel of `cipher` at impulse `n`.
pub fn recover(cipher: &Image, cb: &Codebook) -> Result<Image, Error> {
    cb.zero_plaintext().ensure_same_shape(cipher)?;
    let mut images = vec![cb.zero_plaintext()];
    let mut coeffs = vec![0i64];
    let mut total = 0i64;
    for (slot, &k) in cipher.pixels().iter().enumerate() {
        if k != 0 {
            images.push(&cb.entries[slot + 1]);
            coeffs.push(i64::from(k));
            total += i64::from(k);
        }
    }
    coeffs[0] = 1 - total;
    mod_lincomb(&images, &coeffs)
}

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_FORMAT: &str = "icbsif-codebook";
pub const MANIFEST_VERSION: u32 = 1;

/// On-disk description of a codebook directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    pub height: usize,
    pub width: usize,
    pub entries: usize,
    pub index_order: String,
    pub file_pattern: String,
}

impl Manifest {
    pub fn new(size: usize) -> Self {
        Self {
            format: MANIFEST_FORMAT.into(),
            version: MANIFEST_VERSION,
            height: size,
            width: size,
            entries: size * size + 1,
            index_order:
                "entry 0 decrypts the all-zero ciphertext; entry n >= 1 decrypts the unit \
                          impulse at 0-based row (n-1) div height, column (n-1) mod height"
                    .into(),
            file_pattern: "entry-{n:07}.pgm".into(),
        }
    }
}

pub fn entry_path(dir: &Path, n: usize) -> PathBuf {
    dir.join(format!("entry-{n:07}.pgm"))
}

fn read_manifest(dir: &Path) -> Result<Option<Manifest>, CodebookError> {
    let path = dir.join(MANIFEST_FILE);
    match fs::read(&path) {
        Ok(bytes) => serde_json::from_slice(&bytes)
            .map(Some)
            .map_err(|e| CodebookError::Manifest(format!("{}: {e}", path.display()))),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn write_atomically(path: &Path, img: &Image) -> io::Result<()> {
    let tmp = path.with_extension("pgm.part");
    save_pgm(&tmp, img)?;
    fs::rename(tmp, path)
}

/// Outcome of [`build_or_resume`].
#[derive(Debug)]
pub struct StoredBuild {
    pub codebook: Codebook,
    /// Oracle queries issued by this call; zero when fully cached.
    pub queries: usize,
}

/// Builds the codebook into `dir`, reusing any entries already stored there.
pub fn build_or_resume<O>(
    oracle: &O,
    size: usize,
    dir: &Path,
    jobs: usize,
) -> Result<StoredBuild, CodebookError>
where
    O: DecryptionOracle + ?Sized,
{
    fs::create_dir_all(dir)?;
    let manifest = Manifest::new(size);
    match read_manifest(dir)? {
        Some(existing) if existing != manifest => {
            return Err(CodebookError::Manifest(format!(
                "{} holds a {}x{} codebook, requested {size}x{size}",
                dir.display(),
                existing.height,
                existing.width
            )))
        }
        Some(_) => {}
        None => {
            let json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
            fs::write(dir.join(MANIFEST_FILE), json)?;
        }
    }
    let missing: Vec<usize> = (0..manifest.entries)
        .filter(|&n| !entry_path(dir, n).is_file())
        .collect();
    query_entries(oracle, size, &missing, jobs, |n, img| {
        write_atomically(&entry_path(dir, n), img)
    })?;
    Ok(StoredBuild {
        codebook: load_codebook(dir)?,
        queries: missing.len(),
    })
}

pub fn load_codebook(dir: &Path) -> Result<Codebook, CodebookError> {
    let manifest = read_manifest(dir)?.ok_or_else(|| {
        CodebookError::Manifest(format!("no {MANIFEST_FILE} in {}", dir.display()))
    })?;
    if manifest.format != MANIFEST_FORMAT || manifest.version != MANIFEST_VERSION {
        return Err(CodebookError::Manifest(format!(
            "unsupported format {} v{}",
            manifest.format, manifest.version
        )));
    }
    if manifest.height != manifest.width || manifest.entries != manifest.height * manifest.width + 1
    {
        return Err(CodebookError::Manifest("inconsistent dimensions".into()));
    }
    let entries = (0..manifest.entries)
        .map(|n| load_pgm(entry_path(dir, n)))
        .collect::<io::Result<Vec<_>>>()?;
    Codebook::from_entries(manifest.height, entries)
}

pub fn save_codebook(cb: &Codebook, dir: &Path) -> Result<(), CodebookError> {
    fs::create_dir_all(dir)?;
    let json = serde_json::to_vec_pretty(&Manifest::new(cb.size)).expect("manifest serializes");
    fs::write(dir.join(MANIFEST_FILE), json)?;
    for (n, img) in cb.entries.iter().enumerate() {
        write_atomically(&entry_path(dir, n), img)?;
    }
    Ok(())
}
