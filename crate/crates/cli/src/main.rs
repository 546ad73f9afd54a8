//! `icbsif`: encrypt, decrypt, attack and analyse grayscale PGM images.
//!
//! Exit status: 0 on success (or when the checked relation holds), 1 for an
//! analytic negative (relation violated, recovery mismatch), 2 for usage,
//! validation and I/O errors.

mod oracle;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use icbsif_core::codebook::{
    build_codebook, build_or_resume, CipherOracle, CountingOracle, DecryptionOracle, OracleError,
};
use icbsif_core::diffanalysis::linearity_experiment;
use icbsif_core::improved::DEFAULT_ROUNDS;
use icbsif_core::pgm::{load_pgm, save_pgm};
use icbsif_core::stats::randomness_stats;
use icbsif_core::{icbsif, Icbsif, Image, ImageCipher, ImprovedCipher, MasterKey};
use serde_json::json;

use crate::oracle::CommandOracle;
use crate::report::{Format, Report};

#[derive(Parser)]
#[command(
    name = "icbsif",
    version,
    about = "Image cipher workbench: encryption, differential analysis and codebook attack"
)]
struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encrypt a square PGM image.
    Encrypt(Transform),
    /// Decrypt a square PGM image.
    Decrypt(Transform),
    /// Check E(P1 + P2 - P0) = C1 + C2 - C0 (mod 256) for a cipher.
    VerifyLinear(VerifyLinear),
    /// Recover a plaintext from its ciphertext with a chosen-ciphertext codebook.
    Attack(Attack),
    /// Bit balance, histogram chi-square and zero fraction of an image.
    Stats(Stats),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CipherKind {
    Icbsif,
    Improved,
}

#[derive(Args, Clone)]
struct CipherArgs {
    /// 256-bit key as 64 hex digits.
    #[arg(long, env = "ICBSIF_KEY", hide_env_values = true)]
    key: Option<MasterKey>,
    #[arg(long, value_enum, default_value_t = CipherKind::Icbsif)]
    cipher: CipherKind,
    /// Number of rounds (the basic cipher always uses 4).
    #[arg(long)]
    rounds: Option<usize>,
    /// Shift applied to the previous-round pixel sum when seeding the rotation index.
    #[arg(long, default_value_t = 0)]
    beta: u32,
    /// Permit fewer than three rounds for the improved cipher.
    #[arg(long)]
    allow_weak_rounds: bool,
}

#[derive(Args)]
struct Transform {
    #[command(flatten)]
    cipher: CipherArgs,
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct VerifyLinear {
    #[command(flatten)]
    cipher: CipherArgs,
    p1: PathBuf,
    p2: PathBuf,
    /// Reference image; an all-zero image when omitted.
    p0: Option<PathBuf>,
    /// Directory receiving delta_p.pgm, delta_c.pgm and delta_c_prime.pgm.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct Attack {
    /// Cipher configuration of the in-process oracle (ignored with --oracle-cmd).
    #[command(flatten)]
    cipher: CipherArgs,
    /// Ciphertext to break.
    #[arg(long)]
    target: PathBuf,
    /// Where to write the recovered plaintext.
    #[arg(short, long)]
    output: PathBuf,
    /// Persist the codebook here and reuse whatever is already stored.
    #[arg(long)]
    codebook_dir: Option<PathBuf>,
    /// External decryption command with {input} and {output} placeholders.
    #[arg(long)]
    oracle_cmd: Option<String>,
    /// Concurrent oracle queries [default: available cores].
    #[arg(long)]
    jobs: Option<usize>,
    /// Known plaintext; mismatching pixels are reported and make the exit status 1.
    #[arg(long)]
    expect: Option<PathBuf>,
}

#[derive(Args)]
struct Stats {
    image: PathBuf,
}

/// A failed command: message for stderr plus exit status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<icbsif_core::Error> for Failure {
    fn from(e: icbsif_core::Error) -> Self {
        Self::usage(e.to_string())
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Encrypt(t) => transform(t, true, cli.format),
        Command::Decrypt(t) => transform(t, false, cli.format),
        Command::VerifyLinear(v) => verify_linear(v, cli.format),
        Command::Attack(a) => attack(a, cli.format),
        Command::Stats(s) => stats(s, cli.format),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("icbsif: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read_image(path: &Path) -> Result<Image, Failure> {
    load_pgm(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn write_image(path: &Path, img: &Image) -> Result<(), Failure> {
    save_pgm(path, img).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn build_cipher(args: &CipherArgs) -> Result<Box<dyn ImageCipher>, Failure> {
    let key = args
        .key
        .ok_or_else(|| Failure::usage("a key is required (--key or ICBSIF_KEY)"))?;
    Ok(match args.cipher {
        CipherKind::Icbsif => {
            if let Some(r) = args.rounds.filter(|&r| r != icbsif::ROUNDS) {
                return Err(Failure::usage(format!(
                    "the basic cipher has exactly {} rounds, got --rounds {r}",
                    icbsif::ROUNDS
                )));
            }
            Box::new(Icbsif::new(key))
        }
        CipherKind::Improved => {
            let rounds = args.rounds.unwrap_or(DEFAULT_ROUNDS);
            let cipher = if args.allow_weak_rounds {
                ImprovedCipher::with_weak_rounds(key, rounds, args.beta)?
            } else {
                ImprovedCipher::new(key, rounds, args.beta)?
            };
            Box::new(cipher)
        }
    })
}

fn cipher_name(args: &CipherArgs) -> &'static str {
    match args.cipher {
        CipherKind::Icbsif => "icbsif",
        CipherKind::Improved => "improved",
    }
}

fn transform(t: Transform, encrypt: bool, format: Format) -> CmdResult {
    let cipher = build_cipher(&t.cipher)?;
    let img = read_image(&t.input)?;
    let start = Instant::now();
    let out = if encrypt {
        cipher.encrypt(&img)?
    } else {
        cipher.decrypt(&img)?
    };
    let elapsed = start.elapsed();
    write_image(&t.output, &out)?;
    let report = Report::new(if encrypt { "encrypt" } else { "decrypt" })
        .field("cipher", cipher_name(&t.cipher))
        .field("height", img.height())
        .field("width", img.width())
        .field("seconds", elapsed.as_secs_f64())
        .field("output", t.output.display().to_string());
    print!("{}", report.render(format));
    Ok(0)
}

fn verify_linear(v: VerifyLinear, format: Format) -> CmdResult {
    let cipher = build_cipher(&v.cipher)?;
    let p1 = read_image(&v.p1)?;
    let p2 = read_image(&v.p2)?;
    let p0 = match &v.p0 {
        Some(path) => read_image(path)?,
        None => Image::zeros(p1.height(), p1.width()),
    };
    let exp = linearity_experiment(&p0, &p1, &p2, |img: &Image| cipher.encrypt(img))?;
    if let Some(dir) = &v.out_dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| Failure::usage(format!("{}: {e}", dir.display())))?;
        write_image(&dir.join("delta_p.pgm"), &exp.delta_p)?;
        write_image(&dir.join("delta_c.pgm"), &exp.delta_of_ciphers)?;
        write_image(&dir.join("delta_c_prime.pgm"), &exp.cipher_of_delta)?;
    }
    let report = Report::new("verify-linear")
        .field("cipher", cipher_name(&v.cipher))
        .merge(serde_json::to_value(exp.report).expect("report serializes"));
    print!("{}", report.render(format));
    Ok(if exp.report.holds { 0 } else { 1 })
}

enum AttackOracle {
    InProcess(CipherOracle<Box<dyn ImageCipher>>),
    External(CommandOracle),
}

impl DecryptionOracle for AttackOracle {
    fn decrypt(&self, cipher: &Image) -> Result<Image, OracleError> {
        match self {
            Self::InProcess(o) => o.decrypt(cipher),
            Self::External(o) => o.decrypt(cipher),
        }
    }
}

fn attack(a: Attack, format: Format) -> CmdResult {
    let target = read_image(&a.target)?;
    if !target.is_square() {
        return Err(Failure::usage(format!(
            "target must be square, got {}x{}",
            target.height(),
            target.width()
        )));
    }
    let size = target.height();
    let expect = a.expect.as_deref().map(read_image).transpose()?;
    let inner = match &a.oracle_cmd {
        Some(cmd) => {
            AttackOracle::External(CommandOracle::new(cmd.as_str()).map_err(Failure::usage)?)
        }
        None => AttackOracle::InProcess(CipherOracle(build_cipher(&a.cipher)?)),
    };
    let oracle = CountingOracle::new(inner);
    let jobs = a
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);

    let start = Instant::now();
    let codebook = match &a.codebook_dir {
        Some(dir) => build_or_resume(&oracle, size, dir, jobs).map(|b| b.codebook),
        None => build_codebook(&oracle, size, jobs),
    }
    .map_err(|e| Failure::usage(e.to_string()))?;
    let recovered = codebook.recover(&target)?;
    let elapsed = start.elapsed();
    write_image(&a.output, &recovered)?;

    let mut report = Report::new("attack")
        .field("height", size)
        .field("width", size)
        .field("queries", oracle.queries())
        .field("jobs", jobs)
        .field("seconds", elapsed.as_secs_f64())
        .field("output", a.output.display().to_string());
    let mut code = 0;
    if let Some(expected) = expect {
        let mismatched = recovered.count_differences(&expected)?;
        let total = recovered.pixels().len();
        report = report
            .field("mismatched_pixels", mismatched)
            .field("mismatch_fraction", mismatched as f64 / total as f64)
            .field("recovered", mismatched == 0);
        if mismatched > 0 {
            code = 1;
        }
    }
    print!("{}", report.render(format));
    Ok(code)
}

fn stats(s: Stats, format: Format) -> CmdResult {
    let img = read_image(&s.image)?;
    let report = Report::new("stats")
        .field("height", img.height())
        .field("width", img.width())
        .merge(json!(randomness_stats(&img)));
    print!("{}", report.render(format));
    Ok(0)
}
