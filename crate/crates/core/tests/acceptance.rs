//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any fails.

use std::time::{Duration, Instant};

use icbsif_core::codebook::{build_codebook, recover, CipherOracle, CountingOracle};
use icbsif_core::diffanalysis::{
    check_prop1, check_prop2, verify_linear_relation, verify_stage_differentials,
};
use icbsif_core::icbsif::RoundContext;
use icbsif_core::image::mod_sub;
use icbsif_core::improved::IndexSource;
use icbsif_core::keystream::{DomainTags, RotationIndex};
use icbsif_core::samples::{blank, portrait, swap_last_two, texture};
use icbsif_core::stats::{binomial_test, randomness_stats};
use icbsif_core::{Icbsif, Image, ImageCipher, ImprovedCipher, MasterKey};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SIGNIFICANCE: f64 = 0.01;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn random_image(rng: &mut ChaCha8Rng, size: usize) -> Image {
    let mut px = vec![0u8; size * size];
    rng.fill(px.as_mut_slice());
    Image::new(size, size, px).unwrap()
}

fn random_key(rng: &mut ChaCha8Rng) -> MasterKey {
    MasterKey::from_bytes(rng.gen())
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn c1_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut failures = 0;
    for size in [16, 25, 64] {
        for _ in 0..100 {
            let (p, k) = (random_image(&mut rng, size), random_key(&mut rng));
            let cipher = Icbsif::new(k);
            let back = cipher.decrypt(&cipher.encrypt(&p).unwrap()).unwrap();
            failures += usize::from(back != p);
        }
    }
    let t = start.elapsed();
    outcome(
        failures == 0 && t < Duration::from_secs(10),
        format!(
            "300 round trips, {failures} failures, {:.2}s (limit 10s)",
            secs(t)
        ),
    )
}

fn c2_propositions() -> Outcome {
    let mut counterexamples = 0u64;
    let mut checked = 0u64;
    for a0 in 0..8 {
        for a1 in 0..8 {
            for a2 in 0..8 {
                for q in 0..8 {
                    checked += 1;
                    counterexamples += u64::from(!check_prop1(a0, a1, a2, q, 8));
                    for a3 in 0..8 {
                        checked += 1;
                        counterexamples += u64::from(!check_prop2(&[a1, a2, a3], a0, q, 8));
                    }
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1_000_000 {
        let v: [i64; 4] = std::array::from_fn(|_| rng.gen_range(0..256));
        counterexamples += u64::from(!check_prop1(v[0], v[1], v[2], v[3], 256));
        let n = rng.gen_range(1..=8);
        let terms: Vec<i64> = (0..n).map(|_| rng.gen_range(0..256)).collect();
        counterexamples += u64::from(!check_prop2(&terms, v[0], v[3], 256));
        checked += 2;
    }
    outcome(
        counterexamples == 0,
        format!(
            "{checked} tuples ({} exhaustive at F=8), {counterexamples} counterexamples",
            8u64.pow(4) + 8u64.pow(5)
        ),
    )
}

fn c3_linearity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut trials = 0;
    let mut mismatched = 0;
    for _ in 0..10 {
        let cipher = Icbsif::new(random_key(&mut rng));
        let enc = |img: &Image| cipher.encrypt(img);
        for (size, count) in [(16, 100), (64, 10)] {
            for _ in 0..count {
                let [p0, p1, p2] = std::array::from_fn(|_| random_image(&mut rng, size));
                mismatched += verify_linear_relation(&p0, &p1, &p2, enc)
                    .unwrap()
                    .mismatched_pixels;
                trials += 1;
            }
        }
    }
    // ten alternative key schedules
    for t in 0..10 {
        let tags = DomainTags {
            scramble: 3 + 3 * t,
            normalize: 4 + 3 * t,
            mask: 5 + 3 * t,
        };
        let cipher = Icbsif::with_domain_tags(random_key(&mut rng), tags);
        let [p0, p1, p2] = std::array::from_fn(|_| random_image(&mut rng, 25));
        mismatched += verify_linear_relation(&p0, &p1, &p2, |i: &Image| cipher.encrypt(i))
            .unwrap()
            .mismatched_pixels;
        trials += 1;
    }

    let start = Instant::now();
    let cipher = Icbsif::new(random_key(&mut rng));
    let full = verify_linear_relation(&blank(512), &portrait(512), &texture(512), |i: &Image| {
        cipher.encrypt(i)
    })
    .unwrap();
    let t = start.elapsed();
    outcome(
        mismatched == 0 && full.holds && t < Duration::from_secs(30),
        format!(
            "{trials} triples, {mismatched} mismatched pixels; 512x512 portrait/texture/blank holds={} in {:.2}s (limit 30s)",
            full.holds,
            secs(t)
        ),
    )
}

fn c4_stage_differentials() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut failed = 0;
    for _ in 0..100 {
        let key = random_key(&mut rng);
        let round = rng.gen_range(1..=4);
        let ctx = RoundContext::derive(&key, round, 25, 25, DomainTags::default());
        let sample: [Image; 3] = std::array::from_fn(|_| random_image(&mut rng, 25));
        let report = verify_stage_differentials(&ctx, std::slice::from_ref(&sample)).unwrap();
        failed += usize::from(!report.all_hold());
    }
    outcome(
        failed == 0,
        format!("100 instances at 25x25, {failed} with a failing stage"),
    )
}

fn c5_codebook_attack() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cipher = Icbsif::new(random_key(&mut rng));
    let oracle = CountingOracle::new(CipherOracle(cipher.clone()));
    let start = Instant::now();
    let cb = build_codebook(&oracle, 64, 1).unwrap();
    let mut plains = vec![portrait(64)];
    plains.extend((0..50).map(|_| random_image(&mut rng, 64)));
    let mut wrong = 0;
    for p in &plains {
        wrong += usize::from(recover(&cipher.encrypt(p).unwrap(), &cb).unwrap() != *p);
    }
    let t = start.elapsed();

    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let par_start = Instant::now();
    let par = build_codebook(&CipherOracle(cipher), 64, jobs).unwrap();
    let t_par = par_start.elapsed();

    outcome(
        oracle.queries() == 4097 && cb.len() == 4097 && wrong == 0 && par == cb && t < Duration::from_secs(60),
        format!(
            "{} queries, {} codebook entries, {wrong} of {} plaintexts not recovered, {:.2}s single-threaded (limit 60s), {:.2}s on {jobs} threads",
            oracle.queries(),
            cb.len(),
            plains.len(),
            secs(t),
            secs(t_par)
        ),
    )
}

fn c6_improved_resists() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let key = random_key(&mut rng);
    let cipher = ImprovedCipher::new(key, 3, 0).unwrap();
    let enc = |i: &Image| cipher.encrypt(i);
    let report = verify_linear_relation(&blank(64), &portrait(64), &texture(64), enc).unwrap();
    let test = binomial_test(
        report.agreements() as u64,
        report.total_pixels as u64,
        1.0 / 256.0,
    );

    let cb = build_codebook(&CipherOracle(cipher.clone()), 64, 4).unwrap();
    let p = portrait(64);
    let recovered = recover(&cipher.encrypt(&p).unwrap(), &cb).unwrap();
    let mismatch = recovered.count_differences(&p).unwrap() as f64 / 4096.0;

    // a data-independent schedule restores the affine relation
    let fixed = cipher.clone().with_index_source(IndexSource::Fixed(
        RotationIndex::new([2, 4, 3, 1]).unwrap(),
    ));
    let fixed_report =
        verify_linear_relation(&blank(64), &portrait(64), &texture(64), |i: &Image| {
            fixed.encrypt(i)
        })
        .unwrap();

    outcome(
        !report.holds && !test.rejects_at(SIGNIFICANCE) && mismatch >= 0.95 && fixed_report.holds,
        format!(
            "holds={}, agreement {}/{} (binomial p={:.3}, alpha={SIGNIFICANCE}), codebook mismatch {:.2}% (need >= 95%), fixed-index holds={}",
            report.holds,
            report.agreements(),
            report.total_pixels,
            test.p_value,
            100.0 * mismatch,
            fixed_report.holds
        ),
    )
}

fn c7_improved_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = 0;
    let mut index_mismatch = 0;
    let mut runs = 0;
    for m in [3, 4, 5] {
        for size in [16, 25, 64] {
            for _ in 0..50 {
                let cipher = ImprovedCipher::new(random_key(&mut rng), m, 0).unwrap();
                let p = random_image(&mut rng, size);
                let trace = cipher.encrypt_traced(&p).unwrap();
                // any firing of the sum-equality check surfaces as Err here
                match cipher.decrypt_traced(&trace.last().unwrap().output) {
                    Ok((back, indices)) => {
                        failures += usize::from(back != p);
                        let enc: Vec<_> = trace.iter().map(|r| r.index).collect();
                        index_mismatch += usize::from(indices != enc);
                    }
                    Err(_) => failures += 1,
                }
                runs += 1;
            }
        }
    }
    outcome(
        failures == 0 && index_mismatch == 0,
        format!("{runs} round trips, {failures} failures, {index_mismatch} rotation-index disagreements"),
    )
}

fn c8_round_trend() -> Outcome {
    const SIZE: usize = 512;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let lena = portrait(SIZE);
    let changed = swap_last_two(&lena);
    assert_ne!(lena, changed);
    let p = 1.0 / 256.0;
    let sigma = (p * (1.0 - p) / (SIZE * SIZE) as f64).sqrt();
    let (lo, hi) = (p - 3.0 * sigma, p + 3.0 * sigma);
    let keys = 10;
    let mut round1_structured = 0;
    let mut round3_in_band = 0;
    let mut round1_outside_band = 0;
    let mut lines = Vec::new();
    for _ in 0..keys {
        let cipher = ImprovedCipher::new(random_key(&mut rng), 3, 0).unwrap();
        let a = cipher.encrypt_traced(&lena).unwrap();
        let b = cipher.encrypt_traced(&changed).unwrap();
        let zero: Vec<f64> = (0..3)
            .map(|i| {
                randomness_stats(&mod_sub(&a[i].output, &b[i].output).unwrap()).zero_pixel_fraction
            })
            .collect();
        round1_structured += usize::from(zero[0] > 0.5);
        round3_in_band += usize::from((lo..=hi).contains(&zero[2]));
        round1_outside_band += usize::from(zero[0] > hi);
        lines.push(format!("{:.3}/{:.4}/{:.5}", zero[0], zero[1], zero[2]));
    }
    outcome(
        round1_structured == keys && round3_in_band == keys,
        format!(
            "{SIZE}x{SIZE}, {keys} keys: round 1 zero fraction > 0.5 for {round1_structured} (need all); round 3 in [{lo:.5}, {hi:.5}] for {round3_in_band} (need all); round 1 above the random band for {round1_outside_band}; per key r1/r2/r3 = {}",
            lines.join(" ")
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 IC-BSIF round trip", c1_round_trip),
        ("2 modular differential identities", c2_propositions),
        ("3 end-to-end linear relation", c3_linearity),
        ("4 stage differentials", c4_stage_differentials),
        ("5 codebook attack total break", c5_codebook_attack),
        ("6 improved cipher resists the attack", c6_improved_resists),
        ("7 improved cipher round trip", c7_improved_round_trip),
        (
            "8 differential randomness grows with rounds",
            c8_round_trend,
        ),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let o = run();
        println!(
            "criterion {name}: {} ({}) [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            secs(start.elapsed())
        );
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
