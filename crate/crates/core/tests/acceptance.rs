// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use srampuf::analytics::{block_stability, window_flip_rate};
use srampuf::enroll::{
    mark_stability, select_positions, weight_positions, StabilityMap, DEFAULT_BLOCK_BITS,
};
use srampuf::fsutil::fingerprint;
use srampuf::hamming::HammingCode;
use srampuf::keygen::{apply_mask, derive_key};
use srampuf::sim::DEFAULT_NUM_BITS;
use srampuf::{
    build_mask, generate_key, parse_hex_dump, reproduce_key, to_hex_dump, BitVector, Calibration,
    ConditionKind, DeviceModel, EnrollParams, Error, FuzzyExtractor, HelperData, Mask, Registry,
    RegistryEntry,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_bits(rng: &mut impl Rng, len: usize) -> BitVector {
    BitVector::from_bools((0..len).map(|_| rng.random::<bool>()))
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn single_error_recovery() -> Outcome {
    let start = Instant::now();
    let fe = FuzzyExtractor::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let (mut ok, mut total) = (0, 0);
    for _ in 0..100 {
        let y = random_bits(&mut rng, 128);
        let w = fe.generate(&y, rng.random()).unwrap();
        for j in 0..128 {
            let mut noisy = y.clone();
            noisy.flip(j);
            total += 1;
            if fe.reproduce(&noisy, &w).ok().as_ref() == Some(&y) {
                ok += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        ok == 12_800 && total == 12_800 && elapsed < Duration::from_secs(10),
        format!("{ok}/{total} single flips recovered in {}", secs(elapsed)),
    )
}

fn random_mask(rng: &mut impl Rng, id: &str) -> Mask {
    let windows = rng.random_range(1..=4);
    let window_length = DEFAULT_BLOCK_BITS;
    let mut positions = sample(rng, windows * window_length, 128).into_vec();
    positions.sort_unstable();
    Mask {
        device_id: id.to_string(),
        base_offset: rng.random_range(0..512),
        window_length,
        windows,
        threshold: rng.random_range(1..=5),
        samples: rng.random_range(2..=300),
        target_len: 128,
        positions,
    }
}

fn key_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let mut ok = 0;
    for d in 0..1000 {
        let mask = random_mask(&mut rng, &format!("dev-{d}"));
        let len = mask.required_len() + rng.random_range(0..256);
        let raw = random_bits(&mut rng, len);
        let (helper, key) = generate_key(&raw, &mask, rng.random()).unwrap();
        if reproduce_key(&raw, &mask, &helper).ok().as_ref() == Some(&key)
            && key.key_bits().len() == 256
        {
            ok += 1;
        }
    }
    outcome(
        ok == 1000,
        format!("{ok}/1000 devices reproduced identical 256-bit keys"),
    )
}

fn weight_oracle(stable: &[bool]) -> Vec<u32> {
    (0..stable.len())
        .map(|i| {
            if !stable[i] {
                return 0;
            }
            let left = stable[..i].iter().rev().take_while(|&&s| s).count();
            let right = stable[i + 1..].iter().take_while(|&&s| s).count();
            1 + left.min(right) as u32
        })
        .collect()
}

fn random_maps() -> Vec<Vec<bool>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    (0..10_000)
        .map(|_| {
            let len = rng.random_range(1..=4096);
            let p_stable: f64 = rng.random_range(0.0..=1.0);
            (0..len).map(|_| rng.random_bool(p_stable)).collect()
        })
        .collect()
}

fn weight_oracle_equivalence(maps: &[Vec<bool>]) -> Outcome {
    let mismatches = maps
        .iter()
        .filter(|m| {
            let map = StabilityMap::from_stable_bits(BitVector::from_bools(m.iter().copied()), 2);
            weight_positions(&map).weights != weight_oracle(m)
        })
        .count();
    let longest = maps.iter().map(Vec::len).max().unwrap_or(0);
    outcome(
        mismatches == 0,
        format!(
            "{} maps (up to {longest} bits), {mismatches} mismatches",
            maps.len()
        ),
    )
}

struct DefaultDevice {
    samples: Vec<BitVector>,
}

fn default_device() -> DefaultDevice {
    let dev = DeviceModel::new(1, DEFAULT_NUM_BITS, &Calibration::default()).unwrap();
    let cond = dev.calibration().condition(ConditionKind::Ntna);
    DefaultDevice {
        samples: dev.collect_samples(&cond, 300, 0).unwrap(),
    }
}

fn threshold_monotonicity(maps: &[Vec<bool>], dev: &DefaultDevice) -> Outcome {
    let mut violations = 0;
    for m in maps {
        let map = StabilityMap::from_stable_bits(BitVector::from_bools(m.iter().copied()), 2);
        let w = weight_positions(&map);
        let counts: Vec<usize> = (1..=8)
            .map(|t| select_positions(&w, t).unwrap().len())
            .collect();
        if counts.windows(2).any(|c| c[1] > c[0]) {
            violations += 1;
        }
    }

    let n_blocks = DEFAULT_NUM_BITS / DEFAULT_BLOCK_BITS;
    let mut sums = [0usize; 5];
    for b in 0..n_blocks {
        let map = mark_stability(
            &dev.samples,
            b * DEFAULT_BLOCK_BITS..(b + 1) * DEFAULT_BLOCK_BITS,
        )
        .unwrap();
        let w = weight_positions(&map);
        for (t, sum) in sums.iter_mut().enumerate() {
            *sum += select_positions(&w, t as u32 + 1).unwrap().len();
        }
    }
    let means: Vec<f64> = sums.iter().map(|&s| s as f64 / n_blocks as f64).collect();
    let strictly_decreasing = means.windows(2).all(|m| m[1] < m[0]);
    outcome(
        violations == 0 && strictly_decreasing,
        format!(
            "{violations} non-monotone maps; default device mean selected T1..T5 = {}",
            means
                .iter()
                .map(|m| format!("{m:.2}"))
                .collect::<Vec<_>>()
                .join(" > ")
        ),
    )
}

fn calibration(dev: &DefaultDevice) -> Outcome {
    let stats = block_stability(&dev.samples, DEFAULT_BLOCK_BITS).unwrap();
    let inside = stats
        .blocks
        .iter()
        .filter(|b| (0.72..=0.78).contains(&b.stable_fraction))
        .count();
    let share = inside as f64 / stats.blocks.len() as f64;
    let rate = 100.0 * window_flip_rate(&dev.samples[0], &dev.samples[1..]).unwrap();
    outcome(
        stats.blocks.len() == 98 && share >= 0.90 && (rate - 24.9).abs() <= 2.0,
        format!(
            "{inside}/{} blocks in [0.72, 0.78] ({:.1}%), window flip rate {rate:.2}% (target 24.9 +/- 2)",
            stats.blocks.len(),
            100.0 * share
        ),
    )
}

fn end_to_end_stability() -> Outcome {
    let start = Instant::now();
    let cal = Calibration::default();
    let targets = [
        (ConditionKind::Ntna, 99.0, 1.0),
        (ConditionKind::Htna, 97.0, 1.33),
        (ConditionKind::Ntwa, 97.0, 1.667),
    ];
    // per condition: (samples, <=1 flip, >=1 flip, reproduce failures on <=1)
    let mut tally = [(0usize, 0usize, 0usize, 0usize); 3];
    for d in 0..10u64 {
        let dev = DeviceModel::new(1000 + d, DEFAULT_NUM_BITS, &cal).unwrap();
        let ntna = cal.condition(ConditionKind::Ntna);
        // Enrollment only reads the leading windows; grow until the mask fills.
        let mut windows = 2;
        let (enroll, mask) = loop {
            let span = windows * DEFAULT_BLOCK_BITS;
            let enroll = dev.collect_range(&ntna, 300, 0, 0..span).unwrap();
            match build_mask(&enroll, &EnrollParams::default(), dev.device_id()) {
                Ok(mask) => break (enroll, mask),
                Err(Error::InsufficientStableBits { .. }) if span * 2 <= DEFAULT_NUM_BITS => {
                    windows *= 2
                }
                Err(e) => return outcome(false, format!("device {d}: enrollment failed: {e}")),
            }
        };
        let span = windows * DEFAULT_BLOCK_BITS;
        let reference = &enroll[0];
        let y = apply_mask(reference, &mask).unwrap();
        let (helper, key) = generate_key(reference, &mask, d).unwrap();
        for (c, &(kind, _, _)) in targets.iter().enumerate() {
            let cond = cal.condition(kind);
            let fresh = dev
                .collect_range(&cond, 300, 1_000_000 + 10_000 * c as u64, 0..span)
                .unwrap();
            for raw in &fresh {
                let flips = apply_mask(raw, &mask)
                    .unwrap()
                    .hamming_distance(&y)
                    .unwrap();
                let t = &mut tally[c];
                t.0 += 1;
                if flips >= 1 {
                    t.2 += 1;
                }
                if flips <= 1 {
                    t.1 += 1;
                    if reproduce_key(raw, &mask, &helper).ok().as_ref() != Some(&key) {
                        t.3 += 1;
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let mut pass = elapsed < Duration::from_secs(120);
    let mut parts = Vec::new();
    for (c, &(kind, min_share, target_rate)) in targets.iter().enumerate() {
        let (n, le1, flipped, failures) = tally[c];
        let share = 100.0 * le1 as f64 / n as f64;
        let rate = 100.0 * flipped as f64 / n as f64;
        pass &= share >= min_share && failures == 0 && (rate - target_rate).abs() <= 2.0;
        parts.push(format!(
            "{kind}: <=1 flip {share:.2}% (need {min_share}%), flip rate {rate:.2}% (target {target_rate}%), {failures} failed reproductions"
        ));
    }
    parts.push(format!("runtime {}", secs(elapsed)));
    outcome(pass, parts.join("; "))
}

fn hamming_soundness() -> Outcome {
    let code = HammingCode::default();
    let mut syndromes = HashSet::new();
    syndromes.insert(code.syndrome(&BitVector::zeros(128)).unwrap());
    for j in 0..128 {
        let mut e = BitVector::zeros(128);
        e.flip(j);
        syndromes.insert(code.syndrome(&e).unwrap());
    }
    let distinct = syndromes.len();

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
    let (mut pairs, mut silent, mut detected, mut miscorrected) = (0, 0, 0, 0);
    for _ in 0..1000 {
        let c = code.encode(&random_bits(&mut rng, 120)).unwrap();
        for _ in 0..100 {
            let (a, b) = loop {
                let (a, b) = (rng.random_range(0..128), rng.random_range(0..128));
                if a != b {
                    break (a, b);
                }
            };
            let mut w = c.clone();
            w.flip(a);
            w.flip(b);
            pairs += 1;
            match code.correct(&w) {
                Ok(out) if out == c => silent += 1,
                Ok(_) => miscorrected += 1,
                Err(_) => detected += 1,
            }
        }
    }
    outcome(
        distinct == 129 && silent == 0,
        format!(
            "{distinct} distinct syndromes; {pairs} double flips over 1000 codewords: {detected} uncorrectable, {miscorrected} miscorrected, {silent} returned the original"
        ),
    )
}

fn format_round_trips() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    let fe = FuzzyExtractor::default();
    let mut failures = Vec::new();
    let mut check = |what: &str, i: usize, first: Vec<u8>, second: Vec<u8>| {
        if first != second {
            failures.push(format!("{what} #{i}"));
        }
    };
    for i in 0..100 {
        let mask = random_mask(&mut rng, &format!("dev-{i}"));
        let mask_path = dir.path().join(format!("m{i}.toml"));
        mask.save(&mask_path).unwrap();
        let first = std::fs::read(&mask_path).unwrap();
        Mask::load(&mask_path).unwrap().0.save(&mask_path).unwrap();
        check("mask", i, first, std::fs::read(&mask_path).unwrap());

        let helper = HelperData::new(
            &fe,
            &mask.device_id,
            &mask.fingerprint(),
            random_bits(&mut rng, 128),
        );
        let helper_path = dir.path().join(format!("h{i}.toml"));
        helper.save(&helper_path).unwrap();
        let first = std::fs::read(&helper_path).unwrap();
        HelperData::load(&helper_path)
            .unwrap()
            .save(&helper_path)
            .unwrap();
        check("helper", i, first, std::fs::read(&helper_path).unwrap());

        let words = rng.random_range(1..=200);
        let dump = random_bits(&mut rng, 32 * words);
        let dump_path = dir.path().join(format!("d{i}.hex"));
        std::fs::write(&dump_path, to_hex_dump(&dump).unwrap()).unwrap();
        let first = std::fs::read(&dump_path).unwrap();
        let back = parse_hex_dump(&String::from_utf8(first.clone()).unwrap()).unwrap();
        std::fs::write(&dump_path, to_hex_dump(&back).unwrap()).unwrap();
        check("dump", i, first, std::fs::read(&dump_path).unwrap());

        let reg_dir = dir.path().join(format!("r{i}"));
        std::fs::create_dir(&reg_dir).unwrap();
        let reg_path = reg_dir.join("registry.toml");
        let mut registry = Registry::new();
        for k in 0..rng.random_range(0..6) {
            let m = random_mask(&mut rng, &format!("d{i}-{k}"));
            let file = format!("{}.mask.toml", m.device_id);
            let fp = m.save(&reg_dir.join(&file)).unwrap();
            let mut entry =
                RegistryEntry::for_mask(&m, &file, &fp, rng.random_range(0..2_000_000_000));
            if rng.random_bool(0.5) {
                let h = HelperData::new(&fe, &m.device_id, &fp, random_bits(&mut rng, 128));
                let hfile = format!("{}.helper.toml", m.device_id);
                h.save(&reg_dir.join(&hfile)).unwrap();
                entry.helper_fingerprint =
                    Some(fingerprint(&std::fs::read(reg_dir.join(&hfile)).unwrap()));
                entry.helper_file = Some(hfile);
            }
            registry.insert(entry).unwrap();
        }
        registry.save(&reg_path).unwrap();
        let first = std::fs::read(&reg_path).unwrap();
        Registry::load(&reg_path).unwrap().save(&reg_path).unwrap();
        check("registry", i, first, std::fs::read(&reg_path).unwrap());
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            "100 masks, helpers, registries and dumps byte-identical after save/load/save"
                .to_string()
        } else {
            format!("differences: {}", failures.join(", "))
        },
    )
}

/// Digests computed with an independent SHA-256 implementation.
const SHA256_VECTORS: [(&str, &str); 11] = [
    (
        "00000000000000000000000000000000",
        "374708fff7719dd5979ec875d56cd2286f6d3cf7ec317a3b25632aab28ec37bb",
    ),
    (
        "000102030405060708090a0b0c0d0e0f",
        "be45cb2605bf36bebde684841a28f0fd43c69850a3dce5fedba69928ee3a8991",
    ),
    (
        "ffffffffffffffffffffffffffffffff",
        "5ac6a5945f16500911219129984ba8b387a06f24fe383ce4e81a73294065461b",
    ),
    (
        "80000000000000000000000000000000",
        "3c79f1b5ca0a59275ca1b3236f81b5547ddc9dfca6a21236d85ef63060aaccaf",
    ),
    (
        "00000000000000000000000000000001",
        "7c3ccd10bb7ec37b46d37926ae6274267f007a34aeaf15c882a715a7f3300529",
    ),
    (
        "a5a5a5a5a5a5a5a5a5a5a5a5a5a5a5a5",
        "57f52e8a0c54a7f08350c602fa6852ff59e4e246fbe38aa369bdd7b7e89e013f",
    ),
    (
        "0b30557a9fc4e90e33587da2c7ec1136",
        "cd7d620a0588e54dd46e114a6f4ae5212c82e48abe5a13703649a745861a0c60",
    ),
    (
        "7372616d2d7075662d766563746f7221",
        "79412d4bff630c2ebc63d91fe7316da0f5bcc0edf3ea3edad410b0b44c9ae918",
    ),
    (
        "0123456789abcdef0123456789abcdef",
        "223e0a160af9da0a03e6dd2c4719c56f5d66a633cbe84e78aaa9f3735865522a",
    ),
    (
        "deadbeefdeadbeefdeadbeefdeadbeef",
        "fd1679fab79576a8f134ea26bd23797d080dff39bd6297e005dc45c62b71c8f6",
    ),
    (
        "fffefdfcfbfaf9f8f7f6f5f4f3f2f1f0",
        "180f7fa739fd34e445c336aa3faa3b4ad22f49bde073b07da119c04fbe547630",
    ),
];

fn sha256_conformance() -> Outcome {
    let mut bad = Vec::new();
    for (input, digest) in SHA256_VECTORS {
        let y = BitVector::from_bytes(&hex::decode(input).unwrap(), 128).unwrap();
        if derive_key(&y, "kat").unwrap().to_hex() != digest {
            bad.push(input);
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{}/{} vectors match{}",
            SHA256_VECTORS.len() - bad.len(),
            SHA256_VECTORS.len(),
            if bad.is_empty() {
                String::new()
            } else {
                format!(" (mismatch: {})", bad.join(", "))
            }
        ),
    )
}

type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn main() {
    let maps = random_maps();
    let dev = default_device();
    let criteria: Vec<(&str, Criterion)> = vec![
        ("single-error recovery", Box::new(single_error_recovery)),
        ("key round-trip identity", Box::new(key_round_trip)),
        (
            "weight oracle equivalence",
            Box::new(|| weight_oracle_equivalence(&maps)),
        ),
        (
            "threshold monotonicity",
            Box::new(|| threshold_monotonicity(&maps, &dev)),
        ),
        ("simulator calibration", Box::new(|| calibration(&dev))),
        (
            "end-to-end stability at T=4",
            Box::new(end_to_end_stability),
        ),
        ("Hamming code soundness", Box::new(hamming_soundness)),
        ("format round-trips", Box::new(format_round_trips)),
        ("SHA-256 conformance", Box::new(sha256_conformance)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} criterion {}: {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
