// SPDX-License-Identifier: Apache-2.0

use srampuf::analytics::{block_stability, threshold_sweep, window_flip_rate};
use srampuf::enroll::mark_stability;
use srampuf::{BitVector, Calibration, ConditionKind, DeviceModel};

const WINDOW: usize = 24 * 1216;

fn device(seed: u64) -> DeviceModel {
    DeviceModel::new(seed, WINDOW, &Calibration::default()).unwrap()
}

fn samples(dev: &DeviceModel, kind: ConditionKind, n: usize, seed0: u64) -> Vec<BitVector> {
    let cond = dev.calibration().condition(kind);
    dev.collect_samples(&cond, n, seed0).unwrap()
}

#[test]
fn same_seeds_same_dumps() {
    let a = samples(&device(9), ConditionKind::Htna, 3, 40);
    let b = samples(&device(9), ConditionKind::Htna, 3, 40);
    assert_eq!(a, b);
    assert_ne!(a[0], a[1]);
    let other = samples(&device(10), ConditionKind::Htna, 1, 40);
    assert!(other[0].hamming_distance(&a[0]).unwrap() > WINDOW / 3);
}

#[test]
fn condition_changes_the_dump() {
    let dev = device(2);
    let ntna = samples(&dev, ConditionKind::Ntna, 1, 0);
    let htna = samples(&dev, ConditionKind::Htna, 1, 0);
    assert_ne!(ntna, htna);
}

#[test]
fn favoured_values_are_balanced() {
    let dev = device(4);
    let ones = dev.favored().count_ones() as f64 / WINDOW as f64;
    assert!((0.48..0.52).contains(&ones), "{ones}");
}

#[test]
fn harsher_conditions_flip_more() {
    let dev = device(5);
    let reference = samples(&dev, ConditionKind::Ntna, 1, 1_000_000).remove(0);
    let rate = |kind| window_flip_rate(&reference, &samples(&dev, kind, 300, 0)).unwrap();
    let (n, h, w) = (
        rate(ConditionKind::Ntna),
        rate(ConditionKind::Htna),
        rate(ConditionKind::Ntwa),
    );
    assert!(h >= n, "HTNA {h} < NTNA {n}");
    assert!(w >= h, "NTWA {w} < HTNA {h}");
}

/// Unstable cells bunch together: adjacent U/U pairs are more frequent than
/// they would be if the same U cells were scattered independently.
#[test]
fn unstable_cells_cluster() {
    let dev = device(6);
    let s = samples(&dev, ConditionKind::Ntna, 300, 0);
    let map = mark_stability(&s, 0..WINDOW).unwrap();
    let unstable: Vec<bool> = (0..WINDOW).map(|i| !map.is_stable(i)).collect();
    let u = unstable.iter().filter(|&&x| x).count() as f64 / WINDOW as f64;
    let pairs = unstable.windows(2).filter(|p| p[0] && p[1]).count() as f64;
    let expected = u * u * (WINDOW - 1) as f64;
    assert!(
        pairs > 1.1 * expected,
        "U/U pairs {pairs} vs independent {expected}"
    );
}

#[test]
fn block_stable_fraction_near_three_quarters() {
    let dev = device(7);
    let stats = block_stability(&samples(&dev, ConditionKind::Ntna, 300, 0), 1216).unwrap();
    assert_eq!(stats.blocks.len(), 24);
    let mean = stats.blocks.iter().map(|b| b.stable_fraction).sum::<f64>() / 24.0;
    assert!((0.72..=0.78).contains(&mean), "{mean}");
}

#[test]
fn low_thresholds_admit_double_flips() {
    let dev = device(8);
    let enroll = samples(&dev, ConditionKind::Ntna, 300, 0);
    let tests = vec![(
        "NTWA".to_string(),
        samples(&dev, ConditionKind::Ntwa, 300, 10_000),
    )];
    let report = threshold_sweep(&enroll, &tests, 1..=2, 1216).unwrap();
    assert!(report.rows.iter().any(|r| r.max_flips >= 2));
}

#[test]
fn noiseless_device_sweeps_clean() {
    let dev = DeviceModel::new(1, 4 * 1216, &Calibration::noiseless()).unwrap();
    let enroll = samples(&dev, ConditionKind::Ntna, 5, 0);
    let tests: Vec<(String, Vec<BitVector>)> = ConditionKind::ALL
        .iter()
        .map(|&k| (k.to_string(), samples(&dev, k, 5, 100)))
        .collect();
    let report = threshold_sweep(&enroll, &tests, 1..=5, 1216).unwrap();
    assert_eq!(report.rows.len(), 3 * 5 * 4);
    assert!(report
        .rows
        .iter()
        .all(|r| r.max_flips == 0 && r.zero_flips == 5));
}
