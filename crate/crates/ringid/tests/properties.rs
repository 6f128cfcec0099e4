//! Statistical properties of the benchmark over 100 seeded trials per point.

use ringid::bench::{parse_grid, run_grid};
use ringid_core::imprint::{build_keyset, WatermarkConfig};

fn accuracies(grid: &str, keys: &[usize], sigma: f64) -> Vec<f64> {
    let ks = build_keyset(*keys.iter().max().unwrap(), &WatermarkConfig::default(), 21).unwrap();
    run_grid(&ks, &parse_grid(grid).unwrap(), keys, 100, sigma, 22)
        .unwrap()
        .into_iter()
        .map(|r| r.accuracy)
        .collect()
}

fn non_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0])
}

#[test]
fn accuracy_falls_with_noise() {
    let acc = accuracies("noise=0,noise=2,noise=4,noise=8", &[32], 0.0);
    assert!(non_increasing(&acc), "{acc:?}");
    assert!(acc[0] == 1.0 && acc[3] < 1.0, "{acc:?}");
}

#[test]
fn accuracy_falls_with_rotation_angle() {
    let acc = accuracies("rotate=0,rotate=15,rotate=30,rotate=45", &[32], 0.5);
    assert!(non_increasing(&acc), "{acc:?}");
}

#[test]
fn accuracy_rises_with_crop_fraction() {
    let mut acc = accuracies("cs=0.5,cs=0.75,cs=0.9,cs=1.0", &[32], 0.1);
    acc.reverse();
    assert!(non_increasing(&acc), "{acc:?}");
}

#[test]
fn accuracy_falls_with_key_count() {
    let acc = accuracies("blur=8", &[32, 128, 2048], 0.1);
    assert!(non_increasing(&acc), "{acc:?}");
}
