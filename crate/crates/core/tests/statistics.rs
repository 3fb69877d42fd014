//! Statistical properties of the sampler and the protocol, checked against
//! moments and targets computed by hand.

use std::f64::consts::PI;

use spbox::boxes::{sp_box_table, SpParameter};
use spbox::harness::{Geometry, MonteCarlo, SweepConfig};
use spbox::protocol::{run_round, sample_hidden_pair, sample_unit_vector, UnitVector};
use spbox::rng::Stream;

const N: u64 = 1_000_000;

fn sp(p: f64) -> SpParameter {
    SpParameter::new(p).unwrap()
}

#[test]
fn sphere_sampler_moments() {
    let mut rng = Stream::new(2024, 0);
    let e = UnitVector::normalized(1.0, 2.0, -2.0).unwrap();
    let mut sums = [0.0f64; 3];
    let mut proj2 = 0.0;
    for _ in 0..N {
        let pair = sample_hidden_pair(&mut rng);
        for u in [pair.lambda1, pair.lambda2] {
            let c = u.components();
            for k in 0..3 {
                sums[k] += c[k];
            }
            proj2 += u.dot_unit(&e).powi(2);
        }
    }
    let n = 2.0 * N as f64;
    // component variance 1/3; (u·e)² has mean 1/3 and variance 1/5 - 1/9 = 4/45
    let sigma_mean = (1.0 / (3.0 * n)).sqrt();
    for s in sums {
        assert!(
            (s / n).abs() <= 4.0 * sigma_mean,
            "component mean {}",
            s / n
        );
    }
    let sigma_proj = (4.0 / (45.0 * n)).sqrt();
    assert!(
        (proj2 / n - 1.0 / 3.0).abs() <= 4.0 * sigma_proj,
        "{}",
        proj2 / n
    );
}

#[test]
fn hidden_vectors_are_independent() {
    // E[λ₁·λ₂] = 0 with variance 1/3 for independent uniform directions.
    let mut rng = Stream::new(5, 0);
    let mut sum = 0.0;
    for _ in 0..N {
        let pair = sample_hidden_pair(&mut rng);
        sum += pair.lambda1.dot_unit(&pair.lambda2);
    }
    let sigma = (1.0 / (3.0 * N as f64)).sqrt();
    assert!((sum / N as f64).abs() <= 4.0 * sigma);
}

#[test]
fn local_outcomes_are_unbiased() {
    for p in [0.5, 0.75, 1.0] {
        let mut rng = Stream::new(31, 0);
        let (mut zeros_a, mut zeros_b) = (0u64, 0u64);
        for _ in 0..N {
            let a = sample_unit_vector(&mut rng);
            let b = sample_unit_vector(&mut rng);
            let t = run_round(sp(p), &a, &b, &mut rng);
            zeros_a += (t.v_a == 0) as u64;
            zeros_b += (t.v_b == 0) as u64;
        }
        let sigma = (0.25 / N as f64).sqrt();
        for zeros in [zeros_a, zeros_b] {
            let f = zeros as f64 / N as f64;
            assert!((f - 0.5).abs() <= 4.0 * sigma, "p = {p}: {f}");
        }
    }
}

#[test]
fn conditional_bias_at_fixed_hidden_pair() {
    // Frequency oracle: with λ fixed, v(A) = sgn(A·λ₁) exactly when a = 0.
    let mc = MonteCarlo::new(4).unwrap();
    let report = mc.conditional_bias_test(sp(0.75), 10, 100_000, 3).unwrap();
    for row in &report.rows {
        let sigma = (0.75f64 * 0.25 / row.n as f64).sqrt();
        assert!((row.frequency - 0.75).abs() <= 4.0 * sigma, "{row:?}");
        assert!((row.expected_entropy - 0.811_278_124_459_133).abs() < 1e-12);
    }
    assert!(report.passed());
}

#[test]
fn box_frequencies_match_table_for_every_input() {
    let p = sp(0.6);
    let table = sp_box_table(p);
    let mut rng = Stream::new(8, 0);
    for x in 0..2u8 {
        for y in 0..2u8 {
            let mut counts = [0u64; 4];
            for _ in 0..250_000 {
                let (a, b) = spbox::boxes::sample_sp_box(p, x, y, &mut rng);
                counts[(2 * a + b) as usize] += 1;
            }
            for i in 0..4u8 {
                let expected = table.get(x, y, i >> 1, i & 1);
                let f = counts[i as usize] as f64 / 250_000.0;
                let sigma = (expected * (1.0 - expected) / 250_000.0).sqrt();
                assert!(
                    (f - expected).abs() <= 4.0 * sigma + 1e-12,
                    "x={x} y={y} cell {i}"
                );
            }
        }
    }
}

#[test]
fn standard_error_scales_as_inverse_root_n() {
    let mc = MonteCarlo::default();
    let b = UnitVector::from_angles(PI / 2.0, 0.0);
    let se: Vec<f64> = [10_000u64, 100_000, 1_000_000]
        .iter()
        .map(|&n| {
            mc.estimate_correlation(sp(0.75), &UnitVector::Z, &b, n, 12)
                .unwrap()
                .std_error
        })
        .collect();
    let root10 = 10f64.sqrt();
    for w in se.windows(2) {
        let ratio = w[0] / w[1];
        assert!((ratio / root10 - 1.0).abs() < 0.02, "ratio {ratio}");
    }
}

#[test]
fn correlation_does_not_depend_on_p() {
    let angles: Vec<f64> = [0.0, 45.0, 90.0, 135.0, 180.0]
        .iter()
        .map(|d: &f64| d.to_radians())
        .collect();
    let config = SweepConfig::new(vec![sp(0.5), sp(0.75), sp(1.0)], angles, N, 77);
    let result = MonteCarlo::default().sweep(&config).unwrap();
    assert!(result.max_abs_z() <= 4.0, "max|z| = {}", result.max_abs_z());
    assert!(
        result.max_pairwise_z() <= 4.0,
        "{}",
        result.max_pairwise_z()
    );
}

#[test]
fn random_frame_geometry_matches_target() {
    let angles: Vec<f64> = [20.0, 70.0, 110.0, 160.0]
        .iter()
        .map(|d: &f64| d.to_radians())
        .collect();
    let mut config = SweepConfig::new(vec![sp(0.5), sp(0.9)], angles, 500_000, 13);
    config.geometry = Geometry::RandomFrame;
    let result = MonteCarlo::default().sweep(&config).unwrap();
    assert!(result.max_abs_z() <= 4.0, "{:?}", result.rows);
}

#[test]
fn broken_decoder_is_detected() {
    let mut config = SweepConfig::new(vec![sp(0.75)], vec![PI / 3.0], 100_000, 1);
    config.fault = Some(spbox::protocol::Fault::DropBobFlip);
    let result = MonteCarlo::default().sweep(&config).unwrap();
    // the fault flips every parity: mean ≈ 1 - target
    assert!((result.rows[0].estimate.mean - 0.25).abs() < 0.01);
    assert!(!result.accepted());
}
