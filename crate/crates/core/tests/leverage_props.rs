mod common;

use common::{fourier_dense, gaussian_matrix, gram_schmidt_leverage};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use toepcov::leverage::{fourier_leverage_bound, leverage_scores, leverage_scores_real, SketchParams};
use toepcov::toeplitz::fourier_matrix;

fn random_freqs(rng: &mut ChaCha8Rng, s: usize) -> Vec<f64> {
    (0..s).map(|_| rng.random_range(0.0..1.0)).collect()
}

#[test]
fn scores_are_dominated_by_the_closed_form_bound() {
    let d = 200;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..200 {
        let s = 1 + trial % 10;
        let freqs = random_freqs(&mut rng, s);
        let tau = leverage_scores(&fourier_matrix(&freqs, d));
        let bound = fourier_leverage_bound(d, s).unwrap();
        for (j, (t, b)) in tau.iter().zip(&bound.tau_bar).enumerate() {
            assert!(*t <= b + 1e-8, "trial {trial}, s={s}, j={}: {t} > {b}", j + 1);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scores_match_gram_schmidt(d in 4usize..60, s in 1usize..6, seed in any::<u64>()) {
        prop_assume!(s <= d);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let freqs = random_freqs(&mut rng, s);
        let got = leverage_scores(&fourier_matrix(&freqs, d));
        let want = gram_schmidt_leverage(&fourier_dense(&freqs, d));
        for (a, b) in got.iter().zip(&want) {
            prop_assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
        let trace: f64 = got.iter().sum();
        let rank = want.iter().sum::<f64>().round();
        prop_assert!((trace - rank).abs() < 1e-6);
    }

    #[test]
    fn score_is_least_norm_solution(seed in any::<u64>()) {
        // tau_j = min ||y||^2 subject to y^T A = a_j, solved here through the
        // 3x3 normal equations by Gaussian elimination
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = gaussian_matrix(&mut rng, 8, 3);
        let tau = leverage_scores_real(&a);
        for j in 0..8 {
            let mut g = [[0.0f64; 4]; 3];
            for r in 0..3 {
                for c in 0..3 {
                    g[r][c] = (0..8).map(|i| a[(i, r)] * a[(i, c)]).sum();
                }
                g[r][3] = a[(j, r)];
            }
            for p in 0..3 {
                let piv = (p..3).max_by(|&x, &y| g[x][p].abs().total_cmp(&g[y][p].abs())).unwrap();
                g.swap(p, piv);
                for r in 0..3 {
                    if r != p {
                        let f = g[r][p] / g[p][p];
                        for c in 0..4 {
                            g[r][c] -= f * g[p][c];
                        }
                    }
                }
            }
            let z: Vec<f64> = (0..3).map(|r| g[r][3] / g[r][r]).collect();
            let y: Vec<f64> = (0..8).map(|i| (0..3).map(|c| a[(i, c)] * z[c]).sum()).collect();
            for c in 0..3 {
                let lhs: f64 = (0..8).map(|i| y[i] * a[(i, c)]).sum();
                prop_assert!((lhs - a[(j, c)]).abs() < 1e-8);
            }
            let norm2: f64 = y.iter().map(|v| v * v).sum();
            prop_assert!((norm2 - tau[j]).abs() < 1e-8, "j={j}: {norm2} vs {}", tau[j]);
        }
    }
}

#[test]
fn random_fourier_trace_is_rank() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let freqs = random_freqs(&mut rng, 4);
    let total: f64 = leverage_scores(&fourier_matrix(&freqs, 50)).iter().sum();
    assert!((total - 4.0).abs() < 1e-6);
}

#[test]
fn sketch_is_unbiased_in_frobenius_norm() {
    let d = 64;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let c = gaussian_matrix(&mut rng, d, 3);
    let truth = c.norm_squared();
    let profile = fourier_leverage_bound(d, 2).unwrap();
    let mut total = 0.0;
    let draws = 2000;
    for seed in 0..draws {
        let sketch = SketchParams { eps: 1.0, delta: 0.5, oversampling: 0.05, seed, stream: 0 };
        total += sketch.draw(&profile).unwrap().apply(&c).unwrap().norm_squared();
    }
    let mean = total / draws as f64;
    assert!((mean - truth).abs() <= 0.05 * truth, "{mean} vs {truth}");
}

#[test]
fn sketch_embeds_a_fourier_subspace() {
    // large enough that the middle indices are kept with probability < 1
    let d = 8192;
    let s = 4;
    let profile = fourier_leverage_bound(d, s).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut good = 0;
    for seed in 0..100 {
        let freqs = random_freqs(&mut rng, s);
        let f = fourier_matrix(&freqs, d);
        let sk = SketchParams { oversampling: 2.0, ..SketchParams::new(0.25, 0.1, seed) }
            .draw(&profile)
            .unwrap();
        assert!(sk.len() < d);
        let sf = sk.apply_complex(&f).unwrap();
        let ok = (0..50).all(|_| {
            let y = DVector::from_fn(s, |_, _| {
                Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
            });
            let full = (&f * &y).norm_squared();
            let sketched = (&sf * &y).norm_squared();
            (0.75 * full..=1.25 * full).contains(&sketched)
        });
        good += ok as usize;
    }
    assert!(good >= 80, "{good}/100");
}

#[test]
fn sketch_selection_is_deterministic_and_scaled() {
    let profile = fourier_leverage_bound(100, 3).unwrap();
    let p = SketchParams { eps: 0.5, delta: 0.1, oversampling: 0.2, seed: 42, stream: 7 };
    let a = p.draw(&profile).unwrap();
    assert_eq!(a, p.draw(&profile).unwrap());
    assert_ne!(a.indices(), SketchParams { stream: 8, ..p }.draw(&profile).unwrap().indices());
    for r in &a.rows {
        assert!((r.scale * r.scale * r.p - 1.0).abs() < 1e-12);
    }
    let ones = DMatrix::from_element(100, 1, 1.0);
    let applied = a.apply(&ones).unwrap();
    for (r, row) in a.rows.iter().enumerate() {
        assert_eq!(applied[(r, 0)], row.scale);
    }
}
