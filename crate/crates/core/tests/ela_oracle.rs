use hpoela::bbob::instantiate_bbob;
use hpoela::design::{Design, ElaSample};
use hpoela::ela::{self, ic, ElaError, CATALOG};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod support;
use support::{disp_oracle, entropy_oracle, nbc_oracle};

fn random_sample(rng: &mut ChaCha8Rng) -> ElaSample {
    let n = rng.random_range(8..=12);
    let d = rng.random_range(1..=3);
    let x: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random()).collect()).collect();
    let z: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
    ElaSample::new(x, z).unwrap()
}

#[test]
fn nbc_matches_brute_force_on_random_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..100 {
        let s = random_sample(&mut rng);
        let got = ela::features_nbc(&s).unwrap().values();
        let want = nbc_oracle(s.x(), s.z());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= 1e-12, "{g} vs {w}");
        }
    }
}

#[test]
fn disp_matches_brute_force_on_random_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let qs = [0.25, 0.5, 0.75, 1.0];
    for _ in 0..100 {
        let s = random_sample(&mut rng);
        let f = ela::features_disp_with(&s, &qs).unwrap();
        for q in qs {
            let want = disp_oracle(s.x(), s.z(), q);
            let tag = format!("{:02}", (q * 100.0).round() as u64);
            let got = [
                f.get(&format!("disp.ratio_mean_{tag}")).unwrap(),
                f.get(&format!("disp.ratio_median_{tag}")).unwrap(),
                f.get(&format!("disp.diff_mean_{tag}")).unwrap(),
                f.get(&format!("disp.diff_median_{tag}")).unwrap(),
            ];
            for (g, w) in got.iter().zip(want) {
                assert!((g - w).abs() <= 1e-12, "q={q}: {g} vs {w}");
            }
        }
    }
}

#[test]
fn handcrafted_eight_point_disp() {
    let x = vec![
        vec![0.1, 0.2],
        vec![0.9, 0.8],
        vec![0.15, 0.25],
        vec![0.5, 0.5],
        vec![0.3, 0.9],
        vec![0.7, 0.1],
        vec![0.2, 0.15],
        vec![0.95, 0.4],
    ];
    let z = vec![0.0, 5.0, 0.5, 2.0, 3.0, 4.0, 0.2, 6.0];
    let s = ElaSample::new(x.clone(), z.clone()).unwrap();
    let qs = [0.25, 0.5];
    let f = ela::features_disp_with(&s, &qs).unwrap();
    assert_eq!(f.len(), 8);
    for q in qs {
        let want = disp_oracle(&x, &z, q);
        let tag = format!("{:02}", (q * 100.0).round() as u64);
        assert!((f.get(&format!("disp.ratio_mean_{tag}")).unwrap() - want[0]).abs() < 1e-12);
        assert!((f.get(&format!("disp.diff_median_{tag}")).unwrap() - want[3]).abs() < 1e-12);
    }
}

#[test]
fn entropy_matches_enumeration_and_is_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for _ in 0..100 {
        let s = random_sample(&mut rng);
        let (grid, h) = ic::entropy_profile(&s, 0).unwrap();
        assert!(h.iter().all(|v| (0.0..=1.0).contains(v)));
        let tour = ic::nn_tour(s.x(), 0);
        let r = ic::slopes(s.x(), s.z(), &tour).unwrap();
        for k in [0usize, 200, 400, 600] {
            let psi = ic::symbols(&r, grid[k]);
            assert!((h[k] - entropy_oracle(&psi)).abs() < 1e-14);
        }
    }
}

fn bbob_sample(fid: u32, dim: usize) -> ElaSample {
    let p = instantiate_bbob(fid, 1, dim).unwrap();
    let d = Design::sample(&p, 50 * dim, 7, 10).unwrap();
    ElaSample::from_design(&d).unwrap()
}

#[test]
fn full_catalog_on_bbob_designs() {
    for fid in [1, 7, 16, 24] {
        let s = bbob_sample(fid, 3);
        let f = ela::compute_all(&s).unwrap();
        assert_eq!(f.names(), CATALOG);
        assert!(f.values().iter().all(|v| v.is_finite()));
        assert_eq!(f, ela::compute_all(&s).unwrap());
    }
}

#[test]
fn ic_only_depends_on_the_tour_start_point() {
    let s = bbob_sample(3, 2);
    let n = s.len();
    let mut perm: Vec<usize> = (0..n).rev().collect();
    perm.rotate_left(5);
    let x: Vec<Vec<f64>> = perm.iter().map(|i| s.x()[*i].clone()).collect();
    let z: Vec<f64> = perm.iter().map(|i| s.z()[*i]).collect();
    let start = perm.iter().position(|i| *i == 0).unwrap();
    let t = ElaSample::new(x, z).unwrap();
    let a = ic::features_ic_from(&s, 0).unwrap();
    let b = ic::features_ic_from(&t, start).unwrap();
    for ((_, u), (_, v)) in a.iter().zip(b.iter()) {
        assert!((u - v).abs() < 1e-12);
    }
}

#[test]
fn too_small_samples_are_reported() {
    let s = ElaSample::new(vec![vec![0.0], vec![1.0]], vec![0.0, 1.0]).unwrap();
    assert!(matches!(ela::features_nbc(&s), Err(ElaError::InsufficientSample { .. })));
    assert!(matches!(ela::features_ic(&s), Err(ElaError::InsufficientSample { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn row_order_does_not_matter(seed in 0u64..1000, shift in 1usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 40;
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..2).map(|_| rng.random()).collect()).collect();
        let z: Vec<f64> = x.iter().map(|r| (3.0 * r[0]).sin() + r[1] * r[1]).collect();
        let s = ElaSample::new(x.clone(), z.clone()).unwrap();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.rotate_left(shift);
        let t = ElaSample::new(
            perm.iter().map(|i| x[*i].clone()).collect(),
            perm.iter().map(|i| z[*i]).collect(),
        ).unwrap();
        let a = ela::features_ela_meta(&s).unwrap();
        let b = ela::features_ela_meta(&t).unwrap();
        let mut pairs: Vec<(f64, f64)> = a.values().into_iter().zip(b.values()).collect();
        for (f, g) in [
            (ela::features_ela_distr(&s), ela::features_ela_distr(&t)),
            (ela::features_nbc(&s), ela::features_nbc(&t)),
            (ela::features_disp_with(&s, &[0.1, 0.25]), ela::features_disp_with(&t, &[0.1, 0.25])),
        ] {
            pairs.extend(f.unwrap().values().into_iter().zip(g.unwrap().values()));
        }
        for (u, v) in pairs {
            prop_assert!((u - v).abs() <= 1e-9 * (1.0 + u.abs()), "{} vs {}", u, v);
        }
    }
}
