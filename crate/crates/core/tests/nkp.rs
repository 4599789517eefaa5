mod common;

use common::{kron_dense, random_spd};
use lumplab_core::linalg::{svd, Matrix, SymMatrix};
use lumplab_core::nkp::{
    cond_bound, hoffman_wielandt_check, nkp_rank1, nkp_rank1_3d, nkp_rank_r, rearrange, truncation_error,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn two_term(rng: &mut ChaCha8Rng, n1: usize, n2: usize, eps: f64) -> SymMatrix {
    let b1 = random_spd(rng, n1, 1.0);
    let c1 = random_spd(rng, n2, 1.0);
    let b2 = random_spd(rng, n1, 0.5);
    let c2 = random_spd(rng, n2, 0.5);
    kron_dense(&[&b1, &c1]).add(&kron_dense(&[&b2, &c2]).scaled(eps))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rearrangement_is_linear_and_isometric(seed in any::<u64>(), n1 in 1usize..5, n2 in 1usize..5, a in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_spd(&mut rng, n1 * n2, 0.0);
        let y = random_spd(&mut rng, n1 * n2, 0.0);
        let rx = rearrange(&x, n1, n2).unwrap().matrix;
        let ry = rearrange(&y, n1, n2).unwrap().matrix;
        let rz = rearrange(&x.add(&y.scaled(a)), n1, n2).unwrap().matrix;
        let lin = Matrix::from_fn(rx.rows(), rx.cols(), |i, j| rx[(i, j)] + a * ry[(i, j)]);
        prop_assert!(rz.sub(&lin).frobenius_norm() <= 1e-12 * (1.0 + rz.frobenius_norm()));
        prop_assert!((rx.frobenius_norm() - x.frobenius_norm()).abs() <= 1e-12 * x.frobenius_norm());
    }

    #[test]
    fn error_identity(seed in any::<u64>(), n1 in 2usize..5, n2 in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_spd(&mut rng, n1 * n2, 1.0);
        let r = nkp_rank1(&m, n1, n2).unwrap();
        let actual = m.sub(&r.materialize().unwrap()).frobenius_norm();
        prop_assert!((actual - r.error).abs() <= 1e-10 * m.frobenius_norm());
        prop_assert!((r.error - truncation_error(&r.singular_values, 1)).abs() <= 1e-14 * m.frobenius_norm());
    }

    #[test]
    fn nkp_beats_random_candidates(seed in any::<u64>(), n1 in 2usize..4, n2 in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = two_term(&mut rng, n1, n2, 0.3);
        let r = nkp_rank1(&m, n1, n2).unwrap();
        for _ in 0..8 {
            let (sb, sc) = (rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0));
            let b = random_spd(&mut rng, n1, sb);
            let c = random_spd(&mut rng, n2, sc);
            // best scalar multiple of the candidate
            let kc = kron_dense(&[&b, &c]);
            let alpha: f64 = m.as_slice().iter().zip(kc.as_slice()).map(|(x, y)| x * y).sum::<f64>()
                / kc.as_slice().iter().map(|y| y * y).sum::<f64>();
            let err = m.sub(&kc.scaled(alpha)).frobenius_norm();
            prop_assert!(r.error <= err * (1.0 + 1e-12));
        }
    }

    #[test]
    fn cond_bound_on_two_term_sums(seed in any::<u64>(), n1 in 2usize..5, n2 in 2usize..5, eps in 0.001f64..0.2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = two_term(&mut rng, n1, n2, eps);
        let op = nkp_rank_r(&m, n1, n2, 2).unwrap();
        let cb = cond_bound(&op).unwrap();
        if let Some(ok) = cb.holds(1e-8) {
            prop_assert!(ok, "{:?}", cb);
        }
    }

    #[test]
    fn hoffman_wielandt(seed in any::<u64>(), n1 in 2usize..5, n2 in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_spd(&mut rng, n1 * n2, 1.0);
        let mt = nkp_rank1(&m, n1, n2).unwrap().materialize().unwrap();
        let (lhs, rhs) = hoffman_wielandt_check(&m, &mt).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-10) + 1e-14);
    }
}

#[test]
fn exact_rank_is_detected() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let m = two_term(&mut rng, 3, 4, 0.5);
    let r = nkp_rank1(&m, 3, 4).unwrap();
    assert_eq!(r.rank, 2);
    // singular values agree with a direct SVD of the rearrangement
    let direct = svd(&rearrange(&m, 3, 4).unwrap().matrix, 1e-14).unwrap();
    for (a, b) in r.singular_values.iter().zip(&direct.singular_values).take(2) {
        assert!((a - b).abs() < 1e-12 * direct.singular_values[0]);
    }
}

#[test]
fn spd_factors_for_spd_kronecker_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let m = two_term(&mut rng, 4, 3, 0.1);
    let r = nkp_rank1(&m, 4, 3).unwrap();
    for f in r.spd_factors().unwrap() {
        assert!(lumplab_core::linalg::sym_eigvals(&f).unwrap()[0] > 0.0);
    }
    assert!(r.asymmetry < 1e-12);
}

#[test]
fn tensor_nkp_error_is_monotone_in_sweeps() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let (b, c, d) = (random_spd(&mut rng, 2, 1.0), random_spd(&mut rng, 3, 1.0), random_spd(&mut rng, 2, 1.0));
    let m = kron_dense(&[&b, &c, &d]).add(&random_spd(&mut rng, 12, 0.0).scaled(1e-3));
    let r = nkp_rank1_3d(&m, [2, 3, 2]).unwrap();
    let best = r.history.iter().cloned().fold(f64::INFINITY, f64::min);
    assert_eq!(r.error, best);
    let actual = m.sub(&r.materialize().unwrap()).frobenius_norm();
    assert!((actual - r.error).abs() < 1e-10 * m.frobenius_norm());
    assert!(r.error < 1e-2 * m.frobenius_norm());
}
