use eventack_core::geometry::{project_bearing, relative_pose, AckermannParams, WorldPoint2D};
use eventack_core::robust::{histogram_vote, VoteConfig};
use eventack_core::solver::{
    solve_omega, BearingSample, ExpansionOrder, OmegaEstimate, SolverConfig,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bare(values: &[f64]) -> Vec<OmegaEstimate> {
    values
        .iter()
        .enumerate()
        .map(|(i, &w)| OmegaEstimate::bare(i as u64, w))
        .collect()
}

fn noisy_estimates(omega: f64, n: usize, sigma: f64, seed: u64) -> Vec<OmegaEstimate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = AckermannParams::new(omega, 0.3);
    (0..n as u64)
        .map(|id| {
            let depth = rng.random_range(4.0..15.0);
            let p = WorldPoint2D::new(rng.random_range(-0.4..0.4) * depth, depth);
            let samples: Vec<BearingSample> = (0..30)
                .map(|i| {
                    let t = 0.25 * i as f64 / 29.0;
                    let x = project_bearing(&p, &relative_pose(&params, t)).unwrap();
                    BearingSample::new(x + rng.random_range(-sigma..sigma), t)
                })
                .collect();
            let mut e = solve_omega(
                &samples,
                ExpansionOrder::S7C6,
                0.3,
                &SolverConfig::default(),
            )
            .unwrap();
            e.track_id = id;
            e
        })
        .collect()
}

#[test]
fn seven_inliers_three_outliers() {
    let mut failures = 0;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v: Vec<f64> = (0..7).map(|_| rng.random_range(0.298..0.302)).collect();
        v.extend((0..3).map(|_| rng.random_range(-1.0..1.0)));
        let r = histogram_vote(&bare(&v), &VoteConfig::default()).unwrap();
        if (r.omega_consensus - 0.3).abs() >= 0.005 {
            failures += 1;
        }
    }
    assert_eq!(failures, 0);
}

#[test]
fn refined_consensus_close_to_truth() {
    let est = noisy_estimates(0.3, 12, 1e-4, 5);
    let r = histogram_vote(&est, &VoteConfig::default()).unwrap();
    assert!(r.refined);
    assert!(
        (r.omega_consensus - 0.3).abs() < 0.01,
        "{}",
        r.omega_consensus
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn permutation_invariant(
        values in prop::collection::vec(-1.0f64..1.0, 1..40),
        seed in any::<u64>(),
    ) {
        let est = bare(&values);
        let mut shuffled = est.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.random_range(0..=i));
        }
        let cfg = VoteConfig::default();
        prop_assert_eq!(histogram_vote(&est, &cfg), histogram_vote(&shuffled, &cfg));
    }

    #[test]
    fn far_outliers_leave_consensus_unchanged(
        center in -0.5f64..0.5,
        inliers in prop::collection::vec(-0.004f64..0.004, 5..15),
        outliers in prop::collection::vec(0.1f64..1.0, 1..4),
        signs in prop::collection::vec(any::<bool>(), 4),
    ) {
        let base: Vec<f64> = inliers.iter().map(|d| center + d).collect();
        let cfg = VoteConfig::default();
        let before = histogram_vote(&bare(&base), &cfg).unwrap();
        let mut more = base.clone();
        // Spread outliers so no two share a neighbourhood with each other.
        for (k, (o, s)) in outliers.iter().zip(&signs).enumerate() {
            let off = o + 1.0 * k as f64;
            more.push(if *s { center + off } else { center - off });
        }
        let after = histogram_vote(&bare(&more), &cfg).unwrap();
        prop_assert_eq!(before.omega_consensus, after.omega_consensus);
        prop_assert_eq!(before.inlier_ids, after.inlier_ids);
    }

    #[test]
    fn refinement_stays_in_inlier_span(
        omega in -0.5f64..0.5,
        seed in any::<u64>(),
    ) {
        let est = noisy_estimates(omega, 8, 1e-3, seed);
        let vote = histogram_vote(&est, &VoteConfig::default());
        prop_assume!(vote.is_ok());
        let r = vote.unwrap();
        let inliers: Vec<f64> = est
            .iter()
            .filter(|e| r.inlier_ids.contains(&e.track_id))
            .map(|e| e.omega)
            .collect();
        let lo = inliers.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = inliers.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(r.omega_consensus >= lo - 1e-12 && r.omega_consensus <= hi + 1e-12);
    }
}
