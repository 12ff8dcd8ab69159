use proptest::prelude::*;
use rand::Rng;
use rand_distr::Exp1;

use regen_extremes::birth_death::{bd_envelope, BDSpec};
use regen_extremes::envelope::{generalized_inverse, l2, l3, lemma5_sum, normalized_stats, RateEnvelope};
use regen_extremes::iid::{lemma1_stats, running_max_series, sample_via_inverse};
use regen_extremes::numeric::ks_two_sample;
use regen_extremes::queues::{mmm_envelope, MMmSpec};
use regen_extremes::rng::replica_rng;

fn increasing(w: [f64; 5], c: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| {
        1.0 + w[0] * x + w[1] * x * x + w[2] * x.sqrt() + w[3] * ((x - c).tanh() + 1.0) + w[4] * x.ln_1p()
    }
}

fn built_in_envelopes() -> Vec<RateEnvelope> {
    vec![
        RateEnvelope::linear(0.5).unwrap(),
        RateEnvelope::power(2.0).unwrap(),
        mmm_envelope(&MMmSpec::new(1.0, 1.0, 2).unwrap()).unwrap(),
        bd_envelope(&BDSpec::new(0.5, 1.0, 0.5).unwrap()).unwrap(),
        bd_envelope(&BDSpec::new(1.0, 3.0, 2.0).unwrap()).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn galois_on_increasing_functions(
        w in prop::array::uniform5(0.01f64..5.0),
        c in 0.0f64..10.0,
        u1 in 0.0f64..1.0,
        u2 in 0.0f64..1.0,
    ) {
        let h = increasing(w, c);
        let (lo, hi) = (h(0.0), h(10.0));
        let (y1, y2) = (lo + u1.min(u2) * (hi - lo), lo + u1.max(u2) * (hi - lo));
        let x1 = generalized_inverse(&h, y1, (0.0, 10.0)).unwrap();
        let x2 = generalized_inverse(&h, y2, (0.0, 10.0)).unwrap();
        prop_assert!(((h(x1) - y1) / y1).abs() <= 1e-8, "H(H^-1({})) = {}", y1, h(x1));
        prop_assert!(((h(x2) - y2) / y2).abs() <= 1e-8);
        prop_assert!(x1 <= x2);
    }

    #[test]
    fn inverse_of_staircase_is_left_end_of_next_step(step in 0.05f64..3.0, y in 0.0f64..3.0) {
        let h = |x: f64| (x / step).floor();
        let x = generalized_inverse(h, y, (0.0, 20.0)).unwrap();
        let want = step * (y.floor() + 1.0);
        prop_assert!((x - want).abs() <= 1e-9 * want.max(1.0), "{} vs {}", x, want);
    }

    #[test]
    fn s2_and_s3_share_the_deviation(t in 20.0f64..1e12, xbar in 0.0f64..100.0, gamma in 0.1f64..3.0) {
        let env = RateEnvelope::linear(gamma).unwrap();
        let s = normalized_stats(&env, 1.0, t, xbar).unwrap();
        let (a, b) = (s.s2 * l2(t).unwrap(), s.s3 * l3(t).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn max_commutes_with_inverse_map(us in prop::collection::vec(0.0f64..40.0, 1..200), which in 0usize..5) {
        let env = &built_in_envelopes()[which];
        let floor = env.min_level();
        let us: Vec<f64> = us.into_iter().map(|u| u + floor).collect();
        let mapped_max = us.iter().map(|&u| env.inverse(u).unwrap()).fold(f64::NEG_INFINITY, f64::max);
        let max_mapped = env.inverse(us.iter().copied().fold(f64::NEG_INFINITY, f64::max)).unwrap();
        prop_assert_eq!(mapped_max, max_mapped);
    }
}

#[test]
fn inverse_derivative_is_slowly_varying_along_close_sequences() {
    let n = 1e6f64;
    for env in built_in_envelopes() {
        let r = env.inverse_deriv(n).unwrap() / env.inverse_deriv(n + n.sqrt()).unwrap();
        assert!((r - 1.0).abs() < 1e-3, "{}: ratio {r}", env.name());
    }
}

#[test]
fn power_sum_ratio_approaches_one_monotonically() {
    for (p, b) in [(2.0, 1.0), (2.0, -1.0), (1.5, 2.0)] {
        let gaps: Vec<f64> = (20..=200).map(|n| (lemma5_sum(p, b, n).unwrap().ratio() - 1.0).abs()).collect();
        assert!(gaps.windows(2).all(|w| w[1] <= w[0]), "({p},{b}) not monotone");
    }
}

#[test]
fn inverse_pipeline_matches_mapped_exponential_maxima() {
    let env = bd_envelope(&BDSpec::new(0.5, 1.0, 0.5).unwrap()).unwrap();
    let floor = env.min_level();
    let (n, replicas) = (1000u64, 2000u64);
    let mut direct: Vec<f64> = (0..replicas)
        .map(|i| {
            let mut rng = replica_rng(101, i);
            (0..n)
                .map(|_| sample_via_inverse(&env, floor + rng.sample::<f64, _>(Exp1)).unwrap())
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let mut mapped: Vec<f64> = (0..replicas)
        .map(|i| {
            let mut rng = replica_rng(202, i);
            let m = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).fold(f64::NEG_INFINITY, f64::max);
            env.inverse(floor + m).unwrap()
        })
        .collect();
    let ks = ks_two_sample(&mut direct, &mut mapped);
    assert!(ks < 0.05, "KS = {ks}");
}

#[test]
fn bounded_perturbation_moves_the_statistic_by_at_most_its_bound() {
    // R = R₀ + R₁ with R₀(x) = x and a smoothed square wave |R₁| ≤ c1; R stays increasing
    let c1 = 0.3;
    let r = move |x: f64| x + c1 * (std::f64::consts::PI * x).sin().tanh();
    let base = RateEnvelope::linear(1.0).unwrap();
    let n_max = 1_000_000u64;

    let plain = running_max_series(|rng: &mut _| Ok(rand::Rng::sample::<f64, _>(rng, Exp1)), n_max, 1.1, &mut replica_rng(7, 0)).unwrap();
    let perturbed = running_max_series(
        |rng: &mut _| {
            let u: f64 = rand::Rng::sample(rng, Exp1);
            generalized_inverse(r, u, (-1.0, u + 1.0))
        },
        n_max,
        1.1,
        &mut replica_rng(7, 0),
    )
    .unwrap();

    let a = lemma1_stats(&base, &plain).unwrap();
    let b = lemma1_stats(&base, &perturbed).unwrap();
    let (sa, sb) = (a.last().unwrap(), b.last().unwrap());
    assert_eq!(sa.n, n_max);
    let a_n = (n_max as f64).ln();
    let bound = 3.0 * c1 / (base.rate_deriv(a_n) * l2(n_max as f64).unwrap());
    assert!((sa.s2 - sb.s2).abs() < bound, "|{} - {}| >= {bound}", sa.s2, sb.s2);
}
