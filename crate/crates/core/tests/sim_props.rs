use proptest::prelude::*;

use progeny_core::law::OffspringLaw;
use progeny_core::rational::rat;
use progeny_core::sim::{simulate, simulate_summary, GWConfig};

fn cfg(seed: u64, replicas: u64, max_generations: u64, max_total: u64) -> GWConfig {
    GWConfig {
        master_seed: seed,
        max_generations,
        max_total,
        replicas,
    }
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn results_do_not_depend_on_worker_count(seed in any::<u64>(), num in 1i64..=5) {
        let p = OffspringLaw::geometric(rat(num, 10), 0).unwrap();
        let c = cfg(seed, 300, 10_000, 100_000);
        let one = in_pool(1, || simulate(&p, &c).unwrap());
        let many = in_pool(4, || simulate(&p, &c).unwrap());
        prop_assert_eq!(&one, &many);
        let s1 = in_pool(1, || simulate_summary(&p, &c, 20).unwrap());
        let s4 = in_pool(4, || simulate_summary(&p, &c, 20).unwrap());
        prop_assert_eq!(s1.histogram, s4.histogram);
    }

    #[test]
    fn raising_caps_keeps_uncensored_replicas(seed in any::<u64>(), gens in 1u64..30, total in 2u64..200) {
        // critical law: censoring actually happens at small caps
        let p = OffspringLaw::sibuya_offspring(rat(3, 2), 0).unwrap();
        let tight = simulate(&p, &cfg(seed, 200, gens, total)).unwrap();
        let loose = simulate(&p, &cfg(seed, 200, gens * 10, total * 10)).unwrap();
        for (t, l) in tight.iter().zip(&loose) {
            if !t.censored {
                prop_assert_eq!(t, l);
            }
        }
        let censored = |rs: &[progeny_core::sim::GWResult]| rs.iter().filter(|r| r.censored).count();
        prop_assert!(censored(&loose) <= censored(&tight));
    }
}

#[test]
fn subcritical_geometric_mean_total() {
    // m = alpha/(1-alpha) = 1/2, so E[S] = 1/(1-m) = 2
    let p = OffspringLaw::geometric(rat(1, 3), 0).unwrap();
    let s = simulate_summary(&p, &cfg(11, 200_000, 100_000, 10_000_000), 30).unwrap();
    assert_eq!(s.censored, 0);
    assert!((s.mean_total - 2.0).abs() < 3.0 * s.mean_total_se, "{s:?}");
}

#[test]
fn censoring_vanishes_as_caps_grow() {
    let p = OffspringLaw::geometric(rat(2, 5), 0).unwrap();
    let mut last = 1.0;
    for cap in [4u64, 40, 400, 4000] {
        let s = simulate_summary(&p, &cfg(5, 20_000, cap, cap * 10), 10).unwrap();
        assert!(s.censored_fraction <= last);
        last = s.censored_fraction;
    }
    assert!(last < 1e-3, "censored fraction {last}");
}
