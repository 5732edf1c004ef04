mod common;

use common::*;
use ohc_ura::analytics::{self, p_type_a, p_type_b, p_type_c};
use ohc_ura::channel::{self, DeviceRegistry, FrontEnd};
use ohc_ura::receiver::{self, IdleUses, Provenance, RffiModel};
use ohc_ura::rf_frontend::DeviceProfile;
use ohc_ura::simkit::{self, SystemConfig};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn type_probabilities_match_enumeration() {
    let grid = [0.0, 0.1, 0.37, 0.5, 1.0];
    for n in 1..=6usize {
        for d in 0..=4usize {
            for d_l in 0..=d {
                let d_i = d - d_l;
                for &pe in &grid {
                    for &pmd in &grid {
                        for &pfa in &grid {
                            let exact = exact_type_rates(d_l, d_i, n, pe, pmd, pfa);
                            let (dl, di, nf) = (d_l as u32, d_i as u32, n as f64);
                            assert!((p_type_a(dl, di, nf, pe, pmd) - exact.p_a).abs() <= 1e-12);
                            assert!((p_type_b(dl, di, nf, pe, pfa) - exact.p_b).abs() <= 1e-12);
                            assert!((p_type_c(dl, di, nf, pe, pfa) - exact.p_c).abs() <= 1e-12);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn enumerated_placement_example() {
    // D_L=2, D_I=1 over 4 uses: 4^3 placements.
    let r = exact_type_rates(2, 1, 4, 0.0, 0.0, 0.0);
    assert!((r.p_a - 0.28125).abs() < 1e-15);
    let r = exact_type_rates(2, 1, 4, 0.0, 0.0, 0.02);
    assert!((r.p_b - 2.8125e-3).abs() < 1e-15);
}

#[test]
fn analytical_pupe_is_exact_without_false_acceptance() {
    // With p_fa = 0 the list never exceeds D_L and the min() is inactive.
    for n in [2usize, 3, 4, 6] {
        for d_l in 1..=3usize {
            for d_i in 0..=(3 - d_l) {
                for pe in [0.0, 0.1, 0.3] {
                    for pmd in [0.0, 0.25, 0.5] {
                        let pt = analytics::evaluate(d_l as u32, d_i as u32, n as f64, pe, pmd, 0.0);
                        let (pupe, spoof) = exact_pupe_spoof(d_l, d_i, n, pe, pmd, 0.0);
                        assert!((pt.pupe.unwrap() - pupe).abs() <= 1e-12, "n={n} dl={d_l} di={d_i}");
                        assert_eq!(spoof, 0.0);
                    }
                }
            }
        }
    }
}

#[test]
fn two_devices_eight_uses_collision_floor() {
    let (pupe, _) = exact_pupe_spoof(2, 0, 8, 0.0, 0.0, 0.0);
    assert!((pupe - 0.125).abs() < 1e-15);
}

#[test]
fn noiseless_receiver_matches_enumeration() {
    for num_bits in [1u32, 2] {
        let n = 1usize << num_bits;
        for d in 1..=3usize {
            for d_l in 1..=d {
                let d_i = d - d_l;
                for pmd in [0.0, 0.5] {
                    for pfa in [0.0, 0.5] {
                        let exact = exact_pupe_spoof(d_l, d_i, n, 0.0, pmd, pfa);
                        let sim = receiver_exhaustive_pupe_spoof(d_l, d_i, num_bits, pmd, pfa);
                        assert!((exact.0 - sim.0).abs() <= 1e-12, "N={n} dl={d_l} di={d_i} pmd={pmd} pfa={pfa}: {exact:?} vs {sim:?}");
                        assert!((exact.1 - sim.1).abs() <= 1e-12);
                    }
                }
            }
        }
    }
}

#[test]
fn perfect_receiver_returns_collision_free_legit_messages() {
    // N = 16, up to four active devices: every placement.
    let num_bits = 4;
    let n = 16usize;
    let params = channel::derive_params(f64::INFINITY, num_bits).unwrap();
    for d in 1..=4usize {
        for d_l in 1..=d {
            let registry = DeviceRegistry::from_profiles(
                FrontEnd::Ideal,
                (0..d as u32).map(|id| DeviceProfile::nominal(id, (id as usize) < d_l)),
            );
            let mut rng = ChaCha8Rng::seed_from_u64(d as u64);
            for_each_placement(n, d, |pl| {
                let occ = channel::assign_indices(num_bits, pl.iter().enumerate().map(|(k, &u)| (k as u32, u as u64)));
                let obs = channel::observe(&occ, &registry, &params, &mut rng).unwrap();
                let list = receiver::recover_round(&obs, &occ, &registry, &params, &RffiModel::perfect(), d_l, IdleUses::Sampled, &mut rng)
                    .unwrap();
                let kinds = classify(pl, d_l, n);
                let mut expected: Vec<u64> = (0..n).filter(|&u| kinds[u] == UseKind::Legit).map(|u| u as u64).collect();
                let mut got: Vec<u64> = list.entries().iter().map(|e| e.index).collect();
                expected.sort_unstable();
                got.sort_unstable();
                assert_eq!(got, expected, "{pl:?}");
                assert!(list.entries().iter().all(|e| e.provenance == Provenance::TypeA && u64::from(e.message.index()) == e.index));
            });
        }
    }
}

#[test]
fn monte_carlo_matches_enumeration_small_blocks() {
    for num_bits in [1u32, 2] {
        let n = 1usize << num_bits;
        for (d_l, d_i) in [(1, 0), (2, 0), (1, 1), (2, 1), (1, 2), (3, 0)] {
            for (pmd, pfa) in [(0.0, 0.0), (0.2, 0.4)] {
                let c = SystemConfig {
                    num_bits,
                    d_l,
                    d_i,
                    ebn0_db: f64::INFINITY,
                    rffi: RffiModel::new(pmd, pfa).unwrap(),
                    rounds: 100_000,
                    seed: 1000 + u64::from(num_bits * 10 + d_l * 3 + d_i),
                    ..SystemConfig::default()
                };
                let rep = simkit::estimate(&c).unwrap();
                let (pupe, spoof) = exact_pupe_spoof(d_l as usize, d_i as usize, n, 0.0, pmd, pfa);
                let se = (pupe * (1.0 - pupe) / (100_000.0 * f64::from(d_l))).sqrt();
                assert!((rep.pupe_hat - pupe).abs() <= 3.0 * se.max(1e-9), "N={n} {d_l}/{d_i}: {} vs {pupe}", rep.pupe_hat);
                if d_i > 0 {
                    let se = (spoof * (1.0 - spoof) / (100_000.0 * f64::from(d_i))).sqrt();
                    assert!((rep.spoof_hat - spoof).abs() <= 3.0 * se.max(1e-9), "spoof {} vs {spoof}", rep.spoof_hat);
                }
            }
        }
    }
}

/// Per-channel-use acceptance rates before the list cap, sparse and dense.
#[test]
fn receiver_type_rates_converge_to_closed_form() {
    let num_bits = 4;
    let n = 16u64;
    let (d_l, d_i) = (3u32, 2u32);
    let ebn0_db = 1.0;
    let params = channel::derive_params(ebn0_db, num_bits).unwrap();
    let pe = analytics::symbol_error_prob(ebn0_db, num_bits);
    let rffi = RffiModel::new(0.2, 0.3).unwrap();
    let registry = DeviceRegistry::from_profiles(
        FrontEnd::Ideal,
        (0..d_l + d_i).map(|id| DeviceProfile::nominal(id, id < d_l)),
    );
    let rounds = 100_000u64;
    for idle in [IdleUses::Sampled, IdleUses::Observed] {
        let mut counts = [0u64; 3];
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..rounds {
            let occ = channel::assign_indices(num_bits, (0..d_l + d_i).map(|id| (id, rng.random_range(0..n))));
            let obs = match idle {
                IdleUses::Sampled => channel::observe(&occ, &registry, &params, &mut rng).unwrap(),
                IdleUses::Observed => channel::observe_dense(&occ, &registry, &params, &mut rng).unwrap(),
            };
            let list = receiver::recover_round(&obs, &occ, &registry, &params, &rffi, usize::MAX, idle, &mut rng).unwrap();
            counts[0] += list.count(Provenance::TypeA) as u64;
            counts[1] += list.count(Provenance::TypeB) as u64;
            counts[2] += list.count(Provenance::TypeC) as u64;
        }
        let trials = (rounds * n) as f64;
        let expected = [
            p_type_a(d_l, d_i, n as f64, pe, rffi.p_md),
            p_type_b(d_l, d_i, n as f64, pe, rffi.p_fa),
            p_type_c(d_l, d_i, n as f64, pe, rffi.p_fa),
        ];
        for (c, p) in counts.iter().zip(expected) {
            let rate = *c as f64 / trials;
            let se = (p * (1.0 - p) / trials).sqrt();
            assert!((rate - p).abs() <= 3.0 * se, "{idle:?}: rate {rate} vs {p}");
        }
    }
}
