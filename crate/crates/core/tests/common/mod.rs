//! Brute-force oracles shared by the integration tests.
//!
//! Everything here enumerates device placements and Bernoulli outcomes
//! directly and never calls the closed-form code it is checked against.

#![allow(dead_code)]

use ohc_ura::channel::{self, DeviceRegistry, FrontEnd};
use ohc_ura::receiver::{self, IdleUses, RffiModel};
use ohc_ura::rf_frontend::DeviceProfile;
use rand::RngCore;

/// Calls `f` with every placement of `devices` devices onto `n` channel uses.
pub fn for_each_placement(n: usize, devices: usize, mut f: impl FnMut(&[usize])) {
    let mut p = vec![0usize; devices];
    loop {
        f(&p);
        let mut k = 0;
        loop {
            if k == devices {
                return;
            }
            p[k] += 1;
            if p[k] < n {
                break;
            }
            p[k] = 0;
            k += 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UseKind {
    Idle,
    Legit,
    Illegit,
    Collided,
}

/// Devices `0..d_l` are legitimate, the rest illegitimate.
pub fn classify(placement: &[usize], d_l: usize, n: usize) -> Vec<UseKind> {
    let mut kinds = vec![UseKind::Idle; n];
    for (dev, &u) in placement.iter().enumerate() {
        kinds[u] = match kinds[u] {
            UseKind::Idle if dev < d_l => UseKind::Legit,
            UseKind::Idle => UseKind::Illegit,
            _ => UseKind::Collided,
        };
    }
    kinds
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub p_a: f64,
    pub p_b: f64,
    pub p_c: f64,
}

/// Exact per-channel-use type probabilities, averaged over all `n^(d_l+d_i)`
/// placements and all `n` channel uses.
pub fn exact_type_rates(d_l: usize, d_i: usize, n: usize, pe: f64, pmd: f64, pfa: f64) -> Rates {
    let mut acc = Rates { p_a: 0.0, p_b: 0.0, p_c: 0.0 };
    let mut count = 0usize;
    for_each_placement(n, d_l + d_i, |pl| {
        count += 1;
        for kind in classify(pl, d_l, n) {
            match kind {
                UseKind::Legit => acc.p_a += (1.0 - pe) * (1.0 - pmd),
                UseKind::Illegit => acc.p_b += (1.0 - pe) * pfa,
                UseKind::Idle => acc.p_c += pe * pfa,
                UseKind::Collided => {}
            }
        }
    });
    let norm = (count * n) as f64;
    Rates {
        p_a: acc.p_a / norm,
        p_b: acc.p_b / norm,
        p_c: acc.p_c / norm,
    }
}

/// Exact PUPE and spoofing probability of the full receiver, list cap and
/// uniform truncation included. Enumerates placements and the acceptance
/// outcome of every channel use.
pub fn exact_pupe_spoof(d_l: usize, d_i: usize, n: usize, pe: f64, pmd: f64, pfa: f64) -> (f64, f64) {
    let mut legit_ok = 0.0;
    let mut spoofed = 0.0;
    let mut placements = 0usize;
    for_each_placement(n, d_l + d_i, |pl| {
        placements += 1;
        let kinds = classify(pl, d_l, n);
        let p_accept: Vec<f64> = kinds
            .iter()
            .map(|k| match k {
                UseKind::Legit => (1.0 - pe) * (1.0 - pmd),
                UseKind::Illegit => (1.0 - pe) * pfa,
                UseKind::Idle => pe * pfa,
                UseKind::Collided => 0.0,
            })
            .collect();
        for mask in 0u32..(1 << n) {
            let mut w = 1.0;
            for (u, &p) in p_accept.iter().enumerate() {
                w *= if mask >> u & 1 == 1 { p } else { 1.0 - p };
            }
            if w == 0.0 {
                continue;
            }
            let k = mask.count_ones() as f64;
            let keep = if k > d_l as f64 { d_l as f64 / k } else { 1.0 };
            for (dev, &u) in pl.iter().enumerate() {
                if mask >> u & 1 == 1 {
                    if dev < d_l {
                        legit_ok += w * keep;
                    } else {
                        spoofed += w * keep;
                    }
                }
            }
        }
    });
    let pupe = 1.0 - legit_ok / (placements * d_l) as f64;
    let spoof = if d_i == 0 { 0.0 } else { spoofed / (placements * d_i) as f64 };
    (pupe, spoof)
}

/// RNG replaying a fixed list of words; panics when exhausted.
pub struct ScriptedRng {
    words: Vec<u64>,
    pos: usize,
}

impl ScriptedRng {
    /// One word per bit of `pattern`: bit set -> 0 (a `random_bool(0.5)` hit),
    /// bit clear -> `u64::MAX` (a miss).
    pub fn from_coins(pattern: u32, len: usize) -> Self {
        let words = (0..len)
            .map(|i| if pattern >> i & 1 == 1 { 0 } else { u64::MAX })
            .collect();
        Self { words, pos: 0 }
    }

    pub fn consumed(&self) -> usize {
        self.pos
    }
}

impl RngCore for ScriptedRng {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }
    fn next_u64(&mut self) -> u64 {
        let w = self.words[self.pos];
        self.pos += 1;
        w
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let w = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&w[..chunk.len()]);
        }
    }
}

/// PUPE and spoofing probability obtained by pushing every placement through
/// the real noiseless channel and receiver, with every authentication coin
/// enumerated through [`ScriptedRng`]. RFFI probabilities must be 0, 0.5 or 1.
/// The receiver runs uncapped; the `D_L` cap is applied as the exact
/// expectation of a uniform subset.
pub fn receiver_exhaustive_pupe_spoof(d_l: usize, d_i: usize, num_bits: u32, pmd: f64, pfa: f64) -> (f64, f64) {
    for p in [pmd, pfa] {
        assert!(p == 0.0 || p == 0.5 || p == 1.0);
    }
    let n = 1usize << num_bits;
    let total = d_l + d_i;
    let registry = DeviceRegistry::from_profiles(
        FrontEnd::Ideal,
        (0..total as u32).map(|id| DeviceProfile::nominal(id, (id as usize) < d_l)),
    );
    let params = channel::derive_params(f64::INFINITY, num_bits).unwrap();
    let rffi = RffiModel::new(pmd, pfa).unwrap();

    let mut legit_ok = 0.0;
    let mut spoofed = 0.0;
    let mut placements = 0usize;
    for_each_placement(n, total, |pl| {
        placements += 1;
        let occ = channel::assign_indices(num_bits, pl.iter().enumerate().map(|(d, &u)| (d as u32, u as u64)));
        let mut no_rng = ScriptedRng::from_coins(0, 0);
        let obs = channel::observe(&occ, &registry, &params, &mut no_rng).unwrap();
        let coins = total;
        let weight = 1.0 / f64::from(1u32 << coins);
        for pattern in 0u32..(1 << coins) {
            let mut rng = ScriptedRng::from_coins(pattern, coins);
            let list = receiver::recover_round(&obs, &occ, &registry, &params, &rffi, usize::MAX, IdleUses::Sampled, &mut rng)
                .unwrap();
            let k = list.len() as f64;
            let keep = if k > d_l as f64 { d_l as f64 / k } else { 1.0 };
            for (dev, &u) in pl.iter().enumerate() {
                if list.contains_index(u as u64) {
                    if dev < d_l {
                        legit_ok += weight * keep;
                    } else {
                        spoofed += weight * keep;
                    }
                }
            }
        }
    });
    let pupe = 1.0 - legit_ok / (placements * d_l) as f64;
    let spoof = if d_i == 0 { 0.0 } else { spoofed / (placements * d_i) as f64 };
    (pupe, spoof)
}
