//! Seeded Monte Carlo estimation of PUPE and spoofing probability.
//!
//! Each round draws its own ChaCha stream from `(seed, round_index)`, so
//! results do not depend on how rounds are scheduled across threads. Tallies
//! are integer sums, reduced in an order-insensitive way.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analytics::{self, AnalyticalPoint, SystemInputs};
use crate::channel::{self, DeviceRegistry, FrontEnd};
use crate::codec;
use crate::error::{Error, Result};
use crate::receiver::{self, IdleUses, RffiModel};
use crate::rf_frontend::{DeviceProfile, PopulationModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    pub num_bits: u32,
    /// Active legitimate devices per round.
    pub d_l: u32,
    /// Active illegitimate devices per round.
    pub d_i: u32,
    /// Registered devices. Carried for reporting only.
    pub d_tot: Option<u32>,
    pub ebn0_db: f64,
    pub rffi: RffiModel,
    pub impairment: FrontEnd,
    pub population: PopulationModel,
    pub idle: IdleUses,
    pub rounds: u64,
    pub seed: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            num_bits: 12,
            d_l: 1,
            d_i: 0,
            d_tot: None,
            ebn0_db: 0.0,
            rffi: RffiModel::perfect(),
            impairment: FrontEnd::Ideal,
            population: PopulationModel::default(),
            idle: IdleUses::Sampled,
            rounds: 10_000,
            seed: 0,
        }
    }
}

impl SystemConfig {
    pub fn n_uses(&self) -> u64 {
        codec::block_length(self.num_bits)
    }

    pub fn system_inputs(&self) -> SystemInputs {
        SystemInputs {
            d_l: self.d_l,
            d_i: self.d_i,
            num_bits: self.num_bits,
            p_md: self.rffi.p_md,
            p_fa: self.rffi.p_fa,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_bits == 0 || self.num_bits > codec::MAX_BITS {
            return Err(Error::invalid("bits", format!("B={} outside 1..={}", self.num_bits, codec::MAX_BITS)));
        }
        if self.ebn0_db.is_nan() {
            return Err(Error::invalid("ebn0_db", "NaN"));
        }
        RffiModel::new(self.rffi.p_md, self.rffi.p_fa)?;
        if self.rounds == 0 {
            return Err(Error::invalid("rounds", "at least one round is required"));
        }
        Ok(())
    }

    /// Non-fatal sanity findings.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        let active = u64::from(self.d_l) + u64::from(self.d_i);
        if active > self.n_uses() {
            w.push(format!(
                "D_L + D_I = {active} exceeds the {} available channel uses",
                self.n_uses()
            ));
        }
        if let Some(d_tot) = self.d_tot {
            if d_tot < self.d_l {
                w.push(format!("D_tot = {d_tot} is smaller than D_L = {}", self.d_l));
            }
        }
        w
    }

    fn round_rng(&self, round_index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(round_index);
        rng
    }
}

/// Outcome of one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RoundTally {
    /// Legitimate devices whose message is in the recovered list.
    pub legit_recovered: u64,
    /// Illegitimate devices whose forged message is in the recovered list.
    pub spoofed: u64,
    pub list_len: u64,
    pub type_c: u64,
}

impl std::ops::Add for RoundTally {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            legit_recovered: self.legit_recovered + o.legit_recovered,
            spoofed: self.spoofed + o.spoofed,
            list_len: self.list_len + o.list_len,
            type_c: self.type_c + o.type_c,
        }
    }
}

/// Simulates round `round_index`. Devices `0..D_L` are legitimate, the next
/// `D_I` are illegitimate; all pick their message uniformly at random and,
/// under the PA model, draw fresh front-end parameters.
pub fn run_round(config: &SystemConfig, round_index: u64) -> Result<RoundTally> {
    let mut rng = config.round_rng(round_index);
    let n_uses = config.n_uses();
    let total = config.d_l + config.d_i;

    let placements: Vec<(u32, u64)> = (0..total).map(|id| (id, rng.random_range(0..n_uses))).collect();
    let profiles = (0..total).map(|id| {
        let legitimate = id < config.d_l;
        match config.impairment {
            FrontEnd::Ideal => DeviceProfile::nominal(id, legitimate),
            FrontEnd::PaNonlinear => config.population.draw(&mut rng, id, legitimate),
        }
    });
    let registry = DeviceRegistry::from_profiles(config.impairment, profiles.collect::<Vec<_>>());
    let occupancy = channel::assign_indices(config.num_bits, placements.iter().copied());
    let params = channel::derive_params(config.ebn0_db, config.num_bits)?;

    let observations = match config.idle {
        IdleUses::Sampled => channel::observe(&occupancy, &registry, &params, &mut rng)?,
        IdleUses::Observed => channel::observe_dense(&occupancy, &registry, &params, &mut rng)?,
    };
    let list = receiver::recover_round(
        &observations,
        &occupancy,
        &registry,
        &params,
        &config.rffi,
        config.d_l as usize,
        config.idle,
        &mut rng,
    )?;

    let mut in_list: Vec<u64> = list.entries().iter().map(|e| e.index).collect();
    in_list.sort_unstable();
    let hit = |n: &u64| in_list.binary_search(n).is_ok();
    let (legit, illegit) = placements.split_at(config.d_l as usize);
    Ok(RoundTally {
        legit_recovered: legit.iter().filter(|(_, n)| hit(n)).count() as u64,
        spoofed: illegit.iter().filter(|(_, n)| hit(n)).count() as u64,
        list_len: list.len() as u64,
        type_c: list.count(receiver::Provenance::TypeC) as u64,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub config: SystemConfig,
    pub pupe_hat: f64,
    pub spoof_hat: f64,
    pub stderr_pupe: f64,
    pub stderr_spoof: f64,
    pub rounds_run: u64,
    pub tally: RoundTally,
    /// Closed-form values at the same configuration.
    pub analytical: AnalyticalPoint,
}

fn binomial_stderr(p: f64, trials: u64) -> f64 {
    if trials == 0 {
        0.0
    } else {
        (p * (1.0 - p) / trials as f64).sqrt()
    }
}

/// Runs `config.rounds` rounds in parallel and estimates `P_L` and `P_I`.
pub fn estimate(config: &SystemConfig) -> Result<EstimateReport> {
    config.validate()?;
    if config.d_l == 0 {
        return Err(Error::invalid("dl", "PUPE needs at least one legitimate device"));
    }
    let tally = (0..config.rounds)
        .into_par_iter()
        .map(|r| run_round(config, r))
        .try_reduce(RoundTally::default, |a, b| Ok(a + b))?;

    let legit_trials = config.rounds * u64::from(config.d_l);
    let illegit_trials = config.rounds * u64::from(config.d_i);
    let pupe_hat = 1.0 - tally.legit_recovered as f64 / legit_trials as f64;
    let spoof_hat = if illegit_trials == 0 {
        0.0
    } else {
        tally.spoofed as f64 / illegit_trials as f64
    };
    let analytical = analytics::evaluate(
        config.d_l,
        config.d_i,
        config.n_uses() as f64,
        analytics::symbol_error_prob(config.ebn0_db, config.num_bits),
        config.rffi.p_md,
        config.rffi.p_fa,
    );
    Ok(EstimateReport {
        config: *config,
        pupe_hat,
        spoof_hat,
        stderr_pupe: binomial_stderr(pupe_hat, legit_trials),
        stderr_spoof: binomial_stderr(spoof_hat, illegit_trials),
        rounds_run: config.rounds,
        tally,
        analytical,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    DL,
    DI,
    Ebn0Db,
    PFa,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dl" => Ok(Self::DL),
            "di" => Ok(Self::DI),
            "ebn0-db" | "ebn0_db" | "ebn0" => Ok(Self::Ebn0Db),
            "pfa" => Ok(Self::PFa),
            other => Err(Error::invalid("axis", format!("unknown axis {other:?}; expected dl, di, ebn0-db or pfa"))),
        }
    }
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::DL => "dl",
            Self::DI => "di",
            Self::Ebn0Db => "ebn0-db",
            Self::PFa => "pfa",
        })
    }
}

/// SplitMix64 finalizer over `seed` and the sweep position.
pub fn derive_seed(seed: u64, position: u64) -> u64 {
    let mut z = seed.wrapping_add(position.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn as_count(axis: SweepAxis, v: f64) -> Result<u32> {
    if v >= 0.0 && v.fract() == 0.0 && v <= f64::from(u32::MAX) {
        Ok(v as u32)
    } else {
        Err(Error::invalid(
            if axis == SweepAxis::DL { "dl" } else { "di" },
            format!("{v} is not a device count"),
        ))
    }
}

/// One configuration per sweep value, each with its own derived seed.
pub fn sweep_configs(base: &SystemConfig, axis: SweepAxis, values: &[f64]) -> Result<Vec<SystemConfig>> {
    if values.is_empty() {
        return Err(Error::invalid("values", "sweep needs at least one value"));
    }
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut c = *base;
            match axis {
                SweepAxis::DL => c.d_l = as_count(axis, v)?,
                SweepAxis::DI => c.d_i = as_count(axis, v)?,
                SweepAxis::Ebn0Db => c.ebn0_db = v,
                SweepAxis::PFa => c.rffi = RffiModel::new(c.rffi.p_md, v)?,
            }
            c.seed = derive_seed(base.seed, i as u64);
            c.validate()?;
            Ok(c)
        })
        .collect()
}

pub fn sweep(base: &SystemConfig, axis: SweepAxis, values: &[f64]) -> Result<Vec<EstimateReport>> {
    sweep_configs(base, axis, values)?.iter().map(estimate).collect()
}
