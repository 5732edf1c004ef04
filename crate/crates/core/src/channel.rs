//! Channel-use occupancy and matched-filter observations.
//!
//! Normalization: `A = 1`, `Ts = 1`, so `Es = 1` and `Eb = 1/B`. The whole
//! message energy sits in one OOK symbol, hence `Es/N0 = B * Eb/N0` and the
//! matched-filter noise variance is `N0/2`.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::codec::{self, MessagePayload};
use crate::error::{Error, Result};
use crate::rf_frontend::{self, DeviceProfile};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    ebn0_db: f64,
    num_bits: u32,
    amplitude: f64,
    symbol_duration: f64,
    es: f64,
    n0: f64,
    sigma: f64,
}

impl ChannelParams {
    pub fn ebn0_db(&self) -> f64 {
        self.ebn0_db
    }
    pub fn num_bits(&self) -> u32 {
        self.num_bits
    }
    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }
    pub fn symbol_duration(&self) -> f64 {
        self.symbol_duration
    }
    pub fn es(&self) -> f64 {
        self.es
    }
    pub fn eb(&self) -> f64 {
        self.es / f64::from(self.num_bits)
    }
    pub fn n0(&self) -> f64 {
        self.n0
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn num_channel_uses(&self) -> u64 {
        codec::block_length(self.num_bits)
    }

    /// Returns a copy with a new Eb/N0, all derived fields recomputed.
    pub fn with_ebn0_db(&self, ebn0_db: f64) -> Self {
        Self::compute(ebn0_db, self.num_bits)
    }

    fn compute(ebn0_db: f64, num_bits: u32) -> Self {
        let amplitude = 1.0;
        let symbol_duration = 1.0;
        let es = amplitude * amplitude * symbol_duration;
        let n0 = es / (f64::from(num_bits) * db_to_linear(ebn0_db));
        Self {
            ebn0_db,
            num_bits,
            amplitude,
            symbol_duration,
            es,
            n0,
            sigma: (n0 / 2.0).sqrt(),
        }
    }
}

pub fn derive_params(ebn0_db: f64, num_bits: u32) -> Result<ChannelParams> {
    if num_bits == 0 || num_bits > codec::MAX_BITS {
        return Err(Error::invalid(
            "bits",
            format!("B={num_bits} outside 1..={}", codec::MAX_BITS),
        ));
    }
    if ebn0_db.is_nan() {
        return Err(Error::invalid("ebn0_db", "NaN"));
    }
    Ok(ChannelParams::compute(ebn0_db, num_bits))
}

/// Which transmitters occupy which channel uses in one round.
///
/// Only occupied indices are stored; keys are kept sorted so iteration order
/// is reproducible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundOccupancy {
    num_bits: u32,
    occupied: BTreeMap<u64, Vec<u32>>,
}

impl RoundOccupancy {
    pub fn empty(num_bits: u32) -> Self {
        Self {
            num_bits,
            occupied: BTreeMap::new(),
        }
    }

    pub fn num_bits(&self) -> u32 {
        self.num_bits
    }

    pub fn num_channel_uses(&self) -> u64 {
        codec::block_length(self.num_bits)
    }

    pub fn idle_count(&self) -> u64 {
        self.num_channel_uses() - self.occupied.len() as u64
    }

    pub fn occupants(&self, index: u64) -> &[u32] {
        self.occupied.get(&index).map_or(&[], Vec::as_slice)
    }

    /// Occupied indices with their transmitters, in increasing index order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, &[u32])> {
        self.occupied.iter().map(|(&n, ids)| (n, ids.as_slice()))
    }

    pub fn occupied_len(&self) -> usize {
        self.occupied.len()
    }

    pub fn transmitter_count(&self) -> usize {
        self.occupied.values().map(Vec::len).sum()
    }

    pub fn is_occupied(&self, index: u64) -> bool {
        self.occupied.contains_key(&index)
    }

    /// Sorted occupied indices.
    pub fn occupied_indices(&self) -> impl Iterator<Item = u64> + '_ {
        self.occupied.keys().copied()
    }

    fn push(&mut self, index: u64, device_id: u32) {
        self.occupied.entry(index).or_default().push(device_id);
    }
}

/// Places each device's message on its one-hot channel use.
pub fn assign_round(num_bits: u32, messages: &[(u32, MessagePayload)]) -> Result<RoundOccupancy> {
    let mut occ = RoundOccupancy::empty(num_bits);
    for (id, msg) in messages {
        if msg.num_bits() != num_bits {
            return Err(Error::MixedBits {
                expected: num_bits,
                found: msg.num_bits(),
            });
        }
        occ.push(u64::from(codec::encode(msg).hot_index()), *id);
    }
    Ok(occ)
}

/// Same as [`assign_round`] but from raw indices, skipping payload construction.
pub fn assign_indices(num_bits: u32, placements: impl IntoIterator<Item = (u32, u64)>) -> RoundOccupancy {
    let mut occ = RoundOccupancy::empty(num_bits);
    for (id, n) in placements {
        debug_assert!(n < occ.num_channel_uses());
        occ.push(n, id);
    }
    occ
}

/// How transmitted amplitudes are shaped by the device front ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrontEnd {
    #[default]
    Ideal,
    PaNonlinear,
}

/// Profiles of every device that may transmit in a round.
#[derive(Debug, Clone, Default)]
pub struct DeviceRegistry {
    front_end: FrontEnd,
    profiles: HashMap<u32, DeviceProfile>,
}

impl DeviceRegistry {
    pub fn new(front_end: FrontEnd) -> Self {
        Self {
            front_end,
            profiles: HashMap::new(),
        }
    }

    pub fn from_profiles(front_end: FrontEnd, profiles: impl IntoIterator<Item = DeviceProfile>) -> Self {
        let mut reg = Self::new(front_end);
        for p in profiles {
            reg.insert(p);
        }
        reg
    }

    pub fn insert(&mut self, profile: DeviceProfile) {
        self.profiles.insert(profile.device_id, profile);
    }

    pub fn get(&self, device_id: u32) -> Result<&DeviceProfile> {
        self.profiles
            .get(&device_id)
            .ok_or(Error::UnknownDevice(device_id))
    }

    pub fn front_end(&self) -> FrontEnd {
        self.front_end
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    /// Received amplitude of `device_id` transmitting nominal amplitude `a`.
    pub fn transmit(&self, device_id: u32, a: f64) -> Result<f64> {
        let profile = self.get(device_id)?;
        Ok(match self.front_end {
            FrontEnd::Ideal => rf_frontend::ideal_passthrough(a),
            FrontEnd::PaNonlinear => rf_frontend::distort(a, profile),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelUseObservation {
    pub index: u64,
    /// Matched-filter output, normalized so a lone ideal transmitter gives `A`.
    pub value: f64,
    /// Number of superposed transmitters. Simulation metadata, not estimated.
    pub occupant_count: usize,
}

fn noise<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> f64 {
    if sigma == 0.0 {
        0.0
    } else {
        let z: f64 = StandardNormal.sample(rng);
        sigma * z
    }
}

/// Observations for occupied channel uses only, in increasing index order.
pub fn observe<R: Rng + ?Sized>(
    occupancy: &RoundOccupancy,
    registry: &DeviceRegistry,
    params: &ChannelParams,
    rng: &mut R,
) -> Result<Vec<ChannelUseObservation>> {
    let a = params.amplitude();
    occupancy
        .iter()
        .map(|(index, ids)| {
            let signal = ids
                .iter()
                .map(|&id| registry.transmit(id, a))
                .sum::<Result<f64>>()?;
            Ok(ChannelUseObservation {
                index,
                value: signal + noise(rng, params.sigma()),
                occupant_count: ids.len(),
            })
        })
        .collect()
}

/// Observations for all `N` channel uses, idle ones included.
pub fn observe_dense<R: Rng + ?Sized>(
    occupancy: &RoundOccupancy,
    registry: &DeviceRegistry,
    params: &ChannelParams,
    rng: &mut R,
) -> Result<Vec<ChannelUseObservation>> {
    let a = params.amplitude();
    (0..occupancy.num_channel_uses())
        .map(|index| {
            let ids = occupancy.occupants(index);
            let signal = ids
                .iter()
                .map(|&id| registry.transmit(id, a))
                .sum::<Result<f64>>()?;
            Ok(ChannelUseObservation {
                index,
                value: signal + noise(rng, params.sigma()),
                occupant_count: ids.len(),
            })
        })
        .collect()
}
