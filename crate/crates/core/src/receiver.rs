//! Per-channel-use OOK demodulation, RFFI authentication and recovered-list
//! assembly.
//!
//! The receiver is handed the true occupant count of each channel use and
//! rejects every collided use outright. RFFI itself is a Bernoulli module
//! parameterized by its miss-detection and false-alarm probabilities.

use rand::seq::index;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::analytics::{check_probability, q_function};
use crate::channel::{ChannelParams, ChannelUseObservation, DeviceRegistry, RoundOccupancy};
use crate::codec::{self, MessagePayload};
use crate::error::Result;

/// RFFI authentication performance.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RffiModel {
    /// Probability that a collision-free legitimate signal is rejected.
    pub p_md: f64,
    /// Probability that a non-legitimate signal is accepted.
    pub p_fa: f64,
}

impl RffiModel {
    pub fn new(p_md: f64, p_fa: f64) -> Result<Self> {
        check_probability("p_md", p_md)?;
        check_probability("p_fa", p_fa)?;
        Ok(Self { p_md, p_fa })
    }

    pub fn perfect() -> Self {
        Self::default()
    }
}

/// Where a recovered-list entry came from. Evaluation metadata only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    /// Sent by a legitimate device.
    TypeA,
    /// Forged by an illegitimate device.
    TypeB,
    /// Noise false alarm on an idle channel use.
    TypeC,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecoveredEntry {
    pub index: u64,
    pub message: MessagePayload,
    pub provenance: Provenance,
}

/// Receiver output for one round. Holds at most `D_L` entries with distinct indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RecoveredList {
    entries: Vec<RecoveredEntry>,
}

impl RecoveredList {
    pub fn entries(&self) -> &[RecoveredEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Whether the message sent on channel use `index` made it into the list.
    pub fn contains_index(&self, index: u64) -> bool {
        self.entries.iter().any(|e| e.index == index)
    }

    pub fn count(&self, provenance: Provenance) -> usize {
        self.entries.iter().filter(|e| e.provenance == provenance).count()
    }
}

/// Hard OOK decision with threshold `A/2` (strict).
pub fn demodulate_use(observation: &ChannelUseObservation, params: &ChannelParams) -> bool {
    observation.value > params.amplitude() / 2.0
}

/// RFFI decision for one channel use that demodulated as 1.
///
/// Collided uses always fail. A lone legitimate signal passes with
/// probability `1 - p_md`; anything else (forged signal or pure noise)
/// passes with probability `p_fa`.
pub fn authenticate_use<R: Rng + ?Sized>(
    occupant_count: usize,
    occupant_legitimate: bool,
    model: &RffiModel,
    rng: &mut R,
) -> bool {
    match occupant_count {
        0 => rng.random_bool(model.p_fa),
        1 if occupant_legitimate => rng.random_bool(1.0 - model.p_md),
        1 => rng.random_bool(model.p_fa),
        _ => false,
    }
}

/// Caps the accepted entries at `d_l`, keeping a uniformly random subset
/// when there are more. Retained entries keep their input order.
pub fn build_list<R: Rng + ?Sized>(accepted: Vec<RecoveredEntry>, d_l: usize, rng: &mut R) -> RecoveredList {
    if accepted.len() <= d_l {
        return RecoveredList { entries: accepted };
    }
    let mut keep = index::sample(rng, accepted.len(), d_l).into_vec();
    keep.sort_unstable();
    let mut keep = keep.into_iter().peekable();
    let entries = accepted
        .into_iter()
        .enumerate()
        .filter_map(|(i, e)| {
            if keep.peek() == Some(&i) {
                keep.next();
                Some(e)
            } else {
                None
            }
        })
        .collect();
    RecoveredList { entries }
}

/// How idle channel uses reach the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IdleUses {
    /// Idle uses are absent from the observations; the number of accepted
    /// false alarms is drawn as `Binomial(idle_count, P_{0->1} * p_fa)` and
    /// placed uniformly on idle indices.
    #[default]
    Sampled,
    /// Idle uses are present in the observations and processed like any other.
    Observed,
}

/// Maps the `rank`-th idle channel use (0-based, increasing order) to its index.
fn idle_index_at(rank: u64, occupied_sorted: &[u64]) -> u64 {
    let mut n = rank;
    for &o in occupied_sorted {
        if o <= n {
            n += 1;
        } else {
            break;
        }
    }
    n
}

/// Full per-round receiver: demodulate, authenticate, decode, cap at `d_l`.
#[allow(clippy::too_many_arguments)]
pub fn recover_round<R: Rng + ?Sized>(
    observations: &[ChannelUseObservation],
    occupancy: &RoundOccupancy,
    registry: &DeviceRegistry,
    params: &ChannelParams,
    rffi: &RffiModel,
    d_l: usize,
    idle: IdleUses,
    rng: &mut R,
) -> Result<RecoveredList> {
    let num_bits = params.num_bits();
    let mut accepted = Vec::new();
    for obs in observations {
        if obs.occupant_count >= 2 || !demodulate_use(obs, params) {
            continue;
        }
        let provenance = match obs.occupant_count {
            0 => Provenance::TypeC,
            _ => {
                let id = occupancy.occupants(obs.index)[0];
                if registry.get(id)?.legitimate {
                    Provenance::TypeA
                } else {
                    Provenance::TypeB
                }
            }
        };
        if authenticate_use(obs.occupant_count, provenance == Provenance::TypeA, rffi, rng) {
            accepted.push(RecoveredEntry {
                index: obs.index,
                message: codec::decode_index(obs.index, num_bits)?,
                provenance,
            });
        }
    }

    if idle == IdleUses::Sampled && rffi.p_fa > 0.0 {
        let p_false_alarm = q_function(params.amplitude() / (2.0 * params.sigma()));
        let idle_count = occupancy.idle_count();
        let p = p_false_alarm * rffi.p_fa;
        if idle_count > 0 && p > 0.0 {
            let k = Binomial::new(idle_count, p)
                .expect("binomial parameters are valid")
                .sample(rng);
            if k > 0 {
                let occupied: Vec<u64> = occupancy.occupied_indices().collect();
                let mut ranks = index::sample(rng, idle_count as usize, k as usize).into_vec();
                ranks.sort_unstable();
                for rank in ranks {
                    let n = idle_index_at(rank as u64, &occupied);
                    accepted.push(RecoveredEntry {
                        index: n,
                        message: codec::decode_index(n, num_bits)?,
                        provenance: Provenance::TypeC,
                    });
                }
            }
        }
    }

    Ok(build_list(accepted, d_l, rng))
}
