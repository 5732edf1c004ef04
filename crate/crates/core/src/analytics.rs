//! Closed-form per-channel-use probabilities, PUPE, spoofing probability and
//! the minimum-Eb/N0 search.
//!
//! Per channel use, a recovered message is
//! - type A: exactly one legitimate transmitter, correctly demodulated and authenticated,
//! - type B: exactly one illegitimate transmitter, demodulated and wrongly authenticated,
//! - type C: no transmitter, a demodulation false alarm that is wrongly authenticated.
//!
//! The expected list size is approximated by `min(P*N, D_L)` and split
//! between the types in proportion to their probabilities.

use crate::channel::db_to_linear;
use crate::codec;
use crate::error::{Error, Result};

/// Gaussian tail probability `Q(x) = P[Z > x]`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Symbol error probability of a collision-free OOK channel use,
/// `Q(sqrt(B * Eb/N0 / 2))`. Miss and false alarm are equal with threshold `A/2`.
pub fn symbol_error_prob(ebn0_db: f64, num_bits: u32) -> f64 {
    let snr = f64::from(num_bits) * db_to_linear(ebn0_db);
    q_function((snr / 2.0).sqrt())
}

/// `(1 - 1/N)^k`, via `exp(k * ln(1 - 1/N))`.
pub(crate) fn all_miss_prob(n_uses: f64, k: u32) -> f64 {
    if k == 0 {
        1.0
    } else {
        (f64::from(k) * (-1.0 / n_uses).ln_1p()).exp()
    }
}

pub fn p_type_a(d_l: u32, d_i: u32, n_uses: f64, p_sym_err: f64, p_md: f64) -> f64 {
    if d_l == 0 {
        return 0.0;
    }
    f64::from(d_l) / n_uses * all_miss_prob(n_uses, d_l + d_i - 1) * (1.0 - p_sym_err) * (1.0 - p_md)
}

pub fn p_type_b(d_l: u32, d_i: u32, n_uses: f64, p_sym_err: f64, p_fa: f64) -> f64 {
    if d_i == 0 {
        return 0.0;
    }
    f64::from(d_i) / n_uses * all_miss_prob(n_uses, d_l + d_i - 1) * (1.0 - p_sym_err) * p_fa
}

pub fn p_type_c(d_l: u32, d_i: u32, n_uses: f64, p_false_alarm: f64, p_fa: f64) -> f64 {
    all_miss_prob(n_uses, d_l + d_i) * p_false_alarm * p_fa
}

/// Closed-form quantities at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticalPoint {
    /// `P_{1->0} = P_{0->1}`.
    pub p_sym_err: f64,
    pub p_a: f64,
    pub p_b: f64,
    pub p_c: f64,
    pub p_total: f64,
    /// Number of channel uses `N`.
    pub n_uses: f64,
    /// `P_L`; `None` when there are no legitimate devices.
    pub pupe: Option<f64>,
    /// `P_I`; `None` when there are no illegitimate devices.
    pub spoof: Option<f64>,
}

impl AnalyticalPoint {
    /// Expected number of recovered messages before the list cap, `P*N`.
    pub fn expected_recovered(&self) -> f64 {
        self.p_total * self.n_uses
    }
}

/// Evaluates every closed-form quantity from an explicit symbol error probability.
///
/// `n_uses` need not be a power of two. When `P = 0` nothing is ever
/// recovered: `P_L = 1`, `P_I = 0`.
pub fn evaluate(d_l: u32, d_i: u32, n_uses: f64, p_sym_err: f64, p_md: f64, p_fa: f64) -> AnalyticalPoint {
    let p_a = p_type_a(d_l, d_i, n_uses, p_sym_err, p_md);
    let p_b = p_type_b(d_l, d_i, n_uses, p_sym_err, p_fa);
    let p_c = p_type_c(d_l, d_i, n_uses, p_sym_err, p_fa);
    let p_total = p_a + p_b + p_c;
    let list_len = (p_total * n_uses).min(f64::from(d_l));
    let share = |p: f64| if p_total > 0.0 { p / p_total * list_len } else { 0.0 };
    let pupe = (d_l > 0).then(|| (1.0 - share(p_a) / f64::from(d_l)).clamp(0.0, 1.0));
    let spoof = (d_i > 0).then(|| (share(p_b) / f64::from(d_i)).clamp(0.0, 1.0));
    AnalyticalPoint {
        p_sym_err,
        p_a,
        p_b,
        p_c,
        p_total,
        n_uses,
        pupe,
        spoof,
    }
}

/// Population and authentication parameters that stay fixed while Eb/N0 varies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemInputs {
    pub d_l: u32,
    pub d_i: u32,
    pub num_bits: u32,
    pub p_md: f64,
    pub p_fa: f64,
}

impl SystemInputs {
    pub fn n_uses(&self) -> f64 {
        codec::block_length(self.num_bits) as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_bits == 0 || self.num_bits > codec::MAX_BITS {
            return Err(Error::invalid("bits", format!("B={} outside 1..={}", self.num_bits, codec::MAX_BITS)));
        }
        check_probability("p_md", self.p_md)?;
        check_probability("p_fa", self.p_fa)
    }

    /// All closed-form quantities at `ebn0_db`.
    pub fn at(&self, ebn0_db: f64) -> AnalyticalPoint {
        evaluate(
            self.d_l,
            self.d_i,
            self.n_uses(),
            symbol_error_prob(ebn0_db, self.num_bits),
            self.p_md,
            self.p_fa,
        )
    }
}

pub(crate) fn check_probability(field: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("{p} is not a probability")))
    }
}

/// Analytical PUPE point. Fails when `D_L = 0`, where PUPE is undefined.
pub fn pupe_analytical(system: &SystemInputs, ebn0_db: f64) -> Result<AnalyticalPoint> {
    system.validate()?;
    if system.d_l == 0 {
        return Err(Error::invalid("dl", "PUPE is undefined without legitimate devices"));
    }
    Ok(system.at(ebn0_db))
}

/// Analytical spoofing probability per illegitimate device. Fails when `D_I = 0`.
pub fn spoofing_analytical(system: &SystemInputs, ebn0_db: f64) -> Result<f64> {
    system.validate()?;
    if system.d_i == 0 {
        return Err(Error::invalid("di", "spoofing probability needs at least one illegitimate device"));
    }
    Ok(system.at(ebn0_db).spoof.unwrap_or(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub target_pupe: f64,
    pub search_lo_db: f64,
    pub search_hi_db: f64,
    pub grid_step_db: f64,
    pub tol_db: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            target_pupe: 0.05,
            search_lo_db: -20.0,
            search_hi_db: 40.0,
            grid_step_db: 0.5,
            tol_db: 0.01,
        }
    }
}

impl SolverConfig {
    pub fn with_target(target_pupe: f64) -> Self {
        Self {
            target_pupe,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.target_pupe > 0.0 && self.target_pupe <= 1.0) {
            return Err(Error::invalid("target_pupe", format!("{} not in (0, 1]", self.target_pupe)));
        }
        if !(self.search_lo_db.is_finite() && self.search_hi_db.is_finite()) {
            return Err(Error::invalid("search_lo_db", "search bounds must be finite"));
        }
        if self.search_lo_db >= self.search_hi_db {
            return Err(Error::invalid(
                "search_lo_db",
                format!("{} is not below search_hi_db {}", self.search_lo_db, self.search_hi_db),
            ));
        }
        if self.grid_step_db.is_nan() || self.grid_step_db <= 0.0 {
            return Err(Error::invalid("grid_step_db", "must be positive"));
        }
        if self.tol_db.is_nan() || self.tol_db <= 0.0 {
            return Err(Error::invalid("tol_db", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MinEbn0 {
    Feasible(f64),
    /// The target is not met even at the top of the search range.
    Infeasible,
}

impl MinEbn0 {
    pub fn db(self) -> Option<f64> {
        match self {
            MinEbn0::Feasible(db) => Some(db),
            MinEbn0::Infeasible => None,
        }
    }
}

/// Smallest Eb/N0 (dB) in the search range meeting `P_L <= target`.
///
/// A coarse grid scan brackets the first feasible point, then bisection
/// narrows the bracket to `tol_db`. The returned value is always feasible.
pub fn min_ebn0_for_pupe(config: &SolverConfig, system: &SystemInputs) -> Result<MinEbn0> {
    config.validate()?;
    system.validate()?;
    if system.d_l == 0 {
        return Err(Error::invalid("dl", "PUPE is undefined without legitimate devices"));
    }
    let eps = config.target_pupe;
    let pupe = |db: f64| system.at(db).pupe.unwrap_or(1.0);
    let feasible = |db: f64| pupe(db) <= eps;

    if feasible(config.search_lo_db) {
        return Ok(MinEbn0::Feasible(config.search_lo_db));
    }
    let mut lo = config.search_lo_db;
    let mut hi = None;
    let mut k = 1u64;
    loop {
        let x = (config.search_lo_db + k as f64 * config.grid_step_db).min(config.search_hi_db);
        if feasible(x) {
            hi = Some(x);
            break;
        }
        if x >= config.search_hi_db {
            break;
        }
        lo = x;
        k += 1;
    }
    let Some(mut hi) = hi else {
        return Ok(MinEbn0::Infeasible);
    };
    while hi - lo > config.tol_db {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(MinEbn0::Feasible(hi))
}

/// One step of the D_L sweep behind [`regime_transition_dl`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionSample {
    pub d_l: u32,
    pub ebn0_db: f64,
    /// `P*N` at the solved Eb/N0.
    pub expected_recovered: f64,
}

impl TransitionSample {
    /// The list cap binds: `P*N >= D_L`.
    pub fn saturated(&self) -> bool {
        self.expected_recovered >= f64::from(self.d_l)
    }
}

/// Solves the minimum Eb/N0 for every `D_L` in `d_l_range` and records `P*N`
/// there. Infeasible `D_L` values are skipped.
pub fn transition_sweep(
    config: &SolverConfig,
    base: &SystemInputs,
    d_l_range: std::ops::RangeInclusive<u32>,
) -> Result<Vec<TransitionSample>> {
    let mut out = Vec::new();
    for d_l in d_l_range {
        if d_l == 0 {
            continue;
        }
        let system = SystemInputs { d_l, ..*base };
        if let MinEbn0::Feasible(db) = min_ebn0_for_pupe(config, &system)? {
            out.push(TransitionSample {
                d_l,
                ebn0_db: db,
                expected_recovered: system.at(db).expected_recovered(),
            });
        }
    }
    Ok(out)
}

/// Default upper end of the D_L sweep used by [`regime_transition_dl`].
pub const DEFAULT_MAX_DL: u32 = 500;

/// Smallest feasible `D_L` at which `P*N <= D_L` holds at the solved
/// minimum Eb/N0, i.e. where `min(P*N, D_L)` stops being capped by `D_L`.
///
/// `base.d_l` is ignored. Returns `None` when no such `D_L` exists up to `max_dl`.
pub fn regime_transition_dl(
    config: &SolverConfig,
    base: &SystemInputs,
    max_dl: u32,
) -> Result<Option<TransitionSample>> {
    config.validate()?;
    base.validate()?;
    for d_l in 1..=max_dl {
        let samples = transition_sweep(config, base, d_l..=d_l)?;
        if let Some(s) = samples.first() {
            if s.expected_recovered <= f64::from(d_l) {
                return Ok(Some(*s));
            }
        }
    }
    Ok(None)
}
