//! Split-step, site-dependent-coin walks on the integer line.
//!
//! One sub-step is a site-local coin layer (identity wherever no coin is
//! listed) followed by the conditional shift `T`, which moves the `H`
//! component one site right and the `V` component one site left. A step is
//! an ordered list of sub-steps, and a schedule an ordered list of steps.

use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::coin::{CoinOperator, CoinVector, PHYSICAL_TOL};
use crate::error::{Error, Result};
use crate::state::WalkerState;
use crate::waveplate::PlateSequence;

/// One coin layer. Sites absent from `coins` receive the identity.
///
/// `plates` optionally records how each coin is realized optically; it is
/// provenance only and never changes the unitary evolution.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SubStep {
    coins: BTreeMap<i64, CoinOperator>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    plates: BTreeMap<i64, PlateSequence>,
}

impl SubStep {
    /// Rejects any coin that is not unitary within 1e-12.
    pub fn new(coins: BTreeMap<i64, CoinOperator>) -> Result<Self> {
        for (&site, m) in &coins {
            if !m.is_finite() {
                return Err(Error::NonFinite);
            }
            let residual = m.unitarity_residual();
            if residual > PHYSICAL_TOL {
                return Err(Error::NonUnitaryCoin { site, residual });
            }
        }
        Ok(Self {
            coins,
            plates: BTreeMap::new(),
        })
    }

    pub fn identity() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (i64, CoinOperator)>) -> Result<Self> {
        Self::new(pairs.into_iter().collect())
    }

    /// Attaches plate provenance for listed sites.
    pub fn with_plates(mut self, plates: BTreeMap<i64, PlateSequence>) -> Result<Self> {
        if let Some(site) = plates.keys().find(|s| !self.coins.contains_key(s)) {
            return Err(Error::Schedule(format!(
                "plate provenance for site {site} has no coin"
            )));
        }
        self.plates = plates;
        Ok(self)
    }

    pub fn coins(&self) -> &BTreeMap<i64, CoinOperator> {
        &self.coins
    }

    pub fn plates(&self) -> &BTreeMap<i64, PlateSequence> {
        &self.plates
    }

    pub fn coin_at(&self, x: i64) -> CoinOperator {
        self.coins
            .get(&x)
            .copied()
            .unwrap_or_else(CoinOperator::identity)
    }
}

/// An ordered list of steps starting from `origin`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WalkSchedule {
    origin: i64,
    steps: Vec<Vec<SubStep>>,
}

impl WalkSchedule {
    pub fn new(origin: i64, steps: Vec<Vec<SubStep>>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::EmptySchedule);
        }
        if let Some(i) = steps.iter().position(Vec::is_empty) {
            return Err(Error::Schedule(format!("step {i} has no sub-steps")));
        }
        Ok(Self { origin, steps })
    }

    /// `n` steps of `k` all-identity sub-steps.
    pub fn identity(origin: i64, steps: usize, substeps: usize) -> Result<Self> {
        Self::new(origin, vec![vec![SubStep::identity(); substeps]; steps])
    }

    pub fn origin(&self) -> i64 {
        self.origin
    }

    pub fn steps(&self) -> &[Vec<SubStep>] {
        &self.steps
    }

    pub fn shift_count(&self) -> usize {
        self.steps.iter().map(Vec::len).sum()
    }

    /// `|origin⟩ ⊗ coin`.
    pub fn initial(&self, coin: CoinVector) -> WalkerState {
        WalkerState::localized(self.origin, coin)
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn digest(&self) -> String {
        let json = crate::schedule_io::to_json_string(self);
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    /// Replaces every coin with `f(step, substep, site, coin, plates)`.
    pub fn map_coins<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize, i64, &CoinOperator, Option<&PlateSequence>) -> Result<CoinOperator>,
    {
        let mut steps = Vec::with_capacity(self.steps.len());
        for (si, step) in self.steps.iter().enumerate() {
            let mut subs = Vec::with_capacity(step.len());
            for (ki, sub) in step.iter().enumerate() {
                let mut coins = BTreeMap::new();
                for (&x, m) in &sub.coins {
                    coins.insert(x, f(si, ki, x, m, sub.plates.get(&x))?);
                }
                let mut s = SubStep::new(coins)?;
                s.plates = sub.plates.clone();
                subs.push(s);
            }
            steps.push(subs);
        }
        Self::new(self.origin, steps)
    }
}

/// Conditional shift: `H` moves to `x+1`, `V` moves to `x−1`.
pub fn shift(state: &WalkerState) -> WalkerState {
    let zero = num_complex::Complex64::new(0.0, 0.0);
    let mut out = WalkerState::new();
    for (x, v) in state.iter() {
        out.accumulate(x + 1, CoinVector::new(v.h, zero));
        out.accumulate(x - 1, CoinVector::new(zero, v.v));
    }
    out
}

/// Multiplies the coin at each listed site by that site's operator.
pub fn apply_coin_layer(state: &WalkerState, layer: &SubStep) -> WalkerState {
    WalkerState::from_entries(state.iter().map(|(x, v)| match layer.coins.get(&x) {
        Some(m) => (x, m.apply(v)),
        None => (x, *v),
    }))
}

/// One full step: for each sub-step in order, the coin layer then a shift.
pub fn step(state: &WalkerState, substeps: &[SubStep]) -> WalkerState {
    substeps.iter().fold(state.clone(), |s, layer| {
        shift(&apply_coin_layer(&s, layer))
    })
}

/// Applies every step of `schedule` in order.
pub fn evolve(initial: &WalkerState, schedule: &WalkSchedule) -> WalkerState {
    schedule
        .steps
        .iter()
        .fold(initial.clone(), |s, st| step(&s, st))
}

/// `P(x) = |h_x|² + |v_x|²`; rejects states that are not unit-norm.
pub fn position_distribution(state: &WalkerState) -> Result<BTreeMap<i64, f64>> {
    state.check_normalized()?;
    Ok(state.iter().map(|(x, v)| (x, v.norm_sqr())).collect())
}
