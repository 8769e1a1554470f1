//! Sparse walker ⊗ coin states on the integer line.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::coin::{CoinVector, C64, PHYSICAL_TOL};
use crate::error::{Error, Result};

/// Amplitudes below this modulus are dropped after every operation.
pub const PRUNE_TOL: f64 = 1e-15;

/// Map from lattice position to the coin amplitudes stored there.
///
/// Entries whose two components are both zero are never stored.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WalkerState {
    amplitudes: BTreeMap<i64, CoinVector>,
}

fn prune_component(z: C64) -> C64 {
    if z.norm() < PRUNE_TOL {
        C64::new(0.0, 0.0)
    } else {
        z
    }
}

impl WalkerState {
    pub fn new() -> Self {
        Self::default()
    }

    /// `|x⟩ ⊗ coin`.
    pub fn localized(x: i64, coin: CoinVector) -> Self {
        let mut s = Self::new();
        s.insert(x, coin);
        s
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (i64, CoinVector)>) -> Self {
        let mut s = Self::new();
        for (x, v) in entries {
            s.accumulate(x, v);
        }
        s
    }

    /// Replaces the amplitude at `x`, pruning negligible components.
    pub fn insert(&mut self, x: i64, coin: CoinVector) {
        let pruned = CoinVector::new(prune_component(coin.h), prune_component(coin.v));
        if pruned.is_zero() {
            self.amplitudes.remove(&x);
        } else {
            self.amplitudes.insert(x, pruned);
        }
    }

    /// Adds `coin` to whatever is stored at `x`.
    pub fn accumulate(&mut self, x: i64, coin: CoinVector) {
        let cur = self.get(x);
        self.insert(x, cur + coin);
    }

    pub fn get(&self, x: i64) -> CoinVector {
        self.amplitudes
            .get(&x)
            .copied()
            .unwrap_or_else(CoinVector::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &CoinVector)> {
        self.amplitudes.iter().map(|(x, v)| (*x, v))
    }

    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        self.amplitudes.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(CoinVector::norm_sqr).sum()
    }

    pub fn scale(&self, a: C64) -> Self {
        Self::from_entries(self.iter().map(|(x, v)| (x, v.scale(a))))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (x, v) in other.iter() {
            out.accumulate(x, *v);
        }
        out
    }

    /// `⟨self|other⟩` over the joint space.
    pub fn inner(&self, other: &Self) -> C64 {
        self.iter()
            .map(|(x, a)| crate::coin::inner(a, &other.get(x)))
            .sum()
    }

    pub fn check_normalized(&self) -> Result<()> {
        let n = self.norm_sqr();
        if !n.is_finite() {
            return Err(Error::NonFinite);
        }
        if (n - 1.0).abs() > PHYSICAL_TOL {
            return Err(Error::NotNormalized(n));
        }
        Ok(())
    }

    /// Largest amplitude-wise distance to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.support()
            .chain(other.support())
            .map(|x| {
                let d = self.get(x) - other.get(x);
                d.h.norm().max(d.v.norm())
            })
            .fold(0.0, f64::max)
    }
}
