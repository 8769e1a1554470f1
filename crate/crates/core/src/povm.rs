//! Coin-space measurement induced by reading out the walker position.
//!
//! For a schedule with total unitary `U`, the Kraus operator at site `x` is
//! `K_x = ⟨x|U|origin⟩`, a 2×2 matrix whose columns are the coin amplitudes
//! at `x` obtained from the inputs `|origin⟩|H⟩` and `|origin⟩|V⟩`. The POVM
//! element is `E_x = K_x†K_x`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::coin::{CoinOperator, CoinVector};
use crate::error::{Error, Result};
use crate::walk::{evolve, WalkSchedule};

/// Completeness residual above which extraction is treated as an engine fault.
pub const COMPLETENESS_FAULT: f64 = 1e-8;

/// Default tolerance of [`verify_sic`].
pub const SIC_TOL: f64 = 1e-10;

/// Margin below which two tetrahedron assignments count as tied.
pub const MATCH_AMBIGUITY: f64 = 1e-9;

/// POVM elements keyed by walker position.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PovmSet {
    pub elements: BTreeMap<i64, CoinOperator>,
    /// Digest of the schedule the elements were extracted from, if any.
    #[serde(default)]
    pub source: String,
}

impl PovmSet {
    pub fn new(elements: BTreeMap<i64, CoinOperator>, source: impl Into<String>) -> Self {
        Self {
            elements,
            source: source.into(),
        }
    }

    /// `{½|ξ_i⟩⟨ξ_i|}` placed at `positions[i]`.
    pub fn from_vectors(pairs: impl IntoIterator<Item = (i64, CoinVector)>, weight: f64) -> Self {
        let elements = pairs
            .into_iter()
            .map(|(x, v)| (x, v.projector().scale_re(weight)))
            .collect();
        Self::new(elements, "")
    }

    /// The tetrahedron SIC at positions `1..=4`.
    pub fn canonical_sic() -> Self {
        Self::from_vectors(
            (1..=4).map(|i| (i as i64, crate::coin::sic_vector(i).expect("1..=4"))),
            0.5,
        )
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn sum(&self) -> CoinOperator {
        self.elements.values().copied().sum()
    }

    /// Largest entrywise deviation of `Σ E_x` from the identity.
    pub fn completeness_residual(&self) -> f64 {
        self.sum().max_abs_diff(&CoinOperator::identity())
    }
}

fn basis_outputs(schedule: &WalkSchedule) -> [crate::state::WalkerState; 2] {
    [CoinVector::horizontal(), CoinVector::vertical()]
        .map(|b| evolve(&schedule.initial(b), schedule))
}

fn kraus_from_columns(h_col: CoinVector, v_col: CoinVector) -> CoinOperator {
    CoinOperator::new([[h_col.h, v_col.h], [h_col.v, v_col.v]])
}

/// `K_x`; the zero matrix when `x` is unreachable.
pub fn kraus_at(schedule: &WalkSchedule, x: i64) -> CoinOperator {
    let [from_h, from_v] = basis_outputs(schedule);
    kraus_from_columns(from_h.get(x), from_v.get(x))
}

/// Every nonzero Kraus operator of `schedule`.
pub fn kraus_operators(schedule: &WalkSchedule) -> BTreeMap<i64, CoinOperator> {
    let [from_h, from_v] = basis_outputs(schedule);
    from_h
        .support()
        .chain(from_v.support())
        .map(|x| (x, kraus_from_columns(from_h.get(x), from_v.get(x))))
        .collect()
}

/// `E_x = K_x†K_x` over every reachable site.
pub fn povm_elements(schedule: &WalkSchedule) -> Result<PovmSet> {
    let elements = kraus_operators(schedule)
        .into_iter()
        .map(|(x, k)| (x, k.adjoint() * k))
        .collect();
    let set = PovmSet::new(elements, schedule.digest());
    let residual = set.completeness_residual();
    if residual > COMPLETENESS_FAULT {
        return Err(Error::Incomplete(residual));
    }
    Ok(set)
}

/// Result of [`verify_sic`]. Positions index `rank1`, `traces` and the rows
/// and columns of `pairwise`, which holds `Tr(E_x E_y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SicReport {
    pub is_sic: bool,
    pub positions: Vec<i64>,
    pub rank1: Vec<bool>,
    pub traces: Vec<f64>,
    pub pairwise: Vec<Vec<f64>>,
    pub completeness_residual: f64,
}

/// Tests for four rank-1 elements of trace ½ with `Tr(Π_iΠ_j) = 1/3`, `Π = 2E`.
pub fn verify_sic(povm: &PovmSet, tol: f64) -> SicReport {
    let positions: Vec<i64> = povm.elements.keys().copied().collect();
    let elems: Vec<CoinOperator> = povm.elements.values().copied().collect();
    let traces: Vec<f64> = elems.iter().map(|e| e.trace().re).collect();
    let rank1: Vec<bool> = elems
        .iter()
        .zip(&traces)
        .map(|(e, t)| e.hermitian_eigenvalues()[0].abs() < tol * t.abs().max(f64::MIN_POSITIVE))
        .collect();
    let pairwise: Vec<Vec<f64>> = elems
        .iter()
        .map(|a| elems.iter().map(|b| (*a * *b).trace().re).collect())
        .collect();
    let completeness_residual = povm.completeness_residual();

    let overlaps_ok = pairwise.iter().enumerate().all(|(i, row)| {
        row.iter()
            .enumerate()
            .all(|(j, &t)| i == j || (4.0 * t - 1.0 / 3.0).abs() <= tol)
    });
    let is_sic = elems.len() == 4
        && rank1.iter().all(|&r| r)
        && traces.iter().all(|t| (t - 0.5).abs() <= tol)
        && overlaps_ok
        && completeness_residual <= tol;
    SicReport {
        is_sic,
        positions,
        rank1,
        traces,
        pairwise,
        completeness_residual,
    }
}

/// Assigns each position a distinct target index (1-based) maximizing
/// `Σ ⟨t|E_x|t⟩`; errors when the best assignment is not unique.
pub fn match_tetrahedron(povm: &PovmSet, targets: &[CoinVector]) -> Result<BTreeMap<i64, usize>> {
    let positions: Vec<i64> = povm.elements.keys().copied().collect();
    if positions.len() > targets.len() {
        return Err(Error::TooManyElements {
            elements: positions.len(),
            targets: targets.len(),
        });
    }
    let score: Vec<Vec<f64>> = povm
        .elements
        .values()
        .map(|e| {
            targets
                .iter()
                .map(|t| crate::coin::inner(t, &e.apply(t)).re)
                .collect()
        })
        .collect();

    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut runner_up = f64::NEG_INFINITY;
    let mut used = vec![false; targets.len()];
    let mut current = Vec::with_capacity(positions.len());
    search(
        &score,
        &mut used,
        &mut current,
        0.0,
        &mut best,
        &mut runner_up,
    );

    let (best_score, assignment) = best.expect("at least one assignment exists");
    if best_score - runner_up < MATCH_AMBIGUITY {
        return Err(Error::AmbiguousMatch {
            best: best_score,
            runner_up,
        });
    }
    Ok(positions
        .into_iter()
        .zip(assignment.into_iter().map(|t| t + 1))
        .collect())
}

fn search(
    score: &[Vec<f64>],
    used: &mut [bool],
    current: &mut Vec<usize>,
    acc: f64,
    best: &mut Option<(f64, Vec<usize>)>,
    runner_up: &mut f64,
) {
    let row = current.len();
    if row == score.len() {
        match best {
            Some((b, _)) if acc <= *b => *runner_up = runner_up.max(acc),
            _ => {
                if let Some((b, _)) = best.take() {
                    *runner_up = runner_up.max(b);
                }
                *best = Some((acc, current.clone()));
            }
        }
        return;
    }
    for t in 0..used.len() {
        if used[t] {
            continue;
        }
        used[t] = true;
        current.push(t);
        search(score, used, current, acc + score[row][t], best, runner_up);
        current.pop();
        used[t] = false;
    }
}
