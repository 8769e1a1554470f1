//! Embedded reference data for the three-step SIC walk: the site-dependent
//! coins, the wave-plate settings realizing them, the ideal final states and
//! the measured distributions.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::coin::{c, CoinOperator, CoinVector, C64};
use crate::state::WalkerState;
use crate::walk::{SubStep, WalkSchedule};
use crate::waveplate::{PlateSequence, PlateSetting, TableEntry};

fn e(phase: f64) -> C64 {
    C64::from_polar(1.0, phase)
}

/// Step 1, second layer, site +1: `(1/√2)[[1, −1], [−1, −1]]`.
pub fn coin_step1_site1() -> CoinOperator {
    CoinOperator::from_real([[1.0, -1.0], [-1.0, -1.0]]).scale_re(1.0 / 2f64.sqrt())
}

/// Step 2, first layer, site 0: `(1/√2)[[−1, 1], [1, 1]]`.
pub fn coin_step2_site0() -> CoinOperator {
    CoinOperator::from_real([[-1.0, 1.0], [1.0, 1.0]]).scale_re(1.0 / 2f64.sqrt())
}

/// Step 2, second layer, site +1: `(1/√3)[[√2, 1], [1, −√2]]`.
pub fn coin_step2_site1() -> CoinOperator {
    let r2 = 2f64.sqrt();
    CoinOperator::from_real([[r2, 1.0], [1.0, -r2]]).scale_re(1.0 / 3f64.sqrt())
}

/// Step 3, first layer, site 0: `(1/√2)[[e^{−iπ/3}, e^{iπ/6}], [e^{iπ/3}, e^{−iπ/6}]]`.
pub fn coin_step3_site0() -> CoinOperator {
    CoinOperator::new([[e(-PI / 3.0), e(PI / 6.0)], [e(PI / 3.0), e(-PI / 6.0)]])
        .scale_re(1.0 / 2f64.sqrt())
}

/// Named coins accepted in schedule files.
pub fn coin_alias(name: &str) -> Option<CoinOperator> {
    match name {
        "I" => Some(CoinOperator::identity()),
        "X" => Some(CoinOperator::sigma_x()),
        "C1_2" | "H1_2" => Some(coin_step1_site1()),
        "C2_1" | "H2_1" => Some(coin_step2_site0()),
        "C2_2" | "H2_2" => Some(coin_step2_site1()),
        "C3_1" | "Q3_1" => Some(coin_step3_site0()),
        _ => None,
    }
}

fn layer(coins: &[(i64, CoinOperator)], plates: &[(i64, &[PlateSetting])]) -> SubStep {
    let plates: BTreeMap<i64, PlateSequence> = plates
        .iter()
        .map(|(x, p)| (*x, PlateSequence::new(p.to_vec())))
        .collect();
    SubStep::from_pairs(coins.iter().copied())
        .and_then(|s| s.with_plates(plates))
        .expect("reference coins are unitary")
}

/// The three-step, two-layer schedule starting at the origin, with the
/// printed plate settings attached as provenance.
///
/// Identity coins (step 1 at site 0, step 3 at site +1) are left implicit.
pub fn schedule() -> WalkSchedule {
    let sx = CoinOperator::sigma_x();
    let hwp = PlateSetting::hwp;
    let qwp = PlateSetting::qwp;
    let steps = vec![
        vec![
            layer(&[], &[]),
            layer(
                &[(1, coin_step1_site1()), (-1, sx)],
                &[(1, &[hwp(-22.5)]), (-1, &[hwp(45.0)])],
            ),
        ],
        vec![
            layer(&[(0, coin_step2_site0())], &[(0, &[hwp(67.5)])]),
            layer(
                &[(1, coin_step2_site1()), (-1, sx)],
                &[(1, &[hwp(17.63)]), (-1, &[hwp(45.0)])],
            ),
        ],
        vec![
            layer(&[(0, coin_step3_site0())], &[(0, &[hwp(52.5), qwp(45.0)])]),
            layer(&[(-1, sx)], &[(-1, &[hwp(45.0)])]),
        ],
    ];
    WalkSchedule::new(0, steps).expect("reference schedule is non-empty")
}

/// The printed plate table, one entry per non-empty cell. Multi-plate cells
/// list plates in column order (HWP before QWP).
pub fn plate_table() -> Vec<TableEntry> {
    let entry = |step, site, plates: Vec<PlateSetting>| TableEntry {
        step,
        substep: None,
        site,
        plates: PlateSequence::new(plates),
    };
    let hwp = PlateSetting::hwp;
    vec![
        entry(1, 1, vec![hwp(-22.5)]),
        entry(1, -1, vec![hwp(45.0)]),
        entry(2, 0, vec![hwp(67.5)]),
        entry(2, 1, vec![hwp(17.63)]),
        entry(2, -1, vec![hwp(45.0)]),
        entry(3, 0, vec![hwp(52.5), PlateSetting::qwp(45.0)]),
        entry(3, -1, vec![hwp(45.0)]),
    ]
}

/// Printed preparation settings taking `|H⟩` to ψ₁..ψ₄.
pub fn preparation_settings() -> [PlateSetting; 4] {
    [
        PlateSetting::hwp(45.0),
        PlateSetting::hwp(-17.63),
        PlateSetting::qwp(-152.63),
        PlateSetting::qwp(117.37),
    ]
}

/// Site the walk started from ψᵢ never reaches, for i = 1..4.
pub const FORBIDDEN_SITES: [i64; 4] = [6, 4, 0, 2];

/// Outcome positions of the walk, in table column order.
pub const OUTCOME_SITES: [i64; 4] = [0, 2, 4, 6];

/// Ideal final states after three steps, as printed (global phase included).
pub fn final_state(i: usize) -> Option<WalkerState> {
    let r = 1.0 / 3f64.sqrt();
    let h = |a: C64| CoinVector::new(a * r, c(0.0, 0.0));
    let one = c(1.0, 0.0);
    let entries: Vec<(i64, CoinVector)> = match i {
        1 => vec![(4, h(-one)), (2, h(c(0.0, -1.0))), (0, h(c(0.0, 1.0)))],
        2 => vec![(6, h(one)), (2, h(-e(-PI / 3.0))), (0, h(-e(PI / 3.0)))],
        3 => vec![(6, h(one)), (4, h(-e(-PI / 6.0))), (2, h(-one))],
        4 => vec![(6, h(one)), (4, h(-e(PI / 6.0))), (0, h(-one))],
        _ => return None,
    };
    Some(WalkerState::from_entries(entries))
}

/// One measured row: `P(0), P(2), P(4), P(6)`, the reported distance, and
/// the parenthesized uncertainties of each.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasuredRow {
    pub probabilities: [f64; 4],
    pub probability_sigma: [f64; 4],
    pub distance: f64,
    pub distance_sigma: f64,
}

impl MeasuredRow {
    pub fn distribution(&self) -> BTreeMap<i64, f64> {
        OUTCOME_SITES.into_iter().zip(self.probabilities).collect()
    }
}

/// Measured distributions for ψ₁..ψ₄.
pub fn measured_rows() -> [MeasuredRow; 4] {
    [
        MeasuredRow {
            probabilities: [0.3246, 0.3277, 0.3327, 0.0149],
            probability_sigma: [0.0037, 0.0038, 0.0038, 0.0007],
            distance: 0.0149,
            distance_sigma: 0.0033,
        },
        MeasuredRow {
            probabilities: [0.3398, 0.3135, 0.0345, 0.3123],
            probability_sigma: [0.0038, 0.0036, 0.0011, 0.0036],
            distance: 0.0401,
            distance_sigma: 0.0032,
        },
        MeasuredRow {
            probabilities: [0.0335, 0.3137, 0.3432, 0.3104],
            probability_sigma: [0.0010, 0.0036, 0.0038, 0.0036],
            distance: 0.0425,
            distance_sigma: 0.0032,
        },
        MeasuredRow {
            probabilities: [0.3158, 0.0329, 0.3419, 0.3094],
            probability_sigma: [0.0036, 0.0010, 0.0038, 0.0035],
            distance: 0.0415,
            distance_sigma: 0.0032,
        },
    ]
}

/// Approximate total coincidence count per run.
pub const TOTAL_COUNTS: u64 = 32_000;

/// Average interference visibility of the beam-displacer pairs.
pub const VISIBILITY: f64 = 0.992;

/// Bundle of every fixture the acceptance checks consume, so a run can be
/// pointed at altered data.
#[derive(Clone, Debug, PartialEq)]
pub struct Fixtures {
    pub schedule: WalkSchedule,
    pub plate_table: Vec<TableEntry>,
    pub preparations: [PlateSetting; 4],
    pub final_states: [WalkerState; 4],
    pub measured: [MeasuredRow; 4],
}

impl Default for Fixtures {
    fn default() -> Self {
        Self {
            schedule: schedule(),
            plate_table: plate_table(),
            preparations: preparation_settings(),
            final_states: [1, 2, 3, 4].map(|i| final_state(i).expect("index in range")),
            measured: measured_rows(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_coins_are_unitary() {
        for m in [
            coin_step1_site1(),
            coin_step2_site0(),
            coin_step2_site1(),
            coin_step3_site0(),
        ] {
            assert!(m.unitarity_residual() < 1e-15);
        }
        // direct M†M evaluation of the step-3 coin
        let m = coin_step3_site0();
        let report = m.checks(1e-12).unwrap();
        assert!(report.unitary);
        assert!(!report.hermitian);
    }

    #[test]
    fn aliases() {
        assert_eq!(coin_alias("X"), Some(CoinOperator::sigma_x()));
        assert_eq!(coin_alias("H1_2"), Some(coin_step1_site1()));
        assert!(coin_alias("nope").is_none());
    }

    #[test]
    fn final_states_are_normalized() {
        for i in 1..=4 {
            let s = final_state(i).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
            assert_eq!(s.get(FORBIDDEN_SITES[i - 1]), CoinVector::zero());
        }
        assert!(final_state(5).is_none());
    }

    #[test]
    fn measured_rows_are_normalized_to_print_precision() {
        for row in measured_rows() {
            let s: f64 = row.probabilities.iter().sum();
            assert!((s - 1.0).abs() < 1e-3, "{s}");
        }
    }
}
