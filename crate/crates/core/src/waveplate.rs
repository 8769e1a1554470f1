//! Jones matrices of half- and quarter-wave plates, and solvers that turn
//! coin operations or state preparations into plate angles.
//!
//! Angles are in degrees, measured from the horizontal to the optic axis.
//! Wave plates cannot imprint a global phase, so every match below is taken
//! projectively: `U ≃ V` when `min_φ ‖U − e^{iφ}V‖_F` is small.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::coin::{
    c, inner, phase_invariant_distance, CoinOperator, CoinVector, C64, PHYSICAL_TOL,
};
use crate::error::{Error, Result};
use crate::walk::WalkSchedule;

/// Frobenius budget for matching a printed (0.01°-rounded) setting to its coin.
pub const TABLE_TOL: f64 = 2e-3;

/// Required overlap modulus of a solved preparation.
pub const PREPARATION_TOL: f64 = 1e-9;

/// Phase-invariant Frobenius budget of a compiled coin.
pub const COMPILE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PlateKind {
    #[serde(rename = "HWP")]
    Hwp,
    #[serde(rename = "QWP")]
    Qwp,
}

impl fmt::Display for PlateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlateKind::Hwp => "HWP",
            PlateKind::Qwp => "QWP",
        })
    }
}

impl std::str::FromStr for PlateKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "HWP" => Ok(PlateKind::Hwp),
            "QWP" => Ok(PlateKind::Qwp),
            other => Err(Error::Table(format!("unknown plate kind {other:?}"))),
        }
    }
}

/// Maps any angle into `[−180°, 180°)`.
pub fn normalize_deg(angle: f64) -> f64 {
    (angle + 180.0).rem_euclid(360.0) - 180.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlateSetting {
    pub kind: PlateKind,
    pub angle: f64,
}

impl PlateSetting {
    pub fn new(kind: PlateKind, angle: f64) -> Self {
        Self {
            kind,
            angle: normalize_deg(angle),
        }
    }

    pub fn hwp(angle: f64) -> Self {
        Self::new(PlateKind::Hwp, angle)
    }

    pub fn qwp(angle: f64) -> Self {
        Self::new(PlateKind::Qwp, angle)
    }

    pub fn matrix(&self) -> CoinOperator {
        match self.kind {
            PlateKind::Hwp => hwp(self.angle),
            PlateKind::Qwp => qwp(self.angle),
        }
    }
}

/// Plates in the order light traverses them.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlateSequence(pub Vec<PlateSetting>);

impl PlateSequence {
    pub fn new(plates: Vec<PlateSetting>) -> Self {
        Self(plates)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &PlateSetting> {
        self.0.iter()
    }

    pub fn reversed(&self) -> Self {
        Self(self.0.iter().rev().copied().collect())
    }

    /// Rounds every angle to a multiple of `step` degrees, e.g. 0.01 for printed tables.
    pub fn rounded(&self, step: f64) -> Self {
        Self(
            self.0
                .iter()
                .map(|p| PlateSetting::new(p.kind, (p.angle / step).round() * step))
                .collect(),
        )
    }

    /// Adds `offsets[i]` degrees to the i-th plate.
    pub fn perturbed(&self, offsets: &[f64]) -> Self {
        Self(
            self.0
                .iter()
                .zip(offsets)
                .map(|(p, d)| PlateSetting::new(p.kind, p.angle + d))
                .collect(),
        )
    }
}

/// Half-wave plate with optic axis at `theta` degrees.
pub fn hwp(theta: f64) -> CoinOperator {
    let (s, co) = (2.0 * theta.to_radians()).sin_cos();
    CoinOperator::from_real([[co, s], [s, -co]])
}

/// Quarter-wave plate with optic axis at `theta` degrees.
pub fn qwp(theta: f64) -> CoinOperator {
    let (s, co) = theta.to_radians().sin_cos();
    let off = c(1.0, -1.0) * (s * co);
    CoinOperator::new([[c(co * co, s * s), off], [off, c(s * s, co * co)]])
}

/// Product of the plate matrices, last plate leftmost.
pub fn apply_sequence(seq: &PlateSequence) -> CoinOperator {
    seq.iter()
        .fold(CoinOperator::identity(), |acc, p| p.matrix() * acc)
}

/// Stokes parameters `(S1, S2, S3)` of a unit vector.
fn stokes(t: &CoinVector) -> (f64, f64, f64) {
    let hv = t.h.conj() * t.v;
    (t.h.norm_sqr() - t.v.norm_sqr(), 2.0 * hv.re, 2.0 * hv.im)
}

fn overlap(seq: &PlateSequence, source: &CoinVector, target: &CoinVector) -> f64 {
    inner(target, &apply_sequence(seq).apply(source)).norm()
}

/// Plates (at most two) taking `|H⟩` to `target` up to a global phase.
pub fn solve_preparation(target: &CoinVector) -> Result<PlateSequence> {
    solve_preparation_from(&CoinVector::horizontal(), target)
}

/// Like [`solve_preparation`] for a linearly polarized `source`.
///
/// For a source `R(α)|H⟩`, `R(α)·P(θ)·R(−α) = P(θ + α)` for both plate
/// kinds, so the problem is solved from `|H⟩` against `R(−α)·target` and
/// every optic axis is then advanced by `α`. Elliptical sources are rejected.
pub fn solve_preparation_from(source: &CoinVector, target: &CoinVector) -> Result<PlateSequence> {
    for v in [source, target] {
        let n = v.norm_sqr();
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized(n));
        }
    }
    let (s1, s2, s3) = stokes(source);
    if s3.abs() > 1e-12 {
        return Err(Error::Solver(
            "source must be linearly polarized for a two-plate preparation".into(),
        ));
    }
    // source = R(α)|H⟩ up to phase, with α the linear polarization angle.
    let alpha = 0.5 * s2.atan2(s1);
    let rot = rotation(-alpha);
    let local = rot.apply(target);
    let seq = solve_from_horizontal(&local)?;
    let shifted = PlateSequence(
        seq.iter()
            .map(|p| PlateSetting::new(p.kind, p.angle + alpha.to_degrees()))
            .collect(),
    );
    let ov = overlap(&shifted, source, target);
    if ov < 1.0 - PREPARATION_TOL {
        return Err(Error::Solver(format!("overlap {ov} below tolerance")));
    }
    Ok(shifted)
}

/// Real rotation `[[cos, −sin], [sin, cos]]` by `angle` radians.
fn rotation(angle: f64) -> CoinOperator {
    let (s, co) = angle.sin_cos();
    CoinOperator::from_real([[co, -s], [s, co]])
}

fn solve_from_horizontal(target: &CoinVector) -> Result<PlateSequence> {
    let h = CoinVector::horizontal();
    let (s1, s2, s3) = stokes(target);
    let accept =
        |seq: PlateSequence| (overlap(&seq, &h, target) >= 1.0 - PREPARATION_TOL).then_some(seq);

    // Linear target: a single HWP at half the polarization angle.
    let linear = PlateSequence(vec![PlateSetting::hwp(0.25 * s2.atan2(s1).to_degrees())]);
    if s3.abs() < 1e-12 {
        if let Some(seq) = accept(linear) {
            return Ok(seq);
        }
    }

    // Target written as R(ψ)(cos χ, i sin χ): orientation ψ, ellipticity χ.
    let psi = 0.5 * s2.atan2(s1).to_degrees();
    let chi = 0.5 * s3.clamp(-1.0, 1.0).asin().to_degrees();
    for q in [psi, psi + 90.0] {
        if let Some(seq) = accept(PlateSequence(vec![PlateSetting::qwp(q)])) {
            return Ok(seq);
        }
    }

    // HWP makes linear light at ψ+χ, the QWP at ψ adds the ellipticity.
    let seq = PlateSequence(vec![
        PlateSetting::hwp(0.5 * (psi + chi)),
        PlateSetting::qwp(psi),
    ]);
    accept(seq).ok_or_else(|| Error::Solver("two-plate preparation failed".into()))
}

/// Plates realizing `u` up to a global phase.
///
/// The identity compiles to no plates, real reflections (det −1 after
/// removing the phase) to one HWP, and everything else to QWP·HWP·QWP.
pub fn compile_coin(u: &CoinOperator) -> Result<PlateSequence> {
    if !u.is_finite() {
        return Err(Error::NonFinite);
    }
    let residual = u.unitarity_residual();
    if residual > PHYSICAL_TOL {
        return Err(Error::NonUnitary(residual));
    }
    if phase_invariant_distance(u, &CoinOperator::identity()) < 1e-12 {
        return Ok(PlateSequence::empty());
    }
    if let Some(theta) = reflection_angle(u) {
        return Ok(PlateSequence(vec![PlateSetting::hwp(theta)]));
    }
    let seq = quarter_half_quarter(u);
    let d = phase_invariant_distance(&apply_sequence(&seq), u);
    if d >= COMPILE_TOL {
        return Err(Error::Solver(format!("QWP-HWP-QWP residual {d:.3e}")));
    }
    Ok(seq)
}

/// Angle of the HWP equal to `u` up to phase, if any.
fn reflection_angle(u: &CoinOperator) -> Option<f64> {
    let phase = (-u.det()).sqrt();
    let m = u.scale(phase.conj());
    if m.entries().any(|z| z.im.abs() > 1e-12) {
        return None;
    }
    let r = |i: usize, j: usize| m.entry(i, j).re;
    if (r(0, 1) - r(1, 0)).abs() > 1e-12 || (r(0, 0) + r(1, 1)).abs() > 1e-12 {
        return None;
    }
    Some(0.5 * r(0, 1).atan2(r(0, 0)).to_degrees())
}

/// Closed-form QWP(c)·HWP(b)·QWP(a) decomposition.
///
/// Up to phase, `HWP(θ) ≃ −i u(θ)` and `QWP(θ) ≃ (I − i u(θ))/√2` with
/// `u(θ) = sin 2θ σx + cos 2θ σz`. Writing the target as
/// `w I − i(x σx + y σy + z σz)` and `A, B, C` for the doubled angles of the
/// last, middle and first plate, the product satisfies
/// `w + i y = e^{iΣ} cos Δ` and `x + i z = sin Δ e^{−iΦ}` where
/// `Σ = (A − C)/2`, `Δ = (A + C)/2 − B` and `Φ = B + Δ`.
fn quarter_half_quarter(u: &CoinOperator) -> PlateSequence {
    let det = u.det();
    let su = u.scale(det.sqrt().inv());
    let w = su.entry(0, 0).re;
    let z = -su.entry(0, 0).im;
    let y = su.entry(1, 0).re;
    let x = -su.entry(1, 0).im;
    let wy = C64::new(w, y);
    let xz = C64::new(x, z);
    let delta = xz.norm().atan2(wy.norm());
    let sigma = if wy.norm() > 1e-14 { wy.arg() } else { 0.0 };
    let phi = if xz.norm() > 1e-14 { -xz.arg() } else { 0.0 };
    let b2 = phi - delta;
    let alpha = sigma + delta;
    let beta = sigma - delta;
    let a2 = b2 + alpha;
    let c2 = b2 - beta;
    PlateSequence(vec![
        PlateSetting::qwp(0.5 * c2.to_degrees()),
        PlateSetting::hwp(0.5 * b2.to_degrees()),
        PlateSetting::qwp(0.5 * a2.to_degrees()),
    ])
}

/// One row of a Table-I-style listing: the plates placed in mode `site` during `step` (1-based).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub step: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub substep: Option<usize>,
    pub site: i64,
    pub plates: PlateSequence,
}

/// Which traversal order of a multi-plate entry matched best.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraversalOrder {
    AsListed,
    Reversed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryCheck {
    pub step: usize,
    pub substep: usize,
    pub site: i64,
    pub distance_as_listed: f64,
    pub distance_reversed: f64,
    pub best_order: TraversalOrder,
    pub distance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub entries: Vec<EntryCheck>,
    /// Non-identity coins `(step, substep, site)` with no table entry.
    pub missing: Vec<(usize, usize, i64)>,
    pub pass: bool,
}

/// Compares every table entry against the schedule coin it claims to realize.
pub fn verify_table(schedule: &WalkSchedule, table: &[TableEntry]) -> Result<TableReport> {
    let mut entries = Vec::with_capacity(table.len());
    let mut covered = BTreeSet::new();
    for e in table {
        let step = e
            .step
            .checked_sub(1)
            .and_then(|i| schedule.steps().get(i))
            .ok_or_else(|| Error::Table(format!("step {} not in schedule", e.step)))?;
        let substep = match e.substep {
            Some(k) => {
                if k == 0 || k > step.len() || !step[k - 1].coins().contains_key(&e.site) {
                    return Err(Error::Table(format!(
                        "step {} sub-step {k} has no coin at site {}",
                        e.step, e.site
                    )));
                }
                k
            }
            None => {
                let hits: Vec<usize> = step
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| s.coins().contains_key(&e.site))
                    .map(|(k, _)| k + 1)
                    .collect();
                match hits.as_slice() {
                    [k] => *k,
                    [] => {
                        return Err(Error::Table(format!(
                            "step {} has no coin at site {}",
                            e.step, e.site
                        )))
                    }
                    _ => {
                        return Err(Error::Table(format!(
                            "site {} appears in several sub-steps of step {}",
                            e.site, e.step
                        )))
                    }
                }
            }
        };
        let coin = step[substep - 1].coin_at(e.site);
        let d_listed = phase_invariant_distance(&apply_sequence(&e.plates), &coin);
        let d_rev = phase_invariant_distance(&apply_sequence(&e.plates.reversed()), &coin);
        let (best_order, distance) = if d_rev < d_listed {
            (TraversalOrder::Reversed, d_rev)
        } else {
            (TraversalOrder::AsListed, d_listed)
        };
        covered.insert((e.step, substep, e.site));
        entries.push(EntryCheck {
            step: e.step,
            substep,
            site: e.site,
            distance_as_listed: d_listed,
            distance_reversed: d_rev,
            best_order,
            distance,
            pass: distance < TABLE_TOL,
        });
    }
    let identity = CoinOperator::identity();
    let mut missing = Vec::new();
    for (i, step) in schedule.steps().iter().enumerate() {
        for (k, sub) in step.iter().enumerate() {
            for (&site, m) in sub.coins() {
                let key = (i + 1, k + 1, site);
                if !covered.contains(&key) && phase_invariant_distance(m, &identity) >= TABLE_TOL {
                    missing.push(key);
                }
            }
        }
    }
    let pass = missing.is_empty() && entries.iter().all(|e| e.pass);
    Ok(TableReport {
        entries,
        missing,
        pass,
    })
}

/// Compiles every listed coin of `schedule` into a table.
pub fn compile_schedule(schedule: &WalkSchedule) -> Result<Vec<TableEntry>> {
    let mut out = Vec::new();
    for (i, step) in schedule.steps().iter().enumerate() {
        for (k, sub) in step.iter().enumerate() {
            for (&site, m) in sub.coins() {
                out.push(TableEntry {
                    step: i + 1,
                    substep: Some(k + 1),
                    site,
                    plates: compile_coin(m)?,
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coin::initial_state;
    use crate::reference;

    fn close_op(a: &CoinOperator, b: &CoinOperator, tol: f64) -> bool {
        a.max_abs_diff(b) < tol
    }

    #[test]
    fn hwp_examples() {
        assert!(close_op(&hwp(45.0), &CoinOperator::sigma_x(), 1e-15));
        assert!(close_op(
            &hwp(0.0),
            &CoinOperator::from_real([[1.0, 0.0], [0.0, -1.0]]),
            1e-15
        ));
        assert!(close_op(&hwp(-22.5), &reference::coin_step1_site1(), 1e-15));
        assert!((hwp(13.0).det() - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn qwp_examples() {
        let d = CoinOperator::new([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 1.0)]]);
        assert!(close_op(&qwp(0.0), &d, 1e-15));
        let d90 = CoinOperator::new([[c(0.0, 1.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]);
        assert!(close_op(&qwp(90.0), &d90, 1e-15));
        let q45 = CoinOperator::new([[c(1.0, 1.0), c(1.0, -1.0)], [c(1.0, -1.0), c(1.0, 1.0)]])
            .scale_re(0.5);
        assert!(close_op(&qwp(45.0), &q45, 1e-15));
    }

    #[test]
    fn sequence_examples() {
        let twice = PlateSequence(vec![PlateSetting::hwp(45.0), PlateSetting::hwp(45.0)]);
        assert!(close_op(
            &apply_sequence(&twice),
            &CoinOperator::identity(),
            1e-15
        ));
        assert_eq!(
            apply_sequence(&PlateSequence::empty()),
            CoinOperator::identity()
        );
        // order: the second plate multiplies from the left
        let seq = PlateSequence(vec![PlateSetting::hwp(10.0), PlateSetting::qwp(30.0)]);
        assert!(close_op(
            &apply_sequence(&seq),
            &(qwp(30.0) * hwp(10.0)),
            1e-15
        ));
    }

    #[test]
    fn angle_normalization() {
        assert_eq!(normalize_deg(180.0), -180.0);
        assert_eq!(normalize_deg(-152.63), -152.63);
        assert!((normalize_deg(207.37) + 152.63).abs() < 1e-9);
        assert_eq!(PlateSetting::qwp(540.0).angle, -180.0);
    }

    #[test]
    fn preparation_examples() {
        let p1 = solve_preparation(&initial_state(1).unwrap()).unwrap();
        assert_eq!(p1.len(), 1);
        assert_eq!(p1.0[0].kind, PlateKind::Hwp);
        assert!((p1.0[0].angle.abs() - 45.0).abs() < 1e-9);

        let p2 = solve_preparation(&initial_state(2).unwrap()).unwrap();
        assert_eq!(p2.0.len(), 1);
        assert_eq!(p2.0[0].kind, PlateKind::Hwp);
        assert!((p2.0[0].angle + 17.63).abs() < 0.01);
        assert!((p2.0[0].angle + 0.5 * (1.0 / 2f64.sqrt()).atan().to_degrees()).abs() < 1e-9);

        for (i, printed) in [(3, -152.63), (4, 117.37)] {
            let p = solve_preparation(&initial_state(i).unwrap()).unwrap();
            assert_eq!(p.0.len(), 1);
            assert_eq!(p.0[0].kind, PlateKind::Qwp);
            // a QWP is periodic in 180°
            let diff = (p.0[0].angle - printed).rem_euclid(180.0);
            assert!(diff.min(180.0 - diff) < 0.01, "psi{i}: {}", p.0[0].angle);
        }
    }

    #[test]
    fn preparation_from_linear_source() {
        let src = hwp(20.0).apply(&CoinVector::horizontal());
        let t = initial_state(3).unwrap();
        let seq = solve_preparation_from(&src, &t).unwrap();
        assert!(seq.len() <= 2);
        assert!(inner(&t, &apply_sequence(&seq).apply(&src)).norm() > 1.0 - 1e-9);

        let circ = qwp(45.0).apply(&CoinVector::horizontal());
        assert!(matches!(
            solve_preparation_from(&circ, &t),
            Err(Error::Solver(_))
        ));
    }

    #[test]
    fn compile_examples() {
        let sx = compile_coin(&CoinOperator::sigma_x()).unwrap();
        assert_eq!(sx.0, vec![PlateSetting::hwp(45.0)]);

        let c22 = compile_coin(&reference::coin_step2_site1()).unwrap();
        assert_eq!(c22.len(), 1);
        assert_eq!(c22.0[0].kind, PlateKind::Hwp);
        assert!((c22.0[0].angle - 17.63).abs() < 0.01);

        let c31 = reference::coin_step3_site0();
        let seq = compile_coin(&c31).unwrap();
        assert!((2..=3).contains(&seq.len()));
        assert!(phase_invariant_distance(&apply_sequence(&seq), &c31) < COMPILE_TOL);

        assert!(compile_coin(&CoinOperator::identity()).unwrap().is_empty());
        let bad = CoinOperator::from_real([[1.0, 0.5], [0.0, 1.0]]);
        assert!(matches!(compile_coin(&bad), Err(Error::NonUnitary(_))));
    }

    #[test]
    fn reference_table_verifies() {
        let report = verify_table(&reference::schedule(), &reference::plate_table()).unwrap();
        assert!(report.pass, "{report:#?}");
        assert!(report.missing.is_empty());
        assert_eq!(report.entries.len(), 7);
    }

    #[test]
    fn table_errors() {
        let sched = reference::schedule();
        let bogus = [TableEntry {
            step: 9,
            substep: None,
            site: 0,
            plates: PlateSequence::empty(),
        }];
        assert!(verify_table(&sched, &bogus).is_err());
        let partial = &reference::plate_table()[..2];
        let report = verify_table(&sched, partial).unwrap();
        assert!(!report.pass);
        assert!(!report.missing.is_empty());
    }

    #[test]
    fn rounding_to_table_precision() {
        let seq = PlateSequence(vec![PlateSetting::hwp(17.6322)]).rounded(0.01);
        assert!((seq.0[0].angle - 17.63).abs() < 1e-12);
    }
}
