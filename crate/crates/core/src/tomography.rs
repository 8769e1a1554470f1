//! Qubit state reconstruction from SIC outcome statistics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::coin::{sic_vector, CoinOperator};
use crate::error::{Error, Result};
use crate::experiment::{CountRecord, Distribution1D};
use crate::povm::{PovmSet, COMPLETENESS_FAULT};

/// MLE convergence threshold on the Frobenius change between iterates.
pub const MLE_TOL: f64 = 1e-10;
pub const MLE_MAX_ITER: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Linear,
    Mle,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: usize,
    pub converged: bool,
    /// Multinomial log-likelihood `Σ n_x ln p_x` of the estimate (MLE only).
    pub log_likelihood: Option<f64>,
    /// Final Frobenius step for MLE; normalization residual of the input for linear inversion.
    pub residual: f64,
    /// Log-likelihood after each accepted iteration, starting from the initial guess.
    #[serde(skip)]
    pub log_likelihood_history: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub rho: CoinOperator,
    pub method: Method,
    pub eigenvalues: [f64; 2],
    pub diagnostics: Diagnostics,
}

impl Reconstruction {
    fn new(rho: CoinOperator, method: Method, diagnostics: Diagnostics) -> Self {
        Self {
            rho,
            method,
            eigenvalues: rho.hermitian_eigenvalues(),
            diagnostics,
        }
    }

    pub fn is_physical(&self, tol: f64) -> bool {
        self.eigenvalues[0] >= -tol
    }
}

fn check_complete(povm: &PovmSet) -> Result<()> {
    let r = povm.completeness_residual();
    if r > COMPLETENESS_FAULT {
        return Err(Error::Incomplete(r));
    }
    Ok(())
}

/// Born-rule outcome probabilities `p_x = Tr(E_x ρ)`.
pub fn forward_probs(rho: &CoinOperator, povm: &PovmSet) -> Result<Distribution1D> {
    check_complete(povm)?;
    Ok(povm
        .elements
        .iter()
        .map(|(&x, e)| (x, (*e * *rho).trace().re))
        .collect())
}

/// Re-keys position probabilities by tetrahedron index using `assignment`.
pub fn by_sic_index(
    probs: &Distribution1D,
    assignment: &BTreeMap<i64, usize>,
) -> Result<BTreeMap<usize, f64>> {
    assignment
        .iter()
        .map(|(x, &i)| {
            probs
                .get(x)
                .map(|&p| (i, p))
                .ok_or_else(|| Error::InvalidDistribution(format!("no probability at site {x}")))
        })
        .collect()
}

/// `ρ = Σ_i (3p_i − ½)|ξ_i⟩⟨ξ_i|` for the tetrahedron SIC; `probs` keyed 1..=4.
///
/// Noisy inputs may give a non-positive estimate; it is returned as-is with
/// its eigenvalues.
pub fn linear_inversion(probs: &BTreeMap<usize, f64>) -> Result<Reconstruction> {
    if let Some(&i) = probs.keys().find(|&&i| !(1..=4).contains(&i)) {
        return Err(Error::IndexOutOfRange(i));
    }
    if probs.len() != 4 {
        return Err(Error::InvalidDistribution(format!(
            "need four SIC outcomes, got {}",
            probs.len()
        )));
    }
    let s: f64 = probs.values().sum();
    if !s.is_finite() || (s - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidDistribution(format!("sums to {s}")));
    }
    let mut rho = CoinOperator::zero();
    for (&i, &p) in probs {
        rho = rho + sic_vector(i)?.projector().scale_re(3.0 * p - 0.5);
    }
    let diagnostics = Diagnostics {
        converged: true,
        residual: (s - 1.0).abs(),
        ..Diagnostics::default()
    };
    Ok(Reconstruction::new(rho, Method::Linear, diagnostics))
}

fn log_likelihood(rho: &CoinOperator, data: &[(f64, CoinOperator)]) -> f64 {
    data.iter()
        .map(|(n, e)| n * (*e * *rho).trace().re.ln())
        .sum()
}

/// `R = Σ_x (f_x / p_x) E_x` over observed outcomes.
fn r_operator(rho: &CoinOperator, data: &[(f64, CoinOperator)], total: f64) -> CoinOperator {
    data.iter()
        .map(|(n, e)| {
            let p = (*e * *rho).trace().re;
            e.scale_re(n / total / p)
        })
        .sum()
}

fn sandwich(m: &CoinOperator, rho: &CoinOperator) -> CoinOperator {
    let out = *m * *rho * m.adjoint();
    let hermitian = (out + out.adjoint()).scale_re(0.5);
    hermitian.scale_re(1.0 / hermitian.trace().re)
}

/// Iterative `RρR` maximum-likelihood estimate starting from `I/2`.
///
/// Each iteration first tries the plain `RρR` update; if that lowers the
/// likelihood, the diluted update `(I + εR)ρ(I + εR)` is tried with ε halved
/// until the likelihood does not decrease. Stops when successive iterates
/// differ by less than `tol` (Frobenius) or after `max_iter` iterations, in
/// which case `diagnostics.converged` is false.
pub fn mle_reconstruct(
    counts: &CountRecord,
    povm: &PovmSet,
    tol: f64,
    max_iter: usize,
) -> Result<Reconstruction> {
    check_complete(povm)?;
    if counts.total == 0 || counts.counts.values().all(|&k| k == 0) {
        return Err(Error::EmptyRecord);
    }
    if let Some(x) = counts
        .counts
        .iter()
        .find(|(x, &k)| k > 0 && !povm.elements.contains_key(x))
        .map(|(x, _)| x)
    {
        return Err(Error::InvalidDistribution(format!(
            "counts at site {x} have no POVM element"
        )));
    }
    let data: Vec<(f64, CoinOperator)> = counts
        .counts
        .iter()
        .filter(|(_, &k)| k > 0)
        .map(|(x, &k)| (k as f64, povm.elements[x]))
        .collect();
    let total: f64 = data.iter().map(|(n, _)| n).sum();

    let identity = CoinOperator::identity();
    let mut rho = identity.scale_re(0.5);
    let mut ll = log_likelihood(&rho, &data);
    let mut history = vec![ll];
    let mut converged = false;
    let mut iterations = 0;
    let mut residual = f64::INFINITY;

    while iterations < max_iter {
        iterations += 1;
        let r = r_operator(&rho, &data, total);
        let mut next = None;
        let mut candidate = sandwich(&r, &rho);
        let mut cand_ll = log_likelihood(&candidate, &data);
        if cand_ll >= ll {
            next = Some((candidate, cand_ll));
        } else {
            let mut eps = 1.0;
            while eps > 1e-12 {
                candidate = sandwich(&(identity + r.scale_re(eps)), &rho);
                cand_ll = log_likelihood(&candidate, &data);
                if cand_ll >= ll {
                    next = Some((candidate, cand_ll));
                    break;
                }
                eps *= 0.5;
            }
        }
        let Some((new_rho, new_ll)) = next else {
            // no ascent direction left at working precision
            converged = true;
            residual = 0.0;
            break;
        };
        residual = (new_rho - rho).frobenius_norm();
        rho = new_rho;
        ll = new_ll;
        history.push(ll);
        if residual < tol {
            converged = true;
            break;
        }
    }

    let diagnostics = Diagnostics {
        iterations,
        converged,
        log_likelihood: Some(ll),
        residual,
        log_likelihood_history: history,
    };
    Ok(Reconstruction::new(rho, Method::Mle, diagnostics))
}
