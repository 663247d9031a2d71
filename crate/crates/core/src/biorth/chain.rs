//! Finite check of the perturbation estimate: if `‖w_n − (u_n, 0)‖ ≤ ε/2^n`,
//! `Σ|λ_n|^p ≤ 1` and `‖Σλ_n u_n − a‖_p ≤ ε`, then `Σλ_n w_n` lies within
//! `2ε` of `(a, 0)`.

use serde::{Deserialize, Serialize};

use crate::blocks::BlockSequence;
use crate::centralizer::TwistedVector;
use crate::error::{Error, Result};
use crate::seq::{lp_norm_slice, SeqVector};

use super::NORM_TOLERANCE;

const PRECONDITION_SLACK: f64 = 1e-12;
pub const CHAIN_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    /// `‖Σλ_n w_n − (a, 0)‖`.
    pub value: f64,
    /// `‖u − a‖_p` with `u = Σλ_n u_n`.
    pub approximation: f64,
    /// `Σ|λ_n| ε/2^n + ‖u − a‖_p`, the bound the triangle inequality would give.
    pub chain_bound: f64,
    /// `value ≤ chain_bound`. The quasi-norm is not subadditive, so this may
    /// fail by the log-lift of the second coordinates; it is reported only.
    pub chain_holds: bool,
    pub two_eps: f64,
    /// `‖u − a‖_p ≤ ε`, the hypothesis under which `2ε` is claimed.
    pub applicable: bool,
    /// `value ≤ 2ε` whenever applicable.
    pub holds: bool,
}

fn precondition(index: Option<usize>, message: String) -> Error {
    Error::Precondition { index, message }
}

pub fn perturbation_chain_check(
    w_blocks: &[TwistedVector],
    u_blocks: &BlockSequence,
    a: &SeqVector,
    coeffs: &[f64],
    eps: f64,
) -> Result<ChainReport> {
    let p = u_blocks.p();
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(precondition(
            None,
            format!("epsilon must be positive, got {eps}"),
        ));
    }
    if w_blocks.len() != u_blocks.len() || coeffs.len() != u_blocks.len() {
        return Err(precondition(
            None,
            format!(
                "length mismatch: {} w, {} u, {} coefficients",
                w_blocks.len(),
                u_blocks.len(),
                coeffs.len()
            ),
        ));
    }
    let coeff_norm = lp_norm_slice(coeffs, p);
    if coeff_norm > 1.0 + PRECONDITION_SLACK {
        return Err(precondition(
            None,
            format!("coefficients have l_p norm {coeff_norm} > 1"),
        ));
    }
    let a_norm = a.lp_norm(p);
    if (a_norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(precondition(
            None,
            format!("target has norm {a_norm}, expected 1"),
        ));
    }
    let mut radius = eps;
    for (n, (w, u)) in w_blocks.iter().zip(u_blocks.blocks()).enumerate() {
        radius *= 0.5;
        if w.p != p {
            return Err(Error::ExponentMismatch {
                expected: p.value(),
                found: w.p.value(),
            });
        }
        let gap = w.sub(&TwistedVector::first(u.clone(), p)).quasi_norm();
        if gap > radius * (1.0 + PRECONDITION_SLACK) {
            return Err(precondition(
                Some(n + 1),
                format!("perturbation {gap} exceeds eps/2^{} = {radius}", n + 1),
            ));
        }
    }

    let combined = w_blocks
        .iter()
        .zip(coeffs)
        .fold(TwistedVector::zero(p), |acc, (w, &c)| acc.add(&w.scale(c)));
    let value = combined
        .sub(&TwistedVector::first(a.clone(), p))
        .quasi_norm();
    let u = u_blocks.combination(coeffs);
    let approximation = u.sub(a).lp_norm(p);
    let perturbation: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(n, c)| c.abs() * eps * 0.5_f64.powi(n as i32 + 1))
        .sum();
    let chain_bound = perturbation + approximation;
    let two_eps = 2.0 * eps;
    let applicable = approximation <= eps;
    Ok(ChainReport {
        value,
        approximation,
        chain_bound,
        chain_holds: value <= chain_bound + CHAIN_TOLERANCE,
        two_eps,
        applicable,
        holds: !applicable || value <= two_eps + CHAIN_TOLERANCE,
    })
}
