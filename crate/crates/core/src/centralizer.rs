//! The Kalton–Peck centralizer `Ω_p`, the `Z_p` quasi-norm, the twisted
//! duality bracket, and seeded estimators for the centralizer constant and the
//! quasi-triangle modulus.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::{gaussian_seq, stream};
use crate::seq::{PExponent, SeqVector};

/// `Ω_p(x)_i = x_i · ln(|x_i| / ‖x‖_p)`, with zero entries left at zero and
/// `Ω_p(0) = 0`.
pub fn omega_p(x: &SeqVector, p: PExponent) -> SeqVector {
    let norm = x.lp_norm(p);
    if norm == 0.0 {
        return SeqVector::zero();
    }
    x.map_values(|v| v * (v.abs() / norm).ln())
}

/// An element `(x, y)` of a finite section of `Z_p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwistedVector {
    pub x: SeqVector,
    pub y: SeqVector,
    pub p: PExponent,
}

impl TwistedVector {
    pub fn new(x: SeqVector, y: SeqVector, p: PExponent) -> Self {
        Self { x, y, p }
    }

    /// The embedding `x ↦ (x, 0)` of `ℓ_p`.
    pub fn first(x: SeqVector, p: PExponent) -> Self {
        Self::new(x, SeqVector::zero(), p)
    }

    /// `(Ω_p(y), y)`, the canonical lift of `y` with quasi-norm `‖y‖_p`.
    pub fn lifted(y: SeqVector, p: PExponent) -> Self {
        Self::new(omega_p(&y, p), y, p)
    }

    pub fn zero(p: PExponent) -> Self {
        Self::new(SeqVector::zero(), SeqVector::zero(), p)
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    // The exponent of the result is taken from `self`.
    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.x.add(&other.x), self.y.add(&other.y), self.p)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(self.x.sub(&other.x), self.y.sub(&other.y), self.p)
    }

    pub fn scale(&self, lambda: f64) -> Self {
        Self::new(self.x.scale(lambda), self.y.scale(lambda), self.p)
    }

    /// `‖x − Ω_p(y)‖_p + ‖y‖_p` at the vector's own exponent.
    pub fn quasi_norm(&self) -> f64 {
        quasi_norm_at(&self.x, &self.y, self.p)
    }
}

fn quasi_norm_at(x: &SeqVector, y: &SeqVector, p: PExponent) -> f64 {
    x.sub(&omega_p(y, p)).lp_norm(p) + y.lp_norm(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CentralizerKind {
    KaltonPeck,
}

/// A centralizer together with its exponent. Only `Ω_p` is available.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentralizerSpec {
    pub kind: CentralizerKind,
    pub p: PExponent,
}

impl CentralizerSpec {
    pub fn kalton_peck(p: PExponent) -> Self {
        Self {
            kind: CentralizerKind::KaltonPeck,
            p,
        }
    }

    pub fn apply(&self, x: &SeqVector) -> SeqVector {
        match self.kind {
            CentralizerKind::KaltonPeck => omega_p(x, self.p),
        }
    }

    /// `‖x − Ω(y)‖_p + ‖y‖_p`.
    pub fn quasi_norm(&self, z: &TwistedVector) -> Result<f64> {
        if z.p != self.p {
            return Err(Error::ExponentMismatch {
                expected: self.p.value(),
                found: z.p.value(),
            });
        }
        Ok(z.x.sub(&self.apply(&z.y)).lp_norm(self.p) + z.y.lp_norm(self.p))
    }
}

/// `⟨(x, y), (a, b)⟩ = ⟨x, b⟩ + ⟨y, a⟩`, reading `f = (a, b)`.
pub fn twisted_pairing(z: &TwistedVector, f: &TwistedVector) -> f64 {
    z.x.pairing(&f.y) + z.y.pairing(&f.x)
}

/// `‖Ω_p(a x) − a Ω_p(x)‖_p`.
pub fn centralizer_defect(a: &SeqVector, x: &SeqVector, p: PExponent) -> f64 {
    let lhs = omega_p(&a.pointwise_mul(x), p);
    let rhs = a.pointwise_mul(&omega_p(x, p));
    lhs.sub(&rhs).lp_norm(p)
}

/// Running maximum of a ratio over a sample stream, with degenerate
/// denominators counted but never folded in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub max_ratio: f64,
    pub evaluated: usize,
    pub skipped: usize,
}

#[derive(Default)]
struct RatioAccumulator {
    best: Option<f64>,
    evaluated: usize,
    skipped: usize,
}

impl RatioAccumulator {
    fn push(&mut self, numerator: f64, denominator: f64) {
        if denominator > 0.0 && denominator.is_finite() && numerator.is_finite() {
            let r = numerator / denominator;
            self.best = Some(self.best.map_or(r, |b| b.max(r)));
            self.evaluated += 1;
        } else {
            self.skipped += 1;
        }
    }

    fn finish(self, what: &str) -> Result<RatioEstimate> {
        match self.best {
            Some(max_ratio) => Ok(RatioEstimate {
                max_ratio,
                evaluated: self.evaluated,
                skipped: self.skipped,
            }),
            None => Err(Error::DegenerateSamples(format!(
                "{what}: {} samples, all with vanishing denominator",
                self.skipped
            ))),
        }
    }
}

/// Law of the random multipliers `a` in the centralizer-constant estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MultiplierLaw {
    /// i.i.d. standard normal coordinates.
    #[default]
    Gaussian,
    /// `a ≡ 1` on the sampled support.
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplePlan {
    pub multipliers: MultiplierLaw,
    /// Include the fixed battery of indicator multipliers against flat,
    /// geometric and unit vectors.
    pub adversarial: bool,
}

impl Default for SamplePlan {
    fn default() -> Self {
        Self {
            multipliers: MultiplierLaw::Gaussian,
            adversarial: true,
        }
    }
}

/// Flat, geometric (ratio 1/2), alternating-sign and `e_1` vectors of length `dim`.
fn battery_vectors(dim: usize) -> Vec<SeqVector> {
    let flat = vec![1.0; dim];
    let geometric: Vec<f64> = (0..dim).map(|k| 0.5_f64.powi(k as i32)).collect();
    let alternating: Vec<f64> = (0..dim)
        .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    vec![
        SeqVector::from_dense(&flat),
        SeqVector::from_dense(&geometric),
        SeqVector::from_dense(&alternating),
        SeqVector::unit(1),
    ]
}

const EXHAUSTIVE_SUBSET_DIM: usize = 10;

/// Indicator multipliers: every nonempty subset of `1..=dim` for small `dim`,
/// otherwise singletons, prefixes and suffixes.
fn battery_indicators(dim: usize) -> Vec<SeqVector> {
    let mut out = Vec::new();
    if dim <= EXHAUSTIVE_SUBSET_DIM {
        for mask in 1u32..(1 << dim) {
            let set = (0..dim).filter(|k| mask & (1 << k) != 0).map(|k| k + 1);
            out.push(SeqVector::indicator(set).expect("distinct indices"));
        }
    } else {
        for k in 1..=dim {
            out.push(SeqVector::unit(k));
            out.push(SeqVector::indicator(1..=k).expect("distinct indices"));
            out.push(SeqVector::indicator(k..=dim).expect("distinct indices"));
        }
    }
    out
}

/// Empirical lower estimate of the centralizer constant of `Ω_p`:
/// the largest `‖Ω_p(ax) − aΩ_p(x)‖_p / (‖a‖_∞ ‖x‖_p)` over the default plan.
pub fn estimate_centralizer_constant(
    p: PExponent,
    dim: usize,
    trials: usize,
    seed: u64,
) -> Result<RatioEstimate> {
    estimate_centralizer_constant_with(p, dim, trials, seed, SamplePlan::default())
}

pub fn estimate_centralizer_constant_with(
    p: PExponent,
    dim: usize,
    trials: usize,
    seed: u64,
    plan: SamplePlan,
) -> Result<RatioEstimate> {
    if dim == 0 || trials == 0 {
        return Err(Error::InvalidArgument(format!(
            "dim and trials must be positive (dim = {dim}, trials = {trials})"
        )));
    }
    let mut acc = RatioAccumulator::default();
    let mut push = |a: &SeqVector, x: &SeqVector| {
        acc.push(centralizer_defect(a, x, p), a.sup_norm() * x.lp_norm(p));
    };
    if plan.adversarial {
        let indicators = battery_indicators(dim);
        for x in battery_vectors(dim) {
            for a in &indicators {
                push(a, &x);
            }
        }
    }
    for trial in 0..trials {
        let mut rng = stream(seed, trial as u64);
        let x = gaussian_seq(&mut rng, 1, dim);
        let a = match plan.multipliers {
            MultiplierLaw::Gaussian => gaussian_seq(&mut rng, 1, dim),
            MultiplierLaw::Identity => SeqVector::indicator(x.support()).expect("distinct indices"),
        };
        push(&a, &x);
    }
    acc.finish("centralizer constant")
}

/// `‖z + w‖ / (‖z‖ + ‖w‖)` in the `Z_p` quasi-norm; `None` when both vanish.
pub fn quasi_triangle_ratio(z: &TwistedVector, w: &TwistedVector) -> Option<f64> {
    let denominator = z.quasi_norm() + w.quasi_norm();
    (denominator > 0.0).then(|| z.add(w).quasi_norm() / denominator)
}

/// Largest sampled `‖z + w‖ / (‖z‖ + ‖w‖)`. Any value above 1 certifies that
/// the quasi-norm violates the triangle inequality.
pub fn quasi_triangle_defect(
    p: PExponent,
    dim: usize,
    trials: usize,
    seed: u64,
) -> Result<RatioEstimate> {
    if dim == 0 || trials == 0 {
        return Err(Error::InvalidArgument(format!(
            "dim and trials must be positive (dim = {dim}, trials = {trials})"
        )));
    }
    let mut acc = RatioAccumulator::default();
    let mut push = |z: &TwistedVector, w: &TwistedVector| {
        acc.push(z.add(w).quasi_norm(), z.quasi_norm() + w.quasi_norm());
    };
    if dim >= 2 {
        let half = dim / 2;
        let u = SeqVector::from_dense_at(1, &vec![1.0; half]);
        let v = SeqVector::from_dense_at(half + 1, &vec![1.0; dim - half]);
        push(
            &TwistedVector::lifted(u.clone(), p),
            &TwistedVector::lifted(v.clone(), p),
        );
        push(
            &TwistedVector::new(SeqVector::zero(), u.clone(), p),
            &TwistedVector::new(SeqVector::zero(), v.clone(), p),
        );
        push(&TwistedVector::first(u, p), &TwistedVector::first(v, p));
    }
    for trial in 0..trials {
        let mut rng = stream(seed, trial as u64);
        let z = TwistedVector::new(
            gaussian_seq(&mut rng, 1, dim),
            gaussian_seq(&mut rng, 1, dim),
            p,
        );
        let w = TwistedVector::new(
            gaussian_seq(&mut rng, 1, dim),
            gaussian_seq(&mut rng, 1, dim),
            p,
        );
        push(&z, &w);
        push(
            &TwistedVector::lifted(z.y.clone(), p),
            &TwistedVector::lifted(w.y.clone(), p),
        );
    }
    acc.finish("quasi-triangle defect")
}
