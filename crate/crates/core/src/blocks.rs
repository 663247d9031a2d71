//! Disjoint block sequences and the diagnostics that separate first-coordinate
//! blocks `(y_j, 0)` from second-coordinate blocks `(0, u_j)` in `Z_p`.
//!
//! For disjoint blocks `u_k` with norms `c_k` and `S = (Σ c_k^p)^{1/p}`,
//!
//! ```text
//! Ω_p(Σ u_k) − Σ Ω_p(u_k) = Σ_k ln(c_k / S) · u_k
//! ```
//!
//! so the log-lift `‖Ω_p(Σu_k) − ΣΩ_p(u_k)‖_p` equals
//! `(Σ c_k^p |ln(c_k/S)|^p)^{1/p}`, which is `n^{1/p} ln(n) / p` for `n`
//! normalized blocks.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::centralizer::{omega_p, TwistedVector};
use crate::error::{Error, Result};
use crate::fmt::fmt_f64;
use crate::seq::{are_disjoint, lp_norm_slice, PExponent, SeqVector};

/// Blocks with strictly successive supports, none of them zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSequence {
    blocks: Vec<SeqVector>,
    p: PExponent,
}

impl BlockSequence {
    pub fn new(blocks: Vec<SeqVector>, p: PExponent) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidArgument(
                "a block sequence needs at least one block".into(),
            ));
        }
        if let Some(index) = blocks.iter().position(SeqVector::is_zero) {
            return Err(Error::ZeroBlock { index: index + 1 });
        }
        for (k, w) in blocks.windows(2).enumerate() {
            if w[0].max_index() >= w[1].min_index() {
                return Err(Error::BlockOrder {
                    first: k + 1,
                    second: k + 2,
                });
            }
        }
        Ok(Self { blocks, p })
    }

    pub fn blocks(&self) -> &[SeqVector] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<SeqVector> {
        self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn p(&self) -> PExponent {
        self.p
    }

    pub fn norms(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.lp_norm(self.p)).collect()
    }

    pub fn sum(&self) -> SeqVector {
        crate::seq::sum(&self.blocks)
    }

    /// `Σ λ_k u_k`.
    pub fn combination(&self, coeffs: &[f64]) -> SeqVector {
        self.blocks
            .iter()
            .zip(coeffs)
            .fold(SeqVector::zero(), |acc, (b, &c)| acc.axpy(c, b))
    }

    /// `Σ_k ln(c_k / S) · u_k`, the exact value of `Ω_p(Σu_k) − ΣΩ_p(u_k)`
    /// on disjoint blocks.
    pub fn lift_difference(&self) -> SeqVector {
        let norms = self.norms();
        let total = lp_norm_slice(&norms, self.p);
        self.blocks
            .iter()
            .zip(&norms)
            .fold(SeqVector::zero(), |acc, (b, &c)| {
                acc.axpy((c / total).ln(), b)
            })
    }

    /// `‖Ω_p(Σu_j) − ΣΩ_p(u_j)‖_p`, through the disjoint-block identity.
    pub fn log_lift(&self) -> f64 {
        let norms = self.norms();
        let total = lp_norm_slice(&norms, self.p);
        let weighted: Vec<f64> = norms.iter().map(|&c| c * (total / c).ln()).collect();
        lp_norm_slice(&weighted, self.p)
    }
}

/// `‖Ω_p(Σv_j) − ΣΩ_p(v_j)‖_p` evaluated coordinatewise; the vectors may
/// overlap.
pub fn log_lift_direct(vectors: &[SeqVector], p: PExponent) -> f64 {
    let total = omega_p(&crate::seq::sum(vectors), p);
    vectors
        .iter()
        .fold(total, |acc, v| acc.sub(&omega_p(v, p)))
        .lp_norm(p)
}

/// Coefficient profile of a generated block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// All coefficients 1.
    Flat,
    /// Coefficients `1, 1/2, 1/4, …`.
    Geometric,
    /// A single 1 at the first coordinate of the block's slot.
    Singleton,
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flat" => Ok(Self::Flat),
            "geometric" => Ok(Self::Geometric),
            "singleton" => Ok(Self::Singleton),
            other => Err(Error::Parse(format!(
                "unknown profile `{other}` (expected flat, geometric or singleton)"
            ))),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Flat => "flat",
            Self::Geometric => "geometric",
            Self::Singleton => "singleton",
        })
    }
}

impl Profile {
    pub fn coefficients(self, width: usize) -> Vec<f64> {
        match self {
            Self::Flat => vec![1.0; width],
            Self::Geometric => (0..width).map(|k| 0.5_f64.powi(k as i32)).collect(),
            Self::Singleton => {
                let mut c = vec![0.0; width];
                c[0] = 1.0;
                c
            }
        }
    }
}

/// `n` blocks on the consecutive slots `[(j−1)w + 1, jw]`.
pub fn make_disjoint_blocks(
    n: usize,
    width: usize,
    profile: Profile,
    p: PExponent,
    normalize: bool,
) -> Result<BlockSequence> {
    if n == 0 || width == 0 {
        return Err(Error::InvalidArgument(format!(
            "n and width must be positive (n = {n}, width = {width})"
        )));
    }
    let coefficients = profile.coefficients(width);
    let scale = if normalize {
        1.0 / lp_norm_slice(&coefficients, p)
    } else {
        1.0
    };
    let blocks = (0..n)
        .map(|j| SeqVector::from_dense_at(j * width + 1, &coefficients).scale(scale))
        .collect();
    BlockSequence::new(blocks, p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundCheck {
    pub value: f64,
    pub bound: f64,
    pub holds: bool,
}

const WINDOW_SLACK: f64 = 1e-12;
pub const LOWER_BOUND_TOLERANCE: f64 = 1e-10;

/// `η · max(0, ln(n)/p + ln η) · n^{1/p}`.
pub fn seminormalized_lower_bound(n: usize, eta: f64, p: PExponent) -> f64 {
    let n = n as f64;
    let p = p.value();
    eta * ((n.ln() / p) + eta.ln()).max(0.0) * n.powf(1.0 / p)
}

/// Compares the log-lift of blocks with norms in `[η, 1]` against
/// [`seminormalized_lower_bound`].
pub fn log_lift_lower_bound_check(blocks: &BlockSequence, eta: f64) -> Result<LowerBoundCheck> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "eta must lie in (0, 1], got {eta}"
        )));
    }
    for (k, &norm) in blocks.norms().iter().enumerate() {
        if norm < eta * (1.0 - WINDOW_SLACK) || norm > 1.0 + WINDOW_SLACK {
            return Err(Error::SeminormWindow {
                index: k + 1,
                norm,
                eta,
            });
        }
    }
    let value = blocks.log_lift();
    let bound = seminormalized_lower_bound(blocks.len(), eta, blocks.p());
    Ok(LowerBoundCheck {
        value,
        bound,
        holds: value >= bound - LOWER_BOUND_TOLERANCE,
    })
}

fn common_exponent(pairs: &[TwistedVector]) -> Result<Option<PExponent>> {
    let Some(first) = pairs.first() else {
        return Ok(None);
    };
    for z in pairs {
        if z.p != first.p {
            return Err(Error::ExponentMismatch {
                expected: first.p.value(),
                found: z.p.value(),
            });
        }
    }
    Ok(Some(first.p))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flattened {
    pub y: SeqVector,
    pub err: f64,
}

/// `y_j = x_j − Ω_p(u_j)` together with `‖(x_j, u_j) − (y_j, 0)‖`, which is
/// the quasi-norm of `(Ω_p(u_j), u_j)`, i.e. `‖u_j‖_p`.
pub fn psp_flatten(pairs: &[TwistedVector]) -> Result<Vec<Flattened>> {
    common_exponent(pairs)?;
    Ok(pairs
        .iter()
        .map(|z| {
            let y = z.x.sub(&omega_p(&z.y, z.p));
            let err = z.sub(&TwistedVector::first(y.clone(), z.p)).quasi_norm();
            Flattened { y, err }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalized {
    pub vectors: Vec<SeqVector>,
    /// `λ_j = 1 / ‖y_j‖_p`.
    pub scales: Vec<f64>,
}

impl Normalized {
    pub fn min_scale(&self) -> f64 {
        self.scales.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_scale(&self) -> f64 {
        self.scales.iter().copied().fold(0.0, f64::max)
    }
}

pub fn normalize_flattened(ys: &[SeqVector], p: PExponent) -> Result<Normalized> {
    let mut vectors = Vec::with_capacity(ys.len());
    let mut scales = Vec::with_capacity(ys.len());
    for (k, y) in ys.iter().enumerate() {
        let norm = y.lp_norm(p);
        if norm == 0.0 {
            return Err(Error::ZeroFlattened { index: k + 1 });
        }
        let lambda = 1.0 / norm;
        if !lambda.is_finite() {
            return Err(Error::ZeroFlattened { index: k + 1 });
        }
        vectors.push(y.scale(lambda));
        scales.push(lambda);
    }
    Ok(Normalized { vectors, scales })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub n: usize,
    pub value: f64,
    pub reference: f64,
}

impl GrowthRow {
    pub fn ratio(&self) -> f64 {
        self.value / self.reference
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthTable {
    pub law: String,
    pub rows: Vec<GrowthRow>,
}

pub const GROWTH_LAW: &str = "n^(1/p)";

impl GrowthTable {
    /// CSV with header `n,value,reference,law`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv output: {e}"));
        w.write_record(["n", "value", "reference", "law"])
            .map_err(io)?;
        for row in &self.rows {
            w.write_record([
                row.n.to_string(),
                fmt_f64(row.value),
                fmt_f64(row.reference),
                self.law.clone(),
            ])
            .map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::InvalidArgument(format!("csv output: {e}")))?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

/// Quasi-norms of the partial sums `Σ_{j≤n} (x_j, u_j)` against `n^{1/p}`.
pub fn block_sum_growth(pairs: &[TwistedVector], n_values: &[usize]) -> Result<GrowthTable> {
    let Some(p) = common_exponent(pairs)? else {
        return Err(Error::InvalidArgument("no pairs given".into()));
    };
    let firsts: Vec<SeqVector> = pairs.iter().map(|z| z.x.clone()).collect();
    let seconds: Vec<SeqVector> = pairs.iter().map(|z| z.y.clone()).collect();
    if !are_disjoint(&firsts) {
        return Err(Error::NotDisjoint("first coordinates overlap".into()));
    }
    if !are_disjoint(&seconds) {
        return Err(Error::NotDisjoint("second coordinates overlap".into()));
    }
    for (k, &n) in n_values.iter().enumerate() {
        if n == 0 || n > pairs.len() {
            return Err(Error::InvalidArgument(format!(
                "n = {n} outside 1..={}",
                pairs.len()
            )));
        }
        if k > 0 && n <= n_values[k - 1] {
            return Err(Error::InvalidArgument(
                "n values must be strictly increasing".into(),
            ));
        }
    }

    let mut rows = Vec::with_capacity(n_values.len());
    let mut partial = TwistedVector::zero(p);
    let mut taken = 0;
    for &n in n_values {
        for z in &pairs[taken..n] {
            partial = partial.add(z);
        }
        taken = n;
        rows.push(GrowthRow {
            n,
            value: partial.quasi_norm(),
            reference: (n as f64).powf(1.0 / p.value()),
        });
    }
    Ok(GrowthTable {
        law: GROWTH_LAW.to_string(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;

    fn p(v: f64) -> PExponent {
        PExponent::new(v).unwrap()
    }

    #[test]
    fn singleton_blocks_are_unit_vectors() {
        let b = make_disjoint_blocks(3, 1, Profile::Singleton, p(2.0), true).unwrap();
        assert_eq!(
            b.blocks(),
            &[SeqVector::unit(1), SeqVector::unit(2), SeqVector::unit(3)]
        );
    }

    #[test]
    fn flat_block_normalized_in_l2() {
        let b = make_disjoint_blocks(1, 4, Profile::Flat, p(2.0), true).unwrap();
        assert_eq!(b.blocks()[0], SeqVector::from_dense(&[0.5; 4]));
    }

    #[test]
    fn generator_rejects_empty_shapes() {
        assert!(make_disjoint_blocks(0, 2, Profile::Flat, p(2.0), true).is_err());
        assert!(make_disjoint_blocks(2, 0, Profile::Flat, p(2.0), true).is_err());
    }

    #[test]
    fn block_sequence_invariants() {
        let q = p(2.0);
        assert!(matches!(
            BlockSequence::new(vec![SeqVector::unit(2), SeqVector::unit(1)], q),
            Err(Error::BlockOrder {
                first: 1,
                second: 2
            })
        ));
        assert!(matches!(
            BlockSequence::new(vec![SeqVector::unit(1), SeqVector::zero()], q),
            Err(Error::ZeroBlock { index: 2 })
        ));
        let overlapping = vec!["1:1;3:1".parse().unwrap(), "2:1".parse().unwrap()];
        assert!(BlockSequence::new(overlapping, q).is_err());
        assert!(BlockSequence::new(vec![], q).is_err());
    }

    #[test]
    fn log_lift_examples() {
        let q = p(2.0);
        let one = make_disjoint_blocks(1, 3, Profile::Geometric, q, false).unwrap();
        assert_eq!(one.log_lift(), 0.0);
        let four = make_disjoint_blocks(4, 1, Profile::Singleton, q, true).unwrap();
        assert_relative_eq!(
            four.log_lift(),
            2.0 * std::f64::consts::LN_2,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            log_lift_direct(four.blocks(), q),
            2.0 * std::f64::consts::LN_2,
            max_relative = 1e-14
        );
    }

    #[test]
    fn lift_difference_matches_direct_evaluation() {
        let q = p(3.0);
        let blocks = BlockSequence::new(
            vec![
                "1:2;2:-1".parse().unwrap(),
                "4:0.3".parse().unwrap(),
                "5:1;6:1;7:-4".parse().unwrap(),
            ],
            q,
        )
        .unwrap();
        let direct = blocks
            .blocks()
            .iter()
            .fold(omega_p(&blocks.sum(), q), |acc, b| acc.sub(&omega_p(b, q)));
        assert!(direct.sub(&blocks.lift_difference()).lp_norm(q) < 1e-13);
        assert_relative_eq!(blocks.log_lift(), direct.lp_norm(q), max_relative = 1e-13);
    }

    #[test]
    fn lower_bound_is_tight_on_normalized_blocks() {
        let q = p(2.0);
        let b = make_disjoint_blocks(9, 2, Profile::Flat, q, true).unwrap();
        let check = log_lift_lower_bound_check(&b, 1.0).unwrap();
        assert!(check.holds);
        assert_relative_eq!(check.value, check.bound, max_relative = 1e-12);
        assert_relative_eq!(check.bound, 3.0 * 9f64.ln() / 2.0, max_relative = 1e-14);

        let single = make_disjoint_blocks(1, 2, Profile::Flat, q, true).unwrap();
        let check = log_lift_lower_bound_check(&single, 1.0).unwrap();
        assert_eq!(check.bound, 0.0);
        assert!(check.holds);
    }

    #[test]
    fn lower_bound_on_geometric_family() {
        let q = p(2.0);
        // Norms 1, 1/2, 1, 1/2, … on geometric-profile blocks.
        let base = make_disjoint_blocks(8, 3, Profile::Geometric, q, true).unwrap();
        let scaled: Vec<SeqVector> = base
            .blocks()
            .iter()
            .enumerate()
            .map(|(k, b)| b.scale(if k % 2 == 0 { 1.0 } else { 0.5 }))
            .collect();
        let family = BlockSequence::new(scaled, q).unwrap();
        let check = log_lift_lower_bound_check(&family, 0.5).unwrap();
        assert!(check.holds, "{check:?}");
        assert!(check.bound > 0.0);
    }

    #[test]
    fn lower_bound_window_is_enforced() {
        let q = p(2.0);
        let b =
            BlockSequence::new(vec![SeqVector::unit(1), SeqVector::unit(2).scale(0.2)], q).unwrap();
        assert!(matches!(
            log_lift_lower_bound_check(&b, 0.5),
            Err(Error::SeminormWindow { index: 2, .. })
        ));
        assert!(log_lift_lower_bound_check(&b, 0.0).is_err());
    }

    #[test]
    fn flatten_examples() {
        let q = p(2.0);
        let x: SeqVector = "1:1;2:-2".parse().unwrap();
        let out = psp_flatten(&[TwistedVector::first(x.clone(), q)]).unwrap();
        assert_eq!(out[0], Flattened { y: x, err: 0.0 });

        let out =
            psp_flatten(&[TwistedVector::new(SeqVector::zero(), SeqVector::unit(1), q)]).unwrap();
        assert!(out[0].y.is_zero());
        assert_eq!(out[0].err, 1.0);

        let pairs: Vec<TwistedVector> = (1..=6)
            .map(|j| {
                let u = SeqVector::from_dense_at(2 * j - 1, &[1.0, 1.0]);
                let u = u.scale(0.5_f64.powi(j as i32) / u.lp_norm(q));
                TwistedVector::new(SeqVector::from_dense_at(2 * j - 1, &[0.3, -2.0]), u, q)
            })
            .collect();
        for (j, f) in psp_flatten(&pairs).unwrap().iter().enumerate() {
            assert_relative_eq!(f.err, 0.5_f64.powi(j as i32 + 1), max_relative = 1e-12);
        }
    }

    #[test]
    fn flatten_rejects_mixed_exponents() {
        let pairs = [
            TwistedVector::first(SeqVector::unit(1), p(2.0)),
            TwistedVector::first(SeqVector::unit(2), p(3.0)),
        ];
        assert!(psp_flatten(&pairs).is_err());
    }

    #[test]
    fn normalize_examples() {
        let q = p(2.0);
        let unit = vec![SeqVector::unit(1), SeqVector::from_dense_at(2, &[0.6, 0.8])];
        let out = normalize_flattened(&unit, q).unwrap();
        assert_eq!(out.vectors, unit);
        assert_eq!(out.scales, vec![1.0, 1.0]);

        let out = normalize_flattened(&[SeqVector::unit(1).scale(2.0)], q).unwrap();
        assert_eq!(out.vectors, vec![SeqVector::unit(1)]);
        assert_eq!(out.scales, vec![0.5]);
        assert!(out.min_scale() > 0.0 && out.max_scale().is_finite());

        assert_eq!(
            normalize_flattened(&[SeqVector::unit(1), SeqVector::zero()], q),
            Err(Error::ZeroFlattened { index: 2 })
        );
    }

    #[test]
    fn growth_examples() {
        let q = p(2.0);
        let first: Vec<_> = (1..=4)
            .map(|j| TwistedVector::first(SeqVector::unit(j), q))
            .collect();
        let t = block_sum_growth(&first, &[1, 4]).unwrap();
        assert_eq!(t.rows[0].value, 1.0);
        assert_eq!((t.rows[1].value, t.rows[1].reference), (2.0, 2.0));

        let second: Vec<_> = (1..=4)
            .map(|j| TwistedVector::new(SeqVector::zero(), SeqVector::unit(j), q))
            .collect();
        let t = block_sum_growth(&second, &[1, 2, 4]).unwrap();
        assert_eq!(t.rows[0].value, second[0].quasi_norm());
        assert_relative_eq!(
            t.rows[2].value,
            2.0 * (1.0 + std::f64::consts::LN_2),
            max_relative = 1e-14
        );
        assert_eq!(t.law, GROWTH_LAW);
    }

    #[test]
    fn growth_rejects_bad_inputs() {
        let q = p(2.0);
        let overlapping = vec![
            TwistedVector::first(SeqVector::unit(1), q),
            TwistedVector::first(SeqVector::unit(1), q),
        ];
        assert!(matches!(
            block_sum_growth(&overlapping, &[1]),
            Err(Error::NotDisjoint(_))
        ));
        let fine: Vec<_> = (1..=3)
            .map(|j| TwistedVector::first(SeqVector::unit(j), q))
            .collect();
        assert!(block_sum_growth(&fine, &[4]).is_err());
        assert!(block_sum_growth(&fine, &[2, 2]).is_err());
        assert!(block_sum_growth(&fine, &[0]).is_err());
    }

    #[test]
    fn growth_csv_header() {
        let q = p(2.0);
        let pairs: Vec<_> = (1..=2)
            .map(|j| TwistedVector::first(SeqVector::unit(j), q))
            .collect();
        let csv = block_sum_growth(&pairs, &[1, 2]).unwrap().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("n,value,reference,law"));
        assert_eq!(
            lines.next(),
            Some("1,1.0000000000000000e0,1.0000000000000000e0,n^(1/p)")
        );
    }

    #[test]
    fn profile_parsing() {
        assert_eq!("geometric".parse::<Profile>().unwrap(), Profile::Geometric);
        assert!("spiky".parse::<Profile>().is_err());
        assert_eq!(Profile::Singleton.to_string(), "singleton");
    }
}
