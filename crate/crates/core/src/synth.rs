//! Seeded generators for synthetic inputs: biorthogonal systems, flattening
//! pairs, seminormalized block families and perturbation-chain instances.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::biorth::{BiorthSystem, Family};
use crate::blocks::{make_disjoint_blocks, BlockSequence, Profile};
use crate::centralizer::TwistedVector;
use crate::error::{Error, Result};
use crate::sampling::{gaussian_seq, gaussian_vec, stream, StreamRng};
use crate::seq::{PExponent, SeqVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub p: PExponent,
    pub delta: f64,
    pub families: usize,
    /// Elements per family.
    pub size: usize,
    /// Coordinates per family region.
    pub width: usize,
    pub seed: u64,
}

impl SynthConfig {
    pub fn new(p: PExponent, delta: f64, seed: u64) -> Self {
        Self {
            p,
            delta,
            families: 3,
            size: 3,
            width: 4,
            seed,
        }
    }
}

/// Norming functional of a unit vector `g` in `ℓ_p`: `sign(g)|g|^{p−1}`,
/// which has `ℓ_q` norm 1 and pairs to 1 with `g`.
pub fn norming_functional(g: &SeqVector, p: PExponent) -> SeqVector {
    let e = p.value() - 1.0;
    g.map_values(|v| v.signum() * v.abs().powf(e))
}

/// Families on disjoint coordinate regions. Every `x ∈ A_j` is a normalized
/// `g + h` with `‖g‖_p = 1` on region `j` and a cross-term `h` of norm at
/// most `δ` on another region; `A_j*` holds the norming functionals of the
/// `g`'s. Same-index pairings are `(1 + ‖h‖^p)^{-1/p} ≥ 1 − δ` and cross
/// pairings are bounded in modulus by `‖h‖_p ≤ δ`.
pub fn synth_system(cfg: &SynthConfig) -> Result<BiorthSystem> {
    if cfg.families < 2 || cfg.size == 0 || cfg.width == 0 {
        return Err(Error::InvalidArgument(format!(
            "need families >= 2, size >= 1, width >= 1 (got {}, {}, {})",
            cfg.families, cfg.size, cfg.width
        )));
    }
    if !(cfg.delta > 0.0 && cfg.delta < 0.5) {
        return Err(Error::DeltaOutOfRange(cfg.delta));
    }
    let p = cfg.p;
    let region = |j: usize| j * cfg.width + 1;
    let mut families = Vec::with_capacity(cfg.families);
    for j in 0..cfg.families {
        let mut a = Vec::with_capacity(cfg.size);
        let mut a_star = Vec::with_capacity(cfg.size);
        for e in 0..cfg.size {
            let mut rng = stream(cfg.seed, (j * cfg.size + e) as u64);
            let g = unit(gaussian_seq(&mut rng, region(j), cfg.width), p);
            let other = (j + rng.random_range(1..cfg.families)) % cfg.families;
            let tau = cfg.delta * rng.random::<f64>();
            let h = unit(gaussian_seq(&mut rng, region(other), cfg.width), p).scale(tau);
            a_star.push(norming_functional(&g, p));
            a.push(unit(g.add(&h), p));
        }
        families.push(Family::new(a, a_star));
    }
    BiorthSystem::ellp(p, cfg.delta, families)
}

fn unit(v: SeqVector, p: PExponent) -> SeqVector {
    let n = v.lp_norm(p);
    v.scale(1.0 / n)
}

/// `n` pairs `(x_j, u_j)` on successive width-`width` slots with Gaussian
/// coordinates and `‖u_j‖_p = 2^{−j}`.
pub fn psp_pairs(p: PExponent, n: usize, width: usize, seed: u64) -> Result<Vec<TwistedVector>> {
    if n == 0 || width == 0 {
        return Err(Error::InvalidArgument(
            "n and width must be positive".into(),
        ));
    }
    Ok((0..n)
        .map(|j| {
            let mut rng = stream(seed, j as u64);
            let start = j * width + 1;
            let x = gaussian_seq(&mut rng, start, width);
            let u = unit(gaussian_seq(&mut rng, start, width), p).scale(0.5_f64.powi(j as i32 + 1));
            TwistedVector::new(x, u, p)
        })
        .collect())
}

/// Disjoint Gaussian blocks with norms drawn uniformly from `[η, 1]`.
pub fn seminormalized_blocks(
    p: PExponent,
    n: usize,
    width: usize,
    eta: f64,
    seed: u64,
) -> Result<BlockSequence> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "eta must lie in (0, 1], got {eta}"
        )));
    }
    let blocks = (0..n)
        .map(|j| {
            let mut rng = stream(seed, j as u64);
            let b = unit(gaussian_seq(&mut rng, j * width + 1, width), p);
            b.scale(eta + (1.0 - eta) * rng.random::<f64>())
        })
        .collect();
    BlockSequence::new(blocks, p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainInstance {
    pub w: Vec<TwistedVector>,
    pub u: BlockSequence,
    pub a: SeqVector,
    pub coeffs: Vec<f64>,
    pub eps: f64,
}

// Keep sampled perturbations strictly inside their radius.
const RADIUS_FILL: f64 = 0.999;

fn random_perturbation(
    rng: &mut StreamRng,
    start: usize,
    width: usize,
    radius: f64,
    p: PExponent,
) -> TwistedVector {
    let d = gaussian_seq(rng, start, width);
    let v = gaussian_seq(rng, start, width);
    let z = TwistedVector::new(d, v, p);
    let fill = RADIUS_FILL * rng.random::<f64>();
    z.scale(fill * radius / z.quasi_norm())
}

/// An instance satisfying every precondition of the perturbation chain:
/// normalized flat blocks `u_n`, `w_n = (u_n, 0) + perturbation` with
/// quasi-norm below `ε/2^n`, unit coefficients in `ℓ_p`, and a unit `a`
/// within `ε` of `u = Σλ_n u_n`.
pub fn chain_instance(
    p: PExponent,
    n: usize,
    width: usize,
    eps: f64,
    seed: u64,
) -> Result<ChainInstance> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {eps}"
        )));
    }
    let u = make_disjoint_blocks(n, width, Profile::Flat, p, true)?;
    let mut rng = stream(seed, 0);
    let mut radius = eps;
    let w = u
        .blocks()
        .iter()
        .enumerate()
        .map(|(k, b)| {
            radius *= 0.5;
            TwistedVector::first(b.clone(), p).add(&random_perturbation(
                &mut rng,
                k * width + 1,
                width,
                radius,
                p,
            ))
        })
        .collect();
    let raw = gaussian_vec(&mut rng, n);
    let coeffs = unit(SeqVector::from_dense(&raw), p).to_dense(n);
    let target = u.combination(&coeffs);
    let noise = gaussian_seq(&mut rng, 1, n * width);
    let noise = noise.scale(0.5 * eps * rng.random::<f64>() / noise.lp_norm(p));
    let a = unit(target.add(&noise), p);
    Ok(ChainInstance {
        w,
        u,
        a,
        coeffs,
        eps,
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;
    use crate::biorth::{validate_biorth, Families};

    fn p(v: f64) -> PExponent {
        PExponent::new(v).unwrap()
    }

    #[test]
    fn norming_functional_norms_and_pairs() {
        for q in [1.5, 2.0, 3.0] {
            let q = p(q);
            let g = unit(SeqVector::from_dense(&[0.3, -1.2, 2.0]), q);
            let f = norming_functional(&g, q);
            assert_relative_eq!(f.pairing(&g), 1.0, max_relative = 1e-14);
            assert_relative_eq!(f.lp_norm(q.dual()), 1.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn synthetic_systems_validate() {
        for (k, delta) in [0.05, 0.1, 0.2, 0.4].into_iter().enumerate() {
            for q in [1.5, 2.0, 3.0] {
                let sys = synth_system(&SynthConfig::new(p(q), delta, k as u64)).unwrap();
                let r = validate_biorth(&sys);
                assert!(r.passes(), "{r:?}");
                assert!(r.worst_cross_abs <= delta + 1e-12);
            }
        }
    }

    #[test]
    fn synthetic_systems_are_reproducible() {
        let cfg = SynthConfig::new(p(2.5), 0.1, 17);
        assert_eq!(synth_system(&cfg).unwrap(), synth_system(&cfg).unwrap());
        let Families::Ellp(f) = synth_system(&cfg).unwrap().families().clone() else {
            unreachable!()
        };
        assert_eq!(f.len(), 3);
        assert!(f
            .iter()
            .all(|fam| fam.a.len() == 3 && fam.a_star.len() == 3));
    }

    #[test]
    fn synth_rejects_bad_shapes() {
        let mut cfg = SynthConfig::new(p(2.0), 0.1, 0);
        cfg.families = 1;
        assert!(synth_system(&cfg).is_err());
        assert!(synth_system(&SynthConfig::new(p(2.0), 0.5, 0)).is_err());
    }

    #[test]
    fn psp_pairs_have_dyadic_second_norms() {
        let q = p(3.0);
        for (j, z) in psp_pairs(q, 6, 3, 4).unwrap().iter().enumerate() {
            assert_relative_eq!(
                z.y.lp_norm(q),
                0.5_f64.powi(j as i32 + 1),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn seminormalized_norms_stay_in_window() {
        let b = seminormalized_blocks(p(2.0), 20, 3, 0.5, 9).unwrap();
        assert!(b
            .norms()
            .iter()
            .all(|&c| (0.5 - 1e-12..=1.0 + 1e-12).contains(&c)));
    }
}
