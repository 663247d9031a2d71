//! Finite biorthogonal systems `(A_j, A_j*)` with constant `δ`, the
//! renorming `ε‖x‖ + sup{|x*(x)| : x* ∈ A_1*}`, its distortion ratio, and the
//! lift of an `ℓ_p` system into `Z_p`.
//!
//! Elements live either in `ℓ_p` ([`SeqVector`]) or in a `Z_p` section
//! ([`TwistedVector`]); the [`SpaceElement`] trait abstracts the ambient
//! (quasi-)norm and the duality bracket so validation and distortion share
//! one implementation. Functionals of an `ℓ_p` system are measured in `ℓ_q`;
//! functionals of a lifted system in the `Z_q` quasi-norm, which is only a
//! proxy for the dual norm of `Z_p`.

mod chain;
mod probe;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use chain::{perturbation_chain_check, ChainReport};
pub use probe::{inevitability_proxy, InevitabilityProbe, ProxyResult};

use crate::centralizer::{omega_p, twisted_pairing, TwistedVector};
use crate::error::{Error, Result};
use crate::seq::{PExponent, SeqVector};

/// Norm tolerance for `‖x‖ = 1` and `‖x*‖ ≤ 1`.
pub const NORM_TOLERANCE: f64 = 1e-9;
/// Slack on the distortion ratio against `(1 + ε − δ)/(ε + δ)`.
pub const DISTORTION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceTag {
    Ellp,
    Zp,
}

impl fmt::Display for SpaceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ellp => "ellp",
            Self::Zp => "zp",
        })
    }
}

pub trait SpaceElement: Clone + fmt::Debug {
    /// Ambient (quasi-)norm at exponent `p`.
    fn norm_at(&self, p: PExponent) -> f64;

    /// `⟨functional, element⟩`.
    fn apply(functional: &Self, element: &Self) -> f64;

    /// Exponent carried by the element itself, if any.
    fn exponent(&self) -> Option<PExponent>;
}

impl SpaceElement for SeqVector {
    fn norm_at(&self, p: PExponent) -> f64 {
        self.lp_norm(p)
    }

    fn apply(functional: &Self, element: &Self) -> f64 {
        functional.pairing(element)
    }

    fn exponent(&self) -> Option<PExponent> {
        None
    }
}

impl SpaceElement for TwistedVector {
    fn norm_at(&self, p: PExponent) -> f64 {
        self.x.sub(&omega_p(&self.y, p)).lp_norm(p) + self.y.lp_norm(p)
    }

    fn apply(functional: &Self, element: &Self) -> f64 {
        twisted_pairing(element, functional)
    }

    fn exponent(&self) -> Option<PExponent> {
        Some(self.p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Family<V> {
    pub a: Vec<V>,
    pub a_star: Vec<V>,
}

impl<V> Family<V> {
    pub fn new(a: Vec<V>, a_star: Vec<V>) -> Self {
        Self { a, a_star }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Families {
    Ellp(Vec<Family<SeqVector>>),
    Zp(Vec<Family<TwistedVector>>),
}

impl Families {
    pub fn len(&self) -> usize {
        match self {
            Self::Ellp(f) => f.len(),
            Self::Zp(f) => f.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn tag(&self) -> SpaceTag {
        match self {
            Self::Ellp(_) => SpaceTag::Ellp,
            Self::Zp(_) => SpaceTag::Zp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SystemRepr", into = "SystemRepr")]
pub struct BiorthSystem {
    p: PExponent,
    delta: f64,
    families: Families,
}

fn check_structure<V: SpaceElement>(families: &[Family<V>], p: PExponent) -> Result<()> {
    if families.len() < 2 {
        return Err(Error::MalformedSystem(format!(
            "need at least two families, got {}",
            families.len()
        )));
    }
    let q = p.dual();
    for (j, fam) in families.iter().enumerate() {
        if fam.a.is_empty() || fam.a_star.is_empty() {
            return Err(Error::MalformedSystem(format!(
                "family {} has an empty side",
                j + 1
            )));
        }
        let elements = fam.a.iter().map(|v| (v, p));
        let functionals = fam.a_star.iter().map(|v| (v, q));
        for (v, expected) in elements.chain(functionals) {
            if let Some(found) = v.exponent() {
                if found != expected {
                    return Err(Error::MalformedSystem(format!(
                        "family {}: element at p = {found}, expected {expected}",
                        j + 1
                    )));
                }
            }
        }
    }
    Ok(())
}

impl BiorthSystem {
    pub fn new(p: PExponent, delta: f64, families: Families) -> Result<Self> {
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::DeltaOutOfRange(delta));
        }
        match &families {
            Families::Ellp(f) => check_structure(f, p)?,
            Families::Zp(f) => check_structure(f, p)?,
        }
        Ok(Self { p, delta, families })
    }

    pub fn ellp(p: PExponent, delta: f64, families: Vec<Family<SeqVector>>) -> Result<Self> {
        Self::new(p, delta, Families::Ellp(families))
    }

    pub fn p(&self) -> PExponent {
        self.p
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn space(&self) -> SpaceTag {
        self.families.tag()
    }

    pub fn families(&self) -> &Families {
        &self.families
    }

    pub fn len(&self) -> usize {
        self.families.len()
    }

    pub fn is_empty(&self) -> bool {
        self.families.is_empty()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::MalformedSystem(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("system serializes")
    }
}

/// Worst-case pairing margins of a system: same-index pairings against
/// `1 − δ`, cross pairings against `δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiorthReport {
    pub space: SpaceTag,
    pub p: f64,
    pub delta: f64,
    /// `margins[j][j] = min_{x∈A_j} max_{x*∈A_j*} ⟨x*, x⟩`;
    /// `margins[j][k] = max_{x∈A_j, x*∈A_k*} ⟨x*, x⟩` for `j ≠ k`.
    pub margins: Vec<Vec<f64>>,
    pub worst_same_index: f64,
    pub worst_cross: f64,
    /// `max |⟨x*, x⟩|` over cross pairs; the renorming uses moduli.
    pub worst_cross_abs: f64,
    pub max_norm_defect: f64,
    pub max_dual_norm: f64,
    pub same_index_ok: bool,
    pub cross_ok: bool,
    pub norms_ok: bool,
}

impl BiorthReport {
    pub fn passes(&self) -> bool {
        self.same_index_ok && self.cross_ok && self.norms_ok
    }

    fn failure_summary(&self) -> String {
        let mut parts = Vec::new();
        if !self.same_index_ok {
            parts.push(format!(
                "same-index margin {} < 1 - delta = {}",
                self.worst_same_index,
                1.0 - self.delta
            ));
        }
        if !self.cross_ok {
            parts.push(format!(
                "cross margin {} > delta = {}",
                self.worst_cross, self.delta
            ));
        }
        if !self.norms_ok {
            parts.push(format!(
                "norm defect {} / dual norm {}",
                self.max_norm_defect, self.max_dual_norm
            ));
        }
        parts.join("; ")
    }
}

fn validate_families<V: SpaceElement>(
    families: &[Family<V>],
    p: PExponent,
    delta: f64,
    space: SpaceTag,
) -> BiorthReport {
    let q = p.dual();
    let m = families.len();
    let mut margins = vec![vec![0.0; m]; m];
    let mut worst_same = f64::INFINITY;
    let mut worst_cross = f64::NEG_INFINITY;
    let mut worst_cross_abs = 0.0_f64;
    for (j, fj) in families.iter().enumerate() {
        for (k, fk) in families.iter().enumerate() {
            let per_element = fj.a.iter().map(|x| {
                fk.a_star
                    .iter()
                    .map(|f| V::apply(f, x))
                    .fold(f64::NEG_INFINITY, f64::max)
            });
            if j == k {
                let m = per_element.fold(f64::INFINITY, f64::min);
                worst_same = worst_same.min(m);
                margins[j][k] = m;
            } else {
                let m = per_element.fold(f64::NEG_INFINITY, f64::max);
                worst_cross = worst_cross.max(m);
                margins[j][k] = m;
                for x in &fj.a {
                    for f in &fk.a_star {
                        worst_cross_abs = worst_cross_abs.max(V::apply(f, x).abs());
                    }
                }
            }
        }
    }
    let max_norm_defect = families
        .iter()
        .flat_map(|f| &f.a)
        .map(|x| (x.norm_at(p) - 1.0).abs())
        .fold(0.0, f64::max);
    let max_dual_norm = families
        .iter()
        .flat_map(|f| &f.a_star)
        .map(|f| f.norm_at(q))
        .fold(0.0, f64::max);
    BiorthReport {
        space,
        p: p.value(),
        delta,
        margins,
        worst_same_index: worst_same,
        worst_cross,
        worst_cross_abs,
        max_norm_defect,
        max_dual_norm,
        same_index_ok: worst_same >= 1.0 - delta - NORM_TOLERANCE,
        cross_ok: worst_cross <= delta + NORM_TOLERANCE,
        norms_ok: max_norm_defect <= NORM_TOLERANCE && max_dual_norm <= 1.0 + NORM_TOLERANCE,
    }
}

pub fn validate_biorth(sys: &BiorthSystem) -> BiorthReport {
    match &sys.families {
        Families::Ellp(f) => validate_families(f, sys.p, sys.delta, SpaceTag::Ellp),
        Families::Zp(f) => validate_families(f, sys.p, sys.delta, SpaceTag::Zp),
    }
}

/// `ε‖x‖ + max_{x*∈functionals} |⟨x*, x⟩|`.
pub fn renorm<V: SpaceElement>(x: &V, eps: f64, functionals: &[V], p: PExponent) -> Result<f64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {eps}"
        )));
    }
    if functionals.is_empty() {
        return Err(Error::InvalidArgument(
            "renorming needs a nonempty functional set".into(),
        ));
    }
    let sup = functionals
        .iter()
        .map(|f| V::apply(f, x).abs())
        .fold(0.0, f64::max);
    Ok(eps * x.norm_at(p) + sup)
}

/// `(1 + ε − δ)/(ε + δ)`.
pub fn distortion_bound(delta: f64, eps: f64) -> f64 {
    (1.0 + eps - delta) / (eps + delta)
}

/// Location of an element: 1-based family and 1-based position inside `A_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementRef {
    pub family: usize,
    pub element: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub epsilon: f64,
    pub delta: f64,
    pub index: usize,
    pub ratio: f64,
    pub bound: f64,
    pub holds: bool,
    pub numerator: f64,
    pub denominator: f64,
    pub witness: (ElementRef, ElementRef),
}

fn distortion_families<V: SpaceElement>(
    families: &[Family<V>],
    p: PExponent,
    delta: f64,
    eps: f64,
    index: usize,
) -> Result<DistortionReport> {
    let j0 = index - 1;
    let functionals = &families[j0].a_star;
    let mut top: Option<(f64, ElementRef)> = None;
    for (e, x) in families[j0].a.iter().enumerate() {
        let r = renorm(x, eps, functionals, p)?;
        if top.is_none_or(|(best, _)| r > best) {
            top = Some((
                r,
                ElementRef {
                    family: index,
                    element: e + 1,
                },
            ));
        }
    }
    let mut bottom: Option<(f64, ElementRef)> = None;
    for (k, fam) in families.iter().enumerate().filter(|&(k, _)| k != j0) {
        for (e, y) in fam.a.iter().enumerate() {
            let r = renorm(y, eps, functionals, p)?;
            if bottom.is_none_or(|(best, _)| r < best) {
                bottom = Some((
                    r,
                    ElementRef {
                        family: k + 1,
                        element: e + 1,
                    },
                ));
            }
        }
    }
    let (numerator, wx) = top.expect("families are nonempty");
    let (denominator, wy) = bottom.expect("at least two families");
    let ratio = numerator / denominator;
    let bound = distortion_bound(delta, eps);
    Ok(DistortionReport {
        epsilon: eps,
        delta,
        index,
        ratio,
        bound,
        holds: ratio >= bound - DISTORTION_TOLERANCE,
        numerator,
        denominator,
        witness: (wx, wy),
    })
}

/// Largest ratio `|||x||| / |||y|||` of the renorming built on `A_1*`, with
/// `x ∈ A_1` and `y` in the other families, against `(1 + ε − δ)/(ε + δ)`.
pub fn distortion_lower_bound(sys: &BiorthSystem, eps: f64) -> Result<DistortionReport> {
    distortion_lower_bound_at(sys, eps, 1)
}

/// As [`distortion_lower_bound`] with the renorming built on `A_index*`.
pub fn distortion_lower_bound_at(
    sys: &BiorthSystem,
    eps: f64,
    index: usize,
) -> Result<DistortionReport> {
    if index == 0 || index > sys.len() {
        return Err(Error::InvalidArgument(format!(
            "distinguished index {index} outside 1..={}",
            sys.len()
        )));
    }
    let report = validate_biorth(sys);
    if !report.passes() {
        return Err(Error::ValidationFailed(report.failure_summary()));
    }
    match &sys.families {
        Families::Ellp(f) => distortion_families(f, sys.p, sys.delta, eps, index),
        Families::Zp(f) => distortion_families(f, sys.p, sys.delta, eps, index),
    }
}

/// `Â_j = {(x, 0)}`, `Â_j* = {(Ω_q(x*), x*)}` with `q` the dual exponent.
pub fn lift_system(sys: &BiorthSystem) -> Result<BiorthSystem> {
    let Families::Ellp(families) = &sys.families else {
        return Err(Error::InvalidArgument(
            "only an ellp system can be lifted".into(),
        ));
    };
    let report = validate_biorth(sys);
    if !report.passes() {
        return Err(Error::ValidationFailed(report.failure_summary()));
    }
    let (p, q) = (sys.p, sys.p.dual());
    let lifted = families
        .iter()
        .map(|fam| Family {
            a: fam
                .a
                .iter()
                .map(|x| TwistedVector::first(x.clone(), p))
                .collect(),
            a_star: fam
                .a_star
                .iter()
                .map(|b| TwistedVector::lifted(b.clone(), q))
                .collect(),
        })
        .collect();
    BiorthSystem::new(p, sys.delta, Families::Zp(lifted))
}

#[derive(Clone, Serialize, Deserialize)]
struct SystemRepr {
    p: PExponent,
    delta: f64,
    space: SpaceTag,
    families: Vec<FamilyRepr>,
}

#[derive(Clone, Serialize, Deserialize)]
struct FamilyRepr {
    #[serde(rename = "A")]
    a: Vec<ElementRepr>,
    #[serde(rename = "Astar")]
    a_star: Vec<ElementRepr>,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum ElementRepr {
    Pair { x: SeqVector, y: SeqVector },
    Seq(SeqVector),
}

impl ElementRepr {
    fn into_seq(self) -> Result<SeqVector> {
        match self {
            Self::Seq(v) => Ok(v),
            Self::Pair { .. } => Err(Error::MalformedSystem(
                "pair element in an ellp system".into(),
            )),
        }
    }

    fn into_pair(self, p: PExponent) -> Result<TwistedVector> {
        match self {
            Self::Pair { x, y } => Ok(TwistedVector::new(x, y, p)),
            Self::Seq(_) => Err(Error::MalformedSystem(
                "sequence element in a zp system".into(),
            )),
        }
    }
}

impl TryFrom<SystemRepr> for BiorthSystem {
    type Error = Error;

    fn try_from(repr: SystemRepr) -> Result<Self> {
        let (p, q) = (repr.p, repr.p.dual());
        let families = match repr.space {
            SpaceTag::Ellp => Families::Ellp(
                repr.families
                    .into_iter()
                    .map(|f| {
                        Ok(Family {
                            a: f.a
                                .into_iter()
                                .map(ElementRepr::into_seq)
                                .collect::<Result<_>>()?,
                            a_star: f
                                .a_star
                                .into_iter()
                                .map(ElementRepr::into_seq)
                                .collect::<Result<_>>()?,
                        })
                    })
                    .collect::<Result<_>>()?,
            ),
            SpaceTag::Zp => Families::Zp(
                repr.families
                    .into_iter()
                    .map(|f| {
                        Ok(Family {
                            a: f.a
                                .into_iter()
                                .map(|e| e.into_pair(p))
                                .collect::<Result<_>>()?,
                            a_star: f
                                .a_star
                                .into_iter()
                                .map(|e| e.into_pair(q))
                                .collect::<Result<_>>()?,
                        })
                    })
                    .collect::<Result<_>>()?,
            ),
        };
        BiorthSystem::new(p, repr.delta, families)
    }
}

impl From<BiorthSystem> for SystemRepr {
    fn from(sys: BiorthSystem) -> Self {
        let space = sys.space();
        let families = match sys.families {
            Families::Ellp(f) => f
                .into_iter()
                .map(|f| FamilyRepr {
                    a: f.a.into_iter().map(ElementRepr::Seq).collect(),
                    a_star: f.a_star.into_iter().map(ElementRepr::Seq).collect(),
                })
                .collect(),
            Families::Zp(f) => {
                let pair = |z: TwistedVector| ElementRepr::Pair { x: z.x, y: z.y };
                f.into_iter()
                    .map(|f| FamilyRepr {
                        a: f.a.into_iter().map(pair).collect(),
                        a_star: f.a_star.into_iter().map(pair).collect(),
                    })
                    .collect()
            }
        };
        SystemRepr {
            p: sys.p,
            delta: sys.delta,
            space,
            families,
        }
    }
}
