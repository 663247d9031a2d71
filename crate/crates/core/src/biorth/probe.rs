//! Finite stand-in for inevitability: how close does the unit sphere of a
//! finite-dimensional span come to a set `A_j`?
//!
//! The search minimizes `min_{a∈A} ‖u/‖u‖_p − a‖_p` over `u = Σ c_i v_i` by
//! compass search in coefficient space. It first refines the least-squares
//! projection of every `a` onto the span, then runs seeded random restarts
//! until the evaluation budget is spent. The evaluation sequence does not
//! depend on the budget, so a larger budget only extends it and the result
//! never increases.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::{gaussian_vec, stream};
use crate::seq::{lp_norm_slice, PExponent, SeqVector};

const RANK_TOLERANCE: f64 = 1e-10;
const MIN_STEP: f64 = 1e-12;
const INITIAL_STEP: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct InevitabilityProbe {
    basis: Vec<SeqVector>,
    tolerance: f64,
    search_budget: usize,
    seed: u64,
}

impl InevitabilityProbe {
    pub fn new(
        basis: Vec<SeqVector>,
        tolerance: f64,
        search_budget: usize,
        seed: u64,
    ) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::InvalidArgument("probe basis is empty".into()));
        }
        if tolerance.is_nan() || tolerance <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive, got {tolerance}"
            )));
        }
        let coords = Coordinates::new(basis.iter());
        let matrix = coords.matrix(&basis);
        let sv = matrix.singular_values();
        let top = sv.iter().copied().fold(0.0, f64::max);
        let rank = sv.iter().filter(|&&s| s > RANK_TOLERANCE * top).count();
        if basis.len() > coords.len() || rank < basis.len() {
            return Err(Error::InvalidArgument(format!(
                "probe basis of {} vectors has rank {rank}",
                basis.len()
            )));
        }
        Ok(Self {
            basis,
            tolerance,
            search_budget,
            seed,
        })
    }

    pub fn basis(&self) -> &[SeqVector] {
        &self.basis
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn search_budget(&self) -> usize {
        self.search_budget
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_budget(&self, search_budget: usize) -> Self {
        Self {
            search_budget,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxyResult {
    /// Best distance found; an upper bound on `d(S(span), A)`.
    pub distance: f64,
    pub evaluations: usize,
    /// The unit vector of the span attaining `distance`.
    pub witness: SeqVector,
    /// 1-based position of the nearest element of `A`.
    pub nearest: usize,
}

/// Dense coordinates over the union of the supports involved.
struct Coordinates {
    indices: Vec<usize>,
}

impl Coordinates {
    fn new<'a, I: Iterator<Item = &'a SeqVector>>(vectors: I) -> Self {
        let set: BTreeSet<usize> = vectors.flat_map(|v| v.support()).collect();
        Self {
            indices: set.into_iter().collect(),
        }
    }

    fn len(&self) -> usize {
        self.indices.len()
    }

    fn dense(&self, v: &SeqVector) -> Vec<f64> {
        self.indices.iter().map(|&i| v.get(i)).collect()
    }

    fn matrix(&self, columns: &[SeqVector]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.len(), columns.len());
        for (c, v) in columns.iter().enumerate() {
            for (r, x) in self.dense(v).into_iter().enumerate() {
                m[(r, c)] = x;
            }
        }
        m
    }

    fn sparse(&self, dense: &[f64]) -> SeqVector {
        SeqVector::from_entries(self.indices.iter().copied().zip(dense.iter().copied()))
            .expect("coordinates are distinct")
    }
}

struct Search<'a> {
    basis: &'a DMatrix<f64>,
    targets: &'a [Vec<f64>],
    p: PExponent,
    budget: usize,
    tolerance: f64,
    evaluations: usize,
    best: f64,
    best_point: Vec<f64>,
    best_target: usize,
}

impl Search<'_> {
    fn exhausted(&self) -> bool {
        self.evaluations >= self.budget || self.best <= self.tolerance
    }

    /// One objective evaluation, or `None` once the budget is spent.
    fn eval(&mut self, coeffs: &[f64]) -> Option<f64> {
        if self.exhausted() {
            return None;
        }
        self.evaluations += 1;
        let u = self.basis * DVector::from_column_slice(coeffs);
        let norm = lp_norm_slice(u.as_slice(), self.p);
        if norm == 0.0 || !norm.is_finite() {
            return Some(f64::INFINITY);
        }
        let u: Vec<f64> = u.iter().map(|x| x / norm).collect();
        let mut value = f64::INFINITY;
        let mut nearest = 0;
        for (k, a) in self.targets.iter().enumerate() {
            let diff: Vec<f64> = u.iter().zip(a).map(|(x, y)| x - y).collect();
            let d = lp_norm_slice(&diff, self.p);
            if d < value {
                value = d;
                nearest = k;
            }
        }
        if value < self.best {
            self.best = value;
            self.best_point = u;
            self.best_target = nearest;
        }
        Some(value)
    }

    fn local_descent(&mut self, start: Vec<f64>) {
        let mut c = normalized(start);
        let Some(mut fc) = self.eval(&c) else { return };
        let mut step = INITIAL_STEP;
        while step > MIN_STEP {
            let mut improved = false;
            'coords: for i in 0..c.len() {
                for sign in [1.0, -1.0] {
                    let mut trial = c.clone();
                    trial[i] += sign * step;
                    let trial = normalized(trial);
                    let Some(ft) = self.eval(&trial) else { return };
                    if ft < fc {
                        c = trial;
                        fc = ft;
                        improved = true;
                        break 'coords;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
    }
}

fn normalized(mut c: Vec<f64>) -> Vec<f64> {
    let n = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        c.iter_mut().for_each(|x| *x /= n);
    }
    c
}

/// Upper estimate of `min_{u ∈ S(span)} min_{a ∈ A} ‖u − a‖_p`.
pub fn inevitability_proxy(
    set: &[SeqVector],
    probe: &InevitabilityProbe,
    p: PExponent,
) -> Result<ProxyResult> {
    if probe.search_budget == 0 {
        return Err(Error::InvalidArgument(
            "search budget must be positive".into(),
        ));
    }
    if set.is_empty() {
        return Err(Error::InvalidArgument("target set is empty".into()));
    }
    let coords = Coordinates::new(probe.basis.iter().chain(set));
    let basis = coords.matrix(&probe.basis);
    let targets: Vec<Vec<f64>> = set.iter().map(|a| coords.dense(a)).collect();
    let m = probe.basis.len();

    let mut search = Search {
        basis: &basis,
        targets: &targets,
        p,
        budget: probe.search_budget,
        tolerance: probe.tolerance,
        evaluations: 0,
        best: f64::INFINITY,
        best_point: Vec::new(),
        best_target: 0,
    };

    let svd = basis.clone().svd(true, true);
    for a in &targets {
        if search.exhausted() {
            break;
        }
        if let Ok(c) = svd.solve(&DVector::from_column_slice(a), RANK_TOLERANCE) {
            let c: Vec<f64> = c.iter().copied().collect();
            if c.iter().any(|x| *x != 0.0) {
                search.local_descent(c);
            }
        }
    }
    let mut restart = 0u64;
    while !search.exhausted() {
        let start = gaussian_vec(&mut stream(probe.seed, restart), m);
        search.local_descent(start);
        restart += 1;
    }

    Ok(ProxyResult {
        distance: search.best,
        evaluations: search.evaluations,
        witness: coords.sparse(&search.best_point),
        nearest: search.best_target + 1,
    })
}
