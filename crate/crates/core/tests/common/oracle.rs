//! Dense reference implementations used as independent oracles. Nothing here
//! calls into `zp_core`; vectors are plain `Vec<f64>` indexed from 0.

#![allow(dead_code)]

pub fn lp(x: &[f64], p: f64) -> f64 {
    x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// `x_i ln(|x_i| / ‖x‖_p)` with zero coordinates left at zero.
pub fn omega(x: &[f64], p: f64) -> Vec<f64> {
    let n = lp(x, p);
    x.iter()
        .map(|&v| {
            if v == 0.0 {
                0.0
            } else {
                v * (v.abs() / n).ln()
            }
        })
        .collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let len = a.len().max(b.len());
    (0..len)
        .map(|i| a.get(i).copied().unwrap_or(0.0) + b.get(i).copied().unwrap_or(0.0))
        .collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    add(a, &b.iter().map(|v| -v).collect::<Vec<_>>())
}

pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

/// `‖Ω(Σu_j) − ΣΩ(u_j)‖_p` coordinate by coordinate.
pub fn log_lift(blocks: &[Vec<f64>], p: f64) -> f64 {
    let total = blocks.iter().fold(Vec::new(), |acc, b| add(&acc, b));
    let diff = blocks
        .iter()
        .fold(omega(&total, p), |acc, b| sub(&acc, &omega(b, p)));
    lp(&diff, p)
}

/// `‖x − Ω(y)‖_p + ‖y‖_p`.
pub fn quasi_norm(x: &[f64], y: &[f64], p: f64) -> f64 {
    lp(&sub(x, &omega(y, p)), p) + lp(y, p)
}

/// `‖Ω(ax) − aΩ(x)‖_p`.
pub fn defect(a: &[f64], x: &[f64], p: f64) -> f64 {
    lp(&sub(&omega(&mul(a, x), p), &mul(a, &omega(x, p))), p)
}
