//! Information content of the objective along a nearest-neighbour tour.

use super::{ElaError, FeatureVector};
use crate::design::ElaSample;
use crate::stats::euclidean;

const EPS_GRID_LEN: usize = 1000;
const SETTLING: f64 = 0.05;

/// `0` followed by 1000 values log-spaced over `[1e-5, 1e15]`.
pub fn epsilon_grid() -> Vec<f64> {
    let mut g = Vec::with_capacity(EPS_GRID_LEN + 1);
    g.push(0.0);
    g.extend((0..EPS_GRID_LEN).map(|i| {
        let e = -5.0 + 20.0 * i as f64 / (EPS_GRID_LEN - 1) as f64;
        10f64.powf(e)
    }));
    g
}

/// Greedy tour from `start`: always move to the closest unvisited point,
/// lowest index on ties.
pub fn nn_tour(x: &[Vec<f64>], start: usize) -> Vec<usize> {
    let n = x.len();
    let mut visited = vec![false; n];
    let mut tour = Vec::with_capacity(n);
    let mut cur = start;
    visited[cur] = true;
    tour.push(cur);
    for _ in 1..n {
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for j in 0..n {
            if !visited[j] {
                let d = euclidean(&x[cur], &x[j]);
                if d < best_d {
                    best_d = d;
                    best = j;
                }
            }
        }
        visited[best] = true;
        tour.push(best);
        cur = best;
    }
    tour
}

/// Objective slopes between consecutive tour points.
pub fn slopes(x: &[Vec<f64>], z: &[f64], tour: &[usize]) -> Result<Vec<f64>, ElaError> {
    tour.windows(2)
        .map(|w| {
            let step = euclidean(&x[w[0]], &x[w[1]]);
            if step == 0.0 {
                Err(ElaError::DegenerateStep(w[0], w[1]))
            } else {
                Ok((z[w[1]] - z[w[0]]) / step)
            }
        })
        .collect()
}

pub fn symbols(r: &[f64], eps: f64) -> Vec<i8> {
    r.iter()
        .map(|v| {
            if *v > eps {
                1
            } else if *v < -eps {
                -1
            } else {
                0
            }
        })
        .collect()
}

/// Base-6 entropy of the consecutive unequal symbol pairs.
pub fn entropy(psi: &[i8]) -> f64 {
    if psi.len() < 2 {
        return 0.0;
    }
    let mut counts = [[0usize; 3]; 3];
    for w in psi.windows(2) {
        counts[(w[0] + 1) as usize][(w[1] + 1) as usize] += 1;
    }
    let total = (psi.len() - 1) as f64;
    let mut h = 0.0;
    for (a, row) in counts.iter().enumerate() {
        for (b, &c) in row.iter().enumerate() {
            if a != b && c > 0 {
                let p = c as f64 / total;
                h -= p * p.log(6.0);
            }
        }
    }
    h
}

/// Runs of non-zero symbols, counted after dropping zeros, as a fraction of
/// the sequence length.
pub fn partial_information(psi: &[i8]) -> f64 {
    if psi.is_empty() {
        return 0.0;
    }
    let mut runs = 0usize;
    let mut last = 0i8;
    for &s in psi.iter().filter(|s| **s != 0) {
        if s != last {
            runs += 1;
            last = s;
        }
    }
    runs as f64 / psi.len() as f64
}

/// Entropy profile `H(ε)` over [`epsilon_grid`] for the tour started at
/// `start`.
pub fn entropy_profile(sample: &ElaSample, start: usize) -> Result<(Vec<f64>, Vec<f64>), ElaError> {
    let tour = nn_tour(sample.x(), start);
    let r = slopes(sample.x(), sample.z(), &tour)?;
    let grid = epsilon_grid();
    let h = grid.iter().map(|e| entropy(&symbols(&r, *e))).collect();
    Ok((grid, h))
}

pub fn features_ic(sample: &ElaSample) -> Result<FeatureVector, ElaError> {
    features_ic_from(sample, 0)
}

/// Information-content features for a tour starting at `start`.
pub fn features_ic_from(sample: &ElaSample, start: usize) -> Result<FeatureVector, ElaError> {
    if sample.len() < 3 {
        return Err(ElaError::InsufficientSample {
            set: "ic",
            needed: 3,
            got: sample.len(),
        });
    }
    let tour = nn_tour(sample.x(), start);
    let r = slopes(sample.x(), sample.z(), &tour)?;
    let grid = epsilon_grid();
    let h: Vec<f64> = grid.iter().map(|e| entropy(&symbols(&r, *e))).collect();

    let mut imax = 0;
    for (i, v) in h.iter().enumerate() {
        if *v > h[imax] {
            imax = i;
        }
    }
    let eps_s = match h.iter().position(|v| *v < SETTLING) {
        Some(i) => grid[i],
        None => {
            return Err(ElaError::Undefined {
                feature: "ic.eps.s",
                reason: "entropy never settles",
            })
        }
    };
    let eps_max = grid[imax];
    let ratio = (eps_s / eps_max).log10();
    if !ratio.is_finite() {
        return Err(ElaError::Undefined {
            feature: "ic.eps.ratio",
            reason: "zero threshold in ratio",
        });
    }
    let mut out = FeatureVector::new();
    out.push("ic.h.max", h[imax]);
    out.push("ic.eps.s", eps_s);
    out.push("ic.eps.max", eps_max);
    out.push("ic.eps.ratio", ratio);
    out.push("ic.m0", partial_information(&symbols(&r, 0.0)));
    Ok(out)
}
