//! Lloyd's k-means with k-means++ seeding, and silhouette-based choice of k.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::AnalysisError;
use crate::parallel::{self, Execution};

const MAX_ITER: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KMeans {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub within_ss: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn plus_plus(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids = vec![points[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut t = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, w) in d2.iter().enumerate() {
                if t < *w {
                    pick = i;
                    break;
                }
                t -= w;
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        centroids.push(points[next].clone());
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &centroids[centroids.len() - 1]));
        }
    }
    centroids
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, m) in centroids.iter().enumerate() {
        let d = sq_dist(p, m);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn lloyd(points: &[Vec<f64>], mut centroids: Vec<Vec<f64>>) -> KMeans {
    let k = centroids.len();
    let dim = points[0].len();
    let mut assignments = vec![usize::MAX; points.len()];
    for _ in 0..MAX_ITER {
        let mut changed = false;
        for (a, p) in assignments.iter_mut().zip(points) {
            let (c, _) = nearest(p, &centroids);
            if *a != c {
                *a = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (a, p) in assignments.iter().zip(points) {
            counts[*a] += 1;
            for (s, v) in sums[*a].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            } else {
                // Re-seed an empty cluster at the point farthest from its centroid.
                let far = (0..points.len())
                    .max_by(|&i, &j| {
                        let di = sq_dist(&points[i], &centroids[assignments[i]]);
                        let dj = sq_dist(&points[j], &centroids[assignments[j]]);
                        di.total_cmp(&dj).then(j.cmp(&i))
                    })
                    .unwrap();
                centroids[c] = points[far].clone();
                assignments[far] = c;
            }
        }
    }
    let within_ss = points.iter().zip(&assignments).map(|(p, a)| sq_dist(p, &centroids[*a])).sum();
    KMeans {
        k,
        assignments,
        centroids,
        within_ss,
    }
}

/// Best of `restarts` k-means runs by within-cluster sum of squares. Restart
/// `r` draws from stream `r` of a generator seeded with `seed`, so the result
/// does not depend on the execution strategy.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64, restarts: usize, exec: Execution) -> Result<KMeans, AnalysisError> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(AnalysisError::InvalidK { k, rows: n });
    }
    if restarts == 0 {
        return Err(AnalysisError::InvalidParam("restarts must be positive".into()));
    }
    let runs = parallel::map_range(exec, restarts, |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r as u64);
        lloyd(points, plus_plus(points, k, &mut rng))
    });
    let mut best = 0;
    for (r, run) in runs.iter().enumerate() {
        if run.within_ss < runs[best].within_ss {
            best = r;
        }
    }
    Ok(runs.into_iter().nth(best).unwrap())
}

/// Silhouette width of every point. Points in singleton clusters get 0.
pub fn silhouette(points: &[Vec<f64>], assignments: &[usize]) -> Vec<f64> {
    let k = assignments.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    for a in assignments {
        sizes[*a] += 1;
    }
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let own = assignments[i];
            if sizes[own] <= 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; k];
            for (j, q) in points.iter().enumerate() {
                if j != i {
                    sums[assignments[j]] += sq_dist(p, q).sqrt();
                }
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..k)
                .filter(|&c| c != own && sizes[c] > 0)
                .map(|c| sums[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            if !b.is_finite() {
                return 0.0;
            }
            let m = a.max(b);
            if m > 0.0 {
                (b - a) / m
            } else {
                0.0
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SilhouetteSelection {
    pub best_k: usize,
    /// `(k, mean silhouette width)` for every k tried.
    pub widths: Vec<(usize, f64)>,
    pub clustering: KMeans,
}

/// Runs k-means for every k in `k_min..=k_max` (capped at `rows - 1`) and
/// keeps the k with the largest mean silhouette width; ties go to the
/// smaller k.
pub fn silhouette_select(
    points: &[Vec<f64>],
    k_min: usize,
    k_max: usize,
    seed: u64,
    restarts: usize,
    exec: Execution,
) -> Result<SilhouetteSelection, AnalysisError> {
    let n = points.len();
    if k_min < 2 || k_min > k_max || k_min > n.saturating_sub(1) {
        return Err(AnalysisError::InvalidK { k: k_min, rows: n });
    }
    let mut widths = Vec::new();
    let mut best: Option<(f64, KMeans)> = None;
    for k in k_min..=k_max.min(n - 1) {
        let km = kmeans(points, k, seed, restarts, exec)?;
        let s = silhouette(points, &km.assignments);
        let w = s.iter().sum::<f64>() / n as f64;
        widths.push((k, w));
        if best.as_ref().is_none_or(|(bw, _)| w > *bw) {
            best = Some((w, km));
        }
    }
    let (_, clustering) = best.unwrap();
    Ok(SilhouetteSelection {
        best_k: clustering.k,
        widths,
        clustering,
    })
}
