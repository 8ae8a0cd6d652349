//! Gaussian-process surrogate: Matérn 5/2 kernel with one length scale per
//! dimension, constant mean and a small nugget. Length scales maximize the
//! likelihood with the mean and process variance profiled out.

use statrs::function::erf::erfc;

/// Training points used for the variance bound.
const NEAR: usize = 4;
const SQRT5: f64 = 2.236_067_977_499_79;
/// Search box for log length scales in unit-cube units.
pub const LOG_LS_BOUNDS: (f64, f64) = (-4.605_170_185_988_091, 2.995_732_273_553_991);

pub fn matern52(r: f64) -> f64 {
    let s = SQRT5 * r;
    (1.0 + s + s * s / 3.0) * exp_nonpositive(-s)
}

/// `e^x` for `x <= 0`, accurate to about one ulp. Written without branches
/// or library calls so kernel loops vectorize; arguments below -708 give a
/// value under 1e-307 instead of an underflowed zero.
#[inline(always)]
pub fn exp_nonpositive(x: f64) -> f64 {
    const LOG2E: f64 = std::f64::consts::LOG2_E;
    const LN2_HI: f64 = 6.931_471_803_691_238e-1;
    const LN2_LO: f64 = 1.908_214_929_270_587_7e-10;
    // adding 1.5 * 2^52 rounds to the nearest integer
    const SHIFTER: f64 = 6_755_399_441_055_744.0;
    let x = x.max(-708.0);
    let shifted = x * LOG2E + SHIFTER;
    let k = shifted - SHIFTER;
    let r = (x - k * LN2_HI) - k * LN2_LO;
    let mut p = 1.0 / 479_001_600.0;
    p = p * r + 1.0 / 39_916_800.0;
    p = p * r + 1.0 / 3_628_800.0;
    p = p * r + 1.0 / 362_880.0;
    p = p * r + 1.0 / 40_320.0;
    p = p * r + 1.0 / 5_040.0;
    p = p * r + 1.0 / 720.0;
    p = p * r + 1.0 / 120.0;
    p = p * r + 1.0 / 24.0;
    p = p * r + 1.0 / 6.0;
    p = p * r + 0.5;
    p = p * r + 1.0;
    p = p * r + 1.0;
    // the low mantissa bits of `shifted` hold k; moving k + 1023 into the
    // exponent field builds 2^k
    p * f64::from_bits(shifted.to_bits().wrapping_add(1023) << 52)
}

pub fn normal_cdf(u: f64) -> f64 {
    0.5 * erfc(-u / std::f64::consts::SQRT_2)
}

pub fn normal_pdf(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Expected improvement of a Gaussian prediction over `best` for
/// minimization.
pub fn expected_improvement(mean: f64, sd: f64, best: f64) -> f64 {
    let diff = best - mean;
    if !(sd > 0.0) {
        return diff.max(0.0);
    }
    let u = diff / sd;
    (diff * normal_cdf(u) + sd * normal_pdf(u)).max(0.0)
}

/// Dot product with four independent accumulators so the loop pipelines
/// and vectorizes; summation order is fixed, so results are reproducible.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// In-place Cholesky factorization of a row-major `n × n` matrix; the lower
/// triangle receives `L`. Returns `false` if the matrix is not numerically
/// positive definite.
pub fn cholesky(a: &mut [f64], n: usize) -> bool {
    for i in 0..n {
        let (done, rest) = a.split_at_mut(i * n);
        let row_i = &mut rest[..n];
        for j in 0..i {
            let row_j = &done[j * n..j * n + j];
            let s = dot(&row_i[..j], row_j);
            row_i[j] = (row_i[j] - s) / done[j * n + j];
        }
        let d = row_i[i] - dot(&row_i[..i], &row_i[..i]);
        if !(d > 0.0) || !d.is_finite() {
            return false;
        }
        row_i[i] = d.sqrt();
    }
    true
}

/// Solves `L v = b` in place.
pub fn forward_solve(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let s = dot(&l[i * n..i * n + i], &b[..i]);
        b[i] = (b[i] - s) / l[i * n + i];
    }
}

/// Solves `Lᵀ v = b` in place.
pub fn backward_solve(l: &[f64], n: usize, b: &mut [f64]) {
    for i in (0..n).rev() {
        b[i] /= l[i * n + i];
        let bi = b[i];
        for k in 0..i {
            b[k] -= l[i * n + k] * bi;
        }
    }
}

/// Squared coordinate differences of all pairs `i < j`, reused across
/// likelihood evaluations.
pub struct PairDiffs {
    n: usize,
    d: usize,
    sq: Vec<f64>,
}

impl PairDiffs {
    pub fn new(x: &[Vec<f64>]) -> Self {
        let n = x.len();
        let d = x[0].len();
        let mut sq = Vec::with_capacity(n * n.saturating_sub(1) / 2 * d);
        for i in 0..n {
            for j in i + 1..n {
                sq.extend(x[i].iter().zip(&x[j]).map(|(a, b)| (a - b) * (a - b)));
            }
        }
        Self { n, d, sq }
    }

    fn correlation(&self, inv_ls2: &[f64], nugget: f64) -> Vec<f64> {
        let n = self.n;
        let mut r = vec![0.0; n * n];
        let mut p = 0;
        for i in 0..n {
            r[i * n + i] = 1.0 + nugget;
            for j in i + 1..n {
                let s: f64 = self.sq[p * self.d..(p + 1) * self.d]
                    .iter()
                    .zip(inv_ls2)
                    .map(|(a, b)| a * b)
                    .sum();
                let k = matern52(s.sqrt());
                r[i * n + j] = k;
                r[j * n + i] = k;
                p += 1;
            }
        }
        r
    }
}

fn inv_ls2(log_ls: &[f64]) -> Vec<f64> {
    log_ls.iter().map(|l| (-2.0 * l).exp()).collect()
}

/// A fitted surrogate ready for prediction.
#[derive(Debug, Clone)]
pub struct GpFit {
    x: Vec<Vec<f64>>,
    pub log_ls: Vec<f64>,
    pub nugget: f64,
    pub mean: f64,
    pub variance: f64,
    pub neg_log_lik: f64,
    /// Training points divided by their length scales, one contiguous
    /// column per dimension.
    scaled: Vec<f64>,
    chol: Vec<f64>,
    /// Correlation matrix including the nugget, row-major.
    corr: Vec<f64>,
    alpha: Vec<f64>,
    /// Gershgorin bound on the largest eigenvalue of the correlation matrix.
    eig_bound: f64,
}

impl GpFit {
    /// Factorizes the model for fixed hyperparameters; `None` when the
    /// correlation matrix is not numerically positive definite.
    pub fn new(x: &[Vec<f64>], y: &[f64], log_ls: &[f64], nugget: f64) -> Option<Self> {
        Self::with_diffs(&PairDiffs::new(x), x, y, log_ls, nugget)
    }

    fn with_diffs(diffs: &PairDiffs, x: &[Vec<f64>], y: &[f64], log_ls: &[f64], nugget: f64) -> Option<Self> {
        let n = diffs.n;
        let ils = inv_ls2(log_ls);
        let mut l = diffs.correlation(&ils, nugget);
        let eig_bound = (0..n)
            .map(|i| l[i * n..(i + 1) * n].iter().sum::<f64>())
            .fold(0.0, f64::max);
        let corr = l.clone();
        if !cholesky(&mut l, n) {
            return None;
        }
        let mut a = vec![1.0; n];
        forward_solve(&l, n, &mut a);
        let mut b = y.to_vec();
        forward_solve(&l, n, &mut b);
        let aa: f64 = a.iter().map(|v| v * v).sum();
        let mean = a.iter().zip(&b).map(|(p, q)| p * q).sum::<f64>() / aa;
        let mut alpha: Vec<f64> = b.iter().zip(&a).map(|(q, p)| q - mean * p).collect();
        let variance = (alpha.iter().map(|v| v * v).sum::<f64>() / n as f64).max(1e-300);
        let logdet: f64 = (0..n).map(|i| l[i * n + i].ln()).sum();
        let neg_log_lik = 0.5 * n as f64 * variance.ln() + logdet;
        if !neg_log_lik.is_finite() {
            return None;
        }
        backward_solve(&l, n, &mut alpha);
        let scaled = (0..log_ls.len())
            .flat_map(|j| x.iter().map(move |p| p[j] * (-log_ls[j]).exp()))
            .collect();
        Some(Self {
            scaled,
            corr,
            x: x.to_vec(),
            log_ls: log_ls.to_vec(),
            nugget,
            mean,
            variance,
            neg_log_lik,
            chol: l,
            alpha,
            eig_bound,
        })
    }

    /// Maximizes the profiled likelihood over log length scales with a
    /// bounded Nelder–Mead search started at `start`.
    pub fn optimize(
        x: &[Vec<f64>],
        y: &[f64],
        start: &[f64],
        step: f64,
        nugget: f64,
        max_evals: usize,
    ) -> Option<Self> {
        let diffs = PairDiffs::new(x);
        let clamp = |v: &[f64]| -> Vec<f64> {
            v.iter().map(|t| t.clamp(LOG_LS_BOUNDS.0, LOG_LS_BOUNDS.1)).collect()
        };
        let objective = |v: &[f64]| {
            Self::with_diffs(&diffs, x, y, &clamp(v), nugget).map_or(f64::INFINITY, |f| f.neg_log_lik)
        };
        let (best, _) = nelder_mead(objective, &clamp(start), step, max_evals);
        Self::with_diffs(&diffs, x, y, &clamp(&best), nugget)
            .or_else(|| Self::with_diffs(&diffs, x, y, &clamp(start), nugget))
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    fn cross_correlation(&self, u: &[f64]) -> Vec<f64> {
        let mut k = Vec::with_capacity(self.x.len());
        self.cross_correlation_into(u, &mut k);
        k
    }

    fn cross_correlation_into(&self, u: &[f64], k: &mut Vec<f64>) {
        let n = self.x.len();
        k.clear();
        k.resize(n, 0.0);
        for (j, (v, t)) in u.iter().zip(&self.log_ls).enumerate() {
            let c = v * (-t).exp();
            for (acc, s) in k.iter_mut().zip(&self.scaled[j * n..(j + 1) * n]) {
                let diff = s - c;
                *acc += diff * diff;
            }
        }
        for v in k.iter_mut() {
            *v = matern52(v.sqrt());
        }
    }

    /// Predictive mean and standard deviation (noise-free).
    pub fn predict(&self, u: &[f64]) -> (f64, f64) {
        let mut k = self.cross_correlation(u);
        let mean = self.mean + dot(&k, &self.alpha);
        forward_solve(&self.chol, self.len(), &mut k);
        let explained = dot(&k, &k);
        (mean, (self.variance * (1.0 - explained)).max(0.0).sqrt())
    }

    /// Predictive mean together with a cheap upper bound on the predictive
    /// standard deviation. Conditioning on fewer observations can only
    /// raise the variance, so the bound uses the most correlated
    /// training points, and also a Gershgorin bound over all of them.
    pub fn predict_bound(&self, u: &[f64]) -> (f64, f64) {
        self.predict_bound_with(u, &mut Vec::new())
    }

    /// [`GpFit::predict_bound`] with a caller-provided scratch buffer.
    pub fn predict_bound_with(&self, u: &[f64], k: &mut Vec<f64>) -> (f64, f64) {
        self.cross_correlation_into(u, k);
        let k: &[f64] = k;
        let mean = self.mean + dot(k, &self.alpha);
        let kk = dot(k, k);
        let mut frac = (1.0 - kk / self.eig_bound).clamp(0.0, 1.0);

        // indices of the NEAR largest correlations, kept sorted descending
        let mut near = [0usize; NEAR];
        let mut m = 0;
        for (i, v) in k.iter().enumerate() {
            if m == NEAR && *v <= k[near[NEAR - 1]] {
                continue;
            }
            let mut pos = m.min(NEAR - 1);
            if m < NEAR {
                m += 1;
            }
            while pos > 0 && k[near[pos - 1]] < *v {
                near[pos] = near[pos - 1];
                pos -= 1;
            }
            near[pos] = i;
        }
        let n = self.x.len();
        let mut sub = [0.0f64; NEAR * NEAR];
        for a in 0..m {
            for b in 0..m {
                sub[a * m + b] = self.corr[near[a] * n + near[b]];
            }
        }
        if cholesky(&mut sub[..m * m], m) {
            let mut ks = [0.0f64; NEAR];
            for a in 0..m {
                ks[a] = k[near[a]];
            }
            forward_solve(&sub[..m * m], m, &mut ks[..m]);
            frac = frac.min((1.0 - dot(&ks[..m], &ks[..m])).clamp(0.0, 1.0));
        }
        // slack covers rounding in the exact computation
        (mean, (self.variance * frac).sqrt() * (1.0 + 1e-9) + 1e-12)
    }
}

/// Derivative-free minimization with the standard reflection, expansion,
/// contraction and shrink coefficients. Returns the best point and value
/// after at most `max_evals` objective calls.
pub fn nelder_mead(
    mut f: impl FnMut(&[f64]) -> f64,
    start: &[f64],
    step: f64,
    max_evals: usize,
) -> (Vec<f64>, f64) {
    let d = start.len();
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for j in 0..d {
        let mut p = start.to_vec();
        p[j] += step;
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();
    let mut evals = d + 1;
    while evals < max_evals {
        let mut order: Vec<usize> = (0..=d).collect();
        order.sort_by(|a, b| values[*a].total_cmp(&values[*b]));
        simplex = order.iter().map(|i| simplex[*i].clone()).collect();
        values = order.iter().map(|i| values[*i]).collect();
        if (values[d] - values[0]).abs() < 1e-10 * (1.0 + values[0].abs()) {
            break;
        }
        let centroid: Vec<f64> = (0..d)
            .map(|j| simplex[..d].iter().map(|p| p[j]).sum::<f64>() / d as f64)
            .collect();
        let toward = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[d])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let xr = toward(-1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < values[0] {
            let xe = toward(-2.0);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                simplex[d] = xe;
                values[d] = fe;
            } else {
                simplex[d] = xr;
                values[d] = fr;
            }
        } else if fr < values[d - 1] {
            simplex[d] = xr;
            values[d] = fr;
        } else {
            let (xc, fc) = if fr < values[d] {
                let p = toward(-0.5);
                let v = f(&p);
                (p, v)
            } else {
                let p = toward(0.5);
                let v = f(&p);
                (p, v)
            };
            evals += 1;
            if fc < values[d].min(fr) {
                simplex[d] = xc;
                values[d] = fc;
            } else {
                for i in 1..=d {
                    simplex[i] = simplex[0]
                        .iter()
                        .zip(&simplex[i])
                        .map(|(b, p)| b + 0.5 * (p - b))
                        .collect();
                    values[i] = f(&simplex[i]);
                }
                evals += d;
            }
        }
    }
    let best = (0..=d).min_by(|a, b| values[*a].total_cmp(&values[*b])).unwrap();
    (simplex[best].clone(), values[best])
}
