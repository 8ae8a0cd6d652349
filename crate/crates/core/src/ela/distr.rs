//! Distribution of the objective values: moments and modes.

use super::{ElaError, FeatureVector};
use crate::design::ElaSample;

const GRID: usize = 512;
const PEAK_FRACTION: f64 = 0.1;

/// Silverman's rule of thumb, with the usual fallbacks when the spread
/// estimate is zero.
pub fn silverman_bandwidth(z: &[f64]) -> f64 {
    let mut s = z.to_vec();
    s.sort_by(f64::total_cmp);
    let sd = crate::stats::sd(z);
    let iqr = crate::stats::quantile_sorted(&s, 0.75) - crate::stats::quantile_sorted(&s, 0.25);
    let mut lo = sd.min(iqr / 1.34);
    if lo == 0.0 {
        lo = sd;
    }
    if lo == 0.0 {
        lo = z[0].abs();
    }
    if lo == 0.0 {
        lo = 1.0;
    }
    0.9 * lo * (z.len() as f64).powf(-0.2)
}

/// Gaussian kernel density estimate of `z` on an evenly spaced grid over
/// `[min - 3h, max + 3h]`. Returns grid points and densities.
pub fn kde(z: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let h = silverman_bandwidth(z);
    let lo = z.iter().copied().fold(f64::INFINITY, f64::min) - 3.0 * h;
    let hi = z.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 3.0 * h;
    let norm = 1.0 / (z.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    let grid: Vec<f64> = (0..GRID)
        .map(|i| lo + (hi - lo) * i as f64 / (GRID - 1) as f64)
        .collect();
    let dens = grid
        .iter()
        .map(|g| {
            norm * z
                .iter()
                .map(|v| {
                    let u = (g - v) / h;
                    (-0.5 * u * u).exp()
                })
                .sum::<f64>()
        })
        .collect();
    (grid, dens)
}

/// Number of local maxima of the density that reach a tenth of its peak.
pub fn number_of_peaks(z: &[f64]) -> usize {
    let (_, d) = kde(z);
    let top = d.iter().copied().fold(0.0, f64::max);
    (1..d.len() - 1)
        .filter(|&i| d[i] > d[i - 1] && d[i] >= d[i + 1] && d[i] >= PEAK_FRACTION * top)
        .count()
}

/// Biased skewness `g1`, excess kurtosis `g2` and the KDE mode count.
pub fn features_ela_distr(sample: &ElaSample) -> Result<FeatureVector, ElaError> {
    let z = sample.z();
    if z.len() < 4 {
        return Err(ElaError::InsufficientSample {
            set: "ela_distr",
            needed: 4,
            got: z.len(),
        });
    }
    let n = z.len() as f64;
    let m = crate::stats::mean(z);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in z {
        let d = v - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if !(m2 > 0.0) {
        return Err(ElaError::DegenerateFitness);
    }
    let mut out = FeatureVector::new();
    out.push("ela_distr.skewness", m3 / m2.powf(1.5));
    out.push("ela_distr.kurtosis", m4 / (m2 * m2) - 3.0);
    out.push("ela_distr.number_of_peaks", number_of_peaks(z) as f64);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn one_d(z: Vec<f64>) -> ElaSample {
        let x = (0..z.len()).map(|i| vec![i as f64]).collect();
        ElaSample::new(x, z).unwrap()
    }

    #[test]
    fn mirrored_sample_has_no_skew() {
        let half = [0.3, 1.7, 2.2, 0.01, 5.0];
        let z: Vec<f64> = half.iter().flat_map(|v| [*v, -*v]).collect();
        let f = features_ela_distr(&one_d(z)).unwrap();
        assert!(f.get("ela_distr.skewness").unwrap().abs() < 1e-9);
    }

    #[test]
    fn gaussian_has_small_excess_kurtosis() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let z: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let f = features_ela_distr(&one_d(z)).unwrap();
        assert!(f.get("ela_distr.kurtosis").unwrap().abs() < 0.15);
    }

    #[test]
    fn two_separated_clusters_give_two_peaks() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let z: Vec<f64> = (0..200)
            .map(|i| {
                let e: f64 = StandardNormal.sample(&mut rng);
                let c = if i % 2 == 0 { -3.0 } else { 3.0 };
                c + 0.1 * e
            })
            .collect();
        assert_eq!(number_of_peaks(&z), 2);
    }

    #[test]
    fn unimodal_sample_has_one_peak() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let z: Vec<f64> = (0..500).map(|_| StandardNormal.sample(&mut rng)).collect();
        assert_eq!(number_of_peaks(&z), 1);
    }

    #[test]
    fn constant_values_are_degenerate() {
        assert_eq!(
            features_ela_distr(&one_d(vec![2.0; 10])),
            Err(ElaError::DegenerateFitness)
        );
    }

    #[test]
    fn bandwidth_matches_hand_value() {
        // sd = 1.5811388, IQR = 2 -> lo = 1.4925373
        let z = [1.0, 2.0, 3.0, 4.0, 5.0];
        let expected = 0.9 * (2.0f64 / 1.34) * 5f64.powf(-0.2);
        assert!((silverman_bandwidth(&z) - expected).abs() < 1e-12);
    }
}
