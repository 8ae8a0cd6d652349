use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use super::Evaluator;
use crate::problem::{EvalError, Problem};

/// Largest `m` with `m^d <= budget`.
pub fn resolution(budget: usize, d: usize) -> usize {
    let mut m = (budget as f64).powf(1.0 / d as f64).round() as usize;
    let fits = |m: usize| (m as u128).checked_pow(d as u32).is_some_and(|p| p <= budget as u128);
    while m > 1 && !fits(m) {
        m -= 1;
    }
    while fits(m + 1) {
        m += 1;
    }
    m.max(1)
}

/// Stratum midpoints `(i + 0.5) / m` of the full `m^d` grid, last
/// coordinate varying fastest.
pub fn make_grid(budget: usize, d: usize) -> Vec<Vec<f64>> {
    let m = resolution(budget.max(1), d);
    let total = m.pow(d as u32);
    (0..total)
        .map(|mut k| {
            let mut p = vec![0.0; d];
            for j in (0..d).rev() {
                p[j] = ((k % m) as f64 + 0.5) / m as f64;
                k /= m;
            }
            p
        })
        .collect()
}

pub(super) fn run<P: Problem + ?Sized>(
    ev: &mut Evaluator<'_, P>,
    rng: &mut ChaCha8Rng,
) -> Result<(), EvalError> {
    let mut points = make_grid(ev.remaining(), ev.dim());
    points.shuffle(rng);
    for p in points {
        ev.eval(&p)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolutions() {
        assert_eq!(resolution(100, 2), 10);
        assert_eq!(resolution(250, 5), 3);
        assert_eq!(resolution(150, 3), 5);
        assert_eq!(resolution(1, 3), 1);
        assert_eq!(resolution(125, 3), 5);
        assert_eq!(resolution(124, 3), 4);
    }

    #[test]
    fn grid_sizes() {
        assert_eq!(make_grid(100, 2).len(), 100);
        assert_eq!(make_grid(250, 5).len(), 243);
        assert_eq!(make_grid(1, 3), vec![vec![0.5, 0.5, 0.5]]);
        assert_eq!(make_grid(4, 2)[1], vec![0.25, 0.75]);
    }
}
