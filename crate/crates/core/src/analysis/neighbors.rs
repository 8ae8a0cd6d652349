//! Nearest BBOB problem for each HPO problem in principal-component space.

use serde::Serialize;

use super::AnalysisError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeighborMatch {
    pub hpo_id: String,
    pub bbob_id: String,
    pub distance: f64,
}

/// Exact Euclidean nearest neighbour on the first two score coordinates.
/// Equidistant candidates resolve to the lexicographically smallest ID.
pub fn nearest_bbob_neighbor(
    hpo: &[(String, Vec<f64>)],
    bbob: &[(String, Vec<f64>)],
) -> Result<Vec<NeighborMatch>, AnalysisError> {
    if bbob.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    let d2 = |a: &[f64], b: &[f64]| (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2);
    hpo.iter()
        .map(|(id, s)| {
            if s.len() < 2 {
                return Err(AnalysisError::InvalidParam(format!("{id}: fewer than two scores")));
            }
            let mut best = &bbob[0];
            let mut best_d = d2(s, &best.1);
            for cand in &bbob[1..] {
                let d = d2(s, &cand.1);
                if d < best_d || (d == best_d && cand.0 < best.0) {
                    best = cand;
                    best_d = d;
                }
            }
            Ok(NeighborMatch {
                hpo_id: id.clone(),
                bbob_id: best.0.clone(),
                distance: best_d.sqrt(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(id: &str, a: f64, b: f64) -> (String, Vec<f64>) {
        (id.to_string(), vec![a, b])
    }

    #[test]
    fn exact_hit_and_tie_rule() {
        let bbob = vec![pt("f2", 1.0, 0.0), pt("f1", -1.0, 0.0), pt("f3", 0.5, 0.5)];
        let m = nearest_bbob_neighbor(&[pt("h", 0.5, 0.5), pt("t", 0.0, -3.0)], &bbob).unwrap();
        assert_eq!(m[0].bbob_id, "f3");
        assert_eq!(m[0].distance, 0.0);
        assert_eq!(m[1].bbob_id, "f1");
        assert!(nearest_bbob_neighbor(&[pt("h", 0.0, 0.0)], &[]).is_err());
    }
}
