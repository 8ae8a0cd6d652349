//! Classification trees grown greedily on Gini impurity.

use serde::{Deserialize, Serialize};

use super::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CartParams {
    /// `None` grows until nodes are pure or cannot be split.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
}

impl Default for CartParams {
    fn default() -> Self {
        Self {
            max_depth: Some(4),
            min_leaf: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum Node {
    Leaf {
        label: usize,
        /// Training rows per class reaching this leaf.
        counts: Vec<usize>,
    },
    Split {
        feature: usize,
        /// Rows with `x[feature] <= threshold` go left.
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    /// Nested JSON with feature names instead of indices.
    pub fn to_json(&self, feature_names: &[String], class_names: &[String]) -> serde_json::Value {
        match self {
            Node::Leaf { label, counts } => serde_json::json!({
                "label": class_names.get(*label).cloned().unwrap_or_else(|| label.to_string()),
                "counts": counts,
            }),
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => serde_json::json!({
                "feature": feature_names.get(*feature).cloned().unwrap_or_else(|| feature.to_string()),
                "threshold": threshold,
                "left": left.to_json(feature_names, class_names),
                "right": right.to_json(feature_names, class_names),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeModel {
    pub root: Node,
    pub n_classes: usize,
    pub params: CartParams,
}

fn gini_sum(counts: &[usize], n: usize) -> f64 {
    // n * Gini impurity, so weighted child impurities add up directly.
    if n == 0 {
        return 0.0;
    }
    let sq: usize = counts.iter().map(|c| c * c).sum();
    n as f64 - sq as f64 / n as f64
}

fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &v) in counts.iter().enumerate() {
        if v > counts[best] {
            best = c;
        }
    }
    best
}

struct Best {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

/// Best split of the rows in `idx`, or `None` when no split leaves both
/// sides with `min_leaf` rows. Ties in impurity go to the lower feature,
/// then the lower threshold.
fn best_split(x: &[Vec<f64>], y: &[usize], idx: &[usize], n_classes: usize, min_leaf: usize) -> Option<Best> {
    let n = idx.len();
    let p = x[idx[0]].len();
    let total = {
        let mut c = vec![0; n_classes];
        for &i in idx {
            c[y[i]] += 1;
        }
        c
    };
    let mut best: Option<Best> = None;
    let mut order = idx.to_vec();
    for f in 0..p {
        order.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
        let mut left = vec![0usize; n_classes];
        for pos in 0..n - 1 {
            left[y[order[pos]]] += 1;
            let lo = x[order[pos]][f];
            let hi = x[order[pos + 1]][f];
            let nl = pos + 1;
            if lo == hi || nl < min_leaf || n - nl < min_leaf {
                continue;
            }
            let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
            let impurity = gini_sum(&left, nl) + gini_sum(&right, n - nl);
            let threshold = lo + (hi - lo) / 2.0;
            if best.as_ref().is_none_or(|b| impurity < b.impurity - 1e-12) {
                best = Some(Best {
                    feature: f,
                    threshold,
                    impurity,
                });
            }
        }
    }
    best
}

fn grow(x: &[Vec<f64>], y: &[usize], idx: Vec<usize>, n_classes: usize, params: &CartParams, depth: usize) -> Node {
    let mut counts = vec![0usize; n_classes];
    for &i in &idx {
        counts[y[i]] += 1;
    }
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    let depth_left = params.max_depth.is_none_or(|m| depth < m);
    if pure || !depth_left || idx.len() < 2 * params.min_leaf {
        return Node::Leaf {
            label: majority(&counts),
            counts,
        };
    }
    let Some(split) = best_split(x, y, &idx, n_classes, params.min_leaf) else {
        return Node::Leaf {
            label: majority(&counts),
            counts,
        };
    };
    let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| x[i][split.feature] <= split.threshold);
    Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(grow(x, y, l, n_classes, params, depth + 1)),
        right: Box::new(grow(x, y, r, n_classes, params, depth + 1)),
    }
}

/// Grows a tree on rows `x` with class indices `y`. A single-class input
/// yields a one-leaf tree.
pub fn cart_train(x: &[Vec<f64>], y: &[usize], params: CartParams) -> Result<TreeModel, AnalysisError> {
    if x.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    if x.len() != y.len() {
        return Err(AnalysisError::InvalidParam(format!("{} rows but {} labels", x.len(), y.len())));
    }
    if params.min_leaf == 0 {
        return Err(AnalysisError::InvalidParam("min_leaf must be positive".into()));
    }
    let n_classes = y.iter().max().unwrap() + 1;
    Ok(TreeModel {
        root: grow(x, y, (0..x.len()).collect(), n_classes, &params, 0),
        n_classes,
        params,
    })
}

pub fn cart_predict(model: &TreeModel, row: &[f64]) -> usize {
    let mut node = &model.root;
    loop {
        match node {
            Node::Leaf { label, .. } => return *label,
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => node = if row[*feature] <= *threshold { left } else { right },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unlimited(min_leaf: usize) -> CartParams {
        CartParams {
            max_depth: None,
            min_leaf,
        }
    }

    fn errors(m: &TreeModel, x: &[Vec<f64>], y: &[usize]) -> usize {
        x.iter().zip(y).filter(|(r, l)| cart_predict(m, r) != **l).count()
    }

    #[test]
    fn separable_feature_gives_stump() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![(i * 7 % 3) as f64, i as f64]).collect();
        let y: Vec<usize> = (0..10).map(|i| usize::from(i >= 5)).collect();
        let m = cart_train(&x, &y, unlimited(1)).unwrap();
        assert_eq!(m.root.depth(), 1);
        assert_eq!(errors(&m, &x, &y), 0);
        match m.root {
            Node::Split { feature, threshold, .. } => {
                assert_eq!(feature, 1);
                assert_eq!(threshold, 4.5);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn xor_needs_depth_two() {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                for _ in 0..3 {
                    x.push(vec![a as f64, b as f64]);
                    y.push(a ^ b);
                }
            }
        }
        let stump = cart_train(&x, &y, CartParams { max_depth: Some(1), min_leaf: 1 }).unwrap();
        assert!(errors(&stump, &x, &y) > 0);
        let deep = cart_train(&x, &y, CartParams { max_depth: Some(2), min_leaf: 1 }).unwrap();
        assert_eq!(errors(&deep, &x, &y), 0);
    }

    #[test]
    fn single_class_is_one_leaf() {
        let m = cart_train(&[vec![1.0], vec![2.0]], &[0, 0], CartParams::default()).unwrap();
        assert_eq!(m.root.depth(), 0);
    }

    #[test]
    fn min_leaf_is_respected() {
        let x: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64]).collect();
        let y = vec![1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1];
        let m = cart_train(&x, &y, CartParams { max_depth: None, min_leaf: 5 }).unwrap();
        fn check(n: &Node, min: usize) {
            match n {
                Node::Leaf { counts, .. } => assert!(counts.iter().sum::<usize>() >= min),
                Node::Split { left, right, .. } => {
                    check(left, min);
                    check(right, min);
                }
            }
        }
        check(&m.root, 5);
    }
}
