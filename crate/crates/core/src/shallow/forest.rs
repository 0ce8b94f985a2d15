use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Prediction, ShallowError};
use crate::seed;

pub const DEFAULT_TREES: usize = 128;
/// Minimum number of (bootstrap) samples in a leaf.
pub const MIN_LEAF: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub trees: usize,
    pub min_leaf: usize,
    /// Features examined per split; `None` means `ceil(sqrt(d))`.
    pub max_features: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            trees: DEFAULT_TREES,
            min_leaf: MIN_LEAF,
            max_features: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }
}

/// Random forest of CART regression trees.
///
/// Each tree is grown on a bootstrap resample (`n` draws with replacement)
/// using variance-reduction splits over a random feature subset. Tree `t`
/// draws its resample from the stream `derive_index(seed, t)` and its
/// feature subsets from a child stream of that seed, so trees can be grown
/// in any order or in parallel with identical results.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Forest {
    trees: Vec<Tree>,
    dim: usize,
    /// Row indices of each tree's bootstrap resample.
    resamples: Vec<Vec<usize>>,
}

/// Column-major training data shared by all trees.
struct Columns<'a> {
    cols: Vec<Vec<f64>>,
    y: &'a [f64],
}

fn validate(inputs: &[Vec<f64>], targets: &[f64]) -> Result<usize, ShallowError> {
    let n = inputs.len();
    if n < 2 {
        return Err(ShallowError::TooFewRows { n, min: 2 });
    }
    if targets.len() != n {
        return Err(ShallowError::LengthMismatch {
            inputs: n,
            targets: targets.len(),
        });
    }
    let dim = inputs[0].len();
    if let Some(bad) = inputs.iter().find(|x| x.len() != dim) {
        return Err(ShallowError::DimensionMismatch {
            expected: dim,
            got: bad.len(),
        });
    }
    if !inputs.iter().flatten().all(|v| v.is_finite()) || !targets.iter().all(|v| v.is_finite()) {
        return Err(ShallowError::NonFinite);
    }
    Ok(dim)
}

impl Forest {
    pub fn fit(
        inputs: &[Vec<f64>],
        targets: &[f64],
        params: ForestParams,
        seed: u64,
    ) -> Result<Forest, ShallowError> {
        validate(inputs, targets)?;
        if params.trees == 0 {
            return Err(ShallowError::InvalidParameter(
                "tree count must be at least 1".into(),
            ));
        }
        let n = inputs.len();
        let resamples = (0..params.trees)
            .map(|t| {
                let mut rng = seed::rng(seed::derive_index(seed, t as u64));
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            })
            .collect();
        Forest::fit_with_bootstrap(inputs, targets, params, seed, resamples)
    }

    /// Fit with explicit bootstrap resamples (one row-index list per tree).
    /// Feature sampling still uses the per-tree streams of `seed`.
    pub fn fit_with_bootstrap(
        inputs: &[Vec<f64>],
        targets: &[f64],
        params: ForestParams,
        seed: u64,
        resamples: Vec<Vec<usize>>,
    ) -> Result<Forest, ShallowError> {
        let dim = validate(inputs, targets)?;
        let n = inputs.len();
        if resamples.is_empty() {
            return Err(ShallowError::InvalidParameter(
                "tree count must be at least 1".into(),
            ));
        }
        if resamples
            .iter()
            .any(|r| r.is_empty() || r.iter().any(|&i| i >= n))
        {
            return Err(ShallowError::InvalidParameter(
                "bad bootstrap resample".into(),
            ));
        }
        let min_leaf = params.min_leaf.max(1);
        let mtry = params
            .max_features
            .unwrap_or_else(|| (dim as f64).sqrt().ceil() as usize)
            .clamp(1, dim.max(1));
        let data = Columns {
            cols: (0..dim)
                .map(|f| inputs.iter().map(|x| x[f]).collect())
                .collect(),
            y: targets,
        };
        let trees = resamples
            .par_iter()
            .enumerate()
            .map(|(t, rows)| {
                let mut rng =
                    seed::rng(seed::derive(seed::derive_index(seed, t as u64), "features"));
                grow(&data, rows.clone(), min_leaf, mtry, &mut rng)
            })
            .collect();
        Ok(Forest {
            trees,
            dim,
            resamples,
        })
    }

    pub fn tree_count(&self) -> usize {
        self.trees.len()
    }

    pub fn resamples(&self) -> &[Vec<usize>] {
        &self.resamples
    }

    /// Output of every tree, in tree order.
    pub fn tree_predictions(&self, x: &[f64]) -> Result<Vec<f64>, ShallowError> {
        if x.len() != self.dim {
            return Err(ShallowError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(self.trees.iter().map(|t| t.predict(x)).collect())
    }

    /// Mean and population variance of the tree outputs. The variance is
    /// exactly 0 when all trees agree.
    pub fn predict(&self, x: &[f64]) -> Result<Prediction, ShallowError> {
        let outs = self.tree_predictions(x)?;
        if outs.iter().all(|&o| o == outs[0]) {
            return Ok(Prediction {
                mean: outs[0],
                variance: 0.0,
            });
        }
        let n = outs.len() as f64;
        let mean = outs.iter().sum::<f64>() / n;
        let variance = outs.iter().map(|o| (o - mean).powi(2)).sum::<f64>() / n;
        Ok(Prediction { mean, variance })
    }

    pub fn predict_many(&self, xs: &[Vec<f64>]) -> Result<Vec<Prediction>, ShallowError> {
        xs.iter().map(|x| self.predict(x)).collect()
    }
}

/// Sum in a canonical order so results do not depend on row order.
fn canonical_mean(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

struct Candidate {
    feature: usize,
    threshold: f64,
    score: f64,
}

fn grow(
    data: &Columns,
    rows: Vec<usize>,
    min_leaf: usize,
    mtry: usize,
    rng: &mut impl Rng,
) -> Tree {
    let dim = data.cols.len();
    let mut nodes = Vec::new();
    // (node slot, rows)
    let mut stack = vec![(0usize, rows)];
    nodes.push(Node::Leaf(0.0));
    let mut features: Vec<usize> = (0..dim).collect();
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    while let Some((slot, rows)) = stack.pop() {
        let mut ys: Vec<f64> = rows.iter().map(|&r| data.y[r]).collect();
        let mean = canonical_mean(&mut ys);
        let constant = ys.first() == ys.last();
        if rows.len() < 2 * min_leaf || constant {
            nodes[slot] = Node::Leaf(mean);
            continue;
        }
        let parent = mean * mean * rows.len() as f64;
        let split = best_split(data, &rows, min_leaf, mtry, &mut features, &mut pairs, rng);
        // a split must actually reduce the squared error
        let Some(best) = split.filter(|b| b.score > parent * (1.0 + 1e-12) + 1e-12) else {
            nodes[slot] = Node::Leaf(mean);
            continue;
        };
        let (left, right): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&r| data.cols[best.feature][r] <= best.threshold);
        let l = nodes.len();
        nodes.push(Node::Leaf(0.0));
        nodes.push(Node::Leaf(0.0));
        nodes[slot] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: l,
            right: l + 1,
        };
        stack.push((l + 1, right));
        stack.push((l, left));
    }
    Tree { nodes }
}

/// Examine features in random order until `mtry` non-constant ones have been
/// scored (or all are exhausted) and return the best variance-reduction split.
fn best_split(
    data: &Columns,
    rows: &[usize],
    min_leaf: usize,
    mtry: usize,
    features: &mut [usize],
    pairs: &mut Vec<(f64, f64)>,
    rng: &mut impl Rng,
) -> Option<Candidate> {
    let n = rows.len();
    let mut best: Option<Candidate> = None;
    let mut scored = 0;
    let mut k = 0;
    while scored < mtry && k < features.len() {
        // partial Fisher-Yates: draw the next feature without replacement
        let j = rng.gen_range(k..features.len());
        features.swap(k, j);
        let f = features[k];
        k += 1;
        let col = &data.cols[f];
        let first = col[rows[0]];
        if rows.iter().all(|&r| col[r] == first) {
            continue;
        }
        scored += 1;
        pairs.clear();
        pairs.extend(rows.iter().map(|&r| (col[r], data.y[r])));
        pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        let mut left_sum = 0.0;
        for i in 0..n - 1 {
            left_sum += pairs[i].1;
            let nl = i + 1;
            if pairs[i].0 == pairs[i + 1].0 || nl < min_leaf || n - nl < min_leaf {
                continue;
            }
            // maximising this is equivalent to minimising child SSE
            let right_sum = total - left_sum;
            let score = left_sum * left_sum / nl as f64 + right_sum * right_sum / (n - nl) as f64;
            if best.as_ref().is_none_or(|b| score > b.score) {
                best = Some(Candidate {
                    feature: f,
                    threshold: 0.5 * (pairs[i].0 + pairs[i + 1].0),
                    score,
                });
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor_data() -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = seed::rng(1);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for _ in 0..400 {
            let a: f64 = rng.gen_range(-1.0..1.0);
            let b: f64 = rng.gen_range(-1.0..1.0);
            x.push(vec![a, b]);
            y.push(if (a > 0.0) ^ (b > 0.0) { 1.0 } else { 0.0 });
        }
        (x, y)
    }

    #[test]
    fn constant_targets() {
        let x: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![i as f64, (i * 7 % 5) as f64])
            .collect();
        let y = vec![3.5; 20];
        let f = Forest::fit(&x, &y, ForestParams::default(), 0).unwrap();
        for q in &x {
            let p = f.predict(q).unwrap();
            assert_eq!(p.mean, 3.5);
            assert_eq!(p.variance, 0.0);
        }
    }

    #[test]
    fn single_tree_has_zero_variance() {
        let (x, y) = xor_data();
        let params = ForestParams {
            trees: 1,
            ..Default::default()
        };
        let f = Forest::fit(&x, &y, params, 2).unwrap();
        assert!(x.iter().all(|q| f.predict(q).unwrap().variance == 0.0));
    }

    #[test]
    fn learns_xor() {
        let (x, y) = xor_data();
        let f = Forest::fit(&x, &y, ForestParams::default(), 3).unwrap();
        let mean_y = y.iter().sum::<f64>() / y.len() as f64;
        let std = (y.iter().map(|v| (v - mean_y).powi(2)).sum::<f64>() / y.len() as f64).sqrt();
        let mse = x
            .iter()
            .zip(&y)
            .map(|(q, t)| (f.predict(q).unwrap().mean - t).powi(2))
            .sum::<f64>()
            / y.len() as f64;
        assert!(mse.sqrt() < 0.2 * std, "rmse {} std {}", mse.sqrt(), std);
    }

    #[test]
    fn identical_rows_give_single_leaves() {
        let x = vec![vec![1.0, 1.0]; 10];
        let y: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let f = Forest::fit(&x, &y, ForestParams::default(), 0).unwrap();
        let p = f.predict(&[1.0, 1.0]).unwrap();
        assert!(p.mean >= 0.0 && p.mean <= 9.0);
    }

    #[test]
    fn deterministic_given_seed() {
        let (x, y) = xor_data();
        let a = Forest::fit(&x, &y, ForestParams::default(), 9).unwrap();
        let b = Forest::fit(&x, &y, ForestParams::default(), 9).unwrap();
        for q in x.iter().take(50) {
            assert_eq!(a.predict(q).unwrap(), b.predict(q).unwrap());
        }
    }
}
