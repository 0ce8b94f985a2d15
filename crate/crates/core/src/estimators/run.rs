use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::context::SplitContext;
use super::id::{EstimatorId, Method};
use super::{EstimatorError, PredictionSet, Semantics};
use crate::chem::tanimoto_distance;
use crate::nnet::{Featurizer, Head, Input, TrainConfig, TrainedModel, TrainingLog};
use crate::seed;
use crate::shallow::{Forest, LinearGP, Prediction};

/// Provenance of one estimator run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EstimatorManifest {
    pub estimator: String,
    pub dataset: String,
    pub split: String,
    pub semantics: Option<Semantics>,
    pub seed: u64,
    /// Ensemble members, MC passes, or 1.
    pub members: usize,
    pub bootstrap_fraction: Option<f64>,
    /// Training-row indices seen by each bootstrap member.
    pub bootstrap_subsets: Vec<Vec<usize>>,
    pub snapshot_every: Option<usize>,
    /// Epochs (1-based) at which snapshot members were saved.
    pub snapshot_epochs: Vec<usize>,
    pub dropout: Option<f64>,
    pub k_neighbors: Option<usize>,
    pub trees: Option<usize>,
    /// Which part of the split a GP/RF tail was fitted on.
    pub tail_fit_set: Option<String>,
    pub tail_rows: Option<usize>,
    pub training: Vec<TrainingLog>,
    pub warnings: Vec<String>,
}

pub struct EstimatorRun {
    pub test: PredictionSet,
    /// Validation predictions, used to fit the calibration map.
    pub validation: PredictionSet,
    pub manifest: EstimatorManifest,
}

/// Mean and population variance of member outputs.
pub fn ensemble_predict(outputs: &[f64]) -> (f64, f64) {
    let n = outputs.len() as f64;
    let mean = outputs.iter().sum::<f64>() / n;
    let var = outputs.iter().map(|o| (o - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

/// Mean of the `k` smallest values of `row` (sorted in place).
pub fn knn_mean(row: &mut [f64], k: usize) -> f64 {
    row.sort_by(f64::total_cmp);
    row[..k].iter().sum::<f64>() / k as f64
}

/// Run one estimator on a split.
pub fn run_estimator(ctx: &SplitContext, id: EstimatorId) -> Result<EstimatorRun, EstimatorError> {
    let mut m = EstimatorManifest {
        estimator: id.to_string(),
        dataset: ctx.dataset.clone(),
        split: ctx.split_id(),
        semantics: Some(id.semantics()),
        seed: seed::derive(ctx.seed, &id.to_string()),
        members: 1,
        ..Default::default()
    };
    let s = m.seed;
    // Scaled (mean, variance) on validation and test.
    let (val, test) = match id {
        EstimatorId::Neural { base, method } => match method {
            Method::Ensemble => traditional(ctx, base, s, &mut m)?,
            Method::Bootstrap => bootstrap(ctx, base, s, &mut m)?,
            Method::Snapshot => snapshot(ctx, base, s, &mut m)?,
            Method::Dropout(p) => mc_dropout(ctx, base, p as f64 / 100.0, s, &mut m)?,
            Method::Mve => mve(ctx, base, s, &mut m)?,
            Method::TanimotoDistance => structure_distance(ctx, base, &mut m)?,
            Method::LatentDistance => latent_distance(ctx, base, &mut m)?,
            Method::UnionGp => union(ctx, base, Tail::Gp, s, &mut m)?,
            Method::UnionRf => union(ctx, base, Tail::Rf, s, &mut m)?,
        },
        EstimatorId::FpGp => fp_baseline(ctx, Tail::Gp, s, &mut m)?,
        EstimatorId::FpRf => fp_baseline(ctx, Tail::Rf, s, &mut m)?,
    };
    let semantics = id.semantics();
    let build = |idx: &[usize], preds: Vec<Prediction>| {
        // Relative uncertainties are distances and are not rescaled.
        let (p, u) = preds
            .iter()
            .map(|q| {
                let u = match semantics {
                    Semantics::VarianceLike => ctx.scaler.inverse_variance(q.variance),
                    Semantics::Relative => q.variance,
                };
                (ctx.scaler.inverse(q.mean), u)
            })
            .unzip();
        PredictionSet::new(
            id.to_string(),
            ctx.split_id(),
            semantics,
            ctx.smiles(idx),
            p,
            u,
            ctx.targets(idx),
        )
    };
    Ok(EstimatorRun {
        validation: build(&ctx.split.validation, val)?,
        test: build(&ctx.split.test, test)?,
        manifest: m,
    })
}

type Outputs = (Vec<Prediction>, Vec<Prediction>);

fn member_seed(s: u64, i: usize) -> u64 {
    seed::derive_index(s, i as u64)
}

/// Ensemble statistics of deterministic member predictions.
fn ensemble_outputs(
    ctx: &SplitContext,
    members: &[TrainedModel],
    idx: &[usize],
) -> Result<Vec<Prediction>, EstimatorError> {
    let base = members[0].featurizer();
    let inputs = ctx.inputs(base)?;
    let per_member: Vec<Vec<f64>> = members
        .par_iter()
        .map(|mdl| {
            idx.iter()
                .map(|&i| mdl.forward(&inputs[i], None).map(|o| o.prediction))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    Ok((0..idx.len())
        .map(|j| {
            let outs: Vec<f64> = per_member.iter().map(|p| p[j]).collect();
            let (mean, variance) = ensemble_predict(&outs);
            Prediction { mean, variance }
        })
        .collect())
}

fn ensemble_both(ctx: &SplitContext, members: &[TrainedModel]) -> Result<Outputs, EstimatorError> {
    Ok((
        ensemble_outputs(ctx, members, &ctx.split.validation)?,
        ensemble_outputs(ctx, members, &ctx.split.test)?,
    ))
}

fn train_members(
    ctx: &SplitContext,
    base: Featurizer,
    s: u64,
    subsets: &[Vec<usize>],
    m: &mut EstimatorManifest,
) -> Result<Vec<TrainedModel>, EstimatorError> {
    let config = ctx.settings.net_for(base, Head::Scalar, 0.0);
    let members: Vec<TrainedModel> = subsets
        .par_iter()
        .enumerate()
        .map(|(i, rows)| {
            ctx.train_network(config.clone(), rows, &ctx.settings.train, member_seed(s, i))
                .map(|o| o.model)
                .map_err(|e| EstimatorError::Member {
                    member: i,
                    message: e.to_string(),
                })
        })
        .collect::<Result<_, _>>()?;
    m.members = members.len();
    m.training = members.iter().map(|x| x.log.clone()).collect();
    Ok(members)
}

fn traditional(
    ctx: &SplitContext,
    base: Featurizer,
    s: u64,
    m: &mut EstimatorManifest,
) -> Result<Outputs, EstimatorError> {
    let subsets = vec![ctx.split.train.clone(); ctx.settings.ensemble_size];
    let members = train_members(ctx, base, s, &subsets, m)?;
    ensemble_both(ctx, &members)
}

/// Independent uniform subsets of `floor(fraction * n)` training rows.
pub fn bootstrap_subsets(train: &[usize], fraction: f64, count: usize, s: u64) -> Vec<Vec<usize>> {
    let size = ((fraction * train.len() as f64).floor() as usize).max(1);
    (0..count)
        .map(|i| {
            let mut rng = seed::rng(seed::derive(member_seed(s, i), "subset"));
            let mut rows = rand::seq::index::sample(&mut rng, train.len(), size)
                .into_iter()
                .map(|j| train[j])
                .collect::<Vec<_>>();
            rows.sort_unstable();
            rows
        })
        .collect()
}

fn bootstrap(
    ctx: &SplitContext,
    base: Featurizer,
    s: u64,
    m: &mut EstimatorManifest,
) -> Result<Outputs, EstimatorError> {
    let st = &ctx.settings;
    let subsets = bootstrap_subsets(&ctx.split.train, st.bootstrap_fraction, st.ensemble_size, s);
    if subsets[0].len() < st.train.batch_size {
        let w = format!(
            "bootstrap subset of {} rows is smaller than the batch size {}",
            subsets[0].len(),
            st.train.batch_size
        );
        log::warn!("{}: {w}", m.estimator);
        m.warnings.push(w);
    }
    m.bootstrap_fraction = Some(st.bootstrap_fraction);
    let members = train_members(ctx, base, s, &subsets, m)?;
    m.bootstrap_subsets = subsets;
    ensemble_both(ctx, &members)
}

fn snapshot(
    ctx: &SplitContext,
    base: Featurizer,
    s: u64,
    m: &mut EstimatorManifest,
) -> Result<Outputs, EstimatorError> {
    let st = &ctx.settings;
    let tc = TrainConfig {
        epochs: st.snapshot_every * st.ensemble_size,
        snapshot_every: Some(st.snapshot_every),
        patience: None,
        ..st.train.clone()
    };
    let config = st.net_for(base, Head::Scalar, 0.0);
    let out = ctx.train_network(config, &ctx.split.train, &tc, s)?;
    if out.snapshots.len() < 2 {
        return Err(EstimatorError::Degenerate(format!(
            "snapshot ensemble has {} members",
            out.snapshots.len()
        )));
    }
    m.members = out.snapshots.len();
    m.snapshot_every = Some(st.snapshot_every);
    m.snapshot_epochs = out
        .model
        .log
        .epochs
        .iter()
        .filter(|e| e.snapshot)
        .map(|e| e.epoch + 1)
        .collect();
    m.training = vec![out.model.log.clone()];
    ensemble_both(ctx, &out.snapshots)
}

fn mc_dropout(
    ctx: &SplitContext,
    base: Featurizer,
    p: f64,
    s: u64,
    m: &mut EstimatorManifest,
) -> Result<Outputs, EstimatorError> {
    let passes = ctx.settings.dropout_passes;
    if !(p > 0.0) {
        return Err(EstimatorError::InvalidConfig(
            "MC dropout needs a positive rate".into(),
        ));
    }
    if passes < 2 {
        return Err(EstimatorError::InvalidConfig(
            "MC dropout needs at least 2 passes".into(),
        ));
    }
    let config = ctx.settings.net_for(base, Head::Scalar, p);
    let out = ctx.train_network(config, &ctx.split.train, &ctx.settings.train, s)?;
    let model = out.model;
    m.members = passes;
    m.dropout = Some(p);
    m.training = vec![model.log.clone()];
    let inputs = ctx.inputs(base)?;
    let run = |idx: &[usize], label: &str| -> Result<Vec<Prediction>, EstimatorError> {
        let stream = seed::derive(s, label);
        let per_pass: Vec<Vec<f64>> = (0..passes)
            .into_par_iter()
            .map(|j| {
                let mut rng = seed::rng(seed::derive_index(stream, j as u64));
                idx.iter()
                    .map(|&i| {
                        model
                            .forward(&inputs[i], Some(&mut rng))
                            .map(|o| o.prediction)
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<_, _>>()?;
        Ok((0..idx.len())
            .map(|j| {
                let outs: Vec<f64> = per_pass.iter().map(|p| p[j]).collect();
                let (mean, variance) = ensemble_predict(&outs);
                Prediction { mean, variance }
            })
            .collect())
    };
    Ok((
        run(&ctx.split.validation, "mc-val")?,
        run(&ctx.split.test, "mc-test")?,
    ))
}

fn mve(
    ctx: &SplitContext,
    base: Featurizer,
    s: u64,
    m: &mut EstimatorManifest,
) -> Result<Outputs, EstimatorError> {
    let config = ctx.settings.net_for(base, Head::MeanVariance, 0.0);
    let floor = config.variance_floor;
    let out = ctx.train_network(config, &ctx.split.train, &ctx.settings.train, s)?;
    let model = out.model;
    m.training = vec![model.log.clone()];
    let inputs = ctx.inputs(base)?;
    let run = |idx: &[usize]| -> Result<Vec<Prediction>, EstimatorError> {
        idx.iter()
            .map(|&i| {
                let o = model.forward(&inputs[i], None)?;
                Ok(Prediction {
                    mean: o.prediction,
                    variance: o.variance.expect("mean-variance head"),
                })
            })
            .collect()
    };
    let test = run(&ctx.split.test)?;
    let at_floor = test.iter().filter(|p| p.variance <= 2.0 * floor).count();
    if 2 * at_floor > test.len() {
        let w = format!(
            "variance at the floor for {at_floor}/{} test points",
            test.len()
        );
        log::warn!("{}: {w}", m.estimator);
        m.warnings.push(w);
    }
    Ok((run(&ctx.split.validation)?, test))
}

/// Replace infinite distances by one more than the largest finite distance,
/// then average the `k` smallest per row.
fn knn_rows(mut rows: Vec<Vec<f64>>, k: usize) -> Vec<f64> {
    let max_finite = rows
        .iter()
        .flatten()
        .copied()
        .filter(|d| d.is_finite())
        .fold(0.0, f64::max);
    rows.iter_mut()
        .map(|row| {
            for d in row.iter_mut() {
                if !d.is_finite() {
                    *d = max_finite + 1.0;
                }
            }
            knn_mean(row, k)
        })
        .collect()
}

fn check_k(ctx: &SplitContext) -> Result<usize, EstimatorError> {
    let k = ctx.settings.k_neighbors;
    if k > ctx.split.train.len() {
        return Err(EstimatorError::TooFewNeighbors {
            k,
            n: ctx.split.train.len(),
        });
    }
    Ok(k)
}

/// Base-model predictions paired with per-point distance scores.
fn with_distances(
    ctx: &SplitContext,
    base: Featurizer,
    distance: impl Fn(usize, usize) -> Result<f64, EstimatorError> + Sync,
    m: &mut EstimatorManifest,
) -> Result<Outputs, EstimatorError> {
    let k = check_k(ctx)?;
    m.k_neighbors = Some(k);
    let model = ctx.base_model(base)?;
    m.training = vec![model.log.clone()];
    let inputs = ctx.inputs(base)?;
    let nv = ctx.split.validation.len();
    let queries: Vec<usize> = ctx
        .split
        .validation
        .iter()
        .chain(&ctx.split.test)
        .copied()
        .collect();
    let rows: Vec<Vec<f64>> = queries
        .par_iter()
        .map(|&q| ctx.split.train.iter().map(|&t| distance(q, t)).collect())
        .collect::<Result<_, _>>()?;
    let u = knn_rows(rows, k);
    let preds: Vec<Prediction> = queries
        .iter()
        .zip(&u)
        .map(|(&q, &variance)| {
            Ok(Prediction {
                mean: model.forward(&inputs[q], None)?.prediction,
                variance,
            })
        })
        .collect::<Result<_, EstimatorError>>()?;
    let test = preds[nv..].to_vec();
    let mut val = preds;
    val.truncate(nv);
    Ok((val, test))
}

fn structure_distance(
    ctx: &SplitContext,
    base: Featurizer,
    m: &mut EstimatorManifest,
) -> Result<Outputs, EstimatorError> {
    let fps = ctx.fingerprints()?;
    with_distances(
        ctx,
        base,
        |a, b| Ok(tanimoto_distance(&fps[a], &fps[b])?),
        m,
    )
}

fn embeddings(
    ctx: &SplitContext,
    model: &TrainedModel,
    base: Featurizer,
) -> Result<Vec<Vec<f64>>, EstimatorError> {
    let inputs: &[Input] = ctx.inputs(base)?;
    inputs
        .par_iter()
        .map(|x| Ok(model.forward(x, None)?.embedding))
        .collect()
}

fn latent_distance(
    ctx: &SplitContext,
    base: Featurizer,
    m: &mut EstimatorManifest,
) -> Result<Outputs, EstimatorError> {
    let emb = embeddings(ctx, ctx.base_model(base)?, base)?;
    with_distances(
        ctx,
        base,
        |a, b| {
            Ok(emb[a]
                .iter()
                .zip(&emb[b])
                .map(|(x, y)| (x - y).powi(2))
                .sum::<f64>()
                .sqrt())
        },
        m,
    )
}

#[derive(Clone, Copy)]
enum Tail {
    Gp,
    Rf,
}

/// Fit a tail on `(features[fit], y[fit])` and predict validation and test.
fn fit_tail<T: crate::shallow::LinearFeatures + Clone + Sync>(
    ctx: &SplitContext,
    tail: Tail,
    features: &[T],
    dense: impl Fn(&T) -> Vec<f64>,
    fit: &[usize],
    s: u64,
    m: &mut EstimatorManifest,
) -> Result<Outputs, EstimatorError> {
    let y = ctx.scaled_targets(fit);
    let pick = |idx: &[usize]| -> Vec<T> { idx.iter().map(|&i| features[i].clone()).collect() };
    m.tail_rows = Some(fit.len());
    match tail {
        Tail::Gp => {
            let gp = LinearGP::fit(&pick(fit), &y, ctx.settings.gp)?;
            Ok((
                gp.predict_many(&pick(&ctx.split.validation))?,
                gp.predict_many(&pick(&ctx.split.test))?,
            ))
        }
        Tail::Rf => {
            let rows = |idx: &[usize]| -> Vec<Vec<f64>> {
                idx.iter().map(|&i| dense(&features[i])).collect()
            };
            m.trees = Some(ctx.settings.forest.trees);
            let forest = Forest::fit(
                &rows(fit),
                &y,
                ctx.settings.forest,
                seed::derive(s, "forest"),
            )?;
            Ok((
                forest.predict_many(&rows(&ctx.split.validation))?,
                forest.predict_many(&rows(&ctx.split.test))?,
            ))
        }
    }
}

pub const MIN_TAIL_ROWS: usize = 10;

fn union(
    ctx: &SplitContext,
    base: Featurizer,
    tail: Tail,
    s: u64,
    m: &mut EstimatorManifest,
) -> Result<Outputs, EstimatorError> {
    let val = &ctx.split.validation;
    if val.len() < MIN_TAIL_ROWS {
        return Err(EstimatorError::TooFewTailRows {
            n: val.len(),
            min: MIN_TAIL_ROWS,
        });
    }
    let model = ctx.base_model(base)?;
    m.training = vec![model.log.clone()];
    let emb = embeddings(ctx, model, base)?;
    m.tail_fit_set = Some("validation".into());
    fit_tail(ctx, tail, &emb, |v| v.clone(), val, s, m)
}

fn fp_baseline(
    ctx: &SplitContext,
    tail: Tail,
    s: u64,
    m: &mut EstimatorManifest,
) -> Result<Outputs, EstimatorError> {
    let fps = ctx.fingerprints()?;
    m.tail_fit_set = Some("train".into());
    fit_tail(ctx, tail, fps, |f| f.to_dense(), &ctx.split.train, s, m)
}
