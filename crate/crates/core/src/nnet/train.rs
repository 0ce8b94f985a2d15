use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::features::Input;
use super::model::TrainedModel;
use super::NnetError;
use crate::seed;

/// Learning-rate schedule for one cycle: linear warmup from `init_lr` to
/// `max_lr`, then exponential decay to `final_lr` at the end of the cycle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub init_lr: f64,
    pub max_lr: f64,
    pub final_lr: f64,
    pub warmup_epochs: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            init_lr: 1e-4,
            max_lr: 1e-3,
            final_lr: 1e-4,
            warmup_epochs: 2,
        }
    }
}

impl Schedule {
    /// Learning rate at `step` of a cycle with `total` steps, of which the
    /// first `warmup` ramp up.
    pub fn lr(&self, step: usize, total: usize, warmup: usize) -> f64 {
        if step < warmup {
            return self.init_lr + (self.max_lr - self.init_lr) * step as f64 / warmup as f64;
        }
        let span = total.saturating_sub(warmup).max(1) as f64;
        let frac = ((step - warmup) as f64 / span).min(1.0);
        if self.max_lr <= 0.0 || self.final_lr <= 0.0 {
            return self.max_lr;
        }
        self.max_lr * (self.final_lr / self.max_lr).powf(frac)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub schedule: Schedule,
    /// Early-stopping patience in epochs on validation RMSE.
    pub patience: Option<usize>,
    /// Store a snapshot every this many epochs and restart the schedule.
    /// Disables early stopping.
    pub snapshot_every: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 30,
            batch_size: 32,
            schedule: Schedule::default(),
            patience: Some(5),
            snapshot_every: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_rmse: f64,
    /// Learning rate of the first and last step of the epoch.
    pub lr_start: f64,
    pub lr_end: f64,
    pub snapshot: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub epochs: Vec<EpochLog>,
    pub best_epoch: usize,
    pub stopped_early: bool,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    /// Best-validation parameters (final parameters in snapshot mode).
    pub model: TrainedModel,
    /// Snapshot members ordered by epoch.
    pub snapshots: Vec<TrainedModel>,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Adam {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::B1.powi(self.t);
        let c2 = 1.0 - Self::B2.powi(self.t);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = Self::B1 * self.m[i] + (1.0 - Self::B1) * g;
            self.v[i] = Self::B2 * self.v[i] + (1.0 - Self::B2) * g * g;
            if lr != 0.0 {
                params[i] -= lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + Self::EPS);
            }
        }
    }
}

fn rmse(model: &TrainedModel, data: &[(Input, f64)]) -> Result<f64, NnetError> {
    let mut sse = 0.0;
    for (x, y) in data {
        sse += (model.forward(x, None)?.prediction - y).powi(2);
    }
    Ok((sse / data.len() as f64).sqrt())
}

/// Train `model` with Adam on minibatches of `train`.
///
/// The schedule runs over all epochs, or restarts every `snapshot_every`
/// epochs in snapshot mode, where each cycle starts at `max_lr` without
/// warmup. Dropout masks and batch order come from streams derived from
/// `seed`.
pub fn train(
    mut model: TrainedModel,
    train: &[(Input, f64)],
    val: &[(Input, f64)],
    tc: &TrainConfig,
    seed: u64,
) -> Result<TrainOutcome, NnetError> {
    if train.is_empty() {
        return Err(NnetError::EmptyData("training"));
    }
    if val.is_empty() {
        return Err(NnetError::EmptyData("validation"));
    }
    let batch = tc.batch_size.max(1);
    let steps_per_epoch = train.len().div_ceil(batch);
    let (cycle_epochs, warmup_epochs) = match tc.snapshot_every {
        Some(k) => (k.max(1), 0),
        None => (tc.epochs.max(1), tc.schedule.warmup_epochs),
    };
    let cycle_steps = cycle_epochs * steps_per_epoch;
    let warmup_steps = warmup_epochs * steps_per_epoch;

    let mut shuffle_rng = seed::rng(seed::derive(seed, "shuffle"));
    let mut mask_rng = seed::rng(seed::derive(seed, "dropout"));
    let dropout = model.config.dropout > 0.0;
    let mut adam = Adam::new(model.param_count());
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut log = TrainingLog::default();
    let mut best = (f64::INFINITY, model.params.clone());
    let mut snapshots = Vec::new();
    let mut since_best = 0;

    for epoch in 0..tc.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        let mut lr_start = 0.0;
        let mut lr = 0.0;
        for (s, chunk) in order.chunks(batch).enumerate() {
            let step = (epoch % cycle_epochs) * steps_per_epoch + s;
            lr = tc.schedule.lr(step, cycle_steps, warmup_steps);
            if s == 0 {
                lr_start = lr;
            }
            let mut grad = vec![0.0; model.param_count()];
            let scale = 1.0 / chunk.len() as f64;
            for &i in chunk {
                let (x, y) = &train[i];
                let rng = if dropout { Some(&mut mask_rng) } else { None };
                let (_, tape) = model.run(x, rng)?;
                let (loss, d) = model.loss_and_dout(tape.outputs(), *y);
                epoch_loss += loss;
                let d: Vec<f64> = d[..model.config.outputs()]
                    .iter()
                    .map(|v| v * scale)
                    .collect();
                model.backward(x, &tape, &d, &mut grad);
            }
            adam.step(&mut model.params, &grad, lr);
        }
        let train_loss = epoch_loss / train.len() as f64;
        if !train_loss.is_finite() || !model.params.iter().all(|p| p.is_finite()) {
            return Err(NnetError::Divergence {
                epoch,
                loss: train_loss,
            });
        }
        let val_rmse = rmse(&model, val)?;
        let snapshot = tc
            .snapshot_every
            .is_some_and(|k| (epoch + 1) % k.max(1) == 0);
        if snapshot {
            let mut member = model.clone();
            member.log = TrainingLog::default();
            snapshots.push(member);
        }
        log.epochs.push(EpochLog {
            epoch,
            train_loss,
            val_rmse,
            lr_start,
            lr_end: lr,
            snapshot,
        });
        if val_rmse < best.0 {
            best = (val_rmse, model.params.clone());
            log.best_epoch = epoch;
            since_best = 0;
        } else {
            since_best += 1;
        }
        if tc.snapshot_every.is_none() && tc.patience.is_some_and(|p| since_best >= p) {
            log.stopped_early = true;
            break;
        }
    }
    if tc.snapshot_every.is_none() {
        model.params = best.1;
    }
    model.log = log;
    Ok(TrainOutcome { model, snapshots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::Fingerprint;
    use crate::nnet::{Featurizer, NetConfig};
    use rand::Rng;

    fn fp_config() -> NetConfig {
        NetConfig {
            featurizer: Featurizer::Fingerprint,
            hidden: 16,
            fp_length: 64,
            ..Default::default()
        }
    }

    fn linear_task(n: usize, seed_: u64) -> Vec<(Input, f64)> {
        let mut rng = seed::rng(seed_);
        let coef: Vec<f64> = (0..64).map(|_| rng.gen_range(-0.3..0.3)).collect();
        (0..n)
            .map(|_| {
                let bits: Vec<usize> = (0..64).filter(|_| rng.gen_bool(0.2)).collect();
                let x: f64 = bits.iter().map(|&b| coef[b]).sum();
                (
                    Input::Fingerprint(Fingerprint::from_bits(64, &bits)),
                    2.0 * x + 1.0,
                )
            })
            .collect()
    }

    #[test]
    fn zero_learning_rate_keeps_parameters() {
        let data = linear_task(1, 0);
        let m = TrainedModel::init(fp_config(), 1).unwrap();
        let tc = TrainConfig {
            epochs: 1,
            schedule: Schedule {
                init_lr: 0.0,
                max_lr: 0.0,
                final_lr: 0.0,
                warmup_epochs: 0,
            },
            ..Default::default()
        };
        let out = train(m.clone(), &data, &data, &tc, 3).unwrap();
        assert_eq!(out.model.params, m.params);
    }

    #[test]
    fn snapshot_count_and_resets() {
        let data = linear_task(40, 1);
        let tc = TrainConfig {
            epochs: 9,
            snapshot_every: Some(3),
            ..Default::default()
        };
        let out = train(
            TrainedModel::init(fp_config(), 2).unwrap(),
            &data,
            &data,
            &tc,
            4,
        )
        .unwrap();
        assert_eq!(out.snapshots.len(), 3);
        let log = &out.model.log.epochs;
        for e in [3, 6] {
            assert!(log[e - 1].snapshot);
            assert_eq!(log[e].lr_start, tc.schedule.max_lr);
            assert!(log[e].lr_start > log[e - 1].lr_end);
        }
    }

    #[test]
    fn fits_linear_fingerprint_task() {
        let data = linear_task(50, 7);
        let tc = TrainConfig {
            epochs: 300,
            batch_size: 10,
            patience: None,
            schedule: Schedule {
                init_lr: 1e-3,
                max_lr: 1e-2,
                final_lr: 1e-4,
                warmup_epochs: 5,
            },
            ..Default::default()
        };
        let out = train(
            TrainedModel::init(fp_config(), 5).unwrap(),
            &data,
            &data,
            &tc,
            6,
        )
        .unwrap();
        let r = rmse(&out.model, &data).unwrap();
        assert!(r < 0.05, "train rmse {r}");
    }

    #[test]
    fn deterministic_training() {
        let data = linear_task(30, 2);
        let cfg = NetConfig {
            dropout: 0.2,
            ..fp_config()
        };
        let tc = TrainConfig {
            epochs: 4,
            ..Default::default()
        };
        let a = train(
            TrainedModel::init(cfg.clone(), 1).unwrap(),
            &data,
            &data,
            &tc,
            8,
        )
        .unwrap();
        let b = train(TrainedModel::init(cfg, 1).unwrap(), &data, &data, &tc, 8).unwrap();
        assert_eq!(a.model.params, b.model.params);
    }
}
