use rand::distributions::Uniform;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::features::{GraphInput, Input, ATOM_FEATURES};
use super::train::TrainingLog;
use super::{Featurizer, Head, NetConfig, NnetError, Readout};
use crate::chem::Fingerprint;
use crate::seed;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Numerically stable `ln(1 + e^x)`.
/// Inverse of [`softplus`] for positive `y`.
pub fn inverse_softplus(y: f64) -> f64 {
    y + (-(-y).exp_m1()).ln()
}

pub fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else if x < -30.0 {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Gaussian negative log likelihood of `y` under `N(mean, variance)`.
pub fn mve_loss(mean: f64, variance: f64, y: f64) -> Result<f64, NnetError> {
    if !(variance > 0.0) {
        return Err(NnetError::NonPositiveVariance(variance));
    }
    Ok(HALF_LN_2PI + 0.5 * variance.ln() + (y - mean).powi(2) / (2.0 * variance))
}

/// Result of one forward pass.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub prediction: f64,
    /// Present only for the mean-variance head.
    pub variance: Option<f64>,
    pub embedding: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
struct DenseSlot {
    w: usize,
    b: usize,
    inp: usize,
    out: usize,
}

/// Offsets of each parameter block in the flat vector. Weights are stored
/// input-major: `w[i * out + j]` connects input `i` to output `j`.
#[derive(Clone, Debug)]
struct Layout {
    w_in: usize,
    b_in: usize,
    w_m: usize,
    b_m: usize,
    dense: Vec<DenseSlot>,
    out: DenseSlot,
    total: usize,
}

impl Layout {
    fn new(c: &NetConfig) -> Layout {
        let h = c.hidden;
        let mut at = 0;
        let mut take = |n: usize| {
            let o = at;
            at += n;
            o
        };
        let (w_in, b_in, w_m, b_m) = match c.featurizer {
            Featurizer::Graph => (take(ATOM_FEATURES * h), take(h), take(h * h), take(h)),
            Featurizer::Fingerprint => (0, 0, 0, 0),
        };
        let mut dense = Vec::new();
        for l in 0..c.dense_layers {
            let inp = if l == 0 && c.featurizer == Featurizer::Fingerprint {
                c.fp_length
            } else {
                h
            };
            dense.push(DenseSlot {
                w: take(inp * h),
                b: take(h),
                inp,
                out: h,
            });
        }
        let k = c.outputs();
        let out = DenseSlot {
            w: take(h * k),
            b: take(k),
            inp: h,
            out: k,
        };
        Layout {
            w_in,
            b_in,
            w_m,
            b_m,
            dense,
            out,
            total: at,
        }
    }
}

/// Intermediate values of one forward pass, kept for backpropagation.
#[derive(Clone, Debug, Default)]
pub(crate) struct Tape {
    a0: Vec<f64>,
    pre_steps: Vec<Vec<f64>>,
    msgs: Vec<Vec<f64>>,
    /// Post-dropout input of each dense layer (empty for the sparse layer).
    layer_in: Vec<Vec<f64>>,
    masks: Vec<Option<Vec<f64>>>,
    pre: Vec<Vec<f64>>,
    out_in: Vec<f64>,
    out_mask: Option<Vec<f64>>,
    out: Vec<f64>,
}

impl Tape {
    pub(crate) fn outputs(&self) -> &[f64] {
        &self.out
    }

    /// Signs of every ReLU pre-activation, in a fixed order.
    pub(crate) fn relu_pattern(&self) -> Vec<bool> {
        self.a0
            .iter()
            .chain(self.pre_steps.iter().flatten())
            .chain(self.pre.iter().flatten())
            .map(|&v| v > 0.0)
            .collect()
    }
}

fn dropout_mask(rng: Option<&mut ChaCha8Rng>, p: f64, len: usize) -> Option<Vec<f64>> {
    let rng = rng?;
    if p <= 0.0 {
        return None;
    }
    let keep = 1.0 / (1.0 - p);
    Some(
        (0..len)
            .map(|_| if rng.gen::<f64>() < p { 0.0 } else { keep })
            .collect(),
    )
}

fn apply_mask(x: &[f64], mask: &Option<Vec<f64>>) -> Vec<f64> {
    match mask {
        Some(m) => x.iter().zip(m).map(|(a, b)| a * b).collect(),
        None => x.to_vec(),
    }
}

/// `y += W^T x` for input-major `W` of shape `inp x out`.
fn gemv_acc(w: &[f64], x: &[f64], out: usize, y: &mut [f64]) {
    for (i, &xi) in x.iter().enumerate() {
        if xi != 0.0 {
            let row = &w[i * out..(i + 1) * out];
            for (yj, wij) in y.iter_mut().zip(row) {
                *yj += xi * wij;
            }
        }
    }
}

/// `dx = W dy`.
fn gemv_t(w: &[f64], dy: &[f64], inp: usize, out: usize) -> Vec<f64> {
    (0..inp)
        .map(|i| {
            w[i * out..(i + 1) * out]
                .iter()
                .zip(dy)
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect()
}

/// `dW += x dy^T`.
fn outer_acc(dw: &mut [f64], x: &[f64], dy: &[f64], out: usize) {
    for (i, &xi) in x.iter().enumerate() {
        if xi != 0.0 {
            for (g, d) in dw[i * out..(i + 1) * out].iter_mut().zip(dy) {
                *g += xi * d;
            }
        }
    }
}

fn add_to(a: &mut [f64], b: &[f64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

fn relu_inplace(v: &mut [f64]) {
    for x in v {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

/// A network configuration with its parameters and training history.
#[derive(Clone, Debug)]
pub struct TrainedModel {
    pub config: NetConfig,
    pub params: Vec<f64>,
    pub log: TrainingLog,
    layout: Layout,
}

impl TrainedModel {
    /// Model with all parameters zero.
    pub fn zeros(config: NetConfig) -> Result<TrainedModel, NnetError> {
        config.validate()?;
        let layout = Layout::new(&config);
        Ok(TrainedModel {
            params: vec![0.0; layout.total],
            config,
            log: TrainingLog::default(),
            layout,
        })
    }

    /// Glorot-uniform weights and zero biases drawn from `seed`.
    pub fn init(config: NetConfig, seed: u64) -> Result<TrainedModel, NnetError> {
        let mut m = TrainedModel::zeros(config)?;
        let mut rng = seed::rng(seed);
        let h = m.config.hidden;
        let mut blocks: Vec<(usize, usize, usize)> = Vec::new();
        if m.config.featurizer == Featurizer::Graph {
            blocks.push((m.layout.w_in, ATOM_FEATURES, h));
            blocks.push((m.layout.w_m, h, h));
        }
        for d in &m.layout.dense {
            blocks.push((d.w, d.inp, d.out));
        }
        blocks.push((m.layout.out.w, m.layout.out.inp, m.layout.out.out));
        for (at, inp, out) in blocks {
            let a = (6.0 / (inp + out) as f64).sqrt();
            let dist = Uniform::new_inclusive(-a, a);
            for p in &mut m.params[at..at + inp * out] {
                *p = rng.sample(dist);
            }
        }
        if m.config.head == Head::MeanVariance {
            // Start the variance head at unit variance.
            m.params[m.layout.out.b + 1] = inverse_softplus(1.0 - m.config.variance_floor);
        }
        Ok(m)
    }

    /// Rebuild from a config and an explicit parameter vector.
    pub fn from_params(config: NetConfig, params: Vec<f64>) -> Result<TrainedModel, NnetError> {
        let mut m = TrainedModel::zeros(config)?;
        if params.len() != m.params.len() {
            return Err(NnetError::InvalidConfig(format!(
                "expected {} parameters, got {}",
                m.params.len(),
                params.len()
            )));
        }
        m.params = params;
        Ok(m)
    }

    pub fn param_count(&self) -> usize {
        self.layout.total
    }

    pub fn featurizer(&self) -> Featurizer {
        self.config.featurizer
    }

    /// Forward pass. With a mask source, dropout is active (MC dropout);
    /// without one the network is deterministic.
    pub fn forward(
        &self,
        input: &Input,
        mask_source: Option<&mut ChaCha8Rng>,
    ) -> Result<Output, NnetError> {
        self.run(input, mask_source).map(|(o, _)| o)
    }

    pub(crate) fn run(
        &self,
        input: &Input,
        mut rng: Option<&mut ChaCha8Rng>,
    ) -> Result<(Output, Tape), NnetError> {
        let c = &self.config;
        let h = c.hidden;
        let p = c.dropout;
        let mut tape = Tape::default();
        let mut first_dense = 0;
        let mut z = match (c.featurizer, input) {
            (Featurizer::Graph, Input::Graph(g)) => self.message_passing(g, &mut tape),
            (Featurizer::Fingerprint, Input::Fingerprint(fp)) => {
                let d = self.layout.dense[0];
                let mut a = self.params[d.b..d.b + h].to_vec();
                for bit in fp.on_bits() {
                    if bit < d.inp {
                        add_to(&mut a, &self.params[d.w + bit * h..d.w + (bit + 1) * h]);
                    }
                }
                tape.layer_in.push(Vec::new());
                tape.masks.push(None);
                tape.pre.push(a.clone());
                relu_inplace(&mut a);
                first_dense = 1;
                a
            }
            (want, got) => {
                return Err(NnetError::InputMismatch {
                    expected: want.name(),
                    got: got.kind().name(),
                })
            }
        };
        for d in &self.layout.dense[first_dense..] {
            let mask = dropout_mask(rng.as_deref_mut(), p, d.inp);
            let x = apply_mask(&z, &mask);
            let mut a = self.params[d.b..d.b + d.out].to_vec();
            gemv_acc(&self.params[d.w..d.w + d.inp * d.out], &x, d.out, &mut a);
            tape.layer_in.push(x);
            tape.masks.push(mask);
            tape.pre.push(a.clone());
            relu_inplace(&mut a);
            z = a;
        }
        let embedding = z;
        let o = self.layout.out;
        let mask = dropout_mask(rng, p, o.inp);
        let x = apply_mask(&embedding, &mask);
        let mut out = self.params[o.b..o.b + o.out].to_vec();
        gemv_acc(&self.params[o.w..o.w + o.inp * o.out], &x, o.out, &mut out);
        tape.out_in = x;
        tape.out_mask = mask;
        tape.out = out.clone();
        let variance = match c.head {
            Head::Scalar => None,
            Head::MeanVariance => Some(softplus(out[1]) + c.variance_floor),
        };
        Ok((
            Output {
                prediction: out[0],
                variance,
                embedding,
            },
            tape,
        ))
    }

    fn message_passing(&self, g: &GraphInput, tape: &mut Tape) -> Vec<f64> {
        let h = self.config.hidden;
        let n = g.atom_bits.len();
        let l = &self.layout;
        let w_in = &self.params[l.w_in..l.w_in + ATOM_FEATURES * h];
        let b_in = &self.params[l.b_in..l.b_in + h];
        let w_m = &self.params[l.w_m..l.w_m + h * h];
        let b_m = &self.params[l.b_m..l.b_m + h];

        let mut a0 = vec![0.0; n * h];
        for (v, bits) in g.atom_bits.iter().enumerate() {
            let row = &mut a0[v * h..(v + 1) * h];
            row.copy_from_slice(b_in);
            for &f in bits {
                add_to(row, &w_in[f as usize * h..(f as usize + 1) * h]);
            }
        }
        let mut h0 = a0.clone();
        relu_inplace(&mut h0);
        tape.a0 = a0;
        let mut cur = h0.clone();
        for _ in 0..self.config.depth {
            let mut msg = vec![0.0; n * h];
            for (v, nbs) in g.neighbors.iter().enumerate() {
                for &u in nbs {
                    let u = u as usize;
                    add_to(&mut msg[v * h..(v + 1) * h], &cur[u * h..(u + 1) * h]);
                }
            }
            let mut a = h0.clone();
            for v in 0..n {
                let row = &mut a[v * h..(v + 1) * h];
                add_to(row, b_m);
                gemv_acc(w_m, &msg[v * h..(v + 1) * h], h, row);
            }
            let mut next = a.clone();
            relu_inplace(&mut next);
            tape.msgs.push(msg);
            tape.pre_steps.push(a);
            cur = next;
        }
        let mut r = vec![0.0; h];
        for v in 0..n {
            add_to(&mut r, &cur[v * h..(v + 1) * h]);
        }
        let scale = self.readout_scale(n);
        r.iter_mut().for_each(|x| *x *= scale);
        r
    }

    fn readout_scale(&self, atoms: usize) -> f64 {
        match self.config.readout {
            Readout::Sum => 1.0,
            Readout::Mean => 1.0 / atoms.max(1) as f64,
        }
    }

    /// Accumulate `d loss / d params` into `grad` given `d loss / d out`.
    pub(crate) fn backward(&self, input: &Input, tape: &Tape, d_out: &[f64], grad: &mut [f64]) {
        let c = &self.config;
        let o = self.layout.out;
        add_to(&mut grad[o.b..o.b + o.out], d_out);
        outer_acc(
            &mut grad[o.w..o.w + o.inp * o.out],
            &tape.out_in,
            d_out,
            o.out,
        );
        let mut dz = gemv_t(&self.params[o.w..o.w + o.inp * o.out], d_out, o.inp, o.out);
        if let Some(m) = &tape.out_mask {
            for (d, k) in dz.iter_mut().zip(m) {
                *d *= k;
            }
        }
        let sparse_first = c.featurizer == Featurizer::Fingerprint;
        for (l, d) in self.layout.dense.iter().enumerate().rev() {
            let da: Vec<f64> = dz
                .iter()
                .zip(&tape.pre[l])
                .map(|(g, a)| if *a > 0.0 { *g } else { 0.0 })
                .collect();
            add_to(&mut grad[d.b..d.b + d.out], &da);
            if l == 0 && sparse_first {
                if let Input::Fingerprint(fp) = input {
                    sparse_outer_acc(&mut grad[d.w..d.w + d.inp * d.out], fp, &da, d.inp, d.out);
                }
                return;
            }
            outer_acc(
                &mut grad[d.w..d.w + d.inp * d.out],
                &tape.layer_in[l],
                &da,
                d.out,
            );
            dz = gemv_t(&self.params[d.w..d.w + d.inp * d.out], &da, d.inp, d.out);
            if let Some(m) = &tape.masks[l] {
                for (g, k) in dz.iter_mut().zip(m) {
                    *g *= k;
                }
            }
        }
        if let Input::Graph(g) = input {
            self.message_passing_backward(g, tape, &dz, grad);
        }
    }

    fn message_passing_backward(&self, g: &GraphInput, tape: &Tape, dr: &[f64], grad: &mut [f64]) {
        let h = self.config.hidden;
        let n = g.atom_bits.len();
        let l = &self.layout;
        let t_max = self.config.depth;
        // gradient w.r.t. the final hidden states: the readout is a scaled sum
        let scale = self.readout_scale(n);
        let dr: Vec<f64> = dr.iter().map(|x| x * scale).collect();
        let mut dcur = vec![0.0; n * h];
        for v in 0..n {
            dcur[v * h..(v + 1) * h].copy_from_slice(&dr);
        }
        let mut dh0 = vec![0.0; n * h];
        for t in (0..t_max).rev() {
            let pre = &tape.pre_steps[t];
            let msg = &tape.msgs[t];
            let da: Vec<f64> = dcur
                .iter()
                .zip(pre)
                .map(|(g, a)| if *a > 0.0 { *g } else { 0.0 })
                .collect();
            let mut dprev = vec![0.0; n * h];
            for v in 0..n {
                let dav = &da[v * h..(v + 1) * h];
                add_to(&mut grad[l.b_m..l.b_m + h], dav);
                add_to(&mut dh0[v * h..(v + 1) * h], dav);
                outer_acc(
                    &mut grad[l.w_m..l.w_m + h * h],
                    &msg[v * h..(v + 1) * h],
                    dav,
                    h,
                );
                let dm = gemv_t(&self.params[l.w_m..l.w_m + h * h], dav, h, h);
                for &u in &g.neighbors[v] {
                    add_to(&mut dprev[u as usize * h..(u as usize + 1) * h], &dm);
                }
            }
            dcur = dprev;
        }
        // dcur now holds the gradient flowing into h0 through the first message
        add_to(&mut dh0, &dcur);
        for (v, bits) in g.atom_bits.iter().enumerate() {
            let da0: Vec<f64> = dh0[v * h..(v + 1) * h]
                .iter()
                .zip(&tape.a0[v * h..(v + 1) * h])
                .map(|(g, a)| if *a > 0.0 { *g } else { 0.0 })
                .collect();
            add_to(&mut grad[l.b_in..l.b_in + h], &da0);
            for &f in bits {
                let at = l.w_in + f as usize * h;
                add_to(&mut grad[at..at + h], &da0);
            }
        }
    }

    /// Per-sample loss and its derivative w.r.t. the raw outputs.
    pub(crate) fn loss_and_dout(&self, out: &[f64], y: f64) -> (f64, [f64; 2]) {
        match self.config.head {
            Head::Scalar => {
                let r = out[0] - y;
                (r * r, [2.0 * r, 0.0])
            }
            Head::MeanVariance => {
                let s = softplus(out[1]) + self.config.variance_floor;
                let r = y - out[0];
                let loss = HALF_LN_2PI + 0.5 * s.ln() + r * r / (2.0 * s);
                let ds = 0.5 / s - r * r / (2.0 * s * s);
                (loss, [-r / s, ds * sigmoid(out[1])])
            }
        }
    }

    /// Mean loss over `batch` and its gradient. With `mask_seed`, dropout
    /// masks come from one stream seeded by it, drawn sample by sample.
    pub fn loss_and_gradient(
        &self,
        batch: &[(&Input, f64)],
        mask_seed: Option<u64>,
    ) -> Result<(f64, Vec<f64>), NnetError> {
        if batch.is_empty() {
            return Err(NnetError::EmptyData("batch"));
        }
        let mut rng = mask_seed.map(seed::rng);
        let mut grad = vec![0.0; self.layout.total];
        let mut total = 0.0;
        let scale = 1.0 / batch.len() as f64;
        for &(x, y) in batch {
            let (_, tape) = self.run(x, rng.as_mut())?;
            let (loss, d) = self.loss_and_dout(&tape.out, y);
            total += loss;
            let d: Vec<f64> = d[..self.config.outputs()]
                .iter()
                .map(|v| v * scale)
                .collect();
            self.backward(x, &tape, &d, &mut grad);
        }
        Ok((total * scale, grad))
    }

    /// Mean loss over `batch` (same mask convention as [`loss_and_gradient`]).
    ///
    /// [`loss_and_gradient`]: TrainedModel::loss_and_gradient
    pub fn loss(&self, batch: &[(&Input, f64)], mask_seed: Option<u64>) -> Result<f64, NnetError> {
        let mut rng = mask_seed.map(seed::rng);
        let mut total = 0.0;
        for &(x, y) in batch {
            let (_, tape) = self.run(x, rng.as_mut())?;
            total += self.loss_and_dout(&tape.out, y).0;
        }
        Ok(total / batch.len() as f64)
    }

    /// ReLU sign pattern over a batch, used to detect kinks when comparing
    /// against finite differences.
    pub fn relu_pattern(
        &self,
        batch: &[(&Input, f64)],
        mask_seed: Option<u64>,
    ) -> Result<Vec<bool>, NnetError> {
        let mut rng = mask_seed.map(seed::rng);
        let mut out = Vec::new();
        for &(x, _) in batch {
            let (_, tape) = self.run(x, rng.as_mut())?;
            out.extend(tape.relu_pattern());
        }
        Ok(out)
    }

    /// Deterministic predictions, `(mean, variance)` per input.
    pub fn predict(&self, inputs: &[Input]) -> Result<Vec<Output>, NnetError> {
        inputs.iter().map(|x| self.forward(x, None)).collect()
    }
}

fn sparse_outer_acc(dw: &mut [f64], fp: &Fingerprint, dy: &[f64], inp: usize, out: usize) {
    for bit in fp.on_bits() {
        if bit < inp {
            add_to(&mut dw[bit * out..(bit + 1) * out], dy);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smiles;
    use crate::nnet::featurize;

    fn input(s: &str, c: &NetConfig) -> Input {
        featurize(&parse_smiles(s).unwrap(), c).unwrap()
    }

    #[test]
    fn zero_parameters_predict_zero() {
        for featurizer in [Featurizer::Graph, Featurizer::Fingerprint] {
            let c = NetConfig {
                featurizer,
                ..Default::default()
            };
            let m = TrainedModel::zeros(c.clone()).unwrap();
            let out = m.forward(&input("CCO", &c), None).unwrap();
            assert_eq!(out.prediction, 0.0);
            assert_eq!(out.variance, None);
            assert_eq!(out.embedding.len(), c.hidden);
        }
    }

    #[test]
    fn mve_head_variance_positive() {
        let c = NetConfig {
            head: Head::MeanVariance,
            ..Default::default()
        };
        let m = TrainedModel::init(c.clone(), 4).unwrap();
        for s in ["C", "c1ccccc1O", "CC(=O)N"] {
            assert!(m.forward(&input(s, &c), None).unwrap().variance.unwrap() > 0.0);
        }
    }

    #[test]
    fn mask_seed_reproducible() {
        let c = NetConfig {
            dropout: 0.3,
            ..Default::default()
        };
        let m = TrainedModel::init(c.clone(), 1).unwrap();
        let x = input("CCN(C)c1ccccc1", &c);
        let a = m.forward(&x, Some(&mut seed::rng(5))).unwrap();
        let b = m.forward(&x, Some(&mut seed::rng(5))).unwrap();
        let other = m.forward(&x, Some(&mut seed::rng(6))).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.prediction, other.prediction);
    }

    #[test]
    fn zero_dropout_is_identity() {
        let c = NetConfig::default();
        let m = TrainedModel::init(c.clone(), 2).unwrap();
        let x = input("CC(C)Cl", &c);
        assert_eq!(
            m.forward(&x, None).unwrap(),
            m.forward(&x, Some(&mut seed::rng(9))).unwrap()
        );
    }

    #[test]
    fn input_kind_checked() {
        let c = NetConfig::default();
        let m = TrainedModel::zeros(c).unwrap();
        let fp_cfg = NetConfig {
            featurizer: Featurizer::Fingerprint,
            ..Default::default()
        };
        assert!(matches!(
            m.forward(&input("C", &fp_cfg), None),
            Err(NnetError::InputMismatch { .. })
        ));
    }

    #[test]
    fn mve_loss_values() {
        assert!((mve_loss(1.0, 1.0, 1.0).unwrap() - 0.918939).abs() < 1e-6);
        let base = mve_loss(0.0, 1.0, 0.0).unwrap();
        let doubled = mve_loss(0.0, 2.0, 0.0).unwrap();
        assert!((doubled - base - 0.5 * 2f64.ln()).abs() < 1e-12);
        // with unit residual the minimiser over a fine grid is 1
        let best = (1..4000)
            .map(|i| i as f64 * 1e-3)
            .min_by(|a, b| {
                mve_loss(0.0, *a, 1.0)
                    .unwrap()
                    .total_cmp(&mve_loss(0.0, *b, 1.0).unwrap())
            })
            .unwrap();
        assert!((best - 1.0).abs() < 1e-3);
        assert!(
            (mve_loss(0.0, 1.0, 1.0).unwrap() - 0.5 * ((2.0 * std::f64::consts::PI).ln() + 1.0))
                .abs()
                < 1e-12
        );
        assert!(mve_loss(0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn zero_residual_gives_zero_output_bias_gradient() {
        let c = NetConfig::default();
        let m = TrainedModel::zeros(c.clone()).unwrap();
        let x = input("CCO", &c);
        let (_, g) = m.loss_and_gradient(&[(&x, 0.0)], None).unwrap();
        let ob = m.layout.out.b;
        assert_eq!(g[ob], 0.0);
    }

    #[test]
    fn permutation_invariant_graph_forward() {
        let c = NetConfig::default();
        let m = TrainedModel::init(c.clone(), 3).unwrap();
        let mol = parse_smiles("CC(=O)Nc1ccc(O)cc1").unwrap();
        let n = mol.atom_count();
        let perm: Vec<usize> = (0..n).map(|i| (i * 5 + 3) % n).collect();
        let a = m.forward(&featurize(&mol, &c).unwrap(), None).unwrap();
        let b = m
            .forward(&featurize(&mol.permuted(&perm).unwrap(), &c).unwrap(), None)
            .unwrap();
        assert!((a.prediction - b.prediction).abs() < 1e-10);
    }
}
