//! Offline float training of the sigmoid MLP that is later quantized onto the
//! crossbars.
//!
//! Hidden layers use the logistic sigmoid, matching the hardware activation.
//! The output head is softmax cross-entropy for multi-class problems and a
//! logistic unit with binary cross-entropy when there is a single output.
//! Training is single-threaded and fully determined by the seed.

use ndarray::{s, Array1, Array2, ArrayView2, Axis, Zip};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::weights::{LayerRecord, TrainingMeta, WeightFile, FORMAT_VERSION};
use super::Dataset;
use crate::error::{Error, Result};
use crate::network::Topology;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyper {
    pub lr: f32,
    pub epochs: usize,
    pub batch: usize,
    pub seed: u64,
    pub momentum: f32,
}

impl Default for Hyper {
    fn default() -> Self {
        Self {
            lr: 0.1,
            epochs: 10,
            batch: 32,
            seed: 7,
            momentum: 0.9,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub weights: WeightFile,
    /// Mean training loss of each epoch, accumulated during the epoch.
    pub epoch_losses: Vec<f64>,
}

struct Layer {
    w: Array2<f32>,
    b: Array1<f32>,
    vw: Array2<f32>,
    vb: Array1<f32>,
}

fn sigmoid_inplace(a: &mut Array2<f32>) {
    a.mapv_inplace(|z| 1.0 / (1.0 + (-z).exp()));
}

fn check_dataset(topology: &Topology, dataset: &Dataset) -> Result<()> {
    if dataset.width() != topology.inputs() {
        return Err(Error::Argument(format!(
            "dataset width {} does not match the {}-input topology",
            dataset.width(),
            topology.inputs()
        )));
    }
    let classes = topology.outputs().max(2);
    if let Some(bad) = dataset
        .labels()
        .iter()
        .find(|&&l| usize::from(l) >= classes)
    {
        return Err(Error::Range(format!(
            "label {bad} outside the {classes} classes of the output layer"
        )));
    }
    Ok(())
}

fn batch_inputs(dataset: &Dataset, idx: &[usize]) -> Array2<f32> {
    let width = dataset.width();
    let mut x = Array2::zeros((idx.len(), width));
    for (row, &i) in x.rows_mut().into_iter().zip(idx) {
        let (features, _) = dataset.sample(i);
        row.into_slice().unwrap().copy_from_slice(features);
    }
    x
}

/// Forward pass returning every layer's activations; the last entry holds
/// raw output logits.
fn forward(layers: &[Layer], x: Array2<f32>) -> Vec<Array2<f32>> {
    let mut acts = vec![x];
    for (i, layer) in layers.iter().enumerate() {
        let mut z = acts[i].dot(&layer.w);
        z += &layer.b;
        if i + 1 < layers.len() {
            sigmoid_inplace(&mut z);
        }
        acts.push(z);
    }
    acts
}

/// Turn logits into `dLoss/dlogits` (unnormalized by batch) and return the
/// summed loss.
fn output_gradient(logits: &mut Array2<f32>, labels: &[u8]) -> f64 {
    let mut loss = 0.0f64;
    if logits.ncols() == 1 {
        for (mut row, &y) in logits.rows_mut().into_iter().zip(labels) {
            let z = row[0];
            let p = 1.0 / (1.0 + (-z).exp());
            let y = f32::from(y);
            // log(1 + e^-|z|) form keeps BCE finite for large |z|.
            loss += f64::from(z.max(0.0) - z * y + (-z.abs()).exp().ln_1p());
            row[0] = p - y;
        }
        return loss;
    }
    for (mut row, &y) in logits.rows_mut().into_iter().zip(labels) {
        let max = row.fold(f32::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row /= sum;
        loss -= f64::from(row[usize::from(y)].max(1e-30).ln());
        row[usize::from(y)] -= 1.0;
    }
    loss
}

pub fn train_mlp(topology: &Topology, dataset: &Dataset, hyper: &Hyper) -> Result<TrainReport> {
    check_dataset(topology, dataset)?;
    if dataset.is_empty() {
        return Err(Error::Argument("cannot train on an empty dataset".into()));
    }
    if hyper.batch == 0 || !(hyper.lr >= 0.0) || !(0.0..1.0).contains(&hyper.momentum) {
        return Err(Error::Argument(format!(
            "invalid hyperparameters: batch {}, lr {}, momentum {}",
            hyper.batch, hyper.lr, hyper.momentum
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut layers: Vec<Layer> = topology
        .layer_shapes()
        .map(|(n, m)| {
            let limit = (6.0 / (n + m) as f32).sqrt();
            let w = Array2::from_shape_fn((n, m), |_| rng.gen_range(-limit..limit));
            Layer {
                w,
                b: Array1::zeros(m),
                vw: Array2::zeros((n, m)),
                vb: Array1::zeros(m),
            }
        })
        .collect();

    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut epoch_losses = Vec::with_capacity(hyper.epochs);
    for epoch in 0..hyper.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0f64;
        for idx in order.chunks(hyper.batch) {
            let labels: Vec<u8> = idx.iter().map(|&i| dataset.sample(i).1).collect();
            let mut acts = forward(&layers, batch_inputs(dataset, idx));
            let mut delta = acts.pop().unwrap();
            total += output_gradient(&mut delta, &labels);
            delta /= idx.len() as f32;

            for l in (0..layers.len()).rev() {
                let input = &acts[l];
                let grad_w = input.t().dot(&delta);
                let grad_b = delta.sum_axis(Axis(0));
                if l > 0 {
                    let mut back = delta.dot(&layers[l].w.t());
                    Zip::from(&mut back)
                        .and(input)
                        .for_each(|d, &a| *d *= a * (1.0 - a));
                    delta = back;
                }
                let layer = &mut layers[l];
                let (mu, lr) = (hyper.momentum, hyper.lr);
                Zip::from(&mut layer.vw)
                    .and(&grad_w)
                    .for_each(|v, &g| *v = mu * *v - lr * g);
                Zip::from(&mut layer.vb)
                    .and(&grad_b)
                    .for_each(|v, &g| *v = mu * *v - lr * g);
                layer.w += &layer.vw;
                layer.b += &layer.vb;
            }
        }
        let mean = total / dataset.len() as f64;
        log::info!("epoch {}/{}: loss {mean:.5}", epoch + 1, hyper.epochs);
        epoch_losses.push(mean);
    }

    let records = layers
        .into_iter()
        .map(|layer| {
            let (n, m) = layer.w.dim();
            let weights: Vec<f32> = layer.w.iter().copied().collect();
            let bias: Vec<f32> = layer.b.to_vec();
            let max = weights
                .iter()
                .chain(&bias)
                .fold(0.0f64, |acc, &w| acc.max(f64::from(w).abs()));
            LayerRecord {
                inputs: n,
                outputs: m,
                w_max: if max > 0.0 { max } else { 1.0 },
                weights,
                bias,
                levels: None,
                bias_levels: None,
            }
        })
        .collect();
    let weights = WeightFile {
        version: FORMAT_VERSION,
        topology: topology.clone(),
        layers: records,
        training: Some(TrainingMeta {
            seed: hyper.seed,
            epochs: hyper.epochs,
            learning_rate: hyper.lr,
            batch: hyper.batch,
            momentum: hyper.momentum,
            epoch_losses: epoch_losses.clone(),
        }),
    };
    Ok(TrainReport {
        weights,
        epoch_losses,
    })
}

/// Accuracy of the float network (argmax of the output logits).
pub fn float_accuracy(wf: &WeightFile, dataset: &Dataset) -> Result<f64> {
    wf.validate()?;
    check_dataset(&wf.topology, dataset)?;
    if dataset.is_empty() {
        return Err(Error::Argument("cannot score an empty dataset".into()));
    }
    let layers: Vec<Layer> = wf
        .layers
        .iter()
        .map(|r| Layer {
            w: Array2::from_shape_vec((r.inputs, r.outputs), r.weights.clone()).unwrap(),
            b: Array1::from_vec(r.bias.clone()),
            vw: Array2::zeros((0, 0)),
            vb: Array1::zeros(0),
        })
        .collect();
    let all = ArrayView2::from_shape((dataset.len(), dataset.width()), dataset.features()).unwrap();
    let mut correct = 0usize;
    for start in (0..dataset.len()).step_by(1000) {
        let end = (start + 1000).min(dataset.len());
        let logits = forward(&layers, all.slice(s![start..end, ..]).to_owned())
            .pop()
            .unwrap();
        for (row, &label) in logits.rows().into_iter().zip(&dataset.labels()[start..end]) {
            let predicted = if row.len() == 1 {
                usize::from(row[0] > 0.0)
            } else {
                let mut best = 0;
                for (i, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = i;
                    }
                }
                best
            };
            correct += usize::from(predicted == usize::from(label));
        }
    }
    Ok(correct as f64 / dataset.len() as f64)
}
