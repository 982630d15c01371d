//! Multilayer feedforward network built from crossbar layers, interface
//! modules and current-mode activations.
//!
//! Two forward paths are provided. [`Network::forward_device`] runs every
//! neuron through the crossbar read, the clocked IM simulation and the
//! activation. [`Network::forward_behavioral`] collapses each layer into
//! `f(transfer(v_read · (G⁺ − G⁻)ᵀ x))`, which is algebraically the same
//! computation and much cheaper for dataset-scale evaluation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::crossbar::{self, DualColumnLayer, Fidelity, WeightGrid, WeightLevel};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::interface::{self, IMParams};
use crate::memristor::MemristorParams;

/// Layer widths, input first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Topology(Vec<usize>);

impl Topology {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::Argument(format!(
                "a topology needs an input and at least one neuron layer, got {sizes:?}"
            )));
        }
        if sizes.contains(&0) {
            return Err(Error::Argument(format!(
                "layer widths must be positive: {sizes:?}"
            )));
        }
        Ok(Self(sizes))
    }

    pub fn mnist() -> Self {
        Self(vec![784, 500, 300, 128, 10])
    }

    pub fn cifar10() -> Self {
        Self(vec![1024, 500, 256, 64, 10])
    }

    /// Power accounting only; there is no ASL loader.
    pub fn asl() -> Self {
        Self(vec![400_000, 1000, 500, 128, 24])
    }

    pub fn sizes(&self) -> &[usize] {
        &self.0
    }

    pub fn inputs(&self) -> usize {
        self.0[0]
    }

    pub fn outputs(&self) -> usize {
        *self.0.last().unwrap()
    }

    /// Total neuron count (all non-input layers).
    pub fn neurons(&self) -> usize {
        self.0[1..].iter().sum()
    }

    /// `(inputs, outputs)` of every weight layer.
    pub fn layer_shapes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.windows(2).map(|w| (w[0], w[1]))
    }
}

impl TryFrom<Vec<usize>> for Topology {
    type Error = Error;

    fn try_from(sizes: Vec<usize>) -> Result<Self> {
        Self::new(sizes)
    }
}

impl From<Topology> for Vec<usize> {
    fn from(t: Topology) -> Self {
        t.0
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let sizes = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::Argument(format!("bad layer width `{p}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(sizes)
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

pub fn sigmoid(i: f64, i_half: f64) -> f64 {
    1.0 / (1.0 + (-i / i_half).exp())
}

/// Hard threshold; exactly zero maps to 0.
pub fn step(i: f64) -> f64 {
    if i > 0.0 {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivationKind {
    #[default]
    Sigmoid,
    Step,
}

impl FromStr for ActivationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sigmoid" => Ok(Self::Sigmoid),
            "step" => Ok(Self::Step),
            other => Err(Error::Argument(format!(
                "unknown activation `{other}` (expected sigmoid or step)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    Sigmoid { i_half: f64 },
    Step,
}

impl Activation {
    pub fn apply(&self, i: f64) -> f64 {
        match *self {
            Activation::Sigmoid { i_half } => sigmoid(i, i_half),
            Activation::Step => step(i),
        }
    }
}

/// How each layer's IM output range is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainScaling {
    /// Choose `k` per layer so the activation sees the same pre-activation
    /// (in weight units) as the quantized float network.
    #[default]
    MatchWeights,
    /// Use the configured `k`: the layer's full-scale current maps to
    /// `k · i_half`.
    Fixed,
}

/// Hardware settings shared by every layer of a network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardwareSettings {
    pub memristor: MemristorParams,
    /// Template for the per-layer IM; its mirrors are recalibrated per layer.
    pub im: IMParams,
    pub v_read: f64,
    pub i_half: f64,
    pub activation: ActivationKind,
    pub scaling: GainScaling,
    pub fidelity: Fidelity,
    /// Append an always-on input row carrying the bias weights.
    pub bias: bool,
}

impl Default for HardwareSettings {
    fn default() -> Self {
        Self {
            memristor: MemristorParams::default(),
            im: IMParams::default(),
            v_read: 0.5,
            i_half: 1e-6,
            activation: ActivationKind::Sigmoid,
            scaling: GainScaling::MatchWeights,
            fidelity: Fidelity::Ideal,
            bias: true,
        }
    }
}

/// One quantized weight layer: `inputs × outputs` levels plus bias levels,
/// all sharing `w_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedLayer {
    pub inputs: usize,
    pub outputs: usize,
    pub levels: Vec<WeightLevel>,
    pub bias_levels: Vec<WeightLevel>,
    pub w_max: f64,
}

impl QuantizedLayer {
    /// Quantize float weights and biases against their common largest
    /// magnitude (1 for an all-zero layer).
    pub fn quantize(weights: &WeightGrid, bias: &[f64]) -> Result<Self> {
        if bias.len() != weights.cols {
            return Err(Error::Argument(format!(
                "{} biases for {} neurons",
                bias.len(),
                weights.cols
            )));
        }
        let max = bias.iter().fold(weights.max_abs(), |m, b| m.max(b.abs()));
        let w_max = if max > 0.0 { max } else { 1.0 };
        let q = |w: &f64| crossbar::quantize_weight(*w, w_max);
        Ok(Self {
            inputs: weights.rows,
            outputs: weights.cols,
            levels: weights.values.iter().map(q).collect::<Result<_>>()?,
            bias_levels: bias.iter().map(q).collect::<Result<_>>()?,
            w_max,
        })
    }
}

#[derive(Debug, Clone)]
pub struct NetworkLayer {
    crossbar: DualColumnLayer,
    differential: Vec<f64>,
    im: IMParams,
    activation: Activation,
}

impl NetworkLayer {
    pub fn crossbar(&self) -> &DualColumnLayer {
        &self.crossbar
    }

    pub fn im(&self) -> &IMParams {
        &self.im
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    /// Overall current gain from `I⁺ − I⁻` to the activation input.
    pub fn gain(&self) -> f64 {
        self.im.linear_gain()
    }

    /// Scale the output mirror. Used to probe gain invariances.
    pub fn scale_output_gain(&mut self, factor: f64) {
        self.im.g_out *= factor;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForwardPath {
    Behavioral,
    Device,
}

impl FromStr for ForwardPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "behavioral" => Ok(Self::Behavioral),
            "device" => Ok(Self::Device),
            other => Err(Error::Argument(format!(
                "unknown fidelity `{other}` (expected behavioral or device)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Network {
    topology: Topology,
    layers: Vec<NetworkLayer>,
    bias: bool,
}

impl Network {
    pub fn build(layers: &[QuantizedLayer], hw: &HardwareSettings) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Argument("network needs at least one layer".into()));
        }
        let mut sizes = vec![layers[0].inputs];
        for pair in layers.windows(2) {
            if pair[0].outputs != pair[1].inputs {
                return Err(Error::Argument(format!(
                    "layer with {} outputs feeds a layer with {} inputs",
                    pair[0].outputs, pair[1].inputs
                )));
            }
        }
        sizes.extend(layers.iter().map(|l| l.outputs));
        let topology = Topology::new(sizes)?;
        hw.im.validate()?;
        if !(hw.i_half > 0.0) {
            return Err(Error::Argument(format!(
                "i_half must be positive, got {}",
                hw.i_half
            )));
        }

        let built = layers
            .iter()
            .map(|layer| build_layer(layer, hw))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            topology,
            layers: built,
            bias: hw.bias,
        })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn layers(&self) -> &[NetworkLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [NetworkLayer] {
        &mut self.layers
    }

    fn layer_input(&self, x: &[f64]) -> Vec<f64> {
        let mut row = Vec::with_capacity(x.len() + 1);
        row.extend_from_slice(x);
        if self.bias {
            row.push(1.0);
        }
        row
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.topology.inputs() {
            return Err(Error::Argument(format!(
                "input has {} features, network expects {}",
                x.len(),
                self.topology.inputs()
            )));
        }
        if let Some(bad) = x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Range(format!("input {bad} outside [0, 1]")));
        }
        Ok(())
    }

    /// Full device path: crossbar read, one simulated IM clock period per
    /// neuron, then the activation.
    pub fn forward_device(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut signal = x.to_vec();
        for layer in &self.layers {
            let (plus, minus) = layer.crossbar.column_currents(&self.layer_input(&signal))?;
            signal = plus
                .iter()
                .zip(&minus)
                .map(|(&p, &m)| {
                    Ok(layer
                        .activation
                        .apply(interface::evaluate(p, m, &layer.im)?))
                })
                .collect::<Result<_>>()?;
        }
        Ok(signal)
    }

    /// Closed-form path: `f(transfer(v_read · (G⁺ − G⁻)ᵀ x))` per layer, with
    /// the IM edge clamp applied.
    pub fn forward_behavioral(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut signal = x.to_vec();
        for layer in &self.layers {
            let input = self.layer_input(&signal);
            let cols = layer.crossbar.cols();
            let mut delta = vec![0.0; cols];
            for (i, &xi) in input.iter().enumerate() {
                if xi == 0.0 {
                    continue;
                }
                for (acc, d) in delta
                    .iter_mut()
                    .zip(&layer.differential[i * cols..(i + 1) * cols])
                {
                    *acc += xi * d;
                }
            }
            let v_read = layer.crossbar.v_read();
            signal = delta
                .into_iter()
                .map(|d| layer.activation.apply(layer.im.transfer(v_read * d)))
                .collect();
        }
        Ok(signal)
    }

    pub fn forward(&self, x: &[f64], path: ForwardPath) -> Result<Vec<f64>> {
        match path {
            ForwardPath::Behavioral => self.forward_behavioral(x),
            ForwardPath::Device => self.forward_device(x),
        }
    }

    pub fn predict(&self, x: &[f64], path: ForwardPath) -> Result<usize> {
        Ok(classify(&self.forward(x, path)?))
    }
}

/// Class decision: argmax (first index wins ties); a single output neuron is
/// read as a binary decision at 0.5.
pub fn classify(outputs: &[f64]) -> usize {
    if outputs.len() == 1 {
        return usize::from(outputs[0] > 0.5);
    }
    let mut best = 0;
    for (i, &v) in outputs.iter().enumerate() {
        if v > outputs[best] {
            best = i;
        }
    }
    best
}

fn build_layer(layer: &QuantizedLayer, hw: &HardwareSettings) -> Result<NetworkLayer> {
    if layer.levels.len() != layer.inputs * layer.outputs
        || layer.bias_levels.len() != layer.outputs
    {
        return Err(Error::Argument(format!(
            "quantized layer {}×{} has {} weight levels and {} bias levels",
            layer.inputs,
            layer.outputs,
            layer.levels.len(),
            layer.bias_levels.len()
        )));
    }
    let mut levels = layer.levels.clone();
    let rows = if hw.bias {
        levels.extend_from_slice(&layer.bias_levels);
        layer.inputs + 1
    } else {
        layer.inputs
    };
    let crossbar = DualColumnLayer::from_levels(
        rows,
        layer.outputs,
        levels,
        layer.w_max,
        hw.v_read,
        hw.fidelity,
        &hw.memristor,
    )?;

    // Current per unit of w_max on one fully driven row.
    let unit_current = hw.v_read * (hw.memristor.g_on() - hw.memristor.g_off());
    let mut max_delta = crossbar.max_delta_current();
    if max_delta <= 0.0 {
        max_delta = unit_current * rows as f64;
    }
    let mut template = hw.im;
    if hw.scaling == GainScaling::MatchWeights {
        template.k = max_delta / unit_current * layer.w_max;
    }
    let im = interface::calibrate(max_delta, hw.i_half, &template)?;
    let activation = match hw.activation {
        ActivationKind::Sigmoid => Activation::Sigmoid { i_half: hw.i_half },
        ActivationKind::Step => Activation::Step,
    };
    Ok(NetworkLayer {
        differential: crossbar.differential(),
        crossbar,
        im,
        activation,
    })
}

/// Fraction of samples whose predicted class matches the label.
pub fn evaluate_accuracy(net: &Network, dataset: &Dataset, path: ForwardPath) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::Argument("cannot score an empty dataset".into()));
    }
    let classes = net.topology.outputs().max(2);
    let mut correct = 0usize;
    let mut x = vec![0.0; dataset.width()];
    for (features, label) in dataset.iter() {
        if usize::from(label) >= classes {
            return Err(Error::Range(format!(
                "label {label} outside the {classes} network classes"
            )));
        }
        for (dst, &src) in x.iter_mut().zip(features) {
            *dst = f64::from(src);
        }
        if net.predict(&x, path)? == usize::from(label) {
            correct += 1;
        }
    }
    Ok(correct as f64 / dataset.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_layers(sizes: &[usize], seed: u64) -> Vec<QuantizedLayer> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        sizes
            .windows(2)
            .map(|w| {
                let values = (0..w[0] * w[1]).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let bias: Vec<f64> = (0..w[1]).map(|_| rng.gen_range(-0.5..0.5)).collect();
                QuantizedLayer::quantize(&WeightGrid::new(w[0], w[1], values).unwrap(), &bias)
                    .unwrap()
            })
            .collect()
    }

    #[test]
    fn topology_rules() {
        assert!(Topology::new(vec![4]).is_err());
        assert!(Topology::new(vec![4, 0]).is_err());
        let t: Topology = "784,500,300,128,10".parse().unwrap();
        assert_eq!(t, Topology::mnist());
        assert_eq!(t.neurons(), 938);
        assert_eq!(t.to_string(), "784,500,300,128,10");
    }

    #[test]
    fn activation_examples() {
        assert_eq!(sigmoid(0.0, 1e-6), 0.5);
        assert!((sigmoid(1e-6 * 9f64.ln(), 1e-6) - 0.9).abs() < 1e-12);
        assert_eq!(sigmoid(-1.0, 1e-6), 0.0);
        assert_eq!(sigmoid(1.0, 1e-6), 1.0);
        assert_eq!(step(1e-6), 1.0);
        assert_eq!(step(-1e-6), 0.0);
        assert_eq!(step(0.0), 0.0);
    }

    #[test]
    fn zero_weights_give_half() {
        let q = QuantizedLayer::quantize(&WeightGrid::new(3, 2, vec![0.0; 6]).unwrap(), &[0.0; 2])
            .unwrap();
        let net = Network::build(&[q], &HardwareSettings::default()).unwrap();
        for path in [ForwardPath::Device, ForwardPath::Behavioral] {
            assert_eq!(net.forward(&[1.0, 0.3, 0.0], path).unwrap(), vec![0.5, 0.5]);
        }
    }

    #[test]
    fn single_full_scale_weight_with_fixed_k() {
        let q =
            QuantizedLayer::quantize(&WeightGrid::new(1, 1, vec![2.0]).unwrap(), &[0.0]).unwrap();
        let hw = HardwareSettings {
            scaling: GainScaling::Fixed,
            bias: false,
            ..Default::default()
        };
        let net = Network::build(&[q], &hw).unwrap();
        let y = net.forward_device(&[1.0]).unwrap()[0];
        // Independent oracle: the saturated IM output is 4·i_half.
        let expected = 1.0 / (1.0 + (-4.0f64).exp());
        assert!((y - expected).abs() < 1e-9);
        assert!((y - 0.982).abs() < 1e-3);
    }

    #[test]
    fn match_weights_reproduces_quantized_preactivation() {
        let layers = random_layers(&[6, 3], 5);
        let net = Network::build(&layers, &HardwareSettings::default()).unwrap();
        let x = [0.2, 0.9, 0.0, 1.0, 0.4, 0.7];
        let y = net.forward_device(&x).unwrap();
        let q = &layers[0];
        for (j, out) in y.iter().enumerate() {
            let mut z = q.bias_levels[j].dequantize(q.w_max);
            for (i, xi) in x.iter().enumerate() {
                z += xi * q.levels[i * 3 + j].dequantize(q.w_max);
            }
            let expected = 1.0 / (1.0 + (-z).exp());
            assert!((out - expected).abs() < 1e-9, "{out} vs {expected}");
        }
    }

    #[test]
    fn negated_weights_mirror_outputs() {
        let layers = random_layers(&[5, 4], 9);
        let negated: Vec<QuantizedLayer> = layers
            .iter()
            .map(|l| QuantizedLayer {
                levels: l
                    .levels
                    .iter()
                    .map(|v| WeightLevel::from_signed(-v.signed()).unwrap())
                    .collect(),
                bias_levels: l
                    .bias_levels
                    .iter()
                    .map(|v| WeightLevel::from_signed(-v.signed()).unwrap())
                    .collect(),
                ..l.clone()
            })
            .collect();
        let hw = HardwareSettings::default();
        let a = Network::build(&layers, &hw).unwrap();
        let b = Network::build(&negated, &hw).unwrap();
        let x = [0.1, 0.5, 0.9, 0.3, 1.0];
        for (ya, yb) in a
            .forward_device(&x)
            .unwrap()
            .iter()
            .zip(b.forward_device(&x).unwrap())
        {
            assert!((ya + yb - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn step_outputs_are_binary() {
        let hw = HardwareSettings {
            activation: ActivationKind::Step,
            ..Default::default()
        };
        let net = Network::build(&random_layers(&[8, 6, 3], 2), &hw).unwrap();
        let y = net.forward_device(&[0.5; 8]).unwrap();
        assert!(y.iter().all(|&v| v == 0.0 || v == 1.0));
        assert_eq!(y, net.forward_behavioral(&[0.5; 8]).unwrap());
    }

    #[test]
    fn input_validation() {
        let net = Network::build(&random_layers(&[3, 2], 1), &HardwareSettings::default()).unwrap();
        assert!(matches!(
            net.forward_device(&[0.1, 0.2]),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            net.forward_behavioral(&[0.1, 0.2, 1.2]),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn classify_rules() {
        assert_eq!(classify(&[0.1, 0.7, 0.7]), 1);
        assert_eq!(classify(&[0.6]), 1);
        assert_eq!(classify(&[0.5]), 0);
    }

    #[test]
    fn accuracy_of_single_matching_sample() {
        let net = Network::build(&random_layers(&[4, 3], 3), &HardwareSettings::default()).unwrap();
        let x = [0.25f32, 0.5, 0.75, 1.0];
        let xf: Vec<f64> = x.iter().map(|&v| f64::from(v)).collect();
        let label = net.predict(&xf, ForwardPath::Device).unwrap() as u8;
        let ds = Dataset::new(4, 3, x.to_vec(), vec![label]).unwrap();
        assert_eq!(
            evaluate_accuracy(&net, &ds, ForwardPath::Device).unwrap(),
            1.0
        );
        let empty = Dataset::new(4, 3, vec![], vec![]).unwrap();
        assert!(evaluate_accuracy(&net, &empty, ForwardPath::Device).is_err());
    }

    proptest! {
        #[test]
        fn deterministic_and_in_range(seed in 0u64..1000, x in proptest::collection::vec(0.0f64..=1.0, 7)) {
            let net = Network::build(&random_layers(&[7, 5, 2], seed), &HardwareSettings::default()).unwrap();
            let a = net.forward_device(&x).unwrap();
            let b = net.forward_device(&x).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert!(a.iter().all(|&v| v > 0.0 && v < 1.0));
        }

        #[test]
        fn output_gain_scaling_keeps_argmax(seed in 0u64..1000, factor in 0.1f64..3.0,
                                            x in proptest::collection::vec(0.0f64..=1.0, 6)) {
            let mut net = Network::build(&random_layers(&[6, 4, 5], seed), &HardwareSettings::default()).unwrap();
            let before = net.predict(&x, ForwardPath::Behavioral).unwrap();
            net.layers_mut().last_mut().unwrap().scale_output_gain(factor);
            prop_assert_eq!(net.predict(&x, ForwardPath::Behavioral).unwrap(), before);
        }
    }
}
