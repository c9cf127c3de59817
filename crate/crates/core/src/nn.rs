//! Dense feedforward networks with hand-written reverse-mode gradients and
//! an Adam optimizer.
//!
//! A network maps a scalar input to a scalar output through a stack of
//! affine layers. Hidden layers share one activation; the output layer has
//! its own. Weights are stored row-major with shape `(outputs, inputs)`.
//!
//! Everything runs in `f64`. The fourth-derivative stencil divides network
//! samples by `h^4`, which leaves too few significant digits in `f32`.

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Default layout: one input, two hidden layers of 128 units, one output.
pub const DEFAULT_LAYER_DIMS: [usize; 4] = [1, 128, 128, 1];

/// Element-wise activation function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Identity,
    Sigmoid,
    Relu,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Identity => z,
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative expressed through the activation's own output `a = apply(z)`.
    #[inline]
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Sigmoid => a * (1.0 - a),
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Identity => "identity",
            Activation::Sigmoid => "sigmoid",
            Activation::Relu => "relu",
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "identity" | "linear" => Ok(Activation::Identity),
            "sigmoid" => Ok(Activation::Sigmoid),
            "relu" => Ok(Activation::Relu),
            other => Err(Error::InvalidParameter {
                name: "activation",
                reason: format!("unknown activation `{other}`"),
            }),
        }
    }
}

/// Weights and biases of one affine layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    inputs: usize,
    outputs: usize,
    /// Row-major, shape (outputs, inputs).
    weights: Vec<f64>,
    biases: Vec<f64>,
}

impl LayerParams {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }

    /// Builds a layer from explicit row-major weights and biases.
    pub fn from_parts(inputs: usize, outputs: usize, weights: Vec<f64>, biases: Vec<f64>) -> Result<Self> {
        if inputs == 0 || outputs == 0 {
            return Err(Error::InvalidLayout("layer widths must be at least 1".into()));
        }
        if weights.len() != inputs * outputs {
            return Err(Error::LengthMismatch {
                expected: inputs * outputs,
                actual: weights.len(),
            });
        }
        if biases.len() != outputs {
            return Err(Error::LengthMismatch {
                expected: outputs,
                actual: biases.len(),
            });
        }
        Ok(Self {
            inputs,
            outputs,
            weights,
            biases,
        })
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn biases_mut(&mut self) -> &mut [f64] {
        &mut self.biases
    }

    #[inline]
    pub fn weight(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.inputs + col]
    }

    fn same_shape(&self, other: &LayerParams) -> bool {
        self.inputs == other.inputs && self.outputs == other.outputs
    }

    fn values(&self) -> impl Iterator<Item = &f64> {
        self.weights.iter().chain(self.biases.iter())
    }

    fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights.iter_mut().chain(self.biases.iter_mut())
    }
}

/// A scalar-to-scalar multilayer perceptron.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseNetwork {
    layers: Vec<LayerParams>,
    hidden_activation: Activation,
    output_activation: Activation,
}

/// Creates a Glorot-uniform initialized network with zero biases.
///
/// Each weight of a layer with `fan_in` inputs and `fan_out` outputs is drawn
/// from `U(-sqrt(6 / (fan_in + fan_out)), +sqrt(6 / (fan_in + fan_out)))`
/// using a ChaCha8 generator seeded with `seed`. Hidden layers use
/// [`Activation::Sigmoid`], the output layer [`Activation::Identity`].
pub fn init_network(layer_dims: &[usize], seed: u64) -> Result<DenseNetwork> {
    validate_layout(layer_dims)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers = layer_dims
        .windows(2)
        .map(|pair| {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = glorot_bound(fan_in, fan_out);
            let dist = Uniform::new_inclusive(-bound, bound);
            let weights = (0..fan_in * fan_out).map(|_| dist.sample(&mut rng)).collect();
            LayerParams {
                inputs: fan_in,
                outputs: fan_out,
                weights,
                biases: vec![0.0; fan_out],
            }
        })
        .collect();
    Ok(DenseNetwork {
        layers,
        hidden_activation: Activation::Sigmoid,
        output_activation: Activation::Identity,
    })
}

/// Half-width of the Glorot-uniform interval.
pub fn glorot_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Checks that `layer_dims` describes a scalar-to-scalar network with no empty layer.
pub fn validate_layout(layer_dims: &[usize]) -> Result<()> {
    if layer_dims.len() < 2 {
        return Err(Error::InvalidLayout(format!(
            "need at least an input and an output width, got {layer_dims:?}"
        )));
    }
    if layer_dims.contains(&0) {
        return Err(Error::InvalidLayout(format!("zero-width layer in {layer_dims:?}")));
    }
    if layer_dims[0] != 1 || layer_dims[layer_dims.len() - 1] != 1 {
        return Err(Error::InvalidLayout(format!(
            "network must map a scalar to a scalar, got {layer_dims:?}"
        )));
    }
    Ok(())
}

struct Trace {
    /// `activations[k]` holds the batch's layer-k outputs, row-major (batch, width_k).
    /// `activations[0]` is the input batch.
    activations: Vec<Vec<f64>>,
}

impl DenseNetwork {
    /// Assembles a network from explicit layers.
    pub fn from_layers(
        layers: Vec<LayerParams>,
        hidden_activation: Activation,
        output_activation: Activation,
    ) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidLayout("network has no layers".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].outputs != pair[1].inputs {
                return Err(Error::InvalidLayout(format!(
                    "layer with {} outputs feeds a layer with {} inputs",
                    pair[0].outputs, pair[1].inputs
                )));
            }
        }
        let net = Self {
            layers,
            hidden_activation,
            output_activation,
        };
        validate_layout(&net.layer_dims())?;
        Ok(net)
    }

    pub fn with_activations(mut self, hidden: Activation, output: Activation) -> Self {
        self.hidden_activation = hidden;
        self.output_activation = output;
        self
    }

    pub fn hidden_activation(&self) -> Activation {
        self.hidden_activation
    }

    pub fn output_activation(&self) -> Activation {
        self.output_activation
    }

    pub fn layer_dims(&self) -> Vec<usize> {
        std::iter::once(self.layers[0].inputs)
            .chain(self.layers.iter().map(|l| l.outputs))
            .collect()
    }

    pub fn layers(&self) -> &[LayerParams] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [LayerParams] {
        &mut self.layers
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// All parameters flattened layer by layer, weights before biases.
    pub fn parameters(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.values().copied()).collect()
    }

    /// Overwrites the parameters from a flat slice in [`parameters`](Self::parameters) order.
    pub fn set_parameters(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.param_count() {
            return Err(Error::LengthMismatch {
                expected: self.param_count(),
                actual: values.len(),
            });
        }
        for (dst, &src) in self.layers.iter_mut().flat_map(|l| l.values_mut()).zip(values) {
            *dst = src;
        }
        Ok(())
    }

    fn activation_of(&self, layer: usize) -> Activation {
        if layer + 1 == self.layers.len() {
            self.output_activation
        } else {
            self.hidden_activation
        }
    }

    fn trace(&self, xs: &[f64]) -> Trace {
        let batch = xs.len();
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(xs.to_vec());
        for (k, layer) in self.layers.iter().enumerate() {
            let act = self.activation_of(k);
            let input = &activations[k];
            let mut out = vec![0.0; batch * layer.outputs];
            for n in 0..batch {
                let a = &input[n * layer.inputs..(n + 1) * layer.inputs];
                let row_out = &mut out[n * layer.outputs..(n + 1) * layer.outputs];
                for (j, o) in row_out.iter_mut().enumerate() {
                    let w = &layer.weights[j * layer.inputs..(j + 1) * layer.inputs];
                    let z = layer.biases[j] + w.iter().zip(a).map(|(wi, ai)| wi * ai).sum::<f64>();
                    *o = act.apply(z);
                }
            }
            activations.push(out);
        }
        Trace { activations }
    }

    /// Evaluates the network at every input.
    pub fn forward(&self, xs: &[f64]) -> Vec<f64> {
        debug_assert!(xs.iter().all(|x| x.is_finite()), "non-finite network input");
        self.trace(xs).activations.pop().unwrap_or_default()
    }

    /// Returns `sum_i upstream[i] * dF(xs[i])/dtheta` for every parameter `theta`.
    pub fn backward(&self, xs: &[f64], upstream: &[f64]) -> Result<ParamGradient> {
        if xs.len() != upstream.len() {
            return Err(Error::LengthMismatch {
                expected: xs.len(),
                actual: upstream.len(),
            });
        }
        let batch = xs.len();
        let trace = self.trace(xs);
        let mut grads: Vec<LayerParams> = self
            .layers
            .iter()
            .map(|l| LayerParams::zeros(l.inputs, l.outputs))
            .collect();

        let last = self.layers.len() - 1;
        let out_act = &trace.activations[last + 1];
        let mut delta: Vec<f64> = upstream
            .iter()
            .zip(out_act)
            .map(|(u, &a)| u * self.output_activation.derivative_from_output(a))
            .collect();

        for k in (0..self.layers.len()).rev() {
            let layer = &self.layers[k];
            let input = &trace.activations[k];
            let grad = &mut grads[k];
            let propagate = k > 0;
            let mut next = if propagate {
                vec![0.0; batch * layer.inputs]
            } else {
                Vec::new()
            };
            for n in 0..batch {
                let a = &input[n * layer.inputs..(n + 1) * layer.inputs];
                for j in 0..layer.outputs {
                    let d = delta[n * layer.outputs + j];
                    if d == 0.0 {
                        continue;
                    }
                    grad.biases[j] += d;
                    let row = j * layer.inputs..(j + 1) * layer.inputs;
                    for (g, ai) in grad.weights[row.clone()].iter_mut().zip(a) {
                        *g += d * ai;
                    }
                    if propagate {
                        let back = &mut next[n * layer.inputs..(n + 1) * layer.inputs];
                        for (b, w) in back.iter_mut().zip(&layer.weights[row]) {
                            *b += d * w;
                        }
                    }
                }
            }
            if propagate {
                for (d, &a) in next.iter_mut().zip(input) {
                    *d *= self.hidden_activation.derivative_from_output(a);
                }
                delta = next;
            }
        }
        Ok(ParamGradient { layers: grads })
    }
}

/// Gradient of a scalar loss with respect to every network parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGradient {
    layers: Vec<LayerParams>,
}

impl ParamGradient {
    pub fn zeros_like(net: &DenseNetwork) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| LayerParams::zeros(l.inputs, l.outputs))
                .collect(),
        }
    }

    /// Wraps per-layer entries; shapes are checked when the gradient is applied.
    pub fn from_layers(layers: Vec<LayerParams>) -> Self {
        Self { layers }
    }

    pub fn layers(&self) -> &[LayerParams] {
        &self.layers
    }

    /// Entries flattened in [`DenseNetwork::parameters`] order.
    pub fn flatten(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.values().copied()).collect()
    }

    pub fn norm(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.values())
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().flat_map(|l| l.values()).all(|g| g.is_finite())
    }

    pub fn scale(&mut self, factor: f64) {
        for g in self.layers.iter_mut().flat_map(|l| l.values_mut()) {
            *g *= factor;
        }
    }

    fn matches(&self, net: &DenseNetwork) -> bool {
        self.layers.len() == net.layers.len() && self.layers.iter().zip(&net.layers).all(|(g, p)| g.same_shape(p))
    }
}

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First and second moment estimates plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    config: AdamConfig,
    m: Vec<LayerParams>,
    v: Vec<LayerParams>,
    step: u64,
}

impl AdamState {
    pub fn new(net: &DenseNetwork, config: AdamConfig) -> Self {
        let zeros = ParamGradient::zeros_like(net).layers;
        Self {
            config,
            m: zeros.clone(),
            v: zeros,
            step: 0,
        }
    }

    pub fn config(&self) -> &AdamConfig {
        &self.config
    }

    /// Number of updates applied so far.
    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn first_moment(&self) -> impl Iterator<Item = f64> + '_ {
        self.m.iter().flat_map(|l| l.values().copied())
    }

    pub fn second_moment(&self) -> impl Iterator<Item = f64> + '_ {
        self.v.iter().flat_map(|l| l.values().copied())
    }

    /// Applies one bias-corrected Adam update to `net` in place.
    pub fn step(&mut self, net: &mut DenseNetwork, grad: &ParamGradient) -> Result<()> {
        if !grad.matches(net)
            || self.m.len() != net.layers.len()
            || !self.m.iter().zip(&net.layers).all(|(m, p)| m.same_shape(p))
        {
            return Err(Error::ShapeMismatch);
        }
        self.step += 1;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let t = self.step as i32;
        let m_correction = 1.0 - beta1.powi(t);
        let v_correction = 1.0 - beta2.powi(t);

        let params = net.layers.iter_mut().flat_map(|l| l.values_mut());
        let m = self.m.iter_mut().flat_map(|l| l.values_mut());
        let v = self.v.iter_mut().flat_map(|l| l.values_mut());
        let g = grad.layers.iter().flat_map(|l| l.values());
        for (((theta, m), v), &g) in params.zip(m).zip(v).zip(g) {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / m_correction;
            let v_hat = *v / v_correction;
            *theta -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        }
        Ok(())
    }
}

/// Free-function form of [`AdamState::step`].
pub fn adam_step(net: &mut DenseNetwork, grad: &ParamGradient, state: &mut AdamState) -> Result<()> {
    state.step(net, grad)
}
