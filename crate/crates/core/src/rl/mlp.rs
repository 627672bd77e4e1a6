//! Fully connected tanh network whose parameters live in one flat vector,
//! so optimizers, checkpoints and gradient checks treat it as a plain slice.

use ndarray::{s, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;

/// Layer `l` maps `sizes[l] → sizes[l + 1]`; hidden layers use tanh, the
/// output layer is linear. Each layer stores its weight matrix row-major
/// (`in × out`) followed by its bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

/// Inputs of every layer from a forward pass, kept for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    inputs: Vec<Array2<f64>>,
}

pub fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl Mlp {
    pub fn zeros(sizes: &[usize]) -> Self {
        assert!(sizes.len() >= 2 && sizes.iter().all(|&n| n > 0), "invalid layer sizes {sizes:?}");
        Self { sizes: sizes.to_vec(), params: vec![0.0; param_count(sizes)] }
    }

    /// Uniform fan-in initialization `U(±1/√fan_in)`, with the output layer's
    /// weights further multiplied by `out_scale`; biases start at zero.
    pub fn init(sizes: &[usize], out_scale: f64, rng: &mut impl Rng) -> Self {
        let mut mlp = Self::zeros(sizes);
        let n_layers = mlp.n_layers();
        let mut offset = 0;
        for l in 0..n_layers {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let bound = 1.0 / (fan_in as f64).sqrt() * if l + 1 == n_layers { out_scale } else { 1.0 };
            for w in &mut mlp.params[offset..offset + fan_in * fan_out] {
                *w = rng.gen_range(-bound..=bound);
            }
            offset += fan_in * fan_out + fan_out;
        }
        mlp
    }

    pub fn from_params(sizes: &[usize], params: Vec<f64>) -> Option<Self> {
        (sizes.len() >= 2 && params.len() == param_count(sizes)).then(|| Self { sizes: sizes.to_vec(), params })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn n_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    /// `(weights, bias)` shapes per layer.
    pub fn shapes(&self) -> Vec<([usize; 2], usize)> {
        self.sizes.windows(2).map(|w| ([w[0], w[1]], w[1])).collect()
    }

    fn offset(&self, layer: usize) -> usize {
        param_count(&self.sizes[..=layer])
    }

    fn layer_from<'a>(sizes: &[usize], data: &'a [f64], offset: usize, layer: usize) -> (ArrayView2<'a, f64>, ArrayView1<'a, f64>) {
        let (i, o) = (sizes[layer], sizes[layer + 1]);
        let w = ArrayView2::from_shape((i, o), &data[offset..offset + i * o]).expect("layer shape");
        let b = ArrayView1::from(&data[offset + i * o..offset + i * o + o]);
        (w, b)
    }

    pub fn layer(&self, layer: usize) -> (ArrayView2<'_, f64>, ArrayView1<'_, f64>) {
        Self::layer_from(&self.sizes, &self.params, self.offset(layer), layer)
    }

    /// Batched forward pass: one row per sample.
    pub fn forward(&self, x: ArrayView2<f64>) -> Array2<f64> {
        self.forward_cached(x).0
    }

    pub fn forward_cached(&self, x: ArrayView2<f64>) -> (Array2<f64>, ForwardCache) {
        assert_eq!(x.ncols(), self.input_dim(), "input width");
        let mut inputs = Vec::with_capacity(self.n_layers());
        let mut h = x.to_owned();
        for l in 0..self.n_layers() {
            let (w, b) = self.layer(l);
            let mut z = h.dot(&w);
            z += &b;
            inputs.push(h);
            if l + 1 < self.n_layers() {
                z.mapv_inplace(f64::tanh);
            }
            h = z;
        }
        (h, ForwardCache { inputs })
    }

    /// Gradient of `Σ dout ⊙ output` with respect to the flat parameters.
    pub fn backward(&self, cache: &ForwardCache, dout: &Array2<f64>) -> Vec<f64> {
        let mut grad = vec![0.0; self.params.len()];
        let mut delta = dout.clone();
        for l in (0..self.n_layers()).rev() {
            let input = &cache.inputs[l];
            let (i, o) = (self.sizes[l], self.sizes[l + 1]);
            let off = self.offset(l);
            let gw = input.t().dot(&delta);
            // iteration is in logical (row-major) order whatever the memory layout
            grad[off..off + i * o].iter_mut().zip(gw.iter()).for_each(|(g, &x)| *g = x);
            let gb = delta.sum_axis(Axis(0));
            grad[off + i * o..off + i * o + o].iter_mut().zip(gb.iter()).for_each(|(g, &x)| *g = x);
            if l > 0 {
                let (w, _) = self.layer(l);
                let mut back = delta.dot(&w.t());
                // the input of layer l is tanh of the previous pre-activation
                back.zip_mut_with(input, |d, &a| *d *= 1.0 - a * a);
                delta = back;
            }
        }
        grad
    }
}

/// Splits a batch's output columns `[lo, hi)` into an owned array.
pub fn columns(x: &Array2<f64>, lo: usize, hi: usize) -> Array2<f64> {
    x.slice(s![.., lo..hi]).to_owned()
}
