use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::ModelConfig;
use super::tensor::Tensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GruSlots<T> {
    pub w_ih: T,
    pub w_hh: T,
    pub b_ih: T,
    pub b_hh: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvSlots<T> {
    pub kernel: usize,
    pub weight: T,
    pub bias: T,
}

/// Every learnable array of the network. `T` is a parameter index in
/// [`ModelParams`], or a tape handle once bound for a forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout<T> {
    pub embedding: T,
    pub enc_fwd: GruSlots<T>,
    pub enc_bwd: GruSlots<T>,
    pub conv: Vec<ConvSlots<T>>,
    pub mlp_w: T,
    pub mlp_b: T,
    /// Output vector `w_m` of the selector.
    pub head: T,
    /// Significance embeddings: row 0 for irrelevant, row 1 for significant sentences.
    pub significance: T,
    pub bridge_w: T,
    pub bridge_b: T,
    pub dec: GruSlots<T>,
    pub att_feat: T,
    pub att_state: T,
    pub att_bias: T,
    pub att_v: T,
    pub out_w: T,
    pub out_b: T,
    pub copy_w: T,
}

impl<T> GruSlots<T> {
    fn map<U>(&self, f: &mut impl FnMut(&T) -> U) -> GruSlots<U> {
        GruSlots {
            w_ih: f(&self.w_ih),
            w_hh: f(&self.w_hh),
            b_ih: f(&self.b_ih),
            b_hh: f(&self.b_hh),
        }
    }
}

impl<T> Layout<T> {
    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Layout<U> {
        Layout {
            embedding: f(&self.embedding),
            enc_fwd: self.enc_fwd.map(&mut f),
            enc_bwd: self.enc_bwd.map(&mut f),
            conv: self
                .conv
                .iter()
                .map(|c| ConvSlots {
                    kernel: c.kernel,
                    weight: f(&c.weight),
                    bias: f(&c.bias),
                })
                .collect(),
            mlp_w: f(&self.mlp_w),
            mlp_b: f(&self.mlp_b),
            head: f(&self.head),
            significance: f(&self.significance),
            bridge_w: f(&self.bridge_w),
            bridge_b: f(&self.bridge_b),
            dec: self.dec.map(&mut f),
            att_feat: f(&self.att_feat),
            att_state: f(&self.att_state),
            att_bias: f(&self.att_bias),
            att_v: f(&self.att_v),
            out_w: f(&self.out_w),
            out_b: f(&self.out_b),
            copy_w: f(&self.copy_w),
        }
    }
}

/// Canonical parameter names and shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub names: Vec<String>,
    pub shapes: Vec<(usize, usize)>,
    pub layout: Layout<usize>,
}

struct SpecBuilder {
    names: Vec<String>,
    shapes: Vec<(usize, usize)>,
}

impl SpecBuilder {
    fn add(&mut self, name: impl Into<String>, rows: usize, cols: usize) -> usize {
        self.names.push(name.into());
        self.shapes.push((rows, cols));
        self.names.len() - 1
    }

    fn gru(&mut self, prefix: &str, input: usize, hidden: usize) -> GruSlots<usize> {
        GruSlots {
            w_ih: self.add(format!("{prefix}.w_ih"), 3 * hidden, input),
            w_hh: self.add(format!("{prefix}.w_hh"), 3 * hidden, hidden),
            b_ih: self.add(format!("{prefix}.b_ih"), 1, 3 * hidden),
            b_hh: self.add(format!("{prefix}.b_hh"), 1, 3 * hidden),
        }
    }
}

impl ParamSpec {
    pub fn new(config: &ModelConfig) -> Self {
        let mut b = SpecBuilder {
            names: Vec::new(),
            shapes: Vec::new(),
        };
        let (v, e, d) = (config.vocab_size, config.embed_dim, config.hidden_dim);
        let half = d / 2;
        let cnn_in = config.cnn_input_dim();
        let channels = config.cnn_channels;
        let pooled = channels * config.cnn_kernel_sizes.len();
        let m = config.selector_mlp_hidden;

        let embedding = b.add("embedding", v, e);
        let enc_fwd = b.gru("encoder.forward", e, half);
        let enc_bwd = b.gru("encoder.backward", e, half);
        let conv = config
            .cnn_kernel_sizes
            .iter()
            .map(|&k| ConvSlots {
                kernel: k,
                weight: b.add(format!("selector.conv{k}.weight"), channels, k * cnn_in),
                bias: b.add(format!("selector.conv{k}.bias"), 1, channels),
            })
            .collect();
        let layout = Layout {
            embedding,
            enc_fwd,
            enc_bwd,
            conv,
            mlp_w: b.add("selector.mlp.weight", m, pooled),
            mlp_b: b.add("selector.mlp.bias", 1, m),
            head: b.add("selector.head", 1, m),
            significance: b.add("significance", 2, config.significance_embed_dim),
            bridge_w: b.add("bridge.weight", d, d),
            bridge_b: b.add("bridge.bias", 1, d),
            dec: b.gru("decoder", e + d, d),
            att_feat: b.add("attention.feature", d, d),
            att_state: b.add("attention.state", d, d),
            att_bias: b.add("attention.bias", 1, d),
            att_v: b.add("attention.v", 1, d),
            out_w: b.add("output.weight", v, e + 2 * d),
            out_b: b.add("output.bias", 1, v),
            copy_w: b.add("copy.weight", d, d),
        };
        ParamSpec {
            names: b.names,
            shapes: b.shapes,
            layout,
        }
    }

    /// Indices of the sentence selector's parameters (conv, MLP and head).
    pub fn selector_ids(&self) -> Vec<usize> {
        let l = &self.layout;
        let mut ids: Vec<usize> = l.conv.iter().flat_map(|c| [c.weight, c.bias]).collect();
        ids.extend([l.mlp_w, l.mlp_b, l.head]);
        ids
    }
}

/// All learnable arrays, stored flat in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub spec: ParamSpec,
    pub tensors: Vec<Tensor>,
}

impl ModelParams {
    pub fn zeros(config: &ModelConfig) -> Self {
        let spec = ParamSpec::new(config);
        let tensors = spec
            .shapes
            .iter()
            .map(|&(r, c)| Tensor::zeros(r, c))
            .collect();
        ModelParams { spec, tensors }
    }

    /// Every entry drawn from `U[-range, range]` in canonical order.
    pub fn init_uniform(config: &ModelConfig, range: f64, seed: u64) -> Self {
        let mut params = Self::zeros(config);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = Uniform::new_inclusive(-range, range);
        for t in &mut params.tensors {
            for x in &mut t.data {
                *x = dist.sample(&mut rng);
            }
        }
        params
    }

    /// Builds parameters from named arrays, checking names and shapes against `config`.
    pub fn from_named(config: &ModelConfig, named: Vec<(String, Tensor)>) -> Result<Self> {
        let spec = ParamSpec::new(config);
        if named.len() != spec.names.len() {
            return Err(Error::InvalidConfig(format!(
                "expected {} parameter arrays, found {}",
                spec.names.len(),
                named.len()
            )));
        }
        let mut tensors = Vec::with_capacity(named.len());
        for ((name, tensor), (expected_name, &shape)) in
            named.into_iter().zip(spec.names.iter().zip(&spec.shapes))
        {
            if &name != expected_name {
                return Err(Error::InvalidConfig(format!(
                    "parameter `{name}` found where `{expected_name}` was expected"
                )));
            }
            if tensor.shape() != shape {
                return Err(Error::ShapeMismatch {
                    name,
                    expected: shape,
                    found: tensor.shape(),
                });
            }
            tensors.push(tensor);
        }
        Ok(ModelParams { spec, tensors })
    }

    pub fn layout(&self) -> &Layout<usize> {
        &self.spec.layout
    }

    pub fn get(&self, id: usize) -> &Tensor {
        &self.tensors[id]
    }

    pub fn get_mut(&mut self, id: usize) -> &mut Tensor {
        &mut self.tensors[id]
    }

    pub fn by_name(&self, name: &str) -> Option<&Tensor> {
        self.spec
            .names
            .iter()
            .position(|n| n == name)
            .map(|i| &self.tensors[i])
    }

    pub fn names(&self) -> &[String] {
        &self.spec.names
    }

    pub fn zeros_like(&self) -> Vec<Tensor> {
        self.tensors
            .iter()
            .map(|t| Tensor::zeros(t.rows, t.cols))
            .collect()
    }

    pub fn num_scalars(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_follow_config() {
        let config = ModelConfig::tiny(20, 8);
        let params = ModelParams::zeros(&config);
        let l = params.layout();
        assert_eq!(params.get(l.embedding).shape(), (20, 8));
        assert_eq!(params.get(l.significance).shape(), (2, 8));
        assert_eq!(params.get(l.enc_fwd.w_ih).shape(), (12, 8));
        assert_eq!(params.get(l.conv[1].weight).shape(), (8, 24));
        assert_eq!(params.get(l.out_w).shape(), (20, 8 + 16));
        assert_eq!(params.names().len(), params.tensors.len());
        let unique: std::collections::HashSet<_> = params.names().iter().collect();
        assert_eq!(unique.len(), params.names().len());
    }

    #[test]
    fn uniform_init_is_seeded_and_bounded() {
        let config = ModelConfig::tiny(20, 8);
        let a = ModelParams::init_uniform(&config, 0.1, 3);
        let b = ModelParams::init_uniform(&config, 0.1, 3);
        let c = ModelParams::init_uniform(&config, 0.1, 4);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a
            .tensors
            .iter()
            .flat_map(|t| &t.data)
            .all(|x| x.abs() <= 0.1));
    }

    #[test]
    fn from_named_validates() {
        let config = ModelConfig::tiny(20, 8);
        let params = ModelParams::init_uniform(&config, 0.1, 1);
        let named: Vec<_> = params
            .names()
            .iter()
            .cloned()
            .zip(params.tensors.clone())
            .collect();
        assert_eq!(
            ModelParams::from_named(&config, named.clone()).unwrap(),
            params
        );
        let mut bad = named;
        bad[0].1 = Tensor::zeros(3, 3);
        assert!(matches!(
            ModelParams::from_named(&config, bad),
            Err(Error::ShapeMismatch { .. })
        ));
    }
}
