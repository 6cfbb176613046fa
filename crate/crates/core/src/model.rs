//! The multitask network: a 9-block convolutional backbone whose block-9
//! output feeds the gait-phase head and whose block-2 output feeds the
//! terrain head. Blocks 1–2 are physically shared between the two
//! forward paths; freezing turns the whole backbone into a fixed
//! feature extractor (eval-mode batch norm, no parameter updates).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::batch::{Batch2, Batch3};
use crate::nn::batchnorm::{BatchNorm, BnCache};
use crate::nn::dense::Dense;
use crate::nn::param::Param;
use crate::nn::pool::PoolCache;
use crate::nn::{conv, loss, pool, relu, GradCheckReport};
use crate::pipeline::{InputTensor, NUM_CHANNELS, TARGET_LEN};

/// Output-layer activation of a head network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    Identity,
    Relu,
    Softmax,
}

/// One backbone block: valid conv + batch norm + ReLU, optionally
/// followed by 2×1 max pooling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub in_ch: usize,
    pub out_ch: usize,
    pub kernel: usize,
    pub pool: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadSpec {
    pub in_features: usize,
    pub hidden: Vec<usize>,
    pub out_features: usize,
    pub activation: OutputActivation,
}

/// Serializable architecture description; its JSON form is hashed into
/// the weight-file fingerprint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchSpec {
    pub format: u32,
    pub input_channels: usize,
    pub input_len: usize,
    pub blocks: Vec<BlockSpec>,
    /// Number of leading blocks feeding the terrain head.
    pub tc_tap: usize,
    pub gpr_head: Option<HeadSpec>,
    pub tc_head: Option<HeadSpec>,
}

/// The 9-row backbone: two pooled k=5 blocks, then seven k=3 blocks.
pub fn backbone_blocks() -> Vec<BlockSpec> {
    let rows = [
        (6, 10, 5, true),
        (10, 20, 5, true),
        (20, 20, 3, false),
        (20, 30, 3, false),
        (30, 30, 3, false),
        (30, 40, 3, false),
        (40, 40, 3, false),
        (40, 50, 3, false),
        (50, 50, 3, false),
    ];
    rows.iter()
        .map(|&(in_ch, out_ch, kernel, pool)| BlockSpec { in_ch, out_ch, kernel, pool })
        .collect()
}

/// Number of leading backbone blocks shared with the terrain head.
pub const TC_TAP: usize = 2;

/// Per-block (channels, length) chain for a given input length.
pub fn feature_chain(blocks: &[BlockSpec], input_len: usize) -> Vec<(usize, usize)> {
    let mut chain = Vec::with_capacity(blocks.len());
    let mut len = input_len;
    for b in blocks {
        len = len - b.kernel + 1;
        if b.pool {
            len /= 2;
        }
        chain.push((b.out_ch, len));
    }
    chain
}

pub const GPR_HIDDEN_DEFAULT: [usize; 2] = [128, 64];
pub const TC_HIDDEN_DEFAULT: [usize; 1] = [64];

impl ArchSpec {
    /// Backbone + gait-phase head (flattened block-9 features → 2 outputs).
    pub fn gpr(gpr_hidden: &[usize], output: OutputActivation) -> Self {
        let blocks = backbone_blocks();
        let (c, l) = *feature_chain(&blocks, TARGET_LEN).last().unwrap();
        Self {
            format: 1,
            input_channels: NUM_CHANNELS,
            input_len: TARGET_LEN,
            blocks,
            tc_tap: TC_TAP,
            gpr_head: Some(HeadSpec {
                in_features: c * l,
                hidden: gpr_hidden.to_vec(),
                out_features: 2,
                activation: output,
            }),
            tc_head: None,
        }
    }

    pub fn tc_head_spec(tc_hidden: &[usize]) -> HeadSpec {
        let blocks = backbone_blocks();
        let (c, l) = feature_chain(&blocks, TARGET_LEN)[TC_TAP - 1];
        HeadSpec {
            in_features: c * l,
            hidden: tc_hidden.to_vec(),
            out_features: 3,
            activation: OutputActivation::Softmax,
        }
    }

    /// Terrain model trained from scratch: the two shared-structure
    /// blocks plus the terrain head, all trainable.
    pub fn tc_scratch(tc_hidden: &[usize]) -> Self {
        let blocks: Vec<BlockSpec> = backbone_blocks()[..TC_TAP].to_vec();
        Self {
            format: 1,
            input_channels: NUM_CHANNELS,
            input_len: TARGET_LEN,
            blocks,
            tc_tap: TC_TAP,
            gpr_head: None,
            tc_head: Some(Self::tc_head_spec(tc_hidden)),
        }
    }

    /// Plain MLP on the flattened input (no convolutional features).
    pub fn tc_mlp(tc_hidden: &[usize]) -> Self {
        Self {
            format: 1,
            input_channels: NUM_CHANNELS,
            input_len: TARGET_LEN,
            blocks: Vec::new(),
            tc_tap: 0,
            gpr_head: None,
            tc_head: Some(HeadSpec {
                in_features: NUM_CHANNELS * TARGET_LEN,
                hidden: tc_hidden.to_vec(),
                out_features: 3,
                activation: OutputActivation::Softmax,
            }),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("arch spec serializes")
    }

    pub fn fingerprint(&self) -> [u8; 32] {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        hasher.update(self.to_json().as_bytes());
        hasher.finalize().into()
    }
}

fn kaiming_uniform(rng: &mut ChaCha8Rng, fan_in: usize, len: usize) -> Vec<f64> {
    let bound = (6.0 / fan_in as f64).sqrt();
    (0..len).map(|_| rng.random_range(-bound..bound)).collect()
}

/// Scale applied to a softmax readout's Kaiming draw.
const READOUT_INIT_SCALE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvBlock {
    pub spec: BlockSpec,
    pub w: Param,
    pub b: Param,
    pub bn: BatchNorm,
}

pub struct ConvBlockCache {
    input: Batch3,
    bn_cache: BnCache,
    activated: Batch3,
    pool: Option<PoolCache>,
}

impl ConvBlock {
    fn init(index: usize, spec: BlockSpec, rng: &mut ChaCha8Rng) -> Self {
        let name = format!("backbone.b{}", index + 1);
        let wlen = spec.out_ch * spec.in_ch * spec.kernel;
        Self {
            w: Param::new(
                format!("{name}.conv.w"),
                vec![spec.out_ch, spec.in_ch, spec.kernel],
                kaiming_uniform(rng, spec.in_ch * spec.kernel, wlen),
            ),
            b: Param::zeros(format!("{name}.conv.b"), vec![spec.out_ch]),
            bn: BatchNorm::new(&format!("{name}.bn"), spec.out_ch),
            spec,
        }
    }

    fn forward_train(&mut self, x: Batch3, update_running: bool) -> Result<(Batch3, ConvBlockCache)> {
        let convolved = conv::forward_batch(&x, &self.w.data, self.spec.out_ch, self.spec.kernel, &self.b.data)?;
        let (mut activated, bn_cache) = self.bn.forward_train(&convolved, update_running)?;
        relu::forward(&mut activated);
        let (out, pool_cache) = if self.spec.pool {
            let (pooled, cache) = pool::forward(&activated)?;
            (pooled, Some(cache))
        } else {
            (activated.clone(), None)
        };
        Ok((out, ConvBlockCache { input: x, bn_cache, activated, pool: pool_cache }))
    }

    fn forward_eval(&self, x: &Batch3) -> Result<Batch3> {
        let convolved = conv::forward_batch(x, &self.w.data, self.spec.out_ch, self.spec.kernel, &self.b.data)?;
        let mut activated = self.bn.forward_eval(&convolved);
        relu::forward(&mut activated);
        if self.spec.pool {
            Ok(pool::forward(&activated)?.0)
        } else {
            Ok(activated)
        }
    }

    fn backward(&mut self, gout: Batch3, cache: &ConvBlockCache) -> Batch3 {
        let mut grad = match &cache.pool {
            Some(pc) => pool::backward(&gout, pc),
            None => gout,
        };
        relu::backward(&mut grad, &cache.activated);
        let grad = self.bn.backward_train(&grad, &cache.bn_cache);
        conv::backward_batch(
            &grad,
            &cache.input,
            &self.w.data,
            self.spec.out_ch,
            self.spec.kernel,
            &mut self.w.grad,
            &mut self.b.grad,
        )
    }
}

/// MLP head: ReLU hidden layers, configurable output activation.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Dense>,
    pub activation: OutputActivation,
}

pub struct MlpCache {
    /// Input to each dense layer.
    inputs: Vec<Batch2>,
    /// Post-ReLU hidden activations (mask for backward).
    hidden: Vec<Batch2>,
    /// Final output after Identity/Relu activation (Softmax heads keep logits).
    output: Batch2,
}

impl Mlp {
    fn init(name_prefix: &str, spec: &HeadSpec, rng: &mut ChaCha8Rng) -> Self {
        let n_layers = spec.hidden.len() + 1;
        let mut layers = Vec::new();
        let mut fan_in = spec.in_features;
        for (i, &width) in spec.hidden.iter().chain(std::iter::once(&spec.out_features)).enumerate() {
            let mut layer = Dense::zeros(&format!("{name_prefix}.fc{}", i + 1), fan_in, width);
            layer.w.data = kaiming_uniform(rng, fan_in, width * fan_in);
            // Classification readouts start near zero so the first
            // epochs measure the gradient signal, not the init draw;
            // with the few optimizer steps the scarce-data protocol
            // allows, a full-scale readout's noise would swamp the
            // class evidence.
            if i == n_layers - 1 && spec.activation == OutputActivation::Softmax {
                for v in &mut layer.w.data {
                    *v *= READOUT_INIT_SCALE;
                }
            }
            fan_in = width;
            layers.push(layer);
        }
        Self { layers, activation: spec.activation }
    }

    fn forward(&self, x: &Batch2, mut cache: Option<&mut MlpCache>) -> Result<Batch2> {
        let mut cur = x.clone();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            if let Some(c) = cache.as_deref_mut() {
                c.inputs.push(cur.clone());
            }
            cur = layer.forward(&cur)?;
            let hidden_layer = i < last;
            if hidden_layer || self.activation == OutputActivation::Relu {
                for v in &mut cur.data {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            if hidden_layer {
                if let Some(c) = cache.as_deref_mut() {
                    c.hidden.push(cur.clone());
                }
            }
        }
        if let Some(c) = cache {
            c.output = cur.clone();
        }
        Ok(cur)
    }

    fn forward_train(&self, x: &Batch2) -> Result<(Batch2, MlpCache)> {
        let mut cache = MlpCache { inputs: Vec::new(), hidden: Vec::new(), output: Batch2::zeros(0, 0) };
        let out = self.forward(x, Some(&mut cache))?;
        Ok((out, cache))
    }

    fn forward_eval(&self, x: &Batch2) -> Result<Batch2> {
        self.forward(x, None)
    }

    /// `gout` is w.r.t. the head output (post Identity/Relu activation;
    /// for Softmax heads, w.r.t. the logits — the loss fuses softmax).
    fn backward(&mut self, mut gout: Batch2, cache: &MlpCache) -> Batch2 {
        if self.activation == OutputActivation::Relu {
            for (g, &y) in gout.data.iter_mut().zip(&cache.output.data) {
                if y <= 0.0 {
                    *g = 0.0;
                }
            }
        }
        for i in (0..self.layers.len()).rev() {
            if i < self.layers.len() - 1 {
                // Mask by the stored post-ReLU hidden activation.
                for (g, &y) in gout.data.iter_mut().zip(&cache.hidden[i].data) {
                    if y <= 0.0 {
                        *g = 0.0;
                    }
                }
            }
            gout = self.layers[i].backward(&gout, &cache.inputs[i]);
        }
        gout
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Gpr,
    Tc,
}

/// Loss targets for one batch.
pub enum TaskTargets {
    /// Unit-circle (x, y) targets, one row per sample.
    Gpr(Batch2),
    /// Terrain class indices.
    Tc(Vec<usize>),
}

pub struct Tape {
    block_caches: Vec<ConvBlockCache>,
    tap_shape: (usize, usize),
    head_cache: MlpCache,
    task: Task,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaitModel {
    pub arch: ArchSpec,
    pub blocks: Vec<ConvBlock>,
    pub gpr_head: Option<Mlp>,
    pub tc_head: Option<Mlp>,
    pub frozen_backbone: bool,
}

impl GaitModel {
    /// Builds the gait-phase model: full backbone + GPR head, seeded
    /// Kaiming-uniform init, parameters canonicalized to f32 values.
    pub fn build_gpr(gpr_hidden: &[usize], output: OutputActivation, seed: u64) -> Self {
        Self::from_arch(&ArchSpec::gpr(gpr_hidden, output), seed)
    }

    /// Instantiates any architecture with seeded initialization.
    pub fn from_arch(arch: &ArchSpec, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let blocks: Vec<ConvBlock> =
            arch.blocks.iter().enumerate().map(|(i, &spec)| ConvBlock::init(i, spec, &mut rng)).collect();
        let gpr_head = arch.gpr_head.as_ref().map(|spec| Mlp::init("gpr_head", spec, &mut rng));
        let tc_head = arch.tc_head.as_ref().map(|spec| Mlp::init("tc_head", spec, &mut rng));
        let mut model =
            Self { arch: arch.clone(), blocks, gpr_head, tc_head, frozen_backbone: false };
        model.canonicalize_f32();
        model
    }

    /// Adds the terrain head, physically sharing the leading backbone
    /// blocks with the existing gait-phase path.
    pub fn attach_tc_head(&mut self, tc_hidden: &[usize], seed: u64) {
        let spec = ArchSpec::tc_head_spec(tc_hidden);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut head = Mlp::init("tc_head", &spec, &mut rng);
        for layer in &mut head.layers {
            layer.w.round_to_f32();
            layer.b.round_to_f32();
        }
        self.arch.tc_head = Some(spec);
        self.tc_head = Some(head);
    }

    /// Marks every backbone parameter non-trainable and pins batch norm
    /// to its running statistics, so later training leaves the backbone
    /// bit-identical.
    pub fn freeze_backbone(&mut self) {
        for block in &mut self.blocks {
            block.w.trainable = false;
            block.b.trainable = false;
            block.bn.gamma.trainable = false;
            block.bn.beta.trainable = false;
        }
        self.frozen_backbone = true;
    }

    pub fn params(&self) -> Vec<&Param> {
        let mut out = Vec::new();
        for b in &self.blocks {
            out.extend([&b.w, &b.b, &b.bn.gamma, &b.bn.beta]);
        }
        for head in [&self.gpr_head, &self.tc_head].into_iter().flatten() {
            for layer in &head.layers {
                out.extend([&layer.w, &layer.b]);
            }
        }
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        let mut out = Vec::new();
        for b in &mut self.blocks {
            out.extend([&mut b.w, &mut b.b, &mut b.bn.gamma, &mut b.bn.beta]);
        }
        for head in [&mut self.gpr_head, &mut self.tc_head].into_iter().flatten() {
            for layer in &mut head.layers {
                out.extend([&mut layer.w, &mut layer.b]);
            }
        }
        out
    }

    pub fn zero_grads(&mut self) {
        for p in self.params_mut() {
            p.zero_grad();
        }
    }

    /// Rounds every parameter and running statistic to f32-representable
    /// values (the persisted precision), keeping save → load → forward
    /// bit-exact.
    pub fn canonicalize_f32(&mut self) {
        for p in self.params_mut() {
            p.round_to_f32();
        }
        for b in &mut self.blocks {
            for v in b.bn.running_mean.iter_mut().chain(b.bn.running_var.iter_mut()) {
                *v = *v as f32 as f64;
            }
        }
    }

    pub fn batch_from_inputs(inputs: &[&InputTensor]) -> Batch3 {
        let mut batch = Batch3::zeros(inputs.len(), NUM_CHANNELS, TARGET_LEN);
        for (s, t) in inputs.iter().enumerate() {
            batch.sample_mut(s).copy_from_slice(t.data());
        }
        batch
    }

    fn run_blocks_eval(&self, x: &Batch3, count: usize) -> Result<Batch3> {
        let mut cur = x.clone();
        for block in &self.blocks[..count] {
            cur = block.forward_eval(&cur)?;
        }
        Ok(cur)
    }

    /// Backbone features after each block for one input (shape probe).
    pub fn backbone_shapes(&self, x: &Batch3) -> Result<Vec<(usize, usize)>> {
        let mut shapes = Vec::new();
        let mut cur = x.clone();
        for block in &self.blocks {
            cur = block.forward_eval(&cur)?;
            shapes.push((cur.c, cur.l));
        }
        Ok(shapes)
    }

    /// Gait-phase forward (eval mode): (n, 2) outputs.
    pub fn forward_gpr(&self, x: &Batch3) -> Result<Batch2> {
        let head = self.gpr_head.as_ref().ok_or_else(|| {
            Error::InvalidConfig("model has no gait-phase head".into())
        })?;
        let features = self.run_blocks_eval(x, self.blocks.len())?;
        head.forward_eval(&features.into_flat())
    }

    /// Terrain forward (eval mode): (n, 3) softmax probabilities.
    pub fn forward_tc(&self, x: &Batch3) -> Result<Batch2> {
        let logits = self.forward_tc_logits(x)?;
        let mut probs = Batch2::zeros(logits.n, logits.f);
        for s in 0..logits.n {
            let p = loss::softmax(logits.row(s));
            probs.row_mut(s).copy_from_slice(&p);
        }
        Ok(probs)
    }

    pub fn forward_tc_logits(&self, x: &Batch3) -> Result<Batch2> {
        let head = self.tc_head.as_ref().ok_or_else(|| {
            Error::InvalidConfig("model has no terrain head".into())
        })?;
        let tap = self.arch.tc_tap.min(self.blocks.len());
        let features = self.run_blocks_eval(x, tap)?;
        head.forward_eval(&features.into_flat())
    }

    /// Training forward. For Softmax heads the returned batch holds
    /// logits (the loss fuses softmax). `update_running` lets gradient
    /// checking re-evaluate without advancing batch-norm statistics.
    pub fn forward_train(&mut self, x: &Batch3, task: Task, update_running: bool) -> Result<(Batch2, Tape)> {
        let block_count = match task {
            Task::Gpr => self.blocks.len(),
            Task::Tc => self.arch.tc_tap.min(self.blocks.len()),
        };
        let mut block_caches = Vec::new();
        let features = if self.frozen_backbone {
            self.run_blocks_eval(x, block_count)?
        } else {
            let mut cur = x.clone();
            for i in 0..block_count {
                let (next, cache) = self.blocks[i].forward_train(cur, update_running)?;
                block_caches.push(cache);
                cur = next;
            }
            cur
        };
        let tap_shape = (features.c, features.l);
        let head = match task {
            Task::Gpr => self.gpr_head.as_ref(),
            Task::Tc => self.tc_head.as_ref(),
        }
        .ok_or_else(|| Error::InvalidConfig("model lacks the head for this task".into()))?;
        let (out, head_cache) = head.forward_train(&features.into_flat())?;
        Ok((out, Tape { block_caches, tap_shape, head_cache, task }))
    }

    /// Accumulates gradients for the batch recorded in `tape`.
    pub fn backward(&mut self, grad_out: Batch2, tape: &Tape) {
        let head = match tape.task {
            Task::Gpr => self.gpr_head.as_mut(),
            Task::Tc => self.tc_head.as_mut(),
        }
        .expect("tape came from forward_train");
        let grad_flat = head.backward(grad_out, &tape.head_cache);
        if self.frozen_backbone || tape.block_caches.is_empty() {
            return;
        }
        let (c, l) = tape.tap_shape;
        let mut grad = grad_flat.into_planes(c, l);
        for (block, cache) in
            self.blocks.iter_mut().zip(&tape.block_caches).take(tape.block_caches.len()).rev()
        {
            grad = block.backward(grad, cache);
        }
    }

    /// Loss of one batch at the current parameters (no gradients, no
    /// running-stat updates).
    pub fn loss_only(&mut self, x: &Batch3, targets: &TaskTargets) -> Result<f64> {
        let task = match targets {
            TaskTargets::Gpr(_) => Task::Gpr,
            TaskTargets::Tc(_) => Task::Tc,
        };
        let (out, _) = self.forward_train(x, task, false)?;
        Ok(match targets {
            TaskTargets::Gpr(t) => loss::mse_batch(&out, t)?.0,
            TaskTargets::Tc(t) => loss::softmax_xent_batch(&out, t)?.0,
        })
    }

    /// One full forward/backward with gradients accumulated; returns the
    /// loss.
    pub fn loss_and_grads(&mut self, x: &Batch3, targets: &TaskTargets, update_running: bool) -> Result<f64> {
        self.zero_grads();
        let task = match targets {
            TaskTargets::Gpr(_) => Task::Gpr,
            TaskTargets::Tc(_) => Task::Tc,
        };
        let (out, tape) = self.forward_train(x, task, update_running)?;
        let (loss, grad) = match targets {
            TaskTargets::Gpr(t) => loss::mse_batch(&out, t)?,
            TaskTargets::Tc(t) => loss::softmax_xent_batch(&out, t)?,
        };
        self.backward(grad, &tape);
        Ok(loss)
    }
}

/// Reduced two-block network plus a probe batch, sized so the full
/// central-difference sweep stays fast: 2 conv blocks on a length-20
/// input, batch 4, MSE head.
pub fn gradcheck_fixture(seed: u64) -> (GaitModel, Batch3, TaskTargets) {
    let arch = ArchSpec {
        format: 1,
        input_channels: 2,
        input_len: 20,
        blocks: vec![
            BlockSpec { in_ch: 2, out_ch: 3, kernel: 3, pool: true },
            BlockSpec { in_ch: 3, out_ch: 4, kernel: 3, pool: false },
        ],
        tc_tap: 2,
        gpr_head: Some(HeadSpec {
            in_features: 4 * 7,
            hidden: vec![6],
            out_features: 2,
            activation: OutputActivation::Identity,
        }),
        tc_head: None,
    };
    let model = GaitModel::from_arch(&arch, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
    let x = Batch3::from_samples(
        4,
        2,
        20,
        (0..4 * 2 * 20).map(|_| rng.random_range(-1.0..1.0)).collect(),
    );
    let t = Batch2::from_rows(4, 2, (0..8).map(|_| rng.random_range(-1.0..1.0)).collect());
    (model, x, TaskTargets::Gpr(t))
}

/// Central-difference gradient check over every trainable parameter.
pub fn grad_check(model: &mut GaitModel, x: &Batch3, targets: &TaskTargets, eps: f64) -> Result<GradCheckReport> {
    grad_check_with_fault(model, x, targets, eps, None)
}

/// Test hook: `corrupt` flips the sign of one parameter's analytic
/// gradient, which a healthy check must flag.
pub fn grad_check_with_fault(
    model: &mut GaitModel,
    x: &Batch3,
    targets: &TaskTargets,
    eps: f64,
    corrupt: Option<&str>,
) -> Result<GradCheckReport> {
    model.loss_and_grads(x, targets, false)?;
    let analytic: Vec<(String, Vec<f64>)> = model
        .params()
        .iter()
        .filter(|p| p.trainable)
        .map(|p| {
            let mut g = p.grad.clone();
            if corrupt == Some(p.name.as_str()) {
                for v in &mut g {
                    *v = -*v;
                }
            }
            (p.name.clone(), g)
        })
        .collect();

    let mut report = GradCheckReport {
        max_rel_err: 0.0,
        worst_param: String::new(),
        params_checked: analytic.len(),
        elements_checked: 0,
    };
    for (name, grads) in &analytic {
        for i in 0..grads.len() {
            let original = {
                let mut params = model.params_mut();
                let p = params.iter_mut().find(|p| &p.name == name).expect("param exists");
                let original = p.data[i];
                p.data[i] = original + eps;
                original
            };
            let loss_plus = model.loss_only(x, targets)?;
            {
                let mut params = model.params_mut();
                let p = params.iter_mut().find(|p| &p.name == name).unwrap();
                p.data[i] = original - eps;
            }
            let loss_minus = model.loss_only(x, targets)?;
            {
                let mut params = model.params_mut();
                let p = params.iter_mut().find(|p| &p.name == name).unwrap();
                p.data[i] = original;
            }
            let numeric = (loss_plus - loss_minus) / (2.0 * eps);
            let err = crate::nn::rel_err(grads[i], numeric);
            report.elements_checked += 1;
            if err > report.max_rel_err {
                report.max_rel_err = err;
                report.worst_param = name.clone();
            }
        }
    }
    Ok(report)
}
