use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::diffcore::{Graph, NodeId, Tensor};

use super::{ArchParams, OpKind, OpSet, SearchSpaceError, CELL_EDGES, NUM_EDGES, NUM_NODES};

pub const MAX_WIDTH: usize = 16;
pub const MAX_DEPTH: usize = 5;
/// Scale of the random part of a parametric op's initial weights.
pub const INIT_NOISE: f64 = 0.5;

/// Shape of a supernet. Proxy channels map to `width`, proxy layers to `depth`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SupernetSpec {
    pub input_dim: usize,
    pub width: usize,
    pub depth: usize,
    pub num_classes: usize,
    pub ops: OpSet,
}

impl SupernetSpec {
    pub fn validate(&self) -> Result<(), SearchSpaceError> {
        let bad = |m: String| Err(SearchSpaceError::InvalidSpec(m));
        if self.input_dim == 0 {
            return bad("input_dim must be at least 1".into());
        }
        if !(1..=MAX_WIDTH).contains(&self.width) {
            return bad(format!("width must be in 1..={MAX_WIDTH}, got {}", self.width));
        }
        if !(1..=MAX_DEPTH).contains(&self.depth) {
            return bad(format!("depth must be in 1..={MAX_DEPTH}, got {}", self.depth));
        }
        if self.num_classes < 2 {
            return bad(format!("need at least 2 classes, got {}", self.num_classes));
        }
        Ok(())
    }

    /// Trainable parameter count:
    /// `depth·edges·parametric_ops·(width² + width) + 2·classes`.
    pub fn param_count(&self) -> usize {
        let per_op = self.width * self.width + self.width;
        self.depth * NUM_EDGES * self.ops.parametric_count() * per_op + 2 * self.num_classes
    }
}

/// Structural identity of a supernet, independent of weight values.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ShapeFingerprint {
    pub spec: SupernetSpec,
    pub tensor_shapes: Vec<Vec<usize>>,
}

/// Weights registered on a graph for one forward pass.
#[derive(Clone, Debug)]
pub struct BoundWeights {
    pub weights: Vec<NodeId>,
    stem: NodeId,
    avg: NodeId,
}

/// A stack of `depth` identical-topology cells over a fixed channel-folding
/// stem, followed by mean pooling and a linear classifier.
///
/// α is shared by every cell. Each node of a cell averages its incoming
/// mixed edges. Parametric ops start near the identity,
/// `I + INIT_NOISE · N(0, 1/width)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Supernet {
    spec: SupernetSpec,
    stem: Tensor,
    avg: Tensor,
    weights: Vec<Tensor>,
}

impl Supernet {
    pub fn new(spec: SupernetSpec, seed: u64) -> Result<Self, SearchSpaceError> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = spec.width;
        let op_std = Normal::new(0.0, INIT_NOISE / (w as f64).sqrt()).expect("positive std");
        let head_std = Normal::new(0.0, 1.0).expect("positive std");

        let mut weights = Vec::new();
        for _layer in 0..spec.depth {
            for _edge in 0..NUM_EDGES {
                for _ in 0..spec.ops.parametric_count() {
                    let data = (0..w * w)
                        .map(|i| op_std.sample(&mut rng) + if i % (w + 1) == 0 { 1.0 } else { 0.0 })
                        .collect();
                    weights.push(Tensor::matrix(w, w, data)?);
                    weights.push(Tensor::zeros(&[w]));
                }
            }
        }
        let head = (0..spec.num_classes).map(|_| head_std.sample(&mut rng)).collect();
        weights.push(Tensor::matrix(1, spec.num_classes, head)?);
        weights.push(Tensor::zeros(&[spec.num_classes]));

        Ok(Self {
            stem: folding_stem(spec.input_dim, w),
            avg: Tensor::full(&[w, w], 1.0 / w as f64),
            spec,
            weights,
        })
    }

    pub fn spec(&self) -> &SupernetSpec {
        &self.spec
    }

    pub fn ops(&self) -> &OpSet {
        &self.spec.ops
    }

    pub fn weights(&self) -> &[Tensor] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [Tensor] {
        &mut self.weights
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(Tensor::len).sum()
    }

    pub fn fingerprint(&self) -> ShapeFingerprint {
        ShapeFingerprint {
            spec: self.spec.clone(),
            tensor_shapes: self.weights.iter().map(|t| t.shape().to_vec()).collect(),
        }
    }

    /// Index of the weight matrix of the `param_index`-th parametric op on
    /// `edge` in `layer`; its bias sits at the next index.
    fn slot(&self, layer: usize, edge: usize, param_index: usize) -> usize {
        let p = self.spec.ops.parametric_count();
        2 * ((layer * NUM_EDGES + edge) * p + param_index)
    }

    pub fn head_slot(&self) -> usize {
        self.weights.len() - 2
    }

    /// Register the weights as trainable leaves on `g`.
    pub fn bind(&self, g: &mut Graph) -> BoundWeights {
        let weights = self.weights.iter().map(|t| g.weight(t.clone())).collect();
        BoundWeights {
            weights,
            stem: g.constant(self.stem.clone()),
            avg: g.constant(self.avg.clone()),
        }
    }

    /// Register the weights as constants (no gradient needed).
    pub fn bind_frozen(&self, g: &mut Graph) -> BoundWeights {
        let weights = self.weights.iter().map(|t| g.constant(t.clone())).collect();
        BoundWeights {
            weights,
            stem: g.constant(self.stem.clone()),
            avg: g.constant(self.avg.clone()),
        }
    }

    /// `Σ_k β_k · O_k(x)` for one edge of one cell.
    pub fn mixed_edge(
        &self,
        g: &mut Graph,
        bound: &BoundWeights,
        x: NodeId,
        layer: usize,
        edge: usize,
        beta_row: NodeId,
    ) -> Result<NodeId, SearchSpaceError> {
        let xv = g.value(x);
        if xv.shape().len() != 2 || xv.shape()[1] != self.spec.width {
            return Err(SearchSpaceError::WidthMismatch {
                expected: self.spec.width,
                found: xv.shape().get(1).copied().unwrap_or(0),
            });
        }
        let mut outputs = Vec::with_capacity(self.spec.ops.len());
        let mut param_index = 0;
        for &op in self.spec.ops.ops() {
            let out = match op {
                OpKind::None => None,
                OpKind::Skip => Some(x),
                OpKind::Avg => Some(g.linear(x, bound.avg, None)?),
                OpKind::Lin | OpKind::LinRelu => {
                    let s = self.slot(layer, edge, param_index);
                    param_index += 1;
                    let y = g.linear(x, bound.weights[s], Some(bound.weights[s + 1]))?;
                    Some(if op == OpKind::LinRelu { g.relu(y) } else { y })
                }
            };
            outputs.push(out);
        }
        if outputs.iter().all(Option::is_none) {
            let zeros = Tensor::zeros(g.value(x).shape());
            return Ok(g.constant(zeros));
        }
        Ok(g.mix(beta_row, &outputs)?)
    }

    /// One cell; `beta` is the `[edges × ops]` softmax of α.
    pub fn cell(
        &self,
        g: &mut Graph,
        bound: &BoundWeights,
        input: NodeId,
        layer: usize,
        beta: NodeId,
    ) -> Result<NodeId, SearchSpaceError> {
        let mut nodes = vec![input];
        for target in 1..NUM_NODES {
            let mut acc: Option<NodeId> = None;
            let fan_in = target as f64;
            for (edge, &(source, t)) in CELL_EDGES.iter().enumerate() {
                if t != target {
                    continue;
                }
                let row = g.row(beta, edge)?;
                let out = self.mixed_edge(g, bound, nodes[source], layer, edge, row)?;
                let scaled = g.scale(1.0 / fan_in, out);
                acc = Some(match acc {
                    None => scaled,
                    Some(prev) => g.add(prev, scaled)?,
                });
            }
            nodes.push(acc.expect("every node has an incoming edge"));
        }
        Ok(nodes[NUM_NODES - 1])
    }

    /// Logits `[batch × classes]` for a `[batch × input_dim]` input.
    pub fn forward(
        &self,
        g: &mut Graph,
        bound: &BoundWeights,
        alpha: NodeId,
        batch: NodeId,
    ) -> Result<NodeId, SearchSpaceError> {
        let av = g.value(alpha);
        if av.shape() != [NUM_EDGES, self.spec.ops.len()] {
            return Err(SearchSpaceError::InvalidArch(format!(
                "α must be [{NUM_EDGES}, {}], got {:?}",
                self.spec.ops.len(),
                av.shape()
            )));
        }
        let bv = g.value(batch);
        if bv.shape().len() != 2 || bv.shape()[1] != self.spec.input_dim {
            return Err(SearchSpaceError::InputMismatch {
                expected: self.spec.input_dim,
                found: bv.shape().to_vec(),
            });
        }
        let beta = g.softmax(alpha)?;
        let mut h = g.linear(batch, bound.stem, None)?;
        for layer in 0..self.spec.depth {
            h = self.cell(g, bound, h, layer, beta)?;
        }
        let pooled = g.mean_pool(h)?;
        let hs = self.head_slot();
        Ok(g.linear(pooled, bound.weights[hs], Some(bound.weights[hs + 1]))?)
    }
}

/// Fixed `[input_dim × width]` stem: input feature `j` feeds channel
/// `j mod width`, scaled by `1/√(features folded into that channel)`.
fn folding_stem(input_dim: usize, width: usize) -> Tensor {
    let mut counts = vec![0usize; width];
    for j in 0..input_dim {
        counts[j % width] += 1;
    }
    let mut data = vec![0.0; input_dim * width];
    for j in 0..input_dim {
        let c = j % width;
        data[j * width + c] = 1.0 / (counts[c] as f64).sqrt();
    }
    Tensor::new(vec![input_dim, width], data).expect("stem shape")
}

/// Output of one mixed edge (layer 0) for a `[batch × width]` input.
pub fn mixed_edge_forward(
    x: &Tensor,
    edge: usize,
    arch: &ArchParams,
    net: &Supernet,
) -> Result<Tensor, SearchSpaceError> {
    if edge >= NUM_EDGES {
        return Err(SearchSpaceError::InvalidArch(format!("edge {edge} out of range")));
    }
    let mut g = Graph::new();
    let bound = net.bind_frozen(&mut g);
    let xn = g.constant(x.clone());
    let alpha = g.constant(arch.tensor().clone());
    let beta = g.softmax(alpha)?;
    let row = g.row(beta, edge)?;
    let out = net.mixed_edge(&mut g, &bound, xn, 0, edge, row)?;
    Ok(g.value(out).clone())
}

/// Logits for a batch under the given architecture parameters.
pub fn supernet_forward(net: &Supernet, arch: &ArchParams, batch: &Tensor) -> Result<Tensor, SearchSpaceError> {
    let mut g = Graph::new();
    let bound = net.bind_frozen(&mut g);
    let alpha = g.constant(arch.tensor().clone());
    let x = g.constant(batch.clone());
    let logits = net.forward(&mut g, &bound, alpha, x)?;
    Ok(g.value(logits).clone())
}
