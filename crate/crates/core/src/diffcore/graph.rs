use super::tensor::{logsumexp_slice, sigmoid, softmax_slice, softplus};
use super::{DiffError, Tensor};

/// Handle to a node recorded on a [`Graph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// What kind of leaf a node is. Only `Alpha` and `Weight` leaves are trainable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LeafKind {
    Alpha,
    Weight,
    Constant,
}

#[derive(Clone, Debug)]
enum Op {
    Leaf(LeafKind),
    Linear {
        x: NodeId,
        w: NodeId,
        b: Option<NodeId>,
    },
    Add(NodeId, NodeId),
    ScaleAdd {
        a: f64,
        x: NodeId,
        b: f64,
        y: NodeId,
    },
    Scale(f64, NodeId),
    AddScalar(NodeId),
    Relu(NodeId),
    Abs(NodeId),
    Softplus(NodeId),
    MeanPool(NodeId),
    Softmax(NodeId),
    LogSumExp(NodeId),
    Row(NodeId, usize),
    Mix {
        weights: NodeId,
        inputs: Vec<Option<NodeId>>,
    },
    CrossEntropy {
        logits: NodeId,
        labels: Vec<usize>,
    },
    Mse(NodeId, NodeId),
    Sum(NodeId),
    Mean(NodeId),
    SqNorm(NodeId),
}

#[derive(Clone, Debug)]
struct Node {
    op: Op,
    value: Tensor,
}

/// Tape of primitive operations. Nodes are appended in evaluation order, so
/// every node's inputs precede it.
#[derive(Clone, Debug, Default)]
pub struct Graph {
    nodes: Vec<Node>,
}

/// Gradients of a scalar loss with respect to every node of a graph.
#[derive(Clone, Debug)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
    shapes: Vec<Vec<usize>>,
}

impl Gradients {
    /// Gradient for `id`, or `None` when the loss does not depend on it.
    pub fn get(&self, id: NodeId) -> Option<&Tensor> {
        self.grads[id.0].as_ref()
    }

    /// Gradient for `id`; nodes the loss never touched get zeros.
    pub fn wrt(&self, id: NodeId) -> Tensor {
        match &self.grads[id.0] {
            Some(g) => g.clone(),
            None => Tensor::zeros(&self.shapes[id.0]),
        }
    }
}

fn mismatch(op: &'static str, left: &Tensor, right: &Tensor) -> DiffError {
    DiffError::ShapeMismatch {
        op,
        left: left.shape().to_vec(),
        right: right.shape().to_vec(),
    }
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id.0].value
    }

    pub fn leaf_kind(&self, id: NodeId) -> Option<LeafKind> {
        match self.nodes[id.0].op {
            Op::Leaf(kind) => Some(kind),
            _ => None,
        }
    }

    fn push(&mut self, op: Op, value: Tensor) -> NodeId {
        self.nodes.push(Node { op, value });
        NodeId(self.nodes.len() - 1)
    }

    pub fn leaf(&mut self, value: Tensor, kind: LeafKind) -> NodeId {
        self.push(Op::Leaf(kind), value)
    }

    pub fn alpha(&mut self, value: Tensor) -> NodeId {
        self.leaf(value, LeafKind::Alpha)
    }

    pub fn weight(&mut self, value: Tensor) -> NodeId {
        self.leaf(value, LeafKind::Weight)
    }

    pub fn constant(&mut self, value: Tensor) -> NodeId {
        self.leaf(value, LeafKind::Constant)
    }

    /// `x · w (+ b)` for `x: [n, i]`, `w: [i, o]`, `b: [o]`.
    pub fn linear(&mut self, x: NodeId, w: NodeId, b: Option<NodeId>) -> Result<NodeId, DiffError> {
        let (xv, wv) = (self.value(x), self.value(w));
        if xv.shape().len() != 2 || wv.shape().len() != 2 || xv.shape()[1] != wv.shape()[0] {
            return Err(mismatch("linear", xv, wv));
        }
        let (n, i, o) = (xv.shape()[0], xv.shape()[1], wv.shape()[1]);
        if let Some(b) = b {
            let bv = self.value(b);
            if bv.shape() != [o] {
                return Err(mismatch("linear(bias)", wv, bv));
            }
        }
        let mut out = match b {
            Some(b) => {
                let bv = self.value(b).data();
                let mut out = Vec::with_capacity(n * o);
                for _ in 0..n {
                    out.extend_from_slice(bv);
                }
                out
            }
            None => vec![0.0; n * o],
        };
        let (xd, wd) = (xv.data(), wv.data());
        for r in 0..n {
            let orow = &mut out[r * o..(r + 1) * o];
            for k in 0..i {
                let xk = xd[r * i + k];
                if xk == 0.0 {
                    continue;
                }
                let wrow = &wd[k * o..(k + 1) * o];
                for (acc, wv) in orow.iter_mut().zip(wrow) {
                    *acc += xk * wv;
                }
            }
        }
        let value = Tensor::new(vec![n, o], out)?;
        Ok(self.push(Op::Linear { x, w, b }, value))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, DiffError> {
        let (av, bv) = (self.value(a), self.value(b));
        if av.shape() != bv.shape() {
            return Err(mismatch("add", av, bv));
        }
        let data = av.data().iter().zip(bv.data()).map(|(p, q)| p + q).collect();
        let value = Tensor::new(av.shape().to_vec(), data)?;
        Ok(self.push(Op::Add(a, b), value))
    }

    /// `a·x + b·y` with constant scalars `a`, `b`.
    pub fn scale_add(&mut self, a: f64, x: NodeId, b: f64, y: NodeId) -> Result<NodeId, DiffError> {
        let (xv, yv) = (self.value(x), self.value(y));
        if xv.shape() != yv.shape() {
            return Err(mismatch("scale_add", xv, yv));
        }
        let data = xv
            .data()
            .iter()
            .zip(yv.data())
            .map(|(p, q)| a * p + b * q)
            .collect();
        let value = Tensor::new(xv.shape().to_vec(), data)?;
        Ok(self.push(Op::ScaleAdd { a, x, b, y }, value))
    }

    pub fn scale(&mut self, c: f64, x: NodeId) -> NodeId {
        let xv = self.value(x);
        let data = xv.data().iter().map(|v| c * v).collect();
        let value = Tensor::new(xv.shape().to_vec(), data).expect("same shape");
        self.push(Op::Scale(c, x), value)
    }

    pub fn add_scalar(&mut self, x: NodeId, c: f64) -> NodeId {
        let xv = self.value(x);
        let data = xv.data().iter().map(|v| v + c).collect();
        let value = Tensor::new(xv.shape().to_vec(), data).expect("same shape");
        self.push(Op::AddScalar(x), value)
    }

    fn unary(&mut self, x: NodeId, op: Op, f: impl Fn(f64) -> f64) -> NodeId {
        let xv = self.value(x);
        let data = xv.data().iter().map(|&v| f(v)).collect();
        let value = Tensor::new(xv.shape().to_vec(), data).expect("same shape");
        self.push(op, value)
    }

    pub fn relu(&mut self, x: NodeId) -> NodeId {
        self.unary(x, Op::Relu(x), |v| v.max(0.0))
    }

    pub fn abs(&mut self, x: NodeId) -> NodeId {
        self.unary(x, Op::Abs(x), f64::abs)
    }

    pub fn softplus(&mut self, x: NodeId) -> NodeId {
        self.unary(x, Op::Softplus(x), softplus)
    }

    /// Average over the last axis: `[n, d] -> [n, 1]`.
    pub fn mean_pool(&mut self, x: NodeId) -> Result<NodeId, DiffError> {
        let xv = self.value(x);
        if xv.shape().len() != 2 || xv.shape()[1] == 0 {
            return Err(DiffError::UnsupportedShape {
                op: "mean_pool",
                shape: xv.shape().to_vec(),
            });
        }
        let d = xv.shape()[1] as f64;
        let data: Vec<f64> = xv.rows().map(|r| r.iter().sum::<f64>() / d).collect();
        let value = Tensor::new(vec![data.len(), 1], data)?;
        Ok(self.push(Op::MeanPool(x), value))
    }

    /// Softmax over the last axis.
    pub fn softmax(&mut self, x: NodeId) -> Result<NodeId, DiffError> {
        let xv = self.value(x);
        if xv.shape().is_empty() || xv.last_dim() == 0 {
            return Err(DiffError::UnsupportedShape {
                op: "softmax",
                shape: xv.shape().to_vec(),
            });
        }
        let data: Vec<f64> = xv.rows().flat_map(softmax_slice).collect();
        let value = Tensor::new(xv.shape().to_vec(), data)?;
        Ok(self.push(Op::Softmax(x), value))
    }

    /// `ln Σ exp` over the last axis, dropping that axis.
    pub fn logsumexp(&mut self, x: NodeId) -> Result<NodeId, DiffError> {
        let xv = self.value(x);
        if xv.shape().is_empty() || xv.last_dim() == 0 {
            return Err(DiffError::UnsupportedShape {
                op: "logsumexp",
                shape: xv.shape().to_vec(),
            });
        }
        let data: Vec<f64> = xv.rows().map(logsumexp_slice).collect();
        let shape = xv.shape()[..xv.shape().len() - 1].to_vec();
        let value = Tensor::new(shape, data)?;
        Ok(self.push(Op::LogSumExp(x), value))
    }

    /// Row `i` of a matrix, as a vector.
    pub fn row(&mut self, x: NodeId, i: usize) -> Result<NodeId, DiffError> {
        let xv = self.value(x);
        if xv.shape().len() != 2 || i >= xv.shape()[0] {
            return Err(DiffError::UnsupportedShape {
                op: "row",
                shape: xv.shape().to_vec(),
            });
        }
        let value = Tensor::vector(xv.row(i).to_vec());
        Ok(self.push(Op::Row(x, i), value))
    }

    /// `Σ_k weights[k] · inputs[k]`; a `None` input contributes zeros.
    pub fn mix(&mut self, weights: NodeId, inputs: &[Option<NodeId>]) -> Result<NodeId, DiffError> {
        let wv = self.value(weights);
        if wv.shape() != [inputs.len()] {
            return Err(DiffError::ShapeMismatch {
                op: "mix",
                left: wv.shape().to_vec(),
                right: vec![inputs.len()],
            });
        }
        let shape = match inputs.iter().flatten().next() {
            Some(&first) => self.value(first).shape().to_vec(),
            None => {
                return Err(DiffError::InvalidArgument(
                    "mix needs at least one non-zero input to fix the output shape".into(),
                ))
            }
        };
        let mut out = vec![0.0; shape.iter().product()];
        for (k, input) in inputs.iter().enumerate() {
            let Some(id) = input else { continue };
            let iv = self.value(*id);
            if iv.shape() != shape.as_slice() {
                return Err(DiffError::ShapeMismatch {
                    op: "mix",
                    left: shape.clone(),
                    right: iv.shape().to_vec(),
                });
            }
            let wk = self.value(weights).data()[k];
            for (o, v) in out.iter_mut().zip(iv.data()) {
                *o += wk * v;
            }
        }
        let value = Tensor::new(shape, out)?;
        Ok(self.push(
            Op::Mix {
                weights,
                inputs: inputs.to_vec(),
            },
            value,
        ))
    }

    /// Mean negative log-likelihood of integer labels under row-wise softmax.
    pub fn cross_entropy(&mut self, logits: NodeId, labels: &[usize]) -> Result<NodeId, DiffError> {
        let lv = self.value(logits);
        if lv.shape().len() != 2 || lv.shape()[0] != labels.len() || labels.is_empty() {
            return Err(DiffError::ShapeMismatch {
                op: "cross_entropy",
                left: lv.shape().to_vec(),
                right: vec![labels.len()],
            });
        }
        let classes = lv.shape()[1];
        let mut total = 0.0;
        for (row, &label) in lv.rows().zip(labels) {
            if label >= classes {
                return Err(DiffError::LabelOutOfRange { label, classes });
            }
            total += logsumexp_slice(row) - row[label];
        }
        let value = Tensor::scalar(total / labels.len() as f64);
        Ok(self.push(
            Op::CrossEntropy {
                logits,
                labels: labels.to_vec(),
            },
            value,
        ))
    }

    /// Mean squared error over all elements.
    pub fn mse(&mut self, pred: NodeId, target: NodeId) -> Result<NodeId, DiffError> {
        let (pv, tv) = (self.value(pred), self.value(target));
        if pv.shape() != tv.shape() || pv.is_empty() {
            return Err(mismatch("mse", pv, tv));
        }
        let n = pv.len() as f64;
        let v = pv
            .data()
            .iter()
            .zip(tv.data())
            .map(|(p, t)| (p - t) * (p - t))
            .sum::<f64>()
            / n;
        Ok(self.push(Op::Mse(pred, target), Tensor::scalar(v)))
    }

    pub fn sum(&mut self, x: NodeId) -> NodeId {
        let v = self.value(x).data().iter().sum();
        self.push(Op::Sum(x), Tensor::scalar(v))
    }

    pub fn mean(&mut self, x: NodeId) -> NodeId {
        let xv = self.value(x);
        let v = xv.data().iter().sum::<f64>() / xv.len().max(1) as f64;
        self.push(Op::Mean(x), Tensor::scalar(v))
    }

    /// `Σ x²`.
    pub fn sq_norm(&mut self, x: NodeId) -> NodeId {
        let v = self.value(x).data().iter().map(|v| v * v).sum();
        self.push(Op::SqNorm(x), Tensor::scalar(v))
    }

    /// Reverse sweep from a scalar `loss`, visiting each recorded node once.
    pub fn backward(&self, loss: NodeId) -> Result<Gradients, DiffError> {
        let lv = self.value(loss);
        if !lv.is_scalar() {
            return Err(DiffError::NonScalarLoss {
                shape: lv.shape().to_vec(),
            });
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(Tensor::full(lv.shape(), 1.0));

        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            self.propagate(&node.op, &node.value, &g, &mut grads);
            grads[idx] = Some(g);
        }
        let shapes = self.nodes.iter().map(|n| n.value.shape().to_vec()).collect();
        Ok(Gradients { grads, shapes })
    }

    fn propagate(&self, op: &Op, out: &Tensor, g: &Tensor, grads: &mut [Option<Tensor>]) {
        let mut accumulate = |id: NodeId, delta: Tensor| match &mut grads[id.0] {
            Some(existing) => existing.add_assign(&delta),
            slot @ None => *slot = Some(delta),
        };
        let same_shape = |id: NodeId, data: Vec<f64>| {
            Tensor::new(self.value(id).shape().to_vec(), data).expect("gradient shape")
        };
        match op {
            Op::Leaf(_) => {}
            Op::Linear { x, w, b } => {
                let (xv, wv) = (self.value(*x), self.value(*w));
                let (n, i, o) = (xv.shape()[0], xv.shape()[1], wv.shape()[1]);
                let (xd, wd, gd) = (xv.data(), wv.data(), g.data());
                let mut dx = vec![0.0; n * i];
                let mut dw = vec![0.0; i * o];
                for r in 0..n {
                    let grow = &gd[r * o..(r + 1) * o];
                    for k in 0..i {
                        let wrow = &wd[k * o..(k + 1) * o];
                        dx[r * i + k] = grow.iter().zip(wrow).map(|(a, b)| a * b).sum();
                        let xk = xd[r * i + k];
                        if xk != 0.0 {
                            for (acc, gv) in dw[k * o..(k + 1) * o].iter_mut().zip(grow) {
                                *acc += xk * gv;
                            }
                        }
                    }
                }
                accumulate(*x, same_shape(*x, dx));
                accumulate(*w, same_shape(*w, dw));
                if let Some(b) = b {
                    let mut db = vec![0.0; o];
                    for grow in gd.chunks(o) {
                        for (acc, gv) in db.iter_mut().zip(grow) {
                            *acc += gv;
                        }
                    }
                    accumulate(*b, same_shape(*b, db));
                }
            }
            Op::Add(a, b) => {
                accumulate(*a, g.clone());
                accumulate(*b, g.clone());
            }
            Op::ScaleAdd { a, x, b, y } => {
                accumulate(*x, same_shape(*x, g.data().iter().map(|v| a * v).collect()));
                accumulate(*y, same_shape(*y, g.data().iter().map(|v| b * v).collect()));
            }
            Op::Scale(c, x) => {
                accumulate(*x, same_shape(*x, g.data().iter().map(|v| c * v).collect()));
            }
            Op::AddScalar(x) => accumulate(*x, g.clone()),
            Op::Relu(x) => {
                let d = self
                    .value(*x)
                    .data()
                    .iter()
                    .zip(g.data())
                    .map(|(&xv, &gv)| if xv > 0.0 { gv } else { 0.0 })
                    .collect();
                accumulate(*x, same_shape(*x, d));
            }
            Op::Abs(x) => {
                let d = self
                    .value(*x)
                    .data()
                    .iter()
                    .zip(g.data())
                    .map(|(&xv, &gv)| {
                        if xv > 0.0 {
                            gv
                        } else if xv < 0.0 {
                            -gv
                        } else {
                            0.0
                        }
                    })
                    .collect();
                accumulate(*x, same_shape(*x, d));
            }
            Op::Softplus(x) => {
                let d = self
                    .value(*x)
                    .data()
                    .iter()
                    .zip(g.data())
                    .map(|(&xv, &gv)| gv * sigmoid(xv))
                    .collect();
                accumulate(*x, same_shape(*x, d));
            }
            Op::MeanPool(x) => {
                let xv = self.value(*x);
                let d = xv.shape()[1];
                let inv = 1.0 / d as f64;
                let mut dx = Vec::with_capacity(xv.len());
                for &gv in g.data() {
                    dx.extend(std::iter::repeat_n(gv * inv, d));
                }
                accumulate(*x, same_shape(*x, dx));
            }
            Op::Softmax(x) => {
                let c = out.last_dim();
                let mut dx = Vec::with_capacity(out.len());
                for (yrow, grow) in out.data().chunks(c).zip(g.data().chunks(c)) {
                    let dot: f64 = yrow.iter().zip(grow).map(|(a, b)| a * b).sum();
                    dx.extend(yrow.iter().zip(grow).map(|(y, gv)| y * (gv - dot)));
                }
                accumulate(*x, same_shape(*x, dx));
            }
            Op::LogSumExp(x) => {
                let xv = self.value(*x);
                let mut dx = Vec::with_capacity(xv.len());
                for (row, &gv) in xv.rows().zip(g.data()) {
                    dx.extend(softmax_slice(row).into_iter().map(|p| p * gv));
                }
                accumulate(*x, same_shape(*x, dx));
            }
            Op::Row(x, i) => {
                let xv = self.value(*x);
                let c = xv.last_dim();
                let mut dx = vec![0.0; xv.len()];
                dx[i * c..(i + 1) * c].copy_from_slice(g.data());
                accumulate(*x, same_shape(*x, dx));
            }
            Op::Mix { weights, inputs } => {
                let wv = self.value(*weights).data().to_vec();
                let mut dw = vec![0.0; inputs.len()];
                for (k, input) in inputs.iter().enumerate() {
                    let Some(id) = input else { continue };
                    dw[k] = self
                        .value(*id)
                        .data()
                        .iter()
                        .zip(g.data())
                        .map(|(a, b)| a * b)
                        .sum();
                    let dx = g.data().iter().map(|v| wv[k] * v).collect();
                    accumulate(*id, same_shape(*id, dx));
                }
                accumulate(*weights, same_shape(*weights, dw));
            }
            Op::CrossEntropy { logits, labels } => {
                let lv = self.value(*logits);
                let scale = g.item() / labels.len() as f64;
                let mut dx = Vec::with_capacity(lv.len());
                for (row, &label) in lv.rows().zip(labels) {
                    let p = softmax_slice(row);
                    dx.extend(p.into_iter().enumerate().map(|(k, pk)| {
                        let target = if k == label { 1.0 } else { 0.0 };
                        (pk - target) * scale
                    }));
                }
                accumulate(*logits, same_shape(*logits, dx));
            }
            Op::Mse(p, t) => {
                let (pv, tv) = (self.value(*p), self.value(*t));
                let scale = 2.0 * g.item() / pv.len() as f64;
                let dp: Vec<f64> = pv
                    .data()
                    .iter()
                    .zip(tv.data())
                    .map(|(a, b)| scale * (a - b))
                    .collect();
                let dt = dp.iter().map(|v| -v).collect();
                accumulate(*p, same_shape(*p, dp));
                accumulate(*t, same_shape(*t, dt));
            }
            Op::Sum(x) => {
                let n = self.value(*x).len();
                accumulate(*x, same_shape(*x, vec![g.item(); n]));
            }
            Op::Mean(x) => {
                let n = self.value(*x).len();
                accumulate(*x, same_shape(*x, vec![g.item() / n as f64; n]));
            }
            Op::SqNorm(x) => {
                let gv = g.item();
                let d = self.value(*x).data().iter().map(|v| 2.0 * v * gv).collect();
                accumulate(*x, same_shape(*x, d));
            }
        }
    }
}
