//! Reverse-mode differentiation over a recorded tape of operations.
//!
//! A [`Tape`] records every operation applied to its [`Var`] handles. Calling
//! [`Tape::backward`] on a scalar result walks the tape in reverse and returns
//! the gradient of that scalar with respect to every node that requires one.
//! Tapes are cheap; build a fresh one per training step.

use std::cell::RefCell;
use std::rc::Rc;

use rand::Rng;

use crate::error::{shape_err, Result, TensorError};
use crate::kernels::{self, sample_count};
use crate::{Scalar, Tensor};

#[derive(Debug)]
enum Op<S> {
    Leaf,
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Affine { x: usize, scale: S },
    Sum(usize),
    Mean(usize),
    Conv2d {
        x: usize,
        w: usize,
        b: Option<usize>,
        stride: usize,
        pad: usize,
    },
    LeakyRelu { x: usize, slope: S },
    Sigmoid(usize),
    Dropout { x: usize, mask: Vec<S> },
    Upsample { x: usize, fy: usize, fx: usize },
    Concat(usize, usize),
    Mse(usize, usize),
    Ssim(usize, usize),
}

#[derive(Debug)]
struct Node<S> {
    value: Rc<Tensor<S>>,
    op: Op<S>,
    requires_grad: bool,
}

#[derive(Debug, Default)]
pub struct Tape<S> {
    nodes: RefCell<Vec<Node<S>>>,
}

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy)]
pub struct Var<'t, S> {
    tape: &'t Tape<S>,
    id: usize,
}

/// Gradients produced by [`Tape::backward`], indexed by node.
#[derive(Debug)]
pub struct Gradients<S> {
    grads: Vec<Option<Tensor<S>>>,
}

impl<S: Scalar> Gradients<S> {
    pub fn get(&self, var: Var<'_, S>) -> Option<&Tensor<S>> {
        self.grads.get(var.id).and_then(Option::as_ref)
    }
}

impl<S: Scalar> Tape<S> {
    pub fn new() -> Self {
        Self {
            nodes: RefCell::new(Vec::new()),
        }
    }

    /// A leaf that gradients flow into.
    pub fn var(&self, value: Tensor<S>) -> Var<'_, S> {
        self.push(value, Op::Leaf, true)
    }

    /// A leaf excluded from differentiation.
    pub fn constant(&self, value: Tensor<S>) -> Var<'_, S> {
        self.push(value, Op::Leaf, false)
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn push(&self, value: Tensor<S>, op: Op<S>, requires_grad: bool) -> Var<'_, S> {
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(Node {
            value: Rc::new(value),
            op,
            requires_grad,
        });
        Var {
            tape: self,
            id: nodes.len() - 1,
        }
    }

    fn value(&self, id: usize) -> Rc<Tensor<S>> {
        Rc::clone(&self.nodes.borrow()[id].value)
    }

    fn requires(&self, id: usize) -> bool {
        self.nodes.borrow()[id].requires_grad
    }

    fn record(&self, value: Tensor<S>, op: Op<S>, inputs: &[usize], name: &'static str) -> Result<Var<'_, S>> {
        let value = value.ensure_finite(name)?;
        let requires = inputs.iter().any(|&i| self.requires(i));
        Ok(self.push(value, op, requires))
    }

    /// Gradients of the scalar `loss` with respect to every node on the tape.
    ///
    /// The tape is left intact, so `backward` can be called again.
    pub fn backward(&self, loss: Var<'_, S>) -> Result<Gradients<S>> {
        let nodes = self.nodes.borrow();
        if nodes[loss.id].value.len() != 1 {
            return Err(shape_err(
                "backward",
                format!("loss must be a scalar, got shape {:?}", nodes[loss.id].value.shape()),
            ));
        }
        let mut grads: Vec<Option<Tensor<S>>> = (0..nodes.len()).map(|_| None).collect();
        grads[loss.id] = Some(Tensor::full(nodes[loss.id].value.shape().to_vec(), S::one()));

        for id in (0..=loss.id).rev() {
            let node = &nodes[id];
            if !node.requires_grad || matches!(node.op, Op::Leaf) {
                continue;
            }
            let Some(g) = grads[id].take() else { continue };
            let need = |i: usize| nodes[i].requires_grad;
            let mut acc = |i: usize, t: Tensor<S>| match &mut grads[i] {
                Some(existing) => existing.add_assign(&t),
                slot @ None => *slot = Some(t),
            };
            match &node.op {
                Op::Leaf => unreachable!(),
                &Op::Add(a, b) => {
                    if need(a) {
                        acc(a, g.clone());
                    }
                    if need(b) {
                        acc(b, g.clone());
                    }
                }
                &Op::Sub(a, b) => {
                    if need(a) {
                        acc(a, g.clone());
                    }
                    if need(b) {
                        acc(b, g.map(|v| -v));
                    }
                }
                &Op::Mul(a, b) => {
                    let (va, vb) = (&nodes[a].value, &nodes[b].value);
                    if need(a) {
                        acc(a, zip_map(&g, vb, |gi, bi| gi * bi));
                    }
                    if need(b) {
                        acc(b, zip_map(&g, va, |gi, ai| gi * ai));
                    }
                }
                &Op::Affine { x, scale } => acc(x, g.map(|v| v * scale)),
                &Op::Sum(x) => {
                    let gv = g.item();
                    acc(x, Tensor::full(nodes[x].value.shape().to_vec(), gv));
                }
                &Op::Mean(x) => {
                    let xv = &nodes[x].value;
                    let gv = g.item() / S::of(xv.len() as f64);
                    acc(x, Tensor::full(xv.shape().to_vec(), gv));
                }
                &Op::Conv2d {
                    x,
                    w,
                    b,
                    stride,
                    pad,
                } => {
                    let need_b = b.map(need).unwrap_or(false);
                    let cg = kernels::conv2d_backward(
                        &nodes[x].value,
                        &nodes[w].value,
                        &g,
                        stride,
                        pad,
                        [need(x), need(w), need_b],
                    )?;
                    if let Some(dx) = cg.dx {
                        acc(x, dx);
                    }
                    if let Some(dw) = cg.dw {
                        acc(w, dw);
                    }
                    if let (Some(b), Some(db)) = (b, cg.db) {
                        acc(b, db);
                    }
                }
                &Op::LeakyRelu { x, slope } => {
                    let d = zip_map(&g, &nodes[x].value, |gi, xi| {
                        if xi >= S::zero() {
                            gi
                        } else {
                            gi * slope
                        }
                    });
                    acc(x, d);
                }
                &Op::Sigmoid(x) => {
                    let d = zip_map(&g, &node.value, |gi, yi| gi * yi * (S::one() - yi));
                    acc(x, d);
                }
                Op::Dropout { x, mask } => {
                    let d = Tensor::new(
                        g.shape().to_vec(),
                        g.data().iter().zip(mask).map(|(&gi, &m)| gi * m).collect(),
                    )?;
                    acc(*x, d);
                }
                &Op::Upsample { x, fy, fx } => {
                    acc(x, kernels::upsample_backward(nodes[x].value.shape(), &g, fy, fx));
                }
                &Op::Concat(a, b) => {
                    let (da, db) =
                        kernels::concat_backward(nodes[a].value.shape(), nodes[b].value.shape(), &g);
                    if need(a) {
                        acc(a, da);
                    }
                    if need(b) {
                        acc(b, db);
                    }
                }
                &Op::Mse(a, b) => {
                    let (va, vb) = (&nodes[a].value, &nodes[b].value);
                    let k = S::of(2.0) * g.item() / S::of(va.len() as f64);
                    let diff = zip_map(va, vb, |x, y| (x - y) * k);
                    if need(b) {
                        acc(b, diff.map(|v| -v));
                    }
                    if need(a) {
                        acc(a, diff);
                    }
                }
                &Op::Ssim(a, b) => {
                    let (du, dv) =
                        kernels::ssim_backward(&nodes[a].value, &nodes[b].value, g.item());
                    if need(a) {
                        acc(a, du);
                    }
                    if need(b) {
                        acc(b, dv);
                    }
                }
            }
        }
        Ok(Gradients { grads })
    }
}

fn zip_map<S: Scalar>(a: &Tensor<S>, b: &Tensor<S>, f: impl Fn(S, S) -> S) -> Tensor<S> {
    Tensor::new(
        a.shape().to_vec(),
        a.data().iter().zip(b.data()).map(|(&x, &y)| f(x, y)).collect(),
    )
    .expect("zip_map operands share a shape")
}

fn same_shape<S: Scalar>(op: &'static str, a: &Tensor<S>, b: &Tensor<S>) -> Result<()> {
    if a.shape() == b.shape() {
        Ok(())
    } else {
        Err(shape_err(op, format!("{:?} vs {:?}", a.shape(), b.shape())))
    }
}

impl<'t, S: Scalar> Var<'t, S> {
    pub fn value(&self) -> Rc<Tensor<S>> {
        self.tape.value(self.id)
    }

    pub fn shape(&self) -> Vec<usize> {
        self.value().shape().to_vec()
    }

    fn binary(
        self,
        other: Var<'t, S>,
        name: &'static str,
        f: impl Fn(S, S) -> S,
        op: Op<S>,
    ) -> Result<Var<'t, S>> {
        let (a, b) = (self.value(), other.value());
        same_shape(name, &a, &b)?;
        self.tape.record(zip_map(&a, &b, f), op, &[self.id, other.id], name)
    }

    pub fn add(self, other: Var<'t, S>) -> Result<Var<'t, S>> {
        self.binary(other, "add", |x, y| x + y, Op::Add(self.id, other.id))
    }

    pub fn sub(self, other: Var<'t, S>) -> Result<Var<'t, S>> {
        self.binary(other, "sub", |x, y| x - y, Op::Sub(self.id, other.id))
    }

    pub fn mul(self, other: Var<'t, S>) -> Result<Var<'t, S>> {
        self.binary(other, "mul", |x, y| x * y, Op::Mul(self.id, other.id))
    }

    /// `scale * x + shift`, elementwise.
    pub fn affine(self, scale: S, shift: S) -> Result<Var<'t, S>> {
        let v = self.value().map(|x| scale * x + shift);
        self.tape
            .record(v, Op::Affine { x: self.id, scale }, &[self.id], "affine")
    }

    pub fn sum(self) -> Result<Var<'t, S>> {
        let s: S = self.value().data().iter().copied().sum();
        self.tape.record(Tensor::scalar(s), Op::Sum(self.id), &[self.id], "sum")
    }

    pub fn mean(self) -> Result<Var<'t, S>> {
        let v = self.value();
        let s: S = v.data().iter().copied().sum::<S>() / S::of(v.len() as f64);
        self.tape.record(Tensor::scalar(s), Op::Mean(self.id), &[self.id], "mean")
    }

    /// 2-D cross-correlation of a `(B, C, H, W)` input with `(O, C, kh, kw)` kernels.
    pub fn conv2d(
        self,
        weight: Var<'t, S>,
        bias: Option<Var<'t, S>>,
        stride: usize,
        pad: usize,
    ) -> Result<Var<'t, S>> {
        let bias_val = bias.map(|b| b.value());
        let out = kernels::conv2d_forward(
            &self.value(),
            &weight.value(),
            bias_val.as_deref(),
            stride,
            pad,
        )?;
        let mut inputs = vec![self.id, weight.id];
        inputs.extend(bias.map(|b| b.id));
        let op = Op::Conv2d {
            x: self.id,
            w: weight.id,
            b: bias.map(|b| b.id),
            stride,
            pad,
        };
        self.tape.record(out, op, &inputs, "conv2d")
    }

    pub fn leaky_relu(self, slope: S) -> Result<Var<'t, S>> {
        if slope < S::zero() || slope >= S::one() {
            return Err(TensorError::Parameter(format!(
                "leaky slope {slope} outside [0, 1)"
            )));
        }
        let v = self
            .value()
            .map(|x| if x >= S::zero() { x } else { slope * x });
        self.tape
            .record(v, Op::LeakyRelu { x: self.id, slope }, &[self.id], "leaky_relu")
    }

    pub fn relu(self) -> Result<Var<'t, S>> {
        self.leaky_relu(S::zero())
    }

    pub fn sigmoid(self) -> Result<Var<'t, S>> {
        let v = self.value().map(|x| S::one() / (S::one() + (-x).exp()));
        self.tape.record(v, Op::Sigmoid(self.id), &[self.id], "sigmoid")
    }

    /// Inverted dropout: in training mode each element is zeroed with probability
    /// `p` and survivors are scaled by `1 / (1 - p)`. Identity otherwise.
    pub fn dropout(self, p: f64, training: bool, rng: &mut impl Rng) -> Result<Var<'t, S>> {
        if !(0.0..1.0).contains(&p) {
            return Err(TensorError::Parameter(format!("dropout p = {p} outside [0, 1)")));
        }
        if !training || p == 0.0 {
            return Ok(self);
        }
        let keep = S::of(1.0 / (1.0 - p));
        let v = self.value();
        let mask: Vec<S> = (0..v.len())
            .map(|_| if rng.random::<f64>() < p { S::zero() } else { keep })
            .collect();
        let out = Tensor::new(
            v.shape().to_vec(),
            v.data().iter().zip(&mask).map(|(&x, &m)| x * m).collect(),
        )?;
        self.tape
            .record(out, Op::Dropout { x: self.id, mask }, &[self.id], "dropout")
    }

    /// Nearest-neighbour resize by integer per-axis factors.
    pub fn upsample_nearest(self, fy: usize, fx: usize) -> Result<Var<'t, S>> {
        let out = kernels::upsample_forward(&self.value(), fy, fx)?;
        self.tape
            .record(out, Op::Upsample { x: self.id, fy, fx }, &[self.id], "upsample")
    }

    /// Concatenation along the channel axis.
    pub fn concat(self, other: Var<'t, S>) -> Result<Var<'t, S>> {
        let out = kernels::concat_forward(&self.value(), &other.value())?;
        self.tape
            .record(out, Op::Concat(self.id, other.id), &[self.id, other.id], "concat")
    }

    /// Mean squared error over all elements.
    pub fn mse(self, other: Var<'t, S>) -> Result<Var<'t, S>> {
        let (a, b) = (self.value(), other.value());
        same_shape("mse", &a, &b)?;
        let s: S = a
            .data()
            .iter()
            .zip(b.data())
            .map(|(&x, &y)| (x - y) * (x - y))
            .sum();
        let v = s / S::of(a.len() as f64);
        self.tape
            .record(Tensor::scalar(v), Op::Mse(self.id, other.id), &[self.id, other.id], "mse")
    }

    /// Whole-image SSIM, averaged over the batch axis of rank-4 inputs.
    pub fn ssim(self, other: Var<'t, S>) -> Result<Var<'t, S>> {
        let (a, b) = (self.value(), other.value());
        same_shape("ssim", &a, &b)?;
        if a.len() / sample_count(&a) == 0 {
            return Err(shape_err("ssim", "empty samples"));
        }
        let v = kernels::ssim_forward(&a, &b);
        self.tape
            .record(Tensor::scalar(v), Op::Ssim(self.id, other.id), &[self.id, other.id], "ssim")
    }
}
