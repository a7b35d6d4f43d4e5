use std::sync::Arc;

use super::tensor::{gemm, Tensor};
use crate::{Error, Result};

/// Handle to a node recorded on a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReduceMode {
    Mean,
    Sum,
}

#[derive(Debug)]
enum Op {
    Leaf,
    Affine { w: Var, x: Var, b: Option<Var> },
    MatMul { a: Var, b: Var },
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Div(Var, Var),
    Scale(Var, f64),
    AddScalar(Var),
    Relu(Var),
    Cos(Var),
    Sin(Var),
    Ln1p(Var),
    Reduce { x: Var, axis: usize, mode: ReduceMode },
    Expand { x: Var, axis: usize },
    ExclusiveMean { x: Var, axis: usize },
    ClassAggregate { x: Var, block: usize },
    Concat { parts: Vec<Var>, axis: usize },
    Narrow { x: Var, axis: usize, start: usize },
    Gather { x: Var, index: Arc<[usize]> },
    Reshape(Var),
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

/// Gradient tape.
///
/// Nodes are appended in creation order, so parents always precede their
/// children and a reverse scan is a valid reverse topological order.
#[derive(Debug, Default)]
pub struct Graph {
    nodes: Vec<Node>,
}

/// Result of [`Graph::backward`]: one gradient per `requires_grad` leaf.
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    /// Gradient of the loss with respect to `var`, if `var` is a trainable leaf.
    pub fn get(&self, var: Var) -> Option<&Tensor> {
        self.grads.get(var.0).and_then(Option::as_ref)
    }

    pub fn take(&mut self, var: Var) -> Option<Tensor> {
        self.grads.get_mut(var.0).and_then(Option::take)
    }
}

impl Graph {
    pub fn new() -> Self {
        Graph { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Leaf that receives a gradient on [`backward`](Self::backward).
    pub fn param(&mut self, value: Tensor) -> Var {
        self.leaf(value, true)
    }

    /// Leaf treated as a constant.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.leaf(value, false)
    }

    pub fn leaf(&mut self, value: Tensor, requires_grad: bool) -> Var {
        self.push(value, Op::Leaf, requires_grad)
    }

    pub fn value(&self, var: Var) -> &Tensor {
        &self.nodes[var.0].value
    }

    pub fn shape(&self, var: Var) -> &[usize] {
        self.nodes[var.0].value.shape()
    }

    pub fn requires_grad(&self, var: Var) -> bool {
        self.nodes[var.0].requires_grad
    }

    fn push(&mut self, value: Tensor, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn any_grad(&self, vars: &[Var]) -> bool {
        vars.iter().any(|v| self.nodes[v.0].requires_grad)
    }

    fn data(&self, var: Var) -> &[f64] {
        self.nodes[var.0].value.data()
    }

    /// `W·x + b` with `W: [Q, P]`, `x: [P, ...]`, `b: [Q]`.
    ///
    /// Trailing axes of `x` are treated as a batch of columns, so a single
    /// call applies the same filter to every (user, element) position.
    pub fn affine(&mut self, w: Var, x: Var, b: Option<Var>) -> Result<Var> {
        let ws = self.shape(w);
        let xs = self.shape(x);
        if ws.len() != 2 || xs.is_empty() || ws[1] != xs[0] {
            return Err(Error::dim(format!("affine: weight {ws:?} vs input {xs:?}")));
        }
        let (q, p) = (ws[0], ws[1]);
        if let Some(b) = b {
            let bs = self.shape(b);
            if bs != [q] {
                return Err(Error::dim(format!("affine: bias {bs:?} for {q} outputs")));
            }
        }
        let mut out_shape = xs.to_vec();
        out_shape[0] = q;
        let k = self.nodes[x.0].value.len() / p.max(1);
        let mut out = vec![0.0; q * k];
        gemm(q, p, k, self.data(w), p, 1, self.data(x), k, 1, &mut out, false);
        if let Some(b) = b {
            for (row, &bias) in out.chunks_mut(k.max(1)).zip(self.data(b)) {
                row.iter_mut().for_each(|v| *v += bias);
            }
        }
        let mut deps = vec![w, x];
        deps.extend(b);
        let rg = self.any_grad(&deps);
        Ok(self.push(Tensor::new(out_shape, out)?, Op::Affine { w, x, b }, rg))
    }

    /// Two-dimensional matrix product.
    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let as_ = self.shape(a);
        let bs = self.shape(b);
        if as_.len() != 2 || bs.len() != 2 || as_[1] != bs[0] {
            return Err(Error::dim(format!("matmul: {as_:?} x {bs:?}")));
        }
        let (m, k, n) = (as_[0], as_[1], bs[1]);
        let mut out = vec![0.0; m * n];
        gemm(m, k, n, self.data(a), k, 1, self.data(b), n, 1, &mut out, false);
        let rg = self.any_grad(&[a, b]);
        Ok(self.push(Tensor::new(vec![m, n], out)?, Op::MatMul { a, b }, rg))
    }

    fn binary(&mut self, a: Var, b: Var, name: &str) -> Result<()> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa != sb {
            return Err(Error::dim(format!("{name}: {sa:?} vs {sb:?}")));
        }
        Ok(())
    }

    fn zip_map(&self, a: Var, b: Var, f: impl Fn(f64, f64) -> f64) -> Tensor {
        let data = self
            .data(a)
            .iter()
            .zip(self.data(b))
            .map(|(&x, &y)| f(x, y))
            .collect();
        Tensor::new(self.shape(a).to_vec(), data).expect("same shape")
    }

    fn map(&self, a: Var, f: impl Fn(f64) -> f64) -> Tensor {
        let data = self.data(a).iter().map(|&x| f(x)).collect();
        Tensor::new(self.shape(a).to_vec(), data).expect("same shape")
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(a, b, "add")?;
        let v = self.zip_map(a, b, |x, y| x + y);
        let rg = self.any_grad(&[a, b]);
        Ok(self.push(v, Op::Add(a, b), rg))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(a, b, "sub")?;
        let v = self.zip_map(a, b, |x, y| x - y);
        let rg = self.any_grad(&[a, b]);
        Ok(self.push(v, Op::Sub(a, b), rg))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(a, b, "mul")?;
        let v = self.zip_map(a, b, |x, y| x * y);
        let rg = self.any_grad(&[a, b]);
        Ok(self.push(v, Op::Mul(a, b), rg))
    }

    /// Elementwise quotient; every denominator must be nonzero.
    pub fn div(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(a, b, "div")?;
        if let Some(bad) = self.data(b).iter().find(|d| **d == 0.0 || !d.is_finite()) {
            return Err(Error::numeric(format!("div: invalid denominator {bad}")));
        }
        let v = self.zip_map(a, b, |x, y| x / y);
        let rg = self.any_grad(&[a, b]);
        Ok(self.push(v, Op::Div(a, b), rg))
    }

    pub fn scale(&mut self, a: Var, factor: f64) -> Var {
        let v = self.map(a, |x| x * factor);
        let rg = self.any_grad(&[a]);
        self.push(v, Op::Scale(a, factor), rg)
    }

    pub fn add_scalar(&mut self, a: Var, offset: f64) -> Var {
        let v = self.map(a, |x| x + offset);
        let rg = self.any_grad(&[a]);
        self.push(v, Op::AddScalar(a), rg)
    }

    /// `max(0, x)`; the derivative at exactly zero is taken as zero.
    pub fn relu(&mut self, a: Var) -> Var {
        let v = self.map(a, |x| if x > 0.0 { x } else { 0.0 });
        let rg = self.any_grad(&[a]);
        self.push(v, Op::Relu(a), rg)
    }

    pub fn cos(&mut self, a: Var) -> Var {
        let v = self.map(a, f64::cos);
        let rg = self.any_grad(&[a]);
        self.push(v, Op::Cos(a), rg)
    }

    pub fn sin(&mut self, a: Var) -> Var {
        let v = self.map(a, f64::sin);
        let rg = self.any_grad(&[a]);
        self.push(v, Op::Sin(a), rg)
    }

    /// `ln(1 + x)`, defined for `x > -1`.
    pub fn ln_1p(&mut self, a: Var) -> Result<Var> {
        if let Some(bad) = self.data(a).iter().find(|x| !(**x > -1.0) || !x.is_finite()) {
            return Err(Error::numeric(format!("ln_1p: argument {bad} out of domain")));
        }
        let v = self.map(a, f64::ln_1p);
        let rg = self.any_grad(&[a]);
        Ok(self.push(v, Op::Ln1p(a), rg))
    }

    /// Sum or mean over `axis`, which is removed from the shape.
    pub fn reduce(&mut self, x: Var, axis: usize, mode: ReduceMode) -> Result<Var> {
        let shape = self.shape(x).to_vec();
        if axis >= shape.len() {
            return Err(Error::dim(format!("reduce: axis {axis} for shape {shape:?}")));
        }
        let (outer, len, inner) = Tensor::split_axis(&shape, axis);
        let src = self.data(x);
        let mut out = vec![0.0; outer * inner];
        for o in 0..outer {
            let dst = &mut out[o * inner..(o + 1) * inner];
            for l in 0..len {
                let row = &src[(o * len + l) * inner..(o * len + l + 1) * inner];
                dst.iter_mut().zip(row).for_each(|(d, s)| *d += s);
            }
        }
        if mode == ReduceMode::Mean && len > 0 {
            let inv = 1.0 / len as f64;
            out.iter_mut().for_each(|v| *v *= inv);
        }
        let mut out_shape = shape;
        out_shape.remove(axis);
        let rg = self.any_grad(&[x]);
        Ok(self.push(Tensor::new(out_shape, out)?, Op::Reduce { x, axis, mode }, rg))
    }

    /// Sum of every element, as a scalar.
    pub fn sum_all(&mut self, x: Var) -> Result<Var> {
        let n = self.nodes[x.0].value.len();
        let flat = self.reshape(x, vec![n])?;
        self.reduce(flat, 0, ReduceMode::Sum)
    }

    /// Inserts a new axis at `axis` by repeating the input `len` times.
    pub fn expand(&mut self, x: Var, axis: usize, len: usize) -> Result<Var> {
        let shape = self.shape(x).to_vec();
        if axis > shape.len() {
            return Err(Error::dim(format!("expand: axis {axis} for shape {shape:?}")));
        }
        let outer: usize = shape[..axis].iter().product();
        let inner: usize = shape[axis..].iter().product();
        let src = self.data(x);
        let mut out = Vec::with_capacity(outer * len * inner);
        for o in 0..outer {
            let block = &src[o * inner..(o + 1) * inner];
            for _ in 0..len {
                out.extend_from_slice(block);
            }
        }
        let mut out_shape = shape;
        out_shape.insert(axis, len);
        let rg = self.any_grad(&[x]);
        Ok(self.push(Tensor::new(out_shape, out)?, Op::Expand { x, axis }, rg))
    }

    /// Mean over all *other* positions along `axis`:
    /// `out[.., k, ..] = (Σ_{k'≠k} x[.., k', ..]) / (len - 1)`.
    pub fn exclusive_mean(&mut self, x: Var, axis: usize) -> Result<Var> {
        let shape = self.shape(x).to_vec();
        if axis >= shape.len() {
            return Err(Error::dim(format!(
                "exclusive_mean: axis {axis} for shape {shape:?}"
            )));
        }
        if shape[axis] < 2 {
            return Err(Error::contract(format!(
                "exclusive_mean needs at least 2 entries along axis {axis}, got {}",
                shape[axis]
            )));
        }
        let out = exclusive_mean_kernel(self.data(x), &shape, axis);
        let rg = self.any_grad(&[x]);
        Ok(self.push(Tensor::new(shape, out)?, Op::ExclusiveMean { x, axis }, rg))
    }

    /// Four-class pooling of a `[4·block, U, N]` tensor, row block `k`
    /// receiving: (0) the input itself, (1) its mean over `N`, (2) its mean
    /// over the other users, (3) its mean over `N` and the other users.
    /// Pooled values are broadcast back to the full shape.
    pub fn class_aggregate(&mut self, x: Var, block: usize) -> Result<Var> {
        let shape = self.shape(x).to_vec();
        if shape.len() != 3 || shape[0] != 4 * block || block == 0 {
            return Err(Error::dim(format!(
                "class_aggregate: shape {shape:?} for block {block}"
            )));
        }
        if shape[1] < 2 {
            return Err(Error::contract(format!(
                "class_aggregate needs at least 2 users, got {}",
                shape[1]
            )));
        }
        let mut out = vec![0.0; self.nodes[x.0].value.len()];
        class_aggregate_kernel(self.data(x), &shape, block, &mut out);
        let rg = self.any_grad(&[x]);
        Ok(self.push(Tensor::new(shape, out)?, Op::ClassAggregate { x, block }, rg))
    }

    /// Concatenation along `axis`; all other extents must agree.
    pub fn concat(&mut self, parts: &[Var], axis: usize) -> Result<Var> {
        let first = parts
            .first()
            .ok_or_else(|| Error::contract("concat of zero tensors"))?;
        let base = self.shape(*first).to_vec();
        if axis >= base.len() {
            return Err(Error::dim(format!("concat: axis {axis} for shape {base:?}")));
        }
        let mut total = 0;
        for &p in parts {
            let s = self.shape(p);
            let compatible = s.len() == base.len()
                && s.iter()
                    .zip(&base)
                    .enumerate()
                    .all(|(i, (a, b))| i == axis || a == b);
            if !compatible {
                return Err(Error::dim(format!("concat: {s:?} vs {base:?} on axis {axis}")));
            }
            total += s[axis];
        }
        let (outer, _, inner) = Tensor::split_axis(&base, axis);
        let mut out = Vec::with_capacity(outer * total * inner);
        for o in 0..outer {
            for &p in parts {
                let len = self.shape(p)[axis];
                let block = len * inner;
                out.extend_from_slice(&self.data(p)[o * block..(o + 1) * block]);
            }
        }
        let mut out_shape = base;
        out_shape[axis] = total;
        let rg = self.any_grad(parts);
        Ok(self.push(
            Tensor::new(out_shape, out)?,
            Op::Concat {
                parts: parts.to_vec(),
                axis,
            },
            rg,
        ))
    }

    /// Slice `start..start+len` along `axis`.
    pub fn narrow(&mut self, x: Var, axis: usize, start: usize, len: usize) -> Result<Var> {
        let shape = self.shape(x).to_vec();
        if axis >= shape.len() || start + len > shape[axis] {
            return Err(Error::dim(format!(
                "narrow: {start}..{} on axis {axis} of {shape:?}",
                start + len
            )));
        }
        let (outer, full, inner) = Tensor::split_axis(&shape, axis);
        let src = self.data(x);
        let mut out = Vec::with_capacity(outer * len * inner);
        for o in 0..outer {
            let from = (o * full + start) * inner;
            out.extend_from_slice(&src[from..from + len * inner]);
        }
        let mut out_shape = shape;
        out_shape[axis] = len;
        let rg = self.any_grad(&[x]);
        Ok(self.push(Tensor::new(out_shape, out)?, Op::Narrow { x, axis, start }, rg))
    }

    /// `out.flat[i] = x.flat[index[i]]`, reshaped to `shape`.
    pub fn gather(&mut self, x: Var, index: Arc<[usize]>, shape: Vec<usize>) -> Result<Var> {
        let n = self.nodes[x.0].value.len();
        if shape.iter().product::<usize>() != index.len() {
            return Err(Error::dim(format!(
                "gather: {} indices for shape {shape:?}",
                index.len()
            )));
        }
        if let Some(bad) = index.iter().find(|&&i| i >= n) {
            return Err(Error::contract(format!("gather: index {bad} out of {n}")));
        }
        let src = self.data(x);
        let out = index.iter().map(|&i| src[i]).collect();
        let rg = self.any_grad(&[x]);
        Ok(self.push(Tensor::new(shape, out)?, Op::Gather { x, index }, rg))
    }

    pub fn reshape(&mut self, x: Var, shape: Vec<usize>) -> Result<Var> {
        let v = self.nodes[x.0].value.clone().reshape(shape)?;
        let rg = self.any_grad(&[x]);
        Ok(self.push(v, Op::Reshape(x), rg))
    }

    /// Reverse-mode accumulation of `d loss / d leaf` for every trainable leaf.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        let loss_value = &self.nodes[loss.0].value;
        if loss_value.len() != 1 {
            return Err(Error::contract(format!(
                "backward needs a scalar loss, got shape {:?}",
                loss_value.shape()
            )));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(vec![1.0]);

        for id in (0..=loss.0).rev() {
            let node = &self.nodes[id];
            if !node.requires_grad {
                grads[id] = None;
                continue;
            }
            if matches!(node.op, Op::Leaf) {
                continue;
            }
            let Some(g) = grads[id].take() else { continue };
            self.propagate(node, &g, &mut grads);
        }

        let grads = self
            .nodes
            .iter()
            .zip(grads)
            .map(|(node, g)| match node.op {
                Op::Leaf if node.requires_grad => {
                    let data = g.unwrap_or_else(|| vec![0.0; node.value.len()]);
                    Some(Tensor::new(node.value.shape().to_vec(), data).expect("leaf shape"))
                }
                _ => None,
            })
            .collect();
        Ok(Gradients { grads })
    }

    fn propagate(&self, node: &Node, g: &[f64], grads: &mut [Option<Vec<f64>>]) {
        let needs = |v: Var| self.nodes[v.0].requires_grad;
        let val = |v: Var| self.nodes[v.0].value.data();
        match &node.op {
            Op::Leaf => {}
            Op::Affine { w, x, b } => {
                let (q, p) = {
                    let s = self.shape(*w);
                    (s[0], s[1])
                };
                let k = g.len() / q.max(1);
                if needs(*w) {
                    let dw = slot(grads, *w, q * p);
                    gemm(q, k, p, g, k, 1, val(*x), 1, k, dw, true);
                }
                if needs(*x) {
                    let dx = slot(grads, *x, p * k);
                    gemm(p, q, k, val(*w), 1, p, g, k, 1, dx, true);
                }
                if let Some(b) = b.filter(|b| needs(*b)) {
                    let db = slot(grads, b, q);
                    for (d, row) in db.iter_mut().zip(g.chunks(k.max(1))) {
                        *d += row.iter().sum::<f64>();
                    }
                }
            }
            Op::MatMul { a, b } => {
                let (m, k) = {
                    let s = self.shape(*a);
                    (s[0], s[1])
                };
                let n = self.shape(*b)[1];
                if needs(*a) {
                    let da = slot(grads, *a, m * k);
                    gemm(m, n, k, g, n, 1, val(*b), 1, n, da, true);
                }
                if needs(*b) {
                    let db = slot(grads, *b, k * n);
                    gemm(k, m, n, val(*a), 1, k, g, n, 1, db, true);
                }
            }
            Op::Add(a, b) => {
                for v in [*a, *b] {
                    if needs(v) {
                        axpy(slot(grads, v, g.len()), g, 1.0);
                    }
                }
            }
            Op::Sub(a, b) => {
                if needs(*a) {
                    axpy(slot(grads, *a, g.len()), g, 1.0);
                }
                if needs(*b) {
                    axpy(slot(grads, *b, g.len()), g, -1.0);
                }
            }
            Op::Mul(a, b) => {
                if needs(*a) {
                    let other = val(*b);
                    let da = slot(grads, *a, g.len());
                    for ((d, gi), o) in da.iter_mut().zip(g).zip(other) {
                        *d += gi * o;
                    }
                }
                if needs(*b) {
                    let other = val(*a);
                    let db = slot(grads, *b, g.len());
                    for ((d, gi), o) in db.iter_mut().zip(g).zip(other) {
                        *d += gi * o;
                    }
                }
            }
            Op::Div(a, b) => {
                let den = val(*b);
                if needs(*a) {
                    let da = slot(grads, *a, g.len());
                    for ((d, gi), y) in da.iter_mut().zip(g).zip(den) {
                        *d += gi / y;
                    }
                }
                if needs(*b) {
                    let num = val(*a);
                    let db = slot(grads, *b, g.len());
                    for (((d, gi), x), y) in db.iter_mut().zip(g).zip(num).zip(den) {
                        *d -= gi * x / (y * y);
                    }
                }
            }
            Op::Scale(a, factor) => axpy(slot(grads, *a, g.len()), g, *factor),
            Op::AddScalar(a) => axpy(slot(grads, *a, g.len()), g, 1.0),
            Op::Relu(a) => {
                let x = val(*a);
                let da = slot(grads, *a, g.len());
                for ((d, gi), xi) in da.iter_mut().zip(g).zip(x) {
                    if *xi > 0.0 {
                        *d += gi;
                    }
                }
            }
            Op::Cos(a) => {
                let x = val(*a);
                let da = slot(grads, *a, g.len());
                for ((d, gi), xi) in da.iter_mut().zip(g).zip(x) {
                    *d -= gi * xi.sin();
                }
            }
            Op::Sin(a) => {
                let x = val(*a);
                let da = slot(grads, *a, g.len());
                for ((d, gi), xi) in da.iter_mut().zip(g).zip(x) {
                    *d += gi * xi.cos();
                }
            }
            Op::Ln1p(a) => {
                let x = val(*a);
                let da = slot(grads, *a, g.len());
                for ((d, gi), xi) in da.iter_mut().zip(g).zip(x) {
                    *d += gi / (1.0 + xi);
                }
            }
            Op::Reduce { x, axis, mode } => {
                let shape = self.shape(*x);
                let (outer, len, inner) = Tensor::split_axis(shape, *axis);
                let scale = match mode {
                    ReduceMode::Sum => 1.0,
                    ReduceMode::Mean => 1.0 / len.max(1) as f64,
                };
                let dx = slot(grads, *x, outer * len * inner);
                for o in 0..outer {
                    let src = &g[o * inner..(o + 1) * inner];
                    for l in 0..len {
                        let dst = &mut dx[(o * len + l) * inner..(o * len + l + 1) * inner];
                        dst.iter_mut().zip(src).for_each(|(d, s)| *d += s * scale);
                    }
                }
            }
            Op::Expand { x, axis } => {
                let out_shape = node.value.shape();
                let len = out_shape[*axis];
                let outer: usize = out_shape[..*axis].iter().product();
                let inner: usize = out_shape[*axis + 1..].iter().product();
                let dx = slot(grads, *x, outer * inner);
                for o in 0..outer {
                    let dst = &mut dx[o * inner..(o + 1) * inner];
                    for l in 0..len {
                        let src = &g[(o * len + l) * inner..(o * len + l + 1) * inner];
                        dst.iter_mut().zip(src).for_each(|(d, s)| *d += s);
                    }
                }
            }
            Op::ExclusiveMean { x, axis } => {
                let contrib = exclusive_mean_kernel(g, node.value.shape(), *axis);
                axpy(slot(grads, *x, g.len()), &contrib, 1.0);
            }
            Op::ClassAggregate { x, block } => {
                let shape = self.nodes[x.0].value.shape().to_vec();
                class_aggregate_kernel(g, &shape, *block, slot(grads, *x, g.len()));
            }
            Op::Concat { parts, axis } => {
                let out_shape = node.value.shape();
                let (outer, total, inner) = Tensor::split_axis(out_shape, *axis);
                let mut offset = 0;
                for &p in parts {
                    let len = self.shape(p)[*axis];
                    if needs(p) {
                        let dp = slot(grads, p, outer * len * inner);
                        for o in 0..outer {
                            let from = (o * total + offset) * inner;
                            let src = &g[from..from + len * inner];
                            let dst = &mut dp[o * len * inner..(o + 1) * len * inner];
                            dst.iter_mut().zip(src).for_each(|(d, s)| *d += s);
                        }
                    }
                    offset += len;
                }
            }
            Op::Narrow { x, axis, start } => {
                let in_shape = self.shape(*x);
                let (outer, full, inner) = Tensor::split_axis(in_shape, *axis);
                let len = node.value.shape()[*axis];
                let dx = slot(grads, *x, outer * full * inner);
                for o in 0..outer {
                    let to = (o * full + start) * inner;
                    let src = &g[o * len * inner..(o + 1) * len * inner];
                    let dst = &mut dx[to..to + len * inner];
                    dst.iter_mut().zip(src).for_each(|(d, s)| *d += s);
                }
            }
            Op::Gather { x, index } => {
                let n = self.nodes[x.0].value.len();
                let dx = slot(grads, *x, n);
                for (&i, gi) in index.iter().zip(g) {
                    dx[i] += gi;
                }
            }
            Op::Reshape(x) => axpy(slot(grads, *x, g.len()), g, 1.0),
        }
    }
}

fn slot(grads: &mut [Option<Vec<f64>>], var: Var, len: usize) -> &mut [f64] {
    grads[var.0].get_or_insert_with(|| vec![0.0; len])
}

fn axpy(dst: &mut [f64], src: &[f64], alpha: f64) {
    dst.iter_mut().zip(src).for_each(|(d, s)| *d += alpha * s);
}

/// Accumulates the class pooling of `src` into `dst`. The map is
/// self-adjoint, so the same kernel propagates gradients.
fn class_aggregate_kernel(src: &[f64], shape: &[usize], block: usize, dst: &mut [f64]) {
    let (users, n) = (shape[1], shape[2]);
    let inv_n = 1.0 / n as f64;
    let inv_others = 1.0 / (users as f64 - 1.0);
    let mut sums = vec![0.0; n];
    let mut means = vec![0.0; users];
    for class in 0..4 {
        for r in class * block..(class + 1) * block {
            let base = r * users * n;
            let rows = &src[base..base + users * n];
            let out = &mut dst[base..base + users * n];
            match class {
                0 => out.iter_mut().zip(rows).for_each(|(d, s)| *d += s),
                1 => {
                    for (o, x) in out.chunks_mut(n).zip(rows.chunks(n)) {
                        let m = x.iter().sum::<f64>() * inv_n;
                        o.iter_mut().for_each(|d| *d += m);
                    }
                }
                2 => {
                    sums.fill(0.0);
                    for x in rows.chunks(n) {
                        sums.iter_mut().zip(x).for_each(|(s, v)| *s += v);
                    }
                    for (o, x) in out.chunks_mut(n).zip(rows.chunks(n)) {
                        for ((d, s), v) in o.iter_mut().zip(&sums).zip(x) {
                            *d += (s - v) * inv_others;
                        }
                    }
                }
                _ => {
                    for (m, x) in means.iter_mut().zip(rows.chunks(n)) {
                        *m = x.iter().sum::<f64>() * inv_n;
                    }
                    let total: f64 = means.iter().sum();
                    for (o, m) in out.chunks_mut(n).zip(&means) {
                        let v = (total - m) * inv_others;
                        o.iter_mut().for_each(|d| *d += v);
                    }
                }
            }
        }
    }
}

fn exclusive_mean_kernel(src: &[f64], shape: &[usize], axis: usize) -> Vec<f64> {
    let (outer, len, inner) = Tensor::split_axis(shape, axis);
    let inv = 1.0 / (len as f64 - 1.0);
    let mut out = vec![0.0; src.len()];
    let mut sums = vec![0.0; inner];
    for o in 0..outer {
        sums.fill(0.0);
        for l in 0..len {
            let row = &src[(o * len + l) * inner..(o * len + l + 1) * inner];
            sums.iter_mut().zip(row).for_each(|(s, v)| *s += v);
        }
        for l in 0..len {
            let base = (o * len + l) * inner;
            for i in 0..inner {
                out[base + i] = (sums[i] - src[base + i]) * inv;
            }
        }
    }
    out
}
