//! Reverse-mode tape over dense matrices.
//!
//! Every operation appends a node holding its forward value and the handles
//! of its operands. Nodes are only ever appended, so parents always precede
//! children and [`Tape::backward`] is a single reverse sweep.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::{ParamId, SparseMatrix, Tensor};
use crate::error::{Error, Result};

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Reduction axis. `Rows` collapses the row dimension (result is `1 x cols`),
/// `Cols` collapses the column dimension (result is `rows x 1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    All,
    Rows,
    Cols,
}

impl Axis {
    /// Numeric axis as in array libraries: 0 collapses rows, 1 collapses columns.
    pub fn from_index(axis: usize) -> Result<Self> {
        match axis {
            0 => Ok(Axis::Rows),
            1 => Ok(Axis::Cols),
            other => Err(Error::InvalidAxis(other)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Unary {
    Sigmoid,
    Tanh,
    Softplus,
    Exp,
    Log,
    Relu,
    Square,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Binary {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reduce {
    Sum,
    Mean,
}

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    MatMulNT(Var, Var),
    SpMM(Arc<SparseMatrix>, Var),
    Binary(Binary, Var, Var),
    AddRow(Var, Var),
    Scale(Var, f64),
    Offset(Var),
    Unary(Unary, Var),
    Reduce(Reduce, Axis, Var),
    ConcatCols(Vec<Var>),
    GatherRows(Var, Vec<usize>),
    ScatterRows { base: Var, src: Var, idx: Vec<usize> },
    FillRows(Var, Vec<usize>),
    BceWithLogits { logits: Var, targets: Tensor, weights: Tensor },
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
    param: Option<ParamId>,
}

/// Gradients produced by one backward sweep.
#[derive(Clone, Debug, Default)]
pub struct Gradients {
    leaves: BTreeMap<Var, Tensor>,
    params: BTreeMap<ParamId, Tensor>,
}

impl Gradients {
    /// Gradient with respect to a leaf created with `requires_grad`.
    pub fn wrt(&self, v: Var) -> Option<&Tensor> {
        self.leaves.get(&v)
    }

    pub fn param(&self, id: ParamId) -> Option<&Tensor> {
        self.params.get(&id)
    }

    pub fn params(&self) -> impl Iterator<Item = (ParamId, &Tensor)> {
        self.params.iter().map(|(&k, v)| (k, v))
    }
}

#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    consumed: bool,
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x + (-x).exp()
    } else if x < -30.0 {
        x.exp()
    } else {
        x.max(0.0) + (-x.abs()).exp().ln_1p()
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> (usize, usize) {
        self.nodes[v.0].value.shape()
    }

    /// Value of a 1x1 node.
    pub fn item(&self, v: Var) -> f64 {
        self.nodes[v.0].value.item()
    }

    fn push(&mut self, value: Tensor, op: Op, parents: &[Var]) -> Var {
        let requires_grad = parents.iter().any(|p| self.nodes[p.0].requires_grad);
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
            param: None,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn constant(&mut self, value: Tensor) -> Var {
        self.leaf(value, false)
    }

    pub fn leaf(&mut self, value: Tensor, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op: Op::Leaf,
            requires_grad,
            param: None,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn param(&mut self, id: ParamId, value: Tensor) -> Var {
        self.nodes.push(Node {
            value,
            op: Op::Leaf,
            requires_grad: true,
            param: Some(id),
        });
        Var(self.nodes.len() - 1)
    }

    fn mismatch(&self, op: &'static str, a: Var, b: Var) -> Error {
        Error::ShapeMismatch {
            op,
            lhs: self.shape(a),
            rhs: self.shape(b),
        }
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).matmul(self.value(b))?;
        Ok(self.push(value, Op::MatMul(a, b), &[a, b]))
    }

    /// `a · bᵀ`.
    pub fn matmul_nt(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).matmul_nt(self.value(b))?;
        Ok(self.push(value, Op::MatMulNT(a, b), &[a, b]))
    }

    /// Sparse (non-learnable) times dense.
    pub fn spmm(&mut self, s: &Arc<SparseMatrix>, d: Var) -> Result<Var> {
        let value = s.spmm(self.value(d))?;
        Ok(self.push(value, Op::SpMM(Arc::clone(s), d), &[d]))
    }

    /// Pointwise binary op. `Add` also accepts a `1 x cols` right operand,
    /// broadcast over rows.
    pub fn binary(&mut self, op: Binary, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if op == Binary::Add && sb.0 == 1 && sa.0 != 1 && sa.1 == sb.1 {
            return self.add_row(a, b);
        }
        if sa != sb {
            return Err(self.mismatch("elementwise", a, b));
        }
        let (va, vb) = (self.value(a), self.value(b));
        let value = match op {
            Binary::Add => va.zip_map(vb, |x, y| x + y),
            Binary::Sub => va.zip_map(vb, |x, y| x - y),
            Binary::Mul => va.zip_map(vb, |x, y| x * y),
            Binary::Div => {
                if let Some(&z) = vb.data().iter().find(|&&y| y == 0.0) {
                    return Err(Error::Domain { op: "div", value: z });
                }
                va.zip_map(vb, |x, y| x / y)
            }
        };
        Ok(self.push(value, Op::Binary(op, a, b), &[a, b]))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(Binary::Add, a, b)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(Binary::Sub, a, b)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(Binary::Mul, a, b)
    }

    pub fn div(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(Binary::Div, a, b)
    }

    /// `a + 1·bias` where `bias` is a `1 x cols` row vector.
    pub fn add_row(&mut self, a: Var, bias: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a), self.shape(bias));
        if sb.0 != 1 || sa.1 != sb.1 {
            return Err(self.mismatch("add_row", a, bias));
        }
        let mut value = self.value(a).clone();
        let b = self.value(bias).data().to_vec();
        for r in 0..sa.0 {
            for (x, &y) in value.row_mut(r).iter_mut().zip(&b) {
                *x += y;
            }
        }
        Ok(self.push(value, Op::AddRow(a, bias), &[a, bias]))
    }

    pub fn scale(&mut self, a: Var, k: f64) -> Var {
        let value = self.value(a).map(|x| x * k);
        self.push(value, Op::Scale(a, k), &[a])
    }

    pub fn add_scalar(&mut self, a: Var, k: f64) -> Var {
        let value = self.value(a).map(|x| x + k);
        self.push(value, Op::Offset(a), &[a])
    }

    pub fn unary(&mut self, op: Unary, a: Var) -> Result<Var> {
        let va = self.value(a);
        let value = match op {
            Unary::Sigmoid => va.map(sigmoid),
            Unary::Tanh => va.map(f64::tanh),
            Unary::Softplus => va.map(softplus),
            Unary::Exp => va.map(f64::exp),
            Unary::Log => {
                if let Some(&bad) = va.data().iter().find(|&&x| x <= 0.0 || x.is_nan()) {
                    return Err(Error::Domain { op: "log", value: bad });
                }
                va.map(f64::ln)
            }
            Unary::Relu => va.map(|x| x.max(0.0)),
            Unary::Square => va.map(|x| x * x),
        };
        Ok(self.push(value, Op::Unary(op, a), &[a]))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        self.unary(Unary::Sigmoid, a).expect("infallible")
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        self.unary(Unary::Tanh, a).expect("infallible")
    }

    pub fn softplus(&mut self, a: Var) -> Var {
        self.unary(Unary::Softplus, a).expect("infallible")
    }

    pub fn exp(&mut self, a: Var) -> Var {
        self.unary(Unary::Exp, a).expect("infallible")
    }

    pub fn relu(&mut self, a: Var) -> Var {
        self.unary(Unary::Relu, a).expect("infallible")
    }

    pub fn square(&mut self, a: Var) -> Var {
        self.unary(Unary::Square, a).expect("infallible")
    }

    pub fn log(&mut self, a: Var) -> Result<Var> {
        self.unary(Unary::Log, a)
    }

    pub fn reduce(&mut self, op: Reduce, axis: Axis, a: Var) -> Var {
        let va = self.value(a);
        let (r, c) = va.shape();
        let mut value = match axis {
            Axis::All => Tensor::scalar(va.sum()),
            Axis::Rows => {
                let mut out = Tensor::zeros(1, c);
                for i in 0..r {
                    for (o, &x) in out.data_mut().iter_mut().zip(va.row(i)) {
                        *o += x;
                    }
                }
                out
            }
            Axis::Cols => {
                let mut out = Tensor::zeros(r, 1);
                for i in 0..r {
                    out.data_mut()[i] = va.row(i).iter().fold(0.0, |acc, &x| acc + x);
                }
                out
            }
        };
        if op == Reduce::Mean {
            let n = reduce_count(axis, r, c) as f64;
            value = value.map(|x| x / n);
        }
        self.push(value, Op::Reduce(op, axis, a), &[a])
    }

    pub fn sum(&mut self, a: Var) -> Var {
        self.reduce(Reduce::Sum, Axis::All, a)
    }

    pub fn mean(&mut self, a: Var) -> Var {
        self.reduce(Reduce::Mean, Axis::All, a)
    }

    /// Horizontal concatenation of tensors with equal row counts.
    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let rows = self.shape(parts[0]).0;
        for &p in parts {
            if self.shape(p).0 != rows {
                return Err(self.mismatch("concat_cols", parts[0], p));
            }
        }
        let cols: usize = parts.iter().map(|&p| self.shape(p).1).sum();
        let mut value = Tensor::zeros(rows, cols);
        for r in 0..rows {
            let mut offset = 0;
            for &p in parts {
                let src = self.value(p).row(r);
                value.row_mut(r)[offset..offset + src.len()].copy_from_slice(src);
                offset += src.len();
            }
        }
        Ok(self.push(value, Op::ConcatCols(parts.to_vec()), parts))
    }

    /// Selects rows `idx` (duplicates allowed).
    pub fn gather_rows(&mut self, a: Var, idx: &[usize]) -> Result<Var> {
        let va = self.value(a);
        let (r, c) = va.shape();
        if let Some(&bad) = idx.iter().find(|&&i| i >= r) {
            return Err(Error::ShapeMismatch {
                op: "gather_rows",
                lhs: (r, c),
                rhs: (bad, c),
            });
        }
        let mut value = Tensor::zeros(idx.len(), c);
        for (o, &i) in idx.iter().enumerate() {
            value.row_mut(o).copy_from_slice(va.row(i));
        }
        Ok(self.push(value, Op::GatherRows(a, idx.to_vec()), &[a]))
    }

    /// Copy of `base` with row `idx[k]` replaced by row `k` of `src`.
    /// `idx` must not repeat.
    pub fn scatter_rows(&mut self, base: Var, src: Var, idx: &[usize]) -> Result<Var> {
        let (sb, ss) = (self.shape(base), self.shape(src));
        if sb.1 != ss.1 || ss.0 != idx.len() || idx.iter().any(|&i| i >= sb.0) {
            return Err(self.mismatch("scatter_rows", base, src));
        }
        let mut value = self.value(base).clone();
        for (k, &i) in idx.iter().enumerate() {
            let row = self.value(src).row(k).to_vec();
            value.row_mut(i).copy_from_slice(&row);
        }
        Ok(self.push(
            value,
            Op::ScatterRows {
                base,
                src,
                idx: idx.to_vec(),
            },
            &[base, src],
        ))
    }

    /// Copy of `a` with the listed rows overwritten by `fill`. No gradient
    /// flows through overwritten rows.
    pub fn fill_rows(&mut self, a: Var, rows: &[usize], fill: f64) -> Var {
        let mut value = self.value(a).clone();
        for &r in rows {
            value.row_mut(r).iter_mut().for_each(|x| *x = fill);
        }
        self.push(value, Op::FillRows(a, rows.to_vec()), &[a])
    }

    /// `Σ w·[max(x,0) − x·y + ln(1 + e^(−|x|))]`: weighted binary
    /// cross-entropy on logits, summed left to right.
    pub fn bce_with_logits(&mut self, logits: Var, targets: Tensor, weights: Tensor) -> Result<Var> {
        let vl = self.value(logits);
        if vl.shape() != targets.shape() || vl.shape() != weights.shape() {
            return Err(Error::ShapeMismatch {
                op: "bce_with_logits",
                lhs: vl.shape(),
                rhs: targets.shape(),
            });
        }
        let total = vl
            .data()
            .iter()
            .zip(targets.data())
            .zip(weights.data())
            .fold(0.0, |acc, ((&x, &y), &w)| {
                acc + w * (x.max(0.0) - x * y + (-x.abs()).exp().ln_1p())
            });
        Ok(self.push(
            Tensor::scalar(total),
            Op::BceWithLogits {
                logits,
                targets,
                weights,
            },
            &[logits],
        ))
    }

    /// Back-propagates from a scalar `loss`. A tape supports exactly one
    /// backward sweep; a second call returns [`Error::TapeConsumed`].
    pub fn backward(&mut self, loss: Var) -> Result<Gradients> {
        if self.consumed {
            return Err(Error::TapeConsumed);
        }
        if self.nodes.is_empty() {
            return Err(Error::EmptyTape);
        }
        let shape = self.shape(loss);
        if shape != (1, 1) {
            return Err(Error::NonScalarLoss(shape));
        }
        self.consumed = true;

        let mut grads: Vec<Option<Tensor>> = (0..=loss.0).map(|_| None).collect();
        grads[loss.0] = Some(Tensor::scalar(1.0));
        let mut out = Gradients::default();

        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            let node = &self.nodes[i];
            if !node.requires_grad {
                continue;
            }
            if let Op::Leaf = node.op {
                if let Some(pid) = node.param {
                    out.params
                        .entry(pid)
                        .and_modify(|acc| acc.add_assign(&g))
                        .or_insert_with(|| g.clone());
                }
                out.leaves.insert(Var(i), g);
                continue;
            }
            for (parent, pg) in self.local_grads(i, &g)? {
                if !self.nodes[parent.0].requires_grad {
                    continue;
                }
                match &mut grads[parent.0] {
                    Some(acc) => acc.add_assign(&pg),
                    slot @ None => *slot = Some(pg),
                }
            }
        }
        Ok(out)
    }

    fn local_grads(&self, i: usize, g: &Tensor) -> Result<Vec<(Var, Tensor)>> {
        let node = &self.nodes[i];
        let out = &node.value;
        let v = |x: Var| &self.nodes[x.0].value;
        let wants = |x: Var| self.nodes[x.0].requires_grad;
        let mut res = Vec::with_capacity(2);
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                if wants(*a) {
                    res.push((*a, g.matmul_nt(v(*b))?));
                }
                if wants(*b) {
                    res.push((*b, v(*a).matmul_tn(g)?));
                }
            }
            Op::MatMulNT(a, b) => {
                // out = A·Bᵀ: dA = G·B, dB = Gᵀ·A
                if wants(*a) {
                    res.push((*a, g.matmul(v(*b))?));
                }
                if wants(*b) {
                    res.push((*b, g.matmul_tn(v(*a))?));
                }
            }
            Op::SpMM(s, d) => res.push((*d, s.spmm_t(g)?)),
            Op::Binary(op, a, b) => {
                let (va, vb) = (v(*a), v(*b));
                match op {
                    Binary::Add => {
                        res.push((*a, g.clone()));
                        res.push((*b, g.clone()));
                    }
                    Binary::Sub => {
                        res.push((*a, g.clone()));
                        res.push((*b, g.map(|x| -x)));
                    }
                    Binary::Mul => {
                        res.push((*a, g.zip_map(vb, |x, y| x * y)));
                        res.push((*b, g.zip_map(va, |x, y| x * y)));
                    }
                    Binary::Div => {
                        res.push((*a, g.zip_map(vb, |x, y| x / y)));
                        let t = g.zip_map(out, |x, q| x * q);
                        res.push((*b, t.zip_map(vb, |x, y| -x / y)));
                    }
                }
            }
            Op::AddRow(a, bias) => {
                res.push((*a, g.clone()));
                let mut gb = Tensor::zeros(1, g.cols());
                for r in 0..g.rows() {
                    for (o, &x) in gb.data_mut().iter_mut().zip(g.row(r)) {
                        *o += x;
                    }
                }
                res.push((*bias, gb));
            }
            Op::Scale(a, k) => res.push((*a, g.map(|x| x * k))),
            Op::Offset(a) => res.push((*a, g.clone())),
            Op::Unary(op, a) => {
                let va = v(*a);
                let local = match op {
                    Unary::Sigmoid => out.map(|s| s * (1.0 - s)),
                    Unary::Tanh => out.map(|t| 1.0 - t * t),
                    Unary::Softplus => va.map(sigmoid),
                    Unary::Exp => out.clone(),
                    Unary::Log => va.map(|x| 1.0 / x),
                    Unary::Relu => va.map(|x| if x > 0.0 { 1.0 } else { 0.0 }),
                    Unary::Square => va.map(|x| 2.0 * x),
                };
                res.push((*a, g.zip_map(&local, |x, y| x * y)));
            }
            Op::Reduce(op, axis, a) => {
                let (r, c) = v(*a).shape();
                let scale = match op {
                    Reduce::Sum => 1.0,
                    Reduce::Mean => 1.0 / reduce_count(*axis, r, c) as f64,
                };
                let mut ga = Tensor::zeros(r, c);
                for i in 0..r {
                    for j in 0..c {
                        let gv = match axis {
                            Axis::All => g.item(),
                            Axis::Rows => g.get(0, j),
                            Axis::Cols => g.get(i, 0),
                        };
                        ga.set(i, j, gv * scale);
                    }
                }
                res.push((*a, ga));
            }
            Op::ConcatCols(parts) => {
                let mut offset = 0;
                for &p in parts {
                    let (r, c) = v(p).shape();
                    let mut gp = Tensor::zeros(r, c);
                    for i in 0..r {
                        gp.row_mut(i).copy_from_slice(&g.row(i)[offset..offset + c]);
                    }
                    offset += c;
                    res.push((p, gp));
                }
            }
            Op::GatherRows(a, idx) => {
                let mut ga = Tensor::zeros(v(*a).rows(), g.cols());
                for (k, &i) in idx.iter().enumerate() {
                    for (o, &x) in ga.row_mut(i).iter_mut().zip(g.row(k)) {
                        *o += x;
                    }
                }
                res.push((*a, ga));
            }
            Op::ScatterRows { base, src, idx } => {
                let mut gbase = g.clone();
                let mut gsrc = Tensor::zeros(idx.len(), g.cols());
                for (k, &i) in idx.iter().enumerate() {
                    gsrc.row_mut(k).copy_from_slice(g.row(i));
                    gbase.row_mut(i).iter_mut().for_each(|x| *x = 0.0);
                }
                res.push((*base, gbase));
                res.push((*src, gsrc));
            }
            Op::FillRows(a, rows) => {
                let mut ga = g.clone();
                for &r in rows {
                    ga.row_mut(r).iter_mut().for_each(|x| *x = 0.0);
                }
                res.push((*a, ga));
            }
            Op::BceWithLogits {
                logits,
                targets,
                weights,
            } => {
                let gs = g.item();
                let vl = v(*logits);
                let data = vl
                    .data()
                    .iter()
                    .zip(targets.data())
                    .zip(weights.data())
                    .map(|((&x, &y), &w)| gs * w * (sigmoid(x) - y))
                    .collect();
                res.push((*logits, Tensor::from_vec(vl.rows(), vl.cols(), data)?));
            }
        }
        Ok(res)
    }
}

fn reduce_count(axis: Axis, r: usize, c: usize) -> usize {
    match axis {
        Axis::All => r * c,
        Axis::Rows => r,
        Axis::Cols => c,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_and_softplus_reference_points() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!((softplus(0.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(-800.0).is_finite());
        assert_eq!(sigmoid(800.0), 1.0);
        assert!(softplus(800.0).is_finite() && softplus(-800.0) >= 0.0);
    }

    #[test]
    fn mean_over_cols() {
        let mut t = Tape::new();
        let a = t.constant(Tensor::from_rows(&[[1.0, 3.0]]));
        let m = t.reduce(Reduce::Mean, Axis::Cols, a);
        assert_eq!(t.value(m), &Tensor::from_rows(&[[2.0]]));
    }

    #[test]
    fn sum_of_zeros_is_zero() {
        let mut t = Tape::new();
        let a = t.constant(Tensor::zeros(3, 4));
        let s = t.sum(a);
        assert_eq!(t.item(s), 0.0);
    }

    #[test]
    fn invalid_axis_rejected() {
        assert!(matches!(Axis::from_index(2), Err(Error::InvalidAxis(2))));
        assert_eq!(Axis::from_index(1).unwrap(), Axis::Cols);
    }

    #[test]
    fn mean_gradient_is_one_over_n() {
        let mut t = Tape::new();
        let a = t.leaf(Tensor::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]), true);
        let m = t.mean(a);
        let g = t.backward(m).unwrap();
        assert!(g.wrt(a).unwrap().data().iter().all(|&x| x == 1.0 / 6.0));
    }

    #[test]
    fn sum_gradient_is_all_ones() {
        let mut t = Tape::new();
        let w = t.leaf(Tensor::full(2, 3, 0.7), true);
        let s = t.sum(w);
        let g = t.backward(s).unwrap();
        assert_eq!(g.wrt(w).unwrap(), &Tensor::ones(2, 3));
    }

    #[test]
    fn log_domain_error() {
        let mut t = Tape::new();
        let a = t.constant(Tensor::from_rows(&[[1.0, 0.0]]));
        assert!(matches!(t.log(a), Err(Error::Domain { .. })));
    }

    #[test]
    fn non_scalar_loss_rejected() {
        let mut t = Tape::new();
        let a = t.leaf(Tensor::ones(2, 2), true);
        assert!(matches!(t.backward(a), Err(Error::NonScalarLoss((2, 2)))));
    }

    #[test]
    fn second_backward_is_an_error() {
        let mut t = Tape::new();
        let a = t.leaf(Tensor::ones(2, 2), true);
        let s = t.sum(a);
        t.backward(s).unwrap();
        assert!(matches!(t.backward(s), Err(Error::TapeConsumed)));
    }

    #[test]
    fn elementwise_shape_mismatch() {
        let mut t = Tape::new();
        let a = t.constant(Tensor::ones(2, 2));
        let b = t.constant(Tensor::ones(3, 2));
        assert!(t.mul(a, b).is_err());
        // row-vector broadcast only applies to addition
        let r = t.constant(Tensor::ones(1, 2));
        assert!(t.add(a, r).is_ok());
        assert!(t.mul(a, r).is_err());
    }

    #[test]
    fn scatter_then_gather_roundtrip() {
        let mut t = Tape::new();
        let base = t.constant(Tensor::zeros(4, 2));
        let src = t.constant(Tensor::from_rows(&[[1.0, 2.0], [3.0, 4.0]]));
        let s = t.scatter_rows(base, src, &[3, 1]).unwrap();
        let g = t.gather_rows(s, &[3, 1]).unwrap();
        assert_eq!(t.value(g), t.value(src));
        assert_eq!(t.value(s).row(0), &[0.0, 0.0]);
    }
}
