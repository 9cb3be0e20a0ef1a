//! Minimal reverse-mode differentiation over dense tensors.
//!
//! A [`Tape`] records every operation as a node holding its value and the
//! indices of its parents. [`Tape::backward`] walks the nodes in reverse
//! order and accumulates adjoints for every node that (transitively) depends
//! on a leaf created with `requires_grad = true`.
//!
//! The primitive set is deliberately small: it covers dense layers,
//! Cayley-parameterized weights (through a factorized linear solve), gains
//! and the training objectives in [`crate::training`].

use crate::error::{dim_err, Error, Result};
use crate::layers::Activation;
use crate::linalg::{Lu, Tensor};
use crate::Scalar;

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug)]
enum Op<T> {
    Leaf,
    MatMul(Var, Var),
    Transpose(Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, T),
    AddRow(Var, Var),
    MulRow(Var, Var),
    MulScalar(Var, Var),
    Activate(Var, Activation),
    Exp(Var),
    Recip(Var),
    Square(Var),
    Sum(Var),
    MaxConst(Var, T),
    Solve { a: Var, b: Var, lu: Lu<T> },
    HConcat(Var, Var),
    SliceCols(Var, usize),
    SliceRows(Var, usize),
    SliceFlat(Var, usize),
}

struct Node<T> {
    value: Tensor<T>,
    op: Op<T>,
    requires_grad: bool,
}

/// Wengert list of tensor operations.
pub struct Tape<T> {
    nodes: Vec<Node<T>>,
}

impl<T: Scalar> Default for Tape<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Adjoints produced by [`Tape::backward`].
pub struct Gradients<T> {
    grads: Vec<Option<Tensor<T>>>,
    shapes: Vec<Vec<usize>>,
}

impl<T: Scalar> Gradients<T> {
    pub fn get(&self, v: Var) -> Option<&Tensor<T>> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }

    /// Adjoint of `v`, or zeros of the right shape when nothing flowed into it.
    pub fn wrt(&self, v: Var) -> Tensor<T> {
        match self.get(v) {
            Some(g) => g.clone(),
            None => {
                let shape = self.shapes[v.0].clone();
                let len = shape.iter().product();
                Tensor::from_parts(shape, vec![T::zero(); len])
            }
        }
    }
}

fn check_same<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>, what: &str) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(dim_err(format!("{what}: {:?} vs {:?}", a.shape(), b.shape())));
    }
    Ok(())
}

impl<T: Scalar> Tape<T> {
    pub fn new() -> Self {
        Self { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn leaf(&mut self, value: Tensor<T>, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op: Op::Leaf,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    /// Trainable leaf.
    pub fn param(&mut self, value: Tensor<T>) -> Var {
        self.leaf(value, true)
    }

    pub fn constant(&mut self, value: Tensor<T>) -> Var {
        self.leaf(value, false)
    }

    pub fn scalar(&mut self, v: T) -> Var {
        self.constant(Tensor::scalar(v))
    }

    pub fn value(&self, v: Var) -> &Tensor<T> {
        &self.nodes[v.0].value
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    fn push(&mut self, value: Tensor<T>, op: Op<T>, parents: &[Var]) -> Var {
        let requires_grad = parents.iter().any(|p| self.nodes[p.0].requires_grad);
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (va, vb) = (self.value(a), self.value(b));
        if !va.is_matrix() || !vb.is_matrix() || va.cols() != vb.rows() {
            return Err(dim_err(format!("matmul {:?} · {:?}", va.shape(), vb.shape())));
        }
        let out = va.matmul_unchecked(vb);
        Ok(self.push(out, Op::MatMul(a, b), &[a, b]))
    }

    pub fn transpose(&mut self, a: Var) -> Var {
        let out = self.value(a).transpose();
        self.push(out, Op::Transpose(a), &[a])
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        check_same(self.value(a), self.value(b), "add")?;
        let out = self.value(a).zip_map_unchecked(self.value(b), |x, y| x + y);
        Ok(self.push(out, Op::Add(a, b), &[a, b]))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        check_same(self.value(a), self.value(b), "sub")?;
        let out = self.value(a).zip_map_unchecked(self.value(b), |x, y| x - y);
        Ok(self.push(out, Op::Sub(a, b), &[a, b]))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        check_same(self.value(a), self.value(b), "mul")?;
        let out = self.value(a).zip_map_unchecked(self.value(b), |x, y| x * y);
        Ok(self.push(out, Op::Mul(a, b), &[a, b]))
    }

    pub fn scale(&mut self, a: Var, s: T) -> Var {
        let out = self.value(a).scale(s);
        self.push(out, Op::Scale(a, s), &[a])
    }

    /// `A + 1·rᵀ`: add a `1×d` row to every row of an `N×d` matrix.
    pub fn add_row(&mut self, a: Var, row: Var) -> Result<Var> {
        let (va, vr) = (self.value(a), self.value(row));
        if vr.rows() != 1 || vr.cols() != va.cols() {
            return Err(dim_err(format!("add_row {:?} + {:?}", va.shape(), vr.shape())));
        }
        let mut out = va.clone();
        let c = va.cols();
        for chunk in out.data_mut().chunks_mut(c) {
            for (o, &r) in chunk.iter_mut().zip(vr.data()) {
                *o += r;
            }
        }
        Ok(self.push(out, Op::AddRow(a, row), &[a, row]))
    }

    /// Scale column `j` of an `N×d` matrix by `r[j]`.
    pub fn mul_row(&mut self, a: Var, row: Var) -> Result<Var> {
        let (va, vr) = (self.value(a), self.value(row));
        if vr.rows() != 1 || vr.cols() != va.cols() {
            return Err(dim_err(format!("mul_row {:?} ⊙ {:?}", va.shape(), vr.shape())));
        }
        let mut out = va.clone();
        let c = va.cols();
        for chunk in out.data_mut().chunks_mut(c) {
            for (o, &r) in chunk.iter_mut().zip(vr.data()) {
                *o *= r;
            }
        }
        Ok(self.push(out, Op::MulRow(a, row), &[a, row]))
    }

    /// Multiply a tensor by a `1×1` node.
    pub fn mul_scalar(&mut self, a: Var, s: Var) -> Result<Var> {
        if self.value(s).len() != 1 {
            return Err(dim_err("mul_scalar needs a 1×1 factor"));
        }
        let k = self.value(s).item();
        let out = self.value(a).scale(k);
        Ok(self.push(out, Op::MulScalar(a, s), &[a, s]))
    }

    pub fn activate(&mut self, a: Var, act: Activation) -> Var {
        let out = self.value(a).map(|x| act.apply(x));
        self.push(out, Op::Activate(a, act), &[a])
    }

    pub fn exp(&mut self, a: Var) -> Var {
        let out = self.value(a).map(T::exp);
        self.push(out, Op::Exp(a), &[a])
    }

    pub fn recip(&mut self, a: Var) -> Var {
        let out = self.value(a).map(T::recip);
        self.push(out, Op::Recip(a), &[a])
    }

    pub fn square(&mut self, a: Var) -> Var {
        let out = self.value(a).map(|x| x * x);
        self.push(out, Op::Square(a), &[a])
    }

    /// Sum of all entries as a `1×1` node.
    pub fn sum(&mut self, a: Var) -> Var {
        let out = Tensor::scalar(self.value(a).sum());
        self.push(out, Op::Sum(a), &[a])
    }

    /// Elementwise `max(a, c)`; ties send the adjoint to `a`.
    pub fn max_const(&mut self, a: Var, c: T) -> Var {
        let out = self.value(a).map(|x| x.max(c));
        self.push(out, Op::MaxConst(a, c), &[a])
    }

    /// `A⁻¹·B` through a pivoted LU factorization of `A`.
    pub fn solve(&mut self, a: Var, b: Var) -> Result<Var> {
        let lu = Lu::factor(self.value(a))?;
        let out = lu.solve(self.value(b))?;
        Ok(self.push(out, Op::Solve { a, b, lu }, &[a, b]))
    }

    pub fn hconcat(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.value(a).hconcat(self.value(b))?;
        Ok(self.push(out, Op::HConcat(a, b), &[a, b]))
    }

    pub fn slice_cols(&mut self, a: Var, start: usize, len: usize) -> Result<Var> {
        if start + len > self.value(a).cols() {
            return Err(dim_err("slice_cols out of range"));
        }
        let out = self.value(a).slice_cols(start, len);
        Ok(self.push(out, Op::SliceCols(a, start), &[a]))
    }

    pub fn slice_rows(&mut self, a: Var, start: usize, len: usize) -> Result<Var> {
        if start + len > self.value(a).rows() {
            return Err(dim_err("slice_rows out of range"));
        }
        let out = self.value(a).slice_rows(start, len);
        Ok(self.push(out, Op::SliceRows(a, start), &[a]))
    }

    /// View `len(shape)` consecutive entries of `a` (flat order) as a new tensor.
    pub fn slice_flat(&mut self, a: Var, offset: usize, shape: Vec<usize>) -> Result<Var> {
        let len: usize = shape.iter().product();
        let src = self.value(a);
        if offset + len > src.len() {
            return Err(dim_err("slice_flat out of range"));
        }
        let out = Tensor::from_parts(shape, src.data()[offset..offset + len].to_vec());
        Ok(self.push(out, Op::SliceFlat(a, offset), &[a]))
    }

    /// Reverse sweep from a `1×1` output.
    pub fn backward(&self, out: Var) -> Result<Gradients<T>> {
        if self.value(out).len() != 1 {
            return Err(dim_err("backward needs a scalar output"));
        }
        let n = out.0 + 1;
        let mut grads: Vec<Option<Tensor<T>>> = vec![None; self.nodes.len()];
        grads[out.0] = Some(Tensor::scalar(T::one()));
        for i in (0..n).rev() {
            let Some(g) = grads[i].take() else { continue };
            if !self.nodes[i].requires_grad {
                continue;
            }
            let node = &self.nodes[i];
            match &node.op {
                Op::Leaf => {
                    grads[i] = Some(g);
                    continue;
                }
                Op::MatMul(a, b) => {
                    if self.requires_grad(*a) {
                        let bt = self.value(*b).transpose();
                        self.acc(&mut grads, *a, g.matmul_unchecked(&bt));
                    }
                    if self.requires_grad(*b) {
                        let at = self.value(*a).transpose();
                        self.acc(&mut grads, *b, at.matmul_unchecked(&g));
                    }
                }
                Op::Transpose(a) => self.acc(&mut grads, *a, g.transpose()),
                Op::Add(a, b) => {
                    self.acc(&mut grads, *b, g.clone());
                    self.acc(&mut grads, *a, g);
                }
                Op::Sub(a, b) => {
                    self.acc(&mut grads, *b, g.scale(-T::one()));
                    self.acc(&mut grads, *a, g);
                }
                Op::Mul(a, b) => {
                    if self.requires_grad(*a) {
                        let d = g.zip_map_unchecked(self.value(*b), |x, y| x * y);
                        self.acc(&mut grads, *a, d);
                    }
                    if self.requires_grad(*b) {
                        let d = g.zip_map_unchecked(self.value(*a), |x, y| x * y);
                        self.acc(&mut grads, *b, d);
                    }
                }
                Op::Scale(a, s) => self.acc(&mut grads, *a, g.scale(*s)),
                Op::AddRow(a, r) => {
                    if self.requires_grad(*r) {
                        let c = g.cols();
                        let mut col_sums = vec![T::zero(); c];
                        for chunk in g.data().chunks(c) {
                            for (s, &x) in col_sums.iter_mut().zip(chunk) {
                                *s += x;
                            }
                        }
                        self.acc(&mut grads, *r, Tensor::row_vector(col_sums));
                    }
                    self.acc(&mut grads, *a, g);
                }
                Op::MulRow(a, r) => {
                    let va = self.value(*a);
                    let vr = self.value(*r);
                    let c = va.cols();
                    if self.requires_grad(*r) {
                        let mut col = vec![T::zero(); c];
                        for (gc, ac) in g.data().chunks(c).zip(va.data().chunks(c)) {
                            for ((s, &x), &y) in col.iter_mut().zip(gc).zip(ac) {
                                *s += x * y;
                            }
                        }
                        self.acc(&mut grads, *r, Tensor::row_vector(col));
                    }
                    if self.requires_grad(*a) {
                        let mut d = g;
                        for chunk in d.data_mut().chunks_mut(c) {
                            for (x, &s) in chunk.iter_mut().zip(vr.data()) {
                                *x *= s;
                            }
                        }
                        self.acc(&mut grads, *a, d);
                    }
                }
                Op::MulScalar(a, s) => {
                    if self.requires_grad(*s) {
                        let d: T = g
                            .data()
                            .iter()
                            .zip(self.value(*a).data())
                            .map(|(&x, &y)| x * y)
                            .sum();
                        self.acc(&mut grads, *s, Tensor::scalar(d));
                    }
                    if self.requires_grad(*a) {
                        let k = self.value(*s).item();
                        self.acc(&mut grads, *a, g.scale(k));
                    }
                }
                Op::Activate(a, act) => {
                    let d = g.zip_map_unchecked(&node.value, |x, y| x * act.derivative_from_output(y));
                    self.acc(&mut grads, *a, d);
                }
                Op::Exp(a) => {
                    let d = g.zip_map_unchecked(&node.value, |x, y| x * y);
                    self.acc(&mut grads, *a, d);
                }
                Op::Recip(a) => {
                    let d = g.zip_map_unchecked(&node.value, |x, y| -x * y * y);
                    self.acc(&mut grads, *a, d);
                }
                Op::Square(a) => {
                    let two = T::of(2.0);
                    let d = g.zip_map_unchecked(self.value(*a), |x, y| two * x * y);
                    self.acc(&mut grads, *a, d);
                }
                Op::Sum(a) => {
                    let va = self.value(*a);
                    let d = Tensor::from_parts(va.shape().to_vec(), vec![g.item(); va.len()]);
                    self.acc(&mut grads, *a, d);
                }
                Op::MaxConst(a, c) => {
                    let c = *c;
                    let d = g.zip_map_unchecked(self.value(*a), |x, y| {
                        if y >= c {
                            x
                        } else {
                            T::zero()
                        }
                    });
                    self.acc(&mut grads, *a, d);
                }
                Op::Solve { a, b, lu } => {
                    // X = A⁻¹B:  dB = A⁻ᵀ G,  dA = −dB Xᵀ
                    let db = lu.solve_transpose(&g)?;
                    if self.requires_grad(*a) {
                        let xt = node.value.transpose();
                        self.acc(&mut grads, *a, db.matmul_unchecked(&xt).scale(-T::one()));
                    }
                    self.acc(&mut grads, *b, db);
                }
                Op::HConcat(a, b) => {
                    let ca = self.value(*a).cols();
                    let cb = self.value(*b).cols();
                    self.acc(&mut grads, *a, g.slice_cols(0, ca));
                    self.acc(&mut grads, *b, g.slice_cols(ca, cb));
                }
                Op::SliceCols(a, start) => {
                    let va = self.value(*a);
                    let (r, c, len) = (va.rows(), va.cols(), g.cols());
                    let mut d = Tensor::zeros(r, c);
                    for i in 0..r {
                        d.row_mut(i)[*start..*start + len].copy_from_slice(g.row(i));
                    }
                    self.acc(&mut grads, *a, d);
                }
                Op::SliceRows(a, start) => {
                    let va = self.value(*a);
                    let c = va.cols();
                    let mut d = Tensor::zeros(va.rows(), c);
                    d.data_mut()[start * c..start * c + g.len()].copy_from_slice(g.data());
                    self.acc(&mut grads, *a, d);
                }
                Op::SliceFlat(a, offset) => {
                    let va = self.value(*a);
                    let mut d =
                        Tensor::from_parts(va.shape().to_vec(), vec![T::zero(); va.len()]);
                    d.data_mut()[*offset..*offset + g.len()].copy_from_slice(g.data());
                    self.acc(&mut grads, *a, d);
                }
            }
        }
        let shapes = self.nodes.iter().map(|n| n.value.shape().to_vec()).collect();
        Ok(Gradients { grads, shapes })
    }

    fn acc(&self, grads: &mut [Option<Tensor<T>>], v: Var, g: Tensor<T>) {
        if !self.nodes[v.0].requires_grad {
            return;
        }
        match &mut grads[v.0] {
            Some(existing) => existing.add_assign_unchecked(&g),
            slot @ None => *slot = Some(g),
        }
    }
}

/// Largest relative discrepancy between the reverse-mode gradient of `f` at
/// `theta` and a central finite difference with step `step`.
///
/// Per coordinate the error is `|g − d| / max(|g|, |d|, 1e-3·‖g‖∞)`, so
/// coordinates that are tiny compared with the overall gradient scale are
/// judged on that scale rather than on their own magnitude. A constant `f`
/// yields exactly 0.
pub fn grad_check<T, F>(f: F, theta: &Tensor<T>, step: T) -> Result<T>
where
    T: Scalar,
    F: Fn(&mut Tape<T>, Var) -> Result<Var>,
{
    if step <= T::zero() {
        return Err(Error::Argument("grad_check step must be positive".into()));
    }
    let mut tape = Tape::new();
    let p = tape.param(theta.clone());
    let out = f(&mut tape, p)?;
    let value = tape.value(out).item();
    if !value.is_finite() {
        return Err(Error::Numeric("objective is not finite at theta".into()));
    }
    let grad = tape.backward(out)?.wrt(p);
    if !grad.is_finite() {
        return Err(Error::Numeric("gradient is not finite at theta".into()));
    }

    let eval = |t: Tensor<T>| -> Result<T> {
        let mut tape = Tape::new();
        let p = tape.param(t);
        let out = f(&mut tape, p)?;
        let v = tape.value(out).item();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Numeric("objective is not finite at a probe point".into()))
        }
    };

    let mut numeric = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        let mut plus = theta.clone();
        plus.data_mut()[i] += step;
        let mut minus = theta.clone();
        minus.data_mut()[i] -= step;
        numeric.push((eval(plus)? - eval(minus)?) / (step + step));
    }
    let floor = grad.max_abs() * T::of(1e-3);
    let mut worst = T::zero();
    for (&g, &d) in grad.data().iter().zip(&numeric) {
        let denom = g.abs().max(d.abs()).max(floor);
        if denom > T::zero() {
            worst = worst.max((g - d).abs() / denom);
        }
    }
    Ok(worst)
}
