//! Reverse-mode tape over arrays of jets.
//!
//! Each node holds a `rows x cols` array of jets of one order, stored with
//! the coefficients innermost. Dense layers treat that storage as a
//! `rows x (cols * (order + 1))` matrix, so one GEMM pushes every Taylor
//! coefficient of every sample through a layer at once; the bias only
//! touches coefficient 0.

use alloc::vec;
use alloc::vec::Vec;

use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::jet::{Jet, MAX_ORDER};

#[derive(Clone, PartialEq, Debug)]
pub struct JetArray {
    order: usize,
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl JetArray {
    pub fn zeros(order: usize, rows: usize, cols: usize) -> JetArray {
        assert!(order <= MAX_ORDER, "jet order {order} outside 0..=3");
        JetArray {
            order,
            rows,
            cols,
            data: vec![0.0; rows * cols * (order + 1)],
        }
    }

    /// Row vector of constants (higher coefficients zero).
    pub fn constant_row(order: usize, values: &[f64]) -> JetArray {
        let mut a = JetArray::zeros(order, 1, values.len());
        for (c, v) in values.iter().enumerate() {
            a.data[c * (order + 1)] = *v;
        }
        a
    }

    /// Row vector from jets, all of order `order`.
    pub fn from_jets(order: usize, jets: &[Jet]) -> Result<JetArray> {
        let mut a = JetArray::zeros(order, 1, jets.len());
        for (c, j) in jets.iter().enumerate() {
            if j.order() != order {
                return Err(Error::OrderMismatch(order, j.order()));
            }
            a.data[c * (order + 1)..(c + 1) * (order + 1)].copy_from_slice(j.coeffs());
        }
        Ok(a)
    }

    pub fn order(&self) -> usize {
        self.order
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn stride(&self) -> usize {
        self.order + 1
    }
    pub fn data(&self) -> &[f64] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    fn base(&self, r: usize, c: usize) -> usize {
        debug_assert!(r < self.rows && c < self.cols);
        (r * self.cols + c) * (self.order + 1)
    }

    pub fn coeff(&self, r: usize, c: usize, k: usize) -> f64 {
        self.data[self.base(r, c) + k]
    }

    pub fn set_coeff(&mut self, r: usize, c: usize, k: usize, v: f64) {
        let b = self.base(r, c);
        self.data[b + k] = v;
    }

    pub fn value(&self, r: usize, c: usize) -> f64 {
        self.coeff(r, c, 0)
    }

    pub fn jet(&self, r: usize, c: usize) -> Jet {
        let b = self.base(r, c);
        match Jet::from_coeffs(&self.data[b..b + self.order + 1]) {
            Ok(j) => j,
            Err(_) => unreachable!("order is validated at construction"),
        }
    }

    pub fn set_jet(&mut self, r: usize, c: usize, j: &Jet) {
        assert_eq!(j.order(), self.order, "jet order mismatch");
        let b = self.base(r, c);
        self.data[b..b + self.order + 1].copy_from_slice(j.coeffs());
    }

    fn same_shape(&self, o: &JetArray) -> bool {
        self.order == o.order && self.rows == o.rows && self.cols == o.cols
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }

    pub fn from_index(i: usize) -> NodeId {
        NodeId(i)
    }
}

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    /// `W x + b`; `W` is `n_out x n_in` row-major at `offset`, `b` follows.
    Dense {
        input: NodeId,
        offset: usize,
        n_in: usize,
        n_out: usize,
    },
    /// Coefficient 0 of the input repeats every `period` columns, so the
    /// activation derivative tables are computed for the first `period`
    /// columns of each row only.
    Activate {
        input: NodeId,
        act: Activation,
        period: usize,
    },
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Scale(NodeId, f64),
    MulConst(NodeId, JetArray),
    AddConst(NodeId, JetArray),
    Select {
        input: NodeId,
        row: usize,
        col_start: usize,
        len: usize,
    },
    /// Order-0 array holding `k! c_k` of the input.
    Coefficient(NodeId, usize),
    Mean(NodeId),
}

#[derive(Clone, Debug)]
struct Node {
    op: Op,
    value: JetArray,
    needs_grad: bool,
    /// Activation derivative tables, `rows x period`, kept for the reverse sweep.
    tables: Vec<[f64; 5]>,
}

/// Append-only record of one evaluation against a fixed parameter slice.
pub struct Tape<'p> {
    params: &'p [f64],
    nodes: Vec<Node>,
}

impl<'p> Tape<'p> {
    pub fn new(params: &'p [f64]) -> Tape<'p> {
        Tape {
            params,
            nodes: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn params(&self) -> &'p [f64] {
        self.params
    }

    pub fn value(&self, id: NodeId) -> &JetArray {
        &self.nodes[id.0].value
    }

    /// Scalar value of a `1 x 1` node.
    pub fn scalar(&self, id: NodeId) -> f64 {
        self.nodes[id.0].value.data[0]
    }

    fn push(&mut self, op: Op) -> NodeId {
        let (value, tables) = eval_op(&op, &self.nodes, self.params);
        let needs_grad = match &op {
            Op::Leaf => false,
            Op::Dense { .. } => true,
            Op::Add(a, b) | Op::Sub(a, b) | Op::Mul(a, b) => {
                self.nodes[a.0].needs_grad || self.nodes[b.0].needs_grad
            }
            Op::Activate { input: a, .. }
            | Op::Scale(a, _)
            | Op::MulConst(a, _)
            | Op::AddConst(a, _)
            | Op::Coefficient(a, _)
            | Op::Mean(a)
            | Op::Select { input: a, .. } => self.nodes[a.0].needs_grad,
        };
        self.nodes.push(Node {
            op,
            value,
            needs_grad,
            tables,
        });
        NodeId(self.nodes.len() - 1)
    }

    pub fn constant(&mut self, value: JetArray) -> NodeId {
        self.nodes.push(Node {
            op: Op::Leaf,
            value,
            needs_grad: false,
            tables: Vec::new(),
        });
        NodeId(self.nodes.len() - 1)
    }

    pub fn dense(&mut self, input: NodeId, offset: usize, n_in: usize, n_out: usize) -> NodeId {
        assert_eq!(self.value(input).rows, n_in, "dense input rows");
        assert!(offset + n_out * n_in + n_out <= self.params.len(), "dense parameters out of range");
        self.push(Op::Dense {
            input,
            offset,
            n_in,
            n_out,
        })
    }

    pub fn activate(&mut self, a: NodeId, act: Activation) -> NodeId {
        let period = self.value(a).cols;
        self.push(Op::Activate { input: a, act, period })
    }

    /// As [`Tape::activate`] for inputs whose coefficient 0 repeats every
    /// `period` columns (the same points seeded along several directions).
    /// Values past the first period are taken from the first period.
    pub fn activate_periodic(&mut self, a: NodeId, act: Activation, period: usize) -> NodeId {
        let cols = self.value(a).cols;
        assert!(period > 0 && cols % period == 0, "period must divide the column count");
        self.push(Op::Activate { input: a, act, period })
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        assert!(self.value(a).same_shape(self.value(b)), "add shape mismatch");
        self.push(Op::Add(a, b))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        assert!(self.value(a).same_shape(self.value(b)), "sub shape mismatch");
        self.push(Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        assert!(self.value(a).same_shape(self.value(b)), "mul shape mismatch");
        self.push(Op::Mul(a, b))
    }

    pub fn scale(&mut self, a: NodeId, s: f64) -> NodeId {
        self.push(Op::Scale(a, s))
    }

    pub fn mul_const(&mut self, a: NodeId, c: JetArray) -> NodeId {
        assert!(self.value(a).same_shape(&c), "mul_const shape mismatch");
        self.push(Op::MulConst(a, c))
    }

    pub fn add_const(&mut self, a: NodeId, c: JetArray) -> NodeId {
        assert!(self.value(a).same_shape(&c), "add_const shape mismatch");
        self.push(Op::AddConst(a, c))
    }

    /// `1 x len` slice of row `row` starting at column `col_start`.
    pub fn select(&mut self, input: NodeId, row: usize, col_start: usize, len: usize) -> NodeId {
        let v = self.value(input);
        assert!(row < v.rows && col_start + len <= v.cols, "select out of range");
        self.push(Op::Select {
            input,
            row,
            col_start,
            len,
        })
    }

    pub fn coefficient(&mut self, a: NodeId, k: usize) -> NodeId {
        assert!(k <= self.value(a).order, "coefficient above jet order");
        self.push(Op::Coefficient(a, k))
    }

    pub fn mean(&mut self, a: NodeId) -> NodeId {
        assert!(self.value(a).rows * self.value(a).cols > 0, "mean of empty array");
        self.push(Op::Mean(a))
    }

    /// Recomputes every node from the recorded operations.
    pub fn replay(&self) -> Vec<JetArray> {
        let mut fresh: Vec<Node> = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let (value, tables) = match n.op {
                Op::Leaf => (n.value.clone(), Vec::new()),
                ref op => eval_op(op, &fresh, self.params),
            };
            fresh.push(Node {
                op: n.op.clone(),
                value,
                needs_grad: n.needs_grad,
                tables,
            });
        }
        fresh.into_iter().map(|n| n.value).collect()
    }

    /// Gradient of the `1 x 1` node `output` (its coefficient 0) with respect
    /// to every parameter. Nodes are visited once each, newest first.
    pub fn gradient(&self, output: NodeId) -> Result<Vec<f64>> {
        if output.0 >= self.nodes.len() {
            return Err(Error::MissingTape);
        }
        let out = &self.nodes[output.0].value;
        if out.rows * out.cols != 1 {
            return Err(Error::Shape {
                expected: 1,
                found: out.rows * out.cols,
            });
        }
        let mut grad = vec![0.0; self.params.len()];
        let mut adj: Vec<Option<Vec<f64>>> = vec![None; output.0 + 1];
        let mut seed = vec![0.0; out.data.len()];
        seed[0] = 1.0;
        adj[output.0] = Some(seed);

        for i in (0..=output.0).rev() {
            let Some(g) = adj[i].take() else { continue };
            let node = &self.nodes[i];
            if !node.needs_grad {
                continue;
            }
            self.backward_node(node, &g, &mut adj, &mut grad);
        }
        if let Some(index) = grad.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteGradient { epoch: None, index });
        }
        Ok(grad)
    }

    fn backward_node(&self, node: &Node, g: &[f64], adj: &mut [Option<Vec<f64>>], grad: &mut [f64]) {
        let out = &node.value;
        let s = out.order + 1;
        match &node.op {
            Op::Leaf => {}
            Op::Dense {
                input,
                offset,
                n_in,
                n_out,
            } => {
                let x = &self.nodes[input.0];
                let j = x.value.cols * s;
                let (w_grad, b_grad) = grad[*offset..*offset + n_out * n_in + n_out].split_at_mut(n_out * n_in);
                gemm(*n_out, j, *n_in, 1.0, g, j, 1, &x.value.data, 1, j, 1.0, w_grad, *n_in, 1);
                for (r, bg) in b_grad.iter_mut().enumerate() {
                    let row = &g[r * j..(r + 1) * j];
                    let mut acc = 0.0;
                    for c in (0..j).step_by(s) {
                        acc += row[c];
                    }
                    *bg += acc;
                }
                if x.needs_grad {
                    let w = &self.params[*offset..*offset + n_out * n_in];
                    let a = adjoint(adj, *input, x.value.data.len());
                    gemm(*n_in, *n_out, j, 1.0, w, 1, *n_in, g, j, 1, 1.0, a, j, 1);
                }
            }
            Op::Activate { input, period, .. } => {
                let x = &self.nodes[input.0].value;
                let a = adjoint(adj, *input, x.data.len());
                let cols = x.cols;
                for (e, ((xs, gs), as_)) in x
                    .data
                    .chunks_exact(s)
                    .zip(g.chunks_exact(s))
                    .zip(a.chunks_exact_mut(s))
                    .enumerate()
                {
                    let d = &node.tables[(e / cols) * period + (e % cols) % period];
                    activation_adjoint(xs, gs, d, as_);
                }
            }
            Op::Add(p, q) => {
                self.accumulate(adj, *p, g, 1.0);
                self.accumulate(adj, *q, g, 1.0);
            }
            Op::Sub(p, q) => {
                self.accumulate(adj, *p, g, 1.0);
                self.accumulate(adj, *q, g, -1.0);
            }
            Op::Mul(p, q) => {
                let pv = &self.nodes[p.0].value.data;
                let qv = &self.nodes[q.0].value.data;
                if self.nodes[p.0].needs_grad {
                    let a = adjoint(adj, *p, pv.len());
                    cauchy_adjoint(g, qv, a, s);
                }
                if self.nodes[q.0].needs_grad {
                    let a = adjoint(adj, *q, qv.len());
                    cauchy_adjoint(g, pv, a, s);
                }
            }
            Op::Scale(p, c) => self.accumulate(adj, *p, g, *c),
            Op::MulConst(p, c) => {
                let a = adjoint(adj, *p, c.data.len());
                cauchy_adjoint(g, &c.data, a, s);
            }
            Op::AddConst(p, _) => self.accumulate(adj, *p, g, 1.0),
            Op::Select {
                input,
                row,
                col_start,
                len,
            } => {
                let x = &self.nodes[input.0].value;
                let start = (row * x.cols + col_start) * s;
                let a = adjoint(adj, *input, x.data.len());
                for (dst, src) in a[start..start + len * s].iter_mut().zip(g) {
                    *dst += *src;
                }
            }
            Op::Coefficient(input, k) => {
                let x = &self.nodes[input.0].value;
                let xs = x.order + 1;
                let f = FACTORIAL[*k];
                let a = adjoint(adj, *input, x.data.len());
                for (e, gv) in g.iter().enumerate() {
                    a[e * xs + k] += f * gv;
                }
            }
            Op::Mean(input) => {
                let x = &self.nodes[input.0].value;
                let inv = 1.0 / (x.rows * x.cols) as f64;
                let a = adjoint(adj, *input, x.data.len());
                for chunk in a.chunks_exact_mut(s) {
                    for (dst, gv) in chunk.iter_mut().zip(g) {
                        *dst += gv * inv;
                    }
                }
            }
        }
    }

    fn accumulate(&self, adj: &mut [Option<Vec<f64>>], id: NodeId, g: &[f64], c: f64) {
        if !self.nodes[id.0].needs_grad {
            return;
        }
        let a = adjoint(adj, id, g.len());
        if c == 1.0 {
            for (dst, src) in a.iter_mut().zip(g) {
                *dst += *src;
            }
        } else {
            for (dst, src) in a.iter_mut().zip(g) {
                *dst += c * *src;
            }
        }
    }
}

const FACTORIAL: [f64; 4] = [1.0, 1.0, 2.0, 6.0];

fn adjoint(adj: &mut [Option<Vec<f64>>], id: NodeId, len: usize) -> &mut [f64] {
    adj[id.0].get_or_insert_with(|| vec![0.0; len])
}

/// `a_i += sum_{n >= i} g_n b_{n-i}` per jet.
fn cauchy_adjoint(g: &[f64], b: &[f64], a: &mut [f64], s: usize) {
    for ((gs, bs), as_) in g.chunks_exact(s).zip(b.chunks_exact(s)).zip(a.chunks_exact_mut(s)) {
        for i in 0..s {
            let mut acc = 0.0;
            for n in i..s {
                acc += gs[n] * bs[n - i];
            }
            as_[i] += acc;
        }
    }
}

fn activation_adjoint(x: &[f64], g: &[f64], d: &[f64; 5], a: &mut [f64]) {
    let k = x.len() - 1;
    a[0] += g[0] * d[1];
    if k >= 1 {
        a[0] += g[1] * d[2] * x[1];
        a[1] += g[1] * d[1];
    }
    if k >= 2 {
        a[0] += g[2] * (d[2] * x[2] + 0.5 * d[3] * x[1] * x[1]);
        a[1] += g[2] * d[2] * x[1];
        a[2] += g[2] * d[1];
    }
    if k >= 3 {
        a[0] += g[3] * (d[2] * x[3] + d[3] * x[1] * x[2] + d[4] / 6.0 * x[1] * x[1] * x[1]);
        a[1] += g[3] * (d[2] * x[2] + 0.5 * d[3] * x[1] * x[1]);
        a[2] += g[3] * d[2] * x[1];
        a[3] += g[3] * d[1];
    }
}

fn eval_op(op: &Op, nodes: &[Node], params: &[f64]) -> (JetArray, Vec<[f64; 5]>) {
    if let Op::Activate { input, act, period } = op {
        let x = &nodes[input.0].value;
        let s = x.order + 1;
        let mut tables = Vec::with_capacity(x.rows * period);
        for r in 0..x.rows {
            for c in 0..*period {
                tables.push(act.derivatives(x.data[(r * x.cols + c) * s]));
            }
        }
        let mut out = x.clone();
        for (e, chunk) in out.data.chunks_exact_mut(s).enumerate() {
            let d = &tables[(e / x.cols) * period + (e % x.cols) % period];
            compose_in_place(chunk, d);
        }
        return (out, tables);
    }
    (eval_plain(op, nodes, params), Vec::new())
}

fn eval_plain(op: &Op, nodes: &[Node], params: &[f64]) -> JetArray {
    match op {
        Op::Dense {
            input,
            offset,
            n_in,
            n_out,
        } => {
            let x = &nodes[input.0].value;
            let s = x.order + 1;
            let j = x.cols * s;
            let mut out = JetArray::zeros(x.order, *n_out, x.cols);
            let w = &params[*offset..*offset + n_out * n_in];
            let b = &params[*offset + n_out * n_in..*offset + n_out * n_in + n_out];
            gemm(*n_out, *n_in, j, 1.0, w, *n_in, 1, &x.data, j, 1, 0.0, &mut out.data, j, 1);
            for (r, bias) in b.iter().enumerate() {
                let row = &mut out.data[r * j..(r + 1) * j];
                for c in (0..j).step_by(s) {
                    row[c] += bias;
                }
            }
            out
        }
        Op::Leaf | Op::Activate { .. } => unreachable!("handled by eval_op"),
        Op::Add(a, b) => zip(&nodes[a.0].value, &nodes[b.0].value, |p, q| p + q),
        Op::Sub(a, b) => zip(&nodes[a.0].value, &nodes[b.0].value, |p, q| p - q),
        Op::Mul(a, b) => cauchy(&nodes[a.0].value, &nodes[b.0].value),
        Op::Scale(a, c) => {
            let mut out = nodes[a.0].value.clone();
            for v in out.data.iter_mut() {
                *v *= c;
            }
            out
        }
        Op::MulConst(a, c) => cauchy(&nodes[a.0].value, c),
        Op::AddConst(a, c) => zip(&nodes[a.0].value, c, |p, q| p + q),
        Op::Select {
            input,
            row,
            col_start,
            len,
        } => {
            let x = &nodes[input.0].value;
            let s = x.order + 1;
            let start = (row * x.cols + col_start) * s;
            JetArray {
                order: x.order,
                rows: 1,
                cols: *len,
                data: x.data[start..start + len * s].to_vec(),
            }
        }
        Op::Coefficient(input, k) => {
            let x = &nodes[input.0].value;
            let s = x.order + 1;
            let f = FACTORIAL[*k];
            JetArray {
                order: 0,
                rows: x.rows,
                cols: x.cols,
                data: x.data.chunks_exact(s).map(|c| f * c[*k]).collect(),
            }
        }
        Op::Mean(input) => {
            let x = &nodes[input.0].value;
            let s = x.order + 1;
            let n = (x.rows * x.cols) as f64;
            let mut out = JetArray::zeros(x.order, 1, 1);
            for chunk in x.data.chunks_exact(s) {
                for (o, v) in out.data.iter_mut().zip(chunk) {
                    *o += v;
                }
            }
            for o in out.data.iter_mut() {
                *o /= n;
            }
            out
        }
    }
}

fn compose_in_place(a: &mut [f64], d: &[f64; 5]) {
    let k = a.len() - 1;
    let (a1, a2, a3) = (
        if k >= 1 { a[1] } else { 0.0 },
        if k >= 2 { a[2] } else { 0.0 },
        if k >= 3 { a[3] } else { 0.0 },
    );
    a[0] = d[0];
    if k >= 1 {
        a[1] = d[1] * a1;
    }
    if k >= 2 {
        a[2] = d[1] * a2 + 0.5 * d[2] * a1 * a1;
    }
    if k >= 3 {
        a[3] = d[1] * a3 + d[2] * a1 * a2 + d[3] / 6.0 * a1 * a1 * a1;
    }
}

fn zip(a: &JetArray, b: &JetArray, f: impl Fn(f64, f64) -> f64) -> JetArray {
    JetArray {
        order: a.order,
        rows: a.rows,
        cols: a.cols,
        data: a.data.iter().zip(&b.data).map(|(p, q)| f(*p, *q)).collect(),
    }
}

fn cauchy(a: &JetArray, b: &JetArray) -> JetArray {
    let s = a.order + 1;
    let mut out = JetArray::zeros(a.order, a.rows, a.cols);
    for ((o, x), y) in out
        .data
        .chunks_exact_mut(s)
        .zip(a.data.chunks_exact(s))
        .zip(b.data.chunks_exact(s))
    {
        for n in 0..s {
            let mut acc = x[0] * y[n];
            for i in 1..=n {
                acc += x[i] * y[n - i];
            }
            o[n] = acc;
        }
    }
    out
}

/// `C = alpha A B + beta C` with explicit row/column strides.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    alpha: f64,
    a: &[f64],
    rsa: usize,
    csa: usize,
    b: &[f64],
    rsb: usize,
    csb: usize,
    beta: f64,
    c: &mut [f64],
    rsc: usize,
    csc: usize,
) {
    if m == 0 || n == 0 {
        return;
    }
    let last = |rows: usize, cols: usize, rs: usize, cs: usize| (rows - 1) * rs + (cols - 1) * cs;
    if k > 0 {
        assert!(last(m, k, rsa, csa) < a.len(), "gemm: A out of bounds");
        assert!(last(k, n, rsb, csb) < b.len(), "gemm: B out of bounds");
    }
    assert!(last(m, n, rsc, csc) < c.len(), "gemm: C out of bounds");
    // SAFETY: the asserts above keep every strided access inside the slices,
    // and `c` is uniquely borrowed so it cannot alias `a` or `b`.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            rsc as isize,
            csc as isize,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::lift_seed;

    #[test]
    fn periodic_activation_matches_plain() {
        // two directions over the same three points
        let mut x = JetArray::zeros(2, 2, 6);
        for r in 0..2 {
            for c in 0..6 {
                let v = 0.3 * (r as f64 + 1.0) - 0.2 * (c % 3) as f64;
                x.set_jet(r, c, &Jet::from_coeffs(&[v, (c / 3) as f64, 0.1 * c as f64]).unwrap());
            }
        }
        let params = [0.0];
        let mut t = Tape::new(&params);
        let a = t.constant(x.clone());
        let plain = t.activate(a, Activation::Sin);
        let shared = t.activate_periodic(a, Activation::Sin, 3);
        assert_eq!(t.value(plain), t.value(shared));
    }

    #[test]
    fn square_gradient() {
        // theta = w * 1 + b with w = 3, b = 0; loss = theta^2.
        let params = [3.0, 0.0];
        let mut t = Tape::new(&params);
        let one = t.constant(JetArray::constant_row(0, &[1.0]));
        let th = t.dense(one, 0, 1, 1);
        let sq = t.mul(th, th);
        let g = t.gradient(sq).unwrap();
        assert_eq!(g, vec![6.0, 6.0]);
    }

    #[test]
    fn unused_parameter_has_zero_gradient() {
        let params = [1.5, 0.25, 9.0, 9.0];
        let mut t = Tape::new(&params);
        let x = t.constant(JetArray::constant_row(0, &[2.0]));
        let y = t.dense(x, 0, 1, 1);
        let y2 = t.mul(y, y);
        let g = t.gradient(y2).unwrap();
        assert_eq!(g[2], 0.0);
        assert_eq!(g[3], 0.0);
    }

    #[test]
    fn activation_matches_jet_compose() {
        let j = lift_seed(0.3, 3).unwrap() * lift_seed(0.3, 3).unwrap();
        let params: [f64; 0] = [];
        let mut t = Tape::new(&params);
        let x = t.constant(JetArray::from_jets(3, &[j]).unwrap());
        let y = t.activate(x, Activation::Tanh);
        assert_eq!(t.value(y).jet(0, 0), j.activate(Activation::Tanh));
    }

    #[test]
    fn missing_output_is_reported() {
        let params = [1.0];
        let t = Tape::new(&params);
        assert_eq!(t.gradient(NodeId(0)), Err(Error::MissingTape));
    }
}
