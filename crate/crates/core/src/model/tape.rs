//! Reverse-mode differentiation over [`Tensor`] values.
//!
//! Every operation evaluates eagerly and records how to push gradients back to
//! its inputs. Parameters enter the tape by reference and their gradients are
//! accumulated straight into caller-provided buffers.

use super::tensor::{gemm_nn, gemm_nt, gemm_tn, sigmoid, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

enum Value<'p> {
    Owned(Tensor),
    Borrowed(&'p Tensor),
}

enum Op {
    Constant,
    Param(usize),
    MatMul(Var, Var),
    MatMulNT(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    AddRow(Var, Var),
    Affine(Var, f64),
    Sigmoid(Var),
    Tanh(Var),
    Ln(Var),
    Clamp(Var, f64, f64),
    SoftmaxRows(Var),
    ConcatCols(Vec<Var>),
    ConcatRows(Vec<Var>),
    GatherRows(Var, Vec<usize>),
    SliceRows(Var, usize),
    SliceCols(Var, usize),
    Reshape(Var),
    ColumnMax(Var, Vec<usize>),
    Unfold(Var, usize),
    PadRows(Var, usize),
    ScatterCols(Var, Vec<usize>),
    Sum(Var),
    StraightThrough(Var),
    GateLookup(Var, Var, Vec<usize>),
}

struct Node<'p> {
    value: Value<'p>,
    op: Op,
    needs_grad: bool,
}

#[derive(Default)]
pub struct Tape<'p> {
    nodes: Vec<Node<'p>>,
}

impl<'p> Tape<'p> {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        match &self.nodes[v.0].value {
            Value::Owned(t) => t,
            Value::Borrowed(t) => t,
        }
    }

    pub fn scalar(&self, v: Var) -> f64 {
        self.value(v).data[0]
    }

    fn push(&mut self, value: Tensor, op: Op, inputs: &[Var]) -> Var {
        let needs_grad = inputs.iter().any(|v| self.nodes[v.0].needs_grad);
        self.nodes.push(Node {
            value: Value::Owned(value),
            op,
            needs_grad,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn constant(&mut self, value: Tensor) -> Var {
        self.nodes.push(Node {
            value: Value::Owned(value),
            op: Op::Constant,
            needs_grad: false,
        });
        Var(self.nodes.len() - 1)
    }

    /// Registers parameter `id`; its gradient lands in `param_grads[id]` on backward.
    pub fn param(&mut self, id: usize, value: &'p Tensor) -> Var {
        self.nodes.push(Node {
            value: Value::Borrowed(value),
            op: Op::Param(id),
            needs_grad: true,
        });
        Var(self.nodes.len() - 1)
    }

    /// `a · b`
    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let (x, y) = (self.value(a), self.value(b));
        assert_eq!(x.cols, y.rows, "matmul shape mismatch");
        let mut out = Tensor::zeros(x.rows, y.cols);
        gemm_nn(&mut out, x, y);
        self.push(out, Op::MatMul(a, b), &[a, b])
    }

    /// `a · bᵀ`, the usual affine-layer product with `b` stored as `out × in`.
    pub fn matmul_nt(&mut self, a: Var, b: Var) -> Var {
        let (x, y) = (self.value(a), self.value(b));
        assert_eq!(x.cols, y.cols, "matmul_nt shape mismatch");
        let mut out = Tensor::zeros(x.rows, y.rows);
        gemm_nt(&mut out, x, y);
        self.push(out, Op::MatMulNT(a, b), &[a, b])
    }

    fn zip_with(&mut self, a: Var, b: Var, f: impl Fn(f64, f64) -> f64, op: Op) -> Var {
        let (x, y) = (self.value(a), self.value(b));
        assert_eq!(x.shape(), y.shape(), "elementwise shape mismatch");
        let data = x.data.iter().zip(&y.data).map(|(&p, &q)| f(p, q)).collect();
        let out = Tensor::from_vec(x.rows, x.cols, data);
        self.push(out, op, &[a, b])
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        self.zip_with(a, b, |p, q| p + q, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        self.zip_with(a, b, |p, q| p - q, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        self.zip_with(a, b, |p, q| p * q, Op::Mul(a, b))
    }

    /// Adds the `1 × n` vector `row` to every row of `a`.
    pub fn add_row(&mut self, a: Var, row: Var) -> Var {
        let (x, r) = (self.value(a), self.value(row));
        assert_eq!((1, x.cols), r.shape(), "add_row shape mismatch");
        let mut out = x.clone();
        for i in 0..out.rows {
            for (o, &b) in out.row_mut(i).iter_mut().zip(&r.data) {
                *o += b;
            }
        }
        self.push(out, Op::AddRow(a, row), &[a, row])
    }

    /// `alpha · a + beta`
    pub fn affine(&mut self, a: Var, alpha: f64, beta: f64) -> Var {
        let out = self.value(a).map(|x| alpha * x + beta);
        self.push(out, Op::Affine(a, alpha), &[a])
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let out = self.value(a).map(sigmoid);
        self.push(out, Op::Sigmoid(a), &[a])
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let out = self.value(a).map(f64::tanh);
        self.push(out, Op::Tanh(a), &[a])
    }

    pub fn ln(&mut self, a: Var) -> Var {
        let out = self.value(a).map(f64::ln);
        self.push(out, Op::Ln(a), &[a])
    }

    /// Clamps into `[lo, hi]`; the gradient is zero where clamping is active.
    pub fn clamp(&mut self, a: Var, lo: f64, hi: f64) -> Var {
        let out = self.value(a).map(|x| x.clamp(lo, hi));
        self.push(out, Op::Clamp(a, lo, hi), &[a])
    }

    /// Row-wise softmax.
    pub fn softmax_rows(&mut self, a: Var) -> Var {
        let x = self.value(a);
        let mut out = x.clone();
        for r in 0..out.rows {
            let row = out.row_mut(r);
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for v in row.iter_mut() {
                *v = (*v - max).exp();
                total += *v;
            }
            for v in row.iter_mut() {
                *v /= total;
            }
        }
        self.push(out, Op::SoftmaxRows(a), &[a])
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Var {
        let rows = self.value(parts[0]).rows;
        let cols: usize = parts.iter().map(|&p| self.value(p).cols).sum();
        let mut out = Tensor::zeros(rows, cols);
        let mut offset = 0;
        for &p in parts {
            let t = self.value(p);
            assert_eq!(t.rows, rows, "concat_cols row mismatch");
            for r in 0..rows {
                out.row_mut(r)[offset..offset + t.cols].copy_from_slice(t.row(r));
            }
            offset += t.cols;
        }
        self.push(out, Op::ConcatCols(parts.to_vec()), parts)
    }

    pub fn concat_rows(&mut self, parts: &[Var]) -> Var {
        let cols = self.value(parts[0]).cols;
        let mut data = Vec::new();
        for &p in parts {
            let t = self.value(p);
            assert_eq!(t.cols, cols, "concat_rows column mismatch");
            data.extend_from_slice(&t.data);
        }
        let rows = data.len() / cols.max(1);
        self.push(
            Tensor::from_vec(rows, cols, data),
            Op::ConcatRows(parts.to_vec()),
            parts,
        )
    }

    /// Row `idx[i]` of `a` becomes row `i` of the output.
    pub fn gather_rows(&mut self, a: Var, idx: &[usize]) -> Var {
        let x = self.value(a);
        let mut out = Tensor::zeros(idx.len(), x.cols);
        for (i, &src) in idx.iter().enumerate() {
            out.row_mut(i).copy_from_slice(x.row(src));
        }
        self.push(out, Op::GatherRows(a, idx.to_vec()), &[a])
    }

    pub fn slice_rows(&mut self, a: Var, start: usize, len: usize) -> Var {
        let x = self.value(a);
        let data = x.data[start * x.cols..(start + len) * x.cols].to_vec();
        let out = Tensor::from_vec(len, x.cols, data);
        self.push(out, Op::SliceRows(a, start), &[a])
    }

    pub fn slice_cols(&mut self, a: Var, start: usize, len: usize) -> Var {
        let x = self.value(a);
        let mut out = Tensor::zeros(x.rows, len);
        for r in 0..x.rows {
            out.row_mut(r)
                .copy_from_slice(&x.row(r)[start..start + len]);
        }
        self.push(out, Op::SliceCols(a, start), &[a])
    }

    pub fn reshape(&mut self, a: Var, rows: usize, cols: usize) -> Var {
        let x = self.value(a);
        assert_eq!(x.len(), rows * cols, "reshape size mismatch");
        let out = Tensor::from_vec(rows, cols, x.data.clone());
        self.push(out, Op::Reshape(a), &[a])
    }

    /// Column-wise max over rows (`r × c → 1 × c`); ties go to the first row.
    pub fn column_max(&mut self, a: Var) -> Var {
        let x = self.value(a);
        let mut arg = vec![0usize; x.cols];
        let mut out = Tensor::from_vec(1, x.cols, x.row(0).to_vec());
        for r in 1..x.rows {
            for c in 0..x.cols {
                if x.at(r, c) > out.data[c] {
                    out.data[c] = x.at(r, c);
                    arg[c] = r;
                }
            }
        }
        self.push(out, Op::ColumnMax(a, arg), &[a])
    }

    /// Sliding windows of `k` consecutive rows, each flattened into one output row.
    pub fn unfold(&mut self, a: Var, k: usize) -> Var {
        let x = self.value(a);
        assert!(k >= 1 && x.rows >= k, "unfold needs at least {k} rows");
        let windows = x.rows - k + 1;
        let width = k * x.cols;
        let mut out = Tensor::zeros(windows, width);
        for w in 0..windows {
            out.row_mut(w)
                .copy_from_slice(&x.data[w * x.cols..(w + k) * x.cols]);
        }
        self.push(out, Op::Unfold(a, k), &[a])
    }

    /// Surrounds `a` with zero rows.
    pub fn pad_rows(&mut self, a: Var, before: usize, after: usize) -> Var {
        let x = self.value(a);
        let mut out = Tensor::zeros(before + x.rows + after, x.cols);
        out.data[before * x.cols..(before + x.rows) * x.cols].copy_from_slice(&x.data);
        self.push(out, Op::PadRows(a, before), &[a])
    }

    /// `out[0, map[i]] += a[0, i]` for a `1 × n` input.
    pub fn scatter_cols(&mut self, a: Var, map: &[usize], width: usize) -> Var {
        let x = self.value(a);
        assert_eq!(
            (1, map.len()),
            x.shape(),
            "scatter_cols expects a row vector"
        );
        let mut out = Tensor::zeros(1, width);
        for (i, &dst) in map.iter().enumerate() {
            out.data[dst] += x.data[i];
        }
        self.push(out, Op::ScatterCols(a, map.to_vec()), &[a])
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let total = self.value(a).sum();
        self.push(Tensor::from_vec(1, 1, vec![total]), Op::Sum(a), &[a])
    }

    /// Hard threshold `x > threshold` forward; identity gradient backward.
    pub fn straight_through(&mut self, a: Var, threshold: f64) -> Var {
        let out = self.value(a).map(|x| if x > threshold { 1.0 } else { 0.0 });
        self.push(out, Op::StraightThrough(a), &[a])
    }

    /// Row `table[gate[owner[j]]]` for every token `j`.
    ///
    /// `gates` is a `1 × s` vector of exact 0/1 values, `table` has two rows
    /// and `owner[j]` names the sentence of token `j`. Backward treats the
    /// output as `table[0] + gate · (table[1] − table[0])`.
    pub fn gate_lookup(&mut self, gates: Var, table: Var, owner: &[usize]) -> Var {
        let (z, d) = (self.value(gates), self.value(table));
        assert_eq!(d.rows, 2, "gate table needs two rows");
        let mut out = Tensor::zeros(owner.len(), d.cols);
        for (j, &s) in owner.iter().enumerate() {
            let row = if z.data[s] > 0.5 { 1 } else { 0 };
            out.row_mut(j).copy_from_slice(d.row(row));
        }
        self.push(
            out,
            Op::GateLookup(gates, table, owner.to_vec()),
            &[gates, table],
        )
    }

    /// Accumulates `d(seed · root)/dθ` into `param_grads`.
    pub fn backward(&self, root: Var, seed: f64, param_grads: &mut [Tensor]) {
        let mut grads: Vec<Option<Tensor>> = (0..=root.0).map(|_| None).collect();
        let (r, c) = self.value(root).shape();
        grads[root.0] = Some(Tensor::filled(r, c, seed));
        let mut sink = Sink {
            nodes: &self.nodes,
            grads: &mut grads,
            params: param_grads,
        };
        for i in (0..=root.0).rev() {
            let Some(g) = sink.grads[i].take() else {
                continue;
            };
            let node = &self.nodes[i];
            if !node.needs_grad {
                continue;
            }
            let y = self.value(Var(i));
            self.backprop_node(&node.op, &g, y, &mut sink);
        }
    }

    fn backprop_node(&self, op: &Op, g: &Tensor, y: &Tensor, sink: &mut Sink<'_, 'p>) {
        match op {
            Op::Constant | Op::Param(_) => {}
            Op::MatMul(a, b) => {
                if let Some(ga) = sink.get(*a) {
                    gemm_nt(ga, g, self.value(*b));
                }
                if let Some(gb) = sink.get(*b) {
                    gemm_tn(gb, self.value(*a), g);
                }
            }
            Op::MatMulNT(a, b) => {
                if let Some(ga) = sink.get(*a) {
                    gemm_nn(ga, g, self.value(*b));
                }
                if let Some(gb) = sink.get(*b) {
                    gemm_tn(gb, g, self.value(*a));
                }
            }
            Op::Add(a, b) => {
                if let Some(ga) = sink.get(*a) {
                    ga.add_assign(g);
                }
                if let Some(gb) = sink.get(*b) {
                    gb.add_assign(g);
                }
            }
            Op::Sub(a, b) => {
                if let Some(ga) = sink.get(*a) {
                    ga.add_assign(g);
                }
                if let Some(gb) = sink.get(*b) {
                    for (o, &v) in gb.data.iter_mut().zip(&g.data) {
                        *o -= v;
                    }
                }
            }
            Op::Mul(a, b) => {
                if let Some(ga) = sink.get(*a) {
                    for ((o, &v), &w) in ga.data.iter_mut().zip(&g.data).zip(&self.value(*b).data) {
                        *o += v * w;
                    }
                }
                if let Some(gb) = sink.get(*b) {
                    for ((o, &v), &w) in gb.data.iter_mut().zip(&g.data).zip(&self.value(*a).data) {
                        *o += v * w;
                    }
                }
            }
            Op::AddRow(a, row) => {
                if let Some(ga) = sink.get(*a) {
                    ga.add_assign(g);
                }
                if let Some(gr) = sink.get(*row) {
                    for r in 0..g.rows {
                        for (o, &v) in gr.data.iter_mut().zip(g.row(r)) {
                            *o += v;
                        }
                    }
                }
            }
            Op::Affine(a, alpha) => {
                if let Some(ga) = sink.get(*a) {
                    for (o, &v) in ga.data.iter_mut().zip(&g.data) {
                        *o += alpha * v;
                    }
                }
            }
            Op::Sigmoid(a) => {
                if let Some(ga) = sink.get(*a) {
                    for ((o, &v), &s) in ga.data.iter_mut().zip(&g.data).zip(&y.data) {
                        *o += v * s * (1.0 - s);
                    }
                }
            }
            Op::Tanh(a) => {
                if let Some(ga) = sink.get(*a) {
                    for ((o, &v), &t) in ga.data.iter_mut().zip(&g.data).zip(&y.data) {
                        *o += v * (1.0 - t * t);
                    }
                }
            }
            Op::Ln(a) => {
                let x = self.value(*a);
                if let Some(ga) = sink.get(*a) {
                    for ((o, &v), &xv) in ga.data.iter_mut().zip(&g.data).zip(&x.data) {
                        *o += v / xv;
                    }
                }
            }
            Op::Clamp(a, lo, hi) => {
                let x = self.value(*a);
                if let Some(ga) = sink.get(*a) {
                    for ((o, &v), &xv) in ga.data.iter_mut().zip(&g.data).zip(&x.data) {
                        if xv >= *lo && xv <= *hi {
                            *o += v;
                        }
                    }
                }
            }
            Op::SoftmaxRows(a) => {
                if let Some(ga) = sink.get(*a) {
                    for r in 0..y.rows {
                        let (yr, gr) = (y.row(r), g.row(r));
                        let dot: f64 = yr.iter().zip(gr).map(|(p, q)| p * q).sum();
                        for ((o, &p), &q) in ga.row_mut(r).iter_mut().zip(yr).zip(gr) {
                            *o += p * (q - dot);
                        }
                    }
                }
            }
            Op::ConcatCols(parts) => {
                let mut offset = 0;
                for &p in parts {
                    let cols = self.value(p).cols;
                    if let Some(gp) = sink.get(p) {
                        for r in 0..g.rows {
                            for (o, &v) in gp
                                .row_mut(r)
                                .iter_mut()
                                .zip(&g.row(r)[offset..offset + cols])
                            {
                                *o += v;
                            }
                        }
                    }
                    offset += cols;
                }
            }
            Op::ConcatRows(parts) => {
                let mut offset = 0;
                for &p in parts {
                    let len = self.value(p).len();
                    if let Some(gp) = sink.get(p) {
                        for (o, &v) in gp.data.iter_mut().zip(&g.data[offset..offset + len]) {
                            *o += v;
                        }
                    }
                    offset += len;
                }
            }
            Op::GatherRows(a, idx) => {
                if let Some(ga) = sink.get(*a) {
                    for (i, &src) in idx.iter().enumerate() {
                        for (o, &v) in ga.row_mut(src).iter_mut().zip(g.row(i)) {
                            *o += v;
                        }
                    }
                }
            }
            Op::SliceRows(a, start) => {
                if let Some(ga) = sink.get(*a) {
                    let offset = start * ga.cols;
                    for (o, &v) in ga.data[offset..offset + g.len()].iter_mut().zip(&g.data) {
                        *o += v;
                    }
                }
            }
            Op::SliceCols(a, start) => {
                if let Some(ga) = sink.get(*a) {
                    for r in 0..g.rows {
                        for (o, &v) in ga.row_mut(r)[*start..start + g.cols]
                            .iter_mut()
                            .zip(g.row(r))
                        {
                            *o += v;
                        }
                    }
                }
            }
            Op::Reshape(a) => {
                if let Some(ga) = sink.get(*a) {
                    for (o, &v) in ga.data.iter_mut().zip(&g.data) {
                        *o += v;
                    }
                }
            }
            Op::ColumnMax(a, arg) => {
                if let Some(ga) = sink.get(*a) {
                    for (c, &r) in arg.iter().enumerate() {
                        *ga.at_mut(r, c) += g.data[c];
                    }
                }
            }
            Op::Unfold(a, k) => {
                if let Some(ga) = sink.get(*a) {
                    let cols = ga.cols;
                    for w in 0..g.rows {
                        let dst = &mut ga.data[w * cols..(w + k) * cols];
                        for (o, &v) in dst.iter_mut().zip(g.row(w)) {
                            *o += v;
                        }
                    }
                }
            }
            Op::PadRows(a, before) => {
                if let Some(ga) = sink.get(*a) {
                    let offset = before * ga.cols;
                    let len = ga.len();
                    for (o, &v) in ga.data.iter_mut().zip(&g.data[offset..offset + len]) {
                        *o += v;
                    }
                }
            }
            Op::ScatterCols(a, map) => {
                if let Some(ga) = sink.get(*a) {
                    for (i, &dst) in map.iter().enumerate() {
                        ga.data[i] += g.data[dst];
                    }
                }
            }
            Op::Sum(a) => {
                if let Some(ga) = sink.get(*a) {
                    let v = g.data[0];
                    ga.data.iter_mut().for_each(|o| *o += v);
                }
            }
            Op::StraightThrough(a) => {
                if let Some(ga) = sink.get(*a) {
                    ga.add_assign(g);
                }
            }
            Op::GateLookup(gates, table, owner) => {
                let z = self.value(*gates);
                let d = self.value(*table);
                let diff: Vec<f64> = d.row(1).iter().zip(d.row(0)).map(|(a, b)| a - b).collect();
                if let Some(gz) = sink.get(*gates) {
                    for (j, &s) in owner.iter().enumerate() {
                        gz.data[s] += g.row(j).iter().zip(&diff).map(|(p, q)| p * q).sum::<f64>();
                    }
                }
                if let Some(gd) = sink.get(*table) {
                    for (j, &s) in owner.iter().enumerate() {
                        let row = if z.data[s] > 0.5 { 1 } else { 0 };
                        for (o, &v) in gd.row_mut(row).iter_mut().zip(g.row(j)) {
                            *o += v;
                        }
                    }
                }
            }
        }
    }
}

struct Sink<'a, 'p> {
    nodes: &'a [Node<'p>],
    grads: &'a mut [Option<Tensor>],
    params: &'a mut [Tensor],
}

impl Sink<'_, '_> {
    fn get(&mut self, v: Var) -> Option<&mut Tensor> {
        let node = &self.nodes[v.0];
        if !node.needs_grad {
            return None;
        }
        let shape = match &node.value {
            Value::Owned(t) => t.shape(),
            Value::Borrowed(t) => t.shape(),
        };
        match node.op {
            Op::Constant => None,
            Op::Param(id) => {
                let buf = &mut self.params[id];
                debug_assert_eq!(buf.shape(), shape, "gradient buffer shape");
                Some(buf)
            }
            _ => Some(self.grads[v.0].get_or_insert_with(|| Tensor::zeros(shape.0, shape.1))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Central differences of `f` with respect to every entry of `x`.
    fn numeric_grad(x: &Tensor, f: impl Fn(&Tensor) -> f64) -> Tensor {
        let h = 1e-5;
        let mut out = Tensor::zeros(x.rows, x.cols);
        for i in 0..x.len() {
            let mut plus = x.clone();
            plus.data[i] += h;
            let mut minus = x.clone();
            minus.data[i] -= h;
            out.data[i] = (f(&plus) - f(&minus)) / (2.0 * h);
        }
        out
    }

    fn assert_close(a: &Tensor, b: &Tensor, tol: f64) {
        for (x, y) in a.data.iter().zip(&b.data) {
            assert!(
                (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs())),
                "{x} vs {y}"
            );
        }
    }

    fn check(x: Tensor, build: impl Fn(&mut Tape, Var) -> Var) {
        let eval = |t: &Tensor| {
            let mut tape = Tape::new();
            let v = tape.param(0, t);
            let out = build(&mut tape, v);
            let s = tape.sum(out);
            tape.scalar(s)
        };
        let mut tape = Tape::new();
        let v = tape.param(0, &x);
        let out = build(&mut tape, v);
        let s = tape.sum(out);
        let mut grads = vec![Tensor::zeros(x.rows, x.cols)];
        tape.backward(s, 1.0, &mut grads);
        assert_close(&grads[0], &numeric_grad(&x, eval), 1e-6);
    }

    fn sample(rows: usize, cols: usize) -> Tensor {
        let data = (0..rows * cols)
            .map(|i| ((i * 37 % 11) as f64 - 5.0) / 7.0)
            .collect();
        Tensor::from_vec(rows, cols, data)
    }

    #[test]
    fn matmul_family() {
        let w = sample(3, 4);
        check(sample(2, 4), |t, x| {
            let w = t.constant(w.clone());
            let y = t.matmul_nt(x, w);
            t.tanh(y)
        });
        check(sample(4, 3), |t, x| {
            let a = t.constant(sample(2, 4));
            let y = t.matmul(a, x);
            t.mul(y, y)
        });
    }

    #[test]
    fn softmax_mix_and_log() {
        check(sample(1, 5), |t, x| {
            let p = t.softmax_rows(x);
            let q = t.scatter_cols(p, &[0, 1, 0, 2, 1], 3);
            let pick = t.slice_cols(q, 1, 1);
            t.ln(pick)
        });
    }

    #[test]
    fn structural_ops() {
        check(sample(4, 3), |t, x| {
            let p = t.pad_rows(x, 1, 1);
            let u = t.unfold(p, 3);
            let m = t.column_max(u);
            let s = t.sigmoid(m);
            let r = t.reshape(s, 3, 3);
            let g = t.gather_rows(r, &[2, 0, 2]);
            t.slice_rows(g, 1, 2)
        });
        check(sample(2, 3), |t, x| {
            let a = t.concat_cols(&[x, x]);
            let b = t.concat_rows(&[x, x]);
            let bt = t.matmul_nt(b, b);
            let row = t.slice_cols(a, 1, 4);
            let row = t.slice_rows(row, 1, 1);
            let y = t.add_row(bt, row);
            let y = t.affine(y, -2.0, 1.0);
            let z = t.sub(y, bt);
            t.clamp(z, -3.0, 3.0)
        });
    }

    #[test]
    fn straight_through_passes_gradient() {
        let x = Tensor::row_vector(vec![0.2, 0.7]);
        let mut tape = Tape::new();
        let v = tape.param(0, &x);
        let z = tape.straight_through(v, 0.5);
        assert_eq!(tape.value(z).data, [0.0, 1.0]);
        let w = tape.constant(Tensor::row_vector(vec![3.0, -2.0]));
        let y = tape.mul(z, w);
        let s = tape.sum(y);
        let mut grads = vec![Tensor::zeros(1, 2)];
        tape.backward(s, 1.0, &mut grads);
        assert_eq!(grads[0].data, [3.0, -2.0]);
    }

    #[test]
    fn gate_lookup_matches_linear_form() {
        let d = sample(2, 3);
        let z = Tensor::row_vector(vec![1.0, 0.0]);
        let owner = [0, 0, 1];
        // lookup route
        let mut tape = Tape::new();
        let zv = tape.param(0, &z);
        let dv = tape.param(1, &d);
        let g = tape.gate_lookup(zv, dv, &owner);
        let w = tape.constant(sample(3, 3));
        let y = tape.mul(g, w);
        let s = tape.sum(y);
        let mut lookup = vec![Tensor::zeros(1, 2), Tensor::zeros(2, 3)];
        tape.backward(s, 1.0, &mut lookup);
        // linear route: d0 + z · (d1 - d0)
        let mut tape = Tape::new();
        let zv = tape.param(0, &z);
        let dv = tape.param(1, &d);
        let d0 = tape.slice_rows(dv, 0, 1);
        let d1 = tape.slice_rows(dv, 1, 1);
        let diff = tape.sub(d1, d0);
        let zc = tape.reshape(zv, 2, 1);
        let per_sentence = tape.matmul(zc, diff);
        let per_sentence = tape.add_row(per_sentence, d0);
        let g2 = tape.gather_rows(per_sentence, &owner);
        let w = tape.constant(sample(3, 3));
        let y = tape.mul(g2, w);
        let s = tape.sum(y);
        let mut linear = vec![Tensor::zeros(1, 2), Tensor::zeros(2, 3)];
        tape.backward(s, 1.0, &mut linear);
        assert_close(&lookup[0], &linear[0], 1e-12);
        assert_close(&lookup[1], &linear[1], 1e-12);
    }
}
