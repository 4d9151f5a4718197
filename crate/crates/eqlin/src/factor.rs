//! Factor functions: lambda-dependent matrix expressions as a DAG.
//!
//! The equivalence factors E and F are not matrix polynomials; they mix
//! constants, positive and negative lambda powers, polynomial evaluation,
//! pointwise inverses, block assembly, sums and products. A
//! `FactorFunction` stores such an expression as a node arena in topological
//! order (children always precede parents) with fixed, queryable dimensions.

use num_complex::Complex64;

use crate::algebra::{mat_inv, CMatrix, MatrixPolynomial};
use crate::blockfun::Entry;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub enum FactorNode {
    Constant(CMatrix),
    /// lambda^power * I_dim with integer power (negative needs lambda != 0).
    LambdaPow { power: i32, dim: usize },
    Poly(MatrixPolynomial),
    Scaled { factor: Complex64, arg: usize },
    Sum(Vec<usize>),
    Product(Vec<usize>),
    Inverse(usize),
    /// Sparse block assembly; unlisted blocks are zero.
    Block {
        row_dims: Vec<usize>,
        col_dims: Vec<usize>,
        entries: Vec<(usize, usize, usize)>,
    },
}

#[derive(Debug, Clone)]
pub struct FactorFunction {
    nodes: Vec<FactorNode>,
    dims: Vec<(usize, usize)>,
    root: usize,
}

/// Incremental builder; node ids are indices into the arena.
#[derive(Debug, Default)]
pub struct FactorBuilder {
    nodes: Vec<FactorNode>,
    dims: Vec<(usize, usize)>,
}

impl FactorBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, node: FactorNode, dims: (usize, usize)) -> usize {
        self.nodes.push(node);
        self.dims.push(dims);
        self.nodes.len() - 1
    }

    pub fn dims(&self, id: usize) -> (usize, usize) {
        self.dims[id]
    }

    pub fn constant(&mut self, m: CMatrix) -> usize {
        let d = (m.rows(), m.cols());
        self.push(FactorNode::Constant(m), d)
    }

    pub fn identity(&mut self, n: usize) -> usize {
        self.constant(CMatrix::identity(n))
    }

    pub fn lambda_pow(&mut self, power: i32, dim: usize) -> usize {
        self.push(FactorNode::LambdaPow { power, dim }, (dim, dim))
    }

    pub fn poly(&mut self, p: MatrixPolynomial) -> usize {
        let d = (p.row_dim(), p.col_dim());
        self.push(FactorNode::Poly(p), d)
    }

    pub fn scaled(&mut self, factor: Complex64, arg: usize) -> usize {
        let d = self.dims[arg];
        self.push(FactorNode::Scaled { factor, arg }, d)
    }

    pub fn neg(&mut self, arg: usize) -> usize {
        self.scaled(Complex64::new(-1.0, 0.0), arg)
    }

    pub fn sum(&mut self, args: Vec<usize>) -> Result<usize> {
        let d = self.dims[args[0]];
        for &a in &args {
            if self.dims[a] != d {
                return Err(Error::DimensionMismatch(format!(
                    "sum of {:?} with {:?}",
                    d, self.dims[a]
                )));
            }
        }
        Ok(self.push(FactorNode::Sum(args), d))
    }

    pub fn product(&mut self, args: Vec<usize>) -> Result<usize> {
        let rows = self.dims[args[0]].0;
        let mut inner = self.dims[args[0]].1;
        for &a in &args[1..] {
            let (r, c) = self.dims[a];
            if r != inner {
                return Err(Error::DimensionMismatch(format!(
                    "product chain broken at node {a}: expected {inner} rows, got {r}"
                )));
            }
            inner = c;
        }
        Ok(self.push(FactorNode::Product(args), (rows, inner)))
    }

    pub fn inverse(&mut self, arg: usize) -> Result<usize> {
        let (r, c) = self.dims[arg];
        if r != c {
            return Err(Error::DimensionMismatch(format!(
                "inverse of non-square {r}x{c} node"
            )));
        }
        Ok(self.push(FactorNode::Inverse(arg), (r, c)))
    }

    /// Block assembly; entries are (block_row, block_col, node). Missing
    /// blocks are zero.
    pub fn block(
        &mut self,
        row_dims: Vec<usize>,
        col_dims: Vec<usize>,
        entries: Vec<(usize, usize, usize)>,
    ) -> Result<usize> {
        for &(r, c, id) in &entries {
            if r >= row_dims.len() || c >= col_dims.len() {
                return Err(Error::DimensionMismatch(format!(
                    "block slot ({r},{c}) outside {}x{} grid",
                    row_dims.len(),
                    col_dims.len()
                )));
            }
            let (hr, hc) = self.dims[id];
            if hr != row_dims[r] || hc != col_dims[c] {
                return Err(Error::DimensionMismatch(format!(
                    "block slot ({r},{c}) expects {}x{}, node is {hr}x{hc}",
                    row_dims[r], col_dims[c]
                )));
            }
        }
        let total = (row_dims.iter().sum(), col_dims.iter().sum());
        Ok(self.push(
            FactorNode::Block {
                row_dims,
                col_dims,
                entries,
            },
            total,
        ))
    }

    /// diag(a, b) as a 2x2 block.
    pub fn direct_sum(&mut self, a: usize, b: usize) -> Result<usize> {
        let (ar, ac) = self.dims[a];
        let (br, bc) = self.dims[b];
        self.block(vec![ar, br], vec![ac, bc], vec![(0, 0, a), (1, 1, b)])
    }

    /// Import another factor function's graph; returns its remapped root.
    pub fn graft(&mut self, other: &FactorFunction) -> usize {
        let base = self.nodes.len();
        for (node, &dims) in other.nodes.iter().zip(&other.dims) {
            let remapped = match node {
                FactorNode::Constant(m) => FactorNode::Constant(m.clone()),
                FactorNode::LambdaPow { power, dim } => FactorNode::LambdaPow {
                    power: *power,
                    dim: *dim,
                },
                FactorNode::Poly(p) => FactorNode::Poly(p.clone()),
                FactorNode::Scaled { factor, arg } => FactorNode::Scaled {
                    factor: *factor,
                    arg: arg + base,
                },
                FactorNode::Sum(args) => {
                    FactorNode::Sum(args.iter().map(|a| a + base).collect())
                }
                FactorNode::Product(args) => {
                    FactorNode::Product(args.iter().map(|a| a + base).collect())
                }
                FactorNode::Inverse(arg) => FactorNode::Inverse(arg + base),
                FactorNode::Block {
                    row_dims,
                    col_dims,
                    entries,
                } => FactorNode::Block {
                    row_dims: row_dims.clone(),
                    col_dims: col_dims.clone(),
                    entries: entries.iter().map(|&(r, c, id)| (r, c, id + base)).collect(),
                },
            };
            self.nodes.push(remapped);
            self.dims.push(dims);
        }
        other.root + base
    }

    /// Evaluator for a block-function entry.
    pub fn entry(&mut self, e: &Entry) -> Result<usize> {
        match e {
            Entry::Polynomial(p) => Ok(self.poly(p.clone())),
            Entry::Product(factors) => {
                let ids = factors.iter().map(|f| self.poly(f.clone())).collect();
                self.product(ids)
            }
            Entry::SchurComplement { a, b, c, d } => {
                let pa = self.poly(a.clone());
                let pb = self.poly(b.clone());
                let pc = self.poly(c.clone());
                let pd = self.poly(d.clone());
                let dinv = self.inverse(pd)?;
                let corr = self.product(vec![pb, dinv, pc])?;
                let neg = self.neg(corr);
                self.sum(vec![pa, neg])
            }
        }
    }

    pub fn finish(self, root: usize) -> FactorFunction {
        FactorFunction {
            nodes: self.nodes,
            dims: self.dims,
            root,
        }
    }
}

impl FactorFunction {
    pub fn rows(&self) -> usize {
        self.dims[self.root].0
    }

    pub fn cols(&self) -> usize {
        self.dims[self.root].1
    }

    pub fn nodes(&self) -> &[FactorNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn node_dims(&self) -> &[(usize, usize)] {
        &self.dims
    }

    /// Rebuild from raw parts (deserialization); validates topology.
    pub fn from_parts(nodes: Vec<FactorNode>, root: usize) -> Result<Self> {
        let mut b = FactorBuilder::new();
        for node in nodes {
            let id = match node {
                FactorNode::Constant(m) => b.constant(m),
                FactorNode::LambdaPow { power, dim } => b.lambda_pow(power, dim),
                FactorNode::Poly(p) => b.poly(p),
                FactorNode::Scaled { factor, arg } => {
                    Self::check_ref(arg, b.nodes.len())?;
                    b.scaled(factor, arg)
                }
                FactorNode::Sum(args) => {
                    for &a in &args {
                        Self::check_ref(a, b.nodes.len())?;
                    }
                    b.sum(args)?
                }
                FactorNode::Product(args) => {
                    for &a in &args {
                        Self::check_ref(a, b.nodes.len())?;
                    }
                    b.product(args)?
                }
                FactorNode::Inverse(arg) => {
                    Self::check_ref(arg, b.nodes.len())?;
                    b.inverse(arg)?
                }
                FactorNode::Block {
                    row_dims,
                    col_dims,
                    entries,
                } => {
                    for &(_, _, id) in &entries {
                        Self::check_ref(id, b.nodes.len())?;
                    }
                    b.block(row_dims, col_dims, entries)?
                }
            };
            let _ = id;
        }
        if root >= b.nodes.len() {
            return Err(Error::Schema(format!("factor root {root} out of range")));
        }
        Ok(b.finish(root))
    }

    fn check_ref(arg: usize, len: usize) -> Result<()> {
        if arg >= len {
            return Err(Error::Schema(format!(
                "node reference {arg} is not topologically ordered (arena size {len})"
            )));
        }
        Ok(())
    }

    /// Singleton helpers.
    pub fn identity(n: usize) -> Self {
        let mut b = FactorBuilder::new();
        let id = b.identity(n);
        b.finish(id)
    }

    pub fn constant(m: CMatrix) -> Self {
        let mut b = FactorBuilder::new();
        let id = b.constant(m);
        b.finish(id)
    }

    pub fn poly(p: MatrixPolynomial) -> Self {
        let mut b = FactorBuilder::new();
        let id = b.poly(p);
        b.finish(id)
    }

    pub fn from_entry(e: &Entry) -> Result<Self> {
        let mut b = FactorBuilder::new();
        let id = b.entry(e)?;
        Ok(b.finish(id))
    }

    /// Grid of polynomials as one block node.
    pub fn from_poly_grid(grid: &[Vec<MatrixPolynomial>]) -> Result<Self> {
        let mut b = FactorBuilder::new();
        let row_dims: Vec<usize> = grid.iter().map(|r| r[0].row_dim()).collect();
        let col_dims: Vec<usize> = grid[0].iter().map(|p| p.col_dim()).collect();
        let mut entries = Vec::new();
        for (r, row) in grid.iter().enumerate() {
            for (c, p) in row.iter().enumerate() {
                if !p.is_zero() {
                    let id = b.poly(p.clone());
                    entries.push((r, c, id));
                }
            }
        }
        let root = b.block(row_dims, col_dims, entries)?;
        Ok(b.finish(root))
    }

    /// Evaluate at lambda, memoizing shared nodes.
    pub fn eval(&self, lambda: Complex64) -> Result<CMatrix> {
        let mut cache = self.eval_nodes(lambda)?;
        Ok(cache
            .get_mut(self.root)
            .and_then(Option::take)
            .expect("root evaluated"))
    }

    /// Values of all nodes up to the root at one point.
    pub fn eval_nodes(&self, lambda: Complex64) -> Result<Vec<Option<CMatrix>>> {
        let mut cache: Vec<Option<CMatrix>> = vec![None; self.nodes.len()];
        for id in 0..=self.root {
            let value = match &self.nodes[id] {
                FactorNode::Constant(m) => m.clone(),
                FactorNode::LambdaPow { power, dim } => {
                    let z = if *power >= 0 {
                        lambda.powi(*power)
                    } else {
                        if lambda.norm() == 0.0 {
                            return Err(Error::EvaluationAtExcludedPoint {
                                lambda,
                                context: "negative lambda power at 0".into(),
                            });
                        }
                        lambda.powi(*power)
                    };
                    CMatrix::identity(*dim).scale(z)
                }
                FactorNode::Poly(p) => p.eval(lambda),
                FactorNode::Scaled { factor, arg } => {
                    cache[*arg].as_ref().expect("child evaluated").scale(*factor)
                }
                FactorNode::Sum(args) => {
                    let mut acc = cache[args[0]].as_ref().expect("child evaluated").clone();
                    for &a in &args[1..] {
                        acc = acc.add(cache[a].as_ref().expect("child evaluated"))?;
                    }
                    acc
                }
                FactorNode::Product(args) => {
                    let mut acc = cache[args[0]].as_ref().expect("child evaluated").clone();
                    for &a in &args[1..] {
                        acc = acc.matmul(cache[a].as_ref().expect("child evaluated"))?;
                    }
                    acc
                }
                FactorNode::Inverse(arg) => {
                    mat_inv(cache[*arg].as_ref().expect("child evaluated"))?
                }
                FactorNode::Block {
                    row_dims,
                    col_dims,
                    entries,
                } => {
                    let total_r: usize = row_dims.iter().sum();
                    let total_c: usize = col_dims.iter().sum();
                    let mut out = CMatrix::zeros(total_r, total_c);
                    let row_off: Vec<usize> = row_dims
                        .iter()
                        .scan(0, |acc, d| {
                            let o = *acc;
                            *acc += d;
                            Some(o)
                        })
                        .collect();
                    let col_off: Vec<usize> = col_dims
                        .iter()
                        .scan(0, |acc, d| {
                            let o = *acc;
                            *acc += d;
                            Some(o)
                        })
                        .collect();
                    for &(r, c, nid) in entries {
                        out.set_block(
                            row_off[r],
                            col_off[c],
                            cache[nid].as_ref().expect("child evaluated"),
                        );
                    }
                    out
                }
            };
            cache[id] = Some(value);
        }
        Ok(cache)
    }
}

/// Permutation-conjugated embedding: place `inner` so that it couples the
/// given scalar output rows and input columns of an identity operator of the
/// stated total size. Rows and columns not listed map one-to-one in
/// increasing order.
pub fn scatter(
    inner: &FactorFunction,
    out_rows: &[usize],
    in_cols: &[usize],
    total_rows: usize,
    total_cols: usize,
) -> Result<FactorFunction> {
    if inner.rows() != out_rows.len() || inner.cols() != in_cols.len() {
        return Err(Error::DimensionMismatch(format!(
            "scatter: inner is {}x{}, slots are {}x{}",
            inner.rows(),
            inner.cols(),
            out_rows.len(),
            in_cols.len()
        )));
    }
    let rest_rows: Vec<usize> = (0..total_rows).filter(|r| !out_rows.contains(r)).collect();
    let rest_cols: Vec<usize> = (0..total_cols).filter(|c| !in_cols.contains(c)).collect();
    if rest_rows.len() != rest_cols.len() {
        return Err(Error::DimensionMismatch(
            "scatter: leftover rows and columns differ in size".into(),
        ));
    }
    let mut row_order = out_rows.to_vec();
    row_order.extend(&rest_rows);
    let mut col_order = in_cols.to_vec();
    col_order.extend(&rest_cols);
    let gather_rows = CMatrix::permutation(&row_order);
    let gather_cols = CMatrix::permutation(&col_order);
    let mut b = FactorBuilder::new();
    let inner_id = b.graft(inner);
    let rest_id = b.identity(rest_rows.len());
    let mid = b.direct_sum(inner_id, rest_id)?;
    let left = b.constant(gather_rows.transpose());
    let right = b.constant(gather_cols);
    let root = b.product(vec![left, mid, right])?;
    Ok(b.finish(root))
}
