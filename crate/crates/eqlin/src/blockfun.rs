//! Block operator matrix functions with polynomial, product and Schur
//! complement entries, plus pointwise evaluation.

use num_complex::Complex64;

use crate::algebra::{CMatrix, MatrixPolynomial};
use crate::error::{Error, Result};
use crate::spectra;

/// Reciprocal condition floor below which D(lambda) counts as an excluded
/// evaluation point for a Schur entry.
pub const SCHUR_EVAL_RCOND: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Space layouts
// ---------------------------------------------------------------------------

/// Dimensions of the direct summands H_1, ..., H_n and their offsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceLayout {
    dims: Vec<usize>,
    offsets: Vec<usize>,
}

impl SpaceLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::DimensionMismatch(
                "space dimensions must be positive".into(),
            ));
        }
        let mut offsets = Vec::with_capacity(dims.len() + 1);
        let mut acc = 0;
        for &d in &dims {
            offsets.push(acc);
            acc += d;
        }
        offsets.push(acc);
        Ok(Self { dims, offsets })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn offset(&self, i: usize) -> usize {
        self.offsets[i]
    }

    pub fn total(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }
}

// ---------------------------------------------------------------------------
// Excluded sets
// ---------------------------------------------------------------------------

/// The finite set of lambda at which a construction is undefined.
#[derive(Debug, Clone)]
pub struct ExcludedSet {
    points: Vec<Complex64>,
    description: String,
}

impl ExcludedSet {
    pub fn new(points: Vec<Complex64>, description: impl Into<String>) -> Self {
        Self {
            points,
            description: description.into(),
        }
    }

    pub fn empty() -> Self {
        Self {
            points: Vec::new(),
            description: String::new(),
        }
    }

    pub fn origin() -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0)], "{0}")
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn union(&self, other: &ExcludedSet) -> ExcludedSet {
        let mut points = self.points.clone();
        for p in &other.points {
            if !points.iter().any(|q| (p - q).norm() <= 1e-12) {
                points.push(*p);
            }
        }
        let description = match (self.description.is_empty(), other.description.is_empty()) {
            (true, _) => other.description.clone(),
            (_, true) => self.description.clone(),
            _ if self.description == other.description => self.description.clone(),
            _ => format!("{} u {}", self.description, other.description),
        };
        ExcludedSet {
            points,
            description,
        }
    }

    pub fn contains_near(&self, lambda: Complex64, radius: f64) -> bool {
        self.points.iter().any(|p| (lambda - p).norm() <= radius)
    }
}

// ---------------------------------------------------------------------------
// Entries
// ---------------------------------------------------------------------------

/// One block of an operator matrix function.
#[derive(Debug, Clone, PartialEq)]
pub enum Entry {
    Polynomial(MatrixPolynomial),
    /// M_1(lambda) ... M_k(lambda); factor j maps H_j -> H_{j-1}.
    Product(Vec<MatrixPolynomial>),
    /// A(lambda) - B(lambda) D(lambda)^{-1} C(lambda).
    SchurComplement {
        a: MatrixPolynomial,
        b: MatrixPolynomial,
        c: MatrixPolynomial,
        d: MatrixPolynomial,
    },
}

impl Entry {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Entry::Polynomial(MatrixPolynomial::zero(rows, cols))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Entry::Polynomial(_) => Ok(()),
            Entry::Product(factors) => {
                if factors.is_empty() {
                    return Err(Error::DimensionMismatch(
                        "product entry needs at least one factor".into(),
                    ));
                }
                for w in factors.windows(2) {
                    if w[0].col_dim() != w[1].row_dim() {
                        return Err(Error::DimensionMismatch(format!(
                            "product factor chain broken: {}x{} then {}x{}",
                            w[0].row_dim(),
                            w[0].col_dim(),
                            w[1].row_dim(),
                            w[1].col_dim()
                        )));
                    }
                }
                Ok(())
            }
            Entry::SchurComplement { a, b, c, d } => {
                if d.row_dim() != d.col_dim() {
                    return Err(Error::DimensionMismatch("Schur D must be square".into()));
                }
                if b.row_dim() != a.row_dim() || b.col_dim() != d.row_dim() {
                    return Err(Error::DimensionMismatch(format!(
                        "Schur B is {}x{}, expected {}x{}",
                        b.row_dim(),
                        b.col_dim(),
                        a.row_dim(),
                        d.row_dim()
                    )));
                }
                if c.row_dim() != d.row_dim() || c.col_dim() != a.col_dim() {
                    return Err(Error::DimensionMismatch(format!(
                        "Schur C is {}x{}, expected {}x{}",
                        c.row_dim(),
                        c.col_dim(),
                        d.row_dim(),
                        a.col_dim()
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn row_dim(&self) -> usize {
        match self {
            Entry::Polynomial(p) => p.row_dim(),
            Entry::Product(factors) => factors[0].row_dim(),
            Entry::SchurComplement { a, .. } => a.row_dim(),
        }
    }

    pub fn col_dim(&self) -> usize {
        match self {
            Entry::Polynomial(p) => p.col_dim(),
            Entry::Product(factors) => factors.last().expect("nonempty").col_dim(),
            Entry::SchurComplement { a, .. } => a.col_dim(),
        }
    }

    pub fn as_polynomial(&self) -> Option<&MatrixPolynomial> {
        match self {
            Entry::Polynomial(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Entry::Polynomial(p) if p.is_zero())
    }

    /// Evaluate at a point. Schur entries solve with D(lambda) rather than
    /// inverting it, and reject lambda where D(lambda) is near-singular.
    pub fn eval(&self, lambda: Complex64) -> Result<CMatrix> {
        match self {
            Entry::Polynomial(p) => Ok(p.eval(lambda)),
            Entry::Product(factors) => {
                let mut acc = factors[0].eval(lambda);
                for f in &factors[1..] {
                    acc = acc.matmul(&f.eval(lambda))?;
                }
                Ok(acc)
            }
            Entry::SchurComplement { a, b, c, d } => {
                let dv = d.eval(lambda);
                if dv.rcond() < SCHUR_EVAL_RCOND {
                    return Err(Error::EvaluationAtExcludedPoint {
                        lambda,
                        context: "Schur entry: D(lambda) is numerically singular".into(),
                    });
                }
                let solve = dv.lu()?.solve(&c.eval(lambda))?;
                let bv = b.eval(lambda).matmul(&solve)?;
                a.eval(lambda).sub(&bv)
            }
        }
    }
}

/// Points at which an entry is undefined: empty for polynomial and product
/// entries, the polynomial eigenvalues of D for a Schur entry.
pub fn entry_excluded_points(entry: &Entry) -> Result<ExcludedSet> {
    match entry {
        Entry::Polynomial(_) | Entry::Product(_) => Ok(ExcludedSet::empty()),
        Entry::SchurComplement { d, .. } => {
            let deg = d.trimmed_degree().as_fin().unwrap_or(0).max(0) as usize;
            let bound = deg * d.row_dim();
            if bound == 0 {
                // constant D: invertible or degenerate, either way no roots
                let points = Vec::new();
                return Ok(ExcludedSet::new(points, "sigma(D)"));
            }
            let roots = spectra::det_roots_fn(|l| Ok(d.eval(l)), bound)?;
            Ok(ExcludedSet::new(roots, "sigma(D)"))
        }
    }
}

// ---------------------------------------------------------------------------
// Block operator functions
// ---------------------------------------------------------------------------

/// n x n grid of entries between direct sums of spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperatorFunction {
    rows: SpaceLayout,
    cols: SpaceLayout,
    entries: Vec<Vec<Entry>>,
}

impl BlockOperatorFunction {
    pub fn new(rows: SpaceLayout, cols: SpaceLayout, entries: Vec<Vec<Entry>>) -> Result<Self> {
        let n = rows.len();
        if cols.len() != n || entries.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "grid must be square: {} row spaces, {} col spaces, {} entry rows",
                n,
                cols.len(),
                entries.len()
            )));
        }
        for (j, row) in entries.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "entry row {j} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (i, e) in row.iter().enumerate() {
                e.validate()?;
                if e.row_dim() != rows.dims()[j] || e.col_dim() != cols.dims()[i] {
                    return Err(Error::DimensionMismatch(format!(
                        "entry ({j},{i}) is {}x{}, layout slot is {}x{}",
                        e.row_dim(),
                        e.col_dim(),
                        rows.dims()[j],
                        cols.dims()[i]
                    )));
                }
            }
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    /// One-entry grid.
    pub fn single(entry: Entry) -> Result<Self> {
        entry.validate()?;
        let rows = SpaceLayout::new(vec![entry.row_dim()])?;
        let cols = SpaceLayout::new(vec![entry.col_dim()])?;
        Ok(Self {
            rows,
            cols,
            entries: vec![vec![entry]],
        })
    }

    /// Square grid of polynomial entries over one layout.
    pub fn from_poly_grid(layout: SpaceLayout, grid: Vec<Vec<MatrixPolynomial>>) -> Result<Self> {
        let entries = grid
            .into_iter()
            .map(|row| row.into_iter().map(Entry::Polynomial).collect())
            .collect();
        Self::new(layout.clone(), layout, entries)
    }

    pub fn grid_size(&self) -> usize {
        self.rows.len()
    }

    pub fn row_layout(&self) -> &SpaceLayout {
        &self.rows
    }

    pub fn col_layout(&self) -> &SpaceLayout {
        &self.cols
    }

    pub fn total_rows(&self) -> usize {
        self.rows.total()
    }

    pub fn total_cols(&self) -> usize {
        self.cols.total()
    }

    pub fn entry(&self, j: usize, i: usize) -> &Entry {
        &self.entries[j][i]
    }

    pub fn entries(&self) -> &Vec<Vec<Entry>> {
        &self.entries
    }

    /// Union of entry exclusions: sigma(D) over all Schur entries.
    pub fn excluded_points(&self) -> Result<ExcludedSet> {
        let mut acc = ExcludedSet::empty();
        for row in &self.entries {
            for e in row {
                let ex = entry_excluded_points(e)?;
                if !ex.is_empty() {
                    acc = acc.union(&ex);
                }
            }
        }
        Ok(acc)
    }

    /// Assemble the dense value at lambda.
    pub fn eval(&self, lambda: Complex64) -> Result<CMatrix> {
        let mut out = CMatrix::zeros(self.total_rows(), self.total_cols());
        for (j, row) in self.entries.iter().enumerate() {
            for (i, e) in row.iter().enumerate() {
                if e.is_zero() {
                    continue;
                }
                let v = e.eval(lambda)?;
                out.set_block(self.rows.offset(j), self.cols.offset(i), &v);
            }
        }
        Ok(out)
    }

    /// True where a block is structurally nonzero (any coefficient above
    /// `tol` relative to the grid's largest coefficient).
    pub fn mask(&self, tol: f64) -> Vec<Vec<bool>> {
        let mut scale: f64 = 0.0;
        for row in &self.entries {
            for e in row {
                if let Entry::Polynomial(p) = e {
                    scale = scale.max(p.coeff_scale());
                }
            }
        }
        let cut = tol * scale.max(1.0);
        self.entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| match e {
                        Entry::Polynomial(p) => p.coeff_scale() > cut,
                        _ => true,
                    })
                    .collect()
            })
            .collect()
    }

    /// All entries polynomial?
    pub fn is_polynomial(&self) -> bool {
        self.entries
            .iter()
            .all(|row| row.iter().all(|e| matches!(e, Entry::Polynomial(_))))
    }
}
