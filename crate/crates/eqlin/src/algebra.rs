//! Dense complex matrix arithmetic and matrix-polynomial algebra.
//!
//! Everything downstream reduces to the types here: `CMatrix` holds a dense
//! complex matrix, `MatrixPolynomial` a coefficient list in ascending degree,
//! and `ExtInt` the degree arithmetic with a `-inf` sentinel for the zero
//! polynomial. The left polynomial division implemented on
//! `MatrixPolynomial` is what drives column reduction.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Reciprocal condition threshold below which a coefficient that must be
/// invertible is rejected.
pub const RCOND_INVERTIBLE: f64 = 1e-10;

/// Relative tolerance used when trimming trailing polynomial coefficients.
pub const TRIM_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Extended integers
// ---------------------------------------------------------------------------

/// Integer extended with a `-inf` sentinel, used for polynomial degrees.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub enum ExtInt {
    NegInf,
    Fin(i64),
}

pub use ExtInt::{Fin, NegInf};

impl std::ops::Add for ExtInt {
    type Output = ExtInt;

    /// `-inf + k = -inf`; finite values add normally.
    fn add(self, other: ExtInt) -> ExtInt {
        match (self, other) {
            (Fin(a), Fin(b)) => Fin(a + b),
            _ => NegInf,
        }
    }
}

impl ExtInt {
    pub fn is_neg_inf(self) -> bool {
        self == NegInf
    }

    /// Subtraction with a finite right-hand side.
    pub fn sub_fin(self, k: i64) -> ExtInt {
        match self {
            Fin(a) => Fin(a - k),
            NegInf => NegInf,
        }
    }

    pub fn as_fin(self) -> Option<i64> {
        match self {
            Fin(a) => Some(a),
            NegInf => None,
        }
    }
}

impl std::fmt::Display for ExtInt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NegInf => write!(f, "-inf"),
            Fin(v) => write!(f, "{v}"),
        }
    }
}

// ---------------------------------------------------------------------------
// Dense complex matrices
// ---------------------------------------------------------------------------

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl std::fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

impl CMatrix {
    /// Construct from row-major data, rejecting non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "matrix data length {} != {rows}x{cols}",
                data.len()
            )));
        }
        if let Some(z) = data.iter().find(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFiniteEntry(format!("{z}")));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, z) in entries.iter().enumerate() {
            m[(i, i)] = *z;
        }
        m
    }

    pub fn scalar(z: Complex64) -> Self {
        Self {
            rows: 1,
            cols: 1,
            data: vec![z],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Largest entry magnitude.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        (0..self.cols)
            .map(|c| (0..self.rows).map(|r| self[(r, c)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn add(&self, other: &CMatrix) -> Result<CMatrix> {
        self.check_same_shape(other, "add")?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn sub(&self, other: &CMatrix) -> Result<CMatrix> {
        self.check_same_shape(other, "sub")?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, z: Complex64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * z).collect(),
        }
    }

    pub fn neg(&self) -> CMatrix {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    pub fn matmul(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "matmul {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for c in 0..other.cols {
                    out[(r, c)] += a * other[(k, c)];
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    /// Copy `block` into this matrix with top-left corner at (r0, c0).
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &CMatrix) {
        for r in 0..block.rows {
            for c in 0..block.cols {
                self[(r0 + r, c0 + c)] = block[(r, c)];
            }
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |r, c| self[(r0 + r, c0 + c)])
    }

    /// Block-diagonal stack of two matrices.
    pub fn direct_sum(&self, other: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows + other.rows, self.cols + other.cols);
        out.set_block(0, 0, self);
        out.set_block(self.rows, self.cols, other);
        out
    }

    /// Permutation matrix sending input slot `perm[i]` to output slot `i`,
    /// i.e. `(P x)[i] = x[perm[i]]`.
    pub fn permutation(perm: &[usize]) -> CMatrix {
        let n = perm.len();
        let mut p = CMatrix::zeros(n, n);
        for (i, &j) in perm.iter().enumerate() {
            p[(i, j)] = Complex64::new(1.0, 0.0);
        }
        p
    }

    fn check_same_shape(&self, other: &CMatrix, op: &str) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{op} {}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn lu(&self) -> Result<Lu> {
        Lu::new(self)
    }

    /// Reciprocal 1-norm condition number; 0 for exactly singular input.
    pub fn rcond(&self) -> f64 {
        match Lu::new(self) {
            Ok(lu) => match lu.inverse() {
                Ok(inv) => {
                    let denom = self.one_norm() * inv.one_norm();
                    if denom == 0.0 {
                        if self.rows == 0 {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        1.0 / denom
                    }
                }
                Err(_) => 0.0,
            },
            Err(_) => 0.0,
        }
    }
}

/// Errors with `NumericallySingular` when the inverse is untrustworthy.
pub fn mat_inv(a: &CMatrix) -> Result<CMatrix> {
    const RCOND_FLOOR: f64 = 1e-14;
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "inverse of non-square {}x{}",
            a.rows, a.cols
        )));
    }
    let lu = a.lu()?;
    let inv = lu.inverse()?;
    let denom = a.one_norm() * inv.one_norm();
    let rcond = if denom == 0.0 { 1.0 } else { 1.0 / denom };
    if rcond < RCOND_FLOOR {
        return Err(Error::NumericallySingular {
            context: "mat_inv".into(),
            rcond,
            threshold: RCOND_FLOOR,
        });
    }
    Ok(inv)
}

/// Reject a required-invertible coefficient whose reciprocal condition is
/// at or below RCOND_INVERTIBLE, and hand back its inverse otherwise.
pub fn require_invertible(a: &CMatrix, context: &str) -> Result<CMatrix> {
    let rcond = a.rcond();
    if rcond <= RCOND_INVERTIBLE {
        return Err(Error::SingularLeadingCoefficient {
            context: context.into(),
            rcond,
        });
    }
    mat_inv(a)
}

// ---------------------------------------------------------------------------
// LU factorization
// ---------------------------------------------------------------------------

/// LU factorization with partial pivoting, PA = LU packed in one matrix.
pub struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
    swaps: usize,
}

impl Lu {
    pub fn new(a: &CMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "LU of non-square {}x{}",
                a.rows, a.cols
            )));
        }
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        for k in 0..n {
            let mut pivot = k;
            let mut best = lu[(k, k)].norm();
            for r in k + 1..n {
                let v = lu[(r, k)].norm();
                if v > best {
                    best = v;
                    pivot = r;
                }
            }
            if pivot != k {
                for c in 0..n {
                    let tmp = lu[(k, c)];
                    lu[(k, c)] = lu[(pivot, c)];
                    lu[(pivot, c)] = tmp;
                }
                perm.swap(k, pivot);
                swaps += 1;
            }
            let d = lu[(k, k)];
            if d.norm() == 0.0 {
                continue; // singular; surfaced by solve/inverse
            }
            for r in k + 1..n {
                let m = lu[(r, k)] / d;
                lu[(r, k)] = m;
                if m.re == 0.0 && m.im == 0.0 {
                    continue;
                }
                for c in k + 1..n {
                    let s = lu[(k, c)];
                    lu[(r, c)] -= m * s;
                }
            }
        }
        Ok(Self { lu, perm, swaps })
    }

    pub fn is_singular(&self) -> bool {
        (0..self.lu.rows).any(|i| self.lu[(i, i)].norm() == 0.0)
    }

    pub fn det(&self) -> Complex64 {
        let mut d = if self.swaps.is_multiple_of(2) {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(-1.0, 0.0)
        };
        for i in 0..self.lu.rows {
            d *= self.lu[(i, i)];
        }
        d
    }

    /// Solve A X = B for a matrix right-hand side.
    pub fn solve(&self, b: &CMatrix) -> Result<CMatrix> {
        let n = self.lu.rows;
        if b.rows != n {
            return Err(Error::DimensionMismatch(format!(
                "solve with rhs rows {} != {n}",
                b.rows
            )));
        }
        if self.is_singular() {
            return Err(Error::NumericallySingular {
                context: "lu solve".into(),
                rcond: 0.0,
                threshold: 0.0,
            });
        }
        let mut x = CMatrix::zeros(n, b.cols);
        for r in 0..n {
            for c in 0..b.cols {
                x[(r, c)] = b[(self.perm[r], c)];
            }
        }
        // forward substitution (unit lower)
        for r in 1..n {
            for k in 0..r {
                let m = self.lu[(r, k)];
                if m.re == 0.0 && m.im == 0.0 {
                    continue;
                }
                for c in 0..b.cols {
                    let s = x[(k, c)];
                    x[(r, c)] -= m * s;
                }
            }
        }
        // back substitution
        for r in (0..n).rev() {
            for k in r + 1..n {
                let m = self.lu[(r, k)];
                if m.re == 0.0 && m.im == 0.0 {
                    continue;
                }
                for c in 0..b.cols {
                    let s = x[(k, c)];
                    x[(r, c)] -= m * s;
                }
            }
            let d = self.lu[(r, r)];
            for c in 0..b.cols {
                x[(r, c)] /= d;
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        self.solve(&CMatrix::identity(self.lu.rows))
    }
}

// ---------------------------------------------------------------------------
// Matrix polynomials
// ---------------------------------------------------------------------------

/// Matrix polynomial stored as coefficients in ascending degree.
/// The zero polynomial is the empty coefficient list with degree `-inf`.
#[derive(Clone, PartialEq, Debug)]
pub struct MatrixPolynomial {
    row_dim: usize,
    col_dim: usize,
    coeffs: Vec<CMatrix>,
}

impl MatrixPolynomial {
    /// Build from coefficients; exactly-zero leading coefficients are dropped.
    pub fn new(row_dim: usize, col_dim: usize, coeffs: Vec<CMatrix>) -> Result<Self> {
        for (i, c) in coeffs.iter().enumerate() {
            if c.rows() != row_dim || c.cols() != col_dim {
                return Err(Error::DimensionMismatch(format!(
                    "coefficient {i} is {}x{}, expected {row_dim}x{col_dim}",
                    c.rows(),
                    c.cols()
                )));
            }
        }
        let mut p = Self {
            row_dim,
            col_dim,
            coeffs,
        };
        while p.coeffs.last().is_some_and(CMatrix::is_zero) {
            p.coeffs.pop();
        }
        Ok(p)
    }

    pub fn zero(row_dim: usize, col_dim: usize) -> Self {
        Self {
            row_dim,
            col_dim,
            coeffs: Vec::new(),
        }
    }

    pub fn constant(c: CMatrix) -> Self {
        let (r, n) = (c.rows(), c.cols());
        Self::new(r, n, vec![c]).expect("constant coefficient dims are consistent")
    }

    pub fn identity(n: usize) -> Self {
        Self::constant(CMatrix::identity(n))
    }

    /// The scalar polynomial `lambda^k`.
    pub fn lambda_pow(dim: usize, k: usize) -> Self {
        let mut coeffs = vec![CMatrix::zeros(dim, dim); k];
        coeffs.push(CMatrix::identity(dim));
        Self::new(dim, dim, coeffs).expect("power coefficients are consistent")
    }

    pub fn row_dim(&self) -> usize {
        self.row_dim
    }

    pub fn col_dim(&self) -> usize {
        self.col_dim
    }

    pub fn coeffs(&self) -> &[CMatrix] {
        &self.coeffs
    }

    /// Coefficient of `lambda^k`, zero matrix beyond the stored degree.
    pub fn coeff(&self, k: usize) -> CMatrix {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(|| CMatrix::zeros(self.row_dim, self.col_dim))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> ExtInt {
        if self.coeffs.is_empty() {
            NegInf
        } else {
            Fin(self.coeffs.len() as i64 - 1)
        }
    }

    pub fn leading(&self) -> Option<&CMatrix> {
        self.coeffs.last()
    }

    /// Largest coefficient max-norm; the scale used by relative trimming.
    pub fn coeff_scale(&self) -> f64 {
        self.coeffs.iter().map(CMatrix::max_norm).fold(0.0, f64::max)
    }

    /// Horner evaluation.
    pub fn eval(&self, lambda: Complex64) -> CMatrix {
        let mut acc = match self.coeffs.last() {
            None => return CMatrix::zeros(self.row_dim, self.col_dim),
            Some(top) => top.clone(),
        };
        for c in self.coeffs.iter().rev().skip(1) {
            acc = acc.scale(lambda);
            acc = acc.add(c).expect("coefficients share dimensions");
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.row_dim != other.row_dim || self.col_dim != other.col_dim {
            return Err(Error::DimensionMismatch(format!(
                "poly add {}x{} with {}x{}",
                self.row_dim, self.col_dim, other.row_dim, other.col_dim
            )));
        }
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for k in 0..n {
            coeffs.push(self.coeff(k).add(&other.coeff(k))?);
        }
        Self::new(self.row_dim, self.col_dim, coeffs)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, z: Complex64) -> Self {
        Self::new(
            self.row_dim,
            self.col_dim,
            self.coeffs.iter().map(|c| c.scale(z)).collect(),
        )
        .expect("scaling preserves dimensions")
    }

    /// Constant matrix times polynomial.
    pub fn lmul_const(&self, m: &CMatrix) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| m.matmul(c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(m.rows(), self.col_dim, coeffs)
    }

    /// Polynomial times constant matrix.
    pub fn rmul_const(&self, m: &CMatrix) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.matmul(m))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.row_dim, m.cols(), coeffs)
    }

    /// Coefficient convolution, `self * other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.col_dim != other.row_dim {
            return Err(Error::DimensionMismatch(format!(
                "poly mul {}x{} by {}x{}",
                self.row_dim, self.col_dim, other.row_dim, other.col_dim
            )));
        }
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.row_dim, other.col_dim));
        }
        let n = self.coeffs.len() + other.coeffs.len() - 1;
        let mut coeffs = vec![CMatrix::zeros(self.row_dim, other.col_dim); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let prod = a.matmul(b)?;
                coeffs[i + j] = coeffs[i + j].add(&prod)?;
            }
        }
        Self::new(self.row_dim, other.col_dim, coeffs)
    }

    /// Multiply by `lambda^k`.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![CMatrix::zeros(self.row_dim, self.col_dim); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Self::new(self.row_dim, self.col_dim, coeffs).expect("shift preserves dimensions")
    }

    /// Drop trailing coefficients of max-norm at most `tol * scale(self)`.
    pub fn trim(&self, tol: f64) -> Self {
        let scale = self.coeff_scale();
        let cut = tol * scale;
        let mut coeffs = self.coeffs.clone();
        while coeffs.last().is_some_and(|c| c.max_norm() <= cut) {
            coeffs.pop();
        }
        Self {
            row_dim: self.row_dim,
            col_dim: self.col_dim,
            coeffs,
        }
    }

    /// Drop trailing coefficients of max-norm at most the absolute cut.
    /// Used after row combinations, where exact cancellations leave pure
    /// roundoff that must be measured against the operands' scale, not the
    /// result's.
    pub fn trim_abs(&self, cut: f64) -> Self {
        let mut coeffs = self.coeffs.clone();
        while coeffs.last().is_some_and(|c| c.max_norm() <= cut) {
            coeffs.pop();
        }
        Self {
            row_dim: self.row_dim,
            col_dim: self.col_dim,
            coeffs,
        }
    }

    /// Effective degree after trimming at the default tolerance.
    pub fn trimmed_degree(&self) -> ExtInt {
        self.trim(TRIM_TOL).degree()
    }

    /// Left division: find K, R with `self = K * dv + R` and deg R < deg dv.
    ///
    /// Requires dv square with an invertible leading coefficient.
    pub fn left_divide(&self, dv: &Self) -> Result<(Self, Self)> {
        if self.col_dim != dv.col_dim {
            return Err(Error::DimensionMismatch(format!(
                "left divide: numerator cols {} != divisor cols {}",
                self.col_dim, dv.col_dim
            )));
        }
        if dv.row_dim != dv.col_dim {
            return Err(Error::DimensionMismatch(format!(
                "left divide by non-square {}x{}",
                dv.row_dim, dv.col_dim
            )));
        }
        let d_deg = match dv.degree() {
            NegInf => {
                return Err(Error::SingularLeadingCoefficient {
                    context: "left division by zero polynomial".into(),
                    rcond: 0.0,
                })
            }
            Fin(d) => d as usize,
        };
        let lead_inv = {
            let lead = dv.leading().expect("nonzero divisor has a leading coefficient");
            let rcond = lead.rcond();
            if rcond <= RCOND_INVERTIBLE {
                return Err(Error::SingularLeadingCoefficient {
                    context: "left division".into(),
                    rcond,
                });
            }
            mat_inv(lead)?
        };
        let n_deg = match self.degree() {
            NegInf => return Ok((Self::zero(self.row_dim, dv.row_dim), self.clone())),
            Fin(n) => n as usize,
        };
        if n_deg < d_deg {
            return Ok((Self::zero(self.row_dim, dv.row_dim), self.clone()));
        }
        let k_deg = n_deg - d_deg;
        let mut rem: Vec<CMatrix> = (0..=n_deg).map(|k| self.coeff(k)).collect();
        let mut quot = vec![CMatrix::zeros(self.row_dim, dv.row_dim); k_deg + 1];
        for m in (0..=k_deg).rev() {
            let km = rem[m + d_deg].matmul(&lead_inv)?;
            for j in 0..=d_deg {
                let upd = km.matmul(&dv.coeff(j))?;
                rem[m + j] = rem[m + j].sub(&upd)?;
            }
            quot[m] = km;
        }
        rem.truncate(d_deg);
        let k = Self::new(self.row_dim, dv.row_dim, quot)?;
        let r = Self::new(self.row_dim, self.col_dim, rem)?;
        Ok((k, r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SampleRng;

    pub(crate) fn random_matrix(rng: &mut SampleRng, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| rng.next_complex())
    }

    pub(crate) fn random_invertible(rng: &mut SampleRng, n: usize) -> CMatrix {
        let mut m = random_matrix(rng, n, n);
        for i in 0..n {
            m[(i, i)] += Complex64::new(2.0, 0.0);
        }
        m
    }

    pub(crate) fn random_poly(
        rng: &mut SampleRng,
        rows: usize,
        cols: usize,
        deg: usize,
    ) -> MatrixPolynomial {
        let coeffs = (0..=deg).map(|_| random_matrix(rng, rows, cols)).collect();
        MatrixPolynomial::new(rows, cols, coeffs).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constructor_rejects_nan() {
        let bad = vec![c(f64::NAN, 0.0)];
        assert!(CMatrix::new(1, 1, bad).is_err());
    }

    #[test]
    fn poly_eval_zero_polynomial() {
        let p = MatrixPolynomial::zero(2, 3);
        let v = p.eval(c(3.0, 0.0));
        assert!(v.is_zero());
        assert_eq!((v.rows(), v.cols()), (2, 3));
    }

    #[test]
    fn poly_eval_constant() {
        let p = MatrixPolynomial::identity(2);
        let v = p.eval(c(7.0, 2.0));
        assert_eq!(v, CMatrix::identity(2));
    }

    #[test]
    fn poly_eval_pencil_at_two() {
        // lambda*A + B with A = I, B = [[0,1],[1,0]] at lambda = 2.
        let a = CMatrix::identity(2);
        let b = CMatrix::new(2, 2, vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]).unwrap();
        let p = MatrixPolynomial::new(2, 2, vec![b, a]).unwrap();
        let v = p.eval(c(2.0, 0.0));
        let expected =
            CMatrix::new(2, 2, vec![c(2., 0.), c(1., 0.), c(1., 0.), c(2., 0.)]).unwrap();
        assert!(v.sub(&expected).unwrap().max_norm() < 1e-15);
    }

    #[test]
    fn horner_matches_naive_power_sum() {
        let mut rng = SampleRng::new(11);
        for _ in 0..20 {
            let deg = 1 + (rng.next_u64() % 6) as usize;
            let dim = 1 + (rng.next_u64() % 6) as usize;
            let p = random_poly(&mut rng, dim, dim, deg);
            let lambda = rng.next_complex();
            let horner = p.eval(lambda);
            let mut naive = CMatrix::zeros(dim, dim);
            let mut pw = c(1.0, 0.0);
            for k in 0..=deg {
                naive = naive.add(&p.coeff(k).scale(pw)).unwrap();
                pw *= lambda;
            }
            let rel = horner.sub(&naive).unwrap().max_norm() / naive.max_norm().max(1.0);
            assert!(rel < 1e-12, "horner vs naive rel error {rel}");
        }
    }

    #[test]
    fn poly_mul_zero_absorbs() {
        let mut rng = SampleRng::new(3);
        let q = random_poly(&mut rng, 2, 2, 3);
        let z = MatrixPolynomial::zero(2, 2);
        assert!(z.mul(&q).unwrap().is_zero());
        assert!(q.mul(&z).unwrap().is_zero());
    }

    #[test]
    fn poly_mul_difference_of_squares() {
        // (lambda + 1)(lambda - 1) = lambda^2 - 1 in the scalar case.
        let one = CMatrix::identity(1);
        let p = MatrixPolynomial::new(1, 1, vec![one.clone(), one.clone()]).unwrap();
        let q = MatrixPolynomial::new(1, 1, vec![one.neg(), one.clone()]).unwrap();
        let prod = p.mul(&q).unwrap();
        assert_eq!(prod.degree(), Fin(2));
        assert!((prod.coeff(0)[(0, 0)] - c(-1., 0.)).norm() < 1e-15);
        assert!(prod.coeff(1)[(0, 0)].norm() < 1e-15);
        assert!((prod.coeff(2)[(0, 0)] - c(1., 0.)).norm() < 1e-15);
    }

    #[test]
    fn poly_mul_commutes_with_eval() {
        let mut rng = SampleRng::new(5);
        let p = random_poly(&mut rng, 2, 2, 2);
        let q = random_poly(&mut rng, 2, 2, 3);
        let prod = p.mul(&q).unwrap();
        for _ in 0..10 {
            let lambda = rng.next_complex();
            let lhs = prod.eval(lambda);
            let rhs = p.eval(lambda).matmul(&q.eval(lambda)).unwrap();
            let rel = lhs.sub(&rhs).unwrap().max_norm() / rhs.max_norm().max(1.0);
            assert!(rel < 1e-12);
        }
    }

    #[test]
    fn poly_mul_associative() {
        let mut rng = SampleRng::new(17);
        for _ in 0..5 {
            let p = random_poly(&mut rng, 2, 3, 2);
            let q = random_poly(&mut rng, 3, 2, 2);
            let r = random_poly(&mut rng, 2, 2, 3);
            let left = p.mul(&q).unwrap().mul(&r).unwrap();
            let right = p.mul(&q.mul(&r).unwrap()).unwrap();
            let scale = left.coeff_scale().max(1.0);
            for k in 0..left.coeffs().len().max(right.coeffs().len()) {
                let d = left.coeff(k).sub(&right.coeff(k)).unwrap().max_norm();
                assert!(d / scale < 1e-10);
            }
        }
    }

    #[test]
    fn left_divide_low_degree_numerator() {
        let mut rng = SampleRng::new(23);
        let n = random_poly(&mut rng, 2, 2, 1);
        let dv = {
            let lead = random_invertible(&mut rng, 2);
            let c0 = random_matrix(&mut rng, 2, 2);
            let c1 = random_matrix(&mut rng, 2, 2);
            MatrixPolynomial::new(2, 2, vec![c0, c1, lead]).unwrap()
        };
        let (k, r) = n.left_divide(&dv).unwrap();
        assert!(k.is_zero());
        assert_eq!(r, n);
    }

    #[test]
    fn left_divide_pencil_case() {
        // N = lambda*D + Dhat, Dv = lambda*A  =>  K = D A^{-1}, R = Dhat.
        let mut rng = SampleRng::new(29);
        let d = random_matrix(&mut rng, 2, 2);
        let dhat = random_matrix(&mut rng, 2, 2);
        let a = random_invertible(&mut rng, 2);
        let n = MatrixPolynomial::new(2, 2, vec![dhat.clone(), d.clone()]).unwrap();
        let dv = MatrixPolynomial::new(2, 2, vec![CMatrix::zeros(2, 2), a.clone()]).unwrap();
        let (k, r) = n.left_divide(&dv).unwrap();
        assert_eq!(k.degree(), Fin(0));
        let expected_k = d.matmul(&mat_inv(&a).unwrap()).unwrap();
        assert!(k.coeff(0).sub(&expected_k).unwrap().max_norm() < 1e-12);
        assert!(r.coeff(0).sub(&dhat).unwrap().max_norm() < 1e-12);
    }

    #[test]
    fn left_divide_reconstruction() {
        let mut rng = SampleRng::new(31);
        for _ in 0..10 {
            let n = random_poly(&mut rng, 3, 3, 4);
            let dv = {
                let mut coeffs: Vec<CMatrix> =
                    (0..2).map(|_| random_matrix(&mut rng, 3, 3)).collect();
                coeffs.push(random_invertible(&mut rng, 3));
                MatrixPolynomial::new(3, 3, coeffs).unwrap()
            };
            let (k, r) = n.left_divide(&dv).unwrap();
            assert!(r.degree() < dv.degree());
            assert_eq!(k.degree(), Fin(2));
            let recon = k.mul(&dv).unwrap().add(&r).unwrap();
            let scale = n.coeff_scale().max(1.0);
            for i in 0..n.coeffs().len() {
                let diff = recon.coeff(i).sub(&n.coeff(i)).unwrap().max_norm();
                assert!(diff <= 1e-10 * scale, "coefficient {i} residual {diff}");
            }
        }
    }

    #[test]
    fn left_divide_rejects_singular_leading() {
        let mut rng = SampleRng::new(37);
        let n = random_poly(&mut rng, 2, 2, 2);
        let sing = MatrixPolynomial::new(
            2,
            2,
            vec![
                random_matrix(&mut rng, 2, 2),
                CMatrix::new(2, 2, vec![c(1., 0.), c(0., 0.), c(0., 0.), c(1e-14, 0.)]).unwrap(),
            ],
        )
        .unwrap();
        match n.left_divide(&sing) {
            Err(Error::SingularLeadingCoefficient { .. }) => {}
            other => panic!("expected SingularLeadingCoefficient, got {other:?}"),
        }
    }

    #[test]
    fn mat_inv_identity_and_diag() {
        let inv = mat_inv(&CMatrix::identity(3)).unwrap();
        assert!(inv.sub(&CMatrix::identity(3)).unwrap().max_norm() < 1e-15);
        let d = CMatrix::diag(&[c(2., 0.), c(4., 0.)]);
        let di = mat_inv(&d).unwrap();
        assert!((di[(0, 0)] - c(0.5, 0.)).norm() < 1e-15);
        assert!((di[(1, 1)] - c(0.25, 0.)).norm() < 1e-15);
    }

    #[test]
    fn mat_inv_residual() {
        let mut rng = SampleRng::new(41);
        for _ in 0..10 {
            let a = random_invertible(&mut rng, 5);
            let inv = mat_inv(&a).unwrap();
            let res = a.matmul(&inv).unwrap().sub(&CMatrix::identity(5)).unwrap();
            assert!(res.max_norm() <= 1e-10);
        }
    }

    #[test]
    fn mat_inv_rejects_singular() {
        let z = CMatrix::zeros(2, 2);
        assert!(matches!(mat_inv(&z), Err(Error::NumericallySingular { .. })));
    }

    #[test]
    fn trim_drops_tiny_leading() {
        let mut rng = SampleRng::new(43);
        let a = random_matrix(&mut rng, 2, 2);
        let eps_b = random_matrix(&mut rng, 2, 2).scale(c(1e-16, 0.0));
        let p = MatrixPolynomial::new(2, 2, vec![a.clone(), eps_b]).unwrap();
        assert_eq!(p.degree(), Fin(1));
        let t = p.trim(TRIM_TOL);
        assert_eq!(t.degree(), Fin(0));
        // exact zero lead is dropped by the constructor already
        let q = MatrixPolynomial::new(2, 2, vec![a, CMatrix::zeros(2, 2)]).unwrap();
        assert_eq!(q.degree(), Fin(0));
        // idempotent on the zero polynomial
        let z = MatrixPolynomial::zero(2, 2);
        assert!(z.trim(TRIM_TOL).is_zero());
    }

    #[test]
    fn trim_idempotent_and_degree_monotone() {
        let mut rng = SampleRng::new(47);
        for _ in 0..20 {
            let deg = (rng.next_u64() % 5) as usize;
            let p = random_poly(&mut rng, 2, 2, deg);
            let once = p.trim(TRIM_TOL);
            let twice = once.trim(TRIM_TOL);
            assert_eq!(once, twice);
            assert!(once.degree() <= p.degree());
        }
    }

    #[test]
    fn ext_int_ordering_and_arithmetic() {
        assert!(NegInf < Fin(-100));
        assert_eq!(NegInf + Fin(5), NegInf);
        assert_eq!(Fin(2) + Fin(3), Fin(5));
        assert_eq!(NegInf.sub_fin(7), NegInf);
        assert_eq!(Fin(2).max(NegInf), Fin(2));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_complex() -> impl Strategy<Value = Complex64> {
            (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im))
        }

        fn arb_poly(dim: usize, max_deg: usize) -> impl Strategy<Value = MatrixPolynomial> {
            proptest::collection::vec(
                proptest::collection::vec(arb_complex(), dim * dim),
                1..=max_deg + 1,
            )
            .prop_map(move |coeffs| {
                MatrixPolynomial::new(
                    dim,
                    dim,
                    coeffs
                        .into_iter()
                        .map(|data| CMatrix::new(dim, dim, data).unwrap())
                        .collect(),
                )
                .unwrap()
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn eval_commutes_with_mul(p in arb_poly(2, 4), q in arb_poly(2, 4), z in arb_complex()) {
                let prod = p.mul(&q).unwrap();
                let lhs = prod.eval(z);
                let rhs = p.eval(z).matmul(&q.eval(z)).unwrap();
                let rel = lhs.sub(&rhs).unwrap().max_norm() / rhs.max_norm().max(1.0);
                prop_assert!(rel < 1e-12);
            }

            #[test]
            fn trim_is_idempotent_and_degree_monotone(p in arb_poly(2, 5), tol in 0.0..1e-6f64) {
                let once = p.trim(tol);
                prop_assert_eq!(once.clone(), once.trim(tol));
                prop_assert!(once.degree() <= p.degree());
            }

            #[test]
            fn add_then_sub_roundtrips(p in arb_poly(3, 3), q in arb_poly(3, 3)) {
                let back = p.add(&q).unwrap().sub(&q).unwrap();
                let scale = p.coeff_scale().max(1.0);
                for k in 0..p.coeffs().len().max(back.coeffs().len()) {
                    let d = back.coeff(k).sub(&p.coeff(k)).unwrap().max_norm();
                    prop_assert!(d <= 1e-12 * scale);
                }
            }
        }
    }
}
