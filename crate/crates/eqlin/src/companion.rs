//! Companion linearization of a matrix polynomial with a distinguished
//! coefficient index l, and its embedding with a polynomial bottom row.
//!
//! The companion operator T is the same for every l; what changes with l is
//! the extension W (an identity block followed by a -lambda/I bidiagonal of
//! size l) and the factor functions. For l = d the equivalence target gains
//! a constant P_d block in front of the pencil.

use crate::algebra::{require_invertible, CMatrix, ExtInt, MatrixPolynomial};
use crate::blockfun::{BlockOperatorFunction, Entry, ExcludedSet, SpaceLayout};
use crate::equivalence::{
    embed_corner_with_rhs, EquivalenceCertificate, ExtensionStructure, PencilInfo,
};
use crate::error::{Error, Result};
use crate::factor::{FactorBuilder, FactorFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompanionCase {
    LZero,
    LMiddle,
    LTop,
}

/// A square matrix polynomial of degree d >= 1 with an invertible leading
/// coefficient and a distinguished index l in 0..=d.
#[derive(Debug, Clone)]
pub struct CompanionSpec {
    p: MatrixPolynomial,
    l: usize,
    /// P_d^{-1} P_i for i < d.
    normalized: Vec<CMatrix>,
    lead_inv: CMatrix,
}

impl CompanionSpec {
    pub fn new(p: MatrixPolynomial, l: usize) -> Result<Self> {
        if p.row_dim() != p.col_dim() {
            return Err(Error::DimensionMismatch(format!(
                "companion of non-square {}x{} polynomial",
                p.row_dim(),
                p.col_dim()
            )));
        }
        let d = match p.degree() {
            ExtInt::Fin(d) if d >= 1 => d as usize,
            other => {
                return Err(Error::PreconditionViolated(format!(
                    "companion needs degree >= 1, got {other}"
                )))
            }
        };
        if l > d {
            return Err(Error::PreconditionViolated(format!(
                "distinguished index {l} exceeds degree {d}"
            )));
        }
        let lead_inv = require_invertible(
            p.leading().expect("degree >= 1"),
            "companion leading coefficient",
        )?;
        let normalized = (0..d).map(|i| lead_inv.matmul(&p.coeff(i))).collect::<Result<_>>()?;
        Ok(Self {
            p,
            l,
            normalized,
            lead_inv,
        })
    }

    pub fn polynomial(&self) -> &MatrixPolynomial {
        &self.p
    }

    pub fn degree(&self) -> usize {
        self.p.coeffs().len() - 1
    }

    pub fn dim(&self) -> usize {
        self.p.row_dim()
    }

    pub fn distinguished(&self) -> usize {
        self.l
    }

    pub fn case(&self) -> CompanionCase {
        let d = self.degree();
        if self.l == 0 {
            CompanionCase::LZero
        } else if self.l < d {
            CompanionCase::LMiddle
        } else {
            CompanionCase::LTop
        }
    }

    pub fn lead_inv(&self) -> &CMatrix {
        &self.lead_inv
    }

    /// Normalized coefficient P_d^{-1} P_i (identity for i = d).
    pub fn normalized(&self, i: usize) -> CMatrix {
        if i == self.degree() {
            CMatrix::identity(self.dim())
        } else {
            self.normalized[i].clone()
        }
    }

    /// Excluded set {0} for l > 0, empty otherwise.
    pub fn excluded(&self) -> ExcludedSet {
        if self.l > 0 {
            ExcludedSet::origin()
        } else {
            ExcludedSet::empty()
        }
    }
}

#[derive(Debug, Clone)]
pub struct CompanionResult {
    pub t: CMatrix,
    pub w: Option<FactorFunction>,
    pub case: CompanionCase,
    pub extra_block: Option<CMatrix>,
}

/// The companion operator: normalized coefficients along the first block
/// row, identities on the subdiagonal. Identical for every l.
pub(crate) fn companion_matrix(spec: &CompanionSpec) -> CMatrix {
    let (d, m) = (spec.degree(), spec.dim());
    let mut t = CMatrix::zeros(d * m, d * m);
    for c in 0..d {
        t.set_block(0, c * m, &spec.normalized(d - 1 - c).neg());
    }
    for r in 1..d {
        t.set_block(r * m, (r - 1) * m, &CMatrix::identity(m));
    }
    t
}

/// The extension W(lambda) on H^{max(d-1, l)}: an identity head followed by
/// the size-l lower bidiagonal with -lambda on the diagonal.
pub(crate) fn extension_w(spec: &CompanionSpec) -> Option<FactorFunction> {
    let (d, m, l) = (spec.degree(), spec.dim(), spec.distinguished());
    let slots = (d - 1).max(l);
    if slots == 0 {
        return None;
    }
    let id_slots = slots - l;
    let mut b = FactorBuilder::new();
    let dims = vec![m; slots];
    let mut blocks = Vec::new();
    if id_slots > 0 {
        // one constant identity block covering the head
        for s in 0..id_slots {
            let i = b.identity(m);
            blocks.push((s, s, i));
        }
    }
    for t in 0..l {
        let lam = b.lambda_pow(1, m);
        let neg = b.neg(lam);
        blocks.push((id_slots + t, id_slots + t, neg));
        if t > 0 {
            let i = b.identity(m);
            blocks.push((id_slots + t, id_slots + t - 1, i));
        }
    }
    let root = b.block(dims.clone(), dims, blocks).expect("W dims consistent");
    Some(b.finish(root))
}

/// Pencil T - lambda as a block grid of linear polynomial entries.
pub(crate) fn pencil_grid(spec: &CompanionSpec) -> Result<Vec<Vec<MatrixPolynomial>>> {
    let (d, m) = (spec.degree(), spec.dim());
    let zero = MatrixPolynomial::zero(m, m);
    let mut grid = vec![vec![zero; d]; d];
    for c in 0..d {
        let coeff = spec.normalized(d - 1 - c).neg();
        grid[0][c] = if c == 0 {
            MatrixPolynomial::new(m, m, vec![coeff, CMatrix::identity(m).neg()])?
        } else {
            MatrixPolynomial::constant(coeff)
        };
    }
    for r in 1..d {
        grid[r][r - 1] = MatrixPolynomial::identity(m);
        if r > 0 && grid[r][r].is_zero() {
            grid[r][r] = MatrixPolynomial::new(
                m,
                m,
                vec![CMatrix::zeros(m, m), CMatrix::identity(m).neg()],
            )?;
        }
    }
    Ok(grid)
}

pub(crate) struct CaseFactors {
    pub(crate) e: FactorFunction,
    pub(crate) f: FactorFunction,
}

/// E_alpha: leading row of accumulated high coefficients, lambda powers in
/// the strictly upper triangle, identity diagonal (l < d only).
fn build_e_alpha(b: &mut FactorBuilder, spec: &CompanionSpec) -> Result<usize> {
    let (d, m, l) = (spec.degree(), spec.dim(), spec.distinguished());
    let k = d - l;
    let dims = vec![m; k];
    let mut blocks = Vec::new();
    let top = b.constant(spec.polynomial().leading().expect("deg >= 1").neg());
    blocks.push((0, 0, top));
    for j in 1..k {
        // -(P_{d-j} + lambda P_{d-j+1} + ... + lambda^j P_d)
        let coeffs: Vec<CMatrix> = (0..=j).map(|kk| spec.p_coeff(d - j + kk).neg()).collect();
        let poly = MatrixPolynomial::new(m, m, coeffs)?;
        let id = b.poly(poly);
        blocks.push((0, j, id));
    }
    for i in 1..k {
        for j in i..k {
            let id = b.lambda_pow((j - i) as i32, m);
            blocks.push((i, j, id));
        }
    }
    b.block(dims.clone(), dims, blocks)
}

fn build_f_alpha(b: &mut FactorBuilder, spec: &CompanionSpec) -> Result<usize> {
    let (d, m, l) = (spec.degree(), spec.dim(), spec.distinguished());
    let k = d - l;
    let dims = vec![m; k];
    let mut blocks = Vec::new();
    for r in 0..k {
        let id = b.lambda_pow((d - 1 - r) as i32, m);
        blocks.push((r, 0, id));
        if r + 1 < k {
            let i = b.identity(m);
            blocks.push((r, r + 1, i));
        }
    }
    b.block(dims.clone(), dims, blocks)
}

/// E_beta: first row holds sum_{k} P_k / lambda^{l-c-k} tails, zeros below.
fn build_e_beta(
    b: &mut FactorBuilder,
    coeff: &dyn Fn(usize) -> CMatrix,
    out_dim: usize,
    in_dim: usize,
    rows: usize,
    l: usize,
) -> Result<usize> {
    let row_dims = vec![out_dim; rows];
    let col_dims = vec![in_dim; l];
    let mut blocks = Vec::new();
    for c in 0..l {
        let tail_len = l - c; // coefficients P_0 .. P_{l-1-c}
        let coeffs: Vec<CMatrix> = (0..tail_len).map(coeff).collect();
        let poly = MatrixPolynomial::new(out_dim, in_dim, coeffs)?;
        if poly.is_zero() {
            continue;
        }
        let pw = b.lambda_pow(-(tail_len as i32), out_dim);
        let pid = b.poly(poly);
        let prod = b.product(vec![pw, pid])?;
        blocks.push((0, c, prod));
    }
    b.block(row_dims, col_dims, blocks)
}

fn build_f_beta(b: &mut FactorBuilder, m: usize, l: usize, cols: usize) -> Result<usize> {
    let row_dims = vec![m; l];
    let col_dims = vec![m; cols];
    let mut blocks = Vec::new();
    for r in 0..l {
        let id = b.lambda_pow((l - 1 - r) as i32, m);
        blocks.push((r, 0, id));
    }
    b.block(row_dims, col_dims, blocks)
}

impl CompanionSpec {
    fn p_coeff(&self, i: usize) -> CMatrix {
        self.p.coeff(i)
    }
}

pub(crate) fn case_factors(spec: &CompanionSpec) -> Result<CaseFactors> {
    let (d, m, l) = (spec.degree(), spec.dim(), spec.distinguished());
    match spec.case() {
        CompanionCase::LZero => {
            let mut be = FactorBuilder::new();
            let e_root = build_e_alpha(&mut be, spec)?;
            let mut bf = FactorBuilder::new();
            let f_root = build_f_alpha(&mut bf, spec)?;
            Ok(CaseFactors {
                e: be.finish(e_root),
                f: bf.finish(f_root),
            })
        }
        CompanionCase::LMiddle => {
            let beta_rows = (d - l).max(1);
            let mut be = FactorBuilder::new();
            let e_alpha = build_e_alpha(&mut be, spec)?;
            let e_beta = build_e_beta(&mut be, &|k| spec.p_coeff(k), m, m, beta_rows, l)?;
            let i_l = be.identity(l * m);
            let e_root = be.block(
                vec![(d - l) * m, l * m],
                vec![(d - l) * m, l * m],
                vec![(0, 0, e_alpha), (0, 1, e_beta), (1, 1, i_l)],
            )?;
            let mut bf = FactorBuilder::new();
            let f_alpha = build_f_alpha(&mut bf, spec)?;
            let f_beta = build_f_beta(&mut bf, m, l, (d - l).max(1))?;
            let i_l = bf.identity(l * m);
            let f_root = bf.block(
                vec![(d - l) * m, l * m],
                vec![(d - l) * m, l * m],
                vec![(0, 0, f_alpha), (1, 0, f_beta), (1, 1, i_l)],
            )?;
            Ok(CaseFactors {
                e: be.finish(e_root),
                f: bf.finish(f_root),
            })
        }
        CompanionCase::LTop => {
            // E = [P(lambda) P_d^{-1} / lambda^d, E_beta; E_gamma, I]
            let mut be = FactorBuilder::new();
            let p_pdinv = spec.p.rmul_const(spec.lead_inv())?;
            let pw = be.lambda_pow(-(d as i32), m);
            let pp = be.poly(p_pdinv);
            let corner = be.product(vec![pw, pp])?;
            let e_beta = build_e_beta(&mut be, &|k| spec.p_coeff(k), m, m, 1, l)?;
            let e_gamma = {
                let mut blocks = Vec::new();
                let inv = be.constant(spec.lead_inv().clone());
                blocks.push((0, 0, inv));
                be.block(vec![m; d], vec![m], blocks)?
            };
            let i_d = be.identity(d * m);
            let e_root = be.block(
                vec![m, d * m],
                vec![m, d * m],
                vec![(0, 0, corner), (0, 1, e_beta), (1, 0, e_gamma), (1, 1, i_d)],
            )?;
            // F = [sum lambda^i Ptilde_i, F_gamma; F_beta, I]
            let mut bf = FactorBuilder::new();
            let ptilde_full = {
                let mut coeffs: Vec<CMatrix> = (0..d).map(|i| spec.normalized(i)).collect();
                coeffs.push(CMatrix::identity(m));
                MatrixPolynomial::new(m, m, coeffs)?
            };
            let corner = bf.poly(ptilde_full);
            let f_gamma = {
                let mut blocks = Vec::new();
                for c in 0..d {
                    let id = bf.constant(spec.normalized(d - 1 - c));
                    blocks.push((0, c, id));
                }
                bf.block(vec![m], vec![m; d], blocks)?
            };
            let f_beta = build_f_beta(&mut bf, m, l, 1)?;
            let i_d = bf.identity(d * m);
            let f_root = bf.block(
                vec![m, d * m],
                vec![m, d * m],
                vec![(0, 0, corner), (0, 1, f_gamma), (1, 0, f_beta), (1, 1, i_d)],
            )?;
            Ok(CaseFactors {
                e: be.finish(e_root),
                f: bf.finish(f_root),
            })
        }
    }
}

/// Companion linearization: P + W is equivalent to T - lambda (l < d) or to
/// P_d + (T - lambda) (l = d), with the case-dependent factor assembly.
pub fn companion_linearize(
    spec: &CompanionSpec,
) -> Result<(CompanionResult, EquivalenceCertificate)> {
    let (d, m, l) = (spec.degree(), spec.dim(), spec.distinguished());
    let t = companion_matrix(spec);
    let w = extension_w(spec);
    let lhs = BlockOperatorFunction::single(Entry::Polynomial(spec.polynomial().clone()))?;
    let pgrid = pencil_grid(spec)?;
    let (rhs, pencil_offset, extra_block) = if spec.case() == CompanionCase::LTop {
        let p_d = spec.polynomial().leading().expect("deg >= 1").clone();
        let mut entries: Vec<Vec<Entry>> = Vec::with_capacity(d + 1);
        let mut first = vec![Entry::Polynomial(MatrixPolynomial::constant(p_d.clone()))];
        first.extend((0..d).map(|_| Entry::zero(m, m)));
        entries.push(first);
        for r in 0..d {
            let mut row = vec![Entry::zero(m, m)];
            row.extend(pgrid[r].iter().cloned().map(Entry::Polynomial));
            entries.push(row);
        }
        let layout = SpaceLayout::new(vec![m; d + 1])?;
        (
            BlockOperatorFunction::new(layout.clone(), layout, entries)?,
            m,
            Some(p_d),
        )
    } else {
        let layout = SpaceLayout::new(vec![m; d])?;
        (
            BlockOperatorFunction::from_poly_grid(
                layout,
                pgrid
                    .into_iter()
                    .map(|row| row.into_iter().collect())
                    .collect(),
            )?,
            0,
            None,
        )
    };
    let factors = case_factors(spec)?;
    let cert = EquivalenceCertificate::new(
        lhs,
        rhs,
        w.clone(),
        None,
        factors.e,
        factors.f,
        spec.excluded(),
        ExtensionStructure::Direct,
        Some(PencilInfo {
            t: t.clone(),
            offset: pencil_offset,
        }),
        l * m,
        0,
    )?;
    Ok((
        CompanionResult {
            t,
            w,
            case: spec.case(),
            extra_block,
        },
        cert,
    ))
}

/// Left-multiply an entry by a constant matrix.
pub(crate) fn lmul_entry(c: &CMatrix, e: &Entry) -> Result<Entry> {
    Ok(match e {
        Entry::Polynomial(p) => Entry::Polynomial(p.lmul_const(c)?),
        Entry::Product(factors) => {
            let mut out = factors.clone();
            out[0] = out[0].lmul_const(c)?;
            Entry::Product(out)
        }
        Entry::SchurComplement { a, b, c: cc, d } => Entry::SchurComplement {
            a: a.lmul_const(c)?,
            b: b.lmul_const(c)?,
            c: cc.clone(),
            d: d.clone(),
        },
    })
}

/// The side factor E-check of the embedding: a single block row
/// [0 | -Q_{d-1} | -(Q_{d-2} + lambda Q_{d-1}) | ...] then the beta tail.
pub(crate) fn build_side_e(spec: &CompanionSpec, q: &MatrixPolynomial) -> Result<Option<FactorFunction>> {
    let (d, m, l) = (spec.degree(), spec.dim(), spec.distinguished());
    let z_r = q.row_dim();
    let mut b = FactorBuilder::new();
    let alpha = |b: &mut FactorBuilder| -> Result<usize> {
        // columns 0..d-l-1 over H^{d-l}: col 0 zero, col j the accumulated tail
        let col_dims = vec![m; d - l];
        let mut blocks = Vec::new();
        for j in 1..d - l {
            let coeffs: Vec<CMatrix> = (0..j).map(|k| q.coeff(d - j + k).neg()).collect();
            let poly = MatrixPolynomial::new(z_r, m, coeffs)?;
            if poly.is_zero() {
                continue;
            }
            let id = b.poly(poly);
            blocks.push((0, j, id));
        }
        b.block(vec![z_r], col_dims, blocks)
    };
    let root = match spec.case() {
        CompanionCase::LZero => alpha(&mut b)?,
        CompanionCase::LMiddle => {
            let a = alpha(&mut b)?;
            let beta = build_e_beta(&mut b, &|k| q.coeff(k), z_r, m, 1, l)?;
            b.block(
                vec![z_r],
                vec![(d - l) * m, l * m],
                vec![(0, 0, a), (0, 1, beta)],
            )?
        }
        CompanionCase::LTop => {
            let q_pdinv = q.rmul_const(spec.lead_inv())?;
            let pw = b.lambda_pow(-(d as i32), z_r);
            let qp = b.poly(q_pdinv);
            let corner = b.product(vec![pw, qp])?;
            let beta = build_e_beta(&mut b, &|k| q.coeff(k), z_r, m, 1, l)?;
            b.block(
                vec![z_r],
                vec![m, d * m],
                vec![(0, 0, corner), (0, 1, beta)],
            )?
        }
    };
    Ok(Some(b.finish(root)))
}

/// Companion embedding: [P X; Q Z] + W is equivalent to the display with
/// the pencil in the top-left, -P_d^{-1} X in the top-right corner and the
/// coefficients of Q along the bottom row.
pub fn companion_embed(
    spec: &CompanionSpec,
    q: &MatrixPolynomial,
    x: &Entry,
    z: &Entry,
) -> Result<EquivalenceCertificate> {
    let (d, m) = (spec.degree(), spec.dim());
    if let ExtInt::Fin(dq) = q.degree() {
        if dq >= d as i64 {
            return Err(Error::DegreeTooHigh {
                got: dq,
                bound: d as i64,
            });
        }
    }
    if q.col_dim() != m || x.row_dim() != m {
        return Err(Error::StructuralMismatch(
            "embedding blocks do not fit the polynomial's space".into(),
        ));
    }
    if spec.case() == CompanionCase::LTop && x.as_polynomial().is_none() {
        return Err(Error::PreconditionViolated(
            "l = d requires a polynomial X so that P_d^{-1} X is representable".into(),
        ));
    }
    let (_, inner) = companion_linearize(spec)?;
    let (z_r, z_c) = (z.row_dim(), z.col_dim());

    // closed-form right-hand-side corners
    let corner_x = lmul_entry(&spec.lead_inv().neg(), x)?;
    let mut col_entries: Vec<Entry> = Vec::new();
    let mut row_entries: Vec<Entry> = Vec::new();
    if spec.case() == CompanionCase::LTop {
        col_entries.push(Entry::zero(m, z_c));
        row_entries.push(Entry::zero(z_r, m));
    }
    col_entries.push(corner_x);
    for _ in 1..d {
        col_entries.push(Entry::zero(m, z_c));
    }
    for c in 0..d {
        let qc = q.coeff(d - 1 - c);
        row_entries.push(Entry::Polynomial(MatrixPolynomial::new(z_r, m, vec![qc])?));
    }

    let side_e = build_side_e(spec, q)?;
    let side_f = if spec.case() == CompanionCase::LTop {
        let xp = x.as_polynomial().expect("checked above");
        let mut b = FactorBuilder::new();
        let top = b.poly(xp.lmul_const(spec.lead_inv())?);
        let root = b.block(vec![m; d + 1], vec![z_c], vec![(0, 0, top)])?;
        Some(b.finish(root))
    } else {
        None
    };

    embed_corner_with_rhs(
        &inner,
        x,
        &Entry::Polynomial(q.clone()),
        z,
        side_e.as_ref(),
        side_f.as_ref(),
        Some((col_entries, row_entries)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::mat_inv;
    use num_complex::Complex64;
    use crate::equivalence::{certificate_spectra, verify_certificate};
    use crate::rng::SampleRng;
    use crate::spectra;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rng: &mut SampleRng, r: usize, cc: usize) -> CMatrix {
        CMatrix::from_fn(r, cc, |_, _| rng.next_complex())
    }

    fn random_invertible(rng: &mut SampleRng, n: usize) -> CMatrix {
        let mut m = random_matrix(rng, n, n);
        for i in 0..n {
            m[(i, i)] += c(2., 0.);
        }
        m
    }

    fn random_companion_poly(rng: &mut SampleRng, dim: usize, deg: usize) -> MatrixPolynomial {
        let mut coeffs: Vec<CMatrix> = (0..deg).map(|_| random_matrix(rng, dim, dim)).collect();
        coeffs.push(random_invertible(rng, dim));
        MatrixPolynomial::new(dim, dim, coeffs).unwrap()
    }

    #[test]
    fn pencil_example_matches_displayed_factors() {
        // P = lambda A + B with d = l = 1: the displayed identity
        // [P 0; 0 -lambda] = [I + BA^{-1}/lambda, B/lambda; A^{-1}, I]
        //                    [A 0; 0 T-lambda]
        //                    [A^{-1}B + lambda, A^{-1}B; I, I].
        let mut rng = SampleRng::new(1);
        let a = random_invertible(&mut rng, 3);
        let b = random_matrix(&mut rng, 3, 3);
        let p = MatrixPolynomial::new(3, 3, vec![b.clone(), a.clone()]).unwrap();
        let spec = CompanionSpec::new(p, 1).unwrap();
        let (result, cert) = companion_linearize(&spec).unwrap();
        // T = -A^{-1} B
        let a_inv = mat_inv(&a).unwrap();
        let t_expect = a_inv.matmul(&b).unwrap().neg();
        assert!(result.t.sub(&t_expect).unwrap().max_norm() < 1e-13);
        assert_eq!(result.case, CompanionCase::LTop);
        assert!(result.extra_block.is_some());
        let report = verify_certificate(&cert, 20, 1e-10, 3).unwrap();
        assert!(report.pass, "residual {}", report.max_residual);
        // E at a point vs the display
        let lambda = c(0.8, -0.5);
        let e_val = cert.e.eval(lambda).unwrap();
        let ba_inv = b.matmul(&a_inv).unwrap();
        let mut e_expect = CMatrix::zeros(6, 6);
        e_expect.set_block(
            0,
            0,
            &CMatrix::identity(3)
                .add(&ba_inv.scale(lambda.inv()))
                .unwrap(),
        );
        e_expect.set_block(0, 3, &b.scale(lambda.inv()));
        e_expect.set_block(3, 0, &a_inv);
        e_expect.set_block(3, 3, &CMatrix::identity(3));
        assert!(e_val.sub(&e_expect).unwrap().max_norm() < 1e-12);
        let f_val = cert.f.eval(lambda).unwrap();
        let ainv_b = a_inv.matmul(&b).unwrap();
        let mut f_expect = CMatrix::zeros(6, 6);
        f_expect.set_block(
            0,
            0,
            &ainv_b.add(&CMatrix::identity(3).scale(lambda)).unwrap(),
        );
        f_expect.set_block(0, 3, &ainv_b);
        f_expect.set_block(3, 0, &CMatrix::identity(3));
        f_expect.set_block(3, 3, &CMatrix::identity(3));
        assert!(f_val.sub(&f_expect).unwrap().max_norm() < 1e-12);
    }

    #[test]
    fn scalar_quadratic_l_zero() {
        // lambda^2 - 1 with l = 0: T = [[0, 1], [1, 0]], eigenvalues 1, -1.
        let p = MatrixPolynomial::new(
            1,
            1,
            vec![
                CMatrix::scalar(c(-1., 0.)),
                CMatrix::zeros(1, 1),
                CMatrix::scalar(c(1., 0.)),
            ],
        )
        .unwrap();
        let spec = CompanionSpec::new(p, 0).unwrap();
        let (result, cert) = companion_linearize(&spec).unwrap();
        assert!((result.t[(0, 0)]).norm() < 1e-15);
        assert!((result.t[(0, 1)] - c(1., 0.)).norm() < 1e-15);
        assert!((result.t[(1, 0)] - c(1., 0.)).norm() < 1e-15);
        assert!((result.t[(1, 1)]).norm() < 1e-15);
        let eigs = spectra::eig_dense(&result.t).unwrap();
        assert!((eigs[0] - c(-1., 0.)).norm() < 1e-12);
        assert!((eigs[1] - c(1., 0.)).norm() < 1e-12);
        let report = verify_certificate(&cert, 20, 1e-10, 5).unwrap();
        assert!(report.pass);
    }

    #[test]
    fn cubic_all_cases_verify_and_match_spectra() {
        let mut rng = SampleRng::new(7);
        let p = random_companion_poly(&mut rng, 3, 3);
        for l in 0..=3usize {
            let spec = CompanionSpec::new(p.clone(), l).unwrap();
            let (result, cert) = companion_linearize(&spec).unwrap();
            let report = verify_certificate(&cert, 20, 1e-9, 11).unwrap();
            assert!(
                report.pass,
                "l = {l}: residual {}",
                report.max_residual
            );
            assert_eq!(result.t.rows(), 9);
            let spec_rep = certificate_spectra(&cert, 1e-6).unwrap();
            assert!(spec_rep.pass, "l = {l}: {spec_rep:?}");
        }
    }

    #[test]
    fn t_is_bit_identical_across_l() {
        let mut rng = SampleRng::new(9);
        let p = random_companion_poly(&mut rng, 2, 4);
        let t0 = companion_linearize(&CompanionSpec::new(p.clone(), 0).unwrap())
            .unwrap()
            .0
            .t;
        for l in 1..=4usize {
            let tl = companion_linearize(&CompanionSpec::new(p.clone(), l).unwrap())
                .unwrap()
                .0
                .t;
            assert_eq!(t0.data(), tl.data(), "T differs for l = {l}");
        }
    }

    #[test]
    fn w_determinant_vanishes_to_order_l_m() {
        let mut rng = SampleRng::new(13);
        let m = 2usize;
        let p = random_companion_poly(&mut rng, m, 3);
        for l in 1..=3usize {
            let spec = CompanionSpec::new(p.clone(), l).unwrap();
            let w = extension_w(&spec).unwrap();
            let d2 = w.eval(c(1e-2, 0.)).unwrap().lu().unwrap().det().norm();
            let d3 = w.eval(c(1e-3, 0.)).unwrap().lu().unwrap().det().norm();
            let slope = (d2 / d3).log10();
            assert!(
                (slope - (l * m) as f64).abs() < 1e-6,
                "l = {l}: slope {slope}"
            );
        }
    }

    #[test]
    fn proof_identity_bidiagonal_inverse() {
        // sum_{k<l} Ptilde_k / lambda^{l-k}
        //   = -[Ptilde_{l-1} .. Ptilde_0] Bid(lambda)^{-1} [I; 0; ..]
        let mut rng = SampleRng::new(17);
        let m = 2usize;
        for l in 1..=3usize {
            let p = random_companion_poly(&mut rng, m, l + 1);
            let spec = CompanionSpec::new(p, 0).unwrap();
            let lambda = c(0.7, 0.4);
            let mut lhs = CMatrix::zeros(m, m);
            for k in 0..l {
                lhs = lhs
                    .add(&spec.normalized(k).scale(lambda.powi(-((l - k) as i32))))
                    .unwrap();
            }
            let mut bid = CMatrix::zeros(l * m, l * m);
            for t in 0..l {
                bid.set_block(t * m, t * m, &CMatrix::identity(m).scale(-lambda));
                if t > 0 {
                    bid.set_block(t * m, (t - 1) * m, &CMatrix::identity(m));
                }
            }
            let mut row = CMatrix::zeros(m, l * m);
            for (j, k) in (0..l).rev().enumerate() {
                row.set_block(0, j * m, &spec.normalized(k));
            }
            let mut e1 = CMatrix::zeros(l * m, m);
            e1.set_block(0, 0, &CMatrix::identity(m));
            let rhs = row
                .matmul(&mat_inv(&bid).unwrap())
                .unwrap()
                .matmul(&e1)
                .unwrap()
                .neg();
            assert!(
                lhs.sub(&rhs).unwrap().max_norm() < 1e-12,
                "identity fails for l = {l}"
            );
        }
    }

    #[test]
    fn embed_decoupled_corners() {
        let mut rng = SampleRng::new(19);
        let p = random_companion_poly(&mut rng, 2, 2);
        let spec = CompanionSpec::new(p, 0).unwrap();
        let z = Entry::Polynomial(MatrixPolynomial::identity(2));
        let cert = companion_embed(
            &spec,
            &MatrixPolynomial::zero(2, 2),
            &Entry::zero(2, 2),
            &z,
        )
        .unwrap();
        let report = verify_certificate(&cert, 10, 1e-10, 23).unwrap();
        assert!(report.pass, "residual {}", report.max_residual);
        // corner column and bottom row are zero
        let n = cert.rhs.grid_size();
        for j in 0..n - 1 {
            assert!(cert.rhs.entry(j, n - 1).is_zero());
            assert!(cert.rhs.entry(n - 1, j).is_zero());
        }
    }

    #[test]
    fn embed_mixed_dims_with_spectra() {
        let mut rng = SampleRng::new(23);
        let p = random_companion_poly(&mut rng, 2, 2);
        let spec = CompanionSpec::new(p, 1).unwrap();
        let q = {
            let coeffs = (0..2).map(|_| random_matrix(&mut rng, 1, 2)).collect();
            MatrixPolynomial::new(1, 2, coeffs).unwrap()
        };
        let x = Entry::Polynomial({
            let coeffs = (0..2).map(|_| random_matrix(&mut rng, 2, 1)).collect();
            MatrixPolynomial::new(2, 1, coeffs).unwrap()
        });
        let z = Entry::Polynomial({
            let coeffs = (0..2).map(|_| random_matrix(&mut rng, 1, 1)).collect();
            MatrixPolynomial::new(1, 1, coeffs).unwrap()
        });
        let cert = companion_embed(&spec, &q, &x, &z).unwrap();
        let report = verify_certificate(&cert, 20, 1e-9, 29).unwrap();
        assert!(report.pass, "residual {}", report.max_residual);
        let spec_rep = certificate_spectra(&cert, 1e-6).unwrap();
        assert!(spec_rep.pass, "{spec_rep:?}");
    }

    #[test]
    fn embed_cubic_with_beta_side_factors() {
        // cubic P with l = 1: the side factors mix the accumulated-tail and
        // the negative-power blocks
        let mut rng = SampleRng::new(61);
        let p = random_companion_poly(&mut rng, 2, 3);
        let spec = CompanionSpec::new(p, 1).unwrap();
        let q = {
            let coeffs = (0..3).map(|_| random_matrix(&mut rng, 2, 2)).collect();
            MatrixPolynomial::new(2, 2, coeffs).unwrap()
        };
        let x = Entry::Polynomial({
            let coeffs = (0..2).map(|_| random_matrix(&mut rng, 2, 2)).collect();
            MatrixPolynomial::new(2, 2, coeffs).unwrap()
        });
        let z = Entry::Polynomial(MatrixPolynomial::new(2, 2, vec![random_invertible(&mut rng, 2)]).unwrap());
        let cert = companion_embed(&spec, &q, &x, &z).unwrap();
        let report = verify_certificate(&cert, 20, 1e-9, 67).unwrap();
        assert!(report.pass, "residual {}", report.max_residual);
    }

    #[test]
    fn embed_l_top_constant_x() {
        let mut rng = SampleRng::new(29);
        let p = random_companion_poly(&mut rng, 2, 2);
        let spec = CompanionSpec::new(p.clone(), 2).unwrap();
        let x_const = random_matrix(&mut rng, 2, 1);
        let x = Entry::Polynomial(MatrixPolynomial::new(2, 1, vec![x_const.clone()]).unwrap());
        let q = MatrixPolynomial::new(1, 2, vec![random_matrix(&mut rng, 1, 2)]).unwrap();
        let z = Entry::Polynomial(MatrixPolynomial::new(1, 1, vec![random_matrix(&mut rng, 1, 1)]).unwrap());
        let cert = companion_embed(&spec, &q, &x, &z).unwrap();
        let report = verify_certificate(&cert, 20, 1e-9, 31).unwrap();
        assert!(report.pass, "residual {}", report.max_residual);
        // corner block sits one row below the P_d block and equals -P_d^{-1}X
        let corner = cert.rhs.entry(1, cert.rhs.grid_size() - 1);
        let expect = spec.lead_inv().neg().matmul(&x_const).unwrap();
        assert!(
            corner
                .as_polynomial()
                .unwrap()
                .coeff(0)
                .sub(&expect)
                .unwrap()
                .max_norm()
                < 1e-12
        );
    }

    #[test]
    fn embed_rejects_high_degree_q() {
        let mut rng = SampleRng::new(31);
        let p = random_companion_poly(&mut rng, 2, 2);
        let spec = CompanionSpec::new(p, 0).unwrap();
        let q = {
            let coeffs = (0..3).map(|_| random_matrix(&mut rng, 2, 2)).collect();
            MatrixPolynomial::new(2, 2, coeffs).unwrap()
        };
        match companion_embed(&spec, &q, &Entry::zero(2, 2), &Entry::zero(2, 2)) {
            Err(Error::DegreeTooHigh { .. }) => {}
            other => panic!("expected DegreeTooHigh, got {other:?}"),
        }
    }

    #[test]
    fn rejects_singular_leading_coefficient() {
        let p = MatrixPolynomial::new(
            2,
            2,
            vec![
                CMatrix::identity(2),
                CMatrix::new(2, 2, vec![c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]).unwrap(),
            ],
        )
        .unwrap();
        match CompanionSpec::new(p, 0) {
            Err(Error::SingularLeadingCoefficient { .. }) => {}
            other => panic!("expected SingularLeadingCoefficient, got {other:?}"),
        }
    }
}
