//! Equivalence certificates and their numerical verification.
//!
//! A certificate records the claim that `S + W_S = E (T + W_T) F` holds on
//! the complement of a finite excluded set, where `+` is the recorded
//! extension assembly (either appended block-diagonally or interleaved into
//! the grid). Verification samples the identity on an annulus; composition
//! and corner embedding build new certificates out of old ones.

use num_complex::Complex64;

use crate::algebra::{CMatrix, MatrixPolynomial};
use crate::blockfun::{BlockOperatorFunction, Entry, ExcludedSet};
use crate::error::{Error, Result};
use crate::factor::{FactorBuilder, FactorFunction};
use crate::rng::SampleRng;
use crate::spectra::{self, SpectrumReport};

/// Condition floor on E(lambda), F(lambda) during verification.
pub const CERT_RCOND_FLOOR: f64 = 1e-12;

/// Sampling annulus for verification points.
pub const SAMPLE_RADIUS_MIN: f64 = 0.5;
pub const SAMPLE_RADIUS_MAX: f64 = 2.0;

/// Redraw when a sample lands this close to an excluded point.
pub const SAMPLE_EXCLUSION_RADIUS: f64 = 1e-6;

const MAX_REDRAWS: usize = 100;

// ---------------------------------------------------------------------------
// Structure of the extension
// ---------------------------------------------------------------------------

/// One scalar row or column of an extended operator: either from the base
/// function or from the extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Base(usize),
    Ext(usize),
}

/// How `W_S` is assembled into the left-hand side. `Direct` appends it
/// block-diagonally; `Interleaved` splices it into the grid as in the
/// three-by-three layout [S 0 X; 0 W 0; Y 0 Z]. The right-hand extension
/// `W_T` is always appended.
#[derive(Debug, Clone, PartialEq)]
pub enum ExtensionStructure {
    Direct,
    Interleaved {
        lhs_rows: Vec<Slot>,
        lhs_cols: Vec<Slot>,
    },
}

impl ExtensionStructure {
    fn validate(slots: &[Slot], base: usize, ext: usize, what: &str) -> Result<()> {
        if slots.len() != base + ext {
            return Err(Error::StructuralMismatch(format!(
                "{what}: {} slots for base {base} + ext {ext}",
                slots.len()
            )));
        }
        let mut seen_base = vec![false; base];
        let mut seen_ext = vec![false; ext];
        for s in slots {
            match *s {
                Slot::Base(i) if i < base && !seen_base[i] => seen_base[i] = true,
                Slot::Ext(i) if i < ext && !seen_ext[i] => seen_ext[i] = true,
                _ => {
                    return Err(Error::StructuralMismatch(format!(
                        "{what}: bad or duplicate slot {s:?}"
                    )))
                }
            }
        }
        Ok(())
    }
}

/// The constant part T of a monic pencil T - lambda contained in the
/// right-hand side, at the given scalar offset. Any other diagonal blocks of
/// the right-hand side are constant and invertible, so the pencil's
/// eigenvalues carry the whole spectrum.
#[derive(Debug, Clone)]
pub struct PencilInfo {
    pub t: CMatrix,
    pub offset: usize,
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct EquivalenceCertificate {
    pub lhs: BlockOperatorFunction,
    pub rhs: BlockOperatorFunction,
    pub w_s: Option<FactorFunction>,
    pub w_t: Option<FactorFunction>,
    pub e: FactorFunction,
    pub f: FactorFunction,
    pub excluded: ExcludedSet,
    pub structure: ExtensionStructure,
    pub pencil: Option<PencilInfo>,
    /// Degree of det W_S (resp. det W_T); keeps the determinant-oracle
    /// interpolation bound exact when extensions contribute roots.
    pub w_s_det_degree: usize,
    pub w_t_det_degree: usize,
}

fn fdim(f: &Option<FactorFunction>) -> (usize, usize) {
    f.as_ref().map_or((0, 0), |w| (w.rows(), w.cols()))
}

impl EquivalenceCertificate {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        lhs: BlockOperatorFunction,
        rhs: BlockOperatorFunction,
        w_s: Option<FactorFunction>,
        w_t: Option<FactorFunction>,
        e: FactorFunction,
        f: FactorFunction,
        excluded: ExcludedSet,
        structure: ExtensionStructure,
        pencil: Option<PencilInfo>,
        w_s_det_degree: usize,
        w_t_det_degree: usize,
    ) -> Result<Self> {
        let (ws_r, ws_c) = fdim(&w_s);
        let (wt_r, wt_c) = fdim(&w_t);
        let lhs_ext = (lhs.total_rows() + ws_r, lhs.total_cols() + ws_c);
        let rhs_ext = (rhs.total_rows() + wt_r, rhs.total_cols() + wt_c);
        if lhs_ext.0 != rhs_ext.0 || lhs_ext.1 != rhs_ext.1 {
            return Err(Error::StructuralMismatch(format!(
                "extended sides disagree: {lhs_ext:?} vs {rhs_ext:?}"
            )));
        }
        if (e.rows(), e.cols()) != (lhs_ext.0, rhs_ext.0) {
            return Err(Error::StructuralMismatch(format!(
                "E is {}x{}, expected {}x{}",
                e.rows(),
                e.cols(),
                lhs_ext.0,
                rhs_ext.0
            )));
        }
        if (f.rows(), f.cols()) != (rhs_ext.1, lhs_ext.1) {
            return Err(Error::StructuralMismatch(format!(
                "F is {}x{}, expected {}x{}",
                f.rows(),
                f.cols(),
                rhs_ext.1,
                lhs_ext.1
            )));
        }
        if let ExtensionStructure::Interleaved { lhs_rows, lhs_cols } = &structure {
            ExtensionStructure::validate(lhs_rows, lhs.total_rows(), ws_r, "lhs rows")?;
            ExtensionStructure::validate(lhs_cols, lhs.total_cols(), ws_c, "lhs cols")?;
        }
        Ok(Self {
            lhs,
            rhs,
            w_s,
            w_t,
            e,
            f,
            excluded,
            structure,
            pencil,
            w_s_det_degree,
            w_t_det_degree,
        })
    }

    /// Certificate stating S = I * S * I.
    pub fn identity(bof: BlockOperatorFunction) -> Result<Self> {
        let excluded = bof.excluded_points()?;
        let e = FactorFunction::identity(bof.total_rows());
        let f = FactorFunction::identity(bof.total_cols());
        Self::new(
            bof.clone(),
            bof,
            None,
            None,
            e,
            f,
            excluded,
            ExtensionStructure::Direct,
            None,
            0,
            0,
        )
    }

    pub fn lhs_ext_rows(&self) -> usize {
        self.lhs.total_rows() + fdim(&self.w_s).0
    }

    pub fn lhs_ext_cols(&self) -> usize {
        self.lhs.total_cols() + fdim(&self.w_s).1
    }

    /// The assembled left side S + W_S at a point.
    pub fn eval_lhs_extended(&self, lambda: Complex64) -> Result<CMatrix> {
        let base = self.lhs.eval(lambda)?;
        let ext = match &self.w_s {
            None => return Ok(base),
            Some(w) => w.eval(lambda)?,
        };
        match &self.structure {
            ExtensionStructure::Direct => Ok(base.direct_sum(&ext)),
            ExtensionStructure::Interleaved { lhs_rows, lhs_cols } => {
                let mut out = CMatrix::zeros(lhs_rows.len(), lhs_cols.len());
                for (r, rs) in lhs_rows.iter().enumerate() {
                    for (c, cs) in lhs_cols.iter().enumerate() {
                        out[(r, c)] = match (rs, cs) {
                            (Slot::Base(i), Slot::Base(j)) => base[(*i, *j)],
                            (Slot::Ext(i), Slot::Ext(j)) => ext[(*i, *j)],
                            _ => Complex64::new(0.0, 0.0),
                        };
                    }
                }
                Ok(out)
            }
        }
    }

    /// The assembled right side T + W_T (always appended).
    pub fn eval_rhs_extended(&self, lambda: Complex64) -> Result<CMatrix> {
        let base = self.rhs.eval(lambda)?;
        match &self.w_t {
            None => Ok(base),
            Some(w) => Ok(base.direct_sum(&w.eval(lambda)?)),
        }
    }

    /// Interpolation bound for det of the extended left side.
    pub fn lhs_det_degree_bound(&self) -> usize {
        cleared_det_bound(&self.lhs) + self.w_s_det_degree
    }

    pub fn rhs_det_degree_bound(&self) -> usize {
        cleared_det_bound(&self.rhs) + self.w_t_det_degree
    }
}

fn rough_entry_degree(e: &Entry) -> usize {
    let d = |p: &MatrixPolynomial| p.trimmed_degree().as_fin().unwrap_or(0).max(0) as usize;
    match e {
        Entry::Polynomial(p) => d(p),
        Entry::Product(factors) => factors.iter().map(d).sum(),
        Entry::SchurComplement { a, b, c, d: dd } => d(a).max(d(b)).max(d(c)).max(d(dd)),
    }
}

/// Upper bound on the degree of det(F) after Schur denominators are cleared
/// by the extension.
fn cleared_det_bound(bof: &BlockOperatorFunction) -> usize {
    let n = bof.grid_size();
    let mut bound = 0usize;
    for i in 0..n {
        let mut colmax = 0usize;
        for j in 0..n {
            colmax = colmax.max(rough_entry_degree(bof.entry(j, i)));
        }
        bound += colmax * bof.col_layout().dims()[i];
    }
    for row in bof.entries() {
        for e in row {
            if let Entry::SchurComplement { d, .. } = e {
                bound += rough_entry_degree(e) * d.row_dim();
            }
        }
    }
    bound
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub sample_points: Vec<Complex64>,
    pub factorization_residuals: Vec<f64>,
    pub e_conditions: Vec<f64>,
    pub f_conditions: Vec<f64>,
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

fn draw_sample(rng: &mut SampleRng, excluded: &ExcludedSet) -> Result<Complex64> {
    for _ in 0..MAX_REDRAWS {
        let z = rng.next_annulus(SAMPLE_RADIUS_MIN, SAMPLE_RADIUS_MAX);
        if !excluded.contains_near(z, SAMPLE_EXCLUSION_RADIUS) {
            return Ok(z);
        }
    }
    Err(Error::ExcludedPointUnavoidable(MAX_REDRAWS))
}

/// Check `S + W_S = E (T + W_T) F` at random annulus points.
pub fn verify_certificate(
    cert: &EquivalenceCertificate,
    samples: usize,
    tol: f64,
    rng_seed: u64,
) -> Result<VerificationReport> {
    let mut rng = SampleRng::new(rng_seed);
    let mut sample_points = Vec::with_capacity(samples);
    let mut residuals = Vec::with_capacity(samples);
    let mut e_conditions = Vec::with_capacity(samples);
    let mut f_conditions = Vec::with_capacity(samples);
    let mut k = 0;
    let mut consecutive_failures = 0;
    while k < samples {
        let lambda = draw_sample(&mut rng, &cert.excluded)?;
        // an evaluation failure right at a near-excluded draw counts as a
        // redraw, anything persistent is surfaced
        let pieces = (|| -> Result<(CMatrix, CMatrix, CMatrix, CMatrix)> {
            Ok((
                cert.eval_lhs_extended(lambda)?,
                cert.e.eval(lambda)?,
                cert.eval_rhs_extended(lambda)?,
                cert.f.eval(lambda)?,
            ))
        })();
        let (l, e, r, f) = match pieces {
            Ok(t) => t,
            Err(Error::EvaluationAtExcludedPoint { .. }) | Err(Error::NumericallySingular { .. }) => {
                consecutive_failures += 1;
                if consecutive_failures >= MAX_REDRAWS {
                    return Err(Error::ExcludedPointUnavoidable(MAX_REDRAWS));
                }
                continue;
            }
            Err(err) => return Err(err),
        };
        consecutive_failures = 0;
        let erf = e.matmul(&r)?.matmul(&f)?;
        let residual = l.sub(&erf)?.fro_norm() / l.fro_norm().max(1.0);
        sample_points.push(lambda);
        residuals.push(residual);
        e_conditions.push(e.rcond());
        f_conditions.push(f.rcond());
        k += 1;
    }
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    let cond_ok = e_conditions
        .iter()
        .chain(&f_conditions)
        .all(|&c| c >= CERT_RCOND_FLOOR);
    Ok(VerificationReport {
        sample_points,
        factorization_residuals: residuals,
        e_conditions,
        f_conditions,
        max_residual,
        tol,
        pass: max_residual <= tol && cond_ok,
    })
}

// ---------------------------------------------------------------------------
// Spectral comparison through a certificate
// ---------------------------------------------------------------------------

/// Compare the spectrum certified on the right (pencil eigenvalues when a
/// pencil is recorded, determinant roots of the right side otherwise)
/// against the independent determinant-root oracle applied to the extended
/// left side.
pub fn certificate_spectra(
    cert: &EquivalenceCertificate,
    tol: f64,
) -> Result<SpectrumReport> {
    let (pencil_side, rhs_deflated) = match &cert.pencil {
        Some(p) => (spectra::eig_dense(&p.t)?, 0),
        None => spectra::det_roots_fn_deflated(
            |l| cert.eval_rhs_extended(l),
            cert.rhs_det_degree_bound(),
            if cert.excluded.contains_near(Complex64::new(0.0, 0.0), 1e-12) {
                cert.w_t_det_degree
            } else {
                0
            },
        )?,
    };
    let deflate_lhs = if cert.excluded.contains_near(Complex64::new(0.0, 0.0), 1e-12) {
        cert.w_s_det_degree
    } else {
        0
    };
    let (oracle, lhs_deflated) = spectra::det_roots_fn_deflated(
        |l| cert.eval_lhs_extended(l),
        cert.lhs_det_degree_bound(),
        deflate_lhs,
    )?;
    let mut report = spectra::compare_spectra(&pencil_side, &oracle, &cert.excluded, tol);
    for _ in 0..rhs_deflated + lhs_deflated {
        report
            .excluded_discarded
            .push(Complex64::new(0.0, 0.0));
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Composition
// ---------------------------------------------------------------------------

/// Permutation order mapping (T, C, B) to (T, B, C).
fn tail_swap_order(t: usize, b: usize, c: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..t).collect();
    order.extend(t + c..t + c + b);
    order.extend(t..t + c);
    order
}

fn padded_graft(b: &mut FactorBuilder, f: &FactorFunction, pad: usize) -> Result<usize> {
    let id = b.graft(f);
    if pad == 0 {
        Ok(id)
    } else {
        let i = b.identity(pad);
        b.direct_sum(id, i)
    }
}

fn structure_perm(
    structure: &ExtensionStructure,
    base_rows: usize,
    ext_rows: usize,
    base_cols: usize,
    ext_cols: usize,
) -> (Vec<usize>, Vec<usize>) {
    match structure {
        ExtensionStructure::Direct => (
            (0..base_rows + ext_rows).collect(),
            (0..base_cols + ext_cols).collect(),
        ),
        ExtensionStructure::Interleaved { lhs_rows, lhs_cols } => {
            let canon = |s: &Slot, base: usize| match *s {
                Slot::Base(i) => i,
                Slot::Ext(i) => base + i,
            };
            (
                lhs_rows.iter().map(|s| canon(s, base_rows)).collect(),
                lhs_cols.iter().map(|s| canon(s, base_cols)).collect(),
            )
        }
    }
}

/// Stack two certificates: from `c1: S ~ T1` and `c2: T1 ~ T2` build
/// `S ~ T2` with the extensions stacked on both sides.
pub fn compose_certificates(
    c1: &EquivalenceCertificate,
    c2: &EquivalenceCertificate,
) -> Result<EquivalenceCertificate> {
    if c1.rhs != c2.lhs {
        return Err(Error::StructuralMismatch(
            "rhs of the first certificate differs from lhs of the second".into(),
        ));
    }
    if c1.w_t.is_some() {
        // would need a grid slot for W_T inside the middle function
        return Err(Error::StructuralMismatch(
            "composition over a right-extended middle is not supported".into(),
        ));
    }
    let (a_r, a_c) = fdim(&c1.w_s); // A = W_S1
    let (b_r, b_c) = fdim(&c1.w_t); // B = W_T1 (zero here)
    let (c_r, c_c) = fdim(&c2.w_s); // C = W_S2
    let t1_r = c1.rhs.total_rows();
    let t1_c = c1.rhs.total_cols();

    // E_comp = (E1 + I_C) * Pi_rows * (P_r2^T E2 + I_B)
    // F_comp = (F2 P_c2 + I_B) * Pi_cols^T * (F1 + I_C)
    let (p_r2, p_c2) = structure_perm(&c2.structure, t1_r, c_r, t1_c, c_c);
    let pi_rows = tail_swap_order(t1_r, b_r, c_r);
    let pi_cols = tail_swap_order(t1_c, b_c, c_c);

    let mut be = FactorBuilder::new();
    let e1p = padded_graft(&mut be, &c1.e, c_r)?;
    let pi_r = be.constant(CMatrix::permutation(&pi_rows));
    let e2g = be.graft(&c2.e);
    let pr2t = be.constant(CMatrix::permutation(&p_r2).transpose());
    let e2c = be.product(vec![pr2t, e2g])?;
    let e2p = if b_r == 0 {
        e2c
    } else {
        let ib = be.identity(b_r);
        be.direct_sum(e2c, ib)?
    };
    let e_root = be.product(vec![e1p, pi_r, e2p])?;
    let e_comp = be.finish(e_root);

    let mut bf = FactorBuilder::new();
    let f2g = bf.graft(&c2.f);
    let pc2 = bf.constant(CMatrix::permutation(&p_c2));
    let f2c = bf.product(vec![f2g, pc2])?;
    let f2p = if b_c == 0 {
        f2c
    } else {
        let ib = bf.identity(b_c);
        bf.direct_sum(f2c, ib)?
    };
    let pi_c_t = bf.constant(CMatrix::permutation(&pi_cols).transpose());
    let f1p = padded_graft(&mut bf, &c1.f, c_c)?;
    let f_root = bf.product(vec![f2p, pi_c_t, f1p])?;
    let f_comp = bf.finish(f_root);

    // stacked extensions
    let w_s = match (&c1.w_s, &c2.w_s) {
        (None, None) => None,
        (Some(a), None) => Some(a.clone()),
        (None, Some(c)) => Some(c.clone()),
        (Some(a), Some(c)) => {
            let mut b = FactorBuilder::new();
            let ai = b.graft(a);
            let ci = b.graft(c);
            let root = b.direct_sum(ai, ci)?;
            Some(b.finish(root))
        }
    };
    let w_t = match (&c2.w_t, &c1.w_t) {
        (None, None) => None,
        (Some(d), None) => Some(d.clone()),
        (None, Some(b)) => Some(b.clone()),
        (Some(d), Some(bb)) => {
            let mut b = FactorBuilder::new();
            let di = b.graft(d);
            let bi = b.graft(bb);
            let root = b.direct_sum(di, bi)?;
            Some(b.finish(root))
        }
    };

    // composite lhs assembly: c1's slots, then W_S2 appended
    let structure = match (&c1.structure, c_r) {
        (ExtensionStructure::Direct, _) => ExtensionStructure::Direct,
        (ExtensionStructure::Interleaved { lhs_rows, lhs_cols }, _) => {
            let mut rows = lhs_rows.clone();
            rows.extend((0..c_r).map(|i| Slot::Ext(a_r + i)));
            let mut cols = lhs_cols.clone();
            cols.extend((0..c_c).map(|i| Slot::Ext(a_c + i)));
            ExtensionStructure::Interleaved {
                lhs_rows: rows,
                lhs_cols: cols,
            }
        }
    };

    EquivalenceCertificate::new(
        c1.lhs.clone(),
        c2.rhs.clone(),
        w_s,
        w_t,
        e_comp,
        f_comp,
        c1.excluded.union(&c2.excluded),
        structure,
        c2.pencil.clone(),
        c1.w_s_det_degree + c2.w_s_det_degree,
        c1.w_t_det_degree + c2.w_t_det_degree,
    )
}

// ---------------------------------------------------------------------------
// Corner embedding
// ---------------------------------------------------------------------------

/// Fit a matrix polynomial to a lambda-function by DFT interpolation on a
/// circle, then check the fit at fresh points.
pub(crate) fn fit_polynomial(
    mut f: impl FnMut(Complex64) -> Result<CMatrix>,
    rows: usize,
    cols: usize,
    degree_bound: usize,
) -> Result<MatrixPolynomial> {
    const RADIUS: f64 = 1.5;
    let n_pts = (degree_bound + 1).next_power_of_two().max(2);
    let mut values = Vec::with_capacity(n_pts);
    for j in 0..n_pts {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / n_pts as f64;
        values.push(f(Complex64::from_polar(RADIUS, theta))?);
    }
    let mut coeffs = Vec::with_capacity(degree_bound + 1);
    let mut radius_pow = 1.0;
    for k in 0..=degree_bound.min(n_pts - 1) {
        let mut acc = CMatrix::zeros(rows, cols);
        for (j, v) in values.iter().enumerate() {
            let theta = -2.0 * std::f64::consts::PI * ((j * k) % n_pts) as f64 / n_pts as f64;
            acc = acc.add(&v.scale(Complex64::from_polar(1.0, theta)))?;
        }
        coeffs.push(acc.scale(Complex64::new(1.0 / (n_pts as f64 * radius_pow), 0.0)));
        radius_pow *= RADIUS;
    }
    let poly = MatrixPolynomial::new(rows, cols, coeffs)?.trim(1e-11);
    // validate at fresh points
    let mut rng = SampleRng::new(0xF17);
    let mut worst = 0.0f64;
    let scale = poly.coeff_scale().max(1.0);
    for _ in 0..5 {
        let lambda = rng.next_annulus(0.6, 1.9);
        let err = f(lambda)?.sub(&poly.eval(lambda))?.max_norm();
        worst = worst.max(err / scale);
    }
    if worst > 1e-7 {
        return Err(Error::NotPolynomial {
            residual: worst,
            bound: degree_bound,
        });
    }
    Ok(poly)
}

/// Corner embedding: given `inner` certifying the single entry
/// `S ~ T` (possibly after extension) and side factors satisfying the
/// compatibility identity, produce a certificate for [S X; Y Z].
///
/// The off-diagonal blocks of the new right-hand side are
/// `E^{-1} X - T Fside` and `Y F^{-1} - Eside T`; they are fitted as matrix
/// polynomials so the result stays a polynomial-entry grid, and inputs for
/// which they are not polynomial are rejected.
pub fn embed_corner(
    inner: &EquivalenceCertificate,
    x: &Entry,
    y: &Entry,
    z: &Entry,
    side_e: Option<&FactorFunction>,
    side_f: Option<&FactorFunction>,
) -> Result<EquivalenceCertificate> {
    embed_corner_with_rhs(inner, x, y, z, side_e, side_f, None)
}

/// As `embed_corner`, but with the off-diagonal right-hand-side blocks given
/// in closed form (column entries then row entries); the side condition is
/// still probed numerically.
pub(crate) fn embed_corner_with_rhs(
    inner: &EquivalenceCertificate,
    x: &Entry,
    y: &Entry,
    z: &Entry,
    side_e: Option<&FactorFunction>,
    side_f: Option<&FactorFunction>,
    rhs_corners: Option<(Vec<Entry>, Vec<Entry>)>,
) -> Result<EquivalenceCertificate> {
    if inner.lhs.grid_size() != 1 {
        return Err(Error::StructuralMismatch(
            "corner embedding expects a single-entry inner left side".into(),
        ));
    }
    if inner.w_t.is_some() {
        return Err(Error::StructuralMismatch(
            "corner embedding over a right-extended inner is not supported".into(),
        ));
    }
    let s_entry = inner.lhs.entry(0, 0).clone();
    let (s_r, s_c) = (s_entry.row_dim(), s_entry.col_dim());
    let (z_r, z_c) = (z.row_dim(), z.col_dim());
    for (name, got, want) in [
        ("X rows", x.row_dim(), s_r),
        ("X cols", x.col_dim(), z_c),
        ("Y rows", y.row_dim(), z_r),
        ("Y cols", y.col_dim(), s_c),
    ] {
        if got != want {
            return Err(Error::StructuralMismatch(format!(
                "{name}: got {got}, expected {want}"
            )));
        }
    }
    let (w_r, w_c) = fdim(&inner.w_s);
    let t_rows = inner.rhs.total_rows();
    let t_cols = inner.rhs.total_cols();

    // lifted corners on the extended inner space
    let xhat = {
        let mut b = FactorBuilder::new();
        let xe = b.entry(x)?;
        let root = if w_r == 0 {
            xe
        } else {
            let zero = b.constant(CMatrix::zeros(w_r, z_c));
            b.block(vec![s_r, w_r], vec![z_c], vec![(0, 0, xe), (1, 0, zero)])?
        };
        b.finish(root)
    };
    let yhat = {
        let mut b = FactorBuilder::new();
        let ye = b.entry(y)?;
        let root = if w_c == 0 {
            ye
        } else {
            let zero = b.constant(CMatrix::zeros(z_r, w_c));
            b.block(vec![z_r], vec![s_c, w_c], vec![(0, 0, ye), (0, 1, zero)])?
        };
        b.finish(root)
    };

    // side condition (7): Eside E^{-1} Xhat + Yhat F^{-1} Fside - Eside T Fside = 0
    let probe_scale = |m: &CMatrix| m.fro_norm();
    {
        let mut rng = SampleRng::new(0x51DE);
        for _ in 0..5 {
            let lambda = draw_sample(&mut rng, &inner.excluded)?;
            let e_val = inner.e.eval(lambda)?;
            let f_val = inner.f.eval(lambda)?;
            let t_val = inner.eval_rhs_extended(lambda)?;
            let xv = xhat.eval(lambda)?;
            let yv = yhat.eval(lambda)?;
            let mut res = CMatrix::zeros(z_r, z_c);
            let mut scale = 1.0f64;
            if let Some(es) = side_e {
                let term = es.eval(lambda)?.matmul(&e_val.lu()?.solve(&xv)?)?;
                scale = scale.max(probe_scale(&term));
                res = res.add(&term)?;
            }
            if let Some(fs) = side_f {
                // Y F^{-1} Fs = (F^T)^{-1}-free: solve on the right via transposes
                let finv = crate::algebra::mat_inv(&f_val)?;
                let term = yv.matmul(&finv)?.matmul(&fs.eval(lambda)?)?;
                scale = scale.max(probe_scale(&term));
                res = res.add(&term)?;
            }
            if let (Some(es), Some(fs)) = (side_e, side_f) {
                let term = es
                    .eval(lambda)?
                    .matmul(&t_val)?
                    .matmul(&fs.eval(lambda)?)?;
                scale = scale.max(probe_scale(&term));
                res = res.sub(&term)?;
            }
            let rel = res.fro_norm() / scale;
            if rel > 1e-8 {
                return Err(Error::SideConditionViolated {
                    lambda,
                    residual: rel,
                    tol: 1e-8,
                });
            }
        }
    }

    // right-hand-side corner blocks
    let (col_blocks, row_blocks): (Vec<Entry>, Vec<Entry>) = match rhs_corners {
        Some(c) => c,
        None => {
            let bound = rough_entry_degree(x).max(rough_entry_degree(y))
                + cleared_det_bound(&inner.rhs).max(2)
                + 2;
            let col_expr = |lambda: Complex64| -> Result<CMatrix> {
                let e_val = inner.e.eval(lambda)?;
                let xv = xhat.eval(lambda)?;
                let mut out = e_val.lu()?.solve(&xv)?;
                if let Some(fs) = side_f {
                    let t_val = inner.eval_rhs_extended(lambda)?;
                    out = out.sub(&t_val.matmul(&fs.eval(lambda)?)?)?;
                }
                Ok(out)
            };
            let row_expr = |lambda: Complex64| -> Result<CMatrix> {
                let f_val = inner.f.eval(lambda)?;
                let yv = yhat.eval(lambda)?;
                let mut out = yv.matmul(&crate::algebra::mat_inv(&f_val)?)?;
                if let Some(es) = side_e {
                    let t_val = inner.eval_rhs_extended(lambda)?;
                    out = out.sub(&es.eval(lambda)?.matmul(&t_val)?)?;
                }
                Ok(out)
            };
            let col_fit = fit_polynomial(col_expr, t_rows, z_c, bound)?;
            let row_fit = fit_polynomial(row_expr, z_r, t_cols, bound)?;
            // slice into per-block entries
            let rl = inner.rhs.row_layout().clone();
            let cl = inner.rhs.col_layout().clone();
            let mut cols_out = Vec::new();
            for bi in 0..rl.len() {
                let r0 = rl.offset(bi);
                let rows = rl.dims()[bi];
                let coeffs: Vec<CMatrix> = col_fit
                    .coeffs()
                    .iter()
                    .map(|c| c.block(r0, 0, rows, z_c))
                    .collect();
                cols_out.push(Entry::Polynomial(
                    MatrixPolynomial::new(rows, z_c, coeffs)?.trim(1e-11),
                ));
            }
            let mut rows_out = Vec::new();
            for bi in 0..cl.len() {
                let c0 = cl.offset(bi);
                let cols = cl.dims()[bi];
                let coeffs: Vec<CMatrix> = row_fit
                    .coeffs()
                    .iter()
                    .map(|c| c.block(0, c0, z_r, cols))
                    .collect();
                rows_out.push(Entry::Polynomial(
                    MatrixPolynomial::new(z_r, cols, coeffs)?.trim(1e-11),
                ));
            }
            (cols_out, rows_out)
        }
    };

    // assemble the new right-hand-side grid
    let n = inner.rhs.grid_size();
    let mut row_dims = inner.rhs.row_layout().dims().to_vec();
    row_dims.push(z_r);
    let mut col_dims = inner.rhs.col_layout().dims().to_vec();
    col_dims.push(z_c);
    let mut entries: Vec<Vec<Entry>> = Vec::with_capacity(n + 1);
    for j in 0..n {
        let mut row: Vec<Entry> = (0..n)
            .map(|i| inner.rhs.entry(j, i).clone())
            .collect();
        row.push(col_blocks[j].clone());
        entries.push(row);
    }
    let mut last: Vec<Entry> = row_blocks.clone();
    last.push(z.clone());
    entries.push(last);
    let rhs = BlockOperatorFunction::new(
        crate::blockfun::SpaceLayout::new(row_dims)?,
        crate::blockfun::SpaceLayout::new(col_dims)?,
        entries,
    )?;

    // factors: E' = [E 0; Eside I], F' = [F Fside; 0 I]
    let e_new = {
        let mut b = FactorBuilder::new();
        let eg = b.graft(&inner.e);
        let iz = b.identity(z_r);
        let mut blocks = vec![(0, 0, eg), (1, 1, iz)];
        if let Some(es) = side_e {
            let eid = b.graft(es);
            blocks.push((1, 0, eid));
        }
        let root = b.block(vec![s_r + w_r, z_r], vec![t_rows, z_r], blocks)?;
        b.finish(root)
    };
    let f_new = {
        let mut b = FactorBuilder::new();
        let fg = b.graft(&inner.f);
        let iz = b.identity(z_c);
        let mut blocks = vec![(0, 0, fg), (1, 1, iz)];
        if let Some(fs) = side_f {
            let fid = b.graft(fs);
            blocks.push((0, 1, fid));
        }
        let root = b.block(vec![t_cols, z_c], vec![s_c + w_c, z_c], blocks)?;
        b.finish(root)
    };

    // new lhs grid [S X; Y Z] with W_S spliced between the two block rows
    let lhs = BlockOperatorFunction::new(
        crate::blockfun::SpaceLayout::new(vec![s_r, z_r])?,
        crate::blockfun::SpaceLayout::new(vec![s_c, z_c])?,
        vec![
            vec![s_entry, x.clone()],
            vec![y.clone(), z.clone()],
        ],
    )?;
    let structure = if inner.w_s.is_none() {
        ExtensionStructure::Direct
    } else {
        let mut rows: Vec<Slot> = (0..s_r).map(Slot::Base).collect();
        rows.extend((0..w_r).map(Slot::Ext));
        rows.extend((s_r..s_r + z_r).map(Slot::Base));
        let mut cols: Vec<Slot> = (0..s_c).map(Slot::Base).collect();
        cols.extend((0..w_c).map(Slot::Ext));
        cols.extend((s_c..s_c + z_c).map(Slot::Base));
        ExtensionStructure::Interleaved {
            lhs_rows: rows,
            lhs_cols: cols,
        }
    };
    let mut excluded = inner.excluded.clone();
    for entry in [x, y, z] {
        let ex = crate::blockfun::entry_excluded_points(entry)?;
        if !ex.is_empty() {
            excluded = excluded.union(&ex);
        }
    }
    EquivalenceCertificate::new(
        lhs,
        rhs,
        inner.w_s.clone(),
        None,
        e_new,
        f_new,
        excluded,
        structure,
        None,
        inner.w_s_det_degree,
        0,
    )
}
