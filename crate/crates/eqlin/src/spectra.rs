//! Dense eigensolver and the independent determinant-root oracle.
//!
//! `eig_dense` is a complex Hessenberg–QR iteration (single Wilkinson shift,
//! Givens sweeps). `det_poly_roots` computes the spectrum of a matrix
//! function the slow, independent way: interpolate the scalar determinant on
//! a circle, fit the polynomial by inverse DFT and take companion-matrix
//! roots. `compare_spectra` pairs the two multisets and reports.

use num_complex::Complex64;

use crate::algebra::CMatrix;
use crate::blockfun::{BlockOperatorFunction, ExcludedSet};
use crate::error::{Error, Result};

/// Radius of the interpolation circle used by the determinant oracle.
const ORACLE_RADIUS: f64 = 1.5;

/// Roots closer than this to an excluded point are discounted before pairing.
pub const EXCLUDED_DISCARD_RADIUS: f64 = 1e-6;

// ---------------------------------------------------------------------------
// Dense eigenvalues
// ---------------------------------------------------------------------------

/// All eigenvalues of a square complex matrix, sorted by (re, im).
pub fn eig_dense(a: &CMatrix) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues of non-square {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![a[(0, 0)]]);
    }
    let h = hessenberg(a);
    let mut eigs = hessenberg_qr(h)?;
    eigs.sort_by(|x, y| {
        x.re.partial_cmp(&y.re)
            .unwrap()
            .then(x.im.partial_cmp(&y.im).unwrap())
    });
    Ok(eigs)
}

/// Reduce to upper Hessenberg form by complex Householder reflections.
fn hessenberg(a: &CMatrix) -> CMatrix {
    let n = a.rows();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let mut x = vec![Complex64::new(0.0, 0.0); m];
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = h[(k + 1 + i, k)];
        }
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = x[0];
        let sigma = if x0.norm() == 0.0 {
            Complex64::new(xnorm, 0.0)
        } else {
            (x0 / x0.norm()) * xnorm
        };
        let mut v = x;
        v[0] += sigma;
        let vnorm_sqr = v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if vnorm_sqr == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm_sqr;
        // left: rows k+1..n over columns k..n
        for col in k..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for i in 0..m {
                dot += v[i].conj() * h[(k + 1 + i, col)];
            }
            dot *= beta;
            for i in 0..m {
                let upd = v[i] * dot;
                h[(k + 1 + i, col)] -= upd;
            }
        }
        // right: columns k+1..n over all rows
        for row in 0..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for i in 0..m {
                dot += h[(row, k + 1 + i)] * v[i];
            }
            dot *= beta;
            for i in 0..m {
                let upd = dot * v[i].conj();
                h[(row, k + 1 + i)] -= upd;
            }
        }
        for i in 2..=m {
            h[(k + i, k)] = Complex64::new(0.0, 0.0);
        }
    }
    h
}

/// Givens rotation [c s; -conj(s) c] with real c mapping (a, b) to (r, 0).
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    if b.norm() == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if a.norm() == 0.0 {
        return (0.0, b.conj() / b.norm());
    }
    let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let alpha = a / a.norm();
    (a.norm() / norm, alpha * b.conj() / norm)
}

/// Eigenvalues of a 2x2 complex matrix.
fn eig_2x2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let half = Complex64::new(0.5, 0.0);
    let mid = (a + d) * half;
    let det = a * d - b * c;
    let disc = (mid * mid - det).sqrt();
    (mid + disc, mid - disc)
}

/// Single-shift QR iteration on an upper Hessenberg matrix.
fn hessenberg_qr(mut h: CMatrix) -> Result<Vec<Complex64>> {
    let n = h.rows();
    let eps = f64::EPSILON;
    let hnorm = h.max_norm().max(f64::MIN_POSITIVE);
    let mut eigs = vec![Complex64::new(0.0, 0.0); n];
    let mut ihi = n;
    let max_total = 60 * n;
    let mut total_iter = 0usize;
    let mut stall = 0usize;
    while ihi > 0 {
        // deflation scan within the trailing active block
        let mut lo = ihi - 1;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let mut tst = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if tst == 0.0 {
                tst = hnorm;
            }
            if sub <= eps * tst {
                h[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == ihi - 1 {
            eigs[ihi - 1] = h[(ihi - 1, ihi - 1)];
            ihi -= 1;
            stall = 0;
            continue;
        }
        if lo == ihi - 2 {
            let (l1, l2) = eig_2x2(
                h[(ihi - 2, ihi - 2)],
                h[(ihi - 2, ihi - 1)],
                h[(ihi - 1, ihi - 2)],
                h[(ihi - 1, ihi - 1)],
            );
            eigs[ihi - 2] = l1;
            eigs[ihi - 1] = l2;
            ihi -= 2;
            stall = 0;
            continue;
        }
        total_iter += 1;
        stall += 1;
        if total_iter > max_total {
            return Err(Error::NonConvergence(max_total));
        }
        let shift = if stall % 12 == 11 {
            // exceptional shift to break rare cycling
            h[(ihi - 1, ihi - 1)]
                + Complex64::new(0.75 * h[(ihi - 1, ihi - 2)].norm(), 0.0)
        } else {
            let (l1, l2) = eig_2x2(
                h[(ihi - 2, ihi - 2)],
                h[(ihi - 2, ihi - 1)],
                h[(ihi - 1, ihi - 2)],
                h[(ihi - 1, ihi - 1)],
            );
            let d = h[(ihi - 1, ihi - 1)];
            if (l1 - d).norm() <= (l2 - d).norm() {
                l1
            } else {
                l2
            }
        };
        // explicit shifted QR step on h[lo..ihi]
        for i in lo..ihi {
            let v = h[(i, i)] - shift;
            h[(i, i)] = v;
        }
        let mut rots = Vec::with_capacity(ihi - lo - 1);
        for i in lo..ihi - 1 {
            let (c, s) = givens(h[(i, i)], h[(i + 1, i)]);
            rots.push((c, s));
            for col in i..ihi {
                let t1 = h[(i, col)];
                let t2 = h[(i + 1, col)];
                h[(i, col)] = t1 * c + t2 * s;
                h[(i + 1, col)] = -t1 * s.conj() + t2 * c;
            }
        }
        for (idx, &(c, s)) in rots.iter().enumerate() {
            let i = lo + idx;
            for row in lo..(i + 2).min(ihi) {
                let t1 = h[(row, i)];
                let t2 = h[(row, i + 1)];
                h[(row, i)] = t1 * c + t2 * s.conj();
                h[(row, i + 1)] = -t1 * s + t2 * c;
            }
        }
        for i in lo..ihi {
            let v = h[(i, i)] + shift;
            h[(i, i)] = v;
        }
    }
    Ok(eigs)
}

// ---------------------------------------------------------------------------
// Determinant-root oracle
// ---------------------------------------------------------------------------

/// Companion matrix of a monic-normalized scalar polynomial with the given
/// ascending coefficients (last entry is the leading coefficient).
fn scalar_companion(coeffs: &[Complex64]) -> CMatrix {
    let deg = coeffs.len() - 1;
    let lead = coeffs[deg];
    let mut t = CMatrix::zeros(deg, deg);
    for c in 0..deg {
        t[(0, c)] = -coeffs[deg - 1 - c] / lead;
    }
    for r in 1..deg {
        t[(r, r - 1)] = Complex64::new(1.0, 0.0);
    }
    t
}

/// Roots of `det f(lambda)` where the determinant is a polynomial of degree
/// at most `degree_bound`: interpolate on a circle, inverse DFT, trim, and
/// take companion-matrix eigenvalues.
pub fn det_roots_fn(
    f: impl FnMut(Complex64) -> Result<CMatrix>,
    degree_bound: usize,
) -> Result<Vec<Complex64>> {
    det_roots_fn_deflated(f, degree_bound, 0).map(|(roots, _)| roots)
}

/// As `det_roots_fn`, but with up to `deflate_zero` known roots at the
/// origin divided out exactly from the fitted coefficients. Extensions like
/// W(lambda) contribute det factors that are pure powers of lambda; dividing
/// them out beats trying to pair their high-multiplicity numerical cluster.
/// Returns the remaining roots and the number of zeros deflated.
pub fn det_roots_fn_deflated(
    mut f: impl FnMut(Complex64) -> Result<CMatrix>,
    degree_bound: usize,
    deflate_zero: usize,
) -> Result<(Vec<Complex64>, usize)> {
    let n_pts = (degree_bound + 1).next_power_of_two().max(2);
    let mut dets = Vec::with_capacity(n_pts);
    for j in 0..n_pts {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / n_pts as f64;
        let lambda = Complex64::from_polar(ORACLE_RADIUS, theta);
        let m = f(lambda)?;
        let det = m.lu()?.det();
        dets.push(det);
    }
    let det_scale = dets.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if det_scale == 0.0 {
        return Err(Error::DegenerateDeterminant);
    }
    // c_k = (1/N) sum_j det_j w^{-jk} / r^k
    let mut coeffs = Vec::with_capacity(n_pts);
    let mut radius_pow = 1.0;
    for k in 0..n_pts {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, det) in dets.iter().enumerate() {
            let theta = -2.0 * std::f64::consts::PI * (j * k % n_pts) as f64 / n_pts as f64;
            acc += det * Complex64::from_polar(1.0, theta);
        }
        coeffs.push(acc / (n_pts as f64) / radius_pow);
        radius_pow *= ORACLE_RADIUS;
    }
    if degree_bound + 1 < n_pts {
        coeffs.truncate(degree_bound + 1);
    }
    let coeff_scale = coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if coeff_scale <= 1e-10 * det_scale.max(1.0) {
        return Err(Error::DegenerateDeterminant);
    }
    while coeffs
        .last()
        .is_some_and(|z| z.norm() <= 1e-9 * coeff_scale)
    {
        coeffs.pop();
    }
    let mut deflated = 0usize;
    while deflated < deflate_zero
        && coeffs.len() > 1
        && coeffs
            .first()
            .is_some_and(|z| z.norm() <= 1e-8 * coeff_scale)
    {
        coeffs.remove(0);
        deflated += 1;
    }
    if coeffs.len() <= 1 {
        // nonzero constant determinant: no roots left
        return Ok((Vec::new(), deflated));
    }
    let mut roots = eig_dense(&scalar_companion(&coeffs))?;
    roots.sort_by(|x, y| {
        x.re.partial_cmp(&y.re)
            .unwrap()
            .then(x.im.partial_cmp(&y.im).unwrap())
    });
    Ok((roots, deflated))
}

/// Determinant degree bound for a polynomial block function:
/// sum over columns of (max entry degree in the column) x (column dimension).
pub fn det_degree_bound(f: &BlockOperatorFunction) -> usize {
    let n = f.grid_size();
    let mut bound = 0usize;
    for i in 0..n {
        let mut col_max = 0usize;
        for j in 0..n {
            if let Some(p) = f.entry(j, i).as_polynomial() {
                if let Some(d) = p.trimmed_degree().as_fin() {
                    col_max = col_max.max(d as usize);
                }
            }
        }
        bound += col_max * f.col_layout().dims()[i];
    }
    bound
}

/// Spectrum of a polynomial block operator function via determinant
/// interpolation. Refuses non-polynomial entries: products and Schur
/// complements must be cleared through their unfoldings first.
pub fn det_poly_roots(
    f: &BlockOperatorFunction,
    max_degree_hint: Option<usize>,
) -> Result<Vec<Complex64>> {
    let n = f.grid_size();
    if f.total_rows() != f.total_cols() {
        return Err(Error::DimensionMismatch(format!(
            "determinant of non-square {}x{}",
            f.total_rows(),
            f.total_cols()
        )));
    }
    for j in 0..n {
        for i in 0..n {
            if f.entry(j, i).as_polynomial().is_none() {
                return Err(Error::PreconditionViolated(format!(
                    "det_poly_roots requires polynomial entries; entry ({j},{i}) is not"
                )));
            }
        }
    }
    let mut bound = det_degree_bound(f);
    if let Some(hint) = max_degree_hint {
        bound = bound.min(hint);
    }
    det_roots_fn(|lambda| f.eval(lambda), bound)
}

// ---------------------------------------------------------------------------
// Spectrum comparison
// ---------------------------------------------------------------------------

/// Outcome of comparing pencil eigenvalues against oracle roots.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub pencil_eigs: Vec<Complex64>,
    pub oracle_roots: Vec<Complex64>,
    pub excluded_discarded: Vec<Complex64>,
    pub pairing: Vec<(Complex64, Complex64, f64)>,
    pub max_pair_distance: f64,
    pub unmatched_pencil: Vec<Complex64>,
    pub unmatched_oracle: Vec<Complex64>,
    pub tol: f64,
    pub pass: bool,
}

/// Exact Hungarian assignment for square cost matrices.
/// Returns, for each row, the assigned column.
fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    // p[j] = row matched to column j; n means unmatched. Column n is virtual.
    let mut p = vec![n; n + 1];
    for i in 0..n {
        let mut links = vec![n; n + 1];
        let mut mins = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        let mut j0 = n;
        p[n] = i;
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = n;
            for j in 0..n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0][j] - u[i0] - v[j];
                if cur < mins[j] {
                    mins[j] = cur;
                    links[j] = j0;
                }
                if mins[j] < delta {
                    delta = mins[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    if p[j] != n {
                        u[p[j]] += delta;
                    }
                    v[j] -= delta;
                } else {
                    mins[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == n {
                break;
            }
        }
        loop {
            let j1 = links[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == n {
                break;
            }
        }
    }
    let mut row_to_col = vec![n; n];
    for j in 0..n {
        if p[j] != n {
            row_to_col[p[j]] = j;
        }
    }
    row_to_col
}

/// Greedy globally-closest-first pairing, used beyond the Hungarian cutoff.
fn greedy_pairing(a: &[Complex64], b: &[Complex64]) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            pairs.push(((x - y).norm(), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut out = Vec::new();
    for (_, i, j) in pairs {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            out.push((i, j));
        }
    }
    out
}

/// Pair pencil eigenvalues with oracle roots after discounting points near
/// the excluded set, and decide spectral equality at the given tolerance.
pub fn compare_spectra(
    pencil_eigs: &[Complex64],
    oracle_roots: &[Complex64],
    excluded: &ExcludedSet,
    tol: f64,
) -> SpectrumReport {
    let near_excluded =
        |z: &Complex64| excluded.points().iter().any(|e| (z - e).norm() <= EXCLUDED_DISCARD_RADIUS);
    let mut excluded_discarded = Vec::new();
    let mut a = Vec::new();
    for z in pencil_eigs {
        if near_excluded(z) {
            excluded_discarded.push(*z);
        } else {
            a.push(*z);
        }
    }
    let mut b = Vec::new();
    for z in oracle_roots {
        if near_excluded(z) {
            excluded_discarded.push(*z);
        } else {
            b.push(*z);
        }
    }
    let size = a.len().max(b.len());
    let matched: Vec<(usize, usize)> = if size == 0 {
        Vec::new()
    } else if size <= 64 {
        // pad to square with large dummy costs, then strip dummy pairs
        const DUMMY: f64 = 1e100;
        let cost: Vec<Vec<f64>> = (0..size)
            .map(|i| {
                (0..size)
                    .map(|j| {
                        if i < a.len() && j < b.len() {
                            (a[i] - b[j]).norm()
                        } else {
                            DUMMY
                        }
                    })
                    .collect()
            })
            .collect();
        hungarian(&cost)
            .into_iter()
            .enumerate()
            .filter(|&(i, j)| i < a.len() && j < b.len())
            .collect()
    } else {
        greedy_pairing(&a, &b)
    };
    let mut pairing = Vec::new();
    let mut max_pair_distance: f64 = 0.0;
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    for (i, j) in matched {
        let d = (a[i] - b[j]).norm();
        max_pair_distance = max_pair_distance.max(d);
        pairing.push((a[i], b[j], d));
        used_a[i] = true;
        used_b[j] = true;
    }
    let unmatched_pencil: Vec<Complex64> = a
        .iter()
        .zip(&used_a)
        .filter(|(_, &u)| !u)
        .map(|(z, _)| *z)
        .collect();
    let unmatched_oracle: Vec<Complex64> = b
        .iter()
        .zip(&used_b)
        .filter(|(_, &u)| !u)
        .map(|(z, _)| *z)
        .collect();
    let pass =
        unmatched_pencil.is_empty() && unmatched_oracle.is_empty() && max_pair_distance <= tol;
    SpectrumReport {
        pencil_eigs: pencil_eigs.to_vec(),
        oracle_roots: oracle_roots.to_vec(),
        excluded_discarded,
        pairing,
        max_pair_distance,
        unmatched_pencil,
        unmatched_oracle,
        tol,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::MatrixPolynomial;
    use crate::rng::SampleRng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rng: &mut SampleRng, n: usize) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| rng.next_complex())
    }

    #[test]
    fn eig_diagonal() {
        let a = CMatrix::diag(&[c(1., 0.), c(2., 0.), c(3., 0.)]);
        let eigs = eig_dense(&a).unwrap();
        for (e, want) in eigs.iter().zip([1.0, 2.0, 3.0]) {
            assert!((e - c(want, 0.)).norm() < 1e-12);
        }
    }

    #[test]
    fn eig_swap_matrix() {
        let a = CMatrix::new(2, 2, vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]).unwrap();
        let eigs = eig_dense(&a).unwrap();
        assert!((eigs[0] - c(-1., 0.)).norm() < 1e-12);
        assert!((eigs[1] - c(1., 0.)).norm() < 1e-12);
    }

    #[test]
    fn eig_determinant_residual() {
        let mut rng = SampleRng::new(101);
        for _ in 0..20 {
            let a = random_matrix(&mut rng, 6);
            let scale = a.fro_norm().max(1.0).powi(6);
            let eigs = eig_dense(&a).unwrap();
            assert_eq!(eigs.len(), 6);
            for lam in eigs {
                let shifted = a.sub(&CMatrix::identity(6).scale(lam)).unwrap();
                let det = shifted.lu().unwrap().det();
                assert!(
                    det.norm() <= 1e-8 * scale,
                    "det residual {} vs scale {scale}",
                    det.norm()
                );
            }
        }
    }

    #[test]
    fn eig_defective_jordan_block() {
        // Jordan block with eigenvalue 2: accuracy degrades like eps^(1/n),
        // so only a loose check is meaningful.
        let mut a = CMatrix::zeros(3, 3);
        for i in 0..3 {
            a[(i, i)] = c(2.0, 0.0);
            if i + 1 < 3 {
                a[(i, i + 1)] = c(1.0, 0.0);
            }
        }
        let eigs = eig_dense(&a).unwrap();
        for e in eigs {
            assert!((e - c(2., 0.)).norm() < 1e-4);
        }
    }

    #[test]
    fn det_roots_scalar_quadratic() {
        // lambda^2 - 1
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
        let roots = det_roots_fn(|l| Ok(p.eval(l)), 2).unwrap();
        assert_eq!(roots.len(), 2);
        assert!((roots[0] - c(-1., 0.)).norm() < 1e-10);
        assert!((roots[1] - c(1., 0.)).norm() < 1e-10);
    }

    #[test]
    fn det_roots_planted_diagonal() {
        let mut rng = SampleRng::new(7);
        let planted: Vec<Complex64> = (0..4).map(|_| rng.next_complex()).collect();
        let f = |lambda: Complex64| {
            let entries: Vec<Complex64> = planted.iter().map(|r| lambda - r).collect();
            Ok(CMatrix::diag(&entries))
        };
        let mut roots = det_roots_fn(f, 4).unwrap();
        let mut want = planted.clone();
        want.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
        roots.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
        for (r, w) in roots.iter().zip(&want) {
            assert!((r - w).norm() < 1e-8);
        }
    }

    #[test]
    fn det_roots_degenerate() {
        let z = CMatrix::zeros(2, 2);
        match det_roots_fn(|_| Ok(z.clone()), 3) {
            Err(Error::DegenerateDeterminant) => {}
            other => panic!("expected DegenerateDeterminant, got {other:?}"),
        }
    }

    #[test]
    fn det_roots_constant_invertible_has_none() {
        let roots = det_roots_fn(|_| Ok(CMatrix::identity(3)), 4).unwrap();
        assert!(roots.is_empty());
    }

    #[test]
    fn hungarian_matches_bruteforce() {
        fn brute(cost: &[Vec<f64>]) -> f64 {
            fn perms(n: usize) -> Vec<Vec<usize>> {
                if n == 1 {
                    return vec![vec![0]];
                }
                let mut out = Vec::new();
                for p in perms(n - 1) {
                    for k in 0..n {
                        let mut q = p.clone();
                        q.insert(k, n - 1);
                        out.push(q);
                    }
                }
                out
            }
            perms(cost.len())
                .into_iter()
                .map(|p| {
                    p.iter()
                        .enumerate()
                        .map(|(i, &j)| cost[i][j])
                        .sum::<f64>()
                })
                .fold(f64::INFINITY, f64::min)
        }
        let mut rng = SampleRng::new(13);
        for n in 2..=5 {
            for _ in 0..5 {
                let cost: Vec<Vec<f64>> = (0..n)
                    .map(|_| (0..n).map(|_| rng.next_f64()).collect())
                    .collect();
                let assign = hungarian(&cost);
                let total: f64 = assign.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
                let best = brute(&cost);
                assert!((total - best).abs() < 1e-12, "hungarian {total} vs brute {best}");
            }
        }
    }

    #[test]
    fn compare_identical_passes() {
        let pts = vec![c(1., 1.), c(-0.5, 0.2), c(3., 0.)];
        let rep = compare_spectra(&pts, &pts, &ExcludedSet::empty(), 1e-6);
        assert!(rep.pass);
        assert_eq!(rep.max_pair_distance, 0.0);
    }

    #[test]
    fn compare_perturbed_fails() {
        let a = vec![c(1., 1.), c(-0.5, 0.2)];
        let mut b = a.clone();
        b[0] += c(1e-3, 0.);
        let rep = compare_spectra(&a, &b, &ExcludedSet::empty(), 1e-6);
        assert!(!rep.pass);
        assert!(rep.max_pair_distance >= 1e-3 - 1e-12);
    }

    #[test]
    fn compare_discounts_excluded() {
        let a = vec![c(1., 0.)];
        let b = vec![c(1., 0.), c(0., 0.)]; // extra oracle root at excluded 0
        let excl = ExcludedSet::new(vec![c(0., 0.)], "origin");
        let rep = compare_spectra(&a, &b, &excl, 1e-6);
        assert!(rep.pass, "excluded root should be discounted: {rep:?}");
        assert_eq!(rep.excluded_discarded.len(), 1);
    }
}
