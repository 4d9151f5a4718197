//! Built-in example problems with frozen pseudo-random coefficients.

use num_complex::Complex64;

use crate::algebra::{CMatrix, MatrixPolynomial};
use crate::blockfun::{BlockOperatorFunction, Entry, SpaceLayout};
use crate::error::Result;
use crate::reduction::PolyGrid;
use crate::rng::SampleRng;

fn random_matrix(rng: &mut SampleRng, r: usize, c: usize) -> CMatrix {
    CMatrix::from_fn(r, c, |_, _| rng.next_complex())
}

fn random_invertible(rng: &mut SampleRng, n: usize) -> CMatrix {
    let mut m = random_matrix(rng, n, n);
    for i in 0..n {
        m[(i, i)] += Complex64::new(2.0, 0.0);
    }
    m
}

/// The two-by-two block function whose (1,1) entry is a product of a pencil
/// with a cubic, and whose (2,1) entry is a Schur complement over a
/// quadratic denominator. Linearizing it exercises every pipeline stage.
/// Returns the function together with the distinguished indices for the
/// four-column polynomial stage.
pub fn section43(dim: usize, seed: u64) -> Result<(BlockOperatorFunction, Vec<usize>)> {
    let m = dim;
    let mut rng = SampleRng::new(seed);
    let cap_m = random_matrix(&mut rng, m, m);
    let n0 = random_matrix(&mut rng, m, m);
    let n1 = random_matrix(&mut rng, m, m);
    let n2 = random_matrix(&mut rng, m, m);
    let n3 = random_invertible(&mut rng, m);
    let p0 = random_matrix(&mut rng, m, m);
    let p1 = random_matrix(&mut rng, m, m);
    let a = random_matrix(&mut rng, m, m);
    let b = random_matrix(&mut rng, m, m);
    let c0 = random_matrix(&mut rng, m, m);
    let c1 = random_matrix(&mut rng, m, m);
    let c2 = random_matrix(&mut rng, m, m);
    let d0 = random_matrix(&mut rng, m, m);
    let d1 = random_matrix(&mut rng, m, m);
    let d2 = random_invertible(&mut rng, m);
    let q = random_invertible(&mut rng, m);

    let z = CMatrix::zeros(m, m);
    let neg_i = CMatrix::identity(m).neg();
    let poly = |coeffs: Vec<CMatrix>| MatrixPolynomial::new(m, m, coeffs);
    // (M - lambda)(N3 l^3 + N2 l^2 + N1 l + N0)
    let product = Entry::Product(vec![
        poly(vec![cap_m, neg_i.clone()])?,
        poly(vec![n0, n1, n2, n3])?,
    ]);
    // A l - (B - l) D(l)^{-1} (C2 l^2 + C1 l + C0)
    let schur = Entry::SchurComplement {
        a: poly(vec![z.clone(), a])?,
        b: poly(vec![b, neg_i])?,
        c: poly(vec![c0, c1, c2])?,
        d: poly(vec![d0, d1, d2])?,
    };
    let top_right = Entry::Polynomial(poly(vec![p0, p1])?);
    let bottom_right = Entry::Polynomial(poly(vec![z, q])?);
    let layout = SpaceLayout::new(vec![m, m])?;
    let bof = BlockOperatorFunction::new(
        layout.clone(),
        layout,
        vec![vec![product, top_right], vec![schur, bottom_right]],
    )?;
    Ok((bof, vec![0, 0, 0, 0]))
}

/// The three-by-three reduction example: highest degrees off the diagonal,
/// fixed by one constant row operation per column plus a degree-one one.
pub fn example42(dim: usize, seed: u64) -> Result<PolyGrid> {
    let m = dim;
    let mut rng = SampleRng::new(seed);
    let a = random_invertible(&mut rng, m);
    let b = random_matrix(&mut rng, m, m);
    let c = random_matrix(&mut rng, m, m);
    let d = random_matrix(&mut rng, m, m);
    let dh = random_matrix(&mut rng, m, m);
    let g = random_invertible(&mut rng, m);
    let h = random_matrix(&mut rng, m, m);
    let hh = random_matrix(&mut rng, m, m);
    let j = random_matrix(&mut rng, m, m);
    let l = random_invertible(&mut rng, m);
    let z = CMatrix::zeros(m, m);
    let poly = |coeffs: Vec<CMatrix>| MatrixPolynomial::new(m, m, coeffs);
    PolyGrid::new(
        vec![m; 3],
        vec![
            vec![
                poly(vec![z.clone(), a])?,
                poly(vec![b])?,
                poly(vec![z.clone(), c])?,
            ],
            vec![
                poly(vec![dh, d])?,
                poly(vec![z.clone(), g])?,
                poly(vec![hh, z.clone(), h])?,
            ],
            vec![
                poly(vec![j])?,
                MatrixPolynomial::zero(m, m),
                poly(vec![z, l])?,
            ],
        ],
    )
}

/// Expected zero/nonzero block mask of the pencil produced by linearizing
/// the section43 preset (seven block rows).
pub fn section43_pencil_mask() -> Vec<Vec<bool>> {
    let rows = [
        [1, 0, 0, 0, 0, 1, 1],
        [1, 1, 1, 1, 0, 0, 0],
        [0, 1, 0, 0, 0, 0, 0],
        [0, 0, 1, 0, 0, 0, 0],
        [0, 0, 1, 0, 1, 1, 0],
        [0, 1, 1, 1, 1, 1, 0],
        [0, 0, 0, 0, 0, 1, 0],
    ];
    rows.iter()
        .map(|r| r.iter().map(|&v| v == 1).collect())
        .collect()
}
