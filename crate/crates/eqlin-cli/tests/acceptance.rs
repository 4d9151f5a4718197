//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! Instance families are desk-scale (dims <= 6, degrees <= 4, 20 seeds) with
//! well-conditioned required-invertible coefficients. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines.

use std::path::{Path, PathBuf};
use std::process::Command;

use num_complex::Complex64;

use eqlin::algebra::{CMatrix, ExtInt, Fin, MatrixPolynomial, NegInf};
use eqlin::blockfun::{BlockOperatorFunction, Entry, ExcludedSet};
use eqlin::blocklin::{block_companion, BlockPolySpec};
use eqlin::companion::{companion_embed, companion_linearize, CompanionSpec};
use eqlin::equivalence::{
    certificate_spectra, verify_certificate, EquivalenceCertificate,
};
use eqlin::error::Error;
use eqlin::formats::{load_json, ProblemFile};
use eqlin::pipeline::{linearize, PipelineOptions};
use eqlin::presets;
use eqlin::reduction::{
    column_reduce_general, column_reduce_same_space, f, f0, PolyGrid,
};
use eqlin::rng::SampleRng;
use eqlin::schur_product::{
    product_embed, product_linearize, schur_embed, schur_extend, ProductLinearizationPlan,
    SchurLinearizationPlan,
};
use eqlin::spectra::{compare_spectra, det_poly_roots, eig_dense};

const SEEDS: u64 = 20;
const SAMPLES: usize = 20;
const RESIDUAL_TOL: f64 = 1e-8;
const SPECTRA_TOL: f64 = 1e-6;

fn problems_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../problems")
}

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

fn random_poly(rng: &mut SampleRng, r: usize, c: usize, deg: usize) -> MatrixPolynomial {
    let coeffs = (0..=deg).map(|_| random_matrix(rng, r, c)).collect();
    MatrixPolynomial::new(r, c, coeffs).unwrap()
}

fn random_monic_poly(rng: &mut SampleRng, dim: usize, deg: usize) -> MatrixPolynomial {
    let mut coeffs: Vec<CMatrix> = (0..deg).map(|_| random_matrix(rng, dim, dim)).collect();
    coeffs.push(random_invertible(rng, dim));
    MatrixPolynomial::new(dim, dim, coeffs).unwrap()
}

/// Every certificate family of the construction modules, per seed.
fn certificate_family(seed: u64) -> Vec<(String, EquivalenceCertificate)> {
    let mut rng = SampleRng::new(0xACCE97 + seed);
    let mut out: Vec<(String, EquivalenceCertificate)> = Vec::new();

    let schur_plan = SchurLinearizationPlan::new(
        random_poly(&mut rng, 2, 2, 1),
        random_poly(&mut rng, 2, 2, 1),
        random_poly(&mut rng, 2, 2, 1),
        random_monic_poly(&mut rng, 2, 2),
    )
    .unwrap();
    out.push(("schur_extend".into(), schur_extend(&schur_plan).unwrap()));
    out.push((
        "schur_embed".into(),
        schur_embed(
            &schur_plan,
            Entry::Polynomial(random_poly(&mut rng, 2, 2, 1)),
            Entry::Polynomial(random_poly(&mut rng, 2, 2, 1)),
            Entry::Polynomial(random_monic_poly(&mut rng, 2, 1)),
        )
        .unwrap(),
    ));

    let product_plan = ProductLinearizationPlan::new(vec![
        random_monic_poly(&mut rng, 2, 1),
        random_monic_poly(&mut rng, 2, 2),
        random_monic_poly(&mut rng, 2, 1),
    ])
    .unwrap();
    out.push((
        "product_linearize".into(),
        product_linearize(&product_plan).unwrap(),
    ));
    out.push((
        "product_embed".into(),
        product_embed(
            &ProductLinearizationPlan::new(vec![
                random_monic_poly(&mut rng, 2, 1),
                random_monic_poly(&mut rng, 2, 2),
            ])
            .unwrap(),
            Entry::Polynomial(random_poly(&mut rng, 2, 2, 1)),
            Entry::Polynomial(random_poly(&mut rng, 2, 2, 1)),
            Entry::Polynomial(random_monic_poly(&mut rng, 2, 1)),
        )
        .unwrap(),
    ));

    let p3 = random_monic_poly(&mut rng, 2, 3);
    for l in 0..=3usize {
        let spec = CompanionSpec::new(p3.clone(), l).unwrap();
        let (_, cert) = companion_linearize(&spec).unwrap();
        out.push((format!("companion_linearize l={l}"), cert));
    }
    {
        let p2 = random_monic_poly(&mut rng, 2, 2);
        let spec = CompanionSpec::new(p2, 1).unwrap();
        let q = random_poly(&mut rng, 1, 2, 1);
        let x = Entry::Polynomial(random_poly(&mut rng, 2, 1, 1));
        let z = Entry::Polynomial(random_monic_poly(&mut rng, 1, 1));
        out.push((
            "companion_embed".into(),
            companion_embed(&spec, &q, &x, &z).unwrap(),
        ));
    }

    // block companion, L empty and L nonempty
    {
        let grid = dominant_grid(&mut rng, &[2, 2], &[3, 2]);
        let spec = BlockPolySpec::new(grid, vec![1, 0]).unwrap();
        out.push((
            "block_companion L=empty".into(),
            block_companion(&spec).unwrap().1,
        ));
        let grid = dominant_grid(&mut rng, &[2, 1], &[2, 2]);
        let spec = BlockPolySpec::new(grid, vec![2, 0]).unwrap();
        out.push((
            "block_companion L=nonempty".into(),
            block_companion(&spec).unwrap().1,
        ));
    }

    // both column reduction algorithms as certificates
    {
        let grid = presets::example42(2, 9000 + seed).unwrap();
        let (_, trace) = column_reduce_same_space(&grid).unwrap();
        out.push((
            "column_reduce_same_space".into(),
            trace.to_certificate(&grid).unwrap(),
        ));
        let grid = mixed_grid(&mut rng, &[1, 2, 3]);
        let (_, trace) = column_reduce_general(&grid).unwrap();
        out.push((
            "column_reduce_general".into(),
            trace.to_certificate(&grid).unwrap(),
        ));
    }
    out
}

fn dominant_grid(rng: &mut SampleRng, dims: &[usize], degs: &[usize]) -> PolyGrid {
    let n = dims.len();
    let mut entries = Vec::with_capacity(n);
    for j in 0..n {
        let mut row = Vec::with_capacity(n);
        for i in 0..n {
            let poly = if i == j {
                random_monic_poly(rng, dims[i], degs[i])
            } else {
                random_poly(rng, dims[j], dims[i], degs[i].saturating_sub(1))
            };
            row.push(poly);
        }
        entries.push(row);
    }
    PolyGrid::new(dims.to_vec(), entries).unwrap()
}

/// Mixed-dimension grid with diagonal degree 2 and off-diagonal degrees up
/// to 2. Degree raises routed through a smaller space would make reduced
/// leading coefficients rank-deficient by construction (the degenerate-
/// product caveat), so off-diagonals never exceed the diagonal degree.
fn mixed_grid(rng: &mut SampleRng, dims: &[usize]) -> PolyGrid {
    let n = dims.len();
    let mut entries = Vec::new();
    for j in 0..n {
        let mut row = Vec::new();
        for i in 0..n {
            if i != j && rng.next_u64().is_multiple_of(5) {
                row.push(MatrixPolynomial::zero(dims[j], dims[i]));
                continue;
            }
            let deg = if i == j { 2 } else { (rng.next_u64() % 3) as usize };
            let mut coeffs: Vec<CMatrix> = (0..deg)
                .map(|_| random_matrix(rng, dims[j], dims[i]))
                .collect();
            coeffs.push(if i == j {
                random_invertible(rng, dims[i])
            } else {
                random_matrix(rng, dims[j], dims[i])
            });
            row.push(MatrixPolynomial::new(dims[j], dims[i], coeffs).unwrap());
        }
        entries.push(row);
    }
    PolyGrid::new(dims.to_vec(), entries).unwrap()
}

#[test]
fn criterion_01_factorization_residuals() {
    let mut worst: f64 = 0.0;
    for seed in 0..SEEDS {
        for (name, cert) in certificate_family(seed) {
            let report = verify_certificate(&cert, SAMPLES, RESIDUAL_TOL, seed).unwrap();
            assert!(
                report.pass,
                "criterion 1: FAIL — {name} seed {seed}: residual {:.3e}",
                report.max_residual
            );
            worst = worst.max(report.max_residual);
        }
    }
    println!(
        "criterion 1: PASS — all constructions verify at {RESIDUAL_TOL:.0e} over {SEEDS} seeds (worst residual {worst:.3e})"
    );
}

#[test]
fn criterion_02_spectral_equality() {
    let mut worst: f64 = 0.0;
    for seed in 0..SEEDS {
        for (name, cert) in certificate_family(seed) {
            let rep = certificate_spectra(&cert, SPECTRA_TOL).unwrap();
            assert!(
                rep.pass,
                "criterion 2: FAIL — {name} seed {seed}: max pairing {:.3e}, unmatched {}/{}",
                rep.max_pair_distance,
                rep.unmatched_pencil.len(),
                rep.unmatched_oracle.len()
            );
            worst = worst.max(rep.max_pair_distance);
        }
    }
    println!(
        "criterion 2: PASS — spectra agree at {SPECTRA_TOL:.0e} over {SEEDS} seeds (worst pairing {worst:.3e})"
    );
}

#[test]
fn criterion_03_t_invariance_in_l() {
    for seed in 0..SEEDS {
        let mut rng = SampleRng::new(0x7E57 + seed);
        let p = random_monic_poly(&mut rng, 2, 3);
        let t0 = companion_linearize(&CompanionSpec::new(p.clone(), 0).unwrap())
            .unwrap()
            .0
            .t;
        for l in 1..=3usize {
            let tl = companion_linearize(&CompanionSpec::new(p.clone(), l).unwrap())
                .unwrap()
                .0
                .t;
            assert_eq!(
                t0.data(),
                tl.data(),
                "criterion 3: FAIL — T differs between l=0 and l={l} at seed {seed}"
            );
        }
    }
    println!("criterion 3: PASS — companion T is bit-identical across l (20 seeds, d = 3)");
}

#[test]
fn criterion_04_pencil_example() {
    let mut worst: f64 = 0.0;
    for seed in 0..SEEDS {
        let mut rng = SampleRng::new(0x38 + seed);
        let a = random_invertible(&mut rng, 3);
        let b = random_matrix(&mut rng, 3, 3);
        let p = MatrixPolynomial::new(3, 3, vec![b, a]).unwrap();
        let spec = CompanionSpec::new(p, 1).unwrap();
        let (_, cert) = companion_linearize(&spec).unwrap();
        let report = verify_certificate(&cert, SAMPLES, 1e-10, seed).unwrap();
        assert!(
            report.pass,
            "criterion 4: FAIL — seed {seed}: residual {:.3e}",
            report.max_residual
        );
        worst = worst.max(report.max_residual);
    }
    println!(
        "criterion 4: PASS — the pencil identity holds at 1e-10 for 20 random invertible 3x3 (worst {worst:.3e})"
    );
}

#[test]
fn criterion_05_worked_pipeline_golden() {
    let problem: ProblemFile = load_json(&problems_dir().join("section43.json")).unwrap();
    let bof = problem.to_block_function().unwrap();
    let out = linearize(
        &bof,
        &PipelineOptions {
            l: problem.l.clone(),
        },
    )
    .unwrap();
    // stage shape: product unfolding, Schur unfolding, one-step reduction,
    // block companion
    let names: Vec<&str> = out.stages.iter().map(|s| s.name.as_str()).collect();
    assert_eq!(
        names,
        vec![
            "input",
            "product unfolding",
            "Schur unfolding",
            "column reduction",
            "block companion"
        ],
        "criterion 5: FAIL — unexpected stage sequence {names:?}"
    );
    assert_eq!(out.reduction_trace.as_ref().unwrap().k_steps(), 1);
    // golden mask
    let golden: Vec<Vec<u8>> = load_json(&problems_dir().join("section43_mask.json")).unwrap();
    let t = &out.result.t;
    let layout = &out.result.layout;
    let scale = t.max_norm();
    let mask: Vec<Vec<u8>> = (0..layout.len())
        .map(|r| {
            (0..layout.len())
                .map(|c| {
                    u8::from(
                        t.block(
                            layout.offset(r),
                            layout.offset(c),
                            layout.dims()[r],
                            layout.dims()[c],
                        )
                        .max_norm()
                            > 1e-9 * scale,
                    )
                })
                .collect()
        })
        .collect();
    assert_eq!(mask, golden, "criterion 5: FAIL — pencil mask differs from the golden file");
    let report = verify_certificate(&out.certificate, SAMPLES, RESIDUAL_TOL, 0).unwrap();
    assert!(
        report.pass,
        "criterion 5: FAIL — composed certificate residual {:.3e}",
        report.max_residual
    );
    let rep = certificate_spectra(&out.certificate, SPECTRA_TOL).unwrap();
    assert!(
        rep.pass,
        "criterion 5: FAIL — spectra disagree: {:.3e}",
        rep.max_pair_distance
    );
    println!(
        "criterion 5: PASS — worked pipeline reproduces the 7-row pencil mask (residual {:.3e}, pairing {:.3e})",
        report.max_residual, rep.max_pair_distance
    );
}

#[test]
fn criterion_06_worked_reduction_golden() {
    let grid = presets::example42(2, 42).unwrap();
    let (out, trace) = column_reduce_same_space(&grid).unwrap();
    let d = out.degree_matrix();
    assert_eq!(d.0[0][0], Fin(1), "criterion 6: FAIL — diag degree (1,1)");
    assert_eq!(d.0[1][1], Fin(1), "criterion 6: FAIL — diag degree (2,2)");
    assert_eq!(d.0[2][2], Fin(1), "criterion 6: FAIL — diag degree (3,3)");
    assert!(
        d.0[0][2] <= Fin(0),
        "criterion 6: FAIL — entry (1,3) still degree {}",
        d.0[0][2]
    );
    assert!(
        d.0[1][2] <= Fin(0),
        "criterion 6: FAIL — entry (2,3) still degree {}",
        d.0[1][2]
    );
    let diff = out.difference_matrix();
    for j in 0..3 {
        for i in 0..3 {
            if i != j {
                assert!(diff.0[j][i] < Fin(0), "criterion 6: FAIL — Delta({j},{i}) >= 0");
            }
        }
    }
    let e = trace.e_factor().unwrap();
    let mut rng = SampleRng::new(6);
    let mut worst: f64 = 0.0;
    for _ in 0..SAMPLES {
        let lambda = rng.next_annulus(0.5, 2.0);
        let det = e.eval(lambda).unwrap().lu().unwrap().det().norm();
        worst = worst.max((det - 1.0).abs());
    }
    assert!(
        worst <= 1e-8,
        "criterion 6: FAIL — |det E| deviates from 1 by {worst:.3e}"
    );
    println!(
        "criterion 6: PASS — worked reduction yields the displayed degree pattern with |det E| = 1 ± {worst:.1e}"
    );
}

#[test]
fn criterion_07_degree_calculus_exhaustive() {
    let vals: Vec<ExtInt> = std::iter::once(NegInf).chain((-3..=3).map(Fin)).collect();
    let mut checked = 0usize;
    for &x in &vals {
        for &y in &vals {
            for &z in &vals {
                for &w in &vals {
                    assert!(
                        f0(x, y, z, w) <= x.max(y + z),
                        "criterion 7: FAIL — bound at ({x},{y},{z},{w})"
                    );
                    let bump = |v: ExtInt| match v {
                        NegInf => Fin(-3),
                        Fin(t) => Fin(t + 1),
                    };
                    assert!(
                        f0(bump(x), y, z, w) >= f0(x, y, z, w),
                        "criterion 7: FAIL — monotonicity in x at ({x},{y},{z},{w})"
                    );
                    assert!(
                        f0(x, bump(y), z, w) >= f0(x, y, z, w),
                        "criterion 7: FAIL — monotonicity in y at ({x},{y},{z},{w})"
                    );
                    let _ = f(x, y, z);
                    checked += 1;
                }
            }
        }
    }
    println!(
        "criterion 7: PASS — degree calculus bound and monotonicity hold on all {checked} argument tuples"
    );
}

#[test]
fn criterion_08_reduction_postconditions() {
    // Instances whose pivot pool ends up all zero in some column are outside
    // the algorithms' domain (the degenerate-leading-coefficient caveat) and
    // are reported as SingularLeadingCoefficient; the postcondition is
    // asserted on 20 in-domain instances per algorithm.
    let check = |grid: &PolyGrid, which: &str, seed: u64| -> Option<usize> {
        let run = if which == "same-space" {
            column_reduce_same_space(grid)
        } else {
            column_reduce_general(grid)
        };
        let (out, trace) = match run {
            Ok(v) => v,
            Err(Error::SingularLeadingCoefficient { .. }) => return None,
            Err(e) => panic!("criterion 8: FAIL — {which} seed {seed}: unexpected error {e}"),
        };
        let d = out.difference_matrix();
        let n = out.size();
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    assert!(
                        d.0[j][i] < Fin(0),
                        "criterion 8: FAIL — {which} seed {seed}: Delta({j},{i}) >= 0"
                    );
                }
            }
        }
        Some(trace.k_steps())
    };
    let mut total_steps = 0usize;
    let mut done_same = 0u64;
    let mut done_general = 0u64;
    let mut rejected = 0u64;
    let mut seed = 0u64;
    while (done_same < SEEDS || done_general < SEEDS) && seed < 4 * SEEDS {
        let mut rng = SampleRng::new(0x8ED0 + seed);
        // zero entries only off the diagonal: a zero diagonal with a zero
        // column below it is a singular problem outside the algorithms'
        // domain
        let degs: Vec<Vec<Option<usize>>> = (0..4)
            .map(|j| {
                (0..4)
                    .map(|i| {
                        if i != j && rng.next_u64().is_multiple_of(5) {
                            None
                        } else {
                            Some((rng.next_u64() % 4) as usize)
                        }
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        let entries: Vec<Vec<MatrixPolynomial>> = degs
            .iter()
            .map(|row| {
                row.iter()
                    .map(|d| match d {
                        None => MatrixPolynomial::zero(1, 1),
                        Some(d) => {
                            let mut coeffs: Vec<CMatrix> =
                                (0..*d).map(|_| random_matrix(&mut rng, 1, 1)).collect();
                            coeffs.push(CMatrix::scalar(
                                Complex64::new(1.0, 0.0) + rng.next_complex() * 0.3,
                            ));
                            MatrixPolynomial::new(1, 1, coeffs).unwrap()
                        }
                    })
                    .collect()
            })
            .collect();
        let grid = PolyGrid::new(vec![1; 4], entries).unwrap();
        if done_same < SEEDS {
            match check(&grid, "same-space", seed) {
                Some(steps) => {
                    total_steps += steps;
                    done_same += 1;
                }
                None => rejected += 1,
            }
        }
        if done_general < SEEDS {
            let mut rng = SampleRng::new(0x6E4E + seed);
            let grid = mixed_grid(&mut rng, &[1, 2, 3]);
            match check(&grid, "general", seed) {
                Some(steps) => {
                    total_steps += steps;
                    done_general += 1;
                }
                None => rejected += 1,
            }
        }
        seed += 1;
    }
    assert_eq!(done_same, SEEDS, "criterion 8: FAIL — too many rejected same-space instances");
    assert_eq!(done_general, SEEDS, "criterion 8: FAIL — too many rejected general instances");
    println!(
        "criterion 8: PASS — both reduction algorithms terminate with strictly dominant diagonals ({SEEDS} in-domain seeds each, {total_steps} row operations, {rejected} out-of-domain instances reported and skipped)"
    );
}

#[test]
fn criterion_09_oracle_soundness() {
    // planted roots of factored diagonal polynomials
    let mut worst_root: f64 = 0.0;
    for seed in 0..SEEDS {
        let mut rng = SampleRng::new(0x0A + seed);
        let planted: Vec<Complex64> = (0..5).map(|_| rng.next_complex()).collect();
        // diag((lambda - r1)(lambda - r2), (lambda - r3), ...) assembled as a
        // polynomial grid
        let one = CMatrix::identity(1);
        let lin = |r: Complex64| {
            MatrixPolynomial::new(1, 1, vec![one.scale(-r), one.clone()]).unwrap()
        };
        let top = lin(planted[0]).mul(&lin(planted[1])).unwrap();
        let entries = vec![
            vec![top, MatrixPolynomial::zero(1, 1), MatrixPolynomial::zero(1, 1)],
            vec![
                MatrixPolynomial::zero(1, 1),
                lin(planted[2]).mul(&lin(planted[3])).unwrap(),
                MatrixPolynomial::zero(1, 1),
            ],
            vec![
                MatrixPolynomial::zero(1, 1),
                MatrixPolynomial::zero(1, 1),
                lin(planted[4]),
            ],
        ];
        let grid = PolyGrid::new(vec![1; 3], entries).unwrap();
        let roots = det_poly_roots(&grid.to_block_function().unwrap(), None).unwrap();
        let rep = compare_spectra(&roots, &planted, &ExcludedSet::empty(), 1e-8);
        assert!(
            rep.pass,
            "criterion 9: FAIL — planted roots not recovered at seed {seed}: {:.3e}",
            rep.max_pair_distance
        );
        worst_root = worst_root.max(rep.max_pair_distance);
    }
    // eigenvalue determinant residual on 100 random 6x6 matrices
    let mut worst_rel: f64 = 0.0;
    for seed in 0..100u64 {
        let mut rng = SampleRng::new(0xE16 + seed);
        let a = random_matrix(&mut rng, 6, 6);
        let scale = a.fro_norm().max(1.0).powi(6);
        let eigs = eig_dense(&a).unwrap();
        assert_eq!(eigs.len(), 6);
        for lam in eigs {
            let det = a
                .sub(&CMatrix::identity(6).scale(lam))
                .unwrap()
                .lu()
                .unwrap()
                .det()
                .norm();
            assert!(
                det <= 1e-8 * scale,
                "criterion 9: FAIL — det residual {det:.3e} vs scale {scale:.3e} at seed {seed}"
            );
            worst_rel = worst_rel.max(det / scale);
        }
    }
    println!(
        "criterion 9: PASS — oracle recovers planted roots (worst {worst_root:.3e}) and eigenvalues satisfy the determinant residual bound (worst {worst_rel:.3e} of scale)"
    );
}

#[test]
fn criterion_10_negative_controls() {
    // corrupted E fails verification (library level)
    let mut rng = SampleRng::new(0xBAD);
    let plan = SchurLinearizationPlan::new(
        random_poly(&mut rng, 2, 2, 1),
        random_poly(&mut rng, 2, 2, 1),
        random_poly(&mut rng, 2, 2, 1),
        random_monic_poly(&mut rng, 2, 2),
    )
    .unwrap();
    let mut cert = schur_extend(&plan).unwrap();
    let mut bad = CMatrix::identity(cert.e.rows());
    bad[(0, 1)] = Complex64::new(1e-2, 0.0);
    cert.e = {
        let mut b = eqlin::factor::FactorBuilder::new();
        let orig = b.graft(&cert.e);
        let pert = b.constant(bad);
        let root = b.product(vec![pert, orig]).unwrap();
        b.finish(root)
    };
    let report = verify_certificate(&cert, 10, RESIDUAL_TOL, 1).unwrap();
    assert!(!report.pass, "criterion 10: FAIL — corrupted E still verifies");

    // singular leading coefficient fails construction
    let singular_lead = {
        let mut coeffs = vec![random_matrix(&mut rng, 2, 2)];
        coeffs.push(
            CMatrix::new(
                2,
                2,
                vec![
                    Complex64::new(1.0, 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(0.0, 0.0),
                ],
            )
            .unwrap(),
        );
        MatrixPolynomial::new(2, 2, coeffs).unwrap()
    };
    match CompanionSpec::new(singular_lead, 0) {
        Err(Error::SingularLeadingCoefficient { .. }) => {}
        other => panic!("criterion 10: FAIL — expected SingularLeadingCoefficient, got {other:?}"),
    }

    // degenerate determinant is reported
    let ones = CMatrix::new(
        2,
        2,
        vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
        ],
    )
    .unwrap();
    let singular_grid = BlockOperatorFunction::single(Entry::Polynomial(
        MatrixPolynomial::new(2, 2, vec![ones.clone(), ones]).unwrap(),
    ))
    .unwrap();
    match det_poly_roots(&singular_grid, None) {
        Err(Error::DegenerateDeterminant) => {}
        other => panic!("criterion 10: FAIL — expected DegenerateDeterminant, got {other:?}"),
    }

    // and the exit-code contract through the binary
    let bin = env!("CARGO_BIN_EXE_eqlin");
    let dir = std::env::temp_dir().join("eqlin-acceptance");
    std::fs::create_dir_all(&dir).unwrap();
    let cert_path = dir.join("cert.json");
    let ok = Command::new(bin)
        .args([
            "linearize",
            problems_dir().join("section43.json").to_str().unwrap(),
            cert_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    // corrupt the certificate file and expect exit 1
    let mut value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&cert_path).unwrap()).unwrap();
    'outer: for node in value["e"]["nodes"].as_array_mut().unwrap() {
        if node["op"] == "constant" {
            for row in node["matrix"].as_array_mut().unwrap() {
                for z in row.as_array_mut().unwrap() {
                    let re = z[0].as_f64().unwrap();
                    if re.abs() > 0.5 {
                        z[0] = serde_json::json!(re + 1e-2);
                        break 'outer;
                    }
                }
            }
        }
    }
    let bad_path = dir.join("cert_bad.json");
    std::fs::write(&bad_path, serde_json::to_string(&value).unwrap()).unwrap();
    let v = Command::new(bin)
        .args(["verify", bad_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(v.status.code(), Some(1), "criterion 10: FAIL — corrupted certificate exit code");
    println!(
        "criterion 10: PASS — corrupted E fails verification (exit 1), singular leading coefficient and degenerate determinant are rejected"
    );
}
