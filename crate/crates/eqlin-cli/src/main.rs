//! Command-line interface: linearize block operator matrix functions,
//! re-verify certificates, column-reduce polynomial grids, and print
//! determinant-root spectra.
//!
//! Exit codes: 0 ok, 1 verification failure, 2 input error, 3 construction
//! error, 4 degenerate problem.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use eqlin::blockfun::{Entry, ExcludedSet};
use eqlin::equivalence::{certificate_spectra, verify_certificate};
use eqlin::error::Error;
use eqlin::formats::{
    load_json, save_json, CertificateFile, ProblemFile, ReductionFile, SettingsDto,
};
use eqlin::pipeline::{linearize, PipelineOptions};
use eqlin::reduction::{column_reduce_general, column_reduce_same_space, PolyGrid};
use eqlin::schur_product::unfold_entry_at;
use eqlin::spectra::det_poly_roots;

#[derive(Parser)]
#[command(
    name = "eqlin",
    version,
    about = "Linearize block operator matrix functions with verifiable equivalence certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a monic linear pencil equivalent (after extension) to the input
    /// and write the composed certificate.
    Linearize {
        input: PathBuf,
        output: PathBuf,
        /// Verification sample count
        #[arg(long)]
        samples: Option<usize>,
        /// Verification residual tolerance
        #[arg(long)]
        tol: Option<f64>,
        /// Sampling seed
        #[arg(long)]
        seed: Option<u64>,
        /// Also compare pencil eigenvalues against the determinant-root oracle
        #[arg(long)]
        with_spectrum: bool,
    },
    /// Re-run the verification (and spectrum comparison, when recorded) of a
    /// certificate file.
    Verify { cert: PathBuf },
    /// Column-reduce a polynomial problem until the diagonal degrees
    /// strictly dominate; writes the reduced grid and the replayable trace.
    Reduce {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, value_parser = ["same-space", "general"], default_value = "general")]
        algorithm: String,
    },
    /// Print the determinant-root spectrum of a problem; with a certificate,
    /// also print the comparison report.
    Spectrum {
        input: PathBuf,
        /// Certificate to compare against
        #[arg(long)]
        cert: Option<PathBuf>,
        /// Pairing tolerance
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err.root() {
        Error::Schema(_)
        | Error::DimensionMismatch(_)
        | Error::NonFiniteEntry(_)
        | Error::PreconditionViolated(_)
        | Error::DegreeTooHigh { .. } => 2,
        Error::DegenerateDeterminant => 4,
        _ => 3,
    }
}

fn fmt_complex(z: num_complex::Complex64) -> String {
    format!("{:+.6}{:+.6}i", z.re, z.im)
}

fn cmd_linearize(
    input: &Path,
    output: &Path,
    samples: Option<usize>,
    tol: Option<f64>,
    seed: Option<u64>,
    with_spectrum: bool,
) -> Result<u8, Error> {
    let problem: ProblemFile = load_json(input)?;
    let bof = problem.to_block_function()?;
    let opts = problem.options.clone().unwrap_or_default();
    let samples = samples.or(opts.samples).unwrap_or(20);
    let tol = tol.or(opts.tol).unwrap_or(1e-8);
    let seed = seed.or(opts.seed).unwrap_or(0);

    let out = linearize(
        &bof,
        &PipelineOptions {
            l: problem.l.clone(),
        },
    )?;
    let report = verify_certificate(&out.certificate, samples, tol, seed)?;
    let spectrum = if with_spectrum {
        Some(certificate_spectra(&out.certificate, 1e-6)?)
    } else {
        None
    };
    let stages: Vec<String> = out
        .stages
        .iter()
        .map(|s| format!("{} ({} blocks, dim {})", s.name, s.grid_size, s.total_dim))
        .collect();
    let file = CertificateFile::new(
        &out.certificate,
        &report,
        spectrum.as_ref(),
        out.reduction_trace.as_ref(),
        SettingsDto { samples, tol, seed },
        stages,
    );
    save_json(output, &file)?;

    println!("pencil dimension: {}", out.result.t.rows());
    let excl = &out.certificate.excluded;
    if excl.points().is_empty() {
        println!("excluded points:  none");
    } else {
        let pts: Vec<String> = excl.points().iter().map(|&z| fmt_complex(z)).collect();
        println!(
            "excluded points:  {} ({})",
            pts.join(", "),
            excl.description()
        );
    }
    println!(
        "verification:     max residual {:.3e} over {} samples (tol {:.1e}) -> {}",
        report.max_residual,
        samples,
        tol,
        if report.pass { "pass" } else { "FAIL" }
    );
    if let Some(s) = &spectrum {
        println!(
            "spectra:          max pairing distance {:.3e} -> {}",
            s.max_pair_distance,
            if s.pass { "pass" } else { "FAIL" }
        );
    }
    println!("certificate:      {}", output.display());
    let ok = report.pass && spectrum.as_ref().is_none_or(|s| s.pass);
    Ok(if ok { 0 } else { 1 })
}

fn cmd_verify(cert_path: &Path) -> Result<u8, Error> {
    let file: CertificateFile = load_json(cert_path)?;
    let cert = file.to_certificate()?;
    let settings = &file.settings;
    let report = verify_certificate(&cert, settings.samples, settings.tol, settings.seed)?;
    println!(
        "factorization:    max residual {:.3e} (tol {:.1e}) -> {}",
        report.max_residual,
        settings.tol,
        if report.pass { "pass" } else { "FAIL" }
    );
    let recorded = &file.verification;
    let drift = (report.max_residual - recorded.max_residual).abs();
    println!(
        "recorded run:     max residual {:.3e} (drift {:.3e})",
        recorded.max_residual, drift
    );
    let mut ok = report.pass;
    if let Some(recorded_spec) = &file.spectrum {
        let spec = certificate_spectra(&cert, recorded_spec.tol)?;
        println!(
            "spectra:          max pairing distance {:.3e} (tol {:.1e}) -> {}",
            spec.max_pair_distance,
            recorded_spec.tol,
            if spec.pass { "pass" } else { "FAIL" }
        );
        ok = ok && spec.pass;
    }
    Ok(if ok { 0 } else { 1 })
}

fn cmd_reduce(input: &Path, output: &Path, algorithm: &str) -> Result<u8, Error> {
    let problem: ProblemFile = load_json(input)?;
    let bof = problem.to_block_function()?;
    let grid = PolyGrid::from_block_function(&bof)?;
    println!("degrees before:\n{}", grid.degree_matrix());
    println!("differences before:\n{}", grid.difference_matrix());
    let (reduced, trace) = match algorithm {
        "same-space" => column_reduce_same_space(&grid)?,
        _ => column_reduce_general(&grid)?,
    };
    println!("degrees after:\n{}", reduced.degree_matrix());
    println!("differences after:\n{}", reduced.difference_matrix());
    println!(
        "steps: {} ({} row operations)",
        trace.steps.len(),
        trace.k_steps()
    );
    save_json(output, &ReductionFile::new(algorithm, &reduced, &trace))?;
    println!("reduction:        {}", output.display());
    Ok(0)
}

fn cmd_spectrum(input: &Path, cert: Option<&Path>, tol: f64) -> Result<u8, Error> {
    let problem: ProblemFile = load_json(input)?;
    let mut bof = problem.to_block_function()?;
    // clear product and Schur entries through their unfoldings, reporting
    // the discarded denominator spectra
    let mut discarded = ExcludedSet::empty();
    loop {
        let n = bof.grid_size();
        let mut found = None;
        'scan: for j in 0..n {
            for i in 0..n {
                if !matches!(bof.entry(j, i), Entry::Polynomial(_)) {
                    found = Some((j, i));
                    break 'scan;
                }
            }
        }
        let Some((j, i)) = found else { break };
        let step = unfold_entry_at(&bof, j, i)?;
        discarded = discarded.union(&step.excluded);
        bof = step.rhs;
    }
    if !discarded.is_empty() {
        let pts: Vec<String> = discarded.points().iter().map(|&z| fmt_complex(z)).collect();
        println!(
            "discarded denominator spectrum ({}): {}",
            discarded.description(),
            pts.join(", ")
        );
    }
    let roots = det_poly_roots(&bof, None)?;
    println!("determinant roots ({}):", roots.len());
    for r in &roots {
        println!("  {}", fmt_complex(*r));
    }
    if let Some(cert_path) = cert {
        let file: CertificateFile = load_json(cert_path)?;
        let cert = file.to_certificate()?;
        let rep = certificate_spectra(&cert, tol)?;
        println!(
            "comparison:       {} pairs, max distance {:.3e}, {} discounted -> {}",
            rep.pairing.len(),
            rep.max_pair_distance,
            rep.excluded_discarded.len(),
            if rep.pass { "pass" } else { "FAIL" }
        );
        if !rep.pass {
            return Ok(1);
        }
    }
    Ok(0)
}

fn run() -> Result<u8, Error> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Linearize {
            input,
            output,
            samples,
            tol,
            seed,
            with_spectrum,
        } => cmd_linearize(input, output, *samples, *tol, *seed, *with_spectrum),
        Command::Verify { cert } => cmd_verify(cert),
        Command::Reduce {
            input,
            output,
            algorithm,
        } => cmd_reduce(input, output, algorithm),
        Command::Spectrum { input, cert, tol } => cmd_spectrum(input, cert.as_deref(), *tol),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
