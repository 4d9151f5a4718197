//! JSON problem and certificate files.
//!
//! Complex numbers serialize as [re, im], matrices as row-major nested
//! arrays, polynomials as ascending coefficient lists; expression graphs as
//! topologically ordered node lists with integer references.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{CMatrix, MatrixPolynomial};
use crate::blockfun::{BlockOperatorFunction, Entry, ExcludedSet, SpaceLayout};
use crate::equivalence::{
    EquivalenceCertificate, ExtensionStructure, PencilInfo, Slot, VerificationReport,
};
use crate::error::{Error, Result};
use crate::factor::{FactorFunction, FactorNode};
use crate::reduction::{PolyGrid, ReductionStep, ReductionTrace};
use crate::spectra::SpectrumReport;

fn schema<T>(msg: impl Into<String>) -> std::result::Result<T, Error> {
    Err(Error::Schema(msg.into()))
}

// ---------------------------------------------------------------------------
// Scalars, matrices, polynomials
// ---------------------------------------------------------------------------

type ComplexDto = [f64; 2];
type MatrixDto = Vec<Vec<ComplexDto>>;

fn complex_to(z: Complex64) -> ComplexDto {
    [z.re, z.im]
}

fn complex_from(v: ComplexDto) -> Complex64 {
    Complex64::new(v[0], v[1])
}

fn matrix_to(m: &CMatrix) -> MatrixDto {
    (0..m.rows())
        .map(|r| (0..m.cols()).map(|c| complex_to(m[(r, c)])).collect())
        .collect()
}

fn matrix_from(dto: &MatrixDto, rows: usize, cols: usize) -> Result<CMatrix> {
    if dto.len() != rows {
        return schema(format!("matrix has {} rows, expected {rows}", dto.len()));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for row in dto {
        if row.len() != cols {
            return schema(format!("matrix row has {} entries, expected {cols}", row.len()));
        }
        data.extend(row.iter().map(|&v| complex_from(v)));
    }
    CMatrix::new(rows, cols, data)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PolyDto {
    pub rows: usize,
    pub cols: usize,
    pub coeffs: Vec<MatrixDto>,
}

fn poly_to(p: &MatrixPolynomial) -> PolyDto {
    PolyDto {
        rows: p.row_dim(),
        cols: p.col_dim(),
        coeffs: p.coeffs().iter().map(matrix_to).collect(),
    }
}

fn poly_from(dto: &PolyDto) -> Result<MatrixPolynomial> {
    let coeffs = dto
        .coeffs
        .iter()
        .map(|m| matrix_from(m, dto.rows, dto.cols))
        .collect::<Result<Vec<_>>>()?;
    MatrixPolynomial::new(dto.rows, dto.cols, coeffs)
}

// ---------------------------------------------------------------------------
// Entries and block functions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EntryDto {
    Polynomial { poly: PolyDto },
    Product { factors: Vec<PolyDto> },
    Schur {
        a: PolyDto,
        b: PolyDto,
        c: PolyDto,
        d: PolyDto,
    },
}

fn entry_to(e: &Entry) -> EntryDto {
    match e {
        Entry::Polynomial(p) => EntryDto::Polynomial { poly: poly_to(p) },
        Entry::Product(fs) => EntryDto::Product {
            factors: fs.iter().map(poly_to).collect(),
        },
        Entry::SchurComplement { a, b, c, d } => EntryDto::Schur {
            a: poly_to(a),
            b: poly_to(b),
            c: poly_to(c),
            d: poly_to(d),
        },
    }
}

fn entry_from(dto: &EntryDto) -> Result<Entry> {
    let entry = match dto {
        EntryDto::Polynomial { poly } => Entry::Polynomial(poly_from(poly)?),
        EntryDto::Product { factors } => Entry::Product(
            factors.iter().map(poly_from).collect::<Result<Vec<_>>>()?,
        ),
        EntryDto::Schur { a, b, c, d } => Entry::SchurComplement {
            a: poly_from(a)?,
            b: poly_from(b)?,
            c: poly_from(c)?,
            d: poly_from(d)?,
        },
    };
    entry.validate()?;
    Ok(entry)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BlockFunDto {
    pub row_spaces: Vec<usize>,
    pub col_spaces: Vec<usize>,
    pub entries: Vec<Vec<EntryDto>>,
}

pub fn blockfun_to(bof: &BlockOperatorFunction) -> BlockFunDto {
    BlockFunDto {
        row_spaces: bof.row_layout().dims().to_vec(),
        col_spaces: bof.col_layout().dims().to_vec(),
        entries: bof
            .entries()
            .iter()
            .map(|row| row.iter().map(entry_to).collect())
            .collect(),
    }
}

pub fn blockfun_from(dto: &BlockFunDto) -> Result<BlockOperatorFunction> {
    let entries = dto
        .entries
        .iter()
        .map(|row| row.iter().map(entry_from).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    BlockOperatorFunction::new(
        SpaceLayout::new(dto.row_spaces.clone())?,
        SpaceLayout::new(dto.col_spaces.clone())?,
        entries,
    )
}

// ---------------------------------------------------------------------------
// Factor functions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum FactorNodeDto {
    Constant {
        rows: usize,
        cols: usize,
        matrix: MatrixDto,
    },
    LambdaPow {
        power: i32,
        dim: usize,
    },
    Poly {
        poly: PolyDto,
    },
    Scaled {
        factor: ComplexDto,
        arg: usize,
    },
    Sum {
        args: Vec<usize>,
    },
    Product {
        args: Vec<usize>,
    },
    Inverse {
        arg: usize,
        /// reciprocal condition of the inverted value observed at
        /// certification time, recorded for audit
        #[serde(skip_serializing_if = "Option::is_none")]
        rcond: Option<f64>,
    },
    Block {
        row_dims: Vec<usize>,
        col_dims: Vec<usize>,
        entries: Vec<(usize, usize, usize)>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FactorDto {
    pub nodes: Vec<FactorNodeDto>,
    pub root: usize,
}

/// Serialize a factor function; when a probe point is supplied, inverse
/// nodes record the condition estimate of their operand there.
pub fn factor_to(f: &FactorFunction, probe: Option<Complex64>) -> FactorDto {
    let cache = probe.and_then(|lambda| f.eval_nodes(lambda).ok());
    let nodes = f
        .nodes()
        .iter()
        .map(|n| match n {
            FactorNode::Constant(m) => FactorNodeDto::Constant {
                rows: m.rows(),
                cols: m.cols(),
                matrix: matrix_to(m),
            },
            FactorNode::LambdaPow { power, dim } => FactorNodeDto::LambdaPow {
                power: *power,
                dim: *dim,
            },
            FactorNode::Poly(p) => FactorNodeDto::Poly { poly: poly_to(p) },
            FactorNode::Scaled { factor, arg } => FactorNodeDto::Scaled {
                factor: complex_to(*factor),
                arg: *arg,
            },
            FactorNode::Sum(args) => FactorNodeDto::Sum { args: args.clone() },
            FactorNode::Product(args) => FactorNodeDto::Product { args: args.clone() },
            FactorNode::Inverse(arg) => FactorNodeDto::Inverse {
                arg: *arg,
                rcond: cache
                    .as_ref()
                    .and_then(|c| c.get(*arg))
                    .and_then(|v| v.as_ref())
                    .map(CMatrix::rcond),
            },
            FactorNode::Block {
                row_dims,
                col_dims,
                entries,
            } => FactorNodeDto::Block {
                row_dims: row_dims.clone(),
                col_dims: col_dims.clone(),
                entries: entries.clone(),
            },
        })
        .collect();
    FactorDto {
        nodes,
        root: f.root(),
    }
}

pub fn factor_from(dto: &FactorDto) -> Result<FactorFunction> {
    let nodes = dto
        .nodes
        .iter()
        .map(|n| {
            Ok(match n {
                FactorNodeDto::Constant { rows, cols, matrix } => {
                    FactorNode::Constant(matrix_from(matrix, *rows, *cols)?)
                }
                FactorNodeDto::LambdaPow { power, dim } => FactorNode::LambdaPow {
                    power: *power,
                    dim: *dim,
                },
                FactorNodeDto::Poly { poly } => FactorNode::Poly(poly_from(poly)?),
                FactorNodeDto::Scaled { factor, arg } => FactorNode::Scaled {
                    factor: complex_from(*factor),
                    arg: *arg,
                },
                FactorNodeDto::Sum { args } => FactorNode::Sum(args.clone()),
                FactorNodeDto::Product { args } => FactorNode::Product(args.clone()),
                FactorNodeDto::Inverse { arg, .. } => FactorNode::Inverse(*arg),
                FactorNodeDto::Block {
                    row_dims,
                    col_dims,
                    entries,
                } => FactorNode::Block {
                    row_dims: row_dims.clone(),
                    col_dims: col_dims.clone(),
                    entries: entries.clone(),
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    FactorFunction::from_parts(nodes, dto.root)
}

// ---------------------------------------------------------------------------
// Problem files
// ---------------------------------------------------------------------------

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, Serialize, Deserialize, Default, PartialEq)]
pub struct OptionsDto {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ProblemFile {
    pub version: String,
    pub spaces: Vec<usize>,
    pub entries: Vec<Vec<EntryDto>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub options: Option<OptionsDto>,
}

impl ProblemFile {
    pub fn from_block_function(
        bof: &BlockOperatorFunction,
        l: Option<Vec<usize>>,
    ) -> Result<Self> {
        if bof.row_layout() != bof.col_layout() {
            return schema("problem files require matching row and column spaces");
        }
        Ok(Self {
            version: FORMAT_VERSION.into(),
            spaces: bof.row_layout().dims().to_vec(),
            entries: bof
                .entries()
                .iter()
                .map(|row| row.iter().map(entry_to).collect())
                .collect(),
            l,
            options: None,
        })
    }

    pub fn to_block_function(&self) -> Result<BlockOperatorFunction> {
        if self.version != FORMAT_VERSION {
            return schema(format!("unsupported version {:?}", self.version));
        }
        let entries = self
            .entries
            .iter()
            .map(|row| row.iter().map(entry_from).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let layout = SpaceLayout::new(self.spaces.clone())?;
        BlockOperatorFunction::new(layout.clone(), layout, entries)
    }
}

// ---------------------------------------------------------------------------
// Traces
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum StepDto {
    K { row: usize, col: usize, k: PolyDto },
    Swap { i: usize, j: usize },
    Permute { perm: Vec<usize> },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GridDto {
    pub dims: Vec<usize>,
    pub entries: Vec<Vec<PolyDto>>,
}

fn grid_to(g: &PolyGrid) -> GridDto {
    let n = g.size();
    GridDto {
        dims: g.dims().to_vec(),
        entries: (0..n)
            .map(|j| (0..n).map(|i| poly_to(g.entry(j, i))).collect())
            .collect(),
    }
}

fn grid_from(dto: &GridDto) -> Result<PolyGrid> {
    let entries = dto
        .entries
        .iter()
        .map(|row| row.iter().map(poly_from).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    PolyGrid::new(dto.dims.clone(), entries)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TraceDto {
    pub steps: Vec<StepDto>,
    pub e: GridDto,
    pub final_grid: GridDto,
}

pub fn trace_to(t: &ReductionTrace) -> TraceDto {
    TraceDto {
        steps: t
            .steps
            .iter()
            .map(|s| match s {
                ReductionStep::KStep { row, col, k } => StepDto::K {
                    row: *row,
                    col: *col,
                    k: poly_to(k),
                },
                ReductionStep::SwapRows(i, j) => StepDto::Swap { i: *i, j: *j },
                ReductionStep::PermuteDiag(p) => StepDto::Permute { perm: p.clone() },
            })
            .collect(),
        e: grid_to(&t.e),
        final_grid: grid_to(&t.final_grid),
    }
}

pub fn trace_from(dto: &TraceDto) -> Result<ReductionTrace> {
    Ok(ReductionTrace {
        steps: dto
            .steps
            .iter()
            .map(|s| {
                Ok(match s {
                    StepDto::K { row, col, k } => ReductionStep::KStep {
                        row: *row,
                        col: *col,
                        k: poly_from(k)?,
                    },
                    StepDto::Swap { i, j } => ReductionStep::SwapRows(*i, *j),
                    StepDto::Permute { perm } => ReductionStep::PermuteDiag(perm.clone()),
                })
            })
            .collect::<Result<Vec<_>>>()?,
        e: grid_from(&dto.e)?,
        final_grid: grid_from(&dto.final_grid)?,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReductionFile {
    pub version: String,
    pub algorithm: String,
    pub grid: GridDto,
    pub trace: TraceDto,
}

impl ReductionFile {
    pub fn new(algorithm: &str, reduced: &PolyGrid, trace: &ReductionTrace) -> Self {
        Self {
            version: FORMAT_VERSION.into(),
            algorithm: algorithm.into(),
            grid: grid_to(reduced),
            trace: trace_to(trace),
        }
    }

    pub fn grid(&self) -> Result<PolyGrid> {
        grid_from(&self.grid)
    }

    pub fn trace(&self) -> Result<ReductionTrace> {
        trace_from(&self.trace)
    }
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum SlotDto {
    Base(usize),
    Ext(usize),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StructureDto {
    Direct,
    Interleaved {
        lhs_rows: Vec<SlotDto>,
        lhs_cols: Vec<SlotDto>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PencilDto {
    pub rows: usize,
    pub t: MatrixDto,
    pub offset: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct VerificationDto {
    pub sample_points: Vec<ComplexDto>,
    pub residuals: Vec<f64>,
    pub e_conditions: Vec<f64>,
    pub f_conditions: Vec<f64>,
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

pub fn verification_to(v: &VerificationReport) -> VerificationDto {
    VerificationDto {
        sample_points: v.sample_points.iter().map(|&z| complex_to(z)).collect(),
        residuals: v.factorization_residuals.clone(),
        e_conditions: v.e_conditions.clone(),
        f_conditions: v.f_conditions.clone(),
        max_residual: v.max_residual,
        tol: v.tol,
        pass: v.pass,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SpectrumDto {
    pub pencil_eigs: Vec<ComplexDto>,
    pub oracle_roots: Vec<ComplexDto>,
    pub excluded_discarded: Vec<ComplexDto>,
    pub pairing: Vec<(ComplexDto, ComplexDto, f64)>,
    pub max_pair_distance: f64,
    pub unmatched_pencil: Vec<ComplexDto>,
    pub unmatched_oracle: Vec<ComplexDto>,
    pub tol: f64,
    pub pass: bool,
}

pub fn spectrum_to(s: &SpectrumReport) -> SpectrumDto {
    let cv = |v: &[Complex64]| v.iter().map(|&z| complex_to(z)).collect();
    SpectrumDto {
        pencil_eigs: cv(&s.pencil_eigs),
        oracle_roots: cv(&s.oracle_roots),
        excluded_discarded: cv(&s.excluded_discarded),
        pairing: s
            .pairing
            .iter()
            .map(|&(a, b, d)| (complex_to(a), complex_to(b), d))
            .collect(),
        max_pair_distance: s.max_pair_distance,
        unmatched_pencil: cv(&s.unmatched_pencil),
        unmatched_oracle: cv(&s.unmatched_oracle),
        tol: s.tol,
        pass: s.pass,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SettingsDto {
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateFile {
    pub version: String,
    /// wall-clock seconds; excluded from determinism comparisons
    pub generated_at: u64,
    pub lhs: BlockFunDto,
    pub rhs: BlockFunDto,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_s: Option<FactorDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_t: Option<FactorDto>,
    pub e: FactorDto,
    pub f: FactorDto,
    pub excluded_points: Vec<ComplexDto>,
    pub excluded_description: String,
    pub structure: StructureDto,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pencil: Option<PencilDto>,
    pub w_s_det_degree: usize,
    pub w_t_det_degree: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceDto>,
    pub verification: VerificationDto,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumDto>,
    pub settings: SettingsDto,
    pub stages: Vec<String>,
}

fn slot_to(s: &Slot) -> SlotDto {
    match s {
        Slot::Base(i) => SlotDto::Base(*i),
        Slot::Ext(i) => SlotDto::Ext(*i),
    }
}

fn slot_from(s: &SlotDto) -> Slot {
    match s {
        SlotDto::Base(i) => Slot::Base(*i),
        SlotDto::Ext(i) => Slot::Ext(*i),
    }
}

impl CertificateFile {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        cert: &EquivalenceCertificate,
        verification: &VerificationReport,
        spectrum: Option<&SpectrumReport>,
        trace: Option<&ReductionTrace>,
        settings: SettingsDto,
        stages: Vec<String>,
    ) -> Self {
        let probe = verification.sample_points.first().copied();
        Self {
            version: FORMAT_VERSION.into(),
            generated_at: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            lhs: blockfun_to(&cert.lhs),
            rhs: blockfun_to(&cert.rhs),
            w_s: cert.w_s.as_ref().map(|w| factor_to(w, probe)),
            w_t: cert.w_t.as_ref().map(|w| factor_to(w, probe)),
            e: factor_to(&cert.e, probe),
            f: factor_to(&cert.f, probe),
            excluded_points: cert
                .excluded
                .points()
                .iter()
                .map(|&z| complex_to(z))
                .collect(),
            excluded_description: cert.excluded.description().to_string(),
            structure: match &cert.structure {
                ExtensionStructure::Direct => StructureDto::Direct,
                ExtensionStructure::Interleaved { lhs_rows, lhs_cols } => {
                    StructureDto::Interleaved {
                        lhs_rows: lhs_rows.iter().map(slot_to).collect(),
                        lhs_cols: lhs_cols.iter().map(slot_to).collect(),
                    }
                }
            },
            pencil: cert.pencil.as_ref().map(|p| PencilDto {
                rows: p.t.rows(),
                t: matrix_to(&p.t),
                offset: p.offset,
            }),
            w_s_det_degree: cert.w_s_det_degree,
            w_t_det_degree: cert.w_t_det_degree,
            trace: trace.map(trace_to),
            verification: verification_to(verification),
            spectrum: spectrum.map(spectrum_to),
            settings,
            stages,
        }
    }

    pub fn to_certificate(&self) -> Result<EquivalenceCertificate> {
        if self.version != FORMAT_VERSION {
            return schema(format!("unsupported version {:?}", self.version));
        }
        let structure = match &self.structure {
            StructureDto::Direct => ExtensionStructure::Direct,
            StructureDto::Interleaved { lhs_rows, lhs_cols } => {
                ExtensionStructure::Interleaved {
                    lhs_rows: lhs_rows.iter().map(slot_from).collect(),
                    lhs_cols: lhs_cols.iter().map(slot_from).collect(),
                }
            }
        };
        let pencil = match &self.pencil {
            None => None,
            Some(p) => Some(PencilInfo {
                t: matrix_from(&p.t, p.rows, p.rows)?,
                offset: p.offset,
            }),
        };
        EquivalenceCertificate::new(
            blockfun_from(&self.lhs)?,
            blockfun_from(&self.rhs)?,
            self.w_s.as_ref().map(factor_from).transpose()?,
            self.w_t.as_ref().map(factor_from).transpose()?,
            factor_from(&self.e)?,
            factor_from(&self.f)?,
            ExcludedSet::new(
                self.excluded_points.iter().map(|&v| complex_from(v)).collect(),
                self.excluded_description.clone(),
            ),
            structure,
            pencil,
            self.w_s_det_degree,
            self.w_t_det_degree,
        )
    }
}

// ---------------------------------------------------------------------------
// File IO
// ---------------------------------------------------------------------------

pub fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Schema(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
}

/// Pretty-printed JSON written atomically (temp file + rename).
pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Schema(format!("serialization failed: {e}")))?;
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, text.as_bytes())
        .map_err(|e| Error::Schema(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| Error::Schema(format!("cannot rename into {}: {e}", path.display())))?;
    Ok(())
}
