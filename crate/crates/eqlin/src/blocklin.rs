//! Block companion linearization of an n x n operator matrix polynomial
//! whose diagonal entries carry the strictly highest column degrees.
//!
//! For L = {i : l_i = d_i} empty the factor functions are emitted in closed
//! form (per-column companion factors on the diagonal of F, side rows inside
//! E). For L nonempty the certificate is built compositionally, one column
//! at a time, with the constant P_d blocks gathered in front of the pencil
//! by a final permutation conjugation.

use crate::algebra::{CMatrix, ExtInt, Fin, MatrixPolynomial};
use crate::blockfun::{BlockOperatorFunction, Entry, ExcludedSet, SpaceLayout};
use crate::companion::{
    build_side_e, case_factors, extension_w, lmul_entry, pencil_grid, CompanionCase,
    CompanionSpec,
};
use crate::equivalence::{
    compose_certificates, EquivalenceCertificate, ExtensionStructure, PencilInfo, Slot,
};
use crate::error::{Error, Result};
use crate::factor::{FactorBuilder, FactorFunction};
use crate::reduction::PolyGrid;

/// An n x n polynomial grid with strictly dominant diagonal column degrees
/// and a distinguished index per column.
#[derive(Debug, Clone)]
pub struct BlockPolySpec {
    grid: PolyGrid,
    l: Vec<usize>,
    degrees: Vec<usize>,
}

impl BlockPolySpec {
    pub fn new(grid: PolyGrid, l: Vec<usize>) -> Result<Self> {
        let n = grid.size();
        if l.len() != n {
            return Err(Error::PreconditionViolated(format!(
                "need one distinguished index per column: got {} for {n} columns",
                l.len()
            )));
        }
        let mut degrees = Vec::with_capacity(n);
        for i in 0..n {
            let d = match grid.entry(i, i).trimmed_degree() {
                ExtInt::Fin(d) if d >= 1 => d as usize,
                other => {
                    return Err(Error::DiagonalDegreeViolation {
                        col: i,
                        row: i,
                        off: "-".into(),
                        diag: other.to_string(),
                    })
                }
            };
            for j in 0..n {
                if j != i && grid.entry(j, i).trimmed_degree() >= Fin(d as i64) {
                    return Err(Error::DiagonalDegreeViolation {
                        col: i,
                        row: j,
                        off: grid.entry(j, i).trimmed_degree().to_string(),
                        diag: d.to_string(),
                    });
                }
            }
            if l[i] > d {
                return Err(Error::PreconditionViolated(format!(
                    "l_{i} = {} exceeds column degree {d}",
                    l[i]
                )));
            }
            degrees.push(d);
        }
        Ok(Self { grid, l, degrees })
    }

    pub fn grid(&self) -> &PolyGrid {
        &self.grid
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn distinguished(&self) -> &[usize] {
        &self.l
    }

    pub fn top_set(&self) -> Vec<usize> {
        (0..self.grid.size())
            .filter(|&i| self.l[i] == self.degrees[i])
            .collect()
    }

    fn column_spec(&self, i: usize) -> Result<CompanionSpec> {
        CompanionSpec::new(self.grid.entry(i, i).trim(crate::algebra::TRIM_TOL), self.l[i])
    }
}

#[derive(Debug, Clone)]
pub struct BlockCompanionResult {
    pub t: CMatrix,
    pub w: Option<FactorFunction>,
    pub p_d_extra: Option<CMatrix>,
    /// Slot layout of T: column i occupies d_i consecutive slots of its
    /// space dimension.
    pub layout: SpaceLayout,
}

/// The block companion operator in closed form: per-column companion
/// blocks on the diagonal, coefficient rows (normalized by the row
/// diagonal's leading coefficient) in the first row of each group.
fn direct_t(spec: &BlockPolySpec) -> Result<CMatrix> {
    let n = spec.grid.size();
    let dims = spec.grid.dims();
    let slot_offsets: Vec<usize> = {
        let mut offs = Vec::with_capacity(n);
        let mut acc = 0;
        for i in 0..n {
            offs.push(acc);
            acc += spec.degrees[i] * dims[i];
        }
        offs
    };
    let total: usize = (0..n).map(|i| spec.degrees[i] * dims[i]).collect::<Vec<_>>().iter().sum();
    let mut t = CMatrix::zeros(total, total);
    let lead_inv: Vec<CMatrix> = (0..n)
        .map(|i| spec.column_spec(i).map(|s| s.lead_inv().clone()))
        .collect::<Result<_>>()?;
    for i in 0..n {
        let (di, mi) = (spec.degrees[i], dims[i]);
        for j in 0..n {
            let p = spec.grid.entry(j, i);
            // first block row of group j: -lead_j^{-1} P_{j,i}^{(d_i-1-c)}
            for c in 0..di {
                let coeff = p.coeff(di - 1 - c);
                if coeff.is_zero() && !(i == j) {
                    continue;
                }
                let val = lead_inv[j].matmul(&coeff)?.neg();
                t.set_block(slot_offsets[j], slot_offsets[i] + c * mi, &val);
            }
        }
        // subdiagonal identities inside group i
        for s in 1..di {
            t.set_block(
                slot_offsets[i] + s * mi,
                slot_offsets[i] + (s - 1) * mi,
                &CMatrix::identity(mi),
            );
        }
    }
    Ok(t)
}

fn block_w(spec: &BlockPolySpec) -> Result<(Option<FactorFunction>, Vec<usize>)> {
    let n = spec.grid.size();
    let mut parts: Vec<FactorFunction> = Vec::new();
    let mut w_dims = Vec::with_capacity(n);
    for i in 0..n {
        let cs = spec.column_spec(i)?;
        match extension_w(&cs) {
            Some(w) => {
                w_dims.push(w.rows());
                parts.push(w);
            }
            None => w_dims.push(0),
        }
    }
    if parts.is_empty() {
        return Ok((None, w_dims));
    }
    let mut b = FactorBuilder::new();
    let ids: Vec<usize> = parts.iter().map(|p| b.graft(p)).collect();
    let dims: Vec<usize> = parts.iter().map(|p| p.rows()).collect();
    let entries: Vec<(usize, usize, usize)> =
        ids.into_iter().enumerate().map(|(k, id)| (k, k, id)).collect();
    let root = b.block(dims.clone(), dims, entries)?;
    Ok((Some(b.finish(root)), w_dims))
}

/// Interleaved slot lists: per column, the base rows then that column's W.
fn interleave_slots(dims: &[usize], w_dims: &[usize]) -> (Vec<Slot>, Vec<Slot>) {
    let mut rows = Vec::new();
    let mut base_off = 0;
    let mut ext_off = 0;
    for (d, w) in dims.iter().zip(w_dims) {
        rows.extend((base_off..base_off + d).map(Slot::Base));
        rows.extend((ext_off..ext_off + w).map(Slot::Ext));
        base_off += d;
        ext_off += w;
    }
    (rows.clone(), rows)
}

/// The pencil T - lambda as a polynomial block grid over the slot layout.
fn pencil_bof(spec: &BlockPolySpec, t: &CMatrix) -> Result<BlockOperatorFunction> {
    let n = spec.grid.size();
    let dims = spec.grid.dims();
    let mut slot_dims = Vec::new();
    for i in 0..n {
        slot_dims.extend(std::iter::repeat_n(dims[i], spec.degrees[i]));
    }
    let layout = SpaceLayout::new(slot_dims.clone())?;
    let k = slot_dims.len();
    let mut grid: Vec<Vec<MatrixPolynomial>> = Vec::with_capacity(k);
    for r in 0..k {
        let mut row = Vec::with_capacity(k);
        for c in 0..k {
            let block = t.block(layout.offset(r), layout.offset(c), slot_dims[r], slot_dims[c]);
            let mut coeffs = vec![block];
            if r == c {
                coeffs.push(CMatrix::identity(slot_dims[r]).neg());
            }
            row.push(MatrixPolynomial::new(slot_dims[r], slot_dims[c], coeffs)?);
        }
        grid.push(row);
    }
    BlockOperatorFunction::from_poly_grid(layout, grid)
}

/// Closed-form certificate for L = empty.
fn block_companion_direct(
    spec: &BlockPolySpec,
    t: &CMatrix,
) -> Result<EquivalenceCertificate> {
    let n = spec.grid.size();
    let dims = spec.grid.dims().to_vec();
    let (w, w_dims) = block_w(spec)?;
    let lhs = spec.grid.to_block_function()?;
    let rhs = pencil_bof(spec, t)?;
    let group_dims: Vec<usize> = (0..n).map(|i| spec.degrees[i] * dims[i]).collect();

    // E: per-column companion factors on the diagonal, first-row side blocks
    // off the diagonal; row slot j spans (H_j, W_j)
    let mut be = FactorBuilder::new();
    let mut e_blocks = Vec::new();
    let row_dims: Vec<usize> = (0..n).map(|j| dims[j] + w_dims[j]).collect();
    for i in 0..n {
        let cs = spec.column_spec(i)?;
        let fac = case_factors(&cs)?;
        let eid = be.graft(&fac.e);
        e_blocks.push((i, i, eid));
        for j in 0..n {
            if j == i {
                continue;
            }
            let p = spec.grid.entry(j, i).trim(crate::algebra::TRIM_TOL);
            if p.is_zero() {
                continue;
            }
            if let Some(side) = build_side_e(&cs, &p)? {
                // embed the single-row side factor as the first row of the
                // (H_j, W_j) slot
                let sid = be.graft(&side);
                let zero_pad = row_dims[j] - dims[j];
                let padded = if zero_pad == 0 {
                    sid
                } else {
                    let z = be.constant(CMatrix::zeros(zero_pad, group_dims[i]));
                    be.block(
                        vec![dims[j], zero_pad],
                        vec![group_dims[i]],
                        vec![(0, 0, sid), (1, 0, z)],
                    )?
                };
                e_blocks.push((j, i, padded));
            }
        }
    }
    let e_root = be.block(row_dims.clone(), group_dims.clone(), e_blocks)?;
    let e = be.finish(e_root);

    let mut bf = FactorBuilder::new();
    let mut f_blocks = Vec::new();
    for i in 0..n {
        let cs = spec.column_spec(i)?;
        let fac = case_factors(&cs)?;
        let fid = bf.graft(&fac.f);
        f_blocks.push((i, i, fid));
    }
    let col_dims: Vec<usize> = (0..n).map(|i| dims[i] + w_dims[i]).collect();
    let f_root = bf.block(group_dims, col_dims, f_blocks)?;
    let f = bf.finish(f_root);

    let excluded = if spec.l.iter().any(|&l| l > 0) {
        ExcludedSet::origin()
    } else {
        ExcludedSet::empty()
    };
    let (lhs_rows, lhs_cols) = interleave_slots(&dims, &w_dims);
    let structure = if w.is_none() {
        ExtensionStructure::Direct
    } else {
        ExtensionStructure::Interleaved { lhs_rows, lhs_cols }
    };
    let w_det: usize = (0..n).map(|i| spec.l[i] * dims[i]).sum();
    EquivalenceCertificate::new(
        lhs,
        rhs,
        w,
        None,
        e,
        f,
        excluded,
        structure,
        Some(PencilInfo {
            t: t.clone(),
            offset: 0,
        }),
        w_det,
        0,
    )
}

/// One compositional step: unfold the companion of the diagonal entry at
/// grid index `idx` inside an all-polynomial grid.
fn companion_unfold_at(
    bof: &BlockOperatorFunction,
    idx: usize,
    l: usize,
) -> Result<EquivalenceCertificate> {
    let n = bof.grid_size();
    let diag = bof
        .entry(idx, idx)
        .as_polynomial()
        .ok_or_else(|| Error::PreconditionViolated("diagonal entry must be polynomial".into()))?
        .trim(crate::algebra::TRIM_TOL);
    let cs = CompanionSpec::new(diag, l)?;
    let d = cs.degree();
    let m = cs.dim();
    for j in 0..n {
        if j != idx {
            let deg = match bof.entry(j, idx).as_polynomial() {
                Some(p) => p.trimmed_degree(),
                None => {
                    return Err(Error::PreconditionViolated(format!(
                        "entry ({j},{idx}) must be polynomial"
                    )))
                }
            };
            if deg >= Fin(d as i64) {
                return Err(Error::DiagonalDegreeViolation {
                    col: idx,
                    row: j,
                    off: deg.to_string(),
                    diag: d.to_string(),
                });
            }
        }
    }
    let is_top = cs.case() == CompanionCase::LTop;
    if is_top {
        for c in 0..n {
            if c != idx && bof.entry(idx, c).as_polynomial().is_none() {
                return Err(Error::PreconditionViolated(
                    "l = d requires polynomial row entries".into(),
                ));
            }
        }
    }
    let group = if is_top { d + 1 } else { d }; // block slots replacing idx
    let pgrid = pencil_grid(&cs)?;
    let lead_inv = cs.lead_inv().clone();

    // layouts
    let mut row_dims = Vec::new();
    let mut col_dims = Vec::new();
    for j in 0..n {
        if j == idx {
            row_dims.extend(std::iter::repeat_n(m, group));
            col_dims.extend(std::iter::repeat_n(m, group));
        } else {
            row_dims.push(bof.row_layout().dims()[j]);
            col_dims.push(bof.col_layout().dims()[j]);
        }
    }
    let map = |j: usize| if j < idx { j } else { j + group - 1 };
    let total = n + group - 1;
    let mut entries: Vec<Vec<Entry>> = (0..total)
        .map(|j| {
            (0..total)
                .map(|i| Entry::zero(row_dims[j], col_dims[i]))
                .collect()
        })
        .collect();
    // untouched entries
    for j in 0..n {
        for i in 0..n {
            if j == idx || i == idx {
                continue;
            }
            let e = bof.entry(j, i).clone();
            if !e.is_zero() {
                entries[map(j)][map(i)] = e;
            }
        }
    }
    let base = idx; // first slot of the group
    let pencil0 = if is_top { base + 1 } else { base }; // first pencil slot
    // the companion group
    if is_top {
        entries[base][base] = Entry::Polynomial(MatrixPolynomial::constant(
            cs.polynomial().leading().expect("deg >= 1").clone(),
        ));
    }
    for (r, row) in pgrid.iter().enumerate() {
        for (c, p) in row.iter().enumerate() {
            if !p.is_zero() {
                entries[pencil0 + r][pencil0 + c] = Entry::Polynomial(p.clone());
            }
        }
    }
    // row idx entries: -lead^{-1} X_c in the first pencil row
    for c in 0..n {
        if c == idx {
            continue;
        }
        let x = bof.entry(idx, c);
        if x.is_zero() {
            continue;
        }
        entries[pencil0][map(c)] = lmul_entry(&lead_inv.neg(), x)?;
    }
    // column idx entries: coefficient spread along the pencil columns
    for j in 0..n {
        if j == idx {
            continue;
        }
        let q = bof.entry(j, idx).as_polynomial().expect("checked");
        for c in 0..d {
            let coeff = q.coeff(d - 1 - c);
            if coeff.is_zero() {
                continue;
            }
            entries[map(j)][pencil0 + c] = Entry::Polynomial(MatrixPolynomial::constant(coeff));
        }
    }
    let rhs = BlockOperatorFunction::new(
        SpaceLayout::new(row_dims.clone())?,
        SpaceLayout::new(col_dims.clone())?,
        entries,
    )?;

    // factors: block identity outside, companion factors on the group,
    // side rows coupling every other row to the group columns,
    // and (for l = d) the P_d^{-1}X column blocks inside F
    let fac = case_factors(&cs)?;
    let w = extension_w(&cs);
    let w_dim = w.as_ref().map_or(0, |x| x.rows());
    let group_total = group * m;
    let base_rows = bof.row_layout().dims();
    let base_cols = bof.col_layout().dims();
    let e = {
        let mut b = FactorBuilder::new();
        let mut blocks = Vec::new();
        let mut rdims = Vec::new();
        for j in 0..n {
            rdims.push(if j == idx {
                m + w_dim
            } else {
                base_rows[j]
            });
        }
        let mut cdims = Vec::new();
        for j in 0..n {
            cdims.push(if j == idx { group_total } else { base_rows[j] });
        }
        for j in 0..n {
            if j == idx {
                let eid = b.graft(&fac.e);
                blocks.push((j, j, eid));
            } else {
                let iid = b.identity(base_rows[j]);
                blocks.push((j, j, iid));
                let q = bof.entry(j, idx).as_polynomial().expect("checked");
                if let Some(side) = build_side_e(&cs, &q.trim(crate::algebra::TRIM_TOL))? {
                    let sid = b.graft(&side);
                    blocks.push((j, idx, sid));
                }
            }
        }
        let root = b.block(rdims, cdims, blocks)?;
        b.finish(root)
    };
    let f = {
        let mut b = FactorBuilder::new();
        let mut blocks = Vec::new();
        let mut rdims = Vec::new();
        let mut cdims = Vec::new();
        for j in 0..n {
            rdims.push(if j == idx { group_total } else { base_cols[j] });
            cdims.push(if j == idx {
                m + w_dim
            } else {
                base_cols[j]
            });
        }
        for j in 0..n {
            if j == idx {
                let fid = b.graft(&fac.f);
                blocks.push((j, j, fid));
            } else {
                let iid = b.identity(base_cols[j]);
                blocks.push((j, j, iid));
                if is_top {
                    let x = bof.entry(idx, j).as_polynomial().expect("checked for l = d");
                    if !x.is_zero() {
                        let top = b.poly(x.lmul_const(&lead_inv)?);
                        let fcheck = b.block(
                            vec![m; group],
                            vec![base_cols[j]],
                            vec![(0, 0, top)],
                        )?;
                        blocks.push((idx, j, fcheck));
                    }
                }
            }
        }
        let root = b.block(rdims, cdims, blocks)?;
        b.finish(root)
    };

    let row_split = bof.row_layout().offset(idx + 1);
    let col_split = bof.col_layout().offset(idx + 1);
    let base_rows_total = bof.total_rows();
    let base_cols_total = bof.total_cols();
    let mut lhs_rows: Vec<Slot> = (0..row_split).map(Slot::Base).collect();
    lhs_rows.extend((0..w_dim).map(Slot::Ext));
    lhs_rows.extend((row_split..base_rows_total).map(Slot::Base));
    let mut lhs_cols: Vec<Slot> = (0..col_split).map(Slot::Base).collect();
    lhs_cols.extend((0..w_dim).map(Slot::Ext));
    lhs_cols.extend((col_split..base_cols_total).map(Slot::Base));
    let structure = if w_dim == 0 {
        ExtensionStructure::Direct
    } else {
        ExtensionStructure::Interleaved { lhs_rows, lhs_cols }
    };
    EquivalenceCertificate::new(
        bof.clone(),
        rhs,
        w,
        None,
        e,
        f,
        cs.excluded(),
        structure,
        None,
        l * m,
        0,
    )
}

/// Block companion linearization for grids with strictly dominant diagonal
/// column degrees.
pub fn block_companion(
    spec: &BlockPolySpec,
) -> Result<(BlockCompanionResult, EquivalenceCertificate)> {
    let n = spec.grid.size();
    let dims = spec.grid.dims().to_vec();
    let t = direct_t(spec)?;
    let mut slot_dims = Vec::new();
    for i in 0..n {
        slot_dims.extend(std::iter::repeat_n(dims[i], spec.degrees[i]));
    }
    let layout = SpaceLayout::new(slot_dims)?;
    let top = spec.top_set();
    let (w, _) = block_w(spec)?;
    if top.is_empty() {
        let cert = block_companion_direct(spec, &t)?;
        return Ok((
            BlockCompanionResult {
                t,
                w,
                p_d_extra: None,
                layout,
            },
            cert,
        ));
    }

    // compositional route: unfold the columns one at a time
    let mut cert: Option<EquivalenceCertificate> = None;
    let mut current = spec.grid.to_block_function()?;
    let mut idx_of: Vec<usize> = (0..n).collect();
    for i in 0..n {
        let step = companion_unfold_at(&current, idx_of[i], spec.l[i])?;
        current = step.rhs.clone();
        let grew = spec.degrees[i] - 1 + usize::from(spec.l[i] == spec.degrees[i]);
        for k in i + 1..n {
            idx_of[k] += grew;
        }
        cert = Some(match cert {
            None => step,
            Some(prev) => compose_certificates(&prev, &step)?,
        });
    }
    let mut cert = cert.expect("n >= 1");

    // gather the constant P_d blocks in front by a permutation conjugation
    let cur_slots = current.row_layout().dims().to_vec();
    let mut pd_slots = Vec::new(); // block indices of the P_d rows
    {
        let mut slot = 0usize;
        for i in 0..n {
            if spec.l[i] == spec.degrees[i] {
                pd_slots.push(slot);
                slot += 1;
            }
            slot += spec.degrees[i];
        }
    }
    let mut order: Vec<usize> = pd_slots.clone();
    order.extend((0..cur_slots.len()).filter(|s| !pd_slots.contains(s)));
    // scalar permutation
    let offsets: Vec<usize> = cur_slots
        .iter()
        .scan(0, |acc, d| {
            let o = *acc;
            *acc += d;
            Some(o)
        })
        .collect();
    let mut scalar_order = Vec::new();
    for &s in &order {
        scalar_order.extend(offsets[s]..offsets[s] + cur_slots[s]);
    }
    let pi = CMatrix::permutation(&scalar_order);
    let gathered_entries: Vec<Vec<Entry>> = order
        .iter()
        .map(|&j| order.iter().map(|&i| current.entry(j, i).clone()).collect())
        .collect();
    let gathered_dims: Vec<usize> = order.iter().map(|&s| cur_slots[s]).collect();
    let gathered = BlockOperatorFunction::new(
        SpaceLayout::new(gathered_dims.clone())?,
        SpaceLayout::new(gathered_dims)?,
        gathered_entries,
    )?;
    let pd_total: usize = top.iter().map(|&i| dims[i]).sum();
    // extract T from the gathered grid's constant part and check it against
    // the direct formula
    let pencil_t = {
        let total = gathered.total_rows() - pd_total;
        let mut out = CMatrix::zeros(total, total);
        let gl = gathered.row_layout().clone();
        let skip = top.len();
        for j in skip..gathered.grid_size() {
            for i in skip..gathered.grid_size() {
                if let Some(p) = gathered.entry(j, i).as_polynomial() {
                    if !p.is_zero() {
                        out.set_block(
                            gl.offset(j) - pd_total,
                            gl.offset(i) - pd_total,
                            &p.coeff(0),
                        );
                    }
                }
            }
        }
        out
    };
    let agreement = pencil_t.sub(&t)?.max_norm() / t.max_norm().max(1.0);
    if agreement > 1e-10 {
        return Err(Error::StructuralMismatch(format!(
            "compositional pencil deviates from the closed form by {agreement:.3e}"
        )));
    }
    let perm_cert = EquivalenceCertificate::new(
        current.clone(),
        gathered,
        None,
        None,
        FactorFunction::constant(pi.transpose()),
        FactorFunction::constant(pi),
        ExcludedSet::empty(),
        ExtensionStructure::Direct,
        None,
        0,
        0,
    )?;
    cert = compose_certificates(&cert, &perm_cert)?;
    cert.pencil = Some(PencilInfo {
        t: t.clone(),
        offset: pd_total,
    });
    let p_d_extra = {
        let mut out = CMatrix::zeros(pd_total, pd_total);
        let mut off = 0;
        for &i in &top {
            let lead = spec.grid.entry(i, i).leading().expect("deg >= 1").clone();
            out.set_block(off, off, &lead);
            off += dims[i];
        }
        Some(out)
    };
    Ok((
        BlockCompanionResult {
            t,
            w,
            p_d_extra,
            layout,
        },
        cert,
    ))
}

/// Optional preprocessing: right-multiply column i by lambda^(d - d_i) so
/// every column reaches the common top degree. Introduces spurious roots at
/// the origin, one per padded dimension, which the caller must discount.
pub fn degree_pad(grid: &PolyGrid) -> Result<(PolyGrid, usize)> {
    let n = grid.size();
    let col_deg: Vec<i64> = (0..n)
        .map(|i| {
            (0..n)
                .filter_map(|j| grid.entry(j, i).trimmed_degree().as_fin())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let d = col_deg.iter().copied().max().unwrap_or(0);
    let mut spurious = 0usize;
    let mut entries = Vec::with_capacity(n);
    for j in 0..n {
        let mut row = Vec::with_capacity(n);
        for i in 0..n {
            let shift = (d - col_deg[i]) as usize;
            row.push(grid.entry(j, i).shift_up(shift));
        }
        entries.push(row);
    }
    for i in 0..n {
        spurious += ((d - col_deg[i]) as usize) * grid.dims()[i];
    }
    Ok((PolyGrid::new(grid.dims().to_vec(), entries)?, spurious))
}
