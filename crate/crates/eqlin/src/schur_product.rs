//! Schur-complement and product linearizations.
//!
//! A Schur entry S = A - B D^{-1} C is, after D-extension, equivalent to the
//! two-by-two unfolding [A B; C D]; a product M_1 ... M_k is, after
//! I-extension, equivalent to the bidiagonal matrix with the factors on the
//! diagonal and -I below. Both come with explicit triangular E and F. The
//! embedded variants splice the unfolding into a surrounding grid, with the
//! extension interleaved next to the unfolded entry.

use crate::algebra::{CMatrix, MatrixPolynomial};
use crate::blockfun::{
    entry_excluded_points, BlockOperatorFunction, Entry, ExcludedSet, SpaceLayout,
};
use crate::equivalence::{EquivalenceCertificate, ExtensionStructure, Slot};
use crate::error::{Error, Result};
use crate::factor::{scatter, FactorBuilder, FactorFunction};

// ---------------------------------------------------------------------------
// Plans
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SchurLinearizationPlan {
    pub a: MatrixPolynomial,
    pub b: MatrixPolynomial,
    pub c: MatrixPolynomial,
    pub d: MatrixPolynomial,
    pub excluded: ExcludedSet,
}

impl SchurLinearizationPlan {
    pub fn new(
        a: MatrixPolynomial,
        b: MatrixPolynomial,
        c: MatrixPolynomial,
        d: MatrixPolynomial,
    ) -> Result<Self> {
        let entry = Entry::SchurComplement {
            a: a.clone(),
            b: b.clone(),
            c: c.clone(),
            d: d.clone(),
        };
        entry.validate()?;
        let excluded = entry_excluded_points(&entry)?;
        Ok(Self {
            a,
            b,
            c,
            d,
            excluded,
        })
    }

    pub fn entry(&self) -> Entry {
        Entry::SchurComplement {
            a: self.a.clone(),
            b: self.b.clone(),
            c: self.c.clone(),
            d: self.d.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProductLinearizationPlan {
    pub factors: Vec<MatrixPolynomial>,
}

impl ProductLinearizationPlan {
    pub fn new(factors: Vec<MatrixPolynomial>) -> Result<Self> {
        let entry = Entry::Product(factors.clone());
        entry.validate()?;
        Ok(Self { factors })
    }

    pub fn entry(&self) -> Entry {
        Entry::Product(self.factors.clone())
    }
}

// ---------------------------------------------------------------------------
// Standalone linearizations
// ---------------------------------------------------------------------------

/// S is after D-extension equivalent to [A B; C D] with
/// E = [I  -B D^{-1}; 0 I] and F = [I 0; -D^{-1} C  I].
pub fn schur_extend(plan: &SchurLinearizationPlan) -> Result<EquivalenceCertificate> {
    let lhs = BlockOperatorFunction::single(plan.entry())?;
    let (hp_r, hp_c) = (plan.a.row_dim(), plan.a.col_dim());
    let hd = plan.d.row_dim();
    let rhs = BlockOperatorFunction::new(
        SpaceLayout::new(vec![hp_r, hd])?,
        SpaceLayout::new(vec![hp_c, hd])?,
        vec![
            vec![
                Entry::Polynomial(plan.a.clone()),
                Entry::Polynomial(plan.b.clone()),
            ],
            vec![
                Entry::Polynomial(plan.c.clone()),
                Entry::Polynomial(plan.d.clone()),
            ],
        ],
    )?;
    let e = {
        let mut bd = FactorBuilder::new();
        let i_top = bd.identity(hp_r);
        let i_bot = bd.identity(hd);
        let b_id = bd.poly(plan.b.clone());
        let d_id = bd.poly(plan.d.clone());
        let d_inv = bd.inverse(d_id)?;
        let bdinv = bd.product(vec![b_id, d_inv])?;
        let coupling = bd.neg(bdinv);
        let root = bd.block(
            vec![hp_r, hd],
            vec![hp_r, hd],
            vec![(0, 0, i_top), (1, 1, i_bot), (0, 1, coupling)],
        )?;
        bd.finish(root)
    };
    let f = {
        let mut bd = FactorBuilder::new();
        let i_top = bd.identity(hp_c);
        let i_bot = bd.identity(hd);
        let c_id = bd.poly(plan.c.clone());
        let d_id = bd.poly(plan.d.clone());
        let d_inv = bd.inverse(d_id)?;
        let dinvc = bd.product(vec![d_inv, c_id])?;
        let coupling = bd.neg(dinvc);
        let root = bd.block(
            vec![hp_c, hd],
            vec![hp_c, hd],
            vec![(0, 0, i_top), (1, 1, i_bot), (1, 0, coupling)],
        )?;
        bd.finish(root)
    };
    let w_s = FactorFunction::poly(plan.d.clone());
    let w_det_deg =
        plan.d.trimmed_degree().as_fin().unwrap_or(0).max(0) as usize * plan.d.row_dim();
    EquivalenceCertificate::new(
        lhs,
        rhs,
        Some(w_s),
        None,
        e,
        f,
        plan.excluded.clone(),
        ExtensionStructure::Direct,
        None,
        w_det_deg,
        0,
    )
}

/// Partial product M_{from} ... M_{to-1} (empty range gives the identity on
/// the row space of factors[from], i.e. the space between the neighbours).
fn partial_product(factors: &[MatrixPolynomial], from: usize, to: usize) -> Result<MatrixPolynomial> {
    if from >= to {
        let dim = if from < factors.len() {
            factors[from].row_dim()
        } else {
            factors.last().expect("nonempty").col_dim()
        };
        return Ok(MatrixPolynomial::identity(dim));
    }
    let mut acc = factors[from].clone();
    for f in &factors[from + 1..to] {
        acc = acc.mul(f)?;
    }
    Ok(acc)
}

/// M_1 ... M_k is after I-extension equivalent to the bidiagonal unfolding;
/// E and F carry the partial products.
pub fn product_linearize(plan: &ProductLinearizationPlan) -> Result<EquivalenceCertificate> {
    let m = plan.factors.len();
    let lhs = BlockOperatorFunction::single(plan.entry())?;
    if m == 1 {
        return EquivalenceCertificate::identity(lhs);
    }
    // spaces: rows H_0..H_{m-1}, cols H_1..H_m
    let row_dims: Vec<usize> = plan.factors.iter().map(|f| f.row_dim()).collect();
    let col_dims: Vec<usize> = plan.factors.iter().map(|f| f.col_dim()).collect();
    let mut entries: Vec<Vec<Entry>> = (0..m)
        .map(|j| (0..m).map(|i| Entry::zero(row_dims[j], col_dims[i])).collect())
        .collect();
    for k in 0..m {
        entries[k][k] = Entry::Polynomial(plan.factors[k].clone());
        if k + 1 < m {
            entries[k + 1][k] =
                Entry::Polynomial(MatrixPolynomial::identity(col_dims[k]).neg());
        }
    }
    let rhs = BlockOperatorFunction::new(
        SpaceLayout::new(row_dims.clone())?,
        SpaceLayout::new(col_dims.clone())?,
        entries,
    )?;
    // E on H_0 + H_1 + ... + H_{m-1}: upper triangular of partial products
    let e = {
        let mut bd = FactorBuilder::new();
        let dims: Vec<usize> = (0..m).map(|k| plan.factors[k].row_dim()).collect();
        let mut blocks = Vec::new();
        for i in 0..m {
            for j in i..m {
                let p = partial_product(&plan.factors, i, j)?;
                let id = bd.poly(p);
                blocks.push((i, j, id));
            }
        }
        let root = bd.block(dims.clone(), dims, blocks)?;
        bd.finish(root)
    };
    // F maps (H_m, H_1..H_{m-1}) to (H_1..H_m)
    let f = {
        let mut bd = FactorBuilder::new();
        let out_dims: Vec<usize> = col_dims.clone();
        let mut in_dims = vec![col_dims[m - 1]];
        in_dims.extend(&col_dims[..m - 1]);
        let mut blocks = Vec::new();
        for r in 0..m {
            // first column: product of the factors after r+1 (1-indexed r+1)
            let p = partial_product(&plan.factors, r + 1, m)?;
            let id = bd.poly(p);
            blocks.push((r, 0, id));
            if r + 1 < m {
                let neg_i = bd.constant(CMatrix::identity(col_dims[r]).neg());
                blocks.push((r, r + 1, neg_i));
            }
        }
        let root = bd.block(out_dims, in_dims, blocks)?;
        bd.finish(root)
    };
    let ext_dim: usize = col_dims[..m - 1].iter().sum();
    EquivalenceCertificate::new(
        lhs,
        rhs,
        Some(FactorFunction::identity(ext_dim)),
        None,
        e,
        f,
        ExcludedSet::empty(),
        ExtensionStructure::Direct,
        None,
        0,
        0,
    )
}

// ---------------------------------------------------------------------------
// Embedded variants: unfold one entry inside a grid
// ---------------------------------------------------------------------------

/// Unfold the product or Schur entry at grid position (row, col), producing
/// the grid with the entry replaced by its linearization and a certificate
/// from the original grid (extension interleaved at the entry's slot).
pub fn unfold_entry_at(
    bof: &BlockOperatorFunction,
    row: usize,
    col: usize,
) -> Result<EquivalenceCertificate> {
    let entry = bof.entry(row, col).clone();
    match &entry {
        Entry::Product(factors) if factors.len() == 1 => {
            // rewrite as a polynomial entry; a plain equivalence with E=F=I
            let mut entries = bof.entries().clone();
            entries[row][col] = Entry::Polynomial(factors[0].clone());
            let rhs = BlockOperatorFunction::new(
                bof.row_layout().clone(),
                bof.col_layout().clone(),
                entries,
            )?;
            let excluded = bof.excluded_points()?;
            EquivalenceCertificate::new(
                bof.clone(),
                rhs,
                None,
                None,
                FactorFunction::identity(bof.total_rows()),
                FactorFunction::identity(bof.total_cols()),
                excluded,
                ExtensionStructure::Direct,
                None,
                0,
                0,
            )
        }
        Entry::Product(_) | Entry::SchurComplement { .. } => {
            let inner = match &entry {
                Entry::Product(factors) => {
                    product_linearize(&ProductLinearizationPlan::new(factors.clone())?)?
                }
                Entry::SchurComplement { a, b, c, d } => schur_extend(
                    &SchurLinearizationPlan::new(a.clone(), b.clone(), c.clone(), d.clone())?,
                )?,
                _ => unreachable!(),
            };
            embed_unfolded(bof, row, col, &entry, &inner)
        }
        Entry::Polynomial(_) => Err(Error::StructuralMismatch(format!(
            "entry ({row},{col}) is already polynomial"
        ))),
    }
}

/// Shared grid surgery for product and Schur unfoldings.
fn embed_unfolded(
    bof: &BlockOperatorFunction,
    row: usize,
    col: usize,
    entry: &Entry,
    inner: &EquivalenceCertificate,
) -> Result<EquivalenceCertificate> {
    let n = bof.grid_size();
    let inner_rhs = &inner.rhs;
    let k = inner_rhs.grid_size(); // unfolding is k x k blocks
    let new_rows = k - 1; // block rows inserted after `row`
    let new_cols = k - 1; // block cols inserted around `col`

    // Where does the original column land among the unfolding's columns?
    // Product: the entry's domain H_m is the LAST unfolding column, new
    // columns go before it. Schur: the entry's domain is the FIRST column,
    // the D column goes after it.
    let (old_col_pos, x_row_in_unfold) = match entry {
        Entry::Product(_) => (k - 1, 0),
        Entry::SchurComplement { .. } => (0, 0),
        Entry::Polynomial(_) => unreachable!(),
    };
    let _ = x_row_in_unfold;

    // new block layouts
    let mut row_dims: Vec<usize> = Vec::with_capacity(n + new_rows);
    for (j, &d) in bof.row_layout().dims().iter().enumerate() {
        if j == row {
            // unfolding rows: entry row keeps slot 0, rest inserted after
            row_dims.extend(inner_rhs.row_layout().dims());
        } else {
            row_dims.push(d);
        }
    }
    let mut col_dims: Vec<usize> = Vec::with_capacity(n + new_cols);
    for (i, &d) in bof.col_layout().dims().iter().enumerate() {
        if i == col {
            col_dims.extend(inner_rhs.col_layout().dims());
        } else {
            col_dims.push(d);
        }
    }

    // position maps old block index -> new block index
    let map_row = |j: usize| if j <= row { j } else { j + new_rows };
    let map_col = |i: usize| {
        use std::cmp::Ordering::*;
        match i.cmp(&col) {
            Less => i,
            Equal => col + old_col_pos,
            Greater => i + new_cols,
        }
    };

    let total_new = n + new_rows;
    let mut entries: Vec<Vec<Entry>> = (0..total_new)
        .map(|j| {
            (0..total_new)
                .map(|i| Entry::zero(row_dims[j], col_dims[i]))
                .collect()
        })
        .collect();
    // carry over untouched entries; the entry's own row and column couple to
    // slot 0 of the unfolding rows resp. the old-column slot
    for j in 0..n {
        for i in 0..n {
            if j == row && i == col {
                continue;
            }
            let e = bof.entry(j, i).clone();
            if e.is_zero() {
                continue;
            }
            let (jj, ii) = (
                if j == row { row } else { map_row(j) },
                if i == col { col + old_col_pos } else { map_col(i) },
            );
            entries[jj][ii] = e;
        }
    }
    // drop in the unfolding blocks
    for bj in 0..k {
        for bi in 0..k {
            let e = inner_rhs.entry(bj, bi).clone();
            if e.is_zero() {
                continue;
            }
            entries[row + bj][col + bi] = e;
        }
    }
    let rhs = BlockOperatorFunction::new(
        SpaceLayout::new(row_dims.clone())?,
        SpaceLayout::new(col_dims.clone())?,
        entries,
    )?;

    // extension W interleaves after the entry's row / column
    let (w_r, w_c) = inner
        .w_s
        .as_ref()
        .map_or((0, 0), |w| (w.rows(), w.cols()));
    let base_rows = bof.total_rows();
    let base_cols = bof.total_cols();
    let row_split = bof.row_layout().offset(row + 1);
    let col_split = bof.col_layout().offset(col + 1);
    let mut lhs_rows: Vec<Slot> = (0..row_split).map(Slot::Base).collect();
    lhs_rows.extend((0..w_r).map(Slot::Ext));
    lhs_rows.extend((row_split..base_rows).map(Slot::Base));
    let mut lhs_cols: Vec<Slot> = (0..col_split).map(Slot::Base).collect();
    lhs_cols.extend((0..w_c).map(Slot::Ext));
    lhs_cols.extend((col_split..base_cols).map(Slot::Base));

    // scalar slot positions (shared row coordinates on both sides)
    let entry_row_off = bof.row_layout().offset(row);
    let entry_rows = bof.row_layout().dims()[row];
    let mut row_slots: Vec<usize> = (entry_row_off..entry_row_off + entry_rows).collect();
    row_slots.extend(row_split..row_split + w_r);
    // F couples lhs-extended columns (entry col, then W cols) ...
    let entry_col_off = bof.col_layout().offset(col);
    let entry_cols = bof.col_layout().dims()[col];
    let mut f_in_cols: Vec<usize> = (entry_col_off..entry_col_off + entry_cols).collect();
    f_in_cols.extend(col_split..col_split + w_c);
    // ... to the rhs columns of the unfolding, which sit consecutively from
    // the entry's column offset and follow inner.f's output order
    let unfold_span: usize = inner_rhs.col_layout().dims().iter().sum();
    let f_out_cols: Vec<usize> = (entry_col_off..entry_col_off + unfold_span).collect();
    let total_rows_ext = base_rows + w_r;
    let total_cols_ext = base_cols + w_c;
    let e_new = scatter(&inner.e, &row_slots, &row_slots, total_rows_ext, total_rows_ext)?;
    let f_new = scatter(&inner.f, &f_out_cols, &f_in_cols, total_cols_ext, total_cols_ext)?;

    let excluded = bof.excluded_points()?;
    EquivalenceCertificate::new(
        bof.clone(),
        rhs,
        inner.w_s.clone(),
        None,
        e_new,
        f_new,
        excluded.union(&inner.excluded),
        if w_r == 0 && w_c == 0 {
            ExtensionStructure::Direct
        } else {
            ExtensionStructure::Interleaved { lhs_rows, lhs_cols }
        },
        None,
        inner.w_s_det_degree,
        0,
    )
}

/// Embed a Schur plan into the two-by-two grid [S X; Y Z].
pub fn schur_embed(
    plan: &SchurLinearizationPlan,
    x: Entry,
    y: Entry,
    z: Entry,
) -> Result<EquivalenceCertificate> {
    let grid = two_by_two(plan.entry(), x, y, z)?;
    unfold_entry_at(&grid, 0, 0)
}

/// Embed a product plan into the two-by-two grid [M X; Y Z].
pub fn product_embed(
    plan: &ProductLinearizationPlan,
    x: Entry,
    y: Entry,
    z: Entry,
) -> Result<EquivalenceCertificate> {
    let grid = two_by_two(plan.entry(), x, y, z)?;
    if plan.factors.len() == 1 {
        // nothing to unfold: [M X; Y Z] is already the target, rewrite the
        // product entry as a polynomial
        return unfold_entry_at(&grid, 0, 0);
    }
    unfold_entry_at(&grid, 0, 0)
}

fn two_by_two(s: Entry, x: Entry, y: Entry, z: Entry) -> Result<BlockOperatorFunction> {
    BlockOperatorFunction::new(
        SpaceLayout::new(vec![s.row_dim(), z.row_dim()])?,
        SpaceLayout::new(vec![s.col_dim(), z.col_dim()])?,
        vec![vec![s, x], vec![y, z]],
    )
}
