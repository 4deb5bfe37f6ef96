use std::collections::BTreeMap;
use std::f64::consts::PI;

use faer::sparse::{SparseColMat, SymbolicSparseColMat};

use crate::error::{ArmError, Result};
use crate::operators::{HilbertDims, Operator, C64};

/// Hermiticity tolerance for Hamiltonians handed to the engine (GHz).
pub const HAMILTONIAN_HERMITIAN_TOL: f64 = 1e-12;

/// A jump operator with its rate in GHz (linear frequency).
#[derive(Debug, Clone, PartialEq)]
pub struct Collapse {
    pub op: Operator,
    pub rate: f64,
}

impl Collapse {
    pub fn new(op: Operator, rate: f64) -> Self {
        Self { op, rate }
    }
}

/// Lindblad generator on column-stacked density matrices, in 1/ns.
///
/// Storage is compressed sparse column with every diagonal entry present so
/// that shifted copies `L + s I` share one sparsity pattern.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    dims: HilbertDims,
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<C64>,
    diag_pos: Vec<usize>,
    dissipative: bool,
}

fn nonzeros(op: &Operator) -> Vec<(usize, usize, C64)> {
    op.matrix()
        .indexed_iter()
        .filter(|(_, z)| **z != C64::new(0.0, 0.0))
        .map(|((i, j), z)| (i, j, *z))
        .collect()
}

/// Sparse accumulator keyed by `(column, row)` so iteration is already in
/// compressed-column order.
struct Accumulator {
    entries: BTreeMap<(usize, usize), C64>,
}

impl Accumulator {
    fn add(&mut self, row: usize, col: usize, v: C64) {
        *self.entries.entry((col, row)).or_insert(C64::new(0.0, 0.0)) += v;
    }

    /// `+ c (I ⊗ A)`: left multiplication `A rho`.
    fn left(&mut self, a: &[(usize, usize, C64)], c: C64, d: usize) {
        for &(i, k, v) in a {
            for j in 0..d {
                self.add(i + d * j, k + d * j, c * v);
            }
        }
    }

    /// `+ c (B^T ⊗ I)`: right multiplication `rho B`.
    fn right(&mut self, b: &[(usize, usize, C64)], c: C64, d: usize) {
        for &(k, j, v) in b {
            for i in 0..d {
                self.add(i + d * j, i + d * k, c * v);
            }
        }
    }

    /// `+ c (conj(O) ⊗ O)`: the sandwich `O rho O^dag`.
    fn sandwich(&mut self, o: &[(usize, usize, C64)], c: C64, d: usize) {
        for &(i, k, u) in o {
            for &(j, l, w) in o {
                self.add(i + d * j, k + d * l, c * u * w.conj());
            }
        }
    }
}

/// Build `L vec(rho) = vec(-i 2pi [H, rho] + sum_k 2pi r_k D[O_k] rho)`.
pub fn build_liouvillian(h: &Operator, collapses: &[Collapse]) -> Result<Liouvillian> {
    let d = h.dim();
    if d < 4 || d % 2 != 0 {
        return Err(ArmError::DimensionMismatch {
            expected: 2 * (d / 2).max(2),
            actual: d,
        });
    }
    build_liouvillian_on(HilbertDims::new(d / 2 - 1)?, h, collapses)
}

/// As [`build_liouvillian`] with the composite dimensions given explicitly.
pub fn build_liouvillian_on(dims: HilbertDims, h: &Operator, collapses: &[Collapse]) -> Result<Liouvillian> {
    let d = dims.total_dim();
    if h.dim() != d {
        return Err(ArmError::DimensionMismatch {
            expected: d,
            actual: h.dim(),
        });
    }
    let defect = h.hermiticity_defect();
    if defect >= HAMILTONIAN_HERMITIAN_TOL {
        return Err(ArmError::NonHermitian { deviation: defect });
    }
    for c in collapses {
        if !c.rate.is_finite() {
            return Err(ArmError::InvalidParameter("collapse rate must be finite".into()));
        }
        if c.rate < 0.0 {
            return Err(ArmError::NegativeRate(c.rate));
        }
        if c.op.dim() != d {
            return Err(ArmError::DimensionMismatch {
                expected: d,
                actual: c.op.dim(),
            });
        }
    }

    let n = d * d;
    let mut acc = Accumulator {
        entries: BTreeMap::new(),
    };
    for k in 0..n {
        acc.add(k, k, C64::new(0.0, 0.0));
    }
    let two_pi = 2.0 * PI;
    let h_nz = nonzeros(h);
    acc.left(&h_nz, C64::new(0.0, -two_pi), d);
    acc.right(&h_nz, C64::new(0.0, two_pi), d);

    let mut dissipative = false;
    for c in collapses.iter().filter(|c| c.rate > 0.0) {
        let o_nz = nonzeros(&c.op);
        if o_nz.is_empty() {
            continue;
        }
        dissipative = true;
        let r = two_pi * c.rate;
        let odo = nonzeros(&(&c.op.adjoint() * &c.op));
        acc.sandwich(&o_nz, C64::new(r, 0.0), d);
        acc.left(&odo, C64::new(-0.5 * r, 0.0), d);
        acc.right(&odo, C64::new(-0.5 * r, 0.0), d);
    }

    let mut col_ptr = vec![0usize; n + 1];
    let mut row_idx = Vec::with_capacity(acc.entries.len());
    let mut values = Vec::with_capacity(acc.entries.len());
    let mut diag_pos = vec![0usize; n];
    for (&(col, row), &v) in &acc.entries {
        if row == col {
            diag_pos[col] = values.len();
        }
        row_idx.push(row);
        values.push(v);
        col_ptr[col + 1] = values.len();
    }
    Ok(Liouvillian {
        dims,
        n,
        col_ptr,
        row_idx,
        values,
        diag_pos,
        dissipative,
    })
}

impl Liouvillian {
    pub fn dims(&self) -> HilbertDims {
        self.dims
    }

    /// Side length `total_dim^2`.
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Whether any collapse channel has a positive rate.
    pub fn is_dissipative(&self) -> bool {
        self.dissipative
    }

    /// Entry `(row, col)`, zero when outside the pattern.
    pub fn get(&self, row: usize, col: usize) -> C64 {
        let range = self.col_ptr[col]..self.col_ptr[col + 1];
        match self.row_idx[range.clone()].binary_search(&row) {
            Ok(k) => self.values[range.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// `out = L x`.
    pub fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        self.apply_add(C64::new(1.0, 0.0), x, out);
    }

    /// `out += c L x`.
    pub fn apply_add(&self, c: C64, x: &[C64], out: &mut [C64]) {
        for col in 0..self.n {
            let xc = x[col];
            if xc == C64::new(0.0, 0.0) {
                continue;
            }
            let s = c * xc;
            for k in self.col_ptr[col]..self.col_ptr[col + 1] {
                out[self.row_idx[k]] += self.values[k] * s;
            }
        }
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.n];
        self.apply_into(x, &mut out);
        out
    }

    /// `max_j |sum_i L[i(d+1), j]|`: how far the trace functional is from a
    /// left null vector.
    pub fn trace_defect(&self) -> f64 {
        let d = self.dims.total_dim();
        (0..self.n)
            .map(|col| {
                (self.col_ptr[col]..self.col_ptr[col + 1])
                    .filter(|&k| self.row_idx[k] % (d + 1) == 0)
                    .map(|k| self.values[k])
                    .sum::<C64>()
                    .norm()
            })
            .fold(0.0, f64::max)
    }

    pub(crate) fn symbolic(&self) -> SymbolicSparseColMat<usize> {
        SymbolicSparseColMat::new_checked(self.n, self.n, self.col_ptr.clone(), None, self.row_idx.clone())
    }

    /// faer copy of `L + shift I`.
    pub fn to_sparse_shifted(&self, shift: C64) -> SparseColMat<usize, C64> {
        let mut values = self.values.clone();
        if shift != C64::new(0.0, 0.0) {
            for &p in &self.diag_pos {
                values[p] += shift;
            }
        }
        SparseColMat::new(self.symbolic(), values)
    }

    /// Dense copy, for small dimensions and tests.
    pub fn to_dense(&self) -> Operator {
        let mut m = Operator::zeros(self.n).into_matrix();
        for col in 0..self.n {
            for k in self.col_ptr[col]..self.col_ptr[col + 1] {
                m[[self.row_idx[k], col]] += self.values[k];
            }
        }
        Operator::from_array(m).expect("square")
    }

    /// `(row, value)` pairs of one column, rows ascending.
    pub fn column(&self, col: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        (self.col_ptr[col]..self.col_ptr[col + 1]).map(move |k| (self.row_idx[k], self.values[k]))
    }

    /// Iterate `(row, col, value)` in column-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.n).flat_map(move |col| {
            (self.col_ptr[col]..self.col_ptr[col + 1]).map(move |k| (self.row_idx[k], col, self.values[k]))
        })
    }
}
