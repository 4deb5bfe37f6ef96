//! Truncated bosonic and qubit operator algebra.
//!
//! The composite space is always ordered qubit first, resonator second. The
//! qubit basis is `{|g>, |e>}` and a composite basis state `|q, n>` has index
//! `q * (n_max + 1) + n`.
//!
//! Pauli convention: `sigma_z |g> = +|g>`, `sigma_+ |g> = |e>`, and
//! `sigma_+- = (sigma_x -+ i sigma_y) / 2`. With the qubit Hamiltonian
//! `-(omega_q / 2) sigma_z` the ground state sits at `-omega_q / 2`.

use std::ops::{Add, Mul, Neg, Sub};

use ndarray::{linalg::kron, Array2};
use num_complex::Complex64;

use crate::error::{ArmError, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Truncation of the qubit ⊗ resonator Hilbert space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HilbertDims {
    n_max: usize,
}

impl HilbertDims {
    pub const QUBIT_DIM: usize = 2;

    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(ArmError::InvalidTruncation(n_max));
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn resonator_dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn total_dim(&self) -> usize {
        Self::QUBIT_DIM * self.resonator_dim()
    }

    /// Composite index of `|qubit, fock>`; qubit 0 is `|g>`, 1 is `|e>`.
    pub fn index(&self, qubit: usize, fock: usize) -> usize {
        debug_assert!(qubit < 2 && fock <= self.n_max);
        qubit * self.resonator_dim() + fock
    }

    /// Inverse of [`HilbertDims::index`].
    pub fn split(&self, index: usize) -> (usize, usize) {
        (index / self.resonator_dim(), index % self.resonator_dim())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    Qubit,
    Resonator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliAxis {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

/// Dense complex square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    m: Array2<C64>,
}

impl Operator {
    pub fn from_array(m: Array2<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(ArmError::DimensionMismatch {
                expected: m.nrows(),
                actual: m.ncols(),
            });
        }
        Ok(Self { m })
    }

    pub fn from_fn(dim: usize, f: impl FnMut((usize, usize)) -> C64) -> Self {
        Self {
            m: Array2::from_shape_fn((dim, dim), f),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            m: Array2::zeros((dim, dim)),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: Array2::eye(dim),
        }
    }

    /// Diagonal operator with the given real entries.
    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Array2::zeros((values.len(), values.len()));
        for (i, &v) in values.iter().enumerate() {
            m[[i, i]] = C64::new(v, 0.0);
        }
        Self { m }
    }

    /// Projector `|i><j|` on a space of dimension `dim`.
    pub fn outer(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Array2::zeros((dim, dim));
        m[[i, j]] = ONE;
        Self { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.m
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.m[[row, col]]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            m: self.m.t().mapv(|z| z.conj()),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            m: self.m.t().to_owned(),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            m: &self.m * factor,
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    pub fn commutator(&self, other: &Operator) -> Self {
        self * other - other * self
    }

    pub fn anticommutator(&self, other: &Operator) -> Self {
        self * other + other * self
    }

    pub fn trace(&self) -> C64 {
        self.m.diag().sum()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        (self - other).max_abs()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |H - H^dag|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        let n = self.dim();
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.m[[i, j]] - self.m[[j, i]].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() < tol
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim();
        assert_eq!(v.len(), n);
        (0..n)
            .map(|i| (0..n).map(|j| self.m[[i, j]] * v[j]).sum())
            .collect()
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn mul(self, rhs: &'a Operator) -> Operator {
        Operator {
            m: self.m.dot(&rhs.m),
        }
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn add(self, rhs: &'a Operator) -> Operator {
        Operator {
            m: &self.m + &rhs.m,
        }
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn sub(self, rhs: &'a Operator) -> Operator {
        Operator {
            m: &self.m - &rhs.m,
        }
    }
}

impl Add for Operator {
    type Output = Operator;
    fn add(self, rhs: Operator) -> Operator {
        Operator { m: self.m + rhs.m }
    }
}

impl Sub for Operator {
    type Output = Operator;
    fn sub(self, rhs: Operator) -> Operator {
        Operator { m: self.m - rhs.m }
    }
}

impl Neg for Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator { m: -self.m }
    }
}

/// Truncated photon annihilation operator, `<n-1|a|n> = sqrt(n)`.
pub fn annihilation(n_max: usize) -> Result<Operator> {
    if n_max < 1 {
        return Err(ArmError::InvalidTruncation(n_max));
    }
    let dim = n_max + 1;
    let mut m = Array2::zeros((dim, dim));
    for n in 1..dim {
        m[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(Operator { m })
}

pub fn creation(n_max: usize) -> Result<Operator> {
    Ok(annihilation(n_max)?.adjoint())
}

/// Photon number `a^dag a`, stored as the exact diagonal `0, 1, ..., n_max`.
pub fn number(n_max: usize) -> Result<Operator> {
    if n_max < 1 {
        return Err(ArmError::InvalidTruncation(n_max));
    }
    let levels: Vec<f64> = (0..=n_max).map(|n| n as f64).collect();
    Ok(Operator::diagonal(&levels))
}

pub fn pauli(axis: PauliAxis) -> Operator {
    let z = ZERO;
    let o = ONE;
    let m = match axis {
        PauliAxis::X => [[z, o], [o, z]],
        PauliAxis::Y => [[z, -I], [I, z]],
        PauliAxis::Z => [[o, z], [z, -o]],
        // |e><g|: row e = 1, column g = 0
        PauliAxis::Plus => [[z, z], [o, z]],
        PauliAxis::Minus => [[z, o], [z, z]],
    };
    Operator {
        m: Array2::from_shape_fn((2, 2), |(i, j)| m[i][j]),
    }
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &Operator, b: &Operator) -> Operator {
    Operator {
        m: kron(&a.m, &b.m),
    }
}

/// Lift a single-subsystem operator onto the composite space.
pub fn embed(op: &Operator, subsystem: Subsystem, dims: HilbertDims) -> Result<Operator> {
    let expected = match subsystem {
        Subsystem::Qubit => HilbertDims::QUBIT_DIM,
        Subsystem::Resonator => dims.resonator_dim(),
    };
    if op.dim() != expected {
        return Err(ArmError::DimensionMismatch {
            expected,
            actual: op.dim(),
        });
    }
    Ok(match subsystem {
        Subsystem::Qubit => tensor(op, &Operator::identity(dims.resonator_dim())),
        Subsystem::Resonator => tensor(&Operator::identity(HilbertDims::QUBIT_DIM), op),
    })
}

/// Frequently used composite-space operators for one truncation.
#[derive(Debug, Clone)]
pub struct CompositeOps {
    pub dims: HilbertDims,
    pub a: Operator,
    pub a_dag: Operator,
    pub n_photon: Operator,
    pub sigma_x: Operator,
    pub sigma_y: Operator,
    pub sigma_z: Operator,
    pub sigma_plus: Operator,
    pub sigma_minus: Operator,
    /// `sigma_+ sigma_-`, the excited-state projector.
    pub excited: Operator,
}

impl CompositeOps {
    pub fn new(dims: HilbertDims) -> Self {
        let a_res = annihilation(dims.n_max()).expect("HilbertDims guarantees n_max >= 1");
        let lift_q = |axis| embed(&pauli(axis), Subsystem::Qubit, dims).expect("qubit dim");
        let a = embed(&a_res, Subsystem::Resonator, dims).expect("resonator dim");
        let a_dag = a.adjoint();
        let n_photon = embed(&number(dims.n_max()).expect("n_max >= 1"), Subsystem::Resonator, dims)
            .expect("resonator dim");
        let sigma_plus = lift_q(PauliAxis::Plus);
        let sigma_minus = lift_q(PauliAxis::Minus);
        let excited = &sigma_plus * &sigma_minus;
        Self {
            dims,
            a,
            a_dag,
            n_photon,
            sigma_x: lift_q(PauliAxis::X),
            sigma_y: lift_q(PauliAxis::Y),
            sigma_z: lift_q(PauliAxis::Z),
            sigma_plus,
            sigma_minus,
            excited,
        }
    }
}
