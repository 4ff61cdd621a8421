//! Dense Hermitian operator calculus.
//!
//! Spectral decomposition, spectral projections `{A > 0}` (the projection
//! onto the direct sum of eigenspaces with positive eigenvalue, and the
//! `>=`/`<`/`<=` variants), generalized inverses of nonnegative operators,
//! eigenbasis matrix functions, and tensor / direct-sum assembly.
//!
//! Operators are plain dense complex matrices; everything here is value
//! semantics with no shared mutable state.

use nalgebra::{Complex, DMatrix};

use crate::config::Tolerances;
use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;

/// Which eigenvalues a spectral projection keeps, relative to a threshold.
///
/// Eigenvalues within the `threshold_band` tolerance of the threshold count
/// as sitting exactly on it: `Greater` excludes them, `GreaterEq` includes
/// them, and symmetrically for `Less`/`LessEq`. The band only affects which
/// side of `{A > 0}` vs `{A >= 0}` a numerically-zero eigenvalue lands on;
/// the defined quantities do not depend on that choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparator {
    Greater,
    GreaterEq,
    Less,
    LessEq,
}

impl Comparator {
    /// Whether an eigenvalue `lambda` passes the comparison with `threshold`.
    pub fn admits(self, lambda: f64, threshold: f64, band: f64) -> bool {
        let d = lambda - threshold;
        match self {
            Comparator::Greater => d > band,
            Comparator::GreaterEq => d >= -band,
            Comparator::Less => d < -band,
            Comparator::LessEq => d <= band,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Greater => ">",
            Comparator::GreaterEq => ">=",
            Comparator::Less => "<",
            Comparator::LessEq => "<=",
        }
    }
}

/// A dense Hermitian operator on a finite-dimensional Hilbert space.
///
/// The constructor enforces `A = A*` up to tolerance and then stores the
/// exact Hermitian part `(A + A*)/2`, so downstream spectral calculus always
/// sees an exactly self-adjoint matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    mat: CMat,
}

impl HermitianOperator {
    pub fn new(mat: CMat) -> Result<Self> {
        Self::new_with(mat, &Tolerances::default())
    }

    pub fn new_with(mat: CMat, tol: &Tolerances) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        if mat.is_empty() {
            return Err(Error::EmptyInput("operator of dimension 0"));
        }
        let defect = hermitian_defect(&mat);
        if defect > tol.hermitian {
            return Err(Error::NotHermitian { defect });
        }
        Ok(Self::hermitian_part(mat))
    }

    /// Builds from entries in row-major order.
    pub fn from_row_major(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                left: entries.len(),
                right: dim * dim,
            });
        }
        Self::new(CMat::from_row_slice(dim, dim, entries))
    }

    /// Builds from real entries in row-major order.
    pub fn from_real_row_major(dim: usize, entries: &[f64]) -> Result<Self> {
        let data: Vec<C64> = entries.iter().map(|&x| Complex::new(x, 0.0)).collect();
        Self::from_row_major(dim, &data)
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut mat = CMat::zeros(dim, dim);
        for (i, &d) in diag.iter().enumerate() {
            mat[(i, i)] = Complex::new(d, 0.0);
        }
        Self { mat }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: CMat::identity(dim, dim),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            mat: CMat::zeros(dim, dim),
        }
    }

    /// Takes the exact Hermitian part `(A + A*)/2` without validation.
    pub fn hermitian_part(mat: CMat) -> Self {
        let herm = (&mat + mat.adjoint()).scale(0.5);
        Self { mat: herm }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            mat: self.mat.scale(s),
        }
    }

    /// `self * other * self`; Hermitian whenever both factors are.
    pub fn sandwich(&self, middle: &Self) -> Self {
        let prod = &self.mat * &middle.mat * &self.mat;
        Self::hermitian_part(prod)
    }

    /// Spectral decomposition with eigenvalues sorted ascending.
    ///
    /// The basis chosen inside a degenerate eigenspace is whatever the
    /// eigensolver returns; consumers must only rely on spectral projections,
    /// which are basis-independent.
    pub fn spectral_decompose(&self) -> SpectralDecomposition {
        let se = self.mat.clone().symmetric_eigen();
        let dim = self.dim();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));

        let eigenvalues: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
        let mut eigenvectors = CMat::zeros(dim, dim);
        for (col, &src) in order.iter().enumerate() {
            eigenvectors.set_column(col, &se.eigenvectors.column(src));
        }
        SpectralDecomposition {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.spectral_decompose().eigenvalues
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Operator norm (largest |eigenvalue|).
    pub fn operator_norm(&self) -> f64 {
        let ev = self.eigenvalues();
        ev[0].abs().max(ev[ev.len() - 1].abs())
    }

    /// Orthogonal projection onto the span of eigenspaces whose eigenvalue
    /// passes `cmp threshold`. Composing two calls yields band projections
    /// such as `{alpha < A < beta}`.
    pub fn spectral_projection(&self, cmp: Comparator, threshold: f64) -> Self {
        self.spectral_projection_with(cmp, threshold, &Tolerances::default())
    }

    pub fn spectral_projection_with(
        &self,
        cmp: Comparator,
        threshold: f64,
        tol: &Tolerances,
    ) -> Self {
        self.spectral_decompose()
            .projection_where(|l| cmp.admits(l, threshold, tol.threshold_band))
    }

    /// Generalized inverse of a nonnegative operator: inverse on the range,
    /// zero on the kernel, so that `A A^-1 = A^-1 A = P_A`.
    pub fn generalized_inverse(&self) -> Result<Self> {
        self.generalized_inverse_with(&Tolerances::default())
    }

    pub fn generalized_inverse_with(&self, tol: &Tolerances) -> Result<Self> {
        let dec = self.psd_decomposition(tol)?;
        let cutoff = dec.rank_cutoff(tol);
        Ok(dec.apply(|l| if l > cutoff { 1.0 / l } else { 0.0 }))
    }

    /// Generalized inverse square root: eigenvalue map `l -> l^(-1/2)` on the
    /// range, zero on the kernel.
    pub fn inv_sqrt(&self) -> Result<Self> {
        self.inv_sqrt_with(&Tolerances::default())
    }

    pub fn inv_sqrt_with(&self, tol: &Tolerances) -> Result<Self> {
        let dec = self.psd_decomposition(tol)?;
        let cutoff = dec.rank_cutoff(tol);
        Ok(dec.apply(|l| if l > cutoff { 1.0 / l.sqrt() } else { 0.0 }))
    }

    /// Matrix logarithm; requires a strictly positive spectrum.
    pub fn log(&self) -> Result<Self> {
        self.log_with(&Tolerances::default())
    }

    pub fn log_with(&self, tol: &Tolerances) -> Result<Self> {
        let dec = self.spectral_decompose();
        let cutoff = dec.rank_cutoff(tol);
        let min = dec.eigenvalues[0];
        if min <= cutoff {
            return Err(Error::SingularLog {
                min_eigenvalue: min,
            });
        }
        Ok(dec.apply(f64::ln))
    }

    /// Matrix power on a PSD operator. Negative exponents follow the
    /// generalized-inverse convention: eigenvalues at numerical zero map to
    /// zero. `t = 0` yields the support projection.
    pub fn power(&self, t: f64) -> Result<Self> {
        self.power_with(t, &Tolerances::default())
    }

    pub fn power_with(&self, t: f64, tol: &Tolerances) -> Result<Self> {
        let dec = self.psd_decomposition(tol)?;
        let cutoff = dec.rank_cutoff(tol);
        Ok(dec.apply(|l| if l > cutoff { l.powf(t) } else { 0.0 }))
    }

    /// Matrix exponential of a Hermitian operator.
    pub fn exp(&self) -> Self {
        self.spectral_decompose().apply(f64::exp)
    }

    /// Projection onto the range of a PSD operator.
    pub fn support_projection(&self) -> Result<Self> {
        self.power(0.0)
    }

    /// Kronecker (tensor) product.
    pub fn kron(&self, other: &Self) -> Self {
        Self {
            mat: self.mat.kronecker(&other.mat),
        }
    }

    /// `n`-fold tensor power, guarded by the dimension bound.
    pub fn tensor_power(&self, n: usize, tol: &Tolerances) -> Result<Self> {
        if n == 0 {
            return Ok(Self::identity(1));
        }
        let dim = (self.dim() as u128).checked_pow(n as u32).ok_or(
            Error::DimensionBound {
                required: u128::MAX,
                bound: tol.max_dim,
            },
        )?;
        tol.check_dim(dim)?;
        let mut out = self.clone();
        for _ in 1..n {
            out = out.kron(self);
        }
        Ok(out)
    }

    /// Checks the spectrum lies in `[-tol.psd, +inf)` and returns the
    /// decomposition, with negative roundoff clamped to zero.
    fn psd_decomposition(&self, tol: &Tolerances) -> Result<SpectralDecomposition> {
        let mut dec = self.spectral_decompose();
        let min = dec.eigenvalues[0];
        if min < -tol.psd {
            return Err(Error::NotPsd {
                min_eigenvalue: min,
            });
        }
        for l in &mut dec.eigenvalues {
            if *l < 0.0 {
                *l = 0.0;
            }
        }
        Ok(dec)
    }
}

impl std::ops::Add for &HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: &HermitianOperator) -> HermitianOperator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        HermitianOperator {
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl std::ops::Sub for &HermitianOperator {
    type Output = HermitianOperator;
    fn sub(self, rhs: &HermitianOperator) -> HermitianOperator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        HermitianOperator {
            mat: &self.mat - &rhs.mat,
        }
    }
}

/// Eigenvalues (ascending) and an orthonormal eigenbasis.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Columns are the eigenvectors, in eigenvalue order.
    pub eigenvectors: CMat,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Relative zero cutoff for rank decisions on this spectrum.
    pub fn rank_cutoff(&self, tol: &Tolerances) -> f64 {
        let scale = self
            .eigenvalues
            .iter()
            .fold(0.0f64, |m, &l| m.max(l.abs()));
        tol.rank_cutoff * scale
    }

    /// Applies `f` to the spectrum: `sum_i f(lambda_i) v_i v_i*`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> HermitianOperator {
        self.apply_indexed(|_, l| f(l))
    }

    /// Like [`Self::apply`] but `f` also sees the eigenvalue index
    /// (ascending order), for selections that are not functions of the
    /// eigenvalue alone.
    pub fn apply_indexed(&self, f: impl Fn(usize, f64) -> f64) -> HermitianOperator {
        let dim = self.dim();
        let diag: Vec<C64> = self
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(i, &l)| Complex::new(f(i, l), 0.0))
            .collect();
        let mut scaled = self.eigenvectors.clone();
        for (col, d) in diag.iter().enumerate() {
            let mut c = scaled.column_mut(col);
            for i in 0..dim {
                c[i] *= d;
            }
        }
        HermitianOperator::hermitian_part(scaled * self.eigenvectors.adjoint())
    }

    /// Orthogonal projection onto the eigenspaces selected by `keep`.
    pub fn projection_where(&self, keep: impl Fn(f64) -> bool) -> HermitianOperator {
        self.apply(|l| if keep(l) { 1.0 } else { 0.0 })
    }

    /// Projection onto the eigenvectors at the given (ascending-order)
    /// indices.
    pub fn projection_of_indices(&self, keep: &[bool]) -> HermitianOperator {
        self.apply_indexed(|i, _| if keep.get(i).copied().unwrap_or(false) { 1.0 } else { 0.0 })
    }

    /// Rebuilds the original operator.
    pub fn reconstruct(&self) -> HermitianOperator {
        self.apply(|l| l)
    }
}

/// A density matrix: PSD Hermitian operator of unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        Self::new_with(op, &Tolerances::default())
    }

    pub fn new_with(op: HermitianOperator, tol: &Tolerances) -> Result<Self> {
        let min = op.min_eigenvalue();
        if min < -tol.psd {
            return Err(Error::NotPsd {
                min_eigenvalue: min,
            });
        }
        let trace = op.trace();
        if (trace - 1.0).abs() > tol.trace_one {
            return Err(Error::TraceNotOne { trace });
        }
        Ok(Self { op })
    }

    pub fn from_row_major(dim: usize, entries: &[C64]) -> Result<Self> {
        Self::new(HermitianOperator::from_row_major(dim, entries)?)
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(HermitianOperator::from_diagonal(diag))
    }

    /// Pure state `|psi><psi|` from an (unnormalized) state vector.
    pub fn from_pure(amplitudes: &[C64]) -> Result<Self> {
        let norm2: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if norm2 <= 0.0 {
            return Err(Error::EmptyInput("zero state vector"));
        }
        let dim = amplitudes.len();
        let mut mat = CMat::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                mat[(i, j)] = amplitudes[i] * amplitudes[j].conj() / norm2;
            }
        }
        Self::new(HermitianOperator { mat })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            op: HermitianOperator::identity(dim).scale(1.0 / dim as f64),
        }
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn into_op(self) -> HermitianOperator {
        self.op
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            op: self.op.kron(&other.op),
        }
    }

    pub fn tensor_power(&self, n: usize, tol: &Tolerances) -> Result<Self> {
        Ok(Self {
            op: self.op.tensor_power(n, tol)?,
        })
    }
}

impl std::ops::Deref for DensityMatrix {
    type Target = HermitianOperator;
    fn deref(&self) -> &HermitianOperator {
        &self.op
    }
}

/// Block-diagonal direct sum.
pub fn direct_sum(blocks: &[&HermitianOperator]) -> Result<HermitianOperator> {
    if blocks.is_empty() {
        return Err(Error::EmptyInput("direct sum of zero blocks"));
    }
    let total: usize = blocks.iter().map(|b| b.dim()).sum();
    let mut mat = CMat::zeros(total, total);
    let mut off = 0;
    for b in blocks {
        let d = b.dim();
        mat.view_mut((off, off), (d, d)).copy_from(b.matrix());
        off += d;
    }
    Ok(HermitianOperator { mat })
}

/// `Re Tr[AB]` for Hermitian `A`, `B`; the imaginary part must vanish.
pub fn trace_product(a: &HermitianOperator, b: &HermitianOperator) -> f64 {
    assert_eq!(a.dim(), b.dim(), "operator dimension mismatch");
    let mut re = 0.0;
    let mut im = 0.0;
    let (am, bm) = (a.matrix(), b.matrix());
    for i in 0..a.dim() {
        for j in 0..a.dim() {
            let z = am[(i, j)] * bm[(j, i)];
            re += z.re;
            im += z.im;
        }
    }
    assert!(
        im.abs() < 1e-9 * re.abs().max(1.0),
        "trace product has imaginary part {im:e}"
    );
    re
}

fn hermitian_defect(mat: &CMat) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..mat.nrows() {
        for j in i..mat.ncols() {
            let d = (mat[(i, j)] - mat[(j, i)].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}
