//! Dense complex-matrix kernel.
//!
//! Everything downstream works with [`MatrixOp`] values: dense complex
//! matrices read as operators from `C^cols` to `C^rows`. This module
//! provides the handful of primitives the completion solvers and chain
//! builders need: the operator (spectral) norm, PSD square roots and defect
//! operators, tolerance-aware pseudoinverses, the PSD order, block
//! assembly, and orthonormal subspace bases.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

/// Complex scalar used throughout.
pub type Scalar = Complex<f64>;

/// Dense complex matrix, read as an operator `C^cols -> C^rows`.
pub type MatrixOp = DMatrix<Scalar>;

/// Shorthand for a complex scalar.
#[inline]
pub fn c(re: f64, im: f64) -> Scalar {
    Complex::new(re, im)
}

/// Shorthand for a real scalar embedded in `C`.
#[inline]
pub fn cr(re: f64) -> Scalar {
    Complex::new(re, 0.0)
}

/// Which defect operator of a contraction to form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `D_T = (I - T*T)^{1/2}`, acting on the domain.
    Right,
    /// `D_{T*} = (I - TT*)^{1/2}`, acting on the codomain.
    Left,
}

/// Numerical tolerances threaded through every solver.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    /// Relative singular-value cutoff: singular values below
    /// `rank_tol * sigma_max` are treated as exact zeros.
    pub rank_tol: f64,
    /// Allowed negative-eigenvalue slack when deciding PSD questions;
    /// eigenvalues in `[-psd_tol, 0]` are clamped to zero.
    pub psd_tol: f64,
    /// Largest acceptable identity residual in operator norm.
    pub residual_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank_tol: 1e-10,
            psd_tol: 1e-10,
            residual_tol: 1e-8,
        }
    }
}

impl Tolerances {
    /// Checks that all three tolerances lie strictly between 0 and 1.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rank_tol", self.rank_tol),
            ("psd_tol", self.psd_tol),
            ("residual_tol", self.residual_tol),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidTolerances(format!(
                    "{name} = {v} must lie strictly between 0 and 1"
                )));
            }
        }
        Ok(())
    }
}

/// Returns an error unless every entry of `m` is finite.
pub fn check_finite(m: &MatrixOp) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteEntries)
    }
}

const EIGEN_MAX_ITER: usize = 10_000;

/// Eigendecomposition of a Hermitian matrix; the input is hermitized first.
/// Returns `(eigenvalues, eigenvectors)` with real eigenvalues.
pub(crate) fn hermitian_eigen(m: &MatrixOp) -> Result<(Vec<f64>, MatrixOp)> {
    let h = (m + m.adjoint()).scale(0.5);
    let eig = h
        .try_symmetric_eigen(f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or(Error::ConvergenceFailure {
            algorithm: "Hermitian eigendecomposition",
        })?;
    Ok((eig.eigenvalues.as_slice().to_vec(), eig.eigenvectors))
}

/// Thin SVD `A = U diag(σ) V^*` via one-sided Jacobi rotations.
///
/// Returns `(U, σ, V^*)` with `U: m×k`, `V^*: k×n`, `k = min(m, n)` and the
/// singular values sorted in descending order. Columns of `U` belonging to
/// exactly zero singular values are zero. Jacobi is slower than bidiagonal
/// reduction but unconditionally pairs the factors correctly, including on
/// rank-deficient complex input.
pub fn svd(m: &MatrixOp) -> Result<(MatrixOp, Vec<f64>, MatrixOp)> {
    if m.nrows() < m.ncols() {
        let (u, sigma, v_t) = svd(&m.adjoint())?;
        return Ok((v_t.adjoint(), sigma, u.adjoint()));
    }
    let rows = m.nrows();
    let n = m.ncols();
    if rows == 0 || n == 0 {
        return Ok((m.clone(), Vec::new(), MatrixOp::zeros(n, n)));
    }
    let mut b = m.clone();
    let mut v = MatrixOp::identity(n, n);
    let eps = f64::EPSILON;
    // The Frobenius norm is invariant under the right-unitary sweeps, so it
    // gives a fixed deflation threshold for numerically zero columns.
    let deflate_sq = (eps * b.norm()).powi(2);
    let max_sweeps = 128;
    let mut converged = false;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut app = 0.0f64;
                let mut aqq = 0.0f64;
                let mut apq = cr(0.0);
                for i in 0..rows {
                    let bp = b[(i, p)];
                    let bq = b[(i, q)];
                    app += bp.norm_sqr();
                    aqq += bq.norm_sqr();
                    apq += bp.conj() * bq;
                }
                if app <= deflate_sq || aqq <= deflate_sq {
                    continue;
                }
                let off = apq.norm();
                if off <= eps * (app * aqq).sqrt() || off == 0.0 {
                    continue;
                }
                rotated = true;
                // Phase-align the off-diagonal gram entry, then apply the
                // classic real Jacobi rotation.
                let phase_conj = (apq / cr(off)).conj();
                let tau = (aqq - app) / (2.0 * off);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c0 = 1.0 / (1.0 + t * t).sqrt();
                let s0 = c0 * t;
                let ms = phase_conj * cr(s0);
                let mc = phase_conj * cr(c0);
                for i in 0..rows {
                    let bp = b[(i, p)];
                    let bq = b[(i, q)];
                    b[(i, p)] = bp * cr(c0) - bq * ms;
                    b[(i, q)] = bp * cr(s0) + bq * mc;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = vp * cr(c0) - vq * ms;
                    v[(i, q)] = vp * cr(s0) + vq * mc;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::ConvergenceFailure {
            algorithm: "Jacobi SVD",
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    let sigma_unsorted: Vec<f64> = (0..n).map(|j| b.column(j).norm()).collect();
    order.sort_by(|&i, &j| sigma_unsorted[j].total_cmp(&sigma_unsorted[i]));
    let mut u = MatrixOp::zeros(rows, n);
    let mut v_t = MatrixOp::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let s = sigma_unsorted[src];
        sigma.push(s);
        if s > 0.0 {
            for i in 0..rows {
                u[(i, dst)] = b[(i, src)] / cr(s);
            }
        }
        for i in 0..n {
            v_t[(dst, i)] = v[(i, src)].conj();
        }
    }
    Ok((u, sigma, v_t))
}

/// Largest singular value of `m`; zero for empty matrices.
///
/// Computed as the square root of the top eigenvalue of the smaller Gram
/// matrix; the top of the Gram spectrum is perfectly conditioned, so this
/// matches a full SVD to machine precision at a fraction of the cost.
pub fn operator_norm(m: &MatrixOp) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let gram = if m.ncols() <= m.nrows() {
        m.adjoint() * m
    } else {
        m * m.adjoint()
    };
    let (vals, _) = hermitian_eigen(&gram)
        .expect("Hermitian eigendecomposition did not converge computing an operator norm");
    vals.iter().cloned().fold(0.0f64, f64::max).max(0.0).sqrt()
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &MatrixOp) -> Result<f64> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "min eigenvalue of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    let (vals, _) = hermitian_eigen(m)?;
    Ok(vals.iter().cloned().fold(f64::INFINITY, f64::min))
}

fn hermitian_defect(m: &MatrixOp) -> f64 {
    operator_norm(&(m - m.adjoint()))
}

/// Hermitian PSD square root with eigenvalue clamping.
///
/// Eigenvalues in `[-psd_tol, 0]` are treated as exact zeros; anything more
/// negative is an error. The result `Q` is Hermitian PSD with
/// `||Q*Q - P|| <= residual_tol * (1 + ||P||)`.
pub fn psd_sqrt(p: &MatrixOp, tol: &Tolerances) -> Result<MatrixOp> {
    check_finite(p)?;
    if p.nrows() != p.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "psd_sqrt of a {}x{} matrix",
            p.nrows(),
            p.ncols()
        )));
    }
    let defect = hermitian_defect(p);
    if defect > tol.residual_tol {
        return Err(Error::NotHermitian {
            defect,
            tol: tol.residual_tol,
        });
    }
    psd_sqrt_clamped(p, tol.psd_tol)
}

/// Square root with an explicit clamping floor; eigenvalues below `-floor`
/// are rejected, eigenvalues in `[-floor, 0]` become zero.
fn psd_sqrt_clamped(p: &MatrixOp, floor: f64) -> Result<MatrixOp> {
    if p.nrows() == 0 {
        return Ok(p.clone());
    }
    let (vals, vecs) = hermitian_eigen(p)?;
    let min_eig = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_eig < -floor {
        return Err(Error::NotPsd { min_eig });
    }
    let roots: Vec<f64> = vals.iter().map(|&l| l.max(0.0).sqrt()).collect();
    Ok(rescale_columns(&vecs, &roots))
}

/// `vecs * diag(weights) * vecs^*`, hermitized.
fn rescale_columns(vecs: &MatrixOp, weights: &[f64]) -> MatrixOp {
    let mut scaled = vecs.clone();
    for (j, &w) in weights.iter().enumerate() {
        scaled.column_mut(j).scale_mut(w);
    }
    let q = &scaled * vecs.adjoint();
    (&q + q.adjoint()).scale(0.5)
}

/// Defect operator of a contraction: `D_T = (I - T*T)^{1/2}` (right) or
/// `D_{T*} = (I - TT*)^{1/2}` (left).
pub fn defect(t: &MatrixOp, side: Side, tol: &Tolerances) -> Result<MatrixOp> {
    check_finite(t)?;
    let norm = operator_norm(t);
    if norm > 1.0 + tol.psd_tol {
        return Err(Error::NotContraction { norm });
    }
    let gram = match side {
        Side::Right => {
            let n = t.ncols();
            MatrixOp::identity(n, n) - t.adjoint() * t
        }
        Side::Left => {
            let n = t.nrows();
            MatrixOp::identity(n, n) - t * t.adjoint()
        }
    };
    // The contraction check already bounds how negative the spectrum can be;
    // whatever negativity remains is roundoff, so clamp it all.
    psd_sqrt_clamped(&gram, f64::INFINITY)
}

/// Moore-Penrose pseudoinverse with a relative rank cutoff: singular values
/// below `rank_tol * sigma_max` count as exact zeros.
pub fn pinv(m: &MatrixOp, tol: &Tolerances) -> Result<MatrixOp> {
    check_finite(m)?;
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(MatrixOp::zeros(m.ncols(), m.nrows()));
    }
    let (u, sigma, v_t) = svd(m)?;
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let cutoff = tol.rank_tol * smax;
    let inverted: Vec<Scalar> = sigma
        .iter()
        .map(|&s| if s > cutoff && s > 0.0 { cr(1.0 / s) } else { cr(0.0) })
        .collect();
    // pinv = V * diag(1/sigma) * U^*
    let mut vt_scaled = v_t;
    for (i, w) in inverted.iter().enumerate() {
        vt_scaled.row_mut(i).scale_mut(w.re);
    }
    Ok(vt_scaled.adjoint() * u.adjoint())
}

/// PSD order test: does `A <= B` hold for Hermitian `A`, `B`, up to
/// `psd_tol` slack on the smallest eigenvalue of `B - A`?
pub fn psd_leq(a: &MatrixOp, b: &MatrixOp, tol: &Tolerances) -> Result<bool> {
    check_finite(a)?;
    check_finite(b)?;
    if a.shape() != b.shape() || a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "psd order between {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    for (name, m) in [("left", a), ("right", b)] {
        let defect = hermitian_defect(m);
        if defect > tol.residual_tol {
            let _ = name;
            return Err(Error::NotHermitian {
                defect,
                tol: tol.residual_tol,
            });
        }
    }
    let min_eig = min_eigenvalue(&(b - a))?;
    Ok(min_eig >= -tol.psd_tol)
}

/// One cell of a block grid: a matrix or a zero placeholder whose size is
/// inferred from its row and column.
#[derive(Clone, Copy)]
pub enum Block<'a> {
    Mat(&'a MatrixOp),
    Zero,
}

/// Assembles a rectangular grid of blocks into one matrix.
///
/// Every grid row must have the same number of cells; each block row and
/// block column must contain at least one concrete matrix to fix its size,
/// and all concrete matrices must agree with the inferred sizes.
pub fn assemble_blocks(grid: &[Vec<Block<'_>>]) -> Result<MatrixOp> {
    if grid.is_empty() || grid[0].is_empty() {
        return Err(Error::DimensionMismatch("empty block grid".into()));
    }
    let ncols_grid = grid[0].len();
    if grid.iter().any(|row| row.len() != ncols_grid) {
        return Err(Error::DimensionMismatch(
            "ragged block grid: rows have different lengths".into(),
        ));
    }

    let mut row_sizes = vec![None; grid.len()];
    let mut col_sizes = vec![None; ncols_grid];
    for (i, row) in grid.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            if let Block::Mat(m) = cell {
                match row_sizes[i] {
                    None => row_sizes[i] = Some(m.nrows()),
                    Some(r) if r != m.nrows() => {
                        return Err(Error::DimensionMismatch(format!(
                            "block ({i},{j}) has {} rows, block row {i} has {r}",
                            m.nrows()
                        )))
                    }
                    _ => {}
                }
                match col_sizes[j] {
                    None => col_sizes[j] = Some(m.ncols()),
                    Some(c) if c != m.ncols() => {
                        return Err(Error::DimensionMismatch(format!(
                            "block ({i},{j}) has {} cols, block column {j} has {c}",
                            m.ncols()
                        )))
                    }
                    _ => {}
                }
            }
        }
    }
    let row_sizes: Vec<usize> = row_sizes
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            r.ok_or_else(|| {
                Error::DimensionMismatch(format!("block row {i} has no concrete matrix"))
            })
        })
        .collect::<Result<_>>()?;
    let col_sizes: Vec<usize> = col_sizes
        .into_iter()
        .enumerate()
        .map(|(j, c)| {
            c.ok_or_else(|| {
                Error::DimensionMismatch(format!("block column {j} has no concrete matrix"))
            })
        })
        .collect::<Result<_>>()?;

    let total_r: usize = row_sizes.iter().sum();
    let total_c: usize = col_sizes.iter().sum();
    let mut out = MatrixOp::zeros(total_r, total_c);
    let mut r0 = 0;
    for (i, row) in grid.iter().enumerate() {
        let mut c0 = 0;
        for (j, cell) in row.iter().enumerate() {
            if let Block::Mat(m) = cell {
                out.view_mut((r0, c0), (row_sizes[i], col_sizes[j]))
                    .copy_from(m);
            }
            c0 += col_sizes[j];
        }
        r0 += row_sizes[i];
    }
    Ok(out)
}

/// Extracts block `(i, j)` from a matrix partitioned by the given block
/// sizes. Entries are copied verbatim, so assemble/extract round-trips are
/// bit-exact.
pub fn extract_block(
    m: &MatrixOp,
    row_sizes: &[usize],
    col_sizes: &[usize],
    i: usize,
    j: usize,
) -> Result<MatrixOp> {
    let total_r: usize = row_sizes.iter().sum();
    let total_c: usize = col_sizes.iter().sum();
    if total_r != m.nrows() || total_c != m.ncols() || i >= row_sizes.len() || j >= col_sizes.len()
    {
        return Err(Error::DimensionMismatch(format!(
            "block ({i},{j}) of a {}x{} matrix with row sizes {row_sizes:?}, col sizes {col_sizes:?}",
            m.nrows(),
            m.ncols()
        )));
    }
    let r0: usize = row_sizes[..i].iter().sum();
    let c0: usize = col_sizes[..j].iter().sum();
    Ok(m.view((r0, c0), (row_sizes[i], col_sizes[j])).into_owned())
}

/// Horizontal concatenation `[a | b]`.
pub fn hstack(a: &MatrixOp, b: &MatrixOp) -> Result<MatrixOp> {
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "hstack of {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let mut out = MatrixOp::zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    Ok(out)
}

/// Vertical concatenation `[a; b]`.
pub fn vstack(a: &MatrixOp, b: &MatrixOp) -> Result<MatrixOp> {
    if a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "vstack of {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let mut out = MatrixOp::zeros(a.nrows() + b.nrows(), a.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), 0), b.shape()).copy_from(b);
    Ok(out)
}

/// The isometry embedding `C^k` onto coordinates `offset..offset+k` of `C^n`.
pub fn selector(ambient: usize, offset: usize, k: usize) -> MatrixOp {
    let mut e = MatrixOp::zeros(ambient, k);
    for i in 0..k {
        e[(offset + i, i)] = cr(1.0);
    }
    e
}

/// A subspace of `C^ambient_dim`, stored as a matrix whose columns form an
/// orthonormal basis. Zero-dimensional subspaces are allowed.
#[derive(Debug, Clone)]
pub struct Subspace {
    ambient_dim: usize,
    basis: MatrixOp,
}

impl Subspace {
    /// Wraps an orthonormal basis, verifying `basis^* basis = I` within
    /// `residual_tol`.
    pub fn new(basis: MatrixOp, tol: &Tolerances) -> Result<Self> {
        check_finite(&basis)?;
        let k = basis.ncols();
        if k > 0 {
            let gram = basis.adjoint() * &basis;
            let defect = operator_norm(&(gram - MatrixOp::identity(k, k)));
            if defect > tol.residual_tol {
                return Err(Error::InvalidArgument(format!(
                    "subspace basis is not orthonormal: ||B*B - I|| = {defect:.3e}"
                )));
            }
        }
        Ok(Subspace {
            ambient_dim: basis.nrows(),
            basis,
        })
    }

    /// The whole space `C^n`.
    pub fn full(n: usize) -> Self {
        Subspace {
            ambient_dim: n,
            basis: MatrixOp::identity(n, n),
        }
    }

    /// The zero subspace of `C^n`.
    pub fn trivial(n: usize) -> Self {
        Subspace {
            ambient_dim: n,
            basis: MatrixOp::zeros(n, 0),
        }
    }

    /// Orthonormalizes the column span of `span`, dropping directions whose
    /// singular value falls below `rank_tol * sigma_max`.
    pub fn from_span(span: &MatrixOp, tol: &Tolerances) -> Result<Self> {
        check_finite(span)?;
        if span.ncols() == 0 || span.nrows() == 0 {
            return Ok(Subspace::trivial(span.nrows()));
        }
        let (u, sigma, _) = svd(span)?;
        let smax = sigma.iter().cloned().fold(0.0, f64::max);
        let cutoff = tol.rank_tol * smax;
        let rank = sigma.iter().filter(|&&s| s > cutoff && s > 0.0).count();
        Ok(Subspace {
            ambient_dim: span.nrows(),
            basis: u.view((0, 0), (span.nrows(), rank)).into_owned(),
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &MatrixOp {
        &self.basis
    }

    /// Orthogonal projection onto the subspace, as a matrix.
    pub fn projection(&self) -> MatrixOp {
        &self.basis * self.basis.adjoint()
    }

    /// Orthonormal basis of the orthogonal complement.
    ///
    /// Coordinate subspaces (bases that are exact 0/1 selectors) get exact
    /// selector complements; everything else goes through an eigenbasis of
    /// `I - BB^*`, whose spectrum is {0, 1}.
    pub fn complement(&self) -> Result<Subspace> {
        let n = self.ambient_dim;
        let k = self.dim();
        if k == 0 {
            return Ok(Subspace::full(n));
        }
        if k == n {
            return Ok(Subspace::trivial(n));
        }
        if let Some(cols) = self.selector_columns() {
            let mut comp = MatrixOp::zeros(n, n - k);
            let mut j = 0;
            for i in 0..n {
                if !cols.contains(&i) {
                    comp[(i, j)] = cr(1.0);
                    j += 1;
                }
            }
            return Ok(Subspace {
                ambient_dim: n,
                basis: comp,
            });
        }
        let residual = MatrixOp::identity(n, n) - self.projection();
        let (vals, vecs) = hermitian_eigen(&residual)?;
        let mut cols: Vec<usize> = (0..n).filter(|&i| vals[i] > 0.5).collect();
        cols.sort_unstable();
        let mut comp = MatrixOp::zeros(n, cols.len());
        for (j, &i) in cols.iter().enumerate() {
            comp.column_mut(j).copy_from(&vecs.column(i));
        }
        debug_assert_eq!(comp.ncols(), n - k);
        Ok(Subspace {
            ambient_dim: n,
            basis: comp,
        })
    }

    /// If the basis consists of exact standard unit vectors, returns the
    /// coordinates they hit.
    fn selector_columns(&self) -> Option<Vec<usize>> {
        let mut cols = Vec::with_capacity(self.dim());
        for j in 0..self.dim() {
            let mut hit = None;
            for i in 0..self.ambient_dim {
                let z = self.basis[(i, j)];
                if z == cr(1.0) {
                    if hit.is_some() {
                        return None;
                    }
                    hit = Some(i);
                } else if z != cr(0.0) {
                    return None;
                }
            }
            cols.push(hit?);
        }
        Some(cols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn randn(rng: &mut ChaCha8Rng) -> f64 {
        StandardNormal.sample(rng)
    }

    pub(crate) fn random_matrix(rng: &mut ChaCha8Rng, r: usize, cdim: usize) -> MatrixOp {
        MatrixOp::from_fn(r, cdim, |_, _| c(randn(rng), randn(rng)))
    }

    /// Power-iteration estimate of the largest singular value, independent
    /// of the SVD path.
    fn power_iteration_norm(m: &MatrixOp, iters: usize, rng: &mut ChaCha8Rng) -> f64 {
        let gram = m.adjoint() * m;
        let mut v = random_matrix(rng, m.ncols(), 1);
        v /= cr(v.norm());
        for _ in 0..iters {
            v = &gram * v;
            let n = v.norm();
            if n == 0.0 {
                return 0.0;
            }
            v /= cr(n);
        }
        (m * v).norm()
    }

    #[test]
    fn operator_norm_identity_and_single_entry() {
        let tol = Tolerances::default();
        let _ = tol;
        assert_eq!(operator_norm(&MatrixOp::identity(2, 2)), 1.0);
        let mut m = MatrixOp::zeros(2, 2);
        m[(1, 0)] = cr(0.25);
        assert!((operator_norm(&m) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn operator_norm_matches_power_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_matrix(&mut rng, 5, 3);
        let oracle = power_iteration_norm(&m, 2000, &mut rng);
        assert!((operator_norm(&m) - oracle).abs() < 1e-10);
    }

    #[test]
    fn psd_sqrt_diagonal_and_reconstruction() {
        let tol = Tolerances::default();
        let id = MatrixOp::identity(3, 3);
        assert!(operator_norm(&(psd_sqrt(&id, &tol).unwrap() - &id)) < 1e-14);

        let d = MatrixOp::from_diagonal(&nalgebra::DVector::from_vec(vec![cr(4.0), cr(9.0)]));
        let q = psd_sqrt(&d, &tol).unwrap();
        let expected =
            MatrixOp::from_diagonal(&nalgebra::DVector::from_vec(vec![cr(2.0), cr(3.0)]));
        assert!(operator_norm(&(q - expected)) < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_matrix(&mut rng, 4, 4);
        let p = &a * a.adjoint();
        let q = psd_sqrt(&p, &tol).unwrap();
        assert!(operator_norm(&(&q * &q - &p)) < 1e-9 * (1.0 + operator_norm(&p)));
    }

    #[test]
    fn psd_sqrt_rejects_non_psd_and_non_hermitian() {
        let tol = Tolerances::default();
        let neg = MatrixOp::from_diagonal(&nalgebra::DVector::from_vec(vec![cr(1.0), cr(-0.5)]));
        assert!(matches!(psd_sqrt(&neg, &tol), Err(Error::NotPsd { .. })));

        let mut skew = MatrixOp::zeros(2, 2);
        skew[(0, 1)] = cr(1.0);
        assert!(matches!(
            psd_sqrt(&skew, &tol),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn defect_examples() {
        let tol = Tolerances::default();
        let z = MatrixOp::zeros(3, 3);
        let d = defect(&z, Side::Right, &tol).unwrap();
        assert!(operator_norm(&(d - MatrixOp::identity(3, 3))) < 1e-14);

        let t = MatrixOp::from_element(1, 1, cr(0.5));
        let d = defect(&t, Side::Right, &tol).unwrap();
        assert!((d[(0, 0)].re - (3.0f64).sqrt() / 2.0).abs() < 1e-14);

        // Orthonormal columns: zero right defect.
        let mut iso = MatrixOp::zeros(3, 2);
        iso[(0, 0)] = cr(1.0);
        iso[(1, 1)] = cr(1.0);
        let d = defect(&iso, Side::Right, &tol).unwrap();
        assert!(operator_norm(&d) < 1e-12);

        let big = MatrixOp::from_element(1, 1, cr(1.5));
        assert!(matches!(
            defect(&big, Side::Right, &tol),
            Err(Error::NotContraction { .. })
        ));
    }

    #[test]
    fn defect_squares_to_gram_complement() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let raw = random_matrix(&mut rng, 4, 4);
            let t = &raw / cr(operator_norm(&raw).max(1.0));
            let d = defect(&t, Side::Right, &tol).unwrap();
            assert!(operator_norm(&d) <= 1.0 + 1e-12);
            let residual = &d * &d + t.adjoint() * &t - MatrixOp::identity(4, 4);
            assert!(operator_norm(&residual) < 1e-9);
        }
    }

    #[test]
    fn pinv_examples() {
        let tol = Tolerances::default();
        let id = MatrixOp::identity(3, 3);
        assert!(operator_norm(&(pinv(&id, &tol).unwrap() - &id)) < 1e-14);

        let d = MatrixOp::from_diagonal(&nalgebra::DVector::from_vec(vec![cr(2.0), cr(0.0)]));
        let p = pinv(&d, &tol).unwrap();
        let expected =
            MatrixOp::from_diagonal(&nalgebra::DVector::from_vec(vec![cr(0.5), cr(0.0)]));
        assert!(operator_norm(&(p - expected)) < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_matrix(&mut rng, 4, 4);
        let inv = m.clone().try_inverse().unwrap();
        assert!(operator_norm(&(pinv(&m, &tol).unwrap() - inv)) < 1e-9);
    }

    #[test]
    fn psd_leq_examples() {
        let tol = Tolerances::default();
        let z = MatrixOp::zeros(2, 2);
        let id = MatrixOp::identity(2, 2);
        assert!(psd_leq(&z, &id, &tol).unwrap());
        assert!(!psd_leq(&id, &z, &tol).unwrap());

        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let b = random_matrix(&mut rng, 3, 3);
        let a = &b * cr(0.5);
        assert!(psd_leq(&(&a * a.adjoint()), &(&b * b.adjoint()), &tol).unwrap());
    }

    #[test]
    fn assemble_and_extract_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let a = random_matrix(&mut rng, 2, 2);
        let b = random_matrix(&mut rng, 3, 3);

        let single = assemble_blocks(&[vec![Block::Mat(&a)]]).unwrap();
        assert_eq!(single, a);

        let diag = assemble_blocks(&[
            vec![Block::Mat(&a), Block::Zero],
            vec![Block::Zero, Block::Mat(&b)],
        ])
        .unwrap();
        let back = extract_block(&diag, &[2, 3], &[2, 3], 1, 1).unwrap();
        assert_eq!(back, b);
    }

    #[test]
    fn assemble_schaeffer_corner() {
        let tol = Tolerances::default();
        let t = MatrixOp::from_element(1, 1, cr(0.5));
        let d = defect(&t, Side::Right, &tol).unwrap();
        let v = assemble_blocks(&[
            vec![Block::Mat(&t), Block::Zero],
            vec![Block::Mat(&d), Block::Zero],
        ]);
        // Zero column with no concrete matrix cannot be sized.
        assert!(v.is_err());

        let z = MatrixOp::zeros(1, 1);
        let v = assemble_blocks(&[
            vec![Block::Mat(&t), Block::Mat(&z)],
            vec![Block::Mat(&d), Block::Zero],
        ])
        .unwrap();
        assert!((v[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((v[(1, 0)].re - (3.0f64).sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(v[(0, 1)], cr(0.0));
        assert_eq!(v[(1, 1)], cr(0.0));
    }

    #[test]
    fn assemble_rejects_inconsistent_blocks() {
        let a = MatrixOp::identity(2, 2);
        let b = MatrixOp::identity(3, 3);
        let out = assemble_blocks(&[vec![Block::Mat(&a), Block::Mat(&b)]]);
        assert!(matches!(out, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn subspace_complement_and_projection() {
        let tol = Tolerances::default();
        let s = Subspace::new(selector(4, 1, 2), &tol).unwrap();
        let comp = s.complement().unwrap();
        assert_eq!(comp.dim(), 2);
        let resolution = s.projection() + comp.projection();
        assert!(operator_norm(&(resolution - MatrixOp::identity(4, 4))) < 1e-12);

        // Non-selector basis goes through the eigen path.
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let span = random_matrix(&mut rng, 5, 2);
        let s = Subspace::from_span(&span, &tol).unwrap();
        assert_eq!(s.dim(), 2);
        let comp = s.complement().unwrap();
        assert_eq!(comp.dim(), 3);
        let resolution = s.projection() + comp.projection();
        assert!(operator_norm(&(resolution - MatrixOp::identity(5, 5))) < 1e-10);
    }

    #[test]
    fn jacobi_svd_reconstructs_rank_deficient_complex_matrices() {
        // Low-rank complex products are exactly the inputs on which a
        // mis-paired SVD shows up: check U diag(sigma) V* = A directly.
        let mut rng = ChaCha8Rng::seed_from_u64(4242);
        for round in 0..60 {
            let rank = 1 + round % 4;
            let m = random_matrix(&mut rng, 4, rank) * random_matrix(&mut rng, rank, 4);
            let (u, sigma, v_t) = svd(&m).unwrap();
            let mut us = u.clone();
            for (j, &s) in sigma.iter().enumerate() {
                us.column_mut(j).scale_mut(s);
            }
            let recon = us * &v_t;
            let scale = 1.0 + operator_norm(&m);
            assert!(operator_norm(&(recon - &m)) < 1e-13 * scale);
            // Descending order and orthonormal factors on the nonzero part.
            for w in sigma.windows(2) {
                assert!(w[0] >= w[1]);
            }
            let gram = v_t.adjoint() * &v_t;
            assert!(operator_norm(&(gram - MatrixOp::identity(4, 4))) < 1e-13);
        }
    }

    #[test]
    fn subspace_rank_cutoff_drops_dependent_columns() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let v = random_matrix(&mut rng, 4, 1);
        let doubled = hstack(&v, &(&v * cr(2.0))).unwrap();
        let s = Subspace::from_span(&doubled, &tol).unwrap();
        assert_eq!(s.dim(), 1);
    }
}
