//! Truncated dilations and co-extensions of a contraction.
//!
//! All builders return a [`DilationBundle`]: the dilation matrix together
//! with the chain bookkeeping needed by the lifting engines. Truncation
//! keeps one full copy of the base space per level, so block identities are
//! exact everywhere except the final block row or column, which carries the
//! truncation defect.

use crate::error::{Error, Result};
use crate::linalg::{
    self, cr, defect, operator_norm, selector, MatrixOp, Scalar, Side, Subspace, Tolerances,
};

/// Whether a bundle's operator is a truncated isometry, co-isometry, or
/// unitary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DilationKind {
    Isometric,
    CoIsometric,
    Unitary,
}

/// Block layout of a truncated chain space `H ⊕ D ⊕ D ⊕ …`.
///
/// Level `k` is the subspace spanned by the base block and the first `k`
/// defect blocks. Unitary bundles use `levels = 2N` with the future blocks
/// first and the past blocks after them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainSpace {
    pub base_dim: usize,
    pub block_dim: usize,
    pub levels: usize,
}

impl ChainSpace {
    pub fn total_dim(&self) -> usize {
        self.base_dim + self.levels * self.block_dim
    }

    /// Dimension of the chain subspace `K_k` (base plus `k` blocks).
    pub fn level_dim(&self, k: usize) -> usize {
        self.base_dim + k * self.block_dim
    }

    /// Orthogonal projection onto `K_k`, as a matrix on the full space.
    pub fn projection(&self, k: usize) -> MatrixOp {
        let total = self.total_dim();
        let mut p = MatrixOp::zeros(total, total);
        for i in 0..self.level_dim(k) {
            p[(i, i)] = cr(1.0);
        }
        p
    }

    /// Isometric embedding of `K_k` into the full space.
    pub fn embedding(&self, k: usize) -> MatrixOp {
        selector(self.total_dim(), 0, self.level_dim(k))
    }
}

/// A built dilation or extension: the operator, its chain space, its kind,
/// the contraction it dilates, and the scalar scale baked into the source.
#[derive(Debug, Clone)]
pub struct DilationBundle {
    pub op: MatrixOp,
    pub chain: ChainSpace,
    pub kind: DilationKind,
    /// The dilated contraction; the compression of `op` to the base block.
    pub source: MatrixOp,
    /// Recorded scalar for q-scaled bundles (`1` otherwise); for a q-scaled
    /// co-extension the unscaled operator is `op / q_scale`.
    pub q_scale: Scalar,
}

impl DilationBundle {
    /// Compression of the bundle operator to chain level `k` (the leading
    /// principal block of the matrix).
    pub fn level_op(&self, k: usize) -> MatrixOp {
        let d = self.chain.level_dim(k);
        self.op.view((0, 0), (d, d)).into_owned()
    }
}

fn require_square(t: &MatrixOp, what: &str) -> Result<usize> {
    if t.nrows() != t.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{what} requires a square matrix, got {}x{}",
            t.nrows(),
            t.ncols()
        )));
    }
    Ok(t.nrows())
}

/// Truncated Schaeffer isometric dilation of a contraction.
///
/// On `H ⊕ D_T^{⊕N}` the operator has `T` in the corner, `D_T` below it,
/// and identity couplings down the subdiagonal; the final block column is
/// zero. Lower-triangularity makes the compression identity
/// `P_H V^k|_H = T^k` exact for every `k`, and `V*V = I` holds on all but
/// the last block column.
pub fn schaeffer_isometric(
    t: &MatrixOp,
    n_levels: usize,
    tol: &Tolerances,
) -> Result<DilationBundle> {
    let n = require_square(t, "schaeffer_isometric")?;
    let d = defect(t, Side::Right, tol)?;
    let total = n * (n_levels + 1);
    let mut v = MatrixOp::zeros(total, total);
    v.view_mut((0, 0), (n, n)).copy_from(t);
    if n_levels >= 1 {
        v.view_mut((n, 0), (n, n)).copy_from(&d);
        for k in 1..n_levels {
            for i in 0..n {
                v[((k + 1) * n + i, k * n + i)] = cr(1.0);
            }
        }
    }
    Ok(DilationBundle {
        op: v,
        chain: ChainSpace {
            base_dim: n,
            block_dim: n,
            levels: n_levels,
        },
        kind: DilationKind::Isometric,
        source: t.clone(),
        q_scale: cr(1.0),
    })
}

/// Truncated minimal co-isometric extension: the adjoint of the Schaeffer
/// dilation of `T*`. The base space is invariant and the restriction to it
/// is exactly `T`; `VV* = I` holds off the final block row.
pub fn coisometric_extension(
    t: &MatrixOp,
    n_levels: usize,
    tol: &Tolerances,
) -> Result<DilationBundle> {
    let adj = schaeffer_isometric(&t.adjoint(), n_levels, tol)?;
    Ok(DilationBundle {
        op: adj.op.adjoint(),
        chain: adj.chain,
        kind: DilationKind::CoIsometric,
        source: t.clone(),
        q_scale: cr(1.0),
    })
}

/// Truncated minimal unitary dilation: a bilateral block shift with the
/// central coupling `[[T, D_{T*}], [D_T, -T*]]`, truncated to `N` blocks on
/// each side of the base space. Layout: base, then future blocks `E_1..E_N`
/// (fed by `D_T`), then past blocks `F_1..F_N` (feeding `D_{T*}`).
pub fn unitary_dilation(t: &MatrixOp, n_levels: usize, tol: &Tolerances) -> Result<DilationBundle> {
    let n = require_square(t, "unitary_dilation")?;
    let d_right = defect(t, Side::Right, tol)?;
    let d_left = defect(t, Side::Left, tol)?;
    let total = n * (2 * n_levels + 1);
    let e_off = |k: usize| k * n; // E_k at block k (E_0 = base)
    let f_off = |k: usize| (n_levels + k) * n; // F_k at block N + k
    let mut u = MatrixOp::zeros(total, total);
    u.view_mut((0, 0), (n, n)).copy_from(t);
    if n_levels >= 1 {
        u.view_mut((e_off(1), 0), (n, n)).copy_from(&d_right);
        u.view_mut((0, f_off(1)), (n, n)).copy_from(&d_left);
        u.view_mut((e_off(1), f_off(1)), (n, n))
            .copy_from(&(-t.adjoint()));
        for k in 1..n_levels {
            for i in 0..n {
                u[(e_off(k + 1) + i, e_off(k) + i)] = cr(1.0);
                u[(f_off(k) + i, f_off(k + 1) + i)] = cr(1.0);
            }
        }
    }
    Ok(DilationBundle {
        op: u,
        chain: ChainSpace {
            base_dim: n,
            block_dim: n,
            levels: 2 * n_levels,
        },
        kind: DilationKind::Unitary,
        source: t.clone(),
        q_scale: cr(1.0),
    })
}

/// Co-isometric extension of `qT`, with the scalar recorded; the unscaled
/// operator `V_q` is recoverable as `op / q`. Requires `0 < |q| <= 1/||T||`.
pub fn q_scaled_coextension(
    t: &MatrixOp,
    q: Scalar,
    n_levels: usize,
    tol: &Tolerances,
) -> Result<DilationBundle> {
    let norm = operator_norm(t);
    if q == cr(0.0) || q.norm() * norm > 1.0 + tol.psd_tol {
        return Err(Error::QOutOfRange {
            q: format!("{q}"),
            requirement: format!("0 < |q| <= 1/||T|| (here ||T|| = {norm:.6})"),
        });
    }
    let scaled = t * q;
    let mut bundle = coisometric_extension(&scaled, n_levels, tol)?;
    bundle.q_scale = q;
    Ok(bundle)
}

/// Smallest subspace containing `H` that reduces `V` (is invariant under
/// both `V` and `V*`), found by alternating applications and rank-stable
/// orthonormalization until the dimension stops growing.
pub fn minimal_reducing_subspace(v: &MatrixOp, h: &Subspace, tol: &Tolerances) -> Result<Subspace> {
    let n = require_square(v, "minimal_reducing_subspace")?;
    if h.ambient_dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "subspace lives in dimension {}, operator in {}",
            h.ambient_dim(),
            n
        )));
    }
    let mut current = h.clone();
    for _ in 0..=n {
        if current.dim() == n {
            return Ok(current);
        }
        let b = current.basis();
        let grown = linalg::hstack(&linalg::hstack(b, &(v * b))?, &(v.adjoint() * b))?;
        let next = Subspace::from_span(&grown, tol)?;
        if next.dim() == current.dim() {
            return Ok(next);
        }
        current = next;
    }
    Ok(current)
}

/// Orthogonal projection onto the first `n + 1` chain blocks of a bundle.
///
/// For isometric bundles `P_{n+1} V = V P_n`; for co-isometric bundles the
/// adjoint relation `P_{n+1} V* = V* P_n` holds. Both are exact in the
/// truncated model for `n` below the last level.
pub fn chain_projection(b: &DilationBundle, n: usize) -> Result<MatrixOp> {
    if n > b.chain.levels {
        return Err(Error::LevelOutOfRange {
            level: n,
            max: b.chain.levels,
        });
    }
    Ok(b.chain.projection(n))
}
