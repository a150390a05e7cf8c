//! q-commuting and q-intertwining co-isometric extension triples.
//!
//! Starting from a lifted intertwiner `X` with `V X = q X V_q` on the
//! truncated chains, the triple construction spreads the defect of `X`
//! over a tower of copies: `X2` is a truncated co-shift with first row
//! `[X, D_{X*}, 0, …]`, while `X1` and the scaled third operator repeat the
//! conjugated block `G = D_{X*}^{-1} V D_{X*}` down their diagonals. The
//! commutation `X1 X2 = q X2 X_q` then holds by block arithmetic, exactly.
//!
//! Co-isometry of the `G` blocks is an infinite-space identity; in the
//! truncated model it holds exactly on the image of the chain interior
//! under `D_{X*}`, which is the subspace window these certificates use.

use super::{coiso_lift_q, qcommutant_lift, QPair, STRICTNESS_MARGIN};
use crate::dilation::{coisometric_extension, ChainSpace, DilationBundle, DilationKind};
use crate::error::{Error, Result};
use crate::linalg::{
    self, cr, operator_norm, selector, MatrixOp, Scalar, Side, Subspace, Tolerances,
};
use crate::verify::{Certificate, CheckEntry, Window};

fn block_diag(blocks: &[&MatrixOp]) -> MatrixOp {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = MatrixOp::zeros(rows, cols);
    let (mut r, mut c0) = (0, 0);
    for b in blocks {
        out.view_mut((r, c0), b.shape()).copy_from(b);
        r += b.nrows();
        c0 += b.ncols();
    }
    out
}

/// Diagonal 0/1 window excluding the trailing `cut` coordinates.
fn window_excluding_tail(total: usize, cut: usize) -> MatrixOp {
    let mut w = MatrixOp::zeros(total, total);
    for i in 0..total.saturating_sub(cut) {
        w[(i, i)] = cr(1.0);
    }
    w
}

fn windowed_defect(op: &MatrixOp, window: &MatrixOp) -> f64 {
    let n = op.nrows();
    let defect = op * op.adjoint() - MatrixOp::identity(n, n);
    operator_norm(&(window * defect * window))
}

fn condition_number(svals: &[f64]) -> f64 {
    let max = svals.iter().cloned().fold(0.0, f64::max);
    let min = svals.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Defect `D_{X*}`, its inverse, and its condition number, gated on
/// invertibility at the rank cutoff.
fn invertible_left_defect(x: &MatrixOp, tol: &Tolerances) -> Result<(MatrixOp, MatrixOp, f64)> {
    let d = linalg::defect(x, Side::Left, tol)?;
    // The defect is Hermitian PSD, so its eigenvalues are its singular
    // values.
    let (vals, _) = linalg::hermitian_eigen(&d)?;
    let cond = condition_number(&vals.iter().map(|l| l.max(0.0)).collect::<Vec<_>>());
    if !cond.is_finite() || cond > 1.0 / tol.rank_tol {
        return Err(Error::IllConditionedDefect { cond });
    }
    let inv = d
        .clone()
        .try_inverse()
        .ok_or(Error::IllConditionedDefect { cond })?;
    Ok((d, inv, cond))
}

/// Projection onto the subspace where the conjugated block
/// `G = D^{-1} V D` is exactly co-isometric in the truncated model.
///
/// The truncation defect of `G G* = I` lives in two places: the last chain
/// block of the codomain, and whatever the lifted intertwiner maps out of
/// the last chain block of the domain. Restricting to
/// `D · (interior ∩ range(X|_last-block)^⊥)` removes both exactly, so the
/// windowed defect is pure roundoff.
fn conjugation_window(
    d_defect: &MatrixOp,
    tail_cols: &MatrixOp,
    interior_embedding: &MatrixOp,
    tol: &Tolerances,
) -> Result<MatrixOp> {
    let m = tail_cols.adjoint() * interior_embedding;
    let gram = m.adjoint() * &m;
    let gram_dim = gram.nrows();
    let (vals, vecs) = linalg::hermitian_eigen(&gram)?;
    let sigma_max = vals.iter().cloned().fold(0.0f64, f64::max).max(0.0).sqrt();
    let cutoff = tol.rank_tol * (1.0 + sigma_max);
    let kept: Vec<usize> = (0..gram_dim)
        .filter(|&i| vals[i].max(0.0).sqrt() <= cutoff)
        .collect();
    let mut null_basis = MatrixOp::zeros(gram_dim, kept.len());
    for (j, &i) in kept.iter().enumerate() {
        null_basis.column_mut(j).copy_from(&vecs.column(i));
    }
    let span = d_defect * (interior_embedding * null_basis);
    Ok(Subspace::from_span(&span, tol)?.projection())
}

/// A q-commuting triple of truncated co-isometric extensions
/// `X1, X2, XQ` of `T1, T2, qT1` with `X1 X2 = X2 XQ` (the scalar `q` is
/// baked into `XQ`), together with the windows its certificate was
/// measured on.
#[derive(Debug, Clone)]
pub struct CoextensionTriple {
    pub x1: MatrixOp,
    pub x2: MatrixOp,
    /// The scaled third operator extending `qT1`.
    pub xq: MatrixOp,
    pub q: Scalar,
    pub t1: MatrixOp,
    pub t2: MatrixOp,
    /// Offset and size of the conjugated block `G` inside `x1`.
    g_offset: usize,
    g_dim: usize,
    win_x1: MatrixOp,
    win_x2: MatrixOp,
    win_comm: MatrixOp,
    pub cond_defect: f64,
    pub certificate: Certificate,
}

impl CoextensionTriple {
    /// Re-evaluates every certified identity from the stored operators and
    /// windows.
    pub fn reverify(&self, tol: &Tolerances) -> Certificate {
        let mut cert = Certificate::new("q_coextension", tol);
        let n = self.t1.nrows();
        let total = self.x1.nrows();
        let e_h = selector(total, 0, n);

        let ext1 = operator_norm(&(&self.x1 * &e_h - &e_h * &self.t1));
        let ext2 = operator_norm(&(&self.x2 * &e_h - &e_h * &self.t2));
        let extq = operator_norm(&(&self.xq * &e_h - &e_h * (&self.t1 * self.q)));
        cert.push(CheckEntry::new("extends_T1", ext1, Window::Full, tol));
        cert.push(CheckEntry::new("extends_T2", ext2, Window::Full, tol));
        cert.push(CheckEntry::new("extends_qT1", extq, Window::Full, tol));

        cert.push(CheckEntry::new(
            "coisometry_x1",
            windowed_defect(&self.x1, &self.win_x1),
            Window::Subspace,
            tol,
        ));
        cert.push(CheckEntry::new(
            "coisometry_x2",
            windowed_defect(&self.x2, &self.win_x2),
            Window::Interior,
            tol,
        ));
        cert.push(CheckEntry::new(
            "coisometry_xq",
            windowed_defect(&self.xq, &self.win_x1),
            Window::Subspace,
            tol,
        ));

        let gap = &self.x1 * &self.x2 - &self.x2 * &self.xq;
        cert.push(CheckEntry::new(
            "commutation_full",
            operator_norm(&gap),
            Window::Full,
            tol,
        ));
        cert.push(CheckEntry::new(
            "commutation_interior",
            operator_norm(&(&self.win_comm * gap * &self.win_comm)),
            Window::Interior,
            tol,
        ));

        // The displayed conjugation identity G G* = I on the defect image
        // of the chain interior.
        let g = self
            .x1
            .view((self.g_offset, self.g_offset), (self.g_dim, self.g_dim))
            .into_owned();
        let win_g = self
            .win_x1
            .view((self.g_offset, self.g_offset), (self.g_dim, self.g_dim))
            .into_owned();
        cert.push(CheckEntry::new(
            "defect_conjugation_coisometry",
            windowed_defect(&g, &win_g),
            Window::Subspace,
            tol,
        ));

        cert.condition_numbers
            .insert("D_Xstar".into(), self.cond_defect);
        cert
    }

    fn bundle(&self, op: &MatrixOp, copies: usize) -> DilationBundle {
        let m = self.g_dim;
        DilationBundle {
            op: op.clone(),
            chain: ChainSpace {
                base_dim: m,
                block_dim: m,
                levels: copies - 1,
            },
            kind: DilationKind::CoIsometric,
            source: op.view((0, 0), (m, m)).into_owned(),
            q_scale: cr(1.0),
        }
    }

    /// `X2` viewed as a co-isometric bundle over the copy tower (for the
    /// purity heuristic and dilation checks).
    pub fn x2_bundle(&self) -> DilationBundle {
        let copies = self.x2.nrows() / self.g_dim;
        self.bundle(&self.x2, copies)
    }
}

/// q-commuting co-isometric extension triple for a pair with
/// `||T2|| < 1`: builds the lifted `X` at chain depth `n_levels`, then
/// assembles the three block operators over `copies` copies of the chain
/// space. Requires `copies >= 2`.
pub fn q_coextension(
    pair: &QPair,
    n_levels: usize,
    copies: usize,
    tol: &Tolerances,
) -> Result<CoextensionTriple> {
    if copies < 2 || n_levels < 1 {
        return Err(Error::InvalidArgument(
            "co-extension needs at least two copies and one chain level".into(),
        ));
    }
    let norm2 = operator_norm(&pair.t2);
    if norm2 > 1.0 - STRICTNESS_MARGIN {
        return Err(Error::NotStrictContraction {
            norm: norm2,
            margin: STRICTNESS_MARGIN,
        });
    }
    let lift = coiso_lift_q(pair, n_levels, tol)?;
    let x = lift.op;
    let v = lift.context.left;
    let vq = lift.context.right;
    let chain = lift.codomain_chain;
    let m = chain.total_dim();

    let (d, d_inv, cond) = invertible_left_defect(&x, tol)?;
    let g = &d_inv * &v * &d;

    // X1 = diag(V, G, …, G), XQ = diag(qV_q, G, …, G),
    // X2 = co-shift with first row [X, D_{X*}, 0, …].
    let mut x1_blocks: Vec<&MatrixOp> = vec![&v];
    let mut xq_blocks: Vec<&MatrixOp> = vec![&vq];
    for _ in 1..copies {
        x1_blocks.push(&g);
        xq_blocks.push(&g);
    }
    let x1 = block_diag(&x1_blocks);
    let xq = block_diag(&xq_blocks);

    let total = m * copies;
    let mut x2 = MatrixOp::zeros(total, total);
    x2.view_mut((0, 0), (m, m)).copy_from(&x);
    x2.view_mut((0, m), (m, m)).copy_from(&d);
    for k in 1..copies - 1 {
        for i in 0..m {
            x2[(k * m + i, (k + 1) * m + i)] = cr(1.0);
        }
    }

    // Windows: chain interior on the leading copy; on the G copies, the
    // exactness window of the conjugation identity.
    let interior = chain.projection(n_levels - 1);
    let interior_cols = chain.embedding(n_levels - 1);
    let x_tail = x.view((0, m - chain.block_dim), (m, chain.block_dim)).into_owned();
    let pi_s = conjugation_window(&d, &x_tail, &interior_cols, tol)?;
    let mut win_blocks: Vec<&MatrixOp> = vec![&interior];
    for _ in 1..copies {
        win_blocks.push(&pi_s);
    }
    let win_x1 = block_diag(&win_blocks);
    let win_x2 = window_excluding_tail(total, m);
    let win_comm = window_excluding_tail(total, m);

    let mut triple = CoextensionTriple {
        x1,
        x2,
        xq,
        q: pair.q,
        t1: pair.t1.clone(),
        t2: pair.t2.clone(),
        g_offset: m,
        g_dim: m,
        win_x1,
        win_x2,
        win_comm,
        cond_defect: cond,
        certificate: Certificate::new("q_coextension", tol),
    };
    triple.certificate = triple.reverify(tol);
    Ok(triple)
}

/// Direct summands for [`pad_coextension`].
pub enum PadExtras<'a> {
    /// `X2` gains a co-isometric summand; `X1` and the scaled third
    /// operator gain identity summands.
    X2Summand(&'a DilationBundle),
    /// `X1` and the third operator gain two co-isometric summands; `X2`
    /// gains two identity summands.
    X1Summands(&'a DilationBundle, &'a DilationBundle),
}

fn coisometric_interior_window(b: &DilationBundle) -> MatrixOp {
    if b.chain.levels >= 1 {
        b.chain.projection(b.chain.levels - 1)
    } else {
        MatrixOp::zeros(b.chain.total_dim(), b.chain.total_dim())
    }
}

fn require_coisometric(b: &DilationBundle, tol: &Tolerances) -> Result<MatrixOp> {
    if b.op.nrows() != b.op.ncols() {
        return Err(Error::DimensionMismatch(
            "pad summand must be square".into(),
        ));
    }
    let window = coisometric_interior_window(b);
    let defect = windowed_defect(&b.op, &window);
    if defect > tol.residual_tol {
        return Err(Error::NotCoisometric { defect });
    }
    Ok(window)
}

/// Pads a co-extension triple with direct summands, preserving the
/// commutation and extension certificates blockwise. The summands land at
/// the end of the space, so the embedded base space and the conjugated
/// block inside `X1` keep their positions.
pub fn pad_coextension(
    base: &CoextensionTriple,
    extras: &PadExtras<'_>,
    tol: &Tolerances,
) -> Result<CoextensionTriple> {
    let mut padded = base.clone();
    match extras {
        PadExtras::X2Summand(extra) => {
            let extra_window = require_coisometric(extra, tol)?;
            let r = extra.op.nrows();
            let id = MatrixOp::identity(r, r);
            padded.x1 = block_diag(&[&base.x1, &id]);
            padded.xq = block_diag(&[&base.xq, &id]);
            padded.x2 = block_diag(&[&base.x2, &extra.op]);
            padded.win_x1 = block_diag(&[&base.win_x1, &id]);
            padded.win_x2 = block_diag(&[&base.win_x2, &extra_window]);
            padded.win_comm = block_diag(&[&base.win_comm, &id]);
        }
        PadExtras::X1Summands(first, second) => {
            let w1 = require_coisometric(first, tol)?;
            let w2 = require_coisometric(second, tol)?;
            let id1 = MatrixOp::identity(first.op.nrows(), first.op.nrows());
            let id2 = MatrixOp::identity(second.op.nrows(), second.op.nrows());
            padded.x1 = block_diag(&[&base.x1, &first.op, &second.op]);
            padded.xq = block_diag(&[&base.xq, &first.op, &second.op]);
            padded.x2 = block_diag(&[&base.x2, &id1, &id2]);
            padded.win_x1 = block_diag(&[&base.win_x1, &w1, &w2]);
            padded.win_x2 = block_diag(&[&base.win_x2, &id1, &id2]);
            padded.win_comm = block_diag(&[&base.win_comm, &id1, &id2]);
        }
    }
    padded.certificate = padded.reverify(tol);
    Ok(padded)
}

/// q-intertwining co-extension for `A T1 = q T2 A` with `|q| = 1` and `A`
/// a strict contraction: co-isometric extensions `Y` of `A` and `X1, X2`
/// of `T1, T2` with `Y X1 = q X2 Y`, built from the intertwiner block of a
/// commutant lift on the doubled space.
#[derive(Debug, Clone)]
pub struct IntertwinedCoextension {
    pub y: MatrixOp,
    pub x1: MatrixOp,
    pub x2: MatrixOp,
    pub q: Scalar,
    pub a: MatrixOp,
    pub t1: MatrixOp,
    pub t2: MatrixOp,
    /// Chain dimensions of the two towers.
    m1: usize,
    m2: usize,
    win_y: MatrixOp,
    win_x1: MatrixOp,
    win_x2: MatrixOp,
    win_comm_dom: MatrixOp,
    pub cond_defect: f64,
    pub certificate: Certificate,
}

impl IntertwinedCoextension {
    pub fn reverify(&self, tol: &Tolerances) -> Certificate {
        let mut cert = Certificate::new("q_intertwining_coextension", tol);
        let n1 = self.t1.nrows();
        let n2 = self.t2.nrows();
        let dom_total = self.x1.nrows();
        let cod_total = self.x2.nrows();

        let e_h1 = selector(dom_total, 0, n1);
        let e_h2 = selector(cod_total, 0, n2);
        let ext_a = operator_norm(&(&self.y * &e_h1 - &e_h2 * &self.a));
        let ext_1 = operator_norm(&(&self.x1 * &e_h1 - &e_h1 * &self.t1));
        let ext_2 = operator_norm(&(&self.x2 * &e_h2 - &e_h2 * &self.t2));
        cert.push(CheckEntry::new("extends_A", ext_a, Window::Full, tol));
        cert.push(CheckEntry::new("extends_T1", ext_1, Window::Full, tol));
        cert.push(CheckEntry::new("extends_T2", ext_2, Window::Full, tol));

        let gap = &self.y * &self.x1 - (&self.x2 * &self.y) * self.q;
        cert.push(CheckEntry::new(
            "intertwine_full",
            operator_norm(&gap),
            Window::Full,
            tol,
        ));
        cert.push(CheckEntry::new(
            "intertwine_interior",
            operator_norm(&(gap * &self.win_comm_dom)),
            Window::Interior,
            tol,
        ));

        let y_defect = &self.y * self.y.adjoint() - MatrixOp::identity(cod_total, cod_total);
        cert.push(CheckEntry::new(
            "coisometry_y",
            operator_norm(&(&self.win_y * y_defect * &self.win_y)),
            Window::Interior,
            tol,
        ));
        cert.push(CheckEntry::new(
            "coisometry_x1",
            windowed_defect(&self.x1, &self.win_x1),
            Window::Subspace,
            tol,
        ));
        cert.push(CheckEntry::new(
            "coisometry_x2",
            windowed_defect(&self.x2, &self.win_x2),
            Window::Subspace,
            tol,
        ));

        // G G* = I on the defect image window, read off the scaled block.
        let g_scaled = self
            .x1
            .view((self.m1, self.m1), (self.m2, self.m2))
            .into_owned();
        let g = &g_scaled * (cr(1.0) / self.q);
        let win_g = self
            .win_x1
            .view((self.m1, self.m1), (self.m2, self.m2))
            .into_owned();
        cert.push(CheckEntry::new(
            "defect_conjugation_coisometry",
            windowed_defect(&g, &win_g),
            Window::Subspace,
            tol,
        ));
        cert.condition_numbers
            .insert("D_Bstar".into(), self.cond_defect);
        cert
    }
}

pub fn q_intertwining_coextension(
    a: &MatrixOp,
    t1: &MatrixOp,
    t2: &MatrixOp,
    q: Scalar,
    n_levels: usize,
    copies: usize,
    tol: &Tolerances,
) -> Result<IntertwinedCoextension> {
    if copies < 2 || n_levels < 1 {
        return Err(Error::InvalidArgument(
            "co-extension needs at least two copies and one chain level".into(),
        ));
    }
    let modulus = q.norm();
    if (modulus - 1.0).abs() > tol.residual_tol {
        return Err(Error::QNotUnimodular {
            q: format!("{q}"),
            modulus,
        });
    }
    let norm_a = operator_norm(a);
    if norm_a > 1.0 - STRICTNESS_MARGIN {
        return Err(Error::NotStrictContraction {
            norm: norm_a,
            margin: STRICTNESS_MARGIN,
        });
    }
    for t in [t1, t2] {
        let norm = operator_norm(t);
        if norm > 1.0 + tol.psd_tol {
            return Err(Error::NotContraction { norm });
        }
    }
    let n1 = t1.nrows();
    let n2 = t2.nrows();
    if t1.ncols() != n1 || t2.ncols() != n2 || a.nrows() != n2 || a.ncols() != n1 {
        return Err(Error::DimensionMismatch(format!(
            "intertwiner is {}x{}, expected {}x{}",
            a.nrows(),
            a.ncols(),
            n2,
            n1
        )));
    }
    let residual =
        operator_norm(&(a * t1 - (t2 * a) * q)) / (1.0 + operator_norm(t1) * norm_a);
    if residual > tol.residual_tol {
        return Err(Error::HypothesisViolated {
            identity: "A T1 = q T2 A".into(),
            residual,
        });
    }

    // Doubled space: T~ = diag(T1, T2), A~ = [[0, 0], [A, 0]] is
    // (1/q)-commuting with T~; the commutant lift on the doubled chain
    // yields the intertwiner block B with B V1 = q V2 B.
    let ttilde = block_diag(&[t1, t2]);
    let mut atilde = MatrixOp::zeros(n1 + n2, n1 + n2);
    atilde.view_mut((n1, 0), (n2, n1)).copy_from(a);
    let doubled = QPair::new(ttilde, atilde, cr(1.0) / q, tol)?;
    let stilde = qcommutant_lift(&doubled, n_levels, tol)?;

    let nsum = n1 + n2;
    let levels1 = n_levels + 1;
    let mut e1 = MatrixOp::zeros(nsum * levels1, n1 * levels1);
    let mut e2 = MatrixOp::zeros(nsum * levels1, n2 * levels1);
    for k in 0..levels1 {
        for i in 0..n1 {
            e1[(k * nsum + i, k * n1 + i)] = cr(1.0);
        }
        for i in 0..n2 {
            e2[(k * nsum + n1 + i, k * n2 + i)] = cr(1.0);
        }
    }
    let b = e2.adjoint() * &stilde.op * &e1;

    let v1 = coisometric_extension(t1, n_levels, tol)?;
    let v2 = coisometric_extension(t2, n_levels, tol)?;
    let m1 = v1.chain.total_dim();
    let m2 = v2.chain.total_dim();

    let (d, d_inv, cond) = invertible_left_defect(&b, tol)?;
    let g = &d_inv * &v2.op * &d;
    let g_q = &g * q;
    let g_inv_q = &g * (cr(1.0) / q);

    let mut x1_blocks: Vec<&MatrixOp> = vec![&v1.op, &g_q];
    for _ in 2..copies {
        x1_blocks.push(&g);
    }
    let x1 = block_diag(&x1_blocks);
    let mut x2_blocks: Vec<&MatrixOp> = vec![&v2.op];
    for _ in 1..copies {
        x2_blocks.push(&g_inv_q);
    }
    let x2 = block_diag(&x2_blocks);

    let dom_total = m1 + (copies - 1) * m2;
    let cod_total = copies * m2;
    let mut y = MatrixOp::zeros(cod_total, dom_total);
    y.view_mut((0, 0), (m2, m1)).copy_from(&b);
    y.view_mut((0, m1), (m2, m2)).copy_from(&(&d * (cr(1.0) / q)));
    for k in 1..copies - 1 {
        for i in 0..m2 {
            y[(k * m2 + i, m1 + k * m2 + i)] = cr(1.0);
        }
    }

    let interior1 = v1.chain.projection(n_levels - 1);
    let interior2 = v2.chain.projection(n_levels - 1);
    let interior2_cols = v2.chain.embedding(n_levels - 1);
    let b_tail = b.view((0, m1 - n1), (m2, n1)).into_owned();
    let pi_s = conjugation_window(&d, &b_tail, &interior2_cols, tol)?;

    let mut win1_blocks: Vec<&MatrixOp> = vec![&interior1];
    for _ in 1..copies {
        win1_blocks.push(&pi_s);
    }
    let win_x1 = block_diag(&win1_blocks);
    let mut win2_blocks: Vec<&MatrixOp> = vec![&interior2];
    for _ in 1..copies {
        win2_blocks.push(&pi_s);
    }
    let win_x2 = block_diag(&win2_blocks);
    let win_y = window_excluding_tail(cod_total, m2);
    let win_comm_dom = window_excluding_tail(dom_total, m2);

    let mut built = IntertwinedCoextension {
        y,
        x1,
        x2,
        q,
        a: a.clone(),
        t1: t1.clone(),
        t2: t2.clone(),
        m1,
        m2,
        win_y,
        win_x1,
        win_x2,
        win_comm_dom,
        cond_defect: cond,
        certificate: Certificate::new("q_intertwining_coextension", tol),
    };
    built.certificate = built.reverify(tol);
    Ok(built)
}
