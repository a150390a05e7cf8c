//! Lifting engines for q-commuting and q-intertwining pairs.
//!
//! Two inductive engines do the real work. The isometric engine walks the
//! Schaeffer chains level by level, solving a two-term Douglas problem per
//! level to produce `W` with `V W = q W V_q` on the dilation side. The
//! co-isometric engine extends along the adjoint chains by one dual-Parrott
//! extension per level, producing `Y` with `V Y = q Y V_q`, `Y|_H = T2` and
//! `||Y|| = ||T2||`. Both are level-exact in the truncated model: the
//! certified identities hold at the final truncation level, not just in the
//! infinite limit.

mod coextension;

pub use coextension::{
    pad_coextension, q_coextension, q_intertwining_coextension, CoextensionTriple,
    IntertwinedCoextension, PadExtras,
};

use crate::dilation::{
    coisometric_extension, q_scaled_coextension, schaeffer_isometric, unitary_dilation, ChainSpace,
};
use crate::error::{Error, Result};
use crate::factorization::{dual_parrott_extend, two_term_douglas, DualParrottProblem};
use crate::linalg::{
    self, cr, defect, operator_norm, selector, Block, MatrixOp, Scalar, Side, Subspace,
    Tolerances,
};
use crate::verify::{CheckEntry, Window};

/// Margin below 1 required of "strict contraction" hypotheses. The defect
/// inverse in the co-extension constructions blows up as the norm
/// approaches 1; certificates report the resulting condition number.
pub const STRICTNESS_MARGIN: f64 = 1e-6;

/// A q-commuting pair: `T1 T2 = q T2 T1` with `T1` a contraction and
/// `q != 0`.
#[derive(Debug, Clone)]
pub struct QPair {
    pub t1: MatrixOp,
    pub t2: MatrixOp,
    pub q: Scalar,
}

impl QPair {
    pub fn new(t1: MatrixOp, t2: MatrixOp, q: Scalar, tol: &Tolerances) -> Result<Self> {
        linalg::check_finite(&t1)?;
        linalg::check_finite(&t2)?;
        if t1.shape() != t2.shape() || t1.nrows() != t1.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "q-commuting pair of {}x{} and {}x{}",
                t1.nrows(),
                t1.ncols(),
                t2.nrows(),
                t2.ncols()
            )));
        }
        if q == cr(0.0) {
            return Err(Error::QOutOfRange {
                q: format!("{q}"),
                requirement: "q != 0".into(),
            });
        }
        let norm1 = operator_norm(&t1);
        if norm1 > 1.0 + tol.psd_tol {
            return Err(Error::NotContraction { norm: norm1 });
        }
        let pair = QPair { t1, t2, q };
        let residual = pair.commutation_residual();
        if residual > tol.residual_tol {
            return Err(Error::NotQCommuting { residual });
        }
        Ok(pair)
    }

    /// `||T1 T2 - q T2 T1|| / (1 + ||T1|| ||T2||)`.
    pub fn commutation_residual(&self) -> f64 {
        let num = operator_norm(&(&self.t1 * &self.t2 - (&self.t2 * &self.t1) * self.q));
        num / (1.0 + operator_norm(&self.t1) * operator_norm(&self.t2))
    }

    pub fn dim(&self) -> usize {
        self.t1.nrows()
    }
}

/// Norm assertion of a lift: the achieved operator norm against the value
/// the construction promises.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct NormClaim {
    pub achieved: f64,
    pub target: f64,
}

impl NormClaim {
    pub fn residual(&self) -> f64 {
        (self.achieved - self.target).abs() / (1.0 + self.target)
    }
}

/// Which engine produced a lift; determines how its certificate is
/// re-evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftEngine {
    /// Single dual-Parrott extension step.
    DualParrott,
    /// One block-triangular intertwining step `Y V = V' Y`.
    QPartStep,
    /// Chain of q-part steps on the isometric dilation side.
    Isometric,
    /// Dual-Parrott chain on the co-isometric extension side.
    Coiso,
    /// Commutant lift on a single co-isometric chain (`V S = q S V`).
    Commutant,
    /// Adjoint reduction of the co-isometric engine (`Y V = q V_q Y`).
    Adjoint,
    /// Lift between truncated unitary dilations.
    Unitary,
}

/// Everything needed to re-evaluate a lift's certificate from scratch.
#[derive(Debug, Clone)]
pub struct LiftContext {
    pub engine: LiftEngine,
    /// Operator on the codomain chain (`V`, `V_N`, or `U`).
    pub left: MatrixOp,
    /// Operator on the domain chain with any q-scaling baked in
    /// (`qV_q`, `(qV_q)_N`, `qV`, or `qU_q`).
    pub right: MatrixOp,
    pub q: Scalar,
    /// The operator being lifted.
    pub base: MatrixOp,
    /// Extra source operator where checks need one (`T1` for the unitary
    /// power compressions).
    pub aux: Option<MatrixOp>,
    /// Extension data for dual-Parrott rechecks.
    pub problem: Option<DualParrottProblem>,
}

/// A lifted operator plus the certificate of which identities hold and
/// with what residuals.
#[derive(Debug, Clone)]
pub struct LiftResult {
    pub op: MatrixOp,
    pub domain_chain: ChainSpace,
    pub codomain_chain: ChainSpace,
    pub certificate: Vec<CheckEntry>,
    pub norm_claim: NormClaim,
    pub context: LiftContext,
}

impl LiftResult {
    /// Largest residual among the certified checks.
    pub fn worst_residual(&self) -> f64 {
        self.certificate
            .iter()
            .map(|c| c.residual)
            .fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.certificate.iter().all(|c| c.pass)
    }
}

fn zero_pad(m: &MatrixOp, rows: usize, cols: usize) -> MatrixOp {
    let mut out = MatrixOp::zeros(rows, cols);
    out.view_mut((0, 0), m.shape()).copy_from(m);
    out
}

/// `[base | 0]` with the given total number of columns.
fn padded_row(base: &MatrixOp, cols: usize) -> MatrixOp {
    zero_pad(base, base.nrows(), cols)
}

fn finish_lift(
    op: MatrixOp,
    domain_chain: ChainSpace,
    codomain_chain: ChainSpace,
    context: LiftContext,
    tol: &Tolerances,
) -> LiftResult {
    let (certificate, norm_claim) =
        evaluate_lift_checks(&op, &context, &domain_chain, &codomain_chain, tol);
    LiftResult {
        op,
        domain_chain,
        codomain_chain,
        certificate,
        norm_claim,
        context,
    }
}

/// One intertwining step between column-isometric block maps.
///
/// Given contractions `T`, `T'` with couplings `S`, `S'` satisfying
/// `T*T + S*S = I` and `T'*T' + S'*S' = I`, and an intertwiner `T2` with
/// `T2 T = T' T2`, produces `Y = [[T2, 0], [A, B]]` with `Y V = V' Y` for
/// `V = [[T, 0], [S, 0]]`, `V' = [[T', 0], [S', 0]]`, and `||Y|| = ||T2||`.
///
/// The unknowns come from one two-term Douglas problem for
/// `T*D_{T2}K* + S*B* = T2*S'*` (after normalizing `T2` to unit norm),
/// then `A = K D_{T2}`.
pub fn qpart_step(
    t: &MatrixOp,
    tp: &MatrixOp,
    s: &MatrixOp,
    sp: &MatrixOp,
    t2: &MatrixOp,
    tol: &Tolerances,
) -> Result<LiftResult> {
    let h1 = t.ncols();
    let h1p = tp.ncols();
    let h2 = s.nrows();
    let h2p = sp.nrows();
    if t.nrows() != h1 || tp.nrows() != h1p || s.ncols() != h1 || sp.ncols() != h1p {
        return Err(Error::DimensionMismatch(
            "q-part step blocks must form square column maps".into(),
        ));
    }
    if t2.nrows() != h1p || t2.ncols() != h1 {
        return Err(Error::DimensionMismatch(format!(
            "intertwiner is {}x{}, expected {}x{}",
            t2.nrows(),
            t2.ncols(),
            h1p,
            h1
        )));
    }

    let t2_norm = operator_norm(t2);
    let scale = 1.0 + t2_norm;
    let hypotheses: [(&str, f64); 3] = [
        (
            "T2 T = T' T2",
            operator_norm(&(t2 * t - tp * t2)) / scale,
        ),
        (
            "T*T + S*S = I",
            operator_norm(&(t.adjoint() * t + s.adjoint() * s - MatrixOp::identity(h1, h1))),
        ),
        (
            "T'*T' + S'*S' = I",
            operator_norm(&(tp.adjoint() * tp + sp.adjoint() * sp - MatrixOp::identity(h1p, h1p))),
        ),
    ];
    for (identity, residual) in hypotheses {
        if residual > tol.residual_tol {
            return Err(Error::HypothesisViolated {
                identity: identity.into(),
                residual,
            });
        }
    }

    let domain_chain = ChainSpace {
        base_dim: h1,
        block_dim: h2,
        levels: 1,
    };
    let codomain_chain = ChainSpace {
        base_dim: h1p,
        block_dim: h2p,
        levels: 1,
    };
    let v = {
        let top = padded_row(t, h1 + h2);
        let bottom = padded_row(s, h1 + h2);
        linalg::vstack(&top, &bottom)?
    };
    let vp = {
        let top = padded_row(tp, h1p + h2p);
        let bottom = padded_row(sp, h1p + h2p);
        linalg::vstack(&top, &bottom)?
    };

    let y = if t2_norm == 0.0 {
        MatrixOp::zeros(h1p + h2p, h1 + h2)
    } else {
        // Normalize the intertwiner to unit norm before applying the
        // contraction calculus, then scale the solved blocks back.
        let t2n = t2 * cr(1.0 / t2_norm);
        let d_t2 = defect(&t2n, Side::Right, tol)?;
        let a0 = t2n.adjoint() * sp.adjoint();
        let a1 = t.adjoint() * &d_t2;
        let a2 = s.adjoint();
        let (z1, z2) = two_term_douglas(&a0, &a1, &a2, tol)?;
        let k = z1.adjoint();
        let b = z2.adjoint();
        let a = &k * &d_t2;

        let a_scaled = &a * cr(t2_norm);
        let b_scaled = &b * cr(t2_norm);
        linalg::assemble_blocks(&[
            vec![Block::Mat(t2), Block::Zero],
            vec![Block::Mat(&a_scaled), Block::Mat(&b_scaled)],
        ])?
    };
    let context = LiftContext {
        engine: LiftEngine::QPartStep,
        left: vp,
        right: v,
        q: cr(1.0),
        base: t2.clone(),
        aux: None,
        problem: None,
    };
    Ok(finish_lift(y, domain_chain, codomain_chain, context, tol))
}

/// Lift of `T2` to the truncated isometric dilation chains of `T1` and
/// `qT1`, built by one [`qpart_step`] per chain level.
///
/// The result `W` satisfies, exactly at truncation level `N`:
/// `V_N W = W (qV_q)_N`, `||W|| = ||T2||`, and `W*|_H = T2*`.
pub fn isometric_lift_q(pair: &QPair, n_levels: usize, tol: &Tolerances) -> Result<LiftResult> {
    let n = pair.dim();
    let norm1 = operator_norm(&pair.t1);
    if pair.q.norm() * norm1 > 1.0 + tol.psd_tol {
        return Err(Error::QOutOfRange {
            q: format!("{}", pair.q),
            requirement: format!("0 < |q| <= 1/||T1|| (here ||T1|| = {norm1:.6})"),
        });
    }
    let left = schaeffer_isometric(&pair.t1, n_levels, tol)?;
    let right = schaeffer_isometric(&(&pair.t1 * pair.q), n_levels, tol)?;
    let chain = left.chain;

    let mut w = pair.t2.clone();
    if operator_norm(&pair.t2) > 0.0 {
        for level in 1..=n_levels {
            let prev = chain.level_dim(level - 1);
            let t = right.op.view((0, 0), (prev, prev)).into_owned();
            let s = right.op.view((prev, 0), (n, prev)).into_owned();
            let tp = left.op.view((0, 0), (prev, prev)).into_owned();
            let sp = left.op.view((prev, 0), (n, prev)).into_owned();
            w = qpart_step(&t, &tp, &s, &sp, &w, tol)?.op;
        }
    } else {
        w = MatrixOp::zeros(chain.total_dim(), chain.total_dim());
    }

    let context = LiftContext {
        engine: LiftEngine::Isometric,
        left: left.op,
        right: right.op,
        q: pair.q,
        base: pair.t2.clone(),
        aux: None,
        problem: None,
    };
    Ok(finish_lift(w, right.chain, chain, context, tol))
}

/// Dual-Parrott induction along two truncated co-isometric chains.
///
/// `left` is a truncated co-isometry on the codomain chain (defect only in
/// the last block row), `right` any norm-at-most-one chain map on the
/// domain side whose adjoint shifts levels up by one. Builds `Y` with
/// `left . Y = Y . right`, `Y|_base = x0` and `||Y|| = ||x0||`, extending
/// level by level; each level is one dual-Parrott extension with the
/// central Parrott completion.
fn chain_intertwiner(
    left: &MatrixOp,
    right: &MatrixOp,
    x0: &MatrixOp,
    dom: &ChainSpace,
    cod: &ChainSpace,
    tol: &Tolerances,
) -> Result<MatrixOp> {
    if x0.nrows() != cod.base_dim || x0.ncols() != dom.base_dim {
        return Err(Error::DimensionMismatch(format!(
            "chain base map is {}x{}, expected {}x{}",
            x0.nrows(),
            x0.ncols(),
            cod.base_dim,
            dom.base_dim
        )));
    }
    if operator_norm(x0) == 0.0 {
        return Ok(MatrixOp::zeros(cod.total_dim(), dom.total_dim()));
    }
    let mut y = x0.clone();
    for level in 1..=dom.levels {
        let d_prev = dom.level_dim(level - 1);
        let d_cur = dom.level_dim(level);
        let dp_prev = cod.level_dim(level - 1);
        let dp_cur = cod.level_dim(level);

        // H = K_{level-1} embedded in K_level; H' = V* K'_{level-1}, whose
        // basis is orthonormal because the truncated co-isometry's adjoint
        // is isometric below the last level.
        let h_sub = Subspace::new(selector(d_cur, 0, d_prev), tol)?;
        let hp_basis = left.adjoint().view((0, 0), (dp_cur, dp_prev)).into_owned();
        let hp_sub = Subspace::new(hp_basis, tol)?;

        let x = zero_pad(&y, dp_cur, d_prev);
        let xp = right.adjoint().view((0, 0), (d_cur, d_prev)).into_owned() * y.adjoint();
        let problem = DualParrottProblem::new(h_sub, hp_sub, x, xp, tol)?;
        y = dual_parrott_extend(&problem, tol)?.op;
    }
    Ok(y)
}

/// Lift of a q-commutant to the truncated co-isometric extension chains:
/// `Y` with `V Y = q Y V_q`, `Y(H) ⊆ H`, `Y|_H = T2`, `||Y|| = ||T2||`,
/// where `V` extends `T1` and `qV_q` extends `qT1`. One dual-Parrott
/// extension per level; the per-level identities and the norm equality are
/// certified at every level.
pub fn coiso_lift_q(pair: &QPair, n_levels: usize, tol: &Tolerances) -> Result<LiftResult> {
    let v = coisometric_extension(&pair.t1, n_levels, tol)?;
    let w = q_scaled_coextension(&pair.t1, pair.q, n_levels, tol)?;
    let y = chain_intertwiner(&v.op, &w.op, &pair.t2, &w.chain, &v.chain, tol)?;
    let context = LiftContext {
        engine: LiftEngine::Coiso,
        left: v.op,
        right: w.op,
        q: pair.q,
        base: pair.t2.clone(),
        aux: None,
        problem: None,
    };
    Ok(finish_lift(y, w.chain, v.chain, context, tol))
}

/// Commutant lift on a single truncated co-isometric chain: `S` with
/// `V S = q S V`, `S|_H = T2`, `||S|| = ||T2||`. Requires `0 < |q| <= 1`;
/// the engine is the same dual-Parrott induction with the domain-side
/// operator `qV`.
pub fn qcommutant_lift(pair: &QPair, n_levels: usize, tol: &Tolerances) -> Result<LiftResult> {
    if pair.q.norm() > 1.0 + tol.psd_tol {
        return Err(Error::QOutOfRange {
            q: format!("{}", pair.q),
            requirement: "0 < |q| <= 1".into(),
        });
    }
    let v = coisometric_extension(&pair.t1, n_levels, tol)?;
    let right = &v.op * pair.q;
    let y = chain_intertwiner(&v.op, &right, &pair.t2, &v.chain, &v.chain, tol)?;
    let context = LiftContext {
        engine: LiftEngine::Commutant,
        left: v.op.clone(),
        right,
        q: pair.q,
        base: pair.t2.clone(),
        aux: None,
        problem: None,
    };
    Ok(finish_lift(y, v.chain, v.chain, context, tol))
}

/// Lift for the swapped hypothesis `q T X = X T`: produces `Y` between the
/// truncated isometric dilation chains with `Y V = q V_q Y`,
/// `Y*(H) ⊆ H`, `Y*|_H = X*`, `||Y|| = ||X||`.
///
/// Implemented by the exact adjoint reduction: `q T X = X T` gives
/// `T* X* = q̄ X* T*`, the co-isometric engine lifts `(T*, X*, q̄)`, and
/// the adjoint of that lift is returned.
pub fn adjoint_lift_q(
    t: &MatrixOp,
    x: &MatrixOp,
    q: Scalar,
    n_levels: usize,
    tol: &Tolerances,
) -> Result<LiftResult> {
    let residual = operator_norm(&((t * x) * q - x * t))
        / (1.0 + operator_norm(t) * operator_norm(x));
    if residual > tol.residual_tol {
        return Err(Error::HypothesisViolated {
            identity: "q T X = X T".into(),
            residual,
        });
    }
    let inner_pair = QPair::new(t.adjoint(), x.adjoint(), q.conj(), tol)?;
    let inner = coiso_lift_q(&inner_pair, n_levels, tol)?;
    let y = inner.op.adjoint();

    let left = schaeffer_isometric(&(t * q), n_levels, tol)?;
    let right = schaeffer_isometric(t, n_levels, tol)?;
    let context = LiftContext {
        engine: LiftEngine::Adjoint,
        left: left.op,
        right: right.op,
        q,
        base: x.clone(),
        aux: None,
        problem: None,
    };
    Ok(finish_lift(y, right.chain, left.chain, context, tol))
}

/// Lift of `T2` between truncated unitary dilations of `T1` and `qT1`:
/// `S` with `U S = q S U_q`, `||S|| = ||T2||`, and the power compressions
/// `T1^n T2 = P_H U_q^n S|_H` and `T2 T1^n = P_H S U^n|_H` for
/// `0 <= n <= N`.
///
/// Built in two stages: the isometric engine produces the lift `S_+`
/// between the dilation half-spaces, then the dual-Parrott engine extends
/// it along the past chains of the unitary dilations (the intertwining
/// extension between co-isometric chains, rebased at the half-spaces).
pub fn unitary_q_lift(pair: &QPair, n_levels: usize, tol: &Tolerances) -> Result<LiftResult> {
    let plus = isometric_lift_q(pair, n_levels, tol)?;
    let u = unitary_dilation(&pair.t1, n_levels, tol)?;
    let uq = unitary_dilation(&(&pair.t1 * pair.q), n_levels, tol)?;

    let half_dim = pair.dim() * (n_levels + 1);
    let rebased = ChainSpace {
        base_dim: half_dim,
        block_dim: pair.dim(),
        levels: n_levels,
    };
    let s = chain_intertwiner(&u.op, &uq.op, &plus.op, &rebased, &rebased, tol)?;
    let context = LiftContext {
        engine: LiftEngine::Unitary,
        left: u.op,
        right: uq.op,
        q: pair.q,
        base: pair.t2.clone(),
        aux: Some(pair.t1.clone()),
        problem: None,
    };
    Ok(finish_lift(s, rebased, rebased, context, tol))
}

/// Per-level checks shared by the co-isometric style engines: the
/// compatibility pairing at each level, the per-level step identity
/// `Y_n* P'_n V* = R* Y_{n-1}* P'_{n-1}`, and the per-level norms.
#[allow(clippy::too_many_arguments)]
fn coiso_chain_entries(
    entries: &mut Vec<CheckEntry>,
    op: &MatrixOp,
    left: &MatrixOp,
    right: &MatrixOp,
    dom: &ChainSpace,
    cod: &ChainSpace,
    base_norm: f64,
    tol: &Tolerances,
) {
    let scale = 1.0 + base_norm;
    let n_levels = dom.levels;
    for level in 1..=n_levels {
        let d_prev = dom.level_dim(level - 1);
        let d_cur = dom.level_dim(level);
        let dp_prev = cod.level_dim(level - 1);
        let dp_cur = cod.level_dim(level);
        let y_prev = op.view((0, 0), (dp_prev, d_prev)).into_owned();

        let hp_basis = left.adjoint().view((0, 0), (dp_cur, dp_prev)).into_owned();
        let x = zero_pad(&y_prev, dp_cur, d_prev);
        let xp = right.adjoint().view((0, 0), (d_cur, d_prev)).into_owned() * y_prev.adjoint();
        let e = selector(d_cur, 0, d_prev);
        let claim = operator_norm(&(hp_basis.adjoint() * &x - xp.adjoint() * &e)) / scale;
        entries.push(CheckEntry::new(
            format!("claim[{level}]"),
            claim,
            Window::Subspace,
            tol,
        ));
    }
    for level in 1..=n_levels {
        let y_cur = op
            .view((0, 0), (cod.level_dim(level), dom.level_dim(level)))
            .into_owned();
        let y_prev = op
            .view((0, 0), (cod.level_dim(level - 1), dom.level_dim(level - 1)))
            .into_owned();
        let y_cur_hat = zero_pad(&y_cur, cod.total_dim(), dom.total_dim());
        let y_prev_hat = zero_pad(&y_prev, cod.total_dim(), dom.total_dim());
        let lhs = y_cur_hat.adjoint() * cod.projection(level) * left.adjoint();
        let rhs = right.adjoint() * y_prev_hat.adjoint() * cod.projection(level - 1);
        entries.push(CheckEntry::new(
            format!("step_identity[{level}]"),
            operator_norm(&(lhs - rhs)) / scale,
            Window::Full,
            tol,
        ));
    }
    for level in 0..=n_levels {
        let y_cur = op
            .view((0, 0), (cod.level_dim(level), dom.level_dim(level)))
            .into_owned();
        let residual = (operator_norm(&y_cur) - base_norm).abs() / scale;
        entries.push(CheckEntry::new(
            format!("norm_level[{level}]"),
            residual,
            Window::Full,
            tol,
        ));
    }
}

fn intertwine_entries(
    entries: &mut Vec<CheckEntry>,
    op: &MatrixOp,
    left: &MatrixOp,
    right: &MatrixOp,
    dom: &ChainSpace,
    base_norm: f64,
    tol: &Tolerances,
) {
    let scale = 1.0 + base_norm;
    let gap = left * op - op * right;
    entries.push(CheckEntry::new(
        "intertwine_full",
        operator_norm(&gap) / scale,
        Window::Full,
        tol,
    ));
    if dom.levels >= 1 {
        let windowed = &gap * dom.projection(dom.levels - 1);
        entries.push(CheckEntry::new(
            "intertwine_interior",
            operator_norm(&windowed) / scale,
            Window::Interior,
            tol,
        ));
    }
}

/// Recomputes every certified identity of a lift from its context. Engines
/// call this once to build the stored certificate; `verify::check_lift`
/// calls it again to prove the stored numbers are reproducible.
pub(crate) fn evaluate_lift_checks(
    op: &MatrixOp,
    ctx: &LiftContext,
    dom: &ChainSpace,
    cod: &ChainSpace,
    tol: &Tolerances,
) -> (Vec<CheckEntry>, NormClaim) {
    let mut entries = Vec::new();
    let base_norm = operator_norm(&ctx.base);
    let scale = 1.0 + base_norm;
    let achieved = operator_norm(op);
    let mut target = base_norm;

    match ctx.engine {
        LiftEngine::DualParrott => {
            let problem = ctx
                .problem
                .as_ref()
                .expect("dual-Parrott context carries its problem");
            let x_norm = operator_norm(problem.x());
            let xp_norm = operator_norm(problem.xp());
            target = x_norm.max(xp_norm);
            entries.push(CheckEntry::new(
                "compatibility",
                problem.compatibility_residual(),
                Window::Subspace,
                tol,
            ));
            entries.push(CheckEntry::new(
                "extends_base",
                operator_norm(&(op * problem.h().basis() - problem.x())) / (1.0 + x_norm),
                Window::Subspace,
                tol,
            ));
            entries.push(CheckEntry::new(
                "adjoint_extends_base",
                operator_norm(&(op.adjoint() * problem.hp().basis() - problem.xp()))
                    / (1.0 + xp_norm),
                Window::Subspace,
                tol,
            ));
        }
        LiftEngine::QPartStep => {
            let gap = &ctx.left * op - op * &ctx.right;
            entries.push(CheckEntry::new(
                "intertwine_full",
                operator_norm(&gap) / scale,
                Window::Full,
                tol,
            ));
            let top = op.view((0, 0), (ctx.base.nrows(), op.ncols())).into_owned();
            let expected = padded_row(&ctx.base, op.ncols());
            entries.push(CheckEntry::new(
                "extends_base",
                operator_norm(&(top - expected)) / scale,
                Window::Full,
                tol,
            ));
        }
        LiftEngine::Isometric => {
            for level in 0..=dom.levels {
                let d = dom.level_dim(level);
                let dp = cod.level_dim(level);
                let w_n = op.view((0, 0), (dp, d)).into_owned();
                let v_n = ctx.left.view((0, 0), (dp, dp)).into_owned();
                let r_n = ctx.right.view((0, 0), (d, d)).into_owned();
                entries.push(CheckEntry::new(
                    format!("intertwine_level[{level}]"),
                    operator_norm(&(v_n * &w_n - &w_n * r_n)) / scale,
                    Window::Full,
                    tol,
                ));
                entries.push(CheckEntry::new(
                    format!("norm_level[{level}]"),
                    (operator_norm(&w_n) - base_norm).abs() / scale,
                    Window::Full,
                    tol,
                ));
            }
            // W*|_H = T2*: the top block row of W is [T2 0 ... 0].
            let top = op.view((0, 0), (ctx.base.nrows(), op.ncols())).into_owned();
            let expected = padded_row(&ctx.base, op.ncols());
            entries.push(CheckEntry::new(
                "extends_base_adjoint",
                operator_norm(&(top - expected)) / scale,
                Window::Full,
                tol,
            ));
        }
        LiftEngine::Coiso | LiftEngine::Commutant => {
            coiso_chain_entries(
                &mut entries,
                op,
                &ctx.left,
                &ctx.right,
                dom,
                cod,
                base_norm,
                tol,
            );
            let first_col = op.view((0, 0), (op.nrows(), dom.base_dim)).into_owned();
            let expected = zero_pad(&ctx.base, op.nrows(), dom.base_dim);
            entries.push(CheckEntry::new(
                "extends_base",
                operator_norm(&(first_col - expected)) / scale,
                Window::Subspace,
                tol,
            ));
            intertwine_entries(&mut entries, op, &ctx.left, &ctx.right, dom, base_norm, tol);
        }
        LiftEngine::Adjoint => {
            // Mirror of the co-isometric engine under the adjoint
            // reduction: Y* runs on the adjoint chains with the operators
            // swapped and conjugated.
            let inner_op = op.adjoint();
            let inner_left = ctx.right.adjoint();
            let inner_right = ctx.left.adjoint();
            coiso_chain_entries(
                &mut entries,
                &inner_op,
                &inner_left,
                &inner_right,
                cod,
                dom,
                base_norm,
                tol,
            );
            let top = op.view((0, 0), (ctx.base.nrows(), op.ncols())).into_owned();
            let expected = padded_row(&ctx.base, op.ncols());
            entries.push(CheckEntry::new(
                "adjoint_extends_base",
                operator_norm(&(top - expected)) / scale,
                Window::Subspace,
                tol,
            ));
            intertwine_entries(&mut entries, op, &ctx.left, &ctx.right, dom, base_norm, tol);
        }
        LiftEngine::Unitary => {
            let x0 = op.view((0, 0), (cod.base_dim, dom.base_dim)).into_owned();
            let x0_norm = operator_norm(&x0);
            coiso_chain_entries(
                &mut entries,
                op,
                &ctx.left,
                &ctx.right,
                dom,
                cod,
                x0_norm,
                tol,
            );
            // S|_{K+} = S+ and nothing below the half-space in that column.
            let first_col = op.view((0, 0), (op.nrows(), dom.base_dim)).into_owned();
            let expected = zero_pad(&x0, op.nrows(), dom.base_dim);
            entries.push(CheckEntry::new(
                "extends_halfspace",
                operator_norm(&(first_col - expected)) / scale,
                Window::Subspace,
                tol,
            ));
            let t1 = ctx.aux.as_ref().expect("unitary context carries T1");
            let nb = t1.nrows();
            let compressed = op.view((0, 0), (nb, nb)).into_owned();
            entries.push(CheckEntry::new(
                "compress_base",
                operator_norm(&(compressed - &ctx.base)) / scale,
                Window::Full,
                tol,
            ));
            // Power compressions on both sides: T1^k T2 = P_H U_q^k S|_H
            // and T2 T1^k = P_H S U^k|_H.
            let u_q = &ctx.right * (cr(1.0) / ctx.q);
            let mut uq_pow_s = op.clone();
            let mut s_u_pow = op.clone();
            let mut t1_pow = MatrixOp::identity(nb, nb);
            for k in 0..=dom.levels {
                let lhs = uq_pow_s.view((0, 0), (nb, nb)).into_owned();
                let lhs_target = &t1_pow * &ctx.base;
                entries.push(CheckEntry::new(
                    format!("power_left[{k}]"),
                    operator_norm(&(lhs - lhs_target)) / scale,
                    Window::Full,
                    tol,
                ));
                let rhs = s_u_pow.view((0, 0), (nb, nb)).into_owned();
                let rhs_target = &ctx.base * &t1_pow;
                entries.push(CheckEntry::new(
                    format!("power_right[{k}]"),
                    operator_norm(&(rhs - rhs_target)) / scale,
                    Window::Full,
                    tol,
                ));
                uq_pow_s = &u_q * uq_pow_s;
                s_u_pow = &s_u_pow * &ctx.left;
                t1_pow = &t1_pow * t1;
            }
        }
    }

    let norm_claim = NormClaim { achieved, target };
    entries.push(CheckEntry::new(
        "norm_equals_base",
        norm_claim.residual(),
        Window::Full,
        tol,
    ));
    (entries, norm_claim)
}
