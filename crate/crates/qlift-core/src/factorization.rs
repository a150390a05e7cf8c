//! Completion and factorization solvers.
//!
//! These are the workhorses behind the lifting constructions: the Douglas
//! lemma
//! (`A = BZ` solvable with a contraction `Z` iff `AA* <= BB*`), its
//! two-term variant, the central Parrott completion of a 2x2 block matrix
//! with one free corner, the dual-Parrott simultaneous extension, and the
//! lower-triangular contraction completion through defect operators.
//!
//! Range inclusions become rank decisions here, so every solve goes through
//! the tolerance-aware pseudoinverse.

use crate::dilation::ChainSpace;
use crate::error::{Error, Result};
use crate::lifting::{LiftContext, LiftEngine, LiftResult};
use crate::linalg::{
    self, cr, defect, min_eigenvalue, operator_norm, pinv, MatrixOp, Side, Subspace, Tolerances,
};


/// Solves `A = B Z` for a contraction `Z`, which exists iff `AA* <= BB*`.
/// Returns the minimal solution `Z = pinv(B) A`, extended by zero off the
/// range of `B*`.
pub fn douglas_solve(a: &MatrixOp, b: &MatrixOp, tol: &Tolerances) -> Result<MatrixOp> {
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "Douglas data must share a codomain: A is {}x{}, B is {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let gap = b * b.adjoint() - a * a.adjoint();
    let min_eig = min_eigenvalue(&gap)?;
    if min_eig < -tol.psd_tol {
        return Err(Error::OrderViolated { min_eig });
    }
    let b_pinv = pinv(b, tol)?;
    let mut z = &b_pinv * a;
    // One step of iterative refinement tightens the factorization near the
    // feasibility boundary, where the stacked data is badly conditioned.
    z += &b_pinv * (a - b * &z);
    Ok(z)
}

/// Solves `A1 Z1 + A2 Z2 = A0` with `Z1* Z1 + Z2* Z2 <= I`, which is
/// feasible iff `A0 A0* <= A1 A1* + A2 A2*`. Implemented by stacking
/// `B = [A1 A2]` and taking the minimal Douglas solution.
pub fn two_term_douglas(
    a0: &MatrixOp,
    a1: &MatrixOp,
    a2: &MatrixOp,
    tol: &Tolerances,
) -> Result<(MatrixOp, MatrixOp)> {
    if a0.nrows() != a1.nrows() || a0.nrows() != a2.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "two-term Douglas data must share a codomain: {}x{}, {}x{}, {}x{}",
            a0.nrows(),
            a0.ncols(),
            a1.nrows(),
            a1.ncols(),
            a2.nrows(),
            a2.ncols()
        )));
    }
    let stacked = linalg::hstack(a1, a2)?;
    let z = douglas_solve(a0, &stacked, tol)?;
    let z1 = z.view((0, 0), (a1.ncols(), a0.ncols())).into_owned();
    let z2 = z
        .view((a1.ncols(), 0), (a2.ncols(), a0.ncols()))
        .into_owned();
    Ok((z1, z2))
}

/// Central Parrott completion of `[[A, B], [C, D]]` with `D` free.
///
/// Returns `(D, mu)` where `mu = max(||[A; C]||, ||[A, B]||)` is the least
/// achievable norm, and `D` is the central completion
/// `D = -mu * W A'* V` with `W`, `V` the minimal Douglas solutions of
/// `C' = W D_{A'}` and `B' = D_{A'*} V` for the blocks scaled by `1/mu`.
pub fn parrott_complete(
    a: &MatrixOp,
    b: &MatrixOp,
    c: &MatrixOp,
    tol: &Tolerances,
) -> Result<(MatrixOp, f64)> {
    if a.nrows() != b.nrows() || a.ncols() != c.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "Parrott blocks are inconsistent: A {}x{}, B {}x{}, C {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols(),
            c.nrows(),
            c.ncols()
        )));
    }
    let col = linalg::vstack(a, c)?;
    let row = linalg::hstack(a, b)?;
    let mu = operator_norm(&col).max(operator_norm(&row));
    if mu == 0.0 {
        return Ok((MatrixOp::zeros(c.nrows(), b.ncols()), 0.0));
    }
    let inv_mu = cr(1.0 / mu);
    let a_s = a * inv_mu;
    let b_s = b * inv_mu;
    let c_s = c * inv_mu;
    let d_right = defect(&a_s, Side::Right, tol)?;
    let d_left = defect(&a_s, Side::Left, tol)?;
    let w = &c_s * pinv(&d_right, tol)?;
    let v = pinv(&d_left, tol)? * &b_s;
    let d = -(&w * a_s.adjoint() * &v) * cr(mu);
    Ok((d, mu))
}

/// Data for a dual-Parrott extension: subspaces `H ⊆ K`, `H' ⊆ K'`, a map
/// `X: H -> K'` and a map `X': H' -> K`, subject to the pairing identity
/// `<X h, h'> = <h, X' h'>`.
#[derive(Debug, Clone)]
pub struct DualParrottProblem {
    h: Subspace,
    hp: Subspace,
    x: MatrixOp,
    xp: MatrixOp,
}

impl DualParrottProblem {
    /// Validates dimensions and the pairing identity (as the basis-matrix
    /// identity `B_{H'}* X = X'* B_H`, within `residual_tol` after
    /// normalization).
    pub fn new(
        h: Subspace,
        hp: Subspace,
        x: MatrixOp,
        xp: MatrixOp,
        tol: &Tolerances,
    ) -> Result<Self> {
        if x.nrows() != hp.ambient_dim() || x.ncols() != h.dim() {
            return Err(Error::DimensionMismatch(format!(
                "X is {}x{}, expected {}x{}",
                x.nrows(),
                x.ncols(),
                hp.ambient_dim(),
                h.dim()
            )));
        }
        if xp.nrows() != h.ambient_dim() || xp.ncols() != hp.dim() {
            return Err(Error::DimensionMismatch(format!(
                "X' is {}x{}, expected {}x{}",
                xp.nrows(),
                xp.ncols(),
                h.ambient_dim(),
                hp.dim()
            )));
        }
        let problem = DualParrottProblem { h, hp, x, xp };
        let residual = problem.compatibility_residual();
        if residual > tol.residual_tol {
            return Err(Error::Incompatible { residual });
        }
        Ok(problem)
    }

    pub fn h(&self) -> &Subspace {
        &self.h
    }

    pub fn hp(&self) -> &Subspace {
        &self.hp
    }

    pub fn x(&self) -> &MatrixOp {
        &self.x
    }

    pub fn xp(&self) -> &MatrixOp {
        &self.xp
    }

    /// `||B_{H'}* X - X'* B_H|| / (1 + max(||X||, ||X'||))`.
    pub fn compatibility_residual(&self) -> f64 {
        let gap = self.hp.basis().adjoint() * &self.x - self.xp.adjoint() * self.h.basis();
        operator_norm(&gap) / (1.0 + operator_norm(&self.x).max(operator_norm(&self.xp)))
    }
}

/// Simultaneous extension: `Y: K -> K'` with `Y|_H = X`, `Y*|_{H'} = X'`,
/// and `||Y|| = max(||X||, ||X'||)`.
///
/// The known blocks in the bases of `H', H'^⊥` against `H, H^⊥` are
/// `A = P_{H'} X`, `C = P_{H'^⊥} X`, `B = (P_{H^⊥} X')*`; the free corner
/// comes from the central Parrott completion.
pub fn dual_parrott_extend(p: &DualParrottProblem, tol: &Tolerances) -> Result<LiftResult> {
    let residual = p.compatibility_residual();
    if residual > tol.residual_tol {
        return Err(Error::Incompatible { residual });
    }
    let h_comp = p.h.complement()?;
    let hp_comp = p.hp.complement()?;

    let a = p.hp.basis().adjoint() * &p.x;
    let c = hp_comp.basis().adjoint() * &p.x;
    let b = (h_comp.basis().adjoint() * &p.xp).adjoint();
    let (d, _mu) = parrott_complete(&a, &b, &c, tol)?;

    let inner = linalg::assemble_blocks(&[
        vec![linalg::Block::Mat(&a), linalg::Block::Mat(&b)],
        vec![linalg::Block::Mat(&c), linalg::Block::Mat(&d)],
    ])?;
    let cod_basis = linalg::hstack(p.hp.basis(), hp_comp.basis())?;
    let dom_basis = linalg::hstack(p.h.basis(), h_comp.basis())?;
    let y = &cod_basis * inner * dom_basis.adjoint();

    let domain_chain = ChainSpace {
        base_dim: p.h.dim(),
        block_dim: h_comp.dim(),
        levels: if h_comp.dim() == 0 { 0 } else { 1 },
    };
    let codomain_chain = ChainSpace {
        base_dim: p.hp.dim(),
        block_dim: hp_comp.dim(),
        levels: if hp_comp.dim() == 0 { 0 } else { 1 },
    };
    let context = LiftContext {
        engine: LiftEngine::DualParrott,
        left: MatrixOp::zeros(0, 0),
        right: MatrixOp::zeros(0, 0),
        q: cr(1.0),
        base: p.x.clone(),
        aux: None,
        problem: Some(p.clone()),
    };
    let (certificate, norm_claim) = crate::lifting::evaluate_lift_checks(
        &y,
        &context,
        &domain_chain,
        &codomain_chain,
        tol,
    );
    Ok(LiftResult {
        op: y,
        domain_chain,
        codomain_chain,
        certificate,
        norm_claim,
        context,
    })
}

/// Builds the lower-triangular contraction `Y = [[T1, 0], [X, T2]]` with
/// `X = D_{T2*} C D_{T1}` from a contraction parameter `C`. Returns
/// `(X, Y)`.
pub fn triangular_complete(
    t1: &MatrixOp,
    t2: &MatrixOp,
    c: &MatrixOp,
    tol: &Tolerances,
) -> Result<(MatrixOp, MatrixOp)> {
    for m in [t1, t2, c] {
        let norm = operator_norm(m);
        if norm > 1.0 + tol.psd_tol {
            return Err(Error::NotContraction { norm });
        }
    }
    if c.nrows() != t2.nrows() || c.ncols() != t1.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "parameter is {}x{}, expected {}x{}",
            c.nrows(),
            c.ncols(),
            t2.nrows(),
            t1.ncols()
        )));
    }
    let d1 = defect(t1, Side::Right, tol)?;
    let d2s = defect(t2, Side::Left, tol)?;
    let x = &d2s * c * &d1;
    let y = linalg::assemble_blocks(&[
        vec![linalg::Block::Mat(t1), linalg::Block::Zero],
        vec![linalg::Block::Mat(&x), linalg::Block::Mat(t2)],
    ])?;
    Ok((x, y))
}

/// Inverse of [`triangular_complete`]: given a corner `X` for which
/// `[[T1, 0], [X, T2]]` is a contraction, recovers a contraction `C` with
/// `X = D_{T2*} C D_{T1}` by projecting onto the defect ranges with two
/// pseudoinverse applications.
pub fn triangular_extract(
    t1: &MatrixOp,
    t2: &MatrixOp,
    x: &MatrixOp,
    tol: &Tolerances,
) -> Result<MatrixOp> {
    let y = linalg::assemble_blocks(&[
        vec![linalg::Block::Mat(t1), linalg::Block::Zero],
        vec![linalg::Block::Mat(x), linalg::Block::Mat(t2)],
    ])?;
    let norm = operator_norm(&y);
    if norm > 1.0 + tol.psd_tol {
        return Err(Error::NotCompletable { norm });
    }
    let d1 = defect(t1, Side::Right, tol)?;
    let d2s = defect(t2, Side::Left, tol)?;
    let c = pinv(&d2s, tol)? * x * pinv(&d1, tol)?;
    let resynth = &d2s * &c * &d1;
    let residual = operator_norm(&(resynth - x));
    if residual > tol.residual_tol * (1.0 + operator_norm(x)) {
        return Err(Error::RangeViolation { residual });
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, selector, vstack};
    use crate::verify::Window;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn randn(rng: &mut ChaCha8Rng) -> f64 {
        StandardNormal.sample(rng)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, cdim: usize) -> MatrixOp {
        MatrixOp::from_fn(r, cdim, |_, _| c(randn(rng), randn(rng)))
    }

    fn random_contraction(rng: &mut ChaCha8Rng, r: usize, cdim: usize, target: f64) -> MatrixOp {
        let g = random_matrix(rng, r, cdim);
        &g * cr(target / operator_norm(&g))
    }

    fn scalar(v: f64) -> MatrixOp {
        MatrixOp::from_element(1, 1, cr(v))
    }

    #[test]
    fn douglas_examples() {
        let tol = Tolerances::default();
        let id = MatrixOp::identity(2, 2);
        let z = douglas_solve(&id, &id, &tol).unwrap();
        assert!(operator_norm(&(z - &id)) < 1e-12);

        let a = MatrixOp::from_diagonal(&nalgebra::DVector::from_vec(vec![cr(0.5), cr(1.0 / 3.0)]));
        let b = MatrixOp::from_diagonal(&nalgebra::DVector::from_vec(vec![cr(1.0), cr(0.5)]));
        let z = douglas_solve(&a, &b, &tol).unwrap();
        let expected =
            MatrixOp::from_diagonal(&nalgebra::DVector::from_vec(vec![cr(0.5), cr(2.0 / 3.0)]));
        assert!(operator_norm(&(z - expected)) < 1e-12);

        let out = douglas_solve(&scalar(1.0), &scalar(0.5), &tol);
        assert!(matches!(out, Err(Error::OrderViolated { .. })));
    }

    #[test]
    fn douglas_minimal_solution_on_feasible_instances() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for round in 0..40 {
            // Vary the rank of B through an inner factorization.
            let k = 4;
            let rank = 1 + round % 4;
            let b = random_matrix(&mut rng, k, rank) * random_matrix(&mut rng, rank, 4);
            let z0 = random_contraction(&mut rng, 4, 3, 0.9);
            let a = &b * &z0;
            let z = douglas_solve(&a, &b, &tol).unwrap();
            assert!(operator_norm(&z) <= 1.0 + 1e-8);
            let residual = operator_norm(&(&b * &z - &a));
            assert!(residual <= 1e-8 * (1.0 + operator_norm(&a)));
        }
    }

    #[test]
    fn two_term_examples() {
        let tol = Tolerances::default();
        let id = MatrixOp::identity(2, 2);
        let zero = MatrixOp::zeros(2, 2);
        let (z1, z2) = two_term_douglas(&id, &id, &zero, &tol).unwrap();
        assert!(operator_norm(&(z1 - &id)) < 1e-12);
        assert!(operator_norm(&z2) < 1e-12);

        let (z1, z2) = two_term_douglas(&zero, &id, &id, &tol).unwrap();
        assert!(operator_norm(&z1) < 1e-12);
        assert!(operator_norm(&z2) < 1e-12);
    }

    #[test]
    fn two_term_feasible_instances() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(103);
        for _ in 0..25 {
            let a1 = random_matrix(&mut rng, 3, 4);
            let a2 = random_matrix(&mut rng, 3, 2);
            // Feasible by construction: [C1; C2] a strict contraction.
            let stacked_c = random_contraction(&mut rng, 6, 3, 0.9);
            let c1 = stacked_c.view((0, 0), (4, 3)).into_owned();
            let c2 = stacked_c.view((4, 0), (2, 3)).into_owned();
            let a0 = &a1 * &c1 + &a2 * &c2;
            let (z1, z2) = two_term_douglas(&a0, &a1, &a2, &tol).unwrap();
            let residual = operator_norm(&(&a1 * &z1 + &a2 * &z2 - &a0));
            assert!(residual <= 1e-8 * (1.0 + operator_norm(&a0)));
            let gram = z1.adjoint() * &z1 + z2.adjoint() * &z2;
            let slack = min_eigenvalue(&(MatrixOp::identity(3, 3) - gram)).unwrap();
            assert!(slack >= -1e-10);
        }
    }

    /// Grid search over the free entry of a real scalar-block Parrott
    /// problem, with three refinement passes of `points` samples each so
    /// the minimum is located to well below 1e-6. Independent of the
    /// pseudoinverse construction.
    fn grid_min_norm(a: f64, b: f64, c0: f64, points: usize) -> f64 {
        let completed_norm = |d: f64| {
            let m = MatrixOp::from_fn(2, 2, |r, cc| match (r, cc) {
                (0, 0) => cr(a),
                (0, 1) => cr(b),
                (1, 0) => cr(c0),
                (1, 1) => cr(d),
                _ => unreachable!(),
            });
            operator_norm(&m)
        };
        let mu = (a * a + c0 * c0).sqrt().max((a * a + b * b).sqrt());
        let mut center = 0.0;
        let mut half_width = 1.2 * mu.max(1e-3);
        let mut best = (f64::INFINITY, 0.0);
        for _ in 0..3 {
            for i in 0..points {
                let d = center - half_width
                    + 2.0 * half_width * (i as f64) / ((points - 1) as f64);
                let norm = completed_norm(d);
                if norm < best.0 {
                    best = (norm, d);
                }
            }
            center = best.1;
            half_width = 4.0 * half_width / (points as f64);
        }
        best.0
    }

    #[test]
    fn parrott_scalar_examples() {
        let tol = Tolerances::default();

        // Zero center: completion vanishes, mu is the larger off block.
        let (d, mu) = parrott_complete(&scalar(0.0), &scalar(0.7), &scalar(0.2), &tol).unwrap();
        assert!(d[(0, 0)].norm() < 1e-14);
        assert!((mu - 0.7).abs() < 1e-14);

        // The classic half case: D = -1/2, completed norm 1/sqrt(2).
        let half = scalar(0.5);
        let (d, mu) = parrott_complete(&half, &half, &half, &tol).unwrap();
        assert!((d[(0, 0)].re + 0.5).abs() < 1e-12);
        assert!((mu - 0.5f64.sqrt()).abs() < 1e-12);
        let completed = MatrixOp::from_fn(2, 2, |r, cc| match (r, cc) {
            (1, 1) => d[(0, 0)],
            _ => cr(0.5),
        });
        let achieved = operator_norm(&completed);
        assert!((achieved - 0.5f64.sqrt()).abs() < 1e-12);
        let oracle = grid_min_norm(0.5, 0.5, 0.5, 400);
        assert!((achieved - oracle).abs() < 1e-6);

        // Unitary center forces zero off blocks and zero completion.
        let (d, mu) = parrott_complete(&scalar(1.0), &scalar(0.0), &scalar(0.0), &tol).unwrap();
        assert!(d[(0, 0)].norm() < 1e-14);
        assert!((mu - 1.0).abs() < 1e-14);
    }

    #[test]
    fn parrott_achieves_grid_minimum() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(107);
        for _ in 0..30 {
            let a = 0.7 * randn(&mut rng);
            let b = 0.7 * randn(&mut rng);
            let c0 = 0.7 * randn(&mut rng);
            let (d, mu) = parrott_complete(&scalar(a), &scalar(b), &scalar(c0), &tol).unwrap();
            let m = MatrixOp::from_fn(2, 2, |r, cc| match (r, cc) {
                (0, 0) => cr(a),
                (0, 1) => cr(b),
                (1, 0) => cr(c0),
                (1, 1) => d[(0, 0)],
                _ => unreachable!(),
            });
            let achieved = operator_norm(&m);
            assert!(achieved <= mu * (1.0 + 1e-10) + 1e-14);
            let oracle = grid_min_norm(a, b, c0, 400);
            assert!((achieved - oracle).abs() <= 1e-6);
        }
    }

    #[test]
    fn dual_parrott_trivial_cases() {
        let tol = Tolerances::default();

        // H = K, H' = {0}: nothing to extend, Y = X.
        let mut rng = ChaCha8Rng::seed_from_u64(109);
        let x = random_matrix(&mut rng, 3, 2);
        let p = DualParrottProblem::new(
            Subspace::full(2),
            Subspace::trivial(3),
            x.clone(),
            MatrixOp::zeros(2, 0),
            &tol,
        )
        .unwrap();
        let ext = dual_parrott_extend(&p, &tol).unwrap();
        assert!(operator_norm(&(&ext.op - &x)) < 1e-12);

        // X = 0, X' = 0 extends to Y = 0.
        let p = DualParrottProblem::new(
            Subspace::new(selector(3, 0, 1), &tol).unwrap(),
            Subspace::new(selector(3, 0, 1), &tol).unwrap(),
            MatrixOp::zeros(3, 1),
            MatrixOp::zeros(3, 1),
            &tol,
        )
        .unwrap();
        let ext = dual_parrott_extend(&p, &tol).unwrap();
        assert!(operator_norm(&ext.op) < 1e-14);
    }

    #[test]
    fn dual_parrott_scalar_reduction() {
        let tol = Tolerances::default();
        // K = K' = C^2, H = H' = span(e1), X = X' = (1/2, 1/2): the
        // extension reduces to the scalar Parrott example with norm
        // 1/sqrt(2).
        let col = vstack(&scalar(0.5), &scalar(0.5)).unwrap();
        let p = DualParrottProblem::new(
            Subspace::new(selector(2, 0, 1), &tol).unwrap(),
            Subspace::new(selector(2, 0, 1), &tol).unwrap(),
            col.clone(),
            col,
            &tol,
        )
        .unwrap();
        let ext = dual_parrott_extend(&p, &tol).unwrap();
        assert!((ext.norm_claim.achieved - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((ext.norm_claim.target - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(ext.passed());
    }

    #[test]
    fn dual_parrott_random_extensions() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(113);
        for _ in 0..25 {
            // Build compatible data from a known full operator Y0.
            let y0 = random_matrix(&mut rng, 5, 4);
            let h = Subspace::from_span(&random_matrix(&mut rng, 4, 2), &tol).unwrap();
            let hp = Subspace::from_span(&random_matrix(&mut rng, 5, 2), &tol).unwrap();
            let x = &y0 * h.basis();
            let xp = y0.adjoint() * hp.basis();
            let p = DualParrottProblem::new(h.clone(), hp.clone(), x.clone(), xp.clone(), &tol)
                .unwrap();
            let ext = dual_parrott_extend(&p, &tol).unwrap();
            assert!(operator_norm(&(&ext.op * h.basis() - &x)) < 1e-12 * (1.0 + operator_norm(&x)));
            assert!(
                operator_norm(&(ext.op.adjoint() * hp.basis() - &xp))
                    < 1e-10 * (1.0 + operator_norm(&xp))
            );
            let bound = operator_norm(&x).max(operator_norm(&xp));
            assert!(operator_norm(&ext.op) <= bound * (1.0 + 1e-8));
        }
    }

    #[test]
    fn dual_parrott_rejects_incompatible_data() {
        let tol = Tolerances::default();
        let x = vstack(&scalar(0.5), &scalar(0.5)).unwrap();
        let xp = vstack(&scalar(-0.5), &scalar(0.5)).unwrap();
        let p = DualParrottProblem::new(
            Subspace::new(selector(2, 0, 1), &tol).unwrap(),
            Subspace::new(selector(2, 0, 1), &tol).unwrap(),
            x,
            xp,
            &tol,
        );
        assert!(matches!(p, Err(Error::Incompatible { .. })));
    }

    #[test]
    fn triangular_complete_examples() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(127);
        let t1 = random_contraction(&mut rng, 3, 3, 0.8);
        let t2 = random_contraction(&mut rng, 3, 3, 0.8);

        let (x, y) = triangular_complete(&t1, &t2, &MatrixOp::zeros(3, 3), &tol).unwrap();
        assert!(operator_norm(&x) < 1e-14);
        assert!(operator_norm(&y) <= 1.0 + 1e-10);

        // Unitary T1 has zero right defect, so X is forced to zero.
        let u = MatrixOp::identity(3, 3);
        let c0 = random_contraction(&mut rng, 3, 3, 1.0);
        let (x, _) = triangular_complete(&u, &t2, &c0, &tol).unwrap();
        assert!(operator_norm(&x) < 1e-12);

        // Zero contractions make the defects identities, so X = C.
        let z = MatrixOp::zeros(3, 3);
        let (x, y) = triangular_complete(&z, &z, &c0, &tol).unwrap();
        assert!(operator_norm(&(&x - &c0)) < 1e-12);
        assert!(operator_norm(&y) <= 1.0 + 1e-10);
    }

    #[test]
    fn triangular_round_trip_and_range_violation() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(131);
        for _ in 0..20 {
            let t1 = random_contraction(&mut rng, 3, 3, 0.85);
            let t2 = random_contraction(&mut rng, 3, 3, 0.85);
            let c0 = random_contraction(&mut rng, 3, 3, 0.9);
            let (x, _) = triangular_complete(&t1, &t2, &c0, &tol).unwrap();
            let c1 = triangular_extract(&t1, &t2, &x, &tol).unwrap();
            let (x2, _) = triangular_complete(&t1, &t2, &c1, &tol).unwrap();
            assert!(operator_norm(&(&x2 - &x)) <= 1e-8 * (1.0 + operator_norm(&x)));
            assert!(operator_norm(&c1) <= 1.0 + 1e-8);
        }

        let x = triangular_extract(
            &MatrixOp::zeros(2, 2),
            &MatrixOp::zeros(2, 2),
            &MatrixOp::zeros(2, 2),
            &tol,
        )
        .unwrap();
        assert!(operator_norm(&x) < 1e-14);

        // Unitary T1 supports no corner at all: a tiny nonzero X slips past
        // the contraction gate but fails the range check.
        let u = MatrixOp::identity(2, 2);
        let t2 = random_contraction(&mut rng, 2, 2, 0.5);
        let tiny = MatrixOp::from_element(2, 2, cr(1e-6));
        let out = triangular_extract(&u, &t2, &tiny, &tol);
        assert!(matches!(out, Err(Error::RangeViolation { .. })));
    }

    #[test]
    fn dual_parrott_certificate_windows() {
        let tol = Tolerances::default();
        let x = vstack(&scalar(0.5), &scalar(0.5)).unwrap();
        let p = DualParrottProblem::new(
            Subspace::new(selector(2, 0, 1), &tol).unwrap(),
            Subspace::new(selector(2, 0, 1), &tol).unwrap(),
            x.clone(),
            x,
            &tol,
        )
        .unwrap();
        let ext = dual_parrott_extend(&p, &tol).unwrap();
        assert!(ext
            .certificate
            .iter()
            .any(|e| e.label == "extends_base" && e.window == Window::Subspace));
    }
}
