//! Generators of q-commuting test data.
//!
//! The two closed-form families (the 2x2 Jordan-type pair and the finite
//! Hardy-shift model), a general q-commutant solver via the vectorized
//! linear map `X -> T X - q X T`, and seeded random contractions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::lifting::QPair;
use crate::linalg::{c, cr, operator_norm, MatrixOp, Scalar, Tolerances};

/// Which generator family to draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Jordan,
    Hardy,
    Random,
    Custom,
}

/// Parameters for the random generators.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct GeneratorSpec {
    pub family: Family,
    pub dim: usize,
    pub q: Scalar,
    pub seed: u64,
    /// Force the norm to at most `1 - margin`.
    pub strict: bool,
    pub margin: f64,
}

impl GeneratorSpec {
    pub fn new(family: Family, dim: usize, q: Scalar, seed: u64) -> Self {
        GeneratorSpec {
            family,
            dim,
            q,
            seed,
            strict: false,
            margin: 1e-2,
        }
    }
}

/// The 2x2 Jordan-type family together with its rescaling record: the raw
/// `T1 = [[a, 0], [b, qa]]` is q-commuting with `T2 = [[0, 0], [d, 0]]`
/// for every choice of scalars, and the pair stores `T1 / max(1, ||T1||)`
/// so downstream lifting hypotheses hold.
#[derive(Debug, Clone)]
pub struct JordanExample {
    pub pair: QPair,
    /// The unscaled upper operator.
    pub t1_raw: MatrixOp,
    /// Factor by which `t1_raw` was divided (at least 1).
    pub scale: f64,
}

/// q-commuting 2x2 pair `T1 = [[a, 0], [b, qa]]`, `T2 = [[0, 0], [d, 0]]`,
/// rescaled so `T1` is a contraction. The q-commutation identity is exact
/// in exact arithmetic and scale-invariant in `T1`.
pub fn example_pair_jordan(
    a: Scalar,
    b: Scalar,
    d: Scalar,
    q: Scalar,
    tol: &Tolerances,
) -> Result<JordanExample> {
    if q == cr(0.0) {
        return Err(Error::QOutOfRange {
            q: format!("{q}"),
            requirement: "q != 0".into(),
        });
    }
    let mut t1_raw = MatrixOp::zeros(2, 2);
    t1_raw[(0, 0)] = a;
    t1_raw[(1, 0)] = b;
    t1_raw[(1, 1)] = q * a;
    let mut t2 = MatrixOp::zeros(2, 2);
    t2[(1, 0)] = d;

    let scale = operator_norm(&t1_raw).max(1.0);
    let t1 = &t1_raw * cr(1.0 / scale);
    let pair = QPair::new(t1, t2, q, tol)?;
    Ok(JordanExample {
        pair,
        t1_raw,
        scale,
    })
}

/// Finite Hardy-shift model: `T2` the lower shift on `C^n` and
/// `T1 = diag(1, q, …, q^{n-1})`, q-commuting entrywise. Requires
/// `|q| <= 1` so `T1` is a contraction, and `n >= 2`.
pub fn hardy_pair_truncated(q: Scalar, n: usize, tol: &Tolerances) -> Result<QPair> {
    if q.norm() > 1.0 {
        return Err(Error::QOutOfRange {
            q: format!("{q}"),
            requirement: "|q| <= 1 so the composition operator is a contraction".into(),
        });
    }
    if n < 2 {
        return Err(Error::InvalidArgument(
            "Hardy truncation needs dimension at least 2".into(),
        ));
    }
    let mut t1 = MatrixOp::zeros(n, n);
    let mut power = cr(1.0);
    for i in 0..n {
        t1[(i, i)] = power;
        power *= q;
    }
    let mut t2 = MatrixOp::zeros(n, n);
    for i in 0..n - 1 {
        t2[(i + 1, i)] = cr(1.0);
    }
    QPair::new(t1, t2, q, tol)
}

/// Orthonormal basis (in the trace inner product) of the q-commutant
/// `{X : T X = q X T}`, computed as the null space of the vectorized map
/// `I ⊗ T - q T^t ⊗ I`. Singular values at or below `rank_tol * σ_max`
/// count as zero. An empty list means the q-commutant is trivial.
pub fn q_commutant_basis(t: &MatrixOp, q: Scalar, tol: &Tolerances) -> Result<Vec<MatrixOp>> {
    if t.nrows() != t.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "q-commutant of a {}x{} matrix",
            t.nrows(),
            t.ncols()
        )));
    }
    if q == cr(0.0) {
        return Err(Error::QOutOfRange {
            q: format!("{q}"),
            requirement: "q != 0".into(),
        });
    }
    let n = t.nrows();
    // Column-major vectorization: vec(T X) = (I ⊗ T) vec(X) and
    // vec(X T) = (T^t ⊗ I) vec(X).
    let mut map = MatrixOp::zeros(n * n, n * n);
    for col_block in 0..n {
        map.view_mut((col_block * n, col_block * n), (n, n))
            .copy_from(t);
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                map[(j * n + k, i * n + k)] -= q * t[(i, j)];
            }
        }
    }
    let (_, sigma, v_t) = crate::linalg::svd(&map)?;
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let cutoff = tol.rank_tol * smax;
    let mut basis = Vec::new();
    for (k, &s) in sigma.iter().enumerate() {
        if s <= cutoff {
            let row = v_t.row(k);
            let x = MatrixOp::from_fn(n, n, |i, j| row[j * n + i].conj());
            basis.push(x);
        }
    }
    Ok(basis)
}

fn ginibre(rng: &mut ChaCha8Rng, n: usize) -> MatrixOp {
    MatrixOp::from_fn(n, n, |_, _| {
        c(StandardNormal.sample(rng), StandardNormal.sample(rng))
    })
}

/// Seeded random contraction: a complex Ginibre draw rescaled to norm 1
/// (or `1 - margin` when strict). Deterministic under the seed.
pub fn random_contraction(spec: &GeneratorSpec) -> MatrixOp {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    random_contraction_with(&mut rng, spec.dim, spec.strict, spec.margin)
}

pub(crate) fn random_contraction_with(
    rng: &mut ChaCha8Rng,
    dim: usize,
    strict: bool,
    margin: f64,
) -> MatrixOp {
    let g = ginibre(rng, dim);
    let target = if strict { 1.0 - margin } else { 1.0 };
    let norm = operator_norm(&g);
    if norm == 0.0 {
        return g;
    }
    &g * cr(target / norm)
}

/// Random unitary from the QR factorization of a Ginibre draw, with the
/// phase convention that makes R's diagonal nonnegative.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> MatrixOp {
    let g = ginibre(rng, n);
    let qr = g.qr();
    let mut u = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / cr(d.norm());
            u.column_mut(j).scale_mut(1.0);
            for i in 0..n {
                u[(i, j)] *= phase;
            }
        }
    }
    u
}

/// Spectral data used when sampling q-commuting pairs: a diagonalizable
/// `T1` whose spectrum contains forced ratios `λ_i = q λ_j`, so the
/// q-commutant is nontrivial by construction.
pub struct SampledPair {
    pub pair: QPair,
    /// Number of eigenvalue pairs `(i, j)` with `λ_i = q λ_j` planted in
    /// the spectrum.
    pub planted_pairs: usize,
}

/// Draws a q-commuting pair with a nontrivial commutant: `T1` is a
/// unitarily diagonalized matrix with spectrum containing `q`-ratio pairs,
/// `T2` a random combination of the computed q-commutant basis, rescaled
/// to the target norm. The scalar `q` cycles through unimodular, small and
/// large moduli (always inside `|q| <= 1/||T1||`).
pub fn random_qpair(
    dim: usize,
    seed: u64,
    t2_norm: f64,
    tol: &Tolerances,
) -> Result<SampledPair> {
    assert!(dim >= 2, "need dimension at least 2");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Cycle |q| over values below, at, and above 1.
    let modulus = match seed % 4 {
        0 => 1.0,
        1 => 0.5,
        2 => 1.35,
        _ => 0.8,
    };
    let angle: f64 = StandardNormal.sample(&mut rng);
    let q = c(modulus * angle.cos(), modulus * angle.sin());

    // Spectrum with well-separated magnitudes and one or two planted
    // q-ratio pairs.
    let mut eigs: Vec<Scalar> = Vec::with_capacity(dim);
    for k in 0..dim {
        let phase: f64 = StandardNormal.sample(&mut rng);
        let radius = 0.4 + 0.5 * ((k as f64) + 1.0) / (dim as f64);
        eigs.push(c(radius * phase.cos(), radius * phase.sin()));
    }
    let planted = if dim >= 4 { 2 } else { 1 };
    for p in 0..planted {
        let j = 2 * p + 1;
        eigs[j] = q * eigs[2 * p];
    }

    let u = random_unitary(&mut rng, dim);
    let diag = MatrixOp::from_fn(dim, dim, |i, j| if i == j { eigs[i] } else { cr(0.0) });
    let mut t1 = &u * diag * u.adjoint();

    // Rescale so that T1 is a contraction and |q| ||T1|| <= 1; scaling
    // preserves both the spectrum ratios and the q-commutant.
    let cap = (1.0 / q.norm()).min(1.0) * 0.95;
    let norm = operator_norm(&t1);
    t1 *= cr(cap / norm);

    let basis = q_commutant_basis(&t1, q, tol)?;
    assert!(
        !basis.is_empty(),
        "planted spectrum must give a nontrivial q-commutant"
    );
    let mut t2 = MatrixOp::zeros(dim, dim);
    for x in &basis {
        t2 += x * c(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
    }
    let t2_scale = operator_norm(&t2);
    if t2_scale > 0.0 {
        t2 *= cr(t2_norm / t2_scale);
    }
    Ok(SampledPair {
        pair: QPair::new(t1, t2, q, tol)?,
        planted_pairs: planted,
    })
}

/// Draws a q-intertwining instance `A T1 = q T2 A` with `|q| = 1`, `A` a
/// strict contraction, by planting matched spectra in `T1` and `T2` and
/// solving the vectorized intertwining equation.
pub fn random_intertwining_instance(
    dim: usize,
    seed: u64,
    a_norm: f64,
    tol: &Tolerances,
) -> Result<(MatrixOp, MatrixOp, MatrixOp, Scalar)> {
    assert!(dim >= 2, "need dimension at least 2");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let angle: f64 = StandardNormal.sample(&mut rng);
    let q = c(angle.cos(), angle.sin());

    let mut eigs1: Vec<Scalar> = Vec::with_capacity(dim);
    let mut eigs2: Vec<Scalar> = Vec::with_capacity(dim);
    for k in 0..dim {
        let phase: f64 = StandardNormal.sample(&mut rng);
        let radius = 0.3 + 0.5 * ((k as f64) + 1.0) / (dim as f64);
        eigs2.push(c(radius * phase.cos(), radius * phase.sin()));
        let phase1: f64 = StandardNormal.sample(&mut rng);
        eigs1.push(c(0.6 * phase1.cos(), 0.6 * phase1.sin()));
    }
    // Plant μ_i = q ν_i so the intertwining equation A T1 = q T2 A has
    // nontrivial solutions.
    eigs1[0] = q * eigs2[0];
    if dim >= 3 {
        eigs1[1] = q * eigs2[1];
    }

    let u1 = random_unitary(&mut rng, dim);
    let u2 = random_unitary(&mut rng, dim);
    let d1 = MatrixOp::from_fn(dim, dim, |i, j| if i == j { eigs1[i] } else { cr(0.0) });
    let d2 = MatrixOp::from_fn(dim, dim, |i, j| if i == j { eigs2[i] } else { cr(0.0) });
    let t1 = &u1 * d1 * u1.adjoint();
    let t2 = &u2 * d2 * u2.adjoint();

    // Null space of A -> A T1 - q T2 A via vectorization:
    // (T1^t ⊗ I - q I ⊗ T2) vec(A) = 0.
    let n2 = dim * dim;
    let mut map = MatrixOp::zeros(n2, n2);
    for i in 0..dim {
        for j in 0..dim {
            for k in 0..dim {
                map[(j * dim + k, i * dim + k)] += t1[(i, j)];
            }
        }
    }
    for col_block in 0..dim {
        for i in 0..dim {
            for j in 0..dim {
                map[(col_block * dim + i, col_block * dim + j)] -= q * t2[(i, j)];
            }
        }
    }
    let (_, sigma, v_t) = crate::linalg::svd(&map)?;
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let mut a = MatrixOp::zeros(dim, dim);
    let mut found = 0;
    for (k, &s) in sigma.iter().enumerate() {
        if s <= tol.rank_tol * smax {
            let row = v_t.row(k);
            let x = MatrixOp::from_fn(dim, dim, |i, j| row[j * dim + i].conj());
            a += x * c(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
            found += 1;
        }
    }
    assert!(found > 0, "planted spectra must give solutions");
    let norm = operator_norm(&a);
    a *= cr(a_norm / norm);
    Ok((a, t1, t2, q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jordan_pair_matches_displays() {
        let tol = Tolerances::default();
        for q in [c(0.0, 1.0), cr(2.0), cr(0.5)] {
            let ex = example_pair_jordan(cr(1.0), cr(0.5), cr(0.25), q, &tol).unwrap();
            let prod12 = &ex.t1_raw * &ex.pair.t2;
            let prod21 = &ex.pair.t2 * &ex.t1_raw;
            // T1 T2 = [[0,0],[q/4,0]] and T2 T1 = [[0,0],[1/4,0]], exactly.
            assert_eq!(prod12[(0, 0)], cr(0.0));
            assert_eq!(prod12[(0, 1)], cr(0.0));
            assert_eq!(prod12[(1, 1)], cr(0.0));
            assert!((prod12[(1, 0)] - q * cr(0.25)).norm() <= 1e-15);
            assert!((prod21[(1, 0)] - cr(0.25)).norm() <= 1e-15);
            assert!(operator_norm(&ex.pair.t1) <= 1.0 + 1e-12);
            assert!(ex.pair.commutation_residual() <= 1e-14);
        }

        // d = 0 gives the zero operator, q-commuting for every q.
        let ex = example_pair_jordan(cr(1.0), cr(0.5), cr(0.0), cr(3.0), &tol).unwrap();
        assert_eq!(operator_norm(&ex.pair.t2), 0.0);

        // a = 0 kills both products.
        let ex = example_pair_jordan(cr(0.0), cr(0.5), cr(0.25), cr(2.0), &tol).unwrap();
        assert_eq!(operator_norm(&(&ex.t1_raw * &ex.pair.t2)), 0.0);
        assert_eq!(operator_norm(&(&ex.pair.t2 * &ex.t1_raw)), 0.0);
    }

    #[test]
    fn hardy_pair_is_exactly_q_commuting() {
        let tol = Tolerances::default();
        let pair = hardy_pair_truncated(cr(1.0), 3, &tol).unwrap();
        assert!(operator_norm(&(&pair.t1 - MatrixOp::identity(3, 3))) < 1e-15);

        let pair = hardy_pair_truncated(c(0.0, 1.0), 3, &tol).unwrap();
        assert!((pair.t1[(1, 1)] - c(0.0, 1.0)).norm() < 1e-15);
        assert!((pair.t1[(2, 2)] - cr(-1.0)).norm() < 1e-15);
        assert!(pair.commutation_residual() <= 1e-15);

        let pair = hardy_pair_truncated(cr(0.5), 4, &tol).unwrap();
        assert!(pair.commutation_residual() <= 1e-15);

        assert!(matches!(
            hardy_pair_truncated(cr(1.5), 3, &tol),
            Err(Error::QOutOfRange { .. })
        ));
    }

    #[test]
    fn commutant_basis_dimensions() {
        let tol = Tolerances::default();
        let id = MatrixOp::identity(3, 3);
        assert_eq!(q_commutant_basis(&id, cr(1.0), &tol).unwrap().len(), 9);
        assert_eq!(q_commutant_basis(&id, cr(2.0), &tol).unwrap().len(), 0);

        // T = diag(1, q) with q not a root of unity: only the (2,1) entry
        // survives.
        let q = c(0.3, 0.4);
        let t = MatrixOp::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => cr(1.0),
            (1, 1) => q,
            _ => cr(0.0),
        });
        let basis = q_commutant_basis(&t, q, &tol).unwrap();
        assert_eq!(basis.len(), 1);
        let x = &basis[0];
        assert!(x[(1, 0)].norm() > 0.99);
        for (i, j) in [(0, 0), (0, 1), (1, 1)] {
            assert!(x[(i, j)].norm() < 1e-10);
        }
    }

    #[test]
    fn commutant_basis_is_orthonormal_and_commutes() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let q = c(0.6, 0.8);
        let u = random_unitary(&mut rng, 4);
        let eigs = [cr(0.9), q * cr(0.9), cr(0.3), q * cr(0.3)];
        let d = MatrixOp::from_fn(4, 4, |i, j| if i == j { eigs[i] } else { cr(0.0) });
        let t = &u * d * u.adjoint();
        let basis = q_commutant_basis(&t, q, &tol).unwrap();
        assert_eq!(basis.len(), 2);
        for (i, x) in basis.iter().enumerate() {
            let residual = operator_norm(&(&t * x - (x * &t) * q));
            assert!(residual < 1e-10);
            for (j, y) in basis.iter().enumerate() {
                let inner: Scalar = (x.adjoint() * y).trace();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((inner - cr(expected)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn random_contraction_is_deterministic_and_bounded() {
        let spec = GeneratorSpec::new(Family::Random, 4, cr(1.0), 42);
        let a = random_contraction(&spec);
        let b = random_contraction(&spec);
        assert_eq!(a, b);
        assert!(operator_norm(&a) <= 1.0 + 1e-12);

        let strict = GeneratorSpec {
            strict: true,
            ..spec
        };
        let m = random_contraction(&strict);
        assert!(operator_norm(&m) <= 0.99 + 1e-12);

        let tiny = GeneratorSpec::new(Family::Random, 1, cr(1.0), 3);
        let s = random_contraction(&tiny);
        assert!(s[(0, 0)].norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn random_qpair_is_well_formed() {
        let tol = Tolerances::default();
        for seed in 0..12 {
            let sampled = random_qpair(2 + (seed as usize) % 4, seed, 0.8, &tol).unwrap();
            let pair = &sampled.pair;
            assert!(pair.commutation_residual() <= 1e-12);
            assert!(operator_norm(&pair.t1) <= 1.0 + 1e-12);
            assert!(pair.q.norm() * operator_norm(&pair.t1) <= 1.0 + 1e-12);
            assert!((operator_norm(&pair.t2) - 0.8).abs() < 1e-10);
        }
    }

    #[test]
    fn random_intertwining_instance_is_well_formed() {
        let tol = Tolerances::default();
        for seed in 0..8 {
            let (a, t1, t2, q) = random_intertwining_instance(3, seed, 0.7, &tol).unwrap();
            assert!((q.norm() - 1.0).abs() < 1e-12);
            let residual = operator_norm(&(&a * &t1 - (&t2 * &a) * q));
            assert!(residual < 1e-10 * (1.0 + operator_norm(&t1)));
            assert!((operator_norm(&a) - 0.7).abs() < 1e-12);
            assert!(operator_norm(&t1) <= 1.0 + 1e-12);
            assert!(operator_norm(&t2) <= 1.0 + 1e-12);
        }
    }
}
