//! Certificate evaluation.
//!
//! Every construction in this crate claims a handful of operator identities.
//! A [`Certificate`] records, for each claim, the measured residual, the
//! window it was measured on, and whether it passes the residual budget.
//! Certificates are pure functions of their inputs, so re-running a check
//! reproduces the stored numbers bit for bit.

use std::collections::BTreeMap;

use crate::dilation::{DilationBundle, DilationKind};
use crate::error::{Error, Result};
use crate::lifting::{evaluate_lift_checks, LiftResult};
use crate::linalg::{operator_norm, MatrixOp, Scalar, Tolerances};

/// Where a residual was measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    /// The whole truncated space.
    Full,
    /// All chain blocks except the last; identities are exact there and the
    /// boundary carries the truncation error.
    Interior,
    /// A problem-specific subspace on which the truncated ingredients of
    /// the identity are exact.
    Subspace,
}

/// One verified identity.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CheckEntry {
    pub label: String,
    pub residual: f64,
    pub window: Window,
    pub pass: bool,
}

impl CheckEntry {
    pub fn new(label: impl Into<String>, residual: f64, window: Window, tol: &Tolerances) -> Self {
        CheckEntry {
            label: label.into(),
            residual,
            pass: residual <= tol.residual_tol,
            window,
        }
    }
}

/// A bundle of checks with the tolerances they were measured against and
/// construction metadata.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Certificate {
    pub construction: String,
    pub checks: Vec<CheckEntry>,
    pub tolerances: Tolerances,
    /// Truncation depths and similar shape metadata.
    pub depths: BTreeMap<String, usize>,
    pub condition_numbers: BTreeMap<String, f64>,
    /// Auxiliary measured values that are not pass/fail checks.
    pub metrics: BTreeMap<String, f64>,
}

impl Certificate {
    pub fn new(construction: impl Into<String>, tol: &Tolerances) -> Self {
        Certificate {
            construction: construction.into(),
            checks: Vec::new(),
            tolerances: *tol,
            depths: BTreeMap::new(),
            condition_numbers: BTreeMap::new(),
            metrics: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, entry: CheckEntry) {
        self.checks.push(entry);
    }

    /// True when every check passed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Largest recorded residual.
    pub fn worst_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }
}

/// Residual of the q-commutation identity `T1 T2 = q T2 T1`, normalized by
/// `1 + ||T1|| ||T2||`.
pub fn check_q_commuting(
    t1: &MatrixOp,
    t2: &MatrixOp,
    q: Scalar,
    tol: &Tolerances,
) -> Result<Certificate> {
    if t1.shape() != t2.shape() || t1.nrows() != t1.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "q-commutation of {}x{} and {}x{}",
            t1.nrows(),
            t1.ncols(),
            t2.nrows(),
            t2.ncols()
        )));
    }
    let residual =
        operator_norm(&(t1 * t2 - (t2 * t1) * q)) / (1.0 + operator_norm(t1) * operator_norm(t2));
    let mut cert = Certificate::new("check_q_commuting", tol);
    cert.push(CheckEntry::new(
        "q_commutation",
        residual,
        Window::Full,
        tol,
    ));
    Ok(cert)
}

/// Power-compression residuals `||P_H op^k|_H - source^k||` for
/// `0 <= k <= max_power`, plus the kind-specific defect of the bundle on
/// its interior window. Unitary bundles also check adjoint powers, which
/// play the role of negative powers of the dilation.
pub fn check_dilation_identity(
    b: &DilationBundle,
    max_power: usize,
    tol: &Tolerances,
) -> Result<Certificate> {
    if max_power > b.chain.levels {
        return Err(Error::LevelOutOfRange {
            level: max_power,
            max: b.chain.levels,
        });
    }
    let n = b.chain.base_dim;
    let total = b.chain.total_dim();
    let mut cert = Certificate::new("check_dilation_identity", tol);
    cert.depths.insert("levels".into(), b.chain.levels);
    cert.depths.insert("max_power".into(), max_power);

    let mut power = MatrixOp::identity(total, total);
    let mut source_power = MatrixOp::identity(n, n);
    for k in 0..=max_power {
        let compressed = power.view((0, 0), (n, n)).into_owned();
        let residual = operator_norm(&(compressed - &source_power));
        cert.push(CheckEntry::new(
            format!("compression[{k}]"),
            residual,
            Window::Full,
            tol,
        ));
        power = &b.op * power;
        source_power = &b.source * source_power;
    }
    if b.kind == DilationKind::Unitary {
        let mut power = MatrixOp::identity(total, total);
        let mut source_power = MatrixOp::identity(n, n);
        for k in 0..=max_power {
            let compressed = power.view((0, 0), (n, n)).into_owned();
            let residual = operator_norm(&(compressed - &source_power));
            cert.push(CheckEntry::new(
                format!("compression[-{k}]"),
                residual,
                Window::Full,
                tol,
            ));
            power = b.op.adjoint() * power;
            source_power = b.source.adjoint() * source_power;
        }
    }

    let id = MatrixOp::identity(total, total);
    match b.kind {
        DilationKind::Isometric => {
            if b.chain.levels >= 1 {
                let w = b.chain.projection(b.chain.levels - 1);
                let defect = &w * (b.op.adjoint() * &b.op - &id) * &w;
                cert.push(CheckEntry::new(
                    "isometry_defect",
                    operator_norm(&defect),
                    Window::Interior,
                    tol,
                ));
            }
        }
        DilationKind::CoIsometric => {
            if b.chain.levels >= 1 {
                let w = b.chain.projection(b.chain.levels - 1);
                let defect = &w * (&b.op * b.op.adjoint() - &id) * &w;
                cert.push(CheckEntry::new(
                    "coisometry_defect",
                    operator_norm(&defect),
                    Window::Interior,
                    tol,
                ));
            }
        }
        DilationKind::Unitary => {
            let side = b.chain.levels / 2;
            if side >= 1 {
                // U*U = I off the last future block, UU* = I off the last
                // past block.
                let mut w_iso = id.clone();
                let mut w_co = id.clone();
                for i in 0..n {
                    w_iso[(side * n + i, side * n + i)] = crate::linalg::cr(0.0);
                    w_co[(total - n + i, total - n + i)] = crate::linalg::cr(0.0);
                }
                let iso_defect = &w_iso * (b.op.adjoint() * &b.op - &id) * &w_iso;
                let co_defect = &w_co * (&b.op * b.op.adjoint() - &id) * &w_co;
                cert.push(CheckEntry::new(
                    "isometry_defect",
                    operator_norm(&iso_defect),
                    Window::Interior,
                    tol,
                ));
                cert.push(CheckEntry::new(
                    "coisometry_defect",
                    operator_norm(&co_defect),
                    Window::Interior,
                    tol,
                ));
            }
        }
    }
    Ok(cert)
}

/// Re-evaluates every identity a lift claims and compares against the
/// stored certificate. The `certificate_consistency` entry is the largest
/// disagreement between stored and recomputed residuals; anything beyond
/// 1e-12 means the result was tampered with or corrupted.
pub fn check_lift(r: &LiftResult, tol: &Tolerances) -> Certificate {
    let (entries, claim) =
        evaluate_lift_checks(&r.op, &r.context, &r.domain_chain, &r.codomain_chain, tol);
    let mut cert = Certificate::new("check_lift", tol);
    cert.depths
        .insert("domain_levels".into(), r.domain_chain.levels);
    cert.depths
        .insert("codomain_levels".into(), r.codomain_chain.levels);

    let mut worst: f64 = 0.0;
    if entries.len() != r.certificate.len() {
        worst = f64::INFINITY;
    } else {
        for (recomputed, stored) in entries.iter().zip(r.certificate.iter()) {
            if recomputed.label != stored.label {
                worst = f64::INFINITY;
                break;
            }
            worst = worst.max((recomputed.residual - stored.residual).abs());
        }
    }
    worst = worst.max((claim.achieved - r.norm_claim.achieved).abs());
    worst = worst.max((claim.target - r.norm_claim.target).abs());

    for entry in entries {
        cert.push(entry);
    }
    cert.metrics.insert("norm_achieved".into(), claim.achieved);
    cert.metrics.insert("norm_target".into(), claim.target);
    let consistency = CheckEntry {
        label: "certificate_consistency".into(),
        residual: worst,
        window: Window::Full,
        pass: worst <= 1e-12,
    };
    cert.push(consistency);
    cert
}

/// Heuristic purity probe: reports the decay sequence
/// `||P_W (op*)^k P_W||` for `k <= powers` and passes only if it is
/// monotone non-increasing and ends at or below 0.1.
///
/// Purity of a co-isometry is a statement about the infinite operator, so
/// this is explicitly a heuristic, not a certification.
pub fn purity_heuristic(b: &DilationBundle, window: usize, powers: usize) -> Result<Certificate> {
    if window >= b.chain.levels {
        return Err(Error::LevelOutOfRange {
            level: window,
            max: b.chain.levels.saturating_sub(1),
        });
    }
    let tol = Tolerances::default();
    let mut cert = Certificate::new("purity_heuristic", &tol);
    cert.depths.insert("window".into(), window);
    cert.depths.insert("powers".into(), powers);

    let p = b.chain.projection(window);
    let mut power = MatrixOp::identity(b.op.nrows(), b.op.ncols());
    let mut decay = Vec::with_capacity(powers + 1);
    for k in 0..=powers {
        let windowed = &p * &power * &p;
        let norm = operator_norm(&windowed);
        decay.push(norm);
        cert.metrics.insert(format!("decay[{k:03}]"), norm);
        power = b.op.adjoint() * power;
    }
    let monotone = decay.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let last = *decay.last().unwrap_or(&1.0);
    cert.push(CheckEntry {
        label: "HEURISTIC:purity_decay".into(),
        residual: last,
        window: Window::Interior,
        pass: monotone && last <= 0.1,
    });
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dilation::{coisometric_extension, schaeffer_isometric, unitary_dilation};
    use crate::linalg::{c, cr};
    use crate::qalgebra::example_pair_jordan;

    fn scalar(v: f64) -> MatrixOp {
        MatrixOp::from_element(1, 1, cr(v))
    }

    #[test]
    fn q_commutation_certificates() {
        let tol = Tolerances::default();
        let ex = example_pair_jordan(cr(1.0), cr(0.5), cr(0.25), c(0.0, 1.0), &tol).unwrap();
        let cert =
            check_q_commuting(&ex.pair.t1, &ex.pair.t2, ex.pair.q, &tol).unwrap();
        assert!(cert.passed());
        assert!(cert.checks[0].residual <= 1e-15);

        // T2 = 0 commutes with residual exactly zero.
        let cert =
            check_q_commuting(&scalar(0.5), &scalar(0.0), cr(3.0), &tol).unwrap();
        assert_eq!(cert.checks[0].residual, 0.0);

        // T1 = T2 = I, q = 2: ||I - 2I|| = 1 over normalizer 2.
        let id = MatrixOp::identity(2, 2);
        let cert = check_q_commuting(&id, &id, cr(2.0), &tol).unwrap();
        assert!(!cert.passed());
        assert!((cert.checks[0].residual - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dilation_certificates_by_kind() {
        let tol = Tolerances::default();
        let t = scalar(0.5);

        let iso = schaeffer_isometric(&t, 4, &tol).unwrap();
        let cert = check_dilation_identity(&iso, 4, &tol).unwrap();
        assert!(cert.passed());
        assert_eq!(cert.checks[0].residual, 0.0); // power 0 is exact

        let coiso = coisometric_extension(&t, 4, &tol).unwrap();
        assert!(check_dilation_identity(&coiso, 4, &tol).unwrap().passed());

        let uni = unitary_dilation(&t, 2, &tol).unwrap();
        let cert = check_dilation_identity(&uni, 2, &tol).unwrap();
        assert!(cert.passed());
        // Negative powers are checked through the adjoint.
        assert!(cert.checks.iter().any(|chk| chk.label == "compression[-2]"));

        assert!(matches!(
            check_dilation_identity(&iso, 5, &tol),
            Err(Error::LevelOutOfRange { .. })
        ));
    }

    #[test]
    fn purity_heuristic_separates_shifts_from_unitaries() {
        let tol = Tolerances::default();
        // Truncated pure co-shift: decays to zero after `window` steps.
        let coshift = coisometric_extension(&scalar(0.0), 6, &tol).unwrap();
        let cert = purity_heuristic(&coshift, 2, 6).unwrap();
        assert!(cert.checks[0].pass);
        assert!(cert.checks[0].label.starts_with("HEURISTIC"));

        // Unitary bundles never decay.
        let uni = unitary_dilation(&scalar(1.0), 3, &tol).unwrap();
        let cert = purity_heuristic(&uni, 1, 6).unwrap();
        assert!(!cert.checks[0].pass);

        assert!(matches!(
            purity_heuristic(&coshift, 6, 4),
            Err(Error::LevelOutOfRange { .. })
        ));
    }
}
