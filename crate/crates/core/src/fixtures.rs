//! The 4⊗4 worked example: the PPT entangled state `ρ₂` and its pieces
//! `ρ₃`, `ρ₄`, the ten-operator PPT channel `φ` extracted from it, the filtered
//! state `σ = (I ⊗ φ)(|ψ⟩⟨ψ|)`, and `γ = (I ⊗ D)(I ⊗ φ∘φ)(|ψ⟩⟨ψ|)(I ⊗ D)`.
//!
//! Everything is built from the primitive definitions (the state `ρ₂` and the
//! Kraus operators). The reference tables for the products `P_iP_j` and for `γ`
//! are transcribed separately and only ever compared, never trusted.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::{compose, compose_indexed, KrausChannel, DEFAULT_PRUNE_TOL};
use crate::error::Result;
use crate::linalg::{
    hermitian_eigenvalues, kron, BipartiteOperator, ComplexMatrix, Subsystem, Tolerance,
};
use crate::report::{Check, DiffEntry, Status, VerificationReport};
use crate::separability::{certify_block_split, certify_convex_split};
use crate::states::{is_ppt_state, realignment_norm, PureStateVector};

const D: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExampleConstants {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d_diag: [f64; 4],
}

impl Default for ExampleConstants {
    fn default() -> Self {
        let half_root3 = 3f64.sqrt() / 2.0;
        Self {
            a: half_root3,
            b: half_root3,
            c: 1.0,
            d_diag: [4.0, 4.0, 3.0, 3.0],
        }
    }
}

impl ExampleConstants {
    /// Largest deviation from `4a² = 4b² = 3c² = 3`.
    pub fn normalization_defect(&self) -> f64 {
        [
            4.0 * self.a * self.a - 3.0,
            4.0 * self.b * self.b - 3.0,
            3.0 * self.c * self.c - 3.0,
        ]
        .iter()
        .fold(0.0, |m, x| f64::max(m, x.abs()))
    }
}

fn ket(i: usize, k: usize) -> usize {
    i * D + k
}

/// `(Σ_t |t⟩)(Σ_t ⟨t|)` over the listed `|ik⟩` kets, plus `|ik⟩⟨ik|` for each
/// of the diagonal kets.
fn assemble(coherent: &[&[(usize, usize)]], diagonal: &[(usize, usize)]) -> BipartiteOperator {
    let mut m = ComplexMatrix::zeros(D * D, D * D);
    for group in coherent {
        for &(i, k) in *group {
            for &(j, l) in *group {
                m[(ket(i, k), ket(j, l))] += crate::linalg::ONE;
            }
        }
    }
    for &(i, k) in diagonal {
        m[(ket(i, k), ket(i, k))] += crate::linalg::ONE;
    }
    BipartiteOperator::new(D, D, m).expect("16x16")
}

const TRIPLE_A: &[(usize, usize)] = &[(0, 0), (1, 1), (2, 2)];
const TRIPLE_B: &[(usize, usize)] = &[(0, 1), (1, 0), (3, 3)];

pub fn rho2() -> BipartiteOperator {
    assemble(
        &[TRIPLE_A, TRIPLE_B],
        &[(0, 2), (2, 0), (0, 3), (3, 1), (1, 2), (1, 3), (3, 0), (2, 1)],
    )
}

/// The part of `ρ₂` supported on `span{0,1,2} ⊗ span{0,1,2}`.
pub fn rho3() -> BipartiteOperator {
    assemble(&[TRIPLE_A], &[(0, 2), (2, 0), (1, 2), (2, 1)])
}

/// The part of `ρ₂` supported on `span{0,1,3} ⊗ span{0,1,3}`.
pub fn rho4() -> BipartiteOperator {
    assemble(&[TRIPLE_B], &[(0, 3), (3, 1), (1, 3), (3, 0)])
}

/// Unnormalized `|ψ₄⟩⟨ψ₄|` with `|ψ₄⟩ = Σ_i |ii⟩`.
pub fn max_entangled_projector(d: usize) -> BipartiteOperator {
    PureStateVector::maximally_entangled(d).projector()
}

fn scaled_ket_bra(row: usize, col: usize, s: f64) -> ComplexMatrix {
    ComplexMatrix::ket_bra(D, row, col).scale(s)
}

/// Kraus operators `P₁ … P₁₀` of the PPT channel `φ`.
pub fn example_channel_with(k: ExampleConstants) -> KrausChannel {
    let s = 1.0 / 3f64.sqrt();
    let p1 = ComplexMatrix::diag(&[k.a * s, k.b * s, k.c * s, 0.0]);
    let p2 = &(&scaled_ket_bra(1, 0, k.a * s) + &scaled_ket_bra(0, 1, k.b * s)) + &scaled_ket_bra(3, 3, s);
    KrausChannel::new(vec![
        p1,
        p2,
        scaled_ket_bra(2, 0, k.a * s),
        scaled_ket_bra(3, 0, k.a * s),
        scaled_ket_bra(2, 1, k.b * s),
        scaled_ket_bra(3, 1, k.b * s),
        scaled_ket_bra(0, 2, k.c * s),
        scaled_ket_bra(1, 2, k.c * s),
        scaled_ket_bra(0, 3, s),
        scaled_ket_bra(1, 3, s),
    ])
    .expect("ten 4x4 operators")
}

pub fn example_channel() -> KrausChannel {
    example_channel_with(ExampleConstants::default())
}

/// `σ` from the local filter `(1/3)(F ⊗ I)ρ₂(F ⊗ I)`, `F = diag(a,b,c,1)`, and
/// from the Choi matrix of `φ`.
pub fn sigma_two_ways() -> (BipartiteOperator, BipartiteOperator) {
    let k = ExampleConstants::default();
    let filter = kron(&ComplexMatrix::diag(&[k.a, k.b, k.c, 1.0]), &ComplexMatrix::identity(D));
    let via_filter = BipartiteOperator::new(D, D, filter.conjugate(rho2().matrix()).expect("16x16").scale(1.0 / 3.0))
        .expect("16x16");
    let via_channel = example_channel().choi();
    (via_filter, via_channel)
}

pub fn sigma() -> BipartiteOperator {
    example_channel().choi()
}

fn prune_tol() -> Tolerance {
    Tolerance::new(DEFAULT_PRUNE_TOL).expect("positive")
}

pub fn composed_channel() -> KrausChannel {
    let phi = example_channel();
    compose(&phi, &phi, prune_tol()).expect("4 -> 4 -> 4")
}

/// `(I ⊗ D)·(I ⊗ φ∘φ)(|ψ₄⟩⟨ψ₄|)·(I ⊗ D)`.
pub fn gamma_computed() -> BipartiteOperator {
    let k = ExampleConstants::default();
    let twice = composed_channel()
        .apply_to_b(&max_entangled_projector(D))
        .expect("dims match");
    let local = kron(&ComplexMatrix::identity(D), &ComplexMatrix::diag(&k.d_diag));
    BipartiteOperator::new(D, D, local.conjugate(twice.matrix()).expect("16x16")).expect("16x16")
}

/// The displayed coefficient list for `γ`, transcribed verbatim.
pub fn gamma_printed() -> BipartiteOperator {
    let mut g = assemble(&[TRIPLE_A, &[(0, 0), (1, 1), (3, 3)]], &[]).into_matrix();
    let pair = [(0usize, 1usize), (1, 0)];
    for &(i, k) in &pair {
        for &(j, l) in &pair {
            g[(ket(i, k), ket(j, l))] += Complex64::new(2.0, 0.0);
        }
    }
    let diagonal: [((usize, usize), f64); 16] = [
        ((0, 0), 8.0 / 3.0),
        ((1, 0), 8.0 / 3.0),
        ((2, 0), 40.0 / 9.0),
        ((3, 0), 40.0 / 9.0),
        ((0, 1), 11.0 / 3.0),
        ((1, 1), 11.0 / 3.0),
        ((2, 1), 52.0 / 9.0),
        ((3, 1), 52.0 / 9.0),
        ((0, 2), 21.0 / 16.0),
        ((1, 2), 21.0 / 16.0),
        ((2, 2), 3.0 / 4.0),
        ((3, 2), 3.0 / 4.0),
        ((0, 3), 15.0 / 8.0),
        ((1, 3), 15.0 / 8.0),
        ((2, 3), 3.0 / 2.0),
        ((3, 3), 3.0 / 2.0),
    ];
    for ((i, k), w) in diagonal {
        g[(ket(i, k), ket(i, k))] += Complex64::new(w, 0.0);
    }
    BipartiteOperator::new(D, D, g).expect("16x16")
}

/// One entry of the displayed product list: `P_outer P_inner = Σ value |row⟩⟨col|`
/// with 1-based labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PrintedProduct {
    pub outer: usize,
    pub inner: usize,
    pub matrix: ComplexMatrix,
}

/// The 44 displayed products, transcribed verbatim (including the entries that
/// disagree with the Kraus operators).
pub fn printed_products() -> Vec<PrintedProduct> {
    let ExampleConstants { a, b, c, .. } = ExampleConstants::default();
    let t = 1.0 / 3.0;
    let m = |entries: &[(usize, usize, f64)]| {
        let mut out = ComplexMatrix::zeros(D, D);
        for &(r, col, v) in entries {
            out[(r, col)] += Complex64::new(v, 0.0);
        }
        out
    };
    let table: Vec<(usize, usize, ComplexMatrix)> = vec![
        (1, 1, m(&[(0, 0, t * a * a), (1, 1, t * b * b), (2, 2, t * c * c)])),
        (1, 2, m(&[(1, 0, t * a * b), (0, 1, t * a * b)])),
        (2, 1, m(&[(1, 0, t * a * b), (0, 1, t * a * b)])),
        (1, 3, m(&[(2, 0, t * a * c)])),
        (1, 5, m(&[(2, 1, t * b * c)])),
        (1, 7, m(&[(0, 2, t * a * c)])),
        (1, 8, m(&[(0, 3, t * b * c)])),
        (1, 9, m(&[(1, 2, t * a)])),
        (1, 10, m(&[(1, 3, t * b)])),
        (2, 2, m(&[(0, 0, t * a * b), (1, 1, t * a * b), (3, 3, t)])),
        (2, 4, m(&[(3, 0, t * a)])),
        (2, 6, m(&[(3, 1, t * b)])),
        (2, 7, m(&[(1, 2, t * a * c)])),
        (2, 8, m(&[(0, 2, t * b * c)])),
        (2, 9, m(&[(1, 3, t * a)])),
        (2, 10, m(&[(0, 3, t * b)])),
        (3, 1, m(&[(2, 0, t * a * a)])),
        (3, 2, m(&[(2, 1, t * a * b)])),
        (3, 7, m(&[(2, 2, t * a * c)])),
        (3, 9, m(&[(2, 3, t * a)])),
        (4, 1, m(&[(3, 0, t * a * a)])),
        (4, 2, m(&[(3, 1, t * a * b)])),
        (4, 7, m(&[(3, 2, t * a * c)])),
        (4, 9, m(&[(3, 3, t * a)])),
        (5, 1, m(&[(2, 1, t * b * b)])),
        (5, 2, m(&[(2, 0, t * a * b)])),
        (5, 8, m(&[(2, 2, t * b * c)])),
        (5, 10, m(&[(2, 3, t * b)])),
        (6, 1, m(&[(3, 1, t * b * b)])),
        (6, 2, m(&[(3, 0, t * a * b)])),
        (6, 8, m(&[(3, 2, t * b * c)])),
        (6, 10, m(&[(3, 3, t * b)])),
        (7, 1, m(&[(0, 2, t * c * c)])),
        (7, 3, m(&[(0, 0, t * a * c)])),
        (7, 5, m(&[(0, 1, t * b * c)])),
        (8, 1, m(&[(1, 2, t * c * c)])),
        (8, 3, m(&[(1, 0, t * a * c)])),
        (8, 5, m(&[(1, 1, t * b * c)])),
        (9, 2, m(&[(0, 3, t)])),
        (9, 4, m(&[(0, 0, t * a)])),
        (9, 6, m(&[(0, 1, t * b)])),
        (10, 2, m(&[(1, 3, t)])),
        (10, 4, m(&[(1, 0, t * a)])),
        (10, 6, m(&[(1, 1, t * b)])),
    ];
    table
        .into_iter()
        .map(|(outer, inner, matrix)| PrintedProduct { outer, inner, matrix })
        .collect()
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// Coordinates `⟨ik|·|jl⟩` where two 4⊗4 operators differ by at least `tol`.
pub fn coordinate_diff(computed: &BipartiteOperator, printed: &BipartiteOperator, tol: Tolerance) -> Vec<DiffEntry> {
    let (da, db) = computed.dims();
    let mut out = Vec::new();
    for r in 0..da * db {
        for c in 0..da * db {
            let (x, y) = (computed.matrix()[(r, c)], printed.matrix()[(r, c)]);
            if (x - y).norm() >= tol.eps() {
                out.push(DiffEntry {
                    coordinate: format!("<{}{}|.|{}{}>", r / db, r % db, c / db, c % db),
                    computed: pair(x),
                    printed: pair(y),
                });
            }
        }
    }
    out
}

/// Disagreements between the reference product list and `{P_iP_j}` computed
/// from the Kraus operators.
pub fn product_list_diff(tol: Tolerance) -> Vec<DiffEntry> {
    let phi = example_channel();
    let (composed, labels) = compose_indexed(&phi, &phi, prune_tol()).expect("4 -> 4");
    let printed = printed_products();
    let mut out = Vec::new();
    let zero = ComplexMatrix::zeros(D, D);
    let lookup = |outer: usize, inner: usize| {
        labels
            .iter()
            .position(|&(i, j)| (i + 1, j + 1) == (outer, inner))
            .map(|k| &composed.kraus()[k])
    };
    let mut compare = |name: String, computed: &ComplexMatrix, shown: &ComplexMatrix| {
        for r in 0..D {
            for c in 0..D {
                let (x, y) = (computed[(r, c)], shown[(r, c)]);
                if (x - y).norm() >= tol.eps() {
                    out.push(DiffEntry {
                        coordinate: format!("{name} <{r}|.|{c}>"),
                        computed: pair(x),
                        printed: pair(y),
                    });
                }
            }
        }
    };
    for p in &printed {
        let computed = lookup(p.outer, p.inner).unwrap_or(&zero);
        compare(format!("P{}P{}", p.outer, p.inner), computed, &p.matrix);
    }
    for (k, &(i, j)) in labels.iter().enumerate() {
        if !printed.iter().any(|p| (p.outer, p.inner) == (i + 1, j + 1)) {
            compare(format!("P{}P{} (not printed)", i + 1, j + 1), &composed.kraus()[k], &zero);
        }
    }
    out
}

fn min_pt_eigenvalue(x: &BipartiteOperator, tol: Tolerance) -> Result<f64> {
    Ok(hermitian_eigenvalues(x.partial_transpose().matrix(), tol)?[0])
}

fn guarded(name: &str, f: impl FnOnce() -> Result<Check>) -> Check {
    f().unwrap_or_else(|e| Check::new(name, Status::Fail).note(e.to_string()))
}

/// Runs the whole worked example from definitions.
///
/// Checks 1–9 gate [`VerificationReport::passed`]; the realignment report and
/// the reference-table diffs are informational.
pub fn verify_worked_example(tol: Tolerance) -> VerificationReport {
    let mut report = VerificationReport::new(tol.eps());
    let phi = example_channel();
    let psi = max_entangled_projector(D);

    let tp = phi.is_trace_preserving(tol);
    report.push(
        Check::new("trace-preservation", Status::from_flag(tp.flag))
            .witness("defect", tp.defect)
            .witness("normalization_defect", ExampleConstants::default().normalization_defect()),
    );

    report.push(guarded("sigma-two-ways", || {
        let (via_filter, via_channel) = sigma_two_ways();
        let distance = via_filter.distance(&via_channel);
        let marginal = via_channel
            .partial_trace(Subsystem::A)
            .distance(&ComplexMatrix::identity(D));
        Ok(Check::new("sigma-two-ways", Status::from_flag(distance < tol.eps() && marginal < tol.eps()))
            .witness("distance", distance)
            .witness("marginal_defect", marginal))
    }));

    report.push(guarded("rho2-ppt", || {
        let w = is_ppt_state(&rho2(), tol)?;
        Ok(Check::new("rho2-ppt", Status::from_flag(w.flag)).witness("min_eigenvalue_pt", w.witness))
    }));

    report.push(guarded("sigma-ppt", || {
        let w = is_ppt_state(&sigma(), tol)?;
        Ok(Check::new("sigma-ppt", Status::from_flag(w.flag)).witness("min_eigenvalue_pt", w.witness))
    }));

    let ppt = phi.is_ppt(tol);
    report.push(Check::new("channel-ppt", Status::from_flag(ppt.flag)).witness("min_eigenvalue_choi_pt", ppt.witness));

    report.push(guarded("composition-count", || {
        let composed = composed_channel();
        let tp = composed.is_trace_preserving(tol);
        Ok(Check::new("composition-count", Status::from_flag(composed.len() == 44))
            .witness("nonzero_products", composed.len() as f64)
            .witness("tp_defect", tp.defect))
    }));

    report.push(guarded("gamma-ppt", || {
        let gamma = gamma_computed();
        let min_pt = min_pt_eigenvalue(&gamma, tol)?;
        let min = hermitian_eigenvalues(gamma.matrix(), tol)?[0];
        let twice = composed_channel().apply_to_b(&psi)?;
        let iterated = phi.apply_to_b(&sigma())?;
        let consistency = twice.distance(&iterated);
        let ok = min >= -tol.eps() && min_pt >= -tol.eps() && consistency < tol.eps();
        Ok(Check::new("gamma-ppt", Status::from_flag(ok))
            .witness("min_eigenvalue", min)
            .witness("min_eigenvalue_pt", min_pt)
            .witness("composition_consistency", consistency))
    }));

    report.push(guarded("gamma-block-split", || {
        let gamma = gamma_computed();
        let cert = certify_block_split(&gamma, tol)?;
        let audit = cert.audit(&gamma, tol);
        let status = match (cert.is_certified(), audit.sound) {
            (true, true) => Status::Pass,
            (true, false) => Status::Fail,
            (false, _) => Status::Inconclusive,
        };
        Ok(Check::new("gamma-block-split", status)
            .witness("blocks", cert.witnesses.get("blocks").copied().unwrap_or(0.0))
            .witness("iterations", cert.witnesses.get("iterations").copied().unwrap_or(0.0))
            .witness("reconstruction_residual", audit.reconstruction_residual.unwrap_or(f64::INFINITY))
            .note(cert.note))
    }));

    report.push(guarded("convex-split-rho3-rho4", || {
        let parts = [rho3(), rho4()]
            .iter()
            .map(|r| {
                let image = phi.apply_to_b(r)?;
                let cert = certify_block_split(&image, tol)?;
                Ok((image, cert))
            })
            .collect::<Result<Vec<_>>>()?;
        let total = phi.apply_to_b(&rho2())?;
        let verdicts: Vec<bool> = parts.iter().map(|(_, c)| c.is_certified()).collect();
        match certify_convex_split(&parts, Some(&total), tol) {
            Ok(cert) => {
                let audit = cert.audit(&total, tol);
                Ok(Check::new("convex-split-rho3-rho4", Status::from_flag(audit.sound))
                    .witness("sum_residual", cert.witnesses.get("sum_residual").copied().unwrap_or(f64::INFINITY))
                    .witness("reconstruction_residual", audit.reconstruction_residual.unwrap_or(f64::INFINITY)))
            }
            Err(e) => Ok(Check::new("convex-split-rho3-rho4", Status::Inconclusive)
                .note(format!("{e}; part verdicts {verdicts:?}"))),
        }
    }));

    let r2 = rho2();
    let normalized = r2.scale(1.0 / r2.trace().re);
    let realigned = realignment_norm(&normalized);
    let (status, note) = if realigned > 1.0 + tol.eps() {
        (Status::Pass, "realignment exceeds 1: entanglement of rho2 certified")
    } else {
        (Status::Inconclusive, "entanglement of rho2 accepted from the construction, not certified")
    };
    report.push(
        Check::new("rho2-realignment", status)
            .informational()
            .witness("realignment_norm", realigned)
            .note(note),
    );

    let gamma_diff = coordinate_diff(&gamma_computed(), &gamma_printed(), tol);
    report.push(
        Check::new("gamma-printed-diff", Status::Pass)
            .informational()
            .witness("differing_coordinates", gamma_diff.len() as f64)
            .note("printed coefficients of gamma compared with the computed operator")
            .diffs(gamma_diff),
    );

    let product_diff = product_list_diff(tol);
    report.push(
        Check::new("product-list-diff", Status::Pass)
            .informational()
            .witness("differing_entries", product_diff.len() as f64)
            .witness("printed_products", printed_products().len() as f64)
            .note("printed P_iP_j list compared with products of the Kraus operators")
            .diffs(product_diff),
    );

    report
}
