//! Completely positive maps in Kraus form.
//!
//! A [`KrausChannel`] stores its operators verbatim and is completely positive
//! by construction. Trace preservation is never assumed; it is a check.
//!
//! Choi matrices use the unnormalized maximally entangled vector
//! `|ψ⟩ = Σ_i |ii⟩`, so `choi(Λ) = (I ⊗ Λ)(|ψ⟩⟨ψ|)` has trace `d_in` for a
//! trace-preserving channel.

use serde::{Deserialize, Serialize};

use crate::error::{mismatch, Error, Result};
use crate::linalg::{
    hermitian_eigenvalues, kron, BipartiteOperator, ComplexMatrix, Subsystem, Tolerance,
};
use crate::random::{random_isometry, rng_from_seed};

/// Default pruning threshold for [`compose`].
pub const DEFAULT_PRUNE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelRepr", into = "ChannelRepr")]
pub struct KrausChannel {
    d_in: usize,
    d_out: usize,
    kraus: Vec<ComplexMatrix>,
}

#[derive(Serialize, Deserialize)]
struct ChannelRepr {
    d_in: usize,
    d_out: usize,
    kraus: Vec<ComplexMatrix>,
}

impl TryFrom<ChannelRepr> for KrausChannel {
    type Error = Error;

    fn try_from(r: ChannelRepr) -> Result<Self> {
        let ch = KrausChannel::new(r.kraus)?;
        if (ch.d_in, ch.d_out) != (r.d_in, r.d_out) {
            return Err(mismatch(
                "channel header",
                format!("d_in={}, d_out={}", ch.d_in, ch.d_out),
                format!("d_in={}, d_out={}", r.d_in, r.d_out),
            ));
        }
        Ok(ch)
    }
}

impl From<KrausChannel> for ChannelRepr {
    fn from(ch: KrausChannel) -> Self {
        ChannelRepr {
            d_in: ch.d_in,
            d_out: ch.d_out,
            kraus: ch.kraus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TpCheck {
    pub flag: bool,
    /// `‖Σ A_i†A_i − I‖_F`
    pub defect: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PptCheck {
    pub flag: bool,
    /// Smallest eigenvalue of the partial transpose.
    pub witness: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelReportFlags {
    pub trace_preserving: bool,
    pub ppt: bool,
    pub tp_defect: f64,
    pub ppt_witness: f64,
}

impl KrausChannel {
    /// Builds a channel from a nonempty list of equally shaped operators.
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or(Error::EmptyKraus)?;
        let expected = first.shape();
        for (index, k) in kraus.iter().enumerate() {
            if k.shape() != expected {
                return Err(Error::KrausShape {
                    index,
                    expected,
                    found: k.shape(),
                });
            }
        }
        Ok(Self {
            d_in: expected.1,
            d_out: expected.0,
            kraus,
        })
    }

    pub fn identity(d: usize) -> Self {
        Self::new(vec![ComplexMatrix::identity(d)]).expect("single operator")
    }

    /// `X ↦ tr(X)·I/d` with Kraus operators `|i⟩⟨j|/√d`.
    pub fn completely_depolarizing(d: usize) -> Self {
        let s = 1.0 / (d as f64).sqrt();
        let kraus = (0..d)
            .flat_map(|i| (0..d).map(move |j| ComplexMatrix::ket_bra(d, i, j).scale(s)))
            .collect();
        Self::new(kraus).expect("equal shapes")
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn len(&self) -> usize {
        self.kraus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kraus.is_empty()
    }

    /// `Σ_i A_i x A_i†`.
    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.shape() != (self.d_in, self.d_in) {
            return Err(mismatch(
                "channel input",
                format!("{0}x{0}", self.d_in),
                format!("{}x{}", x.rows(), x.cols()),
            ));
        }
        let mut out = ComplexMatrix::zeros(self.d_out, self.d_out);
        for a in &self.kraus {
            out += &a.conjugate(x)?;
        }
        Ok(out)
    }

    /// `Σ_i A_i†A_i`.
    pub fn kraus_gram(&self) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.d_in, self.d_in);
        for a in &self.kraus {
            acc += &(&a.adjoint() * a);
        }
        acc
    }

    pub fn is_trace_preserving(&self, tol: Tolerance) -> TpCheck {
        let defect = self.kraus_gram().distance(&ComplexMatrix::identity(self.d_in));
        TpCheck {
            flag: defect < tol.eps(),
            defect,
        }
    }

    /// `(I ⊗ Λ)(Σ_{ij} |ii⟩⟨jj|)` with `dA = d_in`, `dB = d_out`.
    pub fn choi(&self) -> BipartiteOperator {
        // Block (i, j) of the Choi matrix is Λ(|i⟩⟨j|) = Σ_k A_k e_i e_j† A_k†.
        let (din, dout) = (self.d_in, self.d_out);
        let mut m = ComplexMatrix::zeros(din * dout, din * dout);
        for a in &self.kraus {
            for i in 0..din {
                for j in 0..din {
                    for r in 0..dout {
                        let ari = a[(r, i)];
                        for s in 0..dout {
                            m[(i * dout + r, j * dout + s)] += ari * a[(s, j)].conj();
                        }
                    }
                }
            }
        }
        BipartiteOperator::new(din, dout, m).expect("side d_in*d_out")
    }

    /// PPT test on the Choi matrix. Complete positivity holds by construction.
    pub fn is_ppt(&self, tol: Tolerance) -> PptCheck {
        let pt = self.choi().partial_transpose();
        let witness = hermitian_eigenvalues(pt.matrix(), tol)
            .expect("Choi partial transpose of a Kraus map is Hermitian")[0];
        PptCheck {
            flag: witness >= -tol.eps(),
            witness,
        }
    }

    pub fn flags(&self, tol: Tolerance) -> ChannelReportFlags {
        let tp = self.is_trace_preserving(tol);
        let ppt = self.is_ppt(tol);
        ChannelReportFlags {
            trace_preserving: tp.flag,
            ppt: ppt.flag,
            tp_defect: tp.defect,
            ppt_witness: ppt.witness,
        }
    }

    /// `(I_{dA} ⊗ Λ)(ρ)`, realized as `Σ_i (I ⊗ A_i) ρ (I ⊗ A_i)†`.
    pub fn apply_to_b(&self, rho: &BipartiteOperator) -> Result<BipartiteOperator> {
        if rho.dim_b() != self.d_in {
            return Err(mismatch("apply_to_b: dB of the state", self.d_in, rho.dim_b()));
        }
        let id = ComplexMatrix::identity(rho.dim_a());
        let mut out = ComplexMatrix::zeros(rho.dim_a() * self.d_out, rho.dim_a() * self.d_out);
        for a in &self.kraus {
            out += &kron(&id, a).conjugate(rho.matrix())?;
        }
        BipartiteOperator::new(rho.dim_a(), self.d_out, out)
    }

    /// Recovers the action from the Choi matrix: `X ↦ Tr_A[(Xᵀ ⊗ I)·C]`.
    pub fn apply_via_choi(choi: &BipartiteOperator, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.shape() != (choi.dim_a(), choi.dim_a()) {
            return Err(mismatch("Choi input", choi.dim_a(), x.rows()));
        }
        let lhs = kron(&x.transpose(), &ComplexMatrix::identity(choi.dim_b()));
        let prod = BipartiteOperator::new(choi.dim_a(), choi.dim_b(), lhs.matmul(choi.matrix())?)?;
        Ok(prod.partial_trace(Subsystem::B))
    }
}

/// `outer ∘ inner` with Kraus set `{A_i B_j}` in lexicographic `(i, j)` order,
/// dropping products whose Frobenius norm is below `prune_tol`.
///
/// Keeps at least one operator so the result is a valid channel even when
/// every product vanishes (it is then the zero map).
pub fn compose(outer: &KrausChannel, inner: &KrausChannel, prune_tol: Tolerance) -> Result<KrausChannel> {
    compose_indexed(outer, inner, prune_tol).map(|(ch, _)| ch)
}

/// Like [`compose`], also returning the `(i, j)` label of each surviving product.
pub fn compose_indexed(
    outer: &KrausChannel,
    inner: &KrausChannel,
    prune_tol: Tolerance,
) -> Result<(KrausChannel, Vec<(usize, usize)>)> {
    if inner.d_out != outer.d_in {
        return Err(mismatch("compose: inner d_out vs outer d_in", outer.d_in, inner.d_out));
    }
    let mut kraus = Vec::new();
    let mut labels = Vec::new();
    for (i, a) in outer.kraus.iter().enumerate() {
        for (j, b) in inner.kraus.iter().enumerate() {
            let p = a * b;
            if p.frobenius_norm() >= prune_tol.eps() {
                kraus.push(p);
                labels.push((i, j));
            }
        }
    }
    if kraus.is_empty() {
        kraus.push(ComplexMatrix::zeros(outer.d_out, inner.d_in));
    }
    Ok((KrausChannel::new(kraus)?, labels))
}

/// Random trace-preserving channel on dimension `d` with `k` Kraus operators,
/// sliced from a random isometry `C^d → C^{d·k}`. Deterministic in `seed`.
pub fn random_cptp(d: usize, k: usize, seed: u64) -> KrausChannel {
    assert!(d >= 1 && k >= 1, "random_cptp needs d >= 1 and k >= 1");
    let mut rng = rng_from_seed(seed);
    let v = random_isometry(d * k, d, &mut rng);
    let kraus = (0..k)
        .map(|b| ComplexMatrix::from_fn(d, d, |r, c| v[(b * d + r, c)]))
        .collect();
    KrausChannel::new(kraus).expect("equal block shapes")
}

/// Outcome of rejection-sampling a PPT channel.
#[derive(Debug, Clone)]
pub struct PptSample {
    pub channel: KrausChannel,
    /// Seed of the accepted `random_cptp` draw.
    pub seed: u64,
    /// Number of draws, including the accepted one.
    pub attempts: usize,
    pub witness: f64,
}

/// Draws `random_cptp(d, k, ·)` with seeds derived from `seed` until one is
/// PPT. The acceptance rate depends strongly on `k`: with `k ≥ 2d²` it is high
/// for `d = 3`, with `k ≤ d` it is essentially zero.
pub fn sample_ppt_channel(
    d: usize,
    k: usize,
    seed: u64,
    max_attempts: usize,
    tol: Tolerance,
) -> Option<PptSample> {
    (0..max_attempts).find_map(|attempt| {
        let s = crate::random::derive_seed(seed, attempt as u64);
        let channel = random_cptp(d, k, s);
        let check = channel.is_ppt(tol);
        check.flag.then(|| PptSample {
            channel,
            seed: s,
            attempts: attempt + 1,
            witness: check.witness,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_psd, rng_from_seed};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn make_channel_validation() {
        assert_eq!(KrausChannel::new(vec![]).unwrap_err(), Error::EmptyKraus);
        let err = KrausChannel::new(vec![ComplexMatrix::identity(2), ComplexMatrix::identity(3)])
            .unwrap_err();
        assert!(matches!(err, Error::KrausShape { index: 1, .. }));
        let id = KrausChannel::identity(3);
        assert_eq!((id.d_in(), id.d_out()), (3, 3));
    }

    #[test]
    fn rectangular_channel_dims() {
        let k = ComplexMatrix::zeros(2, 3);
        let ch = KrausChannel::new(vec![k]).unwrap();
        assert_eq!((ch.d_in(), ch.d_out()), (3, 2));
    }

    #[test]
    fn identity_channel_is_noop() {
        let x = random_psd(3, 2, &mut rng_from_seed(1));
        let y = KrausChannel::identity(3).apply(&x).unwrap();
        assert!(y.approx_eq(&x, tol()));
    }

    #[test]
    fn apply_checks_dims() {
        let err = KrausChannel::identity(3).apply(&ComplexMatrix::identity(2)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn trace_preservation_defects() {
        let half = KrausChannel::new(vec![ComplexMatrix::identity(2).scale(0.5)]).unwrap();
        let tp = half.is_trace_preserving(tol());
        assert!(!tp.flag);
        assert!((tp.defect - 0.75 * 2f64.sqrt()).abs() < 1e-14);

        let u = crate::random::random_unitary(4, &mut rng_from_seed(5));
        let tp = KrausChannel::new(vec![u]).unwrap().is_trace_preserving(tol());
        assert!(tp.flag && tp.defect < 1e-12);
    }

    #[test]
    fn identity_choi_is_bell_projector() {
        let c = KrausChannel::identity(2).choi();
        let expected = ComplexMatrix::from_real(
            4,
            4,
            &[
                1.0, 0.0, 0.0, 1.0, //
                0.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 0.0, //
                1.0, 0.0, 0.0, 1.0,
            ],
        )
        .unwrap();
        assert!(c.matrix().approx_eq(&expected, tol()));
    }

    #[test]
    fn depolarizing_choi_and_ppt() {
        let d = 3;
        let ch = KrausChannel::completely_depolarizing(d);
        let c = ch.choi();
        let expected = ComplexMatrix::identity(d * d).scale(1.0 / d as f64);
        assert!(c.matrix().approx_eq(&expected, tol()));
        let ppt = ch.is_ppt(tol());
        assert!(ppt.flag);
        assert!((ppt.witness - 1.0 / d as f64).abs() < 1e-12);
    }

    #[test]
    fn identity_is_not_ppt() {
        let ppt = KrausChannel::identity(2).is_ppt(tol());
        assert!(!ppt.flag);
        assert!((ppt.witness + 1.0).abs() < 1e-12);
    }

    #[test]
    fn choi_matches_kron_definition() {
        // Independent route: Σ_k (I ⊗ A_k)|ψ⟩⟨ψ|(I ⊗ A_k)†.
        let ch = random_cptp(3, 2, 11);
        let d = 3;
        let mut psi = vec![crate::linalg::ZERO; d * d];
        for i in 0..d {
            psi[i * d + i] = crate::linalg::ONE;
        }
        let proj = BipartiteOperator::new(d, d, ComplexMatrix::outer(&psi)).unwrap();
        let via_apply = ch.apply_to_b(&proj).unwrap();
        assert!(via_apply.approx_eq(&ch.choi(), Tolerance::new(1e-12).unwrap()));
    }

    #[test]
    fn compose_with_identity_preserves_action() {
        let ch = random_cptp(3, 3, 2);
        let composed = compose(&KrausChannel::identity(3), &ch, Tolerance::new(DEFAULT_PRUNE_TOL).unwrap()).unwrap();
        let x = random_psd(3, 3, &mut rng_from_seed(9));
        assert!(composed.apply(&x).unwrap().approx_eq(&ch.apply(&x).unwrap(), tol()));
    }

    #[test]
    fn compose_dimension_mismatch() {
        let err = compose(&KrausChannel::identity(2), &KrausChannel::identity(3), tol()).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn compose_prunes_zero_products() {
        let p = KrausChannel::new(vec![
            ComplexMatrix::ket_bra(2, 0, 0),
            ComplexMatrix::ket_bra(2, 1, 1),
        ])
        .unwrap();
        let (c, labels) = compose_indexed(&p, &p, Tolerance::new(DEFAULT_PRUNE_TOL).unwrap()).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(labels, vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn random_cptp_properties() {
        let a = random_cptp(3, 4, 77);
        let b = random_cptp(3, 4, 77);
        assert_eq!(a, b);
        assert!(a.is_trace_preserving(Tolerance::new(1e-10).unwrap()).flag);
        let psd = crate::linalg::is_psd(a.choi().matrix(), tol()).unwrap();
        assert!(psd.flag);
        assert_ne!(a, random_cptp(3, 4, 78));
    }

    #[test]
    fn tp_iff_marginal_is_identity() {
        let ch = random_cptp(3, 2, 4);
        let marginal = ch.choi().partial_trace(Subsystem::A);
        assert!(marginal.approx_eq(&ComplexMatrix::identity(3), tol()));
        let broken = KrausChannel::new(ch.kraus().iter().map(|k| k.scale(0.9)).collect()).unwrap();
        assert!(!broken.is_trace_preserving(tol()).flag);
        let marginal = broken.choi().partial_trace(Subsystem::A);
        assert!(!marginal.approx_eq(&ComplexMatrix::identity(3), tol()));
    }

    #[test]
    fn ppt_sampler_finds_channel() {
        let s = sample_ppt_channel(3, 18, 5, 200, tol()).expect("PPT channel within budget");
        assert!(s.channel.is_ppt(tol()).flag);
        assert_eq!(random_cptp(3, 18, s.seed), s.channel);
    }

    #[test]
    fn channel_json_rejects_inconsistent_header() {
        let ch = KrausChannel::identity(2);
        let mut v = serde_json::to_value(&ch).unwrap();
        v["d_in"] = serde_json::json!(3);
        assert!(serde_json::from_value::<KrausChannel>(v).is_err());
    }
}
