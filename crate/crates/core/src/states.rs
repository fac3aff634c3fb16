//! Bipartite state analytics: Schmidt rank, PPT, realignment, local supports
//! and validation of supplied pure-state decompositions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{mismatch, Error, Result};
use crate::linalg::{
    complex_to_pairs, hermitian_eigen, hermitian_eigenvalues, is_psd, pairs_to_complex,
    relative_rank, singular_values, trace_norm, BipartiteOperator, ComplexMatrix, Subsystem,
    Tolerance, ONE, ZERO,
};

/// Vector in `C^dA ⊗ C^dB`; need not be normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PureStateRepr", into = "PureStateRepr")]
pub struct PureStateVector {
    dim_a: usize,
    dim_b: usize,
    amplitudes: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct PureStateRepr {
    #[serde(rename = "dA")]
    dim_a: usize,
    #[serde(rename = "dB")]
    dim_b: usize,
    amplitudes: Vec<[f64; 2]>,
}

impl TryFrom<PureStateRepr> for PureStateVector {
    type Error = Error;

    fn try_from(r: PureStateRepr) -> Result<Self> {
        PureStateVector::new(r.dim_a, r.dim_b, pairs_to_complex(&r.amplitudes))
    }
}

impl From<PureStateVector> for PureStateRepr {
    fn from(v: PureStateVector) -> Self {
        PureStateRepr {
            dim_a: v.dim_a,
            dim_b: v.dim_b,
            amplitudes: complex_to_pairs(&v.amplitudes),
        }
    }
}

impl PureStateVector {
    pub fn new(dim_a: usize, dim_b: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 || amplitudes.len() != dim_a * dim_b {
            return Err(mismatch(
                "pure state",
                format!("{} amplitudes for dA={dim_a}, dB={dim_b}", dim_a * dim_b),
                amplitudes.len(),
            ));
        }
        if amplitudes.iter().all(|z| z.norm_sqr() == 0.0) {
            return Err(Error::ZeroVector);
        }
        Ok(Self {
            dim_a,
            dim_b,
            amplitudes,
        })
    }

    /// Builds `Σ c |i k⟩` from `(i, k, c)` triples.
    pub fn from_terms(dim_a: usize, dim_b: usize, terms: &[(usize, usize, f64)]) -> Result<Self> {
        let mut amps = vec![ZERO; dim_a * dim_b];
        for &(i, k, c) in terms {
            if i >= dim_a || k >= dim_b {
                return Err(mismatch("basis ket", format!("<{dim_a}, <{dim_b}"), format!("|{i}{k}>")));
            }
            amps[i * dim_b + k] += Complex64::new(c, 0.0);
        }
        Self::new(dim_a, dim_b, amps)
    }

    /// Unnormalized maximally entangled vector `Σ_i |ii⟩`.
    pub fn maximally_entangled(d: usize) -> Self {
        let mut amps = vec![ZERO; d * d];
        for i in 0..d {
            amps[i * d + i] = ONE;
        }
        Self::new(d, d, amps).expect("nonzero")
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            amplitudes: self.amplitudes.iter().map(|z| z / n).collect(),
        }
    }

    /// `dA × dB` matrix `M` with `|v⟩ = Σ M_{ik} |i k⟩`.
    pub fn coefficient_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::new(self.dim_a, self.dim_b, self.amplitudes.clone()).expect("length checked")
    }

    /// `|v⟩⟨v|`.
    pub fn projector(&self) -> BipartiteOperator {
        BipartiteOperator::new(self.dim_a, self.dim_b, ComplexMatrix::outer(&self.amplitudes))
            .expect("side dA*dB")
    }

    /// Schmidt coefficients of the normalized vector, descending.
    pub fn schmidt_coefficients(&self) -> Vec<f64> {
        let n = self.norm();
        singular_values(&self.coefficient_matrix())
            .into_iter()
            .map(|s| s / n)
            .collect()
    }

    /// Number of singular values above `tol × σ_max`.
    pub fn schmidt_rank(&self, tol: Tolerance) -> usize {
        relative_rank(&singular_values(&self.coefficient_matrix()), tol)
    }
}

pub fn schmidt_rank(v: &PureStateVector, tol: Tolerance) -> usize {
    v.schmidt_rank(tol)
}

/// `ρ = Σ_j p_j |a_j⟩⟨a_j|` as supplied by a caller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DecompositionRepr", into = "DecompositionRepr")]
pub struct PureDecomposition {
    weights: Vec<f64>,
    vectors: Vec<PureStateVector>,
}

#[derive(Serialize, Deserialize)]
struct DecompositionRepr {
    weights: Vec<f64>,
    vectors: Vec<PureStateVector>,
}

impl TryFrom<DecompositionRepr> for PureDecomposition {
    type Error = Error;

    fn try_from(r: DecompositionRepr) -> Result<Self> {
        PureDecomposition::new(r.weights, r.vectors)
    }
}

impl From<PureDecomposition> for DecompositionRepr {
    fn from(d: PureDecomposition) -> Self {
        DecompositionRepr {
            weights: d.weights,
            vectors: d.vectors,
        }
    }
}

impl PureDecomposition {
    pub fn new(weights: Vec<f64>, vectors: Vec<PureStateVector>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::MalformedDecomposition("no components".into()));
        }
        if weights.len() != vectors.len() {
            return Err(Error::MalformedDecomposition(format!(
                "{} weights for {} vectors",
                weights.len(),
                vectors.len()
            )));
        }
        if let Some(j) = weights.iter().position(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::MalformedDecomposition(format!(
                "weight {j} is {} (must be positive)",
                weights[j]
            )));
        }
        let dims = vectors[0].dims();
        if let Some(j) = vectors.iter().position(|v| v.dims() != dims) {
            return Err(Error::MalformedDecomposition(format!(
                "vector {j} has dims {:?}, expected {dims:?}",
                vectors[j].dims()
            )));
        }
        Ok(Self { weights, vectors })
    }

    /// Eigendecomposition of a PSD operator, dropping eigenvalues at or below
    /// `tol × λ_max`.
    pub fn from_eigendecomposition(rho: &BipartiteOperator, tol: Tolerance) -> Result<Self> {
        let (values, vectors) = hermitian_eigen(rho.matrix(), tol)?;
        if values[0] < -tol.eps() {
            return Err(Error::NotPsd {
                min_eigenvalue: values[0],
            });
        }
        let max = *values.last().expect("nonempty spectrum");
        let mut weights = Vec::new();
        let mut comps = Vec::new();
        for (k, &v) in values.iter().enumerate().rev() {
            if v > tol.eps() * max && v > 0.0 {
                weights.push(v);
                comps.push(PureStateVector::new(rho.dim_a(), rho.dim_b(), vectors.column_vec(k))?);
            }
        }
        Self::new(weights, comps)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn vectors(&self) -> &[PureStateVector] {
        &self.vectors
    }

    pub fn dims(&self) -> (usize, usize) {
        self.vectors[0].dims()
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &PureStateVector)> {
        self.weights.iter().copied().zip(&self.vectors)
    }

    /// `Σ_j p_j |a_j⟩⟨a_j|`.
    pub fn reconstruct(&self) -> BipartiteOperator {
        let (da, db) = self.dims();
        let mut acc = ComplexMatrix::zeros(da * db, da * db);
        for (p, v) in self.iter() {
            acc += &ComplexMatrix::outer(v.amplitudes()).scale(p);
        }
        BipartiteOperator::new(da, db, acc).expect("side dA*dB")
    }

    /// Copy with every weight multiplied by `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.weights.iter().map(|w| w * s).collect(), self.vectors.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PptStateCheck {
    pub flag: bool,
    /// Smallest eigenvalue of `ρ^Γ`.
    pub witness: f64,
}

fn psd_gate(rho: &BipartiteOperator, tol: Tolerance) -> Result<()> {
    let check = is_psd(rho.matrix(), tol)?;
    if check.flag {
        Ok(())
    } else {
        Err(Error::NotPsd {
            min_eigenvalue: check.min_eigenvalue,
        })
    }
}

pub(crate) fn require_psd(rho: &BipartiteOperator, tol: Tolerance) -> Result<()> {
    psd_gate(rho, tol)
}

/// PPT test for a Hermitian PSD operator.
pub fn is_ppt_state(rho: &BipartiteOperator, tol: Tolerance) -> Result<PptStateCheck> {
    psd_gate(rho, tol)?;
    let witness = hermitian_eigenvalues(rho.partial_transpose().matrix(), tol)?[0];
    Ok(PptStateCheck {
        flag: witness >= -tol.eps(),
        witness,
    })
}

/// `R(ρ)_{(i,j),(k,l)} = ρ_{(i,k),(j,l)}`, a `dA² × dB²` matrix.
pub fn realign(rho: &BipartiteOperator) -> ComplexMatrix {
    let (da, db) = rho.dims();
    ComplexMatrix::from_fn(da * da, db * db, |r, c| {
        let (i, j) = (r / da, r % da);
        let (k, l) = (c / db, c % db);
        rho.entry((i, k), (j, l))
    })
}

/// Trace norm of the realigned matrix. For a unit-trace state a value above 1
/// certifies entanglement; anything else is inconclusive.
pub fn realignment_norm(rho: &BipartiteOperator) -> f64 {
    trace_norm(&realign(rho))
}

/// Ranks of `Tr_B ρ` and `Tr_A ρ`, thresholded relative to each marginal's
/// largest eigenvalue.
pub fn local_support_dims(rho: &BipartiteOperator, tol: Tolerance) -> Result<(usize, usize)> {
    psd_gate(rho, tol)?;
    let ra = hermitian_eigenvalues(&rho.partial_trace(Subsystem::A), tol)?;
    let rb = hermitian_eigenvalues(&rho.partial_trace(Subsystem::B), tol)?;
    Ok((relative_rank(&ra, tol), relative_rank(&rb, tol)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionCheck {
    pub flag: bool,
    /// `‖ρ − Σ p_j |a_j⟩⟨a_j|‖_F`
    pub defect: f64,
    pub max_schmidt_rank: usize,
}

pub fn validate_decomposition(
    rho: &BipartiteOperator,
    dec: &PureDecomposition,
    tol: Tolerance,
) -> Result<DecompositionCheck> {
    if rho.dims() != dec.dims() {
        return Err(mismatch(
            "decomposition dims",
            format!("{:?}", rho.dims()),
            format!("{:?}", dec.dims()),
        ));
    }
    let defect = rho.distance(&dec.reconstruct());
    let max_schmidt_rank = dec
        .vectors()
        .iter()
        .map(|v| v.schmidt_rank(tol))
        .max()
        .unwrap_or(0);
    Ok(DecompositionCheck {
        flag: defect < tol.eps(),
        defect,
        max_schmidt_rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_product_vector, rng_from_seed};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn bell() -> BipartiteOperator {
        PureStateVector::maximally_entangled(2).projector()
    }

    #[test]
    fn schmidt_ranks() {
        assert_eq!(PureStateVector::maximally_entangled(4).schmidt_rank(tol()), 4);
        let v = PureStateVector::from_terms(3, 3, &[(0, 0, 0.3), (1, 1, -2.0)]).unwrap();
        assert_eq!(v.schmidt_rank(tol()), 2);
        let a = 3f64.sqrt() / 2.0;
        let v = PureStateVector::from_terms(4, 4, &[(0, 0, a), (1, 1, a), (2, 2, 1.0)]).unwrap();
        assert_eq!(schmidt_rank(&v, tol()), 3);
        let p = random_product_vector(3, 4, &mut rng_from_seed(2));
        assert_eq!(p.schmidt_rank(tol()), 1);
    }

    #[test]
    fn zero_vector_rejected() {
        assert_eq!(PureStateVector::new(2, 2, vec![ZERO; 4]).unwrap_err(), Error::ZeroVector);
    }

    #[test]
    fn ppt_state_checks() {
        let r = is_ppt_state(&bell(), tol()).unwrap();
        assert!(!r.flag);
        assert!((r.witness + 1.0).abs() < 1e-12);

        let a = ComplexMatrix::diag(&[0.2, 0.8]);
        let b = crate::random::random_psd(3, 3, &mut rng_from_seed(4));
        let prod = BipartiteOperator::product(&a, &b).unwrap();
        assert!(is_ppt_state(&prod, tol()).unwrap().flag);
    }

    #[test]
    fn ppt_state_rejects_non_psd() {
        let x = BipartiteOperator::new(1, 2, ComplexMatrix::diag(&[1.0, -0.5])).unwrap();
        match is_ppt_state(&x, tol()) {
            Err(Error::NotPsd { min_eigenvalue }) => assert!((min_eigenvalue + 0.5).abs() < 1e-14),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn realignment_values() {
        let p = random_product_vector(2, 3, &mut rng_from_seed(8)).normalized();
        assert!((realignment_norm(&p.projector()) - 1.0).abs() < 1e-10);
        let b = bell().scale(0.5);
        assert!((realignment_norm(&b) - 2.0).abs() < 1e-10);
        let sv = singular_values(&realign(&b));
        for s in sv {
            assert!((s - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn local_support_of_pure_states() {
        let v = PureStateVector::from_terms(3, 3, &[(0, 0, 1.0), (1, 2, 0.5)]).unwrap();
        assert_eq!(local_support_dims(&v.projector(), tol()).unwrap(), (2, 2));
        let p = random_product_vector(3, 3, &mut rng_from_seed(6));
        assert_eq!(local_support_dims(&p.projector(), tol()).unwrap(), (1, 1));
    }

    #[test]
    fn decomposition_validation() {
        let v = PureStateVector::from_terms(2, 2, &[(0, 0, 1.0), (1, 1, 0.5)]).unwrap();
        let dec = PureDecomposition::new(vec![1.0], vec![v.clone()]).unwrap();
        let check = validate_decomposition(&v.projector(), &dec, tol()).unwrap();
        assert!(check.flag && check.defect < 1e-14);
        assert_eq!(check.max_schmidt_rank, 2);

        let wrong = PureDecomposition::new(vec![1.5], vec![v.clone()]).unwrap();
        let check = validate_decomposition(&v.projector(), &wrong, tol()).unwrap();
        assert!(!check.flag && check.defect > 0.0);

        let other_dims = PureDecomposition::new(vec![1.0], vec![PureStateVector::maximally_entangled(3)]).unwrap();
        assert!(validate_decomposition(&v.projector(), &other_dims, tol()).is_err());
    }

    #[test]
    fn decomposition_constructor_validation() {
        let v = PureStateVector::maximally_entangled(2);
        assert!(PureDecomposition::new(vec![], vec![]).is_err());
        assert!(PureDecomposition::new(vec![0.0], vec![v.clone()]).is_err());
        assert!(PureDecomposition::new(vec![1.0, 1.0], vec![v.clone()]).is_err());
        let w = PureStateVector::maximally_entangled(3);
        assert!(PureDecomposition::new(vec![1.0, 1.0], vec![v, w]).is_err());
    }

    #[test]
    fn json_shapes() {
        let v = PureStateVector::from_terms(1, 2, &[(0, 1, 1.0)]).unwrap();
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"{"dA":1,"dB":2,"amplitudes":[[0.0,0.0],[1.0,0.0]]}"#);
        let dec = PureDecomposition::new(vec![0.5], vec![v]).unwrap();
        let s = serde_json::to_string(&dec).unwrap();
        assert!(s.starts_with(r#"{"weights":[0.5],"vectors":[{"dA":1"#));
        assert!(serde_json::from_str::<PureDecomposition>(r#"{"weights":[-1.0],"vectors":[{"dA":1,"dB":1,"amplitudes":[[1.0,0.0]]}]}"#).is_err());
    }
}
