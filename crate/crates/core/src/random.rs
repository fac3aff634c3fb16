//! Seeded random matrices, vectors and states for property tests and the
//! randomized suites.
//!
//! All generators take an explicit `&mut impl Rng`; [`rng_from_seed`] gives
//! the deterministic generator used everywhere else in the crate.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{BipartiteOperator, ComplexMatrix, ZERO};
use crate::states::{PureDecomposition, PureStateVector};

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed for the `index`-th sub-task of a run seeded with `base`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn random_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex64> {
    (0..n).map(|_| complex_gaussian(rng)).collect()
}

/// Orthonormalizes the columns of `m` (modified Gram–Schmidt). `m` must have
/// full column rank, which holds almost surely for Gaussian input.
pub fn orthonormalize_columns(m: &ComplexMatrix) -> ComplexMatrix {
    let (rows, cols) = m.shape();
    let mut q: Vec<Vec<Complex64>> = (0..cols).map(|j| m.column_vec(j)).collect();
    for j in 0..cols {
        for k in 0..j {
            let (done, rest) = q.split_at_mut(j);
            let proj: Complex64 = done[k].iter().zip(&rest[0]).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in rest[0].iter_mut().zip(&done[k]) {
                *x -= proj * y;
            }
        }
        let norm = q[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for x in &mut q[j] {
            *x /= norm;
        }
    }
    ComplexMatrix::from_fn(rows, cols, |i, j| q[j][i])
}

/// `rows × cols` matrix with orthonormal columns (`rows ≥ cols`).
pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    orthonormalize_columns(&ginibre(rows, cols, rng))
}

pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    random_isometry(d, d, rng)
}

/// Random Hermitian matrix `(G + G†)/2`.
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    ginibre(d, d, rng).hermitized()
}

/// Random PSD matrix `G G†` with `rank` columns.
pub fn random_psd<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(d, rank, rng);
    &g * &g.adjoint()
}

pub fn random_pure_state<R: Rng + ?Sized>(dim_a: usize, dim_b: usize, rng: &mut R) -> PureStateVector {
    PureStateVector::new(dim_a, dim_b, random_vector(dim_a * dim_b, rng))
        .expect("Gaussian vector is nonzero")
}

pub fn random_product_vector<R: Rng + ?Sized>(dim_a: usize, dim_b: usize, rng: &mut R) -> PureStateVector {
    let u = random_vector(dim_a, rng);
    let v = random_vector(dim_b, rng);
    let amps = u.iter().flat_map(|a| v.iter().map(move |b| a * b)).collect();
    PureStateVector::new(dim_a, dim_b, amps).expect("Gaussian product is nonzero")
}

/// `u₁⊗v₁ + u₂⊗v₂` with Gaussian factors: Schmidt rank exactly two almost surely
/// whenever both local dimensions are at least two.
pub fn random_schmidt_rank_two<R: Rng + ?Sized>(dim_a: usize, dim_b: usize, rng: &mut R) -> PureStateVector {
    let x = random_product_vector(dim_a, dim_b, rng);
    let y = random_product_vector(dim_a, dim_b, rng);
    let amps = x.amplitudes().iter().zip(y.amplitudes()).map(|(a, b)| a + b).collect();
    PureStateVector::new(dim_a, dim_b, amps).expect("sum of generic products is nonzero")
}

/// `cos θ |00⟩ + sin θ |11⟩` in local random bases, with the smaller Schmidt
/// coefficient `sin θ` drawn from `[min_coefficient, 1/√2]`.
pub fn random_entangled_two_qubit<R: Rng + ?Sized>(min_coefficient: f64, rng: &mut R) -> PureStateVector {
    let lo = min_coefficient.asin();
    let hi = std::f64::consts::FRAC_PI_4;
    let theta = lo + (hi - lo) * rng.random::<f64>();
    let mut amps = vec![ZERO; 4];
    amps[0] = Complex64::new(theta.cos(), 0.0);
    amps[3] = Complex64::new(theta.sin(), 0.0);
    let local = crate::linalg::kron(&random_unitary(2, rng), &random_unitary(2, rng));
    let rotated = &local * &ComplexMatrix::column(&amps);
    PureStateVector::new(2, 2, rotated.column_vec(0)).expect("unit vector")
}

/// Weighted decomposition into `count` random product vectors.
pub fn random_product_mixture<R: Rng + ?Sized>(
    dim_a: usize,
    dim_b: usize,
    count: usize,
    rng: &mut R,
) -> PureDecomposition {
    let vectors = (0..count).map(|_| random_product_vector(dim_a, dim_b, rng)).collect();
    let weights = (0..count).map(|_| 0.1 + rng.random::<f64>()).collect();
    PureDecomposition::new(weights, vectors).expect("positive weights, common dims")
}

/// Weighted decomposition into `count` random Schmidt-rank-two vectors.
pub fn random_rank_two_mixture<R: Rng + ?Sized>(
    dim_a: usize,
    dim_b: usize,
    count: usize,
    rng: &mut R,
) -> PureDecomposition {
    let vectors = (0..count).map(|_| random_schmidt_rank_two(dim_a, dim_b, rng)).collect();
    let weights = (0..count).map(|_| 0.1 + rng.random::<f64>()).collect();
    PureDecomposition::new(weights, vectors).expect("positive weights, common dims")
}

/// Random bipartite density operator of the given rank (unnormalized).
pub fn random_state<R: Rng + ?Sized>(dim_a: usize, dim_b: usize, rank: usize, rng: &mut R) -> BipartiteOperator {
    BipartiteOperator::new(dim_a, dim_b, random_psd(dim_a * dim_b, rank, rng))
        .expect("square matrix with matching side")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Tolerance;

    #[test]
    fn isometry_columns_are_orthonormal() {
        let mut rng = rng_from_seed(7);
        let v = random_isometry(12, 3, &mut rng);
        let gram = &v.adjoint() * &v;
        assert!(gram.approx_eq(&ComplexMatrix::identity(3), Tolerance::new(1e-12).unwrap()));
    }

    #[test]
    fn same_seed_same_stream() {
        let a = ginibre(3, 3, &mut rng_from_seed(42));
        let b = ginibre(3, 3, &mut rng_from_seed(42));
        assert_eq!(a, b);
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
    }

    #[test]
    fn entangled_two_qubit_respects_min_coefficient() {
        let mut rng = rng_from_seed(3);
        for _ in 0..50 {
            let v = random_entangled_two_qubit(0.1, &mut rng);
            let sv = v.schmidt_coefficients();
            assert!(sv[1] >= 0.1 - 1e-12, "{sv:?}");
        }
    }
}
