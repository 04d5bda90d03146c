//! Seeded constructions: commuting normal families, Kolmogorov factors of
//! positive kernels, convex averages of dilation families, evaluation of
//! `T^∞`, and the named example gallery.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, block_assemble, commutator, hermitian_eigen, operator_norm, CMatrix, LinalgError};
use crate::representation::{Representation, RepresentationError};
use crate::semigroup::{Factorization, GroupElement, SemigroupDescriptor, SemigroupError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConstructionError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Representation(#[from] RepresentationError),
    #[error(transparent)]
    Semigroup(#[from] SemigroupError),
    #[error("kernel is not positive semidefinite (minimum eigenvalue {margin:.6e})")]
    NotPsd { margin: f64 },
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("invalid dilation family: {0}")]
    InvalidFamily(String),
    #[error("unknown gallery case '{0}'")]
    UnknownCase(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, ConstructionError>;

fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Orthonormalizes the columns of a seeded Gaussian matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<Complex64> = (0..n).map(|_| complex_gaussian(rng)).collect();
        // Two Gram-Schmidt passes keep the result orthonormal to working precision.
        for _ in 0..2 {
            for q in &cols {
                let dot: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= dot * y;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    CMatrix::from_fn(n, n, |i, j| cols[j][i])
}

fn random_disk_point(rng: &mut ChaCha8Rng) -> Complex64 {
    let r: f64 = rng.random_range(0.0..=1.0f64).sqrt();
    Complex64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))
}

/// `Nᵢ = W Dᵢ W*` with one seeded unitary `W` and diagonal `Dᵢ` in the closed unit disk.
pub fn make_commuting_normals(seed: u64, dim: usize, m: usize) -> Vec<CMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = random_unitary(&mut rng, dim);
    let w_adj = w.adjoint();
    (0..m)
        .map(|_| {
            let d: Vec<Complex64> = (0..dim).map(|_| random_disk_point(&mut rng)).collect();
            &(&w * &CMatrix::from_diag(&d)) * &w_adj
        })
        .collect()
}

/// Factors `V₁..V_n` with `K_ij = V_i* V_j`, from the spectral square root of
/// the assembled kernel.
pub fn kolmogorov_factor(grid: &[Vec<CMatrix>], tol: f64) -> Result<Vec<CMatrix>> {
    let k = block_assemble(grid)?;
    let psd = linalg::psd_check(&k, tol)?;
    if !psd.is_psd {
        return Err(ConstructionError::NotPsd {
            margin: psd.min_eigenvalue,
        });
    }
    let root = hermitian_eigen(&k.hermitian_part())?.reconstruct_with(|x| x.max(0.0).sqrt());
    let mut offset = 0;
    let mut factors = Vec::with_capacity(grid.len());
    for row in grid {
        let width = row.first().map_or(0, CMatrix::rows);
        factors.push(root.submatrix(0, offset, root.rows(), width));
        offset += width;
    }
    Ok(factors)
}

/// Commuting unitaries on `K = K₊ ⊕ H ⊕ K₋` sharing the compression `T` to `H`.
#[derive(Debug, Clone, PartialEq)]
pub struct DilationFamily {
    members: Vec<CMatrix>,
    ambient_dim: usize,
    subspace_dim: usize,
    plus_dim: usize,
}

impl DilationFamily {
    pub fn new(members: Vec<CMatrix>, plus_dim: usize, subspace_dim: usize, tol: f64) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(ConstructionError::InvalidFamily("no members".into()));
        };
        let ambient_dim = first.require_square()?;
        if plus_dim + subspace_dim > ambient_dim {
            return Err(ConstructionError::InvalidFamily(format!(
                "blocks {plus_dim} + {subspace_dim} exceed the ambient dimension {ambient_dim}"
            )));
        }
        let corner = |m: &CMatrix| m.submatrix(plus_dim, plus_dim, subspace_dim, subspace_dim);
        let t = corner(first);
        let id = CMatrix::identity(ambient_dim);
        for (i, u) in members.iter().enumerate() {
            if u.require_square()? != ambient_dim {
                return Err(ConstructionError::InvalidFamily(format!("member {} has the wrong size", i + 1)));
            }
            let r = (&(&u.adjoint() * u) - &id).frobenius_norm();
            if r > tol {
                return Err(ConstructionError::InvalidFamily(format!(
                    "member {} is not unitary (residual {r:.3e})",
                    i + 1
                )));
            }
            let r = (&corner(u) - &t).frobenius_norm();
            if r > tol {
                return Err(ConstructionError::InvalidFamily(format!(
                    "member {} has a different compression to H (residual {r:.3e})",
                    i + 1
                )));
            }
            for (j, v) in members.iter().enumerate().skip(i + 1) {
                let r = commutator(u, v).frobenius_norm();
                if r > tol {
                    return Err(ConstructionError::InvalidFamily(format!(
                        "members {} and {} do not commute (residual {r:.3e})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(DilationFamily {
            members,
            ambient_dim,
            subspace_dim,
            plus_dim,
        })
    }

    pub fn members(&self) -> &[CMatrix] {
        &self.members
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn subspace_dim(&self) -> usize {
        self.subspace_dim
    }

    pub fn plus_dim(&self) -> usize {
        self.plus_dim
    }

    pub fn minus_dim(&self) -> usize {
        self.ambient_dim - self.plus_dim - self.subspace_dim
    }

    /// Compression of `m` to `H`.
    pub fn corner(&self, m: &CMatrix) -> CMatrix {
        m.submatrix(self.plus_dim, self.plus_dim, self.subspace_dim, self.subspace_dim)
    }

    /// The `H → K₋` block of `m`.
    pub fn defect(&self, m: &CMatrix) -> CMatrix {
        let start = self.plus_dim + self.subspace_dim;
        m.submatrix(start, self.plus_dim, self.minus_dim(), self.subspace_dim)
    }
}

/// A family of `n` commuting unitaries compressing to the normal contraction
/// `T = V diag(t) V*`, with pairwise orthogonal defects `D_j* D_i = δ_ij (I − T*T)`.
///
/// On `ℂ^{2^r} ⊗ ℂ^d` the members are `I ⊗ A + Pᵢ ⊗ B`, where `Pᵢ` permutes
/// basis vectors by XOR with `i`, `A = T` and `B = V diag(δ) V*` with
/// `δ_k = i·e^{i arg t_k}·√(1 − |t_k|²)`, so that `A*A + B*B = I` and
/// `A*B + B*A = 0`. `H` is the copy at index 0. The `K₊` block carries
/// diagonal phases and does not interact with `H`.
pub fn orthogonal_defect_family(
    t: &[Complex64],
    basis: &CMatrix,
    n: usize,
    plus_phases: &[f64],
) -> Result<DilationFamily> {
    let d = t.len();
    if basis.rows() != d || basis.cols() != d {
        return Err(ConstructionError::InvalidParameter(format!(
            "basis must be {d}x{d}, got {}x{}",
            basis.rows(),
            basis.cols()
        )));
    }
    if let Some(z) = t.iter().find(|z| z.norm() > 1.0) {
        return Err(ConstructionError::InvalidParameter(format!("|{z}| > 1")));
    }
    if n == 0 {
        return Err(ConstructionError::InvalidParameter("family needs at least one member".into()));
    }
    let copies = (n + 1).next_power_of_two();
    let delta: Vec<Complex64> = t
        .iter()
        .map(|z| Complex64::i() * Complex64::from_polar(1.0, z.arg()) * (1.0 - z.norm_sqr()).max(0.0).sqrt())
        .collect();
    let basis_adj = basis.adjoint();
    let a = &(basis * &CMatrix::from_diag(t)) * &basis_adj;
    let b = &(basis * &CMatrix::from_diag(&delta)) * &basis_adj;
    let plus = CMatrix::from_diag(&plus_phases.iter().map(|&x| Complex64::from_polar(1.0, x)).collect::<Vec<_>>());
    let members = (1..=n)
        .map(|i| {
            let mut core = CMatrix::zeros(copies * d, copies * d);
            for s in 0..copies {
                core.set_block(s * d, s * d, &a);
                core.set_block((s ^ i) * d, s * d, &b);
            }
            plus.direct_sum(&core)
        })
        .collect();
    DilationFamily::new(members, plus_phases.len(), d, 1e-9)
}

/// [`orthogonal_defect_family`] with seeded `t` in the unit disk, a seeded basis and seeded phases.
pub fn seeded_orthogonal_defect_family(seed: u64, d: usize, n: usize, plus_dim: usize) -> Result<DilationFamily> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = random_unitary(&mut rng, d);
    let t: Vec<Complex64> = (0..d).map(|_| random_disk_point(&mut rng)).collect();
    let phases: Vec<f64> = (0..plus_dim).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
    orthogonal_defect_family(&t, &basis, n, &phases)
}

/// Finitely supported convex weights `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexWeights(Vec<f64>);

/// Compensated sum, so that the unit-sum test is meaningful at 1e-15.
fn neumaier_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

impl ConvexWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(ConstructionError::InvalidWeights("no weights".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(ConstructionError::InvalidWeights(format!("weight {w} is outside [0, 1]")));
        }
        let sum = neumaier_sum(&weights);
        if (sum - 1.0).abs() > 1e-15 {
            return Err(ConstructionError::InvalidWeights(format!("weights sum to {sum:.17}, not 1")));
        }
        Ok(ConvexWeights(weights))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(ConstructionError::InvalidWeights("no weights".into()));
        }
        Ok(ConvexWeights(vec![1.0 / n as f64; n]))
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn sum(&self) -> f64 {
        neumaier_sum(&self.0)
    }

    pub fn l2_norm(&self) -> f64 {
        self.0.iter().map(|w| w * w).sum::<f64>().sqrt()
    }
}

/// `N_λ = Σ λᵢ Uᵢ`, together with `‖D_λ‖` and `‖λ‖₂`.
pub fn convex_average(family: &DilationFamily, w: &ConvexWeights) -> Result<(CMatrix, f64, f64)> {
    if w.weights().len() > family.members.len() {
        return Err(ConstructionError::InvalidWeights(format!(
            "{} weights for a family of {} members",
            w.weights().len(),
            family.members.len()
        )));
    }
    let n = family.ambient_dim;
    let mut acc = CMatrix::zeros(n, n);
    for (lambda, u) in w.weights().iter().zip(&family.members) {
        acc.add_scaled(*lambda, u);
    }
    let defect = operator_norm(&family.defect(&acc));
    Ok((acc, defect, w.l2_norm()))
}

/// `T^∞(x) = ∏ T(x_j)` over the support of `x` in the infinite power of `P`.
pub fn tinfty_eval(t: &Representation, x: &GroupElement) -> Result<CMatrix> {
    let power = SemigroupDescriptor::infinite_power(t.descriptor().clone());
    if !power.contains(x)? {
        return Err(SemigroupError::NotMember {
            element: x.to_string(),
            descriptor: power.to_string(),
        }
        .into());
    }
    let GroupElement::Power(support) = x else {
        unreachable!("membership in a power implies a power element")
    };
    let mut acc = CMatrix::identity(t.dimension());
    for (_, component) in support.iter() {
        acc = &acc * &t.eval(component)?;
    }
    Ok(acc)
}

/// Output of the example gallery.
#[derive(Debug, Clone)]
pub enum GalleryItem {
    Matrix(CMatrix),
    Representation(Representation),
}

impl GalleryItem {
    /// Matrices become representations of `ℕ` with a single generator.
    pub fn into_representation(self) -> Representation {
        match self {
            GalleryItem::Representation(r) => r,
            GalleryItem::Matrix(m) => {
                let d = m.rows();
                Representation::new(SemigroupDescriptor::free_abelian(1), d, vec![m], vec![])
                    .expect("a square matrix always defines a representation of ℕ")
            }
        }
    }
}

/// Parameters of a gallery case; unset fields take the case's defaults.
#[derive(Debug, Clone, Default)]
pub struct GalleryParams {
    pub dim: Option<usize>,
    pub weights: Option<Vec<f64>>,
    pub lambda: Option<f64>,
    pub matrix: Option<CMatrix>,
    pub angles: Option<Vec<Vec<f64>>>,
    pub seed: Option<u64>,
}

pub const GALLERY_CASES: [&str; 6] = [
    "jordan",
    "truncated_shift",
    "neil_scalar",
    "neil_matrix",
    "unitary_rep",
    "normal_pair",
];

/// The `d×d` nilpotent Jordan block.
pub fn jordan(d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| if j == i + 1 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
}

/// The weighted shift `e_k ↦ w_k e_{k+1}` on `ℂ^{len+1}`.
pub fn truncated_shift(weights: &[f64]) -> Result<CMatrix> {
    if let Some(w) = weights.iter().find(|w| w.is_nan() || w.abs() > 1.0) {
        return Err(ConstructionError::InvalidParameter(format!("shift weight {w} exceeds 1 in modulus")));
    }
    let d = weights.len() + 1;
    Ok(CMatrix::from_fn(d, d, |i, j| {
        if i == j + 1 {
            Complex64::new(weights[j], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

/// `n ↦ λⁿ` on `ℕ \ {1}`, generated by `T(2) = λ²` and `T(3) = λ³`.
pub fn neil_scalar(lambda: f64) -> Representation {
    neil_matrix(&CMatrix::scalar(Complex64::new(lambda, 0.0))).expect("scalar images are square")
}

/// `n ↦ Aⁿ` on `ℕ \ {1}`, with the relation `T(2)³ = T(3)²`.
pub fn neil_matrix(a: &CMatrix) -> Result<Representation> {
    let d = a.require_square()?;
    let descriptor = SemigroupDescriptor::numerical([1])?;
    Ok(Representation::new(
        descriptor,
        d,
        vec![a.pow(2), a.pow(3)],
        vec![(Factorization::new([(0, 3)]), Factorization::new([(1, 2)]))],
    )?)
}

/// `ℕ^k` acting by diagonal unitaries `diag(e^{iθ})`, one angle list per generator.
pub fn unitary_rep(angles: &[Vec<f64>]) -> Result<Representation> {
    let d = angles.first().map_or(1, Vec::len);
    if angles.iter().any(|a| a.len() != d) || d == 0 {
        return Err(ConstructionError::InvalidParameter(
            "every generator needs the same positive number of angles".into(),
        ));
    }
    let images = angles
        .iter()
        .map(|a| CMatrix::from_diag(&a.iter().map(|&x| Complex64::from_polar(1.0, x)).collect::<Vec<_>>()))
        .collect();
    Ok(Representation::new(SemigroupDescriptor::free_abelian(angles.len()), d, images, vec![])?)
}

/// `ℕ²` acting by a seeded commuting normal pair.
pub fn normal_pair(seed: u64, d: usize) -> Representation {
    Representation::new(SemigroupDescriptor::free_abelian(2), d, make_commuting_normals(seed, d, 2), vec![])
        .expect("two square images define a representation of ℕ²")
}

pub fn make_gallery(case: &str, params: &GalleryParams) -> Result<GalleryItem> {
    let positive_dim = |default: usize| match params.dim {
        Some(0) => Err(ConstructionError::InvalidParameter("dimension must be positive".into())),
        Some(d) => Ok(d),
        None => Ok(default),
    };
    match case {
        "jordan" => Ok(GalleryItem::Matrix(jordan(positive_dim(2)?))),
        "truncated_shift" => {
            let w = params.weights.clone().unwrap_or_else(|| vec![0.5, 0.9]);
            Ok(GalleryItem::Matrix(truncated_shift(&w)?))
        }
        "neil_scalar" => {
            let lambda = params.lambda.unwrap_or(0.5);
            if lambda.is_nan() || lambda.abs() > 1.0 {
                return Err(ConstructionError::InvalidParameter(format!("|λ| = {} exceeds 1", lambda.abs())));
            }
            Ok(GalleryItem::Representation(neil_scalar(lambda)))
        }
        "neil_matrix" => {
            let a = params
                .matrix
                .clone()
                .unwrap_or_else(|| CMatrix::from_real(&[&[0.5, 0.25], &[0.0, 0.5]]));
            let norm = operator_norm(&a);
            if norm > 1.0 + 1e-12 {
                return Err(ConstructionError::InvalidParameter(format!("‖A‖ = {norm} exceeds 1")));
            }
            Ok(GalleryItem::Representation(neil_matrix(&a)?))
        }
        "unitary_rep" => {
            let angles = params
                .angles
                .clone()
                .unwrap_or_else(|| vec![vec![0.3, 1.1], vec![0.7, -0.4]]);
            Ok(GalleryItem::Representation(unitary_rep(&angles)?))
        }
        "normal_pair" => Ok(GalleryItem::Representation(normal_pair(
            params.seed.unwrap_or(0),
            positive_dim(3)?,
        ))),
        other => Err(ConstructionError::UnknownCase(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificates::{agler_certificate, Tolerances, Verdict};
    use crate::linalg::psd_check;
    use crate::representation::{validate_normal_map, validate_rep, NormalMap};
    use crate::semigroup::Support;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    #[test]
    fn random_unitary_is_unitary_and_seeded() {
        for n in [1, 2, 5, 16] {
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
            let u = random_unitary(&mut rng, n);
            assert!((&(&u.adjoint() * &u) - &CMatrix::identity(n)).max_abs() < 1e-13);
            let mut again = ChaCha8Rng::seed_from_u64(n as u64);
            assert_eq!(random_unitary(&mut again, n), u);
        }
    }

    #[test]
    fn commuting_normals_examples() {
        let s = make_commuting_normals(1, 1, 1);
        assert_eq!(s[0].rows(), 1);
        assert!(s[0][(0, 0)].norm() <= 1.0 + 1e-15);
        for seed in 0..20 {
            let ns = make_commuting_normals(seed, 5, 3);
            for (i, a) in ns.iter().enumerate() {
                assert!(commutator(a, &a.adjoint()).max_abs() <= 1e-12);
                assert!(operator_norm(a) <= 1.0 + 1e-12);
                for b in &ns[i + 1..] {
                    assert!(operator_norm(&commutator(a, b)) <= 1e-12);
                    let star = &(a * &b.adjoint()) - &(&b.adjoint() * a);
                    assert!(operator_norm(&star) <= 1e-12);
                }
            }
        }
        assert_eq!(make_commuting_normals(4, 3, 2), make_commuting_normals(4, 3, 2));
    }

    #[test]
    fn commuting_normals_are_self_extensions() {
        for seed in 0..10 {
            let ns = make_commuting_normals(seed, 4, 2);
            let t = Representation::new(SemigroupDescriptor::free_abelian(2), 4, ns, vec![]).unwrap();
            assert!(validate_rep(&t, 1e-9, 20, seed).is_valid());
            let images: BTreeMap<_, _> = [[1, 0], [0, 1], [2, 3], [0, 0]]
                .iter()
                .map(|p| {
                    let g = GroupElement::ints(p);
                    let m = t.eval(&g).unwrap();
                    (g, m)
                })
                .collect();
            let nm = NormalMap::new(t, 4, images).unwrap();
            assert!(validate_normal_map(&nm, 1e-9).unwrap().is_valid());
        }
    }

    fn roundtrip(grid: &[Vec<CMatrix>], factors: &[CMatrix]) -> f64 {
        let mut worst = 0.0f64;
        for (i, row) in grid.iter().enumerate() {
            for (j, k) in row.iter().enumerate() {
                worst = worst.max(operator_norm(&(k - &(&factors[i].adjoint() * &factors[j]))));
            }
        }
        worst
    }

    #[test]
    fn kolmogorov_examples() {
        let grid: Vec<Vec<CMatrix>> = (0..3)
            .map(|i| (0..3).map(|j| if i == j { CMatrix::identity(2) } else { CMatrix::zeros(2, 2) }).collect())
            .collect();
        let v = kolmogorov_factor(&grid, 1e-8).unwrap();
        assert!(roundtrip(&grid, &v) < 1e-14);
        for f in &v {
            assert!((&(&f.adjoint() * f) - &CMatrix::identity(2)).max_abs() < 1e-14);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let ws: Vec<CMatrix> = (0..4).map(|_| CMatrix::from_fn(5, 3, |_, _| complex_gaussian(&mut rng))).collect();
        let grid: Vec<Vec<CMatrix>> = ws.iter().map(|a| ws.iter().map(|b| &a.adjoint() * b).collect()).collect();
        let v = kolmogorov_factor(&grid, 1e-8).unwrap();
        assert!(roundtrip(&grid, &v) < 1e-9);

        let bad = vec![vec![CMatrix::from_real_diag(&[1.0, -0.1])]];
        match kolmogorov_factor(&bad, 1e-8) {
            Err(ConstructionError::NotPsd { margin }) => assert!((margin + 0.1).abs() < 1e-14),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dilation_family_structure() {
        let f = seeded_orthogonal_defect_family(3, 3, 5, 2).unwrap();
        assert_eq!(f.members().len(), 5);
        assert_eq!(f.ambient_dim(), 2 + 8 * 3);
        let t = f.corner(&f.members()[0]);
        let defect_gram = &CMatrix::identity(3) - &(&t.adjoint() * &t);
        for (i, a) in f.members().iter().enumerate() {
            for (j, b) in f.members().iter().enumerate() {
                let cross = &f.defect(b).adjoint() * &f.defect(a);
                if i == j {
                    assert!(cross.max_abs_diff(&defect_gram) < 1e-12);
                } else {
                    assert!(cross.max_abs() < 1e-12);
                }
            }
        }
        assert!(DilationFamily::new(vec![CMatrix::from_real_diag(&[1.0, 0.5])], 0, 1, 1e-9).is_err());
    }

    #[test]
    fn convex_average_examples() {
        let f = seeded_orthogonal_defect_family(1, 2, 3, 1).unwrap();
        let (n, _, l2) = convex_average(&f, &ConvexWeights::new(vec![1.0]).unwrap()).unwrap();
        assert_eq!(n, f.members()[0]);
        assert_eq!(l2, 1.0);

        for k in 1..=3 {
            let w = ConvexWeights::uniform(k).unwrap();
            let (n, defect, l2) = convex_average(&f, &w).unwrap();
            assert!((l2 - 1.0 / (k as f64).sqrt()).abs() <= 4.0 * f64::EPSILON);
            assert!(defect <= l2 + 1e-10);
            assert!(f.corner(&n).max_abs_diff(&f.corner(&f.members()[0])) <= 1e-12);
        }
        assert!(convex_average(&f, &ConvexWeights::uniform(4).unwrap()).is_err());
        assert!(ConvexWeights::new(vec![0.5, 0.4]).is_err());
        assert!(ConvexWeights::new(vec![1.5, -0.5]).is_err());
        assert!(ConvexWeights::new(vec![0.1; 10]).is_ok());
    }

    #[test]
    fn defect_norm_is_attained_when_t_has_a_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let basis = random_unitary(&mut rng, 3);
        let t = [Complex64::new(0.0, 0.0), Complex64::new(0.3, 0.5), Complex64::new(-0.7, 0.1)];
        let f = orthogonal_defect_family(&t, &basis, 6, &[0.4]).unwrap();
        let w = ConvexWeights::new(vec![0.5, 0.25, 0.125, 0.125]).unwrap();
        let (_, defect, l2) = convex_average(&f, &w).unwrap();
        assert!((defect - l2).abs() <= 1e-10);
    }

    #[test]
    fn tinfty_examples() {
        let t = neil_scalar(0.5);
        let p = GroupElement::int(5);
        let x = GroupElement::Power(Support::single(5, p.clone()));
        assert_eq!(tinfty_eval(&t, &x).unwrap(), t.eval(&p).unwrap());
        let q = GroupElement::int(3);
        let y = GroupElement::Power(Support::new([(1, p.clone()), (2, q.clone())]));
        assert_eq!(tinfty_eval(&t, &y).unwrap(), &t.eval(&p).unwrap() * &t.eval(&q).unwrap());
        let zero = GroupElement::Power(Support::new([]));
        assert_eq!(tinfty_eval(&t, &zero).unwrap(), CMatrix::identity(1));
        let bad = GroupElement::Power(Support::single(2, GroupElement::int(1)));
        assert!(tinfty_eval(&t, &bad).is_err());
        assert!(tinfty_eval(&t, &p).is_err());
    }

    #[test]
    fn gallery_examples() {
        let GalleryItem::Matrix(j) = make_gallery("jordan", &GalleryParams::default()).unwrap() else {
            panic!()
        };
        assert_eq!(j, CMatrix::from_real(&[&[0.0, 1.0], &[0.0, 0.0]]));

        let s = truncated_shift(&[0.5, 0.9]).unwrap();
        let hypo = &(&s.adjoint() * &s) - &(&s * &s.adjoint());
        let expected = CMatrix::from_real_diag(&[0.25, 0.56, -0.81]);
        assert!(hypo.max_abs_diff(&expected) < 1e-15);
        assert!(!psd_check(&hypo, 1e-8).unwrap().is_psd);
        assert!(truncated_shift(&[1.2]).is_err());

        let t = neil_scalar(0.5);
        let v = validate_rep(&t, 1e-9, 0, 0);
        assert_eq!(v.check("relation:1").unwrap().residual, Some(0.0));

        for case in GALLERY_CASES {
            let item = make_gallery(case, &GalleryParams::default()).unwrap();
            let rep = item.into_representation();
            assert!(validate_rep(&rep, 1e-9, 20, 0).is_valid(), "{case}");
        }
        assert!(matches!(
            make_gallery("lubin", &GalleryParams::default()),
            Err(ConstructionError::UnknownCase(_))
        ));
        let r = agler_certificate(&jordan(3), 2, Tolerances::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn kolmogorov_roundtrip(seed in 0u64..10_000, n in 1usize..=6, d in 1usize..=8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ws: Vec<CMatrix> = (0..n).map(|_| CMatrix::from_fn(d + 1, d, |_, _| complex_gaussian(&mut rng))).collect();
            let grid: Vec<Vec<CMatrix>> = ws.iter().map(|a| ws.iter().map(|b| &a.adjoint() * b).collect()).collect();
            let norm = operator_norm(&block_assemble(&grid).unwrap());
            let v = kolmogorov_factor(&grid, 1e-8).unwrap();
            prop_assert!(roundtrip(&grid, &v) <= 1e-9 * norm.max(1.0));
        }

        #[test]
        fn convex_corner_is_invariant(seed in 0u64..1000, raw in proptest::collection::vec(0.0f64..1.0, 1..6)) {
            let total: f64 = raw.iter().sum();
            prop_assume!(total > 1e-3);
            let mut w: Vec<f64> = raw.iter().map(|x| x / total).collect();
            let head: f64 = w[1..].iter().sum();
            w[0] = (1.0 - head).max(0.0);
            prop_assume!(ConvexWeights::new(w.clone()).is_ok());
            let f = seeded_orthogonal_defect_family(seed, 2, 6, 1).unwrap();
            let w = ConvexWeights::new(w).unwrap();
            let (n, defect, l2) = convex_average(&f, &w).unwrap();
            prop_assert!(f.corner(&n).max_abs_diff(&f.corner(&f.members()[0])) <= 1e-12);
            prop_assert!(defect <= l2 + 1e-10);
        }

        #[test]
        fn tinfty_is_invariant_under_support_permutation(a in 0i64..8, b in 0i64..8, c in 0i64..8, i in 1u64..20, j in 20u64..40) {
            prop_assume!(a != 1 && b != 1 && c != 1);
            let m = CMatrix::from_real(&[&[0.6, 0.3], &[-0.1, 0.5]]);
            let t = neil_matrix(&m).unwrap();
            let x = GroupElement::Power(Support::new([(1, GroupElement::int(a)), (i + 1, GroupElement::int(b)), (j + 1, GroupElement::int(c))]));
            let y = GroupElement::Power(Support::new([(j + 1, GroupElement::int(a)), (1, GroupElement::int(b)), (i + 1, GroupElement::int(c))]));
            prop_assert!(tinfty_eval(&t, &x).unwrap().max_abs_diff(&tinfty_eval(&t, &y).unwrap()) <= 1e-12);
        }
    }
}
