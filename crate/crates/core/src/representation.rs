//! Contractive matrix representations of semigroup descriptors, normal
//! maps, and the involution-semigroup kernel on `Q = P × P`.

use std::collections::{BTreeMap, HashMap};
use std::sync::RwLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{self, commutator, operator_norm, CMatrix, LinalgError};
use crate::semigroup::{Factorization, GroupElement, SemigroupDescriptor, SemigroupError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RepresentationError {
    #[error(transparent)]
    Semigroup(#[from] SemigroupError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("{descriptor} has {expected} generators, got {got} images")]
    GeneratorCount {
        descriptor: String,
        expected: usize,
        got: usize,
    },
    #[error("image of generator {generator}: {reason}")]
    BadImage { generator: String, reason: String },
    #[error("bad relation: {0}")]
    BadRelation(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

pub type Result<T> = std::result::Result<T, RepresentationError>;

/// Default absolute residual tolerance for structural validation.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-9;

/// One named check with its numeric residual.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub residual: Option<f64>,
    pub detail: Option<String>,
    /// Reported but excluded from the overall verdict.
    pub informational: bool,
}

impl Check {
    fn residual(name: impl Into<String>, residual: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            passed: residual <= tol,
            residual: Some(residual),
            detail: None,
            informational: false,
        }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationVerdict {
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl ValidationVerdict {
    pub fn is_valid(&self) -> bool {
        self.checks.iter().all(|c| c.passed || c.informational)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed && !c.informational)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Largest residual among checks whose name starts with `prefix`.
    pub fn max_residual(&self, prefix: &str) -> Option<f64> {
        self.checks
            .iter()
            .filter(|c| c.name.starts_with(prefix))
            .filter_map(|c| c.residual)
            .reduce(f64::max)
    }
}

#[derive(Default)]
struct EvalCache(RwLock<HashMap<GroupElement, CMatrix>>);

impl Clone for EvalCache {
    fn clone(&self) -> Self {
        EvalCache::default()
    }
}

impl std::fmt::Debug for EvalCache {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("EvalCache")
    }
}

/// A representation `T: P → M_d(ℂ)` given by generator images and relations.
#[derive(Debug, Clone)]
pub struct Representation {
    descriptor: SemigroupDescriptor,
    dimension: usize,
    generator_images: Vec<CMatrix>,
    relations: Vec<(Factorization, Factorization)>,
    cache: EvalCache,
}

impl Representation {
    /// Checks shapes only; the analytic invariants are reported by [`validate_rep`].
    pub fn new(
        descriptor: SemigroupDescriptor,
        dimension: usize,
        generator_images: Vec<CMatrix>,
        relations: Vec<(Factorization, Factorization)>,
    ) -> Result<Self> {
        if !descriptor.is_finitely_generated() {
            return Err(SemigroupError::NotFinitelyGenerated(descriptor.to_string()).into());
        }
        let expected = descriptor.generators().len();
        if generator_images.len() != expected {
            return Err(RepresentationError::GeneratorCount {
                descriptor: descriptor.to_string(),
                expected,
                got: generator_images.len(),
            });
        }
        for (i, m) in generator_images.iter().enumerate() {
            if m.rows() != dimension || m.cols() != dimension {
                return Err(RepresentationError::BadImage {
                    generator: descriptor.generator_label(i).unwrap_or_default(),
                    reason: format!(
                        "expected {dimension}x{dimension}, got {}x{}",
                        m.rows(),
                        m.cols()
                    ),
                });
            }
        }
        for (lhs, rhs) in &relations {
            for f in [lhs, rhs] {
                if let Some((g, _)) = f.terms().find(|(g, _)| *g >= expected) {
                    return Err(RepresentationError::BadRelation(format!(
                        "generator index {g} out of range"
                    )));
                }
            }
        }
        Ok(Representation {
            descriptor,
            dimension,
            generator_images,
            relations,
            cache: EvalCache::default(),
        })
    }

    pub fn descriptor(&self) -> &SemigroupDescriptor {
        &self.descriptor
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn generator_images(&self) -> &[CMatrix] {
        &self.generator_images
    }

    pub fn relations(&self) -> &[(Factorization, Factorization)] {
        &self.relations
    }

    /// `∏ᵢ Tᵢ^{mᵢ}` in generator-index order.
    pub fn eval_factorization(&self, f: &Factorization) -> CMatrix {
        let mut acc = CMatrix::identity(self.dimension);
        for (g, m) in f.terms() {
            acc = &acc * &self.generator_images[g].pow(m);
        }
        acc
    }

    /// `T(p)`, through the descriptor's deterministic factorization.
    pub fn eval(&self, p: &GroupElement) -> Result<CMatrix> {
        if let Some(m) = self.cache.0.read().expect("cache lock").get(p) {
            return Ok(m.clone());
        }
        let f = self.descriptor.factorize(p)?;
        let value = self.eval_factorization(&f);
        self.cache
            .0
            .write()
            .expect("cache lock")
            .insert(p.clone(), value.clone());
        Ok(value)
    }

    /// `T̃(g) = T(g₋)* T(g₊)` on the ambient group.
    pub fn tilde(&self, g: &GroupElement) -> Result<CMatrix> {
        let (pos, neg) = self.descriptor.pos_neg_parts(g)?;
        Ok(&self.eval(&neg)?.adjoint() * &self.eval(&pos)?)
    }
}

/// Contractivity, commutation, relations and a sampled homomorphism check.
pub fn validate_rep(t: &Representation, tol: f64, sample_budget: usize, seed: u64) -> ValidationVerdict {
    let d = &t.descriptor;
    let label = |i: usize| d.generator_label(i).unwrap_or_else(|| i.to_string());
    let mut verdict = ValidationVerdict::default();

    for (i, m) in t.generator_images.iter().enumerate() {
        let norm = operator_norm(m);
        verdict.checks.push(Check {
            name: format!("contractive:{}", label(i)),
            passed: norm <= 1.0 + tol,
            residual: Some(norm),
            detail: None,
            informational: false,
        });
    }
    for i in 0..t.generator_images.len() {
        for j in i + 1..t.generator_images.len() {
            let r = operator_norm(&commutator(&t.generator_images[i], &t.generator_images[j]));
            verdict
                .checks
                .push(Check::residual(format!("commute:{},{}", label(i), label(j)), r, tol));
        }
    }
    for (k, (lhs, rhs)) in t.relations.iter().enumerate() {
        let name = format!("relation:{}", k + 1);
        let elements = lhs.element(d).and_then(|a| Ok((a, rhs.element(d)?)));
        match elements {
            Ok((a, b)) if a == b => {
                let r = operator_norm(&(&t.eval_factorization(lhs) - &t.eval_factorization(rhs)));
                verdict.checks.push(Check::residual(name, r, tol).with_detail(format!("both sides equal {a}")));
            }
            Ok((a, b)) => verdict.checks.push(Check {
                name,
                passed: false,
                residual: None,
                detail: Some(format!("sides reduce to different elements {a} and {b}")),
                informational: false,
            }),
            Err(e) => verdict.checks.push(Check {
                name,
                passed: false,
                residual: None,
                detail: Some(e.to_string()),
                informational: false,
            }),
        }
    }

    if t.relations.is_empty() && !matches!(d.kind(), crate::semigroup::SemigroupKind::FreeAbelian(_)) {
        verdict.warnings.push(format!(
            "no relations supplied for {d}; homomorphism checked on {sample_budget} sampled pairs only"
        ));
    }
    if sample_budget > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        let mut worst_pair = None;
        for _ in 0..sample_budget {
            let p = d.sample_positive(&mut rng);
            let q = d.sample_positive(&mut rng);
            let Ok(sum) = p.checked_add(&q) else { continue };
            let (Ok(tp), Ok(tq), Ok(tpq)) = (t.eval(&p), t.eval(&q), t.eval(&sum)) else {
                continue;
            };
            let r = (&tpq - &(&tp * &tq)).max_abs();
            if r > worst {
                worst = r;
                worst_pair = Some((p, q));
            }
        }
        let mut check = Check::residual("homomorphism (sampled)", worst, tol);
        if let Some((p, q)) = worst_pair {
            check = check.with_detail(format!("worst pair {p}, {q} over {sample_budget} samples"));
        }
        verdict.checks.push(check);
    }
    verdict
}

/// A map `p ↦ N(p)` on a finite set of elements, meant to extend a base
/// representation on the first `dim H` coordinates of `K`.
#[derive(Debug, Clone)]
pub struct NormalMap {
    base: Representation,
    ambient_dim: usize,
    images: BTreeMap<GroupElement, CMatrix>,
}

impl NormalMap {
    pub fn new(
        base: Representation,
        ambient_dim: usize,
        images: BTreeMap<GroupElement, CMatrix>,
    ) -> Result<Self> {
        if ambient_dim < base.dimension {
            return Err(RepresentationError::DimensionMismatch(format!(
                "ambient dimension {ambient_dim} is smaller than the base dimension {}",
                base.dimension
            )));
        }
        for (p, m) in &images {
            base.descriptor.check_compatible(p)?;
            if m.rows() != ambient_dim || m.cols() != ambient_dim {
                return Err(RepresentationError::DimensionMismatch(format!(
                    "image of {p} is {}x{}, expected {ambient_dim}x{ambient_dim}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        Ok(NormalMap {
            base,
            ambient_dim,
            images,
        })
    }

    pub fn base(&self) -> &Representation {
        &self.base
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn images(&self) -> &BTreeMap<GroupElement, CMatrix> {
        &self.images
    }
}

/// Normality, commutation, `*`-commutation and extension residuals.
pub fn validate_normal_map(n: &NormalMap, tol: f64) -> Result<ValidationVerdict> {
    let h = n.base.dimension;
    let mut verdict = ValidationVerdict::default();
    let entries: Vec<(&GroupElement, &CMatrix)> = n.images.iter().collect();

    for (p, m) in &entries {
        let adj = m.adjoint();
        let normal = operator_norm(&(&(&adj * m) - &(*m * &adj)));
        verdict.checks.push(Check::residual(format!("normal:{p}"), normal, tol));
        let norm = operator_norm(m);
        verdict.checks.push(Check {
            name: format!("contractive:{p}"),
            passed: norm <= 1.0 + tol,
            residual: Some(norm),
            detail: None,
            informational: false,
        });

        let blocks = linalg::block_decompose(m, h)?;
        let target = n.base.eval(p)?;
        verdict.checks.push(Check::residual(
            format!("extension-lower-left:{p}"),
            operator_norm(&blocks.lower_left),
            tol,
        ));
        verdict.checks.push(Check::residual(
            format!("extension-corner:{p}"),
            operator_norm(&(&blocks.corner - &target)),
            tol,
        ));

        if p.is_zero() {
            let r = operator_norm(&(*m - &CMatrix::identity(n.ambient_dim)));
            verdict.checks.push(Check {
                informational: true,
                ..Check::residual("unital", r, tol)
            });
        }
    }

    for (i, (p, a)) in entries.iter().enumerate() {
        for (q, b) in &entries[i + 1..] {
            let c = operator_norm(&commutator(a, b));
            verdict.checks.push(Check::residual(format!("commute:{p},{q}"), c, tol));
            let b_adj = b.adjoint();
            let star = operator_norm(&(&(*a * &b_adj) - &(&b_adj * *a)));
            verdict.checks.push(Check::residual(format!("star-commute:{p},{q}"), star, tol));
        }
    }
    Ok(verdict)
}

/// A point `(p, q)` of `Q = P × P` with involution `(p, q)* = (q, p)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InvolutionPoint {
    pub left: GroupElement,
    pub right: GroupElement,
}

impl InvolutionPoint {
    pub fn new(left: GroupElement, right: GroupElement) -> Self {
        InvolutionPoint { left, right }
    }

    pub fn star(&self) -> Self {
        InvolutionPoint {
            left: self.right.clone(),
            right: self.left.clone(),
        }
    }

    /// The semigroup operation on `Q` (pointwise addition).
    pub fn compose(&self, other: &InvolutionPoint) -> std::result::Result<Self, SemigroupError> {
        Ok(InvolutionPoint {
            left: self.left.checked_add(&other.left)?,
            right: self.right.checked_add(&other.right)?,
        })
    }
}

impl std::fmt::Display for InvolutionPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}; {})", self.left, self.right)
    }
}

/// The kernel value `T(x.left)* T(x.right)` at `x = s* t`.
pub fn star_kernel(t: &Representation, s: &InvolutionPoint, u: &InvolutionPoint) -> Result<CMatrix> {
    let x = s.star().compose(u)?;
    Ok(&t.eval(&x.left)?.adjoint() * &t.eval(&x.right)?)
}
