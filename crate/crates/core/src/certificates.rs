//! Positivity certificates: the alternating binomial sums, Brehmer's subset
//! sums, the Sz.-Nagy kernel conditions and the regularity inequality.
//!
//! Every procedure returns a [`CertificateReport`]. A pass is only ever a
//! statement about the finite family of parameters that was examined; the
//! `scope` field says which.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::linalg::{self, block_assemble, commutator, operator_norm, psd_check, CMatrix, LinalgError};
use crate::representation::{
    star_kernel, validate_normal_map, InvolutionPoint, NormalMap, Representation, RepresentationError,
};
use crate::semigroup::{Coordinate, GroupElement, SemigroupError, SemigroupKind};

/// Largest `|U|` accepted by the subset enumeration.
pub const DEFAULT_SUBSET_CAP: usize = 16;
pub const DEFAULT_MAX_DEGREE: u64 = 6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CertificateError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Representation(#[from] RepresentationError),
    #[error(transparent)]
    Semigroup(#[from] SemigroupError),
    #[error("|U| = {size} exceeds the subset cap {cap}; enumeration would need {subsets} subsets")]
    SubsetCapExceeded { size: usize, cap: usize, subsets: u128 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, CertificateError>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative PSD tolerance, see [`linalg::psd_check`].
    pub psd: f64,
    /// Absolute tolerance for commutation, contractivity and symmetry residuals.
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            psd: linalg::DEFAULT_PSD_TOL,
            residual: crate::representation::DEFAULT_RESIDUAL_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::NotApplicable => "not-applicable",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    pub condition: String,
    pub parameters: String,
    /// What the verdict covers, e.g. "degree tuples with sum <= 6".
    pub scope: String,
    pub verdict: Verdict,
    /// Smallest eigenvalue of the tested operator.
    pub margin: Option<f64>,
    /// First failing parameter, present iff the verdict is a fail.
    pub witness: Option<String>,
    pub tolerances: Tolerances,
    pub notes: Vec<String>,
    pub details: BTreeMap<String, f64>,
}

impl CertificateReport {
    fn new(condition: &str, parameters: String, scope: String, tolerances: Tolerances) -> Self {
        CertificateReport {
            condition: condition.to_string(),
            parameters,
            scope,
            verdict: Verdict::NotApplicable,
            margin: None,
            witness: None,
            tolerances,
            notes: Vec::new(),
            details: BTreeMap::new(),
        }
    }

    fn not_applicable(mut self, note: String) -> Self {
        self.verdict = Verdict::NotApplicable;
        self.notes.push(note);
        self
    }

    fn apply_psd(&mut self, psd: &linalg::PsdVerdict, witness: impl FnOnce() -> String) {
        self.margin = Some(psd.min_eigenvalue);
        self.details.insert("tolerance_used".into(), psd.tolerance_used);
        self.details.insert("hermitian_defect".into(), psd.hermitian_defect);
        if psd.is_psd {
            self.verdict = Verdict::Pass;
        } else {
            self.verdict = Verdict::Fail;
            self.witness = Some(witness());
        }
    }
}

/// Degrees `(n₁, …, n_m)` of the alternating binomial sum.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DegreeTuple(pub Vec<u64>);

impl DegreeTuple {
    pub fn new(degrees: Vec<u64>) -> Self {
        DegreeTuple(degrees)
    }

    pub fn degrees(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    /// All `k` with `0 ≤ kᵢ ≤ nᵢ`, lexicographically.
    pub fn box_indices(&self) -> Vec<Vec<u64>> {
        let mut out = vec![Vec::with_capacity(self.0.len())];
        for &n in &self.0 {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..=n).map(move |k| {
                        let mut v = prefix.clone();
                        v.push(k);
                        v
                    })
                })
                .collect();
        }
        out
    }

    /// All tuples of length `m` with sum at most `bound`, lexicographically.
    pub fn sweep(m: usize, bound: u64) -> Vec<DegreeTuple> {
        fn rec(m: usize, left: u64, cur: &mut Vec<u64>, out: &mut Vec<DegreeTuple>) {
            if cur.len() == m {
                out.push(DegreeTuple(cur.clone()));
                return;
            }
            for k in 0..=left {
                cur.push(k);
                rec(m, left - k, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(m, bound, &mut Vec::with_capacity(m), &mut out);
        out
    }
}

impl fmt::Display for DegreeTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

fn sampled_scope(points: usize) -> String {
    format!("sampled: {points} point{}", if points == 1 { "" } else { "s" })
}

/// `C(n, k)` in exact integer arithmetic.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    acc
}

fn check_square_family(ts: &[CMatrix]) -> Result<usize> {
    let Some(first) = ts.first() else { return Ok(0) };
    let dim = first.require_square()?;
    for (i, t) in ts.iter().enumerate() {
        if t.require_square()? != dim {
            return Err(CertificateError::InvalidInput(format!(
                "operator {} is {}x{}, expected {dim}x{dim}",
                i + 1,
                t.rows(),
                t.cols()
            )));
        }
    }
    Ok(dim)
}

/// Commutation and contractivity residuals; `Some(reason)` if beyond tolerance.
fn family_precondition(ts: &[CMatrix], tol: f64, details: &mut BTreeMap<String, f64>) -> Option<String> {
    let mut worst_norm = 0.0f64;
    let mut worst_comm = 0.0f64;
    let mut reason = None;
    for (i, t) in ts.iter().enumerate() {
        let norm = operator_norm(t);
        worst_norm = worst_norm.max(norm);
        if norm > 1.0 + tol && reason.is_none() {
            reason = Some(format!("operator {} has norm {norm:.6e} > 1", i + 1));
        }
    }
    for i in 0..ts.len() {
        for j in i + 1..ts.len() {
            let c = operator_norm(&commutator(&ts[i], &ts[j]));
            worst_comm = worst_comm.max(c);
            if c > tol && reason.is_none() {
                reason = Some(format!("operators {} and {} do not commute (residual {c:.6e})", i + 1, j + 1));
            }
        }
    }
    details.insert("max_norm".into(), worst_norm);
    if ts.len() > 1 {
        details.insert("commutator_residual".into(), worst_comm);
    }
    reason
}

/// `Σ_k (-1)^{|k|} ∏ C(nᵢ,kᵢ) · T₁^{*k₁}···T_m^{*k_m} T_m^{k_m}···T₁^{k₁}`.
pub fn athavale_operator(ts: &[CMatrix], n: &DegreeTuple) -> Result<CMatrix> {
    if ts.len() != n.len() {
        return Err(CertificateError::InvalidInput(format!(
            "{} operators but {} degrees",
            ts.len(),
            n.len()
        )));
    }
    let dim = check_square_family(ts)?;
    if ts.is_empty() {
        return Ok(CMatrix::identity(0));
    }
    let powers: Vec<Vec<CMatrix>> = ts
        .iter()
        .zip(n.degrees())
        .map(|(t, &ni)| {
            let mut p = vec![CMatrix::identity(dim)];
            for k in 1..=ni {
                let next = &p[k as usize - 1] * t;
                p.push(next);
            }
            p
        })
        .collect();
    let mut acc = CMatrix::zeros(dim, dim);
    for k in n.box_indices() {
        let mut coeff: u128 = 1;
        for (&ni, &ki) in n.degrees().iter().zip(&k) {
            coeff *= binomial(ni, ki);
        }
        let sign = if k.iter().sum::<u64>() % 2 == 0 { 1.0 } else { -1.0 };
        let mut r = CMatrix::identity(dim);
        for i in (0..ts.len()).rev() {
            r = &r * &powers[i][k[i] as usize];
        }
        acc.add_scaled(sign * coeff as f64, &(&r.adjoint() * &r));
    }
    Ok(acc)
}

/// `Σ_{j=0}^{n} (-1)^j C(n,j) T^{*j} T^j`.
pub fn agler_operator(t: &CMatrix, n: u64) -> Result<CMatrix> {
    athavale_operator(std::slice::from_ref(t), &DegreeTuple(vec![n]))
}

pub fn agler_certificate(t: &CMatrix, n: u64, tol: Tolerances) -> Result<CertificateReport> {
    t.require_square()?;
    let mut report = CertificateReport::new("agler", format!("n={n}"), format!("degree {n}"), tol);
    if let Some(reason) = family_precondition(std::slice::from_ref(t), tol.residual, &mut report.details) {
        return Ok(report.not_applicable(reason));
    }
    let op = agler_operator(t, n)?;
    let psd = psd_check(&op, tol.psd)?;
    report.apply_psd(&psd, || format!("n={n}"));
    Ok(report)
}

pub fn athavale_certificate(ts: &[CMatrix], n: &DegreeTuple, tol: Tolerances) -> Result<CertificateReport> {
    check_square_family(ts)?;
    let mut report = CertificateReport::new("athavale", format!("n={n}"), format!("degree tuple {n}"), tol);
    if let Some(reason) = family_precondition(ts, tol.residual, &mut report.details) {
        return Ok(report.not_applicable(reason));
    }
    let op = athavale_operator(ts, n)?;
    let psd = psd_check(&op, tol.psd)?;
    report.apply_psd(&psd, || format!("n={n}"));
    Ok(report)
}

fn check_subset(t: &Representation, u: &BTreeSet<Coordinate>, cap: usize) -> Result<()> {
    let SemigroupKind::FreeAbelian(k) = t.descriptor().kind() else {
        return Err(CertificateError::Unsupported(format!(
            "subset sums need a representation of ℕ^k, got {}",
            t.descriptor()
        )));
    };
    let k = *k;
    if u.len() > cap {
        return Err(CertificateError::SubsetCapExceeded {
            size: u.len(),
            cap,
            subsets: 1u128 << u.len().min(127),
        });
    }
    let flat = u.iter().filter(|c| matches!(c, Coordinate::Flat(_))).count();
    if flat != 0 && flat != u.len() {
        return Err(CertificateError::InvalidInput(
            "U mixes coordinates of ℕ^k with coordinates of its infinite power".into(),
        ));
    }
    for c in u {
        let ok = match c {
            Coordinate::Flat(i) => (1..=k).contains(i),
            Coordinate::Copy { generator, copy } => (1..=k).contains(generator) && *copy >= 1,
        };
        if !ok {
            return Err(CertificateError::InvalidInput(format!("coordinate {c} is out of range for ℕ^{k}")));
        }
    }
    Ok(())
}

/// `Σ_{V⊆U} (-1)^{|V|} T(e_V)* T(e_V)`.
///
/// Flat coordinates address `ℕ^k` itself; copy coordinates `(i, j)` address
/// `T^∞`, which sends every copy of generator `i` to `Tᵢ`. Subsets are visited
/// depth first so each `T(e_V)` costs a single product with its parent.
pub fn brehmer_operator(t: &Representation, u: &BTreeSet<Coordinate>, cap: usize) -> Result<CMatrix> {
    check_subset(t, u, cap)?;
    let dim = t.dimension();
    let images: Vec<&CMatrix> = u.iter().map(|c| &t.generator_images()[c.generator_index()]).collect();

    fn visit(images: &[&CMatrix], start: usize, prod: &CMatrix, odd: bool, acc: &mut CMatrix) {
        let gram = &prod.adjoint() * prod;
        acc.add_scaled(if odd { -1.0 } else { 1.0 }, &gram);
        for i in start..images.len() {
            let next = prod * images[i];
            visit(images, i + 1, &next, !odd, acc);
        }
    }

    let mut acc = CMatrix::zeros(dim, dim);
    visit(&images, 0, &CMatrix::identity(dim), false, &mut acc);
    Ok(acc)
}

fn format_subset(u: &BTreeSet<Coordinate>) -> String {
    let parts: Vec<String> = u.iter().map(Coordinate::to_string).collect();
    format!("U={{{}}}", parts.join(","))
}

pub fn brehmer_certificate(
    t: &Representation,
    u: &BTreeSet<Coordinate>,
    cap: usize,
    tol: Tolerances,
) -> Result<CertificateReport> {
    let params = format_subset(u);
    let op = brehmer_operator(t, u, cap)?;
    let mut report = CertificateReport::new("brehmer", params.clone(), format!("subset {params}"), tol);
    let images: Vec<CMatrix> = {
        let used: BTreeSet<usize> = u.iter().map(Coordinate::generator_index).collect();
        used.into_iter().map(|i| t.generator_images()[i].clone()).collect()
    };
    if let Some(reason) = family_precondition(&images, tol.residual, &mut report.details) {
        return Ok(report.not_applicable(reason));
    }
    report.details.insert("subsets".into(), (1u64 << u.len()) as f64);
    let psd = psd_check(&op, tol.psd)?;
    report.apply_psd(&psd, || params.clone());
    Ok(report)
}

/// Compares the subset sum of `T^∞` over `nᵢ` copies of each generator with
/// the alternating binomial sum at `n`. Returns both operators and their
/// largest entrywise deviation.
pub fn athavale_vs_brehmer(ts: &[CMatrix], n: &DegreeTuple, cap: usize) -> Result<(CMatrix, CMatrix, f64)> {
    if ts.len() != n.len() {
        return Err(CertificateError::InvalidInput(format!(
            "{} operators but {} degrees",
            ts.len(),
            n.len()
        )));
    }
    let dim = check_square_family(ts)?;
    let total = n.total() as usize;
    if total > cap {
        return Err(CertificateError::SubsetCapExceeded {
            size: total,
            cap,
            subsets: 1u128 << total.min(127),
        });
    }
    let rep = Representation::new(
        crate::semigroup::SemigroupDescriptor::free_abelian(ts.len()),
        dim,
        ts.to_vec(),
        vec![],
    )?;
    let u: BTreeSet<Coordinate> = n
        .degrees()
        .iter()
        .enumerate()
        .flat_map(|(i, &ni)| (1..=ni).map(move |copy| Coordinate::Copy { generator: i + 1, copy }))
        .collect();
    let subset_sum = brehmer_operator(&rep, &u, cap)?;
    let binomial_sum = athavale_operator(ts, n)?;
    let deviation = subset_sum.max_abs_diff(&binomial_sum);
    Ok((subset_sum, binomial_sum, deviation))
}

/// Sweeps the alternating binomial sum of the generator images over all
/// degree tuples with total at most `max_degree`, stopping at the first fail.
pub fn generator_certificate(t: &Representation, max_degree: u64, tol: Tolerances) -> Result<CertificateReport> {
    let ts = t.generator_images();
    let mut report = CertificateReport::new(
        "athavale",
        format!("max_degree={max_degree}"),
        format!("degree tuples with sum <= {max_degree}"),
        tol,
    );
    if let Some(reason) = family_precondition(ts, tol.residual, &mut report.details) {
        return Ok(report.not_applicable(reason));
    }
    if ts.is_empty() {
        report.verdict = Verdict::Pass;
        report.notes.push("no generators; the condition holds vacuously".into());
        return Ok(report);
    }
    let mut margin = f64::INFINITY;
    let mut tested = 0u64;
    report.verdict = Verdict::Pass;
    for n in DegreeTuple::sweep(ts.len(), max_degree) {
        let op = athavale_operator(ts, &n)?;
        let psd = psd_check(&op, tol.psd)?;
        tested += 1;
        margin = margin.min(psd.min_eigenvalue);
        let slack = report.details.entry("tolerance_used".into()).or_insert(0.0);
        *slack = slack.max(psd.tolerance_used);
        if !psd.is_psd {
            report.verdict = Verdict::Fail;
            report.witness = Some(format!("n={n}"));
            report.margin = Some(psd.min_eigenvalue);
            break;
        }
    }
    if report.verdict == Verdict::Pass {
        report.margin = Some(margin);
    }
    report.details.insert("tuples_tested".into(), tested as f64);
    Ok(report)
}

/// Sample points and the bound of the Sz.-Nagy kernel conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct SzNagyConfig {
    pub sample_points: Vec<InvolutionPoint>,
    pub bound_element: InvolutionPoint,
    pub bound_constant: f64,
}

impl SzNagyConfig {
    pub fn new(sample_points: Vec<InvolutionPoint>, bound_element: InvolutionPoint, bound_constant: f64) -> Result<Self> {
        if !(bound_constant > 0.0 && bound_constant.is_finite()) {
            return Err(CertificateError::InvalidInput(format!(
                "bound constant must be positive, got {bound_constant}"
            )));
        }
        Ok(SzNagyConfig {
            sample_points,
            bound_element,
            bound_constant,
        })
    }
}

/// Kernel symmetry, positivity of `[φ(sᵢ* sⱼ)]` and the bound
/// `[φ(sᵢ* a* a sⱼ)] ≤ C² [φ(sᵢ* sⱼ)]`, on the configured sample.
pub fn sznagy_check(t: &Representation, cfg: &SzNagyConfig, tol: Tolerances) -> Result<CertificateReport> {
    if cfg.bound_constant.is_nan() || cfg.bound_constant <= 0.0 {
        return Err(CertificateError::InvalidInput("bound constant must be positive".into()));
    }
    let pts = &cfg.sample_points;
    let k = pts.len();
    let mut report = CertificateReport::new(
        "sznagy",
        format!("points={k}, a={}, C={}", cfg.bound_element, cfg.bound_constant),
        sampled_scope(k),
        tol,
    );

    let mut grid = vec![Vec::with_capacity(k); k];
    for (i, s) in pts.iter().enumerate() {
        for u in pts {
            grid[i].push(star_kernel(t, s, u)?);
        }
    }
    let unit = t.descriptor().unit();
    let unit_point = InvolutionPoint::new(unit.clone(), unit);
    let mut symmetry = operator_norm(&(&star_kernel(t, &unit_point, &unit_point)? - &CMatrix::identity(t.dimension())));
    for (i, row) in grid.iter().enumerate() {
        for (j, entry) in row.iter().enumerate().skip(i) {
            symmetry = symmetry.max(entry.adjoint().max_abs_diff(&grid[j][i]));
        }
    }
    report.details.insert("symmetry_residual".into(), symmetry);

    let a = &cfg.bound_element;
    let mut shifted = vec![Vec::with_capacity(k); k];
    for (i, s) in pts.iter().enumerate() {
        let as_i = a.compose(s)?;
        for u in pts {
            shifted[i].push(star_kernel(t, &as_i, &a.compose(u)?)?);
        }
    }

    let kernel = block_assemble(&grid)?;
    let bound = block_assemble(&shifted)?;
    let positivity = psd_check(&kernel, tol.psd)?;
    let c2 = cfg.bound_constant * cfg.bound_constant;
    let dominated = linalg::loewner_leq(&bound, &kernel.scale_real(c2), tol.psd)?;
    report.details.insert("kernel_margin".into(), positivity.min_eigenvalue);
    report.details.insert("bound_margin".into(), dominated.min_eigenvalue);
    report.details.insert("tolerance_used".into(), positivity.tolerance_used.max(dominated.tolerance_used));

    report.margin = Some(positivity.min_eigenvalue.min(dominated.min_eigenvalue));
    report.verdict = Verdict::Fail;
    if symmetry > tol.residual {
        report.witness = Some(format!("condition (i): symmetry residual {symmetry:.6e}"));
    } else if !positivity.is_psd {
        report.margin = Some(positivity.min_eigenvalue);
        report.witness = Some("condition (ii)".into());
    } else if !dominated.is_psd {
        report.margin = Some(dominated.min_eigenvalue);
        report.witness = Some(format!("condition (iii) with C={}", cfg.bound_constant));
    } else {
        report.verdict = Verdict::Pass;
    }
    report.notes.push("verdict covers the sampled points only".into());
    Ok(report)
}

/// `[T(g)* T̃(pᵢ - pⱼ) T(g)] ≤ [T̃(pᵢ - pⱼ)]` for `g ∧ pᵢ = unit`.
pub fn regularity_check(
    t: &Representation,
    ps: &[GroupElement],
    g: &GroupElement,
    tol: Tolerances,
) -> Result<CertificateReport> {
    let d = t.descriptor();
    if !d.is_lattice_ordered() {
        return Err(CertificateError::Unsupported(format!("{d} is not lattice ordered")));
    }
    for p in ps.iter().chain(std::iter::once(g)) {
        if !d.contains(p)? {
            return Err(CertificateError::InvalidInput(format!("{p} is not in {d}")));
        }
    }
    let names: Vec<String> = ps.iter().map(GroupElement::to_string).collect();
    let mut report = CertificateReport::new(
        "regular",
        format!("ps=[{}], g={g}", names.join(", ")),
        sampled_scope(ps.len()),
        tol,
    );
    let unit = d.unit();
    for (i, p) in ps.iter().enumerate() {
        let (meet, _) = d.meet_join(g, p)?;
        if meet != unit {
            return Ok(report.not_applicable(format!("g ∧ p{} = {meet}, not the unit", i + 1)));
        }
    }
    let tg = t.eval(g)?;
    let tg_adj = tg.adjoint();
    let mut rhs = Vec::with_capacity(ps.len());
    let mut lhs = Vec::with_capacity(ps.len());
    for pi in ps {
        let mut rrow = Vec::with_capacity(ps.len());
        let mut lrow = Vec::with_capacity(ps.len());
        for pj in ps {
            let x = t.tilde(&pi.checked_sub(pj)?)?;
            lrow.push(&(&tg_adj * &x) * &tg);
            rrow.push(x);
        }
        lhs.push(lrow);
        rhs.push(rrow);
    }
    let lhs = block_assemble(&lhs)?;
    let rhs = block_assemble(&rhs)?;
    let psd = linalg::loewner_leq(&lhs, &rhs, tol.psd)?;
    report.apply_psd(&psd, || format!("g={g}"));
    report.notes.push("verdict covers the sampled points only".into());
    Ok(report)
}

/// `(‖P_H N*N|_H − T*T‖, ‖Z‖²)` with `T` the corner of `N` on the first
/// `subspace_dim` coordinates and `Z` its lower-left block.
pub fn extension_residual(n: &CMatrix, subspace_dim: usize) -> Result<(f64, f64)> {
    let blocks = linalg::block_decompose(n, subspace_dim)?;
    let gram = &n.adjoint() * n;
    let compressed = gram.submatrix(0, 0, subspace_dim, subspace_dim);
    let t = &blocks.corner;
    let hypothesis = operator_norm(&(&compressed - &(&t.adjoint() * t)));
    let z = operator_norm(&blocks.lower_left);
    Ok((hypothesis, z * z))
}

/// Checks a supplied normal map as an extension of its base representation.
pub fn extension_certificate(nm: &NormalMap, tol: Tolerances) -> Result<CertificateReport> {
    let mut report = CertificateReport::new(
        "extension",
        format!("images={}, ambient_dim={}", nm.images().len(), nm.ambient_dim()),
        format!("{} supplied images", nm.images().len()),
        tol,
    );
    let verdict = validate_normal_map(nm, tol.residual)?;
    let h = nm.base().dimension();
    let mut worst = 0.0f64;
    for (p, m) in nm.images() {
        let (hyp, z2) = extension_residual(m, h)?;
        worst = worst.max(hyp).max(z2);
        report.details.insert(format!("gram_residual:{p}"), hyp);
    }
    report.details.insert("max_extension_residual".into(), worst);
    for check in &verdict.checks {
        if let Some(r) = check.residual {
            report.details.insert(check.name.clone(), r);
        }
        if check.informational && !check.passed {
            report.notes.push(format!("{} does not hold (informational)", check.name));
        }
    }
    report.notes.extend(verdict.warnings.iter().cloned());
    match verdict.first_failure() {
        Some(c) => {
            report.verdict = Verdict::Fail;
            report.witness = Some(c.name.clone());
        }
        None => report.verdict = Verdict::Pass,
    }
    Ok(report)
}
