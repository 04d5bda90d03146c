//! Input schema, report emission and the `normex` command line.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use num_rational::Rational64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::certificates::{
    brehmer_certificate, extension_certificate, generator_certificate, regularity_check, sznagy_check,
    CertificateError, CertificateReport, SzNagyConfig, Tolerances, Verdict, DEFAULT_MAX_DEGREE, DEFAULT_SUBSET_CAP,
};
use crate::constructions::{make_gallery, GalleryParams};
use crate::linalg::CMatrix;
use crate::representation::{
    validate_rep, InvolutionPoint, NormalMap, Representation, ValidationVerdict,
};
use crate::semigroup::{Coordinate, Factorization, GroupElement, SemigroupDescriptor, SemigroupKind, Support};

pub const SEED_ENV: &str = "NORMEX_SEED";
pub const DEFAULT_SAMPLE_BUDGET: usize = 64;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{0}")]
    Io(String),
    #[error("representation failed validation:\n{0}")]
    Validation(String),
    #[error("{0}")]
    Config(String),
}

fn parse_err(path: &str, message: impl Into<String>) -> CliError {
    CliError::Parse {
        path: path.to_string(),
        message: message.into(),
    }
}

// ---------------------------------------------------------------------------
// Input schema

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DescriptorSpec {
    FreeAbelian { rank: usize },
    Numerical { gaps: Vec<u64> },
    Rationals,
    Product { factors: Vec<DescriptorSpec> },
    InfinitePower { base: Box<DescriptorSpec> },
}

impl DescriptorSpec {
    pub fn build(&self) -> Result<SemigroupDescriptor, crate::semigroup::SemigroupError> {
        Ok(match self {
            DescriptorSpec::FreeAbelian { rank } => SemigroupDescriptor::free_abelian(*rank),
            DescriptorSpec::Numerical { gaps } => SemigroupDescriptor::numerical(gaps.iter().copied())?,
            DescriptorSpec::Rationals => SemigroupDescriptor::rationals(),
            DescriptorSpec::Product { factors } => {
                SemigroupDescriptor::product(factors.iter().map(|f| f.build()).collect::<Result<_, _>>()?)?
            }
            DescriptorSpec::InfinitePower { base } => SemigroupDescriptor::infinite_power(base.build()?),
        })
    }

    pub fn from_descriptor(d: &SemigroupDescriptor) -> Self {
        match d.kind() {
            SemigroupKind::FreeAbelian(k) => DescriptorSpec::FreeAbelian { rank: *k },
            SemigroupKind::Numerical(gaps) => DescriptorSpec::Numerical {
                gaps: gaps.iter().copied().collect(),
            },
            SemigroupKind::TotallyOrderedRationals => DescriptorSpec::Rationals,
            SemigroupKind::Product(parts) => DescriptorSpec::Product {
                factors: parts.iter().map(DescriptorSpec::from_descriptor).collect(),
            },
            SemigroupKind::InfinitePower(base) => DescriptorSpec::InfinitePower {
                base: Box::new(DescriptorSpec::from_descriptor(base)),
            },
        }
    }
}

/// A matrix entry: `[re, im]` or a plain real number.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum EntrySpec {
    Complex([f64; 2]),
    Real(f64),
}

impl EntrySpec {
    fn value(self) -> Complex64 {
        match self {
            EntrySpec::Complex([re, im]) => Complex64::new(re, im),
            EntrySpec::Real(re) => Complex64::new(re, 0.0),
        }
    }
}

pub type MatrixSpec = Vec<Vec<EntrySpec>>;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ImageSpec {
    pub element: Value,
    pub matrix: MatrixSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NormalMapSpec {
    pub ambient_dim: usize,
    pub images: Vec<ImageSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RepresentationSpec {
    pub dimension: usize,
    pub generators: BTreeMap<String, MatrixSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relations: Option<Vec<[BTreeMap<String, u64>; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal_map: Option<NormalMapSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SzNagySpec {
    pub points: Vec<[Value; 2]>,
    #[serde(default)]
    pub bound: Option<[Value; 2]>,
    #[serde(default)]
    pub constant: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RegularSpec {
    pub ps: Vec<Value>,
    pub g: Value,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_degree: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset: Option<Vec<Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sznagy: Option<SzNagySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regular: Option<RegularSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    pub descriptor: DescriptorSpec,
    pub representation: RepresentationSpec,
    #[serde(default)]
    pub run: RunSpec,
}

/// Run settings after defaults, overrides and element parsing.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub max_degree: u64,
    pub subset: Option<BTreeSet<Coordinate>>,
    pub subset_cap: usize,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub sample_budget: usize,
    pub sznagy: Option<SzNagyConfig>,
    pub regular: Option<(Vec<GroupElement>, GroupElement)>,
}

/// A fully validated input document.
#[derive(Debug, Clone)]
pub struct ParsedSpec {
    pub descriptor: SemigroupDescriptor,
    pub representation: Representation,
    pub normal_map: Option<NormalMap>,
    pub run: RunConfig,
    pub validation: ValidationVerdict,
}

/// Command-line values that take precedence over the input file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub max_degree: Option<u64>,
    pub subset: Option<String>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

pub fn element_from_json(d: &SemigroupDescriptor, v: &Value, path: &str) -> Result<GroupElement, CliError> {
    let int = |v: &Value, path: &str| {
        v.as_i64()
            .ok_or_else(|| parse_err(path, format!("expected an integer, got {v}")))
    };
    let element = match d.kind() {
        SemigroupKind::FreeAbelian(k) => match v {
            Value::Array(items) => {
                if items.len() != *k {
                    return Err(parse_err(path, format!("expected {k} coordinates, got {}", items.len())));
                }
                let coords = items
                    .iter()
                    .enumerate()
                    .map(|(i, x)| int(x, &format!("{path}[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                GroupElement::Int(coords)
            }
            Value::Number(_) if *k == 1 => GroupElement::Int(vec![int(v, path)?]),
            other => return Err(parse_err(path, format!("expected an array of {k} integers, got {other}"))),
        },
        SemigroupKind::Numerical(_) => match v {
            Value::Array(items) if items.len() == 1 => GroupElement::int(int(&items[0], &format!("{path}[0]"))?),
            _ => GroupElement::int(int(v, path)?),
        },
        SemigroupKind::TotallyOrderedRationals => match v {
            Value::Number(_) => GroupElement::Rational(Rational64::from_integer(int(v, path)?)),
            Value::String(s) => {
                let r: Rational64 = s
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(path, format!("'{s}' is not a fraction p/q")))?;
                GroupElement::Rational(r)
            }
            other => return Err(parse_err(path, format!("expected an integer or \"p/q\", got {other}"))),
        },
        SemigroupKind::Product(parts) => {
            let Value::Array(items) = v else {
                return Err(parse_err(path, format!("expected an array of {} components", parts.len())));
            };
            if items.len() != parts.len() {
                return Err(parse_err(
                    path,
                    format!("expected {} components, got {}", parts.len(), items.len()),
                ));
            }
            GroupElement::Tuple(
                parts
                    .iter()
                    .zip(items)
                    .enumerate()
                    .map(|(i, (p, x))| element_from_json(p, x, &format!("{path}[{i}]")))
                    .collect::<Result<_, _>>()?,
            )
        }
        SemigroupKind::InfinitePower(base) => {
            let Value::Object(map) = v else {
                return Err(parse_err(path, "expected an object mapping copy indices to elements"));
            };
            let mut entries = Vec::with_capacity(map.len());
            for (key, x) in map {
                let index: u64 = key
                    .parse()
                    .map_err(|_| parse_err(path, format!("copy index '{key}' is not a positive integer")))?;
                entries.push((index, element_from_json(base, x, &format!("{path}.{key}"))?));
            }
            GroupElement::Power(Support::new(entries))
        }
    };
    d.check_compatible(&element).map_err(|e| parse_err(path, e.to_string()))?;
    Ok(element)
}

fn matrix_from_spec(m: &MatrixSpec, dim: usize, path: &str) -> Result<CMatrix, CliError> {
    // A 1x1 complex matrix may be abbreviated as a single [re, im] row.
    if dim == 1 && m.len() == 1 && m[0].len() == 2 {
        if let [EntrySpec::Real(re), EntrySpec::Real(im)] = m[0][..] {
            return Ok(CMatrix::scalar(Complex64::new(re, im)));
        }
    }
    let rows: Vec<Vec<Complex64>> = m.iter().map(|r| r.iter().map(|e| e.value()).collect()).collect();
    let matrix = CMatrix::from_rows(rows).map_err(|e| parse_err(path, e.to_string()))?;
    if matrix.rows() != dim || matrix.cols() != dim {
        return Err(parse_err(
            path,
            format!("expected a {dim}x{dim} matrix, got {}x{}", matrix.rows(), matrix.cols()),
        ));
    }
    if matrix.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(parse_err(path, "matrix has non-finite entries"));
    }
    Ok(matrix)
}

fn matrix_to_spec(m: &CMatrix) -> MatrixSpec {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|z| EntrySpec::Complex([z.re, z.im])).collect())
        .collect()
}

/// Parses `"1,2,3"` (coordinates of `ℕ^k`) or `"1:1,1:2,2:1"` (generator:copy).
pub fn parse_subset_flag(s: &str) -> Result<BTreeSet<Coordinate>, CliError> {
    let mut out = BTreeSet::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || parse_err("--subset", format!("'{part}' is neither i nor i:copy"));
        let c = match part.split_once(':') {
            Some((g, c)) => Coordinate::Copy {
                generator: g.trim().parse().map_err(|_| bad())?,
                copy: c.trim().parse().map_err(|_| bad())?,
            },
            None => Coordinate::Flat(part.parse().map_err(|_| bad())?),
        };
        out.insert(c);
    }
    Ok(out)
}

fn subset_from_json(items: &[Value]) -> Result<BTreeSet<Coordinate>, CliError> {
    let mut out = BTreeSet::new();
    for (i, v) in items.iter().enumerate() {
        let path = format!("run.subset[{i}]");
        let as_index = |x: &Value| x.as_u64().filter(|&n| n >= 1);
        let c = match v {
            Value::Array(pair) if pair.len() == 2 => match (as_index(&pair[0]), as_index(&pair[1])) {
                (Some(g), Some(c)) => Coordinate::Copy {
                    generator: g as usize,
                    copy: c,
                },
                _ => return Err(parse_err(&path, "expected [generator, copy] with positive entries")),
            },
            x => match as_index(x) {
                Some(g) => Coordinate::Flat(g as usize),
                None => return Err(parse_err(&path, format!("expected a positive index, got {x}"))),
            },
        };
        out.insert(c);
    }
    Ok(out)
}

fn point_from_json(d: &SemigroupDescriptor, pair: &[Value; 2], path: &str) -> Result<InvolutionPoint, CliError> {
    let left = element_from_json(d, &pair[0], &format!("{path}[0]"))?;
    let right = element_from_json(d, &pair[1], &format!("{path}[1]"))?;
    for (x, side) in [(&left, 0), (&right, 1)] {
        if !d.contains(x).map_err(|e| parse_err(path, e.to_string()))? {
            return Err(parse_err(&format!("{path}[{side}]"), format!("{x} is not in {d}")));
        }
    }
    Ok(InvolutionPoint::new(left, right))
}

/// Seeded sample points: the unit pair plus three random pairs; the bound
/// element pairs the first generator with the unit.
fn default_sznagy(d: &SemigroupDescriptor, seed: u64) -> Option<SzNagyConfig> {
    let unit = d.unit();
    let g = d.generators().first()?.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = vec![InvolutionPoint::new(unit.clone(), unit.clone())];
    for _ in 0..3 {
        points.push(InvolutionPoint::new(d.sample_positive(&mut rng), d.sample_positive(&mut rng)));
    }
    SzNagyConfig::new(points, InvolutionPoint::new(g, unit), 1.0).ok()
}

/// `g` is the last generator; the points are the unit and the first two
/// multiples of every other generator that meet `g` trivially.
fn default_regular(d: &SemigroupDescriptor) -> Option<(Vec<GroupElement>, GroupElement)> {
    if !d.is_lattice_ordered() {
        return None;
    }
    let gens = d.generators();
    let g = gens.last()?.clone();
    let unit = d.unit();
    let mut ps = vec![unit.clone()];
    for p in &gens[..gens.len() - 1] {
        for m in 1..=2 {
            let x = p.checked_times(m).ok()?;
            if d.meet_join(&g, &x).ok()?.0 == unit {
                ps.push(x);
            }
        }
    }
    Some((ps, g))
}

fn resolve_seed(flag: Option<u64>, file: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag.or(file) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{SEED_ENV}='{v}' is not a non-negative integer"))),
        Err(_) => Ok(0),
    }
}

fn read_spec(text: &str) -> Result<InputSpec, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let path = if path == "." { "<root>".to_string() } else { path };
        parse_err(
            &path,
            format!("{inner}").split(" at line").next().unwrap_or_default().to_string()
                + &format!(" (line {}, column {})", inner.line(), inner.column()),
        )
    })
}

pub fn parse_spec_str(text: &str, overrides: &Overrides) -> Result<ParsedSpec, CliError> {
    let spec = read_spec(text)?;
    let descriptor = spec
        .descriptor
        .build()
        .map_err(|e| parse_err("descriptor", e.to_string()))?;
    if !descriptor.is_finitely_generated() {
        return Err(parse_err(
            "descriptor",
            format!("{descriptor} is not finitely generated; a representation needs generator images"),
        ));
    }
    let rs = &spec.representation;
    let dim = rs.dimension;
    if dim == 0 {
        return Err(parse_err("representation.dimension", "dimension must be positive"));
    }
    let mut images = Vec::with_capacity(descriptor.generators().len());
    for i in 0..descriptor.generators().len() {
        let label = descriptor.generator_label(i).expect("finitely generated");
        let m = rs
            .generators
            .get(&label)
            .ok_or_else(|| parse_err("representation.generators", format!("missing image of generator {label}")))?;
        images.push(matrix_from_spec(m, dim, &format!("representation.generators.{label}"))?);
    }
    if let Some(extra) = rs.generators.keys().find(|l| descriptor.generator_index(l).is_none()) {
        return Err(parse_err(
            "representation.generators",
            format!("{extra} is not a generator label of {descriptor}"),
        ));
    }
    let mut relations = Vec::new();
    for (k, [lhs, rhs]) in rs.relations.iter().flatten().enumerate() {
        let side = |m: &BTreeMap<String, u64>, s: usize| {
            m.iter()
                .map(|(label, &mult)| {
                    descriptor.generator_index(label).map(|i| (i, mult)).ok_or_else(|| {
                        parse_err(
                            &format!("representation.relations[{k}][{s}]"),
                            format!("unknown generator label {label}"),
                        )
                    })
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Factorization::new)
        };
        relations.push((side(lhs, 0)?, side(rhs, 1)?));
    }
    let representation = Representation::new(descriptor.clone(), dim, images, relations)
        .map_err(|e| parse_err("representation", e.to_string()))?;

    let run = &spec.run;
    let seed = resolve_seed(overrides.seed, run.seed)?;
    let mut tolerances = Tolerances::default();
    if let Some(t) = overrides.tol.or(run.tol) {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Config(format!("tolerance must be positive, got {t}")));
        }
        tolerances.psd = t;
    }
    if let Some(t) = run.residual_tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(parse_err("run.residual_tol", "tolerance must be positive"));
        }
        tolerances.residual = t;
    }
    let subset = match (&overrides.subset, &run.subset) {
        (Some(flag), _) => Some(parse_subset_flag(flag)?),
        (None, Some(items)) => Some(subset_from_json(items)?),
        (None, None) => None,
    };
    let sznagy = match &run.sznagy {
        Some(s) => {
            let points = s
                .points
                .iter()
                .enumerate()
                .map(|(i, p)| point_from_json(&descriptor, p, &format!("run.sznagy.points[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            let bound = match &s.bound {
                Some(b) => point_from_json(&descriptor, b, "run.sznagy.bound")?,
                None => {
                    let u = descriptor.unit();
                    InvolutionPoint::new(u.clone(), u)
                }
            };
            Some(
                SzNagyConfig::new(points, bound, s.constant.unwrap_or(1.0))
                    .map_err(|e| parse_err("run.sznagy.constant", e.to_string()))?,
            )
        }
        None => default_sznagy(&descriptor, seed),
    };
    let regular = match &run.regular {
        Some(r) => {
            let ps = r
                .ps
                .iter()
                .enumerate()
                .map(|(i, p)| element_from_json(&descriptor, p, &format!("run.regular.ps[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            Some((ps, element_from_json(&descriptor, &r.g, "run.regular.g")?))
        }
        None => default_regular(&descriptor),
    };
    let config = RunConfig {
        max_degree: overrides.max_degree.or(run.max_degree).unwrap_or(DEFAULT_MAX_DEGREE),
        subset,
        subset_cap: run.subset_cap.unwrap_or(DEFAULT_SUBSET_CAP),
        tolerances,
        seed,
        sample_budget: run.sample_budget.unwrap_or(DEFAULT_SAMPLE_BUDGET),
        sznagy,
        regular,
    };

    let normal_map = match &rs.normal_map {
        Some(nm) => {
            let mut images = BTreeMap::new();
            for (i, img) in nm.images.iter().enumerate() {
                let path = format!("representation.normal_map.images[{i}]");
                let p = element_from_json(&descriptor, &img.element, &format!("{path}.element"))?;
                if !descriptor.contains(&p).map_err(|e| parse_err(&path, e.to_string()))? {
                    return Err(parse_err(&format!("{path}.element"), format!("{p} is not in {descriptor}")));
                }
                images.insert(p, matrix_from_spec(&img.matrix, nm.ambient_dim, &format!("{path}.matrix"))?);
            }
            Some(
                NormalMap::new(representation.clone(), nm.ambient_dim, images)
                    .map_err(|e| parse_err("representation.normal_map", e.to_string()))?,
            )
        }
        None => None,
    };

    let validation = validate_rep(&representation, config.tolerances.residual, config.sample_budget, seed);
    if !validation.is_valid() {
        return Err(CliError::Validation(validation_table(&validation)));
    }
    Ok(ParsedSpec {
        descriptor,
        representation,
        normal_map,
        run: config,
        validation,
    })
}

pub fn parse_spec(path: &Path, overrides: &Overrides) -> Result<ParsedSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_spec_str(&text, overrides)
}

/// An input document reproducing `t` exactly.
pub fn spec_for_representation(t: &Representation) -> InputSpec {
    let d = t.descriptor();
    let label = |i: usize| d.generator_label(i).expect("generator index in range");
    let generators = t
        .generator_images()
        .iter()
        .enumerate()
        .map(|(i, m)| (label(i), matrix_to_spec(m)))
        .collect();
    let relations = (!t.relations().is_empty()).then(|| {
        t.relations()
            .iter()
            .map(|(l, r)| {
                let side = |f: &Factorization| f.terms().map(|(i, m)| (label(i), m)).collect();
                [side(l), side(r)]
            })
            .collect()
    });
    InputSpec {
        descriptor: DescriptorSpec::from_descriptor(d),
        representation: RepresentationSpec {
            dimension: t.dimension(),
            generators,
            relations,
            normal_map: None,
        },
        run: RunSpec::default(),
    }
}

/// Pretty JSON that keeps object-free arrays (matrix rows, entries) on one line.
pub fn render_spec(spec: &InputSpec) -> String {
    fn write(v: &Value, indent: usize, out: &mut String) {
        let pad = "  ".repeat(indent + 1);
        match v {
            Value::Object(map) if !map.is_empty() => {
                out.push_str("{\n");
                for (i, (k, x)) in map.iter().enumerate() {
                    out.push_str(&pad);
                    out.push_str(&serde_json::to_string(k).expect("string"));
                    out.push_str(": ");
                    write(x, indent + 1, out);
                    out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
                }
                out.push_str(&"  ".repeat(indent));
                out.push('}');
            }
            Value::Array(items)
                if items.iter().any(Value::is_object) || (inline(v).len() > 60 && items.iter().all(Value::is_array)) =>
            {
                out.push_str("[\n");
                for (i, x) in items.iter().enumerate() {
                    out.push_str(&pad);
                    write(x, indent + 1, out);
                    out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
                }
                out.push_str(&"  ".repeat(indent));
                out.push(']');
            }
            other => out.push_str(&inline(other)),
        }
    }
    fn inline(v: &Value) -> String {
        match v {
            Value::Array(items) => format!("[{}]", items.iter().map(inline).collect::<Vec<_>>().join(", ")),
            other => other.to_string(),
        }
    }
    let value = serde_json::to_value(spec).expect("input specs serialize");
    let mut out = String::new();
    write(&value, 0, &mut out);
    out.push('\n');
    out
}

// ---------------------------------------------------------------------------
// Reports

/// Minimal JSON tree with sorted keys and fixed float formatting.
#[derive(Debug, Clone, PartialEq)]
pub enum ReportValue {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    List(Vec<ReportValue>),
    Map(BTreeMap<String, ReportValue>),
}

impl ReportValue {
    fn str(s: impl Into<String>) -> Self {
        ReportValue::Str(s.into())
    }

    fn opt_float(x: Option<f64>) -> Self {
        x.map_or(ReportValue::Null, ReportValue::Float)
    }

    fn write(&self, out: &mut String, indent: usize) {
        let pad = |n: usize| "  ".repeat(n);
        match self {
            ReportValue::Null => out.push_str("null"),
            ReportValue::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            ReportValue::Int(i) => out.push_str(&i.to_string()),
            ReportValue::Float(x) if x.is_finite() => out.push_str(&format!("{x:.16e}")),
            ReportValue::Float(x) => out.push_str(&serde_json::to_string(&x.to_string()).expect("string")),
            ReportValue::Str(s) => out.push_str(&serde_json::to_string(s).expect("string")),
            ReportValue::List(items) if items.is_empty() => out.push_str("[]"),
            ReportValue::List(items) => {
                out.push_str("[\n");
                for (i, item) in items.iter().enumerate() {
                    out.push_str(&pad(indent + 1));
                    item.write(out, indent + 1);
                    out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
                }
                out.push_str(&pad(indent));
                out.push(']');
            }
            ReportValue::Map(map) if map.is_empty() => out.push_str("{}"),
            ReportValue::Map(map) => {
                out.push_str("{\n");
                for (i, (k, v)) in map.iter().enumerate() {
                    out.push_str(&pad(indent + 1));
                    out.push_str(&serde_json::to_string(k).expect("string"));
                    out.push_str(": ");
                    v.write(out, indent + 1);
                    out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
                }
                out.push_str(&pad(indent));
                out.push('}');
            }
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out.push('\n');
        out
    }
}

fn map(entries: impl IntoIterator<Item = (&'static str, ReportValue)>) -> ReportValue {
    ReportValue::Map(entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
}

fn tolerances_value(t: &Tolerances) -> ReportValue {
    map([("psd", ReportValue::Float(t.psd)), ("residual", ReportValue::Float(t.residual))])
}

pub fn certificate_value(r: &CertificateReport) -> ReportValue {
    map([
        ("condition", ReportValue::str(&r.condition)),
        ("parameters", ReportValue::str(&r.parameters)),
        ("scope", ReportValue::str(&r.scope)),
        ("verdict", ReportValue::str(r.verdict.as_str())),
        ("margin", ReportValue::opt_float(r.margin)),
        ("witness", r.witness.clone().map_or(ReportValue::Null, ReportValue::Str)),
        ("tolerances", tolerances_value(&r.tolerances)),
        ("notes", ReportValue::List(r.notes.iter().map(ReportValue::str).collect())),
        (
            "details",
            ReportValue::Map(r.details.iter().map(|(k, v)| (k.clone(), ReportValue::Float(*v))).collect()),
        ),
    ])
}

fn validation_value(v: &ValidationVerdict) -> ReportValue {
    map([
        (
            "checks",
            ReportValue::List(
                v.checks
                    .iter()
                    .map(|c| {
                        map([
                            ("name", ReportValue::str(&c.name)),
                            ("passed", ReportValue::Bool(c.passed)),
                            ("residual", ReportValue::opt_float(c.residual)),
                            ("informational", ReportValue::Bool(c.informational)),
                            ("detail", c.detail.clone().map_or(ReportValue::Null, ReportValue::Str)),
                        ])
                    })
                    .collect(),
            ),
        ),
        ("valid", ReportValue::Bool(v.is_valid())),
        ("warnings", ReportValue::List(v.warnings.iter().map(ReportValue::str).collect())),
    ])
}

pub fn validation_table(v: &ValidationVerdict) -> String {
    let mut out = format!("{:<32} {:<6} {:<24} {}\n", "check", "ok", "residual", "detail");
    for c in &v.checks {
        let ok = match (c.passed, c.informational) {
            (true, _) => "yes",
            (false, true) => "info",
            (false, false) => "NO",
        };
        let residual = c.residual.map_or("-".to_string(), |r| format!("{r:.6e}"));
        out.push_str(&format!(
            "{:<32} {:<6} {:<24} {}\n",
            c.name,
            ok,
            residual,
            c.detail.as_deref().unwrap_or("")
        ));
    }
    out
}

/// All reports of one invocation together with the echo of its settings.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub reports: Vec<CertificateReport>,
    pub descriptor: String,
    pub dimension: usize,
    pub run: RunConfig,
    pub validation: ValidationVerdict,
}

impl RunReport {
    /// 1 if anything failed, 2 if nothing was decided, otherwise 0.
    pub fn exit_code(&self) -> i32 {
        if self.reports.iter().any(|r| r.verdict == Verdict::Fail) {
            1
        } else if self.reports.iter().all(|r| r.verdict == Verdict::NotApplicable) {
            2
        } else {
            0
        }
    }

    pub fn to_value(&self) -> ReportValue {
        let run = &self.run;
        let environment = map([
            ("version", ReportValue::str(env!("CARGO_PKG_VERSION"))),
            ("seed", ReportValue::Int(run.seed as i64)),
            ("tolerances", tolerances_value(&run.tolerances)),
            ("max_degree", ReportValue::Int(run.max_degree as i64)),
            ("subset_cap", ReportValue::Int(run.subset_cap as i64)),
            ("sample_budget", ReportValue::Int(run.sample_budget as i64)),
        ]);
        map([
            ("environment", environment),
            (
                "input",
                map([
                    ("descriptor", ReportValue::str(&self.descriptor)),
                    ("dimension", ReportValue::Int(self.dimension as i64)),
                    ("validation", validation_value(&self.validation)),
                ]),
            ),
            ("reports", ReportValue::List(self.reports.iter().map(certificate_value).collect())),
            ("exit_code", ReportValue::Int(self.exit_code() as i64)),
        ])
    }

    pub fn render_machine(&self) -> String {
        self.to_value().render()
    }

    pub fn render_human(&self) -> String {
        let mut out = format!(
            "{} on C^{} (seed {}, psd tol {:e})\n",
            self.descriptor, self.dimension, self.run.seed, self.run.tolerances.psd
        );
        out.push_str(&format!(
            "{:<10} {:<15} {:<24} {:<28} {}\n",
            "condition", "verdict", "margin", "witness", "scope"
        ));
        for r in &self.reports {
            let margin = r.margin.map_or("-".to_string(), |m| format!("{m:.6e}"));
            out.push_str(&format!(
                "{:<10} {:<15} {:<24} {:<28} {}\n",
                r.condition,
                r.verdict.as_str(),
                margin,
                r.witness.as_deref().unwrap_or("-"),
                r.scope
            ));
            for note in &r.notes {
                out.push_str(&format!("{:<10} note: {note}\n", ""));
            }
        }
        for w in &self.validation.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Command line

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Condition {
    Athavale,
    Brehmer,
    Regular,
    Sznagy,
    Extension,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Human,
    Machine,
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// JSON input document.
    #[arg(long)]
    input: PathBuf,
    /// Largest total degree swept by the binomial certificate.
    #[arg(long)]
    max_degree: Option<u64>,
    /// Index set U for the subset sums, e.g. "1,2" or "1:1,1:2,2:1".
    #[arg(long)]
    subset: Option<String>,
    /// Relative tolerance of the positivity tests.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Also write the machine report to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GalleryArgs {
    /// One of jordan, truncated_shift, neil_scalar, neil_matrix, unitary_rep, normal_pair.
    name: String,
    #[arg(long)]
    dim: Option<usize>,
    /// Shift weights, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    weights: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Real matrix, rows separated by ';' and entries by ','.
    #[arg(long, allow_hyphen_values = true)]
    matrix: Option<String>,
    /// Angles per generator, generators separated by ';'.
    #[arg(long, allow_hyphen_values = true)]
    angles: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a certificate on an input document.
    Check {
        #[arg(value_enum)]
        condition: Condition,
        #[command(flatten)]
        args: CheckArgs,
    },
    /// Print the input document of a named example.
    Gallery(GalleryArgs),
    /// Parse and validate an input document.
    Validate(ValidateArgs),
}

#[derive(Debug, Parser)]
#[command(name = "normex", version, about = "Positivity certificates for normal extensions of semigroup representations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn certificate_or_na(
    condition: &str,
    explicit: bool,
    result: Result<CertificateReport, CertificateError>,
    tol: Tolerances,
) -> Result<CertificateReport, CliError> {
    match result {
        Ok(r) => Ok(r),
        Err(e) if !explicit => Ok(CertificateReport {
            condition: condition.to_string(),
            parameters: String::new(),
            scope: String::new(),
            verdict: Verdict::NotApplicable,
            margin: None,
            witness: None,
            tolerances: tol,
            notes: vec![e.to_string()],
            details: BTreeMap::new(),
        }),
        Err(e) => Err(CliError::Config(format!("{condition}: {e}"))),
    }
}

fn missing(condition: &str, explicit: bool, why: String, tol: Tolerances) -> Result<CertificateReport, CliError> {
    certificate_or_na(condition, explicit, Err(CertificateError::Unsupported(why)), tol)
}

pub fn run_checks(parsed: &ParsedSpec, condition: Condition) -> Result<RunReport, CliError> {
    let t = &parsed.representation;
    let run = &parsed.run;
    let tol = run.tolerances;
    let all = condition == Condition::All;
    let wants = |c: Condition| all || condition == c;
    let explicit = !all;
    let mut reports = Vec::new();

    if wants(Condition::Athavale) {
        reports.push(certificate_or_na(
            "athavale",
            explicit,
            generator_certificate(t, run.max_degree, tol),
            tol,
        )?);
    }
    if wants(Condition::Brehmer) {
        let subset = match (&run.subset, parsed.descriptor.kind()) {
            (Some(u), _) => Some(u.clone()),
            (None, SemigroupKind::FreeAbelian(k)) => Some((1..=*k).map(Coordinate::Flat).collect()),
            (None, _) => None,
        };
        reports.push(match subset {
            Some(u) => certificate_or_na("brehmer", explicit, brehmer_certificate(t, &u, run.subset_cap, tol), tol)?,
            None => missing(
                "brehmer",
                explicit,
                format!("subset sums need a representation of ℕ^k, got {}", parsed.descriptor),
                tol,
            )?,
        });
    }
    if wants(Condition::Regular) {
        reports.push(match &run.regular {
            Some((ps, g)) => certificate_or_na("regular", explicit, regularity_check(t, ps, g, tol), tol)?,
            None => missing(
                "regular",
                explicit,
                format!("{} is not lattice ordered or has no generators", parsed.descriptor),
                tol,
            )?,
        });
    }
    if wants(Condition::Sznagy) {
        reports.push(match &run.sznagy {
            Some(cfg) => certificate_or_na("sznagy", explicit, sznagy_check(t, cfg, tol), tol)?,
            None => missing("sznagy", explicit, "no sample points configured".into(), tol)?,
        });
    }
    if wants(Condition::Extension) {
        reports.push(match &parsed.normal_map {
            Some(nm) => certificate_or_na("extension", explicit, extension_certificate(nm, tol), tol)?,
            None => missing("extension", explicit, "the input has no normal_map".into(), tol)?,
        });
    }
    Ok(RunReport {
        reports,
        descriptor: parsed.descriptor.to_string(),
        dimension: t.dimension(),
        run: run.clone(),
        validation: parsed.validation.clone(),
    })
}

fn parse_real_rows(s: &str, what: &str) -> Result<Vec<Vec<f64>>, CliError> {
    s.split(';')
        .map(|row| {
            row.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|_| CliError::Config(format!("--{what}: '{x}' is not a number")))
                })
                .collect()
        })
        .collect()
}

fn gallery(args: &GalleryArgs) -> Result<String, CliError> {
    let matrix = match &args.matrix {
        Some(s) => {
            let rows = parse_real_rows(s, "matrix")?;
            let rows: Vec<Vec<Complex64>> = rows
                .into_iter()
                .map(|r| r.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
                .collect();
            Some(CMatrix::from_rows(rows).map_err(|e| CliError::Config(format!("--matrix: {e}")))?)
        }
        None => None,
    };
    let params = GalleryParams {
        dim: args.dim,
        weights: args.weights.clone(),
        lambda: args.lambda,
        matrix,
        angles: args.angles.as_deref().map(|s| parse_real_rows(s, "angles")).transpose()?,
        seed: args.seed,
    };
    let item = make_gallery(&args.name, &params).map_err(|e| CliError::Config(e.to_string()))?;
    let spec = spec_for_representation(&item.into_representation());
    Ok(render_spec(&spec))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    match cli.command {
        Command::Check { condition, args } => {
            let overrides = Overrides {
                max_degree: args.max_degree,
                subset: args.subset.clone(),
                tol: args.tol,
                seed: args.seed,
            };
            let parsed = parse_spec(&args.input, &overrides)?;
            for w in &parsed.validation.warnings {
                writeln!(stderr, "warning: {w}").map_err(io)?;
            }
            let report = run_checks(&parsed, condition)?;
            let machine = report.render_machine();
            if let Some(path) = &args.out {
                write_file(path, &machine)?;
            }
            match args.format {
                Format::Human => stdout.write_all(report.render_human().as_bytes()).map_err(io)?,
                Format::Machine => stdout.write_all(machine.as_bytes()).map_err(io)?,
            }
            Ok(report.exit_code())
        }
        Command::Gallery(args) => {
            let text = gallery(&args)?;
            match &args.out {
                Some(path) => write_file(path, &text)?,
                None => stdout.write_all(text.as_bytes()).map_err(io)?,
            }
            Ok(0)
        }
        Command::Validate(args) => {
            let overrides = Overrides {
                seed: args.seed,
                ..Overrides::default()
            };
            let parsed = parse_spec(&args.input, &overrides)?;
            let text = match args.format {
                Format::Human => {
                    let mut t = format!("{} on C^{}: valid\n", parsed.descriptor, parsed.representation.dimension());
                    t.push_str(&validation_table(&parsed.validation));
                    for w in &parsed.validation.warnings {
                        t.push_str(&format!("warning: {w}\n"));
                    }
                    t
                }
                Format::Machine => validation_value(&parsed.validation).render(),
            };
            stdout.write_all(text.as_bytes()).map_err(io)?;
            Ok(0)
        }
    }
}

/// Runs one invocation and returns its exit code: 0 when every decided
/// certificate passed, 1 when one failed, 2 on input or configuration errors
/// or when nothing could be decided.
pub fn run_command<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    2
                }
            };
        }
    };
    match execute(cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const NEIL: &str = r#"{
        "descriptor": {"kind": "numerical", "gaps": [1]},
        "representation": {
            "dimension": 1,
            "generators": {"2": [[[0.25, 0]]], "3": [[[0.125, 0]]]},
            "relations": [[{"2": 3}, {"3": 2}]]
        }
    }"#;

    #[test]
    fn minimal_numerical_spec_parses() {
        let p = parse_spec_str(NEIL, &Overrides::default()).unwrap();
        assert!(p.validation.is_valid());
        assert!(p.validation.warnings.is_empty());
        assert_eq!(p.validation.check("relation:1").unwrap().residual, Some(0.0));
        assert_eq!(p.run.max_degree, DEFAULT_MAX_DEGREE);
    }

    #[test]
    fn scalar_shorthand_is_accepted_in_dimension_one() {
        let text = NEIL.replace("[[[0.25, 0]]]", "[[0.25, 0]]").replace("[[[0.125, 0]]]", "[[0.125, 0]]");
        let p = parse_spec_str(&text, &Overrides::default()).unwrap();
        assert_eq!(p.representation.generator_images()[0], CMatrix::scalar(Complex64::new(0.25, 0.0)));
    }

    #[test]
    fn missing_relations_warn() {
        let text = NEIL.replace(r#","relations": [[{"2": 3}, {"3": 2}]]"#, "").replace(
            r#",
            "relations": [[{"2": 3}, {"3": 2}]]"#,
            "",
        );
        assert!(!text.contains("relations"));
        let p = parse_spec_str(&text, &Overrides::default()).unwrap();
        assert!(!p.validation.warnings.is_empty());
    }

    #[test]
    fn errors_are_located() {
        let text = NEIL.replace(r#""3": [[[0.125, 0]]]"#, r#""3": [[[0.125, 0], [0, 0]]]"#);
        match parse_spec_str(&text, &Overrides::default()) {
            Err(CliError::Parse { path, .. }) => assert_eq!(path, "representation.generators.3"),
            other => panic!("unexpected {other:?}"),
        }
        let text = NEIL.replace("\"dimension\": 1", "\"dimension\": \"one\"");
        match parse_spec_str(&text, &Overrides::default()) {
            Err(CliError::Parse { path, message }) => {
                assert_eq!(path, "representation.dimension");
                assert!(message.contains("line 4"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        let text = NEIL.replace("\"2\": 3", "\"5\": 3");
        assert!(matches!(parse_spec_str(&text, &Overrides::default()), Err(CliError::Parse { .. })));
    }

    #[test]
    fn elements_parse_per_kind() {
        let d = SemigroupDescriptor::product(vec![
            SemigroupDescriptor::free_abelian(2),
            SemigroupDescriptor::numerical([1]).unwrap(),
        ])
        .unwrap();
        let v: Value = serde_json::from_str("[[1, 2], 5]").unwrap();
        assert_eq!(
            element_from_json(&d, &v, "x").unwrap(),
            GroupElement::Tuple(vec![GroupElement::ints(&[1, 2]), GroupElement::int(5)])
        );
        let q = SemigroupDescriptor::rationals();
        assert_eq!(
            element_from_json(&q, &Value::from("3/6"), "x").unwrap(),
            GroupElement::rational(1, 2)
        );
        let pw = SemigroupDescriptor::infinite_power(SemigroupDescriptor::free_abelian(1));
        let v: Value = serde_json::from_str(r#"{"3": [2]}"#).unwrap();
        assert_eq!(
            element_from_json(&pw, &v, "x").unwrap(),
            GroupElement::Power(Support::single(3, GroupElement::ints(&[2])))
        );
        assert!(element_from_json(&pw, &serde_json::from_str(r#"{"0": [2]}"#).unwrap(), "x").is_err());
        assert!(element_from_json(&d, &Value::from(3), "x").is_err());
    }

    #[test]
    fn subset_flag_parses() {
        assert_eq!(parse_subset_flag("1,2").unwrap(), [Coordinate::Flat(1), Coordinate::Flat(2)].into());
        assert_eq!(
            parse_subset_flag("1:1, 2:3").unwrap(),
            [
                Coordinate::Copy { generator: 1, copy: 1 },
                Coordinate::Copy { generator: 2, copy: 3 }
            ]
            .into()
        );
        assert!(parse_subset_flag("a").is_err());
    }

    #[test]
    fn report_floats_have_seventeen_digits() {
        let v = map([("x", ReportValue::Float(0.1)), ("a", ReportValue::Null)]);
        assert_eq!(v.render(), "{\n  \"a\": null,\n  \"x\": 1.0000000000000001e-1\n}\n");
        let parsed: Value = serde_json::from_str(&v.render()).unwrap();
        assert_eq!(parsed["x"].as_f64(), Some(0.1));
    }

    #[test]
    fn gallery_specs_roundtrip() {
        for case in crate::constructions::GALLERY_CASES {
            let item = make_gallery(case, &GalleryParams::default()).unwrap();
            let rep = item.into_representation();
            let text = serde_json::to_string(&spec_for_representation(&rep)).unwrap();
            let parsed = parse_spec_str(&text, &Overrides::default()).unwrap();
            for (a, b) in parsed.representation.generator_images().iter().zip(rep.generator_images()) {
                assert_eq!(a, b, "{case}");
            }
            assert_eq!(parsed.representation.relations(), rep.relations());
        }
    }
}
