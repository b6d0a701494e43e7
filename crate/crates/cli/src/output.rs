//! Serialized artifacts. Every struct here has a schema in `schemas/`.

use std::fmt::Write as _;

use serde::Serialize;

use fractalmra::duality::{BCycleReport, DualVerdict};
use fractalmra::lattice::{CascadeRow, GramSection};
use fractalmra::measure::{CycleReport, MomentTable, SupportClassification, WienerProfile};
use fractalmra::tables::TableRow;
use fractalmra::{DigitSystem, LaurentPolynomial, Scalar};

/// A coefficient as decimals, plus its `a+b√q` form when exact.
#[derive(Serialize)]
pub struct Num {
    pub re: f64,
    pub im: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
}

impl From<&Scalar> for Num {
    fn from(x: &Scalar) -> Self {
        let z = x.to_complex();
        Num { re: z.re, im: z.im, exact: x.as_exact().map(|s| s.to_string()) }
    }
}

#[derive(Serialize)]
pub struct SystemOut {
    pub scale: u32,
    pub digits: Vec<u32>,
}

impl SystemOut {
    pub fn of(sys: &DigitSystem) -> Self {
        SystemOut { scale: sys.scale(), digits: sys.digits().to_vec() }
    }
}

#[derive(Serialize)]
pub struct TermOut {
    pub k: i64,
    pub value: Num,
}

pub fn terms_of(p: &LaurentPolynomial) -> Vec<TermOut> {
    p.terms().map(|(k, c)| TermOut { k, value: c.into() }).collect()
}

#[derive(Serialize)]
pub struct DimensionOut {
    pub dimension: f64,
}

#[derive(Serialize)]
pub struct FiltersOut {
    pub system: SystemOut,
    pub filters: Vec<Vec<TermOut>>,
    pub defect: f64,
    pub exact: bool,
    pub passes: bool,
}

#[derive(Serialize)]
pub struct SpectrumOut {
    pub system: SystemOut,
    pub weight: Vec<TermOut>,
    pub half_width: i64,
    pub dimension: usize,
    pub eigenvalues: Vec<[f64; 2]>,
    pub unit_multiplicity: usize,
    pub exact_fixed_dimension: Option<usize>,
    pub other_peripheral: Vec<[f64; 2]>,
    pub constant_fixed: bool,
    pub perron_frobenius: bool,
}

#[derive(Serialize)]
pub struct MomentOut {
    pub n: i64,
    pub value: Num,
    pub status: &'static str,
}

#[derive(Serialize)]
pub struct WienerOut {
    pub k: i64,
    pub partial_sum: Num,
    pub ratio: Option<Num>,
}

#[derive(Serialize)]
pub struct MomentsOut {
    pub system: SystemOut,
    pub weight: Vec<TermOut>,
    pub range: i64,
    pub all_settled: bool,
    pub moments: Vec<MomentOut>,
    pub wiener: Vec<WienerOut>,
    pub warnings: Vec<String>,
}

fn moments_of(table: &MomentTable) -> Vec<MomentOut> {
    table
        .entries()
        .map(|(n, e)| MomentOut { n, value: (&e.value).into(), status: e.status.label() })
        .collect()
}

impl MomentsOut {
    pub fn new(sys: &DigitSystem, table: &MomentTable, profile: &WienerProfile) -> Self {
        MomentsOut {
            system: SystemOut::of(sys),
            weight: terms_of(table.weight()),
            range: table.range(),
            all_settled: table.all_settled(),
            moments: moments_of(table),
            wiener: profile
                .entries
                .iter()
                .map(|w| WienerOut { k: w.k, partial_sum: (&w.partial_sum).into(), ratio: w.ratio.as_ref().map(Num::from) })
                .collect(),
            warnings: profile.warnings.clone(),
        }
    }
}

pub fn moments_csv(out: &MomentsOut) -> String {
    let mut s = String::from("n,re,im,status\n");
    for m in &out.moments {
        let _ = writeln!(s, "{},{},{},{}", m.n, m.value.re, m.value.im, m.status);
    }
    s
}

#[derive(Serialize)]
pub struct CycleOut {
    pub length: u32,
    pub angles: Vec<String>,
    pub weights: Vec<f64>,
}

fn cycles_of(cycles: &[fractalmra::measure::Cycle]) -> Vec<CycleOut> {
    cycles
        .iter()
        .map(|c| CycleOut {
            length: c.length,
            angles: c.points.iter().map(|p| p.angle.to_string()).collect(),
            weights: c.points.iter().map(|p| p.weight).collect(),
        })
        .collect()
}

#[derive(Serialize)]
pub struct CyclesOut {
    pub system: SystemOut,
    pub max_length: u32,
    pub verdict: fractalmra::measure::CycleVerdict,
    pub cycles: Vec<CycleOut>,
}

impl CyclesOut {
    pub fn new(sys: &DigitSystem, r: &CycleReport) -> Self {
        CyclesOut { system: SystemOut::of(sys), max_length: r.max_length, verdict: r.verdict, cycles: cycles_of(&r.cycles) }
    }
}

#[derive(Serialize)]
pub struct AtomOut {
    pub angle: String,
    pub mass: Num,
}

#[derive(Serialize)]
pub struct ClassifyOut {
    pub system: SystemOut,
    pub kind: &'static str,
    pub unique: Option<bool>,
    pub diagnostics: Vec<String>,
    pub moments: Vec<MomentOut>,
    pub cycles: Vec<CycleOut>,
    pub measures: Vec<Vec<AtomOut>>,
}

pub fn classify_out(sys: &DigitSystem, c: &SupportClassification) -> ClassifyOut {
    match c {
        SupportClassification::FullSupport { moments, unique, diagnostics } => ClassifyOut {
            system: SystemOut::of(sys),
            kind: "full_support",
            unique: Some(*unique),
            diagnostics: diagnostics.clone(),
            moments: moments_of(moments),
            cycles: Vec::new(),
            measures: Vec::new(),
        },
        SupportClassification::AtomicOnCycles { cycles, measures, diagnostics } => ClassifyOut {
            system: SystemOut::of(sys),
            kind: "atomic_on_cycles",
            unique: None,
            diagnostics: diagnostics.clone(),
            moments: Vec::new(),
            cycles: cycles_of(cycles),
            measures: measures
                .iter()
                .map(|m| m.atoms.iter().map(|(a, w)| AtomOut { angle: a.to_string(), mass: w.into() }).collect())
                .collect(),
        },
    }
}

#[derive(Serialize)]
pub struct BCycleOut {
    pub word: Vec<i64>,
    pub points: Vec<String>,
    pub weights: Vec<f64>,
}

#[derive(Serialize)]
pub struct BCyclesOut {
    pub max_length: u32,
    pub trivial_only: bool,
    pub cycles: Vec<BCycleOut>,
}

impl BCyclesOut {
    pub fn new(r: &BCycleReport) -> Self {
        BCyclesOut {
            max_length: r.max_length,
            trivial_only: r.trivial_only,
            cycles: r
                .cycles
                .iter()
                .map(|c| BCycleOut {
                    word: c.word.clone(),
                    points: c.points.iter().map(|p| p.to_string()).collect(),
                    weights: c.weights.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Serialize)]
pub struct DualityOut {
    pub system: SystemOut,
    pub dual: Vec<i64>,
    pub matrix: String,
    pub defect: f64,
    pub exact: bool,
    pub verdict: DualVerdict,
    pub lambda_prefix: Option<Vec<i64>>,
    pub b_cycles: Option<BCyclesOut>,
}

#[derive(Serialize)]
pub struct ParsevalOut {
    pub xi: f64,
    pub partial_sums: Vec<f64>,
    pub nondecreasing: bool,
    pub bounded: bool,
}

impl ParsevalOut {
    pub fn new(xi: f64, partial_sums: Vec<f64>) -> Self {
        let nondecreasing = partial_sums.windows(2).all(|w| w[1] >= w[0]);
        let bounded = partial_sums.iter().all(|&s| s <= 1.0 + 1e-9);
        ParsevalOut { xi, partial_sums, nondecreasing, bounded }
    }
}

#[derive(Serialize)]
pub struct OnbOut {
    pub system: SystemOut,
    pub exponents: Vec<i64>,
    pub depth: u32,
    pub gram: Vec<Vec<[f64; 2]>>,
    pub max_identity_deviation: f64,
    pub orthogonal_triple: Option<[i64; 3]>,
    pub parseval: Vec<ParsevalOut>,
}

#[derive(Serialize)]
pub struct CascadeRowOut {
    pub n: u32,
    pub norm_sq: Num,
    pub inner: Num,
}

#[derive(Serialize)]
pub struct CascadeOut {
    pub system: SystemOut,
    pub filter: Vec<TermOut>,
    pub rows: Vec<CascadeRowOut>,
    /// Same rows predicted from the transfer operator alone.
    pub predicted: Vec<CascadeRowOut>,
    pub prediction_agrees: bool,
}

fn cascade_rows(rows: &[CascadeRow]) -> Vec<CascadeRowOut> {
    rows.iter().map(|r| CascadeRowOut { n: r.n, norm_sq: (&r.norm_sq).into(), inner: (&r.inner).into() }).collect()
}

impl CascadeOut {
    pub fn new(sys: &DigitSystem, m: &LaurentPolynomial, rows: &[CascadeRow], predicted: &[CascadeRow]) -> Self {
        let agrees = rows.len() == predicted.len()
            && rows.iter().zip(predicted).all(|(a, b)| a.norm_sq.approx_eq(&b.norm_sq, 1e-9) && a.inner.approx_eq(&b.inner, 1e-9));
        CascadeOut {
            system: SystemOut::of(sys),
            filter: terms_of(m),
            rows: cascade_rows(rows),
            predicted: cascade_rows(predicted),
            prediction_agrees: agrees,
        }
    }
}

pub fn cascade_csv(out: &CascadeOut) -> String {
    let mut s = String::from("n,norm_sq,inner_re,inner_im\n");
    for r in &out.rows {
        let _ = writeln!(s, "{},{},{},{}", r.n, r.norm_sq.re, r.inner.re, r.inner.im);
    }
    s
}

#[derive(Serialize)]
pub struct RieszSample {
    pub t: f64,
    pub value: f64,
}

#[derive(Serialize)]
pub struct RieszOut {
    pub n: u32,
    pub grid: usize,
    pub samples: Vec<RieszSample>,
}

pub fn riesz_csv(samples: &[(f64, f64)]) -> String {
    let mut s = String::from("t,value\n");
    for (t, v) in samples {
        let _ = writeln!(s, "{t},{v}");
    }
    s
}

#[derive(Serialize)]
pub struct GramEntryOut {
    pub row: usize,
    pub col: usize,
    pub value: Num,
}

#[derive(Serialize)]
pub struct GramOut {
    pub system: SystemOut,
    pub generators: usize,
    pub max_scale: i32,
    pub max_translate: i64,
    pub size: usize,
    pub is_identity: bool,
    pub max_identity_deviation: f64,
    /// Entries that differ from the identity.
    pub off_identity: Vec<GramEntryOut>,
}

impl GramOut {
    pub fn new(sys: &DigitSystem, generators: usize, max_scale: i32, max_translate: i64, g: &GramSection) -> Self {
        let off_identity = g
            .matrix
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, x)| (i, j, x)))
            .filter(|(i, j, x)| **x != if i == j { Scalar::one() } else { Scalar::zero() })
            .map(|(row, col, x)| GramEntryOut { row, col, value: x.into() })
            .collect();
        GramOut {
            system: SystemOut::of(sys),
            generators,
            max_scale,
            max_translate,
            size: g.labels.len(),
            is_identity: g.is_identity(),
            max_identity_deviation: g.max_identity_deviation(),
            off_identity,
        }
    }
}

#[derive(Serialize)]
pub struct TableOut {
    pub rows: Vec<TableRow>,
}

#[derive(Serialize)]
pub struct ReplimitRow {
    pub m: i64,
    pub limit: Num,
    pub moment: Num,
    pub abs_diff: f64,
    pub exact_match: bool,
}

impl ReplimitRow {
    pub fn new(m: i64, limit: &Scalar, moment: &Scalar) -> Self {
        ReplimitRow {
            m,
            limit: limit.into(),
            moment: moment.into(),
            abs_diff: (limit.to_complex() - moment.to_complex()).norm(),
            exact_match: limit.is_exact() && moment.is_exact() && limit == moment,
        }
    }
}

#[derive(Serialize)]
pub struct ReplimitOut {
    pub system: SystemOut,
    pub n: u32,
    pub rows: Vec<ReplimitRow>,
}

/// `path = value` lines, one per JSON leaf, in document order.
pub fn flatten_text(v: &serde_json::Value) -> String {
    fn walk(v: &serde_json::Value, path: &str, out: &mut String) {
        match v {
            serde_json::Value::Object(map) => {
                for (k, x) in map {
                    let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                    walk(x, &p, out);
                }
            }
            serde_json::Value::Array(items) => {
                for (i, x) in items.iter().enumerate() {
                    walk(x, &format!("{path}[{i}]"), out);
                }
            }
            leaf => {
                let _ = writeln!(out, "{path} = {leaf}");
            }
        }
    }
    let mut out = String::new();
    walk(v, "", &mut out);
    out
}
