//! Reproduction of the duality tables: for each `(N, S, B)` the matrix
//! `M_N(S, B)`, the dimension, a prefix of `Λ_N(B)`, and the closed form of
//! the dual transfer operator.

use serde::Serialize;

use crate::duality::{dual_matrix, lambda_set, DualVerdict, SpectralPair};
use crate::error::Result;
use crate::ifs::{hausdorff_dimension, DigitSystem};

/// `(N, S, B)` of every tabulated example.
pub const TABLE_EXAMPLES: [(u32, &[i64], &[i64]); 4] = [
    (4, &[0, 2], &[0, 1]),
    (6, &[0, 3], &[0, 1]),
    (6, &[0, 1], &[0, 3]),
    (6, &[0, 2, 4], &[0, 1, 2]),
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRow {
    pub scale: u32,
    pub p: u32,
    pub digits: Vec<u32>,
    pub dual: Vec<i64>,
    pub matrix: String,
    pub verdict: DualVerdict,
    pub defect: f64,
    pub dimension: f64,
    pub dimension_label: String,
    pub lambda_prefix: Vec<i64>,
    pub transfer: String,
}

/// `4p` elements of `Λ`, as many as tabulated.
fn prefix_len(p: u32) -> usize {
    4 * p as usize
}

pub fn table_row(sys: &DigitSystem, dual: &[i64]) -> Result<TableRow> {
    let pair = dual_matrix(sys, dual)?;
    let lambda_prefix = if pair.is_dual() { lambda_set(&pair, prefix_len(sys.p()))?.prefix } else { Vec::new() };
    Ok(TableRow {
        scale: sys.scale(),
        p: sys.p(),
        digits: sys.digits().to_vec(),
        dual: dual.to_vec(),
        matrix: pair.render_matrix(),
        verdict: pair.verdict,
        defect: pair.defect,
        dimension: hausdorff_dimension(sys),
        dimension_label: dimension_label(sys.scale(), sys.p()),
        lambda_prefix,
        transfer: render_transfer(&pair),
    })
}

pub fn table_rows() -> Result<Vec<TableRow>> {
    TABLE_EXAMPLES
        .iter()
        .map(|(n, s, b)| table_row(&DigitSystem::new(*n, s)?, b))
        .collect()
}

/// `a/b` when `p^b = N^a` for small `a, b`, otherwise `log_N(p)`.
pub fn dimension_label(scale: u32, p: u32) -> String {
    if p == 1 {
        return "0".into();
    }
    for b in 1..=12u32 {
        for a in 1..=b {
            if (p as u128).checked_pow(b) == (scale as u128).checked_pow(a) {
                let g = num_integer::gcd(a, b);
                return if b / g == 1 { format!("{}", a / g) } else { format!("{}/{}", a / g, b / g) };
            }
        }
    }
    format!("log_{scale}({p})")
}

fn frac(num: i64, den: i64) -> (i64, i64) {
    let g = num_integer::gcd(num, den).max(1);
    (num / g, den / g)
}

/// `uπξ/v` with the unit coefficients dropped.
fn pi_xi(u: i64, v: i64) -> String {
    let head = if u == 1 { "πξ".to_string() } else { format!("{u}πξ") };
    if v == 1 { head } else { format!("{head}/{v}") }
}

fn branch_argument(b: i64, n: u32) -> String {
    match b {
        0 => format!("ξ/{n}"),
        b if b > 0 => format!("(ξ−{b})/{n}"),
        b => format!("(ξ+{})/{n}", -b),
    }
}

/// Weight of branch `b`: `(1/p)|m₀((ξ−b)/N)|²`.
pub fn branch_weight(pair: &SpectralPair, b: i64, xi: f64) -> f64 {
    pair.lowpass_modulus_sqr((xi - b as f64) / pair.scale() as f64) / pair.p() as f64
}

/// Closed form of `R_B f`. For `S = {0, a}` the weight of branch `b` is
/// `cos²(πa(ξ−b)/N)`, shown as `sin²` when the phase `πab/N` is an odd
/// multiple of `π/2`; for three digits in arithmetic progression with step
/// `d` it is `W((ξ−b)/N)` with `W(θ) = (1+2cos(2πdθ))²/9`.
pub fn render_transfer(pair: &SpectralPair) -> String {
    let n = pair.scale();
    let digits = pair.system.digits();
    let branches = |weight: &dyn Fn(i64) -> String| -> String {
        pair.dual
            .iter()
            .map(|&b| format!("{} f({})", weight(b), branch_argument(b, n)))
            .collect::<Vec<_>>()
            .join(" + ")
    };
    match digits {
        [0, a] => {
            let (u, v) = frac(*a as i64, n as i64);
            branches(&|b| {
                let (pu, pv) = frac(u * b, v);
                let arg = pi_xi(u, v);
                match pv {
                    1 => format!("cos²({arg})"),
                    2 => format!("sin²({arg})"),
                    _ => format!("cos²({arg} − {pu}π/{pv})"),
                }
            })
        }
        [a0, a1, a2] if a1 - a0 == a2 - a1 && *a0 == 0 => {
            let k = 2 * (a1 - a0);
            let w = branches(&|b| format!("W({})", branch_argument(b, n)));
            format!("{w}, W(θ) = (1+2cos({k}πθ))²/9")
        }
        _ => {
            let w = branches(&|b| format!("W({})", branch_argument(b, n)));
            format!("{w}, W(θ) = |Σ_(a∈S) e^(2πiaθ)|²/{}", pair.p() * pair.p())
        }
    }
}

/// Aligned plain-text rendering of the three tables.
pub fn render_text(rows: &[TableRow]) -> String {
    let mut out = String::new();
    let set = |v: &[i64]| format!("{{{}}}", v.iter().map(i64::to_string).collect::<Vec<_>>().join(","));
    let digits = |r: &TableRow| set(&r.digits.iter().map(|&d| d as i64).collect::<Vec<_>>());
    let mut push_table = |title: &str, header: Vec<&str>, body: Vec<Vec<String>>| {
        let cols = header.len();
        let widths: Vec<usize> = (0..cols)
            .map(|c| body.iter().map(|r| r[c].chars().count()).chain([header[c].chars().count()]).max().unwrap_or(0))
            .collect();
        let line = |cells: Vec<&str>| -> String {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s}{}", " ".repeat(w - s.chars().count())))
                .collect();
            padded.join("  ").trim_end().to_string()
        };
        out.push_str(title);
        out.push('\n');
        out.push_str(&line(header.clone()));
        out.push('\n');
        for r in &body {
            out.push_str(&line(r.iter().map(String::as_str).collect()));
            out.push('\n');
        }
        out.push('\n');
    };
    push_table(
        "Table 1: dual pairs",
        vec!["N", "p", "S", "B", "M_N(S,B)", "dimension", "value"],
        rows.iter()
            .map(|r| {
                vec![
                    r.scale.to_string(),
                    r.p.to_string(),
                    digits(r),
                    set(&r.dual),
                    r.matrix.clone(),
                    r.dimension_label.clone(),
                    format!("{:.15}", r.dimension),
                ]
            })
            .collect(),
    );
    push_table(
        "Table 2: spectra",
        vec!["N", "p", "Λ_N(B)"],
        rows.iter()
            .map(|r| {
                let items: Vec<String> = r.lambda_prefix.iter().map(i64::to_string).collect();
                vec![r.scale.to_string(), r.p.to_string(), format!("{{{},...}}", items.join(","))]
            })
            .collect(),
    );
    push_table(
        "Table 3: dual transfer operators",
        vec!["N", "p", "(R_B f)(ξ)"],
        rows.iter().map(|r| vec![r.scale.to_string(), r.p.to_string(), r.transfer.clone()]).collect(),
    );
    out
}
