//! `fractalmra`: command-line experiments on Cantor-type multiresolutions.

mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use fractalmra::duality::{b_cycles, dual_matrix, exponential_gram, find_orthogonal_triple, lambda_set, onb_defect};
use fractalmra::filterbank::{build_bank, unitarity_defect, DEFAULT_SAMPLES, UNITARITY_TOL};
use fractalmra::ifs::{hausdorff_dimension, DEFAULT_PRODUCT_DEPTH};
use fractalmra::lattice::{cascade_experiment, cascade_transfer_prediction, gram_section, representation_limit, wavelet_generators};
use fractalmra::measure::{
    classify_support_with, find_cycles, moment_table_with, riesz_samples, wiener_profile,
    CYCLE_TOL, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use fractalmra::tables::{render_text, table_rows};
use fractalmra::transfer::spectral_block;
use fractalmra::{DigitSystem, LaurentPolynomial, Scalar, Surd, TransferOperator};

use output::*;

/// Experiments on affine Cantor-type fractals: filters, transfer operators,
/// invariant measures, spectral duality and the lattice model of L²(ℛ, ℋˢ).
///
/// Exit status: 0 success, 2 precondition failure or invalid digits,
/// 3 cap exceeded or integer overflow, 64 unknown subcommand.
/// FRACTALMRA_THREADS (integer >= 1) caps the worker pool.
#[derive(Debug, Parser)]
#[command(name = "fractalmra", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Scale N of the digit system.
    #[arg(long, global = true, default_value_t = 3)]
    scale: u32,
    /// Digit set S ⊆ {0..N-1}, comma separated.
    #[arg(long, global = true, value_delimiter = ',', default_value = "0,2")]
    digits: Vec<i64>,
    /// Low-pass filter: canonical, neg (−m₀), z<k> (zᵏm₀; z3 is z³m₀).
    #[arg(long, global = true, default_value = "canonical")]
    modifier: String,
    /// Explicit filter taps `k:c,...`; c is rational, a+b√q, or a decimal. Overrides --modifier.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    taps: Option<Vec<String>>,
    /// Numerical tolerance (defaults depend on the subcommand).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for sampled quantities.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Similarity dimension log p / log N.
    Dimension,
    /// Canonical filter bank and its unitarity defect.
    Filters {
        /// Roots of unity sampled by the polyphase check.
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
    },
    /// Transfer operator restricted to its invariant block.
    Spectrum,
    /// Moments of the invariant measure and Wiener averages.
    Moments {
        /// Moments ν̂(n) for |n| <= range.
        #[arg(long, default_value_t = 256)]
        range: i64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: u32,
        /// Last index of the Wiener profile (defaults to range).
        #[arg(long)]
        wiener: Option<i64>,
    },
    /// (m₀, N)-cycles of θ ↦ Nθ on which |m₀|² = N.
    Cycles {
        #[arg(long, default_value_t = 12)]
        max_length: u32,
    },
    /// Full support or atomic-on-cycles classification.
    Classify {
        #[arg(long, default_value_t = 12)]
        max_length: u32,
        #[arg(long, default_value_t = 32)]
        range: i64,
    },
    /// Duality matrix, spectrum prefix and B-cycles.
    Duality {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        dual: Vec<i64>,
        #[arg(long, default_value_t = 8)]
        count: usize,
        /// Longest B-word examined for cycles.
        #[arg(long, default_value_t = 8)]
        max_length: u32,
    },
    /// Gram of exponentials and Parseval partial sums.
    OnbCheck {
        /// Dual digit set; its spectrum supplies the exponentials.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        dual: Option<Vec<i64>>,
        /// Explicit exponents instead of the spectrum.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        exponents: Option<Vec<i64>>,
        #[arg(long, default_value_t = 8)]
        count: usize,
        /// Factors kept in the infinite product.
        #[arg(long, default_value_t = DEFAULT_PRODUCT_DEPTH)]
        depth: u32,
        /// Seeded points ξ ∈ [−1, 1] for the partial sums.
        #[arg(long, default_value_t = 4)]
        samples: usize,
    },
    /// Cascade φ, Mφ, M²φ, … with M = U⁻¹m(T).
    Cascade {
        #[arg(long, default_value_t = 8)]
        steps: u32,
    },
    /// Samples of the Riesz product (1/2π)Π(1 + cos(2·3ᵏt)).
    Riesz {
        #[arg(long, default_value_t = 6)]
        n: u32,
        #[arg(long, default_value_t = 729)]
        grid: usize,
    },
    /// Gram section of {U⁻ʲTᵏψᵢ}.
    Gram {
        /// |j| <= max-scale.
        #[arg(long, default_value_t = 2)]
        max_scale: i32,
        /// |k| <= max-translate.
        #[arg(long, default_value_t = 5)]
        max_translate: i64,
    },
    /// The duality tables.
    Table,
    /// ⟨v|Tᵐv⟩ for v = m₀⁽ⁿ⁾(T)φ against ν̂(m).
    Replimit {
        #[arg(long, default_value_t = 8)]
        n: u32,
        #[arg(long, default_value_t = 10)]
        range: i64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                ErrorKind::InvalidSubcommand => 64,
                _ => 2,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if let Some(lib) = e.downcast_ref::<fractalmra::Error>() {
        return lib.exit_code() as u8;
    }
    if e.downcast_ref::<std::io::Error>().is_some() {
        return 1;
    }
    2
}

fn init_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("FRACTALMRA_THREADS") else { return Ok(()) };
    let n: usize = raw.trim().parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
        fractalmra::Error::Precondition(format!("FRACTALMRA_THREADS must be an integer >= 1, got {raw:?}"))
    })?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("worker pool")?;
    Ok(())
}

fn parse_coefficient(s: &str) -> anyhow::Result<Scalar> {
    let s = s.trim().replace("sqrt", "√");
    if let Ok(surd) = s.parse::<Surd>() {
        return Ok(Scalar::Exact(surd));
    }
    let x: f64 = s
        .parse()
        .map_err(|_| fractalmra::Error::Parse(format!("bad filter coefficient {s:?}")))?;
    Ok(Scalar::real(x))
}

fn parse_taps(taps: &[String]) -> anyhow::Result<LaurentPolynomial> {
    let terms = taps
        .iter()
        .map(|t| {
            let (k, c) = t
                .split_once(':')
                .ok_or_else(|| fractalmra::Error::Parse(format!("tap {t:?} is not k:c")))?;
            let k: i64 = k.trim().parse().map_err(|_| fractalmra::Error::Parse(format!("bad exponent in {t:?}")))?;
            Ok((k, parse_coefficient(c)?))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(LaurentPolynomial::from_terms(terms))
}

fn lowpass(sys: &DigitSystem, common: &Common) -> anyhow::Result<LaurentPolynomial> {
    if let Some(taps) = &common.taps {
        return parse_taps(taps);
    }
    let m0 = sys.lowpass();
    Ok(match common.modifier.as_str() {
        "canonical" => m0,
        "neg" => m0.scale(&Scalar::from_int(-1)),
        z if z.starts_with('z') => {
            let k: i64 = z[1..]
                .parse()
                .map_err(|_| fractalmra::Error::Parse(format!("unknown modifier {z:?}")))?;
            m0.shift(k)
        }
        other => bail!(fractalmra::Error::Parse(format!("unknown modifier {other:?}"))),
    })
}

fn run(cli: Cli) -> anyhow::Result<()> {
    init_threads()?;
    let common = &cli.common;
    let sys = DigitSystem::new(common.scale, &common.digits)?;
    let artifact = match &cli.command {
        Command::Dimension => Artifact::json(&DimensionOut { dimension: hausdorff_dimension(&sys) }),
        Command::Filters { samples } => {
            let bank = build_bank(&sys);
            let defect = unitarity_defect(&bank, *samples);
            Artifact::json(&FiltersOut {
                system: SystemOut::of(&sys),
                filters: bank.filters().iter().map(terms_of).collect(),
                defect: defect.value,
                exact: defect.exact,
                passes: defect.passes(common.tol.unwrap_or(UNITARITY_TOL)),
            })
        }
        Command::Spectrum => {
            let op = TransferOperator::from_filter(&lowpass(&sys, common)?, sys.scale())?;
            let block = spectral_block(&op)?;
            Artifact::json(&SpectrumOut {
                system: SystemOut::of(&sys),
                weight: terms_of(op.weight()),
                half_width: block.half_width,
                dimension: block.dimension(),
                eigenvalues: block.eigenvalues.iter().map(|z| [z.re, z.im]).collect(),
                unit_multiplicity: block.unit_multiplicity,
                exact_fixed_dimension: block.exact_fixed_dimension,
                other_peripheral: block.other_peripheral.iter().map(|z| [z.re, z.im]).collect(),
                constant_fixed: block.constant_fixed,
                perron_frobenius: block.has_perron_frobenius_spectrum(),
            })
        }
        Command::Moments { range, max_iter, wiener } => {
            let op = TransferOperator::from_filter(&lowpass(&sys, common)?, sys.scale())?;
            let table = moment_table_with(&op, *range, *max_iter, common.tol.unwrap_or(DEFAULT_TOL))?;
            let profile = wiener_profile(&table, wiener.unwrap_or(*range).min(*range))?;
            let out = MomentsOut::new(&sys, &table, &profile);
            match common.format {
                Format::Csv => Ok(Artifact::Text(moments_csv(&out))),
                _ => Artifact::json(&out),
            }
        }
        Command::Cycles { max_length } => {
            let m0 = lowpass(&sys, common)?;
            let report = find_cycles(&m0, sys.scale(), *max_length, common.tol.unwrap_or(CYCLE_TOL))?;
            Artifact::json(&CyclesOut::new(&sys, &report))
        }
        Command::Classify { max_length, range } => {
            let m0 = lowpass(&sys, common)?;
            let c = classify_support_with(&m0, sys.scale(), *max_length, *range)?;
            Artifact::json(&classify_out(&sys, &c))
        }
        Command::Duality { dual, count, max_length } => {
            let pair = dual_matrix(&sys, dual)?;
            let (lambda, cycles) = if pair.is_dual() {
                let tol = common.tol.unwrap_or(CYCLE_TOL);
                (Some(lambda_set(&pair, *count)?.prefix), Some(BCyclesOut::new(&b_cycles(&pair, *max_length, tol)?)))
            } else {
                (None, None)
            };
            Artifact::json(&DualityOut {
                system: SystemOut::of(&sys),
                dual: dual.clone(),
                matrix: pair.render_matrix(),
                defect: pair.defect,
                exact: pair.exact,
                verdict: pair.verdict,
                lambda_prefix: lambda,
                b_cycles: cycles,
            })
        }
        Command::OnbCheck { dual, exponents, count, depth, samples } => {
            onb_check(&sys, common, dual.as_deref(), exponents.as_deref(), *count, *depth, *samples)
        }
        Command::Cascade { steps } => {
            let m = lowpass(&sys, common)?;
            let rows = cascade_experiment(&sys, &m, *steps)?;
            let predicted = cascade_transfer_prediction(&sys, &m, *steps)?;
            let out = CascadeOut::new(&sys, &m, &rows, &predicted);
            match common.format {
                Format::Csv => Ok(Artifact::Text(cascade_csv(&out))),
                _ => Artifact::json(&out),
            }
        }
        Command::Riesz { n, grid } => {
            let samples = riesz_samples(*n, *grid)?;
            match common.format {
                Format::Csv => Ok(Artifact::Text(riesz_csv(&samples))),
                _ => Artifact::json(&RieszOut {
                    n: *n,
                    grid: *grid,
                    samples: samples.iter().map(|&(t, value)| RieszSample { t, value }).collect(),
                }),
            }
        }
        Command::Gram { max_scale, max_translate } => {
            let gens = wavelet_generators(&sys);
            let g = gram_section(&sys, &gens, -max_scale..=*max_scale, -max_translate..=*max_translate)?;
            Artifact::json(&GramOut::new(&sys, gens.len(), *max_scale, *max_translate, &g))
        }
        Command::Table => {
            let rows = table_rows()?;
            match common.format {
                Format::Text => Ok(Artifact::Text(render_text(&rows))),
                _ => Artifact::json(&TableOut { rows }),
            }
        }
        Command::Replimit { n, range } => {
            let m0 = lowpass(&sys, common)?;
            let op = TransferOperator::from_filter(&m0, sys.scale())?;
            let table = moment_table_with(&op, *range, DEFAULT_MAX_ITER, common.tol.unwrap_or(DEFAULT_TOL))?;
            let rows = (-*range..=*range)
                .map(|m| {
                    let limit = representation_limit(&sys, &m0, *n, m)?;
                    let moment = table.get(m)?.clone();
                    Ok(ReplimitRow::new(m, &limit, &moment))
                })
                .collect::<fractalmra::Result<Vec<_>>>()?;
            Artifact::json(&ReplimitOut { system: SystemOut::of(&sys), n: *n, rows })
        }
    };
    emit(artifact?, common)
}

fn onb_check(
    sys: &DigitSystem,
    common: &Common,
    dual: Option<&[i64]>,
    exponents: Option<&[i64]>,
    count: usize,
    depth: u32,
    samples: usize,
) -> anyhow::Result<Artifact> {
    let pair = dual.map(|b| dual_matrix(sys, b)).transpose()?;
    let exps = match (exponents, &pair) {
        (Some(e), _) => e.to_vec(),
        (None, Some(pair)) => lambda_set(pair, count)?.prefix,
        (None, None) => bail!(fractalmra::Error::Precondition("onb-check needs --dual or --exponents".into())),
    };
    let gram = exponential_gram(sys, &exps, depth);
    let deviation = (0..gram.nrows())
        .flat_map(|i| (0..gram.ncols()).map(move |j| (i, j)))
        .map(|(i, j)| (gram[(i, j)] - if i == j { 1.0 } else { 0.0 }).norm())
        .fold(0.0, f64::max);
    let tol = common.tol.unwrap_or(1e-6);
    let triple = find_orthogonal_triple(&gram, tol).map(|(a, b, c)| [exps[a], exps[b], exps[c]]);
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let parseval = match &pair {
        Some(pair) if pair.is_dual() => (0..samples)
            .map(|_| {
                let xi: f64 = rng.random_range(-1.0..=1.0);
                let sums = onb_defect(pair, xi, count, depth)?;
                Ok(ParsevalOut::new(xi, sums))
            })
            .collect::<fractalmra::Result<Vec<_>>>()?,
        _ => Vec::new(),
    };
    Artifact::json(&OnbOut {
        system: SystemOut::of(sys),
        exponents: exps,
        depth,
        gram: (0..gram.nrows()).map(|i| (0..gram.ncols()).map(|j| [gram[(i, j)].re, gram[(i, j)].im]).collect()).collect(),
        max_identity_deviation: deviation,
        orthogonal_triple: triple,
        parseval,
    })
}

enum Artifact {
    Json(serde_json::Value),
    Text(String),
}

impl Artifact {
    fn json<T: Serialize>(v: &T) -> anyhow::Result<Artifact> {
        Ok(Artifact::Json(serde_json::to_value(v)?))
    }
}

fn emit(artifact: Artifact, common: &Common) -> anyhow::Result<()> {
    let body = match (artifact, common.format) {
        (Artifact::Text(s), _) => s,
        (Artifact::Json(v), Format::Json) => format!("{}\n", serde_json::to_string_pretty(&v)?),
        (Artifact::Json(v), Format::Text) => flatten_text(&v),
        (Artifact::Json(_), Format::Csv) => {
            bail!(fractalmra::Error::Precondition("csv output is available for riesz, moments and cascade".into()))
        }
    };
    match &common.output {
        Some(path) => std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().lock().write_all(body.as_bytes())?,
    }
    Ok(())
}
