//! `polysieve`: every experiment pipeline behind one executable. Outputs are
//! CSV or JSON and depend only on the flags, never on scheduling.

mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use polysieve::counting::{
    census, count_e_capped, moments, quartic_poly, RecordStatus, DEFAULT_B_CAP,
};
use polysieve::expsums::{bound_scan, ScanFamily, ScanRanges};
use polysieve::polyfam::IntPoly;
use polysieve::quartic::{
    classify_solution, forward_transform, reconstruct, Classification, QuarticContext,
    QuarticParams, TransformedSolution,
};
use polysieve::sieve::InstanceDoc;

use output::{csv_text, emit, float, json_text};

/// Default seed for the randomised parts of the identity suite.
const DEFAULT_SEED: u64 = 0x5eed_0001;

#[derive(Debug, Parser)]
#[command(
    name = "polysieve",
    version,
    about = "Polynomial sieve, exponential sums and additive energy experiments"
)]
struct Cli {
    /// Output file, written atomically; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, env = "POLYSIEVE_WORKERS")]
    workers: Option<usize>,
    /// Seed for randomised suites.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sieve report for a JSON instance.
    SieveDemo {
        /// Instance document; `-` reads stdin.
        #[arg(long)]
        instance: PathBuf,
    },
    /// Identity suite as CSV; exits nonzero on any mismatch.
    ExpsumVerify {
        #[arg(long, default_value_t = 13)]
        pmax: u64,
        #[command(flatten)]
        ctx: ContextArgs,
    },
    /// Bound-scan rows as CSV.
    BoundsScan {
        /// A family name, or `all`.
        #[arg(long, default_value = "all")]
        family: String,
        #[arg(long, default_value_t = 13)]
        pmax: u64,
        #[arg(long)]
        pk_max: Option<u64>,
        #[arg(long)]
        rho_max: Option<u64>,
        #[arg(long)]
        psi_rho_max: Option<u64>,
        #[command(flatten)]
        ctx: ContextArgs,
    },
    /// Additive energy `E_f(B)`.
    Efb {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long)]
        bmax: u64,
    },
    /// Moments of `r_f(n)` for `n <= N`.
    Moments {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long)]
        n: i128,
    },
    /// N1/N2 classification of every nontrivial solution with entries up to `bmax`.
    Census {
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        a: i64,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        b: i64,
        #[arg(long, default_value_t = 158)]
        bmax: u64,
        #[arg(long = "C", default_value_t = 1)]
        c_bound: u64,
        #[arg(long = "H", default_value_t = 2)]
        h_bound: u64,
    },
    /// Reduced coordinates of one solution as a JSON record.
    Transform {
        /// The quadruple, comma separated.
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        y: Vec<i64>,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        a: i64,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        b: i64,
        #[arg(long = "C", default_value_t = 1)]
        c_bound: u64,
        #[arg(long = "H", default_value_t = 2)]
        h_bound: u64,
    },
}

#[derive(Debug, Args)]
struct ContextArgs {
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    a: i64,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    b: i64,
    #[arg(long, default_value_t = 1)]
    h1: i64,
    #[arg(long, default_value_t = 1)]
    h2: i64,
    #[arg(long, default_value_t = 1)]
    rho: i64,
}

impl ContextArgs {
    fn build(&self) -> Result<QuarticContext> {
        Ok(QuarticContext::new(
            QuarticParams::new(self.a, self.b),
            self.h1,
            self.h2,
            self.rho,
        )?)
    }
}

/// `x^4 + a x^2 + b x`, or any polynomial via `--coeffs` (highest degree first).
#[derive(Debug, Args)]
struct PolyArgs {
    #[arg(
        long,
        default_value_t = 0,
        allow_negative_numbers = true,
        conflicts_with = "coeffs"
    )]
    a: i64,
    #[arg(
        long,
        default_value_t = 0,
        allow_negative_numbers = true,
        conflicts_with = "coeffs"
    )]
    b: i64,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    coeffs: Option<Vec<i128>>,
}

impl PolyArgs {
    fn build(&self) -> Result<IntPoly> {
        match &self.coeffs {
            Some(c) => {
                let f = IntPoly::new(c.clone());
                if f.degree().unwrap_or(0) == 0 {
                    bail!("--coeffs must describe a nonconstant polynomial");
                }
                Ok(f)
            }
            None => Ok(quartic_poly(QuarticParams::new(self.a, self.b))),
        }
    }
}

fn coeff_string(f: &IntPoly) -> String {
    f.coeffs()
        .iter()
        .map(i128::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

/// What a subcommand produced, and whether its checks all passed.
struct Artifact {
    bytes: Vec<u8>,
    passed: bool,
}

impl Artifact {
    fn ok(bytes: Vec<u8>) -> Self {
        Self {
            bytes,
            passed: true,
        }
    }
}

fn sieve_demo(instance: &PathBuf) -> Result<Artifact> {
    let text = if instance.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin())?
    } else {
        std::fs::read_to_string(instance)
            .with_context(|| format!("reading {}", instance.display()))?
    };
    let doc: InstanceDoc = serde_json::from_str(&text).context("parsing the instance document")?;
    let report = doc.build()?.sieve_bound()?;
    let passed = report.lower_bound_holds;
    Ok(Artifact {
        bytes: json_text(&report)?,
        passed,
    })
}

fn expsum_verify(pmax: u64, ctx: &ContextArgs, seed: u64) -> Result<Artifact> {
    let rows = verify::identity_suite(&ctx.build()?, pmax, seed)?;
    let passed = rows.iter().all(verify::IdentityRow::passed);
    let bytes = csv_text(
        &[
            "identity",
            "params",
            "checked",
            "mismatches",
            "max_deviation",
            "status",
        ],
        rows.iter().map(|r| {
            vec![
                r.identity.to_string(),
                r.params.clone(),
                r.checked.to_string(),
                r.mismatches.to_string(),
                float(r.max_deviation),
                if r.passed() { "pass" } else { "fail" }.to_string(),
            ]
        }),
    )?;
    Ok(Artifact { bytes, passed })
}

fn bounds_scan(family: &str, ranges: ScanRanges) -> Result<Artifact> {
    let families = if family == "all" {
        ScanFamily::ALL.to_vec()
    } else {
        vec![family.parse::<ScanFamily>()?]
    };
    let mut rows = Vec::new();
    let mut passed = true;
    for fam in families {
        let report = bound_scan(fam, &ranges)?;
        passed &= report.all_finite();
        rows.extend(report.rows.into_iter().map(|r| {
            vec![
                fam.name().to_string(),
                r.params_string(),
                float(r.value),
                float(r.envelope),
                float(r.ratio),
            ]
        }));
    }
    Ok(Artifact {
        bytes: csv_text(&["family", "params", "value", "envelope", "ratio"], rows)?,
        passed,
    })
}

fn efb(poly: &PolyArgs, bmax: u64) -> Result<Artifact> {
    let f = poly.build()?;
    let e = count_e_capped(&f, bmax, DEFAULT_B_CAP)?;
    let ratio = if bmax == 0 {
        "0".to_string()
    } else {
        float(e as f64 / (bmax as f64 * bmax as f64))
    };
    let row = vec![coeff_string(&f), bmax.to_string(), e.to_string(), ratio];
    Ok(Artifact::ok(csv_text(
        &["coeffs", "bmax", "e", "e_over_b2"],
        [row],
    )?))
}

fn moments_cmd(poly: &PolyArgs, n: i128) -> Result<Artifact> {
    let f = poly.build()?;
    let m = moments(&f, n)?;
    let row = vec![
        coeff_string(&f),
        m.n_max.to_string(),
        m.r.to_string(),
        m.r2.to_string(),
        m.d.to_string(),
        m.estar.to_string(),
        m.ratio.map(float).unwrap_or_default(),
    ];
    Ok(Artifact {
        bytes: csv_text(
            &["coeffs", "n", "r", "r2", "d", "estar", "r2_over_r"],
            [row],
        )?,
        passed: m.identity_holds(),
    })
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn census_cmd(a: i64, b: i64, bmax: u64, c_bound: u64, h_bound: u64) -> Result<Artifact> {
    let c = census(QuarticParams::new(a, b), bmax, c_bound, h_bound)?;
    eprintln!(
        "census a={a} b={b} bmax={bmax} C={c_bound} H={h_bound}: N1={} N2={} degenerate={} noncanonical={}",
        c.n1, c.n2, c.degenerate, c.noncanonical
    );
    let rows = c.records.iter().map(|r| {
        let red = r.reduced;
        let status = match r.status {
            RecordStatus::Transformed => "transformed",
            RecordStatus::EqualDifferences => "equal-differences",
            RecordStatus::NonCanonical => "non-canonical",
        };
        let mut row: Vec<String> = r.y.iter().map(i64::to_string).collect();
        row.push(status.to_string());
        row.extend([
            opt(red.map(|t| t.h1)),
            opt(red.map(|t| t.h2)),
            opt(red.map(|t| t.r)),
            opt(red.map(|t| t.s)),
            opt(red.map(|t| t.rho)),
            opt(red.map(|t| t.sigma)),
            opt(r.class.map(|k| format!("{k:?}"))),
            opt(r.big_a),
        ]);
        row
    });
    let header = [
        "y1", "y2", "y3", "y4", "status", "h1", "h2", "r", "s", "rho", "sigma", "class", "big_a",
    ];
    Ok(Artifact::ok(csv_text(&header, rows)?))
}

#[derive(Serialize)]
struct TransformRecord {
    #[serde(flatten)]
    solution: TransformedSolution,
    /// `r F(r, s)` and `rho G(rho, sigma)`.
    sides: [String; 2],
    reconstructed: [i64; 4],
    c_bound: u64,
    h_bound: u64,
    classification: Classification,
}

fn transform(y: &[i64], a: i64, b: i64, c_bound: u64, h_bound: u64) -> Result<Artifact> {
    let y: [i64; 4] = y.try_into().context("--y takes exactly four entries")?;
    let ts = forward_transform(y, QuarticParams::new(a, b))?;
    let (lhs, rhs) = ts.reduced_sides()?;
    let reconstructed = reconstruct(&ts.reduced)?;
    let classification = classify_solution(&ts, c_bound, h_bound)?;
    let record = TransformRecord {
        solution: ts,
        sides: [lhs.to_string(), rhs.to_string()],
        reconstructed,
        c_bound,
        h_bound,
        classification,
    };
    let passed = lhs == rhs && reconstructed == ts.original;
    Ok(Artifact {
        bytes: json_text(&record)?,
        passed,
    })
}

fn run(cli: &Cli) -> Result<Artifact> {
    match &cli.command {
        Command::SieveDemo { instance } => sieve_demo(instance),
        Command::ExpsumVerify { pmax, ctx } => expsum_verify(*pmax, ctx, cli.seed),
        Command::BoundsScan {
            family,
            pmax,
            pk_max,
            rho_max,
            psi_rho_max,
            ctx,
        } => {
            let mut ranges = ScanRanges::with_pmax(*pmax);
            ranges.ctx = ctx.build()?;
            ranges.pk_max = pk_max.unwrap_or(ranges.pk_max);
            ranges.rho_max = rho_max.unwrap_or(ranges.rho_max);
            ranges.psi_rho_max = psi_rho_max.unwrap_or(ranges.psi_rho_max);
            bounds_scan(family, ranges)
        }
        Command::Efb { poly, bmax } => efb(poly, *bmax),
        Command::Moments { poly, n } => moments_cmd(poly, *n),
        Command::Census {
            a,
            b,
            bmax,
            c_bound,
            h_bound,
        } => census_cmd(*a, *b, *bmax, *c_bound, *h_bound),
        Command::Transform {
            y,
            a,
            b,
            c_bound,
            h_bound,
        } => transform(y, *a, *b, *c_bound, *h_bound),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = (|| {
        if let Some(workers) = cli.workers {
            if workers == 0 {
                bail!("--workers must be positive");
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build_global()?;
        }
        let artifact = run(&cli)?;
        emit(cli.out.as_deref(), &artifact.bytes)?;
        Ok(artifact.passed)
    })();
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("polysieve: checks failed; see the output for details");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("polysieve: {e:#}");
            ExitCode::FAILURE
        }
    }
}
