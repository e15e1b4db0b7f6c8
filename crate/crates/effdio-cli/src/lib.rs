//! Command-line front-end: constant evaluation, counting series, and the
//! statistical verification runs, with CSV/JSON outputs.
//!
//! Exit codes: 0 = pass, 1 = statistical fail, 2 = usage or domain error.
//! Every randomized subcommand takes an explicit `--seed`; there is no
//! wall-clock default, reruns with identical flags reproduce identical bytes.

use clap::{Args, Parser, Subcommand, ValueEnum};
use effdio::constants::{
    abh_constants, est_constants, m0_constants, prefix_bc_constants, slln_constants, t_delta_exact,
    window_bc_constants, M0Params, OmegaFn, PhiEval, DEFAULT_SEARCH_CAP,
};
use effdio::counting::{count_s_grid, count_s_prime_grid, CountRow, CountSeries, SequenceSpec};
use effdio::numtheory::{euler_phi_sieve, UnitReal};
use effdio::psi::{AggregateCache, ApproxFunction};
use effdio::slln::{simulate_slln, RvFamily, RvSequenceSpec};
use effdio::verify::{
    check_normal, mc_check_abh, mc_check_m0_lacunary, mc_check_m0_separated, mc_check_schmidt,
    GridKind, GridSpec, M0CheckParams, McConfig, NormalSource, ViolationReport,
};
use serde_json::json;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "effdio",
    version,
    about = "Diophantine counting functions, their effective error constants, and seeded statistical verification of the bounds"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate the effective constants for one theorem instance (JSON)
    Constants(ConstantsArgs),
    /// Emit a per-Q counting series with main terms and bounds
    Count(CountArgs),
    /// Monte Carlo verification of an effective bound
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Effective strong-law simulation over sample paths
    Slln(SllnArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// Write to this path instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConstantsArgs {
    /// Which constant bundle to evaluate
    #[arg(long)]
    theorem: TheoremName,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: f64,
    /// psi spec (const:<v> | inv:<c> | capinv:<cap>,<c> | invlog:<c> | table:<path>)
    #[arg(long)]
    psi: Option<String>,
    /// variance constant K for the qbc bundles
    #[arg(long)]
    variance_k: Option<f64>,
    /// uniform bound C on the summands for the qbc bundles
    #[arg(long, default_value_t = 1.0)]
    bound_c: f64,
    /// first mean f_1 for the window bundle
    #[arg(long)]
    f1: Option<f64>,
    /// slope of the linear aggregate Phi(n) = slope * n
    #[arg(long)]
    phi_slope: Option<f64>,
    /// log-power C of the coprime-count bound
    #[arg(long)]
    c: Option<f64>,
    /// user-supplied variance constant for the coprime-count bound (unverified)
    #[arg(long)]
    script_c: Option<f64>,
    /// Fourier-decay coefficient nu (1/pi for Lebesgue measure)
    #[arg(long, default_value_t = std::f64::consts::FRAC_1_PI)]
    nu: f64,
    /// Fourier-decay exponent A (> 2)
    #[arg(long)]
    decay_a: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    growth_b: f64,
    #[arg(long)]
    growth_c: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    k0: Option<f64>,
    /// universal variance bound sigma^2 for the strong law
    #[arg(long)]
    sigma2: Option<f64>,
    /// Phi_0 = max F~_k for the strong law
    #[arg(long)]
    phi0: Option<f64>,
    /// common mean F for the strong law
    #[arg(long)]
    mean_f: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum TheoremName {
    /// effective Schmidt counting constants (K_eps, burn-in)
    Est,
    /// alias of est
    Schmidt,
    /// prefix-variance quantitative Borel-Cantelli bundle (j, N, K)
    Qbc1,
    /// windowed-variance quantitative Borel-Cantelli bundle (r, N, K)
    Qbc2,
    /// coprime-count bundle (k_{C,delta})
    Abh,
    /// M0-set bundle (K', c1..c3, m1, m2, tail cuts)
    M0,
    /// effective strong-law bundle (r, N, K)
    Slln,
}

#[derive(Args)]
struct CountArgs {
    #[arg(long)]
    psi: String,
    /// the point x in [0,1)
    #[arg(long, allow_hyphen_values = true)]
    x: Option<f64>,
    /// exact rational point a/b
    #[arg(long, value_name = "A/B")]
    x_rational: Option<String>,
    #[arg(long)]
    qmax: u64,
    /// which count: s (nearest-integer) or sprime (coprime witness)
    #[arg(long, value_enum, default_value_t = CountKind::S)]
    kind: CountKind,
    /// include effective bounds computed at these parameters
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// also write a gnuplot companion script for the CSV (needs --out)
    #[arg(long)]
    plot_script: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum CountKind {
    S,
    Sprime,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Clone)]
struct GridArgs {
    #[arg(long, value_enum, default_value_t = GridKindArg::Geometric)]
    grid_kind: GridKindArg,
    #[arg(long, default_value_t = 10)]
    grid_start: u64,
    #[arg(long, default_value_t = 24)]
    grid_points: u32,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridKindArg {
    Geometric,
    Linear,
}

impl GridArgs {
    fn build(&self, stop: u64) -> GridSpec {
        GridSpec {
            kind: match self.grid_kind {
                GridKindArg::Geometric => GridKind::Geometric,
                GridKindArg::Linear => GridKind::Linear,
            },
            start: self.grid_start.min(stop),
            stop,
            points: self.grid_points,
        }
    }
}

#[derive(Args)]
struct McArgs {
    #[arg(long)]
    samples: u64,
    /// RNG seed; required, no wall-clock default
    #[arg(long)]
    seed: u64,
    /// cap on worker threads (cannot change results)
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// |S(x,Q) - 2 Psi(Q)| against the effective Schmidt bound
    Schmidt(VerifySchmidtArgs),
    /// |S'(x,Q) - Psi'(Q)| against the coprime-count bound
    Abh(VerifyAbhArgs),
    /// |R(x,N) - 2 Psi(N)| along a lacunary sequence
    Lacunary(VerifyM0Args),
    /// |R(x,N) - 2 Psi(N)| along an alpha-separated sequence
    Separated(VerifyM0Args),
    /// digit counts A(d,b,N) against the normal-number envelope
    Normal(VerifyNormalArgs),
}

#[derive(Args)]
struct VerifySchmidtArgs {
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    psi: String,
    #[arg(long)]
    qmax: u64,
    #[command(flatten)]
    mc: McArgs,
}

#[derive(Args)]
struct VerifyAbhArgs {
    /// log-power C of the bound
    #[arg(long)]
    c: f64,
    #[arg(long)]
    delta: f64,
    /// user-supplied variance constant (flagged unverified in the report)
    #[arg(long)]
    script_c: f64,
    #[arg(long)]
    psi: String,
    #[arg(long)]
    qmax: u64,
    #[command(flatten)]
    mc: McArgs,
}

#[derive(Args)]
struct VerifyM0Args {
    /// sequence: pow2 | geo:<a>,<r> | list:<path>
    #[arg(long)]
    seq: String,
    #[arg(long)]
    psi: String,
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = std::f64::consts::FRAC_1_PI)]
    nu: f64,
    #[arg(long)]
    decay_a: f64,
    /// lacunary constant K0 (pow2 declares 2 by itself)
    #[arg(long)]
    k0: Option<f64>,
    /// growth constants: log q_n > growth_c * n^(1/growth_b)
    #[arg(long)]
    growth_c: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    growth_b: f64,
    /// separation exponent alpha (separated form only)
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    nmax: u64,
    #[command(flatten)]
    mc: McArgs,
}

#[derive(Args)]
struct VerifyNormalArgs {
    #[arg(long)]
    digit: u64,
    #[arg(long)]
    base: u64,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    nmax: u64,
    /// check one explicit point instead of sampling
    #[arg(long)]
    x: Option<f64>,
    /// explicit rational point a/b
    #[arg(long, value_name = "A/B")]
    x_rational: Option<String>,
    #[command(flatten)]
    mc: McArgs,
}

#[derive(Args)]
struct SllnArgs {
    /// family, repeatable for a periodic schedule:
    /// bernoulli:<p> | uniform:<lo>,<hi> | table:<v>@<p>,...
    #[arg(long, required = true)]
    family: Vec<String>,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    nmax: u64,
    /// number of simulated paths
    #[arg(long)]
    paths: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    output: OutputArgs,
}

/// Parses argv and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn dispatch(cli: Cli) -> effdio::Result<i32> {
    match cli.cmd {
        Cmd::Constants(a) => run_constants(a),
        Cmd::Count(a) => run_count(a),
        Cmd::Verify(v) => {
            let (report, out) = match v {
                VerifyCmd::Schmidt(a) => run_verify_schmidt(a)?,
                VerifyCmd::Abh(a) => run_verify_abh(a)?,
                VerifyCmd::Lacunary(a) => run_verify_m0(a, false)?,
                VerifyCmd::Separated(a) => run_verify_m0(a, true)?,
                VerifyCmd::Normal(a) => run_verify_normal(a)?,
            };
            write_output(&out, &report.to_json())?;
            Ok(report.exit_code())
        }
        Cmd::Slln(a) => run_slln(a),
    }
}

fn write_output(path: &Option<PathBuf>, content: &str) -> effdio::Result<()> {
    match path {
        Some(p) => std::fs::write(p, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn need<T: Copy>(v: Option<T>, flag: &str) -> effdio::Result<T> {
    v.ok_or_else(|| effdio::Error::Usage(format!("missing required flag --{flag}")))
}

fn parse_rational(s: &str) -> effdio::Result<UnitReal> {
    let (a, b) = s
        .split_once('/')
        .ok_or_else(|| effdio::Error::Usage(format!("expected A/B, got `{s}`")))?;
    let a: u64 = a
        .trim()
        .parse()
        .map_err(|_| effdio::Error::Usage(format!("bad numerator `{a}`")))?;
    let b: u64 = b
        .trim()
        .parse()
        .map_err(|_| effdio::Error::Usage(format!("bad denominator `{b}`")))?;
    UnitReal::rational(a, b)
}

fn parse_point(x: Option<f64>, rational: &Option<String>) -> effdio::Result<UnitReal> {
    match (x, rational) {
        (Some(_), Some(_)) => Err(effdio::Error::Usage(
            "give either --x or --x-rational, not both".into(),
        )),
        (Some(v), None) => UnitReal::from_f64(v),
        (None, Some(r)) => parse_rational(r),
        (None, None) => Err(effdio::Error::Usage("missing --x or --x-rational".into())),
    }
}

fn parse_seq(spec: &str) -> effdio::Result<SequenceSpec> {
    if spec == "pow2" {
        return Ok(SequenceSpec::powers_of_two());
    }
    if let Some(rest) = spec.strip_prefix("geo:") {
        let (a, r) = rest
            .split_once(',')
            .ok_or_else(|| effdio::Error::Usage("geo needs geo:<a>,<r>".into()))?;
        let a: f64 = a
            .trim()
            .parse()
            .map_err(|_| effdio::Error::Usage(format!("bad geo a `{a}`")))?;
        let r: f64 = r
            .trim()
            .parse()
            .map_err(|_| effdio::Error::Usage(format!("bad geo r `{r}`")))?;
        return SequenceSpec::geometric(a, r);
    }
    if let Some(path) = spec.strip_prefix("list:") {
        let text = std::fs::read_to_string(path)?;
        let mut terms = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            terms.push(line.parse().map_err(|_| {
                effdio::Error::Usage(format!("bad sequence term on line {}: `{line}`", i + 1))
            })?);
        }
        return SequenceSpec::explicit(terms);
    }
    Err(effdio::Error::Usage(format!(
        "unknown sequence `{spec}` (expected pow2 | geo:<a>,<r> | list:<path>)"
    )))
}

fn parse_family(spec: &str) -> effdio::Result<RvFamily> {
    if let Some(p) = spec.strip_prefix("bernoulli:") {
        let p: f64 = p
            .parse()
            .map_err(|_| effdio::Error::Usage(format!("bad bernoulli p `{p}`")))?;
        return Ok(RvFamily::Bernoulli { p });
    }
    if let Some(rest) = spec.strip_prefix("uniform:") {
        let (lo, hi) = rest
            .split_once(',')
            .ok_or_else(|| effdio::Error::Usage("uniform needs uniform:<lo>,<hi>".into()))?;
        let lo = lo
            .trim()
            .parse()
            .map_err(|_| effdio::Error::Usage(format!("bad uniform lo `{lo}`")))?;
        let hi = hi
            .trim()
            .parse()
            .map_err(|_| effdio::Error::Usage(format!("bad uniform hi `{hi}`")))?;
        return Ok(RvFamily::DiscreteUniform { lo, hi });
    }
    if let Some(rest) = spec.strip_prefix("table:") {
        let mut values = Vec::new();
        let mut probs = Vec::new();
        for part in rest.split(',') {
            let (v, p) = part
                .split_once('@')
                .ok_or_else(|| effdio::Error::Usage("table entries are <value>@<prob>".into()))?;
            values.push(
                v.trim()
                    .parse()
                    .map_err(|_| effdio::Error::Usage(format!("bad table value `{v}`")))?,
            );
            probs.push(
                p.trim()
                    .parse()
                    .map_err(|_| effdio::Error::Usage(format!("bad table prob `{p}`")))?,
            );
        }
        return Ok(RvFamily::Table { values, probs });
    }
    Err(effdio::Error::Usage(format!(
        "unknown family `{spec}` (expected bernoulli:<p> | uniform:<lo>,<hi> | table:<v>@<p>,...)"
    )))
}

#[derive(serde::Serialize)]
struct ConstantsReport {
    theorem: &'static str,
    inputs: serde_json::Value,
    outputs: serde_json::Value,
    warnings: Vec<String>,
}

fn constants_json(
    theorem: &'static str,
    inputs: serde_json::Value,
    outputs: serde_json::Value,
    warnings: Vec<String>,
) -> String {
    let mut s = serde_json::to_string_pretty(&ConstantsReport {
        theorem,
        inputs,
        outputs,
        warnings,
    })
    .expect("constants serialization");
    s.push('\n');
    s
}

fn run_constants(a: ConstantsArgs) -> effdio::Result<i32> {
    let text = match a.theorem {
        TheoremName::Est | TheoremName::Schmidt => {
            let eps = need(a.eps, "eps")?;
            let psi_spec = a
                .psi
                .as_deref()
                .ok_or_else(|| effdio::Error::Usage("missing required flag --psi".into()))?;
            let agg = AggregateCache::new(ApproxFunction::parse(psi_spec)?);
            let c = est_constants(eps, a.delta, &agg, DEFAULT_SEARCH_CAP)?;
            let warnings = c.warnings.clone();
            constants_json(
                "schmidt-count",
                json!({"eps": eps, "delta": a.delta, "psi": psi_spec}),
                serde_json::to_value(&c).expect("serialize"),
                warnings,
            )
        }
        TheoremName::Qbc1 => {
            let eps = need(a.eps, "eps")?;
            let k = need(a.variance_k, "variance-k")?;
            let slope = need(a.phi_slope, "phi-slope")?;
            let c = prefix_bc_constants(eps, a.delta, k, a.bound_c, &PhiEval::Linear { slope })?;
            let warnings = c.warnings.clone();
            constants_json(
                "qbc-prefix",
                json!({"eps": eps, "delta": a.delta, "variance_k": k, "bound_c": a.bound_c, "phi_slope": slope}),
                serde_json::to_value(&c).expect("serialize"),
                warnings,
            )
        }
        TheoremName::Qbc2 => {
            let eps = need(a.eps, "eps")?;
            let k = need(a.variance_k, "variance-k")?;
            let f1 = need(a.f1, "f1")?;
            let slope = need(a.phi_slope, "phi-slope")?;
            let c =
                window_bc_constants(eps, a.delta, k, a.bound_c, f1, &PhiEval::Linear { slope })?;
            let warnings = c.warnings.clone();
            constants_json(
                "qbc-window",
                json!({"eps": eps, "delta": a.delta, "variance_k": k, "bound_c": a.bound_c, "f1": f1, "phi_slope": slope}),
                serde_json::to_value(&c).expect("serialize"),
                warnings,
            )
        }
        TheoremName::Abh => {
            let c_pow = need(a.c, "c")?;
            let script_c = need(a.script_c, "script-c")?;
            let c = abh_constants(c_pow, a.delta, script_c)?;
            let warnings = c.warnings.clone();
            constants_json(
                "coprime-count",
                json!({"C": c_pow, "delta": a.delta, "script_c": script_c}),
                serde_json::to_value(&c).expect("serialize"),
                warnings,
            )
        }
        TheoremName::M0 => {
            let p = M0Params {
                nu: a.nu,
                decay_a: need(a.decay_a, "decay-a")?,
                growth_b: a.growth_b,
                growth_c: need(a.growth_c, "growth-c")?,
                alpha: need(a.alpha, "alpha")?,
                k0: need(a.k0, "k0")?,
                delta: a.delta,
            };
            let c = m0_constants(&p)?;
            let lac_tail = t_delta_exact(
                &OmegaFn::PowerLaw {
                    coef: 3.0,
                    exponent: p.decay_a / p.growth_b,
                },
                p.nu,
                p.decay_a,
                p.growth_b,
                p.growth_c,
                p.delta,
            )?;
            let sep_tail = t_delta_exact(
                &OmegaFn::PowerLaw {
                    coef: 1.0,
                    exponent: 9.0,
                },
                p.nu,
                p.decay_a,
                p.growth_b,
                p.growth_c,
                p.delta,
            )?;
            let warnings = c.warnings.clone();
            constants_json(
                "m0-bundle",
                serde_json::to_value(p).expect("serialize"),
                json!({
                    "constants": serde_json::to_value(&c).expect("serialize"),
                    "tail_cut_lacunary": serde_json::to_value(&lac_tail).expect("serialize"),
                    "tail_cut_separated": serde_json::to_value(&sep_tail).expect("serialize"),
                }),
                warnings,
            )
        }
        TheoremName::Slln => {
            let eps = need(a.eps, "eps")?;
            let sigma2 = need(a.sigma2, "sigma2")?;
            let phi0 = need(a.phi0, "phi0")?;
            let mean_f = need(a.mean_f, "mean-f")?;
            let c = slln_constants(eps, a.delta, sigma2, phi0, mean_f)?;
            let warnings = c.warnings.clone();
            constants_json(
                "strong-law",
                json!({"eps": eps, "delta": a.delta, "sigma2": sigma2, "phi0": phi0, "mean_f": mean_f}),
                serde_json::to_value(&c).expect("serialize"),
                warnings,
            )
        }
    };
    write_output(&a.output.out, &text)?;
    Ok(0)
}

fn run_count(a: CountArgs) -> effdio::Result<i32> {
    if a.qmax == 0 {
        return Err(effdio::Error::Usage("qmax must be at least 1".into()));
    }
    let x = parse_point(a.x, &a.x_rational)?;
    let psi = ApproxFunction::parse(&a.psi)?;
    let agg = AggregateCache::new(psi.clone());
    let grid: Vec<u64> = (1..=a.qmax).collect();

    let (counts, mains): (Vec<u64>, Vec<f64>) = match a.kind {
        CountKind::S => {
            let counts = count_s_grid(&x, &grid, &psi)?;
            let mains = grid
                .iter()
                .map(|&q| agg.psi_sum(q).map(|s| 2.0 * s))
                .collect::<effdio::Result<Vec<_>>>()?;
            (counts, mains)
        }
        CountKind::Sprime => {
            let counts = count_s_prime_grid(&x, &grid, &psi)?;
            let table = euler_phi_sieve(a.qmax)?;
            let mains = grid
                .iter()
                .map(|&q| agg.psi_prime_sum(q, &table))
                .collect::<effdio::Result<Vec<_>>>()?;
            (counts, mains)
        }
    };

    let bounds: Vec<f64> = match (a.eps, a.delta, a.kind) {
        (Some(eps), Some(delta), CountKind::S) => {
            let c = est_constants(eps, delta, &agg, DEFAULT_SEARCH_CAP)?;
            grid.iter()
                .map(|&q| agg.psi_sum(q).map(|s| c.bound(s)))
                .collect::<effdio::Result<Vec<_>>>()?
        }
        (None, None, _) => vec![f64::INFINITY; grid.len()],
        _ => {
            return Err(effdio::Error::Usage(
                "bounds need both --eps and --delta (S kind only)".into(),
            ))
        }
    };

    let series = CountSeries {
        rows: grid
            .iter()
            .enumerate()
            .map(|(i, &q)| CountRow {
                q,
                count: counts[i],
                main_term: mains[i],
                bound: bounds[i],
                violated: (counts[i] as f64 - mains[i]).abs() > bounds[i],
            })
            .collect(),
    };
    emit_series(&series, &a.output.out, a.format)?;
    if let Some(script) = &a.plot_script {
        let csv = match (&a.output.out, a.format) {
            (Some(p), Format::Csv) => p,
            _ => {
                return Err(effdio::Error::Usage(
                    "--plot-script needs --out with csv format".into(),
                ))
            }
        };
        std::fs::write(
            script,
            format!(
                "set datafile separator ','\n\
                 set key autotitle columnhead\n\
                 set logscale xy\n\
                 set xlabel 'Q'\n\
                 plot '{}' using 1:2 with lines title 'count', \\\n\
                 \x20    '' using 1:3 with lines title 'main term', \\\n\
                 \x20    '' using 1:4 with lines title 'bound'\n",
                csv.display()
            ),
        )?;
    }
    Ok(0)
}

/// Writes a series as bit-stable CSV or JSON; refuses empty series.
fn emit_series(series: &CountSeries, path: &Option<PathBuf>, format: Format) -> effdio::Result<()> {
    if series.rows.is_empty() {
        return Err(effdio::Error::Usage(
            "refusing to emit an empty series".into(),
        ));
    }
    let text = match format {
        Format::Csv => series.to_csv(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&series.rows).expect("series serialization");
            s.push('\n');
            s
        }
    };
    write_output(path, &text)
}

fn run_verify_schmidt(a: VerifySchmidtArgs) -> effdio::Result<(ViolationReport, Option<PathBuf>)> {
    let agg = AggregateCache::new(ApproxFunction::parse(&a.psi)?);
    let cfg = McConfig {
        samples: a.mc.samples,
        seed: a.mc.seed,
        grid: a.mc.grid.build(a.qmax),
        threads: a.mc.threads,
    };
    Ok((
        mc_check_schmidt(&agg, a.eps, a.delta, &cfg)?,
        a.mc.output.out,
    ))
}

fn run_verify_abh(a: VerifyAbhArgs) -> effdio::Result<(ViolationReport, Option<PathBuf>)> {
    let agg = AggregateCache::new(ApproxFunction::parse(&a.psi)?);
    let table = euler_phi_sieve(a.qmax)?;
    let cfg = McConfig {
        samples: a.mc.samples,
        seed: a.mc.seed,
        grid: a.mc.grid.build(a.qmax),
        threads: a.mc.threads,
    };
    Ok((
        mc_check_abh(&agg, a.c, a.delta, a.script_c, &table, &cfg)?,
        a.mc.output.out,
    ))
}

fn run_verify_m0(
    a: VerifyM0Args,
    separated: bool,
) -> effdio::Result<(ViolationReport, Option<PathBuf>)> {
    let mut seq = parse_seq(&a.seq)?;
    if let Some(k0) = a.k0 {
        seq = seq.with_lacunary(k0);
    }
    if let Some(c) = a.growth_c {
        seq = seq.with_growth(c, a.growth_b);
    }
    if separated {
        let alpha = need(a.alpha, "alpha")?;
        seq = seq.with_separation(alpha, 1);
    }
    let psi = ApproxFunction::parse(&a.psi)?;
    let params = M0CheckParams {
        gamma: a.gamma,
        nu: a.nu,
        decay_a: a.decay_a,
        eps: a.eps,
        delta: a.delta,
    };
    let cfg = McConfig {
        samples: a.mc.samples,
        seed: a.mc.seed,
        grid: a.mc.grid.build(a.nmax),
        threads: a.mc.threads,
    };
    let report = if separated {
        mc_check_m0_separated(&seq, &psi, &params, &cfg)?
    } else {
        mc_check_m0_lacunary(&seq, &psi, &params, &cfg)?
    };
    Ok((report, a.mc.output.out))
}

fn run_verify_normal(a: VerifyNormalArgs) -> effdio::Result<(ViolationReport, Option<PathBuf>)> {
    let source = if a.x.is_some() || a.x_rational.is_some() {
        NormalSource::Explicit(parse_point(a.x, &a.x_rational)?)
    } else {
        NormalSource::Sampled
    };
    let cfg = McConfig {
        samples: a.mc.samples,
        seed: a.mc.seed,
        grid: a.mc.grid.build(a.nmax),
        threads: a.mc.threads,
    };
    Ok((
        check_normal(&source, a.digit, a.base, a.eps, a.delta, &cfg)?,
        a.mc.output.out,
    ))
}

fn run_slln(a: SllnArgs) -> effdio::Result<i32> {
    let families = a
        .family
        .iter()
        .map(|s| parse_family(s))
        .collect::<effdio::Result<Vec<_>>>()?;
    let spec = if families.len() == 1 {
        RvSequenceSpec::iid(families.into_iter().next().unwrap())?
    } else {
        RvSequenceSpec::schedule(families)?
    };
    let cfg = McConfig {
        samples: a.paths,
        seed: a.seed,
        grid: a.grid.build(a.nmax),
        threads: a.threads,
    };
    let report = simulate_slln(&spec, a.eps, a.delta, &cfg)?;
    write_output(&a.output.out, &report.to_json())?;
    Ok(report.exit_code())
}
