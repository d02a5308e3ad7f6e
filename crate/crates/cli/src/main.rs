use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::Serialize;

use spectral_riesz::bounds::{self, GridSpec, ScanReport, Variable, VerifyOptions};
use spectral_riesz::exact::{format_f64, format_rational, parse_rational, rat_from_f64, rat_to_f64};
use spectral_riesz::riesz::{self, Quantity, Spectrum, SpectrumQuery, Variant, DEFAULT_LEVEL_CAP};
use spectral_riesz::scan::{self, GridPolicy, Series};
use spectral_riesz::weyl::{expansion, weyl_term};
use spectral_riesz::{acceptance, sumrules, Family, Space};

#[derive(Parser)]
#[command(
    name = "spectral-riesz",
    version,
    about = "Spectral sums, Weyl bounds and sum rules on spheres and rank-one symmetric spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Energy levels with eigenvalues and multiplicities.
    Levels(LevelsArgs),
    /// Evaluate N, R1, R2 or eigenvalue averages, by brute force and in closed form.
    Eval(EvalArgs),
    /// Check catalog bounds on a grid. Exit code 1 when a result is not the documented one.
    Verify(VerifyArgs),
    /// Compare a quantity with its truncated asymptotic expansion.
    Expansion(ExpansionArgs),
    /// Sum rules: the P = Q identity, the trace series or the R2 Weyl bounds.
    Sumrule(SumruleArgs),
    /// Data for one of the figures f1, f2, f34, f4 ... f10.
    Figure(FigureArgs),
    /// Run the acceptance suite and print one line per criterion.
    Report(ReportArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
    Svg,
    Markdown,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum QuantityArg {
    N,
    R1,
    R2,
    Average,
}

impl From<QuantityArg> for Quantity {
    fn from(q: QuantityArg) -> Quantity {
        match q {
            QuantityArg::N => Quantity::N,
            QuantityArg::R1 => Quantity::R1,
            QuantityArg::R2 => Quantity::R2,
            QuantityArg::Average => Quantity::Average,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Standard,
    Buckling,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GridKind {
    /// The catalog's standard grid.
    Standard,
    /// `--points` uniform points on `[--zmin, --zmax]`.
    Uniform,
}

#[derive(Args, Clone)]
struct Common {
    /// Space descriptor such as `sphere:3`, `hemisphere-d:2`, `cp:4`, `cayley`.
    #[arg(long)]
    space: Option<String>,
    /// Power p of the operator (-Delta)^p.
    #[arg(long)]
    power: Option<u32>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Write the output to this file (atomically) instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct GridArgs {
    /// Lower end of a uniform grid (default 0).
    #[arg(long)]
    zmin: Option<f64>,
    /// Upper end of a uniform grid.
    #[arg(long)]
    zmax: Option<f64>,
    /// Number of uniform grid points.
    #[arg(long)]
    points: Option<usize>,
    #[arg(long, value_enum)]
    grid: Option<GridKind>,
}

impl GridArgs {
    fn uniform(&self, default_max: Option<f64>, default_points: usize) -> Result<Option<Vec<f64>>> {
        let wanted = self.grid == Some(GridKind::Uniform) || self.zmin.is_some() || self.zmax.is_some() || self.points.is_some();
        if self.grid == Some(GridKind::Standard) || (!wanted && default_max.is_none()) {
            return Ok(None);
        }
        let lo = self.zmin.unwrap_or(0.0);
        let hi = self
            .zmax
            .or(default_max)
            .ok_or_else(|| anyhow!(Usage("--zmax is required for a uniform grid".into())))?;
        let n = self.points.unwrap_or(default_points);
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi >= lo) || n == 0 {
            bail!(Usage(format!(
                "bad grid: need 0 <= zmin <= zmax and points >= 1, got [{lo}, {hi}] with {n} points"
            )));
        }
        Ok(Some(if n == 1 {
            vec![lo]
        } else {
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
        }))
    }
}

#[derive(Args)]
struct LevelsArgs {
    /// Space descriptor (alternative to --space).
    space_pos: Option<String>,
    #[command(flatten)]
    common: Common,
    /// Largest level index.
    #[arg(long, default_value_t = 10)]
    lmax: u64,
    #[arg(long, value_enum, default_value = "standard")]
    variant: VariantArg,
}

#[derive(Args)]
struct EvalArgs {
    space_pos: Option<String>,
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "r1")]
    quantity: QuantityArg,
    /// Riesz order 0, 1 or 2 (overrides --quantity).
    #[arg(long)]
    gamma: Option<u32>,
    /// Comma-separated points; fractions such as `7/2` are evaluated exactly. For averages these are k.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    z: Vec<String>,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum, default_value = "standard")]
    variant: VariantArg,
}

#[derive(Args)]
struct VerifyArgs {
    /// An optional space descriptor followed by bound ids, or `all`.
    #[arg(required = true)]
    targets: Vec<String>,
    #[command(flatten)]
    common: Common,
    /// Area |Omega| for domain bounds.
    #[arg(long)]
    area: Option<f64>,
    /// Relative tolerance for slack signs and equality points.
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    grid: GridArgs,
    /// Keep every grid point in the JSON report.
    #[arg(long)]
    keep_points: bool,
}

#[derive(Args)]
struct ExpansionArgs {
    space_pos: Option<String>,
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "n")]
    quantity: QuantityArg,
    /// Number of terms kept (default: all known terms).
    #[arg(long)]
    terms: Option<u32>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SumruleKind {
    Pq,
    Trace,
    R2,
}

#[derive(Args)]
struct SumruleArgs {
    /// An optional space descriptor followed by `pq`, `trace` or `r2`.
    #[arg(required = true, num_args = 1..=2)]
    targets: Vec<String>,
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    lmax: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct FigureArgs {
    id: String,
    /// Grid points per level interval.
    #[arg(long, default_value_t = scan::DEFAULT_RESOLUTION)]
    resolution: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A usage or configuration problem (exit code 2).
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<T>(e: spectral_riesz::Error) -> Result<T> {
    Err(anyhow!(Usage(e.to_string())))
}

trait UsageExt<T> {
    fn or_usage(self) -> Result<T>;
}

impl<T> UsageExt<T> for spectral_riesz::Result<T> {
    fn or_usage(self) -> Result<T> {
        self.or_else(usage)
    }
}

fn parse_space(s: &str) -> Result<Space> {
    s.parse::<Space>().or_usage()
}

fn resolve_space(pos: &Option<String>, common: &Common, default: &str) -> Result<Space> {
    match (pos, &common.space) {
        (Some(a), Some(b)) if a != b => bail!(Usage(format!("two different spaces given: {a} and {b}"))),
        (Some(s), _) | (None, Some(s)) => parse_space(s),
        (None, None) => parse_space(default),
    }
}

/// Writes through a temporary sibling file and a rename, so readers never see partial output.
fn write_atomic(path: &Path, content: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| anyhow!(Usage(format!("bad output path {}", path.display()))))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    std::fs::write(&tmp, content).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    Ok(())
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, content.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(content.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn table(rows: &[Vec<String>], format: Format) -> Result<String> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.write_record(r)?;
            }
            Ok(String::from_utf8(w.into_inner()?)?)
        }
        Format::Text | Format::Markdown => {
            let cols = rows.iter().map(|r| r.len()).max().unwrap_or(0);
            let widths: Vec<usize> = (0..cols)
                .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.len()).max().unwrap_or(0))
                .collect();
            let mut out = String::new();
            for r in rows {
                let cells: Vec<String> = r.iter().enumerate().map(|(i, s)| format!("{:<w$}", s, w = widths[i])).collect();
                out.push_str(cells.join("  ").trim_end());
                out.push('\n');
            }
            Ok(out)
        }
        _ => bail!(Usage("this command prints tables: use --format text, csv or json".into())),
    }
}

fn rows_json(rows: &[Vec<String>]) -> Result<String> {
    let header = &rows[0];
    let objs: Vec<serde_json::Map<String, serde_json::Value>> = rows[1..]
        .iter()
        .map(|r| {
            header
                .iter()
                .cloned()
                .zip(r.iter().map(|v| serde_json::Value::String(v.clone())))
                .collect()
        })
        .collect();
    to_json(&objs)
}

fn print_rows(rows: &[Vec<String>], common: &Common) -> Result<()> {
    let s = if common.format == Format::Json {
        rows_json(rows)?
    } else {
        table(rows, common.format)?
    };
    emit(&common.out, &s)
}

fn cmd_levels(a: LevelsArgs) -> Result<u8> {
    let space = resolve_space(&a.space_pos, &a.common, "sphere:2")?;
    let variant = match a.variant {
        VariantArg::Standard => Variant::Standard,
        VariantArg::Buckling => Variant::Buckling,
    };
    let q = SpectrumQuery::new(space, a.common.power.unwrap_or(1), variant).or_usage()?;
    let t = Spectrum::up_to_level(q, a.lmax).or_usage()?;
    let mut rows = vec![vec!["l".into(), "lambda".into(), "multiplicity".into(), "count".into()]];
    let mut count = num_bigint::BigUint::from(0u32);
    for (l, value, mult) in t.levels() {
        count += mult;
        rows.push(vec![l.to_string(), value.to_string(), mult.to_string(), count.to_string()]);
    }
    print_rows(&rows, &a.common)?;
    Ok(0)
}

fn closed_form(space: &Space, quantity: Quantity, z: &BigRational) -> Option<BigRational> {
    match (space.family(), quantity) {
        (Family::Sphere | Family::Circle, Quantity::R1) => riesz::riesz1_closed_sphere_exact(space.dim(), z).ok(),
        (Family::HemisphereDirichlet | Family::HemisphereNeumann, Quantity::N) => riesz::counting_closed_hemisphere_exact(space, z)
            .ok()
            .map(|n| spectral_riesz::exact::rat_from_uint(&n)),
        (Family::HemisphereDirichlet, Quantity::R1) => riesz::riesz1_closed_hemisphere_dirichlet_exact(space.dim(), z).ok(),
        _ => None,
    }
}

fn cmd_eval(a: EvalArgs) -> Result<u8> {
    let space = resolve_space(&a.space_pos, &a.common, "sphere:2")?;
    let quantity: Quantity = match a.gamma {
        Some(0) => Quantity::N,
        Some(1) => Quantity::R1,
        Some(2) => Quantity::R2,
        Some(g) => bail!(Usage(format!("--gamma must be 0, 1 or 2, got {g}"))),
        None => a.quantity.into(),
    };
    let variant = match a.variant {
        VariantArg::Standard => Variant::Standard,
        VariantArg::Buckling => Variant::Buckling,
    };
    let power = a.common.power.unwrap_or(1);
    let q = SpectrumQuery::new(space, power, variant).or_usage()?;
    let points: Vec<(f64, Option<BigRational>)> = if !a.z.is_empty() {
        a.z.iter()
            .map(|s| {
                let r = parse_rational(s).or_usage()?;
                Ok((rat_to_f64(&r), Some(r)))
            })
            .collect::<Result<_>>()?
    } else {
        match a.grid.uniform(None, 11)? {
            Some(v) => v.into_iter().map(|z| (z, rat_from_f64(z).ok())).collect(),
            None => bail!(Usage("give points with --z or a grid with --zmin/--zmax/--points".into())),
        }
    };
    let mut rows = vec![vec!["z".into(), "brute".into(), "exact".into(), "closed".into(), "weyl".into()]];
    if quantity == Quantity::Average {
        rows[0][0] = "k".into();
        for (x, _) in &points {
            if *x < 1.0 || x.fract() != 0.0 {
                bail!(Usage(format!("averages need integer k >= 1, got {x}")));
            }
            let avg = riesz::eigenvalue_average(&q, *x as u64).or_usage()?;
            rows.push(vec![
                format_f64(*x),
                format_f64(rat_to_f64(&avg)),
                format_rational(&avg),
                String::new(),
                String::new(),
            ]);
        }
        print_rows(&rows, &a.common)?;
        return Ok(0);
    }
    let gamma = quantity.gamma().expect("riesz quantity");
    let z_max = points.iter().map(|p| p.0).fold(0.0, f64::max);
    if points.iter().any(|p| !p.0.is_finite() || p.0 < 0.0) {
        bail!(Usage("points must be finite and nonnegative".into()));
    }
    let t = Spectrum::covering(q, z_max, DEFAULT_LEVEL_CAP).or_usage()?;
    for (z, exact) in &points {
        let brute = t.riesz(gamma, *z);
        let ex = exact.as_ref().map(|r| t.riesz_exact(gamma, r));
        let closed = if variant == Variant::Standard && power == 1 {
            exact.as_ref().and_then(|r| closed_form(&space, quantity, r))
        } else {
            None
        };
        let weyl = if variant == Variant::Standard {
            weyl_term(&space, gamma, power, *z).ok()
        } else {
            None
        };
        rows.push(vec![
            exact
                .as_ref()
                .filter(|_| !a.z.is_empty())
                .map(format_rational)
                .unwrap_or_else(|| format_f64(*z)),
            format_f64(brute),
            ex.map(|r| format_rational(&r)).unwrap_or_default(),
            closed.map(|r| format_rational(&r)).unwrap_or_default(),
            weyl.map(format_f64).unwrap_or_default(),
        ]);
    }
    print_rows(&rows, &a.common)?;
    Ok(0)
}

fn summary_line(r: &ScanReport) -> String {
    let mut parts = Vec::new();
    for s in &r.sides {
        match (s.min_slack, s.argmin) {
            (Some(m), Some(x)) => parts.push(format!(
                "{} min slack {} at {} = {}, {} violations",
                s.side.keyword(),
                format_f64(m),
                if r.variable == Variable::K { "k" } else { "z" },
                format_f64(x),
                s.violations
            )),
            _ => parts.push(format!("{} no points", s.side.keyword())),
        }
        if let Some(w) = &s.first_violation {
            parts.push(format!(
                "first witness at {} (target {}, bound {})",
                format_f64(w.x),
                format_f64(w.target),
                format_f64(w.bound)
            ));
        }
    }
    if !r.equality_checks.is_empty() {
        let ok = r.equality_checks.iter().filter(|e| e.ok).count();
        parts.push(format!("{ok}/{} equality points", r.equality_checks.len()));
    }
    for n in &r.notes {
        parts.push(n.clone());
    }
    format!(
        "{} {} {} p={}: {}; {}",
        if r.passed { "PASS" } else { "FAIL" },
        r.id,
        r.space,
        r.p,
        r.outcome,
        parts.join("; ")
    )
}

fn cmd_verify(a: VerifyArgs) -> Result<u8> {
    let mut targets = a.targets.clone();
    let pos_space = match targets.first() {
        Some(first) if bounds::lookup(first).is_err() && first != "all" => Some(parse_space(first)?),
        _ => None,
    };
    if pos_space.is_some() {
        targets.remove(0);
    }
    if targets.is_empty() {
        bail!(Usage("no bound ids given; use `all` for the whole catalog".into()));
    }
    let space = match (pos_space, &a.common.space) {
        (Some(s), None) => Some(s),
        (None, Some(s)) => Some(parse_space(s)?),
        (Some(s), Some(t)) => {
            if parse_space(t)? != s {
                bail!(Usage("two different spaces given".into()));
            }
            Some(s)
        }
        (None, None) => None,
    };
    let tol = a.tol.unwrap_or(bounds::DEFAULT_TOLERANCE);
    if !tol.is_finite() || tol <= 0.0 {
        bail!(Usage("--tol must be positive".into()));
    }
    let points = a.grid.uniform(None, bounds::STANDARD_GRID_POINTS)?;
    let opts = VerifyOptions {
        grid: points.map(GridSpec::Points).unwrap_or(GridSpec::Standard),
        tolerance: tol,
        keep_points: a.keep_points,
    };
    let mut jobs = Vec::new();
    if targets.iter().any(|t| t == "all") {
        if targets.len() > 1 {
            bail!(Usage("`all` cannot be combined with explicit ids".into()));
        }
        for spec in bounds::catalog() {
            match space {
                Some(s) => {
                    if let Ok(p) = spec.params(Some(s), a.common.power, a.area) {
                        jobs.push((spec.id, p));
                    }
                }
                None => jobs.extend(spec.sweep_params().into_iter().map(|p| (spec.id, p))),
            }
        }
    } else {
        for id in &targets {
            let spec = bounds::lookup(id).or_usage()?;
            jobs.push((spec.id, spec.params(space, a.common.power, a.area).or_usage()?));
        }
    }
    let mut reports = Vec::new();
    for (id, p) in jobs {
        reports.push(bounds::verify(id, &p, &opts).or_usage()?);
    }
    let all_ok = reports.iter().all(|r| r.passed);
    let text = match a.common.format {
        Format::Json => {
            if reports.len() == 1 {
                to_json(&reports[0])?
            } else {
                to_json(&reports)?
            }
        }
        Format::Text | Format::Markdown => {
            let mut s: String = reports.iter().map(|r| summary_line(r) + "\n").collect();
            s.push_str(&format!(
                "{} of {} checks gave the documented result\n",
                reports.iter().filter(|r| r.passed).count(),
                reports.len()
            ));
            s
        }
        _ => bail!(Usage("verify writes text or json".into())),
    };
    emit(&a.common.out, &text)?;
    Ok(if all_ok { 0 } else { 1 })
}

fn write_series(series: &[Series], format: Format, out: &Option<PathBuf>) -> Result<()> {
    let s = match format {
        Format::Csv | Format::Text => {
            let mut buf = Vec::new();
            scan::write_csv(series, &mut buf).or_usage()?;
            String::from_utf8(buf)?
        }
        Format::Json => to_json(&series)?,
        Format::Svg => scan::render_svg(series),
        Format::Markdown => bail!(Usage("series are written as csv, json or svg".into())),
    };
    emit(out, &s)
}

fn cmd_expansion(a: ExpansionArgs) -> Result<u8> {
    let space = resolve_space(&a.space_pos, &a.common, "sphere:3")?;
    let quantity: Quantity = a.quantity.into();
    let gamma = match quantity.gamma() {
        Some(g) if g <= 1 => g,
        _ => bail!(Usage("expansions exist for n and r1".into())),
    };
    let known = spectral_riesz::weyl::expansion_coefficients(&space, quantity, 0.0)
        .or_usage()?
        .len() as u32;
    let terms = a.terms.unwrap_or(known);
    let default_max = space.lambda(20) as f64;
    let mut zs = a.grid.uniform(Some(default_max), 400)?.expect("default range");
    zs.retain(|&z| z > 0.0);
    let t = Spectrum::covering(
        SpectrumQuery::laplacian(space),
        zs.last().copied().unwrap_or(1.0),
        DEFAULT_LEVEL_CAP,
    )
    .or_usage()?;
    let mut exact = Vec::new();
    let mut approx = Vec::new();
    let mut ratio = Vec::new();
    for &z in &zs {
        let e = expansion(&space, quantity, z, terms).or_usage()?;
        let v = t.riesz(gamma, z);
        exact.push((z, v));
        approx.push((z, e.value));
        if e.value > 0.0 {
            ratio.push((z, v / e.value - 1.0));
        }
    }
    let mk = |label: &str, points| Series {
        label: label.into(),
        points,
        grid_policy: GridPolicy::UniformInZ,
    };
    let series = vec![
        mk(quantity.keyword(), exact),
        mk(&format!("expansion-{terms}"), approx),
        mk("ratio-1", ratio),
    ];
    let format = if a.common.format == Format::Text {
        Format::Csv
    } else {
        a.common.format
    };
    write_series(&series, format, &a.common.out)?;
    Ok(0)
}

#[derive(Serialize)]
struct TraceOut {
    #[serde(flatten)]
    series: sumrules::TraceSeries,
    error: f64,
    within_tail: bool,
}

fn cmd_sumrule(a: SumruleArgs) -> Result<u8> {
    let (space_pos, kind) = match a.targets.as_slice() {
        [k] => (None, k.clone()),
        [s, k] => (Some(s.clone()), k.clone()),
        _ => bail!(Usage("expected [SPACE] pq|trace|r2".into())),
    };
    let kind = SumruleKind::from_str(&kind, true).map_err(|_| anyhow!(Usage(format!("unknown sum rule `{kind}`; use pq, trace or r2"))))?;
    let space = resolve_space(&space_pos, &a.common, "sphere:2")?;
    let json = a.common.format == Format::Json;
    match kind {
        SumruleKind::Pq => {
            let rep = sumrules::check_pq_identity(&space, a.lmax.unwrap_or(50)).or_usage()?;
            let s = if json {
                to_json(&rep)?
            } else {
                format!(
                    "{} P_N = Q_N on {} at {} gap indices (levels 0..={}){}\n",
                    if rep.passed { "PASS" } else { "FAIL" },
                    rep.space,
                    rep.gaps.len(),
                    rep.l_max,
                    if rep.passed {
                        String::new()
                    } else {
                        format!("; mismatches at levels {:?}", rep.mismatches)
                    }
                )
            };
            emit(&a.common.out, &s)?;
            Ok(if rep.passed { 0 } else { 1 })
        }
        SumruleKind::Trace => {
            let t = sumrules::trace_identity_partial(&space, a.lmax.unwrap_or(1000)).or_usage()?;
            let error = (t.partial_sum - t.target).abs();
            let within = error <= t.tail_estimate;
            let s = if json {
                to_json(&TraceOut {
                    series: t,
                    error,
                    within_tail: within,
                })?
            } else {
                format!(
                    "partial sum {} (l <= {}), target {}, error {}, tail estimate {}\n",
                    format_f64(t.partial_sum),
                    t.l_max,
                    format_f64(t.target),
                    format_f64(error),
                    format_f64(t.tail_estimate)
                )
            };
            emit(&a.common.out, &s)?;
            Ok(if within { 0 } else { 1 })
        }
        SumruleKind::R2 => {
            let points = a.grid.uniform(None, bounds::STANDARD_GRID_POINTS)?;
            let opts = VerifyOptions {
                grid: points.map(GridSpec::Points).unwrap_or(GridSpec::Standard),
                tolerance: a.tol.unwrap_or(bounds::DEFAULT_TOLERANCE),
                keep_points: false,
            };
            let rep = sumrules::r2_bounds_check(&space, &opts).or_usage()?;
            let s = if json { to_json(&rep)? } else { summary_line(&rep) + "\n" };
            emit(&a.common.out, &s)?;
            Ok(if rep.passed { 0 } else { 1 })
        }
    }
}

fn cmd_figure(a: FigureArgs) -> Result<u8> {
    if a.resolution == 0 {
        bail!(Usage("--resolution must be at least 1".into()));
    }
    let series = scan::figure(&a.id, a.resolution).or_usage()?;
    write_series(&series, a.format, &a.out)?;
    Ok(0)
}

fn cmd_report(a: ReportArgs) -> Result<u8> {
    let results = acceptance::run_all();
    let ok = results.iter().all(|r| r.passed);
    let s = match a.format {
        Format::Json => to_json(&results)?,
        Format::Markdown => {
            let mut s = String::from("# Acceptance report\n\n| # | criterion | result | detail |\n|---|---|---|---|\n");
            for r in &results {
                s.push_str(&format!(
                    "| {} | {} | {} | {} |\n",
                    r.number,
                    r.title,
                    if r.passed { "pass" } else { "fail" },
                    r.detail.replace('|', "\\|")
                ));
            }
            s
        }
        Format::Text => results.iter().map(|r| r.line() + "\n").collect(),
        _ => bail!(Usage("report writes text, markdown or json".into())),
    };
    emit(&a.out, &s)?;
    Ok(if ok { 0 } else { 1 })
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("SPECTRAL_RIESZ_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| anyhow!(Usage(format!("SPECTRAL_RIESZ_THREADS must be a positive integer, got `{v}`"))))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8> {
    configure_threads()?;
    match cli.command {
        Command::Levels(a) => cmd_levels(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Expansion(a) => cmd_expansion(a),
        Command::Sumrule(a) => cmd_sumrule(a),
        Command::Figure(a) => cmd_figure(a),
        Command::Report(a) => cmd_report(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
