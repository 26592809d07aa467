//! Command-line surface for the torofan library: load fan files, classify
//! sortedness, subdivide and resolve, compute form tables and Čech
//! cohomology, and run the structural verifiers. Every command emits a JSON
//! report with a deterministic body and maps verdicts to CI-friendly exit
//! codes: 0 for success or a verified property, 1 for input errors, 2 when a
//! property fails or the verdict differs from `--expect`.

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;
use torofan::cech::{
    complete_cohomology_dims, e1_degeneration_check, higher_direct_image_check, CechSetup,
};
use torofan::cone::IVec;
use torofan::fan::{FanFile, FanQuadruple, FanTriple, RaySet};
use torofan::forms::{
    hilbert_table, verify_phi_ses_identities, verify_pushforward, verify_reflexive_intersection,
    FormSpec, SesMode,
};
use torofan::linalg::{Int, Rat};
use torofan::sorting::{classify_sorted, verify_certificate, SortMode, Sortedness};
use torofan::subdivide::{
    ext, find_separating_ray, induced_decorations, is_log_simplicial, resolve_log_simplicial,
    sequential_star, star_subdivision, verify_good_sorting_function, ResolutionChain, StepKind,
};

#[derive(Parser)]
#[command(name = "torofan", version, about = "Decorated-fan computations with exact arithmetic")]
struct Cli {
    /// Expected verdict; the exit code is 2 when the computed verdict differs.
    #[arg(long, global = true, value_name = "VERDICT")]
    expect: Option<String>,
    /// Write the full JSON report to this path.
    #[arg(long, global = true, value_name = "PATH")]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a fan file and check the fan and decoration invariants.
    Validate { input: PathBuf },
    /// Classify the decorated fan as (not) well- or partially sorted.
    Classify {
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: ClassifyMode,
    },
    /// Subdivide the fan and write the canonical result.
    Subdivide {
        input: PathBuf,
        /// Star subdivision at a ray (an index or comma-separated coordinates).
        #[arg(long, value_name = "RAY", conflicts_with_all = ["seq", "ext"])]
        star: Option<String>,
        /// Sequential star subdivision along a named order from the file.
        #[arg(long, value_name = "ORDER", conflicts_with = "ext")]
        seq: Option<String>,
        /// Fan extension by a ray (an index or comma-separated coordinates).
        #[arg(long, value_name = "RAY")]
        ext: Option<String>,
        /// Output path; defaults to the input name with a kind suffix.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Run the log-simplicial resolution and persist the verified chain.
    Resolve {
        input: PathBuf,
        /// Named order from the file; every *-ray must precede every !-ray.
        #[arg(long, value_name = "NAME")]
        order: String,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Tabulate graded dimensions of the form module over a degree window.
    Forms {
        input: PathBuf,
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 2)]
        bound: i64,
        /// Twist by a named divisor from the file.
        #[arg(long, value_name = "NAME")]
        twist: Option<String>,
    },
    /// Čech cohomology: relative vanishing over a base, or total tables.
    Cech {
        input: PathBuf,
        /// Affine base fan subdivided by the input; checks higher direct images.
        #[arg(long, value_name = "BASE", conflicts_with = "complete")]
        relative: Option<PathBuf>,
        /// Total cohomology table over a complete fan.
        #[arg(long)]
        complete: bool,
        /// Form degrees to sweep (relative mode); defaults to 0..=rank.
        #[arg(long, value_delimiter = ',', value_name = "P,..")]
        p: Option<Vec<usize>>,
        #[arg(long, default_value_t = 2)]
        bound: i64,
        /// Twist by a named divisor from the file.
        #[arg(long, value_name = "NAME")]
        twist: Option<String>,
    },
    /// Structural verifiers for the pushforward, reflexive, SES, and
    /// degeneration identities, and the separating-ray finder.
    Verify {
        #[command(subcommand)]
        check: VerifyCommand,
    },
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Degreewise pushforward identity of a model against an affine base.
    Pushforward {
        model: PathBuf,
        #[arg(long, value_name = "BASE")]
        base: PathBuf,
        #[arg(long)]
        p: Option<usize>,
        #[arg(long, default_value_t = 2)]
        bound: i64,
    },
    /// Reflexive-intersection identity on an affine triple.
    Reflexive {
        input: PathBuf,
        #[arg(long)]
        p: Option<usize>,
        #[arg(long, default_value_t = 2)]
        bound: i64,
        #[arg(long, value_name = "NAME")]
        twist: Option<String>,
    },
    /// Short-exact-sequence identities for a chosen undecorated divisor ray.
    Ses {
        input: PathBuf,
        #[arg(long)]
        ray: usize,
        #[arg(long, value_enum)]
        mode: SesDirection,
    },
    /// Degeneration of the Čech-de Rham double complex on a complete fan.
    E1 { input: PathBuf },
    /// Separating ray and the induced ray bipartition of an affine triple.
    SeparatingRay { input: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassifyMode {
    Well,
    Partial,
}

#[derive(Clone, Copy, ValueEnum)]
enum SesDirection {
    AddB,
    AddC,
}

/// What a command computed: the verdict string, whether the checked property
/// holds (used for the exit code when `--expect` is absent), human summary
/// lines, and the report payloads.
struct Outcome {
    verdict: String,
    verified: bool,
    summary: Vec<String>,
    certificates: Value,
    tables: Value,
}

impl Outcome {
    fn new(verdict: &str, verified: bool) -> Outcome {
        Outcome {
            verdict: verdict.to_string(),
            verified,
            summary: Vec::new(),
            certificates: Value::Null,
            tables: Value::Null,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = u8::from(err.use_stderr());
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    init_threads();
    let start = Instant::now();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let mut digest = 0xcbf2_9ce4_8422_2325u64;
    let outcome = match execute(&cli, &mut digest) {
        Ok(outcome) => outcome,
        Err(err) => {
            eprintln!("error: {err:#}");
            return ExitCode::from(1);
        }
    };
    let report = json!({
        "command": format!("torofan {}", argv.join(" ")),
        "verdict": outcome.verdict,
        "certificates": outcome.certificates,
        "tables": outcome.tables,
        "input_digest": format!("fnv1a:{digest:016x}"),
        "tool_version": env!("CARGO_PKG_VERSION"),
        "timing_ms": u64::try_from(start.elapsed().as_millis()).unwrap_or(u64::MAX),
    });
    if let Some(path) = &cli.report {
        if let Err(err) = write_json(path, &report) {
            eprintln!("error: {err:#}");
            return ExitCode::from(1);
        }
    }
    println!("verdict: {}", outcome.verdict);
    for line in &outcome.summary {
        println!("{line}");
    }
    let pass = match &cli.expect {
        Some(expect) => outcome.verdict == *expect || outcome.verdict.starts_with(expect.as_str()),
        None => outcome.verified,
    };
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn init_threads() {
    if let Some(threads) =
        std::env::var("TOROFAN_THREADS").ok().and_then(|v| v.parse::<usize>().ok())
    {
        if threads >= 1 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
        }
    }
}

fn execute(cli: &Cli, digest: &mut u64) -> anyhow::Result<Outcome> {
    match &cli.command {
        Command::Validate { input } => validate(&load(input, digest)?),
        Command::Classify { input, mode } => classify(&load(input, digest)?, *mode),
        Command::Subdivide { input, star, seq, ext, out } => {
            subdivide(&load(input, digest)?, input, star, seq, ext, out)
        }
        Command::Resolve { input, order, out } => resolve(&load(input, digest)?, order, out),
        Command::Forms { input, p, bound, twist } => {
            forms(&load(input, digest)?, *p, *bound, twist)
        }
        Command::Cech { input, relative, complete, p, bound, twist } => {
            let file = load(input, digest)?;
            match relative {
                Some(base) => {
                    cech_relative(&file, &load(base, digest)?, p.clone(), *bound, twist)
                }
                None if *complete => cech_complete(&file, twist),
                None => bail!("choose one of --relative BASE or --complete"),
            }
        }
        Command::Verify { check } => match check {
            VerifyCommand::Pushforward { model, base, p, bound } => {
                pushforward(&load(base, digest)?, &load(model, digest)?, *p, *bound)
            }
            VerifyCommand::Reflexive { input, p, bound, twist } => {
                reflexive(&load(input, digest)?, *p, *bound, twist)
            }
            VerifyCommand::Ses { input, ray, mode } => ses(&load(input, digest)?, *ray, *mode),
            VerifyCommand::E1 { input } => e1(&load(input, digest)?),
            VerifyCommand::SeparatingRay { input } => separating_ray(&load(input, digest)?),
        },
    }
}

fn validate(file: &FanFile) -> anyhow::Result<Outcome> {
    let q = file.to_quadruple()?;
    let mut outcome = Outcome::new("valid", true);
    outcome.summary.push(format!(
        "rank {}, {} rays, {} maximal cones, !{:?} *{:?}",
        q.fan.ambient_rank(),
        q.fan.rays().len(),
        q.fan.maximal_cones().len(),
        indices(&q.b_rays),
        indices(&q.c_rays),
    ));
    outcome.tables = json!({
        "rank": q.fan.ambient_rank(),
        "rays": q.fan.rays().len(),
        "maximal_cones": q.fan.maximal_cones().len(),
        "cones": q.fan.cones().len(),
    });
    Ok(outcome)
}

fn classify(file: &FanFile, mode: ClassifyMode) -> anyhow::Result<Outcome> {
    let q = file.to_quadruple()?;
    let sort_mode = match mode {
        ClassifyMode::Well => SortMode::well_sorted(&q),
        ClassifyMode::Partial => SortMode::partially_sorted(&q),
    };
    let (yes, no) = match mode {
        ClassifyMode::Well => ("well-sorted", "not well-sorted"),
        ClassifyMode::Partial => ("partially-sorted", "not partially-sorted"),
    };
    match classify_sorted(&q, &sort_mode)? {
        Sortedness::Sorted(cert) => {
            verify_certificate(&q, &cert)?;
            let cones: Vec<Value> = cert
                .per_cone
                .iter()
                .map(|(rays, rho)| json!({"rays": indices(rays), "rho": rat_strings(rho)}))
                .collect();
            let mut outcome = Outcome::new(yes, true);
            outcome
                .summary
                .push(format!("{} unsettled cones certified and re-verified", cones.len()));
            outcome.certificates = json!({"mode": mode_json(&cert.mode), "cones": cones});
            Ok(outcome)
        }
        Sortedness::Unsorted { counterexample, .. } => {
            let mut outcome = Outcome::new(no, true);
            outcome.summary.push(format!("counterexample cone: {:?}", indices(&counterexample)));
            outcome.certificates = json!({"counterexample": indices(&counterexample)});
            Ok(outcome)
        }
    }
}

fn subdivide(
    file: &FanFile,
    input: &Path,
    star: &Option<String>,
    seq: &Option<String>,
    ext_ray: &Option<String>,
    out: &Option<PathBuf>,
) -> anyhow::Result<Outcome> {
    let q = file.to_quadruple()?;
    let (kind, result) = if let Some(spec) = star {
        let nu = parse_ray(spec, &q)?;
        let fan = star_subdivision(&q.fan, &nu)?;
        ("star", induced_decorations(&fan, &q))
    } else if let Some(name) = seq {
        let order = file.order(name)?;
        let chain = sequential_star(&q, &order.carrier(), &order)?;
        ("seq", chain.final_quadruple())
    } else if let Some(spec) = ext_ray {
        let nu = parse_ray(spec, &q)?;
        let fan = ext(&q.fan, &nu)?;
        ("ext", induced_decorations(&fan, &q))
    } else {
        bail!("choose one of --star, --seq, --ext");
    };
    let out_file = FanFile::from_quadruple(&result)?;
    let path = out.clone().unwrap_or_else(|| input.with_extension(format!("{kind}.json")));
    out_file.save(&path)?;
    let mut outcome = Outcome::new("subdivided", true);
    outcome.summary.push(format!(
        "{} rays, {} maximal cones -> {}",
        result.fan.rays().len(),
        result.fan.maximal_cones().len(),
        path.display(),
    ));
    outcome.tables = serde_json::to_value(&out_file)?;
    Ok(outcome)
}

fn resolve(file: &FanFile, order_name: &str, out: &Path) -> anyhow::Result<Outcome> {
    let t = file.to_triple()?;
    let order = file.order(order_name)?;
    let chain = resolve_log_simplicial(&t, &order)?;
    let mut certificates = 0usize;
    for step in &chain.steps {
        for cert in step.certificates.values() {
            verify_good_sorting_function(&cert.base, &step.induced, cert)
                .context("certificate re-verification failed")?;
            certificates += 1;
        }
    }
    let final_q = chain.final_quadruple();
    let log_simplicial = is_log_simplicial(&final_q.clone().triple()?);
    let body = serde_json::to_string_pretty(&chain_json(&chain)?)? + "\n";
    std::fs::create_dir_all(out)?;
    let chain_path = out.join("chain.json");
    let previous = std::fs::read_to_string(&chain_path).ok();
    let idempotent = previous.as_deref().map(|prev| prev == body);
    std::fs::write(&chain_path, &body)?;
    FanFile::from_quadruple(&final_q)?.save(&out.join("final.json"))?;
    let mut outcome = Outcome::new("resolved", log_simplicial);
    outcome.summary.push(format!(
        "{} steps, {certificates} certificates re-verified, final log-simplicial: {log_simplicial}",
        chain.steps.len(),
    ));
    if let Some(same) = idempotent {
        outcome.summary.push(format!("previous chain file matched: {same}"));
    }
    outcome.summary.push(format!("chain -> {}", chain_path.display()));
    outcome.certificates = json!({
        "steps": chain.steps.len(),
        "certificates": certificates,
        "log_simplicial": log_simplicial,
        "idempotent": idempotent,
    });
    Ok(outcome)
}

fn forms(file: &FanFile, p: usize, bound: i64, twist: &Option<String>) -> anyhow::Result<Outcome> {
    let spec = form_spec(file, p, twist)?;
    let table = hilbert_table(&spec, bound)?;
    let rows: Vec<Value> = table
        .dims
        .iter()
        .map(|(m, d)| Ok(json!({"degree": ivec_json(m)?, "dim": d})))
        .collect::<anyhow::Result<_>>()?;
    let total: usize = table.dims.values().sum();
    let mut outcome = Outcome::new("computed", true);
    outcome.summary.push(format!(
        "p = {p}, window bound {bound}: {} degrees, total dimension {total}",
        rows.len(),
    ));
    outcome.tables = Value::Array(rows);
    Ok(outcome)
}

fn cech_relative(
    file: &FanFile,
    base_file: &FanFile,
    ps: Option<Vec<usize>>,
    bound: i64,
    twist: &Option<String>,
) -> anyhow::Result<Outcome> {
    let sheaf = form_spec(file, 0, twist)?;
    let n = sheaf.triple.fan.ambient_rank();
    let setup = CechSetup::relative(sheaf, base_file.to_triple()?)?;
    let ps = ps.unwrap_or_else(|| (0..=n).collect());
    let report = higher_direct_image_check(&setup, &ps, bound)?;
    let holds = report.holds();
    let mut outcome =
        Outcome::new(if holds { "vanishing holds" } else { "nonvanishing found" }, holds);
    outcome.summary.push(format!(
        "{} checks over p = {ps:?}, bound {bound}; {} nonzero higher groups, {} pushforward mismatches, shell support {}",
        report.checks,
        report.nonzero_higher.len(),
        report.pushforward_mismatches.len(),
        report.shell_support,
    ));
    outcome.summary.extend(report.nonzero_higher.iter().take(8).cloned());
    outcome.tables = json!({
        "nonzero_higher": report.nonzero_higher,
        "pushforward_mismatches": report.pushforward_mismatches,
        "checks": report.checks,
        "shell_support": report.shell_support,
    });
    Ok(outcome)
}

fn cech_complete(file: &FanFile, twist: &Option<String>) -> anyhow::Result<Outcome> {
    let setup = CechSetup::new(form_spec(file, 0, twist)?)?;
    let table = complete_cohomology_dims(&setup)?;
    let rows: Vec<Value> =
        table.rows().iter().map(|&(p, q, dim)| json!({"p": p, "q": q, "dim": dim})).collect();
    let mut outcome = Outcome::new("computed", true);
    outcome.summary.push(format!(
        "{} nonzero entries, total dimension {}",
        rows.len(),
        table.total(),
    ));
    outcome.tables = Value::Array(rows);
    Ok(outcome)
}

fn pushforward(
    base: &FanFile,
    model: &FanFile,
    p: Option<usize>,
    bound: i64,
) -> anyhow::Result<Outcome> {
    let t = base.to_triple()?;
    let m = model.to_triple()?;
    let ps = degree_range(p, t.fan.ambient_rank());
    let mut rows = Vec::new();
    let mut verified = true;
    for &p in &ps {
        let report = verify_pushforward(&t, &m, p, bound)?;
        verified &= report.holds();
        rows.push(report_row(p, &report.hypothesis_failures, &report.mismatches, report.checks));
    }
    let mut outcome = Outcome::new(if verified { "verified" } else { "failed" }, verified);
    outcome.summary.push(format!("pushforward identity over p = {ps:?}, bound {bound}"));
    outcome.tables = Value::Array(rows);
    Ok(outcome)
}

fn reflexive(
    file: &FanFile,
    p: Option<usize>,
    bound: i64,
    twist: &Option<String>,
) -> anyhow::Result<Outcome> {
    let rank = file.to_triple()?.fan.ambient_rank();
    let ps = degree_range(p, rank);
    let mut rows = Vec::new();
    let mut verified = true;
    for &p in &ps {
        let report = verify_reflexive_intersection(&form_spec(file, p, twist)?, bound)?;
        verified &= report.holds();
        rows.push(report_row(p, &report.hypothesis_failures, &report.mismatches, report.checks));
    }
    let mut outcome = Outcome::new(if verified { "verified" } else { "failed" }, verified);
    outcome.summary.push(format!("reflexive intersection over p = {ps:?}, bound {bound}"));
    outcome.tables = Value::Array(rows);
    Ok(outcome)
}

fn ses(file: &FanFile, ray: usize, mode: SesDirection) -> anyhow::Result<Outcome> {
    let t = file.to_triple()?;
    let ses_mode = match mode {
        SesDirection::AddB => SesMode::AddB,
        SesDirection::AddC => SesMode::AddC,
    };
    let report = verify_phi_ses_identities(&t, ray, ses_mode)?;
    let verdict = if report.holds() {
        "verified"
    } else if report.identities_hold() {
        "hypothesis flagged"
    } else {
        "failed"
    };
    let mut outcome = Outcome::new(verdict, report.holds());
    outcome.summary.push(format!(
        "{} checks; {} hypothesis flags, {} identity mismatches",
        report.checks,
        report.hypothesis_failures.len(),
        report.mismatches.len(),
    ));
    outcome.summary.extend(report.hypothesis_failures.iter().take(4).cloned());
    outcome.tables = json!({
        "hypothesis_failures": report.hypothesis_failures,
        "mismatches": report.mismatches,
        "checks": report.checks,
    });
    Ok(outcome)
}

fn e1(file: &FanFile) -> anyhow::Result<Outcome> {
    let setup = CechSetup::new(form_spec(file, 0, &None)?)?;
    let report = e1_degeneration_check(&setup)?;
    let degenerates = report.degenerates();
    let mut outcome =
        Outcome::new(if degenerates { "degenerates" } else { "does not degenerate" }, degenerates);
    outcome.summary.push(format!(
        "hypercohomology {:?} vs Hodge sums {:?}, Euler characteristic {}",
        report.hyper_dims,
        report.hodge_sums,
        report.euler_characteristic(),
    ));
    let rows: Vec<Value> = report
        .table
        .rows()
        .iter()
        .map(|&(p, q, dim)| json!({"p": p, "q": q, "dim": dim}))
        .collect();
    outcome.tables = json!({
        "hyper_dims": report.hyper_dims,
        "hodge_sums": report.hodge_sums,
        "cohomology": rows,
    });
    Ok(outcome)
}

fn separating_ray(file: &FanFile) -> anyhow::Result<Outcome> {
    let t = file.to_triple()?;
    match find_separating_ray(&t) {
        Ok((nu, b_plus, c_plus)) => {
            let mut outcome = Outcome::new("found", true);
            outcome.summary.push(format!(
                "ray {:?} with !-side {:?} and *-side {:?}",
                nu.iter().map(ToString::to_string).collect::<Vec<_>>(),
                indices(&b_plus),
                indices(&c_plus),
            ));
            outcome.certificates = json!({
                "ray": ivec_json(&nu)?,
                "b_plus": indices(&b_plus),
                "c_plus": indices(&c_plus),
            });
            Ok(outcome)
        }
        Err(torofan::Error::WellSortedInput) => {
            let mut outcome = Outcome::new("well-sorted input", true);
            outcome.summary.push("no separating ray is needed".to_string());
            Ok(outcome)
        }
        Err(err) => Err(err.into()),
    }
}

fn chain_json(chain: &ResolutionChain) -> anyhow::Result<Value> {
    let steps: Vec<Value> = chain
        .steps
        .iter()
        .map(|step| -> anyhow::Result<Value> {
            let certificates: Vec<Value> = step
                .certificates
                .iter()
                .map(|(base_rays, cert)| -> anyhow::Result<Value> {
                    let pieces: Vec<Value> = cert
                        .pieces
                        .iter()
                        .map(|(cone, u)| json!({"cone": indices(cone), "u": rat_strings(u)}))
                        .collect();
                    Ok(json!({
                        "base": indices(base_rays),
                        "base_generators": cert
                            .base
                            .generators()
                            .iter()
                            .map(ivec_json)
                            .collect::<anyhow::Result<Vec<_>>>()?,
                        "pieces": pieces,
                    }))
                })
                .collect::<anyhow::Result<_>>()?;
            Ok(json!({
                "kind": match step.kind { StepKind::Star => "star", StepKind::Ext => "ext" },
                "ray": ivec_json(&step.ray)?,
                "after": serde_json::to_value(FanFile::from_quadruple(&step.induced)?)?,
                "certificates": certificates,
            }))
        })
        .collect::<anyhow::Result<_>>()?;
    Ok(json!({
        "initial": serde_json::to_value(FanFile::from_quadruple(&chain.initial)?)?,
        "steps": steps,
    }))
}

fn form_spec(file: &FanFile, p: usize, twist: &Option<String>) -> anyhow::Result<FormSpec> {
    let t: FanTriple = file.to_triple()?;
    Ok(match twist {
        Some(name) => FormSpec::twisted(t, p, file.divisor(name)?),
        None => FormSpec::untwisted(t, p),
    })
}

fn degree_range(p: Option<usize>, rank: usize) -> Vec<usize> {
    match p {
        Some(p) => vec![p],
        None => (0..=rank).collect(),
    }
}

fn report_row(p: usize, hypotheses: &[String], mismatches: &[String], checks: usize) -> Value {
    json!({
        "p": p,
        "hypothesis_failures": hypotheses,
        "mismatches": mismatches,
        "checks": checks,
    })
}

fn mode_json(mode: &SortMode) -> Value {
    json!({
        "b_sharp": indices(&mode.b_sharp),
        "c_flat": indices(&mode.c_flat),
        "h_sharp": indices(&mode.h_sharp),
    })
}

fn parse_ray(spec: &str, q: &FanQuadruple) -> anyhow::Result<IVec> {
    if spec.contains(',') {
        spec.split(',')
            .map(|part| {
                part.trim()
                    .parse::<i64>()
                    .map(Int::from)
                    .map_err(|_| anyhow!("cannot parse ray coordinate '{part}'"))
            })
            .collect()
    } else {
        let index: usize = spec.parse().map_err(|_| anyhow!("cannot parse ray index '{spec}'"))?;
        q.fan
            .rays()
            .get(index)
            .cloned()
            .ok_or_else(|| anyhow!("ray index {index} out of range"))
    }
}

fn indices(set: &RaySet) -> Vec<usize> {
    set.iter().copied().collect()
}

fn rat_strings(u: &[Rat]) -> Vec<String> {
    u.iter().map(ToString::to_string).collect()
}

fn ivec_json(v: &IVec) -> anyhow::Result<Value> {
    let coords: Vec<i64> = v
        .iter()
        .map(|x| x.to_string().parse().map_err(|_| anyhow!("coordinate exceeds the report range")))
        .collect::<anyhow::Result<_>>()?;
    Ok(json!(coords))
}

fn load(path: &Path, digest: &mut u64) -> anyhow::Result<FanFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    for &byte in text.as_bytes() {
        *digest ^= u64::from(byte);
        *digest = digest.wrapping_mul(0x0000_0100_0000_01b3);
    }
    serde_json::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))
}

fn write_json(path: &Path, value: &Value) -> anyhow::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}
