use adlv_core::adlv::enumerate_points;
use adlv_core::chars::CharacterSpec;
use adlv_core::suites::{self, Ctx, Effort, RunConfig, Status, SuiteKind};
use adlv_core::types_bh::{mackey_trace, main_theorem_check};
use adlv_core::Error;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

/// Verification driver for wildly ramified affine Deligne-Lusztig
/// varieties of GL2 in characteristic 2.
#[derive(Parser)]
#[command(name = "wildadlv", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct TowerArgs {
    /// Residue field degree, q = 2^f.
    #[arg(long, default_value_t = 1)]
    f: u8,
    /// Discriminant exponent (odd).
    #[arg(long, default_value_t = 1)]
    d: i64,
    /// Level parameter, 2n > d.
    #[arg(long, default_value_t = 1)]
    n: i64,
    /// Working precision in powers of pi.
    #[arg(long)]
    precision: Option<i64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl TowerArgs {
    fn config(&self) -> RunConfig {
        let mut c = RunConfig::new(self.f, self.d, self.n);
        c.precision = self.precision;
        c.seed = self.seed;
        c
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and print a report.
    Verify {
        #[command(flatten)]
        tower: TowerArgs,
        /// Suite to run: all, tower, groups, points, traces, theorem (repeatable).
        #[arg(long, default_value = "all")]
        suite: Vec<String>,
        /// Write the JSON report here ("-" for stdout).
        #[arg(long)]
        json: Option<PathBuf>,
        /// Override the default sample counts, e.g. dual_oracle=500.
        #[arg(long = "effort", value_name = "KEY=N")]
        effort: Vec<String>,
    },
    /// List points of the variety.
    Enumerate {
        #[command(flatten)]
        tower: TowerArgs,
        #[arg(long, default_value_t = 20)]
        limit: usize,
    },
    /// Compare the closed trace formula with the orbit count.
    Traces {
        #[command(flatten)]
        tower: TowerArgs,
        /// Index into the list printed by `chars`.
        #[arg(long, default_value_t = 0)]
        theta: usize,
        #[arg(long = "g-samples", default_value_t = 20)]
        g_samples: usize,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Compare the trace formula with the Mackey trace of the induced type.
    Theorem {
        #[command(flatten)]
        tower: TowerArgs,
        #[arg(long, conflicts_with = "samples")]
        exhaustive: bool,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        /// Restrict to one character (index as printed by `chars`).
        #[arg(long)]
        theta: Option<usize>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// List the generic characters of the torsion group.
    Chars {
        #[command(flatten)]
        tower: TowerArgs,
        /// Print the full text spec of one character.
        #[arg(long)]
        show: Option<usize>,
    },
}

fn set_threads() {
    if let Some(n) = std::env::var("WILDADLV_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
    {
        // only fails if a pool exists already
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn emit(path: &Option<PathBuf>, v: &Value) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(v).expect("value serializes") + "\n";
    match path {
        None => Ok(()),
        Some(p) if p.as_os_str() == "-" => {
            print!("{text}");
            Ok(())
        }
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Error::Usage(format!("cannot write {}: {e}", p.display()))),
    }
}

fn parse_suites(names: &[String]) -> Result<Vec<SuiteKind>, Error> {
    let mut out = Vec::new();
    for n in names.iter().flat_map(|s| s.split(',')) {
        if n == "all" {
            out.extend(SuiteKind::ALL);
        } else {
            out.push(n.parse()?);
        }
    }
    Ok(out)
}

fn apply_effort(e: &mut Effort, items: &[String]) -> Result<(), Error> {
    for item in items {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("effort override '{item}' is not KEY=N")))?;
        let v: usize = v
            .parse()
            .map_err(|_| Error::Usage(format!("effort value '{v}' is not a number")))?;
        let slot = match k {
            "tower_samples" => &mut e.tower_samples,
            "verify_random" => &mut e.verify_random,
            "coset_random" => &mut e.coset_random,
            "group_random" => &mut e.group_random,
            "beta_pairs" => &mut e.beta_pairs,
            "dual_oracle" => &mut e.dual_oracle,
            "theorem_random" => &mut e.theorem_random,
            "theta_limit" => &mut e.theta_limit,
            "depth_samples" => &mut e.depth_samples,
            "psi_samples" => &mut e.psi_samples,
            "exhaustive_limit" => &mut e.exhaustive_limit,
            _ => return Err(Error::Usage(format!("unknown effort key '{k}'"))),
        };
        *slot = v;
    }
    Ok(())
}

fn pick(chis: &[CharacterSpec], idx: usize) -> Result<&CharacterSpec, Error> {
    chis.get(idx).ok_or_else(|| {
        Error::Usage(format!(
            "character index {idx} out of range (0..{})",
            chis.len()
        ))
    })
}

fn verify(
    tower: &TowerArgs,
    suite: &[String],
    json: &Option<PathBuf>,
    effort: &[String],
) -> Result<bool, Error> {
    let mut cfg = tower.config();
    cfg.suites = parse_suites(suite)?;
    apply_effort(&mut cfg.effort, effort)?;
    let report = suites::run(&cfg)?;
    for s in &report.suites {
        for c in &s.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skip => "SKIP",
            };
            eprintln!(
                "{tag} {}/{} ({} ms): {}",
                s.name, c.name, c.elapsed_ms, c.actual
            );
        }
    }
    eprintln!("overall: {}", if report.pass { "PASS" } else { "FAIL" });
    emit(
        json,
        &serde_json::to_value(&report).expect("report serializes"),
    )?;
    Ok(report.pass)
}

fn enumerate(tower: &TowerArgs, limit: usize) -> Result<bool, Error> {
    let tw = tower.config().tower()?;
    for p in enumerate_points(&tw).iter().take(limit) {
        println!("{}", suites::point_line(&tw, p));
    }
    Ok(true)
}

fn traces(
    tower: &TowerArgs,
    theta: usize,
    g_samples: usize,
    json: &Option<PathBuf>,
) -> Result<bool, Error> {
    let ctx = Ctx::new(&tower.config())?;
    let chis = ctx.generic_characters()?;
    let chi = pick(&chis, theta)?;
    let gs = suites::sample_g(&ctx, g_samples)?;
    let rows = suites::trace_rows(&ctx, chi, &gs)?;
    let mut all = true;
    let mut out = Vec::new();
    for (g, (formula, oracle)) in gs.iter().zip(&rows) {
        let eq = formula == oracle;
        all &= eq;
        eprintln!(
            "det_order={} formula={formula} oracle={oracle} {}",
            g.det_order(),
            if eq { "ok" } else { "MISMATCH" }
        );
        out.push(json!({
            "g": g.recompose(&ctx.tw).to_string(),
            "det_order": g.det_order(),
            "formula": formula.to_string(),
            "oracle": oracle.to_string(),
            "equal": eq,
        }));
    }
    emit(
        json,
        &json!({ "character": chi.to_string(), "rows": out, "pass": all }),
    )?;
    Ok(all)
}

fn theorem(
    tower: &TowerArgs,
    exhaustive: bool,
    samples: usize,
    theta: Option<usize>,
    json: &Option<PathBuf>,
) -> Result<bool, Error> {
    let ctx = Ctx::new(&tower.config())?;
    let chis = ctx.generic_characters()?;
    let chosen: Vec<CharacterSpec> = match theta {
        Some(i) => vec![pick(&chis, i)?.clone()],
        None => chis.clone(),
    };
    let pairs = chosen
        .iter()
        .map(|c| Ok((c.clone(), suites::lambda_for(&ctx, c)?)))
        .collect::<Result<Vec<_>, Error>>()?;
    let gs = suites::theorem_samples(&ctx, exhaustive, samples)?;
    let grp = &ctx.model()?.grp;
    let rep = main_theorem_check(&ctx.tw, grp, &pairs, &gs)?;
    let sanity = pairs
        .iter()
        .map(|(_, lam)| {
            mackey_trace(
                &ctx.tw,
                &adlv_core::adlv::GNormalized::identity(&ctx.tw),
                lam,
            )
        })
        .collect::<Result<Vec<_>, Error>>()?;
    eprintln!(
        "{} characters, {} elements: {} odd and {} even comparisons, {} mismatches",
        pairs.len(),
        gs.len(),
        rep.odd_checked,
        rep.even_checked,
        rep.mismatches.len()
    );
    for m in rep.mismatches.iter().take(5) {
        eprintln!(
            "mismatch {} at {}: formula {} mackey {}",
            m.character, m.g, m.formula, m.mackey
        );
    }
    let mism: Vec<Value> = rep
        .mismatches
        .iter()
        .map(|m| {
            json!({"character": m.character, "g": m.g, "det_order": m.det_order, "formula": m.formula, "mackey": m.mackey})
        })
        .collect();
    emit(
        json,
        &json!({
            "characters": pairs.len(),
            "elements": gs.len(),
            "exhaustive": exhaustive,
            "odd_checked": rep.odd_checked,
            "even_checked": rep.even_checked,
            "mackey_at_identity": sanity.first().map(|c| c.to_string()),
            "mismatches": mism,
            "pass": rep.passed(),
        }),
    )?;
    Ok(rep.passed())
}

fn chars(tower: &TowerArgs, show: Option<usize>) -> Result<bool, Error> {
    let ctx = Ctx::new(&tower.config())?;
    let chis = ctx.generic_characters()?;
    match show {
        Some(i) => print!("{}", pick(&chis, i)?.to_text()),
        None => {
            for (i, c) in chis.iter().enumerate() {
                println!("{i}: {c}");
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    set_threads();
    let res = match &cli.command {
        Command::Verify {
            tower,
            suite,
            json,
            effort,
        } => verify(tower, suite, json, effort),
        Command::Enumerate { tower, limit } => enumerate(tower, *limit),
        Command::Traces {
            tower,
            theta,
            g_samples,
            json,
        } => traces(tower, *theta, *g_samples, json),
        Command::Theorem {
            tower,
            exhaustive,
            samples,
            theta,
            json,
        } => theorem(tower, *exhaustive, *samples, *theta, json),
        Command::Chars { tower, show } => chars(tower, *show),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(Error::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
