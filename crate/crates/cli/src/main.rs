//! `pptsq`: command-line checks for channels, states and separability
//! certificates. Exit codes: 0 pass/certified, 1 fail/refuted,
//! 2 inconclusive, 3 input error.

mod io;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use pptsq::channels::compose;
use pptsq::fixtures;
use pptsq::separability::peres_horodecki_decides;
use pptsq::suite::{run_suite, SuiteConfig};
use pptsq::{
    certify_block_split, certify_convex_split, certify_peres_horodecki, certify_schmidt2_pipeline,
    is_ppt_state, BipartiteOperator, Error, KrausChannel, PureDecomposition, PureStateVector,
    SeparabilityCertificate, Tolerance, Verdict,
};
use serde::Serialize;

use io::{load, write_json, Object, Sink};

#[derive(Parser)]
#[command(name = "pptsq", version, about = "Channel, PPT and separability checks")]
struct Cli {
    /// Numerical tolerance applied to every check.
    #[arg(long, global = true, default_value_t = Tolerance::DEFAULT_EPS)]
    tol: f64,
    /// Base seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Choi matrix of a channel.
    Choi { channel: PathBuf },
    /// Kraus operators of `outer ∘ inner`.
    Compose {
        outer: PathBuf,
        inner: PathBuf,
        #[arg(long, default_value_t = pptsq::channels::DEFAULT_PRUNE_TOL)]
        prune_tol: f64,
    },
    /// Apply a channel to a matrix, or to the B factor of a bipartite operator.
    Apply { channel: PathBuf, input: PathBuf },
    /// PPT test of a channel (via its Choi matrix) or of a bipartite state.
    PptCheck { input: PathBuf },
    /// Trace-preservation test of a channel.
    TpCheck { channel: PathBuf },
    /// Schmidt rank and coefficients of a bipartite pure vector.
    SchmidtRank { vector: PathBuf },
    /// Separability certificate for a bipartite state.
    Separability {
        /// Target state; optional for convex-split, where it is checked against the sum of parts.
        state: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = MethodArg::Peres)]
        method: MethodArg,
        /// Channel for the Schmidt-rank-2 pipeline.
        #[arg(long)]
        channel: Option<PathBuf>,
        /// Pure-state decomposition of the input state for the pipeline.
        #[arg(long)]
        decomposition: Option<PathBuf>,
        /// Parts for convex-split (repeatable).
        #[arg(long = "part")]
        parts: Vec<PathBuf>,
    },
    /// End-to-end verification of the 4⊗4 worked example.
    VerifyPaper {
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Randomized property suites with replayable per-trial seeds.
    RandomSuite {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 3)]
        kraus: usize,
    },
    /// Write the worked-example states and channels as JSON files.
    ExportFixtures { dir: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Peres,
    BlockSplit,
    Schmidt2,
    ConvexSplit,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy)]
enum Outcome {
    Pass,
    Fail,
    Inconclusive,
}

impl Outcome {
    fn from_flag(flag: bool) -> Self {
        if flag {
            Self::Pass
        } else {
            Self::Fail
        }
    }

    fn from_verdict(v: Verdict) -> Self {
        match v {
            Verdict::Certified => Self::Pass,
            Verdict::Refuted => Self::Fail,
            Verdict::Inconclusive => Self::Inconclusive,
        }
    }

    fn code(self) -> u8 {
        match self {
            Self::Pass => 0,
            Self::Fail => 1,
            Self::Inconclusive => 2,
        }
    }
}

const INPUT_ERROR: u8 = 3;

#[derive(Serialize)]
struct PptReport {
    kind: &'static str,
    ppt: bool,
    min_eigenvalue_pt: f64,
    tolerance: f64,
}

#[derive(Serialize)]
struct TpReport {
    trace_preserving: bool,
    defect: f64,
    kraus_count: usize,
    d_in: usize,
    d_out: usize,
    tolerance: f64,
}

#[derive(Serialize)]
struct SchmidtReport {
    schmidt_rank: usize,
    schmidt_coefficients: Vec<f64>,
    tolerance: f64,
}

/// Emitted when a convex split cannot be assembled because a part is not certified.
#[derive(Serialize)]
struct UnassembledSplit {
    verdict: Verdict,
    method: &'static str,
    error: String,
    children: Vec<SeparabilityCertificate>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(INPUT_ERROR);
        }
    };
    match run(cli) {
        Ok(outcome) => ExitCode::from(outcome.code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(INPUT_ERROR)
        }
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    let tol = Tolerance::new(cli.tol).context("--tol")?;
    let sink = Sink::new(cli.out);
    match cli.command {
        Command::Choi { channel } => {
            let ch: KrausChannel = load(&channel, "channel")?;
            sink.json(&ch.choi())?;
            Ok(Outcome::Pass)
        }
        Command::Compose { outer, inner, prune_tol } => {
            let f: KrausChannel = load(&outer, "outer channel")?;
            let g: KrausChannel = load(&inner, "inner channel")?;
            let prune = Tolerance::new(prune_tol).context("--prune-tol")?;
            sink.json(&compose(&f, &g, prune)?)?;
            Ok(Outcome::Pass)
        }
        Command::Apply { channel, input } => {
            let ch: KrausChannel = load(&channel, "channel")?;
            match Object::load(&input, "input")? {
                Object::Matrix(x) => sink.json(&ch.apply(&x)?)?,
                Object::State(x) => sink.json(&ch.apply_to_b(&x)?)?,
                Object::Channel(_) => bail!("input: expected a matrix or bipartite operator, found a channel"),
            }
            Ok(Outcome::Pass)
        }
        Command::PptCheck { input } => {
            let report = match Object::load(&input, "input")? {
                Object::Channel(ch) => {
                    let c = ch.is_ppt(tol);
                    PptReport { kind: "channel", ppt: c.flag, min_eigenvalue_pt: c.witness, tolerance: tol.eps() }
                }
                Object::State(rho) => {
                    let c = is_ppt_state(&rho, tol)?;
                    PptReport { kind: "state", ppt: c.flag, min_eigenvalue_pt: c.witness, tolerance: tol.eps() }
                }
                Object::Matrix(_) => bail!("input: missing field `dA` (bipartite dimensions required)"),
            };
            sink.json(&report)?;
            Ok(Outcome::from_flag(report.ppt))
        }
        Command::TpCheck { channel } => {
            let ch: KrausChannel = load(&channel, "channel")?;
            let c = ch.is_trace_preserving(tol);
            sink.json(&TpReport {
                trace_preserving: c.flag,
                defect: c.defect,
                kraus_count: ch.len(),
                d_in: ch.d_in(),
                d_out: ch.d_out(),
                tolerance: tol.eps(),
            })?;
            Ok(Outcome::from_flag(c.flag))
        }
        Command::SchmidtRank { vector } => {
            let v: PureStateVector = load(&vector, "vector")?;
            sink.json(&SchmidtReport {
                schmidt_rank: v.schmidt_rank(tol),
                schmidt_coefficients: v.schmidt_coefficients(),
                tolerance: tol.eps(),
            })?;
            Ok(Outcome::Pass)
        }
        Command::Separability { state, method, channel, decomposition, parts } => {
            separability(&sink, tol, state, method, channel, decomposition, parts)
        }
        Command::VerifyPaper { format } => {
            let report = fixtures::verify_worked_example(tol);
            match format {
                Format::Json => sink.json(&report)?,
                Format::Text => sink.text(&report.to_text())?,
            }
            Ok(Outcome::from_flag(report.passed()))
        }
        Command::RandomSuite { trials, dim, kraus } => {
            if dim == 0 {
                bail!("--dim: must be at least 1");
            }
            if kraus == 0 {
                bail!("--kraus: must be at least 1");
            }
            let summary = run_suite(SuiteConfig { trials, dim, kraus, seed: cli.seed, tolerance: tol.eps() })?;
            sink.json(&summary)?;
            Ok(Outcome::from_flag(summary.passed))
        }
        Command::ExportFixtures { dir } => {
            export_fixtures(&dir)?;
            Ok(Outcome::Pass)
        }
    }
}

fn separability(
    sink: &Sink,
    tol: Tolerance,
    state: Option<PathBuf>,
    method: MethodArg,
    channel: Option<PathBuf>,
    decomposition: Option<PathBuf>,
    parts: Vec<PathBuf>,
) -> Result<Outcome> {
    let target = state.as_deref().map(|p| load::<BipartiteOperator>(p, "state")).transpose()?;
    let require_target = || target.as_ref().context("state: missing input file");
    let cert = match method {
        MethodArg::Peres => certify_peres_horodecki(require_target()?, tol)?,
        MethodArg::BlockSplit => certify_block_split(require_target()?, tol)?,
        MethodArg::Schmidt2 => {
            let rho = require_target()?;
            let ch: KrausChannel = load(channel.as_deref().context("--channel: required for schmidt2")?, "channel")?;
            let dec: PureDecomposition = load(
                decomposition.as_deref().context("--decomposition: required for schmidt2")?,
                "decomposition",
            )?;
            certify_schmidt2_pipeline(&ch, rho, &dec, tol)?
        }
        MethodArg::ConvexSplit => {
            if parts.is_empty() {
                bail!("--part: convex-split needs at least one part");
            }
            let mut certified = Vec::with_capacity(parts.len());
            for path in &parts {
                let op: BipartiteOperator = load(path, "part")?;
                let cert = certify_part(&op, tol)?;
                certified.push((op, cert));
            }
            match certify_convex_split(&certified, target.as_ref(), tol) {
                Ok(cert) => cert,
                Err(e @ Error::ChildNotCertified { .. }) => {
                    sink.json(&UnassembledSplit {
                        verdict: Verdict::Inconclusive,
                        method: "convex-split",
                        error: e.to_string(),
                        children: certified.into_iter().map(|(_, c)| c).collect(),
                    })?;
                    return Ok(Outcome::Inconclusive);
                }
                Err(e) => return Err(e.into()),
            }
        }
    };
    sink.json(&cert)?;
    Ok(Outcome::from_verdict(cert.verdict))
}

/// Peres–Horodecki where it decides, block split otherwise.
fn certify_part(op: &BipartiteOperator, tol: Tolerance) -> Result<SeparabilityCertificate> {
    let (da, db) = op.dims();
    Ok(if peres_horodecki_decides(da, db) {
        certify_peres_horodecki(op, tol)?
    } else {
        certify_block_split(op, tol)?
    })
}

fn export_fixtures(dir: &std::path::Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    write_json(&dir.join("rho2.json"), &fixtures::rho2())?;
    write_json(&dir.join("rho3.json"), &fixtures::rho3())?;
    write_json(&dir.join("rho4.json"), &fixtures::rho4())?;
    write_json(&dir.join("sigma.json"), &fixtures::sigma())?;
    write_json(&dir.join("gamma.json"), &fixtures::gamma_computed())?;
    write_json(&dir.join("gamma_printed.json"), &fixtures::gamma_printed())?;
    write_json(&dir.join("phi.json"), &fixtures::example_channel())?;
    let phi = fixtures::example_channel();
    write_json(&dir.join("phi_rho3.json"), &phi.apply_to_b(&fixtures::rho3())?)?;
    write_json(&dir.join("phi_rho4.json"), &phi.apply_to_b(&fixtures::rho4())?)?;
    write_json(&dir.join("phi_rho2.json"), &phi.apply_to_b(&fixtures::rho2())?)?;
    Ok(())
}
