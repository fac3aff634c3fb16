//! Randomized property suites over channels and certifiers.
//!
//! Each trial draws everything from its own seed (derived from the run seed
//! and the trial index), so a failing trial can be replayed with
//! [`run_trial`] alone. Trials run in parallel; results keep trial order.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{compose, random_cptp, sample_ppt_channel, KrausChannel, DEFAULT_PRUNE_TOL};
use crate::error::Result;
use crate::linalg::{ComplexMatrix, Subsystem, Tolerance};
use crate::random::{
    derive_seed, random_entangled_two_qubit, random_product_mixture, random_psd,
    random_rank_two_mixture, rng_from_seed,
};
use crate::separability::{certify_peres_horodecki, certify_schmidt2_pipeline, Verdict};
use crate::states::is_ppt_state;

/// Kraus count used when rejection-sampling PPT channels on dimension 3.
pub const PPT_SAMPLER_KRAUS: usize = 18;
/// Draw budget for one PPT channel.
pub const PPT_SAMPLER_ATTEMPTS: usize = 2000;
/// Threshold for the Choi composition identity.
pub const CHOI_IDENTITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub trials: usize,
    pub dim: usize,
    pub kraus: usize,
    pub seed: u64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    pub passed: bool,
    pub checks: BTreeMap<String, bool>,
    pub witnesses: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub config: SuiteConfig,
    pub passed: bool,
    pub failures: usize,
    pub check_failures: BTreeMap<String, usize>,
    pub trials: Vec<TrialResult>,
}

pub fn run_suite(config: SuiteConfig) -> Result<SuiteSummary> {
    let tol = Tolerance::new(config.tolerance)?;
    let trials: Vec<TrialResult> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(t, derive_seed(config.seed, t as u64), config.dim, config.kraus, tol))
        .collect();
    let mut check_failures = BTreeMap::new();
    for t in &trials {
        for (name, &ok) in &t.checks {
            if !ok {
                *check_failures.entry(name.clone()).or_insert(0) += 1;
            }
        }
    }
    let failures = trials.iter().filter(|t| !t.passed).count();
    Ok(SuiteSummary {
        config,
        passed: failures == 0,
        failures,
        check_failures,
        trials,
    })
}

/// One trial: channel identities on dimension `dim` with `kraus` operators,
/// Peres–Horodecki soundness in 2⊗3 and 2⊗2, and the Schmidt-rank-2 pipeline
/// on dimension 3.
pub fn run_trial(trial: usize, seed: u64, dim: usize, kraus: usize, tol: Tolerance) -> TrialResult {
    let mut checks = BTreeMap::new();
    let mut witnesses = BTreeMap::new();
    let mut rng = rng_from_seed(seed);
    let prune = Tolerance::new(DEFAULT_PRUNE_TOL).expect("positive");

    let f = random_cptp(dim, kraus, rng.random());
    let g = random_cptp(dim, kraus, rng.random());
    let h = random_cptp(dim, kraus, rng.random());
    let x = random_psd(dim, dim, &mut rng);

    let fg = compose(&f, &g, prune).expect("square channels of equal dim");
    let identity_gap = fg
        .choi()
        .distance(&f.apply_to_b(&g.choi()).expect("dims match"));
    witnesses.insert("choi_identity_gap".into(), identity_gap);
    checks.insert("choi-composition".into(), identity_gap < CHOI_IDENTITY_TOL);

    let tp = f.is_trace_preserving(tol);
    let marginal_ok = f
        .choi()
        .partial_trace(Subsystem::A)
        .approx_eq(&ComplexMatrix::identity(dim), tol);
    checks.insert("trace-preservation".into(), tp.flag && marginal_ok);

    let direct = f.apply(&x).expect("dims match");
    let via_choi = KrausChannel::apply_via_choi(&f.choi(), &x).expect("dims match");
    checks.insert("kraus-choi-roundtrip".into(), direct.approx_eq(&via_choi, tol));

    let left = compose(&fg, &h, prune).expect("dims match");
    let right = compose(&f, &compose(&g, &h, prune).expect("dims match"), prune).expect("dims match");
    let assoc = left.apply(&x).expect("dims").distance(&right.apply(&x).expect("dims"));
    checks.insert("composition-associativity".into(), assoc < tol.eps());

    let count = rng.random_range(1..=6);
    let mixture = random_product_mixture(2, 3, count, &mut rng).reconstruct();
    let certified = certify_peres_horodecki(&mixture, tol)
        .map(|c| c.verdict == Verdict::Certified && c.audit(&mixture, tol).sound)
        .unwrap_or(false);
    checks.insert("peres-product-mixture".into(), certified);

    let entangled = random_entangled_two_qubit(0.1, &mut rng).projector();
    let refuted = certify_peres_horodecki(&entangled, tol)
        .map(|c| c.verdict == Verdict::Refuted && c.witnesses["min_eigenvalue_pt"] < -tol.eps())
        .unwrap_or(false);
    checks.insert("peres-entangled-pure".into(), refuted);

    let pipeline = pipeline_trial(&mut rng, tol);
    witnesses.extend(pipeline.witnesses);
    checks.extend(pipeline.checks);

    let passed = checks.values().all(|&ok| ok);
    TrialResult {
        trial,
        seed,
        passed,
        checks,
        witnesses,
    }
}

struct PipelineOutcome {
    checks: BTreeMap<String, bool>,
    witnesses: BTreeMap<String, f64>,
}

fn pipeline_trial(rng: &mut impl Rng, tol: Tolerance) -> PipelineOutcome {
    let mut checks = BTreeMap::new();
    let mut witnesses = BTreeMap::new();
    let sample_seed: u64 = rng.random();
    let Some(first) = sample_ppt_channel(3, PPT_SAMPLER_KRAUS, sample_seed, PPT_SAMPLER_ATTEMPTS, tol) else {
        checks.insert("ppt-sampler".into(), false);
        return PipelineOutcome { checks, witnesses };
    };
    witnesses.insert("ppt_sampler_attempts".into(), first.attempts as f64);

    let count = rng.random_range(1..=4);
    let dec = random_rank_two_mixture(3, 3, count, rng);
    let rho = dec.reconstruct();
    let outcome = certify_schmidt2_pipeline(&first.channel, &rho, &dec, tol).map(|cert| {
        let target = first.channel.apply_to_b(&rho).expect("dims match");
        let audit = cert.audit(&target, tol);
        let leaves_ppt = cert
            .components
            .iter()
            .all(|c| is_ppt_state(&c.operator, tol).map(|p| p.flag).unwrap_or(false));
        (cert.verdict, audit.sound, leaves_ppt)
    });
    let ok = matches!(outcome, Ok((Verdict::Certified, true, true)));
    checks.insert("schmidt2-pipeline".into(), ok);

    if let Some(second) = sample_ppt_channel(3, PPT_SAMPLER_KRAUS, sample_seed ^ 0x5bd1_e995, PPT_SAMPLER_ATTEMPTS, tol) {
        let prune = Tolerance::new(DEFAULT_PRUNE_TOL).expect("positive");
        let composed = compose(&first.channel, &second.channel, prune).expect("3 -> 3");
        let w = composed.is_ppt(tol);
        witnesses.insert("ppt_closure_witness".into(), w.witness);
        checks.insert("ppt-closure".into(), w.flag);
    } else {
        checks.insert("ppt-sampler".into(), false);
    }
    PipelineOutcome { checks, witnesses }
}
