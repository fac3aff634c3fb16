//! Acceptance criteria. Each test prints one `ACCEPTANCE <n> PASS|FAIL` line
//! (visible with `--nocapture`) and fails if the criterion does not hold.

mod common;

use std::time::Instant;

use pptsq::channels::{compose, random_cptp, sample_ppt_channel, DEFAULT_PRUNE_TOL};
use pptsq::fixtures::{
    gamma_computed, example_channel, rho2, rho3, rho4, sigma_two_ways, verify_worked_example,
};
use pptsq::random::{
    derive_seed, random_entangled_two_qubit, random_product_mixture, random_rank_two_mixture,
    rng_from_seed,
};
use pptsq::separability::{
    certify_block_split, certify_convex_split, certify_peres_horodecki, certify_schmidt2_pipeline,
    Frame, Verdict,
};
use pptsq::suite::PPT_SAMPLER_KRAUS;
use pptsq::{hermitian_eigenvalues, is_ppt_state, BipartiteOperator, ComplexMatrix, Status, Subsystem, Tolerance};
use rand::Rng;

use common::oracle_ppt;

fn tol() -> Tolerance {
    Tolerance::default()
}

fn report(n: u32, name: &str, ok: bool, detail: String) {
    println!("ACCEPTANCE {n:>2} {} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} ({name}) failed: {detail}");
}

#[test]
fn criterion_01_trace_preservation() {
    let tp = example_channel().is_trace_preserving(Tolerance::new(1e-12).unwrap());
    report(1, "trace preservation", tp.flag && tp.defect < 1e-12, format!("defect {:e}", tp.defect));
}

#[test]
fn criterion_02_composition_count() {
    let phi = example_channel();
    let composed = compose(&phi, &phi, Tolerance::new(1e-12).unwrap()).unwrap();
    report(2, "composition count", composed.len() == 44, format!("{} operators", composed.len()));
}

#[test]
fn criterion_03_sigma_consistency() {
    let (via_filter, via_channel) = sigma_two_ways();
    let distance = via_filter.distance(&via_channel);
    let marginal = via_channel
        .partial_trace(Subsystem::A)
        .distance(&ComplexMatrix::identity(4));
    report(
        3,
        "sigma consistency",
        distance < 1e-10 && marginal < 1e-10,
        format!("distance {distance:e}, marginal defect {marginal:e}"),
    );
}

#[test]
fn criterion_04_ppt_fixtures() {
    let min_pt = |x: &BipartiteOperator| hermitian_eigenvalues(x.partial_transpose().matrix(), tol()).unwrap()[0];
    let rho = min_pt(&rho2());
    let sigma = min_pt(&sigma_two_ways().1);
    let choi = min_pt(&example_channel().choi());
    report(
        4,
        "PPT fixtures",
        rho >= -1e-10 && sigma >= -1e-10 && choi >= -1e-10,
        format!("min eig rho2^G {rho:e}, sigma^G {sigma:e}, Choi(phi)^G {choi:e}"),
    );
}

#[test]
fn criterion_05_example_separability() {
    let gamma = gamma_computed();
    let cert = certify_block_split(&gamma, tol()).unwrap();
    assert_eq!(cert.frame, Frame::PartialTranspose);
    let mut sum = BipartiteOperator::zeros(4, 4);
    for c in &cert.components {
        sum = sum.try_add(&c.embedded().unwrap()).unwrap();
    }
    let residual = sum.distance(&gamma.partial_transpose());
    let leaves_agree = cert
        .components
        .iter()
        .filter(|c| c.operator.dims() == (2, 2))
        .all(|c| oracle_ppt(&c.operator, 1e-9));
    report(
        5,
        "example separability",
        cert.verdict == Verdict::Certified && residual < 1e-8 && leaves_agree,
        format!(
            "verdict {}, {} components, residual {residual:e}, oracle agrees {leaves_agree}",
            cert.verdict,
            cert.components.len()
        ),
    );
}

#[test]
fn criterion_06_convex_split_pathway() {
    let phi = example_channel();
    let parts: Vec<_> = [rho3(), rho4()]
        .iter()
        .map(|r| {
            let image = phi.apply_to_b(r).unwrap();
            let cert = certify_block_split(&image, tol()).unwrap();
            (image, cert)
        })
        .collect();
    let verdicts: Vec<_> = parts.iter().map(|(_, c)| c.verdict).collect();
    let total = phi.apply_to_b(&rho2()).unwrap();
    let cert = certify_convex_split(&parts, Some(&total), tol()).unwrap();
    let audit = cert.audit(&total, tol());
    report(
        6,
        "convex split of rho3/rho4",
        cert.is_certified() && audit.sound && verdicts.iter().all(|v| *v == Verdict::Certified),
        format!("part verdicts {verdicts:?}, residual {:?}", audit.reconstruction_residual),
    );
}

#[test]
fn criterion_07_choi_composition_identity() {
    let prune = Tolerance::new(DEFAULT_PRUNE_TOL).unwrap();
    let mut trials = 0;
    let mut worst: f64 = 0.0;
    for d in 1..=4 {
        for k in 1..=4 {
            for rep in 0..7u64 {
                let base = derive_seed(2024, (d * 100 + k * 10) as u64 + rep);
                let f = random_cptp(d, k, base);
                let g = random_cptp(d, 1 + (k + rep as usize) % 4, base ^ 0xA5A5);
                let lhs = compose(&f, &g, prune).unwrap().choi();
                let rhs = f.apply_to_b(&g.choi()).unwrap();
                worst = worst.max(lhs.distance(&rhs));
                trials += 1;
            }
        }
    }
    report(
        7,
        "Choi composition identity",
        trials >= 100 && worst < 1e-9,
        format!("{trials} trials, worst gap {worst:e}"),
    );
}

#[test]
fn criterion_08_peres_horodecki_soundness() {
    let mut rng = rng_from_seed(808);
    let mut certified = 0;
    let mut oracle_agrees = true;
    for _ in 0..200 {
        let count = rng.random_range(1..=6);
        let rho = random_product_mixture(2, 3, count, &mut rng).reconstruct();
        let cert = certify_peres_horodecki(&rho, tol()).unwrap();
        if cert.verdict == Verdict::Certified && cert.audit(&rho, tol()).sound {
            certified += 1;
        }
        oracle_agrees &= oracle_ppt(&rho, 1e-9) == (cert.verdict == Verdict::Certified);
    }
    let mut refuted = 0;
    for _ in 0..200 {
        let rho = random_entangled_two_qubit(0.1, &mut rng).projector();
        let cert = certify_peres_horodecki(&rho, tol()).unwrap();
        if cert.verdict == Verdict::Refuted && cert.witnesses["min_eigenvalue_pt"] < -1e-9 {
            refuted += 1;
        }
        oracle_agrees &= !oracle_ppt(&rho, 1e-9);
    }
    report(
        8,
        "Peres-Horodecki soundness",
        certified == 200 && refuted == 200 && oracle_agrees,
        format!("{certified}/200 mixtures certified, {refuted}/200 entangled refuted, oracle agrees {oracle_agrees}"),
    );
}

#[test]
fn criterion_09_schmidt_rank_two_pipeline() {
    let trials = 50;
    let mut certified = 0;
    let mut leaves_ppt = 0;
    let mut total_attempts = 0;
    let mut failures = Vec::new();
    for t in 0..trials {
        let seed = derive_seed(909, t);
        let mut rng = rng_from_seed(seed);
        let sample = sample_ppt_channel(3, PPT_SAMPLER_KRAUS, rng.random(), 2000, tol())
            .expect("PPT channel within the draw budget");
        total_attempts += sample.attempts;
        let count = rng.random_range(1..=4);
        let dec = random_rank_two_mixture(3, 3, count, &mut rng);
        let rho = dec.reconstruct();
        let cert = certify_schmidt2_pipeline(&sample.channel, &rho, &dec, tol()).unwrap();
        let target = sample.channel.apply_to_b(&rho).unwrap();
        if cert.verdict == Verdict::Certified && cert.audit(&target, tol()).sound {
            certified += 1;
        } else {
            failures.push(seed);
        }
        let ok = cert.components.iter().all(|c| {
            c.operator.dim_a() <= 2
                && is_ppt_state(&c.operator, tol()).unwrap().flag
                && oracle_ppt(&c.operator, 1e-9)
        });
        if ok {
            leaves_ppt += 1;
        }
    }
    report(
        9,
        "Schmidt-rank-two pipeline on qutrits",
        certified == trials && leaves_ppt == trials,
        format!(
            "{certified}/{trials} certified, {leaves_ppt}/{trials} with PPT components, \
             sampler acceptance {:.2}, failing seeds {failures:?}",
            trials as f64 / total_attempts as f64
        ),
    );
}

#[test]
fn criterion_10_printed_diffs_are_informational() {
    let start = Instant::now();
    let report_ = verify_worked_example(tol());
    let elapsed = start.elapsed();
    let gamma = report_.check("gamma-printed-diff").unwrap();
    let products = report_.check("product-list-diff").unwrap();
    let mut flipped = report_.clone();
    for c in flipped.checks.iter_mut().filter(|c| c.informational) {
        c.status = Status::Fail;
    }
    let independent = report_.passed() && flipped.passed();
    report(
        10,
        "printed-coefficient diffs",
        gamma.informational && products.informational && !gamma.diffs.is_empty() && independent,
        format!(
            "{} gamma coordinates, {} product-list coordinates differ; status independent {independent}; ran in {elapsed:?}",
            gamma.diffs.len(),
            products.diffs.len()
        ),
    );
}

#[test]
fn worked_example_gating_checks_pass() {
    let r = verify_worked_example(tol());
    for c in r.checks.iter().take(9) {
        assert_eq!(c.status, Status::Pass, "{}: {}", c.name, c.note);
    }
    assert!(r.passed());
}
