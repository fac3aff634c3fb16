//! Byte-identical outputs across repeated runs and JSON round trips.

use pptsq::fixtures::{gamma_computed, example_channel, rho2, verify_worked_example};
use pptsq::suite::{run_suite, SuiteConfig};
use pptsq::{certify_block_split, BipartiteOperator, KrausChannel, SeparabilityCertificate, Tolerance};

#[test]
fn verification_report_json_is_stable() {
    let a = serde_json::to_string(&verify_worked_example(Tolerance::default())).unwrap();
    let b = serde_json::to_string(&verify_worked_example(Tolerance::default())).unwrap();
    assert_eq!(a, b);
}

#[test]
fn certificate_json_round_trips() {
    let cert = certify_block_split(&gamma_computed(), Tolerance::default()).unwrap();
    let text = serde_json::to_string(&cert).unwrap();
    let back: SeparabilityCertificate = serde_json::from_str(&text).unwrap();
    assert_eq!(back, cert);
    assert_eq!(serde_json::to_string(&back).unwrap(), text);
    let positions: Vec<_> = ["\"verdict\"", "\"method\"", "\"frame\"", "\"witnesses\"", "\"components\""]
        .iter()
        .map(|k| text.find(k).unwrap())
        .collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn fixture_json_round_trips() {
    let ch = example_channel();
    let back: KrausChannel = serde_json::from_str(&serde_json::to_string(&ch).unwrap()).unwrap();
    assert_eq!(back, ch);
    let rho = rho2();
    let back: BipartiteOperator = serde_json::from_str(&serde_json::to_string(&rho).unwrap()).unwrap();
    assert_eq!(back, rho);
}

#[test]
fn suite_is_reproducible_across_runs() {
    let config = SuiteConfig { trials: 6, dim: 2, kraus: 3, seed: 17, tolerance: 1e-9 };
    let a = serde_json::to_string(&run_suite(config).unwrap()).unwrap();
    let b = serde_json::to_string(&run_suite(config).unwrap()).unwrap();
    assert_eq!(a, b);
}
