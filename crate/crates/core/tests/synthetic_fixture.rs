//! Frozen raw-cosine baseline and planted-signal ceiling for the default
//! synthetic corpus. Set `JETR_WRITE_FIXTURES=1` to regenerate.

mod common;

use std::path::PathBuf;

use jetr_core::pipeline::evaluate;
use jetr_core::{synth_generate, Split, SyntheticConfig};
use serde_json::{json, Value};

fn fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/synthetic_baseline.json")
}

#[test]
fn baseline_and_ceiling_match_fixture() {
    let cfg = SyntheticConfig::default();
    let corpus = synth_generate(&cfg).unwrap();
    let (base_ndcg, base_mrr) = common::raw_baseline(&corpus, Split::Validation, 10);
    let (ceil_ndcg, ceil_mrr) = common::signal_ceiling(&cfg, &corpus, Split::Validation, 10);
    if std::env::var_os("JETR_WRITE_FIXTURES").is_some() {
        let v = json!({
            "split": "validation",
            "k": 10,
            "synthetic_config": cfg,
            "baseline": {"ndcg_at_10": base_ndcg, "mrr": base_mrr},
            "ceiling": {"ndcg_at_10": ceil_ndcg, "mrr": ceil_mrr},
        });
        std::fs::write(
            fixture_path(),
            serde_json::to_string_pretty(&v).unwrap() + "\n",
        )
        .unwrap();
    }
    let fixture: Value =
        serde_json::from_str(&std::fs::read_to_string(fixture_path()).unwrap()).unwrap();
    assert_eq!(
        fixture["synthetic_config"],
        serde_json::to_value(&cfg).unwrap()
    );
    let f = |a: &str, b: &str| fixture[a][b].as_f64().unwrap();
    assert!((f("baseline", "ndcg_at_10") - base_ndcg).abs() < 1e-12);
    assert!((f("baseline", "mrr") - base_mrr).abs() < 1e-12);
    assert!((f("ceiling", "ndcg_at_10") - ceil_ndcg).abs() < 1e-12);
    assert!((f("ceiling", "mrr") - ceil_mrr).abs() < 1e-12);
    assert!(
        ceil_ndcg > base_ndcg + 0.2,
        "planted signal must beat raw cosine clearly"
    );

    let raw = evaluate(&corpus, Split::Validation, None, 10)
        .unwrap()
        .raw
        .report;
    assert!((raw.ndcg_at_k - base_ndcg).abs() < 1e-12);
    assert!((raw.mrr - base_mrr).abs() < 1e-12);
}

#[test]
fn noise_free_signal_ceiling_is_perfect() {
    let cfg = SyntheticConfig {
        noise_scale: 0.0,
        ..Default::default()
    };
    let corpus = synth_generate(&cfg).unwrap();
    for split in [Split::Train, Split::Validation, Split::Test] {
        let (ndcg, mrr) = common::signal_ceiling(&cfg, &corpus, split, 10);
        assert_eq!(ndcg, 1.0);
        assert_eq!(mrr, 1.0);
    }
}
