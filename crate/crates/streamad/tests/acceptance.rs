//! Acceptance gate: one test per criterion, each printing a single
//! PASS/FAIL/SKIP line (run with `--nocapture` to see the lines for
//! passing tests). Criteria that require the Cardio dataset look for a
//! labeled CSV at $STREAMAD_CARDIO or <repo>/data/cardio.csv and report
//! SKIP when it is absent, since the file cannot be redistributed here.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::path::{Path, PathBuf};

use streamad::combiners::{LabelMethod, LabelSeries, ScoreSeries};
use streamad::detectors::{op_count, DetectorKind, EnsembleConfig, EnsembleDetector, NumericMode};
use streamad::evaluation::{auc_roc, sweep_ensemble};
use streamad::hashing::{jenkins_hash, SlidingCountTable};
use streamad::io::resolve_dataset;
use streamad::num::SeededRng;
use streamad::pipeline::{BuildOverrides, Pipeline, PipelineConfig};
use streamad::{
    combine_labels, gen_synthetic, load_csv, normalize, threshold_labels, DataStream,
};

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn cardio() -> Option<DataStream> {
    let path = std::env::var("STREAMAD_CARDIO")
        .map(PathBuf::from)
        .unwrap_or_else(|_| repo_root().join("data/cardio.csv"));
    if !path.exists() {
        return None;
    }
    load_csv(&path, true).ok()
}

fn skip(criterion: u32, what: &str) {
    println!("criterion {criterion}: SKIP — {what}");
}

fn pass(criterion: u32, what: &str) {
    println!("criterion {criterion}: PASS — {what}");
}

fn cardio_sweep(kind: DetectorKind, stream: &DataStream, r: usize) -> (f64, f64) {
    let seeds: Vec<u64> = (1..=10).collect();
    let cells = sweep_ensemble(kind, stream, &[r], &seeds, 128).unwrap();
    let aucs: Vec<f64> = cells.iter().map(|c| c.auc).collect();
    let mean = aucs.iter().sum::<f64>() / aucs.len() as f64;
    let var = aucs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / aucs.len() as f64;
    (mean, var)
}

#[test]
fn criterion_01_cardio_loda_accuracy() {
    let Some(stream) = cardio() else {
        return skip(1, "Cardio CSV not present (set STREAMAD_CARDIO or add data/cardio.csv)");
    };
    let (mean, _) = cardio_sweep(DetectorKind::Loda, &stream, 35);
    assert!(
        (mean - 0.931).abs() <= 0.04,
        "criterion 1: FAIL — Loda mean AUC {mean:.4} outside 0.931±0.04"
    );
    pass(1, &format!("Loda mean Score-AUC {mean:.4} within 0.931±0.04"));
}

#[test]
fn criterion_02_cardio_rshash_xstream_accuracy() {
    let Some(stream) = cardio() else {
        return skip(2, "Cardio CSV not present (set STREAMAD_CARDIO or add data/cardio.csv)");
    };
    let (loda, _) = cardio_sweep(DetectorKind::Loda, &stream, 35);
    let (rshash, _) = cardio_sweep(DetectorKind::RsHash, &stream, 25);
    let (xstream, _) = cardio_sweep(DetectorKind::XStream, &stream, 20);
    let in_tolerance = (rshash - 0.852).abs() <= 0.06 && (xstream - 0.922).abs() <= 0.06;
    if in_tolerance {
        pass(
            2,
            &format!("RS-Hash {rshash:.4} within 0.852±0.06, xStream {xstream:.4} within 0.922±0.06"),
        );
    } else {
        assert!(
            loda > xstream && xstream > rshash,
            "criterion 2: FAIL — outside tolerance and ordering Loda>{xstream:.4}>{rshash:.4} violated (Loda {loda:.4})"
        );
        pass(
            2,
            &format!("outside tolerance but ordering holds: Loda {loda:.4} > xStream {xstream:.4} > RS-Hash {rshash:.4}"),
        );
    }
}

#[test]
fn criterion_03_cardio_ensemble_convergence() {
    let Some(stream) = cardio() else {
        return skip(3, "Cardio CSV not present (set STREAMAD_CARDIO or add data/cardio.csv)");
    };
    let (mean5, var5) = cardio_sweep(DetectorKind::Loda, &stream, 5);
    let (mean100, var100) = cardio_sweep(DetectorKind::Loda, &stream, 100);
    assert!(
        var100 < var5,
        "criterion 3: FAIL — variance at R=100 ({var100:.6}) not below R=5 ({var5:.6})"
    );
    assert!(
        mean100 >= mean5 - 0.005,
        "criterion 3: FAIL — mean at R=100 ({mean100:.4}) below R=5 ({mean5:.4}) - 0.005"
    );
    pass(
        3,
        &format!("var {var5:.6}->{var100:.6}, mean {mean5:.4}->{mean100:.4} over 10 seeds"),
    );
}

#[test]
fn criterion_04_or_combination_recall_superset() {
    let stream = gen_synthetic(1500, 5, 0.08, 21).unwrap();
    let truth = stream.labels().unwrap();
    let mut label_series: Vec<LabelSeries> = Vec::new();
    for (kind, r, seed) in [
        (DetectorKind::Loda, 10, 1u64),
        (DetectorKind::RsHash, 8, 2),
        (DetectorKind::XStream, 6, 3),
    ] {
        let mut cfg = EnsembleConfig::new(kind, 5);
        cfg.r = r;
        cfg.seed = seed;
        let mut det = EnsembleDetector::new(cfg).unwrap();
        det.calibrate(&stream.samples[..128]).unwrap();
        let raw = det.process_stream(&stream.samples).unwrap();
        let norm = normalize(&ScoreSeries::new("s", raw)).unwrap();
        label_series.push(threshold_labels(&norm, 0.08).unwrap());
    }
    let merged = combine_labels(LabelMethod::Or, &label_series).unwrap();
    // Exact superset: every flagged index of every constituent is flagged
    // by the OR, hence per-constituent recall can only grow.
    for (k, series) in label_series.iter().enumerate() {
        for (i, (&m, &c)) in merged.values.iter().zip(&series.values).enumerate() {
            assert!(
                m >= c,
                "criterion 4: FAIL — OR missed index {i} flagged by constituent {k}"
            );
        }
    }
    let recall = |labels: &[u8]| {
        let tp = labels
            .iter()
            .zip(&truth)
            .filter(|&(&l, &t)| l == 1 && t == 1)
            .count() as f64;
        let pos = truth.iter().filter(|&&t| t == 1).count() as f64;
        tp / pos
    };
    let merged_recall = recall(&merged.values);
    for series in &label_series {
        assert!(merged_recall >= recall(&series.values));
    }
    pass(
        4,
        &format!("OR-combined flags are a superset of all 3 constituents (recall {merged_recall:.3})"),
    );
}

#[test]
fn criterion_05_cms_oracle_equivalence() {
    let modulus = 128usize;
    let window = 128usize;
    let keys: Vec<i32> = (0..500).collect();
    for rows in [1usize, 2] {
        // Column of each key in each row, fixed by the hash.
        let cols: Vec<Vec<usize>> = keys
            .iter()
            .map(|&k| {
                (1..=rows)
                    .map(|row| (jenkins_hash(&[k], row as u32).unwrap() % modulus as u32) as usize)
                    .collect()
            })
            .collect();
        let mut table = SlidingCountTable::new(rows, modulus, window).unwrap();
        let mut rng = SeededRng::new(2024 + rows as u64);
        let mut ring: VecDeque<usize> = VecDeque::new(); // key indices in window
        let mut exact = vec![0u32; keys.len()];
        for step in 0..10_000usize {
            let ki = (rng.next_u64() % keys.len() as u64) as usize;
            table.admit(&cols[ki]).unwrap();
            if ring.len() == window {
                exact[ring.pop_front().unwrap()] -= 1;
            }
            ring.push_back(ki);
            exact[ki] += 1;

            if step % 250 != 0 {
                continue;
            }
            // Exact per-cell sums from per-key exact counts.
            let mut cell: Vec<Vec<u32>> = vec![vec![0; modulus]; rows];
            for (i, &c) in exact.iter().enumerate() {
                for (row, &col) in cols[i].iter().enumerate() {
                    cell[row][col] += c;
                }
            }
            for (i, &count) in exact.iter().enumerate() {
                let estimate = table.query_min(&cols[i]).unwrap();
                assert!(
                    estimate >= count,
                    "criterion 5: FAIL — estimate {estimate} < exact {count} (w={rows})"
                );
                // A row without collisions carries exactly this key's count.
                let collision_free = cols[i]
                    .iter()
                    .enumerate()
                    .any(|(row, &col)| cell[row][col] == count);
                if collision_free {
                    assert!(
                        estimate == count,
                        "criterion 5: FAIL — collision-free key estimated {estimate} != {count}"
                    );
                }
            }
        }
    }
    pass(5, "CMS dominates the exact sliding count and is exact without row collisions (w=1,2)");
}

#[test]
fn criterion_06_op_count_formulas() {
    let d = 3usize;
    for kind in [DetectorKind::Loda, DetectorKind::RsHash, DetectorKind::XStream] {
        for n in 1..=10usize {
            let mut cfg = EnsembleConfig::new(kind, d);
            cfg.r = 4;
            cfg.seed = 5;
            let mut det = EnsembleDetector::new(cfg).unwrap();
            let stream = gen_synthetic(n.max(2), d, 0.2, 9).unwrap();
            det.calibrate(&stream.samples[..n.max(2).min(stream.len())])
                .unwrap();
            det.reset();
            for s in stream.samples.iter().take(n) {
                det.process(&s.features).unwrap();
            }
            let cfg = det.config();
            let formula = op_count(
                kind,
                n as u64,
                cfg.r as u64,
                d as u64,
                cfg.cms_rows as u64,
                cfg.k as u64,
            )
            .unwrap();
            assert_eq!(
                det.ops_executed(),
                formula,
                "criterion 6: FAIL — {kind:?} N={n} instrumented != formula"
            );
        }
    }
    pass(6, "instrumented counters equal the analytic formulas for all detectors, N=1..10");
}

fn run_config(name: &str, parallel: bool) -> BTreeMap<String, Vec<f64>> {
    let cfg = PipelineConfig::from_path(repo_root().join("configs").join(name)).unwrap();
    let mut streams = HashMap::new();
    for reference in cfg.bindings.values() {
        if !streams.contains_key(reference) {
            streams.insert(
                reference.clone(),
                resolve_dataset(reference, &repo_root().join("data")).unwrap(),
            );
        }
    }
    let overrides = BuildOverrides {
        parallel: Some(parallel),
        ..Default::default()
    };
    let mut pipeline = Pipeline::from_config(&cfg, &streams, overrides).unwrap();
    assert!(pipeline.validate().is_empty(), "{name} must validate");
    pipeline.calibrate(&streams, 128).unwrap();
    pipeline.run(&streams).unwrap()
}

#[test]
fn criterion_07_parallel_equals_sequential_for_example_configs() {
    for name in ["fig-a.toml", "fig-b.toml", "fig-c.toml", "fig-d.toml"] {
        let seq = run_config(name, false);
        let par = run_config(name, true);
        assert_eq!(
            seq, par,
            "criterion 7: FAIL — {name} parallel differs from sequential"
        );
    }
    pass(7, "configs (a)-(d): parallel sink series bit-identical to sequential");
}

#[test]
fn criterion_08_slot_partition_equivalence() {
    let stream = gen_synthetic(2000, 8, 0.05, 301).unwrap();
    let master_seed = 7u64;

    // Monolithic R=245 ensemble.
    let mut cfg = EnsembleConfig::new(DetectorKind::Loda, 8);
    cfg.r = 245;
    cfg.seed = master_seed;
    let mut mono = EnsembleDetector::new(cfg).unwrap();
    mono.calibrate(&stream.samples[..128]).unwrap();
    let mono_scores = mono.process_stream(&stream.samples).unwrap();

    // Seven R=35 partitions with matched sub-seed ranges.
    let mut parts = Vec::new();
    for slot in 0..7u64 {
        let mut cfg = EnsembleConfig::new(DetectorKind::Loda, 8);
        cfg.r = 35;
        cfg.seed = master_seed;
        cfg.seed_offset = slot * 35;
        let mut det = EnsembleDetector::new(cfg).unwrap();
        det.calibrate(&stream.samples[..128]).unwrap();
        parts.push(det.process_stream(&stream.samples).unwrap());
    }
    let mut worst: f64 = 0.0;
    for i in 0..stream.len() {
        let avg = parts.iter().map(|p| p[i]).sum::<f64>() / 7.0;
        worst = worst.max((avg - mono_scores[i]).abs());
        assert!(
            (avg - mono_scores[i]).abs() <= 1e-9,
            "criterion 8: FAIL — sample {i}: partition mean {avg} vs monolithic {}",
            mono_scores[i]
        );
    }
    pass(
        8,
        &format!("7x35 slot average equals R=245 ensemble (max |diff| {worst:.2e})"),
    );
}

#[test]
fn criterion_09_fixed_point_auc_parity() {
    let Some(stream) = cardio() else {
        return skip(9, "Cardio CSV not present (set STREAMAD_CARDIO or add data/cardio.csv)");
    };
    let truth = stream.labels().unwrap();
    let mut aucs = Vec::new();
    for mode in [NumericMode::Real, NumericMode::Fixed] {
        let mut cfg = EnsembleConfig::new(DetectorKind::Loda, stream.dimension);
        cfg.r = 35;
        cfg.seed = 1;
        cfg.mode = mode;
        let mut det = EnsembleDetector::new(cfg).unwrap();
        det.calibrate(&stream.samples[..128]).unwrap();
        let raw = det.process_stream(&stream.samples).unwrap();
        aucs.push(auc_roc(&raw, &truth).unwrap());
    }
    let diff = (aucs[0] - aucs[1]).abs();
    assert!(
        diff < 0.01,
        "criterion 9: FAIL — real AUC {:.4} vs fixed AUC {:.4}",
        aucs[0],
        aucs[1]
    );
    pass(
        9,
        &format!("Loda Q16.16 AUC {:.4} vs real {:.4} (diff {diff:.5})", aucs[1], aucs[0]),
    );
}

#[test]
fn criterion_10_auc_pairwise_oracle() {
    let mut rng = SeededRng::new(777);
    for case in 0..1000 {
        let n = 4 + (rng.next_u64() % 197) as usize;
        let mut labels: Vec<u8> = (0..n).map(|_| (rng.next_u64() % 2) as u8).collect();
        labels[0] = 0;
        labels[1] = 1;
        // Coarse value grid forces tie groups.
        let levels = 2 + (rng.next_u64() % 12);
        let scores: Vec<f64> = (0..n)
            .map(|_| (rng.next_u64() % levels) as f64 / levels as f64)
            .collect();

        let got = auc_roc(&scores, &labels).unwrap();
        let mut total = 0.0;
        let mut pairs = 0u64;
        for i in 0..n {
            if labels[i] != 1 {
                continue;
            }
            for j in 0..n {
                if labels[j] != 0 {
                    continue;
                }
                pairs += 1;
                total += if scores[i] > scores[j] {
                    1.0
                } else if scores[i] == scores[j] {
                    0.5
                } else {
                    0.0
                };
            }
        }
        let oracle = total / pairs as f64;
        assert!(
            (got - oracle).abs() < 1e-10,
            "criterion 10: FAIL — case {case}: rank {got} vs pairwise {oracle}"
        );
    }
    pass(10, "rank-based AUC equals exhaustive pairwise AUC on 1000 random instances");
}

#[test]
fn criterion_11_hot_swap_suffix_equivalence() {
    let stream = gen_synthetic(1200, 4, 0.05, 13).unwrap();
    let t = 600usize;
    let streams: HashMap<String, DataStream> =
        HashMap::from([("ds".to_string(), stream.clone())]);

    let make_detector = |kind: DetectorKind, r: usize, seed: u64| {
        let mut cfg = EnsembleConfig::new(kind, 4);
        cfg.r = r;
        cfg.seed = seed;
        let mut det = EnsembleDetector::new(cfg).unwrap();
        det.calibrate(&stream.samples[..128]).unwrap();
        det
    };
    let make_pipeline = |det: EnsembleDetector| {
        let slot = streamad::Slot::new("RP-1", streamad::SlotContent::Detector(det));
        let bindings = BTreeMap::from([("RP-1".to_string(), "ds".to_string())]);
        let routing = streamad::RoutingTable {
            edges: vec![],
            sinks: vec![streamad::Sink {
                from: "RP-1".into(),
                channel: "out".into(),
            }],
        };
        Pipeline::new(vec![slot], bindings, routing)
    };

    // Swapped pipeline: Loda up to t, RS-Hash afterwards.
    let mut swapped = make_pipeline(make_detector(DetectorKind::Loda, 6, 1));
    swapped.run_range(&streams, 0, t).unwrap();
    swapped
        .swap_slot(
            "RP-1",
            streamad::SlotContent::Detector(make_detector(DetectorKind::RsHash, 6, 2)),
        )
        .unwrap();
    let suffix = swapped.run_range(&streams, t, stream.len()).unwrap();

    // Fresh pipeline with the new content started at t.
    let mut fresh = make_pipeline(make_detector(DetectorKind::RsHash, 6, 2));
    let fresh_suffix = fresh.run_range(&streams, t, stream.len()).unwrap();

    assert_eq!(
        suffix, fresh_suffix,
        "criterion 11: FAIL — post-swap outputs differ from a fresh pipeline started at t"
    );
    pass(11, "post-swap suffix identical to a fresh pipeline started at the swap index");
}

#[test]
fn criterion_12_hardware_metrics_out_of_scope() {
    // Clock rates, hardware-vs-CPU speedup factors, reconfiguration
    // latencies and power draw are properties of a hardware deployment and
    // are not reproducible here; the bench and swap-demo commands report
    // the software analogs (wall time, analytic op totals, op rate, swap
    // duration) without pass/fail gates. Reporting-only criterion.
    let stream = gen_synthetic(300, 3, 0.1, 5).unwrap();
    let mut cfg = EnsembleConfig::new(DetectorKind::Loda, 3);
    cfg.r = 5;
    let report = streamad::bench_detector(cfg, &stream).unwrap();
    pass(
        12,
        &format!(
            "hardware figures out of scope; software analogs reported ({} ops, {:.2e} ops/s)",
            report.op_total, report.op_rate
        ),
    );
}
