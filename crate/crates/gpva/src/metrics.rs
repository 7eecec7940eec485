//! Throughput metrics: assisted wall time against the manual baseline of a
//! fixed number of seconds per item.

use std::collections::BTreeMap;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use chrono::{TimeZone, Utc};
use gpva_core::attrs::AttrValue;
use gpva_core::intake::{parse_application, Application, LineItem};
use gpva_core::kb::KnowledgeBase;
use gpva_core::verify::{Status, VerificationReport};
use serde::{Deserialize, Serialize};

use crate::engine::Verifier;

const SAMPLE_APP: &str = include_str!("../fixtures/sample_application.txt");
const SAMPLE_CORRECTED: &str = include_str!("../fixtures/sample_corrected.txt");

/// Items per synthetic application in [`simulate_throughput`].
pub const SIMULATION_BATCH: usize = 25;

/// `100 × (1 − wall / baseline)` clamped to `[0, 100]`, and whether it is
/// defined (a zero baseline reports 0 with the flag cleared).
pub fn reduction_pct(wall_seconds: f64, baseline_seconds: f64) -> (f64, bool) {
    if baseline_seconds <= 0.0 {
        return (0.0, false);
    }
    ((100.0 * (1.0 - wall_seconds / baseline_seconds)).clamp(0.0, 100.0), true)
}

fn status_counts() -> BTreeMap<String, u64> {
    Status::ALL.iter().map(|s| (s.as_str().to_string(), 0)).collect()
}

/// Latency summary in seconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub count: u64,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub p50: f64,
    pub p95: f64,
}

impl LatencyStats {
    /// Nearest-rank percentiles over `samples`.
    pub fn of(samples: &[f64]) -> Self {
        if samples.is_empty() {
            return Self::default();
        }
        let mut s = samples.to_vec();
        s.sort_by(f64::total_cmp);
        let rank = |p: f64| s[((p * s.len() as f64).ceil() as usize).clamp(1, s.len()) - 1];
        Self {
            count: s.len() as u64,
            min: s[0],
            max: s[s.len() - 1],
            mean: s.iter().sum::<f64>() / s.len() as f64,
            p50: rank(0.5),
            p95: rank(0.95),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSnapshot {
    pub items_verified: u64,
    pub applications_verified: u64,
    pub wall_seconds_assisted: f64,
    pub manual_seconds_per_item: f64,
    pub manual_baseline_seconds: f64,
    pub reduction_pct: f64,
    /// False when nothing has been verified yet (the reduction is then 0).
    pub reduction_defined: bool,
    pub findings_by_status: BTreeMap<String, u64>,
    pub per_application_latency: LatencyStats,
}

#[derive(Debug, Default)]
struct Totals {
    items: u64,
    wall: Duration,
    by_status: BTreeMap<String, u64>,
    latencies: Vec<f64>,
}

/// Accumulates verification runs. Reading a snapshot has no side effects.
#[derive(Debug, Default)]
pub struct MetricsRecorder {
    totals: Mutex<Totals>,
}

impl MetricsRecorder {
    pub fn record(&self, report: &VerificationReport, wall: Duration) {
        let mut t = self.totals.lock().unwrap_or_else(|e| e.into_inner());
        t.items += report.findings.len() as u64;
        t.wall += wall;
        for f in &report.findings {
            *t.by_status.entry(f.status.as_str().to_string()).or_default() += 1;
        }
        t.latencies.push(wall.as_secs_f64());
    }

    pub fn snapshot(&self, manual_seconds_per_item: f64) -> MetricsSnapshot {
        let t = self.totals.lock().unwrap_or_else(|e| e.into_inner());
        let baseline = t.items as f64 * manual_seconds_per_item;
        let wall = t.wall.as_secs_f64();
        let (reduction, defined) = reduction_pct(wall, baseline);
        let mut by_status = status_counts();
        by_status.extend(t.by_status.iter().map(|(k, v)| (k.clone(), *v)));
        MetricsSnapshot {
            items_verified: t.items,
            applications_verified: t.latencies.len() as u64,
            wall_seconds_assisted: wall,
            manual_seconds_per_item,
            manual_baseline_seconds: baseline,
            reduction_pct: reduction,
            reduction_defined: defined,
            findings_by_status: by_status,
            per_application_latency: LatencyStats::of(&t.latencies),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputReport {
    pub n_items: usize,
    pub applications: usize,
    pub wall_seconds: f64,
    pub assisted_minutes: f64,
    pub manual_seconds_per_item: f64,
    pub manual_baseline_seconds: f64,
    pub manual_baseline_minutes: f64,
    pub reduction_pct: f64,
    pub reduction_defined: bool,
    pub findings_by_status: BTreeMap<String, u64>,
}

fn templates() -> Vec<LineItem> {
    let mut items: Vec<LineItem> = Vec::new();
    for doc in [SAMPLE_APP, SAMPLE_CORRECTED] {
        let app = parse_application(doc.as_bytes()).expect("bundled fixture parses").application;
        items.extend(app.items);
    }
    let mut small = items[1].clone();
    small.description = String::from("Woven cotton Handkerchief, size 60cm x 60cm");
    small.attributes.insert(String::from("width_cm"), AttrValue::Number(60.0));
    small.attributes.insert(String::from("height_cm"), AttrValue::Number(60.0));
    items.push(small);
    let mut hanky = items[1].clone();
    hanky.description = String::from("cotton hanky");
    items.push(hanky);
    items
}

/// `n` synthetic line items cycled from the bundled application fixtures,
/// indexed from 1 within each batch of [`SIMULATION_BATCH`].
pub fn synthetic_applications(n: usize) -> Vec<Application> {
    let templates = templates();
    let submitted_at = Utc.with_ymd_and_hms(2024, 5, 1, 9, 0, 0).unwrap();
    (0..n)
        .collect::<Vec<_>>()
        .chunks(SIMULATION_BATCH)
        .enumerate()
        .map(|(batch, ids)| Application {
            app_id: format!("SIM-{:06}", batch + 1),
            revision: 1,
            applicant: String::from("Synthetic Applicant"),
            submitted_at,
            items: ids
                .iter()
                .enumerate()
                .map(|(j, i)| LineItem { index: j as u32 + 1, ..templates[i % templates.len()].clone() })
                .collect(),
            field_confidence: BTreeMap::new(),
        })
        .collect()
}

/// Verifies `n` synthetic items and compares the wall time with the manual
/// baseline of `n × manual_seconds_per_item`.
pub fn simulate_throughput(
    kb: &KnowledgeBase,
    verifier: &Verifier,
    n: usize,
    manual_seconds_per_item: f64,
) -> ThroughputReport {
    let apps = synthetic_applications(n);
    let mut by_status = status_counts();
    let start = Instant::now();
    for app in &apps {
        let report = verifier.verify(kb, app);
        for f in &report.findings {
            *by_status.entry(f.status.as_str().to_string()).or_default() += 1;
        }
    }
    let wall = start.elapsed().as_secs_f64();
    let baseline = n as f64 * manual_seconds_per_item;
    let (reduction, defined) = reduction_pct(wall, baseline);
    ThroughputReport {
        n_items: n,
        applications: apps.len(),
        wall_seconds: wall,
        assisted_minutes: wall / 60.0,
        manual_seconds_per_item,
        manual_baseline_seconds: baseline,
        manual_baseline_minutes: baseline / 60.0,
        reduction_pct: reduction,
        reduction_defined: defined,
        findings_by_status: by_status,
    }
}
