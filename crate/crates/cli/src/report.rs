//! JSON report layout (`ted-report/1`).
//!
//! Everything except the `timing` object is a pure function of the inputs
//! and the configuration, so repeated runs produce identical bytes there.

use serde::Serialize;
use ted_core::metrics::Baseline;
use ted_core::{rand_index, variation_of_information, ErrorTag, EvalMask, Label, LabelVolume, TedReport, Voi};

pub const SCHEMA: &str = "ted-report/1";

#[derive(Debug, Serialize)]
pub struct ConfigEcho {
    pub gt: String,
    pub proposal: String,
    pub format: String,
    pub resolution: [f64; 3],
    pub threshold_nm: f64,
    pub alpha: f64,
    pub beta: f64,
    pub background: Option<Label>,
    pub allow_background_relabel: bool,
    pub max_nodes: u64,
    pub max_seconds: Option<f64>,
}

#[derive(Debug, Serialize)]
struct Partners {
    label: Label,
    partners: Vec<Label>,
}

#[derive(Debug, Serialize)]
pub struct RelabeledMetrics {
    pub rand_index: Option<f64>,
    pub voi: Option<Voi>,
}

impl RelabeledMetrics {
    pub fn compute(gt: &LabelVolume, relabeled: &LabelVolume) -> Self {
        Self { rand_index: rand_index(gt, relabeled).ok(), voi: variation_of_information(gt, relabeled).ok() }
    }
}

#[derive(Debug, Serialize)]
struct Solver {
    optimal: bool,
    gap: f64,
    nodes: u64,
    components: usize,
    regions: usize,
}

#[derive(Debug, Default, Serialize)]
struct ErrorSummary {
    split_locations: usize,
    merge_locations: usize,
    both_locations: usize,
}

#[derive(Debug, Serialize)]
struct Region<'a> {
    gt_label: Label,
    prop_label: Label,
    candidates: &'a [Label],
    size: usize,
    assigned: Label,
    tag: ErrorTag,
}

#[derive(Debug, Serialize)]
struct Outputs {
    relabeled: Option<String>,
    errors: Option<String>,
}

#[derive(Debug, Serialize)]
struct Timing {
    wall_seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct ReportJson<'a> {
    schema: &'static str,
    config: ConfigEcho,
    /// Locations outside the ground-truth background.
    evaluated_locations: usize,
    masked_locations: usize,
    ted_value: f64,
    splits: u64,
    merges: u64,
    split_pairs: Vec<Partners>,
    merge_pairs: Vec<Partners>,
    baseline: &'a Baseline,
    relabeled_metrics: RelabeledMetrics,
    solver: Solver,
    errors: ErrorSummary,
    regions: Vec<Region<'a>>,
    outputs: Outputs,
    timing: Timing,
}

fn partners(pairs: &[(Label, Vec<Label>)]) -> Vec<Partners> {
    pairs.iter().map(|(label, p)| Partners { label: *label, partners: p.clone() }).collect()
}

impl<'a> ReportJson<'a> {
    pub fn new(
        config: ConfigEcho,
        gt: &LabelVolume,
        report: &'a TedReport,
        relabeled_out: Option<String>,
        errors_out: Option<String>,
    ) -> Self {
        let mut errors = ErrorSummary::default();
        for tag in &report.error_locations {
            match tag {
                ErrorTag::Split => errors.split_locations += 1,
                ErrorTag::Merge => errors.merge_locations += 1,
                ErrorTag::Both => errors.both_locations += 1,
                ErrorTag::None => {}
            }
        }
        let regions = report
            .regions
            .iter()
            .zip(&report.solution.assignment)
            .map(|(r, &assigned)| Region {
                gt_label: r.gt_label,
                prop_label: r.prop_label,
                candidates: &r.candidates,
                size: r.size(),
                assigned,
                tag: report.error_locations[r.locations[0]],
            })
            .collect();
        let evaluated = EvalMask::from_ground_truth(gt).count();
        Self {
            schema: SCHEMA,
            config,
            evaluated_locations: evaluated,
            masked_locations: gt.len() - evaluated,
            ted_value: report.ted_value,
            splits: report.splits,
            merges: report.merges,
            split_pairs: partners(&report.split_pairs),
            merge_pairs: partners(&report.merge_pairs),
            baseline: &report.baseline,
            relabeled_metrics: RelabeledMetrics::compute(gt, &report.relabeled),
            solver: Solver {
                optimal: report.solver.optimal,
                gap: report.solver.gap,
                nodes: report.solver.nodes,
                components: report.solver.components,
                regions: report.solver.regions,
            },
            errors,
            regions,
            outputs: Outputs { relabeled: relabeled_out, errors: errors_out },
            timing: Timing { wall_seconds: report.solver.wall_seconds },
        }
    }
}
