//! The split/merge minimization over tolerable relabelings.
//!
//! Decision variables live on candidate regions rather than single
//! locations: every location of a region has the same admissible labels, and
//! the objective only sees which `(gt, proposal)` label pairs co-occur, so
//! per-location choices inside a region are interchangeable.

mod brute;
mod lp;
mod solver;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Result, TedError};
use crate::tolerance::CandidateRegion;
use crate::volume::Label;

pub use brute::{brute_force_solve, brute_force_solve_with, DEFAULT_ENUMERATION_CAP};
pub use lp::{export_lp, write_lp};
pub use solver::{lower_bound, solve_exact, SolverLimits};

#[derive(Debug, Clone)]
pub struct TedModel {
    regions: Vec<CandidateRegion>,
    gt_labels: Vec<Label>,
    prop_labels: Vec<Label>,
    alpha: f64,
    beta: f64,
}

/// Validates regions and weights and assembles the model.
///
/// The proposal label set is the set of original labels of the regions;
/// every candidate must belong to it.
pub fn build_model(regions: Vec<CandidateRegion>, alpha: f64, beta: f64) -> Result<TedModel> {
    for (name, w) in [("alpha", alpha), ("beta", beta)] {
        if !w.is_finite() || w < 0.0 {
            return Err(TedError::InvalidParameter(format!("{name} must be finite and non-negative, got {w}")));
        }
    }
    let prop_labels: BTreeSet<Label> = regions.iter().map(|r| r.prop_label).collect();
    let gt_labels: BTreeSet<Label> = regions.iter().map(|r| r.gt_label).collect();
    for (idx, r) in regions.iter().enumerate() {
        if r.candidates.is_empty() {
            return Err(TedError::InvalidRegion(idx, "empty candidate set".into()));
        }
        if r.locations.is_empty() {
            return Err(TedError::InvalidRegion(idx, "region has no locations".into()));
        }
        if r.candidates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(TedError::InvalidRegion(idx, "candidates must be sorted and distinct".into()));
        }
        if r.candidates.binary_search(&r.prop_label).is_err() {
            return Err(TedError::InvalidRegion(idx, format!("original label {} is not a candidate", r.prop_label)));
        }
        if let Some(&l) = r.candidates.iter().find(|l| !prop_labels.contains(l)) {
            return Err(TedError::MissingPropLabel(l));
        }
    }
    Ok(TedModel {
        regions,
        gt_labels: gt_labels.into_iter().collect(),
        prop_labels: prop_labels.into_iter().collect(),
        alpha,
        beta,
    })
}

impl TedModel {
    pub fn regions(&self) -> &[CandidateRegion] {
        &self.regions
    }

    pub fn gt_labels(&self) -> &[Label] {
        &self.gt_labels
    }

    pub fn prop_labels(&self) -> &[Label] {
        &self.prop_labels
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn identity_assignment(&self) -> Vec<Label> {
        self.regions.iter().map(|r| r.prop_label).collect()
    }

    /// Number of complete assignments, saturating.
    pub fn assignment_space(&self) -> u128 {
        self.regions.iter().try_fold(1u128, |acc, r| acc.checked_mul(r.candidates.len() as u128)).unwrap_or(u128::MAX)
    }

    pub fn objective_of(&self, splits: u64, merges: u64) -> f64 {
        self.alpha * splits as f64 + self.beta * merges as f64
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SolveStats {
    pub nodes: u64,
    pub wall_seconds: f64,
    /// Independent sub-problems the search decomposed into.
    pub components: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TedSolution {
    /// Chosen label per region, aligned with `TedModel::regions`.
    pub assignment: Vec<Label>,
    /// `(gt, proposal)` pairs that co-occur after relabeling.
    pub matches: BTreeSet<(Label, Label)>,
    pub splits_per_gt_label: BTreeMap<Label, u64>,
    pub merges_per_prop_label: BTreeMap<Label, u64>,
    pub splits: u64,
    pub merges: u64,
    pub objective: f64,
    pub optimal: bool,
    /// Objective minus a proven lower bound; 0 when optimal.
    pub gap: f64,
    #[serde(skip)]
    pub stats: SolveStats,
}

impl TedSolution {
    /// Derives matches and split/merge counts from a region assignment.
    pub fn from_assignment(model: &TedModel, assignment: Vec<Label>) -> Result<Self> {
        if assignment.len() != model.regions.len() {
            return Err(TedError::InvalidParameter(format!(
                "assignment has {} entries for {} regions",
                assignment.len(),
                model.regions.len()
            )));
        }
        for (idx, (r, l)) in model.regions.iter().zip(&assignment).enumerate() {
            if r.candidates.binary_search(l).is_err() {
                return Err(TedError::InvalidRegion(idx, format!("label {l} is not admissible")));
            }
        }
        let matches: BTreeSet<(Label, Label)> =
            model.regions.iter().zip(&assignment).map(|(r, &l)| (r.gt_label, l)).collect();
        let used: BTreeSet<Label> = assignment.iter().copied().collect();
        if let Some(&l) = model.prop_labels.iter().find(|l| !used.contains(l)) {
            return Err(TedError::MissingPropLabel(l));
        }
        let mut splits_per_gt_label: BTreeMap<Label, u64> = model.gt_labels.iter().map(|&k| (k, 0)).collect();
        let mut merges_per_prop_label: BTreeMap<Label, u64> = model.prop_labels.iter().map(|&l| (l, 0)).collect();
        let mut partners_k: BTreeMap<Label, u64> = BTreeMap::new();
        let mut partners_l: BTreeMap<Label, u64> = BTreeMap::new();
        for &(k, l) in &matches {
            *partners_k.entry(k).or_insert(0) += 1;
            *partners_l.entry(l).or_insert(0) += 1;
        }
        for (k, n) in partners_k {
            splits_per_gt_label.insert(k, n - 1);
        }
        for (l, n) in partners_l {
            merges_per_prop_label.insert(l, n - 1);
        }
        let splits = splits_per_gt_label.values().sum();
        let merges = merges_per_prop_label.values().sum();
        Ok(Self {
            objective: model.objective_of(splits, merges),
            assignment,
            matches,
            splits_per_gt_label,
            merges_per_prop_label,
            splits,
            merges,
            optimal: false,
            gap: 0.0,
            stats: SolveStats::default(),
        })
    }
}
