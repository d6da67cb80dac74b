//! Raw split/merge counts, Rand index, variation of information, and the
//! end-to-end tolerant edit distance with error localization.
//!
//! All measures are evaluated on the locations not masked by the ground
//! truth's background label.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Result, TedError};
use crate::ilp::{build_model, solve_exact, SolverLimits, TedSolution};
use crate::tolerance::{build_regions, candidate_sets, CandidateRegion, ToleranceConfig};
use crate::volume::{check_same_dims, overlap_table, EvalMask, Label, LabelVolume, OverlapTable};

fn table(x: &LabelVolume, y: &LabelVolume) -> Result<OverlapTable> {
    overlap_table(x, y, &EvalMask::from_ground_truth(x))
}

/// `(splits, merges)` with a label overlapping `n` labels of the other
/// volume counted as `n - 1`.
pub fn raw_split_merge_counts(x: &LabelVolume, y: &LabelVolume) -> Result<(u64, u64)> {
    Ok(counts_from_table(&table(x, y)?))
}

fn counts_from_table(t: &OverlapTable) -> (u64, u64) {
    let mut per_gt: BTreeMap<Label, u64> = BTreeMap::new();
    let mut per_prop: BTreeMap<Label, u64> = BTreeMap::new();
    for ((k, l), _) in t.iter() {
        *per_gt.entry(k).or_insert(0) += 1;
        *per_prop.entry(l).or_insert(0) += 1;
    }
    (per_gt.values().map(|n| n - 1).sum(), per_prop.values().map(|n| n - 1).sum())
}

fn pairs(n: u64) -> u128 {
    let n = n as u128;
    n * n.saturating_sub(1) / 2
}

/// Fraction of location pairs on which the two labelings agree.
pub fn rand_index(x: &LabelVolume, y: &LabelVolume) -> Result<f64> {
    let t = table(x, y)?;
    let n = t.total();
    if n < 2 {
        return Err(TedError::TooFewLocations { needed: 2, found: n as usize });
    }
    let same_both: u128 = t.iter().map(|(_, c)| pairs(c)).sum();
    let same_x: u128 = t.row_sums().values().map(|&c| pairs(c)).sum();
    let same_y: u128 = t.col_sums().values().map(|&c| pairs(c)).sum();
    let total = pairs(n);
    // pairs together in both + pairs apart in both
    let agree = total + 2 * same_both - same_x - same_y;
    Ok(agree as f64 / total as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Voi {
    /// H(X|Y) in bits.
    pub split: f64,
    /// H(Y|X) in bits.
    pub merge: f64,
    pub total: f64,
}

/// Variation of information in bits.
pub fn variation_of_information(x: &LabelVolume, y: &LabelVolume) -> Result<Voi> {
    let t = table(x, y)?;
    let n = t.total();
    if n == 0 {
        return Err(TedError::TooFewLocations { needed: 1, found: 0 });
    }
    let (rows, cols) = (t.row_sums(), t.col_sums());
    let n = n as f64;
    let mut split = 0.0;
    let mut merge = 0.0;
    for ((k, l), c) in t.iter() {
        let c = c as f64;
        split += c * (cols[&l] as f64 / c).log2();
        merge += c * (rows[&k] as f64 / c).log2();
    }
    let (split, merge) = (split / n, merge / n);
    Ok(Voi { split, merge, total: split + merge })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorTag {
    None,
    Split,
    Merge,
    Both,
}

impl ErrorTag {
    /// Label used in error volumes.
    pub fn code(self) -> Label {
        match self {
            ErrorTag::None => 0,
            ErrorTag::Split => 1,
            ErrorTag::Merge => 2,
            ErrorTag::Both => 3,
        }
    }

    fn from_flags(split: bool, merge: bool) -> Self {
        match (split, merge) {
            (false, false) => ErrorTag::None,
            (true, false) => ErrorTag::Split,
            (false, true) => ErrorTag::Merge,
            (true, true) => ErrorTag::Both,
        }
    }
}

/// Tags every location of a region whose `(gt, assigned)` pair takes part in
/// a split (the gt label has several partners) or a merge (the assigned label
/// has several partners). Locations outside all regions are `None`.
pub fn localize_errors(solution: &TedSolution, regions: &[CandidateRegion], n_locations: usize) -> Vec<ErrorTag> {
    let mut partners_gt: BTreeMap<Label, usize> = BTreeMap::new();
    let mut partners_prop: BTreeMap<Label, usize> = BTreeMap::new();
    for &(k, l) in &solution.matches {
        *partners_gt.entry(k).or_insert(0) += 1;
        *partners_prop.entry(l).or_insert(0) += 1;
    }
    let mut tags = vec![ErrorTag::None; n_locations];
    for (r, &l) in regions.iter().zip(&solution.assignment) {
        let tag = ErrorTag::from_flags(
            partners_gt.get(&r.gt_label).copied().unwrap_or(0) >= 2,
            partners_prop.get(&l).copied().unwrap_or(0) >= 2,
        );
        for &i in &r.locations {
            tags[i] = tag;
        }
    }
    tags
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TedConfig {
    pub tolerance: ToleranceConfig,
    /// Cost of one split.
    pub alpha: f64,
    /// Cost of one merge.
    pub beta: f64,
    pub limits: SolverLimits,
}

impl TedConfig {
    pub fn new(threshold_nm: f64) -> Self {
        Self { tolerance: ToleranceConfig::new(threshold_nm), alpha: 1.0, beta: 1.0, limits: SolverLimits::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Baseline {
    /// `None` with fewer than two evaluated locations.
    pub rand_index: Option<f64>,
    /// `None` with no evaluated locations.
    pub voi: Option<Voi>,
    pub raw_splits: u64,
    pub raw_merges: u64,
}

impl Baseline {
    pub fn compute(x: &LabelVolume, y: &LabelVolume) -> Result<Self> {
        let (raw_splits, raw_merges) = raw_split_merge_counts(x, y)?;
        Ok(Self { rand_index: rand_index(x, y).ok(), voi: variation_of_information(x, y).ok(), raw_splits, raw_merges })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverReport {
    pub optimal: bool,
    pub gap: f64,
    pub nodes: u64,
    pub components: usize,
    pub regions: usize,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct TedReport {
    /// `alpha * splits + beta * merges`, in the units of the weights.
    pub ted_value: f64,
    pub splits: u64,
    pub merges: u64,
    /// Ground-truth labels with more than one partner, and those partners.
    pub split_pairs: Vec<(Label, Vec<Label>)>,
    /// Proposal labels with more than one partner, and those partners.
    pub merge_pairs: Vec<(Label, Vec<Label>)>,
    /// Closest tolerable relabeling of the proposal.
    pub relabeled: LabelVolume,
    pub error_locations: Vec<ErrorTag>,
    /// Measures between the ground truth and the original proposal.
    pub baseline: Baseline,
    pub solver: SolverReport,
    pub regions: Vec<CandidateRegion>,
    pub solution: TedSolution,
}

/// Tolerant edit distance between ground truth `x` and proposal `y`.
pub fn ted(x: &LabelVolume, y: &LabelVolume, config: &TedConfig) -> Result<TedReport> {
    check_same_dims(x, y)?;
    if x.resolution() != y.resolution() {
        return Err(TedError::ResolutionMismatch(x.resolution(), y.resolution()));
    }
    let mask = EvalMask::from_ground_truth(x);
    let sets = candidate_sets(y, &mask, &config.tolerance)?;
    let regions = build_regions(x, y, &sets)?;
    let model = build_model(regions, config.alpha, config.beta)?;
    let solution = solve_exact(&model, &config.limits)?;
    let regions = model.regions().to_vec();

    let mut labels = y.labels().to_vec();
    for (r, &l) in regions.iter().zip(&solution.assignment) {
        for &i in &r.locations {
            labels[i] = l;
        }
    }
    let relabeled = y.with_labels(labels)?;

    let mut by_gt: BTreeMap<Label, Vec<Label>> = BTreeMap::new();
    let mut by_prop: BTreeMap<Label, Vec<Label>> = BTreeMap::new();
    for &(k, l) in &solution.matches {
        by_gt.entry(k).or_default().push(l);
        by_prop.entry(l).or_default().push(k);
    }
    let several = |m: BTreeMap<Label, Vec<Label>>| -> Vec<(Label, Vec<Label>)> {
        m.into_iter().filter(|(_, v)| v.len() > 1).collect()
    };

    Ok(TedReport {
        ted_value: solution.objective,
        splits: solution.splits,
        merges: solution.merges,
        split_pairs: several(by_gt),
        merge_pairs: several(by_prop),
        error_locations: localize_errors(&solution, &regions, x.len()),
        relabeled,
        baseline: Baseline::compute(x, y)?,
        solver: SolverReport {
            optimal: solution.optimal,
            gap: solution.gap,
            nodes: solution.stats.nodes,
            components: solution.stats.components,
            regions: regions.len(),
            wall_seconds: solution.stats.wall_seconds,
        },
        regions,
        solution,
    })
}

impl TedReport {
    /// Labels present in the relabeled proposal at evaluated locations.
    pub fn relabeled_labels(&self, mask: &EvalMask) -> BTreeSet<Label> {
        crate::volume::label_set_masked(&self.relabeled, mask)
    }
}
