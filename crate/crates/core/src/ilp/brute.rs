//! Exhaustive enumeration; the reference the branch-and-bound is checked
//! against.

use std::collections::{BTreeMap, BTreeSet};

use super::{TedModel, TedSolution};
use crate::error::{Result, TedError};
use crate::volume::Label;

pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

/// Global minimum by enumerating every candidate assignment.
pub fn brute_force_solve(model: &TedModel) -> Result<TedSolution> {
    let free = vec![None; model.regions.len()];
    Ok(brute_force_solve_with(model, &free, DEFAULT_ENUMERATION_CAP)?
        .expect("the identity assignment is always feasible"))
}

/// Best completion of a partial assignment (`Some(label)` entries are fixed),
/// or `None` if no completion covers every proposal label.
///
/// Assignments are enumerated odometer-style over region index with
/// candidates in ascending order; the first minimum found is returned.
pub fn brute_force_solve_with(model: &TedModel, fixed: &[Option<Label>], cap: u128) -> Result<Option<TedSolution>> {
    if fixed.len() != model.regions.len() {
        return Err(TedError::InvalidParameter("partial assignment has the wrong length".into()));
    }
    let choices: Vec<Vec<Label>> = model
        .regions
        .iter()
        .zip(fixed)
        .map(|(r, f)| match f {
            Some(l) => vec![*l],
            None => r.candidates.clone(),
        })
        .collect();
    let size = choices.iter().try_fold(1u128, |acc, c| acc.checked_mul(c.len() as u128)).unwrap_or(u128::MAX);
    if size > cap {
        return Err(TedError::EnumerationCap { size, cap });
    }
    if choices.iter().any(|c| c.is_empty()) {
        return Ok(None);
    }

    let mut digits = vec![0usize; choices.len()];
    let mut best: Option<(f64, Vec<Label>)> = None;
    loop {
        let assignment: Vec<Label> = digits.iter().zip(&choices).map(|(&d, c)| c[d]).collect();
        if let Some(obj) = score(model, &assignment) {
            if best.as_ref().is_none_or(|(b, _)| obj < *b) {
                best = Some((obj, assignment));
            }
        }
        // advance the odometer, last region fastest
        let mut pos = digits.len();
        loop {
            if pos == 0 {
                let Some((_, assignment)) = best else { return Ok(None) };
                let mut sol = TedSolution::from_assignment(model, assignment)?;
                sol.optimal = true;
                return Ok(Some(sol));
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < choices[pos].len() {
                break;
            }
            digits[pos] = 0;
        }
    }
}

/// `alpha * splits + beta * merges`, or `None` if some proposal label is unused.
fn score(model: &TedModel, assignment: &[Label]) -> Option<f64> {
    let used: BTreeSet<Label> = assignment.iter().copied().collect();
    if model.prop_labels.iter().any(|l| !used.contains(l)) {
        return None;
    }
    let mut partners_of_gt: BTreeMap<Label, BTreeSet<Label>> = BTreeMap::new();
    let mut partners_of_prop: BTreeMap<Label, BTreeSet<Label>> = BTreeMap::new();
    for (r, &l) in model.regions.iter().zip(assignment) {
        partners_of_gt.entry(r.gt_label).or_default().insert(l);
        partners_of_prop.entry(l).or_default().insert(r.gt_label);
    }
    let splits: usize = partners_of_gt.values().map(|s| s.len() - 1).sum();
    let merges: usize = partners_of_prop.values().map(|s| s.len() - 1).sum();
    Some(model.alpha * splits as f64 + model.beta * merges as f64)
}
