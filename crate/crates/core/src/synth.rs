//! Seeded generators for synthetic ground truths and controlled
//! modifications (boundary shifts, splits, merges).

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TedError};
use crate::tolerance::{squared_distance_field, ToleranceConfig};
use crate::volume::{label_set, Label, LabelVolume};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Two-region 1D labeling (`1` then `2`) and a copy with the boundary moved
/// right by `round(shift / res)` voxels.
pub fn make_boundary_shift_1d(n: usize, res: f64, shift: f64) -> Result<(LabelVolume, LabelVolume)> {
    if n < 4 {
        return Err(TedError::InvalidParameter(format!("need at least 4 voxels, got {n}")));
    }
    if res <= 0.0 || !res.is_finite() {
        return Err(TedError::InvalidParameter(format!("resolution must be positive, got {res}")));
    }
    if !(0.0..n as f64 * res / 2.0).contains(&shift) {
        return Err(TedError::InvalidParameter(format!("shift {shift} outside [0, {})", n as f64 * res / 2.0)));
    }
    let half = n / 2;
    let moved = half + (shift / res).round() as usize;
    let line = |b: usize| (0..n).map(|i| if i < b { 1 } else { 2 }).collect::<Vec<Label>>();
    let res = [res, 1.0, 1.0];
    Ok((LabelVolume::new([n, 1, 1], res, line(half))?, LabelVolume::new([n, 1, 1], res, line(moved))?))
}

/// Nearest-seed partition into `objects` labels `1..=objects`.
pub fn voronoi_labeling(dims: [usize; 3], resolution: [f64; 3], objects: usize, seed: u64) -> Result<LabelVolume> {
    let n: usize = dims.iter().product();
    if objects == 0 || objects > n {
        return Err(TedError::InvalidParameter(format!("cannot place {objects} objects in {n} voxels")));
    }
    let mut rng = rng(seed);
    let seeds = rand::seq::index::sample(&mut rng, n, objects).into_vec();
    let probe = LabelVolume::new(dims, resolution, vec![0; n])?;
    let centers: Vec<[f64; 3]> = seeds
        .iter()
        .map(|&s| {
            let c = probe.coords(s);
            [0, 1, 2].map(|a| c[a] as f64 * resolution[a])
        })
        .collect();
    let labels = (0..n)
        .map(|i| {
            let c = probe.coords(i);
            let p = [0, 1, 2].map(|a| c[a] as f64 * resolution[a]);
            let d2 = |s: &[f64; 3]| (0..3).map(|a| (p[a] - s[a]).powi(2)).sum::<f64>();
            let (best, _) =
                centers
                    .iter()
                    .enumerate()
                    .fold((0, f64::INFINITY), |acc, (j, s)| if d2(s) < acc.1 { (j, d2(s)) } else { acc });
            best as Label + 1
        })
        .collect();
    probe.with_labels(labels)
}

/// Uniform random labels `1..=label_count`, each occurring at least once.
pub fn random_labeling(dims: [usize; 3], label_count: usize, seed: u64) -> Result<LabelVolume> {
    let n: usize = dims.iter().product();
    if label_count == 0 {
        return Err(TedError::InvalidParameter("label_count must be at least 1".into()));
    }
    if label_count > n {
        return Err(TedError::InvalidParameter(format!("{label_count} labels do not fit in {n} locations")));
    }
    let mut rng = rng(seed);
    let mut labels: Vec<Label> = (0..n).map(|_| rng.gen_range(1..=label_count as Label)).collect();
    for (l, &i) in rand::seq::index::sample(&mut rng, n, label_count).into_vec().iter().enumerate() {
        labels[i] = l as Label + 1;
    }
    LabelVolume::new(dims, [1.0; 3], labels)
}

/// Displaces object boundaries by at most `distance` nm.
///
/// Labels get a random priority; a location may be taken over by the
/// highest-priority label that originally occurs within `distance` of it,
/// if that label outranks its own. A location is only taken over when its
/// own object keeps an untouched core (locations with no foreign label
/// within `distance`) within `distance` of it, so every original label still
/// occurs within `distance` of each of its former locations and no object
/// disappears. The background label never moves.
pub fn apply_shift(vol: &LabelVolume, distance: f64, seed: u64) -> Result<LabelVolume> {
    if distance <= 0.0 || !distance.is_finite() {
        return Err(TedError::InvalidParameter(format!("shift distance must be positive, got {distance}")));
    }
    let limit = ToleranceConfig::new(distance).limit_sq();
    let bg = vol.background();
    let labels: Vec<Label> = label_set(vol).into_iter().collect();
    let mut priority: Vec<usize> = (0..labels.len()).collect();
    priority.shuffle(&mut rng(seed));
    let rank = |l: Label| labels.binary_search(&l).ok().map(|i| priority[i]);

    let n = vol.len();
    let mut foreign_near = vec![false; n];
    let mut grower: Vec<Option<(usize, Label)>> = vec![None; n];
    let mut sources = vec![false; n];
    for (idx, &l) in labels.iter().enumerate() {
        for (i, s) in sources.iter_mut().enumerate() {
            *s = vol.get(i) == l;
        }
        let field = squared_distance_field(vol.dims(), vol.resolution(), &sources);
        for i in 0..n {
            let own = vol.get(i);
            if own == l || Some(own) == bg || field[i] > limit {
                continue;
            }
            foreign_near[i] = true;
            if grower[i].is_none_or(|(p, _)| priority[idx] > p) {
                grower[i] = Some((priority[idx], l));
            }
        }
    }

    let mut out = vol.labels().to_vec();
    for &l in &labels {
        for (i, s) in sources.iter_mut().enumerate() {
            *s = vol.get(i) == l && !foreign_near[i];
        }
        if !sources.iter().any(|&s| s) {
            continue;
        }
        let core = squared_distance_field(vol.dims(), vol.resolution(), &sources);
        for i in 0..n {
            if vol.get(i) != l || core[i] > limit {
                continue;
            }
            if let Some((p, new)) = grower[i] {
                if p > rank(l).unwrap() {
                    out[i] = new;
                }
            }
        }
    }
    vol.with_labels(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitOutcome {
    pub volume: LabelVolume,
    /// Cut attempts rejected because one side would have been empty.
    pub skipped: usize,
}

const MAX_ATTEMPTS_PER_CUT: usize = 1000;

/// Performs `count` axis-aligned cuts, each through a random location of a
/// random object; the part at or beyond the cut gets a fresh label.
pub fn apply_random_splits(vol: &LabelVolume, count: usize, seed: u64) -> Result<SplitOutcome> {
    if count == 0 {
        return Err(TedError::InvalidParameter("split count must be at least 1".into()));
    }
    let mut rng = rng(seed);
    let mut labels = vol.labels().to_vec();
    let bg = vol.background();
    let axes: Vec<usize> = (0..3).filter(|&a| vol.dims()[a] > 1).collect();
    if axes.is_empty() {
        return Err(TedError::Generator("a single voxel cannot be cut".into()));
    }
    let mut next = labels.iter().copied().max().unwrap_or(0);
    let mut skipped = 0;
    for cut in 0..count {
        let objects: Vec<Label> =
            labels.iter().copied().filter(|&l| Some(l) != bg).collect::<BTreeSet<_>>().into_iter().collect();
        let mut done = false;
        for _ in 0..MAX_ATTEMPTS_PER_CUT {
            let Some(&object) = objects.choose(&mut rng) else { break };
            let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == object).collect();
            let through = members[rng.gen_range(0..members.len())];
            let axis = axes[rng.gen_range(0..axes.len())];
            let plane = vol.coords(through)[axis];
            if !members.iter().any(|&i| vol.coords(i)[axis] < plane) {
                skipped += 1;
                continue;
            }
            next = next
                .checked_add(1)
                .filter(|&n| Some(n) != bg)
                .or_else(|| next.checked_add(2))
                .ok_or_else(|| TedError::Generator("label space exhausted".into()))?;
            for &i in &members {
                if vol.coords(i)[axis] >= plane {
                    labels[i] = next;
                }
            }
            done = true;
            break;
        }
        if !done {
            return Err(TedError::Generator(format!("no object large enough for cut {}", cut + 1)));
        }
    }
    Ok(SplitOutcome { volume: vol.with_labels(labels)?, skipped })
}

/// Face-adjacent pairs `(a, b)`, `a < b`, of distinct non-background labels.
pub fn adjacent_label_pairs(vol: &LabelVolume) -> BTreeSet<(Label, Label)> {
    let dims = vol.dims();
    let bg = vol.background();
    let mut pairs = BTreeSet::new();
    for i in 0..vol.len() {
        let c = vol.coords(i);
        for axis in 0..3 {
            if c[axis] + 1 >= dims[axis] {
                continue;
            }
            let mut n = c;
            n[axis] += 1;
            let (a, b) = (vol.get(i), vol.get(vol.index(n)));
            if a != b && Some(a) != bg && Some(b) != bg {
                pairs.insert((a.min(b), a.max(b)));
            }
        }
    }
    pairs
}

/// Unifies `count` random pairs of face-adjacent labels (the larger label
/// is replaced by the smaller).
pub fn apply_random_merges(vol: &LabelVolume, count: usize, seed: u64) -> Result<LabelVolume> {
    if count == 0 {
        return Err(TedError::InvalidParameter("merge count must be at least 1".into()));
    }
    let available = label_set(vol).len();
    if available < count + 1 {
        return Err(TedError::InvalidParameter(format!("{count} merges need {} labels, found {available}", count + 1)));
    }
    let mut rng = rng(seed);
    let mut current = vol.clone();
    for m in 0..count {
        let pairs: Vec<(Label, Label)> = adjacent_label_pairs(&current).into_iter().collect();
        let Some(&(keep, gone)) = pairs.choose(&mut rng) else {
            return Err(TedError::Generator(format!("no adjacent labels left for merge {}", m + 1)));
        };
        let labels = current.labels().iter().map(|&l| if l == gone { keep } else { l }).collect();
        current = current.with_labels(labels)?;
    }
    Ok(current)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModificationKind {
    Shift,
    Split,
    Merge,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModificationSpec {
    pub kind: ModificationKind,
    /// nm for shifts, a count for splits and merges.
    pub magnitude: f64,
    pub seed: u64,
}

impl ModificationSpec {
    pub fn apply(&self, vol: &LabelVolume) -> Result<LabelVolume> {
        if self.magnitude <= 0.0 || !self.magnitude.is_finite() {
            return Err(TedError::InvalidParameter(format!("magnitude must be positive, got {}", self.magnitude)));
        }
        let count = || -> Result<usize> {
            if self.magnitude.fract() != 0.0 {
                return Err(TedError::InvalidParameter(format!("count must be an integer, got {}", self.magnitude)));
            }
            Ok(self.magnitude as usize)
        };
        match self.kind {
            ModificationKind::Shift => apply_shift(vol, self.magnitude, self.seed),
            ModificationKind::Split => Ok(apply_random_splits(vol, count()?, self.seed)?.volume),
            ModificationKind::Merge => apply_random_merges(vol, count()?, self.seed),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::raw_split_merge_counts;
    use crate::tolerance::anisotropic_distance_field;

    #[test]
    fn boundary_shift_pair() {
        let (x, y) = make_boundary_shift_1d(200, 0.005, 0.0).unwrap();
        assert_eq!(x, y);
        let (x, y) = make_boundary_shift_1d(10, 1.0, 2.0).unwrap();
        assert_eq!(x.labels(), &[1, 1, 1, 1, 1, 2, 2, 2, 2, 2]);
        assert_eq!(y.labels(), &[1, 1, 1, 1, 1, 1, 1, 2, 2, 2]);
        assert!(make_boundary_shift_1d(3, 1.0, 0.0).is_err());
        assert!(make_boundary_shift_1d(10, 1.0, 5.0).is_err());
        assert!(make_boundary_shift_1d(10, 1.0, -1.0).is_err());
    }

    #[test]
    fn random_labeling_contract() {
        let v = random_labeling([4, 4, 1], 1, 3).unwrap();
        assert!(v.labels().iter().all(|&l| l == 1));
        let v = random_labeling([3, 3, 2], 7, 11).unwrap();
        assert_eq!(label_set(&v), (1..=7).collect());
        assert_eq!(v, random_labeling([3, 3, 2], 7, 11).unwrap());
        assert!(random_labeling([2, 1, 1], 3, 0).is_err());
        assert!(random_labeling([2, 1, 1], 0, 0).is_err());
    }

    #[test]
    fn voronoi_uses_every_label() {
        let v = voronoi_labeling([32, 32, 1], [1.0; 3], 8, 5).unwrap();
        assert_eq!(label_set(&v), (1..=8).collect());
        assert_eq!(v, voronoi_labeling([32, 32, 1], [1.0; 3], 8, 5).unwrap());
    }

    #[test]
    fn sub_pitch_shift_is_identity() {
        let v = voronoi_labeling([16, 16, 1], [4.0, 4.0, 4.0], 5, 1).unwrap();
        assert_eq!(apply_shift(&v, 1.9, 9).unwrap(), v);
        assert!(apply_shift(&v, 0.0, 9).is_err());
    }

    #[test]
    fn shift_respects_displacement_bound() {
        for seed in 0..5 {
            let v = voronoi_labeling([24, 20, 3], [2.0, 2.0, 5.0], 6, seed).unwrap();
            let d = 4.5;
            let s = apply_shift(&v, d, seed).unwrap();
            assert_ne!(s, v);
            assert_eq!(label_set(&s), label_set(&v));
            for l in label_set(&v) {
                let from_orig = anisotropic_distance_field(&v, l).unwrap();
                let from_shifted = anisotropic_distance_field(&s, l).unwrap();
                for i in 0..v.len() {
                    if s.get(i) == l {
                        assert!(from_orig[i] <= d + 1e-9);
                    }
                    if v.get(i) == l {
                        assert!(from_shifted[i] <= d + 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn splits_are_counted_once_each() {
        let single = LabelVolume::new([8, 8, 1], [1.0; 3], vec![1; 64]).unwrap();
        let out = apply_random_splits(&single, 1, 4).unwrap();
        assert_eq!(raw_split_merge_counts(&single, &out.volume).unwrap(), (1, 0));

        let v = voronoi_labeling([32, 32, 1], [1.0; 3], 6, 2).unwrap();
        let out = apply_random_splits(&v, 10, 7).unwrap();
        assert_eq!(raw_split_merge_counts(&v, &out.volume).unwrap(), (10, 0));
        assert_eq!(out, apply_random_splits(&v, 10, 7).unwrap());

        assert!(apply_random_splits(&v, 0, 7).is_err());
        let dot = LabelVolume::from_1d(vec![1]).unwrap();
        assert!(matches!(apply_random_splits(&dot, 1, 0), Err(TedError::Generator(_))));
    }

    #[test]
    fn merges_are_counted_once_each() {
        let two = LabelVolume::from_1d(vec![1, 1, 2, 2]).unwrap();
        let merged = apply_random_merges(&two, 1, 0).unwrap();
        assert_eq!(label_set(&merged).len(), 1);
        assert_eq!(raw_split_merge_counts(&two, &merged).unwrap(), (0, 1));

        let v = voronoi_labeling([32, 32, 1], [1.0; 3], 12, 3).unwrap();
        let all = apply_random_merges(&v, 11, 1).unwrap();
        assert_eq!(raw_split_merge_counts(&v, &all).unwrap(), (0, 11));
        assert!(apply_random_merges(&v, 12, 1).is_err());

        let apart = LabelVolume::from_1d(vec![1, 0, 2]).unwrap().with_background(Some(0));
        assert!(matches!(apply_random_merges(&apart, 1, 0), Err(TedError::Generator(_))));
    }

    #[test]
    fn modification_spec_dispatch() {
        let v = voronoi_labeling([16, 16, 1], [1.0; 3], 4, 0).unwrap();
        let spec = ModificationSpec { kind: ModificationKind::Merge, magnitude: 2.0, seed: 1 };
        assert_eq!(label_set(&spec.apply(&v).unwrap()).len(), 2);
        let bad = ModificationSpec { kind: ModificationKind::Split, magnitude: 1.5, seed: 1 };
        assert!(bad.apply(&v).is_err());
        let neg = ModificationSpec { kind: ModificationKind::Shift, magnitude: -1.0, seed: 1 };
        assert!(neg.apply(&v).is_err());
    }
}
