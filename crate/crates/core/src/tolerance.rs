//! Boundary-shift tolerance: per-location sets of admissible proposal labels
//! and their grouping into candidate regions.
//!
//! A location `i` may take proposal label `l` iff the nearest location that
//! carries `l` in the proposal lies within the threshold (center-to-center,
//! anisotropic Euclidean). Ties at exactly the threshold are admitted.

use std::collections::HashMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Result, TedError};
use crate::volume::{check_same_dims, label_set_masked, EvalMask, Label, LabelVolume};

/// Relative slack applied to the threshold so that distances which equal it
/// up to floating-point rounding are treated as ties.
const TIE_REL_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Maximal boundary shift in nm.
    pub threshold_nm: f64,
    /// Treat the proposal's background label like any other label.
    pub allow_background_relabel: bool,
}

impl ToleranceConfig {
    pub fn new(threshold_nm: f64) -> Self {
        Self { threshold_nm, allow_background_relabel: false }
    }

    pub fn validate(&self) -> Result<()> {
        if self.threshold_nm.is_nan() || self.threshold_nm < 0.0 {
            return Err(TedError::InvalidParameter(format!(
                "threshold must be non-negative, got {}",
                self.threshold_nm
            )));
        }
        Ok(())
    }

    /// Squared distance limit, including the tie slack.
    pub fn limit_sq(&self) -> f64 {
        let t = self.threshold_nm * (1.0 + TIE_REL_EPS);
        t * t
    }
}

/// Lower envelope of parabolas along one line (Felzenszwalb & Huttenlocher),
/// with sample spacing `pitch`. Infinite inputs are not sources.
fn envelope_1d(f: &[f64], pitch: f64, out: &mut [f64], v: &mut Vec<usize>, z: &mut Vec<f64>) {
    let n = f.len();
    v.clear();
    z.clear();
    let pos = |q: usize| pitch * q as f64;
    for q in 0..n {
        if f[q].is_infinite() {
            continue;
        }
        let fq = f[q] + pos(q) * pos(q);
        while let Some(&p) = v.last() {
            let s = (fq - (f[p] + pos(p) * pos(p))) / (2.0 * (pos(q) - pos(p)));
            if s <= *z.last().unwrap() {
                v.pop();
                z.pop();
            } else {
                v.push(q);
                z.push(s);
                break;
            }
        }
        if v.is_empty() {
            v.push(q);
            z.push(f64::NEG_INFINITY);
        }
    }
    if v.is_empty() {
        out.fill(f64::INFINITY);
        return;
    }
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while k + 1 < v.len() && z[k + 1] < pos(q) {
            k += 1;
        }
        let d = pitch * (q as f64 - v[k] as f64);
        *o = f[v[k]] + d * d;
    }
}

/// Exact squared anisotropic Euclidean distance from every location to the
/// nearest source location; `f64::INFINITY` where there are no sources.
pub fn squared_distance_field(dims: [usize; 3], resolution: [f64; 3], sources: &[bool]) -> Vec<f64> {
    let [nx, ny, nz] = dims;
    let mut field: Vec<f64> = sources.iter().map(|&s| if s { 0.0 } else { f64::INFINITY }).collect();
    let strides = [1, nx, nx * ny];
    let mut line = Vec::new();
    let mut out = Vec::new();
    let (mut v, mut z) = (Vec::new(), Vec::new());
    for axis in 0..3 {
        let n = dims[axis];
        if n == 1 {
            continue;
        }
        let stride = strides[axis];
        line.resize(n, 0.0);
        out.resize(n, 0.0);
        // Enumerate the start of every line along `axis`.
        for start in 0..nx * ny * nz {
            let c = [start % nx, (start / nx) % ny, start / (nx * ny)];
            if c[axis] != 0 {
                continue;
            }
            for (t, slot) in line.iter_mut().enumerate() {
                *slot = field[start + t * stride];
            }
            if line.iter().all(|d| d.is_infinite()) {
                continue;
            }
            envelope_1d(&line, resolution[axis], &mut out, &mut v, &mut z);
            for (t, &d) in out.iter().enumerate() {
                field[start + t * stride] = d;
            }
        }
    }
    field
}

/// Distance in nm from every location to the nearest location labeled `label`.
pub fn anisotropic_distance_field(y: &LabelVolume, label: Label) -> Result<Vec<f64>> {
    let sources: Vec<bool> = y.labels().iter().map(|&l| l == label).collect();
    if !sources.iter().any(|&s| s) {
        return Err(TedError::LabelAbsent(label));
    }
    Ok(squared_distance_field(y.dims(), y.resolution(), &sources).into_iter().map(f64::sqrt).collect())
}

/// How admissible label sets are computed. Both give identical sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateStrategy {
    /// Pick whichever of the two is cheaper for the instance.
    Auto,
    /// One distance transform per proposal label.
    PerLabel,
    /// Scan the ball of radius `threshold` around every location.
    Window,
}

/// Admissible proposal labels for every location, interned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSets {
    set_of: Vec<u32>,
    sets: Vec<Vec<Label>>,
}

const MASKED: u32 = u32::MAX;

impl CandidateSets {
    /// Sorted admissible labels at `i`, or `None` if `i` is not evaluated.
    pub fn at(&self, i: usize) -> Option<&[Label]> {
        match self.set_of[i] {
            MASKED => None,
            id => Some(&self.sets[id as usize]),
        }
    }

    pub fn set_id(&self, i: usize) -> Option<u32> {
        Some(self.set_of[i]).filter(|&id| id != MASKED)
    }

    pub fn set(&self, id: u32) -> &[Label] {
        &self.sets[id as usize]
    }

    pub fn len(&self) -> usize {
        self.set_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set_of.is_empty()
    }

    /// Number of distinct admissible sets.
    pub fn distinct_sets(&self) -> usize {
        self.sets.len()
    }

    /// Writes `location,set_size` rows for every evaluated location.
    pub fn write_sizes_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "location,set_size")?;
        for (i, &id) in self.set_of.iter().enumerate() {
            if id != MASKED {
                writeln!(w, "{i},{}", self.sets[id as usize].len())?;
            }
        }
        Ok(())
    }

    /// Renumbers sets by first occurrence so equal inputs compare equal
    /// regardless of how they were assembled.
    fn canonicalize(set_of: Vec<u32>, sets: Vec<Vec<Label>>) -> Self {
        let mut remap = vec![MASKED; sets.len()];
        let mut canon_sets = Vec::new();
        let set_of = set_of
            .into_iter()
            .map(|id| {
                if id == MASKED {
                    return MASKED;
                }
                let slot = &mut remap[id as usize];
                if *slot == MASKED {
                    *slot = canon_sets.len() as u32;
                    canon_sets.push(sets[id as usize].clone());
                }
                *slot
            })
            .collect();
        Self { set_of, sets: canon_sets }
    }
}

/// Admissible labels for every evaluated location of `y`.
pub fn candidate_sets(y: &LabelVolume, mask: &EvalMask, config: &ToleranceConfig) -> Result<CandidateSets> {
    candidate_sets_with(y, mask, config, CandidateStrategy::Auto)
}

pub fn candidate_sets_with(
    y: &LabelVolume,
    mask: &EvalMask,
    config: &ToleranceConfig,
    strategy: CandidateStrategy,
) -> Result<CandidateSets> {
    config.validate()?;
    if mask.len() != y.len() {
        return Err(TedError::InvalidParameter("mask does not match the proposal volume".into()));
    }
    let locked = match y.background() {
        Some(bg) if !config.allow_background_relabel => Some(bg),
        _ => None,
    };
    let strategy = match strategy {
        CandidateStrategy::Auto => {
            let labels = label_set_masked(y, mask).len();
            match window_offsets(y.resolution(), y.dims(), config, labels) {
                Some(_) => CandidateStrategy::Window,
                None => CandidateStrategy::PerLabel,
            }
        }
        s => s,
    };
    let (set_of, sets) = match strategy {
        CandidateStrategy::Window => {
            let offsets =
                window_offsets(y.resolution(), y.dims(), config, usize::MAX).expect("unbounded window always fits");
            sets_by_window(y, mask, locked, &offsets)
        }
        _ => sets_by_label(y, mask, config, locked),
    };
    Ok(CandidateSets::canonicalize(set_of, sets))
}

fn sets_by_label(
    y: &LabelVolume,
    mask: &EvalMask,
    config: &ToleranceConfig,
    locked: Option<Label>,
) -> (Vec<u32>, Vec<Vec<Label>>) {
    let limit = config.limit_sq();
    let mut set_of: Vec<u32> = (0..y.len()).map(|i| if mask.is_evaluated(i) { 0 } else { MASKED }).collect();
    let mut sets: Vec<Vec<Label>> = vec![Vec::new()];
    // (set id, appended label) -> set id
    let mut extend: HashMap<(u32, Label), u32> = HashMap::new();

    let mut sources = vec![false; y.len()];
    for l in label_set_masked(y, mask) {
        if Some(l) == locked {
            continue;
        }
        for (i, s) in sources.iter_mut().enumerate() {
            *s = mask.is_evaluated(i) && y.get(i) == l;
        }
        let field = squared_distance_field(y.dims(), y.resolution(), &sources);
        for (i, d2) in field.into_iter().enumerate() {
            if set_of[i] == MASKED || d2 > limit || locked == Some(y.get(i)) {
                continue;
            }
            let from = set_of[i];
            set_of[i] = *extend.entry((from, l)).or_insert_with(|| {
                let mut grown = sets[from as usize].clone();
                grown.push(l);
                sets.push(grown);
                (sets.len() - 1) as u32
            });
        }
    }
    if let Some(bg) = locked {
        let id = sets.len() as u32;
        sets.push(vec![bg]);
        for (i, slot) in set_of.iter_mut().enumerate() {
            if *slot != MASKED && y.get(i) == bg {
                *slot = id;
            }
        }
    }
    (set_of, sets)
}

/// Voxel offsets within the threshold ball, or `None` if the ball holds more
/// than `max_len` offsets.
fn window_offsets(
    resolution: [f64; 3],
    dims: [usize; 3],
    config: &ToleranceConfig,
    max_len: usize,
) -> Option<Vec<[isize; 3]>> {
    let limit = config.limit_sq();
    let reach: Vec<isize> = (0..3)
        .map(|a| {
            let r = (config.threshold_nm * (1.0 + TIE_REL_EPS) / resolution[a]).floor();
            r.min(dims[a] as f64 - 1.0) as isize
        })
        .collect();
    let extent: f64 = reach.iter().map(|&r| (2 * r + 1) as f64).product();
    if extent > max_len as f64 * 8.0 {
        return None;
    }
    let mut offsets = Vec::new();
    for dz in -reach[2]..=reach[2] {
        for dy in -reach[1]..=reach[1] {
            for dx in -reach[0]..=reach[0] {
                let d = [dx, dy, dz];
                let d2: f64 = (0..3)
                    .map(|a| {
                        let t = resolution[a] * d[a] as f64;
                        t * t
                    })
                    .sum();
                if d2 <= limit {
                    offsets.push(d);
                    if offsets.len() > max_len {
                        return None;
                    }
                }
            }
        }
    }
    Some(offsets)
}

fn sets_by_window(
    y: &LabelVolume,
    mask: &EvalMask,
    locked: Option<Label>,
    offsets: &[[isize; 3]],
) -> (Vec<u32>, Vec<Vec<Label>>) {
    let dims = y.dims();
    let mut ids: HashMap<Vec<Label>, u32> = HashMap::new();
    let mut sets = Vec::new();
    let mut set_of = vec![MASKED; y.len()];
    let mut scratch = Vec::new();
    for i in mask.iter_evaluated() {
        scratch.clear();
        if locked == Some(y.get(i)) {
            scratch.push(y.get(i));
        } else {
            let c = y.coords(i);
            for off in offsets {
                let mut n = [0usize; 3];
                let inside = (0..3).all(|a| {
                    let p = c[a] as isize + off[a];
                    n[a] = p as usize;
                    p >= 0 && (p as usize) < dims[a]
                });
                if !inside {
                    continue;
                }
                let j = y.index(n);
                let l = y.get(j);
                if mask.is_evaluated(j) && Some(l) != locked {
                    scratch.push(l);
                }
            }
            scratch.sort_unstable();
            scratch.dedup();
        }
        let id = *ids.entry(scratch.clone()).or_insert_with(|| {
            sets.push(scratch.clone());
            (sets.len() - 1) as u32
        });
        set_of[i] = id;
    }
    (set_of, sets)
}

/// Locations sharing ground-truth label, proposal label and admissible set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CandidateRegion {
    pub gt_label: Label,
    pub prop_label: Label,
    /// Sorted admissible proposal labels.
    pub candidates: Vec<Label>,
    /// Ascending location indices.
    pub locations: Vec<usize>,
}

impl CandidateRegion {
    pub fn size(&self) -> usize {
        self.locations.len()
    }
}

/// Partitions the evaluated locations by `(x(i), y(i), A_i)`.
///
/// Regions are not required to be spatially connected. They are returned
/// sorted by `(gt_label, prop_label, candidates)`.
pub fn build_regions(x: &LabelVolume, y: &LabelVolume, sets: &CandidateSets) -> Result<Vec<CandidateRegion>> {
    check_same_dims(x, y)?;
    if sets.len() != x.len() {
        return Err(TedError::InvalidParameter("candidate sets do not match the volume".into()));
    }
    let mut index: HashMap<(Label, Label, u32), usize> = HashMap::new();
    let mut regions: Vec<CandidateRegion> = Vec::new();
    for i in 0..x.len() {
        let Some(id) = sets.set_id(i) else { continue };
        let key = (x.get(i), y.get(i), id);
        let r = *index.entry(key).or_insert_with(|| {
            regions.push(CandidateRegion {
                gt_label: key.0,
                prop_label: key.1,
                candidates: sets.set(id).to_vec(),
                locations: Vec::new(),
            });
            regions.len() - 1
        });
        regions[r].locations.push(i);
    }
    regions.sort_by(|a, b| (a.gt_label, a.prop_label, &a.candidates).cmp(&(b.gt_label, b.prop_label, &b.candidates)));
    Ok(regions)
}
