//! Label volumes, the evaluation mask, overlap statistics and file I/O.
//!
//! Locations are linearized x-fastest, then y, then z: the location with
//! coordinates `(cx, cy, cz)` has index `cx + nx * (cy + ny * cz)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TedError};

pub type Label = u32;

/// On-disk volume encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    /// Binary `segv1`: ASCII header followed by little-endian u32 labels.
    Segv1,
    /// Whitespace separated integers, one row per line (2D or 1D only).
    /// Carries no resolution; loaded volumes get 1 nm per axis.
    TextGrid,
}

impl FromStr for Format {
    type Err = TedError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "segv1" => Ok(Format::Segv1),
            "text" | "text-grid" => Ok(Format::TextGrid),
            other => Err(TedError::InvalidParameter(format!("unknown format `{other}`"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Format::Segv1 => f.write_str("segv1"),
            Format::TextGrid => f.write_str("text-grid"),
        }
    }
}

/// A dense 3D grid of labels with physical voxel spacing in nm.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelVolume {
    dims: [usize; 3],
    resolution: [f64; 3],
    labels: Vec<Label>,
    background: Option<Label>,
}

impl LabelVolume {
    pub fn new(dims: [usize; 3], resolution: [f64; 3], labels: Vec<Label>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(TedError::InvalidVolume(format!("dims must be positive, got {dims:?}")));
        }
        check_resolution(resolution)?;
        let expected = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| TedError::InvalidVolume(format!("dims {dims:?} overflow")))?;
        if labels.len() != expected {
            return Err(TedError::PayloadSize { expected, found: labels.len() });
        }
        Ok(Self { dims, resolution, labels, background: None })
    }

    /// A 1D volume along x with unit resolution.
    pub fn from_1d(labels: Vec<Label>) -> Result<Self> {
        Self::new([labels.len(), 1, 1], [1.0; 3], labels)
    }

    pub fn with_background(mut self, background: Option<Label>) -> Self {
        self.background = background;
        self
    }

    pub fn with_resolution(mut self, resolution: [f64; 3]) -> Result<Self> {
        check_resolution(resolution)?;
        self.resolution = resolution;
        Ok(self)
    }

    /// Same geometry and background, new labels.
    pub fn with_labels(&self, labels: Vec<Label>) -> Result<Self> {
        Ok(Self::new(self.dims, self.resolution, labels)?.with_background(self.background))
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn resolution(&self) -> [f64; 3] {
        self.resolution
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn into_labels(self) -> Vec<Label> {
        self.labels
    }

    pub fn background(&self) -> Option<Label> {
        self.background
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, index: usize) -> Label {
        self.labels[index]
    }

    pub fn coords(&self, index: usize) -> [usize; 3] {
        let [nx, ny, _] = self.dims;
        [index % nx, (index / nx) % ny, index / (nx * ny)]
    }

    pub fn index(&self, [cx, cy, cz]: [usize; 3]) -> usize {
        let [nx, ny, _] = self.dims;
        cx + nx * (cy + ny * cz)
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index < self.labels.len() {
            Ok(())
        } else {
            Err(TedError::IndexOutOfRange { index, len: self.labels.len() })
        }
    }
}

fn check_resolution(resolution: [f64; 3]) -> Result<()> {
    if resolution.iter().all(|r| r.is_finite() && *r > 0.0) {
        Ok(())
    } else {
        Err(TedError::InvalidVolume(format!("resolution must be positive, got {resolution:?}")))
    }
}

/// Which locations take part in an evaluation.
///
/// Locations where the ground truth carries its background label are removed
/// from the domain entirely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalMask {
    evaluated: Vec<bool>,
    count: usize,
}

impl EvalMask {
    pub fn all(len: usize) -> Self {
        Self { evaluated: vec![true; len], count: len }
    }

    pub fn from_ground_truth(gt: &LabelVolume) -> Self {
        match gt.background {
            None => Self::all(gt.len()),
            Some(bg) => {
                let evaluated: Vec<bool> = gt.labels.iter().map(|&l| l != bg).collect();
                let count = evaluated.iter().filter(|&&e| e).count();
                Self { evaluated, count }
            }
        }
    }

    pub fn is_evaluated(&self, index: usize) -> bool {
        self.evaluated[index]
    }

    pub fn len(&self) -> usize {
        self.evaluated.len()
    }

    pub fn is_empty(&self) -> bool {
        self.evaluated.is_empty()
    }

    /// Number of evaluated locations.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.evaluated
    }

    pub fn iter_evaluated(&self) -> impl Iterator<Item = usize> + '_ {
        self.evaluated.iter().enumerate().filter_map(|(i, &e)| e.then_some(i))
    }
}

/// Joint label counts `(gt label, proposal label) -> #locations`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct OverlapTable {
    counts: BTreeMap<(Label, Label), u64>,
}

impl OverlapTable {
    pub fn get(&self, k: Label, l: Label) -> u64 {
        self.counts.get(&(k, l)).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = ((Label, Label), u64)> + '_ {
        self.counts.iter().map(|(&p, &c)| (p, c))
    }

    /// Number of distinct overlapping pairs.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn row_sums(&self) -> BTreeMap<Label, u64> {
        let mut sums = BTreeMap::new();
        for (&(k, _), &c) in &self.counts {
            *sums.entry(k).or_insert(0) += c;
        }
        sums
    }

    pub fn col_sums(&self) -> BTreeMap<Label, u64> {
        let mut sums = BTreeMap::new();
        for (&(_, l), &c) in &self.counts {
            *sums.entry(l).or_insert(0) += c;
        }
        sums
    }
}

/// Distinct labels at locations not carrying the volume's own background label.
pub fn label_set(vol: &LabelVolume) -> BTreeSet<Label> {
    vol.labels.iter().copied().filter(|&l| Some(l) != vol.background).collect()
}

/// Distinct labels of `vol` at the locations evaluated under `mask`.
pub fn label_set_masked(vol: &LabelVolume, mask: &EvalMask) -> BTreeSet<Label> {
    mask.iter_evaluated().map(|i| vol.labels[i]).collect()
}

pub fn check_same_dims(x: &LabelVolume, y: &LabelVolume) -> Result<()> {
    if x.dims == y.dims {
        Ok(())
    } else {
        Err(TedError::DimensionMismatch(x.dims, y.dims))
    }
}

pub fn overlap_table(x: &LabelVolume, y: &LabelVolume, mask: &EvalMask) -> Result<OverlapTable> {
    check_same_dims(x, y)?;
    if mask.len() != x.len() {
        return Err(TedError::InvalidParameter(format!(
            "mask covers {} locations, volume has {}",
            mask.len(),
            x.len()
        )));
    }
    let mut counts = BTreeMap::new();
    for i in mask.iter_evaluated() {
        *counts.entry((x.labels[i], y.labels[i])).or_insert(0) += 1;
    }
    Ok(OverlapTable { counts })
}

/// Physical distance in nm between the centers of locations `i` and `j`.
pub fn voxel_distance(vol: &LabelVolume, i: usize, j: usize) -> Result<f64> {
    vol.check_index(i)?;
    vol.check_index(j)?;
    let (ci, cj) = (vol.coords(i), vol.coords(j));
    let sq: f64 = (0..3)
        .map(|a| {
            let d = vol.resolution[a] * (ci[a] as f64 - cj[a] as f64);
            d * d
        })
        .sum();
    Ok(sq.sqrt())
}

const SEGV1_MAGIC: &str = "segv1";
const HEADER_ALIGN: usize = 16;

/// Serializes a volume in the `segv1` format.
///
/// The header is padded (trailing spaces on its last line) so that the
/// payload starts at a multiple of 16 bytes.
pub fn encode_segv1(vol: &LabelVolume) -> Vec<u8> {
    let [nx, ny, nz] = vol.dims;
    let [rx, ry, rz] = vol.resolution;
    let mut lines = vec![
        SEGV1_MAGIC.to_string(),
        format!("dims {nx} {ny} {nz}"),
        format!("res {rx:?} {ry:?} {rz:?}"),
        "dtype u32".to_string(),
    ];
    if let Some(bg) = vol.background {
        lines.push(format!("background {bg}"));
    }
    let mut header = lines.join("\n");
    let unpadded = header.len() + 2;
    let pad = (HEADER_ALIGN - unpadded % HEADER_ALIGN) % HEADER_ALIGN;
    header.extend(std::iter::repeat_n(' ', pad));
    header.push_str("\n\n");

    let mut out = Vec::with_capacity(header.len() + 4 * vol.labels.len());
    out.extend_from_slice(header.as_bytes());
    for &l in &vol.labels {
        out.extend_from_slice(&l.to_le_bytes());
    }
    out
}

pub fn decode_segv1(bytes: &[u8]) -> Result<LabelVolume> {
    let end = bytes
        .windows(2)
        .position(|w| w == b"\n\n")
        .ok_or_else(|| TedError::MalformedHeader("missing blank line terminating the header".into()))?;
    let header = std::str::from_utf8(&bytes[..end])
        .map_err(|_| TedError::MalformedHeader("header is not valid UTF-8".into()))?;
    let payload = &bytes[end + 2..];

    let mut lines = header.lines();
    if lines.next().map(str::trim) != Some(SEGV1_MAGIC) {
        return Err(TedError::MalformedHeader("first line must be `segv1`".into()));
    }
    let mut dims = None;
    let mut res = None;
    let mut dtype = None;
    let mut background = None;
    for line in lines {
        let mut fields = line.split_whitespace();
        let Some(key) = fields.next() else {
            return Err(TedError::MalformedHeader("empty line inside header".into()));
        };
        let values: Vec<&str> = fields.collect();
        match key {
            "dims" => dims = Some(parse_triple::<usize>(key, &values)?),
            "res" => res = Some(parse_triple::<f64>(key, &values)?),
            "dtype" => match values.as_slice() {
                [t] => dtype = Some(t.to_string()),
                _ => return Err(TedError::MalformedHeader("dtype takes one value".into())),
            },
            "background" => match values.as_slice() {
                [b] => {
                    background = Some(
                        b.parse::<Label>()
                            .map_err(|_| TedError::MalformedHeader(format!("invalid background `{b}`")))?,
                    )
                }
                _ => return Err(TedError::MalformedHeader("background takes one value".into())),
            },
            other => return Err(TedError::MalformedHeader(format!("unknown key `{other}`"))),
        }
    }
    let dims = dims.ok_or_else(|| TedError::MalformedHeader("missing dims".into()))?;
    let res = res.ok_or_else(|| TedError::MalformedHeader("missing res".into()))?;
    let dtype = dtype.ok_or_else(|| TedError::MalformedHeader("missing dtype".into()))?;
    if dtype != "u32" {
        return Err(TedError::UnsupportedDtype(dtype));
    }
    let expected: usize = dims.iter().product();
    if !payload.len().is_multiple_of(4) || payload.len() / 4 != expected {
        return Err(TedError::PayloadSize { expected, found: payload.len() / 4 });
    }
    let labels = payload.chunks_exact(4).map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
    Ok(LabelVolume::new(dims, res, labels)
        .map_err(|e| match e {
            TedError::InvalidVolume(msg) => TedError::MalformedHeader(msg),
            other => other,
        })?
        .with_background(background))
}

fn parse_triple<T: FromStr>(key: &str, values: &[&str]) -> Result<[T; 3]> {
    let parsed: Vec<T> = values
        .iter()
        .map(|v| v.parse::<T>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| TedError::MalformedHeader(format!("invalid values for `{key}`")))?;
    <[T; 3]>::try_from(parsed).map_err(|_| TedError::MalformedHeader(format!("`{key}` takes three values")))
}

pub fn encode_text_grid(vol: &LabelVolume) -> Result<String> {
    let [nx, _, nz] = vol.dims;
    if nz != 1 {
        return Err(TedError::InvalidParameter("text grids hold 1D or 2D volumes only".into()));
    }
    let mut out = String::new();
    for row in vol.labels.chunks(nx) {
        let line: Vec<String> = row.iter().map(|l| l.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    Ok(out)
}

pub fn decode_text_grid(text: &str) -> Result<LabelVolume> {
    let mut labels = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<Label> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| TedError::MalformedGrid(format!("line {}: non-integer entry", n + 1)))?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(TedError::MalformedGrid(format!(
                    "line {}: expected {w} entries, found {}",
                    n + 1,
                    row.len()
                )))
            }
            _ => {}
        }
        labels.extend(row);
        rows += 1;
    }
    let width = width.ok_or_else(|| TedError::MalformedGrid("empty grid".into()))?;
    LabelVolume::new([width, rows, 1], [1.0; 3], labels)
}

pub fn load_volume(path: impl AsRef<Path>, format: Format) -> Result<LabelVolume> {
    match format {
        Format::Segv1 => decode_segv1(&fs::read(path)?),
        Format::TextGrid => decode_text_grid(&fs::read_to_string(path)?),
    }
}

pub fn save_volume(vol: &LabelVolume, path: impl AsRef<Path>, format: Format) -> Result<()> {
    match format {
        Format::Segv1 => fs::write(path, encode_segv1(vol))?,
        Format::TextGrid => fs::write(path, encode_text_grid(vol)?)?,
    }
    Ok(())
}
