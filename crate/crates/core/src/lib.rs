//! Tolerant edit distance between label volumes.
//!
//! A proposal segmentation is compared with a ground truth by counting the
//! split and merge errors that remain after the proposal has been relabeled
//! as favorably as possible, where every location may only take labels that
//! occur within a boundary-shift threshold of it. The minimization is solved
//! exactly by branch-and-bound.
//!
//! ```
//! use ted_core::{ted, LabelVolume, TedConfig};
//!
//! let gt = LabelVolume::from_1d(vec![1, 1, 1, 2, 2, 2]).unwrap();
//! let proposal = LabelVolume::from_1d(vec![1, 1, 1, 1, 2, 2]).unwrap();
//!
//! // a one-voxel boundary shift is tolerated at 1 nm ...
//! assert_eq!(ted(&gt, &proposal, &TedConfig::new(1.0)).unwrap().ted_value, 0.0);
//! // ... and counted as one split plus one merge without tolerance
//! let strict = ted(&gt, &proposal, &TedConfig::new(0.0)).unwrap();
//! assert_eq!((strict.splits, strict.merges), (1, 1));
//! ```

pub mod error;
pub mod ilp;
pub mod metrics;
pub mod synth;
pub mod tolerance;
pub mod volume;

pub use error::{Result, TedError};
pub use ilp::{brute_force_solve, build_model, export_lp, solve_exact, SolverLimits, TedModel, TedSolution};
pub use metrics::{
    localize_errors, rand_index, raw_split_merge_counts, ted, variation_of_information, ErrorTag, TedConfig, TedReport,
    Voi,
};
pub use tolerance::{anisotropic_distance_field, build_regions, candidate_sets, CandidateRegion, ToleranceConfig};
pub use volume::{
    label_set, load_volume, overlap_table, save_volume, voxel_distance, EvalMask, Format, Label, LabelVolume,
};
