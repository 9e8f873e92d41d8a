//! Scan-pattern generation and quadrant-ordered grouping of overlapping
//! measurements.

pub mod grouping;
pub mod kdtree;
pub mod patterns;

pub use grouping::{
    group_quadrants, quadrant_of, regroup, verify_groupset, Group, GroupSet, GroupingParams,
};
pub use kdtree::KdTree2;
pub use patterns::{fermat_spiral, make_scan, ScanPattern, ScanPlan};
