//! Deterministic on-disk bundles and detector preprocessing.

pub mod bundle;
pub mod preprocess;
pub mod zip;

pub use bundle::{
    open_bundle, read_bundle, read_groups_bundle, read_object_bundle, read_probe_bundle,
    read_recon_bundle, write_bundle, write_groups_bundle, write_object_bundle, write_probe_bundle,
    write_recon_bundle, BundleKind, CountKind, DatasetBundle, Manifest, MemberRecord, RawBundle,
    ReconBundle, ScanMeta, FORMAT_VERSION,
};
pub use preprocess::{preprocess, PreprocessReport};
