//! Archived bundle format for datasets, objects, probes, group sets and
//! reconstruction results.
//!
//! A bundle is a single stored-ZIP archive holding raw little-endian
//! array members plus a `manifest.json` describing each member's name,
//! dtype, shape, and CRC. Member names are fixed per bundle kind;
//! diffraction data is stored as f32, coordinates as f64, probes as c64
//! (f32 pairs) and objects as c128 (f64 pairs). Writes are deterministic:
//! equal bundles produce byte-identical files.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::core::ComplexImage2D;
use crate::error::{Error, Result};
use crate::forward::{DiffractionStack, Probe, ProbeNormalization};
use crate::io::zip::{crc32, read_archive, write_archive};
use crate::scan::grouping::{Group, GroupSet, GroupingParams, QUADRANT_COUNT};
use crate::scan::{ScanPattern, ScanPlan};

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BundleKind {
    Dataset,
    Object,
    Probe,
    Recon,
    Groups,
}

/// Whether diffraction values are raw photon counts or normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountKind {
    Raw,
    Normalized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberRecord {
    pub name: String,
    pub dtype: String,
    pub shape: Vec<usize>,
    pub crc: u32,
}

/// Scan-geometry metadata that has no array member of its own.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanMeta {
    pub pattern: ScanPattern,
    pub step_x: f64,
    pub step_y: f64,
    pub jitter_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupingMeta {
    pub params: GroupingParams,
    pub skipped: Vec<usize>,
    pub fallback_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: String,
    pub kind: BundleKind,
    /// Instrument or probe-source label.
    pub instrument: String,
    /// Expected photons per pattern; absent for unscaled or noiseless data.
    pub photon_target: Option<f64>,
    /// Detector crop size (pattern height == width) for dataset kinds.
    pub crop: usize,
    /// Human-readable derivation of every seed that fed this bundle.
    pub seed_lineage: String,
    pub counts: CountKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanMeta>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object_class: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_normalization: Option<ProbeNormalization>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grouping: Option<GroupingMeta>,
    pub members: Vec<MemberRecord>,
}

/// A complete measurement set: patterns plus probe, with optional ground
/// truth and grouping.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetBundle {
    pub diffraction: DiffractionStack,
    pub probe: Probe,
    pub ground_truth_object: Option<ComplexImage2D>,
    pub groups: Option<GroupSet>,
    pub manifest: Manifest,
}

impl DatasetBundle {
    /// Assemble a dataset bundle; the member table of the manifest is
    /// filled in at write time.
    pub fn new(
        diffraction: DiffractionStack,
        probe: Probe,
        ground_truth_object: Option<ComplexImage2D>,
        groups: Option<GroupSet>,
        seed_lineage: impl Into<String>,
        counts: CountKind,
    ) -> Result<Self> {
        let manifest = Manifest {
            format_version: FORMAT_VERSION.to_string(),
            kind: BundleKind::Dataset,
            instrument: diffraction.probe_label.clone(),
            photon_target: diffraction.photon_target,
            crop: diffraction.height(),
            seed_lineage: seed_lineage.into(),
            counts,
            scan: Some(ScanMeta {
                pattern: diffraction.positions.pattern,
                step_x: diffraction.positions.step_x,
                step_y: diffraction.positions.step_y,
                jitter_sigma: diffraction.positions.jitter_sigma,
            }),
            object_class: None,
            probe_normalization: Some(probe.normalization),
            grouping: None,
            members: Vec::new(),
        };
        let bundle = Self { diffraction, probe, ground_truth_object, groups, manifest };
        bundle.validate()?;
        Ok(bundle)
    }

    pub fn validate(&self) -> Result<()> {
        let stack = &self.diffraction;
        if stack.height() != stack.width() {
            return Err(Error::DimensionInconsistency(format!(
                "patterns must be square, got {}x{}",
                stack.height(),
                stack.width()
            )));
        }
        if self.manifest.crop != stack.height() {
            return Err(Error::DimensionInconsistency(format!(
                "manifest crop {} but patterns are {}x{}",
                self.manifest.crop,
                stack.height(),
                stack.width()
            )));
        }
        if let Some(groups) = &self.groups {
            for group in &groups.groups {
                let max = group.channels.iter().copied().max().unwrap().max(group.reference);
                if max >= stack.count() {
                    return Err(Error::DimensionInconsistency(format!(
                        "group member index {max} out of range for {} patterns",
                        stack.count()
                    )));
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Array member encoding

fn f64_as_f32_bytes(values: &[f64]) -> Vec<u8> {
    values.iter().flat_map(|&v| (v as f32).to_le_bytes()).collect()
}

fn f64_bytes(values: &[f64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

fn c64_bytes(values: &[Complex64]) -> Vec<u8> {
    values
        .iter()
        .flat_map(|v| {
            let mut b = (v.re as f32).to_le_bytes().to_vec();
            b.extend_from_slice(&(v.im as f32).to_le_bytes());
            b
        })
        .collect()
}

fn c128_bytes(values: &[Complex64]) -> Vec<u8> {
    values
        .iter()
        .flat_map(|v| {
            let mut b = v.re.to_le_bytes().to_vec();
            b.extend_from_slice(&v.im.to_le_bytes());
            b
        })
        .collect()
}

fn i64_bytes(values: &[i64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

fn decode_f32_as_f64(bytes: &[u8], member: &str) -> Result<Vec<f64>> {
    if bytes.len() % 4 != 0 {
        return Err(element_size_error(member, "f32"));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
        .collect())
}

fn decode_f64(bytes: &[u8], member: &str) -> Result<Vec<f64>> {
    if bytes.len() % 8 != 0 {
        return Err(element_size_error(member, "f64"));
    }
    Ok(bytes.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect())
}

fn decode_c64(bytes: &[u8], member: &str) -> Result<Vec<Complex64>> {
    if bytes.len() % 8 != 0 {
        return Err(element_size_error(member, "c64"));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|b| {
            Complex64::new(
                f32::from_le_bytes(b[0..4].try_into().unwrap()) as f64,
                f32::from_le_bytes(b[4..8].try_into().unwrap()) as f64,
            )
        })
        .collect())
}

fn decode_c128(bytes: &[u8], member: &str) -> Result<Vec<Complex64>> {
    if bytes.len() % 16 != 0 {
        return Err(element_size_error(member, "c128"));
    }
    Ok(bytes
        .chunks_exact(16)
        .map(|b| {
            Complex64::new(
                f64::from_le_bytes(b[0..8].try_into().unwrap()),
                f64::from_le_bytes(b[8..16].try_into().unwrap()),
            )
        })
        .collect())
}

fn decode_i64(bytes: &[u8], member: &str) -> Result<Vec<i64>> {
    if bytes.len() % 8 != 0 {
        return Err(element_size_error(member, "i64"));
    }
    Ok(bytes.chunks_exact(8).map(|b| i64::from_le_bytes(b.try_into().unwrap())).collect())
}

fn element_size_error(member: &str, dtype: &str) -> Error {
    Error::DimensionInconsistency(format!(
        "member `{member}` byte length is not a multiple of the {dtype} element size"
    ))
}

fn dtype_size(dtype: &str) -> Result<usize> {
    match dtype {
        "f32" => Ok(4),
        "f64" | "c64" | "i64" => Ok(8),
        "c128" => Ok(16),
        other => Err(Error::Validation(format!("unknown dtype `{other}`"))),
    }
}

// ---------------------------------------------------------------------------
// Writing

struct MemberBuilder {
    members: Vec<(String, Vec<u8>)>,
    records: Vec<MemberRecord>,
}

impl MemberBuilder {
    fn new() -> Self {
        Self { members: Vec::new(), records: Vec::new() }
    }

    fn push(&mut self, name: &str, dtype: &str, shape: Vec<usize>, bytes: Vec<u8>) {
        self.records.push(MemberRecord {
            name: name.to_string(),
            dtype: dtype.to_string(),
            shape,
            crc: crc32(&bytes),
        });
        self.members.push((name.to_string(), bytes));
    }

    fn finish(mut self, mut manifest: Manifest, path: &Path) -> Result<Manifest> {
        manifest.members = self.records;
        let json = serde_json::to_vec_pretty(&manifest)?;
        // The manifest member leads the archive so tools can locate it
        // without scanning.
        self.members.insert(0, ("manifest.json".to_string(), json));
        let file = File::create(path)?;
        let mut writer = BufWriter::new(file);
        write_archive(&mut writer, &self.members)?;
        Ok(manifest)
    }
}

fn groups_to_arrays(groups: &GroupSet) -> (Vec<i64>, Vec<i64>, Vec<i64>) {
    let refs = groups.groups.iter().map(|g| g.reference as i64).collect();
    let channels = groups
        .groups
        .iter()
        .flat_map(|g| g.channels.iter().map(|&c| c as i64))
        .collect();
    let flags = groups.groups.iter().map(|g| g.fallback_mask as i64).collect();
    (refs, channels, flags)
}

/// Write a dataset bundle; returns the manifest actually written
/// (member table filled in).
pub fn write_bundle(bundle: &DatasetBundle, path: &Path) -> Result<Manifest> {
    bundle.validate()?;
    let stack = &bundle.diffraction;
    let mut builder = MemberBuilder::new();
    builder.push(
        "diffraction",
        "f32",
        vec![stack.count(), stack.height(), stack.width()],
        f64_as_f32_bytes(stack.raw()),
    );
    let xs: Vec<f64> = stack.positions.positions.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = stack.positions.positions.iter().map(|p| p.1).collect();
    builder.push("xcoords", "f64", vec![stack.count()], f64_bytes(&xs));
    builder.push("ycoords", "f64", vec![stack.count()], f64_bytes(&ys));
    builder.push(
        "probe",
        "c64",
        vec![bundle.probe.size(), bundle.probe.size()],
        c64_bytes(bundle.probe.field.values()),
    );
    if let Some(truth) = &bundle.ground_truth_object {
        builder.push(
            "object_truth",
            "c128",
            vec![truth.height(), truth.width()],
            c128_bytes(truth.values()),
        );
    }
    let mut manifest = bundle.manifest.clone();
    if let Some(groups) = &bundle.groups {
        let (refs, channels, flags) = groups_to_arrays(groups);
        let n = groups.groups.len();
        builder.push("group_refs", "i64", vec![n], i64_bytes(&refs));
        builder.push("group_channels", "i64", vec![n, QUADRANT_COUNT], i64_bytes(&channels));
        builder.push("group_flags", "i64", vec![n], i64_bytes(&flags));
        manifest.grouping = Some(GroupingMeta {
            params: groups.params,
            skipped: groups.skipped.clone(),
            fallback_count: groups.groups.iter().filter(|g| g.fallback_mask != 0).count(),
        });
    }
    builder.finish(manifest, path)
}

fn standalone_manifest(kind: BundleKind, label: &str, seed_lineage: &str, crop: usize) -> Manifest {
    Manifest {
        format_version: FORMAT_VERSION.to_string(),
        kind,
        instrument: label.to_string(),
        photon_target: None,
        crop,
        seed_lineage: seed_lineage.to_string(),
        counts: CountKind::Raw,
        scan: None,
        object_class: None,
        probe_normalization: None,
        grouping: None,
        members: Vec::new(),
    }
}

/// Write a standalone complex object (`kind = object`).
pub fn write_object_bundle(
    object: &ComplexImage2D,
    class_tag: &str,
    seed_lineage: &str,
    path: &Path,
) -> Result<Manifest> {
    let mut builder = MemberBuilder::new();
    builder.push(
        "object_truth",
        "c128",
        vec![object.height(), object.width()],
        c128_bytes(object.values()),
    );
    let mut manifest =
        standalone_manifest(BundleKind::Object, class_tag, seed_lineage, object.height());
    manifest.object_class = Some(class_tag.to_string());
    builder.finish(manifest, path)
}

/// Write a standalone probe (`kind = probe`).
pub fn write_probe_bundle(probe: &Probe, seed_lineage: &str, path: &Path) -> Result<Manifest> {
    let mut builder = MemberBuilder::new();
    builder.push(
        "probe",
        "c64",
        vec![probe.size(), probe.size()],
        c64_bytes(probe.field.values()),
    );
    let mut manifest =
        standalone_manifest(BundleKind::Probe, &probe.source_label, seed_lineage, probe.size());
    manifest.probe_normalization = Some(probe.normalization);
    builder.finish(manifest, path)
}

/// Write a reconstruction result (`kind = recon`), optionally with its
/// illuminated-region mask.
pub fn write_recon_bundle(
    object_estimate: &ComplexImage2D,
    probe_estimate: &Probe,
    error_history: &[f64],
    illuminated_mask: Option<&crate::core::RealImage2D>,
    seed_lineage: &str,
    path: &Path,
) -> Result<Manifest> {
    let mut builder = MemberBuilder::new();
    builder.push(
        "object_estimate",
        "c128",
        vec![object_estimate.height(), object_estimate.width()],
        c128_bytes(object_estimate.values()),
    );
    builder.push(
        "probe",
        "c64",
        vec![probe_estimate.size(), probe_estimate.size()],
        c64_bytes(probe_estimate.field.values()),
    );
    builder.push("error_history", "f64", vec![error_history.len()], f64_bytes(error_history));
    if let Some(mask) = illuminated_mask {
        if mask.height() != object_estimate.height() || mask.width() != object_estimate.width() {
            return Err(Error::DimensionMismatch(format!(
                "mask {}x{} vs object estimate {}x{}",
                mask.height(),
                mask.width(),
                object_estimate.height(),
                object_estimate.width()
            )));
        }
        builder.push(
            "mask",
            "f64",
            vec![mask.height(), mask.width()],
            f64_bytes(mask.values()),
        );
    }
    let mut manifest = standalone_manifest(
        BundleKind::Recon,
        &probe_estimate.source_label,
        seed_lineage,
        probe_estimate.size(),
    );
    manifest.probe_normalization = Some(probe_estimate.normalization);
    builder.finish(manifest, path)
}

/// Write a group set with its scan positions (`kind = groups`).
pub fn write_groups_bundle(
    groups: &GroupSet,
    plan: &ScanPlan,
    seed_lineage: &str,
    path: &Path,
) -> Result<Manifest> {
    let mut builder = MemberBuilder::new();
    let xs: Vec<f64> = plan.positions.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = plan.positions.iter().map(|p| p.1).collect();
    builder.push("xcoords", "f64", vec![plan.len()], f64_bytes(&xs));
    builder.push("ycoords", "f64", vec![plan.len()], f64_bytes(&ys));
    let (refs, channels, flags) = groups_to_arrays(groups);
    let n = groups.groups.len();
    builder.push("group_refs", "i64", vec![n], i64_bytes(&refs));
    builder.push("group_channels", "i64", vec![n, QUADRANT_COUNT], i64_bytes(&channels));
    builder.push("group_flags", "i64", vec![n], i64_bytes(&flags));
    let mut manifest = standalone_manifest(BundleKind::Groups, "groups", seed_lineage, 0);
    manifest.scan = Some(ScanMeta {
        pattern: plan.pattern,
        step_x: plan.step_x,
        step_y: plan.step_y,
        jitter_sigma: plan.jitter_sigma,
    });
    manifest.grouping = Some(GroupingMeta {
        params: groups.params,
        skipped: groups.skipped.clone(),
        fallback_count: groups.groups.iter().filter(|g| g.fallback_mask != 0).count(),
    });
    builder.finish(manifest, path)
}

// ---------------------------------------------------------------------------
// Reading

/// Parsed archive with manifest-level validation done.
pub struct RawBundle {
    pub manifest: Manifest,
    members: Vec<(String, Vec<u8>)>,
}

impl RawBundle {
    pub fn member_names(&self) -> Vec<&str> {
        self.members.iter().map(|(n, _)| n.as_str()).collect()
    }

    fn bytes(&self, name: &str) -> Result<&[u8]> {
        self.members
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, b)| b.as_slice())
            .ok_or_else(|| Error::MissingMember(name.to_string()))
    }

    fn record(&self, name: &str) -> Result<&MemberRecord> {
        self.manifest
            .members
            .iter()
            .find(|m| m.name == name)
            .ok_or_else(|| Error::MissingMember(format!("{name} (manifest record)")))
    }

    /// Expected element count from the manifest shape, after verifying
    /// the byte payload agrees with dtype and shape.
    fn checked_len(&self, name: &str, expected_dtype: &str) -> Result<usize> {
        let record = self.record(name)?;
        if record.dtype != expected_dtype {
            return Err(Error::Validation(format!(
                "member `{name}` has dtype {} but {expected_dtype} is required",
                record.dtype
            )));
        }
        let len: usize = record.shape.iter().product();
        let bytes = self.bytes(name)?;
        if bytes.len() != len * dtype_size(expected_dtype)? {
            return Err(Error::DimensionInconsistency(format!(
                "member `{name}` declares shape {:?} ({len} elements) but holds {} bytes",
                record.shape,
                bytes.len()
            )));
        }
        if crc32(bytes) != record.crc {
            return Err(Error::Checksum { member: name.to_string() });
        }
        Ok(len)
    }

    pub fn shape(&self, name: &str) -> Result<Vec<usize>> {
        Ok(self.record(name)?.shape.clone())
    }

    pub fn has_member(&self, name: &str) -> bool {
        self.members.iter().any(|(n, _)| n != "manifest.json" && n == name)
    }

    pub fn f64_member(&self, name: &str) -> Result<Vec<f64>> {
        self.checked_len(name, "f64")?;
        decode_f64(self.bytes(name)?, name)
    }

    pub fn f32_member_as_f64(&self, name: &str) -> Result<Vec<f64>> {
        self.checked_len(name, "f32")?;
        decode_f32_as_f64(self.bytes(name)?, name)
    }

    pub fn c64_member(&self, name: &str) -> Result<Vec<Complex64>> {
        self.checked_len(name, "c64")?;
        decode_c64(self.bytes(name)?, name)
    }

    pub fn c128_member(&self, name: &str) -> Result<Vec<Complex64>> {
        self.checked_len(name, "c128")?;
        decode_c128(self.bytes(name)?, name)
    }

    pub fn i64_member(&self, name: &str) -> Result<Vec<i64>> {
        self.checked_len(name, "i64")?;
        decode_i64(self.bytes(name)?, name)
    }
}

/// Open any bundle and validate the manifest against the archive
/// contents (member presence, dtypes, shapes, checksums).
pub fn open_bundle(path: &Path) -> Result<RawBundle> {
    let file = File::open(path)?;
    let mut reader = BufReader::new(file);
    let members = read_archive(&mut reader)?;
    let manifest_bytes = members
        .iter()
        .find(|(n, _)| n == "manifest.json")
        .map(|(_, b)| b.clone())
        .ok_or_else(|| Error::MissingMember("manifest.json".to_string()))?;
    let manifest: Manifest = serde_json::from_slice(&manifest_bytes)?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(Error::VersionMismatch { found: manifest.format_version });
    }
    let bundle = RawBundle { manifest, members };
    // Every declared member must exist with matching dtype/shape/crc.
    for record in bundle.manifest.members.clone() {
        bundle.checked_len(&record.name, &record.dtype)?;
    }
    Ok(bundle)
}

fn groups_from_raw(raw: &RawBundle) -> Result<GroupSet> {
    let meta = raw
        .manifest
        .grouping
        .clone()
        .ok_or_else(|| Error::Validation("group arrays present but no grouping metadata".into()))?;
    let refs = raw.i64_member("group_refs")?;
    let channels = raw.i64_member("group_channels")?;
    let flags = if raw.has_member("group_flags") {
        raw.i64_member("group_flags")?
    } else {
        vec![0; refs.len()]
    };
    if channels.len() != refs.len() * QUADRANT_COUNT || flags.len() != refs.len() {
        return Err(Error::DimensionInconsistency(format!(
            "group arrays disagree: {} refs, {} channels, {} flags",
            refs.len(),
            channels.len(),
            flags.len()
        )));
    }
    let to_index = |v: i64, what: &str| -> Result<usize> {
        usize::try_from(v)
            .map_err(|_| Error::Validation(format!("negative {what} index {v} in group arrays")))
    };
    let mut groups = Vec::with_capacity(refs.len());
    for (i, &reference) in refs.iter().enumerate() {
        let mut group_channels = [0usize; QUADRANT_COUNT];
        for (q, slot) in group_channels.iter_mut().enumerate() {
            *slot = to_index(channels[i * QUADRANT_COUNT + q], "channel")?;
        }
        let mask = flags[i];
        if !(0..16).contains(&mask) {
            return Err(Error::Validation(format!("group flag {mask} out of range")));
        }
        groups.push(Group {
            reference: to_index(reference, "reference")?,
            channels: group_channels,
            fallback_mask: mask as u8,
        });
    }
    Ok(GroupSet { groups, skipped: meta.skipped, params: meta.params })
}

fn scan_plan_from_raw(raw: &RawBundle) -> Result<ScanPlan> {
    let xs = raw.f64_member("xcoords")?;
    let ys = raw.f64_member("ycoords")?;
    if xs.len() != ys.len() {
        return Err(Error::DimensionInconsistency(format!(
            "{} x-coordinates but {} y-coordinates",
            xs.len(),
            ys.len()
        )));
    }
    let meta = raw.manifest.scan.unwrap_or(ScanMeta {
        pattern: ScanPattern::Isotropic,
        step_x: 0.0,
        step_y: 0.0,
        jitter_sigma: 0.0,
    });
    Ok(ScanPlan {
        positions: xs.into_iter().zip(ys).collect(),
        pattern: meta.pattern,
        step_x: meta.step_x,
        step_y: meta.step_y,
        jitter_sigma: meta.jitter_sigma,
    })
}

fn probe_from_raw(raw: &RawBundle, member: &str) -> Result<Probe> {
    let shape = raw.shape(member)?;
    if shape.len() != 2 {
        return Err(Error::DimensionInconsistency(format!(
            "probe member must be 2-D, got shape {shape:?}"
        )));
    }
    let values = raw.c64_member(member)?;
    let field = ComplexImage2D::new(shape[0], shape[1], values)?;
    let mut probe = Probe::new(field, raw.manifest.instrument.clone())?;
    if let Some(norm) = raw.manifest.probe_normalization {
        probe.normalization = norm;
    }
    Ok(probe)
}

fn complex_image_from_raw(raw: &RawBundle, member: &str) -> Result<ComplexImage2D> {
    let shape = raw.shape(member)?;
    if shape.len() != 2 {
        return Err(Error::DimensionInconsistency(format!(
            "member `{member}` must be 2-D, got shape {shape:?}"
        )));
    }
    ComplexImage2D::new(shape[0], shape[1], raw.c128_member(member)?)
}

/// Read a full dataset bundle with all validation.
pub fn read_bundle(path: &Path) -> Result<DatasetBundle> {
    let raw = open_bundle(path)?;
    if raw.manifest.kind != BundleKind::Dataset {
        return Err(Error::Validation(format!(
            "expected a dataset bundle, found kind {:?}",
            raw.manifest.kind
        )));
    }
    if !raw.has_member("probe") {
        return Err(Error::Validation("probe required".into()));
    }
    let shape = raw.shape("diffraction")?;
    if shape.len() != 3 {
        return Err(Error::DimensionInconsistency(format!(
            "diffraction must be 3-D, got shape {shape:?}"
        )));
    }
    let (count, height, width) = (shape[0], shape[1], shape[2]);
    if height != raw.manifest.crop || width != raw.manifest.crop {
        return Err(Error::DimensionInconsistency(format!(
            "manifest crop {} but patterns are {height}x{width}",
            raw.manifest.crop
        )));
    }
    let patterns = raw.f32_member_as_f64("diffraction")?;
    let positions = scan_plan_from_raw(&raw)?;
    if positions.len() != count {
        return Err(Error::DimensionInconsistency(format!(
            "{count} patterns but {} scan positions",
            positions.len()
        )));
    }
    let diffraction = DiffractionStack::new(
        patterns,
        count,
        height,
        width,
        positions,
        raw.manifest.photon_target,
        raw.manifest.instrument.clone(),
    )?;
    let probe = probe_from_raw(&raw, "probe")?;
    let ground_truth_object = if raw.has_member("object_truth") {
        Some(complex_image_from_raw(&raw, "object_truth")?)
    } else {
        None
    };
    let groups = if raw.has_member("group_refs") { Some(groups_from_raw(&raw)?) } else { None };
    let bundle = DatasetBundle {
        diffraction,
        probe,
        ground_truth_object,
        groups,
        manifest: raw.manifest,
    };
    bundle.validate()?;
    Ok(bundle)
}

/// Read a standalone object bundle.
pub fn read_object_bundle(path: &Path) -> Result<(ComplexImage2D, Manifest)> {
    let raw = open_bundle(path)?;
    if raw.manifest.kind != BundleKind::Object {
        return Err(Error::Validation(format!(
            "expected an object bundle, found kind {:?}",
            raw.manifest.kind
        )));
    }
    Ok((complex_image_from_raw(&raw, "object_truth")?, raw.manifest))
}

/// Read a standalone probe bundle.
pub fn read_probe_bundle(path: &Path) -> Result<(Probe, Manifest)> {
    let raw = open_bundle(path)?;
    if raw.manifest.kind != BundleKind::Probe {
        return Err(Error::Validation(format!(
            "expected a probe bundle, found kind {:?}",
            raw.manifest.kind
        )));
    }
    Ok((probe_from_raw(&raw, "probe")?, raw.manifest))
}

/// Contents of a reconstruction bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconBundle {
    pub object_estimate: ComplexImage2D,
    pub probe_estimate: Probe,
    pub error_history: Vec<f64>,
    pub illuminated_mask: Option<crate::core::RealImage2D>,
    pub manifest: Manifest,
}

/// Read a reconstruction bundle.
pub fn read_recon_bundle(path: &Path) -> Result<ReconBundle> {
    let raw = open_bundle(path)?;
    if raw.manifest.kind != BundleKind::Recon {
        return Err(Error::Validation(format!(
            "expected a recon bundle, found kind {:?}",
            raw.manifest.kind
        )));
    }
    let object_estimate = complex_image_from_raw(&raw, "object_estimate")?;
    let illuminated_mask = if raw.has_member("mask") {
        let shape = raw.shape("mask")?;
        if shape.len() != 2 {
            return Err(Error::DimensionInconsistency(format!(
                "mask member must be 2-D, got shape {shape:?}"
            )));
        }
        Some(crate::core::RealImage2D::new(shape[0], shape[1], raw.f64_member("mask")?)?)
    } else {
        None
    };
    Ok(ReconBundle {
        object_estimate,
        probe_estimate: probe_from_raw(&raw, "probe")?,
        error_history: raw.f64_member("error_history")?,
        illuminated_mask,
        manifest: raw.manifest,
    })
}

/// Read a group-set bundle with its scan positions.
pub fn read_groups_bundle(path: &Path) -> Result<(GroupSet, ScanPlan, Manifest)> {
    let raw = open_bundle(path)?;
    if raw.manifest.kind != BundleKind::Groups {
        return Err(Error::Validation(format!(
            "expected a groups bundle, found kind {:?}",
            raw.manifest.kind
        )));
    }
    Ok((groups_from_raw(&raw)?, scan_plan_from_raw(&raw)?, raw.manifest))
}
