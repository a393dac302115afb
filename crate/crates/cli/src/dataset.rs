//! On-disk datasets: one JSONL record per frame plus 8-bit PGM eye crops.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use gazekit::geometry::{EyePolygon, Landmarks};
use gazekit::synth::{Population, SynthFrame};
use gazekit::{FrameRecord, GazeRegion, GrayImage};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const FRAMES_FILE: &str = "frames.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const CROPS_DIR: &str = "crops";

/// Wire form of one frame. Face-detection failures carry `null` geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameLine {
    pub subject_id: String,
    pub frame_index: u64,
    pub label: GazeRegion,
    pub landmarks: Option<Vec<f64>>,
    pub eye_crop: Option<String>,
    pub eye_polygon: Option<Vec<f64>>,
}

/// A dataset line after loading. `record` is `None` whenever the frame
/// cannot be used as a face: null geometry, bad numbers, a missing crop,
/// or an unparseable line.
#[derive(Debug, Clone)]
pub struct LoadedFrame {
    pub line: usize,
    pub subject_id: Option<String>,
    pub frame_index: Option<u64>,
    pub label: Option<GazeRegion>,
    pub record: Option<FrameRecord>,
}

pub fn write_pgm(path: &Path, img: &GrayImage) -> std::io::Result<()> {
    let mut out = Vec::with_capacity(img.data().len() + 16);
    write!(out, "P5\n{} {}\n255\n", img.width(), img.height())?;
    out.extend_from_slice(img.data());
    fs::write(path, out)
}

/// Reads a binary 8-bit PGM (`P5`, maxval <= 255); `#` comments are allowed
/// in the header.
pub fn read_pgm(path: &Path) -> CliResult<GrayImage> {
    let bytes = fs::read(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    parse_pgm(&bytes).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

pub fn parse_pgm(bytes: &[u8]) -> Result<GrayImage, String> {
    let mut pos = 0;
    let mut token = || -> Result<String, String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("truncated PGM header".into());
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    if token()? != "P5" {
        return Err("not a binary PGM (P5)".into());
    }
    let num = |t: String| {
        t.parse::<usize>()
            .map_err(|_| format!("bad PGM header value `{t}`"))
    };
    let width = num(token()?)?;
    let height = num(token()?)?;
    let maxval = num(token()?)?;
    if maxval == 0 || maxval > 255 {
        return Err(format!("unsupported maxval {maxval}"));
    }
    // exactly one whitespace byte separates the header from the raster
    let start = pos + 1;
    let end = start + width * height;
    if end > bytes.len() {
        return Err("truncated PGM raster".into());
    }
    GrayImage::new(width, height, bytes[start..end].to_vec()).map_err(|e| e.to_string())
}

/// Resolves `--data`: a dataset directory or a JSONL file.
pub fn frames_path(data: &Path) -> PathBuf {
    if data.is_dir() {
        data.join(FRAMES_FILE)
    } else {
        data.to_path_buf()
    }
}

fn to_record(line: &FrameLine, base: &Path) -> Option<FrameRecord> {
    let landmarks = Landmarks::from_flat(line.landmarks.as_deref()?).ok()?;
    let polygon = EyePolygon::from_flat(line.eye_polygon.as_deref()?).ok()?;
    let crop = read_pgm(&base.join(line.eye_crop.as_deref()?)).ok()?;
    FrameRecord::new(
        line.subject_id.clone(),
        line.frame_index,
        landmarks,
        crop,
        polygon,
        line.label,
    )
    .ok()
}

/// Parses one JSONL line; crop paths are relative to `base`.
pub fn parse_line(number: usize, text: &str, base: &Path) -> LoadedFrame {
    match serde_json::from_str::<FrameLine>(text) {
        Ok(line) => LoadedFrame {
            line: number,
            record: to_record(&line, base),
            subject_id: Some(line.subject_id),
            frame_index: Some(line.frame_index),
            label: Some(line.label),
        },
        Err(_) => {
            // salvage identity fields when the geometry is what's broken
            let v: Option<serde_json::Value> = serde_json::from_str(text).ok();
            let field = |k: &str| v.as_ref().and_then(|v| v.get(k)).cloned();
            LoadedFrame {
                line: number,
                subject_id: field("subject_id").and_then(|s| s.as_str().map(str::to_string)),
                frame_index: field("frame_index").and_then(|s| s.as_u64()),
                label: field("label").and_then(|s| s.as_str().and_then(|s| s.parse().ok())),
                record: None,
            }
        }
    }
}

/// Loads every non-blank line of a dataset.
pub fn read_dataset(data: &Path) -> CliResult<Vec<LoadedFrame>> {
    let path = frames_path(data);
    let file =
        fs::File::open(&path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut frames = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        frames.push(parse_line(i + 1, &line, &base));
    }
    Ok(frames)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub subjects: usize,
    pub frames: usize,
    pub face_failures: usize,
    pub frames_per_region: usize,
    pub seed: u64,
    /// SHA-256 over the JSONL file followed by every crop in line order.
    pub sha256: String,
    pub subject_alpha: Vec<(String, f64)>,
}

fn crop_name(f: &SynthFrame) -> String {
    format!("{CROPS_DIR}/{}_{:06}.pgm", f.subject_id, f.frame_index)
}

/// Writes a synthetic population in the ingestion format.
pub fn write_dataset(
    dir: &Path,
    pop: &Population,
    frames_per_region: usize,
    seed: u64,
) -> CliResult<Manifest> {
    let io = |e: std::io::Error| CliError::data(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir.join(CROPS_DIR)).map_err(io)?;
    let mut hasher = Sha256::new();
    let mut jsonl = Vec::new();
    let mut face_failures = 0;
    for f in &pop.frames {
        let line = match &f.record {
            Some(r) => FrameLine {
                subject_id: f.subject_id.clone(),
                frame_index: f.frame_index,
                label: f.label,
                landmarks: Some(r.landmarks().to_flat()),
                eye_crop: Some(crop_name(f)),
                eye_polygon: Some(r.eye_polygon().to_flat()),
            },
            None => {
                face_failures += 1;
                FrameLine {
                    subject_id: f.subject_id.clone(),
                    frame_index: f.frame_index,
                    label: f.label,
                    landmarks: None,
                    eye_crop: None,
                    eye_polygon: None,
                }
            }
        };
        serde_json::to_writer(&mut jsonl, &line).map_err(|e| CliError::internal(e.to_string()))?;
        jsonl.push(b'\n');
    }
    hasher.update(&jsonl);
    fs::write(dir.join(FRAMES_FILE), &jsonl).map_err(io)?;
    for f in &pop.frames {
        if let Some(r) = &f.record {
            let path = dir.join(crop_name(f));
            write_pgm(&path, r.eye_crop()).map_err(io)?;
            hasher.update(fs::read(&path).map_err(io)?);
        }
    }
    let manifest = Manifest {
        subjects: pop.profiles.len(),
        frames: pop.frames.len(),
        face_failures,
        frames_per_region,
        seed,
        sha256: hex::encode(hasher.finalize()),
        subject_alpha: pop
            .profiles
            .iter()
            .map(|p| (p.subject_id.clone(), p.head_gain))
            .collect(),
    };
    let file = fs::File::create(dir.join(MANIFEST_FILE)).map_err(io)?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, &manifest)
        .map_err(|e| CliError::internal(e.to_string()))?;
    w.write_all(b"\n").map_err(io)?;
    Ok(manifest)
}
