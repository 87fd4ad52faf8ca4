//! Binary matrix I/O, co-node pooling, and ViG model presets.
//!
//! File format (little-endian throughout):
//!   magic "DIGC" (4 bytes) | version u16 = 1 | dtype u16 (0 = f32, 1 = u32)
//!   | rows u32 | cols u32 | payload of rows*cols values, row-major.
//! Neighbor files use dtype 1 with cols = k.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::Deserialize;

use crate::error::{DigcError, Result};
use crate::types::{FeatureMatrix, NeighborIndexMatrix};

pub const MAGIC: [u8; 4] = *b"DIGC";
pub const VERSION: u16 = 1;
pub const DTYPE_F32: u16 = 0;
pub const DTYPE_U32: u16 = 1;

struct Header {
    dtype: u16,
    rows: u32,
    cols: u32,
}

fn read_header(reader: &mut impl Read) -> Result<Header> {
    let mut magic = [0u8; 4];
    reader
        .read_exact(&mut magic)
        .map_err(|_| DigcError::BadMagic)?;
    if magic != MAGIC {
        return Err(DigcError::BadMagic);
    }
    let mut buf2 = [0u8; 2];
    let mut buf4 = [0u8; 4];
    reader.read_exact(&mut buf2).map_err(truncated_header)?;
    let version = u16::from_le_bytes(buf2);
    if version != VERSION {
        return Err(DigcError::UnsupportedVersion(version));
    }
    reader.read_exact(&mut buf2).map_err(truncated_header)?;
    let dtype = u16::from_le_bytes(buf2);
    if dtype != DTYPE_F32 && dtype != DTYPE_U32 {
        return Err(DigcError::UnsupportedDtype(dtype));
    }
    reader.read_exact(&mut buf4).map_err(truncated_header)?;
    let rows = u32::from_le_bytes(buf4);
    reader.read_exact(&mut buf4).map_err(truncated_header)?;
    let cols = u32::from_le_bytes(buf4);
    Ok(Header { dtype, rows, cols })
}

fn truncated_header(_: std::io::Error) -> DigcError {
    DigcError::Truncated {
        expected: 16,
        got: 0,
    }
}

/// Reads the payload without trusting the declared size for allocation:
/// a short file fails with `Truncated` before any oversized buffer exists.
fn read_payload(reader: &mut impl Read, header: &Header) -> Result<Vec<u8>> {
    let expected = u64::from(header.rows) * u64::from(header.cols) * 4;
    let mut payload = Vec::new();
    reader.take(expected).read_to_end(&mut payload)?;
    if (payload.len() as u64) < expected {
        return Err(DigcError::Truncated {
            expected,
            got: payload.len() as u64,
        });
    }
    Ok(payload)
}

/// Parses a dtype-0 (f32) matrix from any reader.
pub fn read_matrix(reader: &mut impl Read) -> Result<FeatureMatrix> {
    let header = read_header(reader)?;
    if header.dtype != DTYPE_F32 {
        return Err(DigcError::UnsupportedDtype(header.dtype));
    }
    let payload = read_payload(reader, &header)?;
    let data: Vec<f32> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    FeatureMatrix::new(header.rows as usize, header.cols as usize, data)
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let mut reader = BufReader::new(File::open(path)?);
    read_matrix(&mut reader)
}

pub fn write_matrix(writer: &mut impl Write, m: &FeatureMatrix) -> Result<()> {
    writer.write_all(&MAGIC)?;
    writer.write_all(&VERSION.to_le_bytes())?;
    writer.write_all(&DTYPE_F32.to_le_bytes())?;
    writer.write_all(&(m.rows() as u32).to_le_bytes())?;
    writer.write_all(&(m.cols() as u32).to_le_bytes())?;
    for v in m.data() {
        writer.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn save_matrix(m: &FeatureMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    write_matrix(&mut writer, m)?;
    writer.flush()?;
    Ok(())
}

/// Parses a dtype-1 (u32) neighbor matrix from any reader.
pub fn read_neighbors(reader: &mut impl Read) -> Result<NeighborIndexMatrix> {
    let header = read_header(reader)?;
    if header.dtype != DTYPE_U32 {
        return Err(DigcError::UnsupportedDtype(header.dtype));
    }
    let payload = read_payload(reader, &header)?;
    let data: Vec<u32> = payload
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    NeighborIndexMatrix::new(header.rows as usize, header.cols as usize, data)
}

pub fn load_neighbors(path: impl AsRef<Path>) -> Result<NeighborIndexMatrix> {
    let mut reader = BufReader::new(File::open(path)?);
    read_neighbors(&mut reader)
}

pub fn write_neighbors(writer: &mut impl Write, i: &NeighborIndexMatrix) -> Result<()> {
    writer.write_all(&MAGIC)?;
    writer.write_all(&VERSION.to_le_bytes())?;
    writer.write_all(&DTYPE_U32.to_le_bytes())?;
    writer.write_all(&(i.rows() as u32).to_le_bytes())?;
    writer.write_all(&(i.k() as u32).to_le_bytes())?;
    for v in i.data() {
        writer.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn save_neighbors(i: &NeighborIndexMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    write_neighbors(&mut writer, i)?;
    writer.flush()?;
    Ok(())
}

/// Mean-pools the node grid by a factor `r` per spatial dimension: co-node
/// row (gh, gw) is the arithmetic mean of the r x r block of node rows it
/// covers, in row-major grid order.
pub fn pool_conodes(
    x: &FeatureMatrix,
    grid_h: usize,
    grid_w: usize,
    r: usize,
) -> Result<FeatureMatrix> {
    if grid_h * grid_w != x.rows() {
        return Err(DigcError::DimensionMismatch {
            context: "grid_h*grid_w vs X rows",
            left: (grid_h * grid_w).to_string(),
            right: x.rows().to_string(),
        });
    }
    if r == 0 || grid_h % r != 0 || grid_w % r != 0 {
        return Err(DigcError::IndivisibleGrid { grid_h, grid_w, r });
    }
    let out_h = grid_h / r;
    let out_w = grid_w / r;
    let cols = x.cols();
    let inv = 1.0 / (r * r) as f32;
    let mut data = Vec::with_capacity(out_h * out_w * cols);
    for gh in 0..out_h {
        for gw in 0..out_w {
            for c in 0..cols {
                let mut acc = 0.0f32;
                for dh in 0..r {
                    for dw in 0..r {
                        let src = (gh * r + dh) * grid_w + (gw * r + dw);
                        acc += x.row(src)[c];
                    }
                }
                data.push(acc * inv);
            }
        }
    }
    FeatureMatrix::new(out_h * out_w, cols, data)
}

/// One layer record of a model preset.
#[derive(Debug, Clone, Deserialize)]
pub struct LayerSpec {
    pub r: usize,
    pub d_feat: usize,
    pub k: usize,
    pub d: usize,
}

/// A named ViG variant: patch size plus per-layer (r, D, k, d) records.
#[derive(Debug, Clone, Deserialize)]
pub struct ModelPreset {
    pub name: String,
    pub patch: usize,
    pub layer: Vec<LayerSpec>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Presets {
    pub preset: Vec<ModelPreset>,
}

/// Problem dimensions for one preset layer at a given resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResolvedLayer {
    pub n: usize,
    pub m: usize,
    pub d_feat: usize,
    pub k: usize,
    pub d: usize,
    pub r: usize,
}

impl Presets {
    /// Presets bundled with the crate (data/presets.toml).
    pub fn builtin() -> Self {
        toml::from_str(include_str!("../data/presets.toml"))
            .expect("bundled preset file is well formed")
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| DigcError::InvalidPlan(format!("preset file: {e}")))
    }

    pub fn resolve(&self, name: &str, h: usize, w: usize, layer: usize) -> Result<ResolvedLayer> {
        let preset = self
            .preset
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| DigcError::UnknownPreset(name.to_string()))?;
        let spec = preset.layer.get(layer).ok_or_else(|| {
            DigcError::IllegalResolution {
                h,
                w,
                reason: format!("preset {name} has no layer {layer}"),
            }
        })?;
        if h == 0 || w == 0 || h % preset.patch != 0 || w % preset.patch != 0 {
            return Err(DigcError::IllegalResolution {
                h,
                w,
                reason: format!("resolution not divisible by patch size {}", preset.patch),
            });
        }
        let grid_h = h / preset.patch;
        let grid_w = w / preset.patch;
        if grid_h % spec.r != 0 || grid_w % spec.r != 0 {
            return Err(DigcError::IllegalResolution {
                h,
                w,
                reason: format!("patch grid {grid_h}x{grid_w} not divisible by r={}", spec.r),
            });
        }
        let n = grid_h * grid_w;
        Ok(ResolvedLayer {
            n,
            m: n / (spec.r * spec.r),
            d_feat: spec.d_feat,
            k: spec.k,
            d: spec.d,
            r: spec.r,
        })
    }
}
