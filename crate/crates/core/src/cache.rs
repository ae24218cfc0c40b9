//! The "SMAP" sampling-map cache format.
//!
//! Little-endian, fixed layout so a cached gather table loads with zero
//! parsing cost:
//!
//! ```text
//! magic "SMAP" | u32 version=1 | u32 width | u32 height   (16 bytes)
//! provenance digest                                       (16 bytes)
//! per pixel, row-major: f32 src_u, f32 src_v, u8 mask     (9 bytes each)
//! fnv1a-64 checksum over everything above                 (8 bytes)
//! ```
//!
//! Unmasked pixels store the (-1, -1) sentinel so the payload stays
//! finite and diff-friendly.

use std::path::Path;

use crate::error::{Error, Result};
use crate::sampling::SamplingMap;

pub const MAGIC: &[u8; 4] = b"SMAP";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 32;
pub const BYTES_PER_PIXEL: usize = 9;
pub const CHECKSUM_LEN: usize = 8;

pub fn file_len(width: u32, height: u32) -> usize {
    HEADER_LEN + (width as usize * height as usize) * BYTES_PER_PIXEL + CHECKSUM_LEN
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

pub fn encode(map: &SamplingMap) -> Vec<u8> {
    let mut out = Vec::with_capacity(file_len(map.width, map.height));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&map.width.to_le_bytes());
    out.extend_from_slice(&map.height.to_le_bytes());
    out.extend_from_slice(&map.provenance);
    for (uv, &m) in map.src_uv.iter().zip(&map.mask) {
        out.extend_from_slice(&uv[0].to_le_bytes());
        out.extend_from_slice(&uv[1].to_le_bytes());
        out.push(m);
    }
    let checksum = fnv1a64(&out);
    out.extend_from_slice(&checksum.to_le_bytes());
    out
}

pub fn save_map(map: &SamplingMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode(map)).map_err(|e| Error::io(path, e))
}

/// Loads and validates a cached map. `expected` is the fingerprint of
/// the current inputs; a mismatch is a stale-cache error, reported
/// separately from corruption.
pub fn load_map(path: impl AsRef<Path>, expected: Option<[u8; 16]>) -> Result<SamplingMap> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes, expected).map_err(|e| match e {
        DecodeError::Format(msg) => Error::CacheFormat {
            path: path.to_path_buf(),
            msg,
        },
        DecodeError::Checksum => Error::ChecksumMismatch {
            path: path.to_path_buf(),
        },
        DecodeError::Stale => Error::StaleCache {
            path: path.to_path_buf(),
        },
    })
}

enum DecodeError {
    Format(String),
    Checksum,
    Stale,
}

fn decode(
    bytes: &[u8],
    expected: Option<[u8; 16]>,
) -> std::result::Result<SamplingMap, DecodeError> {
    if bytes.len() < HEADER_LEN + CHECKSUM_LEN {
        return Err(DecodeError::Format("file too short".into()));
    }
    if &bytes[0..4] != MAGIC {
        return Err(DecodeError::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(DecodeError::Format(format!("unsupported version {version}")));
    }
    let width = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    let height = u32::from_le_bytes(bytes[12..16].try_into().unwrap());
    let expected_len = file_len(width, height);
    if bytes.len() != expected_len {
        return Err(DecodeError::Format(format!(
            "length {} does not match {}x{} map ({expected_len})",
            bytes.len(),
            width,
            height
        )));
    }

    // Integrity before anything else: a corrupted file must never
    // yield a usable map.
    let stored = u64::from_le_bytes(bytes[bytes.len() - 8..].try_into().unwrap());
    if fnv1a64(&bytes[..bytes.len() - 8]) != stored {
        return Err(DecodeError::Checksum);
    }

    let mut provenance = [0u8; 16];
    provenance.copy_from_slice(&bytes[16..32]);
    if let Some(exp) = expected {
        if exp != provenance {
            return Err(DecodeError::Stale);
        }
    }

    let n = width as usize * height as usize;
    let mut src_uv = Vec::with_capacity(n);
    let mut mask = Vec::with_capacity(n);
    let payload = &bytes[HEADER_LEN..bytes.len() - CHECKSUM_LEN];
    for px in payload.chunks_exact(BYTES_PER_PIXEL) {
        let u = f32::from_le_bytes(px[0..4].try_into().unwrap());
        let v = f32::from_le_bytes(px[4..8].try_into().unwrap());
        let m = px[8];
        if m > 1 {
            return Err(DecodeError::Format(format!("mask byte {m} not 0/1")));
        }
        if m == 1 && !(u.is_finite() && v.is_finite() && (0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&v)) {
            return Err(DecodeError::Format(format!(
                "masked pixel has invalid uv ({u}, {v})"
            )));
        }
        src_uv.push([u, v]);
        mask.push(m);
    }
    Ok(SamplingMap {
        width,
        height,
        src_uv,
        mask,
        provenance,
    })
}
