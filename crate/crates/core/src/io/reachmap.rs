//! Binary reachability map files.
//!
//! Layout, little-endian: magic `GKRM`, `u32` version, `f64` voxel size,
//! `f64` origin x/y/z, `u64` dims x/y/z, `u32` direction bin count, then
//! `ceil(bins / 8)` bytes per voxel holding the low bytes of its bitmask.
//! Voxels are stored x-fastest.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::reachability::ReachabilityMap;

const MAGIC: &[u8; 4] = b"GKRM";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8 + 24 + 24 + 4;

pub fn write_reachability_map(path: impl AsRef<Path>, map: &ReachabilityMap) -> Result<()> {
    fs::write(path, encode(map))?;
    Ok(())
}

pub fn encode(map: &ReachabilityMap) -> Vec<u8> {
    let k = map.bins().len();
    let per_voxel = k.div_ceil(8);
    let mut out = Vec::with_capacity(HEADER_LEN + per_voxel * map.cells().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&map.voxel_size().to_le_bytes());
    for c in map.origin().iter() {
        out.extend_from_slice(&c.to_le_bytes());
    }
    for d in map.dims() {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    out.extend_from_slice(&(k as u32).to_le_bytes());
    for cell in map.cells() {
        out.extend_from_slice(&cell.to_le_bytes()[..per_voxel]);
    }
    out
}

pub fn load_reachability_map(path: impl AsRef<Path>) -> Result<ReachabilityMap> {
    let path = path.as_ref();
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(Error::FileNotFound(path.to_path_buf())),
        Err(e) => return Err(e.into()),
    };
    decode(&bytes).map_err(|(offset, message)| Error::MalformedFile {
        path: path.to_path_buf(),
        location: format!("byte {offset}"),
        message,
    })
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], (usize, String)> {
        let end = self.pos + n;
        let slice = self.bytes.get(self.pos..end).ok_or((self.pos, "unexpected end of file".to_string()))?;
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32, (usize, String)> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, (usize, String)> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64, (usize, String)> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

fn decode(bytes: &[u8]) -> Result<ReachabilityMap, (usize, String)> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err((0, "not a reachability map".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err((4, format!("unsupported version {version}")));
    }
    let voxel_size = r.f64()?;
    let origin = Vec3::new(r.f64()?, r.f64()?, r.f64()?);
    let dims_at = r.pos;
    let mut dims = [0usize; 3];
    for d in &mut dims {
        *d = usize::try_from(r.u64()?).map_err(|_| (dims_at, "grid dimension overflows".to_string()))?;
    }
    let k = r.u32()? as usize;
    let count = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or((dims_at, "grid dimensions overflow".to_string()))?;
    let per_voxel = k.div_ceil(8);
    if per_voxel == 0 || per_voxel > 4 {
        return Err((HEADER_LEN - 4, format!("unsupported bin count {k}")));
    }
    let body_at = r.pos;
    let body = r.take(count * per_voxel)?;
    let cells = body
        .chunks_exact(per_voxel)
        .map(|c| {
            let mut word = [0u8; 4];
            word[..per_voxel].copy_from_slice(c);
            u32::from_le_bytes(word)
        })
        .collect();
    if r.pos != bytes.len() {
        return Err((r.pos, "trailing bytes after voxel data".into()));
    }
    ReachabilityMap::from_parts(voxel_size, origin, dims, k, cells).map_err(|e| (body_at, e.to_string()))
}
