//! Run-length-encoded binary grid files for cluster membership.
//!
//! Format (version 1, all integers little-endian):
//!
//! ```text
//! offset  size  field
//! 0       4     magic "DREG"
//! 4       2     version (u16) = 1
//! 6       1     cluster kind (u8): 0 forward, 1 backward, 2 mutual
//! 7       1     touched_boundary (u8): 0 or 1
//! 8       2     dimension d (u16)
//! 10      16d   box bounds: lo_1, hi_1, ..., lo_d, hi_d (i64 each)
//! ..      8d    origin site (i64 each)
//! ..      8     run count (u64)
//! ..      4r    runs (u32 each)
//! ```
//!
//! Runs alternate absent/present starting with absent and sum to the box
//! volume. Site order is the box's row-major order with axis 1 fastest,
//! matching the in-memory membership bitset.

use std::path::Path;

use crate::cluster::{Cluster, ClusterKind};
use crate::error::{DreError, Result};
use crate::lattice::{BitSet, LatticeBox};

const MAGIC: &[u8; 4] = b"DREG";
const VERSION: u16 = 1;

/// A cluster's membership grid as stored on disk.
#[derive(Clone, Debug)]
pub struct GridFile {
    kind: ClusterKind,
    touched_boundary: bool,
    bbox: LatticeBox,
    origin: Vec<i64>,
    members: BitSet,
}

impl GridFile {
    pub fn from_cluster(cluster: &Cluster) -> GridFile {
        GridFile {
            kind: cluster.kind(),
            touched_boundary: cluster.touched_boundary(),
            bbox: cluster.search_box().clone(),
            origin: cluster.origin().to_vec(),
            members: cluster.members().clone(),
        }
    }

    pub fn kind(&self) -> ClusterKind {
        self.kind
    }

    pub fn touched_boundary(&self) -> bool {
        self.touched_boundary
    }

    pub fn bbox(&self) -> &LatticeBox {
        &self.bbox
    }

    pub fn origin(&self) -> &[i64] {
        &self.origin
    }

    pub fn members(&self) -> &BitSet {
        &self.members
    }

    pub fn contains_index(&self, idx: usize) -> bool {
        self.members.get(idx)
    }

    pub fn contains(&self, site: &[i64]) -> bool {
        self.bbox.index_of(site).is_some_and(|i| self.members.get(i))
    }

    pub fn member_count(&self) -> usize {
        self.members.count_ones()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(kind_code(self.kind));
        out.push(self.touched_boundary as u8);
        out.extend_from_slice(&(self.bbox.dim() as u16).to_le_bytes());
        for a in 0..self.bbox.dim() {
            let (lo, hi) = self.bbox.axis_range(a + 1);
            out.extend_from_slice(&lo.to_le_bytes());
            out.extend_from_slice(&hi.to_le_bytes());
        }
        for c in &self.origin {
            out.extend_from_slice(&c.to_le_bytes());
        }
        let runs = encode_runs(&self.members);
        out.extend_from_slice(&(runs.len() as u64).to_le_bytes());
        for r in &runs {
            out.extend_from_slice(&r.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<GridFile> {
        let mut rd = Reader { bytes, at: 0 };
        let magic = rd.take(4)?;
        if magic != MAGIC {
            return Err(DreError::Parse("not a grid file (bad magic)".into()));
        }
        let version = rd.u16()?;
        if version != VERSION {
            return Err(DreError::Parse(format!("unsupported grid version {version}")));
        }
        let kind = kind_from_code(rd.u8()?)?;
        let touched = match rd.u8()? {
            0 => false,
            1 => true,
            v => return Err(DreError::Parse(format!("bad boundary flag {v}"))),
        };
        let dim = rd.u16()? as usize;
        if dim == 0 {
            return Err(DreError::Parse("grid dimension is zero".into()));
        }
        let mut lo = Vec::with_capacity(dim);
        let mut hi = Vec::with_capacity(dim);
        for _ in 0..dim {
            lo.push(rd.i64()?);
            hi.push(rd.i64()?);
        }
        let bbox = LatticeBox::new(lo, hi)
            .map_err(|e| DreError::Parse(format!("bad grid box: {e}")))?;
        bbox.check_volume()?;
        let mut origin = Vec::with_capacity(dim);
        for _ in 0..dim {
            origin.push(rd.i64()?);
        }
        if !bbox.contains(&origin) {
            return Err(DreError::Parse("grid origin outside its box".into()));
        }
        let run_count = rd.u64()? as usize;
        let mut runs = Vec::with_capacity(run_count);
        for _ in 0..run_count {
            runs.push(rd.u32()?);
        }
        if rd.at != bytes.len() {
            return Err(DreError::Parse("trailing bytes after grid runs".into()));
        }
        let members = decode_runs(&runs, bbox.len())?;
        Ok(GridFile { kind, touched_boundary: touched, bbox, origin, members })
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn read_from(path: &Path) -> Result<GridFile> {
        let bytes = std::fs::read(path)?;
        GridFile::from_bytes(&bytes)
    }
}

fn kind_code(kind: ClusterKind) -> u8 {
    match kind {
        ClusterKind::Forward => 0,
        ClusterKind::Backward => 1,
        ClusterKind::Mutual => 2,
    }
}

fn kind_from_code(code: u8) -> Result<ClusterKind> {
    match code {
        0 => Ok(ClusterKind::Forward),
        1 => Ok(ClusterKind::Backward),
        2 => Ok(ClusterKind::Mutual),
        v => Err(DreError::Parse(format!("bad cluster kind {v}"))),
    }
}

fn encode_runs(members: &BitSet) -> Vec<u32> {
    let mut runs = Vec::new();
    let mut current = false; // first run counts absent sites
    let mut count: u64 = 0;
    for i in 0..members.len() {
        let bit = members.get(i);
        if bit == current {
            count += 1;
        } else {
            push_run(&mut runs, count);
            current = bit;
            count = 1;
        }
        if count == u32::MAX as u64 {
            // split oversized runs with a zero-length spacer of the other value
            runs.push(u32::MAX);
            runs.push(0);
            count = 0;
        }
    }
    push_run(&mut runs, count);
    runs
}

fn push_run(runs: &mut Vec<u32>, count: u64) {
    debug_assert!(count <= u32::MAX as u64);
    runs.push(count as u32);
}

fn decode_runs(runs: &[u32], len: usize) -> Result<BitSet> {
    let mut members = BitSet::new(len);
    let mut at = 0usize;
    let mut present = false;
    for &r in runs {
        let r = r as usize;
        if at + r > len {
            return Err(DreError::Parse("grid runs overflow the box volume".into()));
        }
        if present {
            for i in at..at + r {
                members.set(i);
            }
        }
        at += r;
        present = !present;
    }
    if at != len {
        return Err(DreError::Parse(format!(
            "grid runs cover {at} sites, box holds {len}"
        )));
    }
    Ok(members)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::forward_cluster;
    use crate::env::EnvironmentField;
    use crate::fixed::Prob;
    use crate::model::ModelSpec;

    fn sample_cluster() -> Cluster {
        let spec = ModelSpec::half_orthant(2, Prob::from_decimal_str("0.6").unwrap());
        let field = EnvironmentField::new(spec, 31);
        let bbox = LatticeBox::cube(2, -6, 6).unwrap();
        forward_cluster(&field, &[0, 0], &bbox).unwrap()
    }

    #[test]
    fn round_trip_preserves_everything() {
        let c = sample_cluster();
        let grid = GridFile::from_cluster(&c);
        let bytes = grid.to_bytes();
        let back = GridFile::from_bytes(&bytes).unwrap();
        assert_eq!(back.kind(), c.kind());
        assert_eq!(back.touched_boundary(), c.touched_boundary());
        assert_eq!(back.origin(), c.origin());
        assert_eq!(back.bbox().lo(), c.search_box().lo());
        assert_eq!(back.bbox().hi(), c.search_box().hi());
        assert_eq!(back.member_count(), c.member_count());
        for i in 0..back.bbox().len() {
            assert_eq!(back.contains_index(i), c.contains_index(i));
        }
        // byte determinism
        assert_eq!(bytes, back.to_bytes());
    }

    #[test]
    fn empty_and_full_grids_encode_as_single_runs() {
        let spec = ModelSpec::orthant(2, Prob::ONE);
        let field = EnvironmentField::new(spec, 1);
        let bbox = LatticeBox::new(vec![0, 0], vec![4, 4]).unwrap();
        let c = forward_cluster(&field, &[0, 0], &bbox).unwrap();
        // p=1 orthant from corner fills the whole box
        assert_eq!(c.member_count(), bbox.len());
        let grid = GridFile::from_cluster(&c);
        let bytes = grid.to_bytes();
        let back = GridFile::from_bytes(&bytes).unwrap();
        assert_eq!(back.member_count(), bbox.len());
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        let c = sample_cluster();
        let good = GridFile::from_cluster(&c).to_bytes();

        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        assert!(GridFile::from_bytes(&bad_magic).is_err());

        let mut bad_version = good.clone();
        bad_version[4] = 9;
        assert!(GridFile::from_bytes(&bad_version).is_err());

        let mut truncated = good.clone();
        truncated.truncate(good.len() - 3);
        assert!(GridFile::from_bytes(&truncated).is_err());

        let mut trailing = good.clone();
        trailing.push(0);
        assert!(GridFile::from_bytes(&trailing).is_err());

        // corrupt a run so the totals no longer match the volume
        let mut bad_run = good.clone();
        let n = bad_run.len();
        bad_run[n - 4] = bad_run[n - 4].wrapping_add(1);
        assert!(GridFile::from_bytes(&bad_run).is_err());
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.at + n > self.bytes.len() {
            return Err(DreError::Parse("grid file truncated".into()));
        }
        let s = &self.bytes[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
