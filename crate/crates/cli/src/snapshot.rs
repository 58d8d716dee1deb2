//! Binary field snapshots.
//!
//! Layout (little-endian throughout):
//!   magic "QFLD" · format version u16 · dim u8 · per-axis sizes u32 ·
//!   per-axis domain lengths f64 · representation tag u8 ·
//!   payload (component-major: all w, then x, y, z, each f64 per grid
//!   point) · FNV-1a 64-bit checksum of the payload.
//!
//! The fixed layout makes the round trip bit-exact: reading a written
//! snapshot reproduces the field byte for byte.

use std::io::Read;
use std::path::Path;

use quatflow_core::field::{QField, Repr, NUM_COMPONENTS};
use quatflow_core::grid::GridSpec;

use crate::error::{CliError, CliResult, SnapshotErrorKind};

const MAGIC: &[u8; 4] = b"QFLD";
const VERSION: u16 = 1;
const REPR_PHYSICAL: u8 = 0;

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x1_0000_0000_01b3);
    }
    hash
}

fn snapshot_err(path: &Path, kind: SnapshotErrorKind) -> CliError {
    CliError::Snapshot {
        path: path.display().to_string(),
        kind,
    }
}

/// Writes a physical-representation field. Spectral input is rejected.
pub fn write_snapshot(field: &QField, path: &Path) -> CliResult<()> {
    let comps = field.physical().map_err(CliError::Core)?;
    let grid = field.grid();
    let mut payload =
        Vec::with_capacity(NUM_COMPONENTS * grid.num_points() * std::mem::size_of::<f64>());
    for comp in comps.iter() {
        for v in comp {
            payload.extend_from_slice(&v.to_le_bytes());
        }
    }

    let mut out = Vec::with_capacity(payload.len() + 64);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(grid.dim() as u8);
    for &n in grid.sizes() {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for &l in grid.domain_length() {
        out.extend_from_slice(&l.to_le_bytes());
    }
    out.push(REPR_PHYSICAL);
    let checksum = fnv1a64(&payload);
    out.extend_from_slice(&payload);
    out.extend_from_slice(&checksum.to_le_bytes());

    std::fs::write(path, out)?;
    Ok(())
}

struct Reader<'a> {
    path: &'a Path,
    data: Vec<u8>,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> CliResult<&[u8]> {
        if self.pos + n > self.data.len() {
            return Err(snapshot_err(
                self.path,
                SnapshotErrorKind::Truncated {
                    needed: (self.pos + n) as u64,
                    got: self.data.len() as u64,
                },
            ));
        }
        let slice = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u16(&mut self) -> CliResult<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u8(&mut self) -> CliResult<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> CliResult<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> CliResult<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Reads a snapshot back into a physical field, verifying magic, version,
/// header sanity and the payload checksum.
pub fn read_snapshot(path: &Path) -> CliResult<QField> {
    let mut data = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut data))
        .map_err(CliError::Io)?;
    let mut r = Reader { path, data, pos: 0 };

    if r.take(4)? != MAGIC {
        return Err(snapshot_err(path, SnapshotErrorKind::BadMagic));
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(snapshot_err(
            path,
            SnapshotErrorKind::VersionMismatch {
                found: version,
                expected: VERSION,
            },
        ));
    }
    let dim = r.u8()? as usize;
    if dim != 2 && dim != 3 {
        return Err(snapshot_err(
            path,
            SnapshotErrorKind::BadHeader(format!("dimension {dim} not in {{2, 3}}")),
        ));
    }
    let mut sizes = Vec::with_capacity(dim);
    for _ in 0..dim {
        let n = r.u32()? as usize;
        // Bound the axis size before grid cardinality math touches it.
        if n > 1 << 16 {
            return Err(snapshot_err(
                path,
                SnapshotErrorKind::BadHeader(format!("axis size {n} above 2^16")),
            ));
        }
        sizes.push(n);
    }
    let mut lengths = Vec::with_capacity(dim);
    for _ in 0..dim {
        lengths.push(r.f64()?);
    }
    let repr = r.u8()?;
    if repr != REPR_PHYSICAL {
        return Err(snapshot_err(
            path,
            SnapshotErrorKind::BadHeader(format!("unsupported representation tag {repr}")),
        ));
    }
    let grid = GridSpec::new(&sizes, &lengths)
        .map_err(|e| snapshot_err(path, SnapshotErrorKind::BadHeader(e.to_string())))?;

    let n = grid.num_points();
    let payload_len = NUM_COMPONENTS * n * std::mem::size_of::<f64>();
    let payload = r.take(payload_len)?.to_vec();
    let stored = u64::from_le_bytes(r.take(8)?.try_into().unwrap());
    let computed = fnv1a64(&payload);
    if stored != computed {
        return Err(snapshot_err(
            path,
            SnapshotErrorKind::ChecksumMismatch { stored, computed },
        ));
    }

    let mut comps: [Vec<f64>; NUM_COMPONENTS] = std::array::from_fn(|_| Vec::with_capacity(n));
    let mut cursor = payload.as_slice();
    for comp in comps.iter_mut() {
        for _ in 0..n {
            let mut b = [0u8; 8];
            cursor.read_exact(&mut b).expect("length checked");
            comp.push(f64::from_le_bytes(b));
        }
    }
    QField::from_physical(&grid, comps).map_err(CliError::Core)
}

/// Checks a snapshot's grid against an expected one, naming both shapes in
/// the error.
pub fn expect_grid(field: &QField, expected: &GridSpec, path: &Path) -> CliResult<()> {
    if field.grid() == expected {
        return Ok(());
    }
    let show = |g: &GridSpec| format!("{}D {:?} (L = {:?})", g.dim(), g.sizes(), g.domain_length());
    Err(snapshot_err(
        path,
        SnapshotErrorKind::DimensionMismatch {
            found: show(field.grid()),
            expected: show(expected),
        },
    ))
}

/// Writes out a spectral state by transforming it to physical samples
/// first.
pub fn write_state_snapshot(q_hat: &QField, path: &Path) -> CliResult<()> {
    let physical = match q_hat.repr() {
        Repr::Physical => q_hat.clone(),
        Repr::Spectral => q_hat.inverse_transform().map_err(CliError::Core)?,
    };
    write_snapshot(&physical, path)
}
