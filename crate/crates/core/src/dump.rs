//! Binary dump and load of a stored construction, used for regression fixtures.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! offset  size  field
//!      0     8  magic  b"HARRIS01"
//!      8     8  lambda      f64
//!     16     4  range       u32
//!     20     4  window_lo   i32
//!     24     4  window_hi   i32
//!     28     8  t_max       f64
//!     36     8  seed        u64
//!     44     8  mark count  u64
//!     52  17*n  records
//! ```
//!
//! Each record is `time: f64 | kind: u8 (0 = recovery, 1 = arrow) | site: i32 | target: i32`,
//! where `site` is the arrow source and `target` is zero for recoveries.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::harris::{ConstructionParams, HarrisConstruction, Mark, MarkKind};

pub const MAGIC: &[u8; 8] = b"HARRIS01";
pub const HEADER_LEN: usize = 52;
pub const RECORD_LEN: usize = 17;

pub fn write_construction<W: Write>(h: &HarrisConstruction, mut w: W) -> std::io::Result<()> {
    let p = h.params();
    let mut header = Vec::with_capacity(HEADER_LEN);
    header.extend_from_slice(MAGIC);
    header.extend_from_slice(&p.lambda.to_le_bytes());
    header.extend_from_slice(&p.range.to_le_bytes());
    header.extend_from_slice(&p.window_lo.to_le_bytes());
    header.extend_from_slice(&p.window_hi.to_le_bytes());
    header.extend_from_slice(&p.t_max.to_le_bytes());
    header.extend_from_slice(&p.seed.to_le_bytes());
    header.extend_from_slice(&(h.marks().len() as u64).to_le_bytes());
    w.write_all(&header)?;

    let mut rec = [0u8; RECORD_LEN];
    for m in h.marks() {
        let (kind, site, target) = match m.kind {
            MarkKind::Recovery { site } => (0u8, site, 0),
            MarkKind::Arrow { source, target } => (1u8, source, target),
        };
        rec[0..8].copy_from_slice(&m.time.to_le_bytes());
        rec[8] = kind;
        rec[9..13].copy_from_slice(&site.to_le_bytes());
        rec[13..17].copy_from_slice(&target.to_le_bytes());
        w.write_all(&rec)?;
    }
    Ok(())
}

pub fn to_bytes(h: &HarrisConstruction) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + RECORD_LEN * h.marks().len());
    write_construction(h, &mut out).expect("writing to a Vec cannot fail");
    out
}

fn take<const K: usize>(bytes: &[u8], at: usize) -> [u8; K] {
    bytes[at..at + K].try_into().expect("length checked by caller")
}

pub fn from_bytes(bytes: &[u8]) -> Result<HarrisConstruction> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if &bytes[0..8] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let params = ConstructionParams {
        lambda: f64::from_le_bytes(take(bytes, 8)),
        range: u32::from_le_bytes(take(bytes, 16)),
        window_lo: i32::from_le_bytes(take(bytes, 20)),
        window_hi: i32::from_le_bytes(take(bytes, 24)),
        t_max: f64::from_le_bytes(take(bytes, 28)),
        seed: u64::from_le_bytes(take(bytes, 36)),
    };
    let count = u64::from_le_bytes(take(bytes, 44)) as usize;
    let body = &bytes[HEADER_LEN..];
    if body.len() != count.saturating_mul(RECORD_LEN) {
        return Err(Error::Format(format!(
            "header announces {count} marks but body has {} bytes",
            body.len()
        )));
    }
    let mut marks = Vec::with_capacity(count);
    for rec in body.chunks_exact(RECORD_LEN) {
        let time = f64::from_le_bytes(take(rec, 0));
        let site = i32::from_le_bytes(take(rec, 9));
        let target = i32::from_le_bytes(take(rec, 13));
        let kind = match rec[8] {
            0 => MarkKind::Recovery { site },
            1 => MarkKind::Arrow {
                source: site,
                target,
            },
            k => return Err(Error::Format(format!("unknown mark kind byte {k}"))),
        };
        marks.push(Mark { time, kind });
    }
    HarrisConstruction::from_marks(params, marks)
}

pub fn read_construction<R: Read>(mut r: R) -> Result<HarrisConstruction> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)
        .map_err(|e| Error::Format(e.to_string()))?;
    from_bytes(&bytes)
}
