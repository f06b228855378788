//! MAGD dataset files and their CSV mirror.
//!
//! Layout (little-endian): `"MAGD"`, u16 version, u32 record count, u32
//! class count, then per record f64 timestamp, 3 f64 position, 9 f64
//! orientation (row-major), 3 f64 clean, 3 f64 measured, u16 context.
//! Generated datasets end with a 5-byte footer `"PROV"` + u8 1.

use std::fs;
use std::io::Write;
use std::path::Path;

use gfk_core::synth::{FlightDataset, Provenance, Record};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"MAGD";
pub const VERSION: u16 = 1;
pub const HEADER_BYTES: usize = 4 + 2 + 4 + 4;
pub const RECORD_BYTES: usize = 19 * 8 + 2;
const FOOTER_MAGIC: &[u8; 4] = b"PROV";
const FOOTER_BYTES: usize = 5;

pub fn encode(ds: &FlightDataset) -> Result<Vec<u8>> {
    ds.validate()
        .map_err(|e| Error::Format(format!("refusing to write invalid dataset: {e}")))?;
    let count =
        u32::try_from(ds.records.len()).map_err(|_| Error::Format("too many records".into()))?;
    let mut out = Vec::with_capacity(HEADER_BYTES + ds.records.len() * RECORD_BYTES + FOOTER_BYTES);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&count.to_le_bytes());
    out.extend_from_slice(&ds.classes.to_le_bytes());
    for r in &ds.records {
        let mut put = |v: f64| out.extend_from_slice(&v.to_le_bytes());
        put(r.t);
        r.position.iter().for_each(|&v| put(v));
        r.orientation.iter().flatten().for_each(|&v| put(v));
        r.clean.iter().for_each(|&v| put(v));
        r.measured.iter().for_each(|&v| put(v));
        out.extend_from_slice(&r.context.to_le_bytes());
    }
    if ds.provenance == Provenance::Generated {
        out.extend_from_slice(FOOTER_MAGIC);
        out.push(1);
    }
    Ok(out)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl Cursor<'_> {
    fn take<const N: usize>(&mut self) -> [u8; N] {
        let b: [u8; N] = self.bytes[self.at..self.at + N]
            .try_into()
            .expect("length checked by caller");
        self.at += N;
        b
    }

    fn f64(&mut self) -> f64 {
        f64::from_le_bytes(self.take())
    }

    fn vec3(&mut self) -> [f64; 3] {
        [self.f64(), self.f64(), self.f64()]
    }
}

pub fn decode(bytes: &[u8]) -> Result<FlightDataset> {
    if bytes.len() < HEADER_BYTES {
        return Err(Error::Format(format!(
            "truncated header ({} bytes)",
            bytes.len()
        )));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format("bad magic, not a MAGD file".into()));
    }
    let mut c = Cursor { bytes, at: 4 };
    let version = u16::from_le_bytes(c.take());
    if version != VERSION {
        return Err(Error::Format(format!("unsupported MAGD version {version}")));
    }
    let count = u32::from_le_bytes(c.take()) as usize;
    let classes = u32::from_le_bytes(c.take());
    let body = count
        .checked_mul(RECORD_BYTES)
        .ok_or_else(|| Error::Format("record count overflows".into()))?;
    let rest = bytes.len() - HEADER_BYTES;
    if rest < body {
        return Err(Error::Format(format!(
            "truncated: header promises {count} records, found {} bytes of {body}",
            rest
        )));
    }
    let mut records = Vec::with_capacity(count);
    for _ in 0..count {
        let t = c.f64();
        let position = c.vec3();
        let orientation = [c.vec3(), c.vec3(), c.vec3()];
        let clean = c.vec3();
        let measured = c.vec3();
        let context = u16::from_le_bytes(c.take());
        records.push(Record {
            t,
            position,
            orientation,
            clean,
            measured,
            context,
        });
    }
    let provenance = match &bytes[c.at..] {
        [] => Provenance::Physics,
        [a, b, cc, d, flag] if [*a, *b, *cc, *d] == *FOOTER_MAGIC => match flag {
            0 => Provenance::Physics,
            1 => Provenance::Generated,
            _ => return Err(Error::Format(format!("unknown provenance flag {flag}"))),
        },
        tail => {
            return Err(Error::Format(format!(
                "{} unexpected trailing bytes",
                tail.len()
            )))
        }
    };
    if let Some(i) = records.windows(2).position(|w| !(w[1].t > w[0].t)) {
        return Err(Error::Format(format!(
            "timestamps not increasing at record {}",
            i + 1
        )));
    }
    let ds = FlightDataset {
        records,
        classes,
        provenance,
    };
    ds.validate().map_err(|e| Error::Format(e.to_string()))?;
    Ok(ds)
}

pub fn write_dataset(ds: &FlightDataset, path: &Path) -> Result<()> {
    let bytes = encode(ds)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_dataset(path: &Path) -> Result<FlightDataset> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Scientific notation with 17 significant digits, enough to round-trip.
pub fn sig17(v: f64) -> String {
    format!("{v:.16e}")
}

pub const CSV_HEADER: [&str; 20] = [
    "t",
    "x",
    "y",
    "z",
    "r00",
    "r01",
    "r02",
    "r10",
    "r11",
    "r12",
    "r20",
    "r21",
    "r22",
    "clean_x",
    "clean_y",
    "clean_z",
    "measured_x",
    "measured_y",
    "measured_z",
    "context",
];

/// One header row, one record per line.
pub fn write_csv<W: Write>(ds: &FlightDataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let fail = |e: csv::Error| Error::Format(format!("csv export: {e}"));
    w.write_record(CSV_HEADER).map_err(fail)?;
    for r in &ds.records {
        let mut row: Vec<String> = std::iter::once(r.t)
            .chain(r.position)
            .chain(r.orientation.into_iter().flatten())
            .chain(r.clean)
            .chain(r.measured)
            .map(sig17)
            .collect();
        row.push(r.context.to_string());
        w.write_record(&row).map_err(fail)?;
    }
    w.flush()
        .map_err(|e| Error::Format(format!("csv export: {e}")))?;
    Ok(())
}

pub fn write_csv_file(ds: &FlightDataset, path: &Path) -> Result<()> {
    let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(ds, std::io::BufWriter::new(f))
}
