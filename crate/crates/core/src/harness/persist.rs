use std::fs;
use std::path::Path;

use crate::channel::ChannelSample;
use crate::risnet::{ArchConfig, CsiMode, RisnetParams};
use crate::{CMatrix, Error, Result, C64};

pub const DATASET_MAGIC: &[u8; 4] = b"RISD";
pub const CHECKPOINT_MAGIC: &[u8; 4] = b"RISP";
pub const FORMAT_VERSION: u32 = 1;

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    fn u32(&mut self, v: usize) -> Result<()> {
        let v = u32::try_from(v).map_err(|_| Error::contract(format!("{v} does not fit in u32")))?;
        self.buf.extend_from_slice(&v.to_le_bytes());
        Ok(())
    }

    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    /// Row-major, `(re, im)` per entry.
    fn matrix(&mut self, m: &CMatrix) {
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                self.f64(m[(r, c)].re);
                self.f64(m[(r, c)].im);
            }
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let out = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(out)
            }
            None => Err(Error::Format {
                offset: self.pos,
                message: format!(
                    "truncated while reading {what}: need {n} bytes, {} left",
                    self.bytes.len() - self.pos
                ),
            }),
        }
    }

    fn magic(&mut self, want: &[u8; 4]) -> Result<()> {
        let got = self.take(4, "magic")?;
        if got != want {
            return Err(Error::Format {
                offset: 0,
                message: format!("bad magic {got:02x?}, expected {want:02x?}"),
            });
        }
        let at = self.pos;
        let version = self.u32("format version")?;
        if version != FORMAT_VERSION as usize {
            return Err(Error::Format {
                offset: at,
                message: format!(
                    "unsupported version bytes {:02x?} ({version}), expected {FORMAT_VERSION}",
                    &self.bytes[at..at + 4]
                ),
            });
        }
        Ok(())
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<usize> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")) as usize)
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        let b = self.take(8, what)?;
        Ok(f64::from_le_bytes(b.try_into().expect("8 bytes")))
    }

    fn matrix(&mut self, rows: usize, cols: usize, what: &str) -> Result<CMatrix> {
        let need = rows
            .checked_mul(cols)
            .and_then(|n| n.checked_mul(16))
            .ok_or_else(|| self.error(format!("{what} size overflows")))?;
        let b = self.take(need, what)?;
        let entries: Vec<C64> = b
            .chunks_exact(16)
            .map(|c| {
                C64::new(
                    f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                    f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
                )
            })
            .collect();
        Ok(CMatrix::from_row_slice(rows, cols, &entries))
    }

    fn error(&self, message: String) -> Error {
        Error::Format {
            offset: self.pos,
            message,
        }
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(self.error(format!("{} trailing bytes", self.bytes.len() - self.pos)));
        }
        Ok(())
    }
}

/// Serializes samples sharing one shape into the dataset format.
pub fn encode_dataset(samples: &[ChannelSample]) -> Result<Vec<u8>> {
    let (m, n, u) = match samples.first() {
        Some(s) => (s.bs_antennas(), s.ris_elements(), s.users()),
        None => (0, 0, 0),
    };
    let mut w = Writer { buf: Vec::new() };
    w.buf.extend_from_slice(DATASET_MAGIC);
    w.u32(FORMAT_VERSION as usize)?;
    for v in [m, n, u, samples.len()] {
        w.u32(v)?;
    }
    for (i, s) in samples.iter().enumerate() {
        if s.h.shape() != (n, m) || s.g.shape() != (u, n) || s.d.shape() != (u, m) {
            return Err(Error::dim(format!("sample {i} does not match the first sample's shape")));
        }
        w.matrix(&s.h);
        w.matrix(&s.g);
        w.matrix(&s.d);
    }
    Ok(w.buf)
}

pub fn decode_dataset(bytes: &[u8]) -> Result<Vec<ChannelSample>> {
    let mut r = Reader { bytes, pos: 0 };
    r.magic(DATASET_MAGIC)?;
    let m = r.u32("M")?;
    let n = r.u32("N")?;
    let u = r.u32("U")?;
    let count = r.u32("sample count")?;
    let (m128, n128, u128_) = (m as u128, n as u128, u as u128);
    let per_sample = 16 * (n128 * m128 + u128_ * n128 + u128_ * m128);
    if per_sample * count as u128 != (bytes.len() - r.pos) as u128 {
        return Err(r.error(format!(
            "{count} samples of {per_sample} bytes do not match the {} remaining bytes",
            bytes.len() - r.pos
        )));
    }
    let mut samples = Vec::with_capacity(count);
    for _ in 0..count {
        let h = r.matrix(n, m, "H")?;
        let g = r.matrix(u, n, "G")?;
        let d = r.matrix(u, m, "D")?;
        samples.push(ChannelSample { h, g, d });
    }
    r.finish()?;
    Ok(samples)
}

pub fn save_dataset(path: impl AsRef<Path>, samples: &[ChannelSample]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_dataset(samples)?).map_err(|e| Error::io(path, e))
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<ChannelSample>> {
    let path = path.as_ref();
    decode_dataset(&fs::read(path).map_err(|e| Error::io(path, e))?)
}

pub fn encode_checkpoint(params: &RisnetParams) -> Result<Vec<u8>> {
    let arch = params.arch();
    let mut w = Writer { buf: Vec::new() };
    w.buf.extend_from_slice(CHECKPOINT_MAGIC);
    w.u32(FORMAT_VERSION as usize)?;
    w.u8(match arch.csi_mode {
        CsiMode::Full => 0,
        CsiMode::Partial => 1,
    });
    w.u32(arch.num_layers)?;
    w.u32(arch.hidden_q)?;
    w.u32(arch.expansion_layers.len())?;
    for &l in &arch.expansion_layers {
        w.u32(l)?;
    }
    w.u32(arch.ris_rows)?;
    w.u32(arch.ris_cols)?;
    for v in params.flatten() {
        w.f64(v);
    }
    Ok(w.buf)
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<RisnetParams> {
    let mut r = Reader { bytes, pos: 0 };
    r.magic(CHECKPOINT_MAGIC)?;
    let at = r.pos;
    let csi_mode = match r.u8("csi mode")? {
        0 => CsiMode::Full,
        1 => CsiMode::Partial,
        other => {
            return Err(Error::Format {
                offset: at,
                message: format!("unknown csi mode byte {other:#04x}"),
            })
        }
    };
    let num_layers = r.u32("layer count")?;
    let hidden_q = r.u32("hidden width")?;
    let expansions = r.u32("expansion count")?;
    if expansions > num_layers {
        return Err(r.error(format!("{expansions} expansion layers in a {num_layers}-layer network")));
    }
    let expansion_layers = (0..expansions)
        .map(|_| r.u32("expansion index"))
        .collect::<Result<Vec<_>>>()?;
    let ris_rows = r.u32("rows")?;
    let ris_cols = r.u32("cols")?;
    let arch = ArchConfig {
        csi_mode,
        num_layers,
        hidden_q,
        expansion_layers,
        ris_rows,
        ris_cols,
    };
    arch.validate().map_err(|e| r.error(format!("invalid architecture: {e}")))?;
    let count = arch.parameter_count();
    if count.checked_mul(8) != Some(bytes.len() - r.pos) {
        return Err(r.error(format!(
            "{count} parameters do not match the {} remaining bytes",
            bytes.len() - r.pos
        )));
    }
    let flat = (0..count).map(|_| r.f64("parameter")).collect::<Result<Vec<_>>>()?;
    r.finish()?;
    RisnetParams::from_flat(&arch, &flat)
}

pub fn save_checkpoint(path: impl AsRef<Path>, params: &RisnetParams) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_checkpoint(params)?).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<RisnetParams> {
    let path = path.as_ref();
    decode_checkpoint(&fs::read(path).map_err(|e| Error::io(path, e))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{Scenario, ScenarioConfig};

    fn samples() -> Vec<ChannelSample> {
        let cfg = ScenarioConfig {
            bs_antennas: 3,
            ris_rows: 3,
            ris_cols: 4,
            users: 2,
            ..ScenarioConfig::default()
        };
        Scenario::new(cfg).unwrap().dataset(3, 8)
    }

    #[test]
    fn dataset_round_trip_is_bitwise() {
        let s = samples();
        let bytes = encode_dataset(&s).unwrap();
        assert_eq!(&bytes[..4], b"RISD");
        assert_eq!(bytes.len(), 24 + 3 * 16 * (12 * 3 + 2 * 12 + 2 * 3));
        assert_eq!(decode_dataset(&bytes).unwrap(), s);
    }

    #[test]
    fn truncated_and_corrupt_files_fail() {
        let bytes = encode_dataset(&samples()).unwrap();
        for cut in [2, 10, bytes.len() - 1] {
            assert!(matches!(decode_dataset(&bytes[..cut]), Err(Error::Format { .. })));
        }
        let mut bad = bytes.clone();
        bad[0] = b'X';
        let err = decode_dataset(&bad).unwrap_err().to_string();
        assert!(err.contains("58"), "{err}");
        let mut v2 = bytes;
        v2[4] = 2;
        assert!(matches!(decode_dataset(&v2), Err(Error::Format { offset: 4, .. })));
    }

    #[test]
    fn checkpoint_round_trip() {
        let p = RisnetParams::init(&ArchConfig::partial(9, 18), 4).unwrap();
        let bytes = encode_checkpoint(&p).unwrap();
        let back = decode_checkpoint(&bytes).unwrap();
        assert_eq!(back, p);
        assert!(matches!(decode_checkpoint(&bytes[..bytes.len() - 3]), Err(Error::Format { .. })));
    }
}
