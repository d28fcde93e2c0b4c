//! Binary window dumps for golden-vector tests.
//!
//! Layout, all little-endian:
//!
//! | offset | size | field                     |
//! |--------|------|---------------------------|
//! | 0      | 4    | magic `OBWS`              |
//! | 4      | 4    | format version (u32 = 1)  |
//! | 8      | 4    | N (u32)                   |
//! | 12     | 4    | L (u32)                   |
//! | 16     | 4    | M (u32)                   |
//! | 20     | 4    | reserved, zero            |
//! | 24     | 8    | seed (u64)                |
//! | 32     | 16·L·N | samples as interleaved f64 I, Q |

use std::io::{self, Read, Write};

use num_complex::Complex64;

use crate::model::WindowCapture;

pub const MAGIC: [u8; 4] = *b"OBWS";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct WindowDump {
    pub n: u32,
    pub l: u32,
    pub m: u32,
    pub seed: u64,
    pub samples: Vec<Complex64>,
}

fn narrow(v: usize, what: &str) -> io::Result<u32> {
    u32::try_from(v).map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, format!("{what} does not fit in u32")))
}

pub fn write_window<W: Write>(out: &mut W, window: &WindowCapture, seed: u64) -> io::Result<()> {
    let mut header = [0u8; HEADER_LEN];
    header[0..4].copy_from_slice(&MAGIC);
    header[4..8].copy_from_slice(&VERSION.to_le_bytes());
    header[8..12].copy_from_slice(&narrow(window.n_subbands(), "N")?.to_le_bytes());
    header[12..16].copy_from_slice(&narrow(window.capture_count(), "L")?.to_le_bytes());
    header[16..20].copy_from_slice(&narrow(window.occupancy().len(), "M")?.to_le_bytes());
    header[24..32].copy_from_slice(&seed.to_le_bytes());
    out.write_all(&header)?;
    let mut body = Vec::with_capacity(16 * window.samples().len());
    for s in window.samples() {
        body.extend_from_slice(&s.re.to_le_bytes());
        body.extend_from_slice(&s.im.to_le_bytes());
    }
    out.write_all(&body)
}

pub fn read_window<R: Read>(input: &mut R) -> io::Result<WindowDump> {
    let bad = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, msg.to_string());
    let mut header = [0u8; HEADER_LEN];
    input.read_exact(&mut header)?;
    if header[0..4] != MAGIC {
        return Err(bad("not a window dump (bad magic)"));
    }
    let word = |at: usize| u32::from_le_bytes(header[at..at + 4].try_into().unwrap());
    if word(4) != VERSION {
        return Err(bad("unsupported window dump version"));
    }
    let (n, l, m) = (word(8), word(12), word(16));
    let seed = u64::from_le_bytes(header[24..32].try_into().unwrap());
    let count = (n as usize)
        .checked_mul(l as usize)
        .ok_or_else(|| bad("window dimensions overflow"))?;
    let mut body = Vec::new();
    input.read_to_end(&mut body)?;
    if body.len() != 16 * count {
        return Err(bad("sample payload length does not match N*L"));
    }
    let samples = body
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[0..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..16].try_into().unwrap()),
            )
        })
        .collect();
    Ok(WindowDump { n, l, m, seed, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SensingConfig;
    use crate::rng::SimRng;
    use crate::signal::SignalEngine;

    #[test]
    fn header_layout_and_round_trip() {
        let cfg = SensingConfig::builder().n_subbands(8).m_occupied(2).avg_captures(2).build().unwrap();
        let engine = SignalEngine::new(cfg).unwrap();
        let mut rng = SimRng::new(99);
        let occ = engine.draw_occupancy(&mut rng);
        let w = engine.generate_window(&occ, 0, &mut rng).unwrap();

        let mut buf = Vec::new();
        write_window(&mut buf, &w, 0xDEAD_BEEF).unwrap();
        assert_eq!(buf.len(), HEADER_LEN + 16 * 16);
        assert_eq!(&buf[0..4], b"OBWS");
        assert_eq!(&buf[4..8], &[1, 0, 0, 0]);
        assert_eq!(&buf[8..12], &[8, 0, 0, 0]);
        assert_eq!(&buf[12..16], &[2, 0, 0, 0]);
        assert_eq!(&buf[16..20], &[2, 0, 0, 0]);
        assert_eq!(&buf[20..24], &[0, 0, 0, 0]);
        assert_eq!(&buf[24..32], &0xDEAD_BEEFu64.to_le_bytes());
        assert_eq!(&buf[32..40], &w.samples()[0].re.to_le_bytes());

        let back = read_window(&mut buf.as_slice()).unwrap();
        assert_eq!((back.n, back.l, back.m, back.seed), (8, 2, 2, 0xDEAD_BEEF));
        assert_eq!(back.samples, w.samples());
    }

    #[test]
    fn rejects_corrupt_dumps() {
        let mut bytes = vec![0u8; HEADER_LEN];
        assert!(read_window(&mut bytes.as_slice()).is_err());
        bytes[0..4].copy_from_slice(b"OBWS");
        bytes[4] = 1;
        bytes[8] = 1;
        bytes[12] = 1;
        assert!(read_window(&mut bytes.as_slice()).is_err());
        bytes.extend_from_slice(&[0u8; 16]);
        assert!(read_window(&mut bytes.as_slice()).is_ok());
        bytes[4] = 2;
        assert!(read_window(&mut bytes.as_slice()).is_err());
    }
}
