//! Syndrome histories and their binary container.
//!
//! File layout (all integers little-endian):
//!
//! | field        | type    |
//! |--------------|---------|
//! | magic        | `MJSH`  |
//! | version      | u32 = 1 |
//! | d            | u32     |
//! | rows         | u32 (noisy rounds + 1) |
//! | n_plaquettes | u32     |
//! | n_data       | u32     |
//! | shots        | u64     |
//! | epsilon      | f64     |
//! | seed         | u64     |
//!
//! followed, per shot, by the outcome bits (row-major, `rows × n_plaquettes`)
//! and then the final data frame (`n_data` bits). Each bitstream is packed
//! LSB-first and padded to a whole byte.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Recorded outcomes of one shot, relative to the noiseless reference.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyndromeHistory {
    pub n_plaquettes: usize,
    /// Noisy rounds; row `rounds` is the noiseless terminal round.
    pub rounds: usize,
    pub outcomes: Vec<bool>,
    /// Data modes carrying an odd number of flips at the end.
    pub frame: Vec<bool>,
}

impl SyndromeHistory {
    pub fn rows(&self) -> usize {
        self.rounds + 1
    }

    pub fn outcome(&self, round: usize, plaquette: usize) -> bool {
        self.outcomes[round * self.n_plaquettes + plaquette]
    }

    pub fn is_trivial(&self) -> bool {
        !self.outcomes.iter().any(|&b| b) && !self.frame.iter().any(|&b| b)
    }

    pub fn frame_modes(&self) -> Vec<usize> {
        self.frame.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
    }
}

/// `(plaquette, round)` pairs where the outcome changed from the previous
/// round; round 0 is compared with the noiseless reference (all zero).
pub fn detection_events(h: &SyndromeHistory) -> Vec<(usize, usize)> {
    let n = h.n_plaquettes;
    let mut ev = Vec::new();
    for r in 0..h.rows() {
        for p in 0..n {
            let prev = if r == 0 { false } else { h.outcome(r - 1, p) };
            if h.outcome(r, p) != prev {
                ev.push((p, r));
            }
        }
    }
    ev
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryHeader {
    pub d: usize,
    pub rounds: usize,
    pub n_plaquettes: usize,
    pub n_data: usize,
    pub shots: u64,
    pub epsilon: f64,
    pub seed: u64,
}

const MAGIC: &[u8; 4] = b"MJSH";
const VERSION: u32 = 1;

fn pack(bits: &[bool]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        if b {
            out[i / 8] |= 1 << (i % 8);
        }
    }
    out
}

fn unpack(bytes: &[u8], n: usize) -> Vec<bool> {
    (0..n).map(|i| bytes[i / 8] >> (i % 8) & 1 == 1).collect()
}

fn to_u32(x: usize, what: &str) -> Result<u32> {
    u32::try_from(x).map_err(|_| Error::Format(format!("{what} = {x} does not fit the header")))
}

pub fn write_histories<W: Write>(mut w: W, header: &HistoryHeader, shots: &[SyndromeHistory]) -> Result<()> {
    if shots.len() as u64 != header.shots {
        return Err(Error::Format(format!("header says {} shots, got {}", header.shots, shots.len())));
    }
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&to_u32(header.d, "d")?.to_le_bytes())?;
    w.write_all(&to_u32(header.rounds + 1, "rows")?.to_le_bytes())?;
    w.write_all(&to_u32(header.n_plaquettes, "n_plaquettes")?.to_le_bytes())?;
    w.write_all(&to_u32(header.n_data, "n_data")?.to_le_bytes())?;
    w.write_all(&header.shots.to_le_bytes())?;
    w.write_all(&header.epsilon.to_le_bytes())?;
    w.write_all(&header.seed.to_le_bytes())?;
    for h in shots {
        if h.rounds != header.rounds || h.n_plaquettes != header.n_plaquettes || h.frame.len() != header.n_data {
            return Err(Error::Format("shot dimensions disagree with header".into()));
        }
        w.write_all(&pack(&h.outcomes))?;
        w.write_all(&pack(&h.frame))?;
    }
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b).map_err(|e| Error::Format(format!("truncated header: {e}")))?;
    Ok(b)
}

pub fn read_histories<R: Read>(mut r: R) -> Result<(HistoryHeader, Vec<SyndromeHistory>)> {
    let magic: [u8; 4] = read_array(&mut r)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut r)?);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let d = u32::from_le_bytes(read_array(&mut r)?) as usize;
    let rows = u32::from_le_bytes(read_array(&mut r)?) as usize;
    if rows == 0 {
        return Err(Error::Format("zero rows".into()));
    }
    let n_plaquettes = u32::from_le_bytes(read_array(&mut r)?) as usize;
    let n_data = u32::from_le_bytes(read_array(&mut r)?) as usize;
    let shots = u64::from_le_bytes(read_array(&mut r)?);
    let epsilon = f64::from_le_bytes(read_array(&mut r)?);
    let seed = u64::from_le_bytes(read_array(&mut r)?);
    let header = HistoryHeader { d, rounds: rows - 1, n_plaquettes, n_data, shots, epsilon, seed };

    let ob = (rows * n_plaquettes).div_ceil(8);
    let fb = n_data.div_ceil(8);
    let mut out = Vec::with_capacity(shots.min(1 << 20) as usize);
    let mut buf = vec![0u8; ob + fb];
    for i in 0..shots {
        r.read_exact(&mut buf).map_err(|e| Error::Format(format!("truncated at shot {i}: {e}")))?;
        out.push(SyndromeHistory {
            n_plaquettes,
            rounds: rows - 1,
            outcomes: unpack(&buf[..ob], rows * n_plaquettes),
            frame: unpack(&buf[ob..], n_data),
        });
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Format("trailing bytes after last shot".into()));
    }
    Ok((header, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SyndromeHistory {
        SyndromeHistory {
            n_plaquettes: 3,
            rounds: 2,
            outcomes: vec![false, true, false, false, true, true, false, false, true],
            frame: vec![true, false, false, true, false],
        }
    }

    #[test]
    fn events_xor_consecutive_rounds() {
        let ev = detection_events(&sample());
        assert_eq!(ev, vec![(1, 0), (2, 1), (1, 2)]);
    }

    #[test]
    fn binary_roundtrip() {
        let h = sample();
        let header = HistoryHeader { d: 5, rounds: 2, n_plaquettes: 3, n_data: 5, shots: 2, epsilon: 0.001, seed: 7 };
        let mut buf = Vec::new();
        write_histories(&mut buf, &header, &[h.clone(), h.clone()]).unwrap();
        let (hd, back) = read_histories(&buf[..]).unwrap();
        assert_eq!(hd, header);
        assert_eq!(back, vec![h.clone(), h]);
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_histories(&b"nope"[..]).is_err());
        let mut buf = Vec::new();
        let header = HistoryHeader { d: 5, rounds: 2, n_plaquettes: 3, n_data: 5, shots: 1, epsilon: 0.0, seed: 0 };
        write_histories(&mut buf, &header, &[sample()]).unwrap();
        buf.pop();
        assert!(read_histories(&buf[..]).is_err());
    }
}
