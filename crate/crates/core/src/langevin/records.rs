//! Raw quadrature record dump.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic      8 bytes   b"OMQREC01"
//! rows       u64       number of records
//! cols       u64       quadratures per record (6)
//! dt         f64       time between consecutive records of one trajectory, s
//! n_traj     u64       trajectories; records are grouped per trajectory
//! data       rows·cols f64, row-major
//! ```

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"OMQREC01";

#[derive(Debug, Clone, PartialEq)]
pub struct RecordSet {
    pub cols: usize,
    pub dt: f64,
    pub n_trajectories: usize,
    /// Row-major samples, `rows() · cols` values.
    pub data: Vec<f64>,
}

impl RecordSet {
    pub fn rows(&self) -> usize {
        self.data.len().checked_div(self.cols).unwrap_or(0)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.rows() as u64).to_le_bytes())?;
        w.write_all(&(self.cols as u64).to_le_bytes())?;
        w.write_all(&self.dt.to_le_bytes())?;
        w.write_all(&(self.n_trajectories as u64).to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.data.len() * 8);
        for v in &self.data {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let mut word = [0u8; 8];
        let mut next = |r: &mut dyn Read| -> Result<[u8; 8]> {
            r.read_exact(&mut word)?;
            Ok(word)
        };
        let rows = u64::from_le_bytes(next(&mut r)?) as usize;
        let cols = u64::from_le_bytes(next(&mut r)?) as usize;
        let dt = f64::from_le_bytes(next(&mut r)?);
        let n_trajectories = u64::from_le_bytes(next(&mut r)?) as usize;
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::Format("record dimensions overflow".into()))?;
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() != len * 8 {
            return Err(Error::Format(format!("expected {} data bytes, found {}", len * 8, bytes.len())));
        }
        let data = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Self {
            cols,
            dt,
            n_trajectories,
            data,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(f))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn round_trip(data in proptest::collection::vec(-1e6f64..1e6, 0..60), dt in 1e-12f64..1.0) {
            let rows = data.len() / 6;
            let rs = RecordSet { cols: 6, dt, n_trajectories: 3, data: data[..rows * 6].to_vec() };
            let mut buf = Vec::new();
            rs.write_to(&mut buf).unwrap();
            prop_assert_eq!(buf.len(), 40 + rows * 48);
            prop_assert_eq!(RecordSet::read_from(&buf[..]).unwrap(), rs);
        }
    }

    #[test]
    fn rejects_truncated_and_bad_magic() {
        let rs = RecordSet { cols: 6, dt: 1e-9, n_trajectories: 1, data: vec![1.0; 12] };
        let mut buf = Vec::new();
        rs.write_to(&mut buf).unwrap();
        assert!(RecordSet::read_from(&buf[..buf.len() - 3]).is_err());
        buf[0] = b'X';
        assert!(RecordSet::read_from(&buf[..]).is_err());
    }
}
