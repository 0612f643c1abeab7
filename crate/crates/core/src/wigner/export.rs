//! CSV and binary layouts for sampled distributions.
//!
//! Binary: four little-endian `f64` bounds `(q_min, q_max, p_min, p_max)`,
//! two `i32` sizes `(nq, np)`, then `nq·np` `f64` values with `p` varying
//! fastest.

use std::io::{Read, Write};

use nalgebra::DMatrix;

use super::{PhaseSpaceGrid, WignerGrid};
use crate::error::{Error, Result};
use crate::io::{csv_writer, fmt_f64};

impl WignerGrid {
    /// `q,p,value` rows in grid order, 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv_writer(out);
        w.write_record(["q", "p", "value"])?;
        for i in 0..self.grid.nq {
            for j in 0..self.grid.np {
                w.write_record([
                    fmt_f64(self.grid.q(i)),
                    fmt_f64(self.grid.p(j)),
                    fmt_f64(self.values[(i, j)]),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        let g = &self.grid;
        for b in [g.q_min, g.q_max, g.p_min, g.p_max] {
            out.write_all(&b.to_le_bytes())?;
        }
        for n in [g.nq, g.np] {
            let n = i32::try_from(n).map_err(|_| Error::Format(format!("grid size {n} does not fit i32")))?;
            out.write_all(&n.to_le_bytes())?;
        }
        for i in 0..g.nq {
            for j in 0..g.np {
                out.write_all(&self.values[(i, j)].to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R) -> Result<Self> {
        let mut f8 = [0u8; 8];
        let mut bounds = [0.0; 4];
        for b in &mut bounds {
            input.read_exact(&mut f8)?;
            *b = f64::from_le_bytes(f8);
        }
        let mut i4 = [0u8; 4];
        let mut sizes = [0usize; 2];
        for s in &mut sizes {
            input.read_exact(&mut i4)?;
            let n = i32::from_le_bytes(i4);
            *s = usize::try_from(n).map_err(|_| Error::Format(format!("negative grid size {n}")))?;
        }
        let grid = PhaseSpaceGrid::new(bounds[0], bounds[1], bounds[2], bounds[3], sizes[0], sizes[1])?;
        let mut values = DMatrix::zeros(grid.nq, grid.np);
        for i in 0..grid.nq {
            for j in 0..grid.np {
                input.read_exact(&mut f8)?;
                values[(i, j)] = f64::from_le_bytes(f8);
            }
        }
        let mut rest = Vec::new();
        input.read_to_end(&mut rest)?;
        if !rest.is_empty() {
            return Err(Error::Format(format!("{} trailing bytes after grid data", rest.len())));
        }
        WignerGrid::from_values(grid, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> WignerGrid {
        PhaseSpaceGrid::new(-1.0, 1.0, -2.0, 2.0, 3, 5).unwrap().tabulate(|q, p| q * 10.0 + p + 0.1)
    }

    #[test]
    fn binary_round_trip_and_layout() {
        let w = sample();
        let mut buf = Vec::new();
        w.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 4 * 8 + 2 * 4 + 15 * 8);
        assert_eq!(f64::from_le_bytes(buf[8..16].try_into().unwrap()), 1.0);
        assert_eq!(i32::from_le_bytes(buf[36..40].try_into().unwrap()), 5);
        // second value is (q_0, p_1)
        assert_eq!(f64::from_le_bytes(buf[48..56].try_into().unwrap()), w.value(0, 1));
        assert_eq!(WignerGrid::read_binary(buf.as_slice()).unwrap(), w);
        buf.push(0);
        assert!(WignerGrid::read_binary(buf.as_slice()).is_err());
    }

    #[test]
    fn csv_rows() {
        let mut buf = Vec::new();
        sample().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 16);
        assert_eq!(lines[0], "q,p,value");
        assert_eq!(lines[1], "-1.0000000000000000e0,-2.0000000000000000e0,-1.1900000000000000e1");
        assert!(!text.contains('\r'));
    }
}
