//! CGF1 binary field dumps.
//!
//! Layout: the magic bytes `CGF1`, then `n` as a little-endian `u64`, the
//! half-width `R` as a little-endian `f64`, then `n²` pairs `(re, im)` of
//! little-endian `f64` in row-major order (sample `(i, k)` at `i*n + k`).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::grid::{Field, Grid};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"CGF1";

pub fn write_cgf1<W: Write>(field: &Field, mut out: W) -> Result<()> {
    let grid = field.grid();
    out.write_all(MAGIC)?;
    out.write_all(&(grid.n() as u64).to_le_bytes())?;
    out.write_all(&grid.half_width().to_le_bytes())?;
    for v in field.values() {
        out.write_all(&v.re.to_le_bytes())?;
        out.write_all(&v.im.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_cgf1<R: Read>(mut input: R) -> Result<Field> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::invalid("not a CGF1 stream"));
    }
    let mut word = [0u8; 8];
    input.read_exact(&mut word)?;
    let n = usize::try_from(u64::from_le_bytes(word)).map_err(|_| Error::invalid("n overflows usize"))?;
    input.read_exact(&mut word)?;
    let grid = Grid::new(n, f64::from_le_bytes(word))?;
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        input.read_exact(&mut word)?;
        let re = f64::from_le_bytes(word);
        input.read_exact(&mut word)?;
        values.push(Complex64::new(re, f64::from_le_bytes(word)));
    }
    Field::from_values(grid, values)
}

pub fn save(field: &Field, path: impl AsRef<Path>) -> Result<()> {
    write_cgf1(field, BufWriter::new(File::create(path)?))
}

pub fn load(path: impl AsRef<Path>) -> Result<Field> {
    read_cgf1(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let g = Grid::new(16, 1.5).unwrap();
        let f = Field::from_fn(g, |z| z * Complex64::i());
        let mut buf = Vec::new();
        write_cgf1(&f, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"CGF1");
        assert_eq!(u64::from_le_bytes(buf[4..12].try_into().unwrap()), 16);
        assert_eq!(f64::from_le_bytes(buf[12..20].try_into().unwrap()), 1.5);
        assert_eq!(buf.len(), 20 + 16 * 16 * 16);
        assert_eq!(read_cgf1(buf.as_slice()).unwrap(), f);
    }
}
