//! Field serialization: a binary container (magic, header length, JSON header, little-endian
//! interleaved `f64` pairs) and CSV export of `|u|`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::grid::{ComplexField, HalfPlaneGrid};
use crate::error::{Error, Result};
use crate::real::{lit, to_f64, Real};

const MAGIC: &[u8; 8] = b"MAGNLSF1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub grid: HalfPlaneGrid<f64>,
    pub eps: f64,
    pub p: f64,
    pub layout: String,
}

fn grid_f64<T: Real>(g: &HalfPlaneGrid<T>) -> HalfPlaneGrid<f64> {
    HalfPlaneGrid {
        rho_min: to_f64(g.rho_min),
        rho_max: to_f64(g.rho_max),
        x3_min: to_f64(g.x3_min),
        x3_max: to_f64(g.x3_max),
        n_rho: g.n_rho,
        n_x3: g.n_x3,
        measure: g.measure,
    }
}

pub fn write_field<T: Real>(path: &Path, grid: &HalfPlaneGrid<T>, eps: T, p: T, u: &ComplexField<T>) -> Result<()> {
    let header = FieldHeader {
        grid: grid_f64(grid),
        eps: to_f64(eps),
        p: to_f64(p),
        layout: "rho-major, x3 fastest; interleaved (re, im) little-endian f64".into(),
    };
    let json = serde_json::to_vec(&header)?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(json.len() as u64).to_le_bytes())?;
    w.write_all(&json)?;
    for z in &u.data {
        w.write_all(&to_f64(z.re).to_le_bytes())?;
        w.write_all(&to_f64(z.im).to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_field<T: Real>(path: &Path) -> Result<(FieldHeader, ComplexField<T>)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Config(format!("{}: not a field container", path.display())));
    }
    let mut len = [0u8; 8];
    r.read_exact(&mut len)?;
    let len = u64::from_le_bytes(len) as usize;
    let mut json = vec![0u8; len];
    r.read_exact(&mut json)?;
    let header: FieldHeader = serde_json::from_slice(&json)?;
    let n = header.grid.n_rho * header.grid.n_x3;
    let mut data = Vec::with_capacity(n);
    let mut buf = [0u8; 16];
    for _ in 0..n {
        r.read_exact(&mut buf)?;
        let re = f64::from_le_bytes(buf[..8].try_into().expect("8 bytes"));
        let im = f64::from_le_bytes(buf[8..].try_into().expect("8 bytes"));
        data.push(Complex::new(lit::<T>(re), lit::<T>(im)));
    }
    let field = ComplexField { n_rho: header.grid.n_rho, n_x3: header.grid.n_x3, data };
    Ok((header, field))
}

/// Writes `rho,x3,abs_u` rows.
pub fn write_modulus_csv<T: Real>(path: &Path, grid: &HalfPlaneGrid<T>, u: &ComplexField<T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["rho", "x3", "abs_u"])?;
    for i in 0..grid.n_rho {
        for j in 0..grid.n_x3 {
            let z = u.data[grid.idx(i, j)];
            w.write_record(&[
                format!("{:.12e}", to_f64(grid.rho(i))),
                format!("{:.12e}", to_f64(grid.x3(j))),
                format!("{:.12e}", to_f64(z.norm())),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
