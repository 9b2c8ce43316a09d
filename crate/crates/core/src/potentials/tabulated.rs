//! Bilinear tables on a rectangular (rho, x3) lattice.

use std::path::Path;

use crate::error::{Error, Result};
use crate::real::{lit, Real};

/// Values on a tensor lattice, stored rho-major (x3 varies fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct Table2D<T> {
    rho: Vec<T>,
    x3: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> Table2D<T> {
    pub fn new(rho: Vec<T>, x3: Vec<T>, values: Vec<T>) -> Result<Self> {
        if rho.len() < 2 || x3.len() < 2 {
            return Err(Error::Config("table needs at least 2 nodes per axis".into()));
        }
        if values.len() != rho.len() * x3.len() {
            return Err(Error::Config(format!(
                "table has {} values, expected {}x{}",
                values.len(),
                rho.len(),
                x3.len()
            )));
        }
        let increasing = |a: &[T]| a.windows(2).all(|w| w[1] > w[0]);
        if !increasing(&rho) || !increasing(&x3) {
            return Err(Error::Config("table axes must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("table contains non-finite values".into()));
        }
        Ok(Self { rho, x3, values })
    }

    /// Samples `f` on the lattice.
    pub fn from_fn(rho: Vec<T>, x3: Vec<T>, f: impl Fn(T, T) -> T) -> Result<Self> {
        let values = rho
            .iter()
            .flat_map(|&r| x3.iter().map(move |&z| (r, z)))
            .map(|(r, z)| f(r, z))
            .collect();
        Self::new(rho, x3, values)
    }

    pub fn rho_axis(&self) -> &[T] {
        &self.rho
    }

    pub fn x3_axis(&self) -> &[T] {
        &self.x3
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Whether the lattice covers the closed rectangle.
    pub fn covers(&self, rho_lo: T, rho_hi: T, x3_lo: T, x3_hi: T) -> bool {
        self.rho[0] <= rho_lo
            && *self.rho.last().unwrap() >= rho_hi
            && self.x3[0] <= x3_lo
            && *self.x3.last().unwrap() >= x3_hi
    }

    /// True when every rho-row is constant along x3.
    pub fn is_x3_independent(&self) -> bool {
        let n3 = self.x3.len();
        self.values.chunks(n3).all(|row| {
            let scale = row.iter().fold(T::one(), |m, v| m.max(v.abs()));
            row.iter().all(|v| (*v - row[0]).abs() <= lit::<T>(1e-12) * scale)
        })
    }

    /// Bilinear interpolation, clamped to the lattice outside its range.
    pub fn eval(&self, rho: T, x3: T) -> T {
        let (i, s) = locate(&self.rho, rho);
        let (j, t) = locate(&self.x3, x3);
        let n3 = self.x3.len();
        let v00 = self.values[i * n3 + j];
        let v01 = self.values[i * n3 + j + 1];
        let v10 = self.values[(i + 1) * n3 + j];
        let v11 = self.values[(i + 1) * n3 + j + 1];
        let one = T::one();
        (one - s) * ((one - t) * v00 + t * v01) + s * ((one - t) * v10 + t * v11)
    }

    /// Reads a `rho,x3,value` CSV whose rows are ordered rho-major.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let headers = reader.headers()?.clone();
        let names: Vec<&str> = headers.iter().map(str::trim).collect();
        if names != ["rho", "x3", "value"] {
            return Err(Error::Config(format!(
                "{}: expected header rho,x3,value, found {}",
                path.display(),
                names.join(",")
            )));
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record?;
            let parse = |k: usize| -> Result<f64> {
                record[k].trim().parse::<f64>().map_err(|e| {
                    Error::Config(format!("{}: bad number {:?}: {e}", path.display(), &record[k]))
                })
            };
            rows.push((parse(0)?, parse(1)?, parse(2)?));
        }
        Self::from_rows(&rows).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    fn from_rows(rows: &[(f64, f64, f64)]) -> Result<Self> {
        let first_rho = rows.first().map(|r| r.0).ok_or_else(|| Error::Config("empty table".into()))?;
        let n3 = rows.iter().take_while(|r| r.0 == first_rho).count();
        if n3 == 0 || rows.len() % n3 != 0 {
            return Err(Error::Config("rows do not form a rho-major lattice".into()));
        }
        let x3: Vec<f64> = rows[..n3].iter().map(|r| r.1).collect();
        let mut rho = Vec::with_capacity(rows.len() / n3);
        for (k, chunk) in rows.chunks(n3).enumerate() {
            let r0 = chunk[0].0;
            if chunk.iter().any(|r| r.0 != r0) || chunk.iter().zip(&x3).any(|(r, z)| r.1 != *z) {
                return Err(Error::Config(format!("row block {k} breaks the rho-major lattice")));
            }
            rho.push(r0);
        }
        Self::new(
            rho.into_iter().map(lit).collect(),
            x3.into_iter().map(lit).collect(),
            rows.iter().map(|r| lit(r.2)).collect(),
        )
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["rho", "x3", "value"])?;
        let n3 = self.x3.len();
        for (i, r) in self.rho.iter().enumerate() {
            for (j, z) in self.x3.iter().enumerate() {
                w.write_record([r.to_string(), z.to_string(), self.values[i * n3 + j].to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Cell index and local coordinate in [0, 1], clamped at the ends.
fn locate<T: Real>(axis: &[T], x: T) -> (usize, T) {
    let n = axis.len();
    if x <= axis[0] {
        return (0, T::zero());
    }
    if x >= axis[n - 1] {
        return (n - 2, T::one());
    }
    let i = axis.partition_point(|&a| a <= x).saturating_sub(1).min(n - 2);
    (i, (x - axis[i]) / (axis[i + 1] - axis[i]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lin(n: usize, a: f64, b: f64) -> Vec<f64> {
        (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn bilinear_is_exact_on_bilinear_data() {
        let t = Table2D::from_fn(lin(5, 0.5, 3.0), lin(4, 0.0, 2.0), |r, z| 1.0 + 2.0 * r - z + 0.5 * r * z).unwrap();
        for &(r, z) in &[(0.7, 0.3), (2.9, 1.99), (1.234, 1.0)] {
            let exact = 1.0 + 2.0 * r - z + 0.5 * r * z;
            assert!((t.eval(r, z) - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn clamps_outside() {
        let t = Table2D::from_fn(lin(3, 1.0, 2.0), lin(3, 0.0, 1.0), |r, _| r).unwrap();
        assert_eq!(t.eval(0.0, 0.5), 1.0);
        assert_eq!(t.eval(5.0, 9.0), 2.0);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let t = Table2D::from_fn(lin(4, 0.1, 1.0), lin(3, 0.0, 0.5), |r, z| r * r + z).unwrap();
        t.write_csv(&path).unwrap();
        let back = Table2D::<f64>::from_csv(&path).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn rejects_bad_header_and_shape() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "r,z,v\n1,0,1\n").unwrap();
        assert!(Table2D::<f64>::from_csv(&path).is_err());
        std::fs::write(&path, "rho,x3,value\n1,0,1\n1,1,1\n2,0,1\n").unwrap();
        assert!(Table2D::<f64>::from_csv(&path).is_err());
    }
}
