//! CSV exchange of sampled pairs: columns r, theta, u1, u2 (planar) or r, phi, u1, u2
//! (axisymmetric, polar angle), one row per grid point, any row order.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use super::field::{AdmissiblePair, PolarField};
use crate::dtn::fmt17;
use crate::error::{Result, SpecError};

fn angle_column(dim: usize) -> &'static str {
    if dim == 2 {
        "theta"
    } else {
        "phi"
    }
}

fn ingestion(line: usize, msg: impl Into<String>) -> SpecError {
    SpecError::Ingestion { line, msg: msg.into() }
}

/// Reads a pair of dimension `dim` from CSV. Errors report the 1-based line; line 0
/// refers to the file as a whole (missing samples, invalid grids or fields).
pub fn read_pair_csv<R: Read>(reader: R, dim: usize, name: &str) -> Result<AdmissiblePair> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = r.headers().map_err(|e| ingestion(1, e.to_string()))?.clone();
    let expected = ["r", angle_column(dim), "u1", "u2"];
    if header.len() != 4 || header.iter().zip(expected).any(|(h, e)| h != e) {
        return Err(ingestion(1, format!("expected header {}", expected.join(","))));
    }
    let mut samples: BTreeMap<(u64, u64), (f64, f64)> = BTreeMap::new();
    let key = |x: f64| x.to_bits();
    let mut radii = Vec::new();
    let mut angles = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| ingestion(line, e.to_string()))?;
        if rec.len() != 4 {
            return Err(ingestion(line, "expected 4 columns"));
        }
        let num = |j: usize| -> Result<f64> {
            let v: f64 = rec[j].parse().map_err(|_| ingestion(line, format!("malformed number '{}'", &rec[j])))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(ingestion(line, format!("non-finite value '{}'", &rec[j])))
            }
        };
        let (rr, a, v1, v2) = (num(0)?, num(1)?, num(2)?, num(3)?);
        if samples.insert((key(rr), key(a)), (v1, v2)).is_some() {
            return Err(ingestion(line, format!("duplicate sample at r = {rr}, angle = {a}")));
        }
        radii.push(rr);
        angles.push(a);
    }
    if samples.is_empty() {
        return Err(ingestion(0, "no samples"));
    }
    let sorted_unique = |mut v: Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    };
    let radii = sorted_unique(radii);
    let angles = sorted_unique(angles);
    let mut u1 = Vec::with_capacity(radii.len() * angles.len());
    let mut u2 = Vec::with_capacity(radii.len() * angles.len());
    for &rr in &radii {
        for &a in &angles {
            let &(v1, v2) = samples
                .get(&(key(rr), key(a)))
                .ok_or_else(|| ingestion(0, format!("missing sample at r = {rr}, angle = {a}")))?;
            u1.push(v1);
            u2.push(v2);
        }
    }
    let as_ingestion = |e: SpecError| match e {
        SpecError::Ingestion { .. } => e,
        other => ingestion(0, other.to_string()),
    };
    let f1 = PolarField::new(dim, radii.clone(), angles.clone(), u1).map_err(as_ingestion)?;
    let f2 = PolarField::new(dim, radii, angles, u2).map_err(as_ingestion)?;
    AdmissiblePair::new(name, f1, f2).map_err(as_ingestion)
}

pub fn load_pair_csv(path: &Path, dim: usize) -> Result<AdmissiblePair> {
    let file = std::fs::File::open(path).map_err(|e| ingestion(0, format!("{}: {e}", path.display())))?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into());
    read_pair_csv(std::io::BufReader::new(file), dim, &name)
}

/// Writes a pair in the format read by [`read_pair_csv`], 17 significant digits.
pub fn write_pair_csv<W: Write>(pair: &AdmissiblePair, writer: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["r", angle_column(pair.dim()), "u1", "u2"])?;
    let (a, b) = (&pair.u1, &pair.u2);
    for k in 0..a.n_radius() {
        for j in 0..a.n_angle() {
            w.write_record([fmt17(a.radii[k]), fmt17(a.angles[j]), fmt17(a.value(k, j)), fmt17(b.value(k, j))])?;
        }
    }
    w.flush()
}
