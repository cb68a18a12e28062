//! Plain-text data files. Every real number is written with 17 significant
//! digits so that files round-trip exactly and compare byte for byte.

use std::fs::File;
use std::io::{BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_space::{coeff_index, num_coeffs, BandlimitedFunction};
use crate::kernels::KernelSpec;
use crate::product::StructureTensor;
use crate::quadrature::QuadratureGrid;
use crate::semiclassical::LimitScanRow;
use crate::verify::{ProductRecord, SuiteOutcome};

/// `x` with 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_grid_csv<W: Write>(mut w: W, grid: &QuadratureGrid) -> Result<()> {
    writeln!(w, "theta,phi,weight,antipode_index")?;
    for ((p, wt), a) in grid.nodes().iter().zip(grid.weights()).zip(grid.antipode_index()) {
        writeln!(w, "{},{},{},{a}", fmt_num(p.theta()), fmt_num(p.phi()), fmt_num(*wt))?;
    }
    Ok(())
}

pub fn write_coefficients_csv<W: Write>(mut w: W, f: &BandlimitedFunction) -> Result<()> {
    writeln!(w, "l,m,re,im")?;
    for l in 0..=f.l_max() {
        for m in -(l as i64)..=l as i64 {
            let c = f.get(l, m);
            writeln!(w, "{l},{m},{},{}", fmt_num(c.re), fmt_num(c.im))?;
        }
    }
    Ok(())
}

/// Reads `l, m, re, im` rows after a header. Missing coefficients are zero;
/// the bandlimit is the largest `l` present.
pub fn read_coefficients_csv<R: BufRead>(r: R) -> Result<BandlimitedFunction> {
    let mut entries: Vec<(usize, i64, Complex64)> = Vec::new();
    let mut header_seen = false;
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        if !header_seen {
            header_seen = true;
            let cols: Vec<String> = text.split(',').map(|c| c.trim().to_ascii_lowercase()).collect();
            if cols != ["l", "m", "re", "im"] {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected header l,m,re,im, got {text:?}"),
                });
            }
            continue;
        }
        let fields: Vec<&str> = text.split(',').map(str::trim).collect();
        let bad = |message: String| Error::Parse { line: line_no, message };
        if fields.len() != 4 {
            return Err(bad(format!("expected 4 fields, got {}", fields.len())));
        }
        let l: usize = fields[0].parse().map_err(|_| bad(format!("bad degree {:?}", fields[0])))?;
        let m: i64 = fields[1].parse().map_err(|_| bad(format!("bad order {:?}", fields[1])))?;
        let re: f64 = fields[2].parse().map_err(|_| bad(format!("bad real part {:?}", fields[2])))?;
        let im: f64 = fields[3].parse().map_err(|_| bad(format!("bad imaginary part {:?}", fields[3])))?;
        if m.unsigned_abs() as usize > l {
            return Err(bad(format!("|m| > l in ({l}, {m})")));
        }
        if !(re.is_finite() && im.is_finite()) {
            return Err(bad("non-finite coefficient".into()));
        }
        entries.push((l, m, Complex64::new(re, im)));
    }
    if !header_seen {
        return Err(Error::Parse {
            line: 0,
            message: "empty coefficient file".into(),
        });
    }
    let l_max = entries.iter().map(|e| e.0).max().unwrap_or(0);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); num_coeffs(l_max)];
    for (l, m, c) in entries {
        coeffs[coeff_index(l, m)] = c;
    }
    BandlimitedFunction::from_coeffs(l_max, coeffs)
}

pub fn write_product_csv<W: Write>(mut w: W, grid: &QuadratureGrid, values: &[Complex64]) -> Result<()> {
    if values.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            actual: values.len(),
        });
    }
    writeln!(w, "node_index,theta,phi,re,im")?;
    for (i, (p, v)) in grid.nodes().iter().zip(values).enumerate() {
        writeln!(w, "{i},{},{},{},{}", fmt_num(p.theta()), fmt_num(p.phi()), fmt_num(v.re), fmt_num(v.im))?;
    }
    Ok(())
}

/// Rows in lexicographic order of `(l1, m1, l2, m2, l3, m3)`.
pub fn write_structure_csv<W: Write>(mut w: W, t: &StructureTensor) -> Result<()> {
    writeln!(w, "l1,m1,l2,m2,l3,m3,re,im")?;
    let lm: Vec<(usize, i64)> = (0..=t.l_max).flat_map(|l| (-(l as i64)..=l as i64).map(move |m| (l, m))).collect();
    for &(l1, m1) in &lm {
        for &(l2, m2) in &lm {
            for &(l3, m3) in &lm {
                let c = t.get(coeff_index(l1, m1), coeff_index(l2, m2), coeff_index(l3, m3));
                writeln!(w, "{l1},{m1},{l2},{m2},{l3},{m3},{},{}", fmt_num(c.re), fmt_num(c.im))?;
            }
        }
    }
    Ok(())
}

/// `k, rel_error`; an identically zero reference is written as an exact zero.
pub fn write_limit_scan_csv<W: Write>(mut w: W, rows: &[LimitScanRow]) -> Result<()> {
    writeln!(w, "k,rel_error")?;
    for r in rows {
        writeln!(w, "{},{}", r.k, fmt_num(r.rel_error.unwrap_or(0.0)))?;
    }
    Ok(())
}

pub fn write_verify_products_csv<W: Write>(mut w: W, records: &[ProductRecord]) -> Result<()> {
    writeln!(w, "n,amplitude,node_index,re,im")?;
    for r in records {
        for (i, v) in r.values.iter().enumerate() {
            writeln!(w, "{},{},{i},{},{}", r.n, r.amplitude, fmt_num(v.re), fmt_num(v.im))?;
        }
    }
    Ok(())
}

/// Run metadata written next to the data files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub spec: Option<KernelSpec>,
    pub n_polar: usize,
    pub n_azimuth: usize,
    pub bandlimit: usize,
    pub seed: u64,
    pub skipped_weight: Option<f64>,
    pub wall_time_s: f64,
    /// Free-form `key = value` notes such as self-check results.
    pub notes: Vec<(String, String)>,
}

pub fn write_json<W: Write, T: Serialize>(mut w: W, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w, "{text}")?;
    Ok(())
}

/// Creates `dir/name` and hands a buffered writer to `body`.
pub fn write_file<F>(dir: &Path, name: &str, body: F) -> Result<PathBuf>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut w = BufWriter::new(File::create(&path)?);
    body(&mut w)?;
    w.flush()?;
    Ok(path)
}

/// Writes `verify_report.json` and `verify_products.csv`, which depend only
/// on the configuration, and `manifest.json`, which also records timings.
pub fn write_verify_outputs(dir: &Path, outcome: &SuiteOutcome, wall_time_s: f64) -> Result<Vec<PathBuf>> {
    let report = write_file(dir, "verify_report.json", |w| write_json(w, &outcome.report))?;
    let products = write_file(dir, "verify_products.csv", |w| write_verify_products_csv(w, &outcome.products))?;
    let config = &outcome.report.config;
    let mut notes = vec![("passed".to_string(), outcome.report.passed().to_string())];
    for (c, t) in &outcome.timings {
        notes.push((format!("criterion_{c}_seconds"), format!("{t:.3}")));
    }
    let manifest = RunManifest {
        command: "verify".into(),
        spec: None,
        n_polar: config.grid.0,
        n_azimuth: config.grid.1,
        bandlimit: config.l_max,
        seed: config.seed,
        skipped_weight: None,
        wall_time_s,
        notes,
    };
    let manifest = write_file(dir, "manifest.json", |w| write_json(w, &manifest))?;
    Ok(vec![report, products, manifest])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_space::{random_bandlimited, ParityFilter};

    #[test]
    fn coefficients_round_trip_exactly() {
        let f = random_bandlimited(3, 7, ParityFilter::None, false);
        let mut buf = Vec::new();
        write_coefficients_csv(&mut buf, &f).unwrap();
        let g = read_coefficients_csv(buf.as_slice()).unwrap();
        assert_eq!(f.coeffs(), g.coeffs());
    }

    #[test]
    fn malformed_coefficients_are_rejected() {
        let cases = [
            "",
            "a,b,c,d\n",
            "l,m,re,im\n1,2,0.5,0\n",
            "l,m,re,im\n1,0,x,0\n",
            "l,m,re,im\n1,0,1\n",
        ];
        for text in cases {
            assert!(read_coefficients_csv(text.as_bytes()).is_err(), "{text:?}");
        }
        let f = read_coefficients_csv("l,m,re,im\n2,-1,1.5,0\n".as_bytes()).unwrap();
        assert_eq!(f.l_max(), 2);
        assert_eq!(f.get(2, -1), Complex64::new(1.5, 0.0));
    }

    #[test]
    fn numbers_have_seventeen_digits() {
        assert_eq!(fmt_num(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_num(-2.0), "-2.0000000000000000e0");
    }
}
