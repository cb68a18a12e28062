//! Run configuration: a flat `key = value` file overlaid with command-line flags.
//!
//! Recognized keys:
//!
//! | key                 | value                                   | default        |
//! |---------------------|-----------------------------------------|----------------|
//! | `n`                 | integer >= 1                            | 2              |
//! | `ns`                | comma list of orders (verify)           | 1,2,3,4        |
//! | `grid`              | `PxA`, A even                           | 16x32          |
//! | `bandlimit`         | integer                                 | 4              |
//! | `seed`              | integer                                 | 1              |
//! | `variant`           | global, partial-ηνρ, restricted, generalized | global    |
//! | `amplitude`         | jacobian, unit, jacobian-scaled         | jacobian       |
//! | `eps_sign`          | positive real                           | 1e-12          |
//! | `eps_det`           | positive real                           | 1e-10          |
//! | `out`               | output directory                        | `out`          |
//! | `f`, `g`            | coefficient CSV files (product, scan)   | random / 1+Y20 |
//! | `parity`            | none, even, odd: random inputs          | none           |
//! | `ks`                | comma list (limit-scan)                 | 1,2,4,8,16     |
//! | `normalization`     | flat, unit-constant (limit-scan)        | flat           |
//! | `triangles`         | verify sample count                     | 1000           |
//! | `jacobian_samples`  | verify sample count                     | 100            |
//! | `kernel_triples`    | verify sample count                     | 10000          |
//! | `partition_samples` | verify sample count                     | 1000000        |
//!
//! Blank lines and lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use starlab::function_space::ParityFilter;
use starlab::geometry::{EPS_DET, EPS_SIGN};
use starlab::kernels::{Amplitude, KernelSpec, Variant};
use starlab::quadrature::parse_grid_spec;
use starlab::semiclassical::{LimitScanConfig, Normalization};
use starlab::verify::VerifyConfig;

use crate::CliError;

const KEYS: &[&str] = &[
    "n",
    "ns",
    "grid",
    "bandlimit",
    "seed",
    "variant",
    "amplitude",
    "eps_sign",
    "eps_det",
    "out",
    "f",
    "g",
    "parity",
    "ks",
    "normalization",
    "triangles",
    "jacobian_samples",
    "kernel_triples",
    "partition_samples",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputParity {
    None,
    Even,
    Odd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: u32,
    pub ns: Vec<u32>,
    pub grid: (usize, usize),
    pub bandlimit: usize,
    pub seed: u64,
    pub variant: Variant,
    pub amplitude: Amplitude,
    pub eps_sign: f64,
    pub eps_det: f64,
    pub out: PathBuf,
    pub f: Option<PathBuf>,
    pub g: Option<PathBuf>,
    pub parity: InputParity,
    pub ks: Vec<u32>,
    pub normalization: Normalization,
    pub triangles: usize,
    pub jacobian_samples: usize,
    pub kernel_triples: usize,
    pub partition_samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let v = VerifyConfig::default();
        RunConfig {
            n: 2,
            ns: v.ns,
            grid: v.grid,
            bandlimit: v.l_max,
            seed: v.seed,
            variant: Variant::Global,
            amplitude: Amplitude::Jacobian,
            eps_sign: EPS_SIGN,
            eps_det: EPS_DET,
            out: PathBuf::from("out"),
            f: None,
            g: None,
            parity: InputParity::None,
            ks: LimitScanConfig::default().ks,
            normalization: Normalization::Flat,
            triangles: v.triangles,
            jacobian_samples: v.jacobian_samples,
            kernel_triples: v.kernel_triples,
            partition_samples: v.partition_samples,
        }
    }
}

fn bad(key: &str, value: &str) -> CliError {
    CliError::Input(format!("invalid value {value:?} for {key}"))
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.parse().map_err(|_| bad(key, value))
}

fn list(key: &str, value: &str) -> Result<Vec<u32>, CliError> {
    value.split(',').map(|s| num(key, s.trim())).collect()
}

/// Parses `key = value` lines into a map, rejecting unknown keys.
pub fn parse_file_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("config line {}: expected key = value", i + 1)))?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(CliError::Input(format!("config line {}: unknown key {k:?}", i + 1)));
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(map)
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "n" => self.n = num(key, value)?,
            "ns" => self.ns = list(key, value)?,
            "grid" => self.grid = parse_grid_spec(value).map_err(|e| CliError::Input(e.to_string()))?,
            "bandlimit" => self.bandlimit = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "variant" => self.variant = value.parse().map_err(|_| bad(key, value))?,
            "amplitude" => self.amplitude = value.parse().map_err(|_| bad(key, value))?,
            "eps_sign" => self.eps_sign = num(key, value)?,
            "eps_det" => self.eps_det = num(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "f" => self.f = Some(PathBuf::from(value)),
            "g" => self.g = Some(PathBuf::from(value)),
            "parity" => {
                self.parity = match value {
                    "none" => InputParity::None,
                    "even" => InputParity::Even,
                    "odd" => InputParity::Odd,
                    _ => return Err(bad(key, value)),
                }
            }
            "ks" => self.ks = list(key, value)?,
            "normalization" => {
                self.normalization = match value {
                    "flat" => Normalization::Flat,
                    "unit-constant" => Normalization::UnitConstant,
                    _ => return Err(bad(key, value)),
                }
            }
            "triangles" => self.triangles = num(key, value)?,
            "jacobian_samples" => self.jacobian_samples = num(key, value)?,
            "kernel_triples" => self.kernel_triples = num(key, value)?,
            "partition_samples" => self.partition_samples = num(key, value)?,
            _ => return Err(CliError::Input(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Defaults, then the file at `path`, then `overrides` in order.
    pub fn load(path: Option<&Path>, overrides: &[(&str, String)]) -> Result<Self, CliError> {
        let mut c = RunConfig::default();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", p.display())))?;
            for (k, v) in parse_file_text(&text)? {
                c.set(&k, &v)?;
            }
        }
        for (k, v) in overrides {
            c.set(k, v)?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.grid.1 % 2 != 0 {
            return Err(CliError::Input(format!("n_azimuth = {} must be even", self.grid.1)));
        }
        if self.grid.0 < 1 {
            return Err(CliError::Input("n_polar must be at least 1".into()));
        }
        if self.n < 1 || self.ns.contains(&0) {
            return Err(CliError::Input("n must be at least 1".into()));
        }
        if !(self.eps_sign > 0.0 && self.eps_det > 0.0) {
            return Err(CliError::Input("tolerances must be positive".into()));
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<KernelSpec, CliError> {
        let mut s = KernelSpec::new(self.n, self.variant).map_err(|e| CliError::Input(e.to_string()))?;
        s.amplitude = self.amplitude;
        s.eps_sign = self.eps_sign;
        s.eps_det = self.eps_det;
        Ok(s)
    }

    pub fn parity_filter(&self) -> ParityFilter {
        match self.parity {
            InputParity::None => ParityFilter::None,
            InputParity::Even => ParityFilter::NEven(self.n),
            InputParity::Odd => ParityFilter::NOdd(self.n),
        }
    }

    pub fn verify_config(&self) -> VerifyConfig {
        VerifyConfig {
            ns: self.ns.clone(),
            grid: self.grid,
            l_max: self.bandlimit,
            seed: self.seed,
            triangles: self.triangles,
            jacobian_samples: self.jacobian_samples,
            kernel_triples: self.kernel_triples,
            partition_samples: self.partition_samples,
            eps_sign: self.eps_sign,
            eps_det: self.eps_det,
            ..VerifyConfig::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_values_are_overridden_by_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "# demo\nn = 3\ngrid = 8x16\n\nseed=9\n").unwrap();
        let c = RunConfig::load(Some(&path), &[("n", "4".into())]).unwrap();
        assert_eq!((c.n, c.grid, c.seed), (4, (8, 16), 9));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(parse_file_text("bogus = 1").is_err());
        assert!(parse_file_text("n 3").is_err());
        assert!(RunConfig::load(None, &[("grid", "8x15".into())]).is_err());
        assert!(RunConfig::load(None, &[("n", "0".into())]).is_err());
        assert!(RunConfig::load(None, &[("eps_det", "-1".into())]).is_err());
        assert!(RunConfig::load(None, &[("variant", "partial-012".into())]).is_err());
    }
}
