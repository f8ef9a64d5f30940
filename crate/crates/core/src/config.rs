//! Run configuration: a `key=value` text file, overridable from the command
//! line. Emitting and re-parsing gives back the same configuration.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64;

use crate::analysis::{GVariant, WindowSpec};
use crate::eigenform::check_weight;
use crate::error::{Error, Result};
use crate::euler::{DEFAULT_DEPTH, DEFAULT_PRIME_CUTOFF};
use crate::moment::MomentRequest;

/// Environment variable that overrides the default cache directory.
pub const CACHE_ENV: &str = "QTML_CACHE_DIR";
pub const DEFAULT_CACHE_DIR: &str = "qtml-cache";
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub weight: u32,
    pub ell: u64,
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub x_grid: Vec<f64>,
    pub window: WindowSpec,
    pub g_variant: GVariant,
    pub prime_cutoff: u64,
    pub accel_depth: u32,
    pub workers: usize,
    pub cache_dir: PathBuf,
    /// Report path prefix: `<out>.csv` and `<out>.json`.
    pub out: PathBuf,
    pub seed: u64,
    pub derivative: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            weight: 12,
            ell: 1,
            alpha_re: 0.0,
            alpha_im: 0.0,
            x_grid: vec![250.0, 500.0, 1000.0, 2000.0],
            window: crate::analysis::default_window(),
            g_variant: GVariant::Unit,
            prime_cutoff: DEFAULT_PRIME_CUTOFF,
            accel_depth: DEFAULT_DEPTH,
            workers: 0,
            cache_dir: std::env::var_os(CACHE_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR)),
            out: PathBuf::from("moment"),
            seed: DEFAULT_SEED,
            derivative: false,
        }
    }
}

const KEYS: &[&str] = &[
    "weight",
    "ell",
    "alpha_re",
    "alpha_im",
    "x_grid",
    "window",
    "g_variant",
    "prime_cutoff",
    "accel_depth",
    "workers",
    "cache_dir",
    "out",
    "seed",
    "derivative",
];

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::InvalidArgument(format!("config key '{key}': cannot parse '{v}'")))
}

pub fn parse_grid(v: &str) -> Result<Vec<f64>> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| parse_num("x_grid", s.trim())).collect()
}

impl RunConfig {
    /// Sets one key. Unknown keys are errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "weight" => self.weight = parse_num(key, v)?,
            "ell" => self.ell = parse_num(key, v)?,
            "alpha_re" => self.alpha_re = parse_num(key, v)?,
            "alpha_im" => self.alpha_im = parse_num(key, v)?,
            "x_grid" => self.x_grid = parse_grid(v)?,
            "window" => self.window = v.parse()?,
            "g_variant" => self.g_variant = v.parse()?,
            "prime_cutoff" => self.prime_cutoff = parse_num(key, v)?,
            "accel_depth" => self.accel_depth = parse_num(key, v)?,
            "workers" => self.workers = parse_num(key, v)?,
            "cache_dir" => self.cache_dir = PathBuf::from(v),
            "out" => self.out = PathBuf::from(v),
            "seed" => self.seed = parse_num(key, v)?,
            "derivative" => self.derivative = parse_num(key, v)?,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown config key '{other}'; known keys: {}",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Parses `key = value` lines over the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = RunConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("config line {}: expected key=value", i + 1)))?;
            c.set(k, v)?;
        }
        Ok(c)
    }

    pub fn alpha(&self) -> Complex64 {
        Complex64::new(self.alpha_re, self.alpha_im)
    }

    pub fn validate(&self) -> Result<()> {
        check_weight(self.weight)?;
        if self.accel_depth > 6 {
            return Err(Error::InvalidArgument(format!("acceleration depth {} above 6", self.accel_depth)));
        }
        if self.prime_cutoff < 100 {
            return Err(Error::InvalidArgument(format!("prime cutoff {} below 100", self.prime_cutoff)));
        }
        self.moment_request().validate()
    }

    pub fn moment_request(&self) -> MomentRequest {
        MomentRequest {
            kappa: self.weight,
            ell: self.ell,
            alpha: self.alpha(),
            x_grid: self.x_grid.clone(),
            window: self.window,
            derivative: self.derivative,
            variant: self.g_variant,
            workers: self.workers,
            tail_tol: crate::lfun::DEFAULT_TAIL_TOL,
            prime_cutoff: self.prime_cutoff,
            depth: self.accel_depth,
        }
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let grid: Vec<String> = self.x_grid.iter().map(|x| x.to_string()).collect();
        writeln!(f, "weight = {}", self.weight)?;
        writeln!(f, "ell = {}", self.ell)?;
        writeln!(f, "alpha_re = {}", self.alpha_re)?;
        writeln!(f, "alpha_im = {}", self.alpha_im)?;
        writeln!(f, "x_grid = {}", grid.join(","))?;
        writeln!(f, "window = {}", self.window)?;
        writeln!(f, "g_variant = {}", self.g_variant.name())?;
        writeln!(f, "prime_cutoff = {}", self.prime_cutoff)?;
        writeln!(f, "accel_depth = {}", self.accel_depth)?;
        writeln!(f, "workers = {}", self.workers)?;
        writeln!(f, "cache_dir = {}", self.cache_dir.display())?;
        writeln!(f, "out = {}", self.out.display())?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "derivative = {}", self.derivative)
    }
}

impl FromStr for RunConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RunConfig::parse(s)
    }
}
