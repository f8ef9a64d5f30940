use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::ntt::{Garner, Ntt, NTT_PRIMES};
use super::series::{eigenform_coefficients_bigint, eigenform_coefficients_mod};
use super::{check_weight, CHECKSUM_BASE, CHECKSUM_MODULUS};
use crate::arith::{divisor_count_table, primes_up_to};
use crate::error::{Error, Result};

pub const CACHE_MAGIC: &[u8; 4] = b"QTML";
pub const CACHE_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 4 + 4 + 4 + 8 + 8;

/// How the exact integer coefficients are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// Residues modulo NTT primes, combined by CRT.
    Crt,
    /// Arbitrary-precision arithmetic throughout.
    BigInt,
}

/// Normalized Hecke eigenvalues `lambda(n)` for `1 <= n <= n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenformTable {
    weight: u32,
    /// `lambda[0]` is unused and set to 0.
    lambda: Vec<f64>,
    checksum: u64,
}

fn checksum_update(acc: u64, power: u64, residue: u64) -> u64 {
    let q = CHECKSUM_MODULUS as u128;
    ((acc as u128 + residue as u128 * power as u128) % q) as u64
}

fn next_power(power: u64) -> u64 {
    ((power as u128 * CHECKSUM_BASE as u128) % CHECKSUM_MODULUS as u128) as u64
}

/// Number of NTT primes needed so that `|a(n)| <= 2 sqrt(n) n^{(k-1)/2}`
/// lies inside `(-M/2, M/2)`.
fn primes_needed(weight: u32, n: usize) -> usize {
    let n = n.max(2) as f64;
    let bits = 2.0 + 0.5 * n.log2() + 0.5 * (weight as f64 - 1.0) * n.log2();
    let per_prime = 61.9;
    ((bits / per_prime).floor() as usize + 1).min(NTT_PRIMES.len())
}

impl EigenformTable {
    /// Builds the table for `weight` up to `n_max` by the CRT route.
    pub fn build(weight: u32, n_max: usize) -> Result<Self> {
        Self::build_with(weight, n_max, Route::Crt)
    }

    pub fn build_with(weight: u32, n_max: usize, route: Route) -> Result<Self> {
        check_weight(weight)?;
        if n_max < 1 {
            return Err(Error::InvalidArgument("N_max must be at least 1".into()));
        }
        if n_max >= 1 << 26 {
            return Err(Error::MemoryBudget {
                requested: n_max,
                cap: (1 << 26) - 1,
            });
        }
        let half = (weight as f64 - 1.0) / 2.0;
        let mut lambda = vec![0.0f64; n_max + 1];
        let mut checksum = 0u64;
        let mut power = 1u64;
        match route {
            Route::BigInt => {
                let coeffs = eigenform_coefficients_bigint(weight, n_max)?;
                let q = BigInt::from(CHECKSUM_MODULUS);
                for (i, a) in coeffs.iter().enumerate() {
                    let n = i + 1;
                    lambda[n] = a.to_f64().unwrap_or(f64::NAN) / (n as f64).powf(half);
                    let r = ((a % &q) + &q) % &q;
                    checksum = checksum_update(checksum, power, r.to_u64().unwrap_or(0));
                    power = next_power(power);
                }
            }
            Route::Crt => {
                let k = primes_needed(weight, n_max);
                let primes: Vec<u64> = NTT_PRIMES[..k].iter().map(|&(p, _)| p).collect();
                let residues: Vec<Vec<u64>> = NTT_PRIMES[..k]
                    .iter()
                    .map(|&(p, g)| eigenform_coefficients_mod(&Ntt::new(p, g), weight, n_max))
                    .collect();
                let garner = Garner::new(&primes);
                let mut r = vec![0u64; k];
                for i in 0..n_max {
                    for (j, col) in residues.iter().enumerate() {
                        r[j] = col[i];
                    }
                    let x = garner.signed(&r);
                    let n = i + 1;
                    lambda[n] = x.to_f64() / (n as f64).powf(half);
                    checksum = checksum_update(checksum, power, x.rem(CHECKSUM_MODULUS));
                    power = next_power(power);
                }
            }
        }
        Ok(EigenformTable {
            weight,
            lambda,
            checksum,
        })
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn n_max(&self) -> usize {
        self.lambda.len() - 1
    }

    pub fn checksum(&self) -> u64 {
        self.checksum
    }

    /// `lambda(n)`; panics if `n` is 0 or beyond `n_max`.
    #[inline]
    pub fn lambda(&self, n: usize) -> f64 {
        assert!(n >= 1, "lambda is indexed from 1");
        self.lambda[n]
    }

    /// Slice with `lambda(n)` at index `n` (index 0 holds 0).
    pub fn values(&self) -> &[f64] {
        &self.lambda
    }

    /// `lambda(p^r)` from `lambda(p)` by the Hecke recursion.
    pub fn hecke_extend(&self, p: usize, r: u32) -> f64 {
        hecke_power(self.lambda(p), r)
    }

    pub fn require(&self, n: usize) -> Result<()> {
        if n > self.n_max() {
            Err(Error::TableTooShort {
                required: n,
                available: self.n_max(),
            })
        } else {
            Ok(())
        }
    }

    /// Deligne bound, `lambda(1) = 1`, Hecke recursion at small primes and
    /// multiplicativity on a deterministic sample.
    pub fn check_invariants(&self) -> Result<()> {
        let n_max = self.n_max();
        let fail = |msg: String| Err(Error::Integrity(msg));
        if (self.lambda[1] - 1.0).abs() > 1e-15 {
            return fail(format!("lambda(1) = {}", self.lambda[1]));
        }
        let m = n_max.min(10_000);
        let tau = divisor_count_table(m);
        for n in 1..=m {
            let l = self.lambda[n];
            if !l.is_finite() || l.abs() > tau[n] as f64 * (1.0 + 1e-12) {
                return fail(format!("Deligne bound fails at n = {n}: {l}"));
            }
        }
        for p in primes_up_to(97) {
            let p = p as usize;
            let mut pr = p;
            let mut r = 1u32;
            while pr.saturating_mul(p) <= n_max {
                let lhs = self.lambda[p] * self.lambda[pr];
                let prev = if r == 1 { 1.0 } else { self.lambda[pr / p] };
                let rhs = self.lambda[pr * p] + prev;
                if (lhs - rhs).abs() > 1e-12 * (r as f64 + 2.0) * (r as f64 + 2.0) {
                    return fail(format!("Hecke recursion fails at p = {p}, r = {r}"));
                }
                pr *= p;
                r += 1;
            }
        }
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        let mut checked = 0;
        let tau_small = divisor_count_table(n_max.min(1 << 20));
        let tau_of = |n: usize| -> f64 {
            if n < tau_small.len() {
                tau_small[n] as f64
            } else {
                2.0 * (n as f64).sqrt()
            }
        };
        for _ in 0..20_000 {
            if checked >= 2000 || n_max < 6 {
                break;
            }
            let a = 2 + (next() % (n_max as u64 / 2).max(1)) as usize;
            let b = 2 + (next() % ((n_max / a).max(2) as u64 - 1)) as usize;
            if a * b > n_max || crate::arith::gcd(a as u64, b as u64) != 1 {
                continue;
            }
            checked += 1;
            let d = (self.lambda[a * b] - self.lambda[a] * self.lambda[b]).abs();
            if d > 1e-12 * tau_of(a) * tau_of(b) {
                return fail(format!("multiplicativity fails at ({a}, {b}): defect {d:e}"));
            }
        }
        Ok(())
    }

    /// Recomputes the table from scratch and compares checksum and every
    /// double bitwise.
    pub fn verify_full(&self) -> Result<()> {
        let fresh = EigenformTable::build(self.weight, self.n_max())?;
        if fresh.checksum != self.checksum {
            return Err(Error::Integrity(format!(
                "checksum mismatch: stored {:#x}, recomputed {:#x}",
                self.checksum, fresh.checksum
            )));
        }
        if let Some(n) = (1..=self.n_max()).find(|&n| fresh.lambda[n].to_bits() != self.lambda[n].to_bits()) {
            return Err(Error::Integrity(format!("lambda({n}) differs from recomputation")));
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.n_max());
        out.extend_from_slice(CACHE_MAGIC);
        out.extend_from_slice(&CACHE_VERSION.to_le_bytes());
        out.extend_from_slice(&self.weight.to_le_bytes());
        out.extend_from_slice(&(self.n_max() as u64).to_le_bytes());
        out.extend_from_slice(&self.checksum.to_le_bytes());
        for &x in &self.lambda[1..] {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::Integrity(format!("cache file: {m}"));
        if bytes.len() < HEADER_LEN || &bytes[..4] != CACHE_MAGIC {
            return Err(bad("missing magic bytes"));
        }
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        let u64_at = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());
        let version = u32_at(4);
        if version != CACHE_VERSION {
            return Err(bad(&format!("format version {version}, expected {CACHE_VERSION}")));
        }
        let weight = u32_at(8);
        check_weight(weight)?;
        let n_max = u64_at(12) as usize;
        let checksum = u64_at(20);
        if bytes.len() != HEADER_LEN + 8 * n_max {
            return Err(bad(&format!(
                "length {} does not match N_max = {n_max}",
                bytes.len()
            )));
        }
        let mut lambda = Vec::with_capacity(n_max + 1);
        lambda.push(0.0);
        lambda.extend(
            bytes[HEADER_LEN..]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap())),
        );
        Ok(EigenformTable {
            weight,
            lambda,
            checksum,
        })
    }

    /// Writes to a temporary file in the same directory, then renames.
    pub fn save(&self, path: &Path) -> Result<()> {
        let dir = path.parent().unwrap_or(Path::new("."));
        fs::create_dir_all(dir)?;
        let tmp = dir.join(format!(
            ".{}.tmp{}",
            path.file_name().and_then(|s| s.to_str()).unwrap_or("table"),
            std::process::id()
        ));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&self.to_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    /// Reads a cache file and runs the cheap invariant scan.
    pub fn load(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        let t = Self::from_bytes(&bytes)?;
        t.check_invariants()?;
        Ok(t)
    }
}

/// `lambda(p^r)` from `lambda(p)`.
pub fn hecke_power(lp: f64, r: u32) -> f64 {
    let (mut prev, mut cur) = (1.0f64, lp);
    if r == 0 {
        return 1.0;
    }
    for _ in 1..r {
        let next = lp * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

pub fn cache_file_name(weight: u32, n_max: usize) -> String {
    format!("qtml-v{CACHE_VERSION}-k{weight}-n{n_max}.bin")
}

pub fn cache_path(dir: &Path, weight: u32, n_max: usize) -> PathBuf {
    dir.join(cache_file_name(weight, n_max))
}

/// Loads a cached table of this weight with at least `n_max` entries, or
/// builds and saves one. Returns the table and whether it was a cache hit.
pub fn load_or_build(dir: &Path, weight: u32, n_max: usize) -> Result<(EigenformTable, bool)> {
    check_weight(weight)?;
    let exact = cache_path(dir, weight, n_max);
    if exact.exists() {
        return Ok((EigenformTable::load(&exact)?, true));
    }
    if let Ok(entries) = fs::read_dir(dir) {
        let prefix = format!("qtml-v{CACHE_VERSION}-k{weight}-n");
        let mut best: Option<(usize, PathBuf)> = None;
        for e in entries.flatten() {
            let name = e.file_name();
            let Some(name) = name.to_str() else { continue };
            let Some(rest) = name.strip_prefix(&prefix) else { continue };
            let Some(num) = rest.strip_suffix(".bin") else { continue };
            let Ok(n) = num.parse::<usize>() else { continue };
            if n >= n_max && best.as_ref().is_none_or(|(b, _)| n < *b) {
                best = Some((n, e.path()));
            }
        }
        if let Some((_, path)) = best {
            return Ok((EigenformTable::load(&path)?, true));
        }
    }
    let t = EigenformTable::build(weight, n_max)?;
    t.save(&exact)?;
    Ok((t, false))
}
