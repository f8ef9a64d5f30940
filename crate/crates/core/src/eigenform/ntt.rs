//! Number-theoretic transforms modulo 62-bit primes with Montgomery
//! multiplication, and Garner reconstruction of signed integers.

/// `(p, g)`: primes `p = c * 2^27 + 1 < 2^62` with primitive root `g`.
pub const NTT_PRIMES: [(u64, u64); 9] = [
    (4611686009971671041, 6),
    (4611686007555751937, 3),
    (4611686004066091009, 13),
    (4611686003260784641, 11),
    (4611685996013027329, 7),
    (4611685993060237313, 3),
    (4611685989973229569, 7),
    (4611685984336084993, 15),
    (4611685982725472257, 5),
];

pub const MAX_LOG_LEN: u32 = 27;

const BLOCK: usize = 1 << 14;

#[derive(Debug, Clone, Copy)]
pub struct Montgomery {
    pub p: u64,
    neg_inv: u64,
    r2: u64,
}

impl Montgomery {
    pub fn new(p: u64) -> Self {
        assert!(p % 2 == 1 && p < 1 << 62);
        let mut inv = 1u64;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
        }
        let r = ((1u128 << 64) % p as u128) as u64;
        let r2 = ((r as u128 * r as u128) % p as u128) as u64;
        Montgomery {
            p,
            neg_inv: inv.wrapping_neg(),
            r2,
        }
    }

    #[inline(always)]
    fn reduce(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.neg_inv);
        let u = ((t + m as u128 * self.p as u128) >> 64) as u64;
        if u >= self.p {
            u - self.p
        } else {
            u
        }
    }

    #[inline(always)]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.reduce(a as u128 * b as u128)
    }

    #[inline(always)]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline(always)]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    pub fn to_mont(&self, a: u64) -> u64 {
        self.mul(a % self.p, self.r2)
    }

    pub fn from_mont(&self, a: u64) -> u64 {
        self.reduce(a as u128)
    }

    pub fn from_i64(&self, a: i64) -> u64 {
        let r = a.rem_euclid(self.p as i64) as u64;
        self.to_mont(r)
    }

    pub fn one(&self) -> u64 {
        self.to_mont(1)
    }

    pub fn pow(&self, mut b: u64, mut e: u64) -> u64 {
        let mut r = self.one();
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        r
    }

    pub fn inv(&self, a: u64) -> u64 {
        self.pow(a, self.p - 2)
    }
}

/// Cyclic transforms of power-of-two length for one prime.
pub struct Ntt {
    pub m: Montgomery,
    g: u64,
}

impl Ntt {
    pub fn new(p: u64, g: u64) -> Self {
        let m = Montgomery::new(p);
        let g = m.to_mont(g);
        Ntt { m, g }
    }

    /// `rt[h + k] = w_{2h}^k` for every power of two `h < n`.
    fn roots(&self, n: usize, inverse: bool) -> Vec<u64> {
        let m = &self.m;
        let mut rt = vec![0u64; n.max(2)];
        let mut h = 1;
        while h < n {
            let mut w = m.pow(self.g, (m.p - 1) / (2 * h) as u64);
            if inverse {
                w = m.inv(w);
            }
            let mut x = m.one();
            for k in 0..h {
                rt[h + k] = x;
                x = m.mul(x, w);
            }
            h <<= 1;
        }
        rt
    }

    /// Decimation-in-frequency transform: natural order in, bit-reversed
    /// order out. Data in Montgomery form, length a power of two.
    pub fn forward(&self, a: &mut [u64]) {
        let n = a.len();
        assert!(n.is_power_of_two() && n.trailing_zeros() <= MAX_LOG_LEN);
        let rt = self.roots(n, false);
        let mut h = n / 2;
        while h >= 1 && 2 * h > BLOCK {
            self.dif_level(a, &rt, h);
            h /= 2;
        }
        // remaining levels stay inside cache-sized blocks
        for block in a.chunks_exact_mut((2 * h).max(1)) {
            let mut hb = h;
            while hb >= 1 {
                self.dif_level(block, &rt, hb);
                hb /= 2;
            }
        }
    }

    #[inline]
    fn dif_level(&self, a: &mut [u64], rt: &[u64], h: usize) {
        let m = self.m;
        let w = &rt[h..2 * h];
        for chunk in a.chunks_exact_mut(2 * h) {
            let (lo, hi) = chunk.split_at_mut(h);
            for ((x, y), &wk) in lo.iter_mut().zip(hi.iter_mut()).zip(w) {
                let u = *x;
                let v = *y;
                *x = m.add(u, v);
                *y = m.mul(m.sub(u, v), wk);
            }
        }
    }

    #[inline]
    fn dit_level(&self, a: &mut [u64], rt: &[u64], h: usize) {
        let m = self.m;
        let w = &rt[h..2 * h];
        for chunk in a.chunks_exact_mut(2 * h) {
            let (lo, hi) = chunk.split_at_mut(h);
            for ((x, y), &wk) in lo.iter_mut().zip(hi.iter_mut()).zip(w) {
                let u = *x;
                let v = m.mul(*y, wk);
                *x = m.add(u, v);
                *y = m.sub(u, v);
            }
        }
    }

    /// Inverse of [`Ntt::forward`]: bit-reversed order in, natural order
    /// out, including the `1/n` scaling.
    pub fn inverse(&self, a: &mut [u64]) {
        let n = a.len();
        assert!(n.is_power_of_two() && n.trailing_zeros() <= MAX_LOG_LEN);
        let m = self.m;
        let rt = self.roots(n, true);
        let b = n.min(BLOCK);
        for block in a.chunks_exact_mut(b) {
            let mut h = 1;
            while h < b {
                self.dit_level(block, &rt, h);
                h <<= 1;
            }
        }
        let mut h = b;
        while h < n {
            self.dit_level(a, &rt, h);
            h <<= 1;
        }
        let n_inv = m.inv(m.to_mont(n as u64));
        for x in a.iter_mut() {
            *x = m.mul(*x, n_inv);
        }
    }

    /// Product of two Montgomery-form series truncated to `keep` terms.
    pub fn multiply(&self, a: &[u64], b: &[u64], keep: usize) -> Vec<u64> {
        let la = a.len().min(keep);
        let lb = b.len().min(keep);
        let size = (la + lb).max(2).next_power_of_two();
        let mut fa = vec![0u64; size];
        fa[..la].copy_from_slice(&a[..la]);
        self.forward(&mut fa);
        let mut fb = vec![0u64; size];
        fb[..lb].copy_from_slice(&b[..lb]);
        self.forward(&mut fb);
        for (x, y) in fa.iter_mut().zip(&fb) {
            *x = self.m.mul(*x, *y);
        }
        drop(fb);
        self.inverse(&mut fa);
        fa.truncate(keep);
        fa.resize(keep, 0);
        fa
    }

    pub fn square(&self, a: &[u64], keep: usize) -> Vec<u64> {
        let la = a.len().min(keep);
        let size = (2 * la).max(2).next_power_of_two();
        let mut fa = vec![0u64; size];
        fa[..la].copy_from_slice(&a[..la]);
        self.forward(&mut fa);
        for x in fa.iter_mut() {
            *x = self.m.mul(*x, *x);
        }
        self.inverse(&mut fa);
        fa.truncate(keep);
        fa.resize(keep, 0);
        fa
    }
}

/// Reconstructs signed integers from residues by Garner's algorithm.
pub struct Garner {
    primes: Vec<u64>,
    /// `inv[i][j] = p_j^{-1} mod p_i` for `j < i`.
    inv: Vec<Vec<u64>>,
    /// Mixed-radix digits of `floor(M / 2)`, least significant first.
    half_digits: Vec<u64>,
}

/// A reconstructed integer as sign plus mixed-radix digits of `|x|`.
pub struct MixedRadix<'a> {
    pub negative: bool,
    pub digits: Vec<u64>,
    pub basis: &'a Garner,
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

impl Garner {
    pub fn new(primes: &[u64]) -> Self {
        let k = primes.len();
        let mut inv = vec![Vec::new(); k];
        for i in 0..k {
            for j in 0..i {
                inv[i].push(pow_mod(primes[j] % primes[i], primes[i] - 2, primes[i]));
            }
        }
        // digits of floor(M/2): M/2 = sum (p_i - 1)/2 * M_i in mixed radix
        // when every p_i is odd, since sum (p_i - 1) M_i = M - 1.
        let half_digits = primes.iter().map(|&p| (p - 1) / 2).collect();
        Garner {
            primes: primes.to_vec(),
            inv,
            half_digits,
        }
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Mixed-radix digits `v` with `x = v_0 + v_1 p_0 + v_2 p_0 p_1 + ...`.
    pub fn digits(&self, residues: &[u64]) -> Vec<u64> {
        let k = self.primes.len();
        let mut v = vec![0u64; k];
        for i in 0..k {
            let p = self.primes[i];
            let mut x = residues[i] % p;
            for j in 0..i {
                // x = (x - v_j) * p_j^{-1}
                let vj = v[j] % p;
                x = if x >= vj { x - vj } else { x + p - vj };
                x = mul_mod(x, self.inv[i][j], p);
            }
            v[i] = x;
        }
        v
    }

    /// Interprets the residues as the unique integer in `(-M/2, M/2]`.
    pub fn signed(&self, residues: &[u64]) -> MixedRadix<'_> {
        let v = self.digits(residues);
        let mut greater = false;
        for i in (0..v.len()).rev() {
            if v[i] != self.half_digits[i] {
                greater = v[i] > self.half_digits[i];
                break;
            }
        }
        if !greater {
            return MixedRadix {
                negative: false,
                digits: v,
                basis: self,
            };
        }
        // |x| = M - y: digits of M - 1 - y are p_i - 1 - v_i, then add one.
        let mut w: Vec<u64> = v
            .iter()
            .zip(&self.primes)
            .map(|(&vi, &p)| p - 1 - vi)
            .collect();
        for (wi, &p) in w.iter_mut().zip(&self.primes) {
            *wi += 1;
            if *wi < p {
                break;
            }
            *wi = 0;
        }
        MixedRadix {
            negative: true,
            digits: w,
            basis: self,
        }
    }
}

impl MixedRadix<'_> {
    pub fn to_f64(&self) -> f64 {
        let mut acc = 0.0f64;
        for i in (0..self.digits.len()).rev() {
            acc = acc * self.basis.primes[i] as f64 + self.digits[i] as f64;
        }
        if self.negative {
            -acc
        } else {
            acc
        }
    }

    /// Value reduced into `[0, q)`.
    pub fn rem(&self, q: u64) -> u64 {
        let mut acc = 0u64;
        for i in (0..self.digits.len()).rev() {
            acc = mul_mod(acc, self.basis.primes[i] % q, q);
            acc = (acc + self.digits[i] % q) % q;
        }
        if self.negative && acc != 0 {
            q - acc
        } else {
            acc
        }
    }

    pub fn to_bigint(&self) -> num_bigint::BigInt {
        use num_bigint::BigInt;
        let mut acc = BigInt::from(0);
        for i in (0..self.digits.len()).rev() {
            acc = acc * BigInt::from(self.basis.primes[i]) + BigInt::from(self.digits[i]);
        }
        if self.negative {
            -acc
        } else {
            acc
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{factorize, is_prime};
    use num_bigint::BigInt;

    #[test]
    fn primes_and_generators() {
        for &(p, g) in &NTT_PRIMES {
            assert!(is_prime(p));
            assert!(p < 1 << 62);
            assert_eq!((p - 1) % (1 << MAX_LOG_LEN), 0);
            for &(q, _) in factorize(p - 1).unwrap().factors() {
                assert_ne!(pow_mod(g, (p - 1) / q, p), 1, "g={g} not primitive mod {p}");
            }
        }
    }

    #[test]
    fn montgomery_roundtrip() {
        let m = Montgomery::new(NTT_PRIMES[0].0);
        for a in [0u64, 1, 2, 12345, m.p - 1] {
            assert_eq!(m.from_mont(m.to_mont(a)), a);
        }
        let a = m.to_mont(123456789123);
        let b = m.to_mont(987654321987);
        assert_eq!(
            m.from_mont(m.mul(a, b)),
            mul_mod(123456789123, 987654321987, m.p)
        );
        assert_eq!(m.from_mont(m.from_i64(-1)), m.p - 1);
    }

    #[test]
    fn convolution_matches_schoolbook() {
        let (p, g) = NTT_PRIMES[2];
        let ntt = Ntt::new(p, g);
        let a: Vec<i64> = (0..37).map(|i| (i * 7919 % 101) - 50).collect();
        let b: Vec<i64> = (0..23).map(|i| (i * 104729 % 97) - 48).collect();
        let am: Vec<u64> = a.iter().map(|&x| ntt.m.from_i64(x)).collect();
        let bm: Vec<u64> = b.iter().map(|&x| ntt.m.from_i64(x)).collect();
        let c = ntt.multiply(&am, &bm, 50);
        for k in 0..50 {
            let mut s = 0i64;
            for i in 0..a.len() {
                if k >= i && k - i < b.len() {
                    s += a[i] * b[k - i];
                }
            }
            assert_eq!(ntt.m.from_mont(c[k]), s.rem_euclid(p as i64) as u64);
        }
    }

    #[test]
    fn garner_signed_reconstruction() {
        let primes: Vec<u64> = NTT_PRIMES[..3].iter().map(|&(p, _)| p).collect();
        let g = Garner::new(&primes);
        let big = BigInt::from(10).pow(50);
        for x in [
            BigInt::from(0),
            BigInt::from(-1),
            BigInt::from(7),
            big.clone(),
            -big.clone() - 12345,
        ] {
            let res: Vec<u64> = primes
                .iter()
                .map(|&p| {
                    let r = &x % BigInt::from(p);
                    let r = if r < BigInt::from(0) { r + BigInt::from(p) } else { r };
                    u64::try_from(r).unwrap()
                })
                .collect();
            let mr = g.signed(&res);
            assert_eq!(mr.to_bigint(), x);
            let q = 4611686018427387847u64;
            let want = {
                let r = &x % BigInt::from(q);
                let r = if r < BigInt::from(0) { r + BigInt::from(q) } else { r };
                u64::try_from(r).unwrap()
            };
            assert_eq!(mr.rem(q), want);
        }
    }
}
