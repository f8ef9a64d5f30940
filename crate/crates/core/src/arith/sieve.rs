use super::isqrt;

/// Primes `<= n` by the sieve of Eratosthenes (odd-only bitmap).
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let half = (n - 1) / 2; // index i represents 2i+1
    let mut composite = vec![false; half + 1];
    let mut i = 1;
    while (2 * i + 1) * (2 * i + 1) <= n {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut j = (p * p - 1) / 2;
            while j <= half {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    let mut primes = vec![2u64];
    primes.extend(
        (1..=half)
            .filter(|&i| !composite[i] && 2 * i + 1 <= n)
            .map(|i| (2 * i + 1) as u64),
    );
    primes
}

/// Smallest-prime-factor table for fast factorization of every `n <= limit`.
#[derive(Debug, Clone)]
pub struct SmallestPrimeFactor {
    spf: Vec<u32>,
}

impl SmallestPrimeFactor {
    pub fn new(limit: usize) -> Self {
        let mut spf = vec![0u32; limit + 1];
        for i in 2..=limit {
            if spf[i] == 0 {
                let mut j = i;
                while j <= limit {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        SmallestPrimeFactor { spf }
    }

    pub fn limit(&self) -> usize {
        self.spf.len() - 1
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && self.spf[n as usize] as u64 == n
    }

    pub fn factorize(&self, mut n: u64) -> Vec<(u64, u32)> {
        let mut out: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            n /= p;
            match out.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    pub fn mobius(&self, n: u64) -> i8 {
        let f = self.factorize(n);
        if f.iter().any(|&(_, e)| e > 1) {
            0
        } else if f.len() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn divisor_count(&self, n: u64) -> u64 {
        self.factorize(n).iter().map(|&(_, e)| e as u64 + 1).product()
    }
}

/// `tau(n)` for `0 <= n <= limit` (entry 0 is 0).
pub fn divisor_count_table(limit: usize) -> Vec<u32> {
    let mut tau = vec![0u32; limit + 1];
    for d in 1..=limit {
        let mut m = d;
        while m <= limit {
            tau[m] += 1;
            m += d;
        }
    }
    tau
}

/// Increasing enumeration of square-free integers in `[lower, upper]`,
/// optionally restricted to odd values. Works segment by segment.
#[derive(Debug, Clone)]
pub struct SquarefreeStream {
    next: u64,
    upper: u64,
    odd_only: bool,
    square_primes: Vec<u64>,
    segment: Vec<bool>,
    segment_start: u64,
    pos: usize,
}

const SEGMENT: u64 = 1 << 15;

impl SquarefreeStream {
    pub fn new(lower: u64, upper: u64, odd_only: bool) -> Self {
        let lower = lower.max(1);
        let square_primes = primes_up_to(isqrt(upper.max(1)))
            .into_iter()
            .filter(|&p| !(odd_only && p == 2))
            .collect();
        let mut s = SquarefreeStream {
            next: lower,
            upper,
            odd_only,
            square_primes,
            segment: Vec::new(),
            segment_start: lower,
            pos: 0,
        };
        s.fill();
        s
    }

    fn fill(&mut self) {
        self.segment_start = self.next;
        if self.next > self.upper {
            self.segment.clear();
            self.pos = 0;
            return;
        }
        let end = (self.next + SEGMENT - 1).min(self.upper);
        let len = (end - self.next + 1) as usize;
        self.segment.clear();
        self.segment.resize(len, true);
        for &p in &self.square_primes {
            let q = p * p;
            if q > end {
                break;
            }
            let mut m = self.next.div_ceil(q) * q;
            while m <= end {
                self.segment[(m - self.next) as usize] = false;
                m += q;
            }
        }
        self.pos = 0;
        self.next = end + 1;
    }
}

impl Iterator for SquarefreeStream {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        loop {
            if self.pos >= self.segment.len() {
                if self.next > self.upper {
                    return None;
                }
                self.fill();
                continue;
            }
            let i = self.pos;
            self.pos += 1;
            let d = self.segment_start + i as u64;
            if self.segment[i] && !(self.odd_only && d % 2 == 0) {
                return Some(d);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::factorize;

    #[test]
    fn prime_counts() {
        assert_eq!(primes_up_to(1), Vec::<u64>::new());
        assert_eq!(primes_up_to(2), vec![2]);
        assert_eq!(primes_up_to(30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert_eq!(primes_up_to(1_000_000).len(), 78498);
    }

    #[test]
    fn stream_matches_factorization() {
        for (lo, hi, odd) in [(1, 2000, false), (1, 2000, true), (70_000, 140_000, true)] {
            let got: Vec<u64> = SquarefreeStream::new(lo, hi, odd).collect();
            let want: Vec<u64> = (lo..=hi)
                .filter(|&d| !(odd && d % 2 == 0))
                .filter(|&d| factorize(d).unwrap().is_squarefree())
                .collect();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn empty_range() {
        assert_eq!(SquarefreeStream::new(10, 5, true).count(), 0);
    }

    #[test]
    fn tau_table() {
        let t = divisor_count_table(100);
        let spf = SmallestPrimeFactor::new(100);
        for n in 1..=100u64 {
            assert_eq!(t[n as usize] as u64, spf.divisor_count(n));
        }
    }
}
