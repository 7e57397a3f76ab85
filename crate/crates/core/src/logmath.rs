//! Log2-domain combinatorics shared by the cost models.

/// Table of `log2(i!)` for `i <= max`, built by cumulative summation.
#[derive(Debug, Clone)]
pub struct LogFactorials {
    table: Vec<f64>,
}

impl LogFactorials {
    pub fn new(max: usize) -> Self {
        let mut table = Vec::with_capacity(max + 1);
        let mut acc = 0.0;
        table.push(0.0);
        for i in 1..=max {
            acc += (i as f64).log2();
            table.push(acc);
        }
        Self { table }
    }

    pub fn max(&self) -> usize {
        self.table.len() - 1
    }

    /// `log2(n!)`
    #[inline]
    pub fn fact(&self, n: usize) -> f64 {
        self.table[n]
    }

    /// `log2(n! / (n - k)!)`, the size of the set of length-`k` sequences
    /// of distinct entries drawn from `n` values.
    #[inline]
    pub fn falling(&self, n: usize, k: usize) -> f64 {
        debug_assert!(k <= n);
        self.table[n] - self.table[n - k]
    }

    /// `log2 C(n, k)`, or `-inf` when `k > n`.
    #[inline]
    pub fn binomial(&self, n: usize, k: usize) -> f64 {
        if k > n {
            return f64::NEG_INFINITY;
        }
        self.table[n] - self.table[k] - self.table[n - k]
    }
}

/// `log2(2^a + 2^b + ...)` without leaving the log domain.
pub fn log2_sum(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp2()).sum::<f64>().log2()
}

/// `log2(q^a - 1)` for `a >= 1`, accurate for large `q^a`.
pub fn log2_pow_minus_one(q: f64, a: u32) -> f64 {
    let la = a as f64 * q.log2();
    // q^a - 1 = q^a (1 - q^-a)
    la + (-(-la).exp2()).ln_1p() / std::f64::consts::LN_2
}

/// `log2(q^a - q^b)` for `a > b`.
pub fn log2_pow_diff(q: f64, a: u32, b: u32) -> f64 {
    debug_assert!(a > b);
    b as f64 * q.log2() + log2_pow_minus_one(q, a - b)
}
