//! Closed-form running times of both solvers and exhaustive parameter
//! search over them. Everything is in log2 and stays there.

use crate::baseline::BaselineParams;
use crate::error::{PkpError, Result};
use crate::filtered::FilteredParams;
use crate::isd::{count_bounds_with, isd_cost_with};
use crate::logmath::{log2_sum, LogFactorials};
use rayon::prelude::*;
use std::fmt;

pub const CSV_HEADER: &str = "n,m,q,solver,d,w,w1,w2,l,l1,l2,log2_t_isd,log2_t_k,log2_t_l,log2_t_final,log2_total";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Baseline,
    Filtered,
}

impl SolverKind {
    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::Baseline => "baseline",
            SolverKind::Filtered => "filtered",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineCost {
    pub params: BaselineParams,
    pub total: f64,
}

/// Per-term costs of the filtered solver, each in log2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBreakdown {
    pub params: FilteredParams,
    pub t_isd: f64,
    pub t_k: f64,
    pub t_l: f64,
    pub t_final: f64,
    /// log2 of the sum of the four terms
    pub total: f64,
}

fn check_shape(n: usize, m: usize, q: u64) -> Result<()> {
    if m == 0 || m + 1 >= n {
        return Err(PkpError::InvalidParams(format!(
            "need 1 <= m and m + 1 < n, got n={n} m={m}"
        )));
    }
    if q < 2 {
        return Err(PkpError::InvalidParams(format!("q = {q} too small")));
    }
    Ok(())
}

fn baseline_with(lf: &LogFactorials, n: usize, r: usize, q: f64, l1: usize, l2: usize) -> f64 {
    let (a, b) = (lf.falling(n, l1), lf.falling(n, l2));
    let exp = (n - r) as f64 - (l1 + l2) as f64;
    log2_sum(&[a, b, a + b + exp * q.log2()])
}

/// `log2(n!/(n-l1)! + n!/(n-l2)! + n!^2 q^(n-r-l1-l2) / ((n-l1)! (n-l2)!))`
pub fn cost_baseline(n: usize, m: usize, q: u64, l1: usize, l2: usize) -> Result<f64> {
    check_shape(n, m, q)?;
    BaselineParams::new(n, m, l1, l2)?;
    Ok(baseline_with(&LogFactorials::new(n), n, m + 1, q as f64, l1, l2))
}

/// The filtered solver's terms given a precomputed ISD term.
fn filtered_terms(lf: &LogFactorials, n: usize, r: usize, q: f64, p: &FilteredParams, t_isd: f64) -> CostBreakdown {
    let lq = q.log2();
    let FilteredParams { d, w, w1, w2, l } = *p;
    let (k1, k2) = (lf.falling(n, w1), lf.falling(n, w2));
    let t_k = log2_sum(&[k1, k2, k1 + k2 - d as f64 * lq]);
    let k = lf.falling(n, w) - d as f64 * lq;
    let l1 = lf.falling(n, n - r + l - w);
    let t_l = log2_sum(&[l1, k, l1 + k - (l - d) as f64 * lq]);
    let t_final = lf.falling(n, n - r + l) - l as f64 * lq;
    CostBreakdown {
        params: *p,
        t_isd,
        t_k,
        t_l,
        t_final,
        total: log2_sum(&[t_isd, t_k, t_l, t_final]),
    }
}

/// Cost of the filtered solver. Rejects parameter sets for which the
/// dual code is not expected to contain a suitable subcode.
pub fn cost_filtered(n: usize, m: usize, q: u64, params: &FilteredParams) -> Result<CostBreakdown> {
    check_shape(n, m, q)?;
    let r = m + 1;
    params.check(n, r)?;
    let lf = LogFactorials::new(n);
    let FilteredParams { d, w, .. } = *params;
    let bounds = count_bounds_with(&lf, n, r, w, d, q);
    if !bounds.expects_one() {
        return Err(PkpError::InvalidParams(format!(
            "expected subcode count 2^{:.4} <= 1 for d={d}, w={w}",
            bounds.lower
        )));
    }
    let t_isd = isd_cost_with(&lf, n, r, w, d, q);
    Ok(filtered_terms(&lf, n, r, q as f64, params, t_isd))
}

/// Exhaustive minimum of the baseline cost over `(l, l1)`; ties keep the
/// smallest `(l, l1)`.
pub fn optimize_baseline(n: usize, m: usize, q: u64) -> Option<BaselineCost> {
    check_shape(n, m, q).ok()?;
    let r = m + 1;
    let lf = LogFactorials::new(n);
    let mut best: Option<BaselineCost> = None;
    for l in 1..=r {
        let width = n - r + l;
        for l1 in 1..width {
            let l2 = width - l1;
            let total = baseline_with(&lf, n, r, q as f64, l1, l2);
            if best.is_none_or(|b| total < b.total) {
                best = Some(BaselineCost {
                    params: BaselineParams { l, l1, l2 },
                    total,
                });
            }
        }
    }
    best
}

/// Exhaustive minimum of the filtered cost over `d <= d_max` (default
/// `r`), `w`, `l` and `w1`, restricted to parameter sets with an expected
/// subcode count above one. Ties keep the smallest `(d, w, l, w1)`.
pub fn optimize_filtered(n: usize, m: usize, q: u64, d_max: Option<usize>) -> Option<CostBreakdown> {
    check_shape(n, m, q).ok()?;
    let r = m + 1;
    let lf = LogFactorials::new(n);
    let qf = q as f64;
    let d_max = d_max.unwrap_or(r).min(r);
    let mut best: Option<CostBreakdown> = None;
    for d in 1..=d_max {
        for w in d.max(2)..=(n + d - r) {
            if !count_bounds_with(&lf, n, r, w, d, q).expects_one() {
                continue;
            }
            let t_isd = isd_cost_with(&lf, n, r, w, d, q);
            for l in d..=r {
                if w > n - r + l {
                    continue;
                }
                for w1 in 1..w {
                    let p = FilteredParams {
                        d,
                        w,
                        w1,
                        w2: w - w1,
                        l,
                    };
                    let cost = filtered_terms(&lf, n, r, qf, &p, t_isd);
                    if best.is_none_or(|b| cost.total < b.total) {
                        best = Some(cost);
                    }
                }
            }
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Estimate {
    Baseline(BaselineCost),
    Filtered(CostBreakdown),
}

impl Estimate {
    pub fn total(&self) -> f64 {
        match self {
            Estimate::Baseline(b) => b.total,
            Estimate::Filtered(f) => f.total,
        }
    }
}

/// Best parameters for one solver at one `(n, m, q)`; `best` is `None`
/// when no parameter set is feasible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub n: usize,
    pub m: usize,
    pub q: u64,
    pub solver: SolverKind,
    pub best: Option<Estimate>,
}

impl SweepPoint {
    pub fn csv_row(&self) -> String {
        let e = String::new;
        let f4 = |x: f64| format!("{x:.4}");
        let mut cols: Vec<String> = vec![
            self.n.to_string(),
            self.m.to_string(),
            self.q.to_string(),
            self.solver.to_string(),
        ];
        match self.best {
            None => cols.extend(std::iter::repeat_with(e).take(12)),
            Some(Estimate::Baseline(b)) => {
                cols.extend(std::iter::repeat_with(e).take(4));
                cols.extend([b.params.l, b.params.l1, b.params.l2].map(|x| x.to_string()));
                cols.extend(std::iter::repeat_with(e).take(4));
                cols.push(f4(b.total));
            }
            Some(Estimate::Filtered(c)) => {
                let p = c.params;
                cols.extend([p.d, p.w, p.w1, p.w2, p.l].map(|x| x.to_string()));
                cols.extend([e(), e()]);
                cols.extend([c.t_isd, c.t_k, c.t_l, c.t_final, c.total].map(f4));
            }
        }
        cols.join(",")
    }
}

pub fn optimize(n: usize, m: usize, q: u64, solver: SolverKind, d_max: Option<usize>) -> SweepPoint {
    let best = match solver {
        SolverKind::Baseline => optimize_baseline(n, m, q).map(Estimate::Baseline),
        SolverKind::Filtered => optimize_filtered(n, m, q, d_max).map(Estimate::Filtered),
    };
    SweepPoint { n, m, q, solver, best }
}

/// Optimizes every `(m, solver)` pair at fixed `n` and `q`. Rows come back
/// ordered by `m`, then by the order of `solvers`, however many workers run.
pub fn sweep(n: usize, q: u64, ms: &[usize], solvers: &[SolverKind], d_max: Option<usize>) -> Vec<SweepPoint> {
    let jobs: Vec<(usize, SolverKind)> = ms.iter().flat_map(|&m| solvers.iter().map(move |&s| (m, s))).collect();
    jobs.par_iter().map(|&(m, s)| optimize(n, m, q, s, d_max)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use num_traits::{One, ToPrimitive};

    fn big_log2(x: &BigUint) -> f64 {
        let bits = x.bits();
        if bits <= 1000 {
            return x.to_f64().unwrap().log2();
        }
        let shift = bits - 64;
        (x >> shift).to_f64().unwrap().log2() + shift as f64
    }

    fn falling(n: u64, k: u64) -> BigUint {
        ((n - k + 1)..=n).fold(BigUint::one(), |acc, i| acc * i)
    }

    /// log2 of `sum num_i / q^e_i` evaluated exactly over a common
    /// denominator `q^max_e`.
    fn exact_log2(terms: &[(BigUint, u32)], q: u64) -> f64 {
        let emax = terms.iter().map(|t| t.1).max().unwrap();
        let q = BigUint::from(q);
        let num: BigUint = terms.iter().map(|(a, e)| a * q.pow(emax - e)).sum();
        big_log2(&num) - emax as f64 * big_log2(&q)
    }

    #[test]
    fn baseline_small_example() {
        let v = cost_baseline(6, 2, 7, 2, 2).unwrap();
        let linear: f64 = 30.0 + 30.0 + 720.0 * 720.0 / 7.0 / (24.0 * 24.0);
        assert!((v - linear.log2()).abs() < 1e-12);
        assert!((v - 7.55897).abs() < 1e-5);
    }

    #[test]
    fn baseline_matches_bigint_oracle() {
        for (n, m, q, l1, l2) in [
            (20u64, 8u64, 251u64, 7u64, 6u64),
            (30, 12, 31, 9, 10),
            (25, 10, 7, 10, 6),
        ] {
            let r = m + 1;
            let e = l1 + l2 - (n - r);
            let terms = [
                (falling(n, l1), 0),
                (falling(n, l2), 0),
                (falling(n, l1) * falling(n, l2), e as u32),
            ];
            let exact = exact_log2(&terms, q);
            let got = cost_baseline(n as usize, m as usize, q, l1 as usize, l2 as usize).unwrap();
            assert!(((got - exact) / exact).abs() < 1e-9, "{got} vs {exact}");
        }
    }

    #[test]
    fn filtered_matches_bigint_oracle() {
        // (n, m, q, d, w1, w2, l)
        for (n, m, q, d, w1, w2, l) in [
            (24u64, 10u64, 251u64, 1u64, 4u64, 10u64, 5u64),
            (30, 12, 31, 2, 6, 12, 6),
        ] {
            let r = m + 1;
            let w = w1 + w2;
            let p =
                FilteredParams::new(n as usize, m as usize, d as usize, w1 as usize, w2 as usize, l as usize).unwrap();
            let got = cost_filtered(n as usize, m as usize, q, &p).unwrap();
            let tk = exact_log2(
                &[
                    (falling(n, w1), 0),
                    (falling(n, w2), 0),
                    (falling(n, w1) * falling(n, w2), d as u32),
                ],
                q,
            );
            let a = n - r + l - w;
            let tl = exact_log2(
                &[
                    (falling(n, a), 0),
                    (falling(n, w), d as u32),
                    (falling(n, a) * falling(n, w), l as u32),
                ],
                q,
            );
            let tf = exact_log2(&[(falling(n, n - r + l), l as u32)], q);
            for (g, x) in [(got.t_k, tk), (got.t_l, tl), (got.t_final, tf)] {
                assert!(((g - x) / x).abs() < 1e-6, "{g} vs {x}");
            }
        }
    }

    #[test]
    fn table_one_points() {
        let p = FilteredParams::new(69, 41, 1, 2, 20, 16).unwrap();
        let c = cost_filtered(69, 41, 251, &p).unwrap();
        assert!((c.total - 125.465).abs() < 0.01, "{c:?}");
        assert!(c.t_isd < c.total - 20.0);
        let p = FilteredParams::new(94, 54, 1, 2, 29, 22).unwrap();
        let c = cost_filtered(94, 54, 509, &p).unwrap();
        assert!((c.total - 189.769).abs() < 0.01, "{c:?}");
        assert!(c.t_isd < c.total - 20.0);
    }

    #[test]
    fn breakdown_total_bounds() {
        let p = FilteredParams::new(50, 27, 1, 2, 16, 12).unwrap();
        let c = cost_filtered(50, 27, 251, &p).unwrap();
        let max = [c.t_isd, c.t_k, c.t_l, c.t_final].into_iter().fold(f64::MIN, f64::max);
        assert!(c.total >= max && c.total <= max + 2.0);
    }

    #[test]
    fn split_symmetry() {
        let a = cost_filtered(50, 27, 251, &FilteredParams::new(50, 27, 1, 5, 13, 12).unwrap()).unwrap();
        let b = cost_filtered(50, 27, 251, &FilteredParams::new(50, 27, 1, 13, 5, 12).unwrap()).unwrap();
        assert_eq!(a.t_k, b.t_k);
    }

    #[test]
    fn rejections() {
        assert!(FilteredParams::new(50, 27, 0, 2, 16, 12).is_err());
        // too small a support for any subcode to be expected
        let p = FilteredParams::new(50, 27, 1, 1, 2, 12).unwrap();
        assert!(matches!(
            cost_filtered(50, 27, 251, &p),
            Err(PkpError::InvalidParams(_))
        ));
        assert!(cost_baseline(12, 4, 251, 3, 4).is_err());
    }

    #[test]
    fn optimizer_ratio_sweep_points() {
        let b = optimize_baseline(50, 27, 251).unwrap();
        assert!((b.total - 92.0295).abs() < 1e-3, "{b:?}");
        let f = optimize_filtered(50, 27, 251, None).unwrap();
        assert!((f.total - 90.5893).abs() < 1e-3, "{f:?}");
        let b = optimize_baseline(75, 60, 251).unwrap();
        assert!((b.total - 71.2550).abs() < 1e-3, "{b:?}");
    }

    #[test]
    fn optimizer_finds_dss128_point() {
        let f = optimize_filtered(69, 41, 251, None).unwrap();
        assert!(f.total <= 125.47 + 0.01);
    }

    #[test]
    fn near_square_instances_degrade_gracefully() {
        let p = optimize(30, 29, 251, SolverKind::Filtered, None);
        assert!(p.best.is_none());
        assert_eq!(p.csv_row(), "30,29,251,filtered,,,,,,,,,,,,");
        let p = optimize(30, 28, 251, SolverKind::Baseline, None);
        assert!(p.best.is_some());
    }

    #[test]
    fn csv_rows_round_trip() {
        assert_eq!(CSV_HEADER.split(',').count(), 16);
        for solver in [SolverKind::Baseline, SolverKind::Filtered] {
            let pt = optimize(40, 20, 251, solver, None);
            let row = pt.csv_row();
            let cols: Vec<&str> = row.split(',').collect();
            assert_eq!(cols.len(), 16);
            let total: f64 = cols[15].parse().unwrap();
            let again = match solver {
                SolverKind::Baseline => {
                    let (l1, l2) = (cols[9].parse().unwrap(), cols[10].parse().unwrap());
                    cost_baseline(40, 20, 251, l1, l2).unwrap()
                }
                SolverKind::Filtered => {
                    let v: Vec<usize> = cols[4..9].iter().map(|s| s.parse().unwrap()).collect();
                    let p = FilteredParams::new(40, 20, v[0], v[2], v[3], v[4]).unwrap();
                    cost_filtered(40, 20, 251, &p).unwrap().total
                }
            };
            assert_eq!(format!("{again:.4}"), format!("{total:.4}"));
        }
    }

    #[test]
    fn sweep_order_and_determinism() {
        let ms = [26, 30, 34];
        let kinds = [SolverKind::Baseline, SolverKind::Filtered];
        let a = sweep(50, 251, &ms, &kinds, None);
        let b = sweep(50, 251, &ms, &kinds, None);
        assert_eq!(a, b);
        let order: Vec<(usize, SolverKind)> = a.iter().map(|p| (p.m, p.solver)).collect();
        assert_eq!(order[0], (26, SolverKind::Baseline));
        assert_eq!(order[1], (26, SolverKind::Filtered));
        assert_eq!(order[5], (34, SolverKind::Filtered));
    }
}
