//! Bound-comparison sweeps.

use std::ops::RangeInclusive;

use anyhow::{bail, Context};
use xorcache::rational::{self, int, Rational};
use xorcache::{achievable_rate, combined_envelope, cutset_bound, mn_segment_rate};

/// Fixed CSV column order.
pub const HEADER: &str = "N,K,M,R_ours,R_mn,R_cutset,tight,R_envelope";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Grid {
    /// The same absolute cache sizes for every instance.
    Absolute(Vec<Rational>),
    /// `M = j / (steps·K)` for `j = 0..=steps·N`, covering `[0, N/K]`.
    PerUser(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sweep {
    pub n_range: RangeInclusive<usize>,
    pub k_range: RangeInclusive<usize>,
    pub grid: Grid,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub n: usize,
    pub k: usize,
    pub m: Rational,
    /// `N(1 - M)`, only defined for `M <= 1/K`.
    pub ours: Option<Rational>,
    pub mn: Rational,
    pub cutset: Rational,
    pub envelope: Rational,
}

impl Row {
    /// `R_ours` exists and meets the cut-set bound.
    pub fn tight(&self) -> bool {
        self.ours == Some(self.cutset)
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.n,
            self.k,
            self.m,
            self.ours.map(|r| r.to_string()).unwrap_or_default(),
            self.mn,
            self.cutset,
            if self.tight() { "yes" } else { "no" },
            self.envelope
        )
    }
}

/// Parses `"3"`, `"1..5"` or `"1..=5"`; both forms of range are inclusive.
pub fn parse_range(text: &str) -> anyhow::Result<RangeInclusive<usize>> {
    let text = text.trim();
    let (lo, hi) = match text.split_once("..") {
        Some((lo, hi)) => (lo, hi.trim_start_matches('=')),
        None => (text, text),
    };
    let lo: usize = lo
        .trim()
        .parse()
        .with_context(|| format!("bad range {text:?}"))?;
    let hi: usize = hi
        .trim()
        .parse()
        .with_context(|| format!("bad range {text:?}"))?;
    if lo == 0 || lo > hi {
        bail!("range {text:?} must satisfy 1 <= lo <= hi");
    }
    Ok(lo..=hi)
}

pub fn parse_grid(text: &str) -> anyhow::Result<Vec<Rational>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| rational::parse(s).map_err(anyhow::Error::from))
        .collect()
}

impl Sweep {
    pub fn rows(&self) -> anyhow::Result<Vec<Row>> {
        let mut rows = Vec::new();
        for n in self.n_range.clone() {
            for k in self.k_range.clone().filter(|&k| k >= n) {
                let hi = Rational::new(n as i64, k as i64);
                let grid: Vec<Rational> = match &self.grid {
                    Grid::Absolute(ms) => ms.clone(),
                    Grid::PerUser(steps) => (0..=steps * n)
                        .map(|j| Rational::new(j as i64, (steps * k) as i64))
                        .collect(),
                };
                for m in grid {
                    if m < int(0) || m > hi {
                        bail!("M = {m} is outside [0, {hi}] for N = {n}, K = {k}");
                    }
                    rows.push(Row {
                        n,
                        k,
                        m,
                        ours: achievable_rate(n, k, m).ok(),
                        mn: mn_segment_rate(n, k, m)?,
                        cutset: cutset_bound(n, k, m),
                        envelope: combined_envelope(n, k, m)?,
                    });
                }
            }
        }
        Ok(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use xorcache::rational::rat;

    fn row(n: usize, k: usize, m: Rational) -> Row {
        Sweep {
            n_range: n..=n,
            k_range: k..=k,
            grid: Grid::Absolute(vec![m]),
        }
        .rows()
        .unwrap()
        .remove(0)
    }

    #[test]
    fn example_rows() {
        assert_eq!(row(3, 3, rat(1, 3)).to_csv(), "3,3,1/3,2,7/3,2,yes,2");
        assert_eq!(row(4, 4, int(0)).to_csv(), "4,4,0,4,4,4,yes,4");
        let r = row(2, 4, rat(1, 4));
        assert_eq!(r.ours, Some(rat(3, 2)));
        assert_eq!(r.envelope, rat(3, 2));
        assert_eq!(row(2, 4, rat(1, 2)).envelope, rat(3, 2));
        assert_eq!(row(2, 4, rat(1, 2)).mn, rat(3, 2));
    }

    #[test]
    fn tight_exactly_inside_the_small_cache_regime() {
        let sweep = Sweep {
            n_range: 1..=6,
            k_range: 1..=10,
            grid: Grid::PerUser(4),
        };
        let rows = sweep.rows().unwrap();
        assert!(!rows.is_empty());
        for r in rows {
            let small = r.m <= Rational::new(1, r.k as i64);
            assert_eq!(r.tight(), small, "{}", r.to_csv());
            assert_eq!(r.ours.is_some(), small);
        }
        // the baseline corner alone meets the bound here, outside our regime
        let corner = row(2, 2, int(1));
        assert!(!corner.tight());
        assert_eq!(corner.envelope, corner.cutset);
    }

    #[test]
    fn out_of_domain_grid_is_rejected() {
        let sweep = Sweep {
            n_range: 2..=2,
            k_range: 4..=4,
            grid: Grid::Absolute(vec![int(1)]),
        };
        assert!(sweep.rows().is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("3").unwrap(), 3..=3);
        assert_eq!(parse_range("1..5").unwrap(), 1..=5);
        assert_eq!(parse_range("2..=4").unwrap(), 2..=4);
        assert!(parse_range("0..2").is_err());
        assert!(parse_range("5..2").is_err());
        assert_eq!(
            parse_grid("0, 1/8,1/4").unwrap(),
            vec![int(0), rat(1, 8), rat(1, 4)]
        );
    }
}
