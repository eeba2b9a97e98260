//! Exact rate bounds in file units.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{self, int, Rational};
use crate::{Error, Result};

/// A cache-rate pair `(M, R)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RatePoint {
    #[serde(with = "rational::as_str")]
    pub m: Rational,
    #[serde(with = "rational::as_str")]
    pub r: Rational,
}

impl RatePoint {
    pub fn new(m: Rational, r: Rational) -> Self {
        RatePoint { m, r }
    }
}

fn check_range(m: Rational, lo: Rational, hi: Rational) -> Result<()> {
    if m < lo || m > hi {
        return Err(Error::CacheSizeOutOfRange { m, lo, hi });
    }
    Ok(())
}

fn check_users(n: usize, k: usize) -> Result<()> {
    if n == 0 || k < n {
        return Err(Error::InvalidInstance(format!(
            "need K >= N >= 1, got N = {n}, K = {k}"
        )));
    }
    Ok(())
}

/// Cut-set lower bound: the max over `s = 1..=min(N, K)` of
/// `s - s·M / floor(N/s)`. Zero when `N` or `K` is zero.
pub fn cutset_bound(n: usize, k: usize, m: Rational) -> Rational {
    (1..=n.min(k))
        .map(|s| int(s) - int(s) * m / int(n / s))
        .max()
        .unwrap_or_else(Rational::zero)
}

/// `N(1 - M)` for `0 <= M <= 1/K`, memory sharing between `(0, N)` and the
/// coded point `(1/K, N - N/K)`.
pub fn achievable_rate(n: usize, k: usize, m: Rational) -> Result<Rational> {
    check_users(n, k)?;
    check_range(m, Rational::zero(), Rational::new(1, k as i64))?;
    Ok(int(n) * (Rational::one() - m))
}

/// Rate on the first segment of uncoded-placement coded caching, the line
/// from `(0, N)` to `(N/K, min((K-1)/2, N(K-1)/K))`, valid for `0 <= M <= N/K`.
pub fn mn_segment_rate(n: usize, k: usize, m: Rational) -> Result<Rational> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidInstance(format!(
            "need N, K >= 1, got N = {n}, K = {k}"
        )));
    }
    check_range(m, Rational::zero(), Rational::new(n as i64, k as i64))?;
    let (n_i, k_i) = (n as i64, k as i64);
    let corner = (k_i * (k_i - 1) / 2).min(n_i * (k_i - 1));
    Ok(int(n) + m * Rational::new(corner - k_i * n_i, n_i))
}

/// Linear interpolation of the rate between two cache-rate points.
pub fn memory_share(p1: RatePoint, p2: RatePoint, m: Rational) -> Result<Rational> {
    if p1.m >= p2.m {
        return Err(Error::Malformed(format!(
            "memory sharing needs p1.m < p2.m, got {} and {}",
            p1.m, p2.m
        )));
    }
    check_range(m, p1.m, p2.m)?;
    let lambda = (m - p1.m) / (p2.m - p1.m);
    Ok((Rational::one() - lambda) * p1.r + lambda * p2.r)
}

/// Vertices of the lower convex envelope of `points`, sorted by `m`.
///
/// Points sharing an `m` keep only the smallest rate.
pub fn lower_convex_envelope(points: &[RatePoint]) -> Vec<RatePoint> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.m.cmp(&b.m).then(a.r.cmp(&b.r)));
    pts.dedup_by(|later, earlier| later.m == earlier.m);

    let mut hull: Vec<RatePoint> = Vec::with_capacity(pts.len());
    for p in pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // drop b when it is on or above the chord a-p
            let cross = (b.m - a.m) * (p.r - a.r) - (b.r - a.r) * (p.m - a.m);
            if cross <= Rational::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Evaluates a piecewise-linear envelope at `m`.
pub fn envelope_at(hull: &[RatePoint], m: Rational) -> Result<Rational> {
    let (first, last) = match (hull.first(), hull.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::Malformed("empty envelope".into())),
    };
    check_range(m, first.m, last.m)?;
    if hull.len() == 1 {
        return Ok(first.r);
    }
    let seg = hull
        .windows(2)
        .find(|w| m <= w[1].m)
        .expect("m within hull range");
    memory_share(seg[0], seg[1], m)
}

/// The three anchor points: empty cache, the coded point at `1/K`, and the
/// first uncoded-placement corner at `N/K`.
pub fn anchor_points(n: usize, k: usize) -> Result<[RatePoint; 3]> {
    check_users(n, k)?;
    let (n_i, k_i) = (n as i64, k as i64);
    Ok([
        RatePoint::new(Rational::zero(), int(n)),
        RatePoint::new(Rational::new(1, k_i), int(n) - Rational::new(n_i, k_i)),
        RatePoint::new(
            Rational::new(n_i, k_i),
            Rational::new(k_i - 1, 2).min(Rational::new(n_i * (k_i - 1), k_i)),
        ),
    ])
}

/// Lower convex envelope of the anchor points at `M in [0, N/K]`.
pub fn combined_envelope(n: usize, k: usize, m: Rational) -> Result<Rational> {
    let anchors = anchor_points(n, k)?;
    check_range(m, Rational::zero(), Rational::new(n as i64, k as i64))?;
    envelope_at(&lower_convex_envelope(&anchors), m)
}
