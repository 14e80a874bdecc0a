//! Small numerical helpers: grids, log-factorials, golden-section search.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// `n` log-spaced points on `[a, b]`, endpoints included.
pub fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > a && n >= 2);
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// `n` evenly spaced points on `[a, b]`, endpoints included.
pub fn lin_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

const LN_FACT_TABLE: usize = 4096;

fn ln_fact_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut v = Vec::with_capacity(LN_FACT_TABLE + 1);
        let mut acc = 0.0f64;
        v.push(0.0);
        for k in 1..=LN_FACT_TABLE {
            acc += (k as f64).ln();
            v.push(acc);
        }
        v
    })
}

/// `ln p!`; summed exactly up to 4096, `ln Γ(p+1)` beyond.
pub fn ln_factorial(p: u64) -> f64 {
    if (p as usize) <= LN_FACT_TABLE {
        ln_fact_table()[p as usize]
    } else {
        statrs::function::gamma::ln_gamma(p as f64 + 1.0)
    }
}

/// `ln Γ(x+1)` for real `x ≥ 0`.
pub fn ln_factorial_real(x: f64) -> f64 {
    if x.fract() == 0.0 && x <= LN_FACT_TABLE as f64 {
        ln_factorial(x as u64)
    } else {
        statrs::function::gamma::ln_gamma(x + 1.0)
    }
}

/// Inverse golden ratio.
pub const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizer and maximum of `f` on `[a, b]` by golden-section search.
///
/// `f` is assumed unimodal on the bracket. Stops when the bracket is shorter
/// than `tol` or after `max_iter` iterations.
pub fn golden_max<F>(mut f: F, a: f64, b: f64, tol: f64, max_iter: usize) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut it = 0;
    while (b - a) > tol && it < max_iter {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
        it += 1;
    }
    if fc >= fd {
        Ok((c, fc))
    } else {
        Ok((d, fd))
    }
}

/// Multi-start zooming maximizer for objectives that need not be unimodal.
///
/// Each level samples `n` cells per interval, keeps the `keep` best nodes and
/// zooms into their neighbouring cells. Stops once the cell width drops below
/// `tol`. Ties are broken by smaller abscissa.
pub fn zoom_max<F>(
    mut f: F,
    intervals: Vec<(f64, f64)>,
    n: usize,
    keep: usize,
    tol: f64,
) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    assert!(n >= 4 && keep >= 1);
    let mut intervals = intervals;
    for _ in 0..200 {
        let mut samples: Vec<(f64, f64, f64, f64)> = Vec::new();
        let mut width = 0.0f64;
        for &(a, b) in &intervals {
            let h = (b - a) / n as f64;
            width = width.max(h);
            for i in 0..=n {
                let x = if i == n { b } else { a + h * i as f64 };
                let v = f(x)?;
                samples.push((x, if v.is_nan() { f64::NEG_INFINITY } else { v }, a, b));
            }
        }
        samples.sort_by(|p, q| q.1.total_cmp(&p.1).then(p.0.total_cmp(&q.0)));
        let (bx, bv, _, _) = samples[0];
        if width < tol {
            return Ok((bx, bv));
        }
        let mut next: Vec<(f64, f64)> = Vec::new();
        let mut taken = 0;
        for &(x, _, a, b) in &samples {
            if taken == keep {
                break;
            }
            let h = (b - a) / n as f64;
            let iv = ((x - h).max(a), (x + h).min(b));
            if next.iter().any(|&(c, d)| iv.0 >= c && iv.1 <= d) {
                continue;
            }
            next.push(iv);
            taken += 1;
        }
        next.sort_by(|p, q| p.0.total_cmp(&q.0));
        // merge overlapping cells so shared regions are sampled once
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for iv in next {
            match merged.last_mut() {
                Some(last) if iv.0 <= last.1 => last.1 = last.1.max(iv.1),
                _ => merged.push(iv),
            }
        }
        intervals = merged;
    }
    Err(Error::Budget("zoom_max did not reach the tolerance".into()))
}

/// Relative comparison slack used by the inequality verifiers.
pub fn slack(rel: f64, lhs: f64, rhs: f64) -> f64 {
    rel * 1f64.max(lhs.abs()).max(rhs.abs())
}

/// Checks that `x` is finite, with a message naming `what`.
pub fn finite(x: f64, what: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::InvalidInput(format!("{what} is not finite ({x})")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_factorial_matches_product() {
        let mut acc = 0.0;
        for p in 1..=30u64 {
            acc += (p as f64).ln();
            assert!((ln_factorial(p) - acc).abs() < 1e-12);
        }
        assert_eq!(ln_factorial(0), 0.0);
    }

    #[test]
    fn ln_factorial_switchover_is_continuous() {
        let a = ln_factorial(LN_FACT_TABLE as u64);
        let b = statrs::function::gamma::ln_gamma(LN_FACT_TABLE as f64 + 1.0);
        assert!((a - b).abs() / a < 1e-13);
    }

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, v) = golden_max(|x| Ok(-(x - 1.3) * (x - 1.3) + 2.0), -5.0, 5.0, 1e-10, 200).unwrap();
        // a flat maximum only pins the abscissa to about sqrt(machine epsilon)
        assert!((x - 1.3).abs() < 1e-6);
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn zoom_finds_global_max_among_close_peaks() {
        // two bumps of nearly equal height; the right one is higher by 1e-9
        let f = |x: f64| Ok((-(x - 1.0).powi(2) * 400.0).exp() + (1.0 + 1e-9) * (-(x - 1.2).powi(2) * 400.0).exp());
        let (x, _) = zoom_max(f, vec![(0.0, 3.0)], 32, 2, 1e-11).unwrap();
        assert!((x - 1.2).abs() < 1e-3);
    }

    #[test]
    fn grids_hit_endpoints() {
        let g = log_grid(1e-3, 1e3, 7);
        assert!((g[0] - 1e-3).abs() < 1e-15);
        assert!((g[6] - 1e3).abs() < 1e-9);
        assert!((g[3] - 1.0).abs() < 1e-12);
    }
}
