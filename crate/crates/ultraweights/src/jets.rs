//! Borel jets: weighted norms, complexification, ramification and the
//! coefficients of `Y = q^{-1} ξ^{1−q} d/dξ`.

use std::path::Path;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{RamifiedMatrix, WeightMatrix};
use crate::numeric::ln_factorial;
use crate::report::ConditionReport;
use crate::sequence::WeightSequence;
use crate::weight::{tail_bounded, WeightFunction};

/// A finite jet `(λ_p)`, one- or two-dimensional.
#[derive(Debug, Clone, PartialEq)]
pub enum Jet {
    One(Vec<Complex64>),
    /// `λ_{j,k}` for `j + k ≤ order`, stored by total degree then `k`.
    Two { order: usize, coeffs: Vec<Complex64> },
}

fn tri(j: usize, k: usize) -> usize {
    let d = j + k;
    d * (d + 1) / 2 + k
}

impl Jet {
    pub fn one(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("jet entries must be finite and nonempty".into()));
        }
        Ok(Jet::One(coeffs))
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Jet::one(values.iter().map(|v| Complex64::new(*v, 0.0)).collect())
    }

    /// Entries `W_p · z_p` with standard complex normal `z_p`, seeded.
    pub fn random(seed: u64, row: &WeightSequence) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = row
            .log_values()
            .iter()
            .map(|lw| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im) * lw.exp()
            })
            .collect();
        Jet::One(v)
    }

    pub fn dimension(&self) -> u8 {
        match self {
            Jet::One(_) => 1,
            Jet::Two { .. } => 2,
        }
    }

    /// Largest total degree.
    pub fn order(&self) -> usize {
        match self {
            Jet::One(v) => v.len() - 1,
            Jet::Two { order, .. } => *order,
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        match self {
            Jet::One(v) => v,
            Jet::Two { coeffs, .. } => coeffs,
        }
    }

    pub fn get(&self, p: usize) -> Complex64 {
        match self {
            Jet::One(v) => v[p],
            Jet::Two { .. } => panic!("two-dimensional jet indexed by a single degree"),
        }
    }

    pub fn get2(&self, j: usize, k: usize) -> Complex64 {
        match self {
            Jet::Two { coeffs, .. } => coeffs[tri(j, k)],
            Jet::One(_) => panic!("one-dimensional jet indexed by a pair"),
        }
    }

    /// `(total degree, value)` for every entry.
    fn entries(&self) -> Vec<(usize, Complex64)> {
        match self {
            Jet::One(v) => v.iter().cloned().enumerate().collect(),
            Jet::Two { order, coeffs } => (0..=*order)
                .flat_map(|d| (0..=d).map(move |k| (d, k)))
                .map(|(d, k)| (d, coeffs[tri(d - k, k)]))
                .collect(),
        }
    }

    pub fn scale_add(&self, alpha: Complex64, other: &Jet) -> Result<Jet> {
        match (self, other) {
            (Jet::One(a), Jet::One(b)) if a.len() == b.len() => {
                Ok(Jet::One(a.iter().zip(b).map(|(x, y)| alpha * x + y).collect()))
            }
            _ => Err(Error::InvalidInput("jets of different shape".into())),
        }
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let mut rd = csv::Reader::from_path(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut v = Vec::new();
        for (n, rec) in rd.records().enumerate() {
            let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::InvalidInput(format!("{}: bad row {}", path.display(), n + 2)))
            };
            if parse(0)? as usize != n {
                return Err(Error::InvalidInput(format!("{}: indices must be 0, 1, 2, ...", path.display())));
            }
            v.push(Complex64::new(parse(1)?, parse(2)?));
        }
        Jet::one(v)
    }

    /// `p,re,im` rows of a one-dimensional jet.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let Jet::One(v) = self else {
            return Err(Error::InvalidInput("CSV output is for one-dimensional jets".into()));
        };
        let mut wr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Io(e.to_string());
        wr.write_record(["p", "re", "im"]).map_err(io)?;
        for (p, c) in v.iter().enumerate() {
            wr.write_record([p.to_string(), format!("{:.17e}", c.re), format!("{:.17e}", c.im)])
                .map_err(io)?;
        }
        wr.flush().map_err(|e| Error::Io(e.to_string()))
    }
}

/// `sup_p |λ_p| / W_{|p|}` computed in log domain.
pub fn jet_norm(j: &Jet, row: &WeightSequence) -> Result<f64> {
    if row.log_values().len() <= j.order() {
        return Err(Error::InvalidInput(format!(
            "row has {} entries, jet needs {}",
            row.log_values().len(),
            j.order() + 1
        )));
    }
    let lw = row.log_values();
    let m = j
        .entries()
        .iter()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(d, c)| c.norm().ln() - lw[*d])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(m.exp())
}

/// `|λ|_{ω,l}` against the row `W^l` of `ω`.
pub fn jet_norm_weight(j: &Jet, w: &WeightFunction, l: f64) -> Result<f64> {
    let m = WeightMatrix::build(w, &[l], j.order().max(2))?;
    jet_norm(j, m.row(l)?)
}

/// `λ^ℂ_{j,k} = i^k λ_{j+k}`.
pub fn complexify(j: &Jet) -> Result<Jet> {
    let Jet::One(v) = j else {
        return Err(Error::InvalidInput("complexification takes a one-dimensional jet".into()));
    };
    let order = v.len() - 1;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); (order + 1) * (order + 2) / 2];
    for d in 0..=order {
        for k in 0..=d {
            coeffs[tri(d - k, k)] = i_pow(k) * v[d];
        }
    }
    Ok(Jet::Two { order, coeffs })
}

/// `i^k`, exact.
fn i_pow(k: usize) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// `max |½(λ_{j+1,k} + i λ_{j,k+1})|` over `j + k < order`.
pub fn dbar_residual(j: &Jet) -> Result<f64> {
    let Jet::Two { order, coeffs } = j else {
        return Err(Error::InvalidInput("the d-bar residual takes a two-dimensional jet".into()));
    };
    let i = Complex64::new(0.0, 1.0);
    let mut worst = 0.0f64;
    for d in 0..*order {
        for k in 0..=d {
            let jj = d - k;
            let r = 0.5 * (coeffs[tri(jj + 1, k)] + i * coeffs[tri(jj, k + 1)]);
            worst = worst.max(r.norm());
        }
    }
    Ok(worst)
}

/// `λ*_{qj} = λ_j (qj)!/j!`, zero off multiples of `q`.
pub fn ramify_jet(j: &Jet, q: usize) -> Result<Jet> {
    let Jet::One(v) = j else {
        return Err(Error::InvalidInput("ramification takes a one-dimensional jet".into()));
    };
    if q == 0 {
        return Err(Error::InvalidInput("q must be at least 1".into()));
    }
    let n = v.len() - 1;
    let mut out = vec![Complex64::new(0.0, 0.0); q * n + 1];
    for (i, c) in v.iter().enumerate() {
        let f = (ln_factorial((q * i) as u64) - ln_factorial(i as u64)).exp();
        let x = c * f;
        if !x.is_finite() {
            return Err(Error::Budget(format!("ramified entry {} overflows", q * i)));
        }
        out[q * i] = x;
    }
    Ok(Jet::One(out))
}

/// Coefficients of `P_{λ,j}(ξ) = Σ_{i<j} λ_i ξ^{qi}/i!` and of
/// `Σ_{p<qj} λ*_p ξ^p/p!`, both up to degree `qj − 1`.
pub fn ramified_taylor_coefficients(lambda: &Jet, q: usize, j: usize) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let star = ramify_jet(lambda, q)?;
    if j == 0 || j > lambda.order() + 1 {
        return Err(Error::InvalidInput(format!("j = {j} exceeds the jet length")));
    }
    let mut direct = vec![Complex64::new(0.0, 0.0); q * j];
    for i in 0..j {
        direct[q * i] = lambda.get(i) / ln_factorial(i as u64).exp();
    }
    let zero = Complex64::new(0.0, 0.0);
    let via_star = (0..q * j)
        .map(|p| star.coeffs().get(p).copied().unwrap_or(zero) / ln_factorial(p as u64).exp())
        .collect();
    Ok((direct, via_star))
}

/// `|λ*_{qj}| ≤ C h^j (qj)! (S^{l₁}_{qj})^{1/q}` with `C, h` fitted for the
/// smallest `l₁` in `l₁_grid` whose excess has a bounded slope.
pub fn check_ramified_membership(lambda: &Jet, w: &WeightFunction, q: usize, l1_grid: &[f64]) -> ConditionReport {
    let r = ConditionReport::new("ramified-jet-membership", "ramified-jet-membership")
        .range(format!("q = {q}, j <= {}, l1 in {l1_grid:?}", lambda.order()));
    let res = (|| -> Result<Option<(f64, f64, f64)>> {
        let star = ramify_jet(lambda, q)?;
        let n = lambda.order();
        let ram = RamifiedMatrix::build(w, 1.0, l1_grid, q * n)?;
        for &l1 in l1_grid {
            let mut e = Vec::with_capacity(n + 1);
            for jj in 0..=n {
                let p = (q * jj) as u64;
                let m = star.get(q * jj).norm();
                let v = if m > 0.0 { m.ln() } else { f64::NEG_INFINITY };
                e.push(v - ln_factorial(p) - ram.log_s(l1, p)? / q as f64);
            }
            let log_c = e[0].max(0.0);
            let slopes: Vec<f64> = (1..=n).map(|jj| ((e[jj] - log_c) / jj as f64).max(-1e300)).collect();
            if slopes.len() < 4 || tail_bounded(&slopes, 0.05) {
                let log_h = slopes.iter().cloned().fold(0.0, f64::max);
                return Ok(Some((l1, log_c.exp(), log_h.exp())));
            }
        }
        Ok(None)
    })();
    match res {
        Ok(Some((l1, c, h))) => r.holds(vec![("l1", l1), ("C", c), ("h", h)]),
        Ok(None) => r.fails(*l1_grid.last().unwrap_or(&0.0)).note("slope of the excess grows for every l1"),
        Err(e) => r.inconclusive(e.to_string()),
    }
}

/// `Y^j = Σ_k c_{j,k} ξ^{k−qj} ∂^k`, `1 ≤ k ≤ j ≤ j_max`.
#[derive(Debug, Clone, Serialize)]
pub struct YCoefficients {
    pub q: usize,
    pub j_max: usize,
    /// `c_{j,k}` as decimal fraction strings for `j ≤ 20`, row `j`, index `k − 1`.
    pub exact: Vec<Vec<String>>,
    /// `ln |c_{j,k}|` for every row (`−∞` for zero).
    pub log_abs: Vec<Vec<f64>>,
    #[serde(skip)]
    rationals: Vec<Vec<BigRational>>,
}

/// Exact rows are kept up to this index.
pub const Y_EXACT_LIMIT: usize = 20;
pub const Y_MAX: usize = 30;

impl YCoefficients {
    /// `c_{j,k}` exactly, `j ≤ 20`.
    pub fn rational(&self, j: usize, k: usize) -> Option<&BigRational> {
        self.rationals.get(j.checked_sub(1)?)?.get(k.checked_sub(1)?)
    }

    /// `c_{j,k}` as a float (any `j ≤ j_max`).
    pub fn value(&self, j: usize, k: usize) -> f64 {
        match self.rational(j, k) {
            Some(c) => c.to_f64().unwrap_or(f64::NAN),
            None => f64::NAN,
        }
    }

    /// `Σ_k c_{j,k} n!/(n−k)!`, the `Y^j` coefficient on `ξ^n`.
    pub fn apply_to_monomial(&self, j: usize, n: u64) -> Option<BigRational> {
        let row = self.rationals.get(j - 1)?;
        let mut total = BigRational::zero();
        let mut falling = BigRational::one();
        for (i, c) in row.iter().enumerate() {
            let k = (i + 1) as u64;
            // n(n−1)…(n−k+1)
            falling *= BigRational::from_integer(BigInt::from(n as i64 - (k as i64 - 1)));
            total += c * &falling;
        }
        Some(total)
    }

    /// `|c_{j,k}| ≤ (4/q)^j 2^{j−k} (j−k)!` on every row.
    pub fn check_bound(&self) -> ConditionReport {
        let r = ConditionReport::new("y-coefficient-bound", "y-operator-coefficient-bound")
            .range(format!("q = {}, j <= {}", self.q, self.j_max));
        let mut worst = f64::NEG_INFINITY;
        for (ji, row) in self.log_abs.iter().enumerate() {
            let j = ji + 1;
            for (ki, lc) in row.iter().enumerate() {
                let k = ki + 1;
                let b = j as f64 * (4.0 / self.q as f64).ln() + (j - k) as f64 * 2f64.ln() + ln_factorial((j - k) as u64);
                worst = worst.max(lc - b);
                if *lc > b + 1e-12 * b.abs().max(1.0) {
                    return r.fails(j as f64).note(format!("k = {k}"));
                }
            }
        }
        r.holds(vec![("max_log_ratio", worst)])
    }
}

/// Runs `c_{j+1,k} = q^{-1}((k − qj) c_{j,k} + c_{j,k−1})` from `c_{1,1} = 1/q`,
/// exactly to `j = 20` and in floating point beyond.
pub fn y_operator_coefficients(q: usize, j_max: usize) -> Result<YCoefficients> {
    if q == 0 || j_max == 0 || j_max > Y_MAX {
        return Err(Error::InvalidInput(format!("need q >= 1 and 1 <= j_max <= {Y_MAX}")));
    }
    let qr = BigRational::from_integer(BigInt::from(q));
    let mut rows: Vec<Vec<BigRational>> = vec![vec![BigRational::one() / &qr]];
    let mut floats: Vec<Vec<f64>> = vec![vec![1.0 / q as f64]];
    for j in 1..j_max {
        let prev = floats.last().unwrap().clone();
        let mut next = vec![0.0; j + 1];
        for k in 1..=j + 1 {
            let a = if k <= j { prev[k - 1] * (k as f64 - (q * j) as f64) } else { 0.0 };
            let b = if k >= 2 { prev[k - 2] } else { 0.0 };
            next[k - 1] = (a + b) / q as f64;
        }
        floats.push(next);
        if j < Y_EXACT_LIMIT {
            let prev = rows.last().unwrap().clone();
            let mut next = Vec::with_capacity(j + 1);
            for k in 1..=j + 1 {
                let mut v = BigRational::zero();
                if k <= j {
                    v += &prev[k - 1] * BigRational::from_integer(BigInt::from(k as i64 - (q * j) as i64));
                }
                if k >= 2 {
                    v += &prev[k - 2];
                }
                next.push(v / &qr);
            }
            rows.push(next);
        }
    }
    let exact = rows.iter().map(|r| r.iter().map(|c| c.to_string()).collect()).collect();
    // exact rows take precedence for the magnitudes
    let log_abs = floats
        .iter()
        .enumerate()
        .map(|(ji, row)| {
            row.iter()
                .enumerate()
                .map(|(ki, v)| match rows.get(ji) {
                    Some(r) => log_abs_rational(&r[ki]),
                    None if *v == 0.0 => f64::NEG_INFINITY,
                    None => v.abs().ln(),
                })
                .collect()
        })
        .collect();
    Ok(YCoefficients {
        q,
        j_max,
        exact,
        log_abs,
        rationals: rows,
    })
}

fn log_abs_rational(c: &BigRational) -> f64 {
    if c.is_zero() {
        return f64::NEG_INFINITY;
    }
    let n = c.numer().abs();
    let d = c.denom().clone();
    big_ln(&n) - big_ln(&d)
}

fn big_ln(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        x.to_f64().unwrap().ln()
    } else {
        let shift = bits - 900;
        (x >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// `Π_{i<j} (n − qi)/q`, the exact `Y^j` coefficient of `ξ^n`.
pub fn y_monomial_oracle(q: usize, j: usize, n: u64) -> BigRational {
    let qr = BigRational::from_integer(BigInt::from(q));
    (0..j).fold(BigRational::one(), |acc, i| {
        acc * BigRational::from_integer(BigInt::from(n as i64 - (q * i) as i64)) / &qr
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ones(n: usize) -> Jet {
        Jet::from_real(&vec![1.0; n]).unwrap()
    }

    #[test]
    fn complexification_examples() {
        let c = complexify(&ones(5)).unwrap();
        assert_eq!(c.get2(0, 2), Complex64::new(-1.0, 0.0));
        assert_eq!(dbar_residual(&c).unwrap(), 0.0);
        let e1 = Jet::from_real(&[0.0, 1.0, 0.0, 0.0]).unwrap();
        let c = complexify(&e1).unwrap();
        assert_eq!(c.get2(1, 0), Complex64::new(1.0, 0.0));
        assert_eq!(c.get2(0, 1), Complex64::new(0.0, 1.0));
        for d in 0..=3 {
            for k in 0..=d {
                if d != 1 {
                    assert_eq!(c.get2(d - k, k), Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn norms() {
        let m = WeightMatrix::build(&WeightFunction::gevrey(2.0).unwrap(), &[1.0], 32).unwrap();
        let row = m.row(1.0).unwrap();
        let own = Jet::from_real(&row.log_values().iter().map(|v| v.exp()).collect::<Vec<_>>()).unwrap();
        assert!((jet_norm(&own, row).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(jet_norm(&Jet::from_real(&[0.0; 8]).unwrap(), row).unwrap(), 0.0);
        // p! against W¹ of the Gevrey(2) weight, brute-force sup
        let fact = Jet::from_real(&(0..=32).map(|p| ln_factorial(p).exp()).collect::<Vec<_>>()).unwrap();
        let brute = (0..=32u64)
            .map(|p| (ln_factorial(p) - row.log_values()[p as usize]).exp())
            .fold(0.0, f64::max);
        assert!((jet_norm(&fact, row).unwrap() - brute).abs() <= 1e-12 * brute);
        let rnd = Jet::random(3, row);
        assert_eq!(jet_norm(&complexify(&rnd).unwrap(), row).unwrap(), jet_norm(&rnd, row).unwrap());
    }

    #[test]
    fn ramified_jet_examples() {
        let s = ramify_jet(&ones(3), 2).unwrap();
        let want = [1.0, 0.0, 2.0, 0.0, 12.0];
        for (p, w) in want.iter().enumerate() {
            assert!((s.get(p).re - w).abs() < 1e-12 && s.get(p).im == 0.0);
        }
        let l = Jet::from_real(&[1.0, -2.0, 0.5]).unwrap();
        assert_eq!(ramify_jet(&l, 1).unwrap(), l);
    }

    #[test]
    fn ramified_taylor_forms_agree() {
        let l = Jet::from_real(&[1.5, -2.0, 0.25, 3.0]).unwrap();
        let (a, b) = ramified_taylor_coefficients(&l, 2, 2).unwrap();
        // (λ₀, 0, λ₁·2!/1!/2!, 0)
        assert_eq!(a, vec![Complex64::new(1.5, 0.0), Complex64::new(0.0, 0.0), Complex64::new(-2.0, 0.0), Complex64::new(0.0, 0.0)]);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() <= 1e-14 * x.norm().max(1.0));
        }
        for q in 1..=3 {
            let (a, b) = ramified_taylor_coefficients(&l, q, 4).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).norm() <= 1e-13 * x.norm().max(1.0));
            }
        }
    }

    #[test]
    fn y_coefficients_small_cases() {
        let c = y_operator_coefficients(2, 6).unwrap();
        let r = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        assert_eq!(c.rational(1, 1), Some(&r(1, 2)));
        assert_eq!(c.rational(2, 1), Some(&r(-1, 4)));
        assert_eq!(c.rational(2, 2), Some(&r(1, 4)));
        let c1 = y_operator_coefficients(1, 8).unwrap();
        for j in 1..=8 {
            for k in 1..=j {
                let want = if k == j { BigRational::one() } else { BigRational::zero() };
                assert_eq!(c1.rational(j, k), Some(&want));
            }
        }
        // (2,1) at q = 2: 1/4 ≤ 4·2·1
        assert!(c.value(2, 1).abs() <= 8.0);
    }

    #[test]
    fn y_coefficients_match_symbolic_differentiation() {
        for q in 1..=3usize {
            let c = y_operator_coefficients(q, 6).unwrap();
            for j in 1..=6 {
                for n in 0..=(3 * q * j) as u64 {
                    assert_eq!(c.apply_to_monomial(j, n).unwrap(), y_monomial_oracle(q, j, n), "q={q} j={j} n={n}");
                }
            }
        }
    }

    #[test]
    fn y_coefficient_bound_to_twenty_and_beyond() {
        for q in 1..=4 {
            assert!(y_operator_coefficients(q, 20).unwrap().check_bound().is_holds());
            assert!(y_operator_coefficients(q, 30).unwrap().check_bound().is_holds());
        }
    }

    #[test]
    fn ramified_gevrey_jet_is_a_member() {
        let m = WeightMatrix::build(&WeightFunction::gevrey(2.0).unwrap(), &[1.0], 20).unwrap();
        let l = Jet::random(11, m.row(1.0).unwrap());
        let rep = check_ramified_membership(&l, &WeightFunction::gevrey(2.0).unwrap(), 2, &[0.5, 1.0, 2.0, 4.0]);
        assert!(rep.is_holds(), "{rep:?}");
    }

    #[test]
    fn csv_round_trip() {
        let l = Jet::random(5, &WeightSequence::factorial(10).unwrap());
        let mut buf = Vec::new();
        l.write_csv(&mut buf).unwrap();
        let dir = std::env::temp_dir().join("ultraweights-jet-test.csv");
        std::fs::write(&dir, &buf).unwrap();
        assert_eq!(Jet::load_csv(&dir).unwrap(), l);
    }

    proptest! {
        #[test]
        fn complexification_is_linear_and_flat(seed in 0u64..1000, ar in -3.0f64..3.0, ai in -3.0f64..3.0) {
            let row = WeightSequence::factorial(24).unwrap();
            let (l, m) = (Jet::random(seed, &row), Jet::random(seed + 1, &row));
            let alpha = Complex64::new(ar, ai);
            let lhs = complexify(&l.scale_add(alpha, &m).unwrap()).unwrap();
            let cl = complexify(&l).unwrap();
            let cm = complexify(&m).unwrap();
            let rhs: Vec<Complex64> = cl.coeffs().iter().zip(cm.coeffs()).map(|(x, y)| alpha * x + y).collect();
            prop_assert_eq!(lhs.coeffs(), &rhs[..]);
            prop_assert_eq!(dbar_residual(&lhs).unwrap(), 0.0);
        }

        #[test]
        fn ramification_is_linear(seed in 0u64..1000, ar in -3.0f64..3.0) {
            let row = WeightSequence::factorial(12).unwrap();
            let (l, m) = (Jet::random(seed, &row), Jet::random(seed + 7, &row));
            let alpha = Complex64::new(ar, 0.0);
            let lhs = ramify_jet(&l.scale_add(alpha, &m).unwrap(), 3).unwrap();
            let (rl, rm) = (ramify_jet(&l, 3).unwrap(), ramify_jet(&m, 3).unwrap());
            for (p, x) in lhs.coeffs().iter().enumerate() {
                let y = alpha * rl.get(p) + rm.get(p);
                prop_assert!((x - y).norm() <= 1e-12 * (alpha.norm() * rl.get(p).norm() + rm.get(p).norm()).max(1e-300));
            }
        }
    }
}
