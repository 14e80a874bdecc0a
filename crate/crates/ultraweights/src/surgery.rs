//! Beurling weight surgery: `σ(x) = Σ_{i≤n} (ω(x) − ω(x_i))` on `[x_n, x_{n+1})`
//! for a greedily chosen breakpoint sequence.

use std::fmt;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::numeric::log_grid;
use crate::report::ConditionReport;
use crate::weight::{tail_bounded, tail_decays, WeightFunction};

/// Majorant `h` with `ω = o(h)`.
pub type Majorant = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy)]
pub struct SurgeryConfig {
    /// Witness `K` of `(P_{ω,γ})`; estimated from the base when absent.
    pub k: Option<f64>,
    pub points_per_decade: u32,
    /// The initial construction must pass this abscissa.
    pub x_max: f64,
    /// Lazy extension stops here.
    pub x_cap: f64,
    /// First candidate abscissa for `x₂`.
    pub x_start: f64,
    /// Condition 3 is sampled on `[x, 10^tail_decades · x]`.
    pub tail_decades: f64,
}

impl Default for SurgeryConfig {
    fn default() -> Self {
        SurgeryConfig {
            k: None,
            points_per_decade: 64,
            x_max: 1e12,
            x_cap: 1e300,
            x_start: 1e-6,
            tail_decades: 3.0,
        }
    }
}

#[derive(Debug, Clone)]
struct State {
    /// `x₁ = 0, x₂, ...`
    breakpoints: Vec<f64>,
    /// `ω(x_i)`.
    omega_at: Vec<f64>,
    /// Smallest tail margin `h/(n²ω)` seen for each breakpoint.
    tail_margin: Vec<f64>,
    /// Upper end of the sampled tail per breakpoint.
    checked_to: Vec<f64>,
    invalid: Option<String>,
}

/// The surgery weight; evaluation is shared-read, extension takes the write lock.
pub struct SurgeryWeight {
    base: WeightFunction,
    h: Majorant,
    h_label: String,
    gamma: f64,
    k: f64,
    cfg: SurgeryConfig,
    state: RwLock<State>,
}

impl fmt::Debug for SurgeryWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let st = self.state.read().expect("surgery state lock");
        f.debug_struct("SurgeryWeight")
            .field("base", &self.base.label())
            .field("h", &self.h_label)
            .field("gamma", &self.gamma)
            .field("k", &self.k)
            .field("breakpoints", &st.breakpoints)
            .field("invalid", &st.invalid)
            .finish()
    }
}

/// Which breakpoint condition blocked the search.
fn condition_name(c: u8) -> &'static str {
    match c {
        1 => "x_{n+1} >= K^gamma x_n",
        2 => "omega(x_{n+1}) >= 2^{n+1-i} omega(x_i)",
        3 => "h >= (n+1)^2 omega on the sampled tail",
        _ => "omega(x_2) > 0",
    }
}

impl SurgeryWeight {
    /// Builds breakpoints until one exceeds `cfg.x_max`.
    pub fn build(base: WeightFunction, h: Majorant, h_label: impl Into<String>, gamma: f64, cfg: SurgeryConfig) -> Result<Arc<Self>> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidInput(format!("gamma must be positive, got {gamma}")));
        }
        let k = match cfg.k {
            Some(k) => k,
            None => crate::gamma::property_witness(&base, gamma, &crate::gamma::GammaConfig::default())?.ok_or_else(|| {
                Error::InvalidInput(format!("no witness K for the growth property at gamma = {gamma}"))
            })?,
        };
        if !(k > 1.0) {
            return Err(Error::InvalidInput(format!("witness K must exceed 1, got {k}")));
        }
        // ω = o(h) on a tail grid
        let ts = log_grid(1e2, 1e8, 120);
        let ratio: Vec<f64> = ts.iter().map(|&t| Ok(base.eval(t)? / h(t))).collect::<Result<_>>()?;
        if ratio.iter().any(|r| !r.is_finite()) || !tail_decays(&ratio, 0.05) {
            return Err(Error::InvalidInput("base weight is not o(h) on the tail grid".into()));
        }
        // n = 1 tail condition h ≥ ω, checked from t ≥ 1
        for t in log_grid(1.0, cfg.x_max, 10 * cfg.points_per_decade as usize) {
            if h(t) < base.eval(t)? {
                return Err(Error::InvalidInput(format!("h < omega at t = {t:.6e}")));
            }
        }
        let sw = SurgeryWeight {
            h: h.clone(),
            h_label: h_label.into(),
            gamma,
            k,
            cfg,
            state: RwLock::new(State {
                breakpoints: vec![0.0],
                omega_at: vec![base.eval(0.0)?],
                tail_margin: vec![f64::INFINITY],
                checked_to: vec![0.0],
                invalid: None,
            }),
            base,
        };
        {
            let mut st = sw.state.write().expect("surgery state lock");
            sw.extend_past(&mut st, cfg.x_max)?;
        }
        Ok(Arc::new(sw))
    }

    pub fn base(&self) -> &WeightFunction {
        &self.base
    }

    pub fn majorant(&self, t: f64) -> f64 {
        (self.h)(t)
    }

    pub fn majorant_label(&self) -> &str {
        &self.h_label
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.state.read().expect("surgery state lock").breakpoints.clone()
    }

    /// `Σ_{i≤n} ω(x_i)` for each `n`.
    pub fn partial_sums(&self) -> Vec<f64> {
        let st = self.state.read().expect("surgery state lock");
        st.omega_at
            .iter()
            .scan(0.0, |acc, w| {
                *acc += w;
                Some(*acc)
            })
            .collect()
    }

    pub fn is_valid(&self) -> bool {
        self.diagnostic().is_none()
    }

    pub fn diagnostic(&self) -> Option<String> {
        self.state.read().expect("surgery state lock").invalid.clone()
    }

    /// Candidate abscissae `10^{k/ppd}`.
    fn candidate(&self, k: i64) -> f64 {
        10f64.powf(k as f64 / self.cfg.points_per_decade as f64)
    }

    fn first_candidate_at_least(&self, x: f64) -> i64 {
        let ppd = self.cfg.points_per_decade as f64;
        let mut k = (x.log10() * ppd).floor() as i64;
        while self.candidate(k) < x {
            k += 1;
        }
        k
    }

    /// Smallest tail margin `h/(m ω)` on `[x, 10^d x]`, `None` if some sample is below 1.
    fn tail_margin(&self, x: f64, m: f64) -> Result<(f64, bool)> {
        let hi = x * 10f64.powf(self.cfg.tail_decades);
        let n = (self.cfg.tail_decades * 16.0) as usize + 1;
        let mut worst = f64::INFINITY;
        for t in log_grid(x, hi, n) {
            let w = self.base.eval(t)?;
            if w > 0.0 {
                worst = worst.min((self.h)(t) / (m * w));
            }
        }
        Ok((worst, worst >= 1.0))
    }

    fn next_breakpoint(&self, st: &State) -> std::result::Result<(f64, f64, f64), (u8, String)> {
        let n = st.breakpoints.len();
        let x_n = *st.breakpoints.last().unwrap();
        let lower = if n == 1 {
            self.cfg.x_start
        } else {
            (self.k.powf(self.gamma) * x_n).max(x_n * (1.0 + 1e-12))
        };
        let m = ((n + 1) * (n + 1)) as f64;
        let mut k = self.first_candidate_at_least(lower);
        let mut blocked = 1u8;
        loop {
            let x = self.candidate(k);
            if !(x <= self.cfg.x_cap) {
                return Err((blocked, format!("breakpoint x_{} not found below {:.1e}", n + 1, self.cfg.x_cap)));
            }
            k += 1;
            let w = self.base.eval(x).map_err(|e| (0, e.to_string()))?;
            if !(w > 0.0) {
                blocked = 4;
                continue;
            }
            if (0..n).any(|j| w < 2f64.powi((n - j) as i32) * st.omega_at[j]) {
                blocked = 2;
                continue;
            }
            match self.tail_margin(x, m) {
                Ok((margin, true)) => return Ok((x, w, margin)),
                Ok(_) => blocked = 3,
                Err(e) => return Err((3, e.to_string())),
            }
        }
    }

    fn extend_past(&self, st: &mut State, x: f64) -> Result<()> {
        while *st.breakpoints.last().unwrap() <= x {
            match self.next_breakpoint(st) {
                Ok((b, w, margin)) => {
                    st.breakpoints.push(b);
                    st.omega_at.push(w);
                    st.tail_margin.push(margin);
                    st.checked_to.push(b * 10f64.powf(self.cfg.tail_decades));
                }
                Err((c, msg)) => {
                    return Err(Error::Budget(format!("{msg}; blocked by condition '{}'", condition_name(c))));
                }
            }
        }
        Ok(())
    }

    /// `σ` on `[x_n, x_{n+1})` with `n` given (1-based).
    fn formula(&self, st: &State, n: usize, x: f64) -> Result<f64> {
        let w = self.base.eval(x)?;
        Ok(st.omega_at[..n].iter().map(|wi| w - wi).sum())
    }

    /// `σ(x)`, extending breakpoints and re-checking the tail condition when
    /// `x` lies beyond the verified range.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::Domain(format!("surgery weight at x = {x}")));
        }
        {
            let st = self.state.read().expect("surgery state lock");
            if let Some(d) = &st.invalid {
                return Err(Error::Domain(d.clone()));
            }
            if x < *st.breakpoints.last().unwrap() {
                let n = st.breakpoints.partition_point(|&b| b <= x);
                if x <= st.checked_to[n - 1] || n == 1 {
                    return self.formula(&st, n, x);
                }
            }
        }
        let mut st = self.state.write().expect("surgery state lock");
        if let Some(d) = &st.invalid {
            return Err(Error::Domain(d.clone()));
        }
        if let Err(e) = self.extend_past(&mut st, x) {
            st.invalid = Some(e.to_string());
            return Err(e);
        }
        let n = st.breakpoints.partition_point(|&b| b <= x);
        if n > 1 && x > st.checked_to[n - 1] {
            let w = self.base.eval(x)?;
            if (self.h)(x) < (n * n) as f64 * w {
                let d = format!("h < n^2 omega at x = {x:.6e} (n = {n}); surgery weight invalid");
                st.invalid = Some(d.clone());
                return Err(Error::Domain(d));
            }
        }
        self.formula(&st, n, x)
    }

    /// Grid checks of the construction.
    pub fn verify(&self) -> Vec<ConditionReport> {
        let bps = self.breakpoints();
        let st = self.state.read().expect("surgery state lock").clone();
        let range = format!("x in [0, {:.3e}], {} breakpoints", self.cfg.x_max, bps.len());
        let mut out = Vec::new();

        // continuity: left formula (n−1 terms) and right formula agree exactly
        let mut r = ConditionReport::new("continuity", "surgery-continuity").range(range.clone());
        let mut bad = None;
        for n in 2..bps.len() {
            let (left, right) = (self.formula(&st, n - 1, bps[n - 1]), self.formula(&st, n, bps[n - 1]));
            match (left, right) {
                (Ok(a), Ok(b)) if a == b => {}
                _ => {
                    bad = Some(bps[n - 1]);
                    break;
                }
            }
        }
        r = match bad {
            Some(x) => r.fails(x),
            None => r.holds(vec![("breakpoints", bps.len() as f64)]),
        };
        out.push(r);

        // σ = ω on the first interval
        let r = ConditionReport::new("first_interval", "surgery-normalized").range(format!("[0, {:.3e})", bps[1]));
        let first = log_grid(bps[1] * 1e-6, bps[1], 200)
            .into_iter()
            .filter(|&x| x < bps[1])
            .find(|&x| self.eval(x).ok() != self.base.eval(x).ok());
        out.push(match first {
            Some(x) => r.fails(x),
            None => r.holds(vec![]),
        });

        let grid = log_grid(bps[1], self.cfg.x_max, 40 * 12);
        let sample = |x: f64| -> Result<(usize, f64, f64, f64)> {
            let n = bps.partition_point(|&b| b <= x);
            Ok((n, self.eval(x)?, self.base.eval(x)?, (self.h)(x)))
        };
        let vals: Vec<(f64, (usize, f64, f64, f64))> = match grid.iter().map(|&x| Ok((x, sample(x)?))).collect::<Result<_>>() {
            Ok(v) => v,
            Err(e) => {
                out.push(ConditionReport::new("evaluation", "surgery-evaluation").inconclusive(e.to_string()));
                return out;
            }
        };

        let r = ConditionReport::new("nondecreasing", "surgery-nondecreasing").range(range.clone());
        let dec = vals.windows(2).find(|w| w[1].1 .1 < w[0].1 .1).map(|w| w[1].0);
        out.push(match dec {
            Some(x) => r.fails(x),
            None => r.holds(vec![]),
        });

        let r = ConditionReport::new("lower_comparison", "surgery-lower-comparison").range(range.clone());
        let low = vals
            .iter()
            .find(|(_, (n, s, w, _))| *n >= 2 && *s < (*n as f64 - 2.0) * w * (1.0 - 1e-12))
            .map(|v| v.0);
        out.push(match low {
            Some(x) => r.fails(x),
            None => r.holds(vec![]),
        });

        let r = ConditionReport::new("upper_comparison", "surgery-upper-comparison").range(range.clone());
        let mut worst = 0.0f64;
        let mut up = None;
        for (x, (n, s, _, h)) in &vals {
            let q = s * *n as f64 / h;
            worst = worst.max(q);
            if q > 1.0 + 1e-12 && up.is_none() {
                up = Some(*x);
            }
        }
        out.push(match up {
            Some(x) => r.fails(x),
            None => r.holds(vec![("max_n_sigma_over_h", worst)]),
        });

        // little-o comparisons beyond x₅
        for (tag, stmt, f) in [
            ("omega_o_sigma", "surgery-base-little-o", (|s: f64, w: f64, _h: f64| w / s) as fn(f64, f64, f64) -> f64),
            ("sigma_o_h", "surgery-majorant-little-o", |s: f64, _w: f64, h: f64| s / h),
        ] {
            let r = ConditionReport::new(tag, stmt);
            let Some(&x5) = bps.get(4) else {
                out.push(r.inconclusive("fewer than five breakpoints below x_max"));
                continue;
            };
            let ratio: Vec<f64> = vals.iter().filter(|v| v.0 >= x5).map(|(_, (_, s, w, h))| f(*s, *w, *h)).collect();
            let r = r.range(format!("x in [{x5:.3e}, {:.3e}]", self.cfg.x_max));
            if ratio.len() < 8 {
                out.push(r.inconclusive("tail grid too short"));
            } else if tail_decays(&ratio, 0.05) && tail_bounded(&ratio, 0.0) {
                out.push(r.holds(vec![("first", ratio[0]), ("last", *ratio.last().unwrap())]));
            } else {
                out.push(r.fails(x5));
            }
        }

        // breakpoint condition margins
        let mut m1 = f64::INFINITY;
        let mut m2 = f64::INFINITY;
        for n in 2..bps.len() {
            if n >= 2 && bps[n - 1] > 0.0 {
                m1 = m1.min(bps[n] / (self.k.powf(self.gamma) * bps[n - 1]));
            }
            for j in 0..n {
                if st.omega_at[j] > 0.0 {
                    m2 = m2.min(st.omega_at[n] / (2f64.powi((n - j) as i32) * st.omega_at[j]));
                }
            }
        }
        let m3 = st.tail_margin.iter().cloned().fold(f64::INFINITY, f64::min);
        let r = ConditionReport::new("breakpoint_conditions", "surgery-breakpoint-conditions").range(range);
        out.push(if m1 >= 1.0 && m2 >= 1.0 && m3 >= 1.0 && st.omega_at.get(1).is_some_and(|w| *w > 0.0) {
            r.holds(vec![("margin_growth", m1), ("margin_doubling", m2), ("margin_tail", m3), ("K", self.k)])
        } else {
            r.fails(0.0).note(format!("margins {m1}, {m2}, {m3}"))
        });
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gevrey2() -> Arc<SurgeryWeight> {
        let w = WeightFunction::gevrey(2.0).unwrap();
        let h: Majorant = Arc::new(|t: f64| t.powf(0.75));
        let cfg = SurgeryConfig {
            k: Some(2.0),
            ..SurgeryConfig::default()
        };
        SurgeryWeight::build(w, h, "t^(3/4)", 1.5, cfg).unwrap()
    }

    #[test]
    fn breakpoints_satisfy_tail_condition_analytically() {
        // h ≥ n²ω for √t and t^{3/4} means t ≥ n⁸
        let sw = gevrey2();
        let b = sw.breakpoints();
        assert_eq!(b[0], 0.0);
        for (i, x) in b.iter().enumerate().skip(1) {
            let n = (i + 1) as f64;
            assert!(*x >= n.powi(8) * (1.0 - 1e-12), "x_{} = {x}", i + 1);
        }
        assert!(*b.last().unwrap() > 1e12);
    }

    #[test]
    fn first_interval_is_the_base_weight() {
        let sw = gevrey2();
        let x2 = sw.breakpoints()[1];
        for x in [0.0, 1e-3, 1.0, x2 * 0.999] {
            assert_eq!(sw.eval(x).unwrap(), x.sqrt());
        }
    }

    #[test]
    fn all_grid_checks_pass() {
        let sw = gevrey2();
        for r in sw.verify() {
            assert!(r.is_holds(), "{r:?}");
        }
    }

    #[test]
    fn continuity_is_exact() {
        let sw = gevrey2();
        let b = sw.breakpoints();
        for x in &b[1..6] {
            let left = sw.eval(x * (1.0 - 1e-15)).unwrap();
            let at = sw.eval(*x).unwrap();
            assert!((at - left).abs() <= 1e-9 * at.max(1.0));
        }
    }

    #[test]
    fn lazy_extension_past_x_max() {
        let sw = gevrey2();
        let n0 = sw.breakpoints().len();
        let v = sw.eval(1e20).unwrap();
        assert!(v > 1e10);
        assert!(sw.breakpoints().len() > n0);
        assert!(sw.is_valid());
    }

    #[test]
    fn invalid_after_tail_violation() {
        // h = 10ω eventually fails n²ω ≤ h once n > 3
        let w = WeightFunction::gevrey(2.0).unwrap();
        let h: Majorant = Arc::new(|t: f64| 10.0 * t.sqrt() + t.powf(0.75).min(1e3));
        let cfg = SurgeryConfig {
            k: Some(2.0),
            x_max: 10.0,
            ..SurgeryConfig::default()
        };
        let r = SurgeryWeight::build(w, h, "bad", 1.5, cfg);
        assert!(r.is_err());
    }

    #[test]
    fn usable_as_weight_function() {
        let sw = gevrey2();
        let w = WeightFunction::surgery(sw.clone());
        assert_eq!(w.eval(1e6).unwrap(), sw.eval(1e6).unwrap());
        assert_eq!(w.is_normalized(), sw.base().is_normalized());
    }
}
