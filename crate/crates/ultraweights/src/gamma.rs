//! The growth index `γ(ω) = sup{γ > 0 : (P_{ω,γ})}` with
//! `(P_{ω,γ}): ∃K > 1, limsup ω(K^γ t)/ω(t) < K`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::WeightMatrix;
use crate::numeric::log_grid;
use crate::report::ConditionReport;
use crate::weight::{WeightCheckConfig, WeightCondition, WeightFunction};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GammaConfig {
    pub gamma_max: f64,
    pub tol: f64,
    /// Required relative gap below `K` for the strict limsup inequality.
    pub margin: f64,
    pub k_points: usize,
    pub k_max: f64,
    pub tail_lo: f64,
    pub tail_hi: f64,
    pub tail_points: usize,
    /// Re-run with `tail_hi × 10` and compare brackets.
    pub stability_check: bool,
}

impl Default for GammaConfig {
    fn default() -> Self {
        GammaConfig {
            gamma_max: 10.0,
            tol: 0.05,
            margin: 0.02,
            k_points: 40,
            k_max: 64.0,
            tail_lo: 1e2,
            tail_hi: 1e8,
            tail_points: 400,
            stability_check: true,
        }
    }
}

impl GammaConfig {
    /// `K_i = K_max^{i/n}`, ascending.
    pub fn k_grid(&self) -> Vec<f64> {
        (1..=self.k_points)
            .map(|i| self.k_max.powf(i as f64 / self.k_points as f64))
            .collect()
    }

    /// Last half of the tail grid, where the limsup is read off.
    fn window(&self) -> Vec<f64> {
        let g = log_grid(self.tail_lo, self.tail_hi, self.tail_points);
        g[g.len() / 2..].to_vec()
    }

    /// Factor by which a failure point under-reports the index: for
    /// `ω(K^γ t)/ω(t) = K^{γ/s}` the test fails from `γ = s(1 + ln(1−m)/ln K_max)`.
    fn upper_inflation(&self) -> f64 {
        1.0 / (1.0 + (1.0 - self.margin).ln() / self.k_max.ln())
    }
}

/// Bracket for `γ(ω)`.
#[derive(Debug, Clone, Serialize)]
pub struct GammaEstimate {
    pub lower: f64,
    /// `+∞` when `exceeds_max`.
    pub upper: f64,
    /// `(γ, K)` for every γ declared admissible.
    pub witness_k: Vec<(f64, f64)>,
    pub exceeds_max: bool,
    pub stable: bool,
    pub notes: Vec<String>,
    pub config: GammaConfig,
}

impl GammaEstimate {
    pub fn contains(&self, g: f64) -> bool {
        self.lower <= g && g <= self.upper
    }

    /// The smallest stored `K` for some admissible `γ' ≥ γ`.
    pub fn witness_at(&self, gamma: f64) -> Option<f64> {
        self.witness_k
            .iter()
            .filter(|(g, _)| *g >= gamma)
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, k)| *k)
    }
}

/// Cached `ω` on the tail window.
struct Window {
    ts: Vec<f64>,
    omega: Vec<f64>,
}

impl Window {
    fn new(w: &WeightFunction, cfg: &GammaConfig) -> Result<Self> {
        let ts = cfg.window();
        let omega = w.eval_many(&ts)?;
        if omega.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Degenerate("weight vanishes on the tail window".into()));
        }
        Ok(Window { ts, omega })
    }
}

/// Outcome of one `(P_{ω,γ})` test.
#[derive(Debug, Clone)]
struct PTest {
    k: Option<f64>,
    notes: Vec<String>,
}

fn p_test(w: &WeightFunction, win: &Window, gamma: f64, cfg: &GammaConfig) -> PTest {
    if gamma <= 0.0 {
        return PTest {
            k: Some(cfg.k_grid()[0]),
            notes: vec![],
        };
    }
    let ks = cfg.k_grid();
    let results: Vec<std::result::Result<bool, String>> = ks
        .par_iter()
        .map(|&k| {
            let scale = k.powf(gamma);
            let bound = k * (1.0 - cfg.margin);
            for (t, o) in win.ts.iter().zip(&win.omega) {
                match w.eval(scale * t) {
                    Ok(v) if v <= bound * o => {}
                    Ok(_) => return Ok(false),
                    Err(e) => return Err(format!("K = {k:.4}: {e}")),
                }
            }
            Ok(true)
        })
        .collect();
    let mut notes = Vec::new();
    for (k, r) in ks.iter().zip(&results) {
        match r {
            Ok(true) => return PTest { k: Some(*k), notes },
            Ok(false) => {}
            Err(e) => {
                if notes.is_empty() {
                    notes.push(format!("evaluation failure counted as failing K ({e})"));
                }
            }
        }
    }
    PTest { k: None, notes }
}

/// `K` from the grid making `(P_{ω,γ})` hold on the tail window, if any.
pub fn property_witness(w: &WeightFunction, gamma: f64, cfg: &GammaConfig) -> Result<Option<f64>> {
    let win = Window::new(w, cfg)?;
    Ok(p_test(w, &win, gamma, cfg).k)
}

fn bisect(w: &WeightFunction, cfg: &GammaConfig) -> Result<GammaEstimate> {
    let win = Window::new(w, cfg)?;
    let (mut lo, mut hi) = (0.0f64, cfg.gamma_max);
    let mut witness_k = vec![(0.0, cfg.k_grid()[0])];
    let mut notes = Vec::new();
    while hi - lo > cfg.tol {
        let mid = 0.5 * (lo + hi);
        let t = p_test(w, &win, mid, cfg);
        notes.extend(t.notes);
        match t.k {
            Some(k) => {
                witness_k.push((mid, k));
                lo = mid;
            }
            None => hi = mid,
        }
    }
    let mut exceeds_max = false;
    if hi >= cfg.gamma_max {
        let t = p_test(w, &win, cfg.gamma_max, cfg);
        notes.extend(t.notes);
        if let Some(k) = t.k {
            witness_k.push((cfg.gamma_max, k));
            lo = cfg.gamma_max;
            exceeds_max = true;
        }
    }
    notes.dedup();
    let upper = if exceeds_max { f64::INFINITY } else { hi * cfg.upper_inflation() };
    Ok(GammaEstimate {
        lower: lo,
        upper,
        witness_k,
        exceeds_max,
        stable: true,
        notes,
        config: *cfg,
    })
}

/// Bisection on `γ ∈ [0, γ_max]` using that `(P_{ω,γ})` passes to smaller γ
/// with the same `K`.
pub fn estimate_gamma(w: &WeightFunction, cfg: &GammaConfig) -> Result<GammaEstimate> {
    let mut est = bisect(w, cfg)?;
    if cfg.stability_check {
        let wide = GammaConfig {
            tail_hi: cfg.tail_hi * 10.0,
            tail_points: cfg.tail_points + cfg.tail_points / 6,
            stability_check: false,
            ..*cfg
        };
        match bisect(w, &wide) {
            Ok(e2) => {
                let moved = (e2.lower - est.lower).abs() > cfg.tol
                    || (e2.exceeds_max != est.exceeds_max)
                    || (!est.exceeds_max && (e2.upper - est.upper).abs() > cfg.tol * cfg.upper_inflation());
                if moved {
                    est.stable = false;
                    est.notes.push(format!(
                        "bracket moved to [{:.4}, {:.4}] with tail end {:.1e}",
                        e2.lower, e2.upper, wide.tail_hi
                    ));
                }
            }
            Err(e) => {
                est.stable = false;
                est.notes.push(format!("stability re-run failed: {e}"));
            }
        }
    }
    Ok(est)
}

/// Index identities checked by bracket overlap or verdict agreement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IndexIdentity {
    /// `(ω_snq) ⇔ γ > 1`.
    SnqCharacterization,
    /// `(ω₁) ⇔ γ > 0`.
    Omega1Characterization,
    /// `γ(ω) = γ((ω⋆)^ι) + 1`.
    UpperConjugateShift,
    /// `γ(ω) = γ(ω_{W^x}) = γ(ω_{w^x}) + 1`.
    MatrixRows { x: f64 },
    /// `γ(ω) + 1 = γ((ω^ι)_⋆)`.
    LowerEnvelopeShift,
    /// `γ(ω_{Ŵ^x}) = γ(ω) + 1`.
    HatRows { x: f64 },
    /// `γ(ω^{1/s}) = s γ(ω)`.
    Scaling { s: f64 },
}

impl IndexIdentity {
    pub fn tag(&self) -> &'static str {
        match self {
            IndexIdentity::SnqCharacterization => "snq",
            IndexIdentity::Omega1Characterization => "om1",
            IndexIdentity::UpperConjugateShift => "upper-shift",
            IndexIdentity::MatrixRows { .. } => "matrix-rows",
            IndexIdentity::LowerEnvelopeShift => "lower-shift",
            IndexIdentity::HatRows { .. } => "hat-rows",
            IndexIdentity::Scaling { .. } => "scaling",
        }
    }

    pub fn statement(&self) -> &'static str {
        match self {
            IndexIdentity::SnqCharacterization => "index-strong-nonquasianalyticity",
            IndexIdentity::Omega1Characterization => "index-omega1",
            IndexIdentity::UpperConjugateShift => "index-upper-conjugate-shift",
            IndexIdentity::MatrixRows { .. } => "index-matrix-rows",
            IndexIdentity::LowerEnvelopeShift => "index-lower-envelope-shift",
            IndexIdentity::HatRows { .. } => "index-hat-rows",
            IndexIdentity::Scaling { .. } => "index-scaling",
        }
    }

    pub fn parse(tag: &str) -> Result<Self> {
        Ok(match tag {
            "snq" => IndexIdentity::SnqCharacterization,
            "om1" => IndexIdentity::Omega1Characterization,
            "upper-shift" => IndexIdentity::UpperConjugateShift,
            "matrix-rows" => IndexIdentity::MatrixRows { x: 1.0 },
            "lower-shift" => IndexIdentity::LowerEnvelopeShift,
            "hat-rows" => IndexIdentity::HatRows { x: 1.0 },
            "scaling" => IndexIdentity::Scaling { s: 2.0 },
            _ => return Err(Error::InvalidInput(format!("unknown index identity '{tag}'"))),
        })
    }
}

/// Rows of the associated matrix are tabulated this far; the extension
/// generator covers larger indices.
const ROW_P_MAX: usize = 64;

fn overlap(a: (f64, f64), b: (f64, f64), tol: f64) -> bool {
    a.0 <= b.1 + tol && b.0 <= a.1 + tol
}

fn shifted(e: &GammaEstimate, by: f64, scale: f64) -> (f64, f64) {
    (e.lower * scale + by, e.upper * scale + by)
}

fn bracket_report(
    r: ConditionReport,
    lhs: (f64, f64),
    rhs: (f64, f64),
    tol: f64,
    stable: bool,
) -> ConditionReport {
    let ws = vec![
        ("lhs_lower", lhs.0),
        ("lhs_upper", lhs.1),
        ("rhs_lower", rhs.0),
        ("rhs_upper", rhs.1),
    ];
    let r = if overlap(lhs, rhs, tol) {
        r.holds(ws)
    } else {
        let mut r = r.fails(rhs.0);
        r.witnesses = ws.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        r
    };
    if stable {
        r
    } else {
        r.note("an estimate was unstable under tail extension")
    }
}

fn verdict_vs_threshold(
    r: ConditionReport,
    cond: &ConditionReport,
    est: &GammaEstimate,
    threshold: f64,
    tol: f64,
) -> ConditionReport {
    let index_says = if est.lower > threshold + tol {
        Some(true)
    } else if est.upper <= threshold + tol {
        Some(false)
    } else {
        None
    };
    let cond_says = if cond.is_holds() {
        Some(true)
    } else if cond.is_fails() {
        Some(false)
    } else {
        None
    };
    let ws = vec![
        ("gamma_lower", est.lower),
        ("gamma_upper", est.upper),
        ("condition_holds", if cond.is_holds() { 1.0 } else { 0.0 }),
    ];
    match (index_says, cond_says) {
        (Some(a), Some(b)) if a == b => r.holds(ws),
        (Some(_), Some(_)) => {
            let mut r = r.fails(est.lower);
            r.witnesses = ws.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
            r
        }
        _ => r.inconclusive(format!(
            "index bracket [{:.4}, {:.4}] or condition verdict undecided",
            est.lower, est.upper
        )),
    }
}

/// Checks one index identity on `w`.
pub fn verify_index_identity(kind: IndexIdentity, w: &WeightFunction, cfg: &GammaConfig) -> ConditionReport {
    let r = ConditionReport::new(kind.tag(), kind.statement()).range(format!(
        "gamma in [0, {}], tail [{:.0e}, {:.0e}], K in (1, {}]",
        cfg.gamma_max, cfg.tail_lo, cfg.tail_hi, cfg.k_max
    ));
    match identity_inner(kind, w, cfg, r.clone()) {
        Ok(rep) => rep,
        Err(e) => r.inconclusive(e.to_string()),
    }
}

fn identity_inner(kind: IndexIdentity, w: &WeightFunction, cfg: &GammaConfig, r: ConditionReport) -> Result<ConditionReport> {
    let tol = 2.0 * cfg.tol;
    let base = estimate_gamma(w, cfg)?;
    let wcfg = WeightCheckConfig::default();
    Ok(match kind {
        IndexIdentity::SnqCharacterization => {
            let c = w.check_condition(WeightCondition::OmSnq, &wcfg);
            verdict_vs_threshold(r, &c, &base, 1.0, cfg.tol)
        }
        IndexIdentity::Omega1Characterization => {
            let c = w.check_condition(WeightCondition::Om1, &wcfg);
            verdict_vs_threshold(r, &c, &base, 0.0, cfg.tol)
        }
        IndexIdentity::UpperConjugateShift => {
            if base.upper <= 1.0 {
                return Ok(r.inconclusive("requires gamma > 1"));
            }
            let d = estimate_gamma(&w.upper_conjugate_reciprocal(), cfg)?;
            bracket_report(r, shifted(&base, 0.0, 1.0), shifted(&d, 1.0, 1.0), tol, base.stable && d.stable)
        }
        IndexIdentity::MatrixRows { x } => {
            let m = WeightMatrix::build(w, &[x], ROW_P_MAX)?;
            let big = estimate_gamma(&WeightFunction::from_sequence(m.row(x)?.clone()), cfg)?;
            let small = estimate_gamma(&WeightFunction::from_sequence(m.small_row(x)?), cfg)?;
            let a = bracket_report(r.clone(), shifted(&base, 0.0, 1.0), shifted(&big, 0.0, 1.0), tol, base.stable && big.stable);
            let b = bracket_report(r, shifted(&base, 0.0, 1.0), shifted(&small, 1.0, 1.0), tol, base.stable && small.stable);
            if a.is_holds() && b.is_holds() {
                a.witness("small_row_lower", small.lower).witness("small_row_upper", small.upper)
            } else if a.is_holds() {
                b
            } else {
                a
            }
        }
        IndexIdentity::LowerEnvelopeShift => {
            let d = estimate_gamma(&w.lower_envelope_of_reciprocal(), cfg)?;
            bracket_report(r, shifted(&base, 1.0, 1.0), shifted(&d, 0.0, 1.0), tol, base.stable && d.stable)
        }
        IndexIdentity::HatRows { x } => {
            let m = WeightMatrix::build(w, &[x], ROW_P_MAX)?;
            let d = estimate_gamma(&WeightFunction::from_sequence(m.hat_row(x)?), cfg)?;
            bracket_report(r, shifted(&base, 1.0, 1.0), shifted(&d, 0.0, 1.0), tol, base.stable && d.stable)
        }
        IndexIdentity::Scaling { s } => {
            let d = estimate_gamma(&w.ramified(1.0 / s)?, cfg)?;
            let lhs = shifted(&base, 0.0, s);
            bracket_report(r, lhs, shifted(&d, 0.0, 1.0), tol * s.max(1.0), base.stable && d.stable)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> GammaConfig {
        GammaConfig {
            stability_check: false,
            ..GammaConfig::default()
        }
    }

    #[test]
    fn gevrey_bracket_contains_s() {
        for s in [1.5, 2.0, 4.0] {
            let e = estimate_gamma(&WeightFunction::gevrey(s).unwrap(), &GammaConfig::default()).unwrap();
            assert!(e.contains(s), "s={s}: [{}, {}]", e.lower, e.upper);
            assert!(e.upper - e.lower <= 0.1 * s.max(1.0), "s={s}: [{}, {}]", e.lower, e.upper);
            assert!(e.stable && !e.exceeds_max);
        }
    }

    #[test]
    fn gevrey_failure_point_matches_ratio_analysis() {
        // ratio K^{γ/s} ≤ 0.98 K first fails above s(1 + ln 0.98 / ln 64)
        let e = estimate_gamma(&WeightFunction::gevrey(4.0).unwrap(), &quick()).unwrap();
        let edge = 4.0 * (1.0 + 0.98f64.ln() / 64f64.ln());
        assert!(e.lower <= edge && edge <= e.lower + 0.05 + 1e-12);
    }

    #[test]
    fn log_power_exceeds_max() {
        let e = estimate_gamma(&WeightFunction::log_power(2.0).unwrap(), &quick()).unwrap();
        assert!(e.exceeds_max);
        assert!(e.upper.is_infinite());
    }

    #[test]
    fn gamma_zero_is_admissible() {
        let w = WeightFunction::gevrey(2.0).unwrap();
        assert!(property_witness(&w, 0.0, &quick()).unwrap().is_some());
    }

    #[test]
    fn witnesses_pass_to_smaller_gamma_with_same_k() {
        let w = WeightFunction::gevrey(2.0).unwrap();
        let cfg = quick();
        let e = estimate_gamma(&w, &cfg).unwrap();
        let win = Window::new(&w, &cfg).unwrap();
        for &(g, k) in &e.witness_k {
            for frac in [0.25, 0.5, 0.9] {
                let g2 = g * frac;
                let scale = k.powf(g2);
                assert!(win
                    .ts
                    .iter()
                    .zip(&win.omega)
                    .all(|(t, o)| w.eval(scale * t).unwrap() <= k * 0.98 * o));
            }
        }
    }

    #[test]
    fn scaling_identity_for_gevrey() {
        let r = verify_index_identity(IndexIdentity::Scaling { s: 2.0 }, &WeightFunction::gevrey(2.0).unwrap(), &quick());
        assert!(r.is_holds(), "{r:?}");
        assert!(r.get("rhs_lower").unwrap() <= 4.0 && 4.0 <= r.get("rhs_upper").unwrap());
    }

    #[test]
    fn snq_agrees_with_index_above_one() {
        let r = verify_index_identity(IndexIdentity::SnqCharacterization, &WeightFunction::gevrey(1.5).unwrap(), &quick());
        assert!(r.is_holds(), "{r:?}");
    }

    #[test]
    fn equivalent_weights_share_the_index() {
        // 2√t + log(1 + t) ∼ √t
        let ts = log_grid(1e-3, 1e14, 2000);
        let vals: Vec<f64> = ts.iter().map(|t| 2.0 * t.sqrt() + (1.0 + t).ln()).collect();
        let w = WeightFunction::tabulated("equiv", &ts, &vals).unwrap();
        let a = estimate_gamma(&w, &quick()).unwrap();
        let b = estimate_gamma(&WeightFunction::gevrey(2.0).unwrap(), &quick()).unwrap();
        assert!(overlap((a.lower, a.upper), (b.lower, b.upper), 0.1), "{a:?}");
    }
}
