//! Weight functions ω and the condition battery on them.

use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use crate::conjugate;
use crate::error::{Error, Result};
use crate::numeric::{lin_grid, log_grid};
use crate::quad::{adaptive, Estimate};
use crate::report::ConditionReport;
use crate::sequence::WeightSequence;
use crate::surgery::SurgeryWeight;

/// Concrete representation behind a [`WeightFunction`].
#[derive(Debug)]
pub enum WeightForm {
    /// `t ↦ t^{1/s}`.
    GevreyPower { s: f64 },
    /// `σ_s(t) = max{0, (log t)^s}`, `s > 1`.
    LogPower { s: f64 },
    /// `ω_M` of a weight sequence.
    FromSequence(WeightSequence),
    /// Piecewise linear in `(log t, ω)`; no extrapolation past the last node.
    Tabulated { log_t: Vec<f64>, values: Vec<f64> },
    /// `ω^s(t) = ω(t^s)`.
    Ramified { base: WeightFunction, s: f64 },
    /// `(ω⋆)^ι(t) = ω⋆(1/t)`, with value 0 at `t = 0`.
    UpperConjugateReciprocal(WeightFunction),
    /// `(ω^ι)_⋆(t) = inf_{s>0} {ω(1/s) + ts}`.
    LowerEnvelopeOfReciprocal(WeightFunction),
    Surgery(Arc<SurgeryWeight>),
    /// `κ_ω(t) = ∫_1^∞ ω(tu)/u² du`.
    Kappa(WeightFunction),
}

/// Evaluable weight function; cheap to clone.
#[derive(Debug, Clone)]
pub struct WeightFunction {
    form: Arc<WeightForm>,
    label: String,
    normalized: bool,
}

/// Conditions checked by [`WeightFunction::check_condition`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightCondition {
    Om0,
    Om1,
    Om2,
    Om3,
    Om4,
    Om5,
    Om6,
    Om7,
    OmNq,
    OmSnq,
    Dn,
}

impl WeightCondition {
    pub const ALL: [WeightCondition; 11] = [
        WeightCondition::Om0,
        WeightCondition::Om1,
        WeightCondition::Om2,
        WeightCondition::Om3,
        WeightCondition::Om4,
        WeightCondition::Om5,
        WeightCondition::Om6,
        WeightCondition::Om7,
        WeightCondition::OmNq,
        WeightCondition::OmSnq,
        WeightCondition::Dn,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            WeightCondition::Om0 => "om0",
            WeightCondition::Om1 => "om1",
            WeightCondition::Om2 => "om2",
            WeightCondition::Om3 => "om3",
            WeightCondition::Om4 => "om4",
            WeightCondition::Om5 => "om5",
            WeightCondition::Om6 => "om6",
            WeightCondition::Om7 => "om7",
            WeightCondition::OmNq => "om_nq",
            WeightCondition::OmSnq => "om_snq",
            WeightCondition::Dn => "dn",
        }
    }

    pub fn parse(tag: &str) -> Result<Self> {
        WeightCondition::ALL
            .iter()
            .copied()
            .find(|c| c.tag() == tag)
            .ok_or_else(|| Error::InvalidInput(format!("unknown weight condition '{tag}'")))
    }

    fn statement(self) -> &'static str {
        match self {
            WeightCondition::Om0 => "normalized-weight",
            WeightCondition::Om1 => "doubling-growth",
            WeightCondition::Om2 => "at-most-linear",
            WeightCondition::Om3 => "log-little-o",
            WeightCondition::Om4 => "log-convexity-of-phi",
            WeightCondition::Om5 => "sublinear",
            WeightCondition::Om6 => "moderate-growth-weight",
            WeightCondition::Om7 => "squared-argument-growth",
            WeightCondition::OmNq => "non-quasianalytic-weight",
            WeightCondition::OmSnq => "strong-non-quasianalyticity",
            WeightCondition::Dn => "dn-weight",
        }
    }
}

/// Relation tested by [`WeightFunction::compare`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightRelation {
    Preceq,
    Sim,
}

/// Grid settings for asymptotic weight checks.
#[derive(Debug, Clone, Copy)]
pub struct WeightCheckConfig {
    pub tail_lo: f64,
    pub tail_hi: f64,
    pub tail_points: usize,
    /// Relative margin a tail trend must clear.
    pub margin: f64,
    /// Margin for strict `limsup < K` inequalities.
    pub strict_margin: f64,
}

impl Default for WeightCheckConfig {
    fn default() -> Self {
        WeightCheckConfig {
            tail_lo: 1e2,
            tail_hi: 1e8,
            tail_points: 400,
            margin: 0.05,
            strict_margin: 0.02,
        }
    }
}

impl WeightCheckConfig {
    pub fn tail_grid(&self) -> Vec<f64> {
        log_grid(self.tail_lo, self.tail_hi, self.tail_points)
    }

    fn full_grid(&self) -> Vec<f64> {
        log_grid(1e-2, self.tail_hi, self.tail_points * 2)
    }

    fn range(&self) -> String {
        format!("t in [{:e}, {:e}], {} log points", self.tail_lo, self.tail_hi, self.tail_points)
    }
}

/// Sequence-sourced weights have many kinks per unit cell.
const CELL_INTERVALS: usize = 2000;

/// Quadrature settings for κ_ω and integrability checks.
#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub rel_tol: f64,
    /// Largest `log u` reached before declaring divergence.
    pub max_log_u: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            rel_tol: 1e-10,
            max_log_u: 600.0,
        }
    }
}

/// Whether the last quarter of `v` stays below the third quarter plus margin.
pub(crate) fn tail_bounded(v: &[f64], margin: f64) -> bool {
    let n = v.len();
    let q3 = v[n / 2..3 * n / 4].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let q4 = v[3 * n / 4..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    q4 <= q3 + margin * 1f64.max(q3.abs())
}

/// Whether a positive ratio decays by at least `margin` across the last half.
pub(crate) fn tail_decays(v: &[f64], margin: f64) -> bool {
    let n = v.len();
    let start = v[n / 2];
    let last = v[n - 1];
    tail_bounded(v, 0.0) && last <= (1.0 - margin) * start
}

fn argmax(ts: &[f64], v: &[f64]) -> f64 {
    let mut best = (f64::NEG_INFINITY, ts[0]);
    for (t, x) in ts.iter().zip(v) {
        if *x > best.0 {
            best = (*x, *t);
        }
    }
    best.1
}

impl WeightFunction {
    fn new(form: WeightForm, label: String, normalized: bool) -> Self {
        WeightFunction {
            form: Arc::new(form),
            label,
            normalized,
        }
    }

    /// `t ↦ t^{1/s}`; not normalized since ω(1) = 1.
    pub fn gevrey(s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidInput(format!("gevrey exponent must be positive, got {s}")));
        }
        Ok(Self::new(WeightForm::GevreyPower { s }, format!("gevrey:s={s}"), false))
    }

    pub fn log_power(s: f64) -> Result<Self> {
        if !(s > 1.0 && s.is_finite()) {
            return Err(Error::InvalidInput(format!("log-power exponent must exceed 1, got {s}")));
        }
        Ok(Self::new(WeightForm::LogPower { s }, format!("logpow:s={s}"), true))
    }

    pub fn from_sequence(seq: WeightSequence) -> Self {
        let normalized = seq.is_normalized() && seq.log_values()[1] >= 0.0 && seq.is_log_convex();
        let label = format!("fromseq:{}", seq.label());
        Self::new(WeightForm::FromSequence(seq), label, normalized)
    }

    /// Table of `(t, ω(t))` with strictly increasing positive abscissae.
    pub fn tabulated(label: impl Into<String>, ts: &[f64], values: &[f64]) -> Result<Self> {
        if ts.len() < 2 || ts.len() != values.len() {
            return Err(Error::InvalidInput("a weight table needs at least two (t, omega) rows".into()));
        }
        if ts.windows(2).any(|w| !(w[1] > w[0])) || !(ts[0] > 0.0) {
            return Err(Error::InvalidInput("table abscissae must be positive and strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidInput("table values must be finite and nonnegative".into()));
        }
        let log_t: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
        let tab = WeightForm::Tabulated { log_t, values: values.to_vec() };
        let mut w = Self::new(tab, label.into(), false);
        w.normalized = ts[0] <= 1.0 && w.eval(1.0).map(|v| v == 0.0).unwrap_or(false);
        Ok(w)
    }

    /// Reads a CSV table with header `t,omega`.
    pub fn load_table(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
        let headers = rdr.headers().map_err(|e| Error::Io(e.to_string()))?.clone();
        if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "omega" {
            return Err(Error::InvalidInput(format!("{}: expected header t,omega", path.display())));
        }
        let (mut ts, mut vs) = (Vec::new(), Vec::new());
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
            let parse = |k: usize| {
                rec[k]
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidInput(format!("bad number on row {}", i + 1)))
            };
            ts.push(parse(0)?);
            vs.push(parse(1)?);
        }
        Self::tabulated(format!("table:{}", path.display()), &ts, &vs)
    }

    /// `ω^s(t) = ω(t^s)`.
    pub fn ramified(&self, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidInput(format!("ramification exponent must be positive, got {s}")));
        }
        let label = format!("ramified:{}^{s}", self.label);
        Ok(Self::new(WeightForm::Ramified { base: self.clone(), s }, label, self.normalized))
    }

    /// `(ω⋆)^ι`.
    pub fn upper_conjugate_reciprocal(&self) -> Self {
        let label = format!("upperconj-recip:({})", self.label);
        Self::new(WeightForm::UpperConjugateReciprocal(self.clone()), label, false)
    }

    /// `(ω^ι)_⋆`.
    pub fn lower_envelope_of_reciprocal(&self) -> Self {
        let label = format!("lowerenv-recip:({})", self.label);
        Self::new(WeightForm::LowerEnvelopeOfReciprocal(self.clone()), label, false)
    }

    pub fn kappa_weight(&self) -> Self {
        let label = format!("kappa:({})", self.label);
        Self::new(WeightForm::Kappa(self.clone()), label, false)
    }

    pub fn surgery(sw: Arc<SurgeryWeight>) -> Self {
        let normalized = sw.base().is_normalized();
        let label = format!("surgery:({})", sw.base().label());
        Self::new(WeightForm::Surgery(sw), label, normalized)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn form(&self) -> &WeightForm {
        &self.form
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Sequence behind a `FromSequence` form.
    pub fn sequence(&self) -> Option<&WeightSequence> {
        match &*self.form {
            WeightForm::FromSequence(s) => Some(s),
            _ => None,
        }
    }

    /// `ω(t)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::InvalidInput(format!("weight evaluated at negative or NaN t = {t}")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        match &*self.form {
            WeightForm::GevreyPower { s } => Ok(t.powf(1.0 / s)),
            WeightForm::LogPower { s } => Ok(if t <= 1.0 { 0.0 } else { t.ln().powf(*s) }),
            WeightForm::FromSequence(seq) => seq.associated(t),
            WeightForm::Tabulated { log_t, values } => {
                let y = t.ln();
                if y < log_t[0] {
                    return if values[0] == 0.0 {
                        Ok(0.0)
                    } else {
                        Err(Error::Domain(format!("t = {t} lies below the first table node")))
                    };
                }
                let last = log_t.len() - 1;
                if y > log_t[last] {
                    return Err(Error::Domain(format!("t = {t} lies beyond the last table node")));
                }
                let i = log_t.partition_point(|&x| x <= y).clamp(1, last);
                let lam = (y - log_t[i - 1]) / (log_t[i] - log_t[i - 1]);
                Ok(values[i - 1] + lam * (values[i] - values[i - 1]))
            }
            WeightForm::Ramified { base, s } => base.eval(t.powf(*s)),
            WeightForm::UpperConjugateReciprocal(base) => Ok(conjugate::upper_conjugate(base, 1.0 / t)?.value),
            WeightForm::LowerEnvelopeOfReciprocal(base) => {
                let b = base.clone();
                Ok(conjugate::lower_envelope(&move |s: f64| b.eval(1.0 / s), t)?.value)
            }
            WeightForm::Surgery(sw) => sw.eval(t),
            WeightForm::Kappa(base) => Ok(base.kappa(t, QuadConfig::default())?.value),
        }
    }

    /// `φ_ω(y) = ω(e^y)`.
    pub fn phi(&self, y: f64) -> Result<f64> {
        self.eval(y.exp())
    }

    /// Evaluates on a grid in parallel; output order follows `ts`.
    pub fn eval_many(&self, ts: &[f64]) -> Result<Vec<f64>> {
        ts.par_iter().map(|&t| self.eval(t)).collect()
    }

    /// `κ_ω(t) = ∫_0^∞ ω(t e^v) e^{-v} dv`, summed over unit cells in `v`
    /// with a geometric tail once consecutive cells shrink.
    pub fn kappa(&self, t: f64, cfg: QuadConfig) -> Result<Estimate<f64>> {
        if t == 0.0 {
            return Ok(Estimate { value: 0.0, error: 0.0 });
        }
        if !(t > 0.0) {
            return Err(Error::InvalidInput(format!("kappa needs t >= 0, got {t}")));
        }
        let lt = t.ln();
        let (mut total, mut err) = (0.0, 0.0);
        let mut prev = f64::NAN;
        let mut ratios: Vec<f64> = Vec::new();
        let mut k = 0.0;
        while k + lt < cfg.max_log_u {
            let cell = adaptive(
                |v: f64| Ok(self.eval((lt + v).exp())? * (-v).exp()),
                k,
                k + 1.0,
                // late cells only need accuracy relative to the running total
                cfg.rel_tol * 0.01 * total,
                cfg.rel_tol * 0.01,
                CELL_INTERVALS,
            )?;
            total += cell.value;
            err += cell.error;
            if prev > 0.0 {
                ratios.push(cell.value / prev);
            }
            prev = cell.value;
            k += 1.0;
            if ratios.len() >= 3 {
                let r = ratios[ratios.len() - 3..].iter().cloned().fold(0.0, f64::max);
                if r < 0.95 {
                    let tail = cell.value * r / (1.0 - r);
                    if tail <= cfg.rel_tol * total {
                        return Ok(Estimate { value: total + tail, error: err + tail });
                    }
                }
            }
        }
        Err(Error::Divergence(format!(
            "integral of omega(tu)/u^2 for {} not settled by log u = {}",
            self.label, cfg.max_log_u
        )))
    }

    /// Basic weight-function axioms on a grid: ω(0) = 0, nondecreasing, unbounded trend.
    pub fn check_axioms(&self, cfg: &WeightCheckConfig) -> ConditionReport {
        let r = ConditionReport::new("weight", "weight-function-axioms").range(cfg.range());
        let ts = cfg.full_grid();
        let vals = match self.eval_many(&ts) {
            Ok(v) => v,
            Err(e) => return r.inconclusive(e.to_string()),
        };
        if self.eval(0.0) != Ok(0.0) {
            return r.fails(0.0);
        }
        for i in 1..ts.len() {
            if vals[i] < vals[i - 1] - 1e-12 * 1f64.max(vals[i - 1].abs()) {
                return r.fails(ts[i]);
            }
        }
        let n = vals.len();
        if vals[n - 1] <= vals[n / 2] {
            return r.inconclusive("no growth across the tail grid");
        }
        r.holds(vec![("omega_at_tail_end", vals[n - 1])])
    }

    /// Evaluates one condition of the battery on the configured grids.
    pub fn check_condition(&self, cond: WeightCondition, cfg: &WeightCheckConfig) -> ConditionReport {
        let r = ConditionReport::new(cond.tag(), cond.statement()).range(cfg.range());
        match self.check_inner(cond, cfg, r.clone()) {
            Ok(rep) => rep,
            Err(e) => r.inconclusive(e.to_string()),
        }
    }

    fn check_inner(&self, cond: WeightCondition, cfg: &WeightCheckConfig, r: ConditionReport) -> Result<ConditionReport> {
        let tail = cfg.tail_grid();
        let full = cfg.full_grid();
        let m = cfg.margin;
        Ok(match cond {
            WeightCondition::Om0 => {
                for t in lin_grid(0.0, 1.0, 21) {
                    if self.eval(t)? != 0.0 {
                        return Ok(r.fails(t));
                    }
                }
                let ax = self.check_axioms(cfg);
                if ax.is_holds() {
                    r.holds(vec![("omega_at_1", 0.0)])
                } else if let Some(t) = ax.counterexample {
                    r.fails(t)
                } else {
                    r.inconclusive("weight axioms undecided on the grid")
                }
            }
            WeightCondition::Om1 => {
                let a = self.eval_many(&full)?;
                let b = self.eval_many(&full.iter().map(|t| 2.0 * t).collect::<Vec<_>>())?;
                let ratio: Vec<f64> = a.iter().zip(&b).map(|(x, y)| y / (x + 1.0)).collect();
                if tail_bounded(&ratio, m) {
                    let l = ratio.iter().cloned().fold(1.0, f64::max);
                    r.holds(vec![("L", l)])
                } else {
                    r.fails(argmax(&full, &ratio))
                }
            }
            WeightCondition::Om2 | WeightCondition::Om5 => {
                let a = self.eval_many(&tail)?;
                let ratio: Vec<f64> = a.iter().zip(&tail).map(|(x, t)| x / t).collect();
                if cond == WeightCondition::Om2 {
                    if tail_bounded(&ratio, m) {
                        r.holds(vec![("C", ratio.iter().cloned().fold(0.0, f64::max))])
                    } else {
                        r.fails(argmax(&tail, &ratio))
                    }
                } else if tail_decays(&ratio, m) {
                    r.holds(vec![("final_ratio", ratio[ratio.len() - 1])])
                } else if ratio[ratio.len() - 1] >= ratio[ratio.len() / 2] {
                    r.fails(tail[tail.len() - 1])
                } else {
                    r.inconclusive("omega(t)/t decreases by less than the margin")
                }
            }
            WeightCondition::Om3 => {
                let a = self.eval_many(&tail)?;
                let ratio: Vec<f64> = a.iter().zip(&tail).map(|(x, t)| t.ln() / x).collect();
                if tail_decays(&ratio, m) {
                    r.holds(vec![("final_ratio", ratio[ratio.len() - 1])])
                } else if ratio[ratio.len() - 1] >= ratio[ratio.len() / 2] {
                    r.fails(tail[tail.len() - 1])
                } else {
                    r.inconclusive("log(t)/omega(t) decreases by less than the margin")
                }
            }
            WeightCondition::Om4 => {
                let ys: Vec<f64> = crate::numeric::lin_grid((1e-3f64).ln(), cfg.tail_hi.ln(), cfg.tail_points);
                let ts: Vec<f64> = ys.iter().map(|y| y.exp()).collect();
                let v = self.eval_many(&ts)?;
                let mut min_d = f64::INFINITY;
                for j in 1..v.len() - 1 {
                    let d = v[j - 1] + v[j + 1] - 2.0 * v[j];
                    if d < -1e-9 * 1f64.max(v[j].abs()) {
                        return Ok(r.fails(ts[j]));
                    }
                    min_d = min_d.min(d);
                }
                r.holds(vec![("min_second_difference", min_d)])
            }
            WeightCondition::Om6 => {
                let a = self.eval_many(&full)?;
                let mut last_fail = full[full.len() - 1];
                for k in 0..=32 {
                    let h = 2f64.powf(k as f64 / 2.0);
                    let b = self.eval_many(&full.iter().map(|t| h * t).collect::<Vec<_>>())?;
                    let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 2.0 * x - y).collect();
                    let dmax = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    if dmax <= h * (1.0 + 1e-12) && tail_bounded(&d, m) {
                        return Ok(r.holds(vec![("H", h)]));
                    }
                    last_fail = argmax(&full, &d);
                }
                r.fails(last_fail)
            }
            WeightCondition::Om7 => {
                let sq = self.eval_many(&full.iter().map(|t| t * t).collect::<Vec<_>>())?;
                let mut best: Option<(f64, f64)> = None;
                let mut last_fail = full[full.len() - 1];
                for k in 0..=16 {
                    let h = 2f64.powf(k as f64 / 2.0);
                    let b = self.eval_many(&full.iter().map(|t| h * t).collect::<Vec<_>>())?;
                    let ratio: Vec<f64> = sq.iter().zip(&b).map(|(x, y)| x / (y + 1.0)).collect();
                    if tail_bounded(&ratio, m) {
                        let c = ratio.iter().cloned().fold(1.0, f64::max);
                        if best.is_none_or(|(_, bc)| c < bc) {
                            best = Some((h, c));
                        }
                    } else {
                        last_fail = argmax(&full, &ratio);
                    }
                }
                match best {
                    Some((h, c)) => r.holds(vec![("H", h), ("C", c)]),
                    None => r.fails(last_fail),
                }
            }
            WeightCondition::OmNq => match self.kappa(1.0, QuadConfig::default()) {
                Ok(e) => r.holds(vec![("integral", e.value), ("error", e.error)]),
                Err(Error::Divergence(_)) => r.fails(QuadConfig::default().max_log_u.exp()),
                Err(e) => r.inconclusive(e.to_string()),
            },
            WeightCondition::OmSnq => {
                let half = &tail[tail.len() / 2..];
                let base = self.eval_many(half)?;
                let mut worst = half[0];
                for i in 1..=40 {
                    let k = 64f64.powf(i as f64 / 40.0);
                    let up = self.eval_many(&half.iter().map(|t| k * t).collect::<Vec<_>>())?;
                    let ratio: Vec<f64> = up.iter().zip(&base).map(|(x, y)| x / y).collect();
                    let lim = ratio.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    if lim <= k * (1.0 - cfg.strict_margin) {
                        let up2 = self.eval_many(&half.iter().map(|t| k * k * t).collect::<Vec<_>>())?;
                        let lim2 = up2.iter().zip(&base).map(|(x, y)| x / y).fold(f64::NEG_INFINITY, f64::max);
                        let rep = r.holds(vec![("K", k), ("limsup_ratio", lim), ("K2_ratio", lim2)]);
                        return Ok(if lim2 < k * k {
                            rep
                        } else {
                            rep.note("iterated K^2 bound not confirmed on the grid")
                        });
                    }
                    worst = argmax(half, &ratio);
                }
                r.fails(worst)
            }
            WeightCondition::Dn => {
                let half = &tail[tail.len() / 2..];
                let base = self.eval_many(half)?;
                let mut r = r;
                for c in [2.0, 4.0, 8.0, 16.0] {
                    let up = self.eval_many(&half.iter().map(|t| c * t).collect::<Vec<_>>())?;
                    let mut found = None;
                    let mut fail_at = half[0];
                    for k in 1..=80 {
                        let delta = 2f64.powf(-(k as f64) / 4.0);
                        let down = self.eval_many(&half.iter().map(|t| delta * t).collect::<Vec<_>>())?;
                        let viol = (0..half.len()).find(|&i| base[i] * base[i] > up[i] * down[i] * (1.0 + 1e-12));
                        match viol {
                            None => found = Some(delta),
                            Some(i) => {
                                fail_at = half[i];
                                break;
                            }
                        }
                    }
                    match found {
                        Some(d) => r = r.witness(&format!("delta_min_C{c}"), d),
                        None => return Ok(r.fails(fail_at).note(format!("no delta < 1 works for C = {c}"))),
                    }
                }
                r.holds(vec![])
            }
        })
    }

    /// `self ⪯ other` means `other = O(self)`; `Sim` checks both directions.
    pub fn compare(&self, other: &WeightFunction, relation: WeightRelation, cfg: &WeightCheckConfig) -> ConditionReport {
        let one_way = |a: &WeightFunction, b: &WeightFunction| -> Result<ConditionReport> {
            let r = ConditionReport::new("preceq", "weight-domination").range(cfg.range());
            let ts = log_grid(1.0, cfg.tail_hi, cfg.tail_points);
            let va = a.eval_many(&ts)?;
            let vb = b.eval_many(&ts)?;
            let ratio: Vec<f64> = va.iter().zip(&vb).map(|(x, y)| (y + 1.0) / (x + 1.0)).collect();
            Ok(if tail_bounded(&ratio, cfg.margin) {
                r.holds(vec![("C", ratio.iter().cloned().fold(0.0, f64::max))])
            } else {
                r.fails(argmax(&ts, &ratio))
            })
        };
        let wrap = |res: Result<ConditionReport>| {
            res.unwrap_or_else(|e| ConditionReport::new("preceq", "weight-domination").inconclusive(e.to_string()))
        };
        match relation {
            WeightRelation::Preceq => wrap(one_way(self, other)),
            WeightRelation::Sim => {
                let f = wrap(one_way(self, other));
                let g = wrap(one_way(other, self));
                let r = ConditionReport::new("sim", "weight-equivalence").range(cfg.range());
                if f.is_holds() && g.is_holds() {
                    r.holds(vec![
                        ("C_forward", f.get("C").unwrap_or(1.0)),
                        ("C_backward", g.get("C").unwrap_or(1.0)),
                    ])
                } else if f.is_fails() {
                    r.fails(f.counterexample.unwrap_or(0.0))
                } else if g.is_fails() {
                    r.fails(g.counterexample.unwrap_or(0.0))
                } else {
                    r.inconclusive("one direction undecided")
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::ln_factorial;
    use proptest::prelude::*;

    fn cfg() -> WeightCheckConfig {
        WeightCheckConfig::default()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(WeightFunction::gevrey(2.0).unwrap().eval(4.0).unwrap(), 2.0);
        let lp = WeightFunction::log_power(2.0).unwrap();
        assert!((lp.eval(std::f64::consts::E).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(lp.eval(0.5).unwrap(), 0.0);
        let seq = WeightSequence::gevrey(2.0, 200).unwrap();
        let w = WeightFunction::from_sequence(seq.clone());
        // brute-force sup over p ≤ 200
        let brute = (0..=200u64)
            .map(|p| p as f64 * 10f64.ln() - 2.0 * ln_factorial(p))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((w.eval(10.0).unwrap() - brute).abs() < 1e-12);
        assert!(w.is_normalized());
    }

    #[test]
    fn tabulated_interpolates_in_log_t_and_refuses_extrapolation() {
        let w = WeightFunction::tabulated("t", &[1.0, 10.0, 100.0], &[0.0, 1.0, 3.0]).unwrap();
        assert!(w.is_normalized());
        assert!((w.eval(10f64.sqrt()).unwrap() - 0.5).abs() < 1e-14);
        assert_eq!(w.eval(0.5).unwrap(), 0.0);
        assert!(matches!(w.eval(1000.0), Err(Error::Domain(_))));
    }

    #[test]
    fn kappa_of_square_root() {
        let w = WeightFunction::gevrey(2.0).unwrap();
        assert_eq!(w.kappa(0.0, QuadConfig::default()).unwrap().value, 0.0);
        for t in [0.5, 1.0, 7.0, 1e4] {
            let k = w.kappa(t, QuadConfig::default()).unwrap();
            let exact = 2.0 * t.sqrt();
            assert!((k.value - exact).abs() < 1e-6 * exact, "t={t}: {} vs {exact}", k.value);
            assert!(k.value >= w.eval(t).unwrap());
        }
    }

    #[test]
    fn kappa_diverges_for_linear_weight() {
        let w = WeightFunction::gevrey(1.0).unwrap();
        let cfg = QuadConfig { max_log_u: 60.0, ..QuadConfig::default() };
        assert!(matches!(w.kappa(1.0, cfg), Err(Error::Divergence(_))));
    }

    #[test]
    fn log_power_satisfies_all_but_om6() {
        let w = WeightFunction::log_power(2.0).unwrap();
        for c in WeightCondition::ALL {
            if c == WeightCondition::Dn {
                continue;
            }
            let rep = w.check_condition(c, &cfg());
            if c == WeightCondition::Om6 {
                assert!(rep.is_fails(), "om6: {rep:?}");
            } else {
                assert!(rep.is_holds(), "{}: {rep:?}", c.tag());
            }
        }
    }

    #[test]
    fn gevrey_satisfies_all_but_om7() {
        let w = WeightFunction::gevrey(2.0).unwrap();
        for c in WeightCondition::ALL {
            if matches!(c, WeightCondition::Dn | WeightCondition::Om0) {
                continue;
            }
            let rep = w.check_condition(c, &cfg());
            if c == WeightCondition::Om7 {
                assert!(rep.is_fails(), "om7: {rep:?}");
            } else {
                assert!(rep.is_holds(), "{}: {rep:?}", c.tag());
            }
        }
        // ω(1) = 1, so the normalization part fails
        assert!(w.check_condition(WeightCondition::Om0, &cfg()).is_fails());
    }

    #[test]
    fn snq_ratio_is_square_root_of_k() {
        let w = WeightFunction::gevrey(2.0).unwrap();
        let rep = w.check_condition(WeightCondition::OmSnq, &cfg());
        let k = rep.get("K").unwrap();
        assert!((rep.get("limsup_ratio").unwrap() - k.sqrt()).abs() < 1e-12 * k);
        assert!(rep.get("K2_ratio").unwrap() < k * k);
    }

    #[test]
    fn dn_holds_for_gevrey_with_delta_one_over_c() {
        let w = WeightFunction::gevrey(2.0).unwrap();
        let rep = w.check_condition(WeightCondition::Dn, &cfg());
        assert!(rep.is_holds(), "{rep:?}");
        // t ≤ sqrt(C δ) t requires δ ≥ 1/C
        assert!((rep.get("delta_min_C4").unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn om6_witness_for_gevrey_is_two_to_the_s() {
        let w = WeightFunction::gevrey(2.0).unwrap();
        assert_eq!(w.check_condition(WeightCondition::Om6, &cfg()).get("H"), Some(4.0));
    }

    #[test]
    fn compare_examples() {
        let g = WeightFunction::gevrey(2.0).unwrap();
        let l = WeightFunction::log_power(2.0).unwrap();
        let same = g.compare(&g, WeightRelation::Sim, &cfg());
        assert!(same.is_holds());
        assert_eq!(same.get("C_forward"), Some(1.0));
        assert!(g.compare(&l, WeightRelation::Preceq, &cfg()).is_holds());
        assert!(l.compare(&g, WeightRelation::Preceq, &cfg()).is_fails());
    }

    #[test]
    fn kappa_is_equivalent_to_snq_weight() {
        let w = WeightFunction::gevrey(3.0).unwrap();
        let k = w.kappa_weight();
        let small = WeightCheckConfig { tail_points: 40, ..cfg() };
        assert!(w.compare(&k, WeightRelation::Sim, &small).is_holds());
    }

    #[test]
    fn nq_implies_sublinear_on_corpus() {
        for w in [
            WeightFunction::gevrey(1.5).unwrap(),
            WeightFunction::gevrey(4.0).unwrap(),
            WeightFunction::log_power(2.0).unwrap(),
        ] {
            assert!(w.check_condition(WeightCondition::OmNq, &cfg()).is_holds());
            assert!(w.check_condition(WeightCondition::Om5, &cfg()).is_holds());
        }
    }

    #[test]
    fn om7_implies_om1() {
        let w = WeightFunction::log_power(3.0).unwrap();
        assert!(w.check_condition(WeightCondition::Om7, &cfg()).is_holds());
        assert!(w.check_condition(WeightCondition::Om1, &cfg()).is_holds());
    }

    proptest! {
        #[test]
        fn ramified_eval_is_exact(s in 0.2f64..5.0, r in 0.2f64..5.0, t in 0.0f64..1e4) {
            let w = WeightFunction::gevrey(s).unwrap();
            prop_assert_eq!(w.ramified(r).unwrap().eval(t).unwrap(), w.eval(t.powf(r)).unwrap());
        }

        #[test]
        fn concave_weights_are_subadditive(s in 1.0f64..6.0, a in 0.0f64..1e6, b in 0.0f64..1e6) {
            let w = WeightFunction::gevrey(s).unwrap();
            prop_assert!(w.eval(a + b).unwrap() <= w.eval(a).unwrap() + w.eval(b).unwrap() + 1e-9);
        }

        #[test]
        fn weights_are_monotone(s in 1.01f64..4.0, t in 0.0f64..1e6, f in 1.0f64..10.0) {
            for w in [WeightFunction::gevrey(s).unwrap(), WeightFunction::log_power(s).unwrap()] {
                prop_assert!(w.eval(t).unwrap() <= w.eval(t * f).unwrap());
            }
        }
    }
}
