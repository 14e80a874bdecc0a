//! Weight sequences in log domain and their associated functions.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::numeric::ln_factorial;
use crate::report::ConditionReport;

/// Default number of tabulated indices.
pub const DEFAULT_P_MAX: usize = 256;

/// Largest index a closed-form generator is asked for.
const CLOSED_FORM_LIMIT: u64 = 1 << 50;
/// Largest index a cached numerical generator is asked for.
const CACHED_LIMIT: u64 = 1 << 20;

/// On-demand source of `log M_p` beyond the tabulated window.
#[derive(Clone)]
pub struct SeqGenerator {
    label: String,
    f: Arc<dyn Fn(u64) -> f64 + Send + Sync>,
    cache: Option<Arc<Mutex<HashMap<u64, f64>>>>,
    limit: u64,
}

impl fmt::Debug for SeqGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SeqGenerator({})", self.label)
    }
}

impl SeqGenerator {
    /// Closed-form generator, cheap enough to call without caching.
    pub fn closed_form(label: impl Into<String>, f: impl Fn(u64) -> f64 + Send + Sync + 'static) -> Self {
        SeqGenerator {
            label: label.into(),
            f: Arc::new(f),
            cache: None,
            limit: CLOSED_FORM_LIMIT,
        }
    }

    /// Expensive generator whose values are memoized.
    pub fn cached(label: impl Into<String>, f: impl Fn(u64) -> f64 + Send + Sync + 'static) -> Self {
        SeqGenerator {
            label: label.into(),
            f: Arc::new(f),
            cache: Some(Arc::new(Mutex::new(HashMap::new()))),
            limit: CACHED_LIMIT,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn eval(&self, p: u64) -> f64 {
        match &self.cache {
            None => (self.f)(p),
            Some(c) => {
                if let Some(v) = c.lock().expect("generator cache poisoned").get(&p) {
                    return *v;
                }
                let v = (self.f)(p);
                c.lock().expect("generator cache poisoned").insert(p, v);
                v
            }
        }
    }

    /// Composes `g(p, log M_p)` on top of this generator.
    pub fn map(&self, label: impl Into<String>, g: impl Fn(u64, f64) -> f64 + Send + Sync + 'static) -> Self {
        let inner = self.clone();
        let mut out = SeqGenerator::closed_form(label, move |p| g(p, inner.eval(p)));
        out.limit = self.limit;
        out
    }
}

/// Positive sequence `(M_p)` stored as `log M_p`.
#[derive(Clone, Debug)]
pub struct WeightSequence {
    label: String,
    log_values: Vec<f64>,
    generator: Option<SeqGenerator>,
    normalized: bool,
    log_convex: bool,
}

/// Which sequence-level condition to check.
#[derive(Clone, Debug)]
pub enum SequenceCondition {
    Lc,
    Slc,
    Mg,
    Nq,
    Beta1,
    Gamma1,
    MixedMg(WeightSequence),
}

impl SequenceCondition {
    pub fn tag(&self) -> &'static str {
        match self {
            SequenceCondition::Lc => "lc",
            SequenceCondition::Slc => "slc",
            SequenceCondition::Mg => "mg",
            SequenceCondition::Nq => "nq",
            SequenceCondition::Beta1 => "beta1",
            SequenceCondition::Gamma1 => "gamma1",
            SequenceCondition::MixedMg(_) => "mixed_mg",
        }
    }
}

/// Relation tested by [`WeightSequence::compare`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SequenceRelation {
    Le,
    Precsim,
    Approx,
}

/// Tail-window settings for asymptotic verdicts.
#[derive(Clone, Copy, Debug)]
pub struct TailConfig {
    /// Relative margin a trend must clear to count as decided.
    pub margin: f64,
}

impl Default for TailConfig {
    fn default() -> Self {
        TailConfig { margin: 0.05 }
    }
}

fn second_difference_ok(v: &[f64]) -> std::result::Result<f64, usize> {
    let mut min_d = f64::INFINITY;
    for j in 1..v.len().saturating_sub(1) {
        let d = v[j - 1] + v[j + 1] - 2.0 * v[j];
        let scale = 1f64.max(v[j].abs()).max(v[j + 1].abs());
        if d < -1e-12 * scale {
            return Err(j);
        }
        min_d = min_d.min(d);
    }
    Ok(if min_d.is_finite() { min_d } else { 0.0 })
}

impl WeightSequence {
    pub fn from_log_values(label: impl Into<String>, log_values: Vec<f64>) -> Result<Self> {
        if log_values.len() < 2 {
            return Err(Error::InvalidInput("a weight sequence needs at least two entries".into()));
        }
        if let Some(p) = log_values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("log M_{p} is not finite")));
        }
        let normalized = log_values[0] == 0.0;
        let log_convex = second_difference_ok(&log_values).is_ok();
        Ok(WeightSequence {
            label: label.into(),
            log_values,
            generator: None,
            normalized,
            log_convex,
        })
    }

    /// Tabulates `gen` on `0..=p_max` and keeps it for extension.
    pub fn from_generator(label: impl Into<String>, gen: SeqGenerator, p_max: usize) -> Result<Self> {
        let v: Vec<f64> = (0..=p_max as u64).map(|p| gen.eval(p)).collect();
        let mut s = WeightSequence::from_log_values(label, v)?;
        s.generator = Some(gen);
        Ok(s)
    }

    /// Attaches an extension generator to an already tabulated sequence.
    pub fn with_extension(mut self, gen: SeqGenerator) -> Self {
        self.generator = Some(gen);
        self
    }

    /// `M_p = (p!)^s`.
    pub fn gevrey(s: f64, p_max: usize) -> Result<Self> {
        if !(s > 0.0) {
            return Err(Error::InvalidInput(format!("gevrey exponent must be positive, got {s}")));
        }
        let gen = SeqGenerator::closed_form(format!("gevrey-seq:s={s}"), move |p| s * ln_factorial(p));
        WeightSequence::from_generator(format!("gevrey-seq:s={s}"), gen, p_max)
    }

    /// `M_p = p!`.
    pub fn factorial(p_max: usize) -> Result<Self> {
        let gen = SeqGenerator::closed_form("factorial", ln_factorial);
        WeightSequence::from_generator("factorial", gen, p_max)
    }

    /// Sequence with a closed-form `log M_p`.
    pub fn from_fn(label: impl Into<String>, f: impl Fn(u64) -> f64 + Send + Sync + 'static, p_max: usize) -> Result<Self> {
        let label = label.into();
        WeightSequence::from_generator(label.clone(), SeqGenerator::closed_form(label, f), p_max)
    }

    /// Reads a CSV file with header `p,logM`.
    pub fn load_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
        let headers = rdr.headers().map_err(|e| Error::Io(e.to_string()))?.clone();
        if headers.len() != 2 || &headers[0] != "p" || &headers[1] != "logM" {
            return Err(Error::InvalidInput(format!(
                "{}: expected header p,logM",
                path.display()
            )));
        }
        let mut vals = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
            let p: usize = rec[0]
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad index on row {}", i + 1)))?;
            if p != i {
                return Err(Error::InvalidInput(format!("indices must be 0,1,2,...; row {} has p={p}", i + 1)));
            }
            let v: f64 = rec[1]
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad logM on row {}", i + 1)))?;
            vals.push(v);
        }
        WeightSequence::from_log_values(format!("custom:{}", path.display()), vals)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["p", "logM"]).map_err(|e| Error::Io(e.to_string()))?;
        for (p, v) in self.log_values.iter().enumerate() {
            wr.write_record([p.to_string(), format!("{v:.17e}")])
                .map_err(|e| Error::Io(e.to_string()))?;
        }
        wr.flush().map_err(|e| Error::Io(e.to_string()))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }

    /// Last tabulated index.
    pub fn p_max(&self) -> usize {
        self.log_values.len() - 1
    }

    pub fn generator(&self) -> Option<&SeqGenerator> {
        self.generator.as_ref()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Log-convexity on the tabulated window.
    pub fn is_log_convex(&self) -> bool {
        self.log_convex
    }

    /// Largest index available, counting generator extension.
    pub fn index_limit(&self) -> u64 {
        match &self.generator {
            Some(g) => g.limit(),
            None => self.p_max() as u64,
        }
    }

    pub fn log_m(&self, p: u64) -> Result<f64> {
        if (p as usize) < self.log_values.len() {
            return Ok(self.log_values[p as usize]);
        }
        match &self.generator {
            Some(g) if p <= g.limit() => Ok(g.eval(p)),
            _ => Err(Error::Truncation {
                index: p,
                context: format!("{} has no entry beyond the tabulated window", self.label),
            }),
        }
    }

    /// `log μ_p = log M_p - log M_{p-1}`, with `μ_0 = 1`.
    pub fn log_mu(&self, p: u64) -> Result<f64> {
        if p == 0 {
            return Ok(0.0);
        }
        Ok(self.log_m(p)? - self.log_m(p - 1)?)
    }

    /// `log μ_p` on the tabulated window.
    pub fn quotients(&self) -> Vec<f64> {
        let mut q = vec![0.0];
        q.extend(self.log_values.windows(2).map(|w| w[1] - w[0]));
        q
    }

    fn derive_with(&self, label: String, f: impl Fn(u64, f64) -> f64 + Send + Sync + Clone + 'static) -> Result<Self> {
        let vals: Vec<f64> = self
            .log_values
            .iter()
            .enumerate()
            .map(|(p, v)| f(p as u64, *v))
            .collect();
        let mut out = WeightSequence::from_log_values(label.clone(), vals)?;
        if let Some(g) = &self.generator {
            out.generator = Some(g.map(label, f));
        }
        Ok(out)
    }

    /// `m_p = M_p / p!`.
    pub fn divided_by_factorial(&self) -> Result<Self> {
        self.derive_with(format!("({})/p!", self.label), |p, v| v - ln_factorial(p))
    }

    /// `p! M_p`.
    pub fn factorial_shifted(&self) -> Result<Self> {
        self.derive_with(format!("p!*({})", self.label), |p, v| v + ln_factorial(p))
    }

    /// `(M_p)^{1/s}`.
    pub fn power(&self, s: f64) -> Result<Self> {
        if !(s > 0.0) {
            return Err(Error::InvalidInput(format!("power exponent must be positive, got {s}")));
        }
        self.derive_with(format!("({})^(1/{s})", self.label), move |_, v| v / s)
    }

    /// `(M_p)^q`.
    pub fn raised(&self, q: f64) -> Result<Self> {
        if !(q > 0.0) {
            return Err(Error::InvalidInput(format!("power exponent must be positive, got {q}")));
        }
        self.derive_with(format!("({})^{q}", self.label), move |_, v| v * q)
    }

    /// Largest log-convex minorant on the tabulated window (lower convex hull).
    pub fn log_convex_minorant(&self) -> Result<Self> {
        let v = &self.log_values;
        let n = v.len();
        let half = n / 2;
        if half >= 1 && v[n - 1] / (n - 1) as f64 <= v[half] / half as f64 {
            return Err(Error::Degenerate(format!(
                "(M_p)^(1/p) does not grow on the window of {}",
                self.label
            )));
        }
        let mut hull: Vec<usize> = Vec::with_capacity(n);
        for c in 0..n {
            while hull.len() >= 2 {
                let a = hull[hull.len() - 2];
                let b = hull[hull.len() - 1];
                // b is dropped only when it lies strictly above the chord a-c
                let cross = (b - a) as f64 * (v[c] - v[a]) - (c - a) as f64 * (v[b] - v[a]);
                if cross < 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(c);
        }
        let mut out = vec![0.0; n];
        for w in hull.windows(2) {
            let (a, b) = (w[0], w[1]);
            for (p, o) in out.iter_mut().enumerate().take(b + 1).skip(a) {
                let lam = (p - a) as f64 / (b - a) as f64;
                *o = if p == a {
                    v[a]
                } else if p == b {
                    v[b]
                } else {
                    v[a] + lam * (v[b] - v[a])
                };
            }
        }
        WeightSequence::from_log_values(format!("({})^lc", self.label), out)
    }

    /// `#{p ≥ 1 : μ_p ≤ t}` for log-convex sequences.
    pub(crate) fn count_below(&self, log_t: f64) -> Result<u64> {
        let tab = &self.log_values;
        let last = self.p_max();
        let mu_last = tab[last] - tab[last - 1];
        if mu_last > log_t {
            // binary search on the nondecreasing tabulated quotients
            let (mut lo, mut hi) = (0usize, last);
            while hi - lo > 1 {
                let mid = (lo + hi) / 2;
                if tab[mid] - tab[mid - 1] <= log_t {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(lo as u64);
        }
        let Some(g) = &self.generator else {
            return Err(Error::Truncation {
                index: last as u64,
                context: format!("all tabulated quotients of {} lie below t", self.label),
            });
        };
        let limit = g.limit();
        let mu = |p: u64| g.eval(p) - g.eval(p - 1);
        let mut lo = last as u64;
        let mut step = last.max(1) as u64;
        let mut hi = lo + step;
        loop {
            if hi > limit {
                if mu(limit) <= log_t {
                    return Err(Error::Truncation {
                        index: limit,
                        context: format!("generator of {} exhausted", self.label),
                    });
                }
                hi = limit;
                break;
            }
            if mu(hi) > log_t {
                break;
            }
            lo = hi;
            step *= 2;
            hi = lo + step;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if mu(mid) <= log_t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }

    /// `ω_M(t) = sup_p log(t^p / M_p)`.
    ///
    /// Log-convex input uses the quotient formula; otherwise a direct sup over
    /// the tabulated window, which errors when the sup sits at the last index.
    pub fn associated(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::InvalidInput(format!("t must be nonnegative, got {t}")));
        }
        if t == 0.0 {
            return Ok(-self.log_values[0]);
        }
        if !self.log_convex {
            return self.associated_brute(t);
        }
        let lt = t.ln();
        let n = self.count_below(lt)?;
        let base = -self.log_values[0];
        if n == 0 {
            return Ok(base);
        }
        // Σ_{p ≤ n} (log t - log μ_p) = n log t - (log M_n - log M_0)
        Ok(n as f64 * lt - self.log_m(n)?)
    }

    /// Direct `sup_p (p log t - log M_p)` over the tabulated window.
    pub fn associated_brute(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(-self.log_values[0]);
        }
        let lt = t.ln();
        let (mut best, mut arg) = (f64::NEG_INFINITY, 0usize);
        for (p, v) in self.log_values.iter().enumerate() {
            let c = p as f64 * lt - v;
            if c > best {
                best = c;
                arg = p;
            }
        }
        if arg == self.p_max() {
            return Err(Error::Truncation {
                index: arg as u64,
                context: format!("sup for {} attained at the last tabulated index", self.label),
            });
        }
        Ok(best)
    }

    /// `h_M(t) = inf_k M_k t^k = exp(-ω_M(1/t))`.
    pub fn h(&self, t: f64) -> Result<f64> {
        Ok((-self.log_h(t)?).exp().recip())
    }

    /// `log h_M(t) = -ω_M(1/t)`.
    pub fn log_h(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::InvalidInput(format!("t must be positive, got {t}")));
        }
        Ok(-self.associated(1.0 / t)?)
    }

    /// Brute-force `inf_k M_k t^k` over the tabulated window.
    pub fn h_brute(&self, t: f64) -> Result<f64> {
        let lt = t.ln();
        let (mut best, mut arg) = (f64::INFINITY, 0usize);
        for (k, v) in self.log_values.iter().enumerate() {
            let c = v + k as f64 * lt;
            if c < best {
                best = c;
                arg = k;
            }
        }
        if arg == self.p_max() {
            return Err(Error::Truncation {
                index: arg as u64,
                context: format!("inf for {} attained at the last tabulated index", self.label),
            });
        }
        Ok(best.exp())
    }

    /// Checks one sequence condition on the tabulated window.
    pub fn check_condition(&self, cond: &SequenceCondition, cfg: TailConfig) -> ConditionReport {
        let v = &self.log_values;
        let pm = self.p_max();
        let range = format!("p in [0, {pm}]");
        match cond {
            SequenceCondition::Lc => {
                let r = ConditionReport::new("lc", "log-convexity").range(range);
                match second_difference_ok(v) {
                    Ok(d) => r.holds(vec![("min_second_difference", d)]),
                    Err(j) => r.fails(j as f64),
                }
            }
            SequenceCondition::Slc => {
                let r = ConditionReport::new("slc", "strong-log-convexity").range(range);
                let m: Vec<f64> = v.iter().enumerate().map(|(p, x)| x - ln_factorial(p as u64)).collect();
                match second_difference_ok(&m) {
                    Ok(d) => r.holds(vec![("min_second_difference", d)]),
                    Err(j) => r.fails(j as f64),
                }
            }
            SequenceCondition::Mg => mg_check("mg", v, v, cfg).range(range),
            SequenceCondition::MixedMg(n) => {
                let len = v.len().min(n.log_values.len());
                mg_check("mixed_mg", &v[..len], &n.log_values[..len], cfg)
                    .range(format!("p in [0, {}]", len - 1))
            }
            SequenceCondition::Nq => {
                let r = ConditionReport::new("nq", "non-quasianalyticity").range(range);
                match nq_sum(v, cfg) {
                    Tail::Converges { total, .. } => r.holds(vec![("sum_bound", total)]),
                    Tail::Diverges { at } => r.fails(at as f64),
                    Tail::Undecided(why) => r.inconclusive(why),
                }
            }
            SequenceCondition::Beta1 => beta1_check(v, cfg).range(range),
            SequenceCondition::Gamma1 => gamma1_check(v, cfg).range(range),
        }
    }

    /// Compares `self` (as `M`) against `other` (as `N`).
    pub fn compare(&self, other: &WeightSequence, relation: SequenceRelation, cfg: TailConfig) -> ConditionReport {
        let len = self.log_values.len().min(other.log_values.len());
        let (a, b) = (&self.log_values[..len], &other.log_values[..len]);
        let range = format!("p in [0, {}]", len - 1);
        match relation {
            SequenceRelation::Le => {
                let r = ConditionReport::new("le", "pointwise-order").range(range);
                match (0..len).find(|&p| a[p] > b[p] + 1e-12 * 1f64.max(b[p].abs())) {
                    Some(p) => r.fails(p as f64),
                    None => r.holds(vec![("C", 1.0)]),
                }
            }
            SequenceRelation::Precsim => precsim(a, b, cfg).range(range),
            SequenceRelation::Approx => {
                let f = precsim(a, b, cfg);
                let g = precsim(b, a, cfg);
                let r = ConditionReport::new("approx", "sequence-equivalence").range(range);
                match (f.is_holds(), g.is_holds()) {
                    (true, true) => r.holds(vec![
                        ("C_forward", f.get("C").unwrap_or(1.0)),
                        ("C_backward", g.get("C").unwrap_or(1.0)),
                    ]),
                    _ if f.is_fails() => r.fails(f.counterexample.unwrap_or(0.0)),
                    _ if g.is_fails() => r.fails(g.counterexample.unwrap_or(0.0)),
                    _ => r.inconclusive("one direction undecided"),
                }
            }
        }
    }
}

fn precsim(a: &[f64], b: &[f64], cfg: TailConfig) -> ConditionReport {
    let len = a.len();
    let r = ConditionReport::new("precsim", "sequence-domination");
    let f = |p: usize| (a[p] - b[p]) / p as f64;
    let half = (len - 1) / 2;
    let (mut s1, mut s2, mut arg) = (f64::NEG_INFINITY, f64::NEG_INFINITY, 1usize);
    for p in 1..len {
        let x = f(p);
        if p <= half {
            s1 = s1.max(x);
        }
        if x > s2 {
            s2 = x;
            arg = p;
        }
    }
    if s2 <= s1 + cfg.margin * 1f64.max(s1.abs()) {
        r.holds(vec![("C", s2.max(0.0).exp())])
    } else {
        r.fails(arg as f64)
    }
}

fn mg_check(tag: &str, m: &[f64], n: &[f64], cfg: TailConfig) -> ConditionReport {
    let len = m.len();
    let r = ConditionReport::new(tag, "moderate-growth");
    let half = (len - 1) / 2;
    let (mut c_half, mut c_all, mut arg) = (f64::NEG_INFINITY, f64::NEG_INFINITY, 1usize);
    for s in 1..len {
        let mut c = f64::NEG_INFINITY;
        for j in 0..=s {
            c = c.max((m[s] - n[j] - n[s - j]) / s as f64);
        }
        if s <= half {
            c_half = c_half.max(c);
        }
        if c > c_all {
            c_all = c;
            arg = s;
        }
    }
    if c_all <= c_half + cfg.margin * 1f64.max(c_half.abs()) {
        r.holds(vec![("C", c_all.max(0.0).exp())])
    } else {
        r.fails(arg as f64)
            .note(format!("log C grows from {c_half:.4} to {c_all:.4} across the window"))
    }
}

enum Tail {
    Converges { total: f64, tail: f64 },
    Diverges { at: usize },
    Undecided(String),
}

/// `Σ_{k ≥ 1} 1/μ_k` from tabulated partial sums plus a tail bound.
fn nq_sum(v: &[f64], cfg: TailConfig) -> Tail {
    nq_tail_from(v, 1, cfg)
}

/// `Σ_{k ≥ p0} 1/μ_k`.
fn nq_tail_from(v: &[f64], p0: usize, cfg: TailConfig) -> Tail {
    let pm = v.len() - 1;
    if pm < 8 {
        return Tail::Undecided("window too short".into());
    }
    let inv_mu = |k: usize| (-(v[k] - v[k - 1])).exp();
    let partial: f64 = (p0.max(1)..=pm).map(inv_mu).sum();
    // geometric tail
    let half = pm / 2;
    let rho = (half + 1..=pm)
        .map(|k| (v[k - 1] - v[k - 2]) - (v[k] - v[k - 1]))
        .map(f64::exp)
        .fold(0.0f64, f64::max);
    if rho < 1.0 - cfg.margin {
        let tail = inv_mu(pm) * rho / (1.0 - rho);
        return Tail::Converges { total: partial + tail, tail };
    }
    // power-law tail: 1/μ_k ≈ c k^{-α}
    let lmu = |k: usize| v[k] - v[k - 1];
    let alphas: Vec<f64> = (half..=(3 * pm) / 4)
        .map(|p| (lmu(pm) - lmu(p)) / ((pm as f64).ln() - (p as f64).ln()))
        .collect();
    let amin = alphas.iter().cloned().fold(f64::INFINITY, f64::min);
    let amax = alphas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if amin > 1.0 + cfg.margin {
        let tail = inv_mu(pm) * pm as f64 / (amin - 1.0);
        Tail::Converges { total: partial + tail, tail }
    } else if amax < 1.0 - cfg.margin {
        Tail::Diverges { at: pm }
    } else {
        Tail::Undecided(format!("tail exponent in [{amin:.3}, {amax:.3}] too close to 1"))
    }
}

fn beta1_check(v: &[f64], cfg: TailConfig) -> ConditionReport {
    let r = ConditionReport::new("beta1", "beta1-quotient-growth");
    let pm = v.len() - 1;
    let lmu = |k: usize| v[k] - v[k - 1];
    let mut never_above = true;
    for q in 2..=8usize {
        let top = pm / q;
        if top < 4 {
            break;
        }
        let lo = (top / 2).max(1);
        let ratios: Vec<f64> = (lo..=top).map(|p| (lmu(q * p) - lmu(p)).exp()).collect();
        let rmin = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let rmax = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if rmin > q as f64 * (1.0 + cfg.margin) {
            return r.holds(vec![("Q", q as f64), ("liminf_ratio", rmin)]);
        }
        if rmax > q as f64 * (1.0 + 1e-9) {
            never_above = false;
        }
    }
    if never_above {
        r.fails(pm as f64).note("mu_{Qp}/mu_p never exceeds Q on the tail window")
    } else {
        r.inconclusive("quotient ratio does not clear Q by the margin")
    }
}

fn gamma1_check(v: &[f64], cfg: TailConfig) -> ConditionReport {
    let r = ConditionReport::new("gamma1", "gamma1-sum-condition");
    let pm = v.len() - 1;
    let tail = match nq_tail_from(v, pm + 1, cfg) {
        Tail::Converges { tail, .. } => tail,
        Tail::Diverges { at } => return r.fails(at as f64).note("sum of 1/mu diverges"),
        Tail::Undecided(why) => return r.inconclusive(why),
    };
    let inv_mu = |k: usize| (-(v[k] - v[k - 1])).exp();
    // suffix sums S_p = Σ_{k ≥ p} 1/μ_k
    let mut suffix = vec![0.0; pm + 2];
    suffix[pm + 1] = tail;
    for k in (1..=pm).rev() {
        suffix[k] = suffix[k + 1] + inv_mu(k);
    }
    let g: Vec<f64> = (1..=pm)
        .map(|p| (v[p] - v[p - 1]).exp() / p as f64 * suffix[p])
        .collect();
    let half = pm / 2;
    let first = g[..half].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (mut all, mut arg) = (f64::NEG_INFINITY, 1usize);
    for (i, x) in g.iter().enumerate() {
        if *x > all {
            all = *x;
            arg = i + 1;
        }
    }
    if all <= first * (1.0 + cfg.margin) {
        r.holds(vec![("sup", all)])
    } else {
        r.fails(arg as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::log_grid;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
    }

    #[test]
    fn divided_m_of_factorial_squared_is_factorial() {
        let m = WeightSequence::gevrey(2.0, 32).unwrap().divided_by_factorial().unwrap();
        assert!((m.log_values()[2] - 2f64.ln()).abs() < 1e-14);
        for p in 0..=32u64 {
            assert!((m.log_m(p).unwrap() - ln_factorial(p)).abs() < 1e-12);
        }
    }

    #[test]
    fn quotients_of_factorial() {
        let q = WeightSequence::factorial(20).unwrap().quotients();
        assert_eq!(q[0], 0.0);
        for p in 1..=20 {
            assert!((q[p] - (p as f64).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn power_halves_logs() {
        let m = WeightSequence::gevrey(2.0, 16).unwrap().power(2.0).unwrap();
        for p in 0..=16u64 {
            assert!((m.log_m(p).unwrap() - ln_factorial(p)).abs() < 1e-12);
        }
    }

    #[test]
    fn hull_of_log_convex_is_identity() {
        let m = WeightSequence::factorial(64).unwrap();
        let h = m.log_convex_minorant().unwrap();
        for p in 0..=64 {
            assert_eq!(h.log_values()[p], m.log_values()[p]);
        }
    }

    #[test]
    fn hull_of_perturbed_sequence_is_below_and_convex() {
        // (1, 10, 1·2!, 10·3!, 2·4!, ...): odd entries inflated
        let vals: Vec<f64> = (0..=50u64)
            .map(|p| ln_factorial(p) + if p % 2 == 1 { 10f64.ln() } else if p > 0 { 2f64.ln() } else { 0.0 })
            .collect();
        let m = WeightSequence::from_log_values("perturbed", vals).unwrap();
        let h = m.log_convex_minorant().unwrap();
        for p in 0..=50 {
            assert!(h.log_values()[p] <= m.log_values()[p] + 1e-12);
        }
        assert!(h.is_log_convex());
    }

    #[test]
    fn hull_matches_sup_formula() {
        let vals: Vec<f64> = (0..=60u64)
            .map(|p| 1.5 * ln_factorial(p) + if p % 3 == 1 { 1.0 } else { 0.0 })
            .collect();
        let m = WeightSequence::from_log_values("bumpy", vals).unwrap();
        let h = m.log_convex_minorant().unwrap();
        // M^lc_p = sup_t t^p exp(-ω_M(t)): log grid, then golden refinement of the
        // concave objective in log t around the best node
        for p in 1..=10u64 {
            let obj = |y: f64| Ok(p as f64 * y - m.associated_brute(y.exp())?);
            let ys: Vec<f64> = log_grid(1e-2, 300.0, 2000).iter().map(|t| t.ln()).collect();
            let i = (0..ys.len())
                .max_by(|&a, &b| obj(ys[a]).unwrap().total_cmp(&obj(ys[b]).unwrap()))
                .unwrap();
            let (lo, hi) = (ys[i.saturating_sub(1)], ys[(i + 1).min(ys.len() - 1)]);
            let (_, best) = crate::numeric::golden_max(obj, lo, hi, 1e-13, 200).unwrap();
            let hv = h.log_values()[p as usize];
            assert!(rel(best, hv) < 1e-6 || (best - hv).abs() < 1e-6, "p={p}: {best} vs {hv}");
        }
    }

    #[test]
    fn hull_rejects_non_growing_input() {
        let m = WeightSequence::from_log_values("flat", vec![0.0; 20]).unwrap();
        assert!(matches!(m.log_convex_minorant(), Err(Error::Degenerate(_))));
    }

    #[test]
    fn associated_vanishes_for_small_t() {
        let m = WeightSequence::gevrey(2.0, 64).unwrap();
        assert_eq!(m.associated(0.0).unwrap(), 0.0);
        assert_eq!(m.associated(0.5).unwrap(), 0.0);
        assert_eq!(m.associated(1.0).unwrap(), 0.0);
    }

    #[test]
    fn quotient_formula_matches_brute_force_at_ten() {
        let m = WeightSequence::gevrey(2.0, 200).unwrap();
        let a = m.associated(10.0).unwrap();
        let b = m.associated_brute(10.0).unwrap();
        assert!(rel(a, b) < 1e-9);
    }

    #[test]
    fn power_scaling_of_associated_function() {
        let m = WeightSequence::gevrey(1.5, 256).unwrap();
        let ms = m.power(2.0).unwrap();
        for t in log_grid(0.5, 20.0, 50) {
            let lhs = m.associated(t.powf(2.0)).unwrap();
            let rhs = 2.0 * ms.associated(t).unwrap();
            assert!((lhs - rhs).abs() <= 1e-9 * 1f64.max(lhs.abs()));
        }
    }

    #[test]
    fn h_is_one_for_large_t_and_matches_brute_force() {
        let m = WeightSequence::factorial(256).unwrap();
        assert_eq!(m.h(1.0).unwrap(), 1.0);
        assert_eq!(m.h(5.0).unwrap(), 1.0);
        let a = m.h(0.1).unwrap();
        let b = m.h_brute(0.1).unwrap();
        assert!(rel(a, b) < 1e-9);
    }

    #[test]
    fn h_power_identity() {
        let m = WeightSequence::gevrey(1.0, 256).unwrap();
        let s = 2.0;
        let ms = m.raised(s).unwrap();
        for t in log_grid(0.02, 3.0, 40) {
            let lhs = ms.log_h(t.powf(s)).unwrap();
            let rhs = s * m.log_h(t).unwrap();
            assert!((lhs - rhs).abs() <= 1e-9 * 1f64.max(lhs.abs()));
        }
    }

    #[test]
    fn generator_extension_beyond_window() {
        let m = WeightSequence::factorial(32).unwrap();
        // μ_p = p so ω(t) needs indices up to t
        let a = m.associated(5000.5).unwrap();
        let expected = 5000.0 * 5000.5f64.ln() - ln_factorial(5000);
        assert!(rel(a, expected) < 1e-12);
        let tab = WeightSequence::from_log_values("tab", m.log_values().to_vec()).unwrap();
        assert!(matches!(tab.associated(5000.5), Err(Error::Truncation { .. })));
    }

    #[test]
    fn slc_of_factorial_squared_and_beta1_of_factorial() {
        let cfg = TailConfig::default();
        let m2 = WeightSequence::gevrey(2.0, 256).unwrap();
        assert!(m2.check_condition(&SequenceCondition::Slc, cfg).is_holds());
        let m1 = WeightSequence::factorial(256).unwrap();
        assert!(m1.check_condition(&SequenceCondition::Beta1, cfg).is_fails());
        assert!(m2.check_condition(&SequenceCondition::Beta1, cfg).is_holds());
    }

    #[test]
    fn nq_partial_sum_oracle() {
        let cfg = TailConfig::default();
        for s in [1.5, 2.0, 3.0] {
            let m = WeightSequence::gevrey(s, 256).unwrap();
            let rep = m.check_condition(&SequenceCondition::Nq, cfg);
            assert!(rep.is_holds(), "s={s}: {rep:?}");
            // Σ_{p ≤ 10^4} p^{-s} plus the integral tail is the reference
            let n = 10_000u64;
            let mut exact: f64 = (1..=n).map(|p| (p as f64).powf(-s)).sum();
            exact += (n as f64).powf(1.0 - s) / (s - 1.0);
            let bound = rep.get("sum_bound").unwrap();
            assert!(bound >= exact * (1.0 - 1e-3), "s={s}: bound {bound} < {exact}");
            assert!(bound <= exact * 2.0);
        }
        let fact = WeightSequence::factorial(256).unwrap();
        assert!(!fact.check_condition(&SequenceCondition::Nq, cfg).is_holds());
    }

    #[test]
    fn gamma1_holds_for_gevrey() {
        let m = WeightSequence::gevrey(2.0, 256).unwrap();
        let rep = m.check_condition(&SequenceCondition::Gamma1, TailConfig::default());
        assert!(rep.is_holds(), "{rep:?}");
        // μ_p = p², so the sup is attained at p = 1 with value Σ 1/k² = π²/6
        let expected = std::f64::consts::PI.powi(2) / 6.0;
        assert!((rep.get("sup").unwrap() - expected).abs() < 1e-4);
    }

    #[test]
    fn mg_of_factorials_and_non_mg() {
        let cfg = TailConfig::default();
        let m = WeightSequence::factorial(256).unwrap();
        let rep = m.check_condition(&SequenceCondition::Mg, cfg);
        assert!(rep.is_holds());
        assert!(rep.get("C").unwrap() <= 2.0 + 1e-12);
        let q = WeightSequence::from_fn("qgevrey", |p| 0.5 * (p * p) as f64, 256).unwrap();
        assert!(q.check_condition(&SequenceCondition::Mg, cfg).is_fails());
    }

    #[test]
    fn compare_examples() {
        let cfg = TailConfig::default();
        let m = WeightSequence::factorial(200).unwrap();
        let r = m.compare(&m, SequenceRelation::Approx, cfg);
        assert!(r.is_holds());
        assert_eq!(r.get("C_forward"), Some(1.0));
        // N_p = 2^p p!: both directions are bounded
        let n = WeightSequence::from_fn("2^p p!", |p| p as f64 * 2f64.ln() + ln_factorial(p), 200).unwrap();
        let fwd = m.compare(&n, SequenceRelation::Precsim, cfg);
        let bwd = n.compare(&m, SequenceRelation::Precsim, cfg);
        assert!(fwd.is_holds() && bwd.is_holds());
        assert!((bwd.get("C").unwrap() - 2.0).abs() < 1e-12);
        // N_p = p!^2 dominates p! but not conversely
        let n2 = WeightSequence::gevrey(2.0, 200).unwrap();
        assert!(m.compare(&n2, SequenceRelation::Precsim, cfg).is_holds());
        let rev = n2.compare(&m, SequenceRelation::Precsim, cfg);
        assert!(rev.is_fails());
        assert!(rev.counterexample.unwrap() > 100.0);
    }

    #[test]
    fn precsim_witness_transfers_to_h() {
        let cfg = TailConfig::default();
        let m = WeightSequence::from_fn("3^p p!", |p| p as f64 * 3f64.ln() + ln_factorial(p), 256).unwrap();
        let n = WeightSequence::factorial(256).unwrap();
        let rep = m.compare(&n, SequenceRelation::Precsim, cfg);
        let c = rep.get("C").unwrap();
        for t in log_grid(1e-3, 10.0, 60) {
            assert!(m.log_h(t).unwrap() <= n.log_h(c * t).unwrap() + 1e-9);
        }
    }

    proptest! {
        #[test]
        fn quotient_equals_brute_on_random_log_convex(
            incs in proptest::collection::vec(0.0f64..0.5, 80),
            t in 0.01f64..50.0
        ) {
            // cumulative increasing quotients give a normalized log-convex sequence
            let mut lmu = 0.0;
            let mut v = vec![0.0];
            for d in &incs {
                lmu += d;
                let last = *v.last().unwrap();
                v.push(last + lmu);
            }
            let m = WeightSequence::from_log_values("rand", v).unwrap();
            prop_assume!(m.is_log_convex());
            match (m.associated(t), m.associated_brute(t)) {
                (Ok(a), Ok(b)) => prop_assert!((a - b).abs() <= 1e-9 * 1f64.max(a.abs())),
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "mismatch {a:?} {b:?}"),
            }
        }

        #[test]
        fn h_is_nondecreasing_and_at_most_one(s in 0.5f64..3.0, t in 1e-3f64..10.0, f in 1.0f64..5.0) {
            let m = WeightSequence::gevrey(s, 128).unwrap();
            let a = m.log_h(t).unwrap();
            let b = m.log_h(t * f).unwrap();
            prop_assert!(a <= b + 1e-12);
            prop_assert!(b <= 1e-15);
        }

        #[test]
        fn log_convex_normalized_is_supermultiplicative(s in 0.3f64..3.0, j in 0u64..60, k in 0u64..60) {
            let m = WeightSequence::gevrey(s, 128).unwrap();
            let lhs = m.log_m(j).unwrap() + m.log_m(k).unwrap();
            prop_assert!(lhs <= m.log_m(j + k).unwrap() + 1e-9);
            // (M_p)^{1/p} nondecreasing
            if j >= 1 {
                prop_assert!(m.log_m(j).unwrap() / j as f64 <= m.log_m(j + 1).unwrap() / (j + 1) as f64 + 1e-12);
            }
        }

        #[test]
        fn omega_equals_omega_of_hull(bumps in proptest::collection::vec(0.0f64..2.0, 61), t in 0.5f64..30.0) {
            let v: Vec<f64> = (0..=60u64).map(|p| 2.0 * ln_factorial(p) + if p > 0 { bumps[p as usize] } else { 0.0 }).collect();
            let m = WeightSequence::from_log_values("bumped", v).unwrap();
            let h = m.log_convex_minorant().unwrap();
            let a = m.associated_brute(t).unwrap();
            let b = h.associated(t).unwrap();
            prop_assert!((a - b).abs() <= 1e-6 * 1f64.max(a.abs()));
        }
    }
}
