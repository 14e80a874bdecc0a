//! The weight matrix `Ω = {W^l}` associated with a weight, the ramified
//! matrices `S^x`, `Ŝ^{x,q}`, and matrix-level condition checks.

use std::sync::Arc;

use rayon::prelude::*;

use crate::conjugate::{interpolate_log, young_conjugate, young_conjugate_closed_form};
use crate::error::{Error, Result};
use crate::numeric::{ln_factorial, slack};
use crate::report::ConditionReport;
use crate::sequence::{SeqGenerator, SequenceRelation, TailConfig, WeightSequence};
use crate::weight::{tail_bounded, WeightFunction};

/// Default row indices.
pub const DEFAULT_INDICES: [f64; 6] = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0];
/// Default number of tabulated entries per row.
pub const DEFAULT_P_MAX: usize = 128;

const LOG_SLACK: f64 = 1e-8;

fn same_index(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// `{W^l}` with `log W^l_j = φ*_ω(lj)/l`, tabulated for a finite index set.
#[derive(Debug, Clone)]
pub struct WeightMatrix {
    source: WeightFunction,
    indices: Vec<f64>,
    rows: Vec<WeightSequence>,
    p_max: usize,
}

/// Generator of `φ*_ω`, closed form when available, memoized otherwise.
fn conjugate_fn(w: &WeightFunction) -> Arc<dyn Fn(f64) -> f64 + Send + Sync> {
    match young_conjugate_closed_form(w) {
        Some(f) => f,
        None => {
            let w = w.clone();
            Arc::new(move |x: f64| young_conjugate(&w, x).map(|c| c.value).unwrap_or(f64::NAN))
        }
    }
}

impl WeightMatrix {
    /// Tabulates `W^l_j` for `j ≤ p_max` by numerical Young conjugates.
    ///
    /// Rows keep an extension generator: the closed-form conjugate when the
    /// source has one, else a memoized numerical conjugate.
    pub fn build(w: &WeightFunction, indices: &[f64], p_max: usize) -> Result<Self> {
        if indices.is_empty() || indices.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidInput("matrix indices must be finite positive reals".into()));
        }
        if p_max < 2 {
            return Err(Error::InvalidInput("matrix rows need p_max >= 2".into()));
        }
        let mut idx = indices.to_vec();
        idx.sort_by(f64::total_cmp);
        idx.dedup_by(|a, b| same_index(*a, *b));
        let pairs: Vec<(usize, usize)> = (0..idx.len()).flat_map(|i| (0..=p_max).map(move |p| (i, p))).collect();
        let vals: Vec<f64> = pairs
            .par_iter()
            .map(|&(i, p)| Ok(young_conjugate(w, idx[i] * p as f64)?.value / idx[i]))
            .collect::<Result<_>>()?;
        let phi = conjugate_fn(w);
        let mut rows = Vec::with_capacity(idx.len());
        for (i, &l) in idx.iter().enumerate() {
            let v = vals[i * (p_max + 1)..(i + 1) * (p_max + 1)].to_vec();
            let label = format!("W^{l}[{}]", w.label());
            let f = phi.clone();
            let gen_fn = move |p: u64| f(l * p as f64) / l;
            let gen = if young_conjugate_closed_form(w).is_some() {
                SeqGenerator::closed_form(label.clone(), gen_fn)
            } else {
                SeqGenerator::cached(label.clone(), gen_fn)
            };
            rows.push(WeightSequence::from_log_values(label, v)?.with_extension(gen));
        }
        Ok(WeightMatrix {
            source: w.clone(),
            indices: idx,
            rows,
            p_max,
        })
    }

    pub fn source(&self) -> &WeightFunction {
        &self.source
    }

    pub fn indices(&self) -> &[f64] {
        &self.indices
    }

    pub fn p_max(&self) -> usize {
        self.p_max
    }

    fn position(&self, l: f64) -> Option<usize> {
        self.indices.iter().position(|&x| same_index(x, l))
    }

    /// `W^l`.
    pub fn row(&self, l: f64) -> Result<&WeightSequence> {
        self.position(l)
            .map(|i| &self.rows[i])
            .ok_or_else(|| Error::InvalidInput(format!("index l = {l} is not tabulated")))
    }

    /// `w^l_p = W^l_p / p!`.
    pub fn small_row(&self, l: f64) -> Result<WeightSequence> {
        self.row(l)?.divided_by_factorial()
    }

    /// `Ŵ^l_p = p! W^l_p`.
    pub fn hat_row(&self, l: f64) -> Result<WeightSequence> {
        self.row(l)?.factorial_shifted()
    }

    /// Writes `l,p,logW` rows.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["l", "p", "logW"]).map_err(|e| Error::Io(e.to_string()))?;
        for (l, row) in self.indices.iter().zip(&self.rows) {
            for (p, v) in row.log_values().iter().enumerate() {
                wr.write_record([format!("{l}"), p.to_string(), format!("{v:.17e}")])
                    .map_err(|e| Error::Io(e.to_string()))?;
            }
        }
        wr.flush().map_err(|e| Error::Io(e.to_string()))
    }

    /// `W^x ≤ W^y` pointwise for `x ≤ y`.
    pub fn check_monotone(&self) -> ConditionReport {
        let r = ConditionReport::new("monotone", "matrix-monotone-in-index").range(self.range());
        for k in 1..self.rows.len() {
            let (a, b) = (self.rows[k - 1].log_values(), self.rows[k].log_values());
            if let Some(p) = (0..a.len()).find(|&p| a[p] > b[p] + slack(LOG_SLACK, a[p], b[p])) {
                return r.fails(p as f64).note(format!("between l = {} and l = {}", self.indices[k - 1], self.indices[k]));
            }
        }
        r.holds(vec![])
    }

    fn range(&self) -> String {
        format!("l in {:?}, p in [0, {}]", self.indices, self.p_max)
    }

    /// Checks one matrix condition on the tabulated window.
    pub fn check_condition(&self, cond: MatrixCondition) -> ConditionReport {
        let r = ConditionReport::new(cond.tag(), cond.statement()).range(self.range());
        match cond {
            MatrixCondition::MgRoumieu | MatrixCondition::MgBeurling => self.check_mg(r, cond),
            MatrixCondition::LRoumieu { h } => self.check_l(r, h, true),
            MatrixCondition::LBeurling { h } => self.check_l(r, h, false),
            MatrixCondition::Constant => self.check_constant(r),
            MatrixCondition::Sc => {
                for (l, row) in self.indices.iter().zip(&self.rows) {
                    if !row.is_log_convex() || !row.is_normalized() {
                        return r.fails(*l).note(format!(
                            "row l = {l}: log-convex {}, normalized {}",
                            row.is_log_convex(),
                            row.is_normalized()
                        ));
                    }
                }
                r.holds(vec![])
            }
        }
    }

    /// `W^l_{j+k} ≤ W^{2l}_j W^{2l}_k`; Beurling reads the same pairs as `(l/2, l)`.
    fn check_mg(&self, r: ConditionReport, cond: MatrixCondition) -> ConditionReport {
        let mut pairs = 0;
        let mut worst = f64::NEG_INFINITY;
        for (i, &l) in self.indices.iter().enumerate() {
            let Some(k2) = self.position(2.0 * l) else { continue };
            pairs += 1;
            let a = self.rows[i].log_values();
            let b = self.rows[k2].log_values();
            for s in 0..=self.p_max {
                for j in 0..=s {
                    let lhs = a[s];
                    let rhs = b[j] + b[s - j];
                    worst = worst.max(lhs - rhs);
                    if lhs > rhs + slack(LOG_SLACK, lhs, rhs) {
                        let at = if cond == MatrixCondition::MgRoumieu { l } else { 2.0 * l };
                        return r.fails(s as f64).note(format!("index pair at l = {at}, j = {j}, k = {}", s - j));
                    }
                }
            }
        }
        if pairs == 0 {
            return r.inconclusive("no (l, 2l) index pair tabulated");
        }
        r.holds(vec![("C", 1.0), ("max_log_excess", worst), ("pairs", pairs as f64)])
    }

    /// `h^j W^small_j ≤ D W^large_j` for some larger (Roumieu) or smaller
    /// (Beurling) tabulated index.
    fn check_l(&self, r: ConditionReport, h: f64, roumieu: bool) -> ConditionReport {
        if !(h > 0.0) {
            return r.inconclusive("h must be positive");
        }
        let n = self.indices.len();
        let (mut a_max, mut d_max, mut tested) = (1.0f64, 1.0f64, 0);
        for i in 0..n {
            let partners: Vec<usize> = if roumieu { (i + 1..n).collect() } else { (0..i).rev().collect() };
            if partners.is_empty() {
                continue;
            }
            tested += 1;
            let mut found = None;
            for k in partners {
                let (small, large) = if roumieu { (i, k) } else { (k, i) };
                let a = self.rows[small].log_values();
                let b = self.rows[large].log_values();
                let e: Vec<f64> = (0..=self.p_max).map(|j| j as f64 * h.ln() + a[j] - b[j]).collect();
                if tail_bounded(&e, 0.05) {
                    let d = e.iter().cloned().fold(0.0, f64::max).exp();
                    found = Some((self.indices[large] / self.indices[small], d));
                    break;
                }
            }
            match found {
                Some((a, d)) => {
                    a_max = a_max.max(a);
                    d_max = d_max.max(d);
                }
                None => return r.fails(self.indices[i]).note("no tabulated partner index absorbs h^j"),
            }
        }
        if tested == 0 {
            return r.inconclusive("a single tabulated index has no partner");
        }
        r.holds(vec![("A", a_max), ("D", d_max), ("h", h)])
    }

    /// `W^l ≈ W^n` for all tabulated pairs.
    fn check_constant(&self, r: ConditionReport) -> ConditionReport {
        let mut c_max = 1.0f64;
        let first = &self.rows[0];
        for (k, row) in self.rows.iter().enumerate().skip(1) {
            let rep = first.compare(row, SequenceRelation::Approx, TailConfig::default());
            if !rep.is_holds() {
                let at = rep.counterexample.unwrap_or(0.0);
                return r
                    .fails(self.indices[k])
                    .note(format!("W^{} and W^{} not equivalent (index {at})", self.indices[0], self.indices[k]));
            }
            c_max = c_max
                .max(rep.get("C_forward").unwrap_or(1.0))
                .max(rep.get("C_backward").unwrap_or(1.0));
        }
        r.holds(vec![("C", c_max)])
    }

    /// Doubling `W^l_{2j} ≤ C_l B^j W^{Al}_j` or squaring
    /// `(W^l_j)² ≤ C_l B^j W^{Al}_j`, searched over `(A, B) ∈ {1,2,4,8}²`.
    ///
    /// The squaring form also fits `D` in `j! W^l_j ≤ C (DB)^j W^{Al}_j`.
    pub fn check_omega7(&self, form: Omega7Form) -> ConditionReport {
        const GRID: [f64; 4] = [1.0, 2.0, 4.0, 8.0];
        let r = ConditionReport::new(form.tag(), form.tag()).range(self.range());
        let j_max = match form {
            Omega7Form::Doubling => self.p_max / 2,
            Omega7Form::Square => self.p_max,
        };
        let mut last_fail = None;
        for &a in &GRID {
            let ls: Vec<usize> = (0..self.indices.len())
                .filter(|&i| self.position(a * self.indices[i]).is_some())
                .collect();
            if ls.is_empty() {
                continue;
            }
            'b: for &b in &GRID {
                let mut c_max = 1.0f64;
                let mut d_max = 0.0f64;
                for &i in &ls {
                    let w = self.rows[i].log_values();
                    let wa = self.rows[self.position(a * self.indices[i]).unwrap()].log_values();
                    let lhs = |j: usize| match form {
                        Omega7Form::Doubling => w[2 * j],
                        Omega7Form::Square => 2.0 * w[j],
                    };
                    let e: Vec<f64> = (0..=j_max).map(|j| lhs(j) - j as f64 * b.ln() - wa[j]).collect();
                    if !tail_bounded(&e, 0.05) {
                        last_fail = Some((0..e.len()).fold(0, |k, j| if e[j] > e[k] { j } else { k }));
                        continue 'b;
                    }
                    let log_c = e.iter().cloned().fold(0.0, f64::max);
                    c_max = c_max.max(log_c.exp());
                    if form == Omega7Form::Square {
                        for j in 1..=j_max {
                            let x = (ln_factorial(j as u64) + w[j] - wa[j] - j as f64 * b.ln() - log_c) / j as f64;
                            d_max = d_max.max(x);
                        }
                    }
                }
                let mut rep = r.clone().holds(vec![("A", a), ("B", b), ("C_max", c_max), ("B_cap", 8.0)]);
                if form == Omega7Form::Square {
                    rep = rep.witness("D", d_max.exp());
                }
                return rep.note(format!("{} tested indices", ls.len()));
            }
        }
        match last_fail {
            Some(j) => r
                .fails(j as f64)
                .note("excess grows along the window for every (A, B) with B capped at 8"),
            None => r.inconclusive("no index pair (l, Al) tabulated"),
        }
    }
}

/// `V^{l,s} = (W^{l/s})^{1/s}`: largest log discrepancy on `j ≤ p_max`,
/// with `V` the matrix of the ramified weight `ω^s`.
pub fn ramification_discrepancy(w: &WeightFunction, l: f64, s: f64, p_max: usize) -> Result<f64> {
    let v = WeightMatrix::build(&w.ramified(s)?, &[l], p_max)?;
    let m = WeightMatrix::build(w, &[l / s], p_max)?;
    let a = v.row(l)?.log_values();
    let b = m.row(l / s)?.log_values();
    Ok(a.iter().zip(b).map(|(x, y)| (x - y / s).abs()).fold(0.0, f64::max))
}

/// Matrix conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatrixCondition {
    MgRoumieu,
    MgBeurling,
    LRoumieu { h: f64 },
    LBeurling { h: f64 },
    Constant,
    Sc,
}

impl MatrixCondition {
    pub fn tag(&self) -> &'static str {
        match self {
            MatrixCondition::MgRoumieu => "mg_roumieu",
            MatrixCondition::MgBeurling => "mg_beurling",
            MatrixCondition::LRoumieu { .. } => "L_roumieu",
            MatrixCondition::LBeurling { .. } => "L_beurling",
            MatrixCondition::Constant => "constant",
            MatrixCondition::Sc => "sc",
        }
    }

    pub fn statement(&self) -> &'static str {
        match self {
            MatrixCondition::MgRoumieu | MatrixCondition::MgBeurling => "matrix-sharp-moderate-growth",
            MatrixCondition::LRoumieu { .. } | MatrixCondition::LBeurling { .. } => "matrix-exponential-absorption",
            MatrixCondition::Constant => "matrix-constant",
            MatrixCondition::Sc => "matrix-standard-log-convex",
        }
    }

    pub fn parse(tag: &str) -> Result<Self> {
        Ok(match tag {
            "mg_roumieu" => MatrixCondition::MgRoumieu,
            "mg_beurling" => MatrixCondition::MgBeurling,
            "L_roumieu" => MatrixCondition::LRoumieu { h: 2.0 },
            "L_beurling" => MatrixCondition::LBeurling { h: 2.0 },
            "constant" => MatrixCondition::Constant,
            "sc" => MatrixCondition::Sc,
            _ => return Err(Error::InvalidInput(format!("unknown matrix condition '{tag}'"))),
        })
    }

    pub const ALL: [MatrixCondition; 6] = [
        MatrixCondition::MgRoumieu,
        MatrixCondition::MgBeurling,
        MatrixCondition::LRoumieu { h: 2.0 },
        MatrixCondition::LBeurling { h: 2.0 },
        MatrixCondition::Constant,
        MatrixCondition::Sc,
    ];
}

/// The two equivalent forms of the (ω₇) characterization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Omega7Form {
    Doubling,
    Square,
}

impl Omega7Form {
    pub fn tag(&self) -> &'static str {
        match self {
            Omega7Form::Doubling => "omega7-matrix-doubling",
            Omega7Form::Square => "omega7-matrix-square",
        }
    }
}

/// `S^x_p = exp(φ*_{ω_{w¹}}(xp)/x)` and its powers, built from `w¹ = W¹/p!`.
#[derive(Debug, Clone)]
pub struct RamifiedMatrix {
    base_weight: WeightFunction,
    /// `log (w¹)^lc` with extension, whose interpolation is `φ*_{ω_{w¹}}`.
    w1_lc: WeightSequence,
    q: f64,
    xs: Vec<f64>,
    p_max: usize,
}

impl RamifiedMatrix {
    /// Tabulates `w¹` far enough that `S^x_p` for `p ≤ p_max` and the given
    /// `x` is an interpolation of tabulated values.
    pub fn build(w: &WeightFunction, q: f64, xs: &[f64], p_max: usize) -> Result<Self> {
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::InvalidInput(format!("ramification power must be positive, got {q}")));
        }
        if xs.is_empty() || xs.iter().any(|x| !(*x > 0.0)) {
            return Err(Error::InvalidInput("ramified indices must be positive".into()));
        }
        let x_max = xs.iter().cloned().fold(0.0, f64::max);
        let window = (x_max * p_max as f64).ceil() as usize + 2;
        let base = WeightMatrix::build(w, &[1.0], window)?;
        let w1 = base.small_row(1.0)?;
        let mut w1_lc = w1.log_convex_minorant()?;
        if let Some(g) = w1.generator() {
            w1_lc = w1_lc.with_extension(g.clone());
        }
        let base_weight = WeightFunction::from_sequence(w1_lc.clone());
        let mut xs = xs.to_vec();
        xs.sort_by(f64::total_cmp);
        Ok(RamifiedMatrix {
            base_weight,
            w1_lc,
            q,
            xs,
            p_max,
        })
    }

    /// `ω_{w¹}` (of the log-convex minorant).
    pub fn base_weight(&self) -> &WeightFunction {
        &self.base_weight
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn indices(&self) -> &[f64] {
        &self.xs
    }

    /// `log S^x_p` for any `x > 0`.
    pub fn log_s(&self, x: f64, p: u64) -> Result<f64> {
        Ok(interpolate_log(&self.w1_lc, x * p as f64)? / x)
    }

    /// `S^x` tabulated to `p_max`, extended by the same interpolation.
    pub fn s(&self, x: f64) -> Result<WeightSequence> {
        let label = format!("S^{x}");
        let vals: Vec<f64> = (0..=self.p_max as u64).map(|p| self.log_s(x, p)).collect::<Result<_>>()?;
        let seq = self.w1_lc.clone();
        let gen = SeqGenerator::closed_form(label.clone(), move |p| {
            interpolate_log(&seq, x * p as f64).map(|v| v / x).unwrap_or(f64::NAN)
        });
        Ok(WeightSequence::from_log_values(label, vals)?.with_extension(gen))
    }

    /// `S^{x,q} = (S^x)^q`.
    pub fn s_q(&self, x: f64) -> Result<WeightSequence> {
        self.s(x)?.raised(self.q)
    }

    /// `Ŝ^{x,q}_p = p! (S^x_p)^q`.
    pub fn s_hat_q(&self, x: f64) -> Result<WeightSequence> {
        self.s_q(x)?.factorial_shifted()
    }

    /// Largest relative gap between the tabulated `log S^x_p` and a direct
    /// numerical Young conjugate of `ω_{w¹}` at `xp`.
    pub fn numeric_discrepancy(&self, x: f64, p_max: usize) -> Result<f64> {
        let mut worst = 0.0f64;
        for p in 0..=p_max as u64 {
            let direct = young_conjugate(&self.base_weight, x * p as f64)?.value / x;
            let tab = self.log_s(x, p)?;
            worst = worst.max((direct - tab).abs() / 1f64.max(tab.abs()));
        }
        Ok(worst)
    }

    /// `S^l_j ≤ (S^l_{qj})^{1/q} ≤ S^{2^{q−1} l}_j` for integer `q ≥ 1`.
    pub fn check_sandwich(&self, q: u32, j_max: u64) -> ConditionReport {
        let r = ConditionReport::new("ramified-sandwich", "ramified-sandwich")
            .range(format!("q = {q}, x in {:?}, j in [0, {j_max}]", self.xs));
        if q == 0 {
            return r.inconclusive("q must be at least 1");
        }
        let qf = q as f64;
        let mut min_gap = f64::INFINITY;
        for &x in &self.xs {
            let up = 2f64.powi(q as i32 - 1) * x;
            for j in 0..=j_max {
                let vals = (|| -> Result<(f64, f64, f64)> {
                    Ok((self.log_s(x, j)?, self.log_s(x, q as u64 * j)? / qf, self.log_s(up, j)?))
                })();
                let (a, b, c) = match vals {
                    Ok(v) => v,
                    Err(e) => return r.inconclusive(e.to_string()),
                };
                min_gap = min_gap.min(b - a).min(c - b);
                if a > b + slack(LOG_SLACK, a, b) || b > c + slack(LOG_SLACK, b, c) {
                    return r.fails(j as f64).note(format!("at x = {x}"));
                }
            }
        }
        r.holds(vec![("min_log_gap", min_gap)])
    }
}

/// `Ω {≈} Ŝ`: every `W^l` is dominated by some `Ŝ^{x,q}` and conversely.
pub fn check_equivalence(m: &WeightMatrix, s: &RamifiedMatrix) -> ConditionReport {
    let r = ConditionReport::new("matrix-equivalence", "matrix-roumieu-equivalence")
        .range(format!("l in {:?}, x in {:?}", m.indices(), s.indices()));
    let cfg = TailConfig::default();
    let hats: Vec<WeightSequence> = match s.indices().iter().map(|&x| s.s_hat_q(x)).collect::<Result<_>>() {
        Ok(h) => h,
        Err(e) => return r.inconclusive(e.to_string()),
    };
    let mut c_max = 1.0f64;
    for &l in m.indices() {
        let row = m.row(l).expect("index taken from the matrix");
        let hit = hats
            .iter()
            .map(|h| row.compare(h, SequenceRelation::Precsim, cfg))
            .find(|rep| rep.is_holds());
        match hit {
            Some(rep) => c_max = c_max.max(rep.get("C").unwrap_or(1.0)),
            None => return r.fails(l).note("W^l not dominated by any tabulated row"),
        }
    }
    for (h, &x) in hats.iter().zip(s.indices()) {
        let hit = m
            .indices()
            .iter()
            .map(|&l| h.compare(m.row(l).expect("tabulated"), SequenceRelation::Precsim, cfg))
            .find(|rep| rep.is_holds());
        match hit {
            Some(rep) => c_max = c_max.max(rep.get("C").unwrap_or(1.0)),
            None => return r.fails(x).note("ramified row not dominated by any W^l"),
        }
    }
    r.holds(vec![("C", c_max)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::ln_factorial;

    fn gevrey_log_w(s: f64, l: f64, j: f64) -> f64 {
        s * j * ((s * l * j).ln() - 1.0)
    }

    #[test]
    fn gevrey_rows_match_analytic_conjugate() {
        let w = WeightFunction::gevrey(4.0).unwrap();
        let m = WeightMatrix::build(&w, &DEFAULT_INDICES, 64).unwrap();
        for &l in &DEFAULT_INDICES {
            let row = m.row(l).unwrap();
            for j in 1..=64 {
                if 4.0 * l * j as f64 >= 1.0 {
                    let exact = gevrey_log_w(4.0, l, j as f64);
                    let got = row.log_values()[j];
                    assert!((got - exact).abs() <= 1e-8 * 1f64.max(exact.abs()), "l={l} j={j}");
                }
            }
        }
    }

    #[test]
    fn normalized_rows_start_at_one() {
        let w = WeightFunction::log_power(2.0).unwrap();
        let m = WeightMatrix::build(&w, &[0.5, 1.0, 2.0], 16).unwrap();
        for &l in m.indices() {
            assert_eq!(m.row(l).unwrap().log_values()[0], 0.0);
        }
    }

    #[test]
    fn sequence_source_recovers_first_row() {
        let m = WeightSequence::factorial(200).unwrap();
        let w = WeightFunction::from_sequence(m.clone());
        let mat = WeightMatrix::build(&w, &[1.0], 100).unwrap();
        for p in 0..=100 {
            let a = mat.row(1.0).unwrap().log_values()[p];
            let b = ln_factorial(p as u64);
            assert!((a - b).abs() <= 1e-6 * 1f64.max(b.abs()), "p={p}: {a} vs {b}");
        }
    }

    #[test]
    fn rows_grow_with_index_and_are_log_convex() {
        for w in [WeightFunction::gevrey(2.0).unwrap(), WeightFunction::log_power(2.0).unwrap()] {
            let m = WeightMatrix::build(&w, &DEFAULT_INDICES, 64).unwrap();
            assert!(m.check_monotone().is_holds());
            for &l in m.indices() {
                assert!(m.row(l).unwrap().is_log_convex(), "{} l={l}", w.label());
            }
        }
    }

    #[test]
    fn sharp_moderate_growth_for_gevrey_and_log_power() {
        for w in [WeightFunction::gevrey(4.0).unwrap(), WeightFunction::log_power(2.0).unwrap()] {
            let m = WeightMatrix::build(&w, &DEFAULT_INDICES, DEFAULT_P_MAX).unwrap();
            let rep = m.check_condition(MatrixCondition::MgRoumieu);
            assert!(rep.is_holds(), "{}: {rep:?}", w.label());
        }
    }

    #[test]
    fn constant_matrix_iff_moderate_growth_source() {
        let fact = WeightFunction::from_sequence(WeightSequence::factorial(600).unwrap());
        let m = WeightMatrix::build(&fact, &[0.5, 1.0, 2.0], 64).unwrap();
        assert!(m.check_condition(MatrixCondition::Constant).is_holds());
        let sigma = WeightFunction::log_power(2.0).unwrap();
        let m = WeightMatrix::build(&sigma, &[0.5, 1.0, 2.0], 64).unwrap();
        let rep = m.check_condition(MatrixCondition::Constant);
        assert!(rep.is_fails(), "{rep:?}");
    }

    #[test]
    fn exponential_absorption_for_gevrey() {
        let w = WeightFunction::gevrey(4.0).unwrap();
        let m = WeightMatrix::build(&w, &DEFAULT_INDICES, 64).unwrap();
        let rep = m.check_condition(MatrixCondition::LRoumieu { h: 2.0 });
        assert!(rep.is_holds(), "{rep:?}");
        // W^{Al}/W^l = A^{4j} absorbs 2^j as soon as A ≥ 2^{1/4}
        assert_eq!(rep.get("A"), Some(2.0));
    }

    #[test]
    fn ramification_identity() {
        for w in [WeightFunction::gevrey(2.0).unwrap(), WeightFunction::log_power(2.0).unwrap()] {
            for (l, s) in [(1.0, 2.0), (2.0, 0.5), (0.5, 3.0)] {
                let d = ramification_discrepancy(&w, l, s, 64).unwrap();
                assert!(d < 1e-8, "{} l={l} s={s}: {d}", w.label());
            }
        }
    }

    #[test]
    fn omega7_forms_separate_log_power_from_gevrey() {
        let sigma = WeightMatrix::build(&WeightFunction::log_power(2.0).unwrap(), &DEFAULT_INDICES, 64).unwrap();
        let gev = WeightMatrix::build(&WeightFunction::gevrey(2.0).unwrap(), &DEFAULT_INDICES, 64).unwrap();
        for form in [Omega7Form::Doubling, Omega7Form::Square] {
            let rep = sigma.check_omega7(form);
            assert!(rep.is_holds(), "{rep:?}");
            assert!(rep.get("B_cap").is_some());
            assert!(gev.check_omega7(form).is_fails());
        }
        // σ_2: W^l_j = exp(l j²/4), so squaring needs exactly A = 2
        assert_eq!(sigma.check_omega7(Omega7Form::Square).get("A"), Some(2.0));
        assert_eq!(sigma.check_omega7(Omega7Form::Doubling).get("A"), Some(4.0));
    }

    #[test]
    fn omega7_check_caps_b_on_a_single_index() {
        // with A = 1 only, a finite window is absorbed by a large B; the cap keeps B ≤ 8
        let gev = WeightMatrix::build(&WeightFunction::gevrey(2.0).unwrap(), &[1.0], 64).unwrap();
        let rep = gev.check_omega7(Omega7Form::Square);
        assert!(rep.is_fails(), "{rep:?}");
    }

    #[test]
    fn ramified_rows_match_numeric_conjugate() {
        let w = WeightFunction::gevrey(2.0).unwrap();
        let rm = RamifiedMatrix::build(&w, 2.0, &[0.5, 1.0, 2.0], 40).unwrap();
        for &x in rm.indices() {
            let d = rm.numeric_discrepancy(x, 40).unwrap();
            assert!(d < 1e-9, "x={x}: {d}");
        }
    }

    #[test]
    fn ramified_power_chain_is_exact() {
        let w = WeightFunction::gevrey(2.0).unwrap();
        let rm = RamifiedMatrix::build(&w, 3.0, &[1.0], 30).unwrap();
        let s = rm.s(1.0).unwrap();
        let hat = rm.s_hat_q(1.0).unwrap();
        for p in 0..=30usize {
            let expect = ln_factorial(p as u64) + 3.0 * s.log_values()[p];
            assert_eq!(hat.log_values()[p], expect);
        }
        // q = 1 reproduces p! S^x
        let rm1 = RamifiedMatrix::build(&w, 1.0, &[1.0], 30).unwrap();
        let h1 = rm1.s_hat_q(1.0).unwrap();
        let direct = rm1.s(1.0).unwrap().factorial_shifted().unwrap();
        assert_eq!(h1.log_values(), direct.log_values());
    }

    #[test]
    fn ramified_sandwich_for_small_q() {
        let w = WeightFunction::gevrey(2.0).unwrap();
        let rm = RamifiedMatrix::build(&w, 1.0, &[0.5, 1.0, 2.0], 40).unwrap();
        for q in [1, 2, 3] {
            let rep = rm.check_sandwich(q, 40);
            assert!(rep.is_holds(), "q={q}: {rep:?}");
        }
    }

    #[test]
    fn matrix_equivalent_to_ramified_hat_rows() {
        let w = WeightFunction::gevrey(2.0).unwrap();
        let m = WeightMatrix::build(&w, &[0.5, 1.0, 2.0], 64).unwrap();
        let rm = RamifiedMatrix::build(&w, 1.0, &[0.5, 1.0, 2.0, 4.0], 64).unwrap();
        let rep = check_equivalence(&m, &rm);
        assert!(rep.is_holds(), "{rep:?}");
    }

    #[test]
    fn rows_are_equivalent_weights_to_source() {
        // l ω_{W^l} ≤ ω ≤ 2l ω_{W^l} + C_l
        let w = WeightFunction::gevrey(2.0).unwrap();
        let m = WeightMatrix::build(&w, &[1.0], DEFAULT_P_MAX).unwrap();
        let row = m.row(1.0).unwrap();
        let mut c = 0.0f64;
        for t in crate::numeric::log_grid(1.0, 1e8, 60) {
            let a = row.associated(t).unwrap();
            let o = w.eval(t).unwrap();
            assert!(a <= o + 1e-9 * o.max(1.0));
            c = c.max(o - 2.0 * a);
        }
        assert!(c.is_finite() && c < 10.0);
    }
}
