//! Acceptance criteria, one PASS/FAIL line each.
//!
//! The lines are written past the test harness capture, so they always show.

use std::io::Write;
use std::process::Command;

use ultraweights::conjugate::{biconjugate, upper_conjugate, young_conjugate};
use ultraweights::flat::{check_flatness_estimate, FlatConfig, FlatFunction, RayContext};
use ultraweights::gamma::{estimate_gamma, verify_index_identity, GammaConfig, IndexIdentity};
use ultraweights::jets::y_operator_coefficients;
use ultraweights::matrix::{ramification_discrepancy, MatrixCondition, Omega7Form, RamifiedMatrix, WeightMatrix};
use ultraweights::numeric::{lin_grid, log_grid};
use ultraweights::sequence::WeightSequence;
use ultraweights::verify::{agreement, complexification_checks, first_row_recovers_sequence, ramified_closed_form, sandwich_battery, standard_surgery, y_symbolic_check};
use ultraweights::weight::WeightFunction;
use ultraweights::{ConditionReport, Verdict};

const ORACLE_TOL: f64 = 1e-9;
const ORACLE_P_MAX: usize = 20_000;
const BICONJUGATE_TOL: f64 = 1e-6;
const CLOSED_FORM_TOL: f64 = 1e-8;
const GAMMA_WIDTH: f64 = 0.1;
const GAMMA_MAX: f64 = 10.0;
const IDENTITY_TOL: f64 = 0.2;
const MG_SPAN: usize = 128;
const FIRST_ROW_TOL: f64 = 1e-6;
const RAMIFICATION_TOL: f64 = 1e-8;
const RAMIFIED_J_MAX: u64 = 40;
const RAMIFIED_INDEX_TOL: f64 = 0.15;
const SECTOR_POINTS: usize = 200;
const FLAT_N_MAX: u32 = 20;
const RANDOM_JETS: u64 = 100;
const Y_BOUND_J: usize = 20;
const SURGERY_GAMMA: f64 = 1.5;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn holds(r: &ConditionReport) -> bool {
    r.verdict == Verdict::HoldsWithWitness
}

fn fails(r: &ConditionReport) -> bool {
    r.verdict == Verdict::FailsWithCounterexample
}

/// All reports hold; otherwise names the first one that does not.
fn all_hold<'a>(rs: impl IntoIterator<Item = (String, &'a ConditionReport)>) -> Outcome {
    let mut n = 0;
    for (subject, r) in rs {
        if !holds(r) {
            return outcome(false, format!("{subject}: {} is {:?} {:?} {:?}", r.condition, r.verdict, r.counterexample, r.notes));
        }
        n += 1;
    }
    outcome(true, format!("{n} checks hold"))
}

fn c1_oracles() -> Outcome {
    let seqs = [
        WeightSequence::factorial(ORACLE_P_MAX).unwrap(),
        WeightSequence::gevrey(2.0, ORACLE_P_MAX).unwrap(),
        WeightSequence::gevrey(1.5, ORACLE_P_MAX).unwrap(),
    ];
    let mut reps = Vec::new();
    for m in &seqs {
        let om = agreement("associated", "associated", &log_grid(0.1, 1e4, 100), ORACLE_TOL, |t| {
            Ok((m.associated(t)?, m.associated_brute(t)?))
        });
        let h = agreement("h", "h", &log_grid(1e-2, 10.0, 100), ORACLE_TOL, |t| Ok((m.h(t)?, m.h_brute(t)?)));
        reps.push((m.label().to_string(), om));
        reps.push((m.label().to_string(), h));
    }
    all_hold(reps.iter().map(|(s, r)| (s.clone(), r)))
}

fn c2_biconjugacy() -> Outcome {
    let reps: Vec<(String, ConditionReport)> = [WeightFunction::gevrey(2.0).unwrap(), WeightFunction::log_power(2.0).unwrap()]
        .iter()
        .map(|w| {
            let r = agreement("biconjugate", "biconjugate", &lin_grid(0.5, 8.0, 50), BICONJUGATE_TOL, |y| {
                Ok((biconjugate(w, y)?.value, w.phi(y)?))
            });
            (w.label().to_string(), r)
        })
        .collect();
    all_hold(reps.iter().map(|(s, r)| (s.clone(), r)))
}

fn c3_closed_forms() -> Outcome {
    let sqrt = WeightFunction::gevrey(2.0).unwrap();
    let mut reps = vec![(
        "t^(1/2)".to_string(),
        agreement("upper", "upper", &log_grid(1e-3, 1e3, 50), CLOSED_FORM_TOL, |s| {
            Ok((upper_conjugate(&sqrt, s)?.value, 0.25 / s))
        }),
    )];
    for s in [1.5, 2.0, 4.0] {
        let w = WeightFunction::gevrey(s).unwrap();
        let r = agreement("young", "young", &log_grid(1.0 / s, 1e4 / s, 40), CLOSED_FORM_TOL, |x| {
            Ok((young_conjugate(&w, x)?.value, s * x * (s * x).ln() - s * x))
        });
        reps.push((format!("gevrey s = {s}"), r));
    }
    all_hold(reps.iter().map(|(s, r)| (s.clone(), r)))
}

fn c4_gamma() -> Outcome {
    let cfg = GammaConfig { gamma_max: GAMMA_MAX, ..GammaConfig::default() };
    let mut detail = Vec::new();
    for s in [1.5, 2.0, 4.0] {
        let e = estimate_gamma(&WeightFunction::gevrey(s).unwrap(), &cfg).unwrap();
        detail.push(format!("s = {s}: [{:.3}, {:.3}]", e.lower, e.upper));
        if !(e.contains(s) && e.upper - e.lower <= GAMMA_WIDTH) {
            return outcome(false, detail.join("; "));
        }
    }
    let e = estimate_gamma(&WeightFunction::log_power(2.0).unwrap(), &cfg).unwrap();
    detail.push(format!("logpow: exceeds_max = {}", e.exceeds_max));
    outcome(e.exceeds_max, detail.join("; "))
}

fn c5_index_identities() -> Outcome {
    let cfg = GammaConfig { stability_check: false, ..GammaConfig::default() };
    // identities compare brackets with combined tolerance 2 · tol
    if 2.0 * cfg.tol > IDENTITY_TOL {
        return outcome(false, format!("combined tolerance {} exceeds {IDENTITY_TOL}", 2.0 * cfg.tol));
    }
    let kinds = [
        IndexIdentity::UpperConjugateShift,
        IndexIdentity::LowerEnvelopeShift,
        IndexIdentity::MatrixRows { x: 1.0 },
        IndexIdentity::HatRows { x: 1.0 },
        IndexIdentity::Scaling { s: 2.0 },
    ];
    let mut reps = Vec::new();
    for s in [2.0, 4.0] {
        let w = WeightFunction::gevrey(s).unwrap();
        for k in kinds {
            reps.push((format!("gevrey s = {s}, {}", k.tag()), verify_index_identity(k, &w, &cfg)));
        }
    }
    all_hold(reps.iter().map(|(s, r)| (s.clone(), r)))
}

fn c6_sandwiches() -> Outcome {
    let reps = sandwich_battery();
    if let Some((s, r)) = reps.iter().find(|(_, r)| fails(r)) {
        return outcome(false, format!("{s}: counterexample in {} at {:?}", r.condition, r.counterexample));
    }
    all_hold(reps.iter().map(|(s, r)| (s.clone(), r)))
}

fn c7_matrix_laws() -> Outcome {
    let mut reps = Vec::new();
    for w in [WeightFunction::gevrey(4.0).unwrap(), WeightFunction::log_power(2.0).unwrap()] {
        let m = WeightMatrix::build(&w, &[0.25, 0.5, 1.0, 2.0, 4.0], MG_SPAN).unwrap();
        reps.push((w.label().to_string(), m.check_condition(MatrixCondition::MgRoumieu)));
    }
    for m in [WeightSequence::factorial(2000).unwrap(), WeightSequence::gevrey(2.0, 2000).unwrap()] {
        let r = first_row_recovers_sequence(&m);
        // the helper's threshold must not be looser than the pinned one
        let worst = r.witnesses.iter().find(|w| w.0 == "max_rel_error").map_or(f64::INFINITY, |w| w.1);
        let r = if holds(&r) && worst > FIRST_ROW_TOL { r.fails(worst) } else { r };
        reps.push((m.label().to_string(), r));
    }
    for w in [WeightFunction::gevrey(2.0).unwrap(), WeightFunction::log_power(2.0).unwrap()] {
        for (l, s) in [(1.0, 2.0), (2.0, 0.5), (0.5, 3.0)] {
            let r = ConditionReport::new("ramification", "ramification");
            let r = match ramification_discrepancy(&w, l, s, 64) {
                Ok(d) if d <= RAMIFICATION_TOL => r.holds(vec![("max_log_error", d)]),
                Ok(d) => r.fails(d),
                Err(e) => r.inconclusive(e.to_string()),
            };
            reps.push((format!("{} (l, s) = ({l}, {s})", w.label()), r));
        }
    }
    all_hold(reps.iter().map(|(s, r)| (s.clone(), r)))
}

fn c8_ramified_matrix() -> Outcome {
    let g2 = WeightFunction::gevrey(2.0).unwrap();
    let rm = RamifiedMatrix::build(&g2, 1.0, &[0.5, 1.0, 2.0], RAMIFIED_J_MAX as usize).unwrap();
    let mut reps = Vec::new();
    for q in [2, 3] {
        reps.push((format!("q = {q}"), rm.check_sandwich(q, RAMIFIED_J_MAX)));
    }
    let sandwich = all_hold(reps.iter().map(|(s, r)| (s.clone(), r)));
    if !sandwich.pass {
        return sandwich;
    }
    let q = 2.0;
    let rq = RamifiedMatrix::build(&g2, q, &[1.0], 256).unwrap();
    let w = WeightFunction::from_sequence(rq.s_hat_q(1.0).unwrap());
    let e = estimate_gamma(&w, &GammaConfig::default()).unwrap();
    let want = q * 2.0 - q + 1.0;
    let pass = e.lower - RAMIFIED_INDEX_TOL <= want && want <= e.upper + RAMIFIED_INDEX_TOL;
    outcome(pass, format!("{}; index bracket [{:.3}, {:.3}] vs {want}", sandwich.detail, e.lower, e.upper))
}

fn c9_flat_function() -> Outcome {
    let mut reps = Vec::new();
    for a in [0.5, 1.0] {
        let f = FlatFunction::new(&WeightFunction::gevrey(4.0).unwrap(), FlatConfig { a, ..FlatConfig::default() }).unwrap();
        let grid = f.sector_grid();
        if grid.len() != SECTOR_POINTS {
            return outcome(false, format!("sector grid has {} points", grid.len()));
        }
        reps.push((format!("a = {a}"), f.check_two_sided_bound(&grid)));
        reps.push((format!("a = {a}"), f.check_flat_at_zero(1e-12, FLAT_N_MAX)));
        reps.push((format!("a = {a}"), f.check_mesh_halving(0)));
        reps.push((format!("a = {a}"), f.check_finite_difference()));
    }
    all_hold(reps.iter().map(|(s, r)| (s.clone(), r)))
}

fn c10_flatness_estimate() -> Outcome {
    let grid = log_grid(1e-6, 1e-2, 16);
    let f = FlatFunction::new(&WeightFunction::gevrey(4.0).unwrap(), FlatConfig::default()).unwrap();
    let ray = f.check_flatness_on_ray(&grid, 6);
    let ctx = RayContext {
        weight: WeightFunction::gevrey(4.0).unwrap(),
        l: 2.0,
        s_grid: grid,
        j_max: 6,
    };
    let one = |_s: f64, j: usize| {
        let mut v = vec![f64::NEG_INFINITY; j + 1];
        v[0] = 0.0;
        Ok(v)
    };
    let control = check_flatness_estimate(&one, &ctx);
    outcome(
        holds(&ray) && fails(&control),
        format!("flat function {:?}, constant 1 {:?}", ray.verdict, control.verdict),
    )
}

fn c11_jets() -> Outcome {
    let [dbar, norm] = complexification_checks(0);
    let mut reps = vec![
        (format!("{RANDOM_JETS} jets"), dbar),
        (format!("{RANDOM_JETS} jets"), norm),
        ("q = 2".to_string(), ramified_closed_form()),
        ("q <= 3, j <= 6".to_string(), y_symbolic_check()),
    ];
    for q in 1..=3 {
        let r = match y_operator_coefficients(q, Y_BOUND_J) {
            Ok(c) => c.check_bound(),
            Err(e) => ConditionReport::new("y-bound", "y-bound").inconclusive(e.to_string()),
        };
        reps.push((format!("bound q = {q}"), r));
    }
    all_hold(reps.iter().map(|(s, r)| (s.clone(), r)))
}

fn c12_surgery() -> Outcome {
    let sw = match standard_surgery() {
        Ok(s) => s,
        Err(e) => return outcome(false, e.to_string()),
    };
    let reps = sw.verify();
    let checks = all_hold(reps.iter().map(|r| ("surgery".to_string(), r)));
    if !checks.pass {
        return checks;
    }
    let e = estimate_gamma(&WeightFunction::surgery(sw), &GammaConfig::default()).unwrap();
    outcome(
        e.lower >= SURGERY_GAMMA,
        format!("{}; index bracket [{:.3}, {:.3}]", checks.detail, e.lower, e.upper),
    )
}

fn c13_omega7() -> Outcome {
    let idx = [0.25, 0.5, 1.0, 2.0, 4.0];
    let sigma = WeightMatrix::build(&WeightFunction::log_power(2.0).unwrap(), &idx, 64).unwrap();
    let gev = WeightMatrix::build(&WeightFunction::gevrey(2.0).unwrap(), &idx, 64).unwrap();
    let mut detail = Vec::new();
    let mut pass = true;
    for form in [Omega7Form::Doubling, Omega7Form::Square] {
        let (a, b) = (sigma.check_omega7(form), gev.check_omega7(form));
        pass &= holds(&a) && fails(&b) && b.counterexample.is_some();
        detail.push(format!("{}: logpow {:?}, gevrey {:?}", form.tag(), a.verdict, b.verdict));
    }
    outcome(pass, detail.join("; "))
}

fn verify_all_stdout() -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_ultraweights"))
        .args(["--seed", "0", "verify", "--suite", "all"])
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "verify --suite all exited with {:?}", out.status.code());
    out.stdout
}

fn c14_determinism() -> Outcome {
    let (a, b) = (verify_all_stdout(), verify_all_stdout());
    outcome(a == b && !a.is_empty(), format!("{} bytes per report", a.len()))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 14] = [
        ("associated-function and h oracles", c1_oracles),
        ("young biconjugacy", c2_biconjugacy),
        ("closed-form conjugates", c3_closed_forms),
        ("growth index brackets", c4_gamma),
        ("growth index identities", c5_index_identities),
        ("conjugate sandwiches", c6_sandwiches),
        ("matrix laws", c7_matrix_laws),
        ("ramified matrix", c8_ramified_matrix),
        ("flat function", c9_flat_function),
        ("flatness estimate", c10_flatness_estimate),
        ("jets", c11_jets),
        ("weight surgery", c12_surgery),
        ("omega7 on matrices", c13_omega7),
        ("determinism", c14_determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        let line = format!("{} {:>2} {name}: {}\n", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        // bypasses the harness capture so the lines show without --nocapture
        std::io::stdout().write_all(line.as_bytes()).unwrap();
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
