use std::f64::consts::PI;

use proptest::prelude::*;
use ultraweights::conjugate::upper_conjugate;
use ultraweights::sequence::WeightSequence;
use ultraweights::weight::{QuadConfig, WeightFunction};

// ∫_{μ}^∞ log(u/μ) u^{-2} du = 1/μ, so κ(1) of ω_M is Σ_p 1/μ_p.
#[test]
fn kappa_of_sequence_weight_is_reciprocal_quotient_sum() {
    let w = WeightFunction::from_sequence(WeightSequence::gevrey(2.0, 256).unwrap());
    let k = w.kappa(1.0, QuadConfig::default()).unwrap();
    assert!((k.value - PI * PI / 6.0).abs() < 1e-9, "{}", k.value);
}

// ∫_0^∞ e^{v/s} e^{-v} dv = s/(s − 1).
#[test]
fn kappa_of_power_weight() {
    for s in [1.5, 2.0, 4.0] {
        let k = WeightFunction::gevrey(s).unwrap().kappa(1.0, QuadConfig::default()).unwrap();
        assert!((k.value - s / (s - 1.0)).abs() < 1e-9, "s = {s}: {}", k.value);
    }
}

#[test]
fn kappa_diverges_for_linear_weight() {
    assert!(WeightFunction::gevrey(1.0).unwrap().kappa(1.0, QuadConfig::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // sup over t, so no sample of ω(t) − st may exceed it
    #[test]
    fn sequence_upper_conjugate_dominates_samples(log_s in -4.0f64..2.0, log_t in -2.0f64..12.0) {
        let w = WeightFunction::from_sequence(WeightSequence::gevrey(2.0, 256).unwrap());
        let s = log_s.exp();
        let t = log_t.exp();
        let c = upper_conjugate(&w, s).unwrap();
        let sample = w.eval(t).unwrap() - s * t;
        prop_assert!(sample <= c.value + 1e-12 * c.value.abs().max(1.0));
        let at_arg = w.eval(c.arg).unwrap() - s * c.arg;
        prop_assert!((at_arg - c.value).abs() <= 1e-9 * c.value.abs().max(1.0));
    }
}
