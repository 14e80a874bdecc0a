//! Text descriptors for weights and sequences.
//!
//! Weights: `gevrey:s=<real>`, `logpow:s=<real>`, `fromseq:<sequence>`,
//! `table:<csv path>`, `ramified:<weight>^<real>`.
//! Sequences: `gevrey-seq:s=<real>`, `factorial`, `custom:<csv path>`, or a
//! bare path ending in `.csv`.

use std::fmt;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::sequence::{WeightSequence, DEFAULT_P_MAX};
use crate::weight::WeightFunction;

#[derive(Debug, Clone, PartialEq)]
pub enum SequenceDescriptor {
    Gevrey(f64),
    Factorial,
    Csv(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightDescriptor {
    Gevrey(f64),
    LogPower(f64),
    FromSequence(SequenceDescriptor),
    Table(PathBuf),
    Ramified(Box<WeightDescriptor>, f64),
}

fn bad(s: &str, why: &str) -> Error {
    Error::InvalidInput(format!("descriptor {s:?}: {why}"))
}

fn parse_s(s: &str, rest: &str) -> Result<f64> {
    let v = rest
        .strip_prefix("s=")
        .ok_or_else(|| bad(s, "expected s=<real>"))?
        .parse::<f64>()
        .map_err(|_| bad(s, "s is not a number"))?;
    if !v.is_finite() {
        return Err(bad(s, "s must be finite"));
    }
    Ok(v)
}

fn parse_path(s: &str, rest: &str) -> Result<PathBuf> {
    if rest.is_empty() {
        return Err(bad(s, "missing path"));
    }
    Ok(PathBuf::from(rest))
}

impl SequenceDescriptor {
    pub fn parse(s: &str) -> Result<Self> {
        let d = if let Some(rest) = s.strip_prefix("gevrey-seq:") {
            SequenceDescriptor::Gevrey(parse_s(s, rest)?)
        } else if s == "factorial" {
            SequenceDescriptor::Factorial
        } else if let Some(rest) = s.strip_prefix("custom:") {
            SequenceDescriptor::Csv(parse_path(s, rest)?)
        } else if s.ends_with(".csv") {
            SequenceDescriptor::Csv(PathBuf::from(s))
        } else {
            return Err(bad(s, "unknown sequence descriptor"));
        };
        if let SequenceDescriptor::Gevrey(v) = d {
            if !(v > 0.0) {
                return Err(bad(s, "gevrey exponent must be positive"));
            }
        }
        Ok(d)
    }

    pub fn build(&self, p_max: usize) -> Result<WeightSequence> {
        match self {
            SequenceDescriptor::Gevrey(v) => WeightSequence::gevrey(*v, p_max),
            SequenceDescriptor::Factorial => WeightSequence::factorial(p_max),
            SequenceDescriptor::Csv(p) => WeightSequence::load_csv(p),
        }
    }
}

impl fmt::Display for SequenceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SequenceDescriptor::Gevrey(v) => write!(f, "gevrey-seq:s={v}"),
            SequenceDescriptor::Factorial => write!(f, "factorial"),
            SequenceDescriptor::Csv(p) => write!(f, "custom:{}", p.display()),
        }
    }
}

impl WeightDescriptor {
    pub fn parse(s: &str) -> Result<Self> {
        let d = if let Some(rest) = s.strip_prefix("gevrey:") {
            let v = parse_s(s, rest)?;
            if !(v > 0.0) {
                return Err(bad(s, "gevrey exponent must be positive"));
            }
            WeightDescriptor::Gevrey(v)
        } else if let Some(rest) = s.strip_prefix("logpow:") {
            let v = parse_s(s, rest)?;
            if !(v > 1.0) {
                return Err(bad(s, "log-power exponent must exceed 1"));
            }
            WeightDescriptor::LogPower(v)
        } else if let Some(rest) = s.strip_prefix("fromseq:") {
            WeightDescriptor::FromSequence(SequenceDescriptor::parse(rest)?)
        } else if let Some(rest) = s.strip_prefix("table:") {
            WeightDescriptor::Table(parse_path(s, rest)?)
        } else if let Some(rest) = s.strip_prefix("ramified:") {
            let (base, exp) = rest.rsplit_once('^').ok_or_else(|| bad(s, "expected <weight>^<real>"))?;
            let v: f64 = exp.parse().map_err(|_| bad(s, "ramification exponent is not a number"))?;
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(s, "ramification exponent must be positive"));
            }
            WeightDescriptor::Ramified(Box::new(WeightDescriptor::parse(base)?), v)
        } else {
            return Err(bad(s, "unknown weight descriptor"));
        };
        Ok(d)
    }

    pub fn build(&self) -> Result<WeightFunction> {
        match self {
            WeightDescriptor::Gevrey(v) => WeightFunction::gevrey(*v),
            WeightDescriptor::LogPower(v) => WeightFunction::log_power(*v),
            WeightDescriptor::FromSequence(sd) => Ok(WeightFunction::from_sequence(sd.build(DEFAULT_P_MAX)?)),
            WeightDescriptor::Table(p) => WeightFunction::load_table(p),
            WeightDescriptor::Ramified(b, v) => b.build()?.ramified(*v),
        }
    }
}

impl fmt::Display for WeightDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightDescriptor::Gevrey(v) => write!(f, "gevrey:s={v}"),
            WeightDescriptor::LogPower(v) => write!(f, "logpow:s={v}"),
            WeightDescriptor::FromSequence(sd) => write!(f, "fromseq:{sd}"),
            WeightDescriptor::Table(p) => write!(f, "table:{}", p.display()),
            WeightDescriptor::Ramified(b, v) => write!(f, "ramified:{b}^{v}"),
        }
    }
}

/// Parses and builds in one step.
pub fn weight(s: &str) -> Result<WeightFunction> {
    WeightDescriptor::parse(s)?.build()
}
