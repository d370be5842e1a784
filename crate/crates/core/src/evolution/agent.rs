use std::fmt;

use crate::error::{Error, Result};

/// Smallest attribute value an agent or request may carry.
pub const ATTR_MIN: u8 = 1;
/// Largest attribute value an agent or request may carry.
pub const ATTR_MAX: u8 = 100;

fn check_attributes(what: &str, values: &[u8]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::invalid(format!(
            "{what} must have at least one attribute"
        )));
    }
    if let Some(v) = values.iter().find(|v| !(ATTR_MIN..=ATTR_MAX).contains(*v)) {
        return Err(Error::invalid(format!(
            "{what} attribute {v} outside [{ATTR_MIN}, {ATTR_MAX}]"
        )));
    }
    Ok(())
}

/// A candidate service description: a non-empty, ordered list of attributes in `[1, 100]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Agent {
    attributes: Vec<u8>,
}

impl Agent {
    pub fn new(attributes: Vec<u8>) -> Result<Self> {
        check_attributes("agent", &attributes)?;
        Ok(Self { attributes })
    }

    /// Caller guarantees the invariants; used by the operators on already valid data.
    pub(crate) fn from_vec_unchecked(attributes: Vec<u8>) -> Self {
        debug_assert!(check_attributes("agent", &attributes).is_ok());
        Self { attributes }
    }

    pub fn attributes(&self) -> &[u8] {
        &self.attributes
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    /// Always false; agents carry at least one attribute.
    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub(crate) fn attributes_mut(&mut self) -> &mut Vec<u8> {
        &mut self.attributes
    }
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_csv_row(f, &self.attributes)
    }
}

fn write_csv_row(f: &mut fmt::Formatter<'_>, values: &[u8]) -> fmt::Result {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}

/// The set of required attributes that induces the selection pressure.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Request {
    required: Vec<u8>,
}

impl Request {
    pub fn new(required: Vec<u8>) -> Result<Self> {
        check_attributes("request", &required)?;
        Ok(Self { required })
    }

    pub fn required(&self) -> &[u8] {
        &self.required
    }

    pub fn len(&self) -> usize {
        self.required.len()
    }

    pub fn is_empty(&self) -> bool {
        self.required.is_empty()
    }
}

impl fmt::Display for Request {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_csv_row(f, &self.required)
    }
}

/// Total distance between the request and the agent, matching every requirement
/// to its nearest attribute. Attributes may serve several requirements.
pub fn deviation(agent: &Agent, request: &Request) -> u32 {
    request
        .required
        .iter()
        .map(|&r| {
            // a plain u8 fold lets the compiler vectorise the scan
            let nearest = agent
                .attributes
                .iter()
                .fold(u8::MAX, |m, &a| m.min(r.abs_diff(a)));
            u32::from(nearest)
        })
        .sum()
}

/// Fitness level for a total deviation: `1 / (1 + d)`.
#[inline]
pub fn fitness_of_deviation(d: u32) -> f64 {
    1.0 / (1.0 + f64::from(d))
}

/// Raw fitness in `(0, 1]`; exactly 1 iff the agent covers every requirement.
pub fn fitness(agent: &Agent, request: &Request) -> f64 {
    fitness_of_deviation(deviation(agent, request))
}

/// Size penalty applied to agents longer than the population mean.
#[inline]
pub fn parsimony_penalty(len: usize, mean_size: f64, strength: f64) -> f64 {
    let len = len as f64;
    if len <= mean_size {
        1.0
    } else {
        (mean_size / len).powf(strength)
    }
}

/// Fitness used by selection: raw fitness scaled down for above-average sizes.
pub fn parsimony_fitness(agent: &Agent, request: &Request, mean_size: f64, strength: f64) -> f64 {
    fitness(agent, request) * parsimony_penalty(agent.len(), mean_size, strength)
}
