//! Integer arithmetic on line counts: the direct and inverse recovery
//! problems, the power counter and superficial divergence classification.
//!
//! Counts are `u64`; the power counter is `i64` because it is negative for
//! divergent diagrams.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum CountingError {
    #[error("{what} must be even, got {value}")]
    Parity { what: &'static str, value: u64 },
    #[error("infeasible internal data: {electrons} electron lines < {photons} photon lines would need a negative number of external photons")]
    Infeasible { electrons: u64, photons: u64 },
}

/// Observable data: external electron and photon legs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ExternalData {
    pub electrons: u64,
    pub photons: u64,
}

impl ExternalData {
    pub fn new(electrons: u64, photons: u64) -> Self {
        Self { electrons, photons }
    }
}

/// Unobservable data: internal electron and photon lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct InternalData {
    pub electrons: u64,
    pub photons: u64,
}

impl InternalData {
    pub fn new(electrons: u64, photons: u64) -> Self {
        Self { electrons, photons }
    }

    /// Each internal photon ends on two contact points.
    pub fn contact_points(&self) -> u64 {
        2 * self.photons
    }

    pub fn vertices(&self) -> u64 {
        self.electrons + self.photons
    }

    pub fn total(&self) -> u64 {
        self.electrons + self.photons
    }
}

/// The complete count tuple shared by the direct and inverse problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Recovered {
    pub contact_points: u64,
    pub vertices: u64,
    pub external: ExternalData,
    pub internal: InternalData,
}

impl Recovered {
    /// Odd vertex counts satisfy all counting identities but have no
    /// physical meaning (Furry's theorem).
    pub fn is_physical(&self) -> bool {
        self.vertices.is_multiple_of(2)
    }
}

impl fmt::Display for Recovered {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Q={} n={} Ne={} Np={} Fe={} Fp={}",
            self.contact_points,
            self.vertices,
            self.external.electrons,
            self.external.photons,
            self.internal.electrons,
            self.internal.photons
        )
    }
}

fn require_even(what: &'static str, value: u64) -> Result<(), CountingError> {
    if value.is_multiple_of(2) {
        Ok(())
    } else {
        Err(CountingError::Parity { what, value })
    }
}

/// Internal data from external legs: Q = Ne, n = Ne + Np, Fp = Ne/2,
/// Fe = Np + Ne/2.
pub fn solve_inverse(x: ExternalData) -> Result<Recovered, CountingError> {
    require_even("number of external electron lines", x.electrons)?;
    let half = x.electrons / 2;
    Ok(Recovered {
        contact_points: x.electrons,
        vertices: x.electrons + x.photons,
        external: x,
        internal: InternalData::new(x.photons + half, half),
    })
}

/// External data from internal lines: Q = 2Fp, n = Fe + Fp, Ne = 2Fp,
/// Np = Fe - Fp.
pub fn solve_direct(y: InternalData) -> Result<Recovered, CountingError> {
    if y.electrons < y.photons {
        return Err(CountingError::Infeasible {
            electrons: y.electrons,
            photons: y.photons,
        });
    }
    Ok(Recovered {
        contact_points: y.contact_points(),
        vertices: y.vertices(),
        external: ExternalData::new(2 * y.photons, y.electrons - y.photons),
        internal: y,
    })
}

/// K = 2F - (Fe + 4m) with F = Fe + Fp.
pub fn power_counter(fe: u64, fp: u64, m: u64) -> i64 {
    let f = (fe + fp) as i64;
    2 * f - (fe as i64 + 4 * m as i64)
}

/// K = (3/2) Ne + Np - 4m, evaluated as 3Ne/2 so that K stays integral.
pub fn power_counter_external(ne: u64, np: u64, m: u64) -> Result<i64, CountingError> {
    require_even("number of external electron lines", ne)?;
    Ok((3 * ne / 2) as i64 + np as i64 - 4 * m as i64)
}

/// Degrees of the rational integrand: numerator Fe, denominator F.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RationalProfile {
    pub numerator_power: u64,
    pub denominator_power: u64,
}

pub fn rational_profile(fe: u64, fp: u64) -> RationalProfile {
    RationalProfile {
        numerator_power: fe,
        denominator_power: fe + fp,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DivergenceClass {
    Convergent,
    Logarithmic,
    Linear,
    Quadratic,
    /// Superficial degree three or more; only reachable with m > 1.
    Polynomial(u32),
    Vacuum,
}

impl fmt::Display for DivergenceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DivergenceClass::Convergent => f.write_str("convergent"),
            DivergenceClass::Logarithmic => f.write_str("logarithmic"),
            DivergenceClass::Linear => f.write_str("linear"),
            DivergenceClass::Quadratic => f.write_str("quadratic"),
            DivergenceClass::Polynomial(d) => write!(f, "degree-{d} polynomial"),
            DivergenceClass::Vacuum => f.write_str("vacuum"),
        }
    }
}

/// The one-loop divergent cases, as (case id, Ne, Np, class).
pub const ONE_LOOP_CASES: [(u8, u64, u64, DivergenceClass); 4] = [
    (1, 0, 4, DivergenceClass::Logarithmic),
    (2, 2, 0, DivergenceClass::Linear),
    (3, 0, 2, DivergenceClass::Quadratic),
    (4, 0, 0, DivergenceClass::Vacuum),
];

const CASE_2_NOTE: &str =
    "actual: logarithmic; the coefficient of the linear cutoff term in the one-loop integral vanishes";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DivergenceReport {
    pub power_counter: i64,
    pub nominal_class: DivergenceClass,
    pub case_id: Option<u8>,
    pub note: Option<String>,
}

impl DivergenceReport {
    pub fn is_divergent(&self) -> bool {
        self.power_counter <= 0
    }
}

impl fmt::Display for DivergenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(id) = self.case_id {
            write!(f, "Case {id}, ")?;
        }
        write!(f, "K={}, ", self.power_counter)?;
        if self.nominal_class == DivergenceClass::Convergent {
            f.write_str("convergent")?;
        } else {
            write!(f, "nominal {}", self.nominal_class)?;
        }
        if let Some(note) = &self.note {
            write!(f, " ({note})")?;
        }
        Ok(())
    }
}

/// Superficial divergence from external data and loop count.
///
/// The diagram is nominally divergent iff K <= 0. With m = 1 the divergent
/// region holds exactly the four cases of [`ONE_LOOP_CASES`]; outside it the
/// class is read off the superficial degree -K.
pub fn classify_divergence(ne: u64, np: u64, m: u64) -> Result<DivergenceReport, CountingError> {
    require_even("number of external electron lines", ne)?;
    require_even("number of external photon lines", np)?;
    let k = power_counter_external(ne, np, m)?;

    let case = (m == 1)
        .then(|| ONE_LOOP_CASES.iter().find(|c| c.1 == ne && c.2 == np))
        .flatten()
        .filter(|_| k <= 0);

    let nominal_class = match case {
        Some(&(_, _, _, class)) => class,
        None if k > 0 => DivergenceClass::Convergent,
        None if ne == 0 && np == 0 => DivergenceClass::Vacuum,
        None => match -k {
            0 => DivergenceClass::Logarithmic,
            1 => DivergenceClass::Linear,
            2 => DivergenceClass::Quadratic,
            d => DivergenceClass::Polynomial(d as u32),
        },
    };
    let case_id = case.map(|c| c.0);

    Ok(DivergenceReport {
        power_counter: k,
        nominal_class,
        case_id,
        note: (case_id == Some(2)).then(|| CASE_2_NOTE.to_owned()),
    })
}
