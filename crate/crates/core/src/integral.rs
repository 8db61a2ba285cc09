//! Numerical evaluation of the one-loop cutoff integral
//!
//! ```text
//! J_mu(L) = ∫_{|p| <= L} p_mu / (p² - 2 p·q + ℓ)² d⁴p
//! ```
//!
//! with Euclidean products over the solid 4-ball, compared against its
//! large-L form `π² q_mu (ln(L² / (ℓ - q²)) - 3/2)`. The overall factor `i` of
//! the Minkowski expression is dropped: every value here is the real
//! coefficient of `i`.
//!
//! Two independent routes are provided: nested Gauss-Legendre quadrature in
//! hyperspherical coordinates with grid doubling, and Monte Carlo sampling
//! (uniform over the ball, or uniform within geometric radial shells) with a
//! worker-count independent seeding scheme.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourVector(pub [f64; 4]);

impl FourVector {
    pub const ZERO: FourVector = FourVector([0.0; 4]);

    pub fn dot(&self, other: &FourVector) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn scaled(&self, factor: f64) -> FourVector {
        FourVector(self.0.map(|x| x * factor))
    }

    /// 1-based component, matching the index `mu` of the integrand.
    pub fn component(&self, mu: usize) -> f64 {
        self.0[mu - 1]
    }
}

/// Point in the hyperspherical chart `r >= 0`, `φ1, φ2 ∈ [0, π]`,
/// `φ3 ∈ [0, 2π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypersphericalPoint {
    pub r: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub phi3: f64,
}

impl HypersphericalPoint {
    pub fn to_cartesian(&self) -> FourVector {
        let (s1, c1) = self.phi1.sin_cos();
        let (s2, c2) = self.phi2.sin_cos();
        let (s3, c3) = self.phi3.sin_cos();
        let r = self.r;
        FourVector([r * c1, r * s1 * c2, r * s1 * s2 * c3, r * s1 * s2 * s3])
    }

    /// Jacobian `r³ sin²φ1 sin φ2`.
    pub fn volume_element(&self) -> f64 {
        self.r.powi(3) * self.phi1.sin().powi(2) * self.phi2.sin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Method {
    MonteCarlo {
        samples: u64,
        /// Sample geometric radial shells equally instead of the ball
        /// uniformly.
        stratified: bool,
    },
    NestedQuadrature {
        /// Gauss-Legendre order per dimension (per radial panel) on the
        /// coarsest grid.
        initial_order: usize,
        /// Relative agreement required between successive grid doublings.
        tolerance: f64,
    },
}

impl Method {
    pub const MIN_SAMPLES: u64 = 10_000;

    /// Radially stratified Monte Carlo, the default sampler.
    pub fn monte_carlo(samples: u64) -> Self {
        Method::MonteCarlo {
            samples,
            stratified: true,
        }
    }

    /// Plain uniform sampling of the whole ball.
    pub fn uniform_monte_carlo(samples: u64) -> Self {
        Method::MonteCarlo {
            samples,
            stratified: false,
        }
    }

    pub fn quadrature() -> Self {
        Method::NestedQuadrature {
            initial_order: 8,
            tolerance: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralSpec {
    pub q: FourVector,
    /// The scalar ℓ; must exceed q².
    pub ell: f64,
    /// Radius of the integration ball.
    pub cutoff: f64,
    /// Component index, 1 to 4.
    pub mu: usize,
    pub method: Method,
    pub seed: u64,
}

impl IntegralSpec {
    pub fn new(q: FourVector, ell: f64, cutoff: f64, mu: usize, method: Method) -> Self {
        Self {
            q,
            ell,
            cutoff,
            mu,
            method,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_cutoff(mut self, cutoff: f64) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn with_mu(mut self, mu: usize) -> Self {
        self.mu = mu;
        self
    }

    fn validate(&self) -> Result<(), IntegralError> {
        let q2 = self.q.norm_sq();
        if !(self.ell > q2) || !self.ell.is_finite() {
            return Err(IntegralError::Domain(format!(
                "ell = {} must exceed q² = {q2}",
                self.ell
            )));
        }
        if !(self.cutoff > 0.0) || !self.cutoff.is_finite() {
            return Err(IntegralError::Domain(format!(
                "cutoff must be positive, got {}",
                self.cutoff
            )));
        }
        if !(1..=4).contains(&self.mu) {
            return Err(IntegralError::Domain(format!(
                "mu must be between 1 and 4, got {}",
                self.mu
            )));
        }
        match self.method {
            Method::MonteCarlo { samples, .. } if samples < Method::MIN_SAMPLES => {
                Err(IntegralError::TooFewSamples(samples))
            }
            Method::NestedQuadrature {
                initial_order,
                tolerance,
            } if initial_order == 0 || !(tolerance > 0.0) => Err(IntegralError::Domain(
                "quadrature needs a positive order and tolerance".into(),
            )),
            _ => Ok(()),
        }
    }

    fn integrand(&self, p: &FourVector) -> f64 {
        let denom = p.norm_sq() - 2.0 * p.dot(&self.q) + self.ell;
        p.component(self.mu) / (denom * denom)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegralError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("Monte Carlo needs at least {min} samples, got {0}", min = Method::MIN_SAMPLES)]
    TooFewSamples(u64),
    #[error("cutoff list must be non-empty, positive and strictly increasing")]
    BadCutoffs,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralEstimate {
    pub value: f64,
    /// Monte Carlo standard error, or the difference between the last two
    /// quadrature grids.
    pub std_error: f64,
    /// Integrand evaluations (quadrature: on the finest grid).
    pub samples_used: u64,
    /// False when the quadrature grids never agreed within tolerance.
    pub converged: bool,
}

/// Large-cutoff form `π² q_mu (ln(L² / (ℓ - q²)) - 3/2)`.
pub fn closed_form(spec: &IntegralSpec) -> Result<f64, IntegralError> {
    spec.validate_domain()?;
    let delta = spec.ell - spec.q.norm_sq();
    Ok(PI * PI * spec.q.component(spec.mu) * ((spec.cutoff * spec.cutoff / delta).ln() - 1.5))
}

impl IntegralSpec {
    fn validate_domain(&self) -> Result<(), IntegralError> {
        // closed_form ignores the method, so only check the physical inputs.
        let probe = IntegralSpec {
            method: Method::quadrature(),
            ..*self
        };
        probe.validate()
    }
}

pub fn integrate(spec: &IntegralSpec) -> Result<IntegralEstimate, IntegralError> {
    spec.validate()?;
    Ok(match spec.method {
        Method::MonteCarlo {
            samples,
            stratified,
        } => monte_carlo(spec, samples, stratified),
        Method::NestedQuadrature {
            initial_order,
            tolerance,
        } => quadrature(spec, initial_order, tolerance),
    })
}

/// Samples per Monte Carlo shard. Shard `s` draws from a ChaCha8 stream
/// keyed by `(seed, s)`, so results do not depend on how shards are
/// scheduled across threads.
pub const SHARD_SIZE: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn merge(self, other: Moments) -> Moments {
        Moments {
            sum: self.sum + other.sum,
            sum_sq: self.sum_sq + other.sum_sq,
        }
    }
}

/// Pairwise reduction in index order, per stratum.
fn pairwise(parts: &[Vec<Moments>], strata: usize) -> Vec<Moments> {
    match parts.len() {
        0 => vec![Moments::default(); strata],
        1 => parts[0].clone(),
        len => {
            let (a, b) = parts.split_at(len / 2);
            let (a, b) = (pairwise(a, strata), pairwise(b, strata));
            a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect()
        }
    }
}

/// Radial shells `[inner, outer]` with a fixed share of the samples each.
struct Strata {
    shells: Vec<(f64, f64)>,
    /// First global sample index of each shell, plus the total at the end.
    starts: Vec<u64>,
}

impl Strata {
    fn new(spec: &IntegralSpec, samples: u64, stratified: bool) -> Strata {
        let edges = if stratified {
            radial_edges(spec)
        } else {
            vec![0.0, spec.cutoff]
        };
        let shells: Vec<(f64, f64)> = edges.windows(2).map(|w| (w[0], w[1])).collect();
        let k = shells.len() as u64;
        let mut starts = vec![0];
        for i in 0..k {
            let share = samples / k + u64::from(i < samples % k);
            starts.push(starts[i as usize] + share);
        }
        Strata { shells, starts }
    }

    fn stratum_of(&self, index: u64) -> usize {
        self.starts.partition_point(|&s| s <= index) - 1
    }
}

fn shard_moments(
    spec: &IntegralSpec,
    strata: &Strata,
    first: u64,
    count: u64,
    shard: u64,
) -> Vec<Moments> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(shard);
    let mut acc = vec![Moments::default(); strata.shells.len()];
    let mut k = strata.stratum_of(first);
    for index in first..first + count {
        while index >= strata.starts[k + 1] {
            k += 1;
        }
        let (inner, outer) = strata.shells[k];
        let p = uniform_in_shell(&mut rng, inner, outer);
        let f = spec.integrand(&p);
        acc[k].sum += f;
        acc[k].sum_sq += f * f;
    }
    acc
}

/// Uniform point in the shell `inner <= |p| <= outer`: Gaussian direction,
/// radius from the inverse of the `r⁴` volume law. With `inner = 0` this is
/// `outer · u^(1/4)`.
fn uniform_in_shell(rng: &mut ChaCha8Rng, inner: f64, outer: f64) -> FourVector {
    loop {
        let g: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            let u: f64 = rng.random();
            let r = if inner == 0.0 {
                outer * u.powf(0.25)
            } else {
                let (a4, b4) = (inner.powi(4), outer.powi(4));
                (a4 + u * (b4 - a4)).powf(0.25)
            };
            return FourVector(g.map(|x| x * r / norm));
        }
    }
}

pub fn ball_volume(radius: f64) -> f64 {
    0.5 * PI * PI * radius.powi(4)
}

fn monte_carlo(spec: &IntegralSpec, samples: u64, stratified: bool) -> IntegralEstimate {
    let strata = Strata::new(spec, samples, stratified);
    let shards = samples.div_ceil(SHARD_SIZE);
    let parts: Vec<Vec<Moments>> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let first = s * SHARD_SIZE;
            let count = SHARD_SIZE.min(samples - first);
            shard_moments(spec, &strata, first, count, s)
        })
        .collect();
    let totals = pairwise(&parts, strata.shells.len());

    let mut value = 0.0;
    let mut variance = 0.0;
    for (k, total) in totals.iter().enumerate() {
        let n = (strata.starts[k + 1] - strata.starts[k]) as f64;
        let (inner, outer) = strata.shells[k];
        let volume = ball_volume(outer) - ball_volume(inner);
        let mean = total.sum / n;
        let sample_var = ((total.sum_sq / n - mean * mean) * n / (n - 1.0)).max(0.0);
        value += volume * mean;
        variance += volume * volume * sample_var / n;
    }
    IntegralEstimate {
        value,
        std_error: variance.sqrt(),
        samples_used: samples,
        converged: true,
    }
}

/// Gauss-Legendre nodes and weights mapped to `[a, b]`.
fn mapped_rule(rule: &GaussLegendre, a: f64, b: f64) -> Vec<(f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule.as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (mid + half * x, half * w))
        .collect()
}

/// Radial panel edges, geometric from the scale where the integrand peaks.
fn radial_edges(spec: &IntegralSpec) -> Vec<f64> {
    let scale = (spec.q.norm_sq().sqrt() + (spec.ell - spec.q.norm_sq()).sqrt()).max(1e-6);
    let mut edges = vec![0.0];
    let mut edge = scale;
    while edge < spec.cutoff {
        edges.push(edge);
        edge *= 2.0;
    }
    edges.push(spec.cutoff);
    edges
}

/// Integral and integral of the absolute value on one grid.
fn quadrature_pass(spec: &IntegralSpec, order: usize) -> (f64, f64, u64) {
    let rule = GaussLegendre::new(NonZeroUsize::new(order).expect("order > 0"));
    let radial: Vec<(f64, f64)> = radial_edges(spec)
        .windows(2)
        .flat_map(|w| mapped_rule(&rule, w[0], w[1]))
        .collect();
    let polar = mapped_rule(&rule, 0.0, PI);
    let azimuth_rule = GaussLegendre::new(NonZeroUsize::new(2 * order).expect("order > 0"));
    let azimuth = mapped_rule(&azimuth_rule, 0.0, 2.0 * PI);

    let (value, magnitude) = radial
        .par_iter()
        .map(|&(r, wr)| {
            let mut value = 0.0;
            let mut magnitude = 0.0;
            for &(phi1, w1) in &polar {
                for &(phi2, w2) in &polar {
                    for &(phi3, w3) in &azimuth {
                        let point = HypersphericalPoint {
                            r,
                            phi1,
                            phi2,
                            phi3,
                        };
                        let f = spec.integrand(&point.to_cartesian()) * point.volume_element();
                        let w = w1 * w2 * w3;
                        value += w * f;
                        magnitude += w * f.abs();
                    }
                }
            }
            (wr * value, wr * magnitude)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0.0, 0.0), |acc, x| (acc.0 + x.0, acc.1 + x.1));
    let evaluations = (radial.len() * polar.len() * polar.len() * azimuth.len()) as u64;
    (value, magnitude, evaluations)
}

/// Finest grid order tried before giving up on convergence.
const MAX_QUADRATURE_ORDER: usize = 64;

fn quadrature(spec: &IntegralSpec, initial_order: usize, tolerance: f64) -> IntegralEstimate {
    let mut order = initial_order;
    let (mut coarse, _, _) = quadrature_pass(spec, order);
    loop {
        order *= 2;
        let (fine, magnitude, evaluations) = quadrature_pass(spec, order);
        let difference = (fine - coarse).abs();
        // Relative to the integral of |f| so that vanishing components
        // still have a meaningful tolerance.
        let converged = difference <= tolerance * magnitude.max(f64::MIN_POSITIVE);
        if converged || order >= MAX_QUADRATURE_ORDER {
            return IntegralEstimate {
                value: fine,
                std_error: difference,
                samples_used: evaluations,
                converged,
            };
        }
        coarse = fine;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub cutoff: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub closed_form: f64,
    pub residual: f64,
}

/// Estimates the integral at each cutoff and compares with the closed form.
pub fn divergence_scan(
    base: &IntegralSpec,
    cutoffs: &[f64],
) -> Result<Vec<ScanRow>, IntegralError> {
    let increasing = cutoffs.windows(2).all(|w| w[0] < w[1]);
    if cutoffs.is_empty() || !increasing || !(cutoffs[0] > 0.0) {
        return Err(IntegralError::BadCutoffs);
    }
    cutoffs
        .iter()
        .map(|&cutoff| {
            let spec = base.with_cutoff(cutoff);
            let estimate = integrate(&spec)?;
            let closed = closed_form(&spec)?;
            Ok(ScanRow {
                cutoff,
                estimate: estimate.value,
                std_error: estimate.std_error,
                closed_form: closed,
                residual: estimate.value - closed,
            })
        })
        .collect()
}

/// Plain decimal with twelve significant digits; zero prints as `0`.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() {
            "0".into()
        } else {
            x.to_string()
        };
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exponent) = sci.split_once('e').expect("scientific format");
    let exponent: i32 = exponent.parse().expect("exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();

    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if exponent < 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-exponent - 1) as usize));
        out.push_str(&digits);
    } else {
        let int_len = exponent as usize + 1;
        if int_len >= digits.len() {
            out.push_str(&digits);
            out.extend(std::iter::repeat_n('0', int_len - digits.len()));
        } else {
            out.push_str(&digits[..int_len]);
            out.push('.');
            out.push_str(&digits[int_len..]);
        }
    }
    out
}

pub const SCAN_CSV_HEADER: &str = "L,estimate,std_error,closed_form,residual";

pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from(SCAN_CSV_HEADER);
    out.push('\n');
    for row in rows {
        let fields = [
            row.cutoff,
            row.estimate,
            row.std_error,
            row.closed_form,
            row.residual,
        ]
        .map(format_sig12);
        let _ = writeln!(out, "{}", fields.join(","));
    }
    out
}

/// Least-squares fit `y ≈ a + b x`; returns `‖y - ŷ‖ / ‖y - ȳ‖`, i.e.
/// `sqrt(1 - R²)`. Zero means a perfect fit, one means no explanatory power.
pub fn relative_fit_residual(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let syy: f64 = ys.iter().map(|y| (y - mean_y).powi(2)).sum();
    if syy == 0.0 {
        return 0.0;
    }
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - mean_y - slope * (x - mean_x)).powi(2))
        .sum();
    (rss / syy).sqrt()
}

/// How well the scanned estimates follow `ln L²` versus `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthFit {
    pub logarithmic_residual: f64,
    pub linear_residual: f64,
}

pub fn growth_fit(rows: &[ScanRow]) -> GrowthFit {
    let ys: Vec<f64> = rows.iter().map(|r| r.estimate).collect();
    let log_l2: Vec<f64> = rows.iter().map(|r| (r.cutoff * r.cutoff).ln()).collect();
    let l: Vec<f64> = rows.iter().map(|r| r.cutoff).collect();
    GrowthFit {
        logarithmic_residual: relative_fit_residual(&log_l2, &ys),
        linear_residual: relative_fit_residual(&l, &ys),
    }
}
