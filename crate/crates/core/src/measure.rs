//! Gaussian sampling of small initial data and Monte-Carlo estimates of the
//! non-resonant set and of single-divisor tails.
//!
//! Actions are drawn as independent exponentials and phases uniformly; the
//! ball constraint is imposed by rejection. Sample `i` uses its own ChaCha
//! stream of the master seed, so results do not depend on the thread count.

use crate::divisors::{
    big_omega, big_omega4_tilde, enumerate_irr_indices, irr, is_nonresonant, kappa, FreqContext, NonResonanceParams,
    Order,
};
use crate::error::{Error, Result};
use crate::space::{ComplexSeq, IndexVector, WeightSpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Attempts allowed per accepted sample before the configuration is rejected.
const MAX_ATTEMPTS: u64 = 1000;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    pub weight: WeightSpec,
    /// modes 1..=M are sampled
    #[serde(rename = "M")]
    pub m: usize,
    /// right-hand side of the ball constraint; infinite disables it
    pub ball_radius: f64,
    pub samples: usize,
    pub seed: u64,
}

impl MeasureSpec {
    pub fn new(weight: WeightSpec, m: usize, samples: usize, seed: u64) -> Self {
        MeasureSpec { weight, m, ball_radius: 0.5, samples, seed }
    }

    pub fn validate(&self) -> Result<()> {
        self.weight.validate()?;
        if self.m == 0 || self.samples == 0 {
            return Err(Error::Domain("measure needs M >= 1 and at least one sample".into()));
        }
        if self.ball_radius.is_nan() || self.ball_radius <= 0.0 {
            return Err(Error::Domain(format!("ball radius {} must be positive", self.ball_radius)));
        }
        Ok(())
    }

    /// Exponential rate of I_m: m^{2s} (Sobolev) or e^{2 rho m^theta} m^2 (Gevrey).
    pub fn rate(&self, m: u32) -> f64 {
        match self.weight {
            WeightSpec::Sobolev { .. } => self.weight.weight_sq(m),
            WeightSpec::Gevrey { .. } => self.weight.weight_sq(m) * (m as f64).powi(2),
        }
    }

    /// Coefficient of I_m in the ball constraint: m^{2s-2} or e^{2 rho m^theta}.
    pub fn ball_weight(&self, m: u32) -> f64 {
        match self.weight {
            WeightSpec::Sobolev { .. } => self.weight.weight_sq(m) / (m as f64).powi(2),
            WeightSpec::Gevrey { .. } => self.weight.weight_sq(m),
        }
    }
}

/// One accepted draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// I_m at index m - 1
    pub actions: Vec<f64>,
    pub phases: Vec<f64>,
    /// draws spent to get this sample, including the accepted one
    pub attempts: u64,
}

impl Sample {
    /// z_m = sqrt(I_m) e^{i theta_m}, scaled by eps.
    pub fn to_seq(&self, eps: f64) -> ComplexSeq {
        ComplexSeq::from_vec(
            self.actions
                .iter()
                .zip(&self.phases)
                .map(|(&i, &t)| Complex64::from_polar(eps * i.sqrt(), t))
                .collect(),
        )
    }
}

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws sample number `index` under `spec`.
pub fn sample_one(spec: &MeasureSpec, index: u64) -> Result<Sample> {
    let mut rng = stream(spec.seed, index);
    let dists = (1..=spec.m as u32)
        .map(|m| Exp::new(spec.rate(m)).map_err(|e| Error::Domain(format!("rate of mode {m}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    let two_pi = std::f64::consts::TAU;
    for attempt in 1..=MAX_ATTEMPTS {
        let actions: Vec<f64> = dists.iter().map(|d| d.sample(&mut rng)).collect();
        let phases: Vec<f64> = (0..spec.m).map(|_| rng.random_range(0.0..two_pi)).collect();
        let ball: f64 = actions.iter().enumerate().map(|(k, &i)| spec.ball_weight(k as u32 + 1) * i).sum();
        if ball <= spec.ball_radius {
            return Ok(Sample { actions, phases, attempts: attempt });
        }
    }
    Err(Error::Sampling(format!(
        "rejection rate above {} for sample {index}: the ball constraint is too tight for this weight",
        1.0 - 1.0 / MAX_ATTEMPTS as f64
    )))
}

/// All samples of `spec`, in index order.
pub fn sample_actions(spec: &MeasureSpec) -> Result<Vec<Sample>> {
    spec.validate()?;
    (0..spec.samples as u64).into_par_iter().map(|i| sample_one(spec, i)).collect()
}

/// Wilson score interval at 95%.
pub fn wilson(successes: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = Z95 * Z95;
    let den = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / den;
    let half = Z95 * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / den;
    // clamp so rounding never leaves p outside its own interval
    ((centre - half).clamp(0.0, p), (centre + half).clamp(p, 1.0))
}

/// eps^2 <= 2 gamma / ((r + 1) N^{4r+2}).
pub fn eps_hypothesis(params: &NonResonanceParams, eps: f64) -> bool {
    let r = params.r as f64;
    eps * eps <= 2.0 * params.gamma / ((r + 1.0) * (params.n as f64).powf(4.0 * r + 2.0))
}

/// Result record of a measure estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureRecord {
    pub gamma: f64,
    #[serde(rename = "N")]
    pub n: u32,
    pub r: u32,
    pub eps: f64,
    /// fraction of samples with eps z in U_gamma^N
    pub fraction: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub samples: usize,
    pub seed: u64,
    pub hypothesis_holds: bool,
    pub warning: Option<String>,
}

impl MeasureRecord {
    pub fn complement(&self) -> f64 {
        1.0 - self.fraction
    }
}

fn record(params: &NonResonanceParams, spec: &MeasureSpec, eps: f64, inside: usize) -> MeasureRecord {
    let n = spec.samples;
    let (lo, hi) = wilson(inside, n);
    let ok = eps_hypothesis(params, eps);
    MeasureRecord {
        gamma: params.gamma,
        n: params.n,
        r: params.r,
        eps,
        fraction: inside as f64 / n as f64,
        ci_low: lo,
        ci_high: hi,
        samples: n,
        seed: spec.seed,
        hypothesis_holds: ok,
        warning: (!ok).then(|| {
            format!(
                "eps^2 = {:e} exceeds 2 gamma / ((r+1) N^(4r+2)); the measure lower bound is not claimed here",
                eps * eps
            )
        }),
    }
}

/// Fraction of samples with eps z in U_gamma^N, with a Wilson interval.
pub fn estimate_measure(params: &NonResonanceParams, spec: &MeasureSpec, eps: f64) -> Result<MeasureRecord> {
    Ok(estimate_measure_grid(params, &[params.gamma], spec, eps)?.remove(0))
}

/// The same estimate for every gamma in `gammas`, on one fixed sample set.
pub fn estimate_measure_grid(
    params: &NonResonanceParams,
    gammas: &[f64],
    spec: &MeasureSpec,
    eps: f64,
) -> Result<Vec<MeasureRecord>> {
    params.validate()?;
    enumerate_irr_indices(params.r, params.n)?;
    let samples = sample_actions(spec)?;
    let grid: Vec<NonResonanceParams> = gammas.iter().map(|&g| params.with_gamma(g)).collect();
    for p in &grid {
        p.validate()?;
    }
    let hits = samples
        .par_iter()
        .map(|s| {
            let z = s.to_seq(eps);
            grid.iter().map(|p| Ok(is_nonresonant(&z, p)?.nonresonant as usize)).collect::<Result<Vec<_>>>()
        })
        .try_reduce(
            || vec![0; grid.len()],
            |a, b| Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect()),
        )?;
    Ok(grid.iter().zip(hits).map(|(p, h)| record(p, spec, eps, h)).collect())
}

/// Which small divisor a tail estimate looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailKind {
    /// |Omega^(2)_j(eps^2 I)| <= gamma'
    Omega2,
    /// |Omega~^(4)_j(eps^2 I)| <= gamma''
    Omega4Tilde,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub kind: TailKind,
    pub gamma: f64,
    pub threshold: f64,
    /// mean over samples of the exact conditional probability given the other actions
    pub probability: f64,
    /// standard error of `probability`
    pub std_error: f64,
    /// plain fraction of samples below the threshold
    pub hit_fraction: f64,
    pub samples: usize,
    /// the mode whose action is integrated out
    pub mode: u32,
}

/// Net coefficient of I_m in sum_k delta_k I_{a_k} - I_Delta.
fn net_coefficient(j: &IndexVector, m: u32) -> i64 {
    let b = j.delta();
    let s: i64 = j.entries().iter().filter(|e| e.a == m).map(|e| e.delta as i64).sum();
    s - (b == m as i64) as i64
}

/// Threshold gamma' = gamma eps^2 N^{-4l-2} kappa-factor / 2, or gamma'' with
/// the extra max against gamma eps^2.
pub fn tail_threshold(kind: TailKind, j: &IndexVector, params: &NonResonanceParams, eps: f64) -> Result<f64> {
    let l = j.len() as i32;
    let kf = params.weight().kappa_factor(kappa(j)?);
    let base = params.gamma * eps * eps * (params.n as f64).powi(-4 * l - 2);
    Ok(match kind {
        TailKind::Omega2 => 0.5 * base * kf,
        TailKind::Omega4Tilde => base * kf.max(params.gamma * eps * eps),
    })
}

/// P(|Omega_j(eps^2 I)| <= threshold) under the measure of `spec`.
///
/// The divisor is affine in one action I_m of a mode of j (the tilde
/// correction omits those modes), and given the other actions I_m is an
/// exponential truncated by the ball. The conditional probability of the
/// window is exact, so averaging it over samples resolves probabilities far
/// below 1 / samples.
pub fn divisor_tail(
    j: &IndexVector,
    kind: TailKind,
    params: &NonResonanceParams,
    spec: &MeasureSpec,
    eps: f64,
) -> Result<TailEstimate> {
    params.validate()?;
    let b = j.delta();
    if b < 0 {
        return Err(Error::Domain(format!("{j} has negative Delta; conjugate it first")));
    }
    if j.is_empty() || irr(j, b)? != *j || j.len() < 2 {
        return Err(Error::Domain(format!("{j} is not an irreducible index")));
    }
    if j.max_mode().unwrap_or(0) > params.n || b > params.n as i64 {
        return Err(Error::Domain(format!("{j} has modes or Delta above N = {}", params.n)));
    }
    if j.max_mode().unwrap_or(0) as usize > spec.m || b as usize > spec.m {
        return Err(Error::Domain(format!("{j} needs modes beyond the sampled M = {}", spec.m)));
    }
    let mode = (1..=params.n)
        .filter(|&m| net_coefficient(j, m) != 0)
        .min()
        .ok_or_else(|| Error::Domain(format!("{j} has no action with a nonzero coefficient")))?;
    let slope = eps * eps * net_coefficient(j, mode) as f64 / 2.0;
    let g = tail_threshold(kind, j, params, eps)?;
    let rate = spec.rate(mode);
    let bw = spec.ball_weight(mode);
    let samples = sample_actions(spec)?;
    let cdf = |x: f64| -(-rate * x).exp_m1();
    let per: Vec<(f64, bool)> = samples
        .par_iter()
        .map(|s| {
            let divisor = |acts: &[f64]| -> Result<f64> {
                let scaled: Vec<f64> = acts.iter().map(|&i| eps * eps * i).collect();
                let ctx = FreqContext::new(&scaled, params.n);
                match kind {
                    TailKind::Omega2 => big_omega(Order::Two, j, &ctx),
                    TailKind::Omega4Tilde => big_omega4_tilde(j, &ctx),
                }
            };
            let hit = divisor(&s.actions)?.abs() <= g;
            let mut rest = s.actions.clone();
            rest[mode as usize - 1] = 0.0;
            let r0 = divisor(&rest)?;
            let used: f64 = rest.iter().enumerate().map(|(k, &i)| spec.ball_weight(k as u32 + 1) * i).sum();
            let cap = if spec.ball_radius.is_finite() { (spec.ball_radius - used) / bw } else { f64::INFINITY };
            // slope * I_m + r0 in [-g, g]
            let (x1, x2) = ((-g - r0) / slope, (g - r0) / slope);
            let lo = x1.min(x2).max(0.0);
            let hi = x1.max(x2).min(cap);
            let p = if hi > lo && cap > 0.0 { (cdf(hi) - cdf(lo)) / cdf(cap) } else { 0.0 };
            Ok((p, hit))
        })
        .collect::<Result<_>>()?;
    let n = per.len() as f64;
    let mean = per.iter().map(|x| x.0).sum::<f64>() / n;
    let var = per.iter().map(|x| (x.0 - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    Ok(TailEstimate {
        kind,
        gamma: params.gamma,
        threshold: g,
        probability: mean,
        std_error: (var / n).sqrt(),
        hit_fraction: per.iter().filter(|x| x.1).count() as f64 / n,
        samples: per.len(),
        mode,
    })
}

/// Draws until `count` samples with eps z in U_gamma^N are found, scanning at
/// most `max_draws` sample indices.
pub fn sample_nonresonant(
    params: &NonResonanceParams,
    spec: &MeasureSpec,
    eps: f64,
    count: usize,
    max_draws: u64,
) -> Result<Vec<ComplexSeq>> {
    params.validate()?;
    spec.validate()?;
    let mut out = Vec::with_capacity(count);
    let mut index = 0;
    while out.len() < count {
        if index >= max_draws {
            return Err(Error::Sampling(format!(
                "only {} of {count} nonresonant samples in {max_draws} draws",
                out.len()
            )));
        }
        let z = sample_one(spec, index)?.to_seq(eps);
        index += 1;
        if is_nonresonant(&z, params)?.nonresonant {
            out.push(z);
        }
    }
    Ok(out)
}

/// Kolmogorov-Smirnov distance between a sample and Exp(1).
pub fn ks_exp1(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(k, &x)| {
            let f = -(-x).exp_m1();
            (f - k as f64 / n).abs().max(((k + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at level alpha for n points.
pub fn ks_critical(alpha: f64, n: usize) -> f64 {
    (-0.5 * (alpha / 2.0).ln()).sqrt() / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(samples: usize) -> MeasureSpec {
        MeasureSpec::new(WeightSpec::sobolev(3.0), 8, samples, 11)
    }

    #[test]
    fn ball_holds_and_seed_is_reproducible() {
        let s = spec(500);
        let a = sample_actions(&s).unwrap();
        assert_eq!(a, sample_actions(&s).unwrap());
        for x in &a {
            let ball: f64 = x.actions.iter().enumerate().map(|(k, &i)| s.ball_weight(k as u32 + 1) * i).sum();
            assert!(ball <= 0.5);
        }
        let other = sample_actions(&MeasureSpec { seed: 12, ..s }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn unconstrained_mean_of_first_action() {
        let s = MeasureSpec { ball_radius: f64::INFINITY, ..spec(20_000) };
        let a = sample_actions(&s).unwrap();
        let mean = a.iter().map(|x| x.actions[0]).sum::<f64>() / a.len() as f64;
        // Exp(1): standard deviation of the mean is 1 / sqrt(n)
        assert!((mean - 1.0).abs() < 3.0 / (a.len() as f64).sqrt());
        assert!(a.iter().all(|x| x.attempts == 1));
    }

    #[test]
    fn impossible_ball_is_a_sampling_error() {
        let s = MeasureSpec { ball_radius: 1e-9, ..spec(4) };
        assert!(matches!(sample_actions(&s), Err(Error::Sampling(_))));
    }

    #[test]
    fn wilson_interval_brackets_estimate() {
        let (lo, hi) = wilson(9990, 10_000);
        assert!(lo < 0.999 && 0.999 < hi && hi <= 1.0);
        assert_eq!(wilson(0, 10).0, 0.0);
        let (lo, hi) = wilson(10, 10);
        assert!(hi == 1.0 && lo > 0.6);
    }

    #[test]
    fn measure_is_monotone_in_gamma() {
        let p = NonResonanceParams::new(2, 6, 0.1, WeightSpec::sobolev(3.0));
        let recs = estimate_measure_grid(&p, &[1e-3, 0.05, 0.5, 0.9], &spec(300), 1.0).unwrap();
        for w in recs.windows(2) {
            assert!(w[0].fraction >= w[1].fraction);
        }
        for r in &recs {
            assert!(r.ci_low <= r.fraction && r.fraction <= r.ci_high);
            assert!(!r.hypothesis_holds && r.warning.is_some());
        }
    }

    #[test]
    fn tail_rejects_reducible_index() {
        let p = NonResonanceParams::new(2, 6, 0.1, WeightSpec::sobolev(3.0));
        let j = IndexVector::from_pairs(&[(1, 2), (-1, 2), (1, 3)]);
        assert!(divisor_tail(&j, TailKind::Omega2, &p, &spec(10), 1.0).is_err());
        let j = IndexVector::from_pairs(&[(0, 2), (1, 3)]);
        assert!(divisor_tail(&j, TailKind::Omega2, &p, &spec(10), 1.0).is_err());
    }

    #[test]
    fn conditional_tail_agrees_with_hit_counting() {
        // N = 2 and a flat weight make the window wide enough to count hits directly.
        let p = NonResonanceParams::new(2, 2, 0.9, WeightSpec::sobolev(0.0));
        let s = MeasureSpec::new(WeightSpec::sobolev(0.0), 2, 200_000, 3);
        let j = IndexVector::from_pairs(&[(-1, 1), (1, 2)]);
        let t = divisor_tail(&j, TailKind::Omega2, &p, &s, 0.1).unwrap();
        assert_eq!(t.mode, 1);
        assert!(t.hit_fraction > 5e-4, "window too narrow for the check: {}", t.hit_fraction);
        let sd = (t.hit_fraction * (1.0 - t.hit_fraction) / t.samples as f64).sqrt();
        assert!((t.probability - t.hit_fraction).abs() < 4.0 * sd + 4.0 * t.std_error);
    }

    #[test]
    fn ks_distance_of_exact_quantiles_is_small() {
        let n = 1000;
        let xs: Vec<f64> = (0..n).map(|k| -(1.0 - (k as f64 + 0.5) / n as f64).ln()).collect();
        assert!(ks_exp1(&xs) <= 0.5 / n as f64 + 1e-12);
        assert!(ks_critical(1e-3, 100_000) > 0.006 && ks_critical(1e-3, 100_000) < 0.0062);
    }
}
