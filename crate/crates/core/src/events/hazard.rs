//! Exponential availability sampling for roads, trucks and shovels.

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};

use super::HazardParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FaultOutcome {
    /// Recoverable fault; the subject is out for this many minutes.
    Repair(f64),
    /// Terminal fault.
    Breakdown,
}

/// One availability check over a window of `window` minutes.
///
/// Draws `x ~ Exp(lambda)`; a fault fires when `x < window`, so the fault
/// probability per check is `1 - exp(-lambda * window)`. The kernel calls
/// this once per simulated minute for every subject that is up.
pub fn sample_availability<R: Rng + ?Sized>(
    params: &HazardParams,
    window: f64,
    rng: &mut R,
) -> Option<FaultOutcome> {
    let exp = Exp::new(params.lambda).expect("validated lambda");
    let x: f64 = exp.sample(rng);
    if x >= window {
        return None;
    }
    let terminal: f64 = rng.gen();
    if terminal < params.breakdown_probability {
        return Some(FaultOutcome::Breakdown);
    }
    Some(FaultOutcome::Repair(sample_clamped_normal(
        params.repair_mean,
        params.repair_std,
        rng,
    )))
}

/// Travel-time penalty for a maintained road, `Normal(mean, std)` clamped at zero.
pub fn sample_penalty_fraction<R: Rng + ?Sized>(mean: f64, std: f64, rng: &mut R) -> f64 {
    sample_clamped_normal(mean, std, rng)
}

fn sample_clamped_normal<R: Rng + ?Sized>(mean: f64, std: f64, rng: &mut R) -> f64 {
    if std == 0.0 {
        return mean.max(0.0);
    }
    let normal = Normal::new(mean, std).expect("validated normal parameters");
    normal.sample(rng).max(0.0)
}
