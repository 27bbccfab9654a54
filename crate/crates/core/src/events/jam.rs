//! Traffic jam sampling.
//!
//! At each departure the jam position is drawn from a mixture of normals, one
//! per truck already on the road, centred at that truck's completion rate
//! (shifted by `mu`) and weighted by it. Components are truncated to `[0, 1]`.
//! The jam starts at the departure instant and lasts a Weibull-distributed
//! time; the departing truck is held up only if it reaches the jam position
//! before the jam clears.

use rand::Rng;
use rand_distr::{Distribution, Weibull};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use super::JamParams;

const MIN_COMPONENT_MASS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
struct Component {
    centre: f64,
    weight: f64,
    lower_cdf: f64,
    mass: f64,
}

/// Jam position density over completion rate `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JamDensity {
    sigma: f64,
    components: Vec<Component>,
}

/// Builds the jam density for a road whose trucks sit at `completions`.
///
/// Returns `None` for an empty road: no jam is possible. When every truck has
/// just departed (all completion rates zero) the components fall back to
/// uniform weights.
pub fn jam_position_density(completions: &[f64], mu: f64, sigma: f64) -> Option<JamDensity> {
    if completions.is_empty() {
        return None;
    }
    let total: f64 = completions.iter().sum();
    let uniform = total <= 0.0;
    let std = Normal::new(0.0, 1.0).expect("standard normal");
    let components = completions
        .iter()
        .map(|&c| {
            let weight = if uniform {
                1.0 / completions.len() as f64
            } else {
                c / total
            };
            let mut centre = c + mu;
            let mut lower_cdf = std.cdf((0.0 - centre) / sigma);
            let mut mass = std.cdf((1.0 - centre) / sigma) - lower_cdf;
            if mass < MIN_COMPONENT_MASS {
                // centre far outside the road: pin it to the nearest end
                centre = centre.clamp(0.0, 1.0);
                lower_cdf = std.cdf((0.0 - centre) / sigma);
                mass = std.cdf((1.0 - centre) / sigma) - lower_cdf;
            }
            Component {
                centre,
                weight,
                lower_cdf,
                mass,
            }
        })
        .collect();
    Some(JamDensity { sigma, components })
}

impl JamDensity {
    /// Mixture weights in truck order.
    pub fn weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.weight).collect()
    }

    pub fn centres(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.centre).collect()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        let std = Normal::new(0.0, 1.0).expect("standard normal");
        self.components
            .iter()
            .map(|c| c.weight * std.pdf((x - c.centre) / self.sigma) / (self.sigma * c.mass))
            .sum()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let std = Normal::new(0.0, 1.0).expect("standard normal");
        self.components
            .iter()
            .map(|c| c.weight * (std.cdf((x - c.centre) / self.sigma) - c.lower_cdf) / c.mass)
            .sum()
    }

    /// Draws one jam position by component selection and inverse-CDF sampling.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let pick: f64 = rng.gen();
        let mut acc = 0.0;
        let mut chosen = &self.components[self.components.len() - 1];
        for c in &self.components {
            acc += c.weight;
            if pick < acc {
                chosen = c;
                break;
            }
        }
        let std = Normal::new(0.0, 1.0).expect("standard normal");
        let u: f64 = rng.gen();
        let p = chosen.lower_cdf + u * chosen.mass;
        let x = chosen.centre + self.sigma * std.inverse_cdf(p.clamp(1e-300, 1.0 - 1e-16));
        x.clamp(0.0, 1.0)
    }
}

/// Outcome of a jam draw for one departing truck.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JamDraw {
    /// Completion rate where the jam sits.
    pub position: f64,
    /// Minutes from the departure instant until the jam clears.
    pub duration: f64,
    /// Extra minutes the truck spends in the jam; `None` when unaffected.
    pub delay: Option<f64>,
}

/// The truck reaches `position` after `position * trip_minutes`; it is held
/// for the residual jam time iff it gets there strictly before the jam ends.
pub fn resolve_jam(position: f64, duration: f64, trip_minutes: f64) -> Option<f64> {
    let reach = position * trip_minutes;
    (reach < duration).then_some(duration - reach)
}

/// Samples a jam for a truck departing onto a road.
///
/// `completions` holds the completion rates of every truck on the road,
/// including the departing one. Draws nothing for an empty road.
pub fn sample_jam<R: Rng + ?Sized>(
    completions: &[f64],
    params: &JamParams,
    trip_minutes: f64,
    rng: &mut R,
) -> Option<JamDraw> {
    let density = jam_position_density(completions, params.mu, params.sigma)?;
    let u: f64 = rng.gen();
    if u >= params.jam_probability {
        return None;
    }
    let position = density.sample(rng);
    let weibull = Weibull::new(params.weibull_scale, params.weibull_shape)
        .expect("validated weibull parameters");
    let duration = weibull.sample(rng);
    Some(JamDraw {
        position,
        duration,
        delay: resolve_jam(position, duration, trip_minutes),
    })
}
