//! Fixed-group dispatch: trucks are bound to load sites in proportion to each
//! site's share of total shovel output.

use super::{argmin_by, Decision, DispatchPolicy, MineSnapshot, PolicyError};
use crate::config::MineConfig;
use crate::events::SimRng;
use crate::sim::{EquipmentStatus, Location};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShovelSpec {
    pub count: u32,
    /// Tons per bucket.
    pub bucket_size: f64,
    /// Minutes per bucket.
    pub cycle_time: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RatioError {
    #[error("load site {site} shovel {shovel}: cycle time must be > 0")]
    NonPositiveTime { site: usize, shovel: usize },
    #[error("total shovel output is zero")]
    NoOutput,
}

/// Each site's share of total shovel output rate (tons per minute).
pub fn productivity_ratio(sites: &[Vec<ShovelSpec>]) -> Result<Vec<f64>, RatioError> {
    let mut rates = Vec::with_capacity(sites.len());
    for (i, shovels) in sites.iter().enumerate() {
        let mut rate = 0.0;
        for (j, s) in shovels.iter().enumerate() {
            if !(s.cycle_time > 0.0) {
                return Err(RatioError::NonPositiveTime { site: i, shovel: j });
            }
            rate += s.count as f64 * s.bucket_size / s.cycle_time;
        }
        rates.push(rate);
    }
    let total: f64 = rates.iter().sum();
    if !(total > 0.0) {
        return Err(RatioError::NoOutput);
    }
    Ok(rates.into_iter().map(|r| r / total).collect())
}

/// Greedy capacity grouping.
///
/// Trucks, largest capacity first (stable on index), go to the site with the
/// largest remaining deficit `ratio_j * total_capacity - assigned_j`; ties go
/// to the lowest index. Sites with ratio 0 receive nothing. Returns the site
/// index for each truck.
pub fn fixed_group_assign(ratios: &[f64], capacities: &[f64]) -> Vec<usize> {
    let total: f64 = capacities.iter().sum();
    let mut deficit: Vec<f64> = ratios.iter().map(|r| r * total).collect();
    let mut order: Vec<usize> = (0..capacities.len()).collect();
    order.sort_by(|&a, &b| capacities[b].total_cmp(&capacities[a]));
    let mut out = vec![0; capacities.len()];
    for t in order {
        let site = argmin_by((0..ratios.len()).filter(|&j| ratios[j] > 0.0), |j| {
            -deficit[j]
        })
        .expect("at least one site with positive ratio");
        deficit[site] -= capacities[t];
        out[t] = site;
    }
    out
}

/// Site binding for every truck of `config`, in truck id order.
pub fn fixed_group_assign_config(config: &MineConfig) -> Vec<usize> {
    let specs: Vec<Vec<ShovelSpec>> = config
        .load_sites
        .iter()
        .map(|s| {
            s.shovels
                .iter()
                .map(|sh| ShovelSpec {
                    count: sh.count,
                    bucket_size: sh.bucket_size,
                    cycle_time: sh.cycle_time,
                })
                .collect()
        })
        .collect();
    let ratios = productivity_ratio(&specs).expect("validated config");
    let capacities: Vec<f64> = config
        .charging_site
        .fleets
        .iter()
        .flat_map(|f| std::iter::repeat_n(f.capacity, f.count as usize))
        .collect();
    fixed_group_assign(&ratios, &capacities)
}

/// Binds trucks to load sites once at initialization; shortest queue within
/// the bound site and nearest dump site.
#[derive(Debug, Default, Clone)]
pub struct FixedGroupDispatcher {
    binding: Vec<usize>,
}

impl FixedGroupDispatcher {
    pub fn binding(&self) -> &[usize] {
        &self.binding
    }

    fn bound_site(&self, s: &MineSnapshot) -> Decision {
        let truck = s
            .requester()
            .ok_or_else(|| PolicyError::new(self.name(), "order requested without a requester"))?;
        let site = *self
            .binding
            .get(truck.id)
            .ok_or_else(|| PolicyError::new(self.name(), "truck has no group binding"))?;
        // the binding holds even if the site has lost every shovel
        Ok(s.load_sites[site].is_eligible().then_some(site))
    }
}

impl DispatchPolicy for FixedGroupDispatcher {
    fn name(&self) -> &str {
        "FixedGroupDispatcher"
    }

    fn initialize(&mut self, s: &MineSnapshot) -> Result<(), PolicyError> {
        let specs: Vec<Vec<ShovelSpec>> = s
            .load_sites
            .iter()
            .map(|site| {
                site.shovels
                    .iter()
                    .filter(|sh| sh.status != EquipmentStatus::Broken)
                    .map(|sh| ShovelSpec {
                        count: 1,
                        bucket_size: sh.bucket_size,
                        cycle_time: sh.cycle_time,
                    })
                    .collect()
            })
            .collect();
        let ratios =
            productivity_ratio(&specs).map_err(|e| PolicyError::new(self.name(), e.to_string()))?;
        let capacities: Vec<f64> = s.trucks.iter().map(|t| t.capacity).collect();
        self.binding = fixed_group_assign(&ratios, &capacities);
        Ok(())
    }

    fn give_init_order(&mut self, s: &MineSnapshot, _: &mut SimRng) -> Decision {
        self.bound_site(s)
    }

    fn give_haul_order(&mut self, s: &MineSnapshot, _: &mut SimRng) -> Decision {
        let from = s.requester().and_then(|t| t.location).ok_or_else(|| {
            PolicyError::new(self.name(), "haul order without a parked requester")
        })?;
        Ok(argmin_by(s.dump_site_ids(), |j| {
            s.distance(from, Location::Dump(j)).unwrap_or(f64::INFINITY)
        }))
    }

    fn give_back_order(&mut self, s: &MineSnapshot, _: &mut SimRng) -> Decision {
        self.bound_site(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(count: u32, size: f64, time: f64) -> ShovelSpec {
        ShovelSpec {
            count,
            bucket_size: size,
            cycle_time: time,
        }
    }

    #[test]
    fn ratio_matches_worked_example() {
        // 2 x 10/5 = 4 t/min against 1 x 20/10 = 2 t/min
        let r = productivity_ratio(&[vec![spec(2, 10.0, 5.0)], vec![spec(1, 20.0, 10.0)]]).unwrap();
        assert!((r[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((r[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn single_site_ratio_is_one() {
        assert_eq!(
            productivity_ratio(&[vec![spec(3, 7.0, 2.5)]]).unwrap(),
            vec![1.0]
        );
    }

    #[test]
    fn zero_cycle_time_is_an_error() {
        assert_eq!(
            productivity_ratio(&[vec![spec(1, 10.0, 1.0)], vec![spec(1, 10.0, 0.0)]]),
            Err(RatioError::NonPositiveTime { site: 1, shovel: 0 })
        );
    }

    #[test]
    fn symmetric_sites_split_evenly() {
        let a = fixed_group_assign(&[0.5, 0.5], &[50.0; 4]);
        assert_eq!(a.iter().filter(|&&s| s == 0).count(), 2);
        assert_eq!(a.iter().filter(|&&s| s == 1).count(), 2);
    }

    #[test]
    fn zero_ratio_site_gets_nothing() {
        assert_eq!(
            fixed_group_assign(&[1.0, 0.0], &[30.0, 60.0, 90.0]),
            vec![0, 0, 0]
        );
        assert_eq!(fixed_group_assign(&[0.0, 1.0], &[30.0, 60.0]), vec![1, 1]);
    }

    #[test]
    fn larger_trucks_are_placed_first() {
        // 90 goes to site 0 (deficit 112.5 vs 67.5), then 60 to site 1, then 30 to site 0
        assert_eq!(
            fixed_group_assign(&[0.625, 0.375], &[30.0, 60.0, 90.0]),
            vec![0, 1, 0]
        );
    }

    #[test]
    fn bundled_binding_covers_the_fleet() {
        let c = MineConfig::bundled();
        let b = fixed_group_assign_config(&c);
        assert_eq!(b.len(), c.truck_count());
        assert!(b.iter().all(|&s| s < c.load_sites.len()));
    }

    fn arb_sites() -> impl Strategy<Value = Vec<Vec<ShovelSpec>>> {
        prop::collection::vec(
            prop::collection::vec(
                (1u32..4, 1.0f64..50.0, 0.5f64..10.0).prop_map(|(c, s, t)| spec(c, s, t)),
                1..4,
            ),
            1..7,
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn ratios_sum_to_one_and_follow_permutation(sites in arb_sites(), rot in 0usize..7) {
            let r = productivity_ratio(&sites).unwrap();
            prop_assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let k = rot % sites.len();
            let mut rotated = sites.clone();
            rotated.rotate_left(k);
            let rr = productivity_ratio(&rotated).unwrap();
            for (i, v) in rr.iter().enumerate() {
                prop_assert!((v - r[(i + k) % sites.len()]).abs() < 1e-12);
            }
        }

        #[test]
        fn every_truck_is_assigned_deterministically(
            sites in arb_sites(),
            caps in prop::collection::vec(prop::sample::select(vec![40.0, 60.0, 90.0]), 1..80),
        ) {
            let r = productivity_ratio(&sites).unwrap();
            let a = fixed_group_assign(&r, &caps);
            prop_assert_eq!(a.len(), caps.len());
            prop_assert!(a.iter().all(|&s| s < sites.len()));
            prop_assert_eq!(a, fixed_group_assign(&r, &caps));
        }
    }
}
