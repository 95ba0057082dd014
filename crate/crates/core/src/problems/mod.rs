//! Follower problems behind the shared [`FollowerProblem`] contract.

pub(crate) mod interdiction;
pub(crate) mod knapsack;
pub(crate) mod set_cover;
pub(crate) mod stable_set;

pub use interdiction::KipData;
pub use knapsack::KnapsackData;
pub use set_cover::SetCoverData;
pub use stable_set::GraphData;

use rand::Rng;

use crate::domain::{FollowerProblem, FollowerSolution, ItemSet, Payload, PricingInstance, Sense, TollVector};
use crate::error::Result;

/// Constructs the follower solver for an instance.
pub fn follower(inst: &PricingInstance) -> Box<dyn FollowerProblem + '_> {
    Box::new(InstanceFollower { inst })
}

struct InstanceFollower<'a> {
    inst: &'a PricingInstance,
}

impl FollowerProblem for InstanceFollower<'_> {
    fn sense(&self) -> Sense {
        self.inst.sense()
    }

    fn is_monotone(&self) -> bool {
        self.inst.is_monotone()
    }

    fn num_items(&self) -> usize {
        self.inst.n
    }

    fn is_feasible(&self, x: &ItemSet) -> bool {
        match &self.inst.payload {
            Payload::Knapsack(d) => d.fits(x),
            Payload::Graph(d) => d.is_stable(x),
            Payload::SetCover(d) => d.is_cover(x),
            Payload::Interdiction(d) => d.follower_knapsack().fits(x),
        }
    }

    fn objective(&self, x: &ItemSet, t: &TollVector) -> f64 {
        let net = self.inst.net_values(t);
        x.iter().map(|i| net[i]).sum()
    }

    fn best_response(&self, t: &TollVector, tiebreak: &[f64]) -> Result<(FollowerSolution, f64)> {
        let net = self.inst.net_values(t);
        let (x, value) = match &self.inst.payload {
            Payload::Knapsack(d) => knapsack::kpp_best_response(d, &net, tiebreak)?,
            Payload::Graph(d) => stable_set::maxss_best_response(d, &net, tiebreak)?,
            Payload::SetCover(d) => set_cover::minsc_best_response(d, &net, tiebreak)?,
            Payload::Interdiction(d) => {
                knapsack::kpp_best_response(&d.follower_knapsack(), &net, tiebreak)?
            }
        };
        Ok((FollowerSolution(x), value))
    }

    fn sample_solution(&self, rng: &mut dyn Rng) -> Result<FollowerSolution> {
        let x = match &self.inst.payload {
            Payload::Knapsack(d) => knapsack::sample_maximal(d, rng),
            Payload::Graph(d) => stable_set::sample_maximal(d, rng),
            Payload::SetCover(d) => set_cover::sample_minimal(d, rng)?,
            Payload::Interdiction(d) => knapsack::sample_maximal(&d.follower_knapsack(), rng),
        };
        Ok(FollowerSolution(x))
    }

    fn enumerate_solutions(&self, cap: usize) -> Result<Vec<FollowerSolution>> {
        let sets = match &self.inst.payload {
            Payload::Knapsack(d) => knapsack::enumerate_maximal(d, cap)?,
            Payload::Graph(d) => stable_set::enumerate_maximal(d, cap)?,
            Payload::SetCover(d) => set_cover::enumerate_minimal(d, cap)?,
            Payload::Interdiction(d) => {
                knapsack::enumerate_maximal(&d.follower_knapsack(), cap)?
            }
        };
        Ok(sets.into_iter().map(FollowerSolution).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_kpp() -> PricingInstance {
        PricingInstance::new(
            vec![1, 1, 1, 1],
            1,
            ItemSet::from_items(4, &[0, 1, 2]),
            Payload::Knapsack(KnapsackData {
                weights: vec![1, 1, 1, 2],
                capacity: 3,
            }),
        )
        .unwrap()
    }

    #[test]
    fn dispatch_matches_direct_solver() {
        let inst = toy_kpp();
        let f = inst.follower();
        let t = TollVector::new(vec![0.5, 0.5, 0.5, 0.0], &inst.tolled).unwrap();
        let (x, value) = f.best_response(&t, t.as_slice()).unwrap();
        let (direct, direct_value) = match &inst.payload {
            Payload::Knapsack(d) => {
                knapsack::kpp_best_response(d, &inst.net_values(&t), t.as_slice()).unwrap()
            }
            _ => unreachable!(),
        };
        assert_eq!(x.0, direct);
        assert!((value - direct_value).abs() < 1e-12);
        assert!((f.objective(x.set(), &t) - value).abs() < 1e-12);
    }

    #[test]
    fn sampling_reaches_every_maximal_packing() {
        use rand::SeedableRng;
        let inst = toy_kpp();
        let f = inst.follower();
        let mut seen = std::collections::HashSet::new();
        for seed in 0..2000u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            seen.insert(f.sample_solution(&mut rng).unwrap().items());
        }
        let mut expected = std::collections::HashSet::new();
        expected.insert(vec![0, 1, 2]);
        expected.insert(vec![0, 3]);
        expected.insert(vec![1, 3]);
        expected.insert(vec![2, 3]);
        assert_eq!(seen, expected);
    }

    #[test]
    fn interdiction_scales_tolls_by_value() {
        let inst = PricingInstance::new(
            vec![5, 7],
            1,
            ItemSet::universe(2),
            Payload::Interdiction(KipData {
                w: vec![2, 3],
                c: 5,
                leader_w: vec![1, 1],
                leader_c: 1,
            }),
        )
        .unwrap();
        let t = TollVector::new(vec![0.0, 1.0], &inst.tolled).unwrap();
        let net = inst.net_values(&t);
        assert_eq!(net, vec![5.0, 0.0]);
        let f = inst.follower();
        let (_, value) = f.best_response(&t, &[0.0, 0.0]).unwrap();
        assert!((value - 5.0).abs() < 1e-12);
    }

    #[test]
    fn set_cover_nets_add_tolls() {
        let sets = vec![
            ItemSet::from_items(2, &[0]),
            ItemSet::from_items(2, &[1]),
            ItemSet::from_items(2, &[0, 1]),
        ];
        let inst = PricingInstance::new(
            vec![2, 2, 3],
            1,
            ItemSet::from_items(3, &[2]),
            Payload::SetCover(SetCoverData {
                n_elements: 2,
                sets,
                element_weights: vec![1, 1],
            }),
        )
        .unwrap();
        let t = TollVector::new(vec![0.0, 0.0, 2.0], &inst.tolled).unwrap();
        assert_eq!(inst.net_values(&t), vec![2.0, 2.0, 5.0]);
        let f = inst.follower();
        let (x, value) = f.best_response(&t, t.as_slice()).unwrap();
        // Set 2 now costs 5, the pair costs 4.
        assert_eq!(x.set().items(), vec![0, 1]);
        assert!((value - 4.0).abs() < 1e-12);
    }
}
