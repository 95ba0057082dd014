//! Seeded random instance generators.
//!
//! All generators sample real quantities first, apply the tolled-item factor,
//! and round once at the end, except the set-cover generator whose tolled
//! values are an exact division of the rounded base value (stored over the
//! shared denominator 23 so nothing is lost). Instances are bit-reproducible
//! from (parameters, seed).

use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{ItemSet, Payload, PricingInstance};
use crate::problems::{GraphData, KipData, KnapsackData, SetCoverData};

fn round_i64(x: f64) -> i64 {
    x.round() as i64
}

/// Picks `k` distinct indices out of `0..n`.
fn random_subset(n: usize, k: usize, rng: &mut ChaCha8Rng) -> ItemSet {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    ItemSet::from_items(n, &order[..k.min(n)])
}

/// Knapsack pricing instance: weights uniform in [1,100], value densities
/// uniform in [0.75,1.25], a fraction `r` of items tolled with doubled values,
/// capacity `r` times the weight sum.
pub fn generate_kpp(n: usize, r: f64, seed: u64) -> PricingInstance {
    assert!(n >= 2);
    assert!(r > 0.0 && r < 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w_real: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..=100.0)).collect();
    let density: Vec<f64> = (0..n).map(|_| rng.random_range(0.75..=1.25)).collect();
    let tolled = random_subset(n, round_i64(r * n as f64) as usize, &mut rng);
    let weights: Vec<i64> = w_real.iter().map(|&w| round_i64(w)).collect();
    let v_num: Vec<i64> = (0..n)
        .map(|i| {
            let factor = if tolled.contains(i) { 2.0 } else { 1.0 };
            round_i64(w_real[i] * density[i] * factor)
        })
        .collect();
    let capacity = round_i64(r * w_real.iter().sum::<f64>());
    PricingInstance::new(
        v_num,
        1,
        tolled,
        Payload::Knapsack(KnapsackData { weights, capacity }),
    )
    .expect("generated knapsack instance is valid")
}

/// Stable-set pricing instance on an Erdos-Renyi graph with edge probability
/// `d`; 40% of vertices tolled, values uniform in [50,150], tolled values
/// scaled by 1.3.
pub fn generate_maxsspp(n: usize, d: f64, seed: u64) -> PricingInstance {
    assert!(n >= 2);
    assert!((0.0..=1.0).contains(&d));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random_bool(d) {
                edges.push((u, v));
            }
        }
    }
    let v_real: Vec<f64> = (0..n).map(|_| rng.random_range(50.0..=150.0)).collect();
    let tolled = random_subset(n, round_i64(0.4 * n as f64) as usize, &mut rng);
    let v_num: Vec<i64> = (0..n)
        .map(|i| {
            let factor = if tolled.contains(i) { 1.3 } else { 1.0 };
            round_i64(v_real[i] * factor)
        })
        .collect();
    PricingInstance::new(
        v_num,
        1,
        tolled,
        Payload::Graph(GraphData::from_edges(n, &edges).expect("simple graph")),
    )
    .expect("generated stable-set instance is valid")
}

/// Set-cover pricing instance.
///
/// `ratio` is the set-to-element ratio |I|/|E|. Element weights are uniform in
/// [50,85]; memberships are independent with probability 0.23 plus a repair
/// pass assigning each uncovered element to one random set. Base values are
/// the perturbed member-weight sums rounded to integers; the toll-free part is
/// seeded with a greedy subcover so covering without tolled items stays
/// possible; 28% of items (drawn outside that subcover) are tolled and their
/// values divided by exactly 2.3.
pub fn generate_minscpp(n_sets: usize, ratio: f64, seed: u64) -> PricingInstance {
    assert!(n_sets >= 2);
    assert!(ratio > 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_elements = round_i64(n_sets as f64 / ratio).max(1) as usize;
    let w_real: Vec<f64> = (0..n_elements)
        .map(|_| rng.random_range(50.0..=85.0))
        .collect();
    let mut sets: Vec<ItemSet> = Vec::with_capacity(n_sets);
    for _ in 0..n_sets {
        let mut s = ItemSet::new(n_elements);
        for e in 0..n_elements {
            if rng.random_bool(0.23) {
                s.insert(e);
            }
        }
        sets.push(s);
    }
    for e in 0..n_elements {
        if !sets.iter().any(|s| s.contains(e)) {
            let k = rng.random_range(0..n_sets);
            sets[k].insert(e);
        }
    }
    let factors: Vec<f64> = (0..n_sets).map(|_| rng.random_range(0.9..=1.1)).collect();
    let base: Vec<i64> = (0..n_sets)
        .map(|i| {
            let sum: f64 = sets[i].iter().map(|e| w_real[e]).sum();
            round_i64(sum * factors[i])
        })
        .collect();

    // Greedy subcover: repeatedly take the set covering the most still
    // uncovered elements (smallest index on ties).
    let mut subcover = ItemSet::new(n_sets);
    let mut uncovered = ItemSet::universe(n_elements);
    while !uncovered.is_empty() {
        let pick = (0..n_sets)
            .max_by_key(|&i| (sets[i].intersect(&uncovered).count(), std::cmp::Reverse(i)))
            .unwrap();
        subcover.insert(pick);
        uncovered = uncovered.minus(&sets[pick]);
    }

    let pool: Vec<usize> = (0..n_sets).filter(|&i| !subcover.contains(i)).collect();
    let mut pool_order = pool.clone();
    pool_order.shuffle(&mut rng);
    let want = round_i64(0.28 * n_sets as f64) as usize;
    let tolled = ItemSet::from_items(n_sets, &pool_order[..want.min(pool_order.len())]);

    let v_num: Vec<i64> = (0..n_sets)
        .map(|i| {
            if tolled.contains(i) {
                10 * base[i]
            } else {
                23 * base[i]
            }
        })
        .collect();
    let element_weights: Vec<i64> = w_real.iter().map(|&w| round_i64(w)).collect();
    PricingInstance::new(
        v_num,
        23,
        tolled,
        Payload::SetCover(SetCoverData {
            n_elements,
            sets,
            element_weights,
        }),
    )
    .expect("generated set-cover instance is valid")
}

/// Knapsack interdiction instance: values and both weight vectors uniform
/// integers in [1,100], capacities half the respective weight sums.
pub fn generate_kip(n: usize, seed: u64) -> PricingInstance {
    assert!(n >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v_num: Vec<i64> = (0..n).map(|_| rng.random_range(1..=100)).collect();
    let w: Vec<i64> = (0..n).map(|_| rng.random_range(1..=100)).collect();
    let leader_w: Vec<i64> = (0..n).map(|_| rng.random_range(1..=100)).collect();
    let c = round_i64(0.5 * w.iter().sum::<i64>() as f64);
    let leader_c = round_i64(0.5 * leader_w.iter().sum::<i64>() as f64);
    PricingInstance::new(
        v_num,
        1,
        ItemSet::universe(n),
        Payload::Interdiction(KipData {
            w,
            c,
            leader_w,
            leader_c,
        }),
    )
    .expect("generated interdiction instance is valid")
}
