#![allow(dead_code)]

use pgls_core::instance::{EdgeWeightKind, TspInstance};
use pgls_core::penalty::PenaltyTable;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_instance(n: usize, seed: u64) -> TspInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = (0..n)
        .map(|_| (rng.gen_range(0..1000) as f64, rng.gen_range(0..1000) as f64))
        .collect();
    TspInstance::new(format!("rand{n}_{seed}"), coords, EdgeWeightKind::Euc2d).unwrap()
}

pub fn random_penalties(n: usize, count: usize, max: u32, rng: &mut impl Rng) -> PenaltyTable {
    let mut pen = PenaltyTable::new();
    for _ in 0..count {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            pen.set(a, b, rng.gen_range(1..=max));
        }
    }
    pen
}

/// Euclidean distance rounded to the nearest integer, straight from the
/// TSPLIB definition.
pub fn euc_2d(a: (f64, f64), b: (f64, f64)) -> i64 {
    let (dx, dy) = (a.0 - b.0, a.1 - b.1);
    (dx * dx + dy * dy).sqrt().round() as i64
}

/// TSPLIB pseudo-Euclidean distance.
pub fn att(a: (f64, f64), b: (f64, f64)) -> i64 {
    let (dx, dy) = (a.0 - b.0, a.1 - b.1);
    let r = ((dx * dx + dy * dy) / 10.0).sqrt();
    let t = r.round() as i64;
    if (t as f64) < r {
        t + 1
    } else {
        t
    }
}

pub fn cycle_cost(order: &[usize], cost: impl Fn(usize, usize) -> i64) -> i64 {
    (0..order.len())
        .map(|i| cost(order[i], order[(i + 1) % order.len()]))
        .sum()
}

pub fn cycle_penalty(order: &[usize], pen: &PenaltyTable) -> u64 {
    (0..order.len())
        .map(|i| pen.get(order[i], order[(i + 1) % order.len()]) as u64)
        .sum()
}

/// Every permutation of `0..n` starting with city 0.
pub fn tours_from_zero(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..rest.len() {
            let c = rest.remove(i);
            prefix.push(c);
            rec(prefix, rest, out);
            prefix.pop();
            rest.insert(i, c);
        }
    }
    let mut out = Vec::new();
    rec(&mut vec![0], &mut (1..n).collect(), &mut out);
    out
}

/// Tours reachable by one 2-opt move: reverse `order[i+1..=j]` for every
/// pair of non-adjacent edges.
pub fn two_opt_neighbors(order: &[usize]) -> Vec<Vec<usize>> {
    let n = order.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let mut t = order.to_vec();
            t[i + 1..=j].reverse();
            out.push(t);
        }
    }
    out
}

/// Exact two-sided permutation p-value of the U statistic: the share of
/// all splits of the pooled sample whose U is at least as far from its
/// mean as the observed one.
pub fn exact_permutation_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = pooled.len();
    let na = a.len();
    let u_of = |mask: u32| -> f64 {
        let mut u = 0.0;
        for i in (0..n).filter(|i| mask >> i & 1 == 1) {
            for j in (0..n).filter(|j| mask >> j & 1 == 0) {
                u += if pooled[i] > pooled[j] {
                    1.0
                } else if pooled[i] == pooled[j] {
                    0.5
                } else {
                    0.0
                };
            }
        }
        u
    };
    let mu = (na * (n - na)) as f64 / 2.0;
    let observed = (u_of((1u32 << na) - 1) - mu).abs();
    let (mut hits, mut total) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != na {
            continue;
        }
        total += 1;
        if (u_of(mask) - mu).abs() >= observed - 1e-9 {
            hits += 1;
        }
    }
    hits as f64 / total as f64
}

/// U of `a` by counting pairs: `a_i > b_j` scores 1, ties score one half.
pub fn brute_force_u(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| (x, y)))
        .map(|(x, y)| {
            if x > y {
                1.0
            } else if x == y {
                0.5
            } else {
                0.0
            }
        })
        .sum()
}
