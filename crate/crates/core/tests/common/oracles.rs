//! Brute-force reference implementations written straight from the rule
//! definitions: no pruning, no shared code with the library beyond plain
//! data. Sets are `u64` masks over project positions.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub const EPS: f64 = 1e-9;

pub fn members(mask: u64) -> Vec<usize> {
    (0..64).filter(|&i| mask >> i & 1 == 1).collect()
}

pub fn cost(costs: &[u64], mask: u64) -> u64 {
    members(mask).iter().map(|&i| costs[i]).sum()
}

/// Every subset of `mask`, in increasing numeric order.
pub fn subsets(mask: u64) -> Vec<u64> {
    let m = members(mask);
    (0..1u64 << m.len())
        .map(|sel| {
            m.iter()
                .enumerate()
                .filter(|&(j, _)| sel >> j & 1 == 1)
                .fold(0u64, |acc, (_, &p)| acc | 1 << p)
        })
        .collect()
}

/// True when `a` wins the canonical tie-break against `b`: the
/// lowest-indexed project on which they differ belongs to `a`.
pub fn canonically_preferred(a: u64, b: u64) -> bool {
    let diff = a ^ b;
    diff != 0 && a & (diff & diff.wrapping_neg()) != 0
}

pub fn canonical_pick(family: &[u64]) -> Option<u64> {
    let mut best: Option<u64> = None;
    for &s in family {
        best = match best {
            Some(b) if !canonically_preferred(s, b) => Some(b),
            _ => Some(s),
        };
    }
    best
}

pub fn representation_score(proposals: &[u64], set: u64) -> BigRational {
    let n = BigInt::from(proposals.len());
    let mut total = BigRational::zero();
    for &p in proposals {
        let hits = (p & set).count_ones();
        let mut weight = BigRational::one();
        for _ in 0..=hits {
            total += weight.clone();
            weight /= BigRational::from_integer(n.clone());
        }
    }
    total
}

pub fn equal_representation(costs: &[u64], budget: u64, proposals: &[u64], k: u64) -> u64 {
    let union = proposals.iter().fold(0, |a, &p| a | p);
    let mut best: Option<BigRational> = None;
    let mut winners = Vec::new();
    for s in subsets(union) {
        if cost(costs, s) > k * budget {
            continue;
        }
        let score = representation_score(proposals, s);
        match &best {
            Some(b) if score < *b => continue,
            Some(b) if score == *b => winners.push(s),
            _ => {
                best = Some(score);
                winners = vec![s];
            }
        }
    }
    canonical_pick(&winners).expect("the empty set is always feasible")
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn set_partitions(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
    let Some((&first, rest)) = items.split_first() else {
        return vec![vec![]];
    };
    let mut out = Vec::new();
    for partition in set_partitions(rest) {
        for i in 0..partition.len() {
            let mut p = partition.clone();
            p[i].insert(0, first);
            out.push(p);
        }
        let mut p = partition;
        p.insert(0, vec![first]);
        out.push(p);
    }
    out
}

pub fn median(cluster: &[usize], coords: &[Vec<f64>]) -> usize {
    let sums: Vec<f64> = cluster
        .iter()
        .map(|&c| {
            cluster
                .iter()
                .map(|&o| distance(&coords[c], &coords[o]))
                .sum()
        })
        .collect();
    let min = sums.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut candidates: Vec<usize> = cluster
        .iter()
        .zip(&sums)
        .filter(|&(_, &s)| s <= min + EPS)
        .map(|(&c, _)| c)
        .collect();
    candidates.sort();
    candidates[0]
}

/// The k-median shortlist and its minimal l, or `None` when no partition
/// qualifies.
pub fn k_median(
    costs: &[u64],
    budget: u64,
    coords: &[Vec<f64>],
    union: u64,
    k: u64,
) -> Option<(u64, f64)> {
    let items = members(union);
    let mut admissible: Vec<(f64, u64)> = Vec::new();
    for partition in set_partitions(&items) {
        let medians: Vec<usize> = partition.iter().map(|c| median(c, coords)).collect();
        if medians.iter().map(|&m| costs[m]).sum::<u64>() > k * budget {
            continue;
        }
        let mut ok = true;
        let mut radius = 0.0f64;
        for (cluster, &own) in partition.iter().zip(&medians) {
            for &p in cluster {
                let d = distance(&coords[p], &coords[own]);
                radius = radius.max(d);
                if medians
                    .iter()
                    .any(|&m| d > distance(&coords[p], &coords[m]) + EPS)
                {
                    ok = false;
                }
            }
        }
        if ok {
            admissible.push((radius, medians.iter().fold(0, |a, &m| a | 1 << m)));
        }
    }
    let ell = admissible
        .iter()
        .map(|&(r, _)| r)
        .fold(f64::INFINITY, f64::min);
    let winners: Vec<u64> = admissible
        .iter()
        .filter(|&&(r, _)| r <= ell + EPS)
        .map(|&(_, s)| s)
        .collect();
    canonical_pick(&winners).map(|s| (s, ell))
}

pub fn approval_scores(ballots: &[u64], m: usize) -> Vec<u64> {
    (0..m)
        .map(|p| ballots.iter().filter(|&&b| b >> p & 1 == 1).count() as u64)
        .collect()
}

/// All maximum-approval feasible subsets of the shortlist.
pub fn approval_maximisers(
    costs: &[u64],
    budget: u64,
    shortlist: u64,
    ballots: &[u64],
) -> Vec<u64> {
    let scores = approval_scores(ballots, costs.len());
    let feasible: Vec<u64> = subsets(shortlist)
        .into_iter()
        .filter(|&s| cost(costs, s) <= budget)
        .collect();
    let total = |s: u64| members(s).iter().map(|&p| scores[p]).sum::<u64>();
    let best = feasible.iter().map(|&s| total(s)).max().unwrap_or(0);
    feasible.into_iter().filter(|&s| total(s) == best).collect()
}

pub fn approval_maximising(
    costs: &[u64],
    budget: u64,
    shortlist: u64,
    ballots: &[u64],
    priority: &[u64],
) -> u64 {
    let winners = approval_maximisers(costs, budget, shortlist, ballots);
    priority
        .iter()
        .copied()
        .find(|p| winners.contains(p))
        .unwrap_or_else(|| canonical_pick(&winners).expect("the empty set is feasible"))
}

pub fn greedy_approval(costs: &[u64], budget: u64, shortlist: u64, ballots: &[u64]) -> u64 {
    let scores = approval_scores(ballots, costs.len());
    let mut order = members(shortlist);
    order.sort_by(|&a, &b| scores[b].cmp(&scores[a]).then(a.cmp(&b)));
    let mut chosen = 0u64;
    let mut spent = 0;
    for p in order {
        if spent + costs[p] <= budget {
            chosen |= 1 << p;
            spent += costs[p];
        }
    }
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_preference() {
        assert!(canonically_preferred(0b001, 0b110));
        assert!(!canonically_preferred(0b110, 0b001));
        assert!(canonically_preferred(0b011, 0b010));
        assert!(!canonically_preferred(0b010, 0b010));
        assert_eq!(canonical_pick(&[0b100, 0b011, 0b101]), Some(0b011));
    }

    #[test]
    fn partitions_are_counted_by_bell_numbers() {
        let counts: Vec<usize> = (0..7)
            .map(|n| set_partitions(&(0..n).collect::<Vec<_>>()).len())
            .collect();
        assert_eq!(counts, [1, 1, 2, 5, 15, 52, 203]);
    }
}
