//! Exact water-filling power allocation.
//!
//! Maximizes `sum_i log(1 + g_i q_i)` subject to `sum q_i = budget`, `q >= 0`
//! for gains sorted in descending order. The KKT solution is
//! `q_i = [level - 1/g_i]^+` where the water level makes the allocation
//! exhaust the budget. The solver is non-iterative: the number of active
//! channels is the largest `m` whose candidate level
//! `(budget + sum_{i<=m} 1/g_i)/m` still clears `1/g_m`.
//!
//! This one solver backs the spatial data allocation of gain-feedback
//! schemes, the pilot eigen-power design of covariance-feedback schemes, and
//! the perfect-knowledge adaptive sub-block bound.

use crate::error::{Error, Result};

/// Solution of a water-filling instance.
#[derive(Debug, Clone)]
pub struct WaterfillResult {
    /// Per-channel power, aligned with the gains; zero on inactive channels.
    pub alloc: Vec<f64>,
    /// Water level. At zero budget this is `1/gains[0]` so the level is
    /// continuous as the budget shrinks to zero.
    pub level: f64,
    /// Number of strictly positive allocations.
    pub active: usize,
}

impl WaterfillResult {
    /// Objective value `sum log2(1 + g_i q_i)` for the gains that produced
    /// this allocation.
    pub fn capacity_bits(&self, gains: &[f64]) -> f64 {
        gains
            .iter()
            .zip(&self.alloc)
            .map(|(&g, &q)| (1.0 + g * q).log2())
            .sum()
    }
}

/// Water-fill `budget` over channels with the given `gains`.
///
/// Gains must be strictly positive and sorted in descending order; the
/// budget must be non-negative.
pub fn waterfill(gains: &[f64], budget: f64) -> Result<WaterfillResult> {
    if gains.is_empty() {
        return Err(Error::domain("water-filling needs at least one channel"));
    }
    for (k, &g) in gains.iter().enumerate() {
        if !(g > 0.0) || !g.is_finite() {
            return Err(Error::domain(format!(
                "gains must be positive and finite, got {g} at index {k}"
            )));
        }
        if k > 0 && g > gains[k - 1] {
            return Err(Error::domain(
                "gains must be sorted in descending order".to_string(),
            ));
        }
    }
    if !(budget >= 0.0) || !budget.is_finite() {
        return Err(Error::domain(format!(
            "budget must be non-negative and finite, got {budget}"
        )));
    }

    let n = gains.len();
    if budget == 0.0 {
        return Ok(WaterfillResult {
            alloc: vec![0.0; n],
            level: 1.0 / gains[0],
            active: 0,
        });
    }

    // Largest m whose candidate level still clears the m-th channel floor.
    let mut inv_sum = 0.0;
    let mut best = (1, budget + 1.0 / gains[0]);
    for m in 1..=n {
        inv_sum += 1.0 / gains[m - 1];
        let level = (budget + inv_sum) / m as f64;
        if level > 1.0 / gains[m - 1] {
            best = (m, level);
        } else {
            break;
        }
    }
    let (active, level) = best;
    let mut alloc = vec![0.0; n];
    for i in 0..active {
        alloc[i] = level - 1.0 / gains[i];
    }
    Ok(WaterfillResult {
        alloc,
        level,
        active,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;

    #[test]
    fn symmetric_channels_split_evenly() {
        let r = waterfill(&[1.0, 1.0], 2.0).unwrap();
        assert_eq!(r.alloc, vec![1.0, 1.0]);
        assert_eq!(r.level, 2.0);
        assert_eq!(r.active, 2);
    }

    #[test]
    fn weak_channel_is_shut_off() {
        // m = 2 would need level 6, but the floor of the weak channel is 10.
        let r = waterfill(&[1.0, 0.1], 1.0).unwrap();
        assert_eq!(r.alloc, vec![1.0, 0.0]);
        assert_eq!(r.level, 2.0);
        assert_eq!(r.active, 1);
    }

    #[test]
    fn two_channel_hand_execution() {
        let r = waterfill(&[2.0, 1.0], 3.0).unwrap();
        assert!((r.level - 2.25).abs() < 1e-15);
        assert!((r.alloc[0] - 1.75).abs() < 1e-15);
        assert!((r.alloc[1] - 1.25).abs() < 1e-15);
        assert_eq!(r.active, 2);
    }

    #[test]
    fn zero_budget_convention() {
        let r = waterfill(&[4.0, 2.0, 1.0], 0.0).unwrap();
        assert_eq!(r.alloc, vec![0.0; 3]);
        assert_eq!(r.active, 0);
        assert_eq!(r.level, 0.25);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(waterfill(&[], 1.0), Err(Error::Domain(_))));
        assert!(matches!(waterfill(&[1.0, 2.0], 1.0), Err(Error::Domain(_))));
        assert!(matches!(waterfill(&[1.0, 0.0], 1.0), Err(Error::Domain(_))));
        assert!(matches!(waterfill(&[1.0], -0.5), Err(Error::Domain(_))));
    }

    fn random_instance(stream: &mut RandomStream, n: usize) -> (Vec<f64>, f64) {
        let mut gains: Vec<f64> = (0..n).map(|_| 0.05 + 4.0 * stream.next_uniform()).collect();
        gains.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let budget = 5.0 * stream.next_uniform();
        (gains, budget)
    }

    /// KKT certificate: budget exhausted, active powers ride the level,
    /// inactive channels sit below it.
    fn check_kkt(gains: &[f64], budget: f64, r: &WaterfillResult) {
        let total: f64 = r.alloc.iter().sum();
        assert!(
            (total - budget).abs() <= 1e-9 * budget.max(1.0),
            "budget violated: {total} vs {budget}"
        );
        for (i, &q) in r.alloc.iter().enumerate() {
            if i < r.active {
                assert!(q > 0.0, "active channel {i} has no power");
                assert!((r.level - 1.0 / gains[i] - q).abs() < 1e-9);
            } else {
                assert_eq!(q, 0.0);
                assert!(
                    r.level <= 1.0 / gains[i] + 1e-12,
                    "level {} above floor of inactive channel {i}",
                    r.level
                );
            }
        }
    }

    #[test]
    fn kkt_certificates_on_random_instances() {
        let mut stream = RandomStream::new(123);
        for _ in 0..500 {
            let n = 1 + (stream.next_u64() % 6) as usize;
            let (gains, budget) = random_instance(&mut stream, n);
            let r = waterfill(&gains, budget).unwrap();
            check_kkt(&gains, budget, &r);
        }
    }

    #[test]
    fn beats_random_feasible_allocations() {
        // Independent optimality oracle: simplex-sampled feasible points.
        let mut stream = RandomStream::new(77);
        for _ in 0..5 {
            let n = 2 + (stream.next_u64() % 3) as usize;
            let (gains, budget) = random_instance(&mut stream, n);
            let r = waterfill(&gains, budget).unwrap();
            let opt = r.capacity_bits(&gains);
            for _ in 0..100_000 {
                let raw: Vec<f64> = (0..n).map(|_| -stream.next_uniform().ln()).collect();
                let s: f64 = raw.iter().sum();
                let value: f64 = gains
                    .iter()
                    .zip(&raw)
                    .map(|(&g, &e)| (1.0 + g * budget * e / s).log2())
                    .sum();
                assert!(
                    value <= opt + 1e-9,
                    "random point {value} beat water-filling {opt}"
                );
            }
        }
    }

    #[test]
    fn active_count_is_monotone_in_budget() {
        let mut stream = RandomStream::new(31);
        for _ in 0..200 {
            let (gains, _) = random_instance(&mut stream, 4);
            let mut last = 0;
            for k in 0..=20 {
                let r = waterfill(&gains, 0.5 * k as f64).unwrap();
                assert!(
                    r.active >= last,
                    "active count dropped from {last} to {} as budget grew",
                    r.active
                );
                last = r.active;
            }
        }
    }
}
