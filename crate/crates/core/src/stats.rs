//! Sample statistics and the Mann-Whitney U test.

use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("sample `{0}` is empty")]
    EmptySample(&'static str),
    #[error("sample `{0}` contains a non-finite value")]
    NonFinite(&'static str),
}

fn check(sample: &[f64], name: &'static str) -> Result<(), StatsError> {
    if sample.is_empty() {
        return Err(StatsError::EmptySample(name));
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite(name));
    }
    Ok(())
}

pub fn mean(sample: &[f64]) -> Result<f64, StatsError> {
    check(sample, "sample")?;
    Ok(sample.iter().sum::<f64>() / sample.len() as f64)
}

pub fn median(sample: &[f64]) -> Result<f64, StatsError> {
    check(sample, "sample")?;
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    Ok(if s.len() % 2 == 1 {
        s[m]
    } else {
        (s[m - 1] + s[m]) / 2.0
    })
}

/// Result of a two-sided Mann-Whitney U test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MannWhitney {
    /// U of the first sample: the number of pairs with `a_i > b_j`, ties
    /// counting one half.
    pub u: f64,
    /// Two-sided p-value from the normal approximation with tie and
    /// continuity corrections.
    pub p_value: f64,
    pub z: f64,
}

/// Mid-ranks (1-based) of the pooled sample and the tie term Σ(t³ − t).
fn pooled_ranks(a: &[f64], b: &[f64]) -> (Vec<f64>, f64) {
    let mut pooled: Vec<(f64, usize)> = a
        .iter()
        .chain(b.iter())
        .copied()
        .enumerate()
        .map(|(i, x)| (x, i))
        .collect();
    pooled.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut ranks = vec![0.0; pooled.len()];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i + 1;
        while j < pooled.len() && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        let avg = (i + 1 + j) as f64 / 2.0;
        for item in &pooled[i..j] {
            ranks[item.1] = avg;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    (ranks, tie_term)
}

pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney, StatsError> {
    check(a, "a")?;
    check(b, "b")?;
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let n = n1 + n2;
    let (ranks, tie_term) = pooled_ranks(a, b);
    let rank_sum_a: f64 = ranks[..a.len()].iter().sum();
    let u = rank_sum_a - n1 * (n1 + 1.0) / 2.0;

    let mu = n1 * n2 / 2.0;
    let var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var <= 0.0 {
        // Every observation tied: no evidence either way.
        return Ok(MannWhitney {
            u,
            p_value: 1.0,
            z: 0.0,
        });
    }
    let z = ((u - mu).abs() - 0.5).max(0.0) / var.sqrt();
    let normal = Normal::standard();
    let p_value = (2.0 * normal.sf(z)).min(1.0);
    Ok(MannWhitney { u, p_value, z })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_median() {
        assert_eq!(mean(&[10.0, 20.0, 30.0]).unwrap(), 20.0);
        assert_eq!(median(&[3.0, 1.0, 2.0]).unwrap(), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]).unwrap(), 2.5);
        assert!(mean(&[]).is_err());
        assert!(median(&[f64::NAN]).is_err());
    }

    #[test]
    fn complete_separation() {
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.u, 0.0);
        let r = mann_whitney_u(&[4.0, 5.0, 6.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.u, 9.0);
    }

    #[test]
    fn interleaved_samples() {
        let r = mann_whitney_u(&[1.0, 3.0, 5.0, 7.0], &[2.0, 4.0, 6.0, 8.0]).unwrap();
        assert_eq!(r.u, 6.0);
    }

    #[test]
    fn identical_samples() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let r = mann_whitney_u(&a, &a).unwrap();
        assert_eq!(r.u, 12.5);
        assert_eq!(r.p_value, 1.0);
        let flat = [2.0; 6];
        assert_eq!(mann_whitney_u(&flat, &flat).unwrap().p_value, 1.0);
    }

    #[test]
    fn empty_sample_is_an_error() {
        assert_eq!(
            mann_whitney_u(&[], &[1.0]).unwrap_err(),
            StatsError::EmptySample("a")
        );
        assert!(mann_whitney_u(&[1.0], &[]).is_err());
    }

    #[test]
    fn matches_scipy_reference() {
        // scipy.stats.mannwhitneyu(a, b, alternative="two-sided",
        // method="asymptotic", use_continuity=True)
        let a = [1.1, 2.4, 2.4, 3.9, 5.0, 7.2, 8.8];
        let b = [2.4, 4.1, 6.3, 6.3, 9.0, 9.5, 10.2, 11.0];
        let r = mann_whitney_u(&a, &b).unwrap();
        assert_eq!(r.u, 12.0);
        assert!((r.p_value - 0.071_570_834_126_489_46).abs() < 1e-9, "{}", r.p_value);
    }
}
