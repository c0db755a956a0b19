//! Pearson chi-square tests used by the experiments.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
    /// Upper-tail probability of `statistic`.
    pub p_value: f64,
}

fn upper_tail(statistic: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    ChiSquared::new(df as f64)
        .expect("positive degrees of freedom")
        .sf(statistic)
}

/// Goodness of fit of `counts` to the uniform distribution on its cells.
pub fn chi_square_uniform(counts: &[u64]) -> ChiSquare {
    let cells = counts.len();
    let expected = vec![1.0 / cells as f64; cells];
    chi_square_fit(counts, &expected)
}

/// Goodness of fit of `counts` to the cell probabilities `probs`.
pub fn chi_square_fit(counts: &[u64], probs: &[f64]) -> ChiSquare {
    assert_eq!(counts.len(), probs.len());
    let n: u64 = counts.iter().sum();
    let statistic = counts
        .iter()
        .zip(probs)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&c, &p)| {
            let e = p * n as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    let df = probs.iter().filter(|&&p| p > 0.0).count().saturating_sub(1);
    ChiSquare {
        statistic,
        df,
        p_value: upper_tail(statistic, df),
    }
}

/// Independence of rows and columns of a contingency table. Empty rows and
/// columns are dropped.
pub fn chi_square_independence(table: &[Vec<u64>]) -> ChiSquare {
    let cols = table.first().map_or(0, Vec::len);
    let row_sums: Vec<u64> = table.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<u64> = (0..cols).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let n: u64 = row_sums.iter().sum();
    let mut statistic = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if row_sums[i] == 0 || col_sums[j] == 0 {
                continue;
            }
            let e = row_sums[i] as f64 * col_sums[j] as f64 / n as f64;
            statistic += (c as f64 - e).powi(2) / e;
        }
    }
    let r = row_sums.iter().filter(|&&s| s > 0).count();
    let c = col_sums.iter().filter(|&&s| s > 0).count();
    let df = r.saturating_sub(1) * c.saturating_sub(1);
    ChiSquare {
        statistic,
        df,
        p_value: upper_tail(statistic, df),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_counts() {
        let t = chi_square_uniform(&[25, 25, 25, 25]);
        assert_eq!(t.statistic, 0.0);
        assert_eq!(t.df, 3);
        assert!((t.p_value - 1.0).abs() < 1e-12);
        let t = chi_square_uniform(&[40, 30, 20]);
        assert!((t.statistic - 20.0 / 3.0).abs() < 1e-12);
        let t = chi_square_fit(&[12, 8], &[0.5, 0.5]);
        assert!((t.statistic - 0.8).abs() < 1e-12);
        let t = chi_square_uniform(&[11, 9, 10]);
        assert!((t.statistic - 0.2).abs() < 1e-12);
        assert!((t.p_value - (-0.1f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn independence() {
        let t = chi_square_independence(&[vec![10, 10], vec![10, 10]]);
        assert_eq!(t.statistic, 0.0);
        assert_eq!(t.df, 1);
        let t = chi_square_independence(&[vec![20, 0], vec![0, 20]]);
        assert!((t.statistic - 40.0).abs() < 1e-12);
        assert!(t.p_value < 1e-8);
        let t = chi_square_independence(&[vec![5, 5, 0], vec![5, 5, 0]]);
        assert_eq!(t.df, 1);
    }
}
