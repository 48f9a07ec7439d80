#![allow(dead_code)]

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// p-value of the chi-square homogeneity test on a table of counts
/// (rows = samples, columns = categories). Empty columns are dropped.
pub fn homogeneity_p(table: &[Vec<u64>]) -> f64 {
    let cols = table[0].len();
    let col_tot: Vec<u64> = (0..cols)
        .map(|j| table.iter().map(|r| r[j]).sum())
        .collect();
    let live: Vec<usize> = (0..cols).filter(|&j| col_tot[j] > 0).collect();
    let rows: Vec<&Vec<u64>> = table.iter().filter(|r| r.iter().sum::<u64>() > 0).collect();
    if live.len() < 2 || rows.len() < 2 {
        return 1.0;
    }
    let total: u64 = live.iter().map(|&j| col_tot[j]).sum();
    let mut stat = 0.0;
    for r in &rows {
        let row_tot: u64 = live.iter().map(|&j| r[j]).sum();
        for &j in &live {
            let e = row_tot as f64 * col_tot[j] as f64 / total as f64;
            stat += (r[j] as f64 - e).powi(2) / e;
        }
    }
    let df = ((rows.len() - 1) * (live.len() - 1)) as f64;
    1.0 - ChiSquared::new(df).unwrap().cdf(stat)
}

/// p-value of the goodness-of-fit test of `counts` against equal expected
/// frequencies.
pub fn uniform_p(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let e = n as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    1.0 - ChiSquared::new((counts.len() - 1) as f64)
        .unwrap()
        .cdf(stat)
}

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}
