/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub statistic: &'static str,
    pub mean: f64,
    /// Sample standard deviation over `sqrt(replicates)`; zero for one replicate.
    pub std_error: f64,
    /// Unbiased sample variance of the per-replicate values.
    pub sample_variance: f64,
    pub replicates: u64,
    pub master_seed: u64,
}

impl McEstimate {
    /// Summarizes per-replicate values in the order given, so the result
    /// depends only on the values and never on how they were produced.
    pub fn from_values<I>(statistic: &'static str, master_seed: u64, values: I) -> Self
    where
        I: IntoIterator<Item = f64>,
        I::IntoIter: Clone,
    {
        let values = values.into_iter();
        let (count, sum) = values.clone().fold((0u64, 0.0), |(c, s), v| (c + 1, s + v));
        let mean = if count == 0 { f64::NAN } else { sum / count as f64 };
        let sample_variance = if count < 2 {
            0.0
        } else {
            values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count - 1) as f64
        };
        let std_error = if count == 0 {
            f64::NAN
        } else {
            libm::sqrt(sample_variance / count as f64)
        };
        McEstimate {
            statistic,
            mean,
            std_error,
            sample_variance,
            replicates: count,
            master_seed,
        }
    }
}
