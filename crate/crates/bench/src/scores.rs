//! Min-max score normalisation and summary statistics.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (`N − 1`); 0 for a single value.
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

pub fn summarize(values: &[f64]) -> Summary {
    let count = values.len();
    if count == 0 {
        return Summary {
            count,
            mean: f64::NAN,
            std: f64::NAN,
            min: f64::NAN,
            max: f64::NAN,
        };
    }
    let mean = values.iter().sum::<f64>() / count as f64;
    let std = if count > 1 {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count - 1) as f64).sqrt()
    } else {
        0.0
    };
    Summary {
        count,
        mean,
        std,
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

/// `√((s₁² + s₂²)/2)`.
pub fn pooled_std(a: &Summary, b: &Summary) -> f64 {
    ((a.std * a.std + b.std * b.std) / 2.0).sqrt()
}

/// Linear-interpolated quantile of sorted values, `q ∈ [0, 1]`.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Five-number summary `[min, q1, median, q3, max]`.
pub fn five_numbers(values: &[f64]) -> [f64; 5] {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    [0.0, 0.25, 0.5, 0.75, 1.0].map(|q| quantile(&v, q))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedScores {
    /// Same grouping as the input.
    pub groups: Vec<(String, Vec<f64>)>,
    /// All totals were equal; every score is 0.5.
    pub degenerate: bool,
}

impl NormalizedScores {
    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.groups.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }
}

/// `(total − min)/(max − min)` with min and max over every run of every
/// method on the task.
pub fn normalize_scores(totals: &[(String, Vec<f64>)]) -> NormalizedScores {
    let all = || totals.iter().flat_map(|(_, v)| v.iter().copied());
    let lo = all().fold(f64::INFINITY, f64::min);
    let hi = all().fold(f64::NEG_INFINITY, f64::max);
    let degenerate = !(hi > lo);
    let groups = totals
        .iter()
        .map(|(name, v)| {
            let scores = v
                .iter()
                .map(|t| if degenerate { 0.5 } else { (t - lo) / (hi - lo) })
                .collect();
            (name.clone(), scores)
        })
        .collect();
    NormalizedScores { groups, degenerate }
}
