use serde::{Deserialize, Serialize};

/// Displacement, velocity and acceleration modes at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
}

impl Snapshot {
    pub fn zeros(modes: usize) -> Self {
        Self { x: vec![0.0; modes], v: vec![0.0; modes], w: vec![0.0; modes] }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub config_hash: Option<String>,
    pub seed: Option<u64>,
    /// Picard iterations; 0 for linear runs.
    pub iterations: usize,
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub meta: RunMeta,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, snapshots: Vec<Snapshot>) -> Self {
        debug_assert_eq!(times.len(), snapshots.len());
        Self { times, snapshots, meta: RunMeta::default() }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn modes(&self) -> usize {
        self.snapshots.first().map_or(0, |s| s.x.len())
    }

    /// Every `stride`-th sample plus the final one.
    pub fn strided(&self, stride: usize) -> Self {
        let stride = stride.max(1);
        let last = self.len().saturating_sub(1);
        let keep: Vec<usize> = (0..self.len()).filter(|&i| i % stride == 0 || i == last).collect();
        Self {
            times: keep.iter().map(|&i| self.times[i]).collect(),
            snapshots: keep.iter().map(|&i| self.snapshots[i].clone()).collect(),
            meta: self.meta.clone(),
        }
    }

    /// `max_n ||x_n||` over the stored samples.
    pub fn peak_displacement(&self) -> f64 {
        self.snapshots
            .iter()
            .map(|s| s.x.iter().map(|c| c * c).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}
