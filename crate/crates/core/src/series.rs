//! Time-indexed series: single trajectories, windows and prognosis ensembles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inclusive range of integer sample indices `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub start: usize,
    pub end: usize,
}

impl Window {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if end < start {
            return Err(Error::invalid_arg(format!(
                "window end {end} precedes start {start}"
            )));
        }
        Ok(Self { start, end })
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, t: usize) -> bool {
        (self.start..=self.end).contains(&t)
    }

    pub fn contains_window(&self, other: &Window) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<usize> {
        self.start..=self.end
    }
}

impl std::fmt::Display for Window {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.start, self.end)
    }
}

/// A health-index series starting at sample index `start`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub start: usize,
    pub values: Vec<f64>,
}

impl Trajectory {
    pub fn new(start: usize, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid_arg("trajectory is empty"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid_arg(format!(
                "non-finite value {} at sample {}",
                values[i],
                start + i
            )));
        }
        Ok(Self { start, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn end(&self) -> usize {
        self.start + self.values.len() - 1
    }

    pub fn window(&self) -> Window {
        Window {
            start: self.start,
            end: self.end(),
        }
    }

    pub fn value_at(&self, t: usize) -> Option<f64> {
        t.checked_sub(self.start)
            .and_then(|i| self.values.get(i).copied())
    }

    /// Sub-series restricted to `window`, which must lie inside this series.
    pub fn slice(&self, window: Window) -> Result<Trajectory> {
        if !self.window().contains_window(&window) {
            return Err(Error::invalid_arg(format!(
                "window {window} not inside series {}",
                self.window()
            )));
        }
        let lo = window.start - self.start;
        Ok(Trajectory {
            start: window.start,
            values: self.values[lo..lo + window.len()].to_vec(),
        })
    }
}

/// `n` prognosed trajectories over a common prediction window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrognosisEnsemble {
    window: Window,
    trajectories: Vec<Vec<f64>>,
}

impl PrognosisEnsemble {
    pub fn new(window: Window, trajectories: Vec<Vec<f64>>) -> Result<Self> {
        if trajectories.len() < 2 {
            return Err(Error::invalid_arg(format!(
                "ensemble needs at least 2 trajectories, got {}",
                trajectories.len()
            )));
        }
        for (i, traj) in trajectories.iter().enumerate() {
            if traj.len() != window.len() {
                return Err(Error::invalid_arg(format!(
                    "trajectory {} has length {}, window {} needs {}",
                    i + 1,
                    traj.len(),
                    window,
                    window.len()
                )));
            }
            if traj.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid_arg(format!(
                    "trajectory {} contains non-finite values",
                    i + 1
                )));
            }
        }
        Ok(Self {
            window,
            trajectories,
        })
    }

    pub fn window(&self) -> Window {
        self.window
    }

    /// Number of trajectories.
    pub fn n(&self) -> usize {
        self.trajectories.len()
    }

    /// Number of time points per trajectory.
    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn trajectories(&self) -> &[Vec<f64>] {
        &self.trajectories
    }

    pub fn trajectory(&self, i: usize) -> Trajectory {
        Trajectory {
            start: self.window.start,
            values: self.trajectories[i].clone(),
        }
    }

    /// Cross-section of all trajectories at offset `j` into the window.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.trajectories.iter().map(|t| t[j]).collect()
    }

    /// Applies `f` to every value, keeping the window.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let trajectories = self
            .trajectories
            .iter()
            .map(|t| t.iter().map(|&v| f(v)).collect())
            .collect();
        Self::new(self.window, trajectories)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_length_is_inclusive() {
        let w = Window::new(8401, 9000).unwrap();
        assert_eq!(w.len(), 600);
        assert!(w.contains(8401) && w.contains(9000) && !w.contains(9001));
        assert!(Window::new(5, 4).is_err());
    }

    #[test]
    fn trajectory_rejects_nan() {
        assert!(Trajectory::new(1, vec![1.0, f64::NAN]).is_err());
        assert!(Trajectory::new(1, vec![]).is_err());
    }

    #[test]
    fn slice_maps_absolute_indices() {
        let t = Trajectory::new(10, vec![0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        let s = t.slice(Window::new(12, 13).unwrap()).unwrap();
        assert_eq!(s.start, 12);
        assert_eq!(s.values, vec![2.0, 3.0]);
        assert!(t.slice(Window::new(9, 11).unwrap()).is_err());
        assert_eq!(t.value_at(14), Some(4.0));
        assert_eq!(t.value_at(9), None);
    }

    #[test]
    fn ensemble_validates_shape() {
        let w = Window::new(1, 2).unwrap();
        assert!(PrognosisEnsemble::new(w, vec![vec![1.0, 2.0]]).is_err());
        assert!(PrognosisEnsemble::new(w, vec![vec![1.0, 2.0], vec![1.0]]).is_err());
        let e = PrognosisEnsemble::new(w, vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(e.column(1), vec![2.0, 4.0]);
        assert_eq!(e.n(), 2);
    }
}
