use alloc::vec::Vec;
use core::fmt;

use super::ScenarioParams;

/// Which atomic detuning a sweep drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Knob {
    /// Storage atom detuning `Delta_s`.
    DetuningS,
    /// Switch atom detuning `Delta_q`.
    DetuningQ,
}

impl Knob {
    /// Returns `(Delta_s, Delta_q)` with this knob replaced by `value`.
    pub fn apply(self, params: &ScenarioParams, value: f64) -> (f64, f64) {
        match self {
            Knob::DetuningS => (value, params.detuning_q),
            Knob::DetuningQ => (params.detuning_s, value),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Knob::DetuningS => "detuning_s",
            Knob::DetuningQ => "detuning_q",
        }
    }
}

/// Piecewise-linear detuning trajectory, clamped outside its span.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepProfile {
    knob: Knob,
    times: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepError {
    Empty,
    NonIncreasingTimes(usize),
    /// Segment `k` does not start where segment `k - 1` ended.
    Discontinuous(usize),
    NonFinite(usize),
}

impl fmt::Display for SweepError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Empty => f.write_str("sweep has no points"),
            Self::NonIncreasingTimes(k) => write!(f, "sweep times must increase (at point {k})"),
            Self::Discontinuous(k) => write!(f, "sweep segment {k} is not contiguous with its predecessor"),
            Self::NonFinite(k) => write!(f, "sweep point {k} is not finite"),
        }
    }
}

impl core::error::Error for SweepError {}

/// One linear piece `(t_start, t_end, value_start, value_end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub t_start: f64,
    pub t_end: f64,
    pub value_start: f64,
    pub value_end: f64,
}

impl SweepProfile {
    pub fn constant(knob: Knob, value: f64) -> Self {
        Self {
            knob,
            times: alloc::vec![0.0],
            values: alloc::vec![value],
        }
    }

    /// Ramp from `from` at `t = 0` to `to` at `t = duration`, then hold.
    pub fn linear(knob: Knob, duration: f64, from: f64, to: f64) -> Self {
        if duration <= 0.0 {
            return Self::constant(knob, to);
        }
        Self {
            knob,
            times: alloc::vec![0.0, duration],
            values: alloc::vec![from, to],
        }
    }

    /// Tabulated `(t, value)` points with linear interpolation.
    pub fn from_table(knob: Knob, points: &[(f64, f64)]) -> Result<Self, SweepError> {
        if points.is_empty() {
            return Err(SweepError::Empty);
        }
        for (k, &(t, v)) in points.iter().enumerate() {
            if !t.is_finite() || !v.is_finite() {
                return Err(SweepError::NonFinite(k));
            }
            if k > 0 && t <= points[k - 1].0 {
                return Err(SweepError::NonIncreasingTimes(k));
            }
        }
        Ok(Self {
            knob,
            times: points.iter().map(|p| p.0).collect(),
            values: points.iter().map(|p| p.1).collect(),
        })
    }

    /// Contiguous linear segments.
    pub fn from_segments(knob: Knob, segments: &[Segment]) -> Result<Self, SweepError> {
        let first = segments.first().ok_or(SweepError::Empty)?;
        let mut points = alloc::vec![(first.t_start, first.value_start)];
        for (k, s) in segments.iter().enumerate() {
            if k > 0 {
                let prev = segments[k - 1];
                if s.t_start != prev.t_end || s.value_start != prev.value_end {
                    return Err(SweepError::Discontinuous(k));
                }
            }
            if s.t_end <= s.t_start {
                return Err(SweepError::NonIncreasingTimes(k));
            }
            points.push((s.t_end, s.value_end));
        }
        Self::from_table(knob, &points)
    }

    pub fn knob(&self) -> Knob {
        self.knob
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }

    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    /// Time of the last knot; the value is constant afterwards.
    pub fn end_time(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn initial_value(&self) -> f64 {
        self.values[0]
    }

    pub fn final_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn is_static(&self) -> bool {
        self.values.iter().all(|&v| v == self.values[0])
    }

    pub fn value(&self, t: f64) -> f64 {
        crate::math::interp(&self.times, &self.values, t)
    }

    /// Slope at `t` (right-sided at knots, zero outside the span).
    pub fn rate(&self, t: f64) -> f64 {
        let n = self.times.len();
        if n < 2 || t < self.times[0] || t >= self.times[n - 1] {
            return 0.0;
        }
        let k = self.times.partition_point(|&v| v <= t);
        (self.values[k] - self.values[k - 1]) / (self.times[k] - self.times[k - 1])
    }

    /// The same knob values played backwards: `value'(t) = value(t_end - t)`.
    pub fn time_reversed(&self, t_end: f64) -> Self {
        let mut points: Vec<(f64, f64)> = self
            .points()
            .filter(|&(t, _)| t < t_end)
            .map(|(t, v)| (t_end - t, v))
            .collect();
        points.push((0.0, self.value(t_end)));
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        points.dedup_by(|a, b| a.0 == b.0);
        Self::from_table(self.knob, &points).expect("mirrored knots stay ordered")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_sweep_clamps() {
        let s = SweepProfile::linear(Knob::DetuningQ, 10.0, -5.0, 15.0);
        assert_eq!(s.value(-1.0), -5.0);
        assert_eq!(s.value(5.0), 5.0);
        assert_eq!(s.value(20.0), 15.0);
        assert_eq!(s.rate(3.0), 2.0);
        assert_eq!(s.rate(11.0), 0.0);
    }

    #[test]
    fn segments_must_be_contiguous() {
        let a = Segment { t_start: 0.0, t_end: 1.0, value_start: 0.0, value_end: 1.0 };
        let b = Segment { t_start: 1.0, t_end: 2.0, value_start: 1.0, value_end: 3.0 };
        let gap = Segment { t_start: 1.5, t_end: 2.0, value_start: 1.0, value_end: 3.0 };
        let s = SweepProfile::from_segments(Knob::DetuningS, &[a, b]).unwrap();
        assert_eq!(s.value(1.5), 2.0);
        assert_eq!(
            SweepProfile::from_segments(Knob::DetuningS, &[a, gap]),
            Err(SweepError::Discontinuous(1))
        );
    }

    #[test]
    fn table_times_must_increase() {
        let r = SweepProfile::from_table(Knob::DetuningQ, &[(0.0, 1.0), (0.0, 2.0)]);
        assert_eq!(r, Err(SweepError::NonIncreasingTimes(1)));
        assert_eq!(SweepProfile::from_table(Knob::DetuningQ, &[]), Err(SweepError::Empty));
    }

    #[test]
    fn time_reversal_mirrors_values() {
        let s = SweepProfile::linear(Knob::DetuningQ, 10.0, 0.0, 10.0);
        let r = s.time_reversed(30.0);
        for t in [0.0, 5.0, 19.0, 20.0, 25.0, 30.0] {
            assert!((r.value(t) - s.value(30.0 - t)).abs() < 1e-12, "t = {t}");
        }
    }
}
