use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::lerp;

/// Integration mode attached to every sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    FlightPlus,
    FlightMinus,
    Sliding,
}

impl Mode {
    /// Short tag used in CSV output.
    pub fn tag(self) -> &'static str {
        match self {
            Mode::FlightPlus => "FP",
            Mode::FlightMinus => "FM",
            Mode::Sliding => "SL",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "FP" => Some(Mode::FlightPlus),
            "FM" => Some(Mode::FlightMinus),
            "SL" => Some(Mode::Sliding),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Crossing,
    SlidingEntry,
    SlidingExit,
    /// The trajectory touched the surface and continued on the same side.
    Grazing,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::Crossing => "CROSSING",
            EventKind::SlidingEntry => "SLIDING_ENTRY",
            EventKind::SlidingExit => "SLIDING_EXIT",
            EventKind::Grazing => "GRAZING",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "CROSSING" => Some(EventKind::Crossing),
            "SLIDING_ENTRY" => Some(EventKind::SlidingEntry),
            "SLIDING_EXIT" => Some(EventKind::SlidingExit),
            "GRAZING" => Some(EventKind::Grazing),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: Vec<f64>,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    pub x: Vec<f64>,
}

/// Time-ordered samples with mode tags plus the event log.
///
/// Sample times are strictly increasing; a sample taken at an event carries
/// the mode that holds after the event.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub dim: usize,
    pub samples: Vec<Sample>,
    pub events: Vec<Event>,
}

impl Trajectory {
    pub fn new(dim: usize) -> Self {
        Trajectory {
            dim,
            samples: Vec::new(),
            events: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, t: f64, x: &[f64], mode: Mode) {
        if let Some(last) = self.samples.last_mut() {
            if t <= last.t {
                debug_assert!(t == last.t, "sample times must increase");
                last.x.clear();
                last.x.extend_from_slice(x);
                last.mode = mode;
                return;
            }
        }
        self.samples.push(Sample {
            t,
            x: x.to_vec(),
            mode,
        });
    }

    pub(crate) fn push_event(&mut self, t: f64, kind: EventKind, x: &[f64]) {
        self.events.push(Event {
            t,
            kind,
            x: x.to_vec(),
        });
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn t_start(&self) -> f64 {
        self.samples.first().map_or(f64::NAN, |s| s.t)
    }

    pub fn t_end(&self) -> f64 {
        self.samples.last().map_or(f64::NAN, |s| s.t)
    }

    pub fn final_state(&self) -> &[f64] {
        self.samples.last().map_or(&[], |s| &s.x)
    }

    pub fn count_events(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    /// State at `t` by linear interpolation between samples.
    pub fn state_at(&self, t: f64, out: &mut [f64]) -> Result<()> {
        if self.samples.is_empty() || t < self.t_start() || t > self.t_end() {
            return Err(Error::Domain("time outside trajectory range"));
        }
        let i = self.samples.partition_point(|s| s.t <= t);
        if i == 0 {
            out.copy_from_slice(&self.samples[0].x);
        } else if i == self.samples.len() {
            out.copy_from_slice(&self.samples[i - 1].x);
        } else {
            let (a, b) = (&self.samples[i - 1], &self.samples[i]);
            lerp(out, &a.x, &b.x, (t - a.t) / (b.t - a.t));
        }
        Ok(())
    }

    /// Samples in the final `fraction` of the time span.
    pub fn tail(&self, fraction: f64) -> &[Sample] {
        if self.samples.is_empty() {
            return &[];
        }
        let cut = self.t_end() - fraction * (self.t_end() - self.t_start());
        let i = self.samples.partition_point(|s| s.t < cut);
        &self.samples[i..]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn line() -> Trajectory {
        let mut tr = Trajectory::new(1);
        tr.push(0.0, &[0.0], Mode::FlightPlus);
        tr.push(1.0, &[2.0], Mode::FlightPlus);
        tr.push(3.0, &[2.0], Mode::Sliding);
        tr
    }

    #[test]
    fn interpolates_linearly() {
        let tr = line();
        let mut x = [0.0];
        tr.state_at(0.25, &mut x).unwrap();
        assert_eq!(x, [0.5]);
        tr.state_at(3.0, &mut x).unwrap();
        assert_eq!(x, [2.0]);
        assert!(tr.state_at(3.5, &mut x).is_err());
    }

    #[test]
    fn same_time_sample_replaces_previous() {
        let mut tr = line();
        tr.push(3.0, &[5.0], Mode::FlightMinus);
        assert_eq!(tr.len(), 3);
        assert_eq!(tr.samples[2].x, vec![5.0]);
        assert_eq!(tr.samples[2].mode, Mode::FlightMinus);
    }

    #[test]
    fn tail_selects_final_fraction() {
        let tr = line();
        assert_eq!(tr.tail(0.5).len(), 1);
        assert_eq!(tr.tail(1.0).len(), 3);
    }

    #[test]
    fn tags_round_trip() {
        for m in [Mode::FlightPlus, Mode::FlightMinus, Mode::Sliding] {
            assert_eq!(Mode::from_tag(m.tag()), Some(m));
        }
        for k in [
            EventKind::Crossing,
            EventKind::SlidingEntry,
            EventKind::SlidingExit,
            EventKind::Grazing,
        ] {
            assert_eq!(EventKind::from_name(k.name()), Some(k));
        }
    }
}
