use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::types::{Mode, PerMode};

pub const DEFAULT_HISTORY_CAPACITY: usize = 20;

/// Bounded record of the modes used for the most recent trips, oldest first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripHistory {
    capacity: usize,
    trips: VecDeque<Mode>,
}

impl Default for TripHistory {
    fn default() -> Self {
        Self::new(DEFAULT_HISTORY_CAPACITY)
    }
}

impl TripHistory {
    /// # Panics
    /// If `capacity` is zero.
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "trip history capacity must be positive");
        TripHistory {
            capacity,
            trips: VecDeque::with_capacity(capacity),
        }
    }

    /// A history holding `capacity` copies of `mode`.
    pub fn filled(capacity: usize, mode: Mode) -> Self {
        let mut h = Self::new(capacity);
        h.trips.extend(std::iter::repeat_n(mode, capacity));
        h
    }

    /// Builds a history from trips listed oldest first, keeping only the
    /// last `capacity` of them.
    pub fn from_trips(capacity: usize, trips: impl IntoIterator<Item = Mode>) -> Self {
        let mut h = Self::new(capacity);
        for m in trips {
            h.push(m);
        }
        h
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.trips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trips.is_empty()
    }

    /// Records a trip, evicting the oldest one when full.
    pub fn push(&mut self, mode: Mode) {
        if self.trips.len() == self.capacity {
            self.trips.pop_front();
        }
        self.trips.push_back(mode);
    }

    pub fn clear(&mut self) {
        self.trips.clear();
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = Mode> + '_ {
        self.trips.iter().copied()
    }

    pub fn counts(&self) -> PerMode<usize> {
        let mut counts = PerMode::<usize>::default();
        for m in self.iter() {
            counts[m] += 1;
        }
        counts
    }

    /// Relative frequency of each mode; all zero for an empty history.
    pub fn frequencies(&self) -> PerMode<f64> {
        let counts = self.counts();
        let n = self.len();
        counts.map(|_, &k| if n == 0 { 0.0 } else { k as f64 / n as f64 })
    }
}

/// Habit strength of `mode`: its frequency in the history, 0 when empty.
pub fn habit_strength(history: &TripHistory, mode: Mode) -> f64 {
    if history.is_empty() {
        return 0.0;
    }
    let k = history.iter().filter(|&m| m == mode).count();
    k as f64 / history.len() as f64
}

/// Most frequent mode in the history. Ties go to whichever tied mode was used
/// most recently; an empty history yields `fallback`.
pub fn usual_mode(history: &TripHistory, fallback: Mode) -> Mode {
    let counts = history.counts();
    let Some(max) = Mode::ALL.iter().map(|&m| counts[m]).max().filter(|&k| k > 0) else {
        return fallback;
    };
    history
        .iter()
        .rev()
        .find(|&m| counts[m] == max)
        .unwrap_or(fallback)
}
