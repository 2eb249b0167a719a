use std::collections::BTreeMap;

use super::ContentId;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    /// Smoothed rate over closed windows (requests/hr).
    estimate: f64,
    window: u64,
    count: u64,
}

/// Per-content popularity forecast: an exponentially weighted moving average
/// of the request rate observed in consecutive fixed windows. Windows with no
/// requests fold in a zero, so the forecast of content that stops being
/// requested decays geometrically.
#[derive(Debug, Clone, PartialEq)]
pub struct PopularityPredictor {
    smoothing: f64,
    window_s: f64,
    entries: BTreeMap<ContentId, Entry>,
}

impl PopularityPredictor {
    pub fn new(smoothing: f64, window_s: f64) -> Self {
        assert!(smoothing > 0.0 && smoothing <= 1.0, "smoothing must lie in (0, 1]");
        assert!(window_s > 0.0, "window_s must be > 0");
        PopularityPredictor { smoothing, window_s, entries: BTreeMap::new() }
    }

    fn window_of(&self, t: f64) -> u64 {
        (t / self.window_s).floor().max(0.0) as u64
    }

    /// `entry` advanced to window `w`, closing everything before it.
    fn rolled(&self, mut e: Entry, w: u64) -> Entry {
        if w > e.window {
            let a = self.smoothing;
            let observed = e.count as f64 * 3600.0 / self.window_s;
            e.estimate = a * observed + (1.0 - a) * e.estimate;
            let empty = (w - e.window - 1).min(i32::MAX as u64) as i32;
            e.estimate *= (1.0 - a).powi(empty);
            e.window = w;
            e.count = 0;
        }
        e
    }

    pub fn update(&mut self, id: ContentId, t: f64) {
        let w = self.window_of(t);
        let e = self.entries.get(&id).copied().unwrap_or(Entry { estimate: 0.0, window: w, count: 0 });
        let mut e = self.rolled(e, w);
        e.count += 1;
        self.entries.insert(id, e);
    }

    /// Predicted requests/hr at `t`. Only closed windows contribute.
    pub fn score(&self, id: ContentId, t: f64) -> f64 {
        match self.entries.get(&id) {
            None => 0.0,
            Some(&e) => self.rolled(e, self.window_of(t)).estimate.max(0.0),
        }
    }
}
