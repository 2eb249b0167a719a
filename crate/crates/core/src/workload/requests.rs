use rand::Rng;
use rand_distr::{Distribution as _, Exp};

use super::catalog::{popularity_at, Content, ContentId};
use crate::scenario::ClientCluster;

/// Non-homogeneous Poisson arrivals of one cluster with an hourly
/// piecewise-constant rate, sampled by thinning.
#[derive(Debug, Clone, PartialEq)]
pub struct RequestProcess {
    base_rate_per_s: f64,
    diurnal: [f64; 24],
    max_multiplier: f64,
    user_count: u32,
}

impl RequestProcess {
    pub fn new(user_count: u32, rate_per_user_per_hr: f64, diurnal: [f64; 24]) -> Self {
        let max_multiplier = diurnal.iter().copied().fold(0.0, f64::max);
        RequestProcess {
            base_rate_per_s: f64::from(user_count) * rate_per_user_per_hr / 3600.0,
            diurnal,
            max_multiplier,
            user_count,
        }
    }

    pub fn for_cluster(c: &ClientCluster) -> Self {
        Self::new(c.user_count, c.request_rate_per_user_per_hr, c.diurnal_profile)
    }

    /// Arrival rate (1/s) at time `t`.
    pub fn rate_at(&self, t: f64) -> f64 {
        let hour = (t / 3600.0).floor() as u64 % 24;
        self.base_rate_per_s * self.diurnal[hour as usize]
    }

    pub fn max_rate(&self) -> f64 {
        self.base_rate_per_s * self.max_multiplier
    }

    /// First arrival strictly after `t`, or `None` if it would fall beyond
    /// `horizon_s` (or the rate is identically zero).
    pub fn next_arrival(&self, t: f64, horizon_s: f64, rng: &mut impl Rng) -> Option<f64> {
        let lambda_max = self.max_rate();
        if !(lambda_max > 0.0 && lambda_max.is_finite()) {
            return None;
        }
        let gap = Exp::new(lambda_max).expect("positive rate");
        let mut cur = t;
        loop {
            cur += gap.sample(rng);
            if cur > horizon_s {
                return None;
            }
            if rng.random::<f64>() * lambda_max < self.rate_at(cur) {
                return Some(cur);
            }
        }
    }

    pub fn pick_user(&self, rng: &mut impl Rng) -> u32 {
        rng.random_range(0..self.user_count)
    }
}

/// Index drawn with probability proportional to `weights`; `None` when no
/// weight is positive.
pub fn pick_weighted(weights: &[f64], rng: &mut impl Rng) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return None;
    }
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = None;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = Some(i);
            if target < acc {
                return Some(i);
            }
        }
    }
    last_positive
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RequestDraw {
    pub time_s: f64,
    pub content: ContentId,
    pub user: u32,
}

/// Next request of a cluster after `t`: arrival time by thinning, then the
/// target content proportional to its popularity at that time and a
/// uniformly chosen user. Returns `None` past the horizon; an arrival with
/// nothing alive to request is skipped.
pub fn next_request(
    process: &RequestProcess,
    catalog: &[Content],
    t: f64,
    horizon_s: f64,
    rng: &mut impl Rng,
) -> Option<RequestDraw> {
    let mut cur = t;
    loop {
        cur = process.next_arrival(cur, horizon_s, rng)?;
        let weights: Vec<f64> = catalog.iter().map(|c| popularity_at(c, cur)).collect();
        if let Some(i) = pick_weighted(&weights, rng) {
            return Some(RequestDraw { time_s: cur, content: catalog[i].id, user: process.pick_user(rng) });
        }
    }
}
