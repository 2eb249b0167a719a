use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution as _, LogNormal};

use crate::energy::DecodeModel;
use crate::scenario::{ContentSpaceConfig, Distribution, PopularityShape};

/// Catalog index of a content. Displayed zero-padded so that lexicographic
/// and numeric order agree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ContentId(pub u32);

impl fmt::Display for ContentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{:08}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopularityProfile {
    pub shape: PopularityShape,
    /// Normalised Zipf weight of the content's rank.
    pub base_weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Content {
    pub id: ContentId,
    /// 1-based popularity rank.
    pub rank: u32,
    pub size_bits: u64,
    pub bitrate_bps: f64,
    pub publish_s: f64,
    pub lifetime_s: f64,
    pub popularity: PopularityProfile,
    pub decode: DecodeModel,
}

impl Content {
    pub fn expiry_s(&self) -> f64 {
        self.publish_s + self.lifetime_s
    }

    pub fn is_alive(&self, t: f64) -> bool {
        t >= self.publish_s && t <= self.expiry_s()
    }
}

/// Zipf weights `k^-s` for ranks `1..=n`, normalised to sum to one.
pub fn zipf_weights(n: usize, s: f64) -> Vec<f64> {
    let raw: Vec<f64> = (1..=n).map(|k| (k as f64).powf(-s)).collect();
    let norm: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / norm).collect()
}

fn sample(d: &Distribution, rng: &mut impl Rng) -> f64 {
    match *d {
        Distribution::Constant { value } => value,
        Distribution::Uniform { lo, hi } if hi > lo => rng.random_range(lo..=hi),
        Distribution::Uniform { lo, .. } => lo,
        Distribution::Lognormal { mu, sigma } => {
            LogNormal::new(mu, sigma).expect("validated lognormal parameters").sample(rng)
        }
    }
}

/// Generates `catalog_size` contents. Rank `k` content gets id `k - 1`.
///
/// A cohort of `initial_cohort_fraction` of the catalog (chosen at random) is
/// published at t = 0; the rest is published uniformly over the first
/// `publish_window_fraction` of the horizon. Sizes come from `sizes`,
/// publish times and lifetimes from `lifecycle`.
pub fn build_catalog(
    config: &ContentSpaceConfig,
    horizon_s: f64,
    sizes: &mut impl Rng,
    lifecycle: &mut impl Rng,
) -> Vec<Content> {
    let n = config.catalog_size;
    let weights = zipf_weights(n, config.zipf_exponent);

    let cohort = ((config.initial_cohort_fraction * n as f64).ceil() as usize).min(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(lifecycle);
    let mut publish = vec![0.0; n];
    let window = config.publish_window_fraction * horizon_s;
    for &i in &order[cohort..] {
        publish[i] = lifecycle.random::<f64>() * window;
    }

    (0..n)
        .map(|i| {
            let size_bits = sample(&config.size_bits, sizes).max(0.0).round() as u64;
            let lifetime_s = sample(&config.lifetime_s, lifecycle);
            Content {
                id: ContentId(i as u32),
                rank: i as u32 + 1,
                size_bits,
                bitrate_bps: config.bitrate_bps,
                publish_s: publish[i],
                lifetime_s,
                popularity: PopularityProfile { shape: config.popularity_shape, base_weight: weights[i] },
                decode: config.decode,
            }
        })
        .collect()
}

/// Popularity weight of `content` at time `t`; zero outside its lifetime.
pub fn popularity_at(content: &Content, t: f64) -> f64 {
    if !content.is_alive(t) {
        return 0.0;
    }
    let base = content.popularity.base_weight;
    let elapsed = t - content.publish_s;
    match content.popularity.shape {
        PopularityShape::Constant => base,
        PopularityShape::LinearDecay => base * (1.0 - elapsed / content.lifetime_s).max(0.0),
        PopularityShape::ExponentialDecay { half_life_s } => base * (-elapsed / half_life_s).exp2(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::{stream_rng, Stream};

    fn config(n: usize, s: f64) -> ContentSpaceConfig {
        ContentSpaceConfig {
            catalog_size: n,
            zipf_exponent: s,
            size_bits: Distribution::Uniform { lo: 1e6, hi: 2e6 },
            bitrate_bps: 1e6,
            lifetime_s: Distribution::Lognormal { mu: 8.0, sigma: 0.5 },
            popularity_shape: PopularityShape::Constant,
            replication_count: 1,
            decode: DecodeModel::default(),
            initial_cohort_fraction: 0.5,
            publish_window_fraction: 0.1,
        }
    }

    fn content(shape: PopularityShape) -> Content {
        Content {
            id: ContentId(0),
            rank: 1,
            size_bits: 1,
            bitrate_bps: 1.0,
            publish_s: 100.0,
            lifetime_s: 1000.0,
            popularity: PopularityProfile { shape, base_weight: 0.25 },
            decode: DecodeModel::default(),
        }
    }

    #[test]
    fn single_content_has_unit_weight() {
        assert_eq!(zipf_weights(1, 1.3), vec![1.0]);
    }

    #[test]
    fn three_contents_harmonic_weights() {
        let w = zipf_weights(3, 1.0);
        let expected = [6.0 / 11.0, 3.0 / 11.0, 2.0 / 11.0];
        for (a, b) in w.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn weights_sorted_and_normalised() {
        for s in [0.5, 0.8, 1.0, 1.2, 2.0] {
            let w = zipf_weights(500, s);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(w.windows(2).all(|p| p[0] > p[1]));
        }
    }

    #[test]
    fn catalog_cohort_and_window() {
        let cfg = config(100, 1.0);
        let cat =
            build_catalog(&cfg, 10_000.0, &mut stream_rng(3, Stream::Catalog), &mut stream_rng(3, Stream::Lifecycle));
        assert_eq!(cat.len(), 100);
        let at_zero = cat.iter().filter(|c| c.publish_s == 0.0).count();
        assert!(at_zero >= 50);
        assert!(cat.iter().all(|c| c.publish_s <= 1000.0));
        assert!(cat.iter().all(|c| (1_000_000..=2_000_000).contains(&c.size_bits)));
        assert!(cat.iter().all(|c| c.lifetime_s > 0.0));
        assert!(cat.iter().enumerate().all(|(i, c)| c.rank as usize == i + 1));
    }

    #[test]
    fn catalog_is_deterministic() {
        let cfg = config(50, 0.8);
        let a = build_catalog(&cfg, 1e4, &mut stream_rng(9, Stream::Catalog), &mut stream_rng(9, Stream::Lifecycle));
        let b = build_catalog(&cfg, 1e4, &mut stream_rng(9, Stream::Catalog), &mut stream_rng(9, Stream::Lifecycle));
        assert_eq!(a, b);
    }

    #[test]
    fn zero_outside_lifetime() {
        let c = content(PopularityShape::Constant);
        assert_eq!(popularity_at(&c, 99.0), 0.0);
        assert_eq!(popularity_at(&c, 1100.5), 0.0);
        assert_eq!(popularity_at(&c, 100.0), 0.25);
        assert_eq!(popularity_at(&c, 1100.0), 0.25);
    }

    #[test]
    fn exponential_half_life() {
        let c = content(PopularityShape::ExponentialDecay { half_life_s: 300.0 });
        assert_eq!(popularity_at(&c, 400.0), 0.125);
    }

    #[test]
    fn linear_reaches_zero_at_end() {
        let c = content(PopularityShape::LinearDecay);
        assert_eq!(popularity_at(&c, 1100.0), 0.0);
        assert_eq!(popularity_at(&c, 600.0), 0.125);
    }

    #[test]
    fn decay_shapes_are_continuous_inside_lifetime() {
        for shape in [PopularityShape::LinearDecay, PopularityShape::ExponentialDecay { half_life_s: 50.0 }] {
            let c = content(shape);
            let mut t = 100.5;
            while t < 1099.5 {
                let d = (popularity_at(&c, t + 1e-6) - popularity_at(&c, t)).abs();
                assert!(d < 1e-8, "{shape:?} jumps at {t}");
                t += 7.3;
            }
        }
    }
}
