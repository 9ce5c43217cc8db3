//! Relative coincidence-peak areas from photon path enumeration.
//!
//! Each emitted photon takes the short arm of the unbalanced interferometer
//! with probability `p` (the first splitter) or the long arm otherwise, and is
//! then routed by the final splitter. A short-arm photon reaches detector 1
//! with probability R and detector 2 with T; a long-arm photon enters the other
//! input port, so the roles swap. Coincidences are counted with the start on
//! detector 1 and the stop on detector 2. Two photons arriving at the same
//! time from different ports interfere and reach different detectors with
//! probability `R^2 + T^2 - 2 R T V`.
//!
//! Arrival times are kept as integer pairs `(cycles, steps)` meaning
//! `cycles * laser_period + steps * mz_delay`, so coincidence is exact.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{BeamSplitter, InterferometerMode};

/// Lag key: `(cycles, delay steps)`.
pub type LagKey = (i64, i64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumeratedAreas {
    pub mode: InterferometerMode,
    /// Interferometer delay in laser periods; 0 in cluster mode.
    pub delay_periods: u32,
    areas: BTreeMap<LagKey, f64>,
}

impl EnumeratedAreas {
    pub fn get(&self, key: LagKey) -> f64 {
        self.areas.get(&key).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (LagKey, f64)> + '_ {
        self.areas.iter().map(|(&k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.areas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.areas.is_empty()
    }

    /// Lag in ns for a key.
    pub fn lag_time(&self, key: LagKey, laser_period: f64, mz_delay: f64) -> f64 {
        key.0 as f64 * laser_period + key.1 as f64 * mz_delay
    }

    /// Zero-lag area.
    pub fn central(&self) -> f64 {
        self.get((0, 0))
    }

    /// Area of an uncorrelated peak far from zero lag.
    pub fn far(&self) -> f64 {
        let k = self.areas.keys().map(|k| k.0).max().unwrap_or(0);
        self.get((k, 0))
    }
}

#[derive(Clone, Copy)]
enum Arm {
    Short,
    Long,
}

/// Enumerates peak areas for partner photons up to `cycles` laser periods away.
///
/// Areas are probabilities per emitted photon of the reference cycle.
pub fn peak_areas_by_enumeration(
    visibility: f64,
    bs: BeamSplitter,
    first_split: f64,
    mode: InterferometerMode,
    delay_periods: u32,
    cycles: i64,
) -> EnumeratedAreas {
    let p = first_split;
    let (r, t) = (bs.r, bs.t);
    let (emissions, long): (&[LagKey], LagKey) = match mode {
        InterferometerMode::Cluster => (&[(0, 0), (0, 1)], (0, 1)),
        InterferometerMode::Period => (&[(0, 0)], (i64::from(delay_periods), 0)),
    };
    let arrive = |e: LagKey, arm: Arm| match arm {
        Arm::Short => e,
        Arm::Long => (e.0 + long.0, e.1 + long.1),
    };
    let prob = |arm: Arm| match arm {
        Arm::Short => p,
        Arm::Long => 1.0 - p,
    };
    // (P(detector 1), P(detector 2)) given the arm
    let route = |arm: Arm| match arm {
        Arm::Short => (r, t),
        Arm::Long => (t, r),
    };
    let coincident = r * r + t * t - 2.0 * r * t * visibility;

    // Partners beyond the kept range still land inside it through the long arm.
    let reach = cycles + 2 * (long.0 + 1);
    let mut areas = BTreeMap::new();
    for &er in emissions {
        for k in -reach..=reach {
            for &ep in emissions {
                if k == 0 && ep == er {
                    continue;
                }
                let ep = (ep.0 + k, ep.1);
                for ar in [Arm::Short, Arm::Long] {
                    for ap in [Arm::Short, Arm::Long] {
                        let (a1, a2) = (arrive(er, ar), arrive(ep, ap));
                        let lag = (a2.0 - a1.0, a2.1 - a1.1);
                        if lag.0.abs() > cycles {
                            continue;
                        }
                        let w = prob(ar) * prob(ap);
                        let c = if lag == (0, 0) {
                            // each ordering carries half of the pair's split probability
                            0.5 * coincident
                        } else {
                            route(ar).0 * route(ap).1
                        };
                        *areas.entry(lag).or_insert(0.0) += w * c;
                    }
                }
            }
        }
    }
    EnumeratedAreas {
        mode,
        delay_periods,
        areas,
    }
}

/// Visibility from cluster-mode areas (central and the two neighbours).
pub fn cluster_visibility_from_areas(areas: &EnumeratedAreas, bs: BeamSplitter) -> f64 {
    let (a0, ap, am) = (areas.central(), areas.get((0, 1)), areas.get((0, -1)));
    (bs.r * bs.r + bs.t * bs.t) / (2.0 * bs.r * bs.t) - 2.0 * a0 / (ap + am)
}

/// Visibility from period-mode areas (central and a far peak).
pub fn period_visibility_from_areas(areas: &EnumeratedAreas, bs: BeamSplitter) -> f64 {
    (bs.r * bs.r + bs.t * bs.t - areas.central() / areas.far()) / (2.0 * bs.r * bs.t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cluster(v: f64, bs: BeamSplitter) -> EnumeratedAreas {
        peak_areas_by_enumeration(v, bs, 0.5, InterferometerMode::Cluster, 0, 3)
    }

    #[test]
    fn balanced_cluster_is_one_two_two_two_one() {
        let a = cluster(0.0, BeamSplitter::balanced());
        let got: Vec<f64> = (-2..=2).map(|d| a.get((0, d)) / a.get((0, -2))).collect();
        assert_eq!(got, vec![1.0, 2.0, 2.0, 2.0, 1.0]);
    }

    #[test]
    fn perfect_interference_empties_center() {
        let a = cluster(1.0, BeamSplitter::balanced());
        assert_eq!(a.central(), 0.0);
        let a = peak_areas_by_enumeration(1.0, BeamSplitter::balanced(), 0.5, InterferometerMode::Period, 1, 4);
        assert_eq!(a.central(), 0.0);
    }

    #[test]
    fn neighbouring_cluster_pattern() {
        let a = cluster(0.3, BeamSplitter::balanced());
        let got: Vec<f64> = (-2..=2).map(|d| a.get((1, d)) / a.get((1, -2))).collect();
        assert_eq!(got, vec![1.0, 4.0, 6.0, 4.0, 1.0]);
    }

    #[test]
    fn round_trip_both_modes() {
        let bs = BeamSplitter::new(0.46, 0.54).unwrap();
        let a = cluster(0.62, bs);
        assert!((cluster_visibility_from_areas(&a, bs) - 0.62).abs() < 1e-14);
        for j in 1..=3 {
            let a = peak_areas_by_enumeration(0.62, bs, 0.5, InterferometerMode::Period, j, 6);
            assert!((period_visibility_from_areas(&a, bs) - 0.62).abs() < 1e-14);
        }
    }

    #[test]
    fn period_far_peaks_are_uniform() {
        let bs = BeamSplitter::new(0.4, 0.6).unwrap();
        let a = peak_areas_by_enumeration(0.5, bs, 0.5, InterferometerMode::Period, 1, 6);
        for k in 3..=6 {
            assert!((a.get((k, 0)) - 0.25).abs() < 1e-15);
            assert!((a.get((-k, 0)) - 0.25).abs() < 1e-15);
        }
        assert!((a.get((1, 0)) - 0.25 * (2.0 * 0.24 + 0.36)).abs() < 1e-15);
        assert!((a.get((-1, 0)) - 0.25 * (2.0 * 0.24 + 0.16)).abs() < 1e-15);
    }

    #[test]
    fn swapping_r_and_t_mirrors_lags() {
        let bs = BeamSplitter::new(0.35, 0.65).unwrap();
        let a = cluster(0.4, bs);
        let b = cluster(0.4, bs.swapped());
        for (k, v) in a.iter() {
            assert!((b.get((-k.0, -k.1)) - v).abs() < 1e-15, "{k:?}");
        }
    }
}
