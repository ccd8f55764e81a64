//! Deterministic per-site randomness and arrow assignment.
//!
//! Every site x carries two independent unit-interval variates (U, V)
//! computed by hashing (seed, x) with two published salts. A site joins
//! Omega_+ exactly when its raw U hash is below the numerator of p, which
//! realizes the Omega_+ density exactly: p = 0 selects nothing and p = 1
//! selects every site. The second variate picks the arrow set within the
//! side by the same first-bucket-below-threshold rule over the cumulative
//! weight numerators.
//!
//! Fields are pure functions of (model, seed, site): no interior caching,
//! so shared references are safe across threads and repeated queries can
//! never drift.

use std::collections::{HashMap, HashSet};

use crate::error::{DreError, Result};
use crate::fixed::UNIT;
use crate::model::{EdgeSet, ModelSpec};

/// Salt for the side-selection variate U.
pub const SALT_U: u64 = 0xA0761D6478BD642F;
/// Salt for the class-selection variate V.
pub const SALT_V: u64 = 0xE7037ED1A0B428DB;

const GAMMA: u64 = 0x9E3779B97F4A7C15;

/// splitmix64 finalizer; full-period avalanche over 64 bits.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Order-preserving map of signed coordinates onto u64 (0, -1, 1, -2, ...).
#[inline]
pub fn zigzag(c: i64) -> u64 {
    ((c << 1) ^ (c >> 63)) as u64
}

/// Hash of (seed, site) under one salt: the seed is finalized with the
/// salt, then each zig-zag coordinate is folded in with a position-scaled
/// odd constant and re-finalized.
#[inline]
pub fn site_hash(seed: u64, salt: u64, site: &[i64]) -> u64 {
    let mut h = mix64(seed ^ salt);
    for (i, &c) in site.iter().enumerate() {
        h = mix64(h ^ zigzag(c).wrapping_add(GAMMA.wrapping_mul(i as u64 + 1)));
    }
    h
}

/// A unit-interval sample, exactly (raw + 1) / 2^64 in (0, 1].
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Unit64(pub u64);

impl Unit64 {
    /// Numerator of the represented fraction over 2^64.
    pub fn numerator(&self) -> u128 {
        self.0 as u128 + 1
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator() as f64 / UNIT as f64
    }
}

/// Which side of the environment a pinned site belongs to.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum OmegaLabel {
    Plus,
    Minus,
}

/// A realized environment: model parameters plus a seed, with optional
/// per-site side pins used by explicit constructions.
#[derive(Clone, Debug)]
pub struct EnvironmentField {
    spec: ModelSpec,
    seed: u64,
    pins: HashMap<Vec<i64>, OmegaLabel>,
}

impl EnvironmentField {
    pub fn new(spec: ModelSpec, seed: u64) -> EnvironmentField {
        EnvironmentField { spec, seed, pins: HashMap::new() }
    }

    /// Environment with the listed sites pinned to their side and all other
    /// sites drawn from the completion seed. Only two-valued models can be
    /// pinned, since a side label does not determine the arrow set
    /// otherwise.
    pub fn from_explicit(explicit: &ExplicitEnvironment, completion_seed: u64) -> Result<EnvironmentField> {
        let mut pins = HashMap::with_capacity(explicit.omega_plus.len() + explicit.omega_minus.len());
        for s in &explicit.omega_plus {
            pins.insert(s.clone(), OmegaLabel::Plus);
        }
        for s in &explicit.omega_minus {
            if pins.insert(s.clone(), OmegaLabel::Minus).is_some() {
                return Err(DreError::InvalidInput(format!(
                    "site {s:?} listed on both sides"
                )));
            }
        }
        Ok(EnvironmentField { spec: explicit.spec.clone(), seed: completion_seed, pins })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn has_pins(&self) -> bool {
        !self.pins.is_empty()
    }

    /// The two per-site variates, independent of any pins.
    pub fn uniforms_at(&self, site: &[i64]) -> (Unit64, Unit64) {
        debug_assert_eq!(site.len(), self.spec.dim());
        (
            Unit64(site_hash(self.seed, SALT_U, site)),
            Unit64(site_hash(self.seed, SALT_V, site)),
        )
    }

    #[inline]
    pub fn is_omega_plus(&self, site: &[i64]) -> bool {
        if !self.pins.is_empty() {
            if let Some(label) = self.pins.get(site) {
                return *label == OmegaLabel::Plus;
            }
        }
        (site_hash(self.seed, SALT_U, site) as u128) < self.spec.p().numerator()
    }

    /// Arrow set at the site.
    #[inline]
    pub fn env_at(&self, site: &[i64]) -> EdgeSet {
        debug_assert_eq!(site.len(), self.spec.dim());
        let hv = site_hash(self.seed, SALT_V, site);
        if self.is_omega_plus(site) {
            self.spec.e_sets()[self.spec.e_index(hv)]
        } else {
            self.spec.f_sets()[self.spec.f_index(hv)]
        }
    }
}

/// Site lists pinning part of an environment by side.
#[derive(Clone, Debug)]
pub struct ExplicitEnvironment {
    spec: ModelSpec,
    omega_plus: Vec<Vec<i64>>,
    omega_minus: Vec<Vec<i64>>,
}

impl ExplicitEnvironment {
    pub fn new(
        spec: ModelSpec,
        omega_plus: Vec<Vec<i64>>,
        omega_minus: Vec<Vec<i64>>,
    ) -> Result<ExplicitEnvironment> {
        if !spec.is_two_valued() {
            return Err(DreError::InvalidInput(
                "explicit environments require a two-valued model".into(),
            ));
        }
        let dim = spec.dim();
        for s in omega_plus.iter().chain(&omega_minus) {
            if s.len() != dim {
                return Err(DreError::InvalidInput(format!(
                    "pinned site {s:?} has wrong dimension, expected {dim}"
                )));
            }
        }
        let plus: HashSet<&Vec<i64>> = omega_plus.iter().collect();
        for s in &omega_minus {
            if plus.contains(s) {
                return Err(DreError::InvalidInput(format!(
                    "site {s:?} listed on both sides"
                )));
            }
        }
        Ok(ExplicitEnvironment { spec, omega_plus, omega_minus })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn omega_plus(&self) -> &[Vec<i64>] {
        &self.omega_plus
    }

    pub fn omega_minus(&self) -> &[Vec<i64>] {
        &self.omega_minus
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixed::Prob;
    use crate::model::Direction;

    // Golden values computed with a standalone implementation of the
    // documented mixer (independent of this module).
    #[test]
    fn site_hash_golden() {
        let cases: [(u64, &[i64], u64, u64); 6] = [
            (1, &[0, 0], 0x62C4155A7328E045, 0x668BA5B4361CEF52),
            (1, &[1, 0], 0x3E4C261A1C1167B8, 0xF603C096B6042C87),
            (1, &[0, 1], 0xF2D59996CA017315, 0x7BBF5C677FEBB0D4),
            (1, &[-3, 4], 0x6C71F5CA5620FF94, 0x54C127DC857C4F0B),
            (0xC0FFEE, &[3, -4, 5], 0x74F8E0AC4C66CC6D, 0x98E9425ED3401115),
            (42, &[0, 0, 0], 0x542C0441542A3345, 0x2D44002CA68F7447),
        ];
        for (seed, site, u, v) in cases {
            assert_eq!(site_hash(seed, SALT_U, site), u, "u @ seed={seed} {site:?}");
            assert_eq!(site_hash(seed, SALT_V, site), v, "v @ seed={seed} {site:?}");
        }
    }

    #[test]
    fn zigzag_order() {
        assert_eq!(zigzag(0), 0);
        assert_eq!(zigzag(-1), 1);
        assert_eq!(zigzag(1), 2);
        assert_eq!(zigzag(-2), 3);
        assert_eq!(zigzag(i64::MAX), u64::MAX - 1);
        assert_eq!(zigzag(i64::MIN), u64::MAX);
    }

    #[test]
    fn uniform_mean_over_million_sites() {
        let field = EnvironmentField::new(ModelSpec::orthant(2, Prob::HALF), 7);
        let mut sum = 0.0f64;
        let n = 1_000_000i64;
        for i in 0..n {
            let site = [i % 1000, i / 1000];
            sum += field.uniforms_at(&site).0.to_f64();
        }
        let mean = sum / n as f64;
        assert!((mean - 0.5).abs() < 0.002, "mean {mean}");
    }

    #[test]
    fn omega_plus_frequency_matches_p() {
        let p = Prob::from_decimal_str("0.7").unwrap();
        let field = EnvironmentField::new(ModelSpec::orthant(2, p), 3);
        let mut hits = 0usize;
        let mut total = 0usize;
        for x in -500..=500 {
            for y in -500..=500 {
                total += 1;
                if field.is_omega_plus(&[x, y]) {
                    hits += 1;
                }
            }
        }
        let freq = hits as f64 / total as f64;
        assert!((freq - 0.7).abs() < 0.01, "freq {freq}");
    }

    #[test]
    fn env_at_endpoint_probabilities() {
        // p = 1: every site draws the E set; p = 0: every site draws F.
        let all = ModelSpec::orthant(2, Prob::ONE);
        let none = ModelSpec::orthant(2, Prob::ZERO);
        let f_all = EnvironmentField::new(all, 5);
        let f_none = EnvironmentField::new(none, 5);
        for x in -20..=20 {
            for y in -20..=20 {
                assert_eq!(f_all.env_at(&[x, y]), EdgeSet::all_positive(2));
                assert!(f_all.is_omega_plus(&[x, y]));
                assert_eq!(f_none.env_at(&[x, y]), EdgeSet::all_negative(2));
                assert!(!f_none.is_omega_plus(&[x, y]));
            }
        }
    }

    #[test]
    fn same_seed_same_field() {
        let p = Prob::from_decimal_str("0.4").unwrap();
        let a = EnvironmentField::new(ModelSpec::half_orthant(3, p), 99);
        let b = EnvironmentField::new(ModelSpec::half_orthant(3, p), 99);
        for x in -5..=5i64 {
            for y in -5..=5i64 {
                for z in -5..=5i64 {
                    assert_eq!(a.env_at(&[x, y, z]), b.env_at(&[x, y, z]));
                }
            }
        }
    }

    #[test]
    fn shared_seed_couples_sides_across_f_changes() {
        // Same seed, same E data, different F data: the Omega partition and
        // the E-side draws must agree site for site.
        let p = Prob::from_decimal_str("0.6").unwrap();
        let spec = ModelSpec::orthant(2, p);
        let star = spec.starred();
        let a = EnvironmentField::new(spec, 123);
        let b = EnvironmentField::new(star, 123);
        for x in -30..=30 {
            for y in -30..=30 {
                let site = [x, y];
                assert_eq!(a.is_omega_plus(&site), b.is_omega_plus(&site));
                if a.is_omega_plus(&site) {
                    assert_eq!(a.env_at(&site), b.env_at(&site));
                } else {
                    assert_eq!(b.env_at(&site), EdgeSet::full(2));
                }
            }
        }
    }

    #[test]
    fn one_ulp_threshold_shift_flips_only_matching_sites() {
        let p = Prob::from_decimal_str("0.5").unwrap();
        let bumped = Prob::from_numerator(p.numerator() + 1).unwrap();
        let a = EnvironmentField::new(ModelSpec::orthant(2, p), 11);
        let b = EnvironmentField::new(ModelSpec::orthant(2, bumped), 11);
        for x in -50..=50 {
            for y in -50..=50 {
                let site = [x, y];
                if a.is_omega_plus(&site) != b.is_omega_plus(&site) {
                    // only sites whose raw hash equals the old numerator move
                    let raw = site_hash(11, SALT_U, &site) as u128;
                    assert_eq!(raw, p.numerator());
                }
            }
        }
    }

    #[test]
    fn pinned_sites_override_and_rest_follow_seed() {
        let spec = ModelSpec::orthant(2, Prob::HALF);
        let explicit = ExplicitEnvironment::new(
            spec.clone(),
            vec![vec![0, 0], vec![1, 0]],
            vec![vec![0, 1]],
        )
        .unwrap();
        let pinned = EnvironmentField::from_explicit(&explicit, 77).unwrap();
        let free = EnvironmentField::new(spec, 77);
        assert_eq!(pinned.env_at(&[0, 0]), EdgeSet::all_positive(2));
        assert_eq!(pinned.env_at(&[1, 0]), EdgeSet::all_positive(2));
        assert_eq!(pinned.env_at(&[0, 1]), EdgeSet::all_negative(2));
        // a site differing only by an unpinned coordinate matches the free field
        for site in [[5, 5], [-3, 2], [10, -10]] {
            assert_eq!(pinned.env_at(&site), free.env_at(&site));
        }
    }

    #[test]
    fn explicit_requires_two_valued_and_disjoint() {
        let multi = ModelSpec::new(
            2,
            vec![EdgeSet::all_positive(2), EdgeSet::from_dirs(2, &[Direction::positive(1)])],
            vec![EdgeSet::full(2)],
            crate::fixed::normalize_weights(&["0.5".into(), "0.5".into()]).unwrap(),
            vec![Prob::ONE],
            Prob::HALF,
        )
        .unwrap();
        assert!(ExplicitEnvironment::new(multi, vec![], vec![]).is_err());

        let spec = ModelSpec::orthant(2, Prob::HALF);
        assert!(ExplicitEnvironment::new(spec, vec![vec![0, 0]], vec![vec![0, 0]]).is_err());
    }

    #[test]
    fn class_draw_frequencies_follow_weights() {
        // k = 2 with weights 0.3 / 0.7: check the first-set frequency.
        let e1 = EdgeSet::from_dirs(2, &[Direction::positive(1)]);
        let e2 = EdgeSet::all_positive(2);
        let spec = ModelSpec::new(
            2,
            vec![e1, e2],
            vec![EdgeSet::full(2)],
            crate::fixed::normalize_weights(&["0.3".into(), "0.7".into()]).unwrap(),
            vec![Prob::ONE],
            Prob::ONE, // all sites on the E side
        )
        .unwrap();
        let field = EnvironmentField::new(spec, 21);
        let mut first = 0usize;
        let mut total = 0usize;
        for x in -300..=300 {
            for y in -300..=300 {
                total += 1;
                if field.env_at(&[x, y]) == e1 {
                    first += 1;
                }
            }
        }
        let freq = first as f64 / total as f64;
        assert!((freq - 0.3).abs() < 0.01, "freq {freq}");
    }
}
