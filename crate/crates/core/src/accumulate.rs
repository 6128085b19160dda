//! Keyed compensated summation shared by the polynomial-like containers.

use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
    abs: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
        self.abs += x.abs();
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Map from keys to compensated sums. Entries whose total is at rounding
/// level relative to the magnitude of their contributions are dropped when
/// the map is finished.
#[derive(Clone, Debug)]
pub(crate) struct Accumulator<K: Ord> {
    map: BTreeMap<K, Neumaier>,
}

impl<K: Ord> Default for Accumulator<K> {
    fn default() -> Self {
        Self {
            map: BTreeMap::new(),
        }
    }
}

impl<K: Ord> Accumulator<K> {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    pub(crate) fn add(&mut self, key: K, value: f64) {
        if value != 0.0 {
            self.map.entry(key).or_default().add(value);
        }
    }

    pub(crate) fn finish(self) -> BTreeMap<K, f64> {
        self.map
            .into_iter()
            .filter_map(|(k, n)| {
                let v = n.value();
                (v != 0.0 && v.abs() > 8.0 * f64::EPSILON * n.abs).then_some((k, v))
            })
            .collect()
    }
}
