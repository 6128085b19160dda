//! Pathwise evaluation of iterated integrals on a discretized path.
//!
//! Each level is evaluated by left-point Euler sums,
//! `I_{α‖(i,n)}(t_{k+1}) = I_{α‖(i,n)}(t_k) + I_α(t_k) L(t_k)^n ΔW_i(k)`,
//! which is the discrete analogue of the Itô integral.

use std::collections::HashMap;

use crate::ito_algebra::{IntegralExpression, IntegralIndex, Integrator};

/// Increments of `W` and values of `L` on a uniform grid over `[0, T]`.
#[derive(Clone, Debug)]
pub struct DiscretePath {
    dt: f64,
    dw: Vec<f64>,
    /// `L(t_k)` for `k = 0..=N`
    l: Vec<f64>,
}

impl DiscretePath {
    /// Builds a path from Brownian and gamma increments of equal length.
    ///
    /// # Panics
    /// If the increment vectors differ in length or are empty.
    pub fn from_increments(dt: f64, dw: Vec<f64>, dl: &[f64]) -> Self {
        assert_eq!(dw.len(), dl.len(), "increment vectors differ in length");
        assert!(!dw.is_empty(), "empty path");
        let mut l = Vec::with_capacity(dl.len() + 1);
        l.push(0.0);
        let mut acc = 0.0;
        for &d in dl {
            acc += d;
            l.push(acc);
        }
        Self { dt, dw, l }
    }

    pub fn steps(&self) -> usize {
        self.dw.len()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `W(T)`
    pub fn w_end(&self) -> f64 {
        self.dw.iter().sum()
    }

    /// `L(T)`
    pub fn l_end(&self) -> f64 {
        *self.l.last().expect("nonempty")
    }

    pub fn dw(&self) -> &[f64] {
        &self.dw
    }

    pub fn l_values(&self) -> &[f64] {
        &self.l
    }

    /// Terminal value of one iterated integral.
    pub fn integral(&self, index: &IntegralIndex) -> f64 {
        let mut cache = HashMap::new();
        *self.prefix_path(index, &mut cache).last().expect("nonempty")
    }

    /// Terminal value of an expression.
    pub fn evaluate(&self, expr: &IntegralExpression) -> f64 {
        self.evaluate_many(std::slice::from_ref(expr))[0]
    }

    /// Terminal values of several expressions sharing one prefix cache.
    pub fn evaluate_many(&self, exprs: &[IntegralExpression]) -> Vec<f64> {
        let mut cache = HashMap::new();
        let l_end = self.l_end();
        exprs
            .iter()
            .map(|e| {
                e.terms()
                    .map(|t| {
                        let path = self.prefix_path(&t.index, &mut cache);
                        t.coeff * path.last().expect("nonempty") * l_end.powi(t.pending as i32)
                    })
                    .sum()
            })
            .collect()
    }

    fn prefix_path<'c>(
        &self,
        index: &IntegralIndex,
        cache: &'c mut HashMap<IntegralIndex, Vec<f64>>,
    ) -> &'c Vec<f64> {
        if !cache.contains_key(index) {
            let n = self.steps();
            let values = match index.split_last() {
                None => vec![1.0; n + 1],
                Some((rest, level)) => {
                    let inner = self.prefix_path(&rest, cache).clone();
                    let mut out = Vec::with_capacity(n + 1);
                    let mut acc = 0.0;
                    out.push(0.0);
                    for k in 0..n {
                        let d = match level.integrator {
                            Integrator::Time => self.dt,
                            Integrator::Wiener => self.dw[k],
                        };
                        acc += inner[k] * self.l[k].powi(level.l_power as i32) * d;
                        out.push(acc);
                    }
                    out
                }
            };
            cache.insert(index.clone(), values);
        }
        &cache[index]
    }
}
