//! Gauss-Laguerre quadrature rules for Gamma-distributed channel gains.
//!
//! A gain `h ~ Gamma(kappa, g/kappa)` turns the capacity expectation into
//! `E[f(h)] = (1/Gamma(kappa)) * integral of f(g*x/kappa) * x^(kappa-1) * exp(-x) dx`
//! after the substitution `x = kappa*h/g`. That integral is exactly the
//! weighted form handled by generalized Gauss-Laguerre quadrature with
//! exponent `alpha = kappa - 1`, so one 64-node rule per distinct shape
//! parameter integrates every capacity-like functional of that link.
//!
//! Nodes and weights come from the Golub-Welsch construction: the nodes
//! are the eigenvalues of the symmetric tridiagonal Jacobi matrix of the
//! generalized Laguerre recurrence, and the *probability* weights (the
//! classical weights divided by `Gamma(kappa)`) are the squared first
//! components of the orthonormal eigenvectors. Working directly with
//! probability weights sidesteps `Gamma(kappa)` overflow for large shapes
//! and makes the weights sum to one by construction.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

/// Node count of every rule. Accuracy against a Monte Carlo oracle is
/// asserted by tests over the shape/SNR envelope the scenario generator
/// produces (`kappa >= 1`, per-block SNR up to a few hundred).
pub const NODES: usize = 64;

/// One cached quadrature rule: `E[f(h)] = sum(probs[i] * f(scale * nodes[i]))`
/// with `scale = g / kappa` for a link with mean gain `g`.
#[derive(Debug)]
pub struct GammaRule {
    /// Shape parameter the rule was built for.
    pub kappa: f64,
    /// Roots of the generalized Laguerre polynomial, ascending.
    pub nodes: [f64; NODES],
    /// Probability weights; they sum to one up to rounding.
    pub probs: [f64; NODES],
}

impl GammaRule {
    fn build(kappa: f64) -> GammaRule {
        assert!(
            kappa.is_finite() && kappa >= 0.5,
            "Gamma shape must be finite and >= 0.5, got {kappa}"
        );
        let alpha = kappa - 1.0;
        let n = NODES;
        let mut jacobi = DMatrix::zeros(n, n);
        for i in 0..n {
            jacobi[(i, i)] = 2.0 * i as f64 + alpha + 1.0;
            if i > 0 {
                let off = (i as f64 * (i as f64 + alpha)).sqrt();
                jacobi[(i, i - 1)] = off;
                jacobi[(i - 1, i)] = off;
            }
        }
        let eig = SymmetricEigen::new(jacobi);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        let mut rule = GammaRule {
            kappa,
            nodes: [0.0; NODES],
            probs: [0.0; NODES],
        };
        for (slot, &j) in order.iter().enumerate() {
            let first = eig.eigenvectors[(0, j)];
            rule.nodes[slot] = eig.eigenvalues[j];
            rule.probs[slot] = first * first;
        }
        rule
    }
}

/// Returns the rule for `kappa`, building and caching it on first use.
/// Cached rules are immutable and shared; lookups after the first are a
/// map probe, so per-link solver loops should hold the returned `Arc`
/// rather than calling this per evaluation.
pub fn rule_for(kappa: f64) -> Arc<GammaRule> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<GammaRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = kappa.to_bits();
    if let Some(rule) = cache.lock().unwrap().get(&key) {
        return Arc::clone(rule);
    }
    // Build outside the lock; concurrent builders produce identical rules.
    let rule = Arc::new(GammaRule::build(kappa));
    let mut map = cache.lock().unwrap();
    Arc::clone(map.entry(key).or_insert(rule))
}
