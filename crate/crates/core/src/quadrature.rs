//! Composite Gauss-Legendre quadrature with dyadic panel refinement.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Nodes via Newton iteration on `P_n`, ascending.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be at least 1");
        let n = order;
        let nf = T::count(n);
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        for i in 0..n.div_ceil(2) {
            let mut x = (T::PI() * (T::count(i) + T::lit(0.75)) / (nf + T::lit(0.5))).cos();
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x = x - dx;
                if dx.abs() <= T::epsilon() * T::lit(4.0) {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d.is_finite() {
                dp = d;
            }
            let w = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = T::zero();
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Integral of `f` over `[a, b]` with a single panel.
    pub fn integrate(&self, a: T, b: T, mut f: impl FnMut(T) -> T) -> T {
        let half = (b - a) * T::lit(0.5);
        let mid = (a + b) * T::lit(0.5);
        let mut acc = T::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + w * f(mid + half * x);
        }
        acc * half
    }
}

fn legendre_with_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = T::count(k);
        let p2 = ((T::lit(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (T::one(), T::zero());
    }
    let nf = T::count(n);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// Settings for [`average_over`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec<T> {
    /// Gauss-Legendre points per panel.
    pub order: usize,
    /// Successive-estimate relative tolerance.
    pub rtol: T,
    /// Maximum refinement level; the finest level uses `2^max_level` panels.
    pub max_level: u32,
    /// Minimum refinement level before convergence is tested.
    pub min_level: u32,
}

impl<T: Real> Default for QuadratureSpec<T> {
    fn default() -> Self {
        Self {
            order: 16,
            rtol: T::lit(1e-9),
            max_level: 12,
            min_level: 1,
        }
    }
}

/// Mean of a vector-valued integrand over `[a, b]`.
///
/// Level `l` splits the interval into `2^l` equal panels; refinement stops once
/// every component of two successive estimates agrees to `rtol`. Panels are
/// summed left to right, so the result is independent of how `f` is scheduled.
pub fn average_over<T: Real, const K: usize>(
    a: T,
    b: T,
    spec: &QuadratureSpec<T>,
    mut f: impl FnMut(T) -> Result<[T; K]>,
) -> Result<[T; K]> {
    let v = average_over_dyn(a, b, spec, K, |x| f(x).map(|arr| arr.to_vec()))?;
    let mut out = [T::zero(); K];
    out.copy_from_slice(&v);
    Ok(out)
}

/// [`average_over`] for an integrand with `k` components known only at run time.
pub fn average_over_dyn<T: Real>(
    a: T,
    b: T,
    spec: &QuadratureSpec<T>,
    k: usize,
    mut f: impl FnMut(T) -> Result<Vec<T>>,
) -> Result<Vec<T>> {
    if !(b > a) {
        return Err(Error::domain("interval width", (b - a).as_f64(), "must be > 0"));
    }
    let rule = GaussLegendre::<T>::new(spec.order);
    let width = b - a;
    let mut previous: Option<Vec<T>> = None;
    let mut last_gap = T::infinity();
    let mut estimate = vec![T::zero(); k];
    for level in 0..=spec.max_level {
        let panels = 1usize << level;
        let h = width / T::count(panels);
        let mut total = vec![T::zero(); k];
        let mut panel = vec![T::zero(); k];
        for p in 0..panels {
            let lo = a + h * T::count(p);
            let hi = if p + 1 == panels { b } else { lo + h };
            let half = (hi - lo) * T::lit(0.5);
            let mid = (hi + lo) * T::lit(0.5);
            panel.iter_mut().for_each(|v| *v = T::zero());
            for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
                let v = f(mid + half * x)?;
                if v.len() != k {
                    return Err(Error::Dimension {
                        what: "integrand",
                        got: v.len(),
                        expected: k,
                    });
                }
                for (acc, vi) in panel.iter_mut().zip(&v) {
                    *acc = *acc + w * *vi;
                }
            }
            for (t, pv) in total.iter_mut().zip(&panel) {
                *t = *t + *pv * half;
            }
        }
        for (e, t) in estimate.iter_mut().zip(&total) {
            *e = *t / width;
        }
        if let Some(prev) = &previous {
            let mut gap = T::zero();
            for (e, p) in estimate.iter().zip(prev) {
                let scale = e.abs().max(T::min_positive_value());
                gap = gap.max((*e - *p).abs() / scale);
            }
            last_gap = gap;
            if level >= spec.min_level && gap < spec.rtol {
                return Ok(estimate);
            }
        }
        previous = Some(estimate.clone());
    }
    Err(Error::Integration {
        estimate: estimate.first().map_or(f64::NAN, |e| e.as_f64()),
        gap: last_gap.as_f64(),
        panels: 1usize << spec.max_level,
    })
}
