//! Finite-difference stencils on the uniform logarithmic grid.
//!
//! Derivatives are taken with respect to `u = ln(rho)`. Interior nodes use the
//! 4th-order centered five-point formulas. The outer end always uses one-sided
//! formulas of the same order; the inner end either folds ghost nodes back
//! onto the grid through a [`LeftRule::Ghost`] reflection or falls back to
//! one-sided formulas.

/// Finite-difference weights by Fornberg's recursion.
///
/// Returns `c[j][k]`, the weight of node `x[j]` in the `k`-th derivative at `z`.
pub fn fornberg_weights(z: f64, x: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; max_order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c
}

/// How values beyond the inner end of the grid are obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LeftRule {
    /// Shifted one-sided formulas, no ghost values.
    OneSided,
    /// Ghost node `-k` mirrors node `k`: `f[-k] = parity * f[k] * exp(2 weight k h)`,
    /// i.e. `rho^weight * f` has the given parity about the inner sphere.
    Ghost { parity: f64, weight: f64 },
}

impl LeftRule {
    pub const EVEN: LeftRule = LeftRule::Ghost { parity: 1.0, weight: 0.0 };
    pub const ODD: LeftRule = LeftRule::Ghost { parity: -1.0, weight: 0.0 };
}

#[derive(Debug, Clone)]
pub struct Stencil {
    pub offsets: Vec<isize>,
    pub weights: Vec<f64>,
}

impl Stencil {
    fn build(offsets: Vec<isize>, order: usize, h: f64) -> Self {
        let x: Vec<f64> = offsets.iter().map(|&o| o as f64).collect();
        let scale = h.powi(order as i32);
        let weights = fornberg_weights(0.0, &x, order)
            .into_iter()
            .map(|w| w[order] / scale)
            .collect();
        Stencil { offsets, weights }
    }
}

/// First and second derivative operators in `u` for a grid of `n` nodes.
#[derive(Debug, Clone)]
pub struct DiffOps {
    n: usize,
    h: f64,
    center: [Stencil; 2],
    left: [[Stencil; 2]; 2],
    right: [[Stencil; 2]; 2],
}

impl DiffOps {
    pub fn new(n: usize, h: f64) -> Self {
        let r = |a: isize, b: isize| (a..=b).collect::<Vec<isize>>();
        let center = [Stencil::build(r(-2, 2), 1, h), Stencil::build(r(-2, 2), 2, h)];
        // left[node][order-1], node 0 and node 1
        let left = [
            [Stencil::build(r(0, 4), 1, h), Stencil::build(r(0, 5), 2, h)],
            [Stencil::build(r(-1, 3), 1, h), Stencil::build(r(-1, 4), 2, h)],
        ];
        // right[distance from last node][order-1]
        let right = [
            [Stencil::build(r(-4, 0), 1, h), Stencil::build(r(-5, 0), 2, h)],
            [Stencil::build(r(-3, 1), 1, h), Stencil::build(r(-4, 1), 2, h)],
        ];
        DiffOps { n, h, center, left, right }
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn stencil(&self, i: usize, order: usize, rule: LeftRule) -> &Stencil {
        debug_assert!(order == 1 || order == 2);
        let o = order - 1;
        if i + 2 >= self.n {
            &self.right[self.n - 1 - i][o]
        } else if i < 2 && rule == LeftRule::OneSided {
            &self.left[i][o]
        } else {
            &self.center[o]
        }
    }

    /// Stencil of row `i` with ghost nodes folded back onto real nodes.
    pub fn row(&self, i: usize, order: usize, rule: LeftRule) -> Vec<(usize, f64)> {
        let st = self.stencil(i, order, rule);
        st.offsets
            .iter()
            .zip(&st.weights)
            .map(|(&o, &w)| {
                let j = i as isize + o;
                if j >= 0 {
                    (j as usize, w)
                } else {
                    let k = (-j) as usize;
                    (k, w * ghost_factor(rule, k, self.h))
                }
            })
            .collect()
    }

    pub fn apply(&self, f: &[f64], order: usize, rule: LeftRule) -> Vec<f64> {
        debug_assert_eq!(f.len(), self.n);
        (0..self.n)
            .map(|i| {
                // differences against f[i] make constants exact
                let st = self.stencil(i, order, rule);
                let mut acc = 0.0;
                for (&o, &w) in st.offsets.iter().zip(&st.weights) {
                    let j = i as isize + o;
                    let v = if j >= 0 {
                        f[j as usize]
                    } else {
                        let k = (-j) as usize;
                        ghost_factor(rule, k, self.h) * f[k]
                    };
                    acc += w * (v - f[i]);
                }
                acc
            })
            .collect()
    }

    pub fn d1(&self, f: &[f64], rule: LeftRule) -> Vec<f64> {
        self.apply(f, 1, rule)
    }

    pub fn d2(&self, f: &[f64], rule: LeftRule) -> Vec<f64> {
        self.apply(f, 2, rule)
    }
}

pub(crate) fn ghost_factor(rule: LeftRule, k: usize, h: f64) -> f64 {
    match rule {
        LeftRule::Ghost { parity, weight } => {
            if weight == 0.0 {
                parity
            } else {
                parity * (2.0 * weight * k as f64 * h).exp()
            }
        }
        LeftRule::OneSided => unreachable!("one-sided rows never reach ghost nodes"),
    }
}

/// Lagrange interpolation of nodal values `f` at `u`, measured in the same
/// units as the grid coordinate with node 0 at `u0`.
///
/// Uses `npts` nodes centered on `u`; near the inner end ghost values supplied
/// by `rule` are used, near the outer end the window is clamped.
pub fn interpolate(f: &[f64], u0: f64, h: f64, rule: LeftRule, npts: usize, u: f64) -> f64 {
    let n = f.len();
    let s = (u - u0) / h;
    let mut start = s.floor() as isize - (npts as isize / 2 - 1);
    let max_start = n as isize - npts as isize;
    if start > max_start {
        start = max_start;
    }
    if rule == LeftRule::OneSided && start < 0 {
        start = 0;
    }
    let min_start = -(npts as isize);
    if start < min_start {
        start = min_start;
    }
    let x: Vec<f64> = (0..npts).map(|k| (start + k as isize) as f64).collect();
    let w = fornberg_weights(s, &x, 0);
    let mut acc = 0.0;
    for (k, wk) in w.iter().enumerate() {
        let j = start + k as isize;
        let v = if j >= 0 {
            f[j as usize]
        } else {
            let kk = (-j) as usize;
            ghost_factor(rule, kk, h) * f[kk]
        };
        acc += wk[0] * v;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_weights_match_textbook() {
        let w = fornberg_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 2);
        let d1: Vec<f64> = w.iter().map(|c| c[1] * 12.0).collect();
        let d2: Vec<f64> = w.iter().map(|c| c[2] * 12.0).collect();
        for (a, b) in d1.iter().zip([1.0, -8.0, 0.0, 8.0, -1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in d2.iter().zip([-1.0, 16.0, -30.0, 16.0, -1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn fourth_order_everywhere() {
        // error of d/du sin(u) must drop by ~16 per halving, including the ends
        let err = |n: usize| {
            let h = 1.0 / (n - 1) as f64;
            let ops = DiffOps::new(n, h);
            let f: Vec<f64> = (0..n).map(|i| (i as f64 * h).sin()).collect();
            let d1 = ops.d1(&f, LeftRule::OneSided);
            let d2 = ops.d2(&f, LeftRule::OneSided);
            let mut e: f64 = 0.0;
            for i in 0..n {
                let u = i as f64 * h;
                e = e.max((d1[i] - u.cos()).abs()).max((d2[i] + u.sin()).abs());
            }
            e
        };
        let rate = (err(41) / err(81)).log2();
        assert!(rate > 3.7, "rate {rate}");
    }

    #[test]
    fn ghost_rule_reproduces_even_extension() {
        let n = 20;
        let h = 0.1;
        let ops = DiffOps::new(n, h);
        // cos is even about u = 0
        let f: Vec<f64> = (0..n).map(|i| (i as f64 * h).cos()).collect();
        let d1 = ops.d1(&f, LeftRule::EVEN);
        assert!(d1[0].abs() < 1e-14);
        let d2 = ops.d2(&f, LeftRule::EVEN);
        assert!((d2[0] + 1.0).abs() < 1e-4);
    }

    #[test]
    fn interpolation_is_exact_for_polynomials() {
        let f: Vec<f64> = (0..30).map(|i| (i as f64 * 0.5).powi(3)).collect();
        let v = interpolate(&f, 0.0, 0.5, LeftRule::OneSided, 4, 3.3);
        assert!((v - 3.3f64.powi(3)).abs() < 1e-10);
        let v = interpolate(&f, 0.0, 0.5, LeftRule::OneSided, 4, 14.4);
        assert!((v - 14.4f64.powi(3)).abs() < 1e-9);
    }
}
