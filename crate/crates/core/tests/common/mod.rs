//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, Matrix3, Vector3};
use rand::Rng;

pub type Field = dyn Fn(&[f64]) -> DMatrix<f64>;

/// Finite-difference curvature engine on a coordinate chart.
///
/// Metric components are differenced with 4th-order central stencils of
/// spacing `step`; Christoffel symbols and Ricci follow from the textbook
/// coordinate formulas with no knowledge of any symmetry.
pub struct ChartEngine<'a> {
    pub metric: &'a Field,
    pub dim: usize,
    pub step: f64,
}

fn shifted(x: &[f64], k: usize, d: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[k] += d;
    y
}

impl ChartEngine<'_> {
    fn d1(&self, x: &[f64], k: usize) -> DMatrix<f64> {
        let h = self.step;
        let g = |d: f64| (self.metric)(&shifted(x, k, d * h));
        (g(-2.0) - g(-1.0) * 8.0 + g(1.0) * 8.0 - g(2.0)) / (12.0 * h)
    }

    fn d2(&self, x: &[f64], k: usize, l: usize) -> DMatrix<f64> {
        let h = self.step;
        if k == l {
            let g = |d: f64| (self.metric)(&shifted(x, k, d * h));
            return (g(-2.0) * -1.0 + g(-1.0) * 16.0 - g(0.0) * 30.0 + g(1.0) * 16.0 - g(2.0)) / (12.0 * h * h);
        }
        let c = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];
        let mut acc = DMatrix::zeros(self.dim, self.dim);
        for &(a, wa) in &c {
            for &(b, wb) in &c {
                let y = shifted(&shifted(x, k, a * h), l, b * h);
                acc += (self.metric)(&y) * (wa * wb);
            }
        }
        acc / (144.0 * h * h)
    }

    /// Christoffel symbols `gamma[k][i][j] = Gamma^k_ij` at `x`.
    pub fn christoffel(&self, x: &[f64]) -> Vec<Vec<Vec<f64>>> {
        let n = self.dim;
        let g = (self.metric)(x);
        let gi = g.clone().try_inverse().expect("invertible metric");
        let dg: Vec<DMatrix<f64>> = (0..n).map(|k| self.d1(x, k)).collect();
        let mut gam = vec![vec![vec![0.0; n]; n]; n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    gam[k][i][j] = (0..n)
                        .map(|l| 0.5 * gi[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]))
                        .sum();
                }
            }
        }
        gam
    }

    /// Ricci tensor in chart components at `x`.
    pub fn ricci(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.dim;
        let g = (self.metric)(x);
        let gi = g.clone().try_inverse().expect("invertible metric");
        let dg: Vec<DMatrix<f64>> = (0..n).map(|k| self.d1(x, k)).collect();
        let mut ddg = vec![vec![DMatrix::zeros(n, n); n]; n];
        for k in 0..n {
            for l in k..n {
                let v = self.d2(x, k, l);
                ddg[k][l] = v.clone();
                ddg[l][k] = v;
            }
        }
        // d_m g^{kl} = -g^{ka} d_m g_ab g^{bl}
        let dgi: Vec<DMatrix<f64>> = dg.iter().map(|d| -(&gi * d * &gi)).collect();
        let gam = self.christoffel(x);
        // d_m Gamma^k_ij
        let mut dgam = vec![vec![vec![vec![0.0; n]; n]; n]; n];
        for m in 0..n {
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let mut v = 0.0;
                        for l in 0..n {
                            let low = dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)];
                            let dlow = ddg[m][i][(j, l)] + ddg[m][j][(i, l)] - ddg[m][l][(i, j)];
                            v += 0.5 * (dgi[m][(k, l)] * low + gi[(k, l)] * dlow);
                        }
                        dgam[m][k][i][j] = v;
                    }
                }
            }
        }
        let mut ric = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut v = 0.0;
                for k in 0..n {
                    v += dgam[k][k][i][j] - dgam[j][k][i][k];
                    for l in 0..n {
                        v += gam[k][k][l] * gam[l][i][j] - gam[k][j][l] * gam[l][i][k];
                    }
                }
                ric[(i, j)] = v;
            }
        }
        ric
    }

    pub fn scalar(&self, x: &[f64]) -> f64 {
        let gi = (self.metric)(x).try_inverse().unwrap();
        let r = self.ricci(x);
        (0..self.dim).flat_map(|i| (0..self.dim).map(move |j| (i, j))).map(|(i, j)| gi[(i, j)] * r[(i, j)]).sum()
    }
}

/// Cartesian components `B^2 delta_ij + (A^2 - B^2) x_i x_j / rho^2` of a
/// radial metric with analytic profiles.
pub fn radial_cartesian(a: impl Fn(f64) -> f64 + 'static, b: impl Fn(f64) -> f64 + 'static, dim: usize) -> Box<Field> {
    Box::new(move |x: &[f64]| {
        let rho = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let (aa, bb) = (a(rho).powi(2), b(rho).powi(2));
        DMatrix::from_fn(dim, dim, |i, j| {
            let d = if i == j { bb } else { 0.0 };
            d + (aa - bb) * x[i] * x[j] / (rho * rho)
        })
    })
}

/// Radial and tangential Ricci coefficients `(rr, tt)` from chart components at
/// the point `rho * e_0`.
pub fn radial_split(ric: &DMatrix<f64>) -> (f64, f64) {
    (ric[(0, 0)], ric[(1, 1)])
}

/// Left-invariant coframe on SU(2) in Euler angles `(theta, phi, psi)`.
pub fn su2_coframe(x: &[f64]) -> Matrix3<f64> {
    let (th, ps) = (x[0], x[2]);
    Matrix3::new(
        ps.sin(),
        -ps.cos() * th.sin(),
        0.0,
        ps.cos(),
        ps.sin() * th.sin(),
        0.0,
        0.0,
        th.cos(),
        1.0,
    )
}

/// Chart components of `sum_i g_i (sigma_i / 2)^2`.
pub fn su2_metric(coeffs: [f64; 3]) -> Box<Field> {
    Box::new(move |x: &[f64]| {
        let s = su2_coframe(x);
        let mut g = DMatrix::zeros(3, 3);
        for i in 0..3 {
            let row = s.row(i);
            for a in 0..3 {
                for b in 0..3 {
                    g[(a, b)] += 0.25 * coeffs[i] * row[a] * row[b];
                }
            }
        }
        g
    })
}

/// Chart Ricci evaluated on the frame dual to `sigma_i / 2`.
pub fn su2_frame_ricci(ric: &DMatrix<f64>, x: &[f64]) -> Matrix3<f64> {
    let theta = su2_coframe(x) * 0.5;
    let e = theta.try_inverse().unwrap();
    let r = Matrix3::from_fn(|i, j| ric[(i, j)]);
    e.transpose() * r * e
}

pub fn frame_vector(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(m[(0, 0)], m[(1, 1)], m[(2, 2)])
}

/// Composite Gauss-Legendre quadrature on `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let x = [-0.906_179_845_938_664, -0.538_469_310_105_683, 0.0, 0.538_469_310_105_683, 0.906_179_845_938_664];
    let w = [0.236_926_885_056_189, 0.478_628_670_499_366, 0.568_888_888_888_889, 0.478_628_670_499_366, 0.236_926_885_056_189];
    let h = (b - a) / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        for k in 0..5 {
            s += w[k] * f(c + 0.5 * h * x[k]);
        }
    }
    0.5 * h * s
}

/// Decaying solution of `2 Lap p = f` on flat 3-space for a source supported
/// in `[lo, hi]`: `p = -(1/2) [ (1/rho) int_0^rho f r^2 dr + int_rho^inf f r dr ]`.
pub fn green_pressure(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, rho: f64) -> f64 {
    let inner_hi = rho.clamp(lo, hi);
    let outer_lo = rho.clamp(lo, hi);
    let inner = if rho > lo { integrate(|r| f(r) * r * r, lo, inner_hi, 400) } else { 0.0 };
    let outer = if rho < hi { integrate(|r| f(r) * r, outer_lo, hi, 400) } else { 0.0 };
    -0.5 * (inner / rho + outer)
}

/// Smooth compactly supported bump on `[lo, hi]`.
pub fn bump(lo: f64, hi: f64) -> impl Fn(f64) -> f64 {
    move |r: f64| {
        let x = (2.0 * r - lo - hi) / (hi - lo);
        if x.abs() < 1.0 {
            (1.0 - 1.0 / (1.0 - x * x)).exp()
        } else {
            0.0
        }
    }
}

/// Seeded generator for randomized oracle comparisons.
pub fn rng(seed: u64) -> rand::rngs::StdRng {
    use rand::SeedableRng;
    rand::rngs::StdRng::seed_from_u64(seed)
}

/// `omega^-1` times the ADM flux `(d_i g_ij - d_j g_ii) n^j` over the coordinate
/// sphere of radius `r` in 3 dimensions, by Cartesian differencing and
/// Gauss-Legendre quadrature over the sphere.
pub fn adm_flux(metric: &Field, r: f64) -> f64 {
    let h = 1e-3 * r;
    let deriv = |x: &[f64], k: usize| {
        let g = |d: f64| metric(&shifted(x, k, d * h));
        (g(-2.0) - g(-1.0) * 8.0 + g(1.0) * 8.0 - g(2.0)) / (12.0 * h)
    };
    let n_phi = 16;
    let per_theta = |c: f64| {
        let st = (1.0 - c * c).sqrt();
        let mut acc = 0.0;
        for k in 0..n_phi {
            let ph = 2.0 * std::f64::consts::PI * k as f64 / n_phi as f64;
            let n = [st * ph.cos(), st * ph.sin(), c];
            let x = [r * n[0], r * n[1], r * n[2]];
            let d: Vec<DMatrix<f64>> = (0..3).map(|k| deriv(&x, k)).collect();
            for j in 0..3 {
                let mut v = 0.0;
                for i in 0..3 {
                    v += d[i][(i, j)] - d[j][(i, i)];
                }
                acc += v * n[j];
            }
        }
        acc * 2.0 * std::f64::consts::PI / n_phi as f64
    };
    integrate(per_theta, -1.0, 1.0, 8) * r * r / (4.0 * std::f64::consts::PI)
}

/// Volume of `sum_i g_i (sigma_i / 2)^2` on SU(2) by integrating the chart
/// density over Euler angles.
pub fn su2_volume(coeffs: [f64; 3]) -> f64 {
    let field = su2_metric(coeffs);
    let density = |th: f64| field(&[th, 0.3, 0.7]).determinant().sqrt();
    integrate(density, 0.0, std::f64::consts::PI, 40) * 2.0 * std::f64::consts::PI * 4.0 * std::f64::consts::PI
}

/// Random radial profile `1 + c/rho + sum of log-Gaussian bumps`.
pub fn random_profile(rng: &mut impl Rng) -> impl Fn(f64) -> f64 + Clone + 'static {
    let bumps: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| (rng.random_range(-0.15..0.15), rng.random_range(0.8..2.8), rng.random_range(0.35..0.7)))
        .collect();
    let c = rng.random_range(0.0..0.3);
    move |r: f64| {
        let u = r.ln();
        1.0 + c / r + bumps.iter().map(|(a, c0, w)| a * (-((u - c0) / w).powi(2)).exp()).sum::<f64>()
    }
}
