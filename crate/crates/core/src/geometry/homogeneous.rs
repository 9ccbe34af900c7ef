use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::tensor::{Components, CurvatureData, Metric};
use crate::error::{Error, Result};

pub type Tensor3 = [[[f64; 3]; 3]; 3];
pub type Tensor4 = [[[[f64; 3]; 3]; 3]; 3];
pub type Mat3 = [[f64; 3]; 3];

/// Left-invariant metric `sum g_i theta_i^2` on a 3-dimensional unimodular
/// group, diagonal in a frame `e_i` with `[e_i, e_j] = c^k_ij e_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousMetric {
    pub coeffs: [f64; 3],
    /// `structure_constants[k][i][j] = c^k_ij`.
    pub structure_constants: Tensor3,
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Structure constants `c^k_ij = lambda_k eps_ijk` of a Milnor frame.
pub fn milnor_structure(lambda: [f64; 3]) -> Tensor3 {
    let mut c = [[[0.0; 3]; 3]; 3];
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                c[k][i][j] = lambda[k] * levi_civita(i, j, k);
            }
        }
    }
    c
}

impl HomogeneousMetric {
    pub fn new(coeffs: [f64; 3], structure_constants: Tensor3) -> Result<Self> {
        if coeffs.iter().any(|c| !(*c > 0.0) || !c.is_finite()) {
            return Err(Error::InvalidMetric(format!("coefficients must be positive, got {coeffs:?}")));
        }
        let c = &structure_constants;
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    if (c[k][i][j] + c[k][j][i]).abs() > 1e-14 {
                        return Err(Error::InvalidMetric("structure constants not antisymmetric".into()));
                    }
                    if (k == i || k == j) && c[k][i][j] != 0.0 {
                        return Err(Error::UnsupportedGeometry(
                            "only unimodular frames with c^k_ij = 0 for repeated indices are supported".into(),
                        ));
                    }
                }
            }
        }
        Ok(HomogeneousMetric { coeffs, structure_constants })
    }

    /// Metric on the compact group with `c^k_ij = 2 eps_ijk`; `(1,1,1)` is the unit round sphere.
    pub fn su2(coeffs: [f64; 3]) -> Result<Self> {
        HomogeneousMetric::new(coeffs, milnor_structure([2.0; 3]))
    }

    pub fn round() -> Self {
        HomogeneousMetric::su2([1.0; 3]).expect("round metric is valid")
    }

    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        HomogeneousMetric::new(self.coeffs.map(|c| c * lambda), self.structure_constants)
    }

    /// `lambda_k = c^k_ij` for `(i, j, k)` cyclic.
    pub fn milnor_constants(&self) -> [f64; 3] {
        let c = &self.structure_constants;
        [c[0][1][2], c[1][2][0], c[2][0][1]]
    }

    /// Smallest squared length scale `g_i / |lambda_j lambda_k|` over the frame,
    /// falling back to `g_i` for directions with vanishing bracket.
    pub fn min_length_sq(&self) -> f64 {
        let l = self.milnor_constants();
        (0..3)
            .map(|i| {
                let k2 = (l[(i + 1) % 3] * l[(i + 2) % 3]).abs();
                if k2 > 0.0 { self.coeffs[i] / k2 } else { self.coeffs[i] }
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn is_compact(&self) -> bool {
        let l = self.milnor_constants();
        l.iter().all(|x| *x > 0.0) || l.iter().all(|x| *x < 0.0)
    }

    /// Total volume; defined for the compact group only.
    pub fn volume(&self) -> Result<f64> {
        if !self.is_compact() {
            return Err(Error::UnsupportedGeometry("volume requires the compact group".into()));
        }
        let l = self.milnor_constants();
        let prod = (l[0] * l[1] * l[2]).abs();
        let pi = std::f64::consts::PI;
        Ok(2.0 * pi * pi * 8.0 / prod * (self.coeffs[0] * self.coeffs[1] * self.coeffs[2]).sqrt())
    }

    /// Structure constants in the orthonormal frame `E_i = e_i / sqrt(g_i)`.
    pub fn orthonormal_structure(&self) -> Tensor3 {
        let s = self.coeffs.map(f64::sqrt);
        let mut out = [[[0.0; 3]; 3]; 3];
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    out[k][i][j] = self.structure_constants[k][i][j] * s[k] / (s[i] * s[j]);
                }
            }
        }
        out
    }

    /// `connection[i][j][k] = <nabla_{E_i} E_j, E_k>`.
    pub fn connection(&self) -> Tensor3 {
        let c = self.orthonormal_structure();
        let mut g = [[[0.0; 3]; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    g[i][j][k] = 0.5 * (c[k][i][j] - c[i][j][k] + c[j][k][i]);
                }
            }
        }
        g
    }

    /// `riem[a][b][c][d] = <R(E_a, E_b) E_c, E_d>` with
    /// `R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]`.
    pub fn riemann(&self) -> Tensor4 {
        let c = self.orthonormal_structure();
        let gm = self.connection();
        let mut r = [[[[0.0; 3]; 3]; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                for cc in 0..3 {
                    for d in 0..3 {
                        let mut v = 0.0;
                        for e in 0..3 {
                            v += gm[b][cc][e] * gm[a][e][d] - gm[a][cc][e] * gm[b][e][d] - c[e][a][b] * gm[e][cc][d];
                        }
                        r[a][b][cc][d] = v;
                    }
                }
            }
        }
        r
    }

    /// Ricci tensor in the orthonormal frame.
    pub fn ricci_orthonormal(&self) -> Mat3 {
        let r = self.riemann();
        let mut ric = [[0.0; 3]; 3];
        for b in 0..3 {
            for c in 0..3 {
                ric[b][c] = (0..3).map(|a| r[a][b][c][a]).sum();
            }
        }
        ric
    }

    /// Rough Laplacian of a left-invariant symmetric tensor given in the orthonormal frame.
    pub fn rough_laplacian(&self, t: &Mat3) -> Mat3 {
        let gm = self.connection();
        // (nabla_a T)_bc
        let mut dt = [[[0.0; 3]; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    dt[a][b][c] = -(0..3).map(|d| gm[a][b][d] * t[d][c] + gm[a][c][d] * t[b][d]).sum::<f64>();
                }
            }
        }
        let mut out = [[0.0; 3]; 3];
        for b in 0..3 {
            for c in 0..3 {
                let mut v = 0.0;
                for a in 0..3 {
                    for d in 0..3 {
                        v -= gm[a][a][d] * dt[d][b][c] + gm[a][b][d] * dt[a][d][c] + gm[a][c][d] * dt[a][b][d];
                    }
                }
                out[b][c] = v;
            }
        }
        out
    }

    /// Blocks of the scalar Laplacian on the spin-`j2/2` representation of
    /// the compact group. Every eigenvalue of the Laplacian on functions
    /// appears in one of these blocks.
    pub fn laplacian_block(&self, j2: usize) -> Result<DMatrix<f64>> {
        if !self.is_compact() {
            return Err(Error::UnsupportedGeometry("spectrum requires the compact group".into()));
        }
        let l = self.milnor_constants().map(f64::abs);
        let kappa2 = [l[1] * l[2], l[0] * l[2], l[0] * l[1]];
        let d = j2 + 1;
        let j = j2 as f64 / 2.0;
        let mut jp = DMatrix::<f64>::zeros(d, d);
        let mut j3 = DMatrix::<f64>::zeros(d, d);
        for r in 0..d {
            let mm = j - r as f64;
            j3[(r, r)] = mm;
            if r > 0 {
                // J+ |m> = sqrt(j(j+1) - m(m+1)) |m+1>, row r-1 holds m+1
                jp[(r - 1, r)] = (j * (j + 1.0) - mm * (mm + 1.0)).sqrt();
            }
        }
        let jm = jp.transpose();
        let pp = &jp * &jp;
        let mm = &jm * &jm;
        let pm = &jp * &jm;
        let mp = &jm * &jp;
        let j1sq = (&pp + &mm + &pm + &mp) * 0.25;
        let j2sq = (&pm + &mp - &pp - &mm) * 0.25;
        let j3sq = &j3 * &j3;
        let g = self.coeffs;
        Ok(-(j1sq * (kappa2[0] / g[0]) + j2sq * (kappa2[1] / g[1]) + j3sq * (kappa2[2] / g[2])))
    }
}

/// Curvature of a left-invariant metric; `Ric` is stored as `Ric(e_i, e_i)`.
pub fn curvature_homogeneous(g: &HomogeneousMetric, s0: f64) -> Result<CurvatureData> {
    let ric = g.ricci_orthonormal();
    let off = ric[0][1].abs().max(ric[0][2].abs()).max(ric[1][2].abs());
    let diag = ric[0][0].abs().max(ric[1][1].abs()).max(ric[2][2].abs());
    if off > 1e-12 * (1.0 + diag) {
        return Err(Error::UnsupportedGeometry("Ricci tensor is not diagonal in the frame".into()));
    }
    let comps = Components::Frame([0, 1, 2].map(|i| ric[i][i] * g.coeffs[i]));
    CurvatureData::from_ricci(comps, &Metric::Homogeneous(g.clone()), s0)
}
