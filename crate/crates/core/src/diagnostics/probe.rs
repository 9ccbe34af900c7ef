use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{flow_rhs, FlowKind};
use crate::geometry::tensor::Metric;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub n_dof: usize,
    /// Real parts of all eigenvalues, ascending.
    pub real_parts: Vec<f64>,
    /// The `n_modes` most negative real parts.
    pub leading: Vec<f64>,
    pub most_negative: f64,
    pub max_real: f64,
    pub max_imag: f64,
    pub all_real: bool,
}

/// Dense central-difference Jacobian of the DeTurck flow right-hand side.
pub fn fd_jacobian_matrix(g: &Metric, s0: f64, g_ref: Option<&Metric>, step: f64) -> Result<DMatrix<f64>> {
    let reference = match (g, g_ref) {
        (Metric::Radial(_), Some(Metric::Radial(r))) => Some(r.clone()),
        (Metric::Radial(r), None) => Some(crate::geometry::RadialMetric::euclidean(r.grid.clone())),
        (Metric::Radial(_), Some(_)) => {
            return Err(Error::IncompatibleReference("reference must be radial".into()));
        }
        _ => None,
    };
    let y0 = g.components();
    let y = y0.to_vec();
    let n = y.len();
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let e = step * y[j].abs().max(1.0);
        let mut yp = y.clone();
        let mut ym = y.clone();
        yp[j] += e;
        ym[j] -= e;
        let fp = flow_rhs(&g.with_components(&y0.from_flat(&yp))?, FlowKind::Dtcrf, s0, reference.as_ref())?.to_vec();
        let fm = flow_rhs(&g.with_components(&y0.from_flat(&ym))?, FlowKind::Dtcrf, s0, reference.as_ref())?.to_vec();
        for i in 0..n {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * e);
        }
    }
    Ok(jac)
}

/// Spectrum of the linearized DeTurck conformal Ricci flow at `g`.
pub fn fd_jacobian_probe(g: &Metric, s0: f64, g_ref: Option<&Metric>, n_modes: usize) -> Result<SpectrumReport> {
    let jac = fd_jacobian_matrix(g, s0, g_ref, 1e-6)?;
    let n = jac.nrows();
    let eig = jac.complex_eigenvalues();
    let mut real_parts: Vec<f64> = eig.iter().map(|z| z.re).collect();
    if real_parts.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericalBreakdown("non-finite Jacobian spectrum".into()));
    }
    real_parts.sort_by(f64::total_cmp);
    let max_imag = eig.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let scale = real_parts.iter().map(|x| x.abs()).fold(0.0, f64::max);
    Ok(SpectrumReport {
        n_dof: n,
        leading: real_parts.iter().take(n_modes).cloned().collect(),
        most_negative: real_parts[0],
        max_real: real_parts[n - 1],
        max_imag,
        all_real: max_imag <= 1e-6 * scale.max(1.0),
        real_parts,
    })
}
