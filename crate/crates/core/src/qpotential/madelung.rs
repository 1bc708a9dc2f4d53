use crate::error::{invalid, Result};
use crate::fields::{gradient, laplacian, phase_gradient, phase_slips, ComplexField, Grid, RealField};

/// Default relative node threshold: cells with P < ε·max P are masked.
pub const DEFAULT_NODE_EPSILON: f64 = 1e-8;

/// ψ = R e^{iS/ħ} split into amplitude, density and phase gradient.
#[derive(Debug, Clone)]
pub struct MadelungDecomposition {
    pub r: RealField,
    pub p: RealField,
    /// ∇S per axis (momentum units), zero on masked cells.
    pub s_gradient: Vec<RealField>,
    /// P < ε·max P, plus cells beside a sign flip of ψ between samples.
    pub node_mask: Vec<bool>,
    pub hbar: f64,
}

pub fn node_mask(p: &RealField, eps_node: f64) -> Vec<bool> {
    let max = p.values().iter().cloned().fold(0.0, f64::max);
    p.values().iter().map(|&v| v < eps_node * max).collect()
}

/// Madelung decomposition of ψ (renormalized to unit norm first).
pub fn decompose(psi: &ComplexField, hbar: f64, eps_node: f64) -> Result<MadelungDecomposition> {
    psi.ensure_finite()?;
    if psi.values().iter().all(|z| z.norm_sqr() == 0.0) {
        return Err(invalid("wavefunction is identically zero"));
    }
    let psi = psi.normalized()?;
    let p = psi.density().with_label("P");
    let mask: Vec<bool> = node_mask(&p, eps_node).into_iter().zip(phase_slips(&psi)).map(|(a, b)| a || b).collect();
    let r = psi.map(|z| z.norm()).with_label("R").with_mask(Some(mask.clone()));
    let s_gradient = phase_gradient(&psi)?
        .into_iter()
        .map(|g| {
            let mut g = g.scaled(hbar).with_label("gradS").with_mask(Some(mask.clone()));
            for (v, &m) in g.values_mut().iter_mut().zip(&mask) {
                if m {
                    *v = 0.0;
                }
            }
            g
        })
        .collect();
    Ok(MadelungDecomposition { p: p.with_mask(Some(mask.clone())), r, s_gradient, node_mask: mask, hbar })
}

/// Pointwise derivative data of a density: P, ∇P, ∇²P and ∇²R/R (R = √P),
/// either finite-differenced from sampled fields or supplied analytically.
#[derive(Debug, Clone)]
pub struct DensityJet {
    pub grid: Grid,
    pub p: Vec<f64>,
    pub grad_p: Vec<Vec<f64>>,
    pub lap_p: Vec<f64>,
    pub lap_r_over_r: Vec<f64>,
    pub mask: Vec<bool>,
}

impl DensityJet {
    /// Finite-difference jet from a decomposition; ∇²R/R uses the R field itself.
    pub fn from_decomposition(dec: &MadelungDecomposition) -> Result<Self> {
        let grid = dec.p.grid().clone();
        let grad_p = gradient(&dec.p)?.into_iter().map(|g| g.into_values()).collect();
        let lap_p = laplacian(&dec.p)?.into_values();
        let lap_r = laplacian(&dec.r)?;
        let lap_r_over_r = lap_r
            .values()
            .iter()
            .zip(dec.r.values())
            .zip(&dec.node_mask)
            .map(|((l, r), &m)| if m { 0.0 } else { l / r })
            .collect();
        Ok(DensityJet { grid, p: dec.p.values().to_vec(), grad_p, lap_p, lap_r_over_r, mask: dec.node_mask.clone() })
    }

    /// Finite-difference jet of a sampled density.
    pub fn from_density(p: &RealField, eps_node: f64) -> Result<Self> {
        p.ensure_finite()?;
        if p.values().iter().any(|&v| v < 0.0) {
            return Err(invalid("density has negative samples"));
        }
        let mask = node_mask(p, eps_node);
        let r = p.map(f64::sqrt).with_mask(Some(mask.clone()));
        let dec = MadelungDecomposition {
            p: p.clone().with_mask(Some(mask.clone())),
            r,
            s_gradient: Vec::new(),
            node_mask: mask,
            hbar: 1.0,
        };
        DensityJet::from_decomposition(&dec)
    }

    /// Jet from closed-form values. `f` returns `(P, ∇P, ∇²P)` at a point;
    /// ∇²R/R follows from `P''/2P - |∇P/P|²/4`.
    pub fn analytic(grid: &Grid, eps_node: f64, f: impl Fn([f64; 2]) -> (f64, [f64; 2], f64)) -> Self {
        let n = grid.len();
        let dim = grid.dim();
        let mut p = Vec::with_capacity(n);
        let mut grad_p = vec![Vec::with_capacity(n); dim];
        let mut lap_p = Vec::with_capacity(n);
        for i in 0..n {
            let (v, g, l) = f(grid.point(i));
            p.push(v);
            for (a, gp) in grad_p.iter_mut().enumerate() {
                gp.push(g[a]);
            }
            lap_p.push(l);
        }
        let max = p.iter().cloned().fold(0.0, f64::max);
        let mask: Vec<bool> = p.iter().map(|&v| v < eps_node * max).collect();
        let lap_r_over_r = (0..n)
            .map(|i| {
                if mask[i] {
                    return 0.0;
                }
                let g2: f64 = grad_p.iter().map(|g| (g[i] / p[i]).powi(2)).sum();
                0.5 * lap_p[i] / p[i] - 0.25 * g2
            })
            .collect();
        DensityJet { grid: grid.clone(), p, grad_p, lap_p, lap_r_over_r, mask }
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    /// |∇P/P|² at cell i (0 on masked cells).
    pub fn log_grad_sq(&self, i: usize) -> f64 {
        if self.mask[i] {
            return 0.0;
        }
        self.grad_p.iter().map(|g| (g[i] / self.p[i]).powi(2)).sum()
    }

    pub fn field(&self, values: Vec<f64>, label: &str) -> RealField {
        RealField::new(self.grid.clone(), values)
            .expect("jet grid")
            .with_label(label)
            .with_mask(Some(self.mask.clone()))
    }
}

/// Jet of a free Gaussian density with mean `mu` and standard deviation `s`.
pub fn gaussian_density_jet(grid: &Grid, mu: f64, s: f64, eps_node: f64) -> DensityJet {
    let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * s);
    DensityJet::analytic(grid, eps_node, |pt| {
        let z = (pt[0] - mu) / s;
        let p = norm * (-0.5 * z * z).exp();
        (p, [-z / s * p, 0.0], (z * z - 1.0) / (s * s) * p)
    })
}

/// Jet of the box-mode density P = (2/L) sin²(nπx/L).
pub fn box_density_jet(grid: &Grid, length: f64, n: u32, eps_node: f64) -> DensityJet {
    let k = n as f64 * std::f64::consts::PI / length;
    let a = 2.0 / length;
    DensityJet::analytic(grid, eps_node, |pt| {
        let (s, c) = (k * pt[0]).sin_cos();
        (a * s * s, [2.0 * a * k * s * c, 0.0], 2.0 * a * k * k * (c * c - s * s))
    })
}

/// Mask grown by `cells` in every direction (index space), with the grid
/// edges treated as masked out to `margin` cells.
pub fn clearance_mask(grid: &Grid, mask: &[bool], cells: usize, margin: usize) -> Vec<bool> {
    let n = grid.len();
    let mut out = vec![false; n];
    let dims: Vec<usize> = grid.axes().iter().map(|a| a.points).collect();
    for i in 0..n {
        if grid.cells_from_edge(i) < margin {
            out[i] = true;
        }
        if !mask[i] {
            continue;
        }
        let [ix, iy] = grid.unravel(i);
        let xs = ix.saturating_sub(cells)..=(ix + cells).min(dims[0] - 1);
        for jx in xs {
            if grid.dim() == 1 {
                out[jx] = true;
            } else {
                for jy in iy.saturating_sub(cells)..=(iy + cells).min(dims[1] - 1) {
                    out[grid.ravel(jx, jy)] = true;
                }
            }
        }
    }
    out
}
