//! Nyström coarse-graining of the time kernel on `[-l, l]` and its eigenanalysis.
//!
//! `M_kl = w_l K(q_k, q_l)` is similar to the Hermitian `G = W^{1/2} K W^{1/2}`,
//! so the spectrum comes from a dense Hermitian solve. On a mirror-symmetric
//! grid `G` commutes with parity and splits into an even block (non-nodal
//! modes) and an odd block (nodal modes, exactly zero at `q = 0`).
//!
//! The plain rule handles the Cauchy singularity of `K` poorly: its discrete
//! Hilbert symbol is biased low and the top of the spectrum converges like
//! `n^{-1/2}`. [`NystromRule::AlternatingPoint`] keeps only node pairs with
//! odd index offset and doubles their weight. For Cauchy kernels this is the
//! classical odd/even rule and converges much faster. Its eigenvectors are
//! staggered between the two index sub-grids, so modes store collocated
//! samples that add the spline of the opposite sub-grid at each node.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::grid::QuadratureGrid;
use crate::interp::ComplexSpline;
use crate::kernel::time_kernel;
use crate::{Error, PhysicalParams, Result};

/// Default center-magnitude threshold below which a mode counts as nodal.
pub const DEFAULT_CLASSIFICATION_THRESHOLD: f64 = 1e-9;

const TIE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NystromRule {
    /// `M_kl = w_l K(q_k, q_l)`.
    Plain,
    /// `M_kl = 2 w_l K(q_k, q_l)` for odd `k - l`, zero otherwise.
    #[default]
    AlternatingPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParityClass {
    NonNodal,
    Nodal,
}

/// Which parity block a mode came from when the solve was split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockParity {
    Even,
    Odd,
}

/// A discretized kernel together with how it was built.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    pub matrix: DMatrix<Complex64>,
    pub rule: NystromRule,
    pub params: PhysicalParams,
}

/// Nyström matrix `M` (not Hermitian unless the weights are equal).
pub fn build_kernel_matrix(grid: &QuadratureGrid, params: &PhysicalParams, rule: NystromRule) -> KernelMatrix {
    let q = grid.nodes();
    let w = grid.weights();
    let n = q.len();
    let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for k in 0..n {
        for l in k + 1..n {
            let factor = match rule {
                NystromRule::Plain => 1.0,
                NystromRule::AlternatingPoint if (l - k) % 2 == 1 => 2.0,
                NystromRule::AlternatingPoint => continue,
            };
            let kv = time_kernel(q[k], q[l], params).value();
            m[(k, l)] = kv * (factor * w[l]);
            // K(q_l, q_k) = -K(q_k, q_l)
            m[(l, k)] = -kv * (factor * w[k]);
        }
    }
    KernelMatrix {
        matrix: m,
        rule,
        params: *params,
    }
}

/// `G = diag(√w) M diag(1/√w)`, Hermitian and similar to `M`.
pub fn symmetrize(m: &KernelMatrix, weights: &[f64]) -> Result<KernelMatrix> {
    let n = m.matrix.nrows();
    if weights.len() != n || m.matrix.ncols() != n {
        return Err(Error::Grid("weights do not match the matrix dimension".into()));
    }
    let sw: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let mut g = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for k in 0..n {
        for l in k..n {
            let a = m.matrix[(k, l)] * (sw[k] / sw[l]);
            let b = m.matrix[(l, k)] * (sw[l] / sw[k]);
            // average the two similarity images so that G = G† holds exactly
            let v = (a + b.conj()) * 0.5;
            g[(k, l)] = v;
            g[(l, k)] = v.conj();
        }
    }
    Ok(KernelMatrix {
        matrix: g,
        rule: m.rule,
        params: m.params,
    })
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone)]
pub struct EigenMode {
    pub tau: f64,
    /// Node samples of the eigenfunction, `Σ w_k |v_k|² = 1`.
    pub vector: Vec<Complex64>,
    pub parity_class: ParityClass,
    /// `|v(0)| / max_k |v_k|`.
    pub center_magnitude: f64,
    /// Eigenvector of `G` itself (unit Euclidean norm), phase-aligned with `vector`.
    pub raw: Vec<Complex64>,
    pub block: Option<BlockParity>,
}

#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub grid: QuadratureGrid,
    pub modes: Vec<EigenMode>,
    pub params: PhysicalParams,
    pub rule: NystromRule,
}

fn hermitian_eigen(block: DMatrix<Complex64>) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let dim = block.nrows();
    let norm = max_abs(&block);
    let eig = block
        .try_symmetric_eigen(f64::EPSILON, 10_000 + 100 * dim)
        .ok_or_else(|| Error::Eigen {
            dim,
            norm,
            reason: "QR iteration on the tridiagonal form did not converge".to_string(),
        })?;
    Ok((eig.eigenvalues.iter().copied().collect(), eig.eigenvectors))
}

/// Full eigendecomposition of a Hermitian kernel matrix.
pub fn eigensolve(g: &KernelMatrix, grid: &QuadratureGrid) -> Result<EigenSystem> {
    let gm = &g.matrix;
    let n = gm.nrows();
    if n != grid.len() || gm.ncols() != n {
        return Err(Error::Grid("matrix dimension does not match the grid".into()));
    }
    let norm = max_abs(gm);
    let herm_err = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (gm[(i, j)] - gm[(j, i)].conj()).norm())
        .fold(0.0, f64::max);
    if herm_err > 1e-12 * norm {
        return Err(Error::Grid(alloc::format!(
            "matrix is not Hermitian: max |G - G†| = {herm_err:e}"
        )));
    }

    let mut pairs: Vec<(f64, Vec<Complex64>, Option<BlockParity>)> = Vec::with_capacity(n);
    match mirror_center(gm, grid, norm) {
        Some(c) => {
            let h = c; // number of mirrored pairs
            let r2 = core::f64::consts::FRAC_1_SQRT_2;
            let mut even = DMatrix::from_element(h + 1, h + 1, Complex64::new(0.0, 0.0));
            let mut odd = DMatrix::from_element(h, h, Complex64::new(0.0, 0.0));
            even[(0, 0)] = gm[(c, c)];
            for j in 1..=h {
                let v = (gm[(c, c + j)] + gm[(c, c - j)]) * r2;
                even[(0, j)] = v;
                even[(j, 0)] = v.conj();
            }
            for i in 1..=h {
                for j in 1..=h {
                    let pp = gm[(c + i, c + j)];
                    let pm = gm[(c + i, c - j)];
                    let mp = gm[(c - i, c + j)];
                    let mm = gm[(c - i, c - j)];
                    even[(i, j)] = (pp + pm + mp + mm) * 0.5;
                    odd[(i - 1, j - 1)] = (pp - pm - mp + mm) * 0.5;
                }
            }
            let (ev, evec) = hermitian_eigen(even)?;
            for (m, tau) in ev.iter().enumerate() {
                let mut raw = vec![Complex64::new(0.0, 0.0); n];
                raw[c] = evec[(0, m)];
                for j in 1..=h {
                    let v = evec[(j, m)] * r2;
                    raw[c + j] = v;
                    raw[c - j] = v;
                }
                pairs.push((*tau, raw, Some(BlockParity::Even)));
            }
            let (ov, ovec) = hermitian_eigen(odd)?;
            for (m, tau) in ov.iter().enumerate() {
                let mut raw = vec![Complex64::new(0.0, 0.0); n];
                for j in 1..=h {
                    let v = ovec[(j - 1, m)] * r2;
                    raw[c + j] = v;
                    raw[c - j] = -v;
                }
                pairs.push((*tau, raw, Some(BlockParity::Odd)));
            }
        }
        None => {
            let (ev, evec) = hermitian_eigen(gm.clone())?;
            for (m, tau) in ev.iter().enumerate() {
                let raw: Vec<Complex64> = (0..n).map(|i| evec[(i, m)]).collect();
                pairs.push((*tau, raw, None));
            }
        }
    }

    let sw: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
    let center = grid.center_index();
    let mut modes = Vec::with_capacity(n);
    for (tau, mut raw, block) in pairs {
        let v: Vec<Complex64> = raw.iter().zip(&sw).map(|(g, s)| g / s).collect();
        let mut u = match g.rule {
            NystromRule::Plain => v,
            NystromRule::AlternatingPoint => collocate(grid.nodes(), &v)?,
        };
        // unit weighted norm, then largest component real positive
        let norm2: f64 = u.iter().zip(grid.weights()).map(|(x, w)| w * x.norm_sqr()).sum();
        let vmax = u
            .iter()
            .copied()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap_or(Complex64::new(1.0, 0.0));
        let phase = if vmax.norm() > 0.0 {
            vmax.conj() / vmax.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let scale = phase / norm2.sqrt();
        for x in u.iter_mut() {
            *x *= scale;
        }
        for x in raw.iter_mut() {
            *x *= phase;
        }
        let peak = u.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let center_magnitude = match center {
            Some(c) if peak > 0.0 => u[c].norm() / peak,
            _ => f64::NAN,
        };
        modes.push(EigenMode {
            tau,
            vector: u,
            parity_class: ParityClass::NonNodal,
            center_magnitude,
            raw,
            block,
        });
    }
    let system = EigenSystem {
        grid: grid.clone(),
        modes,
        params: g.params,
        rule: g.rule,
    };
    if center.is_some() {
        classify_modes(system, DEFAULT_CLASSIFICATION_THRESHOLD)
    } else {
        let mut s = system;
        sort_modes(&mut s.modes);
        Ok(s)
    }
}

// Center index when both the grid and G are exactly mirror-symmetric.
fn mirror_center(g: &DMatrix<Complex64>, grid: &QuadratureGrid, norm: f64) -> Option<usize> {
    let c = grid.center_index()?;
    if !grid.is_mirror_symmetric() {
        return None;
    }
    let n = grid.len();
    let tol = 1e-13 * norm;
    for i in 0..n {
        for j in 0..n {
            if (g[(i, j)] - g[(n - 1 - i, n - 1 - j)]).norm() > tol {
                return None;
            }
        }
    }
    Some(c)
}

/// Adds, at every node, the spline of the opposite index-parity sub-grid.
fn collocate(q: &[f64], v: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = q.len();
    if n < 4 {
        return Ok(v.to_vec());
    }
    let mut out = v.to_vec();
    for parity in 0..2 {
        let xs: Vec<f64> = (parity..n).step_by(2).map(|i| q[i]).collect();
        let ys: Vec<Complex64> = (parity..n).step_by(2).map(|i| v[i]).collect();
        let s = ComplexSpline::new(&xs, &ys)?;
        for i in (1 - parity..n).step_by(2) {
            out[i] += s.eval(q[i]);
        }
    }
    Ok(out)
}

fn sort_modes(modes: &mut [EigenMode]) {
    modes.sort_by(|a, b| a.tau.total_cmp(&b.tau));
    // within ties, non-nodal first
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..modes.len().saturating_sub(1) {
            if (modes[i].tau - modes[i + 1].tau).abs() < TIE_TOLERANCE
                && modes[i].parity_class == ParityClass::Nodal
                && modes[i + 1].parity_class == ParityClass::NonNodal
            {
                modes.swap(i, i + 1);
                changed = true;
            }
        }
    }
}

/// Tag each mode nodal when `|v(0)| / max|v|` falls below `threshold`.
pub fn classify_modes(mut system: EigenSystem, threshold: f64) -> Result<EigenSystem> {
    if !(threshold > 0.0 && threshold < 0.5) {
        return Err(Error::domain("threshold", threshold, "0 < threshold < 0.5"));
    }
    let c = system
        .grid
        .center_index()
        .ok_or_else(|| Error::Grid("classification needs a node at q = 0".into()))?;
    for m in system.modes.iter_mut() {
        let peak = m.vector.iter().map(|x| x.norm()).fold(0.0, f64::max);
        m.center_magnitude = if peak > 0.0 { m.vector[c].norm() / peak } else { 0.0 };
        m.parity_class = if m.center_magnitude < threshold {
            ParityClass::Nodal
        } else {
            ParityClass::NonNodal
        };
    }
    sort_modes(&mut system.modes);
    Ok(system)
}

/// Convenience pipeline: grid → matrix → Hermitian form → eigensystem.
pub fn solve_box(grid: &QuadratureGrid, params: &PhysicalParams, rule: NystromRule) -> Result<EigenSystem> {
    let m = build_kernel_matrix(grid, params, rule);
    let g = symmetrize(&m, grid.weights())?;
    eigensolve(&g, grid)
}

impl EigenSystem {
    pub fn spectral_radius(&self) -> f64 {
        self.modes.iter().map(|m| m.tau.abs()).fold(0.0, f64::max)
    }

    /// Index of the mode whose eigenvalue is closest to `tau`, optionally restricted to a class.
    pub fn nearest(&self, tau: f64, class: Option<ParityClass>) -> Option<usize> {
        self.modes
            .iter()
            .enumerate()
            .filter(|(_, m)| class.is_none_or(|c| m.parity_class == c))
            .min_by(|a, b| (a.1.tau - tau).abs().total_cmp(&(b.1.tau - tau).abs()))
            .map(|(i, _)| i)
    }

    pub fn interpolant(&self, index: usize, method: InterpolationMethod) -> Result<EigenfunctionInterpolant<'_>> {
        let mode = self
            .modes
            .get(index)
            .ok_or_else(|| Error::Grid(alloc::format!("no mode with index {index}")))?;
        let floor = 1e-8 * self.spectral_radius();
        let nystrom_ok = self.rule == NystromRule::Plain && mode.tau.abs() > floor;
        let chosen = match method {
            InterpolationMethod::Auto if nystrom_ok => InterpolationMethod::NystromExtension,
            InterpolationMethod::Auto => InterpolationMethod::Spline,
            InterpolationMethod::NystromExtension if !nystrom_ok => {
                return Err(Error::Grid(
                    "Nyström extension needs the plain rule and |tau| above the floor".into(),
                ))
            }
            m => m,
        };
        let spline = ComplexSpline::new(self.grid.nodes(), &mode.vector)?;
        Ok(EigenfunctionInterpolant {
            system: self,
            mode,
            method: chosen,
            spline,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterpolationMethod {
    /// Nyström extension when available, spline otherwise.
    Auto,
    Spline,
    /// `(1/τ) Σ_l w_l K(q, q_l) v_l`.
    NystromExtension,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interpolated {
    pub value: Complex64,
    pub method: InterpolationMethod,
}

/// Off-node evaluation of one eigenmode.
pub struct EigenfunctionInterpolant<'a> {
    system: &'a EigenSystem,
    mode: &'a EigenMode,
    method: InterpolationMethod,
    spline: ComplexSpline,
}

impl EigenfunctionInterpolant<'_> {
    pub fn method(&self) -> InterpolationMethod {
        self.method
    }

    pub fn eval(&self, q: f64) -> Result<Complex64> {
        let l = self.system.grid.half_length();
        if !(q.abs() <= l) {
            return Err(Error::domain("q", q, "inside the box [-l, l]"));
        }
        Ok(match self.method {
            InterpolationMethod::NystromExtension => {
                let g = &self.system.grid;
                let mut acc = Complex64::new(0.0, 0.0);
                for ((ql, wl), vl) in g.nodes().iter().zip(g.weights()).zip(&self.mode.vector) {
                    acc += time_kernel(q, *ql, &self.system.params).value() * (*vl * *wl);
                }
                acc / self.mode.tau
            }
            _ => self.spline.eval(q),
        })
    }
}

/// Value of mode `index` at `q`, with the method that produced it.
pub fn interpolate_eigenfunction(system: &EigenSystem, index: usize, q: f64) -> Result<Interpolated> {
    let it = system.interpolant(index, InterpolationMethod::Auto)?;
    Ok(Interpolated {
        value: it.eval(q)?,
        method: it.method(),
    })
}
