//! Dense complex linear algebra for small Hilbert spaces, time-ordered
//! propagation and fidelity metrics.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Dense complex matrix used for operators and unitaries.
pub type CMat = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Largest Hilbert-space dimension the dense routines accept.
pub const DIM_CAP: usize = 64;

pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

pub fn sigma_x() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn sigma_y() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn sigma_z() -> CMat {
    CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// Raising operator |1⟩⟨0| on a two-level system.
pub fn sigma_plus() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, ZERO, ONE, ZERO])
}

pub fn sigma_minus() -> CMat {
    sigma_plus().adjoint()
}

/// Bosonic lowering operator truncated to `levels` levels: ⟨n−1|a|n⟩ = √n.
pub fn lowering(levels: usize) -> CMat {
    let mut a = CMat::zeros(levels, levels);
    for n in 1..levels {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Number operator a†a.
pub fn number(levels: usize) -> CMat {
    let mut n = CMat::zeros(levels, levels);
    for k in 0..levels {
        n[(k, k)] = C64::new(k as f64, 0.0);
    }
    n
}

/// Kronecker product a ⊗ b.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Max-norm of the difference, ‖A − B‖_max.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// ‖A − A†‖_max.
pub fn hermiticity_defect(a: &CMat) -> f64 {
    max_abs_diff(a, &a.adjoint())
}

/// ‖U†U − I‖_max.
pub fn unitarity_defect(u: &CMat) -> f64 {
    let uu = u.adjoint() * u;
    max_abs_diff(&uu, &identity(u.nrows()))
}

/// An operator with validated structure flags.
#[derive(Debug, Clone)]
pub struct Operator {
    mat: CMat,
}

impl Operator {
    /// Wraps a matrix after checking hermiticity to 1e−12.
    pub fn hermitian(mat: CMat) -> Result<Self> {
        let d = hermiticity_defect(&mat);
        if d >= 1e-12 {
            return Err(Error::Contract(format!(
                "operator flagged hermitian has ‖A−A†‖_max = {d:.3e}"
            )));
        }
        Ok(Self { mat })
    }

    /// Wraps a matrix after checking unitarity to 1e−9.
    pub fn unitary(mat: CMat) -> Result<Self> {
        let d = unitarity_defect(&mat);
        if d >= 1e-9 {
            return Err(Error::Contract(format!(
                "operator flagged unitary has ‖U†U−I‖_max = {d:.3e}"
            )));
        }
        Ok(Self { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }
}

/// Uniform time grid over [t0, t0 + duration].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub duration: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, duration: f64, n_steps: usize) -> Result<Self> {
        if !(duration > 0.0) || !duration.is_finite() {
            return Err(Error::Argument(format!("duration {duration} must be positive")));
        }
        if n_steps < 2 {
            return Err(Error::Argument(format!("n_steps {n_steps} must be ≥ 2")));
        }
        Ok(Self { t0, duration, n_steps })
    }

    pub fn from_duration(duration: f64, n_steps: usize) -> Result<Self> {
        Self::new(0.0, duration, n_steps)
    }

    pub fn dt(&self) -> f64 {
        self.duration / self.n_steps as f64
    }

    /// Grid points t0, t0+dt, …, t0+T (n_steps + 1 values).
    pub fn points(&self) -> Vec<f64> {
        let dt = self.dt();
        (0..=self.n_steps).map(|k| self.t0 + k as f64 * dt).collect()
    }

    /// Midpoints of each step.
    pub fn midpoints(&self) -> Vec<f64> {
        let dt = self.dt();
        (0..self.n_steps)
            .map(|k| self.t0 + (k as f64 + 0.5) * dt)
            .collect()
    }
}

/// Result of time-ordered propagation: the unitary at every grid point.
#[derive(Debug, Clone)]
pub struct Propagation {
    pub grid: TimeGrid,
    pub unitaries: Vec<CMat>,
}

impl Propagation {
    pub fn final_unitary(&self) -> &CMat {
        self.unitaries.last().expect("propagation has at least the initial point")
    }
}

/// exp(−i H dt) for hermitian H, by eigendecomposition (2×2 analytically).
pub fn expm_hermitian(h: &CMat, dt: f64) -> Result<CMat> {
    if !dt.is_finite() {
        return Err(Error::Argument(format!("dt = {dt} is not finite")));
    }
    let defect = hermiticity_defect(h);
    if defect >= 1e-10 {
        return Err(Error::Contract(format!(
            "expm_hermitian needs hermitian input, ‖H−H†‖_max = {defect:.3e}"
        )));
    }
    Ok(expm_hermitian_unchecked(h, dt))
}

/// Same as [`expm_hermitian`] without the hermiticity check (hot path).
pub fn expm_hermitian_unchecked(h: &CMat, dt: f64) -> CMat {
    let n = h.nrows();
    if n == 2 {
        return expm2(h, dt);
    }
    let eig = h.clone().symmetric_eigen();
    // U = V e^{-i λ dt} V†, assembled column-wise
    let mut scaled = eig.eigenvectors.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        let phase = C64::from_polar(1.0, -eig.eigenvalues[j] * dt);
        for x in col.iter_mut() {
            *x *= phase;
        }
    }
    scaled * eig.eigenvectors.adjoint()
}

/// Closed-form exp(−i H dt) for hermitian 2×2: H = c0·I + v⃗·σ⃗.
fn expm2(h: &CMat, dt: f64) -> CMat {
    let c0 = 0.5 * (h[(0, 0)].re + h[(1, 1)].re);
    let vz = 0.5 * (h[(0, 0)].re - h[(1, 1)].re);
    let vx = h[(0, 1)].re;
    let vy = -h[(0, 1)].im;
    let v = (vx * vx + vy * vy + vz * vz).sqrt();
    let global = C64::from_polar(1.0, -c0 * dt);
    if v * dt.abs() < 1e-300 {
        return CMat::from_row_slice(2, 2, &[global, ZERO, ZERO, global]);
    }
    let (s, c) = (v * dt).sin_cos();
    let (nx, ny, nz) = (vx / v, vy / v, vz / v);
    let a = global * C64::new(c, -s * nz);
    let d = global * C64::new(c, s * nz);
    let b01 = global * (-I) * C64::new(nx, -ny) * s;
    let b10 = global * (-I) * C64::new(nx, ny) * s;
    CMat::from_row_slice(2, 2, &[a, b01, b10, d])
}

fn check_nan(h: &CMat, t: f64) -> Result<()> {
    for z in h.iter() {
        if z.re.is_nan() || z.im.is_nan() {
            return Err(Error::Propagation(format!(
                "Hamiltonian sample contains NaN at t = {t} ns"
            )));
        }
    }
    Ok(())
}

/// Time-ordered propagation of H(t) over `grid`, midpoint-sampled with exact
/// step exponentials. Stores the unitary at every grid point; use
/// [`propagate_final`] when only U(T) is needed.
pub fn propagate<F>(h_of_t: F, grid: &TimeGrid) -> Result<Propagation>
where
    F: Fn(f64) -> CMat,
{
    let dt = grid.dt();
    let mut unitaries = Vec::with_capacity(grid.n_steps + 1);
    let h0 = h_of_t(grid.t0);
    let dim = h0.nrows();
    let mut u = identity(dim);
    unitaries.push(u.clone());
    for k in 0..grid.n_steps {
        let t = grid.t0 + (k as f64 + 0.5) * dt;
        let h = h_of_t(t);
        check_nan(&h, t)?;
        u = expm_hermitian_unchecked(&h, dt) * u;
        unitaries.push(u.clone());
    }
    Ok(Propagation { grid: *grid, unitaries })
}

/// Final unitary U(t0+T) of the midpoint-sampled product formula.
pub fn propagate_final<F>(h_of_t: F, grid: &TimeGrid) -> Result<CMat>
where
    F: Fn(f64) -> CMat,
{
    let dt = grid.dt();
    let h0 = h_of_t(grid.t0);
    let dim = h0.nrows();
    let mut u = identity(dim);
    for k in 0..grid.n_steps {
        let t = grid.t0 + (k as f64 + 0.5) * dt;
        let h = h_of_t(t);
        check_nan(&h, t)?;
        u = expm_hermitian_unchecked(&h, dt) * u;
    }
    Ok(u)
}

/// How global phases may be factored out before taking the trace norm.
#[derive(Debug, Clone, PartialEq)]
pub enum PhaseFreedom {
    /// |Tr(V†U)|/d, no extra freedom.
    None,
    /// One free global phase per listed block; blocks index into the
    /// subspace list and must partition it.
    PerBlock(Vec<Vec<usize>>),
    /// Free Z-phase per qubit of a two-qubit computational subspace
    /// (subspace ordered |00⟩,|01⟩,|10⟩,|11⟩).
    TwoQubitZ,
}

fn block_trace(m: &CMat, block: &[usize]) -> C64 {
    block.iter().map(|&i| m[(i, i)]).sum()
}

/// Trace fidelity |Tr(P V†U P)|/d on a subspace, with optional phase freedom.
///
/// `u` is the full-space unitary; `target` acts on the subspace (d×d),
/// `subspace` lists the full-space indices forming the subspace rows.
pub fn trace_fidelity(
    u: &CMat,
    target: &CMat,
    subspace: &[usize],
    phase_freedom: &PhaseFreedom,
) -> Result<f64> {
    let d = subspace.len();
    if d < 2 {
        return Err(Error::Argument(format!(
            "subspace must have at least 2 states, got {d}"
        )));
    }
    if target.nrows() != d || target.ncols() != d {
        return Err(Error::Argument(format!(
            "target is {}×{} but subspace has {d} states",
            target.nrows(),
            target.ncols()
        )));
    }
    for &i in subspace {
        if i >= u.nrows() {
            return Err(Error::Argument(format!(
                "subspace index {i} out of range for dim {}",
                u.nrows()
            )));
        }
    }
    // m = V† (P U P) restricted to d×d
    let mut sub = CMat::zeros(d, d);
    for (r, &i) in subspace.iter().enumerate() {
        for (c, &j) in subspace.iter().enumerate() {
            sub[(r, c)] = u[(i, j)];
        }
    }
    let m = target.adjoint() * sub;
    let total = match phase_freedom {
        PhaseFreedom::None => block_trace(&m, &(0..d).collect::<Vec<_>>()).norm(),
        PhaseFreedom::PerBlock(blocks) => {
            let mut seen = vec![false; d];
            for b in blocks {
                for &i in b {
                    if i >= d || seen[i] {
                        return Err(Error::Argument(
                            "phase-freedom blocks must partition the subspace".into(),
                        ));
                    }
                    seen[i] = true;
                }
            }
            if seen.iter().any(|&s| !s) {
                return Err(Error::Argument(
                    "phase-freedom blocks must cover the subspace".into(),
                ));
            }
            blocks.iter().map(|b| block_trace(&m, b).norm()).sum()
        }
        PhaseFreedom::TwoQubitZ => {
            if d != 4 {
                return Err(Error::Argument(
                    "TwoQubitZ phase freedom needs a 4-state subspace".into(),
                ));
            }
            two_qubit_z_max(m[(0, 0)], m[(1, 1)], m[(2, 2)], m[(3, 3)])
        }
    };
    Ok((total / d as f64).min(1.0))
}

/// max over (φ1, φ2) of |a + b e^{−iφ2} + c e^{−iφ1} + d e^{−i(φ1+φ2)}|.
fn two_qubit_z_max(a: C64, b: C64, c: C64, d: C64) -> f64 {
    // for fixed φ1 the optimum over φ2 is |a + c z1| + |b + d z1|
    let g = |phi1: f64| -> f64 {
        let z1 = C64::from_polar(1.0, -phi1);
        (a + c * z1).norm() + (b + d * z1).norm()
    };
    let n_coarse = 256;
    let mut best_phi = 0.0;
    let mut best = f64::NEG_INFINITY;
    for k in 0..n_coarse {
        let phi = std::f64::consts::TAU * k as f64 / n_coarse as f64;
        let v = g(phi);
        if v > best {
            best = v;
            best_phi = phi;
        }
    }
    // golden-section refinement around the coarse optimum
    let mut lo = best_phi - std::f64::consts::TAU / n_coarse as f64;
    let mut hi = best_phi + std::f64::consts::TAU / n_coarse as f64;
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let m1 = hi - gr * (hi - lo);
        let m2 = lo + gr * (hi - lo);
        if g(m1) > g(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    g(0.5 * (lo + hi)).max(best)
}

/// Average gate fidelity (|M| + d)/(d(d+1)) convention with M the
/// phase-maximized trace-norm sum: F_avg = (M² + d)/(d(d+1)).
pub fn average_gate_fidelity(
    u: &CMat,
    target: &CMat,
    subspace: &[usize],
    phase_freedom: &PhaseFreedom,
) -> Result<f64> {
    let d = subspace.len() as f64;
    let f_tr = trace_fidelity(u, target, subspace, phase_freedom)?;
    let m = f_tr * d;
    Ok((m * m + d) / (d * (d + 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::mhz;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn expm_diagonal_sigma_z() {
        // H = σz·π/2, dt = 1 → diag(e^{−iπ/2}, e^{iπ/2})
        let h = sigma_z() * C64::new(FRAC_PI_2, 0.0);
        let u = expm_hermitian(&h, 1.0).unwrap();
        assert_abs_diff_eq!(u[(0, 0)].re, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(u[(0, 0)].im, -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(u[(1, 1)].im, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(u[(0, 1)].norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn expm_zero_is_identity() {
        let h = CMat::zeros(3, 3);
        let u = expm_hermitian(&h, 2.7).unwrap();
        assert!(max_abs_diff(&u, &identity(3)) < 1e-15);
    }

    #[test]
    fn expm_sigma_x_half_turn() {
        // exp(−i (π/2) σx) = −i σx
        let h = sigma_x() * C64::new(FRAC_PI_2, 0.0);
        let u = expm_hermitian(&h, 1.0).unwrap();
        let expect = sigma_x() * (-I);
        assert!(max_abs_diff(&u, &expect) < 1e-12);
    }

    #[test]
    fn expm_rejects_non_hermitian() {
        let mut h = CMat::zeros(2, 2);
        h[(0, 1)] = ONE;
        assert!(expm_hermitian(&h, 1.0).is_err());
    }

    #[test]
    fn expm_matches_eigen_route_on_2x2() {
        // the analytic 2×2 path against the generic eigendecomposition
        let h = CMat::from_row_slice(
            2,
            2,
            &[
                C64::new(0.3, 0.0),
                C64::new(0.2, -0.7),
                C64::new(0.2, 0.7),
                C64::new(-1.1, 0.0),
            ],
        );
        let fast = expm_hermitian(&h, 0.37).unwrap();
        let eig = h.clone().symmetric_eigen();
        let mut d = CMat::zeros(2, 2);
        for i in 0..2 {
            d[(i, i)] = C64::from_polar(1.0, -eig.eigenvalues[i] * 0.37);
        }
        let slow = &eig.eigenvectors * d * eig.eigenvectors.adjoint();
        assert!(max_abs_diff(&fast, &slow) < 1e-13);
    }

    #[test]
    fn rabi_pi_pulse_constant() {
        // constant H = (Ω/2)σx with ∫Ω dt = π → U(T) = −iσx
        let t_total = 10.0;
        let omega = PI / t_total;
        let h = move |_t: f64| sigma_x() * C64::new(omega / 2.0, 0.0);
        let grid = TimeGrid::from_duration(t_total, 256).unwrap();
        let u = propagate_final(h, &grid).unwrap();
        let expect = sigma_x() * (-I);
        assert!(max_abs_diff(&u, &expect) < 1e-9);
    }

    #[test]
    fn cosine_area_law_matches_fine_oracle() {
        // H(t) = Ω(t)σx/2, Ω = π/T·(1−cos(2πt/T)): commuting-H area law gives −iσx.
        let t_total = 50.0;
        let h = move |t: f64| {
            let om = PI / t_total * (1.0 - (std::f64::consts::TAU * t / t_total).cos());
            sigma_x() * C64::new(om / 2.0, 0.0)
        };
        let grid = TimeGrid::from_duration(t_total, 1024).unwrap();
        let u = propagate_final(h, &grid).unwrap();
        assert!(max_abs_diff(&u, &(sigma_x() * (-I))) < 1e-7);
        // fine-step oracle at dt = T/10^5
        let fine = TimeGrid::from_duration(t_total, 100_000).unwrap();
        let u_fine = propagate_final(h, &fine).unwrap();
        assert!(max_abs_diff(&u, &u_fine) < 1e-6);
    }

    #[test]
    fn propagation_reports_nan_time() {
        let h = |t: f64| {
            if t > 5.0 {
                sigma_x() * C64::new(f64::NAN, 0.0)
            } else {
                sigma_x()
            }
        };
        let grid = TimeGrid::from_duration(10.0, 16).unwrap();
        let err = propagate_final(h, &grid).unwrap_err();
        assert!(err.to_string().contains("NaN"));
    }

    #[test]
    fn composition_over_halves() {
        let h = |t: f64| {
            sigma_x() * C64::new(0.1 * (0.3 * t).sin(), 0.0)
                + sigma_z() * C64::new(0.05 * (0.17 * t).cos(), 0.0)
        };
        let grid = TimeGrid::from_duration(20.0, 512).unwrap();
        let u = propagate_final(h, &grid).unwrap();
        let g1 = TimeGrid::new(0.0, 10.0, 256).unwrap();
        let g2 = TimeGrid::new(10.0, 10.0, 256).unwrap();
        let u1 = propagate_final(h, &g1).unwrap();
        let u2 = propagate_final(h, &g2).unwrap();
        assert!(max_abs_diff(&u, &(u2 * u1)) < 1e-12);
    }

    #[test]
    fn unitarity_of_random_propagation() {
        let h = |t: f64| {
            let a = mhz(35.0) * (0.9 * t).sin();
            let b = mhz(18.0) * (1.3 * t + 0.4).cos();
            let c = mhz(52.0) * (0.31 * t).cos();
            sigma_x() * C64::new(a, 0.0)
                + sigma_y() * C64::new(b, 0.0)
                + sigma_z() * C64::new(c, 0.0)
        };
        let grid = TimeGrid::from_duration(300.0, 4096).unwrap();
        let u = propagate_final(h, &grid).unwrap();
        assert!(unitarity_defect(&u) < 1e-9);
    }

    #[test]
    fn fidelity_identity_and_phase() {
        let v = sigma_x();
        let f = trace_fidelity(&v, &v, &[0, 1], &PhaseFreedom::None).unwrap();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-15);
        // U = exp(−i ε σz/2) V, ε = 0.02 → cos(ε/2)
        let eps = 0.02;
        let u = expm_hermitian(&(sigma_z() * C64::new(0.5, 0.0)), eps).unwrap() * &v;
        let f = trace_fidelity(&u, &v, &[0, 1], &PhaseFreedom::None).unwrap();
        assert_abs_diff_eq!(f, (eps / 2.0).cos(), epsilon = 1e-12);
    }

    #[test]
    fn fidelity_rejects_empty_subspace() {
        let v = sigma_x();
        assert!(trace_fidelity(&v, &v, &[], &PhaseFreedom::None).is_err());
    }

    #[test]
    fn per_block_phase_freedom_restores_fidelity() {
        // two 2-dim blocks with opposite global phases
        let mut u = CMat::zeros(4, 4);
        let p1 = C64::from_polar(1.0, 0.8);
        let p2 = C64::from_polar(1.0, -1.1);
        u[(0, 1)] = p1;
        u[(1, 0)] = p1;
        u[(2, 3)] = p2;
        u[(3, 2)] = p2;
        let target = kron(&identity(2), &sigma_x());
        let blocks = PhaseFreedom::PerBlock(vec![vec![0, 1], vec![2, 3]]);
        let f = trace_fidelity(&u, &target, &[0, 1, 2, 3], &blocks).unwrap();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-12);
        let f_none = trace_fidelity(&u, &target, &[0, 1, 2, 3], &PhaseFreedom::None).unwrap();
        assert!(f_none < 0.95);
    }

    #[test]
    fn two_qubit_z_freedom_absorbs_local_phases() {
        // U = (Z(a) ⊗ Z(b)) · iSWAP should have fidelity 1 vs iSWAP
        let mut iswap = CMat::zeros(4, 4);
        iswap[(0, 0)] = ONE;
        iswap[(3, 3)] = ONE;
        iswap[(1, 2)] = I;
        iswap[(2, 1)] = I;
        let za = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
            ONE,
            C64::from_polar(1.0, 0.73),
        ]));
        let zb = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
            ONE,
            C64::from_polar(1.0, -0.41),
        ]));
        let u = kron(&za, &zb) * &iswap;
        let f = trace_fidelity(&u, &iswap, &[0, 1, 2, 3], &PhaseFreedom::TwoQubitZ).unwrap();
        assert!(f > 1.0 - 1e-9, "f = {f}");
    }

    #[test]
    fn ladder_and_number() {
        let a = lowering(3);
        let n = a.adjoint() * &a;
        assert!(max_abs_diff(&n, &number(3)) < 1e-15);
    }
}
