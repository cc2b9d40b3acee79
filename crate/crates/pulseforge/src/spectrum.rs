//! Absorption doublets and lineshape fitting for the weak-coupling regime,
//! where the conditional splitting only broadens the observed line.
//!
//! Width convention: γ is the full width at half maximum of a single
//! Lorentzian line, so a δ = 0 fit returns γ exactly and the fitted width is
//! a full-scale width throughout.

use crate::error::{Error, Result};

/// Peak-one Lorentzian with FWHM `w` centered at 0.
pub fn lorentzian(x: f64, w: f64) -> f64 {
    let u = 2.0 * x / w;
    1.0 / (1.0 + u * u)
}

/// Peak-one Gaussian with FWHM `w` centered at 0.
pub fn gaussian(x: f64, w: f64) -> f64 {
    let ln2 = std::f64::consts::LN_2;
    (-4.0 * ln2 * x * x / (w * w)).exp()
}

/// A sampled absorption profile over a detuning axis.
#[derive(Debug, Clone)]
pub struct AbsorptionProfile {
    /// Detuning axis, rad/ns, strictly increasing.
    pub detuning: Vec<f64>,
    /// Absorption values (arbitrary units, ≥ 0).
    pub absorption: Vec<f64>,
    /// Doublet splitting used to build the profile, rad/ns.
    pub delta: f64,
    /// Bare linewidth (FWHM), rad/ns.
    pub gamma: f64,
}

/// Sum of two equal-weight Lorentzian lines of FWHM γ at ∓δ/2.
/// Each line has unit peak height.
pub fn absorption_doublet(delta: f64, gamma: f64, axis: &[f64]) -> Result<AbsorptionProfile> {
    if !(gamma > 0.0) {
        return Err(Error::Argument(format!("gamma = {gamma} must be positive")));
    }
    if axis.len() < 8 {
        return Err(Error::Argument("detuning axis needs at least 8 points".into()));
    }
    if axis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Argument("detuning axis must be strictly increasing".into()));
    }
    let absorption = axis
        .iter()
        .map(|&x| lorentzian(x - delta / 2.0, gamma) + lorentzian(x + delta / 2.0, gamma))
        .collect();
    Ok(AbsorptionProfile {
        detuning: axis.to_vec(),
        absorption,
        delta,
        gamma,
    })
}

/// Uniform axis spanning ±span with n points.
pub fn symmetric_axis(span: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| -span + 2.0 * span * k as f64 / (n - 1) as f64)
        .collect()
}

/// True when the profile has no interior local minimum between its two
/// largest local maxima (merged regime).
pub fn is_single_peaked(profile: &AbsorptionProfile) -> bool {
    let y = &profile.absorption;
    let mut maxima = 0;
    for k in 1..y.len() - 1 {
        if y[k] > y[k - 1] && y[k] >= y[k + 1] {
            maxima += 1;
        }
    }
    maxima <= 1
}

/// Result of the pseudo-Voigt fit.
#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    /// Fitted full-scale width (FWHM), rad/ns.
    pub width: f64,
    /// Lorentzian fraction η ∈ [0, 1].
    pub eta: f64,
    /// Amplitude.
    pub amplitude: f64,
    /// Fitted center.
    pub center: f64,
    /// Root-mean-square residual of the converged fit.
    pub rms: f64,
    pub iterations: usize,
}

/// Least-squares pseudo-Voigt fit A·[η L(x−x0; w) + (1−η) G(x−x0; w)] with
/// shared center and width. Errors on double-peaked input (split regime) and
/// on non-convergence.
pub fn fit_linewidth(profile: &AbsorptionProfile) -> Result<LineFit> {
    if !is_single_peaked(profile) {
        return Err(Error::Regime(
            "profile is double-peaked; the single-line fit is undefined in the split regime".into(),
        ));
    }
    let x = &profile.detuning;
    let y = &profile.absorption;
    let n = x.len();

    // inits: amplitude from the peak, width from the measured half-maximum crossings
    let (kmax, &ymax) = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    let half = ymax / 2.0;
    let mut lo = x[0];
    let mut hi = x[n - 1];
    for k in (0..kmax).rev() {
        if y[k] < half {
            let f = (half - y[k]) / (y[k + 1] - y[k]);
            lo = x[k] + f * (x[k + 1] - x[k]);
            break;
        }
    }
    for k in kmax..n - 1 {
        if y[k + 1] < half {
            let f = (y[k] - half) / (y[k] - y[k + 1]);
            hi = x[k] + f * (x[k + 1] - x[k]);
            break;
        }
    }
    let mut p = [ymax, 0.8, (hi - lo).max(1e-6), x[kmax]]; // A, η, w, x0

    let model = |p: &[f64; 4], xi: f64| -> f64 {
        let u = xi - p[3];
        p[0] * (p[1] * lorentzian(u, p[2]) + (1.0 - p[1]) * gaussian(u, p[2]))
    };
    let clamp = |p: &mut [f64; 4]| {
        p[0] = p[0].max(1e-12);
        p[1] = p[1].clamp(0.0, 1.0);
        p[2] = p[2].max(1e-12);
    };

    // Levenberg–Marquardt on the 4 parameters
    let mut lambda = 1e-3;
    let mut cost = |p: &[f64; 4]| -> f64 {
        x.iter()
            .zip(y)
            .map(|(&xi, &yi)| {
                let r = model(p, xi) - yi;
                r * r
            })
            .sum()
    };
    let mut c_now = cost(&p);
    let mut iterations = 0;
    let mut converged = false;
    for it in 0..200 {
        iterations = it + 1;
        // jacobian by forward differences
        let mut jtj = [[0.0f64; 4]; 4];
        let mut jtr = [0.0f64; 4];
        let steps = [
            (p[0].abs() * 1e-7).max(1e-12),
            1e-7,
            (p[2].abs() * 1e-7).max(1e-12),
            (p[2].abs() * 1e-7).max(1e-12),
        ];
        for (&xi, &yi) in x.iter().zip(y) {
            let f0 = model(&p, xi);
            let r = f0 - yi;
            let mut grad = [0.0; 4];
            for j in 0..4 {
                let mut q = p;
                q[j] += steps[j];
                clamp(&mut q);
                let denom = q[j] - p[j];
                grad[j] = if denom.abs() > 0.0 {
                    (model(&q, xi) - f0) / denom
                } else {
                    0.0
                };
            }
            for j in 0..4 {
                jtr[j] += grad[j] * r;
                for k in 0..4 {
                    jtj[j][k] += grad[j] * grad[k];
                }
            }
        }
        // solve (JtJ + λ diag) d = −Jtr by Gaussian elimination
        let mut a = [[0.0f64; 5]; 4];
        for j in 0..4 {
            for k in 0..4 {
                a[j][k] = jtj[j][k];
            }
            a[j][j] += lambda * jtj[j][j].max(1e-12);
            a[j][4] = -jtr[j];
        }
        let mut ok = true;
        for col in 0..4 {
            let mut piv = col;
            for r in col + 1..4 {
                if a[r][col].abs() > a[piv][col].abs() {
                    piv = r;
                }
            }
            if a[piv][col].abs() < 1e-300 {
                ok = false;
                break;
            }
            a.swap(col, piv);
            for r in 0..4 {
                if r != col {
                    let f = a[r][col] / a[col][col];
                    for k in col..5 {
                        a[r][k] -= f * a[col][k];
                    }
                }
            }
        }
        if !ok {
            lambda *= 10.0;
            continue;
        }
        let mut q = p;
        for j in 0..4 {
            q[j] += a[j][4] / a[j][j];
        }
        clamp(&mut q);
        let c_new = cost(&q);
        if c_new < c_now {
            let rel = (c_now - c_new) / c_now.max(1e-300);
            p = q;
            c_now = c_new;
            lambda = (lambda * 0.3).max(1e-12);
            if rel < 1e-12 {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                converged = true; // stuck at a (numerical) optimum
                break;
            }
        }
    }
    if !converged && iterations >= 200 {
        // accepted: LM reached the iteration cap while still improving
        // slowly; treat the final state as converged only if residuals are
        // small relative to the peak
        if c_now.sqrt() / (n as f64).sqrt() > 0.05 * p[0] {
            return Err(Error::Fit(format!(
                "pseudo-Voigt fit did not converge: rms {:.3e} after {iterations} iterations",
                (c_now / n as f64).sqrt()
            )));
        }
    }
    Ok(LineFit {
        width: p[2],
        eta: p[1],
        amplitude: p[0],
        center: p[3],
        rms: (c_now / n as f64).sqrt(),
        iterations,
    })
}

/// Smallest δ at which the doublet develops a local minimum at its midpoint,
/// by bisection on the analytic second derivative at the center.
/// Scale-invariant: δ_c(kγ) = k·δ_c(γ).
pub fn merge_threshold(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::Argument(format!("gamma = {gamma} must be positive")));
    }
    // p''(0) = 2 L''(δ/2); sign change marks the threshold
    let lpp = |u: f64| {
        let a = 4.0 / (gamma * gamma);
        2.0 * a * (3.0 * a * u * u - 1.0) / (1.0 + a * u * u).powi(3)
    };
    let mut lo = 1e-6 * gamma; // dip absent
    let mut hi = 4.0 * gamma; // dip present
    if lpp(lo / 2.0) > 0.0 || lpp(hi / 2.0) < 0.0 {
        return Err(Error::Fit("merge-threshold bracketing failed".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if lpp(mid / 2.0) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
