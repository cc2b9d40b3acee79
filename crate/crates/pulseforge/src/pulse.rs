//! Smooth drive envelopes: truncated Fourier ansatz or dense samples.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::units;

/// Envelope form. The Fourier ansatz evaluates as
/// Ω(t) = Σ_n C_n cos(2πnt/T + φ_n), n = 0..N−1 with φ_0 ≡ 0.
#[derive(Debug, Clone, PartialEq)]
pub enum PulseForm {
    Fourier {
        /// Harmonic amplitudes C_n in rad/ns.
        amplitudes: Vec<f64>,
        /// Harmonic phases φ_n in rad; φ_0 is forced to zero.
        phases: Vec<f64>,
    },
    Sampled {
        /// Uniform samples over [0, T], length ≥ 16.
        values: Vec<C64>,
    },
}

/// A drive envelope with duration and carrier frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct Pulse {
    pub form: PulseForm,
    /// Duration in ns.
    pub duration: f64,
    /// Carrier angular frequency ω_d in rad/ns.
    pub carrier: f64,
}

impl Pulse {
    pub fn fourier(amplitudes: Vec<f64>, mut phases: Vec<f64>, duration: f64, carrier: f64) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Argument("a Fourier pulse needs at least one harmonic".into()));
        }
        if phases.len() != amplitudes.len() {
            return Err(Error::Argument(format!(
                "got {} amplitudes but {} phases",
                amplitudes.len(),
                phases.len()
            )));
        }
        if !(duration > 0.0) {
            return Err(Error::Argument(format!("duration {duration} must be positive")));
        }
        phases[0] = 0.0;
        Ok(Self {
            form: PulseForm::Fourier { amplitudes, phases },
            duration,
            carrier,
        })
    }

    pub fn sampled(values: Vec<C64>, duration: f64, carrier: f64) -> Result<Self> {
        if values.len() < 16 {
            return Err(Error::Argument(format!(
                "sampled pulses need ≥ 16 samples, got {}",
                values.len()
            )));
        }
        if !(duration > 0.0) {
            return Err(Error::Argument(format!("duration {duration} must be positive")));
        }
        Ok(Self {
            form: PulseForm::Sampled { values },
            duration,
            carrier,
        })
    }

    pub fn sampled_real(values: Vec<f64>, duration: f64, carrier: f64) -> Result<Self> {
        Self::sampled(
            values.into_iter().map(|v| C64::new(v, 0.0)).collect(),
            duration,
            carrier,
        )
    }

    /// Envelope at time t (complex; Fourier forms are real-valued).
    pub fn value(&self, t: f64) -> C64 {
        match &self.form {
            PulseForm::Fourier { amplitudes, phases } => {
                let mut v = 0.0;
                for (n, (&c, &p)) in amplitudes.iter().zip(phases).enumerate() {
                    v += c * (TAU * n as f64 * t / self.duration + p).cos();
                }
                C64::new(v, 0.0)
            }
            PulseForm::Sampled { values } => {
                // linear interpolation on the uniform sample grid
                let n = values.len();
                let x = (t / self.duration).clamp(0.0, 1.0) * (n - 1) as f64;
                let k = (x.floor() as usize).min(n - 2);
                let f = x - k as f64;
                values[k] * (1.0 - f) + values[k + 1] * f
            }
        }
    }

    /// Real part of the envelope at t.
    pub fn real_value(&self, t: f64) -> f64 {
        self.value(t).re
    }

    /// ∫₀ᵀ Ω(t) dt of the real envelope, exact for the Fourier form.
    pub fn area(&self) -> f64 {
        match &self.form {
            PulseForm::Fourier { amplitudes, .. } => amplitudes[0] * self.duration,
            PulseForm::Sampled { values } => {
                let n = values.len();
                let dt = self.duration / (n - 1) as f64;
                let mut a = 0.5 * (values[0].re + values[n - 1].re);
                for v in &values[1..n - 1] {
                    a += v.re;
                }
                a * dt
            }
        }
    }

    /// Rescale the envelope by a factor.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut p = self.clone();
        match &mut p.form {
            PulseForm::Fourier { amplitudes, .. } => {
                for a in amplitudes.iter_mut() {
                    *a *= factor;
                }
            }
            PulseForm::Sampled { values } => {
                for v in values.iter_mut() {
                    *v *= factor;
                }
            }
        }
        p
    }

    /// Convert to a sampled pulse with `n` uniform samples.
    pub fn to_sampled(&self, n: usize) -> Result<Pulse> {
        if n < 16 {
            return Err(Error::Argument("need ≥ 16 samples".into()));
        }
        let vals = (0..n)
            .map(|k| self.value(self.duration * k as f64 / (n - 1) as f64))
            .collect();
        Pulse::sampled(vals, self.duration, self.carrier)
    }

    /// Fit a real sampled pulse back onto the Fourier ansatz with
    /// `n_harmonics` terms (least squares on the cos/sin basis).
    pub fn to_fourier(&self, n_harmonics: usize) -> Result<Pulse> {
        if n_harmonics == 0 {
            return Err(Error::Argument("need at least one harmonic".into()));
        }
        let (values, n) = match &self.form {
            PulseForm::Fourier { .. } => return Ok(self.clone()),
            PulseForm::Sampled { values } => (values, values.len()),
        };
        if 2 * n_harmonics - 1 > n {
            return Err(Error::Argument(format!(
                "{n} samples cannot resolve {n_harmonics} harmonics"
            )));
        }
        // trapezoid projections onto cos/sin(2πnt/T); endpoints carry half weight
        let mut amps = vec![0.0; n_harmonics];
        let mut phases = vec![0.0; n_harmonics];
        let weight = |k: usize| if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        let norm = (n - 1) as f64;
        for h in 0..n_harmonics {
            let mut a = 0.0; // cos coefficient
            let mut b = 0.0; // sin coefficient
            for (k, v) in values.iter().enumerate() {
                let x = TAU * h as f64 * k as f64 / norm;
                a += weight(k) * v.re * x.cos();
                b += weight(k) * v.re * x.sin();
            }
            a /= norm;
            b /= norm;
            if h == 0 {
                amps[0] = a;
            } else {
                // C cos(x + φ) = C cosφ cos x − C sinφ sin x
                let c_cos = 2.0 * a;
                let c_sin = -2.0 * b;
                amps[h] = (c_cos * c_cos + c_sin * c_sin).sqrt();
                phases[h] = c_sin.atan2(c_cos);
            }
        }
        Pulse::fourier(amps, phases, self.duration, self.carrier)
    }

    pub fn n_harmonics(&self) -> Option<usize> {
        match &self.form {
            PulseForm::Fourier { amplitudes, .. } => Some(amplitudes.len()),
            PulseForm::Sampled { .. } => None,
        }
    }
}

// --- JSON schema -----------------------------------------------------------

/// On-disk pulse document. External amplitudes are ordinary frequencies in
/// MHz; the ×2π is applied on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PulseDoc {
    pub schema_version: u32,
    pub form: String,
    pub t_ns: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub harmonics: Option<Vec<HarmonicDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<[f64; 2]>>,
    pub carrier_ghz: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HarmonicDoc {
    pub n: usize,
    pub c_mhz: f64,
    pub phi_rad: f64,
}

pub const PULSE_SCHEMA_VERSION: u32 = 1;

impl Pulse {
    pub fn to_doc(&self) -> PulseDoc {
        match &self.form {
            PulseForm::Fourier { amplitudes, phases } => PulseDoc {
                schema_version: PULSE_SCHEMA_VERSION,
                form: "fourier".into(),
                t_ns: self.duration,
                harmonics: Some(
                    amplitudes
                        .iter()
                        .zip(phases)
                        .enumerate()
                        .map(|(n, (&c, &p))| HarmonicDoc {
                            n,
                            c_mhz: units::to_mhz(c),
                            phi_rad: p,
                        })
                        .collect(),
                ),
                values: None,
                carrier_ghz: self.carrier / units::GHZ,
            },
            PulseForm::Sampled { values } => PulseDoc {
                schema_version: PULSE_SCHEMA_VERSION,
                form: "sampled".into(),
                t_ns: self.duration,
                harmonics: None,
                values: Some(values.iter().map(|v| [v.re, v.im]).collect()),
                carrier_ghz: self.carrier / units::GHZ,
            },
        }
    }

    pub fn from_doc(doc: &PulseDoc) -> Result<Pulse> {
        if doc.schema_version != PULSE_SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "pulse schema_version {} unsupported (expected {PULSE_SCHEMA_VERSION})",
                doc.schema_version
            )));
        }
        let carrier = units::ghz(doc.carrier_ghz);
        match doc.form.as_str() {
            "fourier" => {
                let hs = doc
                    .harmonics
                    .as_ref()
                    .ok_or_else(|| Error::Schema("fourier form needs `harmonics`".into()))?;
                let n_max = hs.iter().map(|h| h.n).max().unwrap_or(0);
                let mut amps = vec![0.0; n_max + 1];
                let mut phases = vec![0.0; n_max + 1];
                for h in hs {
                    amps[h.n] = units::mhz(h.c_mhz);
                    phases[h.n] = h.phi_rad;
                }
                Pulse::fourier(amps, phases, doc.t_ns, carrier)
            }
            "sampled" => {
                let vs = doc
                    .values
                    .as_ref()
                    .ok_or_else(|| Error::Schema("sampled form needs `values`".into()))?;
                Pulse::sampled(
                    vs.iter().map(|v| C64::new(v[0], v[1])).collect(),
                    doc.t_ns,
                    carrier,
                )
            }
            other => Err(Error::Schema(format!("unknown pulse form `{other}`"))),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_doc())?)
    }

    pub fn from_json(text: &str) -> Result<Pulse> {
        let doc: PulseDoc = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        Pulse::from_doc(&doc)
    }
}

/// The standard cosine envelope A(1 − cos 2πt/T) with the requested area.
pub fn cosine_pulse(area: f64, duration: f64, carrier: f64) -> Pulse {
    let a = area / duration;
    Pulse::fourier(vec![a, -a], vec![0.0, 0.0], duration, carrier)
        .expect("two harmonics are always valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fourier_evaluation_and_area() {
        let p = Pulse::fourier(vec![0.2, 0.1], vec![0.0, 0.5], 100.0, 0.0).unwrap();
        assert_abs_diff_eq!(p.value(0.0).re, 0.2 + 0.1 * 0.5f64.cos(), epsilon = 1e-15);
        // integer harmonics integrate to zero over a period
        assert_abs_diff_eq!(p.area(), 0.2 * 100.0, epsilon = 1e-12);
    }

    #[test]
    fn phi0_is_forced_to_zero() {
        let p = Pulse::fourier(vec![1.0], vec![0.7], 10.0, 0.0).unwrap();
        match &p.form {
            PulseForm::Fourier { phases, .. } => assert_eq!(phases[0], 0.0),
            _ => unreachable!(),
        }
    }

    #[test]
    fn sampled_round_trip_when_band_limited() {
        let p = Pulse::fourier(vec![0.1, 0.05, -0.03], vec![0.0, 0.3, -1.2], 50.0, 0.0).unwrap();
        let s = p.to_sampled(4096).unwrap();
        for k in 0..100 {
            let t = 50.0 * k as f64 / 99.0;
            assert_abs_diff_eq!(s.value(t).re, p.value(t).re, epsilon = 1e-6);
        }
        let back = s.to_fourier(3).unwrap();
        // round trip at shared sample points
        for k in 0..33 {
            let t = 50.0 * k as f64 / 32.0;
            assert_abs_diff_eq!(back.value(t).re, p.value(t).re, epsilon = 1e-5);
        }
    }

    #[test]
    fn short_sampled_rejected() {
        assert!(Pulse::sampled_real(vec![0.0; 8], 10.0, 0.0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let p = Pulse::fourier(
            vec![units::mhz(19.6), units::mhz(17.5)],
            vec![0.0, 0.941],
            98.6,
            units::ghz(5.45),
        )
        .unwrap();
        let q = Pulse::from_json(&p.to_json().unwrap()).unwrap();
        assert_abs_diff_eq!(q.value(13.0).re, p.value(13.0).re, epsilon = 1e-12);
        assert_abs_diff_eq!(q.carrier, p.carrier, epsilon = 1e-12);
    }

    #[test]
    fn cosine_pulse_area() {
        let p = cosine_pulse(std::f64::consts::PI, 98.6, 0.0);
        assert_abs_diff_eq!(p.area(), std::f64::consts::PI, epsilon = 1e-12);
        assert_abs_diff_eq!(p.value(0.0).re, 0.0, epsilon = 1e-15);
    }
}
