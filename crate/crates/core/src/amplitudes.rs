//! Single-atom decay amplitudes for an atom coupled to a Lorentzian reservoir.
//!
//! An atom prepared in its excited state evolves as
//! `E(t)|e,0> + F(t)|g,photon>`. For a Lorentzian spectral density the
//! excited amplitude obeys `E'' + (lambda - i delta) E' + Omega^2 E = 0` with
//! `E(0) = 1`, `E'(0) = 0`, whose solution is evaluated here in closed form.
//! The photon-branch amplitude `F` is taken real and non-negative.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Below this value of `|w t / 2|` the hyperbolic terms use a truncated series.
const SERIES_THRESHOLD: f64 = 1e-6;

/// Above this value of `|Re(w) t / 2|` the two-exponential form is used.
const OVERFLOW_THRESHOLD: f64 = 350.0;

/// Physical parameters of one atom-cavity pair.
///
/// `omega` is the vacuum Rabi coupling, `lambda` the cavity linewidth
/// (inverse photon lifetime) and `delta` the atom-cavity detuning
/// `omega_atom - omega_cavity`. `lambda == 0` selects the ideal cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    pub omega: f64,
    pub lambda: f64,
    pub delta: f64,
}

impl CavityParams {
    pub fn new(omega: f64, lambda: f64, delta: f64) -> Result<Self> {
        let p = Self {
            omega,
            lambda,
            delta,
        };
        p.validate()?;
        Ok(p)
    }

    /// Resonant parameters (`delta = 0`).
    pub fn resonant(omega: f64, lambda: f64) -> Result<Self> {
        Self::new(omega, lambda, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.lambda.is_finite() && self.delta.is_finite()) {
            return Err(Error::Domain(format!("non-finite cavity parameters {self:?}")));
        }
        if self.omega <= 0.0 {
            return Err(Error::Domain(format!("omega must be > 0, got {}", self.omega)));
        }
        if self.lambda < 0.0 {
            return Err(Error::Domain(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        Ok(())
    }

    /// Markovian decay rate `2 Omega^2 / lambda`; undefined for the ideal cavity.
    pub fn gamma(&self) -> Option<f64> {
        (self.lambda > 0.0).then(|| 2.0 * self.omega * self.omega / self.lambda)
    }

    /// Generalized Rabi frequency `sqrt(Omega^2 + delta^2 / 4)`.
    pub fn rabi(&self) -> f64 {
        (self.omega * self.omega + 0.25 * self.delta * self.delta).sqrt()
    }

    /// `lambda - i delta`, the complex damping of the amplitude equation.
    pub fn damping(&self) -> Complex64 {
        Complex64::new(self.lambda, -self.delta)
    }

    /// Principal square root of `lambda^2 - 2 i delta lambda - 4 R^2`.
    pub fn w(&self) -> Complex64 {
        let r = self.rabi();
        Complex64::new(
            self.lambda * self.lambda - 4.0 * r * r,
            -2.0 * self.delta * self.lambda,
        )
        .sqrt()
    }

    /// Slowest envelope decay rate, `(lambda - Re w) / 2`.
    pub fn envelope_rate(&self) -> f64 {
        0.5 * (self.lambda - self.w().re)
    }

    /// The same cavity with the detuning reversed.
    pub fn mirrored(&self) -> Self {
        Self {
            delta: -self.delta,
            ..*self
        }
    }
}

/// Excited amplitude `E` and photon-branch magnitude `F` at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudePair {
    pub e: Complex64,
    pub f_mag: f64,
}

impl AmplitudePair {
    /// Builds a pair from `E`, fixing `F = sqrt(1 - |E|^2)` with `|E|` clamped to 1.
    pub fn from_excited(e: Complex64) -> Self {
        let p = e.norm_sqr().min(1.0);
        Self {
            e,
            f_mag: (1.0 - p).max(0.0).sqrt(),
        }
    }

    /// The initial condition `E = 1`, `F = 0`.
    pub fn initial() -> Self {
        Self {
            e: Complex64::new(1.0, 0.0),
            f_mag: 0.0,
        }
    }

    pub fn e_abs(&self) -> f64 {
        self.e.norm()
    }
}

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Domain(format!("time must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// Exact excited-state amplitude and photon-branch magnitude at time `t`.
pub fn amplitude(params: &CavityParams, t: f64) -> Result<AmplitudePair> {
    params.validate()?;
    check_time(t)?;
    let e = excited_amplitude_on_branch(params, params.w(), t);
    Ok(AmplitudePair::from_excited(e))
}

/// Evaluates the closed-form `E(t)` using the supplied square root `w`.
///
/// The expression is even in `w`, so `w` and `-w` give the same value; the
/// public [`amplitude`] always passes the principal root.
pub fn excited_amplitude_on_branch(params: &CavityParams, w: Complex64, t: f64) -> Complex64 {
    if t == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let a = params.damping();
    let x = w * (0.5 * t);

    if x.norm() < SERIES_THRESHOLD {
        // cosh x = 1 + x^2/2 + x^4/24, sinh(x)/w = (t/2)(1 + x^2/6 + x^4/120)
        let x2 = x * x;
        let cosh = 1.0 + x2 * 0.5 + x2 * x2 / 24.0;
        let sinh_over_w = (1.0 + x2 / 6.0 + x2 * x2 / 120.0) * (0.5 * t);
        return (-a * (0.5 * t)).exp() * (cosh + a * sinh_over_w);
    }

    if x.re.abs() > OVERFLOW_THRESHOLD {
        let ratio = a / w;
        let grow = ((w - a) * (0.5 * t)).exp() * (1.0 + ratio) * 0.5;
        let shrink = (-(w + a) * (0.5 * t)).exp() * (1.0 - ratio) * 0.5;
        return grow + shrink;
    }

    (-a * (0.5 * t)).exp() * (x.cosh() + a / w * x.sinh())
}

/// Bad-cavity approximation `exp{-(delta^2 / 4 lambda + gamma / 2) t}`.
pub fn markovian_amplitude(params: &CavityParams, t: f64) -> Result<Complex64> {
    params.validate()?;
    check_time(t)?;
    let gamma = params.gamma().ok_or_else(|| {
        Error::Domain("Markovian amplitude needs lambda > 0 (gamma undefined)".into())
    })?;
    let rate = params.delta * params.delta / (4.0 * params.lambda) + 0.5 * gamma;
    Ok(Complex64::new((-rate * t).exp(), 0.0))
}

/// Ideal-cavity (Jaynes-Cummings) amplitude `e^{i delta t/2}[cos Rt - (i delta / 2R) sin Rt]`.
///
/// The linewidth is ignored.
pub fn jc_amplitude(params: &CavityParams, t: f64) -> Result<Complex64> {
    params.validate()?;
    check_time(t)?;
    let r = params.rabi();
    let (s, c) = (r * t).sin_cos();
    let bracket = Complex64::new(c, -params.delta / (2.0 * r) * s);
    Ok(Complex64::from_polar(1.0, 0.5 * params.delta * t) * bracket)
}

/// Resonant ideal-cavity amplitude with the leading linewidth correction,
/// `e^{-lambda t/2} cos[(Omega - lambda^2 / 8 Omega) t]`.
pub fn jc_corrected_amplitude(params: &CavityParams, t: f64) -> Result<Complex64> {
    params.validate()?;
    check_time(t)?;
    if params.delta != 0.0 {
        return Err(Error::UnsupportedRegime(format!(
            "corrected ideal-cavity form is only available on resonance, delta = {}",
            params.delta
        )));
    }
    let shifted = params.omega - params.lambda * params.lambda / (8.0 * params.omega);
    Ok(Complex64::new(
        (-0.5 * params.lambda * t).exp() * (shifted * t).cos(),
        0.0,
    ))
}

/// Lorentzian spectral density of one reservoir, centred on the cavity frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralDensity {
    pub params: CavityParams,
}

impl SpectralDensity {
    pub fn new(params: CavityParams) -> Self {
        Self { params }
    }

    /// `J(omega_c + offset) = (Omega^2 / pi) lambda / (offset^2 + lambda^2)`.
    pub fn density(&self, omega_offset: f64) -> Result<f64> {
        let p = &self.params;
        if p.lambda <= 0.0 {
            return Err(Error::Domain(
                "spectral density of an ideal cavity is a delta distribution".into(),
            ));
        }
        Ok(p.omega * p.omega / PI * p.lambda
            / (omega_offset * omega_offset + p.lambda * p.lambda))
    }

    /// Reservoir correlation function seen from the atom frame,
    /// `Omega^2 e^{-lambda |tau|} e^{i delta tau}`.
    pub fn correlation(&self, tau: f64) -> Complex64 {
        let p = &self.params;
        Complex64::from_polar(
            p.omega * p.omega * (-p.lambda * tau.abs()).exp(),
            p.delta * tau,
        )
    }
}

/// Free-function form of [`SpectralDensity::density`].
pub fn spectral_density(sd: &SpectralDensity, omega_offset: f64) -> Result<f64> {
    sd.density(omega_offset)
}

/// Free-function form of [`SpectralDensity::correlation`].
pub fn correlation_function(sd: &SpectralDensity, tau: f64) -> Complex64 {
    sd.correlation(tau)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn initial_condition() {
        for p in [
            CavityParams::new(1.0, 0.3, -0.7).unwrap(),
            CavityParams::new(2.0, 0.0, 0.0).unwrap(),
            CavityParams::new(0.5, 50.0, 3.0).unwrap(),
        ] {
            let a = amplitude(&p, 0.0).unwrap();
            assert_eq!(a.e, Complex64::new(1.0, 0.0));
            assert_eq!(a.f_mag, 0.0);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = CavityParams::resonant(1.0, 1.0).unwrap();
        assert!(matches!(amplitude(&p, -1.0), Err(Error::Domain(_))));
        assert!(matches!(amplitude(&p, f64::NAN), Err(Error::Domain(_))));
        let bad = CavityParams {
            omega: f64::INFINITY,
            lambda: 1.0,
            delta: 0.0,
        };
        assert!(matches!(amplitude(&bad, 1.0), Err(Error::Domain(_))));
        assert!(CavityParams::new(0.0, 1.0, 0.0).is_err());
        assert!(CavityParams::new(1.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn ideal_cavity_matches_cosine() {
        let p = CavityParams::resonant(1.3, 0.0).unwrap();
        for i in 0..200 {
            let t = 0.05 * i as f64;
            let e = amplitude(&p, t).unwrap().e;
            assert!(close(e, Complex64::new((1.3 * t).cos(), 0.0), 1e-12));
            assert!(close(jc_amplitude(&p, t).unwrap(), e, 1e-12));
        }
    }

    #[test]
    fn quarter_rabi_period_empties_atom() {
        let p = CavityParams::resonant(2.0, 0.0).unwrap();
        let e = jc_amplitude(&p, PI / 4.0).unwrap();
        assert!(e.norm() < 1e-15);
    }

    #[test]
    fn detuned_jc_half_period() {
        // At R t = pi: e^{i delta pi / 2R} (cos pi) = -e^{i delta pi / 2R}.
        let p = CavityParams::new(1.0, 0.0, 2.0).unwrap();
        let r = p.rabi();
        let e = jc_amplitude(&p, PI / r).unwrap();
        let expected = -Complex64::from_polar(1.0, 2.0 * PI / (2.0 * r));
        assert!(close(e, expected, 1e-12));
        assert!((e.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn critical_damping_uses_series() {
        // delta = 0, lambda = 2 Omega: w = 0 and E = e^{-lambda t/2}(1 + lambda t/2).
        let p = CavityParams::resonant(1.0, 2.0).unwrap();
        assert_eq!(p.w(), Complex64::new(0.0, 0.0));
        for i in 0..100 {
            let t = 0.1 * i as f64;
            let e = amplitude(&p, t).unwrap().e;
            let expected = (-t).exp() * (1.0 + t);
            assert!(close(e, Complex64::new(expected, 0.0), 1e-14), "t={t}");
        }
    }

    #[test]
    fn near_critical_is_continuous() {
        let crit = CavityParams::resonant(1.0, 2.0).unwrap();
        let near = CavityParams::resonant(1.0, 2.0 + 1e-9).unwrap();
        for t in [0.1, 1.0, 3.0, 10.0] {
            let a = amplitude(&crit, t).unwrap().e;
            let b = amplitude(&near, t).unwrap().e;
            assert!(close(a, b, 1e-8), "t={t}: {a} vs {b}");
        }
    }

    #[test]
    fn overflow_form_is_finite() {
        let p = CavityParams::resonant(1.0, 1000.0).unwrap();
        let gamma = p.gamma().unwrap();
        let t = 5.0 / gamma;
        let a = amplitude(&p, t).unwrap();
        assert!(a.e.re.is_finite());
        // Markovian limit is accurate to O(Omega^2 / lambda^2) here.
        assert!((a.e.re - (-2.5f64).exp()).abs() < 1e-4);
    }

    #[test]
    fn overflow_switch_is_seamless() {
        // Re(w) t / 2 crosses 350 between these two times.
        let p = CavityParams::new(1.0, 100.0, 5.0).unwrap();
        let t_switch = 2.0 * OVERFLOW_THRESHOLD / p.w().re;
        let below = amplitude(&p, t_switch * (1.0 - 1e-9)).unwrap().e;
        let above = amplitude(&p, t_switch * (1.0 + 1e-9)).unwrap().e;
        assert!(close(below, above, 1e-9));
    }

    #[test]
    fn markovian_values() {
        let p = CavityParams::resonant(1.0, 100.0).unwrap();
        assert_eq!(markovian_amplitude(&p, 0.0).unwrap(), Complex64::new(1.0, 0.0));
        let m = markovian_amplitude(&p, 50.0).unwrap();
        assert!((m.re - (-0.5f64).exp()).abs() < 1e-15);
        assert!((m.re - 0.6065).abs() < 1e-4);
        let ideal = CavityParams::resonant(1.0, 0.0).unwrap();
        assert!(matches!(markovian_amplitude(&ideal, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn markovian_sup_error_at_lambda_100() {
        let p = CavityParams::resonant(1.0, 100.0).unwrap();
        let gamma = p.gamma().unwrap();
        let horizon = 5.0 / gamma;
        let sup = (0..=2000)
            .map(|i| horizon * i as f64 / 2000.0)
            .map(|t| (amplitude(&p, t).unwrap().e - markovian_amplitude(&p, t).unwrap()).norm())
            .fold(0.0, f64::max);
        assert!(sup < 1e-2, "sup = {sup}");
    }

    #[test]
    fn corrected_jc_values() {
        let p = CavityParams::resonant(1.0, 0.05).unwrap();
        assert_eq!(jc_corrected_amplitude(&p, 0.0).unwrap(), Complex64::new(1.0, 0.0));
        let ideal = CavityParams::resonant(1.0, 0.0).unwrap();
        for t in [0.3, 1.7, 4.0] {
            let c = jc_corrected_amplitude(&ideal, t).unwrap();
            assert!(close(c, Complex64::new(t.cos(), 0.0), 1e-15));
        }
        let detuned = CavityParams::new(1.0, 0.05, 0.1).unwrap();
        assert!(matches!(
            jc_corrected_amplitude(&detuned, 1.0),
            Err(Error::UnsupportedRegime(_))
        ));
    }

    #[test]
    fn corrected_jc_sup_error() {
        // The corrected form drops the (lambda / 2 Omega') sin(Omega' t) term of
        // the exact amplitude, so the residual is bounded by about lambda / 2 Omega.
        let p = CavityParams::resonant(1.0, 0.05).unwrap();
        let horizon = 4.0 * PI;
        let sup = (0..=20000)
            .map(|i| horizon * i as f64 / 20000.0)
            .map(|t| (amplitude(&p, t).unwrap().e - jc_corrected_amplitude(&p, t).unwrap()).norm())
            .fold(0.0, f64::max);
        assert!(sup < 0.5 * p.lambda / p.omega, "sup = {sup}");
        // The uncorrected ideal form is worse.
        let sup_ideal = (0..=20000)
            .map(|i| horizon * i as f64 / 20000.0)
            .map(|t| (amplitude(&p, t).unwrap().e - jc_amplitude(&p, t).unwrap()).norm())
            .fold(0.0, f64::max);
        assert!(sup < sup_ideal);
    }

    #[test]
    fn lorentzian_shape() {
        let sd = SpectralDensity::new(CavityParams::new(1.5, 0.4, 0.2).unwrap());
        let peak = sd.density(0.0).unwrap();
        assert!((peak - 1.5 * 1.5 / (PI * 0.4)).abs() < 1e-14);
        for side in [-0.4, 0.4] {
            assert!((sd.density(side).unwrap() - 0.5 * peak).abs() < 1e-14);
        }
        let ideal = SpectralDensity::new(CavityParams::resonant(1.0, 0.0).unwrap());
        assert!(matches!(ideal.density(0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn correlation_values() {
        let sd = SpectralDensity::new(CavityParams::resonant(2.0, 0.5).unwrap());
        assert_eq!(sd.correlation(0.0), Complex64::new(4.0, 0.0));
        let at_tc = sd.correlation(1.0 / 0.5);
        assert!(close(at_tc, Complex64::new(4.0 / std::f64::consts::E, 0.0), 1e-14));
        assert!(close(sd.correlation(-1.3), sd.correlation(1.3), 1e-15));
    }
}
