//! Brute-force reference solutions for the excited-state amplitude.
//!
//! Two routes, both independent of the closed form in [`crate::amplitudes`]:
//!
//! * [`memory_kernel_solve`] integrates the exponential-kernel
//!   integro-differential equation
//!   `E'(t) = -Omega^2 \int_0^t e^{-(lambda - i delta)(t - s)} E(s) ds`
//!   after rewriting it as the first-order system
//!   `E' = -Omega^2 z`, `z' = E - (lambda - i delta) z`, `z(0) = 0`,
//!   with a classical fixed-step RK4 scheme.
//! * [`discretized_modes_solve`] replaces the reservoir by a finite set of
//!   modes sampled from the Lorentzian and evolves the single-excitation
//!   Schrodinger equation exactly, by diagonalizing the arrowhead
//!   generator through its secular equation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::amplitudes::{CavityParams, SpectralDensity};
use crate::error::{Error, Result};

/// Largest admissible `h * max(lambda, Omega, |delta|)` for the RK4 oracle.
pub const MAX_STEP_RATE: f64 = 0.1;

/// Uniform sampling of `[0, t_max]` with `n_steps` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_max: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_max: f64, n_steps: usize) -> Result<Self> {
        let g = Self { t_max, n_steps };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(Error::Domain(format!("t_max must be > 0, got {}", self.t_max)));
        }
        if self.n_steps < 2 {
            return Err(Error::Domain(format!(
                "n_steps must be >= 2, got {}",
                self.n_steps
            )));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        self.t_max / (self.n_steps - 1) as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t_max * i as f64 / (self.n_steps - 1) as f64
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_steps).map(move |i| self.time(i))
    }
}

/// Finite sampling of a Lorentzian reservoir.
///
/// The window `[omega_c - cutoff*lambda, omega_c + cutoff*lambda]` is split
/// into `n_modes` cells of equal width; each mode sits at the centre of its
/// cell, so an odd count puts one mode exactly on the cavity frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeDiscretization {
    pub n_modes: usize,
    pub cutoff: f64,
}

impl ModeDiscretization {
    pub fn new(n_modes: usize, cutoff: f64) -> Result<Self> {
        let d = Self { n_modes, cutoff };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_modes.is_multiple_of(2) {
            return Err(Error::Domain(format!(
                "n_modes must be odd, got {}",
                self.n_modes
            )));
        }
        if !(self.cutoff.is_finite() && self.cutoff >= 5.0) {
            return Err(Error::Domain(format!(
                "cutoff must be >= 5, got {}",
                self.cutoff
            )));
        }
        Ok(())
    }

    /// Mode spacing for a reservoir of linewidth `lambda`.
    pub fn spacing(&self, lambda: f64) -> f64 {
        2.0 * self.cutoff * lambda / self.n_modes as f64
    }
}

/// Integrates the memory-kernel equation on `grid` with fixed-step RK4.
pub fn memory_kernel_solve(params: &CavityParams, grid: &TimeGrid) -> Result<Vec<Complex64>> {
    params.validate()?;
    grid.validate()?;
    let h = grid.step();
    let rate = params.lambda.max(params.omega).max(params.delta.abs());
    if h * rate > MAX_STEP_RATE {
        return Err(Error::Resolution {
            step: h,
            rate,
            limit: MAX_STEP_RATE,
        });
    }

    let om2 = params.omega * params.omega;
    let a = params.damping();
    let deriv = |e: Complex64, z: Complex64| (-om2 * z, e - a * z);

    let mut e = Complex64::new(1.0, 0.0);
    let mut z = Complex64::new(0.0, 0.0);
    let mut out = Vec::with_capacity(grid.n_steps);
    out.push(e);
    for _ in 1..grid.n_steps {
        let (k1e, k1z) = deriv(e, z);
        let (k2e, k2z) = deriv(e + k1e * (0.5 * h), z + k1z * (0.5 * h));
        let (k3e, k3z) = deriv(e + k2e * (0.5 * h), z + k2z * (0.5 * h));
        let (k4e, k4z) = deriv(e + k3e * h, z + k3z * h);
        e += (k1e + 2.0 * k2e + 2.0 * k3e + k4e) * (h / 6.0);
        z += (k1z + 2.0 * k2z + 2.0 * k3z + k4z) * (h / 6.0);
        out.push(e);
    }
    Ok(out)
}

/// A discretized reservoir: mode detunings from the atom and their couplings.
///
/// In the frame rotating with the atom the single-excitation generator is
/// the arrowhead matrix `[[0, g^T], [g, diag(d)]]` with `d_k = omega_k - omega_atom`.
#[derive(Debug, Clone)]
pub struct ModeBath {
    /// Mode offsets from the cavity frequency, ascending.
    offsets: Vec<f64>,
    spacing: f64,
    delta: f64,
    /// `|g_k|^2 = J(omega_k) * spacing`.
    weights: Vec<f64>,
}

impl ModeBath {
    pub fn new(params: &CavityParams, disc: &ModeDiscretization) -> Result<Self> {
        params.validate()?;
        disc.validate()?;
        if params.lambda <= 0.0 {
            return Err(Error::Domain(
                "mode discretization needs a finite linewidth (lambda > 0)".into(),
            ));
        }
        let sd = SpectralDensity::new(*params);
        let spacing = disc.spacing(params.lambda);
        let centre = (disc.n_modes - 1) as f64 / 2.0;
        let offsets: Vec<f64> = (0..disc.n_modes)
            .map(|k| (k as f64 - centre) * spacing)
            .collect();
        let weights = offsets
            .iter()
            .map(|&x| sd.density(x).map(|j| j * spacing))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            offsets,
            spacing,
            delta: params.delta,
            weights,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.offsets.len()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Recurrence time `2 pi / spacing` of the discrete bath.
    pub fn recurrence_time(&self) -> f64 {
        2.0 * PI / self.spacing
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn pole(&self, k: usize) -> f64 {
        self.offsets[k] - self.delta
    }

    /// `pole(i) - pole(j)` without the rounding of the absolute positions.
    fn pole_gap(&self, i: usize, j: usize) -> f64 {
        (i as f64 - j as f64) * self.spacing
    }

    /// `mu - pole(j)` for `mu = pole(origin) + tau`.
    fn shifted(&self, origin: usize, tau: f64, j: usize) -> f64 {
        self.pole_gap(origin, j) + tau
    }

    /// Secular function `mu - sum_j w_j / (mu - d_j)` at `mu = pole(origin) + tau`.
    fn secular(&self, origin: usize, tau: f64) -> f64 {
        let sum: f64 = self
            .weights
            .iter()
            .enumerate()
            .map(|(j, w)| w / self.shifted(origin, tau, j))
            .sum();
        self.pole(origin) + tau - sum
    }

    /// Bisects the increasing secular function for `tau` in `(lo, hi)`.
    fn bisect_secular(&self, origin: usize, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.secular(origin, mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Exact spectral decomposition of the generator.
    pub fn eigensystem(&self) -> BathEigensystem {
        let n = self.n_modes();
        let total = self.total_weight();
        let margin = total.sqrt() + 1.0;
        let mut roots = Vec::with_capacity(n + 1);

        // Below the lowest pole.
        let lower = self.pole(0).min(0.0) - margin;
        roots.push((0, self.bisect_secular(0, lower - self.pole(0), 0.0)));
        // One root between each pair of neighbouring poles, referenced to the
        // nearer pole so that tau keeps full relative precision.
        for k in 0..n.saturating_sub(1) {
            let half = 0.5 * self.spacing;
            if self.secular(k, half) > 0.0 {
                roots.push((k, self.bisect_secular(k, 0.0, half)));
            } else {
                roots.push((k + 1, self.bisect_secular(k + 1, -half, 0.0)));
            }
        }
        // Above the highest pole.
        let last = n - 1;
        let upper = self.pole(last).max(0.0) + margin;
        roots.push((last, self.bisect_secular(last, 0.0, upper - self.pole(last))));

        let modes = roots
            .into_iter()
            .map(|(origin, tau)| {
                let norm: f64 = self
                    .weights
                    .iter()
                    .enumerate()
                    .map(|(j, w)| {
                        let d = self.shifted(origin, tau, j);
                        w / (d * d)
                    })
                    .sum();
                Eigenmode {
                    origin,
                    tau,
                    energy: self.pole(origin) + tau,
                    atom_weight: 1.0 / (1.0 + norm),
                }
            })
            .collect();
        BathEigensystem {
            bath: self.clone(),
            modes,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Eigenmode {
    origin: usize,
    tau: f64,
    energy: f64,
    /// Squared overlap of the eigenvector with the excited atom.
    atom_weight: f64,
}

/// Eigen-decomposition of a [`ModeBath`] generator.
#[derive(Debug, Clone)]
pub struct BathEigensystem {
    bath: ModeBath,
    modes: Vec<Eigenmode>,
}

impl BathEigensystem {
    /// Excited-atom amplitude `c_e(t) = sum_j |v_{e,j}|^2 e^{-i mu_j t}`.
    pub fn excited_amplitude(&self, t: f64) -> Complex64 {
        self.modes
            .iter()
            .map(|m| Complex64::from_polar(m.atom_weight, -m.energy * t))
            .sum()
    }

    /// Mode amplitudes `|c_k(t)|` (the rotating-frame phase is dropped).
    pub fn mode_magnitudes(&self, t: f64) -> Vec<f64> {
        let bath = &self.bath;
        (0..bath.n_modes())
            .map(|k| {
                let sum: Complex64 = self
                    .modes
                    .iter()
                    .map(|m| {
                        let gap = bath.shifted(m.origin, m.tau, k);
                        Complex64::from_polar(m.atom_weight / gap, -m.energy * t)
                    })
                    .sum();
                bath.weights[k].sqrt() * sum.norm()
            })
            .collect()
    }

    /// `|c_e|^2 + sum_k |c_k|^2`, which the exact evolution keeps at 1.
    pub fn total_norm(&self, t: f64) -> f64 {
        self.excited_amplitude(t).norm_sqr()
            + self
                .mode_magnitudes(t)
                .iter()
                .map(|c| c * c)
                .sum::<f64>()
    }

    pub fn energies(&self) -> impl Iterator<Item = f64> + '_ {
        self.modes.iter().map(|m| m.energy)
    }
}

/// Evolves the atom coupled to a finite set of reservoir modes and returns
/// the excited amplitude on `grid`.
pub fn discretized_modes_solve(
    params: &CavityParams,
    disc: &ModeDiscretization,
    grid: &TimeGrid,
) -> Result<Vec<Complex64>> {
    grid.validate()?;
    let bath = ModeBath::new(params, disc)?;
    if grid.t_max > bath.recurrence_time() {
        return Err(Error::Aliasing {
            horizon: grid.t_max,
            recurrence: bath.recurrence_time(),
        });
    }
    let eig = bath.eigensystem();
    Ok(grid.times().map(|t| eig.excited_amplitude(t)).collect())
}
