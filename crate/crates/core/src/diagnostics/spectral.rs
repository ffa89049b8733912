//! Lattice spectra of grid fields and the spectral tail beyond a fixed head.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::ap::{ApSignal, FrequencySet};
use crate::error::{Error, Result};
use crate::solver::{Field, Trajectory};

/// Signed lattice index of DFT bin `j` out of `n`, in `[-n/2, n/2)`.
fn signed(j: usize, n: usize) -> i64 {
    if j < n.div_ceil(2) {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Discrete Fourier coefficients `a_k = mean_c u_c e^{-2πi k·j/N}` as a
/// signal on the lattice `Z^d / L`.
pub fn field_spectrum(field: &Field) -> Result<ApSignal> {
    let grid = field.grid();
    let cells = grid.cells();
    let total = grid.len();
    let mut data: Vec<Complex64> = field.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    match cells.len() {
        1 => planner.plan_fft_forward(cells[0]).process(&mut data),
        _ => {
            let (nx, ny) = (cells[0], cells[1]);
            let fy = planner.plan_fft_forward(ny);
            for row in data.chunks_mut(ny) {
                fy.process(row);
            }
            let fx = planner.plan_fft_forward(nx);
            let mut col = vec![Complex64::new(0.0, 0.0); nx];
            for iy in 0..ny {
                for ix in 0..nx {
                    col[ix] = data[ix * ny + iy];
                }
                fx.process(&mut col);
                for ix in 0..nx {
                    data[ix * ny + iy] = col[ix];
                }
            }
        }
    }
    let inv = 1.0 / total as f64;
    let terms = data.into_iter().enumerate().map(|(c, a)| {
        let freq: Vec<f64> = if cells.len() == 1 {
            vec![signed(c, cells[0]) as f64 / grid.lengths()[0]]
        } else {
            let (ix, iy) = (c / cells[1], c % cells[1]);
            vec![
                signed(ix, cells[0]) as f64 / grid.lengths()[0],
                signed(iy, cells[1]) as f64 / grid.lengths()[1],
            ]
        };
        (freq, a * inv)
    });
    ApSignal::from_terms(cells.len(), terms)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    /// Frequencies of the retained head, largest `|a|` first.
    pub head: Vec<Vec<f64>>,
    /// `Σ |a_λ|²` beyond the head at `t = 0`.
    pub initial_tail: f64,
    /// `(t, tail)` per stored snapshot.
    pub series: Vec<(f64, f64)>,
    pub max_tail: f64,
    pub tolerance: f64,
    /// `max_tail <= initial_tail + tolerance`
    pub pass: bool,
}

/// The `head` largest-amplitude lattice modes of the initial field (ties broken
/// by frequency order) and the tail mass beyond them along the trajectory.
pub fn tail_uniformity(traj: &Trajectory, head: usize, tolerance: f64) -> Result<TailReport> {
    if traj.fields.is_empty() {
        return Err(Error::InsufficientSnapshots { needed: 1, have: 0 });
    }
    let initial = field_spectrum(&traj.fields[0])?;
    let mut ranked: Vec<(Vec<f64>, f64)> = initial.terms().map(|(f, a)| (f.to_vec(), a.norm())).collect();
    // stable sort keeps the canonical frequency order among equal amplitudes
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    ranked.truncate(head);
    let head_freqs: Vec<Vec<f64>> = ranked.into_iter().map(|r| r.0).collect();
    let set = FrequencySet::from_members(initial.dims(), head_freqs.clone())?;
    let initial_tail = initial.spectral_tail_mass(&set);
    let mut series = Vec::with_capacity(traj.fields.len());
    for (snap, f) in traj.snapshots.iter().zip(&traj.fields) {
        series.push((snap.time, field_spectrum(f)?.spectral_tail_mass(&set)));
    }
    let max_tail = series.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(TailReport {
        head: head_freqs,
        initial_tail,
        series,
        max_tail,
        tolerance,
        pass: max_tail <= initial_tail + tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{init_field, GridSpec};

    #[test]
    fn spectrum_recovers_modes() {
        let g = GridSpec::new(vec![2.0, 1.0], vec![16, 8]).unwrap();
        let sig = ApSignal::sine(vec![0.5, 1.0], 0.6, 0.3)
            .add(&ApSignal::constant(2, 0.2))
            .unwrap();
        let f = init_field(&sig, &g).unwrap();
        let spec = field_spectrum(&f).unwrap();
        assert!((spec.mean_value().re - 0.2).abs() < 1e-15);
        // cell averaging damps a mode by sinc(πk/N) per axis
        let damp = |k: f64, n: f64| (std::f64::consts::PI * k / n).sin() / (std::f64::consts::PI * k / n);
        let a = spec.fourier_coefficient(&[0.5, 1.0]).unwrap().norm();
        assert!((a - 0.3 * damp(1.0, 16.0) * damp(1.0, 8.0)).abs() < 1e-14);
        let parseval: f64 = f.values().iter().map(|v| v * v).sum::<f64>() / 128.0;
        assert!((spec.energy() - parseval).abs() < 1e-14);
    }
}
