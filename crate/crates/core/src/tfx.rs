//! Frequency response from steady-state simulation.
//!
//! Magnitudes are ratios of output amplitude to input amplitude; mixed
//! force/moment cells carry units of m or 1/m accordingly.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::math::db;
use crate::model::{ManipulatorModel, ReactionOutputs};
use crate::simulate::{
    default_ramp, integrate, natural_frequencies, ExcitationSpec, InputChannel, IntegrationOptions, Trajectory,
};

/// Magnitude treated as zero, relative to a unit input.
pub const NOISE_FLOOR_DB: f64 = -180.0;

/// Fraction of the amplitude the fit residual may reach before the
/// response is flagged as not yet periodic.
pub const RESIDUAL_LIMIT: f64 = 0.05;

/// Periods at the end of a run used for amplitude extraction.
pub const FIT_PERIODS: f64 = 5.0;

/// Relative amplitude error still expected from a decaying transient at the
/// end of a run; larger estimates make the run longer.
pub const SETTLE_TOL: f64 = 1e-5;

/// Ground reaction channel in world axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutputChannel {
    Fx,
    Fy,
    Fz,
    Mx,
    My,
    Mz,
}

impl OutputChannel {
    pub const ALL: [OutputChannel; 6] = [Self::Fx, Self::Fy, Self::Fz, Self::Mx, Self::My, Self::Mz];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn value(self, r: &ReactionOutputs) -> f64 {
        let i = self.index();
        if i < 3 {
            r.total_force[i]
        } else {
            r.ground_moment[i - 3]
        }
    }

    pub fn unit(self) -> &'static str {
        if self.index() < 3 {
            "N"
        } else {
            "N*m"
        }
    }
}

impl fmt::Display for OutputChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(["Fx", "Fy", "Fz", "Mx", "My", "Mz"][self.index()])
    }
}

impl FromStr for OutputChannel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.replace('_', "").to_ascii_lowercase();
        let i = ["fx", "fy", "fz", "mx", "my", "mz"]
            .iter()
            .position(|c| *c == key)
            .ok_or_else(|| Error::invalid("output channel", format!("`{s}` is not one of Fx Fy Fz Mx My Mz")))?;
        Ok(Self::ALL[i])
    }
}

/// Least-squares fit of `a sin(ωt) + b cos(ωt) + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidFit {
    pub sin: f64,
    pub cos: f64,
    pub offset: f64,
    pub residual_rms: f64,
}

impl SinusoidFit {
    pub fn amplitude(&self) -> f64 {
        self.sin.hypot(self.cos)
    }

    pub fn is_periodic(&self) -> bool {
        self.residual_rms <= RESIDUAL_LIMIT * self.amplitude()
    }
}

/// Fits the samples at or after `from`.
pub fn fit_sinusoid(times: &[f64], values: &[f64], freq: f64, from: f64) -> Result<SinusoidFit> {
    fit_window(times, values, freq, from, f64::INFINITY)
}

/// Fits the samples in `[from, to)`.
pub fn fit_window(times: &[f64], values: &[f64], freq: f64, from: f64, to: f64) -> Result<SinusoidFit> {
    if times.len() != values.len() {
        return Err(Error::invalid("values", "length differs from times"));
    }
    let w = TAU * freq;
    let mut normal = Matrix3::zeros();
    let mut rhs = Vector3::zeros();
    let mut n = 0;
    let inside = |t: f64| t >= from && t < to;
    for (&t, &v) in times.iter().zip(values).filter(|(&t, _)| inside(t)) {
        let basis = Vector3::new((w * t).sin(), (w * t).cos(), 1.0);
        normal += basis * basis.transpose();
        rhs += basis * v;
        n += 1;
    }
    if n < 10 {
        return Err(Error::InsufficientData(format!("{n} samples in the fit window")));
    }
    let coef = normal
        .cholesky()
        .ok_or_else(|| Error::InsufficientData("fit window does not resolve the frequency".into()))?
        .solve(&rhs);
    let mut ss = 0.0;
    for (&t, &v) in times.iter().zip(values).filter(|(&t, _)| inside(t)) {
        let r = v - coef[0] * (w * t).sin() - coef[1] * (w * t).cos() - coef[2];
        ss += r * r;
    }
    Ok(SinusoidFit { sin: coef[0], cos: coef[1], offset: coef[2], residual_rms: (ss / n as f64).sqrt() })
}

/// Steady-state fit of one output over the final five periods.
pub fn steady_state_amplitude(traj: &Trajectory, freq: f64, output: OutputChannel) -> Result<SinusoidFit> {
    let end = *traj.times.last().ok_or_else(|| Error::InsufficientData("empty trajectory".into()))?;
    let values: Vec<f64> = traj.reactions.iter().map(|r| output.value(r)).collect();
    fit_sinusoid(&traj.times, &values, freq, end - FIT_PERIODS / freq)
}

/// Default excitation amplitude, N or N·m. Near the lightly damped resonances a
/// unit load moves the payload by millimetres and the quadratic couplings into
/// heave reach -70 dB; they scale with the amplitude, so 1 nN puts them some
/// 30 dB under the noise floor.
pub const DEFAULT_AMPLITUDE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TfOptions {
    pub amplitude: f64,
    /// Ramp duration; derived from frequency and modal damping when absent.
    pub ramp: Option<f64>,
    /// Periods simulated after the ramp.
    pub settle_periods: f64,
    pub rel_tol: f64,
    /// Smallest modal damping ratio; computed from the model when absent.
    pub min_damping: Option<f64>,
    /// Allow longer runs when the response is still settling.
    pub extend: bool,
}

impl Default for TfOptions {
    fn default() -> Self {
        Self { amplitude: DEFAULT_AMPLITUDE, ramp: None, settle_periods: 10.0, rel_tol: 1e-9, min_damping: None, extend: true }
    }
}

impl TfOptions {
    /// Fills in the damping ratio from a modal analysis if needed.
    pub fn resolved(&self, model: &ManipulatorModel) -> Result<Self> {
        let mut o = *self;
        if o.min_damping.is_none() {
            o.min_damping = Some(natural_frequencies(model)?.min_damping_ratio());
        }
        Ok(o)
    }

    pub fn ramp_for(&self, freq: f64) -> f64 {
        self.ramp.unwrap_or_else(|| default_ramp(freq, self.min_damping.unwrap_or(0.0)))
    }
}

/// Steady response of all six outputs to one load pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct Response {
    pub frequency: f64,
    pub amplitude: f64,
    pub ramp: f64,
    /// Periods simulated after the ramp, including any extension.
    pub settle_periods: f64,
    pub fits: [SinusoidFit; 6],
}

impl Response {
    /// Transmissibility of one output.
    pub fn ratio(&self, output: OutputChannel) -> f64 {
        self.fits[output.index()].amplitude() / self.amplitude.abs()
    }

    /// Transmissibility of the output combination `weights · [F, M]`.
    pub fn projected_ratio(&self, weights: &[f64; 6]) -> f64 {
        let (mut s, mut c) = (0.0, 0.0);
        for (w, f) in weights.iter().zip(&self.fits) {
            s += w * f.sin;
            c += w * f.cos;
        }
        s.hypot(c) / self.amplitude.abs()
    }
}

/// Simulates the load pattern `direction` at `freq` and fits all outputs.
///
/// Near a lightly damped resonance the response envelope trails the ramp by
/// the modal decay time. The last two fit windows tell how far the amplitude
/// still moves; if a transient decaying at the slowest modal rate would leave
/// more than [`SETTLE_TOL`], the run is repeated once with a longer settle.
pub fn steady_response(
    model: &ManipulatorModel,
    direction: [f64; 6],
    freq: f64,
    opts: &TfOptions,
) -> Result<Response> {
    if !(freq > 0.0) {
        return Err(Error::invalid("frequency", "must be positive"));
    }
    let ramp = opts.ramp_for(freq);
    let (fits, previous) = run_windows(model, direction, freq, ramp, opts.settle_periods, opts)?;
    let mut response =
        Response { frequency: freq, amplitude: opts.amplitude, ramp, settle_periods: opts.settle_periods, fits };
    let damping = opts.min_damping.unwrap_or(0.0);
    if opts.extend {
        if let Some(extra) = extra_periods(&fits, &previous, opts.amplitude, damping) {
            let extra = extra.min(2.0 * ramp * freq);
            response.settle_periods += extra;
            response.fits = run_windows(model, direction, freq, ramp, response.settle_periods, opts)?.0;
        }
    }
    Ok(response)
}

/// Fits over the last window and the one before it.
fn run_windows(
    model: &ManipulatorModel,
    direction: [f64; 6],
    freq: f64,
    ramp: f64,
    settle_periods: f64,
    opts: &TfOptions,
) -> Result<([SinusoidFit; 6], [SinusoidFit; 6])> {
    let window = FIT_PERIODS / freq;
    let duration = ramp + settle_periods / freq;
    let spec = ExcitationSpec::along(direction, freq, opts.amplitude, ramp, duration)?;
    let iopts = IntegrationOptions {
        rel_tol: opts.rel_tol,
        // the default floor is sized for unit loads
        abs_tol: IntegrationOptions::default().abs_tol * opts.amplitude.abs(),
        record_from: duration - 2.0 * window,
        ..Default::default()
    };
    let traj = integrate(model, &spec, &iopts)?;
    let end = *traj.times.last().ok_or_else(|| Error::InsufficientData("empty trajectory".into()))?;
    let empty = SinusoidFit { sin: 0.0, cos: 0.0, offset: 0.0, residual_rms: 0.0 };
    let (mut last, mut previous) = ([empty; 6], [empty; 6]);
    for out in OutputChannel::ALL {
        let values: Vec<f64> = traj.reactions.iter().map(|r| out.value(r)).collect();
        last[out.index()] = fit_window(&traj.times, &values, freq, end - window, f64::INFINITY)?;
        previous[out.index()] = fit_window(&traj.times, &values, freq, end - 2.0 * window, end - window)?;
    }
    Ok((last, previous))
}

/// Further settle periods needed for a geometric transient, if any.
fn extra_periods(last: &[SinusoidFit; 6], previous: &[SinusoidFit; 6], amplitude: f64, damping: f64) -> Option<f64> {
    if !(damping > 0.0) {
        return None;
    }
    // decay per window of a mode driven at its own frequency
    let rho = (-FIT_PERIODS * TAU * damping).exp();
    let floor = amplitude.abs() * 10f64.powf(NOISE_FLOOR_DB / 20.0);
    let mut windows = 0.0_f64;
    for (a, b) in last.iter().zip(previous) {
        let size = a.amplitude();
        if size <= floor {
            continue;
        }
        let remaining = (a.sin - b.sin).hypot(a.cos - b.cos) * rho / (1.0 - rho);
        if remaining > SETTLE_TOL * size {
            windows = windows.max((SETTLE_TOL * size / remaining).ln() / rho.ln());
        }
    }
    (windows > 0.0).then(|| windows.ceil() * FIT_PERIODS)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TfPoint {
    pub frequency: f64,
    pub input: InputChannel,
    pub output: OutputChannel,
    pub ratio: f64,
    pub output_amplitude: f64,
    /// False when the fit residual suggests the run had not settled.
    pub steady: bool,
}

impl TfPoint {
    pub fn db(&self) -> f64 {
        db(self.ratio)
    }
}

pub fn tf_point(
    model: &ManipulatorModel,
    input: InputChannel,
    output: OutputChannel,
    freq: f64,
    opts: &TfOptions,
) -> Result<TfPoint> {
    let opts = opts.resolved(model)?;
    let r = steady_response(model, input.direction(), freq, &opts)?;
    let fit = r.fits[output.index()];
    Ok(TfPoint {
        frequency: freq,
        input,
        output,
        ratio: r.ratio(output),
        output_amplitude: fit.amplitude(),
        steady: fit.is_periodic(),
    })
}

/// Transfer-function magnitudes on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TfMatrix {
    pub frequencies: Vec<f64>,
    /// `ratios[k][out][in]` at `frequencies[k]`.
    pub ratios: Vec<[[f64; 6]; 6]>,
    /// Cells whose fit did not look periodic, as `(k, out, in)`.
    pub unsettled: Vec<(usize, usize, usize)>,
}

impl TfMatrix {
    /// Magnitude series of one cell in dB.
    pub fn series_db(&self, output: OutputChannel, input: InputChannel) -> Vec<f64> {
        self.ratios.iter().map(|h| db(h[output.index()][input.index()])).collect()
    }
}

/// Runs every input channel at every grid frequency in parallel.
pub fn tf_matrix(model: &ManipulatorModel, grid: &[f64], opts: &TfOptions) -> Result<TfMatrix> {
    if grid.iter().any(|f| !(*f > 0.0)) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("grid", "frequencies must be positive and increasing"));
    }
    let opts = opts.resolved(model)?;
    let jobs: Vec<(usize, InputChannel)> =
        (0..grid.len()).flat_map(|k| InputChannel::ALL.map(|c| (k, c))).collect();
    let results: Vec<Response> = jobs
        .par_iter()
        .map(|&(k, c)| steady_response(model, c.direction(), grid[k], &opts))
        .collect::<Result<_>>()?;

    let mut ratios = vec![[[0.0; 6]; 6]; grid.len()];
    let mut unsettled = Vec::new();
    for (&(k, input), r) in jobs.iter().zip(&results) {
        for out in OutputChannel::ALL {
            let ratio = r.ratio(out);
            ratios[k][out.index()][input.index()] = ratio;
            if !r.fits[out.index()].is_periodic() && db(ratio) > NOISE_FLOOR_DB {
                unsettled.push((k, out.index(), input.index()));
            }
        }
    }
    Ok(TfMatrix { frequencies: grid.to_vec(), ratios, unsettled })
}

/// Log-spaced grid with `per_decade` points per decade, both ends included.
pub fn log_grid(f_min: f64, f_max: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(f_min > 0.0 && f_max > f_min) || per_decade == 0 {
        return Err(Error::invalid("grid", "need 0 < f_min < f_max and a positive density"));
    }
    let (lo, hi) = (f_min.log10(), f_max.log10());
    let n = ((hi - lo) * per_decade as f64 - 1e-9).ceil() as usize;
    Ok((0..=n).map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / n as f64)).collect())
}

/// Least-squares slope in dB per decade over `[f_lo, f_hi]`.
pub fn slope_fit(freqs: &[f64], mags_db: &[f64], f_lo: f64, f_hi: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = freqs
        .iter()
        .zip(mags_db)
        .filter(|(f, _)| **f >= f_lo * (1.0 - 1e-12) && **f <= f_hi * (1.0 + 1e-12))
        .map(|(f, m)| (f.log10(), *m))
        .collect();
    if pts.len() < 5 {
        return Err(Error::InsufficientData(format!("{} points in [{f_lo}, {f_hi}] Hz", pts.len())));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Cells that vanish for a three-fold symmetric platform, as `(out, in)`.
pub const STRUCTURAL_ZEROS: [(OutputChannel, InputChannel); 9] = {
    use InputChannel as I;
    use OutputChannel as O;
    [
        (O::Fz, I::Fx),
        (O::Fz, I::Fy),
        (O::Fz, I::Tx),
        (O::Fz, I::Ty),
        (O::Fz, I::Tz),
        (O::Mz, I::Fx),
        (O::Mz, I::Fy),
        (O::Mz, I::Tx),
        (O::Mz, I::Ty),
    ]
};

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroPatternReport {
    /// Largest magnitude found among the checked cells, dB.
    pub max_db: f64,
    pub worst_cell: (OutputChannel, InputChannel),
    pub worst_frequency: f64,
}

impl ZeroPatternReport {
    pub fn passed(&self) -> bool {
        self.max_db < NOISE_FLOOR_DB
    }
}

/// Largest magnitude over the given cells and all frequencies.
pub fn cells_peak(h: &TfMatrix, cells: &[(OutputChannel, InputChannel)]) -> ZeroPatternReport {
    let mut report = ZeroPatternReport {
        max_db: f64::NEG_INFINITY,
        worst_cell: cells[0],
        worst_frequency: h.frequencies.first().copied().unwrap_or(0.0),
    };
    for (k, m) in h.ratios.iter().enumerate() {
        for &(o, i) in cells {
            let v = db(m[o.index()][i.index()]);
            if v > report.max_db {
                report = ZeroPatternReport { max_db: v, worst_cell: (o, i), worst_frequency: h.frequencies[k] };
            }
        }
    }
    report
}

pub fn zero_pattern_check(h: &TfMatrix) -> ZeroPatternReport {
    cells_peak(h, &STRUCTURAL_ZEROS)
}

/// Largest dB gap between two cells over the grid; points where both
/// cells sit below the noise floor count as equal.
pub fn pair_deviation(h: &TfMatrix, a: (OutputChannel, InputChannel), b: (OutputChannel, InputChannel)) -> f64 {
    h.ratios
        .iter()
        .map(|m| {
            let x = db(m[a.0.index()][a.1.index()]);
            let y = db(m[b.0.index()][b.1.index()]);
            if x < NOISE_FLOOR_DB && y < NOISE_FLOOR_DB {
                0.0
            } else {
                (x - y).abs()
            }
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sampled(freq: f64, duration: f64, f: impl Fn(f64) -> f64) -> (Vec<f64>, Vec<f64>) {
        let n = (duration * freq * 40.0) as usize;
        let t: Vec<f64> = (0..=n).map(|i| i as f64 / (40.0 * freq)).collect();
        let v = t.iter().map(|&t| f(t)).collect();
        (t, v)
    }

    #[test]
    fn exact_sinusoid() {
        let w = TAU * 0.8;
        let (t, v) = sampled(0.8, 20.0, |t| 1.39 * (w * t + 0.4).sin() + 0.2);
        let fit = fit_sinusoid(&t, &v, 0.8, 20.0 - 5.0 / 0.8).unwrap();
        assert!((fit.amplitude() - 1.39).abs() < 1e-9);
        assert!((fit.offset - 0.2).abs() < 1e-9);
        assert!(fit.is_periodic());
    }

    #[test]
    fn decaying_transient_is_tolerated() {
        let f = 1.0;
        let w = TAU * f;
        let dur = 60.0;
        // transient starts at 10% of the amplitude and decays linearly to zero
        let (t, v) = sampled(f, dur, |t| (w * t).sin() + 0.1 * (1.0 - t / dur) * (0.37 * w * t).sin());
        let fit = fit_sinusoid(&t, &v, f, dur - 5.0).unwrap();
        assert!((fit.amplitude() - 1.0).abs() < 5e-3);
    }

    #[test]
    fn window_ignores_samples_outside() {
        let w = TAU;
        let (t, v) = sampled(1.0, 20.0, |t| if t < 10.0 { 3.0 * (w * t).sin() } else { (w * t).cos() });
        let early = fit_window(&t, &v, 1.0, 5.0, 10.0).unwrap();
        let late = fit_window(&t, &v, 1.0, 10.0, 15.0).unwrap();
        assert!((early.sin - 3.0).abs() < 1e-12 && early.cos.abs() < 1e-12);
        assert!(late.sin.abs() < 1e-12 && (late.cos - 1.0).abs() < 1e-12);
    }

    fn fit(sin: f64, cos: f64) -> SinusoidFit {
        SinusoidFit { sin, cos, offset: 0.0, residual_rms: 0.0 }
    }

    #[test]
    fn settle_extension_follows_the_drift() {
        let rest = [fit(0.0, 0.0); 6];
        let mut last = rest;
        let mut previous = rest;
        last[0] = fit(1.0, 0.0);
        previous[0] = fit(1.0, 0.0);
        assert_eq!(extra_periods(&last, &previous, 1.0, 0.01), None);
        previous[0] = fit(0.99, 0.0);
        let extra = extra_periods(&last, &previous, 1.0, 0.01).unwrap();
        // drift 1e-2 per window decaying by rho: the tail must shrink below 1e-5
        let rho = (-FIT_PERIODS * TAU * 0.01_f64).exp();
        let tail = 1e-2 * rho / (1.0 - rho) * rho.powf(extra / FIT_PERIODS);
        assert!(tail <= 1e-5 && tail > 1e-5 * rho);
        assert_eq!(extra_periods(&last, &previous, 1.0, 0.0), None);
        // outputs under the noise floor never ask for more time
        last[0] = fit(1e-12, 0.0);
        previous[0] = fit(0.0, 1e-12);
        assert_eq!(extra_periods(&last, &previous, 1.0, 0.01), None);
    }

    #[test]
    fn too_few_samples() {
        assert!(fit_sinusoid(&[0.0, 1.0], &[0.0, 1.0], 1.0, 0.0).is_err());
    }

    #[test]
    fn slopes_of_power_laws() {
        let f = log_grid(100.0, 1000.0, 30).unwrap();
        let inv2: Vec<f64> = f.iter().map(|f| db(1.0 / (f * f))).collect();
        let inv1: Vec<f64> = f.iter().map(|f| db(1.0 / f)).collect();
        let flat = vec![-3.0; f.len()];
        assert!((slope_fit(&f, &inv2, 100.0, 1000.0).unwrap() + 40.0).abs() < 1e-9);
        assert!((slope_fit(&f, &inv1, 100.0, 1000.0).unwrap() + 20.0).abs() < 1e-9);
        assert!(slope_fit(&f, &flat, 100.0, 1000.0).unwrap().abs() < 1e-12);
        assert!(slope_fit(&f, &flat, 500.0, 510.0).is_err());
    }

    #[test]
    fn grid_density() {
        let g = log_grid(0.1, 1000.0, 30).unwrap();
        assert_eq!(g.len(), 121);
        assert!((g[0] - 0.1).abs() < 1e-15 && (g[120] - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn channel_names() {
        for c in OutputChannel::ALL {
            assert_eq!(c.to_string().parse::<OutputChannel>().unwrap(), c);
        }
    }
}
