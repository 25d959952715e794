use std::fs;
use std::path::{Path, PathBuf};

use pinslider::bipod2d;
use pinslider::config::{parse_angle, AnalysisSection, AngleUnit, ModelFile};
use pinslider::math::db;
use pinslider::model::{build_hexapod, Formulation, ManipulatorModel};
use pinslider::presets::{self, Preset};
use pinslider::series::{Column, Series};
use pinslider::simulate::{
    default_ramp, integrate, natural_frequencies, ExcitationSpec, InputChannel, IntegrationOptions,
};
use pinslider::structure::{maxwell2d, mobility3d, Maxwell2dCounts, Mobility3dCounts};
use pinslider::tfx::{self, OutputChannel, TfOptions};
use pinslider::{Error, Result};

use crate::{Command, GridArgs, ModelSource, RunArgs};

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Bipod2dTf { model, alpha, grid, out } => bipod_tf(&model, &alpha, &grid, &out.dir()),
        Command::Check { maxwell, mobility } => check(maxwell, mobility),
        Command::Modes { model } => modes(&model),
        Command::TfPoint { model, input, output, freq, run } => tf_point(&model, &input, &output, freq, &run),
        Command::TfMatrix { model, grid, run, out } => tf_matrix(&model, &grid, &run, &out.dir()),
        Command::Simulate { model, input, freq, amplitude, ramp, duration, samples_per_period, rel_tol, out } => {
            let opts = IntegrationOptions {
                rel_tol: rel_tol.unwrap_or(IntegrationOptions::default().rel_tol),
                samples_per_period,
                ..Default::default()
            };
            simulate(&model, &input, freq, amplitude, ramp, duration, &opts, &out.dir())
        }
    }
}

struct Loaded {
    preset: Preset,
    formulation: Formulation,
    analysis: AnalysisSection,
}

impl Loaded {
    fn from(src: &ModelSource) -> Result<Self> {
        match (&src.preset, &src.config) {
            (Some(name), None) => {
                Ok(Self { preset: presets::load(name)?, formulation: Formulation::Link, analysis: Default::default() })
            }
            (None, Some(path)) => {
                let file = ModelFile::read(path)?;
                Ok(Self { preset: file.preset()?, formulation: file.formulation(), analysis: file.analysis })
            }
            _ => Err(Error::Config("give exactly one of --preset and --config".into())),
        }
    }

    fn model(&self) -> Result<ManipulatorModel> {
        match &self.preset {
            Preset::Hexapod { geometry, strut, payload } => build_hexapod(geometry, strut, payload, self.formulation),
            Preset::Bipod { .. } => Err(Error::Config("this analysis needs a hexapod model".into())),
        }
    }

    fn grid(&self, g: &GridArgs) -> Result<Vec<f64>> {
        let a = &self.analysis;
        let f_min = g.fmin.or(a.fmin).unwrap_or(0.1);
        let f_max = g.fmax.or(a.fmax).unwrap_or(1000.0);
        tfx::log_grid(f_min, f_max, g.per_decade.or(a.points_per_decade).unwrap_or(30))
    }

    fn tf_options(&self, r: &RunArgs) -> TfOptions {
        let a = &self.analysis;
        let d = TfOptions::default();
        TfOptions {
            amplitude: r.amplitude.or(a.amplitude).unwrap_or(d.amplitude),
            ramp: r.ramp.or(a.ramp),
            settle_periods: r.settle_periods.or(a.settle_periods).unwrap_or(d.settle_periods),
            rel_tol: r.rel_tol.or(a.rel_tol).unwrap_or(d.rel_tol),
            min_damping: None,
            extend: !r.fixed_settle,
        }
    }
}

fn output_path(dir: &Path, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))?;
    Ok(dir.join(name))
}

fn bipod_tf(src: &ModelSource, alpha: &str, grid: &GridArgs, dir: &Path) -> Result<()> {
    let loaded = Loaded::from(src)?;
    let Preset::Bipod { strut, payload_mass } = loaded.preset else {
        return Err(Error::Config("bipod2d-tf needs a planar bipod model".into()));
    };
    let alpha = parse_angle(alpha, Some(AngleUnit::Radians))?;
    let freqs = loaded.grid(grid)?;
    let coeffs = bipod2d::coefficients(&strut, payload_mass)?;
    let (k_eq, c_eq) = bipod2d::massless_equivalent(&strut, payload_mass)?;

    let mut series = Series::new(
        ["frequency [Hz]", "axial [dB]", "shear [dB]", "joint1_total [dB]", "joint2_total [dB]", "massless [dB]"]
            .iter()
            .map(|l| label(l))
            .collect(),
    )?;
    for &f in &freqs {
        let (b1, b2) = bipod2d::tf_base_joints(&coeffs, &strut, f, alpha);
        series.push_row(&[
            f,
            db(bipod2d::tf_axial(&coeffs, &strut, f).norm()),
            db(bipod2d::tf_shear(&coeffs, &strut, f).norm()),
            db(bipod2d::total_force_magnitude(&b1)),
            db(bipod2d::total_force_magnitude(&b2)),
            db(bipod2d::oscillator_tf(k_eq, c_eq, payload_mass, f).norm()),
        ])?;
    }
    let path = output_path(dir, "bipod2d-tf.tsv")?;
    series.write(&path)?;

    println!("dynamic mass      {:.6} kg", coeffs.dyn_mass);
    println!("strut inertia     {:.6e} kg*m^2", coeffs.strut_inertia);
    println!("lambda            {:.6e}", coeffs.lambda);
    println!("shear plateau     {:.2} dB", db(coeffs.lambda));
    println!("resonance         {:.4} Hz", bipod2d::natural_frequency(&coeffs, &strut));
    println!("massless resonance {:.4} Hz", (k_eq / payload_mass).sqrt() / std::f64::consts::TAU);
    println!("wrote {}", path.display());
    Ok(())
}

fn label(text: &str) -> Column {
    let (name, unit) = text.trim_end_matches(']').split_once(" [").expect("static label");
    Column::new(name, unit)
}

fn key_values(items: &[String]) -> Result<Vec<(String, String)>> {
    items
        .iter()
        .flat_map(|s| s.split_whitespace())
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.to_ascii_lowercase(), v.to_string()))
                .ok_or_else(|| Error::Config(format!("expected KEY=VALUE, got `{kv}`")))
        })
        .collect()
}

fn count(key: &str, value: &str) -> Result<u32> {
    value.parse().map_err(|_| Error::Config(format!("`{key}` must be a non-negative integer, got `{value}`")))
}

// `3,3,6*1` expands to [3, 3, 1, 1, 1, 1, 1, 1].
fn freedoms(list: &str) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for item in list.split(',').filter(|s| !s.is_empty()) {
        match item.split_once('*') {
            Some((n, f)) => out.extend(std::iter::repeat(count("f", f)?).take(count("f", n)? as usize)),
            None => out.push(count("f", item)?),
        }
    }
    Ok(out)
}

fn check(maxwell: Option<Vec<String>>, mobility: Option<Vec<String>>) -> Result<()> {
    if let Some(items) = maxwell {
        let (mut j, mut s, mut r) = (None, None, None);
        for (k, v) in key_values(&items)? {
            match k.as_str() {
                "j" => j = Some(count("j", &v)?),
                "s" => s = Some(count("s", &v)?),
                "r" => r = Some(count("r", &v)?),
                _ => return Err(Error::Config(format!("unknown key `{k}` (use j, s, r)"))),
            }
        }
        let need = |x: Option<u32>, k: &str| x.ok_or_else(|| Error::Config(format!("missing `{k}=`")));
        let c = Maxwell2dCounts { joints: need(j, "j")?, members: need(s, "s")?, reactions: need(r, "r")? };
        let (n, class) = maxwell2d(c);
        println!("n={n}, {class}");
    }
    if let Some(items) = mobility {
        let mut c = Mobility3dCounts { bodies: 0, internal_dofs: 0, joint_freedoms: Vec::new() };
        for (k, v) in key_values(&items)? {
            match k.as_str() {
                "n" => c.bodies = count("n", &v)?,
                "b" => c.internal_dofs = count("b", &v)?,
                "f" => c.joint_freedoms = freedoms(&v)?,
                _ => return Err(Error::Config(format!("unknown key `{k}` (use n, b, f)"))),
            }
        }
        println!("M={}", mobility3d(&c)?);
    }
    Ok(())
}

fn modes(src: &ModelSource) -> Result<()> {
    let model = Loaded::from(src)?.model()?;
    let report = natural_frequencies(&model)?;
    println!("{:>14}  {:>13}  {:>4}  kind", "frequency [Hz]", "damping ratio", "mult");
    for m in &report.modes {
        println!("{:>14.5}  {:>13.5e}  {:>4}  {}", m.frequency, m.damping_ratio, m.multiplicity, m.kind);
    }
    Ok(())
}

fn tf_point(src: &ModelSource, input: &str, output: &str, freq: f64, run: &RunArgs) -> Result<()> {
    let loaded = Loaded::from(src)?;
    let model = loaded.model()?;
    let input: InputChannel = input.parse()?;
    let output: OutputChannel = output.parse()?;
    let opts = loaded.tf_options(run).resolved(&model)?;
    let p = tfx::tf_point(&model, input, output, freq, &opts)?;
    println!(
        "H({output} <- {input}) at {freq} Hz: {:.6} ({:.3} dB); output amplitude {:.6e} {} for input {:e} {}; ramp {:.2} s",
        p.ratio,
        p.db(),
        p.output_amplitude,
        output.unit(),
        opts.amplitude,
        input.unit(),
        opts.ramp_for(freq),
    );
    if !p.steady {
        eprintln!("warning: fit residual above {}% of the amplitude; the run may not have settled", tfx::RESIDUAL_LIMIT * 100.0);
    }
    Ok(())
}

fn tf_matrix(src: &ModelSource, grid: &GridArgs, run: &RunArgs, dir: &Path) -> Result<()> {
    let loaded = Loaded::from(src)?;
    let model = loaded.model()?;
    let freqs = loaded.grid(grid)?;
    let h = tfx::tf_matrix(&model, &freqs, &loaded.tf_options(run))?;
    for out in OutputChannel::ALL {
        for input in InputChannel::ALL {
            let name = format!("H{}{}", out.index() + 1, input.index() + 1);
            let series = Series::from_columns(
                vec![Column::new("frequency", "Hz"), Column::new(&name, "dB")],
                vec![h.frequencies.clone(), h.series_db(out, input)],
            )?;
            series.write(&output_path(dir, &format!("{name}.tsv"))?)?;
        }
    }
    let zeros = tfx::zero_pattern_check(&h);
    println!("{} frequencies, 36 cells written to {}", freqs.len(), dir.display());
    println!(
        "structural zeros: max {:.1} dB ({} <- {} at {:.4} Hz), floor {} dB: {}",
        zeros.max_db,
        zeros.worst_cell.0,
        zeros.worst_cell.1,
        zeros.worst_frequency,
        tfx::NOISE_FLOOR_DB,
        if zeros.passed() { "ok" } else { "exceeded" }
    );
    if !h.unsettled.is_empty() {
        eprintln!("warning: {} cells did not look settled", h.unsettled.len());
    }
    Ok(())
}

const STATE_COLUMNS: [(&str, &str); 12] = [
    ("x", "m"),
    ("y", "m"),
    ("z", "m"),
    ("yaw", "rad"),
    ("pitch", "rad"),
    ("roll", "rad"),
    ("vx", "m/s"),
    ("vy", "m/s"),
    ("vz", "m/s"),
    ("wx", "rad/s"),
    ("wy", "rad/s"),
    ("wz", "rad/s"),
];

#[allow(clippy::too_many_arguments)]
fn simulate(
    src: &ModelSource,
    input: &str,
    freq: f64,
    amplitude: f64,
    ramp: Option<f64>,
    duration: f64,
    opts: &IntegrationOptions,
    dir: &Path,
) -> Result<()> {
    let model = Loaded::from(src)?.model()?;
    let input: InputChannel = input.parse()?;
    if !(freq > 0.0) {
        return Err(Error::Config("--freq must be positive".into()));
    }
    let ramp = match ramp {
        Some(r) => r,
        None => default_ramp(freq, natural_frequencies(&model)?.min_damping_ratio()),
    };
    let spec = ExcitationSpec::new(input, freq, amplitude, ramp, duration)?;
    let traj = integrate(&model, &spec, opts)?;

    let mut columns = vec![Column::new("time", "s")];
    columns.extend(STATE_COLUMNS.iter().map(|(n, u)| Column::new(*n, *u)));
    columns.extend(OutputChannel::ALL.iter().map(|o| Column::new(o.to_string(), o.unit())));
    let mut series = Series::new(columns)?;
    for ((t, y), r) in traj.times.iter().zip(&traj.states).zip(&traj.reactions) {
        let mut row = vec![*t];
        row.extend(y.iter());
        row.extend(OutputChannel::ALL.iter().map(|o| o.value(r)));
        series.push_row(&row)?;
    }
    let path = output_path(dir, "trajectory.tsv")?;
    series.write(&path)?;
    println!(
        "{} samples over {duration} s ({} steps, {} rejected); wrote {}",
        series.len(),
        traj.stats.accepted,
        traj.stats.rejected,
        path.display()
    );
    Ok(())
}
