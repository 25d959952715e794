//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary so every criterion is evaluated and printed even
//! when an earlier one fails. The process exits non-zero only if a criterion
//! could not be evaluated at all.

mod common;

use std::f64::consts::TAU;
use std::time::Instant;

use common::{displaced_state, oracle_mismatch, random_derivative, random_load, random_state, trajectory_gap};
use pinslider::bipod2d::{coefficients, tf_axial, tf_shear};
use pinslider::math::db;
use pinslider::model::{Formulation, ManipulatorModel};
use pinslider::presets::{self, HEXAPODS};
use pinslider::simulate::{
    integrate_from, natural_frequencies, ExcitationSpec, InputChannel, IntegrationOptions, ModeKind,
};
use pinslider::structure::{mobility3d, Mobility3dCounts};
use pinslider::tfx::{
    cells_peak, log_grid, pair_deviation, slope_fit, tf_matrix, tf_point, zero_pattern_check, OutputChannel,
    TfMatrix, TfOptions, DEFAULT_AMPLITUDE, NOISE_FLOOR_DB, STRUCTURAL_ZEROS,
};
use pinslider::Result;
use rand::rngs::StdRng;
use rand::SeedableRng;

type Outcome = Result<(bool, String)>;
type Cell = (OutputChannel, InputChannel);

const CONIC: &str = "hexapod-2-conic";
const SLOPE_BAND: (f64, f64) = (200.0, 1000.0);
const IN_PLANE: [Cell; 4] = [
    (OutputChannel::Fy, InputChannel::Tx),
    (OutputChannel::Fx, InputChannel::Ty),
    (OutputChannel::Mx, InputChannel::Fy),
    (OutputChannel::My, InputChannel::Fx),
];

fn cell(out: usize, input: usize) -> Cell {
    (OutputChannel::ALL[out - 1], InputChannel::ALL[input - 1])
}

fn name((o, i): Cell) -> String {
    format!("H{}{}", o.index() + 1, i.index() + 1)
}

struct Sweeps {
    /// Full damped matrices per hexapod preset.
    damped: Vec<(&'static str, TfMatrix)>,
}

impl Sweeps {
    fn run() -> Result<Self> {
        let grid = log_grid(0.1, 1000.0, 30)?;
        let damped = HEXAPODS
            .iter()
            .map(|&n| Ok((n, tf_matrix(&presets::model(n)?, &grid, &TfOptions::default())?)))
            .collect::<Result<_>>()?;
        Ok(Self { damped })
    }
}

fn plateau() -> Outcome {
    let strut = presets::table_strut();
    let c = coefficients(&strut, presets::PAYLOAD_MASS)?;
    // hand evaluation with the tabulated strut: 25 + 0.6 + 0.7*0.6 + 0.2*0.4 kg,
    // 2.5e-3 + 1.9e-3 + (0.6*0.7^2 + 0.4*0.2^2)*0.3^2 kg m^2
    let (dyn_mass, inertia) = (26.10, 0.03230);
    let lambda = dyn_mass * 0.09 / (inertia + 25.6 * 0.09) - 1.0;
    let coeffs_ok = (c.dyn_mass - dyn_mass).abs() < 1e-12
        && (c.strut_inertia - inertia).abs() < 1e-12
        && (c.lambda / lambda - 1.0).abs() < 1e-12;
    let shear_gap = tf_shear(&c, &strut, 1000.0).norm() / c.lambda - 1.0;
    // the damped axial roll-off settles to -20 dB/dec a decade past the k/c corner
    let corner = strut.stiffness / (TAU * strut.damping);
    let (lo, hi) = (10.0 * corner, 100.0 * corner);
    let grid = log_grid(lo, hi, 30)?;
    let axial: Vec<f64> = grid.iter().map(|&f| db(tf_axial(&c, &strut, f).norm())).collect();
    let slope = slope_fit(&grid, &axial, lo, hi)?;
    let pass = coeffs_ok && shear_gap.abs() < 5e-3 && (slope + 20.0).abs() < 1.0;
    Ok((
        pass,
        format!(
            "lambda {:.5e} (hand {:.5e}), |shear(1 kHz)|/lambda - 1 = {shear_gap:.2e}, axial slope {slope:.2} dB/dec",
            c.lambda, lambda
        ),
    ))
}

fn massless() -> Outcome {
    let strut = presets::table_strut().massless();
    let c = coefficients(&strut, presets::PAYLOAD_MASS)?;
    let worst = log_grid(0.1, 1e4, 30)?.iter().map(|&f| tf_shear(&c, &strut, f).norm()).fold(0.0, f64::max);
    Ok((c.lambda == 0.0 && worst < 1e-15, format!("lambda = {}, max |shear| = {worst:e}", c.lambda)))
}

fn mobility() -> Outcome {
    let joint_freedoms = [2; 6].into_iter().chain([3; 6]).collect();
    let m = mobility3d(&Mobility3dCounts { bodies: 7, internal_dofs: 6, joint_freedoms })?;
    Ok((m == 6, format!("M = {m}")))
}

fn newton_euler() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2024);
    let mut worst = 0.0_f64;
    for name in HEXAPODS {
        let model = presets::model(name)?;
        for _ in 0..100 {
            let (y, yd, load) = (random_state(&mut rng), random_derivative(&mut rng), random_load(&mut rng));
            worst = worst.max(oracle_mismatch(&model, &y, &yd, &load));
        }
    }
    Ok((worst < 1e-10, format!("max relative mismatch {worst:.2e} over 300 states")))
}

fn formulations() -> Outcome {
    let spec = ExcitationSpec::along([1.0, 0.0, 1.0, 0.0, 0.3, 0.0], 3.0, 1.0, 2.0, 10.0)?;
    let opts = IntegrationOptions { rel_tol: 1e-12, ..Default::default() };
    let mut parts = Vec::new();
    let mut pass = true;
    // only layouts with coincident pins and perpendicular pairs admit bipod frames
    for name in ["hexapod-1-cubic", CONIC] {
        let link = integrate_from(&presets::model(name)?, &spec, displaced_state(), &opts)?;
        let pair = integrate_from(&presets::model_with(name, Formulation::Bipod)?, &spec, displaced_state(), &opts)?;
        let gap = trajectory_gap(&link.states, &pair.states);
        pass &= gap < 1e-9;
        parts.push(format!("{name} {gap:.1e}"));
    }
    Ok((pass, format!("max state gap over 10 s: {}", parts.join(", "))))
}

fn modal_table() -> Outcome {
    let table = [
        ("hexapod-1-cubic", [2.17, 3.31, 2.90, 5.46]),
        (CONIC, [2.46, 3.57, 3.57, 5.46]),
        ("hexapod-3-general", [1.55, 4.42, 3.90, 3.79]),
    ];
    let mut worst = (0.0_f64, String::new());
    for (name, expected) in table {
        let r = natural_frequencies(&presets::model(name)?)?;
        let in_plane = r.of_kind(ModeKind::InPlane);
        let heave = r.of_kind(ModeKind::VerticalTranslation);
        let spin = r.of_kind(ModeKind::VerticalRotation);
        if in_plane.len() != 2 || heave.len() != 1 || spin.len() != 1 {
            return Ok((false, format!("{name}: unexpected mode families {r:?}")));
        }
        let got = [in_plane[0], in_plane[1], heave[0], spin[0]];
        for (g, e) in got.iter().zip(expected) {
            let dev = (g / e - 1.0).abs();
            if dev > worst.0 {
                worst = (dev, format!("{name} {g:.3} vs {e} Hz"));
            }
        }
    }
    Ok((worst.0 <= 0.02, format!("12 values, worst {:.2}% ({})", 100.0 * worst.0, worst.1)))
}

fn fig11_point() -> Outcome {
    let model = presets::model("hexapod-3-general")?;
    let opts = TfOptions { amplitude: 1.0, ramp: Some(59.1), ..Default::default() };
    let p = tf_point(&model, InputChannel::Fy, OutputChannel::Fy, 0.8, &opts)?;
    let target = db(1.39);
    Ok((
        (p.db() - target).abs() <= 0.1,
        format!("{:.4} N = {:.3} dB, expected 1.39 N = {target:.3} dB", p.output_amplitude, p.db()),
    ))
}

fn zero_pattern(s: &Sweeps) -> Outcome {
    let pairs = [
        (cell(1, 1), cell(2, 2)),
        (cell(4, 4), cell(5, 5)),
        (cell(2, 4), cell(1, 5)),
        (cell(4, 2), cell(5, 1)),
        (cell(4, 3), cell(5, 3)),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, h) in &s.damped {
        let zeros = zero_pattern_check(h);
        let pair = pairs.iter().map(|&(a, b)| pair_deviation(h, a, b)).fold(0.0, f64::max);
        pass &= zeros.passed() && pair <= 0.5 && h.unsettled.is_empty();
        let mut part = format!("{name}: zeros <= {:.1} dB, pairs within {pair:.2e} dB", zeros.max_db);
        if *name == CONIC {
            let h63 = cells_peak(h, &[cell(6, 3)]);
            pass &= h63.passed();
            part += &format!(", H63 <= {:.1} dB", h63.max_db);
        }
        parts.push(part);
    }
    Ok((pass, parts.join("; ")))
}

/// Off-diagonal cells outside the in-plane couplings and the structural zeros.
fn remaining_cells(preset: &str) -> Vec<Cell> {
    let mut cells = Vec::new();
    for o in 1..=6 {
        for i in 1..=6 {
            let c = cell(o, i);
            let conic_zero = preset == CONIC && c == cell(6, 3);
            if o != i && !IN_PLANE.contains(&c) && !STRUCTURAL_ZEROS.contains(&c) && !conic_zero {
                cells.push(c);
            }
        }
    }
    cells
}

fn slope_range(h: &TfMatrix, cells: &[Cell]) -> Result<(f64, f64)> {
    let mut range = (f64::INFINITY, f64::NEG_INFINITY);
    for &(o, i) in cells {
        let s = slope_fit(&h.frequencies, &h.series_db(o, i), SLOPE_BAND.0, SLOPE_BAND.1)?;
        range = (range.0.min(s), range.1.max(s));
    }
    Ok(range)
}

fn slopes(s: &Sweeps) -> Outcome {
    let diagonal: Vec<Cell> = (1..=6).map(|k| cell(k, k)).collect();
    let band = log_grid(SLOPE_BAND.0, SLOPE_BAND.1, 30)?;
    let mut damped = (f64::INFINITY, f64::NEG_INFINITY);
    let mut undamped = damped;
    let (mut measurable, mut on_slope, mut total, mut peak) = (0, 0, 0, f64::NEG_INFINITY);
    for (name, h) in &s.damped {
        let r = slope_range(h, &diagonal)?;
        damped = (damped.0.min(r.0), damped.1.max(r.1));

        let model = presets::model(name)?;
        let model = model.with_strut(model.strut().undamped())?;
        let hu = tf_matrix(&model, &band, &TfOptions::default())?;
        let r = slope_range(&hu, &diagonal)?;
        undamped = (undamped.0.min(r.0), undamped.1.max(r.1));

        for c in remaining_cells(name) {
            total += 1;
            let level = cells_peak(h, &[c]).max_db;
            peak = peak.max(level);
            if level > NOISE_FLOOR_DB {
                measurable += 1;
                let slope = slope_fit(&h.frequencies, &h.series_db(c.0, c.1), SLOPE_BAND.0, SLOPE_BAND.1)?;
                if (slope + 60.0).abs() <= 3.0 {
                    on_slope += 1;
                } else {
                    println!("      {name} {} slope {slope:.1} dB/dec", self::name(c));
                }
            }
        }
    }
    let pass = damped.0 >= -22.0
        && damped.1 <= -18.0
        && undamped.0 >= -42.0
        && undamped.1 <= -38.0
        && total > 0
        && on_slope == total;
    Ok((
        pass,
        format!(
            "diagonal {:.2}..{:.2} dB/dec damped, {:.2}..{:.2} undamped; \
             other off-diagonal cells: {on_slope}/{total} at -60 +/- 3, {measurable} above the floor (peak {peak:.1} dB)",
            damped.0, damped.1, undamped.0, undamped.1
        ),
    ))
}

fn energy() -> Outcome {
    let still = ExcitationSpec::along([0.0; 6], 1.0, 0.0, 1.0, 10.0)?;
    let opts = IntegrationOptions { rel_tol: 1e-9, ..Default::default() };
    let mut worst = 0.0_f64;
    for name in HEXAPODS {
        let model = presets::model(name)?;
        let model = model.with_strut(model.strut().undamped())?;
        let traj = integrate_from(&model, &still, displaced_state(), &opts)?;
        let e0 = model.energy(&traj.states[0]);
        for y in &traj.states {
            worst = worst.max((model.energy(y) / e0 - 1.0).abs());
        }
    }
    Ok((worst <= 1e-6, format!("max relative drift {worst:.2e} over 10 s")))
}

fn linearity_grid(model: &ManipulatorModel) -> Result<Vec<f64>> {
    let mut grid = log_grid(0.1, 1000.0, 10)?;
    grid.extend(natural_frequencies(model)?.modes.iter().map(|m| m.frequency));
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a / *b - 1.0).abs() < 1e-9);
    Ok(grid)
}

fn linearity() -> Outcome {
    let base = TfOptions::default();
    let louder = TfOptions { amplitude: 10.0 * DEFAULT_AMPLITUDE, ..base };
    let floor = 10f64.powf(NOISE_FLOOR_DB / 20.0);
    let (mut worst, mut compared, mut at) = (0.0_f64, 0, String::new());
    for name in HEXAPODS {
        let model = presets::model(name)?;
        let grid = linearity_grid(&model)?;
        let a = tf_matrix(&model, &grid, &base)?;
        let b = tf_matrix(&model, &grid, &louder)?;
        for (k, (ha, hb)) in a.ratios.iter().zip(&b.ratios).enumerate() {
            for o in 0..6 {
                for i in 0..6 {
                    let (x, y) = (ha[o][i], hb[o][i]);
                    if x <= floor || y <= floor {
                        continue;
                    }
                    compared += 1;
                    let change = (y / x - 1.0).abs();
                    if change > worst {
                        worst = change;
                        at = format!("{name} {} at {:.3} Hz", self::name(cell(o + 1, i + 1)), grid[k]);
                    }
                }
            }
        }
    }
    Ok((
        worst < 1e-3,
        format!("{compared} ratios above the floor, worst change {worst:.2e} ({at}), base {DEFAULT_AMPLITUDE:e}"),
    ))
}

fn main() {
    let (mut failed, mut errors) = (0, 0);
    let mut report = |label: &str, start: Instant, outcome: std::result::Result<(bool, String), String>| {
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok((true, detail)) => println!("PASS {label}: {detail} [{secs:.1} s]"),
            Ok((false, detail)) => {
                failed += 1;
                println!("FAIL {label}: {detail} [{secs:.1} s]");
            }
            Err(e) => {
                errors += 1;
                println!("FAIL {label}: error: {e} [{secs:.1} s]");
            }
        }
    };
    let simple: [(&str, fn() -> Outcome); 7] = [
        ("bipod plateau", plateau),
        ("massless limit", massless),
        ("hexapod mobility", mobility),
        ("Newton-Euler oracle", newton_euler),
        ("formulation equivalence", formulations),
        ("modal frequencies", modal_table),
        ("hexapod 3 Fy at 0.8 Hz", fig11_point),
    ];
    for (label, check) in simple {
        let t = Instant::now();
        report(label, t, check().map_err(|e| e.to_string()));
    }

    let t = Instant::now();
    match Sweeps::run() {
        Ok(sweeps) => {
            report("zero pattern and symmetry", t, zero_pattern(&sweeps).map_err(|e| e.to_string()));
            let t = Instant::now();
            report("high-frequency slopes", t, slopes(&sweeps).map_err(|e| e.to_string()));
        }
        Err(e) => {
            report("zero pattern and symmetry", t, Err(e.to_string()));
            report("high-frequency slopes", t, Err(e.to_string()));
        }
    }
    let t = Instant::now();
    report("energy conservation", t, energy().map_err(|e| e.to_string()));
    let t = Instant::now();
    report("linearity", t, linearity().map_err(|e| e.to_string()));

    println!("acceptance: {} of 11 criteria failed", failed + errors);
    if errors > 0 {
        std::process::exit(1);
    }
}
