use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use wavesamp::analysis::{
    build_autocorr_matrix, count_wavenumber_modes, dof, dof_loss_rect_vs_disk, eigen_spectrum, mse_sweep,
    power_capture_count, reconstruct, samples_on_lattice, write_sweep_csv, MseOptions, Scheme as SweepScheme,
};
use wavesamp::kernels::Kernel;
use wavesamp::lattice::{
    density, efficiency_gain, enumerate_lattice, nyquist_for, nyquist_hex, nyquist_rect, periodicity_from_sampling,
    LatticePointSet,
};
use wavesamp::scattering::{ScenarioFile, SupportFit};
use wavesamp::statfield::{acf_clarke, AngularAcf, FieldMetadata, FieldRealization, PlaneWaveField, DEFAULT_WAVES};
use wavesamp::{Acf, EllipseShape, Position, Region, ScatteringScenario, SpectralSupport, Wavenumber};

use crate::output::Outputs;
use crate::CliError;

/// Fraction of the trace the eigenvalue count must capture.
const CAPTURE_FRACTION: f64 = 0.997;
/// Agreement required between successive angular ACF rules.
const ACF_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(
    name = "wavesamp",
    version,
    about = "Nyquist sampling, DoF and reconstruction of bandlimited wave fields"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lattice points, sampling/periodicity matrices and densities.
    Lattice(SingleArgs),
    /// Landau DoF counts and wavenumber mode counts.
    Dof(SingleArgs),
    /// ACF on a square grid of displacements.
    Acf(AcfArgs),
    /// Eigenvalues of the lattice autocorrelation matrix.
    Eigs(SingleArgs),
    /// Reconstruction of one realization along the x axis.
    Reconstruct(ReconstructArgs),
    /// Normalized reconstruction MSE versus region size.
    MseSweep(SweepArgs),
    /// Ellipse embedding of the thresholded spectral support.
    SupportFit(SingleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Rect,
    Hex,
    Ellipse,
}

#[derive(Debug, Args, Serialize)]
pub struct Common {
    /// Scenario file (JSON: lambda, clusters[{weight, theta_deg, phi_deg, alpha}]).
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Wavelength in meters (default 1, or the scenario's).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Support threshold in dB below the peak of A².
    #[arg(long, default_value_t = -20.0, allow_negative_numbers = true)]
    pub threshold_db: f64,
    /// Ellipse semi-axis along the major direction, in units of κ.
    #[arg(long)]
    pub a1: Option<f64>,
    /// Ellipse semi-axis along the minor direction (default a1).
    #[arg(long)]
    pub a2: Option<f64>,
    /// Ellipse orientation in degrees.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub k_phi_deg: f64,
    /// Master seed.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Plane waves per realization.
    #[arg(long, default_value_t = DEFAULT_WAVES)]
    pub waves: usize,
    /// Output directory.
    #[arg(long, default_value = ".")]
    #[serde(skip)]
    pub out: PathBuf,
    /// Worker threads (results do not depend on it).
    #[arg(long)]
    #[serde(skip)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct SingleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Side of the square region in wavelengths.
    #[arg(long = "L", default_value_t = 10.0)]
    #[serde(rename = "L_over_lambda")]
    pub l: f64,
    #[arg(long, value_enum, default_value_t = Scheme::Hex)]
    pub scheme: Scheme,
}

#[derive(Debug, Args, Serialize)]
pub struct AcfArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Side of the displacement window in wavelengths.
    #[arg(long = "L", default_value_t = 4.0)]
    #[serde(rename = "L_over_lambda")]
    pub l: f64,
    /// Evaluation grid density per wavelength and axis
    #[arg(long, default_value_t = 8.0)]
    pub points_per_lambda: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct ReconstructArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Side of the sampling region in wavelengths.
    #[arg(long = "L", default_value_t = 40.0)]
    #[serde(rename = "L_over_lambda")]
    pub l: f64,
    /// Length of the x-axis segment in wavelengths.
    #[arg(long, default_value_t = 6.0)]
    pub segment: f64,
    /// Lattice compared against the λ/2 square lattice.
    #[arg(long, value_enum, default_value_t = Scheme::Hex)]
    pub scheme: Scheme,
    /// Evaluation grid density per wavelength and axis
    #[arg(long, default_value_t = 8.0)]
    pub points_per_lambda: f64,
    /// Realization index within the seeded ensemble.
    #[arg(long, default_value_t = 0)]
    pub realization: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Region sides in wavelengths, comma separated.
    #[arg(long = "L", value_delimiter = ',', default_values_t = [2.0, 4.0, 8.0, 16.0, 20.0])]
    #[serde(rename = "L_over_lambda")]
    pub l: Vec<f64>,
    /// Monte-Carlo realizations per point of the sweep
    #[arg(long, default_value_t = 500)]
    pub realizations: usize,
    /// Evaluation grid density per wavelength and axis
    #[arg(long, default_value_t = 8.0)]
    pub points_per_lambda: f64,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let common = match &cli.command {
        Command::Lattice(a) | Command::Dof(a) | Command::Eigs(a) | Command::SupportFit(a) => &a.common,
        Command::Acf(a) => &a.common,
        Command::Reconstruct(a) => &a.common,
        Command::MseSweep(a) => &a.common,
    };
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(CliError::config("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(format!("cannot start {n} worker threads: {e}")))?;
    }
    let out = common.out.clone();
    let outputs = match &cli.command {
        Command::Lattice(a) => cmd_lattice(a)?,
        Command::Dof(a) => cmd_dof(a)?,
        Command::Acf(a) => cmd_acf(a)?,
        Command::Eigs(a) => cmd_eigs(a)?,
        Command::Reconstruct(a) => cmd_reconstruct(a)?,
        Command::MseSweep(a) => cmd_mse_sweep(a)?,
        Command::SupportFit(a) => cmd_support_fit(a)?,
    };
    for path in outputs.commit(&out)? {
        println!("{}", path.display());
    }
    Ok(())
}

struct Resolved {
    scenario: ScatteringScenario,
    file: ScenarioFile,
    from_file: bool,
}

fn resolve_scenario(c: &Common) -> Result<Resolved, CliError> {
    if let Some(l) = c.lambda {
        if !(l.is_finite() && l > 0.0) {
            return Err(CliError::config(format!("--lambda must be positive, got {l}")));
        }
    }
    if let Some(path) = &c.scenario {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read scenario {}: {e}", path.display())))?;
        let file: ScenarioFile = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("invalid scenario {}: {e}", path.display())))?;
        if let Some(l) = c.lambda {
            if l != file.lambda {
                return Err(CliError::config(format!(
                    "--lambda {l} disagrees with the scenario's lambda {}",
                    file.lambda
                )));
            }
        }
        let scenario = file.into_scenario()?;
        return Ok(Resolved {
            scenario,
            file,
            from_file: true,
        });
    }
    let kn = Wavenumber::from_lambda(c.lambda.unwrap_or(1.0))?;
    let scenario = ScatteringScenario::isotropic(kn);
    Ok(Resolved {
        file: scenario.to_file(),
        scenario,
        from_file: false,
    })
}

/// Ellipse axes and where they came from (`axes` or `support-fit`).
type SourcedShape = (EllipseShape, &'static str);

/// Explicit axes, else the fit of the scenario file's support.
fn resolve_shape(c: &Common, r: &Resolved) -> Result<Option<SourcedShape>, CliError> {
    match (c.a1, c.a2) {
        (Some(a1), a2) => Ok(Some((
            EllipseShape::new(a1, a2.unwrap_or(a1), c.k_phi_deg.to_radians())?,
            "axes",
        ))),
        (None, Some(_)) => Err(CliError::config("--a2 requires --a1")),
        (None, None) if r.from_file => Ok(Some((r.scenario.support_at_threshold(c.threshold_db)?, "support-fit"))),
        (None, None) => Ok(None),
    }
}

fn require_shape(c: &Common, r: &Resolved, why: &str) -> Result<SourcedShape, CliError> {
    resolve_shape(c, r)?.ok_or_else(|| CliError::config(format!("{why} needs --scenario or --a1/--a2")))
}

fn region(l_over_lambda: f64, kn: Wavenumber) -> Result<Region, CliError> {
    if !(l_over_lambda.is_finite() && l_over_lambda > 0.0) {
        return Err(CliError::config(format!("--L must be positive, got {l_over_lambda}")));
    }
    Ok(Region::new(l_over_lambda * kn.lambda())?)
}

fn lattice_support(
    scheme: Scheme,
    c: &Common,
    r: &Resolved,
) -> Result<(SpectralSupport, Option<SourcedShape>), CliError> {
    let kn = r.scenario.wavenumber();
    Ok(match scheme {
        Scheme::Rect => (SpectralSupport::Rect(kn), None),
        Scheme::Hex => (SpectralSupport::Disk(kn), None),
        Scheme::Ellipse => {
            let shape = require_shape(c, r, "--scheme ellipse")?;
            (SpectralSupport::Ellipse(kn, shape.0), Some(shape))
        }
    })
}

fn shape_json(shape: &EllipseShape) -> Value {
    json!({ "a1": shape.a1(), "a2": shape.a2(), "k_phi_deg": shape.k_phi().to_degrees() })
}

fn sidecar<A: Serialize>(command: &str, args: &A, r: &Resolved, summary: Value) -> Value {
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": args,
        "scenario": r.file,
        "scenario_hash": r.scenario.hash(),
        "summary": summary,
    })
}

fn csv_bytes(rows: impl FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> csv::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        rows(&mut w)
            .and_then(|_| Ok(w.flush()?))
            .map_err(|e| CliError::io(e.to_string()))?;
    }
    Ok(buf)
}

fn matrix_rows(m: [[f64; 2]; 2]) -> Value {
    json!(m)
}

fn cmd_lattice(a: &SingleArgs) -> Result<Outputs, CliError> {
    let r = resolve_scenario(&a.common)?;
    let kn = r.scenario.wavenumber();
    let region = region(a.l, kn)?;
    let (support, shape) = lattice_support(a.scheme, &a.common, &r)?;
    let q = nyquist_for(&support);
    let p = periodicity_from_sampling(&q)?;
    let set = enumerate_lattice(&q, &region);
    let mu = density(&q);
    let mut csv = Vec::new();
    set.write_csv(&mut csv)?;
    let summary = json!({
        "points": set.len(),
        "sampling_matrix": matrix_rows(q.as_rows()),
        "periodicity_matrix": matrix_rows(p.as_rows()),
        "density": mu,
        "efficiency_gain_vs_rect": efficiency_gain(mu, density(&nyquist_rect(kn)))?,
        "efficiency_gain_vs_hex": efficiency_gain(mu, density(&nyquist_hex(kn)))?,
        "shape": shape.map(|(s, src)| json!({ "source": src, "axes": shape_json(&s) })),
    });
    let mut out = Outputs::default();
    out.add("lattice.csv", csv);
    out.add_json("lattice.json", &sidecar("lattice", a, &r, summary))?;
    Ok(out)
}

fn cmd_dof(a: &SingleArgs) -> Result<Outputs, CliError> {
    let r = resolve_scenario(&a.common)?;
    let kn = r.scenario.wavenumber();
    let region = region(a.l, kn)?;
    let shape = resolve_shape(&a.common, &r)?;
    let mut supports = vec![("disk", SpectralSupport::Disk(kn)), ("rect", SpectralSupport::Rect(kn))];
    if let Some((s, _)) = shape {
        supports.push(("ellipse", SpectralSupport::Ellipse(kn, s)));
    }
    let rows: Vec<_> = supports
        .iter()
        .map(|(name, s)| (name, s, dof(s, &region), count_wavenumber_modes(s, &region)))
        .collect();
    let csv = csv_bytes(|w| {
        w.write_record(["support", "dof_real", "dof_count", "wavenumber_modes"])?;
        for (name, _, d, modes) in &rows {
            w.write_record(&[
                name.to_string(),
                d.dof_real.to_string(),
                d.dof_count.to_string(),
                modes.to_string(),
            ])?;
        }
        Ok(())
    })?;
    let direct = if r.from_file {
        let fit = r.scenario.support_fit(a.common.threshold_db)?;
        Some(fit.a_sq.area_fraction * dof(&SpectralSupport::Disk(kn), &region).dof_real)
    } else {
        None
    };
    let summary = json!({
        "dof_loss_rect_vs_disk": dof_loss_rect_vs_disk(),
        "dof_direct_support": direct,
        "shape": shape.map(|(s, src)| json!({ "source": src, "axes": shape_json(&s) })),
    });
    let mut out = Outputs::default();
    out.add("dof.csv", csv);
    out.add_json("dof.json", &sidecar("dof", a, &r, summary))?;
    Ok(out)
}

fn cmd_acf(a: &AcfArgs) -> Result<Outputs, CliError> {
    let r = resolve_scenario(&a.common)?;
    let kn = r.scenario.wavenumber();
    let window = region(a.l, kn)?;
    let grid = wavesamp::analysis::eval_grid(&window, kn, a.points_per_lambda)?;
    let positions = grid.positions();
    let r_max = window.half() * 2f64.sqrt();
    let probes = [
        Position::new(r_max, 0.0),
        Position::new(0.0, r_max),
        Position::new(window.half(), window.half()),
    ];
    let rule = AngularAcf::converged(&r.scenario, &probes, ACF_TOL)?;
    let values: Vec<_> = positions.iter().map(|&p| rule.eval(p)).collect();
    let mut max_dev = 0.0f64;
    let csv = csv_bytes(|w| {
        w.write_record(["x", "y", "re", "im", "clarke"])?;
        for (p, c) in positions.iter().zip(&values) {
            let clarke = acf_clarke(*p, kn);
            max_dev = max_dev.max((c - clarke).norm());
            w.write_record(&[
                p.x.to_string(),
                p.y.to_string(),
                c.re.to_string(),
                c.im.to_string(),
                clarke.to_string(),
            ])?;
        }
        Ok(())
    })?;
    let summary = json!({
        "points": positions.len(),
        "rule_level": rule.level(),
        "rule_nodes": rule.len(),
        "max_deviation_from_clarke": max_dev,
    });
    let mut out = Outputs::default();
    out.add("acf.csv", csv);
    out.add_json("acf.json", &sidecar("acf", a, &r, summary))?;
    Ok(out)
}

fn fit_json(fit: &SupportFit) -> Value {
    json!({
        "threshold_db": fit.threshold_db,
        "a_sq": { "axes": shape_json(&fit.a_sq.shape), "area_fraction": fit.a_sq.area_fraction, "points": fit.a_sq.points },
        "psd": { "axes": shape_json(&fit.psd.shape), "area_fraction": fit.psd.area_fraction, "points": fit.psd.points },
    })
}

fn cmd_eigs(a: &SingleArgs) -> Result<Outputs, CliError> {
    let r = resolve_scenario(&a.common)?;
    let kn = r.scenario.wavenumber();
    let region = region(a.l, kn)?;
    let (support, _) = lattice_support(a.scheme, &a.common, &r)?;
    let set = enumerate_lattice(&nyquist_for(&support), &region);
    if set.is_empty() {
        return Err(CliError::config("the region holds no lattice point"));
    }
    // the field's own support, whatever lattice samples it
    let fit = r.scenario.support_fit(a.common.threshold_db)?;
    let field_shape = resolve_shape(&a.common, &r)?.map_or(fit.a_sq.shape, |s| s.0);
    let dof_formula = dof(&SpectralSupport::Ellipse(kn, field_shape), &region);
    let dof_direct = fit.a_sq.area_fraction * dof(&SpectralSupport::Disk(kn), &region).dof_real;

    let r_max = set.positions().iter().map(|p| p.norm()).fold(0.0, f64::max) * 2.0;
    let acf = Acf::for_scenario(&r.scenario, r_max, ACF_TOL)?;
    let c = build_autocorr_matrix(&set, &acf)?;
    let spectrum = eigen_spectrum(&c)?;
    let count = power_capture_count(&spectrum, CAPTURE_FRACTION)?;
    let mut csv = Vec::new();
    spectrum.write_csv(&mut csv)?;
    let summary = json!({
        "N": set.len(),
        "dof_formula": dof_formula.dof_real,
        "dof_formula_count": dof_formula.dof_count,
        "dof_direct_support": dof_direct,
        "dof_count_997": count,
        "capture_fraction": CAPTURE_FRACTION,
        "trace": c.trace(),
        "eigenvalue_total": spectrum.total,
        "field_support": shape_json(&field_shape),
        "support_fit": fit_json(&fit),
        "acf": match &acf {
            Acf::Clarke(_) => json!("clarke"),
            Acf::Angular(rule) => json!({ "angular_level": rule.level(), "nodes": rule.len() }),
        },
    });
    let mut out = Outputs::default();
    out.add("eigs.csv", csv);
    out.add_json("eigs.json", &sidecar("eigs", a, &r, summary))?;
    Ok(out)
}

fn realization_on(field: &PlaneWaveField, set: &LatticePointSet, meta: &FieldMetadata) -> FieldRealization {
    FieldRealization {
        positions: set.positions(),
        values: samples_on_lattice(field, set),
        metadata: meta.clone(),
    }
}

fn cmd_reconstruct(a: &ReconstructArgs) -> Result<Outputs, CliError> {
    let r = resolve_scenario(&a.common)?;
    let kn = r.scenario.wavenumber();
    let region = region(a.l, kn)?;
    if !(a.segment.is_finite() && a.segment > 0.0) {
        return Err(CliError::config("--segment must be positive"));
    }
    if a.segment > a.l {
        return Err(CliError::config(format!(
            "segment of {} wavelengths does not fit the {}-wavelength region",
            a.segment, a.l
        )));
    }
    if !(a.points_per_lambda.is_finite() && a.points_per_lambda > 0.0) {
        return Err(CliError::config("--points-per-lambda must be positive"));
    }
    let (support, _) = lattice_support(a.scheme, &a.common, &r)?;
    let half_lambda = SpectralSupport::Rect(kn);

    let intervals = (a.segment * a.points_per_lambda).round().max(1.0) as usize;
    let length = a.segment * kn.lambda();
    let query: Vec<Position> = (0..=intervals)
        .map(|i| Position::new(-0.5 * length + length * i as f64 / intervals as f64, 0.0))
        .collect();

    let field = PlaneWaveField::realization(&r.scenario, a.common.waves, a.common.seed, a.realization)?;
    let meta = FieldMetadata {
        seed: a.common.seed,
        realization: a.realization,
        n_waves: a.common.waves,
        scenario_hash: r.scenario.hash(),
    };
    let mut columns = Vec::new();
    let mut sizes = Vec::new();
    for s in [support, half_lambda] {
        let set = enumerate_lattice(&nyquist_for(&s), &region);
        let samples = realization_on(&field, &set, &meta);
        columns.push(reconstruct(&samples, &set, &Kernel::for_support(s), &query, false)?);
        sizes.push(set.len());
    }
    let truth: Vec<_> = query.iter().map(|&p| field.eval(p)).collect();
    let interior = 0.5 * (length - 2.0 * kn.lambda()).max(0.0);
    let mut max_err = [0.0f64; 2];
    let mut max_err_interior = [0.0f64; 2];
    for (i, p) in query.iter().enumerate() {
        for k in 0..2 {
            let e = (columns[k][i].re - truth[i].re).abs();
            max_err[k] = max_err[k].max(e);
            if p.x.abs() <= interior * (1.0 + 1e-12) {
                max_err_interior[k] = max_err_interior[k].max(e);
            }
        }
    }
    let csv = csv_bytes(|w| {
        w.write_record(["x", "re_true", "re_hat_nyquist", "re_hat_halflambda"])?;
        for (i, p) in query.iter().enumerate() {
            w.write_record(&[
                p.x.to_string(),
                truth[i].re.to_string(),
                columns[0][i].re.to_string(),
                columns[1][i].re.to_string(),
            ])?;
        }
        Ok(())
    })?;
    let summary = json!({
        "points": query.len(),
        "nyquist_support": format!("{:?}", support.kind()).to_lowercase(),
        "lattice_points_nyquist": sizes[0],
        "lattice_points_halflambda": sizes[1],
        "max_abs_error_nyquist": max_err[0],
        "max_abs_error_halflambda": max_err[1],
        "interior_half_length": interior,
        "max_abs_error_interior_nyquist": max_err_interior[0],
        "max_abs_error_interior_halflambda": max_err_interior[1],
        "field": meta,
    });
    let mut out = Outputs::default();
    out.add("reconstruct.csv", csv);
    out.add_json("reconstruct.json", &sidecar("reconstruct", a, &r, summary))?;
    Ok(out)
}

fn cmd_mse_sweep(a: &SweepArgs) -> Result<Outputs, CliError> {
    let r = resolve_scenario(&a.common)?;
    let kn = r.scenario.wavenumber();
    if a.l.is_empty() {
        return Err(CliError::config("--L needs at least one size"));
    }
    for &l in &a.l {
        region(l, kn)?;
    }
    if a.realizations == 0 {
        return Err(CliError::config("--realizations must be positive"));
    }
    let (shape, source) = require_shape(&a.common, &r, "mse-sweep")?;
    let opts = MseOptions {
        n_waves: a.common.waves,
        points_per_lambda: a.points_per_lambda,
        ..MseOptions::default()
    };
    let rows = mse_sweep(
        &r.scenario,
        shape,
        &SweepScheme::ALL,
        &a.l,
        a.realizations,
        a.common.seed,
        &opts,
    )?;
    let mut csv = Vec::new();
    write_sweep_csv(&rows, &mut csv)?;
    let summary = json!({
        "shape": { "source": source, "axes": shape_json(&shape) },
        "eval_region": "central square of side L/2",
        "rows": rows,
    });
    let mut out = Outputs::default();
    out.add("mse_sweep.csv", csv);
    out.add_json("mse_sweep.json", &sidecar("mse-sweep", a, &r, summary))?;
    Ok(out)
}

fn cmd_support_fit(a: &SingleArgs) -> Result<Outputs, CliError> {
    let r = resolve_scenario(&a.common)?;
    let kn = r.scenario.wavenumber();
    let region = region(a.l, kn)?;
    let fit = r.scenario.support_fit(a.common.threshold_db)?;
    let disk = dof(&SpectralSupport::Disk(kn), &region).dof_real;
    let csv = csv_bytes(|w| {
        w.write_record([
            "convention",
            "a1",
            "a2",
            "k_phi_deg",
            "area_fraction",
            "points",
            "dof_formula",
            "dof_direct",
        ])?;
        for (name, f) in [("a_sq", &fit.a_sq), ("psd", &fit.psd)] {
            w.write_record(&[
                name.to_string(),
                f.shape.a1().to_string(),
                f.shape.a2().to_string(),
                f.shape.k_phi().to_degrees().to_string(),
                f.area_fraction.to_string(),
                f.points.to_string(),
                dof(&SpectralSupport::Ellipse(kn, f.shape), &region)
                    .dof_real
                    .to_string(),
                (f.area_fraction * disk).to_string(),
            ])?;
        }
        Ok(())
    })?;
    let summary = json!({ "fit": fit_json(&fit), "disk_dof": disk });
    let mut out = Outputs::default();
    out.add("support_fit.csv", csv);
    out.add_json("support_fit.json", &sidecar("support-fit", a, &r, summary))?;
    Ok(out)
}
