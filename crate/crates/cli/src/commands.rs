//! One function per subcommand. Each reads its parameters, delegates to the
//! library, writes artifacts and records metrics and invariant checks.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use monosurf::fixtures::{counterexample_grid, diamond_instance, in_diamond, unit_square_instance};
use monosurf::geometry::{sample_iid, sample_poisson_rectangle};
use monosurf::grid::{shift_minimized_l1, GridDomain, MonotoneGrid};
use monosurf::plot::{grid_svg, kappa_svg, rectangle_svg, watermelon_svg};
use monosurf::smoothing::{check_invariants, smooth_2d, smooth_monotone, SmoothingParams};
use monosurf::tableau::{kappa_surface, lds_length, lis_length, rsk_shape};
use monosurf::variational::{f_rho, limit_distance, maximize, phi_curve, DensityGrid, MaximizeOptions, PhiModel};
use monosurf::watermelon::{max_k_decreasing, peel_k_decreasing, DEFAULT_EXACT_CAP};
use monosurf::{DensityModel, PointSet, RectangleSpec, RngSeed};
use serde_json::{json, Map, Value};

use crate::config::{check, Params, ValidationError};
use crate::output::OutDir;

pub struct Run {
    pub params: Params,
    pub seed: u64,
    pub out: OutDir,
    pub metrics: Map<String, Value>,
    pub invariants: BTreeMap<String, bool>,
}

impl Run {
    fn metric(&mut self, key: &str, v: impl Into<Value>) {
        self.metrics.insert(key.to_string(), v.into());
    }

    fn invariant(&mut self, key: &str, ok: bool) {
        self.invariants.insert(key.to_string(), ok);
    }

    fn seed(&self) -> RngSeed {
        RngSeed(self.seed)
    }
}

fn validation(e: monosurf::Error) -> anyhow::Error {
    use monosurf::Error::*;
    match e {
        InvalidArgument(_)
        | InvalidModel(_)
        | GeneralPosition(_)
        | CapExceeded { .. }
        | DomainMismatch(_)
        | NotMonotone(_)
        | Precondition(_)
        | Parse(_) => anyhow::Error::new(ValidationError(e.to_string())),
        other => anyhow::Error::new(other),
    }
}

trait LibResult<T> {
    fn v(self) -> anyhow::Result<T>;
}

impl<T> LibResult<T> for monosurf::Result<T> {
    fn v(self) -> anyhow::Result<T> {
        self.map_err(validation)
    }
}

fn density_model(p: &Params) -> anyhow::Result<DensityModel> {
    match p.raw("density").unwrap_or("square") {
        "square" => Ok(DensityModel::uniform_square()),
        "diamond" => Ok(DensityModel::uniform_diamond()),
        path => {
            let f = File::open(path).map_err(|e| ValidationError(format!("--density {path}: {e}")))?;
            let model: DensityModel =
                serde_json::from_reader(BufReader::new(f)).map_err(|e| ValidationError(format!("--density {path}: {e}")))?;
            Ok(model)
        }
    }
}

/// Density on a grid: the diamond configuration, the unit square, or
/// a model rasterised over its support.
fn density_grid(p: &Params, m: usize) -> anyhow::Result<DensityGrid<f64>> {
    check(m >= 3, || format!("--grid must be at least 3, got {m}"))?;
    Ok(match p.raw("density").unwrap_or("diamond") {
        "diamond" => diamond_instance::<f64>(m).0,
        "square" => unit_square_instance::<f64>(m).0,
        _ => {
            let model = density_model(p)?;
            let s = model.support;
            let d = GridDomain::spanning(s.x0, s.y0, s.x1, s.y1, m).v()?;
            DensityGrid::from_model(&model, d).v()?.normalized().v()?
        }
    })
}

/// Points from `--input` or sampled from `--density` with `--n`.
fn points(run: &mut Run) -> anyhow::Result<PointSet<f64>> {
    if let Some(path) = run.params.raw("input") {
        let f = File::open(path).map_err(|e| ValidationError(format!("--input {path}: {e}")))?;
        return PointSet::read_csv(BufReader::new(f)).v();
    }
    let n: usize = run.params.require("n")?;
    let model = density_model(&run.params)?;
    sample_iid(&model, n, run.seed()).v()
}

fn write_grid(run: &mut Run, stem: &str, g: &MonotoneGrid<f64>) -> anyhow::Result<()> {
    run.out.write_with(&format!("{stem}.csv"), |w| Ok(g.write_csv(w)?))?;
    run.out.write_json(&format!("{stem}.domain.json"), g.domain())?;
    run.out.write_str(&format!("{stem}.svg"), &grid_svg(g))
}

fn read_grid(path: &str, domain: Option<&str>) -> anyhow::Result<MonotoneGrid<f64>> {
    let sidecar = match domain {
        Some(d) => PathBuf::from(d),
        None => {
            let p = Path::new(path);
            p.with_file_name(format!("{}.domain.json", p.file_stem().and_then(|s| s.to_str()).unwrap_or("grid")))
        }
    };
    let open = |p: &Path| File::open(p).map_err(|e| ValidationError(format!("{}: {e}", p.display())));
    let domain: GridDomain<f64> = serde_json::from_reader(BufReader::new(open(&sidecar)?))
        .map_err(|e| ValidationError(format!("{}: {e}", sidecar.display())))?;
    MonotoneGrid::read_csv(BufReader::new(open(Path::new(path))?), domain).v()
}

pub fn sample(run: &mut Run) -> anyhow::Result<()> {
    let beta: Option<f64> = run.params.get("beta")?;
    let gamma: Option<f64> = run.params.get("gamma")?;
    let ps = match (beta, gamma) {
        (Some(beta), Some(gamma)) => {
            let spec = RectangleSpec::new(beta, gamma).v()?;
            let ps = sample_poisson_rectangle::<f64>(&spec, run.seed()).v()?;
            run.out.write_str("rectangle.svg", &rectangle_svg(&spec, &ps))?;
            ps
        }
        (None, None) => points(run)?,
        _ => return Err(ValidationError("--beta and --gamma go together".into()).into()),
    };
    run.out.write_with("points.csv", |w| Ok(ps.write_csv(w)?))?;
    run.metric("n", ps.len());
    run.metric("lis", lis_length(&ps));
    run.metric("lds", lds_length(&ps));
    Ok(())
}

pub fn watermelon(run: &mut Run) -> anyhow::Result<()> {
    let ps = points(run)?;
    let k = match (run.params.get::<usize>("k")?, run.params.get::<f64>("r")?) {
        (Some(k), _) => k,
        (None, Some(r)) => {
            check(r >= 0.0, || format!("--r must be nonnegative, got {r}"))?;
            (r * (ps.len() as f64).sqrt()).floor() as usize
        }
        (None, None) => return Err(ValidationError("watermelon needs --k or --r".into()).into()),
    };
    let approx: bool = run.params.get_or("approx", false)?;
    let result = if ps.len() > DEFAULT_EXACT_CAP && approx { peel_k_decreasing(&ps, k) } else { max_k_decreasing(&ps, k).v()? };
    let greene = rsk_shape(&ps).k_decreasing_size(k);
    run.out.write_json("watermelon.json", &result)?;
    run.out.write_with("subset.csv", |w| Ok(result.subset.write_csv(w)?))?;
    run.out.write_str("watermelon.svg", &watermelon_svg(&ps, &result.sequences))?;
    run.metric("n", ps.len());
    run.metric("k", k);
    run.metric("size", result.size);
    run.metric("greene_bound", greene);
    run.metric("certified", result.certified);
    run.invariant("subset_is_k_decreasing", lis_length(&result.subset) <= k);
    if result.certified || ps.len() <= DEFAULT_EXACT_CAP {
        run.invariant("greene_certificate", result.size == greene);
    }
    Ok(())
}

fn parse_labels(s: &str) -> anyhow::Result<Vec<(f64, f64)>> {
    s.split(';')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let (x, y) = t.split_once(',').ok_or_else(|| ValidationError(format!("--label-at entry {t:?} is not x,y")))?;
            let x = x.trim().parse::<f64>().map_err(|e| ValidationError(format!("--label-at {t:?}: {e}")))?;
            let y = y.trim().parse::<f64>().map_err(|e| ValidationError(format!("--label-at {t:?}: {e}")))?;
            Ok((x, y))
        })
        .collect()
}

pub fn kappa(run: &mut Run) -> anyhow::Result<()> {
    let ps = points(run)?;
    let labels = parse_labels(run.params.raw("label-at").unwrap_or(""))?;
    let k = kappa_surface(&ps);
    run.out.write_json("kappa.json", &k)?;
    run.out.write_str("kappa.svg", &kappa_svg(&k, &labels))?;
    let values: Vec<Value> = labels.iter().map(|&(x, y)| json!({"x": x, "y": y, "kappa": k.eval(x, y)})).collect();
    run.metric("labels", values);
    run.metric("max_level", k.max_level());
    run.invariant("max_level_is_lis", k.max_level() == lis_length(&ps));
    Ok(())
}

fn smoothing_params(run: &Run) -> anyhow::Result<SmoothingParams<f64>> {
    let c: f64 = run.params.get_or("C", 1.0)?;
    let z: usize = run.params.get_or("z-levels", 64)?;
    Ok(SmoothingParams::new(c).v()?.with_z_levels(z))
}

pub fn smooth(run: &mut Run) -> anyhow::Result<()> {
    let params = smoothing_params(run)?;
    let u = match run.params.raw("input") {
        Some(path) => read_grid(path, run.params.raw("domain"))?,
        None => counterexample_grid(run.params.get_or("grid", 201)?),
    };
    // Grids that vanish on the west and south lines are smoothed as they
    // are; anything else is padded first.
    let (s, padded) = match smooth_2d(&u, &params) {
        Ok(s) => (s, false),
        Err(monosurf::Error::Precondition(_)) => (smooth_monotone(&u, &params).v()?, true),
        Err(e) => return Err(validation(e)),
    };
    write_grid(run, "smoothed", &s)?;
    run.metric("padded", padded);
    run.metric("diam_before", u.diam());
    run.metric("diam_after", s.diam());
    run.invariant("diam_not_increased", s.diam() <= u.diam() + 1e-12);
    if !padded {
        let report = check_invariants(&u, &s, &params, 1000, run.seed()).v()?;
        run.out.write_json("smoothing_report.json", &report)?;
        run.metric("product_fraction_half", report.product_fraction_half);
        run.invariant("smoothing_invariants", report.passes());
    }
    Ok(())
}

pub fn ffunc(run: &mut Run) -> anyhow::Result<()> {
    let m: usize = run.params.get_or("grid", 100)?;
    let rho = match run.params.raw("input") {
        Some(_) => None,
        None => Some(density_grid(&run.params, m)?),
    };
    let (u, rho) = match (run.params.raw("input"), rho) {
        (Some(path), _) => {
            let u = read_grid(path, run.params.raw("domain"))?;
            let rho = match run.params.raw("density").unwrap_or("diamond") {
                "diamond" => DensityGrid::from_cell_fn(*u.domain(), |x, y| if in_diamond(x, y) { 1.0 } else { 0.0 })
                    .v()?
                    .normalized()
                    .v()?,
                _ => DensityGrid::from_model(&density_model(&run.params)?, *u.domain()).v()?.normalized().v()?,
            };
            (u, rho)
        }
        (None, Some(rho)) => (MonotoneGrid::from_fn(*rho.domain(), |x, y| x + y).v()?, rho),
        (None, None) => unreachable!(),
    };
    let value = f_rho(&u, &rho, &PhiModel::Conjectured).v()?;
    run.out.write_json("ffunc.json", &json!({"value": value, "phi": "conjectured"}))?;
    run.metric("value", value);
    run.invariant("value_at_most_one", value <= 1.0 + 1e-9);
    Ok(())
}

fn maximize_options(run: &Run) -> anyhow::Result<MaximizeOptions> {
    let d = MaximizeOptions::default();
    Ok(MaximizeOptions {
        max_iterations: run.params.get_or("iterations", d.max_iterations)?,
        pilot_points: run.params.get_or("pilot", d.pilot_points)?,
        z_levels: run.params.get_or("z-levels", d.z_levels)?,
        seed: run.seed(),
        ..d
    })
}

pub fn maximize_cmd(run: &mut Run) -> anyhow::Result<()> {
    let m: usize = run.params.get_or("grid", 80)?;
    let r: f64 = run.params.get_or("r", std::f64::consts::SQRT_2)?;
    check(r >= 0.0, || format!("--r must be nonnegative, got {r}"))?;
    let rho = density_grid(&run.params, m)?;
    let opts = maximize_options(run)?;
    let rep = maximize(&rho, r, &PhiModel::Conjectured, &opts).v()?;
    write_grid(run, "ustar", &rep.u_star)?;
    run.out.write_json("maximizer.json", &rep)?;
    run.out.write_with("trace.csv", |w| Ok(rep.write_trace_csv(w)?))?;
    run.metric("value", rep.value);
    run.metric("value_after_smoothing", rep.value_after_smoothing);
    run.metric("iterations", rep.iterations);
    run.metric("converged", rep.converged);
    run.metric("phi_conjectural", rep.phi_conjectural);
    let raw_diam = rep.raw.as_ref().map_or(rep.u_star.diam(), |g| g.diam());
    run.invariant("value_at_most_one", rep.value <= 1.0 + 1e-9);
    run.invariant("diam_within_r", raw_diam <= r + 1e-9);
    run.invariant("smoothing_keeps_value", rep.value_after_smoothing >= rep.value - 1e-6);
    run.invariant("smoothing_keeps_diam", rep.u_star.diam() <= raw_diam + 1e-12);
    if run.params.raw("density").unwrap_or("diamond") == "diamond" {
        let d = *rep.u_star.domain();
        let mut diffs = Vec::new();
        for i in 0..d.nx {
            for j in 0..d.ny {
                let (x, y) = (d.x(i), d.y(j));
                if in_diamond(x, y) {
                    diffs.push(rep.u_star.get(i, j) - (x + y));
                }
            }
        }
        let (dist, _) = shift_minimized_l1(&diffs, &vec![1.0; diffs.len()]);
        run.metric("mean_abs_deviation_from_x_plus_y", dist / diffs.len().max(1) as f64);
    }
    Ok(())
}

pub fn phi(run: &mut Run) -> anyhow::Result<()> {
    let rs = run.params.list_f64("r")?.unwrap_or_else(|| vec![std::f64::consts::SQRT_2]);
    let spec = RectangleSpec::new(run.params.get_or("beta", 10.0)?, run.params.get_or("gamma", 400.0)?).v()?;
    let reps: usize = run.params.get_or("reps", 20)?;
    let est = phi_curve(&rs, &spec, reps, run.seed()).v()?;
    run.out.write_with("phi.csv", |w| {
        writeln!(w, "r,k,mean,half_width,mean_per_area,reps,conjectured")?;
        for e in &est {
            writeln!(
                w,
                "{},{},{:.16e},{:.16e},{:.16e},{},{:.16e}",
                e.r,
                e.k,
                e.mean,
                e.half_width,
                e.mean_per_area,
                e.reps,
                PhiModel::Conjectured.eval(e.r)
            )?;
        }
        Ok(())
    })?;
    if let [single] = est.as_slice() {
        run.metric("phi", single.mean);
        run.metric("half_width", single.half_width);
    } else {
        run.metric("phi", est.iter().map(|e| e.mean).collect::<Vec<_>>());
    }
    run.invariant("nondecreasing_in_r", {
        let mut sorted = est.clone();
        sorted.sort_by(|a, b| a.r.partial_cmp(&b.r).unwrap());
        sorted.windows(2).all(|w| w[1].mean >= w[0].mean)
    });
    run.invariant("at_most_one", est.iter().all(|e| e.mean <= 1.0 + 1e-12));
    Ok(())
}

pub fn limitcheck(run: &mut Run) -> anyhow::Result<()> {
    let n: usize = run.params.require("n")?;
    let r: f64 = run.params.get_or("r", std::f64::consts::SQRT_2)?;
    let m: usize = run.params.get_or("grid", 41)?;
    let reps: usize = run.params.get_or("reps", 1)?;
    check(reps >= 1, || "--reps must be positive".into())?;
    let model = density_model(&run.params)?;
    let s = model.support;
    let d = GridDomain::spanning(s.x0, s.y0, s.x1, s.y1, m).v()?;
    let rho = DensityGrid::from_model(&model, d).v()?.normalized().v()?;
    // The pilot start gets its own stream, independent of the compared samples.
    let opts = MaximizeOptions { seed: run.seed().split(1), ..maximize_options(run)? };
    let rep = maximize(&rho, r, &PhiModel::Conjectured, &opts).v()?;
    let mut rows = Vec::new();
    for rep_idx in 0..reps {
        rows.push(limit_distance(&model, n, r, &rep.u_star, run.seed().split(0).split(rep_idx as u64)).v()?);
    }
    run.out.write_with("limitcheck.csv", |w| {
        writeln!(w, "rep,n,k,watermelon_size,raw,shifted,shift")?;
        for (i, d) in rows.iter().enumerate() {
            writeln!(w, "{i},{},{},{},{:.16e},{:.16e},{:.16e}", d.n, d.k, d.watermelon_size, d.raw, d.shifted, d.shift)?;
        }
        Ok(())
    })?;
    write_grid(run, "maximizer", &rep.u_star)?;
    let mut shifted: Vec<f64> = rows.iter().map(|d| d.shifted).collect();
    shifted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if shifted.len() % 2 == 1 {
        shifted[shifted.len() / 2]
    } else {
        0.5 * (shifted[shifted.len() / 2 - 1] + shifted[shifted.len() / 2])
    };
    run.metric("median_shifted_l1", median);
    run.metric("maximizer_value", rep.value_after_smoothing);
    run.invariant("value_at_most_one", rep.value <= 1.0 + 1e-9);
    Ok(())
}

pub fn counterexample(run: &mut Run) -> anyhow::Result<()> {
    let m: usize = run.params.get_or("grid", 201)?;
    check(m >= 3, || format!("--grid must be at least 3, got {m}"))?;
    let params = smoothing_params(run)?;
    let u = counterexample_grid::<f64>(m);
    write_grid(run, "counterexample", &u)?;
    let s = smooth_2d(&u, &params).v()?;
    write_grid(run, "smoothed", &s)?;
    let report = check_invariants(&u, &s, &params, 1000, run.seed()).v()?;
    run.out.write_json("smoothing_report.json", &report)?;
    run.metric("product_fraction_half", report.product_fraction_half);
    run.metric("modulus_excess", report.modulus);
    run.invariant("smoothing_invariants", report.passes());
    Ok(())
}

pub fn out_dir(p: &Params) -> PathBuf {
    p.raw("out")
        .map(PathBuf::from)
        .or_else(|| std::env::var_os("MONOSURF_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("monosurf-out"))
}
