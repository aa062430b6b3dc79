//! One runner per experiment kind. Runners push rows and report entries into
//! [`Artifacts`] as results become available and return the first numeric
//! failure, so whatever finished before it is still written out.

use aqrm_core::criticality::{
    collapse, cumulant_curve, cumulant_ratio, find_crossing, find_crossing_fn, fs_curve, scaling_analysis, scaling_grid,
    CollapseKind, Crossing, Curve, Family, ScalingCurve,
};
use aqrm_core::dynamics::{
    cat_protocol, coherent_overlap, compare_lab_effective, gate_unitary, ground_population, mean_photon_number,
    multiqubit_cat, principal_variances, propagate, qubit_entropy, quadrature_covariance, rotate_frame, target_gate,
    uniform_grid, wigner, Outcome, Trajectory,
};
use aqrm_core::hilbert::{reduce_to_field, DensityMatrix, StateVector};
use aqrm_core::models::{
    build_aqrm, effective_frame_diagonal, lab_hamiltonian_bare_frame, map_drives_to_aqrm, mapping_report, CircuitParams,
    TimeDependent,
};
use aqrm_core::units::to_mhz;
use aqrm_core::{AqrmError, Result, C64};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{Cat, CircuitSpec, Collapse, Cumulant, Dynamics, ExperimentConfig, Gate, Kind, Scaling, SweepFs, Wigner};
use crate::output::Artifacts;

fn io_err(e: std::io::Error) -> AqrmError {
    AqrmError::Resource(format!("cannot write artifact: {e}"))
}

/// Run the experiment described by a validated config.
pub fn execute(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let missing = || AqrmError::InvalidArgument(format!("missing [{}] section", cfg.kind));
    match cfg.kind {
        Kind::SweepFs => sweep_fs(cfg, cfg.sweep_fs.as_ref().ok_or_else(missing)?, art),
        Kind::Scaling => scaling(cfg, cfg.scaling.as_ref().ok_or_else(missing)?, art),
        Kind::Cumulant => cumulant(cfg, cfg.cumulant.as_ref().ok_or_else(missing)?, art),
        Kind::Collapse => run_collapse(cfg, cfg.collapse.as_ref().ok_or_else(missing)?, art),
        Kind::Dynamics => dynamics(cfg.dynamics.as_ref().ok_or_else(missing)?, art),
        Kind::Wigner => run_wigner(cfg.wigner.as_ref().ok_or_else(missing)?, art),
        Kind::Cat => cat(cfg, cfg.cat.as_ref().ok_or_else(missing)?, art),
        Kind::Gate => gate(cfg.gate.as_ref().ok_or_else(missing)?, art),
    }
}

const CRIT_UNITS: &str = "eta [1], lambda [1], ratio = g/g_c [1], g [resonator frequency]";

fn sweep_fs(cfg: &ExperimentConfig, s: &SweepFs, art: &mut Artifacts) -> Result<()> {
    let t = art.table(
        "fs_curves.csv",
        &format!("{CRIT_UNITS}, chi_F [1/resonator frequency^2]"),
        &["eta", "lambda", "ratio", "g", "chi_F"],
    );
    let ratios = s.ratios.values();
    let opts = s.fs.options(cfg.cutoff);
    for &eta in &s.etas {
        for &lambda in &s.lambdas {
            let fam = Family::scaled(eta, lambda);
            let curve = fs_curve(&fam, &ratios, &opts)?;
            for (r, (g, chi)) in ratios.iter().zip(curve.g_grid.iter().zip(&curve.chi)) {
                art.row(t, &[eta, lambda, *r, *g, *chi]);
            }
            let imax = (0..curve.chi.len()).max_by(|&a, &b| curve.chi[a].total_cmp(&curve.chi[b])).unwrap_or(0);
            art.append(
                "curves",
                json!({
                    "eta": eta,
                    "lambda": lambda,
                    "g_c": fam.critical_coupling()?,
                    "grid_peak_ratio": ratios[imax],
                    "grid_peak_chi": curve.chi[imax],
                }),
            );
        }
    }
    Ok(())
}

fn scaling(cfg: &ExperimentConfig, s: &Scaling, art: &mut Artifacts) -> Result<()> {
    let t = art.table(
        "peaks.csv",
        "lambda [1], eta [1], ratio = g_max/g_c [1], g_max [resonator frequency], chi_max [1/resonator frequency^2]",
        &["lambda", "eta", "ratio", "g_max", "chi_max"],
    );
    let opts = s.options(cfg.cutoff);
    for &lambda in &s.lambdas {
        let a = scaling_analysis(&s.etas, lambda, &opts)?;
        for p in &a.peaks {
            art.row(t, &[lambda, p.eta, p.ratio, p.g_max, p.chi_max]);
        }
        art.append(
            "lambdas",
            json!({
                "lambda": lambda,
                "adiabatic_dimension": a.adiabatic_dimension,
                "shift": a.shift,
                "nu": -1.0 / a.shift.exponent,
                "peaks": a.peaks,
            }),
        );
    }
    art.set("etas", &s.etas);
    Ok(())
}

fn families(pairs: &[[f64; 2]]) -> Vec<Family> {
    pairs.iter().map(|&[eta, lambda]| Family::scaled(eta, lambda)).collect()
}

/// Crossing of two sampled cumulant curves, refined by bisection on the
/// bracketing grid interval.
fn refine_crossing(a: &Family, b: &Family, ca: &ScalingCurve, cb: &ScalingCurve, cfg: &ExperimentConfig, xtol: f64) -> Result<Crossing> {
    let coarse = find_crossing(&Curve::new(ca.ratios.clone(), ca.values.clone())?, &Curve::new(cb.ratios.clone(), cb.values.clone())?)?;
    let xs = &ca.ratios;
    let k = xs.partition_point(|&x| x <= coarse.x).clamp(1, xs.len() - 1);
    let ua = |r: f64| cumulant_ratio(&a.at_ratio(r), &cfg.cutoff);
    let ub = |r: f64| cumulant_ratio(&b.at_ratio(r), &cfg.cutoff);
    find_crossing_fn(ua, ub, &[xs[k - 1], xs[k]], xtol)
}

fn cumulant(cfg: &ExperimentConfig, s: &Cumulant, art: &mut Artifacts) -> Result<()> {
    let t = art.table(
        "cumulant.csv",
        &format!("{CRIT_UNITS}, eta_prime [1], U_X [1]"),
        &["eta", "lambda", "eta_prime", "ratio", "U_X"],
    );
    let ratios = s.ratios.values();
    let fams = families(&s.pairs);
    let mut curves = Vec::new();
    for fam in &fams {
        let c = cumulant_curve(fam, &ratios, &cfg.cutoff)?;
        for (r, u) in c.ratios.iter().zip(&c.values) {
            art.row(t, &[c.eta, c.lambda, c.eta_prime, *r, *u]);
        }
        let u0 = cumulant_ratio(&fam.at(0.0), &cfg.cutoff)?;
        art.append("u_at_zero_coupling", json!({ "eta": c.eta, "lambda": c.lambda, "U_X": u0 }));
        curves.push(c);
    }
    let mut jobs = Vec::new();
    for i in 0..fams.len() {
        for j in i + 1..fams.len() {
            let (a, b) = (curves[i].eta_prime, curves[j].eta_prime);
            if a.max(b) / a.min(b) >= s.min_eta_prime_ratio {
                jobs.push((i, j));
            }
        }
    }
    let found: Vec<Result<Crossing>> =
        jobs.par_iter().map(|&(i, j)| refine_crossing(&fams[i], &fams[j], &curves[i], &curves[j], cfg, s.xtol)).collect();
    let ct = art.table(
        "crossings.csv",
        "eta [1], lambda [1], g_star = crossing coupling / g_c [1], U_star [1]",
        &["eta_a", "lambda_a", "eta_b", "lambda_b", "g_star", "U_star"],
    );
    let mut ok = Vec::new();
    for (&(i, j), r) in jobs.iter().zip(found) {
        let (a, b) = (&s.pairs[i], &s.pairs[j]);
        match r {
            Ok(c) => {
                art.row(ct, &[a[0], a[1], b[0], b[1], c.x, c.y]);
                art.append("crossings", json!({ "a": a, "b": b, "g_star": c.x, "U_star": c.y }));
                ok.push(c);
            }
            Err(e @ AqrmError::AmbiguousCrossing { .. }) => {
                art.warn(format!("curves {a:?} and {b:?}: {e}"));
                art.append("crossings", json!({ "a": a, "b": b, "error": e.to_string() }));
            }
            Err(e) => return Err(e),
        }
    }
    if !ok.is_empty() {
        let mean = ok.iter().map(|c| c.y).sum::<f64>() / ok.len() as f64;
        art.set(
            "summary",
            json!({
                "crossings": ok.len(),
                "max_offset": ok.iter().map(|c| (c.x - 1.0).abs()).fold(0.0, f64::max),
                "mean_ordinate": mean,
                "max_ordinate_spread": ok.iter().map(|c| (c.y - mean).abs() / mean).fold(0.0, f64::max),
            }),
        );
    }
    Ok(())
}

fn run_collapse(cfg: &ExperimentConfig, s: &Collapse, art: &mut Artifacts) -> Result<()> {
    let raw = art.table(
        "scaling_curves.csv",
        &format!("{CRIT_UNITS}, eta_prime [1], value [U_X: 1; chi_F: 1/resonator frequency^2]"),
        &["eta", "lambda", "eta_prime", "ratio", "value"],
    );
    let fs = s.fs.options(cfg.cutoff);
    let mut curves = Vec::new();
    for fam in families(&s.pairs) {
        let grid = scaling_grid(fam.eta_prime()?, s.nu, s.half_width, s.points);
        let c = match s.observable {
            CollapseKind::Cumulant => cumulant_curve(&fam, &grid, &cfg.cutoff)?,
            CollapseKind::Susceptibility => {
                let f = fs_curve(&fam, &grid, &fs)?;
                ScalingCurve { eta: f.eta, lambda: f.lambda, eta_prime: fam.eta_prime()?, ratios: grid, values: f.chi }
            }
        };
        for (r, v) in c.ratios.iter().zip(&c.values) {
            art.row(raw, &[c.eta, c.lambda, c.eta_prime, *r, *v]);
        }
        curves.push(c);
    }
    let main = collapse(&curves, s.d_a, s.nu, s.observable)?;
    let t = art.table(
        "collapse.csv",
        "eta [1], lambda [1], x = eta_prime^(1/nu) (g/g_c - 1) [1], y = rescaled value / fitted constant [1]",
        &["eta", "lambda", "x", "y"],
    );
    for ((c, r), k) in curves.iter().zip(&main.curves).zip(&main.constants) {
        for (x, y) in r.xs.iter().zip(&r.ys) {
            art.row(t, &[c.eta, c.lambda, *x, y / k]);
        }
    }
    let summary = |r: &aqrm_core::criticality::CollapseResult| {
        json!({ "d_a": r.d_a, "nu": r.nu, "residual": r.residual, "window": r.window, "constants": r.constants })
    };
    art.set("collapse", summary(&main));
    if let Some(nu) = s.contrast_nu {
        let c = collapse(&curves, s.d_a, nu, s.observable)?;
        art.set("contrast", summary(&c));
    }
    Ok(())
}

fn circuit_of(spec: &CircuitSpec, art: &mut Artifacts) -> Result<CircuitParams> {
    let c = spec.circuit();
    c.validate()?;
    let report = mapping_report(&c, spec.target.map(|t| t.eta));
    for w in report.validity.warnings() {
        art.warn(w);
    }
    let eff = report.text;
    art.set(
        "effective_mhz",
        json!({
            "omega": to_mhz(eff.omega),
            "omega_q": to_mhz(eff.omega_q),
            "g_r": to_mhz(eff.g_r),
            "g_cr": to_mhz(eff.g_cr),
            "eta": eff.eta(),
            "ratio": eff.coupling_ratio(),
        }),
    );
    art.set("mapping", &report);
    art.set(
        "drives",
        json!({
            "red_frequency_ghz": c.red.frequency / (2.0 * std::f64::consts::PI * 1e9),
            "blue_frequency_ghz": c.blue.frequency / (2.0 * std::f64::consts::PI * 1e9),
            "red_coupling_mhz": to_mhz(c.red.coupling),
            "blue_coupling_mhz": to_mhz(c.blue.coupling),
        }),
    );
    Ok(c)
}

fn trajectory_meta(t: &Trajectory) -> serde_json::Value {
    json!({ "method": t.method, "dt": t.dt, "steps": t.steps, "max_drift": t.max_drift, "drift_per_period": t.drift_per_period })
}

fn dynamics(s: &Dynamics, art: &mut Artifacts) -> Result<()> {
    let c = circuit_of(&s.circuit, art)?;
    let grid = uniform_grid(0.0, s.t_end_ns * 1e-9, s.records)?;
    let opts = s.options();
    let (lab, eff) = if s.mode.lab() && s.mode.effective() {
        let cmp = compare_lab_effective(&c, s.cutoff, &grid, &opts)?;
        art.set("max_abs_diff", json!({ "P_g": cmp.max_dp_g, "S_G": cmp.max_ds_g }));
        (Some(cmp.lab), Some(cmp.effective))
    } else if s.mode.lab() {
        let h = lab_hamiltonian_bare_frame(&c, s.cutoff)?;
        let psi = StateVector::basis(TimeDependent::shape(&h), 1, 0)?;
        (Some(propagate(&h, &psi, &grid, &opts)?), None)
    } else {
        let h = build_aqrm(&map_drives_to_aqrm(&c), s.cutoff)?;
        let psi = StateVector::basis(h.shape(), 1, 0)?;
        let eff_opts = aqrm_core::dynamics::PropagateOptions { dt_max: None, ..opts };
        (None, Some(propagate(&h, &psi, &grid, &eff_opts)?))
    };
    for (name, t) in [("lab", &lab), ("effective", &eff)] {
        if let Some(t) = t {
            art.write(&format!("trajectory_{name}.csv"), &t.to_csv("s")).map_err(io_err)?;
            art.set(&format!("trajectory_{name}"), trajectory_meta(t));
        }
    }
    art.set("cutoff", s.cutoff);
    Ok(())
}

struct Snapshot {
    t: f64,
    p_g: f64,
    s_g: f64,
    n_mean: f64,
    field: DensityMatrix,
}

fn snapshots(traj: &Trajectory, wanted: &[f64], rotate: Option<&[f64]>) -> Result<Vec<Snapshot>> {
    let mut out = Vec::new();
    for &t in wanted {
        let k = traj.records.iter().position(|r| r.t == t).ok_or_else(|| AqrmError::InvalidArgument("snapshot time missing".into()))?;
        let psi = match rotate {
            Some(d) => rotate_frame(&traj.states[k], d, t)?,
            None => traj.states[k].clone(),
        };
        out.push(Snapshot {
            t,
            p_g: ground_population(&psi),
            s_g: qubit_entropy(&psi)?,
            n_mean: mean_photon_number(&psi),
            field: reduce_to_field(&psi),
        });
    }
    Ok(out)
}

fn run_wigner(s: &Wigner, art: &mut Artifacts) -> Result<()> {
    let c = circuit_of(&s.circuit, art)?;
    let times: Vec<f64> = s.times_ns.iter().map(|t| t * 1e-9).collect();
    let mut grid = times.clone();
    if grid[0] > 0.0 {
        grid.insert(0, 0.0);
    }
    let opts = s.options();
    let lab_run = || -> Result<Vec<Snapshot>> {
        let h = lab_hamiltonian_bare_frame(&c, s.cutoff)?;
        let psi = StateVector::basis(TimeDependent::shape(&h), 1, 0)?;
        snapshots(&propagate(&h, &psi, &grid, &opts)?, &times, None)
    };
    let eff_run = || -> Result<Vec<Snapshot>> {
        let h = build_aqrm(&map_drives_to_aqrm(&c), s.cutoff)?;
        let psi = StateVector::basis(h.shape(), 1, 0)?;
        let eff_opts = aqrm_core::dynamics::PropagateOptions { dt_max: None, ..opts };
        // into the bare-resonator frame of the lab run
        let diag = effective_frame_diagonal(&c, s.cutoff);
        snapshots(&propagate(&h, &psi, &grid, &eff_opts)?, &times, Some(&diag))
    };
    let (lab, eff) = rayon::join(
        || if s.mode.lab() { Some(lab_run()) } else { None },
        || if s.mode.effective() { Some(eff_run()) } else { None },
    );
    let lab = lab.transpose()?;
    let eff = eff.transpose()?;
    let t = art.table(
        "snapshots.csv",
        "model [0 = effective, 1 = lab], t [s], P_g [probability], S_G [bits], n_mean [photons], W_norm [1], coverage [1], var_major [quadrature^2], var_minor [quadrature^2]",
        &["model", "t", "P_g", "S_G", "n_mean", "W_norm", "coverage", "var_major", "var_minor"],
    );
    let mut grids: Vec<Vec<aqrm_core::dynamics::WignerGrid>> = Vec::new();
    for (code, name, snaps) in [(0.0, "effective", &eff), (1.0, "lab", &lab)] {
        let Some(snaps) = snaps else { continue };
        let mut gs = Vec::new();
        for (i, sn) in snaps.iter().enumerate() {
            let w = wigner(&sn.field, &s.grid)?;
            for warning in &w.warnings {
                art.warn(format!("{name} t = {:.4e} s: {warning}", sn.t));
            }
            let var = principal_variances(&sn.field);
            let (cov, mean) = quadrature_covariance(&sn.field);
            art.row(t, &[code, sn.t, sn.p_g, sn.s_g, sn.n_mean, w.normalization(), w.coverage, var[0].max(var[1]), var[0].min(var[1])]);
            art.append(
                &format!("snapshots_{name}"),
                json!({ "t": sn.t, "file": format!("wigner_{name}_{i}.json"), "covariance": cov, "mean": [mean.0, mean.1] }),
            );
            art.write(&format!("wigner_{name}_{i}.json"), &w.to_json()).map_err(io_err)?;
            gs.push(w);
        }
        grids.push(gs);
    }
    if grids.len() == 2 {
        let d = grids[0].iter().zip(&grids[1]).map(|(a, b)| a.l2_distance(b)).collect::<Result<Vec<f64>>>()?;
        art.set("l2_distance_lab_effective", d);
    }
    art.set("cutoff", s.cutoff);
    Ok(())
}

fn cat(cfg: &ExperimentConfig, s: &Cat, art: &mut Artifacts) -> Result<()> {
    let d = s.params();
    let t = s.t_ns * 1e-9;
    if s.n_qubits == 1 {
        let r = cat_protocol(&d, t, s.mode, s.measurement(cfg.seed), s.cutoff)?;
        for w in &r.warnings {
            art.warn(w.clone());
        }
        let a = r.alpha();
        art.set("quasi_orthogonality", coherent_overlap(a, a * C64::new(0.0, 1.0)));
        let tb = art.table(
            "cat_branches.csv",
            "outcome [0 = g, 1 = e], probability [1], expected_probability [1], fidelity [1]",
            &["outcome", "probability", "expected_probability", "fidelity"],
        );
        for b in &r.branches {
            let code = if b.outcome == Outcome::G { 0.0 } else { 1.0 };
            art.row(tb, &[code, b.probability, b.expected_probability, b.fidelity]);
            if let Some(g) = &s.grid {
                let w = wigner(&DensityMatrix::from_pure(&b.field), g)?;
                let name = if b.outcome == Outcome::G { "g" } else { "e" };
                art.write(&format!("wigner_cat_{name}.json"), &w.to_json()).map_err(io_err)?;
            }
        }
        art.set("cat", &r);
    } else {
        let m = multiqubit_cat(&d, t, s.cutoff)?;
        if let Some(g) = &s.grid {
            let w = wigner(&reduce_to_field(&m.state), g)?;
            art.write("wigner_cat_field.json", &w.to_json()).map_err(io_err)?;
        }
        art.set("multiqubit_cat", &m);
    }
    Ok(())
}

fn gate(s: &Gate, art: &mut Artifacts) -> Result<()> {
    let r = gate_unitary(&s.params(), s.mode, s.cutoff)?;
    let target = target_gate(r.theta);
    let t = art.table(
        "gate.csv",
        "row, col [basis index in {ee, eg, ge, gg}], re, im, target_re, target_im [1]",
        &["row", "col", "re", "im", "target_re", "target_im"],
    );
    for i in 0..4 {
        for j in 0..4 {
            let u = r.entry(i, j);
            art.row(t, &[i as f64, j as f64, u.re, u.im, target[i][j].re, target[i][j].im]);
        }
    }
    art.set("gate", &r);
    Ok(())
}
