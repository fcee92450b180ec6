use std::path::Path;

use hhdr::analysis::{fourier_map, overlay_curves, DftOptions, SpectrumFit, Window};
use hhdr::bath::{
    bias_scan, cooling_schedule, fit_linewidth, generate_bath, run_sweeps, BathConfig, FidOptions, Interleaving,
    LinewidthSetup, NuclearBath, SweepSchedule,
};
use hhdr::engine::{simulate_map, MapOptions, SpectroscopyMap, SpinSystem};
use hhdr::spin_model::{flip_flop_rate, hyperfine_from_coupling, invert_spectroscopy, Constants, HyperfineVector};
use hhdr::Vec3;
use rayon::prelude::*;

use crate::config::{parse_quantity, parse_quantity_cli, Config, ConfigError, Dim};
use crate::output::{read_table, Cell, OutputDir, Table};
use crate::CliError;

/// Inputs shared by every command.
pub struct Context<'a> {
    pub cfg: &'a Config,
    pub digest: String,
    pub out: &'a mut OutputDir,
}

impl Context<'_> {
    fn emit(&mut self, file: &str, table: &Table) -> Result<(), CliError> {
        let text = table.render(&self.digest);
        self.out.write(file, &text).map_err(CliError::Io)
    }
}

fn field(cfg: &Config) -> Result<Vec3, ConfigError> {
    cfg.require("field", "b")?;
    let (line, text) = cfg.all("field", "b")[0];
    let bad = |msg: String| ConfigError::Value { line, section: "field".into(), key: "b".into(), msg };
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let b = match parts.len() {
        1 => Vec3::new(0.0, 0.0, parse_quantity(parts[0], Dim::Field).map_err(bad)?),
        3 => {
            let last = parse_quantity(parts[2], Dim::Field).map_err(bad)?;
            let num = parts[2].split_whitespace().next().unwrap_or("");
            let scale = last / num.parse::<f64>().map_err(|e| bad(e.to_string()))?;
            let comp = |s: &str| s.parse::<f64>().map(|v| v * scale).map_err(|e| bad(format!("{s:?}: {e}")));
            Vec3::new(comp(parts[0])?, comp(parts[1])?, last)
        }
        _ => return Err(bad("expected `<value> <unit>` or `x, y, z <unit>`".into())),
    };
    if !(b.norm() > 0.0) {
        return Err(bad("field must be non-zero".into()));
    }
    Ok(b)
}

fn grid(cfg: &Config, section: &str, stem: &str, dim: Dim) -> Result<Vec<f64>, ConfigError> {
    let start = cfg.quantity_req(section, &format!("{stem}_start"), dim)?;
    let stop = cfg.quantity_req(section, &format!("{stem}_stop"), dim)?;
    let step = cfg.quantity_req(section, &format!("{stem}_step"), dim)?;
    if !(step > 0.0) || stop < start {
        return Err(ConfigError::Other(format!("[{section}] {stem}: need step > 0 and stop ≥ start")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if n > 1_000_000 {
        return Err(ConfigError::Other(format!("[{section}] {stem}: {n} grid points is too many")));
    }
    Ok((0..n).map(|i| start + i as f64 * step).collect())
}

fn constants() -> Constants {
    Constants::default()
}

fn explicit_nuclei(cfg: &Config, b: &Vec3, c: &Constants) -> Result<Vec<HyperfineVector>, CliError> {
    let mut out = Vec::new();
    for (line, text) in cfg.all("bath", "nucleus") {
        let err = |msg: String| ConfigError::Value { line, section: "bath".into(), key: "nucleus".into(), msg };
        let (q, theta) = text
            .split_once(',')
            .ok_or_else(|| err("expected `<coupling>, <angle>`, e.g. `220 kHz, 56 deg`".into()))?;
        let q = parse_quantity(q, Dim::Frequency).map_err(err)?;
        let theta = parse_quantity(theta, Dim::Angle).map_err(err)?;
        out.push(hyperfine_from_coupling(b, q, theta, c).map_err(|e| err(e.to_string()))?);
    }
    Ok(out)
}

fn bath_config(cfg: &Config, b: Vec3, default_radius: f64) -> Result<BathConfig, ConfigError> {
    let d = BathConfig::default();
    Ok(BathConfig {
        abundance: cfg.number("bath", "abundance")?.unwrap_or(d.abundance),
        radius: cfg.quantity("bath", "radius", Dim::Length)?.unwrap_or(default_radius),
        min_distance: cfg.quantity("bath", "min_distance", Dim::Length)?.unwrap_or(d.min_distance),
        b,
        seed: cfg.integer("bath", "seed")?.unwrap_or(0),
        target_count: cfg.integer("bath", "count")?.map(|n| n as usize),
    })
}

fn spin_system(cfg: &Config) -> Result<(SpinSystem, Vec<&'static str>), CliError> {
    let c = constants();
    let b = field(cfg)?;
    let mut nuclei = explicit_nuclei(cfg, &b, &c)?;
    let mut source = vec!["config"; nuclei.len()];
    if cfg.flag("bath", "enabled")?.unwrap_or(false) {
        let bc = bath_config(cfg, b, 2.5e-9)?;
        let min_r = cfg.quantity("bath", "engine_min_radius", Dim::Length)?.unwrap_or(1.0e-9);
        let take = cfg.integer("bath", "engine_nuclei")?.unwrap_or(6) as usize;
        let bath = generate_bath(&BathConfig { target_count: None, ..bc }, &c)?;
        let picked: Vec<HyperfineVector> =
            bath.nuclei.iter().filter(|n| n.position.norm() > min_r).take(take).map(|n| n.a).collect();
        source.extend(std::iter::repeat_n("bath", picked.len()));
        nuclei.extend(picked);
    }
    let t1rho = cfg.quantity("drive", "t1rho", Dim::Time)?;
    let sys = SpinSystem::new(b, nuclei, c)?.with_t1rho(t1rho)?;
    Ok((sys, source))
}

const MAP_COLUMNS: [&str; 3] = ["omega_hz", "tau_s", "signal"];

fn map_table(map: &SpectroscopyMap, notes: &[String]) -> Table {
    let mut t = Table::new("spectroscopy_map", &MAP_COLUMNS);
    for n in notes {
        t.note(n.clone());
    }
    for (i, &w) in map.omegas.iter().enumerate() {
        for (j, &tau) in map.taus.iter().enumerate() {
            t.row(vec![w.into(), tau.into(), map.get(i, j).into()]);
        }
    }
    t
}

/// Reads a long-format map back; returns it with its digest and notes.
fn parse_map(text: &str) -> Result<(SpectroscopyMap, String, Vec<String>), CliError> {
    let bad = |m: String| CliError::Config(ConfigError::Other(format!("map file: {m}")));
    let (notes, columns, rows) = read_table(text).map_err(bad)?;
    if columns != MAP_COLUMNS {
        return Err(bad(format!("expected columns {MAP_COLUMNS:?}, got {columns:?}")));
    }
    let mut digest = None;
    let mut extra = Vec::new();
    for n in notes {
        if let Some(d) = n.strip_prefix("config_sha256: ") {
            digest = Some(d.to_string());
        } else if !n.starts_with("table: ") {
            extra.push(n);
        }
    }
    let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("{s:?}: {e}")));
    let mut omegas: Vec<f64> = Vec::new();
    let mut taus: Vec<f64> = Vec::new();
    let mut values = Vec::with_capacity(rows.len());
    for r in &rows {
        let (w, t, v) = (num(&r[0])?, num(&r[1])?, num(&r[2])?);
        if omegas.last() != Some(&w) {
            omegas.push(w);
        }
        if omegas.len() == 1 {
            taus.push(t);
        }
        values.push(v);
    }
    let map = SpectroscopyMap::new(omegas, taus, values).map_err(|e| bad(e.to_string()))?;
    for (k, r) in rows.iter().enumerate() {
        if num(&r[1])?.to_bits() != map.taus[k % map.taus.len()].to_bits() {
            return Err(bad("τ axis differs between Ω rows".into()));
        }
    }
    Ok((map, digest.ok_or_else(|| bad("missing config_sha256 note".into()))?, extra))
}

fn run_map(cfg: &Config) -> Result<(SpectroscopyMap, SpinSystem, Vec<&'static str>), CliError> {
    let (sys, source) = spin_system(cfg)?;
    let omegas = grid(cfg, "drive", "omega", Dim::Frequency)?;
    let taus = grid(cfg, "drive", "tau", Dim::Time)?;
    let contrast_factor = cfg.flag("drive", "contrast_factor")?.unwrap_or(false);
    let map = simulate_map(&sys, &omegas, &taus, MapOptions { contrast_factor })?;
    Ok((map, sys, source))
}

fn map_notes(sys: &SpinSystem, cfg: &Config) -> Result<Vec<String>, CliError> {
    let b = sys.b;
    let cf = cfg.flag("drive", "contrast_factor")?.unwrap_or(false);
    Ok(vec![
        format!("field_t: {:e} {:e} {:e}", b.x, b.y, b.z),
        format!("nuclei: {}", sys.n_nuclei()),
        format!("contrast_factor: {cf}"),
        "signal: alternating spin-lock transfer (p0+ + 1 - p0-)/2".into(),
    ])
}

pub fn spectroscopy(ctx: &mut Context) -> Result<String, CliError> {
    let (map, sys, source) = run_map(ctx.cfg)?;
    let mut nuc = Table::new(
        "nuclei",
        &["index", "source", "ax_t", "ay_t", "az_t", "quarter_coupling_hz", "theta_deg", "omega_opt_hz", "j_hz"],
    );
    for (k, a) in sys.nuclei.iter().enumerate() {
        let p = flip_flop_rate(&sys.b, a, &sys.constants)?;
        nuc.row(vec![
            k.into(),
            source[k].into(),
            a.a.x.into(),
            a.a.y.into(),
            a.a.z.into(),
            a.quarter_coupling(&sys.constants).into(),
            p.theta.to_degrees().into(),
            p.omega_opt.into(),
            p.j.into(),
        ]);
    }
    ctx.emit("nuclei.tsv", &nuc)?;
    let notes = map_notes(&sys, ctx.cfg)?;
    ctx.emit("spectroscopy_map.tsv", &map_table(&map, &notes))?;
    Ok(format!("map: {} Ω × {} τ, {} nuclei", map.omegas.len(), map.taus.len(), sys.n_nuclei()))
}

fn dft_options(cfg: &Config, default_pad: usize) -> Result<DftOptions, CliError> {
    let window = match cfg.text("analysis", "window") {
        None | Some("none") => Window::None,
        Some("hann") => Window::Hann,
        Some(w) => return Err(ConfigError::Other(format!("[analysis] window: unknown window {w:?} (none | hann)")).into()),
    };
    let zero_pad = cfg.integer("analysis", "zero_pad")?.unwrap_or(default_pad as u64) as usize;
    if zero_pad == 0 {
        return Err(ConfigError::Other("[analysis] zero_pad must be ≥ 1".into()).into());
    }
    Ok(DftOptions { zero_pad, window, subtract_mean: true })
}

pub fn fourier(ctx: &mut Context, map_file: Option<&Path>) -> Result<String, CliError> {
    let (map, b, coupling) = match map_file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(CliError::Io)?;
            let (map, digest, notes) = parse_map(&text)?;
            // Re-emit the source map unchanged so the pipeline is auditable.
            let table = map_table(&map, &notes);
            ctx.out.write("spectroscopy_map.tsv", &table.render(&digest)).map_err(CliError::Io)?;
            let b = if ctx.cfg.has("field", "b") {
                Some(field(ctx.cfg)?)
            } else {
                notes.iter().find_map(|n| n.strip_prefix("field_t: ")).and_then(|v| {
                    let c: Vec<f64> = v.split_whitespace().filter_map(|x| x.parse().ok()).collect();
                    (c.len() == 3).then(|| Vec3::new(c[0], c[1], c[2]))
                })
            };
            (map, b, None)
        }
        None => {
            let (map, sys, _) = run_map(ctx.cfg)?;
            let notes = map_notes(&sys, ctx.cfg)?;
            ctx.emit("spectroscopy_map.tsv", &map_table(&map, &notes))?;
            let first = sys.nuclei.first().map(|a| a.quarter_coupling(&sys.constants));
            (map, Some(sys.b), first)
        }
    };
    let opts = dft_options(ctx.cfg, 4)?;
    let fm = fourier_map(&map, &opts)?;
    let mut t = Table::new("fourier_map", &["omega_hz", "frequency_hz", "amplitude"]);
    t.note(format!("zero_pad: {}", opts.zero_pad));
    for (i, &w) in fm.omegas.iter().enumerate() {
        for (k, &f) in fm.freqs.iter().enumerate() {
            t.row(vec![w.into(), f.into(), fm.get(i, k).into()]);
        }
    }
    ctx.emit("fourier_map.tsv", &t)?;

    let coupling = match ctx.cfg.quantity("analysis", "overlay_coupling", Dim::Frequency)? {
        Some(q) => Some(q),
        None => coupling,
    };
    let mut summary = format!("fourier map: {} Ω × {} frequencies", fm.omegas.len(), fm.freqs.len());
    if let (Some(b), Some(q)) = (b, coupling) {
        let n = ctx.cfg.integer("analysis", "overlay_angles")?.unwrap_or(181) as usize;
        let ov = overlay_curves(&b, q, &constants(), n)?;
        let mut t = Table::new("overlay", &["alpha_deg", "theta_deg", "omega_opt_hz", "j_hz"]);
        t.note(format!("quarter_coupling_hz: {}", crate::output::fmt_f64(q)));
        t.note(format!("bare_larmor_hz: {}", crate::output::fmt_f64(ov.bare_larmor)));
        for p in &ov.points {
            t.row(vec![p.alpha.to_degrees().into(), p.theta.to_degrees().into(), p.omega_opt.into(), p.j.into()]);
        }
        ctx.emit("overlay.tsv", &t)?;
        summary.push_str(&format!(", overlay for {:.1} kHz", q / 1e3));
    }
    Ok(summary)
}

pub struct InvertArgs<'a> {
    pub omega_opt: Option<&'a str>,
    pub j: Option<&'a str>,
    pub b: Option<&'a str>,
}

pub fn invert(ctx: &mut Context, args: &InvertArgs) -> Result<String, CliError> {
    let need = |v: Option<&str>, name: &str| {
        v.map(str::to_string).ok_or_else(|| CliError::Config(ConfigError::Other(format!("invert needs --{name}"))))
    };
    let omega = parse_quantity_cli(&need(args.omega_opt, "omega-opt")?, Dim::Frequency)?;
    let j = parse_quantity_cli(&need(args.j, "j")?, Dim::Frequency)?;
    let b = match args.b {
        Some(text) => Vec3::new(0.0, 0.0, parse_quantity_cli(text, Dim::Field)?),
        None => field(ctx.cfg)?,
    };
    let inv = invert_spectroscopy(omega, j, &b, &constants())?;
    let mut t = Table::new(
        "inversion",
        &["branch", "primary", "quarter_coupling_hz", "a_magnitude_t", "theta_deg", "theta_folded_deg", "alpha_deg"],
    );
    t.note(format!("omega_opt_hz: {}", crate::output::fmt_f64(omega)));
    t.note(format!("j_hz: {}", crate::output::fmt_f64(j)));
    t.note(format!("field_t: {:e} {:e} {:e}", b.x, b.y, b.z));
    let mut report = String::new();
    for (k, br) in inv.branches.iter().enumerate() {
        let primary = *br == inv.primary;
        t.row(vec![
            k.into(),
            primary.into(),
            br.quarter_coupling.into(),
            br.a_magnitude.into(),
            br.theta.to_degrees().into(),
            br.theta_folded().to_degrees().into(),
            br.alpha.to_degrees().into(),
        ]);
        report.push_str(&format!(
            "branch {k}{}: (1/4)γ|A| = {:.1} kHz, θ = {:.2}° (folded {:.2}°), angle to B = {:.2}°\n",
            if primary { " (primary)" } else { "" },
            br.quarter_coupling / 1e3,
            br.theta.to_degrees(),
            br.theta_folded().to_degrees(),
            br.alpha.to_degrees()
        ));
    }
    ctx.emit("inversion.tsv", &t)?;
    Ok(report.trim_end().to_string())
}

struct BathRun {
    bath: NuclearBath,
    schedule: SweepSchedule,
    note: String,
    setup: LinewidthSetup,
}

fn bath_run(cfg: &Config) -> Result<BathRun, CliError> {
    let c = constants();
    let b = field(cfg)?;
    let bath = generate_bath(&bath_config(cfg, b, 4.5e-9)?, &c)?;
    cfg.require("sequence", "sweeps")?;
    let sweeps = cfg.integer("sequence", "sweeps")?.expect("checked") as usize;
    let interleaving = match cfg.text("sequence", "interleaving") {
        None | Some("mixed") => Interleaving::Mixed,
        Some("alternating") => Interleaving::Alternating,
        Some("blocked") => Interleaving::Blocked,
        Some(o) => {
            return Err(ConfigError::Other(format!(
                "[sequence] interleaving: unknown {o:?} (mixed | alternating | blocked)"
            ))
            .into())
        }
    };
    let omega = cfg.quantity_or_word("sequence", "lock_omega", Dim::Frequency, "auto")?.flatten();
    let tau = cfg.quantity_or_word("sequence", "lock_tau", Dim::Time, "auto")?.flatten();
    let (schedule, note) = match (omega, tau) {
        (Some(omega), Some(tau)) => {
            (SweepSchedule::new(sweeps, 0, interleaving, omega, tau)?, "lock: configured".to_string())
        }
        (None, None) => {
            let floor = cfg.quantity("sequence", "j_floor", Dim::Frequency)?.unwrap_or(2e3);
            let d = cooling_schedule(&bath, sweeps.max(1), floor, &c)?;
            let s = SweepSchedule { n_plus: sweeps, n_minus: 0, interleaving, ..d.schedule };
            (s, format!("lock: matched to nucleus {} (reach {})", d.target, crate::output::fmt_f64(d.reach)))
        }
        _ => {
            return Err(ConfigError::Other("[sequence] lock_omega and lock_tau must both be set or both auto".into()).into())
        }
    };
    let setup = LinewidthSetup::uniform(
        FidOptions {
            detuning: cfg.quantity("analysis", "detuning", Dim::Frequency)?.unwrap_or(5e6),
            drift_broadening: cfg.quantity_or_word("analysis", "drift_broadening", Dim::Frequency, "none")?.unwrap_or(Some(150e3)),
            host_beat: cfg.flag("analysis", "host_beat")?.unwrap_or(true),
            bath: true,
        },
        cfg.integer("analysis", "samples")?.unwrap_or(2048) as usize,
        cfg.quantity("analysis", "dt", Dim::Time)?.unwrap_or(20e-9),
        dft_options(cfg, 4)?,
    );
    Ok(BathRun { bath, schedule, note, setup })
}

fn lock_notes(t: &mut Table, run: &BathRun) {
    t.note(run.note.clone());
    t.note(format!("lock_omega_hz: {}", crate::output::fmt_f64(run.schedule.omega)));
    t.note(format!("lock_tau_s: {}", crate::output::fmt_f64(run.schedule.tau)));
    t.note(format!("nuclei: {}", run.bath.len()));
}

const FIT_COLUMNS: [&str; 12] = [
    "fwhm_hz",
    "fwhm_std_hz",
    "t2star_s",
    "t2star_std_s",
    "sigma_hz",
    "lambda1",
    "mu1_hz",
    "lambda2",
    "mu2_hz",
    "residual_norm",
    "single_peak",
    "status",
];

fn fit_cells(fit: &Result<SpectrumFit, hhdr::Error>) -> Vec<Cell> {
    match fit {
        Ok(f) => {
            let rel = f.param_std[4] / f.sigma;
            vec![
                f.fwhm.into(),
                (f.fwhm * rel).into(),
                f.t2star.into(),
                (f.t2star * rel).into(),
                f.sigma.into(),
                f.lambda1.into(),
                f.mu1.into(),
                f.lambda2.into(),
                f.mu2.into(),
                f.residual_norm.into(),
                f.single_peak.into(),
                "ok".into(),
            ]
        }
        Err(e) => {
            let mut v: Vec<Cell> = (0..10).map(|_| f64::NAN.into()).collect();
            v.push("false".into());
            v.push(format!("error: {e}").replace(['\t', '\n'], " ").as_str().into());
            v
        }
    }
}

pub fn polarize(ctx: &mut Context) -> Result<String, CliError> {
    let run = bath_run(ctx.cfg)?;
    let cfg = ctx.cfg;
    let bias = cfg.number("sequence", "bias")?.unwrap_or(1.0);
    let schedule = run.schedule.with_bias(bias)?;
    let total = schedule.total();
    let mut snaps: Vec<usize> = cfg
        .list("sequence", "snapshots", |s| s.parse::<usize>().map_err(|_| format!("{s:?} is not a sweep count")))?
        .unwrap_or_else(|| vec![0, total]);
    snaps.sort_unstable();
    snaps.dedup();
    if let Some(&bad) = snaps.iter().find(|&&s| s > total) {
        return Err(ConfigError::Other(format!("[sequence] snapshots: {bad} exceeds the {total} sweeps")).into());
    }
    let c = constants();
    let rec = run_sweeps(&run.bath, &schedule, &c)?;
    let fits: Vec<(usize, f64, Result<SpectrumFit, hhdr::Error>)> = snaps
        .par_iter()
        .map(|&s| {
            let fit = run
                .bath
                .with_polarizations(&rec.snapshots[s])
                .and_then(|b| fit_linewidth(&b, &run.setup, &c));
            (s, rec.mean_polarization(s), fit)
        })
        .collect();

    let mut cols = vec!["sweeps", "mean_polarization"];
    cols.extend(FIT_COLUMNS);
    let mut t = Table::new("linewidth_vs_sweeps", &cols);
    lock_notes(&mut t, &run);
    t.note(format!("n_plus: {} n_minus: {}", schedule.n_plus, schedule.n_minus));
    let mut failures = 0;
    for (s, p, fit) in &fits {
        failures += fit.is_err() as usize;
        let mut row: Vec<Cell> = vec![(*s).into(), (*p).into()];
        row.extend(fit_cells(fit));
        t.row(row);
    }
    ctx.emit("linewidth.tsv", &t)?;

    let mut bt = Table::new("bath", &["index", "x_m", "y_m", "z_m", "ax_t", "ay_t", "az_t", "final_polarization"]);
    bt.note(format!("seed: {}", run.bath.config.seed));
    for line in cfg.canonical().lines() {
        bt.note(format!("config: {line}"));
    }
    let fin = rec.final_polarizations();
    for (k, n) in run.bath.nuclei.iter().enumerate() {
        bt.row(vec![
            k.into(),
            n.position.x.into(),
            n.position.y.into(),
            n.position.z.into(),
            n.a.a.x.into(),
            n.a.a.y.into(),
            n.a.a.z.into(),
            fin[k].into(),
        ]);
    }
    ctx.emit("bath.tsv", &bt)?;

    let mut pt = Table::new("polarization", &["sweeps", "index", "polarization"]);
    for &s in &snaps {
        for (k, p) in rec.snapshots[s].iter().enumerate() {
            pt.row(vec![s.into(), k.into(), (*p).into()]);
        }
    }
    ctx.emit("polarization.tsv", &pt)?;

    let summary: Vec<String> = fits
        .iter()
        .map(|(s, _, f)| match f {
            Ok(f) => format!("{s}: FWHM {:.1} kHz", f.fwhm / 1e3),
            Err(_) => format!("{s}: fit failed"),
        })
        .collect();
    Ok(format!("{} snapshot(s), {failures} fit failure(s)\n{}", fits.len(), summary.join("\n")))
}

pub fn bias(ctx: &mut Context) -> Result<String, CliError> {
    let run = bath_run(ctx.cfg)?;
    let biases = ctx
        .cfg
        .list("sequence", "biases", |s| s.parse::<f64>().map_err(|_| format!("{s:?} is not a number")))?
        .unwrap_or_else(|| vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    let scan = bias_scan(&run.bath, &run.schedule, &biases, &run.setup, &constants())?;
    let mut cols = vec!["bias", "n_plus", "n_minus", "mean_polarization"];
    cols.extend(FIT_COLUMNS);
    let mut t = Table::new("bias_scan", &cols);
    lock_notes(&mut t, &run);
    t.note(format!("monotone_within_fit_error: {}", scan.monotone));
    for p in &scan.points {
        let mut row: Vec<Cell> = vec![p.bias.into(), p.n_plus.into(), p.n_minus.into(), p.mean_polarization.into()];
        row.extend(fit_cells(&Ok(p.fit)));
        t.row(row);
    }
    ctx.emit("bias_scan.tsv", &t)?;
    let lines: Vec<String> =
        scan.points.iter().map(|p| format!("bias {:+.2}: T2* {:.3} µs", p.bias, p.fit.t2star * 1e6)).collect();
    Ok(format!("{}\nmonotone: {}", lines.join("\n"), scan.monotone))
}

pub fn sensitivity(ctx: &mut Context) -> Result<String, CliError> {
    let cfg = ctx.cfg;
    let window = cfg.quantity_req("analysis", "interrogation", Dim::Time)?;
    if !(window > 0.0) {
        return Err(ConfigError::Other("[analysis] interrogation must be positive".into()).into());
    }
    let couplings = cfg
        .list("analysis", "couplings", |s| parse_quantity(s, Dim::Frequency))?
        .unwrap_or_else(|| vec![40e3]);
    let j_min = 1.0 / (2.0 * window);
    let c = constants();
    let larmor = if cfg.has("field", "b") { Some(c.gamma_n * field(cfg)?.norm()) } else { None };
    let mut t = Table::new(
        "sensitivity",
        &["j_hz", "oscillations_in_window", "swaps_in_window", "resolvable", "min_separation_from_bath_line_hz"],
    );
    t.note(format!("interrogation_s: {}", crate::output::fmt_f64(window)));
    t.note(format!("j_min_hz: {}", crate::output::fmt_f64(j_min)));
    if let Some(l) = larmor {
        t.note(format!("bath_line_hz: {}", crate::output::fmt_f64(l)));
    }
    for &j in &couplings {
        // A feature of half-width J clears the bath line (half-width set by
        // the window resolution) when their centres differ by J + J_min.
        t.row(vec![j.into(), (j * window).into(), (2.0 * j * window).into(), (j >= j_min).into(), (j + j_min).into()]);
    }
    ctx.emit("sensitivity.tsv", &t)?;
    let mut s = format!("J_min = {:.3} kHz for T = {:.3} µs", j_min / 1e3, window * 1e6);
    if let Some(l) = larmor {
        s.push_str(&format!("; bath line at {:.4} MHz", l / 1e6));
    }
    Ok(s)
}
