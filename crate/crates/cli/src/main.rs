use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};

use microind::design_file::{read_named, DesignFile, OptimizeFile, SynthesisFile};
use microind::em_model::{Inductor, PerformancePoint};
use microind::geometry::{core_area, VolumeRule};
use microind::materials::{load_material_registry, MaterialRegistry};
use microind::optimizer::{optimize, ObjectiveKind, OptimizationResult};
use microind::reference_data::{fitted_registry, SHIPPED_REGISTRY};
use microind::report::regenerate_tables;
use microind::sweep::{frequency_sweep, log_grid};
use microind::synthesis::{sizing_inductance, synthesize_design};
use microind::{Error, Execution};

#[derive(Parser)]
#[command(name = "microind", version, about = "Thin-film solenoid microinductor design toolkit")]
struct Cli {
    /// Material registry document; the bundled fitted registry when omitted.
    #[arg(long, global = true)]
    registry: Option<PathBuf>,
    /// Prefix reports with a generation timestamp.
    #[arg(long, global = true)]
    timestamps: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Efficiency,
    PowerDensity,
}

impl From<ObjectiveArg> for ObjectiveKind {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Efficiency => ObjectiveKind::MaxEfficiency,
            ObjectiveArg::PowerDensity => ObjectiveKind::MaxPowerDensity,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a design at its operating point.
    Analyze {
        #[arg(long)]
        design: PathBuf,
    },
    /// Evaluate a design over a logarithmic frequency grid and write CSV.
    Sweep {
        #[arg(long)]
        design: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1e3)]
        f_start: f64,
        #[arg(long, default_value_t = 10e6)]
        f_stop: f64,
        #[arg(long, default_value_t = 20)]
        points_per_decade: u32,
    },
    /// Size a design from requirements and write it as a design file.
    Synthesize {
        /// Requirements document.
        #[arg(long, alias = "design")]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Search a discrete design space; writes the frontier CSV and the best design.
    Optimize {
        /// Run configuration describing the search space.
        #[arg(long, alias = "design")]
        config: PathBuf,
        /// Frontier CSV.
        #[arg(long)]
        out: PathBuf,
        /// Best-design file; defaults to `<out>.best.json`.
        #[arg(long)]
        best: Option<PathBuf>,
        #[arg(long, value_enum)]
        objective: Option<ObjectiveArg>,
    },
    /// Regenerate the published performance tables with per-cell verdicts.
    Tables {
        /// CSV output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Refit the core materials from the published measurements.
    Fit {
        /// Registry document output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failure with its exit status: 1 for infeasible or empty results, 2 for
/// invalid input.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn infeasible(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Synthesis { .. } | Error::EmptySearchSpace(_) => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<String, Failure>;

fn in_file(path: &Path) -> impl FnOnce(Error) -> Failure + '_ {
    move |e| match e {
        Error::NotFound { .. } => Failure::from(e),
        Error::Synthesis { .. } | Error::EmptySearchSpace(_) => Failure::from(e),
        other => Failure::input(format!("{}: {other}", path.display())),
    }
}

fn load_registry(path: Option<&Path>) -> Result<MaterialRegistry, Failure> {
    match path {
        None => Ok(load_material_registry(SHIPPED_REGISTRY)?),
        Some(p) => {
            let text = read_named(p, "registry file")?;
            load_material_registry(&text).map_err(in_file(p))
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

fn performance_lines(out: &mut String, inductor: &Inductor, p: &PerformancePoint) {
    let _ = writeln!(out, "  L_eff          {:.4} uH", p.l_eff * 1e6);
    let _ = writeln!(out, "  R_ac winding   {:.5} ohm", p.r_winding_ac);
    let _ = writeln!(out, "  R_core         {:.5} ohm", p.r_core);
    let _ = writeln!(out, "  V_in           {:.4} V", p.v_in);
    let _ = writeln!(out, "  P_out          {:.3} mW", p.p_out * 1e3);
    let _ = writeln!(out, "  P_eddy         {:.4} mW", p.losses.p_eddy * 1e3);
    let _ = writeln!(out, "  P_hys          {:.4} mW", p.losses.p_hys * 1e3);
    let _ = writeln!(out, "  P_cu           {:.4} mW", p.losses.p_cu * 1e3);
    let _ = writeln!(out, "  efficiency     {:.1} %", p.efficiency * 100.0);
    let _ = writeln!(
        out,
        "  power density  {:.2} W/cm3 (volume {:.3} mm3)",
        p.power_density * 1e-6,
        inductor.volume() * 1e9
    );
    let _ = writeln!(out, "  Q              {:.3}", p.q);
    if p.warnings.is_empty() {
        let _ = writeln!(out, "  warnings       none");
    }
    for w in &p.warnings {
        let _ = writeln!(out, "  warning        {w}");
    }
}

fn cmd_analyze(registry: &MaterialRegistry, design: &Path) -> CmdResult {
    let d = DesignFile::load(design)
        .and_then(|f| f.resolve(registry))
        .map_err(in_file(design))?;
    let p = d.inductor.performance(&d.op).map_err(in_file(design))?;
    let (core, w) = (&d.inductor.core, &d.inductor.winding);
    let mut out = String::new();
    let _ = writeln!(out, "design {}", design.display());
    let _ = writeln!(
        out,
        "  core           {} x {:.2} um {}, winding {} turns {:.0} x {:.0} um {}",
        core.n_lam,
        core.t_lam * 1e6,
        d.inductor.material.name,
        w.n_turns,
        w.t_w * 1e6,
        w.w_w * 1e6,
        w.conductor.name
    );
    let _ = writeln!(
        out,
        "  operating      f {:.4} MHz, I {:.2} mA, B_pk {:.3} T, K {}",
        d.op.f * 1e-6,
        d.op.i_drive * 1e3,
        d.op.b_pk,
        d.op.k_wave
    );
    let _ = writeln!(
        out,
        "  current limit  {:.2} mA ({}); I_sat {:.2} mA, winding {:.2} mA at {} A/mm2",
        d.limits.current * 1e3,
        d.limits.binding,
        d.limits.saturation * 1e3,
        d.limits.winding * 1e3,
        d.j_max * 1e-6
    );
    if d.op.i_drive > d.limits.current * (1.0 + 1e-9) {
        let _ = writeln!(out, "  note           drive current exceeds the operating current limit");
    }
    let _ = writeln!(
        out,
        "  L_dc           {:.4} uH (sizing N*A*B/I {:.4} uH)",
        d.inductor.inductance_dc() * 1e6,
        sizing_inductance(core, w, &d.op) * 1e6
    );
    performance_lines(&mut out, &d.inductor, &p);
    Ok(out)
}

fn cmd_sweep(
    registry: &MaterialRegistry,
    design: &Path,
    out_path: &Path,
    f_start: f64,
    f_stop: f64,
    ppd: u32,
) -> CmdResult {
    let d = DesignFile::load(design)
        .and_then(|f| f.resolve(registry))
        .map_err(in_file(design))?;
    let grid = log_grid(f_start, f_stop, ppd)?;
    let series = frequency_sweep(&d.inductor, &d.op, &grid, Execution::default())?;
    let mut w = create(out_path)?;
    series.write_csv(&mut w)?;
    w.flush().map_err(|e| Failure::input(format!("cannot write {}: {e}", out_path.display())))?;

    let mut out = String::new();
    let _ = writeln!(out, "sweep {} -> {}", design.display(), out_path.display());
    let _ = writeln!(out, "  points         {}", series.len());
    if let Some((f, q)) = series.q_peak() {
        let _ = writeln!(out, "  Q peak         {:.3} at {:.4} MHz", q, f * 1e-6);
    }
    if let Some(r) = series.inductance_retention() {
        let _ = writeln!(
            out,
            "  L roll-off     {:.2} % (L(f_stop)/L(f_start) = {:.4})",
            100.0 * (1.0 - r),
            r
        );
    }
    Ok(out)
}

fn cmd_synthesize(registry: &MaterialRegistry, config: &Path, out_path: &Path) -> CmdResult {
    let text = read_named(config, "requirements file")?;
    let (req, constraints, opts) = SynthesisFile::parse(&text)
        .and_then(|f| f.resolve())
        .map_err(in_file(config))?;
    let design = synthesize_design(&req, &constraints, registry, &opts).map_err(in_file(config))?;
    let volume = VolumeRule::Computed { overhead: 1.0 };
    let inductor = Inductor {
        core: design.core.clone(),
        winding: design.winding.clone(),
        material: registry.get(&design.material)?,
        volume: volume.clone(),
    };
    let perf = inductor.performance(&design.op)?;
    write_text(out_path, &DesignFile::from_candidate(&design, &volume, Some(&perf)).to_json())?;

    let mut out = String::new();
    let (core, w) = (&design.core, &design.winding);
    let _ = writeln!(out, "synthesized {} -> {}", config.display(), out_path.display());
    let _ = writeln!(
        out,
        "  core           {} x {:.3} um {} (w {:.0} um, l_c {:.1} mm)",
        core.n_lam,
        core.t_lam * 1e6,
        design.material,
        core.w_lam * 1e6,
        core.l_c * 1e3
    );
    let _ = writeln!(
        out,
        "  winding        {} turns, t_w {:.2} um, w_w {:.2} um, s_w {:.2} um",
        w.n_turns,
        w.t_w * 1e6,
        w.w_w * 1e6,
        w.s_w * 1e6
    );
    let _ = writeln!(
        out,
        "  operating      f {:.4} MHz, I {:.4} A, B_pk {:.3} T, A_c {:.4e} m2",
        design.op.f * 1e-6,
        design.op.i_drive,
        design.op.b_pk,
        core_area(core)
    );
    let _ = writeln!(
        out,
        "  inductance     target {:.4} uH; sizing N*A*B/I {:.4} uH; magnetic circuit L_dc {:.4} uH, L_eff {:.4} uH",
        req.l_target * 1e6,
        design.sizing_inductance() * 1e6,
        inductor.inductance_dc() * 1e6,
        perf.l_eff * 1e6
    );
    let _ = writeln!(out, "  feasibility");
    for f in &design.feasibility {
        let _ = writeln!(
            out,
            "    {:<22} {:<4} margin {:+.4e} {}",
            f.rule.to_string(),
            if f.satisfied { "ok" } else { "FAIL" },
            f.margin,
            f.rule.unit()
        );
    }
    performance_lines(&mut out, &inductor, &perf);
    Ok(out)
}

fn best_summary(out: &mut String, label: &str, r: &OptimizationResult) {
    if let Some(b) = &r.best {
        let _ = writeln!(
            out,
            "  {label:<22} {} turns, {} x {:.2} um, t_w {:.1} um, w_w {:.1} um: efficiency {:.2} %, {:.2} W/cm3",
            b.design.winding.n_turns,
            b.design.core.n_lam,
            b.design.core.t_lam * 1e6,
            b.design.winding.t_w * 1e6,
            b.design.winding.w_w * 1e6,
            b.performance.efficiency * 100.0,
            b.performance.power_density * 1e-6
        );
    }
}

fn cmd_optimize(
    registry: &MaterialRegistry,
    config: &Path,
    out_path: &Path,
    best_path: Option<&Path>,
    objective: Option<ObjectiveKind>,
) -> CmdResult {
    let text = read_named(config, "run configuration")?;
    let (space, obj, constraints) = OptimizeFile::parse(&text)
        .and_then(|f| f.resolve(registry, objective))
        .map_err(in_file(config))?;
    let result = optimize(&space, &obj, &constraints, Execution::default())?;
    let mut w = create(out_path)?;
    result.write_frontier_csv(&mut w)?;
    w.flush().map_err(|e| Failure::input(format!("cannot write {}: {e}", out_path.display())))?;

    let mut out = String::new();
    let _ = writeln!(out, "optimize {} -> {}", config.display(), out_path.display());
    let _ = writeln!(out, "  evaluated      {}", result.evaluated);
    let _ = writeln!(out, "  feasible       {}", result.feasible);
    let _ = writeln!(out, "  target L       {:.4} uH +/- {:.1} %", obj.l_target * 1e6, obj.l_tolerance * 100.0);
    let Some(best) = &result.best else {
        return Err(Failure::infeasible(format!(
            "{out}no feasible candidate: {} evaluated, 0 feasible",
            result.evaluated
        )));
    };
    let best_path = best_path
        .map(Path::to_path_buf)
        .unwrap_or_else(|| out_path.with_extension("best.json"));
    write_text(
        &best_path,
        &DesignFile::from_candidate(&best.design, &space.volume, Some(&best.performance)).to_json(),
    )?;
    let _ = writeln!(out, "  best design    {} (candidate {})", best_path.display(), best.index);

    let other_kind = match obj.kind {
        ObjectiveKind::MaxEfficiency => ObjectiveKind::MaxPowerDensity,
        ObjectiveKind::MaxPowerDensity => ObjectiveKind::MaxEfficiency,
    };
    let other = optimize(&space, &microind::optimizer::Objective { kind: other_kind, ..obj }, &constraints, Execution::default())?;
    let (eff_r, pd_r) = match obj.kind {
        ObjectiveKind::MaxEfficiency => (&result, &other),
        ObjectiveKind::MaxPowerDensity => (&other, &result),
    };
    let _ = writeln!(out, "  trade-off");
    best_summary(&mut out, "max efficiency", eff_r);
    best_summary(&mut out, "max power density", pd_r);
    Ok(out)
}

fn cmd_tables(registry: &MaterialRegistry, out_path: Option<&Path>) -> CmdResult {
    let report = regenerate_tables(registry)?;
    if let Some(p) = out_path {
        let mut w = create(p)?;
        report.write_csv(&mut w)?;
        w.flush().map_err(|e| Failure::input(format!("cannot write {}: {e}", p.display())))?;
    }
    Ok(report.render_text())
}

fn cmd_fit(out_path: Option<&Path>) -> CmdResult {
    let (registry, fits) = fitted_registry()?;
    let mut out = String::new();
    for (name, fit) in &fits {
        let _ = writeln!(
            out,
            "{name}: rho {:.4e} ohm m, mu_r {:.2}, h_c {:.4} A/m, B_sat {:.4} T",
            fit.rho, fit.mu_r, fit.h_c, fit.b_sat
        );
        let _ = writeln!(out, "{}", fit.report);
    }
    if let Some(p) = out_path {
        write_text(p, &registry.to_json())?;
    }
    Ok(out)
}

fn run(cli: &Cli) -> CmdResult {
    if let Command::Fit { out } = &cli.command {
        return cmd_fit(out.as_deref());
    }
    let registry = load_registry(cli.registry.as_deref())?;
    match &cli.command {
        Command::Analyze { design } => cmd_analyze(&registry, design),
        Command::Sweep {
            design,
            out,
            f_start,
            f_stop,
            points_per_decade,
        } => cmd_sweep(&registry, design, out, *f_start, *f_stop, *points_per_decade),
        Command::Synthesize { config, out } => cmd_synthesize(&registry, config, out),
        Command::Optimize {
            config,
            out,
            best,
            objective,
        } => cmd_optimize(&registry, config, out, best.as_deref(), objective.map(Into::into)),
        Command::Tables { out } => cmd_tables(&registry, out.as_deref()),
        Command::Fit { .. } => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stamp = cli.timestamps.then(|| {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        format!("generated at unix time {secs}\n")
    });
    match run(&cli) {
        Ok(report) => {
            print!("{}{report}", stamp.unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
