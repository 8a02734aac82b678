//! Requirement-driven synthesis of a candidate design and the constraint
//! checks shared with the optimiser.
//!
//! Sizing follows the flux-linkage relation `L·I = N·A_c·B`: the skin depths
//! at the operating frequency fix the lamination and winding thicknesses, the
//! product `N·A_c` fixes turns against core area, and the current density
//! limit fixes the conductor width.

use std::fmt;
use std::sync::Arc;

use crate::em_model::{self, OperatingPoint, K_SINE};
use crate::error::{Error, Result};
use crate::geometry::{
    core_area, winding_cross_section, CoreGeometry, WindingGeometry, DEFAULT_L_C, DEFAULT_MTL,
    DEFAULT_W_LAM,
};
use crate::materials::{skin_depth_raw, MaterialRegistry, MaterialSpec};

/// What the design must deliver besides inductance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Demand {
    /// RMS current, A.
    Current(f64),
    /// Output power, W.
    Power(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DesignRequirements {
    pub l_target: f64,
    pub f: f64,
    pub demand: Demand,
    pub material: String,
    /// Defaults to the material's saturation flux density.
    pub b_pk: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DesignConstraints {
    /// A/m²
    pub j_max: f64,
    pub max_laminations: u32,
    /// Lamination thickness as a fraction of the core skin depth.
    pub lam_thickness_rule: f64,
    /// Winding thickness as a multiple of the conductor skin depth.
    pub winding_height_rule: f64,
    pub l_tolerance: f64,
}

impl Default for DesignConstraints {
    fn default() -> Self {
        DesignConstraints {
            j_max: em_model::DEFAULT_J_MAX,
            max_laminations: 10,
            lam_thickness_rule: 0.5,
            winding_height_rule: 2.0,
            l_tolerance: 0.05,
        }
    }
}

impl DesignConstraints {
    pub fn validate(&self) -> Result<()> {
        let pos = |key: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(key, format!("must be > 0, got {v}")))
            }
        };
        pos("j_max_a_per_m2", self.j_max)?;
        pos("lam_rule", self.lam_thickness_rule)?;
        pos("winding_rule", self.winding_height_rule)?;
        pos("l_tolerance", self.l_tolerance)?;
        if self.lam_thickness_rule > 1.0 {
            return Err(Error::config("lam_rule", "must be <= 1"));
        }
        if self.max_laminations == 0 {
            return Err(Error::config("max_laminations", "must be >= 1"));
        }
        Ok(())
    }
}

/// Fixed dimensions the sizing flow does not choose.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthesisOptions {
    pub w_lam: f64,
    pub t_ins: f64,
    pub l_c: f64,
    pub mtl: f64,
    /// Turn spacing as a fraction of the turn width.
    pub spacing_ratio: f64,
    /// Upper bound on plated winding thickness, if tighter than the skin rule.
    pub t_w_cap: Option<f64>,
    pub k_wave: f64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            w_lam: DEFAULT_W_LAM,
            t_ins: 5e-6,
            l_c: DEFAULT_L_C,
            mtl: DEFAULT_MTL,
            spacing_ratio: 0.1,
            t_w_cap: None,
            k_wave: K_SINE,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    CurrentDensity,
    LaminationCount,
    LaminationThickness,
    WindingHeight,
    Saturation,
    InductanceTarget,
}

impl Rule {
    pub fn unit(self) -> &'static str {
        match self {
            Rule::CurrentDensity | Rule::Saturation => "A",
            Rule::LaminationCount => "laminations",
            Rule::LaminationThickness | Rule::WindingHeight => "m",
            Rule::InductanceTarget => "relative",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::CurrentDensity => "current density",
            Rule::LaminationCount => "lamination count",
            Rule::LaminationThickness => "lamination thickness",
            Rule::WindingHeight => "winding height",
            Rule::Saturation => "saturation current",
            Rule::InductanceTarget => "inductance target",
        })
    }
}

/// One checked rule. `margin` is signed: negative means violated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Feasibility {
    pub rule: Rule,
    pub satisfied: bool,
    pub margin: f64,
}

impl Feasibility {
    fn check(rule: Rule, limit: f64, value: f64) -> Self {
        let margin = limit - value;
        let slack = 1e-9 * limit.abs().max(value.abs());
        Feasibility {
            rule,
            satisfied: margin >= -slack,
            margin,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CandidateDesign {
    pub core: CoreGeometry,
    pub winding: WindingGeometry,
    pub material: String,
    pub op: OperatingPoint,
    pub l_target: Option<f64>,
    pub feasibility: Vec<Feasibility>,
}

impl CandidateDesign {
    pub fn is_feasible(&self) -> bool {
        self.feasibility.iter().all(|f| f.satisfied)
    }

    /// Inductance by the sizing relation, `N A_c B / I`.
    pub fn sizing_inductance(&self) -> f64 {
        sizing_inductance(&self.core, &self.winding, &self.op)
    }
}

pub fn sizing_inductance(core: &CoreGeometry, w: &WindingGeometry, op: &OperatingPoint) -> f64 {
    w.n_turns as f64 * core_area(core) * op.b_pk / op.i_drive
}

/// Re-evaluates every rule from the raw geometry. The inductance rule is
/// included only when the design carries a target.
pub fn validate_constraints(
    d: &CandidateDesign,
    c: &DesignConstraints,
    registry: &MaterialRegistry,
) -> Result<Vec<Feasibility>> {
    let m = registry.get(&d.material)?;
    Ok(validate_with(d, &m, c))
}

pub(crate) fn validate_with(
    d: &CandidateDesign,
    m: &MaterialSpec,
    c: &DesignConstraints,
) -> Vec<Feasibility> {
    let f = d.op.f;
    let i = d.op.i_drive;
    let delta_core = skin_depth_raw(m.rho, m.mu_r, f);
    let cond = &d.winding.conductor;
    let delta_w = skin_depth_raw(cond.rho, cond.mu_r, f);
    let mut out = vec![
        Feasibility::check(
            Rule::CurrentDensity,
            c.j_max * winding_cross_section(&d.winding),
            i,
        ),
        Feasibility::check(
            Rule::LaminationCount,
            c.max_laminations as f64,
            d.core.n_lam as f64,
        ),
        Feasibility::check(
            Rule::LaminationThickness,
            c.lam_thickness_rule * delta_core,
            d.core.t_lam,
        ),
        Feasibility::check(
            Rule::WindingHeight,
            c.winding_height_rule * delta_w,
            d.winding.t_w,
        ),
        Feasibility::check(
            Rule::Saturation,
            em_model::saturation_current(&d.core, &d.winding, m),
            i,
        ),
    ];
    if let Some(target) = d.l_target {
        let dev = (d.sizing_inductance() - target).abs() / target;
        out.push(Feasibility::check(Rule::InductanceTarget, c.l_tolerance, dev));
    }
    out
}

/// Ceiling that treats values within rounding noise of an integer as exact.
fn ceil_count(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

pub fn synthesize_design(
    req: &DesignRequirements,
    c: &DesignConstraints,
    registry: &MaterialRegistry,
    opts: &SynthesisOptions,
) -> Result<CandidateDesign> {
    c.validate()?;
    if !(req.l_target.is_finite() && req.l_target > 0.0) {
        return Err(Error::config("l_target_h", format!("must be > 0, got {}", req.l_target)));
    }
    if !(req.f.is_finite() && req.f > 0.0) {
        return Err(Error::config("f_hz", format!("must be > 0, got {}", req.f)));
    }
    let m = registry.get(&req.material)?;
    let b = match req.b_pk.or(m.b_sat) {
        Some(b) if b > 0.0 => b,
        _ => {
            return Err(Error::config(
                "b_pk_t",
                format!("material `{}` has no saturation flux density", m.name),
            ))
        }
    };
    let cu = registry.copper();

    let current = match req.demand {
        Demand::Current(i) if i.is_finite() && i > 0.0 => i,
        Demand::Current(i) => return Err(Error::config("i_req_a", format!("must be > 0, got {i}"))),
        Demand::Power(p) if p.is_finite() && p > 0.0 => {
            current_for_power(p, req, c, opts, &m, &cu, b)?
        }
        Demand::Power(p) => return Err(Error::config("p_req_w", format!("must be > 0, got {p}"))),
    };

    let mut design = size_for_current(current, req, c, opts, &m, &cu, b)?;
    design.feasibility = validate_with(&design, &m, c);

    if let Some(fail) = design.feasibility.iter().find(|f| !f.satisfied) {
        return Err(match fail.rule {
            Rule::Saturation | Rule::LaminationCount => Error::Synthesis {
                binding: "lamination cap".into(),
                detail: format!(
                    "{} laminations need N = {} turns, saturating at {:.4e} A < {current} A",
                    design.core.n_lam,
                    design.winding.n_turns,
                    em_model::saturation_current(&design.core, &design.winding, &m)
                ),
            },
            Rule::InductanceTarget => Error::Synthesis {
                binding: "turn quantization".into(),
                detail: format!(
                    "integer N = {} overshoots the target by {:.2}% (> {:.2}%)",
                    design.winding.n_turns,
                    100.0 * (design.sizing_inductance() / req.l_target - 1.0),
                    100.0 * c.l_tolerance
                ),
            },
            other => Error::Synthesis {
                binding: other.to_string(),
                detail: format!("margin {:.4e} {}", fail.margin, other.unit()),
            },
        });
    }
    Ok(design)
}

fn size_for_current(
    current: f64,
    req: &DesignRequirements,
    c: &DesignConstraints,
    opts: &SynthesisOptions,
    m: &MaterialSpec,
    cu: &Arc<MaterialSpec>,
    b: f64,
) -> Result<CandidateDesign> {
    let delta_core = skin_depth_raw(m.rho, m.mu_r, req.f);
    let delta_w = skin_depth_raw(cu.rho, cu.mu_r, req.f);
    let t_lam = c.lam_thickness_rule * delta_core;

    // Required turns × laminations product from L·I = N·(n·t·w)·B.
    let product = req.l_target * current / (b * t_lam * opts.w_lam);
    let n_turns = ceil_count(product / c.max_laminations as f64).max(1.0);
    if n_turns > u32::MAX as f64 {
        return Err(Error::Synthesis {
            binding: "lamination cap".into(),
            detail: format!("{n_turns:.3e} turns required"),
        });
    }
    let n_lam = ceil_count(product / n_turns).clamp(1.0, c.max_laminations as f64);

    let mut t_w = c.winding_height_rule * delta_w;
    if let Some(cap) = opts.t_w_cap {
        t_w = t_w.min(cap);
    }
    let w_w = current / (c.j_max * t_w);

    let core = CoreGeometry::new(n_lam as u32, t_lam, opts.w_lam, opts.t_ins, opts.l_c)?;
    let winding = WindingGeometry::new(
        n_turns as u32,
        t_w,
        w_w,
        opts.spacing_ratio * w_w,
        opts.mtl,
        cu.clone(),
    )?;
    Ok(CandidateDesign {
        core,
        winding,
        material: req.material.clone(),
        op: OperatingPoint {
            f: req.f,
            i_drive: current,
            k_wave: opts.k_wave,
            b_pk: b,
        },
        l_target: Some(req.l_target),
        feasibility: Vec::new(),
    })
}

/// Solves `p = V_in(I)·I` where `V_in` follows the design sized for `I`.
/// Current whose sized design delivers `p`. The EMF is a step function of
/// current (integer turns and laminations), so `I·V(I)` is bracketed and
/// bisected; on the final plateau `p / V` is exact unless `p` falls in a
/// step, in which case the smallest current meeting `p` is returned.
fn current_for_power(
    p: f64,
    req: &DesignRequirements,
    c: &DesignConstraints,
    opts: &SynthesisOptions,
    m: &MaterialSpec,
    cu: &Arc<MaterialSpec>,
    b: f64,
) -> Result<f64> {
    const MAX_EXPAND: usize = 200;
    const MAX_BISECT: usize = 200;
    let emf = |i: f64| -> Result<f64> {
        let d = size_for_current(i, req, c, opts, m, cu, b)?;
        Ok(em_model::induced_voltage(&d.op, d.winding.n_turns, b, core_area(&d.core)))
    };
    let not_found = || Error::Synthesis {
        binding: "power requirement".into(),
        detail: format!("no drive current delivers {p} W"),
    };
    // With N·A_c = L·I/B exactly, V_in = K f L I.
    let guess = (p / (opts.k_wave * req.f * req.l_target)).sqrt();
    let (mut lo, mut hi) = (guess, guess);
    let mut expanded = 0;
    while lo * emf(lo)? >= p {
        lo *= 0.5;
        expanded += 1;
        if expanded > MAX_EXPAND {
            return Err(not_found());
        }
    }
    while hi * emf(hi)? < p {
        hi *= 2.0;
        expanded += 1;
        if expanded > MAX_EXPAND {
            return Err(not_found());
        }
    }
    for _ in 0..MAX_BISECT {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mid * emf(mid)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let v = emf(hi)?;
    let exact = p / v;
    if exact <= hi && emf(exact)? == v {
        Ok(exact)
    } else {
        Ok(hi)
    }
}
