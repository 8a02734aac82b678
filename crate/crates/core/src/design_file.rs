//! JSON documents read and written by the command-line tools: design files,
//! synthesis requests and optimisation run configurations. Keys carry their
//! SI unit as a suffix.

use std::ops::RangeInclusive;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::em_model::{Inductor, OperatingCurrent, OperatingPoint, PerformancePoint, DEFAULT_J_MAX, K_SINE};
use crate::error::{Error, Result};
use crate::geometry::{
    ComponentEnvelope, CoreGeometry, VolumeRule, WindingGeometry, DEFAULT_L_C, DEFAULT_MTL,
    DEFAULT_W_LAM,
};
use crate::materials::{MaterialRegistry, MaterialSpec, COPPER};
use crate::optimizer::{CurrentRule, Objective, ObjectiveKind, SearchSpace, Spacing};
use crate::synthesis::{
    CandidateDesign, Demand, DesignConstraints, DesignRequirements, Feasibility, SynthesisOptions,
};

fn default_w_lam() -> f64 {
    DEFAULT_W_LAM
}
fn default_t_ins() -> f64 {
    5e-6
}
fn default_l_c() -> f64 {
    DEFAULT_L_C
}
fn default_mtl() -> f64 {
    DEFAULT_MTL
}
fn default_k() -> f64 {
    K_SINE
}
fn default_conductor() -> String {
    COPPER.to_string()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoreDoc {
    pub n_lam: u32,
    pub t_lam_m: f64,
    #[serde(default = "default_w_lam")]
    pub w_lam_m: f64,
    #[serde(default = "default_t_ins")]
    pub t_ins_m: f64,
    #[serde(default = "default_l_c")]
    pub l_c_m: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindingDoc {
    pub n_turns: u32,
    pub t_w_m: f64,
    pub w_w_m: f64,
    pub s_w_m: f64,
    #[serde(default = "default_mtl")]
    pub mtl_m: f64,
    #[serde(default = "default_conductor")]
    pub conductor: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatingDoc {
    pub f_hz: f64,
    /// Defaults to the operating current limit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i_drive_a: Option<f64>,
    #[serde(default = "default_k")]
    pub k_wave: f64,
    /// Defaults to the core's saturation flux density.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_pk_t: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityDoc {
    pub rule: String,
    pub satisfied: bool,
    pub margin: f64,
    pub unit: String,
}

impl From<&Feasibility> for FeasibilityDoc {
    fn from(f: &Feasibility) -> Self {
        FeasibilityDoc {
            rule: f.rule.to_string(),
            satisfied: f.satisfied,
            margin: f.margin,
            unit: f.rule.unit().to_string(),
        }
    }
}

/// Summary written alongside generated designs. Ignored on input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerformanceDoc {
    pub l_eff_h: f64,
    pub v_in_v: f64,
    pub p_out_w: f64,
    pub p_eddy_w: f64,
    pub p_hys_w: f64,
    pub p_cu_w: f64,
    pub efficiency: f64,
    pub power_density_w_per_cm3: f64,
    pub q: f64,
}

impl From<&PerformancePoint> for PerformanceDoc {
    fn from(p: &PerformancePoint) -> Self {
        PerformanceDoc {
            l_eff_h: p.l_eff,
            v_in_v: p.v_in,
            p_out_w: p.p_out,
            p_eddy_w: p.losses.p_eddy,
            p_hys_w: p.losses.p_hys,
            p_cu_w: p.losses.p_cu,
            efficiency: p.efficiency,
            power_density_w_per_cm3: p.power_density * 1e-6,
            q: p.q,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignFile {
    pub material: String,
    pub core: CoreDoc,
    pub winding: WindingDoc,
    pub operating: OperatingDoc,
    /// Power-density volume; overrides `overhead_factor` when both are set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope_volume_m3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overhead_factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_max_a_per_m2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_target_h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feasibility: Option<Vec<FeasibilityDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub performance: Option<PerformanceDoc>,
}

/// A design file resolved against a registry.
#[derive(Clone, Debug)]
pub struct ResolvedDesign {
    pub inductor: Inductor,
    pub op: OperatingPoint,
    pub j_max: f64,
    pub limits: OperatingCurrent,
    pub l_target: Option<f64>,
}

impl ResolvedDesign {
    pub fn candidate(&self) -> CandidateDesign {
        CandidateDesign {
            core: self.inductor.core.clone(),
            winding: self.inductor.winding.clone(),
            material: self.inductor.material.name.clone(),
            op: self.op,
            l_target: self.l_target,
            feasibility: Vec::new(),
        }
    }
}

fn volume_rule(envelope: Option<f64>, overhead: Option<f64>) -> Result<VolumeRule> {
    match (envelope, overhead) {
        (Some(v), _) => Ok(VolumeRule::Envelope(ComponentEnvelope::new(v, "design file")?)),
        (None, Some(k)) => {
            if !(k.is_finite() && k >= 1.0) {
                return Err(Error::config("overhead_factor", format!("must be >= 1, got {k}")));
            }
            Ok(VolumeRule::Computed { overhead: k })
        }
        (None, None) => Ok(VolumeRule::default()),
    }
}

fn core_b_sat(m: &MaterialSpec, key: &str) -> Result<f64> {
    m.b_sat.ok_or_else(|| {
        Error::config(key, format!("material `{}` has no saturation flux density; set it explicitly", m.name))
    })
}

impl DesignFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_named(path, "design file")?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("design file serialises") + "\n"
    }

    pub fn resolve(&self, registry: &MaterialRegistry) -> Result<ResolvedDesign> {
        let material = registry.get(&self.material)?;
        let conductor = registry.get(&self.winding.conductor)?;
        let c = &self.core;
        let core = CoreGeometry::new(c.n_lam, c.t_lam_m, c.w_lam_m, c.t_ins_m, c.l_c_m)?;
        let w = &self.winding;
        let winding = WindingGeometry::new(w.n_turns, w.t_w_m, w.w_w_m, w.s_w_m, w.mtl_m, conductor)?;
        let inductor = Inductor {
            core,
            winding,
            material,
            volume: volume_rule(self.envelope_volume_m3, self.overhead_factor)?,
        };
        let j_max = self.j_max_a_per_m2.unwrap_or(DEFAULT_J_MAX);
        let limits = inductor.operating_current(j_max)?;
        let o = &self.operating;
        let b_pk = match o.b_pk_t {
            Some(b) => b,
            None => core_b_sat(&inductor.material, "operating.b_pk_t")?,
        };
        let op = OperatingPoint {
            f: o.f_hz,
            i_drive: o.i_drive_a.unwrap_or(limits.current),
            k_wave: o.k_wave,
            b_pk,
        };
        op.validate()?;
        Ok(ResolvedDesign {
            inductor,
            op,
            j_max,
            limits,
            l_target: self.l_target_h,
        })
    }

    /// Design file describing a candidate, with its feasibility table and
    /// performance summary attached.
    pub fn from_candidate(d: &CandidateDesign, volume: &VolumeRule, perf: Option<&PerformancePoint>) -> Self {
        let (envelope_volume_m3, overhead_factor) = match volume {
            VolumeRule::Envelope(e) => (Some(e.reference_volume), None),
            VolumeRule::Computed { overhead } => (None, Some(*overhead)),
        };
        DesignFile {
            material: d.material.clone(),
            core: CoreDoc {
                n_lam: d.core.n_lam,
                t_lam_m: d.core.t_lam,
                w_lam_m: d.core.w_lam,
                t_ins_m: d.core.t_ins,
                l_c_m: d.core.l_c,
            },
            winding: WindingDoc {
                n_turns: d.winding.n_turns,
                t_w_m: d.winding.t_w,
                w_w_m: d.winding.w_w,
                s_w_m: d.winding.s_w,
                mtl_m: d.winding.mtl,
                conductor: d.winding.conductor.name.clone(),
            },
            operating: OperatingDoc {
                f_hz: d.op.f,
                i_drive_a: Some(d.op.i_drive),
                k_wave: d.op.k_wave,
                b_pk_t: Some(d.op.b_pk),
            },
            envelope_volume_m3,
            overhead_factor,
            j_max_a_per_m2: None,
            l_target_h: d.l_target,
            feasibility: (!d.feasibility.is_empty())
                .then(|| d.feasibility.iter().map(FeasibilityDoc::from).collect()),
            performance: perf.map(PerformanceDoc::from),
        }
    }
}

/// Reads a file, mapping a missing path to `"<what> not found: <path>"`.
pub fn read_named(path: &Path, what: &str) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::NotFound {
                what: what.to_string(),
                path: path.display().to_string(),
            }
        } else {
            Error::Io(e)
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintsDoc {
    #[serde(default)]
    pub j_max_a_per_m2: Option<f64>,
    #[serde(default)]
    pub max_laminations: Option<u32>,
    #[serde(default)]
    pub lam_rule: Option<f64>,
    #[serde(default)]
    pub winding_rule: Option<f64>,
    #[serde(default)]
    pub l_tolerance: Option<f64>,
}

impl ConstraintsDoc {
    pub fn resolve(&self) -> Result<DesignConstraints> {
        let d = DesignConstraints::default();
        let c = DesignConstraints {
            j_max: self.j_max_a_per_m2.unwrap_or(d.j_max),
            max_laminations: self.max_laminations.unwrap_or(d.max_laminations),
            lam_thickness_rule: self.lam_rule.unwrap_or(d.lam_thickness_rule),
            winding_height_rule: self.winding_rule.unwrap_or(d.winding_height_rule),
            l_tolerance: self.l_tolerance.unwrap_or(d.l_tolerance),
        };
        c.validate()?;
        Ok(c)
    }
}

/// Inputs to the synthesis flow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisFile {
    pub l_target_h: f64,
    pub f_hz: f64,
    #[serde(default)]
    pub i_req_a: Option<f64>,
    #[serde(default)]
    pub p_req_w: Option<f64>,
    pub material: String,
    #[serde(default)]
    pub b_pk_t: Option<f64>,
    #[serde(default)]
    pub j_max_a_per_m2: Option<f64>,
    #[serde(default)]
    pub max_laminations: Option<u32>,
    #[serde(default)]
    pub lam_rule: Option<f64>,
    #[serde(default)]
    pub winding_rule: Option<f64>,
    #[serde(default)]
    pub l_tolerance: Option<f64>,
    #[serde(default)]
    pub w_lam_m: Option<f64>,
    #[serde(default)]
    pub t_ins_m: Option<f64>,
    #[serde(default)]
    pub l_c_m: Option<f64>,
    #[serde(default)]
    pub mtl_m: Option<f64>,
    #[serde(default)]
    pub spacing_ratio: Option<f64>,
    #[serde(default)]
    pub t_w_cap_m: Option<f64>,
    #[serde(default)]
    pub k_wave: Option<f64>,
}

impl SynthesisFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn constraints(&self) -> ConstraintsDoc {
        ConstraintsDoc {
            j_max_a_per_m2: self.j_max_a_per_m2,
            max_laminations: self.max_laminations,
            lam_rule: self.lam_rule,
            winding_rule: self.winding_rule,
            l_tolerance: self.l_tolerance,
        }
    }

    pub fn resolve(&self) -> Result<(DesignRequirements, DesignConstraints, SynthesisOptions)> {
        let demand = match (self.i_req_a, self.p_req_w) {
            (Some(i), None) => Demand::Current(i),
            (None, Some(p)) => Demand::Power(p),
            _ => return Err(Error::config("i_req_a/p_req_w", "exactly one of the two must be given")),
        };
        let req = DesignRequirements {
            l_target: self.l_target_h,
            f: self.f_hz,
            demand,
            material: self.material.clone(),
            b_pk: self.b_pk_t,
        };
        let d = SynthesisOptions::default();
        let opts = SynthesisOptions {
            w_lam: self.w_lam_m.unwrap_or(d.w_lam),
            t_ins: self.t_ins_m.unwrap_or(d.t_ins),
            l_c: self.l_c_m.unwrap_or(d.l_c),
            mtl: self.mtl_m.unwrap_or(d.mtl),
            spacing_ratio: self.spacing_ratio.unwrap_or(d.spacing_ratio),
            t_w_cap: self.t_w_cap_m.or(d.t_w_cap),
            k_wave: self.k_wave.unwrap_or(d.k_wave),
        };
        Ok((req, self.constraints().resolve()?, opts))
    }
}

/// A grid axis: explicit values or an inclusive arithmetic range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridDoc {
    Values(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl GridDoc {
    pub fn values(&self, key: &str) -> Result<Vec<f64>> {
        match self {
            GridDoc::Values(v) => Ok(v.clone()),
            GridDoc::Range { start, stop, step } => {
                if !(*step > 0.0 && step.is_finite() && stop >= start) {
                    return Err(Error::config(key, "range needs step > 0 and stop >= start"));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                Ok((0..=n).map(|i| start + i as f64 * step).collect())
            }
        }
    }
}

/// A point of the search space whose sizing inductance becomes the target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferencePoint {
    pub n_turns: u32,
    pub n_lam: u32,
    pub t_lam_m: f64,
    pub t_w_m: f64,
    pub w_w_m: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeFile {
    pub material: String,
    #[serde(default = "default_conductor")]
    pub conductor: String,
    pub f_hz: f64,
    #[serde(default = "default_k")]
    pub k_wave: f64,
    #[serde(default)]
    pub b_pk_t: Option<f64>,

    pub n_turns: [u32; 2],
    pub n_lam: [u32; 2],
    pub t_lam_m: GridDoc,
    pub t_w_m: GridDoc,
    pub w_w_m: GridDoc,

    #[serde(default = "default_w_lam")]
    pub w_lam_m: f64,
    #[serde(default = "default_t_ins")]
    pub t_ins_m: f64,
    #[serde(default = "default_l_c")]
    pub l_c_m: f64,
    #[serde(default = "default_mtl")]
    pub mtl_m: f64,
    #[serde(default)]
    pub s_w_m: Option<f64>,
    #[serde(default)]
    pub spacing_ratio: Option<f64>,
    #[serde(default)]
    pub envelope_volume_m3: Option<f64>,
    #[serde(default)]
    pub overhead_factor: Option<f64>,
    /// Fixed drive current; otherwise each candidate runs at its limit.
    #[serde(default)]
    pub i_drive_a: Option<f64>,

    /// `"efficiency"` or `"power-density"`.
    #[serde(default)]
    pub objective: Option<String>,
    #[serde(default)]
    pub l_target_h: Option<f64>,
    #[serde(default)]
    pub reference_design: Option<ReferencePoint>,
    #[serde(default)]
    pub j_max_a_per_m2: Option<f64>,
    #[serde(default)]
    pub max_laminations: Option<u32>,
    #[serde(default)]
    pub lam_rule: Option<f64>,
    #[serde(default)]
    pub winding_rule: Option<f64>,
    #[serde(default)]
    pub l_tolerance: Option<f64>,
}

pub fn parse_objective(s: &str) -> Result<ObjectiveKind> {
    match s {
        "efficiency" => Ok(ObjectiveKind::MaxEfficiency),
        "power-density" => Ok(ObjectiveKind::MaxPowerDensity),
        other => Err(Error::config(
            "objective",
            format!("expected `efficiency` or `power-density`, got `{other}`"),
        )),
    }
}

impl OptimizeFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn constraints(&self) -> ConstraintsDoc {
        ConstraintsDoc {
            j_max_a_per_m2: self.j_max_a_per_m2,
            max_laminations: self.max_laminations,
            lam_rule: self.lam_rule,
            winding_rule: self.winding_rule,
            l_tolerance: self.l_tolerance,
        }
    }

    /// Builds the search space, objective and constraints. `objective`
    /// overrides the document's own setting.
    pub fn resolve(
        &self,
        registry: &MaterialRegistry,
        objective: Option<ObjectiveKind>,
    ) -> Result<(SearchSpace, Objective, DesignConstraints)> {
        let material = registry.get(&self.material)?;
        let conductor = registry.get(&self.conductor)?;
        let constraints = self.constraints().resolve()?;
        let spacing = match (self.s_w_m, self.spacing_ratio) {
            (Some(_), Some(_)) => {
                return Err(Error::config("s_w_m/spacing_ratio", "give at most one of the two"))
            }
            (Some(s), None) => Spacing::Fixed(s),
            (None, r) => Spacing::Ratio(r.unwrap_or(0.1)),
        };
        let b_pk = match self.b_pk_t {
            Some(b) => b,
            None => core_b_sat(&material, "b_pk_t")?,
        };
        let range = |key: &str, r: [u32; 2]| -> Result<RangeInclusive<u32>> {
            if r[0] > r[1] {
                return Err(Error::config(key, format!("range [{}, {}] is reversed", r[0], r[1])));
            }
            Ok(r[0]..=r[1])
        };
        let space = SearchSpace {
            n_turns: range("n_turns", self.n_turns)?,
            n_lam: range("n_lam", self.n_lam)?,
            t_lam: self.t_lam_m.values("t_lam_m")?,
            t_w: self.t_w_m.values("t_w_m")?,
            w_w: self.w_w_m.values("w_w_m")?,
            material,
            conductor,
            f: self.f_hz,
            k_wave: self.k_wave,
            b_pk,
            w_lam: self.w_lam_m,
            t_ins: self.t_ins_m,
            l_c: self.l_c_m,
            mtl: self.mtl_m,
            spacing,
            volume: volume_rule(self.envelope_volume_m3, self.overhead_factor)?,
            current: match self.i_drive_a {
                Some(i) => CurrentRule::Fixed(i),
                None => CurrentRule::OperatingLimit { j_max: constraints.j_max },
            },
        };
        if !(space.f.is_finite() && space.f > 0.0) {
            return Err(Error::config("f_hz", format!("must be > 0, got {}", space.f)));
        }

        let l_target = match (self.l_target_h, &self.reference_design) {
            (Some(l), None) => l,
            (None, Some(r)) => {
                let point = SearchSpace {
                    n_turns: r.n_turns..=r.n_turns,
                    n_lam: r.n_lam..=r.n_lam,
                    t_lam: vec![r.t_lam_m],
                    t_w: vec![r.t_w_m],
                    w_w: vec![r.w_w_m],
                    ..space.clone()
                };
                point.validate()?;
                point.candidate_at(0)?.sizing_inductance()
            }
            _ => {
                return Err(Error::config(
                    "l_target_h/reference_design",
                    "exactly one of the two must be given",
                ))
            }
        };
        let kind = match (objective, &self.objective) {
            (Some(k), _) => k,
            (None, Some(s)) => parse_objective(s)?,
            (None, None) => ObjectiveKind::MaxEfficiency,
        };
        let obj = Objective {
            kind,
            l_target,
            l_tolerance: constraints.l_tolerance,
        };
        obj.validate()?;
        space.validate()?;
        Ok((space, obj, constraints))
    }
}
