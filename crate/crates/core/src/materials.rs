//! Material properties, skin depth, the material registry document and the
//! inverse fit that recovers resistivity, permeability and coercivity from
//! measured loss and skin-depth observations.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::em_model;
use crate::error::{Error, FitError, Result};

/// Vacuum permeability, H/m.
pub const MU_0: f64 = 4.0e-7 * PI;

/// Resistivity of annealed copper at room temperature, Ω·m.
pub const COPPER_RHO: f64 = 1.72e-8;

/// Registry key of the built-in winding conductor.
pub const COPPER: &str = "Cu";

/// Electromagnetic properties of one core or conductor material (SI units).
#[derive(Clone, Debug, PartialEq)]
pub struct MaterialSpec {
    pub name: String,
    /// Saturation flux density in tesla. `None` marks a non-magnetic
    /// conductor, which is treated as never saturating.
    pub b_sat: Option<f64>,
    pub mu_r: f64,
    /// Ω·m
    pub rho: f64,
    /// Effective coercivity, A/m.
    pub h_c: f64,
    pub anisotropic: bool,
}

impl MaterialSpec {
    /// A non-magnetic conductor (μr = 1, no saturation, no hysteresis).
    pub fn conductor(name: impl Into<String>, rho: f64) -> Result<Self> {
        let m = MaterialSpec {
            name: name.into(),
            b_sat: None,
            mu_r: 1.0,
            rho,
            h_c: 0.0,
            anisotropic: false,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn core(
        name: impl Into<String>,
        b_sat: f64,
        mu_r: f64,
        rho: f64,
        h_c: f64,
        anisotropic: bool,
    ) -> Result<Self> {
        let m = MaterialSpec {
            name: name.into(),
            b_sat: Some(b_sat),
            mu_r,
            rho,
            h_c,
            anisotropic,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn copper() -> Self {
        MaterialSpec {
            name: COPPER.to_string(),
            b_sat: None,
            mu_r: 1.0,
            rho: COPPER_RHO,
            h_c: 0.0,
            anisotropic: false,
        }
    }

    pub fn is_conductor(&self) -> bool {
        self.b_sat.is_none()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &'static str, reason: String| Error::InvalidMaterial {
            name: self.name.clone(),
            field,
            reason,
        };
        if self.name.trim().is_empty() {
            return Err(bad("name", "must not be empty".into()));
        }
        if let Some(b) = self.b_sat {
            if !(b.is_finite() && b > 0.0) {
                return Err(bad("b_sat_T", format!("must be > 0, got {b}")));
            }
        }
        if !(self.mu_r.is_finite() && self.mu_r >= 1.0) {
            return Err(bad("mu_r", format!("must be >= 1, got {}", self.mu_r)));
        }
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(bad("rho_ohm_m", format!("must be > 0, got {}", self.rho)));
        }
        if !(self.h_c.is_finite() && self.h_c >= 0.0) {
            return Err(bad("h_c_A_per_m", format!("must be >= 0, got {}", self.h_c)));
        }
        if self.is_conductor() && self.mu_r != 1.0 {
            return Err(bad("mu_r", "conductors must have mu_r = 1".into()));
        }
        Ok(())
    }
}

/// Skin depth `sqrt(ρ / (π f μ0 μr))` in metres.
pub fn skin_depth(material: &MaterialSpec, f: f64) -> Result<f64> {
    if !(f.is_finite() && f > 0.0) {
        return Err(Error::domain(format!("skin depth needs f > 0, got {f}")));
    }
    Ok(skin_depth_raw(material.rho, material.mu_r, f))
}

#[inline]
pub(crate) fn skin_depth_raw(rho: f64, mu_r: f64, f: f64) -> f64 {
    (rho / (PI * f * MU_0 * mu_r)).sqrt()
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct RegistryEntry {
    pub spec: Arc<MaterialSpec>,
    pub provenance: String,
}

/// Immutable name → material table. Always contains [`COPPER`].
#[derive(Clone, Debug)]
pub struct MaterialRegistry {
    entries: BTreeMap<String, RegistryEntry>,
}

/// On-disk form of one registry entry.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialRecord {
    name: String,
    #[serde(rename = "b_sat_T", default, skip_serializing_if = "Option::is_none")]
    b_sat: Option<f64>,
    #[serde(default = "default_mu_r")]
    mu_r: f64,
    #[serde(rename = "rho_ohm_m")]
    rho: f64,
    #[serde(rename = "h_c_A_per_m", default)]
    h_c: f64,
    #[serde(default)]
    anisotropic: bool,
    #[serde(default)]
    provenance: String,
}

fn default_mu_r() -> f64 {
    1.0
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RegistryDocument {
    List(Vec<MaterialRecord>),
    Wrapped {
        #[serde(default)]
        materials: Vec<MaterialRecord>,
    },
}

#[derive(Serialize)]
struct RegistryOut<'a> {
    materials: Vec<&'a MaterialRecord>,
}

impl Default for MaterialRegistry {
    fn default() -> Self {
        Self::new()
    }
}

impl MaterialRegistry {
    /// Registry holding only the built-in copper conductor.
    pub fn new() -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(
            COPPER.to_string(),
            RegistryEntry {
                spec: Arc::new(MaterialSpec::copper()),
                provenance: "built-in: annealed copper, 20 C".to_string(),
            },
        );
        MaterialRegistry { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: &str) -> Result<Arc<MaterialSpec>> {
        self.entries
            .get(name)
            .map(|e| e.spec.clone())
            .ok_or_else(|| Error::UnknownMaterial(name.to_string()))
    }

    pub fn entry(&self, name: &str) -> Option<&RegistryEntry> {
        self.entries.get(name)
    }

    pub fn copper(&self) -> Arc<MaterialSpec> {
        self.entries[COPPER].spec.clone()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = &RegistryEntry> {
        self.entries.values()
    }

    /// Adds an entry, rejecting duplicates. Copper may be replaced once.
    pub fn insert(&mut self, spec: MaterialSpec, provenance: impl Into<String>) -> Result<()> {
        spec.validate()?;
        let builtin_copper = spec.name == COPPER
            && self.entries[COPPER].provenance.starts_with("built-in");
        if self.entries.contains_key(&spec.name) && !builtin_copper {
            return Err(Error::DuplicateMaterial(spec.name));
        }
        if spec.name == COPPER && !spec.is_conductor() {
            return Err(Error::InvalidMaterial {
                name: spec.name,
                field: "b_sat_T",
                reason: "the winding conductor must be non-magnetic".into(),
            });
        }
        self.entries.insert(
            spec.name.clone(),
            RegistryEntry {
                spec: Arc::new(spec),
                provenance: provenance.into(),
            },
        );
        Ok(())
    }

    fn records(&self) -> Vec<MaterialRecord> {
        self.entries
            .values()
            .map(|e| MaterialRecord {
                name: e.spec.name.clone(),
                b_sat: e.spec.b_sat,
                mu_r: e.spec.mu_r,
                rho: e.spec.rho,
                h_c: e.spec.h_c,
                anisotropic: e.spec.anisotropic,
                provenance: e.provenance.clone(),
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        let records = self.records();
        let out = RegistryOut {
            materials: records.iter().collect(),
        };
        let mut s = serde_json::to_string_pretty(&out).expect("registry serializes");
        s.push('\n');
        s
    }
}

/// Parses a registry document. Accepts either a bare JSON array of material
/// objects or `{"materials": [...]}`; empty text yields copper only.
pub fn load_material_registry(source: &str) -> Result<MaterialRegistry> {
    let mut registry = MaterialRegistry::new();
    if source.trim().is_empty() {
        return Ok(registry);
    }
    let records = match serde_json::from_str::<RegistryDocument>(source)? {
        RegistryDocument::List(v) => v,
        RegistryDocument::Wrapped { materials } => materials,
    };
    let mut seen = std::collections::HashSet::new();
    for r in records {
        if !seen.insert(r.name.clone()) {
            return Err(Error::DuplicateMaterial(r.name));
        }
        let spec = MaterialSpec {
            name: r.name,
            b_sat: r.b_sat,
            mu_r: r.mu_r,
            rho: r.rho,
            h_c: r.h_c,
            anisotropic: r.anisotropic,
        };
        registry.insert(spec, r.provenance)?;
    }
    Ok(registry)
}

// ---------------------------------------------------------------------------
// Parameter fit
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SkinDepthObservation {
    pub f: f64,
    pub depth: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EddyObservation {
    pub f: f64,
    pub b_pk: f64,
    pub t_lam: f64,
    pub core_volume: f64,
    pub power: f64,
}

/// Saturation current measured on the fitting circuit (`n_turns`,
/// `assumed_l_c` passed to [`fit_core_parameters`]).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsatObservation {
    pub current: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HysteresisObservation {
    pub f: f64,
    pub b_pk: f64,
    pub core_volume: f64,
    pub power: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FitObservations {
    pub skin_depth_at: Option<SkinDepthObservation>,
    pub eddy_obs: Option<EddyObservation>,
    pub isat_obs: Option<IsatObservation>,
    pub hyst_obs: Option<HysteresisObservation>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PermeabilitySource {
    SkinDepth,
    SaturationCurrent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredictionResidual {
    pub predicted: f64,
    pub observed: f64,
    pub rel_error: f64,
}

impl PredictionResidual {
    fn new(predicted: f64, observed: f64) -> Self {
        PredictionResidual {
            predicted,
            observed,
            rel_error: (predicted - observed) / observed,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    pub mu_r_source: PermeabilitySource,
    pub assumed_l_c: f64,
    pub n_turns: u32,
    /// Forward evaluation of each observation that entered the fit.
    pub skin_depth: Option<PredictionResidual>,
    pub eddy: PredictionResidual,
    pub hysteresis: Option<PredictionResidual>,
    pub isat_fit: Option<PredictionResidual>,
    /// Saturation current predicted from the fitted μr when it was withheld.
    pub isat_withheld: Option<PredictionResidual>,
}

impl std::fmt::Display for ResidualReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let src = match self.mu_r_source {
            PermeabilitySource::SkinDepth => "skin depth",
            PermeabilitySource::SaturationCurrent => "saturation current",
        };
        writeln!(f, "mu_r from {src}; assumed l_c = {} m, N = {}", self.assumed_l_c, self.n_turns)?;
        let mut row = |label: &str, r: &PredictionResidual| {
            writeln!(
                f,
                "  {label:<18} predicted {:<12.6e} observed {:<12.6e} rel {:+.3e}",
                r.predicted, r.observed, r.rel_error
            )
        };
        if let Some(r) = &self.skin_depth {
            row("skin depth", r)?;
        }
        row("eddy power", &self.eddy)?;
        if let Some(r) = &self.hysteresis {
            row("hysteresis power", r)?;
        }
        if let Some(r) = &self.isat_fit {
            row("Isat (fitted)", r)?;
        }
        if let Some(r) = &self.isat_withheld {
            row("Isat (withheld)", r)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub rho: f64,
    pub mu_r: f64,
    pub h_c: f64,
    /// Peak flux density of the eddy observation, taken as B_sat.
    pub b_sat: f64,
    pub report: ResidualReport,
}

impl FitResult {
    pub fn to_material(&self, name: impl Into<String>, anisotropic: bool) -> Result<MaterialSpec> {
        MaterialSpec::core(name, self.b_sat, self.mu_r, self.rho, self.h_c, anisotropic)
    }
}

/// Recovers (ρ, μr, H_c) by closed-form inversion of the thin-lamination eddy
/// formula, the skin-depth formula (or, lacking a skin depth, the saturation
/// relation B_sat = μ0 μr N I / l_c) and the loop-area hysteresis model.
pub fn fit_core_parameters(
    obs: &FitObservations,
    n_turns: u32,
    assumed_l_c: f64,
) -> Result<FitResult, FitError> {
    let reject = |reason: String, residuals: Vec<(String, f64)>| FitError { reason, residuals };
    let eddy = obs
        .eddy_obs
        .ok_or_else(|| reject("eddy observation required".into(), vec![]))?;
    if obs.skin_depth_at.is_none() && obs.isat_obs.is_none() {
        return Err(reject(
            "need a skin-depth or saturation-current observation to separate rho and mu_r".into(),
            vec![],
        ));
    }
    if n_turns == 0 || !(assumed_l_c > 0.0) {
        return Err(reject("fitting circuit needs N >= 1 and l_c > 0".into(), vec![]));
    }
    let positive = |label: &str, v: f64| -> Result<(), FitError> {
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(reject(format!("{label} must be finite and > 0, got {v}"), vec![]))
        }
    };
    positive("eddy f", eddy.f)?;
    positive("eddy b_pk", eddy.b_pk)?;
    positive("eddy t_lam", eddy.t_lam)?;
    positive("eddy core volume", eddy.core_volume)?;
    positive("eddy power", eddy.power)?;

    // P = π² f² B² t² V / (6 ρ)  →  ρ
    let rho = PI * PI * eddy.f * eddy.f * eddy.b_pk * eddy.b_pk * eddy.t_lam * eddy.t_lam
        * eddy.core_volume
        / (6.0 * eddy.power);

    let (mu_r, source) = if let Some(sd) = obs.skin_depth_at {
        positive("skin depth f", sd.f)?;
        positive("skin depth", sd.depth)?;
        (rho / (sd.depth * sd.depth * PI * sd.f * MU_0), PermeabilitySource::SkinDepth)
    } else {
        let isat = obs.isat_obs.expect("checked above");
        positive("saturation current", isat.current)?;
        (
            eddy.b_pk * assumed_l_c / (MU_0 * n_turns as f64 * isat.current),
            PermeabilitySource::SaturationCurrent,
        )
    };

    let h_c = match obs.hyst_obs {
        Some(h) => {
            positive("hysteresis f", h.f)?;
            positive("hysteresis b_pk", h.b_pk)?;
            positive("hysteresis core volume", h.core_volume)?;
            if !(h.power.is_finite() && h.power >= 0.0) {
                return Err(reject(format!("hysteresis power must be >= 0, got {}", h.power), vec![]));
            }
            h.power / (4.0 * h.b_pk * h.f * h.core_volume)
        }
        None => 0.0,
    };

    let eddy_res = PredictionResidual::new(
        em_model::eddy_loss_density(rho, eddy.f, eddy.b_pk, eddy.t_lam) * eddy.core_volume,
        eddy.power,
    );
    let skin_res = obs
        .skin_depth_at
        .map(|sd| PredictionResidual::new(skin_depth_raw(rho, mu_r, sd.f), sd.depth));
    let hyst_res = obs.hyst_obs.filter(|h| h.power > 0.0).map(|h| {
        PredictionResidual::new(
            em_model::hysteresis_loss_density(h_c, h.b_pk, h.f) * h.core_volume,
            h.power,
        )
    });
    let isat_pred = em_model::saturation_current_raw(eddy.b_pk, assumed_l_c, mu_r, n_turns);
    let (isat_fit, isat_withheld) = match (source, obs.isat_obs) {
        (PermeabilitySource::SaturationCurrent, Some(i)) => {
            (Some(PredictionResidual::new(isat_pred, i.current)), None)
        }
        (PermeabilitySource::SkinDepth, Some(i)) => {
            (None, Some(PredictionResidual::new(isat_pred, i.current)))
        }
        _ => (None, None),
    };

    if !(mu_r.is_finite() && mu_r >= 1.0) {
        let mut residuals = vec![("eddy".to_string(), eddy_res.rel_error)];
        if let Some(s) = &skin_res {
            residuals.push(("skin_depth".to_string(), s.rel_error));
        }
        return Err(reject(
            format!("fitted mu_r = {mu_r:.4} is below 1 (no physical solution)"),
            residuals,
        ));
    }

    Ok(FitResult {
        rho,
        mu_r,
        h_c,
        b_sat: eddy.b_pk,
        report: ResidualReport {
            mu_r_source: source,
            assumed_l_c,
            n_turns,
            skin_depth: skin_res,
            eddy: eddy_res,
            hysteresis: hyst_res,
            isat_fit,
            isat_withheld,
        },
    })
}
