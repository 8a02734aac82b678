//! Published prototype measurements and the optimised design variants they
//! were compared with, together with the fits and geometries derived from
//! them. Values are stored in the units they were reported in.

use std::sync::Arc;

use crate::em_model::{self, K_SINE};
use crate::error::Result;
use crate::geometry::{core_area, core_volume, CoreGeometry, WindingGeometry, DEFAULT_L_C, DEFAULT_MTL};
use crate::materials::{
    fit_core_parameters, EddyObservation, FitObservations, FitResult, HysteresisObservation,
    IsatObservation, MaterialRegistry, MaterialSpec, SkinDepthObservation,
};

/// Measurement frequency of the characterised prototypes, Hz.
pub const PROTOTYPE_F: f64 = 0.5e6;
pub const PROTOTYPE_TURNS: u32 = 33;

/// One core-material column of the prototype performance table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasuredColumn {
    pub name: &'static str,
    pub anisotropic: bool,
    pub i_ma: f64,
    pub l_uh: f64,
    pub v_in: f64,
    pub p_out_mw: f64,
    pub p_eddy_mw: f64,
    pub p_hys_mw: f64,
    pub p_cu_mw: f64,
    /// `None` where the published table has no value ("X").
    pub efficiency_pct: Option<f64>,
    pub power_density_w_cm3: Option<f64>,
}

pub const PROTOTYPE_TABLE: [MeasuredColumn; 5] = [
    MeasuredColumn {
        name: "NiFe",
        anisotropic: false,
        i_ma: 100.0,
        l_uh: 1.07,
        v_in: 0.29,
        p_out_mw: 29.0,
        p_eddy_mw: 7.23,
        p_hys_mw: 0.198,
        p_cu_mw: 0.5,
        efficiency_pct: Some(78.0),
        power_density_w_cm3: Some(7.8),
    },
    MeasuredColumn {
        name: "NiFe*",
        anisotropic: true,
        i_ma: 137.0,
        l_uh: 0.86,
        v_in: 0.29,
        p_out_mw: 40.0,
        p_eddy_mw: 7.23,
        p_hys_mw: 0.03,
        p_cu_mw: 0.9,
        efficiency_pct: Some(82.0),
        power_density_w_cm3: Some(11.3),
    },
    MeasuredColumn {
        name: "Vit",
        anisotropic: false,
        i_ma: 1.32,
        l_uh: 15.5,
        v_in: 0.36,
        p_out_mw: 0.47,
        p_eddy_mw: 3.47,
        p_hys_mw: 0.02,
        p_cu_mw: 0.00008,
        efficiency_pct: None,
        power_density_w_cm3: None,
    },
    MeasuredColumn {
        name: "NiFe (PR)",
        anisotropic: false,
        i_ma: 66.0,
        l_uh: 1.87,
        v_in: 0.28,
        p_out_mw: 18.48,
        p_eddy_mw: 2.86,
        p_hys_mw: 0.08,
        p_cu_mw: 0.21,
        efficiency_pct: Some(85.0),
        power_density_w_cm3: Some(5.46),
    },
    MeasuredColumn {
        name: "CoFeCu",
        anisotropic: false,
        i_ma: 180.0,
        l_uh: 0.28,
        v_in: 0.51,
        p_out_mw: 91.8,
        p_eddy_mw: 24.6,
        p_hys_mw: 0.11,
        p_cu_mw: 1.62,
        efficiency_pct: Some(77.0),
        power_density_w_cm3: Some(24.7),
    },
];

/// CoFeCu figures stated alongside the tables.
pub const COFECU_B_SAT: f64 = 1.4;
pub const COFECU_SKIN_DEPTH: f64 = 17.4e-6;
pub const COFECU_I_SAT: f64 = 1.24;
pub const COPPER_SKIN_DEPTH_1MHZ: f64 = 66e-6;
pub const COPPER_SKIN_DEPTH_500KHZ: f64 = 93e-6;
pub const OPTIMIZED_L_TARGET: f64 = 0.3e-6;

/// One column of the optimised-design table: dimensions and performance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DesignColumn {
    pub name: &'static str,
    pub n_turns: u32,
    pub t_w: f64,
    pub w_w: f64,
    pub s_w: f64,
    pub n_lam: u32,
    pub t_lam: f64,
    pub w_lam: f64,
    pub t_ins: f64,
    /// Drive current the column was evaluated at, A.
    pub current_a: f64,
    pub l_uh: f64,
    pub v_in: f64,
    pub p_out_w: f64,
    pub b_pk: f64,
    pub p_eddy_mw: f64,
    pub p_hys_mw: f64,
    pub p_cu_mw: f64,
    pub efficiency_pct: f64,
    pub power_density_w_cm3: f64,
}

pub const OPTIMIZED_TABLE: [DesignColumn; 3] = [
    DesignColumn {
        name: "Optimized (1)",
        n_turns: 11,
        t_w: 180e-6,
        w_w: 550e-6,
        s_w: 55e-6,
        n_lam: 2,
        t_lam: 5e-6,
        w_lam: 500e-6,
        t_ins: 5e-6,
        current_a: 1.24,
        l_uh: 0.3,
        v_in: 0.17,
        p_out_w: 0.2108,
        b_pk: 1.4,
        p_eddy_mw: 5.54,
        p_hys_mw: 0.57,
        p_cu_mw: 184.0,
        efficiency_pct: 83.0,
        power_density_w_cm3: 174.8,
    },
    DesignColumn {
        name: "Optimized (2)",
        n_turns: 33,
        t_w: 90e-6,
        w_w: 200e-6,
        s_w: 20e-6,
        n_lam: 10,
        t_lam: 1e-6,
        w_lam: 500e-6,
        t_ins: 5e-6,
        current_a: 0.18,
        l_uh: 0.3,
        v_in: 0.51,
        p_out_w: 0.0918,
        b_pk: 1.4,
        p_eddy_mw: 0.22,
        p_hys_mw: 0.11,
        p_cu_mw: 1.62,
        efficiency_pct: 97.0,
        power_density_w_cm3: 30.83,
    },
    DesignColumn {
        name: "Prototype",
        n_turns: 33,
        t_w: 90e-6,
        w_w: 200e-6,
        s_w: 20e-6,
        n_lam: 1,
        t_lam: 10e-6,
        w_lam: 500e-6,
        t_ins: 5e-6,
        current_a: 0.18,
        l_uh: 0.28,
        v_in: 0.51,
        p_out_w: 0.0918,
        b_pk: 1.4,
        p_eddy_mw: 24.6,
        p_hys_mw: 0.11,
        p_cu_mw: 1.62,
        efficiency_pct: 77.0,
        power_density_w_cm3: 24.7,
    },
];

impl DesignColumn {
    pub fn core(&self) -> CoreGeometry {
        CoreGeometry::new(self.n_lam, self.t_lam, self.w_lam, self.t_ins, DEFAULT_L_C)
            .expect("published core dimensions are valid")
    }

    pub fn winding(&self, conductor: Arc<MaterialSpec>) -> WindingGeometry {
        WindingGeometry::new(self.n_turns, self.t_w, self.w_w, self.s_w, DEFAULT_MTL, conductor)
            .expect("published winding dimensions are valid")
    }

    /// Power-density volume implied by the column's own output power and
    /// power density, m³.
    pub fn implied_volume(&self) -> f64 {
        self.p_out_w / (self.power_density_w_cm3 * 1e6)
    }
}

pub fn prototype() -> &'static DesignColumn {
    &OPTIMIZED_TABLE[2]
}

/// Efficiency recomputed from a column's published output and loss rows.
pub fn loss_row_efficiency(p_out: f64, p_eddy: f64, p_hys: f64, p_cu: f64) -> Result<f64> {
    em_model::efficiency(
        p_out,
        &em_model::LossBreakdown {
            p_eddy,
            p_hys,
            p_cu,
        },
    )
}

/// Fit inputs for one prototype column. CoFeCu separates ρ and μr through its
/// stated skin depth and keeps its saturation current as a withheld check;
/// the other alloys use their table saturation current, with B_sat taken from
/// the EMF row.
pub fn fit_observations(col: &MeasuredColumn) -> FitObservations {
    let proto = prototype();
    let core = proto.core();
    let volume = core_volume(&core);
    let cofecu = col.name == "CoFeCu";
    let b_pk = if cofecu {
        COFECU_B_SAT
    } else {
        em_model::flux_density_from_emf(col.v_in, K_SINE, PROTOTYPE_F, PROTOTYPE_TURNS, core_area(&core))
    };
    FitObservations {
        skin_depth_at: cofecu.then_some(SkinDepthObservation {
            f: PROTOTYPE_F,
            depth: COFECU_SKIN_DEPTH,
        }),
        eddy_obs: Some(EddyObservation {
            f: PROTOTYPE_F,
            b_pk,
            t_lam: proto.t_lam,
            core_volume: volume,
            power: col.p_eddy_mw * 1e-3,
        }),
        isat_obs: Some(IsatObservation {
            current: if cofecu { COFECU_I_SAT } else { col.i_ma * 1e-3 },
        }),
        hyst_obs: Some(HysteresisObservation {
            f: PROTOTYPE_F,
            b_pk,
            core_volume: volume,
            power: col.p_hys_mw * 1e-3,
        }),
    }
}

fn provenance(col: &MeasuredColumn, fit: &FitResult) -> String {
    let mu = if col.name == "CoFeCu" {
        "mu_r from skin depth 17.4 um at 0.5 MHz"
    } else {
        "mu_r from table saturation current; B_sat from EMF row"
    };
    let withheld = fit
        .report
        .isat_withheld
        .as_ref()
        .map(|r| format!("; withheld Isat {:.3} A vs {:.3} A ({:+.2}%)", r.predicted, r.observed, 100.0 * r.rel_error))
        .unwrap_or_default();
    format!(
        "fitted: rho from eddy loss at 10 um lamination, {mu}, h_c from hysteresis loss; \
         assumed l_c = {} mm, N = {}{withheld}",
        fit.report.assumed_l_c * 1e3,
        fit.report.n_turns
    )
}

/// Fits every prototype core material and returns the registry document
/// (with copper) plus the individual fit results.
pub fn fitted_registry() -> Result<(MaterialRegistry, Vec<(&'static str, FitResult)>)> {
    let mut registry = MaterialRegistry::new();
    let mut fits = Vec::new();
    for col in &PROTOTYPE_TABLE {
        let fit = fit_core_parameters(&fit_observations(col), PROTOTYPE_TURNS, DEFAULT_L_C)?;
        registry.insert(fit.to_material(col.name, col.anisotropic)?, provenance(col, &fit))?;
        fits.push((col.name, fit));
    }
    Ok((registry, fits))
}

/// The registry document shipped with the crate.
pub const SHIPPED_REGISTRY: &str = include_str!("../data/materials.json");

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::load_material_registry;

    #[test]
    fn shipped_registry_matches_fit() {
        let (fitted, _) = fitted_registry().unwrap();
        let shipped = load_material_registry(SHIPPED_REGISTRY).unwrap();
        assert_eq!(fitted.len(), shipped.len());
        for name in fitted.names() {
            let a = fitted.get(name).unwrap();
            let b = shipped.get(name).unwrap();
            assert_eq!(*a, *b, "{name}");
            assert_eq!(fitted.entry(name).unwrap().provenance, shipped.entry(name).unwrap().provenance);
        }
    }

    #[test]
    fn implied_volumes() {
        assert!((OPTIMIZED_TABLE[1].implied_volume() - 2.98e-9).abs() / 2.98e-9 < 0.002);
        assert!((prototype().implied_volume() - 3.72e-9).abs() / 3.72e-9 < 0.002);
    }
}
