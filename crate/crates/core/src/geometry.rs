//! Laminated O-core and solenoid winding geometry.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::materials::MaterialSpec;

/// Default mean turn length, m. Chosen so the prototype winding's I²R matches
/// its measured copper loss; no clearance or via dimensions are published.
pub const DEFAULT_MTL: f64 = 1.59e-3;

/// Default magnetic flux path length, m.
pub const DEFAULT_L_C: f64 = 10e-3;

/// Default lamination width, m.
pub const DEFAULT_W_LAM: f64 = 500e-6;

/// Effective power-density volume of the prototype, m³ (3.72 mm³).
pub const PROTOTYPE_ENVELOPE: f64 = 3.72e-9;

/// Outline product of the fabricated part, 5 mm × 2 mm × 0.25 mm.
pub const FOOTPRINT_VOLUME: f64 = 5e-3 * 2e-3 * 0.25e-3;

fn check_positive(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::geometry(field, format!("must be > 0, got {v}")))
    }
}

fn check_non_negative(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::geometry(field, format!("must be >= 0, got {v}")))
    }
}

/// Stack of rectangular laminations forming a closed O-core.
#[derive(Clone, Debug, PartialEq)]
pub struct CoreGeometry {
    pub n_lam: u32,
    pub t_lam: f64,
    pub w_lam: f64,
    /// Insulation between adjacent laminations; not part of the magnetic area.
    pub t_ins: f64,
    pub l_c: f64,
}

impl CoreGeometry {
    pub fn new(n_lam: u32, t_lam: f64, w_lam: f64, t_ins: f64, l_c: f64) -> Result<Self> {
        let c = CoreGeometry {
            n_lam,
            t_lam,
            w_lam,
            t_ins,
            l_c,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_lam < 1 {
            return Err(Error::geometry("n_lam", "must be >= 1"));
        }
        check_positive("t_lam_m", self.t_lam)?;
        check_positive("w_lam_m", self.w_lam)?;
        check_non_negative("t_ins_m", self.t_ins)?;
        check_positive("l_c_m", self.l_c)
    }

    /// Overall stack height including the insulation between laminations.
    pub fn stack_height(&self) -> f64 {
        self.n_lam as f64 * self.t_lam + self.n_lam.saturating_sub(1) as f64 * self.t_ins
    }
}

/// Single-layer solenoid winding.
#[derive(Clone, Debug, PartialEq)]
pub struct WindingGeometry {
    pub n_turns: u32,
    pub t_w: f64,
    pub w_w: f64,
    pub s_w: f64,
    pub mtl: f64,
    pub conductor: Arc<MaterialSpec>,
}

impl WindingGeometry {
    pub fn new(
        n_turns: u32,
        t_w: f64,
        w_w: f64,
        s_w: f64,
        mtl: f64,
        conductor: Arc<MaterialSpec>,
    ) -> Result<Self> {
        let w = WindingGeometry {
            n_turns,
            t_w,
            w_w,
            s_w,
            mtl,
            conductor,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_turns < 1 {
            return Err(Error::geometry("n_turns", "must be >= 1"));
        }
        check_positive("t_w_m", self.t_w)?;
        check_positive("w_w_m", self.w_w)?;
        check_non_negative("s_w_m", self.s_w)?;
        check_positive("mtl_m", self.mtl)
    }
}

/// Volume used to normalise output power.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentEnvelope {
    pub reference_volume: f64,
    pub note: String,
}

impl ComponentEnvelope {
    pub fn new(reference_volume: f64, note: impl Into<String>) -> Result<Self> {
        check_positive("envelope_volume_m3", reference_volume)?;
        Ok(ComponentEnvelope {
            reference_volume,
            note: note.into(),
        })
    }

    pub fn prototype() -> Self {
        ComponentEnvelope {
            reference_volume: PROTOTYPE_ENVELOPE,
            note: "effective volume implied by the prototype output power and power density"
                .into(),
        }
    }
}

/// How the power-density denominator is obtained.
#[derive(Clone, Debug, PartialEq)]
pub enum VolumeRule {
    Envelope(ComponentEnvelope),
    Computed { overhead: f64 },
}

impl Default for VolumeRule {
    fn default() -> Self {
        VolumeRule::Envelope(ComponentEnvelope::prototype())
    }
}

impl VolumeRule {
    pub fn volume(&self, core: &CoreGeometry, w: &WindingGeometry) -> f64 {
        match self {
            VolumeRule::Envelope(env) => component_volume(core, w, 1.0, Some(env)),
            VolumeRule::Computed { overhead } => component_volume(core, w, *overhead, None),
        }
    }
}

/// Magnetic cross-section `n_lam · t_lam · w_lam`.
pub fn core_area(core: &CoreGeometry) -> f64 {
    core.n_lam as f64 * core.t_lam * core.w_lam
}

pub fn core_volume(core: &CoreGeometry) -> f64 {
    core_area(core) * core.l_c
}

pub fn winding_cross_section(w: &WindingGeometry) -> f64 {
    w.t_w * w.w_w
}

pub fn total_winding_length(w: &WindingGeometry) -> f64 {
    w.n_turns as f64 * w.mtl
}

/// Core stack box: flux path length × lamination width × stack height.
pub fn core_box_volume(core: &CoreGeometry) -> f64 {
    core.l_c * core.w_lam * core.stack_height()
}

/// Winding box: each turn occupies its pitch (width plus spacing) times its
/// thickness along the mean turn length.
pub fn winding_box_volume(w: &WindingGeometry) -> f64 {
    w.n_turns as f64 * (w.w_w + w.s_w) * w.t_w * w.mtl
}

/// Component volume for power density. An envelope, when given, overrides the
/// geometry entirely; otherwise `(core box + winding box) · overhead`.
pub fn component_volume(
    core: &CoreGeometry,
    w: &WindingGeometry,
    overhead: f64,
    envelope: Option<&ComponentEnvelope>,
) -> f64 {
    match envelope {
        Some(env) => env.reference_volume,
        None => (core_box_volume(core) + winding_box_volume(w)) * overhead,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cu() -> Arc<MaterialSpec> {
        Arc::new(MaterialSpec::copper())
    }

    fn core(n: u32, t: f64) -> CoreGeometry {
        CoreGeometry::new(n, t, 500e-6, 5e-6, 10e-3).unwrap()
    }

    #[test]
    fn core_areas_of_published_stacks() {
        for (n, t) in [(1, 10e-6), (10, 1e-6), (2, 5e-6)] {
            assert_relative_eq!(core_area(&core(n, t)), 5e-9, max_relative = 1e-12);
        }
    }

    #[test]
    fn core_volume_scaling() {
        let c = core(1, 10e-6);
        assert_relative_eq!(core_volume(&c), 5e-11, max_relative = 1e-12);
        let relam = core(2, 5e-6);
        assert_relative_eq!(core_volume(&relam), core_volume(&c), max_relative = 1e-12);
        let mut long = c.clone();
        long.l_c *= 2.0;
        assert_relative_eq!(core_volume(&long), 2.0 * core_volume(&c), max_relative = 1e-15);
    }

    #[test]
    fn winding_sections_and_lengths() {
        let w = WindingGeometry::new(33, 90e-6, 200e-6, 20e-6, 1.59e-3, cu()).unwrap();
        assert_relative_eq!(winding_cross_section(&w), 1.8e-8, max_relative = 1e-12);
        assert_relative_eq!(total_winding_length(&w), 52.47e-3, max_relative = 1e-12);
        let w1 = WindingGeometry::new(11, 180e-6, 550e-6, 55e-6, 1.59e-3, cu()).unwrap();
        assert_relative_eq!(winding_cross_section(&w1), 9.9e-8, max_relative = 1e-12);
        let single = WindingGeometry::new(1, 90e-6, 200e-6, 0.0, 2e-3, cu()).unwrap();
        assert_eq!(total_winding_length(&single), 2e-3);
    }

    #[test]
    fn degenerate_geometry_is_rejected() {
        assert!(WindingGeometry::new(33, 0.0, 200e-6, 20e-6, 1.59e-3, cu()).is_err());
        assert!(WindingGeometry::new(0, 90e-6, 200e-6, 20e-6, 1.59e-3, cu()).is_err());
        assert!(CoreGeometry::new(0, 10e-6, 500e-6, 5e-6, 10e-3).is_err());
        assert!(CoreGeometry::new(1, 10e-6, 500e-6, -1e-6, 10e-3).is_err());
        assert!(ComponentEnvelope::new(0.0, "").is_err());
    }

    #[test]
    fn envelope_override_and_degenerate_winding() {
        let c = core(1, 10e-6);
        let w = WindingGeometry::new(33, 90e-6, 200e-6, 20e-6, 1.59e-3, cu()).unwrap();
        let env = ComponentEnvelope::new(3.72e-9, "x").unwrap();
        assert_eq!(component_volume(&c, &w, 1.0, Some(&env)), 3.72e-9);
        // Volumes implied by output power / power density.
        assert_relative_eq!(91.8e-3 / 24.7e6, 3.72e-9, max_relative = 0.002);
        assert_relative_eq!(29e-3 / 7.8e6, 3.72e-9, max_relative = 0.002);

        let mut empty = w.clone();
        empty.t_w = 0.0;
        empty.w_w = 0.0;
        assert_eq!(component_volume(&c, &empty, 1.0, None), core_box_volume(&c));
    }

    proptest! {
        #[test]
        fn area_invariant_under_relamination(n in 1u32..20, k in 1u32..10, t in 1e-7f64..1e-4) {
            let a = core_area(&core(n, t));
            let b = core_area(&core(n * k, t / k as f64));
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }

        #[test]
        fn envelope_ignores_geometry(n in 1u32..20, t in 1e-7f64..1e-4, turns in 1u32..100,
                                     ov in 1.0f64..3.0) {
            let env = ComponentEnvelope::new(2.98e-9, "").unwrap();
            let w = WindingGeometry::new(turns, 90e-6, 200e-6, 20e-6, 1.59e-3, cu()).unwrap();
            prop_assert_eq!(component_volume(&core(n, t), &w, ov, Some(&env)), 2.98e-9);
        }

        #[test]
        fn dimensional_scaling(s in 0.1f64..10.0) {
            let c = core(3, 4e-6);
            let mut scaled = c.clone();
            scaled.t_lam *= s;
            scaled.w_lam *= s;
            scaled.t_ins *= s;
            scaled.l_c *= s;
            prop_assert!((core_area(&scaled) - s * s * core_area(&c)).abs() <= 1e-12 * core_area(&scaled));
            prop_assert!((core_volume(&scaled) - s.powi(3) * core_volume(&c)).abs()
                <= 1e-12 * core_volume(&scaled));
            prop_assert!((core_box_volume(&scaled) - s.powi(3) * core_box_volume(&c)).abs()
                <= 1e-12 * core_box_volume(&scaled));
        }
    }
}
