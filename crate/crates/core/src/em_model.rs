//! Analytical electromagnetic model of a laminated-core solenoid inductor.
//!
//! Conventions: drive currents are RMS, flux densities are peak values, and
//! every quantity is SI. Eddy loss uses the classical thin-lamination result
//! `π² f² B² t² / (6ρ)` per unit volume; its roll-off with frequency comes from
//! the one-dimensional lamination flux factor `tanh(γt/2)/(γt/2)`,
//! `γ = (1 + j)/δ`. The winding AC resistance uses the single-layer skin
//! factor; proximity effect and parasitic capacitance are not modelled.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{
    core_area, core_volume, total_winding_length, winding_cross_section, CoreGeometry,
    VolumeRule, WindingGeometry,
};
use crate::materials::{skin_depth_raw, MaterialSpec, MU_0};

/// Sinusoidal EMF form factor.
pub const K_SINE: f64 = 4.44;

/// PCB current-density limit, A/m² (10 A/mm²).
pub const DEFAULT_J_MAX: f64 = 10e6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatingPoint {
    pub f: f64,
    /// RMS drive current, A.
    pub i_drive: f64,
    pub k_wave: f64,
    /// Peak core flux density, T.
    pub b_pk: f64,
}

impl OperatingPoint {
    pub fn validate(&self) -> Result<()> {
        if !(self.f.is_finite() && self.f > 0.0) {
            return Err(Error::domain(format!("frequency must be > 0, got {}", self.f)));
        }
        if !(self.i_drive.is_finite() && self.i_drive >= 0.0) {
            return Err(Error::domain(format!("drive current must be >= 0, got {}", self.i_drive)));
        }
        if !(self.k_wave.is_finite() && self.k_wave > 0.0) {
            return Err(Error::domain(format!("waveform factor must be > 0, got {}", self.k_wave)));
        }
        if !(self.b_pk.is_finite() && self.b_pk >= 0.0) {
            return Err(Error::domain(format!("peak flux density must be >= 0, got {}", self.b_pk)));
        }
        Ok(())
    }

    pub fn at(&self, f: f64) -> Self {
        OperatingPoint { f, ..*self }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LossBreakdown {
    pub p_eddy: f64,
    pub p_hys: f64,
    pub p_cu: f64,
}

impl LossBreakdown {
    pub fn total(&self) -> f64 {
        self.p_eddy + self.p_hys + self.p_cu
    }
}

/// Non-fatal annotation: a thickness exceeds the range the model assumes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ValidityWarning {
    /// Lamination thicker than one core skin depth.
    LaminationThick { t_lam: f64, skin_depth: f64 },
    /// Winding thicker than two conductor skin depths.
    WindingThick { t_w: f64, skin_depth: f64 },
}

impl fmt::Display for ValidityWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidityWarning::LaminationThick { t_lam, skin_depth } => write!(
                f,
                "lamination {:.2} um exceeds core skin depth {:.2} um; thin-lamination eddy formula overestimates",
                t_lam * 1e6,
                skin_depth * 1e6
            ),
            ValidityWarning::WindingThick { t_w, skin_depth } => write!(
                f,
                "winding {:.1} um exceeds 2x conductor skin depth ({:.1} um)",
                t_w * 1e6,
                2.0 * skin_depth * 1e6
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerformancePoint {
    pub l_eff: f64,
    pub r_winding_ac: f64,
    pub r_core: f64,
    pub v_in: f64,
    pub p_out: f64,
    pub losses: LossBreakdown,
    pub efficiency: f64,
    /// W/m³
    pub power_density: f64,
    pub q: f64,
    pub warnings: Vec<ValidityWarning>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurrentLimit {
    Saturation,
    Winding,
    Both,
}

impl fmt::Display for CurrentLimit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CurrentLimit::Saturation => "saturation-limited",
            CurrentLimit::Winding => "winding-limited",
            CurrentLimit::Both => "saturation and winding limits coincide",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatingCurrent {
    pub current: f64,
    pub saturation: f64,
    pub winding: f64,
    pub binding: CurrentLimit,
}

/// Closed magnetic-circuit inductance `μ0 μr N² A_c / l_c`.
pub fn inductance_dc(core: &CoreGeometry, w: &WindingGeometry, m: &MaterialSpec) -> f64 {
    let n = w.n_turns as f64;
    MU_0 * m.mu_r * n * n * core_area(core) / core.l_c
}

#[inline]
fn tanh_c(z: Complex64) -> Complex64 {
    // Complex tanh overflows through cosh for large |Re z|; the limit is ±1.
    if z.re.abs() > 20.0 {
        Complex64::new(z.re.signum(), 0.0)
    } else {
        z.tanh()
    }
}

/// `tanh(x)/x` with `x = (1 + j) · t / (2δ)`.
pub fn flux_factor_from_ratio(t_over_delta: f64) -> Complex64 {
    let x = Complex64::new(1.0, 1.0) * (0.5 * t_over_delta);
    if x.norm() < 1e-4 {
        Complex64::new(1.0, 0.0) - x * x / 3.0
    } else {
        tanh_c(x) / x
    }
}

/// Complex lamination flux factor. Its real part scales inductance; the
/// negative imaginary part is the core loss tangent contribution.
pub fn lamination_flux_factor(m: &MaterialSpec, t_lam: f64, f: f64) -> Complex64 {
    debug_assert!(t_lam > 0.0 && f > 0.0);
    flux_factor_from_ratio(t_lam / skin_depth_raw(m.rho, m.mu_r, f))
}

pub fn effective_inductance(
    core: &CoreGeometry,
    w: &WindingGeometry,
    m: &MaterialSpec,
    f: f64,
) -> f64 {
    inductance_dc(core, w, m) * lamination_flux_factor(m, core.t_lam, f).re
}

#[inline]
pub(crate) fn saturation_current_raw(b_sat: f64, l_c: f64, mu_r: f64, n_turns: u32) -> f64 {
    b_sat * l_c / (MU_0 * mu_r * n_turns as f64)
}

/// Current at which the core reaches B_sat, `B_sat l_c / (μ0 μr N)`.
/// Non-magnetic materials never saturate and return infinity.
pub fn saturation_current(core: &CoreGeometry, w: &WindingGeometry, m: &MaterialSpec) -> f64 {
    match m.b_sat {
        Some(b) => saturation_current_raw(b, core.l_c, m.mu_r, w.n_turns),
        None => f64::INFINITY,
    }
}

pub fn winding_current_limit(w: &WindingGeometry, j_max: f64) -> Result<f64> {
    if !(j_max.is_finite() && j_max > 0.0) {
        return Err(Error::domain(format!("current density limit must be > 0, got {j_max}")));
    }
    Ok(j_max * winding_cross_section(w))
}

pub fn operating_current(
    core: &CoreGeometry,
    w: &WindingGeometry,
    m: &MaterialSpec,
    j_max: f64,
) -> Result<OperatingCurrent> {
    let saturation = saturation_current(core, w, m);
    let winding = winding_current_limit(w, j_max)?;
    let binding = if saturation == winding {
        CurrentLimit::Both
    } else if saturation < winding {
        CurrentLimit::Saturation
    } else {
        CurrentLimit::Winding
    };
    Ok(OperatingCurrent {
        current: saturation.min(winding),
        saturation,
        winding,
        binding,
    })
}

/// Transformer EMF `K f N B_pk A_c`.
pub fn induced_voltage(op: &OperatingPoint, n_turns: u32, b_pk: f64, a_c: f64) -> f64 {
    op.k_wave * op.f * n_turns as f64 * b_pk * a_c
}

/// Peak flux density implied by a measured EMF (inverse of [`induced_voltage`]).
pub fn flux_density_from_emf(v_in: f64, k_wave: f64, f: f64, n_turns: u32, a_c: f64) -> f64 {
    v_in / (k_wave * f * n_turns as f64 * a_c)
}

pub fn output_power(v_in: f64, i: f64) -> f64 {
    v_in * i
}

/// Classical thin-lamination eddy loss per unit volume, W/m³.
#[inline]
pub fn eddy_loss_density(rho: f64, f: f64, b_pk: f64, t_lam: f64) -> f64 {
    PI * PI * f * f * b_pk * b_pk * t_lam * t_lam / (6.0 * rho)
}

/// Loop-area hysteresis loss per unit volume, `4 H_c B_pk f`, W/m³.
#[inline]
pub fn hysteresis_loss_density(h_c: f64, b_pk: f64, f: f64) -> f64 {
    4.0 * h_c * b_pk * f
}

pub fn eddy_loss(m: &MaterialSpec, core: &CoreGeometry, f: f64, b_pk: f64) -> f64 {
    eddy_loss_density(m.rho, f, b_pk, core.t_lam) * core_volume(core)
}

/// Warning when the lamination is thicker than one core skin depth.
pub fn lamination_warning(m: &MaterialSpec, core: &CoreGeometry, f: f64) -> Option<ValidityWarning> {
    let delta = skin_depth_raw(m.rho, m.mu_r, f);
    (core.t_lam > delta).then_some(ValidityWarning::LaminationThick {
        t_lam: core.t_lam,
        skin_depth: delta,
    })
}

pub fn hysteresis_loss(m: &MaterialSpec, core: &CoreGeometry, f: f64, b_pk: f64) -> f64 {
    hysteresis_loss_density(m.h_c, b_pk, f) * core_volume(core)
}

pub fn dc_resistance(w: &WindingGeometry) -> f64 {
    w.conductor.rho * total_winding_length(w) / winding_cross_section(w)
}

/// Single-layer skin-effect factor `Re[(1+j)(Δ/2) coth((1+j)Δ/2)]`.
pub fn skin_resistance_factor(delta_ratio: f64) -> f64 {
    let x = Complex64::new(1.0, 1.0) * (0.5 * delta_ratio);
    if x.norm() < 1e-4 {
        // x coth x = 1 + x²/3 + …, and x² is purely imaginary here.
        1.0
    } else {
        (x / tanh_c(x)).re
    }
}

pub fn ac_winding_resistance(w: &WindingGeometry, f: f64) -> f64 {
    let r_dc = dc_resistance(w);
    if f <= 0.0 {
        return r_dc;
    }
    let delta = skin_depth_raw(w.conductor.rho, w.conductor.mu_r, f);
    r_dc * skin_resistance_factor(w.t_w / delta)
}

/// Series resistance equivalent to core loss, `ω L_dc · (−Im F)`.
pub fn core_loss_resistance(
    core: &CoreGeometry,
    w: &WindingGeometry,
    m: &MaterialSpec,
    f: f64,
) -> f64 {
    if f <= 0.0 {
        return 0.0;
    }
    let omega = 2.0 * PI * f;
    omega * inductance_dc(core, w, m) * (-lamination_flux_factor(m, core.t_lam, f).im)
}

pub fn copper_loss(i: f64, r_ac: f64) -> f64 {
    i * i * r_ac
}

pub fn efficiency(p_out: f64, losses: &LossBreakdown) -> Result<f64> {
    let denom = p_out + losses.total();
    if !(denom.is_finite() && denom > 0.0) {
        return Err(Error::domain("efficiency undefined: output power and losses are all zero"));
    }
    Ok(p_out / denom)
}

pub fn power_density(p_out: f64, reference_volume: f64) -> f64 {
    p_out / reference_volume
}

/// `2π f L / R`.
pub fn q_factor(l_eff: f64, r_total: f64, f: f64) -> Result<f64> {
    if !(r_total > 0.0) {
        return Err(Error::domain(format!("Q-factor needs positive resistance, got {r_total}")));
    }
    Ok(2.0 * PI * f * l_eff / r_total)
}

/// Fraction of output power lost to a series resistance carrying the load
/// current, e.g. a DC-DC converter output inductor.
pub fn conduction_loss_fraction(r: f64, i: f64, v_out: f64) -> Result<f64> {
    let p_loss = copper_loss(i, r);
    let eff = efficiency(
        output_power(v_out, i),
        &LossBreakdown {
            p_cu: p_loss,
            ..Default::default()
        },
    )?;
    Ok(1.0 - eff)
}

/// An inductor ready for evaluation: geometry, core material and the rule
/// for its power-density volume.
#[derive(Clone, Debug)]
pub struct Inductor {
    pub core: CoreGeometry,
    pub winding: WindingGeometry,
    pub material: Arc<MaterialSpec>,
    pub volume: VolumeRule,
}

impl Inductor {
    pub fn inductance_dc(&self) -> f64 {
        inductance_dc(&self.core, &self.winding, &self.material)
    }

    pub fn operating_current(&self, j_max: f64) -> Result<OperatingCurrent> {
        operating_current(&self.core, &self.winding, &self.material, j_max)
    }

    pub fn volume(&self) -> f64 {
        self.volume.volume(&self.core, &self.winding)
    }

    pub fn performance(&self, op: &OperatingPoint) -> Result<PerformancePoint> {
        op.validate()?;
        let (core, w, m) = (&self.core, &self.winding, &*self.material);
        let f = op.f;

        let l_dc = inductance_dc(core, w, m);
        let flux = lamination_flux_factor(m, core.t_lam, f);
        let l_eff = l_dc * flux.re;
        let r_winding_ac = ac_winding_resistance(w, f);
        let r_core = 2.0 * PI * f * l_dc * (-flux.im);

        let v_in = induced_voltage(op, w.n_turns, op.b_pk, core_area(core));
        let p_out = output_power(v_in, op.i_drive);
        let losses = LossBreakdown {
            p_eddy: eddy_loss(m, core, f, op.b_pk),
            p_hys: hysteresis_loss(m, core, f, op.b_pk),
            p_cu: copper_loss(op.i_drive, r_winding_ac),
        };
        let efficiency = efficiency(p_out, &losses)?;
        let q = q_factor(l_eff, r_winding_ac + r_core, f)?;

        let mut warnings = Vec::new();
        if let Some(warn) = lamination_warning(m, core, f) {
            warnings.push(warn);
        }
        let delta_w = skin_depth_raw(w.conductor.rho, w.conductor.mu_r, f);
        if w.t_w > 2.0 * delta_w {
            warnings.push(ValidityWarning::WindingThick {
                t_w: w.t_w,
                skin_depth: delta_w,
            });
        }

        Ok(PerformancePoint {
            l_eff,
            r_winding_ac,
            r_core,
            v_in,
            p_out,
            losses,
            efficiency,
            power_density: power_density(p_out, self.volume()),
            q,
            warnings,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ComponentEnvelope;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cofecu() -> MaterialSpec {
        MaterialSpec::core("CoFeCu", 1.4, 274.0, 1.64e-7, 0.79, false).unwrap()
    }

    fn proto_core(n: u32, t: f64) -> CoreGeometry {
        CoreGeometry::new(n, t, 500e-6, 5e-6, 10e-3).unwrap()
    }

    fn proto_winding(n: u32) -> WindingGeometry {
        WindingGeometry::new(n, 90e-6, 200e-6, 20e-6, 1.59e-3, Arc::new(MaterialSpec::copper()))
            .unwrap()
    }

    fn op(f: f64, i: f64) -> OperatingPoint {
        OperatingPoint {
            f,
            i_drive: i,
            k_wave: K_SINE,
            b_pk: 1.4,
        }
    }

    fn prototype() -> Inductor {
        Inductor {
            core: proto_core(1, 10e-6),
            winding: proto_winding(33),
            material: Arc::new(cofecu()),
            volume: VolumeRule::Envelope(ComponentEnvelope::prototype()),
        }
    }

    #[test]
    fn magnetic_circuit_inductance() {
        let l = inductance_dc(&proto_core(1, 10e-6), &proto_winding(33), &cofecu());
        assert_relative_eq!(l, 0.1875e-6, max_relative = 0.005);
        let l2 = inductance_dc(&proto_core(1, 10e-6), &proto_winding(66), &cofecu());
        assert_relative_eq!(l2, 4.0 * l, max_relative = 1e-14);
    }

    #[test]
    fn flux_factor_limits_and_bounds() {
        let thin = flux_factor_from_ratio(1e-6);
        assert_relative_eq!(thin.re, 1.0, max_relative = 1e-12);
        assert!(thin.im.abs() < 1e-12);
        for r in [1e-3, 0.1, 0.5, 1.0, 2.0, 5.0, 30.0, 100.0, 1e4] {
            assert!(flux_factor_from_ratio(r).norm() <= 1.0 + 1e-15, "ratio {r}");
        }
        let m = cofecu();
        let f1 = lamination_flux_factor(&m, 10e-6, 1e6);
        assert!(f1.re > 0.9 && f1.re < 1.0, "{f1}");
        // Series check: tanh(x)/x ≈ 1 − x²/3 + 2x⁴/15 − 17x⁶/315 for small x.
        let x = Complex64::new(1.0, 1.0) * 0.05;
        let x2 = x * x;
        let series = 1.0 - x2 / 3.0 + x2 * x2 * 2.0 / 15.0 - x2 * x2 * x2 * 17.0 / 315.0;
        assert!((flux_factor_from_ratio(0.1) - series).norm() < 1e-9);
    }

    #[test]
    fn effective_inductance_behaviour() {
        let (c, w, m) = (proto_core(1, 10e-6), proto_winding(33), cofecu());
        let l_dc = inductance_dc(&c, &w, &m);
        assert_relative_eq!(effective_inductance(&c, &w, &m, 1.0), l_dc, max_relative = 1e-9);
        assert!(effective_inductance(&c, &w, &m, 0.5e6) / l_dc >= 0.97);
        let mut prev = f64::INFINITY;
        for k in 0..200 {
            let f = 1e3 * 10f64.powf(k as f64 / 40.0);
            let l = effective_inductance(&c, &w, &m, f);
            assert!(l <= prev);
            prev = l;
        }
    }

    #[test]
    fn current_limits() {
        let (c, w, m) = (proto_core(1, 10e-6), proto_winding(33), cofecu());
        assert_relative_eq!(saturation_current(&c, &w, &m), 1.233, max_relative = 0.005);
        assert_relative_eq!(
            saturation_current(&c, &proto_winding(66), &m),
            saturation_current(&c, &w, &m) / 2.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(winding_current_limit(&w, 10e6).unwrap(), 0.18, max_relative = 1e-12);
        let big = WindingGeometry::new(11, 180e-6, 550e-6, 55e-6, 1.59e-3, w.conductor.clone()).unwrap();
        assert_relative_eq!(winding_current_limit(&big, 10e6).unwrap(), 0.99, max_relative = 1e-12);
        assert!(winding_current_limit(&w, 0.0).is_err());

        let opc = operating_current(&c, &w, &m, 10e6).unwrap();
        assert_eq!(opc.binding, CurrentLimit::Winding);
        assert_relative_eq!(opc.current, 0.18, max_relative = 1e-12);

        let tie_j = saturation_current(&c, &w, &m) / winding_cross_section(&w);
        let tie = operating_current(&c, &w, &m, tie_j).unwrap();
        assert_eq!(tie.binding, CurrentLimit::Both);

        let cu = MaterialSpec::copper();
        assert_eq!(saturation_current(&c, &w, &cu), f64::INFINITY);
    }

    #[test]
    fn emf_and_output_power() {
        let v = induced_voltage(&op(0.5e6, 0.18), 33, 1.4, 5e-9);
        assert_relative_eq!(v, 0.51, max_relative = 0.01);
        let v11 = induced_voltage(&op(0.5e6, 1.24), 11, 1.4, 5e-9);
        assert_relative_eq!(v11, 0.17, max_relative = 0.01);
        assert_relative_eq!(output_power(0.51, 0.18), 91.8e-3, max_relative = 1e-12);
        assert_relative_eq!(output_power(0.17, 1.24), 210.8e-3, max_relative = 1e-12);
        assert_eq!(output_power(0.51, 0.0), 0.0);
        assert_relative_eq!(flux_density_from_emf(v, K_SINE, 0.5e6, 33, 5e-9), 1.4, max_relative = 1e-14);
    }

    #[test]
    fn loss_models() {
        let m = cofecu();
        let p = eddy_loss(&m, &proto_core(1, 10e-6), 0.5e6, 1.4);
        assert_relative_eq!(p, 24.6e-3, max_relative = 0.005);
        let p1 = eddy_loss(&m, &proto_core(10, 1e-6), 0.5e6, 1.4);
        assert!((p1 - 0.22e-3).abs() / 0.22e-3 < 0.15);
        let h = hysteresis_loss(&m, &proto_core(1, 10e-6), 0.5e6, 1.4);
        assert_relative_eq!(h, 0.11e-3, max_relative = 0.01);
        assert_relative_eq!(
            hysteresis_loss(&m, &proto_core(1, 10e-6), 1e6, 1.4),
            2.0 * h,
            max_relative = 1e-14
        );
        let mut ideal = m.clone();
        ideal.h_c = 0.0;
        assert_eq!(hysteresis_loss(&ideal, &proto_core(1, 10e-6), 0.5e6, 1.4), 0.0);
        assert!(lamination_warning(&m, &proto_core(1, 10e-6), 0.5e6).is_none());
        assert!(lamination_warning(&m, &proto_core(1, 30e-6), 0.5e6).is_some());
    }

    #[test]
    fn winding_resistance() {
        let w = proto_winding(33);
        let r_dc = dc_resistance(&w);
        assert_relative_eq!(r_dc, 0.050, max_relative = 0.01);
        let mut long = w.clone();
        long.mtl *= 2.0;
        assert_relative_eq!(dc_resistance(&long), 2.0 * r_dc, max_relative = 1e-14);
        assert_relative_eq!(ac_winding_resistance(&w, 1e-3), r_dc, max_relative = 1e-12);
        let fr = ac_winding_resistance(&w, 1e6) / r_dc;
        assert!(fr > 1.0 && fr < 1.3, "{fr}");
        assert_relative_eq!(copper_loss(0.18, 0.05), 1.62e-3, max_relative = 1e-12);
        assert_relative_eq!(copper_loss(0.36, 0.05), 4.0 * 1.62e-3, max_relative = 1e-12);
    }

    #[test]
    fn skin_factor_matches_closed_form() {
        // Re[x coth x] with x = (1+j)a equals a (sinh 2a + sin 2a)/(cosh 2a − cos 2a).
        for d in [0.05, 0.3, 1.0, 1.36, 2.0, 4.0, 10.0] {
            let a: f64 = d / 2.0;
            let closed = a * ((2.0 * a).sinh() + (2.0 * a).sin()) / ((2.0 * a).cosh() - (2.0 * a).cos());
            assert_relative_eq!(skin_resistance_factor(d), closed, max_relative = 1e-9);
        }
    }

    #[test]
    fn core_resistance_tracks_classical_eddy_formula() {
        let (c, w, m) = (proto_core(1, 10e-6), proto_winding(33), cofecu());
        assert_eq!(core_loss_resistance(&c, &w, &m, 0.0), 0.0);
        let f = 0.25e6;
        let i_rms = 1.4 * c.l_c / (MU_0 * m.mu_r * w.n_turns as f64 * 2f64.sqrt());
        let implied = copper_loss(i_rms, core_loss_resistance(&c, &w, &m, f));
        let classical = eddy_loss(&m, &c, f, 1.4);
        assert!((implied / classical - 1.0).abs() < 0.02);
    }

    #[test]
    fn efficiency_and_q() {
        let l = LossBreakdown {
            p_eddy: 24.6,
            p_hys: 0.11,
            p_cu: 1.62,
        };
        assert_relative_eq!(efficiency(91.8, &l).unwrap(), 0.777, max_relative = 0.001);
        assert!(efficiency(0.0, &LossBreakdown::default()).is_err());
        assert_relative_eq!(q_factor(1e-6, 1.0, 1e6).unwrap(), 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(
            q_factor(1e-6, 2.0, 1e6).unwrap(),
            q_factor(1e-6, 1.0, 1e6).unwrap() / 2.0,
            max_relative = 1e-14
        );
        assert!(q_factor(1e-6, 0.0, 1e6).is_err());
        assert_eq!(power_density(0.0, 3.72e-9), 0.0);
        assert_relative_eq!(power_density(91.8e-3, 3.72e-9) * 1e-6, 24.7, max_relative = 0.005);
    }

    #[test]
    fn dc_loss_worked_example() {
        assert_relative_eq!(copper_loss(100.0, 1e-3), 10.0, max_relative = 1e-14);
        let frac = conduction_loss_fraction(1e-3, 100.0, 0.75).unwrap();
        assert!((frac * 100.0 - 11.7647).abs() < 0.001);
    }

    #[test]
    fn prototype_performance() {
        let p = prototype().performance(&op(0.5e6, 0.18)).unwrap();
        assert_relative_eq!(p.p_out, 92.3e-3, max_relative = 0.002);
        assert!((p.efficiency - 0.777).abs() < 0.002, "{}", p.efficiency);
        assert!(p.warnings.is_empty());
        let p10 = prototype().performance(&op(10e6, 0.18)).unwrap();
        assert!(!p10.warnings.is_empty());
    }

    proptest! {
        #[test]
        fn emf_multilinear(alpha in 0.01f64..100.0, which in 0usize..5) {
            let base = op(0.5e6, 0.18);
            let (n, b, a) = (33u32, 1.4, 5e-9);
            let v0 = induced_voltage(&base, n, b, a);
            let (v, scale) = match which {
                0 => (induced_voltage(&OperatingPoint { k_wave: base.k_wave * alpha, ..base }, n, b, a), alpha),
                1 => (induced_voltage(&base.at(base.f * alpha), n, b, a), alpha),
                // turn count is an integer: scale by an integer factor
                2 => {
                    let k = (alpha.ceil() as u32).max(1);
                    (induced_voltage(&base, n * k, b, a), k as f64)
                }
                3 => (induced_voltage(&base, n, b * alpha, a), alpha),
                _ => (induced_voltage(&base, n, b, a * alpha), alpha),
            };
            prop_assert!((v - scale * v0).abs() <= 1e-12 * v.abs());
        }

        #[test]
        fn eddy_quarter_scaling(t in 0.5e-6f64..20e-6, n in 1u32..8) {
            let m = cofecu();
            let thick = proto_core(n, t);
            let thin = proto_core(2 * n, t / 2.0);
            let ratio = eddy_loss(&m, &thin, 0.5e6, 1.4) / eddy_loss(&m, &thick, 0.5e6, 1.4);
            prop_assert!((ratio - 0.25).abs() < 1e-13);
        }

        #[test]
        fn efficiency_rises_when_a_loss_falls(p_out in 1e-3f64..1.0, e in 0.0f64..0.1,
                                              h in 0.0f64..0.1, c in 1e-4f64..0.1,
                                              which in 0usize..3, cut in 0.01f64..0.99) {
            let l = LossBreakdown { p_eddy: e, p_hys: h, p_cu: c };
            let mut l2 = l;
            match which { 0 => l2.p_eddy *= cut, 1 => l2.p_hys *= cut, _ => l2.p_cu *= cut }
            let before = efficiency(p_out, &l).unwrap();
            let after = efficiency(p_out, &l2).unwrap();
            if l2.total() < l.total() {
                prop_assert!(after > before);
            }
        }

        #[test]
        fn skin_factor_monotone(a in 0.0f64..20.0, da in 1e-6f64..1.0) {
            prop_assert!(skin_resistance_factor(a + da) >= skin_resistance_factor(a) - 1e-12);
            prop_assert!(skin_resistance_factor(a) >= 1.0 - 1e-12);
        }
    }
}
