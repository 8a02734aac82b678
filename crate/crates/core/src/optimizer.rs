//! Exhaustive constrained search over discrete design variables.
//!
//! Candidates are indexed in mixed radix over (turns, laminations, lamination
//! thickness, winding thickness, winding width), the last varying fastest.
//! Evaluation is independent per index and may run in parallel; the best
//! design is chosen under a total order so the answer does not depend on the
//! order in which candidates were evaluated.

use std::cmp::Ordering;
use std::io::Write;
use std::ops::RangeInclusive;
use std::sync::Arc;

use crate::em_model::{Inductor, OperatingPoint, PerformancePoint};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::geometry::{winding_cross_section, CoreGeometry, VolumeRule, WindingGeometry};
use crate::materials::{MaterialRegistry, MaterialSpec};
use crate::synthesis::{validate_with, CandidateDesign, DesignConstraints};

pub const FRONTIER_CSV_HEADER: &str =
    "efficiency,power_density_w_per_cm3,n_turns,n_lam,t_lam_m,t_w_m,w_w_m,feasible";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObjectiveKind {
    MaxPowerDensity,
    MaxEfficiency,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Objective {
    pub kind: ObjectiveKind,
    pub l_target: f64,
    pub l_tolerance: f64,
}

impl Objective {
    pub fn validate(&self) -> Result<()> {
        if !(self.l_target.is_finite() && self.l_target > 0.0) {
            return Err(Error::config("l_target_h", format!("must be > 0, got {}", self.l_target)));
        }
        if !(self.l_tolerance > 0.0 && self.l_tolerance <= 0.5) {
            return Err(Error::config(
                "l_tolerance",
                format!("must lie in (0, 0.5], got {}", self.l_tolerance),
            ));
        }
        Ok(())
    }

    pub fn score(&self, p: &PerformancePoint) -> f64 {
        match self.kind {
            ObjectiveKind::MaxEfficiency => p.efficiency,
            ObjectiveKind::MaxPowerDensity => p.power_density,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CurrentRule {
    /// Drive each candidate at min(saturation, current-density limit).
    OperatingLimit { j_max: f64 },
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Spacing {
    Fixed(f64),
    /// Fraction of the turn width.
    Ratio(f64),
}

#[derive(Clone, Debug)]
pub struct SearchSpace {
    pub n_turns: RangeInclusive<u32>,
    pub n_lam: RangeInclusive<u32>,
    pub t_lam: Vec<f64>,
    pub t_w: Vec<f64>,
    pub w_w: Vec<f64>,

    pub material: Arc<MaterialSpec>,
    pub conductor: Arc<MaterialSpec>,
    pub f: f64,
    pub k_wave: f64,
    pub b_pk: f64,
    pub w_lam: f64,
    pub t_ins: f64,
    pub l_c: f64,
    pub mtl: f64,
    pub spacing: Spacing,
    pub volume: VolumeRule,
    pub current: CurrentRule,
}

fn range_len(r: &RangeInclusive<u32>) -> usize {
    if r.is_empty() {
        0
    } else {
        (*r.end() - *r.start()) as usize + 1
    }
}

impl SearchSpace {
    fn radices(&self) -> [usize; 5] {
        [
            range_len(&self.n_turns),
            range_len(&self.n_lam),
            self.t_lam.len(),
            self.t_w.len(),
            self.w_w.len(),
        ]
    }

    pub fn candidate_count(&self) -> usize {
        self.radices().iter().product()
    }

    pub fn validate(&self) -> Result<()> {
        let names = ["n_turns", "n_lam", "t_lam_m", "t_w_m", "w_w_m"];
        for (name, len) in names.iter().zip(self.radices()) {
            if len == 0 {
                return Err(Error::EmptySearchSpace(format!("axis `{name}` is empty")));
            }
        }
        if *self.n_turns.start() == 0 || *self.n_lam.start() == 0 {
            return Err(Error::config("n_turns/n_lam", "ranges must start at >= 1"));
        }
        for (name, grid) in [("t_lam_m", &self.t_lam), ("t_w_m", &self.t_w), ("w_w_m", &self.w_w)] {
            if let Some(v) = grid.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                return Err(Error::config(name, format!("grid values must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    fn axis_values(&self, index: usize) -> (u32, u32, f64, f64, f64) {
        let [_, r_lam, r_tl, r_tw, r_ww] = self.radices();
        let mut rest = index;
        let i_ww = rest % r_ww;
        rest /= r_ww;
        let i_tw = rest % r_tw;
        rest /= r_tw;
        let i_tl = rest % r_tl;
        rest /= r_tl;
        let i_lam = rest % r_lam;
        rest /= r_lam;
        let i_turns = rest;
        (
            self.n_turns.start() + i_turns as u32,
            self.n_lam.start() + i_lam as u32,
            self.t_lam[i_tl],
            self.t_w[i_tw],
            self.w_w[i_ww],
        )
    }

    /// The candidate at a lexicographic index in `0..candidate_count()`.
    pub fn candidate_at(&self, index: usize) -> Result<CandidateDesign> {
        let (n_turns, n_lam, t_lam, t_w, w_w) = self.axis_values(index);
        let s_w = match self.spacing {
            Spacing::Fixed(s) => s,
            Spacing::Ratio(r) => r * w_w,
        };
        let core = CoreGeometry::new(n_lam, t_lam, self.w_lam, self.t_ins, self.l_c)?;
        let winding = WindingGeometry::new(n_turns, t_w, w_w, s_w, self.mtl, self.conductor.clone())?;
        let i_drive = match self.current {
            CurrentRule::Fixed(i) => i,
            CurrentRule::OperatingLimit { j_max } => {
                crate::em_model::operating_current(&core, &winding, &self.material, j_max)?.current
            }
        };
        Ok(CandidateDesign {
            core,
            winding,
            material: self.material.name.clone(),
            op: OperatingPoint {
                f: self.f,
                i_drive,
                k_wave: self.k_wave,
                b_pk: self.b_pk,
            },
            l_target: None,
            feasibility: Vec::new(),
        })
    }
}

/// All candidates in lexicographic order.
pub fn enumerate_candidates(
    space: &SearchSpace,
) -> Result<impl Iterator<Item = Result<CandidateDesign>> + '_> {
    space.validate()?;
    Ok((0..space.candidate_count()).map(move |i| space.candidate_at(i)))
}

/// Feasibility and performance of one candidate. Feasible iff every
/// constraint holds and the sizing inductance `N A_c B / I` lies within the
/// objective's tolerance of its target.
pub fn evaluate_candidate(
    d: &CandidateDesign,
    obj: &Objective,
    constraints: &DesignConstraints,
    registry: &MaterialRegistry,
    volume: &VolumeRule,
) -> Result<(bool, PerformancePoint)> {
    let m = registry.get(&d.material)?;
    evaluate_with(d, &m, obj, constraints, volume)
}

fn evaluate_with(
    d: &CandidateDesign,
    m: &Arc<MaterialSpec>,
    obj: &Objective,
    constraints: &DesignConstraints,
    volume: &VolumeRule,
) -> Result<(bool, PerformancePoint)> {
    let c = DesignConstraints {
        l_tolerance: obj.l_tolerance,
        ..*constraints
    };
    let targeted = CandidateDesign {
        l_target: Some(obj.l_target),
        ..d.clone()
    };
    let feasible = validate_with(&targeted, m, &c).iter().all(|f| f.satisfied);
    let inductor = Inductor {
        core: d.core.clone(),
        winding: d.winding.clone(),
        material: m.clone(),
        volume: volume.clone(),
    };
    Ok((feasible, inductor.performance(&d.op)?))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrontierPoint {
    pub index: usize,
    pub efficiency: f64,
    /// W/m³
    pub power_density: f64,
    pub n_turns: u32,
    pub n_lam: u32,
    pub t_lam: f64,
    pub t_w: f64,
    pub w_w: f64,
    pub feasible: bool,
}

/// Ordering key for selecting the best design: higher score first, then
/// fewer turns, fewer laminations, smaller conductor section, lower index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankKey {
    pub score: f64,
    pub n_turns: u32,
    pub n_lam: u32,
    pub a_w: f64,
    pub index: usize,
}

impl RankKey {
    /// `Less` means `self` ranks ahead of `other`.
    pub fn rank_cmp(&self, other: &Self) -> Ordering {
        other
            .score
            .total_cmp(&self.score)
            .then(self.n_turns.cmp(&other.n_turns))
            .then(self.n_lam.cmp(&other.n_lam))
            .then(self.a_w.total_cmp(&other.a_w))
            .then(self.index.cmp(&other.index))
    }
}

/// Picks the top-ranked key; independent of input order.
pub fn reduce_best<I: IntoIterator<Item = RankKey>>(keys: I) -> Option<RankKey> {
    keys.into_iter().fold(None, |best, k| match best {
        Some(b) if b.rank_cmp(&k) != Ordering::Greater => Some(b),
        _ => Some(k),
    })
}

#[derive(Clone, Debug)]
pub struct BestDesign {
    pub design: CandidateDesign,
    pub performance: PerformancePoint,
    pub index: usize,
}

#[derive(Clone, Debug)]
pub struct OptimizationResult {
    pub best: Option<BestDesign>,
    /// Every evaluated candidate in enumeration order.
    pub points: Vec<FrontierPoint>,
    pub evaluated: usize,
    pub feasible: usize,
}

impl OptimizationResult {
    /// (efficiency, power density) of every feasible candidate.
    pub fn frontier(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points
            .iter()
            .filter(|p| p.feasible)
            .map(|p| (p.efficiency, p.power_density))
    }

    pub fn write_frontier_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "{FRONTIER_CSV_HEADER}")?;
        for p in &self.points {
            writeln!(
                out,
                "{:e},{:e},{},{},{:e},{:e},{:e},{}",
                p.efficiency,
                p.power_density * 1e-6,
                p.n_turns,
                p.n_lam,
                p.t_lam,
                p.t_w,
                p.w_w,
                p.feasible
            )?;
        }
        Ok(())
    }
}

pub fn optimize(
    space: &SearchSpace,
    obj: &Objective,
    constraints: &DesignConstraints,
    exec: Execution,
) -> Result<OptimizationResult> {
    space.validate()?;
    obj.validate()?;
    let n = space.candidate_count();
    let evaluated = exec::map_indexed(exec, n, |i| -> Result<(FrontierPoint, RankKey)> {
        let d = space.candidate_at(i)?;
        let (feasible, perf) = evaluate_with(&d, &space.material, obj, constraints, &space.volume)?;
        let point = FrontierPoint {
            index: i,
            efficiency: perf.efficiency,
            power_density: perf.power_density,
            n_turns: d.winding.n_turns,
            n_lam: d.core.n_lam,
            t_lam: d.core.t_lam,
            t_w: d.winding.t_w,
            w_w: d.winding.w_w,
            feasible,
        };
        let key = RankKey {
            score: obj.score(&perf),
            n_turns: d.winding.n_turns,
            n_lam: d.core.n_lam,
            a_w: winding_cross_section(&d.winding),
            index: i,
        };
        Ok((point, key))
    });

    let mut points = Vec::with_capacity(n);
    let mut keys = Vec::new();
    for r in evaluated {
        let (p, k) = r?;
        if p.feasible {
            keys.push(k);
        }
        points.push(p);
    }
    let feasible = keys.len();
    let best = match reduce_best(keys) {
        Some(k) => {
            let mut design = space.candidate_at(k.index)?;
            design.l_target = Some(obj.l_target);
            let c = DesignConstraints {
                l_tolerance: obj.l_tolerance,
                ..*constraints
            };
            design.feasibility = validate_with(&design, &space.material, &c);
            let (_, performance) = evaluate_with(&design, &space.material, obj, constraints, &space.volume)?;
            Some(BestDesign {
                design,
                performance,
                index: k.index,
            })
        }
        None => None,
    };
    Ok(OptimizationResult {
        best,
        points,
        evaluated: n,
        feasible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em_model::K_SINE;

    fn space(n_turns: RangeInclusive<u32>, n_lam: RangeInclusive<u32>, t_lam: Vec<f64>) -> SearchSpace {
        SearchSpace {
            n_turns,
            n_lam,
            t_lam,
            t_w: vec![90e-6],
            w_w: vec![200e-6],
            material: Arc::new(
                MaterialSpec::core("CoFeCu", 1.4, 274.1, 1.638e-7, 0.786, false).unwrap(),
            ),
            conductor: Arc::new(MaterialSpec::copper()),
            f: 0.5e6,
            k_wave: K_SINE,
            b_pk: 1.4,
            w_lam: 500e-6,
            t_ins: 5e-6,
            l_c: 10e-3,
            mtl: 1.59e-3,
            spacing: Spacing::Ratio(0.1),
            volume: VolumeRule::default(),
            current: CurrentRule::OperatingLimit { j_max: 10e6 },
        }
    }

    #[test]
    fn enumeration_order_and_cardinality() {
        let s = space(10..=11, 1..=2, vec![1e-6]);
        assert_eq!(s.candidate_count(), 4);
        let all: Vec<_> = enumerate_candidates(&s).unwrap().map(Result::unwrap).collect();
        let keys: Vec<_> = all.iter().map(|d| (d.winding.n_turns, d.core.n_lam)).collect();
        assert_eq!(keys, vec![(10, 1), (10, 2), (11, 1), (11, 2)]);
        let again: Vec<_> = enumerate_candidates(&s).unwrap().map(Result::unwrap).collect();
        assert_eq!(all, again);
    }

    #[test]
    fn singleton_and_empty_spaces() {
        let s = space(33..=33, 1..=1, vec![10e-6]);
        let all: Vec<_> = enumerate_candidates(&s).unwrap().collect();
        assert_eq!(all.len(), 1);
        let empty = space(33..=33, 1..=1, vec![]);
        assert!(matches!(enumerate_candidates(&empty), Err(Error::EmptySearchSpace(_))));
        #[allow(clippy::reversed_empty_ranges)]
        let rev = space(5..=4, 1..=1, vec![1e-6]);
        assert!(rev.validate().is_err());
    }

    #[test]
    fn rank_order() {
        let k = |score, n_turns, n_lam, a_w, index| RankKey { score, n_turns, n_lam, a_w, index };
        let keys = vec![k(0.9, 33, 10, 1.8e-8, 3), k(0.9, 11, 10, 1.8e-8, 4), k(0.8, 1, 1, 1e-9, 0)];
        assert_eq!(reduce_best(keys.clone()).unwrap().index, 4);
        let mut rev = keys;
        rev.reverse();
        assert_eq!(reduce_best(rev).unwrap().index, 4);
        assert!(reduce_best(Vec::new()).is_none());
    }

    #[test]
    fn infeasible_space_reports_counts() {
        let s = space(33..=33, 1..=1, vec![10e-6]);
        let obj = Objective {
            kind: ObjectiveKind::MaxEfficiency,
            l_target: 1e-3,
            l_tolerance: 0.05,
        };
        let r = optimize(&s, &obj, &DesignConstraints::default(), Execution::Sequential).unwrap();
        assert!(r.best.is_none());
        assert_eq!(r.evaluated, 1);
        assert_eq!(r.feasible, 0);
    }
}
