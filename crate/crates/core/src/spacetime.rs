//! Causal geometry of 1+1 Minkowski space (c = 1) and of a discrete qubit
//! chain with speed-one light cones.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// `||Δt| − |Δx||` at or below this is a null separation.
pub const NULL_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpacetimeError {
    #[error("boost velocity {0} is not in (-1, 1)")]
    Superluminal(f64),
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("diamond radius {0} must be positive")]
    BadRadius(f64),
    #[error("cannot compare a diamond with a lattice interval")]
    MixedKinds,
    #[error("regions belong to different lattice models")]
    ModelMismatch,
    #[error("lattice region out of bounds: {0}")]
    OutOfBounds(String),
    #[error("regions {first} and {second} are neither space-like nor time-like; no ordering prescription exists")]
    Unordered { first: usize, second: usize },
    #[error("lattice model is not periodic; translations leave the chain")]
    NotPeriodic,
}

pub type Result<T, E = SpacetimeError> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub x: f64,
}

impl Event {
    pub fn new(t: f64, x: f64) -> Self {
        Self { t, x }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x.is_finite()
    }

    /// Light-cone coordinates `(t + x, t − x)`.
    fn lightcone(&self) -> (f64, f64) {
        (self.t + self.x, self.t - self.x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CausalRelation {
    SpaceLike,
    /// The second argument lies in the time-like future of the first.
    TimeLikeFuture,
    TimeLikePast,
    Neither,
}

impl CausalRelation {
    pub fn reverse(self) -> Self {
        match self {
            Self::TimeLikeFuture => Self::TimeLikePast,
            Self::TimeLikePast => Self::TimeLikeFuture,
            other => other,
        }
    }

    pub fn is_timelike(self) -> bool {
        matches!(self, Self::TimeLikeFuture | Self::TimeLikePast)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PointClassification {
    pub relation: CausalRelation,
    /// Set for null separations, which are reported as `Neither`.
    pub lightlike: bool,
}

pub fn classify_points(p: &Event, q: &Event) -> PointClassification {
    let dt = q.t - p.t;
    let dx = (q.x - p.x).abs();
    if (dt.abs() - dx).abs() <= NULL_TOL {
        return PointClassification {
            relation: CausalRelation::Neither,
            lightlike: true,
        };
    }
    let relation = if dx > dt.abs() {
        CausalRelation::SpaceLike
    } else if dt > 0.0 {
        CausalRelation::TimeLikeFuture
    } else {
        CausalRelation::TimeLikePast
    };
    PointClassification {
        relation,
        lightlike: false,
    }
}

/// The causal diamond `|t − t₀| + |x − x₀| ≤ r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diamond {
    pub center: Event,
    pub radius: f64,
}

impl Diamond {
    pub fn new(center: Event, radius: f64) -> Result<Self> {
        if !center.is_finite() {
            return Err(SpacetimeError::NonFinite);
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(SpacetimeError::BadRadius(radius));
        }
        Ok(Self { center, radius })
    }

    pub fn contains(&self, e: &Event) -> bool {
        (e.t - self.center.t).abs() + (e.x - self.center.x).abs() <= self.radius
    }

    /// Corners in light-cone coordinates are `(u₀ ± r, w₀ ± r)`; this maps
    /// a point of the unit square `[0,1]²` onto the diamond.
    pub fn point_at(&self, a: f64, b: f64) -> Event {
        let (u0, w0) = self.center.lightcone();
        let u = u0 - self.radius + 2.0 * self.radius * a;
        let w = w0 - self.radius + 2.0 * self.radius * b;
        Event::new((u + w) / 2.0, (u - w) / 2.0)
    }
}

/// Closed form: in light-cone coordinates a diamond is the square
/// `|u − u₀| ≤ r, |w − w₀| ≤ r`, and a point pair is time-like future iff
/// both `Δu` and `Δw` are positive, space-like iff they have opposite signs.
pub fn classify_diamonds(a: &Diamond, b: &Diamond) -> CausalRelation {
    let (ua, wa) = a.center.lightcone();
    let (ub, wb) = b.center.lightcone();
    let (du, dw) = (ub - ua, wb - wa);
    let reach = a.radius + b.radius;
    let pos = |d: f64| d - reach > NULL_TOL;
    let neg = |d: f64| d + reach < -NULL_TOL;
    if pos(du) && pos(dw) {
        CausalRelation::TimeLikeFuture
    } else if neg(du) && neg(dw) {
        CausalRelation::TimeLikePast
    } else if (pos(du) && neg(dw)) || (neg(du) && pos(dw)) {
        CausalRelation::SpaceLike
    } else {
        CausalRelation::Neither
    }
}

/// Finite qubit chain with `n_sites` sites observed at time steps
/// `0..n_steps`; signals travel at most one site per step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LatticeModel {
    pub n_sites: usize,
    pub n_steps: usize,
    pub periodic: bool,
}

impl LatticeModel {
    pub fn new(n_sites: usize, n_steps: usize, periodic: bool) -> Result<Self> {
        if n_sites == 0 || n_steps == 0 {
            return Err(SpacetimeError::OutOfBounds(
                "lattice needs at least one site and one step".into(),
            ));
        }
        Ok(Self {
            n_sites,
            n_steps,
            periodic,
        })
    }

    pub fn speed(&self) -> usize {
        1
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    /// Spatial distance between two sites, around the ring when periodic.
    pub fn site_distance(&self, a: usize, b: usize) -> usize {
        let d = a.abs_diff(b);
        if self.periodic {
            d.min(self.n_sites - d)
        } else {
            d
        }
    }

    /// Every interval region of the model. Periodic chains include intervals
    /// that wrap around the end.
    pub fn all_regions(&self) -> Vec<LatticeRegion> {
        let mut out = Vec::new();
        for time_step in 0..self.n_steps {
            for len in 1..=self.n_sites {
                let starts = if len == self.n_sites {
                    1
                } else if self.periodic {
                    self.n_sites
                } else {
                    self.n_sites - len + 1
                };
                for start in 0..starts {
                    out.push(LatticeRegion {
                        model: *self,
                        time_step,
                        start,
                        len,
                    });
                }
            }
        }
        out
    }
}

/// Sites `start, start+1, …` (`len` of them, modulo `n_sites` when periodic)
/// at one time step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticeRegion {
    model: LatticeModel,
    time_step: usize,
    start: usize,
    len: usize,
}

impl LatticeRegion {
    /// The inclusive site range `[first, last]`; on a periodic chain
    /// `last < first` denotes a wrapping interval.
    pub fn new(model: LatticeModel, time_step: usize, first: usize, last: usize) -> Result<Self> {
        if time_step >= model.n_steps {
            return Err(SpacetimeError::OutOfBounds(format!(
                "time step {time_step} (model has {})",
                model.n_steps
            )));
        }
        if first >= model.n_sites || last >= model.n_sites {
            return Err(SpacetimeError::OutOfBounds(format!(
                "sites [{first}, {last}] (model has {})",
                model.n_sites
            )));
        }
        let len = if first <= last {
            last - first + 1
        } else if model.periodic {
            model.n_sites - first + last + 1
        } else {
            return Err(SpacetimeError::OutOfBounds(format!(
                "sites [{first}, {last}] reversed on an open chain"
            )));
        };
        Ok(Self::from_parts(model, time_step, first, len))
    }

    fn from_parts(model: LatticeModel, time_step: usize, start: usize, len: usize) -> Self {
        let start = if len == model.n_sites { 0 } else { start };
        Self {
            model,
            time_step,
            start,
            len,
        }
    }

    pub fn model(&self) -> &LatticeModel {
        &self.model
    }

    pub fn time_step(&self) -> usize {
        self.time_step
    }

    pub fn first(&self) -> usize {
        self.start
    }

    pub fn last(&self) -> usize {
        (self.start + self.len - 1) % self.model.n_sites
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Sites in interval order.
    pub fn sites(&self) -> Vec<usize> {
        (0..self.len)
            .map(|k| (self.start + k) % self.model.n_sites)
            .collect()
    }

    pub fn contains_site(&self, site: usize) -> bool {
        self.sites().contains(&site)
    }

    /// Same time step and a site set containing this one's.
    pub fn is_within(&self, other: &LatticeRegion) -> bool {
        self.model == other.model
            && self.time_step == other.time_step
            && self.sites().iter().all(|&s| other.contains_site(s))
    }

    /// Shift by `dsites` around the ring and by `dsteps` in time; `None` if
    /// the shifted time step leaves the model.
    pub fn translated(&self, dsites: usize, dsteps: isize) -> Result<Option<Self>> {
        if !self.model.periodic && !dsites.is_multiple_of(self.model.n_sites) {
            return Err(SpacetimeError::NotPeriodic);
        }
        let tau = self.time_step as isize + dsteps;
        if tau < 0 || tau as usize >= self.model.n_steps {
            return Ok(None);
        }
        let start = (self.start + dsites) % self.model.n_sites;
        Ok(Some(Self::from_parts(self.model, tau as usize, start, self.len)))
    }
}

impl Serialize for LatticeRegion {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire {
            time_step: usize,
            sites: [usize; 2],
        }
        Wire {
            time_step: self.time_step,
            sites: [self.first(), self.last()],
        }
        .serialize(s)
    }
}

/// Lattice analogue of the point rule: a site pair is space-like iff its
/// distance exceeds the step difference, time-like iff it is smaller.
pub fn classify_lattice(a: &LatticeRegion, b: &LatticeRegion) -> Result<CausalRelation> {
    if a.model != b.model {
        return Err(SpacetimeError::ModelMismatch);
    }
    let dtau = b.time_step as isize - a.time_step as isize;
    let steps = dtau.unsigned_abs();
    let (mut all_space, mut all_time) = (true, true);
    for sa in a.sites() {
        for sb in b.sites() {
            let d = a.model.site_distance(sa, sb);
            all_space &= d > steps;
            all_time &= d < steps;
        }
    }
    Ok(if all_space {
        CausalRelation::SpaceLike
    } else if all_time && dtau > 0 {
        CausalRelation::TimeLikeFuture
    } else if all_time && dtau < 0 {
        CausalRelation::TimeLikePast
    } else {
        CausalRelation::Neither
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Diamond(Diamond),
    LatticeInterval(LatticeRegion),
}

impl From<Diamond> for Region {
    fn from(d: Diamond) -> Self {
        Region::Diamond(d)
    }
}

impl From<LatticeRegion> for Region {
    fn from(r: LatticeRegion) -> Self {
        Region::LatticeInterval(r)
    }
}

impl Region {
    pub fn as_lattice(&self) -> Option<&LatticeRegion> {
        match self {
            Region::LatticeInterval(r) => Some(r),
            Region::Diamond(_) => None,
        }
    }
}

/// Relation of `b` to `a`: `TimeLikeFuture` means `b` is in the future of `a`.
pub fn classify_regions(a: &Region, b: &Region) -> Result<CausalRelation> {
    match (a, b) {
        (Region::Diamond(a), Region::Diamond(b)) => Ok(classify_diamonds(a, b)),
        (Region::LatticeInterval(a), Region::LatticeInterval(b)) => classify_lattice(a, b),
        _ => Err(SpacetimeError::MixedKinds),
    }
}

/// Orders regions past first. Time-like pairs are ordered causally; among
/// unconstrained regions the smallest input index goes first.
pub fn causal_sort(regions: &[Region]) -> Result<Vec<usize>> {
    let n = regions.len();
    let mut successors = vec![Vec::new(); n];
    let mut pending = vec![0usize; n];
    for i in 0..n {
        for j in i + 1..n {
            match classify_regions(&regions[i], &regions[j])? {
                CausalRelation::SpaceLike => {}
                CausalRelation::TimeLikeFuture => {
                    successors[i].push(j);
                    pending[j] += 1;
                }
                CausalRelation::TimeLikePast => {
                    successors[j].push(i);
                    pending[i] += 1;
                }
                CausalRelation::Neither => {
                    return Err(SpacetimeError::Unordered {
                        first: i,
                        second: j,
                    })
                }
            }
        }
    }
    let mut ready: std::collections::BTreeSet<usize> =
        (0..n).filter(|&k| pending[k] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(k) = ready.pop_first() {
        order.push(k);
        for &s in &successors[k] {
            pending[s] -= 1;
            if pending[s] == 0 {
                ready.insert(s);
            }
        }
    }
    // time-like relations between points are acyclic, so every region is placed
    debug_assert_eq!(order.len(), n);
    Ok(order)
}

pub fn lorentz_gamma(v: f64) -> Result<f64> {
    if v.is_nan() || v.abs() >= 1.0 {
        return Err(SpacetimeError::Superluminal(v));
    }
    Ok(1.0 / (1.0 - v * v).sqrt())
}

/// Coordinates of `e` in a frame moving with velocity `v`.
pub fn boost_event(e: &Event, v: f64) -> Result<Event> {
    let g = lorentz_gamma(v)?;
    Ok(Event::new(g * (e.t - v * e.x), g * (e.x - v * e.t)))
}

/// A boost followed by a translation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoincareElement {
    pub v: f64,
    pub dt: f64,
    pub dx: f64,
}

impl PoincareElement {
    pub fn new(v: f64, dt: f64, dx: f64) -> Result<Self> {
        lorentz_gamma(v)?;
        if !(dt.is_finite() && dx.is_finite()) {
            return Err(SpacetimeError::NonFinite);
        }
        Ok(Self { v, dt, dx })
    }

    pub fn apply(&self, e: &Event) -> Result<Event> {
        let b = boost_event(e, self.v)?;
        Ok(Event::new(b.t + self.dt, b.x + self.dx))
    }
}

/// Generators in the affine representation on `(t, x, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoincareReport {
    pub h: [[i64; 3]; 3],
    pub p: [[i64; 3]; 3],
    pub k: [[i64; 3]; 3],
    /// Frobenius norm of `[K,P] − H`.
    pub residual_kp: f64,
    /// Frobenius norm of `[K,H] − P`.
    pub residual_kh: f64,
    /// Frobenius norm of `[H,P]`.
    pub residual_hp: f64,
}

impl PoincareReport {
    pub fn exact(&self) -> bool {
        self.residual_kp == 0.0 && self.residual_kh == 0.0 && self.residual_hp == 0.0
    }
}

pub fn poincare_commutator_check() -> PoincareReport {
    let unit = |r: usize, c: usize| {
        let mut m = Matrix3::<i64>::zeros();
        m[(r, c)] = 1;
        m
    };
    let h = unit(0, 2);
    let p = unit(1, 2);
    let k = unit(0, 1) + unit(1, 0);
    let comm = |a: &Matrix3<i64>, b: &Matrix3<i64>| a * b - b * a;
    let norm = |m: Matrix3<i64>| (m.iter().map(|x| x * x).sum::<i64>() as f64).sqrt();
    let rows = |m: &Matrix3<i64>| {
        let mut out = [[0; 3]; 3];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, x) in row.iter_mut().enumerate() {
                *x = m[(r, c)];
            }
        }
        out
    };
    PoincareReport {
        residual_kp: norm(comm(&k, &p) - h),
        residual_kh: norm(comm(&k, &h) - p),
        residual_hp: norm(comm(&h, &p)),
        h: rows(&h),
        p: rows(&p),
        k: rows(&k),
    }
}
