//! Synthesis of the matched pulse families and the scalar inputs composed
//! from them.
//!
//! For a Hurwitz system the writing family ν(t) = −e^{−A♯(t−t₁)}C⊤Θ(t₁−t)
//! is the unique family of input shapes that the network absorbs with zero
//! output, and the reading family ν̃(t) = e^{A⊤(t−t₂)}C⊤Θ(t−t₂) is the shape
//! on which a stored excitation leaves. Both families are orthonormal:
//! ∫ ν♯ν⊤ dt = I.
//!
//! Families are exposed two ways: a closed-form evaluator (matrix
//! exponential per point) and pre-sampled grids holding node and midpoint
//! values, so fixed-step integrators downstream never interpolate.

use crate::error::{Error, Result};
use crate::linalg;
use crate::linsys::{HURWITZ_TOL, PassiveLinearSystem};
use crate::table::Table;
use crate::{C64, CMatrix, CVector};

/// Norm level at which the infinite past/future of a pulse is truncated.
pub const TRUNCATION_TOL: f64 = 1e-8;
/// Admissible quadrature tail when integrating pulse products.
pub const TAIL_TOL: f64 = 1e-12;

/// Whether a family feeds the network (writing) or drains it (reading).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseDirection {
    Writing,
    Reading,
}

/// Default integrator/quadrature step for a system: 0.01 over the largest
/// drift eigenvalue magnitude, which also bounds 0.01/|max Re λ|.
pub fn default_step(sys: &PassiveLinearSystem) -> Result<f64> {
    let radius = linalg::spectral_radius(sys.drift())?;
    Ok(0.01 / radius.max(1e-6))
}

/// Horizon T such that ‖e^{AT}‖₂ ≤ `tol`, found by bisection, capped at
/// 80/|spectral abscissa|. The cap mirrors the pulse-support convention of
/// the worked single-mode runs.
pub fn truncation_horizon(sys: &PassiveLinearSystem, tol: f64) -> Result<f64> {
    let abscissa = sys.spectral_abscissa()?;
    if abscissa >= -HURWITZ_TOL {
        return Err(Error::NotHurwitz { abscissa });
    }
    let cap = 80.0 / abscissa.abs();
    let norm_at = |t: f64| -> Result<f64> {
        linalg::spectral_norm(&linalg::expm(&(sys.drift() * C64::new(t, 0.0))))
    };
    if norm_at(cap)? > tol {
        return Ok(cap);
    }
    let mut lo = 0.0;
    let mut hi = cap;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if norm_at(mid)? <= tol {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-9 * cap {
            break;
        }
    }
    let horizon = (1.1 * hi).min(cap);
    if norm_at(horizon)? > tol {
        return Ok(cap);
    }
    Ok(horizon)
}

/// A vector-valued pulse family generated by the system matrices and a
/// switch time.
#[derive(Debug, Clone)]
pub struct PulseFamily {
    system: PassiveLinearSystem,
    switch_time: f64,
    direction: PulseDirection,
}

impl PulseFamily {
    /// Matched writing family for a Hurwitz system, supported on t ≤ t1.
    pub fn writing(system: &PassiveLinearSystem, t1: f64) -> Result<Self> {
        Self::build(system, t1, PulseDirection::Writing)
    }

    /// Matched reading family for a Hurwitz system, supported on t ≥ t2.
    pub fn reading(system: &PassiveLinearSystem, t2: f64) -> Result<Self> {
        Self::build(system, t2, PulseDirection::Reading)
    }

    fn build(
        system: &PassiveLinearSystem,
        switch_time: f64,
        direction: PulseDirection,
    ) -> Result<Self> {
        let abscissa = system.spectral_abscissa()?;
        if abscissa >= -HURWITZ_TOL {
            return Err(Error::NotHurwitz { abscissa });
        }
        Ok(Self {
            system: system.clone(),
            switch_time,
            direction,
        })
    }

    pub fn dim(&self) -> usize {
        self.system.dim()
    }

    pub fn switch_time(&self) -> f64 {
        self.switch_time
    }

    pub fn direction(&self) -> PulseDirection {
        self.direction
    }

    pub fn system(&self) -> &PassiveLinearSystem {
        &self.system
    }

    /// Generator exponent: −A♯ for writing, A⊤ for reading.
    fn generator(&self) -> CMatrix {
        match self.direction {
            PulseDirection::Writing => -self.system.drift().conjugate(),
            PulseDirection::Reading => self.system.drift().transpose(),
        }
    }

    /// Family value at the switch time: −C⊤ for writing, C⊤ for reading.
    fn switch_value(&self) -> CVector {
        match self.direction {
            PulseDirection::Writing => -self.system.coupling().clone(),
            PulseDirection::Reading => self.system.coupling().clone(),
        }
    }

    /// True when `t` lies inside the pulse support (switch time included).
    pub fn in_support(&self, t: f64) -> bool {
        match self.direction {
            PulseDirection::Writing => t <= self.switch_time,
            PulseDirection::Reading => t >= self.switch_time,
        }
    }

    /// Closed-form evaluation by matrix exponential; exact zero vector
    /// outside the support.
    pub fn eval(&self, t: f64) -> CVector {
        if !self.in_support(t) {
            return CVector::zeros(self.dim());
        }
        let arg = self.generator() * C64::new(t - self.switch_time, 0.0);
        linalg::expm(&arg) * self.switch_value()
    }

    /// Support window of length set by the truncation horizon: the interval
    /// outside which the family norm stays below [`TRUNCATION_TOL`].
    pub fn default_support(&self) -> Result<(f64, f64)> {
        let horizon = truncation_horizon(&self.system, TRUNCATION_TOL)?;
        Ok(match self.direction {
            PulseDirection::Writing => (self.switch_time - horizon, self.switch_time),
            PulseDirection::Reading => (self.switch_time, self.switch_time + horizon),
        })
    }

    /// [`Self::default_support`] stretched away from the switch time to a
    /// whole number of steps of `h`, so the switch lands exactly on a grid
    /// node.
    pub fn aligned_support(&self, h: f64) -> Result<(f64, f64)> {
        if h <= 0.0 || !h.is_finite() {
            return Err(Error::DimensionMismatch(format!("invalid step {h}")));
        }
        let (a, b) = self.default_support()?;
        let steps = (((b - a) / h).ceil() as usize).max(1);
        let span = steps as f64 * h;
        Ok(match self.direction {
            PulseDirection::Writing => (b - span, b),
            PulseDirection::Reading => (a, a + span),
        })
    }

    /// Sample the family on the grid t_k = t_start + k·h, including the
    /// midpoints needed by RK4 stages.
    ///
    /// Points are propagated away from the switch time with the half-step
    /// one-period map, which is the decaying direction for a Hurwitz
    /// system, after one exact anchor evaluation.
    pub fn sample(&self, t_start: f64, t_end: f64, h: f64) -> Result<PulseTable> {
        let steps = grid_steps(t_start, t_end, h)?;
        let half = h / 2.0;
        let total = 2 * steps + 1;
        let n = self.dim();
        let mut values = vec![CVector::zeros(n); total];

        // indices inside the support
        let in_support: Vec<bool> = (0..total)
            .map(|k| self.in_support(t_start + k as f64 * half))
            .collect();
        match self.direction {
            PulseDirection::Writing => {
                // last in-support index, walk backward from it
                if let Some(anchor) = in_support.iter().rposition(|&b| b) {
                    let t_anchor = t_start + anchor as f64 * half;
                    values[anchor] = self.eval(t_anchor);
                    let step_back = linalg::expm(&(self.generator() * C64::new(-half, 0.0)));
                    for k in (0..anchor).rev() {
                        values[k] = &step_back * &values[k + 1];
                    }
                }
            }
            PulseDirection::Reading => {
                if let Some(anchor) = in_support.iter().position(|&b| b) {
                    let t_anchor = t_start + anchor as f64 * half;
                    values[anchor] = self.eval(t_anchor);
                    let step_fwd = linalg::expm(&(self.generator() * C64::new(half, 0.0)));
                    for k in anchor + 1..total {
                        values[k] = &step_fwd * &values[k - 1];
                    }
                }
            }
        }
        Ok(PulseTable {
            t_start,
            h,
            values,
        })
    }

    /// Gramian ∫ ν♯(t)ν⊤(t) dt over the quadrature window by composite
    /// Simpson; the matched families return the identity.
    pub fn gramian(&self, quad: &QuadratureSpec) -> Result<CMatrix> {
        let h = match quad.step {
            Some(h) => h,
            None => default_step(&self.system)?,
        };
        let (t_start, t_end) = match quad.window {
            Some(w) => w,
            None => self.aligned_support(h)?,
        };

        // tail estimate from the family value at the window edge away from
        // the switch, decaying at twice the spectral abscissa
        let abscissa = self.system.spectral_abscissa()?;
        let far_edge = match self.direction {
            PulseDirection::Writing => t_start,
            PulseDirection::Reading => t_end,
        };
        let edge_norm_sq: f64 = self.eval(far_edge).iter().map(|z| z.norm_sqr()).sum();
        let tail = edge_norm_sq / (2.0 * abscissa.abs());
        if tail > quad.tail_tol {
            return Err(Error::WindowTooSmall {
                tail,
                tol: quad.tail_tol,
            });
        }

        let table = self.sample(t_start, t_end, h)?;
        let n = self.dim();
        let half = h / 2.0;
        let mut gram = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let products: Vec<C64> = table
                    .values
                    .iter()
                    .map(|v| v[i].conj() * v[j])
                    .collect();
                gram[(i, j)] = linalg::simpson(&products, half);
            }
        }
        Ok(gram)
    }

    /// CSV-ready table of the sampled family: t, Re ν_k, Im ν_k per mode.
    pub fn to_table(&self, t_start: f64, t_end: f64, h: f64) -> Result<Table> {
        let sampled = self.sample(t_start, t_end, h)?;
        let n = self.dim();
        let mut headers = vec!["t".to_string()];
        for k in 1..=n {
            headers.push(format!("re_nu_{k}"));
            headers.push(format!("im_nu_{k}"));
        }
        let mut table = Table::new(headers);
        for idx in 0..sampled.node_count() {
            let v = sampled.node(idx);
            let mut row = vec![sampled.node_time(idx)];
            for k in 0..n {
                row.push(v[k].re);
                row.push(v[k].im);
            }
            table.push_row(row);
        }
        Ok(table)
    }
}

/// Uniformly sampled family values at step h together with midpoints.
#[derive(Debug, Clone)]
pub struct PulseTable {
    t_start: f64,
    h: f64,
    /// values[k] is the family at t_start + k·(h/2)
    values: Vec<CVector>,
}

impl PulseTable {
    pub fn node_count(&self) -> usize {
        self.values.len() / 2 + 1
    }

    pub fn node_time(&self, idx: usize) -> f64 {
        self.t_start + idx as f64 * self.h
    }

    /// Family value at grid node `idx`.
    pub fn node(&self, idx: usize) -> &CVector {
        &self.values[2 * idx]
    }

    /// Family value at the midpoint between nodes `idx` and `idx + 1`.
    pub fn midpoint(&self, idx: usize) -> &CVector {
        &self.values[2 * idx + 1]
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    /// Contract the family with a coefficient vector: Σ_k coeffs_k ν_k.
    pub fn contract(&self, coeffs: &CVector) -> ScalarTable {
        let dot = |v: &CVector| -> C64 { coeffs.iter().zip(v.iter()).map(|(s, nu)| s * nu).sum() };
        let nodes: Vec<C64> = (0..self.node_count()).map(|k| dot(self.node(k))).collect();
        let mids: Vec<C64> = (0..self.node_count() - 1)
            .map(|k| dot(self.midpoint(k)))
            .collect();
        ScalarTable {
            t_start: self.t_start,
            h: self.h,
            nodes,
            mids,
        }
    }
}

/// Scalar signal sampled on an RK4-ready grid (nodes plus midpoints).
#[derive(Debug, Clone)]
pub struct ScalarTable {
    t_start: f64,
    h: f64,
    nodes: Vec<C64>,
    mids: Vec<C64>,
}

impl ScalarTable {
    /// Sample a closure on the grid.
    pub fn from_fn<F: Fn(f64) -> C64>(t_start: f64, t_end: f64, h: f64, f: F) -> Result<Self> {
        let steps = grid_steps(t_start, t_end, h)?;
        let nodes = (0..=steps).map(|k| f(t_start + k as f64 * h)).collect();
        let mids = (0..steps)
            .map(|k| f(t_start + (k as f64 + 0.5) * h))
            .collect();
        Ok(Self {
            t_start,
            h,
            nodes,
            mids,
        })
    }

    /// Identically zero signal on the grid.
    pub fn zeros(t_start: f64, t_end: f64, h: f64) -> Result<Self> {
        Self::from_fn(t_start, t_end, h, |_| C64::new(0.0, 0.0))
    }

    pub fn steps(&self) -> usize {
        self.mids.len()
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn node_time(&self, idx: usize) -> f64 {
        self.t_start + idx as f64 * self.h
    }

    pub fn node(&self, idx: usize) -> C64 {
        self.nodes[idx]
    }

    pub fn midpoint(&self, idx: usize) -> C64 {
        self.mids[idx]
    }

    /// Peak |value| over the nodes.
    pub fn peak(&self) -> f64 {
        self.nodes.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// ∫|ξ|² over the grid by composite Simpson on the half-step samples.
    pub fn energy(&self) -> f64 {
        let mut sq = Vec::with_capacity(self.nodes.len() + self.mids.len());
        for k in 0..self.nodes.len() {
            sq.push(self.nodes[k].norm_sqr());
            if k < self.mids.len() {
                sq.push(self.mids[k].norm_sqr());
            }
        }
        crate::linalg::simpson_real(&sq, self.h / 2.0)
    }

    /// Pointwise linear combination a·self + b·other on a shared grid.
    pub fn linear_combination(&self, a: C64, other: &ScalarTable, b: C64) -> ScalarTable {
        assert_eq!(self.nodes.len(), other.nodes.len(), "grid mismatch");
        ScalarTable {
            t_start: self.t_start,
            h: self.h,
            nodes: self
                .nodes
                .iter()
                .zip(&other.nodes)
                .map(|(x, y)| a * x + b * y)
                .collect(),
            mids: self
                .mids
                .iter()
                .zip(&other.mids)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }
}

/// Number of whole steps covering [t_start, t_end] with step h; the window
/// must be an integer number of steps.
pub(crate) fn grid_steps(t_start: f64, t_end: f64, h: f64) -> Result<usize> {
    if h <= 0.0 || !h.is_finite() {
        return Err(Error::DimensionMismatch(format!("invalid step {h}")));
    }
    if t_end <= t_start {
        return Err(Error::DimensionMismatch(format!(
            "empty window [{t_start}, {t_end}]"
        )));
    }
    let raw = (t_end - t_start) / h;
    let steps = raw.round() as usize;
    if steps == 0 || (raw - steps as f64).abs() > 1e-6 * raw.max(1.0) {
        return Err(Error::DimensionMismatch(format!(
            "window [{t_start}, {t_end}] is not an integer number of steps of {h}"
        )));
    }
    Ok(steps)
}

/// Quadrature window and step; `None` fields fall back to the per-system
/// defaults.
#[derive(Debug, Clone, Default)]
pub struct QuadratureSpec {
    pub window: Option<(f64, f64)>,
    pub step: Option<f64>,
    pub tail_tol: f64,
}

impl QuadratureSpec {
    pub fn auto() -> Self {
        Self {
            window: None,
            step: None,
            tail_tol: TAIL_TOL,
        }
    }

    pub fn with_window(t_start: f64, t_end: f64) -> Self {
        Self {
            window: Some((t_start, t_end)),
            step: None,
            tail_tol: TAIL_TOL,
        }
    }
}

/// Kind of field state carried by an input signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    SinglePhoton,
    Coherent,
}

/// A scalar input pulse ξ(t) = Σ_k s_k ν_k(t) (single photon) or
/// f(t) = Σ_k α_k ν_k(t) (coherent), composed from a pulse family.
#[derive(Debug, Clone)]
pub struct InputSignal {
    kind: InputKind,
    coefficients: CVector,
    family: PulseFamily,
}

impl InputSignal {
    /// Single-photon input; coefficients must be unit norm.
    pub fn single_photon(family: &PulseFamily, coefficients: CVector) -> Result<Self> {
        if coefficients.len() != family.dim() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coefficients, got {}",
                family.dim(),
                coefficients.len()
            )));
        }
        let norm_sq: f64 = coefficients.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > 1e-10 {
            return Err(Error::NormViolation { norm_sq });
        }
        Ok(Self {
            kind: InputKind::SinglePhoton,
            coefficients,
            family: family.clone(),
        })
    }

    /// Coherent input; amplitudes are unconstrained.
    pub fn coherent(family: &PulseFamily, coefficients: CVector) -> Result<Self> {
        if coefficients.len() != family.dim() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coefficients, got {}",
                family.dim(),
                coefficients.len()
            )));
        }
        Ok(Self {
            kind: InputKind::Coherent,
            coefficients,
            family: family.clone(),
        })
    }

    pub fn kind(&self) -> InputKind {
        self.kind
    }

    pub fn coefficients(&self) -> &CVector {
        &self.coefficients
    }

    pub fn family(&self) -> &PulseFamily {
        &self.family
    }

    /// Total pulse energy ∫|ξ|²dt implied by orthonormality: ‖coefficients‖².
    pub fn energy(&self) -> f64 {
        self.coefficients.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Closed-form scalar value at `t`.
    pub fn eval(&self, t: f64) -> C64 {
        let v = self.family.eval(t);
        self.coefficients
            .iter()
            .zip(v.iter())
            .map(|(s, nu)| s * nu)
            .sum()
    }

    /// Sample onto an integrator grid.
    pub fn sample(&self, t_start: f64, t_end: f64, h: f64) -> Result<ScalarTable> {
        Ok(self
            .family
            .sample(t_start, t_end, h)?
            .contract(&self.coefficients))
    }

    /// Default window covering the pulse support for this input's family,
    /// aligned to a whole number of steps of `h`.
    pub fn default_window(&self, h: f64) -> Result<(f64, f64)> {
        self.family.aligned_support(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn single_mode(kappa: f64) -> PassiveLinearSystem {
        presets::single_mode(kappa).unwrap()
    }

    fn network() -> PassiveLinearSystem {
        presets::atomic_network_primed(&presets::AtomicNetworkParams {
            kappa: 2.0,
            g: 1.0,
            delta: 1.0,
        })
        .unwrap()
    }

    #[test]
    fn writing_requires_hurwitz() {
        let stored = presets::atomic_network(&presets::AtomicNetworkParams {
            kappa: 2.0,
            g: 1.0,
            delta: 0.0,
        })
        .unwrap();
        assert!(matches!(
            PulseFamily::writing(&stored, 0.0),
            Err(Error::NotHurwitz { .. })
        ));
    }

    #[test]
    fn single_mode_writing_pulse_is_rising_exponential() {
        let family = PulseFamily::writing(&single_mode(2.0), 0.0).unwrap();
        for t in [-3.0, -1.0, -0.2, 0.0] {
            let v = family.eval(t);
            let expected = -2f64.sqrt() * (t).exp(); // -sqrt(k) e^{k t/2}, k = 2
            assert!((v[0] - c(expected, 0.0)).norm() < 1e-12, "t={t}");
        }
        // exactly zero after the switch
        assert_eq!(family.eval(1.0)[0], c(0.0, 0.0));
    }

    #[test]
    fn single_mode_reading_pulse_is_decaying_exponential() {
        let family = PulseFamily::reading(&single_mode(2.0), 0.0).unwrap();
        for t in [0.0, 0.5, 2.0] {
            let v = family.eval(t);
            let expected = 2f64.sqrt() * (-t).exp();
            assert!((v[0] - c(expected, 0.0)).norm() < 1e-12, "t={t}");
        }
        assert_eq!(family.eval(-1.0)[0], c(0.0, 0.0));
    }

    #[test]
    fn network_pulse_vanishes_at_switch_in_memory_slots() {
        let family = PulseFamily::writing(&network(), 0.0).unwrap();
        let v = family.eval(0.0);
        assert!((v[0] + c(2f64.sqrt(), 0.0)).norm() < 1e-14);
        assert!(v[2].norm() < 1e-14);
        assert!(v[3].norm() < 1e-14);
    }

    #[test]
    fn sampled_grid_matches_closed_form() {
        let family = PulseFamily::writing(&network(), 0.0).unwrap();
        let table = family.sample(-10.0, 0.0, 0.01).unwrap();
        for idx in [0, 137, 500, 999, 1000] {
            let t = table.node_time(idx);
            let direct = family.eval(t);
            let sampled = table.node(idx);
            let err: f64 = (direct - sampled).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(err < 1e-10, "idx={idx} err={err:.2e}");
        }
    }

    #[test]
    fn time_shift_covariance() {
        let sys = network();
        let shifted = PulseFamily::writing(&sys, 2.5).unwrap();
        let base = PulseFamily::writing(&sys, 0.0).unwrap();
        for t in [-4.0, -1.0, 0.0, 2.0, 2.5] {
            let lhs = shifted.eval(t);
            let rhs = base.eval(t - 2.5);
            let err: f64 = (lhs - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(err < 1e-12, "t={t}");
        }
    }

    #[test]
    fn single_mode_gramian_is_one() {
        let family = PulseFamily::writing(&single_mode(2.0), 0.0).unwrap();
        let gram = family.gramian(&QuadratureSpec::auto()).unwrap();
        assert!((gram[(0, 0)] - c(1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn network_gramians_are_identity() {
        let sys = network();
        for family in [
            PulseFamily::writing(&sys, 0.0).unwrap(),
            PulseFamily::reading(&sys, 0.0).unwrap(),
        ] {
            let gram = family.gramian(&QuadratureSpec::auto()).unwrap();
            let residual = linalg::max_abs(&(gram - CMatrix::identity(4, 4)));
            assert!(residual < 1e-6, "residual={residual:.2e}");
        }
    }

    #[test]
    fn gramian_rejects_short_window() {
        let family = PulseFamily::writing(&single_mode(2.0), 0.0).unwrap();
        let quad = QuadratureSpec::with_window(-2.0, 0.0);
        assert!(matches!(
            family.gramian(&quad),
            Err(Error::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn truncation_horizon_brackets_norm() {
        let sys = network();
        let t = truncation_horizon(&sys, 1e-8).unwrap();
        let norm =
            linalg::spectral_norm(&linalg::expm(&(sys.drift() * c(t, 0.0)))).unwrap();
        assert!(norm <= 1e-8);
        // abscissa is about -0.11, so the horizon should be far below the cap
        assert!(t < 80.0 / 0.10);
    }

    #[test]
    fn basis_coefficient_selects_component() {
        let family = PulseFamily::writing(&single_mode(2.0), 0.0).unwrap();
        let e1 = CVector::from_vec(vec![c(1.0, 0.0)]);
        let input = InputSignal::single_photon(&family, e1).unwrap();
        assert!((input.eval(-1.0) - family.eval(-1.0)[0]).norm() < 1e-15);
    }

    #[test]
    fn single_photon_rejects_unnormalized_coefficients() {
        let family = PulseFamily::writing(&network(), 0.0).unwrap();
        let bad = CVector::from_vec(vec![c(1.0, 0.0); 4]);
        assert!(matches!(
            InputSignal::single_photon(&family, bad),
            Err(Error::NormViolation { .. })
        ));
        let wrong_len = CVector::from_vec(vec![c(1.0, 0.0)]);
        assert!(matches!(
            InputSignal::single_photon(&family, wrong_len),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn composed_network_input_has_unit_energy() {
        let family = PulseFamily::writing(&network(), 0.0).unwrap();
        let inv = 1.0 / 2f64.sqrt();
        let coeffs = CVector::from_vec(vec![c(0.0, 0.0), c(0.0, 0.0), c(inv, 0.0), c(inv, 0.0)]);
        let input = InputSignal::single_photon(&family, coeffs).unwrap();
        let h = default_step(family.system()).unwrap();
        let (t0, t1) = input.default_window(h).unwrap();
        let table = input.sample(t0, t1, h).unwrap();
        let energy = table.energy();
        assert!((energy - 1.0).abs() < 1e-8, "energy={energy}");
    }

    #[test]
    fn coherent_energy_is_coefficient_norm() {
        let sys = presets::atomic_network_primed(&presets::AtomicNetworkParams {
            kappa: 2.0,
            g: 1.0,
            delta: 1.0,
        })
        .unwrap();
        // two-mode statement checked on a 4-mode system: alpha = (0, 2i, 0, 0)
        let family = PulseFamily::writing(&sys, 0.0).unwrap();
        let coeffs = CVector::from_vec(vec![c(0.0, 0.0), c(0.0, 2.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let input = InputSignal::coherent(&family, coeffs).unwrap();
        assert_eq!(input.energy(), 4.0);
        let h = default_step(&sys).unwrap();
        let (t0, t1) = input.default_window(h).unwrap();
        let table = input.sample(t0, t1, h).unwrap();
        let energy = table.energy();
        assert!((energy - 4.0).abs() < 1e-8, "energy={energy}");
    }
}
