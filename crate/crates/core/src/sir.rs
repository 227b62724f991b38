//! SIR dynamics and the closed-form quantities derived from them.
//!
//! The model is the classical susceptible-infectious-removed system
//!
//! ```text
//! ds/dt = -gamma * i * s
//! di/dt =  gamma * i * s - alpha * i
//! dr/dt =  alpha * i
//! ```
//!
//! with transmission rate `gamma`, removal rate `alpha`, and contact ratio
//! `q = gamma / alpha`. The total mass `s + i + r` is conserved. Derived
//! quantities: the epidemic threshold `gamma * s0 / alpha`, the conserved
//! first integral `i + s - ln(s) / q`, the peak prevalence reached when
//! `s = 1/q`, and the final size obtained by solving the first-integral
//! relation for the susceptible mass left when infections vanish.
//!
//! Integration is classical fixed-step fourth-order Runge-Kutta: fully
//! deterministic, with clean step-halving convergence for testing.

use serde::Serialize;

/// Transmission and removal rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SirParams {
    pub gamma: f64,
    pub alpha: f64,
}

impl SirParams {
    pub fn new(gamma: f64, alpha: f64) -> Result<Self, SirError> {
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(SirError::InvalidParams(format!(
                "gamma must be finite and non-negative, got {gamma}"
            )));
        }
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(SirError::InvalidParams(format!(
                "alpha must be finite and positive, got {alpha}"
            )));
        }
        Ok(SirParams { gamma, alpha })
    }

    /// `q = gamma / alpha`.
    pub fn contact_ratio(&self) -> f64 {
        contact_ratio(self)
    }

    /// Rebuilds parameters for a target contact ratio, keeping `alpha`.
    pub fn with_contact_ratio(q: f64, alpha: f64) -> Result<Self, SirError> {
        SirParams::new(q * alpha, alpha)
    }
}

/// Compartment masses at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SirState {
    pub s: f64,
    pub i: f64,
    pub r: f64,
    pub t: f64,
}

impl SirState {
    pub fn new(s: f64, i: f64, r: f64, t: f64) -> Result<Self, SirError> {
        for (name, v) in [("s", s), ("i", i), ("r", r)] {
            if !v.is_finite() || v < 0.0 {
                return Err(SirError::InvalidState(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(SirState { s, i, r, t })
    }

    /// Start of an outbreak: susceptible and infectious masses, no removed,
    /// time zero.
    pub fn initial(s0: f64, i0: f64) -> Result<Self, SirError> {
        SirState::new(s0, i0, 0.0, 0.0)
    }

    pub fn total(&self) -> f64 {
        self.s + self.i + self.r
    }
}

/// The sample where the infectious mass peaked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub i: f64,
    pub s: f64,
    pub t: f64,
    pub index: usize,
}

/// A fixed-step integration result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub params: SirParams,
    pub dt: f64,
    pub samples: Vec<SirState>,
    pub peak: Peak,
}

impl Trajectory {
    pub fn initial(&self) -> &SirState {
        &self.samples[0]
    }

    pub fn last(&self) -> &SirState {
        self.samples.last().expect("trajectory has samples")
    }

    /// Largest relative drift of `s + i + r` from its initial value.
    pub fn max_conservation_drift(&self) -> f64 {
        let total0 = self.samples[0].total();
        self.samples
            .iter()
            .map(|st| (st.total() - total0).abs() / total0)
            .fold(0.0, f64::max)
    }

    /// CSV with header `t,s,i,r`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,s,i,r\n");
        for st in &self.samples {
            out.push_str(&format!("{},{},{},{}\n", st.t, st.s, st.i, st.r));
        }
        out
    }
}

/// Analytic summary of one parameterization, as reported by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Threshold {
    /// `gamma * s0 / alpha`.
    pub value: f64,
    /// Strictly greater than one?
    pub epidemic: bool,
    /// The reciprocal ratio `alpha / gamma`; `None` when `gamma` is zero
    /// (unbounded).
    pub reciprocal_ratio: Option<f64>,
}

/// Final-size solve result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FinalSize {
    pub s_end: f64,
    pub r_end: f64,
    /// |f(s_end)| for the first-integral objective; the bisection drives
    /// this below 1e-12.
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SirError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid step: {0}")]
    InvalidStep(String),
    #[error("non-finite value at step {step} (t = {t})")]
    NonFinite { step: usize, t: f64 },
    #[error("susceptible mass must be positive, got {0}")]
    NonPositiveSusceptible(f64),
    #[error("contact ratio must be positive, got {0}")]
    NonPositiveContactRatio(f64),
    #[error("initial infectious mass must be positive, got {0}")]
    NoInfection(f64),
    #[error("bisection bracket failed: f({lo}) = {f_lo}, f({hi}) = {f_hi} do not straddle zero")]
    BracketingFailure {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
}

/// Right-hand side of the SIR system. The three components sum to zero.
pub fn derivatives(state: &SirState, params: &SirParams) -> (f64, f64, f64) {
    let infection = params.gamma * state.i * state.s;
    let removal = params.alpha * state.i;
    (-infection, infection - removal, removal)
}

/// `q = gamma / alpha`.
pub fn contact_ratio(params: &SirParams) -> f64 {
    params.gamma / params.alpha
}

/// Threshold `gamma * s0 / alpha` and the epidemic flag (strictly above
/// one). Equality is classified as no epidemic.
pub fn epidemic_threshold(params: &SirParams, s0: f64) -> Threshold {
    let value = params.gamma * s0 / params.alpha;
    Threshold {
        value,
        epidemic: value > 1.0,
        reciprocal_ratio: (params.gamma > 0.0).then(|| params.alpha / params.gamma),
    }
}

/// The conserved quantity `i + s - ln(s) / q`.
pub fn first_integral(state: &SirState, q: f64) -> Result<f64, SirError> {
    if q <= 0.0 || !q.is_finite() {
        return Err(SirError::NonPositiveContactRatio(q));
    }
    if state.s <= 0.0 {
        return Err(SirError::NonPositiveSusceptible(state.s));
    }
    Ok(state.i + state.s - state.s.ln() / q)
}

/// Peak infectious mass.
///
/// When the peak lies ahead (`s0 > 1/q` and `i0 > 0`) this is
/// `i0 + s0 - (1 + ln(q * s0)) / q`; otherwise the infectious mass is
/// already declining and the peak is `i0` itself.
pub fn i_max(params: &SirParams, init: &SirState) -> f64 {
    let q = contact_ratio(params);
    if init.i > 0.0 && q > 0.0 && init.s * q > 1.0 {
        init.i + init.s - (1.0 + (q * init.s).ln()) / q
    } else {
        init.i
    }
}

/// Classical fixed-step RK4 from `init.t` to `t_end`.
///
/// The step count is `round((t_end - init.t) / dt)`; call with `t_end` a
/// multiple of `dt`. Errors if any state component stops being finite.
pub fn integrate(
    params: &SirParams,
    init: &SirState,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory, SirError> {
    if !dt.is_finite() || dt <= 0.0 {
        return Err(SirError::InvalidStep(format!(
            "dt must be positive, got {dt}"
        )));
    }
    if !t_end.is_finite() || t_end < init.t {
        return Err(SirError::InvalidStep(format!(
            "t_end must be at least the initial time {}, got {t_end}",
            init.t
        )));
    }
    let steps = ((t_end - init.t) / dt).round() as usize;
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(*init);
    let mut peak = Peak {
        i: init.i,
        s: init.s,
        t: init.t,
        index: 0,
    };

    let mut current = *init;
    for step in 0..steps {
        let (s, i, r) = rk4_step(params, current.s, current.i, current.r, dt);
        let t = init.t + (step + 1) as f64 * dt;
        if !(s.is_finite() && i.is_finite() && r.is_finite()) {
            return Err(SirError::NonFinite { step: step + 1, t });
        }
        current = SirState { s, i, r, t };
        if current.i > peak.i {
            peak = Peak {
                i: current.i,
                s: current.s,
                t: current.t,
                index: step + 1,
            };
        }
        samples.push(current);
    }

    Ok(Trajectory {
        params: *params,
        dt,
        samples,
        peak,
    })
}

fn rk4_step(params: &SirParams, s: f64, i: f64, r: f64, dt: f64) -> (f64, f64, f64) {
    let f = |s: f64, i: f64| {
        let infection = params.gamma * i * s;
        let removal = params.alpha * i;
        (-infection, infection - removal, removal)
    };
    let (k1s, k1i, k1r) = f(s, i);
    let (k2s, k2i, k2r) = f(s + 0.5 * dt * k1s, i + 0.5 * dt * k1i);
    let (k3s, k3i, k3r) = f(s + 0.5 * dt * k2s, i + 0.5 * dt * k2i);
    let (k4s, k4i, k4r) = f(s + dt * k3s, i + dt * k3i);
    (
        s + dt / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s),
        i + dt / 6.0 * (k1i + 2.0 * k2i + 2.0 * k3i + k4i),
        r + dt / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r),
    )
}

/// Final size of the outbreak: the susceptible mass left when infections
/// have vanished, and the removed mass `r_end = i0 + s0 - s_end`.
///
/// `s_end` is the root of `S - ln(S)/q = i0 + s0 - ln(s0)/q` on the branch
/// `(0, min(s0, 1/q)]`, where the objective is strictly decreasing; the
/// bracket is `(eps * min(s0, 1/q), min(s0, 1/q))`. Bisection runs until the
/// bracket is exhausted and reports the residual.
pub fn final_size(params: &SirParams, init: &SirState) -> Result<FinalSize, SirError> {
    let q = contact_ratio(params);
    if q <= 0.0 || !q.is_finite() {
        return Err(SirError::NonPositiveContactRatio(q));
    }
    if init.i <= 0.0 {
        return Err(SirError::NoInfection(init.i));
    }
    if init.s <= 0.0 {
        return Err(SirError::NonPositiveSusceptible(init.s));
    }

    let constant = first_integral(init, q)?;
    let objective = |s: f64| s - s.ln() / q - constant;

    let hi = init.s.min(1.0 / q);
    let lo = f64::EPSILON * hi;
    let (f_lo, f_hi) = (objective(lo), objective(hi));
    // Strictly decreasing on (0, 1/q]: positive near zero, negative at the
    // upper end (-i0 when s0 <= 1/q, -i_max otherwise).
    if !(f_lo > 0.0 && f_hi <= 0.0) {
        return Err(SirError::BracketingFailure { lo, hi, f_lo, f_hi });
    }

    let mut lo = lo;
    let mut hi = hi;
    let mut best = hi;
    let mut best_residual = f_hi.abs();
    let mut iterations = 0;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let f_mid = objective(mid);
        if f_mid.abs() < best_residual {
            best = mid;
            best_residual = f_mid.abs();
        }
        if f_mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    Ok(FinalSize {
        s_end: best,
        r_end: init.i + init.s - best,
        residual: best_residual,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn benchmark() -> (SirParams, SirState) {
        (
            SirParams::new(0.5, 0.2).unwrap(),
            SirState::initial(0.99, 0.01).unwrap(),
        )
    }

    #[test]
    fn derivatives_vanish_without_infection() {
        let params = SirParams::new(0.5, 0.2).unwrap();
        let state = SirState::new(1.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(derivatives(&state, &params), (0.0, 0.0, 0.0));
    }

    #[test]
    fn derivatives_without_transmission_only_decay() {
        let params = SirParams::new(0.0, 0.2).unwrap();
        let state = SirState::new(0.9, 0.1, 0.0, 0.0).unwrap();
        let (ds, di, dr) = derivatives(&state, &params);
        assert_eq!(ds, 0.0);
        assert!((di - (-0.2 * 0.1)).abs() < 1e-15);
        assert!((dr - 0.02).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_hand_computation() {
        let (params, state) = benchmark();
        let (ds, di, dr) = derivatives(&state, &params);
        assert!((ds - (-0.004950)).abs() < 1e-12);
        assert!((di - 0.002950).abs() < 1e-12);
        assert!((dr - 0.002000).abs() < 1e-12);
        assert!((ds + di + dr).abs() < 1e-18, "components sum to zero");
    }

    #[test]
    fn contact_ratio_is_the_rate_quotient() {
        assert_eq!(contact_ratio(&SirParams::new(0.5, 0.2).unwrap()), 2.5);
        assert_eq!(contact_ratio(&SirParams::new(0.0, 0.2).unwrap()), 0.0);
    }

    #[test]
    fn threshold_examples() {
        let low = epidemic_threshold(&SirParams::new(0.1, 0.5).unwrap(), 1.0);
        assert!((low.value - 0.2).abs() < 1e-15);
        assert!(!low.epidemic);
        assert_eq!(low.reciprocal_ratio, Some(5.0));

        let high = epidemic_threshold(&SirParams::new(0.5, 0.2).unwrap(), 0.99);
        assert!((high.value - 2.475).abs() < 1e-12);
        assert!(high.epidemic);

        let boundary = epidemic_threshold(&SirParams::new(0.2, 0.2).unwrap(), 1.0);
        assert_eq!(boundary.value, 1.0);
        assert!(!boundary.epidemic, "equality is not an epidemic");

        let zero = epidemic_threshold(&SirParams::new(0.0, 0.2).unwrap(), 1.0);
        assert_eq!(zero.reciprocal_ratio, None, "unbounded reciprocal");
    }

    #[test]
    fn first_integral_matches_hand_value() {
        let value = first_integral(&SirState::initial(0.99, 0.01).unwrap(), 2.5).unwrap();
        assert!((value - 1.0040201343414006).abs() < 1e-15);
        assert!(matches!(
            first_integral(
                &SirState {
                    s: 0.0,
                    i: 0.1,
                    r: 0.0,
                    t: 0.0
                },
                2.5
            ),
            Err(SirError::NonPositiveSusceptible(_))
        ));
    }

    #[test]
    fn i_max_reduces_to_i0_at_the_boundary() {
        // s0 == 1/q exactly: the analytic expression collapses to i0.
        let params = SirParams::new(0.5, 0.2).unwrap();
        let init = SirState::initial(0.4, 0.05).unwrap();
        assert_eq!(i_max(&params, &init), 0.05);
    }

    #[test]
    fn i_max_matches_the_frozen_benchmark_value() {
        let (params, init) = benchmark();
        assert!((i_max(&params, &init) - 0.23750384159173855).abs() < 1e-15);
    }

    #[test]
    fn integrate_keeps_a_quiet_population_constant() {
        let params = SirParams::new(0.5, 0.2).unwrap();
        let init = SirState::initial(1.0, 0.0).unwrap();
        let traj = integrate(&params, &init, 10.0, 0.01).unwrap();
        for st in &traj.samples {
            assert_eq!(st.s, 1.0);
            assert_eq!(st.i, 0.0);
            assert_eq!(st.r, 0.0);
        }
    }

    #[test]
    fn final_size_matches_the_frozen_benchmark_values() {
        let (params, init) = benchmark();
        let fs = final_size(&params, &init).unwrap();
        assert!((fs.s_end - 0.10589419433573381).abs() < 1e-12);
        assert!((fs.r_end - 0.8941058056642662).abs() < 1e-12);
        assert!(fs.residual < 1e-12);
        // Exact rearrangement: r_end + s_end = i0 + s0.
        assert_eq!(fs.r_end + fs.s_end, init.i + init.s);
    }

    #[test]
    fn final_size_requires_infection_and_positive_ratio() {
        let params = SirParams::new(0.5, 0.2).unwrap();
        assert!(matches!(
            final_size(&params, &SirState::initial(0.99, 0.0).unwrap()),
            Err(SirError::NoInfection(_))
        ));
        let no_contact = SirParams::new(0.0, 0.2).unwrap();
        assert!(matches!(
            final_size(&no_contact, &SirState::initial(0.99, 0.01).unwrap()),
            Err(SirError::NonPositiveContactRatio(_))
        ));
    }

    #[test]
    fn rejects_bad_parameters_and_steps() {
        assert!(SirParams::new(-0.1, 0.2).is_err());
        assert!(SirParams::new(0.5, 0.0).is_err());
        assert!(SirState::new(-1.0, 0.0, 0.0, 0.0).is_err());
        let (params, init) = benchmark();
        assert!(integrate(&params, &init, 1.0, 0.0).is_err());
        assert!(integrate(&params, &init, -1.0, 0.1).is_err());
    }
}
