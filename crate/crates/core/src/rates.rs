//! Legitimate user rates, Eve leakage rates, and secrecy rates, in
//! single- and multicarrier form.
//!
//! Rate formulas follow the SINR / log-det expressions of the system
//! model; figures in this domain are usually reported in nats, so the
//! natural log is the default base with base 2 available.

use num_complex::Complex64;
use thiserror::Error;

use crate::channel::ChannelRealization;
use crate::numerics::{self, CMat, NumericsError, RMat};
use crate::waveform::{BeamSet, PowerAllocation};

#[derive(Debug, Error)]
pub enum RatesError {
    #[error("numerics failure in leakage computation: {0}")]
    Numerics(#[from] NumericsError),

    #[error("worst-case Eve set must contain at least one draw")]
    EmptyEveSet,
}

/// Logarithm base for reported rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    /// Nats (figure reproduction default).
    #[default]
    Natural,
    /// Bits.
    Two,
}

impl LogBase {
    /// Divisor converting natural log to this base.
    fn divisor(self) -> f64 {
        match self {
            LogBase::Natural => 1.0,
            LogBase::Two => std::f64::consts::LN_2,
        }
    }
}

/// Rate evaluation options.
#[derive(Debug, Clone, Copy)]
pub struct RateOpts {
    /// Fraction of time/frequency resources allocated to communication.
    pub tau_bar: f64,
    pub log_base: LogBase,
}

impl Default for RateOpts {
    fn default() -> Self {
        RateOpts {
            tau_bar: 1.0,
            log_base: LogBase::Natural,
        }
    }
}

/// Unit-norm beam directions per subcarrier; power lives in `pa`.
#[derive(Debug, Clone)]
pub struct BeamformingSolution {
    /// Per subcarrier: N_t x K matrix of user beam columns.
    pub user_beams: Vec<CMat>,
    /// Per subcarrier: N_t x 1 friendly-jamming column.
    pub fj_beam: Vec<CMat>,
    pub pa: PowerAllocation,
}

impl BeamformingSolution {
    pub fn beam_set(&self) -> BeamSet<'_> {
        BeamSet {
            user_beams: &self.user_beams,
            fj_beam: &self.fj_beam,
        }
    }

    /// Largest null-space residual `||H_hat v|| / ||H_hat||_F` across
    /// subcarriers.
    pub fn max_null_residual(&self, h_hat: &[CMat]) -> f64 {
        let mut worst: f64 = 0.0;
        for n in 0..self.fj_beam.len() {
            let r = (&h_hat[n] * &self.fj_beam[n]).norm() / h_hat[n].norm();
            worst = worst.max(r);
        }
        worst
    }
}

/// Per-user, per-subcarrier rate report.
#[derive(Debug, Clone)]
pub struct RateReport {
    pub user_rates: RMat,
    pub eve_rates: RMat,
    /// Elementwise `max(user - eve, 0)`.
    pub secrecy: RMat,
    pub sum_secrecy: f64,
    pub tau_bar: f64,
    pub log_base: LogBase,
}

impl RateReport {
    /// Smallest per-user total secrecy (sum over subcarriers).
    pub fn worst_user_secrecy(&self) -> f64 {
        (0..self.secrecy.nrows())
            .map(|k| self.secrecy.row(k).sum())
            .fold(f64::INFINITY, f64::min)
    }
}

/// SINR of user `k` on one subcarrier, from the aggregated channel matrix
/// (row k holds `h_k^H`).
fn user_sinr(
    h_bn: &CMat,
    user_beams: &CMat,
    fj_beam: &CMat,
    pa: &PowerAllocation,
    k: usize,
    n: usize,
    sigma_c2: f64,
) -> f64 {
    let hk = h_bn.row(k);
    let signal = pa.comm_power[(k, n)] * (hk * user_beams.column(k))[(0, 0)].norm_sqr();
    let mut denom = sigma_c2;
    for j in 0..user_beams.ncols() {
        if j != k {
            denom += pa.comm_power[(j, n)] * (hk * user_beams.column(j))[(0, 0)].norm_sqr();
        }
    }
    denom += pa.jam_power[n] * (hk * fj_beam.column(0))[(0, 0)].norm_sqr();
    signal / denom
}

/// Achievable rate of user `k` on subcarrier `n`, evaluated on the true
/// channels of `ch`.
pub fn user_rate(
    ch: &ChannelRealization,
    beams: &BeamformingSolution,
    pa: &PowerAllocation,
    k: usize,
    n: usize,
    opts: &RateOpts,
) -> f64 {
    user_rate_on(&ch.h_b[n], beams, pa, k, n, ch.sigma_c2, opts)
}

/// Rate against an explicit channel matrix (true or estimated).
pub fn user_rate_on(
    h_bn: &CMat,
    beams: &BeamformingSolution,
    pa: &PowerAllocation,
    k: usize,
    n: usize,
    sigma_c2: f64,
    opts: &RateOpts,
) -> f64 {
    let sinr = user_sinr(h_bn, &beams.user_beams[n], &beams.fj_beam[n], pa, k, n, sigma_c2);
    opts.tau_bar * (1.0 + sinr).ln() / opts.log_base.divisor()
}

/// Information leakage about user `k`'s stream on subcarrier `n` for the
/// Eve channel `h_en` (N_t x N_e):
/// `tau * logdet(I + (zeta g g^H + sigma_E^2 I)^{-1} q q^H)` with
/// `g = H_E^H v` and `q = H_E^H f_k`.
pub fn eve_leakage_on(
    h_en: &CMat,
    beams: &BeamformingSolution,
    pa: &PowerAllocation,
    k: usize,
    n: usize,
    sigma_e2: f64,
    opts: &RateOpts,
) -> Result<f64, RatesError> {
    let g = h_en.adjoint() * beams.fj_beam[n].column(0);
    let q = h_en.adjoint() * beams.user_beams[n].column(k);
    let ne = h_en.ncols();
    let m = &g * g.adjoint() * Complex64::new(pa.jam_power[n], 0.0)
        + CMat::identity(ne, ne) * Complex64::new(sigma_e2, 0.0);
    // logdet(I + M^{-1} q q^H) = logdet(M + q q^H) - logdet(M).
    let m_plus = &m + &q * q.adjoint();
    let val = numerics::logdet_hermitian(&m_plus)? - numerics::logdet_hermitian(&m)?;
    Ok(opts.tau_bar * val / opts.log_base.divisor())
}

/// Leakage evaluated with the realization's own Eve channel.
pub fn eve_leakage(
    ch: &ChannelRealization,
    beams: &BeamformingSolution,
    pa: &PowerAllocation,
    k: usize,
    n: usize,
    opts: &RateOpts,
) -> Result<f64, RatesError> {
    eve_leakage_on(&ch.h_eve[n], beams, pa, k, n, ch.sigma_e2, opts)
}

/// Full secrecy report. The Eve term is the worst case over `eve_set`
/// (each entry: one per-subcarrier list of Eve channels); pass
/// `std::slice::from_ref(&ch.h_eve)` for a single-realization evaluation.
pub fn secrecy_rate(
    ch: &ChannelRealization,
    beams: &BeamformingSolution,
    pa: &PowerAllocation,
    eve_set: &[Vec<CMat>],
    opts: &RateOpts,
) -> Result<RateReport, RatesError> {
    if eve_set.is_empty() {
        return Err(RatesError::EmptyEveSet);
    }
    let k_users = ch.n_users();
    let n_sub = ch.n_sub;
    let mut user_rates = RMat::zeros(k_users, n_sub);
    let mut eve_rates = RMat::zeros(k_users, n_sub);
    let mut secrecy = RMat::zeros(k_users, n_sub);
    for n in 0..n_sub {
        for k in 0..k_users {
            let r_user = user_rate(ch, beams, pa, k, n, opts);
            let mut r_eve: f64 = 0.0;
            for eve in eve_set {
                r_eve = r_eve.max(eve_leakage_on(&eve[n], beams, pa, k, n, ch.sigma_e2, opts)?);
            }
            user_rates[(k, n)] = r_user;
            eve_rates[(k, n)] = r_eve;
            secrecy[(k, n)] = (r_user - r_eve).max(0.0);
        }
    }
    let sum_secrecy = secrecy.sum();
    Ok(RateReport {
        user_rates,
        eve_rates,
        secrecy,
        sum_secrecy,
        tau_bar: opts.tau_bar,
        log_base: opts.log_base,
    })
}
