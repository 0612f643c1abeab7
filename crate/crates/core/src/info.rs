//! Classical post-processing of conditional probability tables `P(r|t)`:
//! stochasticity checks, mutual information and capacity estimates.

use std::io::{Read, Write};

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::DensityOperator;
use crate::io::{csv_reader, csv_writer, fmt_f64, write_json};
use crate::povm::{MeasurementFamily, OutcomeLabel};
use crate::tolerance::NEGATIVE_PROB_TOL;

/// Slack allowed on top of the family's completeness defect when checking
/// that rows sum to one.
pub const ROW_SUM_SLACK: f64 = 1e-9;
pub const BLAHUT_TOL: f64 = 1e-9;
pub const BLAHUT_MAX_ITERS: usize = 10_000;

/// `P(r|t)` with one row per setting. Entries are cell probabilities, so a
/// row sums to one when the measurement family is complete.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalTable {
    pub settings: Vec<String>,
    pub outcomes: Vec<OutcomeLabel>,
    pub probs: Vec<Vec<f64>>,
    pub outcome_weights: Vec<f64>,
    /// Completeness defect of the family the table came from.
    pub completeness_defect: f64,
}

/// Labels and weights stored beside the CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Sidecar {
    settings: Vec<String>,
    outcomes: Vec<OutcomeLabel>,
    outcome_weights: Vec<f64>,
    completeness_defect: f64,
}

impl ConditionalTable {
    /// Checks shapes and entries; values in `[−1e−12, 0)` are set to zero.
    pub fn new(
        settings: Vec<String>,
        outcomes: Vec<OutcomeLabel>,
        mut probs: Vec<Vec<f64>>,
        outcome_weights: Vec<f64>,
        completeness_defect: f64,
    ) -> Result<Self> {
        if settings.len() != probs.len() {
            return Err(Error::DimensionMismatch { expected: settings.len(), found: probs.len() });
        }
        if outcome_weights.len() != outcomes.len() {
            return Err(Error::DimensionMismatch { expected: outcomes.len(), found: outcome_weights.len() });
        }
        for (t, row) in probs.iter_mut().enumerate() {
            if row.len() != outcomes.len() {
                return Err(Error::DimensionMismatch { expected: outcomes.len(), found: row.len() });
            }
            for (r, p) in row.iter_mut().enumerate() {
                if !p.is_finite() {
                    return Err(Error::NonFinite);
                }
                if *p < -NEGATIVE_PROB_TOL {
                    return Err(Error::NegativeProbability { setting: t, outcome: r, value: *p });
                }
                *p = p.max(0.0);
            }
        }
        Ok(Self { settings, outcomes, probs, outcome_weights, completeness_defect })
    }

    /// Table with the rows already evaluated against `fam`.
    pub fn from_rows(settings: Vec<String>, fam: &MeasurementFamily, probs: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(settings, fam.outcomes(), probs, fam.weights(), fam.completeness_defect())
    }

    pub fn n_settings(&self) -> usize {
        self.settings.len()
    }

    pub fn n_outcomes(&self) -> usize {
        self.outcomes.len()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.probs.iter().map(|row| row.iter().sum()).collect()
    }

    /// Largest `|∑_r P(r|t) − 1|`.
    pub fn stochasticity_defect(&self) -> f64 {
        self.row_sums().iter().fold(0.0f64, |m, s| m.max((s - 1.0).abs()))
    }

    pub fn is_stochastic(&self) -> bool {
        self.stochasticity_defect() <= self.completeness_defect + ROW_SUM_SLACK
    }

    pub fn max_abs_difference(&self, other: &ConditionalTable) -> Result<f64> {
        if self.n_settings() != other.n_settings() || self.n_outcomes() != other.n_outcomes() {
            return Err(Error::DimensionMismatch { expected: self.n_settings() * self.n_outcomes(), found: other.n_settings() * other.n_outcomes() });
        }
        Ok(self
            .probs
            .iter()
            .flatten()
            .zip(other.probs.iter().flatten())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Classical chain `∑_s P(r|s) P(s|t)`, with `self` giving `P(s|t)`.
    pub fn then(&self, next: &ConditionalTable) -> Result<ConditionalTable> {
        if self.n_outcomes() != next.n_settings() {
            return Err(Error::DimensionMismatch { expected: self.n_outcomes(), found: next.n_settings() });
        }
        let probs = self
            .probs
            .iter()
            .map(|row| {
                (0..next.n_outcomes())
                    .map(|r| row.iter().zip(&next.probs).map(|(p, nrow)| p * nrow[r]).sum())
                    .collect()
            })
            .collect();
        ConditionalTable::new(
            self.settings.clone(),
            next.outcomes.clone(),
            probs,
            next.outcome_weights.clone(),
            self.completeness_defect + next.completeness_defect,
        )
    }

    /// Long-format rows `setting,outcome,probability` in setting then
    /// outcome order.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv_writer(out);
        w.write_record(["setting", "outcome", "probability"])?;
        for (t, row) in self.probs.iter().enumerate() {
            for (r, p) in row.iter().enumerate() {
                w.write_record([t.to_string(), r.to_string(), fmt_f64(*p)])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_sidecar<W: Write>(&self, out: W) -> Result<()> {
        let side = Sidecar {
            settings: self.settings.clone(),
            outcomes: self.outcomes.clone(),
            outcome_weights: self.outcome_weights.clone(),
            completeness_defect: self.completeness_defect,
        };
        write_json(out, &side)
    }

    pub fn read_csv<R: Read, S: Read>(csv: R, sidecar: S) -> Result<Self> {
        let side: Sidecar = serde_json::from_reader(sidecar)?;
        let mut probs = vec![vec![f64::NAN; side.outcomes.len()]; side.settings.len()];
        for record in csv_reader(csv).records() {
            let record = record?;
            if record.len() != 3 {
                return Err(Error::Format(format!("expected 3 fields, found {}", record.len())));
            }
            let parse_index = |s: &str| s.parse::<usize>().map_err(|e| Error::Format(format!("bad index {s:?}: {e}")));
            let (t, r) = (parse_index(&record[0])?, parse_index(&record[1])?);
            let p: f64 = record[2].parse().map_err(|e| Error::Format(format!("bad probability {:?}: {e}", &record[2])))?;
            let cell = probs
                .get_mut(t)
                .and_then(|row| row.get_mut(r))
                .ok_or_else(|| Error::Format(format!("cell ({t}, {r}) outside the table")))?;
            *cell = p;
        }
        if probs.iter().flatten().any(|p| p.is_nan()) {
            return Err(Error::Format("table has missing cells".into()));
        }
        Self::new(side.settings, side.outcomes, probs, side.outcome_weights, side.completeness_defect)
    }
}

/// `P(r|t) = w(r) Trace(σ(r) ρ(t))`, one row per state.
pub fn build_table(states: &[DensityOperator], fam: &MeasurementFamily) -> Result<ConditionalTable> {
    let probs: Result<Vec<Vec<f64>>> = states.par_iter().map(|rho| fam.probabilities(rho)).collect();
    ConditionalTable::from_rows(states.iter().map(|s| s.label().to_string()).collect(), fam, probs?)
}

fn check_prior(prior: &[f64], n: usize) -> Result<()> {
    if prior.len() != n {
        return Err(Error::InvalidPrior(format!("{} weights for {n} settings", prior.len())));
    }
    if prior.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::InvalidPrior("weights must be finite and non-negative".into()));
    }
    let total: f64 = prior.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidPrior(format!("weights sum to {total}")));
    }
    Ok(())
}

/// Rows rescaled to sum to one; a truncated outcome grid loses a little
/// mass that would otherwise count as an extra outcome.
fn normalized_rows(table: &ConditionalTable) -> Vec<Vec<f64>> {
    table
        .probs
        .iter()
        .map(|row| {
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                row.iter().map(|p| p / s).collect()
            } else {
                row.clone()
            }
        })
        .collect()
}

fn information_nats(rows: &[Vec<f64>], prior: &[f64]) -> f64 {
    let n_out = rows.first().map_or(0, Vec::len);
    let q: Vec<f64> = (0..n_out).map(|r| rows.iter().zip(prior).map(|(row, pt)| pt * row[r]).sum()).collect();
    let mut total = 0.0;
    for (row, pt) in rows.iter().zip(prior) {
        if *pt == 0.0 {
            continue;
        }
        for (p, qr) in row.iter().zip(&q) {
            if *p > 0.0 {
                total += pt * p * (p / qr).ln();
            }
        }
    }
    total.max(0.0)
}

/// `I(T;R)` in bits.
pub fn mutual_information(table: &ConditionalTable, prior: &[f64]) -> Result<f64> {
    check_prior(prior, table.n_settings())?;
    Ok(information_nats(&normalized_rows(table), prior) / std::f64::consts::LN_2)
}

pub fn uniform_prior(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

/// `min(log₂|T|, log₂|R|)`.
pub fn information_bound(table: &ConditionalTable) -> f64 {
    (table.n_settings().min(table.n_outcomes()) as f64).log2()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CapacityEstimate {
    /// Bits per use.
    pub capacity: f64,
    pub prior: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Blahut–Arimoto ascent from the uniform prior; stops when the upper and
/// lower capacity bounds are within `tol` bits.
pub fn blahut_arimoto(table: &ConditionalTable, tol: f64, max_iters: usize) -> Result<CapacityEstimate> {
    let n = table.n_settings();
    if n == 0 {
        return Err(Error::InvalidPrior("table has no settings".into()));
    }
    let rows = normalized_rows(table);
    let n_out = table.n_outcomes();
    let mut prior = uniform_prior(n);
    let mut d = vec![0.0; n];
    for it in 1..=max_iters {
        let q: Vec<f64> = (0..n_out).map(|r| rows.iter().zip(&prior).map(|(row, pt)| pt * row[r]).sum()).collect();
        for (dt, row) in d.iter_mut().zip(&rows) {
            *dt = row.iter().zip(&q).filter(|(p, _)| **p > 0.0).map(|(p, qr)| p * (p / qr).ln()).sum();
        }
        let z: f64 = prior.iter().zip(&d).map(|(p, dt)| p * dt.exp()).sum();
        let lower = z.ln() / std::f64::consts::LN_2;
        let upper = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / std::f64::consts::LN_2;
        for (p, dt) in prior.iter_mut().zip(&d) {
            *p *= dt.exp() / z;
        }
        if upper - lower < tol {
            let capacity = information_nats(&rows, &prior) / std::f64::consts::LN_2;
            return Ok(CapacityEstimate { capacity, prior, iterations: it, converged: true });
        }
    }
    warn!("capacity ascent did not converge in {max_iters} iterations");
    let capacity = information_nats(&rows, &prior) / std::f64::consts::LN_2;
    Ok(CapacityEstimate { capacity, prior, iterations: max_iters, converged: false })
}

/// Best prior on the simplex lattice with spacing `1/steps`.
pub fn grid_capacity(table: &ConditionalTable, steps: usize) -> Result<CapacityEstimate> {
    let n = table.n_settings();
    if n == 0 || steps == 0 {
        return Err(Error::InvalidPrior("empty table or prior grid".into()));
    }
    let rows = normalized_rows(table);
    let mut best = (f64::NEG_INFINITY, Vec::new());
    let mut counts = vec![0usize; n];
    let mut visited = 0;
    fill(&mut counts, 0, steps, &mut |c| {
        visited += 1;
        let prior: Vec<f64> = c.iter().map(|&k| k as f64 / steps as f64).collect();
        let i = information_nats(&rows, &prior);
        if i > best.0 {
            best = (i, prior);
        }
    });
    Ok(CapacityEstimate { capacity: best.0 / std::f64::consts::LN_2, prior: best.1, iterations: visited, converged: true })
}

fn fill(counts: &mut [usize], pos: usize, left: usize, visit: &mut impl FnMut(&[usize])) {
    if pos + 1 == counts.len() {
        counts[pos] = left;
        visit(counts);
        return;
    }
    for k in 0..=left {
        counts[pos] = k;
        fill(counts, pos + 1, left - k, visit);
    }
}

/// Capacity by ascent, optionally cross-checked on a prior lattice.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CapacityReport {
    pub ascent: CapacityEstimate,
    pub grid: Option<CapacityEstimate>,
    /// `|ascent − grid|` when both are present.
    pub disagreement: Option<f64>,
    pub bound: f64,
}

pub fn capacity_sweep(table: &ConditionalTable, grid_steps: Option<usize>) -> Result<CapacityReport> {
    let ascent = blahut_arimoto(table, BLAHUT_TOL, BLAHUT_MAX_ITERS)?;
    let grid = grid_steps.map(|s| grid_capacity(table, s)).transpose()?;
    let disagreement = grid.as_ref().map(|g| (g.capacity - ascent.capacity).abs());
    Ok(CapacityReport { ascent, grid, disagreement, bound: information_bound(table) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{Channel, LossChannel};
    use crate::fock::{coherent_state, number_state, FockSpace};
    use crate::povm::{heterodyne_measurement, number_measurement, AmplitudeGrid};
    use crate::spin::{direction_scheme, polygon_directions, tetrahedron_directions, Direction};
    use crate::C64;

    fn identity_table(n: usize) -> ConditionalTable {
        let probs = (0..n).map(|t| (0..n).map(|r| if r == t { 1.0 } else { 0.0 }).collect()).collect();
        ConditionalTable::new(
            (0..n).map(|t| t.to_string()).collect(),
            (0..n).map(OutcomeLabel::Index).collect(),
            probs,
            vec![1.0; n],
            0.0,
        )
        .unwrap()
    }

    fn number_states(s: FockSpace, n: usize) -> Vec<DensityOperator> {
        (0..n).map(|k| DensityOperator::pure(&number_state(s, k).unwrap(), k.to_string()).unwrap()).collect()
    }

    fn spin_table(dirs: &[Direction]) -> ConditionalTable {
        let scheme = direction_scheme(dirs).unwrap();
        build_table(&scheme.states, &scheme.measurement).unwrap()
    }

    #[test]
    fn lossless_number_table_is_identity() {
        let s = FockSpace::with_dim(12).unwrap();
        let t = build_table(&number_states(s, 5), &number_measurement(s)).unwrap();
        for (n, row) in t.probs.iter().enumerate() {
            for (m, p) in row.iter().enumerate() {
                assert_eq!(*p, if n == m { 1.0 } else { 0.0 });
            }
        }
        assert!(t.is_stochastic());
        assert!((mutual_information(&t, &uniform_prior(5)).unwrap() - 5f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn loss_table_is_binomial() {
        let s = FockSpace::with_dim(10).unwrap();
        let p = 0.3;
        let lossy: Vec<_> =
            number_states(s, 4).iter().map(|r| LossChannel::new(p).unwrap().apply(r).unwrap()).collect();
        let t = build_table(&lossy, &number_measurement(s)).unwrap();
        // C(3, m) p^m (1−p)^(3−m)
        let binom = [1.0, 3.0, 3.0, 1.0];
        for m in 0..4 {
            let expected = binom[m] * p.powi(m as i32) * (1.0 - p).powi(3 - m as i32);
            assert!((t.probs[3][m] - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn classical_chain_matches_two_stage_path() {
        // number states → loss p₁ → number readout → loss p₂ → number readout
        let s = FockSpace::with_dim(10).unwrap();
        let (p1, p2) = (0.7, 0.4);
        let states = number_states(s, 6);
        let fam = number_measurement(s);
        let through = |p: f64, st: &[DensityOperator]| {
            let out: Vec<_> = st.iter().map(|r| LossChannel::new(p).unwrap().apply(r).unwrap()).collect();
            build_table(&out, &fam).unwrap()
        };
        let first = through(p1, &states);
        let second = through(p2, &number_states(s, 10));
        let direct = through(p1 * p2, &states);
        assert!(first.then(&second).unwrap().max_abs_difference(&direct).unwrap() < 1e-10);
    }

    #[test]
    fn information_of_constant_rows_is_zero() {
        let t = ConditionalTable::new(
            vec!["a".into(), "b".into()],
            (0..3).map(OutcomeLabel::Index).collect(),
            vec![vec![0.2, 0.3, 0.5]; 2],
            vec![1.0; 3],
            0.0,
        )
        .unwrap();
        assert!(mutual_information(&t, &[0.4, 0.6]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn invalid_priors() {
        let t = identity_table(3);
        assert!(matches!(mutual_information(&t, &[0.5, 0.5]), Err(Error::InvalidPrior(_))));
        assert!(mutual_information(&t, &[0.5, 0.6, -0.1]).is_err());
        assert!(mutual_information(&t, &[0.2, 0.2, 0.2]).is_err());
    }

    #[test]
    fn negative_cells_are_refused() {
        let err = ConditionalTable::new(vec!["a".into()], vec![OutcomeLabel::Index(0)], vec![vec![-1e-6]], vec![1.0], 0.0);
        assert!(matches!(err, Err(Error::NegativeProbability { setting: 0, outcome: 0, .. })));
        let ok = ConditionalTable::new(vec!["a".into()], vec![OutcomeLabel::Index(0)], vec![vec![-1e-13]], vec![1.0], 0.0);
        assert_eq!(ok.unwrap().probs[0][0], 0.0);
    }

    #[test]
    fn spin_scheme_information() {
        let u = |n| uniform_prior(n);
        let two = spin_table(&polygon_directions(2));
        assert!((mutual_information(&two, &u(2)).unwrap() - 1.0).abs() < 1e-12);
        // trine rows (2/3, 1/6, 1/6): log₂3 − H(row) = 1/3 exactly
        let three = spin_table(&polygon_directions(3));
        assert!((mutual_information(&three, &u(3)).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        for dirs in [polygon_directions(4), polygon_directions(6), tetrahedron_directions()] {
            let i = mutual_information(&spin_table(&dirs), &u(dirs.len())).unwrap();
            assert!(i > 0.0 && i < 1.0 - 1e-3, "{} directions: {i}", dirs.len());
        }
    }

    #[test]
    fn ascent_reaches_log_n_on_noiseless_tables() {
        for n in [2, 3, 5] {
            let cap = blahut_arimoto(&identity_table(n), BLAHUT_TOL, BLAHUT_MAX_ITERS).unwrap();
            assert!(cap.converged);
            assert!((cap.capacity - (n as f64).log2()).abs() < 1e-9);
            assert!(cap.prior.iter().all(|p| (p - 1.0 / n as f64).abs() < 1e-9));
        }
    }

    #[test]
    fn trine_pair_capacity_below_one_bit() {
        let scheme = direction_scheme(&polygon_directions(3)).unwrap();
        let t = build_table(&scheme.states[..2], &scheme.measurement).unwrap();
        let report = capacity_sweep(&t, Some(10_000)).unwrap();
        assert!(report.ascent.capacity < 1.0);
        assert!(report.disagreement.unwrap() < 1e-6, "{report:?}");
    }

    #[test]
    fn coherent_pair_capacity_two_ways() {
        let s = FockSpace::with_dim(30).unwrap();
        let states: Vec<_> = [1.0, -1.0]
            .iter()
            .map(|&a| DensityOperator::pure(&coherent_state(s, C64::new(a, 0.0)).unwrap(), format!("{a}")).unwrap())
            .collect();
        let fam = heterodyne_measurement(s, &AmplitudeGrid::default()).unwrap();
        let t = build_table(&states, &fam).unwrap();
        assert!(t.is_stochastic(), "{} {}", t.stochasticity_defect(), t.completeness_defect);
        let report = capacity_sweep(&t, Some(10_000)).unwrap();
        assert!(report.disagreement.unwrap() < 1e-6);
        assert!(report.ascent.capacity > 0.0 && report.ascent.capacity < 1.0);
        // mirror-symmetric pair: the optimum is the uniform prior
        assert!((report.ascent.prior[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn loss_never_raises_capacity() {
        let s = FockSpace::with_dim(12).unwrap();
        let states = number_states(s, 5);
        let fam = number_measurement(s);
        let mut last = f64::INFINITY;
        for p in [1.0, 0.75, 0.5, 0.25] {
            let out: Vec<_> = states.iter().map(|r| LossChannel::new(p).unwrap().apply(r).unwrap()).collect();
            let c = blahut_arimoto(&build_table(&out, &fam).unwrap(), BLAHUT_TOL, BLAHUT_MAX_ITERS).unwrap().capacity;
            assert!(c <= last + 1e-6, "p={p}: {c} > {last}");
            last = c;
        }
    }

    #[test]
    fn csv_and_sidecar_round_trip() {
        let t = spin_table(&polygon_directions(3));
        let (mut csv, mut side) = (Vec::new(), Vec::new());
        t.write_csv(&mut csv).unwrap();
        t.write_sidecar(&mut side).unwrap();
        let text = String::from_utf8(csv.clone()).unwrap();
        assert_eq!(text.lines().next(), Some("setting,outcome,probability"));
        assert_eq!(text.lines().count(), 10);
        let back = ConditionalTable::read_csv(csv.as_slice(), side.as_slice()).unwrap();
        assert_eq!(back, t);
        let short = text.lines().take(5).collect::<Vec<_>>().join("\n");
        assert!(ConditionalTable::read_csv(short.as_bytes(), side.as_slice()).is_err());
    }
}
