//! Scenario commands. Sweeps run in parallel and rows keep sweep order.

use std::path::Path;

use chiral_metrology::channels::{ChiralSample, PathLength};
use chiral_metrology::metrology::{
    dichroism_beta, dichroism_concentration_variance, qfi_closed_form_birefringence, BirefringenceModel,
    ClosedFormQfi,
};
use chiral_metrology::montecarlo::run_plan;
use chiral_metrology::validate::{run_validation, Scale, ValidationReport};
use chiral_metrology::{ProbeSpec, C64};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ChannelMode, Family, ScenarioConfig};
use crate::table::{Cell, ResultTable};
use crate::{CliError, CliResult};

pub const FIG2_S_STEPS: usize = 180;
pub const FIG2_S_STEP: f64 = 0.01;
pub const FIG2_ETAS: [f64; 4] = [1.0, 0.95, 0.9, 0.8];

/// Reference relative precisions quoted for the sucrose scenario.
pub const SUCROSE_REFERENCE_COHERENT: f64 = 0.016;
pub const SUCROSE_REFERENCE_SQUEEZED: f64 = 0.008;

fn sweep_columns(config: &ScenarioConfig, rest: &[&str]) -> ResultTable {
    let mut columns: Vec<String> = config.sweep.iter().map(|s| s.parameter.clone()).collect();
    columns.extend(rest.iter().map(|c| c.to_string()));
    ResultTable::new(columns)
}

fn sweep_rows<F>(config: &ScenarioConfig, mut table: ResultTable, row: F) -> CliResult<ResultTable>
where
    F: Fn(usize, &ScenarioConfig) -> CliResult<Vec<Cell>> + Sync,
{
    let points = config.points()?;
    let rows: Vec<Vec<Cell>> = points
        .par_iter()
        .enumerate()
        .map(|(i, (value, point))| {
            let mut cells: Vec<Cell> = value.iter().map(|v| Cell::Num(*v)).collect();
            cells.extend(row(i, point)?);
            Ok(cells)
        })
        .collect::<CliResult<_>>()?;
    for r in rows {
        table.push(r)?;
    }
    Ok(table)
}

pub const QFI_COLUMNS: [&str; 12] = [
    "s",
    "eta",
    "delta_phi",
    "qfi_numerical",
    "qfi_closed_form",
    "vacuum_term",
    "bright_term",
    "sql",
    "advantage_precision",
    "advantage_bright",
    "advantage_numerical",
    "qcrb",
];

/// QFI decomposition per sweep point. `advantage_precision` is `sqrt(closed form / SQL)`,
/// `advantage_bright` drops the vacuum term, `advantage_numerical` uses the general formula.
pub fn run_qfi(config: &ScenarioConfig) -> CliResult<ResultTable> {
    let table = sweep_columns(config, &QFI_COLUMNS);
    let nu = config.measurement.nu as u64;
    sweep_rows(config, table, |_, point| {
        let model = point.birefringence_model()?;
        let r = qfi_closed_form_birefringence(&model, nu)?;
        Ok(vec![
            model.probe.squeezing().into(),
            model.sample.efficiency.into(),
            model.delta_phi().into(),
            r.qfi_numerical.into(),
            r.qfi_closed_form.into(),
            r.vacuum_term.into(),
            r.bright_term.into(),
            r.sql.into(),
            r.advantage_precision.into(),
            (r.bright_term / r.sql).sqrt().into(),
            r.advantage_numerical.sqrt().into(),
            r.qcrb_variance.into(),
        ])
    })
}

fn dilute_model(s: f64, eta: f64) -> CliResult<BirefringenceModel> {
    let probe = ProbeSpec::polarization_squeezed(C64::new(1e3, 0.0), s, 0.0);
    let sample = ChiralSample::birefringent(0.0, PathLength::from_dm(1.0), 1.0).with_efficiency(eta);
    Ok(BirefringenceModel::new(probe, sample)?)
}

/// Precision enhancement over `s ∈ [0, 1.8]` for each efficiency, at `Δφ = 0`.
///
/// `enhancement` is `sqrt(bright term / SQL)`; `enhancement_aligned` is the
/// general-formula value with the squeezing aligned to the displacement.
pub fn run_fig2() -> CliResult<ResultTable> {
    let grid: Vec<(f64, f64)> = FIG2_ETAS
        .iter()
        .flat_map(|&eta| (0..=FIG2_S_STEPS).map(move |i| (i as f64 * FIG2_S_STEP, eta)))
        .collect();
    let rows: Vec<Vec<Cell>> = grid
        .par_iter()
        .map(|&(s, eta)| {
            let model = dilute_model(s, eta)?;
            let closed = ClosedFormQfi::from_model(&model);
            let sql = closed.sql();
            Ok(vec![
                s.into(),
                eta.into(),
                (closed.bright_term() / sql).sqrt().into(),
                (model.qfi()? / sql).sqrt().into(),
            ])
        })
        .collect::<CliResult<_>>()?;
    let mut table = ResultTable::new(["s", "eta", "enhancement", "enhancement_aligned"]);
    for r in rows {
        table.push(r)?;
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SucroseReport {
    pub rotatory_power: f64,
    pub path_length_dm: f64,
    pub concentration: f64,
    pub alpha: f64,
    pub alpha_sq: f64,
    pub eta: f64,
    pub s: f64,
    pub delta_phi: f64,
    /// `δγ l`.
    pub phase_slope: f64,
    pub coherent_relative_precision: f64,
    pub squeezed_relative_precision: f64,
    /// Squeezed over coherent uncertainty.
    pub ratio: f64,
    /// Coherent over squeezed uncertainty.
    pub enhancement: f64,
    /// Same ratio from the general formula with the squeezing aligned to the displacement.
    pub enhancement_aligned: f64,
    pub reference_coherent: f64,
    pub reference_squeezed: f64,
    /// Computed over reference coherent precision.
    pub reference_factor: f64,
}

pub fn sucrose_default_config() -> ScenarioConfig {
    ScenarioConfig::from_toml_str(
        r#"
        [probe]
        family = "polarization_squeezed"
        alpha = 31622.776601683792
        s = 1.0

        [sample]
        concentration = { value = 0.01, unit = "g/cm3" }
        path_length = { value = 1.0, unit = "cm" }
        delta_gamma = 1.16

        [channel]
        mode = "birefringence"
        "#,
    )
    .expect("built-in sucrose config is valid")
}

/// Relative precision with coherent and squeezed probes of equal `|α|`.
pub fn run_sucrose(config: Option<&ScenarioConfig>) -> CliResult<SucroseReport> {
    let squeezed_cfg = config.cloned().unwrap_or_else(sucrose_default_config);
    if squeezed_cfg.channel.mode != ChannelMode::Birefringence {
        return Err(CliError::Config {
            field: "channel.mode".into(),
            reason: "sucrose scenario needs birefringence".into(),
        });
    }
    let mut coherent_cfg = squeezed_cfg.clone();
    coherent_cfg.probe.family = Family::Coherent;
    coherent_cfg.probe.s = 0.0;
    let mut aligned_cfg = squeezed_cfg.clone();
    aligned_cfg.probe.theta = Default::default();

    let squeezed = squeezed_cfg.birefringence_model()?;
    let coherent = coherent_cfg.birefringence_model()?;
    let aligned = aligned_cfg.birefringence_model()?;
    let c = squeezed.sample.concentration;
    let rel = |qfi: f64| 1.0 / (qfi.sqrt() * c);
    let coherent_rel = rel(qfi_closed_form_birefringence(&coherent, 1)?.qfi_closed_form);
    let squeezed_rel = rel(qfi_closed_form_birefringence(&squeezed, 1)?.qfi_closed_form);
    let aligned_rel = rel(aligned.qfi()?);
    let alpha = squeezed.probe.alpha.norm();
    Ok(SucroseReport {
        rotatory_power: squeezed.sample.rotatory_power,
        path_length_dm: squeezed.sample.path_length.dm(),
        concentration: c,
        alpha,
        alpha_sq: alpha * alpha,
        eta: squeezed.sample.efficiency,
        s: squeezed.probe.squeezing(),
        delta_phi: squeezed.delta_phi(),
        phase_slope: squeezed.phase_slope(),
        coherent_relative_precision: coherent_rel,
        squeezed_relative_precision: squeezed_rel,
        ratio: squeezed_rel / coherent_rel,
        enhancement: coherent_rel / squeezed_rel,
        enhancement_aligned: coherent_rel / aligned_rel,
        reference_coherent: SUCROSE_REFERENCE_COHERENT,
        reference_squeezed: SUCROSE_REFERENCE_SQUEEZED,
        reference_factor: coherent_rel / SUCROSE_REFERENCE_COHERENT,
    })
}

impl SucroseReport {
    pub fn summary(&self) -> String {
        format!(
            "unit audit\n\
             \x20 delta_gamma        = {} rad cm3 g^-1 dm^-1\n\
             \x20 l                  = {} dm\n\
             \x20 C                  = {} g/cm3\n\
             \x20 delta_gamma * l    = {} rad cm3 g^-1\n\
             \x20 delta_phi          = {} rad\n\
             \x20 |alpha|            = {} (|alpha|^2 = {})\n\
             \x20 eta                = {}\n\
             relative precision dC/C\n\
             \x20 coherent           = {}\n\
             \x20 squeezed (s = {})   = {}\n\
             \x20 squeezed/coherent  = {}\n\
             \x20 enhancement        = {}\n\
             \x20 enhancement, squeezing aligned with displacement = {}\n\
             reference values\n\
             \x20 coherent {} / squeezed {} (ratio {})\n\
             \x20 computed coherent value is {:.3} x the reference; the absolute scale differs, the ratio agrees\n",
            self.rotatory_power,
            self.path_length_dm,
            self.concentration,
            self.phase_slope,
            self.delta_phi,
            self.alpha,
            self.alpha_sq,
            self.eta,
            self.coherent_relative_precision,
            self.s,
            self.squeezed_relative_precision,
            self.ratio,
            self.enhancement,
            self.enhancement_aligned,
            self.reference_coherent,
            self.reference_squeezed,
            self.reference_squeezed / self.reference_coherent,
            self.reference_factor,
        )
    }

    pub fn to_table(&self) -> ResultTable {
        let value = serde_json::to_value(self).expect("report serializes");
        let object = value.as_object().expect("report is an object");
        let mut table = ResultTable::new(["quantity", "value"]);
        for (k, v) in object {
            table
                .push(vec![k.as_str().into(), v.as_f64().unwrap_or(f64::NAN).into()])
                .expect("two cells");
        }
        table
    }
}

pub const DICHROISM_COLUMNS: [&str; 11] = [
    "s",
    "t_left",
    "t_right",
    "variance_over_beta",
    "coherent_variance_over_beta",
    "precision_ratio",
    "beta",
    "variance",
    "crb",
    "qfi",
    "qcrb",
];

/// Intensity-ratio precision per sweep point, against a coherent probe of equal `|α|`.
pub fn run_dichroism(config: &ScenarioConfig) -> CliResult<ResultTable> {
    let table = sweep_columns(config, &DICHROISM_COLUMNS);
    let nu = config.measurement.nu as f64;
    sweep_rows(config, table, |_, point| {
        let model = point.dichroism_model()?;
        let mut coherent_cfg = point.clone();
        coherent_cfg.probe.s = 0.0;
        let coherent = coherent_cfg.dichroism_model()?;
        let (tl, tr) = model.transmissions_at(model.sample.concentration);
        let beta = dichroism_beta(
            model.probe.alpha.norm_sqr(),
            model.sample.delta_eps(),
            model.sample.path_length.cm(),
        );
        let variance = dichroism_concentration_variance(&model)?;
        let coherent_variance = dichroism_concentration_variance(&coherent)?;
        let qfi = model.qfi()?;
        Ok(vec![
            model.probe.squeezing().into(),
            tl.into(),
            tr.into(),
            (variance / beta).into(),
            (coherent_variance / beta).into(),
            (coherent_variance / variance).sqrt().into(),
            beta.into(),
            variance.into(),
            (variance / nu).into(),
            qfi.into(),
            (1.0 / (nu * qfi)).into(),
        ])
    })
}

pub const SIMULATE_COLUMNS: [&str; 12] = [
    "trials",
    "concentration",
    "estimate",
    "empirical_variance",
    "variance_se",
    "predicted_variance",
    "crb",
    "qcrb",
    "bias",
    "bias_se",
    "z_qcrb",
    "verdict",
];

/// Monte Carlo run per sweep point. `seed` overrides the configured seed;
/// sweep point `i` runs with `seed + i`.
pub fn run_simulate(config: &ScenarioConfig, seed: Option<u64>) -> CliResult<ResultTable> {
    let table = sweep_columns(config, &SIMULATE_COLUMNS);
    sweep_rows(config, table, |i, point| {
        let mut plan = point.plan(seed)?;
        plan.seed = plan.seed.map(|s| s.wrapping_add(i as u64));
        let (r, v) = run_plan(&plan)?;
        Ok(vec![
            (r.trials as f64).into(),
            plan.concentration().into(),
            r.estimate.into(),
            r.empirical_variance.into(),
            r.variance_se.into(),
            r.predicted_variance.into(),
            r.crb.into(),
            r.qcrb.into(),
            r.bias.into(),
            r.bias_se.into(),
            v.z_qcrb.into(),
            v.verdict.label().into(),
        ])
    })
}

/// Oracle grid, arbitration and Monte Carlo suite; the JSON report goes to `out`.
pub fn run_validate(scale: Scale, seed: u64, out: &Path) -> CliResult<ValidationReport> {
    let report = run_validation(scale, seed)?;
    std::fs::write(out, report.to_json())?;
    Ok(report)
}
