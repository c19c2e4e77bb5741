use fermi_lattice_core::amplitude::{bare_amplitude, AmplitudeOptions};
use fermi_lattice_core::causality::{causality_trace, lightcone_estimate, LightconeEstimate, PairCorrelator};
use fermi_lattice_core::cloud::single_site_distributions;
use fermi_lattice_core::dressing::{dressed_amplitude, g_min, static_dressing_amplitude, DressingScheme};
use fermi_lattice_core::ion::{
    optimal_equal_pulse, swap_probability, swap_probability_full, symplectic_temperature, PulseSpec,
    ThermalGroundState,
};
use fermi_lattice_core::modes::ring_distance;
use fermi_lattice_core::oracle::{epsilon_sweep, OracleOptions};
use fermi_lattice_core::{ModeBasis, Scenario};
use rayon::prelude::*;

use crate::error::CliError;
use crate::output::{Cell, Table};
use crate::schema::{CausalityMode, CloudComponent, DressedTable, Grid, IntList, ScenarioFile};
use crate::Command;

/// Number of samples used when a command's time grid is left out.
const DEFAULT_GRID_POINTS: usize = 201;

/// Tables keyed by an optional file-name tag, plus the text that goes to
/// the manifest and the terminal.
#[derive(Debug, Default)]
pub struct CommandOutput {
    pub tables: Vec<(Option<String>, Table)>,
    pub summary: Vec<String>,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
}

impl CommandOutput {
    fn single(table: Table) -> Self {
        CommandOutput {
            tables: vec![(None, table)],
            ..Default::default()
        }
    }
}

pub fn run(command: Command, file: &ScenarioFile) -> Result<CommandOutput, CliError> {
    match command {
        Command::Causality => causality(file),
        Command::Bare => bare(file),
        Command::Dressed => dressed(file),
        Command::Ion2 => ion2(file),
        Command::Cloud => cloud(file),
        Command::OracleCheck => oracle(file),
    }
}

fn required<'a, T>(value: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
    value
        .as_ref()
        .ok_or_else(|| CliError::Usage(format!("`run.{name}` is required for this command")))
}

fn time_grid(grid: &Option<Grid>, scenario: &Scenario) -> Result<Vec<f64>, CliError> {
    match grid {
        Some(g) => g.values(),
        None => Grid::Linspace {
            start: 0.0,
            stop: scenario.duration,
            count: DEFAULT_GRID_POINTS,
        }
        .values(),
    }
}

fn half_ring(basis: &ModeBasis, list: &Option<IntList>) -> Result<Vec<usize>, CliError> {
    match list {
        Some(l) => l.values(),
        None => Ok((1..=basis.n_sites() / 2).collect()),
    }
}

fn describe_lightcone(n: usize, a: usize, b: usize, e: &LightconeEstimate) -> String {
    format!(
        "lightcone N={n} sites=({a},{b}): rise_time={} nominal_causal_time={} sharpness={} n_samples={}",
        e.rise_time, e.nominal_causal_time, e.sharpness, e.n_samples
    )
}

fn causality(file: &ScenarioFile) -> Result<CommandOutput, CliError> {
    let opts = &file.run.causality;
    match opts.mode {
        CausalityMode::Trace => {
            let s = file.scenario()?;
            let taus = required(&opts.taus, "causality.taus")?.values()?;
            let basis = file.system.basis()?;
            let tr = causality_trace(&basis, s.site_a, s.site_b, &taus)?;
            let mut table = Table::new(["tau", "f_a", "f_c"]);
            for i in 0..tr.taus.len() {
                table.push(vec![tr.taus[i].into(), tr.f_a[i].into(), tr.f_c[i].into()]);
            }
            let mut out = CommandOutput::single(table);
            if let Some(lc) = &opts.lightcone {
                let e = lightcone_estimate(&basis, s.site_a, s.site_b, lc.tau_max, lc.n_samples)?;
                out.summary.push(describe_lightcone(basis.n_sites(), s.site_a, s.site_b, &e));
            }
            Ok(out)
        }
        CausalityMode::DistanceSweep => {
            let tau = *required(&opts.tau, "causality.tau")?;
            let basis = file.system.basis()?;
            let a = file.scenario.as_ref().map_or(0, |s| s.site_a);
            let n = basis.n_sites();
            let distances = half_ring(&basis, &opts.distances)?;
            let rows: Vec<(usize, f64, f64)> = distances
                .par_iter()
                .map(|&r| {
                    let c = PairCorrelator::new(&basis, a, (a + r) % n)?;
                    let (fa, fc) = c.eval(tau);
                    Ok((r, fa, fc))
                })
                .collect::<Result<_, CliError>>()?;
            let mut table = Table::new(["r", "f_a", "f_c"]);
            for (r, fa, fc) in rows {
                table.push(vec![r.into(), fa.into(), fc.into()]);
            }
            Ok(CommandOutput::single(table))
        }
        CausalityMode::SizeSweep => {
            let sizes = required(&opts.sizes, "causality.sizes")?.values()?;
            let fraction = *required(&opts.distance_fraction, "causality.distance_fraction")?;
            let taus = required(&opts.taus, "causality.taus")?.values()?;
            let runs: Vec<(Table, Option<String>)> = sizes
                .par_iter()
                .map(|&n| {
                    let basis = file.system.with_sites(n)?.basis()?;
                    let r = (fraction * n as f64).round() as usize;
                    let tr = causality_trace(&basis, 0, r % n, &taus)?;
                    let mut table = Table::new(["tau", "f_a", "f_c", "n_f_c"]);
                    for i in 0..tr.taus.len() {
                        let fc = tr.f_c[i];
                        table.push(vec![tr.taus[i].into(), tr.f_a[i].into(), fc.into(), (n as f64 * fc).into()]);
                    }
                    let line = match &opts.lightcone {
                        Some(lc) => {
                            let e = lightcone_estimate(&basis, 0, r % n, lc.tau_max, lc.n_samples)?;
                            Some(describe_lightcone(n, 0, r % n, &e))
                        }
                        None => None,
                    };
                    Ok((table, line))
                })
                .collect::<Result<_, CliError>>()?;
            let mut out = CommandOutput::default();
            for (&n, (table, line)) in sizes.iter().zip(runs) {
                out.tables.push((Some(format!("N{n}")), table));
                out.summary.extend(line);
            }
            Ok(out)
        }
    }
}

/// End of the interaction actually probed: the last sampled time, cut at
/// the later of the two windows.
fn interaction_end(s: &Scenario, times: &[f64]) -> f64 {
    let last = times.iter().copied().fold(0.0, f64::max);
    match (s.opening_a.window_end(), s.opening_b.window_end()) {
        (Some(a), Some(b)) => last.min(a.max(b)),
        _ => last,
    }
}

fn causal_warning(basis: &ModeBasis, s: &Scenario, times: &[f64]) -> Option<String> {
    let end = interaction_end(s, times);
    basis
        .nominal_causal_time(s.site_a, s.site_b)
        .filter(|&tc| end > tc)
        .map(|tc| format!("interaction runs to t = {end}, past the nominal causal time {tc}"))
}

fn bare(file: &ScenarioFile) -> Result<CommandOutput, CliError> {
    let s = file.scenario()?;
    let opts = &file.run.bare;
    let basis = file.system.basis()?;
    let times = time_grid(&opts.times, s)?;
    let amp = AmplitudeOptions {
        method: opts.kernel.method(),
        per_mode: false,
    };
    let tr = bare_amplitude(&basis, s, &times, &amp)?;
    let mut table = Table::new([
        "t", "a0_re", "a0_im", "ac_re", "ac_im", "total_re", "total_im", "abs_a0", "abs_ac", "probability",
    ]);
    for i in 0..tr.len() {
        let (a0, ac, tot) = (tr.a0[i], tr.ac[i], tr.total[i]);
        table.push(vec![
            tr.times[i].into(),
            a0.re.into(),
            a0.im.into(),
            ac.re.into(),
            ac.im.into(),
            tot.re.into(),
            tot.im.into(),
            a0.norm().into(),
            ac.norm().into(),
            tr.probability[i].into(),
        ]);
    }
    let mut out = CommandOutput::single(table);
    out.summary.push(format!("commutator_ratio max|A_c|/max|A_0| = {}", tr.commutator_ratio()));
    out.warnings.extend(causal_warning(&basis, s, &times));
    Ok(out)
}

fn scheme_name(s: DressingScheme) -> &'static str {
    match s {
        DressingScheme::SigmaX => "sigma_x",
        DressingScheme::SigmaPlus => "sigma_plus",
        DressingScheme::Bare => "bare",
    }
}

fn dressed(file: &ScenarioFile) -> Result<CommandOutput, CliError> {
    let opts = &file.run.dressed;
    let basis = file.system.basis()?;
    match opts.table {
        DressedTable::Probability => {
            let s = file.scenario()?;
            let times = time_grid(&opts.times, s)?;
            let schemes = opts.schemes.clone().unwrap_or_else(|| DressingScheme::ALL.to_vec());
            if schemes.is_empty() {
                return Err(CliError::Usage("`run.dressed.schemes` is empty".into()));
            }
            let amp = AmplitudeOptions {
                method: opts.kernel.method(),
                per_mode: false,
            };
            let traces = schemes
                .iter()
                .map(|&sch| dressed_amplitude(&basis, s, sch, &times, &amp))
                .collect::<Result<Vec<_>, _>>()?;
            let mut header = vec!["t".to_string()];
            header.extend((1..=schemes.len()).map(|i| format!("p{i}")));
            let mut table = Table::new(header);
            for (i, &t) in times.iter().enumerate() {
                let mut row = vec![Cell::from(t)];
                row.extend(traces.iter().map(|tr| Cell::from(tr.probability[i])));
                table.push(row);
            }
            let mut out = CommandOutput::single(table);
            for (i, &sch) in schemes.iter().enumerate() {
                let last = traces[i].probability.last().copied().unwrap_or(f64::NAN);
                out.summary.push(format!("p{} = {} (final {last})", i + 1, scheme_name(sch)));
            }
            out.warnings.extend(causal_warning(&basis, s, &times));
            Ok(out)
        }
        DressedTable::StaticDressing => {
            let omega = file.scenario()?.common_omega()?;
            let distances = half_ring(&basis, &opts.distances)?;
            let n = basis.n_sites();
            let mut table = Table::new(["r", "g_over_eps2"]);
            for r in distances {
                let g = static_dressing_amplitude(&basis, omega, ring_distance(0, r % n, n))?;
                table.push(vec![r.into(), g.into()]);
            }
            Ok(CommandOutput::single(table))
        }
        DressedTable::GMin => {
            let omega = file.scenario()?.common_omega()?;
            let template = basis
                .chain_params()
                .ok_or_else(|| CliError::Usage("g_min needs a chain system".into()))?;
            let sizes = required(&opts.sizes, "dressed.sizes")?.values()?;
            let values = g_min(template, &sizes, omega)?;
            let mut table = Table::new(["n", "g_min_over_eps2"]);
            for (n, g) in sizes.into_iter().zip(values) {
                table.push(vec![n.into(), g.into()]);
            }
            Ok(CommandOutput::single(table))
        }
    }
}

fn ion_frequencies(file: &ScenarioFile) -> Result<(f64, f64), CliError> {
    let opts = &file.run.ion2;
    if let (Some(w0), Some(w1)) = (opts.omega0, opts.omega1) {
        return Ok((w0, w1));
    }
    let basis = file.system.basis()?;
    match basis.frequencies() {
        [w0, w1] if file.system.trap.is_some() => Ok((opts.omega0.unwrap_or(*w0), opts.omega1.unwrap_or(*w1))),
        _ => Err(CliError::Usage(
            "ion2 needs a two-ion trap or explicit `run.ion2.omega0`/`omega1`".into(),
        )),
    }
}

fn ion_pulse(file: &ScenarioFile, omega0: f64) -> Result<PulseSpec, CliError> {
    let opts = &file.run.ion2;
    let pulse = match (opts.alpha_a, opts.alpha_b, &file.scenario) {
        (Some(a), Some(b), _) => PulseSpec::new(a, b)?,
        (None, None, Some(s)) => PulseSpec::from_pulses(s.epsilon, omega0, &s.opening_a, &s.opening_b, s.duration)?,
        (None, None, None) => PulseSpec::equal(1.0)?,
        _ => return Err(CliError::Usage("give both `alpha_a` and `alpha_b` or neither".into())),
    };
    Ok(pulse)
}

fn ion_row(pulse: &PulseSpec, thermal: &ThermalGroundState, cutoff: Option<usize>) -> Result<Vec<Cell>, CliError> {
    let mut row = vec![Cell::from(swap_probability(pulse, thermal).probability)];
    if let Some(c) = cutoff {
        let full = swap_probability_full(pulse, thermal, c)?;
        row.push(full.probability.into());
        row.push(full.normalized_probability.into());
    }
    Ok(row)
}

fn ion2(file: &ScenarioFile) -> Result<CommandOutput, CliError> {
    let opts = &file.run.ion2;
    let (w0, w1) = ion_frequencies(file)?;
    let thermal = symplectic_temperature(w0, w1)?;
    let pulse = ion_pulse(file, w0)?;
    let mut columns: Vec<&str> = vec!["p"];
    if opts.schmidt_cutoff.is_some() {
        columns.extend(["p_full", "p_full_normalized"]);
    }
    let mut out = CommandOutput::default();
    out.summary.push(format!(
        "omega0={w0} omega1={w1} lambda={} beta={} e_minus_beta={}",
        thermal.lambda_symp, thermal.beta, thermal.e_minus_beta
    ));
    let p = swap_probability(&pulse, &thermal).probability;
    out.summary.push(format!("alpha_a={} alpha_b={} p={p}", pulse.alpha_a, pulse.alpha_b));
    let table = match &opts.alpha_scan {
        Some(grid) => {
            let alphas = grid.values()?;
            let rows: Vec<Vec<Cell>> = alphas
                .par_iter()
                .map(|&a| {
                    let mut row = vec![Cell::from(a)];
                    row.extend(ion_row(&PulseSpec::equal(a)?, &thermal, opts.schmidt_cutoff)?);
                    Ok(row)
                })
                .collect::<Result<_, CliError>>()?;
            let mut table = Table::new(std::iter::once("alpha").chain(columns));
            rows.into_iter().for_each(|r| table.push(r));
            let lo = alphas.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = alphas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if lo < hi {
                let best = optimal_equal_pulse(&thermal, lo, hi)?;
                out.summary.push(format!("argmax_alpha={best}"));
            }
            table
        }
        None => {
            let mut table = Table::new(["alpha_a", "alpha_b"].into_iter().chain(columns));
            let mut row = vec![Cell::from(pulse.alpha_a), Cell::from(pulse.alpha_b)];
            row.extend(ion_row(&pulse, &thermal, opts.schmidt_cutoff)?);
            table.push(row);
            table
        }
    };
    out.tables.push((None, table));
    Ok(out)
}

fn cloud(file: &ScenarioFile) -> Result<CommandOutput, CliError> {
    let s = file.scenario()?;
    let opts = &file.run.cloud;
    let basis = file.system.basis()?;
    let times = time_grid(&opts.times, s)?;
    let amp = AmplitudeOptions {
        method: opts.kernel.method(),
        per_mode: false,
    };
    let snaps = times
        .par_iter()
        .map(|&t| single_site_distributions(&basis, s, opts.scheme, t, &amp))
        .collect::<Result<Vec<_>, _>>()?;
    let header: &[&str] = match opts.component {
        CloudComponent::Split => &["t", "n", "d_up", "d_down", "d_n"],
        _ => &["t", "n", "d_n"],
    };
    let mut table = Table::new(header.iter().copied());
    for (&t, (up, down)) in times.iter().zip(&snaps) {
        for n in 0..basis.n_sites() {
            let (u, d) = (up.d[n], down.d[n]);
            let row = match opts.component {
                CloudComponent::Total => vec![t.into(), n.into(), (u + d).into()],
                CloudComponent::Up => vec![t.into(), n.into(), u.into()],
                CloudComponent::Down => vec![t.into(), n.into(), d.into()],
                CloudComponent::Split => vec![t.into(), n.into(), u.into(), d.into(), (u + d).into()],
            };
            table.push(row);
        }
    }
    let mut out = CommandOutput::single(table);
    out.notes.push(
        "d_n is built from q+_n q-_n, which is not a local observable: a qualitative picture of the cloud, \
         not a measurable site occupation"
            .into(),
    );
    out.summary.push(format!(
        "scheme={} component={}",
        scheme_name(opts.scheme),
        format!("{:?}", opts.component).to_lowercase()
    ));
    Ok(out)
}

fn oracle(file: &ScenarioFile) -> Result<CommandOutput, CliError> {
    let s = file.scenario()?;
    let opts = &file.run.oracle;
    let basis = file.system.basis()?;
    let epsilons = opts.epsilons.clone().unwrap_or_else(|| vec![s.epsilon]);
    if epsilons.is_empty() {
        return Err(CliError::Usage("`run.oracle.epsilons` is empty".into()));
    }
    let oracle_opts = OracleOptions {
        start_cutoff: opts.start_cutoff,
        max_cutoff: opts.max_cutoff,
        cutoff_tol: opts.cutoff_tol,
        step_fraction: opts.step_fraction,
    };
    let sweep = epsilon_sweep(&basis, s, &epsilons, &oracle_opts)?;
    let mut table = Table::new([
        "epsilon", "cutoff", "residual", "exact_re", "exact_im", "perturbative_re", "perturbative_im", "norm_drift",
    ]);
    for p in &sweep.points {
        table.push(vec![
            p.epsilon.into(),
            p.cutoff.into(),
            p.residual.into(),
            p.exact.re.into(),
            p.exact.im.into(),
            p.perturbative.re.into(),
            p.perturbative.im.into(),
            p.norm_drift.into(),
        ]);
    }
    let mut out = CommandOutput::single(table);
    out.summary.push(format!("residual log-log slope = {}", sweep.slope));
    Ok(out)
}
