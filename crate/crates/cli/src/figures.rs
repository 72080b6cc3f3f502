//! Figure-data bindings. Each id fixes the parameters of one published
//! panel; only output settings are taken from the user's configuration.

use nanofiber_cavity::fiber_modes::FiberSpec;

use crate::commands::{
    axial_period_nm, base_table, delay_params, rates_table, run_trace, shared_step, solve_mode,
    thinned, trace_diagnostics, Sweep, SweepParam,
};
use crate::config::{RunConfig, Tune};
use crate::error::CliError;
use crate::output::{Cell, Table};

pub const IDS: &[&str] = &[
    "2a", "2b", "3a", "3b", "4a", "4b", "5a", "5b", "6a", "6b", "7a", "7b", "8a", "8b", "9a", "9b",
    "10a", "10b", "10c", "10d", "10e", "10f", "11",
];

/// Absorption of silica used for the long cavities of Fig. 10, 1/cm.
const SILICA_ALPHA_PER_CM: f64 = 1e-5;

/// Caption parameters shared by every figure: a = 200 nm, n1 = 1.45,
/// n2 = 1, λ0 = 852 nm, |R|² = 0.9, r = a, z = 0, q = +1, even resonance.
fn caption_defaults(user: &RunConfig) -> RunConfig {
    RunConfig {
        sim_oscillation_floor: user.sim_oscillation_floor,
        sim_max_rows: user.sim_max_rows,
        output_format: user.output_format,
        output_path: user.output_path.clone(),
        output_precision: user.output_precision,
        ..RunConfig::default()
    }
}

pub fn figure(id: &str, user: &RunConfig) -> Result<Table, CliError> {
    if !IDS.contains(&id) {
        return Err(CliError::config(
            "figure",
            format!("unknown figure id `{id}`; known ids: {}", IDS.join(", ")),
        ));
    }
    let cfg = caption_defaults(user);
    let (num, panel) = id.split_at(id.find(|c: char| c.is_ascii_alphabetic()).unwrap_or(id.len()));
    let num: u32 = num.parse().expect("ids start with a number");
    let mut t = match num {
        2..=7 => rate_figure(num, panel, cfg)?,
        8 | 9 => {
            let mut c = cfg;
            c.cavity_l_m = if num == 8 { 0.2 } else { 2e-3 };
            c.cavity_tune = if panel == "a" { Tune::Even } else { Tune::Odd };
            let t_max = if num == 8 { 5.0 } else { 2.0 };
            decay_figure(vec![("P", c)], t_max, true)?
        }
        10 => {
            let i = (panel.as_bytes()[0] - b'a') as usize;
            let lengths = [100.0, 10.0, 1.0, 0.1, 0.01, 1e-3];
            let t_max = [40.0, 15.0, 10.0, 5.0, 2.0, 0.5];
            let mut c = cfg;
            c.cavity_l_m = lengths[i];
            if i < 3 {
                c.cavity_alpha_per_cm = SILICA_ALPHA_PER_CM;
            }
            decay_figure(vec![("P", c)], t_max[i], true)?
        }
        11 => {
            let curves = [("P_r0", 0.0), ("P_r50", 50.0), ("P_r100", 100.0)]
                .into_iter()
                .map(|(name, d)| {
                    let mut c = cfg.clone();
                    c.cavity_l_m = 0.1;
                    c.atom_r_nm = c.fiber_radius_nm + d;
                    (name, c)
                })
                .collect();
            decay_figure(curves, 5.0, false)?
        }
        _ => unreachable!("ids are checked above"),
    };
    t.title = format!("figure {id}");
    Ok(t)
}

fn rate_figure(num: u32, panel: &str, mut cfg: RunConfig) -> Result<Table, CliError> {
    // Figs. 6 and 7 keep the cavity of Fig. 4 and turn the dipole along z.
    let axial = num == 6 || num == 7;
    if axial {
        cfg.atom_q = 0;
    }
    let mode = solve_mode(&cfg, &FiberSpec::default())?;
    let period = axial_period_nm(&mode);
    let a = cfg.fiber_radius_nm;
    let sweep = match (num, panel) {
        (2 | 3, "a") => Sweep {
            param: SweepParam::R2,
            from: 0.0,
            to: 0.99,
            points: 100,
        },
        (2 | 3, _) => Sweep {
            param: SweepParam::A,
            from: 100.0,
            to: 400.0,
            points: 61,
        },
        (_, "a") => Sweep {
            param: SweepParam::Z,
            from: -period,
            to: period,
            points: 201,
        },
        _ => {
            if axial {
                // β0 z = π/2.
                cfg.atom_z_nm = 0.5 * period;
            }
            Sweep {
                param: SweepParam::R,
                from: a,
                to: a + 800.0,
                points: 81,
            }
        }
    };
    let full = rates_table(&cfg, Some(sweep), 1)?;
    let x = full.columns[0].name.clone();
    let mut t = if matches!(num, 2 | 4 | 6) {
        full.select(&[&x, "Gamma", "gamma_cavgyd", "gamma_rad"])
    } else {
        full.select(&[&x, "eta"])
    };
    t.param("figure.axial_period_nm", period);
    if axial {
        t.note("cavity length tuned for the q = +1 even resonance; the axial dipole then sees an odd resonance");
    }
    Ok(t)
}

fn decay_figure(curves: Vec<(&str, RunConfig)>, t_max: f64, with_free: bool) -> Result<Table, CliError> {
    let mut setups = Vec::new();
    for (_, c) in &curves {
        c.validate()?;
        setups.push(delay_params(c, c.atom_q)?);
    }
    let params: Vec<_> = setups.iter().map(|s| s.0).collect();
    let h = shared_step(&params, t_max);
    let traces = params
        .iter()
        .map(|p| run_trace(p, t_max, Some(h)))
        .collect::<Result<Vec<_>, _>>()?;

    let first = &curves[0].1;
    let mut t = base_table(
        "figure",
        &RunConfig {
            sim_t_max_gamma0: t_max,
            ..first.clone()
        },
    );
    t.param("cavity.tuned_L_m", setups[0].2.length_m);
    for ((name, cfg), (p, rates, _)) in curves.iter().zip(&setups) {
        t.param(format!("{name}.atom.r_nm"), cfg.atom_r_nm);
        t.param(format!("{name}.gamma_gyd [gamma0]"), rates.gamma_gyd);
        t.param(format!("{name}.gamma_rad [gamma0]"), rates.gamma_rad);
        t.param(format!("{name}.tau_L [1/gamma0]"), p.tau_l);
    }
    t.column("t", "1/gamma0");
    t.column("t_s", "s");
    for (name, _) in &curves {
        t.column(name, "1");
    }
    if with_free {
        t.column("P_free", "1");
    }
    let g0 = first.gamma0_phys();
    let gamma = setups[0].1.gamma_total_free;
    for i in thinned(traces[0].len(), first.sim_max_rows) {
        let time = traces[0].times[i];
        let mut row = vec![Cell::from(time), Cell::from(time / g0)];
        row.extend(traces.iter().map(|tr| Cell::from(tr.population[i])));
        if with_free {
            row.push((-gamma * time).exp().into());
        }
        t.push(row);
    }
    for ((name, _), tr) in curves.iter().zip(&traces) {
        trace_diagnostics(&mut t, &format!("{name}."), tr, first.sim_oscillation_floor);
    }
    Ok(t)
}
