//! The five subcommands: estimate, delay, simulate, compare, sweep.

use serde::Serialize;

use blockline_core::{
    block_delay_dist, occupancy_distribution, run_simulation, solve_fixed_point, DelayOptions,
    FixedPointOptions, NetworkConfig, Pmf, SampleInstant, Schedule, SimConfig, SimReport,
    Solution,
};

use crate::config::{apply_axis, Command, RunSpec};
use crate::error::{CliError, CliResult};
use crate::output::{num, Csv, OutDir};

const FORMAT_VERSION: u32 = 1;

pub fn run(spec: &RunSpec) -> CliResult<()> {
    let out = OutDir::new(&spec.out_dir)?;
    // Reproducibility record: the fully resolved spec round-trips.
    out.write("run_spec.json", &spec.emit())?;
    match spec.command {
        Command::Estimate => cmd_estimate(spec, &out),
        Command::Delay => cmd_delay(spec, &out),
        Command::Simulate => cmd_simulate(spec, &out),
        Command::Compare => cmd_compare(spec, &out),
        Command::Sweep => cmd_sweep(spec, &out),
    }
}

fn fixed_point_options(spec: &RunSpec) -> FixedPointOptions {
    FixedPointOptions {
        tol: spec.tol,
        max_iter: spec.max_iter,
        schedule: if spec.gauss_seidel {
            Schedule::GaussSeidel
        } else {
            Schedule::Jacobi
        },
        ..Default::default()
    }
}

fn solve(spec: &RunSpec, net: &NetworkConfig) -> CliResult<Solution> {
    solve_fixed_point(net, &fixed_point_options(spec)).map_err(CliError::from)
}

fn require_sim(spec: &RunSpec) -> CliResult<SimConfig> {
    spec.sim.clone().ok_or_else(|| {
        CliError::Config(
            "this command needs simulation settings (a \"sim\" section or --epochs)".into(),
        )
    })
}

#[derive(Serialize)]
struct EstimateReport<'a> {
    format_version: u32,
    r: &'a [f64],
    p_b: &'a [f64],
    throughput: f64,
    iterations: usize,
    residual: f64,
}

impl<'a> EstimateReport<'a> {
    fn new(sol: &'a Solution) -> Self {
        EstimateReport {
            format_version: FORMAT_VERSION,
            r: &sol.arrival_rates,
            p_b: &sol.blocking,
            throughput: sol.throughput(),
            iterations: sol.iterations,
            residual: sol.residual,
        }
    }
}

fn cmd_estimate(spec: &RunSpec, out: &OutDir) -> CliResult<()> {
    let net = spec.network.resolve()?;
    let sol = solve(spec, &net)?;
    let path = out.write_json("estimate.json", &EstimateReport::new(&sol))?;
    println!(
        "throughput {:.6} after {} iterations (residual {:.3e}) -> {}",
        sol.throughput(),
        sol.iterations,
        sol.residual,
        path.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct DelayReport<'a> {
    format_version: u32,
    r: &'a [f64],
    p_b: &'a [f64],
    throughput: f64,
    iterations: usize,
    residual: f64,
    delay_mean: f64,
    delay_std: f64,
    tail_tol: f64,
}

fn cmd_delay(spec: &RunSpec, out: &OutDir) -> CliResult<()> {
    let net = spec.network.resolve()?;
    let sol = solve(spec, &net)?;
    let profile = block_delay_dist(&sol, &DelayOptions { tail_tol: spec.tail_tol })?;
    let report = DelayReport {
        format_version: FORMAT_VERSION,
        r: &sol.arrival_rates,
        p_b: &sol.blocking,
        throughput: sol.throughput(),
        iterations: sol.iterations,
        residual: sol.residual,
        delay_mean: profile.mean,
        delay_std: profile.std,
        tail_tol: spec.tail_tol,
    };
    out.write_json("delay.json", &report)?;
    let mut csv = Csv::new("delay_epochs,probability");
    for (n, p) in profile.block_delay.iter() {
        csv.row(&[n.to_string(), num(p)]);
    }
    let path = out.write("delay_profile.csv", &csv.finish())?;
    println!(
        "block delay mean {:.3} std {:.3} epochs -> {}",
        profile.mean,
        profile.std,
        path.display()
    );
    Ok(())
}

fn cmd_simulate(spec: &RunSpec, out: &OutDir) -> CliResult<()> {
    let net = spec.network.resolve()?;
    let sim = require_sim(spec)?;
    let report = run_simulation(&net, &sim)?;
    for (i, rep) in report.replications.iter().enumerate() {
        let mut csv = Csv::new("block_id,start_epoch,end_epoch,delay");
        for s in &rep.delay_samples {
            csv.row(&[
                s.block_id.to_string(),
                s.start_epoch.to_string(),
                s.end_epoch.to_string(),
                s.delay().to_string(),
            ]);
        }
        out.write(&format!("delays_rep{i}.csv"), &csv.finish())?;
    }
    let path = out.write_json("sim_report.json", &report)?;
    println!(
        "simulated throughput {:.6} (stderr {:.2e}) over {} replications -> {}",
        report.throughput,
        report.throughput_stderr,
        report.replications.len(),
        path.display()
    );
    Ok(())
}

fn sim_delay_pmf(report: &SimReport) -> Option<Pmf> {
    if report.delay_hist.is_empty() {
        return None;
    }
    let total: u64 = report.delay_hist.values().sum();
    let lo = *report.delay_hist.keys().next().unwrap() as usize;
    let hi = *report.delay_hist.keys().last().unwrap() as usize;
    let mut mass = vec![0.0; hi - lo + 1];
    for (&d, &c) in &report.delay_hist {
        mass[d as usize - lo] = c as f64 / total as f64;
    }
    Some(Pmf::from_parts(lo, mass).expect("histogram is a valid PMF"))
}

#[derive(Serialize)]
struct NodeTv {
    node: usize,
    post_transmit_tv: f64,
    post_receive_tv: f64,
}

#[derive(Serialize)]
struct CompareReport {
    format_version: u32,
    throughput_est: f64,
    throughput_sim: f64,
    abs_diff: f64,
    delay_mean_est: f64,
    delay_mean_sim: Option<f64>,
    delay_tv_distance: Option<f64>,
    occupancy_tv: Vec<NodeTv>,
}

fn tv(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / 2.0
}

fn cmd_compare(spec: &RunSpec, out: &OutDir) -> CliResult<()> {
    let net = spec.network.resolve()?;
    let sim = require_sim(spec)?;
    let sol = solve(spec, &net)?;
    let profile = block_delay_dist(&sol, &DelayOptions { tail_tol: spec.tail_tol })?;
    let report = run_simulation(&net, &sim)?;

    let sim_pmf = sim_delay_pmf(&report);
    let delay_tv = sim_pmf
        .as_ref()
        .map(|p| profile.block_delay.total_variation(p));
    let mut occupancy_tv = Vec::new();
    for node in 1..net.hops() {
        let post_transmit =
            occupancy_distribution(&report, node, SampleInstant::PostTransmit)?;
        let post_receive = occupancy_distribution(&report, node, SampleInstant::PostReceive)?;
        occupancy_tv.push(NodeTv {
            node,
            post_transmit_tv: tv(sol.rf_dist(node).probs(), &post_transmit),
            post_receive_tv: tv(sol.tf_dist(node).probs(), &post_receive),
        });
    }
    let compare = CompareReport {
        format_version: FORMAT_VERSION,
        throughput_est: sol.throughput(),
        throughput_sim: report.throughput,
        abs_diff: (sol.throughput() - report.throughput).abs(),
        delay_mean_est: profile.mean,
        delay_mean_sim: report.delay_mean(),
        delay_tv_distance: delay_tv,
        occupancy_tv,
    };
    let path = out.write_json("compare.json", &compare)?;

    if let Some(sim_pmf) = &sim_pmf {
        let lo = profile.block_delay.offset().min(sim_pmf.offset());
        let hi = profile.block_delay.end().max(sim_pmf.end());
        let mut csv = Csv::new("delay_epochs,prob_est,prob_sim");
        for n in lo..hi {
            csv.row(&[
                n.to_string(),
                num(profile.block_delay.mass_at(n)),
                num(sim_pmf.mass_at(n)),
            ]);
        }
        out.write("delay_compare.csv", &csv.finish())?;
    }
    println!(
        "throughput est {:.6} sim {:.6} (diff {:.2e}) -> {}",
        compare.throughput_est,
        compare.throughput_sim,
        compare.abs_diff,
        path.display()
    );
    Ok(())
}

fn cmd_sweep(spec: &RunSpec, out: &OutDir) -> CliResult<()> {
    let axis = spec
        .sweep
        .clone()
        .ok_or_else(|| CliError::Config("sweep command needs a \"sweep\" section".into()))?;
    let mut csv = Csv::new("m,K,eps,throughput_est,throughput_sim,delay_mean_est,delay_mean_sim");
    for (i, &value) in axis.values.iter().enumerate() {
        let net = apply_axis(&spec.network, &axis, value)?;
        let sol = solve(spec, &net)?;
        let profile = block_delay_dist(&sol, &DelayOptions { tail_tol: spec.tail_tol })?;
        let (tput_sim, delay_sim) = match &spec.sim {
            Some(sim) => {
                // Distinct deterministic substream per sweep point.
                let mut sim = sim.clone();
                sim.seed = sim.seed.wrapping_add(i as u64);
                sim.record_samples = false;
                let report = run_simulation(&net, &sim)?;
                (Some(report.throughput), report.delay_mean())
            }
            None => (None, None),
        };
        csv.row(&[
            net.buffer_packets(1).to_string(),
            net.block_size.to_string(),
            num(net.erasures[0]),
            num(sol.throughput()),
            tput_sim.map(num).unwrap_or_default(),
            num(profile.mean),
            delay_sim.map(num).unwrap_or_default(),
        ]);
    }
    let path = out.write("sweep.csv", &csv.finish())?;
    println!(
        "swept {} over {} values -> {}",
        axis.param,
        axis.values.len(),
        path.display()
    );
    Ok(())
}
