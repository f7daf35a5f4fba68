//! Benchmark acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits with a failure status if any criterion fails.
//!
//! Reference solutions are cached under `$NONLOCAL_NT_REFERENCE_CACHE`, or the
//! cargo target temporary directory when unset. Positional arguments select
//! criteria by number.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use nonlocal_nt::harness::{
    compare, convergence_study, entropy_residuals, monitor_csv, report_csv, run_simulation, snapshot_csv,
    ConvergenceReport, Experiment, Preset, ReferenceCache,
};
use nonlocal_nt::kernels::{KernelShape, QuadratureWeights};
use nonlocal_nt::limiters::minmod;
use nonlocal_nt::models::ModelKind;
use nonlocal_nt::schemes::SchemeId;
use nonlocal_nt::time::StepMode;
use nonlocal_nt::Result;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Accumulates sub-checks of one criterion.
#[derive(Default)]
struct Check {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Check {
    fn expect(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn note(&mut self, what: impl Into<String>) {
        self.notes.push(what.into());
    }

    fn within_factor(&mut self, label: &str, value: f64, target: f64, factor: f64) {
        self.expect(
            value.is_finite() && value <= target * factor && value >= target / factor,
            format!("{label}: {value:.3e} not within x/{factor} of {target:.3e}"),
        );
    }

    fn within(&mut self, label: &str, value: f64, target: f64, tol: f64) {
        self.expect(
            (value - target).abs() <= tol,
            format!("{label}: {value:.3} not within {tol} of {target}"),
        );
    }
}

type Criterion = fn(&ReferenceCache, &mut Check) -> Result<()>;

fn table(name: &str) -> Result<Vec<Experiment>> {
    Ok(Preset::load(name)?.experiments)
}

fn study(exp: &Experiment, cache: &ReferenceCache) -> Result<ConvergenceReport> {
    convergence_study(exp, cache)
}

fn fmt_series(xs: &[f64], prec: usize) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.prec$}")).collect();
    parts.join(" ")
}

const KK_ERRORS: [[f64; 6]; 4] = [
    [8.53e-02, 4.56e-02, 2.37e-02, 1.21e-02, 6.09e-03, 3.06e-03],
    [1.15e-02, 3.61e-03, 1.01e-03, 2.71e-04, 7.01e-05, 1.75e-05],
    [1.77e-02, 5.52e-03, 1.56e-03, 4.25e-04, 1.10e-04, 2.77e-05],
    [1.76e-02, 5.51e-03, 1.56e-03, 4.24e-04, 1.10e-04, 2.77e-05],
];
const KK_SCHEMES: [SchemeId; 4] = [SchemeId::Lxf1, SchemeId::Lxf2, SchemeId::NtV1, SchemeId::NtV2];
const KK_NT_RATES: [f64; 5] = [1.68, 1.82, 1.88, 1.95, 1.99];
const KK_LXF_RATES: [f64; 5] = [0.90, 0.95, 0.97, 0.99, 0.99];

fn keyfitz_kranzer(cache: &ReferenceCache, c: &mut Check) -> Result<()> {
    let rep = study(&table("table-kk")?[0], cache)?;
    for (scheme, targets) in KK_SCHEMES.iter().zip(KK_ERRORS) {
        let errs = rep.errors(*scheme);
        for (n, (e, t)) in errs.iter().zip(targets).enumerate() {
            c.within_factor(&format!("{scheme} n={n}"), *e, t, 2.0);
        }
    }
    let nt = rep.rates(SchemeId::NtV1);
    let lxf = rep.rates(SchemeId::Lxf1);
    for n in 0..5 {
        c.within(&format!("nt-v1 rate n={}", n + 1), nt[n], KK_NT_RATES[n], 0.15);
        c.within(&format!("lxf1 rate n={}", n + 1), lxf[n], KK_LXF_RATES[n], 0.15);
    }
    c.note(format!("nt-v1 rates {}", fmt_series(&nt, 2)));
    c.note(format!("lxf1 rates {}", fmt_series(&lxf, 2)));
    c.note(format!("nt-v1 n=5 {:.3e}", rep.errors(SchemeId::NtV1)[5]));
    Ok(())
}

fn arrhenius(cache: &ReferenceCache, c: &mut Check) -> Result<()> {
    let targets = [
        (KernelShape::Constant, 9.85e-06, 1.95),
        (KernelShape::Linear, 9.28e-06, 1.96),
        (KernelShape::Concave, 9.41e-06, 1.95),
    ];
    for exp in table("table-arrhenius")? {
        let kernel = exp.kernel();
        let (_, err5, rate5) = targets
            .iter()
            .copied()
            .find(|(k, _, _)| *k == kernel)
            .expect("kernel listed");
        let rep = study(&exp, cache)?;
        let v1 = rep.errors(SchemeId::NtV1);
        let v2 = rep.errors(SchemeId::NtV2);
        c.within_factor(&format!("{kernel} nt-v2 n=5"), v2[5], err5, 2.0);
        c.within(
            &format!("{kernel} nt-v2 rate n=5"),
            rep.rates(SchemeId::NtV2)[4],
            rate5,
            0.15,
        );
        for (n, (a, b)) in v1.iter().zip(&v2).enumerate() {
            c.expect(b <= a, format!("{kernel} n={n}: v2 {b:.4e} > v1 {a:.4e}"));
        }
        c.note(format!(
            "{kernel}: nt-v2 n=5 {:.3e} rate {:.2}",
            v2[5],
            rep.rates(SchemeId::NtV2)[4]
        ));
    }
    Ok(())
}

fn single_table(
    cache: &ReferenceCache,
    c: &mut Check,
    preset: &str,
    scheme: SchemeId,
    err5: f64,
    rate5: f64,
) -> Result<ConvergenceReport> {
    let rep = study(&table(preset)?[0], cache)?;
    let errs = rep.errors(scheme);
    let rates = rep.rates(scheme);
    c.within_factor(&format!("{scheme} n=5"), errs[5], err5, 2.0);
    c.within(&format!("{scheme} rate n=5"), rates[4], rate5, 0.15);
    c.note(format!("{scheme} n=5 {:.3e} rates {}", errs[5], fmt_series(&rates, 2)));
    Ok(rep)
}

fn multilane(cache: &ReferenceCache, c: &mut Check) -> Result<()> {
    single_table(cache, c, "table-multilane", SchemeId::NtV2, 2.18e-04, 1.90)?;
    let exp = &table("table-multilane")?[0];
    let run = run_simulation(exp, SchemeId::NtV2, 0)?;
    let first = &run.log.entries[0].mass;
    let last = &run.log.entries.last().expect("monitor entries").mass;
    let exchange = (last[0] - first[0]).abs() / first[0];
    let total_drift = ((last[0] + last[1]) - (first[0] + first[1])).abs() / (first[0] + first[1]);
    c.expect(exchange > 1e-3, format!("lane exchange {exchange:.2e} too small"));
    c.expect(total_drift <= 1e-11, format!("total mass drift {total_drift:.2e}"));
    c.note(format!(
        "lane-1 mass exchange {exchange:.2e}, total drift {total_drift:.1e}"
    ));
    Ok(())
}

fn euler(cache: &ReferenceCache, c: &mut Check) -> Result<()> {
    single_table(cache, c, "table-euler", SchemeId::NtV1, 2.51e-05, 1.91).map(|_| ())
}

fn garz(cache: &ReferenceCache, c: &mut Check) -> Result<()> {
    single_table(cache, c, "table-garz", SchemeId::NtV1, 3.42e-04, 1.85).map(|_| ())
}

fn figures(cache: &ReferenceCache, c: &mut Check) -> Result<()> {
    for name in [
        "figure-kk",
        "figure-arrhenius",
        "figure-multilane",
        "figure-euler",
        "figure-garz",
    ] {
        for exp in Preset::load(name)?.experiments {
            let cmp = compare(&exp, Preset::figure_level(&exp), cache)?;
            let err = |s: SchemeId| {
                cmp.runs
                    .iter()
                    .zip(&cmp.errors)
                    .find(|(r, _)| r.scheme == s)
                    .map(|(_, e)| *e)
            };
            let lxf1 = err(SchemeId::Lxf1).expect("lxf1 run");
            let mut line = format!("{name}: lxf1 {lxf1:.3e}");
            for s in [SchemeId::Lxf2, SchemeId::NtV1, SchemeId::NtV2] {
                if let Some(e) = err(s) {
                    c.expect(lxf1 > e, format!("{name}: lxf1 {lxf1:.3e} <= {s} {e:.3e}"));
                    let _ = write!(line, ", {s} {e:.3e}");
                }
            }
            c.note(line);
        }
    }
    Ok(())
}

fn properties(_cache: &ReferenceCache, c: &mut Check) -> Result<()> {
    // Mass conservation without sources on periodic domains.
    for (preset, level) in [("table-kk", 3), ("table-arrhenius", 3), ("table-garz", 3)] {
        let exp = &table(preset)?[0];
        for scheme in exp.schemes()? {
            let run = run_simulation(exp, scheme, level)?;
            let drift = run.log.max_relative_mass_drift();
            c.expect(drift <= 1e-11, format!("{preset} {scheme}: mass drift {drift:.2e}"));
        }
    }

    // Constant states are fixed points. The Euler relaxation term vanishes on
    // constants only up to the O(dx^2) weight-sum error of its kernel.
    for kind in ModelKind::ALL {
        if kind == ModelKind::NonlocalEuler {
            continue;
        }
        let species = kind.build(kind.default_eta(), kind.default_kernel())?.species();
        let consts = vec!["0.3".to_string(); species];
        let mut exp = Experiment::new(kind, "kk-smooth", [-1.0, 1.0], 0.05);
        exp.initial = nonlocal_nt::harness::InitialSpec::Inline {
            exprs: consts.clone(),
            breakpoints: Vec::new(),
        };
        for scheme in exp.schemes()? {
            let run = run_simulation(&exp, scheme, 2)?;
            let dev = run
                .state
                .values()
                .iter()
                .zip(&consts)
                .flat_map(|(v, c)| {
                    let c: f64 = c.parse().expect("constant");
                    v.iter().map(move |x| (x - c).abs())
                })
                .fold(0.0, f64::max);
            c.expect(
                dev <= 1e-13,
                format!("{kind:?} {scheme}: constant state moved by {dev:.2e}"),
            );
        }
    }

    // Minmod algebra.
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut bad = 0usize;
    for _ in 0..100_000 {
        let a: f64 = rng.gen_range(-10.0..10.0);
        let b: f64 = if rng.gen_bool(0.05) {
            a
        } else {
            rng.gen_range(-10.0..10.0)
        };
        let s: f64 = rng.gen_range(0.01..100.0);
        let m = minmod(a, b);
        let ok = m == minmod(b, a)
            && m.abs() <= a.abs().min(b.abs())
            && (a * b > 0.0 || m == 0.0)
            && (m == 0.0 || m.signum() == a.signum())
            && (m == a || m == b || m == 0.0)
            && minmod(-a, -b) == -m
            && minmod(s * a, s * b) == s * m
            && minmod(a, a) == a;
        bad += usize::from(!ok);
    }
    c.expect(bad == 0, format!("minmod violated on {bad} random pairs"));

    // Kernel weight sums.
    for shape in [KernelShape::Constant, KernelShape::Linear] {
        for dx in [0.05, 0.025, 0.0125] {
            let w = QuadratureWeights::build(&shape.build(0.2)?, dx)?;
            c.expect(
                (w.sum() - 1.0).abs() <= 1e-13,
                format!("{shape} weights sum to {} at dx {dx}", w.sum()),
            );
        }
    }
    for (shape, eta) in [
        (KernelShape::Concave, 0.2),
        (KernelShape::SymmetricParabola, 0.05),
        (KernelShape::KkPower52Ahead, 0.5),
    ] {
        let kernel = shape.build(eta)?;
        let errs: Vec<f64> = (2..6)
            .map(|n| {
                let dx = eta / (2.0f64).powi(n);
                QuadratureWeights::build(&kernel, dx).map(|w| (w.sum() - 1.0).abs())
            })
            .collect::<Result<_>>()?;
        let orders: Vec<f64> = errs.windows(2).map(|p| (p[0] / p[1]).log2()).collect();
        c.expect(
            orders.iter().all(|o| *o >= 1.8),
            format!("{shape} weight-sum orders {}", fmt_series(&orders, 2)),
        );
    }

    // Positivity of the lane model under the positivity-preserving step.
    let mut exp = Preset::load("figure-multilane")?.experiments.remove(0);
    exp.step_mode = StepMode::PositivityPreserving { tau: 0.1, kappa: 0.1 };
    for scheme in [SchemeId::NtV1, SchemeId::NtV2] {
        let run = run_simulation(&exp, scheme, 0)?;
        let min = run.log.global_min();
        c.expect(min >= -1e-13, format!("multilane {scheme}: minimum {min:.3e}"));
    }

    // Discrete entropy inequalities for the scalar model.
    let exp = Preset::load("figure-arrhenius")?.experiments.remove(0);
    let mut short = exp.clone();
    short.t_final = 0.25;
    let zetas = [0.1, 0.2, 0.35, 0.6, 0.9, 1.0];
    let worst = entropy_residuals(&short, SchemeId::NtV2, 1, &zetas)?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    c.expect(worst <= 1e-10, format!("entropy residual {worst:.3e}"));
    c.note(format!("max entropy residual {worst:.2e}"));

    // Slope variants approach each other at least linearly.
    let exp = &table("table-arrhenius")?[0];
    let diffs: Vec<f64> = (0..5)
        .map(|level| {
            let a = run_simulation(exp, SchemeId::NtV1, level)?;
            let b = run_simulation(exp, SchemeId::NtV2, level)?;
            nonlocal_nt::harness::l1_error(&a.state, &b.state, &a.grid)
        })
        .collect::<Result<_>>()?;
    let orders: Vec<f64> = diffs.windows(2).map(|p| (p[0] / p[1]).log2()).collect();
    c.expect(
        orders.iter().all(|o| *o >= 1.0),
        format!("v1/v2 difference orders {}", fmt_series(&orders, 2)),
    );
    c.note(format!("v1/v2 difference orders {}", fmt_series(&orders, 2)));
    Ok(())
}

fn determinism(_cache: &ReferenceCache, c: &mut Check) -> Result<()> {
    let produce = || -> Result<String> {
        let mut out = String::new();
        let exp = Preset::load("figure-garz")?.experiments.remove(0);
        let model = exp.build_model()?;
        for scheme in exp.schemes()? {
            let run = run_simulation(&exp, scheme, 0)?;
            out.push_str(&snapshot_csv(model.as_ref(), &run.grid, &run.state));
            out.push_str(&monitor_csv(model.as_ref(), &run.log));
        }
        let mut exp = table("table-multilane")?.remove(0);
        exp.levels = vec![0, 1, 2];
        exp.reference_level = 4;
        out.push_str(&report_csv(&convergence_study(&exp, &ReferenceCache::disabled())?));
        Ok(out)
    };
    let first = produce()?;
    let second = produce()?;
    c.expect(first == second, "repeated runs produced different CSV bytes");
    c.note(format!("{} bytes compared", first.len()));
    Ok(())
}

fn cache_dir() -> PathBuf {
    std::env::var_os("NONLOCAL_NT_REFERENCE_CACHE")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("references"))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, Criterion); 8] = [
        (1, "keyfitz-kranzer convergence", keyfitz_kranzer),
        (2, "arrhenius convergence, three kernels", arrhenius),
        (3, "multilane convergence", multilane),
        (4, "nonlocal euler convergence", euler),
        (5, "garz convergence", garz),
        (6, "discontinuous benchmarks, lxf1 most diffusive", figures),
        (7, "property suite", properties),
        (8, "byte-identical repeated runs", determinism),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let cache = ReferenceCache::at(cache_dir());
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let mut check = Check::default();
        if let Err(e) = run(&cache, &mut check) {
            check.failures.push(format!("error: {e}"));
        }
        let secs = start.elapsed().as_secs_f64();
        let status = if check.failures.is_empty() { "PASS" } else { "FAIL" };
        println!("{status} {id} {name} ({secs:.1}s)");
        for note in &check.notes {
            println!("       {note}");
        }
        for f in &check.failures {
            println!("       failed: {f}");
        }
        failed += usize::from(!check.failures.is_empty());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
