//! Acceptance criteria 1-8, one line each. Every tolerance is pinned here
//! rather than read from library defaults.
//!
//! Checks listed in `KNOWN_FAILURES` are reported as FAIL and do not abort the
//! run; any other failure, or a known failure that starts passing, exits
//! non-zero.

use hlkernels::domain::DomainModel;
use hlkernels::kernels::{e1_model, nq};
use hlkernels::quad::{adjointness_sample, ratio_table, RatioSpec};
use hlkernels::typecalc::{admissible_type, descriptor_table, dgamma0q_descriptor, gamma0q_descriptor, isotropic_type};
use hlkernels::verify::{run_suite, slope_fit, SuiteConfig, SuiteReport, Thresholds};
use hlkernels::zalg::{
    certify_principal_part, derive_intmain, derive_mainint, expected_intmain, expected_mainint, matches_intmain, IntKind, MainPart,
};
use std::io::Write;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

/// Slope margin for sigma-order geometric claims: slope >= k - 0.1.
const SIGMA_MARGIN: f64 = 0.1;
/// Gain required of finite-difference kernel identities: slope >= main + 0.8.
const FD_MARGIN: f64 = 0.2;
const DBAR_Z_TOL: f64 = 1e-10;
const EXACT_TOL: f64 = 1e-12;
const LOWER_BOUND_DRIFT: f64 = 0.2;
const MORSE_TOL: f64 = 1e-10;
const FD_NOISE_FACTOR: f64 = 4.0;
const HARMONIC_TOL: f64 = 1e-5;
const ADJOINTNESS_SLOPE: f64 = 0.9;
const RATIO_GROWTH: f64 = 0.15;

/// `(criterion, domain, suite/check)` that fail for documented reasons.
const KNOWN_FAILURES: &[(u32, &str, &str)] = &[
    (3, "ball", "nkern/gamma gamma* |vartheta N_q - T*_{q-1}|"),
    (3, "pinched", "nkern/gamma gamma* |vartheta N_q - T*_{q-1}|"),
    (3, "ball", "nkern/tangential *N_q relative decay, normal approach"),
    (3, "pinched", "nkern/tangential *N_q relative decay, normal approach"),
    (4, "ball", "dgh/case c (j=n), L = [1]"),
    (4, "ball", "dgh/case c (j=n), L = [2]"),
    (4, "pinched", "dgh/case c (j=n), L = [1]"),
    (4, "pinched", "dgh/case c (j=n), L = [2]"),
    (4, "pinched", "dgh/case b (j<n), L = [1]"),
];

fn thresholds() -> Thresholds {
    Thresholds {
        version: 1,
        sigma_margin: SIGMA_MARGIN,
        fd_margin: FD_MARGIN,
        dbar_z_tol: DBAR_Z_TOL,
        exact_tol: EXACT_TOL,
        harmonic_tol: HARMONIC_TOL,
        morse_tol: MORSE_TOL,
        lower_bound_drift: LOWER_BOUND_DRIFT,
        fd_noise_factor: FD_NOISE_FACTOR,
    }
}

/// A named sub-check of a criterion.
struct Item {
    domain: String,
    name: String,
    pass: bool,
    detail: String,
}

struct Outcome {
    criterion: u32,
    title: &'static str,
    items: Vec<Item>,
    elapsed: Duration,
    budget: Duration,
}

impl Outcome {
    fn known(&self, it: &Item) -> bool {
        KNOWN_FAILURES.iter().any(|(c, d, n)| *c == self.criterion && *d == it.domain && *n == it.name)
    }

    fn pass(&self) -> bool {
        self.items.iter().all(|i| i.pass) && self.elapsed <= self.budget
    }

    /// No unexpected failure and no known failure that now passes.
    fn as_recorded(&self) -> bool {
        self.elapsed <= self.budget && self.items.iter().all(|i| i.pass != self.known(i))
    }

    fn line(&self) -> String {
        let failed: Vec<String> = self
            .items
            .iter()
            .filter(|i| !i.pass)
            .map(|i| format!("{}{} {} ({})", if self.known(i) { "known: " } else { "" }, i.domain, i.name, i.detail))
            .collect();
        let mut s = format!(
            "criterion {} {}: {} [{}/{} checks, {:.1}s of {}s]",
            self.criterion,
            self.title,
            if self.pass() { "PASS" } else { "FAIL" },
            self.items.iter().filter(|i| i.pass).count(),
            self.items.len(),
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        );
        if !failed.is_empty() {
            s += &format!(" failing: {}", failed.join("; "));
        }
        s
    }
}

fn item(domain: &str, name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Item {
    Item { domain: domain.into(), name: name.into(), pass, detail: detail.into() }
}

fn timed(criterion: u32, title: &'static str, budget_s: u64, f: impl FnOnce() -> Vec<Item>) -> Outcome {
    let t = Instant::now();
    let items = f();
    Outcome { criterion, title, items, elapsed: t.elapsed(), budget: Duration::from_secs(budget_s) }
}

fn suite(domain: &str, n: usize, q: usize, name: &str) -> Result<SuiteReport, String> {
    let mut cfg = SuiteConfig::new(domain, n, q);
    cfg.thresholds = thresholds();
    run_suite(name, &cfg).map_err(|e| e.to_string())
}

/// Items for the named checks of a suite (all checks when `only` is empty).
fn suite_items(domain: &str, n: usize, q: usize, name: &str, only: &dyn Fn(&str) -> bool) -> Vec<Item> {
    match suite(domain, n, q, name) {
        Ok(r) => r
            .checks
            .iter()
            .filter(|c| only(&c.check))
            .map(|c| {
                item(
                    &format!("{domain}"),
                    format!("{name}/{}", c.check),
                    c.pass,
                    format!("n={n} measured {:.4} required {:.4}", c.slope_measured, c.slope_required),
                )
            })
            .collect(),
        Err(e) => vec![item(domain, name, false, e)],
    }
}

fn criterion1() -> Outcome {
    timed(1, "type arithmetic", 1, || {
        let mut items = Vec::new();
        for n in 3..=6 {
            for e in descriptor_table(n) {
                let got = admissible_type(&e.descriptor, n);
                let want = e.family.expected_type();
                let name = format!("n={n} {:?} q={} mu={:?} {}", e.family, e.q, e.mu, e.term);
                items.push(item("-", name, got.as_ref() == Ok(&want), format!("type {got:?}, want {want}")));
            }
            let g = isotropic_type(&gamma0q_descriptor(n), n);
            let dg = isotropic_type(&dgamma0q_descriptor(n), n);
            items.push(item("-", format!("n={n} Gamma_0q isotropic type"), g == 2, format!("{g}")));
            items.push(item("-", format!("n={n} dbar Gamma_0q class type"), dg == 1, format!("{dg}")));
        }
        items
    })
}

fn criterion2() -> Outcome {
    timed(2, "geometric rates", 60, || {
        let mut items = Vec::new();
        for domain in ["ball", "pinched"] {
            for (n, q) in [(2, 0), (3, 1)] {
                for s in ["phisymm", "lphi", "lphi-ii-z"] {
                    items.extend(suite_items(domain, n, q, s, &|_| true));
                }
            }
        }
        items
    })
}

fn criterion3() -> Outcome {
    timed(3, "nkern rates", 600, || {
        let wanted = |c: &str| !c.contains("envelope");
        let mut items = suite_items("ball", 3, 1, "nkern", &wanted);
        items.extend(suite_items("pinched", 3, 1, "nkern", &wanted));
        items
    })
}

fn criterion4() -> Outcome {
    timed(4, "dbar G_L - H_L gain", 300, || {
        let wanted = |c: &str| c.starts_with("case");
        let mut items = suite_items("ball", 3, 1, "dgh", &wanted);
        items.extend(suite_items("pinched", 3, 1, "dgh", &wanted));
        items
    })
}

fn criterion5() -> Outcome {
    timed(5, "symbolic derivations", 1, || {
        let mut items = Vec::new();
        let parts = [MainPart::I, MainPart::II, MainPart::III];
        let kinds = [IntKind::N, IntKind::DbarN, IntKind::DbarStarN];
        for j in 1..=5 {
            for p in parts {
                let name = format!("mainint j={j} {p:?}");
                match derive_mainint(j, p) {
                    Ok(d) => {
                        let e = expected_mainint(j, p);
                        items.push(item("-", name.clone(), d.rhs == e, d.rhs_text.clone()));
                        items.push(item("-", format!("{name} gamma=1"), d.rhs.collapse_gamma() == e.collapse_gamma(), ""));
                    }
                    Err(e) => items.push(item("-", name, false, e.to_string())),
                }
            }
            for k in kinds {
                let name = format!("intmain j={j} {k:?}");
                match derive_intmain(k, j) {
                    Ok(d) => {
                        items.push(item("-", name.clone(), matches_intmain(&d.rhs, k, j), d.rhs_text.clone()));
                        let collapsed = d.rhs.collapse_gamma().terms == expected_intmain(k, j).collapse_gamma().terms;
                        items.push(item("-", format!("{name} gamma=1"), collapsed, ""));
                    }
                    Err(e) => items.push(item("-", name, false, e.to_string())),
                }
                let want = if k == IntKind::N { 2 } else { 1 };
                match certify_principal_part(k, j) {
                    Ok(c) => items.push(item("-", format!("principal part {k:?} j={j}"), c.certified() && c.head_type == want, format!("{c:?}"))),
                    Err(e) => items.push(item("-", format!("principal part {k:?} j={j}"), false, e.to_string())),
                }
            }
        }
        items
    })
}

fn criterion6() -> Outcome {
    timed(6, "adjointness of vartheta", 120, || {
        let dom = DomainModel::ball(2);
        let mut items = Vec::new();
        for q in [0, 1] {
            let samples: Result<Vec<_>, _> = [8, 10, 12, 14, 16].iter().map(|&r| adjointness_sample(&dom, r, q, 7)).collect();
            let name = format!("residual slope in h, q={q}");
            match samples {
                Ok(s) => {
                    let hs: Vec<f64> = s.iter().map(|x| x.h).collect();
                    let rs: Vec<f64> = s.iter().map(|x| x.residual).collect();
                    match slope_fit(&hs, &rs) {
                        Ok(f) => items.push(item("ball", name, f.slope >= ADJOINTNESS_SLOPE, format!("slope {:.3}, residuals {:?}", f.slope, rs.iter().map(|r| format!("{r:.2e}")).collect::<Vec<_>>()))),
                        Err(e) => items.push(item("ball", name, false, e.to_string())),
                    }
                }
                Err(e) => items.push(item("ball", name, false, e.to_string())),
            }
        }
        items
    })
}

fn criterion7() -> Outcome {
    timed(7, "mapping-ratio trends", 1800, || {
        let mut items = Vec::new();
        let e1 = RatioSpec {
            weight_out: 0.0,
            weight_in: 0.0,
            p: 2.0,
            s: 3.5,
            q: 0,
            trials: 8,
            resolutions: vec![8, 10, 12],
            eps: 0.1,
            targets: 32,
            seed: 11,
            threshold: None,
            sigma: 0.5,
        };
        let ball2 = DomainModel::ball(2);
        // 1/s > 1/p - 1/(2n) for E_{1-2n}.
        let e1_admissible = 1.0 / e1.s > 1.0 / e1.p - 1.0 / 4.0;
        match ratio_table(&e1_model(2), &ball2, &e1) {
            Ok(t) => items.push(item(
                "ball",
                "E1 n=2 p=2 s=3.5",
                e1_admissible && t.max_growth() <= RATIO_GROWTH,
                format!("max ratios {:?}, growth {:.3}", t.max_by_resolution, t.max_growth()),
            )),
            Err(e) => items.push(item("ball", "E1 n=2 p=2 s=3.5", false, e.to_string())),
        }
        let n = 3;
        let n1 = RatioSpec {
            weight_out: 3.0 * (n as f64 + 2.0),
            weight_in: 2.0,
            p: 2.0,
            s: 3.5,
            q: 1,
            trials: 8,
            resolutions: vec![6, 7, 8],
            eps: 0.05,
            targets: 16,
            seed: 3,
            threshold: None,
            sigma: 0.5,
        };
        // 1/s > 1/p - 1/(n+1) for the weighted N_q estimate.
        let n1_admissible = 1.0 / n1.s > 1.0 / n1.p - 1.0 / (n as f64 + 1.0);
        let ball3 = Arc::new(DomainModel::ball(n));
        match ratio_table(&nq(&ball3, 1), &ball3, &n1) {
            Ok(t) => items.push(item(
                "ball",
                "N_1 n=3 p=2 s=3.5 a=15 b=2",
                n1_admissible && t.max_growth() <= RATIO_GROWTH,
                format!("max ratios {:?}, growth {:.3}", t.max_by_resolution, t.max_growth()),
            )),
            Err(e) => items.push(item("ball", "N_1 n=3 p=2 s=3.5 a=15 b=2", false, e.to_string())),
        }
        items
    })
}

fn criterion8() -> Outcome {
    timed(8, "Morse structure", 1, || {
        let mut items = suite_items("pinched", 2, 0, "morse", &|_| true);
        let dom = DomainModel::pinched(2).expect("pinched n=2");
        let mut ev: Vec<f64> = dom.hessian_eigenvalues(&[Default::default(), Default::default()]).iter().map(|e| -e).collect();
        ev.sort_by(f64::total_cmp);
        let want = [-6.0, -2.0, -2.0, 2.0];
        let err = ev.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        items.push(item("pinched", "Hessian of -r is (2, -6, -2, -2)", err <= MORSE_TOL && ev.len() == 4, format!("{ev:?}")));
        items
    })
}

fn main() -> ExitCode {
    let runs: [fn() -> Outcome; 8] = [criterion1, criterion2, criterion3, criterion4, criterion5, criterion6, criterion7, criterion8];
    let mut ok = true;
    let mut err = std::io::stderr();
    for run in runs {
        let o = run();
        ok &= o.as_recorded();
        // Written directly so the lines show without --nocapture.
        let _ = writeln!(err, "{}", o.line());
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        let _ = writeln!(err, "acceptance: outcome differs from the recorded known failures");
        ExitCode::FAILURE
    }
}
