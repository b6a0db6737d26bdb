//! Acceptance suite: the crate's exit gate.
//!
//! Runs every criterion at its fixed tolerance and prints one `PASS`/`FAIL`
//! line each (use `-- --nocapture` to watch progress). Training-backed
//! criteria use seeds 1–3 and are judged on the median. The whole suite
//! trains several dozen models; expect roughly an hour on two cores.
//!
//! Everything runs inside a single test function so the training runs are
//! sequential and Rayon can use the machine fully.

mod common;

use fracpinn::benchmarks::{median, run_benchmark, BenchmarkCase, BenchmarkReport};
use fracpinn::network::ActivationKind;
use fracpinn::sif::extrapolate_sif;

const SEEDS: [u64; 3] = [1, 2, 3];

struct Outcome {
    name: &'static str,
    detail: String,
    pass: bool,
}

fn record(results: &mut Vec<Outcome>, name: &'static str, outcome: Result<String, String>) {
    let (pass, detail) = match outcome {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    println!("{}: {} — {}", if pass { "PASS" } else { "FAIL" }, name, detail);
    results.push(Outcome { name, detail, pass });
}

fn rel_err_detail(report: &BenchmarkReport) -> String {
    let mut parts = Vec::new();
    if let Some(e) = report.k1_rel_err {
        parts.push(format!("K_I {:.4} (rel err {e:.3e})", report.median_k1));
    }
    if let Some(e) = report.k2_rel_err {
        parts.push(format!("K_II {:.4} (rel err {e:.3e})", report.median_k2));
    }
    if let (Some(c), Some(e)) = (report.median_edge_cod, report.edge_cod_rel_err) {
        parts.push(format!("edge COD {c:.4} (rel err {e:.3e})"));
    }
    parts.join(", ")
}

#[test]
fn acceptance() {
    let mut results: Vec<Outcome> = Vec::new();

    // ---- criterion 1: training-free oracle suite --------------------------
    let oracle = [
        ("spatial jets vs FD", common::check_spatial_jets_vs_fd()),
        ("parameter gradients vs FD", common::check_parameter_gradient_vs_fd()),
        ("near-tip displacement→stress consistency", common::check_williams_consistency()),
        ("near-tip field equilibrium", common::check_williams_equilibrium()),
        ("COD round trip + DEM exactness", common::check_cod_roundtrip_and_dem()),
        ("crack faces traction-free", common::check_face_traction_free()),
    ];
    let failures: Vec<String> = oracle
        .into_iter()
        .filter_map(|(name, r)| r.err().map(|e| format!("{name}: {e}")))
        .collect();
    record(
        &mut results,
        "criterion 1: oracle suite",
        if failures.is_empty() {
            Ok("all 6 derivative/field oracles hold".into())
        } else {
            Err(failures.join("; "))
        },
    );

    // ---- criterion 2: center crack under tension --------------------------
    let c2_report = run_benchmark(&BenchmarkCase::center_tension(), &SEEDS).unwrap();
    let c2_err = c2_report.k1_rel_err.unwrap();
    let decades: Vec<f64> = c2_report
        .runs
        .iter()
        .map(|r| (r.initial_loss / r.final_loss).log10())
        .collect();
    let median_decades = median(&mut decades.clone());
    record(
        &mut results,
        "criterion 2: center-tension K_I vs 2.1025, tol 2e-2",
        if c2_err <= 2e-2 {
            Ok(format!(
                "{} [stretch 5e-3: {}; median loss drop {:.1} decades]",
                rel_err_detail(&c2_report),
                if c2_err <= 5e-3 { "met" } else { "not met" },
                median_decades
            ))
        } else {
            Err(rel_err_detail(&c2_report))
        },
    );

    // ---- criterion 9: extrapolation-window stability (reuses C2 curves) ---
    {
        let curve = &c2_report.runs[0].curve;
        let a = 1.0;
        let narrow = extrapolate_sif(curve, (0.05, 0.20), a).unwrap();
        let wide = extrapolate_sif(curve, (0.10, 0.30), a).unwrap();
        let rel = (narrow.0 - wide.0).abs() / wide.0.abs();
        record(
            &mut results,
            "criterion 9: window stability [0.05,0.2] vs [0.1,0.3], tol 1e-2",
            if rel <= 1e-2 {
                Ok(format!("intercepts {:.4} vs {:.4} (rel diff {rel:.3e})", narrow.0, wide.0))
            } else {
                Err(format!("intercepts {:.4} vs {:.4} (rel diff {rel:.3e})", narrow.0, wide.0))
            },
        );
    }

    // ---- criterion 3: architecture trend (3×10 vs 6×20) -------------------
    {
        let small = run_benchmark(&BenchmarkCase::center_tension().with_arch(3, 10), &SEEDS).unwrap();
        let large = run_benchmark(&BenchmarkCase::center_tension().with_arch(6, 20), &SEEDS).unwrap();
        let (es, el) = (small.k1_rel_err.unwrap(), large.k1_rel_err.unwrap());
        record(
            &mut results,
            "criterion 3: architecture trend, 6×20 error ≤ 3×10 error",
            if el <= es {
                Ok(format!("3×10: {es:.3e}, 6×20: {el:.3e}"))
            } else {
                Err(format!("3×10: {es:.3e}, 6×20: {el:.3e}"))
            },
        );
    }

    // ---- criterion 4: center crack under shear ----------------------------
    {
        let report = run_benchmark(&BenchmarkCase::center_shear(), &SEEDS).unwrap();
        let err = report.k2_rel_err.unwrap();
        record(
            &mut results,
            "criterion 4: center-shear K_II vs 2.1025, tol 2e-2",
            if err <= 2e-2 { Ok(rel_err_detail(&report)) } else { Err(rel_err_detail(&report)) },
        );
    }

    // ---- criterion 5: edge crack (COD accuracy + K_I monotonicity) --------
    {
        let ratios = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
        let mut cod_errors = Vec::new();
        let mut k1_by_ratio = Vec::new();
        for &ratio in &ratios {
            let report =
                run_benchmark(&BenchmarkCase::edge_tension(ratio).unwrap(), &SEEDS).unwrap();
            k1_by_ratio.push((ratio, report.median_k1));
            if [0.1, 0.3, 0.5].contains(&ratio) {
                cod_errors.push((ratio, report.edge_cod_rel_err.unwrap()));
            }
        }
        let cod_ok = cod_errors.iter().all(|(_, e)| *e <= 3e-2);
        let monotone = k1_by_ratio.windows(2).all(|w| w[1].1 > w[0].1);
        let detail = format!(
            "COD rel errs {}; K_I by a/b {}",
            cod_errors.iter().map(|(r, e)| format!("{r}:{e:.3e}")).collect::<Vec<_>>().join(" "),
            k1_by_ratio.iter().map(|(r, k)| format!("{r}:{k:.3}")).collect::<Vec<_>>().join(" ")
        );
        record(
            &mut results,
            "criterion 5: edge-crack COD tol 3e-2 at a/b ∈ {0.1,0.3,0.5} + monotone K_I",
            if cod_ok && monotone { Ok(detail) } else { Err(detail) },
        );
    }

    // ---- criterion 6: slant crack at 45° ----------------------------------
    {
        let report = run_benchmark(&BenchmarkCase::slant(45.0).unwrap(), &SEEDS).unwrap();
        let (e1, e2) = (report.k1_rel_err.unwrap(), report.k2_rel_err.unwrap());
        record(
            &mut results,
            "criterion 6: slant 45° vs BEM (1.0838, 0.9666), tol 3e-2 each",
            if e1 <= 3e-2 && e2 <= 3e-2 {
                Ok(rel_err_detail(&report))
            } else {
                Err(rel_err_detail(&report))
            },
        );
    }

    // ---- criterion 7: activation robustness (5×15 on center-tension) ------
    {
        let mut details = Vec::new();
        let mut ok = true;
        for kind in ActivationKind::ALL {
            let case = BenchmarkCase::center_tension().with_arch(5, 15).with_activation(kind);
            let report = run_benchmark(&case, &SEEDS).unwrap();
            let err = report.k1_rel_err.unwrap();
            ok &= err <= 2e-2;
            details.push(format!("{}: {err:.3e}", kind.name()));
        }
        let detail = details.join(", ");
        record(
            &mut results,
            "criterion 7: all five activations ≤ 2e-2 (5×15)",
            if ok { Ok(detail) } else { Err(detail) },
        );
    }

    // ---- criterion 8: enrichment ablation ----------------------------------
    {
        let plain = run_benchmark(&BenchmarkCase::center_tension().without_enrichment(), &SEEDS)
            .unwrap();
        let (e_plain, e_enriched) = (plain.k1_rel_err.unwrap(), c2_err);
        record(
            &mut results,
            "criterion 8: enriched error < unenriched error",
            if e_enriched < e_plain {
                Ok(format!("enriched {e_enriched:.3e} vs standard {e_plain:.3e}"))
            } else {
                Err(format!("enriched {e_enriched:.3e} vs standard {e_plain:.3e}"))
            },
        );
    }

    // ---- summary -----------------------------------------------------------
    println!("\nacceptance summary:");
    for r in &results {
        println!("  {} {}", if r.pass { "PASS" } else { "FAIL" }, r.name);
    }
    let failed: Vec<&Outcome> = results.iter().filter(|r| !r.pass).collect();
    assert!(
        failed.is_empty(),
        "{} criterion(s) failed: {}",
        failed.len(),
        failed.iter().map(|r| format!("{} [{}]", r.name, r.detail)).collect::<Vec<_>>().join("; ")
    );
}
