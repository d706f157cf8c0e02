use dressed_squeeze::runner::{parse_config, run_scenario, Scenario, CSV_COLUMNS};

const DESK: &str = "\
omega1 = 50
omega2 = 50
g1_re = 0.5
g2_im = 0.5
d = 5
n1_max = 10
n2_max = 10
samples = 6
";

/// DESK with the keys of `extra` overridden.
fn config(extra: &str) -> dressed_squeeze::runner::RunConfig {
    let key = |line: &str| line.split('=').next().unwrap().trim().to_string();
    let overridden: Vec<String> = extra.lines().map(key).collect();
    let base: String = DESK
        .lines()
        .filter(|l| !overridden.contains(&key(l)))
        .map(|l| format!("{l}\n"))
        .collect();
    parse_config(&format!("{base}{extra}")).unwrap()
}

#[test]
fn oracle_rows_match_numerics() {
    let out = run_scenario(&config("scenario = oracle\nr_final = 0.5\nn1_max = 20\nn2_max = 20\n")).unwrap();
    assert_eq!(out.rows.len(), 6);
    for (_, row) in &out.rows {
        assert!(row.fidelity_vs_oracle.unwrap() >= 1.0 - 1e-8, "{row:?}");
        assert!((row.m_min - 2.0 * (-2.0 * row.t * 0.00625f64).exp()).abs() < 1e-8);
    }
    assert!(out.summary.reliable());
}

#[test]
fn uncoupled_full_model_never_squeezes() {
    let cfg = parse_config(
        &format!("{DESK}g1_re = 0\ng2_im = 0\nscenario = full\nt_final = 40\n")
            .replace("g1_re = 0.5\ng2_im = 0.5\n", ""),
    )
    .unwrap();
    let out = run_scenario(&cfg).unwrap();
    for (_, row) in &out.rows {
        assert!((row.m_min - 2.0).abs() < 1e-12);
        assert!((row.m_fixed - 2.0).abs() < 1e-12);
    }
}

#[test]
fn full_model_squeezes_and_rows_are_consistent() {
    let out = run_scenario(&config("scenario = full\nr_final = 0.3\nstroboscopic = true\n")).unwrap();
    assert!(out.summary.reliable(), "{:?}", out.summary);
    assert!(out.summary.min_m_min < 1.2, "{:?}", out.summary);
    for (_, row) in &out.rows {
        assert!(row.m_fixed >= row.m_min - 1e-9);
        // Counter-rotating terms of the full model break n₁ = n₂ at order G/d.
        assert!(
            (row.n1 - row.n2).abs() <= 0.05 * row.n1.max(row.n2),
            "{} {}",
            row.n1,
            row.n2
        );
        // Stroboscopic sampling: t is a multiple of 2π/d.
        let k = row.t * 5.0 / (2.0 * std::f64::consts::PI);
        assert!((k - k.round()).abs() < 1e-9);
    }
}

#[test]
fn interaction_scenario_tracks_eliminated_oracle() {
    let out = run_scenario(&config(
        "scenario = interaction\nr_final = 0.2\nstroboscopic = true\nn1_max = 8\nn2_max = 8\n",
    ))
    .unwrap();
    let last = out.rows.last().unwrap().1;
    assert!(last.fidelity_vs_oracle.unwrap() > 0.99, "{last:?}");
    assert!(out.summary.max_norm_err < 1e-7);
}

#[test]
fn sweep_mismatch_shrinks_along_the_hierarchy() {
    let cfg = config(
        "scenario = sweep\nbase_scenario = full\nsweep_param = d_over_g\nsweep_values = 5, 10, 20\nr_final = 0.2\nn1_max = 8\nn2_max = 8\nstroboscopic = true\n",
    );
    let out = run_scenario(&cfg).unwrap();
    assert_eq!(out.key_column, Some("sweep_value"));
    let mis: Vec<f64> = out.summary.sweep.iter().map(|p| p.max_mismatch_vs_effective).collect();
    assert_eq!(mis.len(), 3);
    assert!(mis[0] > mis[1] && mis[1] > mis[2], "{mis:?}");
    // Rows are grouped by sweep value in config order.
    let keys: Vec<f64> = out.rows.iter().map(|(k, _)| k.unwrap()).collect();
    assert!(keys.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn convergence_reports_refinement_deltas() {
    let cfg = config("scenario = convergence\nbase_scenario = effective\nr_final = 0.5\nn1_max = 15\nn2_max = 15\n");
    let out = run_scenario(&cfg).unwrap();
    let report = out.summary.convergence.unwrap();
    assert!(report.max_delta_m_min < 1e-6, "{report:?}");
    assert_eq!(out.rows.len(), 12);
}

#[test]
fn csv_layout_is_fixed() {
    let out = run_scenario(&config("scenario = effective\nt_final = 10\nsamples = 3\n")).unwrap();
    let mut buf = Vec::new();
    out.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 12);
    assert_eq!(first[0], "0.0000000000000000e0");
    assert_eq!(first[5], "2.0000000000000000e0");
    assert!((first[6].parse::<f64>().unwrap() - 2.0).abs() < 1e-14);
    for field in &first {
        let mantissa = field.split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.replace('.', "").len(), 17, "{field}");
    }
    assert_eq!(lines.count(), 2);
}

#[test]
fn truncation_guard_trips_on_small_cutoffs() {
    let out = run_scenario(&config("scenario = effective\nr_final = 1.5\nn1_max = 3\nn2_max = 3\n")).unwrap();
    assert!(!out.summary.reliable());
    assert!(out.summary.max_top_level_pop > 1e-8);
}

#[test]
fn r_final_needs_a_coupling() {
    let cfg =
        parse_config(&format!("{DESK}scenario = effective\nr_final = 0.3\n").replace("g1_re = 0.5\n", "")).unwrap();
    assert!(run_scenario(&cfg).is_err());
    assert_eq!(cfg.scenario, Scenario::Effective);
}
