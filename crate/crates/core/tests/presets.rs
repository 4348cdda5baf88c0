//! The canned experiment presets, exercised at reduced trial counts:
//! shape of the tables, derived-column invariants, and the headline trends.

use psam_mimo::experiment::{preset, run, ExperimentKind};

#[test]
fn delayed_sweep_has_constant_delay_factor() {
    let spec = preset(ExperimentKind::SnrSweepDelayed, 300, 3, None);
    let table = run(&spec, true).unwrap();
    let beta_col = table.column("beta").unwrap();
    let expect = 20.0 / 96.0;
    assert!(!table.rows.is_empty());
    for row in &table.rows {
        assert!(
            (row[beta_col] - expect).abs() < 1e-12,
            "beta column should be constant {expect}, got {}",
            row[beta_col]
        );
    }
    // Grid-optimized rows exist for the marked SNR points.
    let opt_col = table.column("optimized").unwrap();
    let optimized = table.rows.iter().filter(|r| r[opt_col] == 1.0).count();
    assert_eq!(optimized, 3);
}

#[test]
fn phi_sweep_tracks_the_delay_fraction() {
    let spec = preset(ExperimentKind::PhiSweep, 2_000, 3, None);
    let table = run(&spec, true).unwrap();
    let (pd_col, beta_col, phi_col) = (
        table.column("pd_db").unwrap(),
        table.column("beta").unwrap(),
        table.column("phi_star").unwrap(),
    );
    let top = table
        .rows
        .iter()
        .map(|r| r[pd_col])
        .fold(f64::NEG_INFINITY, f64::max);
    for row in &table.rows {
        let (beta, phi) = (row[beta_col], row[phi_col]);
        assert!(
            (0.0..=beta + 0.15).contains(&phi),
            "phi* {phi} outside [0, beta + 0.15] at {} dB",
            row[pd_col]
        );
        if row[pd_col] == top {
            assert!(
                (phi - beta).abs() < 0.02,
                "phi* should be near beta at the top of the grid, got {phi} vs {beta}"
            );
        }
    }
}

#[test]
fn alpha_vs_rho_matches_closed_form_away_from_full_correlation() {
    let spec = preset(ExperimentKind::AlphaVsRho, 2_000, 3, None);
    let table = run(&spec, true).unwrap();
    let (rho_col, num_col, closed_col) = (
        table.column("rho").unwrap(),
        table.column("alpha_numeric").unwrap(),
        table.column("alpha_closed").unwrap(),
    );
    for row in &table.rows {
        if row[rho_col] <= 0.7 {
            assert!(
                (row[num_col] - row[closed_col]).abs() <= 0.05,
                "rho={}: numeric {:.3} vs closed {:.3}",
                row[rho_col],
                row[num_col],
                row[closed_col]
            );
        }
    }
}

#[test]
fn capacity_presets_have_full_grids() {
    let spec = preset(ExperimentKind::CapVsRho4x4, 300, 3, None);
    let table = run(&spec, true).unwrap();
    assert_eq!(
        table.rows.len(),
        4 * 10,
        "4 training lengths x 10 rho values"
    );

    let spec = preset(ExperimentKind::SnrSweepDelayless, 300, 3, None);
    let table = run(&spec, true).unwrap();
    assert_eq!(table.rows.len(), 2 * 11, "2 variants x 11 SNR points");
    // The optimal-allocation rows dominate the equal-power rows pointwise.
    let (eq_col, mean_col) = (
        table.column("equal_power").unwrap(),
        table.column("mean").unwrap(),
    );
    for pair in table.rows.chunks(2) {
        let (opt, eq) = (&pair[0], &pair[1]);
        assert_eq!(opt[eq_col], 0.0);
        assert_eq!(eq[eq_col], 1.0);
        assert!(
            opt[mean_col] > eq[mean_col],
            "optimal allocation should beat equal power"
        );
    }
}
