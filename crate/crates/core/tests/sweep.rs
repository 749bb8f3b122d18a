use cavity_dicke::model::{ModelParams, ParamAxis};
use cavity_dicke::sweep::{run_sweep, AxisSpec, Cell, ExactOptions, OutputSelection, SweepConfig, SweepDataset};

fn config(base: ModelParams, axes: Vec<AxisSpec>) -> SweepConfig {
    SweepConfig {
        base,
        axes,
        exact: None,
        outputs: OutputSelection::default(),
    }
}

#[test]
fn energy_curves_are_continuous() {
    let u = 0.315;
    for rabi in [0.0, 0.02 * u, 0.05 * u] {
        let c = config(
            ModelParams::dimensionless(u, 0.0, rabi, 0.0),
            vec![AxisSpec::range(ParamAxis::Delta, -2.0 * u, 2.0 * u, 401)],
        );
        let e = run_sweep(&c).unwrap().column_f64("energy_per_atom").unwrap();
        let step = 4.0 * u / 400.0;
        // |dE/dΔ| = |s_z| ≤ 1/2 bounds neighbouring differences.
        assert!(e.windows(2).all(|w| (w[1] - w[0]).abs() <= 0.5 * step + 1e-15));
    }
}

#[test]
fn zero_drive_curve_kinks_at_lobe_edges() {
    let u = 0.315;
    let c = config(
        ModelParams::dimensionless(u, 0.0, 0.0, 0.0),
        vec![AxisSpec::range(ParamAxis::Delta, -2.0 * u, 2.0 * u, 401)],
    );
    let d = run_sweep(&c).unwrap();
    let delta = d.column_f64("delta").unwrap();
    let m = d.column_f64("m_over_n").unwrap();
    let slopes: Vec<f64> = m.windows(2).zip(delta.windows(2)).map(|(m, d)| (m[1] - m[0]) / (d[1] - d[0])).collect();
    let jumps: Vec<usize> = (1..slopes.len()).filter(|&k| (slopes[k] - slopes[k - 1]).abs() > 0.1 / u).collect();
    assert_eq!(jumps.len(), 2, "{jumps:?}");
    for k in jumps {
        assert!((delta[k].abs() - u).abs() <= 4.0 * u / 400.0, "kink at {}", delta[k]);
    }
}

#[test]
fn first_order_jump_in_imbalance() {
    let c = config(
        ModelParams::dimensionless(1.0, 0.0, 0.0, -2.0),
        vec![
            AxisSpec::values(ParamAxis::OmegaRabi, vec![0.5, 1.5, 2.0]),
            AxisSpec::range(ParamAxis::Delta, -1.0, 1.0, 400),
        ],
    );
    let d = run_sweep(&c).unwrap();
    let m = d.column_f64("m_over_n").unwrap();
    let largest = |block: usize| {
        m[block * 400..(block + 1) * 400]
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(0.0, f64::max)
    };
    assert!((largest(0) - 3f64.sqrt()).abs() < 1e-2, "{}", largest(0));
    assert!(largest(1) < 0.1);
    assert!(largest(2) < 0.1);
}

#[test]
fn exact_columns_match_decoupled_closed_form() {
    let mut c = config(
        ModelParams::new(1.0, 0.0, 0.0, 0.4, 0.0, 1),
        vec![AxisSpec::range(ParamAxis::Delta, -1.0, 1.0, 5)],
    );
    c.exact = Some(ExactOptions {
        n_atoms: vec![1, 3],
        eps: 1e-10,
        n_max_start: 2,
        dimension_budget: 10_000,
    });
    let d = run_sweep(&c).unwrap();
    let delta = d.column_f64("delta").unwrap();
    for n in [1, 3] {
        let e = d.column_f64(&format!("exact_n{n}_energy_per_atom")).unwrap();
        for (x, e) in delta.iter().zip(e) {
            assert!((e + (x * x + 0.16f64).sqrt() / 2.0).abs() < 1e-12);
        }
    }
    let err = d.column_index("error").unwrap();
    assert!(d.rows.iter().all(|r| r[err] == Cell::Text(String::new())));
}

#[test]
fn config_file_round_trip_and_rerun_is_byte_identical() {
    let text = r#"{
        "base": {"omega": 1, "lambda": 1, "delta": 0, "omega_rabi": 0.5, "v": 0, "n_atoms": 1},
        "axes": [{"name": "v", "min": -3, "max": 1, "count": 9},
                 {"name": "delta", "values": [-1.0, 0.0, 0.5]}],
        "outputs": {"columns": ["m_over_n", "phase_label"], "susceptibility": true}
    }"#;
    let c: SweepConfig = serde_json::from_str(text).unwrap();
    let a = run_sweep(&c).unwrap();
    let b = run_sweep(&c).unwrap();
    assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    assert_eq!(
        a.columns,
        ["v", "delta", "m_over_n", "phase_label", "susceptibility_v", "susceptibility_flag", "error"]
    );
    let parsed = SweepDataset::from_json(&a.to_json().unwrap()).unwrap();
    assert_eq!(parsed.provenance.config.as_ref(), Some(&c));
}

#[test]
fn invalid_configs_abort() {
    let base = ModelParams::dimensionless(1.0, 0.0, 0.0, 0.0);
    assert!(run_sweep(&config(base, vec![])).is_err());
    assert!(run_sweep(&config(base, vec![AxisSpec::range(ParamAxis::Delta, 0.0, 1.0, 1)])).is_err());
    assert!(serde_json::from_str::<SweepConfig>(
        r#"{"base": {"omega": 1, "lambda": 1, "delta": 0, "omega_rabi": 0, "v": 0, "n_atoms": 1},
            "axes": [{"name": "temperature", "min": 0, "max": 1, "count": 3}]}"#
    )
    .is_err());
}
