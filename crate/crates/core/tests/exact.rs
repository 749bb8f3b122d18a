use cavity_dicke::exact::{converge_cutoff, converge_cutoff_with, solve_fixed_cutoff, CutoffOptions};
use cavity_dicke::meanfield::ground_state;
use cavity_dicke::model::ModelParams;
use cavity_dicke::DickeError;

fn p(u: f64, v: f64, rabi: f64, delta: f64, n: u64) -> ModelParams {
    ModelParams { n_atoms: n, ..ModelParams::dimensionless(u, delta, rabi, v) }
}

#[test]
fn single_atom_without_coupling() {
    for (delta, rabi, v) in [(0.3, 0.4, 0.2), (-1.0, 0.0, -0.5), (0.0, 2.0, 1.0)] {
        let ex = converge_cutoff(&p(0.0, v, rabi, delta, 1), 1e-10, 2).unwrap();
        let closed = v / 4.0 - (delta * delta + rabi * rabi as f64).sqrt() / 2.0;
        assert!((ex.energy - closed).abs() < 1e-12, "{} vs {closed}", ex.energy);
        assert_eq!(ex.photon_number, 0.0);
    }
}

#[test]
fn decoupled_product_state_matches_mean_field() {
    for n in [1, 4, 9] {
        let params = p(0.0, 0.0, 0.7, -0.2, n);
        let ex = converge_cutoff(&params, 1e-10, 2).unwrap();
        let mf = ground_state(&params).unwrap();
        assert!((ex.energy_per_atom - mf.energy_per_atom).abs() < 1e-9);
        assert!((ex.m_over_n() - mf.m_over_n).abs() < 1e-9);
    }
}

#[test]
fn mean_field_is_an_upper_bound_that_tightens() {
    let mf = ground_state(&p(1.0, 0.0, 0.3, 0.4, 1)).unwrap();
    let mut previous = f64::INFINITY;
    for n in [2, 4, 8, 16] {
        let ex = converge_cutoff(&p(1.0, 0.0, 0.3, 0.4, n), 1e-10, 4).unwrap();
        assert!(ex.converged);
        let gap = mf.energy_per_atom - ex.energy_per_atom;
        assert!(gap >= -1e-9, "N = {n}: {gap}");
        assert!(gap < previous);
        previous = gap;
    }
}

#[test]
fn photon_number_tracks_mean_field_deep_in_the_lobe() {
    let ex = converge_cutoff(&p(1.0, 0.0, 0.0, 0.2, 24), 1e-10, 4).unwrap();
    let mf = ground_state(&p(1.0, 0.0, 0.0, 0.2, 1)).unwrap();
    assert!((ex.photon_density() - mf.photon_density).abs() < 0.05 * mf.photon_density);
    assert!(ex.m_over_n() < 0.0);
}

#[test]
fn cutoff_budget_is_enforced() {
    let err = solve_fixed_cutoff(&p(1.0, 0.0, 0.0, 0.5, 100), 100, 1000).unwrap_err();
    assert!(matches!(err, DickeError::BasisTooLarge { .. }));
    let opts = CutoffOptions { eps: 1e-14, n_max_start: 4, dimension_budget: 60 };
    let capped = converge_cutoff_with(&p(1.0, 0.0, 0.0, 0.0, 4), &opts).unwrap();
    assert!(!capped.converged);
    assert!(capped.dimension <= 60);
}
