use optomech_core::entanglement::Bipartition;
use optomech_core::gaussian::min_symplectic;
use optomech_core::lyapunov::{solve_lyapunov, solvers, stationary_residual};
use optomech_core::model::LinearModel;
use optomech_core::sweep::{preset, run_point, run_sweep, PRESET_NAMES};

#[test]
fn every_stable_preset_point_is_certified_and_physical() {
    let registry = solvers();
    for name in PRESET_NAMES {
        let spec = preset(name).unwrap();
        for coords in spec.grid() {
            let params = spec.point_params(&coords).unwrap();
            let model = LinearModel::new(&params).unwrap();
            let bound = 1e-10 * model.diffusion.matrix.norm().max(1.0);
            for solver in registry.iter() {
                let Ok(v) = solve_lyapunov(&model.drift, &model.diffusion, solver) else {
                    continue;
                };
                let res = stationary_residual(&model.drift, &model.diffusion, &v);
                assert!(res <= bound, "{name} {coords:?} {}: residual {res:e}", solver.name());
                let nu = min_symplectic(&v.to_dmatrix()).unwrap();
                assert!(nu >= 0.5 - 1e-9, "{name} {coords:?}: ν_min = {nu}");
            }
        }
    }
}

#[test]
fn atom_and_mirror_roles_are_nearly_symmetric_over_fig4() {
    let run = run_sweep(&preset("fig4").unwrap()).unwrap();
    for row in &run.table.rows {
        let rep = row.report.as_ref().unwrap();
        let a = rep.negativity(Bipartition::single(optomech_core::model::Mode::A)).unwrap();
        let m = rep.negativity(Bipartition::single(optomech_core::model::Mode::M)).unwrap();
        if a.max(m) > 1e-9 {
            assert!((a - m).abs() / a.max(m) <= 0.1, "T = {}: E_A|MC {a}, E_M|AC {m}", row.coords[0]);
        }
    }
}

#[test]
fn single_point_sweep_matches_run_point() {
    let mut spec = preset("fig2c").unwrap();
    spec.axes[0].min = 2e-5;
    spec.axes[0].max = 2e-5;
    spec.axes[0].points = 1;
    let run = run_sweep(&spec).unwrap();
    let mut p = spec.base;
    p.temperature = 2e-5;
    assert_eq!(run.evaluations, 1);
    assert_eq!(run.table.rows[0].report.as_ref().unwrap(), &run_point(&p, solvers().default_strategy()).unwrap());
}
