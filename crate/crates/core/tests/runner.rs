use ltsdg::cases::{Case, Layout};
use ltsdg::runner::{convergence_study, errors_csv, run_case, write_outputs, RunConfig, Stepping};

fn quick(case: Case) -> RunConfig {
    let mut c = RunConfig::new(case);
    c.t_end = match case {
        Case::Blast => 0.002,
        Case::Sod | Case::Lax => 0.3,
        _ => 0.1,
    };
    c
}

#[test]
fn every_case_runs_with_refinement() {
    for case in Case::ALL {
        for layout in [Layout::Two, Layout::Three] {
            let mut c = quick(case);
            c.ratio = 2;
            c.layout = layout;
            let r = run_case(&c).unwrap_or_else(|e| panic!("{case} {layout}: {e}"));
            assert_eq!(r.state.time, c.t_end);
            assert!(r.state.as_slice().iter().all(|x| x.is_finite()));
            assert_eq!(r.report.rel_l1_error.is_some(), case != Case::Blast);
        }
    }
}

#[test]
fn lands_exactly_on_snapshot_times() {
    let mut c = quick(Case::Burgers);
    c.ratio = 4;
    c.snapshots = vec![0.0, 0.0375, 0.05];
    let r = run_case(&c).unwrap();
    let times: Vec<f64> = r.snapshots.iter().map(|s| s.time).collect();
    assert_eq!(times, vec![0.0, 0.0375, 0.05]);
    assert_eq!(r.series.last().unwrap().time, 0.1);
    assert!(r.series.windows(2).all(|w| w[1].time > w[0].time));
}

#[test]
fn fine_global_stepping_matches_lts_on_linear_advection() {
    let mut a = RunConfig::new(Case::AdvectionStep);
    a.ratio = 4;
    a.t_end = 0.25;
    let mut b = a.clone();
    b.stepping = Stepping::GtsFine;
    let ea = run_case(&a).unwrap().report.rel_l1_error.unwrap()[0];
    let eb = run_case(&b).unwrap().report.rel_l1_error.unwrap()[0];
    assert!((ea - eb).abs() <= 0.02 * eb, "{ea} {eb}");
}

#[test]
fn smooth_advection_reference_value() {
    let r = run_case(&RunConfig::new(Case::AdvectionSmooth)).unwrap();
    let e = r.report.rel_l1_error.unwrap()[0];
    assert!((e - 5.70e-2).abs() <= 0.1 * 5.70e-2, "{e}");
}

#[test]
fn study_table_shape_and_rates() {
    let mut base = RunConfig::new(Case::AdvectionSmooth);
    base.t_end = 0.5;
    let rows = convergence_study(&base, &[0.1, 0.05], &[1, 2]).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows[..2].iter().all(|r| r.rates.is_none()));
    for r in &rows[2..] {
        let rate = r.rates.unwrap()[0];
        assert!((1.7..2.5).contains(&rate), "{rate}");
    }
    let text = errors_csv(&base, &rows);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# config-sha256 "));
    assert_eq!(lines[1], "case,order,dx_coarse,M,variable,rel_l1,rate");
    assert_eq!(lines.len(), 2 + 4);
    assert!(lines[2].ends_with(','));
    let single = convergence_study(&base, &[0.2], &[1]).unwrap();
    assert!(single[0].rates.is_none());
    assert!(convergence_study(&base, &[0.2, 0.15], &[1]).is_err());
}

#[test]
fn output_files_are_self_describing() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = quick(Case::Sod);
    c.ratio = 2;
    c.snapshots = vec![0.15];
    let r = run_case(&c).unwrap();
    write_outputs(&r, dir.path()).unwrap();
    let header = format!("# config-sha256 {}", c.hash());
    for (name, cols) in [
        ("errors.csv", "case,order,dx_coarse,M,variable,rel_l1,rate"),
        ("series.csv", "time,mass_density,mass_momentum,mass_energy,tv_density,tv_momentum,tv_energy"),
        (
            "snapshot_0.15.csv",
            "x_left,x_right,mean_density,mean_momentum,mean_energy,trace_left_density,trace_left_momentum,trace_left_energy,trace_right_density,trace_right_momentum,trace_right_energy",
        ),
    ] {
        let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), header, "{name}");
        assert_eq!(lines.next().unwrap(), cols, "{name}");
        let first = lines.next().unwrap();
        let ncols = cols.split(',').count();
        assert_eq!(first.split(',').count(), ncols, "{name}");
    }
    let snap = std::fs::read_to_string(dir.path().join("snapshot_0.15.csv")).unwrap();
    let rows = snap.lines().count() - 2;
    assert_eq!(rows, r.mesh.ncells());
    let x: f64 = snap.lines().nth(2).unwrap().split(',').next().unwrap().parse().unwrap();
    assert_eq!(x, -4.9);
    // Fifteen significant digits.
    let sample = snap.lines().nth(2).unwrap().split(',').nth(2).unwrap();
    let mantissa = sample.split('e').next().unwrap().trim_start_matches('-');
    assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 15, "{sample}");
}

#[test]
fn config_hash_tracks_settings() {
    let a = RunConfig::new(Case::Lax);
    let mut b = a.clone();
    assert_eq!(a.hash(), b.hash());
    b.limiter_cm = 1.0;
    assert_ne!(a.hash(), b.hash());
    assert_eq!(a.hash().len(), 64);
}

#[test]
fn invalid_configs_are_rejected() {
    let mut c = RunConfig::new(Case::Sod);
    c.order = 5;
    assert!(run_case(&c).is_err());
    let mut c = RunConfig::new(Case::Burgers);
    c.snapshots = vec![1.0];
    assert!(run_case(&c).is_err());
    let mut c = RunConfig::new(Case::AdvectionSmooth);
    c.dx_coarse = 0.3;
    c.ratio = 2;
    assert!(run_case(&c).is_err());
}

#[test]
fn sod_three_domains_conserve_mass() {
    let mut c = RunConfig::new(Case::Sod);
    c.ratio = 4;
    c.layout = Layout::Three;
    let r = run_case(&c).unwrap();
    assert!(r.max_relative_mass_drift()[0] <= 1e-13);
    assert!(r.max_relative_mass_drift()[2] <= 1e-13);
}
