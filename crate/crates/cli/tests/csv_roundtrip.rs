use nlwave_cli::output::{read_trajectory, write_trajectory};
use nlwave_core::solver::{Snapshot, Trajectory};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e300..1e300f64, -1.0..1.0f64, Just(0.0), Just(f64::MIN_POSITIVE)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trajectory_csv_is_exact(modes in 1usize..4, rows in proptest::collection::vec(proptest::collection::vec(finite(), 10), 0..6)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let times: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        let snapshots: Vec<Snapshot> = rows
            .iter()
            .map(|r| Snapshot { x: r[1..1 + modes].to_vec(), v: r[4..4 + modes].to_vec(), w: r[7..7 + modes].to_vec() })
            .collect();
        let traj = Trajectory::new(times, snapshots);
        write_trajectory(&traj, modes, &path).unwrap();
        let back = read_trajectory(&path).unwrap();
        prop_assert_eq!(back.times, traj.times);
        prop_assert_eq!(back.snapshots, traj.snapshots);
    }
}
