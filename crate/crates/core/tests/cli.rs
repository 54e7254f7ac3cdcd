mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ghiqm::calendar::{CalendarKind, Date, TimeIndex};
use ghiqm::clearsky::ClearskyClimatology;
use ghiqm::dataset::DailyDataset;
use ghiqm::datastore::{read_dataset, read_model, write_dataset};
use ghiqm::grid::Grid;

fn ghiqm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ghiqm")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn summary(out: &Output) -> serde_json::Value {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1, "expected one summary line, got {text:?}");
    serde_json::from_str(lines[0]).unwrap()
}

fn s(p: &Path) -> String {
    p.display().to_string()
}

fn dir_bytes(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.clone(), fs::read(&p).unwrap())
        })
        .collect();
    v.sort();
    v
}

struct Fixture {
    _tmp: tempfile::TempDir,
    root: PathBuf,
    grid: Grid,
    clim: ClearskyClimatology,
}

impl Fixture {
    fn new() -> Self {
        let tmp = tempfile::tempdir().unwrap();
        let root = tmp.path().to_path_buf();
        let grid = common::grid(4, 5);
        let clim = common::seasonal_climatology(&grid);
        write_dataset(&clim.to_dataset(), root.join("clim")).unwrap();
        Fixture { _tmp: tmp, root, grid, clim }
    }

    fn path(&self, name: &str) -> String {
        s(&self.root.join(name))
    }

    fn ghi(&self, name: &str, cal: CalendarKind, a: f64, b: f64, seed: u64) -> String {
        let time = common::years_index(cal, 2001, 3);
        write_dataset(&common::synthetic_ghi(&self.grid, &time, &self.clim, a, b, seed), self.root.join(name)).unwrap();
        self.path(name)
    }
}

#[test]
fn climatology_from_identical_years_and_rejections() {
    let f = Fixture::new();
    let g = &f.grid;
    let t = TimeIndex::new(CalendarKind::Gregorian, Date::new(2001, 1, 1), 365).unwrap();
    let vals: Vec<f32> = (0..365 * g.n_pixels()).map(|i| 100.0 + (i % 411) as f32).collect();
    let year = DailyDataset::new(g.clone(), t, "clearsky_ghi", "W/m2", f32::NAN, vals).unwrap();
    write_dataset(&year, f.root.join("y1")).unwrap();
    write_dataset(&year, f.root.join("y2")).unwrap();

    let out = ghiqm(&["climatology", &f.path("y1"), &f.path("y2"), "--out", &f.path("c")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let sm = summary(&out);
    assert_eq!(sm["command"], "climatology");
    assert_eq!(sm["values_per_pixel_min"], 730);
    let clim = ClearskyClimatology::from_dataset(&read_dataset(f.root.join("c")).unwrap()).unwrap();
    for p in 0..g.n_pixels() {
        for slot in 1..=365 {
            let day = if slot <= 59 { slot - 1 } else if slot == 366 { 58 } else { slot - 1 };
            assert_eq!(clim.value(p, slot), year.get(day, p) as f64);
        }
    }

    let other = Grid::regular(31.0, 0.25, 4, -110.0, 0.25, 5).unwrap();
    let t = TimeIndex::new(CalendarKind::Gregorian, Date::new(2002, 1, 1), 365).unwrap();
    let moved = DailyDataset::new(other, t.clone(), "cs", "W/m2", f32::NAN, vec![300.0; 365 * 20]).unwrap();
    write_dataset(&moved, f.root.join("y3")).unwrap();
    let out = ghiqm(&["climatology", &f.path("y1"), &f.path("y3"), "--out", &f.path("c2")]);
    assert_eq!(code(&out), 2);
    let msg = stderr(&out);
    assert!(msg.contains("lat 30..30.75") && msg.contains("lat 31..31.75"), "{msg}");

    let mut zero = vec![300.0f32; 365 * 20];
    zero[17] = 0.0;
    let bad = DailyDataset::new(g.clone(), t, "cs", "W/m2", f32::NAN, zero).unwrap();
    write_dataset(&bad, f.root.join("y4")).unwrap();
    assert_eq!(code(&ghiqm(&["climatology", &f.path("y4"), "--out", &f.path("c3")])), 2);

    assert_eq!(code(&ghiqm(&["climatology", &f.path("nowhere"), "--out", &f.path("c4")])), 1);
}

#[test]
fn fit_apply_identity_and_summary() {
    let f = Fixture::new();
    let obs = f.ghi("obs", CalendarKind::Gregorian, 1.0, 0.0, 1);
    let clim = f.path("clim");
    let model = f.path("model");
    let out = ghiqm(&["fit", "--obs", &obs, "--mod", &obs, "--climatology", &clim, "--train-years", "2001-2002", "--model", &model]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let sm = summary(&out);
    assert_eq!(sm["command"], "fit");
    assert_eq!(sm["pixels"], 20);
    assert_eq!(sm["months"], 12);
    assert_eq!(sm["obs_sample_min"], 4 * 28 * 2);
    assert!(sm["obs_sample_median"].as_f64().unwrap() > 100.0);
    assert_eq!(read_model(&model).unwrap().grid(), &f.grid);

    let corrected = f.path("corrected");
    let out = ghiqm(&["apply", "--model", &model, "--mod", &obs, "--climatology", &clim, "--test-years", "2003", "--out", &corrected]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let sm = summary(&out);
    assert_eq!(sm["command"], "apply");
    assert_eq!(sm["days"], 365);
    assert_eq!(sm["start"], "2003-01-01");

    let input = read_dataset(&obs).unwrap();
    let output = read_dataset(&corrected).unwrap();
    let offset = input.time().index_of(Date::new(2003, 1, 1)).unwrap();
    for d in 0..output.n_days() {
        for p in 0..f.grid.n_pixels() {
            let (x, y) = (input.get(d + offset, p) as f64, output.get(d, p) as f64);
            assert!((x - y).abs() <= 1e-4 * x.max(1.0), "day {d}, pixel {p}: {x} -> {y}");
        }
    }
}

#[test]
fn fit_apply_rejections_and_exit_codes() {
    let f = Fixture::new();
    let obs = f.ghi("obs", CalendarKind::Gregorian, 1.0, 0.0, 2);
    let md = f.ghi("mod", CalendarKind::Fixed360, 1.3, 0.5, 3);
    let clim = f.path("clim");
    let model = f.path("model");

    // Training years absent from the model data.
    let out = ghiqm(&["fit", "--obs", &obs, "--mod", &md, "--climatology", &clim, "--train-years", "2003-2004", "--model", &model]);
    assert_eq!(code(&out), 2);

    // Too few values per cell.
    let out = ghiqm(&["fit", "--obs", &obs, "--mod", &md, "--climatology", &clim, "--train-years", "2001", "--min-sample", "300", "--model", &model]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("pixel 0, month 1"), "{}", stderr(&out));

    // Missing input path.
    let out = ghiqm(&["fit", "--obs", &f.path("none"), "--mod", &md, "--climatology", &clim, "--train-years", "2001", "--model", &model]);
    assert_eq!(code(&out), 2);

    // Usage errors.
    assert_eq!(code(&ghiqm(&["fit", "--bogus"])), 2);
    assert_eq!(code(&ghiqm(&["fit", "--obs", &obs, "--mod", &md, "--climatology", &clim, "--model", &model, "--epsilon", "0.9", "--train-years", "2001"])), 2);
    assert_eq!(code(&ghiqm(&["--threads", "0", "fit"])), 2);

    let out = ghiqm(&["fit", "--obs", &obs, "--mod", &md, "--climatology", &clim, "--train-years", "2001-2002", "--model", &model]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    // Model grid differs from the data grid.
    let other = Grid::regular(0.0, 1.0, 2, 0.0, 1.0, 2).unwrap();
    let t = common::years_index(CalendarKind::Gregorian, 2001, 1);
    write_dataset(&DailyDataset::new(other, t, "ghi", "W/m2", f32::NAN, vec![100.0; 365 * 4]).unwrap(), f.root.join("small")).unwrap();
    let out = ghiqm(&["apply", "--model", &model, "--mod", &f.path("small"), "--climatology", &clim, "--out", &f.path("o")]);
    assert_eq!(code(&out), 2);

    // Output below a regular file cannot be created.
    fs::write(f.root.join("file"), "x").unwrap();
    let out = ghiqm(&["apply", "--model", &model, "--mod", &md, "--climatology", &clim, "--out", &f.path("file/out")]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));

    // Corrupt payload.
    fs::write(f.root.join("model").join("knots.f64"), [0u8; 12]).unwrap();
    let out = ghiqm(&["apply", "--model", &model, "--mod", &md, "--climatology", &clim, "--out", &f.path("o2")]);
    assert_eq!(code(&out), 2);
}

#[test]
fn config_file_with_flag_overrides_and_idempotence() {
    let f = Fixture::new();
    f.ghi("obs", CalendarKind::Gregorian, 1.0, 0.0, 4);
    f.ghi("mod", CalendarKind::NoLeap365, 1.3, 0.5, 5);
    fs::write(
        f.root.join("run.json"),
        r#"{"obs": "obs", "mod": "mod", "climatology": "clim", "model": "model", "output": "out",
            "probs": "0.05:0.95:0.05", "train_years": "2001-2002", "test_years": [2003], "min_sample": 10}"#,
    )
    .unwrap();
    let cfg = f.path("run.json");

    let out = ghiqm(&["fit", "--config", &cfg]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(summary(&out)["knots"], 19);
    let out = ghiqm(&["apply", "--config", &cfg]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let model_a = dir_bytes(&f.root.join("model"));
    let out_a = dir_bytes(&f.root.join("out"));

    let out = ghiqm(&["fit", "--config", &cfg]);
    assert_eq!(code(&out), 0);
    let out = ghiqm(&["apply", "--config", &cfg]);
    assert_eq!(code(&out), 0);
    assert_eq!(dir_bytes(&f.root.join("model")), model_a);
    assert_eq!(dir_bytes(&f.root.join("out")), out_a);

    // 99 knots need at least 50 values per cell.
    let out = ghiqm(&["fit", "--config", &cfg, "--probs", "0.01:0.99:0.01", "--train-years", "2001", "--model", &f.path("m2")]);
    assert_eq!(code(&out), 2);
    let out = ghiqm(&["fit", "--config", &cfg, "--probs", "0.01:0.99:0.01", "--train-years", "2001", "--min-sample", "90", "--model", &f.path("m2")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let sm = summary(&out);
    assert_eq!(sm["knots"], 99);
    assert_eq!(sm["train_years"], serde_json::json!([2001]));
}

#[test]
fn stats_fanova_regions() {
    let f = Fixture::new();
    let obs = f.ghi("obs", CalendarKind::Gregorian, 1.0, 0.0, 6);
    let prefix = f.path("same");
    let out = ghiqm(&["stats", "--obs", &obs, "--mod", &obs, "--out-prefix", &prefix]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(summary(&out)["years"], serde_json::json!([2001, 2002, 2003]));
    let csv = fs::read_to_string(format!("{prefix}_monthly.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("month,mean_bias_wm2,sd_diff_wm2,sd_ratio"));
    for (i, line) in lines.enumerate() {
        assert_eq!(line, format!("{},0,0,1", i + 1));
    }
    let pbias = format!("{prefix}_pbias");
    assert!(read_dataset(&pbias).unwrap().values().iter().all(|&v| v == 0.0));

    // Four copies of one field.
    let md = f.ghi("mod", CalendarKind::Gregorian, 1.3, 0.5, 7);
    let out = ghiqm(&["stats", "--obs", &obs, "--mod", &md, "--years", "2001-2002", "--out-prefix", &f.path("b")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let field = f.path("b_pbias");
    let out = ghiqm(&["fanova", &field, &field, &field, &field, "--out-prefix", &f.path("fa")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let orig = read_dataset(&field).unwrap();
    assert_eq!(read_dataset(f.path("fa_mu")).unwrap().values(), orig.values());
    for name in ["alpha_gcm", "alpha_rcm", "gamma"] {
        assert!(read_dataset(f.path(&format!("fa_{name}"))).unwrap().values().iter().all(|&v| v == 0.0));
    }

    fs::write(f.root.join("regions.csv"), "region_id,region_name,centroid_lat,centroid_lon\n4,Southwest,31.0,-109.0\n").unwrap();
    let out = ghiqm(&["regions", "--field", &field, "--regions", &f.path("regions.csv"), "--out", &f.path("r.csv")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let table = fs::read_to_string(f.root.join("r.csv")).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0], "region_id,region_name,count,mean,median,q25,q75,min,max");
    assert!(rows[1].starts_with("4,Southwest,20,"));

    // Mismatched grids.
    let other = Grid::regular(0.0, 1.0, 1, 0.0, 1.0, 1).unwrap();
    let t = TimeIndex::new(CalendarKind::Gregorian, Date::new(2001, 1, 1), 1).unwrap();
    write_dataset(&DailyDataset::new(other, t, "x", "%", f32::NAN, vec![1.0]).unwrap(), f.root.join("tiny")).unwrap();
    let out = ghiqm(&["fanova", &field, &field, &field, &f.path("tiny"), "--out-prefix", &f.path("fb")]);
    assert_eq!(code(&out), 2);
}

#[test]
fn import_round_trip_and_rejections() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("in.csv");
    fs::write(
        &csv,
        "date,lat,lon,value\n2001-02-28,40.0,-105.0,1\n2001-02-28,40.0,-104.5,2\n2001-02-28,40.5,-105.0,3\n2001-02-28,40.5,-104.5,4\n\
         2001-03-01,40.0,-105.0,5\n2001-03-01,40.0,-104.5,6\n2001-03-01,40.5,-105.0,7\n2001-03-01,40.5,-104.5,\n",
    )
    .unwrap();
    let out_dir = tmp.path().join("ds");
    let grid_args = ["--lat-start", "40", "--lat-step", "0.5", "--n-lat", "2", "--lon-start", "-105", "--lon-step", "0.5", "--n-lon", "2"];
    let mut args = vec!["import", "--csv", csv.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "--calendar", "gregorian", "--start", "2001-02-28", "--n-days", "2"];
    args.extend(grid_args);
    let out = ghiqm(&args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(summary(&out)["missing_cells"], 1);
    let ds = read_dataset(&out_dir).unwrap();
    assert_eq!(&ds.values()[..7], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
    assert!(ds.values()[7].is_nan());
    assert_eq!(ds.time().label(1).date(), Date::new(2001, 3, 1));

    // Grid taken from an existing dataset.
    let like_dir = tmp.path().join("ds2");
    let out = ghiqm(&["import", "--csv", csv.to_str().unwrap(), "--out", like_dir.to_str().unwrap(), "--like", out_dir.to_str().unwrap(), "--calendar", "gregorian", "--start", "2001-02-28", "--n-days", "2"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(read_dataset(&like_dir).unwrap().bit_eq(&ds));

    let mut bad_cal = args.clone();
    bad_cal[6] = "julian";
    assert_eq!(code(&ghiqm(&bad_cal)), 2);

    fs::write(&csv, "date,pixel_id,value\n2001-02-28,0,1\n2001-02-28,0,2\n").unwrap();
    assert_eq!(code(&ghiqm(&args)), 2);
}

#[test]
fn help_exits_zero() {
    let out = ghiqm(&["--help"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    for cmd in ["climatology", "fit", "apply", "stats", "fanova", "regions", "import"] {
        assert!(text.contains(cmd), "{cmd} missing from help");
    }
}
