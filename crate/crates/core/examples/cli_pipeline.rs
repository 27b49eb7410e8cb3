//! Drives the command-line front end in process: build a tower, save it,
//! intersect it with a line and realize a distance.

use plane_branches::cli::run;

fn call(args: &[&str]) -> String {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("branches").chain(args.iter().copied()), &mut out, &mut err);
    assert_eq!(code, 0, "{}", String::from_utf8_lossy(&err));
    String::from_utf8(out).unwrap()
}

pub fn main() {
    let dir = std::env::temp_dir().join(format!("branches-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("f.json");
    let line = dir.join("line.json");
    let f_path = f.to_str().unwrap();
    let line_path = line.to_str().unwrap();

    call(&["branch", "build", "--char", "4,6,13", "--xi", "1,2", "--perturb", "5,1,1:3", "-o", f_path]);
    std::fs::write(&line, r#"{"ydeg":1,"precision":"exact","terms":[]}"#).unwrap();

    print!("{}", call(&["charseq", "info", "4,6,13"]));
    print!("{}", call(&["intersect", "--f", f_path, "--g", line_path]));
    print!("{}", call(&["distance", "--f", f_path, "--r", "7/4", "--seed", "3"]));
    std::fs::remove_dir_all(&dir).unwrap();
}
