use std::io::Write;

fn main() {
    let verdict = afkit::cli::run(std::env::args_os(), &mut std::io::stdin().lock());
    let out = verdict.render();
    let _ = std::io::stdout().lock().write_all(out.as_bytes());
    std::process::exit(verdict.exit_code());
}
