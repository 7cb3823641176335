use std::io::Write;

fn main() {
    let (code, out, err) = loqc_opt::cli::main_with_args(std::env::args_os());
    print!("{out}");
    eprint!("{err}");
    let _ = std::io::stdout().flush();
    std::process::exit(code);
}
