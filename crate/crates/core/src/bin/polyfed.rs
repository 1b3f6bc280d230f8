use std::io;

fn main() {
    let stdin = io::stdin();
    let mut stdin = stdin.lock();
    let (mut stdout, mut stderr) = (io::stdout(), io::stderr());
    let code = polyfed::cli::run(
        std::env::args_os(),
        &mut polyfed::cli::Io { stdin: &mut stdin, stdout: &mut stdout, stderr: &mut stderr },
    );
    std::process::exit(code);
}
