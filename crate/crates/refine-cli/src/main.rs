fn main() {
    let seed = std::env::var("REFINE_PROVER_SEED").ok();
    let code = refine_cli::run(std::env::args_os(), seed.as_deref(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    std::process::exit(code);
}
