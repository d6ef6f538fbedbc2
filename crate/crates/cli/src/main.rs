use clap::Parser;
use dab_cli::args::Cli;
use dab_cli::error::CliError;

fn fail(e: CliError) -> ! {
    eprintln!("{}", e.record());
    std::process::exit(e.exit_code());
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => fail(CliError::Usage(
            e.render().to_string().trim_end().to_owned(),
        )),
    };
    if let Err(e) = dab_cli::run(cli) {
        fail(e);
    }
}
