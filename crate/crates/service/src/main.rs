use std::process::ExitCode;

use ssn_service::{serve, Config};

#[tokio::main]
async fn main() -> ExitCode {
    let config = match Config::from_env() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("ssn-service: {e}");
            return ExitCode::from(2);
        }
    };
    let listener = match tokio::net::TcpListener::bind(config.bind_addr).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("ssn-service: cannot bind {}: {e}", config.bind_addr);
            return ExitCode::from(2);
        }
    };
    let addr = listener.local_addr().map(|a| a.to_string()).unwrap_or_default();
    eprintln!("ssn-service: listening on {addr}, data in {}", config.data_dir.display());
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    match serve(&config, listener, shutdown).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ssn-service: {e}");
            ExitCode::FAILURE
        }
    }
}
