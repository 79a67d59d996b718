use std::path::PathBuf;

use clap::Parser;
use kbdebug_service::{serve, Store};
use tracing_subscriber::EnvFilter;

/// Serve debugging sessions over HTTP.
#[derive(Parser)]
#[command(version)]
struct Args {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Where session files are kept.
    #[arg(long, env = "KBDEBUG_DATA_DIR", default_value = "kbdebug-data")]
    data_dir: PathBuf,
}

#[tokio::main]
async fn main() -> std::io::Result<()> {
    tracing_subscriber::fmt().with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info"))).init();
    let args = Args::parse();
    let store = Store::open(&args.data_dir)?;
    let listener = tokio::net::TcpListener::bind((args.host.as_str(), args.port)).await?;
    tracing::info!("listening on {}, data in {}", listener.local_addr()?, store.dir().display());
    serve(listener, store).await
}
