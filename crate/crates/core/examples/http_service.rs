//! Serves the scenario over HTTP on an ephemeral port, sends one query and
//! prints the JSON answer.

use polyfed::mediator::Mediator;
use polyfed::scenario;
use polyfed::service::{router, AppState};
use std::io::{Read, Write};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (catalog, adapters) = scenario::netherlands();
    let app = router(AppState::new(Mediator::new(catalog, adapters), None));
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
    let addr = listener.local_addr()?;
    tokio::spawn(async move { axum::serve(listener, app).await });

    let body = serde_json::json!({ "text": scenario::QUERY, "explain": true }).to_string();
    let request = format!(
        "POST /query HTTP/1.1\r\nhost: {addr}\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
        body.len()
    );
    let response = tokio::task::spawn_blocking(move || -> std::io::Result<String> {
        let mut conn = std::net::TcpStream::connect(addr)?;
        conn.write_all(request.as_bytes())?;
        let mut response = String::new();
        conn.read_to_string(&mut response)?;
        Ok(response)
    })
    .await??;
    let (head, json) = response.split_once("\r\n\r\n").unwrap_or((&response, ""));
    println!("{}", head.lines().next().unwrap_or_default());
    let value: serde_json::Value = serde_json::from_str(json)?;
    println!("{}", serde_json::to_string_pretty(&value)?);
    Ok(())
}
