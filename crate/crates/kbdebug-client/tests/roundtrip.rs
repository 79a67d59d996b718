use kbdebug::api::CreateSessionRequest;
use kbdebug::logic::Dpi;
use kbdebug::session::{start_session, submit_answer, Reply, SessionConfig, SessionStatus};
use kbdebug_client::Client;
use reqwest::StatusCode;

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn server() -> (Client, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let addr = kbdebug_service::spawn_background(dir.path()).unwrap();
    (Client::new(&format!("http://{addr}/")), dir)
}

#[test]
fn remote_session_matches_a_local_one_byte_for_byte() {
    let (client, _dir) = server();
    client.health().unwrap();
    let config = SessionConfig { fault_model: serde_json::from_str(&fixture("example2.faults.json")).unwrap(), ..SessionConfig::default() };
    let req = CreateSessionRequest { dpi: serde_json::from_str(&fixture("example2.json")).unwrap(), config: config.clone() };
    let view = client.create_session(&req).unwrap();
    let id = view.session_id.clone();
    assert_eq!(view.query.unwrap(), vec!["M1 sub B"]);

    let mut local = start_session(Dpi::from_json(&fixture("example2.json")).unwrap(), config).unwrap();
    for reply in [Reply::Yes, Reply::Skip, Reply::Yes, Reply::No, Reply::Yes] {
        if local.status != SessionStatus::AwaitingAnswer {
            break;
        }
        submit_answer(&mut local, reply).unwrap();
        client.answer(&id, reply).unwrap();
    }
    let remote = client.session(&id).unwrap().record.snapshot;
    assert_eq!(serde_json::to_string(&remote).unwrap(), serde_json::to_string(&local).unwrap());
    assert_eq!(client.diagnoses(&id).unwrap().diagnoses, local.diagnoses());
}

#[test]
fn errors_carry_status_and_message() {
    let (client, _dir) = server();
    let err = client.session("missing").unwrap_err();
    assert_eq!(err.status(), Some(StatusCode::NOT_FOUND));
    let req = CreateSessionRequest { dpi: serde_json::from_str(&fixture("example1.json")).unwrap(), config: SessionConfig::default() };
    let id = client.create_session(&req).unwrap().session_id;
    client.answer(&id, Reply::No).unwrap();
    let done = client.answer(&id, Reply::No).unwrap();
    assert_eq!(done.status, SessionStatus::Converged);
    let err = client.answer(&id, Reply::No).unwrap_err();
    assert_eq!(err.status(), Some(StatusCode::CONFLICT));
    assert!(err.to_string().contains("no query is pending"));
}
