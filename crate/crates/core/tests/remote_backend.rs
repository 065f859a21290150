//! RemoteBackend against a scripted HTTP server on localhost.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use codemix_sarcasm::backend::{
    BackendError, ChatBackend, ChatRequest, RateLimit, RemoteBackend, RemoteConfig, RetryPolicy,
};

struct Captured {
    headers: Vec<String>,
    body: String,
}

struct FakeServer {
    url: String,
    requests: Arc<Mutex<Vec<Captured>>>,
    handle: Option<JoinHandle<()>>,
}

impl FakeServer {
    /// Answers one connection per scripted `(status, body)` pair, then stops.
    fn start(script: Vec<(u16, &'static str)>) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
        let requests = Arc::new(Mutex::new(Vec::new()));
        let log = Arc::clone(&requests);
        let handle = std::thread::spawn(move || {
            for (status, body) in script {
                let (stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut headers = Vec::new();
                let mut len = 0;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    let line = line.trim_end().to_string();
                    if line.is_empty() {
                        break;
                    }
                    if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap();
                    }
                    headers.push(line);
                }
                let mut buf = vec![0; len];
                reader.read_exact(&mut buf).unwrap();
                log.lock().unwrap().push(Captured {
                    headers,
                    body: String::from_utf8(buf).unwrap(),
                });
                let mut stream = stream;
                write!(
                    stream,
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                )
                .unwrap();
                stream.flush().unwrap();
            }
        });
        Self {
            url,
            requests,
            handle: Some(handle),
        }
    }

    fn finish(mut self) -> Vec<Captured> {
        self.handle.take().unwrap().join().unwrap();
        std::mem::take(&mut *self.requests.lock().unwrap())
    }
}

const OK: &str = r#"{"choices":[{"message":{"role":"assistant","content":"Sarcastic"},"finish_reason":"stop"}]}"#;

fn backend(url: &str, max_attempts: u32) -> RemoteBackend {
    let config = RemoteConfig {
        endpoint: url.to_string(),
        timeout: Duration::from_secs(5),
        retry: RetryPolicy {
            max_attempts,
            base_delay: Duration::from_millis(5),
            factor: 2.0,
            max_delay: Duration::from_millis(20),
        },
        rate_limit: RateLimit {
            max_in_flight: 2,
            requests_per_second: 0.0,
        },
        ..RemoteConfig::default()
    };
    RemoteBackend::with_api_key(config, "sk-test")
}

fn request() -> ChatRequest {
    ChatRequest::zero_shot("gpt-3.5-turbo", 0.7, 8, "Is this sarcastic? wow")
}

#[test]
fn success_sends_exact_wire_body_and_auth_header() {
    let server = FakeServer::start(vec![(200, OK)]);
    let resp = backend(&server.url, 3).send(&request()).unwrap();
    assert_eq!(resp.content, "Sarcastic");
    assert_eq!(resp.finish_reason, "stop");
    assert_eq!(resp.attempt_count, 1);

    let captured = server.finish();
    assert_eq!(captured.len(), 1);
    assert!(captured[0].headers[0].starts_with("POST /v1/chat/completions "));
    assert!(captured[0].headers.iter().any(|h| h == "Authorization: Bearer sk-test"));
    let body: serde_json::Value = serde_json::from_str(&captured[0].body).unwrap();
    assert_eq!(
        body,
        serde_json::json!({
            "model": "gpt-3.5-turbo",
            "messages": [{"role": "user", "content": "Is this sarcastic? wow"}],
            "temperature": 0.7,
            "max_tokens": 8
        })
    );
}

#[test]
fn unauthorized_is_terminal_after_one_attempt() {
    let server = FakeServer::start(vec![(401, r#"{"error":"bad key"}"#)]);
    let err = backend(&server.url, 5).send(&request()).unwrap_err();
    assert!(matches!(
        err,
        BackendError::Authentication {
            status: 401,
            attempts: 1
        }
    ));
    assert_eq!(err.attempt_count(), 1);
    assert_eq!(server.finish().len(), 1);
}

#[test]
fn bad_request_is_rejected_without_retry() {
    let server = FakeServer::start(vec![(400, r#"{"error":"max_tokens too large"}"#)]);
    let err = backend(&server.url, 5).send(&request()).unwrap_err();
    match err {
        BackendError::Rejected { status, attempts, body } => {
            assert_eq!((status, attempts), (400, 1));
            assert!(body.contains("max_tokens"));
        }
        other => panic!("expected rejection, got {other:?}"),
    }
    assert_eq!(server.finish().len(), 1);
}

#[test]
fn server_errors_and_throttling_are_retried() {
    let server = FakeServer::start(vec![(500, "{}"), (429, "{}"), (200, OK)]);
    let resp = backend(&server.url, 5).send(&request()).unwrap();
    assert_eq!(resp.attempt_count, 3);
    let captured = server.finish();
    assert_eq!(captured.len(), 3);
    assert!(captured.windows(2).all(|w| w[0].body == w[1].body));
}

#[test]
fn retries_exhaust() {
    let server = FakeServer::start(vec![(503, "{}"), (503, "{}"), (503, "{}")]);
    let err = backend(&server.url, 3).send(&request()).unwrap_err();
    match &err {
        BackendError::RetriesExhausted { attempts, last_error } => {
            assert_eq!(*attempts, 3);
            assert!(last_error.contains("503"));
        }
        other => panic!("expected exhaustion, got {other:?}"),
    }
    assert_eq!(err.attempt_count(), 3);
    assert_eq!(server.finish().len(), 3);
}

#[test]
fn malformed_body_is_a_protocol_error() {
    let server = FakeServer::start(vec![(200, r#"{"choices":[]}"#)]);
    let err = backend(&server.url, 5).send(&request()).unwrap_err();
    assert!(matches!(err, BackendError::Protocol { attempts: 1, .. }), "{err:?}");
    server.finish();

    let server = FakeServer::start(vec![(200, "not json")]);
    let err = backend(&server.url, 5).send(&request()).unwrap_err();
    assert!(matches!(err, BackendError::Protocol { .. }));
    server.finish();
}

#[test]
fn connection_refused_is_retried_then_exhausted() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let err = backend(&format!("http://127.0.0.1:{port}/v1/chat/completions"), 2)
        .send(&request())
        .unwrap_err();
    assert!(
        matches!(err, BackendError::RetriesExhausted { attempts: 2, .. }),
        "{err:?}"
    );
}

#[test]
fn missing_key_is_reported_before_any_request() {
    let config = RemoteConfig {
        api_key_env: "CODEMIX_SARCASM_TEST_UNSET_KEY".into(),
        ..RemoteConfig::default()
    };
    match RemoteBackend::from_env(config) {
        Err(BackendError::MissingApiKey(var)) => assert_eq!(var, "CODEMIX_SARCASM_TEST_UNSET_KEY"),
        other => panic!("expected missing key, got {other:?}"),
    }
}

#[test]
fn backoff_cap_grows_then_saturates() {
    let p = RetryPolicy::default();
    let caps: Vec<u64> = (1..=8).map(|k| p.backoff_cap(k).as_secs()).collect();
    assert_eq!(caps, [1, 2, 4, 8, 16, 32, 60, 60]);
}

#[test]
fn token_bucket_spaces_requests() {
    let server = FakeServer::start(vec![(200, OK); 6]);
    let config = RemoteConfig {
        rate_limit: RateLimit {
            max_in_flight: 1,
            requests_per_second: 4.0,
        },
        ..backend(&server.url, 1).config().clone()
    };
    let b = RemoteBackend::with_api_key(config, "sk-test");
    let start = std::time::Instant::now();
    for _ in 0..6 {
        b.send(&request()).unwrap();
    }
    // four tokens up front, then one every 250 ms
    assert!(start.elapsed() >= Duration::from_millis(450), "{:?}", start.elapsed());
    server.finish();
}
