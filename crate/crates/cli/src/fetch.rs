//! Reference bits from a remote quantum RNG service over HTTP.
//!
//! The service answers `GET <endpoint>?length=<bytes>&type=uint8` with a
//! JSON body whose `data` field is an array of byte values.

use std::time::Duration;

use qkdrand_core::BitSequence;
use serde::Deserialize;
use thiserror::Error;

pub const DEFAULT_ENDPOINT: &str = "https://qrng.anu.edu.au/API/jsonI.php";
pub const ENDPOINT_ENV: &str = "QKDRAND_ENDPOINT";
/// Largest request the service accepts.
pub const MAX_BYTES_PER_REQUEST: usize = 1024;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FetchError {
    #[error("network error: {0}")]
    NetworkError(String),
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("request timed out")]
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransportError {
    Timeout,
    Other(String),
}

/// Minimal blocking HTTP GET, so tests can substitute a mock.
pub trait HttpGet {
    fn get(&self, url: &str, timeout: Duration) -> Result<HttpResponse, TransportError>;
}

pub struct UreqClient;

impl HttpGet for UreqClient {
    fn get(&self, url: &str, timeout: Duration) -> Result<HttpResponse, TransportError> {
        let agent: ureq::Agent =
            ureq::Agent::config_builder().timeout_global(Some(timeout)).http_status_as_error(false).build().into();
        match agent.get(url).call() {
            Ok(mut resp) => {
                let status = resp.status().as_u16();
                let body = resp.body_mut().read_to_string().map_err(|e| match e {
                    ureq::Error::Timeout(_) => TransportError::Timeout,
                    other => TransportError::Other(other.to_string()),
                })?;
                Ok(HttpResponse { status, body })
            }
            Err(ureq::Error::Timeout(_)) => Err(TransportError::Timeout),
            Err(e) => Err(TransportError::Other(e.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub attempts: u32,
    /// Delay before the second attempt; doubles after each failure.
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { attempts: 3, base_delay: Duration::from_millis(500) }
    }
}

#[derive(Deserialize)]
struct Payload {
    data: Vec<serde_json::Value>,
}

/// Endpoint from the environment override, else the default service.
pub fn endpoint_from_env() -> String {
    std::env::var(ENDPOINT_ENV).ok().filter(|s| !s.is_empty()).unwrap_or_else(|| DEFAULT_ENDPOINT.to_string())
}

fn request_url(endpoint: &str, bytes: usize) -> String {
    let sep = if endpoint.contains('?') { '&' } else { '?' };
    format!("{endpoint}{sep}length={bytes}&type=uint8")
}

fn parse_bytes(body: &str, expected: usize) -> Result<Vec<u8>, FetchError> {
    let payload: Payload =
        serde_json::from_str(body).map_err(|e| FetchError::MalformedResponse(format!("not a data array: {e}")))?;
    let bytes = payload
        .data
        .iter()
        .map(|v| {
            v.as_u64()
                .filter(|&b| b <= 255)
                .map(|b| b as u8)
                .ok_or_else(|| FetchError::MalformedResponse(format!("{v} is not an 8-bit integer")))
        })
        .collect::<Result<Vec<u8>, _>>()?;
    if bytes.len() < expected {
        return Err(FetchError::MalformedResponse(format!("asked for {expected} bytes, got {}", bytes.len())));
    }
    Ok(bytes)
}

fn fetch_chunk(
    client: &dyn HttpGet,
    url: &str,
    bytes: usize,
    timeout: Duration,
    policy: RetryPolicy,
) -> Result<Vec<u8>, FetchError> {
    let mut delay = policy.base_delay;
    let mut last = FetchError::NetworkError("no attempt made".into());
    for attempt in 0..policy.attempts.max(1) {
        if attempt > 0 {
            std::thread::sleep(delay);
            delay *= 2;
        }
        last = match client.get(url, timeout) {
            Ok(resp) if (200..300).contains(&resp.status) => return parse_bytes(&resp.body, bytes),
            Ok(resp) => FetchError::NetworkError(format!("HTTP status {}", resp.status)),
            Err(TransportError::Timeout) => FetchError::Timeout,
            Err(TransportError::Other(msg)) => FetchError::NetworkError(msg),
        };
    }
    Err(last)
}

/// Fetches exactly `n` bits, unpacking each byte MSB-first and dropping the
/// unused tail of the last byte. `n = 0` makes no request.
pub fn fetch_remote_bits(
    client: &dyn HttpGet,
    endpoint: &str,
    n: usize,
    timeout: Duration,
    policy: RetryPolicy,
) -> Result<BitSequence, FetchError> {
    let total = n.div_ceil(8);
    let mut bytes = Vec::with_capacity(total);
    while bytes.len() < total {
        let want = (total - bytes.len()).min(MAX_BYTES_PER_REQUEST);
        let chunk = fetch_chunk(client, &request_url(endpoint, want), want, timeout, policy)?;
        bytes.extend_from_slice(&chunk[..want]);
    }
    if !n.is_multiple_of(8) {
        // clear the dropped tail so the packed form is canonical
        let last = bytes.len() - 1;
        bytes[last] &= 0xffu8 << (8 - n % 8);
    }
    BitSequence::from_packed(bytes, n).map_err(|e| FetchError::MalformedResponse(e.to_string()))
}
