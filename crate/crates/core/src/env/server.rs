//! Transports: standard streams, TCP and unix sockets.
//!
//! Each connection gets its own thread and its own [`Session`]. A reader
//! thread feeds request lines through a channel so the session loop can poll
//! the shutdown flag; on shutdown every open session receives a `shutdown`
//! error frame before the connection closes.

use std::io::{self, BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::Duration;

use crate::config::SimConfig;

use super::protocol::{ErrorCode, Response};
use super::session::Session;

const POLL: Duration = Duration::from_millis(50);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    Stdio,
    /// `tcp:HOST:PORT`
    Tcp(String),
    /// `unix:PATH`
    Unix(PathBuf),
}

impl FromStr for Endpoint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "stdio" || s == "-" {
            Ok(Endpoint::Stdio)
        } else if let Some(addr) = s.strip_prefix("tcp:") {
            Ok(Endpoint::Tcp(addr.to_string()))
        } else if let Some(path) = s.strip_prefix("unix:") {
            Ok(Endpoint::Unix(PathBuf::from(path)))
        } else {
            Err(format!("endpoint `{s}`: expected stdio, tcp:HOST:PORT or unix:PATH"))
        }
    }
}

/// How a session loop ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionEnd {
    /// The peer closed its side; any episode in progress is discarded.
    Disconnected,
    Shutdown,
}

/// Spawn a thread that forwards lines read from `input`.
fn line_feed<R: Read + Send + 'static>(input: R) -> Receiver<io::Result<Vec<u8>>> {
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let mut reader = BufReader::new(input);
        loop {
            let mut buf = Vec::new();
            match reader.read_until(b'\n', &mut buf) {
                Ok(0) => break,
                Ok(_) => {
                    if tx.send(Ok(buf)).is_err() {
                        break;
                    }
                }
                Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                Err(e) => {
                    let _ = tx.send(Err(e));
                    break;
                }
            }
        }
    });
    rx
}

/// Answer request lines until the peer disconnects or `shutdown` is set.
pub fn run_session<W: Write>(
    lines: &Receiver<io::Result<Vec<u8>>>,
    out: &mut W,
    config: &SimConfig,
    shutdown: &AtomicBool,
) -> io::Result<SessionEnd> {
    let mut session = Session::new(config.clone());
    loop {
        if shutdown.load(Ordering::SeqCst) {
            let frame = Response::error(ErrorCode::Shutdown, "server shutting down").to_line();
            writeln!(out, "{frame}")?;
            out.flush()?;
            return Ok(SessionEnd::Shutdown);
        }
        match lines.recv_timeout(POLL) {
            Ok(Ok(bytes)) => {
                let text = String::from_utf8_lossy(&bytes);
                let line = text.trim();
                if line.is_empty() {
                    continue;
                }
                writeln!(out, "{}", session.handle_line(line))?;
                out.flush()?;
            }
            Ok(Err(e)) => return Err(e),
            Err(RecvTimeoutError::Timeout) => {}
            Err(RecvTimeoutError::Disconnected) => return Ok(SessionEnd::Disconnected),
        }
    }
}

/// Serve until `shutdown` is set (or, for stdio, until standard input closes).
pub fn serve(endpoint: &Endpoint, config: &SimConfig, shutdown: Arc<AtomicBool>) -> io::Result<()> {
    match endpoint {
        Endpoint::Stdio => {
            let lines = line_feed(io::stdin());
            let mut out = io::stdout().lock();
            run_session(&lines, &mut out, config, &shutdown).map(|_| ())
        }
        Endpoint::Tcp(addr) => {
            let listener = TcpListener::bind(addr)?;
            serve_tcp(listener, config, shutdown)
        }
        #[cfg(unix)]
        Endpoint::Unix(path) => {
            let listener = std::os::unix::net::UnixListener::bind(path)?;
            let result = serve_unix(listener, config, shutdown);
            let _ = std::fs::remove_file(path);
            result
        }
        #[cfg(not(unix))]
        Endpoint::Unix(_) => Err(io::Error::new(io::ErrorKind::Unsupported, "unix sockets need a unix platform")),
    }
}

/// Accept TCP connections on an already bound listener.
pub fn serve_tcp(listener: TcpListener, config: &SimConfig, shutdown: Arc<AtomicBool>) -> io::Result<()> {
    listener.set_nonblocking(true)?;
    let mut workers = Vec::new();
    while !shutdown.load(Ordering::SeqCst) {
        match listener.accept() {
            Ok((stream, _)) => {
                stream.set_nonblocking(false)?;
                let reader = stream.try_clone()?;
                let closer = stream.try_clone()?;
                workers.push(spawn_worker(reader, stream, config, &shutdown, move || {
                    let _ = closer.shutdown(std::net::Shutdown::Both);
                }));
            }
            Err(e) if e.kind() == io::ErrorKind::WouldBlock => thread::sleep(POLL),
            Err(e) => return Err(e),
        }
        workers.retain(|w: &JoinHandle<()>| !w.is_finished());
    }
    for w in workers {
        let _ = w.join();
    }
    Ok(())
}

#[cfg(unix)]
pub fn serve_unix(
    listener: std::os::unix::net::UnixListener,
    config: &SimConfig,
    shutdown: Arc<AtomicBool>,
) -> io::Result<()> {
    listener.set_nonblocking(true)?;
    let mut workers = Vec::new();
    while !shutdown.load(Ordering::SeqCst) {
        match listener.accept() {
            Ok((stream, _)) => {
                stream.set_nonblocking(false)?;
                let reader = stream.try_clone()?;
                let closer = stream.try_clone()?;
                workers.push(spawn_worker(reader, stream, config, &shutdown, move || {
                    let _ = closer.shutdown(std::net::Shutdown::Both);
                }));
            }
            Err(e) if e.kind() == io::ErrorKind::WouldBlock => thread::sleep(POLL),
            Err(e) => return Err(e),
        }
        workers.retain(|w: &JoinHandle<()>| !w.is_finished());
    }
    for w in workers {
        let _ = w.join();
    }
    Ok(())
}

fn spawn_worker<R, W, F>(reader: R, mut writer: W, config: &SimConfig, shutdown: &Arc<AtomicBool>, close: F) -> JoinHandle<()>
where
    R: Read + Send + 'static,
    W: Write + Send + 'static,
    F: FnOnce() + Send + 'static,
{
    let config = config.clone();
    let shutdown = Arc::clone(shutdown);
    thread::spawn(move || {
        let lines = line_feed(reader);
        // a broken pipe just ends the session
        let _ = run_session(&lines, &mut writer, &config, &shutdown);
        // unblocks the reader thread
        close();
    })
}
