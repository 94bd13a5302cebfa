//! Minimal stderr logger controlled by `CAPRELAB_LOG` (error|info|debug).

use std::sync::OnceLock;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Level {
    Error,
    Info,
    Debug,
}

static LEVEL: OnceLock<Level> = OnceLock::new();

pub fn level() -> Level {
    *LEVEL.get_or_init(|| match std::env::var("CAPRELAB_LOG").as_deref() {
        Ok("debug") => Level::Debug,
        Ok("info") => Level::Info,
        _ => Level::Error,
    })
}

pub fn info(msg: impl AsRef<str>) {
    if level() >= Level::Info {
        eprintln!("[info] {}", msg.as_ref());
    }
}

pub fn debug(msg: impl AsRef<str>) {
    if level() >= Level::Debug {
        eprintln!("[debug] {}", msg.as_ref());
    }
}

pub fn error(msg: impl AsRef<str>) {
    eprintln!("[error] {}", msg.as_ref());
}
