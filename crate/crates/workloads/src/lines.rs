use std::io::{self, Read};

use memchr::memrchr;

const BLOCK: usize = 1 << 20;

/// Calls `f` with consecutive blocks of whole lines. Every block but the
/// last ends with `\n`; the last holds an unterminated final line, if any.
/// A line longer than the block size grows the buffer.
pub(crate) fn for_each_block<R: Read, F: FnMut(&[u8])>(mut reader: R, mut f: F) -> io::Result<u64> {
    let mut buf = vec![0u8; BLOCK];
    let mut filled = 0;
    let mut total = 0u64;
    loop {
        if filled == buf.len() {
            buf.resize(buf.len() * 2, 0);
        }
        let n = match reader.read(&mut buf[filled..]) {
            Ok(n) => n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
            Err(e) => return Err(e),
        };
        total += n as u64;
        if n == 0 {
            if filled > 0 {
                f(&buf[..filled]);
            }
            return Ok(total);
        }
        let end = filled + n;
        match memrchr(b'\n', &buf[filled..end]) {
            Some(i) => {
                let cut = filled + i + 1;
                f(&buf[..cut]);
                buf.copy_within(cut..end, 0);
                filled = end - cut;
            }
            None => filled = end,
        }
    }
}
