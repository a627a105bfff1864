fn main() {
    // Die silently on a closed pipe (e.g. `bhts inventory | head`), like
    // other line-oriented Unix tools.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    std::process::exit(bhts_cli::run(std::env::args_os()));
}
