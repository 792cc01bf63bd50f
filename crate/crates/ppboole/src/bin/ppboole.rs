fn main() {
    std::process::exit(ppboole::cli_run());
}
