#include "nanobot/cli.hpp"

int main(int argc, char** argv) { return nanobot::cli::run_cli(argc, argv); }
