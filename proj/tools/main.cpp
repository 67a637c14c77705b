#include "ratchet/cli.hpp"

int main(int argc, char** argv) { return ratchet::cli::run(argc, argv); }
