#include "werate/cli_runner.hpp"

int main(int argc, char** argv) { return werate::cli::run(argc, argv); }
