#include "ubamc/cli.hpp"

int main(int argc, char** argv) { return ubamc::cli::run(argc, argv); }
