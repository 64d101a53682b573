#include "rnf/cli.hpp"

int main(int argc, char** argv) { return rnf::cli::dispatch(argc, argv); }
