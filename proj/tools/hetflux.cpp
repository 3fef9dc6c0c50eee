#include "hetflux/cli.hpp"

int main(int argc, char** argv) { return hetflux::cli::dispatch(argc, argv); }
