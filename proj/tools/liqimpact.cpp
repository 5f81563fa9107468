#include "liqimpact/cli.hpp"

int main(int argc, char** argv) { return liqimpact::cli::run(argc, argv); }
