#include "jpave/cli.hpp"

int main(int argc, char** argv) { return jpave::cli::run(argc, argv); }
