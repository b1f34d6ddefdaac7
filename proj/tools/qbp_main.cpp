#include "qbp/cli/cli.hpp"

int main(int argc, char** argv) { return qbp::cli::run(argc, argv); }
