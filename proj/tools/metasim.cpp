#include "cli.hpp"

int main(int argc, char** argv) { return metasim::cli::run(argc, argv); }
