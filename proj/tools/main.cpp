#include "cli.hpp"

int main(int argc, char** argv) { return fssa::cli::run(argc, argv); }
