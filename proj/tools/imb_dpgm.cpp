#include "imb/cli.hpp"

int main(int argc, char** argv) { return imb::cli::run(argc, argv); }
