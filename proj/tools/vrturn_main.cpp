#include "vrturn/cli.hpp"

int main(int argc, char** argv) { return vrturn::cli::run(argc, argv); }
