#include "sembed/cli.hpp"

int main(int argc, char** argv) { return sembed::cli::run(argc, argv); }
