#include "semiq/cli.hpp"

int main(int argc, char** argv) { return semiq::cli::run(argc, argv); }
