#include "frheston/cli.hpp"

int main(int argc, char** argv) { return frh::cli::run(argc, argv); }
