#include "regcomplex/cli.hpp"

int main(int argc, char** argv) { return regcomplex::cli::main_entry(argc, argv); }
