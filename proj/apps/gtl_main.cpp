#include "gtl/cli.hpp"

int main(int argc, char** argv) { return gtl::run_cli(argc, argv); }
