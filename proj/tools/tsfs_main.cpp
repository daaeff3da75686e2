#include "tsfs/cli.hpp"

int main(int argc, char** argv) { return tsfs::cli::run_command(std::vector<std::string>(argv, argv + argc)); }
