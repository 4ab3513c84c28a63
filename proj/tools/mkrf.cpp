#include "mkrf/commands.hpp"

int main(int argc, char** argv) { return mkrf::run_cli(argc, argv); }
