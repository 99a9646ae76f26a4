#include "pulseflow/cli.hpp"

int main(int argc, char** argv) { return pulseflow::run_cli(argc, argv); }
