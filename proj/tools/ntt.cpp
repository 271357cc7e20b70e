#include "ntt/cli.hpp"

int main(int argc, char** argv) { return ntt::run_cli(argc, argv); }
