#include "logicloss/cli.hpp"

int main(int argc, char** argv) { return logicloss::run_cli(argc, argv); }
