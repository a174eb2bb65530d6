#include "ganaudit/cli.hpp"

int main(int argc, char** argv) { return ganaudit::run_cli(argc, argv); }
