#include "cli.hpp"

int main(int argc, char** argv) { return croprow::run_cli(argc, argv); }
