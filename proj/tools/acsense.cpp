#include <acsense/cli.hpp>

int main(int argc, char** argv) { return acsense::cli_main(argc, argv); }
