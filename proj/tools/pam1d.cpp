#include "pam1d/cli.hpp"

int main(int argc, char** argv) { return pam1d::cli_main(argc, argv); }
