#include "gge/harness.hpp"

int main(int argc, char** argv) { return gge::cli_main(argc, argv); }
