#include "pairlearn/cli_main.hpp"

int main(int argc, char** argv) { return pairlearn::cli::cli_main(argc, argv); }
