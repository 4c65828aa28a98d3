#include "coalflow/cli.hpp"

int main(int argc, char** argv) { return coalflow::cli::run(argc, argv); }
