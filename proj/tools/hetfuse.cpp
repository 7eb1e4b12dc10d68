#include "hetfuse/cli_app.hpp"

int main(int argc, char** argv) { return hetfuse::cli::main(argc, argv); }
